#pragma once

#include <stdexcept>
#include <string>

namespace paramine {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A phrase that a score needs was never observed in the table.
class UnknownPhrase : public Error {
 public:
  explicit UnknownPhrase(const std::string& phrase)
      : Error("unknown phrase: " + phrase) {}
};

/// The two phrases share no pivot translation, so the joint mass is zero.
class NoCooccurrence : public Error {
 public:
  explicit NoCooccurrence(const std::string& what) : Error(what) {}
};

}  // namespace paramine
