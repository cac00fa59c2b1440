#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "paramine/bitext.hpp"
#include "paramine/cooccurrence.hpp"

namespace testing_support {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "paramine-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// Library tables of oracle corpora, built through the text parser.
inline std::vector<paramine::CooccurrenceTable> tables_of(
    const std::vector<oracle::Corpus>& corpora) {
  std::vector<paramine::CooccurrenceTable> tables;
  for (const auto& c : corpora) {
    std::string text;
    for (const auto& l : c.lines) text += l.target + "\t" + l.pivot + "\n";
    std::istringstream in(text);
    auto report = paramine::parse_bitext(in, c.lang);
    if (!report.skipped_lines.empty()) throw std::runtime_error("oracle corpus line skipped");
    tables.push_back(paramine::build_table(report.lines));
  }
  return tables;
}

inline paramine::CooccurrenceTable table_of(const std::string& lang,
                                            const std::vector<oracle::Line>& lines) {
  return tables_of({oracle::Corpus{lang, lines}}).front();
}

struct CommandResult {
  int status = -1;
  std::string output;  // stdout and stderr
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace testing_support
