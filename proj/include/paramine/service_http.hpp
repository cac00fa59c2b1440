#pragma once

#include <httplib.h>

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>

#include "paramine/service.hpp"

namespace paramine {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ForbiddenError& e) {
    send_error(res, 403, e.what());
  } catch (const ConflictError& e) {
    send_error(res, 409, e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("bad request body: ") + e.what());
  } catch (const Error& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace detail

/// JSON API:
///   GET  /api/task?annotator=ID   -> {pair_id, phrase1, phrase2} or 204
///   POST /api/judgment            <- {annotator, pair_id, category}
///   GET  /api/progress            -> counts per state
///   POST /api/adjudicate          -> {labels: {pair_id: label}}
/// With static_dir set, "/" serves the browser client's files.
inline void install_routes(httplib::Server& server, AnnotationService& service,
                           const std::optional<std::filesystem::path>& static_dir = {}) {
  server.Get("/api/task", [&service](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      if (!req.has_param("annotator")) throw Error("missing annotator parameter");
      auto task = service.next_task(req.get_param_value("annotator"));
      if (!task) {
        res.status = 204;
        return;
      }
      detail::send_json(res, 200,
                        {{"pair_id", task->pair_id},
                         {"phrase1", task->phrase1},
                         {"phrase2", task->phrase2}});
    });
  });

  server.Post("/api/judgment", [&service](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      const auto category_name = body.at("category").get<std::string>();
      const auto category = parse_category(category_name);
      if (!category) throw Error("unknown category '" + category_name + "'");
      const auto outcome = service.submit(body.at("annotator").get<std::string>(),
                                          body.at("pair_id").get<std::string>(), *category);
      detail::send_json(res, 200,
                        {{"status", "ok"}, {"duplicate", outcome == SubmitOutcome::duplicate}});
    });
  });

  server.Get("/api/progress", [&service](const httplib::Request&, httplib::Response& res) {
    detail::guarded(res, [&] {
      const Progress p = service.progress();
      detail::send_json(res, 200,
                        {{"pairs", p.pairs},
                         {"unassigned", p.unassigned},
                         {"in_progress", p.in_progress},
                         {"complete", p.complete},
                         {"pending_tasks", p.pending_tasks},
                         {"judgments", p.judgments}});
    });
  });

  server.Post("/api/adjudicate", [&service](const httplib::Request&, httplib::Response& res) {
    detail::guarded(res, [&] {
      nlohmann::json labels = nlohmann::json::object();
      for (const auto& [id, label] : service.adjudicate_all())
        labels[id] = std::string(to_string(label));
      detail::send_json(res, 200, {{"labels", labels}});
    });
  });

  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace paramine
