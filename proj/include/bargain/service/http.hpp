#pragma once

#include <string>

#include <httplib.h>

#include "bargain/service/session.hpp"

namespace bargain::service {

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw bad_request(std::string("request body is not JSON: ") + e.what());
  }
}

inline Offer parse_offer(SessionManager& mgr, const std::string& id, const json& j) {
  const auto& body = j.contains("offer") ? j.at("offer") : j;
  const auto config = mgr.with_session(id, [](Session& s) { return s.game().config(); });
  try {
    return offer_from_json(body, config);
  } catch (const std::exception& e) {
    throw ServiceError(422, "MalformedOffer", e.what());
  }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, 200, fn(req));
    } catch (const ServiceError& e) {
      send_json(res, e.status(), {{"schema", kApiSchema}, {"error", e.code()}, {"message", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"schema", kApiSchema}, {"error", "internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace detail

/// Registers the JSON API on `server`. Offers use the log format:
/// {"pass":true} or {"give":{"color","qty"},"get":{"color","qty"}}.
inline void install_routes(httplib::Server& server, SessionManager& mgr) {
  using detail::guarded;
  server.Post("/sessions", guarded([&](const httplib::Request& req) { return mgr.create(detail::parse_body(req)); }));
  server.Get(R"(/sessions/([^/]+)/view)",
             guarded([&](const httplib::Request& req) { return mgr.view(req.matches[1]); }));
  server.Post(R"(/sessions/([^/]+)/proposal)", guarded([&](const httplib::Request& req) {
                const std::string id = req.matches[1];
                return mgr.propose(id, detail::parse_offer(mgr, id, detail::parse_body(req)));
              }));
  server.Post(R"(/sessions/([^/]+)/response)", guarded([&](const httplib::Request& req) {
                const auto body = detail::parse_body(req);
                bool accept = false;
                if (body.contains("accept") && body.at("accept").is_boolean())
                  accept = body.at("accept").get<bool>();
                else if (body.value("choice", std::string()) == "accept")
                  accept = true;
                else if (body.value("choice", std::string()) != "decline")
                  throw bad_request("expected {\"accept\": true|false}");
                return mgr.respond(req.matches[1], accept);
              }));
  server.Get(R"(/sessions/([^/]+)/preview)", guarded([&](const httplib::Request& req) {
               const std::string id = req.matches[1];
               if (!req.has_param("offer")) throw bad_request("missing offer parameter");
               json j;
               try {
                 j = json::parse(req.get_param_value("offer"));
               } catch (const json::parse_error& e) {
                 throw bad_request(std::string("offer is not JSON: ") + e.what());
               }
               return mgr.preview(id, detail::parse_offer(mgr, id, j));
             }));
  server.Get(R"(/sessions/([^/]+)/events)", guarded([&](const httplib::Request& req) {
               std::uint64_t since = 0;
               if (req.has_param("since")) {
                 try {
                   since = std::stoull(req.get_param_value("since"));
                 } catch (const std::exception&) {
                   throw bad_request("since must be a non-negative integer");
                 }
               }
               return mgr.events(req.matches[1], since);
             }));
}

}  // namespace bargain::service
