#include "deriver/server.hpp"

#include <httplib.h>

#include "deriver/wire.hpp"

namespace deriver {

namespace {

void send_json(httplib::Response& res, const Json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

Json body_of(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
        return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
        throw ServiceError(400, "BadRequest", std::string("malformed JSON: ") + e.what());
    }
}

// Wraps a route so every failure leaves as a JSON error body.
template <typename F>
httplib::Server::Handler route(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ServiceError& e) {
            send_json(res, e.body(), e.status);
        } catch (const std::exception& e) {
            send_json(res, error_body("Internal", e.what()), 500);
        }
    };
}

}  // namespace

void install_routes(httplib::Server& srv, SessionManager& m) {
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Post("/sessions", route([&m](const auto& req, auto& res) { send_json(res, m.create(body_of(req)), 201); }));
    srv.Delete("/sessions/:id", route([&m](const auto& req, auto& res) {
                   m.close(req.path_params.at("id"));
                   res.status = 204;
               }));
    srv.Post("/sessions/:id/edits", route([&m](const auto& req, auto& res) {
                 send_json(res, m.post_edit(req.path_params.at("id"), body_of(req)));
             }));
    srv.Post("/sessions/:id/undo",
             route([&m](const auto& req, auto& res) { send_json(res, m.undo(req.path_params.at("id"))); }));
    srv.Post("/sessions/:id/redo",
             route([&m](const auto& req, auto& res) { send_json(res, m.redo(req.path_params.at("id"))); }));
    srv.Get("/sessions/:id/state",
            route([&m](const auto& req, auto& res) { send_json(res, m.state(req.path_params.at("id"))); }));
    srv.Get("/sessions/:id/rules", route([&m](const auto& req, auto& res) {
                send_json(res, m.rules(req.path_params.at("id"), param(req, "query").value_or(""),
                                       param(req, "category")));
            }));
    srv.Get("/sessions/:id/doc", route([&m](const auto& req, auto& res) {
                send_json(res, m.doc_for(req.path_params.at("id"), param(req, "node"), param(req, "rule")));
            }));
    srv.Get("/sessions/:id/export", route([&m](const auto& req, auto& res) {
                res.set_content(m.export_text(req.path_params.at("id")), "text/plain; charset=utf-8");
            }));
    srv.Post("/parse", route([](const auto& req, auto& res) {
                 send_json(res, SessionManager::parse_check(body_of(req)));
             }));
}

bool run_server(SessionManager& manager, const std::string& host, int port) {
    httplib::Server srv;
    install_routes(srv, manager);
    return srv.listen(host, port);
}

}  // namespace deriver
