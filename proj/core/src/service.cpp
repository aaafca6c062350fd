#include "fusion/service.hpp"

#include <httplib.h>

#include <fstream>

#include "fusion/serialization.hpp"

namespace fusion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string scrubbed(std::string message, const fs::path& root) {
    if (root.empty()) return message;
    for (const std::string& needle : {fs::absolute(root).lexically_normal().string(), root.string()}) {
        if (needle.empty()) continue;
        for (std::size_t at; (at = message.find(needle)) != std::string::npos;)
            message.replace(at, needle.size(), "<store>");
    }
    return message;
}

}  // namespace

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::validation: return 400;
        case ErrorCode::conflict: return 409;
        case ErrorCode::integrity:
        case ErrorCode::internal: return 500;
    }
    return 500;
}

ApiError to_api_error(std::exception_ptr error, const fs::path& scrub) {
    ApiError out;
    try {
        std::rethrow_exception(error);
    } catch (const GapError& e) {
        out = {e.code(), e.what(), {{"manual_steps", e.manual_steps()}}};
    } catch (const ReplayDivergenceError& e) {
        out = {e.code(), e.what(), {{"step", e.step()}}};
    } catch (const ParseError& e) {
        out = {e.code(), e.what(), {{"line", e.line()}}};
    } catch (const StaleSuggestionError& e) {
        out = {e.code(), e.what(), {{"reason", "stale_suggestion"}}};
    } catch (const SessionClosedError& e) {
        out = {e.code(), e.what(), {{"reason", "session_closed"}}};
    } catch (const Error& e) {
        out = {e.code(), e.what(), json::object()};
    } catch (const json::exception& e) {
        out = {ErrorCode::validation, std::string("malformed JSON: ") + e.what(), json::object()};
    } catch (const fs::filesystem_error&) {
        // filesystem_error messages embed absolute paths; keep them out of responses.
        out = {ErrorCode::internal, "storage error", json::object()};
    } catch (const std::exception& e) {
        out = {ErrorCode::internal, e.what(), json::object()};
    } catch (...) {
        out = {ErrorCode::internal, "unknown error", json::object()};
    }
    out.message = scrubbed(std::move(out.message), scrub);
    return out;
}

json to_json(const ApiError& error) {
    return {{"error", {{"code", to_string(error.code)}, {"message", error.message}, {"detail", error.detail}}}};
}

// ---------------------------------------------------------------------------

ReportingService::ReportingService(Store& store, AutoCompleteConfig config) : store_(store), config_(config) {}

std::vector<Store::AppStatus> ReportingService::list_apps() const { return store_.list_apps(); }

std::set<std::string> ReportingService::component_types(const std::string& app_id) {
    return analysis(app_id)->analysis.universe.type_set;
}

std::shared_ptr<const ReportingService::Loaded> ReportingService::analysis(const std::string& app_id) {
    Store::check_app_id(app_id);
    const fs::path graph = store_.root() / app_id / "graph.json";
    std::error_code ec;
    const auto stamp = fs::last_write_time(graph, ec);
    if (ec) throw NotFoundError("app '" + app_id + "' has not been explored");
    {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(app_id);
        if (it != cache_.end() && it->second->stamp == stamp) return it->second;
    }
    auto loaded = std::make_shared<Loaded>(Loaded{store_.load_analysis(app_id), stamp});
    std::lock_guard lock(cache_mutex_);
    cache_[app_id] = loaded;
    return loaded;
}

std::shared_ptr<std::mutex> ReportingService::session_mutex(const std::string& session_id) {
    std::lock_guard lock(sessions_mutex_);
    auto& m = session_locks_[session_id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

Session ReportingService::open_session(const std::string& app_id, const ReporterMetadata& metadata) {
    metadata.validate();
    const auto a = analysis(app_id);
    const AutoCompleter ac(a->analysis.universe, a->analysis.graph, config_);
    Session s = ac.open_session(make_uuid(), metadata, utc_timestamp());
    store_.save_session(s);
    return s;
}

Session ReportingService::session(const std::string& session_id) const { return store_.load_session(session_id); }

std::vector<ActionKind> ReportingService::suggest_actions(const std::string& session_id) {
    const Session s = store_.load_session(session_id);
    const auto a = analysis(s.app_id);
    return AutoCompleter(a->analysis.universe, a->analysis.graph, config_).suggest_actions(s);
}

std::vector<ComponentChoice> ReportingService::suggest_components(const std::string& session_id, ActionKind action) {
    const Session s = store_.load_session(session_id);
    const auto a = analysis(s.app_id);
    return AutoCompleter(a->analysis.universe, a->analysis.graph, config_).suggest_components(s, action);
}

std::vector<Confirmation> ReportingService::confirmations(const std::string& session_id, const InstanceRef& instance) {
    const Session s = store_.load_session(session_id);
    const auto a = analysis(s.app_id);
    return AutoCompleter(a->analysis.universe, a->analysis.graph, config_).confirmation_screenshots(s, instance);
}

Session ReportingService::commit_step(const std::string& session_id, const Action& action,
                                      const Resolution& resolution, const std::optional<std::string>& user_note) {
    const auto m = session_mutex(session_id);
    std::lock_guard lock(*m);
    Session s = store_.load_session(session_id);
    const auto a = analysis(s.app_id);
    AutoCompleter(a->analysis.universe, a->analysis.graph, config_).commit_step(s, action, resolution, user_note);
    store_.save_session(s);
    return s;
}

Session ReportingService::undo_last_step(const std::string& session_id) {
    const auto m = session_mutex(session_id);
    std::lock_guard lock(*m);
    Session s = store_.load_session(session_id);
    const auto a = analysis(s.app_id);
    AutoCompleter(a->analysis.universe, a->analysis.graph, config_).undo_last_step(s);
    store_.save_session(s);
    return s;
}

BugReport ReportingService::finalize(const std::string& session_id) {
    const auto m = session_mutex(session_id);
    std::lock_guard lock(*m);
    Session s = store_.load_session(session_id);
    return fusion::finalize(store_, s, utc_timestamp());
}

BugReport ReportingService::report(const std::string& app_id, int report_id) const {
    return store_.load_report(app_id, report_id);
}

std::string ReportingService::report_html(const std::string& app_id, int report_id, const RenderOptions& options) {
    const BugReport r = store_.load_report(app_id, report_id);
    const auto a = analysis(app_id);
    return render_html(r, a->analysis.universe, a->analysis.graph, store_.blobs(app_id), options);
}

std::string ReportingService::report_text(const std::string& app_id, int report_id) {
    const BugReport r = store_.load_report(app_id, report_id);
    const auto a = analysis(app_id);
    return render_text(r, a->analysis.universe, a->analysis.graph, store_.blobs(app_id));
}

std::vector<std::uint8_t> ReportingService::blob(const std::string& hash) const { return store_.find_blob(hash); }

// ---------------------------------------------------------------------------

namespace {

json app_status_json(const Store::AppStatus& s) {
    return {{"app_id", s.app_id},     {"primed", s.primed}, {"explored", s.explored},
            {"screens", s.screens},   {"edges", s.edges},   {"reports", s.reports}};
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body);  // json::exception maps to 400
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

int parse_int(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used == text.size()) return v;
    } catch (const std::logic_error&) {
    }
    throw ValidationError(std::string(what) + " must be an integer");
}

// Steps accept either {"action": "type", "typed_text": ...} or {"action": {"kind": ..., "typed_text": ...}}.
Action action_from_body(const json& body) {
    const auto it = body.find("action");
    if (it == body.end()) throw ValidationError("field 'action' is required");
    Action a;
    if (it->is_string()) {
        a.kind = parse_action_kind(it->get<std::string>());
        if (auto t = body.find("typed_text"); t != body.end() && !t->is_null()) a.typed_text = t->get<std::string>();
    } else {
        a = it->get<Action>();
    }
    a.validate();
    return a;
}

json session_json(const Session& s) {
    json j = s;
    j["steps"] = s.history;
    return j;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace

struct ApiServer::Impl {
    ReportingService& service;
    httplib::Server server;

    explicit Impl(ReportingService& s) : service(s) {}

    void fail(httplib::Response& res, std::exception_ptr error) const {
        const ApiError e = to_api_error(error, service.store().root());
        send_json(res, to_json(e), http_status(e.code));
    }

    template <typename F>
    httplib::Server::Handler wrap(F f) {
        return [this, f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (...) {
                fail(res, std::current_exception());
            }
        };
    }

    void routes() {
        server.Get("/api/apps", wrap([this](const auto&, auto& res) {
            json apps = json::array();
            for (const auto& s : service.list_apps()) apps.push_back(app_status_json(s));
            send_json(res, {{"apps", apps}});
        }));

        server.Get("/api/apps/:app/component-types", wrap([this](const auto& req, auto& res) {
            send_json(res, {{"types", service.component_types(req.path_params.at("app"))}});
        }));

        server.Post("/api/apps/:app/sessions", wrap([this](const auto& req, auto& res) {
            const json body = parse_body(req);
            const json& md = body.contains("metadata") ? body.at("metadata") : body;
            const Session s = service.open_session(req.path_params.at("app"), md.template get<ReporterMetadata>());
            send_json(res, {{"session_id", s.session_id}, {"session", session_json(s)}}, 201);
        }));

        server.Get("/api/sessions/:sid", wrap([this](const auto& req, auto& res) {
            send_json(res, session_json(service.session(req.path_params.at("sid"))));
        }));

        server.Get("/api/sessions/:sid/actions", wrap([this](const auto& req, auto& res) {
            const std::string sid = req.path_params.at("sid");
            json actions = json::array();
            for (ActionKind k : service.suggest_actions(sid)) actions.push_back(to_string(k));
            send_json(res, {{"actions", actions}});
        }));

        server.Get("/api/sessions/:sid/components", wrap([this](const auto& req, auto& res) {
            if (!req.has_param("action")) throw ValidationError("query parameter 'action' is required");
            const ActionKind kind = parse_action_kind(req.get_param_value("action"));
            const auto choices = service.suggest_components(req.path_params.at("sid"), kind);
            send_json(res, {{"action", to_string(kind)}, {"components", choices}});
        }));

        server.Get("/api/sessions/:sid/confirmations", wrap([this](const auto& req, auto& res) {
            if (!req.has_param("component")) throw ValidationError("query parameter 'component' is required");
            InstanceRef ref{req.get_param_value("component"),
                            req.has_param("index") ? parse_int(req.get_param_value("index"), "index") : 0};
            send_json(res, {{"confirmations", service.confirmations(req.path_params.at("sid"), ref)}});
        }));

        server.Post("/api/sessions/:sid/steps", wrap([this](const auto& req, auto& res) {
            const json body = parse_body(req);
            if (!body.contains("resolution")) throw ValidationError("field 'resolution' is required");
            std::optional<std::string> note;
            if (auto it = body.find("user_note"); it != body.end() && !it->is_null()) note = it->get<std::string>();
            const Session s = service.commit_step(req.path_params.at("sid"), action_from_body(body),
                                                  body.at("resolution").get<Resolution>(), note);
            send_json(res, {{"steps", s.history}, {"candidate_screens", s.candidate_screens}}, 201);
        }));

        server.Delete("/api/sessions/:sid/steps/last", wrap([this](const auto& req, auto& res) {
            const Session s = service.undo_last_step(req.path_params.at("sid"));
            send_json(res, {{"steps", s.history}, {"candidate_screens", s.candidate_screens}});
        }));

        server.Post("/api/sessions/:sid/finalize", wrap([this](const auto& req, auto& res) {
            const BugReport r = service.finalize(req.path_params.at("sid"));
            send_json(res, {{"report_id", r.report_id}, {"app_id", r.app_id}, {"gap_free", r.gap_free}}, 201);
        }));

        server.Get("/api/apps/:app/reports/:id", wrap([this](const auto& req, auto& res) {
            send_json(res, service.report(req.path_params.at("app"), parse_int(req.path_params.at("id"), "report id")));
        }));

        server.Get("/api/apps/:app/reports/:id/html", wrap([this](const auto& req, auto& res) {
            RenderOptions opts;
            if (req.get_param_value("images") == "inline") opts.images = RenderOptions::Images::inline_data;
            res.set_content(service.report_html(req.path_params.at("app"),
                                                parse_int(req.path_params.at("id"), "report id"), opts),
                            "text/html; charset=utf-8");
        }));

        server.Get("/api/apps/:app/reports/:id/text", wrap([this](const auto& req, auto& res) {
            res.set_content(
                service.report_text(req.path_params.at("app"), parse_int(req.path_params.at("id"), "report id")),
                "text/plain; charset=utf-8");
        }));

        server.Get("/api/blobs/:hash", wrap([this](const auto& req, auto& res) {
            const std::string hash = req.path_params.at("hash");
            const auto bytes = service.blob(hash);
            res.set_header("Cache-Control", "public, max-age=31536000, immutable");
            res.set_header("ETag", "\"" + hash + "\"");
            res.set_content(std::string(bytes.begin(), bytes.end()), sniff_media_type(bytes));
        }));

        server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (res.status == 404 && req.path.rfind("/api/", 0) == 0 && res.body.empty()) {
                const ApiError e{ErrorCode::not_found, "no such endpoint: " + req.method + " " + req.path, json::object()};
                send_json(res, to_json(e), 404);
            }
        });
        server.set_exception_handler([this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            fail(res, ep);
        });
    }
};

ApiServer::ApiServer(ReportingService& service, std::optional<fs::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
    impl_->routes();
    if (static_dir && !impl_->server.set_mount_point("/", static_dir->string()))
        throw NotFoundError("static asset directory does not exist");
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ApiServer::run() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
    if (impl_) impl_->server.stop();
}

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace fusion
