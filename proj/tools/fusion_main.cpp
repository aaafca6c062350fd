#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fusion/device.hpp"
#include "fusion/errors.hpp"
#include "fusion/explorer.hpp"
#include "fusion/primer.hpp"
#include "fusion/report.hpp"
#include "fusion/serialization.hpp"
#include "fusion/service.hpp"
#include "fusion/store.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kDivergence = 3, kNotFound = 4 };

fusion::ApiServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int exit_code_for(std::exception_ptr ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const fusion::ReplayDivergenceError&) {
        return kDivergence;
    } catch (const fusion::Error& e) {
        switch (e.code()) {
            case fusion::ErrorCode::validation: return kValidation;
            case fusion::ErrorCode::not_found: return kNotFound;
            default: return kFailure;
        }
    } catch (const nlohmann::json::exception&) {
        return kValidation;
    } catch (...) {
        return kFailure;
    }
}

std::pair<std::string, int> split_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw fusion::ValidationError("address must be host:port");
    try {
        return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
    } catch (const std::logic_error&) {
        throw fusion::ValidationError("address must be host:port");
    }
}

int cmd_prime(const fs::path& bundle_dir, const fs::path& store_dir) {
    const fusion::ComponentUniverse u = fusion::extract_components(fusion::parse_app_bundle(bundle_dir));
    fusion::Store store(store_dir);
    store.save_universe(u);
    std::cout << u.app_id << ": " << u.descriptors.size() << " components, " << u.type_set.size() << " types, "
              << u.anonymous_elements << " anonymous elements\n";
    return kOk;
}

int cmd_explore(const fs::path& bundle_dir, const fs::path& model_path, const fs::path& store_dir,
                const fusion::ExploreConfig& config) {
    const fusion::ComponentUniverse u = fusion::extract_components(fusion::parse_app_bundle(bundle_dir));
    fusion::AppModel model = fusion::load_app_model(model_path);
    if (model.app_id != u.app_id)
        throw fusion::ValidationError("model is for app '" + model.app_id + "', bundle is '" + u.app_id + "'");
    fusion::Store store(store_dir);
    fusion::SimulatedDevice device(std::move(model));
    auto blobs = store.blobs(u.app_id);
    const fusion::EventFlowGraph g = fusion::explore(device, u, blobs, config);
    store.save_analysis(u, g);
    std::cout << u.app_id << ": " << g.screens.size() << " screens, " << g.edges.size() << " edges, "
              << g.trace.size() << " trace steps" << (g.truncated ? " (truncated by bounds)" : "") << "\n";
    return kOk;
}

int cmd_serve(const fs::path& store_dir, const std::string& addr, const std::optional<fs::path>& static_dir) {
    const auto [host, port] = split_addr(addr);
    fusion::Store store(store_dir);
    fusion::ReportingService service(store);
    fusion::ApiServer server(service, static_dir);
    const int bound = server.bind(host, port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    server.run();
    g_server = nullptr;
    return kOk;
}

int cmd_render(const fs::path& store_dir, const std::string& app, int report_id, const std::string& format,
               const std::optional<fs::path>& out, bool inline_images) {
    fusion::Store store(store_dir);
    const fusion::BugReport r = store.load_report(app, report_id);
    const auto a = store.load_analysis(app);
    const auto blobs = store.blobs(app);
    std::string doc;
    if (format == "text") {
        doc = fusion::render_text(r, a.universe, a.graph, blobs);
    } else if (format == "json") {
        doc = nlohmann::json(r).dump(2) + "\n";
    } else {
        fusion::RenderOptions opts;
        if (inline_images) opts.images = fusion::RenderOptions::Images::inline_data;
        doc = fusion::render_html(r, a.universe, a.graph, blobs, opts);
    }
    if (!out) {
        std::cout << doc;
        return kOk;
    }
    std::ofstream f(*out, std::ios::binary);
    if (!f || !(f << doc)) throw fusion::Error("cannot write " + out->string());
    return kOk;
}

int cmd_replay(const fs::path& store_dir, const std::string& app, int report_id, const fs::path& model_path) {
    fusion::Store store(store_dir);
    const fusion::BugReport r = store.load_report(app, report_id);
    const auto a = store.load_analysis(app);
    const fusion::ReplayScript script = fusion::to_replay_script(r, &a.graph);
    fusion::SimulatedDevice device(fusion::load_app_model(model_path));
    const fusion::ReplayResult res = fusion::replay(script, device);
    if (!res.success) {
        std::cerr << "replay diverged at step " << res.step_num << ": expected " << res.expected << ", observed "
                  << res.observed << "\n";
        return kDivergence;
    }
    std::cout << "replayed " << script.entries.size() << " steps, final state " << res.final_state << "\n";
    return kOk;
}

int cmd_apps(const fs::path& store_dir, bool as_json) {
    fusion::Store store(store_dir);
    const auto apps = store.list_apps();
    if (as_json) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& s : apps)
            out.push_back({{"app_id", s.app_id}, {"primed", s.primed}, {"explored", s.explored},
                           {"screens", s.screens}, {"edges", s.edges}, {"reports", s.reports}});
        std::cout << nlohmann::json{{"apps", out}}.dump(2) << "\n";
        return kOk;
    }
    for (const auto& s : apps) {
        std::cout << s.app_id << "\t" << (s.explored ? "analyzed" : s.primed ? "primed" : "empty") << "\tscreens="
                  << s.screens << "\tedges=" << s.edges << "\treports=" << s.reports << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FUSION bug-report auto-completion toolkit"};
    app.require_subcommand(1);

    fs::path bundle, store_dir, model, static_dir, out;
    std::string addr = "127.0.0.1:8080", app_id, format = "html";
    int report_id = 0;
    bool as_json = false, inline_images = false;
    fusion::ExploreConfig config;

    auto* prime = app.add_subcommand("prime", "Extract the component universe from an app bundle");
    prime->add_option("--bundle", bundle, "App bundle directory")->required();
    prime->add_option("--store", store_dir, "Store directory")->required();

    auto* explore = app.add_subcommand("explore", "Explore an app model depth-first and store the event-flow graph");
    explore->add_option("--bundle", bundle, "App bundle directory")->required();
    explore->add_option("--model", model, "App model JSON")->required();
    explore->add_option("--store,--out", store_dir, "Store directory")->required();
    explore->add_option("--max-steps", config.max_steps, "Bound on trace steps");
    explore->add_option("--max-relaunches", config.max_relaunches, "Bound on cold starts");

    auto* serve = app.add_subcommand("serve", "Serve the reporting HTTP API");
    serve->add_option("--store", store_dir, "Store directory")->required();
    serve->add_option("--addr", addr, "host:port to listen on")->capture_default_str();
    auto* static_opt = serve->add_option("--static", static_dir, "Directory served under /");

    auto* render = app.add_subcommand("render", "Render a stored report");
    render->add_option("--store", store_dir, "Store directory")->required();
    render->add_option("--app", app_id, "App id")->required();
    render->add_option("--report", report_id, "Report id")->required();
    auto* out_opt = render->add_option("--out", out, "Output file (default stdout)");
    render->add_option("--format", format, "html, text or json")
        ->check(CLI::IsMember({"html", "text", "json"}))
        ->capture_default_str();
    render->add_flag("--inline-images", inline_images, "Embed images as data URLs");

    auto* replay = app.add_subcommand("replay", "Replay a gap-free report against an app model");
    replay->add_option("--store", store_dir, "Store directory")->required();
    replay->add_option("--app", app_id, "App id")->required();
    replay->add_option("--report", report_id, "Report id")->required();
    replay->add_option("--model", model, "App model JSON")->required();

    auto* apps = app.add_subcommand("apps", "List analyzed apps");
    apps->add_option("--store", store_dir, "Store directory")->required();
    apps->add_flag("--json", as_json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*prime) return cmd_prime(bundle, store_dir);
        if (*explore) return cmd_explore(bundle, model, store_dir, config);
        if (*serve)
            return cmd_serve(store_dir, addr, *static_opt ? std::optional<fs::path>(static_dir) : std::nullopt);
        if (*render)
            return cmd_render(store_dir, app_id, report_id, format,
                              *out_opt ? std::optional<fs::path>(out) : std::nullopt, inline_images);
        if (*replay) return cmd_replay(store_dir, app_id, report_id, model);
        if (*apps) return cmd_apps(store_dir, as_json);
    } catch (const fusion::ExplorationError& e) {
        std::cerr << "fusion: " << e.what() << " (" << e.partial_graph()->screens.size()
                  << " screens discovered before the failure)\n";
        return kFailure;
    } catch (const std::exception& e) {
        const auto ep = std::current_exception();
        std::cerr << "fusion: " << e.what() << "\n";
        return exit_code_for(ep);
    }
    return kFailure;
}
