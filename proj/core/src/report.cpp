#include "fusion/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <sstream>

#include "fusion/errors.hpp"

namespace fusion {

std::vector<int> BugReport::manual_steps() const {
    std::vector<int> out;
    for (const auto& s : steps)
        if (!s.is_auto()) out.push_back(s.step_num);
    return out;
}

BugReport build_report(const Session& session, int report_id, std::string created_at) {
    if (session.closed) throw SessionClosedError("session " + session.session_id + " is already finalized");
    if (session.history.empty()) throw ValidationError("a report needs at least one step");
    BugReport r;
    r.report_id = report_id;
    r.app_id = session.app_id;
    r.session_id = session.session_id;
    r.metadata = session.metadata;
    r.steps = session.history;
    r.created_at = std::move(created_at);
    r.gap_free = true;
    for (const auto& step : r.steps) {
        if (const auto* a = std::get_if<AutoResolution>(&step.resolution)) {
            r.full_screenshots.emplace_back(a->confirmed_screenshot);
        } else {
            r.full_screenshots.emplace_back(std::nullopt);
            r.gap_free = false;
        }
    }
    return r;
}

namespace {

// Everything one step row shows, resolved against the analysis data.
struct StepView {
    int step_num = 0;
    bool verified = false;
    std::string action;
    std::optional<std::string> typed_text;
    std::string component_type;
    std::string text;
    std::string relative_location;
    std::optional<int> option_ordinal;
    std::string source_class;
    std::optional<BlobRef> component_image;
    std::optional<std::string> note;
};

std::string source_class_of(const ComponentUniverse& universe, const EventFlowGraph& graph, const Screen& screen,
                            const std::string& component_id) {
    const ComponentDescriptor* d = universe.find(component_id);
    if (!d) {
        auto it = graph.dynamic_components.find(component_id);
        if (it != graph.dynamic_components.end()) d = &it->second;
    }
    if (d && !d->source_classes.empty()) {
        std::string out;
        for (const auto& c : d->source_classes) {
            if (!out.empty()) out += ", ";
            out += c;
        }
        return out;
    }
    return screen.activity;
}

std::vector<StepView> resolve_steps(const BugReport& report, const ComponentUniverse& universe,
                                    const EventFlowGraph& graph, const BlobStore& blobs) {
    if (report.full_screenshots.size() != report.steps.size())
        throw IntegrityError("report " + std::to_string(report.report_id) + " has misaligned screenshots");
    std::vector<StepView> out;
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        const ReportStep& step = report.steps[i];
        StepView v;
        v.step_num = step.step_num;
        v.action = std::string(to_string(step.action.kind));
        v.typed_text = step.action.typed_text;
        v.note = step.user_note;
        if (const auto* a = std::get_if<AutoResolution>(&step.resolution)) {
            const Screen* screen = graph.screen(a->screen_key);
            const ComponentInstance* inst = screen ? screen->find(a->instance) : nullptr;
            if (!inst)
                throw IntegrityError("step " + std::to_string(step.step_num) + " references an instance missing from the graph");
            v.verified = true;
            v.component_type = inst->component_type;
            v.text = inst->text;
            v.relative_location = std::string(display_name(inst->relative_location));
            const auto same_id = std::count_if(screen->instances.begin(), screen->instances.end(),
                                               [&](const ComponentInstance& c) { return c.component_id == inst->component_id; });
            if (same_id > 1) v.option_ordinal = inst->object_index + 1;
            v.source_class = source_class_of(universe, graph, *screen, inst->component_id);
            v.component_image = BlobRef{inst->component_screenshot, "image/png"};
            if (!blobs.has_blob(inst->component_screenshot))
                throw IntegrityError("missing component image " + inst->component_screenshot);
        } else {
            const auto& m = std::get<ManualResolution>(step.resolution);
            v.component_type = m.component_type;
            v.text = m.text;
            v.relative_location = std::string(display_name(m.relative_location));
            v.source_class = "unknown";
        }
        if (const auto& shot = report.full_screenshots[i]; shot && !blobs.has_blob(shot->hash))
            throw IntegrityError("missing screenshot " + shot->hash);
        out.push_back(std::move(v));
    }
    return out;
}

std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string base64(const std::vector<std::uint8_t>& data) {
    std::string out(4 * ((data.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string image_src(const BlobRef& ref, const BlobStore& blobs, const RenderOptions& options) {
    if (options.images == RenderOptions::Images::inline_data)
        return "data:" + ref.media_type + ";base64," + base64(blobs.get_blob(ref));
    return options.blob_url_prefix + ref.hash;
}

std::string component_label(const StepView& v) {
    std::string s = v.component_type;
    if (!v.text.empty()) s += " \"" + v.text + "\"";
    if (v.option_ordinal) s += " (Option #" + std::to_string(*v.option_ordinal) + ")";
    return s;
}

constexpr const char* kStyle = R"(body{font-family:sans-serif;margin:2em;max-width:60em}
h1{font-size:1.6em}h2{border-bottom:1px solid #999;font-size:1.2em;margin-top:2em}
table{border-collapse:collapse;width:100%}th,td{border:1px solid #ccc;padding:.4em;text-align:left;vertical-align:top}
.unverified{background:#c0392b;color:#fff;font-size:.8em;padding:.1em .4em;border-radius:3px}
.component img{max-width:12em;max-height:6em}
.shots{display:flex;flex-wrap:wrap;gap:1em;list-style:none;padding:0}
.shots img{width:15em;border:1px solid #999}.placeholder{width:15em;height:24em;border:1px dashed #999;display:flex;align-items:center;justify-content:center;color:#777}
)";

}  // namespace

std::string render_html(const BugReport& report, const ComponentUniverse& universe, const EventFlowGraph& graph,
                        const BlobStore& blobs, const RenderOptions& options) {
    const std::vector<StepView> steps = resolve_steps(report, universe, graph, blobs);
    const auto& md = report.metadata;
    std::ostringstream h;
    h << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>Bug Report #" << report.report_id << ": " << escape(md.title) << "</title>\n"
      << "<style>\n" << kStyle << "</style>\n</head>\n<body>\n"
      << "<h1>Bug Report #" << report.report_id << "</h1>\n"
      << "<p class=\"app\">App <code>" << escape(report.app_id) << "</code>, filed " << escape(report.created_at)
      << "</p>\n";

    h << "<section id=\"preliminary\">\n<h2>1. Preliminary Information</h2>\n<dl>\n"
      << "<dt>Title</dt><dd class=\"title\">" << escape(md.title) << "</dd>\n"
      << "<dt>Reporter</dt><dd class=\"reporter\">" << escape(md.reporter_name) << "</dd>\n"
      << "<dt>Device</dt><dd class=\"device\">" << escape(md.device) << " (" << to_string(md.orientation)
      << ")</dd>\n"
      << "<dt>Description</dt><dd class=\"description\">" << escape(md.description) << "</dd>\n"
      << "</dl>\n</section>\n";

    h << "<section id=\"steps\">\n<h2>2. Steps to Reproduce</h2>\n<table>\n<thead><tr>"
      << "<th>#</th><th>Action</th><th>Component Type</th><th>Relative Location</th><th>Activity Class</th>"
      << "<th>Component</th><th>Note</th></tr></thead>\n<tbody>\n";
    for (const auto& v : steps) {
        h << "<tr class=\"step\" data-step=\"" << v.step_num << "\">"
          << "<td>" << v.step_num;
        if (!v.verified) h << " <span class=\"unverified\">not verified against app model</span>";
        h << "</td><td class=\"action\">" << escape(v.action);
        if (v.typed_text) h << " &ldquo;" << escape(*v.typed_text) << "&rdquo;";
        h << "</td><td class=\"type\">" << escape(component_label(v)) << "</td>"
          << "<td class=\"location\">" << escape(v.relative_location) << "</td>"
          << "<td class=\"source\"><code>" << escape(v.source_class) << "</code></td>"
          << "<td class=\"component\">";
        if (v.component_image)
            h << "<img src=\"" << image_src(*v.component_image, blobs, options) << "\" alt=\"step " << v.step_num
              << " component\">";
        else
            h << "&mdash;";
        h << "</td><td class=\"note\">" << (v.note ? escape(*v.note) : "") << "</td></tr>\n";
    }
    h << "</tbody>\n</table>\n</section>\n";

    h << "<section id=\"screenshots\">\n<h2>3. Screenshots</h2>\n<ol class=\"shots\">\n";
    for (std::size_t i = 0; i < report.full_screenshots.size(); ++i) {
        const auto& shot = report.full_screenshots[i];
        h << "<li class=\"shot\" data-step=\"" << steps[i].step_num << "\"><figure>";
        if (shot)
            h << "<img src=\"" << image_src(*shot, blobs, options) << "\" alt=\"step " << steps[i].step_num
              << " screen\">";
        else
            h << "<div class=\"placeholder\">no screenshot</div>";
        h << "<figcaption>Step " << steps[i].step_num << "</figcaption></figure></li>\n";
    }
    h << "</ol>\n</section>\n</body>\n</html>\n";
    return h.str();
}

std::string render_text(const BugReport& report, const ComponentUniverse& universe, const EventFlowGraph& graph,
                        const BlobStore& blobs) {
    const std::vector<StepView> steps = resolve_steps(report, universe, graph, blobs);
    const auto& md = report.metadata;
    std::ostringstream t;
    t << "Bug Report #" << report.report_id << " (" << report.app_id << ", " << report.created_at << ")\n\n";
    t << "1. PRELIMINARY INFORMATION\n"
      << "   Title:       " << md.title << "\n"
      << "   Reporter:    " << md.reporter_name << "\n"
      << "   Device:      " << md.device << " (" << to_string(md.orientation) << ")\n"
      << "   Description: " << md.description << "\n\n";
    t << "2. STEPS TO REPRODUCE\n";
    for (const auto& v : steps) {
        t << "   " << v.step_num << ". " << v.action;
        if (v.typed_text) t << " \"" << *v.typed_text << "\"";
        t << " | " << component_label(v) << " | " << v.relative_location << " | " << v.source_class;
        if (!v.verified) t << " | NOT VERIFIED AGAINST APP MODEL";
        t << "\n";
        if (v.component_image) t << "      component image: " << v.component_image->hash << "\n";
        if (v.note) t << "      note: " << *v.note << "\n";
    }
    t << "\n3. SCREENSHOTS\n";
    for (std::size_t i = 0; i < report.full_screenshots.size(); ++i) {
        const auto& shot = report.full_screenshots[i];
        t << "   step " << steps[i].step_num << ": " << (shot ? shot->hash : std::string("(none, manual step)")) << "\n";
    }
    return t.str();
}

ReplayScript to_replay_script(const BugReport& report, const EventFlowGraph* graph) {
    if (const auto manual = report.manual_steps(); !manual.empty()) throw GapError(manual);
    ReplayScript script;
    script.app_id = report.app_id;
    for (const auto& step : report.steps) {
        const auto& a = std::get<AutoResolution>(step.resolution);
        if (graph) {
            const Screen* s = graph->screen(a.screen_key);
            if (!s || !s->find(a.instance))
                throw ValidationError("step " + std::to_string(step.step_num) + " is not in the event-flow graph");
        }
        script.entries.push_back({step.step_num, step.action, a.screen_key, a.instance});
    }
    if (graph && !script.entries.empty()) {
        const ReplayEntry& last = script.entries.back();
        const auto edges = graph->edges_from(last.screen_key, last.action.kind, last.instance);
        if (edges.size() == 1) script.expected_final = edges.front()->target;
    }
    return script;
}

ReplayResult replay(const ReplayScript& script, DeviceDriver& driver) {
    if (script.entries.empty()) throw ValidationError("cannot replay an empty script");
    if (driver.app_id() != script.app_id)
        throw ValidationError("script is for app '" + script.app_id + "', driver runs '" + driver.app_id() + "'");
    ReplayResult result;
    driver.relaunch_app();
    for (const auto& entry : script.entries) {
        // A step that left the app is followed by the reporter returning to it.
        Observation obs = driver.observe();
        if (obs.state == DeviceState::external) driver.press_back();
        else if (obs.state == DeviceState::home) driver.relaunch_app();
        const std::string key = observed_key(driver.observe());
        if (key != entry.screen_key) {
            result.step_num = entry.step_num;
            result.expected = entry.screen_key;
            result.observed = key;
            result.final_state = key;
            return result;
        }
        try {
            driver.perform(entry.action, entry.instance);
        } catch (const ValidationError& e) {
            throw ReplayDivergenceError(static_cast<std::size_t>(entry.step_num), e.what());
        } catch (const DriverStateError& e) {
            throw ReplayDivergenceError(static_cast<std::size_t>(entry.step_num), e.what());
        }
    }
    result.final_state = observed_key(driver.observe());
    if (script.expected_final && *script.expected_final != result.final_state) {
        result.step_num = script.entries.back().step_num;
        result.expected = *script.expected_final;
        result.observed = result.final_state;
        return result;
    }
    result.success = true;
    return result;
}

}  // namespace fusion
