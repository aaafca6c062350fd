#include "fusion/serialization.hpp"

#include "fusion/errors.hpp"

namespace fusion {

using nlohmann::json;

namespace {

json actions_to_json(const ActionSet& actions) {
    json out = json::array();
    for (ActionKind k : actions) out.push_back(to_string(k));
    return out;
}

ActionSet actions_from_json(const json& j) {
    ActionSet out;
    for (const auto& v : j) out.insert(parse_action_kind(v.get<std::string>()));
    return out;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

void to_json(json& j, const Rect& v) { j = json::array({v.left, v.top, v.right, v.bottom}); }
void from_json(const json& j, Rect& v) {
    v = {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

void to_json(json& j, const InstanceRef& v) {
    j = {{"component_id", v.component_id}, {"object_index", v.object_index}};
}
void from_json(const json& j, InstanceRef& v) {
    v.component_id = j.at("component_id").get<std::string>();
    v.object_index = j.value("object_index", 0);
}

void to_json(json& j, const Action& v) {
    j = {{"kind", to_string(v.kind)}};
    if (v.typed_text) j["typed_text"] = *v.typed_text;
}
void from_json(const json& j, Action& v) {
    v.kind = parse_action_kind(j.at("kind").get<std::string>());
    v.typed_text = optional_field<std::string>(j, "typed_text");
}

void to_json(json& j, const BlobRef& v) { j = {{"hash", v.hash}, {"media_type", v.media_type}}; }
void from_json(const json& j, BlobRef& v) {
    v.hash = j.at("hash").get<std::string>();
    v.media_type = j.value("media_type", std::string("image/png"));
}

void to_json(json& j, const ComponentDescriptor& v) {
    j = {{"component_id", v.component_id},
         {"component_type", v.component_type},
         {"declared_actions", actions_to_json(v.declared_actions)},
         {"activities", v.activities},
         {"source_classes", v.source_classes},
         {"dynamic", v.dynamic}};
}
void from_json(const json& j, ComponentDescriptor& v) {
    v.component_id = j.at("component_id").get<std::string>();
    v.component_type = j.at("component_type").get<std::string>();
    v.declared_actions = actions_from_json(j.at("declared_actions"));
    v.activities = j.at("activities").get<std::set<std::string>>();
    v.source_classes = j.at("source_classes").get<std::set<std::string>>();
    v.dynamic = j.value("dynamic", false);
}

void to_json(json& j, const ComponentUniverse& v) {
    json descriptors = json::array();
    for (const auto& [id, d] : v.descriptors) descriptors.push_back(d);
    j = {{"schema_version", kSchemaVersion},
         {"app_id", v.app_id},
         {"descriptors", descriptors},
         {"type_set", v.type_set},
         {"anonymous_elements", v.anonymous_elements}};
}
void from_json(const json& j, ComponentUniverse& v) {
    v.app_id = j.at("app_id").get<std::string>();
    v.descriptors.clear();
    for (const auto& d : j.at("descriptors")) {
        auto desc = d.get<ComponentDescriptor>();
        v.descriptors.emplace(desc.component_id, std::move(desc));
    }
    v.type_set = j.at("type_set").get<std::set<std::string>>();
    v.anonymous_elements = j.value("anonymous_elements", std::size_t{0});
}

void to_json(json& j, const ComponentInstance& v) {
    j = {{"component_id", v.component_id},
         {"object_index", v.object_index},
         {"component_type", v.component_type},
         {"text", v.text},
         {"bounds", v.bounds},
         {"relative_location", to_string(v.relative_location)},
         {"supported_actions", actions_to_json(v.supported_actions)},
         {"component_screenshot", v.component_screenshot},
         {"highlighted_screenshot", v.highlighted_screenshot},
         {"screen_key", v.screen_key}};
}
void from_json(const json& j, ComponentInstance& v) {
    v.component_id = j.at("component_id").get<std::string>();
    v.object_index = j.at("object_index").get<int>();
    v.component_type = j.at("component_type").get<std::string>();
    v.text = j.at("text").get<std::string>();
    v.bounds = j.at("bounds").get<Rect>();
    v.relative_location = parse_relative_location(j.at("relative_location").get<std::string>());
    v.supported_actions = actions_from_json(j.at("supported_actions"));
    v.component_screenshot = j.at("component_screenshot").get<std::string>();
    v.highlighted_screenshot = j.at("highlighted_screenshot").get<std::string>();
    v.screen_key = j.at("screen_key").get<std::string>();
}

void to_json(json& j, const Screen& v) {
    j = {{"screen_key", v.screen_key},
         {"activity", v.activity},
         {"window", v.window},
         {"instances", v.instances},
         {"full_screenshot", v.full_screenshot},
         {"discovered_by", v.discovered_by ? json(*v.discovered_by) : json(nullptr)}};
}
void from_json(const json& j, Screen& v) {
    v.screen_key = j.at("screen_key").get<std::string>();
    v.activity = j.at("activity").get<std::string>();
    v.window = j.at("window").get<std::string>();
    v.instances = j.at("instances").get<std::vector<ComponentInstance>>();
    v.full_screenshot = j.at("full_screenshot").get<std::string>();
    v.discovered_by = optional_field<std::size_t>(j, "discovered_by");
}

namespace {
OutcomeKind parse_outcome(const std::string& s) {
    for (auto k : {OutcomeKind::stayed, OutcomeKind::moved, OutcomeKind::external, OutcomeKind::home})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown outcome '" + s + "'");
}
}  // namespace

void to_json(json& j, const TraceStep& v) {
    j = {{"index", v.index},
         {"pre_screen", v.pre_screen},
         {"action", v.action},
         {"instance", v.instance},
         {"outcome", to_string(v.outcome)},
         {"post_screen", v.post_screen},
         {"new_activity", v.new_activity},
         {"pre_screenshot", v.pre_screenshot},
         {"post_screenshot", v.post_screenshot},
         {"highlighted_screenshot", v.highlighted_screenshot},
         {"cold_start", v.cold_start},
         {"resumption", v.resumption}};
}
void from_json(const json& j, TraceStep& v) {
    v.index = j.at("index").get<std::size_t>();
    v.pre_screen = j.at("pre_screen").get<std::string>();
    v.action = j.at("action").get<Action>();
    v.instance = j.at("instance").get<InstanceRef>();
    v.outcome = parse_outcome(j.at("outcome").get<std::string>());
    v.post_screen = j.at("post_screen").get<std::string>();
    v.new_activity = j.at("new_activity").get<bool>();
    v.pre_screenshot = j.at("pre_screenshot").get<std::string>();
    v.post_screenshot = j.at("post_screenshot").get<std::string>();
    v.highlighted_screenshot = j.at("highlighted_screenshot").get<std::string>();
    v.cold_start = j.value("cold_start", false);
    v.resumption = j.value("resumption", false);
}

void to_json(json& j, const Edge& v) {
    j = {{"source", v.source},
         {"action", to_string(v.action)},
         {"instance", v.instance},
         {"target", v.target},
         {"new_activity", v.new_activity},
         {"witness", v.witness}};
}
void from_json(const json& j, Edge& v) {
    v.source = j.at("source").get<std::string>();
    v.action = parse_action_kind(j.at("action").get<std::string>());
    v.instance = j.at("instance").get<InstanceRef>();
    v.target = j.at("target").get<std::string>();
    v.new_activity = j.at("new_activity").get<bool>();
    v.witness = j.at("witness").get<std::size_t>();
}

void to_json(json& j, const EventFlowGraph& v) {
    json dynamic = json::array();
    for (const auto& [id, d] : v.dynamic_components) dynamic.push_back(d);
    j = {{"schema_version", kSchemaVersion},
         {"app_id", v.app_id},
         {"entry", v.entry},
         {"screens", v.screens},
         {"edges", v.edges},
         {"dynamic_components", dynamic},
         {"truncated", v.truncated}};
}
void from_json(const json& j, EventFlowGraph& v) {
    v.app_id = j.at("app_id").get<std::string>();
    v.entry = j.at("entry").get<std::string>();
    v.screens = j.at("screens").get<std::vector<Screen>>();
    v.edges = j.at("edges").get<std::vector<Edge>>();
    v.dynamic_components.clear();
    for (const auto& d : j.at("dynamic_components")) {
        auto desc = d.get<ComponentDescriptor>();
        v.dynamic_components.emplace(desc.component_id, std::move(desc));
    }
    v.truncated = j.value("truncated", false);
}

json trace_to_json(const std::vector<TraceStep>& trace) {
    return {{"schema_version", kSchemaVersion}, {"steps", trace}};
}

std::vector<TraceStep> trace_from_json(const json& j) { return j.at("steps").get<std::vector<TraceStep>>(); }

void to_json(json& j, const ReporterMetadata& v) {
    j = {{"reporter_name", v.reporter_name},
         {"device", v.device},
         {"orientation", to_string(v.orientation)},
         {"title", v.title},
         {"description", v.description}};
}
void from_json(const json& j, ReporterMetadata& v) {
    auto req = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string())
            throw ValidationError(std::string("metadata: field '") + key + "' is required");
        return it->get<std::string>();
    };
    v.reporter_name = req("reporter_name");
    v.device = req("device");
    v.orientation = j.contains("orientation") ? parse_orientation(req("orientation")) : Orientation::portrait;
    v.title = req("title");
    v.description = req("description");
}

void to_json(json& j, const Resolution& v) {
    if (const auto* a = std::get_if<AutoResolution>(&v)) {
        j = {{"kind", "auto"},
             {"screen_key", a->screen_key},
             {"instance", a->instance},
             {"confirmed_screenshot", a->confirmed_screenshot}};
    } else {
        const auto& m = std::get<ManualResolution>(v);
        j = {{"kind", "manual"},
             {"component_type", m.component_type},
             {"text", m.text},
             {"relative_location", to_string(m.relative_location)}};
    }
}
void from_json(const json& j, Resolution& v) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "auto") {
        v = AutoResolution{j.at("screen_key").get<std::string>(), j.at("instance").get<InstanceRef>(),
                           j.at("confirmed_screenshot").get<BlobRef>()};
    } else if (kind == "manual") {
        const std::string loc = j.at("relative_location").get<std::string>();
        if (loc.empty()) throw ValidationError("manual step needs a relative location");
        v = ManualResolution{j.at("component_type").get<std::string>(), j.value("text", std::string()),
                             parse_relative_location(loc)};
    } else {
        throw ValidationError("resolution kind must be 'auto' or 'manual'");
    }
}

void to_json(json& j, const ReportStep& v) {
    j = {{"step_num", v.step_num}, {"action", v.action}, {"resolution", v.resolution}};
    if (v.user_note) j["user_note"] = *v.user_note;
}
void from_json(const json& j, ReportStep& v) {
    v.step_num = j.at("step_num").get<int>();
    v.action = j.at("action").get<Action>();
    v.resolution = j.at("resolution").get<Resolution>();
    v.user_note = optional_field<std::string>(j, "user_note");
}

void to_json(json& j, const Session& v) {
    j = {{"schema_version", kSchemaVersion},
         {"session_id", v.session_id},
         {"app_id", v.app_id},
         {"metadata", v.metadata},
         {"history", v.history},
         {"candidate_screens", v.candidate_screens},
         {"created_at", v.created_at},
         {"closed", v.closed},
         {"report_id", v.report_id ? json(*v.report_id) : json(nullptr)}};
}
void from_json(const json& j, Session& v) {
    v.session_id = j.at("session_id").get<std::string>();
    v.app_id = j.at("app_id").get<std::string>();
    v.metadata = j.at("metadata").get<ReporterMetadata>();
    v.history = j.at("history").get<std::vector<ReportStep>>();
    v.candidate_screens = j.at("candidate_screens").get<std::vector<std::string>>();
    v.created_at = j.at("created_at").get<std::string>();
    v.closed = j.at("closed").get<bool>();
    v.report_id = optional_field<int>(j, "report_id");
}

void to_json(json& j, const Suggestion& v) {
    j = {{"kind", "component"},
         {"screen_key", v.screen_key},
         {"instance", v.instance},
         {"component_type", v.component_type},
         {"text", v.text},
         {"relative_location", to_string(v.relative_location)},
         {"relative_location_label", display_name(v.relative_location)},
         {"component_image", v.component_image},
         {"option_ordinal", v.option_ordinal ? json(*v.option_ordinal) : json(nullptr)},
         {"action", to_string(v.action)},
         {"step_num", v.step_num}};
    if (v.option_ordinal) j["option_label"] = "Option #" + std::to_string(*v.option_ordinal);
}

void to_json(json& j, const ComponentChoice& v) {
    if (const auto* s = std::get_if<Suggestion>(&v)) {
        to_json(j, *s);
    } else {
        j = {{"kind", "not_in_list"}, {"label", NotInList::label}};
    }
}

void to_json(json& j, const Confirmation& v) { j = {{"screen_key", v.screen_key}, {"screenshot", v.screenshot}}; }

void to_json(json& j, const BugReport& v) {
    json shots = json::array();
    for (const auto& s : v.full_screenshots) shots.push_back(s ? json(*s) : json({{"placeholder", true}}));
    j = {{"schema_version", kSchemaVersion},
         {"report_id", v.report_id},
         {"app_id", v.app_id},
         {"session_id", v.session_id},
         {"metadata", v.metadata},
         {"steps", v.steps},
         {"full_screenshots", shots},
         {"gap_free", v.gap_free},
         {"created_at", v.created_at}};
}
void from_json(const json& j, BugReport& v) {
    v.report_id = j.at("report_id").get<int>();
    v.app_id = j.at("app_id").get<std::string>();
    v.session_id = j.value("session_id", std::string());
    v.metadata = j.at("metadata").get<ReporterMetadata>();
    v.steps = j.at("steps").get<std::vector<ReportStep>>();
    v.full_screenshots.clear();
    for (const auto& s : j.at("full_screenshots")) {
        if (s.value("placeholder", false)) v.full_screenshots.emplace_back(std::nullopt);
        else v.full_screenshots.emplace_back(s.get<BlobRef>());
    }
    v.gap_free = j.at("gap_free").get<bool>();
    v.created_at = j.at("created_at").get<std::string>();
}

void to_json(json& j, const ReplayEntry& v) {
    j = {{"step_num", v.step_num}, {"action", v.action}, {"screen_key", v.screen_key}, {"instance", v.instance}};
}
void from_json(const json& j, ReplayEntry& v) {
    v.step_num = j.at("step_num").get<int>();
    v.action = j.at("action").get<Action>();
    v.screen_key = j.at("screen_key").get<std::string>();
    v.instance = j.at("instance").get<InstanceRef>();
}

void to_json(json& j, const ReplayScript& v) {
    j = {{"schema_version", kSchemaVersion},
         {"app_id", v.app_id},
         {"entries", v.entries},
         {"expected_final", v.expected_final ? json(*v.expected_final) : json(nullptr)}};
}
void from_json(const json& j, ReplayScript& v) {
    v.app_id = j.at("app_id").get<std::string>();
    v.entries = j.at("entries").get<std::vector<ReplayEntry>>();
    v.expected_final = optional_field<std::string>(j, "expected_final");
}

}  // namespace fusion
