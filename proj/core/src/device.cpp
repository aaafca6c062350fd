#include "fusion/device.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fusion/errors.hpp"

namespace fusion {

using nlohmann::json;

const ComponentSpec* ScreenSpec::find(const InstanceRef& ref) const {
    for (const auto& c : components)
        if (c.component_id == ref.component_id && c.object_index == ref.object_index) return &c;
    return nullptr;
}

const ScreenSpec* AppModel::screen(std::string_view screen_id) const {
    for (const auto& s : screens)
        if (s.screen_id == screen_id) return &s;
    return nullptr;
}

std::string_view to_string(OutcomeKind kind) noexcept {
    switch (kind) {
        case OutcomeKind::stayed: return "stayed";
        case OutcomeKind::moved: return "moved";
        case OutcomeKind::external: return "external";
        case OutcomeKind::home: return "home";
    }
    return "stayed";
}

namespace {

bool is_pseudo_target(std::string_view t) { return t == kExternalTarget || t == kHomeTarget; }

// Typed accessors that report failures with the JSON field path.
class Field {
public:
    Field(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return value_; }

    [[noreturn]] void fail(const std::string& what) const { throw ModelFormatError(path_, what); }

    Field at(const std::string& key) const {
        if (!value_.is_object()) fail("expected an object");
        auto it = value_.find(key);
        if (it == value_.end()) throw ModelFormatError(path_ + "." + key, "missing field");
        return {*it, path_ + "." + key};
    }
    bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

    Field index(std::size_t i) const { return {value_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

    std::string str() const {
        if (!value_.is_string()) fail("expected a string");
        return value_.get<std::string>();
    }
    int integer() const {
        if (!value_.is_number_integer()) fail("expected an integer");
        return value_.get<int>();
    }
    bool boolean() const {
        if (!value_.is_boolean()) fail("expected a boolean");
        return value_.get<bool>();
    }
    std::size_t array_size() const {
        if (!value_.is_array()) fail("expected an array");
        return value_.size();
    }
    ActionKind action() const {
        try {
            return parse_action_kind(str());
        } catch (const ValidationError&) {
            fail("unknown action '" + value_.get<std::string>() + "'");
        }
    }

private:
    const json& value_;
    std::string path_;
};

ComponentSpec parse_component(const Field& f) {
    ComponentSpec c;
    c.component_id = f.at("component_id").str();
    if (c.component_id.empty()) f.at("component_id").fail("must not be empty");
    c.object_index = f.has("object_index") ? f.at("object_index").integer() : 0;
    if (c.object_index < 0) f.at("object_index").fail("must be >= 0");
    c.component_type = f.at("type").str();
    if (f.has("text")) c.text = f.at("text").str();
    const Field b = f.at("bounds");
    if (b.array_size() != 4) b.fail("expected [left, top, right, bottom]");
    c.bounds = {b.index(0).integer(), b.index(1).integer(), b.index(2).integer(), b.index(3).integer()};
    if (f.has("actions")) {
        const Field a = f.at("actions");
        for (std::size_t i = 0; i < a.array_size(); ++i) c.supported_actions.insert(a.index(i).action());
    }
    const bool types = c.supported_actions.contains(ActionKind::type);
    c.editable = f.has("editable") ? f.at("editable").boolean() : types;
    if (c.editable != types) f.at("editable").fail("editable must match whether 'type' is a supported action");
    return c;
}

json component_to_json(const ComponentSpec& c) {
    json actions = json::array();
    for (auto k : c.supported_actions) actions.push_back(to_string(k));
    return {{"component_id", c.component_id},
            {"object_index", c.object_index},
            {"type", c.component_type},
            {"text", c.text},
            {"bounds", {c.bounds.left, c.bounds.top, c.bounds.right, c.bounds.bottom}},
            {"actions", actions},
            {"editable", c.editable}};
}

}  // namespace

namespace {

void check_transition(const AppModel& model, const TransitionKey& key, const TransitionSpec& spec,
                      const std::string& tp) {
    const ScreenSpec* src = model.screen(key.screen_id);
    if (!src) throw ModelFormatError(tp + ".screen", "unknown screen '" + key.screen_id + "'");
    const ComponentSpec* comp = src->find(key.instance);
    if (!comp) throw ModelFormatError(tp + ".component_id", "component not on source screen");
    if (!comp->supported_actions.contains(key.action))
        throw ModelFormatError(tp + ".action", "component does not support this action");
    if (!is_pseudo_target(spec.target)) {
        const ScreenSpec* dst = model.screen(spec.target);
        if (!dst) throw ModelFormatError(tp + ".target", "unknown screen '" + spec.target + "'");
        if (spec.new_activity && dst->activity == src->activity)
            throw ModelFormatError(tp + ".new_activity", "target is in the same activity");
    }
}

void check_screens(const AppModel& m) {
    if (m.app_id.empty()) throw ModelFormatError("$.app_id", "must not be empty");
    if (m.viewport.width <= 0 || m.viewport.height <= 0) throw ModelFormatError("$.viewport", "must be positive");
    if (m.screenshot_downsample < 1) throw ModelFormatError("$.screenshot_downsample", "must be >= 1");
    if (m.screens.empty()) throw ModelFormatError("$.screens", "at least one screen is required");

    std::set<std::string> ids;
    for (std::size_t s = 0; s < m.screens.size(); ++s) {
        const auto& screen = m.screens[s];
        const std::string sp = "$.screens[" + std::to_string(s) + "]";
        if (screen.screen_id.empty() || is_pseudo_target(screen.screen_id))
            throw ModelFormatError(sp + ".screen_id", "invalid screen id");
        if (!ids.insert(screen.screen_id).second)
            throw ModelFormatError(sp + ".screen_id", "duplicate screen id '" + screen.screen_id + "'");
        std::set<InstanceRef> seen;
        std::map<std::string, std::set<int>> indices;
        for (std::size_t i = 0; i < screen.components.size(); ++i) {
            const auto& c = screen.components[i];
            const std::string cp = sp + ".components[" + std::to_string(i) + "]";
            if (!seen.insert(c.ref()).second)
                throw ModelFormatError(cp, "duplicate (component_id, object_index) (" + c.component_id +
                                               ", " + std::to_string(c.object_index) + ")");
            const Rect vp = m.viewport.bounds();
            if (c.bounds.empty() || c.bounds.left < vp.left || c.bounds.top < vp.top ||
                c.bounds.right > vp.right || c.bounds.bottom > vp.bottom)
                throw ModelFormatError(cp + ".bounds", "must be non-empty and inside the viewport");
            indices[c.component_id].insert(c.object_index);
        }
        for (std::size_t i = 0; i < screen.components.size(); ++i) {
            const auto& c = screen.components[i];
            if (c.object_index >= static_cast<int>(indices[c.component_id].size()))
                throw ModelFormatError(sp + ".components[" + std::to_string(i) + "].object_index",
                                       "object_index values of '" + c.component_id + "' must be consecutive from 0");
        }
    }
    if (!m.screen(m.entry_screen)) throw ModelFormatError("$.entry_screen", "unknown screen '" + m.entry_screen + "'");
}

}  // namespace

void AppModel::validate() const {
    check_screens(*this);
    for (const auto& [key, spec] : transitions)
        check_transition(*this, key, spec,
                         "$.transitions[" + key.screen_id + "/" + std::string(to_string(key.action)) + "/" +
                             key.instance.component_id + "#" + std::to_string(key.instance.object_index) + "]");
    for (const auto& [from, to] : back_edges) {
        if (!screen(from)) throw ModelFormatError("$.back." + from, "unknown screen");
        if (to != kHomeTarget && !screen(to)) throw ModelFormatError("$.back." + from, "unknown target '" + to + "'");
    }
}

AppModel parse_app_model(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ModelFormatError("$", std::string("not valid JSON: ") + e.what());
    }
    const Field root(doc, "$");
    AppModel model;
    model.app_id = root.at("app_id").str();
    if (root.has("viewport")) {
        const Field vp = root.at("viewport");
        model.viewport = {vp.at("width").integer(), vp.at("height").integer()};
    }
    model.entry_screen = root.at("entry_screen").str();
    if (root.has("screenshot_downsample")) model.screenshot_downsample = root.at("screenshot_downsample").integer();
    const Field screens = root.at("screens");
    for (std::size_t i = 0; i < screens.array_size(); ++i) {
        const Field s = screens.index(i);
        ScreenSpec spec;
        spec.screen_id = s.at("screen_id").str();
        spec.activity = s.at("activity").str();
        spec.window = s.has("window") ? s.at("window").str() : std::string("main");
        if (s.has("components")) {
            const Field comps = s.at("components");
            for (std::size_t j = 0; j < comps.array_size(); ++j)
                spec.components.push_back(parse_component(comps.index(j)));
        }
        model.screens.push_back(std::move(spec));
    }
    // Screens must be known before transitions can default new_activity.
    std::map<std::string, std::string> activity_of;
    for (const auto& s : model.screens) activity_of[s.screen_id] = s.activity;

    check_screens(model);
    if (root.has("transitions")) {
        const Field ts = root.at("transitions");
        for (std::size_t i = 0; i < ts.array_size(); ++i) {
            const Field t = ts.index(i);
            TransitionKey key;
            key.screen_id = t.at("screen").str();
            key.action = t.has("action") ? t.at("action").action() : ActionKind::click;
            key.instance.component_id = t.at("component_id").str();
            key.instance.object_index = t.has("object_index") ? t.at("object_index").integer() : 0;
            TransitionSpec spec;
            spec.target = t.at("target").str();
            if (t.has("new_activity")) {
                spec.new_activity = t.at("new_activity").boolean();
            } else if (spec.target == kExternalTarget) {
                spec.new_activity = true;
            } else if (spec.target != kHomeTarget) {
                auto a = activity_of.find(spec.target), b = activity_of.find(key.screen_id);
                spec.new_activity = a != activity_of.end() && b != activity_of.end() && a->second != b->second;
            }
            check_transition(model, key, spec, "$.transitions[" + std::to_string(i) + "]");
            if (!model.transitions.emplace(key, spec).second) t.fail("duplicate transition");
        }
    }
    if (root.has("back")) {
        const Field back = root.at("back");
        if (!back.raw().is_object()) back.fail("expected an object of screen -> target");
        for (const auto& [from, to] : back.raw().items()) model.back_edges[from] = back.at(from).str();
    }
    model.validate();
    return model;
}

AppModel load_app_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("$", "cannot read model file " + path.filename().string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_app_model(buf.str());
}

std::string serialize_app_model(const AppModel& model) {
    json screens = json::array();
    for (const auto& s : model.screens) {
        json comps = json::array();
        for (const auto& c : s.components) comps.push_back(component_to_json(c));
        screens.push_back({{"screen_id", s.screen_id}, {"activity", s.activity}, {"window", s.window},
                           {"components", comps}});
    }
    json transitions = json::array();
    for (const auto& [key, spec] : model.transitions)
        transitions.push_back({{"screen", key.screen_id},
                               {"action", to_string(key.action)},
                               {"component_id", key.instance.component_id},
                               {"object_index", key.instance.object_index},
                               {"target", spec.target},
                               {"new_activity", spec.new_activity}});
    json back = json::object();
    for (const auto& [from, to] : model.back_edges) back[from] = to;
    json doc = {{"schema_version", 1},
                {"app_id", model.app_id},
                {"viewport", {{"width", model.viewport.width}, {"height", model.viewport.height}}},
                {"entry_screen", model.entry_screen},
                {"screenshot_downsample", model.screenshot_downsample},
                {"screens", screens},
                {"transitions", transitions},
                {"back", back}};
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

constexpr Rgb kBackground{236, 239, 241};
constexpr Rgb kStatusBar{38, 50, 56};
constexpr Rgb kStatusText{255, 255, 255};
constexpr Rgb kOutline{69, 90, 100};
constexpr Rgb kLabel{33, 33, 33};
constexpr Rgb kHighlight{229, 57, 53};
constexpr int kStatusBarHeight = 60;

Rgb fill_for(const std::string& type) {
    // FNV-1a keeps the palette choice stable across platforms.
    std::uint32_t h = 2166136261u;
    for (unsigned char c : type) h = (h ^ c) * 16777619u;
    static constexpr Rgb kPalette[] = {{187, 222, 251}, {200, 230, 201}, {255, 236, 179},
                                       {225, 190, 231}, {255, 204, 188}, {178, 235, 242},
                                       {220, 237, 200}, {248, 187, 208}};
    return kPalette[h % std::size(kPalette)];
}

Rect scale_down(const Rect& r, int d) {
    Rect s{r.left / d, r.top / d, r.right / d, r.bottom / d};
    s.right = std::max(s.right, s.left + 1);
    s.bottom = std::max(s.bottom, s.top + 1);
    return s;
}

}  // namespace

Image render_screen(const ScreenSpec& screen, const Viewport& viewport, const InstanceRef* highlight,
                    int downsample) {
    const int d = std::max(downsample, 1);
    Image img(std::max(viewport.width / d, 1), std::max(viewport.height / d, 1), kBackground);
    img.fill({0, 0, img.width(), kStatusBarHeight / d}, kStatusBar);
    img.text(16 / d, 15 / d, screen.activity + " / " + screen.window, std::max(6 / d, 1), kStatusText);
    for (const auto& c : screen.components) {
        const Rect b = scale_down(c.bounds, d);
        img.fill(b, fill_for(c.component_type));
        img.frame(b, std::max(2 / d, 1), kOutline);
        const int scale = std::clamp(b.height() / 10, 1, 8);
        const int max_chars = std::max(0, (b.width() - 8) / (4 * scale));
        const std::string label = c.text.substr(0, static_cast<std::size_t>(max_chars));
        if (b.height() > 5 * scale + 4)
            img.text(b.left + 4, b.top + (b.height() - 5 * scale) / 2, label, scale, kLabel);
    }
    if (highlight) {
        for (const auto& c : screen.components)
            if (c.ref() == *highlight) img.frame(scale_down(c.bounds, d), std::max(8 / d, 1), kHighlight);
    }
    return img;
}

// ---------------------------------------------------------------------------
// SimulatedDevice

SimulatedDevice::SimulatedDevice(AppModel model) : model_(std::move(model)) { model_.validate(); }

void SimulatedDevice::reset_model(AppModel model) {
    model.validate();
    model_ = std::move(model);
    if (state_ == State::foreground && !model_.screen(current_)) relaunch_app();
}

void SimulatedDevice::require_launched() const {
    if (state_ == State::not_launched) throw DriverStateError("device not launched; call relaunch_app first");
}

const ScreenSpec& SimulatedDevice::current() const { return *model_.screen(current_); }

Observation SimulatedDevice::observe() const {
    require_launched();
    switch (state_) {
        case State::external: return {DeviceState::external, std::nullopt};
        case State::home: return {DeviceState::home, std::nullopt};
        default: return {DeviceState::foreground, current()};
    }
}

Outcome SimulatedDevice::perform(const Action& action, const InstanceRef& target) {
    require_launched();
    if (state_ != State::foreground) throw DriverStateError("app is not in the foreground");
    action.validate();
    const ComponentSpec* comp = current().find(target);
    if (!comp)
        throw ComponentNotPresentError("component " + target.component_id + "#" +
                                       std::to_string(target.object_index) + " not on screen " + current_);
    if (!comp->supported_actions.contains(action.kind) || (action.kind == ActionKind::type && !comp->editable))
        throw ActionNotSupportedError("component " + target.component_id + " does not support " +
                                      std::string(to_string(action.kind)));
    auto it = model_.transitions.find(TransitionKey{current_, action.kind, target});
    if (it == model_.transitions.end()) return {OutcomeKind::stayed, {}, false};
    const TransitionSpec& t = it->second;
    if (t.target == kExternalTarget) {
        return_screen_ = current_;
        state_ = State::external;
        return {OutcomeKind::external, {}, t.new_activity};
    }
    if (t.target == kHomeTarget) {
        state_ = State::home;
        return {OutcomeKind::home, {}, false};
    }
    if (t.target == current_) return {OutcomeKind::stayed, {}, false};
    current_ = t.target;
    return {OutcomeKind::moved, current_, t.new_activity};
}

Outcome SimulatedDevice::press_back() {
    require_launched();
    if (state_ == State::home) return {OutcomeKind::home, {}, false};
    if (state_ == State::external) {
        state_ = State::foreground;
        current_ = return_screen_;
        return {OutcomeKind::moved, current_, false};
    }
    auto it = model_.back_edges.find(current_);
    if (it == model_.back_edges.end() || it->second == current_) return {OutcomeKind::stayed, {}, false};
    if (it->second == kHomeTarget) {
        state_ = State::home;
        return {OutcomeKind::home, {}, false};
    }
    const bool new_activity = model_.screen(it->second)->activity != current().activity;
    current_ = it->second;
    return {OutcomeKind::moved, current_, new_activity};
}

ScreenSpec SimulatedDevice::relaunch_app() {
    state_ = State::foreground;
    current_ = model_.entry_screen;
    return_screen_.clear();
    return current();
}

std::vector<std::uint8_t> SimulatedDevice::screenshot(const ScreenshotRequest& request) const {
    require_launched();
    if (state_ != State::foreground) throw DriverStateError("no app screen to capture");
    const ScreenSpec& screen = current();
    const int d = model_.screenshot_downsample;
    if (request.kind == ShotKind::full) return encode_png(render_screen(screen, model_.viewport, nullptr, d));
    const ComponentSpec* comp = screen.find(request.instance);
    if (!comp)
        throw ComponentNotPresentError("component " + request.instance.component_id + "#" +
                                       std::to_string(request.instance.object_index) + " not on screen");
    if (request.kind == ShotKind::highlighted)
        return encode_png(render_screen(screen, model_.viewport, &request.instance, d));
    return encode_png(render_screen(screen, model_.viewport, nullptr, d).crop(scale_down(comp->bounds, d)));
}

}  // namespace fusion
