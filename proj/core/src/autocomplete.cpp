#include "fusion/autocomplete.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fusion/errors.hpp"

namespace fusion {

std::string_view to_string(Orientation o) noexcept {
    return o == Orientation::landscape ? "landscape" : "portrait";
}

Orientation parse_orientation(std::string_view text) {
    if (text == "portrait") return Orientation::portrait;
    if (text == "landscape") return Orientation::landscape;
    throw ValidationError("orientation must be 'portrait' or 'landscape'");
}

void ReporterMetadata::validate() const {
    if (reporter_name.empty()) throw ValidationError("metadata: reporter_name is required");
    if (device.empty()) throw ValidationError("metadata: device is required");
    if (title.empty()) throw ValidationError("metadata: title is required");
}

AutoCompleter::AutoCompleter(const ComponentUniverse& universe, const EventFlowGraph& graph,
                             AutoCompleteConfig config)
    : universe_(universe), graph_(graph), config_(config) {
    if (config_.lookback == 0) config_.lookback = 1;
}

Session AutoCompleter::open_session(std::string session_id, ReporterMetadata metadata,
                                    std::string created_at) const {
    metadata.validate();
    Session s;
    s.session_id = std::move(session_id);
    s.app_id = graph_.app_id;
    s.metadata = std::move(metadata);
    s.created_at = std::move(created_at);
    s.candidate_screens = candidates_for(s.history);
    return s;
}

const ComponentDescriptor* AutoCompleter::descriptor(const std::string& component_id) const {
    if (const auto* d = universe_.find(component_id)) return d;
    auto it = graph_.dynamic_components.find(component_id);
    return it == graph_.dynamic_components.end() ? nullptr : &it->second;
}

bool AutoCompleter::supports(const ComponentInstance& instance, ActionKind action) const {
    if (action == ActionKind::click) return instance.supported_actions.contains(ActionKind::click);
    const ComponentDescriptor* d = descriptor(instance.component_id);
    return d && d->declared_actions.contains(action);
}

std::vector<std::string> AutoCompleter::all_screens() const {
    std::vector<std::string> out;
    out.reserve(graph_.screens.size());
    for (const auto& s : graph_.screens) out.push_back(s.screen_key);
    return out;
}

std::vector<std::string> AutoCompleter::in_graph_order(const std::vector<std::string>& keys) const {
    const std::set<std::string> wanted(keys.begin(), keys.end());
    std::vector<std::string> out;
    for (const auto& s : graph_.screens)
        if (wanted.contains(s.screen_key)) out.push_back(s.screen_key);
    return out;
}

std::vector<std::string> AutoCompleter::step_candidates(const ReportStep& step) const {
    const auto* resolved = std::get_if<AutoResolution>(&step.resolution);
    if (!resolved) return all_screens();  // model gap: position unknown

    // Edge targets: leaving the app and coming back lands on the same screen;
    // a crash to the home screen means the app is relaunched at its entry.
    auto target_of = [&](const Edge& e) -> std::string {
        if (e.target == kExternalTarget) return e.source;
        if (e.target == kHomeTarget) return graph_.entry;
        return e.target;
    };

    std::vector<std::string> out{resolved->screen_key};
    auto exact = graph_.edges_from(resolved->screen_key, step.action.kind, resolved->instance);
    if (step.action.kind == ActionKind::click || !exact.empty()) {
        for (const Edge* e : exact) out.push_back(target_of(*e));
        return in_graph_order(out);
    }
    // Exploration is click-only, so other gestures have no recorded outcome:
    // assume any transition recorded from this screen may have happened.
    auto any = graph_.edges_from(resolved->screen_key);
    if (any.empty()) return all_screens();
    for (const Edge* e : any) out.push_back(target_of(*e));
    return in_graph_order(out);
}

std::vector<std::string> AutoCompleter::candidates_for(const std::vector<ReportStep>& history) const {
    if (history.empty()) return {graph_.entry};
    std::vector<std::string> out;
    const std::size_t window = std::min(config_.lookback, history.size());
    for (std::size_t i = history.size() - window; i < history.size(); ++i) {
        auto part = step_candidates(history[i]);
        out.insert(out.end(), part.begin(), part.end());
    }
    return in_graph_order(out);
}

std::vector<ActionKind> AutoCompleter::suggest_actions(const Session& session) const {
    std::set<ActionKind> found;
    bool any_component = false;
    for (const auto& key : session.candidate_screens) {
        const Screen* s = graph_.screen(key);
        if (!s) continue;
        for (const auto& inst : s->instances) {
            any_component = true;
            for (ActionKind k : kAllActionKinds)
                if (supports(inst, k)) found.insert(k);
        }
    }
    // Screens whose components accept nothing known still let the reporter
    // describe a gesture through the manual path.
    if (found.empty() && any_component) return {kAllActionKinds.begin(), kAllActionKinds.end()};
    return {found.begin(), found.end()};
}

std::vector<ComponentChoice> AutoCompleter::suggest_components(const Session& session, ActionKind action) const {
    std::vector<ComponentChoice> out;
    const int step_num = static_cast<int>(session.history.size()) + 1;
    for (const auto& key : session.candidate_screens) {
        const Screen* s = graph_.screen(key);
        if (!s) continue;
        std::map<std::string, int> repeats;
        for (const auto& inst : s->instances) ++repeats[inst.component_id];
        for (const auto& inst : s->instances) {
            if (!supports(inst, action)) continue;
            Suggestion sug;
            sug.screen_key = key;
            sug.instance = inst.ref();
            sug.component_type = inst.component_type;
            sug.text = inst.text;
            sug.relative_location = inst.relative_location;
            sug.component_image = BlobRef{inst.component_screenshot, "image/png"};
            if (repeats[inst.component_id] >= 2) sug.option_ordinal = inst.object_index + 1;
            sug.action = action;
            sug.step_num = step_num;
            out.emplace_back(std::move(sug));
        }
    }
    out.emplace_back(NotInList{});
    return out;
}

std::vector<Confirmation> AutoCompleter::confirmation_screenshots(const Session& session,
                                                                  const Suggestion& suggestion) const {
    if (session.closed) throw SessionClosedError("session " + session.session_id + " is finalized");
    if (suggestion.step_num != static_cast<int>(session.history.size()) + 1)
        throw StaleSuggestionError("suggestion was made for step " + std::to_string(suggestion.step_num) +
                                   " but the session is at step " + std::to_string(session.history.size() + 1));
    const auto& c = session.candidate_screens;
    if (std::find(c.begin(), c.end(), suggestion.screen_key) == c.end())
        throw StaleSuggestionError("screen " + suggestion.screen_key + " is no longer a candidate");
    return confirmation_screenshots(session, suggestion.instance);
}

std::vector<Confirmation> AutoCompleter::confirmation_screenshots(const Session& session,
                                                                  const InstanceRef& instance) const {
    if (session.closed) throw SessionClosedError("session " + session.session_id + " is finalized");
    std::vector<Confirmation> out;
    for (const auto& key : session.candidate_screens) {
        const Screen* s = graph_.screen(key);
        if (!s) continue;
        if (const ComponentInstance* inst = s->find(instance))
            out.push_back({key, BlobRef{inst->highlighted_screenshot, "image/png"}});
    }
    if (out.empty())
        throw StaleSuggestionError("component " + instance.component_id + "#" +
                                   std::to_string(instance.object_index) + " is not on any candidate screen");
    return out;
}

void AutoCompleter::commit_step(Session& session, Action action, Resolution resolution,
                                std::optional<std::string> user_note) const {
    if (session.closed) throw SessionClosedError("session " + session.session_id + " is finalized");
    action.validate();
    if (const auto* a = std::get_if<AutoResolution>(&resolution)) {
        const auto& c = session.candidate_screens;
        if (std::find(c.begin(), c.end(), a->screen_key) == c.end())
            throw ValidationError("screen " + a->screen_key + " is not a candidate for this step");
        const ComponentInstance* inst = graph_.screen(a->screen_key)->find(a->instance);
        if (!inst)
            throw ValidationError("component " + a->instance.component_id + "#" +
                                  std::to_string(a->instance.object_index) + " is not on screen " + a->screen_key);
        if (!supports(*inst, action.kind))
            throw ValidationError("component " + a->instance.component_id + " does not support " +
                                  std::string(to_string(action.kind)));
        if (a->confirmed_screenshot.hash != inst->highlighted_screenshot)
            throw ValidationError("confirmed screenshot does not show this component on this screen");
    } else {
        const auto& m = std::get<ManualResolution>(resolution);
        if (!universe_.type_set.contains(m.component_type))
            throw ValidationError("component type '" + m.component_type + "' does not exist in this app");
    }
    session.history.push_back({static_cast<int>(session.history.size()) + 1, std::move(action),
                               std::move(resolution), std::move(user_note)});
    session.candidate_screens = candidates_for(session.history);
}

void AutoCompleter::undo_last_step(Session& session) const {
    if (session.closed) throw SessionClosedError("session " + session.session_id + " is finalized");
    if (session.history.empty()) throw ValidationError("no step to undo");
    session.history.pop_back();
    session.candidate_screens = candidates_for(session.history);
}

}  // namespace fusion
