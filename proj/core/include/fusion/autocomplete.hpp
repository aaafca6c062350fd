#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fusion/action.hpp"
#include "fusion/blob.hpp"
#include "fusion/explorer.hpp"
#include "fusion/geometry.hpp"
#include "fusion/primer.hpp"

namespace fusion {

enum class Orientation { portrait, landscape };

std::string_view to_string(Orientation o) noexcept;
Orientation parse_orientation(std::string_view text);

/// Preliminary report fields entered before any step.
struct ReporterMetadata {
    std::string reporter_name;
    std::string device;
    Orientation orientation = Orientation::portrait;
    std::string title;
    std::string description;

    /// Name, device and title must be non-empty.
    void validate() const;
    friend bool operator==(const ReporterMetadata&, const ReporterMetadata&) = default;
};

/// Step resolved against the event-flow graph and confirmed by screenshot.
struct AutoResolution {
    std::string screen_key;
    InstanceRef instance;
    BlobRef confirmed_screenshot;
    friend bool operator==(const AutoResolution&, const AutoResolution&) = default;
};

/// Step the reporter could not find among the suggestions ("Not in this list...").
struct ManualResolution {
    std::string component_type;
    std::string text;
    RelativeLocation relative_location = RelativeLocation::center;
    friend bool operator==(const ManualResolution&, const ManualResolution&) = default;
};

using Resolution = std::variant<AutoResolution, ManualResolution>;

struct ReportStep {
    int step_num = 1;
    Action action;
    Resolution resolution;
    std::optional<std::string> user_note;

    bool is_auto() const noexcept { return std::holds_alternative<AutoResolution>(resolution); }
    friend bool operator==(const ReportStep&, const ReportStep&) = default;
};

/// A reporter's report in progress, plus the screens the app may be on
/// before the next step.
struct Session {
    std::string session_id;
    std::string app_id;
    ReporterMetadata metadata;
    std::vector<ReportStep> history;
    std::vector<std::string> candidate_screens;  // graph insertion order
    std::string created_at;
    bool closed = false;
    std::optional<int> report_id;

    friend bool operator==(const Session&, const Session&) = default;
};

struct Suggestion {
    std::string screen_key;
    InstanceRef instance;
    std::string component_type;
    std::string text;
    RelativeLocation relative_location = RelativeLocation::center;
    BlobRef component_image;
    /// "Option #n" for repeated ids on one screen; n follows object_index from 1.
    std::optional<int> option_ordinal;
    ActionKind action = ActionKind::click;
    int step_num = 1;  // the step this suggestion was produced for

    friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

/// Trailing entry of every component list.
struct NotInList {
    static constexpr std::string_view label = "Not in this list...";
    friend bool operator==(const NotInList&, const NotInList&) = default;
};

using ComponentChoice = std::variant<Suggestion, NotInList>;

struct Confirmation {
    std::string screen_key;
    BlobRef screenshot;
    friend bool operator==(const Confirmation&, const Confirmation&) = default;
};

struct AutoCompleteConfig {
    /// How many trailing steps feed the candidate-screen estimate.
    std::size_t lookback = 1;
};

/// Suggestion engine over one app's analysis data. Stateless: every
/// answer is a function of (graph, universe, session history, request).
class AutoCompleter {
public:
    AutoCompleter(const ComponentUniverse& universe, const EventFlowGraph& graph, AutoCompleteConfig config = {});

    /// Fresh session positioned at the cold-start entry screen.
    Session open_session(std::string session_id, ReporterMetadata metadata, std::string created_at) const;

    /// Action kinds available on the candidate screens, in canonical order.
    std::vector<ActionKind> suggest_actions(const Session& session) const;

    /// Instances on the candidate screens supporting `action`, followed by NotInList.
    std::vector<ComponentChoice> suggest_components(const Session& session, ActionKind action) const;

    /// Highlighted full screenshots of the suggested instance, one per
    /// candidate screen containing it. Throws StaleSuggestionError when the
    /// suggestion was made for another step or left the candidates.
    std::vector<Confirmation> confirmation_screenshots(const Session& session, const Suggestion& suggestion) const;
    std::vector<Confirmation> confirmation_screenshots(const Session& session, const InstanceRef& instance) const;

    /// Appends a step and advances the candidate screens.
    /// Throws SessionClosedError or ValidationError.
    void commit_step(Session& session, Action action, Resolution resolution,
                     std::optional<std::string> user_note = std::nullopt) const;

    /// Drops the last step; candidates are refolded over what remains.
    void undo_last_step(Session& session) const;

    /// Candidate screens implied by a step history.
    std::vector<std::string> candidates_for(const std::vector<ReportStep>& history) const;

    /// Click support comes from the exploration trace; other gestures from
    /// the statically declared actions.
    bool supports(const ComponentInstance& instance, ActionKind action) const;

    const ComponentUniverse& universe() const noexcept { return universe_; }
    const EventFlowGraph& graph() const noexcept { return graph_; }

private:
    std::vector<std::string> step_candidates(const ReportStep& step) const;
    std::vector<std::string> in_graph_order(const std::vector<std::string>& keys) const;
    std::vector<std::string> all_screens() const;
    const ComponentDescriptor* descriptor(const std::string& component_id) const;

    const ComponentUniverse& universe_;
    const EventFlowGraph& graph_;
    AutoCompleteConfig config_;
};

}  // namespace fusion
