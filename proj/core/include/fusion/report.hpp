#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fusion/autocomplete.hpp"
#include "fusion/blob.hpp"
#include "fusion/device.hpp"
#include "fusion/explorer.hpp"
#include "fusion/primer.hpp"

namespace fusion {

/// Finished report: preliminary information, the steps, and one full
/// screenshot per step (empty for manual steps, which have none).
struct BugReport {
    int report_id = 0;
    std::string app_id;
    std::string session_id;
    ReporterMetadata metadata;
    std::vector<ReportStep> steps;
    std::vector<std::optional<BlobRef>> full_screenshots;
    bool gap_free = false;
    std::string created_at;

    std::vector<int> manual_steps() const;
    friend bool operator==(const BugReport&, const BugReport&) = default;
};

/// Builds the report for a session without touching storage.
/// Throws ValidationError on an empty history, SessionClosedError when closed.
BugReport build_report(const Session& session, int report_id, std::string created_at);

struct RenderOptions {
    enum class Images { api_links, inline_data } images = Images::api_links;
    /// URL prefix for api_links, followed by the blob hash.
    std::string blob_url_prefix = "/api/blobs/";
};

/// Three-section HTML page. Throws IntegrityError when a referenced blob
/// is missing from `blobs`.
std::string render_html(const BugReport& report, const ComponentUniverse& universe, const EventFlowGraph& graph,
                        const BlobStore& blobs, const RenderOptions& options = {});

/// Plain-text rendering with the same sections, for terminals and diffs.
std::string render_text(const BugReport& report, const ComponentUniverse& universe, const EventFlowGraph& graph,
                        const BlobStore& blobs);

struct ReplayEntry {
    int step_num = 1;
    Action action;  // carries typed_text for type steps
    std::string screen_key;
    InstanceRef instance;
    friend bool operator==(const ReplayEntry&, const ReplayEntry&) = default;
};

struct ReplayScript {
    std::string app_id;
    std::vector<ReplayEntry> entries;
    /// Where the last step must land, when the graph records it unambiguously.
    std::optional<std::string> expected_final;
    friend bool operator==(const ReplayScript&, const ReplayScript&) = default;
};

/// Throws GapError listing the manual steps when the report is not gap-free.
/// With a graph, the expected final screen is filled in when known.
ReplayScript to_replay_script(const BugReport& report, const EventFlowGraph* graph = nullptr);

struct ReplayResult {
    bool success = false;
    int step_num = 0;  // first diverging step; 0 on success
    std::string expected;
    std::string observed;
    std::string final_state;  // screen key, EXTERNAL or HOME after the run
};

/// Cold-starts the app and performs every entry, checking the fingerprint
/// before each one. Driver failures are rethrown with the step number.
ReplayResult replay(const ReplayScript& script, DeviceDriver& driver);

}  // namespace fusion
