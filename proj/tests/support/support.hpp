#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fusion/autocomplete.hpp"
#include "fusion/blob.hpp"
#include "fusion/device.hpp"
#include "fusion/explorer.hpp"
#include "fusion/primer.hpp"
#include "fusion/report.hpp"

namespace fusion::testing {

std::filesystem::path fixture_dir();
std::filesystem::path docviewer_bundle();
std::filesystem::path docviewer_model();
std::filesystem::path golden_dir();

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

struct Analyzed {
    ComponentUniverse universe;
    AppModel model;
    EventFlowGraph graph;
    MemoryBlobStore blobs;

    std::string key(const std::string& screen_id) const;
};

std::unique_ptr<Analyzed> analyze(ComponentUniverse universe, AppModel model, const ExploreConfig& config = {});
std::unique_ptr<Analyzed> analyze_docviewer();

ReporterMetadata sample_metadata();

/// Auto resolution of `ref` on `screen_key`, confirmed with its highlighted shot.
AutoResolution resolve(const EventFlowGraph& graph, const std::string& screen_key, const InstanceRef& ref);

/// The four-step "Go To Page" report: click OK, click the first document,
/// click Go To Page, type 5 into the page number field.
Session docviewer_session(const AutoCompleter& ac, const Analyzed& a, const std::string& session_id = "");

// Randomized app models ------------------------------------------------------

struct RandomModelOptions {
    int max_screens = 15;
    int max_components = 60;
    int downsample = 4;
};

/// Every screen is click-reachable from the entry and has a unique fingerprint.
AppModel random_model(std::mt19937_64& rng, const RandomModelOptions& options = {});
/// Universe that declares every component of the model.
ComponentUniverse universe_for(const AppModel& model);

using ClickEdge = std::tuple<std::string, std::string, int, std::string>;  // source, id, index, target

struct OracleGraph {
    std::set<std::string> screens;  // fingerprints
    std::set<ClickEdge> edges;
};

/// Breadth-first search over the transition table, independent of the explorer.
OracleGraph bfs_oracle(const AppModel& model);
OracleGraph as_oracle(const EventFlowGraph& graph);

}  // namespace fusion::testing
