#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusion/autocomplete.hpp"
#include "fusion/blob.hpp"
#include "fusion/explorer.hpp"
#include "fusion/primer.hpp"
#include "fusion/report.hpp"

namespace fusion {

/// File-backed database for analysis results, sessions and reports.
///
///   <root>/<app_id>/universe.json
///   <root>/<app_id>/graph.json
///   <root>/<app_id>/blobs/<hh>/<sha256>   screenshots and exploration traces
///   <root>/<app_id>/reports/<id>.json
///   <root>/<app_id>/sessions/<uuid>.json
///
/// Blobs are written before the documents that reference them and every
/// document is replaced atomically, so an interrupted save never leaves a
/// dangling reference. Writers to one app serialize on an advisory lock.
class Store {
public:
    explicit Store(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    /// Blob store scoped to one app.
    class AppBlobs final : public BlobStore {
    public:
        AppBlobs(const Store& store, std::string app_id);
        BlobRef put_blob(std::span<const std::uint8_t> content) override;
        std::vector<std::uint8_t> get_blob(const BlobRef& ref) const override;
        bool has_blob(std::string_view hash) const override;

    private:
        const Store& store_;
        std::string app_id_;
    };

    AppBlobs blobs(const std::string& app_id) const;
    /// Looks a blob up across all apps. Throws NotFoundError.
    std::vector<std::uint8_t> find_blob(std::string_view hash) const;

    struct Analysis {
        ComponentUniverse universe;
        EventFlowGraph graph;
    };

    struct AppStatus {
        std::string app_id;
        bool primed = false;
        bool explored = false;
        std::size_t screens = 0;
        std::size_t edges = 0;
        std::size_t reports = 0;
    };

    void save_universe(const ComponentUniverse& universe);
    /// Throws IntegrityError when the graph references a blob not in the store.
    void save_analysis(const ComponentUniverse& universe, const EventFlowGraph& graph);
    /// Throws NotFoundError unless both universe and graph exist.
    Analysis load_analysis(const std::string& app_id) const;
    std::optional<ComponentUniverse> load_universe(const std::string& app_id) const;

    bool has_app(const std::string& app_id) const;
    std::vector<AppStatus> list_apps() const;

    /// Strictly increasing per app, starting at 1; safe across threads and processes.
    int next_report_id(const std::string& app_id);
    void save_report(const BugReport& report);
    BugReport load_report(const std::string& app_id, int report_id) const;
    std::vector<int> list_reports(const std::string& app_id) const;

    void save_session(const Session& session);
    /// Searches every app. Throws NotFoundError.
    Session load_session(const std::string& session_id) const;

    /// Called before every file write with a label naming the write. Used by
    /// crash-injection tests.
    void set_write_hook(std::function<void(std::string_view)> hook) { write_hook_ = std::move(hook); }

    /// Throws ValidationError unless `app_id` is a safe directory name.
    static void check_app_id(std::string_view app_id);

private:
    friend class AppBlobs;

    std::filesystem::path app_dir(const std::string& app_id) const;
    std::filesystem::path blob_path(const std::string& app_id, std::string_view hash) const;
    void write_atomic(const std::filesystem::path& path, std::string_view content, std::string_view label) const;
    void require_blobs(const std::string& app_id, const std::vector<std::string>& hashes, std::string_view what) const;

    std::filesystem::path root_;
    std::function<void(std::string_view)> write_hook_;
};

/// Closes the session into a persisted report under the next report id.
/// Throws ValidationError for an empty history and SessionClosedError when
/// the session was already finalized.
BugReport finalize(Store& store, Session& session, std::string created_at);

/// Current UTC time as ISO-8601, second resolution.
std::string utc_timestamp();
/// Random RFC 4122 version 4 UUID.
std::string make_uuid();

}  // namespace fusion
