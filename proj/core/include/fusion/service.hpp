#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fusion/autocomplete.hpp"
#include "fusion/errors.hpp"
#include "fusion/report.hpp"
#include "fusion/store.hpp"

namespace fusion {

/// Wire form of every failure.
struct ApiError {
    ErrorCode code = ErrorCode::internal;
    std::string message;
    nlohmann::json detail = nlohmann::json::object();
};

/// Classifies an exception. Occurrences of `scrub` (the store root) in the
/// message are replaced so responses never reveal where data lives.
ApiError to_api_error(std::exception_ptr error, const std::filesystem::path& scrub = {});
int http_status(ErrorCode code) noexcept;
nlohmann::json to_json(const ApiError& error);

/// Session workflow over a Store. Every mutation is written back before it
/// returns, so a restarted service resumes where the old one stopped.
class ReportingService {
public:
    explicit ReportingService(Store& store, AutoCompleteConfig config = {});

    Store& store() noexcept { return store_; }

    std::vector<Store::AppStatus> list_apps() const;
    /// Choices for a manual step: the widget types found in the app bundle.
    std::set<std::string> component_types(const std::string& app_id);
    Session open_session(const std::string& app_id, const ReporterMetadata& metadata);
    Session session(const std::string& session_id) const;

    std::vector<ActionKind> suggest_actions(const std::string& session_id);
    std::vector<ComponentChoice> suggest_components(const std::string& session_id, ActionKind action);
    std::vector<Confirmation> confirmations(const std::string& session_id, const InstanceRef& instance);

    Session commit_step(const std::string& session_id, const Action& action, const Resolution& resolution,
                        const std::optional<std::string>& user_note);
    Session undo_last_step(const std::string& session_id);
    BugReport finalize(const std::string& session_id);

    BugReport report(const std::string& app_id, int report_id) const;
    std::string report_html(const std::string& app_id, int report_id, const RenderOptions& options = {});
    std::string report_text(const std::string& app_id, int report_id);

    /// Throws NotFoundError.
    std::vector<std::uint8_t> blob(const std::string& hash) const;

private:
    struct Loaded {
        Store::Analysis analysis;
        std::filesystem::file_time_type stamp;
    };

    std::shared_ptr<const Loaded> analysis(const std::string& app_id);
    std::shared_ptr<std::mutex> session_mutex(const std::string& session_id);

    Store& store_;
    AutoCompleteConfig config_;
    std::mutex cache_mutex_;
    std::map<std::string, std::shared_ptr<const Loaded>> cache_;
    std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> session_locks_;
};

/// JSON-over-HTTP front end for ReportingService.
class ApiServer {
public:
    explicit ApiServer(ReportingService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds without serving. Port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Requires bind().
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fusion
