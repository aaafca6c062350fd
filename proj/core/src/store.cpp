#include "fusion/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "fusion/errors.hpp"
#include "fusion/serialization.hpp"

namespace fusion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kUniverseFile = "universe.json";
constexpr const char* kGraphFile = "graph.json";
constexpr const char* kCounterFile = "reports/.counter";

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot read " + path.filename().string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw IntegrityError("corrupt document " + path.filename().string() + ": " + e.what());
    }
}

template <typename T>
T decode(const json& j, const fs::path& path) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw IntegrityError("malformed document " + path.filename().string() + ": " + e.what());
    }
}

bool is_hex_hash(std::string_view h) {
    return h.size() == 64 && std::all_of(h.begin(), h.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

bool is_uuid(std::string_view s) {
    if (s.size() != 36) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (c != '-') return false;
        } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return true;
}

// Exclusive flock on <app>/.lock for the lifetime of the object.
class AppLock {
public:
    explicit AppLock(const fs::path& dir) {
        fs::create_directories(dir);
        fd_ = ::open((dir / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw Error("cannot open app lock");
        while (::flock(fd_, LOCK_EX) != 0) {
            if (errno != EINTR) {
                ::close(fd_);
                throw Error("cannot lock app directory");
            }
        }
    }
    ~AppLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    AppLock(const AppLock&) = delete;
    AppLock& operator=(const AppLock&) = delete;

private:
    int fd_ = -1;
};

void write_fd(int fd, const void* data, std::size_t size) {
    const auto* p = static_cast<const char*>(data);
    while (size > 0) {
        const ssize_t n = ::write(fd, p, size);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error("write failed");
        }
        p += n;
        size -= static_cast<std::size_t>(n);
    }
}

std::string temp_suffix() {
    static std::atomic<unsigned> counter{0};
    return ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
}

}  // namespace

Store::Store(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

void Store::check_app_id(std::string_view app_id) {
    const bool ok = !app_id.empty() && app_id.size() <= 128 && app_id != "." && app_id != ".." &&
                    std::all_of(app_id.begin(), app_id.end(), [](char c) {
                        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
                    });
    if (!ok) throw ValidationError("invalid app id '" + std::string(app_id) + "'");
}

fs::path Store::app_dir(const std::string& app_id) const {
    check_app_id(app_id);
    return root_ / app_id;
}

fs::path Store::blob_path(const std::string& app_id, std::string_view hash) const {
    return app_dir(app_id) / "blobs" / std::string(hash.substr(0, 2)) / std::string(hash);
}

void Store::write_atomic(const fs::path& path, std::string_view content, std::string_view label) const {
    if (write_hook_) write_hook_(std::string(label) + ":begin");
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + temp_suffix();
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("cannot create temporary file");
    try {
        const std::size_t half = content.size() / 2;
        write_fd(fd, content.data(), half);
        if (write_hook_) write_hook_(std::string(label) + ":partial");
        write_fd(fd, content.data() + half, content.size() - half);
        ::fsync(fd);
    } catch (...) {
        ::close(fd);
        fs::remove(tmp);
        throw;
    }
    ::close(fd);
    if (write_hook_) write_hook_(std::string(label) + ":rename");
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Blobs

Store::AppBlobs::AppBlobs(const Store& store, std::string app_id) : store_(store), app_id_(std::move(app_id)) {
    check_app_id(app_id_);
}

BlobRef Store::AppBlobs::put_blob(std::span<const std::uint8_t> content) {
    BlobRef ref{sha256_hex(content), sniff_media_type(content)};
    const fs::path path = store_.blob_path(app_id_, ref.hash);
    if (!fs::exists(path))
        store_.write_atomic(path, {reinterpret_cast<const char*>(content.data()), content.size()}, "blob");
    return ref;
}

std::vector<std::uint8_t> Store::AppBlobs::get_blob(const BlobRef& ref) const {
    if (!is_hex_hash(ref.hash)) throw NotFoundError("blob " + ref.hash + " not found");
    std::ifstream in(store_.blob_path(app_id_, ref.hash), std::ios::binary);
    if (!in) throw NotFoundError("blob " + ref.hash + " not found");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool Store::AppBlobs::has_blob(std::string_view hash) const {
    return is_hex_hash(hash) && fs::exists(store_.blob_path(app_id_, hash));
}

Store::AppBlobs Store::blobs(const std::string& app_id) const { return AppBlobs(*this, app_id); }

std::vector<std::uint8_t> Store::find_blob(std::string_view hash) const {
    if (is_hex_hash(hash)) {
        for (const auto& entry : fs::directory_iterator(root_)) {
            if (!entry.is_directory()) continue;
            const fs::path p = entry.path() / "blobs" / std::string(hash.substr(0, 2)) / std::string(hash);
            if (fs::is_regular_file(p)) {
                std::ifstream in(p, std::ios::binary);
                return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
            }
        }
    }
    throw NotFoundError("blob " + std::string(hash) + " not found");
}

void Store::require_blobs(const std::string& app_id, const std::vector<std::string>& hashes,
                          std::string_view what) const {
    const AppBlobs b = blobs(app_id);
    for (const auto& h : hashes)
        if (!b.has_blob(h)) throw IntegrityError(std::string(what) + " references missing blob " + h);
}

// ---------------------------------------------------------------------------
// Analysis

void Store::save_universe(const ComponentUniverse& universe) {
    const fs::path dir = app_dir(universe.app_id);
    AppLock lock(dir);
    write_atomic(dir / kUniverseFile, json(universe).dump(2), "universe");
}

void Store::save_analysis(const ComponentUniverse& universe, const EventFlowGraph& graph) {
    if (universe.app_id != graph.app_id)
        throw ValidationError("universe and graph belong to different apps");
    const fs::path dir = app_dir(graph.app_id);
    AppLock lock(dir);
    require_blobs(graph.app_id, graph.blob_hashes(), "graph");
    // The trace is content-addressed like a screenshot, so an older graph.json
    // keeps pointing at its own trace if this save is interrupted.
    const std::string trace = trace_to_json(graph.trace).dump(1);
    AppBlobs b = blobs(graph.app_id);
    const BlobRef trace_ref = b.put_blob({reinterpret_cast<const std::uint8_t*>(trace.data()), trace.size()});
    json g = graph;
    g["trace_blob"] = trace_ref.hash;
    write_atomic(dir / kUniverseFile, json(universe).dump(2), "universe");
    write_atomic(dir / kGraphFile, g.dump(1), "graph");
}

std::optional<ComponentUniverse> Store::load_universe(const std::string& app_id) const {
    const fs::path path = app_dir(app_id) / kUniverseFile;
    if (!fs::exists(path)) return std::nullopt;
    return decode<ComponentUniverse>(read_json(path), path);
}

Store::Analysis Store::load_analysis(const std::string& app_id) const {
    const fs::path dir = app_dir(app_id);
    if (!fs::exists(dir / kUniverseFile) || !fs::exists(dir / kGraphFile))
        throw NotFoundError("no analysis data for app '" + app_id + "'");
    Analysis a;
    a.universe = decode<ComponentUniverse>(read_json(dir / kUniverseFile), dir / kUniverseFile);
    const json g = read_json(dir / kGraphFile);
    a.graph = decode<EventFlowGraph>(g, dir / kGraphFile);
    const std::string trace_hash = g.value("trace_blob", std::string());
    const AppBlobs b = blobs(app_id);
    if (!b.has_blob(trace_hash)) throw IntegrityError("graph of app '" + app_id + "' references a missing trace");
    const auto bytes = b.get_blob({trace_hash, "application/json"});
    try {
        a.graph.trace = trace_from_json(json::parse(bytes.begin(), bytes.end()));
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("malformed trace: ") + e.what());
    }
    return a;
}

bool Store::has_app(const std::string& app_id) const {
    const fs::path dir = app_dir(app_id);
    return fs::exists(dir / kUniverseFile) || fs::exists(dir / kGraphFile);
}

std::vector<Store::AppStatus> Store::list_apps() const {
    std::vector<AppStatus> out;
    for (const auto& entry : fs::directory_iterator(root_)) {
        if (!entry.is_directory()) continue;
        const std::string id = entry.path().filename().string();
        try {
            check_app_id(id);
        } catch (const ValidationError&) {
            continue;
        }
        AppStatus st;
        st.app_id = id;
        st.primed = fs::exists(entry.path() / kUniverseFile);
        st.explored = fs::exists(entry.path() / kGraphFile);
        if (!st.primed && !st.explored) continue;
        if (st.explored) {
            const json g = read_json(entry.path() / kGraphFile);
            st.screens = g.at("screens").size();
            st.edges = g.at("edges").size();
        }
        st.reports = list_reports(id).size();
        out.push_back(st);
    }
    std::sort(out.begin(), out.end(), [](const AppStatus& a, const AppStatus& b) { return a.app_id < b.app_id; });
    return out;
}

// ---------------------------------------------------------------------------
// Reports and sessions

int Store::next_report_id(const std::string& app_id) {
    const fs::path dir = app_dir(app_id);
    if (!fs::exists(dir)) throw NotFoundError("unknown app '" + app_id + "'");
    AppLock lock(dir);
    int last = 0;
    if (fs::exists(dir / kCounterFile)) {
        try {
            last = std::stoi(read_text(dir / kCounterFile));
        } catch (const std::logic_error&) {
            throw IntegrityError("corrupt report counter for app '" + app_id + "'");
        }
    }
    // Never hand out an id that already has a report on disk.
    for (int id : list_reports(app_id)) last = std::max(last, id);
    const int next = last + 1;
    write_atomic(dir / kCounterFile, std::to_string(next), "counter");
    return next;
}

void Store::save_report(const BugReport& report) {
    const fs::path dir = app_dir(report.app_id);
    AppLock lock(dir);
    std::vector<std::string> hashes;
    for (const auto& s : report.full_screenshots)
        if (s) hashes.push_back(s->hash);
    for (const auto& step : report.steps)
        if (const auto* a = std::get_if<AutoResolution>(&step.resolution)) hashes.push_back(a->confirmed_screenshot.hash);
    require_blobs(report.app_id, hashes, "report");
    write_atomic(dir / "reports" / (std::to_string(report.report_id) + ".json"), json(report).dump(2), "report");
}

BugReport Store::load_report(const std::string& app_id, int report_id) const {
    const fs::path path = app_dir(app_id) / "reports" / (std::to_string(report_id) + ".json");
    if (!fs::exists(path))
        throw NotFoundError("report " + std::to_string(report_id) + " of app '" + app_id + "' not found");
    return decode<BugReport>(read_json(path), path);
}

std::vector<int> Store::list_reports(const std::string& app_id) const {
    std::vector<int> ids;
    const fs::path dir = app_dir(app_id) / "reports";
    if (!fs::exists(dir)) return ids;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.path().extension() != ".json" || name.find(".tmp.") != std::string::npos) continue;
        const std::string stem = entry.path().stem().string();
        if (!stem.empty() && std::all_of(stem.begin(), stem.end(), ::isdigit)) ids.push_back(std::stoi(stem));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

void Store::save_session(const Session& session) {
    if (!is_uuid(session.session_id)) throw ValidationError("invalid session id");
    const fs::path dir = app_dir(session.app_id);
    AppLock lock(dir);
    std::vector<std::string> hashes;
    for (const auto& step : session.history)
        if (const auto* a = std::get_if<AutoResolution>(&step.resolution)) hashes.push_back(a->confirmed_screenshot.hash);
    require_blobs(session.app_id, hashes, "session");
    write_atomic(dir / "sessions" / (session.session_id + ".json"), json(session).dump(2), "session");
}

Session Store::load_session(const std::string& session_id) const {
    if (is_uuid(session_id)) {
        for (const auto& entry : fs::directory_iterator(root_)) {
            if (!entry.is_directory()) continue;
            const fs::path p = entry.path() / "sessions" / (session_id + ".json");
            if (fs::is_regular_file(p)) return decode<Session>(read_json(p), p);
        }
    }
    throw NotFoundError("session " + session_id + " not found");
}

// ---------------------------------------------------------------------------

BugReport finalize(Store& store, Session& session, std::string created_at) {
    if (session.closed) throw SessionClosedError("session " + session.session_id + " is already finalized");
    if (session.history.empty()) throw ValidationError("cannot finalize a report without steps");
    session.metadata.validate();
    const int id = store.next_report_id(session.app_id);
    BugReport report = build_report(session, id, std::move(created_at));
    store.save_report(report);
    session.closed = true;
    session.report_id = id;
    store.save_session(session);
    return report;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string make_uuid() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_int_distribution<std::uint64_t> dist;
    std::uint64_t hi = dist(rng), lo = dist(rng);
    hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
    lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
    char buf[37];
    std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                  static_cast<unsigned>((hi >> 16) & 0xffff), static_cast<unsigned>(hi & 0xffff),
                  static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xffffffffffffULL));
    return buf;
}

}  // namespace fusion
