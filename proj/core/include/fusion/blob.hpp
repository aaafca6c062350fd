#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fusion {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

/// Content-addressed reference to an immutable blob.
struct BlobRef {
    std::string hash;
    std::string media_type = "image/png";

    friend bool operator==(const BlobRef&, const BlobRef&) = default;
};

/// Sniffs the media type from magic bytes (PNG, JSON or octet-stream).
std::string sniff_media_type(std::span<const std::uint8_t> data);

/// Content-addressed blob storage. put_blob is idempotent.
class BlobStore {
public:
    virtual ~BlobStore() = default;
    virtual BlobRef put_blob(std::span<const std::uint8_t> content) = 0;
    /// Throws NotFoundError for unknown hashes.
    virtual std::vector<std::uint8_t> get_blob(const BlobRef& ref) const = 0;
    virtual bool has_blob(std::string_view hash) const = 0;
};

/// In-process blob store, used by tests, benchmarks and dry runs.
class MemoryBlobStore final : public BlobStore {
public:
    BlobRef put_blob(std::span<const std::uint8_t> content) override;
    std::vector<std::uint8_t> get_blob(const BlobRef& ref) const override;
    bool has_blob(std::string_view hash) const override;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::uint8_t>, std::less<>> blobs_;
};

}  // namespace fusion
