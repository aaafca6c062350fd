#include "fusion/blob.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "fusion/errors.hpp"

namespace fusion {

std::string sha256_hex(std::span<const std::uint8_t> data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xf];
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string sniff_media_type(std::span<const std::uint8_t> data) {
    static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() >= sizeof kPng && std::equal(std::begin(kPng), std::end(kPng), data.begin()))
        return "image/png";
    if (!data.empty() && (data[0] == '{' || data[0] == '[')) return "application/json";
    return "application/octet-stream";
}

BlobRef MemoryBlobStore::put_blob(std::span<const std::uint8_t> content) {
    BlobRef ref{sha256_hex(content), sniff_media_type(content)};
    std::lock_guard lock(mutex_);
    blobs_.try_emplace(ref.hash, content.begin(), content.end());
    return ref;
}

std::vector<std::uint8_t> MemoryBlobStore::get_blob(const BlobRef& ref) const {
    std::lock_guard lock(mutex_);
    auto it = blobs_.find(ref.hash);
    if (it == blobs_.end()) throw NotFoundError("blob " + ref.hash + " not found");
    return it->second;
}

bool MemoryBlobStore::has_blob(std::string_view hash) const {
    std::lock_guard lock(mutex_);
    return blobs_.find(hash) != blobs_.end();
}

std::size_t MemoryBlobStore::size() const {
    std::lock_guard lock(mutex_);
    return blobs_.size();
}

}  // namespace fusion
