#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace oadr {

using EmbeddingVector = std::vector<float>;

/// Insertion-ordered id -> vector map of a fixed dimension. Rows are stored
/// contiguously so retrieval kernels can scan them directly.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::uint32_t dim);

    std::uint32_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    /// Throws DataError on duplicate id, non-finite entries or an id longer
    /// than 65535 bytes; DimensionMismatch on wrong length.
    void insert(std::string id, std::span<const float> vector);

    bool contains(std::string_view id) const;
    std::optional<std::span<const float>> find(std::string_view id) const;
    std::span<const float> at(std::string_view id) const;

    const std::string& id(std::size_t row) const { return ids_[row]; }
    std::span<const float> row(std::size_t row) const {
        return {data_.data() + row * dim_, dim_};
    }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::span<const float> data() const noexcept { return data_; }

    bool operator==(const EmbeddingStore& other) const;

private:
    std::uint32_t dim_;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr char kStoreMagic[8] = {'O', 'A', 'D', 'R', 'V', 'E', 'C', '1'};

/// OADRVEC1 layout, little-endian, no padding:
///   magic[8] | dim:u32 | count:u64 | count x (id_len:u16 | id bytes | dim x f32)
std::vector<std::uint8_t> encode_store(const EmbeddingStore& store);
EmbeddingStore decode_store(std::span<const std::uint8_t> bytes);

void write_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_store(const std::filesystem::path& path);

/// JSONL import: {"id": str, "vector": [floats]} per line. Dimension is taken
/// from the first record.
EmbeddingStore read_store_jsonl(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

/// Deterministic hashed bag-of-words embedding used as an offline encoder.
/// Each token adds +-1 to bucket hash % dim (sign from bit 63), then the
/// vector is L2-normalized unless it is all zero.
EmbeddingVector mock_embed(std::string_view text, std::uint32_t dim);

}  // namespace oadr
