#include "oadr/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "jsonl.hpp"
#include "oadr/error.hpp"
#include "oadr/text.hpp"

namespace oadr {

EmbeddingStore::EmbeddingStore(std::uint32_t dim) : dim_(dim) {
    if (dim == 0) throw DataError("embedding dimension must be positive");
}

void EmbeddingStore::insert(std::string id, std::span<const float> vector) {
    if (vector.size() != dim_) throw DimensionMismatch(dim_, vector.size());
    if (id.size() > 0xFFFF) throw DataError("embedding id longer than 65535 bytes");
    for (float v : vector) {
        if (!std::isfinite(v)) throw DataError("non-finite value in vector '" + id + "'");
    }
    if (index_.contains(id)) throw DataError("duplicate embedding id '" + id + "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), vector.begin(), vector.end());
}

bool EmbeddingStore::contains(std::string_view id) const { return index_.contains(std::string(id)); }

std::optional<std::span<const float>> EmbeddingStore::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return row(it->second);
}

std::span<const float> EmbeddingStore::at(std::string_view id) const {
    auto found = find(id);
    if (!found) throw DataError("embedding id '" + std::string(id) + "' not found");
    return *found;
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
    if (dim_ != other.dim_ || ids_ != other.ids_ || data_.size() != other.data_.size()) return false;
    // bitwise, so -0.0 vs 0.0 and payload differences are caught
    return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

// ---------------------------------------------------------------------------
// OADRVEC1

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t offset() const { return pos_; }
    std::uint64_t remaining() const { return bytes_.size() - pos_; }

    void need(std::uint64_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError(std::string("truncated file: expected ") + std::to_string(n) + " bytes for " + what +
                                  ", " + std::to_string(remaining()) + " remain",
                              pos_);
        }
    }

    template <typename T>
    T get_le(const char* what) {
        need(sizeof(T), what);
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return value;
    }

    std::span<const std::uint8_t> take(std::uint64_t n, const char* what) {
        need(n, what);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_store(const EmbeddingStore& store) {
    std::vector<std::uint8_t> out;
    out.reserve(20 + store.size() * (2 + 16 + 4 * static_cast<std::size_t>(store.dim())));
    for (char c : kStoreMagic) out.push_back(static_cast<std::uint8_t>(c));
    put_le<std::uint32_t>(out, store.dim());
    put_le<std::uint64_t>(out, store.size());
    for (std::size_t r = 0; r < store.size(); ++r) {
        const auto& id = store.id(r);
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        for (char c : id) out.push_back(static_cast<std::uint8_t>(c));
        for (float v : store.row(r)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

EmbeddingStore decode_store(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    auto magic = in.take(sizeof(kStoreMagic), "magic");
    if (std::memcmp(magic.data(), kStoreMagic, sizeof(kStoreMagic)) != 0) {
        throw FormatError("bad magic, expected \"OADRVEC1\"", 0);
    }
    const std::uint64_t dim_offset = in.offset();
    const auto dim = in.get_le<std::uint32_t>("dim");
    if (dim == 0) throw FormatError("dim must be positive", dim_offset);
    const auto count = in.get_le<std::uint64_t>("count");

    EmbeddingStore store(dim);
    std::vector<float> vec(dim);
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::uint64_t record_offset = in.offset();
        const auto id_len = in.get_le<std::uint16_t>("id length");
        auto id_bytes = in.take(id_len, "id");
        std::string id(id_bytes.begin(), id_bytes.end());
        const std::uint64_t vector_offset = in.offset();
        in.need(std::uint64_t{dim} * 4, "vector");
        for (std::uint32_t i = 0; i < dim; ++i) vec[i] = std::bit_cast<float>(in.get_le<std::uint32_t>("vector"));
        if (store.contains(id)) throw FormatError("duplicate id '" + id + "'", record_offset);
        try {
            store.insert(std::move(id), vec);
        } catch (const DataError& e) {
            throw FormatError(e.what(), vector_offset);
        }
    }
    if (in.remaining() != 0) {
        throw FormatError("trailing " + std::to_string(in.remaining()) + " bytes after " + std::to_string(count) +
                              " records",
                          in.offset());
    }
    return store;
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    auto bytes = encode_store(store);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

EmbeddingStore read_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_store(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.offset());
    }
}

EmbeddingStore read_store_jsonl(const std::filesystem::path& path) {
    std::optional<EmbeddingStore> store;
    detail::for_each_jsonl(path, [&](const detail::json& r, std::size_t) {
        auto id = r.at("id").get<std::string>();
        auto vec = r.at("vector").get<std::vector<float>>();
        if (!store) {
            if (vec.empty()) throw DataError("empty vector");
            store.emplace(static_cast<std::uint32_t>(vec.size()));
        }
        store->insert(std::move(id), vec);
    });
    if (!store) throw DataError(path.string() + ": no records, dimension unknown");
    return std::move(*store);
}

// ---------------------------------------------------------------------------
// Mock embedder

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

EmbeddingVector mock_embed(std::string_view text, std::uint32_t dim) {
    if (dim == 0) throw DataError("embedding dimension must be positive");
    std::vector<double> acc(dim, 0.0);
    for (const auto& token : text::word_tokens(text)) {
        const std::uint64_t h = fnv1a64(token);
        acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
    }
    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    EmbeddingVector out(dim, 0.0f);
    if (norm_sq == 0.0) return out;
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::uint32_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] * inv);
    return out;
}

}  // namespace oadr
