#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oadr/adapter.hpp"
#include "oadr/dataset.hpp"
#include "oadr/embedding_store.hpp"

namespace oadr {

inline constexpr std::size_t kDefaultTokenBudget = 300;

enum class QueryMode { question_only, oracle, options_aware };

std::string_view to_string(QueryMode mode);
QueryMode parse_query_mode(std::string_view name);

struct RetrievalHit {
    std::size_t sentence_index = 0;
    double distance = 0.0;

    bool operator==(const RetrievalHit&) const = default;
};

struct Passage {
    std::string text;
    std::vector<std::size_t> sentence_indices;  // strictly ascending
    std::size_t token_count = 0;

    bool operator==(const Passage&) const = default;
};

/// The k nearest rows by L2 distance, ascending; ties go to the lower index.
/// `sentences` is a row-major matrix with query.size() columns.
std::vector<RetrievalHit> top_k(std::span<const float> query, std::span<const float> sentences, std::size_t k);
std::vector<RetrievalHit> top_k(std::span<const float> query, const std::vector<EmbeddingVector>& sentences,
                                std::size_t k);

/// Greedy in rank order until the first sentence that does not fit the
/// remaining whitespace-token budget, then restored to document order.
Passage assemble_passage(std::span<const RetrievalHit> ranked, const std::vector<std::string>& sentences,
                         std::size_t token_budget);

std::string query_text(const McqaSample& sample, QueryMode mode);

/// Embedding id of a context sentence: "<document_id>#<index>".
std::string sentence_id(std::string_view document_id, std::size_t index);

/// Maps (sample, query text, mode) to a base-space query vector.
using QueryEmbedder = std::function<EmbeddingVector(const McqaSample&, std::string_view, QueryMode)>;

QueryEmbedder mock_query_embedder(std::uint32_t dim);

/// Looks query vectors up by "<sample_id>/<mode>" in a precomputed store.
QueryEmbedder store_query_embedder(const EmbeddingStore& store);

struct RetrievalOptions {
    QueryMode mode = QueryMode::options_aware;
    std::size_t token_budget = kDefaultTokenBudget;
    std::optional<std::size_t> k;  // unset: rank every sentence
    const LinearAdapter* adapter = nullptr;
};

/// Gathers the document's sentence vectors ("<document_id>#<i>") into a
/// contiguous matrix. Throws DataError naming the first missing one.
std::vector<float> gather_sentence_matrix(const ContextDocument& document, const EmbeddingStore& context_store);

Passage retrieve_for_sample(const McqaSample& sample, const ContextDocument& document,
                            const EmbeddingStore& context_store, const QueryEmbedder& embed,
                            const RetrievalOptions& options);

/// Retrieval for many samples, parallel over samples; output follows input order.
std::vector<Passage> retrieve_batch(const std::vector<McqaSample>& samples,
                                    const std::vector<ContextDocument>& documents,
                                    const EmbeddingStore& context_store, const QueryEmbedder& embed,
                                    const RetrievalOptions& options);

struct PassageRecord {
    std::string sample_id;
    Passage passage;
    QueryMode mode = QueryMode::options_aware;
};

void write_passages_jsonl(const std::vector<PassageRecord>& records, const std::filesystem::path& path);
std::vector<PassageRecord> read_passages_jsonl(const std::filesystem::path& path);

}  // namespace oadr
