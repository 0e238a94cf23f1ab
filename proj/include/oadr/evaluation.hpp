#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "oadr/dataset.hpp"
#include "oadr/retriever.hpp"

namespace oadr {

/// 100 * |retrieved & oracle| / |oracle|. Throws DataError on an empty oracle set.
double overlap_percent(const std::set<std::size_t>& retrieved, const std::set<std::size_t>& oracle_retrieved);

struct OverlapReport {
    QueryMode mode = QueryMode::options_aware;
    std::vector<std::string> sample_ids;
    std::vector<double> per_sample;  // percentages, in sample order
    double mean_overlap = 0.0;
    std::size_t sample_count = 0;

    bool operator==(const OverlapReport&) const = default;
};

struct OverlapOptions {
    std::vector<QueryMode> modes{QueryMode::question_only, QueryMode::options_aware};
    std::size_t token_budget = kDefaultTokenBudget;
    std::optional<std::size_t> k;
    // Applied to options_aware queries only; question_only and oracle
    // retrieval always use base embeddings.
    const LinearAdapter* adapter = nullptr;
};

/// Scores each mode's retrieved sentence set against base oracle-query
/// retrieval under the same budget. Samples whose oracle passage is empty
/// (empty document, or first-ranked sentence over budget) are skipped.
std::vector<OverlapReport> eval_overlap(const std::vector<McqaSample>& samples,
                                        const std::vector<ContextDocument>& documents,
                                        const EmbeddingStore& context_store, const QueryEmbedder& embed,
                                        const OverlapOptions& options);

std::string overlap_reports_json(const std::vector<OverlapReport>& reports);

/// Token-overlap baseline: option score = |tokens(question + option) & tokens(passage)|,
/// argmax with ties to the lowest index.
int lexical_answer(const std::string& question, const std::vector<std::string>& options, const std::string& passage);

using Answerer = std::function<int(const McqaSample&, const Passage&)>;

Answerer lexical_answerer();

/// Uniform choice among the options, drawn from a generator seeded by
/// (seed, sample_id) so answers do not depend on evaluation order.
Answerer random_answerer(std::uint64_t seed);

/// Answers read from a predictions file, keyed by sample id.
Answerer predictions_answerer(std::unordered_map<std::string, int> predictions);

struct AccuracyReport {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;
    std::string split;  // "train"/"dev"/"test", or "mixed"

    bool operator==(const AccuracyReport&) const = default;
};

/// `passages` is keyed by sample id; a sample without a passage is an error.
AccuracyReport eval_accuracy(const std::vector<McqaSample>& samples,
                             const std::unordered_map<std::string, Passage>& passages, const Answerer& answerer);

std::string accuracy_report_json(const AccuracyReport& report);

std::unordered_map<std::string, int> read_predictions_jsonl(const std::filesystem::path& path);
void write_predictions_jsonl(const std::vector<std::pair<std::string, int>>& predictions,
                             const std::filesystem::path& path);

struct LabeledVector {
    std::string id;
    std::string label;
    EmbeddingVector values;

    bool operator==(const LabeledVector&) const = default;
};

/// CSV with header "id,label,v0,...,v{dim-1}"; floats use the shortest
/// representation that parses back to the same bits.
void export_embeddings_table(const std::vector<LabeledVector>& vectors, const std::filesystem::path& path);
std::vector<LabeledVector> read_embeddings_table(const std::filesystem::path& path);

}  // namespace oadr
