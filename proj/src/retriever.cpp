#include "oadr/retriever.hpp"

#include <algorithm>
#include <exception>
#include <unordered_map>

#include "jsonl.hpp"
#include "oadr/error.hpp"
#include "oadr/kernels.hpp"
#include "oadr/text.hpp"
#include "oadr/triplets.hpp"

namespace oadr {

using detail::json;

std::string_view to_string(QueryMode mode) {
    switch (mode) {
        case QueryMode::question_only: return "question_only";
        case QueryMode::oracle: return "oracle";
        case QueryMode::options_aware: return "options_aware";
    }
    return "options_aware";
}

QueryMode parse_query_mode(std::string_view name) {
    if (name == "question_only") return QueryMode::question_only;
    if (name == "oracle") return QueryMode::oracle;
    if (name == "options_aware") return QueryMode::options_aware;
    throw DataError("unknown query mode '" + std::string(name) + "'");
}

std::vector<RetrievalHit> top_k(std::span<const float> query, std::span<const float> sentences, std::size_t k) {
    if (k == 0) throw DataError("k must be positive");
    if (query.empty()) throw DataError("empty query vector");
    if (sentences.empty()) throw DataError("no sentences to rank");
    if (sentences.size() % query.size() != 0) {
        throw DimensionMismatch(query.size(), sentences.size() % query.size());
    }
    std::vector<double> dist(sentences.size() / query.size());
    kernels::l2_distances(query, sentences, dist);

    std::vector<RetrievalHit> hits(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) hits[i] = {i, dist[i]};
    const auto by_rank = [](const RetrievalHit& a, const RetrievalHit& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.sentence_index < b.sentence_index);
    };
    k = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), by_rank);
    hits.resize(k);
    return hits;
}

std::vector<RetrievalHit> top_k(std::span<const float> query, const std::vector<EmbeddingVector>& sentences,
                                std::size_t k) {
    std::vector<float> flat;
    flat.reserve(sentences.size() * query.size());
    for (const auto& s : sentences) {
        if (s.size() != query.size()) throw DimensionMismatch(query.size(), s.size());
        flat.insert(flat.end(), s.begin(), s.end());
    }
    return top_k(query, std::span<const float>(flat), k);
}

Passage assemble_passage(std::span<const RetrievalHit> ranked, const std::vector<std::string>& sentences,
                         std::size_t token_budget) {
    Passage p;
    for (const auto& hit : ranked) {
        if (hit.sentence_index >= sentences.size()) {
            throw DataError("hit index " + std::to_string(hit.sentence_index) + " outside document of " +
                            std::to_string(sentences.size()) + " sentences");
        }
    }
    for (const auto& hit : ranked) {
        const std::size_t tokens = text::count_tokens(sentences[hit.sentence_index]);
        if (p.token_count + tokens > token_budget) break;
        p.token_count += tokens;
        p.sentence_indices.push_back(hit.sentence_index);
    }
    std::sort(p.sentence_indices.begin(), p.sentence_indices.end());
    p.sentence_indices.erase(std::unique(p.sentence_indices.begin(), p.sentence_indices.end()),
                             p.sentence_indices.end());
    for (std::size_t i = 0; i < p.sentence_indices.size(); ++i) {
        if (i > 0) p.text.push_back(' ');
        p.text.append(sentences[p.sentence_indices[i]]);
    }
    return p;
}

std::string query_text(const McqaSample& sample, QueryMode mode) {
    switch (mode) {
        case QueryMode::question_only: return sample.question;
        case QueryMode::oracle: return oracle_query(sample);
        case QueryMode::options_aware: return options_aware_query(sample);
    }
    return sample.question;
}

std::string sentence_id(std::string_view document_id, std::size_t index) {
    return std::string(document_id) + "#" + std::to_string(index);
}

QueryEmbedder mock_query_embedder(std::uint32_t dim) {
    return [dim](const McqaSample&, std::string_view text, QueryMode) { return mock_embed(text, dim); };
}

QueryEmbedder store_query_embedder(const EmbeddingStore& store) {
    return [&store](const McqaSample& sample, std::string_view, QueryMode mode) {
        auto v = store.at(sample.sample_id + "/" + std::string(to_string(mode)));
        return EmbeddingVector(v.begin(), v.end());
    };
}

std::vector<float> gather_sentence_matrix(const ContextDocument& document, const EmbeddingStore& context_store) {
    std::vector<float> matrix;
    matrix.reserve(document.sentences.size() * context_store.dim());
    for (std::size_t i = 0; i < document.sentences.size(); ++i) {
        auto v = context_store.find(sentence_id(document.document_id, i));
        if (!v) {
            throw DataError("missing vector for sentence (" + document.document_id + ", " + std::to_string(i) + ")");
        }
        matrix.insert(matrix.end(), v->begin(), v->end());
    }
    return matrix;
}

Passage retrieve_for_sample(const McqaSample& sample, const ContextDocument& document,
                            const EmbeddingStore& context_store, const QueryEmbedder& embed,
                            const RetrievalOptions& options) {
    if (options.token_budget == 0) throw DataError("token budget must be positive");
    if (document.sentences.empty()) return {};
    const auto matrix = gather_sentence_matrix(document, context_store);

    EmbeddingVector query = embed(sample, query_text(sample, options.mode), options.mode);
    if (query.size() != context_store.dim()) throw DimensionMismatch(context_store.dim(), query.size());
    if (options.adapter) query = apply_adapter(*options.adapter, query);

    const std::size_t k = options.k.value_or(document.sentences.size());
    auto hits = top_k(query, std::span<const float>(matrix), k);
    return assemble_passage(hits, document.sentences, options.token_budget);
}

std::vector<Passage> retrieve_batch(const std::vector<McqaSample>& samples,
                                    const std::vector<ContextDocument>& documents,
                                    const EmbeddingStore& context_store, const QueryEmbedder& embed,
                                    const RetrievalOptions& options) {
    std::unordered_map<std::string, const ContextDocument*> by_id;
    for (const auto& d : documents) by_id.emplace(d.document_id, &d);
    for (const auto& s : samples) {
        if (!by_id.contains(s.document_id)) {
            throw DataError("sample '" + s.sample_id + "' references missing document '" + s.document_id + "'");
        }
    }

    std::vector<Passage> out(samples.size());
    std::vector<std::exception_ptr> errors(samples.size());
    const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = retrieve_for_sample(samples[k], *by_id.at(samples[k].document_id), context_store, embed, options);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    // first error in sample order
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

void write_passages_jsonl(const std::vector<PassageRecord>& records, const std::filesystem::path& path) {
    detail::JsonlWriter out(path);
    for (const auto& r : records) {
        out.write(json{{"sample_id", r.sample_id},
                       {"passage", r.passage.text},
                       {"sentence_indices", r.passage.sentence_indices},
                       {"token_count", r.passage.token_count},
                       {"query_mode", std::string(to_string(r.mode))}});
    }
}

std::vector<PassageRecord> read_passages_jsonl(const std::filesystem::path& path) {
    std::vector<PassageRecord> out;
    detail::for_each_jsonl(path, [&](const json& r, std::size_t) {
        PassageRecord rec;
        rec.sample_id = r.at("sample_id").get<std::string>();
        rec.passage.text = r.at("passage").get<std::string>();
        rec.passage.sentence_indices = r.at("sentence_indices").get<std::vector<std::size_t>>();
        rec.passage.token_count = r.at("token_count").get<std::size_t>();
        rec.mode = parse_query_mode(r.value("query_mode", "options_aware"));
        out.push_back(std::move(rec));
    });
    return out;
}

}  // namespace oadr
