#include "oadr/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <unordered_set>

#include "jsonl.hpp"
#include "oadr/error.hpp"
#include "oadr/text.hpp"
#include "random.hpp"

namespace oadr {

using detail::json;

double overlap_percent(const std::set<std::size_t>& retrieved, const std::set<std::size_t>& oracle_retrieved) {
    if (oracle_retrieved.empty()) throw DataError("oracle retrieval set is empty");
    std::size_t shared = 0;
    for (auto i : retrieved) shared += oracle_retrieved.count(i);
    return 100.0 * static_cast<double>(shared) / static_cast<double>(oracle_retrieved.size());
}

std::vector<OverlapReport> eval_overlap(const std::vector<McqaSample>& samples,
                                        const std::vector<ContextDocument>& documents,
                                        const EmbeddingStore& context_store, const QueryEmbedder& embed,
                                        const OverlapOptions& options) {
    RetrievalOptions base;
    base.token_budget = options.token_budget;
    base.k = options.k;
    base.mode = QueryMode::oracle;
    const auto oracle = retrieve_batch(samples, documents, context_store, embed, base);

    std::vector<OverlapReport> reports;
    for (auto mode : options.modes) {
        RetrievalOptions opts = base;
        opts.mode = mode;
        opts.adapter = mode == QueryMode::options_aware ? options.adapter : nullptr;
        const auto passages = mode == QueryMode::oracle ? oracle
                                                        : retrieve_batch(samples, documents, context_store, embed, opts);
        OverlapReport r;
        r.mode = mode;
        double sum = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (oracle[i].sentence_indices.empty()) continue;
            const std::set<std::size_t> got(passages[i].sentence_indices.begin(), passages[i].sentence_indices.end());
            const std::set<std::size_t> ref(oracle[i].sentence_indices.begin(), oracle[i].sentence_indices.end());
            const double pct = overlap_percent(got, ref);
            r.sample_ids.push_back(samples[i].sample_id);
            r.per_sample.push_back(pct);
            sum += pct;
        }
        r.sample_count = r.per_sample.size();
        r.mean_overlap = r.sample_count ? sum / static_cast<double>(r.sample_count) : 0.0;
        reports.push_back(std::move(r));
    }
    return reports;
}

std::string overlap_reports_json(const std::vector<OverlapReport>& reports) {
    json out = json::array();
    for (const auto& r : reports) {
        json per = json::array();
        for (std::size_t i = 0; i < r.per_sample.size(); ++i) {
            per.push_back(json{{"sample_id", r.sample_ids[i]}, {"overlap", r.per_sample[i]}});
        }
        out.push_back(json{{"query_mode", std::string(to_string(r.mode))},
                           {"mean_overlap", r.mean_overlap},
                           {"sample_count", r.sample_count},
                           {"per_sample", per}});
    }
    return out.dump(2);
}

// ---------------------------------------------------------------------------
// Answering

int lexical_answer(const std::string& question, const std::vector<std::string>& options, const std::string& passage) {
    const auto passage_tokens = text::word_tokens(passage);
    const std::unordered_set<std::string> in_passage(passage_tokens.begin(), passage_tokens.end());
    int best = 0;
    std::size_t best_score = 0;
    for (std::size_t i = 0; i < options.size(); ++i) {
        auto tokens = text::word_tokens(question + " " + options[i]);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        std::size_t score = 0;
        for (const auto& t : tokens) score += in_passage.count(t);
        if (i == 0 || score > best_score) {
            best = static_cast<int>(i);
            best_score = score;
        }
    }
    return best;
}

Answerer lexical_answerer() {
    return [](const McqaSample& s, const Passage& p) { return lexical_answer(s.question, s.options, p.text); };
}

Answerer random_answerer(std::uint64_t seed) {
    return [seed](const McqaSample& s, const Passage&) {
        if (s.options.empty()) throw DataError("sample '" + s.sample_id + "' has no options");
        const std::uint64_t h = fnv1a64(s.sample_id);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
        std::mt19937_64 rng(seq);
        return static_cast<int>(detail::bounded(rng, s.options.size()));
    };
}

Answerer predictions_answerer(std::unordered_map<std::string, int> predictions) {
    return [preds = std::move(predictions)](const McqaSample& s, const Passage&) {
        auto it = preds.find(s.sample_id);
        if (it == preds.end()) throw DataError("no prediction for sample '" + s.sample_id + "'");
        return it->second;
    };
}

AccuracyReport eval_accuracy(const std::vector<McqaSample>& samples,
                             const std::unordered_map<std::string, Passage>& passages, const Answerer& answerer) {
    AccuracyReport r;
    std::optional<Split> split;
    bool mixed = false;
    for (const auto& s : samples) {
        auto it = passages.find(s.sample_id);
        if (it == passages.end()) throw DataError("no passage for sample '" + s.sample_id + "'");
        if (answerer(s, it->second) == s.answer_index) ++r.correct;
        ++r.total;
        if (split && *split != s.split) mixed = true;
        split = s.split;
    }
    r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
    r.split = mixed ? "mixed" : split ? std::string(to_string(*split)) : "";
    return r;
}

std::string accuracy_report_json(const AccuracyReport& r) {
    return json{{"correct", r.correct}, {"total", r.total}, {"accuracy", r.accuracy}, {"split", r.split}}.dump(2);
}

std::unordered_map<std::string, int> read_predictions_jsonl(const std::filesystem::path& path) {
    std::unordered_map<std::string, int> out;
    detail::for_each_jsonl(path, [&](const json& r, std::size_t) {
        auto id = r.at("sample_id").get<std::string>();
        if (!out.emplace(id, r.at("predicted_index").get<int>()).second) {
            throw DataError("duplicate prediction for sample '" + id + "'");
        }
    });
    return out;
}

void write_predictions_jsonl(const std::vector<std::pair<std::string, int>>& predictions,
                             const std::filesystem::path& path) {
    detail::JsonlWriter out(path);
    for (const auto& [id, idx] : predictions) out.write(json{{"sample_id", id}, {"predicted_index", idx}});
}

// ---------------------------------------------------------------------------
// CSV export

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

void export_embeddings_table(const std::vector<LabeledVector>& vectors, const std::filesystem::path& path) {
    const std::size_t dim = vectors.empty() ? 0 : vectors.front().values.size();
    for (const auto& v : vectors) {
        if (v.values.size() != dim) throw DimensionMismatch(dim, v.values.size());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "id,label";
    for (std::size_t i = 0; i < dim; ++i) out << ",v" << i;
    out << '\n';
    char buf[64];
    for (const auto& v : vectors) {
        out << csv_field(v.id) << ',' << csv_field(v.label);
        for (float x : v.values) {
            auto res = std::to_chars(buf, buf + sizeof(buf), x);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<LabeledVector> read_embeddings_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
        throw DataError(path.string() + ": header must start with id,label");
    }
    const std::size_t dim = header.size() - 2;
    std::vector<LabeledVector> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != dim + 2) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim + 2) + " fields");
        }
        LabeledVector v{fields[0], fields[1], EmbeddingVector(dim)};
        for (std::size_t i = 0; i < dim; ++i) {
            const auto& f = fields[i + 2];
            auto res = std::from_chars(f.data(), f.data() + f.size(), v.values[i]);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad float '" + f + "'");
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace oadr
