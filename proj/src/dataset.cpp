#include "oadr/dataset.hpp"

#include <unordered_map>
#include <unordered_set>

#include "jsonl.hpp"
#include "oadr/error.hpp"
#include "oadr/text.hpp"

namespace oadr {

using detail::json;

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "train";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "dev") return Split::dev;
    if (name == "test") return Split::test;
    throw DataError("unknown split '" + std::string(name) + "'");
}

std::vector<std::string> segment_sentences(std::string_view passage) {
    std::vector<std::string> sentences;
    auto emit = [&](std::string_view fragment) {
        auto trimmed = text::trim(fragment);
        if (!trimmed.empty()) sentences.emplace_back(trimmed);
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i + 1 < passage.size(); ++i) {
        char c = passage[i];
        if ((c == '.' || c == '!' || c == '?') && text::is_space(passage[i + 1])) {
            emit(passage.substr(start, i + 1 - start));
            start = i + 1;
        }
    }
    if (start < passage.size()) emit(passage.substr(start));
    return sentences;
}

// ---------------------------------------------------------------------------
// Source mappings

SourceMapping SourceMapping::quality() {
    SourceMapping m;
    m.name = "quality";
    m.layout = Layout::nested;
    m.article_id_field = "article_id";
    m.article_field = "article";
    m.questions_field = "questions";
    m.question_text_field = "question";
    m.question_id_field = "question_unique_id";
    m.options_field = "options";
    m.gold_field = "gold_label";
    m.labels = LabelEncoding::one_based;
    return m;
}

SourceMapping SourceMapping::race() {
    SourceMapping m;
    m.name = "race";
    m.layout = Layout::parallel;
    m.article_id_field = "id";
    m.article_field = "article";
    m.questions_field = "questions";
    m.options_field = "options";
    m.gold_field = "answers";
    m.labels = LabelEncoding::letter;
    return m;
}

namespace {

LabelEncoding parse_label_encoding(std::string_view name) {
    if (name == "one_based") return LabelEncoding::one_based;
    if (name == "zero_based") return LabelEncoding::zero_based;
    if (name == "letter") return LabelEncoding::letter;
    throw DataError("unknown label encoding '" + std::string(name) + "'");
}

}  // namespace

SourceMapping SourceMapping::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed mapping descriptor: " + e.what());
    }
    SourceMapping m;
    try {
        m.name = j.value("name", path.stem().string());
        std::string layout = j.value("layout", "nested");
        if (layout == "nested") {
            m.layout = Layout::nested;
        } else if (layout == "parallel") {
            m.layout = Layout::parallel;
        } else {
            throw DataError("unknown layout '" + layout + "'");
        }
        m.article_id_field = j.at("article_id_field").get<std::string>();
        m.article_field = j.at("article_field").get<std::string>();
        m.questions_field = j.at("questions_field").get<std::string>();
        m.question_text_field = j.value("question_text_field", "");
        m.question_id_field = j.value("question_id_field", "");
        m.options_field = j.at("options_field").get<std::string>();
        m.gold_field = j.at("gold_field").get<std::string>();
        m.labels = parse_label_encoding(j.value("labels", "one_based"));
        m.split = parse_split(j.value("split", "train"));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed mapping descriptor: " + e.what());
    }
    if (m.layout == Layout::nested && m.question_text_field.empty()) {
        throw DataError(path.string() + ": nested layout requires question_text_field");
    }
    return m;
}

// ---------------------------------------------------------------------------
// Import

namespace {

std::string scalar_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw DataError("expected string or integer id, got " + std::string(v.type_name()));
}

// Returns -1 when the label cannot be decoded.
long long decode_label(const json& v, LabelEncoding encoding) {
    if (encoding == LabelEncoding::letter) {
        if (!v.is_string()) return -1;
        auto s = v.get<std::string>();
        if (s.size() != 1) return -1;
        char c = s[0];
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a';
        return -1;
    }
    long long raw = 0;
    if (v.is_number_integer()) {
        raw = v.get<long long>();
    } else if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9) return -1;
        raw = std::stoll(s);
    } else {
        return -1;
    }
    return encoding == LabelEncoding::one_based ? raw - 1 : raw;
}

struct ImportState {
    const SourceMapping& mapping;
    Dataset dataset;
    std::unordered_map<std::string, std::size_t> document_index;
    std::unordered_map<std::string, std::string> article_text;
    std::unordered_set<std::string> sample_ids;

    void add_document(const std::string& id, const std::string& article) {
        auto [it, inserted] = article_text.emplace(id, article);
        if (!inserted) {
            if (it->second != article) throw DataError("article '" + id + "' appears with differing text");
            return;
        }
        document_index.emplace(id, dataset.documents.size());
        dataset.documents.push_back({id, segment_sentences(article)});
    }

    void add_sample(std::string sample_id, const std::string& document_id, const json& question,
                    const json& options, const json* gold) {
        if (!sample_ids.insert(sample_id).second) throw DataError("duplicate sample id '" + sample_id + "'");
        McqaSample s;
        s.sample_id = std::move(sample_id);
        s.document_id = document_id;
        s.question = std::string(text::trim(question.get<std::string>()));
        if (s.question.empty()) throw DataError("sample '" + s.sample_id + "': empty question");
        if (!options.is_array()) throw DataError("sample '" + s.sample_id + "': options must be an array");
        for (const auto& o : options) {
            std::string opt(text::trim(o.get<std::string>()));
            if (opt.empty()) throw DataError("sample '" + s.sample_id + "': empty option");
            s.options.push_back(std::move(opt));
        }
        if (s.options.size() < 2) throw DataError("sample '" + s.sample_id + "': fewer than 2 options");
        long long idx = gold ? decode_label(*gold, mapping.labels) : -1;
        if (idx < 0 || idx >= static_cast<long long>(s.options.size())) {
            throw DataError("sample '" + s.sample_id + "': unknown gold label " + (gold ? gold->dump() : "<missing>"));
        }
        s.answer_index = static_cast<int>(idx);
        s.split = mapping.split;
        dataset.samples.push_back(std::move(s));
    }
};

}  // namespace

Dataset import_dataset(const std::filesystem::path& raw_path, const SourceMapping& mapping) {
    ImportState state{mapping, {}, {}, {}, {}};
    detail::for_each_jsonl(raw_path, [&](const json& record, std::size_t) {
        if (!record.is_object()) throw DataError("record is not a JSON object");
        std::string article_id = scalar_to_string(record.at(mapping.article_id_field));
        const auto& article = record.at(mapping.article_field).get_ref<const std::string&>();
        const auto& questions = record.at(mapping.questions_field);
        if (!questions.is_array()) throw DataError("'" + mapping.questions_field + "' must be an array");
        state.add_document(article_id, article);

        if (mapping.layout == SourceMapping::Layout::nested) {
            std::size_t n = 0;
            for (const auto& q : questions) {
                ++n;
                std::string sample_id = article_id + "-" + std::to_string(n);
                if (!mapping.question_id_field.empty() && q.contains(mapping.question_id_field)) {
                    sample_id = scalar_to_string(q.at(mapping.question_id_field));
                }
                const json* gold = q.contains(mapping.gold_field) ? &q.at(mapping.gold_field) : nullptr;
                state.add_sample(sample_id, article_id, q.at(mapping.question_text_field), q.at(mapping.options_field), gold);
            }
        } else {
            const auto& options = record.at(mapping.options_field);
            const json* golds = record.contains(mapping.gold_field) ? &record.at(mapping.gold_field) : nullptr;
            if (!options.is_array() || options.size() != questions.size()) {
                throw DataError("'" + mapping.options_field + "' must align with '" + mapping.questions_field + "'");
            }
            for (std::size_t i = 0; i < questions.size(); ++i) {
                const json* gold = (golds && golds->is_array() && i < golds->size()) ? &(*golds)[i] : nullptr;
                state.add_sample(article_id + "-" + std::to_string(i + 1), article_id, questions[i], options[i], gold);
            }
        }
    });
    return std::move(state.dataset);
}

// ---------------------------------------------------------------------------
// Validation

std::string_view to_string(ValidationIssue::Kind kind) {
    using K = ValidationIssue::Kind;
    switch (kind) {
        case K::duplicate_sample: return "duplicate_sample";
        case K::duplicate_document: return "duplicate_document";
        case K::empty_text: return "empty_text";
        case K::too_few_options: return "too_few_options";
        case K::answer_out_of_range: return "answer_out_of_range";
        case K::empty_sentence: return "empty_sentence";
        case K::dangling_reference: return "dangling_reference";
    }
    return "unknown";
}

ValidationReport validate_dataset(const std::vector<McqaSample>& samples,
                                  const std::vector<ContextDocument>& documents) {
    using K = ValidationIssue::Kind;
    ValidationReport report;
    auto add = [&](K kind, const std::string& subject, std::string message) {
        report.issues.push_back({kind, subject, std::move(message)});
    };

    std::unordered_set<std::string> document_ids;
    for (const auto& d : documents) {
        if (!document_ids.insert(d.document_id).second) {
            add(K::duplicate_document, d.document_id, "document id appears more than once");
        }
        for (std::size_t i = 0; i < d.sentences.size(); ++i) {
            if (text::trim(d.sentences[i]).empty()) {
                add(K::empty_sentence, d.document_id, "sentence " + std::to_string(i) + " is empty");
            }
        }
    }

    std::unordered_set<std::string> sample_ids;
    for (const auto& s : samples) {
        if (!sample_ids.insert(s.sample_id).second) {
            add(K::duplicate_sample, s.sample_id, "sample id appears more than once");
        }
        if (text::trim(s.question).empty()) add(K::empty_text, s.sample_id, "question is empty");
        for (std::size_t i = 0; i < s.options.size(); ++i) {
            if (text::trim(s.options[i]).empty()) {
                add(K::empty_text, s.sample_id, "option " + std::to_string(i) + " is empty");
            }
        }
        if (s.options.size() < 2) {
            add(K::too_few_options, s.sample_id, std::to_string(s.options.size()) + " options, need at least 2");
        }
        if (s.answer_index < 0 || static_cast<std::size_t>(s.answer_index) >= s.options.size()) {
            add(K::answer_out_of_range, s.sample_id,
                "answer_index " + std::to_string(s.answer_index) + " outside [0, " +
                    std::to_string(s.options.size()) + ")");
        }
        if (!document_ids.contains(s.document_id)) {
            add(K::dangling_reference, s.sample_id, "document '" + s.document_id + "' not found");
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Normalized JSONL

std::vector<McqaSample> read_samples_jsonl(const std::filesystem::path& path) {
    std::vector<McqaSample> samples;
    detail::for_each_jsonl(path, [&](const json& r, std::size_t) {
        McqaSample s;
        s.sample_id = r.at("sample_id").get<std::string>();
        s.document_id = r.at("document_id").get<std::string>();
        s.question = r.at("question").get<std::string>();
        s.options = r.at("options").get<std::vector<std::string>>();
        s.answer_index = r.at("answer_index").get<int>();
        s.split = parse_split(r.at("split").get<std::string>());
        samples.push_back(std::move(s));
    });
    return samples;
}

void write_samples_jsonl(const std::vector<McqaSample>& samples, const std::filesystem::path& path) {
    detail::JsonlWriter out(path);
    for (const auto& s : samples) {
        json r;
        r["sample_id"] = s.sample_id;
        r["document_id"] = s.document_id;
        r["question"] = s.question;
        r["options"] = s.options;
        r["answer_index"] = s.answer_index;
        r["split"] = std::string(to_string(s.split));
        out.write(r);
    }
}

std::vector<ContextDocument> read_documents_jsonl(const std::filesystem::path& path) {
    std::vector<ContextDocument> documents;
    detail::for_each_jsonl(path, [&](const json& r, std::size_t) {
        documents.push_back({r.at("document_id").get<std::string>(),
                             r.at("sentences").get<std::vector<std::string>>()});
    });
    return documents;
}

void write_documents_jsonl(const std::vector<ContextDocument>& documents,
                           const std::filesystem::path& path) {
    detail::JsonlWriter out(path);
    for (const auto& d : documents) {
        out.write(json{{"document_id", d.document_id}, {"sentences", d.sentences}});
    }
}

}  // namespace oadr
