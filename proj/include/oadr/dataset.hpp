#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace oadr {

enum class Split { train, dev, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct McqaSample {
    std::string sample_id;
    std::string document_id;
    std::string question;
    std::vector<std::string> options;
    int answer_index = 0;
    Split split = Split::train;

    bool operator==(const McqaSample&) const = default;
};

struct ContextDocument {
    std::string document_id;
    std::vector<std::string> sentences;  // original passage order

    bool operator==(const ContextDocument&) const = default;
};

struct Dataset {
    std::vector<McqaSample> samples;
    std::vector<ContextDocument> documents;
};

/// Splits after '.', '!' or '?' when followed by whitespace. Terminators stay
/// with their sentence, fragments are trimmed and empty ones dropped. No
/// abbreviation handling.
std::vector<std::string> segment_sentences(std::string_view passage);

/// How gold labels are written in a source format.
enum class LabelEncoding { one_based, zero_based, letter };

/// Field mapping from a raw line-delimited MCQA source into the normalized
/// schema. Two layouts are supported: `nested` records carry a list of
/// question objects (QuALITY style), `parallel` records carry aligned
/// question/option/answer arrays (RACE style).
struct SourceMapping {
    enum class Layout { nested, parallel };

    std::string name;
    Layout layout = Layout::nested;
    std::string article_id_field;
    std::string article_field;
    std::string questions_field;
    // nested layout: keys inside each question object
    std::string question_text_field;
    std::string question_id_field;  // optional; empty or missing -> "<article>-<n>"
    std::string options_field;
    std::string gold_field;
    // parallel layout: options_field and gold_field name top-level arrays
    LabelEncoding labels = LabelEncoding::one_based;
    Split split = Split::train;

    static SourceMapping quality();
    static SourceMapping race();
    /// Reads a descriptor JSON object with the field names above.
    static SourceMapping from_json_file(const std::filesystem::path& path);
};

Dataset import_dataset(const std::filesystem::path& raw_path, const SourceMapping& mapping);

struct ValidationIssue {
    enum class Kind {
        duplicate_sample,
        duplicate_document,
        empty_text,
        too_few_options,
        answer_out_of_range,
        empty_sentence,
        dangling_reference,
    };
    Kind kind;
    std::string subject;  // sample_id or document_id
    std::string message;
};

std::string_view to_string(ValidationIssue::Kind kind);

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

ValidationReport validate_dataset(const std::vector<McqaSample>& samples,
                                  const std::vector<ContextDocument>& documents);

// Normalized JSONL files.
std::vector<McqaSample> read_samples_jsonl(const std::filesystem::path& path);
void write_samples_jsonl(const std::vector<McqaSample>& samples, const std::filesystem::path& path);
std::vector<ContextDocument> read_documents_jsonl(const std::filesystem::path& path);
void write_documents_jsonl(const std::vector<ContextDocument>& documents,
                           const std::filesystem::path& path);

}  // namespace oadr
