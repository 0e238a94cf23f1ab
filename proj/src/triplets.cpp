#include "oadr/triplets.hpp"

#include "jsonl.hpp"
#include "oadr/error.hpp"
#include "oadr/text.hpp"

namespace oadr {

using detail::json;

namespace {

void check_sample(const McqaSample& s) {
    if (s.options.size() < 2) {
        throw DataError("sample '" + s.sample_id + "': needs at least 2 options, has " +
                        std::to_string(s.options.size()));
    }
    if (s.answer_index < 0 || static_cast<std::size_t>(s.answer_index) >= s.options.size()) {
        throw DataError("sample '" + s.sample_id + "': answer_index " + std::to_string(s.answer_index) +
                        " out of range");
    }
    if (text::trim(s.question).empty()) throw DataError("sample '" + s.sample_id + "': empty question");
}

}  // namespace

std::string oracle_query(const McqaSample& sample, std::string_view separator) {
    check_sample(sample);
    std::string out = sample.question;
    out.append(separator);
    out.append(sample.options[sample.answer_index]);
    return out;
}

std::string options_aware_query(const McqaSample& sample, std::string_view separator) {
    std::string out = sample.question;
    for (const auto& o : sample.options) {
        out.append(separator);
        out.append(o);
    }
    return out;
}

std::string wrong_options_query(const McqaSample& sample, std::string_view separator) {
    check_sample(sample);
    std::string out = sample.question;
    for (std::size_t i = 0; i < sample.options.size(); ++i) {
        if (static_cast<int>(i) == sample.answer_index) continue;
        out.append(separator);
        out.append(sample.options[i]);
    }
    return out;
}

Triplet build_triplet(const McqaSample& sample, std::string_view separator) {
    check_sample(sample);
    return {sample.sample_id, oracle_query(sample, separator), options_aware_query(sample, separator),
            wrong_options_query(sample, separator)};
}

std::vector<Triplet> build_triplet_dataset(const std::vector<McqaSample>& samples, std::string_view separator) {
    std::vector<Triplet> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(build_triplet(s, separator));
    return out;
}

std::vector<Triplet> read_triplets_jsonl(const std::filesystem::path& path) {
    std::vector<Triplet> out;
    detail::for_each_jsonl(path, [&](const json& r, std::size_t) {
        out.push_back({r.at("sample_id").get<std::string>(), r.at("anchor").get<std::string>(),
                       r.at("positive").get<std::string>(), r.at("negative").get<std::string>()});
    });
    return out;
}

void write_triplets_jsonl(const std::vector<Triplet>& triplets, const std::filesystem::path& path) {
    detail::JsonlWriter out(path);
    for (const auto& t : triplets) {
        out.write(json{{"sample_id", t.sample_id}, {"anchor", t.anchor}, {"positive", t.positive},
                       {"negative", t.negative}});
    }
}

std::string anchor_id(std::string_view sample_id) { return std::string(sample_id) + "/anchor"; }
std::string positive_id(std::string_view sample_id) { return std::string(sample_id) + "/positive"; }
std::string negative_id(std::string_view sample_id) { return std::string(sample_id) + "/negative"; }

}  // namespace oadr
