#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "oadr/dataset.hpp"

namespace oadr {

inline constexpr std::string_view kDefaultSeparator = " ";

/// Contrastive training triple for one sample:
///   anchor   = question + correct option        (oracle query)
///   positive = question + every option          (options-aware query)
///   negative = question + every wrong option
struct Triplet {
    std::string sample_id;
    std::string anchor;
    std::string positive;
    std::string negative;

    bool operator==(const Triplet&) const = default;
};

// Query texts shared by the triplet builder and the retriever.
std::string oracle_query(const McqaSample& sample, std::string_view separator = kDefaultSeparator);
std::string options_aware_query(const McqaSample& sample, std::string_view separator = kDefaultSeparator);
std::string wrong_options_query(const McqaSample& sample, std::string_view separator = kDefaultSeparator);

Triplet build_triplet(const McqaSample& sample, std::string_view separator = kDefaultSeparator);

/// One triplet per sample, in input order. Failures name the offending sample.
std::vector<Triplet> build_triplet_dataset(const std::vector<McqaSample>& samples,
                                           std::string_view separator = kDefaultSeparator);

std::vector<Triplet> read_triplets_jsonl(const std::filesystem::path& path);
void write_triplets_jsonl(const std::vector<Triplet>& triplets, const std::filesystem::path& path);

// Embedding ids for the three texts of a triplet: "<sample_id>/anchor" etc.
std::string anchor_id(std::string_view sample_id);
std::string positive_id(std::string_view sample_id);
std::string negative_id(std::string_view sample_id);

}  // namespace oadr
