#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oadr/embedding_store.hpp"
#include "oadr/triplets.hpp"

namespace oadr {

/// Query-side linear map f(x) = W x + b over frozen base embeddings.
struct LinearAdapter {
    std::uint32_t dim = 0;
    std::vector<double> weights;  // dim x dim, row-major
    std::vector<double> bias;     // dim
    std::string base_model_tag;

    static LinearAdapter identity(std::uint32_t dim, std::string base_model_tag = "");

    double w(std::size_t row, std::size_t col) const { return weights[row * dim + col]; }

    /// Throws DataError on shape mismatch or non-finite entries.
    void validate() const;

    bool operator==(const LinearAdapter&) const = default;
};

EmbeddingVector apply_adapter(const LinearAdapter& adapter, std::span<const float> v);

/// f(v) in double precision, written to `out` (size dim).
void apply_adapter_into(const LinearAdapter& adapter, std::span<const float> v, std::span<double> out);

struct TrainConfig {
    double margin = 1.0;
    double learning_rate = 1e-4;
    std::size_t batch_size = 8;
    std::size_t epochs = 1;
    std::uint64_t seed = 42;
    double distance_epsilon = 1e-12;

    void validate() const;
};

/// max(0, |a - p| - |a - n| + margin)
double triplet_loss(std::span<const float> anchor, std::span<const float> positive,
                    std::span<const float> negative, double margin);

struct TripletGradient {
    double loss = 0.0;
    std::vector<double> d_weights;  // dim x dim, row-major
    std::vector<double> d_bias;
};

/// Loss and gradient w.r.t. (W, b) of
///   max(0, |a - f(p)| - |a - f(n)| + margin)
/// with `anchor` taken as a base-space target (not adapted). Distances below
/// `epsilon` are clamped in the gradient.
TripletGradient triplet_loss_grad(std::span<const float> anchor, std::span<const float> positive_raw,
                                  std::span<const float> negative_raw, const LinearAdapter& adapter, double margin,
                                  double epsilon = 1e-12);

/// Same as triplet_loss_grad but accumulates into caller buffers; returns the loss.
double accumulate_triplet_grad(std::span<const float> anchor, std::span<const float> positive_raw,
                               std::span<const float> negative_raw, const LinearAdapter& adapter, double margin,
                               double epsilon, std::span<double> d_weights, std::span<double> d_bias);

struct TripletIds {
    std::string anchor;
    std::string positive;
    std::string negative;
};

TripletIds triplet_ids(const Triplet& t);

struct TrainResult {
    LinearAdapter adapter;
    std::vector<double> epoch_mean_loss;  // one entry per epoch, pre-update losses
};

/// Mini-batch gradient descent from the identity adapter. Triplet order is
/// reshuffled every epoch from `config.seed`; bitwise deterministic for fixed
/// inputs.
TrainResult train_adapter(const std::vector<TripletIds>& triplets, const EmbeddingStore& base,
                          const TrainConfig& config, std::string base_model_tag = "");

void write_adapter_json(const LinearAdapter& adapter, const std::filesystem::path& path);
LinearAdapter read_adapter_json(const std::filesystem::path& path);

}  // namespace oadr
