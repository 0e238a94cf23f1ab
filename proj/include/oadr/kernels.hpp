#pragma once

#include <span>
#include <vector>

#include "oadr/adapter.hpp"

// Data-parallel kernels. Each has a serial twin in `reference` that the tests
// compare against bit-for-bit and the benchmarks time against.
namespace oadr::kernels {

/// out[i] = |query - rows[i]|_2 for a row-major (rows.size() / query.size()) x dim matrix.
void l2_distances(std::span<const float> query, std::span<const float> rows, std::span<double> out);

struct TripletView {
    std::span<const float> anchor;
    std::span<const float> positive;
    std::span<const float> negative;
};

struct BatchGradient {
    double loss_sum = 0.0;
    std::vector<double> d_weights;
    std::vector<double> d_bias;
};

/// Sum of per-triplet losses and gradients. Per-item gradients are computed
/// in parallel and reduced in item order, so the result does not depend on
/// the thread count.
BatchGradient batch_gradient(std::span<const TripletView> batch, const LinearAdapter& adapter, double margin,
                             double epsilon);

int max_threads();

namespace reference {

void l2_distances(std::span<const float> query, std::span<const float> rows, std::span<double> out);

BatchGradient batch_gradient(std::span<const TripletView> batch, const LinearAdapter& adapter, double margin,
                             double epsilon);

}  // namespace reference

}  // namespace oadr::kernels
