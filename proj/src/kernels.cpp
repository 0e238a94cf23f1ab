#include "oadr/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "oadr/error.hpp"

namespace oadr::kernels {

namespace {

inline double row_distance(const float* q, const float* r, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double d = static_cast<double>(q[j]) - static_cast<double>(r[j]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

void check_shapes(std::span<const float> query, std::span<const float> rows, std::span<double> out) {
    if (query.empty()) throw DataError("empty query vector");
    if (rows.size() % query.size() != 0) throw DimensionMismatch(query.size(), rows.size() % query.size());
    if (out.size() != rows.size() / query.size()) throw DimensionMismatch(rows.size() / query.size(), out.size());
}

void check_batch(std::span<const TripletView> batch, const LinearAdapter& adapter) {
    for (const auto& t : batch) {
        if (t.anchor.size() != adapter.dim) throw DimensionMismatch(adapter.dim, t.anchor.size());
        if (t.positive.size() != adapter.dim) throw DimensionMismatch(adapter.dim, t.positive.size());
        if (t.negative.size() != adapter.dim) throw DimensionMismatch(adapter.dim, t.negative.size());
    }
}

BatchGradient zero_gradient(const LinearAdapter& adapter) {
    BatchGradient g;
    g.d_weights.assign(static_cast<std::size_t>(adapter.dim) * adapter.dim, 0.0);
    g.d_bias.assign(adapter.dim, 0.0);
    return g;
}

}  // namespace

void l2_distances(std::span<const float> query, std::span<const float> rows, std::span<double> out) {
    check_shapes(query, rows, out);
    const std::size_t dim = query.size();
    const auto n = static_cast<std::ptrdiff_t>(out.size());
    const float* q = query.data();
    const float* r = rows.data();
    double* o = out.data();
#pragma omp parallel for schedule(static) if (n * static_cast<std::ptrdiff_t>(dim) > 16384)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        o[i] = row_distance(q, r + static_cast<std::size_t>(i) * dim, dim);
    }
}

// Two passes. Residual directions u_p, u_n are computed per item in
// parallel; then rows of dW are split across threads and each entry sums the
// active items in batch order, matching the serial accumulation bit for bit.
BatchGradient batch_gradient(std::span<const TripletView> batch, const LinearAdapter& adapter, double margin,
                             double epsilon) {
    check_batch(batch, adapter);
    const std::size_t dim = adapter.dim;
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    const bool wide = dim >= 16;

    std::vector<double> losses(batch.size(), 0.0);
    std::vector<double> up(batch.size() * dim), un(batch.size() * dim);

#pragma omp parallel if (wide && n > 1)
    {
        std::vector<double> rp(dim), rn(dim);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const auto& t = batch[k];
            apply_adapter_into(adapter, t.positive, rp);
            apply_adapter_into(adapter, t.negative, rn);
            double sp = 0.0;
            double sn = 0.0;
            for (std::size_t r = 0; r < dim; ++r) {
                rp[r] = static_cast<double>(t.anchor[r]) - rp[r];
                rn[r] = static_cast<double>(t.anchor[r]) - rn[r];
                sp += rp[r] * rp[r];
                sn += rn[r] * rn[r];
            }
            const double dist_p = std::sqrt(sp);
            const double dist_n = std::sqrt(sn);
            const double loss = dist_p - dist_n + margin;
            if (loss <= 0.0) continue;
            losses[k] = loss;
            const double inv_p = 1.0 / std::max(dist_p, epsilon);
            const double inv_n = 1.0 / std::max(dist_n, epsilon);
            for (std::size_t r = 0; r < dim; ++r) {
                up[k * dim + r] = rp[r] * inv_p;
                un[k * dim + r] = rn[r] * inv_n;
            }
        }
    }

    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        if (losses[k] > 0.0) active.push_back(k);
    }

    BatchGradient g = zero_gradient(adapter);
    for (double l : losses) g.loss_sum += l;
    const auto rows = static_cast<std::ptrdiff_t>(dim);
#pragma omp parallel for schedule(static) if (wide && !active.empty())
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const auto i = static_cast<std::size_t>(r);
        double* row = g.d_weights.data() + i * dim;
        for (std::size_t k : active) {
            const double u_p = up[k * dim + i];
            const double u_n = un[k * dim + i];
            const float* p = batch[k].positive.data();
            const float* q = batch[k].negative.data();
            for (std::size_t j = 0; j < dim; ++j) {
                row[j] += -u_p * static_cast<double>(p[j]) + u_n * static_cast<double>(q[j]);
            }
            g.d_bias[i] += -u_p + u_n;
        }
    }
    return g;
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace reference {

void l2_distances(std::span<const float> query, std::span<const float> rows, std::span<double> out) {
    check_shapes(query, rows, out);
    const std::size_t dim = query.size();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = row_distance(query.data(), rows.data() + i * dim, dim);
}

BatchGradient batch_gradient(std::span<const TripletView> batch, const LinearAdapter& adapter, double margin,
                             double epsilon) {
    check_batch(batch, adapter);
    BatchGradient g = zero_gradient(adapter);
    std::vector<double> dw(g.d_weights.size());
    std::vector<double> db(g.d_bias.size());
    for (const auto& t : batch) {
        std::fill(dw.begin(), dw.end(), 0.0);
        std::fill(db.begin(), db.end(), 0.0);
        g.loss_sum += accumulate_triplet_grad(t.anchor, t.positive, t.negative, adapter, margin, epsilon, dw, db);
        for (std::size_t j = 0; j < dw.size(); ++j) g.d_weights[j] += dw[j];
        for (std::size_t j = 0; j < db.size(); ++j) g.d_bias[j] += db[j];
    }
    return g;
}

}  // namespace reference

}  // namespace oadr::kernels
