#include "oadr/adapter.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "jsonl.hpp"
#include "oadr/error.hpp"
#include "oadr/kernels.hpp"
#include "random.hpp"

namespace oadr {

using detail::json;

LinearAdapter LinearAdapter::identity(std::uint32_t dim, std::string base_model_tag) {
    if (dim == 0) throw DataError("adapter dimension must be positive");
    LinearAdapter a;
    a.dim = dim;
    a.weights.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) a.weights[i * dim + i] = 1.0;
    a.bias.assign(dim, 0.0);
    a.base_model_tag = std::move(base_model_tag);
    return a;
}

void LinearAdapter::validate() const {
    if (dim == 0) throw DataError("adapter dimension must be positive");
    if (weights.size() != static_cast<std::size_t>(dim) * dim) {
        throw DataError("adapter weights hold " + std::to_string(weights.size()) + " entries, expected " +
                        std::to_string(static_cast<std::size_t>(dim) * dim));
    }
    if (bias.size() != dim) throw DimensionMismatch(dim, bias.size());
    for (double v : weights) {
        if (!std::isfinite(v)) throw DataError("non-finite adapter weight");
    }
    for (double v : bias) {
        if (!std::isfinite(v)) throw DataError("non-finite adapter bias");
    }
}

void apply_adapter_into(const LinearAdapter& adapter, std::span<const float> v, std::span<double> out) {
    if (v.size() != adapter.dim) throw DimensionMismatch(adapter.dim, v.size());
    if (out.size() != adapter.dim) throw DimensionMismatch(adapter.dim, out.size());
    const std::size_t dim = adapter.dim;
    for (std::size_t i = 0; i < dim; ++i) {
        const double* row = adapter.weights.data() + i * dim;
        double acc = adapter.bias[i];
        for (std::size_t j = 0; j < dim; ++j) acc += row[j] * static_cast<double>(v[j]);
        out[i] = acc;
    }
}

EmbeddingVector apply_adapter(const LinearAdapter& adapter, std::span<const float> v) {
    std::vector<double> tmp(adapter.dim);
    apply_adapter_into(adapter, v, tmp);
    return EmbeddingVector(tmp.begin(), tmp.end());
}

void TrainConfig::validate() const {
    if (!(margin >= 0.0) || !std::isfinite(margin)) throw DataError("margin must be a non-negative number");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw DataError("learning rate must be a non-negative number");
    }
    if (batch_size == 0) throw DataError("batch size must be positive");
    if (!(distance_epsilon > 0.0)) throw DataError("distance epsilon must be positive");
}

// ---------------------------------------------------------------------------
// Loss and gradient

namespace {

double distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

double triplet_loss(std::span<const float> anchor, std::span<const float> positive, std::span<const float> negative,
                    double margin) {
    if (positive.size() != anchor.size()) throw DimensionMismatch(anchor.size(), positive.size());
    if (negative.size() != anchor.size()) throw DimensionMismatch(anchor.size(), negative.size());
    return std::max(0.0, distance(anchor, positive) - distance(anchor, negative) + margin);
}

double accumulate_triplet_grad(std::span<const float> anchor, std::span<const float> positive_raw,
                               std::span<const float> negative_raw, const LinearAdapter& adapter, double margin,
                               double epsilon, std::span<double> d_weights, std::span<double> d_bias) {
    const std::size_t dim = adapter.dim;
    if (anchor.size() != dim) throw DimensionMismatch(dim, anchor.size());
    if (positive_raw.size() != dim) throw DimensionMismatch(dim, positive_raw.size());
    if (negative_raw.size() != dim) throw DimensionMismatch(dim, negative_raw.size());
    if (d_weights.size() != dim * dim) throw DimensionMismatch(dim * dim, d_weights.size());
    if (d_bias.size() != dim) throw DimensionMismatch(dim, d_bias.size());

    std::vector<double> rp(dim);  // a - f(p)
    std::vector<double> rn(dim);  // a - f(n)
    apply_adapter_into(adapter, positive_raw, rp);
    apply_adapter_into(adapter, negative_raw, rn);
    double sp = 0.0;
    double sn = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        rp[i] = static_cast<double>(anchor[i]) - rp[i];
        rn[i] = static_cast<double>(anchor[i]) - rn[i];
        sp += rp[i] * rp[i];
        sn += rn[i] * rn[i];
    }
    const double dist_p = std::sqrt(sp);
    const double dist_n = std::sqrt(sn);
    const double loss = dist_p - dist_n + margin;
    if (loss <= 0.0) return 0.0;

    const double inv_p = 1.0 / std::max(dist_p, epsilon);
    const double inv_n = 1.0 / std::max(dist_n, epsilon);
    for (std::size_t i = 0; i < dim; ++i) {
        const double up = rp[i] * inv_p;
        const double un = rn[i] * inv_n;
        double* row = d_weights.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] += -up * static_cast<double>(positive_raw[j]) + un * static_cast<double>(negative_raw[j]);
        }
        d_bias[i] += -up + un;
    }
    return loss;
}

TripletGradient triplet_loss_grad(std::span<const float> anchor, std::span<const float> positive_raw,
                                  std::span<const float> negative_raw, const LinearAdapter& adapter, double margin,
                                  double epsilon) {
    TripletGradient g;
    g.d_weights.assign(static_cast<std::size_t>(adapter.dim) * adapter.dim, 0.0);
    g.d_bias.assign(adapter.dim, 0.0);
    g.loss = accumulate_triplet_grad(anchor, positive_raw, negative_raw, adapter, margin, epsilon, g.d_weights,
                                     g.d_bias);
    return g;
}

// ---------------------------------------------------------------------------
// Training

TripletIds triplet_ids(const Triplet& t) {
    return {anchor_id(t.sample_id), positive_id(t.sample_id), negative_id(t.sample_id)};
}

namespace {

void shuffle(std::vector<std::size_t>& order, std::mt19937_64& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[detail::bounded(rng, i)]);
    }
}

}  // namespace

TrainResult train_adapter(const std::vector<TripletIds>& triplets, const EmbeddingStore& base,
                          const TrainConfig& config, std::string base_model_tag) {
    config.validate();
    if (triplets.empty()) throw DataError("no triplets to train on");

    std::vector<kernels::TripletView> views;
    views.reserve(triplets.size());
    for (const auto& t : triplets) {
        auto lookup = [&](const std::string& id) {
            auto v = base.find(id);
            if (!v) throw DataError("embedding id '" + id + "' not found in base store");
            return *v;
        };
        views.push_back({lookup(t.anchor), lookup(t.positive), lookup(t.negative)});
    }

    TrainResult result{LinearAdapter::identity(base.dim(), std::move(base_model_tag)), {}};
    auto& adapter = result.adapter;
    std::vector<std::size_t> order(views.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);
    std::vector<kernels::TripletView> batch;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t k = start; k < end; ++k) batch.push_back(views[order[k]]);
            auto g = kernels::batch_gradient(batch, adapter, config.margin, config.distance_epsilon);
            loss_sum += g.loss_sum;
            const double step = config.learning_rate / static_cast<double>(batch.size());
            for (std::size_t j = 0; j < adapter.weights.size(); ++j) adapter.weights[j] -= step * g.d_weights[j];
            for (std::size_t j = 0; j < adapter.bias.size(); ++j) adapter.bias[j] -= step * g.d_bias[j];
        }
        result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return result;
}

// ---------------------------------------------------------------------------
// JSON

void write_adapter_json(const LinearAdapter& adapter, const std::filesystem::path& path) {
    adapter.validate();
    json rows = json::array();
    for (std::size_t i = 0; i < adapter.dim; ++i) {
        rows.push_back(std::vector<double>(adapter.weights.begin() + static_cast<std::ptrdiff_t>(i * adapter.dim),
                                           adapter.weights.begin() + static_cast<std::ptrdiff_t>((i + 1) * adapter.dim)));
    }
    json j{{"dim", adapter.dim}, {"weights", rows}, {"bias", adapter.bias}, {"base_model_tag", adapter.base_model_tag}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump() << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

LinearAdapter read_adapter_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    LinearAdapter a;
    try {
        auto j = json::parse(in);
        a.dim = j.at("dim").get<std::uint32_t>();
        const auto& rows = j.at("weights");
        if (!rows.is_array() || rows.size() != a.dim) {
            throw DataError(path.string() + ": weights must have " + std::to_string(a.dim) + " rows");
        }
        for (const auto& row : rows) {
            auto r = row.get<std::vector<double>>();
            if (r.size() != a.dim) throw DataError(path.string() + ": weight row has wrong length");
            a.weights.insert(a.weights.end(), r.begin(), r.end());
        }
        a.bias = j.at("bias").get<std::vector<double>>();
        a.base_model_tag = j.value("base_model_tag", "");
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed adapter file: " + e.what());
    }
    a.validate();
    return a;
}

}  // namespace oadr
