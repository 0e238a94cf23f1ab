#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <random>

#include "gradient_oracle.hpp"
#include "oadr/adapter.hpp"
#include "oadr/error.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

using oadr::LinearAdapter;
using oadr::TrainConfig;
using V = std::vector<float>;

TEST(ApplyAdapter, Identity) {
    auto id = LinearAdapter::identity(3);
    V v{0.1f, -7.25f, 3e-30f};
    EXPECT_EQ(oadr::apply_adapter(id, v), v);
}

TEST(ApplyAdapter, ZeroMap) {
    LinearAdapter zero{2, std::vector<double>(4, 0.0), std::vector<double>(2, 0.0), ""};
    EXPECT_EQ(oadr::apply_adapter(zero, V{5, 6}), (V{0, 0}));
}

TEST(ApplyAdapter, ScaledPlusBias) {
    LinearAdapter a{2, {2, 0, 0, 2}, {1, 1}, ""};
    EXPECT_EQ(oadr::apply_adapter(a, V{1, 2}), (V{3, 5}));
    EXPECT_THROW(oadr::apply_adapter(a, V{1, 2, 3}), oadr::DimensionMismatch);
}

TEST(TripletLoss, Examples) {
    EXPECT_DOUBLE_EQ(oadr::triplet_loss(V{0, 0}, V{0, 0}, V{0, 0}, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(oadr::triplet_loss(V{0, 0}, V{3, 4}, V{6, 8}, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(oadr::triplet_loss(V{0, 0}, V{6, 8}, V{3, 4}, 1.0), 6.0);
    EXPECT_THROW(oadr::triplet_loss(V{0, 0}, V{6, 8, 1}, V{3, 4}, 1.0), oadr::DimensionMismatch);
}

TEST(TripletLoss, NonNegativeAndZeroWhenSeparated) {
    std::mt19937_64 rng(1);
    std::normal_distribution<float> g;
    for (int t = 0; t < 1000; ++t) {
        V a(5), p(5), n(5);
        for (int i = 0; i < 5; ++i) a[i] = g(rng), p[i] = g(rng), n[i] = g(rng);
        double margin = std::abs(g(rng));
        double dp = 0, dn = 0;
        for (int i = 0; i < 5; ++i) dp += double(a[i] - p[i]) * (a[i] - p[i]), dn += double(a[i] - n[i]) * (a[i] - n[i]);
        double loss = oadr::triplet_loss(a, p, n, margin);
        EXPECT_GE(loss, 0.0);
        if (std::sqrt(dp) + margin <= std::sqrt(dn)) EXPECT_EQ(loss, 0.0);
    }
}

TEST(TripletLossGrad, InactiveHingeGivesZero) {
    auto g = oadr::triplet_loss_grad(V{0, 0}, V{3, 4}, V{6, 8}, LinearAdapter::identity(2), 1.0);
    EXPECT_EQ(g.loss, 0.0);
    EXPECT_EQ(g.d_weights, std::vector<double>(4, 0.0));
    EXPECT_EQ(g.d_bias, std::vector<double>(2, 0.0));
}

// a=0, p=(6,8), n=(3,4): u_p = u_n = (-0.6,-0.8), so db cancels and
// dW = (0.6,0.8)(6,8)^T - (0.6,0.8)(3,4)^T.
TEST(TripletLossGrad, HandExample) {
    oadr::testing::GradientInstance inst{V{0, 0}, V{6, 8}, V{3, 4}, LinearAdapter::identity(2), 1.0};
    auto g = oadr::triplet_loss_grad(inst.anchor, inst.positive, inst.negative, inst.adapter, 1.0);
    EXPECT_DOUBLE_EQ(g.loss, 6.0);
    const std::vector<double> dw{1.8, 2.4, 2.4, 3.2};
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(g.d_weights[k], dw[k], 1e-12);
    EXPECT_NEAR(g.d_bias[0], 0.0, 1e-12);
    EXPECT_NEAR(g.d_bias[1], 0.0, 1e-12);
    EXPECT_LT(oadr::testing::check_gradient(inst).max_relative_error, 1e-4);
}

class GradientFiniteDifference : public ::testing::TestWithParam<std::uint32_t> {};

TEST_P(GradientFiniteDifference, HundredRandomInstances) {
    std::mt19937_64 rng(1000 + GetParam());
    int active = 0;
    for (int i = 0; i < 100; ++i) {
        auto inst = oadr::testing::random_gradient_instance(rng, GetParam());
        auto check = oadr::testing::check_gradient(inst);
        active += check.loss > 0;
        EXPECT_LT(check.max_relative_error, 1e-4) << "instance " << i;
    }
    EXPECT_GT(active, 25);
}

INSTANTIATE_TEST_SUITE_P(Dims, GradientFiniteDifference, ::testing::Values(2u, 8u, 32u));

// Swapping positive and negative flips the sign of each term, so while both
// orders keep the hinge active the two gradients are exact negatives.
TEST(TripletLossGrad, SwapSymmetry) {
    std::mt19937_64 rng(4);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        auto inst = oadr::testing::random_gradient_instance(rng, 6);
        inst.margin = 10.0;
        auto fwd = oadr::triplet_loss_grad(inst.anchor, inst.positive, inst.negative, inst.adapter, inst.margin);
        auto rev = oadr::triplet_loss_grad(inst.anchor, inst.negative, inst.positive, inst.adapter, inst.margin);
        if (fwd.loss == 0 || rev.loss == 0) continue;
        ++checked;
        for (std::size_t k = 0; k < fwd.d_weights.size(); ++k) EXPECT_EQ(fwd.d_weights[k], -rev.d_weights[k]);
        for (std::size_t k = 0; k < fwd.d_bias.size(); ++k) EXPECT_EQ(fwd.d_bias[k], -rev.d_bias[k]);
    }
    EXPECT_GT(checked, 150);
}

namespace {

// Anchors clustered with their positives; negatives pushed off along a
// shared direction so a linear map can separate them.
struct Separable {
    oadr::EmbeddingStore store{8};
    std::vector<oadr::TripletIds> ids;
};

Separable separable_set(std::size_t n, std::uint64_t seed) {
    Separable s;
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    for (std::size_t i = 0; i < n; ++i) {
        V a(8), p(8), neg(8);
        for (int k = 0; k < 8; ++k) {
            a[k] = g(rng);
            p[k] = a[k] + 0.6f * g(rng);
            neg[k] = a[k] + 0.6f * g(rng) + (k == 0 ? 0.5f : 0.0f);
        }
        std::string id = "t" + std::to_string(i);
        s.store.insert(id + "/a", a);
        s.store.insert(id + "/p", p);
        s.store.insert(id + "/n", neg);
        s.ids.push_back({id + "/a", id + "/p", id + "/n"});
    }
    return s;
}

bool bit_equal(const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(TrainAdapter, ZeroLearningRateKeepsIdentity) {
    auto s = separable_set(40, 1);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    auto r = oadr::train_adapter(s.ids, s.store, cfg, "tag");
    EXPECT_EQ(r.adapter, LinearAdapter::identity(8, "tag"));
    EXPECT_EQ(r.epoch_mean_loss.size(), 3u);
}

TEST(TrainAdapter, ZeroEpochsKeepsIdentity) {
    auto s = separable_set(10, 1);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.learning_rate = 0.5;
    auto r = oadr::train_adapter(s.ids, s.store, cfg);
    EXPECT_EQ(r.adapter, LinearAdapter::identity(8));
    EXPECT_TRUE(r.epoch_mean_loss.empty());
}

TEST(TrainAdapter, LossDecreasesOnSeparableSet) {
    auto s = separable_set(200, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 5;
    auto r = oadr::train_adapter(s.ids, s.store, cfg);
    ASSERT_EQ(r.epoch_mean_loss.size(), 5u);
    EXPECT_LT(r.epoch_mean_loss.back(), r.epoch_mean_loss.front());
}

TEST(TrainAdapter, LossDecreasesOnSyntheticMcqa) {
    oadr::testing::SyntheticConfig sc;
    sc.samples = 100;
    sc.dim = 128;
    auto data = oadr::testing::make_synthetic(sc);
    auto base = oadr::testing::embed_triplets(data.samples, sc.dim);
    std::vector<oadr::TripletIds> ids;
    for (const auto& t : oadr::build_triplet_dataset(data.samples)) ids.push_back(oadr::triplet_ids(t));
    TrainConfig cfg;
    cfg.learning_rate = 0.2;
    cfg.epochs = 3;
    auto r = oadr::train_adapter(ids, base, cfg);
    EXPECT_LT(r.epoch_mean_loss.back(), r.epoch_mean_loss.front());
}

TEST(TrainAdapter, BitwiseDeterministic) {
    auto s = separable_set(50, 3);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 2;
    cfg.batch_size = 7;
    cfg.seed = 99;
    auto r1 = oadr::train_adapter(s.ids, s.store, cfg);
    auto r2 = oadr::train_adapter(s.ids, s.store, cfg);
    EXPECT_TRUE(bit_equal(r1.adapter.weights, r2.adapter.weights));
    EXPECT_TRUE(bit_equal(r1.adapter.bias, r2.adapter.bias));
    EXPECT_TRUE(bit_equal(r1.epoch_mean_loss, r2.epoch_mean_loss));
    cfg.seed = 100;
    auto r3 = oadr::train_adapter(s.ids, s.store, cfg);
    EXPECT_FALSE(bit_equal(r1.adapter.weights, r3.adapter.weights));
}

TEST(TrainAdapter, Errors) {
    auto s = separable_set(3, 4);
    TrainConfig cfg;
    EXPECT_THROW(oadr::train_adapter({}, s.store, cfg), oadr::DataError);
    auto ids = s.ids;
    ids[1].negative = "nowhere";
    try {
        oadr::train_adapter(ids, s.store, cfg);
        FAIL();
    } catch (const oadr::DataError& e) {
        EXPECT_NE(std::string(e.what()).find("nowhere"), std::string::npos);
    }
    cfg.batch_size = 0;
    EXPECT_THROW(oadr::train_adapter(s.ids, s.store, cfg), oadr::DataError);
    cfg.batch_size = 8;
    cfg.learning_rate = -1;
    EXPECT_THROW(oadr::train_adapter(s.ids, s.store, cfg), oadr::DataError);
}

TEST(AdapterJson, RoundTripBitExact) {
    oadr::testing::TempDir dir;
    std::mt19937_64 rng(8);
    LinearAdapter a = LinearAdapter::identity(5, "mock-fnv1a");
    for (auto& w : a.weights) w = std::bit_cast<double>(rng() & 0x3fffffffffffffffull) * (rng() % 2 ? 1 : -1);
    for (auto& b : a.bias) b = std::ldexp(double(rng() % 100000), -int(rng() % 1070));
    a.validate();
    oadr::write_adapter_json(a, dir / "a.json");
    auto back = oadr::read_adapter_json(dir / "a.json");
    EXPECT_EQ(back.base_model_tag, a.base_model_tag);
    EXPECT_TRUE(bit_equal(back.weights, a.weights));
    EXPECT_TRUE(bit_equal(back.bias, a.bias));
}

TEST(AdapterJson, MalformedRejected) {
    oadr::testing::TempDir dir;
    oadr::testing::spit(dir / "a.json", R"({"dim": 2, "weights": [[1,0]], "bias": [0,0], "base_model_tag": ""})");
    EXPECT_THROW(oadr::read_adapter_json(dir / "a.json"), oadr::Error);
    oadr::testing::spit(dir / "b.json", R"({"dim": 2, "weights": [[1,0],[0,1]], "bias": [0], "base_model_tag": ""})");
    EXPECT_THROW(oadr::read_adapter_json(dir / "b.json"), oadr::Error);
}
