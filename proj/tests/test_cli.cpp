#include <gtest/gtest.h>

#include <cstdlib>

#include "oadr/adapter.hpp"
#include "oadr/embedding_store.hpp"
#include "oadr/evaluation.hpp"
#include "oadr/triplets.hpp"
#include "pipeline.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using oadr::testing::run_cli;
using oadr::testing::slurp;
using oadr::testing::TempDir;

namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const std::string kSamples3 = OADR_FIXTURE_DIR "/samples3.jsonl";
const std::string kDocuments2 = OADR_FIXTURE_DIR "/documents2.jsonl";

}  // namespace

TEST(Cli, TripletsThreeLines) {
    TempDir dir;
    auto r = run_cli({"triplets", "--samples", kSamples3, "--out", (dir / "t.jsonl").string()});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(line_count(slurp(dir / "t.jsonl")), 3u);
    auto ts = oadr::read_triplets_jsonl(dir / "t.jsonl");
    EXPECT_EQ(ts[0].anchor, "Who rang the bell? A child");
    EXPECT_EQ(ts[1].negative, "When did it ring? At noon");
    EXPECT_TRUE(fs::exists(dir / "t.jsonl.manifest.json"));
    EXPECT_EQ(line_count(r.out), 1u);
    EXPECT_EQ(r.out.front(), '{');
}

TEST(Cli, ZeroLearningRateWritesIdentity) {
    TempDir dir;
    auto t = (dir / "t.jsonl").string(), e = (dir / "e.bin").string(), a = (dir / "a.json").string();
    ASSERT_EQ(run_cli({"triplets", "--samples", kSamples3, "--out", t}).status, 0);
    ASSERT_EQ(run_cli({"mock-embed", "--triplets", t, "--dim", "16", "--out", e}).status, 0);
    auto r = run_cli({"train", "--triplets", t, "--embeddings", e, "--lr", "0", "--epochs", "2", "--out", a});
    ASSERT_EQ(r.status, 0) << r.err;
    auto adapter = oadr::read_adapter_json(a);
    EXPECT_EQ(adapter.weights, oadr::LinearAdapter::identity(16).weights);
    EXPECT_EQ(adapter.bias, oadr::LinearAdapter::identity(16).bias);
    EXPECT_EQ(adapter.base_model_tag, "mock-fnv1a");
}

TEST(Cli, UsageErrorsExitTwo) {
    auto r = run_cli({"frobnicate"});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
    EXPECT_EQ(run_cli({"triplets", "--samples", kSamples3}).status, 2);
    EXPECT_EQ(run_cli({"triplets", "--samples", kSamples3, "--out", "x", "--bogus"}).status, 2);
    EXPECT_EQ(run_cli({}).status, 2);
}

TEST(Cli, OperationFailureExitOneSingleLine) {
    TempDir dir;
    oadr::testing::spit(dir / "bad.jsonl", "{\"sample_id\": \"x\"}\n");
    auto r = run_cli({"triplets", "--samples", (dir / "bad.jsonl").string(), "--out", (dir / "t.jsonl").string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(line_count(r.err), 1u) << r.err;
    EXPECT_EQ(r.err.rfind("ERROR", 0), 0u);
    EXPECT_TRUE(r.out.empty());
}

// Missing sentence vectors are detected before the passages file is opened.
TEST(Cli, ValidatesBeforeWriting) {
    TempDir dir;
    auto e = (dir / "e.bin").string(), out = (dir / "p.jsonl").string();
    oadr::EmbeddingStore partial(8);
    partial.insert("doc-a#0", oadr::mock_embed("x", 8));
    oadr::write_store(partial, e);
    auto r = run_cli({"retrieve", "--samples", kSamples3, "--documents", kDocuments2, "--embeddings", e, "--out", out});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("(doc-a, 1)"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(out));
    EXPECT_FALSE(fs::exists(out + ".manifest.json"));

    auto t = (dir / "t.jsonl").string();
    oadr::testing::spit(dir / "s.jsonl",
                        slurp(kSamples3) + R"({"sample_id": "f-4", "document_id": "d", "question": "q", "options": ["a"], "answer_index": 0, "split": "train"})"
                                           "\n");
    EXPECT_EQ(run_cli({"triplets", "--samples", (dir / "s.jsonl").string(), "--out", t}).status, 1);
    EXPECT_FALSE(fs::exists(t));
}

TEST(Cli, RetrieveAndAccuracyOnFixture) {
    TempDir dir;
    auto e = (dir / "e.bin").string(), p = (dir / "p.jsonl").string(), acc = (dir / "acc.json").string();
    ASSERT_EQ(run_cli({"mock-embed", "--documents", kDocuments2, "--dim", "64", "--out", e}).status, 0);
    auto r = run_cli({"retrieve", "--samples", kSamples3, "--documents", kDocuments2, "--embeddings", e, "--mode",
                      "oracle", "--k", "1", "--out", p});
    ASSERT_EQ(r.status, 0) << r.err;
    auto recs = oadr::read_passages_jsonl(p);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].passage.sentence_indices, std::vector<std::size_t>{0});
    EXPECT_EQ(recs[2].passage.text, "The fair was held by the docks.");
    r = run_cli({"eval-accuracy", "--samples", kSamples3, "--passages", p, "--out", acc});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("\"accuracy\""), std::string::npos);

    r = run_cli({"--seed", "5", "eval-accuracy", "--samples", kSamples3, "--passages", p, "--answerer", "random",
                 "--out", acc});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_NE(slurp(acc + ".manifest.json").find("\"seed\": 5"), std::string::npos);
}

TEST(Cli, ExportEmbeddingsFromStore) {
    TempDir dir;
    auto e = (dir / "e.bin").string(), csv = (dir / "e.csv").string();
    ASSERT_EQ(run_cli({"mock-embed", "--documents", kDocuments2, "--dim", "4", "--out", e}).status, 0);
    auto r = run_cli({"export-embeddings", "--embeddings", e, "--label", "context", "--out", csv});
    ASSERT_EQ(r.status, 0) << r.err;
    auto rows = oadr::read_embeddings_table(csv);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[3].id, "doc-b#0");
    EXPECT_EQ(rows[3].label, "context");
    EXPECT_EQ(rows[3].values, oadr::mock_embed("The fair was held by the docks.", 4));
}

TEST(Cli, ToyPipelineMatchesGolden) {
    TempDir dir;
    auto run = oadr::testing::run_toy_pipeline(dir.path(), OADR_DATA_DIR "/toy/quality_toy.jsonl");
    ASSERT_EQ(run.status, 0) << run.failed_step << ": " << run.diagnostics;
    const bool update = std::getenv("OADR_UPDATE_GOLDEN") != nullptr;
    for (const auto& name : run.artifacts) {
        ASSERT_TRUE(fs::exists(dir / name)) << name;
        EXPECT_TRUE(fs::exists(dir / (name + ".manifest.json"))) << name;
        const fs::path golden = fs::path(OADR_GOLDEN_DIR) / name;
        if (update) {
            fs::create_directories(golden.parent_path());
            fs::copy_file(dir / name, golden, fs::copy_options::overwrite_existing);
            continue;
        }
        ASSERT_TRUE(fs::exists(golden)) << "missing golden file " << golden;
        EXPECT_EQ(slurp(dir / name), slurp(golden)) << name << " differs from golden copy";
    }
}
