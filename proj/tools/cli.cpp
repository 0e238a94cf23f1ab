#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oadr/adapter.hpp"
#include "oadr/dataset.hpp"
#include "oadr/embedding_store.hpp"
#include "oadr/error.hpp"
#include "oadr/evaluation.hpp"
#include "oadr/retriever.hpp"
#include "oadr/triplets.hpp"
#include "oadr/version.hpp"

namespace oadr::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum class LogLevel { off, info, debug };

class Log {
public:
    explicit Log(std::ostream& err) : err_(err) {
        const char* env = std::getenv("OADR_LOG");
        std::string v = env ? env : "info";
        level_ = v == "off" ? LogLevel::off : v == "debug" ? LogLevel::debug : LogLevel::info;
    }
    void info(const std::string& msg) const {
        if (level_ >= LogLevel::info) err_ << "INFO " << msg << '\n';
    }
    void debug(const std::string& msg) const {
        if (level_ >= LogLevel::debug) err_ << "DEBUG " << msg << '\n';
    }

private:
    std::ostream& err_;
    LogLevel level_ = LogLevel::info;
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Resolved flag values of a subcommand: given values, else defaults.
json resolved_flags(const CLI::App& sub) {
    json flags = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
        if (name == "help") continue;
        if (opt->count() > 0) {
            const auto& r = opt->results();
            flags[name] = r.size() == 1 ? json(r.front()) : json(r);
        } else if (!opt->get_default_str().empty()) {
            flags[name] = opt->get_default_str();
        }
    }
    return flags;
}

struct Context {
    std::string subcommand;
    std::uint64_t seed = 42;
    const CLI::App* app = nullptr;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    Log* log = nullptr;
};

void write_manifests(const Context& ctx) {
    json manifest{{"subcommand", ctx.subcommand},
                  {"toolkit_version", kVersion},
                  {"seed", ctx.seed},
                  {"flags", resolved_flags(*ctx.app)},
                  {"inputs", ctx.inputs},
                  {"outputs", ctx.outputs},
                  {"created_at", utc_timestamp()}};
    for (const auto& o : ctx.outputs) {
        const fs::path p = o + ".manifest.json";
        std::ofstream f(p, std::ios::binary);
        if (!f) throw Error("cannot write manifest " + p.string());
        f << manifest.dump(2) << '\n';
    }
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << content << '\n';
    if (!f) throw Error("write failed: " + path.string());
}

std::vector<QueryMode> parse_modes(const std::string& csv) {
    std::vector<QueryMode> modes;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) modes.push_back(parse_query_mode(item));
    }
    if (modes.empty()) throw DataError("no query modes given");
    return modes;
}

SourceMapping resolve_mapping(const std::string& format) {
    if (format == "quality") return SourceMapping::quality();
    if (format == "race") return SourceMapping::race();
    if (fs::exists(format)) return SourceMapping::from_json_file(format);
    throw DataError("unknown source format '" + format + "' (quality, race, or a descriptor file)");
}

EmbeddingStore load_store(const std::string& path) {
    if (fs::path(path).extension() == ".jsonl") return read_store_jsonl(path);
    return read_store(path);
}

std::vector<McqaSample> filter_split(std::vector<McqaSample> samples, const std::string& split) {
    if (split.empty()) return samples;
    const Split want = parse_split(split);
    std::erase_if(samples, [&](const McqaSample& s) { return s.split != want; });
    return samples;
}

// ---------------------------------------------------------------------------
// Subcommand options

struct ImportArgs {
    std::string raw, format = "quality", split, samples_out, documents_out;
};
struct SegmentArgs {
    std::string in, out;
};
struct TripletsArgs {
    std::string samples, out, split, separator = " ";
};
struct MockEmbedArgs {
    std::string documents, triplets, samples, texts, out, emit_texts;
    std::uint32_t dim = 256;
};
struct TrainArgs {
    std::string triplets, embeddings, out, base_model_tag = "mock-fnv1a";
    double lr = 1e-4, margin = 1.0, epsilon = 1e-12;
    std::size_t batch_size = 8, epochs = 1;
};
struct RetrieveArgs {
    std::string samples, documents, embeddings, adapter, query_embeddings, mode = "options_aware", out, split;
    std::size_t budget = kDefaultTokenBudget, k = 0;
};
struct OverlapArgs {
    std::string samples, documents, embeddings, adapter, query_embeddings, modes = "question_only,options_aware", out,
        split;
    std::size_t budget = kDefaultTokenBudget, k = 0;
};
struct AccuracyArgs {
    std::string samples, passages, predictions, out, predictions_out;
    std::string answerer = "lexical";
};
struct ExportArgs {
    std::string embeddings, samples, adapter, sample_id, label, out;
    std::uint32_t dim = 256;
};

// ---------------------------------------------------------------------------
// Handlers. Each reads and validates every input before writing any output.

json do_import(const ImportArgs& a, Context& ctx) {
    SourceMapping mapping = resolve_mapping(a.format);
    if (!a.split.empty()) mapping.split = parse_split(a.split);
    ctx.inputs = {a.raw};
    auto dataset = import_dataset(a.raw, mapping);
    auto report = validate_dataset(dataset.samples, dataset.documents);
    if (!report.ok()) {
        const auto& first = report.issues.front();
        throw DataError(std::to_string(report.issues.size()) + " validation issue(s); first: " + first.subject + ": " +
                        first.message);
    }
    write_samples_jsonl(dataset.samples, a.samples_out);
    write_documents_jsonl(dataset.documents, a.documents_out);
    ctx.outputs = {a.samples_out, a.documents_out};
    return {{"samples", dataset.samples.size()}, {"documents", dataset.documents.size()}};
}

json do_segment(const SegmentArgs& a, Context& ctx) {
    std::ifstream in(a.in, std::ios::binary);
    if (!in) throw Error("cannot open " + a.in);
    std::stringstream buf;
    buf << in.rdbuf();
    ctx.inputs = {a.in};
    const auto sentences = segment_sentences(buf.str());
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw Error("cannot open " + a.out + " for writing");
    for (std::size_t i = 0; i < sentences.size(); ++i) out << json{{"index", i}, {"text", sentences[i]}}.dump() << '\n';
    ctx.outputs = {a.out};
    return {{"sentences", sentences.size()}};
}

json do_triplets(const TripletsArgs& a, Context& ctx) {
    ctx.inputs = {a.samples};
    auto samples = filter_split(read_samples_jsonl(a.samples), a.split);
    auto triplets = build_triplet_dataset(samples, a.separator);
    write_triplets_jsonl(triplets, a.out);
    ctx.outputs = {a.out};
    return {{"triplets", triplets.size()}};
}

json do_mock_embed(const MockEmbedArgs& a, Context& ctx) {
    if (a.out.empty() && a.emit_texts.empty()) throw DataError("nothing to do: give --out and/or --emit-texts");
    std::vector<std::pair<std::string, std::string>> texts;
    if (!a.documents.empty()) {
        ctx.inputs.push_back(a.documents);
        for (const auto& d : read_documents_jsonl(a.documents)) {
            for (std::size_t i = 0; i < d.sentences.size(); ++i) texts.emplace_back(sentence_id(d.document_id, i), d.sentences[i]);
        }
    }
    if (!a.triplets.empty()) {
        ctx.inputs.push_back(a.triplets);
        for (const auto& t : read_triplets_jsonl(a.triplets)) {
            texts.emplace_back(anchor_id(t.sample_id), t.anchor);
            texts.emplace_back(positive_id(t.sample_id), t.positive);
            texts.emplace_back(negative_id(t.sample_id), t.negative);
        }
    }
    if (!a.samples.empty()) {
        ctx.inputs.push_back(a.samples);
        for (const auto& s : read_samples_jsonl(a.samples)) {
            for (auto mode : {QueryMode::question_only, QueryMode::oracle, QueryMode::options_aware}) {
                texts.emplace_back(s.sample_id + "/" + std::string(to_string(mode)), query_text(s, mode));
            }
        }
    }
    if (!a.texts.empty()) {
        ctx.inputs.push_back(a.texts);
        std::ifstream in(a.texts, std::ios::binary);
        if (!in) throw Error("cannot open " + a.texts);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                auto r = json::parse(line);
                texts.emplace_back(r.at("id").get<std::string>(), r.at("text").get<std::string>());
            } catch (const json::exception& e) {
                throw DataError(a.texts + ":" + std::to_string(n) + ": malformed record: " + e.what());
            }
        }
    }
    if (texts.empty()) throw DataError("no input texts: give --documents, --triplets, --samples or --texts");

    EmbeddingStore store(a.dim);
    for (auto& [id, text] : texts) store.insert(id, mock_embed(text, a.dim));

    if (!a.out.empty()) {
        write_store(store, a.out);
        ctx.outputs.push_back(a.out);
    }
    if (!a.emit_texts.empty()) {
        std::ofstream out(a.emit_texts, std::ios::binary);
        if (!out) throw Error("cannot open " + a.emit_texts + " for writing");
        for (const auto& [id, text] : texts) out << json{{"id", id}, {"text", text}}.dump() << '\n';
        ctx.outputs.push_back(a.emit_texts);
    }
    return {{"vectors", store.size()}, {"dim", a.dim}};
}

json do_train(const TrainArgs& a, Context& ctx) {
    TrainConfig config;
    config.learning_rate = a.lr;
    config.margin = a.margin;
    config.batch_size = a.batch_size;
    config.epochs = a.epochs;
    config.seed = ctx.seed;
    config.distance_epsilon = a.epsilon;
    config.validate();

    ctx.inputs = {a.triplets, a.embeddings};
    const auto triplets = read_triplets_jsonl(a.triplets);
    const auto base = load_store(a.embeddings);
    std::vector<TripletIds> ids;
    ids.reserve(triplets.size());
    for (const auto& t : triplets) ids.push_back(triplet_ids(t));

    auto result = train_adapter(ids, base, config, a.base_model_tag);
    write_adapter_json(result.adapter, a.out);
    ctx.outputs = {a.out};
    return {{"triplets", ids.size()}, {"dim", base.dim()}, {"epoch_mean_loss", result.epoch_mean_loss}};
}

struct RetrievalInputs {
    std::vector<McqaSample> samples;
    std::vector<ContextDocument> documents;
    std::optional<EmbeddingStore> context;
    std::optional<EmbeddingStore> queries;
    std::optional<LinearAdapter> adapter;
    QueryEmbedder embed;
};

RetrievalInputs load_retrieval_inputs(const std::string& samples, const std::string& documents,
                                      const std::string& embeddings, const std::string& adapter,
                                      const std::string& query_embeddings, const std::string& split, Context& ctx) {
    RetrievalInputs in;
    ctx.inputs = {samples, documents, embeddings};
    in.samples = filter_split(read_samples_jsonl(samples), split);
    in.documents = read_documents_jsonl(documents);
    auto report = validate_dataset(in.samples, in.documents);
    if (!report.ok()) {
        throw DataError("invalid dataset: " + report.issues.front().subject + ": " + report.issues.front().message);
    }
    in.context.emplace(load_store(embeddings));
    if (!adapter.empty()) {
        ctx.inputs.push_back(adapter);
        in.adapter = read_adapter_json(adapter);
        if (in.adapter->dim != in.context->dim()) throw DimensionMismatch(in.context->dim(), in.adapter->dim);
    }
    if (!query_embeddings.empty()) {
        ctx.inputs.push_back(query_embeddings);
        in.queries.emplace(load_store(query_embeddings));
        in.embed = store_query_embedder(*in.queries);
    } else {
        in.embed = mock_query_embedder(in.context->dim());
    }
    return in;
}

json do_retrieve(const RetrieveArgs& a, Context& ctx) {
    auto in = load_retrieval_inputs(a.samples, a.documents, a.embeddings, a.adapter, a.query_embeddings, a.split, ctx);
    RetrievalOptions opts;
    opts.mode = parse_query_mode(a.mode);
    opts.token_budget = a.budget;
    if (a.k > 0) opts.k = a.k;
    opts.adapter = in.adapter ? &*in.adapter : nullptr;
    const auto passages = retrieve_batch(in.samples, in.documents, *in.context, in.embed, opts);

    std::vector<PassageRecord> records;
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        records.push_back({in.samples[i].sample_id, passages[i], opts.mode});
        tokens += passages[i].token_count;
    }
    write_passages_jsonl(records, a.out);
    ctx.outputs = {a.out};
    return {{"passages", records.size()}, {"total_tokens", tokens}, {"query_mode", a.mode}};
}

json do_eval_overlap(const OverlapArgs& a, Context& ctx) {
    auto in = load_retrieval_inputs(a.samples, a.documents, a.embeddings, a.adapter, a.query_embeddings, a.split, ctx);
    OverlapOptions opts;
    opts.modes = parse_modes(a.modes);
    opts.token_budget = a.budget;
    if (a.k > 0) opts.k = a.k;
    opts.adapter = in.adapter ? &*in.adapter : nullptr;
    const auto reports = eval_overlap(in.samples, in.documents, *in.context, in.embed, opts);
    write_text(a.out, overlap_reports_json(reports));
    ctx.outputs = {a.out};
    json summary = json::object();
    for (const auto& r : reports) summary[std::string(to_string(r.mode))] = r.mean_overlap;
    return {{"mean_overlap", summary}, {"adapted", in.adapter.has_value()}};
}

json do_eval_accuracy(const AccuracyArgs& a, Context& ctx) {
    ctx.inputs = {a.samples, a.passages};
    const auto samples = read_samples_jsonl(a.samples);
    std::unordered_map<std::string, Passage> passages;
    for (auto& r : read_passages_jsonl(a.passages)) passages.emplace(r.sample_id, std::move(r.passage));

    Answerer answerer = a.answerer == "random" ? random_answerer(ctx.seed) : lexical_answerer();
    std::string answerer_name = a.answerer;
    if (!a.predictions.empty()) {
        ctx.inputs.push_back(a.predictions);
        answerer = predictions_answerer(read_predictions_jsonl(a.predictions));
        answerer_name = "predictions";
    }
    std::vector<std::pair<std::string, int>> predicted;
    Answerer recording = [&](const McqaSample& s, const Passage& p) {
        const int idx = answerer(s, p);
        predicted.emplace_back(s.sample_id, idx);
        return idx;
    };
    const auto report = eval_accuracy(samples, passages, recording);
    write_text(a.out, accuracy_report_json(report));
    ctx.outputs = {a.out};
    if (!a.predictions_out.empty()) {
        write_predictions_jsonl(predicted, a.predictions_out);
        ctx.outputs.push_back(a.predictions_out);
    }
    return {{"answerer", answerer_name}, {"correct", report.correct}, {"total", report.total},
            {"accuracy", report.accuracy}};
}

json do_export(const ExportArgs& a, Context& ctx) {
    std::vector<LabeledVector> rows;
    if (!a.embeddings.empty()) {
        ctx.inputs.push_back(a.embeddings);
        const auto store = load_store(a.embeddings);
        for (std::size_t r = 0; r < store.size(); ++r) {
            auto v = store.row(r);
            rows.push_back({store.id(r), a.label, EmbeddingVector(v.begin(), v.end())});
        }
    }
    if (!a.samples.empty()) {
        ctx.inputs.push_back(a.samples);
        std::optional<LinearAdapter> adapter;
        if (!a.adapter.empty()) {
            ctx.inputs.push_back(a.adapter);
            adapter = read_adapter_json(a.adapter);
            if (adapter->dim != a.dim) throw DimensionMismatch(a.dim, adapter->dim);
        }
        for (const auto& s : read_samples_jsonl(a.samples)) {
            if (!a.sample_id.empty() && s.sample_id != a.sample_id) continue;
            for (auto mode : {QueryMode::question_only, QueryMode::oracle, QueryMode::options_aware}) {
                rows.push_back({s.sample_id, std::string(to_string(mode)), mock_embed(query_text(s, mode), a.dim)});
            }
            if (adapter) rows.push_back({s.sample_id, "options_aware_adapted", apply_adapter(*adapter, rows.back().values)});
        }
    }
    if (ctx.inputs.empty()) throw DataError("give --embeddings and/or --samples");
    export_embeddings_table(rows, a.out);
    ctx.outputs = {a.out};
    return {{"rows", rows.size()}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Options-aware dense retrieval toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();
    app.fallthrough();

    ImportArgs imp;
    auto* s_import = app.add_subcommand("import", "Normalize a raw MCQA dataset into samples/documents JSONL");
    s_import->add_option("--raw", imp.raw, "Raw line-delimited source file")->required()->check(CLI::ExistingFile);
    s_import->add_option("--format", imp.format, "quality | race | path to mapping descriptor JSON")
        ->capture_default_str();
    s_import->add_option("--split", imp.split, "Split tag for imported samples (train|dev|test)");
    s_import->add_option("--samples-out", imp.samples_out, "Normalized samples JSONL")->required();
    s_import->add_option("--documents-out", imp.documents_out, "Normalized documents JSONL")->required();

    SegmentArgs seg;
    auto* s_segment = app.add_subcommand("segment", "Split a text file into sentences");
    s_segment->add_option("--in", seg.in, "Input text file")->required()->check(CLI::ExistingFile);
    s_segment->add_option("--out", seg.out, "Output JSONL of {index, text}")->required();

    TripletsArgs tri;
    auto* s_triplets = app.add_subcommand("triplets", "Build (anchor, positive, negative) triplets");
    s_triplets->add_option("--samples", tri.samples)->required()->check(CLI::ExistingFile);
    s_triplets->add_option("--out", tri.out)->required();
    s_triplets->add_option("--split", tri.split, "Only use samples of this split");
    s_triplets->add_option("--separator", tri.separator, "Join string between question and options");

    MockEmbedArgs emb;
    auto* s_embed = app.add_subcommand("mock-embed", "Embed texts with the deterministic hashed embedder");
    s_embed->add_option("--documents", emb.documents, "Documents JSONL (ids <document_id>#<i>)")
        ->check(CLI::ExistingFile);
    s_embed->add_option("--triplets", emb.triplets, "Triplets JSONL (ids <sample_id>/anchor|positive|negative)")
        ->check(CLI::ExistingFile);
    s_embed->add_option("--samples", emb.samples, "Samples JSONL (ids <sample_id>/<query_mode>)")
        ->check(CLI::ExistingFile);
    s_embed->add_option("--texts", emb.texts, "Texts JSONL of {id, text}")->check(CLI::ExistingFile);
    s_embed->add_option("--dim", emb.dim, "Embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
    s_embed->add_option("--out", emb.out, "OADRVEC1 output");
    s_embed->add_option("--emit-texts", emb.emit_texts, "Also write the collected {id, text} JSONL");

    TrainArgs tr;
    auto* s_train = app.add_subcommand("train", "Train the query adapter with the triplet objective");
    s_train->add_option("--triplets", tr.triplets)->required()->check(CLI::ExistingFile);
    s_train->add_option("--embeddings", tr.embeddings, "Base embeddings (OADRVEC1 or .jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    s_train->add_option("--out", tr.out, "Adapter JSON output")->required();
    s_train->add_option("--lr", tr.lr)->capture_default_str();
    s_train->add_option("--batch-size", tr.batch_size)->capture_default_str();
    s_train->add_option("--epochs", tr.epochs)->capture_default_str();
    s_train->add_option("--margin", tr.margin)->capture_default_str();
    s_train->add_option("--epsilon", tr.epsilon)->capture_default_str();
    s_train->add_option("--base-model-tag", tr.base_model_tag)->capture_default_str();

    RetrieveArgs ret;
    auto* s_retrieve = app.add_subcommand("retrieve", "Retrieve evidence passages");
    s_retrieve->add_option("--samples", ret.samples)->required()->check(CLI::ExistingFile);
    s_retrieve->add_option("--documents", ret.documents)->required()->check(CLI::ExistingFile);
    s_retrieve->add_option("--embeddings", ret.embeddings, "Context sentence embeddings")
        ->required()
        ->check(CLI::ExistingFile);
    s_retrieve->add_option("--adapter", ret.adapter)->check(CLI::ExistingFile);
    s_retrieve->add_option("--query-embeddings", ret.query_embeddings, "Precomputed <sample_id>/<mode> vectors")
        ->check(CLI::ExistingFile);
    s_retrieve->add_option("--mode", ret.mode, "question_only | oracle | options_aware")->capture_default_str();
    s_retrieve->add_option("--budget", ret.budget, "Token budget")->capture_default_str()->check(CLI::PositiveNumber);
    s_retrieve->add_option("--k", ret.k, "Rank only the k nearest sentences (0 = all)")->capture_default_str();
    s_retrieve->add_option("--split", ret.split);
    s_retrieve->add_option("--out", ret.out)->required();

    OverlapArgs ov;
    auto* s_overlap = app.add_subcommand("eval-overlap", "Overlap with oracle-query retrieval");
    s_overlap->add_option("--samples", ov.samples)->required()->check(CLI::ExistingFile);
    s_overlap->add_option("--documents", ov.documents)->required()->check(CLI::ExistingFile);
    s_overlap->add_option("--embeddings", ov.embeddings)->required()->check(CLI::ExistingFile);
    s_overlap->add_option("--adapter", ov.adapter)->check(CLI::ExistingFile);
    s_overlap->add_option("--query-embeddings", ov.query_embeddings)->check(CLI::ExistingFile);
    s_overlap->add_option("--modes", ov.modes, "Comma-separated query modes")->capture_default_str();
    s_overlap->add_option("--budget", ov.budget)->capture_default_str()->check(CLI::PositiveNumber);
    s_overlap->add_option("--k", ov.k)->capture_default_str();
    s_overlap->add_option("--split", ov.split);
    s_overlap->add_option("--out", ov.out, "Report JSON")->required();

    AccuracyArgs acc;
    auto* s_accuracy = app.add_subcommand("eval-accuracy", "Answer accuracy over passages");
    s_accuracy->add_option("--samples", acc.samples)->required()->check(CLI::ExistingFile);
    s_accuracy->add_option("--passages", acc.passages)->required()->check(CLI::ExistingFile);
    s_accuracy->add_option("--predictions", acc.predictions, "External predictions JSONL (default: lexical answerer)")
        ->check(CLI::ExistingFile);
    s_accuracy->add_option("--answerer", acc.answerer, "Built-in answerer when no predictions are given")
        ->capture_default_str()
        ->check(CLI::IsMember({"lexical", "random"}));
    s_accuracy->add_option("--predictions-out", acc.predictions_out, "Write the scored predictions");
    s_accuracy->add_option("--out", acc.out, "Report JSON")->required();

    ExportArgs ex;
    auto* s_export = app.add_subcommand("export-embeddings", "Export labeled vectors as CSV");
    s_export->add_option("--embeddings", ex.embeddings)->check(CLI::ExistingFile);
    s_export->add_option("--label", ex.label, "Label for rows taken from --embeddings");
    s_export->add_option("--samples", ex.samples, "Emit question/oracle/options-aware query vectors")
        ->check(CLI::ExistingFile);
    s_export->add_option("--adapter", ex.adapter)->check(CLI::ExistingFile);
    s_export->add_option("--sample-id", ex.sample_id);
    s_export->add_option("--dim", ex.dim)->capture_default_str()->check(CLI::PositiveNumber);
    s_export->add_option("--out", ex.out)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "ERROR usage: " << e.what() << '\n' << app.help();
        return 2;
    }

    Log log(err);
    Context ctx;
    ctx.seed = seed;
    ctx.log = &log;
    const CLI::App* sub = app.get_subcommands().front();
    ctx.subcommand = sub->get_name();
    ctx.app = sub;

    try {
        log.debug("running " + ctx.subcommand);
        json summary;
        if (sub == s_import) summary = do_import(imp, ctx);
        else if (sub == s_segment) summary = do_segment(seg, ctx);
        else if (sub == s_triplets) summary = do_triplets(tri, ctx);
        else if (sub == s_embed) summary = do_mock_embed(emb, ctx);
        else if (sub == s_train) summary = do_train(tr, ctx);
        else if (sub == s_retrieve) summary = do_retrieve(ret, ctx);
        else if (sub == s_overlap) summary = do_eval_overlap(ov, ctx);
        else if (sub == s_accuracy) summary = do_eval_accuracy(acc, ctx);
        else if (sub == s_export) summary = do_export(ex, ctx);
        write_manifests(ctx);
        for (const auto& o : ctx.outputs) log.info("wrote " + o);
        json line{{"subcommand", ctx.subcommand}, {"status", "ok"}};
        for (auto& [k, v] : summary.items()) line[k] = v;
        line["outputs"] = ctx.outputs;
        out << line.dump() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& c : msg) {
            if (c == '\n') c = ' ';
        }
        err << "ERROR " << ctx.subcommand << ": " << msg << '\n';
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace oadr::cli
