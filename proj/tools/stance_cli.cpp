// stance — command-line surface for the multi-perspective stance pipeline.
//
// Subcommands: ingest, stats, split, build, chunk, train, predict, eval,
// experiment. Every subcommand accepts --config FILE (TOML-style key=value,
// command-line flags win) and embeds the resolved configuration plus an
// input content hash into its report artifacts; JSON-lines data artifacts
// get a <name>.meta.json sidecar instead.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stance/agreement.hpp"
#include "stance/chunker.hpp"
#include "stance/corpus.hpp"
#include "stance/evaluation.hpp"
#include "stance/model.hpp"
#include "stance/perspectives.hpp"
#include "stance/util.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace stance;

namespace {

// ---------------------------------------------------------------------------
// Shared option bundles and helpers
// ---------------------------------------------------------------------------

CorpusFormat parse_format(const std::string& name) {
    return name == "csv" ? CorpusFormat::Csv : CorpusFormat::Jsonl;
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex64(fnv1a64(buf.str()));
}

TiePolicy make_tie_policy(const std::string& kind,
                          const std::string& precedence) {
    TiePolicy policy;
    if (kind == "discard")
        policy.kind = TiePolicy::Kind::Discard;
    else if (kind == "precedence")
        policy.kind = TiePolicy::Kind::FixedPrecedence;
    else
        policy.kind = TiePolicy::Kind::Error;
    if (!precedence.empty()) {
        std::array<StanceLabel, kNumClasses> order = {};
        std::array<bool, kNumClasses> seen = {};
        std::size_t count = 0;
        std::stringstream ss(precedence);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto label = parse_label(item);
            if (!label || *label == StanceLabel::LinkNotWorking ||
                count >= kNumClasses || seen[static_cast<std::size_t>(class_index(*label))])
                throw std::runtime_error(
                    "--precedence must list the four stance labels once each");
            seen[static_cast<std::size_t>(class_index(*label))] = true;
            order[count++] = *label;
        }
        if (count != kNumClasses)
            throw std::runtime_error(
                "--precedence must list the four stance labels once each");
        policy.precedence = order;
    }
    return policy;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_meta(const fs::path& artifact, const std::string& command,
                const ordered_json& config, const std::string& input_hash) {
    ordered_json meta;
    meta["artifact"] = artifact.filename().string();
    meta["command"] = command;
    meta["config"] = config;
    meta["input_hash"] = input_hash;
    write_text(fs::path(artifact.string() + ".meta.json"), meta.dump(2) + "\n");
}

ordered_json report_envelope(const std::string& kind,
                             const ordered_json& config,
                             const std::string& input_hash) {
    ordered_json j;
    j["report"] = kind;
    j["config"] = config;
    j["input_hash"] = input_hash;
    return j;
}

void emit_report(const ordered_json& report, const std::string& output) {
    if (output.empty())
        std::cout << report.dump(2) << '\n';
    else
        write_text(output, report.dump(2) + "\n");
}

ordered_json predictions_json(const Prediction& pred) {
    ordered_json rec;
    rec["doc_id"] = pred.doc_id;
    rec["probs"] = pred.probs;
    rec["label"] = to_string(pred.label);
    rec["confidence"] = pred.confidence;
    return rec;
}

// Gold labels from a JSONL/CSV corpus (majority vote under the tie policy)
// or from JSONL records carrying a direct "label" field.
std::map<std::string, StanceLabel> load_gold(const fs::path& path,
                                             CorpusFormat format,
                                             const TiePolicy& policy,
                                             std::vector<std::string>* ties) {
    std::map<std::string, StanceLabel> gold;
    bool direct = false;
    if (format == CorpusFormat::Jsonl) {
        std::ifstream probe(path);
        if (!probe) throw std::runtime_error("cannot open " + path.string());
        std::string first;
        while (std::getline(probe, first) && trim(first).empty()) {
        }
        if (!first.empty()) {
            auto j = nlohmann::json::parse(first, nullptr, false);
            direct = j.is_object() && j.contains("label") &&
                     !j.contains("annotations");
        }
    }
    if (direct) {
        std::ifstream in(path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            auto j = nlohmann::json::parse(line);
            auto label = parse_label(j.at("label").get<std::string>());
            if (!label || *label == StanceLabel::LinkNotWorking)
                throw std::runtime_error(path.string() + ":" +
                                         std::to_string(lineno) +
                                         ": invalid gold label");
            gold[j.at("doc_id").get<std::string>()] = *label;
        }
        return gold;
    }
    Corpus corpus = load_corpus(path, format);
    std::vector<StanceLabel> labels;
    for (const Document& doc : corpus.documents) {
        labels.clear();
        for (const Annotation& ann : doc.annotations) labels.push_back(ann.label);
        auto major = majority_label(labels, policy);
        if (!major) {
            if (ties) ties->push_back(doc.doc_id);
            continue;
        }
        if (*major == StanceLabel::LinkNotWorking)
            throw std::runtime_error("document \"" + doc.doc_id +
                                     "\" has a link-not-working majority");
        gold[doc.doc_id] = *major;
    }
    return gold;
}

std::vector<Prediction> load_predictions(const fs::path& path,
                                         std::vector<std::string>* warnings) {
    // Native prediction files and external probability files share the
    // {doc_id, probs} core; labels and confidences are rederived from probs.
    return import_external_predictions(path, warnings);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input, format = "jsonl", output, report;
    int max_tokens = 8000;
    std::string lnw_policy = "any";
    bool no_dedupe = false;
};

int cmd_ingest(const IngestArgs& args) {
    PreprocessConfig config;
    config.max_tokens = args.max_tokens;
    config.drop_link_not_working = args.lnw_policy == "majority"
                                       ? LinkNotWorkingPolicy::MajorityOnly
                                       : LinkNotWorkingPolicy::AnyAnnotation;
    config.dedupe = !args.no_dedupe;

    ordered_json resolved = {{"input", args.input},
                             {"format", args.format},
                             {"output", args.output},
                             {"max_tokens", config.max_tokens},
                             {"lnw_policy", args.lnw_policy},
                             {"dedupe", config.dedupe}};
    std::string input_hash = file_hash(args.input);

    Corpus corpus = load_corpus(args.input, parse_format(args.format));
    auto [cleaned, report] = preprocess(corpus, config);

    ordered_json out = report_envelope("preprocess", resolved, input_hash);
    out["input_size"] = report.input_size;
    out["too_long_removed"] = report.too_long_removed;
    out["duplicates_removed"] = report.duplicates_removed;
    out["link_not_working_removed"] = report.link_not_working_removed;
    out["final_size"] = report.final_size;
    out["empty_output"] = report.empty_output;

    if (!args.output.empty()) {
        save_corpus(cleaned, args.output, CorpusFormat::Jsonl);
        write_meta(args.output, "ingest", resolved, input_hash);
    }
    emit_report(out, args.report);
    return 0;
}

struct StatsArgs {
    std::string input, format = "jsonl", output;
};

int cmd_stats(const StatsArgs& args) {
    ordered_json resolved = {{"input", args.input}, {"format", args.format}};
    std::string input_hash = file_hash(args.input);
    Corpus corpus = load_corpus(args.input, parse_format(args.format));

    AgreementReport agreement = analyze_agreement(corpus);
    auto histogram = disagreement_histogram(corpus);

    std::map<std::string, int> majority_counts;
    std::vector<StanceLabel> labels;
    for (const Document& doc : corpus.documents) {
        labels.clear();
        for (const Annotation& ann : doc.annotations) labels.push_back(ann.label);
        auto major = strict_plurality(labels);
        ++majority_counts[major ? to_string(*major) : "tie"];
    }

    ordered_json out = report_envelope("stats", resolved, input_hash);
    out["n_items"] = agreement.n_items;
    out["n_raters"] = agreement.n_raters;
    out["fleiss_kappa"] = agreement.fleiss_kappa;
    // Inter-rater agreement = mean fraction of agreeing annotator pairs.
    out["pairwise_agreement"] = agreement.pairwise_agreement;
    out["per_label_counts"] = agreement.per_label_counts;
    out["majority_distribution"] = majority_counts;
    out["disagreement_histogram"] = {{"unanimous", histogram[0]},
                                     {"majority", histogram[1]},
                                     {"split", histogram[2]}};
    emit_report(out, args.output);

    std::ostringstream table;
    table << "items: " << agreement.n_items
          << "  raters: " << agreement.n_raters << '\n'
          << "fleiss_kappa:       " << agreement.fleiss_kappa << '\n'
          << "pairwise_agreement: " << agreement.pairwise_agreement << '\n'
          << "labels (all annotations):\n";
    for (const auto& [label, count] : agreement.per_label_counts)
        table << "  " << label << ": " << count << '\n';
    table << "majority labels:\n";
    for (const auto& [label, count] : majority_counts)
        table << "  " << label << ": " << count << '\n';
    table << "disagreement: unanimous=" << histogram[0]
          << " majority=" << histogram[1] << " split=" << histogram[2] << '\n';
    std::cout << table.str();
    return 0;
}

struct SplitArgs {
    std::string input, format = "jsonl", output_dir = ".";
    double train_frac = 0.70, val_frac = 0.15, test_frac = 0.15;
    std::uint64_t seed = 0;
    bool no_stratify = false;
};

int cmd_split(const SplitArgs& args) {
    SplitSpec spec;
    spec.train_frac = args.train_frac;
    spec.val_frac = args.val_frac;
    spec.test_frac = args.test_frac;
    spec.seed = args.seed;
    spec.stratify_by_majority = !args.no_stratify;

    ordered_json resolved = {{"input", args.input},
                             {"format", args.format},
                             {"output_dir", args.output_dir},
                             {"train_frac", spec.train_frac},
                             {"val_frac", spec.val_frac},
                             {"test_frac", spec.test_frac},
                             {"seed", spec.seed},
                             {"stratify_by_majority", spec.stratify_by_majority}};
    std::string input_hash = file_hash(args.input);

    Corpus corpus = load_corpus(args.input, parse_format(args.format));
    SplitResult result = split(corpus, spec);

    fs::create_directories(args.output_dir);
    const std::array<std::pair<const char*, const Corpus*>, 3> outputs = {{
        {"train.jsonl", &result.train},
        {"val.jsonl", &result.val},
        {"test.jsonl", &result.test},
    }};
    for (const auto& [name, part] : outputs) {
        fs::path path = fs::path(args.output_dir) / name;
        save_corpus(*part, path, CorpusFormat::Jsonl);
        write_meta(path, "split", resolved, input_hash);
    }
    std::cout << "train=" << result.train.documents.size()
              << " val=" << result.val.documents.size()
              << " test=" << result.test.documents.size() << '\n';
    return 0;
}

struct BuildArgs {
    std::string input, format = "jsonl", approach = "baseline", output;
    std::string tie_policy = "discard", precedence;
    bool distinct_only = false;
};

int cmd_build(const BuildArgs& args) {
    ordered_json resolved = {{"input", args.input},
                             {"format", args.format},
                             {"approach", args.approach},
                             {"tie_policy", args.tie_policy},
                             {"precedence", args.precedence},
                             {"distinct_only", args.distinct_only},
                             {"output", args.output}};
    std::string input_hash = file_hash(args.input);
    Corpus corpus = load_corpus(args.input, parse_format(args.format));

    std::vector<TrainInstance> instances;
    int ties = 0;
    if (args.approach == "baseline") {
        auto [built, tie_report] =
            build_baseline_dataset(corpus, make_tie_policy(args.tie_policy, args.precedence));
        instances = std::move(built);
        ties = tie_report.ties_discarded + tie_report.ties_coerced;
    } else {
        instances = disaggregate(corpus, args.distinct_only);
    }
    save_instances(instances, args.output);
    write_meta(args.output, "build", resolved, input_hash);
    std::cout << "instances=" << instances.size() << " ties=" << ties << '\n';
    return 0;
}

struct ChunkArgs {
    std::string input, format = "jsonl", output;
    int max_tokens = 512, overlap_sentences = 1;
    bool no_chunking = false;
};

int cmd_chunk(const ChunkArgs& args) {
    ordered_json resolved = {{"input", args.input},
                             {"format", args.format},
                             {"max_tokens", args.max_tokens},
                             {"overlap_sentences", args.overlap_sentences},
                             {"no_chunking", args.no_chunking},
                             {"output", args.output}};
    std::string input_hash = file_hash(args.input);
    Corpus corpus = load_corpus(args.input, parse_format(args.format));

    ChunkingConfig config;
    config.max_tokens = args.max_tokens;
    config.overlap_sentences = args.overlap_sentences;
    config.enabled = !args.no_chunking;

    std::ostringstream lines;
    for (const Document& doc : corpus.documents) {
        for (const Chunk& chunk : chunk_document(doc.content, config)) {
            ordered_json rec;
            rec["doc_id"] = doc.doc_id;
            rec["chunk_index"] = chunk.chunk_index;
            rec["token_len"] = chunk.token_len;
            rec["text"] = chunk.text;
            lines << rec.dump() << '\n';
        }
    }
    if (args.output.empty()) {
        std::cout << lines.str();
    } else {
        write_text(args.output, lines.str());
        write_meta(args.output, "chunk", resolved, input_hash);
    }
    return 0;
}

struct TrainArgs {
    std::string input, output;
    int epochs = 4, batch_size = 32;
    double learning_rate = 0.1, l2 = 1e-4;
    std::uint64_t seed = 0;
    bool full_batch = false;
    int max_tokens = 512, overlap_sentences = 1;
    bool no_chunking = false;
};

int cmd_train(const TrainArgs& args) {
    TrainConfig config;
    config.epochs = args.epochs;
    config.batch_size = args.batch_size;
    config.learning_rate = args.learning_rate;
    config.l2 = args.l2;
    config.seed = args.seed;
    config.mode = args.full_batch ? TrainConfig::Mode::FullBatch
                                  : TrainConfig::Mode::MiniBatch;
    ChunkingConfig chunking;
    chunking.max_tokens = args.max_tokens;
    chunking.overlap_sentences = args.overlap_sentences;
    chunking.enabled = !args.no_chunking;

    ordered_json resolved = {{"input", args.input},
                             {"output", args.output},
                             {"epochs", config.epochs},
                             {"batch_size", config.batch_size},
                             {"learning_rate", config.learning_rate},
                             {"l2", config.l2},
                             {"seed", config.seed},
                             {"full_batch", args.full_batch},
                             {"max_tokens", chunking.max_tokens},
                             {"overlap_sentences", chunking.overlap_sentences},
                             {"no_chunking", args.no_chunking}};
    std::string input_hash = file_hash(args.input);

    auto instances = load_instances(args.input);
    auto expanded = expand_for_training(instances, chunking);
    std::vector<std::string> texts;
    texts.reserve(expanded.size());
    for (const TrainInstance& inst : expanded) texts.push_back(inst.content);
    FeatureSpace space = fit_feature_space(texts);
    LinearModel model = train(expanded, space, config);
    save_model(model, space, args.output);
    write_meta(args.output, "train", resolved, input_hash);
    std::cout << "instances=" << instances.size()
              << " model_inputs=" << expanded.size()
              << " vocabulary=" << space.size() << '\n';
    return 0;
}

struct PredictArgs {
    std::string model, input, format = "jsonl", external_preds, output;
    std::string eval_gold, tie_policy = "discard", precedence;
    int max_tokens = 512, overlap_sentences = 1;
    bool no_chunking = false;
};

int evaluate_predictions(const std::vector<Prediction>& preds,
                         const fs::path& gold_path, CorpusFormat format,
                         const TiePolicy& policy, const ordered_json& resolved,
                         const std::string& input_hash,
                         const std::string& output, const std::string& model,
                         bool chunking) {
    std::vector<std::string> tie_docs;
    auto gold = load_gold(gold_path, format, policy, &tie_docs);
    std::vector<Prediction> usable;
    for (const Prediction& pred : preds)
        if (gold.count(pred.doc_id)) usable.push_back(pred);
    if (usable.size() != preds.size() && usable.size() + tie_docs.size() < preds.size())
        // A prediction without any gold entry is a data error; ties are not.
        confusion(preds, gold);  // throws naming the missing document
    EvalResult result = metrics(confusion(usable, gold));
    result.avg_confidence = average_confidence(usable);

    ordered_json out = report_envelope("eval", resolved, input_hash);
    out["model"] = model;
    out["chunking"] = chunking;
    out["gold_ties_discarded"] = tie_docs;
    out["metrics"] = eval_result_json(result);
    emit_report(out, output);
    std::cout << eval_table(result, "eval", model, chunking);
    return 0;
}

int cmd_predict(const PredictArgs& args) {
    TiePolicy policy = make_tie_policy(args.tie_policy, args.precedence);
    ChunkingConfig chunking;
    chunking.max_tokens = args.max_tokens;
    chunking.overlap_sentences = args.overlap_sentences;
    chunking.enabled = !args.no_chunking;

    ordered_json resolved = {{"model", args.model},
                             {"input", args.input},
                             {"format", args.format},
                             {"external_preds", args.external_preds},
                             {"max_tokens", chunking.max_tokens},
                             {"overlap_sentences", chunking.overlap_sentences},
                             {"no_chunking", args.no_chunking},
                             {"tie_policy", args.tie_policy},
                             {"output", args.output}};

    std::vector<Prediction> preds;
    std::string input_hash;
    std::string model_name;
    if (!args.external_preds.empty()) {
        input_hash = file_hash(args.external_preds);
        preds = import_external_predictions(args.external_preds);
        model_name = "external";
    } else {
        if (args.model.empty() || args.input.empty())
            throw std::runtime_error(
                "predict needs either --external-preds or both --model and --input");
        input_hash = file_hash(args.input);
        auto [model, space] = load_model(args.model);
        Corpus corpus = load_corpus(args.input, parse_format(args.format));
        preds.reserve(corpus.documents.size());
        for (const Document& doc : corpus.documents)
            preds.push_back(predict_document(model, space, doc.doc_id,
                                             doc.content, chunking));
        model_name = "tfidf-logreg";
    }

    if (!args.output.empty()) {
        std::ostringstream lines;
        for (const Prediction& pred : preds)
            lines << predictions_json(pred).dump() << '\n';
        write_text(args.output, lines.str());
        write_meta(args.output, "predict", resolved, input_hash);
    }
    if (!args.eval_gold.empty())
        return evaluate_predictions(preds, args.eval_gold,
                                    parse_format(args.format), policy, resolved,
                                    input_hash, "", model_name,
                                    chunking.enabled);
    if (args.output.empty())
        for (const Prediction& pred : preds)
            std::cout << predictions_json(pred).dump() << '\n';
    return 0;
}

struct EvalArgs {
    std::string preds, gold, format = "jsonl", output;
    std::string tie_policy = "discard", precedence;
};

int cmd_eval(const EvalArgs& args) {
    ordered_json resolved = {{"preds", args.preds},
                             {"gold", args.gold},
                             {"format", args.format},
                             {"tie_policy", args.tie_policy},
                             {"output", args.output}};
    std::string input_hash = file_hash(args.preds);
    auto preds = load_predictions(args.preds, nullptr);
    return evaluate_predictions(preds, args.gold, parse_format(args.format),
                                make_tie_policy(args.tie_policy, args.precedence),
                                resolved, input_hash, args.output, "external",
                                false);
}

struct ExperimentArgs {
    std::string input, format = "jsonl", output, table;
    std::uint64_t seed = 0;
    double train_frac = 0.70, val_frac = 0.15, test_frac = 0.15;
    bool no_stratify = false;
    std::string tie_policy = "discard", precedence;
    bool distinct_only = false;
    int max_tokens = 512, overlap_sentences = 1;
    int epochs = 4, batch_size = 32;
    double learning_rate = 0.1, l2 = 1e-4;
    bool full_batch = false;
};

int cmd_experiment(const ExperimentArgs& args) {
    ExperimentConfig config;
    config.split.train_frac = args.train_frac;
    config.split.val_frac = args.val_frac;
    config.split.test_frac = args.test_frac;
    config.split.seed = args.seed;
    config.split.stratify_by_majority = !args.no_stratify;
    config.tie_policy = make_tie_policy(args.tie_policy, args.precedence);
    config.chunking.max_tokens = args.max_tokens;
    config.chunking.overlap_sentences = args.overlap_sentences;
    config.train.epochs = args.epochs;
    config.train.batch_size = args.batch_size;
    config.train.learning_rate = args.learning_rate;
    config.train.l2 = args.l2;
    config.train.seed = args.seed;
    config.train.mode = args.full_batch ? TrainConfig::Mode::FullBatch
                                        : TrainConfig::Mode::MiniBatch;
    config.distinct_only = args.distinct_only;

    std::string input_hash = file_hash(args.input);
    Corpus corpus = load_corpus(args.input, parse_format(args.format));
    ExperimentReport report = run_experiment(corpus, config);

    ordered_json out = report_json(report, config);
    out["input"] = args.input;
    out["input_hash"] = input_hash;
    std::string table = report_table(report);
    if (!args.table.empty()) write_text(args.table, table);
    emit_report(out, args.output);
    if (!args.output.empty()) std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-perspective stance classification toolkit"};
    app.require_subcommand(1);

    IngestArgs ingest;
    StatsArgs stats;
    SplitArgs split_args;
    BuildArgs build;
    ChunkArgs chunk;
    TrainArgs train_args;
    PredictArgs predict;
    EvalArgs eval_args;
    ExperimentArgs experiment;

    auto add_format = [](CLI::App* sub, std::string& target) {
        sub->add_option("--format", target, "Corpus format")
            ->check(CLI::IsMember({"jsonl", "csv"}))
            ->capture_default_str();
    };
    auto add_tie = [](CLI::App* sub, std::string& kind, std::string& precedence) {
        sub->add_option("--tie-policy", kind, "Majority tie handling")
            ->check(CLI::IsMember({"discard", "precedence", "error"}))
            ->capture_default_str();
        sub->add_option("--precedence", precedence,
                        "Comma-separated label order for --tie-policy precedence");
    };
    auto add_config = [](CLI::App* sub) {
        sub->set_config("--config", "",
                        "Read options from a config file (flags override)");
    };

    auto* sub = app.add_subcommand("ingest", "Load and preprocess a corpus");
    add_config(sub);
    sub->add_option("--input", ingest.input, "Corpus file")->required();
    add_format(sub, ingest.format);
    sub->add_option("--output", ingest.output, "Cleaned corpus (JSON-lines)");
    sub->add_option("--report", ingest.report, "Report path (default stdout)");
    sub->add_option("--max-tokens", ingest.max_tokens, "Document length cutoff")
        ->capture_default_str();
    sub->add_option("--lnw-policy", ingest.lnw_policy,
                    "Drop link-not-working: any annotation or majority only")
        ->check(CLI::IsMember({"any", "majority"}))
        ->capture_default_str();
    sub->add_flag("--no-dedupe", ingest.no_dedupe, "Keep duplicate contents");

    sub = app.add_subcommand("stats", "Agreement statistics and distributions");
    add_config(sub);
    sub->add_option("--input", stats.input, "Corpus file")->required();
    add_format(sub, stats.format);
    sub->add_option("--output", stats.output, "Report path (default stdout)");

    sub = app.add_subcommand("split", "Seeded train/val/test split");
    add_config(sub);
    sub->add_option("--input", split_args.input, "Corpus file")->required();
    add_format(sub, split_args.format);
    sub->add_option("--output-dir", split_args.output_dir, "Output directory")
        ->capture_default_str();
    sub->add_option("--seed", split_args.seed, "Split seed")->capture_default_str();
    sub->add_option("--train-frac", split_args.train_frac, "")->capture_default_str();
    sub->add_option("--val-frac", split_args.val_frac, "")->capture_default_str();
    sub->add_option("--test-frac", split_args.test_frac, "")->capture_default_str();
    sub->add_flag("--no-stratify", split_args.no_stratify,
                  "Disable stratification by majority label");

    sub = app.add_subcommand("build", "Construct a training dataset");
    add_config(sub);
    sub->add_option("--input", build.input, "Corpus file")->required();
    add_format(sub, build.format);
    sub->add_option("--approach", build.approach, "baseline or multi")
        ->check(CLI::IsMember({"baseline", "multi"}))
        ->capture_default_str();
    add_tie(sub, build.tie_policy, build.precedence);
    sub->add_flag("--distinct-only", build.distinct_only,
                  "One instance per distinct label (multi approach)");
    sub->add_option("--output", build.output, "Instances file (JSON-lines)")
        ->required();

    sub = app.add_subcommand("chunk", "Sentence-aware chunking");
    add_config(sub);
    sub->add_option("--input", chunk.input, "Corpus file")->required();
    add_format(sub, chunk.format);
    sub->add_option("--max-tokens", chunk.max_tokens, "Chunk token budget")
        ->capture_default_str();
    sub->add_option("--overlap-sentences", chunk.overlap_sentences,
                    "Sentences shared by consecutive chunks")
        ->capture_default_str();
    sub->add_flag("--no-chunking", chunk.no_chunking,
                  "Truncate to max-tokens instead of chunking");
    sub->add_option("--output", chunk.output, "Chunk file (default stdout)");

    sub = app.add_subcommand("train", "Train the native classifier");
    add_config(sub);
    sub->add_option("--input", train_args.input, "Instances file")->required();
    sub->add_option("--output", train_args.output, "Model file")->required();
    sub->add_option("--epochs", train_args.epochs, "")->capture_default_str();
    sub->add_option("--batch-size", train_args.batch_size, "")->capture_default_str();
    sub->add_option("--learning-rate", train_args.learning_rate, "")
        ->capture_default_str();
    sub->add_option("--l2", train_args.l2, "")->capture_default_str();
    sub->add_option("--seed", train_args.seed, "Shuffle seed")->capture_default_str();
    sub->add_flag("--full-batch", train_args.full_batch,
                  "One deterministic full-batch step per epoch");
    sub->add_option("--max-tokens", train_args.max_tokens, "Chunk token budget")
        ->capture_default_str();
    sub->add_option("--overlap-sentences", train_args.overlap_sentences, "")
        ->capture_default_str();
    sub->add_flag("--no-chunking", train_args.no_chunking,
                  "Truncate inputs instead of chunking");

    sub = app.add_subcommand("predict", "Predict with a model or import predictions");
    add_config(sub);
    sub->add_option("--model", predict.model, "Model file");
    sub->add_option("--input", predict.input, "Corpus file");
    add_format(sub, predict.format);
    sub->add_option("--external-preds", predict.external_preds,
                    "JSON-lines {doc_id, probs:[4]} to import");
    sub->add_option("--output", predict.output, "Predictions file");
    sub->add_option("--eval", predict.eval_gold,
                    "Gold corpus; evaluate predictions against it");
    add_tie(sub, predict.tie_policy, predict.precedence);
    sub->add_option("--max-tokens", predict.max_tokens, "")->capture_default_str();
    sub->add_option("--overlap-sentences", predict.overlap_sentences, "")
        ->capture_default_str();
    sub->add_flag("--no-chunking", predict.no_chunking, "");

    sub = app.add_subcommand("eval", "Evaluate a predictions file");
    add_config(sub);
    sub->add_option("--preds", eval_args.preds, "Predictions file")->required();
    sub->add_option("--gold", eval_args.gold, "Gold corpus or labels file")
        ->required();
    add_format(sub, eval_args.format);
    add_tie(sub, eval_args.tie_policy, eval_args.precedence);
    sub->add_option("--output", eval_args.output, "Report path (default stdout)");

    sub = app.add_subcommand("experiment", "Run the full evaluation grid");
    add_config(sub);
    sub->add_option("--input", experiment.input, "Preprocessed corpus")->required();
    add_format(sub, experiment.format);
    sub->add_option("--output", experiment.output, "Report JSON (default stdout)");
    sub->add_option("--table", experiment.table, "Plain-text table path");
    sub->add_option("--seed", experiment.seed, "Split and training seed")
        ->capture_default_str();
    sub->add_option("--train-frac", experiment.train_frac, "")->capture_default_str();
    sub->add_option("--val-frac", experiment.val_frac, "")->capture_default_str();
    sub->add_option("--test-frac", experiment.test_frac, "")->capture_default_str();
    sub->add_flag("--no-stratify", experiment.no_stratify, "");
    add_tie(sub, experiment.tie_policy, experiment.precedence);
    sub->add_flag("--distinct-only", experiment.distinct_only,
                  "Disaggregate distinct labels only");
    sub->add_option("--max-tokens", experiment.max_tokens, "Chunk token budget")
        ->capture_default_str();
    sub->add_option("--overlap-sentences", experiment.overlap_sentences, "")
        ->capture_default_str();
    sub->add_option("--epochs", experiment.epochs, "")->capture_default_str();
    sub->add_option("--batch-size", experiment.batch_size, "")->capture_default_str();
    sub->add_option("--learning-rate", experiment.learning_rate, "")
        ->capture_default_str();
    sub->add_option("--l2", experiment.l2, "")->capture_default_str();
    sub->add_flag("--full-batch", experiment.full_batch, "");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try {
        if (app.got_subcommand("ingest")) return cmd_ingest(ingest);
        if (app.got_subcommand("stats")) return cmd_stats(stats);
        if (app.got_subcommand("split")) return cmd_split(split_args);
        if (app.got_subcommand("build")) return cmd_build(build);
        if (app.got_subcommand("chunk")) return cmd_chunk(chunk);
        if (app.got_subcommand("train")) return cmd_train(train_args);
        if (app.got_subcommand("predict")) return cmd_predict(predict);
        if (app.got_subcommand("eval")) return cmd_eval(eval_args);
        if (app.got_subcommand("experiment")) return cmd_experiment(experiment);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
