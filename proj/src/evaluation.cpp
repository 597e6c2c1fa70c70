#include "stance/evaluation.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "stance/util.hpp"

namespace stance {

using nlohmann::ordered_json;

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
        for (std::int64_t v : row) t += v;
    return t;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (int c = 0; c < kNumClasses; ++c)
        t += counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    return t;
}

ConfusionMatrix confusion(std::span<const Prediction> preds,
                          const std::map<std::string, StanceLabel>& gold) {
    ConfusionMatrix cm;
    for (const Prediction& pred : preds) {
        auto it = gold.find(pred.doc_id);
        if (it == gold.end())
            throw std::runtime_error("no gold label for document \"" +
                                     pred.doc_id + "\"");
        int g = class_index(it->second);
        int p = class_index(pred.label);
        if (g < 0 || p < 0)
            throw std::invalid_argument(
                "link-not-working labels cannot be evaluated (document \"" +
                pred.doc_id + "\")");
        ++cm.counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
    }
    return cm;
}

EvalResult metrics(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) throw std::invalid_argument("empty confusion matrix");

    EvalResult result;
    result.n_docs = total;
    result.accuracy =
        100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);

    double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        std::int64_t tp = cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        std::int64_t fp = 0, fn = 0;
        for (int o = 0; o < kNumClasses; ++o) {
            if (o == c) continue;
            fp += cm.counts[static_cast<std::size_t>(o)][static_cast<std::size_t>(c)];
            fn += cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)];
        }
        // 0/0 conventions: precision/recall with no support are 0.
        double p = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        double r = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        auto& cls = result.per_class[static_cast<std::size_t>(c)];
        cls.precision = 100.0 * p;
        cls.recall = 100.0 * r;
        cls.f1 = 100.0 * f1;
        cls.support = tp + fn;
        macro_p += p;
        macro_r += r;
        macro_f1 += f1;
    }
    result.precision = 100.0 * macro_p / kNumClasses;
    result.recall = 100.0 * macro_r / kNumClasses;
    result.f1 = 100.0 * macro_f1 / kNumClasses;
    return result;
}

double average_confidence(std::span<const Prediction> preds) {
    if (preds.empty())
        throw std::invalid_argument("average_confidence of no predictions");
    double sum = 0.0;
    for (const Prediction& pred : preds) sum += pred.confidence;
    return sum / static_cast<double>(preds.size());
}

// ---------------------------------------------------------------------------
// Experiment grid
// ---------------------------------------------------------------------------

namespace {

std::uint64_t corpus_fingerprint(const Corpus& corpus) {
    std::uint64_t h = fnv1a64("corpus");
    for (const Document& doc : corpus.documents) {
        h = fnv1a64(doc.doc_id, h);
        h = fnv1a64(doc.query_text, h);
        h = fnv1a64(doc.content, h);
        for (const Annotation& ann : doc.annotations)
            h = fnv1a64(to_string(ann.label), h);
    }
    return h;
}

const char* tie_policy_name(TiePolicy::Kind kind) {
    switch (kind) {
        case TiePolicy::Kind::Discard: return "discard";
        case TiePolicy::Kind::FixedPrecedence: return "precedence";
        case TiePolicy::Kind::Error: return "error";
    }
    return "?";
}

std::array<LevelStats, 3> level_breakdown(
    std::span<const Prediction> preds,
    std::span<const DisagreementLevel> levels,
    std::span<const StanceLabel> gold_labels) {
    std::array<double, 3> conf_sum = {};
    std::array<int, 3> correct = {};
    std::array<int, 3> count = {};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto lvl = static_cast<std::size_t>(levels[i]);
        ++count[lvl];
        conf_sum[lvl] += preds[i].confidence;
        if (preds[i].label == gold_labels[i]) ++correct[lvl];
    }
    std::array<LevelStats, 3> out = {};
    for (std::size_t l = 0; l < 3; ++l) {
        out[l].n_docs = count[l];
        if (count[l] > 0) {
            out[l].avg_confidence = conf_sum[l] / count[l];
            out[l].accuracy = 100.0 * correct[l] / count[l];
        }
    }
    return out;
}

}  // namespace

ExperimentReport run_experiment(const Corpus& preprocessed,
                                const ExperimentConfig& config) {
    SplitResult splits = split(preprocessed, config.split);

    ExperimentReport report;
    report.n_train = static_cast<int>(splits.train.documents.size());
    report.n_val = static_cast<int>(splits.val.documents.size());
    report.n_test = static_cast<int>(splits.test.documents.size());
    report.corpus_fingerprint = corpus_fingerprint(preprocessed);
    report.config_fingerprint = fnv1a64(experiment_config_json(config).dump());

    // Test gold: always majority labels, whatever the training paradigm.
    std::map<std::string, StanceLabel> gold;
    std::vector<const Document*> eval_docs;
    std::vector<StanceLabel> gold_labels;
    std::vector<DisagreementLevel> levels;
    std::vector<StanceLabel> buffer;
    std::uint64_t test_fp = fnv1a64("test-set");
    for (const Document& doc : splits.test.documents) {
        buffer.clear();
        for (const Annotation& ann : doc.annotations) buffer.push_back(ann.label);
        std::optional<StanceLabel> major;
        try {
            major = majority_label(buffer, config.tie_policy);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("majority tie on test document \"" +
                                     doc.doc_id + "\" under TiePolicy::Error");
        }
        if (!major) {
            ++report.test_ties_discarded;
            report.tie_doc_ids.push_back(doc.doc_id);
            continue;
        }
        gold[doc.doc_id] = *major;
        eval_docs.push_back(&doc);
        gold_labels.push_back(*major);
        levels.push_back(disagreement_level(buffer));
        test_fp = fnv1a64(doc.doc_id, test_fp);
        test_fp = fnv1a64(to_string(*major), test_fp);
        test_fp = fnv1a64(doc.content, test_fp);
    }
    report.test_fingerprint = test_fp;

    auto [baseline_instances, tie_report] =
        build_baseline_dataset(splits.train, config.tie_policy);
    auto multi_instances = disaggregate(splits.train, config.distinct_only);

    const std::array<std::pair<const char*, bool>, 4> grid = {{
        {"baseline", false},
        {"baseline", true},
        {"multi-perspective", false},
        {"multi-perspective", true},
    }};
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto& [approach, use_chunking] = grid[g];
        const auto& base = std::string_view(approach) == "baseline"
                               ? baseline_instances
                               : multi_instances;
        ChunkingConfig chunking = config.chunking;
        chunking.enabled = use_chunking;

        auto expanded = expand_for_training(base, chunking);
        std::vector<std::string> texts;
        texts.reserve(expanded.size());
        for (const TrainInstance& inst : expanded) texts.push_back(inst.content);
        FeatureSpace space = fit_feature_space(texts);
        LinearModel model = train(expanded, space, config.train);

        ExperimentCell& cell = report.cells[g];
        cell.approach = approach;
        cell.chunking = use_chunking;
        cell.train_instances = static_cast<int>(base.size());
        cell.model_inputs = static_cast<int>(expanded.size());
        cell.test_fingerprint = test_fp;
        cell.predictions.reserve(eval_docs.size());
        for (const Document* doc : eval_docs)
            cell.predictions.push_back(predict_document(
                model, space, doc->doc_id, doc->content, chunking));

        cell.result = metrics(confusion(cell.predictions, gold));
        cell.result.avg_confidence = average_confidence(cell.predictions);
        cell.result.by_level =
            level_breakdown(cell.predictions, levels, gold_labels);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

nlohmann::ordered_json experiment_config_json(const ExperimentConfig& config) {
    ordered_json j;
    j["split"] = {{"train_frac", config.split.train_frac},
                  {"val_frac", config.split.val_frac},
                  {"test_frac", config.split.test_frac},
                  {"seed", config.split.seed},
                  {"stratify_by_majority", config.split.stratify_by_majority}};
    ordered_json precedence = ordered_json::array();
    for (StanceLabel l : config.tie_policy.precedence)
        precedence.push_back(to_string(l));
    j["tie_policy"] = {{"kind", tie_policy_name(config.tie_policy.kind)},
                       {"precedence", precedence}};
    j["chunking"] = {{"max_tokens", config.chunking.max_tokens},
                     {"overlap_sentences", config.chunking.overlap_sentences}};
    j["train"] = {{"epochs", config.train.epochs},
                  {"batch_size", config.train.batch_size},
                  {"learning_rate", config.train.learning_rate},
                  {"l2", config.train.l2},
                  {"seed", config.train.seed},
                  {"mode", config.train.mode == TrainConfig::Mode::FullBatch
                               ? "full_batch"
                               : "mini_batch"}};
    j["distinct_only"] = config.distinct_only;
    return j;
}

nlohmann::ordered_json eval_result_json(const EvalResult& result) {
    ordered_json j;
    j["accuracy"] = result.accuracy;
    j["precision"] = result.precision;
    j["recall"] = result.recall;
    j["f1"] = result.f1;
    j["avg_confidence"] = result.avg_confidence;
    j["n_docs"] = result.n_docs;
    j["per_class"] = ordered_json::array();
    for (int c = 0; c < kNumClasses; ++c) {
        const auto& cls = result.per_class[static_cast<std::size_t>(c)];
        j["per_class"].push_back(
            {{"label", to_string(kClassOrder[static_cast<std::size_t>(c)])},
             {"precision", cls.precision},
             {"recall", cls.recall},
             {"f1", cls.f1},
             {"support", cls.support}});
    }
    j["by_disagreement"] = ordered_json::array();
    static constexpr std::array<DisagreementLevel, 3> kLevels = {
        DisagreementLevel::Unanimous, DisagreementLevel::Majority,
        DisagreementLevel::Split};
    for (std::size_t l = 0; l < 3; ++l) {
        const LevelStats& stats = result.by_level[l];
        j["by_disagreement"].push_back({{"level", to_string(kLevels[l])},
                                        {"n_docs", stats.n_docs},
                                        {"avg_confidence", stats.avg_confidence},
                                        {"accuracy", stats.accuracy}});
    }
    return j;
}

nlohmann::ordered_json report_json(const ExperimentReport& report,
                                   const ExperimentConfig& config) {
    ordered_json j;
    j["report"] = "experiment";
    j["config"] = experiment_config_json(config);
    j["corpus_fingerprint"] = hex64(report.corpus_fingerprint);
    j["config_fingerprint"] = hex64(report.config_fingerprint);
    j["splits"] = {{"train", report.n_train},
                   {"val", report.n_val},
                   {"test", report.n_test}};
    j["test_set"] = {{"n_docs", report.n_test - report.test_ties_discarded},
                     {"ties_discarded", report.test_ties_discarded},
                     {"tie_doc_ids", report.tie_doc_ids},
                     {"fingerprint", hex64(report.test_fingerprint)}};
    j["cells"] = ordered_json::array();
    for (const ExperimentCell& cell : report.cells) {
        ordered_json c;
        c["approach"] = cell.approach;
        c["model"] = cell.model;
        c["chunking"] = cell.chunking;
        c["train_instances"] = cell.train_instances;
        c["model_inputs"] = cell.model_inputs;
        c["test_fingerprint"] = hex64(cell.test_fingerprint);
        c["metrics"] = eval_result_json(cell.result);
        j["cells"].push_back(std::move(c));
    }
    return j;
}

namespace {

std::string fixed2(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v;
    return out.str();
}

void table_row(std::ostringstream& out, const std::string& approach,
               const std::string& model, const std::string& chunking,
               const std::array<std::string, 5>& cells) {
    static constexpr std::array<int, 5> kWidths = {8, 8, 8, 8, 12};
    out << std::left << std::setw(19) << approach << std::setw(15) << model
        << std::setw(10) << chunking;
    out << std::right;
    for (std::size_t i = 0; i < cells.size(); ++i)
        out << std::setw(kWidths[i]) << cells[i];
    out << '\n';
}

void header_rows(std::ostringstream& out) {
    table_row(out, "Approach", "Model", "Chunking",
              {"Acc.", "Prec.", "Rec.", "F1", "Avg. Conf."});
    out << std::string(88, '-') << '\n';
}

}  // namespace

std::string eval_table(const EvalResult& result, const std::string& approach,
                       const std::string& model, bool chunking) {
    std::ostringstream out;
    header_rows(out);
    table_row(out, approach, model, chunking ? "yes" : "no",
              {fixed2(result.accuracy), fixed2(result.precision),
               fixed2(result.recall), fixed2(result.f1),
               fixed2(result.avg_confidence)});
    return out.str();
}

std::string report_table(const ExperimentReport& report) {
    std::ostringstream out;
    header_rows(out);
    for (const ExperimentCell& cell : report.cells)
        table_row(out, cell.approach, cell.model, cell.chunking ? "yes" : "no",
                  {fixed2(cell.result.accuracy), fixed2(cell.result.precision),
                   fixed2(cell.result.recall), fixed2(cell.result.f1),
                   fixed2(cell.result.avg_confidence)});
    return out.str();
}

}  // namespace stance
