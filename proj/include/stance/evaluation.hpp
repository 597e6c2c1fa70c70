#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stance/agreement.hpp"
#include "stance/chunker.hpp"
#include "stance/corpus.hpp"
#include "stance/model.hpp"
#include "stance/perspectives.hpp"

namespace stance {

struct ConfusionMatrix {
    // rows = gold, columns = predicted, kClassOrder indexing
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts = {};

    std::int64_t total() const;
    std::int64_t trace() const;
};

struct ClassMetrics {
    double precision = 0.0;  // percentage points
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct LevelStats {
    int n_docs = 0;
    double avg_confidence = 0.0;
    double accuracy = 0.0;  // percentage points
};

struct EvalResult {
    double accuracy = 0.0;  // percentage points, macro-averaged P/R/F1
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double avg_confidence = 0.0;
    std::int64_t n_docs = 0;
    std::array<ClassMetrics, kNumClasses> per_class = {};
    std::array<LevelStats, 3> by_level = {};  // DisagreementLevel indexing
};

ConfusionMatrix confusion(std::span<const Prediction> preds,
                          const std::map<std::string, StanceLabel>& gold);

// accuracy = trace/total; per-class precision/recall with 0/0 -> 0; macro
// averages over all four classes; everything scaled to percentage points.
EvalResult metrics(const ConfusionMatrix& cm);

double average_confidence(std::span<const Prediction> preds);

// ---------------------------------------------------------------------------
// Experiment grid
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    SplitSpec split;
    TiePolicy tie_policy;
    ChunkingConfig chunking;  // max_tokens doubles as the truncation length
    TrainConfig train;
    bool distinct_only = false;
};

struct ExperimentCell {
    std::string approach;  // "baseline" | "multi-perspective"
    std::string model = "tfidf-logreg";
    bool chunking = false;
    EvalResult result;
    int train_instances = 0;  // before chunk expansion
    int model_inputs = 0;     // after chunk expansion / truncation
    std::uint64_t test_fingerprint = 0;
    std::vector<Prediction> predictions;  // in test-set order; not serialized
};

struct ExperimentReport {
    std::array<ExperimentCell, 4> cells;  // baseline no/yes, multi no/yes
    int n_train = 0;
    int n_val = 0;
    int n_test = 0;
    int test_ties_discarded = 0;
    std::vector<std::string> tie_doc_ids;
    std::uint64_t corpus_fingerprint = 0;
    std::uint64_t config_fingerprint = 0;
    std::uint64_t test_fingerprint = 0;
};

// Splits once, builds both training paradigms on the train split, trains
// and evaluates the four (approach x chunking) cells against the shared
// majority-labeled test set, and attaches the disagreement-conditioned
// confidence breakdown. Fully deterministic for a fixed config.
ExperimentReport run_experiment(const Corpus& preprocessed,
                                const ExperimentConfig& config);

nlohmann::ordered_json experiment_config_json(const ExperimentConfig& config);
nlohmann::ordered_json report_json(const ExperimentReport& report,
                                   const ExperimentConfig& config);

// Aligned plain-text grid: Approach | Model | Chunking | Acc. | Prec. |
// Rec. | F1 | Avg. Conf.
std::string report_table(const ExperimentReport& report);

nlohmann::ordered_json eval_result_json(const EvalResult& result);
std::string eval_table(const EvalResult& result, const std::string& approach,
                       const std::string& model, bool chunking);

}  // namespace stance
