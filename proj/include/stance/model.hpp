#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stance/chunker.hpp"
#include "stance/labels.hpp"
#include "stance/perspectives.hpp"

namespace stance {

// Sparse feature vector: (column, value) pairs with strictly increasing
// columns.
using SparseVec = std::vector<std::pair<int, double>>;

// TF-IDF space fit on training texts. Document frequency is counted over
// distinct texts, so exact duplicates (the disaggregated dataset repeats
// each document per annotation) do not shift the idf scale.
struct FeatureSpace {
    std::vector<std::string> terms;  // index -> term, lexicographic
    std::vector<double> idf;         // ln((1+N)/(1+df)) + 1
    std::unordered_map<std::string, int> index;

    int size() const { return static_cast<int>(terms.size()); }
};

struct TrainConfig {
    enum class Mode { MiniBatch, FullBatch };
    int epochs = 4;
    int batch_size = 32;
    double learning_rate = 0.1;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
    Mode mode = Mode::MiniBatch;
};

struct LinearModel {
    std::vector<double> weights;  // kNumClasses x |V|, row-major
    std::array<double, kNumClasses> bias = {};
    TrainConfig config;  // snapshot of the run that produced the model
};

struct ChunkScore {
    int chunk_index = 0;
    int token_len = 0;
    std::array<double, kNumClasses> probs = {};
};

struct Prediction {
    std::string doc_id;
    std::array<double, kNumClasses> probs = {};
    StanceLabel label = StanceLabel::Pro;
    double confidence = 0.0;
    std::vector<ChunkScore> per_chunk;  // filled on the chunked path
};

// Lowercased alphanumeric terms (punctuation stripped) of the whitespace
// tokens of text.
std::vector<std::string> analyze_terms(std::string_view text);

FeatureSpace fit_feature_space(std::span<const std::string> texts);

// tf*idf over in-vocabulary terms, L2-normalized. All-OOV text gives the
// zero vector.
SparseVec vectorize(std::string_view text, const FeatureSpace& space);

// Softmax regression over the four stance classes, minimizing mean
// cross-entropy with an L2 penalty on the weights. MiniBatch shuffles with
// a seeded generator; FullBatch takes one deterministic step per epoch and
// folds exact-duplicate (content, label) pairs into integer multiplicities,
// which keeps training invariant under dataset replication.
LinearModel train(std::span<const TrainInstance> instances,
                  const FeatureSpace& space, const TrainConfig& config);

// Expands instances for chunk-level training: with chunking enabled each
// chunk inherits its instance's label, otherwise content is truncated to
// max_tokens.
std::vector<TrainInstance> expand_for_training(
    std::span<const TrainInstance> instances, const ChunkingConfig& chunking);

std::vector<ChunkScore> predict_chunks(const LinearModel& model,
                                       const FeatureSpace& space,
                                       std::span<const Chunk> chunks);

// Chunk-length weighted mean of the probability vectors.
std::array<double, kNumClasses> aggregate_chunk_predictions(
    std::span<const ChunkScore> per_chunk);

Prediction predict_document(const LinearModel& model, const FeatureSpace& space,
                            std::string doc_id, std::string_view content,
                            const ChunkingConfig& chunking);

// JSON-lines {doc_id, probs:[4]}. Vectors off the simplex by more than 1e-6
// are renormalized with a warning (appended to *warnings when given, else
// written to stderr). Parse errors cite the line number.
std::vector<Prediction> import_external_predictions(
    const std::filesystem::path& path,
    std::vector<std::string>* warnings = nullptr);

// Self-describing JSON model file (format tag + version + class order +
// vocabulary + idf + parameters + train config). Version mismatch on load
// is an error.
void save_model(const LinearModel& model, const FeatureSpace& space,
                const std::filesystem::path& path);
std::string serialize_model(const LinearModel& model, const FeatureSpace& space);
std::pair<LinearModel, FeatureSpace> load_model(
    const std::filesystem::path& path);

namespace detail {

// Training-set view used by the optimizer and by gradient tests.
struct TrainData {
    std::vector<SparseVec> rows;
    std::vector<int> labels;      // class indices
    std::vector<double> weights;  // per-row multiplicity
    double weight_sum = 0.0;
};

// Mean weighted cross-entropy plus (l2/2)*||W||^2; bias unregularized.
double loss(const TrainData& data, std::span<const double> weights,
            const std::array<double, kNumClasses>& bias, double l2,
            int n_features);

// Returns the loss and writes the analytic gradient.
double loss_and_gradient(const TrainData& data, std::span<const double> weights,
                         const std::array<double, kNumClasses>& bias, double l2,
                         int n_features, std::vector<double>& grad_weights,
                         std::array<double, kNumClasses>& grad_bias);

std::array<double, kNumClasses> softmax_scores(const LinearModel& model,
                                               const SparseVec& x);

}  // namespace detail

}  // namespace stance
