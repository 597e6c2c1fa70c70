#include "stance/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "stance/util.hpp"

namespace stance {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> analyze_terms(std::string_view text) {
    std::vector<std::string> terms;
    for (std::string_view token : whitespace_tokens(text)) {
        std::string term;
        term.reserve(token.size());
        for (char c : token) {
            unsigned char u = static_cast<unsigned char>(c);
            if (std::isalnum(u))
                term += static_cast<char>(std::tolower(u));
        }
        if (!term.empty()) terms.push_back(std::move(term));
    }
    return terms;
}

FeatureSpace fit_feature_space(std::span<const std::string> texts) {
    if (texts.empty())
        throw std::invalid_argument("cannot fit a feature space on no texts");

    // df over distinct texts; duplicated training rows must not move idf.
    std::unordered_set<std::string_view> distinct;
    std::map<std::string, int> df;  // ordered: gives lexicographic indices
    long long n_docs = 0;
    for (const std::string& text : texts) {
        if (!distinct.insert(text).second) continue;
        ++n_docs;
        std::set<std::string> seen;
        for (auto& term : analyze_terms(text)) seen.insert(std::move(term));
        for (const auto& term : seen) ++df[term];
    }
    if (df.empty())
        throw std::invalid_argument(
            "no terms survive analysis; cannot fit a feature space");

    FeatureSpace space;
    space.terms.reserve(df.size());
    space.idf.reserve(df.size());
    for (const auto& [term, count] : df) {
        space.index.emplace(term, static_cast<int>(space.terms.size()));
        space.terms.push_back(term);
        space.idf.push_back(
            std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + count)) + 1.0);
    }
    return space;
}

SparseVec vectorize(std::string_view text, const FeatureSpace& space) {
    std::map<int, double> tf;
    for (const auto& term : analyze_terms(text)) {
        auto it = space.index.find(term);
        if (it != space.index.end()) tf[it->second] += 1.0;
    }
    SparseVec vec;
    vec.reserve(tf.size());
    double norm_sq = 0.0;
    for (auto& [idx, count] : tf) {
        double v = count * space.idf[static_cast<std::size_t>(idx)];
        norm_sq += v * v;
        vec.emplace_back(idx, v);
    }
    if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [idx, v] : vec) v *= inv;
    }
    return vec;
}

// ---------------------------------------------------------------------------
// Optimizer core
// ---------------------------------------------------------------------------

namespace {

std::array<double, kNumClasses> raw_scores(std::span<const double> weights,
                                           const std::array<double, kNumClasses>& bias,
                                           int n_features, const SparseVec& x) {
    std::array<double, kNumClasses> scores = bias;
    for (int c = 0; c < kNumClasses; ++c) {
        const double* row = weights.data() +
                            static_cast<std::size_t>(c) *
                                static_cast<std::size_t>(n_features);
        double acc = 0.0;
        for (const auto& [idx, val] : x) acc += row[idx] * val;
        scores[static_cast<std::size_t>(c)] += acc;
    }
    return scores;
}

std::array<double, kNumClasses> softmax(std::array<double, kNumClasses> scores) {
    double mx = scores[0];
    for (double s : scores) mx = std::max(mx, s);
    double total = 0.0;
    for (double& s : scores) {
        s = std::exp(s - mx);
        total += s;
    }
    for (double& s : scores) s /= total;
    return scores;
}

double run_pass(const detail::TrainData& data, std::span<const double> weights,
                const std::array<double, kNumClasses>& bias, double l2,
                int n_features, std::vector<double>* grad_weights,
                std::array<double, kNumClasses>* grad_bias) {
    if (grad_weights) {
        grad_weights->assign(
            static_cast<std::size_t>(kNumClasses) *
                static_cast<std::size_t>(n_features),
            0.0);
        grad_bias->fill(0.0);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const double factor = data.weights[i] / data.weight_sum;
        const int y = data.labels[i];
        auto probs = softmax(raw_scores(weights, bias, n_features, data.rows[i]));
        loss -= factor *
                std::log(std::max(probs[static_cast<std::size_t>(y)], 1e-300));
        if (!grad_weights) continue;
        for (int c = 0; c < kNumClasses; ++c) {
            const double coef =
                factor * (probs[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0));
            (*grad_bias)[static_cast<std::size_t>(c)] += coef;
            double* row = grad_weights->data() +
                          static_cast<std::size_t>(c) *
                              static_cast<std::size_t>(n_features);
            for (const auto& [idx, val] : data.rows[i]) row[idx] += coef * val;
        }
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
        loss += 0.5 * l2 * weights[k] * weights[k];
        if (grad_weights) (*grad_weights)[k] += l2 * weights[k];
    }
    return loss;
}

}  // namespace

namespace detail {

double loss(const TrainData& data, std::span<const double> weights,
            const std::array<double, kNumClasses>& bias, double l2,
            int n_features) {
    return run_pass(data, weights, bias, l2, n_features, nullptr, nullptr);
}

double loss_and_gradient(const TrainData& data, std::span<const double> weights,
                         const std::array<double, kNumClasses>& bias, double l2,
                         int n_features, std::vector<double>& grad_weights,
                         std::array<double, kNumClasses>& grad_bias) {
    return run_pass(data, weights, bias, l2, n_features, &grad_weights,
                    &grad_bias);
}

std::array<double, kNumClasses> softmax_scores(const LinearModel& model,
                                               const SparseVec& x) {
    int n_features =
        static_cast<int>(model.weights.size() / static_cast<std::size_t>(kNumClasses));
    return softmax(raw_scores(model.weights, model.bias, n_features, x));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

int label_class_or_throw(const TrainInstance& inst) {
    int y = class_index(inst.label);
    if (y < 0)
        throw std::invalid_argument("train instance \"" + inst.doc_id +
                                    "\" carries a link-not-working label");
    return y;
}

}  // namespace

LinearModel train(std::span<const TrainInstance> instances,
                  const FeatureSpace& space, const TrainConfig& config) {
    if (instances.empty())
        throw std::invalid_argument("cannot train on an empty instance list");
    if (config.epochs < 1 || config.batch_size < 1 ||
        config.learning_rate <= 0.0 || config.l2 < 0.0)
        throw std::invalid_argument("invalid train config");

    const int n_features = space.size();
    LinearModel model;
    model.config = config;
    model.weights.assign(static_cast<std::size_t>(kNumClasses) *
                             static_cast<std::size_t>(n_features),
                         0.0);

    std::vector<double> grad_weights;
    std::array<double, kNumClasses> grad_bias;
    auto apply = [&](const detail::TrainData& batch) {
        run_pass(batch, model.weights, model.bias, config.l2, n_features,
                 &grad_weights, &grad_bias);
        for (std::size_t k = 0; k < model.weights.size(); ++k)
            model.weights[k] -= config.learning_rate * grad_weights[k];
        for (int c = 0; c < kNumClasses; ++c)
            model.bias[static_cast<std::size_t>(c)] -=
                config.learning_rate * grad_bias[static_cast<std::size_t>(c)];
    };

    if (config.mode == TrainConfig::Mode::FullBatch) {
        // Fold exact (content, label) duplicates into multiplicities: the
        // mean gradient of a k-fold replicated dataset is then computed
        // through the identical float operations as the original's.
        detail::TrainData data;
        std::unordered_map<std::string, std::size_t> row_of;
        for (const TrainInstance& inst : instances) {
            const int y = label_class_or_throw(inst);
            std::string key = std::to_string(y) + ':' + inst.content;
            auto [it, inserted] = row_of.emplace(std::move(key), data.rows.size());
            if (inserted) {
                data.rows.push_back(vectorize(inst.content, space));
                data.labels.push_back(y);
                data.weights.push_back(1.0);
            } else {
                data.weights[it->second] += 1.0;
            }
        }
        data.weight_sum = static_cast<double>(instances.size());
        for (int epoch = 0; epoch < config.epochs; ++epoch) apply(data);
        return model;
    }

    std::vector<SparseVec> rows;
    std::vector<int> labels;
    rows.reserve(instances.size());
    labels.reserve(instances.size());
    for (const TrainInstance& inst : instances) {
        labels.push_back(label_class_or_throw(inst));
        rows.push_back(vectorize(inst.content, space));
    }
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::mt19937_64 rng(config.seed);
    const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, order.size());
            detail::TrainData batch;
            batch.weight_sum = static_cast<double>(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.rows.push_back(rows[order[i]]);
                batch.labels.push_back(labels[order[i]]);
                batch.weights.push_back(1.0);
            }
            apply(batch);
        }
    }
    return model;
}

std::vector<TrainInstance> expand_for_training(
    std::span<const TrainInstance> instances, const ChunkingConfig& chunking) {
    std::vector<TrainInstance> expanded;
    for (const TrainInstance& inst : instances) {
        if (!chunking.enabled) {
            TrainInstance copy = inst;
            copy.content = truncate_tokens(inst.content, chunking.max_tokens);
            expanded.push_back(std::move(copy));
            continue;
        }
        for (const Chunk& chunk : chunk_document(inst.content, chunking)) {
            TrainInstance copy = inst;
            copy.content = chunk.text;
            expanded.push_back(std::move(copy));
        }
    }
    return expanded;
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

namespace {

StanceLabel argmax_label(const std::array<double, kNumClasses>& probs) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (probs[static_cast<std::size_t>(c)] > probs[static_cast<std::size_t>(best)])
            best = c;  // ties keep the earlier class
    return kClassOrder[static_cast<std::size_t>(best)];
}

Prediction prediction_from_probs(std::string doc_id,
                                 const std::array<double, kNumClasses>& probs) {
    Prediction pred;
    pred.doc_id = std::move(doc_id);
    pred.probs = probs;
    pred.label = argmax_label(probs);
    pred.confidence = probs[static_cast<std::size_t>(class_index(pred.label))];
    return pred;
}

}  // namespace

std::vector<ChunkScore> predict_chunks(const LinearModel& model,
                                       const FeatureSpace& space,
                                       std::span<const Chunk> chunks) {
    if (chunks.empty())
        throw std::invalid_argument("predict_chunks on an empty chunk list");
    std::vector<ChunkScore> scores;
    scores.reserve(chunks.size());
    for (const Chunk& chunk : chunks) {
        ChunkScore score;
        score.chunk_index = chunk.chunk_index;
        score.token_len = chunk.token_len;
        score.probs = detail::softmax_scores(model, vectorize(chunk.text, space));
        scores.push_back(score);
    }
    return scores;
}

std::array<double, kNumClasses> aggregate_chunk_predictions(
    std::span<const ChunkScore> per_chunk) {
    if (per_chunk.empty())
        throw std::invalid_argument("cannot aggregate zero chunk predictions");
    std::array<double, kNumClasses> acc = {};
    double total_len = 0.0;
    for (const ChunkScore& score : per_chunk) {
        if (score.token_len <= 0)
            throw std::invalid_argument("chunk weight must be positive");
        const double w = static_cast<double>(score.token_len);
        total_len += w;
        for (int c = 0; c < kNumClasses; ++c)
            acc[static_cast<std::size_t>(c)] +=
                w * score.probs[static_cast<std::size_t>(c)];
    }
    for (double& v : acc) v /= total_len;
    return acc;
}

Prediction predict_document(const LinearModel& model, const FeatureSpace& space,
                            std::string doc_id, std::string_view content,
                            const ChunkingConfig& chunking) {
    if (trim(content).empty())
        throw std::invalid_argument("cannot predict on empty content (doc \"" +
                                    doc_id + "\")");
    if (!chunking.enabled) {
        std::string truncated = truncate_tokens(content, chunking.max_tokens);
        auto probs =
            detail::softmax_scores(model, vectorize(truncated, space));
        return prediction_from_probs(std::move(doc_id), probs);
    }
    auto chunks = chunk_document(content, chunking);
    auto scores = predict_chunks(model, space, chunks);
    Prediction pred = prediction_from_probs(std::move(doc_id),
                                            aggregate_chunk_predictions(scores));
    pred.per_chunk = std::move(scores);
    return pred;
}

// ---------------------------------------------------------------------------
// External predictions
// ---------------------------------------------------------------------------

std::vector<Prediction> import_external_predictions(
    const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    auto warn = [&](const std::string& msg) {
        if (warnings)
            warnings->push_back(msg);
        else
            std::cerr << "warning: " << msg << '\n';
    };

    std::vector<Prediction> preds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fail = [&](const std::string& what) -> void {
            throw std::runtime_error(path.string() + ":" +
                                     std::to_string(lineno) + ": " + what);
        };
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("doc_id") ||
            !rec["doc_id"].is_string())
            fail("record needs a string \"doc_id\"");
        if (!rec.contains("probs") || !rec["probs"].is_array() ||
            rec["probs"].size() != kNumClasses)
            fail("field \"probs\" must be an array of " +
                 std::to_string(kNumClasses) + " numbers");
        std::array<double, kNumClasses> probs = {};
        double sum = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
            const auto& v = rec["probs"][static_cast<std::size_t>(c)];
            if (!v.is_number()) fail("probs entries must be numbers");
            double p = v.get<double>();
            if (!std::isfinite(p) || p < 0.0)
                fail("probs entries must be finite and non-negative");
            probs[static_cast<std::size_t>(c)] = p;
            sum += p;
        }
        if (sum <= 0.0) fail("probs must not all be zero");
        if (std::abs(sum - 1.0) > 1e-6)
            warn(path.string() + ":" + std::to_string(lineno) +
                 ": probs sum to " + std::to_string(sum) + "; renormalized");
        for (double& p : probs) p /= sum;
        preds.push_back(
            prediction_from_probs(rec["doc_id"].get<std::string>(), probs));
    }
    return preds;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {
constexpr const char* kModelFormat = "stance.model";
constexpr int kModelVersion = 1;
}  // namespace

std::string serialize_model(const LinearModel& model, const FeatureSpace& space) {
    ordered_json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["class_order"] = ordered_json::array();
    for (StanceLabel l : kClassOrder) j["class_order"].push_back(to_string(l));
    j["train_config"] = {
        {"epochs", model.config.epochs},
        {"batch_size", model.config.batch_size},
        {"learning_rate", model.config.learning_rate},
        {"l2", model.config.l2},
        {"seed", model.config.seed},
        {"mode", model.config.mode == TrainConfig::Mode::FullBatch
                     ? "full_batch"
                     : "mini_batch"},
    };
    j["vocabulary"] = space.terms;
    j["idf"] = space.idf;
    j["weights"] = ordered_json::array();
    const std::size_t V = space.terms.size();
    for (int c = 0; c < kNumClasses; ++c) {
        auto row = ordered_json::array();
        for (std::size_t t = 0; t < V; ++t)
            row.push_back(model.weights[static_cast<std::size_t>(c) * V + t]);
        j["weights"].push_back(std::move(row));
    }
    j["bias"] = model.bias;
    return j.dump();
}

void save_model(const LinearModel& model, const FeatureSpace& space,
                const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << serialize_model(model, space) << '\n';
}

std::pair<LinearModel, FeatureSpace> load_model(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": invalid model file: " +
                                 e.what());
    }
    if (!j.is_object() || j.value("format", "") != kModelFormat)
        throw std::runtime_error(path.string() + ": not a stance model file");
    if (j.value("version", -1) != kModelVersion)
        throw std::runtime_error(path.string() +
                                 ": unsupported model format version " +
                                 std::to_string(j.value("version", -1)));

    FeatureSpace space;
    space.terms = j.at("vocabulary").get<std::vector<std::string>>();
    space.idf = j.at("idf").get<std::vector<double>>();
    if (space.idf.size() != space.terms.size())
        throw std::runtime_error(path.string() + ": vocabulary/idf size mismatch");
    for (std::size_t i = 0; i < space.terms.size(); ++i)
        space.index.emplace(space.terms[i], static_cast<int>(i));

    LinearModel model;
    const auto& rows = j.at("weights");
    if (!rows.is_array() || rows.size() != kNumClasses)
        throw std::runtime_error(path.string() + ": malformed weight matrix");
    for (const auto& row : rows) {
        auto values = row.get<std::vector<double>>();
        if (values.size() != space.terms.size())
            throw std::runtime_error(path.string() + ": malformed weight matrix");
        model.weights.insert(model.weights.end(), values.begin(), values.end());
    }
    auto bias = j.at("bias").get<std::vector<double>>();
    if (bias.size() != kNumClasses)
        throw std::runtime_error(path.string() + ": malformed bias vector");
    std::copy(bias.begin(), bias.end(), model.bias.begin());

    const auto& tc = j.at("train_config");
    model.config.epochs = tc.value("epochs", 4);
    model.config.batch_size = tc.value("batch_size", 32);
    model.config.learning_rate = tc.value("learning_rate", 0.1);
    model.config.l2 = tc.value("l2", 1e-4);
    model.config.seed = tc.value("seed", std::uint64_t{0});
    model.config.mode = tc.value("mode", "mini_batch") == "full_batch"
                            ? TrainConfig::Mode::FullBatch
                            : TrainConfig::Mode::MiniBatch;
    return {std::move(model), std::move(space)};
}

}  // namespace stance
