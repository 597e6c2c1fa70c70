#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stance/corpus.hpp"

namespace stance {

enum class OriginKind { MajorityVote, Annotation };

struct TrainInstance {
    std::string doc_id;
    std::string query_text;
    std::string content;
    StanceLabel label = StanceLabel::Neutral;  // never LinkNotWorking
    OriginKind origin = OriginKind::MajorityVote;
    int annotation_index = -1;  // valid when origin == Annotation

    friend bool operator==(const TrainInstance&, const TrainInstance&) = default;
};

struct TiePolicy {
    enum class Kind { Discard, FixedPrecedence, Error };
    Kind kind = Kind::Discard;
    // Highest precedence first; consulted only for FixedPrecedence.
    std::array<StanceLabel, kNumClasses> precedence = kClassOrder;
};

struct TieReport {
    int ties_discarded = 0;
    int ties_coerced = 0;
    std::vector<std::string> tie_doc_ids;
};

// Unique plurality label, or the policy outcome on a tie: Discard -> nullopt,
// FixedPrecedence -> highest-precedence label among the tied maxima,
// Error -> throws. Empty input throws.
std::optional<StanceLabel> majority_label(std::span<const StanceLabel> labels,
                                          const TiePolicy& policy);

// One instance per document that resolves to a majority label; ties are
// handled per policy and recorded (Error names the offending document).
std::pair<std::vector<TrainInstance>, TieReport> build_baseline_dataset(
    const Corpus& corpus, const TiePolicy& policy);

// distinct_only=false: one instance per (document, annotation);
// distinct_only=true: one per (document, distinct label), first-occurrence
// order. Link-not-working annotations are skipped (they carry no stance).
std::vector<TrainInstance> disaggregate(const Corpus& corpus,
                                        bool distinct_only);

// JSON-lines {doc_id, query_text, content, label, origin, annotation_index}.
void save_instances(std::span<const TrainInstance> instances,
                    const std::filesystem::path& path);
std::vector<TrainInstance> load_instances(const std::filesystem::path& path);

}  // namespace stance
