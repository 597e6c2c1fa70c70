#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stance/labels.hpp"

namespace stance {

struct Annotation {
    std::string annotator_id;  // empty = unknown (MTurk gives no stable id)
    StanceLabel label = StanceLabel::Neutral;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Document {
    std::string doc_id;
    std::string query_id;
    std::string query_text;
    std::string content;
    std::vector<Annotation> annotations;  // >= 1
    std::string url;                      // empty = absent

    friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
    std::vector<Document> documents;
    std::string provenance;
};

enum class LinkNotWorkingPolicy {
    AnyAnnotation,  // drop the document if any annotation is link-not-working
    MajorityOnly,   // drop only when link-not-working wins the plurality
};

struct PreprocessConfig {
    int max_tokens = 8000;
    LinkNotWorkingPolicy drop_link_not_working =
        LinkNotWorkingPolicy::AnyAnnotation;
    bool dedupe = true;
};

struct PreprocessReport {
    int input_size = 0;
    int too_long_removed = 0;
    int duplicates_removed = 0;
    int link_not_working_removed = 0;
    int final_size = 0;
    bool empty_output = false;
};

struct SplitSpec {
    double train_frac = 0.70;
    double val_frac = 0.15;
    double test_frac = 0.15;
    std::uint64_t seed = 0;
    bool stratify_by_majority = true;
};

struct SplitResult {
    Corpus train;
    Corpus val;
    Corpus test;
};

enum class CorpusFormat { Jsonl, Csv };

// Whitespace word count: number of maximal non-whitespace runs.
int token_count(std::string_view text);

// The label with the strictly largest count, or nullopt on a tie.
std::optional<StanceLabel> strict_plurality(std::span<const StanceLabel> labels);

// Parse/serialize under the schemas documented in the README. Errors carry
// the file path and 1-based line number. CSV supports exactly 3 annotations.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format);

// Removal order: over-length documents, then exact-content duplicates
// (first occurrence kept, content compared after trimming), then the
// link-not-working policy. Idempotent.
std::pair<Corpus, PreprocessReport> preprocess(const Corpus& corpus,
                                               const PreprocessConfig& config);

// Deterministic seeded partition. Global sizes follow largest-remainder
// rounding of the fractions; with stratification, per-majority-label
// proportions hold within one document per class. Tie documents fall back
// to an unstratified pool.
SplitResult split(const Corpus& corpus, const SplitSpec& spec);

}  // namespace stance
