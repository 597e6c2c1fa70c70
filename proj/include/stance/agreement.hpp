#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stance/corpus.hpp"

namespace stance {

struct AgreementReport {
    double fleiss_kappa = 0.0;
    double pairwise_agreement = 0.0;
    std::map<std::string, int> per_label_counts;
    int n_items = 0;
    int n_raters = 0;
};

enum class DisagreementLevel { Unanimous, Majority, Split };

const char* to_string(DisagreementLevel level);

// items: per-item category count vectors, every row summing to n_raters.
// kappa = (P - Pe) / (1 - Pe); defined as 1.0 when every rating falls in a
// single category (Pe = 1, agreement trivially perfect).
double fleiss_kappa(const std::vector<std::vector<int>>& items, int n_raters);

// Mean per-item fraction of agreeing rater pairs (the uncorrected P from
// the kappa computation).
double pairwise_agreement(const std::vector<std::vector<int>>& items,
                          int n_raters);

// Unanimous if one distinct label, Split if no label repeats, else Majority.
DisagreementLevel disagreement_level(std::span<const StanceLabel> annotations);

// Corpus-level report over all five label categories. Requires every
// document to carry the same number of annotations.
AgreementReport analyze_agreement(const Corpus& corpus);

// Histogram indexed by DisagreementLevel.
std::array<int, 3> disagreement_histogram(const Corpus& corpus);

}  // namespace stance
