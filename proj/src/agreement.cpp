#include "stance/agreement.hpp"

#include <stdexcept>

namespace stance {

const char* to_string(DisagreementLevel level) {
    switch (level) {
        case DisagreementLevel::Unanimous: return "unanimous";
        case DisagreementLevel::Majority: return "majority";
        case DisagreementLevel::Split: return "split";
    }
    return "?";
}

namespace {

struct AgreementTerms {
    double mean_pairwise = 0.0;  // P-bar
    double chance = 0.0;         // Pe
    bool single_category = false;
};

AgreementTerms agreement_terms(const std::vector<std::vector<int>>& items,
                               int n_raters) {
    if (items.empty())
        throw std::invalid_argument("agreement requires at least one item");
    if (n_raters < 2)
        throw std::invalid_argument("agreement requires n_raters >= 2");
    const std::size_t k = items.front().size();
    if (k == 0) throw std::invalid_argument("items must have categories");

    std::vector<long long> category_totals(k, 0);
    double sum_pi = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& row = items[i];
        if (row.size() != k)
            throw std::invalid_argument("item " + std::to_string(i) +
                                        " has inconsistent category count");
        long long row_sum = 0;
        long long sq = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (row[j] < 0)
                throw std::invalid_argument("item " + std::to_string(i) +
                                            " has a negative count");
            row_sum += row[j];
            sq += static_cast<long long>(row[j]) * row[j];
            category_totals[j] += row[j];
        }
        if (row_sum != n_raters)
            throw std::invalid_argument(
                "item " + std::to_string(i) + " counts sum to " +
                std::to_string(row_sum) + ", expected " + std::to_string(n_raters));
        sum_pi += static_cast<double>(sq - n_raters) /
                  (static_cast<double>(n_raters) * (n_raters - 1));
    }

    AgreementTerms t;
    t.mean_pairwise = sum_pi / static_cast<double>(items.size());
    const double total =
        static_cast<double>(items.size()) * static_cast<double>(n_raters);
    int nonzero = 0;
    for (std::size_t j = 0; j < k; ++j) {
        if (category_totals[j] > 0) ++nonzero;
        double p = static_cast<double>(category_totals[j]) / total;
        t.chance += p * p;
    }
    t.single_category = nonzero <= 1;
    return t;
}

}  // namespace

double fleiss_kappa(const std::vector<std::vector<int>>& items, int n_raters) {
    AgreementTerms t = agreement_terms(items, n_raters);
    // All ratings in one category: agreement is trivially perfect.
    if (t.single_category) return 1.0;
    return (t.mean_pairwise - t.chance) / (1.0 - t.chance);
}

double pairwise_agreement(const std::vector<std::vector<int>>& items,
                          int n_raters) {
    return agreement_terms(items, n_raters).mean_pairwise;
}

DisagreementLevel disagreement_level(
    std::span<const StanceLabel> annotations) {
    if (annotations.empty())
        throw std::invalid_argument("disagreement_level of an empty annotation list");
    std::array<int, kNumLabels> counts = {};
    for (StanceLabel l : annotations)
        ++counts[static_cast<std::size_t>(label_index(l))];
    int distinct = 0, max_count = 0;
    for (int c : counts) {
        if (c > 0) ++distinct;
        max_count = std::max(max_count, c);
    }
    if (distinct == 1) return DisagreementLevel::Unanimous;
    if (max_count == 1) return DisagreementLevel::Split;
    return DisagreementLevel::Majority;
}

AgreementReport analyze_agreement(const Corpus& corpus) {
    if (corpus.documents.empty())
        throw std::invalid_argument("cannot analyze an empty corpus");
    const std::size_t n_raters = corpus.documents.front().annotations.size();
    std::vector<std::vector<int>> items;
    items.reserve(corpus.documents.size());
    AgreementReport report;
    for (const Document& doc : corpus.documents) {
        if (doc.annotations.size() != n_raters)
            throw std::invalid_argument(
                "Fleiss kappa needs a fixed rater count per item; document \"" +
                doc.doc_id + "\" has " + std::to_string(doc.annotations.size()) +
                " annotations, expected " + std::to_string(n_raters));
        std::vector<int> row(kNumLabels, 0);
        for (const Annotation& ann : doc.annotations) {
            ++row[static_cast<std::size_t>(label_index(ann.label))];
            ++report.per_label_counts[to_string(ann.label)];
        }
        items.push_back(std::move(row));
    }
    report.n_items = static_cast<int>(items.size());
    report.n_raters = static_cast<int>(n_raters);
    report.fleiss_kappa = fleiss_kappa(items, report.n_raters);
    report.pairwise_agreement = pairwise_agreement(items, report.n_raters);
    return report;
}

std::array<int, 3> disagreement_histogram(const Corpus& corpus) {
    std::array<int, 3> hist = {};
    std::vector<StanceLabel> labels;
    for (const Document& doc : corpus.documents) {
        labels.clear();
        for (const Annotation& ann : doc.annotations)
            labels.push_back(ann.label);
        ++hist[static_cast<std::size_t>(disagreement_level(labels))];
    }
    return hist;
}

}  // namespace stance
