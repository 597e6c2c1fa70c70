#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "stance/agreement.hpp"
#include "support/oracles.hpp"

using namespace stance;
using namespace testsupport;

TEST_CASE("fleiss_kappa on the documented cases") {
    SUBCASE("two unanimous items in different categories") {
        std::vector<std::vector<int>> items = {{3, 0, 0, 0}, {0, 0, 3, 0}};
        CHECK(fleiss_kappa(items, 3) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("three identical (2,1) items give -0.5") {
        std::vector<std::vector<int>> items = {{2, 1, 0, 0}, {2, 1, 0, 0}, {2, 1, 0, 0}};
        // P = 1/3, Pe = 5/9, kappa = (1/3 - 5/9) / (4/9) = -1/2; the
        // brute-force pair-counting oracle agrees.
        CHECK(fleiss_kappa(items, 3) == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(oracle_fleiss_kappa(items) == doctest::Approx(-0.5).epsilon(1e-12));
    }
    SUBCASE("all ratings in a single category define kappa = 1") {
        std::vector<std::vector<int>> items = {{4, 0}, {4, 0}, {4, 0}};
        CHECK(fleiss_kappa(items, 4) == 1.0);
    }
}

TEST_CASE("fleiss_kappa validates its input") {
    CHECK_THROWS(fleiss_kappa({}, 3));
    CHECK_THROWS(fleiss_kappa({{2, 1}}, 1));
    CHECK_THROWS(fleiss_kappa({{2, 2}}, 3));          // row sum mismatch
    CHECK_THROWS(fleiss_kappa({{2, 1}, {2, 1, 0}}, 3));  // ragged rows
    CHECK_THROWS(fleiss_kappa({{3, -1, 1}}, 3));      // negative count
}

TEST_CASE("pairwise_agreement counts agreeing pairs") {
    CHECK(pairwise_agreement({{3, 0, 0, 0}, {0, 3, 0, 0}}, 3) == 1.0);
    CHECK(pairwise_agreement({{1, 1, 1, 0}}, 3) == 0.0);
    CHECK(pairwise_agreement({{2, 1, 0, 0}}, 3) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("kappa and pairwise agreement match the brute-force oracle") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        int n_raters = 0;
        auto items = random_rating_items(rng, 20, 5, 6, &n_raters);
        CHECK(std::abs(fleiss_kappa(items, n_raters) - oracle_fleiss_kappa(items)) <
              1e-9);
        CHECK(std::abs(pairwise_agreement(items, n_raters) - oracle_pairwise(items)) <
              1e-9);
    }
}

TEST_CASE("kappa is invariant under category and item permutations") {
    std::mt19937_64 rng(321);
    for (int trial = 0; trial < 40; ++trial) {
        int n_raters = 0;
        auto items = random_rating_items(rng, 12, 5, 5, &n_raters);
        double base = fleiss_kappa(items, n_raters);

        auto permuted = items;
        std::vector<std::size_t> category_order(items.front().size());
        for (std::size_t i = 0; i < category_order.size(); ++i) category_order[i] = i;
        deterministic_shuffle(category_order, rng);
        for (std::size_t i = 0; i < items.size(); ++i)
            for (std::size_t c = 0; c < category_order.size(); ++c)
                permuted[i][c] = items[i][category_order[c]];
        deterministic_shuffle(permuted, rng);

        CHECK(fleiss_kappa(permuted, n_raters) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("pairwise agreement is 1 exactly on all-unanimous inputs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<int>> items;
        const int k = 4;
        const int n_raters = 2 + static_cast<int>(rng() % 4);
        bool mixed = trial % 2 == 1;
        for (int i = 0; i < 8; ++i) {
            std::vector<int> row(k, 0);
            if (mixed && i == 3) {
                row[0] = n_raters - 1;
                row[1] = 1;
            } else {
                row[static_cast<std::size_t>(rng() % k)] = n_raters;
            }
            items.push_back(std::move(row));
        }
        if (mixed) {
            CHECK(pairwise_agreement(items, n_raters) < 1.0);
            CHECK(fleiss_kappa(items, n_raters) < 1.0);
        } else {
            CHECK(pairwise_agreement(items, n_raters) == 1.0);
            CHECK(fleiss_kappa(items, n_raters) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("kappa of uniformly random labels drifts to zero") {
    std::mt19937_64 rng(2718);
    std::vector<std::vector<int>> items;
    items.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
        std::vector<int> row(4, 0);
        for (int r = 0; r < 3; ++r) ++row[static_cast<std::size_t>(rng() % 4)];
        items.push_back(std::move(row));
    }
    CHECK(std::abs(fleiss_kappa(items, 3)) < 0.05);
}

TEST_CASE("disagreement_level partitions annotation multisets") {
    using L = StanceLabel;
    CHECK(disagreement_level(std::vector<L>{L::Pro, L::Pro, L::Pro}) ==
          DisagreementLevel::Unanimous);
    CHECK(disagreement_level(std::vector<L>{L::Pro, L::Pro, L::Against}) ==
          DisagreementLevel::Majority);
    CHECK(disagreement_level(std::vector<L>{L::Pro, L::Neutral, L::Against}) ==
          DisagreementLevel::Split);
    CHECK_THROWS(disagreement_level(std::vector<L>{}));

    SUBCASE("generalized rule beyond three annotations") {
        CHECK(disagreement_level(std::vector<L>{L::Pro}) ==
              DisagreementLevel::Unanimous);
        CHECK(disagreement_level(std::vector<L>{L::Pro, L::Against}) ==
              DisagreementLevel::Split);
        CHECK(disagreement_level(std::vector<L>{L::Pro, L::Pro, L::Against,
                                                L::Against}) ==
              DisagreementLevel::Majority);
        CHECK(disagreement_level(std::vector<L>{L::Pro, L::Neutral, L::Against,
                                                L::NotAbout}) ==
              DisagreementLevel::Split);
    }
    SUBCASE("all 64 three-label combinations land where expected") {
        int unanimous = 0, majority = 0, split = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c) {
                    std::vector<L> labels = {kClassOrder[static_cast<std::size_t>(a)],
                                             kClassOrder[static_cast<std::size_t>(b)],
                                             kClassOrder[static_cast<std::size_t>(c)]};
                    switch (disagreement_level(labels)) {
                        case DisagreementLevel::Unanimous: ++unanimous; break;
                        case DisagreementLevel::Majority: ++majority; break;
                        case DisagreementLevel::Split: ++split; break;
                    }
                }
        CHECK(unanimous == 4);
        CHECK(split == 24);
        CHECK(majority == 36);
    }
}

TEST_CASE("analyze_agreement reports corpus-level statistics") {
    Corpus corpus;
    auto doc = [](const std::string& id, std::vector<StanceLabel> labels) {
        Document d;
        d.doc_id = id;
        d.content = "text";
        for (StanceLabel l : labels) d.annotations.push_back({"", l});
        return d;
    };
    corpus.documents = {
        doc("a", {StanceLabel::Pro, StanceLabel::Pro, StanceLabel::Pro}),
        doc("b", {StanceLabel::Against, StanceLabel::Against, StanceLabel::Against}),
    };
    AgreementReport report = analyze_agreement(corpus);
    CHECK(report.fleiss_kappa == doctest::Approx(1.0));
    CHECK(report.pairwise_agreement == 1.0);
    CHECK(report.n_items == 2);
    CHECK(report.n_raters == 3);
    CHECK(report.per_label_counts.at("pro") == 3);
    CHECK(report.per_label_counts.at("against") == 3);

    auto histogram = disagreement_histogram(corpus);
    CHECK(histogram[0] == 2);
    CHECK(histogram[1] == 0);
    CHECK(histogram[2] == 0);

    corpus.documents.push_back(doc("c", {StanceLabel::Pro, StanceLabel::Pro}));
    CHECK_THROWS(analyze_agreement(corpus));  // varying rater count
}
