#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "stance/perspectives.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace stance;
using namespace testsupport;
using L = StanceLabel;

namespace {

Document make_doc(const std::string& id, const std::string& content,
                  std::vector<L> labels) {
    Document doc;
    doc.doc_id = id;
    doc.query_id = "q";
    doc.query_text = "query";
    doc.content = content;
    for (L l : labels) doc.annotations.push_back({"", l});
    return doc;
}

}  // namespace

TEST_CASE("majority_label resolves pluralities and honors the tie policy") {
    TiePolicy discard;
    CHECK(majority_label(std::vector<L>{L::Pro, L::Pro, L::Against}, discard) ==
          L::Pro);
    CHECK(!majority_label(std::vector<L>{L::Pro, L::Neutral, L::Against}, discard)
               .has_value());

    TiePolicy precedence;
    precedence.kind = TiePolicy::Kind::FixedPrecedence;
    precedence.precedence = {L::Neutral, L::Pro, L::Against, L::NotAbout};
    CHECK(majority_label(std::vector<L>{L::Pro, L::Neutral, L::Against},
                         precedence) == L::Neutral);
    CHECK(majority_label(std::vector<L>{L::Pro, L::Against, L::Against},
                         precedence) == L::Against);

    TiePolicy error;
    error.kind = TiePolicy::Kind::Error;
    CHECK_THROWS(majority_label(std::vector<L>{L::Pro, L::Against}, error));
    CHECK(majority_label(std::vector<L>{L::Pro, L::Pro}, error) == L::Pro);

    CHECK_THROWS(majority_label(std::vector<L>{}, discard));
}

TEST_CASE("majority_label is permutation invariant") {
    std::mt19937_64 rng(44);
    TiePolicy policy;
    policy.kind = TiePolicy::Kind::FixedPrecedence;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<L> labels;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i)
            labels.push_back(kClassOrder[static_cast<std::size_t>(rng() % 4)]);
        auto base = majority_label(labels, policy);
        auto shuffled = labels;
        deterministic_shuffle(shuffled, rng);
        CHECK(majority_label(shuffled, policy) == base);
    }
}

TEST_CASE("three annotations resolve without a tie iff some label repeats") {
    TiePolicy discard;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                std::vector<L> labels = {kClassOrder[static_cast<std::size_t>(a)],
                                         kClassOrder[static_cast<std::size_t>(b)],
                                         kClassOrder[static_cast<std::size_t>(c)]};
                bool repeats = a == b || b == c || a == c;
                CHECK(majority_label(labels, discard).has_value() == repeats);
            }
}

TEST_CASE("build_baseline_dataset keeps one majority instance per document") {
    Corpus corpus;
    corpus.documents = {make_doc("d1", "alpha", {L::Pro, L::Pro, L::Pro}),
                        make_doc("d2", "beta", {L::Neutral, L::Neutral, L::Pro}),
                        make_doc("d3", "gamma", {L::Pro, L::Neutral, L::Against})};

    SUBCASE("discard drops the split document and reports it") {
        auto [instances, report] = build_baseline_dataset(corpus, {});
        REQUIRE(instances.size() == 2);
        CHECK(instances[0].label == L::Pro);
        CHECK(instances[1].label == L::Neutral);
        CHECK(instances[0].origin == OriginKind::MajorityVote);
        CHECK(instances[0].annotation_index == -1);
        CHECK(report.ties_discarded == 1);
        CHECK(report.tie_doc_ids == std::vector<std::string>{"d3"});
    }
    SUBCASE("precedence coerces the split document") {
        TiePolicy policy;
        policy.kind = TiePolicy::Kind::FixedPrecedence;
        policy.precedence = {L::Neutral, L::Pro, L::Against, L::NotAbout};
        auto [instances, report] = build_baseline_dataset(corpus, policy);
        REQUIRE(instances.size() == 3);
        CHECK(instances[2].label == L::Neutral);
        CHECK(report.ties_coerced == 1);
    }
    SUBCASE("error policy names the offending document") {
        TiePolicy policy;
        policy.kind = TiePolicy::Kind::Error;
        CHECK_THROWS_WITH_AS(build_baseline_dataset(corpus, policy),
                             doctest::Contains("d3"), std::runtime_error);
    }
}

TEST_CASE("build_baseline_dataset recovers planted two-vote majorities") {
    std::mt19937_64 rng(77);
    Corpus corpus;
    std::map<std::string, L> planted;
    for (int i = 0; i < 60; ++i) {
        L major = kClassOrder[static_cast<std::size_t>(rng() % 4)];
        L minor = kClassOrder[static_cast<std::size_t>(rng() % 4)];
        while (minor == major)
            minor = kClassOrder[static_cast<std::size_t>(rng() % 4)];
        std::vector<L> labels = {major, major, minor};
        deterministic_shuffle(labels, rng);
        std::string id = "d" + std::to_string(i);
        corpus.documents.push_back(make_doc(id, "content " + id, labels));
        planted[id] = major;
    }
    auto [instances, report] = build_baseline_dataset(corpus, {});
    CHECK(instances.size() == 60);
    CHECK(report.ties_discarded == 0);
    for (const TrainInstance& inst : instances)
        CHECK(inst.label == planted.at(inst.doc_id));
}

TEST_CASE("disaggregate repeats documents per annotation") {
    Corpus corpus;
    corpus.documents = {make_doc("d1", "alpha", {L::Pro, L::Pro, L::Against})};

    auto all = disaggregate(corpus, false);
    REQUIRE(all.size() == 3);
    CHECK(all[0].label == L::Pro);
    CHECK(all[1].label == L::Pro);
    CHECK(all[2].label == L::Against);
    CHECK(all[0].annotation_index == 0);
    CHECK(all[2].annotation_index == 2);
    for (const auto& inst : all) {
        CHECK(inst.origin == OriginKind::Annotation);
        CHECK(inst.content == "alpha");
    }

    auto distinct = disaggregate(corpus, true);
    REQUIRE(distinct.size() == 2);
    CHECK(distinct[0].label == L::Pro);
    CHECK(distinct[1].label == L::Against);
}

TEST_CASE("disaggregate sizes follow the annotation counts") {
    std::mt19937_64 rng(31);
    CorpusGenOptions options;
    for (int trial = 0; trial < 20; ++trial) {
        options.n_docs = 1 + static_cast<int>(rng() % 40);
        options.n_annotations = 1 + static_cast<int>(rng() % 5);
        Corpus corpus = random_corpus(rng, options);
        std::size_t total = 0;
        for (const Document& doc : corpus.documents)
            total += doc.annotations.size();
        CHECK(disaggregate(corpus, false).size() == total);
        CHECK(disaggregate(corpus, true).size() <= total);
    }

    // 354 documents x 3 annotations
    options.n_docs = 354;
    options.n_annotations = 3;
    Corpus corpus = random_corpus(rng, options);
    CHECK(disaggregate(corpus, false).size() == 1062);
}

TEST_CASE("on unanimous corpora disaggregation replicates the baseline") {
    std::mt19937_64 rng(53);
    Corpus corpus;
    for (int i = 0; i < 40; ++i) {
        L label = kClassOrder[static_cast<std::size_t>(rng() % 4)];
        corpus.documents.push_back(
            make_doc("d" + std::to_string(i), "content " + std::to_string(i),
                     {label, label, label}));
    }
    auto [baseline, report] = build_baseline_dataset(corpus, {});
    auto all = disaggregate(corpus, false);
    auto distinct = disaggregate(corpus, true);

    auto pairs = [](const std::vector<TrainInstance>& instances) {
        std::multiset<std::pair<std::string, int>> out;
        for (const auto& inst : instances)
            out.insert({inst.content, class_index(inst.label)});
        return out;
    };
    auto base_pairs = pairs(baseline);
    auto triple = base_pairs;
    triple.insert(base_pairs.begin(), base_pairs.end());
    triple.insert(base_pairs.begin(), base_pairs.end());
    CHECK(pairs(all) == triple);
    CHECK(pairs(distinct) == base_pairs);
}

TEST_CASE("train instances round-trip through JSON-lines") {
    Corpus corpus;
    corpus.documents = {make_doc("d1", "alpha beta", {L::Pro, L::Neutral, L::Pro}),
                        make_doc("d2", "gamma", {L::Against, L::Against, L::Against})};
    auto instances = disaggregate(corpus, false);
    TempDir dir;
    save_instances(instances, dir.file("inst.jsonl"));
    auto loaded = load_instances(dir.file("inst.jsonl"));
    CHECK(loaded == instances);

    write_file(dir.file("bad.jsonl"),
               R"({"doc_id":"x","content":"c","label":"link-not-working"})" "\n");
    CHECK_THROWS(load_instances(dir.file("bad.jsonl")));
}
