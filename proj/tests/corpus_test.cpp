#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include "stance/corpus.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace stance;
using namespace testsupport;

TEST_CASE("token_count counts maximal non-whitespace runs") {
    CHECK(token_count("") == 0);
    CHECK(token_count("   \t\n ") == 0);
    CHECK(token_count("pro and against") == 3);
    CHECK(token_count("  a\tb\nc  ") == 3);

    std::string big;
    for (int i = 0; i < 10000; ++i) {
        if (i) big += ' ';
        big += "w" + std::to_string(i);
    }
    CHECK(token_count(big) == 10000);
}

TEST_CASE("token_count is additive over single-space concatenation") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::string a = random_text(rng, 0, 12, true);
        std::string b = random_text(rng, 0, 12, true);
        CHECK(token_count(a + " " + b) == token_count(a) + token_count(b));
    }
}

TEST_CASE("load_corpus parses JSON-lines records") {
    TempDir dir;
    write_file(dir.file("c.jsonl"),
               R"({"doc_id":"a","query_id":"q1","query_text":"uniforms","url":null,"content":"text one","annotations":[{"annotator_id":null,"label":"PRO"},{"annotator_id":"w1","label":"pro"},{"annotator_id":null,"label":"Against"}]})"
               "\n"
               R"({"doc_id":"b","query_id":"q1","query_text":"uniforms","url":"http://x","content":"text two","annotations":[{"annotator_id":null,"label":"neutral"},{"annotator_id":null,"label":"neutral"},{"annotator_id":null,"label":"neutral"}]})"
               "\n");
    Corpus corpus = load_corpus(dir.file("c.jsonl"), CorpusFormat::Jsonl);
    REQUIRE(corpus.documents.size() == 2);
    CHECK(corpus.documents[0].annotations.size() == 3);
    CHECK(corpus.documents[0].annotations[0].label == StanceLabel::Pro);
    CHECK(corpus.documents[0].annotations[2].label == StanceLabel::Against);
    CHECK(corpus.documents[0].url.empty());
    CHECK(corpus.documents[1].url == "http://x");
    CHECK(corpus.documents[1].annotations[1].annotator_id.empty());
}

TEST_CASE("load_corpus rejects bad records with line numbers") {
    TempDir dir;
    std::string good =
        R"({"doc_id":"d$","query_id":"q","query_text":"t","url":null,"content":"c","annotations":[{"annotator_id":null,"label":"pro"}]})";
    auto line = [&](const std::string& id) {
        std::string s = good;
        s.replace(s.find('$'), 1, id);
        return s;
    };

    SUBCASE("unknown label cites its line") {
        std::string bad = line("5");
        bad.replace(bad.find("\"pro\""), 5, "\"maybe\"");
        write_file(dir.file("c.jsonl"), line("1") + "\n" + line("2") + "\n" +
                                            line("3") + "\n" + line("4") + "\n" +
                                            bad + "\n");
        CHECK_THROWS_WITH_AS(load_corpus(dir.file("c.jsonl"), CorpusFormat::Jsonl),
                             doctest::Contains(":5:"), std::runtime_error);
        CHECK_THROWS_WITH_AS(load_corpus(dir.file("c.jsonl"), CorpusFormat::Jsonl),
                             doctest::Contains("maybe"), std::runtime_error);
    }
    SUBCASE("duplicate doc_id is rejected") {
        write_file(dir.file("c.jsonl"), line("1") + "\n" + line("1") + "\n");
        CHECK_THROWS_WITH_AS(load_corpus(dir.file("c.jsonl"), CorpusFormat::Jsonl),
                             doctest::Contains("duplicate doc_id"),
                             std::runtime_error);
    }
    SUBCASE("malformed JSON cites its line") {
        write_file(dir.file("c.jsonl"), line("1") + "\n{not json\n");
        CHECK_THROWS_WITH_AS(load_corpus(dir.file("c.jsonl"), CorpusFormat::Jsonl),
                             doctest::Contains(":2:"), std::runtime_error);
    }
    SUBCASE("empty annotations are rejected") {
        std::string bad = line("1");
        bad.replace(bad.find("[{"), std::string::npos, "[]}");
        write_file(dir.file("c.jsonl"), bad + "\n");
        CHECK_THROWS(load_corpus(dir.file("c.jsonl"), CorpusFormat::Jsonl));
    }
}

TEST_CASE("corpus round-trips through both formats") {
    std::mt19937_64 rng(99);
    CorpusGenOptions options;
    options.nasty_strings = true;
    options.allow_link_not_working = true;

    SUBCASE("jsonl") {
        for (int trial = 0; trial < 10; ++trial) {
            options.n_docs = 1 + static_cast<int>(rng() % 12);
            options.n_annotations = 1 + static_cast<int>(rng() % 5);
            Corpus corpus = random_corpus(rng, options);
            TempDir dir;
            save_corpus(corpus, dir.file("c.jsonl"), CorpusFormat::Jsonl);
            Corpus loaded = load_corpus(dir.file("c.jsonl"), CorpusFormat::Jsonl);
            CHECK(loaded.documents == corpus.documents);
        }
    }
    SUBCASE("csv") {
        options.n_annotations = 3;  // the CSV schema is fixed at 3
        for (int trial = 0; trial < 10; ++trial) {
            options.n_docs = 1 + static_cast<int>(rng() % 12);
            Corpus corpus = random_corpus(rng, options);
            for (auto& doc : corpus.documents)
                for (auto& ann : doc.annotations) ann.annotator_id.clear();
            TempDir dir;
            save_corpus(corpus, dir.file("c.csv"), CorpusFormat::Csv);
            Corpus loaded = load_corpus(dir.file("c.csv"), CorpusFormat::Csv);
            CHECK(loaded.documents == corpus.documents);
        }
    }
    SUBCASE("csv save requires exactly three annotations") {
        options.n_annotations = 2;
        options.n_docs = 1;
        Corpus corpus = random_corpus(rng, options);
        TempDir dir;
        CHECK_THROWS(save_corpus(corpus, dir.file("c.csv"), CorpusFormat::Csv));
    }
    SUBCASE("csv load rejects a wrong header") {
        TempDir dir;
        write_file(dir.file("c.csv"), "doc_id,query,oops\n");
        CHECK_THROWS(load_corpus(dir.file("c.csv"), CorpusFormat::Csv));
    }
}

namespace {

Document make_doc(const std::string& id, const std::string& content,
                  std::vector<StanceLabel> labels) {
    Document doc;
    doc.doc_id = id;
    doc.query_id = "q";
    doc.query_text = "query";
    doc.content = content;
    for (StanceLabel l : labels) doc.annotations.push_back({"", l});
    return doc;
}

}  // namespace

TEST_CASE("preprocess removes duplicates, long documents and dead links") {
    const auto pro3 = std::vector<StanceLabel>(3, StanceLabel::Pro);

    SUBCASE("exact duplicates beyond the first occurrence go") {
        Corpus corpus;
        corpus.documents = {make_doc("d1", "same text", pro3),
                            make_doc("d2", "  same text  ", pro3),
                            make_doc("d3", "other text", pro3)};
        auto [cleaned, report] = preprocess(corpus, {});
        CHECK(cleaned.documents.size() == 2);
        CHECK(cleaned.documents[0].doc_id == "d1");
        CHECK(report.duplicates_removed == 1);
        CHECK(report.final_size == 2);
    }
    SUBCASE("length boundary: 8000 stays, 8001 goes") {
        std::string t8000, t8001;
        for (int i = 0; i < 8001; ++i) {
            if (i < 8000) t8000 += "w ";
            t8001 += "w ";
        }
        Corpus corpus;
        corpus.documents = {make_doc("keep", t8000, pro3),
                            make_doc("drop", t8001, pro3)};
        auto [cleaned, report] = preprocess(corpus, {});
        CHECK(cleaned.documents.size() == 1);
        CHECK(cleaned.documents[0].doc_id == "keep");
        CHECK(report.too_long_removed == 1);
    }
    SUBCASE("link-not-working policies") {
        Corpus corpus;
        corpus.documents = {
            make_doc("minority", "a", {StanceLabel::Pro, StanceLabel::Pro,
                                       StanceLabel::LinkNotWorking}),
            make_doc("majority", "b",
                     {StanceLabel::LinkNotWorking, StanceLabel::LinkNotWorking,
                      StanceLabel::Pro}),
            make_doc("clean", "c", pro3)};

        PreprocessConfig any;
        auto [cleaned_any, report_any] = preprocess(corpus, any);
        CHECK(cleaned_any.documents.size() == 1);
        CHECK(report_any.link_not_working_removed == 2);

        PreprocessConfig majority;
        majority.drop_link_not_working = LinkNotWorkingPolicy::MajorityOnly;
        auto [cleaned_major, report_major] = preprocess(corpus, majority);
        CHECK(cleaned_major.documents.size() == 2);
        CHECK(report_major.link_not_working_removed == 1);
    }
    SUBCASE("empty output is legal and flagged") {
        Corpus corpus;
        corpus.documents = {make_doc("d", "x", {StanceLabel::LinkNotWorking})};
        auto [cleaned, report] = preprocess(corpus, {});
        CHECK(cleaned.documents.empty());
        CHECK(report.empty_output);
    }
}

TEST_CASE("preprocess is idempotent") {
    std::mt19937_64 rng(11);
    CorpusGenOptions options;
    options.allow_link_not_working = true;
    for (int trial = 0; trial < 20; ++trial) {
        options.n_docs = 1 + static_cast<int>(rng() % 30);
        Corpus corpus = random_corpus(rng, options);
        PreprocessConfig config;
        config.max_tokens = 20;
        auto [once, report1] = preprocess(corpus, config);
        auto [twice, report2] = preprocess(once, config);
        CHECK(twice.documents == once.documents);
        CHECK(report2.too_long_removed == 0);
        CHECK(report2.duplicates_removed == 0);
        CHECK(report2.link_not_working_removed == 0);
    }
}

TEST_CASE("split matches the largest-remainder sizes and is deterministic") {
    std::mt19937_64 rng(5);
    CorpusGenOptions options;

    SUBCASE("100 docs give 70/15/15 and reruns are identical") {
        options.n_docs = 100;
        Corpus corpus = random_corpus(rng, options);
        SplitSpec spec;
        spec.seed = 42;
        SplitResult a = split(corpus, spec);
        SplitResult b = split(corpus, spec);
        CHECK(a.train.documents.size() == 70);
        CHECK(a.val.documents.size() == 15);
        CHECK(a.test.documents.size() == 15);
        CHECK(a.train.documents == b.train.documents);
        CHECK(a.val.documents == b.val.documents);
        CHECK(a.test.documents == b.test.documents);
    }
    SUBCASE("10 docs give 7/2/1 (remainder tie goes to val)") {
        options.n_docs = 10;
        Corpus corpus = random_corpus(rng, options);
        SplitResult r = split(corpus, SplitSpec{});
        CHECK(r.train.documents.size() == 7);
        CHECK(r.val.documents.size() == 2);
        CHECK(r.test.documents.size() == 1);
    }
    SUBCASE("different seeds give different memberships") {
        options.n_docs = 100;
        Corpus corpus = random_corpus(rng, options);
        SplitSpec one;
        one.seed = 1;
        SplitSpec two;
        two.seed = 2;
        SplitResult a = split(corpus, one);
        SplitResult b = split(corpus, two);
        CHECK(a.train.documents != b.train.documents);
    }
    SUBCASE("bad fractions are rejected") {
        options.n_docs = 4;
        Corpus corpus = random_corpus(rng, options);
        SplitSpec spec;
        spec.train_frac = 0.75;  // 0.75 + 0.15 + 0.15 = 1.05
        CHECK_THROWS(split(corpus, spec));
        spec = SplitSpec{};
        spec.val_frac = 0.0;
        spec.train_frac = 0.85;
        CHECK_THROWS(split(corpus, spec));
        CHECK_THROWS(split(Corpus{}, SplitSpec{}));
    }
}

TEST_CASE("split partitions the corpus for any fractions and seed") {
    std::mt19937_64 rng(17);
    CorpusGenOptions options;
    for (int trial = 0; trial < 30; ++trial) {
        options.n_docs = 3 + static_cast<int>(rng() % 80);
        Corpus corpus = random_corpus(rng, options);
        SplitSpec spec;
        double a = 0.2 + 0.5 * (static_cast<double>(rng() % 1000) / 1000.0);
        double b = (1.0 - a) * (0.2 + 0.6 * (static_cast<double>(rng() % 1000) / 1000.0));
        spec.train_frac = a;
        spec.val_frac = b;
        spec.test_frac = 1.0 - a - b;
        spec.seed = rng();
        spec.stratify_by_majority = (trial % 2 == 0);
        SplitResult r = split(corpus, spec);

        std::multiset<std::string> seen;
        for (const Corpus* part : {&r.train, &r.val, &r.test})
            for (const Document& doc : part->documents) seen.insert(doc.doc_id);
        std::multiset<std::string> expected;
        for (const Document& doc : corpus.documents) expected.insert(doc.doc_id);
        CHECK(seen == expected);
        CHECK(seen.size() == corpus.documents.size());
    }
}

TEST_CASE("stratified split keeps per-class proportions within one document") {
    std::mt19937_64 rng(23);
    CorpusGenOptions options;
    for (int trial = 0; trial < 20; ++trial) {
        options.n_docs = 30 + static_cast<int>(rng() % 120);
        Corpus corpus = random_corpus(rng, options);
        SplitSpec spec;
        spec.seed = rng();
        SplitResult r = split(corpus, spec);

        auto majority_of = [](const Document& doc) -> std::string {
            std::vector<StanceLabel> labels;
            for (const auto& ann : doc.annotations) labels.push_back(ann.label);
            auto m = strict_plurality(labels);
            return m ? to_string(*m) : "tie";
        };
        std::map<std::string, int> class_totals;
        for (const Document& doc : corpus.documents) ++class_totals[majority_of(doc)];

        const std::array<std::pair<const Corpus*, double>, 3> parts = {{
            {&r.train, spec.train_frac},
            {&r.val, spec.val_frac},
            {&r.test, spec.test_frac},
        }};
        for (const auto& [part, frac] : parts) {
            std::map<std::string, int> counts;
            for (const Document& doc : part->documents) ++counts[majority_of(doc)];
            for (const auto& [cls, total] : class_totals) {
                double ideal = frac * total;
                CHECK(std::abs(counts[cls] - ideal) <= 1.0 + 1e-9);
            }
        }
    }
}
