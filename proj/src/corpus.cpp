#include "stance/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "stance/util.hpp"

namespace stance {

using nlohmann::json;
using nlohmann::ordered_json;

int token_count(std::string_view text) {
    int n = 0;
    bool in_token = false;
    for (char c : text) {
        bool sp = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!sp && !in_token) ++n;
        in_token = !sp;
    }
    return n;
}

std::optional<StanceLabel> strict_plurality(
    std::span<const StanceLabel> labels) {
    if (labels.empty()) return std::nullopt;
    std::array<int, kNumLabels> counts = {};
    for (StanceLabel l : labels) ++counts[static_cast<std::size_t>(label_index(l))];
    int best = -1, best_count = 0;
    bool unique = false;
    for (int i = 0; i < kNumLabels; ++i) {
        if (counts[static_cast<std::size_t>(i)] > best_count) {
            best = i;
            best_count = counts[static_cast<std::size_t>(i)];
            unique = true;
        } else if (counts[static_cast<std::size_t>(i)] == best_count) {
            unique = false;
        }
    }
    if (!unique || best < 0) return std::nullopt;
    static constexpr std::array<StanceLabel, kNumLabels> kAll = {
        StanceLabel::Pro, StanceLabel::Neutral, StanceLabel::Against,
        StanceLabel::NotAbout, StanceLabel::LinkNotWorking};
    return kAll[static_cast<std::size_t>(best)];
}

// ---------------------------------------------------------------------------
// JSON-lines I/O
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line,
                          const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " +
                             what);
}

StanceLabel parse_label_or_fail(const std::filesystem::path& path,
                                std::size_t line, const std::string& raw) {
    auto parsed = parse_label(raw);
    if (!parsed) fail_at(path, line, "unknown label \"" + raw + "\"");
    return *parsed;
}

Corpus load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Corpus corpus;
    corpus.provenance = path.string();
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_at(path, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object()) fail_at(path, lineno, "record is not an object");
        Document doc;
        for (const char* field : {"doc_id", "query_id", "query_text", "content"}) {
            if (!rec.contains(field) || !rec[field].is_string())
                fail_at(path, lineno,
                        std::string("missing or non-string field \"") + field +
                            "\"");
        }
        doc.doc_id = rec["doc_id"].get<std::string>();
        doc.query_id = rec["query_id"].get<std::string>();
        doc.query_text = rec["query_text"].get<std::string>();
        doc.content = rec["content"].get<std::string>();
        if (rec.contains("url") && rec["url"].is_string())
            doc.url = rec["url"].get<std::string>();
        if (!rec.contains("annotations") || !rec["annotations"].is_array() ||
            rec["annotations"].empty())
            fail_at(path, lineno, "field \"annotations\" must be a non-empty array");
        for (const auto& a : rec["annotations"]) {
            if (!a.is_object() || !a.contains("label") || !a["label"].is_string())
                fail_at(path, lineno, "annotation without a string \"label\"");
            Annotation ann;
            if (a.contains("annotator_id") && a["annotator_id"].is_string())
                ann.annotator_id = a["annotator_id"].get<std::string>();
            ann.label =
                parse_label_or_fail(path, lineno, a["label"].get<std::string>());
            doc.annotations.push_back(std::move(ann));
        }
        if (!seen_ids.insert(doc.doc_id).second)
            fail_at(path, lineno, "duplicate doc_id \"" + doc.doc_id + "\"");
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

void save_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const Document& doc : corpus.documents) {
        ordered_json rec;
        rec["doc_id"] = doc.doc_id;
        rec["query_id"] = doc.query_id;
        rec["query_text"] = doc.query_text;
        if (doc.url.empty())
            rec["url"] = nullptr;
        else
            rec["url"] = doc.url;
        rec["content"] = doc.content;
        rec["annotations"] = ordered_json::array();
        for (const Annotation& ann : doc.annotations) {
            ordered_json a;
            if (ann.annotator_id.empty())
                a["annotator_id"] = nullptr;
            else
                a["annotator_id"] = ann.annotator_id;
            a["label"] = to_string(ann.label);
            rec["annotations"].push_back(std::move(a));
        }
        out << rec.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// CSV I/O (RFC-4180 quoting; quoted fields may span lines)
// ---------------------------------------------------------------------------

const std::array<const char*, 8> kCsvHeader = {
    "doc_id", "query_id", "query_text", "url",
    "content", "label_1", "label_2", "label_3"};

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line where the record starts
};

std::vector<CsvRecord> read_csv(std::istream& in,
                                const std::filesystem::path& path) {
    std::vector<CsvRecord> records;
    std::string field;
    CsvRecord current;
    std::size_t lineno = 1;
    current.line = 1;
    bool in_quotes = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++lineno;
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            current.fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            ++lineno;
            current.fields.push_back(std::move(field));
            field.clear();
            if (!(current.fields.size() == 1 && current.fields[0].empty()))
                records.push_back(std::move(current));
            current = CsvRecord{};
            current.line = lineno;
        } else {
            field += c;
        }
    }
    if (in_quotes) fail_at(path, current.line, "unterminated quoted CSV field");
    if (any && (!field.empty() || !current.fields.empty())) {
        current.fields.push_back(std::move(field));
        records.push_back(std::move(current));
    }
    return records;
}

std::string csv_escape(const std::string& s) {
    bool needs_quotes = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

Corpus load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    auto records = read_csv(in, path);
    if (records.empty()) return Corpus{{}, path.string()};

    const auto& header = records.front().fields;
    if (header.size() != kCsvHeader.size())
        fail_at(path, records.front().line, "CSV header has wrong column count");
    for (std::size_t i = 0; i < kCsvHeader.size(); ++i)
        if (header[i] != kCsvHeader[i])
            fail_at(path, records.front().line,
                    "CSV header column " + std::to_string(i + 1) + " must be \"" +
                        kCsvHeader[i] + "\"");

    Corpus corpus;
    corpus.provenance = path.string();
    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != kCsvHeader.size())
            fail_at(path, rec.line,
                    "expected " + std::to_string(kCsvHeader.size()) +
                        " fields, got " + std::to_string(rec.fields.size()));
        Document doc;
        doc.doc_id = rec.fields[0];
        doc.query_id = rec.fields[1];
        doc.query_text = rec.fields[2];
        doc.url = rec.fields[3];
        doc.content = rec.fields[4];
        for (std::size_t i = 5; i < 8; ++i) {
            Annotation ann;
            ann.label = parse_label_or_fail(path, rec.line, rec.fields[i]);
            doc.annotations.push_back(std::move(ann));
        }
        if (!seen_ids.insert(doc.doc_id).second)
            fail_at(path, rec.line, "duplicate doc_id \"" + doc.doc_id + "\"");
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

void save_csv(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < kCsvHeader.size(); ++i)
        out << kCsvHeader[i] << (i + 1 < kCsvHeader.size() ? "," : "\n");
    for (const Document& doc : corpus.documents) {
        if (doc.annotations.size() != 3)
            throw std::runtime_error(
                "CSV format supports exactly 3 annotations; document \"" +
                doc.doc_id + "\" has " + std::to_string(doc.annotations.size()));
        out << csv_escape(doc.doc_id) << ',' << csv_escape(doc.query_id) << ','
            << csv_escape(doc.query_text) << ',' << csv_escape(doc.url) << ','
            << csv_escape(doc.content);
        for (const Annotation& ann : doc.annotations)
            out << ',' << to_string(ann.label);
        out << '\n';
    }
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    return format == CorpusFormat::Jsonl ? load_jsonl(path) : load_csv(path);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format) {
    if (format == CorpusFormat::Jsonl)
        save_jsonl(corpus, path);
    else
        save_csv(corpus, path);
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

std::pair<Corpus, PreprocessReport> preprocess(const Corpus& corpus,
                                               const PreprocessConfig& config) {
    if (config.max_tokens <= 0)
        throw std::invalid_argument("max_tokens must be positive");
    PreprocessReport report;
    report.input_size = static_cast<int>(corpus.documents.size());

    Corpus out;
    out.provenance = corpus.provenance;
    std::unordered_set<std::string> seen_content;
    for (const Document& doc : corpus.documents) {
        if (token_count(doc.content) > config.max_tokens) {
            ++report.too_long_removed;
            continue;
        }
        if (config.dedupe) {
            std::string key(trim(doc.content));
            if (!seen_content.insert(std::move(key)).second) {
                ++report.duplicates_removed;
                continue;
            }
        }
        bool drop_lnw = false;
        if (config.drop_link_not_working == LinkNotWorkingPolicy::AnyAnnotation) {
            for (const Annotation& ann : doc.annotations)
                if (ann.label == StanceLabel::LinkNotWorking) {
                    drop_lnw = true;
                    break;
                }
        } else {
            std::vector<StanceLabel> labels;
            labels.reserve(doc.annotations.size());
            for (const Annotation& ann : doc.annotations)
                labels.push_back(ann.label);
            drop_lnw = strict_plurality(labels) == StanceLabel::LinkNotWorking;
        }
        if (drop_lnw) {
            ++report.link_not_working_removed;
            continue;
        }
        out.documents.push_back(doc);
    }
    report.final_size = static_cast<int>(out.documents.size());
    report.empty_output = out.documents.empty();
    return {std::move(out), report};
}

// ---------------------------------------------------------------------------
// Seeded split
// ---------------------------------------------------------------------------

namespace {

// Largest-remainder apportionment of n over the fractions; remainder ties
// break toward the earlier split (train, val, test).
std::array<int, 3> largest_remainder_sizes(int n,
                                           const std::array<double, 3>& fracs) {
    std::array<int, 3> sizes;
    std::array<double, 3> remainders;
    int assigned = 0;
    for (int j = 0; j < 3; ++j) {
        double exact = fracs[static_cast<std::size_t>(j)] * n;
        sizes[static_cast<std::size_t>(j)] = static_cast<int>(std::floor(exact));
        remainders[static_cast<std::size_t>(j)] =
            exact - sizes[static_cast<std::size_t>(j)];
        assigned += sizes[static_cast<std::size_t>(j)];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return remainders[static_cast<std::size_t>(a)] >
               remainders[static_cast<std::size_t>(b)];
    });
    for (int k = 0; k < n - assigned; ++k)
        ++sizes[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    return sizes;
}

}  // namespace

SplitResult split(const Corpus& corpus, const SplitSpec& spec) {
    const std::array<double, 3> fracs = {spec.train_frac, spec.val_frac,
                                         spec.test_frac};
    for (double f : fracs)
        if (!(f > 0.0 && f < 1.0))
            throw std::invalid_argument("split fractions must lie in (0,1)");
    if (std::abs(fracs[0] + fracs[1] + fracs[2] - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must sum to 1");
    const int n = static_cast<int>(corpus.documents.size());
    if (n == 0) throw std::invalid_argument("cannot split an empty corpus");

    const std::array<int, 3> totals = largest_remainder_sizes(n, fracs);

    // Strata: one per plurality label plus a pool for ties (and for the
    // unstratified mode, which uses a single pool).
    constexpr int kTieStratum = kNumLabels;
    std::array<std::vector<int>, kNumLabels + 1> strata;
    if (spec.stratify_by_majority) {
        for (int i = 0; i < n; ++i) {
            const auto& anns = corpus.documents[static_cast<std::size_t>(i)].annotations;
            std::vector<StanceLabel> labels;
            labels.reserve(anns.size());
            for (const Annotation& a : anns) labels.push_back(a.label);
            auto major = strict_plurality(labels);
            int s = major ? label_index(*major) : kTieStratum;
            strata[static_cast<std::size_t>(s)].push_back(i);
        }
    } else {
        for (int i = 0; i < n; ++i) strata[0].push_back(i);
    }

    std::mt19937_64 rng(spec.seed);
    for (auto& stratum : strata) deterministic_shuffle(stratum, rng);

    // Per-stratum quotas: floor allocations first, then extras in global
    // fractional-remainder order, capped by each split's remaining capacity
    // toward the exact largest-remainder totals.
    struct Extra {
        double remainder;
        int stratum;
        int split;
    };
    std::array<std::array<int, 3>, kNumLabels + 1> quota = {};
    std::array<int, kNumLabels + 1> needs = {};
    std::array<int, 3> capacity = totals;
    std::vector<Extra> extras;
    for (int s = 0; s <= kNumLabels; ++s) {
        int ns = static_cast<int>(strata[static_cast<std::size_t>(s)].size());
        if (ns == 0) continue;
        int base_sum = 0;
        for (int j = 0; j < 3; ++j) {
            double exact = fracs[static_cast<std::size_t>(j)] * ns;
            int base = static_cast<int>(std::floor(exact));
            quota[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = base;
            capacity[static_cast<std::size_t>(j)] -= base;
            base_sum += base;
            extras.push_back({exact - base, s, j});
        }
        needs[static_cast<std::size_t>(s)] = ns - base_sum;
    }
    std::stable_sort(extras.begin(), extras.end(), [](const Extra& a, const Extra& b) {
        if (a.remainder != b.remainder) return a.remainder > b.remainder;
        if (a.stratum != b.stratum) return a.stratum < b.stratum;
        return a.split < b.split;
    });
    for (const Extra& e : extras) {
        if (needs[static_cast<std::size_t>(e.stratum)] > 0 &&
            capacity[static_cast<std::size_t>(e.split)] > 0) {
            ++quota[static_cast<std::size_t>(e.stratum)][static_cast<std::size_t>(e.split)];
            --needs[static_cast<std::size_t>(e.stratum)];
            --capacity[static_cast<std::size_t>(e.split)];
        }
    }
    // Forced leftovers (a stratum still needing slots while only one split
    // has capacity) go wherever capacity remains, in remainder order.
    for (const Extra& e : extras) {
        while (needs[static_cast<std::size_t>(e.stratum)] > 0 &&
               capacity[static_cast<std::size_t>(e.split)] > 0) {
            ++quota[static_cast<std::size_t>(e.stratum)][static_cast<std::size_t>(e.split)];
            --needs[static_cast<std::size_t>(e.stratum)];
            --capacity[static_cast<std::size_t>(e.split)];
        }
    }

    std::array<std::vector<int>, 3> members;
    for (int s = 0; s <= kNumLabels; ++s) {
        const auto& stratum = strata[static_cast<std::size_t>(s)];
        std::size_t pos = 0;
        for (int j = 0; j < 3; ++j) {
            int take = quota[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
            for (int k = 0; k < take; ++k)
                members[static_cast<std::size_t>(j)].push_back(stratum[pos++]);
        }
    }

    SplitResult result;
    std::array<Corpus*, 3> outs = {&result.train, &result.val, &result.test};
    for (int j = 0; j < 3; ++j) {
        auto& idx = members[static_cast<std::size_t>(j)];
        std::sort(idx.begin(), idx.end());  // keep input order within splits
        outs[static_cast<std::size_t>(j)]->provenance = corpus.provenance;
        for (int i : idx)
            outs[static_cast<std::size_t>(j)]->documents.push_back(
                corpus.documents[static_cast<std::size_t>(i)]);
    }
    return result;
}

}  // namespace stance
