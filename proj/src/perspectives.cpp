#include "stance/perspectives.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "stance/util.hpp"

namespace stance {

namespace {

// Tied maxima of the label counts, in enum order.
std::vector<StanceLabel> plurality_candidates(
    std::span<const StanceLabel> labels) {
    std::array<int, kNumLabels> counts = {};
    for (StanceLabel l : labels)
        ++counts[static_cast<std::size_t>(label_index(l))];
    int best = 0;
    for (int c : counts) best = std::max(best, c);
    static constexpr std::array<StanceLabel, kNumLabels> kAll = {
        StanceLabel::Pro, StanceLabel::Neutral, StanceLabel::Against,
        StanceLabel::NotAbout, StanceLabel::LinkNotWorking};
    std::vector<StanceLabel> out;
    for (int i = 0; i < kNumLabels; ++i)
        if (counts[static_cast<std::size_t>(i)] == best)
            out.push_back(kAll[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace

std::optional<StanceLabel> majority_label(std::span<const StanceLabel> labels,
                                          const TiePolicy& policy) {
    if (labels.empty())
        throw std::invalid_argument("majority_label of an empty annotation list");
    auto winners = plurality_candidates(labels);
    if (winners.size() == 1) return winners.front();
    switch (policy.kind) {
        case TiePolicy::Kind::Discard:
            return std::nullopt;
        case TiePolicy::Kind::Error:
            throw std::runtime_error("majority tie under TiePolicy::Error");
        case TiePolicy::Kind::FixedPrecedence:
            for (StanceLabel l : policy.precedence)
                for (StanceLabel w : winners)
                    if (w == l) return l;
            throw std::runtime_error(
                "majority tie involves only labels outside the precedence order");
    }
    return std::nullopt;
}

std::pair<std::vector<TrainInstance>, TieReport> build_baseline_dataset(
    const Corpus& corpus, const TiePolicy& policy) {
    std::vector<TrainInstance> instances;
    TieReport report;
    std::vector<StanceLabel> labels;
    for (const Document& doc : corpus.documents) {
        labels.clear();
        for (const Annotation& ann : doc.annotations)
            labels.push_back(ann.label);
        bool tied = !strict_plurality(labels).has_value();
        std::optional<StanceLabel> major;
        try {
            major = majority_label(labels, policy);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("majority tie on document \"" + doc.doc_id +
                                     "\" under TiePolicy::Error");
        }
        if (!major) {
            ++report.ties_discarded;
            report.tie_doc_ids.push_back(doc.doc_id);
            continue;
        }
        if (tied) {
            ++report.ties_coerced;
            report.tie_doc_ids.push_back(doc.doc_id);
        }
        if (*major == StanceLabel::LinkNotWorking)
            throw std::runtime_error("document \"" + doc.doc_id +
                                     "\" has a link-not-working majority; "
                                     "preprocess the corpus first");
        TrainInstance inst;
        inst.doc_id = doc.doc_id;
        inst.query_text = doc.query_text;
        inst.content = doc.content;
        inst.label = *major;
        inst.origin = OriginKind::MajorityVote;
        inst.annotation_index = -1;
        instances.push_back(std::move(inst));
    }
    return {std::move(instances), std::move(report)};
}

std::vector<TrainInstance> disaggregate(const Corpus& corpus,
                                        bool distinct_only) {
    std::vector<TrainInstance> instances;
    for (const Document& doc : corpus.documents) {
        std::array<bool, kNumLabels> seen = {};
        for (std::size_t j = 0; j < doc.annotations.size(); ++j) {
            StanceLabel label = doc.annotations[j].label;
            if (label == StanceLabel::LinkNotWorking) continue;
            if (distinct_only) {
                auto& flag = seen[static_cast<std::size_t>(label_index(label))];
                if (flag) continue;
                flag = true;
            }
            TrainInstance inst;
            inst.doc_id = doc.doc_id;
            inst.query_text = doc.query_text;
            inst.content = doc.content;
            inst.label = label;
            inst.origin = OriginKind::Annotation;
            inst.annotation_index = static_cast<int>(j);
            instances.push_back(std::move(inst));
        }
    }
    return instances;
}

void save_instances(std::span<const TrainInstance> instances,
                    const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const TrainInstance& inst : instances) {
        nlohmann::ordered_json rec;
        rec["doc_id"] = inst.doc_id;
        rec["query_text"] = inst.query_text;
        rec["content"] = inst.content;
        rec["label"] = to_string(inst.label);
        rec["origin"] = inst.origin == OriginKind::MajorityVote ? "majority"
                                                                : "annotation";
        rec["annotation_index"] = inst.annotation_index;
        out << rec.dump() << '\n';
    }
}

std::vector<TrainInstance> load_instances(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<TrainInstance> instances;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fail = [&](const std::string& what) {
            throw std::runtime_error(path.string() + ":" +
                                     std::to_string(lineno) + ": " + what);
        };
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(std::string("invalid JSON: ") + e.what());
        }
        for (const char* field : {"doc_id", "content", "label"})
            if (!rec.contains(field) || !rec[field].is_string())
                fail(std::string("missing or non-string field \"") + field + "\"");
        TrainInstance inst;
        inst.doc_id = rec["doc_id"].get<std::string>();
        inst.query_text = rec.value("query_text", "");
        inst.content = rec["content"].get<std::string>();
        auto label = parse_label(rec["label"].get<std::string>());
        if (!label) fail("unknown label \"" + rec["label"].get<std::string>() + "\"");
        if (*label == StanceLabel::LinkNotWorking)
            fail("train instances cannot carry link-not-working");
        inst.label = *label;
        inst.origin = rec.value("origin", "majority") == "annotation"
                          ? OriginKind::Annotation
                          : OriginKind::MajorityVote;
        inst.annotation_index = rec.value("annotation_index", -1);
        instances.push_back(std::move(inst));
    }
    return instances;
}

}  // namespace stance
