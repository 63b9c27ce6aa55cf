#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spanagree/matching.hpp"
#include "spanagree/model.hpp"

namespace spanagree {

struct NoQualifyingDocuments : std::runtime_error {
    explicit NoQualifyingDocuments(const std::string& what)
        : std::runtime_error(what) {}
};

struct NoSpans : std::runtime_error {
    explicit NoSpans(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownDocument : std::runtime_error {
    std::string doc_id;
    explicit UnknownDocument(std::string id)
        : std::runtime_error("unknown document '" + id + "'"),
          doc_id(std::move(id)) {}
};

struct MissingGold : std::runtime_error {
    std::string doc_id;
    explicit MissingGold(std::string id)
        : std::runtime_error("document '" + id + "' has no gold annotation set"),
          doc_id(std::move(id)) {}
};

// How a label with no spans on either side of a pair is scored.
enum class EmptyPairRule : std::uint8_t { One, Zero, Skip };

// Bounded: recall = matched gold / total gold (never exceeds 1).
// PredictionCount: recall = correct predictions / total gold (may exceed 1
// under relaxed criteria; kept for comparison against reports that used it).
enum class RecallMode : std::uint8_t { Bounded, PredictionCount };

struct Conventions {
    EmptyPairRule empty_pair = EmptyPairRule::One;
    RecallMode recall = RecallMode::Bounded;
};

struct ScoreTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const ScoreTriple&, const ScoreTriple&) = default;
};

inline double harmonic_f1(double precision, double recall) {
    return precision + recall > 0.0
               ? 2.0 * precision * recall / (precision + recall)
               : 0.0;
}

// Empty/empty scores (1,1,1); empty vs non-empty scores 0 on the empty side.
inline ScoreTriple prf1(const MatchCounts& c,
                        RecallMode mode = RecallMode::Bounded) {
    if (c.total_predicted == 0 && c.total_gold == 0) return {1.0, 1.0, 1.0};
    const double precision =
        c.total_predicted > 0
            ? static_cast<double>(c.matched_predicted) / c.total_predicted
            : 0.0;
    const int recall_numer =
        mode == RecallMode::Bounded ? c.matched_gold : c.matched_predicted;
    const double recall =
        c.total_gold > 0 ? static_cast<double>(recall_numer) / c.total_gold
                         : 0.0;
    return {precision, recall, harmonic_f1(precision, recall)};
}

struct AggregateStat {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    long n = 0;
};

inline AggregateStat aggregate(const std::vector<double>& values) {
    AggregateStat s;
    s.n = static_cast<long>(values.size());
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.n));
    return s;
}

inline std::vector<Span> filter_label(const std::vector<Span>& spans,
                                      Label label) {
    std::vector<Span> out;
    for (const auto& s : spans)
        if (s.label == label) out.push_back(s);
    return out;
}

// One direction: `gold_spans` as gold standard, `pred_spans` as predictions,
// restricted to `label`. nullopt only under EmptyPairRule::Skip.
inline std::optional<ScoreTriple> directed_score(
    const std::vector<Span>& gold_spans, const std::vector<Span>& pred_spans,
    Criterion criterion, Label label, const Conventions& conv) {
    const auto gold = filter_label(gold_spans, label);
    const auto pred = filter_label(pred_spans, label);
    if (gold.empty() && pred.empty()) {
        switch (conv.empty_pair) {
            case EmptyPairRule::One: return ScoreTriple{1.0, 1.0, 1.0};
            case EmptyPairRule::Zero: return ScoreTriple{0.0, 0.0, 0.0};
            case EmptyPairRule::Skip: return std::nullopt;
        }
    }
    return prf1(count_matches(criterion, pred, gold), conv.recall);
}

// Mean of the two directed F1 values (each annotator as gold once).
// Symmetric in a and b.
inline std::optional<double> pairwise_agreement(const AnnotationSet& a,
                                                const AnnotationSet& b,
                                                Criterion criterion,
                                                Label label,
                                                const Conventions& conv = {}) {
    const auto ab = directed_score(a.spans, b.spans, criterion, label, conv);
    const auto ba = directed_score(b.spans, a.spans, criterion, label, conv);
    if (!ab || !ba) return std::nullopt;
    return (ab->f1 + ba->f1) / 2.0;
}

namespace detail {

inline std::vector<const AnnotationSet*> sets_of_group(const Document& doc,
                                                       Group group) {
    std::vector<const AnnotationSet*> out;
    for (const auto& s : doc.annotation_sets)
        if (s.group == group) out.push_back(&s);
    return out;
}

}  // namespace detail

// Per document with >=2 annotators of the group: mean pairwise agreement over
// all unordered pairs. Returned stat is across qualifying documents.
inline AggregateStat within_group_agreement(const Corpus& corpus, Group group,
                                            Criterion criterion, Label label,
                                            const Conventions& conv = {}) {
    std::vector<double> per_doc;
    for (const auto& doc : corpus) {
        const auto sets = detail::sets_of_group(doc, group);
        if (sets.size() < 2) continue;
        std::vector<double> pair_values;
        for (std::size_t i = 0; i < sets.size(); ++i)
            for (std::size_t j = i + 1; j < sets.size(); ++j)
                if (auto v = pairwise_agreement(*sets[i], *sets[j], criterion,
                                                label, conv))
                    pair_values.push_back(*v);
        if (pair_values.empty()) continue;
        per_doc.push_back(aggregate(pair_values).mean);
    }
    if (per_doc.empty())
        throw NoQualifyingDocuments("no document has two or more '" +
                                    group_name(group) +
                                    "' annotators with scorable pairs");
    return aggregate(per_doc);
}

struct CrossGroupResult {
    AggregateStat precision;
    AggregateStat recall;
    AggregateStat f1;
};

// Directed: every (gold-group annotator, predicted-group annotator) pair per
// document; per-document means are then aggregated across documents.
inline CrossGroupResult cross_group_agreement(const Corpus& corpus,
                                              Group gold_group,
                                              Group pred_group,
                                              Criterion criterion, Label label,
                                              const Conventions& conv = {}) {
    std::vector<double> p_doc, r_doc, f_doc;
    for (const auto& doc : corpus) {
        const auto gold_sets = detail::sets_of_group(doc, gold_group);
        const auto pred_sets = detail::sets_of_group(doc, pred_group);
        if (gold_sets.empty() || pred_sets.empty()) continue;
        std::vector<double> ps, rs, fs;
        for (const auto* g : gold_sets) {
            for (const auto* p : pred_sets) {
                const auto score =
                    directed_score(g->spans, p->spans, criterion, label, conv);
                if (!score) continue;
                ps.push_back(score->precision);
                rs.push_back(score->recall);
                fs.push_back(score->f1);
            }
        }
        if (ps.empty()) continue;
        p_doc.push_back(aggregate(ps).mean);
        r_doc.push_back(aggregate(rs).mean);
        f_doc.push_back(aggregate(fs).mean);
    }
    if (p_doc.empty())
        throw NoQualifyingDocuments("no document has annotators from both '" +
                                    group_name(gold_group) + "' and '" +
                                    group_name(pred_group) + "'");
    return {aggregate(p_doc), aggregate(r_doc), aggregate(f_doc)};
}

// Token counts pooled over all spans of the label by annotators of the group.
inline AggregateStat span_length_stats(const Corpus& corpus, Group group,
                                       Label label) {
    std::vector<double> lengths;
    for (const auto& doc : corpus)
        for (const auto& set : doc.annotation_sets)
            if (set.group == group)
                for (const auto& s : set.spans)
                    if (s.label == label)
                        lengths.push_back(static_cast<double>(s.length()));
    if (lengths.empty())
        throw NoSpans("no '" + label_name(label) + "' spans by group '" +
                      group_name(group) + "'");
    return aggregate(lengths);
}

struct EvalResult {
    std::map<Label, MatchCounts> per_label_counts;
    std::map<Label, ScoreTriple> per_label;
    MatchCounts micro_counts;
    ScoreTriple micro;
    long n_documents = 0;
};

// Pools MatchCounts componentwise over documents per label, then scores;
// micro pools over documents and labels jointly.
inline EvalResult evaluate_predictions(
    const std::map<std::string, std::vector<Span>>& gold,
    const std::map<std::string, std::vector<Span>>& predicted,
    Criterion criterion, RecallMode recall = RecallMode::Bounded) {
    for (const auto& [doc_id, spans] : predicted)
        if (!gold.contains(doc_id)) throw UnknownDocument(doc_id);
    EvalResult result;
    static const std::vector<Span> kEmpty;
    for (const auto& [doc_id, gold_spans] : gold) {
        const auto it = predicted.find(doc_id);
        const auto& pred_spans = it == predicted.end() ? kEmpty : it->second;
        for (Label label : kAllLabels) {
            result.per_label_counts[label] +=
                count_matches(criterion, filter_label(pred_spans, label),
                              filter_label(gold_spans, label));
        }
        result.micro_counts += count_matches(criterion, pred_spans, gold_spans);
        ++result.n_documents;
    }
    for (Label label : kAllLabels)
        result.per_label[label] = prf1(result.per_label_counts[label], recall);
    result.micro = prf1(result.micro_counts, recall);
    return result;
}

}  // namespace spanagree
