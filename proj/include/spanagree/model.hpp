#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spanagree {

// Element labels. N (no label) is not part of the enum; per-token sequences
// use std::optional<Label>, where nullopt stands for N.
enum class Label : std::uint8_t { P, I, O };

inline constexpr std::array<Label, 3> kAllLabels{Label::P, Label::I, Label::O};

inline char label_char(Label l) {
    switch (l) {
        case Label::P: return 'P';
        case Label::I: return 'I';
        case Label::O: return 'O';
    }
    return '?';
}

inline std::string label_name(Label l) { return std::string(1, label_char(l)); }

inline std::optional<Label> parse_label(const std::string& s) {
    if (s == "P") return Label::P;
    if (s == "I") return Label::I;
    if (s == "O") return Label::O;
    return std::nullopt;
}

enum class Group : std::uint8_t { Expert, Crowd };

inline std::string group_name(Group g) {
    return g == Group::Expert ? "expert" : "crowd";
}

inline std::optional<Group> parse_group(const std::string& s) {
    if (s == "expert") return Group::Expert;
    if (s == "crowd") return Group::Crowd;
    return std::nullopt;
}

// A labeled half-open token interval [start, end). Non-empty by invariant.
struct Span {
    Label label{};
    int start = 0;
    int end = 0;

    int length() const { return end - start; }

    friend auto operator<=>(const Span&, const Span&) = default;
};

// One annotator's spans for one document.
struct AnnotationSet {
    std::string annotator;
    Group group = Group::Crowd;
    std::vector<Span> spans;
};

struct Document {
    std::string doc_id;
    std::vector<std::string> tokens;
    std::vector<AnnotationSet> annotation_sets;

    int token_count() const { return static_cast<int>(tokens.size()); }

    const AnnotationSet* find_set(const std::string& annotator) const {
        for (const auto& s : annotation_sets)
            if (s.annotator == annotator) return &s;
        return nullptr;
    }
};

using Corpus = std::vector<Document>;

// Per-token single-label sequence; nullopt = N.
using TokenLabelSeq = std::vector<std::optional<Label>>;

// Per-token label sets (possibly multi-labeled), as found in aggregated data.
using TokenLabeling = std::vector<std::vector<Label>>;

struct OverlapError : std::runtime_error {
    int token;
    explicit OverlapError(int tok)
        : std::runtime_error("overlapping spans of different labels at token " +
                             std::to_string(tok)),
          token(tok) {}
};

struct ValidationError : std::runtime_error {
    std::string doc_id;
    ValidationError(std::string id, const std::string& what)
        : std::runtime_error("document '" + id + "': " + what),
          doc_id(std::move(id)) {}
};

// Maximal runs of identical non-N labels, in document order.
inline std::vector<Span> spans_from_token_labels(const TokenLabelSeq& labels) {
    std::vector<Span> spans;
    const int n = static_cast<int>(labels.size());
    int i = 0;
    while (i < n) {
        if (!labels[i]) {
            ++i;
            continue;
        }
        const Label l = *labels[i];
        int j = i + 1;
        while (j < n && labels[j] && *labels[j] == l) ++j;
        spans.push_back({l, i, j});
        i = j;
    }
    return spans;
}

struct SpanToTokenResult {
    TokenLabelSeq labels;
    // Adjacent same-label span pairs that become indistinguishable from a
    // single run in token form.
    int merged_adjacent = 0;
};

// Paints spans onto a blank sequence. Throws OverlapError if any two spans
// share a token (one label per token in this encoding).
inline SpanToTokenResult token_labels_from_spans(std::vector<Span> spans,
                                                 int length) {
    SpanToTokenResult out;
    out.labels.assign(static_cast<std::size_t>(length), std::nullopt);
    std::sort(spans.begin(), spans.end(),
              [](const Span& a, const Span& b) {
                  return std::tie(a.start, a.end, a.label) <
                         std::tie(b.start, b.end, b.label);
              });
    for (const auto& s : spans) {
        for (int t = s.start; t < s.end; ++t) {
            if (out.labels[static_cast<std::size_t>(t)]) throw OverlapError(t);
            out.labels[static_cast<std::size_t>(t)] = s.label;
        }
    }
    for (std::size_t k = 1; k < spans.size(); ++k) {
        if (spans[k].start == spans[k - 1].end &&
            spans[k].label == spans[k - 1].label)
            ++out.merged_adjacent;
    }
    return out;
}

// Highest-priority member under I > P > O; empty set stays N.
inline std::optional<Label> resolve_label_set(const std::vector<Label>& set) {
    std::optional<Label> best;
    auto rank = [](Label l) {
        switch (l) {
            case Label::I: return 2;
            case Label::P: return 1;
            case Label::O: return 0;
        }
        return -1;
    };
    for (Label l : set)
        if (!best || rank(l) > rank(*best)) best = l;
    return best;
}

inline TokenLabelSeq resolve_multilabel(const TokenLabeling& labeling) {
    TokenLabelSeq out;
    out.reserve(labeling.size());
    for (const auto& set : labeling) out.push_back(resolve_label_set(set));
    return out;
}

// Ingest-time checks: bounds, non-empty, no duplicates, no overlap within
// one annotator's set (any label pair).
inline void validate_annotation_set(const AnnotationSet& set, int token_count,
                                    const std::string& doc_id) {
    for (const auto& s : set.spans) {
        if (!(0 <= s.start && s.start < s.end && s.end <= token_count))
            throw ValidationError(
                doc_id, "invalid span " + label_name(s.label) + "[" +
                            std::to_string(s.start) + "," +
                            std::to_string(s.end) + ") by '" + set.annotator +
                            "' in a " + std::to_string(token_count) +
                            "-token document");
    }
    auto sorted = set.spans;
    std::sort(sorted.begin(), sorted.end(),
              [](const Span& a, const Span& b) {
                  return std::tie(a.start, a.end, a.label) <
                         std::tie(b.start, b.end, b.label);
              });
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (sorted[k] == sorted[k - 1])
            throw ValidationError(doc_id, "duplicate span " +
                                              label_name(sorted[k].label) +
                                              "[" + std::to_string(sorted[k].start) +
                                              "," + std::to_string(sorted[k].end) +
                                              ") by '" + set.annotator + "'");
        if (sorted[k].start < sorted[k - 1].end)
            throw ValidationError(
                doc_id, "overlapping spans by '" + set.annotator + "' near token " +
                            std::to_string(sorted[k].start));
    }
}

inline void validate_document(const Document& doc) {
    for (const auto& set : doc.annotation_sets)
        validate_annotation_set(set, doc.token_count(), doc.doc_id);
}

}  // namespace spanagree
