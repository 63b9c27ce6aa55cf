#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spanagree/model.hpp"

namespace spanagree {

enum class Criterion : std::uint8_t { Exact, OneSideBoundary, TokenOverlap };

inline constexpr std::array<Criterion, 3> kAllCriteria{
    Criterion::Exact, Criterion::OneSideBoundary, Criterion::TokenOverlap};

inline std::string criterion_name(Criterion c) {
    switch (c) {
        case Criterion::Exact: return "exact";
        case Criterion::OneSideBoundary: return "ob";
        case Criterion::TokenOverlap: return "to";
    }
    return "?";
}

inline std::optional<Criterion> parse_criterion(const std::string& s) {
    if (s == "exact") return Criterion::Exact;
    if (s == "ob") return Criterion::OneSideBoundary;
    if (s == "to") return Criterion::TokenOverlap;
    return std::nullopt;
}

// Symmetric in its two span arguments. Label mismatch never matches.
inline bool matches(Criterion criterion, const Span& predicted,
                    const Span& gold) {
    if (predicted.label != gold.label) return false;
    const bool overlap = std::max(predicted.start, gold.start) <
                         std::min(predicted.end, gold.end);
    switch (criterion) {
        case Criterion::Exact:
            return predicted.start == gold.start && predicted.end == gold.end;
        case Criterion::OneSideBoundary:
            return (predicted.start == gold.start ||
                    predicted.end == gold.end) &&
                   overlap;
        case Criterion::TokenOverlap:
            return overlap;
    }
    return false;
}

struct MatchCounts {
    int matched_predicted = 0;
    int matched_gold = 0;
    int total_predicted = 0;
    int total_gold = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        matched_predicted += o.matched_predicted;
        matched_gold += o.matched_gold;
        total_predicted += o.total_predicted;
        total_gold += o.total_gold;
        return *this;
    }

    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

// Existential matching: a predicted span counts once if it matches any gold
// span, and vice versa. Many-to-many is permitted; no one-to-one assignment.
inline MatchCounts count_matches(Criterion criterion,
                                 std::span<const Span> predicted,
                                 std::span<const Span> gold) {
    MatchCounts counts;
    counts.total_predicted = static_cast<int>(predicted.size());
    counts.total_gold = static_cast<int>(gold.size());
    std::vector<bool> gold_hit(gold.size(), false);
    for (const auto& p : predicted) {
        bool hit = false;
        for (std::size_t j = 0; j < gold.size(); ++j) {
            if (matches(criterion, p, gold[j])) {
                hit = true;
                gold_hit[j] = true;
            }
        }
        if (hit) ++counts.matched_predicted;
    }
    counts.matched_gold =
        static_cast<int>(std::count(gold_hit.begin(), gold_hit.end(), true));
    return counts;
}

inline MatchCounts count_matches(Criterion criterion,
                                 const std::vector<Span>& predicted,
                                 const std::vector<Span>& gold) {
    return count_matches(criterion, std::span<const Span>(predicted),
                         std::span<const Span>(gold));
}

}  // namespace spanagree
