#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spanagree/model.hpp"

namespace spanagree {

// Boundary-jitter simulation parameters. Shifts are clamped so generated
// spans stay non-empty and in bounds.
struct JitterParams {
    double jitter_prob = 0.0;  // per-boundary shift probability, in [0,1]
    int max_shift = 2;         // shift magnitude drawn uniformly from [1, max_shift]
    double drop_prob = 0.0;    // probability an annotator misses a latent span
    std::uint64_t seed = 0;
};

namespace detail {

// splitmix64; chosen over std engines so output is identical across
// standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi], inclusive.
    int next_int(int lo, int hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next() % range);
    }

  private:
    std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    return r.next();
}

// Truncates the later of two overlapping spans; empties are dropped.
inline std::vector<Span> repair_overlaps(std::vector<Span> spans) {
    std::sort(spans.begin(), spans.end(),
              [](const Span& a, const Span& b) {
                  return std::tie(a.start, a.end) < std::tie(b.start, b.end);
              });
    std::vector<Span> out;
    for (auto s : spans) {
        if (!out.empty() && s.start < out.back().end) s.start = out.back().end;
        if (s.start < s.end) out.push_back(s);
    }
    return out;
}

}  // namespace detail

// Deterministic synthetic corpus: latent true spans per document plus one
// jittered copy per annotator. Per-document seeds derive from (seed, index),
// so parallel generation would match sequential output.
inline Corpus generate(const JitterParams& params, int n_docs,
                       const std::vector<Group>& annotator_groups) {
    if (params.jitter_prob < 0.0 || params.jitter_prob > 1.0)
        throw std::invalid_argument("jitter probability must be in [0,1]");
    if (params.drop_prob < 0.0 || params.drop_prob > 1.0)
        throw std::invalid_argument("drop probability must be in [0,1]");
    if (params.max_shift < 1)
        throw std::invalid_argument("max shift must be at least 1");
    if (n_docs < 1) throw std::invalid_argument("need at least one document");
    if (annotator_groups.empty())
        throw std::invalid_argument("need at least one annotator");

    Corpus corpus;
    corpus.reserve(static_cast<std::size_t>(n_docs));
    for (int d = 0; d < n_docs; ++d) {
        detail::Rng rng(detail::mix_seed(params.seed, static_cast<std::uint64_t>(d)));
        Document doc;
        doc.doc_id = "synth-" + std::to_string(d);
        const int length = rng.next_int(24, 40);
        for (int t = 0; t < length; ++t)
            doc.tokens.push_back("w" + std::to_string(t));

        // Latent truth: alternating gaps and spans, labels cycling at random.
        std::vector<Span> latent;
        int pos = rng.next_int(0, 2);
        while (pos + 3 <= length) {
            const int len = std::min(rng.next_int(3, 8), length - pos);
            const Label label = kAllLabels[static_cast<std::size_t>(rng.next_int(0, 2))];
            latent.push_back({label, pos, pos + len});
            pos += len + rng.next_int(1, 4);
        }

        for (std::size_t a = 0; a < annotator_groups.size(); ++a) {
            AnnotationSet set;
            set.annotator = "ann-" + std::to_string(a);
            set.group = annotator_groups[a];
            std::vector<Span> spans;
            for (const auto& truth : latent) {
                const bool dropped = rng.next_unit() < params.drop_prob;
                Span s = truth;
                auto jitter = [&](int value, int lo, int hi) {
                    // Consume randomness unconditionally so drop decisions do
                    // not shift the stream between annotators.
                    const bool shift = rng.next_unit() < params.jitter_prob;
                    const int magnitude = rng.next_int(1, params.max_shift);
                    const int direction = rng.next_int(0, 1) ? 1 : -1;
                    if (!shift) return value;
                    return std::clamp(value + direction * magnitude, lo, hi);
                };
                s.start = jitter(s.start, 0, s.end - 1);
                s.end = jitter(s.end, s.start + 1, length);
                if (!dropped) spans.push_back(s);
            }
            set.spans = detail::repair_overlaps(std::move(spans));
            doc.annotation_sets.push_back(std::move(set));
        }
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

}  // namespace spanagree
