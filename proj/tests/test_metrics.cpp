#include <doctest.h>

#include "spanagree/metrics.hpp"
#include "spanagree/synth.hpp"

using namespace spanagree;

namespace {

Document make_doc(std::string id, int tokens,
                  std::vector<AnnotationSet> sets) {
    Document d;
    d.doc_id = std::move(id);
    for (int i = 0; i < tokens; ++i) d.tokens.push_back("t" + std::to_string(i));
    d.annotation_sets = std::move(sets);
    return d;
}

}  // namespace

TEST_CASE("prf1 conventions") {
    CHECK(prf1({2, 1, 2, 1}) == ScoreTriple{1.0, 1.0, 1.0});
    CHECK(prf1({0, 0, 0, 0}) == ScoreTriple{1.0, 1.0, 1.0});

    const auto t = prf1({1, 1, 2, 4});
    CHECK(t.precision == doctest::Approx(0.5));
    CHECK(t.recall == doctest::Approx(0.25));
    CHECK(t.f1 == doctest::Approx(1.0 / 3.0));

    // One side empty scores zero.
    CHECK(prf1({0, 0, 0, 3}) == ScoreTriple{0.0, 0.0, 0.0});
    CHECK(prf1({0, 0, 3, 0}) == ScoreTriple{0.0, 0.0, 0.0});

    SUBCASE("prediction-count recall can exceed 1") {
        const auto r = prf1({2, 1, 2, 1}, RecallMode::PredictionCount);
        CHECK(r.recall == doctest::Approx(2.0));
    }
}

TEST_CASE("pairwise agreement") {
    AnnotationSet a{"a", Group::Crowd, {{Label::P, 0, 3}}};
    AnnotationSet b{"b", Group::Crowd, {{Label::P, 0, 2}}};

    CHECK(*pairwise_agreement(a, a, Criterion::Exact, Label::P) ==
          doctest::Approx(1.0));
    CHECK(*pairwise_agreement(a, b, Criterion::Exact, Label::P) ==
          doctest::Approx(0.0));
    // Shared start boundary matches in both directions.
    CHECK(*pairwise_agreement(a, b, Criterion::OneSideBoundary, Label::P) ==
          doctest::Approx(1.0));

    SUBCASE("label mismatch pair scores zero") {
        AnnotationSet c{"c", Group::Crowd, {{Label::O, 0, 2}}};
        AnnotationSet d{"d", Group::Crowd, {{Label::P, 0, 2}}};
        CHECK(*pairwise_agreement(c, d, Criterion::TokenOverlap, Label::P) ==
              doctest::Approx(0.0));
    }

    SUBCASE("empty/empty follows the configured rule") {
        AnnotationSet e{"e", Group::Crowd, {}};
        AnnotationSet f{"f", Group::Crowd, {}};
        Conventions conv;
        CHECK(*pairwise_agreement(e, f, Criterion::Exact, Label::P, conv) ==
              doctest::Approx(1.0));
        conv.empty_pair = EmptyPairRule::Zero;
        CHECK(*pairwise_agreement(e, f, Criterion::Exact, Label::P, conv) ==
              doctest::Approx(0.0));
        conv.empty_pair = EmptyPairRule::Skip;
        CHECK(!pairwise_agreement(e, f, Criterion::Exact, Label::P, conv));
    }

    SUBCASE("symmetry on random sets") {
        detail::Rng rng(23);
        for (int iter = 0; iter < 500; ++iter) {
            AnnotationSet x{"x", Group::Crowd, {}}, y{"y", Group::Crowd, {}};
            for (int i = rng.next_int(0, 3); i > 0; --i) {
                const int s = rng.next_int(0, 8);
                x.spans.push_back({Label::P, s, rng.next_int(s + 1, 10)});
            }
            for (int i = rng.next_int(0, 3); i > 0; --i) {
                const int s = rng.next_int(0, 8);
                y.spans.push_back({Label::P, s, rng.next_int(s + 1, 10)});
            }
            for (Criterion c : kAllCriteria)
                CHECK(pairwise_agreement(x, y, c, Label::P) ==
                      pairwise_agreement(y, x, c, Label::P));
        }
    }
}

TEST_CASE("within-group agreement") {
    SUBCASE("three identical crowd sets") {
        AnnotationSet s{"a", Group::Crowd, {{Label::P, 1, 3}}};
        AnnotationSet s2 = s, s3 = s;
        s2.annotator = "b";
        s3.annotator = "c";
        Corpus corpus{make_doc("d1", 5, {s, s2, s3})};
        const auto stat =
            within_group_agreement(corpus, Group::Crowd, Criterion::Exact,
                                   Label::P);
        CHECK(stat.mean == doctest::Approx(1.0));
        CHECK(stat.std == doctest::Approx(0.0));
        CHECK(stat.n == 1);
    }

    SUBCASE("population std across documents") {
        const auto stat = aggregate({0.2, 0.6});
        CHECK(stat.mean == doctest::Approx(0.4));
        CHECK(stat.std == doctest::Approx(0.2));
        CHECK(stat.n == 2);
    }

    SUBCASE("documents with fewer than two group annotators are excluded") {
        AnnotationSet a{"a", Group::Crowd, {{Label::P, 0, 2}}};
        AnnotationSet b{"b", Group::Crowd, {{Label::P, 0, 2}}};
        AnnotationSet solo{"a", Group::Crowd, {{Label::P, 0, 1}}};
        Corpus corpus{make_doc("d1", 4, {a, b}), make_doc("d2", 4, {solo})};
        const auto stat =
            within_group_agreement(corpus, Group::Crowd, Criterion::Exact,
                                   Label::P);
        CHECK(stat.n == 1);
        CHECK(stat.mean == doctest::Approx(1.0));
    }

    SUBCASE("no qualifying documents") {
        AnnotationSet solo{"a", Group::Crowd, {{Label::P, 0, 1}}};
        Corpus corpus{make_doc("d1", 2, {solo})};
        CHECK_THROWS_AS(within_group_agreement(corpus, Group::Crowd,
                                               Criterion::Exact, Label::P),
                        NoQualifyingDocuments);
        CHECK_THROWS_AS(within_group_agreement(corpus, Group::Expert,
                                               Criterion::Exact, Label::P),
                        NoQualifyingDocuments);
    }
}

TEST_CASE("cross-group agreement") {
    AnnotationSet expert{"e1", Group::Expert, {{Label::P, 0, 4}}};
    AnnotationSet crowd{"c1", Group::Crowd,
                        {{Label::P, 0, 2}, {Label::P, 2, 4}}};
    Corpus corpus{make_doc("d1", 5, {expert, crowd})};

    const auto to = cross_group_agreement(corpus, Group::Expert, Group::Crowd,
                                          Criterion::TokenOverlap, Label::P);
    CHECK(to.precision.mean == doctest::Approx(1.0));
    CHECK(to.recall.mean == doctest::Approx(1.0));
    CHECK(to.f1.mean == doctest::Approx(1.0));
    CHECK(to.f1.n == 1);

    const auto exact = cross_group_agreement(
        corpus, Group::Expert, Group::Crowd, Criterion::Exact, Label::P);
    CHECK(exact.precision.mean == doctest::Approx(0.0));
    CHECK(exact.recall.mean == doctest::Approx(0.0));
    CHECK(exact.f1.mean == doctest::Approx(0.0));

    SUBCASE("direction matters") {
        // Expert gold, crowd predicted: 2 predictions over 1 gold span.
        AnnotationSet e{"e1", Group::Expert, {{Label::P, 0, 4}}};
        AnnotationSet c{"c1", Group::Crowd, {{Label::P, 0, 2}}};
        Corpus cp{make_doc("d1", 5, {e, c})};
        const auto r = cross_group_agreement(cp, Group::Expert, Group::Crowd,
                                             Criterion::TokenOverlap, Label::P);
        const auto rev = cross_group_agreement(cp, Group::Crowd, Group::Expert,
                                               Criterion::TokenOverlap,
                                               Label::P);
        CHECK(r.precision.mean == doctest::Approx(1.0));
        CHECK(rev.precision.mean == doctest::Approx(1.0));
        CHECK(r.f1.n == 1);
    }

    SUBCASE("requires both groups present") {
        Corpus cp{make_doc("d1", 5, {crowd})};
        CHECK_THROWS_AS(cross_group_agreement(cp, Group::Expert, Group::Crowd,
                                              Criterion::Exact, Label::P),
                        NoQualifyingDocuments);
    }
}

TEST_CASE("span length statistics") {
    AnnotationSet a{"a", Group::Crowd, {{Label::P, 0, 2}, {Label::P, 3, 7}}};
    Corpus corpus{make_doc("d1", 8, {a})};
    const auto stat = span_length_stats(corpus, Group::Crowd, Label::P);
    CHECK(stat.mean == doctest::Approx(3.0));
    CHECK(stat.std == doctest::Approx(1.0));
    CHECK(stat.n == 2);

    AnnotationSet b{"b", Group::Expert, {{Label::I, 0, 5}}};
    Corpus single{make_doc("d2", 6, {b})};
    const auto s = span_length_stats(single, Group::Expert, Label::I);
    CHECK(s.mean == doctest::Approx(5.0));
    CHECK(s.std == doctest::Approx(0.0));

    CHECK_THROWS_AS(span_length_stats(corpus, Group::Crowd, Label::O), NoSpans);
}

TEST_CASE("evaluate_predictions") {
    std::map<std::string, std::vector<Span>> gold{
        {"d1", {{Label::P, 0, 2}, {Label::I, 3, 5}}},
        {"d2", {{Label::P, 1, 4}}}};

    SUBCASE("identity scores 1 everywhere") {
        for (Criterion c : kAllCriteria) {
            const auto r = evaluate_predictions(gold, gold, c);
            CHECK(r.micro == ScoreTriple{1.0, 1.0, 1.0});
            for (Label l : kAllLabels)
                CHECK(r.per_label.at(l).f1 == doctest::Approx(1.0));
        }
    }

    SUBCASE("micro pools raw counts") {
        // Per doc: 1 of 2 predicted matched, 1 of 2 gold matched.
        std::map<std::string, std::vector<Span>> g{
            {"d1", {{Label::P, 0, 2}, {Label::P, 5, 7}}},
            {"d2", {{Label::P, 0, 2}, {Label::P, 5, 7}}}};
        std::map<std::string, std::vector<Span>> p{
            {"d1", {{Label::P, 0, 2}, {Label::P, 8, 9}}},
            {"d2", {{Label::P, 0, 2}, {Label::P, 8, 9}}}};
        const auto r = evaluate_predictions(g, p, Criterion::TokenOverlap);
        CHECK(r.micro_counts == MatchCounts{2, 2, 4, 4});
        CHECK(r.micro.precision == doctest::Approx(0.5));
    }

    SUBCASE("missing predicted documents count as empty sets") {
        const auto r = evaluate_predictions(gold, {}, Criterion::Exact);
        CHECK(r.micro.precision == doctest::Approx(0.0));
        CHECK(r.micro.recall == doctest::Approx(0.0));
    }

    SUBCASE("unknown document") {
        std::map<std::string, std::vector<Span>> p{{"nope", {}}};
        CHECK_THROWS_AS(evaluate_predictions(gold, p, Criterion::Exact),
                        UnknownDocument);
    }

    SUBCASE("micro equals prf1 of summed per-label counts") {
        const auto r = evaluate_predictions(gold, gold, Criterion::Exact);
        MatchCounts sum;
        for (Label l : kAllLabels) sum += r.per_label_counts.at(l);
        CHECK(sum == r.micro_counts);
    }
}
