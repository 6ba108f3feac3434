#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "sphgse/io.hpp"
#include "sphgse/model.hpp"

using namespace sphgse;

namespace {

MixedModel random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> deg(2, 12);
    std::vector<ModelTerm> terms;
    std::set<int> used;
    const int n = 1 + static_cast<int>(uni(rng) * 3);
    for (int i = 0; i < n; ++i) {
        int p = deg(rng);
        while (used.count(p)) p = deg(rng);
        used.insert(p);
        terms.push_back({p, 0.05 + uni(rng)});
    }
    return MixedModel(std::move(terms));
}

} // namespace

TEST_CASE("mixture evaluation on hand-checked values") {
    const auto sk = sk_model();
    CHECK(sk.eval(1.0, 1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sk.eval(0.5, 0) == doctest::Approx(0.25).epsilon(1e-15));

    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    CHECK(m.eval(1.0, 2) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("mixture validation rejects malformed term lists") {
    CHECK_THROWS_AS(MixedModel({{1, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MixedModel({{2, -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MixedModel({{2, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MixedModel({{3, 1.0}, {3, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MixedModel({}), std::invalid_argument);
    const auto m = sk_model();
    CHECK_THROWS_AS(m.eval(-0.1, 0), std::domain_error);
    CHECK_THROWS_AS(m.eval(0.5, 5), std::invalid_argument);
}

TEST_CASE("derivatives agree with central finite differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_model(rng);
        const double t = uni(rng);
        const double step = 1e-5;
        for (int k = 0; k <= 3; ++k) {
            const double fd = (m.eval(t + step, k) - m.eval(t - step, k)) / (2.0 * step);
            const double exact = m.eval(t, k + 1);
            CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
        }
    }
}

TEST_CASE("weight scaling acts as expected on derivatives and the structure function") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_model(rng);
        const double lambda = 1.7;
        const auto scaled = m.scaled(lambda * lambda);
        for (double t : {0.2, 0.5, 0.9})
            for (int k = 0; k <= 4; ++k)
                CHECK(scaled.eval(t, k) ==
                      doctest::Approx(lambda * lambda * m.eval(t, k)).epsilon(1e-13));
        for (double t : {0.3, 0.8})
            CHECK(scaled.dfrak(t) == doctest::Approx(m.dfrak(t) / lambda).epsilon(1e-12));
    }
}

TEST_CASE("second derivative at one dominates the first, equality only for pure quadratic") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_model(rng);
        CHECK(m.xi1_second() >= m.xi1_prime() - 1e-14);
        if (!m.is_pure_quadratic())
            CHECK(m.xi1_second() > m.xi1_prime() + 1e-12);
    }
    CHECK(sk_model().xi1_second() == doctest::Approx(sk_model().xi1_prime()));
}

TEST_CASE("structure function closed form matches direct second differences") {
    // oracle: central second difference of (xi'')^{-1/2}
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.1, 0.9);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = random_model(rng);
        const double t = uni(rng);
        const double step = 1e-4;
        const auto g = [&](double s) { return 1.0 / std::sqrt(m.eval(s, 2)); };
        const double fd = (g(t + step) - 2.0 * g(t) + g(t - step)) / (step * step);
        CHECK(m.dfrak(t) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("structure function of the quadratic-plus-quartic mixture in closed form") {
    // xi = (14/15) t^2 + (1/15) t^4 gives
    // (3 sqrt(15)/2)(6t^2-7)(3t^2+7)^{-5/2}
    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    for (double t : {0.1, 0.3, 0.5, 0.7, 1.0}) {
        const double ref = 1.5 * std::sqrt(15.0) * (6.0 * t * t - 7.0) *
                           std::pow(3.0 * t * t + 7.0, -2.5);
        CHECK(m.dfrak(t) == doctest::Approx(ref).epsilon(1e-13));
    }
    CHECK(m.dfrak(1.0) < 0.0);
}

TEST_CASE("structure function singularity without a quadratic term") {
    CHECK_THROWS_AS(pure_model(3).dfrak(0.0), std::domain_error);
    CHECK(sk_model().dfrak(0.7) == doctest::Approx(0.0));
    // truncated sinh mixture stays positive
    const auto s = sinh_minus_linear_model();
    CHECK(s.dfrak(0.5) > 0.0);
}

TEST_CASE("sign decomposition on reference mixtures") {
    const auto zero = sign_intervals(sk_model());
    REQUIRE(zero.intervals.size() == 1);
    CHECK(zero.intervals[0].sign == IntervalSign::zero);
    CHECK(zero.boundaries.empty());

    const auto neg = sign_intervals(two_plus_p_model(4, 14.0 / 15.0));
    REQUIRE(neg.intervals.size() == 1);
    CHECK(neg.intervals[0].sign == IntervalSign::negative);

    MixedModel four({{2, 300.0 / 601}, {4, 200.0 / 601}, {15, 100.0 / 601}, {60, 1.0 / 601}});
    const auto p = sign_intervals(four);
    REQUIRE(p.boundaries.size() == 4);
    REQUIRE(p.intervals.size() == 5);
    const IntervalSign expect[5] = {IntervalSign::negative, IntervalSign::positive,
                                    IntervalSign::negative, IntervalSign::positive,
                                    IntervalSign::negative};
    for (int i = 0; i < 5; ++i) CHECK(p.intervals[i].sign == expect[i]);
    for (size_t i = 0; i + 1 < p.boundaries.size(); ++i)
        CHECK(p.boundaries[i] < p.boundaries[i + 1]);
}

TEST_CASE("detected boundaries are roots and stable under scaling") {
    MixedModel four({{2, 300.0 / 601}, {4, 200.0 / 601}, {15, 100.0 / 601}, {60, 1.0 / 601}});
    const auto p = sign_intervals(four);
    for (double r : p.boundaries) {
        const double slope =
            (four.dfrak(r + 1e-6) - four.dfrak(r - 1e-6)) / 2e-6;
        CHECK(std::abs(four.dfrak(r)) < 10.0 * std::abs(slope) * 1e-10 + 1e-12);
    }
    const auto ps = sign_intervals(four.scaled(4.0));
    REQUIRE(ps.boundaries.size() == p.boundaries.size());
    for (size_t i = 0; i < p.boundaries.size(); ++i)
        CHECK(ps.boundaries[i] == doctest::Approx(p.boundaries[i]).epsilon(1e-8));
}

TEST_CASE("series truncation honors the tail bound") {
    const auto s = sinh_minus_linear_model(1e-30);
    // coefficients are 1/(2k+1)! starting at degree 3
    double fact = 6.0;
    int deg = 3;
    for (const auto& term : s.terms()) {
        CHECK(term.degree == deg);
        CHECK(term.weight == doctest::Approx(1.0 / fact).epsilon(1e-15));
        fact *= (deg + 2.0) * (deg + 3.0);
        deg += 2;
    }
    // factorial arithmetic: the first omitted coefficient already sits below
    // the bound, and the included top degree is 27
    CHECK(s.terms().back().degree == 27);
    const double next = s.terms().back().weight / (29.0 * 28.0);
    CHECK(next < 1e-30);

    CHECK(truncate_series({SeriesRule::Kind::pure_p, 3, 0.0}, 1e-30).terms().size() == 1);
    const auto tp = truncate_series({SeriesRule::Kind::two_plus_p, 4, 0.7}, 1e-30);
    CHECK(tp.terms().size() == 2);
    CHECK_THROWS(truncate_series({SeriesRule::Kind::sinh_minus_linear, 0, 0.0}, 1e-300, 20));
}

TEST_CASE("model json round trip") {
    const auto m = two_plus_p_model(4, 0.7);
    const auto back = model_from_json_text(model_to_json_text(m));
    REQUIRE(back.terms().size() == m.terms().size());
    for (size_t i = 0; i < m.terms().size(); ++i) {
        CHECK(back.terms()[i].degree == m.terms()[i].degree);
        CHECK(back.terms()[i].weight == m.terms()[i].weight);
    }
    CHECK_THROWS(model_from_json_text("{\"terms\": [{\"p\": 1, \"beta_sq\": 1.0}]}"));
    CHECK_THROWS(model_from_json_text("{}"));
}
