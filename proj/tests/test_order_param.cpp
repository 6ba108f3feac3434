#include <doctest.h>

#include <cmath>
#include <random>

#include "sphgse/io.hpp"
#include "sphgse/order_param.hpp"

using namespace sphgse;

TEST_CASE("constant and one-step profiles in closed form") {
    const auto sk = sk_model();
    OrderParamAnsatz flat(0.5, {}, {}, sk);
    for (double t : {0.0, 0.3, 1.0}) CHECK(flat.phi(t) == doctest::Approx(0.5));
    CHECK(flat.is_one_rsb() == false);

    OrderParamAnsatz one_step(0.3, {{0.0, 0.7}}, {}, sk);
    CHECK(one_step.is_one_rsb());
    for (double t : {0.0, 0.25, 0.6, 1.0})
        CHECK(one_step.phi(t) == doctest::Approx(0.7 * (1.0 - t) + 0.3).epsilon(1e-15));
    CHECK(one_step.density(0.5) == doctest::Approx(0.7));
    CHECK(one_step.phi(0.0) == doctest::Approx(one_step.c + 0.7));
}

TEST_CASE("a full segment reproduces the inverse square root curvature profile") {
    // for xi without cubic part the affine correction at t=0 vanishes, so
    // phi == (xi'')^{-1/2} exactly on a (0,1) segment with c = (xi''(1))^{-1/2}
    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    const double c = 1.0 / std::sqrt(m.xi1_second());
    OrderParamAnsatz frsb(c, {}, {{0.0, 1.0}}, m);
    for (double t : {0.0, 0.2, 0.5, 0.8, 1.0})
        CHECK(frsb.phi(t) == doctest::Approx(1.0 / std::sqrt(m.eval(t, 2))).epsilon(1e-12));
    // the running mass is -g'(s) with g = (xi'')^{-1/2}
    for (double s : {0.1, 0.5, 0.9}) {
        const double ref = 0.5 * m.eval(s, 3) * std::pow(m.eval(s, 2), -1.5);
        CHECK(frsb.density(s) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("grid extraction matches pointwise evaluation") {
    const auto m = two_plus_p_model(4, 0.5);
    OrderParamAnsatz az(0.2, {{0.0, 0.4}, {0.35, 0.25}}, {}, m);
    const auto grid = to_grid(az, 500);
    REQUIRE(grid.G() == 500);
    for (size_t i = 0; i <= 500; ++i)
        CHECK(grid.at(i) == doctest::Approx(az.phi(grid.t(i))).epsilon(1e-13));
    CHECK(grid.interp(0.1234) == doctest::Approx(az.phi(0.1234)).epsilon(1e-6));
    CHECK(validate(grid).empty());
}

TEST_CASE("measure round trip keeps atoms and the endpoint weight") {
    const auto m = two_plus_p_model(4, 0.5);
    OrderParamAnsatz az(0.17, {{0.0, 0.3}, {0.4, 0.2}}, {}, m);
    const auto nu = to_measure(az);
    CHECK(nu.atom_at_one == doctest::Approx(0.17));
    REQUIRE(nu.atoms.size() == 2);
    CHECK(nu.atoms[0].q == doctest::Approx(0.0));
    CHECK(nu.atoms[0].m == doctest::Approx(0.3));
    CHECK(nu.atoms[1].q == doctest::Approx(0.4));
    CHECK(nu.atoms[1].m == doctest::Approx(0.2));
    for (double s : {0.1, 0.5, 0.9})
        CHECK(nu.phi(s) == doctest::Approx(az.phi(s)).epsilon(1e-13));

    const auto back = to_measure(to_grid(az, 2000));
    CHECK(back.atom_at_one == doctest::Approx(0.17).epsilon(1e-9));
    CHECK(back.phi(0.7) == doctest::Approx(az.phi(0.7)).epsilon(1e-6));
}

TEST_CASE("breakpoints are sorted and bracket the smooth pieces") {
    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    OrderParamAnsatz az(0.1, {{0.0, 0.2}, {0.6, 0.1}}, {{0.2, 0.5}}, m);
    const auto bp = az.breakpoints();
    REQUIRE(bp.size() >= 5);
    CHECK(bp.front() == doctest::Approx(0.0));
    CHECK(bp.back() == doctest::Approx(1.0));
    for (size_t i = 0; i + 1 < bp.size(); ++i) CHECK(bp[i] < bp[i + 1]);
}

TEST_CASE("random structured profiles always live in the cone") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Atom> atoms;
        double q = 0.0;
        const int n = 1 + static_cast<int>(uni(rng) * 3);
        for (int i = 0; i < n; ++i) {
            atoms.push_back({q, 0.01 + uni(rng)});
            q += 0.05 + 0.8 * uni(rng) * (1.0 - q) / n;
            if (q >= 1.0) break;
        }
        std::vector<Segment> segs;
        if (uni(rng) < 0.3) segs.push_back({0.0, 0.4 + 0.5 * uni(rng)});
        OrderParamAnsatz az(0.01 + uni(rng), atoms, segs, m);
        const auto issues = validate(to_grid(az, 300), 1e-9);
        CHECK(issues.empty());
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("validation flags profiles outside the cone") {
    GridFunction inc;
    inc.values = {0.1, 0.2, 0.3, 0.4, 0.5};
    bool monotone_flag = false;
    for (const auto& issue : validate(inc))
        if (issue.kind == "monotone") monotone_flag = true;
    CHECK(monotone_flag);

    GridFunction nonpos;
    nonpos.values = {1.0, 0.5, 0.0, -0.5, -1.0};
    bool pos_flag = false;
    for (const auto& issue : validate(nonpos))
        if (issue.kind == "positivity") pos_flag = true;
    CHECK(pos_flag);

    // strictly decreasing but convex near the start
    GridFunction convex;
    convex.values = {1.0, 0.5, 0.26, 0.25, 0.2};
    bool concave_flag = false;
    for (const auto& issue : validate(convex))
        if (issue.kind == "concave") concave_flag = true;
    CHECK(concave_flag);

    GridFunction ok;
    ok.values = {1.0, 0.8, 0.6, 0.4, 0.2};
    CHECK(validate(ok).empty());
}

TEST_CASE("constructor rejects malformed ansatz data") {
    const auto m = sk_model();
    CHECK_THROWS(OrderParamAnsatz(-0.1, {}, {}, m));
    CHECK_THROWS(OrderParamAnsatz(0.5, {{0.5, -1.0}}, {}, m));
    CHECK_THROWS(OrderParamAnsatz(0.5, {{0.3, 0.1}, {0.3, 0.1}}, {}, m));
    CHECK_THROWS(OrderParamAnsatz(0.5, {{1.2, 0.1}}, {}, m));
    CHECK_THROWS(OrderParamAnsatz(0.5, {}, {{0.5, 0.4}}, m));
}

TEST_CASE("ansatz json round trip") {
    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    OrderParamAnsatz az(0.21, {{0.0, 0.45}}, {{0.1, 0.3}}, m);
    const std::string text =
        "{\"c\": 0.21, \"atoms\": [[0.0, 0.45]], \"frsb_segments\": [[0.1, 0.3]]}";
    const auto back = ansatz_from_json_text(text, m);
    CHECK(back.c == doctest::Approx(az.c));
    REQUIRE(back.atoms.size() == 1);
    CHECK(back.atoms[0].m == doctest::Approx(0.45));
    REQUIRE(back.frsb_segments.size() == 1);
    CHECK(back.phi(0.2) == doctest::Approx(az.phi(0.2)).epsilon(1e-14));
}
