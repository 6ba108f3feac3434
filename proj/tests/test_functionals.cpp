#include <doctest.h>

#include <cmath>
#include <random>

#include "sphgse/functionals.hpp"
#include "sphgse/onersb.hpp"

using namespace sphgse;

namespace {

GridFunction constant_grid(double value, size_t G) {
    GridFunction phi;
    phi.values.assign(G + 1, value);
    return phi;
}

// concave decreasing profile from ray coordinates (c, rho)
GridFunction ray_grid(double c, const std::vector<double>& rho, size_t G) {
    GridFunction phi;
    phi.values.assign(G + 1, c);
    const size_t n = rho.size();
    for (size_t j = 0; j < n; ++j) {
        const double tj = static_cast<double>(j) / static_cast<double>(n);
        for (size_t i = 0; i <= G; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(G);
            phi.values[i] += rho[j] * (1.0 - std::max(tj, t));
        }
    }
    return phi;
}

double frsb_gse_oracle(const MixedModel& m) {
    // int_0^1 sqrt(a + b t^2) with a = xi''(0), b = xi''(1) - a
    const double a = m.xi0_second();
    const double b = m.xi1_second() - a;
    return 0.5 * std::sqrt(a + b) + 0.5 * a / std::sqrt(b) * std::asinh(std::sqrt(b / a));
}

} // namespace

TEST_CASE("primal energy on hand-computed profiles") {
    const auto sk = sk_model();
    CHECK(primal_energy(constant_grid(1.0 / std::sqrt(2.0), 400), sk, 0.0) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(primal_energy(constant_grid(1.0, 400), sk, 1.0) == doctest::Approx(4.0).epsilon(1e-12));

    OrderParamAnsatz flat(1.0 / std::sqrt(2.0), {}, {}, sk);
    CHECK(primal_energy(flat, sk, 0.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    OrderParamAnsatz unit(1.0, {}, {}, sk);
    CHECK(primal_energy(unit, sk, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("primal energy of the full inverse square root profile") {
    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    const double c = 1.0 / std::sqrt(m.xi1_second());
    OrderParamAnsatz frsb(c, {}, {{0.0, 1.0}}, m);
    CHECK(primal_energy(frsb, m, 0.0) == doctest::Approx(2.0 * frsb_gse_oracle(m)).epsilon(1e-11));
    // grid route agrees up to discretization
    CHECK(primal_energy(to_grid(frsb, 4000), m, 0.0) ==
          doctest::Approx(2.0 * frsb_gse_oracle(m)).epsilon(1e-6));
}

TEST_CASE("conjugate of the flat quadratic optimum is the mixture itself") {
    const auto sk = sk_model();
    const auto cert = formal_conjugate(constant_grid(1.0 / std::sqrt(2.0), 800), sk, 0.0);
    for (size_t i = 0; i <= 800; i += 80) {
        const double t = cert.phi.t(i);
        CHECK(cert.eta[i] == doctest::Approx(t * t).epsilon(1e-10));
        CHECK(cert.eta_prime[i] == doctest::Approx(2.0 * t).epsilon(1e-8));
    }
    CHECK(std::abs(cert.reports.obstacle_margin) < 1e-10);
    CHECK(std::abs(cert.reports.bc_eta_at_one) < 1e-12);
    CHECK(std::abs(cert.reports.bc_slope_at_zero) < 1e-12);
    const auto bc = natural_bc_check(cert, sk, 0.0);
    CHECK(bc.slope_at_one < 1e-8);
    CHECK(bc.eta_at_zero < 1e-10);
}

TEST_CASE("suboptimal flat profile gives a unit gap with a feasible certificate") {
    const auto sk = sk_model();
    const auto gap = duality_gap(constant_grid(1.0, 400), sk, 0.0);
    CHECK(gap.primal == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(gap.dual == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gap.gap == doctest::Approx(1.0).epsilon(1e-10));
    // eta = (1 + t^2)/2 >= t^2 on [0,1]
    for (size_t i = 0; i <= 400; i += 40) {
        const double t = gap.cert.phi.t(i);
        CHECK(gap.cert.eta[i] == doctest::Approx(0.5 * (1.0 + t * t)).epsilon(1e-10));
    }
    CHECK(gap.cert.reports.obstacle_margin > -1e-12);
}

TEST_CASE("dual energy of a one-step profile in closed form") {
    const auto m = pure_model(3);
    const auto sol = solve_master(m);
    OrderParamAnsatz az(sol.c, {{0.0, sol.m}}, {}, m);
    const auto cert = formal_conjugate(az, m, 0.0);
    const double ref = 2.0 / sol.m * std::log((sol.c + sol.m) / sol.c);
    CHECK(dual_energy(cert, m) == doctest::Approx(ref).epsilon(1e-13));
    // second differences of eta reproduce 1/phi^2
    const size_t G = cert.phi.G();
    const double dt = cert.phi.dt();
    for (size_t i = G / 10; i < G; i += G / 10) {
        const double second =
            (cert.eta[i + 1] - 2.0 * cert.eta[i] + cert.eta[i - 1]) / (dt * dt);
        const double p = cert.phi.at(i);
        CHECK(second == doctest::Approx(1.0 / (p * p)).epsilon(1e-5));
    }
}

TEST_CASE("one-step optimum closes the gap and satisfies the contact conditions") {
    for (int p : {3, 4}) {
        const auto m = pure_model(p);
        const auto sol = solve_master(m);
        OrderParamAnsatz az(sol.c, {{0.0, sol.m}}, {}, m);
        const auto gap = duality_gap(az, m, 0.0);
        CHECK(std::abs(gap.gap) < 1e-10);
        const auto obs = obstacle_check(gap.cert, m);
        CHECK(obs.margin > -obstacle_feasibility_tol(m));
        const auto bc = natural_bc_check(gap.cert, m, 0.0);
        CHECK(bc.slope_at_one < 1e-8);
        CHECK(bc.contact_at_zero < 1e-6);
    }
}

TEST_CASE("the quadratic-plus-quartic candidate fails the obstacle condition at mu = 0.7") {
    const auto m = two_plus_p_model(4, 0.7);
    const auto sol = solve_master(m);
    OrderParamAnsatz az(sol.c, {{0.0, sol.m}}, {}, m);
    const auto cert = formal_conjugate(az, m, 0.0);
    const auto obs = obstacle_check(cert, m);
    CHECK(obs.margin < -1e-4);
    CHECK(obs.argmin > 0.1);
    CHECK(obs.argmin < 0.45);
    // gap of the formal pair is still tiny: infeasibility, not suboptimality
    CHECK(std::abs(duality_gap(az, m, 0.0).gap) < 1e-10);
}

TEST_CASE("weak duality holds for every feasible certificate sampled") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int accepted = 0;
    for (int attempt = 0; attempt < 4000 && accepted < 200; ++attempt) {
        MixedModel m = two_plus_p_model(3 + static_cast<int>(uni(rng) * 5),
                                        0.2 + 0.6 * uni(rng));
        const double scale = 1.0 / std::sqrt(m.xi1_prime());
        std::vector<double> rho(8);
        for (auto& r : rho) r = 0.3 * scale * uni(rng);
        const auto phi = ray_grid((0.5 + uni(rng)) * scale, rho, 200);
        const auto gap = duality_gap(phi, m, uni(rng) < 0.3 ? uni(rng) : 0.0);
        if (gap.cert.reports.obstacle_margin < 0.0) continue;
        ++accepted;
        CHECK(gap.gap >= -1e-9);
    }
    CHECK(accepted >= 200);
}

TEST_CASE("finite temperature energy of a single jump against the closed form") {
    const auto sk = sk_model();
    const size_t G = 1000;
    for (double q : {0.2, 0.5, 0.9}) {
        FiniteBetaMeasure mu;
        mu.beta = 3.0;
        mu.cdf.assign(G + 1, 0.0);
        const size_t jq = static_cast<size_t>(q * G + 0.5);
        for (size_t i = jq; i <= G; ++i) mu.cdf[i] = 1.0;
        const double ref =
            0.5 * (mu.beta * mu.beta * (1.0 - q * q) + q / (1.0 - q) + std::log(1.0 - q));
        CHECK(cs_energy(mu, sk) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(cs_energy_lsc(mu, sk) == doctest::Approx(ref).epsilon(1e-12));
        // hat transform of the jump is 1 - max(s, q)
        const auto hat = mu.hat();
        CHECK(hat[0] == doctest::Approx(1.0 - q).epsilon(1e-12));
        CHECK(hat[G / 2] == doctest::Approx(1.0 - std::max(0.5, q)).epsilon(1e-12));
    }
}

TEST_CASE("finite temperature energy of a jump at zero for a general mixture") {
    const auto m = two_plus_p_model(5, 0.4);
    FiniteBetaMeasure mu;
    mu.beta = 2.0;
    mu.cdf.assign(801, 1.0);
    // int xi''(s)(1-s) ds = xi(1)
    CHECK(cs_energy(mu, m) == doctest::Approx(0.5 * mu.beta * mu.beta * m.xi1()).epsilon(1e-12));
}

TEST_CASE("both finite temperature forms agree on random measures") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto m = two_plus_p_model(4, 0.6);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t G = 500;
        FiniteBetaMeasure mu;
        mu.beta = 1.0 + 10.0 * uni(rng);
        mu.h = uni(rng) < 0.5 ? uni(rng) : 0.0;
        mu.cdf.assign(G + 1, 0.0);
        const size_t jstar = 100 + static_cast<size_t>(uni(rng) * 350);
        double f = 0.0;
        for (size_t i = 0; i < jstar; ++i) {
            mu.cdf[i] = f;
            f = std::min(1.0, f + 0.02 * uni(rng));
        }
        for (size_t i = jstar; i <= G; ++i) mu.cdf[i] = 1.0;
        const double a = cs_energy(mu, m);
        const double b = cs_energy_lsc(mu, m);
        CHECK(a == doctest::Approx(b).epsilon(1e-11));
    }
}

TEST_CASE("finite temperature energy rejects support touching one") {
    FiniteBetaMeasure mu;
    mu.beta = 2.0;
    mu.cdf.assign(101, 0.0);
    mu.cdf.back() = 1.0;
    CHECK_THROWS_AS(cs_energy(mu, sk_model()), std::exception);
}

TEST_CASE("measure-side energy agrees with the profile-side energy") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto m = two_plus_p_model(4, 14.0 / 15.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Atom> atoms;
        double q = 0.0;
        for (int i = 0; i < 2; ++i) {
            atoms.push_back({q, 0.05 + 0.5 * uni(rng)});
            q += 0.2 + 0.5 * uni(rng);
            if (q >= 1.0) break;
        }
        OrderParamAnsatz az(0.05 + uni(rng), atoms, {}, m);
        const double h = uni(rng) < 0.5 ? uni(rng) : 0.0;
        CHECK(gs_energy(to_measure(az), m, h) ==
              doctest::Approx(primal_energy(az, m, h)).epsilon(1e-9));
    }
}
