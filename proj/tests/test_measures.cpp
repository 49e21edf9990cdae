#include <doctest.h>

#include "frde/errors.hpp"
#include "frde/measures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

using namespace frde;

namespace {

// closed-form rho mass of [0, theta^k]: sum_{i>=k} c_i, by pow and geometric series
double rho_cdf_oracle(double theta, int k) {
    return (1.0 - theta) / (1.0 + theta) * std::pow(theta, k) / (1.0 - theta);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ok;
}

}  // namespace

TEST_CASE("rho_theta atoms at theta=0.5") {
    const auto m = make_rho_theta({0.5, 8});
    CHECK(m.inf_mass() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.mass_at(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.mass_at(0.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(m.atoms().size() == 8);
    REQUIRE(m.tail());
    CHECK(m.tail()->cutoff == 8);
    CHECK(m.tail()->lumped == doctest::Approx(std::pow(0.5, 8) / 1.5).epsilon(1e-14));
}

TEST_CASE("rho_theta total mass is one") {
    for (double th : {0.05, 0.3, 0.5, 0.85, 0.99})
        for (int K : {2, 5, 8}) {
            const auto m = make_rho_theta({th, K});
            CHECK(std::abs(m.total_mass() - 1.0) < 1e-12);
            CHECK(m.in_m1());
        }
}

TEST_CASE("rho_theta cumulative mass against geometric summation") {
    const double th = 0.85;
    const auto m = make_rho_theta({th, 40});
    for (int k = 0; k < 40; ++k) {
        const double x = std::pow(th, k);
        CHECK(std::abs(m.cumulative(m.atoms()[39 - k].value) - rho_cdf_oracle(th, k)) < 1e-12);
        CHECK(std::abs(m.cumulative(m.atoms()[39 - k].value) - x / (1.0 + th)) < 1e-12);
    }
}

TEST_CASE("bad theta params") {
    CHECK(code_of([] { make_rho_theta({1.0, 5}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { make_rho_theta({0.5, 1}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { make_rho_theta({0.0, 5}); }) == ErrorCode::invalid_argument);
    // 0.3^30 ~ 2e-16: atoms would collide under the 1e-12 identity tolerance
    CHECK(code_of([] { make_rho_theta({0.3, 30}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { make_rho_theta({0.99, 2000}); }) == ErrorCode::ok);
}

TEST_CASE("atomic measure validation") {
    CHECK(code_of([] { AtomicMeasure({{0.5, 0.6}}, 0.6); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { AtomicMeasure({{0.5, 0.5}, {0.4, 0.5}}, 0.0); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { AtomicMeasure({{0.5, -0.1}}, 1.1); }) == ErrorCode::invalid_argument);
    // atoms closer than the identity tolerance are the same atom
    CHECK(code_of([] { AtomicMeasure({{0.5, 0.25}, {0.5 + 1e-14, 0.25}}, 0.5); }) == ErrorCode::invalid_argument);
}

TEST_CASE("finite Xi examples") {
    const std::vector<double> one{1.0};
    auto s = solve_rde_finite_xi(one);
    CHECK_FALSE(s.empty_xi);
    CHECK(s.measure.mass_at(1.0) == 1.0);
    CHECK(s.measure.inf_mass() == 0.0);

    const std::vector<double> half{0.5};
    s = solve_rde_finite_xi(half);
    CHECK(s.measure.mass_at(0.5) == 0.5);
    CHECK(s.measure.inf_mass() == 0.5);

    s = solve_rde_finite_xi(std::vector<double>{});
    CHECK(s.empty_xi);
    CHECK(s.measure.inf_mass() == 1.0);
    CHECK(s.measure.atoms().empty());

    CHECK(code_of([] { solve_rde_finite_xi(std::vector<double>{0.5, 0.4}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { solve_rde_finite_xi(std::vector<double>{0.0, 0.4}); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { solve_rde_finite_xi(std::vector<double>{0.5, 1.5}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("finite Xi of the truncated geometric grid approaches rho_theta") {
    for (double th : {0.3, 0.7, 0.9}) {
        for (int K : {5, 10, 20}) {
            std::vector<double> times(K);
            double v = 1.0;
            for (int k = 0; k < K; ++k) {
                times[K - 1 - k] = v;
                v *= th;
            }
            const auto fin = solve_rde_finite_xi(times).measure;
            const auto rho = make_rho_theta({th, K});
            // distribution functions differ by at most theta^K/(1+theta); single atoms by twice that
            const double b = std::pow(th, K) / (1.0 + th);
            for (const Atom& a : rho.atoms()) CHECK(std::abs(fin.cumulative(a.value) - rho.cumulative(a.value)) <= b + 1e-15);
            CHECK(sup_mass_difference(fin, rho) <= 2 * b + 1e-15);
        }
    }
}

TEST_CASE("RDE residual vanishes on the explicit solutions") {
    for (auto [th, K] : {std::pair{0.2, 15}, {0.5, 35}, {0.85, 120}, {0.97, 600}}) {
        const auto m = make_rho_theta({th, K});
        for (const Atom& a : m.atoms()) CHECK(std::abs(rde_residual(m, a.value)) < 1e-12);
        CHECK(std::abs(rde_residual(m, 1.0)) < 1e-12);
    }
    const auto dinf = AtomicMeasure::dirac_infinity();
    for (double t : {0.0, 0.3, 1.0}) CHECK(rde_residual(dinf, t) == 0.0);
    const AtomicMeasure d1({{1.0, 1.0}}, 0.0);
    CHECK(rde_residual(d1, 1.0) == 0.0);
}

TEST_CASE("random finite Xi: residual zero and F(t) >= t/2") {
    std::mt19937_64 rng(20261019);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 1 + static_cast<int>(U(rng) * 30);
        std::vector<double> t(n);
        for (auto& x : t) x = 1e-3 + (1 - 1e-3) * U(rng);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        const auto m = solve_rde_finite_xi(t).measure;
        CHECK(std::abs(m.total_mass() - 1.0) < 1e-12);
        CHECK(m.in_m1());
        for (double s : t) {
            CHECK(std::abs(rde_residual(m, s)) < 1e-12);
            CHECK(m.cumulative(s) >= s / 2 - 1e-15);
        }
    }
}

TEST_CASE("scaling rho_theta by theta is the identity") {
    for (auto [th, K] : {std::pair{0.3, 20}, {0.6, 50}, {0.9, 200}}) {
        const auto m = make_rho_theta({th, K});
        const auto g = scale_measure(m, th);
        CHECK(sup_mass_difference(g, m) <= std::pow(th, K - 1) + 1e-12);
        // masses on shared atoms agree to rounding; only the last atom of m is absent in g
        for (std::size_t k = 0; k + 1 < m.atoms().size(); ++k)
            CHECK(std::abs(g.mass_at(m.atoms()[k + 1].value) - m.atoms()[k + 1].mass) < 1e-12);
        CHECK(std::abs(g.inf_mass() - m.inf_mass()) < 1e-12);
        CHECK(std::abs(g.total_mass() - 1.0) < 1e-12);
    }
}

TEST_CASE("scale by one is the identity") {
    const auto m = solve_rde_finite_xi(std::vector<double>{0.1, 0.35, 0.6, 1.0}).measure;
    const auto g = scale_measure(m, 1.0);
    CHECK(sup_mass_difference(g, m) == 0.0);
}

TEST_CASE("scale composition on rho_theta") {
    // Gamma_theta undoes Gamma_{1/theta} on the support of rho_theta
    const double th = 0.7;
    const auto m = make_rho_theta({th, 60});
    const auto up = scale_measure(m, 1.0 / th);
    CHECK(up.mass_at(1.0) == 0.0);
    const auto back = scale_measure(up, th);
    for (std::size_t k = 0; k + 1 < m.atoms().size(); ++k)
        CHECK(std::abs(back.mass_at(m.atoms()[k].value) - m.atoms()[k].mass) < 1e-12);
    CHECK(std::abs(back.inf_mass() - m.inf_mass()) < 1e-12);
}

TEST_CASE("scale keeps total mass and the M1 bound") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> t(1 + rep % 12);
        for (auto& x : t) x = 0.01 + 0.99 * U(rng);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        const auto m = solve_rde_finite_xi(t).measure;
        const auto g = scale_measure(m, 0.05 + 0.95 * U(rng));
        CHECK(std::abs(g.total_mass() - 1.0) < 1e-12);
        CHECK(g.in_m1());
    }
}

TEST_CASE("scale rejects measures outside M1") {
    const AtomicMeasure bad({{0.1, 0.5}}, 0.5);
    CHECK_FALSE(bad.in_m1());
    CHECK(code_of([&] { scale_measure(bad, 0.5); }) == ErrorCode::not_scalable);
    CHECK(code_of([&] { scale_measure(make_rho_theta({0.5, 4}), 0.0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("json layout") {
    const auto m = make_rho_theta({0.5, 2});
    const std::string j = m.to_json();
    CHECK(j.find("\"atoms\":[[0.5,") != std::string::npos);
    CHECK(j.find("\"inf_mass\":0.3333333333333333") != std::string::npos);
    CHECK(j.find("\"tail\":{\"K\":2") != std::string::npos);
}
