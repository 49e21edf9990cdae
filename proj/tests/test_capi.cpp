#include <doctest.h>
#include <json.hpp>

#include "frde/frde.h"

#include <cmath>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

namespace {

// take ownership of a library string
std::string take(char* s) {
    std::string out = s ? s : "";
    frde_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("status names and version") {
    CHECK(std::string(frde_status_name(FRDE_OK)) == "ok");
    CHECK(std::string(frde_status_name(FRDE_E_BELOW_CRITICAL)) == "below_critical");
    CHECK(std::string(frde_status_name(FRDE_E_DEPTH_TOO_LARGE)) == "depth_too_large");
    CHECK(std::string(frde_status_name(FRDE_E_INTERNAL)) == "internal");
    CHECK(std::strlen(frde_version()) > 0);
    frde_string_free(nullptr);  // allowed
}

TEST_CASE("NULL outputs are rejected, not dereferenced") {
    CHECK(frde_rho_theta(0.5, 8, nullptr) == FRDE_E_INVALID_ARGUMENT);
    CHECK(std::string(frde_last_error()).find("must not be NULL") != std::string::npos);
    CHECK(frde_measure_residual(nullptr, 0.5, nullptr) == FRDE_E_INVALID_ARGUMENT);
    CHECK(frde_measure_atom_count(nullptr) == 0);
    CHECK(std::isnan(frde_measure_inf_mass(nullptr)));
    CHECK(frde_signature_length(nullptr) == 0);
    double v = 0;
    CHECK(frde_sample_root(0.5, 3, 1, nullptr) == FRDE_E_INVALID_ARGUMENT);
    CHECK(frde_sample_root(0.5, 3, 1, &v) == FRDE_OK);
    CHECK(std::string(frde_last_error()).empty());  // cleared on success
    frde_measure_free(nullptr);
    frde_signature_free(nullptr);
    frde_bivariate_free(nullptr);
}

TEST_CASE("rho_theta through the handle") {
    frde_measure* m = nullptr;
    REQUIRE(frde_rho_theta(0.5, 8, &m) == FRDE_OK);
    REQUIRE(frde_measure_atom_count(m) == 8);
    // atoms come back in increasing order: index 7 is x_0 = 1
    double x = 1.0;
    for (size_t k = 0; k < 8; ++k) {
        double value = 0, mass = 0;
        REQUIRE(frde_measure_atom(m, 7 - k, &value, &mass) == FRDE_OK);
        CHECK(value == doctest::Approx(x).epsilon(1e-15));
        // exact c_k; the tail below x_7 travels in the JSON tail note
        CHECK(mass == doctest::Approx(x / 3).epsilon(1e-14));
        x *= 0.5;
    }
    CHECK(frde_measure_inf_mass(m) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(frde_measure_atom(m, 8, nullptr, nullptr) == FRDE_E_INVALID_ARGUMENT);
    double r = 1;
    REQUIRE(frde_measure_residual(m, 0.5, &r) == FRDE_OK);
    double cum = 0;
    REQUIRE(frde_measure_cumulative(m, 1.0, &cum) == FRDE_OK);
    CHECK(cum == doctest::Approx(2.0 / 3).epsilon(1e-14));

    char* js = nullptr;
    REQUIRE(frde_measure_json(m, &js) == FRDE_OK);
    const auto j = json::parse(take(js));
    CHECK(j.contains("atoms"));
    CHECK(j["tail"]["lumped"].get<double>() == doctest::Approx(std::pow(0.5, 8) / 1.5).epsilon(1e-14));

    frde_measure* s = nullptr;
    REQUIRE(frde_measure_scale(m, 0.5, &s) == FRDE_OK);
    CHECK(frde_measure_atom_count(s) > 0);
    frde_measure_free(s);
    frde_measure_free(m);

    CHECK(frde_rho_theta(1.5, 8, &m) == FRDE_E_INVALID_ARGUMENT);
    CHECK(std::strlen(frde_last_error()) > 0);
}

TEST_CASE("finite Xi solutions") {
    const double t[] = {0.2, 0.45, 0.7};
    frde_measure* m = nullptr;
    int empty = -1;
    REQUIRE(frde_finite_xi(t, 3, &m, &empty) == FRDE_OK);
    CHECK(empty == 0);
    double total = frde_measure_inf_mass(m);
    for (size_t i = 0; i < frde_measure_atom_count(m); ++i) {
        double v = 0, w = 0;
        frde_measure_atom(m, i, &v, &w);
        CHECK(w >= 0);
        total += w;
    }
    CHECK(std::abs(total - 1) < 1e-14);
    for (double tt : {0.1, 0.2, 0.3, 0.45, 0.9, 1.0}) {
        double r = 1;
        REQUIRE(frde_measure_residual(m, tt, &r) == FRDE_OK);
        CHECK(std::abs(r) < 1e-12);
    }
    frde_measure_free(m);
    const double unsorted[] = {0.7, 0.2};
    CHECK(frde_finite_xi(unsorted, 2, &m, &empty) == FRDE_E_INVALID_ARGUMENT);

    REQUIRE(frde_finite_xi(nullptr, 0, &m, &empty) == FRDE_OK);
    CHECK(empty == 1);
    CHECK(frde_measure_inf_mass(m) == 1.0);
    frde_measure_free(m);
}

TEST_CASE("signature handle") {
    frde_signature* s = nullptr;
    REQUIRE(frde_signature_compute(0.85, 0.0, 20, &s) == FRDE_OK);
    const size_t n = frde_signature_length(s);
    REQUIRE(n >= 20);
    std::vector<double> buf(n);
    CHECK(frde_signature_values(s, buf.data(), n - 1) == FRDE_E_INVALID_ARGUMENT);
    REQUIRE(frde_signature_values(s, buf.data(), n) == FRDE_OK);
    for (double v : buf) CHECK(v == doctest::Approx(20.0 / 37).epsilon(1e-15));
    double lim = 0, tb = -1;
    REQUIRE(frde_signature_limit(s, &lim, &tb) == FRDE_OK);
    CHECK(lim == doctest::Approx(20.0 / 37).epsilon(1e-15));
    CHECK(tb >= 0);

    char* csv = nullptr;
    REQUIRE(frde_signature_csv(s, 5, &csv) == FRDE_OK);
    const std::string c = take(csv);
    CHECK(c.rfind("# {\"format\":\"frde-signature/1\"", 0) == 0);
    CHECK(c.find("\nn,f_n\n0,") != std::string::npos);
    CHECK(frde_signature_csv(s, 0, &csv) == FRDE_E_INVALID_ARGUMENT);

    int ok = 0;
    char* rep = nullptr;
    REQUIRE(frde_signature_check(s, 1e-12, &ok, &rep) == FRDE_OK);
    CHECK(ok == 1);
    CHECK(json::parse(take(rep)).is_object());
    frde_signature_free(s);
}

TEST_CASE("hand-built signature and recovered c") {
    // values of the c = 0 signature, fed back in by hand
    const double th = 0.6;
    std::vector<double> v(40, 1 / (1 + th));
    frde_signature* s = nullptr;
    REQUIRE(frde_signature_from_values(th, 0.0, v.data(), v.size(), 1 / (1 + th), 0.0, &s) == FRDE_OK);
    double c = 1;
    REQUIRE(frde_signature_c(s, 39, 1e-12, &c) == FRDE_OK);
    CHECK(std::abs(c) < 1e-14);
    double r = 1;
    REQUIRE(frde_signature_residual(s, 0.0, 3, 39, 1e-12, &r) == FRDE_OK);
    CHECK(std::abs(r) < 1e-14);
    frde_signature_free(s);
    CHECK(frde_signature_from_values(th, 0.0, v.data(), 1, 0.6, 0.0, &s) == FRDE_E_INVALID_ARGUMENT);
    CHECK(frde_signature_from_values(1.0, 0.0, v.data(), 3, 0.6, 0.0, &s) == FRDE_E_INVALID_ARGUMENT);
}

TEST_CASE("critical values") {
    frde_root r{};
    REQUIRE(frde_theta_star(1e-4, &r) == FRDE_OK);
    CHECK(std::abs(r.value - 0.636) <= 0.001);
    CHECK(r.lo < r.hi);

    double ub = 0;
    int bound_ok = 0;
    CHECK(frde_find_c_hat(0.6, 1e-12, &r, &ub, &bound_ok) == FRDE_E_BELOW_CRITICAL);
    CHECK(std::string(frde_last_error()).size() > 0);
    CHECK(std::string(frde_last_error_details()).find("theta_star") != std::string::npos);

    REQUIRE(frde_find_c_hat(0.85, 1e-12, &r, &ub, &bound_ok) == FRDE_OK);
    CHECK(r.value > 0);
    CHECK(r.value <= ub);
    CHECK(bound_ok == 1);
    CHECK(ub == doctest::Approx(0.85 * 0.7 / (1.85 * 1.85)).epsilon(1e-15));

    char* csv = nullptr;
    int crossings = -1;
    REQUIRE(frde_profile_f_infinity_csv(0.85, ub, 21, &crossings, &csv) == FRDE_OK);
    CHECK(crossings == 1);
    CHECK(take(csv).rfind("# frde profile-finf v1\n", 0) == 0);
    CHECK(frde_profile_f_infinity_csv(0.4, 0.0, 21, &crossings, &csv) == FRDE_E_INVALID_ARGUMENT);

    REQUIRE(frde_sweep_c_hat_csv(0.62, 0.7, 0.04, 1e-12, &csv) == FRDE_OK);
    const std::string sw = take(csv);
    CHECK(sw.find("below_critical") != std::string::npos);
    CHECK(sw.find(",ok\n") != std::string::npos);

    double val = 0, err = -1;
    REQUIRE(frde_f_infinity(0.85, 0.0, 1e-13, &val, &err) == FRDE_OK);
    CHECK(val == doctest::Approx(20.0 / 37).epsilon(1e-13));
    CHECK(err >= 0);
}

TEST_CASE("check-solution report") {
    frde_root r{};
    REQUIRE(frde_find_c_hat(0.85, 1e-12, &r, nullptr, nullptr) == FRDE_OK);
    int is_sol = -1;
    char* out = nullptr;
    REQUIRE(frde_check_solution_json(0.85, r.value, 400, &is_sol, &out) == FRDE_OK);
    auto j = json::parse(take(out));
    CHECK(is_sol == 1);
    CHECK(j["is_solution"] == true);
    CHECK(j["c_recovered"].get<double>() == doctest::Approx(r.value).epsilon(1e-8));
    CHECK(j["defaults"].contains("iteration_cap"));

    REQUIRE(frde_check_solution_json(0.85, 0.5 * r.value, 400, &is_sol, &out) == FRDE_OK);
    j = json::parse(take(out));
    CHECK(is_sol == 0);
    CHECK(j["max_abs_residual"].get<double>() > 1e-8);
    CHECK(frde_check_solution_json(0.85, r.value, 2, &is_sol, &out) == FRDE_E_INVALID_ARGUMENT);
}

TEST_CASE("bivariate handles") {
    frde_bivariate* d = nullptr;
    frde_bivariate* t = nullptr;
    REQUIRE(frde_bivariate_diagonal(0.5, 36, &d) == FRDE_OK);
    REQUIRE(frde_bivariate_apply_t2(d, &t) == FRDE_OK);
    double off = 1;
    REQUIRE(frde_bivariate_off_diagonal(t, &off) == FRDE_OK);
    CHECK(off < 1e-15);
    std::vector<double> f(64);
    size_t len = 0;
    REQUIRE(frde_bivariate_signature(t, f.data(), f.size(), &len) == FRDE_OK);
    REQUIRE(len == 37);
    for (size_t i = 0; i < len; ++i) CHECK(f[i] == doctest::Approx(2.0 / 3).epsilon(1e-10));
    CHECK(frde_bivariate_signature(t, f.data(), 3, &len) == FRDE_E_INVALID_ARGUMENT);
    frde_bivariate_free(t);

    REQUIRE(frde_bivariate_scale(d, 2, &t) == FRDE_OK);
    frde_bivariate_free(t);

    frde_bivariate* p = nullptr;
    REQUIRE(frde_bivariate_product(0.5, 20, &p) == FRDE_OK);
    REQUIRE(frde_bivariate_off_diagonal(p, &off) == FRDE_OK);
    CHECK(off > 0.5);
    // rho x rho breaks the joint bound, so it cannot be rescaled
    CHECK(frde_bivariate_scale(p, 1, &t) == FRDE_E_NOT_SCALABLE);
    frde_bivariate_free(p);

    char* js = nullptr;
    REQUIRE(frde_bivariate_json(d, &js) == FRDE_OK);
    CHECK(json::parse(take(js))["K"] == 36);
    frde_bivariate_free(d);

    int K = 0;
    REQUIRE(frde_default_grid_K(0.5, &K) == FRDE_OK);
    CHECK(2 * std::pow(0.5, K) / 1.5 < 1e-10);

    REQUIRE(frde_bivariate_report_json(0.85, -1.0, 60, &js) == FRDE_OK);
    CHECK(json::parse(take(js)).is_object());
}

TEST_CASE("signature to bivariate and the F operator") {
    frde_root r{};
    REQUIRE(frde_find_c_hat(0.85, 1e-12, &r, nullptr, nullptr) == FRDE_OK);
    frde_signature* s = nullptr;
    REQUIRE(frde_signature_compute(0.85, r.value, 400, &s) == FRDE_OK);
    frde_bivariate* m = nullptr;
    REQUIRE(frde_bivariate_from_signature(s, 60, &m) == FRDE_OK);
    double off = 0;
    frde_bivariate_off_diagonal(m, &off);
    CHECK(off > 0.01);
    std::vector<double> vals(frde_signature_length(s));
    frde_signature_values(s, vals.data(), vals.size());
    for (int n = 0; n <= 10; ++n) {
        double v = 0;
        REQUIRE(frde_apply_f_operator(s, n, 400, 1e-12, &v) == FRDE_OK);
        CHECK(std::abs(v - vals[static_cast<size_t>(n)]) < 1e-8);
    }
    frde_bivariate_free(m);
    frde_signature_free(s);
}

TEST_CASE("dynamics probe") {
    char* sum = nullptr;
    REQUIRE(frde_endogeny_probe(0.5, 36, 5, 1e-9, nullptr, &sum, nullptr) == FRDE_OK);
    const auto j = json::parse(take(sum));
    CHECK(j["steps"] == 5);
    CHECK(j["c_hat"].is_null());
    CHECK(j["verdict"] == "undecided");
    char* tr = nullptr;
    REQUIRE(frde_endogeny_probe(0.9, 60, 3, 1e-9, &tr, nullptr, nullptr) == FRDE_OK);
    CHECK(take(tr).rfind("# frde iterate v1\n", 0) == 0);
}

TEST_CASE("Monte Carlo entry points are deterministic") {
    double a = 0, b = 0;
    REQUIRE(frde_sample_root(0.7, 10, 99, &a) == FRDE_OK);
    REQUIRE(frde_sample_root(0.7, 10, 99, &b) == FRDE_OK);
    CHECK(a == b);
    double y = 0, yp = 0;
    REQUIRE(frde_sample_bivariate(0.7, 10, 99, &y, &yp) == FRDE_OK);
    CHECK(y == a);  // lane 0 shares the univariate labels
    CHECK(frde_sample_root(0.7, 40, 1, &a) == FRDE_E_DEPTH_TOO_LARGE);

    char *c1 = nullptr, *c2 = nullptr, *s1 = nullptr;
    REQUIRE(frde_simulate_root(0.5, 6, 500, 3, &c1, &s1) == FRDE_OK);
    // any output may be skipped
    REQUIRE(frde_simulate_root(0.5, 6, 500, 3, &c2, nullptr) == FRDE_OK);
    frde_string_free(c2);
    const auto j = json::parse(take(s1));
    CHECK(j["p_inf"].get<double>() >= 0);
    const std::string one = take(c1);
    REQUIRE(frde_simulate_root(0.5, 6, 500, 3, &c2, &s1) == FRDE_OK);
    frde_string_free(s1);
    CHECK(take(c2) == one);

    REQUIRE(frde_simulate_bivariate(0.5, 6, 500, 3, nullptr, &s1) == FRDE_OK);
    CHECK(json::parse(take(s1)).contains("p_diff"));

    REQUIRE(frde_frozen_iteration(0.6, 8, 1, 5, 4, &s1) == FRDE_OK);
    const auto f = json::parse(take(s1));
    CHECK(f["inclusion_failures"] == 0);
    CHECK(f["sandwich_failures"] == 0);
    CHECK(f["instances"].size() == 5);
}

TEST_CASE("errors are per thread") {
    CHECK(frde_rho_theta(2.0, 8, nullptr) == FRDE_E_INVALID_ARGUMENT);
    std::string other;
    std::thread th([&] { other = frde_last_error(); });
    th.join();
    CHECK(other.empty());
    CHECK(std::strlen(frde_last_error()) > 0);
}

TEST_CASE("defaults") {
    char* s = nullptr;
    REQUIRE(frde_defaults_json(&s) == FRDE_OK);
    const auto j = json::parse(take(s));
    CHECK(j["iteration_cap"].get<int>() > 0);
    CHECK(j.contains("c_hat_tol"));
    CHECK_FALSE(j.contains("threads"));
}
