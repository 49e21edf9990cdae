#define FRDE_BUILDING
#include "frde/frde.h"

#include "frde/bivariate.hpp"
#include "frde/critical.hpp"
#include "frde/dynamics.hpp"
#include "frde/errors.hpp"
#include "frde/io.hpp"
#include "frde/measures.hpp"
#include "frde/rtp_sim.hpp"
#include "frde/signature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct frde_measure {
    frde::AtomicMeasure m;
};
struct frde_signature {
    frde::Signature s;
};
struct frde_bivariate {
    frde::BivariateGridMeasure m;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_details;

template <class Fn>
int guard(Fn&& fn) {
    g_error.clear();
    g_details.clear();
    try {
        fn();
        return FRDE_OK;
    } catch (const frde::Error& e) {
        g_error = e.what();
        g_details = e.details();
        return static_cast<int>(e.code());
    } catch (const std::bad_alloc&) {
        g_error = "out of memory";
        return FRDE_E_INTERNAL;
    } catch (const std::exception& e) {
        g_error = e.what();
        return FRDE_E_INTERNAL;
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void need(const void* p, const char* what) {
    if (!p) frde::fail(frde::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

void give(char** out, const std::string& s) {
    if (out) *out = dup(s);
}

frde_root to_c(const frde::RootResult& r) { return {r.value, r.lo, r.hi, r.residual, r.iterations}; }

frde::io::Json defaults_json() {
    using CD = frde::CriticalDefaults;
    using ID = frde::IterationDefaults;
    return frde::io::JsonObject()
        .add("iteration_cap", frde::kDefaultIterationCap)
        .add("theta_star_cache_tol", CD::theta_star_tol)
        .add("theta_bracket_lo", CD::bracket_lo)
        .add("theta_bracket_hi", 1.0 - CD::bracket_delta)
        .add("c_hat_tol", CD::chat_tol)
        .add("f_inf_tol", CD::finf_tol)
        .add("scan_lo", CD::scan_lo)
        .add("scan_hi", CD::scan_hi)
        .add("scan_points", CD::scan_points)
        .add("gate_margin", CD::gate_margin)
        .add("profile_points", CD::profile_points)
        .add("iterate_tol", ID::tol)
        .add("iterate_max_steps", ID::max_steps)
        .add("diagonal_factor", ID::diagonal_factor)
        .add("frozen_max_depth", frde::FrozenDefaults::max_depth)
        .add("frozen_core_depth", frde::FrozenDefaults::core_depth)
        .json();
}

}  // namespace

extern "C" {

const char* frde_version(void) { return "1.0.0"; }

const char* frde_status_name(int status) { return frde::error_code_name(static_cast<frde::ErrorCode>(status)); }
const char* frde_last_error(void) { return g_error.c_str(); }
const char* frde_last_error_details(void) { return g_details.c_str(); }
void frde_string_free(char* s) { std::free(s); }

int frde_defaults_json(char** out) {
    return guard([&] {
        need(out, "out");
        give(out, defaults_json().dump());
    });
}

// ---- measures ----

int frde_rho_theta(double theta, int K, frde_measure** out) {
    return guard([&] {
        need(out, "out");
        *out = new frde_measure{frde::make_rho_theta({theta, K})};
    });
}

int frde_finite_xi(const double* times, size_t n, frde_measure** out, int* empty_xi) {
    return guard([&] {
        need(out, "out");
        if (n) need(times, "times");
        auto sol = frde::solve_rde_finite_xi(std::span<const double>(times, n));
        if (empty_xi) *empty_xi = sol.empty_xi;
        *out = new frde_measure{std::move(sol.measure)};
    });
}

int frde_measure_scale(const frde_measure* m, double t, frde_measure** out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        *out = new frde_measure{frde::scale_measure(m->m, t)};
    });
}

int frde_measure_residual(const frde_measure* m, double t, double* out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        *out = frde::rde_residual(m->m, t);
    });
}

int frde_measure_cumulative(const frde_measure* m, double t, double* out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        *out = m->m.cumulative(t);
    });
}

size_t frde_measure_atom_count(const frde_measure* m) { return m ? m->m.atoms().size() : 0; }

int frde_measure_atom(const frde_measure* m, size_t i, double* value, double* mass) {
    return guard([&] {
        need(m, "m");
        frde::require(i < m->m.atoms().size(), "atom index out of range");
        if (value) *value = m->m.atoms()[i].value;
        if (mass) *mass = m->m.atoms()[i].mass;
    });
}

double frde_measure_inf_mass(const frde_measure* m) { return m ? m->m.inf_mass() : std::nan(""); }

int frde_measure_json(const frde_measure* m, char** out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        give(out, m->m.to_json());
    });
}

void frde_measure_free(frde_measure* m) { delete m; }

// ---- signatures ----

int frde_signature_compute(double theta, double c, int N, frde_signature** out) {
    return guard([&] {
        need(out, "out");
        *out = new frde_signature{frde::compute_signature(theta, c, N)};
    });
}

int frde_signature_from_values(double theta, double c, const double* values, size_t n, double limit,
                               double tail_bound, frde_signature** out) {
    return guard([&] {
        need(out, "out");
        need(values, "values");
        frde::require(n >= 2, "need at least two values");
        frde::require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
        frde::require(tail_bound >= 0.0, "tail_bound must be >= 0");
        frde::Signature s;
        s.theta = theta;
        s.c = c;
        s.values.assign(values, values + n);
        s.limit = limit;
        s.tail_bound = tail_bound;
        *out = new frde_signature{std::move(s)};
    });
}

size_t frde_signature_length(const frde_signature* s) { return s ? s->s.values.size() : 0; }

int frde_signature_values(const frde_signature* s, double* buf, size_t cap) {
    return guard([&] {
        need(s, "s");
        need(buf, "buf");
        frde::require(cap >= s->s.values.size(), "buffer too small");
        std::memcpy(buf, s->s.values.data(), s->s.values.size() * sizeof(double));
    });
}

int frde_signature_limit(const frde_signature* s, double* limit, double* tail_bound) {
    return guard([&] {
        need(s, "s");
        if (limit) *limit = s->s.limit;
        if (tail_bound) *tail_bound = s->s.tail_bound;
    });
}

int frde_signature_csv(const frde_signature* s, int rows, char** out) {
    return guard([&] {
        need(s, "s");
        need(out, "out");
        frde::require(rows >= 1 && static_cast<size_t>(rows) <= s->s.values.size(), "rows out of range");
        const std::string header = frde::io::JsonObject()
                                       .add("format", "frde-signature/1")
                                       .add("theta", s->s.theta)
                                       .add("c", s->s.c)
                                       .add("N", rows)
                                       .add("limit", s->s.limit)
                                       .add("tail_bound", s->s.tail_bound)
                                       .str();
        std::string csv = "# " + header + "\nn,f_n\n";
        for (int n = 0; n < rows; ++n) csv += std::to_string(n) + ',' + frde::io::num(s->s[n]) + '\n';
        give(out, csv);
    });
}

int frde_signature_check(const frde_signature* s, double tol, int* all_passed, char** report_json) {
    return guard([&] {
        need(s, "s");
        const auto r = frde::check_signature_conditions(s->s, tol);
        if (all_passed) *all_passed = r.all_passed();
        give(report_json, r.to_json());
    });
}

int frde_signature_c(const frde_signature* s, int T, double tol, double* out) {
    return guard([&] {
        need(s, "s");
        need(out, "out");
        *out = frde::c_from_signature(s->s, T, tol);
    });
}

int frde_signature_residual(const frde_signature* s, double c, int n, int T, double tol, double* out) {
    return guard([&] {
        need(s, "s");
        need(out, "out");
        *out = frde::bivariate_rde_residual_f(s->s, c, n, T, tol);
    });
}

int frde_check_solution_json(double theta, double c, int N, int* is_solution, char** out) {
    return guard([&] {
        frde::require(N >= 3, "N must be >= 3");
        const auto f = frde::compute_signature(theta, c, N);
        const auto rep = frde::check_signature_conditions(f);
        // short signatures carry a loose tail; widen the sum tolerance and say so
        const double tail_tol = std::max(1e-10, 10.0 * f.tail_bound / (1.0 - theta));
        double worst = 0.0;
        int worst_n = 0;
        for (int n = 0; n < N; ++n) {
            const double r = frde::bivariate_rde_residual_f(f, c, n, N, tail_tol);
            if (std::abs(r) > worst) {
                worst = std::abs(r);
                worst_n = n;
            }
        }
        const double c_back = frde::c_from_signature(f, N, tail_tol);
        const double residual_tol = 1e-8;
        const bool ok = rep.all_passed() && worst < residual_tol;
        if (is_solution) *is_solution = ok;
        give(out, frde::io::JsonObject()
                      .add("theta", theta)
                      .add("c", c)
                      .add("N", N)
                      .add("limit", f.limit)
                      .add("tail_bound", f.tail_bound)
                      .add_raw("conditions", rep.to_json())
                      .add("max_abs_residual", worst)
                      .add("max_residual_index", worst_n)
                      .add("residual_tol", residual_tol)
                      .add("tail_tol", tail_tol)
                      .add("tail_certified", tail_tol <= residual_tol)
                      .add("c_recovered", c_back)
                      .add("is_solution", ok)
                      .add("defaults", defaults_json())
                      .str());
    });
}

void frde_signature_free(frde_signature* s) { delete s; }

int frde_psi(double theta, double c, double x, double* out) {
    return guard([&] {
        need(out, "out");
        *out = frde::psi_map(theta, c, x);
    });
}

int frde_f_infinity(double theta, double c, double tol, double* value, double* certified_error) {
    return guard([&] {
        const auto r = frde::f_infinity(theta, c, tol);
        if (value) *value = r.value;
        if (certified_error) *certified_error = r.certified_error;
    });
}

int frde_gamma_n(double theta, int n, double* out) {
    return guard([&] {
        need(out, "out");
        *out = frde::gamma_n(theta, n);
    });
}

int frde_f_tilde_limit(double theta, int N, double* limit, double* tail_bound) {
    return guard([&] {
        const auto d = frde::f_tilde(theta, N);
        if (limit) *limit = d.limit;
        if (tail_bound) *tail_bound = d.tail_bound;
    });
}

// ---- critical ----

int frde_theta_star(double tol, frde_root* out) {
    return guard([&] {
        need(out, "out");
        *out = to_c(frde::theta_star(tol));
    });
}

int frde_find_c_hat(double theta, double tol, frde_root* out, double* upper_bound, int* bound_ok) {
    return guard([&] {
        need(out, "out");
        const auto r = frde::find_c_hat(theta, tol);
        *out = to_c(r.root);
        if (upper_bound) *upper_bound = r.upper_bound;
        if (bound_ok) *bound_ok = r.bound_ok;
    });
}

int frde_sweep_c_hat_csv(double theta_min, double theta_max, double step, double tol, char** out) {
    return guard([&] {
        need(out, "out");
        give(out, frde::sweep_to_csv(frde::sweep_c_hat(theta_min, theta_max, step, tol)));
    });
}

int frde_profile_f_infinity_csv(double theta, double c_max, int points, int* crossings, char** out) {
    return guard([&] {
        need(out, "out");
        if (!(c_max > 0.0)) c_max = frde::c_upper_bound(theta);
        frde::require(c_max > 0.0, "c_max must be > 0 (the default bound is not positive for theta <= 1/2)");
        const auto rows = frde::profile_f_infinity(theta, frde::linear_grid(0.0, c_max, points));
        if (crossings) *crossings = frde::count_crossings(theta, rows);
        give(out, frde::profile_to_csv(rows));
    });
}

// ---- bivariate ----

int frde_bivariate_from_signature(const frde_signature* s, int K, frde_bivariate** out) {
    return guard([&] {
        need(s, "s");
        need(out, "out");
        *out = new frde_bivariate{frde::from_signature(s->s, K)};
    });
}

int frde_bivariate_diagonal(double theta, int K, frde_bivariate** out) {
    return guard([&] {
        need(out, "out");
        *out = new frde_bivariate{frde::diagonal_measure(theta, K)};
    });
}

int frde_bivariate_product(double theta, int K, frde_bivariate** out) {
    return guard([&] {
        need(out, "out");
        *out = new frde_bivariate{frde::product_measure(theta, K)};
    });
}

int frde_bivariate_apply_t2(const frde_bivariate* m, frde_bivariate** out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        *out = new frde_bivariate{frde::apply_T2(m->m)};
    });
}

int frde_bivariate_scale(const frde_bivariate* m, int l, frde_bivariate** out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        *out = new frde_bivariate{frde::scale_bivariate(m->m, l)};
    });
}

int frde_bivariate_signature(const frde_bivariate* m, double* buf, size_t cap, size_t* len) {
    return guard([&] {
        need(m, "m");
        const auto f = frde::signature_of(m->m);
        if (len) *len = f.size();
        if (buf) {
            frde::require(cap >= f.size(), "buffer too small");
            std::memcpy(buf, f.data(), f.size() * sizeof(double));
        }
    });
}

int frde_bivariate_off_diagonal(const frde_bivariate* m, double* out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        *out = m->m.off_diagonal_mass();
    });
}

int frde_bivariate_json(const frde_bivariate* m, char** out) {
    return guard([&] {
        need(m, "m");
        need(out, "out");
        give(out, m->m.to_json());
    });
}

int frde_bivariate_report_json(double theta, double c, int K, char** out) {
    return guard([&] {
        need(out, "out");
        frde::require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
        if (K <= 0) K = frde::default_grid_K(theta);
        frde::require(K >= 4, "K must be >= 4");
        if (c < 0.0) c = theta > frde::cached_theta_star() + frde::CriticalDefaults::gate_margin
                             ? frde::find_c_hat(theta).root.value
                             : 0.0;
        const auto f = frde::compute_signature(theta, c, K);
        const auto m = frde::from_signature(f, K);
        const auto back = frde::signature_of(m);
        double round_trip = 0.0;
        for (int n = 0; n <= K; ++n) round_trip = std::max(round_trip, std::abs(back[static_cast<size_t>(n)] - f[n]));
        const double scale_gap = frde::max_cell_difference(frde::scale_bivariate(m, 1), frde::coarsen(m, K - 1));
        const auto conds = frde::check_signature_conditions(f);
        const double marg = m.max_marginal_error();
        const bool ok = m.symmetric() && m.min_mass() >= -1e-12 && marg <= 1e-9 + m.trunc_mass() &&
                        m.m2_excess() <= 1e-12 && scale_gap <= 1e-10;
        const auto verdicts = frde::io::JsonObject()
                                         .add("symmetric", m.symmetric())
                                         .add("min_mass", m.min_mass())
                                         .add("total", m.total())
                                         .add("max_marginal_error", marg)
                                         .add("m2_excess", m.m2_excess())
                                         .add("scale_invariance_gap", scale_gap)
                                         .add("signature_round_trip", round_trip)
                                         .add("off_diagonal_mass", m.off_diagonal_mass())
                                         .add_raw("conditions", conds.to_json())
                                         .add("invariants_ok", ok)
                                         .json();
        give(out, frde::io::JsonObject()
                      .add("theta", theta)
                      .add("c", c)
                      .add("K", K)
                      .add_raw("measure", m.to_json())
                      .add("verdicts", verdicts)
                      .add("defaults", defaults_json())
                      .str());
    });
}

int frde_default_grid_K(double theta, int* out) {
    return guard([&] {
        need(out, "out");
        *out = frde::default_grid_K(theta);
    });
}

void frde_bivariate_free(frde_bivariate* m) { delete m; }

int frde_apply_f_operator(const frde_signature* s, int n, int T, double tol, double* out) {
    return guard([&] {
        need(s, "s");
        need(out, "out");
        *out = frde::apply_F_operator(s->s, n, T, tol);
    });
}

// ---- dynamics ----

int frde_endogeny_probe(double theta, int K, int max_steps, double tol, char** trace_csv, char** summary_json,
                        char** final_json) {
    return guard([&] {
        frde::IterationTrace tr{{}, frde::Verdict::undecided, frde::BivariateGridMeasure(theta, K), 0.0};
        const auto r = frde::endogeny_probe(theta, K, max_steps, tol, &tr);
        give(trace_csv, tr.to_csv());
        give(final_json, tr.final_measure.to_json());
        frde::io::JsonObject o;
        o.add("theta", theta)
            .add("K", K)
            .add("max_steps", max_steps)
            .add("tol", tol)
            .add("verdict", frde::verdict_name(r.verdict))
            .add("steps", r.steps)
            .add("final_off_diag", r.final_off_diag)
            .add("final_tv", r.final_tv)
            .add("trunc_mass", tr.final_measure.trunc_mass())
            .add("max_marginal_projection", tr.max_projection);
        if (r.c_hat) o.add("c_hat", *r.c_hat);
        else o.add("c_hat", nullptr);
        if (r.signature_gap) o.add("signature_gap", *r.signature_gap);
        else o.add("signature_gap", nullptr);
        o.add("defaults", defaults_json());
        give(summary_json, o.str());
    });
}

// ---- Monte Carlo ----

int frde_sample_root(double theta, int depth, uint64_t seed, double* out) {
    return guard([&] {
        need(out, "out");
        *out = frde::sample_root(theta, depth, seed);
    });
}

int frde_sample_bivariate(double theta, int depth, uint64_t seed, double* y, double* y_prime) {
    return guard([&] {
        const auto p = frde::sample_bivariate(theta, depth, seed);
        if (y) *y = p.y;
        if (y_prime) *y_prime = p.y_prime;
    });
}

int frde_simulate_root(double theta, int depth, long n, uint64_t seed, char** csv, char** summary_json) {
    return guard([&] {
        const frde::SampleConfig cfg{theta, depth, n, seed};
        const auto b = frde::sample_root_batch(cfg);
        if (csv) give(csv, b.to_csv());
        give(summary_json, b.summary_json(cfg));
    });
}

int frde_simulate_bivariate(double theta, int depth, long n, uint64_t seed, char** csv, char** summary_json) {
    return guard([&] {
        const frde::SampleConfig cfg{theta, depth, n, seed};
        const auto b = frde::sample_bivariate_batch(cfg);
        if (csv) give(csv, b.to_csv());
        give(summary_json, b.summary_json(cfg));
    });
}

int frde_frozen_iteration(double theta, int depth, uint64_t seed, long n, int rounds, char** summary_json) {
    return guard([&] {
        need(summary_json, "summary_json");
        frde::require(n >= 1, "need at least one instance");
        long incl_fail = 0, sandwich_fail = 0, core_nonempty = 0, root_in_f2 = 0;
        frde::io::Json instances = frde::io::Json::array();
        for (long i = 0; i < n; ++i) {
            const auto r = frde::frozen_iteration(theta, depth, seed + static_cast<uint64_t>(i), rounds);
            incl_fail += !r.inclusions_ok();
            sandwich_fail += !r.sandwich_ok;
            core_nonempty += r.f2_core_count > 0;
            root_in_f2 += r.f2_root_count > 0;
            instances.push_back(frde::io::Json::parse(r.to_json()));
        }
        const double dn = static_cast<double>(n);
        give(summary_json, frde::io::JsonObject()
                               .add("theta", theta)
                               .add("depth", depth)
                               .add("rounds", rounds)
                               .add("n", n)
                               .add("seed", seed)
                               .add("core_depth", frde::FrozenDefaults::core_depth)
                               .add("inclusion_failures", incl_fail)
                               .add("sandwich_failures", sandwich_fail)
                               .add("f2_core_nonempty_fraction", static_cast<double>(core_nonempty) / dn)
                               .add("f2_root_fraction", static_cast<double>(root_in_f2) / dn)
                               .add("instances", instances)
                               .add("defaults", defaults_json())
                               .str());
    });
}

}  // extern "C"
