#include "frde/critical.hpp"
#include "frde/errors.hpp"
#include "frde/io.hpp"
#include "frde/signature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

namespace frde {

double critical_function(double theta) {
    require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
    // tail of sum gamma_k is about theta^{2N}; push it under 1e-17
    const int N = std::max(8, static_cast<int>(std::ceil(std::log(1e-17) / (2.0 * std::log(theta)))) + 1);
    return f_tilde(theta, N).limit;
}

RootResult theta_star(double tol) {
    require(tol >= 1e-12, "tol must be >= 1e-12");
    double lo = CriticalDefaults::bracket_lo;
    double hi = 1.0 - CriticalDefaults::bracket_delta;
    const double glo = critical_function(lo);
    const double ghi = critical_function(hi);
    if (!(glo > 0.0 && ghi < 0.0))
        fail(ErrorCode::no_sign_change, "g does not change sign on the initial bracket",
             io::JsonObject().add("g_lo", glo).add("g_hi", ghi).str());
    int it = 0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (critical_function(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        ++it;
    }
    const double v = 0.5 * (lo + hi);
    return {v, lo, hi, critical_function(v), it};
}

double cached_theta_star() {
    static const double value = theta_star(CriticalDefaults::theta_star_tol).value;
    return value;
}

double c_upper_bound(double theta) { return theta * (2.0 * theta - 1.0) / ((1.0 + theta) * (1.0 + theta)); }

namespace {
double h_of(double theta, double c) { return f_infinity(theta, c, CriticalDefaults::finf_tol).value - 1.0 / (1.0 + theta); }
}  // namespace

CHatResult find_c_hat(double theta, double tol) {
    require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
    require(tol > 0.0, "tol must be > 0");
    const double ts = cached_theta_star();
    if (theta <= ts + CriticalDefaults::gate_margin)
        fail(ErrorCode::below_critical, "theta=" + io::num(theta) + " is not above theta*=" + io::num(ts),
             io::JsonObject().add("theta", theta).add("theta_star", ts).str());

    const int n = CriticalDefaults::scan_points;
    const double ratio = std::log(CriticalDefaults::scan_hi / CriticalDefaults::scan_lo);
    auto grid = [&](int i) {
        if (i == n - 1) return CriticalDefaults::scan_hi;
        return CriticalDefaults::scan_lo * std::exp(ratio * i / (n - 1));
    };

    std::vector<std::pair<double, double>> seen;
    double a = 0.0, b = 0.0;
    bool found = false;
    for (int i = 0; i < n; ++i) {
        const double c = grid(i);
        const double h = h_of(theta, c);
        if (!seen.empty() && seen.back().second < 0.0 && h > 0.0) {
            a = seen.back().first;
            b = c;
            found = true;
            break;
        }
        seen.emplace_back(c, h);
    }
    if (!found) {
        io::Json grid = io::Json::array();
        for (const auto& [c, h] : seen) grid.push_back(io::Json::array({c, io::number(h)}));
        fail(ErrorCode::no_bracket, "no - to + sign change of h on the scan grid",
             io::JsonObject().add("theta", theta).add("h_grid", grid).str());
    }

    int it = 0;
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        const double hm = h_of(theta, mid);
        if (hm < 0.0)
            a = mid;
        else
            b = mid;
        ++it;
    }
    const double v = 0.5 * (a + b);
    CHatResult r;
    r.root = {v, a, b, h_of(theta, v), it};
    r.upper_bound = c_upper_bound(theta);
    r.bound_ok = v <= r.upper_bound + tol;
    return r;
}

int worker_threads() {
    if (const char* env = std::getenv("FROZEN_RDE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(std::min(v, 256L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> sweep_c_hat(double theta_min, double theta_max, double step, double tol) {
    require(theta_min > 0.0 && theta_max < 1.0 && theta_min <= theta_max, "need 0 < theta_min <= theta_max < 1");
    require(step > 0.0, "step must be > 0");
    std::vector<SweepRow> rows;
    for (long i = 0;; ++i) {
        const double th = theta_min + static_cast<double>(i) * step;
        if (th > theta_max + 1e-12) break;
        rows.push_back({std::min(th, theta_max), 0.0, false, ""});
    }
    const double ts = cached_theta_star();

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            SweepRow& r = rows[i];
            if (r.theta <= ts + CriticalDefaults::gate_margin) {
                r.c_hat = 0.0;
                r.has_value = true;
                r.status = "below_critical";
                continue;
            }
            try {
                r.c_hat = find_c_hat(r.theta, tol).root.value;
                r.has_value = true;
                r.status = "ok";
            } catch (const Error& e) {
                r.status = error_code_name(e.code());
            }
        }
    };
    const int nt = std::min<int>(worker_threads(), static_cast<int>(rows.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "# frde sweep-chat v1\ntheta,c_hat,status\n";
    for (const auto& r : rows) out += io::num(r.theta) + ',' + (r.has_value ? io::num(r.c_hat) : "") + ',' + r.status + '\n';
    return out;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
    require(points >= 2, "need at least 2 grid points");
    require(hi > lo, "grid needs hi > lo");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    g.back() = hi;
    return g;
}

std::vector<std::pair<double, double>> profile_f_infinity(double theta, const std::vector<double>& c_grid, double tol) {
    std::vector<std::pair<double, double>> rows(c_grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i = next++; i < c_grid.size() && !failed; i = next++) {
            try {
                rows[i] = {c_grid[i], f_infinity(theta, c_grid[i], tol).value};
            } catch (...) {
                if (!failed.exchange(true)) err = std::current_exception();
            }
        }
    };
    const int nt = std::min<int>(worker_threads(), static_cast<int>(std::max<std::size_t>(c_grid.size(), 1)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return rows;
}

std::string profile_to_csv(const std::vector<std::pair<double, double>>& rows) {
    std::string out = "# frde profile-finf v1\nc,f_inf\n";
    for (const auto& [c, f] : rows) out += io::num(c) + ',' + io::num(f) + '\n';
    return out;
}

int count_crossings(double theta, const std::vector<std::pair<double, double>>& rows) {
    const double q = 1.0 / (1.0 + theta);
    int crossings = 0, last = 0;
    for (const auto& [c, f] : rows) {
        const double h = f - q;
        if (std::abs(h) <= 1e-13) continue;
        const int s = h > 0.0 ? 1 : -1;
        if (last != 0 && s != last) ++crossings;
        last = s;
    }
    return crossings;
}

}  // namespace frde
