#include "frde/signature.hpp"
#include "frde/errors.hpp"
#include "frde/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frde {

namespace {

void check_theta(double theta) { require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)"); }
void check_c(double c) { require(c >= 0.0 && std::isfinite(c), "c must be finite and >= 0"); }

ConditionVerdict verdict(const char* name, double slack, int index, double tol) {
    return {name, slack >= -tol, slack, index};
}

}  // namespace

double psi_map(double theta, double c, double x) {
    check_theta(theta);
    check_c(c);
    if (c == 0.0) {
        // (1 + |2x-1|)/(2 theta) is x/theta on the domain; skip the sqrt round trip
        require(x > 0.5, "x must exceed 1/2");
        return x / theta;
    }
    const double edge = std::sqrt((1.0 - theta * theta) * c) + 0.5;
    if (!(x > edge)) fail(ErrorCode::out_of_domain, "psi: x=" + io::num(x) + " not above " + io::num(edge));
    const double a = 2.0 * x - 1.0;
    const double disc = a * a - 4.0 * c * (1.0 - theta * theta);
    if (!(disc > 0.0)) fail(ErrorCode::out_of_domain, "psi: non-positive discriminant");
    return (1.0 + std::sqrt(disc)) / (2.0 * theta);
}

double signature_f0(double theta, double c) {
    const double p = 1.0 + theta;
    return (1.0 + std::sqrt(1.0 + 8.0 * c * p * p)) / (2.0 * p);
}

double signature_step(double theta, double c, double f_prev, double x) {
    // f(n) = (x + sqrt(a^2 - d))/2 with a = 2 f(n-1) - x, rewritten as a decrement
    const double a = 2.0 * f_prev - x;
    const double d = 4.0 * c * x * x * (1.0 - theta * theta);
    if (d == 0.0) return f_prev;
    const double disc = a * a - d;
    if (!(disc >= 0.0) || !(a > 0.0)) fail(ErrorCode::internal, "signature recursion left its domain");
    return f_prev - d / (2.0 * (a + std::sqrt(disc)));
}

Signature compute_signature(double theta, double c, int N) {
    check_theta(theta);
    check_c(c);
    require(N >= 1, "N must be >= 1");
    Signature s;
    s.theta = theta;
    s.c = c;
    s.values.resize(static_cast<std::size_t>(N) + 1);
    s.values[0] = signature_f0(theta, c);
    double x = 1.0;  // theta^{n-1}
    for (int n = 1; n <= N; ++n) {
        s.values[static_cast<std::size_t>(n)] = signature_step(theta, c, s.values[static_cast<std::size_t>(n) - 1], x);
        x *= theta;
    }
    // x == theta^N here
    s.tail_bound = std::sqrt(c * (1.0 - theta * theta)) * x / (1.0 - theta);
    s.limit = s.values.back() - 0.5 * s.tail_bound;
    return s;
}

LimitEstimate f_infinity(double theta, double c, double tol, long max_iterations) {
    check_theta(theta);
    check_c(c);
    require(tol > 0.0, "tol must be > 0");
    if (c == 0.0) return {1.0 / (1.0 + theta), 0.0, 0};
    const double scale = std::sqrt(c * (1.0 - theta * theta)) / (1.0 - theta);
    double f = signature_f0(theta, c);
    double x = 1.0;
    long n = 0;
    while (scale * x >= tol) {
        if (n >= max_iterations) {
            fail(ErrorCode::iteration_cap,
                 "f_infinity: cap of " + std::to_string(max_iterations) + " steps reached",
                 io::JsonObject().add("achieved_bound", scale * x).add("iterations", n).add("value", f).str());
        }
        f = signature_step(theta, c, f, x);
        x *= theta;
        ++n;
    }
    const double bound = scale * x;
    return {f - 0.5 * bound, 0.5 * bound, n};
}

double gamma_n(double theta, int n) {
    check_theta(theta);
    require(n >= 1, "gamma_n needs n >= 1");
    double pw = 1.0;  // theta^{n-1}
    double geo = 0.0; // sum_{j=0}^{n-2} theta^j
    for (int j = 0; j < n - 1; ++j) {
        geo += pw;
        pw *= theta;
    }
    const double p = 1.0 + theta;
    const double stable = p * p * pw * pw / (pw + 2.0 * geo);
    if (theta <= 0.9) {
        const double direct = pw * pw * (1.0 - theta * theta) / (2.0 / p - pw);
        if (std::abs(direct - stable) > 1e-12 * std::abs(stable))
            fail(ErrorCode::internal, "gamma_n: the two closed forms disagree at n=" + std::to_string(n));
    }
    return stable;
}

DerivativeSeq f_tilde(double theta, int N) {
    check_theta(theta);
    require(N >= 1, "N must be >= 1");
    DerivativeSeq d;
    d.theta = theta;
    d.values.resize(static_cast<std::size_t>(N) + 1);
    const double p = 1.0 + theta;
    d.values[0] = 2.0 * p;
    double pw = 1.0, geo = 0.0;  // theta^{n-1}, sum_{j<=n-2} theta^j
    for (int n = 1; n <= N; ++n) {
        double g = p * p * pw * pw / (pw + 2.0 * geo);
        if (n <= 64 && theta <= 0.9) g = gamma_n(theta, n);  // cross-checked path for the leading terms
        d.values[static_cast<std::size_t>(n)] = d.values[static_cast<std::size_t>(n) - 1] - g;
        geo += pw;
        pw *= theta;
    }
    // pw == theta^N; gamma_k for k > N has denominator in [2/(1+theta) - theta^N, 2/(1+theta)]
    const double t2 = pw * pw;
    d.tail_lo = t2 * p / 2.0;
    d.tail_hi = t2 / (2.0 / p - pw);
    d.tail_bound = p * p * pw / (1.0 - theta);
    d.limit = d.values.back() - 0.5 * (d.tail_lo + d.tail_hi);
    return d;
}

bool VerdictReport::all_passed() const noexcept {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionVerdict& v) { return v.passed; });
}

const ConditionVerdict& VerdictReport::at(const std::string& name) const {
    for (const auto& v : conditions)
        if (v.name == name) return v;
    fail(ErrorCode::invalid_argument, "no condition named " + name);
}

std::string VerdictReport::to_json() const {
    io::Json arr = io::Json::array();
    for (const auto& v : conditions)
        arr.push_back(io::JsonObject()
                          .add("name", v.name)
                          .add("passed", v.passed)
                          .add("worst_slack", v.worst_slack)
                          .add("worst_index", v.worst_index)
                          .json());
    return io::JsonObject().add("all_passed", all_passed()).add("conditions", arr).str();
}

VerdictReport check_signature_conditions(const Signature& f, double tol) {
    check_theta(f.theta);
    require(f.values.size() >= 3, "signature needs at least 3 values");
    const double th = f.theta;
    const double q = 1.0 / (1.0 + th);
    const int N = f.N();
    VerdictReport r;

    r.conditions.push_back(verdict("i", 1.0 - f[0], 0, tol));
    // (ii) is judged against the certified limit bracket, so its slack already includes tol
    const double lim_slack = f.tail_bound + tol - std::abs(f.limit - q);
    r.conditions.push_back({"ii", lim_slack >= 0.0, lim_slack, N});

    double worst = std::numeric_limits<double>::infinity();
    int at = -1;
    for (int n = 1; n <= N; ++n) {
        const double s = f[n - 1] - f[n];
        if (s < worst) { worst = s; at = n; }
    }
    r.conditions.push_back(verdict("iii", worst, at, tol));

    r.conditions.push_back(verdict("iv", 2.0 * f[1] - (1.0 + th) * f[0], 0, tol));

    worst = std::numeric_limits<double>::infinity();
    at = -1;
    for (int n = 1; n < N; ++n) {
        const double s = th * f[n - 1] + f[n + 1] - (1.0 + th) * f[n];
        if (s < worst) { worst = s; at = n; }
    }
    r.conditions.push_back(verdict("v", worst, at, tol));
    return r;
}

TailSum shifted_tail_sum(const Signature& f, int from, int T) {
    const int N = f.N();
    require(from >= 0 && from <= T, "need 0 <= from <= T");
    require(T <= N, "T must not exceed the signature length N");
    const double th = f.theta;
    double pw = 1.0;
    for (int t = 0; t < from; ++t) pw *= th;
    double explicit_part = 0.0;
    // t = from .. T-1 uses f(t+1), which exists since T <= N
    for (int t = from; t < T; ++t) {
        explicit_part += pw * f[t + 1];
        pw *= th;
    }
    // pw == theta^T; f(inf) <= f(t+1) <= f(T) for t >= T
    const double geo = pw / (1.0 - th);
    const double lim_lo = f.values.back() - f.tail_bound;
    return {explicit_part + f.limit * geo, explicit_part + lim_lo * geo, explicit_part + f[T] * geo};
}

namespace {
void check_bracket(const TailSum& s, double theta, double tol) {
    const double width = (1.0 - theta) * (s.hi - s.lo);
    if (width > tol)
        fail(ErrorCode::tail_too_loose, "tail bracket width " + io::num(width) + " exceeds tol " + io::num(tol),
             io::JsonObject().add("width", width).add("tol", tol).str());
}
}  // namespace

double c_from_signature(const Signature& f, int T, double tol) {
    const double th = f.theta;
    const TailSum s = shifted_tail_sum(f, 0, T);
    check_bracket(s, th, tol);
    const double q2 = 1.0 / ((1.0 + th) * (1.0 + th));
    const double raw = q2 + th * f[0] / (1.0 + th) - (1.0 - th) * s.value;
    return raw - (q2 - f.limit * f.limit);
}

double bivariate_rde_residual_f(const Signature& f, double c, int n, int T, double tol) {
    require(n >= 0 && n <= T, "need 0 <= n <= T");
    const double th = f.theta;
    const TailSum s = shifted_tail_sum(f, n, T);
    check_bracket(s, th, tol);
    double pw = 1.0;
    for (int i = 0; i < n; ++i) pw *= th;
    const double fn = f[n];
    const double rhs = 1.0 / ((1.0 + th) * (1.0 + th)) + pw * fn - (1.0 - th) * s.value + c * pw * pw;
    return fn * fn - rhs;
}

Signature admissible_signature(double theta, const std::vector<double>& u) {
    check_theta(theta);
    require(u.size() >= 3, "need at least 3 shape parameters");
    const int N = static_cast<int>(u.size()) - 1;
    const double q = 1.0 / (1.0 + theta);
    // increments d_1..d_N with d_1 small enough for (i),(iv) and d_{n+1} <= theta d_n for (v)
    std::vector<double> d(static_cast<std::size_t>(N) + 2, 0.0);
    d[1] = std::clamp(u[0], 0.0, 1.0) * std::min((1.0 - theta) / (2.0 * (1.0 + theta)), theta * (1.0 - theta) / (1.0 + theta));
    for (int n = 1; n < N; ++n) d[static_cast<std::size_t>(n) + 1] = std::clamp(u[static_cast<std::size_t>(n)], 0.0, 1.0) * theta * d[static_cast<std::size_t>(n)];
    Signature s;
    s.theta = theta;
    s.c = 0.0;
    s.values.assign(static_cast<std::size_t>(N) + 1, q);
    double acc = 0.0;
    for (int n = N - 1; n >= 0; --n) {
        acc += d[static_cast<std::size_t>(n) + 1];
        s.values[static_cast<std::size_t>(n)] = q + acc;
    }
    s.limit = q;
    s.tail_bound = 0.0;
    s.c = c_from_signature(s, N, 1.0);
    return s;
}

}  // namespace frde
