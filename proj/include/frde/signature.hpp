#pragma once

#include <string>
#include <vector>

namespace frde {

inline constexpr long kDefaultIterationCap = 1'000'000;

struct Signature {
    double theta = 0.5;
    double c = 0.0;
    std::vector<double> values;  // f(0..N)
    double limit = 0.0;          // estimate of f(inf)
    double tail_bound = 0.0;     // |f(N) - f(inf)| <= tail_bound

    int N() const noexcept { return static_cast<int>(values.size()) - 1; }
    double operator[](int n) const { return values.at(static_cast<std::size_t>(n)); }
};

double psi_map(double theta, double c, double x);

// one step f(n-1) -> f(n), x = theta^{n-1}; cancellation-free form
double signature_step(double theta, double c, double f_prev, double x);
double signature_f0(double theta, double c);

Signature compute_signature(double theta, double c, int N);

struct LimitEstimate {
    double value;
    double certified_error;
    long iterations;
};

// Stops once sqrt(c(1-theta^2)) theta^n/(1-theta) < tol.
LimitEstimate f_infinity(double theta, double c, double tol, long max_iterations = kDefaultIterationCap);

double gamma_n(double theta, int n);

struct DerivativeSeq {
    double theta = 0.5;
    std::vector<double> values;  // f~(0..N)
    double limit = 0.0;
    double tail_bound = 0.0;  // (1+theta)^2 theta^N/(1-theta)
    double tail_lo = 0.0;     // sharp bracket on sum_{k>N} gamma_k
    double tail_hi = 0.0;
};

DerivativeSeq f_tilde(double theta, int N);

struct ConditionVerdict {
    std::string name;
    bool passed = false;
    double worst_slack = 0.0;
    int worst_index = -1;
};

struct VerdictReport {
    std::vector<ConditionVerdict> conditions;
    bool all_passed() const noexcept;
    const ConditionVerdict& at(const std::string& name) const;
    std::string to_json() const;
};

VerdictReport check_signature_conditions(const Signature& f, double tol = 1e-12);

struct TailSum {
    double value;
    double lo;
    double hi;
};

// sum_{t>=from} theta^t f(t+1), explicit below T, geometric tail from T on
TailSum shifted_tail_sum(const Signature& f, int from, int T);

// the n = 0 relation solved for c, corrected by 1/(1+theta)^2 - f(inf)^2 so that it also
// recovers c when f(inf) != 1/(1+theta).
double c_from_signature(const Signature& f, int T, double tol = 1e-10);

// LHS - RHS of f(n)^2 = 1/(1+theta)^2 + theta^n f(n) - (1-theta) sum_{t>=n} theta^t f(t+1) + c theta^{2n}
double bivariate_rde_residual_f(const Signature& f, double c, int n, int T, double tol = 1e-10);

// Random sequence meeting conditions (i)-(v) with limit exactly 1/(1+theta);
// u in [0,1]^{N+1} drives the shape. Used by property tests and oracles.
Signature admissible_signature(double theta, const std::vector<double>& u);

}  // namespace frde
