#pragma once

#include <string>
#include <utility>
#include <vector>

namespace frde {

struct RootResult {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct CriticalDefaults {
    static constexpr double theta_star_tol = 1e-6;  // cached gate value
    static constexpr double bracket_lo = 0.5;
    static constexpr double bracket_delta = 1e-4;   // upper end 1 - delta
    static constexpr double chat_tol = 1e-12;
    static constexpr double finf_tol = 1e-13;       // certified accuracy of h(c)
    static constexpr double scan_lo = 1e-8;
    static constexpr double scan_hi = 4.0;
    static constexpr int scan_points = 400;
    static constexpr double gate_margin = 1e-6;
    static constexpr int profile_points = 201;
};

// g(theta) = f~_theta(inf), with enough terms that the tail is below 1e-16
double critical_function(double theta);

RootResult theta_star(double tol);
double cached_theta_star();  // theta_star(1e-6).value, computed once

double c_upper_bound(double theta);  // theta(2 theta - 1)/(1+theta)^2

struct CHatResult {
    RootResult root;
    double upper_bound = 0.0;
    bool bound_ok = true;  // c_hat <= upper_bound + tol
};

CHatResult find_c_hat(double theta, double tol = CriticalDefaults::chat_tol);

struct SweepRow {
    double theta = 0.0;
    double c_hat = 0.0;
    bool has_value = false;
    std::string status;  // ok | below_critical | <error code name>
};

// theta_i = theta_min + i*step while <= theta_max; threads from FROZEN_RDE_THREADS
std::vector<SweepRow> sweep_c_hat(double theta_min, double theta_max, double step,
                                  double tol = CriticalDefaults::chat_tol);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

std::vector<std::pair<double, double>> profile_f_infinity(double theta, const std::vector<double>& c_grid,
                                                          double tol = CriticalDefaults::finf_tol);
std::vector<double> linear_grid(double lo, double hi, int points);
std::string profile_to_csv(const std::vector<std::pair<double, double>>& rows);

// number of sign changes of f_inf - 1/(1+theta) along the profile, zeros skipped
int count_crossings(double theta, const std::vector<std::pair<double, double>>& rows);

int worker_threads();  // FROZEN_RDE_THREADS, else hardware concurrency, at least 1

}  // namespace frde
