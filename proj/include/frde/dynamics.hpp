#pragma once

#include "frde/bivariate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace frde {

// One application of the bivariate RDE map: half keep-or-kill, half minimum.
BivariateGridMeasure apply_T2(const BivariateGridMeasure& m);

// Moves each row's marginal error onto the diagonal cell. Returns the largest
// correction applied; symmetry is untouched.
double project_marginals(BivariateGridMeasure& m);

double tv_distance(const BivariateGridMeasure& a, const BivariateGridMeasure& b);

enum class Verdict { converged_diagonal, converged_nondiagonal, undecided };
const char* verdict_name(Verdict v) noexcept;

struct TraceRecord {
    int step;
    double off_diagonal_mass;
    double tv_to_previous;
    double signature_distance;  // NaN without a reference
};

struct IterationDefaults {
    static constexpr double tol = 1e-9;
    static constexpr int max_steps = 10'000;
    static constexpr double diagonal_factor = 10.0;  // diagonal verdict: off-diag < factor*tol
};

struct IterationTrace {
    std::vector<TraceRecord> records;
    Verdict verdict = Verdict::undecided;
    BivariateGridMeasure final_measure{0.5, 2};
    double max_projection = 0.0;  // largest marginal correction over all steps

    std::string to_csv() const;
};

// Stops once tv_to_previous < tol or after max_steps.
IterationTrace iterate(const BivariateGridMeasure& m0, int max_steps, double tol = IterationDefaults::tol,
                       const std::vector<double>* reference = nullptr);

struct ProbeResult {
    Verdict verdict = Verdict::undecided;
    double final_off_diag = 0.0;
    double final_tv = 0.0;
    int steps = 0;
    std::optional<double> signature_gap;  // sup |f - f_{theta,c_hat}| when theta > theta*
    std::optional<double> c_hat;
};

ProbeResult endogeny_probe(double theta, int K, int max_steps, double tol = IterationDefaults::tol,
                           IterationTrace* trace_out = nullptr);

}  // namespace frde
