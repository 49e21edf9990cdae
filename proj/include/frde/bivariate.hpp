#pragma once

#include "frde/signature.hpp"

#include <string>
#include <vector>

namespace frde {

// Symmetric table on ({inf} u {theta^k})^2. Index -1 is inf, 0..K-1 are grid
// points and K is a bucket standing for every index >= K.
class BivariateGridMeasure {
public:
    static constexpr int kInfIndex = -1;

    BivariateGridMeasure(double theta, int K);  // all-zero table

    double theta() const noexcept { return theta_; }
    int K() const noexcept { return K_; }
    double x(int k) const;  // theta^k for 0 <= k <= K

    double at(int k, int j) const { return mass_[idx(k, j)]; }
    void set(int k, int j, double v);  // writes (k,j) and (j,k)
    void add(int k, int j, double v);  // single cell, caller keeps symmetry

    const std::vector<double>& raw() const noexcept { return mass_; }
    std::vector<double>& raw() noexcept { return mass_; }

    double total() const noexcept;
    double trace() const noexcept;
    double off_diagonal_mass() const noexcept { return total() - trace(); }
    double trunc_mass() const noexcept;      // cells with an index in the bucket
    double row_sum(int k) const;
    double expected_marginal(int k) const;   // rho mass of index k (bucket: x_K/(1+theta))
    double min_mass() const noexcept;
    bool symmetric() const noexcept;         // exact
    double max_marginal_error() const;

    // rho2({min coordinate <= x_n}) - x_n, maximised over n < K
    double m2_excess() const;

    // F(x_k,x_j) = mass{first <= x_k or second <= x_j}, k,j in 0..K
    double F(int k, int j) const;

    std::string to_json() const;

private:
    std::size_t idx(int k, int j) const;
    double theta_;
    int K_;
    std::vector<double> x_;
    std::vector<double> mass_;
};

BivariateGridMeasure diagonal_measure(double theta, int K);
BivariateGridMeasure product_measure(double theta, int K);

// needs f(0..K); masses below -1e-9 raise not_admissible, smaller negatives are clipped
BivariateGridMeasure from_signature(const Signature& f, int K);

// f(n) for n = 0..K by direct summation
std::vector<double> signature_of(const BivariateGridMeasure& m);

// Gamma^(2)_t with t = theta^l; the result has K - l grid points
BivariateGridMeasure scale_bivariate(const BivariateGridMeasure& m, int l);

// merge indices >= K_new into the bucket
BivariateGridMeasure coarsen(const BivariateGridMeasure& m, int K_new);

double max_cell_difference(const BivariateGridMeasure& a, const BivariateGridMeasure& b);

// once-mapped F(x_n, x_0) via the F-recursion with analytic geometric tails
double apply_F_operator(const Signature& f, int n, int T, double tol = 1e-10);

// default K making the bucket bound 2 theta^K/(1+theta) < 1e-10
int default_grid_K(double theta);

}  // namespace frde
