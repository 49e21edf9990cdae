#include "frde/bivariate.hpp"
#include "frde/errors.hpp"
#include "frde/io.hpp"
#include "frde/measures.hpp"

#include <algorithm>
#include <cmath>

namespace frde {

BivariateGridMeasure::BivariateGridMeasure(double theta, int K) : theta_(theta), K_(K) {
    require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
    require(K >= 2 && K <= 4000, "K must lie in [2, 4000]");
    x_ = theta_grid(theta, K + 1);
    const auto n = static_cast<std::size_t>(K + 2);
    mass_.assign(n * n, 0.0);
}

std::size_t BivariateGridMeasure::idx(int k, int j) const {
    if (k < -1 || k > K_ || j < -1 || j > K_) fail(ErrorCode::invalid_argument, "grid index out of range");
    return static_cast<std::size_t>(k + 1) * static_cast<std::size_t>(K_ + 2) + static_cast<std::size_t>(j + 1);
}

double BivariateGridMeasure::x(int k) const {
    require(k >= 0 && k <= K_, "x index out of range");
    return x_[static_cast<std::size_t>(k)];
}

void BivariateGridMeasure::set(int k, int j, double v) {
    mass_[idx(k, j)] = v;
    mass_[idx(j, k)] = v;
}

void BivariateGridMeasure::add(int k, int j, double v) { mass_[idx(k, j)] += v; }

double BivariateGridMeasure::total() const noexcept {
    double s = 0.0;
    for (double v : mass_) s += v;
    return s;
}

double BivariateGridMeasure::trace() const noexcept {
    double s = 0.0;
    const std::size_t n = static_cast<std::size_t>(K_ + 2);
    for (std::size_t i = 0; i < n; ++i) s += mass_[i * n + i];
    return s;
}

double BivariateGridMeasure::trunc_mass() const noexcept {
    const std::size_t n = static_cast<std::size_t>(K_ + 2);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += mass_[(n - 1) * n + i];
    for (std::size_t i = 0; i + 1 < n; ++i) s += mass_[i * n + (n - 1)];
    return s;
}

double BivariateGridMeasure::row_sum(int k) const {
    double s = 0.0;
    for (int j = -1; j <= K_; ++j) s += at(k, j);
    return s;
}

double BivariateGridMeasure::expected_marginal(int k) const {
    if (k == kInfIndex) return theta_ / (1.0 + theta_);
    if (k == K_) return x_.back() / (1.0 + theta_);
    return c_weight(theta_, x(k));
}

double BivariateGridMeasure::min_mass() const noexcept { return *std::min_element(mass_.begin(), mass_.end()); }

bool BivariateGridMeasure::symmetric() const noexcept {
    for (int k = -1; k <= K_; ++k)
        for (int j = k + 1; j <= K_; ++j)
            if (at(k, j) != at(j, k)) return false;
    return true;
}

double BivariateGridMeasure::max_marginal_error() const {
    double worst = 0.0;
    for (int k = -1; k <= K_; ++k) worst = std::max(worst, std::abs(row_sum(k) - expected_marginal(k)));
    return worst;
}

double BivariateGridMeasure::m2_excess() const {
    // mass with max(index) >= n, accumulated from the bucket downwards
    double worst = -kInfinity;
    double acc = 0.0;
    for (int n = K_; n >= 0; --n) {
        // add cells whose max index is exactly n
        for (int j = -1; j < n; ++j) acc += at(n, j) + at(j, n);
        acc += at(n, n);
        if (n < K_) worst = std::max(worst, acc - x(n));
    }
    return worst;
}

double BivariateGridMeasure::F(int k, int j) const {
    require(k >= 0 && k <= K_ && j >= 0 && j <= K_, "F index out of range");
    double s = 0.0;
    for (int a = -1; a <= K_; ++a)
        for (int b = -1; b <= K_; ++b)
            if (a >= k || b >= j) s += at(a, b);
    return s;
}

std::string BivariateGridMeasure::to_json() const {
    io::Json atoms = io::Json::array();
    for (int k = 0; k <= K_; ++k)
        for (int j = 0; j <= K_; ++j)
            if (const double v = at(k, j); v != 0.0) atoms.push_back(io::Json::array({k, j, v}));
    std::vector<double> inf_row;
    for (int j = 0; j <= K_; ++j) inf_row.push_back(at(kInfIndex, j));
    return io::JsonObject()
        .add("theta", theta_)
        .add("K", K_)
        .add("atoms", atoms)
        .add("inf_row", inf_row)
        .add("corner", at(kInfIndex, kInfIndex))
        .add("trunc_mass", trunc_mass())
        .str();
}

BivariateGridMeasure diagonal_measure(double theta, int K) {
    BivariateGridMeasure m(theta, K);
    for (int k = -1; k <= K; ++k) m.set(k, k, m.expected_marginal(k));
    return m;
}

BivariateGridMeasure product_measure(double theta, int K) {
    BivariateGridMeasure m(theta, K);
    for (int k = -1; k <= K; ++k)
        for (int j = -1; j <= K; ++j) m.add(k, j, m.expected_marginal(k) * m.expected_marginal(j));
    return m;
}

BivariateGridMeasure from_signature(const Signature& f, int K) {
    require(f.N() >= K, "signature must provide f(0..K)");
    BivariateGridMeasure m(f.theta, K);
    const double th = f.theta;
    const double q = 1.0 / (1.0 + th);
    auto F = [&](int k, int j) { return m.x(std::min(k, j)) * f[std::abs(k - j)]; };

    auto put = [&](int k, int j, double v) {
        if (v < -1e-9)
            fail(ErrorCode::not_admissible,
                 "reconstructed mass " + io::num(v) + " at (" + std::to_string(k) + "," + std::to_string(j) + ")",
                 io::JsonObject().add("k", k).add("j", j).add("mass", v).str());
        m.set(k, j, std::max(v, 0.0));
    };

    for (int k = 0; k < K; ++k)
        for (int j = k; j < K; ++j) put(k, j, -F(k, j) + F(k + 1, j) + F(k, j + 1) - F(k + 1, j + 1));
    for (int k = 0; k < K; ++k) put(BivariateGridMeasure::kInfIndex, k, f[k] - f[k + 1]);
    put(BivariateGridMeasure::kInfIndex, BivariateGridMeasure::kInfIndex, 1.0 - f[0]);

    // bucket row, using that the marginals are rho
    for (int k = 0; k < K; ++k) put(k, K, m.expected_marginal(k) - F(k, K) + F(k + 1, K));
    put(BivariateGridMeasure::kInfIndex, K, f[K] - q);
    put(K, K, 2.0 * m.x(K) * q - m.x(K) * f[0]);
    return m;
}

std::vector<double> signature_of(const BivariateGridMeasure& m) {
    const int K = m.K();
    // f(n) = mass{second finite} + mass{second = inf, first index >= n}
    double finite_second = 0.0;
    for (int k = -1; k <= K; ++k)
        for (int j = 0; j <= K; ++j) finite_second += m.at(k, j);
    std::vector<double> f(static_cast<std::size_t>(K) + 1);
    double acc = 0.0;
    for (int n = K; n >= 0; --n) {
        acc += m.at(n, BivariateGridMeasure::kInfIndex);
        f[static_cast<std::size_t>(n)] = finite_second + acc;
    }
    return f;
}

BivariateGridMeasure scale_bivariate(const BivariateGridMeasure& m, int l) {
    require(l >= 0 && l <= m.K() - 2, "scale exponent l must lie in [0, K-2]");
    if (m.m2_excess() > 1e-12) fail(ErrorCode::not_scalable, "measure violates the joint smallness bound");
    if (l == 0) return m;
    const int K = m.K();
    const double t = m.x(l);
    BivariateGridMeasure out(m.theta(), K - l);
    auto map = [&](int k) { return k < l ? BivariateGridMeasure::kInfIndex : k - l; };
    double kept = 0.0;
    for (int k = -1; k <= K; ++k)
        for (int j = -1; j <= K; ++j) {
            const int a = map(k), b = map(j);
            if (a == BivariateGridMeasure::kInfIndex && b == BivariateGridMeasure::kInfIndex) continue;
            out.add(a, b, m.at(k, j) / t);
            kept += m.at(k, j);
        }
    out.add(BivariateGridMeasure::kInfIndex, BivariateGridMeasure::kInfIndex, 1.0 - kept / t);
    return out;
}

BivariateGridMeasure coarsen(const BivariateGridMeasure& m, int K_new) {
    require(K_new >= 2 && K_new <= m.K(), "coarsen needs 2 <= K_new <= K");
    BivariateGridMeasure out(m.theta(), K_new);
    auto map = [&](int k) { return std::min(k, K_new); };
    for (int k = -1; k <= m.K(); ++k)
        for (int j = -1; j <= m.K(); ++j) out.add(map(k), map(j), m.at(k, j));
    return out;
}

double max_cell_difference(const BivariateGridMeasure& a, const BivariateGridMeasure& b) {
    require(a.K() == b.K(), "tables must share K");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) worst = std::max(worst, std::abs(a.raw()[i] - b.raw()[i]));
    return worst;
}

namespace {

// sum_{t>=from} theta^t f(t); explicit below T, geometric with f(inf) from T on
TailSum weighted_sum(const Signature& f, int from, int T) {
    require(from >= 0 && from <= T && T <= f.N(), "need 0 <= from <= T <= N");
    const double th = f.theta;
    double pw = 1.0;
    for (int t = 0; t < from; ++t) pw *= th;
    double s = 0.0;
    for (int t = from; t < T; ++t) {
        s += pw * f[t];
        pw *= th;
    }
    const double geo = pw / (1.0 - th);
    return {s + f.limit * geo, s + (f.values.back() - f.tail_bound) * geo, s + f[T] * geo};
}

}  // namespace

double apply_F_operator(const Signature& f, int n, int T, double tol) {
    require(n >= 0 && n + 1 <= T, "need 0 <= n < T");
    const double th = f.theta;
    const double p2 = (1.0 + th) * (1.0 + th);
    double xn = 1.0;
    for (int i = 0; i < n; ++i) xn *= th;
    const double fn = f[n];

    const TailSum B = weighted_sum(f, n + 1, T);
    const TailSum C1 = weighted_sum(f, 1, T);
    const double w = (1.0 - th) / (2.0 * th);
    const double width = w * ((B.hi - B.lo) + xn * xn * (C1.hi - C1.lo));
    if (width > tol)
        fail(ErrorCode::tail_too_loose, "F-operator tail bracket " + io::num(width) + " exceeds tol " + io::num(tol));

    const double A = fn * xn * th / (1.0 - th);
    const double C = xn * xn * C1.value;
    const double D = f[0] * xn * xn * th * th / (1.0 - th * th);
    return fn - 0.5 * fn * fn + 0.5 * xn * xn / p2 + 0.5 / p2 + w * (A - B.value - C + D);
}

int default_grid_K(double theta) {
    require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
    return std::max(2, static_cast<int>(std::ceil(std::log(1e-10 * (1.0 + theta) / 2.0) / std::log(theta))));
}

}  // namespace frde
