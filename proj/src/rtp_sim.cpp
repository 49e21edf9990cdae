#include "frde/rtp_sim.hpp"
#include "frde/errors.hpp"
#include "frde/io.hpp"
#include "frde/measures.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace frde {

double chi(const OmegaLabel& w, double x, double y) noexcept {
    if (w.kappa == 2) return std::min(x, y);
    return x > w.tau ? x : kInfinity;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t sample_id) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(sample_id + 0x5851F42D4C957F2DULL));
}

double unit_from_bits(std::uint64_t h) noexcept { return static_cast<double>(h >> 11) * 0x1.0p-53; }

namespace {

// streams: 0 tau, 1 kappa, 2/3 boundary of lane 0/1
std::uint64_t node_hash(std::uint64_t tree_seed, std::uint64_t node, std::uint64_t stream) noexcept {
    return splitmix64(tree_seed + splitmix64(node * 8 + stream));
}

// grid plus inverse transform, built once per batch
struct RhoSampler {
    double theta;
    double log_theta;
    std::vector<double> grid;

    explicit RhoSampler(double th) : theta(th), log_theta(std::log(th)) {
        double v = 1.0;
        while (v > 1e-300 && grid.size() < 200000) {
            grid.push_back(v);
            v *= th;
        }
    }
    double draw(double u) const noexcept {
        const int k = rho_index_from_uniform(theta, u);
        if (k < 0) return kInfinity;
        return grid[std::min<std::size_t>(static_cast<std::size_t>(k), grid.size() - 1)];
    }
};

template <int L>
std::array<double, L> evaluate_tree(const RhoSampler& rs, int depth, std::uint64_t tree_seed) {
    using Vals = std::array<double, L>;
    struct Frame {
        std::uint64_t node;
        int depth;
        int state;
        OmegaLabel w;
        Vals y1;
    };
    std::vector<Frame> stack;
    stack.reserve(static_cast<std::size_t>(depth) + 2);
    stack.push_back({1, 0, 0, {}, {}});
    Vals ret{};
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.depth == depth) {
            for (int l = 0; l < L; ++l) ret[l] = rs.draw(unit_from_bits(node_hash(tree_seed, f.node, 2 + l)));
            stack.pop_back();
            continue;
        }
        switch (f.state) {
            case 0:
                f.w = node_label(tree_seed, f.node);
                f.state = 1;
                stack.push_back({2 * f.node, f.depth + 1, 0, {}, {}});
                break;
            case 1:
                if (f.w.kappa == 1) {
                    for (int l = 0; l < L; ++l) ret[l] = chi(f.w, ret[l], kInfinity);
                    stack.pop_back();
                } else {
                    f.y1 = ret;
                    f.state = 2;
                    stack.push_back({2 * f.node + 1, f.depth + 1, 0, {}, {}});
                }
                break;
            default:
                for (int l = 0; l < L; ++l) ret[l] = std::min(f.y1[l], ret[l]);
                stack.pop_back();
        }
    }
    return ret;
}

}  // namespace

OmegaLabel node_label(std::uint64_t tree_seed, std::uint64_t node) noexcept {
    return {unit_from_bits(node_hash(tree_seed, node, 0)), (node_hash(tree_seed, node, 1) >> 63) ? 2 : 1};
}

int rho_index_from_uniform(double theta, double u) noexcept {
    const double p = 1.0 + theta;
    if (u * p >= 1.0) return -1;
    const double w = std::max(1.0 - u * p, 0x1.0p-1074);
    const double k = std::floor(std::log(w) / std::log(theta));
    if (!(k < 1e9)) return 1'000'000'000;
    return std::max(0, static_cast<int>(k));
}

double rho_sample_from_uniform(double theta, double u) noexcept {
    const int k = rho_index_from_uniform(theta, u);
    if (k < 0) return kInfinity;
    double v = 1.0;
    for (int i = 0; i < k && v > 0.0; ++i) v *= theta;
    return v;
}

void SampleConfig::validate() const {
    require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
    if (depth < 0 || depth > 28) fail(ErrorCode::depth_too_large, "depth must lie in [0, 28]");
    require(n_samples >= 1, "n_samples must be >= 1");
}

double sample_root(double theta, int depth, std::uint64_t tree_seed) {
    SampleConfig{theta, depth, 1, tree_seed}.validate();
    return evaluate_tree<1>(RhoSampler(theta), depth, tree_seed)[0];
}

CoupledPair sample_bivariate(double theta, int depth, std::uint64_t tree_seed) {
    SampleConfig{theta, depth, 1, tree_seed}.validate();
    const auto v = evaluate_tree<2>(RhoSampler(theta), depth, tree_seed);
    return {v[0], v[1]};
}

ChiSquare chi_square_vs_rho(const std::vector<double>& values, double theta, int m) {
    require(m >= 1 && !values.empty(), "need m >= 1 and a non-empty sample");
    std::vector<double> observed(static_cast<std::size_t>(m) + 2, 0.0);  // x_0..x_{m-1}, rest, inf
    const double lt = std::log(theta);
    for (double v : values) {
        if (std::isinf(v)) {
            observed.back() += 1.0;
            continue;
        }
        const long k = v > 0.0 ? std::lround(std::log(v) / lt) : m;
        observed[static_cast<std::size_t>(std::min<long>(k, m))] += 1.0;
    }
    const double n = static_cast<double>(values.size());
    const auto x = theta_grid(theta, m + 1);
    double stat = 0.0;
    for (int k = 0; k <= m + 1; ++k) {
        double p;
        if (k < m) p = c_weight(theta, x[static_cast<std::size_t>(k)]);
        else if (k == m) p = x[static_cast<std::size_t>(m)] / (1.0 + theta);
        else p = theta / (1.0 + theta);
        const double e = n * p;
        const double d = observed[static_cast<std::size_t>(k)] - e;
        stat += d * d / e;
    }
    const int dof = m + 1;
    const double pv = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
    return {stat, dof, pv};
}

UnivariateBatch sample_root_batch(const SampleConfig& cfg) {
    cfg.validate();
    const RhoSampler rs(cfg.theta);
    UnivariateBatch b;
    b.values.resize(static_cast<std::size_t>(cfg.n_samples));
    long inf = 0;
    for (long i = 0; i < cfg.n_samples; ++i) {
        const double v = evaluate_tree<1>(rs, cfg.depth, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)))[0];
        b.values[static_cast<std::size_t>(i)] = v;
        inf += std::isinf(v);
    }
    const double n = static_cast<double>(cfg.n_samples);
    b.p_inf = static_cast<double>(inf) / n;
    b.p_inf_se = std::sqrt(b.p_inf * (1.0 - b.p_inf) / n);
    // enough buckets that each expects a handful of draws
    int m = 1;
    while (m < 40 && n * c_weight(cfg.theta, std::pow(cfg.theta, m)) >= 5.0) ++m;
    const ChiSquare cs = chi_square_vs_rho(b.values, cfg.theta, m);
    b.chi_square = cs.statistic;
    b.dof = cs.dof;
    b.p_value = cs.p_value;
    return b;
}

std::string UnivariateBatch::summary_json(const SampleConfig& cfg) const {
    return io::JsonObject()
        .add("theta", cfg.theta)
        .add("depth", cfg.depth)
        .add("n", cfg.n_samples)
        .add("seed", cfg.seed)
        .add("p_inf", p_inf)
        .add("p_inf_expected", cfg.theta / (1.0 + cfg.theta))
        .add("p_inf_se", p_inf_se)
        .add("chi_square", chi_square)
        .add("dof", dof)
        .add("p_value", p_value)
        .str();
}

std::string UnivariateBatch::to_csv() const {
    std::string out = "# frde simulate v1\nsample_id,Y\n";
    for (std::size_t i = 0; i < values.size(); ++i) out += std::to_string(i) + ',' + io::num(values[i]) + '\n';
    return out;
}

BivariateBatch sample_bivariate_batch(const SampleConfig& cfg) {
    cfg.validate();
    const RhoSampler rs(cfg.theta);
    BivariateBatch b;
    b.pairs.resize(static_cast<std::size_t>(cfg.n_samples));
    long diff = 0;
    for (long i = 0; i < cfg.n_samples; ++i) {
        const auto v = evaluate_tree<2>(rs, cfg.depth, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        b.pairs[static_cast<std::size_t>(i)] = {v[0], v[1]};
        diff += v[0] != v[1];
    }
    const double n = static_cast<double>(cfg.n_samples);
    b.p_diff = static_cast<double>(diff) / n;
    b.se = std::sqrt(b.p_diff * (1.0 - b.p_diff) / n);
    b.ci_95 = 1.959963984540054 * b.se;
    return b;
}

std::string BivariateBatch::summary_json(const SampleConfig& cfg) const {
    return io::JsonObject()
        .add("theta", cfg.theta)
        .add("depth", cfg.depth)
        .add("n", cfg.n_samples)
        .add("seed", cfg.seed)
        .add("p_diff", p_diff)
        .add("se", se)
        .add("ci_95", ci_95)
        .str();
}

std::string BivariateBatch::to_csv() const {
    std::string out = "# frde simulate v1\nsample_id,Y,Y_prime\n";
    for (std::size_t i = 0; i < pairs.size(); ++i)
        out += std::to_string(i) + ',' + io::num(pairs[i].y) + ',' + io::num(pairs[i].y_prime) + '\n';
    return out;
}

// ---- frozen-set rounds ----

FrozenInstance::FrozenInstance(double theta, int depth, std::uint64_t tree_seed) : theta_(theta), depth_(depth) {
    require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
    if (depth < 1 || depth > FrozenDefaults::max_depth)
        fail(ErrorCode::depth_too_large, "frozen iteration depth must lie in [1, " + std::to_string(FrozenDefaults::max_depth) + "]");
    const std::size_t n = (std::size_t{1} << (depth + 1));
    tau_.resize(n);
    kappa_.resize(n);
    for (std::size_t i = 1; i < n; ++i) {
        const OmegaLabel w = node_label(tree_seed, i);
        tau_[i] = w.tau;
        kappa_[i] = static_cast<std::uint8_t>(w.kappa);
    }
    double v = 1.0;
    while (v > 1e-300) {
        grid_.push_back(v);
        v *= theta;
    }
}

int FrozenInstance::node_depth(std::size_t node) const noexcept {
    int d = -1;
    while (node) {
        node >>= 1;
        ++d;
    }
    return d;
}

double FrozenInstance::ceil_xi(double tau) const noexcept {
    // smallest grid value >= tau; grid_ is decreasing
    auto it = std::lower_bound(grid_.begin(), grid_.end(), tau, [](double g, double t) { return g >= t; });
    if (it == grid_.begin()) return grid_.front();
    return *(it - 1);
}

std::vector<std::uint8_t> FrozenInstance::next_frozen(const std::vector<std::uint8_t>& frozen) const {
    const std::size_t n = tau_.size();
    require(frozen.size() == n, "frozen set has the wrong size");
    const std::size_t first_leaf = n / 2;
    std::vector<double> Y(n);
    std::vector<std::uint8_t> out(n, 0);
    for (std::size_t i = n - 1; i >= 1; --i) {
        if (i >= first_leaf) {
            // a leaf is reached by the proxy path once it is open
            Y[i] = kappa_[i] == 2 ? 0.0 : ceil_xi(tau_[i]);
            continue;
        }
        const double y1 = Y[2 * i];
        if (kappa_[i] == 2) {
            Y[i] = std::min(y1, Y[2 * i + 1]);
        } else {
            out[i] = y1 <= tau_[i];
            Y[i] = frozen[i] ? kInfinity : std::max(y1, ceil_xi(tau_[i]));
        }
    }
    return out;
}

std::vector<std::uint8_t> FrozenInstance::exact_solution() const {
    const std::size_t n = tau_.size();
    const std::size_t first_leaf = n / 2;
    std::vector<double> Y(n);
    std::vector<std::uint8_t> F(n, 0);
    for (std::size_t i = n - 1; i >= 1; --i) {
        if (i >= first_leaf) {
            Y[i] = kappa_[i] == 2 ? 0.0 : ceil_xi(tau_[i]);
            continue;
        }
        const double y1 = Y[2 * i];
        if (kappa_[i] == 2) {
            Y[i] = std::min(y1, Y[2 * i + 1]);
        } else {
            F[i] = y1 <= tau_[i];
            Y[i] = F[i] ? kInfinity : std::max(y1, ceil_xi(tau_[i]));
        }
    }
    return F;
}

bool FrozenInstance::solves(const std::vector<std::uint8_t>& frozen) const { return next_frozen(frozen) == frozen; }

namespace {
bool subset(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}
std::size_t count(const std::vector<std::uint8_t>& a) { return static_cast<std::size_t>(std::count(a.begin(), a.end(), 1)); }
}  // namespace

FrozenReport frozen_iteration(double theta, int depth, std::uint64_t seed, int rounds, int core_depth) {
    require(rounds >= 2, "rounds must be >= 2");
    require(core_depth >= 0, "core depth must be >= 0");
    const FrozenInstance inst(theta, depth, seed);
    std::vector<std::vector<std::uint8_t>> F;
    F.emplace_back(inst.node_count() + 1, 0);
    for (int k = 1; k <= rounds; ++k) F.push_back(inst.next_frozen(F.back()));

    FrozenReport r;
    r.theta = theta;
    r.depth = depth;
    r.seed = seed;
    r.rounds = rounds;
    for (const auto& s : F) r.frozen_set_sizes.push_back(count(s));
    const auto exact = inst.exact_solution();
    r.exact_size = count(exact);
    for (int k = 0; 2 * k + 1 <= rounds; ++k) {
        const auto& even = F[static_cast<std::size_t>(2 * k)];
        const auto& odd = F[static_cast<std::size_t>(2 * k + 1)];
        r.incl_i = r.incl_i && subset(even, odd);
        if (2 * k + 2 <= rounds) {
            r.incl_ii = r.incl_ii && subset(F[static_cast<std::size_t>(2 * k + 2)], odd);
            r.incl_iii = r.incl_iii && subset(even, F[static_cast<std::size_t>(2 * k + 2)]);
        }
        if (2 * k + 3 <= rounds) r.incl_iv = r.incl_iv && subset(F[static_cast<std::size_t>(2 * k + 3)], odd);
        r.sandwich_ok = r.sandwich_ok && subset(even, exact) && subset(exact, odd);
        std::size_t gap = 0;
        for (std::size_t i = 0; i < odd.size(); ++i) gap += odd[i] && !even[i];
        r.even_odd_gap = gap;
    }
    const auto& F2 = F[2];
    const std::size_t core_end = std::size_t{1} << (std::min(core_depth, depth) + 1);
    for (std::size_t i = 1; i < core_end; ++i) r.f2_core_count += F2[i];
    r.f2_root_count = F2[1];
    return r;
}

std::string FrozenReport::to_json() const {
    return io::JsonObject()
        .add("theta", theta)
        .add("depth", depth)
        .add("seed", seed)
        .add("rounds", rounds)
        .add("frozen_set_sizes", frozen_set_sizes)
        .add("inclusions_ok", io::JsonObject()
                                      .add("i", incl_i)
                                      .add("ii", incl_ii)
                                      .add("iii", incl_iii)
                                      .add("iv", incl_iv)
                                      .add("all", inclusions_ok())
                                      .json())
        .add("sandwich_ok", sandwich_ok)
        .add("exact_size", exact_size)
        .add("even_odd_gap", even_odd_gap)
        .add("f2_core_count", f2_core_count)
        .add("f2_root", f2_root_count != 0)
        .str();
}

}  // namespace frde
