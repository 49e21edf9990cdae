#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace frde {

struct OmegaLabel {
    double tau;
    int kappa;  // 1 or 2
};

double chi(const OmegaLabel& w, double x, double y) noexcept;

// splitmix64 finalizer; everything random below is a pure function of hashes
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t sample_id) noexcept;
double unit_from_bits(std::uint64_t h) noexcept;  // [0,1), 53 bits

// Nodes use heap numbering: root 1, children 2i (first) and 2i+1.
OmegaLabel node_label(std::uint64_t tree_seed, std::uint64_t node) noexcept;

// Inverse transform for rho: u >= 1/(1+theta) gives inf, otherwise index
// floor(log(1 - u(1+theta))/log theta). Index -1 stands for inf.
int rho_index_from_uniform(double theta, double u) noexcept;
double rho_sample_from_uniform(double theta, double u) noexcept;

struct SampleConfig {
    double theta = 0.5;
    int depth = 0;
    long n_samples = 1;
    std::uint64_t seed = 0;
    void validate() const;  // depth <= 28
};

double sample_root(double theta, int depth, std::uint64_t tree_seed);

struct CoupledPair {
    double y;
    double y_prime;
};

// shared labels, two independent boundary vectors
CoupledPair sample_bivariate(double theta, int depth, std::uint64_t tree_seed);

struct UnivariateBatch {
    std::vector<double> values;
    double p_inf = 0.0;
    double p_inf_se = 0.0;
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 0.0;
    std::string summary_json(const SampleConfig& cfg) const;
    std::string to_csv() const;
};

// sample i uses derive_seed(cfg.seed, i)
UnivariateBatch sample_root_batch(const SampleConfig& cfg);

struct BivariateBatch {
    std::vector<CoupledPair> pairs;
    double p_diff = 0.0;
    double se = 0.0;
    double ci_95 = 0.0;  // half-width
    std::string summary_json(const SampleConfig& cfg) const;
    std::string to_csv() const;
};

BivariateBatch sample_bivariate_batch(const SampleConfig& cfg);

// Pearson statistic of the sample against rho on {x_0..x_{m-1}, rest, inf}
struct ChiSquare {
    double statistic;
    int dof;
    double p_value;
};
ChiSquare chi_square_vs_rho(const std::vector<double>& values, double theta, int m);

// One fully materialised labelled tree for the frozen-set rounds.
class FrozenInstance {
public:
    FrozenInstance(double theta, int depth, std::uint64_t tree_seed);

    int depth() const noexcept { return depth_; }
    std::size_t node_count() const noexcept { return tau_.size() - 1; }
    int node_depth(std::size_t node) const noexcept;

    // F_k from F_{k-1}: burning times with F_{k-1} frozen, then test Y_{i1} <= tau_i
    std::vector<std::uint8_t> next_frozen(const std::vector<std::uint8_t>& frozen) const;

    // the set solving the frozen equation, built leaves-up in one pass
    std::vector<std::uint8_t> exact_solution() const;

    // true iff F is a fixed point of next_frozen
    bool solves(const std::vector<std::uint8_t>& frozen) const;

private:
    double ceil_xi(double tau) const noexcept;
    double theta_;
    int depth_;
    std::vector<double> tau_;  // index = heap id, [0] unused
    std::vector<std::uint8_t> kappa_;
    std::vector<double> grid_;
};

struct FrozenDefaults {
    static constexpr int max_depth = 22;
    static constexpr int core_depth = 3;  // F_2 emptiness judged on nodes of depth <= this
};

struct FrozenReport {
    double theta = 0.0;
    int depth = 0;
    std::uint64_t seed = 0;
    int rounds = 0;
    std::vector<std::size_t> frozen_set_sizes;  // F_0 .. F_rounds
    bool incl_i = true;    // F_{2n} in F_{2n+1}
    bool incl_ii = true;   // F_{2n+2} in F_{2n+1}
    bool incl_iii = true;  // F_{2n} in F_{2n+2}
    bool incl_iv = true;   // F_{2n+3} in F_{2n+1}
    bool sandwich_ok = true;  // F_{2n} in F* in F_{2n+1} for the exact solution F*
    std::size_t f2_core_count = 0;
    std::size_t f2_root_count = 0;
    std::size_t exact_size = 0;
    std::size_t even_odd_gap = 0;  // |F_odd \ F_even| for the last pair
    bool inclusions_ok() const noexcept { return incl_i && incl_ii && incl_iii && incl_iv; }
    std::string to_json() const;
};

FrozenReport frozen_iteration(double theta, int depth, std::uint64_t seed, int rounds,
                              int core_depth = FrozenDefaults::core_depth);

}  // namespace frde
