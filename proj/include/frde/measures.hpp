#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace frde {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// |a-b| <= 1e-12 * max(1,|a|); grid values drift by a few ulp
bool same_atom(double a, double b) noexcept;

struct Atom {
    double value;
    double mass;
};

// Documents an infinite atom family that was cut off. The lumped mass sits
// somewhere in (0, bound]; moment is its exact first moment so the RDE
// residual stays exact at the explicit atoms.
struct TailNote {
    int cutoff = 0;       // grid index of the first lumped point
    double lumped = 0.0;
    double moment = 0.0;  // integral of s over the lumped part
    double bound = 0.0;   // largest value the lumped part can occupy
};

// Probability law on I = [0,1] u {inf}: sorted atoms plus an inf-mass.
class AtomicMeasure {
public:
    AtomicMeasure(std::vector<Atom> atoms, double inf_mass, std::optional<TailNote> tail = std::nullopt);

    static AtomicMeasure dirac_infinity();

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    double inf_mass() const noexcept { return inf_mass_; }
    const std::optional<TailNote>& tail() const noexcept { return tail_; }

    double total_mass() const noexcept;
    double mass_at(double value) const noexcept;  // 0 if no such atom
    double cumulative(double t) const noexcept;   // rho([0,t]); the tail counts once bound <= t
    double first_moment(double t) const noexcept; // integral over [0,t] of s rho(ds)

    // rho([0,t]) <= t for all t in [0,1]
    bool in_m1(double tol = 1e-12) const noexcept;

    std::string to_json() const;

private:
    std::vector<Atom> atoms_;
    double inf_mass_;
    std::optional<TailNote> tail_;
};

struct ThetaParams {
    double theta;
    int K;
    void validate() const;  // theta in (0,1), K >= 2
};

// x_k = theta^k by iterated multiplication, k < count
std::vector<double> theta_grid(double theta, int count);
double c_weight(double theta, double x);  // (1-theta)/(1+theta) * x

AtomicMeasure make_rho_theta(const ThetaParams& p);

struct FiniteXiSolution {
    AtomicMeasure measure;
    bool empty_xi = false;  // Xi was empty; measure is delta_inf
};

FiniteXiSolution solve_rde_finite_xi(std::span<const double> times);

double rde_residual(const AtomicMeasure& m, double t);

AtomicMeasure scale_measure(const AtomicMeasure& m, double t);

// max |mass difference| over the union of atom locations and inf
double sup_mass_difference(const AtomicMeasure& a, const AtomicMeasure& b);

}  // namespace frde
