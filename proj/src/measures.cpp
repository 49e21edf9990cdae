#include "frde/measures.hpp"
#include "frde/errors.hpp"
#include "frde/io.hpp"

#include <algorithm>
#include <cmath>

namespace frde {

namespace {
constexpr double kMassTol = 1e-12;

bool at_or_below(double v, double t) noexcept { return v <= t || same_atom(v, t); }
}  // namespace

bool same_atom(double a, double b) noexcept {
    if (a == b) return true;
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, double inf_mass, std::optional<TailNote> tail)
    : atoms_(std::move(atoms)), inf_mass_(inf_mass), tail_(tail) {
    require(inf_mass_ >= 0.0 && std::isfinite(inf_mass_), "inf_mass must be finite and >= 0");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const Atom& a = atoms_[i];
        require(a.value >= 0.0 && a.value <= 1.0, "atom value outside [0,1]: " + io::num(a.value));
        require(a.mass >= 0.0 && std::isfinite(a.mass), "atom mass must be finite and >= 0");
        if (i > 0)
            require(a.value > atoms_[i - 1].value && !same_atom(a.value, atoms_[i - 1].value),
                    "atom values must be strictly increasing and distinct");
    }
    if (tail_) {
        require(tail_->lumped >= 0.0 && tail_->moment >= 0.0, "tail masses must be >= 0");
        require(tail_->bound >= 0.0 && tail_->bound <= 1.0, "tail bound outside [0,1]");
    }
    require(std::abs(total_mass() - 1.0) <= kMassTol, "total mass must be 1, got " + io::num(total_mass()));
}

AtomicMeasure AtomicMeasure::dirac_infinity() { return AtomicMeasure({}, 1.0); }

double AtomicMeasure::total_mass() const noexcept {
    double s = inf_mass_;
    for (const Atom& a : atoms_) s += a.mass;
    if (tail_) s += tail_->lumped;
    return s;
}

double AtomicMeasure::mass_at(double value) const noexcept {
    for (const Atom& a : atoms_)
        if (same_atom(a.value, value)) return a.mass;
    return 0.0;
}

double AtomicMeasure::cumulative(double t) const noexcept {
    double s = 0.0;
    if (tail_ && at_or_below(tail_->bound, t)) s += tail_->lumped;
    // sum small atoms first
    for (const Atom& a : atoms_) {
        if (!at_or_below(a.value, t)) break;
        s += a.mass;
    }
    return s;
}

double AtomicMeasure::first_moment(double t) const noexcept {
    double s = 0.0;
    if (tail_ && at_or_below(tail_->bound, t)) s += tail_->moment;
    for (const Atom& a : atoms_) {
        if (!at_or_below(a.value, t)) break;
        s += a.value * a.mass;
    }
    return s;
}

bool AtomicMeasure::in_m1(double tol) const noexcept {
    if (tail_ && tail_->lumped > tail_->bound + tol) return false;
    for (const Atom& a : atoms_)
        if (cumulative(a.value) > a.value + tol) return false;
    return true;
}

std::string AtomicMeasure::to_json() const {
    io::Json atoms = io::Json::array();
    for (const Atom& a : atoms_) atoms.push_back(io::Json::array({a.value, a.mass}));
    io::JsonObject o;
    o.add("atoms", atoms).add("inf_mass", inf_mass_);
    if (tail_) {
        io::JsonObject t;
        t.add("K", tail_->cutoff).add("lumped", tail_->lumped).add("moment", tail_->moment).add("bound", tail_->bound);
        o.add("tail", t.json());
    } else {
        o.add("tail", nullptr);
    }
    return o.str();
}

void ThetaParams::validate() const {
    require(theta > 0.0 && theta < 1.0, "theta must lie strictly inside (0,1)");
    require(K >= 2, "K must be >= 2");
}

std::vector<double> theta_grid(double theta, int count) {
    std::vector<double> x(static_cast<std::size_t>(std::max(count, 0)));
    double v = 1.0;
    for (auto& xi : x) {
        xi = v;
        v *= theta;
    }
    return x;
}

double c_weight(double theta, double x) { return (1.0 - theta) / (1.0 + theta) * x; }

AtomicMeasure make_rho_theta(const ThetaParams& p) {
    p.validate();
    const double th = p.theta;
    std::vector<double> x = theta_grid(th, p.K + 1);
    // the atom identity tolerance is absolute below 1, so the grid cannot go finer than it
    require(!same_atom(x[static_cast<std::size_t>(p.K) - 1], x[static_cast<std::size_t>(p.K) - 2]),
            "K too large for theta: grid spacing below the 1e-12 atom tolerance");
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(p.K));
    for (int k = p.K - 1; k >= 0; --k) atoms.push_back({x[static_cast<std::size_t>(k)], c_weight(th, x[static_cast<std::size_t>(k)])});
    const double xK = x[static_cast<std::size_t>(p.K)];
    // sum_{k>=K} x_k c_k = theta^{2K}/(1+theta)^2
    TailNote tail{p.K, xK / (1.0 + th), xK * xK / ((1.0 + th) * (1.0 + th)), xK};
    return AtomicMeasure(std::move(atoms), th / (1.0 + th), tail);
}

FiniteXiSolution solve_rde_finite_xi(std::span<const double> times) {
    if (times.empty()) return {AtomicMeasure::dirac_infinity(), true};
    for (std::size_t i = 0; i < times.size(); ++i) {
        require(times[i] > 0.0 && times[i] <= 1.0, "times must lie in (0,1]");
        if (i > 0) require(times[i] > times[i - 1], "times must be strictly increasing");
    }
    std::vector<Atom> atoms;
    atoms.reserve(times.size());
    double F = 0.0;
    for (double t : times) {
        const double next = std::max(F, t - F);
        atoms.push_back({t, next - F});
        F = next;
    }
    return {AtomicMeasure(std::move(atoms), 1.0 - F), false};
}

double rde_residual(const AtomicMeasure& m, double t) {
    const double c = m.cumulative(t);
    return m.first_moment(t) - c * c;
}

AtomicMeasure scale_measure(const AtomicMeasure& m, double t) {
    require(t > 0.0 && std::isfinite(t), "scale factor must be positive and finite");
    if (!m.in_m1()) fail(ErrorCode::not_scalable, "measure violates rho([0,s]) <= s; scaling would give negative inf-mass");

    std::optional<TailNote> tail;
    double kept = 0.0;
    int removed = 0;
    std::vector<Atom> atoms;
    for (const Atom& a : m.atoms()) {
        if (!at_or_below(a.value, t)) {
            ++removed;
            continue;
        }
        atoms.push_back({std::min(a.value / t, 1.0), a.mass / t});
        kept += a.mass;
    }
    if (m.tail()) {
        const TailNote& old = *m.tail();
        if (!at_or_below(old.bound, t))
            fail(ErrorCode::not_scalable, "cut-off point falls inside the lumped tail");
        tail = TailNote{old.cutoff - removed, old.lumped / t, old.moment / (t * t), std::min(old.bound / t, 1.0)};
        kept += old.lumped;
    }
    const double inf_mass = std::max(0.0, 1.0 - kept / t);
    return AtomicMeasure(std::move(atoms), inf_mass, tail);
}

double sup_mass_difference(const AtomicMeasure& a, const AtomicMeasure& b) {
    double worst = std::abs(a.inf_mass() - b.inf_mass());
    for (const Atom& x : a.atoms()) worst = std::max(worst, std::abs(x.mass - b.mass_at(x.value)));
    for (const Atom& y : b.atoms()) worst = std::max(worst, std::abs(y.mass - a.mass_at(y.value)));
    return worst;
}

}  // namespace frde
