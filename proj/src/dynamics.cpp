#include "frde/dynamics.hpp"
#include "frde/critical.hpp"
#include "frde/errors.hpp"
#include "frde/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frde {

// Positions p = index + 1: p = 0 is inf, p = K+1 is the bucket. Larger
// position means smaller value, so min() of two values takes the larger p.
BivariateGridMeasure apply_T2(const BivariateGridMeasure& m) {
    const int K = m.K();
    const std::size_t n = static_cast<std::size_t>(K + 2);
    const std::vector<double>& in = m.raw();
    BivariateGridMeasure out(m.theta(), K);
    std::vector<double>& o = out.raw();

    // kappa = 2: P(pos <= a, pos* <= b) squared, then differenced
    std::vector<double> G(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            row += in[a * n + b];
            G[a * n + b] = row + (a ? G[(a - 1) * n + b] : 0.0);
        }
    }
    for (double& g : G) g *= g;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double v = G[a * n + b];
            if (a) v -= G[(a - 1) * n + b];
            if (b) v -= G[a * n + b - 1];
            if (a && b) v += G[(a - 1) * n + b - 1];
            o[a * n + b] = 0.5 * v;
        }

    // kappa = 1: coordinate y survives tau ~ U[0,1] with probability y
    std::vector<double> keep(n);
    keep[0] = 1.0;
    for (int k = 0; k < K; ++k) keep[static_cast<std::size_t>(k) + 1] = m.x(k);
    keep[n - 1] = m.x(K) / (1.0 + m.theta());  // E[Y | Y in bucket] under rho

    double corner = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double v = 0.5 * in[a * n + b];
            if (v == 0.0) continue;
            const double ka = keep[a], kb = keep[b];
            const double lo = std::min(ka, kb);
            o[a * n + b] += v * lo;
            if (ka > kb)
                o[a * n] += v * (ka - kb);
            else if (kb > ka)
                o[b] += v * (kb - ka);
            corner += v * (1.0 - std::max(ka, kb));
        }
    o[0] += corner;

    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double s = 0.5 * (o[a * n + b] + o[b * n + a]);
            o[a * n + b] = s;
            o[b * n + a] = s;
        }
    return out;
}

double project_marginals(BivariateGridMeasure& m) {
    double worst = 0.0;
    std::vector<double> err;
    for (int k = -1; k <= m.K(); ++k) err.push_back(m.row_sum(k) - m.expected_marginal(k));
    for (int k = -1; k <= m.K(); ++k) {
        const double e = err[static_cast<std::size_t>(k + 1)];
        m.add(k, k, -e);
        worst = std::max(worst, std::abs(e));
    }
    return worst;
}

double tv_distance(const BivariateGridMeasure& a, const BivariateGridMeasure& b) {
    require(a.K() == b.K(), "tables must share K");
    double s = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) s += std::abs(a.raw()[i] - b.raw()[i]);
    return 0.5 * s;
}

const char* verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::converged_diagonal: return "converged_diagonal";
        case Verdict::converged_nondiagonal: return "converged_nondiagonal";
        case Verdict::undecided: return "undecided";
    }
    return "undecided";
}

std::string IterationTrace::to_csv() const {
    std::string out = "# frde iterate v1\nstep,off_diag,tv_prev,sig_gap\n";
    for (const auto& r : records)
        out += std::to_string(r.step) + ',' + io::num(r.off_diagonal_mass) + ',' + io::num(r.tv_to_previous) + ',' +
               (std::isnan(r.signature_distance) ? std::string() : io::num(r.signature_distance)) + '\n';
    return out;
}

namespace {
double sup_gap(const std::vector<double>& f, const std::vector<double>& ref) {
    double g = 0.0;
    const std::size_t n = std::min(f.size(), ref.size());
    for (std::size_t i = 0; i < n; ++i) g = std::max(g, std::abs(f[i] - ref[i]));
    return g;
}
}  // namespace

IterationTrace iterate(const BivariateGridMeasure& m0, int max_steps, double tol, const std::vector<double>* reference) {
    require(max_steps >= 1, "max_steps must be >= 1");
    require(tol > 0.0, "tol must be > 0");
    IterationTrace tr{{}, Verdict::undecided, m0, 0.0};
    BivariateGridMeasure cur = m0;
    double tv = std::numeric_limits<double>::infinity();
    for (int s = 1; s <= max_steps; ++s) {
        BivariateGridMeasure next = apply_T2(cur);
        // round-off in the marginals is amplified by the minimum branch; pin them to rho
        tr.max_projection = std::max(tr.max_projection, project_marginals(next));
        tv = tv_distance(next, cur);
        const double gap = reference ? sup_gap(signature_of(next), *reference) : std::numeric_limits<double>::quiet_NaN();
        tr.records.push_back({s, std::clamp(next.off_diagonal_mass(), 0.0, 1.0), tv, gap});
        cur = std::move(next);
        if (tv < tol) break;
    }
    const double off = cur.off_diagonal_mass();
    if (off < IterationDefaults::diagonal_factor * tol)
        tr.verdict = Verdict::converged_diagonal;
    else if (tv < tol)
        tr.verdict = Verdict::converged_nondiagonal;
    tr.final_measure = std::move(cur);
    return tr;
}

ProbeResult endogeny_probe(double theta, int K, int max_steps, double tol, IterationTrace* trace_out) {
    std::optional<std::vector<double>> ref;
    std::optional<double> chat;
    if (theta > cached_theta_star() + CriticalDefaults::gate_margin) {
        try {
            chat = find_c_hat(theta).root.value;
            ref = compute_signature(theta, *chat, K).values;
        } catch (const Error&) {
            // the comparison is exploratory; the probe itself does not depend on it
        }
    }
    IterationTrace tr = iterate(product_measure(theta, K), max_steps, tol, ref ? &*ref : nullptr);
    ProbeResult r;
    r.verdict = tr.verdict;
    r.final_off_diag = tr.final_measure.off_diagonal_mass();
    r.final_tv = tr.records.back().tv_to_previous;
    r.steps = tr.records.back().step;
    r.c_hat = chat;
    if (ref) r.signature_gap = sup_gap(signature_of(tr.final_measure), *ref);
    if (trace_out) *trace_out = std::move(tr);
    return r;
}

}  // namespace frde
