// frde: command-line front end over the C API.
// exit 0 ok, 2 bad flags, 3 computation error (JSON on stderr)

#include "frde/frde.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

namespace {

constexpr int kExitFlags = 2;
constexpr int kExitCompute = 3;

using Json = nlohmann::ordered_json;

struct StrFree {
    void operator()(char* p) const { frde_string_free(p); }
};
using Str = std::unique_ptr<char, StrFree>;

void report(const std::string& error, const std::string& message, Json details = nullptr) {
    std::cerr << Json{{"error", error}, {"message", message}, {"details", std::move(details)}}.dump() << '\n';
}

// thrown after the error JSON has been written
struct Failed {
    int code;
};

void check(int status) {
    if (status == FRDE_OK) return;
    const std::string details = frde_last_error_details();
    report(frde_status_name(status), frde_last_error(), details.empty() ? Json(nullptr) : Json::parse(details));
    throw Failed{status == FRDE_E_INVALID_ARGUMENT ? kExitFlags : kExitCompute};
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        report("io", "cannot open " + path);
        throw Failed{kExitCompute};
    }
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

Json defaults() {
    char* d = nullptr;
    check(frde_defaults_json(&d));
    return Json::parse(Str(d).get());
}

// theta strictly inside (0,1)
const auto kOpenUnit = CLI::Validator(
    [](std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        return (v > 0.0 && v < 1.0) ? std::string() : "must lie strictly inside (0,1)";
    },
    "(0,1)");

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frozen percolation RDE toolkit"};
    app.require_subcommand(1);
    std::string out;
    app.add_option("--out,-o", out, "output file (default stdout)");

    // theta-star
    double ts_tol = 1e-6;
    auto* ts = app.add_subcommand("theta-star", "critical parameter theta*");
    ts->add_option("--tol", ts_tol, "bisection tolerance")->check(CLI::Range(1e-12, 0.1));

    // signature
    double sg_theta = 0, sg_c = 0;
    int sg_n = 0;
    auto* sg = app.add_subcommand("signature", "f_{theta,c}(n) rows");
    sg->add_option("--theta", sg_theta)->required()->check(kOpenUnit);
    sg->add_option("--c", sg_c)->required()->check(CLI::NonNegativeNumber);
    sg->add_option("--n", sg_n, "number of rows")->required()->check(CLI::Range(2, 10'000'000));

    // find-chat
    double fc_theta = 0, fc_tol = 1e-12;
    auto* fc = app.add_subcommand("find-chat", "non-diagonal parameter c_hat(theta)");
    fc->add_option("--theta", fc_theta)->required()->check(kOpenUnit);
    fc->add_option("--tol", fc_tol)->check(CLI::Range(1e-15, 1e-2));

    // sweep-chat
    double sw_min = 0, sw_max = 0, sw_step = 0, sw_tol = 1e-12;
    auto* sw = app.add_subcommand("sweep-chat", "c_hat over a theta grid");
    sw->add_option("--theta-min", sw_min)->required()->check(kOpenUnit);
    sw->add_option("--theta-max", sw_max)->required()->check(kOpenUnit);
    sw->add_option("--step", sw_step)->required()->check(CLI::Range(1e-6, 1.0));
    sw->add_option("--tol", sw_tol)->check(CLI::Range(1e-15, 1e-2));

    // profile-finf
    double pf_theta = 0, pf_cmax = 0;
    int pf_points = 201;
    auto* pf = app.add_subcommand("profile-finf", "f_inf as a function of c");
    pf->add_option("--theta", pf_theta)->required()->check(kOpenUnit);
    pf->add_option("--c-max", pf_cmax, "default theta(2theta-1)/(1+theta)^2")->check(CLI::PositiveNumber);
    pf->add_option("--points", pf_points)->check(CLI::Range(2, 1'000'000));

    // check-solution
    double cs_theta = 0, cs_c = 0;
    int cs_n = 0;
    auto* cs = app.add_subcommand("check-solution", "conditions and residuals of f_{theta,c}");
    cs->add_option("--theta", cs_theta)->required()->check(kOpenUnit);
    cs->add_option("--c", cs_c)->required()->check(CLI::NonNegativeNumber);
    cs->add_option("--n", cs_n)->required()->check(CLI::Range(3, 1'000'000));

    // bivariate
    double bv_theta = 0, bv_c = -1;
    int bv_K = 0;
    auto* bv = app.add_subcommand("bivariate", "reconstructed bivariate measure with verdicts");
    bv->add_option("--theta", bv_theta)->required()->check(kOpenUnit);
    bv->add_option("--c", bv_c, "default c_hat above theta*, else 0")->check(CLI::NonNegativeNumber);
    bv->add_option("--K", bv_K, "grid size (default from theta)")->check(CLI::Range(4, 4000));

    // iterate
    double it_theta = 0, it_tol = 1e-9;
    int it_K = 0, it_steps = 10'000;
    std::string it_final, it_summary;
    auto* it = app.add_subcommand("iterate", "T2 iteration from the product measure");
    it->add_option("--theta", it_theta)->required()->check(kOpenUnit);
    it->add_option("--K", it_K)->required()->check(CLI::Range(2, 4000));
    it->add_option("--max-steps", it_steps)->check(CLI::Range(1, 100'000'000));
    it->add_option("--tol", it_tol)->check(CLI::PositiveNumber);
    it->add_option("--final", it_final, "write the final measure JSON here");
    it->add_option("--summary", it_summary, "write the probe summary JSON here");

    // simulate
    double sm_theta = 0;
    int sm_depth = 0, sm_rounds = 6;
    long sm_samples = 0;
    std::uint64_t sm_seed = 0;
    bool sm_biv = false, sm_frozen = false;
    std::string sm_csv;
    auto* sm = app.add_subcommand("simulate", "Monte Carlo over the recursive tree");
    sm->add_option("--theta", sm_theta)->required()->check(kOpenUnit);
    sm->add_option("--depth", sm_depth)->required()->check(CLI::Range(0, 28));
    sm->add_option("--samples", sm_samples)->required()->check(CLI::Range(1L, 100'000'000L));
    sm->add_option("--seed", sm_seed)->required();
    auto* fb = sm->add_flag("--bivariate", sm_biv, "shared labels, two boundaries");
    auto* ff = sm->add_flag("--frozen", sm_frozen, "frozen-set rounds; --samples counts instances");
    fb->excludes(ff);
    sm->add_option("--rounds", sm_rounds)->check(CLI::Range(2, 64))->needs(ff);
    sm->add_option("--csv", sm_csv, "per-sample rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitFlags;
    }

    try {
        if (*ts) {
            frde_root r{};
            check(frde_theta_star(ts_tol, &r));
            emit(out, Json{{"theta_star", r.value},
                           {"lo", r.lo},
                           {"hi", r.hi},
                           {"residual", r.residual},
                           {"tol", ts_tol},
                           {"iterations", r.iterations},
                           {"defaults", defaults()}}
                          .dump());
        } else if (*sg) {
            frde_signature* s = nullptr;
            check(frde_signature_compute(sg_theta, sg_c, sg_n, &s));
            std::unique_ptr<frde_signature, void (*)(frde_signature*)> hold(s, frde_signature_free);
            char* csv = nullptr;
            check(frde_signature_csv(s, sg_n, &csv));
            emit(out, Str(csv).get());
        } else if (*fc) {
            frde_root r{};
            double ub = 0;
            int ok = 1;
            check(frde_find_c_hat(fc_theta, fc_tol, &r, &ub, &ok));
            Json warn = Json::array();
            if (!ok) warn.push_back("c_hat exceeds theta(2theta-1)/(1+theta)^2");
            emit(out, Json{{"theta", fc_theta},
                           {"c_hat", r.value},
                           {"lo", r.lo},
                           {"hi", r.hi},
                           {"residual", r.residual},
                           {"iterations", r.iterations},
                           {"tol", fc_tol},
                           {"upper_bound", ub},
                           {"bound_ok", ok != 0},
                           {"warnings", warn},
                           {"defaults", defaults()}}
                          .dump());
        } else if (*sw) {
            if (sw_min > sw_max) {
                report("invalid_argument", "--theta-min exceeds --theta-max");
                return kExitFlags;
            }
            char* csv = nullptr;
            check(frde_sweep_c_hat_csv(sw_min, sw_max, sw_step, sw_tol, &csv));
            emit(out, Str(csv).get());
        } else if (*pf) {
            char* csv = nullptr;
            check(frde_profile_f_infinity_csv(pf_theta, pf_cmax, pf_points, nullptr, &csv));
            emit(out, Str(csv).get());
        } else if (*cs) {
            char* js = nullptr;
            check(frde_check_solution_json(cs_theta, cs_c, cs_n, nullptr, &js));
            emit(out, Str(js).get());
        } else if (*bv) {
            char* js = nullptr;
            check(frde_bivariate_report_json(bv_theta, bv_c, bv_K, &js));
            emit(out, Str(js).get());
        } else if (*it) {
            char *trace = nullptr, *summary = nullptr, *fin = nullptr;
            check(frde_endogeny_probe(it_theta, it_K, it_steps, it_tol, &trace, &summary,
                                      it_final.empty() ? nullptr : &fin));
            Str t(trace), s(summary), f(fin);
            emit(out, t.get());
            if (!it_summary.empty()) emit(it_summary, s.get());
            if (!it_final.empty()) emit(it_final, f.get());
        } else if (*sm) {
            char *csv = nullptr, *summary = nullptr;
            char** want_csv = sm_csv.empty() ? nullptr : &csv;
            if (sm_frozen) {
                if (sm_depth < 1 || sm_depth > 22) {
                    report("depth_too_large", "--frozen needs depth in [1,22]");
                    return kExitCompute;
                }
                check(frde_frozen_iteration(sm_theta, sm_depth, sm_seed, sm_samples, sm_rounds, &summary));
            } else if (sm_biv) {
                check(frde_simulate_bivariate(sm_theta, sm_depth, sm_samples, sm_seed, want_csv, &summary));
            } else {
                check(frde_simulate_root(sm_theta, sm_depth, sm_samples, sm_seed, want_csv, &summary));
            }
            Str c(csv), s(summary);
            emit(out, s.get());
            if (c) emit(sm_csv, c.get());
        }
    } catch (const Failed& f) {
        return f.code;
    }
    return 0;
}
