/* Frozen-percolation RDE toolkit: C interface.
 *
 * Every function returns an frde_status. On failure the thread-local
 * frde_last_error() / frde_last_error_details() describe what went wrong.
 * Strings handed out through char** must be released with frde_string_free,
 * handles with their matching *_free.
 */
#ifndef FRDE_H
#define FRDE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef FRDE_BUILDING
#    define FRDE_API __declspec(dllexport)
#  else
#    define FRDE_API __declspec(dllimport)
#  endif
#else
#  define FRDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum frde_status {
    FRDE_OK = 0,
    FRDE_E_INVALID_ARGUMENT = 1,
    FRDE_E_OUT_OF_DOMAIN = 2,
    FRDE_E_NOT_SCALABLE = 3,
    FRDE_E_ITERATION_CAP = 4,
    FRDE_E_TAIL_TOO_LOOSE = 5,
    FRDE_E_NO_SIGN_CHANGE = 6,
    FRDE_E_BELOW_CRITICAL = 7,
    FRDE_E_NO_BRACKET = 8,
    FRDE_E_NOT_ADMISSIBLE = 9,
    FRDE_E_DEPTH_TOO_LARGE = 10,
    FRDE_E_EMPTY_XI = 11,
    FRDE_E_INTERNAL = 99
} frde_status;

typedef struct frde_measure frde_measure;     /* law on [0,1] u {inf} */
typedef struct frde_signature frde_signature; /* f(0..N) with limit */
typedef struct frde_bivariate frde_bivariate; /* symmetric grid table */

typedef struct frde_root {
    double value;
    double lo;
    double hi;
    double residual;
    int iterations;
} frde_root;

FRDE_API const char* frde_version(void);
FRDE_API const char* frde_status_name(int status);
FRDE_API const char* frde_last_error(void);
FRDE_API const char* frde_last_error_details(void); /* JSON fragment or "" */
FRDE_API void frde_string_free(char* s);

/* defaults as a JSON object, for reproducibility records */
FRDE_API int frde_defaults_json(char** out);

/* measures */
FRDE_API int frde_rho_theta(double theta, int K, frde_measure** out);
FRDE_API int frde_finite_xi(const double* times, size_t n, frde_measure** out, int* empty_xi);
FRDE_API int frde_measure_scale(const frde_measure* m, double t, frde_measure** out);
FRDE_API int frde_measure_residual(const frde_measure* m, double t, double* out);
FRDE_API int frde_measure_cumulative(const frde_measure* m, double t, double* out);
FRDE_API size_t frde_measure_atom_count(const frde_measure* m);
FRDE_API int frde_measure_atom(const frde_measure* m, size_t i, double* value, double* mass);
FRDE_API double frde_measure_inf_mass(const frde_measure* m);
FRDE_API int frde_measure_json(const frde_measure* m, char** out);
FRDE_API void frde_measure_free(frde_measure* m);

/* signatures */
FRDE_API int frde_signature_compute(double theta, double c, int N, frde_signature** out);
FRDE_API int frde_signature_from_values(double theta, double c, const double* values, size_t n, double limit,
                                        double tail_bound, frde_signature** out);
FRDE_API size_t frde_signature_length(const frde_signature* s);
FRDE_API int frde_signature_values(const frde_signature* s, double* buf, size_t cap);
FRDE_API int frde_signature_limit(const frde_signature* s, double* limit, double* tail_bound);
/* CSV with a "# {json}" header line; rows n = 0 .. rows-1 */
FRDE_API int frde_signature_csv(const frde_signature* s, int rows, char** out);
FRDE_API int frde_signature_check(const frde_signature* s, double tol, int* all_passed, char** report_json);
FRDE_API int frde_signature_c(const frde_signature* s, int T, double tol, double* out);
FRDE_API int frde_signature_residual(const frde_signature* s, double c, int n, int T, double tol, double* out);
/* conditions + residuals + recovered c as one JSON report */
FRDE_API int frde_check_solution_json(double theta, double c, int N, int* is_solution, char** out);
FRDE_API void frde_signature_free(frde_signature* s);

FRDE_API int frde_psi(double theta, double c, double x, double* out);
FRDE_API int frde_f_infinity(double theta, double c, double tol, double* value, double* certified_error);
FRDE_API int frde_gamma_n(double theta, int n, double* out);
FRDE_API int frde_f_tilde_limit(double theta, int N, double* limit, double* tail_bound);

/* critical values */
FRDE_API int frde_theta_star(double tol, frde_root* out);
FRDE_API int frde_find_c_hat(double theta, double tol, frde_root* out, double* upper_bound, int* bound_ok);
FRDE_API int frde_sweep_c_hat_csv(double theta_min, double theta_max, double step, double tol, char** out);
FRDE_API int frde_profile_f_infinity_csv(double theta, double c_max, int points, int* crossings, char** out);

/* bivariate grid measures */
FRDE_API int frde_bivariate_from_signature(const frde_signature* s, int K, frde_bivariate** out);
FRDE_API int frde_bivariate_diagonal(double theta, int K, frde_bivariate** out);
FRDE_API int frde_bivariate_product(double theta, int K, frde_bivariate** out);
FRDE_API int frde_bivariate_apply_t2(const frde_bivariate* m, frde_bivariate** out);
FRDE_API int frde_bivariate_scale(const frde_bivariate* m, int l, frde_bivariate** out);
FRDE_API int frde_bivariate_signature(const frde_bivariate* m, double* buf, size_t cap, size_t* len);
FRDE_API int frde_bivariate_off_diagonal(const frde_bivariate* m, double* out);
FRDE_API int frde_bivariate_json(const frde_bivariate* m, char** out);
/* measure JSON plus invariant verdicts; c < 0 selects c_hat (or 0 below theta*) */
FRDE_API int frde_bivariate_report_json(double theta, double c, int K, char** out);
FRDE_API int frde_default_grid_K(double theta, int* out);
FRDE_API void frde_bivariate_free(frde_bivariate* m);

FRDE_API int frde_apply_f_operator(const frde_signature* s, int n, int T, double tol, double* out);

/* dynamics: trace CSV, summary JSON, final measure JSON (any out may be NULL) */
FRDE_API int frde_endogeny_probe(double theta, int K, int max_steps, double tol, char** trace_csv,
                                 char** summary_json, char** final_json);

/* Monte Carlo */
FRDE_API int frde_sample_root(double theta, int depth, uint64_t seed, double* out);
FRDE_API int frde_sample_bivariate(double theta, int depth, uint64_t seed, double* y, double* y_prime);
FRDE_API int frde_simulate_root(double theta, int depth, long n, uint64_t seed, char** csv, char** summary_json);
FRDE_API int frde_simulate_bivariate(double theta, int depth, long n, uint64_t seed, char** csv, char** summary_json);
/* one report per seed seed..seed+n-1, aggregated into a JSON summary */
FRDE_API int frde_frozen_iteration(double theta, int depth, uint64_t seed, long n, int rounds, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* FRDE_H */
