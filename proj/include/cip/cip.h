#ifndef CIP_CIP_H
#define CIP_CIP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CIP_BUILDING)
#    define CIP_API __declspec(dllexport)
#  else
#    define CIP_API __declspec(dllimport)
#  endif
#else
#  define CIP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cip_status {
    CIP_OK = 0,
    CIP_INVALID_ARGUMENT = 1,
    CIP_DIMENSION_MISMATCH = 2,
    CIP_DEGENERATE_CHANNEL = 3,
    CIP_SINGULAR_CHANNEL = 4,
    CIP_ILL_CONDITIONED = 5,
    CIP_INFEASIBLE = 6,
    CIP_SOLVER_FAILURE = 7,
    CIP_UNSUPPORTED_SHAPE = 8,
    CIP_ROTATION_INFEASIBLE = 9,
    CIP_AMBIGUOUS_DETECTION = 10,
    CIP_CONFIG_ERROR = 11,
    CIP_IO_ERROR = 12,
    CIP_INTERNAL_ERROR = 99
} cip_status;

typedef enum cip_algorithm {
    CIP_ALG_CIPM = 0,
    CIP_ALG_CIZF,
    CIP_ALG_CIMRT,
    CIP_ALG_CIMM,
    CIP_ALG_CISR_PA,
    CIP_ALG_CISR_G,
    CIP_ALG_ZF,
    CIP_ALG_MMSE,
    CIP_ALG_NMRT
} cip_algorithm;

typedef enum cip_run_mode { CIP_RUN_SIMULATE = 0, CIP_RUN_BOUNDS = 1 } cip_run_mode;

typedef struct cip_config cip_config;
typedef struct cip_table cip_table;
typedef struct cip_channel cip_channel;
typedef struct cip_solution cip_solution;

/* Message of the last failed call on this thread ("" if none). */
CIP_API const char* cip_last_error(void);
CIP_API const char* cip_status_name(cip_status s);
CIP_API const char* cip_version(void);

/* ---- configuration and Monte-Carlo runs ---- */

CIP_API cip_status cip_config_load(const char* path, cip_config** out);
CIP_API cip_status cip_config_parse(const char* text, cip_config** out);
CIP_API void cip_config_free(cip_config* cfg);
CIP_API size_t cip_config_scenario_count(const cip_config* cfg);
/* Overrides applied to every scenario. */
CIP_API cip_status cip_config_set_seed(cip_config* cfg, uint64_t seed);
CIP_API cip_status cip_config_set_trials(cip_config* cfg, int trials);

/* threads <= 0 uses the hardware concurrency. Output is identical for any thread count. */
CIP_API cip_status cip_run(const cip_config* cfg, cip_run_mode mode, int threads, cip_table** out);

typedef struct cip_row {
    const char* scenario_id;
    int trial;
    int slot;
    const char* algorithm;
    const char* metric;
    double value;
} cip_row;

CIP_API size_t cip_table_size(const cip_table* t);
/* Strings stay valid until the table is freed. */
CIP_API cip_status cip_table_row(const cip_table* t, size_t i, cip_row* out);
CIP_API cip_status cip_table_write_csv(const cip_table* t, const char* path);
CIP_API void cip_table_free(cip_table* t);

/* ---- single instances ---- */

CIP_API cip_status cip_channel_generate(int K, int M, double sigma2_h, uint64_t seed,
                                        double sigma2_noise, cip_channel** out);
/* data: K*M complex entries, row-major, interleaved (re, im). */
CIP_API cip_status cip_channel_create(int K, int M, const double* data, double sigma2_noise,
                                      cip_channel** out);
CIP_API cip_status cip_channel_dims(const cip_channel* ch, int* K, int* M);
CIP_API cip_status cip_channel_data(const cip_channel* ch, double* out, size_t len);
CIP_API void cip_channel_free(cip_channel* ch);

CIP_API cip_status cip_symbols_draw(int K, int order, uint64_t seed, int* indices);

CIP_API cip_status cip_algorithm_from_name(const char* name, cip_algorithm* out);

typedef struct cip_request {
    cip_algorithm algorithm;
    int psk_order;
    const int* symbol_indices; /* K entries */
    const double* snr_targets; /* K linear targets; NULL = all 1 */
    const double* weights;     /* K weights (CIMM r, sum-rate phi); NULL = all 1 */
    double power;              /* budget for budget-driven algorithms */
} cip_request;

CIP_API cip_status cip_solve(const cip_channel* ch, const cip_request* req, cip_solution** out);
CIP_API int cip_solution_users(const cip_solution* s);
CIP_API int cip_solution_antennas(const cip_solution* s);
CIP_API double cip_solution_power(const cip_solution* s);
/* Objective: power for power minimization, t* for CIMM, weighted sum rate for CISR. */
CIP_API double cip_solution_value(const cip_solution* s);
/* Interleaved complex outputs; len counts doubles. */
CIP_API cip_status cip_solution_x(const cip_solution* s, double* out, size_t len);
CIP_API cip_status cip_solution_rx(const cip_solution* s, double* out, size_t len);
CIP_API cip_status cip_solution_snr(const cip_solution* s, double* out, size_t len);
/* Free-form diagnostics, one "key: value" per line. */
CIP_API const char* cip_solution_report(const cip_solution* s);
CIP_API void cip_solution_free(cip_solution* s);

#ifdef __cplusplus
}
#endif

#endif
