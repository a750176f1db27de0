/* C interface to the dllab core. All strings returned through `char **out`
 * are heap-allocated and must be released with dllab_string_free. */
#ifndef DLLAB_H
#define DLLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DLLAB_API __declspec(dllexport)
#else
#define DLLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Mirrors dllab::ErrorCode. */
typedef enum dllab_status {
    DLLAB_OK                   = 0,
    DLLAB_INVALID_ARGUMENT     = 1,
    DLLAB_DIMENSION_MISMATCH   = 2,
    DLLAB_NOT_HERMITIAN        = 3,
    DLLAB_ZERO_TERM            = 4,
    DLLAB_DIMENSION_CAP        = 5,
    DLLAB_NOT_CONVERGED        = 6,
    DLLAB_NOT_FRUSTRATION_FREE = 7,
    DLLAB_DEGENERATE_GROUND    = 8,
    DLLAB_GEOMETRY             = 9,
    DLLAB_PARSE                = 10,
    DLLAB_IO                   = 11,
    DLLAB_INTERNAL             = 99
} dllab_status;

typedef struct dllab_hamiltonian dllab_hamiltonian;
typedef struct dllab_ground_space dllab_ground_space;

typedef struct dllab_hamiltonian_info {
    int32_t n;
    int32_t d;
    uint64_t dim;
    uint64_t terms;
    int32_t k;
    int32_t g;
    int32_t one_d; /* two-layer nearest-neighbour open chain */
    int32_t all_projectors;
} dllab_hamiltonian_info;

typedef struct dllab_shrinkage {
    double epsilon;
    double f_bound;
    double theoretical_bound;
    double measured_shrinkage;
    int32_t pass;
} dllab_shrinkage;

DLLAB_API const char *dllab_version(void);
/* Message of the last failing call on this thread; empty if none. */
DLLAB_API const char *dllab_last_error(void);
DLLAB_API const char *dllab_status_name(dllab_status status);
DLLAB_API void dllab_string_free(char *s);

/* JSON array of {name, ...default parameters}. */
DLLAB_API dllab_status dllab_model_list(char **out_json);
/* descriptor: {"name": ..., integer parameters}. */
DLLAB_API dllab_status dllab_model_build(const char *descriptor_json, dllab_hamiltonian **out);

DLLAB_API dllab_status dllab_hamiltonian_from_json(const char *doc, dllab_hamiltonian **out);
DLLAB_API dllab_status dllab_hamiltonian_load(const char *path, dllab_hamiltonian **out);
DLLAB_API dllab_status dllab_hamiltonian_to_json(const dllab_hamiltonian *h, char **out_json);
DLLAB_API dllab_status dllab_hamiltonian_info_get(const dllab_hamiltonian *h, dllab_hamiltonian_info *out);
DLLAB_API void dllab_hamiltonian_free(dllab_hamiltonian *h);

DLLAB_API dllab_status dllab_ground_space_compute(const dllab_hamiltonian *h, dllab_ground_space **out);
DLLAB_API dllab_status dllab_ground_space_summary(const dllab_ground_space *gs, double *ground_energy, double *gap, int32_t *degeneracy);
DLLAB_API void dllab_ground_space_free(dllab_ground_space *gs);

DLLAB_API dllab_status dllab_dl_bound(double epsilon, int32_t k, int32_t g, int32_t one_d, double *out);
DLLAB_API dllab_status dllab_measure_shrinkage(const dllab_hamiltonian *h, const dllab_ground_space *gs, dllab_shrinkage *out);

/* Runs a pipeline from a config document. base_dir resolves relative model
 * paths (NULL means "."). out_dir NULL skips writing files. format is
 * "structured" or "csv" (NULL means structured). report_json receives the
 * structured report, and overall_pass 1 or 0. */
DLLAB_API dllab_status dllab_run(const char *config_text, const char *base_dir, const char *out_dir, const char *format,
                                 char **report_json, int32_t *overall_pass);

#ifdef __cplusplus
}
#endif

#endif
