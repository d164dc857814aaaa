#ifndef EBMC_H
#define EBMC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum EbmcStatus {
  EBMC_STATUS_OK = 0,
  EBMC_STATUS_NULL_POINTER = 1,
  EBMC_STATUS_INVALID_ARGUMENT = 2,
  EBMC_STATUS_INVALID_INSTANCE = 3,
  EBMC_STATUS_FORMAT_ERROR = 4,
  EBMC_STATUS_IO_ERROR = 5,
  EBMC_STATUS_TOO_LARGE = 6,
  EBMC_STATUS_SOLVER_ERROR = 7,
  EBMC_STATUS_PANIC = 8,
} EbmcStatus;

typedef enum EbmcUtilityKind {
  EBMC_UTILITY_KIND_SELFISH = 0,
  EBMC_UTILITY_KIND_ALTRUISTIC = 1,
} EbmcUtilityKind;

// Opaque instance handle.
typedef struct EbmcInstance EbmcInstance;

// Outcome of an equilibrium check.
typedef struct EbmcSeparation {
  bool is_pne;
  // First county with a strictly improving move (valid when `!is_pne`).
  size_t county;
  int64_t gain;
} EbmcSeparation;

// Settings for the equilibrium searches. Fill with `ebmc_run_options_default`.
typedef struct EbmcRunOptions {
  size_t t_max;
  size_t init_max;
  uint64_t seed;
  // Seconds for ZR or the bounded model in BR-plus; zero, negative or
  // non-finite means no limit.
  double time_limit_s;
} EbmcRunOptions;

typedef struct EbmcRunResult {
  bool pne_found;
  // Potential of the returned equilibrium; 0 when none was found.
  int64_t phi;
  size_t rounds;
  bool cycle_detected;
  size_t cuts_added;
  bool timed_out;
  double elapsed_s;
} EbmcRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the calling thread's last failure, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *ebmc_last_error(void);

// Library version as a static NUL-terminated string.
const char *ebmc_version(void);

// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum EbmcStatus ebmc_instance_from_json(const char *json, struct EbmcInstance **out);

// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum EbmcStatus ebmc_instance_load(const char *path, struct EbmcInstance **out);

// Bundled instance: "fig2", "k1ce" or "k2ce".
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum EbmcStatus ebmc_instance_builtin(const char *name, struct EbmcInstance **out);

// Random instance with the default deletion ratio and traffic range.
//
// # Safety
// `out` must be a valid pointer.
enum EbmcStatus ebmc_instance_generate(size_t num_counties,
                                       size_t lakes_per_county,
                                       size_t num_ais_types,
                                       double budget_ratio,
                                       uint64_t seed,
                                       struct EbmcInstance **out);

// # Safety
// `inst` must be NULL or a handle from this library not yet freed.
void ebmc_instance_free(struct EbmcInstance *inst);

// JSON text of the instance; release with `ebmc_string_free`.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum EbmcStatus ebmc_instance_to_json(const struct EbmcInstance *inst, char **out);

// # Safety
// `s` must be NULL or a string returned by this library not yet freed.
void ebmc_string_free(char *s);

// # Safety
// `inst` must be NULL or a live handle.
size_t ebmc_instance_num_lakes(const struct EbmcInstance *inst);

// # Safety
// `inst` must be NULL or a live handle.
size_t ebmc_instance_num_counties(const struct EbmcInstance *inst);

// # Safety
// `inst` must be NULL or a live handle.
size_t ebmc_instance_num_arcs(const struct EbmcInstance *inst);

// Budget of county `county`.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum EbmcStatus ebmc_county_budget(const struct EbmcInstance *inst, size_t county, size_t *out);

// Total covered weight of a profile.
//
// # Safety
// `profile` must point to `len` bytes; `out` must be valid.
enum EbmcStatus ebmc_phi(const struct EbmcInstance *inst,
                         const uint8_t *profile,
                         size_t len,
                         int64_t *out);

// Utility of county `county` under a profile.
//
// # Safety
// `profile` must point to `len` bytes; `out` must be valid.
enum EbmcStatus ebmc_utility(const struct EbmcInstance *inst,
                             enum EbmcUtilityKind kind,
                             size_t county,
                             const uint8_t *profile,
                             size_t len,
                             int64_t *out);

// Equilibrium check of a budget-feasible profile.
//
// # Safety
// `profile` must point to `len` bytes; `out` must be valid.
enum EbmcStatus ebmc_check_separation(const struct EbmcInstance *inst,
                                      enum EbmcUtilityKind kind,
                                      const uint8_t *profile,
                                      size_t len,
                                      struct EbmcSeparation *out);

struct EbmcRunOptions ebmc_run_options_default(void);

// Best-response dynamics from `init` (NULL for all zeros). When not NULL,
// `profile_out` receives `num_lakes` bytes of the equilibrium found.
//
// # Safety
// `init` must be NULL or point to `len` bytes; `opts` NULL or valid; `out`
// valid; `profile_out` NULL or writable for `num_lakes` bytes.
enum EbmcStatus ebmc_brs(const struct EbmcInstance *inst,
                         const uint8_t *init,
                         size_t len,
                         const struct EbmcRunOptions *opts,
                         struct EbmcRunResult *out,
                         uint8_t *profile_out);

// BR-plus from `init` (NULL for all zeros).
//
// # Safety
// Same contract as `ebmc_brs`.
enum EbmcStatus ebmc_br_plus(const struct EbmcInstance *inst,
                             const uint8_t *init,
                             size_t len,
                             const struct EbmcRunOptions *opts,
                             struct EbmcRunResult *out,
                             uint8_t *profile_out);

// Cutting-plane search for the best equilibrium; `warm_start` may be NULL.
//
// # Safety
// Same contract as `ebmc_brs`.
enum EbmcStatus ebmc_zr(const struct EbmcInstance *inst,
                        const uint8_t *warm_start,
                        size_t len,
                        const struct EbmcRunOptions *opts,
                        struct EbmcRunResult *out,
                        uint8_t *profile_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBMC_H */
