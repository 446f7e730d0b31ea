#ifndef TWOGEN_H
#define TWOGEN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TwogenStatus {
  TWOGEN_STATUS_OK = 0,
  TWOGEN_STATUS_NULL_POINTER = 1,
  TWOGEN_STATUS_INVALID_ARGUMENT = 2,
  TWOGEN_STATUS_INVALID_UTF8 = 3,
  TWOGEN_STATUS_FIELD_ERROR = 4,
  TWOGEN_STATUS_SEARCH_ERROR = 5,
  TWOGEN_STATUS_PIPELINE_ERROR = 6,
  TWOGEN_STATUS_OUT_OF_RANGE = 7,
  TWOGEN_STATUS_PANIC = 8,
} TwogenStatus;

typedef enum TwogenVerdict {
  TWOGEN_VERDICT_PROVED_FREE = 0,
  TWOGEN_VERDICT_INCONCLUSIVE = 1,
} TwogenVerdict;

// Run settings.
typedef struct TwogenConfig TwogenConfig;

// The field `Q(cos 2pi/p, cos 2pi/q)` with its power basis.
typedef struct TwogenField TwogenField;

// Stage counts and survivors of one triple.
typedef struct TwogenOutcome TwogenOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next call.
const char *twogen_last_error(void);

// Default settings.
struct TwogenConfig *twogen_config_new(void);

// Sets one `key = value` setting; the config is left unchanged when the result is invalid.
//
// # Safety
// `cfg` must come from [`twogen_config_new`]; `key` and `value` must be nul-terminated.
enum TwogenStatus twogen_config_set(struct TwogenConfig *cfg, const char *key, const char *value);

// # Safety
// `cfg` must come from [`twogen_config_new`] or be null.
void twogen_config_free(struct TwogenConfig *cfg);

// # Safety
// `out` must be a valid pointer.
enum TwogenStatus twogen_field_new(uint32_t p, uint32_t q, struct TwogenField **out);

// Degree of the field over `Q`; 0 for a null handle.
//
// # Safety
// `field` must come from [`twogen_field_new`] or be null.
uintptr_t twogen_field_degree(const struct TwogenField *field);

// Image of the element with power-basis coordinates `coords[0..len]` at real place `place`.
//
// # Safety
// `coords` must point to `len` integers; `out` must be valid.
enum TwogenStatus twogen_field_embed(const struct TwogenField *field,
                                     const int64_t *coords,
                                     uintptr_t len,
                                     uintptr_t place,
                                     double *out);

// # Safety
// `field` must come from [`twogen_field_new`] or be null.
void twogen_field_free(struct TwogenField *field);

// Runs one `(p, q, r)` triple through every filter.
//
// # Safety
// `cfg` may be null for defaults; `out` must be valid.
enum TwogenStatus twogen_run_triple(const struct TwogenConfig *cfg,
                                    uint32_t p,
                                    uint32_t q,
                                    uint32_t r,
                                    struct TwogenOutcome **out);

// Count recorded at the named stage.
//
// # Safety
// `outcome` must come from [`twogen_run_triple`]; `stage` nul-terminated; `out` valid.
enum TwogenStatus twogen_outcome_stage_count(const struct TwogenOutcome *outcome,
                                             const char *stage,
                                             uintptr_t *out);

// Number of non-real survivors; 0 for a null handle.
//
// # Safety
// `outcome` must come from [`twogen_run_triple`] or be null.
uintptr_t twogen_outcome_survivor_count(const struct TwogenOutcome *outcome);

// Parameter of survivor `index`.
//
// # Safety
// `outcome` must come from [`twogen_run_triple`]; `re` and `im` valid.
enum TwogenStatus twogen_outcome_survivor_gamma(const struct TwogenOutcome *outcome,
                                                uintptr_t index,
                                                double *re,
                                                double *im);

// Outcome as a JSON document; release with [`twogen_string_free`]. Null on failure.
//
// # Safety
// `outcome` must come from [`twogen_run_triple`] or be null.
char *twogen_outcome_to_json(const struct TwogenOutcome *outcome);

// # Safety
// `s` must come from this library or be null.
void twogen_string_free(char *s);

// # Safety
// `outcome` must come from [`twogen_run_triple`] or be null.
void twogen_outcome_free(struct TwogenOutcome *outcome);

// Free-product tests up to `max_level` for the pair with parameter `re + i im`.
//
// # Safety
// `verdict` and `level` must be valid.
enum TwogenStatus twogen_free_test(uint32_t p,
                                   uint32_t q,
                                   double re,
                                   double im,
                                   uint8_t max_level,
                                   enum TwogenVerdict *verdict,
                                   uint8_t *level);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWOGEN_H */
