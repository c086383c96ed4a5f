#ifndef DUALSCORE_H
#define DUALSCORE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define DS_ORIGIN_ID 0

#define DS_ORIGIN_OOD 1

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_PARSE_ERROR = 3,
  DS_STATUS_SCHEMA_ERROR = 4,
  DS_STATUS_IO_ERROR = 5,
  DS_STATUS_EMPTY_SET = 6,
  DS_STATUS_EMPTY_ID_POPULATION = 7,
  DS_STATUS_UNKNOWN_CHANNEL = 8,
  DS_STATUS_NON_FINITE_SCORE = 9,
  DS_STATUS_EMPTY_SIDE = 10,
  DS_STATUS_FAILED = 11,
  DS_STATUS_PANIC = 12,
} DsStatus;

// Opaque evaluation set.
typedef struct DsEvalSet DsEvalSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a
// successful one. Valid until the next call on the same thread.
const char *dualscore_last_error(void);

// Library version as a static NUL-terminated string.
const char *dualscore_version(void);

// Builds a set with channels `s_id` and `s_ood` from parallel arrays.
//
// `origin[i]` is `DS_ORIGIN_ID` or `DS_ORIGIN_OOD`; `correct[i]` is read
// for ID samples only (nonzero = correct).
//
// # Safety
// Every array must hold `n` readable elements; `out` must be writable.
enum DsStatus dualscore_evalset_from_arrays(size_t n,
                                            const uint8_t *origin,
                                            const uint8_t *correct,
                                            const double *s_id,
                                            const double *s_ood,
                                            struct DsEvalSet **out);

// Loads a scores CSV (`sample_id,domain,correct,<channels...>`).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum DsStatus dualscore_evalset_load(const char *path, struct DsEvalSet **out);

// Releases a set. NULL is ignored.
//
// # Safety
// `set` must come from this library and not have been freed.
void dualscore_evalset_free(struct DsEvalSet *set);

// Number of samples, or 0 for NULL.
//
// # Safety
// `set` must be NULL or a live handle.
size_t dualscore_evalset_len(const struct DsEvalSet *set);

// Number of ID samples, or 0 for NULL.
//
// # Safety
// `set` must be NULL or a live handle.
size_t dualscore_evalset_n_id(const struct DsEvalSet *set);

// Number of OOD samples, or 0 for NULL.
//
// # Safety
// `set` must be NULL or a live handle.
size_t dualscore_evalset_n_ood(const struct DsEvalSet *set);

// DS-F1 over a `t_grid` quantile grid per channel (0 = every distinct
// value) plus sentinels, with the maximizing pair.
//
// # Safety
// `set` must be a live handle, channel names NUL-terminated, out-pointers
// writable. `tau_id`/`tau_ood` may be NULL.
enum DsStatus dualscore_ds_f1(const struct DsEvalSet *set,
                              const char *id_channel,
                              const char *ood_channel,
                              size_t t_grid,
                              double *value,
                              double *tau_id,
                              double *tau_ood);

// DS-AURC with `k_bins` coverage bins.
//
// # Safety
// As for [`dualscore_ds_f1`]; `value` must be writable.
enum DsStatus dualscore_ds_aurc(const struct DsEvalSet *set,
                                const char *id_channel,
                                const char *ood_channel,
                                size_t t_grid,
                                size_t k_bins,
                                double *value);

// Best single-threshold F1 of one channel and its threshold.
//
// # Safety
// `set` must be a live handle, `channel` NUL-terminated, `value` writable;
// `tau` may be NULL.
enum DsStatus dualscore_single_f1(const struct DsEvalSet *set,
                                  const char *channel,
                                  size_t t_grid,
                                  double *value,
                                  double *tau);

// Single-channel AURC with `k_bins` coverage bins.
//
// # Safety
// `set` must be a live handle, `channel` NUL-terminated, `value` writable.
enum DsStatus dualscore_single_aurc(const struct DsEvalSet *set,
                                    const char *channel,
                                    size_t t_grid,
                                    size_t k_bins,
                                    double *value);

// AUROC of ID (positive) against OOD on one channel.
//
// # Safety
// `set` must be a live handle, `channel` NUL-terminated, `value` writable.
enum DsStatus dualscore_auroc(const struct DsEvalSet *set, const char *channel, double *value);

// OOD acceptance rate at 95% ID recall.
//
// # Safety
// As for [`dualscore_auroc`].
enum DsStatus dualscore_fpr_at_95_tpr(const struct DsEvalSet *set,
                                      const char *channel,
                                      double *value);

// Average precision with ID as the positive class.
//
// # Safety
// As for [`dualscore_auroc`].
enum DsStatus dualscore_aupr(const struct DsEvalSet *set, const char *channel, double *value);

// Maximum softmax probability of one logit vector.
//
// # Safety
// `logits` must hold `n_classes` readable values; `value` must be writable.
enum DsStatus dualscore_msp(const double *logits, size_t n_classes, double *value);

// `T * logsumexp(z / T)` of one logit vector.
//
// # Safety
// As for [`dualscore_msp`].
enum DsStatus dualscore_energy(const double *logits,
                               size_t n_classes,
                               double temperature,
                               double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUALSCORE_H */
