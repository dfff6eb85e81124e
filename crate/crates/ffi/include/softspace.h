#ifndef SOFTSPACE_H
#define SOFTSPACE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Boundary strategy for block decomposition.
 */
typedef enum SsBoundary {
  SS_BOUNDARY_EXACT = 0,
  SS_BOUNDARY_IGNORE = 1,
  /**
   * Pad with the symbol passed alongside.
   */
  SS_BOUNDARY_PAD = 2,
} SsBoundary;

/**
 * Result codes.
 */
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_RANGE = 2,
  SS_STATUS_VALIDATION = 3,
  SS_STATUS_UNSUPPORTED = 4,
  SS_STATUS_CONSISTENCY = 5,
  SS_STATUS_NOT_IN_SUPPORT = 6,
  SS_STATUS_DIMENSION = 7,
  SS_STATUS_MISSING_BLOCKS = 8,
  SS_STATUS_PARSE = 9,
  SS_STATUS_IO = 10,
  SS_STATUS_UTF8 = 11,
  SS_STATUS_BUFFER_TOO_SMALL = 12,
  SS_STATUS_PANIC = 13,
} SsStatus;

/**
 * Opaque block-complexity table.
 */
typedef struct SsBaseTable SsBaseTable;

/**
 * Opaque output-frequency table.
 */
typedef struct SsCtmTable SsCtmTable;

/**
 * Outcome of one machine run.
 */
typedef struct SsRunResult {
  bool halted;
  uint64_t steps;
} SsRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *ss_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ss_version(void);

/**
 * Number of machines in a space (`dim` is 1 or 2), split into 64-bit halves.
 *
 * # Safety
 * `out_hi` and `out_lo` must be valid for writes.
 */
enum SsStatus ss_space_size(uint32_t states,
                            uint32_t symbols,
                            uint32_t dim,
                            uint64_t *out_hi,
                            uint64_t *out_lo);

/**
 * Run one machine from a blank tape. If `output` is non-null, the output
 * key (e.g. `0110` or `2x2:0110`) is written there NUL-terminated; the
 * required size including the NUL goes to `output_needed` when non-null.
 * A halting run with a too-small buffer still fills `out` and reports
 * `BufferTooSmall`.
 *
 * # Safety
 * `out` must be valid for writes; `output` must point to `output_len`
 * writable bytes when non-null.
 */
enum SsStatus ss_run_machine(uint32_t states,
                             uint32_t symbols,
                             uint32_t dim,
                             uint64_t index_hi,
                             uint64_t index_lo,
                             uint64_t budget,
                             struct SsRunResult *out,
                             char *output,
                             size_t output_len,
                             size_t *output_needed);

/**
 * Peano curve cell of step `t` at level `k`.
 *
 * # Safety
 * `x` and `y` must be valid for writes.
 */
enum SsStatus ss_peano_xy(uint64_t t, uint32_t k, uint64_t *x, uint64_t *y);

/**
 * Load a table file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` valid for writes.
 */
enum SsStatus ss_ctm_table_load(const char *path, struct SsCtmTable **out);

/**
 * Build the table of a whole space by running every machine.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SsStatus ss_ctm_table_build(uint32_t states,
                                 uint32_t symbols,
                                 uint32_t dim,
                                 uint64_t budget,
                                 struct SsCtmTable **out);

/**
 * Write a table file.
 *
 * # Safety
 * `table` must come from this library; `path` NUL-terminated.
 */
enum SsStatus ss_ctm_table_save(const struct SsCtmTable *table, const char *path);

/**
 * Release a table; null is ignored.
 *
 * # Safety
 * `table` must come from this library and not be used afterwards.
 */
void ss_ctm_table_free(struct SsCtmTable *table);

/**
 * Number of distinct outputs; 0 for null.
 *
 * # Safety
 * `table` must come from this library or be null.
 */
size_t ss_ctm_table_len(const struct SsCtmTable *table);

/**
 * Raw count of an output (0 when absent).
 *
 * # Safety
 * `table` must come from this library; `object` NUL-terminated; `out` writable.
 */
enum SsStatus ss_ctm_count(const struct SsCtmTable *table, const char *object, uint64_t *out);

/**
 * `-log2` of the output's frequency among halting runs.
 *
 * # Safety
 * `table` must come from this library; `object` NUL-terminated; `out` writable.
 */
enum SsStatus ss_ctm_value(const struct SsCtmTable *table, const char *object, double *out);

/**
 * Block-complexity table from a frequency table.
 *
 * # Safety
 * `table` must come from this library; `out` writable.
 */
enum SsStatus ss_base_table_from_ctm(const struct SsCtmTable *table,
                                     bool symmetrized,
                                     struct SsBaseTable **out);

/**
 * Release a base table; null is ignored.
 *
 * # Safety
 * `table` must come from this library and not be used afterwards.
 */
void ss_base_table_free(struct SsBaseTable *table);

/**
 * BDM of a string of `len` symbols.
 *
 * # Safety
 * `table` must come from this library; `cells` must point to `len` bytes;
 * `out` writable.
 */
enum SsStatus ss_bdm_string(const struct SsBaseTable *table,
                            const uint8_t *cells,
                            size_t len,
                            size_t block_size,
                            enum SsBoundary strategy,
                            uint8_t pad_symbol,
                            double *out);

/**
 * BDM of a row-major `rows x cols` array.
 *
 * # Safety
 * `table` must come from this library; `cells` must point to `rows * cols`
 * bytes; `out` writable.
 */
enum SsStatus ss_bdm_grid(const struct SsBaseTable *table,
                          const uint8_t *cells,
                          size_t rows,
                          size_t cols,
                          size_t block_size,
                          enum SsBoundary strategy,
                          uint8_t pad_symbol,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOFTSPACE_H */
