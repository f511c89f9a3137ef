#ifndef DSR_H
#define DSR_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
enum DsrStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  DSR_STATUS_OK = 0,
  DSR_STATUS_NULL_POINTER = -1,
  DSR_STATUS_INVALID_ARGUMENT = -2,
  DSR_STATUS_INDEX = -3,
  DSR_STATUS_IO = -4,
  DSR_STATUS_FORMAT = -5,
  DSR_STATUS_BUFFER_TOO_SMALL = -6,
  DSR_STATUS_PANIC = -99,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum DsrStatus DsrStatus;
#else
typedef int32_t DsrStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque replay session.
 */
typedef struct DsrReplay DsrReplay;

/**
 * Per-frame statistics of a replay step.
 */
typedef struct DsrFrameStats {
  uint64_t frame_index;
  double mse;
  /**
   * `INFINITY` for an exact frame.
   */
  double psnr_db;
  uint64_t shader_invocations;
  uint64_t baseline_invocations;
  /**
   * Tiles per state, in encoding order.
   */
  uint64_t state_histogram[5];
} DsrFrameStats;

/**
 * Totals over every frame pushed so far.
 */
typedef struct DsrSummary {
  uint64_t frames;
  double mean_psnr_db;
  double invocation_ratio;
  double savings;
  uint64_t shader_invocations;
  uint64_t baseline_invocations;
} DsrSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dsr_version(void);

/**
 * Copies the calling thread's last error message into `buf`, truncating
 * and always NUL-terminating when `len > 0`. Returns the full message
 * length including the terminator, or 0 if there is no message.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t dsr_last_error_message(char *buf, size_t len);

/**
 * Creates a replay session for `width × height` RGBA frames.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
DsrStatus dsr_replay_new(uint32_t width,
                         uint32_t height,
                         double t,
                         uint32_t d,
                         struct DsrReplay **out);

/**
 * Releases a session. Null is ignored.
 *
 * # Safety
 * `handle` must be null or come from [`dsr_replay_new`] and not be used
 * afterwards.
 */
void dsr_replay_free(struct DsrReplay *handle);

/**
 * Replays one reference frame (`width * height * 4` RGBA bytes). The
 * simulated frame is written to `out_rgba` and statistics to `out_stats`;
 * both may be null.
 *
 * # Safety
 * `handle` must be live; `rgba` must point to `len` readable bytes;
 * `out_rgba`, if not null, to `out_len` writable bytes; `out_stats`, if
 * not null, to one writable [`DsrFrameStats`].
 */
DsrStatus dsr_replay_push_frame(struct DsrReplay *handle,
                                const uint8_t *rgba,
                                size_t len,
                                uint8_t *out_rgba,
                                size_t out_len,
                                struct DsrFrameStats *out_stats);

/**
 * Number of 16×16 tiles per frame.
 *
 * # Safety
 * `handle` must be live and `out` writable.
 */
DsrStatus dsr_replay_tile_count(const struct DsrReplay *handle, size_t *out);

/**
 * Writes the 3-bit state code of every tile for the next frame, one byte
 * per tile, row-major.
 *
 * # Safety
 * `handle` must be live; `out` must point to `len` writable bytes.
 */
DsrStatus dsr_replay_tile_states(const struct DsrReplay *handle, uint8_t *out, size_t len);

/**
 * Totals over the frames pushed so far.
 *
 * # Safety
 * `handle` must be live and `out` writable.
 */
DsrStatus dsr_replay_summary(const struct DsrReplay *handle, struct DsrSummary *out);

/**
 * 2D DCT of a row-major 16×16 block. `input` and `output` hold 256
 * values each and may not overlap.
 *
 * # Safety
 * Both pointers must reference 256 valid `double`s.
 */
DsrStatus dsr_dct2d(const double *input, double *output);

/**
 * Largest |coefficient| of a 16×16 spectrum outside its `d` lowest
 * anti-diagonals.
 *
 * # Safety
 * `coeffs` must reference 256 valid `double`s and `out` be writable.
 */
DsrStatus dsr_max_coefficient(const double *coeffs, uint32_t d, double *out);

/**
 * One controller transition on 3-bit state codes.
 *
 * # Safety
 * `out` must be writable.
 */
DsrStatus dsr_next_state(uint8_t state, double max_c, double t, uint32_t d, uint8_t *out);

/**
 * Bits needed to store the rate table for `tile_count` tiles.
 */
uint64_t dsr_srt_storage_bits(uint64_t tile_count);

/**
 * PSNR in dB of an 8-bit MSE; `INFINITY` for zero.
 *
 * # Safety
 * `out` must be writable.
 */
DsrStatus dsr_psnr(double mse, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSR_H */
