#ifndef RIS_H
#define RIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RisStatus {
  RIS_STATUS_OK = 0,
  RIS_STATUS_NULL_POINTER = 1,
  RIS_STATUS_INVALID_ARGUMENT = 2,
  RIS_STATUS_PARSE = 3,
  RIS_STATUS_OUT_OF_RANGE = 4,
  RIS_STATUS_BUFFER_TOO_SMALL = 5,
  RIS_STATUS_SOLVER = 6,
  RIS_STATUS_PANIC = 7,
} RisStatus;

/**
 * Device emulator with a queue of encoded responses.
 */
typedef struct RisEmulator RisEmulator;

/**
 * Binary pattern with its geometry.
 */
typedef struct RisPattern RisPattern;

/**
 * Measured element response.
 */
typedef struct RisResponse RisResponse;

typedef struct RisGeometry {
  uint32_t nx;
  uint32_t ny;
  double pitch_x_mm;
  double pitch_y_mm;
} RisGeometry;

typedef struct RisComplex {
  double re;
  double im;
} RisComplex;

typedef struct RisWorstCase {
  double off_db;
  double off_freq_ghz;
  double on_db;
  double on_freq_ghz;
  double phase_difference_deg;
  double phase_difference_freq_ghz;
} RisWorstCase;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ris_version(void);

/**
 * Copy the calling thread's last error message; empty after a successful
 * call. Pass `cap == 0` to learn the size through `needed`.
 */
enum RisStatus ris_last_error_message(char *buf, size_t cap, size_t *needed);

/**
 * The 16 x 16, 20 mm x 13 mm prototype lattice.
 */
struct RisGeometry ris_geometry_default(void);

enum RisStatus ris_response_anchored(struct RisResponse **out);

/**
 * Parse CSV text. `warnings` (nullable) receives the number of stated
 * phase differences that disagree with the recomputed ones.
 */
enum RisStatus ris_response_from_csv(const char *text,
                                     struct RisResponse **out,
                                     uint32_t *warnings);

void ris_response_free(struct RisResponse *response);

enum RisStatus ris_response_gamma(const struct RisResponse *response,
                                  double freq_ghz,
                                  bool on,
                                  struct RisComplex *out);

/**
 * Wrapped OFF/ON phase difference in [0, 180] degrees.
 */
enum RisStatus ris_response_phase_difference(const struct RisResponse *response,
                                             double freq_ghz,
                                             double *out);

enum RisStatus ris_response_worst_case(const struct RisResponse *response,
                                       double lo_ghz,
                                       double hi_ghz,
                                       struct RisWorstCase *out);

/**
 * All-OFF pattern.
 */
enum RisStatus ris_pattern_new(struct RisGeometry geom, struct RisPattern **out);

enum RisStatus ris_pattern_from_hex(struct RisGeometry geom,
                                    const char *hex,
                                    struct RisPattern **out);

void ris_pattern_free(struct RisPattern *pattern);

size_t ris_pattern_len(const struct RisPattern *pattern);

enum RisStatus ris_pattern_get(const struct RisPattern *pattern, size_t index, bool *out);

enum RisStatus ris_pattern_set(struct RisPattern *pattern, size_t index, bool on);

enum RisStatus ris_pattern_to_hex(const struct RisPattern *pattern,
                                  char *buf,
                                  size_t cap,
                                  size_t *needed);

/**
 * Quantized steering pattern toward `(theta, phi)` for a plane wave
 * arriving from `(inc_theta, inc_phi)`, all in degrees. A null `response`
 * selects an ideal 0/180 degree element.
 */
enum RisStatus ris_steer(struct RisGeometry geom,
                         const struct RisResponse *response,
                         double freq_ghz,
                         double inc_theta_deg,
                         double inc_phi_deg,
                         double theta_deg,
                         double phi_deg,
                         struct RisPattern **out);

/**
 * TX-RIS-RX complex gain for point antennas at `tx` and `rx` (three
 * doubles each, meters).
 */
enum RisStatus ris_channel_gain(const struct RisPattern *pattern,
                                const struct RisResponse *response,
                                const double *tx,
                                const double *rx,
                                double freq_ghz,
                                double element_factor_q,
                                struct RisComplex *out);

/**
 * CRC-8 (polynomial 0x07, init 0). A null pointer with `len == 0` is the
 * empty message.
 */
uint8_t ris_crc8(const uint8_t *data, size_t len);

/**
 * Encode one frame into `buf`. `needed` receives the frame length.
 */
enum RisStatus ris_frame_encode(uint8_t opcode,
                                const uint8_t *payload,
                                size_t len,
                                uint8_t *buf,
                                size_t cap,
                                size_t *needed);

enum RisStatus ris_emulator_new(struct RisGeometry geom, struct RisEmulator **out);

void ris_emulator_free(struct RisEmulator *emulator);

/**
 * Attach a solver-backed channel so GET_RSSI answers. The response is
 * copied; the caller keeps ownership of its handle.
 */
enum RisStatus ris_emulator_set_channel(struct RisEmulator *emulator,
                                        const struct RisResponse *response,
                                        const double *tx,
                                        const double *rx,
                                        double freq_ghz,
                                        double element_factor_q);

/**
 * Feed raw bytes; responses are queued for [`ris_emulator_read`].
 */
enum RisStatus ris_emulator_process(struct RisEmulator *emulator, const uint8_t *data, size_t len);

/**
 * Drain up to `cap` queued response bytes; `written` receives the count.
 */
enum RisStatus ris_emulator_read(struct RisEmulator *emulator,
                                 uint8_t *buf,
                                 size_t cap,
                                 size_t *written);

enum RisStatus ris_emulator_pattern_hex(const struct RisEmulator *emulator,
                                        char *buf,
                                        size_t cap,
                                        size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIS_H */
