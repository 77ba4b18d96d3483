/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef OMC_H
#define OMC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum OmcStatus {
  OMC_STATUS_OK = 0,
  OMC_STATUS_INVALID_INPUT = 1,
  OMC_STATUS_CONFIG = 2,
  OMC_STATUS_NUMERICAL = 3,
  OMC_STATUS_IO = 4,
  OMC_STATUS_NULL_POINTER = 5,
  // The requested quantity does not exist (for example, no band gap).
  OMC_STATUS_NOT_FOUND = 6,
  // A Rust panic was caught at the boundary.
  OMC_STATUS_INTERNAL = 7,
} OmcStatus;

typedef enum OmcPolarization {
  OMC_POLARIZATION_TE = 0,
  OMC_POLARIZATION_TM = 1,
  OMC_POLARIZATION_ELASTIC = 2,
} OmcPolarization;

typedef enum OmcShape {
  OMC_SHAPE_LORENTZIAN = 0,
  OMC_SHAPE_GAUSSIAN = 1,
} OmcShape;

typedef enum OmcDomain {
  OMC_DOMAIN_PHOTONIC = 0,
  OMC_DOMAIN_PHONONIC = 1,
} OmcDomain;

// Band frequencies along the Γ-M-K-Γ path.
typedef struct OmcBands OmcBands;

// Rasterized unit cell.
typedef struct OmcUnitCell OmcUnitCell;

typedef struct OmcGap {
  size_t lower_band;
  double lower_edge;
  double upper_edge;
  double gap_to_midgap;
  double lower_edge_physical;
  double upper_edge_physical;
} OmcGap;

// Emitter and cavity rates, all in the same angular-frequency unit.
typedef struct OmcRates {
  double g12;
  double g13;
  double g23;
  double kappa_eo;
  double kappa_em;
  double kappa_io;
  double kappa_im;
  double gamma3;
  double gamma2;
} OmcRates;

typedef struct OmcEffectiveRates {
  double gamma12;
  double gamma13;
  double gamma23;
  double beta_cav;
  double c_opt;
  double c_mech;
} OmcEffectiveRates;

typedef struct OmcScattering {
  double t_elastic_re;
  double t_elastic_im;
  double t_raman_re;
  double t_raman_im;
  double p_success;
  double p_elastic;
  double p_loss;
} OmcScattering;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length
// excluding the terminator, or 0 when there is no error.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t omc_last_error_message(char *buf, size_t len);

// Clears the calling thread's last error.
void omc_clear_error(void);

// Builds a hexagonal unit cell with lattice constant `a_m` (metres),
// membrane thickness `d_over_a` and a shamrock hole `(A, B, L)` in units of
// `a`, rasterized on a `resolution²` grid.
//
// # Safety
// `out` must be a valid pointer; the handle it receives must be freed with
// `omc_unit_cell_free`.
enum OmcStatus omc_unit_cell_new(double a_m,
                                 double d_over_a,
                                 double minor,
                                 double major,
                                 double shift,
                                 size_t resolution,
                                 struct OmcUnitCell **out);

// # Safety
// `cell` must be null or a handle from `omc_unit_cell_new` not yet freed.
void omc_unit_cell_free(struct OmcUnitCell *cell);

// Solid fraction of the cell.
//
// # Safety
// `cell` must be a live handle and `out` a valid pointer.
enum OmcStatus omc_unit_cell_fill_fraction(const struct OmcUnitCell *cell, double *out);

// Bands along Γ-M-K-Γ. Photonic polarizations use a GaAs membrane (bulk
// index `n_bulk`, slab-corrected at `target_freq = a/λ`); `Elastic` uses
// GaAs stiffness and density and ignores the optical arguments.
//
// # Safety
// `cell` must be a live handle; `out` must be a valid pointer and the
// handle it receives freed with `omc_bands_free`.
enum OmcStatus omc_bands_compute(const struct OmcUnitCell *cell,
                                 enum OmcPolarization polarization,
                                 double n_bulk,
                                 double target_freq,
                                 size_t n_bands,
                                 size_t cutoff,
                                 size_t samples_per_segment,
                                 struct OmcBands **out);

// # Safety
// `bands` must be null or a handle from `omc_bands_compute` not yet freed.
void omc_bands_free(struct OmcBands *bands);

// Number of k-points and bands per k-point.
//
// # Safety
// `bands` must be a live handle; `n_k` and `n_bands` valid pointers.
enum OmcStatus omc_bands_shape(const struct OmcBands *bands, size_t *n_k, size_t *n_bands);

// Copies normalized frequencies, k-major (`n_k × n_bands`), into `buf`.
//
// # Safety
// `bands` must be a live handle and `buf` must hold `len` doubles.
enum OmcStatus omc_bands_frequencies(const struct OmcBands *bands, double *buf, size_t len);

// Physical units (THz or GHz) per normalized frequency unit.
//
// # Safety
// `bands` must be a live handle and `out` a valid pointer.
enum OmcStatus omc_bands_unit_scale(const struct OmcBands *bands, double *out);

// Widest gap of the band structure. Elastic bands report the complete gap
// across all branches. Returns `NotFound` when there is none.
//
// # Safety
// `bands` must be a live handle and `out` a valid pointer.
enum OmcStatus omc_bands_widest_gap(const struct OmcBands *bands, struct OmcGap *out);

// Cavity-enhanced rates, β-factor and cooperativities. Infinite
// cooperativities (zero loss) are returned as `INFINITY`.
//
// # Safety
// `rates` and `out` must be valid pointers.
enum OmcStatus omc_effective_rates(const struct OmcRates *rates, struct OmcEffectiveRates *out);

// Scattering amplitudes and probabilities at detuning `delta` for the
// enhanced rates `gamma13`, `gamma23` and loss `gamma3`.
//
// # Safety
// `out` must be a valid pointer.
enum OmcStatus omc_scatter(double delta,
                           double gamma13,
                           double gamma23,
                           double gamma3,
                           struct OmcScattering *out);

// Success probability averaged over an incident spectrum of the given
// shape, centre and width (same units as the rates).
//
// # Safety
// `out` must be a valid pointer.
enum OmcStatus omc_wavepacket_success(enum OmcShape shape,
                                      double center,
                                      double width,
                                      double gamma13,
                                      double gamma23,
                                      double gamma3,
                                      double *out);

// Runs one CLI command (`"bands"`, `"defect"`, `"cascade"` or `"sweep"`)
// on a JSON configuration string and writes its files to `out_dir`.
//
// # Safety
// `command`, `config_json` and `out_dir` must be NUL-terminated strings.
enum OmcStatus omc_run(const char *command,
                       const char *config_json,
                       const char *out_dir,
                       enum OmcDomain domain);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OMC_H */
