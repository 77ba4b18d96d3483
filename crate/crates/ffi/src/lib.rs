//! C interface to `omc-core`.
//!
//! Every function returns an [`OmcStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and can be read with
//! `omc_last_error_message`. Handles are opaque and must be released with
//! their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use omc_core::bands::{find_complete_gap, find_gaps, BandStructure, Polarization};
use omc_core::cascade::{
    effective_rates, scatter, wavepacket_success, EffectiveRates, EmitterRates, SpectralDensity, SpectralShape,
};
use omc_core::cli::{cmd_bands, cmd_cascade, cmd_defect, cmd_sweep, Domain, OutputSet, Sink};
use omc_core::config::RunConfig;
use omc_core::geometry::{build_unit_cell, LatticeSpec, ShamrockHole, UnitCellGeometry};
use omc_core::phononic::{elastic_band_structure, ElasticMaterial};
use omc_core::photonic::{band_structure, PhotonicMaterial};
use omc_core::symmetry::irbz_path;
use omc_core::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmcStatus {
    Ok = 0,
    InvalidInput = 1,
    Config = 2,
    Numerical = 3,
    Io = 4,
    NullPointer = 5,
    /// The requested quantity does not exist (for example, no band gap).
    NotFound = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmcPolarization {
    Te = 0,
    Tm = 1,
    Elastic = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmcDomain {
    Photonic = 0,
    Phononic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmcShape {
    Lorentzian = 0,
    Gaussian = 1,
}

/// Emitter and cavity rates, all in the same angular-frequency unit.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmcRates {
    pub g12: f64,
    pub g13: f64,
    pub g23: f64,
    pub kappa_eo: f64,
    pub kappa_em: f64,
    pub kappa_io: f64,
    pub kappa_im: f64,
    pub gamma3: f64,
    pub gamma2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmcEffectiveRates {
    pub gamma12: f64,
    pub gamma13: f64,
    pub gamma23: f64,
    pub beta_cav: f64,
    pub c_opt: f64,
    pub c_mech: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmcScattering {
    pub t_elastic_re: f64,
    pub t_elastic_im: f64,
    pub t_raman_re: f64,
    pub t_raman_im: f64,
    pub p_success: f64,
    pub p_elastic: f64,
    pub p_loss: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmcGap {
    pub lower_band: usize,
    pub lower_edge: f64,
    pub upper_edge: f64,
    pub gap_to_midgap: f64,
    pub lower_edge_physical: f64,
    pub upper_edge_physical: f64,
}

/// Rasterized unit cell.
pub struct OmcUnitCell(UnitCellGeometry);

/// Band frequencies along the Γ-M-K-Γ path.
pub struct OmcBands(BandStructure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> OmcStatus {
    match err {
        Error::InvalidInput(_) => OmcStatus::InvalidInput,
        Error::Config(_) => OmcStatus::Config,
        Error::Numerical(_) => OmcStatus::Numerical,
        Error::Io(_) => OmcStatus::Io,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), OmcStatus>) -> OmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OmcStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            OmcStatus::Internal
        }
    }
}

fn fail(err: Error) -> OmcStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null(what: &str) -> OmcStatus {
    set_error(&format!("{what} is a null pointer"));
    OmcStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, OmcStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), OmcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, OmcStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        OmcStatus::InvalidInput
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// excluding the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn omc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Clears the calling thread's last error.
#[no_mangle]
pub extern "C" fn omc_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Builds a hexagonal unit cell with lattice constant `a_m` (metres),
/// membrane thickness `d_over_a` and a shamrock hole `(A, B, L)` in units of
/// `a`, rasterized on a `resolution²` grid.
///
/// # Safety
/// `out` must be a valid pointer; the handle it receives must be freed with
/// `omc_unit_cell_free`.
#[no_mangle]
pub unsafe extern "C" fn omc_unit_cell_new(
    a_m: f64,
    d_over_a: f64,
    minor: f64,
    major: f64,
    shift: f64,
    resolution: usize,
    out: *mut *mut OmcUnitCell,
) -> OmcStatus {
    guard(|| {
        let lattice = LatticeSpec::hexagonal(a_m, d_over_a * a_m).map_err(fail)?;
        let cell = build_unit_cell(&lattice, &ShamrockHole::new(minor, major, shift), resolution).map_err(fail)?;
        write(out, Box::into_raw(Box::new(OmcUnitCell(cell))), "out")
    })
}

/// # Safety
/// `cell` must be null or a handle from `omc_unit_cell_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn omc_unit_cell_free(cell: *mut OmcUnitCell) {
    if !cell.is_null() {
        drop(Box::from_raw(cell));
    }
}

/// Solid fraction of the cell.
///
/// # Safety
/// `cell` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn omc_unit_cell_fill_fraction(cell: *const OmcUnitCell, out: *mut f64) -> OmcStatus {
    guard(|| {
        let cell = deref(cell, "cell")?;
        write(out, cell.0.fill_fraction, "out")
    })
}

/// Bands along Γ-M-K-Γ. Photonic polarizations use a GaAs membrane (bulk
/// index `n_bulk`, slab-corrected at `target_freq = a/λ`); `Elastic` uses
/// GaAs stiffness and density and ignores the optical arguments.
///
/// # Safety
/// `cell` must be a live handle; `out` must be a valid pointer and the
/// handle it receives freed with `omc_bands_free`.
#[no_mangle]
pub unsafe extern "C" fn omc_bands_compute(
    cell: *const OmcUnitCell,
    polarization: OmcPolarization,
    n_bulk: f64,
    target_freq: f64,
    n_bands: usize,
    cutoff: usize,
    samples_per_segment: usize,
    out: *mut *mut OmcBands,
) -> OmcStatus {
    guard(|| {
        let cell = &deref(cell, "cell")?.0;
        let path = irbz_path(&cell.lattice, samples_per_segment).map_err(fail)?;
        let bands = match polarization {
            OmcPolarization::Elastic => {
                elastic_band_structure(cell, &ElasticMaterial::gaas(), &path, n_bands, cutoff).map_err(fail)?
            }
            p => {
                let material = PhotonicMaterial::new(n_bulk, cell.lattice.d_over_a(), target_freq);
                let pol = if p == OmcPolarization::Te { Polarization::TE } else { Polarization::TM };
                band_structure(cell, &material, &path, n_bands, cutoff, pol).map_err(fail)?
            }
        };
        write(out, Box::into_raw(Box::new(OmcBands(bands))), "out")
    })
}

/// # Safety
/// `bands` must be null or a handle from `omc_bands_compute` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn omc_bands_free(bands: *mut OmcBands) {
    if !bands.is_null() {
        drop(Box::from_raw(bands));
    }
}

/// Number of k-points and bands per k-point.
///
/// # Safety
/// `bands` must be a live handle; `n_k` and `n_bands` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn omc_bands_shape(bands: *const OmcBands, n_k: *mut usize, n_bands: *mut usize) -> OmcStatus {
    guard(|| {
        let b = &deref(bands, "bands")?.0;
        write(n_k, b.frequencies.len(), "n_k")?;
        write(n_bands, b.n_bands(), "n_bands")
    })
}

/// Copies normalized frequencies, k-major (`n_k × n_bands`), into `buf`.
///
/// # Safety
/// `bands` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn omc_bands_frequencies(bands: *const OmcBands, buf: *mut f64, len: usize) -> OmcStatus {
    guard(|| {
        let b = &deref(bands, "bands")?.0;
        let needed = b.frequencies.len() * b.n_bands();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < needed {
            return Err(fail(Error::InvalidInput(format!("buffer holds {len} values, {needed} needed"))));
        }
        for (i, v) in b.frequencies.iter().flatten().enumerate() {
            *buf.add(i) = *v;
        }
        Ok(())
    })
}

/// Physical units (THz or GHz) per normalized frequency unit.
///
/// # Safety
/// `bands` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn omc_bands_unit_scale(bands: *const OmcBands, out: *mut f64) -> OmcStatus {
    guard(|| write(out, deref(bands, "bands")?.0.unit_scale, "out"))
}

/// Widest gap of the band structure. Elastic bands report the complete gap
/// across all branches. Returns `NotFound` when there is none.
///
/// # Safety
/// `bands` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn omc_bands_widest_gap(bands: *const OmcBands, out: *mut OmcGap) -> OmcStatus {
    guard(|| {
        let b = &deref(bands, "bands")?.0;
        let report = match b.polarization {
            Polarization::Elastic => find_complete_gap(&[b]),
            _ => find_gaps(b, None),
        }
        .map_err(fail)?;
        let Some(g) = report.widest() else {
            set_error("no band gap among the computed bands");
            return Err(OmcStatus::NotFound);
        };
        write(
            out,
            OmcGap {
                lower_band: g.lower_band,
                lower_edge: g.lower_edge,
                upper_edge: g.upper_edge,
                gap_to_midgap: g.gap_to_midgap,
                lower_edge_physical: g.lower_edge_physical,
                upper_edge_physical: g.upper_edge_physical,
            },
            "out",
        )
    })
}

fn from_c(r: &OmcRates) -> EmitterRates {
    EmitterRates {
        g12: r.g12,
        g13: r.g13,
        g23: r.g23,
        kappa_eo: r.kappa_eo,
        kappa_em: r.kappa_em,
        kappa_io: r.kappa_io,
        kappa_im: r.kappa_im,
        gamma3: r.gamma3,
        gamma2: r.gamma2,
    }
}

/// Cavity-enhanced rates, β-factor and cooperativities. Infinite
/// cooperativities (zero loss) are returned as `INFINITY`.
///
/// # Safety
/// `rates` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn omc_effective_rates(rates: *const OmcRates, out: *mut OmcEffectiveRates) -> OmcStatus {
    guard(|| {
        let er = effective_rates(&from_c(deref(rates, "rates")?)).map_err(fail)?;
        write(
            out,
            OmcEffectiveRates {
                gamma12: er.gamma12,
                gamma13: er.gamma13,
                gamma23: er.gamma23,
                beta_cav: er.beta_cav,
                c_opt: er.c_opt,
                c_mech: er.c_mech,
            },
            "out",
        )
    })
}

/// Scattering amplitudes and probabilities at detuning `delta` for the
/// enhanced rates `gamma13`, `gamma23` and loss `gamma3`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn omc_scatter(
    delta: f64,
    gamma13: f64,
    gamma23: f64,
    gamma3: f64,
    out: *mut OmcScattering,
) -> OmcStatus {
    guard(|| {
        let er = EffectiveRates::from_optical(gamma13, gamma23, gamma3);
        let s = scatter(delta, &er, gamma3).map_err(fail)?;
        write(
            out,
            OmcScattering {
                t_elastic_re: s.t_elastic.re,
                t_elastic_im: s.t_elastic.im,
                t_raman_re: s.t_raman.re,
                t_raman_im: s.t_raman.im,
                p_success: s.p_success,
                p_elastic: s.p_elastic,
                p_loss: s.p_loss,
            },
            "out",
        )
    })
}

/// Success probability averaged over an incident spectrum of the given
/// shape, centre and width (same units as the rates).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn omc_wavepacket_success(
    shape: OmcShape,
    center: f64,
    width: f64,
    gamma13: f64,
    gamma23: f64,
    gamma3: f64,
    out: *mut f64,
) -> OmcStatus {
    guard(|| {
        let shape = match shape {
            OmcShape::Lorentzian => SpectralShape::Lorentzian,
            OmcShape::Gaussian => SpectralShape::Gaussian,
        };
        let er = EffectiveRates::from_optical(gamma13, gamma23, gamma3);
        let p = wavepacket_success(&SpectralDensity { shape, center, width }, &er, gamma3).map_err(fail)?;
        write(out, p, "out")
    })
}

/// Runs one CLI command (`"bands"`, `"defect"`, `"cascade"` or `"sweep"`)
/// on a JSON configuration string and writes its files to `out_dir`.
///
/// # Safety
/// `command`, `config_json` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn omc_run(
    command: *const c_char,
    config_json: *const c_char,
    out_dir: *const c_char,
    domain: OmcDomain,
) -> OmcStatus {
    guard(|| {
        let command = string(command, "command")?;
        let text = string(config_json, "config_json")?;
        let out_dir = Path::new(string(out_dir, "out_dir")?);
        let domain = match domain {
            OmcDomain::Photonic => Domain::Photonic,
            OmcDomain::Phononic => Domain::Phononic,
        };
        let config = RunConfig::from_json(text).map_err(fail)?;
        let mut out = OutputSet::new(out_dir).map_err(fail)?;
        match command {
            "bands" => cmd_bands(&config, domain, &mut out).map(drop),
            "defect" => cmd_defect(&config, domain, &mut out).map(drop),
            "cascade" => cmd_cascade(&config, &mut out).map(drop),
            "sweep" => serde_json::from_str(text)
                .map_err(|e| Error::Config(e.to_string()))
                .and_then(|raw| cmd_sweep(&raw, domain, &mut out).map(drop)),
            other => Err(Error::Config(format!("unknown command `{other}`"))),
        }
        .map_err(fail)?;
        out.write("config.json", text).map_err(fail)?;
        out.commit(out_dir).map(drop).map_err(fail)
    })
}
