//! Λ-system photon–phonon cascade: cavity-enhanced rates, regime checks,
//! single-frequency scattering amplitudes and wavepacket averages.
//!
//! All rates and detunings are angular frequencies in a common unit; only
//! their ratios matter.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::adaptive_integrate;
use crate::plot::{self, Series};

/// Default factor standing in for "much greater than".
pub const DEFAULT_REGIME_FACTOR: f64 = 10.0;
/// β-factors of the reference detuning family.
pub const REFERENCE_BETAS: [f64; 4] = [1.0, 0.98, 0.9, 0.8];
/// Label attached to the phonon-branch efficiency estimate.
pub const PHONON_BRANCH_LABEL: &str = "model extrapolation: C_mech/(1+C_mech)";

/// Emitter–cavity couplings and loss rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterRates {
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

impl EmitterRates {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("g12", self.g12),
            ("g13", self.g13),
            ("g23", self.g23),
            ("kappa_eo", self.kappa_eo),
            ("kappa_em", self.kappa_em),
            ("kappa_io", self.kappa_io),
            ("kappa_im", self.kappa_im),
            ("gamma3", self.gamma3),
            ("gamma2", self.gamma2),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if self.kappa_eo <= 0.0 || self.kappa_em <= 0.0 {
            return Err(Error::invalid("kappa_eo and kappa_em must be positive"));
        }
        Ok(())
    }

    /// Scales every rate by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            g12: self.g12 * s,
            g13: self.g13 * s,
            g23: self.g23 * s,
            kappa_eo: self.kappa_eo * s,
            kappa_em: self.kappa_em * s,
            kappa_io: self.kappa_io * s,
            kappa_im: self.kappa_im * s,
            gamma3: self.gamma3 * s,
            gamma2: self.gamma2 * s,
        }
    }
}

/// Cavity-enhanced decay rates and figures of merit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    #[serde(rename = "Gamma12")]
    pub gamma12: f64,
    #[serde(rename = "Gamma13")]
    pub gamma13: f64,
    #[serde(rename = "Gamma23")]
    pub gamma23: f64,
    pub beta_cav: f64,
    /// `f64::INFINITY` when `gamma3 = 0`; serialized as `null`.
    #[serde(rename = "C_opt")]
    pub c_opt: f64,
    #[serde(rename = "C_mech")]
    pub c_mech: f64,
}

impl EffectiveRates {
    /// Rates with `Γ13`, `Γ23` given directly (`Γ12` and `C_mech` unset).
    pub fn from_optical(gamma13: f64, gamma23: f64, gamma3: f64) -> Self {
        Self {
            gamma12: 0.0,
            gamma13,
            gamma23,
            beta_cav: beta(gamma13 + gamma23, gamma3),
            c_opt: f64::NAN,
            c_mech: f64::NAN,
        }
    }

    /// Equal enhanced rates `Γ13 = Γ23 = 1/2` with `γ3` chosen to give `beta`.
    pub fn matched_with_beta(beta: f64) -> Result<(Self, f64)> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1], got {beta}")));
        }
        let gamma3 = (1.0 - beta) / beta;
        Ok((Self::from_optical(0.5, 0.5, gamma3), gamma3))
    }

    /// Total linewidth `Γ13 + Γ23 + γ3` (FWHM of the Raman probability).
    pub fn linewidth(&self, gamma3: f64) -> f64 {
        self.gamma13 + self.gamma23 + gamma3
    }

    /// Phonon emission efficiency estimate; see [`PHONON_BRANCH_LABEL`].
    pub fn phonon_branch_efficiency(&self) -> f64 {
        if self.c_mech.is_infinite() {
            1.0
        } else {
            self.c_mech / (1.0 + self.c_mech)
        }
    }
}

fn beta(enhanced: f64, gamma3: f64) -> f64 {
    if gamma3 == 0.0 {
        if enhanced > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        enhanced / (enhanced + gamma3)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        num / den
    }
}

pub fn effective_rates(r: &EmitterRates) -> Result<EffectiveRates> {
    r.validate()?;
    let gamma12 = 2.0 * r.g12 * r.g12 / r.kappa_em;
    let gamma13 = 2.0 * r.g13 * r.g13 / r.kappa_eo;
    let gamma23 = 2.0 * r.g23 * r.g23 / r.kappa_eo;
    Ok(EffectiveRates {
        gamma12,
        gamma13,
        gamma23,
        beta_cav: beta(gamma13 + gamma23, r.gamma3),
        c_opt: ratio(4.0 * (r.g13 * r.g13 + r.g23 * r.g23), r.kappa_eo * r.gamma3),
        c_mech: ratio(2.0 * r.g12 * r.g12, r.kappa_em * r.gamma2),
    })
}

/// One "≫" comparison: `margin = value / (factor * reference)`, passing
/// when `margin >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub passed: bool,
    pub margin: f64,
}

impl RegimeCheck {
    fn new(value: f64, reference: f64, factor: f64) -> Self {
        let margin = ratio(value, factor * reference);
        Self { passed: margin >= 1.0, margin }
    }

    fn all(checks: &[RegimeCheck]) -> Self {
        let margin = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        Self { passed: checks.iter().all(|c| c.passed), margin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub factor: f64,
    pub over_coupled_optical: RegimeCheck,
    pub over_coupled_mechanical: RegimeCheck,
    pub bad_cavity: RegimeCheck,
    pub large_cooperativity_optical: RegimeCheck,
    pub large_cooperativity_mechanical: RegimeCheck,
    pub all_passed: bool,
}

/// Checks the over-coupled, bad-cavity and large-cooperativity conditions
/// with "≫" read as "at least `factor` times". Never fails.
pub fn validate_regime(r: &EmitterRates, factor: f64) -> RegimeReport {
    let c_opt = ratio(4.0 * (r.g13 * r.g13 + r.g23 * r.g23), r.kappa_eo * r.gamma3);
    let c_mech = ratio(2.0 * r.g12 * r.g12, r.kappa_em * r.gamma2);
    let over_coupled_optical = RegimeCheck::new(r.kappa_eo, r.kappa_io, factor);
    let over_coupled_mechanical = RegimeCheck::new(r.kappa_em, r.kappa_im, factor);
    let bad_cavity = RegimeCheck::all(&[
        RegimeCheck::new(r.kappa_eo, r.g13, factor),
        RegimeCheck::new(r.kappa_eo, r.g23, factor),
        RegimeCheck::new(r.kappa_em, r.g12, factor),
    ]);
    let large_cooperativity_optical = RegimeCheck::new(c_opt, 1.0, factor);
    let large_cooperativity_mechanical = RegimeCheck::new(c_mech, 1.0, factor);
    let all_passed = [
        over_coupled_optical,
        over_coupled_mechanical,
        bad_cavity,
        large_cooperativity_optical,
        large_cooperativity_mechanical,
    ]
    .iter()
    .all(|c| c.passed);
    RegimeReport {
        factor,
        over_coupled_optical,
        over_coupled_mechanical,
        bad_cavity,
        large_cooperativity_optical,
        large_cooperativity_mechanical,
        all_passed,
    }
}

fn denominator(delta: f64, er: &EffectiveRates, gamma3: f64) -> Result<Complex64> {
    let d = Complex64::new(delta, 0.5 * (er.gamma13 + er.gamma23 + gamma3));
    if d.norm() == 0.0 {
        return Err(Error::invalid("no emitter: zero detuning with zero total decay rate"));
    }
    Ok(d)
}

/// Elastic (trigger-transition) scattering amplitude.
pub fn t_elastic(delta: f64, er: &EffectiveRates, gamma3: f64) -> Result<Complex64> {
    let num = Complex64::new(delta, -0.5 * (er.gamma13 - er.gamma23 - gamma3));
    Ok(num / denominator(delta, er, gamma3)?)
}

/// Raman (cascade) scattering amplitude into the `|3⟩ → |2⟩` channel.
pub fn t_raman(delta: f64, er: &EffectiveRates, gamma3: f64) -> Result<Complex64> {
    let num = Complex64::new(0.0, -(er.gamma13 * er.gamma23).sqrt());
    Ok(num / denominator(delta, er, gamma3)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub delta: f64,
    pub t_elastic: Complex64,
    pub t_raman: Complex64,
    pub p_success: f64,
    pub p_elastic: f64,
    pub p_loss: f64,
}

pub fn scatter(delta: f64, er: &EffectiveRates, gamma3: f64) -> Result<ScatteringResult> {
    let te = t_elastic(delta, er, gamma3)?;
    let tr = t_raman(delta, er, gamma3)?;
    let (p_success, p_elastic) = (tr.norm_sqr(), te.norm_sqr());
    Ok(ScatteringResult { delta, t_elastic: te, t_raman: tr, p_success, p_elastic, p_loss: 1.0 - p_success - p_elastic })
}

/// Success probability sampled on `n_samples` evenly spaced detunings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub linewidth: f64,
    pub beta_cav: f64,
    pub samples: Vec<ScatteringResult>,
}

impl SuccessCurve {
    /// CSV with columns `delta_over_linewidth,p_success,p_elastic,p_loss`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_over_linewidth,p_success,p_elastic,p_loss\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{},{}\n", s.delta / self.linewidth, s.p_success, s.p_elastic, s.p_loss));
        }
        out
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.p_success).fold(0.0, f64::max)
    }
}

pub fn success_curve(er: &EffectiveRates, gamma3: f64, delta_range: (f64, f64), n_samples: usize) -> Result<SuccessCurve> {
    if n_samples < 2 {
        return Err(Error::invalid("a success curve needs at least two samples"));
    }
    let (lo, hi) = delta_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("detuning range must be finite with lo < hi"));
    }
    let linewidth = er.linewidth(gamma3);
    if linewidth <= 0.0 {
        return Err(Error::invalid("total linewidth must be positive"));
    }
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|i| scatter(lo + (hi - lo) * i as f64 / (n_samples - 1) as f64, er, gamma3))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuccessCurve { linewidth, beta_cav: beta(er.gamma13 + er.gamma23, gamma3), samples })
}

/// Curves for equal enhanced rates at each β, over `±span` linewidths.
pub fn beta_family(betas: &[f64], span: f64, n_samples: usize) -> Result<Vec<SuccessCurve>> {
    betas
        .iter()
        .map(|&b| {
            let (er, gamma3) = EffectiveRates::matched_with_beta(b)?;
            let lw = er.linewidth(gamma3);
            success_curve(&er, gamma3, (-span * lw, span * lw), n_samples)
        })
        .collect()
}

/// Success probability versus detuning, one line per curve.
pub fn family_svg(curves: &[SuccessCurve]) -> String {
    let xs: Vec<Vec<f64>> = curves.iter().map(|c| c.samples.iter().map(|s| s.delta / c.linewidth).collect()).collect();
    let ys: Vec<Vec<f64>> = curves.iter().map(|c| c.samples.iter().map(|s| s.p_success).collect()).collect();
    let labels: Vec<String> = curves.iter().map(|c| format!("beta = {}", c.beta_cav)).collect();
    let series: Vec<Series> = (0..curves.len())
        .map(|i| Series { label: &labels[i], x: &xs[i], y: &ys[i], dashed: false })
        .collect();
    plot::line_plot(
        "Photon-phonon pair success probability",
        "detuning / (Gamma13 + Gamma23 + gamma3)",
        "success probability",
        &series,
        &[],
        &[],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralShape {
    Lorentzian,
    Gaussian,
}

/// Normalized spectral density of the incident photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralDensity {
    pub shape: SpectralShape,
    /// Centre detuning.
    pub center: f64,
    /// Full width at half maximum.
    pub width: f64,
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid(format!("spectral width must be positive, got {}", self.width)));
        }
        if !self.center.is_finite() {
            return Err(Error::invalid("spectral centre must be finite"));
        }
        Ok(())
    }

    pub fn density(&self, delta: f64) -> f64 {
        let x = delta - self.center;
        match self.shape {
            SpectralShape::Lorentzian => {
                let hw = 0.5 * self.width;
                hw / (PI * (x * x + hw * hw))
            }
            SpectralShape::Gaussian => {
                let sigma = self.width / (2.0 * (2.0 * LN_2).sqrt());
                (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
            }
        }
    }
}

/// `∫ |t_raman(Δ)|² S(Δ) dΔ`, integrated over the real line after the
/// substitution `Δ = centre + s·tan θ`.
pub fn wavepacket_success(spec: &SpectralDensity, er: &EffectiveRates, gamma3: f64) -> Result<f64> {
    spec.validate()?;
    let lw = er.linewidth(gamma3);
    if lw <= 0.0 {
        return Err(Error::invalid("total linewidth must be positive"));
    }
    let s = spec.width.min(lw);
    let num = er.gamma13 * er.gamma23;
    let hw = 0.5 * lw;
    let integrand = |theta: f64| {
        let t = theta.tan();
        let delta = spec.center + s * t;
        let p = num / (delta * delta + hw * hw);
        p * spec.density(delta) * s * (1.0 + t * t)
    };
    // resolve the emitter line and the photon line separately
    let points = [-hw, 0.0, hw, spec.center - spec.width, spec.center, spec.center + spec.width];
    let breaks: Vec<f64> = points.iter().map(|d| ((d - spec.center) / s).atan()).collect();
    let edge = FRAC_PI_2 * (1.0 - 1e-15);
    // near ±π/2 the angle only resolves t to ~1e-10 relative, so ask for no more
    adaptive_integrate(integrand, -edge, edge, &breaks, 1e-10, 1e-300)
}

/// Closed form of [`wavepacket_success`] for a Lorentzian photon.
pub fn lorentzian_overlap(spec: &SpectralDensity, er: &EffectiveRates, gamma3: f64) -> f64 {
    let a = 0.5 * er.linewidth(gamma3);
    let b = 0.5 * spec.width;
    er.gamma13 * er.gamma23 * (a + b) / (a * (spec.center * spec.center + (a + b) * (a + b)))
}
