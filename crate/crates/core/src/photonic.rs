//! 2D plane-wave photonic bands of the shamrock membrane.
//!
//! The finite-thickness slab is reduced to 2D by replacing the bulk index
//! with the effective index of the fundamental guided slab mode, evaluated
//! once at a target frequency. TE uses the `H_z` formulation with an inverse
//! permittivity operator; TM uses `E_z` with the coefficients of `ε`.

use std::f64::consts::PI;

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{BandStructure, Polarization};
use crate::error::{Error, Result};
use crate::geometry::{FourierField, UnitCellGeometry, Vec2};
use crate::numerics::{bracketed_root, hermitian_eigensolve, Eigenpairs, HermitianProblem, C64};
use crate::pwe::PlaneWaveBasis;
use crate::symmetry::KPath;

pub use crate::bands::{find_gaps, Gap, GapReport};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Refractive index of GaAs at 4 K.
pub const GAAS_INDEX: f64 = 3.48;
/// Default effective-index target wavelength (m), near the middle of the
/// reference design's TE gap.
pub const DEFAULT_TARGET_WAVELENGTH: f64 = 870e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonicMaterial {
    pub n_bulk: f64,
    pub d_over_a: f64,
    /// Normalized frequency `a/λ` at which the slab effective index is evaluated.
    pub target_freq: f64,
    /// When false the bulk index is used directly (no slab correction).
    pub slab_correction: bool,
    pub rule: DielectricRule,
}

impl PhotonicMaterial {
    pub fn new(n_bulk: f64, d_over_a: f64, target_freq: f64) -> Self {
        Self { n_bulk, d_over_a, target_freq, slab_correction: true, rule: DielectricRule::InverseMatrix }
    }

    /// GaAs membrane of the reference design (`d = 0.65a`, `a = 300 nm`).
    pub fn reference() -> Self {
        Self::new(GAAS_INDEX, 0.65, 300e-9 / DEFAULT_TARGET_WAVELENGTH)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_bulk > 1.0 && self.n_bulk.is_finite()) {
            return Err(Error::invalid("refractive index must exceed 1"));
        }
        if !(self.d_over_a > 0.0 && self.d_over_a.is_finite()) {
            return Err(Error::invalid("slab thickness ratio must be positive"));
        }
        if !(self.target_freq > 0.0 && self.target_freq.is_finite()) {
            return Err(Error::invalid("effective-index target frequency must be positive"));
        }
        Ok(())
    }

    /// Index used for the solid in the 2D model, and whether it fell back to
    /// the bulk value because no guided slab mode was found.
    pub fn solid_index(&self, polarization: Polarization) -> Result<(f64, bool)> {
        self.validate()?;
        if !self.slab_correction {
            return Ok((self.n_bulk, false));
        }
        match effective_index(self, self.target_freq, polarization) {
            Ok(n) => Ok((n, false)),
            Err(Error::Numerical(msg)) => {
                log::warn!("no guided slab mode ({msg}); using the bulk index");
                Ok((self.n_bulk, true))
            }
            Err(e) => Err(e),
        }
    }
}

/// Residual of the even-mode dispersion relation of a symmetric air-clad
/// slab, written without the tangent singularity. Lengths in units of `a`.
pub fn slab_dispersion_residual(
    n_eff: f64,
    n_bulk: f64,
    d_over_a: f64,
    freq: f64,
    polarization: Polarization,
) -> f64 {
    let k0 = 2.0 * PI * freq;
    let kappa = k0 * (n_bulk * n_bulk - n_eff * n_eff).max(0.0).sqrt();
    let gamma = k0 * (n_eff * n_eff - 1.0).max(0.0).sqrt();
    let u = 0.5 * kappa * d_over_a;
    let weight = match polarization {
        Polarization::TM => 1.0 / (n_bulk * n_bulk),
        _ => 1.0,
    };
    weight * kappa * u.sin() - gamma * u.cos()
}

/// Effective index of the fundamental guided mode of the slab at the
/// normalized frequency `a/λ`. TE-like 2D bands use the slab TE mode and TM
/// the slab TM mode.
pub fn effective_index(material: &PhotonicMaterial, target_freq: f64, polarization: Polarization) -> Result<f64> {
    if polarization == Polarization::Elastic {
        return Err(Error::invalid("effective index is defined for optical polarizations only"));
    }
    if !(target_freq > 0.0 && target_freq.is_finite()) {
        return Err(Error::invalid("target frequency must be positive"));
    }
    let (n, d) = (material.n_bulk, material.d_over_a);
    let k0 = 2.0 * PI * target_freq;
    let half = 0.5 * d;
    let v = k0 * half * (n * n - 1.0).sqrt();
    // lower bracket: either the cladding index or the point where u = π/2
    let lower = if v > PI / 2.0 {
        let kappa = PI / (2.0 * half);
        (n * n - (kappa / k0).powi(2)).sqrt()
    } else {
        1.0
    };
    let f = |x: f64| slab_dispersion_residual(x, n, d, target_freq, polarization);
    let root = bracketed_root(f, lower, n, 1e-15)?;
    if !(root > 1.0 && root < n) {
        return Err(Error::numerical(format!("effective index {root} outside (1, {n})")));
    }
    Ok(root)
}

/// How the TE inverse-permittivity operator is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DielectricRule {
    /// Inverse of the truncated Toeplitz matrix of `ε`.
    #[default]
    InverseMatrix,
    /// Toeplitz matrix of the Fourier coefficients of `1/ε`.
    InverseField,
}

/// Precomputed material data for repeated TE/TM assembly on one cell.
#[derive(Debug, Clone)]
pub struct PhotonicOperator {
    pub basis: PlaneWaveBasis,
    pub polarization: Polarization,
    pub n_solid: f64,
    pub index_fallback: bool,
    reciprocal: [Vec2; 2],
    coefficients: FourierField,
    /// Dense `η_GG'` for TE.
    eta: Option<Mat<C64>>,
    /// `1/ε` (TE) or `ε` (TM) on the grid, for energy densities.
    grid_material: Vec<f64>,
    cell: UnitCellGeometry,
}

impl PhotonicOperator {
    pub fn new(
        cell: &UnitCellGeometry,
        material: &PhotonicMaterial,
        cutoff: usize,
        polarization: Polarization,
    ) -> Result<Self> {
        let (n_solid, fallback) = material.solid_index(polarization)?;
        Self::with_index(cell, n_solid, cutoff, polarization, material.rule).map(|mut op| {
            op.index_fallback = fallback;
            op
        })
    }

    /// Operator for a solid of index `n_solid` with air holes.
    pub fn with_index(
        cell: &UnitCellGeometry,
        n_solid: f64,
        cutoff: usize,
        polarization: Polarization,
        rule: DielectricRule,
    ) -> Result<Self> {
        if polarization == Polarization::Elastic {
            return Err(Error::invalid("photonic operator needs TE or TM polarization"));
        }
        if !(n_solid >= 1.0 && n_solid.is_finite()) {
            return Err(Error::invalid("solid index must be at least 1"));
        }
        let basis = PlaneWaveBasis::for_cell(cell, cutoff)?;
        let eps = n_solid * n_solid;
        let (values, field_values) = match (polarization, rule) {
            (Polarization::TE, DielectricRule::InverseMatrix) => ((1.0 / eps, 1.0), (eps, 1.0)),
            (Polarization::TE, DielectricRule::InverseField) => ((1.0 / eps, 1.0), (1.0 / eps, 1.0)),
            _ => ((eps, 1.0), (eps, 1.0)),
        };
        let coefficients = basis.material_coefficients(cell, field_values)?;
        let eta = match polarization {
            Polarization::TE => {
                let toeplitz = toeplitz(&basis, &coefficients);
                Some(match rule {
                    DielectricRule::InverseField => toeplitz,
                    DielectricRule::InverseMatrix => hermitian_inverse(&toeplitz)?,
                })
            }
            _ => None,
        };
        Ok(Self {
            eta,
            basis,
            polarization,
            n_solid,
            index_fallback: false,
            reciprocal: cell.reciprocal(),
            grid_material: cell.mapped(values),
            coefficients,
            cell: cell.clone(),
        })
    }

    pub fn cell(&self) -> &UnitCellGeometry {
        &self.cell
    }

    /// Eigenproblem at Bloch vector `k` (units of `1/a`) whose eigenvalues
    /// are `(ωa/2πc)²`.
    pub fn problem(&self, k: Vec2, n_wanted: usize) -> HermitianProblem {
        let q = self.basis.shifted_vectors(self.reciprocal, k);
        let idx = &self.basis.indices;
        let n = q.len();
        let scale = 1.0 / (4.0 * PI * PI);
        match self.polarization {
            Polarization::TE => {
                let eta = self.eta.as_ref().expect("TE operator carries η");
                let a = Mat::<C64>::from_fn(n, n, |r, c| eta[(r, c)] * (q[r].dot(q[c]) * scale));
                HermitianProblem::standard(a, n_wanted)
            }
            _ => {
                let a = Mat::<C64>::from_fn(n, n, |r, c| {
                    if r == c {
                        C64::new(q[r].dot(q[r]) * scale, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let b = Mat::<C64>::from_fn(n, n, |r, c| {
                    let (pr, qr) = idx[r];
                    let (pc, qc) = idx[c];
                    self.coefficients.get(pr - pc, qr - qc)
                });
                HermitianProblem::generalized(a, b, n_wanted)
            }
        }
    }

    pub fn solve(&self, k: Vec2, n_wanted: usize, vectors: bool) -> Result<Eigenpairs> {
        let n_wanted = n_wanted.min(self.basis.len());
        hermitian_eigensolve(&self.problem(k, n_wanted).with_vectors(vectors))
    }

    /// Normalized frequencies at `k`.
    pub fn frequencies(&self, k: Vec2, n_bands: usize) -> Result<Vec<f64>> {
        Ok(self.solve(k, n_bands, false)?.values.into_iter().map(eigen_to_freq).collect())
    }

    /// Electric energy density `ε|E|²` of an eigenvector on the cell grid,
    /// normalized to unit sum.
    pub fn energy_density(&self, k: Vec2, coefficients: &[C64]) -> Vec<f64> {
        let density: Vec<f64> = match self.polarization {
            Polarization::TE => {
                let q = self.basis.shifted_vectors(self.reciprocal, k);
                let i = C64::new(0.0, 1.0);
                let gx = self.basis.synthesize(&self.cell, coefficients.iter().zip(&q).map(|(c, q)| c * i * q.x));
                let gy = self.basis.synthesize(&self.cell, coefficients.iter().zip(&q).map(|(c, q)| c * i * q.y));
                gx.iter()
                    .zip(&gy)
                    .zip(&self.grid_material)
                    .map(|((x, y), eta)| eta * (x.norm_sqr() + y.norm_sqr()))
                    .collect()
            }
            _ => {
                let e = self.basis.synthesize(&self.cell, coefficients.iter().copied());
                e.iter().zip(&self.grid_material).map(|(e, eps)| eps * e.norm_sqr()).collect()
            }
        };
        normalize(density)
    }
}

fn toeplitz(basis: &PlaneWaveBasis, field: &FourierField) -> Mat<C64> {
    let idx = &basis.indices;
    Mat::from_fn(idx.len(), idx.len(), |r, c| field.get(idx[r].0 - idx[c].0, idx[r].1 - idx[c].1))
}

/// Inverse of a Hermitian positive-definite matrix via `L⁻† L⁻¹`, made
/// exactly Hermitian.
fn hermitian_inverse(m: &Mat<C64>) -> Result<Mat<C64>> {
    let n = m.nrows();
    let l = m
        .llt(Side::Lower)
        .map_err(|_| Error::numerical("permittivity matrix is not positive definite"))?
        .L()
        .to_owned();
    let mut x = Mat::<C64>::identity(n, n);
    l.solve_lower_triangular_in_place(x.as_mut());
    let inv = x.adjoint() * &x;
    Ok(Mat::from_fn(n, n, |r, c| (inv[(r, c)] + inv[(c, r)].conj()) * 0.5))
}

pub(crate) fn normalize(mut density: Vec<f64>) -> Vec<f64> {
    let total: f64 = density.iter().sum();
    if total > 0.0 {
        density.iter_mut().for_each(|x| *x /= total);
    }
    density
}

pub(crate) fn eigen_to_freq(lambda: f64) -> f64 {
    lambda.max(0.0).sqrt()
}

/// Assembles the photonic eigenproblem at `k` for one cell.
pub fn assemble_photonic_operator(
    cell: &UnitCellGeometry,
    material: &PhotonicMaterial,
    k: Vec2,
    cutoff: usize,
    polarization: Polarization,
) -> Result<HermitianProblem> {
    let op = PhotonicOperator::new(cell, material, cutoff, polarization)?;
    let n = op.basis.len();
    Ok(op.problem(k, n))
}

/// Physical frequency in THz of one normalized unit `ωa/2πc`.
pub fn thz_per_unit(a: f64) -> f64 {
    SPEED_OF_LIGHT / a / 1e12
}

/// Bands along `kpath` with k-points solved concurrently.
pub fn band_structure(
    cell: &UnitCellGeometry,
    material: &PhotonicMaterial,
    kpath: &KPath,
    n_bands: usize,
    cutoff: usize,
    polarization: Polarization,
) -> Result<BandStructure> {
    if n_bands == 0 {
        return Err(Error::invalid("n_bands must be at least 1"));
    }
    let op = PhotonicOperator::new(cell, material, cutoff, polarization)?;
    let mut bs = operator_bands(&op, kpath, n_bands)?;
    bs.unit_scale = thz_per_unit(cell.lattice.a);
    bs.notes.push(format!(
        "2D effective-index approximation of the membrane: n_eff = {:.6} evaluated at a/lambda = {:.6}{}",
        op.n_solid,
        material.target_freq,
        if op.index_fallback { " (no guided slab mode; bulk index used)" } else { "" }
    ));
    Ok(bs)
}

pub(crate) fn operator_bands(op: &PhotonicOperator, kpath: &KPath, n_bands: usize) -> Result<BandStructure> {
    let frequencies = kpath
        .points
        .par_iter()
        .map(|&k| op.frequencies(k, n_bands))
        .collect::<Result<Vec<_>>>()?;
    let light_line = kpath.points.iter().map(|k| k.norm() / (2.0 * PI)).collect();
    Ok(BandStructure {
        kpath: kpath.clone(),
        frequencies,
        polarization: op.polarization,
        light_line: Some(light_line),
        unit_scale: thz_per_unit(op.cell.lattice.a),
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_unit_cell, LatticeSpec, ShamrockHole};
    use crate::numerics::hermiticity_residual;

    fn lattice() -> LatticeSpec {
        LatticeSpec::hexagonal(300e-9, 195e-9).unwrap()
    }

    #[test]
    fn thick_slab_approaches_bulk_index() {
        let m = PhotonicMaterial::new(3.48, 100.0, 0.344);
        let n = effective_index(&m, 0.344, Polarization::TE).unwrap();
        assert!((n - 3.48).abs() < 1e-3, "{n}");
    }

    #[test]
    fn thin_slab_approaches_cladding_index() {
        let m = PhotonicMaterial::new(3.48, 1e-3, 0.344);
        let n = effective_index(&m, 0.344, Polarization::TE).unwrap();
        assert!((n - 1.0).abs() < 1e-3, "{n}");
    }

    #[test]
    fn tm_index_is_below_te_index() {
        let m = PhotonicMaterial::reference();
        let te = effective_index(&m, m.target_freq, Polarization::TE).unwrap();
        let tm = effective_index(&m, m.target_freq, Polarization::TM).unwrap();
        assert!(tm < te);
        assert!(effective_index(&m, -1.0, Polarization::TE).is_err());
    }

    #[test]
    fn assembled_operators_are_hermitian() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::reference(), 64).unwrap();
        let k = Vec2::new(0.7, -0.3);
        for pol in [Polarization::TE, Polarization::TM] {
            let p = assemble_photonic_operator(&cell, &PhotonicMaterial::reference(), k, 3, pol).unwrap();
            assert!(hermiticity_residual(&p.matrix_a) < 1e-10);
            if let Some(b) = &p.matrix_b {
                assert!(hermiticity_residual(b) < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_elastic_polarization() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::none(), 32).unwrap();
        assert!(PhotonicOperator::with_index(&cell, 2.0, 2, Polarization::Elastic, DielectricRule::default()).is_err());
    }

    #[test]
    fn lowest_band_vanishes_at_gamma() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::reference(), 64).unwrap();
        let op = PhotonicOperator::new(&cell, &PhotonicMaterial::reference(), 3, Polarization::TE).unwrap();
        let f = op.frequencies(Vec2::default(), 3).unwrap();
        assert!(f[0].abs() < 1e-7);
    }
}
