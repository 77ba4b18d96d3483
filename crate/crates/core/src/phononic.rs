//! Plane-strain elastic bands of the shamrock membrane.
//!
//! Holes are modelled as a very soft, very light solid so that the
//! generalized problem `K u = ω² M u` stays positive definite. Operators
//! are assembled in SI units with `k` in units of `1/a`, so eigenvalues are
//! `ω² a²` in m²/s².

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{BandStructure, Polarization};
use crate::error::{Error, Result};
use crate::geometry::{FourierField, UnitCellGeometry, Vec2};
use crate::numerics::{hermitian_eigensolve, Eigenpairs, HermitianProblem, C64};
use crate::photonic::{eigen_to_freq, normalize};
use crate::pwe::PlaneWaveBasis;
use crate::symmetry::KPath;

pub use crate::bands::find_complete_gap;

/// Ratio of filler to solid properties used for the holes.
pub const DEFAULT_FILLER_RATIO: f64 = 1e-6;

pub type StiffnessTensor = [[[[f64; 2]; 2]; 2]; 2];

/// Cubic crystal cut in the (001) plane, with the cubic axes rotated by
/// `axis_rotation` radians about the membrane normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticMaterial {
    /// Elastic constants in Pa.
    pub c11: f64,
    pub c12: f64,
    pub c44: f64,
    /// Mass density in kg/m³.
    pub rho: f64,
    #[serde(default)]
    pub axis_rotation: f64,
    #[serde(default = "default_filler")]
    pub filler_stiffness_ratio: f64,
    #[serde(default = "default_filler")]
    pub filler_density_ratio: f64,
}

fn default_filler() -> f64 {
    DEFAULT_FILLER_RATIO
}

impl Default for ElasticMaterial {
    fn default() -> Self {
        Self::gaas()
    }
}

impl ElasticMaterial {
    /// Room-temperature GaAs.
    pub fn gaas() -> Self {
        Self {
            c11: 118.8e9,
            c12: 53.8e9,
            c44: 59.4e9,
            rho: 5317.0,
            axis_rotation: 0.0,
            filler_stiffness_ratio: DEFAULT_FILLER_RATIO,
            filler_density_ratio: DEFAULT_FILLER_RATIO,
        }
    }

    /// Isotropic solid from Lamé constants.
    pub fn isotropic(lambda: f64, mu: f64, rho: f64) -> Self {
        Self { c11: lambda + 2.0 * mu, c12: lambda, c44: mu, rho, ..Self::gaas() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.c11, self.c12, self.c44, self.rho, self.axis_rotation]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("elastic constants must be finite"));
        }
        if self.rho <= 0.0 {
            return Err(Error::invalid("density must be positive"));
        }
        // positive definiteness of the in-plane cubic tensor
        if self.c44 <= 0.0 || self.c11 <= self.c12.abs() {
            return Err(Error::invalid("elastic tensor is not positive definite (need c44 > 0, c11 > |c12|)"));
        }
        for (name, r) in [("stiffness", self.filler_stiffness_ratio), ("density", self.filler_density_ratio)] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::invalid(format!("filler {name} ratio must lie in (0, 1]")));
            }
        }
        Ok(())
    }

    /// Transverse sound speed `√(c44/ρ)` in m/s.
    pub fn transverse_velocity(&self) -> f64 {
        (self.c44 / self.rho).sqrt()
    }

    /// In-plane stiffness tensor `C_ijkl` (Pa) in the lab frame.
    pub fn tensor(&self) -> StiffnessTensor {
        let mut base = [[[[0.0; 2]; 2]; 2]; 2];
        base[0][0][0][0] = self.c11;
        base[1][1][1][1] = self.c11;
        base[0][0][1][1] = self.c12;
        base[1][1][0][0] = self.c12;
        for (i, j) in [(0, 1), (1, 0)] {
            base[i][j][i][j] = self.c44;
            base[i][j][j][i] = self.c44;
        }
        let (s, c) = self.axis_rotation.sin_cos();
        let r = [[c, -s], [s, c]];
        let mut out = [[[[0.0; 2]; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let mut acc = 0.0;
                        for a in 0..2 {
                            for b in 0..2 {
                                for p in 0..2 {
                                    for q in 0..2 {
                                        acc += r[i][a] * r[j][b] * r[k][p] * r[l][q] * base[a][b][p][q];
                                    }
                                }
                            }
                        }
                        out[i][j][k][l] = acc;
                    }
                }
            }
        }
        out
    }
}

/// Precomputed data for repeated elastic assembly on one cell.
#[derive(Debug, Clone)]
pub struct ElasticOperator {
    pub basis: PlaneWaveBasis,
    pub material: ElasticMaterial,
    reciprocal: [Vec2; 2],
    tensor: StiffnessTensor,
    stiffness: FourierField,
    density: FourierField,
    grid_density: Vec<f64>,
    cell: UnitCellGeometry,
}

impl ElasticOperator {
    pub fn new(cell: &UnitCellGeometry, material: &ElasticMaterial, cutoff: usize) -> Result<Self> {
        material.validate()?;
        let basis = PlaneWaveBasis::for_cell(cell, cutoff)?;
        let stiffness = basis.material_coefficients(cell, (1.0, material.filler_stiffness_ratio))?;
        let density = if material.filler_density_ratio == material.filler_stiffness_ratio {
            stiffness.clone()
        } else {
            basis.material_coefficients(cell, (1.0, material.filler_density_ratio))?
        };
        Ok(Self {
            basis,
            material: *material,
            reciprocal: cell.reciprocal(),
            tensor: material.tensor(),
            stiffness,
            density,
            grid_density: cell.mapped((1.0, material.filler_density_ratio)),
            cell: cell.clone(),
        })
    }

    pub fn cell(&self) -> &UnitCellGeometry {
        &self.cell
    }

    /// Dimension of the assembled problem (two displacement components per
    /// plane wave, ordered `[u_x block, u_y block]`).
    pub fn dim(&self) -> usize {
        2 * self.basis.len()
    }

    pub fn problem(&self, k: Vec2, n_wanted: usize) -> HermitianProblem {
        let q = self.basis.shifted_vectors(self.reciprocal, k);
        let idx = &self.basis.indices;
        let n = q.len();
        let c = &self.tensor;
        let comp = |v: Vec2, j: usize| if j == 0 { v.x } else { v.y };
        let kmat = Mat::<C64>::from_fn(2 * n, 2 * n, |r, s| {
            let (i, gr) = (r / n, r % n);
            let (l, gs) = (s / n, s % n);
            let (pr, qr) = idx[gr];
            let (ps, qs) = idx[gs];
            let mut acc = 0.0;
            for j in 0..2 {
                for kk in 0..2 {
                    acc += comp(q[gr], j) * c[i][j][kk][l] * comp(q[gs], kk);
                }
            }
            self.stiffness.get(pr - ps, qr - qs) * acc
        });
        let rho = self.material.rho;
        let mmat = Mat::<C64>::from_fn(2 * n, 2 * n, |r, s| {
            if r / n != s / n {
                return C64::new(0.0, 0.0);
            }
            let (pr, qr) = idx[r % n];
            let (ps, qs) = idx[s % n];
            self.density.get(pr - ps, qr - qs) * rho
        });
        HermitianProblem::generalized(kmat, mmat, n_wanted)
    }

    pub fn solve(&self, k: Vec2, n_wanted: usize, vectors: bool) -> Result<Eigenpairs> {
        let n_wanted = n_wanted.min(self.dim());
        hermitian_eigensolve(&self.problem(k, n_wanted).with_vectors(vectors))
    }

    /// Converts an eigenvalue `ω²a²` to the normalized frequency `ωa / (2π v_t)`.
    pub fn normalized(&self, lambda: f64) -> f64 {
        eigen_to_freq(lambda) / (2.0 * PI * self.material.transverse_velocity())
    }

    pub fn frequencies(&self, k: Vec2, n_bands: usize) -> Result<Vec<f64>> {
        Ok(self.solve(k, n_bands, false)?.values.into_iter().map(|l| self.normalized(l)).collect())
    }

    /// Kinetic energy density `ρ|u|²` of an eigenvector, normalized to unit sum.
    pub fn energy_density(&self, coefficients: &[C64]) -> Vec<f64> {
        let n = self.basis.len();
        let ux = self.basis.synthesize(&self.cell, coefficients[..n].iter().copied());
        let uy = self.basis.synthesize(&self.cell, coefficients[n..].iter().copied());
        normalize(
            ux.iter()
                .zip(&uy)
                .zip(&self.grid_density)
                .map(|((x, y), r)| r * (x.norm_sqr() + y.norm_sqr()))
                .collect(),
        )
    }
}

/// Assembles the generalized elastic eigenproblem at `k` for one cell.
pub fn assemble_elastic_operator(
    cell: &UnitCellGeometry,
    material: &ElasticMaterial,
    k: Vec2,
    cutoff: usize,
) -> Result<HermitianProblem> {
    let op = ElasticOperator::new(cell, material, cutoff)?;
    let n = op.dim();
    Ok(op.problem(k, n))
}

/// Physical frequency in GHz of one normalized unit for lattice constant `a` (m).
pub fn ghz_per_unit(material: &ElasticMaterial, a: f64) -> f64 {
    material.transverse_velocity() / a / 1e9
}

/// In-plane elastic bands along `kpath`.
pub fn elastic_band_structure(
    cell: &UnitCellGeometry,
    material: &ElasticMaterial,
    kpath: &KPath,
    n_bands: usize,
    cutoff: usize,
) -> Result<BandStructure> {
    if n_bands == 0 {
        return Err(Error::invalid("n_bands must be at least 1"));
    }
    let op = ElasticOperator::new(cell, material, cutoff)?;
    operator_bands(&op, kpath, n_bands)
}

pub(crate) fn operator_bands(op: &ElasticOperator, kpath: &KPath, n_bands: usize) -> Result<BandStructure> {
    let frequencies = kpath
        .points
        .par_iter()
        .map(|&k| op.frequencies(k, n_bands))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure {
        kpath: kpath.clone(),
        frequencies,
        polarization: Polarization::Elastic,
        light_line: None,
        unit_scale: ghz_per_unit(&op.material, op.cell.lattice.a),
        notes: vec![format!(
            "plane-strain in-plane model; holes filled with a solid {:.0e} times softer and lighter",
            op.material.filler_stiffness_ratio
        )],
    })
}
