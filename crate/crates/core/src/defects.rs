//! Line-defect waveguides and heterostructure cavities in supercells.
//!
//! The guide axis runs along `a1 = x̂`. Rows of holes are indexed by
//! `j ∈ [-h, h]` with row 0 on the axis; a supercell spans `2h + 1` rows
//! and is periodic along the axis. Removing row 0 and pulling the two
//! halves together gives the `W` waveguides (row spacing `√3·W` across the
//! guide); the outer cell edge is shortened by the same amount so the
//! crystal outside stays seamless.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{find_gaps, BandStructure, Gap, Polarization};
use crate::error::{Error, Result};
use crate::geometry::{rasterize, HoleShape, PlacedHole, UnitCellGeometry, Vec2};
use crate::numerics::{hermitian_eigensolve, hermitian_eigensolve_interior, hermitian_eigensolve_window, Eigenpairs, HermitianProblem, C64};
use crate::phononic::{ElasticMaterial, ElasticOperator};
use crate::photonic::{PhotonicMaterial, PhotonicOperator};
use crate::plot;
use crate::symmetry::{irbz_path, KPath};

pub const DEFAULT_N_TRANSVERSE: usize = 11;
/// Plane-wave shell index per primitive cell for waveguide supercells.
pub const DEFAULT_WAVEGUIDE_CUTOFF: usize = 3;
/// Plane-wave shell index per primitive cell for cavity supercells.
pub const DEFAULT_CAVITY_CUTOFF: usize = 3;
pub const DEFAULT_MIRROR_PERIODS: usize = 4;
/// Minimum energy fraction in the defect strip for a guided mode.
pub const GUIDED_LOCALIZATION: f64 = 0.6;
/// Localization a cavity mode must exceed to count as confined.
pub const CAVITY_LOCALIZATION: f64 = 0.7;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    /// Row 0 replaced by circular holes.
    CircularHoleRow,
    /// Row 0 removed and the row spacing across the guide set to `√3·W`.
    RemovedRowW,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSpec {
    pub kind: DefectKind,
    #[serde(rename = "W", default = "one")]
    pub w: f64,
    /// Circle radius in units of `a`; `None` matches the shamrock hole area.
    #[serde(default)]
    pub circle_radius: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl DefectSpec {
    pub fn removed_row(w: f64) -> Self {
        Self { kind: DefectKind::RemovedRowW, w, circle_radius: None }
    }

    pub fn circular_row(radius: Option<f64>) -> Self {
        Self { kind: DefectKind::CircularHoleRow, w: 1.0, circle_radius: radius }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0 && self.w <= 1.0) {
            return Err(Error::invalid(format!("waveguide width W = {} must lie in (0, 1]", self.w)));
        }
        if let Some(r) = self.circle_radius {
            if !(r > 0.0 && r < 0.5) {
                return Err(Error::invalid(format!("circle radius {r} must lie in (0, 0.5)")));
            }
        }
        Ok(())
    }

    /// Width parameter governing the row shift (1 for circular rows).
    fn shift_w(&self) -> f64 {
        match self.kind {
            DefectKind::RemovedRowW => self.w,
            DefectKind::CircularHoleRow => 1.0,
        }
    }
}

/// A waveguide cavity: a core section of width `core_w` between two mirror
/// sections of width `mirror_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeterostructureSpec {
    pub mirror_w: f64,
    pub core_w: f64,
    pub core_periods: usize,
    #[serde(default = "default_mirror_periods")]
    pub mirror_periods: usize,
}

fn default_mirror_periods() -> usize {
    DEFAULT_MIRROR_PERIODS
}

impl HeterostructureSpec {
    pub fn reference() -> Self {
        Self { mirror_w: 0.52, core_w: 0.58, core_periods: 2, mirror_periods: DEFAULT_MIRROR_PERIODS }
    }

    pub fn validate(&self) -> Result<()> {
        DefectSpec::removed_row(self.mirror_w).validate()?;
        DefectSpec::removed_row(self.core_w).validate()?;
        if self.mirror_w > self.core_w {
            return Err(Error::invalid("mirror width must not exceed the core width"));
        }
        if self.core_periods == 0 || self.mirror_periods == 0 {
            return Err(Error::invalid("core_periods and mirror_periods must be at least 1"));
        }
        Ok(())
    }

    pub fn length(&self) -> usize {
        2 * self.mirror_periods + self.core_periods
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SupercellKind {
    Bulk,
    Waveguide(DefectSpec),
    Cavity(HeterostructureSpec),
}

/// A supercell with the metadata needed to measure localization.
#[derive(Debug, Clone)]
pub struct Supercell {
    pub geometry: UnitCellGeometry,
    pub kind: SupercellKind,
    /// The primitive cell the supercell was built from.
    pub unit: UnitCellGeometry,
    pub n_transverse: usize,
    pub n_longitudinal: usize,
    /// Half-width of the defect strip around the guide axis (units of `a`).
    pub strip_halfwidth: f64,
    /// Half-length of the cavity core region along the axis.
    pub core_halflength: Option<f64>,
}

impl Supercell {
    /// Cartesian position of grid sample `(i, j)` relative to the defect
    /// centre, taken from the nearest periodic image.
    pub fn local_position(&self, i: usize, j: usize) -> Vec2 {
        let g = &self.geometry;
        let wrap = |s: f64| s - s.round();
        let s1 = wrap(i as f64 / g.n1 as f64);
        let s2 = wrap(j as f64 / g.n2 as f64);
        let mut r = s1 * g.cell[0] + s2 * g.cell[1];
        let lx = g.cell[0].x;
        r.x -= lx * (r.x / lx).round();
        r
    }

    fn region_mask(&self, inside: impl Fn(Vec2) -> bool) -> Vec<bool> {
        let g = &self.geometry;
        let mut mask = Vec::with_capacity(g.n1 * g.n2);
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                mask.push(inside(self.local_position(i, j)));
            }
        }
        mask
    }

    /// Grid mask of the strip `|y| < strip_halfwidth`.
    pub fn strip_mask(&self) -> Vec<bool> {
        let w = self.strip_halfwidth;
        self.region_mask(|r| r.y.abs() < w)
    }

    /// Grid mask of the cavity core region `|x| < core_halflength`.
    pub fn core_mask(&self) -> Option<Vec<bool>> {
        self.core_halflength.map(|l| self.region_mask(|r| r.x.abs() < l))
    }
}

fn row_shift(j: i64, w: f64) -> f64 {
    -(j.signum() as f64) * (1.0 - w) * SQRT3 / 2.0
}

fn check_rows_fit(unit: &UnitCellGeometry, w: f64) -> Result<()> {
    let hole = &unit.hole;
    if hole.is_empty() {
        return Ok(());
    }
    let extent = hole.support(Vec2::new(0.0, 1.0)) + hole.support(Vec2::new(0.0, -1.0));
    if extent >= SQRT3 * w {
        return Err(Error::invalid(format!(
            "W = {w} brings the rows beside the guide into contact (hole height {extent:.3}a)"
        )));
    }
    Ok(())
}

/// Radius of the circle whose area equals the unit cell's hole area.
pub fn area_matched_radius(unit: &UnitCellGeometry) -> f64 {
    ((1.0 - unit.fill_fraction) * unit.area() / PI).sqrt()
}

fn validate_transverse(n_transverse: usize) -> Result<()> {
    if n_transverse < 5 || n_transverse.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "n_transverse = {n_transverse} must be odd and at least 5"
        )));
    }
    Ok(())
}

fn require_primitive(unit: &UnitCellGeometry) -> Result<()> {
    if unit.folding != [1, 1] {
        return Err(Error::invalid("supercells must be built from a primitive cell"));
    }
    Ok(())
}

fn assemble_geometry(unit: &UnitCellGeometry, cell: [Vec2; 2], folding: [usize; 2], holes: &[PlacedHole]) -> UnitCellGeometry {
    let (n1, n2) = (unit.n1 * folding[0], unit.n2 * folding[1]);
    let chi = rasterize(cell, holes, n1, n2);
    let fill_fraction = chi.iter().sum::<f64>() / chi.len() as f64;
    UnitCellGeometry { lattice: unit.lattice, hole: unit.hole, cell, folding, n1, n2, chi, fill_fraction }
}

/// Builds a waveguide supercell `n_transverse` rows wide and one period
/// long, or an exact tiling of `unit` when `defect` is `None`.
pub fn build_supercell(unit: &UnitCellGeometry, defect: Option<&DefectSpec>, n_transverse: usize) -> Result<Supercell> {
    validate_transverse(n_transverse)?;
    require_primitive(unit)?;
    let n = n_transverse;
    let [a1, a2] = unit.lattice.basis;
    let h = (n / 2) as i64;

    let Some(defect) = defect else {
        let (n1, n2) = (unit.n1, unit.n2 * n);
        let mut chi = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                chi.push(unit.chi[i * unit.n2 + j % unit.n2]);
            }
        }
        let geometry = UnitCellGeometry {
            cell: [a1, n as f64 * a2],
            folding: [1, n],
            n1,
            n2,
            chi,
            ..unit.clone()
        };
        return Ok(Supercell {
            geometry,
            kind: SupercellKind::Bulk,
            unit: unit.clone(),
            n_transverse: n,
            n_longitudinal: 1,
            strip_halfwidth: SQRT3 / 2.0,
            core_halflength: None,
        });
    };

    defect.validate()?;
    let w = defect.shift_w();
    check_rows_fit(unit, w)?;
    let radius = match defect.kind {
        DefectKind::CircularHoleRow => {
            let r = defect.circle_radius.unwrap_or_else(|| area_matched_radius(unit));
            if !(r > 0.0 && r < 0.5) {
                return Err(Error::invalid(format!("circle radius {r} must lie in (0, 0.5)")));
            }
            if r + unit.hole.bounding_radius() >= 1.0 {
                return Err(Error::invalid("circular holes would touch the neighbouring shamrock rows"));
            }
            Some(r)
        }
        DefectKind::RemovedRowW => None,
    };
    let shape = HoleShape::Shamrock(unit.hole);
    let mut holes = Vec::new();
    for j in -h..=h {
        let center = j as f64 * a2 + Vec2::new(0.0, row_shift(j, w));
        if j == 0 {
            if let Some(r) = radius {
                holes.push(PlacedHole { shape: HoleShape::Circle { radius: r }, center });
            }
        } else if !unit.hole.is_empty() {
            holes.push(PlacedHole { shape, center });
        }
    }
    let cell = [a1, n as f64 * a2 - Vec2::new(0.0, (1.0 - w) * SQRT3)];
    let geometry = assemble_geometry(unit, cell, [1, n], &holes);
    Ok(Supercell {
        geometry,
        kind: SupercellKind::Waveguide(*defect),
        unit: unit.clone(),
        n_transverse: n,
        n_longitudinal: 1,
        strip_halfwidth: strip_halfwidth(w),
        core_halflength: None,
    })
}

/// Defect strip: the region between the centres of the rows either side of
/// the guide, widened by half a row pitch.
fn strip_halfwidth(w: f64) -> f64 {
    SQRT3 * w / 2.0 + SQRT3 / 4.0
}

/// Builds the periodic cavity supercell: `2·mirror_periods + core_periods`
/// periods along the axis and `n_transverse` rows across it. In the core
/// section the rows beside the guide sit at the core width and the extra
/// displacement fades linearly to the mirror value at the outermost rows.
pub fn build_cavity(unit: &UnitCellGeometry, hs: &HeterostructureSpec, n_transverse: usize) -> Result<Supercell> {
    validate_transverse(n_transverse)?;
    require_primitive(unit)?;
    hs.validate()?;
    check_rows_fit(unit, hs.mirror_w)?;
    let n = n_transverse;
    let len = hs.length();
    let [a1, a2] = unit.lattice.basis;
    let h = (n / 2) as i64;
    let half_core = hs.core_periods as f64 / 2.0;
    let mut holes = Vec::new();
    if !unit.hole.is_empty() {
        for j in -h..=h {
            if j == 0 {
                continue;
            }
            let taper = if h > 1 { (h - j.abs()) as f64 / (h - 1) as f64 } else { 1.0 };
            for i in 0..len {
                let mut x = i as f64 + 0.5 * j as f64;
                x -= len as f64 * (x / len as f64).round();
                let w = if x.abs() < half_core - 1e-9 {
                    hs.mirror_w + (hs.core_w - hs.mirror_w) * taper
                } else {
                    hs.mirror_w
                };
                let y = j as f64 * a2.y + row_shift(j, w);
                holes.push(PlacedHole { shape: HoleShape::Shamrock(unit.hole), center: Vec2::new(x, y) });
            }
        }
    }
    let cell = [len as f64 * a1, n as f64 * a2 - Vec2::new(0.0, (1.0 - hs.mirror_w) * SQRT3)];
    let geometry = assemble_geometry(unit, cell, [len, n], &holes);
    Ok(Supercell {
        geometry,
        kind: SupercellKind::Cavity(*hs),
        unit: unit.clone(),
        n_transverse: n,
        n_longitudinal: len,
        strip_halfwidth: strip_halfwidth(hs.core_w),
        core_halflength: Some(core_halflength(hs)),
    })
}

/// Core region used for cavity localization: the core section itself.
fn core_halflength(hs: &HeterostructureSpec) -> f64 {
    hs.core_periods as f64 / 2.0
}

/// Photonic (TE) or elastic material for defect solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainMaterial {
    Photonic(PhotonicMaterial),
    Elastic(ElasticMaterial),
}

impl DomainMaterial {
    pub fn polarization(&self) -> Polarization {
        match self {
            DomainMaterial::Photonic(_) => Polarization::TE,
            DomainMaterial::Elastic(_) => Polarization::Elastic,
        }
    }
}

/// A Bloch operator for either domain with frequency conversions.
#[derive(Debug, Clone)]
pub enum BlochOperator {
    Photonic(PhotonicOperator),
    Elastic(ElasticOperator),
}

impl BlochOperator {
    pub fn new(cell: &UnitCellGeometry, material: &DomainMaterial, cutoff: usize) -> Result<Self> {
        Ok(match material {
            DomainMaterial::Photonic(m) => BlochOperator::Photonic(PhotonicOperator::new(cell, m, cutoff, Polarization::TE)?),
            DomainMaterial::Elastic(m) => BlochOperator::Elastic(ElasticOperator::new(cell, m, cutoff)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            BlochOperator::Photonic(op) => op.basis.len(),
            BlochOperator::Elastic(op) => op.dim(),
        }
    }

    pub fn problem(&self, k: Vec2, n_wanted: usize) -> HermitianProblem {
        match self {
            BlochOperator::Photonic(op) => op.problem(k, n_wanted),
            BlochOperator::Elastic(op) => op.problem(k, n_wanted),
        }
    }

    /// Normalized frequency of an eigenvalue.
    pub fn frequency(&self, lambda: f64) -> f64 {
        match self {
            BlochOperator::Photonic(_) => lambda.max(0.0).sqrt(),
            BlochOperator::Elastic(op) => op.normalized(lambda),
        }
    }

    /// Eigenvalue of a normalized frequency.
    pub fn eigenvalue(&self, freq: f64) -> f64 {
        match self {
            BlochOperator::Photonic(_) => freq * freq,
            BlochOperator::Elastic(op) => (2.0 * PI * op.material.transverse_velocity() * freq).powi(2),
        }
    }

    pub fn energy_density(&self, k: Vec2, coefficients: &[C64]) -> Vec<f64> {
        match self {
            BlochOperator::Photonic(op) => op.energy_density(k, coefficients),
            BlochOperator::Elastic(op) => op.energy_density(coefficients),
        }
    }

    pub fn polarization(&self) -> Polarization {
        match self {
            BlochOperator::Photonic(op) => op.polarization,
            BlochOperator::Elastic(_) => Polarization::Elastic,
        }
    }

    /// Physical units per normalized frequency unit.
    pub fn unit_scale(&self, a: f64) -> f64 {
        match self {
            BlochOperator::Photonic(_) => crate::photonic::thz_per_unit(a),
            BlochOperator::Elastic(op) => crate::phononic::ghz_per_unit(&op.material, a),
        }
    }

    fn notes(&self) -> Vec<String> {
        match self {
            BlochOperator::Photonic(op) => vec![format!(
                "2D effective-index approximation of the membrane (n_eff = {:.6})",
                op.n_solid
            )],
            BlochOperator::Elastic(op) => vec![format!(
                "plane-strain in-plane model; holes filled with a solid {:.0e} times softer and lighter",
                op.material.filler_stiffness_ratio
            )],
        }
    }
}

fn column(v: &faer::Mat<C64>, c: usize) -> Vec<C64> {
    (0..v.nrows()).map(|r| v[(r, c)]).collect()
}

fn masked_sum(density: &[f64], mask: &[bool]) -> f64 {
    density.iter().zip(mask).filter(|(_, &m)| m).map(|(d, _)| d).sum::<f64>().clamp(0.0, 1.0)
}

/// Widest gap of the primitive cell at the given cutoff, searched along
/// Γ-M-K-Γ. Photonic gaps are TE gaps; elastic gaps span every branch.
pub fn bulk_gap(unit: &UnitCellGeometry, material: &DomainMaterial, cutoff: usize) -> Result<Option<Gap>> {
    let path = irbz_path(&unit.lattice, 8)?;
    let n_bands = match material {
        DomainMaterial::Photonic(_) => 8,
        DomainMaterial::Elastic(_) => 12,
    };
    let op = BlochOperator::new(unit, material, cutoff)?;
    let frequencies = path
        .points
        .par_iter()
        .map(|&k| {
            let e = hermitian_eigensolve(&op.problem(k, n_bands.min(op.dim())))?;
            Ok(e.values.iter().map(|&l| op.frequency(l)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let bs = BandStructure {
        kpath: path,
        frequencies,
        polarization: op.polarization(),
        light_line: None,
        unit_scale: op.unit_scale(unit.lattice.a),
        notes: vec![],
    };
    Ok(find_gaps(&bs, None)?.widest().cloned())
}

/// A band of a waveguide supercell that is guided at one or more `kx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidedBand {
    pub band_index: usize,
    /// Indices into `WaveguideBands::kx` at which the band is guided.
    pub kx_indices: Vec<usize>,
    pub min_freq: f64,
    pub max_freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideBands {
    /// Projected bands; the path abscissa is `kx` in units of `1/a`.
    pub bands: BandStructure,
    /// Bloch phase per period along the guide, in `[0, π]`.
    pub kx: Vec<f64>,
    /// Energy fraction inside the defect strip for each `(kx, band)`.
    pub localization: Vec<Vec<f64>>,
    pub bulk_gap: Option<Gap>,
    pub guided_bands: Vec<GuidedBand>,
}

impl WaveguideBands {
    pub fn is_guided(&self, k: usize, band: usize) -> bool {
        self.guided_bands.iter().any(|g| g.band_index == band && g.kx_indices.contains(&k))
    }

    /// Lowest guided frequency at sample `k`.
    pub fn lowest_guided(&self, k: usize) -> Option<f64> {
        (0..self.bands.n_bands())
            .filter(|&b| self.is_guided(k, b))
            .map(|b| self.bands.frequencies[k][b])
            .next()
    }

    /// The fundamental guided band: guided at the most `kx` samples, lowest
    /// band index on ties.
    pub fn primary_guided(&self) -> Option<&GuidedBand> {
        self.guided_bands.iter().min_by_key(|g| (std::cmp::Reverse(g.kx_indices.len()), g.band_index))
    }

    /// Frequency of the fundamental guided band at sample `k`, if guided there.
    pub fn primary_edge(&self, k: usize) -> Option<f64> {
        let g = self.primary_guided()?;
        g.kx_indices.contains(&k).then(|| self.bands.frequencies[k][g.band_index])
    }

    /// CSV with columns `k_index,kx,band_index,freq_normalized,freq_<unit>,localization,guided`.
    pub fn to_csv(&self) -> String {
        let unit = self.bands.polarization.unit_label();
        let mut out = format!("k_index,kx,band_index,freq_normalized,freq_{unit},localization,guided\n");
        for (k, freqs) in self.bands.frequencies.iter().enumerate() {
            for (b, f) in freqs.iter().enumerate() {
                out.push_str(&format!(
                    "{k},{},{b},{f},{},{},{}\n",
                    self.kx[k],
                    f * self.bands.unit_scale,
                    self.localization[k][b],
                    u8::from(self.is_guided(k, b))
                ));
            }
        }
        out
    }
}

/// Waveguide Bloch vectors for `kx ∈ [0, π/a]`, chosen so the Bloch phase
/// across the transverse cell edge vanishes.
pub fn guide_kpoints(supercell: &Supercell, kx_samples: usize) -> Result<(Vec<Vec2>, Vec<f64>)> {
    if kx_samples < 2 {
        return Err(Error::invalid("kx_samples must be at least 2"));
    }
    let g = &supercell.geometry;
    let b1 = g.reciprocal()[0];
    let period = g.cell[0].x;
    let mut points = Vec::with_capacity(kx_samples);
    let mut kx = Vec::with_capacity(kx_samples);
    for i in 0..kx_samples {
        let s = 0.5 * i as f64 / (kx_samples - 1) as f64;
        points.push(s * b1);
        kx.push(2.0 * PI * s / period);
    }
    Ok((points, kx))
}

/// Projected bands of a waveguide supercell with guided-mode detection.
pub fn waveguide_bands(
    supercell: &Supercell,
    material: &DomainMaterial,
    n_bands: usize,
    cutoff: usize,
    kx_samples: usize,
) -> Result<WaveguideBands> {
    if !matches!(supercell.kind, SupercellKind::Waveguide(_)) {
        return Err(Error::invalid("waveguide_bands needs a supercell built with a defect"));
    }
    if n_bands == 0 {
        return Err(Error::invalid("n_bands must be at least 1"));
    }
    let gap = bulk_gap(&supercell.unit, material, cutoff)?;
    let op = BlochOperator::new(&supercell.geometry, material, cutoff)?;
    let n_bands = n_bands.min(op.dim());
    let (points, kx) = guide_kpoints(supercell, kx_samples)?;
    let strip = supercell.strip_mask();
    let solved = points
        .par_iter()
        .map(|&k| {
            let e = hermitian_eigensolve(&op.problem(k, n_bands).with_vectors(true))?;
            let v = e.vectors.as_ref().expect("vectors requested");
            let freqs: Vec<f64> = e.values.iter().map(|&l| op.frequency(l)).collect();
            let loc: Vec<f64> = (0..freqs.len())
                .map(|c| masked_sum(&op.energy_density(k, &column(v, c)), &strip))
                .collect();
            Ok((freqs, loc))
        })
        .collect::<Result<Vec<_>>>()?;
    let (frequencies, localization): (Vec<_>, Vec<_>) = solved.into_iter().unzip();

    let mut guided_bands: Vec<GuidedBand> = Vec::new();
    if let Some(gap) = &gap {
        for b in 0..n_bands {
            let ks: Vec<usize> = (0..kx.len())
                .filter(|&k| gap.contains(frequencies[k][b]) && localization[k][b] > GUIDED_LOCALIZATION)
                .collect();
            if !ks.is_empty() {
                let fs = ks.iter().map(|&k| frequencies[k][b]);
                guided_bands.push(GuidedBand {
                    band_index: b,
                    min_freq: fs.clone().fold(f64::INFINITY, f64::min),
                    max_freq: fs.fold(f64::NEG_INFINITY, f64::max),
                    kx_indices: ks,
                });
            }
        }
    }
    let mut kpath = KPath::from_points(points);
    kpath.path_length = kx.clone();
    let mut notes = op.notes();
    if gap.is_none() {
        notes.push("the bulk crystal has no gap at this cutoff; no guided modes can be identified".into());
    }
    let bands = BandStructure {
        kpath,
        frequencies,
        polarization: op.polarization(),
        light_line: None,
        unit_scale: op.unit_scale(supercell.unit.lattice.a),
        notes,
    };
    Ok(WaveguideBands { bands, kx, localization, bulk_gap: gap, guided_bands })
}

/// A mode confined to the cavity core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedMode {
    pub polarization: Polarization,
    pub frequency: f64,
    pub frequency_physical: f64,
    pub unit: String,
    /// Energy fraction inside the core region.
    pub localization: f64,
    /// True when the frequency falls inside a band of the mirror waveguide,
    /// so the mode can leak along the guide.
    pub in_mirror_band: bool,
    /// Exponential decay length of the energy along the axis (units of `a`).
    pub decay_length: f64,
    /// Energy density on the supercell grid, summing to one.
    pub profile: Vec<f64>,
    pub n1: usize,
    pub n2: usize,
    pub cell: [Vec2; 2],
}

/// Cavity solve output: modes in the mirror gap and the search windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityResult {
    /// Modes sorted by decreasing localization.
    pub modes: Vec<LocalizedMode>,
    pub bulk_gap: Option<Gap>,
    /// Frequency ranges covered by the mirror waveguide's bands inside the gap.
    pub mirror_bands: Vec<(f64, f64)>,
    pub notes: Vec<String>,
}

/// Frequency intervals of the mirror waveguide's bands inside `gap`.
fn mirror_passbands(unit: &UnitCellGeometry, hs: &HeterostructureSpec, material: &DomainMaterial, cutoff: usize, n_transverse: usize, gap: &Gap) -> Result<Vec<(f64, f64)>> {
    let sc = build_supercell(unit, Some(&DefectSpec::removed_row(hs.mirror_w)), n_transverse)?;
    let op = BlochOperator::new(&sc.geometry, material, cutoff)?;
    let (points, _) = guide_kpoints(&sc, 17)?;
    let top = op.eigenvalue(gap.upper_edge);
    let per_k = points
        .par_iter()
        .map(|&k| {
            let e = hermitian_eigensolve_window(&op.problem(k, 1), 0.0, top)?;
            Ok(e.values.iter().map(|&l| op.frequency(l)).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let n_bands = per_k.iter().map(Vec::len).max().unwrap_or(0);
    let mut ranges = Vec::new();
    for b in 0..n_bands {
        let in_gap: Vec<f64> = per_k.iter().filter_map(|f| f.get(b).copied()).filter(|&f| f > gap.lower_edge).collect();
        if !in_gap.is_empty() {
            let lo = in_gap.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = in_gap.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            ranges.push((lo, hi));
        }
    }
    Ok(ranges)
}

/// Energy per axial bin of width one period, by bin centre `|x|`.
fn axial_profile(sc: &Supercell, density: &[f64]) -> Vec<(f64, f64)> {
    let g = &sc.geometry;
    let half = g.cell[0].x / 2.0;
    let n_bins = half.ceil() as usize;
    let mut bins = vec![0.0; n_bins.max(1)];
    for i in 0..g.n1 {
        for j in 0..g.n2 {
            let x = sc.local_position(i, j).x.abs();
            let b = (x.floor() as usize).min(bins.len() - 1);
            bins[b] += density[i * g.n2 + j];
        }
    }
    bins.into_iter().enumerate().map(|(b, e)| (b as f64 + 0.5, e)).collect()
}

/// Least-squares decay length of `ln E(|x|)` beyond `x_min`.
fn decay_length(profile: &[(f64, f64)], x_min: f64) -> f64 {
    let pts: Vec<(f64, f64)> = profile.iter().filter(|(x, e)| *x > x_min && *e > 0.0).map(|&(x, e)| (x, e.ln())).collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if slope < 0.0 {
        -1.0 / slope
    } else {
        f64::INFINITY
    }
}

/// Localized modes of the heterostructure cavity, solved at Γ of the
/// periodic cavity supercell.
pub fn cavity_modes(
    unit: &UnitCellGeometry,
    hs: &HeterostructureSpec,
    material: &DomainMaterial,
    n_modes: usize,
    cutoff: usize,
    n_transverse: usize,
) -> Result<CavityResult> {
    let sc = build_cavity(unit, hs, n_transverse)?;
    let Some(gap) = bulk_gap(unit, material, cutoff)? else {
        return Ok(CavityResult {
            modes: vec![],
            bulk_gap: None,
            mirror_bands: vec![],
            notes: vec!["the bulk crystal has no gap at this cutoff".into()],
        });
    };
    let mirror_bands = mirror_passbands(unit, hs, material, cutoff, n_transverse, &gap)?;
    let op = BlochOperator::new(&sc.geometry, material, cutoff)?;
    let k = Vec2::default();
    let window = (op.eigenvalue(gap.lower_edge), op.eigenvalue(gap.upper_edge));
    log::info!("cavity supercell: {} unknowns", op.dim());
    let Eigenpairs { values, vectors } = hermitian_eigensolve_interior(op.problem(k, 1), window.0, window.1)?;
    let vectors = vectors.expect("vectors requested");
    let core = sc.core_mask().expect("cavity has a core");
    let scale = op.unit_scale(unit.lattice.a);
    let half_core = hs.core_periods as f64 / 2.0;
    let candidates: Vec<usize> = (0..values.len()).filter(|&c| gap.contains(op.frequency(values[c]))).collect();
    let mut modes: Vec<LocalizedMode> = candidates
        .par_iter()
        .map(|&c| {
            let density = op.energy_density(k, &column(&vectors, c));
            let f = op.frequency(values[c]);
            LocalizedMode {
                polarization: op.polarization(),
                frequency: f,
                frequency_physical: f * scale,
                unit: op.polarization().unit_label().to_string(),
                localization: masked_sum(&density, &core),
                in_mirror_band: mirror_bands.iter().any(|&(lo, hi)| f >= lo && f <= hi),
                decay_length: decay_length(&axial_profile(&sc, &density), half_core),
                n1: sc.geometry.n1,
                n2: sc.geometry.n2,
                cell: sc.geometry.cell,
                profile: density,
            }
        })
        .collect();
    modes.sort_by(|a, b| b.localization.total_cmp(&a.localization));
    modes.truncate(n_modes);
    let mut notes = op.notes();
    notes.push(format!(
        "cavity supercell {} x {} periods, {} unknowns, solved at the zone centre",
        sc.n_longitudinal,
        sc.n_transverse,
        op.dim()
    ));
    Ok(CavityResult { modes, bulk_gap: Some(gap), mirror_bands, notes })
}

/// Writes `<stem>.csv` (columns `i,j,x,y,energy`) and `<stem>.svg`.
pub fn export_mode_profile(mode: &LocalizedMode, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    if mode.profile.len() != mode.n1 * mode.n2 {
        return Err(Error::invalid("mode profile does not match its grid"));
    }
    let mut csv = String::with_capacity(mode.profile.len() * 40);
    csv.push_str("i,j,x,y,energy\n");
    for i in 0..mode.n1 {
        for j in 0..mode.n2 {
            let r = (i as f64 / mode.n1 as f64) * mode.cell[0] + (j as f64 / mode.n2 as f64) * mode.cell[1];
            csv.push_str(&format!("{i},{j},{},{},{}\n", r.x, r.y, mode.profile[i * mode.n2 + j]));
        }
    }
    let csv_path = stem.with_extension("csv");
    let svg_path = stem.with_extension("svg");
    std::fs::write(&csv_path, csv)?;
    std::fs::write(&svg_path, plot::heatmap(&mode.profile, mode.n1, mode.n2, mode.cell, 200))?;
    Ok((csv_path, svg_path))
}

/// Reads the energy column of a profile CSV written by [`export_mode_profile`].
pub fn read_mode_profile(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .skip(1)
        .map(|line| {
            line.rsplit(',')
                .next()
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::invalid(format!("malformed profile line: {line}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_unit_cell, LatticeSpec, ShamrockHole};

    fn unit() -> UnitCellGeometry {
        build_unit_cell(&LatticeSpec::hexagonal(300e-9, 195e-9).unwrap(), &ShamrockHole::reference(), 32).unwrap()
    }

    #[test]
    fn transverse_size_must_be_odd() {
        let u = unit();
        assert!(build_supercell(&u, None, 6).is_err());
        assert!(build_supercell(&u, None, 3).is_err());
        assert!(build_supercell(&u, None, 7).is_ok());
    }

    #[test]
    fn tiling_copies_the_unit_cell() {
        let u = unit();
        let s = build_supercell(&u, None, 5).unwrap();
        assert_eq!(s.geometry.n2, 5 * u.n2);
        assert!((s.geometry.fill_fraction - u.fill_fraction).abs() < 1e-12);
    }

    #[test]
    fn unit_width_keeps_row_pitch() {
        let u = unit();
        let s = build_supercell(&u, Some(&DefectSpec::removed_row(1.0)), 5).unwrap();
        let pitch = s.geometry.cell[1].y / 5.0;
        assert!((pitch - SQRT3 / 2.0).abs() < 1e-12);
        // a removed row leaves more solid than the tiling
        assert!(s.geometry.fill_fraction > u.fill_fraction);
    }

    #[test]
    fn narrow_guides_are_rejected() {
        let u = unit();
        assert!(build_supercell(&u, Some(&DefectSpec::removed_row(0.3)), 5).is_err());
        assert!(build_supercell(&u, Some(&DefectSpec::removed_row(0.58)), 11).is_ok());
        assert!(DefectSpec::circular_row(Some(0.6)).validate().is_err());
    }

    #[test]
    fn area_matched_circle_preserves_fill() {
        let u = unit();
        let s = build_supercell(&u, Some(&DefectSpec::circular_row(None)), 5).unwrap();
        assert!((s.geometry.fill_fraction - u.fill_fraction).abs() < 2e-3);
    }

    #[test]
    fn cavity_spec_validation() {
        let mut hs = HeterostructureSpec::reference();
        assert!(hs.validate().is_ok());
        hs.mirror_w = 0.7;
        assert!(hs.validate().is_err());
        let hs = HeterostructureSpec { core_periods: 0, ..HeterostructureSpec::reference() };
        assert!(hs.validate().is_err());
    }

    #[test]
    fn decay_fit_recovers_exponential() {
        let prof: Vec<(f64, f64)> = (0..8).map(|b| (b as f64 + 0.5, (-(b as f64 + 0.5) / 1.7).exp())).collect();
        assert!((decay_length(&prof, 1.0) - 1.7).abs() < 1e-12);
        assert!(decay_length(&prof[..2], 1.0).is_infinite());
    }

    #[test]
    fn local_positions_are_centred() {
        let u = unit();
        let s = build_cavity(&u, &HeterostructureSpec::reference(), 5).unwrap();
        let g = &s.geometry;
        for (i, j) in [(0, 0), (g.n1 - 1, 3), (g.n1 / 2, g.n2 / 2)] {
            let r = s.local_position(i, j);
            assert!(r.x.abs() <= g.cell[0].x / 2.0 + 1e-12);
            assert!(r.y.abs() <= g.cell[1].y / 2.0 + 1e-12);
        }
    }
}
