//! Shamrock lattice geometry: lattice vectors, the three-lobe hole, raster
//! sampling of the material indicator and its Fourier coefficients.
//!
//! Lengths inside this module are expressed in units of the lattice
//! constant `a`; only [`LatticeSpec`] carries the physical scale.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fft2_forward, C64};

/// Supersampling factor per pixel edge used for boundary anti-aliasing.
pub const SUPERSAMPLE: usize = 4;
/// Smallest accepted raster resolution per primitive period.
pub const MIN_RESOLUTION: usize = 16;
/// Default raster resolution of a primitive cell.
pub const DEFAULT_RESOLUTION: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn from_angle(angle: f64) -> Vec2 {
        Vec2::new(angle.cos(), angle.sin())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

/// Reciprocal basis of the cell spanned by `a1`, `a2`: `b_i · a_j = 2π δ_ij`.
pub fn reciprocal_of(a1: Vec2, a2: Vec2) -> [Vec2; 2] {
    let area = a1.cross(a2);
    let b1 = (2.0 * PI / area) * Vec2::new(a2.y, -a2.x);
    let b2 = (2.0 * PI / area) * Vec2::new(-a1.y, a1.x);
    [b1, b2]
}

/// Hexagonal lattice with its physical scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Lattice constant in meters.
    pub a: f64,
    /// Membrane thickness in meters.
    pub d: f64,
    /// Primitive vectors in units of `a`.
    pub basis: [Vec2; 2],
}

impl LatticeSpec {
    /// Hexagonal lattice with `a1 = (1, 0)` and `a2 = (1/2, √3/2)`.
    pub fn hexagonal(a: f64, d: f64) -> Result<Self> {
        let spec = Self {
            a,
            d,
            basis: [Vec2::new(1.0, 0.0), Vec2::new(0.5, 3f64.sqrt() / 2.0)],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::invalid("lattice constant must be positive"));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::invalid("membrane thickness must be positive"));
        }
        let [a1, a2] = self.basis;
        let cos = a1.dot(a2) / (a1.norm() * a2.norm());
        if (a1.norm() - 1.0).abs() > 1e-12 || (a2.norm() - 1.0).abs() > 1e-12 || (cos - 0.5).abs() > 1e-12 {
            return Err(Error::invalid("basis vectors must have unit length and a 60° angle"));
        }
        Ok(())
    }

    pub fn d_over_a(&self) -> f64 {
        self.d / self.a
    }

    /// Area of the primitive cell in units of `a²`.
    pub fn cell_area(&self) -> f64 {
        self.basis[0].cross(self.basis[1]).abs()
    }
}

/// Reciprocal basis of the primitive lattice, in units of `1/a`.
pub fn reciprocal_basis(lattice: &LatticeSpec) -> [Vec2; 2] {
    reciprocal_of(lattice.basis[0], lattice.basis[1])
}

/// How the `A` and `B` parameters of the hole are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisConvention {
    /// `A`, `B` are full axis lengths; semi-axes are `A/2`, `B/2`.
    #[default]
    Full,
    /// `A`, `B` are semi-axis lengths.
    Semi,
}

/// Three ellipses rotated by 2π/3 about a common center, each shifted outward
/// along its major axis.
///
/// With `orientation = 0` the first lobe points along `+y`, so the hole
/// mirror lines are perpendicular to the lattice vectors and the crystal is
/// p3m1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShamrockHole {
    /// Minor-axis parameter `A` (units of `a`).
    pub minor: f64,
    /// Major-axis parameter `B` (units of `a`).
    pub major: f64,
    /// Outward shift `L` of each ellipse center (units of `a`).
    pub shift: f64,
    /// Global rotation of the three-lobe pattern (radians).
    pub orientation: f64,
    pub convention: AxisConvention,
}

impl ShamrockHole {
    pub fn new(minor: f64, major: f64, shift: f64) -> Self {
        Self { minor, major, shift, orientation: 0.0, convention: AxisConvention::Full }
    }

    /// Hole parameters of the reference design, `(A, B, L) = (0.45, 0.6, 0.17) a`.
    pub fn reference() -> Self {
        Self::new(0.45, 0.6, 0.17)
    }

    /// A hole of zero size (homogeneous membrane).
    pub fn none() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.minor <= 0.0 || self.major <= 0.0
    }

    /// `(semi_minor, semi_major)` in units of `a`.
    pub fn semi_axes(&self) -> (f64, f64) {
        match self.convention {
            AxisConvention::Full => (0.5 * self.minor, 0.5 * self.major),
            AxisConvention::Semi => (self.minor, self.major),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.minor, self.major, self.shift, self.orientation];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("hole parameters must be finite"));
        }
        if self.is_empty() {
            if self.minor < 0.0 || self.major < 0.0 || self.shift < 0.0 {
                return Err(Error::invalid("hole parameters must be non-negative"));
            }
            return Ok(());
        }
        if self.minor > self.major {
            return Err(Error::invalid("ellipse minor axis A must not exceed major axis B"));
        }
        if self.shift < 0.0 {
            return Err(Error::invalid("lobe shift L must be non-negative"));
        }
        Ok(())
    }

    /// Major-axis direction of lobe `k` (0, 1, 2).
    pub fn lobe_direction(&self, k: usize) -> Vec2 {
        Vec2::from_angle(PI / 2.0 + self.orientation + k as f64 * 2.0 * PI / 3.0)
    }

    /// Radius of the smallest circle about the hole center that contains it.
    pub fn bounding_radius(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let (_, semi_major) = self.semi_axes();
        self.shift + semi_major
    }

    /// Support function `max_{p in hole} n·(p - center)` for a unit vector `n`.
    pub fn support(&self, n: Vec2) -> f64 {
        if self.is_empty() {
            return f64::NEG_INFINITY;
        }
        let (sa, sb) = self.semi_axes();
        (0..3)
            .map(|k| {
                let u = self.lobe_direction(k);
                let v = Vec2::new(-u.y, u.x);
                let (nu, nv) = (n.dot(u), n.dot(v));
                self.shift * nu + ((sb * nu).powi(2) + (sa * nv).powi(2)).sqrt()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when the whole hole lies strictly inside the Wigner–Seitz cell of
    /// the hexagonal lattice, so neighbouring holes cannot touch.
    pub fn fits_wigner_seitz(&self) -> bool {
        (0..6).all(|k| self.support(Vec2::from_angle(k as f64 * PI / 3.0)) < 0.5 - 1e-12)
    }

    fn contains_local(&self, d: Vec2) -> bool {
        if self.is_empty() {
            return false;
        }
        let (sa, sb) = self.semi_axes();
        (0..3).any(|k| {
            let u = self.lobe_direction(k);
            let along = d.dot(u) - self.shift;
            let across = d.cross(u);
            (along / sb).powi(2) + (across / sa).powi(2) <= 1.0
        })
    }

    /// Cartesian point operations that leave the hole invariant about its center.
    pub fn symmetry_ops(&self) -> Vec<[[f64; 2]; 2]> {
        let mut ops = Vec::with_capacity(6);
        for k in 0..3 {
            let t = k as f64 * 2.0 * PI / 3.0;
            let (s, c) = t.sin_cos();
            ops.push([[c, -s], [s, c]]);
        }
        for k in 0..3 {
            let u = self.lobe_direction(k);
            let t2 = 2.0 * u.y.atan2(u.x);
            let (s, c) = t2.sin_cos();
            ops.push([[c, s], [s, -c]]);
        }
        ops
    }
}

/// True iff `p` lies inside the union of the three shifted ellipses of a hole
/// centered at `center`.
pub fn point_in_shamrock(hole: &ShamrockHole, p: Vec2, center: Vec2) -> bool {
    hole.contains_local(p - center)
}

/// Shape of a single hole in a (super)cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HoleShape {
    Shamrock(ShamrockHole),
    Circle { radius: f64 },
}

impl HoleShape {
    pub fn bounding_radius(&self) -> f64 {
        match self {
            HoleShape::Shamrock(h) => h.bounding_radius(),
            HoleShape::Circle { radius } => radius.max(0.0),
        }
    }

    pub fn contains(&self, d: Vec2) -> bool {
        match self {
            HoleShape::Shamrock(h) => h.contains_local(d),
            HoleShape::Circle { radius } => d.dot(d) <= radius * radius,
        }
    }
}

/// A hole placed at a Cartesian position (units of `a`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedHole {
    pub shape: HoleShape,
    pub center: Vec2,
}

/// Raster of the material indicator `χ` (1 = solid, 0 = hole) over one
/// periodic cell, with lattice metadata.
///
/// The grid is indexed by fractional coordinates: sample `(i, j)` sits at
/// `r = (i / n1) A1 + (j / n2) A2` and is stored at `i * n2 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCellGeometry {
    pub lattice: LatticeSpec,
    pub hole: ShamrockHole,
    /// Periodic cell vectors `A1`, `A2` (units of `a`).
    pub cell: [Vec2; 2],
    /// Number of primitive periods folded into the cell along each axis.
    pub folding: [usize; 2],
    pub n1: usize,
    pub n2: usize,
    pub chi: Vec<f64>,
    pub fill_fraction: f64,
}

impl UnitCellGeometry {
    pub fn reciprocal(&self) -> [Vec2; 2] {
        reciprocal_of(self.cell[0], self.cell[1])
    }

    pub fn area(&self) -> f64 {
        self.cell[0].cross(self.cell[1]).abs()
    }

    /// Cartesian position of grid sample `(i, j)`.
    pub fn position(&self, i: usize, j: usize) -> Vec2 {
        (i as f64 / self.n1 as f64) * self.cell[0] + (j as f64 / self.n2 as f64) * self.cell[1]
    }

    pub fn chi_at(&self, i: usize, j: usize) -> f64 {
        self.chi[i * self.n2 + j]
    }

    /// Maps `χ` through `solid * χ + hole * (1 - χ)`.
    pub fn mapped(&self, values: (f64, f64)) -> Vec<f64> {
        let (solid, hole) = values;
        self.chi.iter().map(|&c| solid * c + hole * (1.0 - c)).collect()
    }

    /// Writes `χ` as an 8-bit binary PGM (white = solid), one image row per
    /// `j` index so the image shows the cell in fractional coordinates.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.chi.len() + 32);
        write!(out, "P5\n{} {}\n255\n", self.n1, self.n2)?;
        for j in (0..self.n2).rev() {
            for i in 0..self.n1 {
                out.push((self.chi_at(i, j).clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Rasterizes holes into an `n1 × n2` indicator grid over the cell
/// `(A1, A2)`, averaging `SUPERSAMPLE²` subsamples per pixel. Holes are
/// repeated periodically, so centers may lie anywhere.
pub fn rasterize(cell: [Vec2; 2], holes: &[PlacedHole], n1: usize, n2: usize) -> Vec<f64> {
    let [b1, b2] = reciprocal_of(cell[0], cell[1]);
    let ss = SUPERSAMPLE;
    let mut mask = vec![0u16; n1 * n2];
    let offsets: Vec<f64> = (0..ss).map(|p| ((p as f64 + 0.5) / ss as f64) - 0.5).collect();

    for hole in holes {
        let radius = hole.shape.bounding_radius();
        if radius <= 0.0 {
            continue;
        }
        let s1c = b1.dot(hole.center) / (2.0 * PI);
        let s2c = b2.dot(hole.center) / (2.0 * PI);
        let d1 = radius * b1.norm() / (2.0 * PI);
        let d2 = radius * b2.norm() / (2.0 * PI);
        let i_lo = ((s1c - d1) * n1 as f64).floor() as i64 - 1;
        let i_hi = ((s1c + d1) * n1 as f64).ceil() as i64 + 1;
        let j_lo = ((s2c - d2) * n2 as f64).floor() as i64 - 1;
        let j_hi = ((s2c + d2) * n2 as f64).ceil() as i64 + 1;
        for i in i_lo..=i_hi {
            for j in j_lo..=j_hi {
                let mut bits = 0u16;
                for (p, &du) in offsets.iter().enumerate() {
                    for (q, &dv) in offsets.iter().enumerate() {
                        let s1 = (i as f64 + du) / n1 as f64;
                        let s2 = (j as f64 + dv) / n2 as f64;
                        let r = s1 * cell[0] + s2 * cell[1];
                        if hole.shape.contains(r - hole.center) {
                            bits |= 1 << (p * ss + q);
                        }
                    }
                }
                if bits != 0 {
                    let iw = i.rem_euclid(n1 as i64) as usize;
                    let jw = j.rem_euclid(n2 as i64) as usize;
                    mask[iw * n2 + jw] |= bits;
                }
            }
        }
    }
    let total = (ss * ss) as f64;
    mask.iter().map(|m| 1.0 - m.count_ones() as f64 / total).collect()
}

/// Integer matrix form of a Cartesian point operation in the fractional
/// coordinates of `(a1, a2)`, if it maps the lattice onto itself.
pub(crate) fn fractional_op(op: [[f64; 2]; 2], a1: Vec2, a2: Vec2) -> Option<[[i64; 2]; 2]> {
    // columns of A are a1, a2; M = A⁻¹ R A
    let det = a1.cross(a2);
    let inv = [[a2.y / det, -a2.x / det], [-a1.y / det, a1.x / det]];
    let ra = [
        [op[0][0] * a1.x + op[0][1] * a1.y, op[0][0] * a2.x + op[0][1] * a2.y],
        [op[1][0] * a1.x + op[1][1] * a1.y, op[1][0] * a2.x + op[1][1] * a2.y],
    ];
    let mut m = [[0i64; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let v = inv[r][0] * ra[0][c] + inv[r][1] * ra[1][c];
            let rounded = v.round();
            if (v - rounded).abs() > 1e-9 {
                return None;
            }
            m[r][c] = rounded as i64;
        }
    }
    Some(m)
}

/// Averages a square grid over the hole symmetries that map the grid onto
/// itself, making the raster exactly invariant under them.
fn symmetrize(chi: &[f64], n: usize, lattice: &LatticeSpec, hole: &ShamrockHole) -> Vec<f64> {
    let [a1, a2] = lattice.basis;
    let ops: Vec<[[i64; 2]; 2]> =
        hole.symmetry_ops().into_iter().filter_map(|op| fractional_op(op, a1, a2)).collect();
    if ops.len() <= 1 {
        return chi.to_vec();
    }
    let ni = n as i64;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (ii, jj) = (i as i64, j as i64);
            let sum: f64 = ops
                .iter()
                .map(|m| {
                    let ti = (m[0][0] * ii + m[0][1] * jj).rem_euclid(ni) as usize;
                    let tj = (m[1][0] * ii + m[1][1] * jj).rem_euclid(ni) as usize;
                    chi[ti * n + tj]
                })
                .sum();
            out[i * n + j] = sum / ops.len() as f64;
        }
    }
    out
}

/// Rasterizes one primitive cell with the hole centered at the origin.
pub fn build_unit_cell(lattice: &LatticeSpec, hole: &ShamrockHole, resolution: usize) -> Result<UnitCellGeometry> {
    lattice.validate()?;
    hole.validate()?;
    if resolution < MIN_RESOLUTION {
        return Err(Error::invalid(format!(
            "resolution {resolution} is below the minimum of {MIN_RESOLUTION}"
        )));
    }
    if !hole.is_empty() && !hole.fits_wigner_seitz() {
        return Err(Error::invalid(
            "hole extends beyond its Wigner-Seitz cell and would overlap neighbouring holes",
        ));
    }
    let n = resolution;
    let chi = if hole.is_empty() {
        vec![1.0; n * n]
    } else {
        let raw = rasterize(
            lattice.basis,
            &[PlacedHole { shape: HoleShape::Shamrock(*hole), center: Vec2::default() }],
            n,
            n,
        );
        symmetrize(&raw, n, lattice, hole)
    };
    let fill_fraction = chi.iter().sum::<f64>() / chi.len() as f64;
    Ok(UnitCellGeometry {
        lattice: *lattice,
        hole: *hole,
        cell: lattice.basis,
        folding: [1, 1],
        n1: n,
        n2: n,
        chi,
        fill_fraction,
    })
}

/// Fourier coefficients `c(m, n)` of a real cell-periodic field for
/// `G = m B1 + n B2`, `|m| <= max1`, `|n| <= max2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    pub max_index: [usize; 2],
    coefficients: Vec<C64>,
}

impl FourierField {
    pub fn get(&self, m: i64, n: i64) -> C64 {
        let [c1, c2] = self.max_index;
        assert!(
            m.unsigned_abs() as usize <= c1 && n.unsigned_abs() as usize <= c2,
            "Fourier index ({m}, {n}) outside retained range ±({c1}, {c2})"
        );
        let w = 2 * c2 + 1;
        self.coefficients[(m + c1 as i64) as usize * w + (n + c2 as i64) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), C64)> + '_ {
        let [c1, c2] = self.max_index;
        let w = 2 * c2 + 1;
        self.coefficients.iter().enumerate().map(move |(idx, &c)| {
            (((idx / w) as i64 - c1 as i64, (idx % w) as i64 - c2 as i64), c)
        })
    }
}

/// Discrete Fourier coefficients of `values.0 * χ + values.1 * (1 - χ)`.
///
/// Requires `2 * max_index + 1 <= n` along both grid axes so that retained
/// indices are not aliased onto each other.
pub fn fourier_coefficients(
    cell: &UnitCellGeometry,
    values: (f64, f64),
    max_index: [usize; 2],
) -> Result<FourierField> {
    if !(values.0.is_finite() && values.1.is_finite()) {
        return Err(Error::invalid("mapped field values must be finite"));
    }
    if max_index[0] == 0 && max_index[1] == 0 {
        return Err(Error::invalid("Fourier cutoff must be at least 1"));
    }
    let [c1, c2] = max_index;
    if 2 * c1 + 1 > cell.n1 || 2 * c2 + 1 > cell.n2 {
        return Err(Error::invalid(format!(
            "Fourier cutoff ±({c1}, {c2}) exceeds the Nyquist limit of a {}×{} grid",
            cell.n1, cell.n2
        )));
    }
    let field: Vec<C64> = cell.mapped(values).into_iter().map(|v| C64::new(v, 0.0)).collect();
    let spectrum = fft2_forward(&field, cell.n1, cell.n2);
    let (n1, n2) = (cell.n1 as i64, cell.n2 as i64);
    let mut coefficients = Vec::with_capacity((2 * c1 + 1) * (2 * c2 + 1));
    for m in -(c1 as i64)..=c1 as i64 {
        for n in -(c2 as i64)..=c2 as i64 {
            let idx = m.rem_euclid(n1) as usize * cell.n2 + n.rem_euclid(n2) as usize;
            coefficients.push(spectrum[idx]);
        }
    }
    Ok(FourierField { max_index, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> LatticeSpec {
        LatticeSpec::hexagonal(300e-9, 0.65 * 300e-9).unwrap()
    }

    #[test]
    fn center_is_inside_reference_hole() {
        assert!(point_in_shamrock(&ShamrockHole::reference(), Vec2::new(0.3, 0.1), Vec2::new(0.3, 0.1)));
    }

    #[test]
    fn far_point_is_outside() {
        let h = ShamrockHole::reference();
        let r = h.bounding_radius() + 1e-9;
        for k in 0..36 {
            let p = r * Vec2::from_angle(k as f64 * PI / 18.0);
            assert!(!point_in_shamrock(&h, p, Vec2::default()));
        }
    }

    #[test]
    fn reciprocal_lengths_and_duality() {
        let l = lattice();
        let [b1, b2] = reciprocal_basis(&l);
        let want = 4.0 * PI / 3f64.sqrt();
        assert!((b1.norm() - want).abs() < 1e-12);
        assert!((b2.norm() - want).abs() < 1e-12);
        assert!(b1.dot(l.basis[1]).abs() < 1e-12);
        assert!((b1.dot(l.basis[0]) - 2.0 * PI).abs() < 1e-12);
        // reciprocal of reciprocal is the direct lattice scaled by (2π)²/(2π)
        let [c1, c2] = reciprocal_of(b1, b2);
        assert!((c1 - l.basis[0]).norm() < 1e-12);
        assert!((c2 - l.basis[1]).norm() < 1e-12);
    }

    #[test]
    fn degenerate_hole_gives_solid_cell() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::none(), 32).unwrap();
        assert!(cell.chi.iter().all(|&c| c == 1.0));
        assert_eq!(cell.fill_fraction, 1.0);
    }

    #[test]
    fn rejects_low_resolution_and_overlap() {
        assert!(build_unit_cell(&lattice(), &ShamrockHole::reference(), 8).is_err());
        let mut semi = ShamrockHole::reference();
        semi.convention = AxisConvention::Semi;
        assert!(build_unit_cell(&lattice(), &semi, 64).is_err());
    }

    #[test]
    fn reference_cell_is_valid() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::reference(), 128).unwrap();
        assert!(cell.fill_fraction > 0.0 && cell.fill_fraction < 1.0);
        assert!(cell.chi.iter().all(|&c| (0.0..=1.0).contains(&c)));
    }

    #[test]
    fn constant_field_has_only_dc() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::none(), 32).unwrap();
        let f = fourier_coefficients(&cell, (2.5, 1.0), [3, 3]).unwrap();
        for ((m, n), c) in f.iter() {
            if (m, n) == (0, 0) {
                assert!((c - C64::new(2.5, 0.0)).norm() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn nyquist_is_enforced() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::none(), 16).unwrap();
        assert!(fourier_coefficients(&cell, (1.0, 0.0), [8, 8]).is_err());
        assert!(fourier_coefficients(&cell, (1.0, 0.0), [7, 7]).is_ok());
    }

    #[test]
    fn pgm_export_has_header() {
        let cell = build_unit_cell(&lattice(), &ShamrockHole::reference(), 32).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cell.pgm");
        cell.write_pgm(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n32 32\n255\n"));
        assert_eq!(bytes.len(), "P5\n32 32\n255\n".len() + 32 * 32);
    }
}
