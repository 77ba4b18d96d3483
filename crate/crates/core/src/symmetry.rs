//! Point-group operations of the hexagonal wallpaper groups, the Γ-M-K-Γ
//! path through the effective irreducible zone, and band symmetry checks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{reciprocal_basis, LatticeSpec, Vec2};

/// Relative tolerance under which two frequencies are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpLabel {
    E,
    C3,
    C3Sq,
    C6,
    C6Inv,
    /// Twofold rotation, which is inversion in the plane.
    Inversion,
    /// Mirror line number (1-based).
    Mirror(u8),
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpLabel::E => write!(f, "E"),
            OpLabel::C3 => write!(f, "C3"),
            OpLabel::C3Sq => write!(f, "C3^2"),
            OpLabel::C6 => write!(f, "C6"),
            OpLabel::C6Inv => write!(f, "C6^5"),
            OpLabel::Inversion => write!(f, "i"),
            OpLabel::Mirror(k) => write!(f, "sigma{k}"),
        }
    }
}

/// An orthogonal 2×2 point operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointOp {
    pub matrix: [[f64; 2]; 2],
    pub label: OpLabel,
}

impl PointOp {
    fn rotation(angle: f64, label: OpLabel) -> Self {
        let (s, c) = angle.sin_cos();
        Self { matrix: [[c, -s], [s, c]], label }
    }

    /// Reflection across the line through the origin at `angle`.
    fn mirror(angle: f64, index: u8) -> Self {
        let (s, c) = (2.0 * angle).sin_cos();
        Self { matrix: [[c, s], [s, -c]], label: OpLabel::Mirror(index) }
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = self.matrix;
        Vec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }

    pub fn compose(&self, other: &PointOp) -> [[f64; 2]; 2] {
        let (a, b) = (self.matrix, other.matrix);
        let mut out = [[0.0; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let m = self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `max |MᵀM - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let m = self.matrix;
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let v = m[0][r] * m[0][c] + m[1][r] * m[1][c];
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceGroup {
    P3m1,
    P6mm,
}

impl FromStr for SpaceGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p3m1" => Ok(SpaceGroup::P3m1),
            "p6mm" => Ok(SpaceGroup::P6mm),
            other => Err(Error::invalid(format!("unknown space group `{other}`"))),
        }
    }
}

/// Point operations of the group, for the hexagonal lattice with
/// `a1 = (1, 0)`. p3m1 mirrors run perpendicular to the lattice vectors
/// (at 30°, 90°, 150°); p6mm adds inversion and the mirrors along the
/// lattice vectors.
pub fn point_group(group: SpaceGroup) -> Vec<PointOp> {
    let mut ops = vec![
        PointOp::rotation(0.0, OpLabel::E),
        PointOp::rotation(2.0 * PI / 3.0, OpLabel::C3),
        PointOp::rotation(4.0 * PI / 3.0, OpLabel::C3Sq),
        PointOp::mirror(PI / 6.0, 1),
        PointOp::mirror(PI / 2.0, 2),
        PointOp::mirror(5.0 * PI / 6.0, 3),
    ];
    if group == SpaceGroup::P6mm {
        ops.extend([
            PointOp::rotation(PI, OpLabel::Inversion),
            PointOp::rotation(PI / 3.0, OpLabel::C6),
            PointOp::rotation(5.0 * PI / 3.0, OpLabel::C6Inv),
            PointOp::mirror(0.0, 4),
            PointOp::mirror(PI / 3.0, 5),
            PointOp::mirror(2.0 * PI / 3.0, 6),
        ]);
    }
    ops
}

/// A labelled high-symmetry vertex of a k-path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KVertex {
    pub label: String,
    /// Cartesian coordinates in units of `1/a`.
    pub k: Vec2,
    /// Index of the vertex in the sample list.
    pub sample_index: usize,
}

/// Sampled path through reciprocal space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPath {
    pub vertices: Vec<KVertex>,
    /// Cartesian k-points in units of `1/a`.
    pub points: Vec<Vec2>,
    /// Cumulative Cartesian path length at each point.
    pub path_length: Vec<f64>,
}

impl KPath {
    /// Builds a path through `vertices` with `samples_per_segment` points per
    /// segment (the end vertex of the last segment is appended).
    pub fn through(vertices: &[(&str, Vec2)], samples_per_segment: usize) -> Result<Self> {
        if samples_per_segment < 1 || vertices.len() < 2 {
            return Err(Error::invalid("a path needs two vertices and at least one sample per segment"));
        }
        let mut points = Vec::new();
        let mut labelled = Vec::new();
        for w in vertices.windows(2) {
            let (la, ka) = w[0];
            labelled.push(KVertex { label: la.to_string(), k: ka, sample_index: points.len() });
            for s in 0..samples_per_segment {
                let t = s as f64 / samples_per_segment as f64;
                points.push(ka + t * (w[1].1 - ka));
            }
        }
        let (l_end, k_end) = vertices[vertices.len() - 1];
        labelled.push(KVertex { label: l_end.to_string(), k: k_end, sample_index: points.len() });
        points.push(k_end);
        let mut path_length = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                acc += (*p - points[i - 1]).norm();
            }
            path_length.push(acc);
        }
        Ok(Self { vertices: labelled, points, path_length })
    }

    /// Path made of explicit points with no labelled vertices beyond the ends.
    pub fn from_points(points: Vec<Vec2>) -> Self {
        let mut path_length = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                acc += (*p - points[i - 1]).norm();
            }
            path_length.push(acc);
        }
        Self { vertices: Vec::new(), points, path_length }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label_at(&self, index: usize) -> Option<&str> {
        self.vertices.iter().rev().find(|v| v.sample_index == index).map(|v| v.label.as_str())
    }

    /// CSV with columns `index,kx,ky,path_length,label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,kx,ky,path_length,label\n");
        for (i, (p, l)) in self.points.iter().zip(&self.path_length).enumerate() {
            out.push_str(&format!("{i},{},{},{},{}\n", p.x, p.y, l, self.label_at(i).unwrap_or("")));
        }
        out
    }
}

/// High-symmetry points Γ, M (half a reciprocal vector) and K (zone corner).
pub fn high_symmetry_points(lattice: &LatticeSpec) -> [(&'static str, Vec2); 3] {
    let [b1, b2] = reciprocal_basis(lattice);
    [
        ("G", Vec2::default()),
        ("M", 0.5 * b1),
        ("K", (1.0 / 3.0) * (2.0 * b1 + b2)),
    ]
}

/// Γ→M→K→Γ through the effective (p6mm) irreducible zone.
pub fn irbz_path(lattice: &LatticeSpec, samples_per_segment: usize) -> Result<KPath> {
    if samples_per_segment < 2 {
        return Err(Error::invalid("samples_per_segment must be at least 2"));
    }
    let [g, m, k] = high_symmetry_points(lattice);
    KPath::through(&[g, m, k, g], samples_per_segment)
}

/// Uniform `n × n` Monkhorst-style grid over the full first zone
/// (fractional coordinates `(i/n, j/n)` of the reciprocal basis).
pub fn zone_grid(lattice: &LatticeSpec, n: usize) -> Vec<Vec2> {
    let [b1, b2] = reciprocal_basis(lattice);
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pts.push((i as f64 / n as f64) * b1 + (j as f64 / n as f64) * b2);
        }
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeReversalReport {
    /// Relative deviation per band.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// Bands whose deviation exceeds the tolerance.
    pub failing_bands: Vec<usize>,
    pub pass: bool,
}

/// Compares frequencies at `k` and `-k` band by band.
pub fn check_time_reversal(at_k: &[f64], at_minus_k: &[f64], tol: f64) -> Result<TimeReversalReport> {
    compare_spectra(at_k, at_minus_k, tol)
}

/// Band-by-band relative comparison of two sorted spectra.
pub fn compare_spectra(a: &[f64], b: &[f64], tol: f64) -> Result<TimeReversalReport> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("band counts differ: {} vs {}", a.len(), b.len())));
    }
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = (scale * 1e-12).max(f64::MIN_POSITIVE);
    let deviations: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .collect();
    let failing_bands: Vec<usize> =
        deviations.iter().enumerate().filter(|(_, d)| **d > tol).map(|(i, _)| i).collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(TimeReversalReport { pass: failing_bands.is_empty(), deviations, max_deviation, failing_bands })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> bool {
        (0..2).all(|r| (0..2).all(|c| (a[r][c] - b[r][c]).abs() < 1e-12))
    }

    const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn c3_cubed_is_identity() {
        let ops = point_group(SpaceGroup::P3m1);
        let c3 = ops.iter().find(|o| o.label == OpLabel::C3).unwrap();
        let c3sq = PointOp { matrix: c3.compose(c3), label: OpLabel::C3Sq };
        assert!(close(c3sq.compose(c3), IDENTITY));
    }

    #[test]
    fn mirrors_square_to_identity() {
        for op in point_group(SpaceGroup::P6mm).iter().filter(|o| matches!(o.label, OpLabel::Mirror(_))) {
            assert!(close(op.compose(op), IDENTITY));
            assert!((op.determinant() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn group_orders_and_closure() {
        for (g, order) in [(SpaceGroup::P3m1, 6), (SpaceGroup::P6mm, 12)] {
            let ops = point_group(g);
            assert_eq!(ops.len(), order);
            for a in &ops {
                assert!(a.orthogonality_residual() < 1e-12);
                for b in &ops {
                    let prod = a.compose(b);
                    assert!(ops.iter().any(|c| close(c.matrix, prod)), "{} * {} not closed", a.label, b.label);
                }
            }
        }
    }

    #[test]
    fn unknown_group_is_rejected() {
        assert!("p4mm".parse::<SpaceGroup>().is_err());
        assert_eq!("P3M1".parse::<SpaceGroup>().unwrap(), SpaceGroup::P3m1);
    }

    #[test]
    fn path_geometry() {
        let lattice = LatticeSpec::hexagonal(1.0, 1.0).unwrap();
        let path = irbz_path(&lattice, 8).unwrap();
        assert_eq!(path.len(), 3 * 8 + 1);
        assert_eq!(path.points[0], Vec2::default());
        assert_eq!(*path.points.last().unwrap(), Vec2::default());
        let gm = path.vertices[1].k.norm();
        let mk = (path.vertices[2].k - path.vertices[1].k).norm();
        assert!((gm / mk - 3f64.sqrt()).abs() < 1e-12);
        assert!(path.path_length.windows(2).all(|w| w[1] > w[0]));
        assert!(irbz_path(&lattice, 1).is_err());
    }

    #[test]
    fn kpath_csv_columns() {
        let lattice = LatticeSpec::hexagonal(1.0, 1.0).unwrap();
        let csv = irbz_path(&lattice, 2).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,kx,ky,path_length,label");
        assert_eq!(lines.len(), 1 + 7);
        assert!(lines[1].ends_with(",G"));
        assert!(lines[3].ends_with(",M"));
        assert!(lines[7].ends_with(",G"));
    }

    #[test]
    fn time_reversal_identical_and_failing() {
        let a = [0.1, 0.2, 0.3];
        let r = check_time_reversal(&a, &a, 1e-8).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_deviation, 0.0);

        let tol = 1e-6;
        let mut b = a;
        b[1] *= 1.0 + 2.0 * tol;
        let r = check_time_reversal(&a, &b, tol).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failing_bands, vec![1]);
        assert!(check_time_reversal(&a, &a[..2], tol).is_err());
    }
}
