//! Plane-wave bases shared by the photonic and elastic assemblers.
//!
//! Unit cells use the hexagonal shell `max(|m|, |n|, |m + n|) <= cutoff` of
//! the 120° reciprocal basis, which is closed under every point operation
//! of the hexagonal lattice. Supercells use the same shell folded into
//! their smaller zone, so a defect-free supercell decouples exactly into
//! shifted copies of the unit-cell problem.

use crate::error::{Error, Result};
use crate::geometry::{fourier_coefficients, FourierField, UnitCellGeometry, Vec2};
use crate::numerics::{fft2_inverse, C64};

/// Default plane-wave shell index for primitive cells.
pub const DEFAULT_CUTOFF: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    /// Reciprocal indices `(p, q)` of `G = p B1 + q B2` in the cell's basis.
    pub indices: Vec<(i64, i64)>,
    pub max_index: [usize; 2],
}

/// Number of plane waves in the primitive hexagonal shell of index `cutoff`.
pub fn shell_size(cutoff: usize) -> usize {
    3 * cutoff * (cutoff + 1) + 1
}

/// Reciprocal vectors of the hexagonal lattice sit at 120°, so the six
/// nearest neighbours are `±b1`, `±b2` and `±(b1 + b2)`.
fn hexagonal_shell(cutoff: usize) -> Vec<(i64, i64)> {
    let c = cutoff as i64;
    let mut out = Vec::with_capacity(shell_size(cutoff));
    for m in -c..=c {
        for n in -c..=c {
            if (m - n).abs() <= c {
                out.push((m, n));
            }
        }
    }
    out
}

/// Centered residue range `|r| <= L/2` for a folding factor `L`.
fn residues(fold: usize) -> std::ops::RangeInclusive<i64> {
    let h = (fold / 2) as i64;
    -h..=h
}

impl PlaneWaveBasis {
    /// Hexagonal shell folded into a cell that holds `folding` primitive
    /// periods along each axis.
    pub fn folded(cutoff: usize, folding: [usize; 2]) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::invalid("plane-wave cutoff must be at least 1"));
        }
        if folding.contains(&0) {
            return Err(Error::invalid("folding factors must be positive"));
        }
        let [l1, l2] = folding.map(|f| f as i64);
        let mut indices = Vec::new();
        for (m, n) in hexagonal_shell(cutoff) {
            for i in residues(folding[0]) {
                for j in residues(folding[1]) {
                    indices.push((m * l1 + i, n * l2 + j));
                }
            }
        }
        indices.sort_unstable();
        indices.dedup();
        let max_index = [
            indices.iter().map(|x| x.0.unsigned_abs() as usize).max().unwrap_or(0),
            indices.iter().map(|x| x.1.unsigned_abs() as usize).max().unwrap_or(0),
        ];
        Ok(Self { indices, max_index })
    }

    pub fn for_cell(cell: &UnitCellGeometry, cutoff: usize) -> Result<Self> {
        Self::folded(cutoff, cell.folding)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Cartesian `k + G` for each basis vector.
    pub fn shifted_vectors(&self, reciprocal: [Vec2; 2], k: Vec2) -> Vec<Vec2> {
        self.indices
            .iter()
            .map(|&(p, q)| k + p as f64 * reciprocal[0] + q as f64 * reciprocal[1])
            .collect()
    }

    /// Index range needed for the Toeplitz coefficients `c(G - G')`.
    pub fn difference_range(&self) -> [usize; 2] {
        [2 * self.max_index[0], 2 * self.max_index[1]]
    }

    /// Fourier coefficients of a mapped indicator covering all basis differences.
    pub fn material_coefficients(&self, cell: &UnitCellGeometry, values: (f64, f64)) -> Result<FourierField> {
        fourier_coefficients(cell, values, self.difference_range())
    }

    /// Places `coefficients[g] * weight[g]` at grid frequencies and returns the
    /// real-space field `Σ c_G exp(i G·r)` sampled on the cell grid. The Bloch
    /// phase `exp(i k·r)` is omitted.
    pub fn synthesize(&self, cell: &UnitCellGeometry, coefficients: impl Iterator<Item = C64>) -> Vec<C64> {
        let (n1, n2) = (cell.n1 as i64, cell.n2 as i64);
        let mut spectrum = vec![C64::new(0.0, 0.0); cell.n1 * cell.n2];
        for (&(p, q), c) in self.indices.iter().zip(coefficients) {
            let idx = p.rem_euclid(n1) as usize * cell.n2 + q.rem_euclid(n2) as usize;
            spectrum[idx] += c;
        }
        fft2_inverse(&spectrum, cell.n1, cell.n2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_counts() {
        for c in 1..6 {
            assert_eq!(hexagonal_shell(c).len(), shell_size(c));
        }
        assert_eq!(PlaneWaveBasis::folded(7, [1, 1]).unwrap().len(), 169);
    }

    #[test]
    fn shell_is_closed_under_sixfold_rotation() {
        use crate::geometry::{reciprocal_basis, LatticeSpec};
        let [b1, b2] = reciprocal_basis(&LatticeSpec::hexagonal(1.0, 0.5).unwrap());
        // b1 -> b1 + b2 and b2 -> -b1 under a 60° rotation
        let r = b1.rotated(std::f64::consts::PI / 3.0);
        assert!((r - (b1 + b2)).norm() < 1e-12);
        let shell = hexagonal_shell(4);
        for &(m, n) in &shell {
            assert!(shell.contains(&(m - n, m)));
        }
    }

    #[test]
    fn folded_basis_is_disjoint_union_for_odd_folding() {
        let unit = PlaneWaveBasis::folded(3, [1, 1]).unwrap();
        let sup = PlaneWaveBasis::folded(3, [1, 5]).unwrap();
        assert_eq!(sup.len(), 5 * unit.len());
    }

    #[test]
    fn basis_is_inversion_symmetric() {
        for folding in [[1, 1], [1, 7], [10, 7]] {
            let b = PlaneWaveBasis::folded(2, folding).unwrap();
            for &(p, q) in &b.indices {
                assert!(b.indices.binary_search(&(-p, -q)).is_ok());
            }
        }
    }
}
