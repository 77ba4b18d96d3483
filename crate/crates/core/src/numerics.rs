//! Shared numeric kernels: dense Hermitian (generalized) eigensolves, 2D
//! discrete Fourier transforms, root bracketing and adaptive quadrature.
//!
//! Every routine here is single-threaded and deterministic. Parallelism is
//! applied by callers across independent problems (k-points, sweep values).

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative Hermiticity tolerance accepted on input matrices.
const HERMITIAN_TOL: f64 = 1e-10;

/// A dense Hermitian eigenproblem `A v = λ B v`, `B` defaulting to identity.
#[derive(Debug, Clone)]
pub struct HermitianProblem {
    pub matrix_a: Mat<C64>,
    pub matrix_b: Option<Mat<C64>>,
    pub n_wanted: usize,
    pub want_vectors: bool,
}

/// The lowest eigenpairs of a [`HermitianProblem`].
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `i` holds the eigenvector of `values[i]`, normalised so that
    /// `v† B v = 1`. Present only when vectors were requested.
    pub vectors: Option<Mat<C64>>,
}

impl HermitianProblem {
    pub fn standard(matrix_a: Mat<C64>, n_wanted: usize) -> Self {
        Self { matrix_a, matrix_b: None, n_wanted, want_vectors: false }
    }

    pub fn generalized(matrix_a: Mat<C64>, matrix_b: Mat<C64>, n_wanted: usize) -> Self {
        Self { matrix_a, matrix_b: Some(matrix_b), n_wanted, want_vectors: false }
    }

    pub fn with_vectors(mut self, want: bool) -> Self {
        self.want_vectors = want;
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix_a.nrows()
    }

    fn validate(&self) -> Result<()> {
        let n = self.matrix_a.nrows();
        if n == 0 || self.matrix_a.ncols() != n {
            return Err(Error::invalid("matrix A must be square and non-empty"));
        }
        if self.n_wanted == 0 || self.n_wanted > n {
            return Err(Error::invalid(format!(
                "n_wanted = {} must lie in 1..={n}",
                self.n_wanted
            )));
        }
        check_hermitian(&self.matrix_a, "A")?;
        if let Some(b) = &self.matrix_b {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::invalid("matrix B must match the shape of A"));
            }
            check_hermitian(b, "B")?;
        }
        Ok(())
    }
}

/// Largest entry of `|M - M†|` relative to the largest entry of `|M|`.
pub fn hermiticity_residual(m: &Mat<C64>) -> f64 {
    let n = m.nrows();
    let mut max_entry = 0.0f64;
    let mut max_diff = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let x = m[(i, j)];
            max_entry = max_entry.max(x.norm());
            max_diff = max_diff.max((x - m[(j, i)].conj()).norm());
        }
    }
    if max_entry == 0.0 {
        0.0
    } else {
        max_diff / max_entry
    }
}

fn check_hermitian(m: &Mat<C64>, name: &str) -> Result<()> {
    let r = hermiticity_residual(m);
    if !(r <= HERMITIAN_TOL) {
        return Err(Error::invalid(format!(
            "matrix {name} is not Hermitian (relative residual {r:.3e})"
        )));
    }
    Ok(())
}

/// Solves for the `n_wanted` lowest eigenpairs.
///
/// Generalized problems are reduced with the Cholesky factor `B = L L†` to
/// the standard problem `L⁻¹ A L⁻† y = λ y`, and eigenvectors are recovered
/// as `v = L⁻† y`, which makes them B-orthonormal.
pub fn hermitian_eigensolve(problem: &HermitianProblem) -> Result<Eigenpairs> {
    problem.validate()?;
    let n_wanted = problem.n_wanted;
    solve_selected(problem, |_| n_wanted)
}

/// All eigenpairs with eigenvalues in `[lo, hi]`, ascending. `n_wanted` is
/// ignored; an empty window yields empty results.
pub fn hermitian_eigensolve_window(problem: &HermitianProblem, lo: f64, hi: f64) -> Result<Eigenpairs> {
    if !(lo <= hi) {
        return Err(Error::invalid("eigenvalue window must satisfy lo <= hi"));
    }
    let mut p = problem.clone();
    p.n_wanted = p.dim().max(1);
    p.validate()?;
    let first = std::cell::Cell::new(0usize);
    let out = solve_selected(&p, |sorted| {
        first.set(sorted.partition_point(|&x| x < lo));
        sorted.partition_point(|&x| x <= hi)
    })?;
    let skip = first.get();
    let values = out.values[skip..].to_vec();
    let vectors = out.vectors.map(|v| v.subcols(skip, values.len()).to_owned());
    Ok(Eigenpairs { values, vectors })
}

/// Problems smaller than this are diagonalized densely by
/// [`hermitian_eigensolve_interior`].
const DENSE_LIMIT: usize = 1500;
const KRYLOV_BLOCK: usize = 8;
const KRYLOV_MAX: usize = 1600;
const RITZ_TOL: f64 = 1e-9;

/// All eigenpairs with eigenvalues in `[lo, hi]`, for large problems.
///
/// Uses shift-invert block Krylov iteration about the window centre: with
/// `K = A - σB` factored once as `LBLᵀ`, the operator `K⁻¹B` is
/// B-self-adjoint and maps eigenvalues near `σ` to the largest `|θ|`,
/// `θ = 1/(λ - σ)`. The basis grows until every Ritz value within twice the
/// window half-width of `σ` has converged. Small problems take the dense
/// path. Vectors are always returned, B-orthonormal.
pub fn hermitian_eigensolve_interior(problem: HermitianProblem, lo: f64, hi: f64) -> Result<Eigenpairs> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("eigenvalue window must be finite with lo < hi"));
    }
    let n = problem.dim();
    if n <= DENSE_LIMIT {
        return hermitian_eigensolve_window(&problem.with_vectors(true), lo, hi);
    }
    krylov_interior(problem, lo, hi)
}

fn krylov_interior(problem: HermitianProblem, lo: f64, hi: f64) -> Result<Eigenpairs> {
    let n = problem.dim();
    let mut problem = problem;
    problem.n_wanted = 1;
    problem.validate()?;
    let sigma = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let HermitianProblem { matrix_a: mut k, matrix_b, .. } = problem;
    match &matrix_b {
        Some(b) => {
            for j in 0..n {
                for i in 0..n {
                    k[(i, j)] -= b[(i, j)] * sigma;
                }
            }
        }
        None => (0..n).for_each(|i| k[(i, i)] -= sigma),
    }
    let factor = k.lblt(Side::Lower);
    drop(k);
    let apply_b = |x: &Mat<C64>| -> Mat<C64> {
        match &matrix_b {
            Some(b) => b * x,
            None => x.clone(),
        }
    };

    let cap = KRYLOV_MAX.min(n);
    let mut basis = Mat::<C64>::zeros(n, 0);
    let mut b_basis = Mat::<C64>::zeros(n, 0);
    // deterministic, generic start block
    let start = Mat::<C64>::from_fn(n, KRYLOV_BLOCK, |i, j| {
        let t = (i * 7919 + j * 104_729) as f64;
        C64::new((t * 0.618_033_988_7).sin(), (t * 0.414_213_562_3).cos())
    });
    let (block, b_block) = orthonormalize_block(&basis, &b_basis, start, &apply_b);
    append_cols(&mut basis, &block);
    append_cols(&mut b_basis, &b_block);
    let mut expanded = 0usize;
    // projected operator H = V† B K⁻¹ B V, filled block by block
    let mut h = Mat::<C64>::zeros(cap, cap);

    loop {
        let m = basis.ncols();
        let current = expanded..m;
        let mut w = b_basis.subcols(current.start, current.len()).to_owned();
        factor.solve_in_place(w.as_mut());
        let proj = b_basis.adjoint() * &w;
        for j in current.clone() {
            for i in 0..m {
                h[(i, j)] = proj[(i, j - current.start)];
                h[(j, i)] = proj[(i, j - current.start)].conj();
            }
        }
        expanded = m;
        let image = w.clone();
        let (next, b_next) = orthonormalize_block(&basis, &b_basis, w, &apply_b);
        let coupling = b_next.adjoint() * &image;

        // Rayleigh-Ritz on the expanded basis
        let hm = Mat::<C64>::from_fn(m, m, |i, j| 0.5 * (h[(i, j)] + h[(j, i)].conj()));
        let evd = hm
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::numerical(format!("projected eigendecomposition failed: {e:?}")))?;
        let theta = evd.S().column_vector();
        let y = evd.U();
        let mut wanted = Vec::new();
        let mut converged = true;
        for c in 0..m {
            let t = theta[c].re;
            if t.abs() * half < 0.5 {
                continue;
            }
            let tail = Mat::<C64>::from_fn(current.len(), 1, |r, _| y[(current.start + r, c)]);
            let res = if next.ncols() == 0 { 0.0 } else { (&coupling * &tail).norm_l2() };
            if res > RITZ_TOL * t.abs() {
                converged = false;
            }
            if t.abs() * half >= 1.0 {
                wanted.push(c);
            }
        }
        let exhausted = next.ncols() == 0 || m + next.ncols() > cap;
        if (converged && m >= 4 * KRYLOV_BLOCK) || exhausted {
            if !converged {
                return Err(Error::numerical(format!(
                    "interior eigensolve did not converge with {m} basis vectors"
                )));
            }
            let mut pairs: Vec<(f64, usize)> = wanted.iter().map(|&c| (sigma + 1.0 / theta[c].re, c)).collect();
            pairs.retain(|p| p.0 >= lo && p.0 <= hi);
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let coeffs = Mat::<C64>::from_fn(m, pairs.len(), |r, c| y[(r, pairs[c].1)]);
            let vectors = basis.subcols(0, m) * &coeffs;
            return Ok(Eigenpairs { values: pairs.iter().map(|p| p.0).collect(), vectors: Some(vectors) });
        }
        append_cols(&mut basis, &next);
        append_cols(&mut b_basis, &b_next);
    }
}

fn append_cols(dst: &mut Mat<C64>, src: &Mat<C64>) {
    let (n, m) = (dst.nrows(), dst.ncols());
    let k = src.ncols();
    dst.resize_with(n, m + k, |i, j| src[(i, j - m)]);
}

/// B-orthonormalizes `w` against `basis` and within itself: two rounds of
/// Gram-Schmidt followed by a Gram-matrix eigen step that drops dependent
/// directions. Returns the block and its image under `B`.
fn orthonormalize_block(
    basis: &Mat<C64>,
    b_basis: &Mat<C64>,
    mut w: Mat<C64>,
    apply_b: &impl Fn(&Mat<C64>) -> Mat<C64>,
) -> (Mat<C64>, Mat<C64>) {
    let scale = w.norm_l2().max(f64::MIN_POSITIVE);
    let mut bw = Mat::zeros(w.nrows(), 0);
    for _ in 0..2 {
        if basis.ncols() > 0 {
            let c = b_basis.adjoint() * &w;
            w -= basis * &c;
        }
        bw = apply_b(&w);
        let gram = w.adjoint() * &bw;
        let gram = Mat::<C64>::from_fn(gram.nrows(), gram.ncols(), |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)].conj()));
        let Ok(evd) = gram.self_adjoint_eigen(Side::Lower) else {
            return (Mat::zeros(w.nrows(), 0), Mat::zeros(w.nrows(), 0));
        };
        let s = evd.S().column_vector();
        let u = evd.U();
        let keep: Vec<usize> = (0..s.nrows()).filter(|&i| s[i].re > 1e-24 * scale * scale).collect();
        let t = Mat::<C64>::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])] / s[keep[c]].re.sqrt());
        w = &w * &t;
        bw = &bw * &t;
    }
    (w, bw)
}

/// Reduces, diagonalizes and keeps the lowest `count(sorted_values)` pairs.
fn solve_selected(problem: &HermitianProblem, count: impl Fn(&[f64]) -> usize) -> Result<Eigenpairs> {
    let (reduced, chol) = match &problem.matrix_b {
        None => (problem.matrix_a.clone(), None),
        Some(b) => {
            let llt = b
                .llt(Side::Lower)
                .map_err(|_| Error::invalid("matrix B is not positive definite"))?;
            let l = llt.L().to_owned();
            let mut x = problem.matrix_a.clone();
            l.solve_lower_triangular_in_place(x.as_mut());
            let mut y = x.adjoint().to_owned();
            l.solve_lower_triangular_in_place(y.as_mut());
            (y, Some(l))
        }
    };

    if !problem.want_vectors {
        let mut values = reduced
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::numerical(format!("eigenvalue iteration failed: {e:?}")))?;
        values.sort_by(f64::total_cmp);
        let n = count(&values);
        values.truncate(n);
        return Ok(Eigenpairs { values, vectors: None });
    }

    let evd = reduced
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| s[i].re.total_cmp(&s[j].re));
    let sorted: Vec<f64> = order.iter().map(|&i| s[i].re).collect();
    let n = count(&sorted);
    order.truncate(n);

    let values = sorted[..n].to_vec();
    let mut vectors = Mat::<C64>::from_fn(u.nrows(), n, |r, c| u[(r, order[c])]);
    if let Some(l) = chol {
        l.adjoint().solve_upper_triangular_in_place(vectors.as_mut());
    }
    Ok(Eigenpairs { values, vectors: Some(vectors) })
}

/// Finds a root of `f` on `[lo, hi]` by bisection.
///
/// Returns once the bracket is narrower than `tol` or `|f(x)| <= tol`.
pub fn bracketed_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && tol > 0.0) {
        return Err(Error::invalid("bracket and tolerance must be finite, tol > 0"));
    }
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::numerical(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e}"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 || (hi - lo) < tol {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Forward 2D DFT of a row-major `n1 × n2` array (index `i * n2 + j`),
/// normalised by `1 / (n1 n2)`:
/// `c[m, n] = (1/N) Σ f[i, j] exp(-2πi (m i / n1 + n j / n2))`.
pub fn fft2_forward(data: &[C64], n1: usize, n2: usize) -> Vec<C64> {
    let mut out = fft2(data, n1, n2, false);
    let scale = 1.0 / (n1 * n2) as f64;
    out.iter_mut().for_each(|x| *x *= scale);
    out
}

/// Unnormalised inverse 2D DFT: `f[i, j] = Σ c[m, n] exp(+2πi (m i / n1 + n j / n2))`.
pub fn fft2_inverse(data: &[C64], n1: usize, n2: usize) -> Vec<C64> {
    fft2(data, n1, n2, true)
}

fn fft2(data: &[C64], n1: usize, n2: usize, inverse: bool) -> Vec<C64> {
    assert_eq!(data.len(), n1 * n2, "grid size mismatch");
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(n2), planner.plan_fft_inverse(n1))
    } else {
        (planner.plan_fft_forward(n2), planner.plan_fft_forward(n1))
    };
    let mut buf = data.to_vec();
    for row in buf.chunks_exact_mut(n2) {
        row_fft.process(row);
    }
    let mut column = vec![C64::new(0.0, 0.0); n1];
    for j in 0..n2 {
        for i in 0..n1 {
            column[i] = buf[i * n2 + j];
        }
        col_fft.process(&mut column);
        for i in 0..n1 {
            buf[i * n2 + j] = column[i];
        }
    }
    buf
}

// Gauss–Kronrod 7/15 nodes and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate, error estimate, and the roundoff level `50 ε ∫|f|`
/// below which the error estimate carries no information.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let (left, right) = (f(center - dx), f(center + dx));
        let pair = left + right;
        abs_sum += w * (left.abs() + right.abs());
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (integral, err, 50.0 * f64::EPSILON * abs_sum * half.abs())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// `breakpoints` seeds the initial partition, which helps with narrow peaks.
/// Converges when the summed error estimate, less each segment's roundoff
/// level, drops below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if !(a < b) {
        return Err(Error::invalid("integration bounds must satisfy a < b"));
    }
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    // (lo, hi, integral, error beyond roundoff, raw error)
    let segment = |lo: f64, hi: f64| {
        let (i, e, r) = gk15(&f, lo, hi);
        (lo, hi, i, (e - r).max(0.0), e)
    };
    let mut segments: Vec<(f64, f64, f64, f64, f64)> = cuts.windows(2).map(|w| segment(w[0], w[1])).collect();

    const MAX_SEGMENTS: usize = 20_000;
    loop {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        let raw: f64 = segments.iter().map(|s| s.4).sum();
        if !total.is_finite() {
            return Err(Error::numerical("integrand produced a non-finite value"));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::numerical(format!(
                "quadrature did not converge: estimate {total:.6e} with error {raw:.3e}"
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let (lo, hi, ..) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::numerical("quadrature interval underflow"));
        }
        segments.push(segment(lo, mid));
        segments.push(segment(mid, hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_mat(rows: &[&[f64]]) -> Mat<C64> {
        Mat::from_fn(rows.len(), rows.len(), |i, j| C64::new(rows[i][j], 0.0))
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let a = real_mat(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let e = hermitian_eigensolve(&HermitianProblem::standard(a, 3)).unwrap();
        for (v, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let a = real_mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = hermitian_eigensolve(&HermitianProblem::standard(a, 2)).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = real_mat(&[&[0.0, 1.0], &[2.0, 0.0]]);
        let err = hermitian_eigensolve(&HermitianProblem::standard(a, 1)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_indefinite_mass() {
        let a = real_mat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = real_mat(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let err = hermitian_eigensolve(&HermitianProblem::generalized(a, b, 1)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_too_many_wanted() {
        let a = real_mat(&[&[1.0]]);
        assert!(hermitian_eigensolve(&HermitianProblem::standard(a, 2)).is_err());
    }

    #[test]
    fn window_selects_interior_values() {
        let a = Mat::<C64>::from_fn(5, 5, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) });
        let e = hermitian_eigensolve_window(&HermitianProblem::standard(a.clone(), 1).with_vectors(true), 1.5, 3.0)
            .unwrap();
        assert_eq!(e.values, vec![2.0, 3.0]);
        let v = e.vectors.unwrap();
        assert_eq!(v.ncols(), 2);
        assert!((v[(2, 0)].norm() - 1.0).abs() < 1e-12);
        let none = hermitian_eigensolve_window(&HermitianProblem::standard(a, 1), 10.0, 11.0).unwrap();
        assert!(none.values.is_empty());
    }

    #[test]
    fn krylov_interior_matches_dense_window() {
        // chain Laplacian with a random Hermitian perturbation, mildly varying mass
        let n = 300;
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x = Mat::<C64>::from_fn(n, n, |_, _| C64::new(next(), next()));
        let a = Mat::<C64>::from_fn(n, n, |i, j| {
            let lap = match i.abs_diff(j) {
                0 => 2.0,
                1 => -1.0,
                _ => 0.0,
            };
            C64::new(lap, 0.0) + 1e-3 * (x[(i, j)] + x[(j, i)].conj())
        });
        let b = Mat::<C64>::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => C64::new(1.0 + 0.3 * (i as f64 / n as f64), 0.0),
            1 => C64::new(0.05, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let p = HermitianProblem::generalized(a.clone(), b.clone(), 1).with_vectors(true);
        let dense = hermitian_eigensolve_window(&p, 1.0, 1.2).unwrap();
        let sparse = krylov_interior(p, 1.0, 1.2).unwrap();
        assert!(dense.values.len() >= 3);
        assert_eq!(dense.values.len(), sparse.values.len(), "{:?} vs {:?}", dense.values, sparse.values);
        for (x, y) in dense.values.iter().zip(&sparse.values) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        let v = sparse.vectors.unwrap();
        let gram = v.adjoint() * &b * &v;
        for (i, &lam) in sparse.values.iter().enumerate() {
            let r = &a * v.col(i) - (&b * v.col(i)) * lam;
            assert!(r.norm_l2() < 1e-7, "residual {}", r.norm_l2());
            assert!((gram[(i, i)].re - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn generalized_vectors_are_b_orthonormal() {
        let a = Mat::<C64>::from_fn(4, 4, |i, j| {
            let base = C64::new((i + j) as f64 * 0.3, (i as f64 - j as f64) * 0.2);
            if i == j {
                C64::new(2.0 + i as f64, 0.0)
            } else {
                base
            }
        });
        let b = Mat::<C64>::from_fn(4, 4, |i, j| {
            if i == j {
                C64::new(3.0, 0.0)
            } else {
                C64::new(0.1, 0.05 * (j as f64 - i as f64))
            }
        });
        let e = hermitian_eigensolve(&HermitianProblem::generalized(a.clone(), b.clone(), 4).with_vectors(true))
            .unwrap();
        let v = e.vectors.unwrap();
        let gram = v.adjoint() * &b * &v;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - C64::new(want, 0.0)).norm() < 1e-10);
            }
            let residual = &a * v.col(i) - (&b * v.col(i)) * e.values[i];
            assert!(residual.norm_l2() < 1e-10);
        }
    }

    #[test]
    fn bisection_simple_roots() {
        let r = bracketed_root(|x| x - 1.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 1.0).abs() < 1e-13);
        let r = bracketed_root(f64::cos, 1.0, 2.0, 1e-13).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn bisection_requires_sign_change() {
        assert!(matches!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::Numerical(_))));
    }

    #[test]
    fn fft_roundtrip() {
        let (n1, n2) = (6, 10);
        let data: Vec<C64> = (0..n1 * n2).map(|i| C64::new((i as f64 * 0.37).sin(), 0.0)).collect();
        let back = fft2_inverse(&fft2_forward(&data, n1, n2), n1, n2);
        for (x, y) in data.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn quadrature_of_lorentzian() {
        // ∫ 1/(1+x²) over [-1e3, 1e3] = 2 atan(1e3)
        let got = adaptive_integrate(|x| 1.0 / (1.0 + x * x), -1e3, 1e3, &[0.0], 1e-12, 0.0).unwrap();
        assert!((got - 2.0 * 1e3f64.atan()).abs() < 1e-10);
    }
}
