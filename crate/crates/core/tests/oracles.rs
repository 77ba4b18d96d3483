#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;
use omc_core::bands::Polarization;
use omc_core::geometry::{build_unit_cell, fourier_coefficients, point_in_shamrock, LatticeSpec, ShamrockHole, Vec2};
use omc_core::numerics::{hermitian_eigensolve, HermitianProblem};
use omc_core::phononic::{ElasticMaterial, ElasticOperator};
use omc_core::photonic::{effective_index, PhotonicMaterial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice() -> LatticeSpec {
    LatticeSpec::hexagonal(300e-9, 195e-9).unwrap()
}

#[test]
fn monte_carlo_fill_matches_raster() {
    let l = lattice();
    let hole = ShamrockHole::reference();
    let cell = build_unit_cell(&l, &hole, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 200_000;
    let [a1, a2] = l.basis;
    let mut solid = 0usize;
    for _ in 0..n {
        let (s, t): (f64, f64) = (rng.random(), rng.random());
        let p = s * a1 + t * a2;
        // the hole repeats on every lattice site; test the nearest few
        let inside = (-1..=1).any(|i| (-1..=1).any(|j| point_in_shamrock(&hole, p, i as f64 * a1 + j as f64 * a2)));
        solid += usize::from(!inside);
    }
    let mc = solid as f64 / n as f64;
    let sigma = (mc * (1.0 - mc) / n as f64).sqrt();
    assert!((mc - cell.fill_fraction).abs() < 4.0 * sigma + 2e-3, "mc {mc} raster {}", cell.fill_fraction);
}

#[test]
fn fft_coefficients_match_direct_sum() {
    let cell = build_unit_cell(&lattice(), &ShamrockHole::reference(), 32).unwrap();
    let f = fourier_coefficients(&cell, (12.0, 1.0), [4, 4]).unwrap();
    let values = cell.mapped((12.0, 1.0));
    for (m, n) in [(0, 0), (1, 0), (0, 1), (-2, 3), (4, -4)] {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..cell.n1 {
            for j in 0..cell.n2 {
                let phase = -2.0 * PI * (m as f64 * i as f64 / cell.n1 as f64 + n as f64 * j as f64 / cell.n2 as f64);
                acc += values[i * cell.n2 + j] * C64::from_polar(1.0, phase);
            }
        }
        acc /= (cell.n1 * cell.n2) as f64;
        assert!((acc - f.get(m, n)).norm() < 1e-12, "({m},{n})");
    }
    assert!((f.get(0, 0).re - (1.0 + 11.0 * cell.fill_fraction)).abs() < 1e-12);
}

#[test]
fn doubling_resolution_changes_little() {
    let l = lattice();
    let hole = ShamrockHole::reference();
    let coarse = build_unit_cell(&l, &hole, 128).unwrap();
    let fine = build_unit_cell(&l, &hole, 256).unwrap();
    assert!((coarse.fill_fraction - fine.fill_fraction).abs() < 2e-3);
    let fc = fourier_coefficients(&coarse, (1.0, 0.0), [3, 3]).unwrap();
    let ff = fourier_coefficients(&fine, (1.0, 0.0), [3, 3]).unwrap();
    for ((m, n), v) in fc.iter() {
        assert!((v - ff.get(m, n)).norm() < 3e-3, "({m},{n})");
    }
}

/// Number of eigenvalues below `x` from the inertia of `A - x I`.
fn count_below(a: &Mat<C64>, x: f64) -> usize {
    let n = a.nrows();
    let mut m: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] - if i == j { x } else { 0.0 }).collect()).collect();
    let mut negative = 0;
    for k in 0..n {
        let d = m[k][k].re;
        if d < 0.0 {
            negative += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / d;
            for j in k..n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
        }
    }
    negative
}

#[test]
fn dense_eigenvalues_match_inertia_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 8;
    let mut a = Mat::<C64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = C64::new(rng.random_range(-2.0..2.0), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let values = hermitian_eigensolve(&HermitianProblem::standard(a.clone(), n)).unwrap().values;
    for (k, &v) in values.iter().enumerate() {
        assert_eq!(count_below(&a, v - 1e-9), k);
        assert_eq!(count_below(&a, v + 1e-9), k + 1);
    }
    let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
    assert!((values.iter().sum::<f64>() - trace).abs() < 1e-12);
}

#[test]
fn generalized_eigenpairs_satisfy_the_pencil() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    let mut a = Mat::<C64>::zeros(n, n);
    let mut l = Mat::<C64>::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = C64::new(rng.random_range(0.5..2.0), 0.0);
        for j in 0..i {
            l[(i, j)] = C64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
        }
        for j in i..n {
            let z = C64::new(rng.random_range(-1.0..1.0), if i == j { 0.0 } else { rng.random_range(-1.0..1.0) });
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let b = &l * l.adjoint();
    let pairs = hermitian_eigensolve(&HermitianProblem::generalized(a.clone(), b.clone(), n).with_vectors(true)).unwrap();
    let v = pairs.vectors.unwrap();
    for (k, &lambda) in pairs.values.iter().enumerate() {
        let norm = (0..n)
            .map(|i| (0..n).map(|j| (a[(i, j)] - b[(i, j)] * lambda) * v[(j, k)]).sum::<C64>().norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(norm < 1e-10, "residual {norm}");
    }
}

#[test]
fn homogeneous_plate_follows_christoffel_velocities() {
    let m = ElasticMaterial::gaas();
    let cell = build_unit_cell(&lattice(), &ShamrockHole::none(), 32).unwrap();
    let op = ElasticOperator::new(&cell, &m, 3).unwrap();
    let vt = m.transverse_velocity();
    let q = 0.3;
    // along a cube axis the Christoffel tensor is diagonal
    let along_axis = [(m.c44 / m.rho).sqrt(), (m.c11 / m.rho).sqrt()];
    // along the diagonal it has eigenvalues (c11 + c44 ± (c12 + c44)) / 2ρ
    let diag = [
        ((m.c11 - m.c12) / (2.0 * m.rho)).sqrt(),
        ((m.c11 + m.c12 + 2.0 * m.c44) / (2.0 * m.rho)).sqrt(),
    ];
    for (dir, speeds) in [(Vec2::new(1.0, 0.0), along_axis), ((0.5f64).sqrt() * Vec2::new(1.0, 1.0), diag)] {
        let f = op.frequencies(q * dir, 2).unwrap();
        for (got, v) in f.iter().zip(speeds) {
            let want = q * v / (2.0 * PI * vt);
            assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
        }
    }
}

#[test]
fn effective_index_solves_even_te_slab_equation() {
    let mat = PhotonicMaterial::reference();
    let f = mat.target_freq;
    let n_eff = effective_index(&mat, f, Polarization::TE).unwrap();
    // tan(κ d/2) = γ/κ on the fundamental branch, solved by plain bisection
    let k0 = 2.0 * PI * f;
    let g = |x: f64| {
        let kappa = k0 * (mat.n_bulk * mat.n_bulk - x * x).sqrt();
        let gamma = k0 * (x * x - 1.0).sqrt();
        (0.5 * kappa * mat.d_over_a).tan() - gamma / kappa
    };
    let lo_u = |x: f64| 0.5 * k0 * (mat.n_bulk * mat.n_bulk - x * x).sqrt() * mat.d_over_a;
    let (mut lo, mut hi) = (1.0 + 1e-12, mat.n_bulk - 1e-12);
    while lo_u(lo) >= PI / 2.0 {
        lo = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (g(lo) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((n_eff - lo).abs() < 1e-9, "{n_eff} vs {lo}");
    assert!(n_eff > 1.0 && n_eff < mat.n_bulk);
}
