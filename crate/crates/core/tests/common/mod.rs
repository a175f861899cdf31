//! Independent oracles and property bodies shared by the integration tests
//! and the acceptance runner. Nothing here calls the log-domain code paths.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rindler_entropy::accel::{unruh_apply, AccelerationParam, FockCutoff};
use rindler_entropy::matrix::{DenseMatrix, SparseSymMatrix};
use rindler_entropy::spectral::{self, partial_trace_inertial, TruncatedDensityMatrix};

pub const PROPERTY_CASES: u32 = 1000;
/// Fixed so property runs are reproducible.
pub const PROPERTY_SEED: proptest::test_runner::RngSeed = proptest::test_runner::RngSeed::Fixed(0x5eed);

pub fn acc(lambda: f64) -> AccelerationParam {
    AccelerationParam::from_lambda(lambda).unwrap()
}

/// `(tanh r)^(2n) / cosh^2 r` by direct powers.
pub fn weight(lambda: f64, n: usize) -> f64 {
    lambda.powi(2 * n as i32) * (1.0 - lambda * lambda)
}

/// Eigenvalues via nalgebra, sorted descending.
///
/// nalgebra's symmetric QR produces NaN on matrices with many exactly zero
/// rows, so it is run on `A + s I` with `s = 1 + ||A||_F` and shifted back.
pub fn nalgebra_eigs(m: &DenseMatrix) -> Vec<f64> {
    let d = m.dim();
    let mat = DMatrix::from_fn(d, d, |i, j| m.get(i, j));
    let shift = 1.0 + mat.norm();
    let shifted = &mat + DMatrix::<f64>::identity(d, d) * shift;
    let mut e: Vec<f64> = shifted.symmetric_eigenvalues().iter().map(|v| v - shift).collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// Entrywise map `(row, col) -> value` over the global index `bits * fock_dim + fock`.
pub type Entries = BTreeMap<(usize, usize), f64>;

fn put(m: &mut Entries, fd: usize, (ba, na): (usize, usize), (bb, nb): (usize, usize), v: f64) {
    if na >= fd || nb >= fd {
        return;
    }
    *m.entry((ba * fd + na, bb * fd + nb)).or_insert(0.0) += v;
}

/// Accelerated mixed GHZ3 written term by term from its closed form.
pub fn mixed_ghz3_closed_form(p: f64, lambda: f64, n_max: usize) -> Entries {
    let fd = n_max + 2;
    let cosh2 = 1.0 / (1.0 - lambda * lambda);
    let cosh = cosh2.sqrt();
    let mut m = Entries::new();
    for n in 0..=n_max {
        let w = weight(lambda, n);
        let up = (n as f64 + 1.0) / cosh2;
        let a = (4.0 - 3.0 * p) / 8.0;
        put(&mut m, fd, (0b00, n), (0b00, n), w * a);
        put(&mut m, fd, (0b11, n + 1), (0b11, n + 1), w * a * up);
        let c = w * (1.0 - p) / 2.0 * (n as f64 + 1.0).sqrt() / cosh;
        put(&mut m, fd, (0b00, n), (0b11, n + 1), c);
        put(&mut m, fd, (0b11, n + 1), (0b00, n), c);
        for bits in [0b11, 0b10, 0b01] {
            put(&mut m, fd, (bits, n), (bits, n), w * p / 8.0);
        }
        for bits in [0b00, 0b01, 0b10] {
            put(&mut m, fd, (bits, n + 1), (bits, n + 1), w * p / 8.0 * up);
        }
    }
    m
}

/// Accelerated mixed W3 written term by term. The `p/8` group carries
/// `|00n>` and `|11,n+1>`, the populations of `|000>` and `|111>`.
pub fn mixed_w3_closed_form(p: f64, lambda: f64, n_max: usize) -> Entries {
    let fd = n_max + 2;
    let cosh2 = 1.0 / (1.0 - lambda * lambda);
    let cosh = cosh2.sqrt();
    let mut m = Entries::new();
    for n in 0..=n_max {
        let w = weight(lambda, n);
        let up = (n as f64 + 1.0) / cosh2;
        let a = (8.0 - 5.0 * p) / 24.0;
        put(&mut m, fd, (0b01, n), (0b01, n), w * a);
        put(&mut m, fd, (0b10, n), (0b10, n), w * a);
        put(&mut m, fd, (0b00, n + 1), (0b00, n + 1), w * a * up);

        put(&mut m, fd, (0b11, n), (0b11, n), w * p / 8.0);
        put(&mut m, fd, (0b00, n), (0b00, n), w * p / 8.0);
        for bits in [0b11, 0b01, 0b10] {
            put(&mut m, fd, (bits, n + 1), (bits, n + 1), w * p / 8.0 * up);
        }

        let c = w * (1.0 - p) / 3.0;
        put(&mut m, fd, (0b01, n), (0b10, n), c);
        put(&mut m, fd, (0b10, n), (0b01, n), c);
        let s = c * (n as f64 + 1.0).sqrt() / cosh;
        for bits in [0b01, 0b10] {
            put(&mut m, fd, (bits, n), (0b00, n + 1), s);
            put(&mut m, fd, (0b00, n + 1), (bits, n), s);
        }
    }
    m
}

/// Largest relative entrywise mismatch; structural zeros must agree exactly.
pub fn max_relative_mismatch(rho: &TruncatedDensityMatrix, oracle: &Entries) -> f64 {
    let dense = rho.to_dense();
    let mut worst: f64 = 0.0;
    for i in 0..dense.dim() {
        for j in 0..dense.dim() {
            let got = dense.get(i, j);
            let want = oracle.get(&(i, j)).copied().unwrap_or(0.0);
            let err = if want == 0.0 {
                if got == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                ((got - want) / want).abs()
            };
            worst = worst.max(err);
        }
    }
    worst
}

/// `S_q` of the pure GHZ2 state summed in plain floating point:
/// joint eigenvalues `w_n (cos^2 + sin^2 (n+1)/cosh^2)`,
/// marginal eigenvalues `w_m (cos^2 + sin^2 m / sinh^2)`.
pub fn pure_ghz2_direct(theta: f64, lambda: f64, q: f64, terms: usize) -> f64 {
    let cosh2 = 1.0 / (1.0 - lambda * lambda);
    let sinh2 = cosh2 - 1.0;
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let mut joint = 0.0;
    let mut marginal = 0.0;
    for n in 0..terms {
        let w = weight(lambda, n);
        if w == 0.0 {
            break;
        }
        let nf = n as f64;
        joint += (w * (c2 + s2 * (nf + 1.0) / cosh2)).powf(q);
        marginal += (w * (c2 + s2 * nf / sinh2)).powf(q);
    }
    (1.0 - joint / marginal) / (q - 1.0)
}

/// Random density matrix `A A^T / tr` of dimension `dim`.
pub fn density_from(dim: usize, raw: &[f64]) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let v: f64 = (0..dim).map(|k| raw[i * dim + k] * raw[j * dim + k]).sum();
            m.set(i, j, v);
        }
    }
    let t = m.trace();
    m.scaled(1.0 / t)
}

pub fn density_strategy() -> impl Strategy<Value = DenseMatrix> {
    (1usize..=3)
        .prop_flat_map(|k| {
            let d = 1 << k;
            (Just(d), prop::collection::vec(-1.0f64..1.0, d * d))
        })
        .prop_filter("nonzero", |(_, raw)| raw.iter().any(|x| x.abs() > 1e-3))
        .prop_map(|(d, raw)| density_from(d, &raw))
}

pub fn density_pair_strategy() -> impl Strategy<Value = (DenseMatrix, DenseMatrix)> {
    (1usize..=3)
        .prop_flat_map(|k| {
            let d = 1 << k;
            (
                Just(d),
                prop::collection::vec(-1.0f64..1.0, d * d),
                prop::collection::vec(-1.0f64..1.0, d * d),
            )
        })
        .prop_filter("nonzero", |(_, a, b)| {
            a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3)
        })
        .prop_map(|(d, a, b)| (density_from(d, &a), density_from(d, &b)))
}

/// Random sparse symmetric matrix of dimension `1..=32`.
pub fn sparse_strategy() -> impl Strategy<Value = SparseSymMatrix> {
    (1usize..=32)
        .prop_flat_map(|d| {
            (
                Just(d),
                prop::collection::vec((0..d, 0..d, -1.0f64..1.0), 0..=(2 * d)),
            )
        })
        .prop_map(|(d, entries)| {
            let mut m = SparseSymMatrix::new(d);
            for (i, j, v) in entries {
                m.add(i.min(j), i.max(j), v);
            }
            m
        })
}

fn cutoff(n: usize) -> FockCutoff {
    FockCutoff::new(n)
}

fn err<T: std::fmt::Debug>(e: T) -> TestCaseError {
    TestCaseError::fail(format!("{e:?}"))
}

pub fn prop_linearity(a: &DenseMatrix, b: &DenseMatrix, t: f64, lambda: f64, n_max: usize) -> Result<(), TestCaseError> {
    let accel = acc(lambda);
    let mix = a.scaled(t).add(&b.scaled(1.0 - t));
    let lhs = unruh_apply(&mix, &accel, cutoff(n_max)).map_err(err)?.to_dense();
    let ra = unruh_apply(a, &accel, cutoff(n_max)).map_err(err)?.to_dense();
    let rb = unruh_apply(b, &accel, cutoff(n_max)).map_err(err)?.to_dense();
    let rhs = ra.scaled(t).add(&rb.scaled(1.0 - t));
    let diff = lhs.max_abs_diff(&rhs);
    prop_assert!(diff < 1e-12, "linearity violated by {diff:e}");
    Ok(())
}

pub fn prop_psd(rho: &DenseMatrix, lambda: f64, n_max: usize) -> Result<(), TestCaseError> {
    let out = unruh_apply(rho, &acc(lambda), cutoff(n_max)).map_err(err)?;
    let min = nalgebra_eigs(&out.to_dense()).last().copied().unwrap();
    prop_assert!(min >= -1e-12, "nalgebra eigenvalue {min:e}");
    spectral::eigenvalues_sym(out.matrix()).map_err(err)?;
    Ok(())
}

pub fn prop_trace_monotone(rho: &DenseMatrix, lambda: f64, n_max: usize) -> Result<(), TestCaseError> {
    let accel = acc(lambda);
    let t0 = unruh_apply(rho, &accel, cutoff(n_max)).map_err(err)?.matrix().trace();
    let t1 = unruh_apply(rho, &accel, cutoff(n_max + 1)).map_err(err)?.matrix().trace();
    prop_assert!(t0 <= t1 + 1e-15, "trace decreased: {t0} -> {t1}");
    prop_assert!(t1 <= 1.0 + 1e-12, "trace above one: {t1}");
    Ok(())
}

pub fn prop_inertial_limit(rho: &DenseMatrix, n_max: usize) -> Result<(), TestCaseError> {
    let out = unruh_apply(rho, &acc(0.0), cutoff(n_max)).map_err(err)?;
    let d = rho.dim();
    let fd = out.fock_dim();
    for i in 0..d {
        for j in 0..d {
            let got = out.entry((i >> 1, i & 1), (j >> 1, j & 1));
            prop_assert!((got - rho.get(i, j)).abs() < 1e-15, "entry ({i},{j}) moved");
        }
    }
    let moved: f64 = out.matrix().upper_entries().filter(|&(i, j, _)| i % fd > 1 || j % fd > 1).map(|e| e.2.abs()).sum();
    prop_assert!(moved == 0.0, "excitation above the first Fock level: {moved:e}");
    Ok(())
}

pub fn prop_blocked_matches_dense(m: &SparseSymMatrix) -> Result<(), TestCaseError> {
    let blocked = spectral::spectrum_blocked(m, 0.0).map_err(err)?;
    let dense = spectral::spectrum_dense(&m.to_dense()).map_err(err)?;
    let oracle = nalgebra_eigs(&m.to_dense());
    prop_assert_eq!(blocked.len(), oracle.len());
    for ((b, d), o) in blocked.iter().zip(&dense).zip(&oracle) {
        prop_assert!((b - o).abs() <= 1e-12, "blocked {b} vs nalgebra {o}");
        prop_assert!((b - d).abs() <= 1e-12, "blocked {b} vs dense {d}");
    }
    Ok(())
}

pub fn prop_partial_trace(a: &DenseMatrix, b: &DenseMatrix, t: f64, lambda: f64, n_max: usize) -> Result<(), TestCaseError> {
    let accel = acc(lambda);
    let ra = unruh_apply(a, &accel, cutoff(n_max)).map_err(err)?;
    let rb = unruh_apply(b, &accel, cutoff(n_max)).map_err(err)?;
    let pa = partial_trace_inertial(&ra);
    prop_assert!((pa.matrix().trace() - ra.matrix().trace()).abs() < 1e-13, "trace not preserved");

    let combo = ra.matrix().linear_combination(t, rb.matrix(), 1.0 - t);
    let rc = TruncatedDensityMatrix::new(combo, ra.inertial_qubits(), ra.fock_dim(), 1.0);
    let lhs = partial_trace_inertial(&rc).to_dense();
    let rhs = pa
        .to_dense()
        .scaled(t)
        .add(&partial_trace_inertial(&rb).to_dense().scaled(1.0 - t));
    let diff = lhs.max_abs_diff(&rhs);
    prop_assert!(diff < 1e-14, "partial trace not linear: {diff:e}");
    Ok(())
}

fn fmt<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn runner() -> TestRunner {
    TestRunner::new(Config { cases: PROPERTY_CASES, failure_persistence: None, rng_seed: PROPERTY_SEED, ..Config::default() })
}

/// Runs every accel/spectral property with [`PROPERTY_CASES`] cases each;
/// returns `(name, outcome)` per suite.
pub fn run_property_suites() -> Vec<(&'static str, Result<(), String>)> {
    let lambda = 0.0f64..0.95;
    let n_max = 0usize..12;
    vec![
        (
            "unruh linearity",
            fmt(runner().run(&(density_pair_strategy(), 0.0f64..1.0, lambda.clone(), n_max.clone()), |(ab, t, l, n)| {
                prop_linearity(&ab.0, &ab.1, t, l, n)
            })),
        ),
        (
            "unruh output PSD",
            fmt(runner().run(&(density_strategy(), lambda.clone(), n_max.clone()), |(r, l, n)| prop_psd(&r, l, n))),
        ),
        (
            "trace monotone in cutoff",
            fmt(runner().run(&(density_strategy(), lambda.clone(), n_max.clone()), |(r, l, n)| {
                prop_trace_monotone(&r, l, n)
            })),
        ),
        (
            "inertial limit",
            fmt(runner().run(&(density_strategy(), n_max.clone()), |(r, n)| prop_inertial_limit(&r, n))),
        ),
        (
            "blocked vs dense eigensolver",
            fmt(runner().run(&sparse_strategy(), |m| prop_blocked_matches_dense(&m))),
        ),
        (
            "partial trace",
            fmt(runner().run(&(density_pair_strategy(), 0.0f64..1.0, lambda, n_max), |(ab, t, l, n)| {
                prop_partial_trace(&ab.0, &ab.1, t, l, n)
            })),
        ),
    ]
}
