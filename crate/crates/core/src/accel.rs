//! Uniform acceleration of one qubit and the induced single-qubit channel
//! into the region-I Fock space of the accelerated observer.
//!
//! Under the Bogoliubov transformation the Minkowski vacuum and one-particle
//! state of the accelerated mode become two-mode squeezed states,
//!
//! ```text
//! |0>  ->  (1/cosh r)   sum_n tanh^n r            |n>_I |n>_II
//! |1>  ->  (1/cosh^2 r) sum_n tanh^n r sqrt(n+1)  |n+1>_I |n>_II
//! ```
//!
//! Tracing out region II yields a completely positive map with Kraus
//! operators (one per region-II occupation `n`)
//!
//! ```text
//! K_n = c_n ( |n><0| + sqrt(n+1)/cosh r |n+1><1| ),   c_n^2 = tanh^{2n} r / cosh^2 r
//! ```
//!
//! Truncating the Kraus sum at `n_max` keeps the output positive semidefinite
//! and only loses trace, which is tracked as the trace deficit.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseSymMatrix};
use crate::spectral::{self, TruncatedDensityMatrix, DEFAULT_TRACE_TOLERANCE, EPS_PSD};

/// Largest Fock cutoff [`FockCutoff::for_tolerance`] will return.
pub const MAX_AUTO_CUTOFF: usize = 2_000_000;

const INPUT_SYMMETRY_TOL: f64 = 1e-12;
const INPUT_TRACE_TOL: f64 = 1e-10;

/// Squeezing parameter `r` and modified acceleration `lambda = tanh r`.
///
/// The squeezing parameter relates to the proper acceleration `a` of the
/// observer and the mode frequency `|k|` through
/// `cosh r = (1 - exp(-2 pi |k| c / a))^{-1/2}`. Everything in this crate is
/// expressed through `lambda`, so that relation is not consumed anywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelerationParam {
    r: f64,
    lambda: f64,
}

impl AccelerationParam {
    /// `lambda` must lie in `[0, 1)`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || !(0.0..1.0).contains(&lambda) {
            return Err(Error::Domain(format!(
                "modified acceleration lambda = {lambda} is unphysical, expected 0 <= lambda < 1"
            )));
        }
        Ok(Self {
            r: lambda.atanh(),
            lambda,
        })
    }

    /// `r` must be finite and non-negative.
    pub fn from_r(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::Domain(format!(
                "squeezing parameter r = {r} is unphysical, expected 0 <= r < inf"
            )));
        }
        let lambda = r.tanh();
        if lambda >= 1.0 {
            return Err(Error::Domain(format!(
                "squeezing parameter r = {r} saturates tanh r to 1 in double precision"
            )));
        }
        Ok(Self { r, lambda })
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_inertial(&self) -> bool {
        self.lambda == 0.0
    }

    /// `cosh^2 r = 1 / (1 - lambda^2)`.
    pub fn cosh2(&self) -> f64 {
        1.0 / (1.0 - self.lambda * self.lambda)
    }

    /// `sinh^2 r = lambda^2 / (1 - lambda^2)`.
    pub fn sinh2(&self) -> f64 {
        self.lambda * self.lambda * self.cosh2()
    }

    /// `ln cosh^2 r`, accurate for small lambda.
    pub fn ln_cosh2(&self) -> f64 {
        -(-self.lambda * self.lambda).ln_1p()
    }

    /// `ln c_n^2 = 2n ln tanh r - ln cosh^2 r`; `-inf` for `n > 0` at zero acceleration.
    pub fn ln_vacuum_weight(&self, n: usize) -> f64 {
        if n == 0 {
            -self.ln_cosh2()
        } else if self.lambda == 0.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * n as f64 * self.lambda.ln() - self.ln_cosh2()
        }
    }

    /// Kraus-sum coefficients for `n = 0..=n_max`.
    pub fn channel_coefficients(&self, n_max: usize) -> Vec<ChannelCoefficients> {
        let ln_cosh2 = self.ln_cosh2();
        (0..=n_max)
            .map(|n| {
                let ln_c2 = self.ln_vacuum_weight(n);
                let ln_np1 = ((n + 1) as f64).ln();
                ChannelCoefficients {
                    vacuum: ln_c2.exp(),
                    excited: (ln_c2 + ln_np1 - ln_cosh2).exp(),
                    coherence: (ln_c2 + 0.5 * ln_np1 - 0.5 * ln_cosh2).exp(),
                }
            })
            .collect()
    }

    /// Trace lost from `|0><0|` when the Kraus sum stops at `n_max`:
    /// `sum_{n > n_max} c_n^2 = lambda^{2(n_max+1)}`.
    pub fn vacuum_tail(&self, n_max: usize) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let m = (n_max + 1) as f64;
        (2.0 * m * self.lambda.ln()).exp()
    }

    /// Trace lost from `|1><1|` when the Kraus sum stops at `n_max`:
    /// `sum_{n > n_max} c_n^2 (n+1)/cosh^2 r = s^M ((M+1)(1-s) + s)` with `s = lambda^2`, `M = n_max + 1`.
    pub fn excited_tail(&self, n_max: usize) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let s = self.lambda * self.lambda;
        let m = (n_max + 1) as f64;
        (m * s.ln()).exp() * ((m + 1.0) * (1.0 - s) + s)
    }
}

/// Weights of the three matrix-element rules of the channel for one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoefficients {
    /// `|0><0| -> vacuum |n><n|`
    pub vacuum: f64,
    /// `|1><1| -> excited |n+1><n+1|`
    pub excited: f64,
    /// `|0><1| -> coherence |n><n+1|`
    pub coherence: f64,
}

/// Cutoff of the region-II occupation sum. The region-I Fock space then
/// needs `n_max + 2` levels to hold the `|n+1>` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockCutoff {
    n_max: usize,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    /// Accepts signed input, as produced by user-facing parsers.
    pub fn from_signed(n_max: i64) -> Result<Self> {
        usize::try_from(n_max)
            .map(Self::new)
            .map_err(|_| Error::Domain(format!("Fock cutoff n_max = {n_max} must be non-negative")))
    }

    /// Smallest cutoff whose worst-case trace deficit is below `tolerance`.
    pub fn for_tolerance(accel: &AccelerationParam, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::Domain(format!("trace tolerance {tolerance} must be positive")));
        }
        if accel.is_inertial() {
            return Ok(Self::new(0));
        }
        // The excited tail dominates; bracket with doubling then bisect.
        let deficit = |n: usize| accel.vacuum_tail(n).max(accel.excited_tail(n));
        let mut hi = 1usize;
        while deficit(hi) >= tolerance {
            hi *= 2;
            if hi > MAX_AUTO_CUTOFF {
                return Err(Error::Domain(format!(
                    "lambda = {} needs a Fock cutoff above {MAX_AUTO_CUTOFF} for trace tolerance {tolerance:e}",
                    accel.lambda()
                )));
            }
        }
        let mut lo = 0usize;
        if deficit(lo) < tolerance {
            return Ok(Self::new(0));
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if deficit(mid) < tolerance {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Self::new(hi))
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Region-I Fock dimension, `n_max + 2`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n_max + 2
    }
}

/// Applies the Unruh channel to the last qubit of an `N`-qubit density matrix.
///
/// The input basis index is the usual binary encoding with qubit 0 as the most
/// significant bit, so the accelerated (last) qubit is the least significant
/// bit. The output basis is `(inertial bitstring) x (Fock level)`, see
/// [`TruncatedDensityMatrix`].
pub fn unruh_apply(
    rho_inertial: &DenseMatrix,
    accel: &AccelerationParam,
    cutoff: FockCutoff,
) -> Result<TruncatedDensityMatrix> {
    let dim = rho_inertial.dim();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Validation(format!(
            "inertial density matrix dimension {dim} is not 2^N with N >= 1"
        )));
    }
    let asym = rho_inertial.asymmetry();
    if asym > INPUT_SYMMETRY_TOL {
        return Err(Error::Validation(format!(
            "inertial density matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }
    let tr = rho_inertial.trace();
    if (tr - 1.0).abs() > INPUT_TRACE_TOL {
        return Err(Error::Validation(format!(
            "inertial density matrix has trace {tr}, expected 1"
        )));
    }
    let min_eig = spectral::spectrum_blocked(
        &SparseSymMatrix::from_dense_upper(rho_inertial),
        spectral::DEFAULT_EPS_SPARSE,
    )?
    .last()
    .copied()
    .unwrap_or(0.0);
    if min_eig < -EPS_PSD {
        return Err(Error::Validation(format!(
            "inertial density matrix is not positive semidefinite (eigenvalue {min_eig:e})"
        )));
    }

    let inertial_qubits = dim.trailing_zeros() as usize - 1;
    let fock_dim = cutoff.dim();
    let coeffs = accel.channel_coefficients(cutoff.n_max());
    let out_index = |bits: usize, fock: usize| bits * fock_dim + fock;

    let mut out = SparseSymMatrix::new((dim / 2) * fock_dim);
    for i in 0..dim {
        for j in i..dim {
            let value = rho_inertial.get(i, j);
            if value == 0.0 {
                continue;
            }
            let (a, s) = (i >> 1, i & 1);
            let (b, t) = (j >> 1, j & 1);
            // For i < j we write the upper-triangle representative of the pair;
            // the lower one is implied by symmetric storage.
            for (n, c) in coeffs.iter().enumerate() {
                let (row, col, weight) = match (s, t) {
                    (0, 0) => (out_index(a, n), out_index(b, n), c.vacuum),
                    (1, 1) => (out_index(a, n + 1), out_index(b, n + 1), c.excited),
                    (0, 1) => (out_index(a, n), out_index(b, n + 1), c.coherence),
                    _ => (out_index(a, n + 1), out_index(b, n), c.coherence),
                };
                // Underflowed weights stay structural zeros.
                let contribution = value * weight;
                if contribution != 0.0 {
                    out.add(row, col, contribution);
                }
            }
        }
    }
    Ok(TruncatedDensityMatrix::new(
        out,
        inertial_qubits,
        fock_dim,
        DEFAULT_TRACE_TOLERANCE,
    ))
}
