//! GHZ and W state families, in their inertial form and with the last qubit
//! accelerated, plus closed-form spectra for the pure families.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::accel::{unruh_apply, AccelerationParam, FockCutoff};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::spectral::TruncatedDensityMatrix;

/// Largest supported qubit count; the inertial state is stored densely.
pub const MAX_QUBITS: usize = 10;

const THETA_FIXED_TOL: f64 = 1e-12;

/// Which state to build.
///
/// Mixed families are `p / 2^N * I + (1 - p) |psi><psi|` with `psi` the
/// equal-weight GHZ or W state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateFamily {
    /// `cos(theta)|0...0> + sin(theta)|1...1>`; `theta` must be `pi/4` for `n >= 4`.
    PureGhz { n: usize, theta: f64 },
    /// `cos(theta)|01> + sin(theta)|10>`.
    PureW2 { theta: f64 },
    /// `x|001> + y|010> + z|100>` with `x = sin(theta)cos(phi)`,
    /// `y = sin(theta)sin(phi)`, `z = cos(theta)`.
    PureW3 { theta: f64, phi: f64 },
    /// Equal-weight `n`-qubit W state.
    PureWn { n: usize },
    MixedGhz { n: usize, p: f64 },
    MixedW { n: usize, p: f64 },
}

/// Family tag without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    PureGhz,
    PureW2,
    PureW3,
    PureWn,
    MixedGhz,
    MixedW,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::PureGhz,
        FamilyKind::PureW2,
        FamilyKind::PureW3,
        FamilyKind::PureWn,
        FamilyKind::MixedGhz,
        FamilyKind::MixedW,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyKind::PureGhz => "pure-ghz",
            FamilyKind::PureW2 => "pure-w2",
            FamilyKind::PureW3 => "pure-w3",
            FamilyKind::PureWn => "pure-wn",
            FamilyKind::MixedGhz => "mixed-ghz",
            FamilyKind::MixedW => "mixed-w",
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, FamilyKind::MixedGhz | FamilyKind::MixedW)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown state family '{s}'")))
    }
}

fn check_qubits(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_QUBITS {
        return Err(Error::Domain(format!(
            "qubit count N = {n} outside supported range {min}..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn check_angle(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::Domain(format!("angle {name} = {value} is not finite")));
    }
    Ok(())
}

fn check_mixing(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "mixing parameter p = {p} outside [0, 1]"
        )));
    }
    Ok(())
}

impl StateFamily {
    pub fn kind(&self) -> FamilyKind {
        match self {
            StateFamily::PureGhz { .. } => FamilyKind::PureGhz,
            StateFamily::PureW2 { .. } => FamilyKind::PureW2,
            StateFamily::PureW3 { .. } => FamilyKind::PureW3,
            StateFamily::PureWn { .. } => FamilyKind::PureWn,
            StateFamily::MixedGhz { .. } => FamilyKind::MixedGhz,
            StateFamily::MixedW { .. } => FamilyKind::MixedW,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match *self {
            StateFamily::PureGhz { n, .. }
            | StateFamily::PureWn { n }
            | StateFamily::MixedGhz { n, .. }
            | StateFamily::MixedW { n, .. } => n,
            StateFamily::PureW2 { .. } => 2,
            StateFamily::PureW3 { .. } => 3,
        }
    }

    pub fn is_pure(&self) -> bool {
        !self.kind().is_mixed()
    }

    /// Mixing parameter of a mixed family.
    pub fn mixing(&self) -> Option<f64> {
        match *self {
            StateFamily::MixedGhz { p, .. } | StateFamily::MixedW { p, .. } => Some(p),
            _ => None,
        }
    }

    /// Same family with the mixing parameter replaced; `None` for pure families.
    pub fn with_mixing(&self, p: f64) -> Option<Self> {
        match *self {
            StateFamily::MixedGhz { n, .. } => Some(StateFamily::MixedGhz { n, p }),
            StateFamily::MixedW { n, .. } => Some(StateFamily::MixedW { n, p }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateFamily::PureGhz { n, theta } => {
                check_qubits(n, 2)?;
                check_angle("theta", theta)?;
                if n >= 4 && (theta - FRAC_PI_4).abs() > THETA_FIXED_TOL {
                    return Err(Error::Domain(format!(
                        "pure GHZ with N = {n} >= 4 is only defined for theta = pi/4, got {theta}"
                    )));
                }
                Ok(())
            }
            StateFamily::PureW2 { theta } => check_angle("theta", theta),
            StateFamily::PureW3 { theta, phi } => {
                check_angle("theta", theta)?;
                check_angle("phi", phi)
            }
            StateFamily::PureWn { n } => check_qubits(n, 2),
            StateFamily::MixedGhz { n, p } | StateFamily::MixedW { n, p } => {
                check_qubits(n, 2)?;
                check_mixing(p)
            }
        }
    }

    /// State vector of the pure family, or of the pure part of a mixed one.
    pub fn pure_amplitudes(&self) -> Vec<f64> {
        let n = self.n_qubits();
        let dim = 1usize << n;
        let mut psi = vec![0.0; dim];
        match *self {
            StateFamily::PureGhz { theta, .. } => {
                psi[0] = theta.cos();
                psi[dim - 1] = theta.sin();
            }
            StateFamily::MixedGhz { .. } => {
                psi[0] = FRAC_PI_4.cos();
                psi[dim - 1] = FRAC_PI_4.sin();
            }
            StateFamily::PureW2 { theta } => {
                psi[0b01] = theta.cos();
                psi[0b10] = theta.sin();
            }
            StateFamily::PureW3 { theta, phi } => {
                let (x, y, z) = w3_coefficients(theta, phi);
                psi[0b001] = x;
                psi[0b010] = y;
                psi[0b100] = z;
            }
            StateFamily::PureWn { .. } | StateFamily::MixedW { .. } => {
                let amp = (1.0 / n as f64).sqrt();
                for k in 0..n {
                    psi[1 << k] = amp;
                }
            }
        }
        psi
    }

    /// Populations `(P(0), P(1))` of the accelerated (last) qubit in the pure part.
    fn accelerated_populations(&self) -> (f64, f64) {
        let psi = self.pure_amplitudes();
        let excited: f64 = psi
            .iter()
            .enumerate()
            .filter(|(i, _)| i & 1 == 1)
            .map(|(_, a)| a * a)
            .sum();
        let ground: f64 = psi
            .iter()
            .enumerate()
            .filter(|(i, _)| i & 1 == 0)
            .map(|(_, a)| a * a)
            .sum();
        (ground, excited)
    }
}

/// W3 amplitudes `(x, y, z)` of `|001>, |010>, |100>`.
pub fn w3_coefficients(theta: f64, phi: f64) -> (f64, f64, f64) {
    (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Inertial `2^N x 2^N` density matrix of the family.
pub fn inertial_density(family: &StateFamily) -> Result<DenseMatrix> {
    family.validate()?;
    let pure = DenseMatrix::outer(&family.pure_amplitudes());
    match family.mixing() {
        None => Ok(pure),
        Some(p) => {
            let dim = pure.dim();
            let mut rho = pure.scaled(1.0 - p);
            let noise = p / dim as f64;
            for i in 0..dim {
                rho.set(i, i, rho.get(i, i) + noise);
            }
            Ok(rho)
        }
    }
}

/// Family state with its last qubit accelerated and region II traced out.
pub fn accelerated_density(
    family: &StateFamily,
    accel: &AccelerationParam,
    cutoff: FockCutoff,
) -> Result<TruncatedDensityMatrix> {
    unruh_apply(&inertial_density(family)?, accel, cutoff)
}

/// Which of the two spectra a sequence describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumPart {
    /// Nonzero eigenvalues of the full (inertial x region-I) state.
    Joint,
    /// Eigenvalues of the region-I reduced state.
    Marginal,
}

/// Closed-form eigenvalue sequence of an accelerated pure state.
///
/// Every pure family here has the accelerated qubit in `|0>` with weight `g`
/// and `|1>` with weight `e`, with the two branches orthogonal on the inertial
/// side. The joint state then has one nonzero eigenvalue per region-II level,
/// `c_n^2 (g + e (n+1)/cosh^2 r)`, and the reduced state is diagonal with
/// `c_m^2 (g + e m/sinh^2 r)`. For GHZ this is `(cos^2, sin^2)`, for W2
/// `(sin^2, cos^2)`, for W3 `(1 - x^2, x^2)` and for W_N `((N-1)/N, 1/N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueSequence {
    part: SpectrumPart,
    ground: f64,
    excited: f64,
    accel: AccelerationParam,
}

impl EigenvalueSequence {
    pub fn part(&self) -> SpectrumPart {
        self.part
    }

    /// `ln` of the `n`th term (`-inf` for a zero term).
    pub fn ln_term(&self, n: usize) -> f64 {
        let nf = n as f64;
        let bracket = match self.part {
            SpectrumPart::Joint => self.ground + (nf + 1.0) * self.excited / self.accel.cosh2(),
            SpectrumPart::Marginal => self.ground + nf * self.excited / self.accel.sinh2(),
        };
        if bracket <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.accel.ln_vacuum_weight(n) + bracket.ln()
    }

    pub fn term(&self, n: usize) -> f64 {
        self.ln_term(n).exp()
    }

    /// First `k` terms.
    pub fn terms(&self, k: usize) -> Vec<f64> {
        (0..k).map(|n| self.term(n)).collect()
    }

    /// `sum_{n < k} term(n)`.
    pub fn partial_sum(&self, k: usize) -> f64 {
        (0..k).map(|n| self.term(n)).sum()
    }
}

/// Joint and marginal eigenvalue sequences of an accelerated pure family.
pub fn analytic_spectra(
    family: &StateFamily,
    accel: &AccelerationParam,
) -> Result<(EigenvalueSequence, EigenvalueSequence)> {
    family.validate()?;
    if !family.is_pure() {
        return Err(Error::Domain(format!(
            "analytic spectra exist only for pure families, got {}",
            family.kind()
        )));
    }
    if accel.is_inertial() {
        return Err(Error::InertialLimit);
    }
    let (ground, excited) = family.accelerated_populations();
    let make = |part| EigenvalueSequence {
        part,
        ground,
        excited,
        accel: *accel,
    };
    Ok((make(SpectrumPart::Joint), make(SpectrumPart::Marginal)))
}
