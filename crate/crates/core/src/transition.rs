//! Separability frontier of the mixed families: the mixing parameter `p*`
//! at which `S_q(inertial | accelerated)` turns from negative to
//! non-negative, its saturation in `q`, and its dependence on `lambda`.

use rayon::prelude::*;
use serde::Serialize;

use crate::accel::AccelerationParam;
use crate::entropy::{ar_for_state, EntropyQuery};
use crate::error::{Error, Result};
use crate::states::StateFamily;

/// `q` used for the asymptotic frontier.
pub const DEFAULT_Q: f64 = 150.0;
/// Final bisection width in `p`.
pub const DEFAULT_P_TOLERANCE: f64 = 1e-6;
/// Number of equally spaced `p` values evaluated before bisecting.
pub const PRESCAN_POINTS: usize = 21;
/// Largest acceleration accepted by [`transition_curve`].
pub const MAX_SUPPORTED_LAMBDA: f64 = 0.97;
pub const DEFAULT_Q_SCHEDULE: [f64; 5] = [10.0, 25.0, 50.0, 100.0, 150.0];
pub const DEFAULT_SATURATION_TOLERANCE: f64 = 5e-3;

/// How the sign change was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionKind {
    /// Bracketed and bisected inside `[0, 1]`.
    Crossing,
    /// `S_q(0) >= 0`: separable for every `p`.
    SeparableAtZero,
    /// `S_q(1) < 0`: no transition in range, `p* = 1` is reported.
    NoTransition,
}

/// Result of a one-dimensional sign-change search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignChange {
    pub p_star: f64,
    pub bracket_width: f64,
    /// `S(lower) < 0 <= S(upper)` for a [`TransitionKind::Crossing`].
    pub lower: f64,
    pub upper: f64,
    pub kind: TransitionKind,
    /// The prescan was not nondecreasing; the leftmost crossing was taken.
    pub non_monotone: bool,
}

/// Locates the leftmost sign change of `entropy(p)` on `[0, 1]`.
pub fn find_sign_change<F>(entropy: F, tolerance: f64) -> Result<SignChange>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(tolerance > 0.0) {
        return Err(Error::Domain(format!("p tolerance {tolerance} must be positive")));
    }
    let grid: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| i as f64 / (PRESCAN_POINTS - 1) as f64)
        .collect();
    let values = grid.iter().map(|&p| entropy(p)).collect::<Result<Vec<f64>>>()?;
    let non_monotone = values.windows(2).any(|w| w[1] < w[0]);

    if values[0] >= 0.0 {
        return Ok(SignChange {
            p_star: 0.0,
            bracket_width: 0.0,
            lower: 0.0,
            upper: 0.0,
            kind: TransitionKind::SeparableAtZero,
            non_monotone,
        });
    }
    let Some(i) = (0..grid.len() - 1).find(|&i| values[i] < 0.0 && values[i + 1] >= 0.0) else {
        return Ok(SignChange {
            p_star: 1.0,
            bracket_width: 0.0,
            lower: 1.0,
            upper: 1.0,
            kind: TransitionKind::NoTransition,
            non_monotone,
        });
    };

    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    while hi - lo >= tolerance {
        let mid = 0.5 * (lo + hi);
        if entropy(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SignChange {
        p_star: 0.5 * (lo + hi),
        bracket_width: hi - lo,
        lower: lo,
        upper: hi,
        kind: TransitionKind::Crossing,
        non_monotone,
    })
}

/// Critical mixing parameter at fixed acceleration and `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionPoint {
    pub lambda: f64,
    pub q: f64,
    pub p_star: f64,
    pub bracket_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub kind: TransitionKind,
    pub non_monotone: bool,
}

fn require_mixed(family: &StateFamily) -> Result<()> {
    if family.is_pure() {
        return Err(Error::Domain(format!(
            "transition search needs a mixed family, got {}",
            family.kind()
        )));
    }
    Ok(())
}

/// `S_q` of the mixed `family` as a function of its mixing parameter.
pub fn entropy_in_p(
    family: &StateFamily,
    accel: AccelerationParam,
    q: f64,
) -> impl Fn(f64) -> Result<f64> + '_ {
    move |p| {
        let state = family
            .with_mixing(p)
            .expect("entropy_in_p called with a pure family");
        ar_for_state(&EntropyQuery::new(state, accel, q))
    }
}

/// Bisects for the `p` where `S_q` of the mixed `family` changes sign.
///
/// The mixing parameter stored in `family` is ignored.
pub fn critical_p(family: &StateFamily, lambda: f64, q: f64, tolerance: f64) -> Result<TransitionPoint> {
    require_mixed(family)?;
    family.validate()?;
    let accel = AccelerationParam::from_lambda(lambda)?;
    let found = find_sign_change(entropy_in_p(family, accel, q), tolerance)?;
    Ok(TransitionPoint {
        lambda,
        q,
        p_star: found.p_star,
        bracket_width: found.bracket_width,
        lower: found.lower,
        upper: found.upper,
        kind: found.kind,
        non_monotone: found.non_monotone,
    })
}

/// `p*` as a function of `q` and the first `q` where it stops moving.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Saturation {
    /// Smallest `q_i` with `|p*(q_{i+1}) - p*(q_i)| < tolerance`; `None` when unsaturated.
    pub saturating_q: Option<f64>,
    /// `(q, p*)` for every schedule entry.
    pub trace: Vec<(f64, f64)>,
}

/// Saturation search over an arbitrary `q -> p*` map.
pub fn saturation_with<F>(q_schedule: &[f64], tolerance: f64, p_star: F) -> Result<Saturation>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if q_schedule.len() < 2 {
        return Err(Error::Validation("q schedule needs at least two entries".into()));
    }
    if q_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("q schedule must be strictly increasing".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Domain(format!("saturation tolerance {tolerance} must be positive")));
    }
    let values = q_schedule
        .par_iter()
        .map(|&q| p_star(q))
        .collect::<Result<Vec<f64>>>()?;
    let saturating_q = (0..values.len() - 1)
        .find(|&i| (values[i + 1] - values[i]).abs() < tolerance)
        .map(|i| q_schedule[i]);
    Ok(Saturation {
        saturating_q,
        trace: q_schedule.iter().copied().zip(values).collect(),
    })
}

/// Smallest `q` in the schedule after which `p*` changes by less than `tolerance`.
pub fn saturation_q(
    family: &StateFamily,
    lambda: f64,
    q_schedule: &[f64],
    tolerance: f64,
) -> Result<Saturation> {
    require_mixed(family)?;
    saturation_with(q_schedule, tolerance, |q| {
        critical_p(family, lambda, q, DEFAULT_P_TOLERANCE).map(|t| t.p_star)
    })
}

/// Transition points over a `lambda` grid; failed points are kept aside.
#[derive(Debug, Clone, Default)]
pub struct TransitionCurve {
    /// Successful points, in grid order.
    pub points: Vec<TransitionPoint>,
    /// `(lambda, error)` for points that could not be evaluated.
    pub failures: Vec<(f64, Error)>,
}

impl TransitionCurve {
    /// `(lambda, p*)` pairs of genuine crossings, suitable for frontier fitting.
    pub fn crossings(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|t| t.kind == TransitionKind::Crossing)
            .map(|t| (t.lambda, t.p_star))
            .collect()
    }
}

/// `critical_p` at every grid value, evaluated in parallel.
pub fn transition_curve(
    family: &StateFamily,
    lambda_grid: &[f64],
    q: f64,
    tolerance: f64,
) -> Result<TransitionCurve> {
    require_mixed(family)?;
    family.validate()?;
    if let Some(&bad) = lambda_grid
        .iter()
        .find(|l| !(0.0..=MAX_SUPPORTED_LAMBDA).contains(*l))
    {
        return Err(Error::Domain(format!(
            "lambda grid value {bad} outside supported range [0, {MAX_SUPPORTED_LAMBDA}]"
        )));
    }
    let results: Vec<Result<TransitionPoint>> = lambda_grid
        .par_iter()
        .map(|&lambda| critical_p(family, lambda, q, tolerance))
        .collect();
    let mut curve = TransitionCurve::default();
    for (&lambda, r) in lambda_grid.iter().zip(results) {
        match r {
            Ok(t) => curve.points.push(t),
            Err(e) => curve.failures.push((lambda, e)),
        }
    }
    Ok(curve)
}

/// `count` equally spaced values from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// The 19-point acceleration grid `0.05, 0.10, ..., 0.95`.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}
