//! Frontier fits of the form `(p/b)^x + lambda^y = 1` and the GHZ/W
//! separability table built from them.

use rayon::prelude::*;
use serde::Serialize;

use crate::accel::AccelerationParam;
use crate::entropy::{ar_for_state, EntropyQuery};
use crate::error::{Error, Result};
use crate::states::{FamilyKind, StateFamily};
use crate::transition::{transition_curve, TransitionPoint, DEFAULT_P_TOLERANCE};

pub const REFLECTION: f64 = 1.0;
pub const EXPANSION: f64 = 2.0;
pub const CONTRACTION: f64 = 0.5;
pub const SHRINK: f64 = 0.5;
/// Simplex diameter (in log-parameter space) below which the search stops.
pub const SIMPLEX_DIAMETER_TOL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 10_000;
/// Fresh simplices built around the incumbent after the first convergence.
pub const MAX_RESTARTS: usize = 3;
/// Edge length of the initial simplex in log-parameter space.
pub const INITIAL_STEP: f64 = 0.1;
pub const MIN_FIT_POINTS: usize = 5;

/// Outcome of [`nelder_mead`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Derivative-free simplex minimisation of `f` starting from `x0`.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_iterations: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let towards = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_DIAMETER_TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for v in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let reflected = towards(&centroid, &worst, -REFLECTION);
        let f_reflected = f(&reflected);

        if f_reflected < values[0] {
            let expanded = towards(&centroid, &reflected, EXPANSION);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[dim] = expanded;
                values[dim] = f_expanded;
            } else {
                simplex[dim] = reflected;
                values[dim] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = f_reflected;
            continue;
        }
        let outside = f_reflected < values[dim];
        let contracted = towards(&centroid, if outside { &reflected } else { &worst }, CONTRACTION);
        let f_contracted = f(&contracted);
        let accept = if outside { f_contracted <= f_reflected } else { f_contracted < values[dim] };
        if accept {
            values[dim] = f_contracted;
            simplex[dim] = contracted;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=dim {
            simplex[i] = towards(&best, &simplex[i], SHRINK);
            values[i] = f(&simplex[i]);
        }
    }
    let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

/// Fitted frontier `p(lambda) = b (1 - lambda^y)^(1/x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitCurve {
    pub b: f64,
    pub x_exp: f64,
    pub y_exp: f64,
    /// Residual sum of squares in `p`.
    pub rss: f64,
    pub n_points: usize,
}

impl FitCurve {
    /// Frontier value at `lambda`, in `[0, b]` for `lambda` in `[0, 1]`.
    pub fn predict(&self, lambda: f64) -> f64 {
        frontier(self.b, self.x_exp, self.y_exp, lambda)
    }

    pub fn rss_per_point(&self) -> f64 {
        self.rss / self.n_points as f64
    }
}

fn frontier(b: f64, x: f64, y: f64, lambda: f64) -> f64 {
    b * (1.0 - lambda.powf(y)).max(0.0).powf(1.0 / x)
}

/// Starting parameters for [`fit_frontier_from`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitStart {
    pub b: f64,
    pub x: f64,
    pub y: f64,
}

fn validate_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::Validation(format!(
            "frontier fit needs at least {MIN_FIT_POINTS} points, got {}",
            points.len()
        )));
    }
    for &(lambda, p) in points {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Domain(format!("fit lambda {lambda} outside [0, 1)")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("fit p {p} outside (0, 1)")));
        }
    }
    let mut lambdas: Vec<f64> = points.iter().map(|t| t.0).collect();
    lambdas.sort_by(f64::total_cmp);
    if lambdas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Validation("fit lambda values must be distinct".into()));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t.1), hi.max(t.1)));
    if hi - lo <= 1e-12 {
        return Err(Error::Fit("degenerate points: all p values are equal".into()));
    }
    Ok(())
}

/// Least-squares frontier fit started at `b = p` of the smallest `lambda`, `x = y = 2`.
pub fn fit_frontier(points: &[(f64, f64)]) -> Result<FitCurve> {
    validate_points(points)?;
    let b = points.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap().1;
    fit_frontier_from(points, FitStart { b, x: 2.0, y: 2.0 })
}

/// Least-squares frontier fit from an explicit starting point.
pub fn fit_frontier_from(points: &[(f64, f64)], start: FitStart) -> Result<FitCurve> {
    validate_points(points)?;
    if !(start.b > 0.0 && start.x > 0.0 && start.y > 0.0) {
        return Err(Error::Domain("fit starting parameters must be positive".into()));
    }
    let rss = |u: &[f64]| -> f64 {
        let (b, x, y) = (u[0].exp(), u[1].exp(), u[2].exp());
        let r: f64 = points
            .iter()
            .map(|&(lambda, p)| (p - frontier(b, x, y, lambda)).powi(2))
            .sum();
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    };

    let mut best = nelder_mead(rss, &[start.b.ln(), start.x.ln(), start.y.ln()], INITIAL_STEP, MAX_ITERATIONS);
    let mut total = best.iterations;
    for _ in 0..MAX_RESTARTS {
        if !best.converged {
            break;
        }
        let next = nelder_mead(rss, &best.x, INITIAL_STEP, MAX_ITERATIONS);
        total += next.iterations;
        let improved = next.value < best.value;
        let gain = best.value - next.value;
        let stalled = !next.converged;
        if improved || stalled {
            best = next;
        }
        if stalled || gain <= 1e-15 * best.value.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let (b, x, y) = (best.x[0].exp(), best.x[1].exp(), best.x[2].exp());
    if !best.converged {
        return Err(Error::FitNoConvergence { iterations: total, b, x, y, rss: best.value });
    }
    Ok(FitCurve { b, x_exp: x, y_exp: y, rss: best.value, n_points: points.len() })
}

/// GHZ or W column of the separability table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableColumn {
    Ghz,
    W,
}

impl TableColumn {
    pub fn mixed(self, n: usize) -> StateFamily {
        match self {
            TableColumn::Ghz => StateFamily::MixedGhz { n, p: 0.0 },
            TableColumn::W => StateFamily::MixedW { n, p: 0.0 },
        }
    }

    /// The equal-weight pure state the mixed family is built from.
    pub fn pure(self, n: usize) -> StateFamily {
        match self {
            TableColumn::Ghz => StateFamily::PureGhz { n, theta: std::f64::consts::FRAC_PI_4 },
            TableColumn::W => StateFamily::PureWn { n },
        }
    }
}

/// One row of the separability table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub column: TableColumn,
    pub n: usize,
    pub family: FamilyKind,
    /// The pure state has `S < 0` at every grid value of `lambda`.
    pub pure_non_separable: bool,
    pub fit: Option<FitCurve>,
    /// Why the fit is missing, if it is.
    pub error: Option<String>,
    pub transitions: Vec<TransitionPoint>,
}

/// `true` when `S_q < 0` for `family` at every `lambda` in the grid.
pub fn non_separable_on_grid(family: &StateFamily, lambda_grid: &[f64], q: f64) -> Result<bool> {
    for &lambda in lambda_grid {
        let accel = AccelerationParam::from_lambda(lambda)?;
        if ar_for_state(&EntropyQuery::new(family.clone(), accel, q))? >= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn table_row(column: TableColumn, n: usize, q: f64, lambda_grid: &[f64]) -> TableRow {
    let mixed = column.mixed(n);
    let mut row = TableRow {
        column,
        n,
        family: mixed.kind(),
        pure_non_separable: false,
        fit: None,
        error: None,
        transitions: Vec::new(),
    };
    let outcome = (|| -> Result<FitCurve> {
        row.pure_non_separable = non_separable_on_grid(&column.pure(n), lambda_grid, q)?;
        let curve = transition_curve(&mixed, lambda_grid, q, DEFAULT_P_TOLERANCE)?;
        if let Some((lambda, e)) = curve.failures.first() {
            return Err(Error::Fit(format!("transition at lambda = {lambda} failed: {e}")));
        }
        row.transitions = curve.points.clone();
        fit_frontier(&curve.crossings())
    })();
    match outcome {
        Ok(fit) => row.fit = Some(fit),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// The eight GHZ/W rows for `N = 2..=5`; rows fail independently.
pub fn reproduce_table(q: f64, lambda_grid: &[f64]) -> Vec<TableRow> {
    let jobs: Vec<(TableColumn, usize)> = [TableColumn::Ghz, TableColumn::W]
        .into_iter()
        .flat_map(|c| (2..=5).map(move |n| (c, n)))
        .collect();
    jobs.par_iter()
        .map(|&(column, n)| table_row(column, n, q, lambda_grid))
        .collect()
}
