use std::path::Path;

use rayon::prelude::*;
use rindler_entropy::entropy::{evaluate, EntropyEvaluation, EvaluationPath};
use rindler_entropy::fit::{fit_frontier, reproduce_table, FitCurve, TableColumn, TableRow};
use rindler_entropy::transition::{
    default_lambda_grid, transition_curve, TransitionPoint, DEFAULT_P_TOLERANCE, DEFAULT_Q,
    MAX_SUPPORTED_LAMBDA,
};
use rindler_entropy::{AccelerationParam, EntropyQuery, Error, FamilyKind, FockCutoff, StateFamily};
use serde::{Deserialize, Serialize};

use crate::args::{
    Cli, Command, EntropyArgs, FamilyArgs, FitArgs, Format, NumericArgs, ReproduceArgs, SweepArgs,
    TransitionArgs,
};
use crate::output::{fmt_num, fmt_opt, write_records, Record};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const THREADS_ENV: &str = "RINDLER_ENTROPY_THREADS";

/// Machine-readable failure record written to stderr.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
    pub exit_code: i32,
    pub lambda: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            error: "validation".into(),
            message: message.into(),
            exit_code: EXIT_VALIDATION,
            lambda: None,
            p: None,
            q: None,
        }
    }

    fn io(e: std::io::Error) -> Self {
        Self { error: "io".into(), exit_code: EXIT_NUMERICAL, ..Self::validation(e.to_string()) }
    }

    fn at(mut self, lambda: Option<f64>, p: Option<f64>, q: Option<f64>) -> Self {
        self.lambda = self.lambda.or(lambda);
        self.p = self.p.or(p);
        self.q = self.q.or(q);
        self
    }

    pub fn emit(&self) {
        eprintln!("{}", serde_json::to_string(self).expect("error record serializes"));
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            error: e.kind().into(),
            message: e.to_string(),
            exit_code: if e.is_input_error() { EXIT_VALIDATION } else { EXIT_NUMERICAL },
            lambda: None,
            p: None,
            q: None,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Worker count: `--threads`, then the environment variable, then rayon's default.
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> CliResult<Option<usize>> {
    let n = match (flag, env) {
        (Some(n), _) => Some(n),
        (None, Some(v)) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::validation(format!("{THREADS_ENV}=`{v}` is not a thread count")))?,
        ),
        (None, None) => None,
    };
    if n == Some(0) {
        return Err(CliError::validation("thread count must be positive"));
    }
    Ok(n)
}

pub fn run(cli: Cli) -> CliResult<()> {
    let env = std::env::var(THREADS_ENV).ok();
    if let Some(n) = thread_count(cli.threads, env.as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation(e.to_string()))?;
    }
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Entropy(a) => entropy(a, cli.format, out),
        Command::Sweep(a) => sweep(a, cli.format, out),
        Command::Transition(a) => transition(a, cli.format, out),
        Command::Fit(a) => fit(a, cli.format, out),
        Command::Reproduce(a) => reproduce(a, cli.format, out),
    }
}

fn check_lambda(lambda: f64) -> CliResult<AccelerationParam> {
    AccelerationParam::from_lambda(lambda).map_err(|e| CliError::from(e).at(Some(lambda), None, None))
}

fn check_q(q: f64) -> CliResult<()> {
    if q.is_finite() && q > 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("q = {q} must be positive and finite")).at(None, None, Some(q)))
    }
}

fn check_p(p: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(CliError::validation(format!("p = {p} outside [0, 1]")).at(None, Some(p), None))
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("{name} = {v} must be positive")))
    }
}

fn forbid(present: bool, flag: &str, kind: FamilyKind) -> CliResult<()> {
    if present {
        return Err(CliError::validation(format!("--{flag} does not apply to {kind}")));
    }
    Ok(())
}

fn require_n(a: &FamilyArgs) -> CliResult<usize> {
    a.n.ok_or_else(|| CliError::validation(format!("--n is required for {}", a.family)))
}

fn fixed_n(a: &FamilyArgs, n: usize) -> CliResult<()> {
    match a.n {
        Some(m) if m != n => Err(CliError::validation(format!("{} has N = {n}, got --n {m}", a.family))),
        _ => Ok(()),
    }
}

/// Builds the family; `grid_p` skips the `--p` requirement for mixed families.
fn build_family(a: &FamilyArgs, grid_p: bool) -> CliResult<StateFamily> {
    use std::f64::consts::FRAC_PI_4;
    let kind = a.family;
    if kind.is_mixed() {
        forbid(a.theta.is_some(), "theta", kind)?;
        forbid(a.phi.is_some(), "phi", kind)?;
    } else {
        forbid(a.p.is_some(), "p", kind)?;
    }
    let mixed_p = || -> CliResult<f64> {
        match a.p {
            Some(p) => {
                check_p(p)?;
                Ok(p)
            }
            None if grid_p => Ok(0.0),
            None => Err(CliError::validation(format!("--p is required for {kind}"))),
        }
    };
    let family = match kind {
        FamilyKind::PureGhz => {
            forbid(a.phi.is_some(), "phi", kind)?;
            StateFamily::PureGhz { n: require_n(a)?, theta: a.theta.unwrap_or(FRAC_PI_4) }
        }
        FamilyKind::PureW2 => {
            forbid(a.phi.is_some(), "phi", kind)?;
            fixed_n(a, 2)?;
            StateFamily::PureW2 { theta: a.theta.unwrap_or(FRAC_PI_4) }
        }
        FamilyKind::PureW3 => {
            fixed_n(a, 3)?;
            StateFamily::PureW3 {
                theta: a.theta.unwrap_or_else(|| (1.0 / 3f64.sqrt()).acos()),
                phi: a.phi.unwrap_or(FRAC_PI_4),
            }
        }
        FamilyKind::PureWn => {
            forbid(a.theta.is_some(), "theta", kind)?;
            forbid(a.phi.is_some(), "phi", kind)?;
            StateFamily::PureWn { n: require_n(a)? }
        }
        FamilyKind::MixedGhz => StateFamily::MixedGhz { n: require_n(a)?, p: mixed_p()? },
        FamilyKind::MixedW => StateFamily::MixedW { n: require_n(a)?, p: mixed_p()? },
    };
    family.validate()?;
    Ok(family)
}

fn configure(query: EntropyQuery, n: &NumericArgs) -> CliResult<EntropyQuery> {
    let mut query = query.with_path(n.path.into());
    if let Some(k) = n.n_max {
        query = query.with_cutoff(FockCutoff::from_signed(k)?);
    }
    if let Some(t) = n.terms {
        if t == 0 {
            return Err(CliError::validation("--terms must be positive"));
        }
        query = query.with_analytic_terms(t);
    }
    if let Some(tol) = n.trace_tol {
        check_positive("--trace-tol", tol)?;
        query = query.with_trace_tolerance(tol);
    }
    Ok(query)
}

#[derive(Debug, Serialize)]
struct EntropyRecord {
    family: String,
    n: usize,
    theta: Option<f64>,
    phi: Option<f64>,
    p: Option<f64>,
    lambda: f64,
    q: f64,
    #[serde(rename = "S")]
    s: f64,
    trace_deficit: f64,
    path: &'static str,
    n_max: Option<usize>,
    terms: Option<usize>,
}

impl EntropyRecord {
    fn new(family: &StateFamily, lambda: f64, q: f64, e: &EntropyEvaluation) -> Self {
        let (theta, phi) = match *family {
            StateFamily::PureGhz { theta, .. } | StateFamily::PureW2 { theta } => (Some(theta), None),
            StateFamily::PureW3 { theta, phi } => (Some(theta), Some(phi)),
            _ => (None, None),
        };
        let (n_max, terms) = match e.path {
            EvaluationPath::Numeric { n_max } => (Some(n_max), None),
            EvaluationPath::Analytic { terms } => (None, Some(terms)),
        };
        Self {
            family: family.kind().to_string(),
            n: family.n_qubits(),
            theta,
            phi,
            p: family.mixing(),
            lambda,
            q,
            s: e.value,
            trace_deficit: e.trace_deficit,
            path: e.path.name(),
            n_max,
            terms,
        }
    }
}

impl Record for EntropyRecord {
    fn header() -> &'static [&'static str] {
        &["family", "n", "theta", "phi", "p", "lambda", "q", "S", "trace_deficit", "path", "n_max", "terms"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.family.clone(),
            self.n.to_string(),
            fmt_opt(self.theta),
            fmt_opt(self.phi),
            fmt_opt(self.p),
            fmt_num(self.lambda),
            fmt_num(self.q),
            fmt_num(self.s),
            fmt_num(self.trace_deficit),
            self.path.to_string(),
            self.n_max.map(|v| v.to_string()).unwrap_or_default(),
            self.terms.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }
}

fn entropy(a: &EntropyArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let family = build_family(&a.family, false)?;
    let accel = check_lambda(a.lambda)?;
    check_q(a.q)?;
    let query = configure(EntropyQuery::new(family, accel, a.q), &a.numeric)?;
    let eval = evaluate(&query).map_err(|e| CliError::from(e).at(Some(a.lambda), family.mixing(), Some(a.q)))?;
    write_records(&[EntropyRecord::new(&family, a.lambda, a.q, &eval)], format, out).map_err(CliError::io)
}

/// One row of a sweep: `lambda,p,q,S,trace_deficit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub p: Option<f64>,
    pub q: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub trace_deficit: f64,
}

impl Record for SweepRecord {
    fn header() -> &'static [&'static str] {
        &["lambda", "p", "q", "S", "trace_deficit"]
    }

    fn fields(&self) -> Vec<String> {
        vec![fmt_num(self.lambda), fmt_opt(self.p), fmt_num(self.q), fmt_num(self.s), fmt_num(self.trace_deficit)]
    }
}

fn sweep(a: &SweepArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let family = build_family(&a.family, a.p_grid.is_some())?;
    let lambdas = a.lambda_grid.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| vec![a.lambda.unwrap()]);
    let qs = a.q_schedule.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| vec![a.q.unwrap()]);
    let ps: Vec<Option<f64>> = match (&a.p_grid, family.mixing()) {
        (Some(_), None) => return Err(CliError::validation(format!("--p-grid does not apply to {}", family.kind()))),
        (Some(g), Some(_)) => g.0.iter().map(|&p| Some(p)).collect(),
        (None, p) => vec![p],
    };
    let accels = lambdas.iter().map(|&l| check_lambda(l)).collect::<CliResult<Vec<_>>>()?;
    for &q in &qs {
        check_q(q)?;
    }
    for p in ps.iter().flatten() {
        check_p(*p)?;
    }

    let mut jobs = Vec::with_capacity(lambdas.len() * ps.len() * qs.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        for &p in &ps {
            for &q in &qs {
                jobs.push((lambda, accels[i], p, q));
            }
        }
    }
    let base = EntropyQuery::new(family, accels[0], qs[0]);
    let base = configure(base, &a.numeric)?;
    let results: Vec<CliResult<SweepRecord>> = jobs
        .par_iter()
        .map(|&(lambda, accel, p, q)| {
            let state = match p {
                Some(p) => family.with_mixing(p).expect("mixed family"),
                None => family,
            };
            let query = EntropyQuery { family: state, accel, q, ..base };
            evaluate(&query)
                .map(|e| SweepRecord { lambda, p, q, s: e.value, trace_deficit: e.trace_deficit })
                .map_err(|e| CliError::from(e).at(Some(lambda), p, Some(q)))
        })
        .collect();
    let records = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    write_records(&records, format, out).map_err(CliError::io)
}

/// One row of a transition curve; CSV carries the first four fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub lambda: f64,
    pub q: f64,
    pub p_star: f64,
    pub bracket_width: f64,
    #[serde(skip_deserializing)]
    pub kind: Option<String>,
    #[serde(skip_deserializing)]
    pub non_monotone: Option<bool>,
}

impl From<&TransitionPoint> for TransitionRecord {
    fn from(t: &TransitionPoint) -> Self {
        let kind = serde_json::to_value(t.kind).ok().and_then(|v| v.as_str().map(String::from));
        Self {
            lambda: t.lambda,
            q: t.q,
            p_star: t.p_star,
            bracket_width: t.bracket_width,
            kind,
            non_monotone: Some(t.non_monotone),
        }
    }
}

impl Record for TransitionRecord {
    fn header() -> &'static [&'static str] {
        &["lambda", "q", "p_star", "bracket_width"]
    }

    fn fields(&self) -> Vec<String> {
        vec![fmt_num(self.lambda), fmt_num(self.q), fmt_num(self.p_star), fmt_num(self.bracket_width)]
    }
}

fn check_transition_grid(grid: &[f64]) -> CliResult<()> {
    for &l in grid {
        check_lambda(l)?;
        if l > MAX_SUPPORTED_LAMBDA {
            return Err(CliError::validation(format!("lambda = {l} above supported {MAX_SUPPORTED_LAMBDA}"))
                .at(Some(l), None, None));
        }
    }
    Ok(())
}

fn mixed_family(kind: FamilyKind, n: Option<usize>) -> CliResult<StateFamily> {
    let n = n.ok_or_else(|| CliError::validation(format!("--n is required for {kind}")))?;
    let family = match kind {
        FamilyKind::MixedGhz => StateFamily::MixedGhz { n, p: 0.0 },
        FamilyKind::MixedW => StateFamily::MixedW { n, p: 0.0 },
        other => return Err(CliError::validation(format!("transitions need a mixed family, got {other}"))),
    };
    family.validate()?;
    Ok(family)
}

fn transition_points(family: &StateFamily, grid: &[f64], qs: &[f64], tol: f64) -> CliResult<Vec<Vec<TransitionPoint>>> {
    qs.iter()
        .map(|&q| {
            let curve = transition_curve(family, grid, q, tol)?;
            if let Some((lambda, e)) = curve.failures.into_iter().next() {
                return Err(CliError::from(e).at(Some(lambda), None, Some(q)));
            }
            Ok(curve.points)
        })
        .collect()
}

fn transition(a: &TransitionArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    if a.family.p.is_some() {
        return Err(CliError::validation("--p is the searched quantity and cannot be given"));
    }
    forbid(a.family.theta.is_some(), "theta", a.family.family)?;
    forbid(a.family.phi.is_some(), "phi", a.family.family)?;
    let family = mixed_family(a.family.family, a.family.n)?;
    let grid = match (&a.lambda_grid, a.lambda) {
        (Some(g), _) => g.0.clone(),
        (None, Some(l)) => vec![l],
        (None, None) => default_lambda_grid(),
    };
    check_transition_grid(&grid)?;
    let qs = a.q_schedule.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| vec![a.q.unwrap_or(DEFAULT_Q)]);
    for &q in &qs {
        check_q(q)?;
    }
    let tol = a.tol.unwrap_or(DEFAULT_P_TOLERANCE);
    check_positive("--tol", tol)?;

    let per_q = transition_points(&family, &grid, &qs, tol)?;
    let mut records = Vec::with_capacity(grid.len() * qs.len());
    for i in 0..grid.len() {
        for points in &per_q {
            records.push(TransitionRecord::from(&points[i]));
        }
    }
    write_records(&records, format, out).map_err(CliError::io)
}

#[derive(Debug, Serialize)]
struct FitRecord {
    b: f64,
    x_exp: f64,
    y_exp: f64,
    rss: f64,
    n_points: usize,
    rss_per_point: f64,
}

impl From<FitCurve> for FitRecord {
    fn from(f: FitCurve) -> Self {
        Self { b: f.b, x_exp: f.x_exp, y_exp: f.y_exp, rss: f.rss, n_points: f.n_points, rss_per_point: f.rss_per_point() }
    }
}

impl Record for FitRecord {
    fn header() -> &'static [&'static str] {
        &["b", "x_exp", "y_exp", "rss", "n_points", "rss_per_point"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_num(self.b),
            fmt_num(self.x_exp),
            fmt_num(self.y_exp),
            fmt_num(self.rss),
            self.n_points.to_string(),
            fmt_num(self.rss_per_point),
        ]
    }
}

/// `(lambda, p_star)` pairs from a transition CSV holding a single `q`.
pub fn read_transition_csv(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let rows = reader
        .deserialize::<TransitionRecord>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::validation(format!("malformed transition CSV: {e}")))?;
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.q != first.q) {
            return Err(CliError::validation("transition CSV mixes several q values"));
        }
    }
    Ok(rows.iter().map(|r| (r.lambda, r.p_star)).collect())
}

fn fit(a: &FitArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let points = match &a.input {
        Some(path) => read_transition_csv(path)?,
        None => {
            let family = mixed_family(a.family.expect("clap requires --family"), a.n)?;
            let grid = a.lambda_grid.as_ref().map(|g| g.0.clone()).unwrap_or_else(default_lambda_grid);
            check_transition_grid(&grid)?;
            let q = a.q.unwrap_or(DEFAULT_Q);
            check_q(q)?;
            let tol = a.tol.unwrap_or(DEFAULT_P_TOLERANCE);
            check_positive("--tol", tol)?;
            let curve = transition_curve(&family, &grid, q, tol)?;
            if let Some((lambda, e)) = curve.failures.first().cloned() {
                return Err(CliError::from(e).at(Some(lambda), None, Some(q)));
            }
            curve.crossings()
        }
    };
    let curve = fit_frontier(&points)?;
    write_records(&[FitRecord::from(curve)], format, out).map_err(CliError::io)
}

#[derive(Debug, Serialize)]
struct TableRecord {
    n: usize,
    column: TableColumn,
    pure: &'static str,
    family: String,
    condition: String,
    b: Option<f64>,
    x_exp: Option<f64>,
    y_exp: Option<f64>,
    rss: Option<f64>,
    n_points: Option<usize>,
    rss_per_point: Option<f64>,
    error: Option<String>,
}

impl From<&TableRow> for TableRecord {
    fn from(r: &TableRow) -> Self {
        let condition = r
            .fit
            .map(|f| format!("p > {:.3} (1 - lambda^{:.2})^(1/{:.2})", f.b, f.y_exp, f.x_exp))
            .unwrap_or_default();
        Self {
            n: r.n,
            column: r.column,
            pure: if r.pure_non_separable { "NS" } else { "S" },
            family: r.family.to_string(),
            condition,
            b: r.fit.map(|f| f.b),
            x_exp: r.fit.map(|f| f.x_exp),
            y_exp: r.fit.map(|f| f.y_exp),
            rss: r.fit.map(|f| f.rss),
            n_points: r.fit.map(|f| f.n_points),
            rss_per_point: r.fit.map(|f| f.rss_per_point()),
            error: r.error.clone(),
        }
    }
}

impl Record for TableRecord {
    fn header() -> &'static [&'static str] {
        &["n", "column", "pure", "family", "condition", "b", "x_exp", "y_exp", "rss", "n_points", "rss_per_point", "error"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            match self.column {
                TableColumn::Ghz => "ghz".into(),
                TableColumn::W => "w".into(),
            },
            self.pure.into(),
            self.family.clone(),
            self.condition.clone(),
            fmt_opt(self.b),
            fmt_opt(self.x_exp),
            fmt_opt(self.y_exp),
            fmt_opt(self.rss),
            self.n_points.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt(self.rss_per_point),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn reproduce(a: &ReproduceArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    check_q(a.q)?;
    let grid = a.lambda_grid.as_ref().map(|g| g.0.clone()).unwrap_or_else(default_lambda_grid);
    check_transition_grid(&grid)?;
    let rows = reproduce_table(a.q, &grid);
    let records: Vec<TableRecord> = rows.iter().map(TableRecord::from).collect();
    write_records(&records, format, out).map_err(CliError::io)
}
