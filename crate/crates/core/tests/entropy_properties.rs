mod common;

use std::f64::consts::{FRAC_PI_4, PI};

use common::*;
use rindler_entropy::transition::{default_lambda_grid, transition_curve};
use rindler_entropy::{ar_for_state, EntropyQuery, StateFamily};

fn s(family: StateFamily, lambda: f64, q: f64) -> f64 {
    ar_for_state(&EntropyQuery::new(family, acc(lambda), q)).unwrap()
}

fn theta_grid() -> Vec<f64> {
    (1..=11).map(|k| k as f64 * PI / 24.0).collect()
}

#[test]
fn equal_weight_pure_states_approach_zero_monotonically() {
    let families = [
        StateFamily::PureGhz { n: 2, theta: FRAC_PI_4 },
        StateFamily::PureGhz { n: 5, theta: FRAC_PI_4 },
        StateFamily::PureW2 { theta: FRAC_PI_4 },
        StateFamily::PureW3 { theta: (1.0 / 3f64.sqrt()).acos(), phi: FRAC_PI_4 },
        StateFamily::PureWn { n: 4 },
    ];
    for family in families {
        for &q in &[1.5, 2.0, 4.0, 8.0] {
            let values: Vec<f64> = default_lambda_grid().into_iter().map(|l| s(family, l, q)).collect();
            for w in values.windows(2) {
                assert!(w[1] >= w[0] - 1e-6, "{family:?} q={q}: {} then {}", w[0], w[1]);
            }
            assert!(values[18].abs() < values[0].abs());
            assert!(s(family, 0.99, q).abs() < values[18].abs());
        }
    }
}

#[test]
fn bell_angle_is_most_non_separable() {
    let grid = theta_grid();
    let mut violations = Vec::new();
    for (name, make) in [
        ("pure-ghz2", (|t| StateFamily::PureGhz { n: 2, theta: t }) as fn(f64) -> StateFamily),
        ("pure-w2", |t| StateFamily::PureW2 { theta: t }),
    ] {
        for lambda in default_lambda_grid() {
            for &q in &[1.5, 2.0, 4.0, 8.0] {
                let argmin = grid
                    .iter()
                    .copied()
                    .min_by(|a, b| s(make(*a), lambda, q).total_cmp(&s(make(*b), lambda, q)))
                    .unwrap();
                if (argmin - FRAC_PI_4).abs() > 1e-12 {
                    violations.push(format!("{name} lambda={lambda:.2} q={q} argmin={:.0}pi/24", argmin * 24.0 / PI));
                }
            }
        }
    }
    assert!(violations.is_empty(), "{} violations: {violations:#?}", violations.len());
}

#[test]
fn mixed_entropy_increases_with_p() {
    for &lambda in &[0.2, 0.8] {
        let values: Vec<f64> = (0..=20)
            .map(|i| s(StateFamily::MixedW { n: 3, p: i as f64 / 20.0 }, lambda, 2.0))
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
        assert!(values[0] < 0.0 && values[20] > 0.0);
    }
}

#[test]
fn transition_curve_is_ordered_and_bracketed() {
    let family = StateFamily::MixedGhz { n: 3, p: 0.0 };
    let grid = [0.9, 0.1, 0.5];
    let curve = transition_curve(&family, &grid, 20.0, 1e-7).unwrap();
    assert!(curve.failures.is_empty());
    let lambdas: Vec<f64> = curve.points.iter().map(|t| t.lambda).collect();
    assert_eq!(lambdas, grid);
    for t in &curve.points {
        let at = |p| s(StateFamily::MixedGhz { n: 3, p }, t.lambda, 20.0);
        assert!(at(t.lower) < 0.0 && at(t.upper) >= 0.0);
        assert!(!t.non_monotone);
    }
    assert!(curve.points[0].p_star < curve.points[2].p_star && curve.points[2].p_star < curve.points[1].p_star);
}
