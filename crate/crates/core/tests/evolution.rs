mod common;

use std::sync::Arc;

use common::*;
use fpdvi_core::evolution::{
    apply_gamma, refine_and_estimate_order, solve_fpdvi, EvolutionError, FpdviProblem,
    OperatorFamilyTable, Reference, SolveOptions, Trajectory,
};
use fpdvi_core::fracops::{GridKind, TimeGrid};
use fpdvi_core::mittag_leffler::gamma::gamma;
use fpdvi_core::mittag_leffler::GeneratorMatrix;
use fpdvi_core::vi_solver::{ConvexFunction, ConvexSet, MonotoneMap};
use nalgebra::{dvector, DMatrix, DVector};

fn constant_trajectory(grid: &TimeGrid, n: usize, m: usize) -> Trajectory {
    Trajectory {
        grid: grid.clone(),
        theta: vec![DVector::zeros(n); grid.len()],
        u: vec![DVector::zeros(m); grid.len()],
    }
}

#[test]
fn tables_for_zero_generator() {
    let alpha = 0.7;
    let grid = TimeGrid::uniform(2.0, 16).unwrap();
    let a = GeneratorMatrix::new(DMatrix::zeros(2, 2)).unwrap();
    let t = OperatorFamilyTable::build(alpha, &a, &grid).unwrap();
    let eye = DMatrix::<f64>::identity(2, 2);
    for i in 0..grid.len() {
        assert_eq!(t.e1(i), &eye);
        let mass: f64 = (0..i).map(|j| t.weight(i, j)).sum();
        let want = grid.nodes()[i].powf(alpha) / alpha;
        assert!((mass - want).abs() <= 1e-14 * want.max(1.0), "node {i}");
        for j in 0..i {
            assert!(t.weight(i, j) > 0.0);
            assert!((t.e2(i, j) - &eye / gamma(alpha)).abs().max() < 1e-15);
        }
    }
    assert_eq!(t.e2_len(), 16);
}

#[test]
fn classical_weights_are_the_step() {
    let grid = TimeGrid::uniform(1.0, 8).unwrap();
    let t = OperatorFamilyTable::build(1.0, &scalar(-1.0), &grid).unwrap();
    for i in 1..grid.len() {
        for j in 0..i {
            assert!((t.weight(i, j) - 0.125).abs() < 1e-15);
        }
    }
}

#[test]
fn graded_tables_cover_every_midpoint() {
    let grid = TimeGrid::graded(1.0, 12, 2.0).unwrap();
    let t = OperatorFamilyTable::build(0.5, &scalar(-1.0), &grid).unwrap();
    for i in 1..grid.len() {
        for j in 0..i {
            let d = grid.nodes()[i] - 0.5 * (grid.nodes()[j] + grid.nodes()[j + 1]);
            let want = fpdvi_core::mittag_leffler::ml_real(
                fpdvi_core::mittag_leffler::MLParams::new(0.5, 0.5).unwrap(),
                -d.sqrt(),
            )
            .unwrap();
            assert!((t.e2(i, j)[(0, 0)] - want).abs() < 1e-13);
        }
    }
}

#[test]
fn gamma_without_forcing_is_the_free_evolution() {
    let p = scalar_decay(0.5, -2.0, 3.0);
    let grid = TimeGrid::uniform(1.0, 32).unwrap();
    let t = OperatorFamilyTable::build(0.5, p.generator(), &grid).unwrap();
    let out = apply_gamma(&p, &t, &constant_trajectory(&grid, 1, 1)).unwrap();
    for (xi, th) in grid.nodes().iter().zip(&out.theta) {
        assert!((th[0] - 3.0 * ml1(0.5, -2.0 * xi.sqrt())).abs() < 1e-13);
    }
}

#[test]
fn gamma_with_constant_forcing_is_exact() {
    let alpha = 0.35;
    let p = constant_forcing(alpha, 0.25);
    let grid = TimeGrid::graded(1.0, 40, 1.7).unwrap();
    let t = OperatorFamilyTable::build(alpha, p.generator(), &grid).unwrap();
    let out = apply_gamma(&p, &t, &constant_trajectory(&grid, 1, 1)).unwrap();
    for (xi, th) in grid.nodes().iter().zip(&out.theta) {
        let want = 0.25 + xi.powf(alpha) / gamma(alpha + 1.0);
        assert!((th[0] - want).abs() < 1e-8);
    }
}

#[test]
fn gamma_classical_semigroup() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.3, -2.0]);
    let theta0 = dvector![1.0, -2.0];
    let p = FpdviProblem::builder(
        1.0,
        1.0,
        GeneratorMatrix::new(a.clone()).unwrap(),
        ConvexSet::cube(1, -1.0, 1.0).unwrap(),
        MonotoneMap::zero(1),
        ConvexFunction::Zero,
    )
    .initial_value(theta0.clone())
    .build()
    .unwrap();
    let grid = TimeGrid::uniform(1.0, 10).unwrap();
    let t = OperatorFamilyTable::build(1.0, p.generator(), &grid).unwrap();
    let out = apply_gamma(&p, &t, &constant_trajectory(&grid, 2, 1)).unwrap();
    for (xi, th) in grid.nodes().iter().zip(&out.theta) {
        let want = (&a * *xi).exp() * &theta0;
        assert!((th - &want).norm() <= 1e-6 * want.norm());
    }
}

#[test]
fn scalar_decay_converges_in_one_iteration() {
    let grid = TimeGrid::uniform(1.0, 256).unwrap();
    let out = solve_fpdvi(
        &scalar_decay(0.5, -1.0, 1.0),
        &grid,
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(out.report.iterations, 1);
    assert!(out.report.converged);
    for (xi, th) in grid.nodes().iter().zip(&out.trajectory.theta) {
        assert!((th[0] - ml1(0.5, -xi.sqrt())).abs() < 1e-10);
    }
}

#[test]
fn coupled_benchmark_tracks_mittag_leffler_growth() {
    let alpha = 0.6;
    let grid = TimeGrid::uniform(1.0, 512).unwrap();
    let opts = SolveOptions::default();
    let out = solve_fpdvi(&coupled_growth(alpha), &grid, &opts).unwrap();
    let mut worst: f64 = 0.0;
    for (xi, th) in grid.nodes().iter().zip(&out.trajectory.theta) {
        let want = ml1(alpha, xi.powf(alpha));
        worst = worst.max(((th[0] - want) / want).abs());
    }
    assert!(worst <= 1e-3, "{worst}");
    // mild-solution identity and control feasibility
    assert!(out.report.fixed_point_defect <= 2.0 * opts.tol);
    assert!(out.report.max_vi_residual <= opts.vi_tol);
    let k = ConvexSet::cube(1, -10.0, 10.0).unwrap();
    for u in &out.trajectory.u {
        assert!((k.project(u).unwrap() - u).norm() <= 1e-9);
    }
    // contraction: the sup-norm change never increases at full damping
    assert!(
        out.report.history.windows(2).all(|w| w[1] <= w[0]),
        "{:?}",
        out.report.history
    );
}

#[test]
fn nonlocal_condition_matches_frozen_reference() {
    let frozen = NONLOCAL_REFERENCE;
    for (xi, v) in frozen {
        assert!((v - nonlocal_half_exact(0.6, xi)).abs() < 5e-7);
    }
    let tol = 1e-8;
    let grid = TimeGrid::uniform(1.0, 512).unwrap();
    let opts = SolveOptions {
        tol,
        ..SolveOptions::default()
    };
    let out = solve_fpdvi(&nonlocal_half(0.6), &grid, &opts).unwrap();
    let th = &out.trajectory.theta;
    assert!((th[0][0] - th[512][0] / 2.0).abs() <= tol);
    for (xi, v) in frozen {
        let got = grid.interpolate(th, xi)[0];
        assert!((got - v).abs() <= 1e-3, "{xi}: {got} vs {v}");
    }
}

#[test]
fn classical_limit_matches_variation_of_constants() {
    let bench = ClassicalLinear::new();
    let grid = TimeGrid::uniform(1.0, 256).unwrap();
    let out = solve_fpdvi(&bench.problem(), &grid, &SolveOptions::default()).unwrap();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (xi, th) in grid.nodes().iter().zip(&out.trajectory.theta) {
        let want = bench.exact(*xi);
        err = err.max((th - &want).norm());
        scale = scale.max(want.norm());
    }
    assert!(err / scale <= 1e-4, "{}", err / scale);
}

#[test]
fn graded_grid_solve() {
    let grid = TimeGrid::graded(1.0, 64, 2.0 / 0.5).unwrap();
    let out = solve_fpdvi(
        &scalar_decay(0.5, -1.0, 1.0),
        &grid,
        &SolveOptions::default(),
    )
    .unwrap();
    for (xi, th) in grid.nodes().iter().zip(&out.trajectory.theta) {
        assert!((th[0] - ml1(0.5, -xi.sqrt())).abs() < 1e-10);
    }
}

#[test]
fn solves_are_deterministic() {
    let grid = TimeGrid::uniform(1.0, 64).unwrap();
    let opts = SolveOptions::default();
    let a = solve_fpdvi(&nonlocal_half(0.6), &grid, &opts).unwrap();
    let b = solve_fpdvi(&nonlocal_half(0.6), &grid, &opts).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.report, b.report);
}

#[test]
fn oscillating_instance_reports_non_convergence() {
    // h(theta) = 1 - theta(T) with no dynamics maps c to 1 - c
    let p = FpdviProblem::builder(
        0.5,
        1.0,
        scalar(0.0),
        ConvexSet::cube(1, -1.0, 1.0).unwrap(),
        MonotoneMap::scaled_identity(1, 1.0).unwrap(),
        ConvexFunction::Zero,
    )
    .h(Arc::new(|_, path: &[DVector<f64>]| {
        path[path.len() - 1].map(|v| 1.0 - v)
    }))
    .build()
    .unwrap();
    let grid = TimeGrid::uniform(1.0, 16).unwrap();
    let opts = SolveOptions {
        max_outer: 25,
        ..SolveOptions::default()
    };
    match solve_fpdvi(&p, &grid, &opts) {
        Err(EvolutionError::MaxOuterExceeded(out)) => {
            assert!(!out.report.converged);
            assert_eq!(out.report.iterations, 25);
            assert!((out.report.final_change - 1.0).abs() < 1e-12);
        }
        other => panic!("expected MaxOuterExceeded, got {other:?}"),
    }
    // damping 1/2 lands on the fixed point c = 1/2
    let damped = SolveOptions {
        damping: 0.5,
        ..opts
    };
    let out = solve_fpdvi(&p, &grid, &damped).unwrap();
    assert!((out.trajectory.theta[0][0] - 0.5).abs() < 1e-10);
}

#[test]
fn rejects_bad_configuration() {
    let grid = TimeGrid::uniform(2.0, 16).unwrap();
    let p = scalar_decay(0.5, -1.0, 1.0);
    assert!(matches!(
        solve_fpdvi(&p, &grid, &SolveOptions::default()),
        Err(EvolutionError::GridMismatch(_))
    ));
    let grid = TimeGrid::uniform(1.0, 16).unwrap();
    let bad = SolveOptions {
        damping: 0.0,
        ..SolveOptions::default()
    };
    assert!(solve_fpdvi(&p, &grid, &bad).is_err());
    let wrong_b = FpdviProblem::builder(
        0.5,
        1.0,
        scalar(-1.0),
        ConvexSet::cube(2, -1.0, 1.0).unwrap(),
        MonotoneMap::zero(2),
        ConvexFunction::Zero,
    )
    .b(Arc::new(|_, _| DMatrix::zeros(1, 3)))
    .build();
    assert!(matches!(wrong_b, Err(EvolutionError::DimensionMismatch(_))));
}

#[test]
fn order_fit_skipped_without_quadrature_error() {
    let p = scalar_decay(0.5, -1.0, 1.0);
    let exact = Reference::Analytic(Arc::new(|t: f64| {
        DVector::from_element(1, ml1(0.5, -t.sqrt()))
    }));
    let study = refine_and_estimate_order(
        &p,
        16,
        3,
        GridKind::Uniform,
        &exact,
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(study.rows.len(), 3);
    assert!(study.rows.iter().all(|r| r.1 < 1e-12));
    assert_eq!(study.order, None);
}

#[test]
fn classical_order_is_at_least_one() {
    let bench = ClassicalLinear::new();
    let problem = bench.problem();
    let exact = Reference::Analytic(Arc::new(move |t: f64| bench.exact(t)));
    let study = refine_and_estimate_order(
        &problem,
        16,
        4,
        GridKind::Uniform,
        &exact,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(study.order.unwrap() >= 0.9, "{study:?}");
}
