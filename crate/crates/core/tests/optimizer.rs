use yukawa_core::constraints::alpha_min;
use yukawa_core::model::units::{nm, pn};
use yukawa_core::optimizer::{
    evaluate, optimize, Design, Interval, Objective, OptimizationProblem,
};
use yukawa_core::presets::proposed_config;
use yukawa_core::MeasurementPoint;

fn proposed_design() -> Design {
    Design {
        a1: nm(90.0),
        a2: nm(33.0),
        period: nm(200.0),
        a: nm(125.0),
    }
}

#[test]
fn proposal_box_beats_or_ties_the_proposed_design() {
    let problem = OptimizationProblem::proposal_box();
    let cfg = proposed_config();
    let r = optimize(&problem, &cfg).unwrap();
    let design_value = alpha_min(&cfg, &MeasurementPoint::new(nm(125.0), pn(1.11)), nm(19.0))
        .unwrap()
        .unwrap();
    assert!(
        r.objective <= design_value,
        "{:e} > {design_value:e}",
        r.objective
    );

    assert!(problem.is_feasible(&r.design));
    assert!(r.design.gap() >= problem.min_gap * (1.0 - 1e-9));
    for (d, v) in &r.scan {
        assert!(r.objective <= *v, "scan point {d:?} has {v:e}");
    }
    let again = evaluate(&problem, &cfg, &r.design).unwrap();
    assert!(((again - r.objective) / r.objective).abs() <= 1e-12);
    assert_eq!(r.trace.last().unwrap().objective, r.objective);
    assert!(r.trace.windows(2).all(|w| w[1].objective < w[0].objective));
}

#[test]
fn results_are_bit_reproducible() {
    let problem = OptimizationProblem::proposal_box();
    let a = optimize(&problem, &proposed_config()).unwrap();
    let b = optimize(&problem, &proposed_config()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn enlarging_the_box_never_hurts() {
    let cfg = proposed_config();
    let base = OptimizationProblem {
        grid_points: 6,
        ..OptimizationProblem::proposal_box()
    };
    let boxes = [
        (
            Interval::new(nm(80.0), nm(90.0)),
            Interval::new(nm(25.0), nm(33.0)),
            Interval::new(nm(200.0), nm(300.0)),
            Interval::new(nm(120.0), nm(140.0)),
        ),
        (
            Interval::new(nm(70.0), nm(92.0)),
            Interval::new(nm(20.0), nm(35.0)),
            Interval::new(nm(180.0), nm(400.0)),
            Interval::new(nm(100.0), nm(160.0)),
        ),
        (
            Interval::new(nm(40.0), nm(95.0)),
            Interval::new(nm(10.0), nm(40.0)),
            Interval::new(nm(150.0), nm(600.0)),
            Interval::new(nm(52.0), nm(300.0)),
        ),
    ];
    let mut last = f64::INFINITY;
    for (a1, a2, period, separation) in boxes {
        let p = OptimizationProblem {
            a1,
            a2,
            period,
            separation,
            ..base.clone()
        };
        let r = optimize(&p, &cfg).unwrap();
        assert!(r.objective <= last, "{:e} > {last:e}", r.objective);
        last = r.objective;
    }
}

#[test]
fn widening_only_a2_never_hurts() {
    let cfg = proposed_config();
    let d = proposed_design();
    let narrow = OptimizationProblem {
        a1: Interval::point(d.a1),
        a2: Interval::point(d.a2),
        period: Interval::point(d.period),
        separation: Interval::point(d.a),
        ..OptimizationProblem::proposal_box()
    };
    let wide = OptimizationProblem {
        a2: Interval::new(nm(10.0), nm(40.0)),
        ..narrow.clone()
    };
    let n = optimize(&narrow, &cfg).unwrap();
    let w = optimize(&wide, &cfg).unwrap();
    assert!(w.objective <= n.objective);
}

#[test]
fn window_objective_is_a_geometric_mean() {
    let cfg = proposed_config();
    let d = proposed_design();
    let p = OptimizationProblem {
        a1: Interval::point(d.a1),
        a2: Interval::point(d.a2),
        period: Interval::point(d.period),
        separation: Interval::point(d.a),
        objective: Objective::LogIntegrated {
            lo: nm(4.5),
            hi: nm(37.0),
            n: 2,
        },
        ..OptimizationProblem::proposal_box()
    };
    let r = optimize(&p, &cfg).unwrap();
    let pt = MeasurementPoint::new(d.a, pn(1.11));
    let x = alpha_min(&cfg, &pt, nm(4.5)).unwrap().unwrap();
    let y = alpha_min(&cfg, &pt, nm(37.0)).unwrap().unwrap();
    assert!((r.objective / (x * y).sqrt() - 1.0).abs() < 1e-12);
}
