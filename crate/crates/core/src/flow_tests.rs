use super::*;
use crate::funclib::ConvexSpec;

fn pt(xs: &[f64]) -> Point {
    Point::new(xs.to_vec())
}

fn half_sq(dim: usize) -> ConvexSpec {
    ConvexSpec::half_sq_norm(dim)
}

fn abs1() -> ConvexSpec {
    ConvexSpec::scaled_norm(1, 1.0).unwrap()
}

#[test]
fn quadratic_flow_matches_exponential_decay() {
    // x' = -x from 2: discrete resolvent powers track 2 e^{-t}
    let traj = descend(&half_sq(1), &pt(&[2.0]), 0.01, 5.0).unwrap();
    let at_1 = (1.0 / 0.01) as usize;
    let exact = 2.0 * (-1.0f64).exp();
    assert!((traj.points[at_1][0] - exact).abs() / exact < 0.02);
    // closed-form resolvent power
    for (k, p) in traj.points.iter().enumerate().step_by(50) {
        let want = 2.0 / (1.01f64).powi(k as i32);
        assert!((p[0] - want).abs() < 1e-10);
    }
}

#[test]
fn abs_flow_arrives_in_finite_time_and_stays() {
    let h = 1e-3;
    let traj = descend(&abs1(), &pt(&[2.0]), h, 4.0).unwrap();
    let arrival = traj.arrival.expect("finite-time arrival");
    let t_arrival = traj.times[arrival];
    assert!((t_arrival - 2.0).abs() <= 2.0 * h, "arrived at {t_arrival}");
    // unit-speed decrease before arrival
    for k in 0..arrival - 1 {
        let d = traj.points[k][0] - traj.points[k + 1][0];
        assert!((d - h).abs() < 1e-12);
    }
    // stationary afterwards
    for k in arrival..traj.len() {
        assert_eq!(traj.points[k][0], 0.0);
    }
}

#[test]
fn indicator_interior_is_constant() {
    let ind = ConvexSpec::indicator_box(vec![0.0], vec![1.0]).unwrap();
    let traj = descend(&ind, &pt(&[0.5]), 0.1, 2.0).unwrap();
    assert!(traj.points.iter().all(|p| p[0] == 0.5));
    assert_eq!(traj.arrival, Some(1));
}

#[test]
fn start_outside_projects_or_errors() {
    let ind = ConvexSpec::indicator_box(vec![0.0], vec![1.0]).unwrap();
    let traj = descend(&ind, &pt(&[3.0]), 0.1, 1.0).unwrap();
    assert_eq!(traj.points[0][0], 1.0);

    // sum of two indicators: no exact projection for an infeasible start,
    // and no prox path even from a feasible one
    let sum = ConvexSpec::sum(vec![
        ConvexSpec::indicator_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
        ConvexSpec::indicator_ball(vec![0.5, 0.5], 1.0).unwrap(),
    ])
    .unwrap();
    assert!(matches!(
        descend(&sum, &pt(&[5.0, 5.0]), 0.1, 1.0),
        Err(FlowError::UnreachableStart)
    ));
    assert!(matches!(
        descend(&sum, &pt(&[0.25, 0.25]), 0.1, 1.0),
        Err(FlowError::Funclib(FunclibError::NoProxPath(_)))
    ));
}

#[test]
fn values_and_slopes_decrease_along_the_flow() {
    let specs = vec![
        half_sq(2),
        ConvexSpec::scaled_norm(2, 1.5).unwrap(),
        ConvexSpec::max_affine(vec![
            crate::funclib::AffinePiece { gradient: vec![1.0, 0.2], offset: 0.0 },
            crate::funclib::AffinePiece { gradient: vec![-0.5, -1.0], offset: 0.1 },
            crate::funclib::AffinePiece { gradient: vec![0.0, 1.0], offset: -0.2 },
        ])
        .unwrap(),
    ];
    for spec in &specs {
        let traj = descend(spec, &pt(&[1.0, -1.5]), 0.05, 3.0).unwrap();
        for k in 0..traj.len() - 1 {
            let a = traj.values[k].unwrap_finite();
            let b = traj.values[k + 1].unwrap_finite();
            assert!(b <= a + 1e-12, "value rose at step {k}");
            // discrete energy inequality of the implicit scheme
            let disp = traj.points[k].dist(&traj.points[k + 1]);
            assert!(a - b >= disp * disp / traj.step - 1e-9);
            if let (Some(ExtReal::Finite(sa)), Some(ExtReal::Finite(sb))) =
                (traj.slopes[k], traj.slopes[k + 1])
            {
                assert!(sb <= sa + 1e-9, "slope rose at step {k}");
                // step displacement bounded by h * slope
                assert!(disp <= traj.step * sa + 1e-9);
            }
        }
    }
}

#[test]
fn energy_identity_examples() {
    // smooth quadratic: O(h) defect
    let traj = descend(&half_sq(1), &pt(&[1.0]), 1e-3, 5.0).unwrap();
    let defect = energy_identity_defect(&traj).unwrap();
    assert!(defect <= 5e-3, "defect {defect}");

    // |x| before arrival: drop t matches t exactly up to one step
    let traj = descend(&abs1(), &pt(&[2.0]), 1e-3, 1.0).unwrap();
    let defect = energy_identity_defect(&traj).unwrap();
    assert!(defect <= 1e-3 + 1e-9, "defect {defect}");

    // constant function: zero defect
    let traj = descend(&ConvexSpec::constant(1, 3.0).unwrap(), &pt(&[0.7]), 0.1, 1.0).unwrap();
    assert_eq!(energy_identity_defect(&traj).unwrap(), 0.0);
}

#[test]
fn energy_defect_shrinks_linearly_in_h() {
    let d1 = energy_identity_defect(&descend(&half_sq(1), &pt(&[1.0]), 2e-3, 4.0).unwrap()).unwrap();
    let d2 = energy_identity_defect(&descend(&half_sq(1), &pt(&[1.0]), 1e-3, 4.0).unwrap()).unwrap();
    let ratio = d1 / d2;
    assert!(ratio > 1.5 && ratio < 2.5, "ratio {ratio}");
}

#[test]
fn infimizing_examples() {
    // g = f = x²/2
    let traj = descend(&half_sq(1), &pt(&[1.0]), 0.01, 25.0).unwrap();
    let v = infimizing_check(&traj, &half_sq(1), 1e-3).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // same slopes, shifted infimum
    let g = ConvexSpec::sum(vec![half_sq(1), ConvexSpec::constant(1, -1.0).unwrap()]).unwrap();
    let v = infimizing_check(&traj, &g, 1e-3).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // s_f >= s_g pair: f = 2|x| descends, g = |x| infimized along it
    let f2 = ConvexSpec::scaled_norm(1, 2.0).unwrap();
    let traj = descend(&f2, &pt(&[2.0]), 1e-3, 3.0).unwrap();
    let v = infimizing_check(&traj, &abs1(), 1e-3).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
}

#[test]
fn infimizing_reports_unmet_hypotheses() {
    // a short trajectory that never gets slope of g near zero
    let traj = descend(&half_sq(1), &pt(&[4.0]), 0.01, 0.05).unwrap();
    let v = infimizing_check(&traj, &half_sq(1), 1e-6).unwrap();
    assert_eq!(v.status, VerdictStatus::PreconditionFailed);
}

#[test]
fn flow_limit_examples() {
    // 2-d quadratic to the origin
    let traj = descend(&half_sq(2), &pt(&[1.0, 1.0]), 0.01, 25.0).unwrap();
    let v = flow_limit_check(&traj, &half_sq(2), 1e-3).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
    assert!(traj.final_point().norm() < 1e-3);

    // |x| from -3: finite-time arrival at 0, length 3
    let traj = descend(&abs1(), &pt(&[-3.0]), 1e-3, 5.0).unwrap();
    let v = flow_limit_check(&traj, &abs1(), 1e-6).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
    assert!((traj.length() - 3.0).abs() < 1e-9);

    // flat ray max(0, x): arrival in the zero-slope region x <= 0
    let ray = ConvexSpec::max_affine(vec![
        crate::funclib::AffinePiece { gradient: vec![0.0], offset: 0.0 },
        crate::funclib::AffinePiece { gradient: vec![1.0], offset: 0.0 },
    ])
    .unwrap();
    let traj = descend(&ray, &pt(&[2.0]), 1e-3, 5.0).unwrap();
    let v = flow_limit_check(&traj, &ray, 1e-9).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
    assert!(traj.final_point()[0] <= 1e-9);
}

#[test]
fn csv_export_shape() {
    let traj = descend(&half_sq(2), &pt(&[1.0, 2.0]), 0.5, 1.0).unwrap();
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,t,x0,x1,f,slope");
    assert_eq!(csv.lines().count(), traj.len() + 1);
}
