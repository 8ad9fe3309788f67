use super::*;
use crate::funclib::NodeTemplate;

fn pt(x: f64) -> Point {
    Point::scalar(x)
}

fn dyadic_indices(max_pow: u32) -> Vec<u32> {
    (0..=max_pow).map(|k| 1u32 << k).collect()
}

fn family(member: &str, limit: &str, max_pow: u32, dim: usize) -> FunctionSeq {
    let mt: NodeTemplate = serde_json::from_str(member).unwrap();
    let lt: NodeTemplate = serde_json::from_str(limit).unwrap();
    FunctionSeq::from_generator(
        dyadic_indices(max_pow),
        |n| mt.resolve(Some(n as f64), dim),
        lt.resolve(None, dim).unwrap(),
    )
    .unwrap()
}

fn grid1(count: usize, lo: f64, hi: f64) -> Vec<Point> {
    (0..count)
        .map(|k| pt(lo + (hi - lo) * k as f64 / (count - 1) as f64))
        .collect()
}

fn abs_shift() -> FunctionSeq {
    family(
        r#"{"kind": "translate", "z": ["1/n"], "inner": {"kind": "scaled_norm", "alpha": 1}}"#,
        r#"{"kind": "scaled_norm", "alpha": 1}"#,
        11,
        1,
    )
}

fn abs_shift_witness(seq: &FunctionSeq) -> NcWitness {
    NcWitness {
        triples: seq
            .indices()
            .iter()
            .map(|n| (*n, pt(1.0 / *n as f64), pt(0.0)))
            .collect(),
        limit_x: pt(0.0),
        limit_xstar: pt(0.0),
    }
}

#[test]
fn nc_check_examples() {
    // f_n = x²/2 + 1/n at x_n = 0
    let seq = family(
        r#"{"kind": "sum", "terms": [{"kind": "quadratic", "q": [[1]]}, {"kind": "constant", "value": "1/n"}]}"#,
        r#"{"kind": "quadratic", "q": [[1]]}"#,
        11,
        1,
    );
    let w = NcWitness {
        triples: seq.indices().iter().map(|n| (*n, pt(0.0), pt(0.0))).collect(),
        limit_x: pt(0.0),
        limit_xstar: pt(0.0),
    };
    let v = nc_check(&seq, &w, 0.02, &NcConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // f_n ≡ n: the value component diverges
    let seq = family(
        r#"{"kind": "constant", "value": "n"}"#,
        r#"{"kind": "constant", "value": 0}"#,
        11,
        1,
    );
    let w = NcWitness {
        triples: seq.indices().iter().map(|n| (*n, pt(0.0), pt(0.0))).collect(),
        limit_x: pt(0.0),
        limit_xstar: pt(0.0),
    };
    let v = nc_check(&seq, &w, 0.02, &NcConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Fails);

    // shifted kinks: witness rides the kink, limit pair at the kink of |·|
    let seq = abs_shift();
    let v = nc_check(&seq, &abs_shift_witness(&seq), 0.02, &NcConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
}

#[test]
fn nc_check_rejects_infeasible_triples() {
    let seq = abs_shift();
    let w = NcWitness {
        // x* = 3 is never a subgradient of |x - 1/n|
        triples: vec![(1, pt(2.0), pt(3.0))],
        limit_x: pt(0.0),
        limit_xstar: pt(0.0),
    };
    assert!(matches!(
        nc_check(&seq, &w, 0.02, &NcConfig::default()),
        Err(TheoremError::InfeasibleTriple(1, _))
    ));
}

#[test]
fn nc_weak_examples() {
    let seq = family(
        r#"{"kind": "sum", "terms": [{"kind": "quadratic", "q": [[1]]}, {"kind": "constant", "value": "1/n"}]}"#,
        r#"{"kind": "quadratic", "q": [[1]]}"#,
        11,
        1,
    );
    let w: Vec<(u32, Point)> = seq.indices().iter().map(|n| (*n, pt(0.0))).collect();
    let v = nc_weak_check(&seq, &w, Some(&pt(0.0)), 0.02, &NcConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // n y² at x_n = 1/n: slopes 2, values 1/n → 0 = f(0) for the indicator
    let seq = family(
        r#"{"kind": "quadratic", "q": [["2*n"]]}"#,
        r#"{"kind": "indicator_box", "lo": [0], "hi": [0]}"#,
        11,
        1,
    );
    let w: Vec<(u32, Point)> = seq
        .indices()
        .iter()
        .map(|n| (*n, pt(1.0 / *n as f64)))
        .collect();
    let v = nc_weak_check(&seq, &w, Some(&pt(0.0)), 0.02, &NcConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // f_n ≡ n diverges in value
    let seq = family(
        r#"{"kind": "constant", "value": "n"}"#,
        r#"{"kind": "constant", "value": 0}"#,
        11,
        1,
    );
    let w: Vec<(u32, Point)> = seq.indices().iter().map(|n| (*n, pt(0.0))).collect();
    let v = nc_weak_check(&seq, &w, Some(&pt(0.0)), 0.02, &NcConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Fails);
}

#[test]
fn comparison_examples() {
    let grid = grid1(21, -2.0, 2.0);
    let half_sq = ConvexSpec::half_sq_norm(1);
    let shifted =
        ConvexSpec::sum(vec![half_sq.clone(), ConvexSpec::constant(1, -1.0).unwrap()]).unwrap();
    let v = comparison_check(&half_sq, &shifted, &grid, 1e-9).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    let two_abs = ConvexSpec::scaled_norm(1, 2.0).unwrap();
    let abs = ConvexSpec::scaled_norm(1, 1.0).unwrap();
    let v = comparison_check(&two_abs, &abs, &grid, 1e-9).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // slope precondition violated: s_{x²/2} = |x| < 2|x| = s_{x²}
    let x_sq = ConvexSpec::quadratic(vec![vec![2.0]], vec![0.0], 0.0).unwrap();
    let v = comparison_check(&half_sq, &x_sq, &grid, 1e-9).unwrap();
    assert_eq!(v.status, VerdictStatus::PreconditionFailed);

    // unbounded-below inputs are errors
    let tilted = ConvexSpec::tilt(vec![2.0], abs).unwrap();
    assert!(matches!(
        comparison_check(&tilted, &half_sq, &grid, 1e-9),
        Err(TheoremError::Funclib(FunclibError::UnboundedBelow))
    ));
}

#[test]
fn graph_samples_work_for_exact_classes() {
    let cfg = GraphConfig::default_for_dim(1);
    let abs = ConvexSpec::scaled_norm(1, 1.0).unwrap();
    let g = graph_samples(&abs, &cfg).unwrap();
    assert!(g.triples.iter().any(|(x, s, _)| x[0] == 0.0 && s[0] == -1.0));
    assert!(g.triples.iter().any(|(x, s, _)| x[0] == 0.0 && s[0] == 1.0));

    let quad2 = ConvexSpec::half_sq_norm(2);
    let cfg2 = GraphConfig::default_for_dim(2);
    let g = graph_samples(&quad2, &cfg2).unwrap();
    for (x, s, v) in &g.triples {
        assert!(x.dist(s) < 1e-12);
        assert!((v - 0.5 * x.norm().powi(2)).abs() < 1e-12);
    }

    // no exact graphs for a 2-d norm
    let norm2 = ConvexSpec::scaled_norm(2, 1.0).unwrap();
    assert!(matches!(
        graph_samples(&norm2, &cfg2),
        Err(TheoremError::MissingGraphSamples)
    ));
}

#[test]
fn attouch_holds_on_shifted_abs() {
    let seq = abs_shift();
    let cfg = AttouchConfig::default_for_dim(1);
    let grid = grid1(21, -1.0, 1.0);
    let report = attouch_check(&seq, &abs_shift_witness(&seq), &grid, &cfg).unwrap();
    assert_eq!(report.epi.status, VerdictStatus::Holds);
    assert_eq!(report.graphs_nc.status, VerdictStatus::Holds);
    assert_eq!(report.triples.status, VerdictStatus::Holds);
    assert_eq!(report.consistency, Consistency::Consistent);
}

#[test]
fn attouch_counterexample_pattern() {
    // f_n ≡ n: subdifferential graphs agree, NC and the value graphs fail
    let seq = family(
        r#"{"kind": "constant", "value": "n"}"#,
        r#"{"kind": "constant", "value": 0}"#,
        11,
        1,
    );
    let w = NcWitness {
        triples: seq.indices().iter().map(|n| (*n, pt(0.0), pt(0.0))).collect(),
        limit_x: pt(0.0),
        limit_xstar: pt(0.0),
    };
    let cfg = AttouchConfig::default_for_dim(1);
    let grid = grid1(11, -1.0, 1.0);
    let report = attouch_check(&seq, &w, &grid, &cfg).unwrap();
    assert_eq!(report.epi.status, VerdictStatus::Fails);
    assert_eq!(report.graphs_nc.status, VerdictStatus::Fails); // NC part fails
    assert_eq!(report.triples.status, VerdictStatus::Fails);
    assert_eq!(report.consistency, Consistency::Consistent);
}

#[test]
fn attouch_trivial_family() {
    let seq = family(
        r#"{"kind": "scaled_norm", "alpha": 1}"#,
        r#"{"kind": "scaled_norm", "alpha": 1}"#,
        11,
        1,
    );
    let w = NcWitness {
        triples: seq.indices().iter().map(|n| (*n, pt(1.0), pt(1.0))).collect(),
        limit_x: pt(1.0),
        limit_xstar: pt(1.0),
    };
    let cfg = AttouchConfig::default_for_dim(1);
    let report = attouch_check(&seq, &w, &grid1(21, -1.0, 1.0), &cfg).unwrap();
    assert_eq!(report.consistency, Consistency::Consistent);
    assert_eq!(report.epi.status, VerdictStatus::Holds);
}

#[test]
fn main_theorem_on_shifted_abs() {
    let seq = abs_shift();
    let cfg = MainConfig::default();
    let report =
        main_theorem_check(&seq, Some(&abs_shift_witness(&seq)), &grid1(21, -1.0, 1.0), &cfg)
            .unwrap();
    assert_eq!(report.epi.status, VerdictStatus::Holds);
    assert_eq!(report.slope_epi.status, VerdictStatus::Holds);
    assert_eq!(report.nc.status, VerdictStatus::Holds);
    assert_eq!(report.inf_condition.status, VerdictStatus::Holds);
    assert_eq!(report.consistency, Consistency::Consistent);
}

#[test]
fn main_theorem_counterexample_pattern() {
    // slope epi-convergence holds (all slopes ≡ 0), everything else fails
    let seq = family(
        r#"{"kind": "constant", "value": "n"}"#,
        r#"{"kind": "constant", "value": 0}"#,
        11,
        1,
    );
    let w = NcWitness {
        triples: seq.indices().iter().map(|n| (*n, pt(0.0), pt(0.0))).collect(),
        limit_x: pt(0.0),
        limit_xstar: pt(0.0),
    };
    let report =
        main_theorem_check(&seq, Some(&w), &grid1(11, -1.0, 1.0), &MainConfig::default()).unwrap();
    assert_eq!(report.slope_epi.status, VerdictStatus::Holds);
    assert_eq!(report.nc.status, VerdictStatus::Fails);
    assert_eq!(report.epi.status, VerdictStatus::Fails);
    assert_eq!(report.inf_condition.status, VerdictStatus::Fails);
    assert_eq!(report.sub_two().status, VerdictStatus::Fails);
    assert_eq!(report.sub_three().status, VerdictStatus::Fails);
    assert_eq!(report.consistency, Consistency::Consistent);
}

#[test]
fn main_theorem_uniform_shift() {
    // finite tails bias inf f_u by 1/n at the first tail index; the ladder
    // must reach deep enough for the 1e-3 infimum tolerance
    let seq = family(
        r#"{"kind": "sum", "terms": [{"kind": "quadratic", "q": [[1]]}, {"kind": "constant", "value": "1/n"}]}"#,
        r#"{"kind": "quadratic", "q": [[1]]}"#,
        17,
        1,
    );
    let w = NcWitness {
        triples: seq.indices().iter().map(|n| (*n, pt(0.0), pt(0.0))).collect(),
        limit_x: pt(0.0),
        limit_xstar: pt(0.0),
    };
    let report =
        main_theorem_check(&seq, Some(&w), &grid1(21, -1.0, 1.0), &MainConfig::default()).unwrap();
    assert_eq!(report.consistency, Consistency::Consistent);
    assert_eq!(report.epi.status, VerdictStatus::Holds);
}

#[test]
fn main_theorem_requires_finite_infimum() {
    // limit unbounded below: hypothesis violated
    let mt: NodeTemplate = serde_json::from_str(
        r#"{"kind": "tilt", "v": [2], "inner": {"kind": "scaled_norm", "alpha": 1}}"#,
    )
    .unwrap();
    let seq = FunctionSeq::from_generator(
        dyadic_indices(11),
        |n| mt.resolve(Some(n as f64), 1),
        mt.resolve(Some(1.0), 1).unwrap(),
    )
    .unwrap();
    let report =
        main_theorem_check(&seq, None, &grid1(11, -1.0, 1.0), &MainConfig::default()).unwrap();
    assert_eq!(report.epi.status, VerdictStatus::PreconditionFailed);
    assert_eq!(report.consistency, Consistency::Undecided);
}

#[test]
fn tilt_covariance_of_value_components() {
    // adding the same constant to every member shifts value defects by
    // exactly that constant and leaves slope verdicts untouched
    let seq = abs_shift();
    let shift = 2.5;
    let shifted_members: Vec<ConvexSpec> = seq
        .members()
        .iter()
        .map(|m| {
            ConvexSpec::sum(vec![
                m.clone(),
                ConvexSpec::constant(1, shift).unwrap(),
            ])
            .unwrap()
        })
        .collect();
    let shifted_limit = ConvexSpec::sum(vec![
        seq.limit().clone(),
        ConvexSpec::constant(1, shift).unwrap(),
    ])
    .unwrap();
    let shifted = FunctionSeq::new(seq.indices().to_vec(), shifted_members, shifted_limit).unwrap();

    let grid = grid1(11, -1.0, 1.0);
    let cfg = MainConfig::default();
    let a = main_theorem_check(&seq, Some(&abs_shift_witness(&seq)), &grid, &cfg).unwrap();
    let b = main_theorem_check(&shifted, Some(&abs_shift_witness(&seq)), &grid, &cfg).unwrap();
    assert_eq!(a.slope_epi.status, b.slope_epi.status);
    for (da, db) in a.slope_diags.iter().zip(&b.slope_diags) {
        assert_eq!(da.lower, db.lower);
        assert_eq!(da.upper, db.upper);
    }
    for (da, db) in a.epi_diags.iter().zip(&b.epi_diags) {
        if let (ExtReal::Finite(x), ExtReal::Finite(y)) = (da.lower, db.lower) {
            assert!((y - x - shift).abs() < 1e-12);
        }
        if let (ExtReal::Finite(x), ExtReal::Finite(y)) = (da.upper, db.upper) {
            assert!((y - x - shift).abs() < 1e-12);
        }
    }
}

#[test]
fn consistency_classifier() {
    use VerdictStatus::*;
    assert_eq!(consistency_of(&[Holds, Holds, Holds]), Consistency::Consistent);
    assert_eq!(consistency_of(&[Fails, Fails, Fails]), Consistency::Consistent);
    assert_eq!(consistency_of(&[Holds, Fails, Holds]), Consistency::Broken);
    assert_eq!(
        consistency_of(&[Holds, Inconclusive, Holds]),
        Consistency::Undecided
    );
}
