use super::*;
use crate::funclib::NodeTemplate;

fn pt(x: f64) -> Point {
    Point::scalar(x)
}

fn singleton_sets(f: impl Fn(u32) -> f64, count: u32) -> Vec<SampledSet> {
    (1..=count)
        .map(|n| SampledSet::from_points(vec![pt(f(n))], 0.01))
        .collect()
}

#[test]
fn liminf_defect_examples() {
    // S = {0}, S_n = {1/n}: tail distances are at most 1/40 for n >= 40
    let target = SampledSet::from_points(vec![pt(0.0)], 0.01);
    let seq = singleton_sets(|n| 1.0 / n as f64, 60);
    let d = pk_liminf_defect(&target, &seq).unwrap();
    assert!(d <= 1.0 / 40.0, "defect {d}");

    // adding the never-approximated point 1 pushes the defect to ~1
    let target = SampledSet::from_points(vec![pt(0.0), pt(1.0)], 0.01);
    let d = pk_liminf_defect(&target, &seq).unwrap();
    assert!((d - 1.0).abs() < 1.0 / 40.0, "defect {d}");
}

#[test]
fn liminf_defect_circles() {
    // unit circle vs circles of radius 1 + 1/n: radial distance 1/n + grid slack
    let h = 2.0 * std::f64::consts::PI / 64.0;
    let circle = |r: f64| -> Vec<Point> {
        (0..64)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                Point::new(vec![r * a.cos(), r * a.sin()])
            })
            .collect()
    };
    let target = SampledSet::from_points(circle(1.0), h);
    let seq: Vec<SampledSet> = (1..=60)
        .map(|n| SampledSet::from_points(circle(1.0 + 1.0 / n as f64), h))
        .collect();
    let d = pk_liminf_defect(&target, &seq).unwrap();
    assert!(d <= 1.0 / 40.0 + 2.0 * h, "defect {d}");
}

#[test]
fn limsup_defect_examples() {
    // alternating {0}, {1} clusters at both points
    let seq: Vec<SampledSet> = (1..=12)
        .map(|n| SampledSet::from_points(vec![pt((n % 2) as f64)], 0.01))
        .collect();
    let both = SampledSet::from_points(vec![pt(0.0), pt(1.0)], 0.01);
    let d = pk_limsup_defect(&both, &seq, None).unwrap();
    assert!(d <= 0.03, "defect {d}");
    // against only {0} the cluster at 1 escapes
    let zero_only = SampledSet::from_points(vec![pt(0.0)], 0.01);
    let d = pk_limsup_defect(&zero_only, &seq, None).unwrap();
    assert!((d - 1.0).abs() < 1e-12);

    // escaping sequence S_n = {n}: nothing recurs, defect 0
    let seq = singleton_sets(|n| n as f64, 12);
    let empty_target = SampledSet::from_points(vec![], 0.01);
    let d = pk_limsup_defect(&empty_target, &seq, None).unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn limsup_defect_segments() {
    let h = 0.02;
    let n_count = 60;
    let sample_segment = |hi: f64| -> Vec<Point> {
        let count = (hi / h).ceil() as usize + 1;
        (0..count)
            .map(|k| pt((k as f64 * h).min(hi)))
            .collect()
    };
    let target = SampledSet::from_points(sample_segment(1.0), h);
    let seq: Vec<SampledSet> = (1..=n_count)
        .map(|n| SampledSet::from_points(sample_segment(1.0 + 1.0 / n as f64), h))
        .collect();
    let d = pk_limsup_defect(&target, &seq, None).unwrap();
    // a point 1 + δ recurs in members with 1/m >= δ - τ, so candidates reach
    // δ <= τ + 3/N; the exact interval distance bounds the defect by that
    let bound = 3.0 * h + 3.0 / n_count as f64 + h;
    assert!(d <= bound, "defect {d} > bound {bound}");
    assert!(d > 0.0, "shrinking segments should leave a small defect");
}

#[test]
fn too_few_members_is_an_error() {
    let target = SampledSet::from_points(vec![pt(0.0)], 0.01);
    let seq = singleton_sets(|n| 1.0 / n as f64, 5);
    assert!(matches!(
        pk_liminf_defect(&target, &seq),
        Err(SetconvError::TooFewMembers)
    ));
}

// ---- epi limits ----

fn dyadic_indices(max_pow: u32) -> Vec<u32> {
    (0..=max_pow).map(|k| 1u32 << k).collect()
}

fn family(member: &str, limit: &str, max_pow: u32) -> FunctionSeq {
    let mt: NodeTemplate = serde_json::from_str(member).unwrap();
    let lt: NodeTemplate = serde_json::from_str(limit).unwrap();
    let limit = lt.resolve(None, 1).unwrap();
    FunctionSeq::from_generator(
        dyadic_indices(max_pow),
        |n| mt.resolve(Some(n as f64), 1),
        limit,
    )
    .unwrap()
}

fn abs_shift_family() -> FunctionSeq {
    family(
        r#"{"kind": "translate", "z": ["1/n"], "inner": {"kind": "scaled_norm", "alpha": 1}}"#,
        r#"{"kind": "scaled_norm", "alpha": 1}"#,
        11,
    )
}

#[test]
fn epi_limits_of_shifted_abs() {
    let seq = abs_shift_family();
    let view = SeqView::new(&seq, SeqKind::Value).unwrap();
    let cfg = EpiConfig::default();
    let l = epi_limit(&view, &pt(0.0), EpiSide::Lower, &cfg, 0.02).unwrap();
    let u = epi_limit(&view, &pt(0.0), EpiSide::Upper, &cfg, 0.02).unwrap();
    // exact oracle: inf over the ball is max(0, 1/n - eps) -> 0
    assert!(l.value.approx_eq(ExtReal::finite(0.0), 1e-9));
    assert!(u.value.approx_eq(ExtReal::finite(0.0), 1e-9));
    assert!(l.stable && u.stable);
    // order f_l <= f_u at a generic point
    let l5 = epi_limit(&view, &pt(0.5), EpiSide::Lower, &cfg, 0.02).unwrap();
    let u5 = epi_limit(&view, &pt(0.5), EpiSide::Upper, &cfg, 0.02).unwrap();
    assert!(l5.value <= u5.value.checked_add(ExtReal::finite(1e-9)).unwrap());
}

#[test]
fn epi_limit_of_diverging_constants() {
    let seq = family(
        r#"{"kind": "constant", "value": "n"}"#,
        r#"{"kind": "constant", "value": 0}"#,
        11,
    );
    let view = SeqView::new(&seq, SeqKind::Value).unwrap();
    let cfg = EpiConfig::default();
    let l = epi_limit(&view, &pt(0.3), EpiSide::Lower, &cfg, 0.02).unwrap();
    // the tail-liminf sits at the first tail index: far from the claimed 0
    match l.value {
        ExtReal::Finite(v) => assert!(v >= 200.0, "estimate {v}"),
        ExtReal::PosInf => {}
    }
    // with a deeper ladder the blow-up rule fires
    let deep = family(
        r#"{"kind": "constant", "value": "n"}"#,
        r#"{"kind": "constant", "value": 0}"#,
        24,
    );
    let view = SeqView::new(&deep, SeqKind::Value).unwrap();
    let l = epi_limit(&view, &pt(0.3), EpiSide::Lower, &cfg, 0.02).unwrap();
    assert_eq!(l.value, ExtReal::PosInf);
}

#[test]
fn epi_limit_of_steepening_parabola() {
    // f_n = n y², candidate limit: indicator of {0}
    let seq = family(
        r#"{"kind": "quadratic", "q": [["2*n"]]}"#,
        r#"{"kind": "indicator_box", "lo": [0], "hi": [0]}"#,
        24,
    );
    let view = SeqView::new(&seq, SeqKind::Value).unwrap();
    let cfg = EpiConfig::default();
    let l0 = epi_limit(&view, &pt(0.0), EpiSide::Lower, &cfg, 0.02).unwrap();
    let u0 = epi_limit(&view, &pt(0.0), EpiSide::Upper, &cfg, 0.02).unwrap();
    assert!(l0.value.approx_eq(ExtReal::finite(0.0), 1e-12));
    assert!(u0.value.approx_eq(ExtReal::finite(0.0), 1e-12));
    // off the support the estimates blow up: closed form n (0.3 - eps)²
    let l3 = epi_limit(&view, &pt(0.3), EpiSide::Lower, &cfg, 0.02).unwrap();
    assert_eq!(l3.value, ExtReal::PosInf);
}

#[test]
fn epi_converges_examples() {
    let grid: Vec<Point> = (0..21).map(|k| pt(-1.0 + 0.1 * k as f64)).collect();
    let cfg = EpiConfig::default();

    let (v, diags) =
        epi_converges(&abs_shift_family(), SeqKind::Value, &grid, 0.02, &cfg).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
    assert!(diags.iter().all(|d| d.status == VerdictStatus::Holds));

    let blowup = family(
        r#"{"kind": "constant", "value": "n"}"#,
        r#"{"kind": "constant", "value": 0}"#,
        11,
    );
    let (v, _) = epi_converges(&blowup, SeqKind::Value, &grid, 0.02, &cfg).unwrap();
    assert_eq!(v.status, VerdictStatus::Fails);

    let steep = family(
        r#"{"kind": "quadratic", "q": [["2*n"]]}"#,
        r#"{"kind": "indicator_box", "lo": [0], "hi": [0]}"#,
        24,
    );
    let pts = [pt(-0.5), pt(0.0), pt(0.5)];
    let (v, _) = epi_converges(&steep, SeqKind::Value, &pts, 0.02, &cfg).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
}

#[test]
fn constant_sequence_identity() {
    let seq = family(
        r#"{"kind": "scaled_norm", "alpha": 1}"#,
        r#"{"kind": "scaled_norm", "alpha": 1}"#,
        11,
    );
    let grid: Vec<Point> = (0..21).map(|k| pt(-1.0 + 0.1 * k as f64)).collect();
    let (v, diags) =
        epi_converges(&seq, SeqKind::Value, &grid, 0.02, &EpiConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
    for d in &diags {
        // constant sequences: estimates equal the function value up to ε bias
        assert!(d.lower.approx_eq(d.limit_value, 0.02));
        assert!(d.upper.approx_eq(d.limit_value, 0.02));
    }
}

#[test]
fn alternating_constants_split_epi_limits() {
    // consecutive indices: alternation degenerates on dyadic ladders
    let mt: NodeTemplate =
        serde_json::from_str(r#"{"kind": "constant", "value": "(0.5)*(1+(-1)^n)"}"#).unwrap();
    let lt: NodeTemplate = serde_json::from_str(r#"{"kind": "constant", "value": 0}"#).unwrap();
    let seq = FunctionSeq::from_generator(
        (1..=12).collect(),
        |n| mt.resolve(Some(n as f64), 1),
        lt.resolve(None, 1).unwrap(),
    )
    .unwrap();
    let view = SeqView::new(&seq, SeqKind::Value).unwrap();
    let cfg = EpiConfig::default();
    let l = epi_limit(&view, &pt(0.2), EpiSide::Lower, &cfg, 0.02).unwrap();
    let u = epi_limit(&view, &pt(0.2), EpiSide::Upper, &cfg, 0.02).unwrap();
    assert!(l.value.approx_eq(ExtReal::finite(0.0), 1e-12));
    assert!(u.value.approx_eq(ExtReal::finite(1.0), 1e-12));
}

#[test]
fn slope_family_dips_are_seen_exactly() {
    // slope of |y - 1/n| is 1 except exactly at the kink; pointwise grids
    // cannot see the dip, the exact window minima can
    let seq = abs_shift_family();
    let view = SeqView::new(&seq, SeqKind::Slope).unwrap();
    let cfg = EpiConfig::default();
    let l = epi_limit(&view, &pt(0.0), EpiSide::Lower, &cfg, 0.02).unwrap();
    let u = epi_limit(&view, &pt(0.0), EpiSide::Upper, &cfg, 0.02).unwrap();
    assert!(l.value.approx_eq(ExtReal::finite(0.0), 1e-12));
    assert!(u.value.approx_eq(ExtReal::finite(0.0), 1e-12));
    // away from the kink the slopes are identically 1
    let l1 = epi_limit(&view, &pt(0.7), EpiSide::Lower, &cfg, 0.02).unwrap();
    assert!(l1.value.approx_eq(ExtReal::finite(1.0), 1e-12));
}

#[test]
fn slope_family_of_2d_quadratics() {
    let mt: NodeTemplate = serde_json::from_str(
        r#"{"kind": "quadratic", "q": [["1+1/n", 0], [0, "1+1/n"]], "b": ["1/n", 0]}"#,
    )
    .unwrap();
    let lt: NodeTemplate =
        serde_json::from_str(r#"{"kind": "quadratic", "q": [[1, 0], [0, 1]]}"#).unwrap();
    let seq = FunctionSeq::from_generator(
        dyadic_indices(11),
        |n| mt.resolve(Some(n as f64), 2),
        lt.resolve(None, 2).unwrap(),
    )
    .unwrap();
    let grid: Vec<Point> = crate::geom::grid_on_box(
        &crate::geom::BoxRegion::new(vec![-1.0, -1.0], vec![1.0, 1.0]),
        5,
    );
    let (v, _) = epi_converges(&seq, SeqKind::Slope, &grid, 0.05, &EpiConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
}

#[test]
fn tightness_examples() {
    // f_n = y²/2 with x_n = 1/n
    let seq = family(
        r#"{"kind": "quadratic", "q": [[1]]}"#,
        r#"{"kind": "quadratic", "q": [[1]]}"#,
        11,
    );
    let witness: Vec<(u32, Point)> = seq
        .indices()
        .iter()
        .map(|n| (*n, pt(1.0 / *n as f64)))
        .collect();
    let v = tightness_check(&seq, &witness, 1e-3, &WitnessConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // f_n = |y - 1/n| with x_n = 1/n: both sides 0
    let seq = abs_shift_family();
    let witness: Vec<(u32, Point)> = seq
        .indices()
        .iter()
        .map(|n| (*n, pt(1.0 / *n as f64)))
        .collect();
    let v = tightness_check(&seq, &witness, 1e-3, &WitnessConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // f_n = n y² with x_n = 1/n: slopes 2, values 1/n -> 0 = f_l(0);
    // the finite tail max is 1/256, hence the looser tolerance
    let seq = family(
        r#"{"kind": "quadratic", "q": [["2*n"]]}"#,
        r#"{"kind": "indicator_box", "lo": [0], "hi": [0]}"#,
        11,
    );
    let witness: Vec<(u32, Point)> = seq
        .indices()
        .iter()
        .map(|n| (*n, pt(1.0 / *n as f64)))
        .collect();
    let v = tightness_check(&seq, &witness, 0.02, &WitnessConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
}

#[test]
fn tightness_rejects_unbounded_slope_witness() {
    let seq = family(
        r#"{"kind": "quadratic", "q": [["2*n"]]}"#,
        r#"{"kind": "indicator_box", "lo": [0], "hi": [0]}"#,
        11,
    );
    // x_n = 1 has slope 2n: unbounded
    let witness: Vec<(u32, Point)> = seq.indices().iter().map(|n| (*n, pt(1.0))).collect();
    let v = tightness_check(&seq, &witness, 1e-3, &WitnessConfig::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::PreconditionFailed);
}

#[test]
fn domain_sandwich_on_families() {
    let grid: Vec<Point> = (0..21).map(|k| pt(-1.0 + 0.1 * k as f64)).collect();
    let cfg = EpiConfig::default();
    let v = domain_sandwich_check(&abs_shift_family(), &grid, 0.02, &cfg).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);

    // shifted boxes: dom f = [0, 1]
    let seq = family(
        r#"{"kind": "indicator_box", "lo": ["1/n"], "hi": ["1+1/n"]}"#,
        r#"{"kind": "indicator_box", "lo": [0], "hi": [1]}"#,
        11,
    );
    let v = domain_sandwich_check(&seq, &grid, 0.02, &cfg).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds);
}

#[test]
fn monotone_stability_under_ladder_extension() {
    // enlarging the index ladder never flips holds to fails
    let grid: Vec<Point> = (0..11).map(|k| pt(-1.0 + 0.2 * k as f64)).collect();
    let cfg = EpiConfig::default();
    for max_pow in [11, 14] {
        let seq = family(
            r#"{"kind": "translate", "z": ["1/n"], "inner": {"kind": "scaled_norm", "alpha": 1}}"#,
            r#"{"kind": "scaled_norm", "alpha": 1}"#,
            max_pow,
        );
        let (v, _) = epi_converges(&seq, SeqKind::Value, &grid, 0.02, &cfg).unwrap();
        assert_eq!(v.status, VerdictStatus::Holds, "ladder 2^{max_pow}");
    }
}
