use epilab_core::funclib::{FunctionSeq, NodeTemplate};
use epilab_core::geom::Point;
use epilab_core::setconv::*;
use epilab_core::theorems::*;

fn pt(x: f64) -> Point { Point::scalar(x) }
fn dyadic(max_pow: u32) -> Vec<u32> { (0..=max_pow).map(|k| 1u32 << k).collect() }

fn main() {
    // tightness debug
    let mt: NodeTemplate = serde_json::from_str(r#"{"kind": "quadratic", "q": [[1]]}"#).unwrap();
    let seq = FunctionSeq::from_generator(dyadic(11), |n| mt.resolve(Some(n as f64), 1), mt.resolve(None, 1).unwrap()).unwrap();
    let witness: Vec<(u32, Point)> = seq.indices().iter().map(|n| (*n, pt(1.0 / *n as f64))).collect();
    let v = tightness_check(&seq, &witness, 1e-3, &WitnessConfig::default()).unwrap();
    println!("tightness: {:?} :: {}", v.status, v.summary());

    // attouch debug
    let mt: NodeTemplate = serde_json::from_str(r#"{"kind": "translate", "z": ["1/n"], "inner": {"kind": "scaled_norm", "alpha": 1}}"#).unwrap();
    let lt: NodeTemplate = serde_json::from_str(r#"{"kind": "scaled_norm", "alpha": 1}"#).unwrap();
    let seq = FunctionSeq::from_generator(dyadic(11), |n| mt.resolve(Some(n as f64), 1), lt.resolve(None, 1).unwrap()).unwrap();
    let w = NcWitness {
        triples: seq.indices().iter().map(|n| (*n, pt(1.0 / *n as f64), pt(0.0))).collect(),
        limit_x: pt(0.0), limit_xstar: pt(0.0),
    };
    let grid: Vec<Point> = (0..21).map(|k| pt(-1.0 + 0.1 * k as f64)).collect();
    let cfg = AttouchConfig::default_for_dim(1);
    let r = attouch_check(&seq, &w, &grid, &cfg).unwrap();
    println!("attouch epi: {:?} :: {}", r.epi.status, r.epi.summary());
    println!("attouch graphs_nc: {:?} :: {}", r.graphs_nc.status, r.graphs_nc.summary());
    for w in &r.graphs_nc.witnesses { println!("   gnc witness: {} @ {} :: {}", w.label, w.location, w.detail); }
    println!("attouch triples: {:?} :: {}", r.triples.status, r.triples.summary());
}
