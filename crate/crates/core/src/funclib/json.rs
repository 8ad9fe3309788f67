//! The JSON dialect for builder trees.
//!
//! A spec document is `{"dim": d, "node": {...}}` where each node is a
//! tagged object `{"kind": "...", ...}`. Scalar fields accept either plain
//! numbers or strings with expressions in the family index `n` (`"1/n"`,
//! `"2*n"`, ...), which is how scenario files describe parameterized
//! families. `resolve` instantiates a template at a concrete index;
//! templates without `n` resolve with no index at all.

use super::{AffinePiece, ConvexSpec, FunclibError, Node};
use crate::expr::Expr;
use crate::pwq1d::{BoundPolicy, Piece, PwQuad};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A number or an expression in `n`.
#[derive(Clone, Debug)]
pub struct Scalar {
    source: ScalarSource,
    expr: Expr,
}

#[derive(Clone, Debug)]
enum ScalarSource {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn constant(v: f64) -> Scalar {
        Scalar {
            source: ScalarSource::Number(v),
            expr: Expr::Num(v),
        }
    }

    pub fn uses_index(&self) -> bool {
        self.expr.uses_index()
    }

    pub fn eval(&self, n: Option<f64>) -> Result<f64, FunclibError> {
        self.expr
            .eval(n)
            .map_err(|e| FunclibError::InvalidSpec(format!("scalar `{}`: {e}", self.text())))
    }

    fn text(&self) -> String {
        match &self.source {
            ScalarSource::Number(v) => v.to_string(),
            ScalarSource::Text(s) => s.clone(),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => {
                if !v.is_finite() {
                    return Err(D::Error::custom("non-finite scalar"));
                }
                Ok(Scalar::constant(v))
            }
            Raw::Text(s) => {
                let expr = Expr::parse(&s).map_err(D::Error::custom)?;
                Ok(Scalar {
                    source: ScalarSource::Text(s),
                    expr,
                })
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.source {
            ScalarSource::Number(v) => s.serialize_f64(*v),
            ScalarSource::Text(t) => s.serialize_str(t),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AffineTemplate {
    pub g: Vec<Scalar>,
    #[serde(default)]
    pub beta: Option<Scalar>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PieceTemplate {
    #[serde(default)]
    pub a: Option<Scalar>,
    #[serde(default)]
    pub b: Option<Scalar>,
    #[serde(default)]
    pub c: Option<Scalar>,
}

/// Builder-tree template, one JSON object per node.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeTemplate {
    Quadratic {
        q: Vec<Vec<Scalar>>,
        #[serde(default)]
        b: Option<Vec<Scalar>>,
        #[serde(default)]
        c: Option<Scalar>,
    },
    ScaledNorm {
        alpha: Scalar,
    },
    MaxAffine {
        pieces: Vec<AffineTemplate>,
    },
    IndicatorBox {
        lo: Vec<Scalar>,
        hi: Vec<Scalar>,
    },
    IndicatorBall {
        center: Vec<Scalar>,
        radius: Scalar,
    },
    Constant {
        value: Scalar,
    },
    Huber {
        delta: Scalar,
    },
    Pwq1d {
        #[serde(default)]
        dom_lo: Option<Scalar>,
        #[serde(default)]
        dom_hi: Option<Scalar>,
        #[serde(default)]
        cuts: Vec<Scalar>,
        pieces: Vec<PieceTemplate>,
    },
    Sum {
        terms: Vec<NodeTemplate>,
    },
    Scale {
        alpha: Scalar,
        inner: Box<NodeTemplate>,
    },
    Tilt {
        v: Vec<Scalar>,
        inner: Box<NodeTemplate>,
    },
    Translate {
        z: Vec<Scalar>,
        inner: Box<NodeTemplate>,
    },
    RestrictSegment {
        a: Vec<Scalar>,
        b: Vec<Scalar>,
        inner: Box<NodeTemplate>,
    },
}

impl NodeTemplate {
    pub fn uses_index(&self) -> bool {
        let vec_uses = |v: &[Scalar]| v.iter().any(Scalar::uses_index);
        match self {
            NodeTemplate::Quadratic { q, b, c } => {
                q.iter().any(|row| vec_uses(row))
                    || b.as_deref().is_some_and(vec_uses)
                    || c.as_ref().is_some_and(Scalar::uses_index)
            }
            NodeTemplate::ScaledNorm { alpha } => alpha.uses_index(),
            NodeTemplate::MaxAffine { pieces } => pieces.iter().any(|p| {
                vec_uses(&p.g) || p.beta.as_ref().is_some_and(Scalar::uses_index)
            }),
            NodeTemplate::IndicatorBox { lo, hi } => vec_uses(lo) || vec_uses(hi),
            NodeTemplate::IndicatorBall { center, radius } => {
                vec_uses(center) || radius.uses_index()
            }
            NodeTemplate::Constant { value } => value.uses_index(),
            NodeTemplate::Huber { delta } => delta.uses_index(),
            NodeTemplate::Pwq1d {
                dom_lo,
                dom_hi,
                cuts,
                pieces,
            } => {
                dom_lo.as_ref().is_some_and(Scalar::uses_index)
                    || dom_hi.as_ref().is_some_and(Scalar::uses_index)
                    || vec_uses(cuts)
                    || pieces.iter().any(|p| {
                        [&p.a, &p.b, &p.c]
                            .into_iter()
                            .flatten()
                            .any(Scalar::uses_index)
                    })
            }
            NodeTemplate::Sum { terms } => terms.iter().any(NodeTemplate::uses_index),
            NodeTemplate::Scale { alpha, inner } => alpha.uses_index() || inner.uses_index(),
            NodeTemplate::Tilt { v, inner } => vec_uses(v) || inner.uses_index(),
            NodeTemplate::Translate { z, inner } => vec_uses(z) || inner.uses_index(),
            NodeTemplate::RestrictSegment { a, b, inner } => {
                vec_uses(a) || vec_uses(b) || inner.uses_index()
            }
        }
    }

    /// Instantiates the template at index `n` and validates the result.
    pub fn resolve(&self, n: Option<f64>, dim: usize) -> Result<ConvexSpec, FunclibError> {
        let node = self.resolve_node(n)?;
        ConvexSpec::new(dim, node)
    }

    fn resolve_node(&self, n: Option<f64>) -> Result<Node, FunclibError> {
        let ev = |s: &Scalar| s.eval(n);
        let ev_vec = |v: &[Scalar]| v.iter().map(&ev).collect::<Result<Vec<f64>, _>>();
        Ok(match self {
            NodeTemplate::Quadratic { q, b, c } => {
                let qm = q
                    .iter()
                    .map(|row| ev_vec(row))
                    .collect::<Result<Vec<_>, _>>()?;
                let dim = qm.len();
                let bv = match b {
                    Some(b) => ev_vec(b)?,
                    None => vec![0.0; dim],
                };
                let cv = match c {
                    Some(c) => ev(c)?,
                    None => 0.0,
                };
                Node::Quadratic { q: qm, b: bv, c: cv }
            }
            NodeTemplate::ScaledNorm { alpha } => Node::ScaledNorm { alpha: ev(alpha)? },
            NodeTemplate::MaxAffine { pieces } => Node::MaxAffine {
                pieces: pieces
                    .iter()
                    .map(|p| {
                        Ok(AffinePiece {
                            gradient: ev_vec(&p.g)?,
                            offset: match &p.beta {
                                Some(b) => ev(b)?,
                                None => 0.0,
                            },
                        })
                    })
                    .collect::<Result<Vec<_>, FunclibError>>()?,
            },
            NodeTemplate::IndicatorBox { lo, hi } => Node::IndicatorBox {
                lo: ev_vec(lo)?,
                hi: ev_vec(hi)?,
            },
            NodeTemplate::IndicatorBall { center, radius } => Node::IndicatorBall {
                center: ev_vec(center)?,
                radius: ev(radius)?,
            },
            NodeTemplate::Constant { value } => Node::Constant { value: ev(value)? },
            NodeTemplate::Huber { delta } => {
                let d = ev(delta)?;
                if !(d > 0.0) {
                    return Err(FunclibError::InvalidSpec("huber needs delta > 0".into()));
                }
                Node::Pwq1d(PwQuad::huber(d)?)
            }
            NodeTemplate::Pwq1d {
                dom_lo,
                dom_hi,
                cuts,
                pieces,
            } => {
                let lo = match dom_lo {
                    Some(s) => ev(s)?,
                    None => f64::NEG_INFINITY,
                };
                let hi = match dom_hi {
                    Some(s) => ev(s)?,
                    None => f64::INFINITY,
                };
                let cuts = ev_vec(cuts)?;
                let pieces = pieces
                    .iter()
                    .map(|p| {
                        Ok(Piece {
                            a: p.a.as_ref().map(&ev).transpose()?.unwrap_or(0.0),
                            b: p.b.as_ref().map(&ev).transpose()?.unwrap_or(0.0),
                            c: p.c.as_ref().map(&ev).transpose()?.unwrap_or(0.0),
                        })
                    })
                    .collect::<Result<Vec<_>, FunclibError>>()?;
                Node::Pwq1d(PwQuad::new(lo, hi, cuts, pieces, BoundPolicy::RejectUnbounded)?)
            }
            NodeTemplate::Sum { terms } => Node::Sum(
                terms
                    .iter()
                    .map(|t| t.resolve_node(n))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            NodeTemplate::Scale { alpha, inner } => Node::Scale {
                alpha: ev(alpha)?,
                inner: Box::new(inner.resolve_node(n)?),
            },
            NodeTemplate::Tilt { v, inner } => Node::Tilt {
                v: ev_vec(v)?,
                inner: Box::new(inner.resolve_node(n)?),
            },
            NodeTemplate::Translate { z, inner } => Node::Translate {
                z: ev_vec(z)?,
                inner: Box::new(inner.resolve_node(n)?),
            },
            NodeTemplate::RestrictSegment { a, b, inner } => Node::RestrictSegment {
                a: ev_vec(a)?,
                b: ev_vec(b)?,
                inner: Box::new(inner.resolve_node(n)?),
            },
        })
    }
}

/// Parses a standalone spec document `{"dim": d, "node": {...}}` (no index
/// expressions allowed outside families).
pub fn spec_from_json(text: &str) -> Result<ConvexSpec, FunclibError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Doc {
        dim: usize,
        node: NodeTemplate,
    }
    let doc: Doc =
        serde_json::from_str(text).map_err(|e| FunclibError::InvalidSpec(e.to_string()))?;
    if doc.node.uses_index() {
        return Err(FunclibError::InvalidSpec(
            "standalone spec cannot reference the index n".into(),
        ));
    }
    doc.node.resolve(None, doc.dim)
}

/// Serializes a resolved spec back to the JSON dialect.
pub fn spec_to_json(spec: &ConvexSpec) -> serde_json::Value {
    serde_json::json!({
        "dim": spec.dim(),
        "node": node_to_json(spec.node()),
    })
}

fn node_to_json(node: &Node) -> serde_json::Value {
    use serde_json::json;
    match node {
        Node::Quadratic { q, b, c } => json!({"kind": "quadratic", "q": q, "b": b, "c": c}),
        Node::ScaledNorm { alpha } => json!({"kind": "scaled_norm", "alpha": alpha}),
        Node::MaxAffine { pieces } => json!({
            "kind": "max_affine",
            "pieces": pieces.iter().map(|p| json!({"g": p.gradient, "beta": p.offset})).collect::<Vec<_>>(),
        }),
        Node::IndicatorBox { lo, hi } => json!({"kind": "indicator_box", "lo": lo, "hi": hi}),
        Node::IndicatorBall { center, radius } => {
            json!({"kind": "indicator_ball", "center": center, "radius": radius})
        }
        Node::Constant { value } => json!({"kind": "constant", "value": value}),
        Node::Pwq1d(g) => {
            let (lo, hi) = g.dom();
            let mut obj = serde_json::Map::new();
            obj.insert("kind".into(), "pwq1d".into());
            if lo.is_finite() {
                obj.insert("dom_lo".into(), json!(lo));
            }
            if hi.is_finite() {
                obj.insert("dom_hi".into(), json!(hi));
            }
            obj.insert("cuts".into(), json!(g.cuts()));
            obj.insert(
                "pieces".into(),
                json!(g
                    .pieces()
                    .iter()
                    .map(|p| json!({"a": p.a, "b": p.b, "c": p.c}))
                    .collect::<Vec<_>>()),
            );
            serde_json::Value::Object(obj)
        }
        Node::Sum(parts) => json!({
            "kind": "sum",
            "terms": parts.iter().map(node_to_json).collect::<Vec<_>>(),
        }),
        Node::Scale { alpha, inner } => {
            json!({"kind": "scale", "alpha": alpha, "inner": node_to_json(inner)})
        }
        Node::Tilt { v, inner } => json!({"kind": "tilt", "v": v, "inner": node_to_json(inner)}),
        Node::Translate { z, inner } => {
            json!({"kind": "translate", "z": z, "inner": node_to_json(inner)})
        }
        Node::RestrictSegment { a, b, inner } => {
            json!({"kind": "restrict_segment", "a": a, "b": b, "inner": node_to_json(inner)})
        }
    }
}
