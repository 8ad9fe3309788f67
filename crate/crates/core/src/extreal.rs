//! Extended real values in `R ∪ {+∞}`.
//!
//! All convex functions in this crate take values here. The type excludes
//! `-∞` and NaN entirely: any computation that would produce them is a hard
//! error, never a silent value.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtRealError {
    #[error("value {0} is not an extended real (NaN or -inf)")]
    NotExtendedReal(f64),
    #[error("indeterminate difference (+inf) - (+inf)")]
    IndeterminateDifference,
    #[error("operation produced -inf")]
    NegativeInfinity,
}

/// A finite real or `+∞`. Finite payloads are always finite `f64`s.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const POS_INF: ExtReal = ExtReal::PosInf;

    /// Wraps a value known to be finite. Panics on NaN/±inf; use
    /// [`ExtReal::from_f64`] for untrusted inputs.
    pub fn finite(v: f64) -> ExtReal {
        assert!(v.is_finite(), "ExtReal::finite called with {v}");
        ExtReal::Finite(v)
    }

    /// Classifies a raw float: finite values map to `Finite`, `+inf` to
    /// `PosInf`, anything else is rejected.
    pub fn from_f64(v: f64) -> Result<ExtReal, ExtRealError> {
        if v.is_finite() {
            Ok(ExtReal::Finite(v))
        } else if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else {
            Err(ExtRealError::NotExtendedReal(v))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Finite payload or panic; for values whose finiteness was established.
    pub fn unwrap_finite(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => panic!("expected finite extended real, got +inf"),
        }
    }

    /// As a plain float with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Total addition: `+∞` absorbs. Errors only if a finite sum underflows
    /// to `-inf`.
    pub fn checked_add(self, rhs: ExtReal) -> Result<ExtReal, ExtRealError> {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                let s = a + b;
                if s == f64::NEG_INFINITY {
                    Err(ExtRealError::NegativeInfinity)
                } else if s.is_nan() {
                    Err(ExtRealError::NotExtendedReal(s))
                } else {
                    ExtReal::from_f64(s)
                }
            }
            _ => Ok(ExtReal::PosInf),
        }
    }

    /// Subtraction; `(+∞) - (+∞)` and finite minus `+∞` are rejected.
    pub fn checked_sub(self, rhs: ExtReal) -> Result<ExtReal, ExtRealError> {
        match (self, rhs) {
            (_, ExtReal::PosInf) => Err(ExtRealError::IndeterminateDifference),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Ok(ExtReal::PosInf),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                let d = a - b;
                if d == f64::NEG_INFINITY {
                    Err(ExtRealError::NegativeInfinity)
                } else {
                    ExtReal::from_f64(d)
                }
            }
        }
    }

    pub fn min(self, rhs: ExtReal) -> ExtReal {
        if self <= rhs {
            self
        } else {
            rhs
        }
    }

    pub fn max(self, rhs: ExtReal) -> ExtReal {
        if self >= rhs {
            self
        } else {
            rhs
        }
    }

    /// `|a - b| <= tol` with `+∞` matching only `+∞`.
    pub fn approx_eq(self, rhs: ExtReal, tol: f64) -> bool {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            (ExtReal::PosInf, ExtReal::PosInf) => true,
            _ => false,
        }
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Ordering::Less,
            (ExtReal::PosInf, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::PosInf, ExtReal::PosInf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

impl From<f64> for ExtReal {
    /// Convenience for literals known finite; panics otherwise.
    fn from(v: f64) -> Self {
        ExtReal::finite(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinity_on_top() {
        let a = ExtReal::finite(3.0);
        let b = ExtReal::finite(-1.0);
        assert!(b < a);
        assert!(a < ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.max(a), ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.min(a), a);
    }

    #[test]
    fn addition_absorbs_infinity() {
        let a = ExtReal::finite(2.0);
        assert_eq!(a.checked_add(ExtReal::PosInf).unwrap(), ExtReal::PosInf);
        assert_eq!(
            a.checked_add(ExtReal::finite(0.5)).unwrap(),
            ExtReal::finite(2.5)
        );
    }

    #[test]
    fn indeterminate_difference_is_rejected() {
        let err = ExtReal::PosInf.checked_sub(ExtReal::PosInf).unwrap_err();
        assert_eq!(err, ExtRealError::IndeterminateDifference);
        let err = ExtReal::finite(0.0)
            .checked_sub(ExtReal::PosInf)
            .unwrap_err();
        assert_eq!(err, ExtRealError::IndeterminateDifference);
    }

    #[test]
    fn negative_infinity_never_constructs() {
        assert!(ExtReal::from_f64(f64::NEG_INFINITY).is_err());
        assert!(ExtReal::from_f64(f64::NAN).is_err());
        assert_eq!(
            ExtReal::from_f64(f64::INFINITY).unwrap(),
            ExtReal::PosInf
        );
    }
}
