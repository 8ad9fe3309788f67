//! Parameterized families `n ↦ f_n` with a candidate limit.

use super::{ConvexSpec, FunclibError};

/// A realized function family over a fixed increasing index ladder, plus
/// the candidate limit. All members share the ambient dimension.
#[derive(Clone, Debug)]
pub struct FunctionSeq {
    indices: Vec<u32>,
    members: Vec<ConvexSpec>,
    limit: ConvexSpec,
}

impl FunctionSeq {
    pub fn new(
        indices: Vec<u32>,
        members: Vec<ConvexSpec>,
        limit: ConvexSpec,
    ) -> Result<FunctionSeq, FunclibError> {
        if indices.is_empty() || indices.len() != members.len() {
            return Err(FunclibError::InvalidSpec(
                "family needs one member per index".into(),
            ));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FunclibError::InvalidSpec(
                "index ladder must be strictly increasing".into(),
            ));
        }
        let dim = limit.dim();
        if members.iter().any(|m| m.dim() != dim) {
            return Err(FunclibError::InvalidSpec(
                "family members must share the limit's dimension".into(),
            ));
        }
        Ok(FunctionSeq {
            indices,
            members,
            limit,
        })
    }

    pub fn from_generator(
        indices: Vec<u32>,
        gen: impl Fn(u32) -> Result<ConvexSpec, FunclibError>,
        limit: ConvexSpec,
    ) -> Result<FunctionSeq, FunclibError> {
        let members = indices
            .iter()
            .map(|n| gen(*n))
            .collect::<Result<Vec<_>, _>>()?;
        FunctionSeq::new(indices, members, limit)
    }

    pub fn dim(&self) -> usize {
        self.limit.dim()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn members(&self) -> &[ConvexSpec] {
        &self.members
    }

    pub fn member(&self, pos: usize) -> &ConvexSpec {
        &self.members[pos]
    }

    pub fn limit(&self) -> &ConvexSpec {
        &self.limit
    }

    /// Positions forming the tail (last third, at least one).
    pub fn tail_range(&self) -> std::ops::Range<usize> {
        let n = self.len();
        let tail = n.div_ceil(3).max(1);
        (n - tail)..n
    }
}
