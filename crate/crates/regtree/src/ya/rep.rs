use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::model::Ranked;

use super::presentation::Presentation;

/// A rank-`n` element given as a meet of deterministic tuples, optionally met with a
/// closed `Y0` value. No tuples and no `Y0` part is the top element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RankedElementRep {
    pub rank: usize,
    pub decomps: BTreeSet<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<usize>,
}

impl Ranked for RankedElementRep {
    fn rank(&self) -> usize {
        self.rank
    }
}

impl std::fmt::Display for RankedElementRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self.decomps.iter().map(|t| format!("{t:?}")).collect();
        if let Some(c) = self.zero {
            parts.push(format!("#{c}"));
        }
        write!(f, "{}/{}", parts.join("⊓"), self.rank)
    }
}

impl RankedElementRep {
    pub fn tuple(t: Vec<usize>) -> Self {
        RankedElementRep { rank: t.len(), decomps: [t].into(), zero: None }
    }

    pub fn unary(y: usize) -> Self {
        Self::tuple(vec![y])
    }

    pub fn leaf(t: usize) -> Self {
        RankedElementRep { rank: 0, decomps: BTreeSet::new(), zero: Some(t) }
    }

    pub fn meet(rank: usize, tuples: impl IntoIterator<Item = Vec<usize>>) -> Self {
        RankedElementRep { rank, decomps: tuples.into_iter().collect(), zero: None }
    }

    pub fn with_zero(mut self, t: Option<usize>) -> Self {
        self.zero = t;
        self
    }

    /// A single tuple, possibly with a closed part.
    pub fn is_deterministic(&self) -> bool {
        self.decomps.len() == 1 || (self.rank == 0 && self.decomps.is_empty())
    }

    pub fn check(&self, p: &Presentation) -> Result<()> {
        if self.rank == 0 && !self.decomps.is_empty() {
            return input("a rank-0 element has no tuples");
        }
        for t in &self.decomps {
            if t.len() != self.rank {
                return Err(Error::Rank { expected: self.rank, found: t.len() });
            }
            if let Some(&y) = t.iter().find(|&&y| y >= p.y1.len()) {
                return input(format!("tuple component {y} outside Y1"));
            }
        }
        if let Some(c) = self.zero {
            if c >= p.y0.len() {
                return input(format!("closed part {c} outside Y0"));
            }
        }
        Ok(())
    }
}

fn dominated(p: &Presentation, lo: &[usize], hi: &[usize]) -> bool {
    lo.iter().zip(hi).all(|(&a, &b)| p.leq1(a, b))
}

/// `x ⊑ y` by the downward-closure rule: every tuple of `y` dominates some tuple of
/// `x`, and a closed part of `y` is matched by a smaller closed part of `x`.
pub fn rep_leq(p: &Presentation, x: &RankedElementRep, y: &RankedElementRep) -> Result<bool> {
    if x.rank != y.rank {
        return Err(Error::Rank { expected: x.rank, found: y.rank });
    }
    let tuples = y.decomps.iter().all(|ty| x.decomps.iter().any(|tx| dominated(p, tx, ty)));
    let closed = match (x.zero, y.zero) {
        (_, None) => true,
        (Some(cx), Some(cy)) => p.leq0(cx, cy),
        (None, Some(_)) => false,
    };
    Ok(tuples && closed)
}

/// All single-tuple elements of rank `n`, one per class of the representation order.
pub fn det_elements(p: &Presentation, n: usize) -> Result<Vec<RankedElementRep>> {
    if n == 0 {
        return input("deterministic tuples start at rank 1");
    }
    let k = p.y1.len();
    let mut out: Vec<RankedElementRep> = Vec::new();
    let total = k.checked_pow(n as u32).ok_or_else(|| Error::Input("rank too large".into()))?;
    for code in 0..total {
        let mut t = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            t.push(c % k);
            c /= k;
        }
        t.reverse();
        let cand = RankedElementRep::tuple(t);
        let mut dup = false;
        for o in &out {
            if rep_leq(p, o, &cand)? && rep_leq(p, &cand, o)? {
                dup = true;
                break;
            }
        }
        if !dup {
            out.push(cand);
        }
    }
    Ok(out)
}
