//! The ε-domination order on concentration profiles and exact checkers for the
//! rearrangement inequalities built on it.

use num::traits::{One, Zero};
use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::dist::IntDist;
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, Rational};
use crate::rearrange::{minus_rearrange, plus_rearrange, sym_rearrange};

/// `q_j = Q_j(μ)` for `j = 1..=J`, `J` the atom count; `q_J = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QProfile {
    pub values: Vec<Rational>,
}

impl QProfile {
    /// `Q_j`, constant 1 past the support size.
    pub fn get(&self, j: usize) -> Rational {
        assert!(j >= 1);
        self.values.get(j - 1).cloned().unwrap_or_else(Rational::one)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Serialize for QProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.values.iter().map(fmt_rational))
    }
}

pub fn q_profile(mu: &IntDist) -> QProfile {
    let mut acc = Rational::zero();
    QProfile {
        values: mu
            .sorted_masses_desc()
            .into_iter()
            .map(|m| {
                acc += m;
                acc.clone()
            })
            .collect(),
    }
}

/// The smallest index where `Q_j(μ1) > (1+ε) Q_j(μ2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub j: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl Serialize for Violation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(3)?;
        t.serialize_element(&self.j)?;
        t.serialize_element(&fmt_rational(&self.lhs))?;
        t.serialize_element(&fmt_rational(&self.rhs))?;
        t.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationReport {
    pub holds: bool,
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon: Rational,
    pub violation: Option<Violation>,
}

/// `μ1 ≼_ε μ2`: `Q_j(μ1) ≤ (1+ε) Q_j(μ2)` for every `j ≥ 1`.
///
/// Past the larger support size both profiles equal 1, so the left side is 1
/// and the right side is `1+ε`; checking `j ≤ max(|supp μ1|, |supp μ2|)`
/// therefore decides the whole quantifier.
pub fn dominates(mu1: &IntDist, mu2: &IntDist, eps: &Rational) -> DominationReport {
    let p1 = q_profile(mu1);
    let p2 = q_profile(mu2);
    let factor = Rational::one() + eps;
    let violation = (1..=p1.len().max(p2.len())).find_map(|j| {
        let lhs = p1.get(j);
        let rhs = &factor * p2.get(j);
        (lhs > rhs).then_some(Violation { j, lhs, rhs })
    });
    DominationReport {
        holds: violation.is_none(),
        epsilon: eps.clone(),
        violation,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HlpReport {
    #[serde(with = "crate::rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub rhs: Rational,
    pub holds: bool,
}

/// `Q(X + Y + ΣZ_i) ≤ P(X⁺ + ⁺Y + ΣZ_i* = 0)`.
pub fn hlp_check(x: &IntDist, y: &IntDist, zs: &[IntDist]) -> Result<HlpReport> {
    let stars = zs
        .iter()
        .enumerate()
        .map(|(i, z)| {
            sym_rearrange(z).ok_or_else(|| {
                Error::Precondition(format!("Z[{i}] has no symmetric decreasing rearrangement"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut left = x.convolve(y);
    let mut right = plus_rearrange(x).convolve(&minus_rearrange(y));
    for (z, zs) in zs.iter().zip(&stars) {
        left = left.convolve(z);
        right = right.convolve(zs);
    }
    let lhs = left.q_max();
    let rhs = right.mass_at(0);
    Ok(HlpReport {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

/// `ΣX_i ≼ ΣX_i^#` for `#`-log-concave summands.
pub fn mww_check(xs: &[IntDist]) -> Result<DominationReport> {
    if xs.is_empty() {
        return Err(Error::Precondition("no summands".into()));
    }
    if let Some(i) = xs.iter().position(|x| !x.is_sharp_log_concave()) {
        return Err(Error::Precondition(format!("X[{i}] is not #-log-concave")));
    }
    let sum = IntDist::convolve_all(xs);
    let squeezed: Vec<IntDist> = xs.iter().map(IntDist::squeeze).collect();
    Ok(dominates(&sum, &IntDist::convolve_all(&squeezed), &Rational::zero()))
}

/// For symmetric unimodal pairs with `μ_i′ ≼ μ_i`, checks `∗μ_i′ ≼ ∗μ_i`.
pub fn cor3_check(pairs: &[(IntDist, IntDist)]) -> Result<DominationReport> {
    if pairs.is_empty() {
        return Err(Error::Precondition("no pairs".into()));
    }
    for (i, (lo, hi)) in pairs.iter().enumerate() {
        for (name, d) in [("first", lo), ("second", hi)] {
            if !(d.is_symmetric() && d.is_unimodal()) {
                return Err(Error::Precondition(format!(
                    "pair {i}: {name} measure is not symmetric unimodal"
                )));
            }
        }
        if !dominates(lo, hi, &Rational::zero()).holds {
            return Err(Error::Precondition(format!("pair {i} is not dominated")));
        }
    }
    let left = IntDist::convolve_all(pairs.iter().map(|p| &p.0));
    let right = IntDist::convolve_all(pairs.iter().map(|p| &p.1));
    Ok(dominates(&left, &right, &Rational::zero()))
}
