//! Finite distributions on `ℤ^d` with exact rational masses.

use std::collections::{BTreeMap, HashMap};

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dist::IntDist;
use crate::error::{Error, Result};
use crate::rational::{common_denominator, fmt_rational, parse_rational, scaled_numer, Rational};

pub type Point = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeDist {
    dim: usize,
    atoms: BTreeMap<Point, Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    dim: usize,
    atoms: Vec<(Point, String)>,
}

impl LatticeDist {
    pub fn new(dim: usize, atoms: Vec<(Point, Rational)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDistribution("dimension must be positive".into()));
        }
        let mut map = BTreeMap::new();
        let mut total = Rational::zero();
        for (x, m) in atoms {
            if x.len() != dim {
                return Err(Error::DimensionMismatch(dim, x.len()));
            }
            if !m.is_positive() {
                return Err(Error::InvalidDistribution(format!("non-positive mass at {x:?}")));
            }
            total += &m;
            if map.insert(x.clone(), m).is_some() {
                return Err(Error::InvalidDistribution(format!("duplicate site {x:?}")));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {}, not 1",
                fmt_rational(&total)
            )));
        }
        Ok(LatticeDist { dim, atoms: map })
    }

    /// Normalizes nonnegative integer weights; repeated sites merge.
    pub fn from_weights<W: Into<BigInt>>(dim: usize, weights: Vec<(Point, W)>) -> Result<Self> {
        let mut merged: BTreeMap<Point, BigInt> = BTreeMap::new();
        for (x, w) in weights {
            if x.len() != dim {
                return Err(Error::DimensionMismatch(dim, x.len()));
            }
            *merged.entry(x).or_insert_with(BigInt::zero) += w.into();
        }
        merged.retain(|_, w| !w.is_zero());
        let total: BigInt = merged.values().sum();
        if total.is_zero() || merged.values().any(|w| w.is_negative()) {
            return Err(Error::InvalidDistribution("weights must be nonnegative, not all zero".into()));
        }
        Ok(LatticeDist {
            dim,
            atoms: merged
                .into_iter()
                .map(|(x, w)| (x, Rational::new(w, total.clone())))
                .collect(),
        })
    }

    pub fn point(x: Point) -> Self {
        LatticeDist {
            dim: x.len(),
            atoms: BTreeMap::from([(x, Rational::one())]),
        }
    }

    pub fn uniform(points: &[Point]) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        let d = Self::from_weights(dim, points.iter().map(|p| (p.clone(), 1u32)).collect())?;
        if d.len() != points.len() {
            return Err(Error::InvalidDistribution("repeated site in uniform".into()));
        }
        Ok(d)
    }

    pub fn from_int_dist(d: &IntDist) -> Self {
        LatticeDist {
            dim: 1,
            atoms: d.atoms().iter().map(|(s, m)| (vec![*s], m.clone())).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn atoms(&self) -> &BTreeMap<Point, Rational> {
        &self.atoms
    }

    pub fn mass_at(&self, x: &[i64]) -> Rational {
        self.atoms.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    fn check_dim(&self, other: &LatticeDist) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    fn counts(&self) -> (BigInt, Vec<(&Point, BigInt)>) {
        let den = common_denominator(self.atoms.values());
        let c = self
            .atoms
            .iter()
            .map(|(x, m)| (x, scaled_numer(m, &den)))
            .collect();
        (den, c)
    }

    pub fn lconv(&self, other: &LatticeDist) -> Result<LatticeDist> {
        self.check_dim(other)?;
        let (da, ca) = self.counts();
        let (db, cb) = other.counts();
        let mut acc: HashMap<Point, BigInt> = HashMap::with_capacity(ca.len() * cb.len() / 2 + 1);
        for (xa, wa) in &ca {
            for (xb, wb) in &cb {
                let s: Point = xa.iter().zip(xb.iter()).map(|(a, b)| a + b).collect();
                *acc.entry(s).or_insert_with(BigInt::zero) += wa * wb;
            }
        }
        let den = da * db;
        Ok(LatticeDist {
            dim: self.dim,
            atoms: acc
                .into_iter()
                .map(|(x, w)| (x, Rational::new(w, den.clone())))
                .collect(),
        })
    }

    /// `m`-fold convolution by repeated squaring.
    pub fn pow_conv(&self, m: u32) -> Result<LatticeDist> {
        if m == 0 {
            return Err(Error::OutOfRange("power must be positive".into()));
        }
        let mut result: Option<LatticeDist> = None;
        let mut base = self.clone();
        let mut k = m;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.lconv(&base)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.lconv(&base)?;
        }
        Ok(result.expect("m >= 1"))
    }

    pub fn shift(&self, v: &[i64]) -> Result<LatticeDist> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.len()));
        }
        Ok(LatticeDist {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|(x, m)| (x.iter().zip(v).map(|(a, b)| a + b).collect(), m.clone()))
                .collect(),
        })
    }

    pub fn mean(&self) -> Vec<Rational> {
        (0..self.dim)
            .map(|i| {
                self.atoms
                    .iter()
                    .map(|(x, m)| m * Rational::from_integer(BigInt::from(x[i])))
                    .sum()
            })
            .collect()
    }

    pub fn covariance(&self) -> Vec<Vec<Rational>> {
        let mu = self.mean();
        let mut cov = vec![vec![Rational::zero(); self.dim]; self.dim];
        for (x, m) in &self.atoms {
            let dx: Vec<Rational> = x
                .iter()
                .zip(&mu)
                .map(|(a, b)| Rational::from_integer(BigInt::from(*a)) - b)
                .collect();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    cov[i][j] += m * &dx[i] * &dx[j];
                }
            }
        }
        cov
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Wire {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|(x, m)| (x.clone(), fmt_rational(m)))
                .collect(),
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: Wire = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        let atoms = w
            .atoms
            .into_iter()
            .map(|(x, m)| Ok((x, parse_rational(&m)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(w.dim, atoms)
    }
}

impl Serialize for LatticeDist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|(x, m)| (x.clone(), fmt_rational(m)))
                .collect(),
        }
        .serialize(s)
    }
}

/// Half the L1 distance over the union of supports.
pub fn tv_exact(a: &LatticeDist, b: &LatticeDist) -> Result<Rational> {
    a.check_dim(b)?;
    let mut sum = Rational::zero();
    for (x, m) in &a.atoms {
        sum += (m - b.mass_at(x)).abs();
    }
    for (x, m) in &b.atoms {
        if !a.atoms.contains_key(x) {
            sum += m;
        }
    }
    Ok(sum / Rational::from_integer(BigInt::from(2)))
}
