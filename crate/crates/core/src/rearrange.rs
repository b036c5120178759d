//! Rearrangements `μ⁺`, `⁺μ`, `μ*`, ball functions with their nested medians,
//! and the dominating coupling of a measure with a symmetric unimodal one.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::dist::{centered_interval, IntDist};
use crate::domination::dominates;
use crate::error::{Error, Result};
use crate::rational::{common_denominator, fmt_rational, scaled_numer, Rational};

/// A finite nonnegative measure on ℤ with positive atoms and arbitrary total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMeasure {
    atoms: Vec<(i64, Rational)>,
    total: Rational,
}

impl IntMeasure {
    pub fn new(mut atoms: Vec<(i64, Rational)>) -> Result<Self> {
        atoms.sort_by_key(|(s, _)| *s);
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("duplicate site".into()));
        }
        if atoms.iter().any(|(_, m)| !m.is_positive()) {
            return Err(Error::InvalidDistribution("non-positive mass".into()));
        }
        let total = atoms.iter().map(|a| &a.1).sum();
        Ok(IntMeasure { atoms, total })
    }

    /// Measure with integer masses.
    pub fn from_counts(counts: &[(i64, i64)]) -> Result<Self> {
        Self::new(
            counts
                .iter()
                .map(|&(s, c)| (s, Rational::from_integer(BigInt::from(c))))
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[(i64, Rational)] {
        &self.atoms
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }
}

impl From<&IntDist> for IntMeasure {
    fn from(d: &IntDist) -> Self {
        IntMeasure {
            atoms: d.atoms().to_vec(),
            total: Rational::one(),
        }
    }
}

/// Site of the `p`-th largest mass under `μ⁺`: 0, 1, −1, 2, −2, …
fn plus_site(p: usize) -> i64 {
    let p = p as i64;
    if p % 2 == 1 {
        (p + 1) / 2
    } else {
        -p / 2
    }
}

/// Masses sorted decreasingly, ties by ascending original site.
fn sorted_desc(atoms: &[(i64, Rational)]) -> Vec<Rational> {
    let mut v: Vec<(i64, &Rational)> = atoms.iter().map(|(s, m)| (*s, m)).collect();
    v.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(_, m)| m.clone()).collect()
}

fn plus_atoms(atoms: &[(i64, Rational)]) -> Vec<(i64, Rational)> {
    let mut out: Vec<(i64, Rational)> = sorted_desc(atoms)
        .into_iter()
        .enumerate()
        .map(|(p, m)| (plus_site(p), m))
        .collect();
    out.sort_by_key(|(s, _)| *s);
    out
}

/// `μ⁺`: masses in decreasing order on 0, 1, −1, 2, −2, …
pub fn plus_rearrange(mu: &IntDist) -> IntDist {
    IntDist::from_sorted_unchecked(plus_atoms(mu.atoms()))
}

/// `⁺μ(x) = μ⁺(−x)`: masses in decreasing order on 0, −1, 1, −2, 2, …
pub fn minus_rearrange(mu: &IntDist) -> IntDist {
    plus_rearrange(mu).negate()
}

/// `μ*`, present exactly when `μ⁺ = ⁺μ`.
pub fn sym_rearrange(mu: &IntDist) -> Option<IntDist> {
    let p = plus_rearrange(mu);
    (p == p.negate()).then_some(p)
}

pub fn plus_rearrange_measure(nu: &IntMeasure) -> IntMeasure {
    IntMeasure {
        atoms: plus_atoms(&nu.atoms),
        total: nu.total.clone(),
    }
}

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i128);

impl HalfInt {
    pub fn median(a: i128, b: i128) -> Self {
        HalfInt(a + b)
    }

    pub fn floor(self) -> i128 {
        self.0.div_euclid(2)
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(BigInt::from(self.0), BigInt::from(2))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// One level set of a ball function: `f(i) = value` for `lo <= i <= hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallGroup {
    pub value: i64,
    pub lo: i128,
    pub hi: i128,
}

/// Nondecreasing `f: I → ℤ` whose level-set sizes are the integer masses of a
/// rearranged measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallFunction {
    pub groups: Vec<BallGroup>,
    pub domain: (i128, i128),
}

impl BallFunction {
    /// Lays out `counts` (site, positive count), sorted by site, on
    /// consecutive indices starting at `start`.
    pub fn layout(counts: &[(i64, i128)], start: i128) -> Self {
        let mut groups = Vec::with_capacity(counts.len());
        let mut next = start;
        for &(value, c) in counts {
            debug_assert!(c > 0);
            groups.push(BallGroup {
                value,
                lo: next,
                hi: next + c - 1,
            });
            next += c;
        }
        BallFunction {
            groups,
            domain: (start, next - 1),
        }
    }

    pub fn size(&self) -> i128 {
        self.domain.1 - self.domain.0 + 1
    }

    pub fn eval(&self, i: i128) -> Option<i64> {
        let idx = self.groups.partition_point(|g| g.hi < i);
        self.groups
            .get(idx)
            .filter(|g| g.lo <= i)
            .map(|g| g.value)
    }

    /// Index interval `f⁻¹([a, b])`, if nonempty.
    pub fn preimage(&self, a: i64, b: i64) -> Option<(i128, i128)> {
        let inside: Vec<&BallGroup> = self
            .groups
            .iter()
            .filter(|g| a <= g.value && g.value <= b)
            .collect();
        Some((inside.first()?.lo, inside.last()?.hi))
    }

    /// Medians `m` of the domain and `m_j` of `f⁻¹(I_j)` for `j = 1..=J`,
    /// `J` the number of level sets.
    pub fn medians(&self) -> MedianChain {
        let m = HalfInt::median(self.domain.0, self.domain.1);
        let m_j = (1..=self.groups.len())
            .map(|j| {
                let (a, b) = centered_interval(j);
                let (lo, hi) = self.preimage(a, b).expect("I_j meets the support");
                HalfInt::median(lo, hi)
            })
            .collect();
        MedianChain { m, m_j }
    }
}

/// Integer masses of `ν⁺` scaled by the common denominator of `ν`.
fn scaled_plus_counts(nu: &IntMeasure) -> Result<Vec<(i64, i128)>> {
    if nu.is_zero() {
        return Err(Error::InvalidDistribution("zero measure".into()));
    }
    let plus = plus_rearrange_measure(nu);
    let den = common_denominator(plus.atoms.iter().map(|a| &a.1));
    plus.atoms
        .iter()
        .map(|(s, m)| {
            scaled_numer(m, &den)
                .to_i128()
                .map(|c| (*s, c))
                .ok_or_else(|| Error::OutOfRange("scaled mass exceeds i128".into()))
        })
        .collect()
}

/// Ball function of `ν⁺` on the canonical domain `{1, …, N}`.
pub fn ball_function(nu: &IntMeasure) -> Result<BallFunction> {
    Ok(BallFunction::layout(&scaled_plus_counts(nu)?, 1))
}

/// Medians `m` and `m_1, m_2, …` of a ball function. For `j` beyond the
/// number of level sets, `m_j = m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MedianChain {
    pub m: HalfInt,
    pub m_j: Vec<HalfInt>,
}

impl MedianChain {
    pub fn get(&self, j: usize) -> HalfInt {
        assert!(j >= 1);
        self.m_j.get(j - 1).copied().unwrap_or(self.m)
    }

    /// `m_1 ≤ m_3 ≤ … ≤ m ≤ … ≤ m_4 ≤ m_2`.
    pub fn is_nested(&self) -> bool {
        let odd: Vec<HalfInt> = self.m_j.iter().step_by(2).copied().collect();
        let even: Vec<HalfInt> = self.m_j.iter().skip(1).step_by(2).copied().collect();
        odd.windows(2).all(|w| w[0] <= w[1])
            && even.windows(2).all(|w| w[0] >= w[1])
            && odd.iter().all(|x| *x <= self.m)
            && even.iter().all(|x| *x >= self.m)
    }
}

pub fn nested_medians(nu: &IntMeasure) -> Result<MedianChain> {
    Ok(ball_function(nu)?.medians())
}

/// One cell of a coupling: `P(Z = z, X′ = x_prime, A = in_a) = mass`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingCell {
    pub z: i64,
    pub x_prime: i64,
    pub in_a: bool,
    pub mass: Rational,
}

/// Finite joint law of `(Z, X′, 1_A)` with the construction parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointCoupling {
    pub cells: Vec<CouplingCell>,
    pub n: BigInt,
    pub k: BigInt,
    /// `N` was doubled to make `K` even.
    pub doubled_for_even_k: bool,
}

struct CellRows<'a>(&'a [CouplingCell]);

impl Serialize for CellRows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for c in self.0 {
            seq.serialize_element(&(c.z, c.x_prime, c.in_a, fmt_rational(&c.mass)))?;
        }
        seq.end()
    }
}

impl Serialize for JointCoupling {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            n: String,
            k: String,
            doubled_for_even_k: bool,
            p_a: String,
            cells: CellRows<'a>,
        }
        Wire {
            n: self.n.to_string(),
            k: self.k.to_string(),
            doubled_for_even_k: self.doubled_for_even_k,
            p_a: fmt_rational(&self.p_a()),
            cells: CellRows(&self.cells),
        }
        .serialize(s)
    }
}

/// Which of the coupling's required properties hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CouplingAudit {
    pub total_is_one: bool,
    pub z_marginal: bool,
    pub x_marginal: bool,
    pub z_given_a: bool,
    pub z_given_not_a: bool,
    pub p_a_bound: bool,
    pub sandwich_on_a: bool,
    pub factorizes_off_a: bool,
}

impl CouplingAudit {
    pub fn all_ok(&self) -> bool {
        self.total_is_one
            && self.z_marginal
            && self.x_marginal
            && self.z_given_a
            && self.z_given_not_a
            && self.p_a_bound
            && self.sandwich_on_a
            && self.factorizes_off_a
    }
}

fn marginal<F: Fn(&CouplingCell) -> i64>(
    cells: &[&CouplingCell],
    key: F,
) -> BTreeMap<i64, Rational> {
    let mut out = BTreeMap::new();
    for c in cells {
        *out.entry(key(c)).or_insert_with(Rational::zero) += &c.mass;
    }
    out
}

fn as_map(d: &IntDist) -> BTreeMap<i64, Rational> {
    d.atoms().iter().cloned().collect()
}

fn normalized(m: BTreeMap<i64, Rational>) -> BTreeMap<i64, Rational> {
    let total: Rational = m.values().sum();
    m.into_iter().map(|(k, v)| (k, v / &total)).collect()
}

impl JointCoupling {
    pub fn p_a(&self) -> Rational {
        self.cells.iter().filter(|c| c.in_a).map(|c| &c.mass).sum()
    }

    /// Sandwich on a single cell: `0 ≤ x′ ≤ z` or `z − 1 ≤ x′ ≤ 0`.
    pub fn sandwich(z: i64, x_prime: i64) -> bool {
        (0 <= x_prime && x_prime <= z) || (z - 1 <= x_prime && x_prime <= 0)
    }

    pub fn audit(&self, mu: &IntDist, mu_prime: &IntDist, eps: &Rational) -> CouplingAudit {
        let plus = as_map(&plus_rearrange(mu));
        let all: Vec<&CouplingCell> = self.cells.iter().collect();
        let on_a: Vec<&CouplingCell> = self.cells.iter().filter(|c| c.in_a).collect();
        let off_a: Vec<&CouplingCell> = self.cells.iter().filter(|c| !c.in_a).collect();
        let total: Rational = all.iter().map(|c| &c.mass).sum();
        let p_a = self.p_a();

        let factorizes_off_a = off_a.is_empty() || {
            let p_off: Rational = off_a.iter().map(|c| &c.mass).sum();
            let mz = marginal(&off_a, |c| c.z);
            let mx = marginal(&off_a, |c| c.x_prime);
            let mut joint: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
            for c in &off_a {
                *joint.entry((c.z, c.x_prime)).or_insert_with(Rational::zero) += &c.mass;
            }
            mz.iter().all(|(z, pz)| {
                mx.iter().all(|(x, px)| {
                    let j = joint.get(&(*z, *x)).cloned().unwrap_or_else(Rational::zero);
                    j * &p_off == pz * px
                })
            })
        };

        CouplingAudit {
            total_is_one: total.is_one(),
            z_marginal: marginal(&all, |c| c.z) == plus,
            x_marginal: marginal(&all, |c| c.x_prime) == as_map(mu_prime),
            z_given_a: on_a.is_empty() || normalized(marginal(&on_a, |c| c.z)) == plus,
            z_given_not_a: off_a.is_empty() || normalized(marginal(&off_a, |c| c.z)) == plus,
            p_a_bound: p_a * (Rational::one() + eps) >= Rational::one(),
            sandwich_on_a: on_a.iter().all(|c| Self::sandwich(c.z, c.x_prime)),
            factorizes_off_a,
        }
    }
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::OutOfRange("coupling denominator exceeds i128".into()))
}

/// Overlap length of two closed index intervals.
fn overlap(a: (i128, i128), b: (i128, i128)) -> i128 {
    (a.1.min(b.1) - a.0.max(b.0) + 1).max(0)
}

/// Couples `Z ~ μ⁺` with `X′ ~ μ′` through a shared uniform index so that on
/// an event `A` of probability at least `1/(1+ε)` the sandwich holds, and off
/// `A` the two are independent.
pub fn dominating_coupling(
    mu: &IntDist,
    mu_prime: &IntDist,
    eps: &Rational,
) -> Result<JointCoupling> {
    if eps.is_negative() {
        return Err(Error::OutOfRange("epsilon must be nonnegative".into()));
    }
    if !(mu_prime.is_symmetric() && mu_prime.is_unimodal()) {
        return Err(Error::Precondition(
            "target measure must be symmetric and unimodal".into(),
        ));
    }
    let report = dominates(mu, mu_prime, eps);
    if !report.holds {
        return Err(Error::Precondition(format!(
            "domination fails at j = {}",
            report.violation.map(|v| v.j).unwrap_or(0)
        )));
    }

    let one_eps = Rational::one() + eps;
    let plus = plus_rearrange(mu);
    let scaled: Vec<Rational> = plus.masses().map(|m| m / &one_eps).collect();
    let mut n = common_denominator(
        plus.masses()
            .chain(scaled.iter())
            .chain(mu_prime.masses()),
    );
    if n.is_odd() {
        n *= 2;
    }
    let mut k = (Rational::from_integer(n.clone()) / &one_eps).to_integer();
    let doubled_for_even_k = k.is_odd();
    if doubled_for_even_k {
        n *= 2;
        k *= 2;
    }
    let n_i = to_i128(&n)?;
    let k_i = to_i128(&k)?;
    let n_r = Rational::from_integer(n.clone());

    let count = |m: &Rational| -> Result<i128> {
        let c = m * &n_r;
        debug_assert!(c.is_integer());
        to_i128(&c.to_integer())
    };
    let f_counts: Vec<(i64, i128)> = plus
        .atoms()
        .iter()
        .map(|(s, m)| Ok((*s, count(&(m / &one_eps))?)))
        .collect::<Result<_>>()?;
    let fp_counts: Vec<(i64, i128)> = mu_prime
        .atoms()
        .iter()
        .map(|(s, m)| Ok((*s, count(m)?)))
        .collect::<Result<_>>()?;
    let f = BallFunction::layout(&f_counts, -k_i / 2 + 1);
    let fp = BallFunction::layout(&fp_counts, -n_i / 2 + 1);
    debug_assert_eq!(f.domain, (-k_i / 2 + 1, k_i / 2));

    let unit = Rational::new(BigInt::one(), n.clone());
    let mut cells: BTreeMap<(bool, i64, i64), Rational> = BTreeMap::new();
    for g in &f.groups {
        for h in &fp.groups {
            let c = overlap((g.lo, g.hi), (h.lo, h.hi));
            if c > 0 {
                *cells.entry((true, g.value, h.value)).or_insert_with(Rational::zero) +=
                    &unit * Rational::from_integer(BigInt::from(c));
            }
        }
    }
    for h in &fp.groups {
        let off = (h.hi - h.lo + 1) - overlap((h.lo, h.hi), f.domain);
        if off == 0 {
            continue;
        }
        let weight = &unit * Rational::from_integer(BigInt::from(off));
        for (z, pz) in plus.atoms() {
            *cells.entry((false, *z, h.value)).or_insert_with(Rational::zero) += &weight * pz;
        }
    }

    let mut cells: Vec<CouplingCell> = cells
        .into_iter()
        .map(|((in_a, z, x_prime), mass)| CouplingCell {
            z,
            x_prime,
            in_a,
            mass,
        })
        .collect();
    cells.sort_by(|a, b| (b.in_a, a.z, a.x_prime).cmp(&(a.in_a, b.z, b.x_prime)));
    Ok(JointCoupling {
        cells,
        n,
        k,
        doubled_for_even_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::centered_interval;
    use crate::rational::{int, q};
    use proptest::prelude::*;

    fn d(atoms: &[(i64, i64, i64)]) -> IntDist {
        IntDist::new(atoms.iter().map(|&(s, n, m)| (s, q(n, m))).collect()).unwrap()
    }

    #[test]
    fn plus_and_minus_examples() {
        let mu = d(&[(5, 1, 2), (6, 3, 10), (7, 1, 5)]);
        assert_eq!(plus_rearrange(&mu), d(&[(0, 1, 2), (1, 3, 10), (-1, 1, 5)]));
        assert_eq!(minus_rearrange(&mu), d(&[(0, 1, 2), (-1, 3, 10), (1, 1, 5)]));
        assert_eq!(plus_rearrange(&IntDist::point(9)), IntDist::point(0));
        assert_eq!(minus_rearrange(&IntDist::point(9)), IntDist::point(0));
        assert_eq!(
            plus_rearrange(&IntDist::uniform(&[2, 4, 6]).unwrap()),
            IntDist::uniform_range(-1, 1)
        );
        let sym = d(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]);
        assert_eq!(minus_rearrange(&sym), sym);
    }

    #[test]
    fn sym_examples() {
        assert_eq!(
            sym_rearrange(&IntDist::uniform_range(3, 5)),
            Some(IntDist::uniform_range(-1, 1))
        );
        assert_eq!(sym_rearrange(&d(&[(0, 2, 5), (1, 2, 5), (2, 1, 5)])), None);
        assert_eq!(
            sym_rearrange(&d(&[(0, 1, 2), (1, 1, 4), (2, 1, 4)])),
            Some(d(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]))
        );
    }

    #[test]
    fn ball_function_examples() {
        let bf = ball_function(&IntMeasure::from_counts(&[(-1, 2), (0, 3), (1, 2)]).unwrap()).unwrap();
        assert_eq!(
            bf.groups,
            vec![
                BallGroup { value: -1, lo: 1, hi: 2 },
                BallGroup { value: 0, lo: 3, hi: 5 },
                BallGroup { value: 1, lo: 6, hi: 7 },
            ]
        );
        let single = ball_function(&IntMeasure::from_counts(&[(4, 5)]).unwrap()).unwrap();
        assert_eq!(single.groups, vec![BallGroup { value: 0, lo: 1, hi: 5 }]);
        let two = ball_function(&IntMeasure::from_counts(&[(0, 1), (1, 1)]).unwrap()).unwrap();
        assert_eq!(two.eval(1), Some(0));
        assert_eq!(two.eval(2), Some(1));
        assert!(ball_function(&IntMeasure::new(vec![]).unwrap()).is_err());
    }

    #[test]
    fn median_examples() {
        let mc = nested_medians(&IntMeasure::from_counts(&[(-1, 2), (0, 3), (1, 2)]).unwrap()).unwrap();
        assert_eq!((mc.get(1), mc.get(2), mc.get(3), mc.m), (HalfInt(8), HalfInt(10), HalfInt(8), HalfInt(8)));
        assert!(mc.is_nested());

        let mc = nested_medians(&IntMeasure::from_counts(&[(3, 6)]).unwrap()).unwrap();
        assert_eq!(mc.m, HalfInt(7));
        assert_eq!(mc.get(1), HalfInt(7));

        let mc = nested_medians(&IntMeasure::from_counts(&[(0, 1), (1, 1)]).unwrap()).unwrap();
        assert_eq!((mc.get(1), mc.get(2), mc.m), (HalfInt(2), HalfInt(3), HalfInt(3)));
        assert_eq!(mc.m.to_string(), "3/2");
    }

    #[test]
    fn rational_measure_is_scaled() {
        let nu = IntMeasure::new(vec![(0, q(1, 3)), (1, q(1, 6))]).unwrap();
        let bf = ball_function(&nu).unwrap();
        assert_eq!(bf.size(), 3);
    }

    #[test]
    fn coupling_uniform_three() {
        let u = IntDist::uniform_range(-1, 1);
        let c = dominating_coupling(&u, &u, &int(0)).unwrap();
        assert_eq!(c.p_a(), int(1));
        assert!(c.cells.iter().all(|cell| cell.in_a && cell.z == cell.x_prime));
        assert!(c.audit(&u, &u, &int(0)).all_ok());
    }

    #[test]
    fn coupling_point_mass() {
        let p = IntDist::point(0);
        let c = dominating_coupling(&p, &p, &int(0)).unwrap();
        assert_eq!(
            c.cells,
            vec![CouplingCell { z: 0, x_prime: 0, in_a: true, mass: int(1) }]
        );
    }

    #[test]
    fn coupling_with_slack() {
        let mu = d(&[(0, 3, 4), (1, 1, 4)]);
        let mp = d(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]);
        let eps = q(1, 2);
        let c = dominating_coupling(&mu, &mp, &eps).unwrap();
        assert_eq!(c.n, BigInt::from(12));
        assert_eq!(c.k, BigInt::from(8));
        assert!(!c.doubled_for_even_k);
        assert_eq!(c.p_a(), q(2, 3));
        let audit = c.audit(&mu, &mp, &eps);
        assert!(audit.all_ok(), "{audit:?}");
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("[0,0,true,"));
    }

    #[test]
    fn coupling_preconditions() {
        let mu = d(&[(0, 3, 4), (1, 1, 4)]);
        let asym = d(&[(0, 1, 2), (1, 1, 2)]);
        assert!(matches!(
            dominating_coupling(&mu, &asym, &int(1)),
            Err(Error::Precondition(_))
        ));
        let mp = d(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]);
        assert!(matches!(
            dominating_coupling(&mu, &mp, &int(0)),
            Err(Error::Precondition(_))
        ));
    }

    fn arb_dist() -> impl Strategy<Value = IntDist> {
        prop::collection::vec((-5i64..5, 1u32..6), 1..6)
            .prop_map(|v| IntDist::from_weights(v).unwrap())
    }

    proptest! {
        #[test]
        fn plus_preserves_profile(mu in arb_dist()) {
            let p = plus_rearrange(&mu);
            for k in 1..=mu.len() {
                prop_assert_eq!(mu.q_k(k), p.q_k(k));
                let (a, b) = centered_interval(k);
                let on_ik: Rational = (a..=b).map(|s| p.mass_at(s)).sum();
                prop_assert_eq!(on_ik, mu.q_k(k));
            }
        }

        #[test]
        fn minus_is_mirror(mu in arb_dist()) {
            let p = plus_rearrange(&mu);
            let m = minus_rearrange(&mu);
            for s in -6..=6 {
                prop_assert_eq!(m.mass_at(s), p.mass_at(-s));
            }
        }

        #[test]
        fn medians_nest(counts in prop::collection::vec((-8i64..8, 1i64..9), 1..8)) {
            let mut seen = std::collections::BTreeMap::new();
            for (s, c) in counts { seen.insert(s, c); }
            let v: Vec<(i64, i64)> = seen.into_iter().collect();
            let nu = IntMeasure::from_counts(&v).unwrap();
            let bf = ball_function(&nu).unwrap();
            let mc = bf.medians();
            prop_assert!(mc.is_nested());
            prop_assert_eq!(bf.eval(mc.m.floor()), Some(0));
            for j in 1..=mc.m_j.len() {
                prop_assert_eq!(bf.eval(mc.get(j).floor()), Some(0));
            }
        }

        #[test]
        fn coupling_self_and_spread(mu in arb_dist(), half_width in 0i64..4, e in 0i64..4) {
            let target = IntDist::uniform_range(-half_width, half_width);
            let eps = q(e, 2);
            if let Ok(c) = dominating_coupling(&mu, &target, &eps) {
                let audit = c.audit(&mu, &target, &eps);
                prop_assert!(audit.all_ok(), "{:?}", audit);
            }
        }
    }
}
