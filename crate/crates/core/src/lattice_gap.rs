//! Symmetric generalized arithmetic progressions, two-point decompositions
//! with a connected support graph, integer lattice bases, and exact
//! Rademacher-sum concentration.

use std::collections::{BTreeMap, HashSet};

use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dist::IntDist;
use crate::error::{Error, Result};
use crate::lattice::{LatticeDist, Point};
use crate::rational::{binomial, common_denominator, fmt_rational, parse_rational, scaled_numer, Rational};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// A GAP generator: a rational scalar or an integer vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    Scalar(Rational),
    Vector(Vec<i64>),
}

impl Serialize for Generator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Generator::Scalar(x) => s.serialize_str(&fmt_rational(x)),
            Generator::Vector(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
            Vec(Vec<i64>),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Int(n) => Generator::Scalar(Rational::from_integer(BigInt::from(n))),
            Raw::Str(s) => Generator::Scalar(parse_rational(&s).map_err(serde::de::Error::custom)?),
            Raw::Vec(v) => Generator::Vector(v),
        })
    }
}

/// `{Σ j_i g_i : |j_i| ≤ M_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymGap {
    pub rank: usize,
    pub dims: Vec<u64>,
    pub generators: Vec<Generator>,
}

/// Elements scaled by a common denominator so arithmetic stays integral.
type Elem = Vec<i128>;

impl SymGap {
    pub fn new(dims: Vec<u64>, generators: Vec<Generator>) -> Result<Self> {
        if dims.len() != generators.len() {
            return Err(Error::DimensionMismatch(dims.len(), generators.len()));
        }
        let gap = SymGap {
            rank: dims.len(),
            dims,
            generators,
        };
        gap.kind()?;
        Ok(gap)
    }

    pub fn scalar(dims: Vec<u64>, gens: Vec<i64>) -> Result<Self> {
        Self::new(
            dims,
            gens.into_iter()
                .map(|g| Generator::Scalar(Rational::from_integer(BigInt::from(g))))
                .collect(),
        )
    }

    pub fn rank0() -> Self {
        SymGap {
            rank: 0,
            dims: vec![],
            generators: vec![],
        }
    }

    /// `None` for rank 0, else `Some(0)` for scalars or `Some(d)` for ℤ^d.
    fn kind(&self) -> Result<Option<usize>> {
        let mut kind = None;
        for g in &self.generators {
            let k = match g {
                Generator::Scalar(_) => 0,
                Generator::Vector(v) => v.len(),
            };
            match kind {
                None => kind = Some(k),
                Some(prev) if prev != k => {
                    return Err(Error::Precondition("mixed generator kinds".into()));
                }
                _ => {}
            }
        }
        Ok(kind)
    }

    pub fn volume(&self) -> u128 {
        self.dims
            .iter()
            .try_fold(1u128, |acc, &m| acc.checked_mul(2 * m as u128 + 1))
            .unwrap_or(u128::MAX)
    }

    pub fn dilate(&self, t: u64) -> SymGap {
        SymGap {
            rank: self.rank,
            dims: self.dims.iter().map(|m| m * t).collect(),
            generators: self.generators.clone(),
        }
    }

    pub fn sumset(&self, other: &SymGap) -> Result<SymGap> {
        if let (Some(a), Some(b)) = (self.kind()?, other.kind()?) {
            if a != b {
                return Err(Error::Precondition("incompatible generator kinds".into()));
            }
        }
        Ok(SymGap {
            rank: self.rank + other.rank,
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
            generators: self.generators.iter().chain(&other.generators).cloned().collect(),
        })
    }

    fn scale(&self) -> BigInt {
        common_denominator(self.generators.iter().filter_map(|g| match g {
            Generator::Scalar(x) => Some(x),
            Generator::Vector(_) => None,
        }))
    }

    fn scaled_generators(&self, den: &BigInt) -> Result<Vec<Elem>> {
        self.generators
            .iter()
            .map(|g| match g {
                Generator::Scalar(x) => scaled_numer(x, den)
                    .to_i128()
                    .map(|v| vec![v])
                    .ok_or_else(|| Error::OutOfRange("generator too large".into())),
                Generator::Vector(v) => Ok(v.iter().map(|&x| x as i128).collect()),
            })
            .collect()
    }

    fn element_dim(&self) -> usize {
        match self.generators.first() {
            Some(Generator::Vector(v)) => v.len(),
            _ => 1,
        }
    }

    /// Every `Σ j_i g_i` (with multiplicity) in scaled form.
    fn enumerate_scaled(&self, budget: u64) -> Result<(BigInt, Vec<Elem>)> {
        let vol = self.volume();
        if vol > budget as u128 {
            return Err(Error::BudgetExceeded {
                needed: vol,
                budget,
            });
        }
        let den = self.scale();
        let gens = self.scaled_generators(&den)?;
        let dim = self.element_dim();
        let mut out: Vec<Elem> = vec![vec![0; dim]];
        for (g, &m) in gens.iter().zip(&self.dims) {
            let m = m as i128;
            let mut next = Vec::with_capacity(out.len() * (2 * m as usize + 1));
            for e in &out {
                for j in -m..=m {
                    next.push(e.iter().zip(g).map(|(a, b)| a + j * b).collect());
                }
            }
            out = next;
        }
        Ok((den, out))
    }

    /// Distinct elements as rationals (one coordinate for scalar GAPs).
    pub fn elements(&self, budget: u64) -> Result<Vec<Vec<Rational>>> {
        let (den, all) = self.enumerate_scaled(budget)?;
        let mut set: Vec<Elem> = all.into_iter().collect::<HashSet<_>>().into_iter().collect();
        set.sort();
        Ok(set
            .into_iter()
            .map(|e| {
                e.into_iter()
                    .map(|v| Rational::new(BigInt::from(v), den.clone()))
                    .collect()
            })
            .collect())
    }

    pub fn is_proper(&self, budget: u64) -> Result<bool> {
        let (_, all) = self.enumerate_scaled(budget)?;
        let n = all.len();
        Ok(all.into_iter().collect::<HashSet<_>>().len() == n)
    }

    pub fn contains(&self, x: &[Rational], budget: u64) -> Result<bool> {
        let (den, all) = self.enumerate_scaled(budget)?;
        let Some(target) = x
            .iter()
            .map(|v| {
                let s = v * Rational::from_integer(den.clone());
                if s.is_integer() {
                    s.to_integer().to_i128()
                } else {
                    None
                }
            })
            .collect::<Option<Elem>>()
        else {
            return Ok(false);
        };
        Ok(all.contains(&target))
    }

    pub fn contains_int(&self, x: i64, budget: u64) -> Result<bool> {
        self.contains(&[Rational::from_integer(BigInt::from(x))], budget)
    }

    /// Fraction of `dists` whose whole support lies in the GAP.
    pub fn cover(&self, dists: &[IntDist], budget: u64) -> Result<Rational> {
        if dists.is_empty() {
            return Err(Error::Precondition("no distributions".into()));
        }
        let (den, all) = self.enumerate_scaled(budget)?;
        let den = den
            .to_i128()
            .ok_or_else(|| Error::OutOfRange("denominator too large".into()))?;
        let set: HashSet<Elem> = all.into_iter().collect();
        let inside = dists
            .iter()
            .filter(|d| d.sites().all(|s| set.contains(&vec![s as i128 * den])))
            .count();
        Ok(Rational::new(BigInt::from(inside), BigInt::from(dists.len())))
    }
}

/// Smallest-volume rank-1 GAP `{−Mg, …, Mg}` holding at least `(1−ε)·n` of
/// the values (with multiplicity); ties go to the smaller step.
pub fn gap_fit_rank1(values: &[i64], eps: &Rational) -> Option<SymGap> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as i64;
    let quorum_r = (Rational::one() - eps) * Rational::from_integer(BigInt::from(n));
    let quorum = quorum_r.ceil().to_integer().to_i64().unwrap_or(0).clamp(0, n) as usize;
    let mut steps: Vec<u64> = vec![1];
    for &v in values {
        steps.extend(divisors(v.unsigned_abs()));
    }
    steps.sort_unstable();
    steps.dedup();
    let mut best: Option<(u64, u64)> = None;
    for g in steps {
        let mut levels: Vec<u64> = values
            .iter()
            .filter(|v| v.unsigned_abs() % g == 0)
            .map(|v| v.unsigned_abs() / g)
            .collect();
        if levels.len() < quorum {
            continue;
        }
        levels.sort_unstable();
        let m = if quorum == 0 { 0 } else { levels[quorum - 1] };
        if best.is_none_or(|(_, bm)| m < bm) {
            best = Some((g, m));
        }
    }
    let (g, m) = best?;
    Some(SymGap::scalar(vec![m], vec![g as i64]).expect("rank one"))
}

fn divisors(n: u64) -> Vec<u64> {
    if n == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            out.push(n / d);
        }
        d += 1;
    }
    out
}

/// `μ = Σ w_i · U{a_i, b_i}` with a connected support graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: Vec<(Rational, (i64, i64))>,
    /// Even denominator used for the unit pairing.
    pub n: BigInt,
    /// Components of the pairing graph before reconnection.
    pub components_before: usize,
}

impl Serialize for Decomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            n: String,
            components_before: usize,
            parts: Vec<(String, [i64; 2])>,
        }
        Wire {
            n: self.n.to_string(),
            components_before: self.components_before,
            parts: self
                .parts
                .iter()
                .map(|(w, (a, b))| (fmt_rational(w), [*a, *b]))
                .collect(),
        }
        .serialize(s)
    }
}

impl Decomposition {
    pub fn reconstruct(&self) -> Result<IntDist> {
        let mut acc: BTreeMap<i64, Rational> = BTreeMap::new();
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        for (w, (a, b)) in &self.parts {
            for s in [a, b] {
                *acc.entry(*s).or_insert_with(Rational::zero) += w * &half;
            }
        }
        IntDist::new(acc.into_iter().collect())
    }

    pub fn is_connected(&self) -> bool {
        let vertices: Vec<i64> = {
            let mut v: Vec<i64> = self.parts.iter().flat_map(|(_, (a, b))| [*a, *b]).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut uf = UnionFind::new(&vertices);
        for (_, (a, b)) in &self.parts {
            uf.union(*a, *b);
        }
        uf.components().len() <= 1
    }
}

struct UnionFind {
    index: BTreeMap<i64, usize>,
    parent: Vec<usize>,
    vertices: Vec<i64>,
}

impl UnionFind {
    fn new(vertices: &[i64]) -> Self {
        UnionFind {
            index: vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect(),
            parent: (0..vertices.len()).collect(),
            vertices: vertices.to_vec(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: i64, b: i64) {
        let (ra, rb) = (self.find(self.index[&a]), self.find(self.index[&b]));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Components as sorted vertex lists, ordered by smallest vertex.
    fn components(&mut self) -> Vec<Vec<i64>> {
        let mut groups: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
        for i in 0..self.vertices.len() {
            let r = self.find(i);
            groups.entry(r).or_default().push(self.vertices[i]);
        }
        let mut out: Vec<Vec<i64>> = groups.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }
}

/// Pairs unit `o_i` with `o_{i+N/2}`, merges equal supports, then links the
/// components in a cycle with weight `1/N` edges.
pub fn connected_decomposition(mu: &IntDist) -> Result<Decomposition> {
    if mu.len() < 2 {
        return Err(Error::Precondition("needs at least two atoms".into()));
    }
    if mu.q_max() * Rational::from_integer(BigInt::from(2)) > Rational::one() {
        return Err(Error::Precondition("largest atom exceeds 1/2".into()));
    }
    let (mut n, counts) = mu.to_counts();
    let mut counts: Vec<(i64, BigInt)> = counts;
    if n.is_odd() {
        n *= 2;
        for c in counts.iter_mut() {
            c.1 *= 2;
        }
    }
    let half = &n / 2;
    let mut ranges: Vec<(i64, BigInt, BigInt)> = Vec::with_capacity(counts.len());
    let mut start = BigInt::zero();
    for (s, c) in &counts {
        let end = &start + c;
        ranges.push((*s, start.clone(), end.clone()));
        start = end;
    }
    let mut pair_units: BTreeMap<(i64, i64), BigInt> = BTreeMap::new();
    for (sa, a0, a1) in &ranges {
        let a1 = a1.min(&half).clone();
        if *a0 >= a1 {
            continue;
        }
        for (sb, b0, b1) in &ranges {
            let lo = a0.max(&(b0 - &half)).clone();
            let hi = a1.clone().min(b1 - &half);
            if lo < hi {
                debug_assert_ne!(sa, sb);
                let key = (*sa.min(sb), *sa.max(sb));
                *pair_units.entry(key).or_insert_with(BigInt::zero) += hi - lo;
            }
        }
    }
    // Weight of a pair in units of 1/N.
    let mut units: BTreeMap<(i64, i64), BigInt> = pair_units
        .into_iter()
        .map(|(k, c)| (k, c * 2))
        .collect();

    let vertices: Vec<i64> = mu.sites().collect();
    let mut uf = UnionFind::new(&vertices);
    for (a, b) in units.keys() {
        uf.union(*a, *b);
    }
    let comps = uf.components();
    let t = comps.len();
    if t > 1 {
        let edges: Vec<(i64, i64)> = comps
            .iter()
            .map(|c| {
                *units
                    .keys()
                    .find(|(a, _)| c.binary_search(a).is_ok())
                    .expect("component has an edge")
            })
            .collect();
        for e in &edges {
            *units.get_mut(e).expect("edge present") -= 1;
        }
        for l in 0..t {
            let y = edges[l].0;
            let z = edges[(l + 1) % t].1;
            *units.entry((y.min(z), y.max(z))).or_insert_with(BigInt::zero) += 1;
        }
    }
    let parts = units
        .into_iter()
        .filter(|(_, u)| u.is_positive())
        .map(|(k, u)| (Rational::new(u, n.clone()), k))
        .collect();
    Ok(Decomposition {
        parts,
        n,
        components_before: t,
    })
}

/// Integer basis `B` (columns) of the lattice spanned by `S`, with exact
/// coordinates for every input vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeBasis {
    pub dim: usize,
    /// Column vectors of `B`.
    pub columns: Vec<Vec<i64>>,
    pub coords: Vec<(Point, Vec<i64>)>,
    /// Whether every coordinate vector obeys `‖z‖ ≤ r^{r−1} R^{2r−1}`.
    pub kz_bound_holds: bool,
}

impl LatticeBasis {
    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn apply(&self, z: &[i64]) -> Vec<i64> {
        (0..self.dim)
            .map(|i| self.columns.iter().zip(z).map(|(c, zk)| c[i] * zk).sum())
            .collect()
    }
}

/// Column-style Hermite reduction of the integer span of `S` (which must
/// contain the zero vector).
pub fn integer_span_basis(s: &[Point]) -> Result<LatticeBasis> {
    let r = s.first().map(Vec::len).ok_or_else(|| Error::Precondition("empty set".into()))?;
    if s.iter().any(|x| x.len() != r) {
        return Err(Error::DimensionMismatch(r, s.iter().find(|x| x.len() != r).unwrap().len()));
    }
    if !s.iter().any(|x| x.iter().all(|&v| v == 0)) {
        return Err(Error::Precondition("set must contain the zero vector".into()));
    }
    let mut cols: Vec<Vec<BigInt>> = s
        .iter()
        .filter(|x| x.iter().any(|&v| v != 0))
        .map(|x| x.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut k = 0;
    for row in 0..r {
        if k >= cols.len() {
            break;
        }
        loop {
            let nz: Vec<usize> = (k..cols.len()).filter(|&c| !cols[c][row].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz
                .iter()
                .min_by_key(|&&c| cols[c][row].abs())
                .expect("nonempty");
            cols.swap(k, p);
            if cols[k][row].is_negative() {
                cols[k].iter_mut().for_each(|v| *v = -v.clone());
            }
            let mut done = true;
            for c in k + 1..cols.len() {
                if cols[c][row].is_zero() {
                    continue;
                }
                let qt = cols[c][row].div_floor(&cols[k][row]);
                let pivot_col = cols[k].clone();
                for (v, pv) in cols[c].iter_mut().zip(&pivot_col) {
                    *v -= &qt * pv;
                }
                if !cols[c][row].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if k < cols.len() && !cols[k][row].is_zero() {
            for c in 0..k {
                let qt = cols[c][row].div_floor(&cols[k][row]);
                let pivot_col = cols[k].clone();
                for (v, pv) in cols[c].iter_mut().zip(&pivot_col) {
                    *v -= &qt * pv;
                }
            }
            pivots.push(row);
            k += 1;
        }
    }
    cols.truncate(k);

    let to_i64 = |v: &BigInt| v.to_i64().ok_or_else(|| Error::OutOfRange("basis entry overflow".into()));
    let columns: Vec<Vec<i64>> = cols
        .iter()
        .map(|c| c.iter().map(to_i64).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let mut coords = Vec::with_capacity(s.len());
    for x in s {
        let mut z: Vec<BigInt> = Vec::with_capacity(k);
        for (kk, &row) in pivots.iter().enumerate() {
            let partial: BigInt = (0..kk).map(|l| &cols[l][row] * &z[l]).sum();
            let rem = BigInt::from(x[row]) - partial;
            let (qt, rest) = rem.div_rem(&cols[kk][row]);
            if !rest.is_zero() {
                return Err(Error::Invariant("vector outside the computed lattice".into()));
            }
            z.push(qt);
        }
        let z: Vec<i64> = z.iter().map(to_i64).collect::<Result<_>>()?;
        coords.push((x.clone(), z));
    }
    let mut basis = LatticeBasis {
        dim: r,
        columns,
        coords,
        kz_bound_holds: true,
    };
    for (x, z) in &basis.coords {
        if basis.apply(z) != *x {
            return Err(Error::Invariant("basis does not reproduce input".into()));
        }
    }
    basis.kz_bound_holds = kz_bound_holds(s, &basis);
    Ok(basis)
}

/// `‖z‖² ≤ (r^{r−1} R^{2r−1})²` for every coordinate vector, exact.
fn kz_bound_holds(s: &[Point], basis: &LatticeBasis) -> bool {
    let r = s[0].len() as u32;
    let r2: BigInt = s
        .iter()
        .map(|x| x.iter().map(|&v| BigInt::from(v) * v).sum::<BigInt>())
        .max()
        .unwrap_or_default();
    let bound_sq = BigInt::from(r).pow(2 * (r - 1)) * r2.pow(2 * r - 1);
    basis
        .coords
        .iter()
        .all(|(_, z)| z.iter().map(|&v| BigInt::from(v) * v).sum::<BigInt>() <= bound_sq)
}

/// Lattice generated by the differences `x − x₀` of the support; an empty
/// basis plays the role of an infinite span.
pub fn max_span_vec(mu: &LatticeDist) -> Result<LatticeBasis> {
    let x0 = mu.atoms().keys().next().expect("nonempty").clone();
    let diffs: Vec<Point> = mu
        .atoms()
        .keys()
        .map(|x| x.iter().zip(&x0).map(|(a, b)| a - b).collect())
        .collect();
    integer_span_basis(&diffs)
}

/// `C(n, ⌊n/2⌋) / 2ⁿ`.
pub fn erdos_bound(n: u64) -> Rational {
    Rational::new(binomial(n, n / 2), BigInt::one() << n)
}

/// `Q(Σ v_i ξ_i)` for independent Rademacher signs `ξ_i`.
pub fn rademacher_q(v: &[i64]) -> Result<Rational> {
    if v.contains(&0) {
        return Err(Error::OutOfRange("zero multiplier".into()));
    }
    let sum = IntDist::convolve_all(
        std::iter::once(IntDist::point(0))
            .chain(v.iter().map(|&x| IntDist::uniform(&[-x.abs(), x.abs()]).expect("distinct")))
            .collect::<Vec<_>>()
            .iter(),
    );
    let q = sum.q_max();
    if q > erdos_bound(v.len() as u64) {
        return Err(Error::Invariant("Erdős bound violated".into()));
    }
    Ok(q)
}
