//! Finite probability distributions on the integers with exact rational masses.
//!
//! [`IntDist`] is the carrier for every summand, extremal measure and sum in
//! the crate. Values are immutable; every operation returns a fresh value.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{common_denominator, fmt_rational, parse_rational, scaled_numer, Rational};

/// A finite distribution on ℤ: strictly increasing sites, positive masses
/// in lowest terms, total exactly one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntDist {
    atoms: Vec<(i64, Rational)>,
}

/// Maximum span of a distribution: the gcd of its pairwise site differences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanResult {
    Finite(u64),
    Infinite,
}

impl fmt::Display for SpanResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpanResult::Finite(s) => write!(f, "{s}"),
            SpanResult::Infinite => write!(f, "inf"),
        }
    }
}

/// The maximally centered interval of `j` consecutive integers,
/// `{-floor((j-1)/2), ..., ceil((j-1)/2)}`, returned as `(lo, hi)`.
pub fn centered_interval(j: usize) -> (i64, i64) {
    assert!(j >= 1);
    let j1 = (j - 1) as i64;
    (-(j1 / 2), j1 - j1 / 2)
}

impl IntDist {
    /// Validates and canonicalizes a list of atoms (sorted by site).
    pub fn new(mut atoms: Vec<(i64, Rational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        atoms.sort_by_key(|(s, _)| *s);
        let mut total = Rational::zero();
        for (i, (s, m)) in atoms.iter().enumerate() {
            if i > 0 && atoms[i - 1].0 == *s {
                return Err(Error::InvalidDistribution(format!("duplicate site {s}")));
            }
            if !m.is_positive() {
                return Err(Error::InvalidDistribution(format!(
                    "non-positive mass {} at site {s}",
                    fmt_rational(m)
                )));
            }
            total += m;
        }
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {}, not 1",
                fmt_rational(&total)
            )));
        }
        Ok(IntDist { atoms })
    }

    /// Normalizes positive integer weights; repeated sites are merged.
    pub fn from_weights<I, W>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, W)>,
        W: Into<BigInt>,
    {
        let mut merged: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (s, w) in weights {
            let w: BigInt = w.into();
            if w.is_negative() {
                return Err(Error::InvalidDistribution(format!("negative weight at {s}")));
            }
            *merged.entry(s).or_insert_with(BigInt::zero) += w;
        }
        merged.retain(|_, w| !w.is_zero());
        let total: BigInt = merged.values().sum();
        if total.is_zero() {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        Ok(IntDist {
            atoms: merged
                .into_iter()
                .map(|(s, w)| (s, Rational::new(w, total.clone())))
                .collect(),
        })
    }

    /// Like [`IntDist::new`] but for atoms already known to be valid.
    pub(crate) fn from_sorted_unchecked(atoms: Vec<(i64, Rational)>) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(atoms.iter().map(|a| &a.1).sum::<Rational>().is_one());
        IntDist { atoms }
    }

    pub fn point(site: i64) -> Self {
        IntDist {
            atoms: vec![(site, Rational::one())],
        }
    }

    pub fn uniform(sites: &[i64]) -> Result<Self> {
        Self::from_weights(sites.iter().map(|&s| (s, 1u32)))
            .and_then(|d| {
                if d.len() != sites.len() {
                    Err(Error::InvalidDistribution("repeated site in uniform".into()))
                } else {
                    Ok(d)
                }
            })
    }

    /// Uniform on `{lo, ..., hi}`.
    pub fn uniform_range(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi);
        let n = hi - lo + 1;
        IntDist {
            atoms: (lo..=hi)
                .map(|s| (s, Rational::new(BigInt::one(), BigInt::from(n))))
                .collect(),
        }
    }

    pub fn atoms(&self) -> &[(i64, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.atoms.iter().map(|(s, _)| *s)
    }

    pub fn masses(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.atoms.iter().map(|(_, m)| m)
    }

    pub fn min_site(&self) -> i64 {
        self.atoms[0].0
    }

    pub fn max_site(&self) -> i64 {
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn mass_at(&self, site: i64) -> Rational {
        match self.atoms.binary_search_by_key(&site, |(s, _)| *s) {
            Ok(i) => self.atoms[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Common denominator and integer numerators of the masses.
    pub fn to_counts(&self) -> (BigInt, Vec<(i64, BigInt)>) {
        let den = common_denominator(self.masses());
        let counts = self
            .atoms
            .iter()
            .map(|(s, m)| (*s, scaled_numer(m, &den)))
            .collect();
        (den, counts)
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &IntDist) -> IntDist {
        let (da, ca) = self.to_counts();
        let (db, cb) = other.to_counts();
        let den = &da * &db;
        let lo = self.min_site() + other.min_site();
        let hi = self.max_site() + other.max_site();
        let span = (hi - lo + 1) as u128;
        let pairs = (ca.len() * cb.len()) as u128;
        let counts: Vec<(i64, BigInt)> = if span <= (1 << 16).max(8 * pairs) {
            let mut acc = vec![BigInt::zero(); span as usize];
            for (sa, wa) in &ca {
                for (sb, wb) in &cb {
                    acc[(sa + sb - lo) as usize] += wa * wb;
                }
            }
            acc.into_iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(i, w)| (lo + i as i64, w))
                .collect()
        } else {
            let mut acc: BTreeMap<i64, BigInt> = BTreeMap::new();
            for (sa, wa) in &ca {
                for (sb, wb) in &cb {
                    *acc.entry(sa + sb).or_insert_with(BigInt::zero) += wa * wb;
                }
            }
            acc.into_iter().collect()
        };
        IntDist::from_sorted_unchecked(
            counts
                .into_iter()
                .map(|(s, w)| (s, Rational::new(w, den.clone())))
                .collect(),
        )
    }

    /// `n`-fold self-convolution by repeated squaring; `n >= 1`.
    pub fn pow_conv(&self, n: u32) -> IntDist {
        assert!(n >= 1);
        let mut result: Option<IntDist> = None;
        let mut base = self.clone();
        let mut k = n;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.convolve(&base),
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.convolve(&base);
        }
        result.expect("n >= 1")
    }

    /// Convolution of a nonempty list.
    pub fn convolve_all<'a, I: IntoIterator<Item = &'a IntDist>>(dists: I) -> IntDist {
        let mut it = dists.into_iter();
        let first = it.next().expect("at least one distribution").clone();
        it.fold(first, |acc, d| acc.convolve(d))
    }

    /// Largest atom mass, `Q(X)`.
    pub fn q_max(&self) -> Rational {
        self.masses().max().cloned().expect("nonempty")
    }

    /// Masses sorted in decreasing order.
    pub fn sorted_masses_desc(&self) -> Vec<Rational> {
        let mut m: Vec<Rational> = self.masses().cloned().collect();
        m.sort_by(|a, b| b.cmp(a));
        m
    }

    /// Sum of the `k` largest masses.
    pub fn q_k(&self, k: usize) -> Rational {
        assert!(k >= 1, "q_k needs k >= 1");
        if k >= self.len() {
            return Rational::one();
        }
        self.sorted_masses_desc().into_iter().take(k).sum()
    }

    /// Largest mass carried by `t` consecutive integers. An open real interval
    /// of length `t` holds at most `t` integers, so this is `Q(X, t)`.
    pub fn q_interval(&self, t: u64) -> Rational {
        assert!(t >= 1, "q_interval needs t >= 1");
        let mut best = Rational::zero();
        let mut window = Rational::zero();
        let mut left = 0usize;
        for right in 0..self.atoms.len() {
            window += &self.atoms[right].1;
            while (self.atoms[right].0 - self.atoms[left].0) as u64 >= t {
                window -= &self.atoms[left].1;
                left += 1;
            }
            if window > best {
                best = window.clone();
            }
        }
        best
    }

    pub fn mean(&self) -> Rational {
        self.atoms
            .iter()
            .map(|(s, m)| m * Rational::from_integer(BigInt::from(*s)))
            .sum()
    }

    pub fn variance(&self) -> Rational {
        let mu = self.mean();
        self.atoms
            .iter()
            .map(|(s, m)| {
                let d = Rational::from_integer(BigInt::from(*s)) - &mu;
                m * &d * &d
            })
            .sum()
    }

    /// `E|X - EX|^3`.
    pub fn abs_central_moment3(&self) -> Rational {
        let mu = self.mean();
        self.atoms
            .iter()
            .map(|(s, m)| {
                let d = (Rational::from_integer(BigInt::from(*s)) - &mu).abs();
                m * &d * &d * &d
            })
            .sum()
    }

    pub fn shift(&self, c: i64) -> IntDist {
        IntDist {
            atoms: self.atoms.iter().map(|(s, m)| (s + c, m.clone())).collect(),
        }
    }

    pub fn negate(&self) -> IntDist {
        IntDist {
            atoms: self.atoms.iter().rev().map(|(s, m)| (-s, m.clone())).collect(),
        }
    }

    /// Symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        *self == self.negate()
    }

    fn is_contiguous(&self) -> bool {
        self.atoms.windows(2).all(|w| w[1].0 == w[0].0 + 1)
    }

    /// `p_i^2 >= p_{i-1} p_{i+1}` for every integer `i`. An internal zero
    /// between positive masses violates the inequality, so the support must be
    /// an interval.
    pub fn is_log_concave(&self) -> bool {
        self.is_contiguous()
            && self
                .atoms
                .windows(3)
                .all(|w| &w[1].1 * &w[1].1 >= &w[0].1 * &w[2].1)
    }

    /// Masses nondecreasing up to some site and nonincreasing after it, with
    /// absent sites counting as zero mass.
    pub fn is_unimodal(&self) -> bool {
        if !self.is_contiguous() {
            return false;
        }
        let mut descending = false;
        for w in self.atoms.windows(2) {
            if w[1].1 > w[0].1 {
                if descending {
                    return false;
                }
            } else if w[1].1 < w[0].1 {
                descending = true;
            }
        }
        true
    }

    /// All sites carrying the maximal mass.
    pub fn modes(&self) -> Vec<i64> {
        let q = self.q_max();
        self.atoms
            .iter()
            .filter(|(_, m)| *m == q)
            .map(|(s, _)| *s)
            .collect()
    }

    pub fn max_span(&self) -> SpanResult {
        if self.len() == 1 {
            return SpanResult::Infinite;
        }
        let x0 = self.min_site();
        let g = self
            .sites()
            .skip(1)
            .fold(0i64, |g, s| g.gcd(&(s - x0)));
        SpanResult::Finite(g as u64)
    }

    /// `X^#`: the masses in site order placed on the maximally centered
    /// interval of the same length.
    pub fn squeeze(&self) -> IntDist {
        let (lo, _) = centered_interval(self.len());
        IntDist {
            atoms: self
                .atoms
                .iter()
                .enumerate()
                .map(|(i, (_, m))| (lo + i as i64, m.clone()))
                .collect(),
        }
    }

    pub fn is_sharp_log_concave(&self) -> bool {
        self.squeeze().is_log_concave()
    }

    /// Line-oriented `site: num/den` rendering.
    pub fn to_text(&self) -> String {
        self.atoms
            .iter()
            .map(|(s, m)| format!("{s}: {}\n", fmt_rational(m)))
            .collect()
    }

    /// Parses the line-oriented format. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut atoms: Vec<(i64, Rational)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let col0 = body.len() - body.trim_start().len() + 1;
            let err = |column: usize, msg: String| Error::Parse {
                line: line_no,
                column,
                msg,
            };
            let (site, mass) = body
                .split_once(':')
                .ok_or_else(|| err(col0, "expected `site: num/den`".into()))?;
            let site: i64 = site
                .trim()
                .parse()
                .map_err(|_| err(col0, format!("bad site {:?}", site.trim())))?;
            let mass_col = site_col(body) + 1;
            let mass = parse_rational(mass).map_err(|e| err(mass_col, e.to_string()))?;
            if !mass.is_positive() {
                return Err(err(mass_col, "mass must be positive".into()));
            }
            if let Some((prev, _)) = atoms.last() {
                if *prev == site {
                    return Err(err(col0, format!("duplicate site {site}")));
                }
                if *prev > site {
                    return Err(err(col0, format!("site {site} out of ascending order")));
                }
            }
            atoms.push((site, mass));
        }
        let total: Rational = atoms.iter().map(|a| &a.1).sum();
        if atoms.is_empty() || !total.is_one() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                column: 1,
                msg: format!("masses sum to {}, not 1", fmt_rational(&total)),
            });
        }
        Ok(IntDist { atoms })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })
    }
}

fn site_col(body: &str) -> usize {
    body.find(':').map(|i| i + 1).unwrap_or(0)
}

impl fmt::Display for IntDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (s, m)) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}:{}", fmt_rational(m))?;
        }
        write!(f, "}}")
    }
}

struct AtomList<'a>(&'a [(i64, Rational)]);

impl Serialize for AtomList<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (site, m) in self.0 {
            seq.serialize_element(&(site, fmt_rational(m)))?;
        }
        seq.end()
    }
}

impl Serialize for IntDist {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            atoms: AtomList<'a>,
        }
        Wire {
            atoms: AtomList(&self.atoms),
        }
        .serialize(s)
    }
}

/// Validated atom list: errors carry the parser position of the offending atom.
struct Atoms(Vec<(i64, Rational)>);

impl<'de> Deserialize<'de> for Atoms {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Atoms;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of [site, \"num/den\"] pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Atoms, A::Error> {
                let mut atoms: Vec<(i64, Rational)> = Vec::new();
                let mut total = Rational::zero();
                while let Some((site, mass)) = seq.next_element::<(i64, String)>()? {
                    let mass = parse_rational(&mass).map_err(de::Error::custom)?;
                    if !mass.is_positive() {
                        return Err(de::Error::custom(format!("non-positive mass at site {site}")));
                    }
                    if let Some((prev, _)) = atoms.last() {
                        if *prev == site {
                            return Err(de::Error::custom(format!("duplicate site {site}")));
                        }
                        if *prev > site {
                            return Err(de::Error::custom(format!("site {site} out of ascending order")));
                        }
                    }
                    total += &mass;
                    atoms.push((site, mass));
                }
                if atoms.is_empty() {
                    return Err(de::Error::custom("no atoms"));
                }
                if !total.is_one() {
                    return Err(de::Error::custom(format!(
                        "masses sum to {}, not 1",
                        fmt_rational(&total)
                    )));
                }
                Ok(Atoms(atoms))
            }
        }
        d.deserialize_seq(V)
    }
}

impl<'de> Deserialize<'de> for IntDist {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            atoms: Atoms,
        }
        let w = Wire::deserialize(d)?;
        Ok(IntDist { atoms: w.atoms.0 })
    }
}

/// Integer-valued helper used by tests and generators: the mass of `site`
/// scaled by `den` as a machine integer.
pub fn scaled_mass(d: &IntDist, site: i64, den: i64) -> Option<i64> {
    let m = d.mass_at(site) * Rational::from_integer(BigInt::from(den));
    if m.is_integer() {
        m.to_integer().to_i64()
    } else {
        None
    }
}
