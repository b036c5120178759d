//! Extremal measures `ν_α`, standard extremal and balanced sequences, and the
//! optimal-concentration functionals `t_SE`, `t_SE^bal` and a windowed oracle
//! for `t`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::IntDist;
use crate::error::{Error, Result};
use crate::rational::{floor_inv, int, Rational};

/// Inclusive integer window `{lo, …, hi}`; text form `lo..hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::OutOfRange(format!("empty window {lo}..{hi}")));
        }
        Ok(Window { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::OutOfRange(format!("window must look like a..b, got {s:?}"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Window::new(a, b)
    }
}

fn check_alpha(alpha: &Rational) -> Result<()> {
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(Error::OutOfRange(format!("alpha {alpha} outside (0,1]")));
    }
    Ok(())
}

/// `1 − α⌊α⁻¹⌋`.
pub fn residual(alpha: &Rational) -> Rational {
    Rational::one() - alpha * int(floor_inv(alpha))
}

/// Number of sites an extremal measure for `α` occupies.
pub fn support_size(alpha: &Rational) -> usize {
    floor_inv(alpha) as usize + usize::from(residual(alpha).is_positive())
}

/// Nonempty list of α values in `(0, 1]`, stored nonincreasing. `perm[i]` is
/// the input position of the `i`-th stored value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaSeq {
    alphas: Vec<Rational>,
    perm: Vec<usize>,
}

impl AlphaSeq {
    pub fn new(alphas: Vec<Rational>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::OutOfRange("empty alpha sequence".into()));
        }
        for a in &alphas {
            check_alpha(a)?;
        }
        let mut perm: Vec<usize> = (0..alphas.len()).collect();
        perm.sort_by(|&i, &j| alphas[j].cmp(&alphas[i]).then(i.cmp(&j)));
        let sorted = perm.iter().map(|&i| alphas[i].clone()).collect();
        Ok(AlphaSeq {
            alphas: sorted,
            perm,
        })
    }

    pub fn alphas(&self) -> &[Rational] {
        &self.alphas
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn multiplicities(&self) -> BTreeMap<&Rational, usize> {
        let mut m = BTreeMap::new();
        for a in &self.alphas {
            *m.entry(a).or_insert(0) += 1;
        }
        m
    }
}

/// `ν_α`: mass `α` at `0, …, k−1` and the residual at `k`, `k = ⌊α⁻¹⌋`.
pub fn nu(alpha: &Rational) -> Result<IntDist> {
    check_alpha(alpha)?;
    let k = floor_inv(alpha);
    let mut atoms: Vec<(i64, Rational)> = (0..k).map(|i| (i, alpha.clone())).collect();
    let r = residual(alpha);
    if r.is_positive() {
        atoms.push((k, r));
    }
    Ok(IntDist::from_sorted_unchecked(atoms))
}

/// `(−3α²k²(k+1)² + 2αk(k+1)(2k+1)) / 12` with `k = ⌊α⁻¹⌋`.
pub fn variance_nu(alpha: &Rational) -> Result<Rational> {
    check_alpha(alpha)?;
    let k = int(floor_inv(alpha));
    let k1 = &k + int(1);
    let a2 = alpha * alpha;
    let num = int(-3) * a2 * &k * &k * &k1 * &k1
        + int(2) * alpha * &k * &k1 * (int(2) * &k + int(1));
    Ok(num / int(12))
}

/// Bracket `[−k(k+1)(k+2)/6, −k(k²−1)/6]` for the slope of `variance_nu` on
/// `(1/(k+1), 1/k)`.
pub fn variance_slope_bracket(k: i64) -> (Rational, Rational) {
    let k = int(k);
    let lo = -(&k * (&k + int(1)) * (&k + int(2))) / int(6);
    let hi = -(&k * (&k * &k - int(1))) / int(6);
    (lo, hi)
}

pub fn is_extremal(mu: &IntDist, alpha: &Rational) -> bool {
    if check_alpha(alpha).is_err() {
        return false;
    }
    let k = floor_inv(alpha) as usize;
    let r = residual(alpha);
    let full = mu.masses().filter(|m| *m == alpha).count();
    let rest: Vec<&Rational> = mu.masses().filter(|m| *m != alpha).collect();
    if r.is_zero() {
        full == k && rest.is_empty()
    } else {
        full == k && rest.len() == 1 && *rest[0] == r
    }
}

/// Translate of `ν_α` or of its reflection.
pub fn is_standard_extremal(mu: &IntDist, alpha: &Rational) -> bool {
    let Ok(base) = nu(alpha) else {
        return false;
    };
    *mu == base.shift(mu.min_site()) || mu.negate().shift(-mu.negate().min_site()) == base
}

/// For every α, either `α⁻¹` is an odd integer or α occurs an even number of
/// times.
pub fn is_balanced(alphas: &AlphaSeq) -> bool {
    alphas
        .multiplicities()
        .into_iter()
        .all(|(a, m)| m % 2 == 0 || odd_inverse(a))
}

pub fn is_strongly_balanced(alphas: &AlphaSeq) -> bool {
    alphas.multiplicities().into_values().all(|m| m % 2 == 0)
}

fn odd_inverse(alpha: &Rational) -> bool {
    let inv = alpha.recip();
    inv.is_integer() && inv.to_integer().is_odd()
}

/// `α⁻¹ ∈ ℤ`: the reflection of `ν_α` is a translate of it.
fn reflection_is_translate(alpha: &Rational) -> bool {
    alpha.recip().is_integer()
}

/// Signs `a_i` and shifts of a standard extremal sequence, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SESelection {
    pub signs: Vec<i8>,
    pub shifts: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TseResult {
    pub value: Rational,
    pub argmax: SESelection,
}

fn signed_nu(alpha: &Rational, sign: i8) -> IntDist {
    let d = nu(alpha).expect("validated alpha");
    if sign < 0 {
        d.negate()
    } else {
        d
    }
}

/// `t_SE`: the best concentration over sign choices `±ν_{α_i}`. Indices with
/// `α⁻¹ ∈ ℤ` keep sign `+1`; ties go to the lexicographically smallest signs.
pub fn tse(alphas: &AlphaSeq) -> TseResult {
    let free: Vec<usize> = (0..alphas.len())
        .filter(|&i| !reflection_is_translate(&alphas.alphas[i]))
        .collect();
    let fixed = IntDist::convolve_all(
        std::iter::once(IntDist::point(0))
            .chain(
                (0..alphas.len())
                    .filter(|i| !free.contains(i))
                    .map(|i| nu(&alphas.alphas[i]).expect("validated alpha")),
            )
            .collect::<Vec<_>>()
            .iter(),
    );
    let nfree = free.len();
    assert!(nfree < 63, "too many free signs");
    let signs_of = |mask: u64| -> Vec<i8> {
        let mut s = vec![1i8; alphas.len()];
        for (b, &i) in free.iter().enumerate() {
            if mask >> (nfree - 1 - b) & 1 == 0 {
                s[i] = -1;
            }
        }
        s
    };
    let best = (0..1u64 << nfree)
        .into_par_iter()
        .map(|mask| {
            let signs = signs_of(mask);
            let sum = free.iter().fold(fixed.clone(), |acc, &i| {
                acc.convolve(&signed_nu(&alphas.alphas[i], signs[i]))
            });
            (sum.q_max(), mask)
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one assignment");
    TseResult {
        value: best.0,
        argmax: SESelection {
            signs: signs_of(best.1),
            shifts: vec![0; alphas.len()],
        },
    }
}

/// A balanced standard extremal sequence: equal α's paired as `(ν_α, −ν_α)`
/// and odd-inverse singletons centered.
pub fn balanced_sequence(alphas: &AlphaSeq) -> Result<Vec<IntDist>> {
    balanced_sequence_with(alphas, false)
}

fn centered_nu(alpha: &Rational) -> IntDist {
    let k = floor_inv(alpha);
    IntDist::uniform_range(-(k - 1) / 2, (k - 1) / 2)
}

fn balanced_sequence_with(alphas: &AlphaSeq, center_odd: bool) -> Result<Vec<IntDist>> {
    if !is_balanced(alphas) {
        return Err(Error::Precondition("alpha sequence is not balanced".into()));
    }
    let mut out = Vec::with_capacity(alphas.len());
    for (a, m) in alphas.multiplicities() {
        if center_odd && odd_inverse(a) {
            out.extend(std::iter::repeat_with(|| centered_nu(a)).take(m));
            continue;
        }
        let base = nu(a)?;
        for _ in 0..m / 2 {
            out.push(base.clone());
            out.push(base.negate());
        }
        if m % 2 == 1 {
            out.push(centered_nu(a));
        }
    }
    Ok(out)
}

/// `t_SE^bal = P(ΣX_i = 0)` for a balanced standard extremal sequence.
///
/// When an odd-inverse α repeats, a second balanced sequence (all such
/// summands centered) is evaluated and must agree.
pub fn tsebal(alphas: &AlphaSeq) -> Result<Rational> {
    let seq = balanced_sequence_with(alphas, false)?;
    let sum = IntDist::convolve_all(&seq);
    let value = sum.mass_at(0);
    if value != sum.q_max() {
        return Err(Error::Invariant("balanced sum is not maximal at 0".into()));
    }
    let repeated_odd = alphas
        .multiplicities()
        .into_iter()
        .any(|(a, m)| m >= 2 && odd_inverse(a));
    if repeated_odd {
        let alt = IntDist::convolve_all(&balanced_sequence_with(alphas, true)?).mass_at(0);
        if alt != value {
            return Err(Error::Invariant("balanced value depends on the pairing".into()));
        }
    }
    Ok(value)
}

/// Number of extremal measures for `α` supported in `window`.
pub fn extremal_count(alpha: &Rational, window: Window) -> u128 {
    let w = window.len() as u64;
    let k = floor_inv(alpha) as u64;
    if (w as usize) < support_size(alpha) {
        return 0;
    }
    let c = crate::rational::binomial(w, k);
    let c = if residual(alpha).is_positive() {
        c * BigInt::from(w - k)
    } else {
        c
    };
    c.to_u128().unwrap_or(u128::MAX)
}

/// Every extremal measure for `α` supported in `window`, in a fixed order:
/// α-sites lexicographic, then the residual site ascending.
pub fn extremal_enumerate(alpha: &Rational, window: Window) -> Result<Vec<IntDist>> {
    check_alpha(alpha)?;
    let need = support_size(alpha);
    if window.len() < need {
        return Err(Error::Precondition(format!(
            "window {window} has {} sites, alpha {alpha} needs {need}",
            window.len()
        )));
    }
    let k = floor_inv(alpha) as usize;
    let r = residual(alpha);
    let sites: Vec<i64> = window.sites().collect();
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = (0..k).collect();
    loop {
        let set: Vec<i64> = chosen.iter().map(|&i| sites[i]).collect();
        let mut atoms: Vec<(i64, Rational)> = set.iter().map(|&s| (s, alpha.clone())).collect();
        if r.is_positive() {
            for &b in sites.iter().filter(|s| !set.contains(s)) {
                let mut a = atoms.clone();
                a.push((b, r.clone()));
                a.sort_by_key(|(s, _)| *s);
                out.push(IntDist::from_sorted_unchecked(a));
            }
        } else {
            out.push(IntDist::from_sorted_unchecked(std::mem::take(&mut atoms)));
        }
        if !next_combination(&mut chosen, sites.len()) {
            break;
        }
    }
    Ok(out)
}

/// Advances a sorted `k`-subset of `0..n` to its lexicographic successor.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub value: Rational,
    pub witness: Vec<IntDist>,
    pub tuples: u128,
}

/// Best `Q(Σ X_i)` over all tuples of extremal measures supported in
/// `window`, exact relative to the window. Ties go to the lexicographically
/// smallest tuple of enumeration indices.
pub fn t_oracle(alphas: &AlphaSeq, window: Window, budget: u64) -> Result<OracleResult> {
    let tuples = alphas
        .alphas
        .iter()
        .map(|a| extremal_count(a, window))
        .try_fold(1u128, |acc, c| acc.checked_mul(c))
        .unwrap_or(u128::MAX);
    if tuples > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: tuples,
            budget,
        });
    }
    let lists: Vec<Vec<IntDist>> = alphas
        .alphas
        .iter()
        .map(|a| extremal_enumerate(a, window))
        .collect::<Result<_>>()?;
    let best = (0..lists[0].len())
        .into_par_iter()
        .map(|i0| {
            let mut idx = vec![i0];
            let mut best: Option<(Rational, Vec<usize>)> = None;
            oracle_dfs(&lists, &lists[0][i0], &mut idx, &mut best);
            best.expect("nonempty lists")
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("nonempty lists");
    Ok(OracleResult {
        value: best.0,
        witness: best
            .1
            .iter()
            .enumerate()
            .map(|(i, &j)| lists[i][j].clone())
            .collect(),
        tuples,
    })
}

fn oracle_dfs(
    lists: &[Vec<IntDist>],
    prefix: &IntDist,
    idx: &mut Vec<usize>,
    best: &mut Option<(Rational, Vec<usize>)>,
) {
    let depth = idx.len();
    if depth == lists.len() {
        let q = prefix.q_max();
        if best.as_ref().is_none_or(|(b, _)| q > *b) {
            *best = Some((q, idx.clone()));
        }
        return;
    }
    for (j, d) in lists[depth].iter().enumerate() {
        idx.push(j);
        oracle_dfs(lists, &prefix.convolve(d), idx, best);
        idx.pop();
    }
}
