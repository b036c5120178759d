//! Exact checkers for the individual inequalities, a brute-force scan of the
//! concentration conjecture, and seeded instance generators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::dist::{IntDist, SpanResult};
use crate::domination::{dominates, q_profile};
use crate::error::{Error, Result};
use crate::extremal::{
    balanced_sequence, extremal_enumerate, is_balanced, is_strongly_balanced, nu, support_size, t_oracle,
    tse, tsebal, AlphaSeq, Window,
};
use crate::interval::{rational_pow, Certainty, Interval};
use crate::rational::{fmt_rational, int, Rational};
use crate::rearrange::sym_rearrange;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
    Indeterminate,
}

/// An exact rational or an enclosing interval.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(Rational),
    Approx(Interval),
}

impl Num {
    fn interval(&self) -> Interval {
        match self {
            Num::Exact(x) => Interval::from_rational(x),
            Num::Approx(iv) => *iv,
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Approx {
            value: f64,
            err: f64,
        }
        match self {
            Num::Exact(x) => s.serialize_str(&fmt_rational(x)),
            Num::Approx(iv) => Approx {
                value: iv.mid(),
                err: (iv.hi - iv.lo) / 2.0,
            }
            .serialize(s),
        }
    }
}

/// Outcome of one checker on one instance; `holds` is `pass` iff
/// `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub holds: Outcome,
    pub lhs: Option<Num>,
    pub rhs: Option<Num>,
    pub margin: Option<Num>,
    pub preconditions_ok: bool,
    pub instance_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// SHA-256 of the canonical JSON form.
pub fn instance_digest<T: Serialize>(instance: &T) -> String {
    let bytes = serde_json::to_vec(instance).expect("serializable");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Ctx {
    name: &'static str,
    digest: String,
}

impl Ctx {
    fn new<T: Serialize>(name: &'static str, inst: &T) -> Self {
        Ctx {
            name,
            digest: instance_digest(inst),
        }
    }

    fn report(&self, holds: Outcome, lhs: Option<Num>, rhs: Option<Num>, margin: Option<Num>, note: Option<String>) -> CheckReport {
        CheckReport {
            name: self.name.to_string(),
            holds,
            lhs,
            rhs,
            margin,
            preconditions_ok: holds != Outcome::NotApplicable,
            instance_digest: self.digest.clone(),
            note,
        }
    }

    fn not_applicable(&self, why: impl Into<String>) -> CheckReport {
        self.report(Outcome::NotApplicable, None, None, None, Some(why.into()))
    }

    fn exact(&self, lhs: Rational, rhs: Rational) -> CheckReport {
        let holds = if lhs <= rhs { Outcome::Pass } else { Outcome::Fail };
        let margin = &rhs - &lhs;
        self.report(holds, Some(Num::Exact(lhs)), Some(Num::Exact(rhs)), Some(Num::Exact(margin)), None)
    }

    fn approx(&self, lhs: Num, rhs: Num) -> CheckReport {
        let (l, r) = (lhs.interval(), rhs.interval());
        let holds = match l.le(r) {
            Certainty::True => Outcome::Pass,
            Certainty::False => Outcome::Fail,
            Certainty::Indeterminate => Outcome::Indeterminate,
        };
        self.report(holds, Some(lhs), Some(rhs), Some(Num::Approx(r - l)), None)
    }

    fn with_note(mut r: CheckReport, note: String) -> CheckReport {
        r.note = Some(note);
        r
    }
}

/// `value ≥ threshold` for every real in the threshold's enclosure.
fn certainly_ge(value: &Rational, threshold: Interval) -> bool {
    threshold.le(Interval::from_rational(value)) == Certainty::True
}

fn iv(x: &Rational) -> Interval {
    Interval::from_rational(x)
}

fn sum_dists<'a, I: IntoIterator<Item = &'a IntDist>>(ds: I) -> IntDist {
    ds.into_iter().fold(IntDist::point(0), |acc, d| acc.convolve(d))
}

/// The index `j` minimizing `(1+ε)Q_j(b) − Q_j(a)`, smallest on ties.
fn tightest_domination(a: &IntDist, b: &IntDist, eps: &Rational) -> (usize, Rational, Rational) {
    let (pa, pb) = (q_profile(a), q_profile(b));
    let factor = Rational::one() + eps;
    (1..=pa.len().max(pb.len()))
        .map(|j| (j, pa.get(j), &factor * pb.get(j)))
        .min_by(|x, y| (&x.2 - &x.1).cmp(&(&y.2 - &y.1)).then(x.0.cmp(&y.0)))
        .expect("nonempty")
}

mod window_str {
    use super::Window;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Window, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&w.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Window, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn default_budget() -> u64 {
    crate::lattice_gap::DEFAULT_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThmTseInstance {
    #[serde(with = "crate::rational::serde_vec")]
    pub alphas: Vec<Rational>,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: Rational,
    #[serde(with = "window_str")]
    pub window: Window,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

/// `t_oracle(α) ≤ (1+δ)·t_SE(α)` on the window.
pub fn thm_tse_check(inst: &ThmTseInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("thm_tse", inst);
    if inst.delta.is_negative() {
        return Ok(ctx.not_applicable("delta must be nonnegative"));
    }
    let alphas = AlphaSeq::new(inst.alphas.clone())?;
    let oracle = t_oracle(&alphas, inst.window, inst.budget)?;
    let rhs = (Rational::one() + &inst.delta) * tse(&alphas).value;
    Ok(ctx.exact(oracle.value, rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogconcmodeInstance {
    pub mu: IntDist,
    pub i: u64,
    /// `None` selects `γ = 1 − (4p₀/Var)^{1/3} i`.
    #[serde(default, with = "crate::rational::serde_opt")]
    pub gamma: Option<Rational>,
}

/// For every mode `x₀`: `max(P(x₀−i), P(x₀+i)) ≥ γ·P(x₀)`.
pub fn logconcmode_check(inst: &LogconcmodeInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("logconcmode", inst);
    let mu = &inst.mu;
    if !mu.is_log_concave() {
        return Ok(ctx.not_applicable("distribution is not log-concave"));
    }
    if inst.i == 0 {
        return Ok(ctx.not_applicable("i must be positive"));
    }
    let p0 = mu.q_max();
    let var = mu.variance();
    let i = int(inst.i as i64);
    let worst = mu
        .modes()
        .into_iter()
        .map(|x0| {
            let d = inst.i as i64;
            mu.mass_at(x0 - d).max(mu.mass_at(x0 + d))
        })
        .min()
        .expect("at least one mode");
    match &inst.gamma {
        Some(g) => {
            if g.is_negative() || *g >= Rational::one() {
                return Ok(ctx.not_applicable("gamma outside [0,1)"));
            }
            let one_minus = Rational::one() - g;
            let need = int(2) * (g + Rational::one()) * &i * &i * &i * &p0
                / (&one_minus * &one_minus * &one_minus);
            if var < need {
                return Ok(ctx.not_applicable(format!(
                    "variance {} below {}",
                    fmt_rational(&var),
                    fmt_rational(&need)
                )));
            }
            Ok(ctx.exact(g * &p0, worst))
        }
        None => {
            if var.is_zero() {
                return Ok(ctx.not_applicable("zero variance"));
            }
            let root = rational_pow(&(int(4) * &p0 / &var), 1, 3);
            let gamma = Interval::point(1.0) - root * iv(&i);
            if gamma.lo < 0.0 {
                return Ok(ctx.not_applicable("explicit gamma is not certainly in [0,1)"));
            }
            let one_minus = Interval::point(1.0) - gamma;
            let need = Interval::point(2.0) * (gamma + Interval::point(1.0)) * iv(&(&i * &i * &i * &p0))
                / (one_minus * one_minus * one_minus);
            if !certainly_ge(&var, need) {
                return Ok(ctx.not_applicable("variance precondition not certain"));
            }
            Ok(ctx.approx(Num::Approx(gamma * iv(&p0)), Num::Exact(worst)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogconcdominationInstance {
    pub x: IntDist,
    pub y: IntDist,
    #[serde(with = "crate::rational::serde_str")]
    pub eps: Rational,
}

/// `Var Y ≤ ε Var X` ⇒ `Q(X+Y) ≥ (1 − 3·2^{4/9}ε^{1/3}) Q(X)`.
pub fn logconcdomination_check(inst: &LogconcdominationInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("logconcdomination", inst);
    if !inst.eps.is_positive() {
        return Ok(ctx.not_applicable("eps must be positive"));
    }
    if !inst.x.is_log_concave() {
        return Ok(ctx.not_applicable("X is not log-concave"));
    }
    if inst.y.variance() > &inst.eps * inst.x.variance() {
        return Ok(ctx.not_applicable("Var Y exceeds eps Var X"));
    }
    let factor =
        Interval::point(1.0) - Interval::point(3.0) * rational_pow(&int(2), 4, 9) * rational_pow(&inst.eps, 1, 3);
    let lhs = factor * iv(&inst.x.q_max());
    Ok(ctx.approx(Num::Approx(lhs), Num::Exact(inst.x.convolve(&inst.y).q_max())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewDroppedInstance {
    #[serde(with = "crate::rational::serde_vec")]
    pub alphas: Vec<Rational>,
    /// Reflection of each `ν_{α_i}`; all `+1` when absent.
    #[serde(default)]
    pub signs: Option<Vec<i8>>,
    pub k: usize,
    #[serde(rename = "K")]
    pub big_k: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: Rational,
}

/// `Var S_n ≥ 70kK²/δ³` ⇒ `Q(Y_1+…+Y_n) ≥ (1−δ) Q(Y_{k+1}+…+Y_n)`.
pub fn few_dropped_check(inst: &FewDroppedInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("few_dropped", inst);
    let n = inst.alphas.len();
    if n == 0 || inst.k > n {
        return Ok(ctx.not_applicable("need 0 ≤ k ≤ n and n ≥ 1"));
    }
    if inst.big_k == 0 {
        return Ok(ctx.not_applicable("K must be positive"));
    }
    if !inst.delta.is_positive() || inst.delta >= Rational::one() {
        return Ok(ctx.not_applicable("delta outside (0,1)"));
    }
    let signs = inst.signs.clone().unwrap_or_else(|| vec![1; n]);
    if signs.len() != n || signs.iter().any(|s| s.abs() != 1) {
        return Ok(ctx.not_applicable("signs must be ±1, one per alpha"));
    }
    let big_k = int(inst.big_k as i64);
    if inst.alphas[..inst.k].iter().any(|a| *a < big_k.recip()) {
        return Ok(ctx.not_applicable("alpha_i < 1/K for some i ≤ k"));
    }
    let ys: Vec<IntDist> = inst
        .alphas
        .iter()
        .zip(&signs)
        .map(|(a, &s)| nu(a).map(|d| if s < 0 { d.negate() } else { d }))
        .collect::<Result<_>>()?;
    let total = sum_dists(&ys);
    let threshold = int(70) * int(inst.k as i64) * &big_k * &big_k / (&inst.delta * &inst.delta * &inst.delta);
    if total.variance() < threshold {
        return Ok(ctx.not_applicable(format!(
            "Var S_n = {} below {}",
            fmt_rational(&total.variance()),
            fmt_rational(&threshold)
        )));
    }
    let tail = sum_dists(&ys[inst.k..]);
    Ok(ctx.exact((Rational::one() - &inst.delta) * tail.q_max(), total.q_max()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalancedContinuousInstance {
    #[serde(with = "crate::rational::serde_vec")]
    pub alphas: Vec<Rational>,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha_prime: Rational,
}

/// `t_bal(α…, α′, α′) ≤ (1 + 8αε) t_bal(α…, α, α)` with `α′ = (1+ε)α`.
pub fn balanced_continuous_check(inst: &BalancedContinuousInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("balanced_continuous", inst);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for a in [&inst.alpha, &inst.alpha_prime] {
        if *a < half || *a > Rational::one() {
            return Ok(ctx.not_applicable("alpha and alpha' must lie in [1/2, 1]"));
        }
    }
    if inst.alpha_prime <= inst.alpha {
        return Ok(ctx.not_applicable("need alpha' > alpha"));
    }
    if !inst.alphas.is_empty() && !is_balanced(&AlphaSeq::new(inst.alphas.clone())?) {
        return Ok(ctx.not_applicable("base sequence is not balanced"));
    }
    let eps = &inst.alpha_prime / &inst.alpha - Rational::one();
    let with = |a: &Rational| -> Result<Rational> {
        let mut v = inst.alphas.clone();
        v.extend([a.clone(), a.clone()]);
        tsebal(&AlphaSeq::new(v)?)
    };
    let lhs = with(&inst.alpha_prime)?;
    let rhs = (Rational::one() + int(8) * &inst.alpha * &eps) * with(&inst.alpha)?;
    Ok(ctx.exact(lhs, rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidsizeInstance {
    #[serde(with = "crate::rational::serde_vec")]
    pub alphas: Vec<Rational>,
    #[serde(with = "crate::rational::serde_vec")]
    pub alphas_prime: Vec<Rational>,
    #[serde(rename = "K")]
    pub big_k: u64,
    pub y: IntDist,
}

fn balanced_sum(alphas: &[Rational]) -> Result<IntDist> {
    Ok(sum_dists(&balanced_sequence(&AlphaSeq::new(alphas.to_vec())?)?))
}

/// `P(ΣX′_i + Y = 0) ≥ (1 − 39K^{−1/6}) P(ΣX_i + Y = 0)`.
pub fn midsize_continuity_check(inst: &MidsizeInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("midsize_continuity", inst);
    let m = inst.alphas.len();
    if m == 0 || inst.alphas_prime.len() != m {
        return Ok(ctx.not_applicable("need two nonempty sequences of equal length"));
    }
    if inst.big_k == 0 {
        return Ok(ctx.not_applicable("K must be positive"));
    }
    let (a, ap) = (AlphaSeq::new(inst.alphas.clone())?, AlphaSeq::new(inst.alphas_prime.clone())?);
    if !is_strongly_balanced(&a) || !is_strongly_balanced(&ap) {
        return Ok(ctx.not_applicable("sequences must be strongly balanced"));
    }
    if !(inst.y.is_symmetric() && inst.y.is_log_concave()) {
        return Ok(ctx.not_applicable("Y must be symmetric log-concave"));
    }
    let k = int(inst.big_k as i64);
    let k2 = &k * &k;
    for (x, xp) in inst.alphas.iter().zip(&inst.alphas_prime) {
        let t = x * &k2;
        if !t.is_integer() {
            return Ok(ctx.not_applicable("alpha_i is not of the form t/K²"));
        }
        let ok = k.recip() <= *xp
            && xp <= x
            && *x <= Rational::one() - k.recip()
            && *xp >= (&t - Rational::one()) / &k2;
        if !ok {
            return Ok(ctx.not_applicable("grid constraints on alpha_i, alpha'_i fail"));
        }
    }
    let base = balanced_sum(&inst.alphas)?.convolve(&inst.y).mass_at(0);
    let moved = balanced_sum(&inst.alphas_prime)?.convolve(&inst.y).mass_at(0);
    let factor = Interval::point(1.0) - Interval::point(39.0) * rational_pow(&k, -1, 6);
    Ok(ctx.approx(Num::Approx(factor * iv(&base)), Num::Exact(moved)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LargeContinuityInstance {
    pub ks: Vec<u64>,
    #[serde(rename = "K")]
    pub big_k: u64,
    pub y: IntDist,
}

/// `P(Y+ΣX_i = 0) ≥ P(Y+ΣX′_i = 0) ≥ (1 − 14K^{−1/5}) P(Y+ΣX_i = 0)`, `X_i`
/// uniform on `k_i` centred sites and `X′_i` on `k_i + 2`.
pub fn large_continuity_check(inst: &LargeContinuityInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("large_continuity", inst);
    if inst.ks.is_empty() || inst.big_k == 0 {
        return Ok(ctx.not_applicable("need n ≥ 1 and K ≥ 1"));
    }
    if inst.ks.iter().any(|&k| k % 2 == 0 || k < inst.big_k) {
        return Ok(ctx.not_applicable("every k_i must be odd and at least K"));
    }
    if !(inst.y.is_symmetric() && inst.y.is_log_concave()) {
        return Ok(ctx.not_applicable("Y must be symmetric log-concave"));
    }
    let centred = |k: u64| {
        let h = (k as i64 - 1) / 2;
        IntDist::uniform_range(-h, h)
    };
    let x = sum_dists(inst.ks.iter().map(|&k| centred(k)).collect::<Vec<_>>().iter()).convolve(&inst.y);
    let xp = sum_dists(inst.ks.iter().map(|&k| centred(k + 2)).collect::<Vec<_>>().iter()).convolve(&inst.y);
    let (p, pp) = (x.mass_at(0), xp.mass_at(0));
    if pp > p {
        return Ok(Ctx::with_note(ctx.exact(pp, p), "first inequality fails".into()));
    }
    let factor = Interval::point(1.0) - Interval::point(14.0) * rational_pow(&int(inst.big_k as i64), -1, 5);
    Ok(ctx.approx(Num::Approx(factor * iv(&p)), Num::Exact(pp)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Peakedness1Instance {
    pub x: IntDist,
    pub ys: Vec<IntDist>,
    pub z: IntDist,
    #[serde(with = "crate::rational::serde_str")]
    pub eps: Rational,
}

/// `X ≼_ε Z` and large variances ⇒ `X + ΣY_i ≼_{4ε} Z + ΣY_i*`.
pub fn peakedness1_check(inst: &Peakedness1Instance) -> Result<CheckReport> {
    let ctx = Ctx::new("peakedness1", inst);
    if !inst.eps.is_positive() || inst.eps >= Rational::one() {
        return Ok(ctx.not_applicable("eps outside (0,1)"));
    }
    let mut stars = Vec::with_capacity(inst.ys.len());
    for (i, y) in inst.ys.iter().enumerate() {
        match sym_rearrange(y) {
            Some(s) if s.is_log_concave() => stars.push(s),
            Some(_) => return Ok(ctx.not_applicable(format!("Y[{i}]* is not log-concave"))),
            None => return Ok(ctx.not_applicable(format!("Y[{i}] has no symmetric rearrangement"))),
        }
    }
    if !(inst.z.is_symmetric() && inst.z.is_log_concave()) {
        return Ok(ctx.not_applicable("Z must be symmetric log-concave"));
    }
    if !dominates(&inst.x, &inst.z, &inst.eps).holds {
        return Ok(ctx.not_applicable("X is not eps-dominated by Z"));
    }
    let star_sum = sum_dists(&stars);
    let min_var = inst.z.variance().min(star_sum.variance());
    let e4 = &inst.eps * &inst.eps * &inst.eps * &inst.eps;
    let threshold = Interval::point(65536.0) * rational_pow(&int(2), 2, 3) / iv(&e4);
    if !certainly_ge(&min_var, threshold) {
        return Ok(ctx.not_applicable("variance precondition fails"));
    }
    let left = sum_dists(&inst.ys).convolve(&inst.x);
    let right = star_sum.convolve(&inst.z);
    let (j, lhs, rhs) = tightest_domination(&left, &right, &(int(4) * &inst.eps));
    Ok(Ctx::with_note(ctx.exact(lhs, rhs), format!("tightest at j = {j}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Peakedness2Instance {
    pub x: IntDist,
    pub y: IntDist,
    pub x_prime: IntDist,
    pub y_prime: IntDist,
    #[serde(with = "crate::rational::serde_str")]
    pub eps: Rational,
}

/// `X ≼_ε X′`, `Y ≼_ε Y′`, `Var X′, Var Y′ ≥ 320·2^{1/3}/ε²` ⇒
/// `Q(X+Y) ≤ (1+20ε) Q(X′+Y′)`.
pub fn peakedness2_check(inst: &Peakedness2Instance) -> Result<CheckReport> {
    let ctx = Ctx::new("peakedness2", inst);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    if !inst.eps.is_positive() || inst.eps >= half {
        return Ok(ctx.not_applicable("eps outside (0,1/2)"));
    }
    for (name, d) in [("X'", &inst.x_prime), ("Y'", &inst.y_prime)] {
        if !(d.is_symmetric() && d.is_log_concave()) {
            return Ok(ctx.not_applicable(format!("{name} must be symmetric log-concave")));
        }
    }
    if !dominates(&inst.x, &inst.x_prime, &inst.eps).holds || !dominates(&inst.y, &inst.y_prime, &inst.eps).holds {
        return Ok(ctx.not_applicable("domination hypothesis fails"));
    }
    let v0 = Interval::point(320.0) * rational_pow(&int(2), 1, 3) / iv(&(&inst.eps * &inst.eps));
    if !certainly_ge(&inst.x_prime.variance(), v0) || !certainly_ge(&inst.y_prime.variance(), v0) {
        return Ok(ctx.not_applicable("variance below V0"));
    }
    let lhs = inst.x.convolve(&inst.y).q_max();
    let rhs = (Rational::one() + int(20) * &inst.eps) * inst.x_prime.convolve(&inst.y_prime).q_max();
    Ok(ctx.exact(lhs, rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdlyzkoRichmondInstance {
    pub p: IntDist,
    pub n: u32,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: Rational,
}

/// `a_k² ≥ a_{k−1}a_{k+1}` for `δn ≤ k ≤ (d−δ)n`, `a_k` the coefficients of
/// the `n`-fold convolution; reports the tightest `k` by ratio.
pub fn odlyzko_richmond_check(inst: &OdlyzkoRichmondInstance) -> Result<CheckReport> {
    let ctx = Ctx::new("odlyzko_richmond", inst);
    if inst.p.max_span() != SpanResult::Finite(1) {
        return Err(Error::Precondition("support must have span 1".into()));
    }
    if inst.n == 0 || inst.delta.is_negative() {
        return Err(Error::Precondition("need n ≥ 1 and delta ≥ 0".into()));
    }
    let p = inst.p.shift(-inst.p.min_site());
    let d = int(p.max_site());
    let s = p.pow_conv(inst.n);
    let n = int(inst.n as i64);
    let lo = (&inst.delta * &n).ceil().to_integer();
    let hi = ((&d - &inst.delta) * &n).floor().to_integer();
    let lo: i64 = lo.try_into().map_err(|_| Error::OutOfRange("window".into()))?;
    let hi: i64 = hi.try_into().map_err(|_| Error::OutOfRange("window".into()))?;
    let mut worst: Option<(i64, Rational, Rational)> = None;
    for k in lo..=hi {
        let lhs = s.mass_at(k - 1) * s.mass_at(k + 1);
        let rhs = s.mass_at(k) * s.mass_at(k);
        let tighter = match &worst {
            None => true,
            Some((_, wl, wr)) => {
                // rhs/lhs < wr/wl, with zero lhs ranking last
                if lhs.is_zero() {
                    false
                } else if wl.is_zero() {
                    true
                } else {
                    &rhs * wl < wr * &lhs
                }
            }
        };
        if tighter {
            worst = Some((k, lhs, rhs));
        }
    }
    let Some((k, lhs, rhs)) = worst else {
        return Ok(ctx.not_applicable("empty index window"));
    };
    Ok(Ctx::with_note(ctx.exact(lhs, rhs), format!("tightest at k = {k}, window {lo}..{hi}")))
}

pub const CHECK_NAMES: [&str; 10] = [
    "thm_tse",
    "logconcmode",
    "logconcdomination",
    "few_dropped",
    "balanced_continuous",
    "midsize_continuity",
    "large_continuity",
    "peakedness1",
    "peakedness2",
    "odlyzko_richmond",
];

/// Runs the named checker on a JSON instance.
pub fn run_check(name: &str, instance_json: &str) -> Result<CheckReport> {
    fn parse<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })
    }
    match name.trim_end_matches("_check") {
        "thm_tse" => thm_tse_check(&parse(instance_json)?),
        "logconcmode" => logconcmode_check(&parse(instance_json)?),
        "logconcdomination" => logconcdomination_check(&parse(instance_json)?),
        "few_dropped" => few_dropped_check(&parse(instance_json)?),
        "balanced_continuous" => balanced_continuous_check(&parse(instance_json)?),
        "midsize_continuity" => midsize_continuity_check(&parse(instance_json)?),
        "large_continuity" => large_continuity_check(&parse(instance_json)?),
        "peakedness1" => peakedness1_check(&parse(instance_json)?),
        "peakedness2" => peakedness2_check(&parse(instance_json)?),
        "odlyzko_richmond" => odlyzko_richmond_check(&parse(instance_json)?),
        other => Err(Error::Precondition(format!(
            "unknown check {other:?}; expected one of {}",
            CHECK_NAMES.join(", ")
        ))),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub pass: u64,
    pub fail: u64,
    #[serde(rename = "not-applicable")]
    pub not_applicable: u64,
    pub indeterminate: u64,
}

impl Counts {
    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Pass => self.pass += 1,
            Outcome::Fail => self.fail += 1,
            Outcome::NotApplicable => self.not_applicable += 1,
            Outcome::Indeterminate => self.indeterminate += 1,
        }
    }
}

/// Outcome counts per checker name.
pub fn summarize<'a, I: IntoIterator<Item = &'a CheckReport>>(reports: I) -> BTreeMap<String, Counts> {
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for r in reports {
        out.entry(r.name.clone()).or_default().add(r.holds);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub denominator: u64,
    #[serde(with = "window_str")]
    pub window: Window,
    pub n: usize,
    pub seed: u64,
    pub budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    Exhaustive,
    Sampled,
}

/// One scanned tuple: `lhs = Q(ΣX_i)`, `rhs = t_SE(α)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub index: u64,
    #[serde(with = "crate::rational::serde_vec")]
    pub alphas: Vec<Rational>,
    pub measures: Vec<IntDist>,
    #[serde(with = "crate::rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub rhs: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub margin: Rational,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub mode: ScanMode,
    pub config: ScanConfig,
    pub instances: u64,
    pub equalities: u64,
    pub violations: u64,
    pub statement: String,
}

fn scan_items(cfg: &ScanConfig) -> Result<Vec<(Rational, IntDist)>> {
    if cfg.budget == 0 {
        return Err(Error::Precondition("budget must be positive".into()));
    }
    if cfg.denominator < 2 || cfg.n == 0 {
        return Err(Error::Precondition("need D ≥ 2 and n ≥ 1".into()));
    }
    let mut alphas: Vec<Rational> = (1..cfg.denominator)
        .map(|j| Rational::new(BigInt::from(j), BigInt::from(cfg.denominator)))
        .collect();
    alphas.sort();
    alphas.dedup();
    let widest = alphas.iter().map(support_size).max().expect("D ≥ 2");
    if widest > cfg.window.len() {
        return Err(Error::Precondition(format!(
            "window {} holds {} sites but alpha = 1/{} needs {widest}",
            cfg.window,
            cfg.window.len(),
            cfg.denominator
        )));
    }
    let mut items = Vec::new();
    for a in alphas {
        for d in extremal_enumerate(&a, cfg.window)? {
            items.push((a.clone(), d));
        }
    }
    Ok(items)
}

fn multiset_count(items: u128, n: u128) -> u128 {
    // C(items + n − 1, n)
    (0..n).try_fold(1u128, |acc, i| acc.checked_mul(items + i).map(|v| v / (i + 1))).unwrap_or(u128::MAX)
}

fn multisets(items: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(items: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..items {
            cur.push(i);
            rec(items, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Compares `Q(ΣX_i)` with `t_SE(α)` over unordered tuples of extremal
/// measures with masses in `{j/D : 1 ≤ j < D}` and support in the window;
/// exhaustive when the tuple count fits the budget, seeded sampling otherwise.
pub fn conjecture_scan(cfg: &ScanConfig) -> Result<(Vec<ScanRecord>, ScanSummary)> {
    let items = scan_items(cfg)?;
    let total = multiset_count(items.len() as u128, cfg.n as u128);
    let (mode, tuples) = if total <= cfg.budget as u128 {
        (ScanMode::Exhaustive, multisets(items.len(), cfg.n))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let idx: Vec<usize> = (0..items.len()).collect();
        let tuples = (0..cfg.budget)
            .map(|_| {
                let mut t: Vec<usize> = (0..cfg.n).map(|_| *idx.choose(&mut rng).expect("items")).collect();
                t.sort_unstable();
                t
            })
            .collect();
        (ScanMode::Sampled, tuples)
    };
    let records: Vec<ScanRecord> = tuples
        .into_par_iter()
        .enumerate()
        .map(|(index, t)| {
            let alphas: Vec<Rational> = t.iter().map(|&i| items[i].0.clone()).collect();
            let measures: Vec<IntDist> = t.iter().map(|&i| items[i].1.clone()).collect();
            let lhs = IntDist::convolve_all(&measures).q_max();
            let rhs = tse(&AlphaSeq::new(alphas.clone()).expect("grid alphas")).value;
            ScanRecord {
                index: index as u64,
                alphas,
                measures,
                margin: &rhs - &lhs,
                violation: lhs > rhs,
                lhs,
                rhs,
            }
        })
        .collect();
    let violations = records.iter().filter(|r| r.violation).count() as u64;
    let summary = ScanSummary {
        mode,
        config: cfg.clone(),
        instances: records.len() as u64,
        equalities: records.iter().filter(|r| r.margin.is_zero()).count() as u64,
        violations,
        statement: if violations == 0 {
            "no counterexample in the scanned range; this is evidence, not a proof".into()
        } else {
            "COUNTEREXAMPLE FOUND: Q(sum) exceeds t_SE for at least one scanned tuple".into()
        },
    };
    Ok((records, summary))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    LogConcave,
    SharpLogConcave,
    SymUnimodalChain,
    AlphaGrid(u64),
    CouplingPair,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceKind::LogConcave => write!(f, "log-concave"),
            InstanceKind::SharpLogConcave => write!(f, "sharp-log-concave"),
            InstanceKind::SymUnimodalChain => write!(f, "sym-unimodal-chain"),
            InstanceKind::AlphaGrid(d) => write!(f, "alpha-grid:{d}"),
            InstanceKind::CouplingPair => write!(f, "coupling-pair"),
        }
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "log-concave" => InstanceKind::LogConcave,
            "sharp-log-concave" => InstanceKind::SharpLogConcave,
            "sym-unimodal-chain" => InstanceKind::SymUnimodalChain,
            "coupling-pair" => InstanceKind::CouplingPair,
            _ => {
                let d = s
                    .strip_prefix("alpha-grid:")
                    .and_then(|d| d.parse::<u64>().ok())
                    .filter(|&d| d >= 1)
                    .ok_or_else(|| Error::OutOfRange(format!("unknown instance kind {s:?}")))?;
                InstanceKind::AlphaGrid(d)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    LogConcave {
        mu: IntDist,
    },
    SharpLogConcave {
        summands: Vec<IntDist>,
    },
    SymUnimodalChain {
        /// `(μ′_i, μ_i)` with `μ′_i ≼ μ_i`.
        pairs: Vec<(IntDist, IntDist)>,
    },
    AlphaGrid {
        #[serde(with = "crate::rational::serde_vec")]
        alphas: Vec<Rational>,
    },
    CouplingPair {
        mu: IntDist,
        mu_prime: IntDist,
        #[serde(with = "crate::rational::serde_str")]
        eps: Rational,
    },
}

/// Log-concave weights from a nonincreasing sequence of successive ratios.
fn log_concave_weights(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
    let mut ratios: Vec<Rational> = (1..len)
        .map(|_| Rational::new(BigInt::from(rng.random_range(1..=6)), BigInt::from(rng.random_range(1..=3))))
        .collect();
    ratios.sort_by(|a, b| b.cmp(a));
    let mut w = vec![Rational::one()];
    for r in ratios {
        let next = w.last().expect("nonempty") * r;
        w.push(next);
    }
    let total: Rational = w.iter().sum();
    w.into_iter().map(|x| x / &total).collect()
}

fn random_log_concave(rng: &mut ChaCha8Rng) -> IntDist {
    let len = rng.random_range(1..=8);
    let start = rng.random_range(-3..=3);
    let w = log_concave_weights(rng, len);
    IntDist::new(w.into_iter().enumerate().map(|(i, m)| (start + i as i64, m)).collect()).expect("normalized")
}

fn random_sym_unimodal(rng: &mut ChaCha8Rng, max_half: i64) -> IntDist {
    let a = rng.random_range(0..=max_half);
    let mut w: Vec<u32> = (0..=a).map(|_| rng.random_range(1..=6)).collect();
    w.sort_by(|x, y| y.cmp(x));
    IntDist::from_weights((-a..=a).map(|s| (s, w[s.unsigned_abs() as usize]))).expect("positive weights")
}

/// Deterministic instance of the given kind.
pub fn random_instance(seed: u64, kind: InstanceKind) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        InstanceKind::LogConcave => Instance::LogConcave {
            mu: random_log_concave(&mut rng),
        },
        InstanceKind::SharpLogConcave => {
            let count = rng.random_range(1..=3);
            let summands = (0..count)
                .map(|_| {
                    let len = rng.random_range(1..=5);
                    let w = log_concave_weights(&mut rng, len);
                    let mut site = rng.random_range(-3..=3);
                    let mut atoms = Vec::with_capacity(len);
                    for m in w {
                        atoms.push((site, m));
                        site += rng.random_range(1..=3);
                    }
                    IntDist::new(atoms).expect("normalized")
                })
                .collect();
            Instance::SharpLogConcave { summands }
        }
        InstanceKind::SymUnimodalChain => {
            let count = rng.random_range(1..=3);
            let pairs = (0..count)
                .map(|_| {
                    let mu = random_sym_unimodal(&mut rng, 3);
                    let b = rng.random_range(0..=2);
                    (mu.convolve(&IntDist::uniform_range(-b, b)), mu)
                })
                .collect();
            Instance::SymUnimodalChain { pairs }
        }
        InstanceKind::AlphaGrid(d) => {
            let n = rng.random_range(1..=4);
            Instance::AlphaGrid {
                alphas: (0..n)
                    .map(|_| Rational::new(BigInt::from(rng.random_range(1..=d)), BigInt::from(d)))
                    .collect(),
            }
        }
        InstanceKind::CouplingPair => {
            let mu_prime = random_sym_unimodal(&mut rng, 3);
            let atoms = rng.random_range(1..=4);
            let mu = IntDist::from_weights((0..atoms).map(|_| (rng.random_range(-3i64..=3), rng.random_range(1u32..=4))))
                .expect("positive weights");
            let (pa, pb) = (q_profile(&mu), q_profile(&mu_prime));
            let need = (1..=pa.len().max(pb.len()))
                .map(|j| pa.get(j) / pb.get(j) - Rational::one())
                .max()
                .expect("nonempty")
                .max(Rational::zero());
            let slack = Rational::new(BigInt::from(rng.random_range(0..=2)), BigInt::from(4));
            Instance::CouplingPair {
                mu,
                mu_prime,
                eps: need + slack,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn d(atoms: &[(i64, i64, i64)]) -> IntDist {
        IntDist::new(atoms.iter().map(|&(s, n, m)| (s, q(n, m))).collect()).unwrap()
    }

    fn binomial(n: u32) -> IntDist {
        IntDist::uniform(&[0, 1]).unwrap().pow_conv(n)
    }

    #[test]
    fn thm_tse_examples() {
        let w = Window::new(0, 3).unwrap();
        let r = thm_tse_check(&ThmTseInstance { alphas: vec![q(1, 2), q(1, 2)], delta: int(0), window: w, budget: 1000 }).unwrap();
        assert_eq!(r.holds, Outcome::Pass);
        assert_eq!(r.margin, Some(Num::Exact(int(0))));
        let r = thm_tse_check(&ThmTseInstance { alphas: vec![q(2, 5)], delta: int(0), window: w, budget: 1000 }).unwrap();
        assert_eq!((r.holds, r.margin), (Outcome::Pass, Some(Num::Exact(int(0)))));
        let r = thm_tse_check(&ThmTseInstance { alphas: vec![q(3, 5), q(1, 3)], delta: int(5), window: w, budget: 1000 }).unwrap();
        assert_eq!(r.holds, Outcome::Pass);
    }

    #[test]
    fn logconcmode_examples() {
        let flat = IntDist::uniform_range(0, 99);
        let r = logconcmode_check(&LogconcmodeInstance { mu: flat.clone(), i: 3, gamma: Some(q(1, 2)) }).unwrap();
        assert_eq!(r.holds, Outcome::Pass);
        let r = logconcmode_check(&LogconcmodeInstance { mu: flat, i: 3, gamma: Some(int(0)) }).unwrap();
        assert_eq!(r.holds, Outcome::Pass);
        let r = logconcmode_check(&LogconcmodeInstance { mu: binomial(60), i: 2, gamma: None }).unwrap();
        assert_eq!(r.holds, Outcome::Pass, "{r:?}");
        let r = logconcmode_check(&LogconcmodeInstance { mu: d(&[(0, 1, 2), (2, 1, 2)]), i: 1, gamma: None }).unwrap();
        assert_eq!(r.holds, Outcome::NotApplicable);
        assert!(!r.preconditions_ok);
    }

    #[test]
    fn logconcdomination_examples() {
        for eps in [q(1, 1000), q(1, 2), int(3)] {
            let r = logconcdomination_check(&LogconcdominationInstance {
                x: binomial(20),
                y: IntDist::point(0),
                eps,
            })
            .unwrap();
            assert_eq!(r.holds, Outcome::Pass);
        }
        let r = logconcdomination_check(&LogconcdominationInstance {
            x: binomial(400),
            y: IntDist::uniform_range(-1, 1),
            eps: q(1, 100),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::Pass);
    }

    #[test]
    fn few_dropped_examples() {
        let r = few_dropped_check(&FewDroppedInstance {
            alphas: vec![q(1, 2), q(1, 3)],
            signs: None,
            k: 0,
            big_k: 2,
            delta: q(1, 2),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::Pass);
        let mut alphas = vec![q(1, 2)];
        alphas.extend(std::iter::repeat_n(q(1, 50), 11));
        let r = few_dropped_check(&FewDroppedInstance { alphas, signs: None, k: 1, big_k: 2, delta: q(1, 2) }).unwrap();
        assert_eq!(r.holds, Outcome::Pass, "{r:?}");
        let r = few_dropped_check(&FewDroppedInstance {
            alphas: vec![q(1, 2), q(1, 2)],
            signs: None,
            k: 1,
            big_k: 2,
            delta: q(1, 2),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::NotApplicable);
    }

    #[test]
    fn balanced_continuous_example() {
        let inst = BalancedContinuousInstance { alphas: vec![q(1, 2), q(1, 2)], alpha: q(1, 2), alpha_prime: q(3, 5) };
        let r = balanced_continuous_check(&inst).unwrap();
        let lhs = tsebal(&AlphaSeq::new(vec![q(1, 2), q(1, 2), q(3, 5), q(3, 5)]).unwrap()).unwrap();
        let base = tsebal(&AlphaSeq::new(vec![q(1, 2); 4]).unwrap()).unwrap();
        assert_eq!(r.lhs, Some(Num::Exact(lhs)));
        assert_eq!(r.rhs, Some(Num::Exact((int(1) + int(8) * q(1, 2) * q(1, 5)) * base)));
        assert_eq!(r.holds, Outcome::Pass);
    }

    #[test]
    fn continuity_examples() {
        let y = binomial(4).shift(-2);
        let r = midsize_continuity_check(&MidsizeInstance {
            alphas: vec![q(3, 16), q(3, 16)],
            alphas_prime: vec![q(1, 4), q(1, 4)],
            big_k: 4,
            y: y.clone(),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::NotApplicable);
        let r = midsize_continuity_check(&MidsizeInstance {
            alphas: vec![q(1, 2), q(1, 2)],
            alphas_prime: vec![q(15, 32), q(15, 32)],
            big_k: 4,
            y: y.clone(),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::Pass);
        let r = large_continuity_check(&LargeContinuityInstance { ks: vec![5, 7, 9], big_k: 5, y }).unwrap();
        assert_eq!(r.holds, Outcome::Pass);
    }

    #[test]
    fn peakedness_examples() {
        let z = IntDist::uniform_range(-600, 600);
        let r = peakedness1_check(&Peakedness1Instance {
            x: z.shift(3),
            ys: vec![IntDist::uniform_range(0, 1200)],
            z,
            eps: q(99, 100),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::Pass, "{r:?}");
        let xp = IntDist::uniform_range(-90, 90);
        let r = peakedness2_check(&Peakedness2Instance {
            x: IntDist::uniform_range(0, 179),
            y: xp.clone(),
            x_prime: xp.clone(),
            y_prime: xp.clone(),
            eps: q(2, 5),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::Pass, "{r:?}");
        let r = peakedness2_check(&Peakedness2Instance {
            x: xp.clone(),
            y: xp.clone(),
            x_prime: IntDist::uniform_range(-2, 2),
            y_prime: xp,
            eps: q(2, 5),
        })
        .unwrap();
        assert_eq!(r.holds, Outcome::NotApplicable);
    }

    #[test]
    fn odlyzko_richmond_examples() {
        for (p, n, delta) in [
            (IntDist::uniform_range(0, 2), 20, q(1, 10)),
            (IntDist::uniform(&[0, 1, 3]).unwrap(), 60, q(3, 10)),
            (IntDist::uniform(&[0, 1]).unwrap(), 10, q(1, 5)),
        ] {
            let r = odlyzko_richmond_check(&OdlyzkoRichmondInstance { p, n, delta }).unwrap();
            assert_eq!(r.holds, Outcome::Pass, "{r:?}");
        }
        assert!(odlyzko_richmond_check(&OdlyzkoRichmondInstance {
            p: IntDist::uniform(&[0, 2]).unwrap(),
            n: 3,
            delta: q(1, 5),
        })
        .is_err());
    }

    #[test]
    fn dispatch_and_digest() {
        let json = r#"{"alphas":["1/2","1/3"],"k":0,"K":2,"delta":"1/2"}"#;
        let a = run_check("few_dropped", json).unwrap();
        let b = run_check("few_dropped_check", json).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.holds, Outcome::Pass);
        assert_eq!(a.instance_digest.len(), 64);
        assert!(run_check("nope", json).is_err());
        assert!(matches!(run_check("few_dropped", "{\"k\": }"), Err(Error::Parse { .. })));
        let s = summarize([&a, &b]);
        assert_eq!(s["few_dropped"].pass, 2);
    }

    #[test]
    fn scan_examples() {
        let cfg = ScanConfig { denominator: 2, window: Window::new(0, 1).unwrap(), n: 2, seed: 0, budget: 100 };
        let (recs, summary) = conjecture_scan(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!((recs[0].lhs.clone(), recs[0].rhs.clone()), (q(1, 2), q(1, 2)));
        assert_eq!((summary.mode, summary.violations), (ScanMode::Exhaustive, 0));
        let cfg = ScanConfig { denominator: 4, window: Window::new(0, 3).unwrap(), n: 1, seed: 0, budget: 1000 };
        let (recs, _) = conjecture_scan(&cfg).unwrap();
        assert_eq!(recs.len(), 19);
        assert!(recs.iter().all(|r| r.margin.is_zero()));
        let sampled = ScanConfig { budget: 50, n: 3, ..cfg.clone() };
        let (a, s) = conjecture_scan(&sampled).unwrap();
        assert_eq!((s.mode, a.len()), (ScanMode::Sampled, 50));
        let (b, _) = conjecture_scan(&sampled).unwrap();
        assert_eq!(a, b);
        let bad = ScanConfig { denominator: 5, ..cfg };
        assert!(conjecture_scan(&bad).is_err());
    }

    #[test]
    fn instance_kinds_parse() {
        for k in ["log-concave", "sharp-log-concave", "sym-unimodal-chain", "alpha-grid:7", "coupling-pair"] {
            assert_eq!(k.parse::<InstanceKind>().unwrap().to_string(), k);
        }
        assert!("alpha-grid:0".parse::<InstanceKind>().is_err());
    }

    proptest! {
        #[test]
        fn generators_are_deterministic_and_admissible(seed in any::<u64>()) {
            for kind in [InstanceKind::LogConcave, InstanceKind::SharpLogConcave, InstanceKind::SymUnimodalChain,
                         InstanceKind::AlphaGrid(6), InstanceKind::CouplingPair] {
                let a = random_instance(seed, kind);
                prop_assert_eq!(&a, &random_instance(seed, kind));
                match a {
                    Instance::LogConcave { mu } => prop_assert!(mu.is_log_concave()),
                    Instance::SharpLogConcave { summands } => prop_assert!(summands.iter().all(IntDist::is_sharp_log_concave)),
                    Instance::SymUnimodalChain { pairs } => {
                        for (lo, hi) in &pairs {
                            prop_assert!(lo.is_symmetric() && lo.is_unimodal() && hi.is_symmetric() && hi.is_unimodal());
                            prop_assert!(dominates(lo, hi, &int(0)).holds);
                        }
                    }
                    Instance::AlphaGrid { alphas } => prop_assert!(alphas.iter().all(|a| (a * int(6)).is_integer() && a.is_positive() && *a <= int(1))),
                    Instance::CouplingPair { mu, mu_prime, eps } => {
                        prop_assert!(mu_prime.is_symmetric() && mu_prime.is_unimodal());
                        prop_assert!(dominates(&mu, &mu_prime, &eps).holds);
                    }
                }
            }
        }

        #[test]
        fn reports_are_deterministic(seed in any::<u64>()) {
            let Instance::LogConcave { mu } = random_instance(seed, InstanceKind::LogConcave) else { unreachable!() };
            let inst = LogconcmodeInstance { mu, i: 1, gamma: Some(q(1, 3)) };
            prop_assert_eq!(logconcmode_check(&inst).unwrap().to_json(), logconcmode_check(&inst).unwrap().to_json());
        }
    }
}
