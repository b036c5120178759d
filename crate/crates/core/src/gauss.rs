//! Discretized Gaussians on `ℤ^d`, total variation against lattice sums, the
//! computable terms of the local limit bound, and a few matrix and tail
//! utilities.

use nalgebra::{DMatrix, DVector};
use num::bigint::BigInt;
use num::traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::dist::IntDist;
use crate::error::{Error, Result};
use crate::lattice::{tv_exact, LatticeDist, Point};
use crate::rational::{to_f64, Rational};

/// Default Berry–Esseen constant.
pub const C_BE: f64 = 0.56;
const MC_CHUNK: u64 = 1 << 16;
const MAX_CELLS: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussSpec {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl GaussSpec {
    pub fn new(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let spec = GaussSpec { mean, covariance };
        spec.cholesky()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Lower-triangular `L` with `LLᵀ = Σ`.
    fn cholesky(&self) -> Result<DMatrix<f64>> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Precondition("empty mean".into()));
        }
        if self.covariance.len() != d || self.covariance.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(d, self.covariance.len()));
        }
        let m = matrix(&self.covariance);
        let sym_tol = 1e-12 * m.amax().max(1.0);
        if (&m - m.transpose()).amax() > sym_tol {
            return Err(Error::Precondition("covariance is not symmetric".into()));
        }
        if !self.mean.iter().chain(m.iter()).all(|v| v.is_finite()) {
            return Err(Error::Numerical("non-finite parameter".into()));
        }
        if sym_eigenvalues(&m)[0] <= 0.0 {
            return Err(Error::Precondition("covariance is not positive definite".into()));
        }
        nalgebra::Cholesky::new(m)
            .map(|c| c.l())
            .ok_or_else(|| Error::Precondition("covariance is not positive definite".into()))
    }

    /// Mean and covariance of a lattice law.
    pub fn fit(s: &LatticeDist) -> Result<Self> {
        let mean = s.mean().iter().map(to_f64).collect();
        let cov: Vec<Vec<f64>> = s
            .covariance()
            .iter()
            .map(|r| r.iter().map(to_f64).collect())
            .collect();
        if exact_det(&s.covariance()).is_zero() {
            return Err(Error::Precondition("degenerate covariance".into()));
        }
        Self::new(mean, cov)
    }
}

fn matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.first().map(Vec::len).unwrap_or(0), |i, j| rows[i][j])
}

/// Eigenvalues of a symmetric matrix, ascending: closed forms through the
/// characteristic polynomial for `n ≤ 3`, a symmetric QR solver otherwise.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut ev = match n {
        0 => vec![],
        1 => vec![m[(0, 0)]],
        2 => {
            let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let tr = a + d;
            let det = a * d - b * b;
            let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
            let hi = (tr + disc) / 2.0;
            let lo = if hi != 0.0 { det / hi } else { (tr - disc) / 2.0 };
            vec![lo, hi]
        }
        3 => {
            let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
            if p1 == 0.0 {
                vec![m[(0, 0)], m[(1, 1)], m[(2, 2)]]
            } else {
                let q = m.trace() / 3.0;
                let p2 = (0..3).map(|i| (m[(i, i)] - q).powi(2)).sum::<f64>() + 2.0 * p1;
                let p = (p2 / 6.0).sqrt();
                let b = (m - DMatrix::identity(3, 3) * q) / p;
                let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
                let phi = r.acos() / 3.0;
                let e1 = q + 2.0 * p * phi.cos();
                let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
                vec![e1, 3.0 * q - e1 - e3, e3]
            }
        }
        _ => m.clone().symmetric_eigenvalues().iter().copied().collect(),
    };
    ev.sort_by(f64::total_cmp);
    ev
}

/// `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Φ(b) − Φ(a)` without cancellation in the tails.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (erfc(a / std::f64::consts::SQRT_2) - erfc(b / std::f64::consts::SQRT_2))
    } else if b <= 0.0 {
        0.5 * (erfc(-b / std::f64::consts::SQRT_2) - erfc(-a / std::f64::consts::SQRT_2))
    } else {
        1.0 - normal_cdf(a) - (1.0 - normal_cdf(b))
    }
    .max(0.0)
}

/// Adaptive Simpson; returns the value and the accumulated error estimate.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return (left + right + delta / 15.0, delta.abs() / 15.0);
        }
        let (l, el) = rec(f, (a, fa), (lm, flm), (m, fm), left, tol / 2.0, depth - 1);
        let (r, er) = rec(f, (m, fm), (rm, frm), (b, fb), right, tol / 2.0, depth - 1);
        (l + r, el + er)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, (a, fa), (m, fm), (b, fb), whole, tol, 40)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellMethod {
    Erfc,
    Quadrature,
    MonteCarlo,
}

/// `P(⌊X⌉ = x)` over an integer box.
#[derive(Clone, Debug, Serialize)]
pub struct GaussCells {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub cells: Vec<(Point, f64)>,
    /// Absolute error bound per cell (a confidence half-width for Monte Carlo).
    pub cell_err: f64,
    /// Upper bound on the mass outside the box.
    pub tail_bound: f64,
    pub method: CellMethod,
    pub samples: Option<u64>,
}

impl GaussCells {
    pub fn get(&self, x: &[i64]) -> f64 {
        let mut idx = 0usize;
        for ((&xi, &lo), &hi) in x.iter().zip(&self.lo).zip(&self.hi) {
            if xi < lo || xi > hi {
                return 0.0;
            }
            idx = idx * (hi - lo + 1) as usize + (xi - lo) as usize;
        }
        self.cells[idx].1
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.1).sum()
    }
}

fn box_points(lo: &[i64], hi: &[i64]) -> Result<Vec<Point>> {
    if lo.len() != hi.len() {
        return Err(Error::DimensionMismatch(lo.len(), hi.len()));
    }
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return Err(Error::Precondition("empty box".into()));
    }
    let size = lo
        .iter()
        .zip(hi)
        .try_fold(1u128, |acc, (a, b)| acc.checked_mul((b - a + 1) as u128))
        .unwrap_or(u128::MAX);
    if size > MAX_CELLS {
        return Err(Error::BudgetExceeded {
            needed: size,
            budget: MAX_CELLS as u64,
        });
    }
    let mut pts: Vec<Point> = vec![vec![]];
    for (a, b) in lo.iter().zip(hi) {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (*a..=*b).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(pts)
}

/// Runs `f` over fixed chunks of `n` draws; chunk `c` uses stream `c` of
/// `seed`, so the result does not depend on the thread count.
fn mc_chunks<T: Send, F: Fn(&mut ChaCha8Rng, u64) -> T + Sync>(n: u64, seed: u64, f: F) -> Vec<T> {
    let chunks = n.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            f(&mut rng, MC_CHUNK.min(n - c * MC_CHUNK))
        })
        .collect()
}

fn sample(l: &DMatrix<f64>, mean: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = mean.len();
    let z = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
    let x = l * z;
    (0..d).map(|i| x[i] + mean[i]).collect()
}

/// Upper bound on `P(⌊X⌉ ∉ box)` from the distance of the mean to the box
/// boundary, via the normal length tail or Chebyshev, whichever applies.
fn box_tail_bound(spec: &GaussSpec, lo: &[i64], hi: &[i64]) -> f64 {
    let r = spec
        .mean
        .iter()
        .enumerate()
        .map(|(i, m)| (m - (lo[i] as f64 - 0.5)).min(hi[i] as f64 + 0.5 - m))
        .fold(f64::INFINITY, f64::min);
    if r <= 0.0 {
        return 1.0;
    }
    let t = r * r;
    let cov = matrix(&spec.covariance);
    let chebyshev = (cov.trace() / t).min(1.0);
    match gaussian_tail_bound(&spec.covariance, t) {
        Ok(b) => b.min(chebyshev),
        Err(_) => chebyshev,
    }
}

/// Cell probabilities of `⌊X⌉` on the box `lo..=hi`, each within `tol`.
pub fn discretized_gaussian(spec: &GaussSpec, lo: &[i64], hi: &[i64], tol: f64, seed: u64) -> Result<GaussCells> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange("tolerance must be positive".into()));
    }
    let d = spec.dim();
    if lo.len() != d {
        return Err(Error::DimensionMismatch(d, lo.len()));
    }
    let l = spec.cholesky()?;
    let pts = box_points(lo, hi)?;
    let tail_bound = box_tail_bound(spec, lo, hi);
    let (cells, cell_err, method, samples) = match d {
        1 => {
            let (mu, s) = (spec.mean[0], l[(0, 0)]);
            let cells = pts
                .into_par_iter()
                .map(|p| {
                    let x = p[0] as f64;
                    let v = normal_mass((x - 0.5 - mu) / s, (x + 0.5 - mu) / s);
                    (p, v)
                })
                .collect();
            (cells, 4.0 * f64::EPSILON, CellMethod::Erfc, None)
        }
        2 => {
            // X₁ = μ₁ + l₁₁Z₁, X₂ = μ₂ + l₂₁Z₁ + l₂₂Z₂; integrate the exact
            // conditional mass of X₂ against the law of Z₁.
            let (m1, m2) = (spec.mean[0], spec.mean[1]);
            let (l11, l21, l22) = (l[(0, 0)], l[(1, 0)], l[(1, 1)]);
            let inner_tol = tol / 4.0;
            let res: Vec<(Point, f64, f64)> = pts
                .into_par_iter()
                .map(|p| {
                    let (x1, x2) = (p[0] as f64, p[1] as f64);
                    let a = (x1 - 0.5 - m1) / l11;
                    let b = (x1 + 0.5 - m1) / l11;
                    let g = |z: f64| {
                        let c = m2 + l21 * z;
                        normal_pdf(z) * normal_mass((x2 - 0.5 - c) / l22, (x2 + 0.5 - c) / l22)
                    };
                    // Beyond |z| = 40 the Gaussian weight is below 1e-340.
                    let (a, b) = (a.max(-40.0), b.min(40.0));
                    let (v, e) = if a < b { adaptive_simpson(&g, a, b, inner_tol) } else { (0.0, 0.0) };
                    (p, v.max(0.0), e)
                })
                .collect();
            let err = res.iter().map(|r| r.2).fold(0.0, f64::max) + 8.0 * f64::EPSILON;
            if err > tol {
                return Err(Error::Numerical(format!("quadrature error {err:e} exceeds tolerance")));
            }
            (res.into_iter().map(|(p, v, _)| (p, v)).collect(), err, CellMethod::Quadrature, None)
        }
        3 => {
            // Half-width 3·√(1/4n) ≤ tol for every cell.
            let n = (2.25 / (tol * tol)).ceil() as u64;
            let dims: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| (b - a + 1) as usize).collect();
            let counts = mc_chunks(n, seed, |rng, k| {
                let mut c = vec![0u64; pts.len()];
                for _ in 0..k {
                    let x = sample(&l, &spec.mean, rng);
                    let mut idx = 0usize;
                    let mut inside = true;
                    for i in 0..3 {
                        let r = (x[i] + 0.5).floor() as i64;
                        if r < lo[i] || r > hi[i] {
                            inside = false;
                            break;
                        }
                        idx = idx * dims[i] + (r - lo[i]) as usize;
                    }
                    if inside {
                        c[idx] += 1;
                    }
                }
                c
            });
            let mut total = vec![0u64; pts.len()];
            for c in counts {
                for (t, v) in total.iter_mut().zip(c) {
                    *t += v;
                }
            }
            let cells = pts
                .into_iter()
                .zip(total)
                .map(|(p, c)| (p, c as f64 / n as f64))
                .collect();
            (cells, 3.0 * (0.25 / n as f64).sqrt(), CellMethod::MonteCarlo, Some(n))
        }
        _ => return Err(Error::Precondition("dimension above 3 is unsupported".into())),
    };
    Ok(GaussCells {
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        cells,
        cell_err,
        tail_bound,
        method,
        samples,
    })
}

/// A real value with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

impl Estimate {
    /// `self < other` for every admissible pair of true values.
    pub fn certainly_lt(&self, other: &Estimate) -> bool {
        self.value + self.err < other.value - other.err
    }

    pub fn certainly_le(&self, other: &Estimate) -> bool {
        self.value + self.err <= other.value - other.err
    }
}

fn bounding_box(s: &LatticeDist) -> (Vec<i64>, Vec<i64>) {
    let d = s.dim();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for x in s.atoms().keys() {
        for i in 0..d {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    (lo, hi)
}

/// `d_TV(S, ⌊X⌉)` for `X ∼ spec`; mass of `⌊X⌉` outside the support box is
/// taken as one minus the in-box mass.
pub fn tv_against(s: &LatticeDist, spec: &GaussSpec, tol: f64) -> Result<Estimate> {
    if s.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(s.dim(), spec.dim()));
    }
    if s.dim() > 2 {
        return Err(Error::Precondition("total variation needs d ≤ 2".into()));
    }
    let (lo, hi) = bounding_box(s);
    let g = discretized_gaussian(spec, &lo, &hi, tol, 0)?;
    let mut inside_gap = 0.0;
    let mut inside_g = 0.0;
    for (x, gx) in &g.cells {
        inside_gap += (to_f64(&s.mass_at(x)) - gx).abs();
        inside_g += gx;
    }
    let outside = (1.0 - inside_g).max(0.0);
    let n = g.cells.len() as f64;
    let value = 0.5 * (inside_gap + outside);
    let err = n * g.cell_err + 4.0 * n * f64::EPSILON;
    Ok(Estimate { value, err })
}

/// `d_TV(S, ⌊X⌉)` with `X` matching the mean and covariance of `S`.
pub fn tv_to_discretized_gaussian(s: &LatticeDist, tol: f64) -> Result<Estimate> {
    tv_against(s, &GaussSpec::fit(s)?, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LltTerms {
    #[serde(rename = "L")]
    pub l: f64,
    pub chi: f64,
    #[serde(with = "crate::rational::serde_str")]
    pub s_tilde: Rational,
    #[serde(with = "crate::rational::serde_vec")]
    pub u: Vec<Rational>,
    /// `s̃ = 0`: the bound says nothing.
    pub inapplicable: bool,
}

/// `min_j {1 − d_TV(Y, Y + e_j)}`.
pub fn shift_overlap(y: &LatticeDist) -> Result<Rational> {
    let d = y.dim();
    let mut best: Option<Rational> = None;
    for j in 0..d {
        let mut e = vec![0; d];
        e[j] = 1;
        let u = Rational::one() - tv_exact(y, &y.shift(&e)?)?;
        if best.as_ref().is_none_or(|b| u < *b) {
            best = Some(u);
        }
    }
    Ok(best.expect("positive dimension"))
}

fn norm3(x: &[i64], y: &[i64]) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| ((a - b) as f64).powi(2)).sum();
    sq * sq.sqrt()
}

pub fn llt_terms(ys: &[LatticeDist]) -> Result<LltTerms> {
    let first = ys.first().ok_or_else(|| Error::Precondition("no summands".into()))?;
    let d = first.dim();
    if let Some(y) = ys.iter().find(|y| y.dim() != d) {
        return Err(Error::DimensionMismatch(d, y.dim()));
    }
    let m = ys.len();
    let mut u = Vec::with_capacity(m);
    let mut chi_sum = 0.0;
    let mut trace = Rational::zero();
    let mut seen: Vec<(usize, Rational, f64)> = Vec::new();
    for (i, y) in ys.iter().enumerate() {
        if let Some((_, ui, ci)) = seen.iter().find(|(k, _, _)| ys[*k] == *y) {
            u.push(ui.clone());
            chi_sum += ci;
        } else {
            let ui = shift_overlap(y)?;
            let ci: f64 = y
                .atoms()
                .iter()
                .flat_map(|(x, p)| y.atoms().iter().map(move |(z, r)| to_f64(&(p * r)) * norm3(x, z)))
                .sum();
            u.push(ui.clone());
            chi_sum += ci;
            seen.push((i, ui, ci));
        }
        let cov = y.covariance();
        for (k, row) in cov.iter().enumerate() {
            trace += &row[k];
        }
    }
    let chi = chi_sum / m as f64;
    let max_u = u.iter().max().cloned().expect("nonempty");
    let s_tilde = u.iter().sum::<Rational>() - max_u;
    let mf = m as f64;
    let tr = 2.0 * to_f64(&trace) / mf;
    let l = mf.powf(-0.5) * chi / tr.powf(1.5);
    Ok(LltTerms {
        l,
        chi,
        inapplicable: s_tilde.is_zero(),
        s_tilde,
        u,
    })
}

/// One row of a convergence experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvRow {
    pub m: u32,
    pub tv: f64,
    pub tv_err: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub chi: f64,
    pub s_tilde: String,
}

/// `d_TV(Y^{*m}, ⌊X⌉)` and the local limit terms for each `m`.
pub fn tv_convergence(base: &LatticeDist, ms: &[u32], tol: f64) -> Result<Vec<TvRow>> {
    ms.iter()
        .map(|&m| {
            let s = base.pow_conv(m)?;
            let tv = tv_to_discretized_gaussian(&s, tol)?;
            let terms = llt_terms(&vec![base.clone(); m as usize])?;
            Ok(TvRow {
                m,
                tv: tv.value,
                tv_err: tv.err,
                l: terms.l,
                chi: terms.chi,
                s_tilde: crate::rational::fmt_rational(&terms.s_tilde),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularReport {
    pub bound: f64,
    pub sigma_min: f64,
    pub holds: bool,
    /// `holds` was decided in exact arithmetic.
    pub exact: bool,
}

fn exact_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            let pivot = a[c].clone();
            for (dst, v) in a[r].iter_mut().zip(&pivot).skip(c) {
                *dst -= &f * v;
            }
        }
    }
    det
}

/// Every principal minor is nonnegative.
fn is_psd_exact(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sub: Vec<Vec<Rational>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        !exact_det(&sub).is_negative()
    })
}

/// `σ_n(A) ≥ (√n R)^{−(n−1)}` for an integer `m × n` matrix of full column
/// rank, `R` the largest column norm.
pub fn singular_lower_bound(a: &[Vec<i64>]) -> Result<SingularReport> {
    let rows = a.len();
    let n = a.first().map(Vec::len).unwrap_or(0);
    if rows == 0 || n == 0 {
        return Err(Error::Precondition("empty matrix".into()));
    }
    if let Some(r) = a.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(n, r.len()));
    }
    let gram: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.iter().map(|r| BigInt::from(r[i]) * r[j]).sum())
                .collect()
        })
        .collect();
    let gram_q: Vec<Vec<Rational>> = gram
        .iter()
        .map(|r| r.iter().map(|v| Rational::from_integer(v.clone())).collect())
        .collect();
    if exact_det(&gram_q).is_zero() {
        return Err(Error::Precondition("matrix is not of full column rank".into()));
    }
    let r2 = (0..n).map(|i| gram[i][i].clone()).max().expect("n ≥ 1");
    // bound² = (n R²)^{−(n−1)}
    let base = Rational::from_integer(BigInt::from(n) * &r2);
    let bound_sq = Rational::one() / num::traits::Pow::pow(&base, (n - 1) as u32);
    let bound = to_f64(&bound_sq).sqrt();
    let gram_f = DMatrix::from_fn(n, n, |i, j| gram[i][j].to_f64().unwrap_or(f64::INFINITY));
    let sigma_min = sym_eigenvalues(&gram_f)[0].max(0.0).sqrt();
    let (holds, exact) = if n <= 8 {
        let shifted: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { &gram_q[i][j] - &bound_sq } else { gram_q[i][j].clone() })
                    .collect()
            })
            .collect();
        (is_psd_exact(&shifted), true)
    } else {
        (sigma_min >= bound * (1.0 - 1e-9), false)
    };
    Ok(SingularReport {
        bound,
        sigma_min,
        holds,
        exact,
    })
}

/// `exp(−t / 4σ₁(Σ))` bounding `P(‖X‖² ≥ t)` for centred `X ∼ N(0, Σ)`;
/// requires `d ≤ t / 16σ₁(Σ)`.
pub fn gaussian_tail_bound(sigma: &[Vec<f64>], t: f64) -> Result<f64> {
    let d = sigma.len();
    let spec = GaussSpec::new(vec![0.0; d], sigma.to_vec())?;
    let s1 = *sym_eigenvalues(&matrix(&spec.covariance)).last().expect("d ≥ 1");
    if t.is_nan() || t <= 0.0 || (d as f64) > t / (16.0 * s1) {
        return Err(Error::Precondition(format!(
            "need d ≤ t/(16σ₁): d = {d}, t/(16σ₁) = {}",
            t / (16.0 * s1)
        )));
    }
    Ok((-t / (4.0 * s1)).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCheck {
    pub t: f64,
    pub bound: f64,
    pub samples: u64,
    pub exceed: u64,
    pub empirical: f64,
    pub se: f64,
    pub holds: bool,
    pub seed: u64,
}

/// Empirical `P(‖X‖² ≥ t)` against the bound, allowing three binomial
/// standard errors.
pub fn gaussian_tail_check(sigma: &[Vec<f64>], t: f64, samples: u64, seed: u64) -> Result<TailCheck> {
    if samples == 0 {
        return Err(Error::OutOfRange("samples must be positive".into()));
    }
    let bound = gaussian_tail_bound(sigma, t)?;
    let d = sigma.len();
    let spec = GaussSpec::new(vec![0.0; d], sigma.to_vec())?;
    let l = spec.cholesky()?;
    let exceed: u64 = mc_chunks(samples, seed, |rng, k| {
        (0..k)
            .filter(|_| sample(&l, &spec.mean, rng).iter().map(|v| v * v).sum::<f64>() >= t)
            .count() as u64
    })
    .into_iter()
    .sum();
    let empirical = exceed as f64 / samples as f64;
    let se = (bound * (1.0 - bound) / samples as f64).sqrt();
    Ok(TailCheck {
        t,
        bound,
        samples,
        exceed,
        empirical,
        se,
        holds: empirical <= bound + 3.0 * se,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeGap {
    pub max_cdf_gap: f64,
    /// `Σ E|X_i − EX_i|³ / Var^{3/2}`.
    pub bound: f64,
    #[serde(with = "crate::rational::serde_str")]
    pub m3: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub variance: Rational,
}

impl BeGap {
    pub fn holds(&self, c_be: f64) -> bool {
        self.max_cdf_gap <= c_be * self.bound
    }
}

/// Largest gap between the CDF of the standardized sum and `Φ`, taken over
/// both one-sided limits at every jump.
pub fn berry_esseen_gap(mus: &[IntDist]) -> Result<BeGap> {
    if mus.is_empty() {
        return Err(Error::Precondition("no summands".into()));
    }
    let s = IntDist::convolve_all(mus);
    let var = s.variance();
    if var.is_zero() {
        return Err(Error::Precondition("zero variance".into()));
    }
    let mean = to_f64(&s.mean());
    let sd = to_f64(&var).sqrt();
    let m3: Rational = mus.iter().map(IntDist::abs_central_moment3).sum();
    let mut below = Rational::zero();
    let mut gap: f64 = 0.0;
    for (x, p) in s.atoms() {
        let phi = normal_cdf((*x as f64 - mean) / sd);
        let left = to_f64(&below);
        below += p;
        let right = to_f64(&below);
        gap = gap.max((left - phi).abs()).max((right - phi).abs());
    }
    Ok(BeGap {
        max_cdf_gap: gap,
        bound: to_f64(&m3) / to_f64(&var).powf(1.5),
        m3,
        variance: var,
    })
}
