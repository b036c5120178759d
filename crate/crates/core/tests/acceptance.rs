//! Acceptance suite: one PASS/FAIL line per criterion.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use concentration::domination::{cor3_check, hlp_check, mww_check};
use concentration::extremal::{
    is_strongly_balanced, nu, t_oracle, tse, tsebal, variance_nu, variance_slope_bracket, AlphaSeq, Window,
};
use concentration::gauss::{
    berry_esseen_gap, discretized_gaussian, gaussian_tail_check, singular_lower_bound, tv_convergence, GaussSpec,
};
use concentration::lab::{
    conjecture_scan, odlyzko_richmond_check, random_instance, Instance, InstanceKind, OdlyzkoRichmondInstance,
    Outcome, ScanConfig, ScanMode,
};
use concentration::lattice::LatticeDist;
use concentration::lattice_gap::connected_decomposition;
use concentration::rational::{fmt_rational, int, q};
use concentration::rearrange::{ball_function, dominating_coupling, IntMeasure};
use concentration::IntDist;

type Verdict = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Verdict,
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn c1_variance_closed_form() -> Verdict {
    let mut t = String::new();
    for j in 1..=60 {
        let a = q(j, 60);
        let closed = variance_nu(&a).map_err(|e| e.to_string())?;
        let direct = nu(&a).map_err(|e| e.to_string())?.variance();
        ensure!(closed == direct, "α = {}: {} ≠ {}", fmt_rational(&a), fmt_rational(&closed), fmt_rational(&direct));
        if j >= 30 {
            ensure!(closed == &a * (int(1) - &a), "α = {}: not α(1−α)", fmt_rational(&a));
        }
        writeln!(t, "{} {}", fmt_rational(&a), fmt_rational(&closed)).unwrap();
    }
    ensure!(variance_nu(&q(1, 3)).unwrap() == q(2, 3), "α = 1/3 must give 2/3");
    Ok(t)
}

fn c2_slope_brackets() -> Verdict {
    let f = |j: i64| variance_nu(&q(j, 210)).unwrap();
    for j in 1..210 {
        let (a, b) = (q(j, 210), q(j + 1, 210));
        let (fa, fb) = (f(j), f(j + 1));
        ensure!(fb <= fa, "f increases between {} and {}", fmt_rational(&a), fmt_rational(&b));
        let slope = (&fb - &fa) / (&b - &a);
        // pieces (1/(k+1), 1/k) meeting (a, b)
        let k_min = 210 / (j + 1);
        let k_max = (210 + j - 1) / j - 1;
        let lo = variance_slope_bracket(k_max).0;
        let hi = variance_slope_bracket(k_min).1;
        ensure!(
            lo <= slope && slope <= hi,
            "slope {} on [{}, {}] outside [{}, {}]",
            fmt_rational(&slope),
            fmt_rational(&a),
            fmt_rational(&b),
            fmt_rational(&lo),
            fmt_rational(&hi)
        );
    }
    Ok(String::new())
}

fn log_concave(seed: u64) -> IntDist {
    match random_instance(seed, InstanceKind::LogConcave) {
        Instance::LogConcave { mu } => mu,
        other => panic!("unexpected instance {other:?}"),
    }
}

fn c3_log_concave_sandwich() -> Verdict {
    let mut t = String::new();
    for seed in 0..500 {
        let mu = log_concave(seed);
        ensure!(mu.is_log_concave(), "seed {seed}: generator produced a non-log-concave law");
        let qm = mu.q_max();
        let v = mu.variance();
        let q2 = &qm * &qm;
        ensure!(&q2 * (int(1) + int(12) * &v) >= int(1), "seed {seed}: lower bound fails");
        ensure!(&q2 * (int(1) + &v) <= int(1), "seed {seed}: upper bound fails");
        writeln!(t, "{} {}", mu.to_json(), fmt_rational(&qm)).unwrap();
    }
    Ok(t)
}

fn c4_keilson_gerber() -> Verdict {
    let mut t = String::new();
    for i in 0..500 {
        let (a, b) = (log_concave(10_000 + 2 * i), log_concave(10_001 + 2 * i));
        let ab = a.convolve(&b);
        ensure!(ab.is_log_concave(), "pair {i}: {} * {} is not log-concave", a, b);
        writeln!(t, "{}", ab.to_json()).unwrap();
    }
    Ok(t)
}

/// Laws with at most three atoms in {0..3}, masses multiples of 1/4.
fn quarter_laws() -> Vec<IntDist> {
    let mut out = Vec::new();
    for mask in 1u32..16 {
        let sites: Vec<i64> = (0..4).filter(|s| mask & (1 << s) != 0).collect();
        if sites.len() > 3 {
            continue;
        }
        let mut counts = vec![1u32; sites.len()];
        compositions(&sites, &mut counts, 0, 4 - sites.len() as u32, &mut out);
    }
    out
}

fn compositions(sites: &[i64], counts: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<IntDist>) {
    if i + 1 == sites.len() {
        counts[i] += left;
        out.push(IntDist::from_weights(sites.iter().copied().zip(counts.iter().copied())).unwrap());
        counts[i] -= left;
        return;
    }
    for extra in 0..=left {
        counts[i] += extra;
        compositions(sites, counts, i + 1, left - extra, out);
        counts[i] -= extra;
    }
}

fn c5_hlp_exhaustive() -> Verdict {
    let laws = quarter_laws();
    ensure!(laws.len() == 34, "expected 34 laws, found {}", laws.len());
    let z = IntDist::new(vec![(-1, q(1, 4)), (0, q(1, 2)), (1, q(1, 4))]).unwrap();
    let mut checked = 0;
    for x in &laws {
        for y in &laws {
            for zs in [vec![], vec![z.clone()]] {
                let r = hlp_check(x, y, &zs).map_err(|e| e.to_string())?;
                ensure!(r.holds, "violation at X = {x}, Y = {y}, Z = {zs:?}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked}"))
}

fn c6_cor3_and_mww() -> Verdict {
    let mut t = String::new();
    for seed in 0..300 {
        let Instance::SymUnimodalChain { pairs } = random_instance(seed, InstanceKind::SymUnimodalChain) else {
            unreachable!()
        };
        let r = cor3_check(&pairs).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(r.holds, "cor3 violation at seed {seed}: {:?}", r.violation);
        let Instance::SharpLogConcave { summands } = random_instance(seed, InstanceKind::SharpLogConcave) else {
            unreachable!()
        };
        let r = mww_check(&summands).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(r.holds, "squeeze violation at seed {seed}: {:?}", r.violation);
        writeln!(t, "{seed} {} {}", pairs.len(), summands.len()).unwrap();
    }
    Ok(t)
}

fn alphas(xs: &[(i64, i64)]) -> AlphaSeq {
    AlphaSeq::new(xs.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
}

fn c7_exact_values() -> Verdict {
    let a35 = alphas(&[(3, 5), (3, 5)]);
    ensure!(tsebal(&a35).unwrap() == q(13, 25), "tsebal(3/5, 3/5) ≠ 13/25");
    ensure!(tsebal(&alphas(&[(1, 2); 4])).unwrap() == q(3, 8), "tsebal(1/2 ×4) ≠ 3/8");
    let t = tse(&a35);
    ensure!(t.value == q(13, 25), "tse(3/5, 3/5) = {}", fmt_rational(&t.value));
    ensure!(t.argmax.signs[0] == -t.argmax.signs[1], "signs {:?} are not opposite", t.argmax.signs);
    let half = alphas(&[(1, 2), (1, 2)]);
    ensure!(is_strongly_balanced(&half), "(1/2, 1/2) must be strongly balanced");
    let o = t_oracle(&half, Window::new(0, 1).unwrap(), 1_000_000).map_err(|e| e.to_string())?;
    ensure!(o.value == tsebal(&half).unwrap(), "oracle {} ≠ tsebal", fmt_rational(&o.value));
    Ok(String::new())
}

fn c8_conjecture_scan() -> Verdict {
    let mut t = String::new();
    for n in [2, 3] {
        let cfg = ScanConfig {
            denominator: 4,
            window: Window::new(0, 3).unwrap(),
            n,
            seed: 0,
            budget: 1_000_000,
        };
        let (records, summary) = conjecture_scan(&cfg).map_err(|e| e.to_string())?;
        ensure!(summary.mode == ScanMode::Exhaustive, "n = {n}: scan was not exhaustive");
        for r in records.iter().filter(|r| r.violation) {
            eprintln!("CONJECTURE VIOLATION: {}", serde_json::to_string(r).unwrap());
        }
        ensure!(summary.violations == 0, "n = {n}: {} violations", summary.violations);
        writeln!(t, "n = {n}: {} instances, {} equalities", summary.instances, summary.equalities).unwrap();
    }
    Ok(t)
}

fn c9_coupling() -> Verdict {
    let mut t = String::new();
    for seed in 0..200 {
        let Instance::CouplingPair { mu, mu_prime, eps } = random_instance(seed, InstanceKind::CouplingPair) else {
            unreachable!()
        };
        let c = dominating_coupling(&mu, &mu_prime, &eps).map_err(|e| format!("seed {seed}: {e}"))?;
        let audit = c.audit(&mu, &mu_prime, &eps);
        ensure!(audit.all_ok(), "seed {seed}: {audit:?}");
        ensure!(c.p_a() * (int(1) + &eps) >= int(1), "seed {seed}: P(A) too small");
        writeln!(t, "{}", serde_json::to_string(&c).unwrap()).unwrap();
    }
    Ok(t)
}

fn random_counts(rng: &mut ChaCha8Rng, span: i64, max_atoms: usize) -> Vec<(i64, i64)> {
    let n = rng.random_range(1..=max_atoms);
    let mut m = std::collections::BTreeMap::new();
    for _ in 0..n {
        m.insert(rng.random_range(-span..=span), rng.random_range(1..=9));
    }
    m.into_iter().collect()
}

fn c10_nested_medians() -> Verdict {
    let mut t = String::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..1000 {
        let counts = random_counts(&mut rng, 8, 8);
        let bf = ball_function(&IntMeasure::from_counts(&counts).unwrap()).map_err(|e| e.to_string())?;
        let mc = bf.medians();
        ensure!(mc.is_nested(), "measure {i} {counts:?}: chain not nested");
        ensure!(bf.eval(mc.m.floor()) == Some(0), "measure {i}: f(⌊m⌋) ≠ 0");
        for j in 1..=mc.m_j.len() {
            ensure!(bf.eval(mc.get(j).floor()) == Some(0), "measure {i}: f(⌊m_{j}⌋) ≠ 0");
        }
        writeln!(t, "{}", serde_json::to_string(&mc).unwrap()).unwrap();
    }
    Ok(t)
}

fn c11_connected_decomposition() -> Verdict {
    let mut t = String::new();
    let u = IntDist::uniform_range(0, 3);
    let d = connected_decomposition(&u).map_err(|e| e.to_string())?;
    ensure!(d.components_before == 2, "U{{0..3}} should need reconnection");
    ensure!(d.reconstruct().unwrap() == u && d.is_connected(), "U{{0..3}} decomposition is wrong");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let half = q(1, 2);
    let mut done = 0;
    while done < 1000 {
        let counts = random_counts(&mut rng, 6, 6);
        let mu = IntDist::from_weights(counts.iter().map(|&(s, c)| (s, c as u32))).unwrap();
        if mu.len() < 2 || mu.q_max() > half {
            continue;
        }
        let d = connected_decomposition(&mu).map_err(|e| format!("{mu}: {e}"))?;
        ensure!(d.reconstruct().map_err(|e| e.to_string())? == mu, "{mu}: reconstruction differs");
        ensure!(d.is_connected(), "{mu}: graph is disconnected");
        writeln!(t, "{}", serde_json::to_string(&d).unwrap()).unwrap();
        done += 1;
    }
    Ok(t)
}

fn c12_odlyzko_richmond() -> Verdict {
    let inst = OdlyzkoRichmondInstance {
        p: IntDist::uniform(&[0, 1, 3]).unwrap(),
        n: 60,
        delta: q(3, 10),
    };
    let r = odlyzko_richmond_check(&inst).map_err(|e| e.to_string())?;
    ensure!(r.holds == Outcome::Pass, "{}", r.to_json());
    Ok(r.to_json())
}

/// Values computed once at tol = 1e-9, with their error bounds.
const FROZEN_TV: [(u32, f64, f64); 4] = [
    (4, 0.030_690_917_847_754_54, 3.792_788_438_279_511e-9),
    (8, 0.015_551_390_031_469_745, 1.779_279_673_128_77e-8),
    (16, 0.007_860_976_949_391_996, 6.674_340_317_761_355e-8),
    (32, 0.003_918_135_120_717_77, 2.673_560_325_402_579e-7),
];

fn c13_tv_convergence() -> Verdict {
    let base = LatticeDist::uniform(&[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
    let ms: Vec<u32> = FROZEN_TV.iter().map(|r| r.0).collect();
    let rows = tv_convergence(&base, &ms, 1e-9).map_err(|e| e.to_string())?;
    for w in rows.windows(2) {
        ensure!(
            w[1].tv + w[1].tv_err < w[0].tv - w[0].tv_err,
            "m = {} not certainly below m = {}",
            w[1].m,
            w[0].m
        );
    }
    let (first, last) = (&rows[0], &rows[3]);
    ensure!(
        last.tv + last.tv_err < (first.tv - first.tv_err) / 2.0,
        "m = 32 is not below half of m = 4"
    );
    for (r, &(m, v, e)) in rows.iter().zip(&FROZEN_TV) {
        ensure!(r.m == m, "row order");
        ensure!((r.tv - v).abs() <= r.tv_err + e, "m = {m}: {} ± {} drifted from {v} ± {e}", r.tv, r.tv_err);
    }
    Ok(serde_json::to_string(&rows).unwrap())
}

fn c14_appendix_utilities() -> Verdict {
    let mut t = String::new();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut done = 0;
    while done < 100 {
        let n = rng.random_range(1..=3usize);
        let rows = rng.random_range(n..=n + 1);
        let a: Vec<Vec<i64>> = (0..rows).map(|_| (0..n).map(|_| rng.random_range(-5..=5)).collect()).collect();
        let Ok(r) = singular_lower_bound(&a) else { continue };
        ensure!(r.holds, "{a:?}: σ_min {} below {}", r.sigma_min, r.bound);
        writeln!(t, "{}", serde_json::to_string(&r).unwrap()).unwrap();
        done += 1;
    }
    let tail = gaussian_tail_check(&[vec![1.0]], 32.0, 100_000, 0).map_err(|e| e.to_string())?;
    ensure!(tail.holds, "tail: {tail:?}");
    writeln!(t, "{}", serde_json::to_string(&tail).unwrap()).unwrap();
    let coins = vec![IntDist::uniform_range(0, 1); 64];
    let be = berry_esseen_gap(&coins).map_err(|e| e.to_string())?;
    ensure!(be.holds(0.56), "Berry–Esseen: {be:?}");
    writeln!(t, "{}", serde_json::to_string(&be).unwrap()).unwrap();
    let spec = GaussSpec::new(vec![0.0; 3], vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let cells = discretized_gaussian(&spec, &[-1; 3], &[1; 3], 1e-2, 14).map_err(|e| e.to_string())?;
    writeln!(t, "{}", serde_json::to_string(&cells).unwrap()).unwrap();
    Ok(t)
}

fn seeded_transcripts() -> Vec<(u32, String)> {
    let suites: [(u32, fn() -> Verdict); 8] = [
        (3, c3_log_concave_sandwich),
        (4, c4_keilson_gerber),
        (6, c6_cor3_and_mww),
        (8, c8_conjecture_scan),
        (9, c9_coupling),
        (10, c10_nested_medians),
        (11, c11_connected_decomposition),
        (14, c14_appendix_utilities),
    ];
    suites.iter().map(|(id, f)| (*id, f().unwrap_or_else(|e| format!("error: {e}")))).collect()
}

fn c15_determinism() -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let first = pool.install(seeded_transcripts);
    let second = pool.install(seeded_transcripts);
    for ((id, a), (_, b)) in first.iter().zip(&second) {
        ensure!(a.as_bytes() == b.as_bytes(), "criterion {id} output differs between runs");
        ensure!(!a.starts_with("error"), "criterion {id}: {a}");
    }
    Ok(String::new())
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, title: "variance closed form on j/60", budget: Duration::from_secs(1), run: c1_variance_closed_form },
        Criterion { id: 2, title: "monotonicity and slope brackets on 1/210", budget: Duration::from_secs(5), run: c2_slope_brackets },
        Criterion { id: 3, title: "log-concave sandwich, 500 seeded", budget: Duration::from_secs(10), run: c3_log_concave_sandwich },
        Criterion { id: 4, title: "Keilson–Gerber closure, 500 seeded pairs", budget: Duration::from_secs(10), run: c4_keilson_gerber },
        Criterion { id: 5, title: "HLP exhaustive on quarter-grid laws", budget: Duration::from_secs(120), run: c5_hlp_exhaustive },
        Criterion { id: 6, title: "cor3 and squeeze checkers, 300 seeded each", budget: Duration::from_secs(120), run: c6_cor3_and_mww },
        Criterion { id: 7, title: "exact tse / tsebal / oracle values", budget: Duration::from_secs(1), run: c7_exact_values },
        Criterion { id: 8, title: "conjecture scan D=4, window 0..3, n=2,3", budget: Duration::from_secs(600), run: c8_conjecture_scan },
        Criterion { id: 9, title: "dominating coupling, 200 seeded", budget: Duration::from_secs(60), run: c9_coupling },
        Criterion { id: 10, title: "nested medians, 1000 seeded", budget: Duration::from_secs(10), run: c10_nested_medians },
        Criterion { id: 11, title: "connected decomposition, 1000 seeded", budget: Duration::from_secs(30), run: c11_connected_decomposition },
        Criterion { id: 12, title: "Odlyzko–Richmond for U{0,1,3}, n=60", budget: Duration::from_secs(5), run: c12_odlyzko_richmond },
        Criterion { id: 13, title: "TV convergence in Z^2, m=4..32", budget: Duration::from_secs(300), run: c13_tv_convergence },
        Criterion { id: 14, title: "singular bound, normal tail, Berry–Esseen", budget: Duration::from_secs(120), run: c14_appendix_utilities },
        Criterion { id: 15, title: "seeded suites byte-identical at threads=1", budget: Duration::from_secs(900), run: c15_determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let verdict = match (&result, elapsed <= c.budget) {
            (Ok(_), true) => "PASS".to_string(),
            (Ok(_), false) => format!("FAIL (over budget {:?})", c.budget),
            (Err(e), _) => format!("FAIL ({e})"),
        };
        if !verdict.starts_with("PASS") {
            failed += 1;
        }
        println!("criterion {:>2}: {verdict} [{:.2?}] {}", c.id, elapsed, c.title);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
