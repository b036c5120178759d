//! `conc`: command-line access to the concentration library.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use concentration::domination::dominates;
use concentration::extremal::{is_balanced, nu, t_oracle, tse, tsebal, AlphaSeq, Window};
use concentration::gauss::{
    berry_esseen_gap, discretized_gaussian, gaussian_tail_check, llt_terms, tv_convergence,
    tv_to_discretized_gaussian, GaussSpec, C_BE,
};
use concentration::lab::{conjecture_scan, run_check, Counts, Outcome, ScanConfig, CHECK_NAMES};
use concentration::lattice::LatticeDist;
use concentration::lattice_gap::{
    connected_decomposition, gap_fit_rank1, integer_span_basis, max_span_vec, SymGap,
};
use concentration::rational::{fmt_rational, parse_rational, parse_rational_list};
use concentration::rearrange::{dominating_coupling, minus_rearrange, plus_rearrange, sym_rearrange};
use concentration::{Error, IntDist, Rational, SpanResult};

#[derive(Parser, Debug)]
#[command(name = "conc", version, about = "Exact concentration-function computations on ℤ")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Also write the result to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Operations on single distributions.
    #[command(subcommand)]
    Dist(DistCmd),
    /// Extremal measures and the values t_SE, t_SE^bal and the window oracle.
    #[command(subcommand)]
    Extremal(ExtremalCmd),
    /// ε-domination of concentration profiles: A ≼_ε B.
    Dominate {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "0")]
        eps: String,
    },
    /// The dominating coupling of μ and a symmetric unimodal μ′.
    Couple {
        mu: PathBuf,
        mu_prime: PathBuf,
        #[arg(long, default_value = "0")]
        eps: String,
    },
    /// Two-point decomposition with a connected support graph.
    Decompose { mu: PathBuf },
    /// Symmetric generalized arithmetic progressions.
    #[command(subcommand)]
    Gap(GapCmd),
    /// Integer basis of the lattice spanned by a vector set or a support.
    LatticeBasis { file: PathBuf },
    /// Discretized Gaussians, total variation and local limit terms.
    #[command(subcommand)]
    Gauss(GaussCmd),
    /// Berry–Esseen gap of a sum of independent summands.
    BeGap {
        files: Vec<PathBuf>,
        /// Repeat the summand list this many times.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[arg(long, default_value_t = C_BE)]
        c_be: f64,
    },
    /// Run one lemma checker on a JSON instance.
    Check {
        lemma: String,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Compare Q(ΣX_i) with t_SE over grids of extremal measures.
    ScanConjecture {
        #[arg(long, default_value_t = 4)]
        denominator: u64,
        #[arg(long, default_value = "0..3")]
        window: Window,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Count outcomes per checker in JSON-lines report files.
    Report { files: Vec<PathBuf> },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RearrangeKind {
    Plus,
    Minus,
    Sym,
    All,
}

#[derive(Subcommand, Debug)]
enum DistCmd {
    /// Convolution of all inputs.
    Conv { files: Vec<PathBuf> },
    Stats { file: PathBuf },
    Rearrange {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = RearrangeKind::All)]
        kind: RearrangeKind,
    },
    Squeeze { file: PathBuf },
    /// Maximal span; lattice inputs report a basis.
    Span { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum ExtremalCmd {
    Nu {
        #[arg(long)]
        alpha: String,
    },
    Tse {
        #[arg(long)]
        alphas: String,
    },
    Tsebal {
        #[arg(long)]
        alphas: String,
    },
    Oracle {
        #[arg(long)]
        alphas: String,
        #[arg(long)]
        window: Window,
    },
}

#[derive(Subcommand, Debug)]
enum GapCmd {
    Sumset { a: PathBuf, b: PathBuf },
    Proper { gap: PathBuf },
    Fit {
        /// Comma separated integers.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value = "0")]
        eps: String,
    },
    Cover { gap: PathBuf, dists: Vec<PathBuf> },
}

#[derive(Subcommand, Debug)]
enum GaussCmd {
    /// Cell probabilities of ⌊X⌉ over a box.
    Cells {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: String,
        #[arg(long, allow_hyphen_values = true)]
        hi: String,
    },
    /// TV to the fitted discretized Gaussian; with --ms, FILE is a base law
    /// and one row per convolution power is emitted.
    Tv {
        file: PathBuf,
        #[arg(long)]
        ms: Option<String>,
    },
    Terms {
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
    /// Empirical check of P(‖X‖² ≥ t) ≤ exp(−t/4σ₁).
    Tail {
        /// Rows separated by `;`, entries by `,`.
        #[arg(long)]
        cov: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

/// Failure that maps to an exit code.
#[derive(Debug)]
enum Fail {
    Usage(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

/// A rendered result: text body, JSON body, optional CSV, and whether the
/// underlying check held.
struct Output {
    text: String,
    json: Value,
    csv: Option<String>,
    /// Replaces the rendered body in the `--out` file.
    file_body: Option<String>,
    ok: bool,
}

impl Output {
    fn new(text: impl Into<String>, json: Value) -> Self {
        Output {
            text: text.into(),
            json,
            csv: None,
            file_body: None,
            ok: true,
        }
    }

    fn ok(mut self, ok: bool) -> Self {
        self.ok = ok;
        self
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: concentration::Result<T>) -> Result<T, Fail> {
    r.map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

/// JSON when the file starts with `{`, the `site: num/den` text form otherwise.
fn load_dist(path: &Path) -> Result<IntDist, Fail> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        with_path(path, IntDist::from_json(&text))
    } else {
        with_path(path, IntDist::from_text(&text))
    }
}

fn load_dists(paths: &[PathBuf]) -> Result<Vec<IntDist>, Fail> {
    if paths.is_empty() {
        return Err(Fail::Usage("at least one distribution file is required".into()));
    }
    paths.iter().map(|p| load_dist(p)).collect()
}

fn load_lattice(path: &Path) -> Result<LatticeDist, Fail> {
    with_path(path, LatticeDist::from_json(&read(path)?))
}

fn load_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, Fail> {
    serde_json::from_str(&read(path)?).map_err(|e| {
        Fail::Usage(format!("{}: parse error at line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn rational(s: &str) -> Result<Rational, Fail> {
    Ok(parse_rational(s)?)
}

fn alpha_seq(s: &str) -> Result<AlphaSeq, Fail> {
    Ok(AlphaSeq::new(parse_rational_list(s)?)?)
}

fn int_list(s: &str) -> Result<Vec<i64>, Fail> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse().map_err(|_| Fail::Usage(format!("not an integer: {p:?}"))))
        .collect()
}

fn matrix(s: &str) -> Result<Vec<Vec<f64>>, Fail> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse().map_err(|_| Fail::Usage(format!("not a number: {v:?}"))))
                .collect()
        })
        .collect()
}

fn dist_out(d: &IntDist) -> Output {
    Output::new(d.to_string(), to_value(d))
}

fn run_dist(cmd: DistCmd) -> Result<Output, Fail> {
    Ok(match cmd {
        DistCmd::Conv { files } => dist_out(&IntDist::convolve_all(&load_dists(&files)?)),
        DistCmd::Stats { file } => {
            let d = load_dist(&file)?;
            let j = json!({
                "atoms": d.len(),
                "mean": fmt_rational(&d.mean()),
                "variance": fmt_rational(&d.variance()),
                "q_max": fmt_rational(&d.q_max()),
                "modes": d.modes(),
                "symmetric": d.is_symmetric(),
                "unimodal": d.is_unimodal(),
                "log_concave": d.is_log_concave(),
                "sharp_log_concave": d.is_sharp_log_concave(),
            });
            let text = j
                .as_object()
                .expect("object")
                .iter()
                .map(|(k, v)| format!("{k} = {}", v.to_string().trim_matches('"')))
                .collect::<Vec<_>>()
                .join("\n");
            Output::new(text, j)
        }
        DistCmd::Rearrange { file, kind } => {
            let d = load_dist(&file)?;
            let sym = sym_rearrange(&d);
            match kind {
                RearrangeKind::Plus => dist_out(&plus_rearrange(&d)),
                RearrangeKind::Minus => dist_out(&minus_rearrange(&d)),
                RearrangeKind::Sym => match sym {
                    Some(s) => dist_out(&s),
                    None => Output::new("none", Value::Null),
                },
                RearrangeKind::All => {
                    let (p, m) = (plus_rearrange(&d), minus_rearrange(&d));
                    let text = format!(
                        "plus = {p}\nminus = {m}\nsym = {}",
                        sym.as_ref().map(ToString::to_string).unwrap_or_else(|| "none".into())
                    );
                    Output::new(text, json!({ "plus": p, "minus": m, "sym": sym }))
                }
            }
        }
        DistCmd::Squeeze { file } => dist_out(&load_dist(&file)?.squeeze()),
        DistCmd::Span { file } => {
            let text = read(&file)?;
            if text.contains("\"dim\"") {
                let basis = with_path(&file, max_span_vec(&load_lattice(&file)?))?;
                Output::new(format!("basis = {:?}", basis.columns), to_value(&basis))
            } else {
                match load_dist(&file)?.max_span() {
                    SpanResult::Finite(g) => Output::new(g.to_string(), json!(g)),
                    SpanResult::Infinite => Output::new("infinite", json!("infinite")),
                }
            }
        }
    })
}

/// `alphas` and `signs` reported in input order.
fn tse_report(alphas: &AlphaSeq) -> Result<Output, Fail> {
    let t = tse(alphas);
    let n = alphas.len();
    let mut input_alphas = vec![String::new(); n];
    let mut signs = vec![0i8; n];
    for (i, &p) in alphas.perm().iter().enumerate() {
        input_alphas[p] = fmt_rational(&alphas.alphas()[i]);
        signs[p] = t.argmax.signs[i];
    }
    let bal = if is_balanced(alphas) { Some(tsebal(alphas)?) } else { None };
    let j = json!({
        "alphas": input_alphas,
        "tse": fmt_rational(&t.value),
        "signs": signs,
        "tsebal": bal.as_ref().map(fmt_rational),
    });
    let text = format!(
        "tse = {}\nsigns = {:?}\ntsebal = {}",
        fmt_rational(&t.value),
        signs,
        bal.as_ref().map(fmt_rational).unwrap_or_else(|| "null".into())
    );
    Ok(Output::new(text, j))
}

fn run_extremal(cmd: ExtremalCmd, g: &Global) -> Result<Output, Fail> {
    Ok(match cmd {
        ExtremalCmd::Nu { alpha } => dist_out(&nu(&rational(&alpha)?)?),
        ExtremalCmd::Tse { alphas } => tse_report(&alpha_seq(&alphas)?)?,
        ExtremalCmd::Tsebal { alphas } => {
            let a = alpha_seq(&alphas)?;
            let v = tsebal(&a)?;
            Output::new(fmt_rational(&v), json!({ "tsebal": fmt_rational(&v) }))
        }
        ExtremalCmd::Oracle { alphas, window } => {
            let r = t_oracle(&alpha_seq(&alphas)?, window, g.budget)?;
            let witness: Vec<String> = r.witness.iter().map(ToString::to_string).collect();
            Output::new(
                format!("oracle = {}\nwitness = [{}]\ntuples = {}", fmt_rational(&r.value), witness.join(", "), r.tuples),
                json!({
                    "oracle": fmt_rational(&r.value),
                    "window": window.to_string(),
                    "witness": r.witness,
                    "tuples": r.tuples.to_string(),
                }),
            )
        }
    })
}

fn run_gap(cmd: GapCmd, g: &Global) -> Result<Output, Fail> {
    let gap_text = |x: &SymGap| serde_json::to_string(x).expect("serializable");
    Ok(match cmd {
        GapCmd::Sumset { a, b } => {
            let s = load_json::<SymGap>(&a)?.sumset(&load_json(&b)?)?;
            Output::new(gap_text(&s), to_value(&s))
        }
        GapCmd::Proper { gap } => {
            let p = load_json::<SymGap>(&gap)?.is_proper(g.budget)?;
            Output::new(p.to_string(), json!({ "proper": p }))
        }
        GapCmd::Fit { values, eps } => match gap_fit_rank1(&int_list(&values)?, &rational(&eps)?) {
            Some(s) => Output::new(gap_text(&s), to_value(&s)),
            None => Output::new("none", Value::Null),
        },
        GapCmd::Cover { gap, dists } => {
            let f = load_json::<SymGap>(&gap)?.cover(&load_dists(&dists)?, g.budget)?;
            Output::new(fmt_rational(&f), json!({ "covered": fmt_rational(&f) }))
        }
    })
}

fn gauss_spec(path: &Path) -> Result<GaussSpec, Fail> {
    let s: GaussSpec = load_json(path)?;
    with_path(path, GaussSpec::new(s.mean, s.covariance))
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String, Fail> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Fail::Usage(e.to_string()))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Fail::Usage(e.to_string()))?).expect("utf-8"))
}

fn run_gauss(cmd: GaussCmd, g: &Global) -> Result<Output, Fail> {
    Ok(match cmd {
        GaussCmd::Cells { spec, lo, hi } => {
            let s = gauss_spec(&spec)?;
            let c = discretized_gaussian(&s, &int_list(&lo)?, &int_list(&hi)?, g.tol, g.seed)?;
            let text = c
                .cells
                .iter()
                .map(|(x, p)| format!("{x:?}: {p:e} ± {:e}", c.cell_err))
                .chain([format!("tail ≤ {:e}", c.tail_bound)])
                .collect::<Vec<_>>()
                .join("\n");
            #[derive(Serialize)]
            struct Row {
                cell: String,
                p: f64,
                err: f64,
            }
            let rows: Vec<Row> = c
                .cells
                .iter()
                .map(|(x, p)| Row {
                    cell: x.iter().map(i64::to_string).collect::<Vec<_>>().join(" "),
                    p: *p,
                    err: c.cell_err,
                })
                .collect();
            let mut j = to_value(&c);
            j["seed"] = json!(g.seed);
            let mut o = Output::new(text, j);
            o.csv = Some(csv_string(&rows)?);
            o
        }
        GaussCmd::Tv { file, ms } => {
            let base = load_lattice(&file)?;
            match ms {
                None => {
                    let e = tv_to_discretized_gaussian(&base, g.tol)?;
                    Output::new(format!("tv = {:e} ± {:e}", e.value, e.err), to_value(&e))
                }
                Some(ms) => {
                    let ms: Vec<u32> = int_list(&ms)?
                        .into_iter()
                        .map(|m| u32::try_from(m).ok().filter(|&m| m > 0))
                        .collect::<Option<_>>()
                        .ok_or_else(|| Fail::Usage("--ms must list positive integers".into()))?;
                    let rows = tv_convergence(&base, &ms, g.tol)?;
                    let text = rows
                        .iter()
                        .map(|r| format!("m = {}: tv = {:e} ± {:e}, L = {:e}, chi = {:e}, s_tilde = {}", r.m, r.tv, r.tv_err, r.l, r.chi, r.s_tilde))
                        .collect::<Vec<_>>()
                        .join("\n");
                    let mut o = Output::new(text, to_value(&rows));
                    o.csv = Some(csv_string(&rows)?);
                    o
                }
            }
        }
        GaussCmd::Terms { files, repeat } => {
            let ys: Vec<LatticeDist> = files.iter().map(|f| load_lattice(f)).collect::<Result<_, _>>()?;
            let all: Vec<LatticeDist> = std::iter::repeat_n(ys, repeat).flatten().collect();
            let t = llt_terms(&all)?;
            let u: Vec<String> = t.u.iter().map(fmt_rational).collect();
            Output::new(
                format!(
                    "L = {:e}\nchi = {:e}\ns_tilde = {}\nu = [{}]\ninapplicable = {}",
                    t.l,
                    t.chi,
                    fmt_rational(&t.s_tilde),
                    u.join(", "),
                    t.inapplicable
                ),
                to_value(&t),
            )
        }
        GaussCmd::Tail { cov, t, samples } => {
            let c = gaussian_tail_check(&matrix(&cov)?, t, samples, g.seed)?;
            Output::new(
                format!(
                    "bound = {:e}\nempirical = {:e} ({} of {})\nse = {:e}\nholds = {}\nseed = {}",
                    c.bound, c.empirical, c.exceed, c.samples, c.se, c.holds, c.seed
                ),
                to_value(&c),
            )
            .ok(c.holds)
        }
    })
}

fn run_report(files: &[PathBuf]) -> Result<Output, Fail> {
    if files.is_empty() {
        return Err(Fail::Usage("at least one report file is required".into()));
    }
    let mut counts: std::collections::BTreeMap<String, Counts> = Default::default();
    for f in files {
        for (i, line) in read(f)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: Value = serde_json::from_str(line)
                .map_err(|e| Fail::Usage(format!("{}: line {}, column {}: {e}", f.display(), i + 1, e.column())))?;
            let (Some(name), Some(holds)) = (v["name"].as_str(), v.get("holds")) else {
                continue;
            };
            let outcome: Outcome = serde_json::from_value(holds.clone())
                .map_err(|e| Fail::Usage(format!("{}: line {}: {e}", f.display(), i + 1)))?;
            counts.entry(name.to_string()).or_default().add(outcome);
        }
    }
    let failed = counts.values().any(|c| c.fail > 0);
    let text = counts
        .iter()
        .map(|(k, c)| {
            format!(
                "{k}: pass {} fail {} not-applicable {} indeterminate {}",
                c.pass, c.fail, c.not_applicable, c.indeterminate
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output::new(text, to_value(&counts)).ok(!failed))
}

fn run(cli: Cli) -> Result<Output, Fail> {
    let g = cli.global.clone();
    if g.tol.is_nan() || g.tol <= 0.0 {
        return Err(Fail::Usage("--tol must be positive".into()));
    }
    Ok(match cli.cmd {
        Cmd::Dist(c) => run_dist(c)?,
        Cmd::Extremal(c) => run_extremal(c, &g)?,
        Cmd::Dominate { a, b, eps } => {
            let r = dominates(&load_dist(&a)?, &load_dist(&b)?, &rational(&eps)?);
            Output::new(serde_json::to_string(&r).expect("serializable"), to_value(&r)).ok(r.holds)
        }
        Cmd::Couple { mu, mu_prime, eps } => {
            let (m, mp, e) = (load_dist(&mu)?, load_dist(&mu_prime)?, rational(&eps)?);
            let c = dominating_coupling(&m, &mp, &e)?;
            let audit = c.audit(&m, &mp, &e);
            let rows = c
                .cells
                .iter()
                .map(|cell| format!("{} {} {} {}", cell.z, cell.x_prime, cell.in_a, fmt_rational(&cell.mass)))
                .collect::<Vec<_>>()
                .join("\n");
            Output::new(
                format!("# z x' in_A mass\n{rows}\nP(A) = {}\naudit_ok = {}", fmt_rational(&c.p_a()), audit.all_ok()),
                json!({ "coupling": c, "audit": audit }),
            )
            .ok(audit.all_ok())
        }
        Cmd::Decompose { mu } => {
            let d = connected_decomposition(&load_dist(&mu)?)?;
            let text = d
                .parts
                .iter()
                .map(|(w, (a, b))| format!("{} U{{{a}, {b}}}", fmt_rational(w)))
                .collect::<Vec<_>>()
                .join("\n");
            Output::new(text, to_value(&d)).ok(d.is_connected())
        }
        Cmd::Gap(c) => run_gap(c, &g)?,
        Cmd::LatticeBasis { file } => {
            let text = read(&file)?;
            let basis = if text.contains("\"dim\"") {
                with_path(&file, max_span_vec(&load_lattice(&file)?))?
            } else {
                let pts: Vec<Vec<i64>> = load_json(&file)?;
                with_path(&file, integer_span_basis(&pts))?
            };
            Output::new(
                format!("basis = {:?}\nkz_bound_holds = {}", basis.columns, basis.kz_bound_holds),
                to_value(&basis),
            )
        }
        Cmd::Gauss(c) => run_gauss(c, &g)?,
        Cmd::BeGap { files, repeat, c_be } => {
            let base = load_dists(&files)?;
            let all: Vec<IntDist> = std::iter::repeat_n(base, repeat).flatten().collect();
            let r = berry_esseen_gap(&all)?;
            let holds = r.holds(c_be);
            let mut j = to_value(&r);
            j["c_be"] = json!(c_be);
            j["holds"] = json!(holds);
            Output::new(
                format!("max_cdf_gap = {:e}\nbound = {:e}\nc_be = {c_be}\nholds = {holds}", r.max_cdf_gap, r.bound),
                j,
            )
            .ok(holds)
        }
        Cmd::Check { lemma, instance } => {
            if !CHECK_NAMES.contains(&lemma.trim_end_matches("_check")) {
                return Err(Fail::Usage(format!("unknown lemma {lemma:?}; expected one of {}", CHECK_NAMES.join(", "))));
            }
            let r = with_path(&instance, run_check(&lemma, &read(&instance)?))?;
            Output::new(r.to_json(), to_value(&r)).ok(r.holds != Outcome::Fail)
        }
        Cmd::ScanConjecture { denominator, window, n } => {
            let cfg = ScanConfig {
                denominator,
                window,
                n,
                seed: g.seed,
                budget: g.budget,
            };
            let (records, summary) = conjecture_scan(&cfg)?;
            for r in records.iter().filter(|r| r.violation) {
                eprintln!("VIOLATION: {}", serde_json::to_string(r).expect("serializable"));
            }
            let mut lines: Vec<String> = records
                .iter()
                .map(|r| serde_json::to_string(r).expect("serializable"))
                .collect();
            let mut j = to_value(&summary);
            j["seed"] = json!(g.seed);
            lines.push(serde_json::to_string(&j).expect("serializable"));
            let mut o = Output::new(
                format!(
                    "mode = {}\ninstances = {}\nequalities = {}\nviolations = {}\nseed = {}\n{}",
                    to_value(&summary.mode).as_str().unwrap_or_default(),
                    summary.instances,
                    summary.equalities,
                    summary.violations,
                    g.seed,
                    summary.statement
                ),
                j,
            )
            .ok(summary.violations == 0);
            o.file_body = Some(lines.join("\n"));
            o
        }
        Cmd::Report { files } => run_report(&files)?,
    })
}

fn render(o: &Output, f: Format) -> Result<String, Fail> {
    Ok(match f {
        Format::Text => o.text.clone(),
        Format::Json => serde_json::to_string(&o.json).expect("serializable"),
        Format::Csv => o
            .csv
            .clone()
            .map(|s| s.trim_end().to_string())
            .ok_or_else(|| Fail::Usage("csv output is not available for this command".into()))?,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let global = cli.global.clone();
    if global.threads == 0 {
        eprintln!("error: --threads must be positive");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(global.threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = run(cli).and_then(|o| render(&o, global.format).map(|s| (s, o)));
    match result {
        Ok((body, o)) => {
            println!("{body}");
            if let Some(path) = &global.out {
                let file_body = o.file_body.as_deref().unwrap_or(&body);
                let written = fs::File::create(path).and_then(|mut f| writeln!(f, "{file_body}"));
                if let Err(e) = written {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if o.ok { 0 } else { 1 })
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
