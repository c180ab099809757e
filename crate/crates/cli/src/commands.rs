//! Command-line surface.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use knpoly::census::brute_gamma;
use knpoly::criteria::{
    chain_preset, classify_pair_cached, necessary_check, sieve_check, threshold_ineq7, threshold_smallq,
    CheckOutcome, ClassState, ClassifyOptions, LBound, PairContext, PairVerdict, SieveConfig, Status,
};
use knpoly::gfpoly::Poly;
use knpoly::numthy::{c_nu, Budget, PrimePower};
use knpoly::tower::FieldTower;
use knpoly::Error;

use crate::cache::{self, FileCache};
use crate::checkpoint::Checkpoint;
use crate::report::{write_csv, write_json, ReportRow};
use crate::scan::{run_scan, ScanJob};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_UNRESOLVED: i32 = 2;
pub const EXIT_EXCLUDED: i32 = 3;
pub const EXIT_INDETERMINATE: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CEILING: i32 = 65;

const DEFAULT_CEILING: u64 = 20_000_000;

#[derive(Parser, Debug)]
#[command(name = "knpoly", version, about = "Existence of r-primitive k-normal polynomials with prescribed trace and second coefficient")]
struct Cli {
    /// Factorization cache file (overrides KNPOLY_CACHE).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify one (q, n, r, k).
    Classify(ClassifyArgs),
    /// Classify every admissible pair of a range.
    Scan(ScanArgs),
    /// Exhaustive (Tr, Tr of the square) table on a small field.
    Brute(BruteArgs),
    /// Threshold formulas and bound-reduction chains.
    Threshold {
        #[command(subcommand)]
        mode: ThresholdMode,
    },
    /// Manage the factorization cache.
    Cache {
        #[command(subcommand)]
        op: CacheOp,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct BudgetArgs {
    /// Trial-division bound.
    #[arg(long, default_value_t = Budget::default().trial_bound)]
    budget_trial: u64,
    /// Pollard rho iteration cap per cofactor.
    #[arg(long, default_value_t = Budget::default().rho_iterations)]
    budget_rho: u64,
}

impl BudgetArgs {
    fn budget(self) -> Budget {
        Budget {
            trial_bound: self.budget_trial,
            rho_iterations: self.budget_rho,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct BruteFallback {
    /// Fall back to exhaustive search when q^n is at most --ceiling.
    #[arg(long)]
    brute: bool,
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    ceiling: u64,
}

impl BruteFallback {
    fn ceiling(self) -> Option<u64> {
        self.brute.then_some(self.ceiling)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 2)]
    r: u64,
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Use this degree-k divisor of x^n - 1 for its trace class.
    #[arg(long)]
    g: Option<String>,
    /// Replay: evaluate the sieve inequality for --g with this l (e.g. `6` or `6*C`).
    #[arg(long, requires_all = ["g", "sieve_f"])]
    sieve_l: Option<String>,
    /// Replay: the f polynomial of the configuration.
    #[arg(long, requires_all = ["g", "sieve_l"])]
    sieve_f: Option<String>,
    #[command(flatten)]
    fallback: BruteFallback,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ReportFormat {
    Csv,
    Json,
    Both,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Single q (sets both ends of the range).
    #[arg(long, conflicts_with_all = ["q_min", "q_max"])]
    q: Option<u64>,
    #[arg(long, default_value_t = 3)]
    q_min: u64,
    #[arg(long)]
    q_max: Option<u64>,
    /// Single n (sets both ends of the range).
    #[arg(long, conflicts_with_all = ["n_min", "n_max"])]
    n: Option<u32>,
    #[arg(long, default_value_t = 4)]
    n_min: u32,
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long, default_value_t = 2)]
    r: u64,
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Report path; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
    format: ReportFormat,
    /// Checkpoint file: resumed if present, kept up to date while scanning.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Record per-pair wall time in runtime_ms (makes reports run-dependent).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    fallback: BruteFallback,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug)]
struct BruteArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 2)]
    r: u64,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    ceiling: u64,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Subcommand, Debug)]
enum ThresholdMode {
    /// Bound on q beyond which every q works for this n.
    Ineq7 {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        n: u32,
    },
    /// Bound on n for q in {3, 5, 7, 9}.
    Smallq {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        nu: f64,
    },
    /// The constant C_nu.
    Cnu {
        #[arg(long)]
        nu: f64,
    },
    /// Iterated bound reduction for n in 9..=14.
    Reduce {
        #[arg(long)]
        n: u32,
        /// Sieving-prime form `modulus,residue` (residue must be 1).
        #[arg(long)]
        form: Option<String>,
        /// Starting nu for the initial bound.
        #[arg(long)]
        nu: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum CacheOp {
    /// Merge `N = p·q^e` lines from a file after validating them.
    Import { file: PathBuf },
    /// Write the cache in canonical order.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every entry of a cache file.
    Verify { file: Option<PathBuf> },
}

struct Ctx {
    cache_flag: Option<PathBuf>,
}

impl Ctx {
    fn cache_path(&self) -> Option<PathBuf> {
        cache::default_path(self.cache_flag.as_deref())
    }

    fn open_cache(&self) -> FileCache {
        match self.cache_path() {
            Some(path) => match FileCache::open(&path) {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("ignoring unreadable cache {}: {e:#}", path.display());
                    FileCache::in_memory()
                }
            },
            None => FileCache::in_memory(),
        }
    }
}

fn flush_cache(cache: &FileCache) {
    if let Err(e) = cache.flush() {
        log::warn!("could not write cache: {e:#}");
    }
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let ctx = Ctx { cache_flag: cli.cache };
    let result = match cli.command {
        Command::Classify(a) => classify(&ctx, a, out),
        Command::Scan(a) => scan(&ctx, a, out, err),
        Command::Brute(a) => brute(a, out),
        Command::Threshold { mode } => threshold(mode, out),
        Command::Cache { op } => cache_op(&ctx, op, out, err),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Code(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
        Err(CliError::Other(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

enum CliError {
    Usage(String),
    Code(i32, String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.into())
    }
}

type CliResult = Result<i32, CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn prime_power(q: u64) -> Result<PrimePower, CliError> {
    PrimePower::new(q).map_err(|e| match e {
        Error::EvenCharacteristic(_) => usage(format!("q = {q} is even; q must be an odd prime power")),
        other => usage(other),
    })
}

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::ProvenBaseline | Status::ProvenSieve | Status::VerifiedBrute => EXIT_OK,
        Status::Unresolved => EXIT_UNRESOLVED,
        Status::ExcludedNecessary => EXIT_EXCLUDED,
        Status::IndeterminateFactoring => EXIT_INDETERMINATE,
    }
}

fn render_verdict(v: &PairVerdict) -> String {
    let pp = PrimePower::new(v.q).expect("valid q");
    let mut s = format!(
        "q = {} (p = {}, m = {}), n = {}, r = {}, k = {}\nstatus: {}\n",
        v.q, pp.p, pp.m, v.n, v.r, v.k, v.status
    );
    if let Some(reason) = &v.reason {
        s.push_str(&format!("reason: {reason}\n"));
    }
    if let Some((lo, hi)) = v.omega {
        let state = if v.factor_complete { "complete".to_string() } else {
            format!("partial, cofactor {}", v.cofactor.as_deref().unwrap_or("?"))
        };
        s.push_str(&format!("omega(q^n - 1): {lo}..{hi} ({state})\n"));
    }
    if let Some(lhs) = v.lhs_ln {
        s.push_str(&format!("ln lhs: {lhs:.6}\n"));
    }
    if !v.classes.is_empty() {
        s.push_str(&format!("coverage: {}\n", v.coverage()));
    }
    for c in &v.classes {
        s.push_str(&format!("class {}: ", c.class.label()));
        match c.state {
            ClassState::Infeasible => {
                s.push_str(&format!("no degree-{} divisor serves this class\n", v.k));
                continue;
            }
            ClassState::Certified => s.push_str(&format!(
                "certified by {}\n",
                if c.method == Some(knpoly::criteria::Method::Baseline) { "baseline" } else { "sieve" }
            )),
            ClassState::Brute => s.push_str("verified exhaustively\n"),
            ClassState::Uncertified => s.push_str("not certified; best attempt\n"),
            ClassState::Indeterminate => s.push_str("indeterminate (incomplete factorization); best attempt\n"),
        }
        let opt = |x: &Option<String>| x.clone().unwrap_or_else(|| "-".into());
        let num = |x: Option<f64>| x.map_or("-".into(), |v| format!("{v:.6}"));
        s.push_str(&format!(
            "  g = {}\n  l = {}\n  f = {}\n  D = {}\n  S = {}\n  ln rhs = {}\n",
            opt(&c.g),
            opt(&c.l),
            opt(&c.f),
            num(c.d),
            num(c.s),
            num(c.rhs_ln)
        ));
        if let Some(w) = &c.witness {
            s.push_str(&format!("  witness = {w}\n"));
        }
        if !c.missing.is_empty() {
            let list: Vec<String> = c.missing.iter().map(|(a, b)| format!("({a},{b})")).collect();
            s.push_str(&format!("  no element for (a,b) = {}\n", list.join(" ")));
        }
    }
    s
}

fn classify(ctx: &Ctx, a: ClassifyArgs, out: &mut dyn Write) -> CliResult {
    let pp = prime_power(a.q)?;
    let cache = ctx.open_cache();
    if let (Some(l), Some(f), Some(g)) = (&a.sieve_l, &a.sieve_f, &a.g) {
        if let Err(reason) = necessary_check(pp, a.n, a.r, a.k) {
            writeln!(out, "status: EXCLUDED_NECESSARY\nreason: {reason}")?;
            return Ok(EXIT_EXCLUDED);
        }
        let pc = PairContext::with_cache(pp, a.n, a.r, a.k, a.budget.budget(), &cache);
        flush_cache(&cache);
        let poly = Poly::parse(g, &pc.field).map_err(usage)?;
        let div = pc.divisor_of(&poly).map_err(usage)?;
        let cfg = SieveConfig::parse(&pc, l, f).map_err(usage)?;
        let eval = sieve_check(&pc, &div, &cfg).map_err(usage)?;
        let outcome = match eval.outcome {
            CheckOutcome::Proven => "proven",
            CheckOutcome::NotProven => "not_proven",
            CheckOutcome::Indeterminate => "indeterminate",
        };
        if a.format == TextFormat::Json {
            let v = serde_json::json!({
                "q": a.q, "n": a.n, "r": a.r, "k": a.k, "g": g, "sieve_l": l, "sieve_f": f,
                "outcome": outcome,
                "D": num_traits::ToPrimitive::to_f64(&eval.d),
                "S": num_traits::ToPrimitive::to_f64(&eval.s),
                "lhs_log": eval.lhs_ln, "rhs_log": eval.rhs_ln,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        } else {
            writeln!(
                out,
                "replay q = {}, n = {}, r = {}, k = {}\n  g = {g}\n  l = {l}\n  f = {f}\n  D = {:.6}\n  S = {:.6}\n  ln lhs = {:.6}\n  ln rhs = {:.6}\noutcome: {outcome}",
                a.q,
                a.n,
                a.r,
                a.k,
                num_traits::ToPrimitive::to_f64(&eval.d).unwrap_or(f64::NAN),
                num_traits::ToPrimitive::to_f64(&eval.s).unwrap_or(f64::NAN),
                eval.lhs_ln,
                eval.rhs_ln
            )?;
        }
        return Ok(match eval.outcome {
            CheckOutcome::Proven => EXIT_OK,
            CheckOutcome::NotProven => EXIT_UNRESOLVED,
            CheckOutcome::Indeterminate => EXIT_INDETERMINATE,
        });
    }
    let g = match &a.g {
        Some(text) => {
            let field = knpoly::gfpoly::BaseField::new(pp);
            Some(Poly::parse(text, &field).map_err(usage)?)
        }
        None => None,
    };
    let opts = ClassifyOptions {
        budget: a.budget.budget(),
        brute_ceiling: a.fallback.ceiling(),
        g,
    };
    let verdict = classify_pair_cached(pp, a.n, a.r, a.k, &opts, &cache).map_err(usage)?;
    flush_cache(&cache);
    match a.format {
        TextFormat::Text => write!(out, "{}", render_verdict(&verdict))?,
        TextFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&verdict)?)?,
    }
    Ok(status_exit_code(verdict.status))
}

fn report_paths(out: &Path, format: ReportFormat) -> Vec<(PathBuf, ReportFormat)> {
    match format {
        ReportFormat::Both => vec![
            (out.with_extension("csv"), ReportFormat::Csv),
            (out.with_extension("json"), ReportFormat::Json),
        ],
        f => vec![(out.to_path_buf(), f)],
    }
}

fn check_writable(path: &Path) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !dir.is_dir() {
        return Err(CliError::Other(anyhow::anyhow!("output directory {} does not exist", dir.display())));
    }
    tempfile::NamedTempFile::new_in(dir)
        .map(drop)
        .map_err(|e| CliError::Other(anyhow::anyhow!("cannot write to {}: {e}", dir.display())))
}

fn scan(ctx: &Ctx, a: ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (q_min, q_max) = match a.q {
        Some(q) => {
            prime_power(q)?;
            (q, q)
        }
        None => (a.q_min, a.q_max.ok_or_else(|| usage("--q-max or --q is required"))?),
    };
    let (n_min, n_max) = match a.n {
        Some(n) => (n, n),
        None => (a.n_min, a.n_max.ok_or_else(|| usage("--n-max or --n is required"))?),
    };
    if a.r == 0 {
        return Err(usage("r must be positive"));
    }
    let job = ScanJob {
        q_min,
        q_max,
        n_min,
        n_max,
        r: a.r,
        k: a.k,
        budget: a.budget.budget(),
        brute_ceiling: a.fallback.ceiling(),
        jobs: a.jobs,
        timing: a.timing,
    };
    let targets = a.out.as_deref().map(|o| report_paths(o, a.format)).unwrap_or_default();
    for (path, _) in &targets {
        check_writable(path)?;
    }
    let mut checkpoint = match &a.resume {
        Some(path) => Some(Checkpoint::open(path, &job.id())?),
        None => None,
    };
    if let Some(cp) = &checkpoint {
        if !cp.is_empty() {
            log::info!("resuming with {} completed pairs", cp.len());
        }
    }
    let cache = ctx.open_cache();
    let outcome = run_scan(&job, &cache, checkpoint.as_mut())?;
    flush_cache(&cache);
    if targets.is_empty() {
        write_csv(&mut *out, &outcome.rows)?;
        write!(err, "{}", outcome.summary.render())?;
        return Ok(EXIT_OK);
    }
    for (path, format) in &targets {
        let mut buf = Vec::new();
        match format {
            ReportFormat::Json => write_json(&mut buf, &outcome.rows)?,
            _ => write_csv(&mut buf, &outcome.rows)?,
        }
        atomic_write(path, &buf)?;
    }
    let summary = outcome.summary.render();
    if let Some(o) = &a.out {
        atomic_write(&o.with_extension("summary.txt"), summary.as_bytes())?;
    }
    write!(out, "{summary}")?;
    Ok(EXIT_OK)
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| CliError::Other(e.into()))?;
    Ok(())
}

fn brute(a: BruteArgs, out: &mut dyn Write) -> CliResult {
    prime_power(a.q)?;
    let tower = match FieldTower::with_ceiling(a.q, a.n as usize, a.ceiling) {
        Ok(t) => t,
        Err(Error::CeilingExceeded { size, ceiling }) => {
            return Err(CliError::Code(
                EXIT_CEILING,
                format!("q^n = {size} exceeds the brute-force ceiling {ceiling}; rerun with --ceiling {size}"),
            ))
        }
        Err(e) => return Err(usage(e)),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Other(e.into()))?;
    let report = pool.install(|| brute_gamma(&tower, a.r, a.k as usize)).map_err(usage)?;
    match a.format {
        TextFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        TextFormat::Text => {
            let f = report.field();
            writeln!(
                out,
                "F_{{{}^{}}} = F_{}[x]/({}), r = {}, k = {}",
                a.q,
                a.n,
                a.q,
                report.modulus,
                a.r,
                a.k
            )?;
            writeln!(out, "a\tb\tcount\twitness")?;
            for e in &report.entries {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    f.format(e.a),
                    f.format(e.b),
                    e.count,
                    e.witness.as_deref().unwrap_or("-")
                )?;
            }
            let cov = |zero| if report.class_coverage(zero) { "full" } else { "partial" };
            writeln!(
                out,
                "coverage: all {}; a!=0 {}; a=0 {}",
                if report.full_coverage() { "yes" } else { "no" },
                cov(false),
                cov(true)
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn threshold(mode: ThresholdMode, out: &mut dyn Write) -> CliResult {
    match mode {
        ThresholdMode::Ineq7 { nu, n } => {
            let ln = threshold_ineq7(nu, n).map_err(usage)?;
            writeln!(out, "ineq7 nu = {nu} n = {n}\nbound: q > {} (ln {ln:.6})", fmt_ln(ln))?;
        }
        ThresholdMode::Smallq { q, nu } => {
            prime_power(q)?;
            let n = threshold_smallq(q, nu).map_err(usage)?;
            writeln!(out, "smallq q = {q} nu = {nu}\nholds for n >= {n}")?;
        }
        ThresholdMode::Cnu { nu } => {
            if !(nu > 0.0 && nu <= knpoly::numthy::MAX_NU) {
                return Err(usage(format!("nu = {nu} must lie in (0, {}]", knpoly::numthy::MAX_NU)));
            }
            writeln!(out, "cnu nu = {nu}\nC_nu = {:.6}", c_nu(nu))?;
        }
        ThresholdMode::Reduce { n, form, nu } => {
            let mut preset = chain_preset(n).ok_or_else(|| usage(format!("no reduction chain for n = {n} (supported: 9..=14)")))?;
            if let Some(form) = form {
                let (m, res) = form
                    .split_once(',')
                    .ok_or_else(|| usage("--form expects modulus,residue"))?;
                let m: u64 = m.trim().parse().map_err(usage)?;
                let res: u64 = res.trim().parse().map_err(usage)?;
                if res != 1 || m < 2 {
                    return Err(usage("only forms modulus,1 are supported"));
                }
                for s in &mut preset.stages {
                    s.modulus = m;
                }
            }
            if let Some(nu) = nu {
                preset.start_ln = threshold_ineq7(nu, n).map_err(usage)?;
            }
            writeln!(out, "reduce n = {n} start {}", fmt_ln(preset.start_ln))?;
            let mut last = preset.start_ln;
            for (i, stage) in preset.run().iter().enumerate() {
                let spec = &preset.stages[i];
                let l = match spec.l {
                    LBound::Degree(d) => format!("W(l) <= C_nu q^({d}/nu)"),
                    LBound::Fixed(w) => format!("W(l) <= {w}"),
                };
                writeln!(
                    out,
                    "stage {}: primes {}{} or 1 mod {}, cofactor degree {}, {l}",
                    i + 1,
                    spec.special.map_or(String::new(), |p| p.to_string()),
                    if spec.special.is_some() { "," } else { "" },
                    spec.modulus,
                    spec.cofactor_degree
                )?;
                for step in stage {
                    writeln!(
                        out,
                        "  {} (nu {}, s {}, S_s {:.6}, D {:.6}, S {:.4})",
                        fmt_ln(step.ln_bound),
                        step.nu.map_or("-".into(), |v| format!("{v:.1}")),
                        step.s,
                        step.inverse_sum,
                        step.d,
                        step.big_s
                    )?;
                    last = step.ln_bound;
                }
            }
            writeln!(out, "final: {}", fmt_ln(last))?;
        }
    }
    Ok(EXIT_OK)
}

fn fmt_ln(ln: f64) -> String {
    if ln < 700.0 {
        format!("{:.6e}", ln.exp())
    } else {
        let l10 = ln / std::f64::consts::LN_10;
        format!("{:.4}e{}", 10f64.powf(l10.fract()), l10.trunc())
    }
}

fn cache_op(ctx: &Ctx, op: CacheOp, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match op {
        CacheOp::Import { file } => {
            let text = fs::read_to_string(&file).map_err(|e| CliError::Other(anyhow::anyhow!("{}: {e}", file.display())))?;
            let path = ctx.cache_path().ok_or_else(|| usage("no cache path; pass --cache"))?;
            let cache = FileCache::open(&path)?;
            let summary = cache::import_text(&cache, &text);
            cache.flush()?;
            writeln!(out, "accepted {} entries into {}", summary.accepted, path.display())?;
            for (line, reason) in &summary.rejected {
                writeln!(err, "rejected {line}: {reason}")?;
            }
            Ok(if summary.rejected.is_empty() { EXIT_OK } else { EXIT_FAILURE })
        }
        CacheOp::Export { out: target } => {
            let cache = ctx.open_cache();
            let entries = cache.entries();
            let text = serde_json::to_string_pretty(&entries)? + "\n";
            match target {
                Some(p) => atomic_write(&p, text.as_bytes())?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        CacheOp::Verify { file } => {
            let path = file
                .or_else(|| ctx.cache_path())
                .ok_or_else(|| usage("no cache path; pass a file"))?;
            let (good, bad) = cache::verify_file(&path)?;
            writeln!(out, "{} valid entries, {} invalid", good, bad.len())?;
            for (e, reason) in &bad {
                writeln!(err, "invalid {}: {reason}", e.integer)?;
            }
            Ok(if bad.is_empty() { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

/// Rows rendered by [`ReportRow::from_verdict`] can be replayed through `classify`.
pub fn replay_args(row: &ReportRow, class_index: usize) -> Option<Vec<String>> {
    let g = if class_index == 0 { &row.g_nonzero_class } else { &row.g_zero_class };
    let l = row.sieve_l.split('|').nth(class_index)?;
    let f = row.sieve_f.split('|').nth(class_index)?;
    if g == "-" || l == "-" || f == "-" {
        return None;
    }
    Some(
        [
            "classify", "--q", &row.q.to_string(), "--n", &row.n.to_string(), "--r", &row.r.to_string(),
            "--k", &row.k.to_string(), "--g", g, "--sieve-l", l, "--sieve-f", f,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    )
}
