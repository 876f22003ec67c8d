//! Command-line front end for `framebridge`: generate frames, recover erased
//! coefficients by bridging or by inverting the partial reconstruction
//! operator, recover erased samples, and audit bridge matrices.
//!
//! All file indices are 1-based. Exit codes are listed in [`exit`].

pub mod exit;
pub mod formats;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use framebridge::sampling::{find_sampling_bridge, sinc};
use framebridge::spark_lab::{
    random_dual_pair, random_parseval, skew_spark_audit_with_budget, AuditEntry,
    DEFAULT_AUDIT_BUDGET,
};
use framebridge::{
    build_trig_scheme, build_truncated_shannon, find_bridge_set, fixtures, genericity_trial,
    reconstruct_via_inverse, recover_samples, solve_bridge, CVector, Complex64, DualFramePair,
    Field, IndexSet, SamplingScheme, Tolerance,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use exit::CliError;
use formats::{CoefficientFile, Exact, FrameFile, Role, SchemeFile};

#[derive(Debug, Parser)]
#[command(
    name = "framebridge",
    version,
    about = "Perfect reconstruction from frame coefficients with erasures"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true, default_value = "1e-10")]
    pub tol_rank: f64,
    /// Relative residual accepted as consistent.
    #[arg(long, global = true, default_value = "1e-9")]
    pub tol_residual: f64,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub json_report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dual frame pair and write PREFIX_F.json and PREFIX_G.json.
    Gen(GenArgs),
    /// Recover erased coefficients by bridging.
    Bridge(BridgeArgs),
    /// Recover erased coefficients through the inverse of the partial
    /// reconstruction operator.
    Invert(InvertArgs),
    /// Recover erased samples of a sampling scheme.
    Sample(SampleArgs),
    /// Skew-spark audits and genericity trials.
    Audit(AuditArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    RandomParseval,
    RandomDualPair,
    #[value(name = "paper-2d")]
    Paper2d,
    #[value(name = "example-3-3")]
    Example33,
    Mercedes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    #[value(name = "paper-2d")]
    Paper2d,
    #[value(name = "example-3-3")]
    Example33,
    Mercedes,
}

impl Fixture {
    fn name(self) -> &'static str {
        match self {
            Fixture::Paper2d => "paper-2d",
            Fixture::Example33 => "example-3-3",
            Fixture::Mercedes => "mercedes",
        }
    }

    fn pair(self) -> DualFramePair {
        match self {
            Fixture::Paper2d => fixtures::paper_2d(),
            Fixture::Example33 => fixtures::example_3_3(),
            Fixture::Mercedes => fixtures::mercedes(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

/// A 1-based index list such as `2,4`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexList(pub Vec<usize>);

fn index_list(s: &str) -> Result<IndexList, String> {
    formats::parse_index_list(s).map(IndexList)
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Space dimension n (random kinds).
    #[arg(short = 'n', long = "dim")]
    pub dim: Option<usize>,
    /// Number of frame vectors N (random kinds).
    #[arg(short = 'N', long = "size")]
    pub size: Option<usize>,
    #[arg(long, value_enum, default_value = "real")]
    pub field: FieldArg,
    /// Output prefix.
    #[arg(long, value_name = "PREFIX")]
    pub out: PathBuf,
}

/// Where a dual pair comes from: two frame files or a built-in fixture.
#[derive(Debug, Args)]
pub struct PairArgs {
    /// Synthesis frame file (F).
    #[arg(short = 'f', long, value_name = "PATH")]
    pub synthesis: Option<PathBuf>,
    /// Analysis frame file (G).
    #[arg(short = 'g', long, value_name = "PATH")]
    pub analysis: Option<PathBuf>,
    /// Built-in pair instead of frame files.
    #[arg(long, value_enum, conflicts_with_all = ["synthesis", "analysis"])]
    pub fixture: Option<Fixture>,
}

#[derive(Debug, Args)]
pub struct BridgeArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Erased indices; indices missing from the coefficient file are erased too.
    #[arg(long, value_parser = index_list, default_value = "")]
    pub erase: IndexList,
    /// Bridge set; chosen automatically when omitted.
    #[arg(long, value_parser = index_list)]
    pub bridge: Option<IndexList>,
    /// Known coefficients (CSV: index,re,im).
    #[arg(long, value_name = "PATH")]
    pub coefficients: PathBuf,
    /// Completed coefficients (CSV).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Erased indices; indices missing from the coefficient file are erased too.
    #[arg(long, value_parser = index_list, default_value = "")]
    pub erase: IndexList,
    /// Known coefficients (CSV: index,re,im).
    #[arg(long, value_name = "PATH")]
    pub coefficients: PathBuf,
    /// Completed coefficients (CSV).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    /// Trigonometric polynomials of dimension n sampled at k/N.
    Trig,
    /// Shannon sampling on pZ truncated to -K..=K.
    Shannon,
    /// A scheme file written by --scheme-out.
    File,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(value_enum)]
    pub scheme: SchemeArg,
    /// Space dimension n (`trig`).
    #[arg(short = 'n', long = "dim")]
    pub dim: Option<usize>,
    /// Number of samples N (`trig`).
    #[arg(short = 'N', long = "size")]
    pub size: Option<usize>,
    /// Shannon spacing p in (0, 1].
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Shannon truncation half-width K.
    #[arg(long)]
    pub half_width: Option<usize>,
    /// Scheme file for `file`.
    #[arg(long, value_name = "PATH")]
    pub scheme_file: Option<PathBuf>,
    /// Erased sample positions (1-based, in point order).
    #[arg(long, value_parser = index_list, default_value = "")]
    pub erase: IndexList,
    /// Bridge positions; chosen nearest first when omitted.
    #[arg(long, value_parser = index_list)]
    pub bridge: Option<IndexList>,
    /// Known samples (CSV: index,re,im). Without it a test function is
    /// sampled: a seeded random member for `trig`, sinc²(π(t − 0.3)/2) for
    /// `shannon`.
    #[arg(long, value_name = "PATH")]
    pub samples: Option<PathBuf>,
    /// Completed samples (CSV).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write the scheme (kind, points, value table) as JSON.
    #[arg(long, value_name = "PATH")]
    pub scheme_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(subcommand)]
    pub mode: AuditMode,
}

#[derive(Debug, Subcommand)]
pub enum AuditMode {
    /// Check every bridge matrix with |Λ| = |Ω| ≤ k for invertibility.
    SkewSpark {
        #[command(flatten)]
        pair: PairArgs,
        /// Largest level; defaults to min{n, N − n, ⌊N/2⌋}.
        #[arg(short = 'k', long)]
        k: Option<usize>,
        /// Maximum number of bridge matrices examined.
        #[arg(long, default_value_t = DEFAULT_AUDIT_BUDGET)]
        budget: u64,
    },
    /// Audit random full-spark frames with random duals; writes one CSV row
    /// per trial.
    Genericity {
        /// Space dimension n.
        #[arg(short = 'n', long = "dim")]
        dim: usize,
        /// Number of frame vectors N.
        #[arg(short = 'N', long = "size")]
        size: usize,
        /// Audit level.
        #[arg(short = 'k', long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        /// Per-trial results (CSV).
        #[arg(long, value_name = "PATH")]
        csv: PathBuf,
    },
}

/// A finished command: its JSON report and exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self {
            report,
            code: exit::SUCCESS,
        }
    }
}

/// Parses `args`, runs the command, emits the report and returns the exit
/// code. Diagnostics go to `stderr`.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
        }
    };
    let (report, code) = match run(&cli) {
        Ok(outcome) => (outcome.report, outcome.code),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            let report = json!({
                "command": command_name(&cli.command),
                "error": { "code": e.code(), "message": e.to_string() },
            });
            (report, e.code())
        }
    };
    if code == exit::BUDGET_EXCEEDED {
        let _ = writeln!(
            stderr,
            "warning: audit budget exceeded; the report covers completed levels only"
        );
    }
    if let Err(e) = emit_report(&report, cli.global.json_report.as_deref(), stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return exit::FAILURE;
    }
    code
}

fn emit_report(
    report: &Value,
    path: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(report).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => formats::write_text(p, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gen(_) => "gen",
        Command::Bridge(_) => "bridge",
        Command::Invert(_) => "invert",
        Command::Sample(_) => "sample",
        Command::Audit(_) => "audit",
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let tol = Tolerance::new(cli.global.tol_rank, cli.global.tol_residual)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = cli.global.seed;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, seed, &tol),
        Command::Bridge(a) => cmd_bridge(a, &tol),
        Command::Invert(a) => cmd_invert(a, &tol),
        Command::Sample(a) => cmd_sample(a, seed, &tol),
        Command::Audit(a) => cmd_audit(a, seed, &tol),
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn sizes(dim: Option<usize>, size: Option<usize>, what: &str) -> Result<(usize, usize), CliError> {
    match (dim, size) {
        (Some(n), Some(big_n)) if n >= 1 && big_n >= n => Ok((n, big_n)),
        (Some(n), Some(big_n)) => Err(CliError::Usage(format!(
            "{what} needs 1 <= n <= N, got n={n}, N={big_n}"
        ))),
        _ => Err(CliError::Usage(format!("{what} needs --dim and --size"))),
    }
}

pub fn cmd_gen(a: &GenArgs, seed: u64, tol: &Tolerance) -> Result<Outcome, CliError> {
    let random = matches!(a.kind, GenKind::RandomParseval | GenKind::RandomDualPair);
    if !random && (a.dim.is_some() || a.size.is_some()) {
        return Err(CliError::Usage(
            "fixtures have fixed sizes; drop --dim/--size".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = match a.kind {
        GenKind::RandomParseval => {
            let (n, big_n) = sizes(a.dim, a.size, "random-parseval")?;
            let f = random_parseval(n, big_n, a.field.into(), &mut rng)?;
            DualFramePair::new(f.clone(), f, tol)?
        }
        GenKind::RandomDualPair => {
            let (n, big_n) = sizes(a.dim, a.size, "random-dual-pair")?;
            random_dual_pair(n, big_n, a.field.into(), &mut rng, tol)?
        }
        GenKind::Paper2d => fixtures::paper_2d(),
        GenKind::Example33 => fixtures::example_3_3(),
        GenKind::Mercedes => fixtures::mercedes(),
    };
    let f_path = suffixed(&a.out, "_F.json");
    let g_path = suffixed(&a.out, "_G.json");
    FrameFile::from_frame(pair.synthesis(), Some(Role::Synthesis)).write(&f_path)?;
    FrameFile::from_frame(pair.analysis(), Some(Role::Analysis)).write(&g_path)?;
    Ok(Outcome::ok(json!({
        "command": "gen",
        "kind": a.kind.to_possible_value().map(|v| v.get_name().to_string()),
        "dim": pair.dim(),
        "size": pair.len(),
        "seed": seed,
        "files": { "synthesis": f_path, "analysis": g_path },
        "duality_residual": pair.duality_residual(),
    })))
}

fn load_frame(path: &Path, expected: Role) -> Result<framebridge::Frame, CliError> {
    let file = FrameFile::read(path)?;
    if let Some(role) = file.role {
        if role != expected {
            return Err(CliError::Input(format!(
                "{} is tagged as a {role} frame but was passed as the {expected} frame",
                path.display()
            )));
        }
    }
    file.to_frame()
}

/// The pair and a label for reports.
pub fn load_pair(a: &PairArgs, tol: &Tolerance) -> Result<(DualFramePair, String), CliError> {
    if let Some(fixture) = a.fixture {
        return Ok((fixture.pair(), fixture.name().to_string()));
    }
    match (&a.synthesis, &a.analysis) {
        (Some(f), Some(g)) => {
            let pair = DualFramePair::new(
                load_frame(f, Role::Synthesis)?,
                load_frame(g, Role::Analysis)?,
                tol,
            )?;
            Ok((pair, format!("{} / {}", f.display(), g.display())))
        }
        _ => Err(CliError::Usage(
            "give --synthesis and --analysis, or --fixture".into(),
        )),
    }
}

fn one_based_set(universe: usize, indices: &[usize], what: &str) -> Result<IndexSet, CliError> {
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > universe) {
        return Err(CliError::Usage(format!(
            "{what} index {bad} out of range 1..={universe}"
        )));
    }
    Ok(IndexSet::one_based(universe, indices)?)
}

/// `--erase` together with every index absent from the coefficient file.
fn erasure_set(
    universe: usize,
    erase: &IndexList,
    known: &CoefficientFile,
) -> Result<IndexSet, CliError> {
    let mut all = erase.0.clone();
    all.extend((1..=universe).filter(|j| !known.values.contains_key(j)));
    all.sort_unstable();
    all.dedup();
    one_based_set(universe, &all, "erasure")
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn vector_json(v: &CVector) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

fn recovered_json(erased: &IndexSet, values: &CVector) -> Value {
    Value::Array(
        erased
            .iter()
            .zip(values.iter())
            .map(|(j, &z)| json!({ "index": j + 1, "value": complex_json(z) }))
            .collect(),
    )
}

/// The input coefficients with the recovered ones filled in.
fn completed(
    universe: usize,
    known: &[Option<Complex64>],
    erased: &IndexSet,
    recovered: &CVector,
) -> CoefficientFile {
    let mut full: Vec<Complex64> = known
        .iter()
        .map(|z| z.unwrap_or(Complex64::new(0.0, 0.0)))
        .collect();
    for (j, &z) in erased.iter().zip(recovered.iter()) {
        full[j] = z;
    }
    debug_assert_eq!(full.len(), universe);
    CoefficientFile::complete(full)
}

fn write_out(out: &Option<PathBuf>, file: &CoefficientFile) -> Result<Value, CliError> {
    match out {
        Some(p) => {
            file.write(p)?;
            Ok(json!(p))
        }
        None => Ok(Value::Null),
    }
}

pub fn cmd_bridge(a: &BridgeArgs, tol: &Tolerance) -> Result<Outcome, CliError> {
    let (pair, id) = load_pair(&a.pair, tol)?;
    let big_n = pair.len();
    let input = CoefficientFile::read(&a.coefficients)?;
    let known = input.to_erased(big_n)?;
    let erased = erasure_set(big_n, &a.erase, &input)?;
    let known: Vec<Option<Complex64>> = known
        .iter()
        .enumerate()
        .map(|(j, z)| if erased.contains(j) { None } else { *z })
        .collect();
    let minimal_redundancy = pair.analysis().minimal_redundancy(&erased, tol);

    let plan = match &a.bridge {
        Some(list) => {
            let bridge = one_based_set(big_n, &list.0, "bridge")?;
            let plan = solve_bridge(&pair, &erased, &bridge, tol)?;
            if !plan.is_robust() {
                let diagnosis = if minimal_redundancy {
                    "minimal redundancy holds, so some other bridge set is robust"
                } else {
                    "minimal redundancy fails, so no bridge set is robust"
                };
                return Err(CliError::NoRobustBridge(format!(
                    "bridge set {bridge} is not robust for erasures {erased} (residual {:e}); \
                     {diagnosis}",
                    plan.residual()
                )));
            }
            plan
        }
        None => find_bridge_set(&pair, &erased, tol, erased.len())?,
    };
    let report = plan.reconstruct_vector(&known)?;
    let out = completed(big_n, &known, &erased, &report.recovered_coefficients);
    let out_path = write_out(&a.out, &out)?;
    Ok(Outcome::ok(json!({
        "command": "bridge",
        "pair": id,
        "erased": erased.to_one_based(),
        "bridge": plan.bridge().to_one_based(),
        "robust": plan.is_robust(),
        "minimal_redundancy": minimal_redundancy,
        "bridging_residual": plan.residual(),
        "perpendicularity_defect": plan.perpendicularity_defect(),
        "recovered": recovered_json(&erased, &report.recovered_coefficients),
        "recovered_vector": report.recovered_vector.as_ref().map(vector_json),
        "partial": vector_json(&report.partial),
        "supplement": report.supplement.as_ref().map(vector_json),
        "bridged_estimate": report.bridged_estimate.as_ref().map(vector_json),
        "reduced_error": report.reduced_error.as_ref().map(vector_json),
        "out": out_path,
    })))
}

pub fn cmd_invert(a: &InvertArgs, tol: &Tolerance) -> Result<Outcome, CliError> {
    let (pair, id) = load_pair(&a.pair, tol)?;
    let big_n = pair.len();
    let input = CoefficientFile::read(&a.coefficients)?;
    let known = input.to_erased(big_n)?;
    let erased = erasure_set(big_n, &a.erase, &input)?;
    let known: Vec<Option<Complex64>> = known
        .iter()
        .enumerate()
        .map(|(j, z)| if erased.contains(j) { None } else { *z })
        .collect();
    let report = reconstruct_via_inverse(&pair, &erased, &known, tol)?;
    let out = completed(big_n, &known, &erased, &report.recovered_coefficients);
    let out_path = write_out(&a.out, &out)?;
    Ok(Outcome::ok(json!({
        "command": "invert",
        "pair": id,
        "erased": erased.to_one_based(),
        "recovered": recovered_json(&erased, &report.recovered_coefficients),
        "recovered_vector": report.recovered_vector.as_ref().map(vector_json),
        "partial": vector_json(&report.partial),
        "out": out_path,
    })))
}

fn shannon_test_function(t: f64) -> f64 {
    let s = sinc(std::f64::consts::PI * (t - 0.3) / 2.0);
    s * s
}

fn build_scheme(a: &SampleArgs) -> Result<SamplingScheme, CliError> {
    match a.scheme {
        SchemeArg::Trig => {
            let (n, big_n) = sizes(a.dim, a.size, "trig")?;
            Ok(build_trig_scheme(n, big_n)?)
        }
        SchemeArg::Shannon => {
            let p = a
                .spacing
                .ok_or(CliError::Usage("shannon needs --spacing".into()))?;
            let k = a
                .half_width
                .ok_or(CliError::Usage("shannon needs --half-width".into()))?;
            if !(p > 0.0 && p <= 1.0) || k == 0 {
                return Err(CliError::Usage(format!(
                    "shannon needs 0 < p <= 1 and K >= 1, got p={p}, K={k}"
                )));
            }
            Ok(build_truncated_shannon(p, k)?)
        }
        SchemeArg::File => {
            let path = a
                .scheme_file
                .as_ref()
                .ok_or(CliError::Usage("file needs --scheme-file".into()))?;
            SchemeFile::read(path)?.to_scheme()
        }
    }
}

/// Samples of the built-in test function, when the scheme has one.
fn test_samples(scheme: &SamplingScheme, kind: SchemeArg, seed: u64) -> Option<CVector> {
    match kind {
        SchemeArg::Trig => {
            let pair = scheme.induced_pair()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = CVector::from_fn(pair.dim(), |_, _| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            });
            pair.analysis().analysis(&a).ok()
        }
        SchemeArg::Shannon => Some(CVector::from_iterator(
            scheme.len(),
            scheme
                .points()
                .iter()
                .map(|p| Complex64::new(shannon_test_function(p.t()), 0.0)),
        )),
        SchemeArg::File => None,
    }
}

pub fn cmd_sample(a: &SampleArgs, seed: u64, tol: &Tolerance) -> Result<Outcome, CliError> {
    let scheme = build_scheme(a)?;
    if let Some(p) = &a.scheme_out {
        SchemeFile::from_scheme(&scheme).write(p)?;
    }
    let big_n = scheme.len();
    let (input, reference) = match &a.samples {
        Some(p) => (CoefficientFile::read(p)?, None),
        None => {
            let s = test_samples(&scheme, a.scheme, seed)
                .ok_or(CliError::Usage("file schemes need --samples".into()))?;
            (CoefficientFile::complete(s.iter().copied()), Some(s))
        }
    };
    let known = input.to_erased(big_n)?;
    let erased = erasure_set(big_n, &a.erase, &input)?;
    let known: Vec<Option<Complex64>> = known
        .iter()
        .enumerate()
        .map(|(j, z)| if erased.contains(j) { None } else { *z })
        .collect();
    let bridge = match &a.bridge {
        Some(list) => one_based_set(big_n, &list.0, "bridge")?,
        None => find_sampling_bridge(&scheme, &erased, tol)?,
    };
    let rec = recover_samples(&scheme, &erased, &bridge, &known, tol)?;
    let out = completed(big_n, &known, &erased, &rec.values);
    let out_path = write_out(&a.out, &out)?;
    let max_error = reference.as_ref().map(|r| {
        erased
            .iter()
            .zip(rec.values.iter())
            .map(|(j, v)| (v - r[j]).norm())
            .fold(0.0, f64::max)
    });
    let points: Vec<Value> = erased
        .iter()
        .zip(rec.values.iter())
        .map(|(j, &z)| {
            json!({
                "index": j + 1,
                "t": scheme.points()[j].t(),
                "value": complex_json(z),
                "expected": reference.as_ref().map(|r| complex_json(r[j])),
            })
        })
        .collect();
    Ok(Outcome::ok(json!({
        "command": "sample",
        "scheme": scheme.kind().as_str(),
        "space_dim": scheme.space_dim(),
        "points": big_n,
        "erased": erased.to_one_based(),
        "bridge": rec.bridge.to_one_based(),
        "bridging_residual": rec.residual,
        "recovered": points,
        "max_abs_error": max_error,
        "truncation_indicator": rec.truncation_indicator,
        "out": out_path,
        "scheme_out": a.scheme_out,
    })))
}

fn entry_json(e: &AuditEntry) -> Value {
    json!({
        "erased": e.erased.to_one_based(),
        "bridge": e.bridge.to_one_based(),
        "rank": e.rank,
        "condition": finite_or_null(e.condition),
    })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn cmd_audit(a: &AuditArgs, seed: u64, tol: &Tolerance) -> Result<Outcome, CliError> {
    match &a.mode {
        AuditMode::SkewSpark { pair, k, budget } => {
            let (pair, id) = load_pair(pair, tol)?;
            let bound = framebridge::erasure_size_bound(pair.dim(), pair.len());
            let k = k.unwrap_or(bound);
            if k == 0 {
                return Err(CliError::Usage("audit level k must be positive".into()));
            }
            let mut report = skew_spark_audit_with_budget(&pair, k, *budget, tol);
            report.pair_id = id;
            let value = json!({
                "command": "audit",
                "mode": "skew-spark",
                "pair_id": report.pair_id,
                "k_requested": k,
                "k_checked": report.k_checked,
                "skew_spark": report.skew_spark,
                "bound": report.bound,
                "full": report.full,
                "complete": report.complete,
                "matrices_checked": report.matrices_checked,
                "worst_condition": finite_or_null(report.worst_condition),
                "failures": report.failures.iter().map(entry_json).collect::<Vec<_>>(),
                "near_singular": report.near_singular.iter().map(entry_json).collect::<Vec<_>>(),
            });
            Ok(Outcome {
                report: value,
                code: if report.complete {
                    exit::SUCCESS
                } else {
                    exit::BUDGET_EXCEEDED
                },
            })
        }
        AuditMode::Genericity {
            dim,
            size,
            k,
            trials,
            field,
            csv,
        } => {
            let stats = genericity_trial(*dim, *size, *trials, *k, seed, (*field).into(), tol)
                .map_err(|e| match e {
                    framebridge::Error::InvalidArgument(m) => CliError::Usage(m),
                    other => other.into(),
                })?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .write_record(["trial", "n", "N", "k", "failures", "worst_condition"])
                .map_err(|e| CliError::Internal(e.to_string()))?;
            for r in &stats.records {
                writer
                    .write_record([
                        r.trial.to_string(),
                        r.n.to_string(),
                        r.big_n.to_string(),
                        r.k.to_string(),
                        r.failures.to_string(),
                        Exact(r.worst_condition).to_string(),
                    ])
                    .map_err(|e| CliError::Internal(e.to_string()))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            formats::write_text(csv, &String::from_utf8_lossy(&bytes))?;
            Ok(Outcome::ok(json!({
                "command": "audit",
                "mode": "genericity",
                "n": dim,
                "N": size,
                "k": k,
                "trials": trials,
                "seed": seed,
                "failure_frequency": stats.failure_frequency,
                "worst_condition": finite_or_null(stats.worst_condition),
                "csv": csv,
            })))
        }
    }
}
