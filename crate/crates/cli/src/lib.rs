//! The `selfnorm` command line: tail-ratio tables, Monte Carlo sweeps,
//! mixing coefficients, continued-fraction dumps, bounds and confidence
//! intervals.
//!
//! [`dispatch`] takes an argument vector and returns the process exit status:
//! 0 on success, 1 for invalid input and 2 for failures while computing.

mod input;

use std::fs;
use std::path::PathBuf;
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selfnorm_core::blocks::{confidence_interval, interlaced_sums, plan_blocks, BlockSpec};
use selfnorm_core::bounds::{cmd_bound, fan_exp_bound, BoundConfig, IntervalSet};
use selfnorm_core::contfrac::{cf_digits, cf_series, digit_power, pi_grid_point, PiPrecision};
use selfnorm_core::engine::{
    paper_thresholds, run_cf_table, run_mc, run_mdp_sweep, CenterMode, CfTableConfig, Denominator,
    McConfig, MdpConfig, RatioTable,
};
use selfnorm_core::sources::{FiniteMarkovChain, MixingProfile, SourceSpec};
use selfnorm_core::Error;

#[derive(Parser)]
#[command(name = "selfnorm", version, about = "Self-normalized block sums: tables, sweeps and bounds")]
struct Cli {
    /// Worker threads (0 = all cores). Never changes the output.
    #[arg(long, global = true, env = "SELFNORM_THREADS", default_value_t = 0)]
    threads: usize,

    /// Write results here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tail-ratio table over continued-fraction digits of iπ/10000.
    Table(TableArgs),
    /// Monte Carlo tail ratios for a synthetic source.
    Mc(McArgs),
    /// Moderate-deviation sweep over sample sizes.
    Mdp(MdpArgs),
    /// ψ(n) of a finite Markov chain for n = 1..max-gap.
    Psi(PsiArgs),
    /// Continued-fraction digits of a grid point or rational.
    Cf(CfArgs),
    /// Confidence interval for the mean of a series.
    Ci(CiArgs),
    /// Evaluate the relative-error bound or the exponential inequality.
    Bound(BoundArgs),
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Block lengths.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
    m: Vec<usize>,
    /// Thresholds (default 0, 0.1, …, 1.0, 1.2, 1.4).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    grid_first: usize,
    #[arg(long, default_value_t = 3182)]
    grid_last: usize,
    /// Terms in the truncated digit mean.
    #[arg(long, default_value_t = 300)]
    mu_terms: u64,
    /// Digit exponent, as a decimal or a fraction like 1/3.
    #[arg(long, default_value = "1/3", value_parser = input::parse_real)]
    exponent: f64,
    #[arg(long, value_enum, default_value_t = PiDigits::D200)]
    pi_digits: PiDigits,
    /// Use ΣY² instead of Σ(Y - mμ)² in the denominator.
    #[arg(long)]
    uncentered: bool,
    /// Re-read a ratio-table CSV and re-emit it instead of computing.
    #[arg(long = "in", value_name = "PATH", conflicts_with_all = ["n", "m", "t", "uncentered"])]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PiDigits {
    #[value(name = "200")]
    D200,
    #[value(name = "300")]
    D300,
}

impl From<PiDigits> for PiPrecision {
    fn from(d: PiDigits) -> Self {
        match d {
            PiDigits::D200 => PiPrecision::Digits200,
            PiDigits::D300 => PiPrecision::Digits300,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    Normal,
    Zero,
    Ma,
    Chain,
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, value_enum, default_value_t = SourceKind::Normal)]
    source: SourceKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mean: f64,
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
    /// Moving-average weights.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    weights: Vec<f64>,
    /// Chain file (JSON).
    #[arg(long, value_name = "PATH")]
    chain: Option<PathBuf>,
    /// Full source description as JSON, overriding the flags above.
    #[arg(long, value_name = "PATH")]
    source_file: Option<PathBuf>,
}

impl SourceArgs {
    fn build(&self) -> Result<SourceSpec, CliError> {
        let spec = match self.source {
            _ if self.source_file.is_some() => {
                input::read_json(self.source_file.as_ref().expect("checked"))?
            }
            SourceKind::Normal => SourceSpec::Normal {
                mean: self.mean,
                sd: self.sd,
            },
            SourceKind::Zero => SourceSpec::Zero,
            SourceKind::Ma => SourceSpec::MovingAverage {
                weights: self.weights.clone(),
            },
            SourceKind::Chain => {
                let path = self
                    .chain
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("--source chain needs --chain PATH".into()))?;
                SourceSpec::Chain {
                    chain: input::read_json(path)?,
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Center {
    Raw,
    KnownMean,
    Studentized,
}

impl From<Center> for CenterMode {
    fn from(c: Center) -> Self {
        match c {
            Center::Raw => CenterMode::Raw,
            Center::KnownMean => CenterMode::KnownMean,
            Center::Studentized => CenterMode::Studentized,
        }
    }
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    n: usize,
    /// Block exponents (m = ⌊n^α⌋); may be combined with --m.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Explicit block lengths.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Thresholds (default 0, 0.1, …, 1.0, 1.2, 1.4).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    replicates: u64,
    /// First replicate id, for splitting a run into shards.
    #[arg(long, default_value_t = 0)]
    offset: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Center::KnownMean)]
    center: Center,
}

#[derive(Args)]
struct MdpArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    /// Scale a_n = n^power.
    #[arg(long, default_value_t = 0.1)]
    power: f64,
    /// Event set for W/a_n, e.g. "[1,inf)" or "(-inf,-1]U[1,inf)".
    #[arg(long, default_value = "[1,inf)", allow_hyphen_values = true)]
    set: String,
    #[arg(long, value_delimiter = ',', default_values_t = [1_000, 10_000, 100_000])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 20_000)]
    replicates: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Center::KnownMean)]
    center: Center,
}

#[derive(Args)]
struct PsiArgs {
    #[arg(long, value_name = "PATH")]
    chain: PathBuf,
    #[arg(long)]
    max_gap: usize,
}

#[derive(Args)]
struct CfArgs {
    /// Grid index i of iπ/10000.
    #[arg(long, required_unless_present = "x", conflicts_with = "x")]
    index: Option<usize>,
    /// A rational p/q in (0,1) instead of a grid point.
    #[arg(long)]
    x: Option<String>,
    #[arg(long, default_value_t = 30)]
    terms: usize,
    #[arg(long, default_value = "1/3", value_parser = input::parse_real)]
    exponent: f64,
    #[arg(long, value_enum, default_value_t = PiDigits::D200)]
    pi_digits: PiDigits,
}

#[derive(Args)]
struct CiArgs {
    /// One value per line, or a CSV with --column.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Column to read from a CSV with a header line.
    #[arg(long)]
    column: Option<String>,
    #[arg(long, conflicts_with = "m")]
    alpha: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    /// 1 - confidence level.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

#[derive(Args)]
struct BoundArgs {
    /// Exponential inequality exp(-C(β)(x/v)^{β/(β-1)}) instead of the
    /// relative-error bound.
    #[arg(long)]
    fan: bool,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, requires = "fan")]
    v: Option<f64>,
    #[arg(long, requires = "fan")]
    beta: Option<f64>,
    #[arg(long, conflicts_with = "fan")]
    n: Option<usize>,
    #[arg(long, conflicts_with = "fan")]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0, conflicts_with = "fan")]
    rho: f64,
    /// The unknown constant in front of the bound.
    #[arg(long, default_value_t = 1.0, conflicts_with = "fan")]
    c: f64,
    /// Assumed ψ(m) at the plan's block length (default: independence).
    #[arg(long, default_value_t = 0.0, conflicts_with = "fan")]
    psi: f64,
    /// Decimal places in CSV output.
    #[arg(long, default_value_t = 6)]
    precision: usize,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Io(s) => f.write_str(s),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("selfnorm: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Table(a) => table(a, cli)?,
        Command::Mc(a) => mc(a, cli)?,
        Command::Mdp(a) => mdp(a, cli)?,
        Command::Psi(a) => psi(a, cli.format)?,
        Command::Cf(a) => cf(a, cli.format)?,
        Command::Ci(a) => ci(a, cli.format)?,
        Command::Bound(a) => bound(a, cli.format)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_table(table: &RatioTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn thresholds(t: &[f64]) -> Vec<f64> {
    if t.is_empty() {
        paper_thresholds()
    } else {
        t.to_vec()
    }
}

fn table(a: &TableArgs, cli: &Cli) -> Result<String, CliError> {
    if let Some(path) = &a.input {
        let table = RatioTable::from_csv(&input::read_text(path)?)?;
        return Ok(emit_table(&table, cli.format));
    }
    let config = CfTableConfig {
        n: a.n,
        m_list: a.m.clone(),
        thresholds: thresholds(&a.t),
        grid: (a.grid_first, a.grid_last),
        mu_terms: a.mu_terms,
        exponent: a.exponent,
        precision: a.pi_digits.into(),
        denominator: if a.uncentered {
            Denominator::Uncentered
        } else {
            Denominator::Centered
        },
    };
    Ok(emit_table(&run_cf_table(&config, cli.threads)?, cli.format))
}

fn block_specs(alpha: &[f64], m: &[usize]) -> Result<Vec<BlockSpec>, CliError> {
    let specs: Vec<BlockSpec> = alpha
        .iter()
        .map(|&a| BlockSpec::Alpha(a))
        .chain(m.iter().map(|&m| BlockSpec::Length(m)))
        .collect();
    if specs.is_empty() {
        return Err(CliError::Usage("give at least one --alpha or --m".into()));
    }
    Ok(specs)
}

fn mc(a: &McArgs, cli: &Cli) -> Result<String, CliError> {
    let config = McConfig {
        source: a.source.build()?,
        n: a.n,
        blocks: block_specs(&a.alpha, &a.m)?,
        thresholds: thresholds(&a.t),
        replicates: a.replicates,
        replicate_offset: a.offset,
        seed: a.seed,
        center: a.center.into(),
    };
    Ok(emit_table(&run_mc(&config, cli.threads)?, cli.format))
}

fn mdp(a: &MdpArgs, cli: &Cli) -> Result<String, CliError> {
    let config = MdpConfig {
        source: a.source.build()?,
        alpha: a.alpha,
        power: a.power,
        set: a.set.parse::<IntervalSet>()?,
        n_list: a.n.clone(),
        replicates: a.replicates,
        seed: a.seed,
        center: a.center.into(),
    };
    let report = run_mdp_sweep(&config, cli.threads)?;
    Ok(match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    })
}

fn psi(a: &PsiArgs, format: Format) -> Result<String, CliError> {
    if a.max_gap == 0 {
        return Err(CliError::Usage("--max-gap must be at least 1".into()));
    }
    let chain: FiniteMarkovChain = input::read_json(&a.chain)?;
    let profile = MixingProfile::from_chain(&chain, 1..=a.max_gap)?;
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("gap,psi\n");
            for (n, v) in profile.iter() {
                out.push_str(&format!("{n},{v:?}\n"));
            }
            out
        }
        Format::Json => json_line(&profile),
    })
}

fn cf(a: &CfArgs, format: Format) -> Result<String, CliError> {
    let (x, zeta) = match (a.index, &a.x) {
        (Some(i), _) => {
            let precision = a.pi_digits.into();
            let x = pi_grid_point(i, precision)?;
            (x, Some(cf_series(i, a.terms, a.exponent, precision)?))
        }
        (None, Some(s)) => (input::parse_rational(s)?, None),
        (None, None) => unreachable!("clap requires --index or --x"),
    };
    let digits = cf_digits(&x, a.terms)?;
    let zeta = zeta.unwrap_or_else(|| {
        digits
            .to_f64()
            .into_iter()
            .map(|d| digit_power(d, a.exponent))
            .collect()
    });
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("i,digit,zeta\n");
            for (i, (d, z)) in digits.digits.iter().zip(&zeta).enumerate() {
                out.push_str(&format!("{},{d},{z:?}\n", i + 1));
            }
            out
        }
        Format::Json => json_line(&serde_json::json!({
            "x": x.to_string(),
            "digits": digits.digits.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "terminated": digits.terminated,
            "exponent": a.exponent,
            "zeta": zeta,
        })),
    })
}

fn ci(a: &CiArgs, format: Format) -> Result<String, CliError> {
    let text = input::read_text(&a.input)?;
    let series = match &a.column {
        Some(name) => input::csv_column(&text, name)?,
        None => input::value_lines(&text)?,
    };
    let spec = match (a.alpha, a.m) {
        (Some(alpha), _) => BlockSpec::Alpha(alpha),
        (None, Some(m)) => BlockSpec::Length(m),
        (None, None) => BlockSpec::Length(1),
    };
    let plan = plan_blocks(series.len(), spec)?;
    let sums = interlaced_sums(&series, &plan)?;
    let est = confidence_interval(&sums, a.delta)?;
    Ok(match format {
        Format::Csv => format!(
            "lo,hi,level,center,m,k\n{:?},{:?},{:?},{:?},{},{}\n",
            est.lo,
            est.hi,
            est.level,
            est.center(),
            plan.m(),
            plan.k()
        ),
        Format::Json => json_line(&serde_json::json!({
            "interval": est,
            "m": plan.m(),
            "k": plan.k(),
            "n": series.len(),
        })),
    })
}

fn bound(a: &BoundArgs, format: Format) -> Result<String, CliError> {
    let mut rows = Vec::with_capacity(a.x.len());
    if a.fan {
        let (v, beta) = a
            .v
            .zip(a.beta)
            .ok_or_else(|| CliError::Usage("--fan needs --v and --beta".into()))?;
        for &x in &a.x {
            rows.push((x, fan_exp_bound(x, v, beta)?, true));
        }
    } else {
        let (n, alpha) = a
            .n
            .zip(a.alpha)
            .ok_or_else(|| CliError::Usage("the relative-error bound needs --n and --alpha".into()))?;
        let m = plan_blocks(n, BlockSpec::Alpha(alpha))?.m();
        let cfg = BoundConfig {
            n,
            alpha,
            rho: a.rho,
            c: a.c,
            profile: MixingProfile::assumed([(m, a.psi)].into_iter().collect())?,
        };
        for &x in &a.x {
            let b = cmd_bound(x, &cfg)?;
            if !b.in_range {
                eprintln!(
                    "selfnorm: warning: x = {x} is outside the valid range [0, {})",
                    cfg.valid_range()
                );
            }
            rows.push((x, b.value, b.in_range));
        }
    }
    Ok(match format {
        Format::Csv => rows
            .iter()
            .map(|(_, v, _)| format!("{v:.*}\n", a.precision))
            .collect(),
        Format::Json => json_line(
            &rows
                .iter()
                .map(|(x, v, ok)| serde_json::json!({ "x": x, "bound": v, "in_range": ok }))
                .collect::<Vec<_>>(),
        ),
    })
}
