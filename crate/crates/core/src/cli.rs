//! Command-line front end. Exit codes: 0 success, 2 usage or input error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::density::{PullbackDensity, TargetDensity};
use crate::diagnostics::{audit_set, purity_stats};
use crate::error::{Error, Result};
use crate::ginibre::ginibre_sampleset;
use crate::hmc::{run_chains, HmcConfig};
use crate::io::{check_overwrite, read_set, read_weights, write_set, SetPaths};
use crate::povm::{Povm, CATALOG};
use crate::recipes::{family, reproduce, ReproduceOptions};
use crate::rng::{chain_rng, RESAMPLE_STREAM};
use crate::sample_set::SampleSet;
use crate::weights::{fiber_weights, resample, FiberSettings, WeightedSampleSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qsampling",
    version,
    about = "Sample quantum states from priors on POVM probabilities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run HMC chains for a POVM and prior.
    Sample(SampleArgs),
    /// Draw primitive-prior states directly from the Ginibre ensemble.
    Direct(DirectArgs),
    /// Resample a set with weights 1/range.
    Resample(ResampleArgs),
    /// Check every state's probabilities against a POVM's constraints.
    Audit(AuditArgs),
    /// Purity statistics and histogram.
    Stats(StatsArgs),
    /// List the POVM catalog or describe one POVM.
    Povm(PovmArgs),
    /// Generate one of the published sample families.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    #[arg(long, default_value_t = 1.0)]
    pub pvar: f64,
    #[arg(long, default_value_t = 0.1)]
    pub qvar: f64,
    #[arg(long, default_value_t = 10)]
    pub nint: usize,
    #[arg(long = "burn-in", default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Independent chains on separate streams; numstep is split between them.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}

#[derive(Debug, Args)]
pub struct FiberArgs {
    /// Ginibre draws in the two-qubit fiber-volume pool.
    #[arg(long = "fiber-draws", default_value_t = 100_000)]
    pub fiber_draws: usize,
    /// Initial bin half-width of the two-qubit fiber estimate.
    #[arg(long = "fiber-delta", default_value_t = 0.01)]
    pub fiber_delta: f64,
}

impl FiberArgs {
    fn settings(&self) -> FiberSettings {
        FiberSettings {
            draws: self.fiber_draws,
            delta: self.fiber_delta,
            ..FiberSettings::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub povm: String,
    /// prim, jeff or conj.
    #[arg(long)]
    pub prior: String,
    /// Conjugate exponents, comma separated (default all ones).
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1_000_000)]
    pub numstep: usize,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub fiber: FiberArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct DirectArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Range file; defaults to `<in>_range.txt`.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Output basename; defaults to `<in>_w`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub povm: String,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "hist-bins", default_value_t = 100)]
    pub hist_bins: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PovmArgs {
    /// A catalog name, or `list`.
    pub name: String,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    pub family: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub fiber: FiberArgs,
    #[arg(long)]
    pub force: bool,
}

impl TuningArgs {
    fn config(&self, numstep: usize, seed: u64) -> HmcConfig {
        HmcConfig {
            numstep,
            pvar: self.pvar,
            qvar: self.qvar,
            nint: self.nint,
            burn_in: self.burn_in,
            thin: self.thin,
            seed,
        }
    }
}

/// Six significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (program name first) and runs the command, writing reports to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn report_written(out: &mut dyn Write, paths: &SetPaths, has_range: bool) -> Result<()> {
    say(out, format!("wrote {}", paths.re.display()))?;
    say(out, format!("wrote {}", paths.im.display()))?;
    if has_range {
        say(out, format!("wrote {}", paths.range.display()))?;
    }
    say(out, format!("wrote {}", paths.meta.display()))
}

fn save(out: &mut dyn Write, set: &SampleSet, base: &Path, force: bool) -> Result<()> {
    let paths = write_set(set, base, force)?;
    report_written(out, &paths, set.weights().is_some())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Sample(a) => cmd_sample(a, out),
        Command::Direct(a) => {
            check_overwrite(&a.out, a.force)?;
            let set = ginibre_sampleset(a.d, a.n, a.seed)?;
            save(out, &set, &a.out, a.force)?;
            Ok(EXIT_OK)
        }
        Command::Resample(a) => cmd_resample(a, out),
        Command::Audit(a) => {
            let set = read_set(&a.input)?;
            let povm = Povm::by_name(&a.povm)?;
            let s = audit_set(&set, &povm)?;
            say(out, format!("samples {}", s.samples))?;
            say(out, format!("violations {}", s.violations))?;
            if let Some(label) = &s.worst_label {
                say(out, format!("worst {} ({label})", sci(s.worst)))?;
                return Ok(EXIT_NUMERIC);
            }
            Ok(EXIT_OK)
        }
        Command::Stats(a) => {
            let set = read_set(&a.input)?;
            let s = purity_stats(&set, a.hist_bins)?;
            say(out, format!("n {}", s.n))?;
            say(out, format!("purity_mean {}", sci(s.mean)))?;
            say(out, format!("purity_variance {}", sci(s.variance)))?;
            if let Some(csv) = a.csv {
                std::fs::write(&csv, s.histogram.to_csv()).map_err(|source| Error::Io {
                    path: csv.clone(),
                    source,
                })?;
                say(out, format!("wrote {}", csv.display()))?;
            }
            Ok(EXIT_OK)
        }
        Command::Povm(a) => cmd_povm(&a.name, out),
        Command::Reproduce(a) => cmd_reproduce(a, out),
    }
}

fn cmd_sample(a: SampleArgs, out: &mut dyn Write) -> Result<i32> {
    let povm = Povm::by_name(&a.povm)?;
    if povm.d() != a.d {
        return Err(Error::DimensionMismatch {
            expected: povm.d(),
            found: a.d,
        });
    }
    let target = TargetDensity::parse(&a.prior, a.beta, povm.len())?;
    check_overwrite(&a.out, a.force)?;
    let pd = PullbackDensity::new(povm.clone(), target)?;
    let cfg = a.tuning.config(a.numstep, a.seed);
    let mut set = run_chains(&cfg, &pd, None, a.tuning.chains)?;
    if !povm.is_ic() {
        let range = fiber_weights(&povm, &set, &a.fiber.settings(), a.seed)?;
        if povm.d() != 2 {
            set.meta.range = Some(a.fiber.settings().label());
            set.meta.experimental = Some(true);
        }
        set = set.with_weights(range)?;
    }
    say(
        out,
        format!("acceptrate {}", sci(set.meta.acceptrate.unwrap_or(0.0))),
    )?;
    save(out, &set, &a.out, a.force)?;
    Ok(EXIT_OK)
}

fn cmd_resample(a: ResampleArgs, out: &mut dyn Write) -> Result<i32> {
    let set = read_set(&a.input)?;
    let range = match &a.weights {
        Some(p) => read_weights(p)?,
        None => set
            .weights()
            .map(<[f64]>::to_vec)
            .ok_or(Error::Empty("range weights (pass --weights)"))?,
    };
    let base = a.out.unwrap_or_else(|| {
        let mut s = a.input.as_os_str().to_owned();
        s.push("_w");
        PathBuf::from(s)
    });
    check_overwrite(&base, a.force)?;
    let ws = WeightedSampleSet::from_range(set.without_weights(), &range)?;
    let mut rng = chain_rng(a.seed, RESAMPLE_STREAM);
    let mut res = resample(&ws, a.n, &mut rng)?;
    res.meta.seed = Some(a.seed);
    save(out, &res, &base, a.force)?;
    Ok(EXIT_OK)
}

fn cmd_povm(name: &str, out: &mut dyn Write) -> Result<i32> {
    if name == "list" {
        for n in CATALOG {
            say(out, n)?;
        }
        return Ok(EXIT_OK);
    }
    let p = Povm::by_name(name)?;
    say(out, format!("name {}", p.name()))?;
    say(out, format!("d {}", p.d()))?;
    say(out, format!("K {}", p.len()))?;
    say(out, format!("indep_dim {}", p.indep_dim()))?;
    say(out, format!("completeness {}", p.completeness()))?;
    say(
        out,
        format!("completeness_residual {}", sci(p.completeness_residual())),
    )?;
    for (k, o) in p.outcomes().iter().enumerate() {
        let row: Vec<String> = o
            .transpose()
            .iter()
            .map(|c| {
                let sign = if c.im.is_sign_negative() { "" } else { "+" };
                format!("{}{sign}{}i", sci(c.re), sci(c.im))
            })
            .collect();
        say(out, format!("outcome {} {}", k + 1, row.join(" ")))?;
    }
    Ok(EXIT_OK)
}

fn cmd_reproduce(a: ReproduceArgs, out: &mut dyn Write) -> Result<i32> {
    let fam = family(&a.family)?;
    check_overwrite(a.out_dir.join(fam.name), a.force)?;
    if fam.nic {
        check_overwrite(a.out_dir.join(format!("{}_w", fam.name)), a.force)?;
    }
    let opts = ReproduceOptions {
        n: a.n,
        seed: a.seed,
        hmc: a.tuning.config(a.n, a.seed),
        chains: a.tuning.chains,
        fiber: a.fiber.settings(),
    };
    let r = reproduce(fam, &opts)?;
    if let Some(rate) = r.set.meta.acceptrate {
        say(out, format!("acceptrate {}", sci(rate)))?;
    }
    save(out, &r.set, &a.out_dir.join(fam.name), a.force)?;
    if let Some(w) = &r.resampled {
        save(out, w, &a.out_dir.join(format!("{}_w", fam.name)), a.force)?;
    }
    Ok(EXIT_OK)
}
