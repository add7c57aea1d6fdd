//! Command-line surface of the `ecs-diqkd` binary.
//!
//! Parsing happens in two steps. [`Cli`] is what clap sees; [`resolve`] merges
//! it with an optional JSON config file and validates everything, producing a
//! [`RunConfig`]. Only then does [`execute`] run any numerics.
//!
//! Exit codes: 0 success, 1 usage, 2 computation or I/O error, 3 verification
//! failure, 4 no crossover in the requested bracket.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::optimize::optimize_mu;
use crate::oracle::{OracleConfig, DEFAULT_N_MAX};
use crate::output::{write_csv, write_json};
use crate::params::{DetectorStats, ProtocolParams};
use crate::rates::{evaluate_bell, evaluate_ecs, plob_bound};
use crate::sweep::{find_crossover, find_crossovers, sweep_with_jobs, Crossover, MuMode, Protocol, SweepConfig};
use crate::verify::{closed_form, default_grid, verify, verify_with, VerifyPoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_NO_CROSSOVER: i32 = 4;

/// Size of the error added to `S` by the hidden `--inject-fault` hook.
pub const INJECTED_FAULT: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "ecs-diqkd",
    version,
    about = "Key rates for DIQKD with entangled coherent states"
)]
pub struct Cli {
    /// JSON file with default values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Statistics and key rates at a single point.
    Rates(RatesArgs),
    /// Rates over a distance grid, written as CSV or JSON.
    Sweep(SweepArgs),
    /// Compare the closed forms with the Fock-space oracle.
    Verify(VerifyArgs),
    /// Distance where two protocols' rates cross.
    Crossover(CrossoverArgs),
}

#[derive(Debug, Default, Args)]
pub struct ParamArgs {
    /// Coherent-state intensity.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Fiber loss in dB/km [default: 0.2].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Detector efficiency [default: 0.8].
    #[arg(long)]
    pub eta_d: Option<f64>,
    /// Dark-count probability [default: 1e-7].
    #[arg(long)]
    pub p_d: Option<f64>,
    /// Misalignment error [default: 0].
    #[arg(long)]
    pub e_d: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Alice–Bob distance in km [default: 0].
    #[arg(long)]
    pub distance: Option<f64>,
    /// Protocols to evaluate; repeat or comma-separate [default: ecs].
    #[arg(long = "protocol", value_enum, value_delimiter = ',')]
    pub protocols: Vec<Protocol>,
    /// Choose μ to maximize the ECS rate instead of taking --mu.
    #[arg(long)]
    pub optimize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Fixed μ for ECS; optimized per distance when absent.
    #[command(flatten)]
    pub params: ParamArgs,
    /// First distance in km [default: 0].
    #[arg(long)]
    pub l_min: Option<f64>,
    /// Last distance in km [default: 600].
    #[arg(long)]
    pub l_max: Option<f64>,
    /// Distance step in km [default: 5].
    #[arg(long)]
    pub l_step: Option<f64>,
    /// Protocols to include [default: ecs,bell,plob].
    #[arg(long = "protocol", value_enum, value_delimiter = ',')]
    pub protocols: Vec<Protocol>,
    /// Output encoding [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Grid point `mu,eta,p_d,e_d`; repeatable. The built-in grid is used when absent.
    #[arg(long = "point", value_parser = parse_point)]
    pub points: Vec<VerifyPoint>,
    /// Per-mode Fock cutoff [default: 30].
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Detector efficiency used by the literal e_zz reading [default: 0.8].
    #[arg(long)]
    pub eta_d: Option<f64>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Corrupt the closed-form S at this grid index (test hook).
    #[arg(long, hide = true)]
    pub inject_fault: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    /// First protocol.
    #[arg(value_enum)]
    pub first: Protocol,
    /// Second protocol.
    #[arg(value_enum)]
    pub second: Protocol,
    /// Bisect inside `lo,hi` (km). Without it, 0–600 km is scanned and
    /// every crossing is reported.
    #[arg(long, value_parser = parse_bracket)]
    pub bracket: Option<(f64, f64)>,
    #[command(flatten)]
    pub params: ParamArgs,
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(out)
}

fn parse_point(s: &str) -> std::result::Result<VerifyPoint, String> {
    let [mu, eta, p_d, e_d] = parse_floats::<4>(s)?;
    Ok(VerifyPoint::new(mu, eta, p_d, e_d))
}

fn parse_bracket(s: &str) -> std::result::Result<(f64, f64), String> {
    let [lo, hi] = parse_floats::<2>(s)?;
    Ok((lo, hi))
}

/// Contents of a `--config` file. Keys mirror the long flag names with
/// underscores; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub eta_d: Option<f64>,
    pub p_d: Option<f64>,
    pub e_d: Option<f64>,
    pub distance: Option<f64>,
    pub optimize: Option<bool>,
    pub l_min: Option<f64>,
    pub l_max: Option<f64>,
    pub l_step: Option<f64>,
    pub protocols: Option<Vec<Protocol>>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub n_max: Option<usize>,
    pub points: Option<Vec<[f64; 4]>>,
    pub bracket: Option<[f64; 2]>,
}

impl FileConfig {
    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

/// How the ECS intensity is chosen for `rates`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuChoice {
    Given(f64),
    Optimize,
    /// ECS not requested, so no intensity is needed.
    Unused,
}

/// A fully merged and validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Rates {
        params: ProtocolParams,
        mu: MuChoice,
        protocols: Vec<Protocol>,
    },
    Sweep {
        config: SweepConfig,
        format: Format,
        output: Option<PathBuf>,
        jobs: Option<usize>,
    },
    Verify {
        points: Vec<VerifyPoint>,
        oracle: OracleConfig,
        eta_d: f64,
        jobs: Option<usize>,
        inject_fault: Option<usize>,
    },
    Crossover {
        pair: (Protocol, Protocol),
        bracket: Option<(f64, f64)>,
        params: ProtocolParams,
    },
}

/// Range and step used by `crossover` when no bracket is given.
pub const CROSSOVER_SCAN: (f64, f64, f64) = (0.0, 600.0, 5.0);

fn merged_params(flags: &ParamArgs, file: &FileConfig, distance: Option<f64>) -> ProtocolParams {
    let d = ProtocolParams::default();
    ProtocolParams {
        mu: d.mu,
        beta_db_per_km: flags.beta.or(file.beta).unwrap_or(d.beta_db_per_km),
        eta_d: flags.eta_d.or(file.eta_d).unwrap_or(d.eta_d),
        p_d: flags.p_d.or(file.p_d).unwrap_or(d.p_d),
        e_d: flags.e_d.or(file.e_d).unwrap_or(d.e_d),
        distance_km: distance.or(file.distance).unwrap_or(d.distance_km),
    }
}

fn usage<T>(e: Error) -> std::result::Result<T, String> {
    Err(match e {
        Error::InvalidParams(msg) => msg,
        other => other.to_string(),
    })
}

fn check_jobs(jobs: Option<usize>) -> std::result::Result<Option<usize>, String> {
    match jobs {
        Some(0) => Err("--jobs must be at least 1".into()),
        j => Ok(j),
    }
}

/// Merges flags over the config file and validates the result. Errors are
/// usage messages.
pub fn resolve(cli: Cli) -> std::result::Result<RunConfig, String> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Rates(a) => {
            let mut params = merged_params(&a.params, &file, a.distance);
            let protocols = if !a.protocols.is_empty() {
                a.protocols
            } else {
                file.protocols.clone().unwrap_or_else(|| vec![Protocol::Ecs])
            };
            if protocols.is_empty() {
                return Err("at least one protocol is required".into());
            }
            if let Err(e) = params.validate_channel() {
                return usage(e);
            }
            let optimize = a.optimize || file.optimize.unwrap_or(false);
            let mu = if !protocols.contains(&Protocol::Ecs) {
                MuChoice::Unused
            } else if optimize {
                MuChoice::Optimize
            } else {
                match a.params.mu.or(file.mu) {
                    Some(mu) => {
                        params = params.with_mu(mu);
                        if let Err(e) = params.validate() {
                            return usage(e);
                        }
                        MuChoice::Given(mu)
                    }
                    None => return Err("--mu is required for the ecs protocol unless --optimize is given".into()),
                }
            };
            Ok(RunConfig::Rates { params, mu, protocols })
        }
        Command::Sweep(a) => {
            let base = merged_params(&a.params, &file, None);
            let defaults = SweepConfig::with_base(base);
            let config = SweepConfig {
                l_min_km: a.l_min.or(file.l_min).unwrap_or(defaults.l_min_km),
                l_max_km: a.l_max.or(file.l_max).unwrap_or(defaults.l_max_km),
                l_step_km: a.l_step.or(file.l_step).unwrap_or(defaults.l_step_km),
                base,
                mu_mode: a.params.mu.or(file.mu).map_or(MuMode::Optimized, MuMode::Fixed),
                protocols: if !a.protocols.is_empty() {
                    a.protocols
                } else {
                    file.protocols.clone().unwrap_or(defaults.protocols)
                },
            };
            if let Err(e) = config.validate() {
                return usage(e);
            }
            Ok(RunConfig::Sweep {
                config,
                format: a.format.or(file.format).unwrap_or(Format::Csv),
                output: a.output.or(file.output.clone()),
                jobs: check_jobs(a.jobs.or(file.jobs))?,
            })
        }
        Command::Verify(a) => {
            let points = if !a.points.is_empty() {
                a.points
            } else if let Some(p) = &file.points {
                p.iter()
                    .map(|&[mu, eta, p_d, e_d]| VerifyPoint::new(mu, eta, p_d, e_d))
                    .collect()
            } else {
                default_grid()
            };
            for p in &points {
                let ok = p.mu > 0.0
                    && p.mu.is_finite()
                    && p.eta > 0.0
                    && p.eta <= 1.0
                    && (0.0..1.0).contains(&p.p_d)
                    && (0.0..=0.5).contains(&p.e_d);
                if !ok {
                    return Err(format!("grid point out of range: {p}"));
                }
            }
            let n_max = a.n_max.or(file.n_max).unwrap_or(DEFAULT_N_MAX);
            if n_max == 0 {
                return Err("--n-max must be at least 1".into());
            }
            let eta_d = a.eta_d.or(file.eta_d).unwrap_or(ProtocolParams::default().eta_d);
            if !(eta_d > 0.0 && eta_d <= 1.0) {
                return Err(format!("eta_d must lie in (0, 1], got {eta_d}"));
            }
            if let Some(i) = a.inject_fault {
                if i >= points.len() {
                    return Err(format!("--inject-fault index {i} beyond {} grid points", points.len()));
                }
            }
            Ok(RunConfig::Verify {
                points,
                oracle: OracleConfig { n_max },
                eta_d,
                jobs: check_jobs(a.jobs.or(file.jobs))?,
                inject_fault: a.inject_fault,
            })
        }
        Command::Crossover(a) => {
            let params = merged_params(&a.params, &file, None);
            if let Err(e) = params.validate_channel() {
                return usage(e);
            }
            let bracket = a.bracket.or(file.bracket.map(|[lo, hi]| (lo, hi)));
            if let Some((lo, hi)) = bracket {
                if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                    return Err(format!("bracket must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"));
                }
            }
            if a.first == a.second {
                return Err("crossover needs two different protocols".into());
            }
            Ok(RunConfig::Crossover {
                pair: (a.first, a.second),
                bracket,
                params,
            })
        }
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParams(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn print_stats(out: &mut dyn Write, name: &str, mu: Option<f64>, stats: &DetectorStats, rate: f64) -> Result<()> {
    write!(out, "{name}:")?;
    if let Some(mu) = mu {
        write!(out, " mu={mu}")?;
    }
    writeln!(
        out,
        " q_zz={} s={} e_zz={} rate={rate}",
        stats.q_zz, stats.s, stats.e_zz
    )?;
    Ok(())
}

/// Runs a validated configuration and returns the exit code.
pub fn execute(run: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match run {
        RunConfig::Rates { params, mu, protocols } => {
            writeln!(out, "distance_km={} eta={}", params.distance_km, params.eta())?;
            for p in protocols {
                match p {
                    Protocol::Ecs => {
                        let params = match mu {
                            MuChoice::Given(mu) => params.with_mu(*mu),
                            _ => {
                                let best = optimize_mu(params.distance_km, params)?;
                                if best.zero_rate {
                                    writeln!(err, "note: no intensity gives a positive ECS rate here")?;
                                }
                                params.with_mu(best.mu)
                            }
                        };
                        let point = evaluate_ecs(&params)?;
                        print_stats(out, "ecs", Some(params.mu), &point.stats, point.rate)?;
                    }
                    Protocol::Bell => {
                        let point = evaluate_bell(params)?;
                        print_stats(out, "bell", None, &point.stats, point.rate)?;
                    }
                    Protocol::Plob => {
                        let bound = plob_bound(params.distance_km, params.beta_db_per_km, params.eta_d)?;
                        writeln!(out, "plob: rate={bound}")?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        RunConfig::Sweep {
            config,
            format,
            output,
            jobs,
        } => {
            let rows = sweep_with_jobs(config, jobs.unwrap_or_else(rayon::current_num_threads))?;
            let zero = rows.iter().filter(|r| r.zero_rate).count();
            if zero > 0 {
                writeln!(
                    err,
                    "note: {zero} distance(s) have no positive ECS rate for any intensity"
                )?;
            }
            let emit = |w: &mut dyn Write| -> Result<()> {
                match format {
                    Format::Csv => write_csv(&rows, w),
                    Format::Json => write_json(&rows, w),
                }
            };
            match output {
                Some(path) => {
                    let mut file = BufWriter::new(File::create(path)?);
                    emit(&mut file)?;
                    file.flush()?;
                }
                None => emit(out)?,
            }
            Ok(EXIT_OK)
        }
        RunConfig::Verify {
            points,
            oracle,
            eta_d,
            jobs,
            inject_fault,
        } => {
            let report = in_pool(*jobs, || match inject_fault {
                None => verify(points, oracle, *eta_d),
                Some(i) => {
                    let target = points[*i];
                    verify_with(points, oracle, *eta_d, |p| {
                        let mut stats = closed_form(p)?;
                        if *p == target {
                            stats.s += INJECTED_FAULT;
                        }
                        Ok(stats)
                    })
                }
            })?;
            write!(out, "{}", report.render())?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
        }
        RunConfig::Crossover { pair, bracket, params } => {
            let (a, b) = (pair.0.name(), pair.1.name());
            let (found, (lo, hi)) = match bracket {
                Some(br) => match find_crossover(*pair, params, *br)? {
                    Crossover::At(l) => (vec![l], *br),
                    Crossover::NoCrossover => (vec![], *br),
                },
                None => {
                    let (lo, hi, step) = CROSSOVER_SCAN;
                    (find_crossovers(*pair, params, (lo, hi), step)?, (lo, hi))
                }
            };
            if found.is_empty() {
                writeln!(out, "no crossover between {a} and {b} in [{lo}, {hi}] km")?;
                return Ok(EXIT_NO_CROSSOVER);
            }
            for l in found {
                writeln!(out, "crossover {a}/{b}: {l:.2} km")?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let run = match resolve(cli) {
        Ok(run) => run,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match execute(&run, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_COMPUTE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<RunConfig, String> {
        let mut full = vec!["ecs-diqkd"];
        full.extend_from_slice(args);
        resolve(Cli::try_parse_from(full).map_err(|e| e.to_string())?)
    }

    #[test]
    fn rates_needs_mu_for_ecs() {
        assert!(parse(&["rates"]).unwrap_err().contains("--mu"));
        assert!(matches!(
            parse(&["rates", "--optimize"]).unwrap(),
            RunConfig::Rates {
                mu: MuChoice::Optimize,
                ..
            }
        ));
        assert!(matches!(
            parse(&["rates", "--protocol", "plob"]).unwrap(),
            RunConfig::Rates {
                mu: MuChoice::Unused,
                ..
            }
        ));
    }

    #[test]
    fn flags_are_validated_before_running() {
        assert!(parse(&["rates", "--mu", "-1"]).is_err());
        assert!(parse(&["rates", "--mu", "0.1", "--eta-d", "1.5"]).is_err());
        assert!(parse(&["sweep", "--l-min", "10", "--l-max", "5"]).is_err());
        assert!(parse(&["sweep", "--jobs", "0"]).is_err());
        assert!(parse(&["verify", "--point", "0.1,2,0,0"]).is_err());
        assert!(parse(&["verify", "--point", "0.1,0.5"]).is_err());
        assert!(parse(&["crossover", "ecs", "ecs"]).is_err());
        assert!(parse(&["crossover", "ecs", "bell", "--bracket", "300,100"]).is_err());
    }

    #[test]
    fn protocol_lists_accept_commas_and_repeats() {
        let RunConfig::Sweep { config, .. } =
            parse(&["sweep", "--protocol", "ecs,plob", "--protocol", "bell"]).unwrap()
        else {
            panic!("expected sweep");
        };
        assert_eq!(config.protocols, vec![Protocol::Ecs, Protocol::Plob, Protocol::Bell]);
        assert_eq!(config.mu_mode, MuMode::Optimized);
    }

    #[test]
    fn verify_defaults_to_builtin_grid() {
        let RunConfig::Verify { points, oracle, .. } = parse(&["verify"]).unwrap() else {
            panic!("expected verify");
        };
        assert_eq!(points.len(), default_grid().len());
        assert_eq!(oracle.n_max, DEFAULT_N_MAX);
    }
}
