//! `fdscb` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fdscb::fdata::{fmt_f64, read_sample_csv, write_sample_csv};
use fdscb::harness::{run_coverage_with_threads, threads_from_env, write_report, ExperimentConfig};
use fdscb::quantile::{estimate_quantile, QuantileMethod};
use fdscb::rng::{tags, StreamKey};
use fdscb::scb::{band_for_sample, gauss_test, BandConfig, GaussStatistic, GaussTestConfig, SeMode};
use fdscb::simmodels::{add_observation_noise, sample_model, ModelKind, ModelSpec};
use fdscb::transforms::{delta_residuals, Transformation};
use fdscb::verify::{run_oracle, OracleReport};
use fdscb::{Error, Grid};

#[derive(Parser)]
#[command(name = "fdscb", version, about = "Simultaneous confidence bands for moment-based statistics of functional data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from a simulation model and write it as CSV.
    Simulate {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        n: usize,
        /// Number of equispaced grid points on [0, 1].
        #[arg(long, default_value_t = 100)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Standard deviation of additive i.i.d. observation noise.
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a simultaneous confidence band from a sample CSV.
    Band {
        #[command(flatten)]
        common: StatArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate only the band quantile.
    Quantile {
        #[command(flatten)]
        common: StatArgs,
    },
    /// Test Gaussianity through skewness or kurtosis bands.
    GaussTest {
        #[command(flatten)]
        common: StatArgs,
        /// Write the result as CSV instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo coverage experiment from a config file.
    Coverage {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: FDSCB_THREADS or one per core).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run numerical oracles and emit a report CSV.
    Verify {
        #[arg(long, default_value = "all")]
        oracle: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StatArgs {
    /// Sample CSV: grid on the first line, one curve per following line.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    stat: String,
    #[arg(long, default_value = "mult")]
    method: QuantileMethod,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "estimated")]
    se_mode: SeMode,
    /// Subtract the plug-in bias estimate.
    #[arg(long)]
    bias: bool,
}

impl StatArgs {
    fn key(&self) -> StreamKey {
        StreamKey::new(self.seed, 0).derive(tags::BOOTSTRAP)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> fdscb::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> fdscb::Result<u8> {
    match command {
        Command::Simulate { model, n, t, seed, noise_sigma, out } => {
            let grid = Grid::unit(t)?;
            let key = StreamKey::new(seed, 0);
            let mut sample = sample_model(&ModelSpec::new(model), n, &grid, key)?;
            if noise_sigma > 0.0 {
                sample = add_observation_noise(&sample, noise_sigma, key)?;
            }
            write_sample_csv(&sample, &out)?;
            eprintln!("wrote {n} curves on {t} points to {}", out.display());
        }
        Command::Band { common, out } => {
            let sample = read_sample_csv(&common.input)?;
            let cfg = BandConfig {
                transform: Transformation::from_name(&common.stat, sample.n())?,
                method: common.method,
                alpha: common.alpha,
                se_mode: common.se_mode,
                bias_correct: common.bias,
                bootstrap: common.b,
                key: common.key(),
                fixed_quantile: None,
            };
            let (band, _) = band_for_sample(&sample, &cfg)?;
            let mut csv = String::from("s,center,lower,upper,q,method\n");
            for (i, s) in band.grid.points().iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    fmt_f64(*s),
                    fmt_f64(band.center.values()[i]),
                    fmt_f64(band.lower.values()[i]),
                    fmt_f64(band.upper.values()[i]),
                    fmt_f64(band.q.q),
                    band.q.method_name()
                );
            }
            std::fs::write(&out, csv)?;
            eprintln!("q = {:.6} ({}), band written to {}", band.q.q, band.q.method_name(), out.display());
        }
        Command::Quantile { common } => {
            let sample = read_sample_csv(&common.input)?;
            let t = Transformation::from_name(&common.stat, sample.n())?;
            let drs = delta_residuals(&t, &sample)?;
            let q = estimate_quantile(&drs, common.method, common.alpha, common.b, common.key())?;
            println!("method,alpha,q");
            println!("{},{},{}", q.method_name(), common.alpha, fmt_f64(q.q));
        }
        Command::GaussTest { common, out } => {
            let sample = read_sample_csv(&common.input)?;
            let cfg = GaussTestConfig {
                statistic: common.stat.parse::<GaussStatistic>()?,
                alpha: common.alpha,
                method: common.method,
                se_mode: common.se_mode,
                bias_correct: common.bias,
                bootstrap: common.b,
                key: common.key(),
            };
            let r = gauss_test(&sample, &cfg)?;
            let text = format!(
                "statistic,method,se_mode,alpha,max_stat,threshold,reject\n{},{},{},{},{},{},{}\n",
                r.statistic,
                common.method,
                common.se_mode,
                r.alpha,
                fmt_f64(r.max_stat),
                fmt_f64(r.threshold),
                r.reject
            );
            write_or_print(out.as_ref(), &text)?;
        }
        Command::Coverage { config, out, threads } => {
            let mut cfg = ExperimentConfig::from_file(&config).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("cannot read {}: {io}", config.display())),
                other => other,
            })?;
            if out.is_some() {
                cfg.output = out;
            }
            let threads = match threads {
                Some(0) => return Err(Error::Config("--threads must be positive".into())),
                Some(t) => Some(t),
                None => threads_from_env()?,
            };
            let report = run_coverage_with_threads(&cfg, threads)?;
            match &cfg.output {
                Some(path) => {
                    write_report(&report, path)?;
                    eprintln!("coverage report written to {}", path.display());
                }
                None => print!("{}", report.to_csv()),
            }
            for r in &report.rows {
                eprintln!("{} N={} coverage={:.4} ({:.1}s)", r.method, r.n, r.coverage, r.wall_time_s);
            }
        }
        Command::Verify { oracle, seed, out } => {
            let reports = run_oracle(&oracle, seed)?;
            let mut csv = format!("{}\n", OracleReport::CSV_HEADER);
            for r in &reports {
                csv.push_str(&r.csv_row());
                csv.push('\n');
            }
            write_or_print(out.as_ref(), &csv)?;
            let failed: Vec<_> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
            if !failed.is_empty() {
                eprintln!("failed oracles: {}", failed.join(", "));
                return Ok(2);
            }
        }
    }
    Ok(0)
}
