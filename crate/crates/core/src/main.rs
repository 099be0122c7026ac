use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cat0_boundary::error::{Error, Result};
use cat0_boundary::report::{
    cmd_bounds, cmd_check_star, cmd_limits, cmd_phibar, cmd_probe, cmd_report, error_exit_code, CommandReport, RunConfig,
    PROBE_KINDS,
};

#[derive(Parser)]
#[command(name = "cat0-boundary", version, about = "Boundary maps between actions of F2 x Z on T x R")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit limits of (a^i b^i, 0) and (a^i, 0) under both actions.
    Limits(Common),
    /// Condition (*) on a ball of G.
    CheckStar(Common),
    /// The boundary map on given or sampled boundary points.
    Phibar(Common),
    /// Quantitative bounds along approximating sequences.
    Bounds {
        #[arg(long, default_value = "lemma25")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Continuity, equivariance, injectivity, surjectivity or well-definedness probes.
    Probe {
        /// Probe kind; repeat or pass `all`.
        #[arg(long, default_value = "all")]
        kind: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Everything above in one document.
    Report(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key = value run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset (dot, star, scaled2) or spec file.
    #[arg(long)]
    spec_x: Option<String>,
    #[arg(long)]
    spec_y: Option<String>,
    #[arg(long = "L")]
    l: Option<u32>,
    /// Rational or "auto".
    #[arg(long = "N")]
    n: Option<String>,
    /// Rational or "auto".
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long = "C")]
    c: Option<String>,
    #[arg(long = "qi-L")]
    qi_l: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    i_max: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Boundary point such as "[a^inf,0/1]" or "[pole,+]"; repeatable.
    #[arg(long)]
    alpha: Vec<String>,
    /// Comma-separated continuity radii.
    #[arg(long)]
    r_bar: Option<String>,
    #[arg(long)]
    c_bar: Option<String>,
    /// pass or fail: the outcome that counts as success.
    #[arg(long)]
    expect: Option<String>,
    /// Write JSON here ("-" for stdout, the default).
    #[arg(long, num_args = 0..=1, default_missing_value = "-")]
    json: Option<String>,
    /// Write the CSV table here ("-" for stdout).
    #[arg(long, num_args = 0..=1, default_missing_value = "-")]
    csv: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_config_str(&std::fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        let pairs: [(&str, Option<String>); 14] = [
            ("spec_x", self.spec_x.clone()),
            ("spec_y", self.spec_y.clone()),
            ("L", self.l.map(|v| v.to_string())),
            ("N", self.n.clone()),
            ("M", self.m.clone()),
            ("lambda", self.lambda.clone()),
            ("C", self.c.clone()),
            ("qi_L", self.qi_l.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("i_max", self.i_max.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("samples", self.samples.map(|v| v.to_string())),
            ("r_bar", self.r_bar.clone()),
            ("c_bar", self.c_bar.clone()),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if !self.alpha.is_empty() {
            cfg.alpha = self.alpha.clone();
        }
        if let Some(e) = &self.expect {
            cfg.set("expect", e)?;
        }
        Ok(cfg)
    }
}

fn write_out(target: &str, text: &str) -> Result<()> {
    if target == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(target, text).map_err(Error::from)
    }
}

fn emit(report: &CommandReport, common: &Common, cfg: &RunConfig) -> Result<()> {
    let json_target = common
        .json
        .clone()
        .or_else(|| cfg.output.as_ref().map(|p| p.display().to_string()))
        .or_else(|| if common.csv.is_none() { Some("-".into()) } else { None });
    if let Some(t) = json_target {
        write_out(&t, &report.to_json_string())?;
    }
    if let (Some(t), Some(csv)) = (&common.csv, &report.csv) {
        write_out(t, csv)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let common = match &cli.command {
        Command::Limits(c) | Command::CheckStar(c) | Command::Phibar(c) | Command::Report(c) => c.clone(),
        Command::Bounds { common, .. } | Command::Probe { common, .. } => common.clone(),
    };
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("threads: {e}")))?;
    }
    let cfg = common.config()?;
    let start = Instant::now();
    let report = match &cli.command {
        Command::Limits(_) => cmd_limits(&cfg)?,
        Command::CheckStar(_) => cmd_check_star(&cfg)?,
        Command::Phibar(_) => cmd_phibar(&cfg)?,
        Command::Bounds { suite, .. } => cmd_bounds(&cfg, suite)?,
        Command::Probe { kind, .. } => {
            let kinds: Vec<String> = if kind.iter().any(|k| k == "all") {
                cfg.probes.clone()
            } else {
                kind.iter().flat_map(|k| k.split(',')).map(|k| k.trim().to_string()).collect()
            };
            if let Some(bad) = kinds.iter().find(|k| !PROBE_KINDS.contains(&k.as_str())) {
                return Err(Error::Config(format!("unknown probe kind {bad:?} (known: {})", PROBE_KINDS.join(", "))));
            }
            cmd_probe(&cfg, &kinds)?
        }
        Command::Report(_) => cmd_report(&cfg)?,
    };
    eprintln!("wall-clock: {:.3} s; passed: {}", start.elapsed().as_secs_f64(), report.passed);
    emit(&report, &common, &cfg)?;
    Ok(report.exit_code(cfg.expect))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
