use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use planar_peeling::lab::{self, ExperimentConfig, Format, ParamText};
use planar_peeling::Error;

#[derive(Parser)]
#[command(name = "peel-lab", version, about = "Peeling experiments on Markovian random planar triangulations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print α, β, δ, table heads and identity residuals.
    Constants(Common),
    /// Layered peeling to --radius; writes the map and its hull series.
    SampleMap(Common),
    /// Run a named experiment over --trials independent trials.
    Experiment(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// κ in (0, 2/27], as a decimal or a fraction such as 9/128.
    #[arg(long, conflicts_with = "alpha", required_unless_present_any = ["alpha", "experiment"])]
    kappa: Option<String>,
    /// α in [2/3, 1).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = planar_peeling::peeling::DEFAULT_VERTEX_BUDGET)]
    budget_vertices: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Fmt,
    #[arg(long)]
    experiment: Option<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let params = match (&self.kappa, self.alpha) {
            (Some(k), None) => ParamText::Kappa(k.clone()),
            (None, Some(a)) => ParamText::Alpha(a),
            (None, None) if self.experiment.as_deref() == Some("enumerate") => ParamText::Alpha(0.75),
            _ => return Err(Error::Domain("give exactly one of --kappa and --alpha".into())),
        };
        Ok(ExperimentConfig {
            params,
            seed: self.seed,
            steps: self.steps,
            radius: self.radius,
            trials: self.trials,
            budget_vertices: self.budget_vertices,
            out: self.out.clone(),
            format: match self.format {
                Fmt::Json => Format::Json,
                Fmt::Csv => Format::Csv,
            },
            experiment: self.experiment.clone(),
        })
    }
}

fn emit(cfg: &ExperimentConfig, report: &serde_json::Value, to_file: bool) -> Result<(), Error> {
    match (&cfg.out, to_file) {
        (Some(path), true) => lab::write_report(std::io::BufWriter::new(std::fs::File::create(path)?), report, cfg.format),
        _ => {
            let mut out = std::io::stdout().lock();
            lab::write_report(&mut out, report, cfg.format)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.cmd {
        Cmd::Constants(c) => {
            let cfg = c.config()?;
            emit(&cfg, &lab::cmd_constants(&cfg)?, true)?;
            Ok(0)
        }
        Cmd::SampleMap(c) => {
            let cfg = c.config()?;
            let (report, truncated) = lab::cmd_sample_map(&cfg)?;
            emit(&cfg, &report, false)?;
            Ok(if truncated { 3 } else { 0 })
        }
        Cmd::Experiment(c) => {
            let cfg = c.config()?;
            emit(&cfg, &lab::cmd_experiment(&cfg)?, true)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("peel-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
