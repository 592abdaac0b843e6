use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twlip::config::ExperimentConfig;
use twlip::error::{HarnessError, Result};
use twlip::experiment::{self, EvalReport};
use twlip::output;

/// Centered Takagi-van der Waerden functions: chains, evaluation,
/// derivative sweeps and hermeticity estimates.
///
/// Exit status: 0 when every check passes, 1 when a schedule or bound check
/// fails, 2 on invalid input or I/O errors.
#[derive(Parser, Debug)]
#[command(name = "twlip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the chain and write nets.csv and chain.json.
    Build(Common),
    /// Evaluate f at one point and print the result as JSON.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: f64,
    },
    /// Run the full derivative sweep and write report.json and CSV profiles.
    Sweep(Common),
    /// Estimate the hermeticity of the configured space.
    Hermeticity(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(d) = self.depth {
            cfg.depth = d;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.output.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Build(common) => {
            let cfg = common.load()?;
            let plan = cfg.plan()?;
            let chain = experiment::build(&plan)?;
            let report = experiment::build_report(&chain)?;
            let dir = common.out_dir(&cfg);
            ensure_dir(&dir)?;
            output::write_nets_csv(&chain, &dir.join("nets.csv"))?;
            output::write_json(&report, &dir.join("chain.json"))?;
            for l in &report.chain.levels {
                println!(
                    "level {:>2}  eps {:.3e}  points {:>8}  separated {}",
                    l.level, l.epsilon, l.net_points, l.separated
                );
            }
            let ok = report.ascending
                && report.dense.iter().all(|&d| d)
                && report.chain.levels.iter().all(|l| l.separated);
            println!("ascending {}  dense {}", report.ascending, report.dense.iter().all(|&d| d));
            Ok(ok)
        }
        Command::Eval { common, x } => {
            let cfg = common.load()?;
            let plan = cfg.plan()?;
            let chain = experiment::build(&plan)?;
            let e = chain.eval(x, plan.tolerance).map_err(|source| HarnessError::Core {
                module: "tw_function",
                field: "x".into(),
                source,
            })?;
            let report = EvalReport::from((x, e));
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            Ok(true)
        }
        Command::Sweep(common) => {
            let cfg = common.load()?;
            let report = experiment::run_experiment(&cfg)?;
            let dir = common.out_dir(&cfg);
            ensure_dir(&dir)?;
            output::write_json(&report, &dir.join("report.json"))?;
            output::emit_plot_data(&report, &dir)?;
            for p in &report.probes {
                let what = match (&p.verdict, &p.bound_check) {
                    (_, Some(b)) => format!("local {:.4} <= {:.4}", b.local, b.bound),
                    (Some(v), None) => format!(
                        "blows_up {}  base {}",
                        v.blows_up,
                        v.growth_base.map_or("-".to_string(), |b| format!("{b:.3}"))
                    ),
                    (None, None) => String::new(),
                };
                println!(
                    "{} x={:<10.6} big {:>12.4} little {:>12.4}  {}",
                    if p.pass { "pass" } else { "FAIL" },
                    p.x,
                    p.big,
                    p.little,
                    what
                );
            }
            let s = &report.summary;
            println!("{}/{} probes pass", s.passed, s.probes);
            Ok(s.all_pass)
        }
        Command::Hermeticity(common) => {
            let cfg = common.load()?;
            let report = experiment::run_hermeticity(&cfg)?;
            let dir = common.out_dir(&cfg);
            output::write_hermeticity(&report, &dir)?;
            match (report.value, report.argmin) {
                (Some(h), Some(x)) => println!("H(X) ~ {h:.6} (at x = {x})"),
                _ => println!("H(X) undefined: the space has no accumulation points"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
