use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skillplay::harness::{
    emit_results, Experiment, ExperimentConfig, ExperimentResult, Format, Summary, WorldChoice,
};
use skillplay::Result;

#[derive(Parser)]
#[command(
    name = "skillplay",
    version,
    about = "Simulated robots that pick up manipulation skills through play"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its success curve.
    Run(RunArgs),
    /// Convergence grid over J for the no-ext, active and creative variants.
    Grid(GridArgs),
    /// Speed-up fit from a summary file.
    Speedup {
        summary: PathBuf,
        #[arg(long, default_value = "no-ext")]
        reference: String,
        #[arg(long, default_value = "active")]
        variant: String,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with experiment settings and a [params] table.
    #[arg(long)]
    config: Option<PathBuf>,
    /// book, tower or a path to a world file.
    #[arg(long)]
    world: Option<WorldChoice>,
    #[arg(long = "robots")]
    robots: Option<usize>,
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    smoothing: Option<usize>,
    /// uniform, round-robin or fixed:<state index>.
    #[arg(long)]
    initial_state: Option<skillplay::harness::InitialState>,
    /// Success rate of every controller in the built-in worlds.
    #[arg(long)]
    controller_success: Option<f64>,
    /// Accuracy of the informative sensing action in the built-in worlds.
    #[arg(long)]
    sensing_accuracy: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    behaviours: Option<usize>,
    #[arg(long)]
    active_learning: bool,
    #[arg(long)]
    creativity: bool,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
    behaviours: Vec<usize>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(w) = &self.world {
            c.world = w.clone();
        }
        if let Some(n) = self.robots {
            c.robots = n;
        }
        if let Some(t) = self.rollouts {
            c.rollouts = t;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(w) = self.smoothing {
            c.smoothing = w;
        }
        if let Some(s) = self.initial_state {
            c.initial_state = s;
        }
        if let Some(r) = self.controller_success {
            c.controller_success = r;
        }
        if let Some(a) = self.sensing_accuracy {
            c.sensing_accuracy = a;
        }
        Ok(c)
    }
}

fn report(r: &ExperimentResult) {
    let conv = r
        .convergence
        .map_or_else(|| format!("> {}", r.curve.len()), |n| n.to_string());
    eprintln!(
        "{:<10} {:<14} J={:<3} converged at {:<6} final {:.3}",
        r.variant,
        r.world,
        r.j,
        conv,
        r.curve.smoothed.last().copied().unwrap_or(0.0)
    );
}

fn finish(results: &[ExperimentResult], common: &Common) -> Result<()> {
    let summary = emit_results(results, common.format, &common.out)?;
    if let Some(sp) = &summary.speedup {
        eprintln!(
            "speed-up {} vs {}: {:.4}",
            sp.variant, sp.reference, sp.speedup
        );
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut c = args.common.config()?;
    if args.behaviours.is_some() {
        c.behaviours = args.behaviours;
    }
    c.active_learning |= args.active_learning;
    c.creativity |= args.creativity;
    let result = Experiment::new(c)?.run()?;
    report(&result);
    finish(&[result], &args.common)
}

fn grid(args: GridArgs) -> Result<()> {
    let base = args.common.config()?;
    let mut results = Vec::new();
    for &j in &args.behaviours {
        for (active, creative) in [(false, false), (true, false), (true, true)] {
            let c = ExperimentConfig {
                behaviours: Some(j),
                active_learning: active,
                creativity: creative,
                ..base.clone()
            };
            let r = Experiment::new(c)?.run()?;
            report(&r);
            results.push(r);
        }
    }
    finish(&results, &args.common)
}

fn speedup(path: &Path, reference: &str, variant: &str) -> Result<()> {
    let s = Summary::load(path)?.speedup_between(reference, variant)?;
    for (j, a, b) in &s.points {
        println!("J={j:<3} {variant}={a:<5} {reference}={b}");
    }
    println!(
        "fit {reference}: {:.4} J + {:.2} (R^2 {:.4})",
        s.fit_reference.slope, s.fit_reference.intercept, s.fit_reference.r_squared
    );
    println!(
        "fit {variant}: {:.4} J + {:.2} (R^2 {:.4})",
        s.fit_variant.slope, s.fit_variant.intercept, s.fit_variant.r_squared
    );
    println!("speed-up: {:.4}", s.speedup);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Grid(args) => grid(args),
        Command::Speedup {
            summary,
            reference,
            variant,
        } => speedup(&summary, &reference, &variant),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
