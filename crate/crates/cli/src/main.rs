//! `adagraph` command-line harness.
//!
//! Every subcommand reads a TOML experiment config and writes CSV files into
//! `--out` (default: current directory).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use adagraph::experiment::output::{
    theory_table, write_comparison, write_curve, write_file, write_node_curves, write_probabilities, write_theory,
    write_trace,
};
use adagraph::experiment::{
    build_graph, compare_sampling, resolve_sampling, run_design, run_experiment, Algorithm, ExperimentConfig, Setup,
};
use adagraph::graph::format_edge_list;
use adagraph::to_db;

#[derive(Parser)]
#[command(name = "adagraph", version, about = "Adaptive learning of bandlimited graph signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured sampling design; writes probabilities.csv and trace.csv.
    Design(Common),
    /// Monte-Carlo LMS learning curve; writes curve.csv and probabilities.csv.
    RunLms(Common),
    /// Monte-Carlo RLS learning curve; writes curve.csv and probabilities.csv.
    RunRls(Common),
    /// Monte-Carlo distributed RLS; writes curve.csv, nodes.csv and probabilities.csv.
    RunDrls(Common),
    /// Closed-form MSD, rate and step bound for the configured sampling; writes theory.csv.
    Theory(Common),
    /// Sampling rate of the designed and baseline strategies per rate target; writes compare.csv.
    CompareSampling(Common),
    /// Writes the configured processing graph as graph.txt (edge list).
    GenGraph(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config trial count.
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::from_file(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.validate()?;
        Ok(config)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn run_curve(args: &Common, algorithm: Algorithm) -> Result<()> {
    let config = args.load()?;
    let setup = Setup::build(&config)?;
    let output = run_experiment(&config, algorithm)?;
    write_file(&args.path("curve.csv"), |w| write_curve(w, &output.curve))?;
    write_file(&args.path("probabilities.csv"), |w| write_probabilities(w, &output.probs, &setup.noise))?;
    if let Some(per_node) = &output.per_node {
        write_file(&args.path("nodes.csv"), |w| write_node_curves(w, per_node))?;
    }
    let curve = &output.curve;
    println!("trials: {}  horizon: {}", curve.trials, curve.msd.len());
    println!("steady-state MSD: {:.3} dB", to_db(curve.steady_state()));
    if let Some(theory) = curve.theory_msd {
        println!("theory MSD:       {:.3} dB", to_db(theory));
    }
    if let Some(rate) = curve.theory_rate {
        println!("fitted rate: {:.5}  theory rate: {rate:.5}", curve.fit_rate());
    }
    Ok(())
}

fn design(args: &Common) -> Result<()> {
    let config = args.load()?;
    let setup = Setup::build(&config)?;
    let design = run_design(&setup, &config)?;
    write_file(&args.path("probabilities.csv"), |w| write_probabilities(w, &design.probs, &setup.noise))?;
    write_file(&args.path("trace.csv"), |w| write_trace(w, &design))?;
    println!("sampling rate: {:.6}", design.sampling_rate());
    println!("expected set:  {:?}", design.expected_set());
    println!("iterations: {}  converged: {}", design.trace.iterations, design.trace.converged);
    Ok(())
}

fn theory(args: &Common) -> Result<()> {
    let config = args.load()?;
    let setup = Setup::build(&config)?;
    let (probs, _) = resolve_sampling(&setup, &config)?;
    let rows = theory_table(&probs, &setup.noise, &setup.band, config.lms.step, config.rls.forgetting);
    write_file(&args.path("theory.csv"), |w| write_theory(w, &rows))?;
    for (name, value) in &rows {
        println!("{name:<26} {value}");
    }
    Ok(())
}

fn compare(args: &Common) -> Result<()> {
    let config = args.load()?;
    let setup = Setup::build(&config)?;
    let rows = compare_sampling(&setup, &config)?;
    write_file(&args.path("compare.csv"), |w| write_comparison(w, &rows))?;
    for r in &rows {
        println!("alpha {:<6} {:<15} {:.4} ± {:.4}", r.alpha, r.strategy.name(), r.sampling_rate_mean, r.sampling_rate_std);
    }
    Ok(())
}

fn gen_graph(args: &Common) -> Result<()> {
    let config = args.load()?;
    let graph = build_graph(&config, &config.graph)?;
    let path = args.path("graph.txt");
    write_file(&path, |w| std::io::Write::write_all(w, format_edge_list(&graph).as_bytes()))?;
    println!("{} nodes, {} edges -> {}", graph.node_count(), graph.edges().len(), display(&path));
    Ok(())
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(a) => design(a),
        Command::RunLms(a) => run_curve(a, Algorithm::Lms),
        Command::RunRls(a) => run_curve(a, Algorithm::Rls),
        Command::RunDrls(a) => run_curve(a, Algorithm::Drls),
        Command::Theory(a) => theory(a),
        Command::CompareSampling(a) => compare(a),
        Command::GenGraph(a) => gen_graph(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
