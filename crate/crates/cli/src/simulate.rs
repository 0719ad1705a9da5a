use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use surplus_consensus::sim::{
    convergence_time, random_initial_state, simulate, SimConfig, TrajectoryMetadata,
};
use surplus_consensus::AugmentedSystem;

use crate::args::{create_out_dir, GraphArgs, Summary};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 40.0)]
    pub t_final: f64,
    /// Step size; must divide tau. Defaults to tau / 50 (0.01 without delay).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Seed for the uniform [0, 1) initial state; ignored when --x0 is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    /// Initial surplus, comma separated; zero by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z0: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let g = args.graph.load_connected()?;
    let n = g.node_count();
    let (x0, seed) = match &args.x0 {
        Some(x0) => (x0.clone(), None),
        None => (random_initial_state(n, args.seed), Some(args.seed)),
    };
    let mut cfg = SimConfig::new(args.eps, args.tau, args.t_final, x0);
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(z0) = &args.z0 {
        cfg.z0 = z0.clone();
    }
    cfg.validate()?;
    let sys = AugmentedSystem::new(&g, args.eps).map_err(CliError::Config)?;
    let traj = simulate(&sys, &cfg)?;
    let t_conv = convergence_time(&traj, cfg.consensus_tolerance);

    create_out_dir(&args.out)?;
    let csv = args.out.join("trajectory.csv");
    let file =
        File::create(&csv).map_err(CliError::io(format!("cannot create {}", csv.display())))?;
    let mut out = BufWriter::new(file);
    traj.write_csv(&mut out)
        .and_then(|_| out.flush())
        .map_err(CliError::io(format!("cannot write {}", csv.display())))?;
    let meta = TrajectoryMetadata {
        config: &cfg,
        seed,
        target: traj.target,
        verdict: traj.verdict,
        convergence_time: t_conv,
        max_conservation_drift: traj.max_conservation_drift(),
    };
    let json_path = args.out.join("trajectory.json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&json_path, text + "\n").map_err(CliError::io(format!(
        "cannot write {}",
        json_path.display()
    )))?;

    println!("verdict: {}", traj.verdict.name());
    println!("consensus target: {:.12}", traj.target);
    match t_conv {
        Some(t) => println!("convergence time: {t}"),
        None => println!("convergence time: none"),
    }
    println!(
        "max conservation drift: {:.3e}",
        traj.max_conservation_drift()
    );
    let mut summary = Summary::default();
    summary
        .add("verdict", traj.verdict.name())
        .add("target", format!("{:.12}", traj.target))
        .add(
            "convergence_time",
            t_conv.map_or("none".to_string(), |t| t.to_string()),
        )
        .add(
            "max_conservation_drift",
            format!("{:.3e}", traj.max_conservation_drift()),
        )
        .add("samples", traj.times.len())
        .add("out", csv.display());
    summary.print();
    Ok(())
}
