use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use surplus_consensus::delay::{lambda3_at_zero, tau_critical, tau_tilde_bound};
use surplus_consensus::system::{lambda2_slope, DEFAULT_NULL_TOLERANCE};
use surplus_consensus::AugmentedSystem;

use crate::args::{create_out_dir, require_connected, GraphArgs, Summary};
use crate::error::CliError;
use crate::fmt_complex;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Also report the spectrum of M(eps) and its delay margin.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Directory for `analysis.json`; nothing is written without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let g = args.graph.load()?;
    let deg = g.degrees();
    let connected = g.is_strongly_connected();
    println!("graph: {}", args.graph.graph.display());
    println!("nodes: {}  edges: {}", g.node_count(), g.edge_count());
    println!("in-degrees:  {:?}", deg.in_degrees);
    println!("out-degrees: {:?}", deg.out_degrees);
    println!(
        "balanced: {}  delta_bar: {}",
        g.is_balanced(),
        deg.delta_bar
    );
    println!("strongly connected: {connected}");
    let mut summary = Summary::default();
    summary
        .add("n", g.node_count())
        .add("edges", g.edge_count())
        .add("balanced", g.is_balanced())
        .add("delta_bar", deg.delta_bar)
        .add("strongly_connected", connected);
    if !connected {
        summary.print();
        require_connected(&g)?;
    }

    let m0 = AugmentedSystem::new(&g, 0.0)?.spectrum(DEFAULT_NULL_TOLERANCE)?;
    println!("eigenvalues of M(0):");
    for z in m0.eigenvalues() {
        println!("  {}", fmt_complex(*z));
    }
    let (_, lambda3) = lambda3_at_zero(&g)?;
    let slope = lambda2_slope(&g)?;
    let bound = tau_tilde_bound(&g)?;
    println!("null eigenvalues of M(0): {}", m0.null_count());
    println!("lambda_3(0): {}", fmt_complex(lambda3));
    println!("d lambda_2 / d eps at 0: {slope:.12}");
    println!("delay bound tau_tilde: {bound:.12}");
    summary
        .add("null_count_m0", m0.null_count())
        .add("lambda3_re", format!("{:.12}", lambda3.re))
        .add("lambda2_slope", format!("{slope:.12}"))
        .add("tau_tilde", format!("{bound:.12}"));

    let mut report = json!({
        "graph": args.graph.graph.display().to_string(),
        "n": g.node_count(),
        "edges": g.edges().map(|(i, j)| [i, j]).collect::<Vec<_>>(),
        "balanced": g.is_balanced(),
        "in_degrees": deg.in_degrees,
        "out_degrees": deg.out_degrees,
        "delta_bar": deg.delta_bar,
        "strongly_connected": connected,
        "m0_eigenvalues": m0.eigenvalues().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "m0_null_count": m0.null_count(),
        "lambda3_at_zero": [lambda3.re, lambda3.im],
        "lambda2_slope": slope,
        "tau_tilde": bound,
    });

    if let Some(eps) = args.eps {
        let spec = AugmentedSystem::new(&g, eps)?.spectrum(DEFAULT_NULL_TOLERANCE)?;
        println!("eigenvalues of M({eps}):");
        for z in spec.eigenvalues() {
            println!("  {}", fmt_complex(*z));
        }
        println!("null eigenvalues of M({eps}): {}", spec.null_count());
        summary.add("eps", eps).add("null_count", spec.null_count());
        report["eps"] = json!(eps);
        report["eigenvalues"] = json!(spec
            .eigenvalues()
            .iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>());
        match tau_critical(&spec) {
            Ok(m) => {
                let limiting = spec.eigenvalues()[m.limiting_eigenvalue_index];
                println!(
                    "tau_c: {:.12}  (eigenvalue {} = {}, omega {:.12})",
                    m.tau_c,
                    m.limiting_eigenvalue_index + 1,
                    fmt_complex(limiting),
                    m.crossing_frequency
                );
                summary
                    .add("tau_c", format!("{:.12}", m.tau_c))
                    .add("omega", format!("{:.12}", m.crossing_frequency));
                report["tau_c"] = json!(m.tau_c);
                report["limiting_index"] = json!(m.limiting_eigenvalue_index + 1);
                report["omega"] = json!(m.crossing_frequency);
            }
            Err(e) => {
                eprintln!("warning: no delay margin at eps = {eps}: {e}");
                summary.add("tau_c", "NaN");
            }
        }
    }

    if let Some(dir) = &args.out {
        create_out_dir(dir)?;
        let path = dir.join("analysis.json");
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(&path, text + "\n")
            .map_err(CliError::io(format!("cannot write {}", path.display())))?;
        summary.add("out", path.display());
    }
    summary.print();
    Ok(())
}
