use clap::Args;
use surplus_consensus::delay::{
    bisect_crossing, rightmost_root, rightmost_root_oracle, tau_critical, DEFAULT_BRANCH_WINDOW,
    DEFAULT_ORDER,
};
use surplus_consensus::sim::{random_initial_state, simulate, SimConfig, Verdict};
use surplus_consensus::system::{find_eps_bar, DEFAULT_NULL_TOLERANCE};
use surplus_consensus::{AugmentedSystem, DirectedGraph, Spectrum};

type Result<T> = surplus_consensus::Result<T>;

use crate::args::{GraphArgs, Summary};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Coupling to verify at; defaults to min(1, largest admissible grid value).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Collocation order of the pseudospectral oracle.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Seed for the simulation's initial state.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Fractions of `tau_c` at which roots are cross-checked.
const TAU_FRACTIONS: [f64; 4] = [0.25, 0.5, 1.0, 1.5];

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn run(args: &VerifyArgs) -> std::result::Result<(), CliError> {
    let g = args.graph.load_connected()?;
    let eps = match args.eps {
        Some(e) => e,
        None => {
            let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 10.0).collect();
            find_eps_bar(&g, &grid, DEFAULT_NULL_TOLERANCE)?.min(1.0)
        }
    };
    let sys = AugmentedSystem::new(&g, eps)?;
    let spec = sys.spectrum(DEFAULT_NULL_TOLERANCE)?;
    let checks = match tau_critical(&spec) {
        Ok(m) => vec![
            record("lambert_residual", residual_check(&spec, m.tau_c)),
            record("branch_sufficiency", branch_check(&spec, m.tau_c)),
            record(
                "oracle_agreement",
                oracle_check(&sys, &spec, m.tau_c, args.order),
            ),
            record("crossing_consistency", crossing_check(&spec, m.tau_c)),
            record(
                "conservation",
                conservation_check(&g, eps, m.tau_c, args.seed),
            ),
            record(
                "spectral_consistency",
                verdict_check(&g, &spec, eps, m.tau_c, args.seed),
            ),
        ],
        Err(e) => vec![Check {
            name: "admissibility",
            pass: false,
            detail: e.to_string(),
        }],
    };

    println!("verifying at eps = {eps}");
    for c in &checks {
        println!(
            "check {:<22} {}  {}",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.to_string())
        .collect();
    let mut summary = Summary::default();
    summary
        .add("eps", eps)
        .add("checks", checks.len())
        .add("failed", failed.len());
    if !failed.is_empty() {
        summary.add("failing", failed.join(","));
    }
    summary.print();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}

fn record(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn residual_check(spec: &Spectrum, tau_c: f64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for f in TAU_FRACTIONS {
        worst = worst.max(rightmost_root(spec, f * tau_c, DEFAULT_BRANCH_WINDOW)?.residual);
    }
    Ok((worst <= 1e-10, format!("max residual {worst:.3e}")))
}

fn branch_check(spec: &Spectrum, tau_c: f64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for f in TAU_FRACTIONS {
        let a = rightmost_root(spec, f * tau_c, DEFAULT_BRANCH_WINDOW)?.root;
        let b = rightmost_root(spec, f * tau_c, 5)?.root;
        worst = worst.max((a - b).norm());
    }
    Ok((
        worst <= 1e-9,
        format!("window 2 vs 5: max shift {worst:.3e}"),
    ))
}

fn oracle_check(
    sys: &AugmentedSystem,
    spec: &Spectrum,
    tau_c: f64,
    order: usize,
) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for f in TAU_FRACTIONS {
        let tau = f * tau_c;
        let lw = rightmost_root(spec, tau, DEFAULT_BRANCH_WINDOW)?.root;
        let ps = rightmost_root_oracle(sys, tau, order)?;
        worst = worst
            .max((lw.re - ps.re).abs())
            .max((lw.im.abs() - ps.im.abs()).abs());
    }
    Ok((
        worst <= 1e-6,
        format!("max |Lambert W - pseudospectral| {worst:.3e}"),
    ))
}

fn crossing_check(spec: &Spectrum, tau_c: f64) -> Result<(bool, String)> {
    let below = rightmost_root(spec, tau_c * (1.0 - 1e-3), DEFAULT_BRANCH_WINDOW)?
        .root
        .re;
    let above = rightmost_root(spec, tau_c * (1.0 + 1e-3), DEFAULT_BRANCH_WINDOW)?
        .root
        .re;
    let t = bisect_crossing(spec, 0.5 * tau_c, 1.5 * tau_c, 1e-10, DEFAULT_BRANCH_WINDOW)?;
    let rel = (t - tau_c).abs() / tau_c;
    Ok((
        below < 0.0 && above > 0.0 && rel <= 1e-6,
        format!("tau_c {tau_c:.12}, bisection {t:.12}, relative gap {rel:.3e}"),
    ))
}

fn conservation_check(
    g: &DirectedGraph,
    eps: f64,
    tau_c: f64,
    seed: u64,
) -> Result<(bool, String)> {
    let sys = AugmentedSystem::new(g, eps)?;
    let mut cfg = SimConfig::new(
        eps,
        0.5 * tau_c,
        10.0,
        random_initial_state(g.node_count(), seed),
    );
    cfg.z0 = random_initial_state(g.node_count(), seed.wrapping_add(1));
    let traj = simulate(&sys, &cfg)?;
    let total: f64 = cfg.x0.iter().chain(&cfg.z0).sum();
    let drift = traj.max_conservation_drift();
    let limit = 1e-6 * (1.0 + total.abs());
    Ok((
        drift <= limit,
        format!("max drift {drift:.3e}, limit {limit:.3e}"),
    ))
}

/// A run at half the delay margin must converge, at a rate close to the
/// rightmost root.
fn verdict_check(
    g: &DirectedGraph,
    spec: &Spectrum,
    eps: f64,
    tau_c: f64,
    seed: u64,
) -> Result<(bool, String)> {
    let tau = 0.5 * tau_c;
    let re = rightmost_root(spec, tau, DEFAULT_BRANCH_WINDOW)?.root.re;
    let t_final = (20.0 / re.abs()).clamp(10.0, 2000.0);
    let sys = AugmentedSystem::new(g, eps)?;
    let traj = simulate(
        &sys,
        &SimConfig::new(
            eps,
            tau,
            t_final,
            random_initial_state(g.node_count(), seed),
        ),
    )?;
    let converged = matches!(traj.verdict, Verdict::Converged { .. });
    Ok((
        re < 0.0 && converged,
        format!(
            "Re lambda_R {re:.6} at tau {tau:.6}, simulation {} after t = {t_final:.1}",
            traj.verdict.name()
        ),
    ))
}
