use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;
use surplus_consensus::delay::{
    eps_sweep, stability_map, sweep_tau_c, tau_sweep, write_root_csv, write_tau_c_csv,
    RightmostRoot, DEFAULT_BRANCH_WINDOW,
};
use surplus_consensus::system::DEFAULT_NULL_TOLERANCE;
use surplus_consensus::{AugmentedSystem, DirectedGraph, Error, Result as CoreResult};

use crate::args::{create_out_dir, GraphArgs, Range, Summary};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Mode {
    /// Rightmost non-null eigenvalue of M(eps) over --eps-range.
    Eps,
    /// Rightmost root over --tau-range at fixed --eps.
    Tau,
    /// Rightmost root over the --eps-range x --tau-range grid.
    TwoD,
    /// Delay margin tau_c over --eps-range.
    TauC,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Eps => "eps",
            Mode::Tau => "tau",
            Mode::TwoD => "two_d",
            Mode::TauC => "tau_c",
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long, default_value = "0.2:0.1:1.8")]
    pub eps_range: Range,
    #[arg(long, default_value = "0:0.01:0.4")]
    pub tau_range: Range,
    /// Coupling for --mode tau.
    #[arg(long, required_if_eq("mode", "tau"))]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BRANCH_WINDOW)]
    pub branch_window: u32,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

type RootRow = (f64, f64, CoreResult<RightmostRoot>);

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let g = args.graph.load_connected()?;
    create_out_dir(&args.out)?;
    let mode = args.mode.name();
    let csv = args.out.join(format!("sweep_{mode}.csv"));
    let eps_grid = args.eps_range.values();
    let tau_grid = args.tau_range.values();
    let mut summary = Summary::default();
    summary.add("mode", mode);

    let (points, failures) = match args.mode {
        Mode::TauC => {
            let pts = sweep_tau_c(&g, &eps_grid)?;
            let failures: Vec<String> = pts
                .iter()
                .filter_map(|p| {
                    p.margin
                        .as_ref()
                        .err()
                        .map(|e| format!("eps={}: {e}", p.eps))
                })
                .collect();
            write_with(&csv, |w| write_tau_c_csv(&pts, w))?;
            let ok: Vec<(f64, f64)> = pts
                .iter()
                .filter_map(|p| p.margin.as_ref().ok().map(|m| (p.eps, m.tau_c)))
                .collect();
            if let Some(best) = ok
                .iter()
                .copied()
                .reduce(|a, b| if b.1 > a.1 { b } else { a })
            {
                summary
                    .add("argmax_eps", best.0)
                    .add("max_tau_c", format!("{:.12}", best.1));
            }
            if let Some(worst) = ok
                .iter()
                .copied()
                .reduce(|a, b| if b.1 < a.1 { b } else { a })
            {
                summary
                    .add("argmin_eps", worst.0)
                    .add("min_tau_c", format!("{:.12}", worst.1));
            }
            (pts.len(), failures)
        }
        _ => {
            let rows = root_rows(args, &g, &eps_grid, &tau_grid)?;
            let failures: Vec<String> = rows
                .iter()
                .filter_map(|(e, t, r)| {
                    r.as_ref()
                        .err()
                        .map(|err| format!("eps={e} tau={t}: {err}"))
                })
                .collect();
            write_with(&csv, |w| write_root_csv(&rows, w))?;
            let best = rows
                .iter()
                .filter_map(|(e, t, r)| r.as_ref().ok().map(|r| (*e, *t, r.root.re)))
                .reduce(|a, b| if b.2 < a.2 { b } else { a });
            if let Some((e, t, re)) = best {
                match args.mode {
                    Mode::Eps => summary.add("argmin_eps", e),
                    Mode::Tau => summary.add("argmin_tau", t),
                    _ => summary.add("argmin_eps", e).add("argmin_tau", t),
                };
                summary.add("min_re", format!("{re:.12}"));
            }
            if args.mode == Mode::Tau {
                let crossing = rows.windows(2).find_map(|w| match (&w[0].2, &w[1].2) {
                    (Ok(a), Ok(b)) if a.root.re < 0.0 && b.root.re >= 0.0 => Some(w[1].1),
                    _ => None,
                });
                summary.add(
                    "first_unstable_tau",
                    crossing.map_or("none".to_string(), |t| t.to_string()),
                );
            }
            (rows.len(), failures)
        }
    };

    for f in &failures {
        eprintln!("warning: {f}");
    }
    let meta = json!({
        "graph": args.graph.graph.display().to_string(),
        "mode": mode,
        "eps_range": args.eps_range.to_string(),
        "tau_range": args.tau_range.to_string(),
        "eps": args.eps,
        "branch_window": args.branch_window,
        "points": points,
        "failures": failures,
    });
    let json_path = args.out.join(format!("sweep_{mode}.json"));
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n",
    )
    .map_err(CliError::io(format!(
        "cannot write {}",
        json_path.display()
    )))?;
    println!("wrote {} points to {}", points, csv.display());
    summary
        .add("points", points)
        .add("failures", failures.len())
        .add("out", csv.display());
    summary.print();
    Ok(())
}

fn root_rows(
    args: &SweepArgs,
    g: &DirectedGraph,
    eps_grid: &[f64],
    tau_grid: &[f64],
) -> Result<Vec<RootRow>, CliError> {
    Ok(match args.mode {
        Mode::Eps => eps_sweep(g, eps_grid)
            .into_iter()
            .map(|p| (p.eps, 0.0, p.root))
            .collect(),
        Mode::Tau => {
            let eps = args.eps.expect("clap requires --eps for tau mode");
            let spec = AugmentedSystem::new(g, eps)?.spectrum(DEFAULT_NULL_TOLERANCE)?;
            tau_sweep(&spec, tau_grid, args.branch_window)
                .into_iter()
                .map(|p| (eps, p.tau, p.root))
                .collect()
        }
        Mode::TwoD => {
            let map = stability_map(g, eps_grid, tau_grid, args.branch_window)?;
            let mut rows = Vec::with_capacity(eps_grid.len() * tau_grid.len());
            let mut failures = map.failures.iter();
            for (a, row) in map.roots.into_iter().enumerate() {
                for (b, cell) in row.into_iter().enumerate() {
                    let root = cell.ok_or_else(|| {
                        let msg = failures.next().map_or(String::new(), |f| f.2.clone());
                        Error::NumericalFailure(msg)
                    });
                    rows.push((eps_grid[a], tau_grid[b], root));
                }
            }
            rows
        }
        Mode::TauC => unreachable!("tau_c rows are written separately"),
    })
}

fn write_with(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let file =
        File::create(path).map_err(CliError::io(format!("cannot create {}", path.display())))?;
    let mut out = BufWriter::new(file);
    write(&mut out)
        .and_then(|_| out.flush())
        .map_err(CliError::io(format!("cannot write {}", path.display())))
}
