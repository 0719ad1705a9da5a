//! Parameter sweeps over `eps` and `tau`.
//!
//! Cells are independent and evaluated on the rayon pool; results are
//! collected in grid order, so the output does not depend on scheduling.

use std::io::{self, Write};

use rayon::prelude::*;

use super::roots::{rightmost_root_or_eigenvalue, RightmostRoot};
use super::{tau_critical, DelayMargin};
use crate::error::Result;
use crate::graph::DirectedGraph;
use crate::system::{validate_grid, AugmentedSystem, Spectrum, DEFAULT_NULL_TOLERANCE};

#[derive(Debug, Clone)]
pub struct TauCPoint {
    pub eps: f64,
    pub margin: Result<DelayMargin>,
}

/// Rightmost non-null eigenvalue of `M(eps)` (delay-free).
#[derive(Debug, Clone)]
pub struct EpsPoint {
    pub eps: f64,
    pub root: Result<RightmostRoot>,
}

#[derive(Debug, Clone)]
pub struct TauPoint {
    pub tau: f64,
    pub root: Result<RightmostRoot>,
}

fn spectrum_at(g: &DirectedGraph, eps: f64) -> Result<Spectrum> {
    AugmentedSystem::new(g, eps)?.spectrum(DEFAULT_NULL_TOLERANCE)
}

/// `tau_c(eps)` along the grid; inadmissible points carry their error.
pub fn sweep_tau_c(g: &DirectedGraph, eps_grid: &[f64]) -> Result<Vec<TauCPoint>> {
    g.require_strongly_connected()?;
    Ok(eps_grid
        .par_iter()
        .map(|&eps| TauCPoint {
            eps,
            margin: spectrum_at(g, eps).and_then(|s| tau_critical(&s)),
        })
        .collect())
}

pub fn eps_sweep(g: &DirectedGraph, eps_grid: &[f64]) -> Vec<EpsPoint> {
    eps_grid
        .par_iter()
        .map(|&eps| EpsPoint {
            eps,
            root: spectrum_at(g, eps).and_then(|s| rightmost_root_or_eigenvalue(&s, 0.0, 0)),
        })
        .collect()
}

/// Rightmost root along a delay grid at a fixed spectrum; `tau = 0` uses
/// the eigenvalue directly.
pub fn tau_sweep(spec: &Spectrum, tau_grid: &[f64], branch_window: u32) -> Vec<TauPoint> {
    tau_grid
        .par_iter()
        .map(|&tau| TauPoint {
            tau,
            root: rightmost_root_or_eigenvalue(spec, tau, branch_window),
        })
        .collect()
}

/// `Re(lambda_R)` over an `(eps, tau)` grid.
#[derive(Debug, Clone)]
pub struct StabilityMap {
    pub eps_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// `lambda_r_real[a][b]` at `(eps_grid[a], tau_grid[b])`; NaN marks a failed cell.
    pub lambda_r_real: Vec<Vec<f64>>,
    pub roots: Vec<Vec<Option<RightmostRoot>>>,
    /// `(a, b, message)` for every failed cell.
    pub failures: Vec<(usize, usize, String)>,
}

pub fn stability_map(
    g: &DirectedGraph,
    eps_grid: &[f64],
    tau_grid: &[f64],
    branch_window: u32,
) -> Result<StabilityMap> {
    validate_grid(eps_grid, "epsilon grid")?;
    validate_grid(tau_grid, "delay grid")?;
    let rows: Vec<Vec<Result<RightmostRoot>>> = eps_grid
        .par_iter()
        .map(|&eps| match spectrum_at(g, eps) {
            Ok(spec) => tau_grid
                .par_iter()
                .map(|&tau| rightmost_root_or_eigenvalue(&spec, tau, branch_window))
                .collect(),
            Err(e) => tau_grid.iter().map(|_| Err(e.clone())).collect(),
        })
        .collect();

    let mut lambda_r_real = Vec::with_capacity(rows.len());
    let mut roots = Vec::with_capacity(rows.len());
    let mut failures = Vec::new();
    for (a, row) in rows.into_iter().enumerate() {
        let mut re_row = Vec::with_capacity(row.len());
        let mut root_row = Vec::with_capacity(row.len());
        for (b, cell) in row.into_iter().enumerate() {
            match cell {
                Ok(r) => {
                    re_row.push(r.root.re);
                    root_row.push(Some(r));
                }
                Err(e) => {
                    re_row.push(f64::NAN);
                    root_row.push(None);
                    failures.push((a, b, e.to_string()));
                }
            }
        }
        lambda_r_real.push(re_row);
        roots.push(root_row);
    }
    Ok(StabilityMap {
        eps_grid: eps_grid.to_vec(),
        tau_grid: tau_grid.to_vec(),
        lambda_r_real,
        roots,
        failures,
    })
}

impl StabilityMap {
    /// Grid indices and value of the most negative finite cell.
    pub fn argmin(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (a, row) in self.lambda_r_real.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if v.is_finite() && best.is_none_or(|(_, _, m)| v < m) {
                    best = Some((a, b, v));
                }
            }
        }
        best
    }
}

pub(crate) const ROOT_HEADER: &str = "eps,tau,re_lambda_r,im_lambda_r,source_index,branch,residual";
pub(crate) const TAU_C_HEADER: &str = "eps,tau_c,limiting_index,omega";

/// One CSV row of the root schema; indices are written 1-based.
pub(crate) fn root_row(eps: f64, tau: f64, root: &Result<RightmostRoot>) -> String {
    match root {
        Ok(r) => format!(
            "{},{},{:.16e},{:.16e},{},{},{:.3e}",
            eps,
            tau,
            r.root.re,
            r.root.im,
            r.source_eigenvalue_index + 1,
            r.branch_index,
            r.residual
        ),
        Err(_) => format!("{eps},{tau},NaN,NaN,,,"),
    }
}

pub fn write_root_csv<W: Write>(
    rows: &[(f64, f64, Result<RightmostRoot>)],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{ROOT_HEADER}")?;
    for (eps, tau, root) in rows {
        writeln!(out, "{}", root_row(*eps, *tau, root))?;
    }
    let best = rows
        .iter()
        .filter_map(|(e, t, r)| r.as_ref().ok().map(|r| (*e, *t, r.root)))
        .reduce(|a, b| if b.2.re < a.2.re { b } else { a });
    if let Some((eps, tau, root)) = best {
        writeln!(
            out,
            "# argmin,eps={eps},tau={tau},re_lambda_r={:.16e}",
            root.re
        )?;
    }
    Ok(())
}

pub fn write_tau_c_csv<W: Write>(points: &[TauCPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{TAU_C_HEADER}")?;
    for p in points {
        match &p.margin {
            Ok(m) => writeln!(
                out,
                "{},{:.16e},{},{:.16e}",
                p.eps,
                m.tau_c,
                m.limiting_eigenvalue_index + 1,
                m.crossing_frequency
            )?,
            Err(_) => writeln!(out, "{},NaN,,NaN", p.eps)?,
        }
    }
    let ok = points
        .iter()
        .filter_map(|p| p.margin.as_ref().ok().map(|m| (p.eps, m.tau_c)));
    let best = ok.clone().reduce(|a, b| if b.1 > a.1 { b } else { a });
    let worst = ok.reduce(|a, b| if b.1 < a.1 { b } else { a });
    if let (Some(best), Some(worst)) = (best, worst) {
        writeln!(
            out,
            "# argmax,eps={},tau_c={:.16e},argmin,eps={},tau_c={:.16e}",
            best.0, best.1, worst.0, worst.1
        )?;
    }
    Ok(())
}
