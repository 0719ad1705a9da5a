use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use surplus_consensus::graph::read_graph;
use surplus_consensus::DirectedGraph;

use crate::error::CliError;

/// Inclusive grid `start:step:stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl Range {
    /// Grid points, rounded to 12 decimals so that `0.2:0.1:1.8` yields `1.1`
    /// rather than `1.1000000000000003`.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| ((self.start + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, step, b] = parts.as_slice() else {
            return Err(format!("expected start:step:stop, got `{s}`"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let r = Range {
            start: num(a)?,
            step: num(step)?,
            stop: num(b)?,
        };
        if ![r.start, r.step, r.stop].iter().all(|v| v.is_finite()) {
            return Err("range values must be finite".into());
        }
        if r.step <= 0.0 {
            return Err("step must be positive".into());
        }
        if r.stop < r.start {
            return Err("stop must not be below start".into());
        }
        Ok(r)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph file: edge list, or JSON adjacency when the extension is `.json`.
    #[arg(long)]
    pub graph: PathBuf,
}

impl GraphArgs {
    pub fn load(&self) -> Result<DirectedGraph, CliError> {
        read_graph(&self.graph).map_err(CliError::Graph)
    }

    /// Loads the graph and insists on strong connectivity.
    pub fn load_connected(&self) -> Result<DirectedGraph, CliError> {
        let g = self.load()?;
        require_connected(&g)?;
        Ok(g)
    }
}

pub fn require_connected(g: &DirectedGraph) -> Result<(), CliError> {
    g.require_strongly_connected()
        .map_err(|e| CliError::NotStronglyConnected(e.to_string()))
}

pub fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(format!("cannot create {}", dir.display())))
}

/// Collects `key=value` pairs for the final stdout line.
#[derive(Debug, Default)]
pub struct Summary(Vec<String>);

impl Summary {
    pub fn add(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.0.push(format!("{key}={value}"));
        self
    }

    pub fn print(&self) {
        println!("{}", self.0.join(" "));
    }
}
