//! Fixed-step integration of `y'(t) = M y(t - tau)` with constant history.
//!
//! The delay is an integer number `m` of steps, so the delayed argument of
//! every RK4 stage falls either on a stored grid point or on the midpoint of
//! one stored step. Midpoints come from cubic Hermite interpolation of the
//! stored states and slopes, which keeps the scheme fourth order. With
//! `tau = 0` the integrator is plain RK4 on `y' = M y`.

use std::collections::VecDeque;
use std::io::{self, Write};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::AugmentedSystem;

/// Steps per delay used by [`SimConfig::new`] when `tau > 0`.
pub const DEFAULT_STEPS_PER_DELAY: usize = 50;
pub const MIN_STEPS_PER_DELAY: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub epsilon: f64,
    pub tau: f64,
    pub dt: f64,
    pub t_final: f64,
    pub x0: Vec<f64>,
    pub z0: Vec<f64>,
    pub consensus_tolerance: f64,
    pub divergence_threshold: f64,
}

impl SimConfig {
    /// Defaults: `z0 = 0`, `dt = tau / 50` (or `0.01` without delay),
    /// consensus tolerance `1e-4`, divergence threshold `1e6`.
    pub fn new(epsilon: f64, tau: f64, t_final: f64, x0: Vec<f64>) -> Self {
        let dt = if tau > 0.0 {
            tau / DEFAULT_STEPS_PER_DELAY as f64
        } else {
            1e-2
        };
        let z0 = vec![0.0; x0.len()];
        Self {
            epsilon,
            tau,
            dt,
            t_final,
            x0,
            z0,
            consensus_tolerance: 1e-4,
            divergence_threshold: 1e6,
        }
    }

    /// Number of steps spanned by the delay.
    pub fn delay_steps(&self) -> Result<usize> {
        self.validate()?;
        Ok(self.steps_in(self.tau))
    }

    fn steps_in(&self, span: f64) -> usize {
        (span / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [self.epsilon, self.tau, self.dt, self.t_final];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if self.epsilon < 0.0 {
            return bad(format!("epsilon {} is negative", self.epsilon));
        }
        if self.tau < 0.0 {
            return bad(format!("tau {} is negative", self.tau));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return bad(format!("dt {} must be positive", self.dt));
        }
        if self.t_final.is_nan() || self.t_final <= 0.0 || self.t_final < self.tau {
            return bad(format!(
                "t_final {} must be positive and at least tau",
                self.t_final
            ));
        }
        if self.tau > 0.0 {
            let ratio = self.tau / self.dt;
            let m = ratio.round();
            if (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
                return bad(format!("tau/dt = {ratio} is not an integer"));
            }
            if (m as usize) < MIN_STEPS_PER_DELAY {
                return bad(format!("tau/dt = {m} is below {MIN_STEPS_PER_DELAY}"));
            }
        }
        if self.x0.is_empty() || self.x0.len() != self.z0.len() {
            return bad(format!(
                "x0 has {} entries and z0 has {}",
                self.x0.len(),
                self.z0.len()
            ));
        }
        if self.x0.iter().chain(self.z0.iter()).any(|v| !v.is_finite()) {
            return bad("initial state is not finite".into());
        }
        if [self.consensus_tolerance, self.divergence_threshold]
            .iter()
            .any(|v| v.is_nan() || *v <= 0.0)
        {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }
}

/// `(1'x0 + 1'z0) / n`, the value every `x_i` converges to.
pub fn consensus_target(cfg: &SimConfig) -> f64 {
    let total: f64 = cfg.x0.iter().chain(cfg.z0.iter()).sum();
    total / cfg.x0.len() as f64
}

/// Uniform `[0, 1)` initial values from a seeded generator.
pub fn random_initial_state(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Converged { at: f64 },
    Diverged { at: f64 },
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Converged { .. } => "converged",
            Verdict::Diverged { .. } => "diverged",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `[x; z]` at each sample.
    pub states: Vec<DVector<f64>>,
    /// `max_i |x_i(t) - target|`
    pub consensus_error: Vec<f64>,
    /// `|1'x(t) + 1'z(t) - (1'x0 + 1'z0)|`
    pub conservation_drift: Vec<f64>,
    pub target: f64,
    pub verdict: Verdict,
}

/// Ring buffer of `(y_j, y'_j)` for the most recent grid points.
struct History {
    entries: VecDeque<(DVector<f64>, DVector<f64>)>,
    /// grid index of the front entry
    first: i64,
    initial: DVector<f64>,
    zero: DVector<f64>,
}

impl History {
    fn new(y0: &DVector<f64>, slope0: DVector<f64>, capacity: usize) -> Self {
        let mut entries = VecDeque::with_capacity(capacity + 1);
        entries.push_back((y0.clone(), slope0));
        Self {
            entries,
            first: 0,
            initial: y0.clone(),
            zero: DVector::zeros(y0.len()),
        }
    }

    fn push(&mut self, y: DVector<f64>, slope: DVector<f64>, capacity: usize) {
        self.entries.push_back((y, slope));
        while self.entries.len() > capacity {
            self.entries.pop_front();
            self.first += 1;
        }
    }

    /// State and right-hand slope at grid index `j`; constant before zero.
    fn at(&self, j: i64) -> (&DVector<f64>, &DVector<f64>) {
        if j < 0 {
            return (&self.initial, &self.zero);
        }
        let (y, s) = &self.entries[(j - self.first) as usize];
        (y, s)
    }

    /// Cubic Hermite value halfway between grid points `j` and `j + 1`.
    fn midpoint(&self, j: i64, h: f64) -> DVector<f64> {
        if j < 0 {
            return self.initial.clone();
        }
        let (ya, sa) = self.at(j);
        let (yb, sb) = self.at(j + 1);
        (ya + yb) * 0.5 + (sa - sb) * (h / 8.0)
    }
}

pub fn simulate(sys: &AugmentedSystem, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let n = sys.agents();
    if cfg.x0.len() != n {
        return Err(Error::InvalidConfig(format!(
            "x0 has {} entries for a {n}-agent system",
            cfg.x0.len()
        )));
    }
    let m = sys.matrix();
    let h = cfg.dt;
    let steps = cfg.steps_in(cfg.t_final);
    let y0 = DVector::from_iterator(2 * n, cfg.x0.iter().chain(cfg.z0.iter()).copied());
    let target = consensus_target(cfg);
    let total0 = y0.sum();

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        consensus_error: Vec::with_capacity(steps + 1),
        conservation_drift: Vec::with_capacity(steps + 1),
        target,
        verdict: Verdict::Inconclusive,
    };
    let mut monitor = Monitor::new(cfg);
    let mut record = |traj: &mut Trajectory, t: f64, y: &DVector<f64>| -> bool {
        let err = y
            .rows(0, n)
            .iter()
            .map(|v| (v - target).abs())
            .fold(0.0, f64::max);
        let drift = (y.sum() - total0).abs();
        traj.times.push(t);
        traj.states.push(y.clone());
        traj.consensus_error.push(err);
        traj.conservation_drift.push(drift);
        monitor.observe(t, y, err)
    };

    let mut y = y0.clone();
    if record(&mut traj, 0.0, &y) {
        traj.verdict = monitor.verdict;
        return Ok(traj);
    }

    if cfg.tau > 0.0 {
        let delay = cfg.steps_in(cfg.tau) as i64;
        let capacity = delay as usize + 2;
        let mut hist = History::new(&y0, m * &y0, capacity);
        for step in 0..steps {
            let j = step as i64 - delay;
            let k1 = hist.at(step as i64).1.clone();
            let k2 = m * hist.midpoint(j, h);
            let k4 = m * hist.at(j + 1).0;
            y += (k1 + k2 * 4.0 + &k4) * (h / 6.0);
            hist.push(y.clone(), k4, capacity);
            if record(&mut traj, (step + 1) as f64 * h, &y) {
                break;
            }
        }
    } else {
        for step in 0..steps {
            let k1 = m * &y;
            let k2 = m * (&y + &k1 * (h / 2.0));
            let k3 = m * (&y + &k2 * (h / 2.0));
            let k4 = m * (&y + &k3 * h);
            y += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
            if record(&mut traj, (step + 1) as f64 * h, &y) {
                break;
            }
        }
    }
    traj.verdict = monitor.verdict;
    Ok(traj)
}

/// Decides the verdict online: divergence stops the run, convergence needs
/// the error below tolerance for 5% of `t_final` without interruption.
struct Monitor {
    tolerance: f64,
    threshold: f64,
    hold: f64,
    below_since: Option<f64>,
    verdict: Verdict,
}

impl Monitor {
    fn new(cfg: &SimConfig) -> Self {
        Self {
            tolerance: cfg.consensus_tolerance,
            threshold: cfg.divergence_threshold,
            hold: 0.05 * cfg.t_final,
            below_since: None,
            verdict: Verdict::Inconclusive,
        }
    }

    /// Returns true when integration should stop.
    fn observe(&mut self, t: f64, y: &DVector<f64>, err: f64) -> bool {
        if y.iter().any(|v| !v.is_finite() || v.abs() > self.threshold) {
            self.verdict = Verdict::Diverged { at: t };
            return true;
        }
        if err < self.tolerance {
            let since = *self.below_since.get_or_insert(t);
            if self.verdict == Verdict::Inconclusive && t - since >= self.hold - 1e-12 {
                self.verdict = Verdict::Converged { at: t };
            }
        } else {
            self.below_since = None;
        }
        false
    }
}

/// First time after which the consensus error stays below `tol`.
pub fn convergence_time(traj: &Trajectory, tol: f64) -> Option<f64> {
    if matches!(traj.verdict, Verdict::Diverged { .. }) {
        return None;
    }
    match traj.consensus_error.iter().rposition(|&e| e >= tol) {
        None => traj.times.first().copied(),
        Some(last) => traj.times.get(last + 1).copied(),
    }
}

impl Trajectory {
    pub fn max_conservation_drift(&self) -> f64 {
        self.conservation_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    /// Least-squares slope of `ln(consensus_error)` over `[t_from, t_to]`,
    /// skipping samples at or below `floor`.
    pub fn log_error_slope(&self, t_from: f64, t_to: f64, floor: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.consensus_error)
            .filter(|(t, e)| **t >= t_from && **t <= t_to && **e > floor)
            .map(|(t, e)| (*t, e.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let ml = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        Some(sxy / sxx)
    }

    /// `t,x1..xn,z1..zn,consensus_error,conservation_drift`
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, |s| s.len() / 2);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("z{i}")));
        header.push("consensus_error".into());
        header.push("conservation_drift".into());
        writeln!(out, "{}", header.join(","))?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t}")];
            row.extend(self.states[k].iter().map(|v| format!("{v:.16e}")));
            row.push(format!("{:.16e}", self.consensus_error[k]));
            row.push(format!("{:.16e}", self.conservation_drift[k]));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// JSON sidecar written next to a trajectory CSV.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMetadata<'a> {
    pub config: &'a SimConfig,
    pub seed: Option<u64>,
    pub target: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub convergence_time: Option<f64>,
    pub max_conservation_drift: f64,
}
