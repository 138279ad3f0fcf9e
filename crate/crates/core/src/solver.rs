//! Parallel multisplitting iteration, its extrapolated variant and the
//! block generalized AOR iteration.
//!
//! Each iteration computes the local solutions `y_s = M_s⁻¹(N_s x + b)`
//! independently (one task per splitting under [`Execution::Parallel`]) and
//! then forms `Σ_s E_s y_s` on the calling thread in ascending `s`. The
//! reduction order is fixed, so serial and parallel runs are bitwise equal.

use std::time::Instant;

use nalgebra::DVector;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::blockcore::{BlockMatrix, BlockVector, C64};
use crate::error::{Error, Result};
use crate::splitting::{gaor_multisplitting, BlockWeights, Multisplitting, SplitPart, TripleSplit};

/// A stopping metric above this multiple of the first one counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopKind {
    /// `‖x⁽ⁱ⁺¹⁾ − x⁽ⁱ⁾‖₂ < ε`
    AbsDiff,
    /// `‖x⁽ⁱ⁺¹⁾ − x⁽ⁱ⁾‖₂ / ‖x⁽ⁱ⁺¹⁾‖₂ ≤ ε`
    RelDiff,
    /// `‖A x⁽ⁱ⁺¹⁾ − b‖₂ < ε`
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    kind: StopKind,
    epsilon: f64,
    max_iters: usize,
}

impl StopRule {
    pub fn new(kind: StopKind, epsilon: f64, max_iters: usize) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::BadStopRule(format!("epsilon must be positive, got {epsilon}")));
        }
        if max_iters == 0 {
            return Err(Error::BadStopRule("max_iters must be at least 1".into()));
        }
        Ok(Self { kind, epsilon, max_iters })
    }

    pub fn abs_diff(epsilon: f64) -> Self {
        Self::new(StopKind::AbsDiff, epsilon, 10_000).expect("positive epsilon")
    }

    pub fn rel_diff(epsilon: f64) -> Self {
        Self::new(StopKind::RelDiff, epsilon, 10_000).expect("positive epsilon")
    }

    pub fn with_max_iters(self, max_iters: usize) -> Result<Self> {
        Self::new(self.kind, self.epsilon, max_iters)
    }

    pub fn kind(&self) -> StopKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    fn satisfied(&self, metric: f64) -> bool {
        match self.kind {
            StopKind::AbsDiff | StopKind::Residual => metric < self.epsilon,
            StopKind::RelDiff => metric <= self.epsilon,
        }
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self::abs_diff(1e-4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIters,
    Diverged,
}

/// How the `r` local solves of one iteration are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// One rayon task per splitting; runs serially when the `parallel` feature is off.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub stop: StopRule,
    pub execution: Execution,
    /// Keep every iterate in [`SolveReport::iterates`].
    pub record_iterates: bool,
}

impl SolveOptions {
    pub fn new(stop: StopRule) -> Self {
        Self { stop, ..Self::default() }
    }

    pub fn serial(mut self) -> Self {
        self.execution = Execution::Serial;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_iterates = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_x: BlockVector,
    /// Stopping metric after each iteration.
    pub norms: Vec<f64>,
    pub terminated: Termination,
    /// Informational only.
    pub wall_time: f64,
    /// `x⁽¹⁾, x⁽²⁾, …` when recording was requested.
    pub iterates: Vec<BlockVector>,
}

fn check_dims(ms: &Multisplitting, b: &BlockVector, x: &BlockVector) -> Result<()> {
    let a = ms.a();
    for (name, v) in [("b", b), ("x", x)] {
        if v.m() != a.m() || v.k() != a.k() {
            return Err(Error::DimensionMismatch(format!(
                "{name} has {} segments of {}, matrix has {} blocks of {}",
                v.m(),
                v.k(),
                a.m(),
                a.k()
            )));
        }
    }
    Ok(())
}

/// `M_s⁻¹(N_s x + b)`, or `None` when every weight of this splitting is zero.
fn local_solve(part: &SplitPart, b: &DVector<C64>, x: &DVector<C64>) -> Option<DVector<C64>> {
    if part.weights.is_zero() {
        return None;
    }
    let rhs = part.n.as_dense() * x + b;
    Some(part.solve_m(&rhs))
}

fn local_solves(ms: &Multisplitting, b: &DVector<C64>, x: &DVector<C64>, exec: Execution) -> Vec<Option<DVector<C64>>> {
    match exec {
        Execution::Serial => ms.parts().iter().map(|p| local_solve(p, b, x)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => ms.parts().par_iter().map(|p| local_solve(p, b, x)).collect(),
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => ms.parts().iter().map(|p| local_solve(p, b, x)).collect(),
    }
}

fn combine(ms: &Multisplitting, ys: Vec<Option<DVector<C64>>>) -> DVector<C64> {
    let n = ms.a().dim();
    let mut out = DVector::<C64>::zeros(n);
    for (part, y) in ms.parts().iter().zip(ys) {
        let Some(y) = y else { continue };
        for (idx, &w) in part.scalar_weights().iter().enumerate() {
            if w != 0.0 {
                out[idx] += y[idx] * w;
            }
        }
    }
    out
}

fn step_raw(ms: &Multisplitting, b: &DVector<C64>, x: &DVector<C64>, exec: Execution) -> DVector<C64> {
    combine(ms, local_solves(ms, b, x, exec))
}

/// One multisplitting iteration `Σ_s E_s M_s⁻¹(N_s x + b)`.
pub fn step_multisplitting(ms: &Multisplitting, b: &BlockVector, x: &BlockVector) -> Result<BlockVector> {
    step_multisplitting_with(ms, b, x, Execution::Serial)
}

pub fn step_multisplitting_with(ms: &Multisplitting, b: &BlockVector, x: &BlockVector, exec: Execution) -> Result<BlockVector> {
    check_dims(ms, b, x)?;
    BlockVector::from_dense(step_raw(ms, b.as_dense(), x.as_dense(), exec), x.m(), x.k())
}

fn iterate<F>(ms: &Multisplitting, b: &BlockVector, x0: &BlockVector, opts: &SolveOptions, mut step: F) -> Result<SolveReport>
where
    F: FnMut(&DVector<C64>) -> DVector<C64>,
{
    check_dims(ms, b, x0)?;
    let start = Instant::now();
    let stop = opts.stop;
    let a = ms.a().as_dense();
    let bd = b.as_dense();
    let mut x = x0.as_dense().clone();
    let mut norms = Vec::new();
    let mut iterates = Vec::new();
    let mut terminated = Termination::MaxIters;
    let mut first = None;
    for _ in 0..stop.max_iters() {
        let next = step(&x);
        let metric = match stop.kind() {
            StopKind::AbsDiff => (&next - &x).norm(),
            StopKind::RelDiff => (&next - &x).norm() / next.norm(),
            StopKind::Residual => (a * &next - bd).norm(),
        };
        x = next;
        norms.push(metric);
        if opts.record_iterates {
            iterates.push(BlockVector::from_dense(x.clone(), x0.m(), x0.k())?);
        }
        let reference = *first.get_or_insert(metric);
        if stop.satisfied(metric) {
            terminated = Termination::Converged;
            break;
        }
        if !metric.is_finite() || metric > DIVERGENCE_FACTOR * reference {
            terminated = Termination::Diverged;
            break;
        }
    }
    Ok(SolveReport {
        iterations: norms.len(),
        final_x: BlockVector::from_dense(x, x0.m(), x0.k())?,
        norms,
        terminated,
        wall_time: start.elapsed().as_secs_f64(),
        iterates,
    })
}

pub fn solve_multisplitting(ms: &Multisplitting, b: &BlockVector, x0: &BlockVector, opts: &SolveOptions) -> Result<SolveReport> {
    let bd = b.as_dense();
    iterate(ms, b, x0, opts, |x| step_raw(ms, bd, x, opts.execution))
}

/// `x ← τ·step(x) + (1 − τ)·x`.
pub fn solve_extrapolated(
    ms: &Multisplitting,
    b: &BlockVector,
    x0: &BlockVector,
    tau: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::BadTau(tau));
    }
    if tau == 1.0 {
        return solve_multisplitting(ms, b, x0, opts);
    }
    let bd = b.as_dense();
    let keep = C64::new(1.0 - tau, 0.0);
    let t = C64::new(tau, 0.0);
    iterate(ms, b, x0, opts, |x| step_raw(ms, bd, x, opts.execution) * t + x * keep)
}

/// Builds the generalized AOR multisplitting and iterates it.
pub fn solve_bgaor(
    a: &BlockMatrix,
    b: &BlockVector,
    triples: &[TripleSplit],
    ws: &[BlockWeights],
    x0: &BlockVector,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let ms = gaor_multisplitting(a, triples, ws)?;
    solve_multisplitting(&ms, b, x0, opts)
}
