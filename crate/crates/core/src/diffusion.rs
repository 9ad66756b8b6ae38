//! Two-phase exchange-based diffusion.
//!
//! Each full step moves the entire vertex value onto the hb-edges through
//! `G_V⁻¹B_V` and then moves it back through `G_E⁻¹B_E`. The emptied side is
//! set to exact zero; the residual of the explicit subtraction form is still
//! computed so that drift can be detected.

use serde::Serialize;

use crate::bias::BiasedSystem;
use crate::error::{Error, Result};
use crate::hbgraph::HbGraph;

pub const DEFAULT_ITERATIONS: usize = 200;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Which side currently holds the information value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    /// Integer time: vertices hold the value, `epsilon` is the last half-step record.
    Vertices,
    /// Half-integer time: hb-edges hold the value, vertices are empty.
    HbEdges,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionState {
    /// Completed full steps.
    pub t: usize,
    pub phase: Phase,
    /// Vertex values `α`.
    pub alpha: Vec<f64>,
    /// Hb-edge values `ε` at the last half step.
    pub epsilon: Vec<f64>,
}

/// Conservation bookkeeping for one half step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCheck {
    /// `|I(𝔥) − I_before|` after the half step.
    pub conservation: f64,
    /// Largest magnitude of the explicit subtraction form of the emptied side.
    pub zero_residual: f64,
}

impl DiffusionState {
    /// Uniform `1/n` on the vertices, nothing on the hb-edges.
    pub fn init(g: &HbGraph) -> Result<Self> {
        g.ensure_connected()?;
        Ok(DiffusionState::uniform(g.n(), g.p()))
    }

    pub(crate) fn uniform(n: usize, p: usize) -> Self {
        DiffusionState {
            t: 0,
            phase: Phase::Vertices,
            alpha: vec![1.0 / n as f64; n],
            epsilon: vec![0.0; p],
        }
    }

    /// Starts from an arbitrary probability vector on the vertices.
    pub fn from_distribution(alpha: Vec<f64>, p: usize) -> Result<Self> {
        if alpha.iter().any(|&a| !(a.is_finite() && a >= 0.0)) {
            return Err(Error::InvalidArgument(
                "initial values must be finite and non-negative".into(),
            ));
        }
        let total: f64 = alpha.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "initial values sum to {total}, expected 1"
            )));
        }
        Ok(DiffusionState {
            t: 0,
            phase: Phase::Vertices,
            alpha,
            epsilon: vec![0.0; p],
        })
    }

    /// `I_t(V)`
    pub fn vertex_information(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// `I_t(𝔈)` of the retained record.
    pub fn hbedge_information(&self) -> f64 {
        self.epsilon.iter().sum()
    }

    /// Total value currently held by the hb-graph. At integer times the
    /// retained hb-edge record is not counted, since the literal hb-edge
    /// values are zero there.
    pub fn information(&self) -> f64 {
        match self.phase {
            Phase::Vertices => self.vertex_information(),
            Phase::HbEdges => self.hbedge_information() + self.vertex_information(),
        }
    }

    fn check_dims(&self, sys: &BiasedSystem) -> Result<()> {
        if self.alpha.len() != sys.n() || self.epsilon.len() != sys.p() {
            return Err(Error::InvalidArgument(format!(
                "state has {}×{} entries, system is {}×{}",
                self.alpha.len(),
                self.epsilon.len(),
                sys.n(),
                sys.p()
            )));
        }
        Ok(())
    }

    /// Vertices hand over all their value to the hb-edges.
    pub fn half_step_v_to_e(&mut self, sys: &BiasedSystem) -> Result<PhaseCheck> {
        self.check_dims(sys)?;
        if self.phase != Phase::Vertices {
            return Err(Error::InvalidArgument(
                "vertex-to-hb-edge phase requires the value on the vertices".into(),
            ));
        }
        let before = self.vertex_information();
        sys.push_to_hbedges(&self.alpha, &mut self.epsilon);
        let zero_residual = outgoing_residual(&self.alpha, |i| sys.vertex_kernel().row(i).1);
        self.alpha.fill(0.0);
        self.phase = Phase::HbEdges;
        Ok(PhaseCheck {
            conservation: (self.information() - before).abs(),
            zero_residual,
        })
    }

    /// Hb-edges hand over all their value back to the vertices. `epsilon`
    /// keeps the half-step values as the hb-edge record.
    pub fn half_step_e_to_v(&mut self, sys: &BiasedSystem) -> Result<PhaseCheck> {
        self.check_dims(sys)?;
        if self.phase != Phase::HbEdges {
            return Err(Error::InvalidArgument(
                "hb-edge-to-vertex phase requires the value on the hb-edges".into(),
            ));
        }
        let before = self.information();
        sys.push_to_vertices(&self.epsilon, &mut self.alpha);
        let zero_residual = outgoing_residual(&self.epsilon, |j| sys.hbedge_kernel().row(j).1);
        self.phase = Phase::Vertices;
        self.t += 1;
        Ok(PhaseCheck {
            conservation: (self.information() - before).abs(),
            zero_residual,
        })
    }

    /// One full step; returns the checks of both half steps.
    pub fn step(&mut self, sys: &BiasedSystem) -> Result<[PhaseCheck; 2]> {
        let a = self.half_step_v_to_e(sys)?;
        let b = self.half_step_e_to_v(sys)?;
        Ok([a, b])
    }
}

/// `max_r |x_r − Σ_k x_r·kernel(r,k)|`, the value left behind by the
/// subtraction form of a phase.
fn outgoing_residual<'a>(values: &[f64], row: impl Fn(usize) -> &'a [f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(r, &x)| {
            let given: f64 = row(r).iter().map(|&prob| prob * x).sum();
            (x - given).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    pub iterations: usize,
    /// Stop early once the L1 change of `α` over a full step is at most this.
    pub convergence_tol: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            iterations: DEFAULT_ITERATIONS,
            convergence_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub state: DiffusionState,
    /// Per full step: `|I − 1|` after each half step.
    pub conservation: Vec<[f64; 2]>,
    pub max_conservation_residual: f64,
    pub max_zero_residual: f64,
    /// L1 change of `α` over the last full step.
    pub last_change: f64,
    pub converged: bool,
}

/// Runs the diffusion from the uniform initial state.
pub fn run(g: &HbGraph, sys: &BiasedSystem, opts: &RunOptions) -> Result<RunOutcome> {
    run_from(DiffusionState::init(g)?, sys, opts)
}

pub fn run_from(mut state: DiffusionState, sys: &BiasedSystem, opts: &RunOptions) -> Result<RunOutcome> {
    if opts.iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let mut conservation = Vec::with_capacity(opts.iterations);
    let mut max_zero_residual: f64 = 0.0;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut previous = state.alpha.clone();
    for _ in 0..opts.iterations {
        let [a, b] = state.step(sys)?;
        let step = state.t;
        if state.alpha.iter().chain(&state.epsilon).any(|x| !x.is_finite()) {
            return Err(Error::Numerical {
                step,
                what: "non-finite value in diffusion state".into(),
            });
        }
        // conservation is measured against the unit total, not just the previous step
        let half = (state.hbedge_information() - 1.0).abs().max(a.conservation);
        let full = (state.vertex_information() - 1.0).abs().max(b.conservation);
        conservation.push([half, full]);
        max_zero_residual = max_zero_residual.max(a.zero_residual).max(b.zero_residual);
        last_change = l1_distance(&previous, &state.alpha);
        previous.copy_from_slice(&state.alpha);
        if let Some(tol) = opts.convergence_tol {
            if last_change <= tol {
                converged = true;
                break;
            }
        }
    }
    let max_conservation_residual = conservation
        .iter()
        .flat_map(|c| c.iter().copied())
        .fold(0.0, f64::max);
    Ok(RunOutcome {
        state,
        conservation,
        max_conservation_residual,
        max_zero_residual,
        last_change,
        converged,
    })
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Stationary vertex and hb-edge distributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stationary {
    pub vertex: Vec<f64>,
    pub hbedge: Vec<f64>,
    pub iterations: usize,
    /// `‖π_V T − π_V‖₁` at exit.
    pub residual: f64,
}

/// Power iteration `π ← πT` from the uniform vector, then `π_E = π_V G_V⁻¹B_V`.
pub fn stationary_by_power_iteration(sys: &BiasedSystem, tol: f64, max_iter: usize) -> Result<Stationary> {
    let n = sys.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut mid = vec![0.0; sys.p()];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        sys.push_to_hbedges(&pi, &mut mid);
        sys.push_to_vertices(&mid, &mut next);
        residual = l1_distance(&pi, &next);
        if !residual.is_finite() {
            return Err(Error::Numerical {
                step: it,
                what: "non-finite residual in power iteration".into(),
            });
        }
        std::mem::swap(&mut pi, &mut next);
        if residual <= tol {
            let total: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|x| *x /= total);
            let mut hbedge = vec![0.0; sys.p()];
            sys.push_to_hbedges(&pi, &mut hbedge);
            return Ok(Stationary {
                vertex: pi,
                hbedge,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}
