//! Time integration of the lattice amplitude equations dψ/dt = −i H ψ with a
//! classical fixed-step 4th-order method and overflow-safe per-step
//! renormalization.
//!
//! Raw amplitudes grow or decay exponentially with the loss rate γ, so the
//! integrator keeps `amps · exp(log_scale)` as the physical state and folds
//! the running magnitude into `log_scale`. Sampled trajectories store the
//! unit-norm amplitudes p_n(t) = c_n(t)/√P(t) plus ln P(t), which is all the
//! observables need.

use num_complex::Complex64;

use crate::error::Error;
use crate::model::{LatticeParams, Operator};
use crate::Result;

/// Normalized amplitude at an end site above this value counts as the
/// wavefront touching the open boundary.
pub const EDGE_TOUCH_THRESHOLD: f64 = 1e-8;

/// Product dt · rate_bound must stay below this for the explicit stepper.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Complex amplitude vector with a split-off log-magnitude factor.
///
/// The physical state is `amps · exp(log_scale)`; observables are invariant
/// under `(amps, log_scale) → (amps·s, log_scale − ln s)`.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub amps: Vec<Complex64>,
    pub log_scale: f64,
    pub time: f64,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps, log_scale: 0.0, time: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// L2 norm of the stored (rescaled) amplitudes.
    pub fn l2_norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unit-norm amplitudes p_n.
    pub fn normalized(&self) -> Vec<Complex64> {
        let norm = self.l2_norm();
        self.amps.iter().map(|a| a / norm).collect()
    }

    /// ln P with P = Σ|c_n|² the physical squared norm.
    pub fn log_norm(&self) -> f64 {
        2.0 * (self.log_scale + self.l2_norm().ln())
    }
}

/// Initial excitation of the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// c_n(0) = δ_{n,n0}.
    SingleSite { n0: usize },
    /// c_n(0) ∝ exp[−(n−n0)²/w0² + i q0 n], normalized to unit norm.
    Gaussian { n0: usize, w0: f64, q0: f64 },
}

impl InitialCondition {
    pub fn build(&self, len: usize) -> Result<StateVector> {
        match *self {
            InitialCondition::SingleSite { n0 } => {
                if n0 >= len {
                    return Err(Error::Config(format!(
                        "initial site {n0} outside lattice of {len} sites"
                    )));
                }
                let mut amps = vec![Complex64::new(0.0, 0.0); len];
                amps[n0] = Complex64::new(1.0, 0.0);
                Ok(StateVector::new(amps))
            }
            InitialCondition::Gaussian { n0, w0, q0 } => {
                if n0 >= len {
                    return Err(Error::Config(format!(
                        "packet center {n0} outside lattice of {len} sites"
                    )));
                }
                if !(w0 > 0.0) {
                    return Err(Error::Config(format!("packet width must be positive (got {w0})")));
                }
                let mut amps: Vec<Complex64> = (0..len)
                    .map(|n| {
                        let x = n as f64 - n0 as f64;
                        let envelope = (-x * x / (w0 * w0)).exp();
                        envelope * Complex64::from_polar(1.0, q0 * n as f64)
                    })
                    .collect();
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                for a in amps.iter_mut() {
                    *a /= norm;
                }
                Ok(StateVector::new(amps))
            }
        }
    }
}

/// Sampled evolution: unit-norm states p_n(t), ln P(t), and run metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub log_norm: Vec<f64>,
    /// First time the normalized amplitude at an end block exceeded
    /// [`EDGE_TOUCH_THRESHOLD`], if it ever did.
    pub edge_touch: Option<f64>,
    pub dt: f64,
    pub sample_every: usize,
    pub init: Option<InitialCondition>,
    pub block_size: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    /// |p_n| of sample `i`.
    pub fn abs_state(&self, i: usize) -> Vec<f64> {
        self.states[i].iter().map(|a| a.norm()).collect()
    }

    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("trajectory holds at least the initial sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least the initial sample")
    }
}

/// Default step from the stability bound: dt = 0.05 / rate_bound, floored at
/// rate 0.5 so that degenerate zero-coupling lattices still get a finite step.
pub fn default_dt(op: &dyn Operator) -> f64 {
    0.05 / op.rate_bound().max(0.5)
}

/// Upper bound on the amplitude transport speed, 2ρ + 4κ (sum over hops of
/// range × magnitude, both directions).
pub fn max_velocity(params: &LatticeParams) -> f64 {
    2.0 * params.rho + 4.0 * params.kappa
}

/// Chain size large enough that no wavefront launched from the center can
/// reach the open boundaries within `t_final`, plus `margin` sites per side.
pub fn min_lattice_size(params: &LatticeParams, t_final: f64, margin: usize) -> usize {
    (2.0 * max_velocity(params) * t_final).ceil() as usize + 2 * margin
}

struct Rk4Buffers {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(len: usize) -> Self {
        let zeros = vec![Complex64::new(0.0, 0.0); len];
        Self { k1: zeros.clone(), k2: zeros.clone(), k3: zeros.clone(), k4: zeros.clone(), tmp: zeros }
    }

    fn step(&mut self, op: &dyn Operator, amps: &mut [Complex64], dt: f64) {
        let n = amps.len();
        op.derivative(amps, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = amps[i] + 0.5 * dt * self.k1[i];
        }
        op.derivative(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = amps[i] + 0.5 * dt * self.k2[i];
        }
        op.derivative(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = amps[i] + dt * self.k3[i];
        }
        op.derivative(&self.tmp, &mut self.k4);
        let w = dt / 6.0;
        for i in 0..n {
            amps[i] += w * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Evolve from a built initial condition. See [`evolve_state`].
pub fn evolve(
    op: &dyn Operator,
    init: &InitialCondition,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let state = init.build(op.len())?;
    let mut traj = evolve_state(op, state, t_final, dt, sample_every)?;
    traj.init = Some(*init);
    Ok(traj)
}

/// Integrate dψ/dt = −i H ψ from `state` to `t_final` with fixed step `dt`,
/// sampling every `sample_every` steps (the initial and final states are
/// always included).
///
/// The step must satisfy dt · rate_bound ≤ [`STABILITY_LIMIT`]. Amplitudes
/// are rescaled whenever their maximum leaves [1/2, 2], folding the factor
/// into the state's `log_scale`; NaN or overflow aborts with an error.
pub fn evolve_state(
    op: &dyn Operator,
    mut state: StateVector,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if state.len() != op.len() {
        return Err(Error::Config(format!(
            "state length {} does not match operator length {}",
            state.len(),
            op.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive (got {dt})")));
    }
    if t_final < 0.0 {
        return Err(Error::Config(format!("t_final must be non-negative (got {t_final})")));
    }
    if sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".into()));
    }
    let bound = op.rate_bound();
    if dt * bound > STABILITY_LIMIT * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "dt = {dt} violates the stability bound dt*{bound:.6} <= {STABILITY_LIMIT}"
        )));
    }

    let n_full = (t_final / dt + 1e-12).floor() as u64;
    let remainder = t_final - n_full as f64 * dt;
    let take_remainder = remainder > 1e-9 * dt;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        log_norm: Vec::new(),
        edge_touch: None,
        dt,
        sample_every,
        init: None,
        block_size: op.block_size(),
    };

    let mut buffers = Rk4Buffers::new(state.len());
    let block = op.block_size().min(state.len());

    let post_step = |state: &mut StateVector, t: f64, traj: &mut Trajectory| -> Result<()> {
        state.time = t;
        let mut sum_sq = 0.0f64;
        let mut max_sq = 0.0f64;
        for a in &state.amps {
            let m = a.norm_sqr();
            sum_sq += m;
            if m > max_sq {
                max_sq = m;
            }
        }
        if !sum_sq.is_finite() {
            return Err(Error::Numerical(format!("amplitude overflow or NaN at t = {t}")));
        }
        if max_sq == 0.0 {
            return Err(Error::Numerical(format!("state collapsed to zero at t = {t}")));
        }
        if !(0.25..=4.0).contains(&max_sq) {
            let scale = max_sq.sqrt();
            for a in state.amps.iter_mut() {
                *a /= scale;
            }
            state.log_scale += scale.ln();
        }
        if traj.edge_touch.is_none() {
            let norm = sum_sq.sqrt();
            let n = state.amps.len();
            let edge_max = state.amps[..block]
                .iter()
                .chain(&state.amps[n - block..])
                .map(|a| a.norm())
                .fold(0.0f64, f64::max);
            if edge_max / norm > EDGE_TOUCH_THRESHOLD {
                traj.edge_touch = Some(t);
            }
        }
        Ok(())
    };

    let sample = |state: &StateVector, traj: &mut Trajectory| {
        traj.times.push(state.time);
        traj.states.push(state.normalized());
        traj.log_norm.push(state.log_norm());
    };

    post_step(&mut state, 0.0, &mut traj)?;
    sample(&state, &mut traj);
    let mut sampled_last = true;

    for step in 1..=n_full {
        buffers.step(op, &mut state.amps, dt);
        post_step(&mut state, step as f64 * dt, &mut traj)?;
        sampled_last = step % sample_every as u64 == 0;
        if sampled_last {
            sample(&state, &mut traj);
        }
    }
    if take_remainder {
        buffers.step(op, &mut state.amps, remainder);
        post_step(&mut state, t_final, &mut traj)?;
        sample(&state, &mut traj);
    } else if !sampled_last {
        state.time = t_final;
        sample(&state, &mut traj);
    }
    Ok(traj)
}

/// Self-convergence estimate: runs at dt and dt/2 and returns the max-norm
/// relative difference of the final normalized states. Used to certify a
/// step size for a given scenario.
pub fn convergence_check(
    op: &dyn Operator,
    init: &InitialCondition,
    t_final: f64,
    dt: f64,
) -> Result<f64> {
    let coarse = evolve(op, init, t_final, dt, usize::MAX)?;
    let fine = evolve(op, init, t_final, 0.5 * dt, usize::MAX)?;
    let pc = coarse.final_state();
    let pf = fine.final_state();
    let diff = pc
        .iter()
        .zip(pf)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    let scale = pf.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    Ok(diff / scale)
}
