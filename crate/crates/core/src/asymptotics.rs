//! Exact and asymptotic clean-lattice solutions for single-site excitation,
//! used as oracles for the time integrator and as the analysis layer for
//! group velocities.
//!
//! The exact amplitude is the Brillouin-zone integral
//! c_n(t) = (1/2π) ∫ exp[iqn − iE(q)t] dq over the extended zone; at long
//! times it reduces to two dispersive Gaussian wave packets launched from the
//! saddle wave numbers q = ±π/2.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::model::LatticeParams;
use crate::propagator::{InitialCondition, Trajectory};
use crate::spectrum::{dispersion_chain, SaddleConstants};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One of the two Gaussian wave packets of the long-time expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPacket {
    /// Carrier wave number (q₁ or q₂).
    pub q_c: f64,
    pub e: Complex64,
    pub de: Complex64,
    pub d2e: Complex64,
}

impl AsymptoticPacket {
    /// √(1/(2πi E″ t)) — decays as t^{−1/2}.
    pub fn weight(&self, t: f64) -> Complex64 {
        (Complex64::new(1.0, 0.0) / (std::f64::consts::TAU * I * self.d2e * t)).sqrt()
    }

    /// Packet contribution to c_n(t).
    pub fn amplitude(&self, n: i64, t: f64) -> Complex64 {
        let x = n as f64;
        let carrier = (I * (self.q_c * x - self.e * t)).exp();
        let drift = x - self.de * t;
        let envelope = (-(drift * drift) / (2.0 * I * self.d2e * t)).exp();
        self.weight(t) * carrier * envelope
    }
}

fn check_panels(panels: usize) -> Result<()> {
    if panels < 64 {
        return Err(Error::Config(format!(
            "Brillouin-zone quadrature needs at least 64 panels (got {panels})"
        )));
    }
    Ok(())
}

/// Exact clean-lattice amplitude c_n(t) from single-site excitation at n = 0,
/// by periodic trapezoid quadrature of the Bloch integral over [−π, π].
///
/// The integrand is 2π-periodic, so the quadrature converges spectrally in
/// `panels`. Valid for the clean lattice only (U_n = 0).
pub fn bloch_integral(n: i64, t: f64, params: &LatticeParams, panels: usize) -> Result<Complex64> {
    check_panels(panels)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..panels {
        let q = -std::f64::consts::PI + std::f64::consts::TAU * j as f64 / panels as f64;
        let e = dispersion_chain(q, params).e;
        acc += (I * (q * n as f64 - e * t)).exp();
    }
    Ok(acc / panels as f64)
}

/// [`bloch_integral`] over a span of site offsets, sharing the dispersion
/// samples and evaluating sites in parallel.
pub fn bloch_profile(
    offsets: &[i64],
    t: f64,
    params: &LatticeParams,
    panels: usize,
) -> Result<Vec<Complex64>> {
    check_panels(panels)?;
    let nodes: Vec<(f64, Complex64)> = (0..panels)
        .map(|j| {
            let q = -std::f64::consts::PI + std::f64::consts::TAU * j as f64 / panels as f64;
            let phase = -I * dispersion_chain(q, params).e * t;
            (q, phase.exp())
        })
        .collect();
    Ok(offsets
        .par_iter()
        .map(|&n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, w) in &nodes {
                acc += (I * q * n as f64).exp() * w;
            }
            acc / panels as f64
        })
        .collect())
}

/// Long-time amplitude: the sum of the two saddle-point Gaussian packets.
pub fn asymptotic_amplitude(n: i64, t: f64, sc: &SaddleConstants) -> Result<Complex64> {
    if t <= 0.0 {
        return Err(Error::Domain(format!(
            "the long-time packet expansion needs t > 0 (got {t})"
        )));
    }
    let (p1, p2) = saddle_packets(sc);
    Ok(p1.amplitude(n, t) + p2.amplitude(n, t))
}

/// The two packets carried by a set of saddle constants.
pub fn saddle_packets(sc: &SaddleConstants) -> (AsymptoticPacket, AsymptoticPacket) {
    (
        AsymptoticPacket { q_c: sc.q1, e: sc.e1, de: sc.de1, d2e: sc.d2e1 },
        AsymptoticPacket { q_c: sc.q2, e: sc.e2, de: sc.de2, d2e: sc.d2e2 },
    )
}

/// Which outgoing packet a velocity fit tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// Measure a packet group velocity from trajectory data: track the peak of
/// |p_n| on one side of the launch site with sub-site parabolic
/// interpolation, then fit position vs. time over the second half of the
/// run. Fails when the packets never separate from the launch region
/// (vanishing group velocity near φ = π/2).
pub fn group_velocity_fit(traj: &Trajectory, direction: Direction) -> Result<f64> {
    if traj.len() < 6 {
        return Err(Error::FitFailure(format!(
            "velocity fit needs at least 6 samples (got {})",
            traj.len()
        )));
    }
    let center = match traj.init {
        Some(InitialCondition::SingleSite { n0 }) | Some(InitialCondition::Gaussian { n0, .. }) => n0,
        None => {
            let first = traj.abs_state(0);
            argmax(&first)
        }
    };
    let sites = traj.sites();
    let half = traj.len() / 2;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(traj.len() - half);
    for i in half..traj.len() {
        let abs = traj.abs_state(i);
        let (lo, hi) = match direction {
            Direction::Right => (center + 1, sites),
            Direction::Left => (0, center),
        };
        if lo >= hi {
            return Err(Error::FitFailure("no sites on the requested side of the launch".into()));
        }
        let local = argmax(&abs[lo..hi]) + lo;
        points.push((traj.times[i], refine_peak(&abs, local)));
    }
    let (_, last_x) = *points.last().expect("non-empty fit window");
    if (last_x - center as f64).abs() < 5.0 {
        return Err(Error::FitFailure(format!(
            "packet peak stayed at {:.2} sites from the launch site; packets unresolved",
            (last_x - center as f64).abs()
        )));
    }
    Ok(least_squares_slope(&points))
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Sub-site peak position by fitting a parabola through the discrete maximum
/// and its neighbors.
fn refine_peak(abs: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= abs.len() {
        return i as f64;
    }
    let (l, c, r) = (abs[i - 1], abs[i], abs[i + 1]);
    let denom = l - 2.0 * c + r;
    if denom.abs() < 1e-300 {
        return i as f64;
    }
    i as f64 + 0.5 * (l - r) / denom
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut st, mut sx, mut stt, mut stx) = (0.0, 0.0, 0.0, 0.0);
    for &(t, x) in points {
        st += t;
        sx += x;
        stt += t * t;
        stx += t * x;
    }
    (n * stx - st * sx) / (n * stt - st * st)
}
