//! Derived quantities of a propagation run: norm, first and second moments
//! of the normalized probability distribution, and transmission/reflection
//! diagnostics for scattering off a pair of defects.

use crate::error::Error;
use crate::propagator::{InitialCondition, Trajectory};
use crate::Result;

/// Probe trace values below this floor count as "nothing ever arrived" and
/// produce an echo count of zero instead of counting noise peaks.
pub const TRACE_FLOOR: f64 = 1e-6;

/// Per-sample spreading metrics of the normalized distribution |p_n(t)|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadMetrics {
    pub time: f64,
    /// ln P(t), the log of the physical squared norm.
    pub norm_log: f64,
    /// First moment Σ n |p_n|², in site units.
    pub mean: f64,
    /// Standard deviation of |p_n|².
    pub sigma: f64,
}

/// Moments of every stored sample of a trajectory.
pub fn spread_metrics(traj: &Trajectory) -> Result<Vec<SpreadMetrics>> {
    let mut out = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let state = &traj.states[i];
        let mut total = 0.0;
        let mut first = 0.0;
        let mut second = 0.0;
        for (n, amp) in state.iter().enumerate() {
            let w = amp.norm_sqr();
            total += w;
            first += n as f64 * w;
            second += (n as f64) * (n as f64) * w;
        }
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numerical(format!(
                "zero or non-finite norm in sample {i} (total = {total})"
            )));
        }
        let mean = first / total;
        let var = (second / total - mean * mean).max(0.0);
        out.push(SpreadMetrics {
            time: traj.times[i],
            norm_log: traj.log_norm[i],
            mean,
            sigma: var.sqrt(),
        });
    }
    Ok(out)
}

/// Outcome of a wave packet scattering on the region [n1, n2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterReport {
    /// Probability fraction beyond the far side of the region.
    pub transmitted: f64,
    /// Probability fraction behind the launch side.
    pub reflected: f64,
    /// Probability fraction left inside [n1, n2].
    pub resident: f64,
    /// Number of distinct transmitted pulses seen at the probe site.
    pub echoes: usize,
    /// Probe site used for the pulse count.
    pub probe: usize,
    /// Ballistic packet speed measured from the early mean drift.
    pub incident_speed: f64,
}

/// Amplitude time trace |p_site(t)| of a trajectory.
pub fn probe_trace(traj: &Trajectory, site: usize) -> Result<Vec<(f64, f64)>> {
    if site >= traj.sites() {
        return Err(Error::Config(format!(
            "probe site {site} outside lattice of {} sites",
            traj.sites()
        )));
    }
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| (t, s[site].norm()))
        .collect())
}

/// Split the final-state probability of a directed Gaussian packet into
/// reflected / resident / transmitted fractions relative to the region
/// [n1, n2], and count transmitted pulses (echoes) at a probe site placed
/// 4 w0 beyond the far side.
///
/// Pulses are maxima of the probe trace above `pulse_threshold` times the
/// trace maximum, separated by at least the packet transit time w0/v.
pub fn scatter_report(
    traj: &Trajectory,
    n1: usize,
    n2: usize,
    pulse_threshold: f64,
) -> Result<ScatterReport> {
    let sites = traj.sites();
    if n1 >= n2 || n2 >= sites {
        return Err(Error::Config(format!(
            "scattering region needs n1 < n2 < sites (got n1={n1}, n2={n2}, sites={sites})"
        )));
    }
    if traj.len() < 4 {
        return Err(Error::Config("scatter report needs at least 4 samples".into()));
    }
    let w0 = match traj.init {
        Some(InitialCondition::Gaussian { w0, .. }) => w0,
        _ => {
            return Err(Error::Domain(
                "scatter report requires a Gaussian wave-packet initial condition".into(),
            ))
        }
    };

    // Direction and speed from the early ballistic drift of the mean.
    let metrics = spread_metrics(traj)?;
    let dt_early = metrics[1].time - metrics[0].time;
    let v = (metrics[1].mean - metrics[0].mean) / dt_early;
    if v.abs() < 1e-3 {
        return Err(Error::Domain(format!(
            "packet barely moves (v = {v:.2e}); scattering fractions are undefined"
        )));
    }
    let rightward = v > 0.0;

    let probe_offset = (4.0 * w0).round() as i64;
    let probe = if rightward {
        n2 as i64 + probe_offset
    } else {
        n1 as i64 - probe_offset
    };
    if probe < 0 || probe as usize >= sites {
        return Err(Error::Config(format!(
            "probe site {probe} falls outside the lattice of {sites} sites"
        )));
    }
    let probe = probe as usize;

    // The run must be long enough for the packet to traverse the region and
    // reach the probe.
    let launch = metrics[0].mean;
    let t_cross = ((probe as f64 - launch).abs() + 2.0 * w0) / v.abs();
    let t_final = traj.final_time();
    if t_final < t_cross {
        return Err(Error::Incomplete(format!(
            "packet needs t ≈ {t_cross:.1} to clear the defects and reach the probe, run \
             ended at t = {t_final:.1}"
        )));
    }

    // Final-state probability split.
    let final_state = traj.final_state();
    let (mut before, mut inside, mut beyond) = (0.0, 0.0, 0.0);
    for (n, amp) in final_state.iter().enumerate() {
        let w = amp.norm_sqr();
        if n < n1 {
            before += w;
        } else if n <= n2 {
            inside += w;
        } else {
            beyond += w;
        }
    }
    let (transmitted, reflected) = if rightward { (beyond, before) } else { (before, beyond) };

    // Pulse counting on the probe trace.
    let trace = probe_trace(traj, probe)?;
    let global_max = trace.iter().map(|&(_, a)| a).fold(0.0f64, f64::max);
    let echoes = if global_max < TRACE_FLOOR {
        0
    } else {
        let threshold = pulse_threshold * global_max;
        let min_gap = w0 / v.abs();
        let mut count = 0usize;
        let mut last_pulse = f64::NEG_INFINITY;
        for i in 0..trace.len() {
            let (t, a) = trace[i];
            let left_ok = i == 0 || trace[i - 1].1 <= a;
            let right_ok = i + 1 == trace.len() || trace[i + 1].1 < a;
            if a >= threshold && left_ok && right_ok && t - last_pulse >= min_gap {
                count += 1;
                last_pulse = t;
            }
        }
        count
    };

    Ok(ScatterReport { transmitted, reflected, resident: inside, echoes, probe, incident_speed: v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain, LatticeParams, SiteField};
    use crate::propagator::evolve;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn initial_single_site_moments() {
        let p = LatticeParams::hermitian(1.0);
        let op = build_chain(&p, &SiteField::clean(31), 31).unwrap();
        let traj = evolve(&op, &InitialCondition::SingleSite { n0: 17 }, 0.0, 0.01, 1).unwrap();
        let m = spread_metrics(&traj).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m[0].mean - 17.0).abs() < 1e-12);
        assert!(m[0].sigma.abs() < 1e-12);
        assert!(m[0].norm_log.abs() < 1e-12);
    }

    #[test]
    fn hermitian_spread_is_ballistic() {
        // sigma(t) = sqrt(2) rho t for the clean Hermitian chain.
        let p = LatticeParams::hermitian(1.0);
        let n = 141;
        let op = build_chain(&p, &SiteField::clean(n), n).unwrap();
        let traj = evolve(&op, &InitialCondition::SingleSite { n0: 70 }, 25.0, 0.01, 100).unwrap();
        let metrics = spread_metrics(&traj).unwrap();
        for m in metrics.iter().filter(|m| m.time >= 5.0) {
            let expect = (2.0f64).sqrt() * m.time;
            assert!(
                (m.sigma - expect).abs() < 0.02 * expect,
                "sigma({}) = {} vs {expect}",
                m.time,
                m.sigma
            );
        }
    }

    #[test]
    fn moments_are_gauge_invariant() {
        let base = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_4);
        let n = 101;
        let init = InitialCondition::SingleSite { n0: 50 };
        let run = |gamma: f64| {
            let p = LatticeParams { gamma, ..base };
            let op = build_chain(&p, &SiteField::clean(n), n).unwrap();
            spread_metrics(&evolve(&op, &init, 8.0, 0.002, 400).unwrap()).unwrap()
        };
        let a = run(0.0);
        let b = run(1.2);
        for (ma, mb) in a.iter().zip(&b) {
            assert!((ma.sigma - mb.sigma).abs() < 1e-9);
            assert!((ma.mean - mb.mean).abs() < 1e-9);
        }
    }

    #[test]
    fn free_packet_fully_transmits() {
        let p = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_4);
        let n = 401;
        let op = build_chain(&p, &SiteField::clean(n), n).unwrap();
        // Rightward packet (q0 = -pi/2), region where defects would sit.
        let init = InitialCondition::Gaussian { n0: 100, w0: 10.0, q0: -FRAC_PI_2 };
        let traj = evolve(&op, &init, 120.0, 0.01, 50).unwrap();
        let report = scatter_report(&traj, 180, 200, 0.1).unwrap();
        assert!(report.transmitted > 0.999, "transmitted = {}", report.transmitted);
        assert!(report.reflected < 1e-6, "reflected = {}", report.reflected);
        assert_eq!(report.echoes, 1);
        assert!(report.incident_speed > 1.0);
        assert_eq!(report.probe, 240);
    }

    #[test]
    fn too_short_run_is_incomplete() {
        let p = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_4);
        let n = 401;
        let op = build_chain(&p, &SiteField::clean(n), n).unwrap();
        let init = InitialCondition::Gaussian { n0: 120, w0: 10.0, q0: -FRAC_PI_2 };
        let traj = evolve(&op, &init, 20.0, 0.01, 50).unwrap();
        assert!(matches!(scatter_report(&traj, 180, 200, 0.1), Err(Error::Incomplete(_))));
    }

    #[test]
    fn single_site_runs_are_rejected() {
        let p = LatticeParams::non_hermitian(0.3, 1.0, FRAC_PI_4);
        let op = build_chain(&p, &SiteField::clean(51), 51).unwrap();
        let traj = evolve(&op, &InitialCondition::SingleSite { n0: 25 }, 5.0, 0.01, 10).unwrap();
        assert!(matches!(scatter_report(&traj, 30, 40, 0.1), Err(Error::Domain(_))));
    }
}
