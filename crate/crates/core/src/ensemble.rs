//! Seeded disorder realizations and parallel ensemble averaging.
//!
//! Member seeds are derived from the base seed with a 64-bit mix, so members
//! can run on any worker in any order and still draw bit-identical disorder.
//! The reduction iterates members in index order, which keeps ensemble
//! outputs byte-stable regardless of scheduling.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::model::{build_chain, FieldKind, LatticeParams, SiteField};
use crate::observables::spread_metrics;
use crate::propagator::{default_dt, evolve, InitialCondition, Trajectory};
use crate::Result;

/// SplitMix64 finalizer; the standard 64-bit avalanche mix.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of ensemble member `k`, derived from the base seed by counter mixing.
pub fn member_seed(base_seed: u64, k: u64) -> u64 {
    splitmix64(base_seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `size` i.i.d. draws from the uniform distribution on the open interval
/// (−delta, +delta), from a deterministic seeded generator.
pub fn draw_disorder(seed: u64, size: usize, delta: f64) -> SiteField {
    assert!(delta >= 0.0, "disorder half-width must be non-negative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..size)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            -delta + 2.0 * delta * u
        })
        .collect();
    SiteField::from_parts(values, FieldKind::UniformDisorder { delta })
}

/// A single propagation configuration on the chain representation.
#[derive(Debug, Clone)]
pub struct PropagationScenario {
    pub params: LatticeParams,
    pub size: usize,
    pub init: InitialCondition,
    pub t_final: f64,
    /// Integration step; `None` picks the stability default for the operator.
    pub dt: Option<f64>,
    pub sample_every: usize,
}

impl PropagationScenario {
    pub fn run(&self, field: &SiteField) -> Result<Trajectory> {
        let op = build_chain(&self.params, field, self.size)?;
        let dt = self.dt.unwrap_or_else(|| default_dt(&op));
        evolve(&op, &self.init, self.t_final, dt, self.sample_every)
    }
}

/// A disorder-averaging experiment.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub realizations: usize,
    pub base_seed: u64,
    /// Disorder half-width Δ; U_n uniform on (−Δ, Δ).
    pub delta: f64,
    pub scenario: PropagationScenario,
}

/// Averaged σ(t) curve plus the per-realization archive.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    /// Step actually used (common to all members).
    pub dt: f64,
    pub times: Vec<f64>,
    /// Mean of the member σ(t) curves.
    pub sigma_mean: Vec<f64>,
    /// Standard error of `sigma_mean`.
    pub sigma_stderr: Vec<f64>,
    /// σ of the pooled distribution: the standard deviation of the
    /// member-averaged |p_n(t)|². Weighs delocalized members by their spatial
    /// extent, so it is the heavier-tailed of the two statistics.
    pub sigma_pooled: Vec<f64>,
    pub member_seeds: Vec<u64>,
    pub member_sigma: Vec<Vec<f64>>,
}

impl EnsembleResult {
    pub fn final_sigma(&self) -> f64 {
        *self.sigma_mean.last().expect("ensemble holds at least one sample")
    }

    /// Mean σ at the sample time closest to `t`.
    pub fn sigma_at(&self, t: f64) -> f64 {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - t).abs().partial_cmp(&(*b - t).abs()).expect("finite times")
            })
            .map(|(i, _)| i)
            .expect("ensemble holds at least one sample");
        self.sigma_mean[idx]
    }
}

/// Run every member, in parallel, and average σ(t) in member order.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    if spec.realizations == 0 {
        return Err(Error::Config("ensemble needs at least one realization".into()));
    }
    if spec.delta < 0.0 {
        return Err(Error::Config(format!(
            "disorder half-width must be non-negative (got {})",
            spec.delta
        )));
    }
    // All members must share the time grid, so resolve dt once against the
    // worst-case on-site magnitude instead of per member.
    let dt = match spec.scenario.dt {
        Some(dt) => dt,
        None => {
            let worst = SiteField::custom(vec![spec.delta; spec.scenario.size]);
            let op = build_chain(&spec.scenario.params, &worst, spec.scenario.size)?;
            default_dt(&op)
        }
    };
    let scenario = PropagationScenario { dt: Some(dt), ..spec.scenario.clone() };

    struct Member {
        seed: u64,
        times: Vec<f64>,
        sigma: Vec<f64>,
        mean: Vec<f64>,
    }

    let members: Vec<Member> = (0..spec.realizations as u64)
        .into_par_iter()
        .map(|k| {
            let seed = member_seed(spec.base_seed, k);
            let run = || -> Result<Member> {
                let field = draw_disorder(seed, scenario.size, spec.delta);
                let traj = scenario.run(&field)?;
                let metrics = spread_metrics(&traj)?;
                Ok(Member {
                    seed,
                    times: metrics.iter().map(|m| m.time).collect(),
                    sigma: metrics.iter().map(|m| m.sigma).collect(),
                    mean: metrics.iter().map(|m| m.mean).collect(),
                })
            };
            run().map_err(|e| Error::Ensemble { seed, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;

    let times = members[0].times.clone();
    let samples = times.len();
    let n = members.len() as f64;
    let mut sigma_mean = vec![0.0f64; samples];
    // Pooled first and second moments of the member-averaged distribution.
    let mut pooled_first = vec![0.0f64; samples];
    let mut pooled_second = vec![0.0f64; samples];
    for m in &members {
        debug_assert_eq!(m.sigma.len(), samples);
        for i in 0..samples {
            sigma_mean[i] += m.sigma[i];
            pooled_first[i] += m.mean[i];
            pooled_second[i] += m.sigma[i] * m.sigma[i] + m.mean[i] * m.mean[i];
        }
    }
    let mut sigma_pooled = vec![0.0f64; samples];
    for i in 0..samples {
        sigma_mean[i] /= n;
        let first = pooled_first[i] / n;
        let second = pooled_second[i] / n;
        sigma_pooled[i] = (second - first * first).max(0.0).sqrt();
    }
    let mut sigma_stderr = vec![0.0f64; samples];
    if members.len() > 1 {
        for m in &members {
            for ((err, s), mean) in sigma_stderr.iter_mut().zip(&m.sigma).zip(&sigma_mean) {
                *err += (s - mean) * (s - mean);
            }
        }
        for err in sigma_stderr.iter_mut() {
            *err = (*err / (n - 1.0)).sqrt() / n.sqrt();
        }
    }
    Ok(EnsembleResult {
        times,
        sigma_mean,
        sigma_stderr,
        sigma_pooled,
        member_seeds: members.iter().map(|m| m.seed).collect(),
        member_sigma: members.into_iter().map(|m| m.sigma).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Operator;

    #[test]
    fn zero_width_disorder_is_clean_valued() {
        let f = draw_disorder(42, 100, 0.0);
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn draws_are_deterministic_and_seed_sensitive() {
        let a = draw_disorder(7, 50, 1.0);
        let b = draw_disorder(7, 50, 1.0);
        let c = draw_disorder(8, 50, 1.0);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn draws_stay_strictly_inside_the_interval() {
        let delta = 0.75;
        let f = draw_disorder(1, 100_000, delta);
        assert!(f.values().iter().all(|v| v.abs() < delta));
        assert_eq!(f.kind(), FieldKind::UniformDisorder { delta });
    }

    #[test]
    fn uniform_moments() {
        let f = draw_disorder(3, 1_000_000, 1.0);
        let n = f.len() as f64;
        let mean: f64 = f.values().iter().sum::<f64>() / n;
        let var: f64 = f.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.005, "mean = {mean}");
        assert!((var - 1.0 / 3.0).abs() < 0.01, "variance = {var}");
    }

    #[test]
    fn member_seeds_differ() {
        let seeds: Vec<u64> = (0..100).map(|k| member_seed(12345, k)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
    }

    fn small_spec() -> EnsembleSpec {
        EnsembleSpec {
            realizations: 4,
            base_seed: 99,
            delta: 1.0,
            scenario: PropagationScenario {
                params: LatticeParams::non_hermitian(0.3, 1.0, 0.0),
                size: 41,
                init: InitialCondition::SingleSite { n0: 20 },
                t_final: 3.0,
                dt: None,
                sample_every: 20,
            },
        }
    }

    #[test]
    fn single_realization_equals_direct_run() {
        let mut spec = small_spec();
        spec.realizations = 1;
        let ens = run_ensemble(&spec).unwrap();
        let field = draw_disorder(member_seed(spec.base_seed, 0), 41, 1.0);
        let scenario = PropagationScenario { dt: Some(ens_dt(&spec)), ..spec.scenario.clone() };
        let traj = scenario.run(&field).unwrap();
        let metrics = spread_metrics(&traj).unwrap();
        for (e, m) in ens.sigma_mean.iter().zip(&metrics) {
            assert_eq!(*e, m.sigma);
        }
        assert!(ens.sigma_stderr.iter().all(|s| *s == 0.0));
    }

    fn ens_dt(spec: &EnsembleSpec) -> f64 {
        let worst = SiteField::custom(vec![spec.delta; spec.scenario.size]);
        let op = build_chain(&spec.scenario.params, &worst, spec.scenario.size).unwrap();
        default_dt(&op)
    }

    #[test]
    fn reruns_are_bit_identical() {
        let spec = small_spec();
        let a = run_ensemble(&spec).unwrap();
        let b = run_ensemble(&spec).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.sigma_mean, b.sigma_mean);
        assert_eq!(a.sigma_stderr, b.sigma_stderr);
        assert_eq!(a.member_seeds, b.member_seeds);
    }

    #[test]
    fn member_failure_names_the_seed() {
        let mut spec = small_spec();
        // Step chosen at the clean-lattice stability edge: every disordered
        // member exceeds the bound and must fail.
        let clean = build_chain(&spec.scenario.params, &SiteField::clean(41), 41).unwrap();
        spec.scenario.dt = Some(0.1 / clean.rate_bound());
        match run_ensemble(&spec) {
            Err(Error::Ensemble { seed, .. }) => {
                let expected: Vec<u64> =
                    (0..spec.realizations as u64).map(|k| member_seed(spec.base_seed, k)).collect();
                assert!(expected.contains(&seed), "unknown member seed {seed}");
            }
            other => panic!("expected an ensemble member error, got {other:?}"),
        }
    }
}
