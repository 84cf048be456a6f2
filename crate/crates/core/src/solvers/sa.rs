use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SolverId, SolverOutcome};
use crate::error::{Error, Result};
use crate::qubo::QuboInstance;
use crate::rng;

/// Simulated annealing with geometric cooling and single-flip Metropolis moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    pub t0: f64,
    pub cooling: f64,
    pub iters_per_temp: usize,
    pub num_levels: usize,
    pub trajectories: usize,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self { t0: 10.0, cooling: 0.95, iters_per_temp: 1000, num_levels: 200, trajectories: 100, seed: 0 }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::invalid(format!("t0 must be positive, got {}", self.t0)));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::invalid(format!("cooling must be in (0, 1), got {}", self.cooling)));
        }
        if self.iters_per_temp == 0 || self.num_levels == 0 || self.trajectories == 0 {
            return Err(Error::invalid("iteration, level and trajectory counts must be positive"));
        }
        Ok(())
    }

    pub fn temperature(&self, level: usize) -> f64 {
        self.t0 * self.cooling.powi(level as i32)
    }
}

/// Metropolis rule: downhill always, uphill with probability `exp(-delta / t)`.
/// `u` is a uniform draw in `[0, 1)`.
pub fn metropolis_accept(delta: f64, t: f64, u: f64) -> bool {
    delta <= 0.0 || u < (-delta / t).exp()
}

#[derive(Default, Clone, Copy)]
struct LevelStats {
    uphill_proposed: u64,
    uphill_accepted: u64,
}

fn run_trajectory(
    instance: &QuboInstance,
    config: &SaConfig,
    index: u64,
    mut stats: Option<&mut Vec<LevelStats>>,
) -> Vec<u8> {
    let n = instance.n();
    let mut r = rng::stream(config.seed, index);
    let mut bits: Vec<u8> = (0..n).map(|_| r.random::<bool>() as u8).collect();
    let mut field = instance.fields(&bits);
    let mut e = instance.energy_unchecked(&bits);
    let mut best_e = e;
    let mut best = bits.clone();
    for level in 0..config.num_levels {
        let t = config.temperature(level);
        let mut level_stats = LevelStats::default();
        for _ in 0..config.iters_per_temp {
            let i = r.random_range(0..n);
            let delta = instance.delta_from_field(&bits, &field, i);
            let accept = if delta <= 0.0 {
                true
            } else {
                level_stats.uphill_proposed += 1;
                let ok = metropolis_accept(delta, t, r.random::<f64>());
                level_stats.uphill_accepted += ok as u64;
                ok
            };
            if accept {
                bits[i] ^= 1;
                instance.update_field(&bits, &mut field, i);
                e += delta;
                if e < best_e {
                    best_e = e;
                    best.copy_from_slice(&bits);
                }
            }
        }
        if let Some(s) = stats.as_deref_mut() {
            s.push(level_stats);
        }
    }
    best
}

/// Runs `trajectories` independent annealing chains; each reports the best
/// configuration it visited.
pub fn solve_sa(instance: &QuboInstance, config: &SaConfig) -> Result<SolverOutcome> {
    let started = Instant::now();
    config.validate()?;
    let results: Vec<Vec<u8>> = (0..config.trajectories as u64)
        .into_par_iter()
        .map(|k| run_trajectory(instance, config, k, None))
        .collect();
    Ok(SolverOutcome::from_trajectories(SolverId::Sa, instance, results, started))
}

/// Uphill acceptance rate per temperature level for trajectory 0.
/// Levels without uphill proposals report `None`.
pub fn sa_level_acceptance(instance: &QuboInstance, config: &SaConfig) -> Result<Vec<Option<f64>>> {
    config.validate()?;
    let mut stats = Vec::with_capacity(config.num_levels);
    run_trajectory(instance, config, 0, Some(&mut stats));
    Ok(stats
        .into_iter()
        .map(|s| (s.uphill_proposed > 0).then(|| s.uphill_accepted as f64 / s.uphill_proposed as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_synthetic;
    use crate::solvers::solve_brute_force;

    fn quick() -> SaConfig {
        SaConfig { iters_per_temp: 100, num_levels: 100, trajectories: 10, ..SaConfig::default() }
    }

    #[test]
    fn zero_matrix() {
        let out = solve_sa(&QuboInstance::zeros(5).unwrap(), &quick()).unwrap();
        assert_eq!(out.best_energy, 0.0);
        assert_eq!(out.success_prob, 1.0);
    }

    #[test]
    fn finds_small_optimum() {
        let inst = gen_synthetic(8, 0.0, 2.0, 1).unwrap();
        let exact = solve_brute_force(&inst).unwrap().best_energy;
        let out = solve_sa(&inst, &quick()).unwrap().rescored(exact);
        assert!(out.best_energy >= exact - 1e-9);
        assert!(out.success_prob > 0.0);
        assert!(out.best_energy <= out.mean_energy);
        assert_eq!(inst.evaluate(&out.best_bits).unwrap(), out.best_energy);
    }

    #[test]
    fn deterministic() {
        let inst = gen_synthetic(10, 0.0, 2.0, 2).unwrap();
        let a = solve_sa(&inst, &quick()).unwrap();
        let b = solve_sa(&inst, &quick()).unwrap();
        assert_eq!(a.trajectory_energies, b.trajectory_energies);
        assert_eq!(a.best_bits, b.best_bits);
    }

    #[test]
    fn uphill_acceptance_falls_with_temperature() {
        let inst = gen_synthetic(16, 0.0, 2.0, 3).unwrap();
        let rates = sa_level_acceptance(&inst, &SaConfig::default()).unwrap();
        let first = rates[0].unwrap();
        let last = rates.iter().rev().flatten().next().copied().unwrap();
        assert!(last < first, "{last} vs {first}");
    }

    #[test]
    fn frozen_temperature_rejects_uphill() {
        for delta in [1e-6, 0.5, 3.0, 100.0] {
            for k in 0..100 {
                assert!(!metropolis_accept(delta, 1e-12, k as f64 / 100.0));
            }
        }
        assert!(metropolis_accept(-1.0, 1e-12, 0.99));
        assert!(metropolis_accept(0.0, 1e-12, 0.99));
    }

    #[test]
    fn rejects_bad_config() {
        let inst = QuboInstance::zeros(2).unwrap();
        assert!(solve_sa(&inst, &SaConfig { cooling: 1.0, ..quick() }).is_err());
        assert!(solve_sa(&inst, &SaConfig { t0: 0.0, ..quick() }).is_err());
    }
}
