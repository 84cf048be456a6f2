//! Simulated quantum annealing by path-integral Monte Carlo.
//!
//! The transverse-field Ising model is Trotterized into `P` coupled replicas
//! of the classical spin system. Metropolis moves sample
//! `H_eff = sum_k H(s^k) / P - J_perp sum_k sum_i s_i^k s_i^{k+1}` at
//! temperature `T`, with periodic boundary in `k` and
//! `J_perp = -(T/2) ln tanh(Gamma / (P T))`. The field `Gamma` is lowered
//! linearly over the sweeps.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SolverId, SolverOutcome};
use crate::error::{Error, Result};
use crate::qubo::{IsingInstance, QuboInstance};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SqaConfig {
    pub trotter_slices: usize,
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub temperature: f64,
    pub sweeps: usize,
    pub trajectories: usize,
    pub seed: u64,
}

impl Default for SqaConfig {
    fn default() -> Self {
        Self {
            trotter_slices: 32,
            gamma_start: 3.0,
            gamma_end: 0.01,
            temperature: 0.05,
            sweeps: 1000,
            trajectories: 100,
            seed: 0,
        }
    }
}

impl SqaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trotter_slices < 2 {
            return Err(Error::invalid("at least 2 Trotter slices are required"));
        }
        if !(self.gamma_end >= 0.0 && self.gamma_start >= self.gamma_end && self.gamma_start.is_finite()) {
            return Err(Error::invalid(format!(
                "transverse field must not increase: {} -> {}",
                self.gamma_start, self.gamma_end
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature must be positive"));
        }
        if self.sweeps == 0 || self.trajectories == 0 {
            return Err(Error::invalid("sweep and trajectory counts must be positive"));
        }
        Ok(())
    }

    pub fn gamma_at(&self, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return self.gamma_start;
        }
        let f = sweep as f64 / (self.sweeps - 1) as f64;
        self.gamma_start + (self.gamma_end - self.gamma_start) * f
    }
}

/// Inter-replica coupling `-(T/2) ln tanh(Gamma / (P T))`.
///
/// A vanishing field is clamped to the smallest positive double, which
/// yields a large but finite coupling.
pub fn transverse_coupling(gamma: f64, temperature: f64, slices: usize) -> f64 {
    let x = (gamma / (slices as f64 * temperature)).max(f64::MIN_POSITIVE);
    -0.5 * temperature * x.tanh().ln()
}

struct Replicas<'a> {
    ising: &'a IsingInstance,
    n: usize,
    p: usize,
    spins: Vec<f64>,
    /// `sum_j J_ij s_j` per replica.
    local: Vec<f64>,
}

impl<'a> Replicas<'a> {
    fn random(ising: &'a IsingInstance, p: usize, r: &mut impl Rng) -> Self {
        let n = ising.n();
        let spins: Vec<f64> = (0..n * p).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let j = ising.couplings();
        let mut local = vec![0.0; n * p];
        for k in 0..p {
            let s = &spins[k * n..(k + 1) * n];
            for i in 0..n {
                local[k * n + i] = j[i * n..(i + 1) * n].iter().zip(s).map(|(a, b)| a * b).sum();
            }
        }
        Self { ising, n, p, spins, local }
    }

    fn flip(&mut self, k: usize, i: usize) {
        let n = self.n;
        let s = &mut self.spins[k * n + i];
        *s = -*s;
        let change = 2.0 * *s;
        let row = &self.ising.couplings()[i * n..(i + 1) * n];
        self.local[k * n..(k + 1) * n].iter_mut().zip(row).for_each(|(l, j)| *l += change * j);
    }

    fn sweep(&mut self, j_perp: f64, temperature: f64, r: &mut impl Rng) {
        let (n, p) = (self.n, self.p);
        let h = self.ising.fields();
        for k in 0..p {
            let up = ((k + 1) % p) * n;
            let down = ((k + p - 1) % p) * n;
            for i in 0..n {
                let s = self.spins[k * n + i];
                let classical = -2.0 * s * (h[i] + self.local[k * n + i]);
                let quantum = 2.0 * j_perp * s * (self.spins[up + i] + self.spins[down + i]);
                let delta = classical / p as f64 + quantum;
                if delta <= 0.0 || r.random::<f64>() < (-delta / temperature).exp() {
                    self.flip(k, i);
                }
            }
        }
    }

    fn bits(&self, k: usize) -> Vec<u8> {
        self.spins[k * self.n..(k + 1) * self.n].iter().map(|&s| (s > 0.0) as u8).collect()
    }
}

fn run_trajectory(instance: &QuboInstance, ising: &IsingInstance, config: &SqaConfig, index: u64) -> Vec<u8> {
    let mut r = rng::stream(config.seed, index);
    let mut reps = Replicas::random(ising, config.trotter_slices, &mut r);
    for t in 0..config.sweeps {
        let j_perp = transverse_coupling(config.gamma_at(t), config.temperature, config.trotter_slices);
        reps.sweep(j_perp, config.temperature, &mut r);
    }
    let mut best = reps.bits(0);
    let mut best_e = instance.energy_unchecked(&best);
    for k in 1..config.trotter_slices {
        let bits = reps.bits(k);
        let e = instance.energy_unchecked(&bits);
        if e < best_e {
            best_e = e;
            best = bits;
        }
    }
    best
}

/// Runs independent path-integral annealing trajectories. Each reports the
/// lowest-energy replica of its final state, scored by the true QUBO energy.
pub fn solve_sqa(instance: &QuboInstance, config: &SqaConfig) -> Result<SolverOutcome> {
    let started = Instant::now();
    config.validate()?;
    let (ising, _) = instance.to_ising();
    let results: Vec<Vec<u8>> = (0..config.trajectories as u64)
        .into_par_iter()
        .map(|k| run_trajectory(instance, &ising, config, k))
        .collect();
    Ok(SolverOutcome::from_trajectories(SolverId::Sqa, instance, results, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_synthetic;
    use crate::solvers::{solve_brute_force, solve_sa, SaConfig};

    fn quick() -> SqaConfig {
        SqaConfig { sweeps: 300, trajectories: 20, ..SqaConfig::default() }
    }

    #[test]
    fn zero_matrix() {
        let out = solve_sqa(&QuboInstance::zeros(6).unwrap(), &quick()).unwrap();
        assert_eq!(out.best_energy, 0.0);
    }

    #[test]
    fn coupling_is_positive_and_grows_as_field_drops() {
        let strong = transverse_coupling(3.0, 0.05, 32);
        let weak = transverse_coupling(0.01, 0.05, 32);
        assert!(strong > 0.0 && weak > strong);
        assert!(transverse_coupling(0.0, 0.05, 32).is_finite());
    }

    #[test]
    fn bounded_by_brute_force_and_often_optimal() {
        let inst = gen_synthetic(12, 0.0, 2.0, 5).unwrap();
        let exact = solve_brute_force(&inst).unwrap().best_energy;
        let out = solve_sqa(&inst, &quick()).unwrap().rescored(exact);
        assert!(out.trajectory_energies.iter().all(|&e| e >= exact - 1e-9));
        assert!(out.success_prob > 0.5, "success {}", out.success_prob);
    }

    #[test]
    fn vanishing_constant_field_behaves_thermally() {
        let inst = gen_synthetic(10, 0.0, 2.0, 6).unwrap();
        let cfg = SqaConfig { gamma_start: 1e-9, gamma_end: 1e-9, ..quick() };
        let sqa = solve_sqa(&inst, &cfg).unwrap();
        let sa = solve_sa(&inst, &SaConfig { trajectories: 20, ..SaConfig::default() }).unwrap();
        assert!((sqa.best_energy - sa.best_energy).abs() <= 1e-9 * sa.best_energy.abs().max(1.0));
    }

    #[test]
    fn rejects_increasing_field() {
        let inst = QuboInstance::zeros(2).unwrap();
        let cfg = SqaConfig { gamma_start: 0.1, gamma_end: 1.0, ..quick() };
        assert!(matches!(solve_sqa(&inst, &cfg), Err(Error::InvalidArgument(_))));
        assert!(solve_sqa(&inst, &SqaConfig { trotter_slices: 1, ..quick() }).is_err());
    }
}
