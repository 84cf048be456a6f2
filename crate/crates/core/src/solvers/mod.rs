//! Solvers producing comparable [`SolverOutcome`] records.

mod brute;
mod sa;
mod sgd;
mod sqa;

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use brute::{solve_brute_force, BRUTE_FORCE_LIMIT};
pub use sa::{metropolis_accept, sa_level_acceptance, solve_sa, SaConfig};
pub use sgd::{sgd_trajectory, solve_sgd, SgdConfig, SgdTrace};
pub use sqa::{solve_sqa, transverse_coupling, SqaConfig};

use crate::error::{Error, Result};
use crate::qubo::{energies_match, QuboInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverId {
    BruteForce,
    Sa,
    Sgd,
    Sqa,
}

impl SolverId {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverId::BruteForce => "brute_force",
            SolverId::Sa => "sa",
            SolverId::Sgd => "sgd",
            SolverId::Sqa => "sqa",
        }
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SolverId::BruteForce, SolverId::Sa, SolverId::Sgd, SolverId::Sqa]
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown solver {s:?}")))
    }
}

/// Summary of one solver run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub solver: SolverId,
    pub best_energy: f64,
    pub best_bits: Vec<u8>,
    pub mean_energy: f64,
    /// Fraction of trajectories whose energy matches `reference_energy`.
    pub success_prob: f64,
    /// Energy success is measured against; the run's own best until rescored.
    pub reference_energy: f64,
    pub wall_time_s: f64,
    pub trajectories: usize,
    /// Final (best-seen) energy of each trajectory, in trajectory order.
    pub trajectory_energies: Vec<f64>,
}

impl SolverOutcome {
    pub(crate) fn from_trajectories(
        solver: SolverId,
        instance: &QuboInstance,
        results: Vec<Vec<u8>>,
        started: Instant,
    ) -> Self {
        let energies: Vec<f64> = results.iter().map(|b| instance.energy_unchecked(b)).collect();
        let mut best = 0;
        for (k, bits) in results.iter().enumerate() {
            let (e, eb) = (energies[k], energies[best]);
            if e < eb || (e == eb && *bits < results[best]) {
                best = k;
            }
        }
        let mean_energy = energies.iter().sum::<f64>() / energies.len() as f64;
        let best_energy = energies[best];
        let mut out = Self {
            solver,
            best_energy,
            best_bits: results[best].clone(),
            // Averaging can round slightly below the minimum.
            mean_energy: mean_energy.max(best_energy),
            success_prob: 0.0,
            reference_energy: best_energy,
            wall_time_s: started.elapsed().as_secs_f64(),
            trajectories: energies.len(),
            trajectory_energies: energies,
        };
        out.success_prob = success_probability(&out.trajectory_energies, best_energy);
        out
    }

    /// Recomputes `success_prob` against a known reference optimum.
    pub fn rescored(mut self, reference: f64) -> Self {
        self.reference_energy = reference;
        self.success_prob = success_probability(&self.trajectory_energies, reference);
        self
    }
}

/// Fraction of `energies` matching `reference` within the energy tolerance.
pub fn success_probability(energies: &[f64], reference: f64) -> f64 {
    if energies.is_empty() {
        return 0.0;
    }
    energies.iter().filter(|&&e| energies_match(e, reference)).count() as f64 / energies.len() as f64
}

/// `(found - best) / |best|`. A zero reference has no relative scale, so
/// callers fall back to the absolute gap `found - best`.
pub fn residual_energy(found: f64, best: f64) -> Result<f64> {
    if best == 0.0 {
        return Err(Error::DegenerateReference(format!(
            "reference energy is zero (found {found}); use the absolute gap"
        )));
    }
    Ok((found - best) / best.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_examples() {
        assert_eq!(residual_energy(-100.0, -100.0).unwrap(), 0.0);
        assert!((residual_energy(-90.0, -100.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(residual_energy(1.0, 0.0), Err(Error::DegenerateReference(_))));
    }

    #[test]
    fn success_fraction() {
        assert_eq!(success_probability(&[-1.0, -1.0, 0.0, -0.5], -1.0), 0.5);
        assert_eq!(success_probability(&[], -1.0), 0.0);
    }

    #[test]
    fn solver_names_parse() {
        for id in [SolverId::BruteForce, SolverId::Sa, SolverId::Sgd, SolverId::Sqa] {
            assert_eq!(id.as_str().parse::<SolverId>().unwrap(), id);
        }
        assert!("qa".parse::<SolverId>().is_err());
    }
}
