use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SolverId, SolverOutcome};
use crate::error::{Error, Result};
use crate::qubo::QuboInstance;
use crate::rng;

/// Steepest single-flip descent with random restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdConfig {
    /// Moves per trajectory; a restart counts as a move.
    pub max_steps: usize,
    /// Stop after this many consecutive moves without a new trajectory best.
    pub no_improve_stop: usize,
    pub trajectories: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { max_steps: 500, no_improve_stop: 50, trajectories: 100, seed: 0 }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 || self.no_improve_stop == 0 || self.trajectories == 0 {
            return Err(Error::invalid("SGD step, patience and trajectory counts must be positive"));
        }
        Ok(())
    }
}

/// Energies visited by one trajectory, split at restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdTrace {
    pub segments: Vec<Vec<f64>>,
    pub best_bits: Vec<u8>,
}

fn random_bits(r: &mut impl Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| r.random::<bool>() as u8).collect()
}

fn run_trajectory(instance: &QuboInstance, config: &SgdConfig, index: u64, trace: bool) -> SgdTrace {
    let n = instance.n();
    let mut r = rng::stream(config.seed, index);
    let mut bits = random_bits(&mut r, n);
    let mut field = instance.fields(&bits);
    let mut e = instance.energy_unchecked(&bits);
    let mut best_e = e;
    let mut best = bits.clone();
    let mut segments = vec![vec![e]];
    let mut stale = 0;
    for _ in 0..config.max_steps {
        // Lowest index wins among equally good flips.
        let mut pick = None;
        let mut pick_delta = 0.0;
        for i in 0..n {
            let d = instance.delta_from_field(&bits, &field, i);
            if d < pick_delta {
                pick = Some(i);
                pick_delta = d;
            }
        }
        match pick {
            Some(i) => {
                bits[i] ^= 1;
                instance.update_field(&bits, &mut field, i);
                e += pick_delta;
            }
            None => {
                bits = random_bits(&mut r, n);
                field = instance.fields(&bits);
                e = instance.energy_unchecked(&bits);
                if trace {
                    segments.push(Vec::new());
                }
            }
        }
        if trace {
            segments.last_mut().unwrap().push(e);
        }
        if e < best_e {
            best_e = e;
            best.copy_from_slice(&bits);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.no_improve_stop {
                break;
            }
        }
    }
    SgdTrace { segments, best_bits: best }
}

pub fn solve_sgd(instance: &QuboInstance, config: &SgdConfig) -> Result<SolverOutcome> {
    let started = Instant::now();
    config.validate()?;
    let results: Vec<Vec<u8>> = (0..config.trajectories as u64)
        .into_par_iter()
        .map(|k| run_trajectory(instance, config, k, false).best_bits)
        .collect();
    Ok(SolverOutcome::from_trajectories(SolverId::Sgd, instance, results, started))
}

/// Full energy trace of trajectory `index`.
pub fn sgd_trajectory(instance: &QuboInstance, config: &SgdConfig, index: u64) -> Result<SgdTrace> {
    config.validate()?;
    Ok(run_trajectory(instance, config, index, true))
}
