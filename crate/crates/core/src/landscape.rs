//! Gradient-variance ruggedness metric and exhaustive landscape scans.
//!
//! The gradient of variable `i` at a configuration is the energy change of
//! flipping bit `i`. Its variance over uniformly sampled configurations,
//! averaged over variables, is the ruggedness metric:
//! `sigma^2 = (1/n) sum_i Var(grad_i H)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{energies_match, QuboInstance};
use crate::rng;

/// Default number of sampled configurations.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Largest instance [`landscape_scan`] will enumerate.
pub const SCAN_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `sigma^2` is the sum of per-variable variances.
    Raw,
    /// `sigma^2` is the mean of per-variable variances.
    #[default]
    PerVariable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub sigma_grad: f64,
    #[serde(rename = "per_var")]
    pub sigma2_per_var: Vec<f64>,
    #[serde(rename = "samples")]
    pub num_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub normalization: Normalization,
}

impl LandscapeReport {
    /// Aggregate variance `sigma_grad^2`.
    pub fn sigma2(&self) -> f64 {
        self.sigma_grad * self.sigma_grad
    }
}

/// Single-flip gradient of variable `i`.
pub fn gradient_at(instance: &QuboInstance, bits: &[u8], i: usize) -> Result<f64> {
    instance.flip_delta(bits, i)
}

/// Analytic partial derivative `a_i + sum_{j != i} b_ij x_j`; differs from
/// [`gradient_at`] by the factor `(1 - 2 x_i)`.
pub fn analytic_gradient(instance: &QuboInstance, bits: &[u8], i: usize) -> Result<f64> {
    let d = instance.flip_delta(bits, i)?;
    Ok(if bits[i] == 0 { d } else { -d })
}

/// Uniform configuration number `index` of the sample stream keyed by `seed`.
///
/// Bits are drawn in variable order, so a longer vector extends a shorter one.
pub fn sample_configuration(seed: u64, index: u64, n: usize) -> Vec<u8> {
    let mut r = rng::stream(seed, index);
    (0..n).map(|_| r.random::<bool>() as u8).collect()
}

/// All single-flip gradients at `bits`.
pub fn all_gradients(instance: &QuboInstance, bits: &[u8]) -> Vec<f64> {
    let field = instance.fields(bits);
    (0..instance.n()).map(|i| instance.delta_from_field(bits, &field, i)).collect()
}

/// Sampled gradient variance with per-variable normalization.
pub fn gradient_variance(instance: &QuboInstance, num_samples: usize, seed: u64) -> Result<LandscapeReport> {
    gradient_variance_with(instance, num_samples, seed, Normalization::PerVariable)
}

pub fn gradient_variance_with(
    instance: &QuboInstance,
    num_samples: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<LandscapeReport> {
    if num_samples < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {num_samples}")));
    }
    let n = instance.n();
    let grads: Vec<Vec<f64>> = (0..num_samples as u64)
        .into_par_iter()
        .map(|k| all_gradients(instance, &sample_configuration(seed, k, n)))
        .collect();
    let mut report = variance_report(n, &grads, normalization);
    report.seed = seed;
    Ok(report)
}

/// Gradient variance over an explicit list of configurations.
pub fn gradient_variance_on(
    instance: &QuboInstance,
    samples: &[Vec<u8>],
    normalization: Normalization,
) -> Result<LandscapeReport> {
    if samples.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {}", samples.len())));
    }
    for s in samples {
        instance.evaluate(s)?;
    }
    let grads: Vec<Vec<f64>> = samples.par_iter().map(|s| all_gradients(instance, s)).collect();
    Ok(variance_report(instance.n(), &grads, normalization))
}

fn variance_report(n: usize, grads: &[Vec<f64>], normalization: Normalization) -> LandscapeReport {
    let count = grads.len() as f64;
    let mut mean = vec![0.0; n];
    for g in grads {
        mean.iter_mut().zip(g).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0.0; n];
    for g in grads {
        for ((s, v), m) in var.iter_mut().zip(g).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    var.iter_mut().for_each(|s| *s /= count - 1.0);
    let total: f64 = var.iter().sum();
    let sigma2 = match normalization {
        Normalization::Raw => total,
        Normalization::PerVariable => total / n as f64,
    };
    LandscapeReport {
        sigma_grad: sigma2.sqrt(),
        sigma2_per_var: var,
        num_samples: grads.len(),
        seed: 0,
        normalization,
    }
}

/// Exact per-variable gradient variance over all `2^n` configurations
/// (population variance).
pub fn exact_gradient_variance(instance: &QuboInstance) -> Result<Vec<f64>> {
    let n = instance.n();
    if n > SCAN_LIMIT {
        return Err(Error::CapacityExceeded(format!("{n} variables exceeds scan limit {SCAN_LIMIT}")));
    }
    let total = 1u64 << n;
    let grads: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|k| all_gradients(instance, &crate::qubo::bits_from_index(k, n)))
        .collect();
    let mut report = variance_report(n, &grads, Normalization::PerVariable);
    // Rescale the unbiased estimate to the population variance.
    let c = (total as f64 - 1.0) / total as f64;
    report.sigma2_per_var.iter_mut().for_each(|v| *v *= c);
    Ok(report.sigma2_per_var)
}

/// Result of enumerating every configuration of a small instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    /// Energy of configuration `k` (bit `i` of `k` is `x_i`).
    pub energies: Vec<f64>,
    pub global_min: f64,
    /// Configurations whose energy matches the minimum within relative tolerance.
    pub minimizers: Vec<u64>,
    /// Configurations with no strictly lower single-flip neighbour.
    pub local_minima: usize,
}

/// Enumerates all `2^n` configurations.
pub fn landscape_scan(instance: &QuboInstance) -> Result<ScanRecord> {
    let n = instance.n();
    if n > SCAN_LIMIT {
        return Err(Error::CapacityExceeded(format!("{n} variables exceeds scan limit {SCAN_LIMIT}")));
    }
    let total = 1u64 << n;
    let energies: Vec<f64> = (0..total)
        .into_par_iter()
        .map_init(
            || vec![0u8; n],
            |bits, k| {
                for (i, b) in bits.iter_mut().enumerate() {
                    *b = ((k >> i) & 1) as u8;
                }
                instance.energy_unchecked(bits)
            },
        )
        .collect();
    let global_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let minimizers = (0..total).filter(|&k| energies_match(energies[k as usize], global_min)).collect();
    let local_minima = (0..total as usize)
        .into_par_iter()
        .filter(|&k| (0..n).all(|i| energies[k] <= energies[k ^ (1 << i)]))
        .count();
    Ok(ScanRecord { energies, global_min, minimizers, local_minima })
}
