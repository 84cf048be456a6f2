use std::time::Instant;

use rayon::prelude::*;

use super::{SolverId, SolverOutcome};
use crate::error::{Error, Result};
use crate::qubo::QuboInstance;

/// Largest instance the exhaustive solver accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

const RESYNC_EVERY: u64 = 4096;
const MAX_CANDIDATES: usize = 256;

/// Exact global minimum by Gray-code enumeration.
///
/// The search space is split on the high bits; each chunk walks its low bits
/// with incremental flip deltas, periodically re-evaluating to bound drift.
/// Near-best candidates are re-evaluated exactly before the final choice.
pub fn solve_brute_force(instance: &QuboInstance) -> Result<SolverOutcome> {
    let started = Instant::now();
    let n = instance.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::CapacityExceeded(format!(
            "{n} variables exceeds brute-force limit {BRUTE_FORCE_LIMIT}"
        )));
    }
    let high = n.min(8);
    let low = n - high;
    let candidates: Vec<Vec<Vec<u8>>> = (0..1u64 << high)
        .into_par_iter()
        .map(|chunk| scan_chunk(instance, chunk, low))
        .collect();
    let mut best: Option<(f64, Vec<u8>)> = None;
    for bits in candidates.into_iter().flatten() {
        let e = instance.energy_unchecked(&bits);
        let better = match &best {
            None => true,
            Some((be, bb)) => e < *be || (e == *be && bits < *bb),
        };
        if better {
            best = Some((e, bits));
        }
    }
    let (_, bits) = best.expect("at least one configuration");
    Ok(SolverOutcome::from_trajectories(SolverId::BruteForce, instance, vec![bits], started))
}

fn scan_chunk(instance: &QuboInstance, chunk: u64, low: usize) -> Vec<Vec<u8>> {
    let n = instance.n();
    let mut bits = vec![0u8; n];
    for (i, b) in bits.iter_mut().enumerate().skip(low) {
        *b = ((chunk >> (i - low)) & 1) as u8;
    }
    let mut field = instance.fields(&bits);
    let mut e = instance.energy_unchecked(&bits);
    let mut best = e;
    let mut cands = vec![bits.clone()];
    for g in 1..(1u64 << low) {
        let i = g.trailing_zeros() as usize;
        e += instance.delta_from_field(&bits, &field, i);
        bits[i] ^= 1;
        instance.update_field(&bits, &mut field, i);
        if g % RESYNC_EVERY == 0 {
            e = instance.energy_unchecked(&bits);
        }
        let window = 1e-10 * best.abs().max(1.0);
        if e < best - window {
            best = e;
            cands.clear();
            cands.push(bits.clone());
        } else if e <= best + window {
            best = best.min(e);
            if cands.len() < MAX_CANDIDATES {
                cands.push(bits.clone());
            }
        }
    }
    cands
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_maxcut, gen_number_partition, gen_synthetic, Graph};
    use crate::landscape::landscape_scan;

    #[test]
    fn single_edge_maxcut() {
        let inst = gen_maxcut(&Graph::new(2, vec![(0, 1, 1.0)]).unwrap()).unwrap();
        let out = solve_brute_force(&inst).unwrap();
        assert_eq!(out.best_energy, -1.0);
        assert_eq!(out.success_prob, 1.0);
    }

    #[test]
    fn number_partition_pair() {
        let out = solve_brute_force(&gen_number_partition(&[3, 5]).unwrap()).unwrap();
        assert_eq!(out.best_energy, -15.0);
    }

    #[test]
    fn agrees_with_scan() {
        for seed in 0..10 {
            let inst = gen_synthetic(12, 0.0, 2.0, seed).unwrap();
            let out = solve_brute_force(&inst).unwrap();
            let scan = landscape_scan(&inst).unwrap();
            assert_eq!(out.best_energy, scan.global_min);
            assert_eq!(inst.evaluate(&out.best_bits).unwrap(), out.best_energy);
        }
    }

    #[test]
    fn zero_matrix_ties_pick_all_zero() {
        let out = solve_brute_force(&QuboInstance::zeros(10).unwrap()).unwrap();
        assert_eq!(out.best_energy, 0.0);
        assert_eq!(out.best_bits, vec![0; 10]);
    }

    #[test]
    fn capacity() {
        let inst = QuboInstance::zeros(25).unwrap();
        assert!(matches!(solve_brute_force(&inst), Err(Error::CapacityExceeded(_))));
    }
}
