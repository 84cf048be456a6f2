//! The four candidate-generating rewrites.

use serde::{Deserialize, Serialize};

use super::map::{AuxVar, VariableMap};
use super::semantics::{preserves_semantics, SemanticCheck};
use super::SigmaProbe;
use crate::error::{Error, Result};
use crate::qubo::{ConstraintPart, QuboInstance};

/// A rewritten instance with its map back to the original variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub instance: QuboInstance,
    pub map: VariableMap,
}

impl Candidate {
    pub fn identity(instance: &QuboInstance) -> Self {
        Self { instance: instance.clone(), map: VariableMap::identity(instance.n()) }
    }
}

/// Which original variables the substitution strategy complements.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskPolicy {
    /// Variables whose current linear coefficient is negative.
    #[default]
    NegativeLinear,
    All,
    Explicit(Vec<usize>),
}

impl MaskPolicy {
    pub fn select(&self, instance: &QuboInstance, map: &VariableMap) -> Vec<usize> {
        let n0 = map.original_len();
        match self {
            MaskPolicy::NegativeLinear => (0..n0).filter(|&i| instance.linear(i) < 0.0).collect(),
            MaskPolicy::All => (0..n0).collect(),
            MaskPolicy::Explicit(v) => v.clone(),
        }
    }
}

/// `q'_jk = s_j s_k q_jk` off the diagonal, `q'_jj = q_jj + 2 s_j sum_k q_jk f_k`,
/// `offset' = offset + f^T q f`, with `f` the mask indicator and `s = 1 - 2f`.
fn complement(n: usize, q: &[f64], offset: f64, flip: &[bool]) -> (Vec<f64>, f64) {
    let sign = |i: usize| if flip[i] { -1.0 } else { 1.0 };
    let mut out = vec![0.0; n * n];
    let mut shift = 0.0;
    for j in 0..n {
        let row = &q[j * n..(j + 1) * n];
        let pull: f64 = row.iter().zip(flip).filter(|(_, &f)| f).map(|(v, _)| v).sum();
        if flip[j] {
            shift += pull;
        }
        for k in 0..n {
            out[j * n + k] = if j == k { row[j] + 2.0 * sign(j) * pull } else { sign(j) * sign(k) * row[k] };
        }
    }
    (out, offset + shift)
}

/// Complements the original variables listed in `mask`: `x_i -> 1 - x_i'`.
/// Energies are preserved exactly under the updated map.
pub fn strat_variable_substitution(instance: &QuboInstance, map: &VariableMap, mask: &[usize]) -> Result<Candidate> {
    check_map(instance, map)?;
    let new_map = map.with_flips(mask)?;
    let n = instance.n();
    let mut flip = vec![false; n];
    for &i in mask {
        flip[i] = !flip[i];
    }
    let (q, offset) = complement(n, instance.matrix(), instance.offset(), &flip);
    let constraint = instance.constraint().map(|c| {
        let (cq, coff) = complement(n, c.matrix(), c.offset(), &flip);
        QuboInstance::constraint_from_raw(cq, coff, c.cardinality())
    });
    let label = format!("{}|subst({})", instance.label(), mask.len());
    Ok(Candidate {
        instance: QuboInstance::from_raw(n, q, offset, constraint, label, instance.seed()),
        map: new_map,
    })
}

/// `Q' = Q_obj + gamma Q_constraint`.
pub fn strat_penalty_scaling(instance: &QuboInstance, map: &VariableMap, gamma: f64) -> Result<Candidate> {
    check_map(instance, map)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("penalty scale must be positive, got {gamma}")));
    }
    let part = instance
        .constraint()
        .ok_or_else(|| Error::StrategyInapplicable("instance has no tagged constraint terms".into()))?;
    Ok(Candidate { instance: scale_constraint(instance, part, gamma, "penalty"), map: map.clone() })
}

fn scale_constraint(instance: &QuboInstance, part: &ConstraintPart, gamma: f64, tag: &str) -> QuboInstance {
    let extra = gamma - 1.0;
    let q = instance.matrix().iter().zip(part.matrix()).map(|(a, c)| a + extra * c).collect();
    let offset = instance.offset() + extra * part.offset();
    let scaled = QuboInstance::constraint_from_raw(
        part.matrix().iter().map(|c| gamma * c).collect(),
        gamma * part.offset(),
        part.cardinality(),
    );
    let label = format!("{}|{tag}({gamma})", instance.label());
    QuboInstance::from_raw(instance.n(), q, offset, Some(scaled), label, instance.seed())
}

/// Penalty weight for auxiliary product variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxPenalty {
    /// Fixed weight; must exceed `|b_uv|` for every encoded pair.
    Absolute(f64),
    /// `(1 + margin) |b_uv|` per pair.
    Relative(f64),
}

/// Eligible pair with the strongest coupling: both ends original variables,
/// not yet encoded, nonzero coupling, and no constraint share in the coupling.
/// Ties go to the lexicographically smallest pair.
pub fn select_aux_pair(instance: &QuboInstance, map: &VariableMap) -> Option<(usize, usize)> {
    let n0 = map.original_len();
    let mut best: Option<((usize, usize), f64)> = None;
    for u in 0..n0 {
        for v in (u + 1)..n0 {
            let c = instance.pair(u, v).abs();
            if c == 0.0 || map.encodes_pair(u, v) || constraint_coupling(instance, u, v) != 0.0 {
                continue;
            }
            if best.is_none_or(|(_, b)| c > b) {
                best = Some(((u, v), c));
            }
        }
    }
    best.map(|(p, _)| p)
}

fn constraint_coupling(instance: &QuboInstance, u: usize, v: usize) -> f64 {
    instance.constraint().map_or(0.0, |c| c.matrix()[u * instance.n() + v])
}

/// Re-encodes `b_uv y_u y_v` as `b_uv z + lambda (3z + y_u y_v - 2 z y_u - 2 z y_v)`
/// for each listed pair, appending one variable `z` per pair.
///
/// With `lambda > |b_uv|` the consistent `z = y_u y_v` is the unique best
/// choice for every assignment of the other variables, and consistent
/// assignments keep their original energy.
pub fn strat_auxiliary_variables(
    instance: &QuboInstance,
    map: &VariableMap,
    pairs: &[(usize, usize)],
    penalty: AuxPenalty,
) -> Result<Candidate> {
    check_map(instance, map)?;
    let mut current = instance.clone();
    let mut current_map = map.clone();
    for &(u, v) in pairs {
        let n0 = current_map.original_len();
        if u == v || u >= n0 || v >= n0 {
            return Err(Error::invalid(format!("pair ({u}, {v}) must join two distinct original variables")));
        }
        if current_map.encodes_pair(u, v) {
            return Err(Error::invalid(format!("pair ({u}, {v}) already has an auxiliary")));
        }
        if constraint_coupling(&current, u, v) != 0.0 {
            return Err(Error::invalid(format!("pair ({u}, {v}) carries constraint terms")));
        }
        let coupling = current.pair(u, v);
        let lambda = match penalty {
            AuxPenalty::Absolute(l) => l,
            AuxPenalty::Relative(m) if m > 0.0 => (1.0 + m) * coupling.abs(),
            AuxPenalty::Relative(m) => return Err(Error::invalid(format!("penalty margin must be positive, got {m}"))),
        };
        if !(lambda > coupling.abs()) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "auxiliary penalty {lambda} does not exceed coupling |{coupling}| of pair ({u}, {v})"
            )));
        }
        let aux = AuxVar { left: current_map.literal(u), right: current_map.literal(v) };
        current = append_product(&current, u, v, coupling, lambda);
        current_map = current_map.with_aux(aux);
    }
    Ok(Candidate { instance: current, map: current_map })
}

fn append_product(instance: &QuboInstance, u: usize, v: usize, coupling: f64, lambda: f64) -> QuboInstance {
    let n = instance.n();
    let m = n + 1;
    let grow = |src: &[f64]| {
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            out[i * m..i * m + n].copy_from_slice(&src[i * n..(i + 1) * n]);
        }
        out
    };
    let mut q = grow(instance.matrix());
    let z = n;
    q[u * m + v] = lambda / 2.0;
    q[v * m + u] = lambda / 2.0;
    q[z * m + z] = coupling + 3.0 * lambda;
    for w in [u, v] {
        q[z * m + w] = -lambda;
        q[w * m + z] = -lambda;
    }
    let constraint = instance
        .constraint()
        .map(|c| QuboInstance::constraint_from_raw(grow(c.matrix()), c.offset(), c.cardinality()));
    let label = format!("{}|aux({u},{v})", instance.label());
    QuboInstance::from_raw(m, q, instance.offset(), constraint, label, instance.seed())
}

/// Retunes the weight of a declared cardinality penalty `gamma (sum x - k)^2`.
///
/// Each multiplier in `grid` rescales the constraint share; the candidate with
/// the largest gradient spread that still passes the semantic check wins
/// (earlier grid entries win ties). Returns the chosen multiplier as well.
pub fn strat_constraint_relaxation(
    instance: &QuboInstance,
    map: &VariableMap,
    original: &QuboInstance,
    grid: &[f64],
    probe: &SigmaProbe,
    check: &SemanticCheck,
) -> Result<(Candidate, f64)> {
    check_map(instance, map)?;
    let part = instance
        .constraint()
        .filter(|c| c.cardinality().is_some())
        .ok_or_else(|| Error::StrategyInapplicable("instance has no declared cardinality constraint".into()))?;
    let mut best = (Candidate { instance: instance.clone(), map: map.clone() }, 1.0);
    let mut best_sigma = probe.sigma(instance)?;
    for &factor in grid {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("relaxation multiplier must be positive, got {factor}")));
        }
        if factor == 1.0 {
            continue;
        }
        let cand = scale_constraint(instance, part, factor, "relax");
        let sigma = probe.sigma(&cand)?;
        if sigma > best_sigma && preserves_semantics(&cand, original, map, check).passed {
            best_sigma = sigma;
            best = (Candidate { instance: cand, map: map.clone() }, factor);
        }
    }
    Ok(best)
}

fn check_map(instance: &QuboInstance, map: &VariableMap) -> Result<()> {
    if instance.n() != map.current_len() {
        return Err(Error::Integrity(format!(
            "instance has {} variables but the map describes {}",
            instance.n(),
            map.current_len()
        )));
    }
    map.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_erdos_renyi, gen_graph_partition, gen_synthetic};
    use crate::qubo::{bits_from_index, energies_match};

    #[test]
    fn empty_mask_is_identity() {
        let inst = gen_synthetic(5, 0.0, 2.0, 1).unwrap();
        let c = strat_variable_substitution(&inst, &VariableMap::identity(5), &[]).unwrap();
        assert_eq!(c.instance.matrix(), inst.matrix());
        assert_eq!(c.instance.offset(), inst.offset());
    }

    #[test]
    fn full_mask_twice_restores_integer_instance() {
        let g = gen_erdos_renyi(8, 0.5, (1.0, 1.0), 2).unwrap();
        let inst = gen_graph_partition(&g, 5.0).unwrap();
        let id = VariableMap::identity(8);
        let all: Vec<usize> = (0..8).collect();
        let once = strat_variable_substitution(&inst, &id, &all).unwrap();
        let twice = strat_variable_substitution(&once.instance, &once.map, &all).unwrap();
        assert_eq!(twice.instance.matrix(), inst.matrix());
        assert_eq!(twice.instance.offset(), inst.offset());
        assert_eq!(twice.instance.constraint(), inst.constraint());
        assert_eq!(twice.map, id);
    }

    #[test]
    fn substitution_preserves_energies_exhaustively() {
        let inst = gen_synthetic(10, 0.0, 2.0, 3).unwrap();
        let mask = [0, 3, 4, 9];
        let c = strat_variable_substitution(&inst, &VariableMap::identity(10), &mask).unwrap();
        for k in 0..1024 {
            let x = bits_from_index(k, 10);
            let y = c.map.extend(&x);
            assert!(energies_match(inst.evaluate(&x).unwrap(), c.instance.evaluate(&y).unwrap()));
        }
    }

    #[test]
    fn penalty_scaling_identity_and_applicability() {
        let g = gen_erdos_renyi(6, 0.5, (1.0, 10.0), 4).unwrap();
        let inst = gen_graph_partition(&g, 5.0).unwrap();
        let id = VariableMap::identity(6);
        let same = strat_penalty_scaling(&inst, &id, 1.0).unwrap();
        assert_eq!(same.instance.matrix(), inst.matrix());
        let plain = gen_synthetic(6, 0.0, 2.0, 4).unwrap();
        assert!(matches!(strat_penalty_scaling(&plain, &id, 1.5), Err(Error::StrategyInapplicable(_))));
    }

    #[test]
    fn penalty_scaling_scales_only_the_constraint() {
        let g = gen_erdos_renyi(6, 0.5, (1.0, 10.0), 5).unwrap();
        let inst = gen_graph_partition(&g, 2.0).unwrap();
        let c = strat_penalty_scaling(&inst, &VariableMap::identity(6), 1.5).unwrap();
        for k in 0..64 {
            let x = bits_from_index(k, 6);
            let ones = k.count_ones() as f64;
            let want = g.cut_weight(&x) + 3.0 * ((ones - 3.0).powi(2) - 9.0);
            assert!(energies_match(c.instance.evaluate(&x).unwrap(), want));
        }
    }

    #[test]
    fn aux_consistent_slice_keeps_energies() {
        let inst = gen_synthetic(3, 0.0, 2.0, 6).unwrap();
        let id = VariableMap::identity(3);
        let lambda = 10.0 * inst.max_abs();
        let c = strat_auxiliary_variables(&inst, &id, &[(0, 2)], AuxPenalty::Absolute(lambda)).unwrap();
        assert_eq!(c.instance.n(), 4);
        for k in 0..8 {
            let x = bits_from_index(k, 3);
            assert!(energies_match(inst.evaluate(&x).unwrap(), c.instance.evaluate(&c.map.extend(&x)).unwrap()));
        }
        let none = strat_auxiliary_variables(&inst, &id, &[], AuxPenalty::Absolute(lambda)).unwrap();
        assert_eq!(none.instance, inst);
    }

    #[test]
    fn aux_rejects_weak_penalty() {
        let inst = QuboInstance::from_upper(2, &[(0, 1, 4.0)]).unwrap();
        let id = VariableMap::identity(2);
        assert!(matches!(
            strat_auxiliary_variables(&inst, &id, &[(0, 1)], AuxPenalty::Absolute(3.0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(strat_auxiliary_variables(&inst, &id, &[(0, 1)], AuxPenalty::Absolute(4.5)).is_ok());
    }

    #[test]
    fn aux_pair_selection() {
        let inst = QuboInstance::from_upper(3, &[(0, 1, 1.0), (1, 2, -5.0), (0, 2, 5.0)]).unwrap();
        assert_eq!(select_aux_pair(&inst, &VariableMap::identity(3)), Some((0, 2)));
        let g = gen_erdos_renyi(5, 0.9, (1.0, 2.0), 1).unwrap();
        let gp = gen_graph_partition(&g, 5.0).unwrap();
        assert_eq!(select_aux_pair(&gp, &VariableMap::identity(5)), None);
    }
}
