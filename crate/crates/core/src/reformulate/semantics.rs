//! Checks that a reformulated instance ranks original assignments the same way.
//!
//! An assignment `x` of the original instance corresponds to `map.extend(x)`
//! in the candidate. A candidate preserves semantics when
//! - every auxiliary variable is forced: it couples to no other auxiliary and
//!   its consistent value is strictly better than the alternative,
//! - `E(a) < E(b)` implies `E'(a) < E'(b)` for corresponding assignments,
//! - both instances have the same minimizers.
//!
//! Energies themselves may differ, as penalty rescaling changes them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::map::VariableMap;
use crate::qubo::{bits_from_index, energies_match, QuboInstance, ENERGY_RTOL};
use crate::rng;
use crate::solvers::{solve_sa, SaConfig};

/// Largest original size checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 16;
/// Default number of random pairs in sampled mode.
pub const SAMPLED_PAIRS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] original variables, sampled above.
    #[default]
    Auto,
    Exhaustive,
    Sampled,
}

impl CheckMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckMode::Auto => "auto",
            CheckMode::Exhaustive => "exhaustive",
            CheckMode::Sampled => "sampled",
        }
    }
}

impl std::str::FromStr for CheckMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        [CheckMode::Auto, CheckMode::Exhaustive, CheckMode::Sampled]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| crate::error::Error::invalid(format!("unknown check mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticCheck {
    pub mode: CheckMode,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for SemanticCheck {
    fn default() -> Self {
        Self { mode: CheckMode::Auto, pairs: SAMPLED_PAIRS, seed: 0 }
    }
}

impl SemanticCheck {
    /// Exhaustive or sampled, as actually run for `original_len` variables.
    /// Exhaustive requests above [`EXHAUSTIVE_LIMIT`] fall back to sampling.
    pub fn resolve(&self, original_len: usize) -> CheckMode {
        if original_len <= EXHAUSTIVE_LIMIT && self.mode != CheckMode::Sampled {
            CheckMode::Exhaustive
        } else {
            CheckMode::Sampled
        }
    }
}

/// Concrete witness of a failed check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SizeMismatch {
        expected: usize,
        found: usize,
    },
    AuxCoupled {
        first: usize,
        second: usize,
    },
    /// The consistent value of auxiliary `aux` is not strictly better at `assignment`.
    AuxNotForced {
        assignment: Vec<u8>,
        aux: usize,
        delta: f64,
    },
    /// `lower` beats `higher` in the original but not in the candidate.
    OrderReversed {
        lower: Vec<u8>,
        higher: Vec<u8>,
        original: [f64; 2],
        candidate: [f64; 2],
    },
    MinimizerMismatch {
        assignment: Vec<u8>,
        original_minimizer: bool,
        candidate_minimizer: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticEvidence {
    pub mode: CheckMode,
    pub passed: bool,
    pub assignments_checked: u64,
    pub pairs_checked: u64,
    pub violation: Option<Violation>,
}

impl SemanticEvidence {
    fn new(mode: CheckMode) -> Self {
        Self { mode, passed: true, assignments_checked: 0, pairs_checked: 0, violation: None }
    }

    fn fail(mut self, v: Violation) -> Self {
        self.passed = false;
        self.violation = Some(v);
        self
    }
}

pub fn preserves_semantics(
    candidate: &QuboInstance,
    original: &QuboInstance,
    map: &VariableMap,
    check: &SemanticCheck,
) -> SemanticEvidence {
    let mode = check.resolve(map.original_len());
    let ev = SemanticEvidence::new(mode);
    if original.n() != map.original_len() {
        return ev.fail(Violation::SizeMismatch { expected: map.original_len(), found: original.n() });
    }
    if candidate.n() != map.current_len() || map.validate().is_err() {
        return ev.fail(Violation::SizeMismatch { expected: map.current_len(), found: candidate.n() });
    }
    if let Some(v) = aux_coupling(candidate, map) {
        return ev.fail(v);
    }
    match mode {
        CheckMode::Sampled => sampled(candidate, original, map, check, ev),
        _ => exhaustive(candidate, original, map, ev),
    }
}

fn aux_coupling(candidate: &QuboInstance, map: &VariableMap) -> Option<Violation> {
    let k = map.aux().len();
    for a in 0..k {
        for b in (a + 1)..k {
            let (ia, ib) = (map.aux_index(a), map.aux_index(b));
            if candidate.get(ia, ib) != 0.0 {
                return Some(Violation::AuxCoupled { first: ia, second: ib });
            }
        }
    }
    None
}

/// First auxiliary whose consistent value is not strictly better at `y`.
fn aux_forced(candidate: &QuboInstance, map: &VariableMap, x: &[u8], y: &[u8]) -> Option<Violation> {
    for k in 0..map.aux().len() {
        let idx = map.aux_index(k);
        let delta = candidate.flip_delta_unchecked(y, idx);
        let scale = candidate.max_abs().max(1.0);
        if !(delta > ENERGY_RTOL * scale) {
            return Some(Violation::AuxNotForced { assignment: x.to_vec(), aux: idx, delta });
        }
    }
    None
}

fn energy_scale(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(1.0f64, |m, v| m.max(v.abs()))
}

fn exhaustive(
    candidate: &QuboInstance,
    original: &QuboInstance,
    map: &VariableMap,
    mut ev: SemanticEvidence,
) -> SemanticEvidence {
    let n0 = map.original_len();
    let total = 1u64 << n0;
    let mut rows: Vec<(f64, f64, u64)> = Vec::with_capacity(total as usize);
    for idx in 0..total {
        let x = bits_from_index(idx, n0);
        let y = map.extend(&x);
        if let Some(v) = aux_forced(candidate, map, &x, &y) {
            return ev.fail(v);
        }
        rows.push((original.energy_unchecked(&x), candidate.energy_unchecked(&y), idx));
    }
    ev.assignments_checked = total;
    ev.pairs_checked = total * (total - 1) / 2;
    let scale = energy_scale(rows.iter().map(|r| r.0));
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));

    // Walk groups of tied original energies; each group must sit strictly
    // above the highest candidate energy of all better groups.
    let mut prev_max: Option<(f64, f64, u64)> = None;
    let mut start = 0;
    while start < rows.len() {
        let mut end = start + 1;
        while end < rows.len() && rows[end].0 - rows[end - 1].0 <= ENERGY_RTOL * scale {
            end += 1;
        }
        let group = &rows[start..end];
        let lo = *group.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        if let Some(hi) = prev_max {
            if lo.1 <= hi.1 {
                return ev.fail(Violation::OrderReversed {
                    lower: bits_from_index(hi.2, n0),
                    higher: bits_from_index(lo.2, n0),
                    original: [hi.0, lo.0],
                    candidate: [hi.1, lo.1],
                });
            }
        }
        let gmax = *group.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        if prev_max.is_none_or(|p| gmax.1 > p.1) {
            prev_max = Some(gmax);
        }
        start = end;
    }

    let min_e = rows[0].0;
    let min_c = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    for &(e, c, idx) in &rows {
        let in_orig = e - min_e <= ENERGY_RTOL * scale;
        let in_cand = energies_match(c, min_c);
        if in_orig != in_cand {
            return ev.fail(Violation::MinimizerMismatch {
                assignment: bits_from_index(idx, n0),
                original_minimizer: in_orig,
                candidate_minimizer: in_cand,
            });
        }
    }
    ev
}

/// Order check for one pair; `None` when consistent.
fn pair_violation(a: (&[u8], f64, f64), b: (&[u8], f64, f64), scale: f64) -> Option<Violation> {
    let (lo, hi) = if a.1 <= b.1 { (a, b) } else { (b, a) };
    if hi.1 - lo.1 <= ENERGY_RTOL * scale || lo.2 < hi.2 {
        return None;
    }
    Some(Violation::OrderReversed {
        lower: lo.0.to_vec(),
        higher: hi.0.to_vec(),
        original: [lo.1, hi.1],
        candidate: [lo.2, hi.2],
    })
}

fn verification_sa(instance: &QuboInstance, seed: u64) -> SaConfig {
    let n = instance.n();
    let row_max = (0..n)
        .map(|i| instance.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    SaConfig {
        t0: row_max.max(1e-9),
        cooling: 0.95,
        iters_per_temp: (10 * n).max(100),
        num_levels: 200,
        trajectories: 8,
        seed,
    }
}

fn sampled(
    candidate: &QuboInstance,
    original: &QuboInstance,
    map: &VariableMap,
    check: &SemanticCheck,
    mut ev: SemanticEvidence,
) -> SemanticEvidence {
    let n0 = map.original_len();
    let score = |x: &[u8]| {
        let y = map.extend(x);
        (original.energy_unchecked(x), candidate.energy_unchecked(&y), y)
    };
    let mut r = rng::stream(check.seed, u64::MAX);
    let mut draws = Vec::with_capacity(2 * check.pairs);
    for _ in 0..check.pairs {
        let a: Vec<u8> = (0..n0).map(|_| r.random::<bool>() as u8).collect();
        let b: Vec<u8> = (0..n0).map(|_| r.random::<bool>() as u8).collect();
        draws.push((a, b));
    }
    let mut scored = Vec::with_capacity(draws.len());
    for (a, b) in &draws {
        let (sa, sb) = (score(a), score(b));
        for (x, s) in [(a, &sa), (b, &sb)] {
            if let Some(v) = aux_forced(candidate, map, x, &s.2) {
                return ev.fail(v);
            }
        }
        scored.push((sa.0, sa.1, sb.0, sb.1));
    }
    ev.assignments_checked = 2 * draws.len() as u64;
    ev.pairs_checked = draws.len() as u64;
    let scale = energy_scale(scored.iter().flat_map(|s| [s.0, s.2]));
    for ((a, b), s) in draws.iter().zip(&scored) {
        if let Some(v) = pair_violation((a, s.0, s.1), (b, s.2, s.3), scale) {
            return ev.fail(v);
        }
    }

    // Best-known states from both instances must rank consistently.
    let (Ok(orig_run), Ok(cand_run)) = (
        solve_sa(original, &verification_sa(original, check.seed)),
        solve_sa(candidate, &verification_sa(candidate, check.seed)),
    ) else {
        return ev;
    };
    let y_star = cand_run.best_bits;
    let x_from_cand = map.project(&y_star);
    if !map.is_consistent(&y_star) {
        let y_cons = map.extend(&x_from_cand);
        if candidate.energy_unchecked(&y_cons) >= cand_run.best_energy {
            return ev.fail(Violation::AuxNotForced {
                assignment: x_from_cand,
                aux: map.original_len(),
                delta: cand_run.best_energy - candidate.energy_unchecked(&y_cons),
            });
        }
    }
    let x_orig = orig_run.best_bits;
    let (so, sc) = (score(&x_orig), score(&x_from_cand));
    let scale = scale.max(so.0.abs()).max(sc.0.abs());
    ev.pairs_checked += 1;
    if let Some(v) = pair_violation((&x_orig, so.0, so.1), (&x_from_cand, sc.0, sc.1), scale) {
        return ev.fail(v);
    }
    ev
}
