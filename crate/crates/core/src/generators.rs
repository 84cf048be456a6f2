//! Instance generators: Gaussian synthetic matrices and QUBO reductions of
//! Max Cut, balanced Graph Partitioning, Number Partitioning and Set Cover.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{Part, QuboBuilder, QuboInstance};
use crate::rng;

/// Default Gaussian parameters for synthetic instances.
pub const SYNTHETIC_MU: f64 = 0.0;
pub const SYNTHETIC_SIGMA2: f64 = 2.0;
/// Default balance penalty for graph partitioning.
pub const GRAPH_PARTITION_GAMMA: f64 = 5.0;

/// Weighted undirected graph without self-loops; edges stored with `u < v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::invalid(format!("self-loop on vertex {u}")));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if b >= num_vertices {
                return Err(Error::invalid(format!("edge ({u}, {v}) outside {num_vertices} vertices")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("edge ({u}, {v}) has weight {w}")));
            }
            if !seen.insert((a, b)) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
            norm.push((a, b, w));
        }
        Ok(Self { num_vertices, edges: norm })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Weight of edges whose endpoints differ under `side`.
    pub fn cut_weight(&self, side: &[u8]) -> f64 {
        self.edges.iter().filter(|&&(u, v, _)| side[u] != side[v]).map(|e| e.2).sum()
    }
}

/// Set system for Set Cover; every element is covered by some set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetCoverInput {
    num_elements: usize,
    sets: Vec<Vec<usize>>,
}

impl SetCoverInput {
    pub fn new(num_elements: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if num_elements == 0 || sets.is_empty() {
            return Err(Error::invalid("set cover needs at least one element and one set"));
        }
        let mut covered = vec![false; num_elements];
        let mut clean = Vec::with_capacity(sets.len());
        for s in sets {
            let mut s = s;
            s.sort_unstable();
            s.dedup();
            for &e in &s {
                if e >= num_elements {
                    return Err(Error::invalid(format!("element {e} outside {num_elements}")));
                }
                covered[e] = true;
            }
            clean.push(s);
        }
        if let Some(e) = covered.iter().position(|c| !c) {
            return Err(Error::invalid(format!("element {e} is not covered by any set")));
        }
        Ok(Self { num_elements, sets: clean })
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Sets containing each element.
    pub fn covering(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_elements];
        for (j, s) in self.sets.iter().enumerate() {
            for &e in s {
                out[e].push(j);
            }
        }
        out
    }

    /// Elements not covered by the selected sets.
    pub fn uncovered(&self, selected: &[u8]) -> usize {
        let mut covered = vec![false; self.num_elements];
        for (j, s) in self.sets.iter().enumerate() {
            if selected[j] == 1 {
                s.iter().for_each(|&e| covered[e] = true);
            }
        }
        covered.iter().filter(|c| !**c).count()
    }

    /// Number of binary slack variables the penalty QUBO appends.
    pub fn slack_bits(&self) -> usize {
        self.covering().iter().map(|c| slack_width(c.len())).sum()
    }
}

/// Bits needed to represent a slack in `0..=count-1`.
fn slack_width(count: usize) -> usize {
    let max = count.saturating_sub(1);
    (usize::BITS - max.leading_zeros()) as usize
}

/// Gaussian synthetic QUBO: diagonal and upper-triangle coefficients drawn
/// i.i.d. from `N(mu, sigma2)`.
pub fn gen_synthetic(n: usize, mu: f64, sigma2: f64, seed: u64) -> Result<QuboInstance> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let normal = Normal::new(mu, sigma2.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let mut r = rng::stream(seed, 0);
    let mut b = QuboBuilder::new(n);
    for i in 0..n {
        for j in i..n {
            b.add(Part::Objective, i, j, normal.sample(&mut r));
        }
    }
    b.label(format!("synthetic(n={n},mu={mu},sigma2={sigma2})")).seed(Some(seed)).build()
}

/// Max Cut: `H = sum_{(i,j)} w_ij (-x_i - x_j + 2 x_i x_j)`, so `H == -cut weight`.
pub fn gen_maxcut(graph: &Graph) -> Result<QuboInstance> {
    let mut b = QuboBuilder::new(graph.num_vertices);
    add_cut_terms(&mut b, graph, -1.0);
    b.label(format!("maxcut(n={},m={})", graph.num_vertices, graph.edges.len())).build()
}

fn add_cut_terms(b: &mut QuboBuilder, graph: &Graph, sign: f64) {
    for &(u, v, w) in &graph.edges {
        b.add(Part::Objective, u, u, sign * w);
        b.add(Part::Objective, v, v, sign * w);
        b.add(Part::Objective, u, v, -2.0 * sign * w);
    }
}

/// Balanced bisection: cut weight plus
/// `gamma (sum_i (1 - |V|) x_i + sum_{i<j} 2 x_i x_j)`, which equals
/// `gamma ((sum x - |V|/2)^2 - |V|^2/4)`.
pub fn gen_graph_partition(graph: &Graph, gamma: f64) -> Result<QuboInstance> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    let n = graph.num_vertices;
    let mut b = QuboBuilder::new(n);
    add_cut_terms(&mut b, graph, 1.0);
    let lin = gamma * (1.0 - n as f64);
    for i in 0..n {
        b.add(Part::Constraint, i, i, lin);
        for j in (i + 1)..n {
            b.add(Part::Constraint, i, j, 2.0 * gamma);
        }
    }
    b.cardinality(n as f64 / 2.0)
        .label(format!("graph_partition(n={n},m={},gamma={gamma})", graph.edges.len()))
        .build()
}

/// Number partitioning: `q_ii = a_i (a_i - S)`, `q_ij = q_ji = a_i a_j`.
/// Satisfies `4 H(x) + S^2 == (sum_i a_i (2 x_i - 1))^2`.
pub fn gen_number_partition(values: &[u64]) -> Result<QuboInstance> {
    if values.is_empty() {
        return Err(Error::invalid("number partitioning needs at least one value"));
    }
    if values.contains(&0) {
        return Err(Error::invalid("values must be positive"));
    }
    let n = values.len();
    let a: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let total: f64 = a.iter().sum();
    let mut b = QuboBuilder::new(n);
    for i in 0..n {
        b.add(Part::Objective, i, i, a[i] * (a[i] - total));
        for j in (i + 1)..n {
            // Pair coefficient is twice q_ij in the symmetric reading.
            b.add(Part::Objective, i, j, 2.0 * a[i] * a[j]);
        }
    }
    b.label(format!("number_partition(n={n},sum={total})")).build()
}

/// Default Set Cover penalty: one more than the number of sets.
pub fn default_set_cover_penalty(input: &SetCoverInput) -> f64 {
    input.sets.len() as f64 + 1.0
}

/// Penalty-form Set Cover QUBO.
///
/// Variables `0..m` select sets; after them come binary slack bits per
/// element. Element `e` with covering sets `C_e` contributes
/// `penalty * (sum_{j in C_e} x_j - 1 - s_e)^2` where `s_e` is the slack in
/// `0..=|C_e|-1`. Minimizing over the slack leaves
/// `#selected + penalty * #uncovered`.
pub fn gen_set_cover(input: &SetCoverInput, penalty: f64) -> Result<QuboInstance> {
    let m = input.sets.len();
    if !(penalty > m as f64) || !penalty.is_finite() {
        return Err(Error::invalid(format!(
            "penalty {penalty} must exceed the number of sets ({m})"
        )));
    }
    let covering = input.covering();
    let slack_total: usize = covering.iter().map(|c| slack_width(c.len())).sum();
    let n = m + slack_total;
    let mut b = QuboBuilder::new(n);
    for j in 0..m {
        b.add(Part::Objective, j, j, 1.0);
    }
    let mut next = m;
    for sets in &covering {
        // Linear form L = sum_j x_j - sum_k 2^k s_k - 1, penalty * L^2.
        let mut terms: Vec<(usize, f64)> = sets.iter().map(|&j| (j, 1.0)).collect();
        for k in 0..slack_width(sets.len()) {
            terms.push((next, -((1u64 << k) as f64)));
            next += 1;
        }
        let constant = -1.0;
        b.add_constant(Part::Constraint, penalty * constant * constant);
        for (a, &(u, cu)) in terms.iter().enumerate() {
            // x^2 = x
            b.add(Part::Constraint, u, u, penalty * (cu * cu + 2.0 * cu * constant));
            for &(v, cv) in &terms[a + 1..] {
                b.add(Part::Constraint, u, v, penalty * 2.0 * cu * cv);
            }
        }
    }
    b.label(format!(
        "set_cover(elements={},sets={m},slack={slack_total},penalty={penalty})",
        input.num_elements
    ))
    .build()
}

/// `G(n, p)` with weights uniform in `[lo, hi]`.
pub fn gen_erdos_renyi(n: usize, p: f64, weight_range: (f64, f64), seed: u64) -> Result<Graph> {
    let (lo, hi) = weight_range;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("edge probability must be in (0, 1), got {p}")));
    }
    if !(lo <= hi) || lo < 0.0 {
        return Err(Error::invalid(format!("invalid weight range [{lo}, {hi}]")));
    }
    let mut r = rng::stream(seed, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if r.random::<f64>() < p {
                let w = if lo == hi { lo } else { r.random_range(lo..=hi) };
                edges.push((u, v, w));
            }
        }
    }
    Graph::new(n, edges)
}

/// `n` integers uniform in `[lo, hi]`. With `even_total`, the last value is
/// incremented when the sum is odd so an equal-sum split is not excluded by parity.
pub fn gen_number_values(n: usize, lo: u64, hi: u64, even_total: bool, seed: u64) -> Result<Vec<u64>> {
    if n == 0 || lo == 0 || lo > hi {
        return Err(Error::invalid(format!("invalid value range [{lo}, {hi}] or n = {n}")));
    }
    let mut r = rng::stream(seed, 0);
    let mut values: Vec<u64> = (0..n).map(|_| r.random_range(lo..=hi)).collect();
    if even_total && values.iter().sum::<u64>() % 2 == 1 {
        *values.last_mut().unwrap() += 1;
    }
    Ok(values)
}

/// Random set system: each set includes each element with probability `p`.
/// Redraws until the union covers every element.
pub fn gen_set_system(num_elements: usize, num_sets: usize, p: f64, seed: u64) -> Result<SetCoverInput> {
    if !(p > 0.0 && p <= 1.0) || num_elements == 0 || num_sets == 0 {
        return Err(Error::invalid("set system needs elements, sets and p in (0, 1]"));
    }
    for attempt in 0..10_000u64 {
        let mut r = rng::stream(seed, attempt);
        let sets: Vec<Vec<usize>> = (0..num_sets)
            .map(|_| (0..num_elements).filter(|_| r.random::<f64>() < p).collect())
            .collect();
        if let Ok(input) = SetCoverInput::new(num_elements, sets) {
            return Ok(input);
        }
    }
    Err(Error::invalid("could not draw a covering set system; increase p or the set count"))
}

/// Problem family of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Synthetic,
    MaxCut,
    GraphPartition,
    NumberPartition,
    SetCover,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Synthetic,
        Family::MaxCut,
        Family::GraphPartition,
        Family::NumberPartition,
        Family::SetCover,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Synthetic => "synthetic",
            Family::MaxCut => "max_cut",
            Family::GraphPartition => "graph_partition",
            Family::NumberPartition => "number_partition",
            Family::SetCover => "set_cover",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown family {s:?}")))
    }
}

fn default_mu() -> f64 {
    SYNTHETIC_MU
}
fn default_sigma2() -> f64 {
    SYNTHETIC_SIGMA2
}
fn default_p() -> f64 {
    0.2
}
fn default_weights() -> (f64, f64) {
    (1.0, 10.0)
}
fn default_gamma() -> f64 {
    GRAPH_PARTITION_GAMMA
}
fn default_lo() -> u64 {
    1
}
fn default_hi() -> u64 {
    100
}
fn default_cover_p() -> f64 {
    0.3
}

/// Recipe for one generated instance, as written in plan files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Synthetic {
        n: usize,
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_sigma2")]
        sigma2: f64,
        seed: u64,
    },
    MaxCut {
        n: usize,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_weights")]
        weights: (f64, f64),
        seed: u64,
    },
    GraphPartition {
        n: usize,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_weights")]
        weights: (f64, f64),
        #[serde(default = "default_gamma")]
        gamma: f64,
        seed: u64,
    },
    NumberPartition {
        n: usize,
        #[serde(default = "default_lo")]
        lo: u64,
        #[serde(default = "default_hi")]
        hi: u64,
        #[serde(default)]
        even_total: bool,
        seed: u64,
    },
    SetCover {
        /// Number of elements.
        n: usize,
        /// Number of sets; defaults to `2n`.
        #[serde(default)]
        sets: Option<usize>,
        #[serde(default = "default_cover_p")]
        p: f64,
        #[serde(default)]
        penalty: Option<f64>,
        seed: u64,
    },
}

impl GeneratorSpec {
    pub fn family(&self) -> Family {
        match self {
            GeneratorSpec::Synthetic { .. } => Family::Synthetic,
            GeneratorSpec::MaxCut { .. } => Family::MaxCut,
            GeneratorSpec::GraphPartition { .. } => Family::GraphPartition,
            GeneratorSpec::NumberPartition { .. } => Family::NumberPartition,
            GeneratorSpec::SetCover { .. } => Family::SetCover,
        }
    }

    pub fn size(&self) -> usize {
        match *self {
            GeneratorSpec::Synthetic { n, .. }
            | GeneratorSpec::MaxCut { n, .. }
            | GeneratorSpec::GraphPartition { n, .. }
            | GeneratorSpec::NumberPartition { n, .. }
            | GeneratorSpec::SetCover { n, .. } => n,
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            GeneratorSpec::Synthetic { seed, .. }
            | GeneratorSpec::MaxCut { seed, .. }
            | GeneratorSpec::GraphPartition { seed, .. }
            | GeneratorSpec::NumberPartition { seed, .. }
            | GeneratorSpec::SetCover { seed, .. } => seed,
        }
    }

    /// Same recipe with a different size and seed.
    pub fn resized(&self, size: usize, new_seed: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            GeneratorSpec::Synthetic { n, seed, .. }
            | GeneratorSpec::MaxCut { n, seed, .. }
            | GeneratorSpec::GraphPartition { n, seed, .. }
            | GeneratorSpec::NumberPartition { n, seed, .. }
            | GeneratorSpec::SetCover { n, seed, .. } => {
                *n = size;
                *seed = new_seed;
            }
        }
        s
    }

    /// Stable identifier, also used as the CSV instance id.
    pub fn instance_id(&self) -> String {
        format!("{}-n{}-s{}", self.family(), self.size(), self.seed())
    }

    pub fn build(&self) -> Result<QuboInstance> {
        let inst = match *self {
            GeneratorSpec::Synthetic { n, mu, sigma2, seed } => gen_synthetic(n, mu, sigma2, seed)?,
            GeneratorSpec::MaxCut { n, p, weights, seed } => gen_maxcut(&gen_erdos_renyi(n, p, weights, seed)?)?,
            GeneratorSpec::GraphPartition { n, p, weights, gamma, seed } => {
                gen_graph_partition(&gen_erdos_renyi(n, p, weights, seed)?, gamma)?
            }
            GeneratorSpec::NumberPartition { n, lo, hi, even_total, seed } => {
                gen_number_partition(&gen_number_values(n, lo, hi, even_total, seed)?)?
            }
            GeneratorSpec::SetCover { n, sets, p, penalty, seed } => {
                let input = gen_set_system(n, sets.unwrap_or(2 * n), p, seed)?;
                let penalty = penalty.unwrap_or_else(|| default_set_cover_penalty(&input));
                gen_set_cover(&input, penalty)?
            }
        };
        Ok(inst.with_seed(Some(self.seed())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::bits_from_index;

    fn brute_min(inst: &QuboInstance) -> (f64, Vec<u64>) {
        let n = inst.n();
        let mut best = f64::INFINITY;
        let mut arg = Vec::new();
        for k in 0..(1u64 << n) {
            let e = inst.evaluate(&bits_from_index(k, n)).unwrap();
            if e < best - 1e-9 {
                best = e;
                arg = vec![k];
            } else if (e - best).abs() <= 1e-9 {
                arg.push(k);
            }
        }
        (best, arg)
    }

    #[test]
    fn synthetic_rejects_nonpositive_variance() {
        assert!(matches!(gen_synthetic(4, 0.0, 0.0, 1), Err(Error::InvalidArgument(_))));
        assert!(gen_synthetic(4, 0.0, -1.0, 1).is_err());
    }

    #[test]
    fn synthetic_degenerate_variance_is_near_constant() {
        let inst = gen_synthetic(10, 0.5, 1e-12, 3).unwrap();
        for i in 0..10 {
            assert!((inst.linear(i) - 0.5).abs() < 1e-4);
            for j in (i + 1)..10 {
                assert!((inst.pair(i, j) - 0.5).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn synthetic_sample_mean() {
        let n = 128;
        let inst = gen_synthetic(n, 0.0, 2.0, 17).unwrap();
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            for j in i..n {
                sum += if i == j { inst.linear(i) } else { inst.pair(i, j) };
                count += 1;
            }
        }
        assert_eq!(count, n * (n + 1) / 2);
        let mean = sum / count as f64;
        assert!(mean.abs() < 3.0 * (2.0 / count as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn synthetic_is_deterministic() {
        assert_eq!(gen_synthetic(9, 0.0, 2.0, 5).unwrap(), gen_synthetic(9, 0.0, 2.0, 5).unwrap());
        assert_ne!(gen_synthetic(9, 0.0, 2.0, 5).unwrap(), gen_synthetic(9, 0.0, 2.0, 6).unwrap());
    }

    #[test]
    fn maxcut_single_edge() {
        let g = Graph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let inst = gen_maxcut(&g).unwrap();
        assert_eq!(inst.evaluate(&[1, 0]).unwrap(), -1.0);
        assert_eq!(inst.evaluate(&[1, 1]).unwrap(), 0.0);
        assert_eq!(inst.evaluate(&[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn maxcut_triangle_minimum() {
        let g = Graph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let (best, _) = brute_min(&gen_maxcut(&g).unwrap());
        assert_eq!(best, -2.0);
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert!(Graph::new(3, vec![(1, 1, 1.0)]).is_err());
        assert!(Graph::new(3, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(Graph::new(3, vec![(0, 5, 1.0)]).is_err());
    }

    fn is_balanced(k: u64, n: usize) -> bool {
        2 * k.count_ones() as usize == n
    }

    #[test]
    fn graph_partition_path_minima_are_balanced() {
        let g = Graph::new(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let (_, arg) = brute_min(&gen_graph_partition(&g, 5.0).unwrap());
        assert!(!arg.is_empty());
        assert!(arg.iter().all(|&k| is_balanced(k, 4)));
    }

    #[test]
    fn graph_partition_empty_graph_minima_are_exactly_balanced() {
        let g = Graph::new(6, vec![]).unwrap();
        let (_, arg) = brute_min(&gen_graph_partition(&g, 1.0).unwrap());
        let balanced: Vec<u64> = (0..64u64).filter(|&k| is_balanced(k, 6)).collect();
        assert_eq!(arg, balanced);
    }

    #[test]
    fn graph_partition_stronger_penalty_never_adds_unbalanced_minima() {
        for seed in 0..5 {
            let g = gen_erdos_renyi(10, 0.4, (1.0, 10.0), seed).unwrap();
            let (_, weak) = brute_min(&gen_graph_partition(&g, 0.5).unwrap());
            let (_, strong) = brute_min(&gen_graph_partition(&g, 5.0).unwrap());
            for k in &strong {
                assert!(is_balanced(*k, 10) || weak.contains(k));
            }
        }
    }

    #[test]
    fn graph_partition_penalty_shape() {
        let g = Graph::new(5, vec![(0, 3, 2.0)]).unwrap();
        let inst = gen_graph_partition(&g, 3.0).unwrap();
        for k in 0..32u64 {
            let bits = bits_from_index(k, 5);
            let ones = k.count_ones() as f64;
            let want = g.cut_weight(&bits) + 3.0 * ((ones - 2.5).powi(2) - 6.25);
            assert!((inst.evaluate(&bits).unwrap() - want).abs() < 1e-9);
        }
        assert_eq!(inst.constraint().unwrap().cardinality(), Some(2.5));
        assert!(gen_graph_partition(&g, 0.0).is_err());
    }

    #[test]
    fn number_partition_examples() {
        let inst = gen_number_partition(&[3, 5]).unwrap();
        let e = inst.evaluate(&[1, 0]).unwrap();
        assert_eq!(e, -15.0);
        assert_eq!(4.0 * e + 64.0, 4.0);
        let (_, arg) = brute_min(&gen_number_partition(&[1, 1]).unwrap());
        assert_eq!(arg, vec![1, 2]);
        assert!(gen_number_partition(&[]).is_err());
    }

    #[test]
    fn number_partition_identity_exhaustive() {
        let values = gen_number_values(10, 1, 100, false, 4).unwrap();
        let inst = gen_number_partition(&values).unwrap();
        let s: f64 = values.iter().map(|&v| v as f64).sum();
        for k in 0..1024 {
            let bits = bits_from_index(k, 10);
            let diff: f64 = values.iter().zip(&bits).map(|(&a, &b)| a as f64 * (2.0 * b as f64 - 1.0)).sum();
            assert_eq!(4.0 * inst.evaluate(&bits).unwrap() + s * s, diff * diff);
        }
    }

    #[test]
    fn even_total_adjustment() {
        for seed in 0..20 {
            let v = gen_number_values(7, 1, 100, true, seed).unwrap();
            assert_eq!(v.iter().sum::<u64>() % 2, 0);
        }
    }

    fn projected_min(inst: &QuboInstance, m: usize, selected: u64) -> f64 {
        let slack = inst.n() - m;
        (0..(1u64 << slack))
            .map(|s| inst.evaluate(&bits_from_index(selected | (s << m), inst.n())).unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn set_cover_single_set() {
        let input = SetCoverInput::new(3, vec![vec![0, 1, 2]]).unwrap();
        let inst = gen_set_cover(&input, 2.0).unwrap();
        let (best, arg) = brute_min(&inst);
        assert_eq!(best, 1.0);
        assert_eq!(arg, vec![1]);
    }

    #[test]
    fn set_cover_three_sets() {
        let input = SetCoverInput::new(2, vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        let inst = gen_set_cover(&input, 10.0).unwrap();
        let (best, arg) = brute_min(&inst);
        assert_eq!(best, 1.0);
        assert!(arg.iter().all(|&k| k & 0b111 == 0b100));
        assert_eq!(inst.evaluate(&vec![0; inst.n()]).unwrap(), 20.0);
    }

    #[test]
    fn set_cover_projected_energy() {
        let input = gen_set_system(4, 6, 0.4, 2).unwrap();
        let m = 6;
        let p = 7.0;
        let inst = gen_set_cover(&input, p).unwrap();
        assert_eq!(inst.n(), m + input.slack_bits());
        for sel in 0..(1u64 << m) {
            let bits = bits_from_index(sel, m);
            let want = sel.count_ones() as f64 + p * input.uncovered(&bits) as f64;
            assert!((projected_min(&inst, m, sel) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn set_cover_penalty_bound() {
        let input = SetCoverInput::new(2, vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        assert!(matches!(gen_set_cover(&input, 3.0), Err(Error::InvalidArgument(_))));
        assert!(SetCoverInput::new(3, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn erdos_renyi_statistics() {
        let g = gen_erdos_renyi(64, 0.2, (1.0, 10.0), 8).unwrap();
        let pairs = 64.0 * 63.0 / 2.0;
        let mean = 0.2 * pairs;
        let sd = (pairs * 0.2 * 0.8_f64).sqrt();
        assert!((g.edges().len() as f64 - mean).abs() < 4.0 * sd);
        assert!(g.edges().iter().all(|&(u, v, w)| u < v && (1.0..=10.0).contains(&w)));
    }

    #[test]
    fn erdos_renyi_tiny_probability_and_determinism() {
        assert!(gen_erdos_renyi(32, 1e-9, (1.0, 1.0), 1).unwrap().edges().is_empty());
        assert_eq!(
            gen_erdos_renyi(20, 0.3, (1.0, 10.0), 9).unwrap(),
            gen_erdos_renyi(20, 0.3, (1.0, 10.0), 9).unwrap()
        );
        assert!(gen_erdos_renyi(5, 1.0, (1.0, 2.0), 0).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = GeneratorSpec::SetCover { n: 4, sets: None, p: 0.3, penalty: None, seed: 3 };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"family\":\"set_cover\""));
        let back: GeneratorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let parsed: GeneratorSpec = serde_json::from_str(r#"{"family":"max_cut","n":8,"seed":1}"#).unwrap();
        assert_eq!(parsed.family(), Family::MaxCut);
        assert_eq!(parsed.build().unwrap().n(), 8);
    }
}
