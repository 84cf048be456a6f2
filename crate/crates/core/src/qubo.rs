//! QUBO and Ising energy models.
//!
//! A [`QuboInstance`] stores a dense symmetric matrix `q` and evaluates
//! `H(x) = x^T q x + offset` over binary vectors. Coefficient lists use the
//! upper-triangular convention `H = sum_i a_i x_i + sum_{i<j} b_ij x_i x_j`:
//! `a_i` lands on `q[i][i]` and every pair coefficient is split in half over
//! `q[i][j]` and `q[j][i]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for all energy comparisons.
pub const ENERGY_RTOL: f64 = 1e-9;

/// `true` when two energies agree to [`ENERGY_RTOL`] relative (absolute near zero).
pub fn energies_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= ENERGY_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Bits of `index`, least significant bit first.
pub fn bits_from_index(index: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((index >> i) & 1) as u8).collect()
}

/// Returns a copy of `bits` with position `i` inverted.
pub fn flipped(bits: &[u8], i: usize) -> Vec<u8> {
    let mut out = bits.to_vec();
    out[i] ^= 1;
    out
}

fn check_bits(n: usize, bits: &[u8]) -> Result<()> {
    if bits.len() != n {
        return Err(Error::invalid(format!(
            "assignment has {} bits, instance has {n} variables",
            bits.len()
        )));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::invalid("assignment entries must be 0 or 1"));
    }
    Ok(())
}

/// The penalty share of an instance's coefficients.
///
/// Penalty-based formulations keep the constraint terms separate so that
/// reformulation strategies can rescale them without touching the objective.
/// The stored matrix is already included in the owning instance's `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintPart {
    q: Vec<f64>,
    offset: f64,
    cardinality: Option<f64>,
}

impl ConstraintPart {
    /// Symmetric constraint matrix, row-major.
    pub fn matrix(&self) -> &[f64] {
        &self.q
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Target `k` when the constraint is a cardinality penalty `(sum x - k)^2`.
    pub fn cardinality(&self) -> Option<f64> {
        self.cardinality
    }
}

/// Symmetric dense QUBO with provenance.
///
/// Immutable once built; transformations return new instances.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    n: usize,
    q: Vec<f64>,
    offset: f64,
    label: String,
    seed: Option<u64>,
    constraint: Option<ConstraintPart>,
}

/// Which share of the energy a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Objective,
    Constraint,
}

/// Accumulates coefficients in the upper-triangular convention.
#[derive(Debug, Clone)]
pub struct QuboBuilder {
    n: usize,
    objective: Vec<f64>,
    constraint: Option<Vec<f64>>,
    objective_offset: f64,
    constraint_offset: f64,
    cardinality: Option<f64>,
    label: String,
    seed: Option<u64>,
}

impl QuboBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: vec![0.0; n * n],
            constraint: None,
            objective_offset: 0.0,
            constraint_offset: 0.0,
            cardinality: None,
            label: String::new(),
            seed: None,
        }
    }

    fn upper(&mut self, part: Part) -> &mut Vec<f64> {
        match part {
            Part::Objective => &mut self.objective,
            Part::Constraint => {
                let n = self.n;
                self.constraint.get_or_insert_with(|| vec![0.0; n * n])
            }
        }
    }

    /// Adds `coeff * x_i` (or `coeff * x_i x_j` when `i != j`). Order of `i`, `j` is irrelevant.
    pub fn add(&mut self, part: Part, i: usize, j: usize, coeff: f64) -> &mut Self {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let n = self.n;
        self.upper(part)[a * n + b] += coeff;
        self
    }

    pub fn add_constant(&mut self, part: Part, value: f64) -> &mut Self {
        match part {
            Part::Objective => self.objective_offset += value,
            Part::Constraint => {
                self.upper(part);
                self.constraint_offset += value;
            }
        }
        self
    }

    /// Declares the constraint share to be a cardinality penalty with target `k`.
    pub fn cardinality(&mut self, k: f64) -> &mut Self {
        self.cardinality = Some(k);
        self
    }

    pub fn label(&mut self, label: impl Into<String>) -> &mut Self {
        self.label = label.into();
        self
    }

    pub fn seed(&mut self, seed: Option<u64>) -> &mut Self {
        self.seed = seed;
        self
    }

    pub fn build(&self) -> Result<QuboInstance> {
        if self.n == 0 {
            return Err(Error::invalid("instance needs at least one variable"));
        }
        let objective = symmetrize(self.n, &self.objective);
        let constraint = self.constraint.as_ref().map(|c| symmetrize(self.n, c));
        let q = match &constraint {
            Some(c) => objective.iter().zip(c).map(|(a, b)| a + b).collect(),
            None => objective,
        };
        let part = constraint.map(|c| ConstraintPart {
            q: c,
            offset: self.constraint_offset,
            cardinality: self.cardinality,
        });
        let offset = self.objective_offset + part.as_ref().map_or(0.0, |p| p.offset);
        let inst = QuboInstance {
            n: self.n,
            q,
            offset,
            label: self.label.clone(),
            seed: self.seed,
            constraint: part,
        };
        inst.check_finite()?;
        Ok(inst)
    }
}

fn symmetrize(n: usize, upper: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = upper[i * n + i];
        for j in (i + 1)..n {
            let half = upper[i * n + j] / 2.0;
            q[i * n + j] = half;
            q[j * n + i] = half;
        }
    }
    q
}

impl QuboInstance {
    /// All-zero instance on `n` variables.
    pub fn zeros(n: usize) -> Result<Self> {
        QuboBuilder::new(n).build()
    }

    /// Builds from `(i, j, coeff)` triples in the upper-triangular convention.
    /// Entries with `i > j` are folded onto the pair `(j, i)`.
    pub fn from_upper(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut b = QuboBuilder::new(n);
        for &(i, j, c) in entries {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("entry ({i}, {j}) outside {n} variables")));
            }
            b.add(Part::Objective, i, j, c);
        }
        b.build()
    }

    /// Builds from a full symmetric row-major matrix. Symmetry must be exact.
    pub fn from_symmetric(n: usize, q: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("instance needs at least one variable"));
        }
        if q.len() != n * n {
            return Err(Error::invalid(format!("matrix has {} entries, expected {}", q.len(), n * n)));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if q[i * n + j].to_bits() != q[j * n + i].to_bits() {
                    return Err(Error::invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let inst = Self { n, q, offset: 0.0, label: String::new(), seed: None, constraint: None };
        inst.check_finite()?;
        Ok(inst)
    }

    fn check_finite(&self) -> Result<()> {
        let all = self.q.iter().chain(std::iter::once(&self.offset));
        let con = self.constraint.iter().flat_map(|c| c.q.iter().chain(std::iter::once(&c.offset)));
        if all.chain(con).any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(())
    }

    pub(crate) fn from_raw(
        n: usize,
        q: Vec<f64>,
        offset: f64,
        constraint: Option<ConstraintPart>,
        label: String,
        seed: Option<u64>,
    ) -> Self {
        debug_assert_eq!(q.len(), n * n);
        Self { n, q, offset, label, seed, constraint }
    }

    pub(crate) fn constraint_from_raw(q: Vec<f64>, offset: f64, cardinality: Option<f64>) -> ConstraintPart {
        ConstraintPart { q, offset, cardinality }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major symmetric matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.q
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.n..(i + 1) * self.n]
    }

    /// Constant term added to every energy.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn constraint(&self) -> Option<&ConstraintPart> {
        self.constraint.as_ref()
    }

    /// Linear coefficient `a_i`.
    pub fn linear(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// Pair coefficient `b_ij` (twice the stored half).
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        2.0 * self.get(i, j)
    }

    /// Largest absolute matrix entry.
    pub fn max_abs(&self) -> f64 {
        self.q.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Energy `x^T q x + offset`.
    pub fn evaluate(&self, bits: &[u8]) -> Result<f64> {
        check_bits(self.n, bits)?;
        Ok(self.energy_unchecked(bits))
    }

    pub(crate) fn energy_unchecked(&self, bits: &[u8]) -> f64 {
        let n = self.n;
        let mut e = 0.0;
        for i in 0..n {
            if bits[i] == 0 {
                continue;
            }
            let row = &self.q[i * n..(i + 1) * n];
            let mut s = 0.0;
            for j in 0..n {
                if bits[j] != 0 {
                    s += row[j];
                }
            }
            e += s;
        }
        e + self.offset
    }

    /// Energy change from flipping bit `i`:
    /// `(1 - 2 x_i) (q_ii + 2 sum_{j != i} q_ij x_j)`.
    pub fn flip_delta(&self, bits: &[u8], i: usize) -> Result<f64> {
        check_bits(self.n, bits)?;
        if i >= self.n {
            return Err(Error::invalid(format!("index {i} out of range for {} variables", self.n)));
        }
        Ok(self.flip_delta_unchecked(bits, i))
    }

    pub(crate) fn flip_delta_unchecked(&self, bits: &[u8], i: usize) -> f64 {
        let row = self.row(i);
        let mut s = 0.0;
        for (j, (&q, &b)) in row.iter().zip(bits).enumerate() {
            if b != 0 && j != i {
                s += q;
            }
        }
        let sign = if bits[i] == 0 { 1.0 } else { -1.0 };
        sign * (row[i] + 2.0 * s)
    }

    /// Local fields `h_i = sum_j q_ij x_j`, diagonal included.
    pub(crate) fn fields(&self, bits: &[u8]) -> Vec<f64> {
        let n = self.n;
        let mut h = vec![0.0; n];
        for (j, &b) in bits.iter().enumerate() {
            if b != 0 {
                for (i, hi) in h.iter_mut().enumerate() {
                    *hi += self.q[i * n + j];
                }
            }
        }
        h
    }

    /// Flip delta from a precomputed field vector.
    #[inline]
    pub(crate) fn delta_from_field(&self, bits: &[u8], field: &[f64], i: usize) -> f64 {
        let qii = self.q[i * self.n + i];
        let b = bits[i] as f64;
        let coupling = field[i] - qii * b;
        (1.0 - 2.0 * b) * (qii + 2.0 * coupling)
    }

    /// Updates `field` after bit `i` changed to `bits[i]`.
    #[inline]
    pub(crate) fn update_field(&self, bits: &[u8], field: &mut [f64], i: usize) {
        let row = self.row(i);
        if bits[i] == 1 {
            field.iter_mut().zip(row).for_each(|(h, q)| *h += q);
        } else {
            field.iter_mut().zip(row).for_each(|(h, q)| *h -= q);
        }
    }

    /// Converts to spins via `s = 2x - 1`. Returns the Ising model and the
    /// offset such that `ising.energy(s) + offset == self.evaluate(x)`.
    pub fn to_ising(&self) -> (IsingInstance, f64) {
        let n = self.n;
        let mut j = vec![0.0; n * n];
        let mut h = vec![0.0; n];
        let mut offset = self.offset;
        for a in 0..n {
            let qaa = self.get(a, a);
            h[a] += qaa / 2.0;
            offset += qaa / 2.0;
            for b in (a + 1)..n {
                let qab = self.get(a, b);
                j[a * n + b] = qab / 2.0;
                j[b * n + a] = qab / 2.0;
                h[a] += qab / 2.0;
                h[b] += qab / 2.0;
                offset += qab / 2.0;
            }
        }
        (IsingInstance { n, j, h }, offset)
    }

    /// Writes the JSON instance file.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&InstanceFile::from(self))?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: InstanceFile = serde_json::from_str(&text)?;
        file.into_instance()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<InstanceFile>(text)?.into_instance()
    }
}

fn upper_entries(n: usize, q: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let c = if i == j { q[i * n + i] } else { 2.0 * q[i * n + j] };
            if c != 0.0 {
                out.push((i, j, c));
            }
        }
    }
    out
}

/// On-disk instance layout: upper-triangular `[i, j, coeff]` triples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(default)]
    pub label: String,
    pub entries: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Penalty share, already included in `entries`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintFile {
    pub entries: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<f64>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl From<&QuboInstance> for InstanceFile {
    fn from(inst: &QuboInstance) -> Self {
        Self {
            n: inst.n,
            label: inst.label.clone(),
            entries: upper_entries(inst.n, &inst.q),
            offset: inst.offset,
            seed: inst.seed,
            constraint: inst.constraint.as_ref().map(|c| ConstraintFile {
                entries: upper_entries(inst.n, &c.q),
                offset: c.offset,
                cardinality: c.cardinality,
            }),
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<QuboInstance> {
        let n = self.n;
        let dense = |entries: &[(usize, usize, f64)]| -> Result<Vec<f64>> {
            let mut upper = vec![0.0; n * n];
            for &(i, j, c) in entries {
                if i >= n || j >= n {
                    return Err(Error::invalid(format!("entry ({i}, {j}) outside {n} variables")));
                }
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                upper[a * n + b] += c;
            }
            Ok(symmetrize(n, &upper))
        };
        let inst = QuboInstance::from_symmetric(n, dense(&self.entries)?)?;
        let constraint = match self.constraint {
            Some(c) => Some(ConstraintPart { q: dense(&c.entries)?, offset: c.offset, cardinality: c.cardinality }),
            None => None,
        };
        let inst = QuboInstance { offset: self.offset, label: self.label, seed: self.seed, constraint, ..inst };
        inst.check_finite()?;
        Ok(inst)
    }
}

/// Binary configuration together with its energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub bits: Vec<u8>,
    pub energy: f64,
}

impl Assignment {
    pub fn new(instance: &QuboInstance, bits: Vec<u8>) -> Result<Self> {
        let energy = instance.evaluate(&bits)?;
        Ok(Self { bits, energy })
    }
}

/// Ising model `E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i` over `s_i in {-1, +1}`.
///
/// `j` is stored symmetric with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    j: Vec<f64>,
    h: Vec<f64>,
}

impl IsingInstance {
    pub fn new(n: usize, j: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("instance needs at least one spin"));
        }
        if j.len() != n * n || h.len() != n {
            return Err(Error::invalid("coupling or field shape does not match spin count"));
        }
        for a in 0..n {
            if j[a * n + a] != 0.0 {
                return Err(Error::invalid(format!("coupling diagonal must be zero at {a}")));
            }
            for b in (a + 1)..n {
                if j[a * n + b].to_bits() != j[b * n + a].to_bits() {
                    return Err(Error::invalid(format!("couplings not symmetric at ({a}, {b})")));
                }
            }
        }
        Ok(Self { n, j, h })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.j[a * self.n + b]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::invalid("spin vector length does not match instance"));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("spins must be -1 or +1"));
        }
        let n = self.n;
        let mut e = 0.0;
        for a in 0..n {
            let sa = spins[a] as f64;
            e += self.h[a] * sa;
            for b in (a + 1)..n {
                e += self.j[a * n + b] * sa * spins[b] as f64;
            }
        }
        Ok(e)
    }

    /// QUBO with the same energy on every configuration under `x = (s + 1) / 2`;
    /// the constant lands in the QUBO offset.
    pub fn to_qubo(&self) -> QuboInstance {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        let mut offset = 0.0;
        for a in 0..n {
            q[a * n + a] += 2.0 * self.h[a];
            offset -= self.h[a];
            for b in (a + 1)..n {
                let jab = self.j[a * n + b];
                q[a * n + b] = 2.0 * jab;
                q[b * n + a] = 2.0 * jab;
                q[a * n + a] -= 2.0 * jab;
                q[b * n + b] -= 2.0 * jab;
                offset += jab;
            }
        }
        QuboInstance::from_raw(n, q, offset, None, String::from("ising"), None)
    }
}

/// Spin for a bit: `0 -> -1`, `1 -> +1`.
pub fn spins_from_bits(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| if b == 0 { -1 } else { 1 }).collect()
}

pub fn ising_to_qubo(instance: &IsingInstance) -> QuboInstance {
    instance.to_qubo()
}

pub fn qubo_to_ising(instance: &QuboInstance) -> (IsingInstance, f64) {
    instance.to_ising()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn two_var() -> QuboInstance {
        QuboInstance::from_upper(2, &[(0, 0, -1.0), (1, 1, -1.0), (0, 1, 2.0)]).unwrap()
    }

    fn gaussian(n: usize, seed: u64) -> QuboInstance {
        let mut r = rng::stream(seed, 0);
        let normal = Normal::new(0.0, 2f64.sqrt()).unwrap();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                entries.push((i, j, normal.sample(&mut r)));
            }
        }
        QuboInstance::from_upper(n, &entries).unwrap()
    }

    /// Direct sum over the upper-triangular coefficients, written independently.
    fn naive_energy(n: usize, entries: &[(usize, usize, f64)], bits: &[u8]) -> f64 {
        let mut e = 0.0;
        for &(i, j, c) in entries {
            for a in 0..n {
                for b in 0..n {
                    if a == i && b == j && bits[a] == 1 && bits[b] == 1 {
                        e += c;
                    }
                }
            }
        }
        e
    }

    #[test]
    fn zero_bits_give_zero() {
        let inst = gaussian(5, 1);
        assert_eq!(inst.evaluate(&[0; 5]).unwrap(), 0.0);
    }

    #[test]
    fn two_variable_examples() {
        let inst = two_var();
        assert_eq!(inst.get(0, 1), 1.0);
        assert_eq!(inst.evaluate(&[1, 0]).unwrap(), -1.0);
        assert_eq!(inst.flip_delta(&[0, 0], 0).unwrap(), -1.0);
    }

    #[test]
    fn evaluate_matches_naive_summation() {
        let n = 4;
        let mut r = rng::stream(42, 0);
        let normal = Normal::new(0.0, 2f64.sqrt()).unwrap();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                entries.push((i, j, normal.sample(&mut r)));
            }
        }
        let inst = QuboInstance::from_upper(n, &entries).unwrap();
        for k in 0..16 {
            let bits = bits_from_index(k, n);
            assert!(energies_match(inst.evaluate(&bits).unwrap(), naive_energy(n, &entries, &bits)));
        }
    }

    #[test]
    fn flip_delta_matches_reevaluation() {
        let inst = gaussian(8, 3);
        let mut r = rng::stream(99, 1);
        for _ in 0..100 {
            let bits: Vec<u8> = (0..8).map(|_| r.random_range(0..2)).collect();
            let i = r.random_range(0..8);
            let d = inst.flip_delta(&bits, i).unwrap();
            let want = inst.evaluate(&flipped(&bits, i)).unwrap() - inst.evaluate(&bits).unwrap();
            assert!(energies_match(d, want), "{d} vs {want}");
        }
    }

    #[test]
    fn zero_matrix_delta() {
        let inst = QuboInstance::zeros(3).unwrap();
        assert_eq!(inst.flip_delta(&[1, 0, 1], 2).unwrap(), 0.0);
    }

    #[test]
    fn errors_on_bad_shapes() {
        let inst = two_var();
        assert!(matches!(inst.evaluate(&[1]), Err(Error::InvalidArgument(_))));
        assert!(matches!(inst.flip_delta(&[1, 0], 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(inst.evaluate(&[2, 0]), Err(Error::InvalidArgument(_))));
        assert!(QuboInstance::zeros(0).is_err());
        assert!(QuboInstance::from_symmetric(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    }

    #[test]
    fn transpose_construction_is_equivalent() {
        let up = [(0, 0, 1.5), (0, 1, -2.0), (1, 2, 0.25), (2, 2, -1.0)];
        let down: Vec<_> = up.iter().map(|&(i, j, c)| (j, i, c)).collect();
        let a = QuboInstance::from_upper(3, &up).unwrap();
        let b = QuboInstance::from_upper(3, &down).unwrap();
        for k in 0..8 {
            let bits = bits_from_index(k, 3);
            assert_eq!(a.evaluate(&bits).unwrap(), b.evaluate(&bits).unwrap());
        }
    }

    #[test]
    fn zero_ising_converts_to_zero_qubo() {
        let ising = IsingInstance::new(3, vec![0.0; 9], vec![0.0; 3]).unwrap();
        let q = ising.to_qubo();
        assert!(q.matrix().iter().all(|&v| v == 0.0));
        assert_eq!(q.offset(), 0.0);
        let (back, off) = QuboInstance::zeros(3).unwrap().to_ising();
        assert_eq!(off, 0.0);
        assert!(back.fields().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_spin_round_trip() {
        let ising = IsingInstance::new(1, vec![0.0], vec![1.0]).unwrap();
        let q = ising.to_qubo();
        // s = -1 <-> x = 0
        assert_eq!(q.evaluate(&[0]).unwrap(), ising.energy(&[-1]).unwrap());
        assert_eq!(q.evaluate(&[1]).unwrap(), ising.energy(&[1]).unwrap());
    }

    #[test]
    fn ising_conversion_exhaustive_n6() {
        let mut r = rng::stream(5, 0);
        let n = 6;
        let mut j = vec![0.0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let v: f64 = r.random_range(-2.0..2.0);
                j[a * n + b] = v;
                j[b * n + a] = v;
            }
        }
        let h: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let ising = IsingInstance::new(n, j, h).unwrap();
        let q = ising.to_qubo();
        for k in 0..64 {
            let bits = bits_from_index(k, n);
            let s = spins_from_bits(&bits);
            assert!(energies_match(q.evaluate(&bits).unwrap(), ising.energy(&s).unwrap()));
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = gaussian(6, 11).with_label("g6").with_seed(Some(11)).with_offset(0.1);
        let back = QuboInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn file_entries_use_pair_coefficients() {
        let json = r#"{"n": 2, "label": "t", "entries": [[0, 0, -1.0], [1, 1, -1.0], [0, 1, 2.0]]}"#;
        let inst = QuboInstance::from_json(json).unwrap();
        assert_eq!(inst, two_var().with_label("t"));
    }
}
