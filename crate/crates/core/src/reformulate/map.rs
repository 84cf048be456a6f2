use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Original variable, possibly complemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn value(&self, original: &[u8]) -> u8 {
        original[self.var] ^ self.negated as u8
    }
}

/// Auxiliary variable standing for the product of two literals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxVar {
    pub left: Literal,
    pub right: Literal,
}

/// Correspondence between the original variables and a reformulated instance.
///
/// Original variable `i` keeps index `i` and carries a polarity flag
/// (`y_i = x_i XOR flipped_i`). Auxiliary variables follow the originals in
/// creation order and are fixed by their defining product, so each original
/// assignment has exactly one consistent extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableMap {
    flipped: Vec<bool>,
    aux: Vec<AuxVar>,
}

impl VariableMap {
    pub fn identity(n: usize) -> Self {
        Self { flipped: vec![false; n], aux: Vec::new() }
    }

    pub fn original_len(&self) -> usize {
        self.flipped.len()
    }

    pub fn current_len(&self) -> usize {
        self.flipped.len() + self.aux.len()
    }

    pub fn flipped(&self) -> &[bool] {
        &self.flipped
    }

    pub fn aux(&self) -> &[AuxVar] {
        &self.aux
    }

    /// Index of auxiliary variable `k` in the reformulated instance.
    pub fn aux_index(&self, k: usize) -> usize {
        self.flipped.len() + k
    }

    /// Literal for the current value of primary variable `i`.
    pub fn literal(&self, i: usize) -> Literal {
        Literal { var: i, negated: self.flipped[i] }
    }

    /// Whether the product of primary variables `u` and `v` already has an auxiliary.
    pub fn encodes_pair(&self, u: usize, v: usize) -> bool {
        self.aux.iter().any(|a| {
            let (l, r) = (a.left.var, a.right.var);
            (l == u && r == v) || (l == v && r == u)
        })
    }

    pub(crate) fn with_flips(&self, mask: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        for &i in mask {
            if i >= out.flipped.len() {
                return Err(Error::invalid(format!("substitution index {i} is not an original variable")));
            }
            out.flipped[i] = !out.flipped[i];
        }
        Ok(out)
    }

    pub(crate) fn with_aux(&self, aux: AuxVar) -> Self {
        let mut out = self.clone();
        out.aux.push(aux);
        out
    }

    /// Consistent reformulated assignment for an original one.
    pub fn extend(&self, original: &[u8]) -> Vec<u8> {
        let mut y: Vec<u8> = original.iter().zip(&self.flipped).map(|(&x, &f)| x ^ f as u8).collect();
        y.extend(self.aux.iter().map(|a| a.left.value(original) & a.right.value(original)));
        y
    }

    /// Original assignment encoded by a reformulated one (auxiliaries ignored).
    pub fn project(&self, current: &[u8]) -> Vec<u8> {
        current.iter().zip(&self.flipped).map(|(&y, &f)| y ^ f as u8).collect()
    }

    pub fn is_consistent(&self, current: &[u8]) -> bool {
        current.len() == self.current_len() && self.extend(&self.project(current)) == current
    }

    /// Checks that the descriptor is a bijection on the original space.
    pub fn validate(&self) -> Result<()> {
        let n = self.flipped.len();
        for (k, a) in self.aux.iter().enumerate() {
            if a.left.var >= n || a.right.var >= n || a.left.var == a.right.var {
                return Err(Error::Integrity(format!("auxiliary {k} has an invalid definition")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extend_and_project() {
        let map = VariableMap::identity(3).with_flips(&[1]).unwrap();
        let lit0 = map.literal(0);
        let lit1 = map.literal(1);
        let map = map.with_aux(AuxVar { left: lit0, right: lit1 });
        let x = [1, 0, 1];
        let y = map.extend(&x);
        // y1 = 1 - x1, aux = y0 * y1
        assert_eq!(y, vec![1, 1, 1, 1]);
        assert_eq!(map.project(&y), x.to_vec());
        assert!(map.is_consistent(&y));
        assert!(!map.is_consistent(&[1, 1, 1, 0]));
        assert!(map.encodes_pair(1, 0));
        assert!(map.validate().is_ok());
    }

    #[test]
    fn flips_are_involutions() {
        let map = VariableMap::identity(4);
        let twice = map.with_flips(&[0, 2]).unwrap().with_flips(&[0, 2]).unwrap();
        assert_eq!(twice, map);
        assert!(map.with_flips(&[4]).is_err());
    }
}
