//! Structural similarity over node-kind count vectors.

use crate::frontend::{AstNode, NodeKind};

/// Bodies smaller than this many nodes are never similarity candidates.
pub const MIN_TOKEN_MASS: u32 = 20;

pub const DEFAULT_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharacteristicVector {
    /// One slot per [`NodeKind`], in `NodeKind::ALL` order.
    pub counts: [u32; NodeKind::COUNT],
    pub token_mass: u32,
}

impl Default for CharacteristicVector {
    fn default() -> Self {
        CharacteristicVector { counts: [0; NodeKind::COUNT], token_mass: 0 }
    }
}

impl CharacteristicVector {
    pub fn from_counts(counts: [u32; NodeKind::COUNT]) -> Self {
        CharacteristicVector { counts, token_mass: counts.iter().sum() }
    }

    pub fn get(&self, kind: NodeKind) -> u32 {
        self.counts[kind.index()]
    }

    pub fn norm(&self) -> f64 {
        self.counts.iter().map(|&c| f64::from(c) * f64::from(c)).sum::<f64>().sqrt()
    }
}

/// Counts every descendant-or-self of `node` by kind.
pub fn vectorize(node: &AstNode) -> CharacteristicVector {
    let mut counts = [0u32; NodeKind::COUNT];
    for n in node.descendants() {
        counts[n.kind.index()] += 1;
    }
    CharacteristicVector::from_counts(counts)
}

/// `1 - |u - v| / (|u| + |v|)`, with two zero vectors scoring 1.
pub fn similarity(u: &CharacteristicVector, v: &CharacteristicVector) -> f64 {
    let denom = u.norm() + v.norm();
    if denom == 0.0 {
        return 1.0;
    }
    let dist = u
        .counts
        .iter()
        .zip(&v.counts)
        .map(|(&a, &b)| {
            let d = f64::from(a) - f64::from(b);
            d * d
        })
        .sum::<f64>()
        .sqrt();
    (1.0 - dist / denom).clamp(0.0, 1.0)
}
