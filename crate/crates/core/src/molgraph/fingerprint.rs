use std::hash::Hasher;

use fnv::FnvHasher;

use super::{ring_atoms, MolecularGraph};

pub const FINGERPRINT_BITS: usize = 2048;

/// Fixed-length circular fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: [u64; FINGERPRINT_BITS / 64],
}

impl Default for Fingerprint {
    fn default() -> Self {
        Fingerprint { words: [0; FINGERPRINT_BITS / 64] }
    }
}

impl Fingerprint {
    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Tanimoto similarity; two empty fingerprints are identical.
    pub fn tanimoto(&self, other: &Fingerprint) -> f64 {
        let (mut inter, mut union) = (0u32, 0u32);
        for (a, b) in self.words.iter().zip(&other.words) {
            inter += (a & b).count_ones();
            union += (a | b).count_ones();
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Bits as 0.0/1.0 features.
    pub fn to_features(&self) -> Vec<f64> {
        (0..FINGERPRINT_BITS).map(|i| if self.get(i) { 1.0 } else { 0.0 }).collect()
    }
}

fn hash_words(words: &[u64]) -> u64 {
    let mut h = FnvHasher::default();
    for w in words {
        h.write(&w.to_le_bytes());
    }
    h.finish()
}

/// Morgan-style fingerprint: every atom identifier from rounds `0..=radius`
/// sets bit `id mod 2048`.
pub fn morgan_fingerprint(g: &MolecularGraph, radius: usize) -> Fingerprint {
    let mut fp = Fingerprint::default();
    let in_ring = ring_atoms(g);
    let hydrogens = g.hydrogen_counts();
    let mut ids: Vec<u64> = (0..g.num_atoms())
        .map(|i| {
            let a = g.atom(i);
            hash_words(&[
                a.element as u64,
                a.aromatic as u64,
                g.degree(i) as u64,
                hydrogens[i] as u64,
                in_ring[i] as u64,
            ])
        })
        .collect();
    for &id in &ids {
        fp.set((id % FINGERPRINT_BITS as u64) as usize);
    }
    for round in 1..=radius {
        ids = (0..g.num_atoms())
            .map(|i| {
                let mut nbrs: Vec<(u64, u64)> =
                    g.incident(i).iter().map(|&(w, bi)| (g.bonds()[bi].order.code() as u64, ids[w])).collect();
                nbrs.sort_unstable();
                let mut words = vec![round as u64, ids[i]];
                words.extend(nbrs.into_iter().flat_map(|(b, n)| [b, n]));
                hash_words(&words)
            })
            .collect();
        for &id in &ids {
            fp.set((id % FINGERPRINT_BITS as u64) as usize);
        }
    }
    fp
}
