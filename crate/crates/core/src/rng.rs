//! Counter-based random streams.
//!
//! Every random quantity in a run is drawn from its own ChaCha20 stream
//! whose key is the SHA-256 digest of `(seed, trial, label, index)`. A
//! trial therefore never shares state with another trial, and trials can
//! run in any order or in parallel without changing a single sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::{CMatrix, CVector, C64};

/// Trial slot used for run-wide public artifacts.
pub const PUBLIC_TRIAL: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey<'a> {
    pub seed: u64,
    pub trial: u64,
    pub label: &'a str,
    pub index: u64,
}

impl<'a> StreamKey<'a> {
    pub fn public(seed: u64, label: &'a str) -> Self {
        Self {
            seed,
            trial: PUBLIC_TRIAL,
            label,
            index: 0,
        }
    }

    pub fn trial(seed: u64, trial: u64, label: &'a str, index: u64) -> Self {
        Self {
            seed,
            trial,
            label,
            index,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut hasher = Sha256::new();
        hasher.update(b"sura-stream-v1");
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.trial.to_le_bytes());
        hasher.update((self.label.len() as u64).to_le_bytes());
        hasher.update(self.label.as_bytes());
        hasher.update(self.index.to_le_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha20Rng::from_seed(key)
    }
}

/// One draw from CN(0, variance).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(scale * re, scale * im)
}

pub fn complex_normal_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    CVector::from_fn(len, |_, _| complex_normal(rng, variance))
}

/// Matrix of i.i.d. CN(0, variance) entries, filled row by row.
pub fn complex_normal_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            out[(r, c)] = complex_normal(rng, variance);
        }
    }
    out
}

pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}
