//! Keystream expansion `k = s T mod 2` and XOR encryption.

use crate::error::{check_len, Result};
use crate::Bits;

/// Ciphertext `c = [c_p, c_d]`: the first `Bp` bits select the pilot,
/// the rest go through the polar code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    bits: Bits,
    pilot_bits: usize,
}

impl Ciphertext {
    pub fn new(bits: Bits, pilot_bits: usize) -> Self {
        assert!(pilot_bits <= bits.len());
        Self { bits, pilot_bits }
    }

    /// Reassembles `[c_p, c_d]`.
    pub fn from_parts(pilot: &[u8], polar: &[u8]) -> Self {
        let mut bits = pilot.to_vec();
        bits.extend_from_slice(polar);
        Self {
            bits,
            pilot_bits: pilot.len(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn pilot_part(&self) -> &[u8] {
        &self.bits[..self.pilot_bits]
    }

    pub fn polar_part(&self) -> &[u8] {
        &self.bits[self.pilot_bits..]
    }
}

/// `k = s T mod 2` for `T` given as `S` rows of length `B`.
pub fn expand_key(key: &[u8], keystream: &[Vec<u8>]) -> Result<Bits> {
    check_len("expand_key: key vs T rows", keystream.len(), key.len())?;
    let b = keystream.first().map_or(0, Vec::len);
    let mut k = vec![0u8; b];
    for (&bit, row) in key.iter().zip(keystream) {
        check_len("expand_key: T row length", b, row.len())?;
        if bit & 1 == 1 {
            for (x, y) in k.iter_mut().zip(row) {
                *x ^= y;
            }
        }
    }
    Ok(k)
}

/// `c = w XOR k`.
pub fn encrypt(message: &[u8], keystream: &[u8]) -> Result<Bits> {
    check_len("encrypt: keystream length", message.len(), keystream.len())?;
    Ok(message.iter().zip(keystream).map(|(w, k)| w ^ k).collect())
}

/// Inverse of [`encrypt`]; XOR is its own inverse.
pub fn decrypt(cipher: &[u8], keystream: &[u8]) -> Result<Bits> {
    encrypt(cipher, keystream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_bits, StreamKey};
    use proptest::prelude::*;

    fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
        a.iter().zip(b).map(|(x, y)| x ^ y).collect()
    }

    #[test]
    fn zero_key_gives_zero_keystream() {
        let mut rng = StreamKey::public(1, "t").rng();
        let t: Vec<Vec<u8>> = (0..40).map(|_| random_bits(&mut rng, 100)).collect();
        assert_eq!(expand_key(&[0; 40], &t).unwrap(), vec![0; 100]);
    }

    #[test]
    fn identity_block_copies_key() {
        let t: Vec<Vec<u8>> = (0..4)
            .map(|i| (0..10).map(|j| (i == j) as u8).collect())
            .collect();
        let s = [1u8, 0, 1, 1];
        let k = expand_key(&s, &t).unwrap();
        assert_eq!(&k[..4], &s);
        assert_eq!(&k[4..], &[0; 6]);
    }

    #[test]
    fn encrypt_edge_cases() {
        let w = vec![1u8, 0, 1, 1, 0];
        assert_eq!(encrypt(&w, &[0; 5]).unwrap(), w);
        assert_eq!(encrypt(&w, &w).unwrap(), vec![0; 5]);
        assert!(encrypt(&w, &[0; 4]).is_err());
    }

    #[test]
    fn ciphertext_split() {
        let c = Ciphertext::new(vec![1, 0, 1, 1, 0, 0], 2);
        assert_eq!(c.pilot_part(), &[1, 0]);
        assert_eq!(c.polar_part(), &[1, 1, 0, 0]);
        assert_eq!(Ciphertext::from_parts(c.pilot_part(), c.polar_part()), c);
    }

    proptest! {
        #[test]
        fn encryption_is_an_involution(
            pair in prop::collection::vec((0u8..2, 0u8..2), 1..200)
        ) {
            let (w, k): (Vec<u8>, Vec<u8>) = pair.into_iter().unzip();
            let c = encrypt(&w, &k).unwrap();
            prop_assert_eq!(decrypt(&c, &k).unwrap(), w);
        }

        #[test]
        fn expansion_is_linear(
            seed in any::<u64>(),
            a in prop::collection::vec(0u8..2, 12),
            b in prop::collection::vec(0u8..2, 12),
        ) {
            let mut rng = StreamKey::public(seed, "t").rng();
            let t: Vec<Vec<u8>> = (0..12).map(|_| random_bits(&mut rng, 30)).collect();
            let lhs = expand_key(&xor(&a, &b), &t).unwrap();
            let rhs = xor(&expand_key(&a, &t).unwrap(), &expand_key(&b, &t).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
