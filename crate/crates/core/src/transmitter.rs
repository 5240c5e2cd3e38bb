//! Per-user uplink frame `[x_p, x_d, x_k]`.

use crate::channel::UserChannels;
use crate::coding::{bpsk_map, PolarCode};
use crate::config::SystemConfig;
use crate::crypto::{encrypt, expand_key, Ciphertext};
use crate::error::{check_len, Result};
use crate::key_extraction::{build_key_segment, KeySegment, PrivateObservation};
use crate::params::PublicParams;
use crate::{Bits, CMatrix, CVector};

/// Everything one user produced in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRealization {
    pub message: Bits,
    pub channels: UserChannels,
    /// Raw feedback observation `y`.
    pub feedback: CVector,
    pub private: PrivateObservation<f64>,
    pub key_segment: KeySegment<f64>,
    pub cipher: Ciphertext,
    pub pilot_index: usize,
    /// `[x_p, x_d, x_k]`.
    pub signal: CVector,
}

impl UserRealization {
    pub fn key(&self) -> &[u8] {
        &self.private.key
    }
}

/// Big-endian: the first bit is the most significant.
pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
}

pub fn index_to_bits(index: usize, width: usize) -> Bits {
    (0..width).rev().map(|k| ((index >> k) & 1) as u8).collect()
}

/// Row `bits_to_index(c_p)` of the pilot codebook.
pub fn build_pilot_segment(pilot_bits: &[u8], pilots: &CMatrix) -> Result<CVector> {
    check_len("build_pilot_segment: codebook rows", 1usize << pilot_bits.len(), pilots.nrows())?;
    let row = pilots.row(bits_to_index(pilot_bits));
    Ok(row.transpose())
}

/// Polar-encode (with CRC) then BPSK at power `Pc`.
pub fn build_polar_segment(polar_bits: &[u8], polar: &PolarCode, polar_power: f64) -> Result<CVector> {
    check_len("build_polar_segment: payload", polar.payload_len(), polar_bits.len())?;
    Ok(bpsk_map(&polar.encode(polar_bits), polar_power))
}

/// Runs the transmitter chain: key extraction, key segment, keystream and
/// encryption, ciphertext split, pilot and polar segments, concatenation.
pub fn transmit(
    message: &[u8],
    channels: UserChannels,
    feedback: CVector,
    params: &PublicParams,
    cfg: &SystemConfig,
) -> Result<UserRealization> {
    check_len("transmit: message bits", cfg.message_bits, message.len())?;
    let private = PrivateObservation::from_feedback(&feedback, &params.key_projection)?;
    let key_segment = build_key_segment(
        &private.key,
        &private.y_bar,
        &params.noise_projection,
        cfg.key_power,
        cfg.noise_power,
        &params.ldpc,
    )?;

    let keystream = expand_key(&private.key, &params.keystream)?;
    let cipher = Ciphertext::new(encrypt(message, &keystream)?, cfg.pilot_bits);

    let x_p = build_pilot_segment(cipher.pilot_part(), &params.pilots)?;
    let x_d = build_polar_segment(cipher.polar_part(), &params.polar, cfg.polar_power)?;
    let x_k = &key_segment.x_k;

    let mut signal = CVector::zeros(x_p.len() + x_d.len() + x_k.len());
    signal.rows_mut(0, x_p.len()).copy_from(&x_p);
    signal.rows_mut(x_p.len(), x_d.len()).copy_from(&x_d);
    signal.rows_mut(x_p.len() + x_d.len(), x_k.len()).copy_from(x_k);

    Ok(UserRealization {
        message: message.to_vec(),
        channels,
        feedback,
        private,
        pilot_index: bits_to_index(cipher.pilot_part()),
        key_segment,
        cipher,
        signal,
    })
}
