//! Base-station receiver: iterative pilot/polar decoding followed by key
//! reconciliation and decryption.

mod iterative;
mod key;
mod mmse;
mod omp;

pub use iterative::{iterative_decode, ls_channel_estimate, regenerate_signal, sic_subtract, DecodedCipher, IterativeOutput};
pub use key::{
    decode_keys_and_decrypt, estimate_private_signal, llr_parity, llr_systematic, remove_artificial_noise, LlrAux,
};
pub use mmse::{mmse_estimate, mmse_llr, MmseEstimate};
pub use omp::{omp_detect, Detection};

use crate::channel::ReceivedFrame;
use crate::config::SystemConfig;
use crate::crypto::Ciphertext;
use crate::error::Result;
use crate::params::PublicParams;
use crate::{Bits, CVector};

/// A user recovered by the base station.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedUser {
    pub pilot_index: usize,
    pub h_hat: CVector,
    /// Ciphertext that passed the polar CRC.
    pub c_hat: Ciphertext,
    pub s_hat: Bits,
    /// Whether the LDPC decoder satisfied every parity check.
    pub key_converged: bool,
    pub w_hat: Bits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverOutput {
    pub users: Vec<DetectedUser>,
    pub iterations: usize,
}

/// Full base-station chain for one received frame.
pub fn receive(frame: &ReceivedFrame, params: &PublicParams, cfg: &SystemConfig, aux: &LlrAux) -> Result<ReceiverOutput> {
    let decoded = iterative_decode(&frame.pilot_polar(), params, cfg);
    let users = decode_keys_and_decrypt(&decoded, &frame.key, params, cfg, aux)?;
    Ok(ReceiverOutput {
        users,
        iterations: decoded.iterations,
    })
}
