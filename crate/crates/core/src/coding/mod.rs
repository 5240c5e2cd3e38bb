//! Channel-coding primitives: BPSK, CRC, systematic LDPC, CRC-aided polar.
//!
//! LLR sign convention everywhere: `log P(bit = 0) / P(bit = 1)`, so a
//! positive value favours bit 0, which BPSK maps to `+sqrt(P)`.

pub mod bpsk;
pub mod crc;
pub mod ldpc;
pub mod polar;

pub use bpsk::{bpsk_map, bpsk_power_check};
pub use crc::Crc;
pub use ldpc::{LdpcCode, LdpcDecodeOutput};
pub use polar::{PolarCode, PolarDecodeOutput};

/// Magnitude bound applied to every LLR before decoding.
pub const LLR_CLAMP: f64 = 40.0;

/// Per-symbol LLRs, finite and clamped to `[-LLR_CLAMP, LLR_CLAMP]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// Clamps each value; NaN carries no information and becomes 0.
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        Self(
            values
                .into_iter()
                .map(|v| if v.is_nan() { 0.0 } else { v.clamp(-LLR_CLAMP, LLR_CLAMP) })
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `[self, tail]`.
    pub fn concat(&self, tail: &LlrVector) -> LlrVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&tail.0);
        Self(v)
    }

    pub fn hard_decisions(&self) -> Vec<u8> {
        self.0.iter().map(|&l| (l < 0.0) as u8).collect()
    }
}
