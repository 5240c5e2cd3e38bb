//! Link-level Monte Carlo simulator for secure unsourced random access.
//!
//! Active users derive a secret key from a private downlink feedback
//! observation, encrypt their message with it, and transmit a
//! pilot / polar / key-parity frame. The base station runs an iterative
//! OMP + MMSE + SIC receiver, reconciles each user's key from the parity
//! symbols, and decrypts. Eavesdropper leakage is bounded analytically.
//!
//! The numeric kernels that stand on their own ([`leakage`], [`qfunc`],
//! [`key_extraction`], [`coding::bpsk`]) are generic over [`Real`]; the
//! simulation pipeline is fixed to `f64` through the aliases below.

pub mod channel;
pub mod coding;
pub mod config;
pub mod crypto;
pub mod error;
pub mod harness;
pub mod key_extraction;
pub mod leakage;
pub mod params;
pub mod qfunc;
pub mod receiver;
pub mod rng;
pub mod scalar;
pub mod selftest;
pub mod transmitter;

pub use nalgebra::Complex;

pub use config::SystemConfig;
pub use error::{Error, Result};
pub use params::PublicParams;
pub use scalar::Real;

/// Complex baseband sample.
pub type C64 = Complex<f64>;
/// Complex matrix used throughout the simulator.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Complex row/column vector used throughout the simulator.
pub type CVector = nalgebra::DVector<C64>;
/// Real vector (LLRs, projected features).
pub type RVector = nalgebra::DVector<f64>;
/// Bit vector with one `0`/`1` byte per bit.
pub type Bits = Vec<u8>;

/// Single-precision complex sample, for callers of the generic kernels.
pub type C32 = Complex<f32>;
