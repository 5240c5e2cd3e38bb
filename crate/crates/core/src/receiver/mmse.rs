//! Linear MMSE soft estimates and BPSK LLRs for a known set of channels.

use crate::coding::LlrVector;
use crate::config::LlrScaling;
use crate::{CMatrix, C64};

/// MMSE estimates of unit-power symbols for every column of `h_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseEstimate {
    /// `K x n` soft symbols `x_hat`.
    pub x_hat: CMatrix,
    /// Diagonal of the error covariance, one entry per user.
    pub delta: Vec<f64>,
}

/// `x_hat = sqrt(P) H^H (P H H^H + s2 I)^-1 Y`, evaluated in the `K x K`
/// push-through form `sqrt(P) (P H^H H + s2 I)^-1 H^H Y`. The error
/// covariance is `s2 (P H^H H + s2 I)^-1`.
pub fn mmse_estimate(y: &CMatrix, h_hat: &CMatrix, power: f64, sigma2: f64) -> MmseEstimate {
    let k = h_hat.ncols();
    assert_eq!(y.nrows(), h_hat.nrows(), "antenna count");
    assert!(sigma2 > 0.0, "noise variance must be positive");
    let mut a = h_hat.adjoint() * h_hat * C64::new(power, 0.0);
    for i in 0..k {
        a[(i, i)] += C64::new(sigma2, 0.0);
    }
    let chol = a.cholesky().expect("regularized Gram matrix is positive definite");
    let x_hat = chol.solve(&(h_hat.adjoint() * y)) * C64::new(power.sqrt(), 0.0);
    let inv = chol.inverse();
    let delta: Vec<f64> = (0..k).map(|i| sigma2 * inv[(i, i)].re).collect();
    assert!(delta.iter().all(|&d| d > 0.0), "error variance must be positive");
    MmseEstimate { x_hat, delta }
}

/// Per-user BPSK LLRs (positive favours bit 0) from the MMSE output.
pub fn mmse_llr(y: &CMatrix, h_hat: &CMatrix, power: f64, sigma2: f64, scaling: LlrScaling) -> Vec<LlrVector> {
    let est = mmse_estimate(y, h_hat, power, sigma2);
    let sqrt_p = power.sqrt();
    est.delta
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let row = est.x_hat.row(i);
            LlrVector::new(row.iter().map(|z| match scaling {
                LlrScaling::Calibrated => 4.0 * z.re / d,
                LlrScaling::AsPrinted => 2.0 * sqrt_p * z.re / d,
            }))
        })
        .collect()
}
