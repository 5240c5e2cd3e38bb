//! The outer detect / decode / re-estimate / cancel loop on `[Y_p, Y_d]`.

use crate::coding::bpsk_map;
use crate::config::SystemConfig;
use crate::crypto::Ciphertext;
use crate::params::PublicParams;
use crate::transmitter::{bits_to_index, index_to_bits};
use crate::{CMatrix, CVector, C64};

use super::mmse::mmse_llr;
use super::omp::omp_detect;

/// A ciphertext that passed the polar CRC.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedCipher {
    pub pilot_index: usize,
    pub cipher: Ciphertext,
    /// Outer iteration (1-based) that first decoded it.
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOutput {
    pub decoded: Vec<DecodedCipher>,
    /// `M x |decoded|` least-squares channel estimates, column per entry.
    pub h_hat: CMatrix,
    /// `Y_pp - H_hat X'` after the last re-estimation.
    pub residual: CMatrix,
    pub iterations: usize,
}

/// Regenerated `[pilot row, sqrt(Pc) BPSK(polar codeword)]` for a ciphertext.
pub fn regenerate_signal(cipher: &Ciphertext, params: &PublicParams, polar_power: f64) -> CVector {
    let pilot = params.pilots.row(bits_to_index(cipher.pilot_part()));
    let polar = bpsk_map(&params.polar.encode(cipher.polar_part()), polar_power);
    let np = pilot.len();
    CVector::from_fn(np + polar.len(), |t, _| if t < np { pilot[t] } else { polar[t - np] })
}

/// `H = Y X^H (X X^H)^-1`, or `None` if the Gram matrix is (numerically)
/// singular.
pub fn ls_channel_estimate(y: &CMatrix, x: &CMatrix) -> Option<CMatrix> {
    let gram = x * x.adjoint();
    let scale = (0..gram.nrows()).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
    let chol = gram.cholesky()?;
    let l = chol.l_dirty();
    let tol = 1e-12 * scale;
    if (0..l.nrows()).any(|i| {
        let pivot = l[(i, i)].re.powi(2);
        pivot.is_nan() || pivot <= tol
    }) {
        return None;
    }
    // H^H = (X X^H)^-1 X Y^H
    let h_adj = chol.solve(&(x * y.adjoint()));
    Some(h_adj.adjoint())
}

/// `Y - H X`.
pub fn sic_subtract(y: &CMatrix, h: &CMatrix, x: &CMatrix) -> CMatrix {
    y - h * x
}

pub fn iterative_decode(y_pp: &CMatrix, params: &PublicParams, cfg: &SystemConfig) -> IterativeOutput {
    let m = y_pp.nrows();
    let np = cfg.pilot_len;
    let nc = cfg.polar_len;
    assert_eq!(y_pp.ncols(), np + nc, "pilot+polar length");

    let mut decoded: Vec<DecodedCipher> = Vec::new();
    let mut signals: Vec<CVector> = Vec::new();
    let mut h_hat = CMatrix::zeros(m, 0);
    let mut residual = y_pp.clone();
    let mut iterations = 0;

    while iterations < cfg.max_outer_iters {
        iterations += 1;
        let y_p = residual.columns(0, np).into_owned();
        let detections = omp_detect(&y_p, &params.pilots, cfg.omp_batch(), cfg.omp_residual_ratio);
        if detections.is_empty() {
            break;
        }
        let h_d = CMatrix::from_columns(&detections.iter().map(|d| d.h_hat.clone()).collect::<Vec<_>>());
        let y_d = residual.columns(np, nc).into_owned();
        let llrs = mmse_llr(&y_d, &h_d, cfg.polar_power, cfg.sigma_c2, cfg.llr_scaling);

        let before = decoded.len();
        for (det, llr) in detections.iter().zip(&llrs) {
            let out = params.polar.decode(llr, cfg.list_size);
            if !out.crc_ok {
                continue;
            }
            let cipher = Ciphertext::from_parts(&index_to_bits(det.pilot_index, cfg.pilot_bits), &out.payload);
            if decoded.iter().any(|d| d.cipher == cipher) {
                continue;
            }
            signals.push(regenerate_signal(&cipher, params, cfg.polar_power));
            decoded.push(DecodedCipher {
                pilot_index: det.pilot_index,
                cipher,
                iteration: iterations,
            });
        }
        if decoded.len() == before {
            break;
        }

        // re-estimate every decoded channel from the original observation
        loop {
            let x = stack_rows(&signals, np + nc);
            match ls_channel_estimate(y_pp, &x) {
                Some(h) => {
                    residual = sic_subtract(y_pp, &h, &x);
                    h_hat = h;
                    break;
                }
                None => {
                    signals.pop();
                    decoded.pop();
                }
            }
        }
    }

    IterativeOutput {
        decoded,
        h_hat,
        residual,
        iterations,
    }
}

fn stack_rows(signals: &[CVector], len: usize) -> CMatrix {
    let mut x = CMatrix::from_element(signals.len(), len, C64::new(0.0, 0.0));
    for (i, s) in signals.iter().enumerate() {
        x.set_row(i, &s.transpose());
    }
    x
}
