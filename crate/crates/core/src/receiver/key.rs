//! Key reconciliation at the base station: private-signal estimate from the
//! channel estimate, artificial-noise cancellation, systematic and parity
//! LLRs, LDPC decoding and decryption.

use nalgebra::DMatrix;

use crate::coding::LlrVector;
use crate::config::SystemConfig;
use crate::crypto::{decrypt, expand_key};
use crate::error::{check_len, Result};
use crate::key_extraction::{extract_key, sample_variance, standardize};
use crate::params::PublicParams;
use crate::qfunc::tail_log_odds;
use crate::{CMatrix, CVector, RVector, C64};

use super::iterative::IterativeOutput;
use super::mmse::mmse_llr;
use super::DetectedUser;

/// Statistics shared by every systematic-LLR evaluation in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrAux {
    /// Covariance of the private-signal estimation error,
    /// `V^H V s_c2 / (np Pp + nc Pc) + s_u2 I`.
    pub sigma_y: CMatrix,
    /// Centering projector `I - 11^T / L`.
    pub centering: DMatrix<f64>,
    /// Per-feature error variance `0.5 c1j^H O Sigma_y O c1j`, length `S/2`.
    pub sigma_uj2: Vec<f64>,
}

impl LlrAux {
    pub fn new(params: &PublicParams, cfg: &SystemConfig) -> Self {
        let l = cfg.feedback_len;
        let v = &params.downlink;
        let est_var = cfg.sigma_c2 / (cfg.pilot_len as f64 * cfg.pilot_power + cfg.polar_len as f64 * cfg.polar_power);
        let mut sigma_y = v.adjoint() * v * C64::new(est_var, 0.0);
        for i in 0..l {
            sigma_y[(i, i)] += C64::new(cfg.sigma_u2, 0.0);
        }
        let centering = DMatrix::from_fn(l, l, |r, c| if r == c { 1.0 } else { 0.0 } - 1.0 / l as f64);
        let o = centering.map(|x| C64::new(x, 0.0));
        let projected = &o * &sigma_y * &o;
        let sigma_uj2 = params
            .key_projection
            .column_iter()
            .map(|c| 0.5 * (c.adjoint() * &projected * c)[(0, 0)].re)
            .collect();
        Self {
            sigma_y,
            centering,
            sigma_uj2,
        }
    }
}

/// `y_hat = h_hat^T V` and its standardized form.
pub fn estimate_private_signal(h_hat: &CVector, downlink: &CMatrix) -> Result<(CVector, CVector)> {
    check_len("estimate_private_signal: h_hat vs V rows", downlink.nrows(), h_hat.len())?;
    let y_hat = downlink.transpose() * h_hat;
    let y_bar_hat = standardize(&y_hat)?;
    Ok((y_hat, y_bar_hat))
}

/// `Y_k - sum_i h_i (sqrt(Pa) y_bar_i C2)`.
pub fn remove_artificial_noise(
    y_k: &CMatrix,
    h_hat: &CMatrix,
    y_bar_hats: &[CVector],
    noise_projection: &CMatrix,
    noise_power: f64,
) -> Result<CMatrix> {
    check_len("remove_artificial_noise: users", h_hat.ncols(), y_bar_hats.len())?;
    check_len("remove_artificial_noise: key length", noise_projection.ncols(), y_k.ncols())?;
    let scale = C64::new(noise_power.sqrt(), 0.0);
    let mut out = y_k.clone();
    for (h, y_bar) in h_hat.column_iter().zip(y_bar_hats) {
        check_len("remove_artificial_noise: y_bar vs C2 rows", noise_projection.nrows(), y_bar.len())?;
        let v_prime = noise_projection.transpose() * y_bar * scale;
        out -= h * v_prime.transpose();
    }
    Ok(out)
}

/// `nu_j = log Q(a_j) - log Q(-a_j)` with `a_j = sqrt(Var(y_hat) / s_uj2) u_hat_j`;
/// feature `j` and `S/2 + j` share `s_uj2`.
pub fn llr_systematic(u_hat: &RVector, aux: &LlrAux, var_y_hat: f64) -> Result<LlrVector> {
    let half = aux.sigma_uj2.len();
    check_len("llr_systematic: features", 2 * half, u_hat.len())?;
    Ok(LlrVector::new(u_hat.iter().enumerate().map(|(j, &u)| {
        let s2 = aux.sigma_uj2[j % half];
        let a = if s2 > 0.0 {
            (var_y_hat / s2).sqrt() * u
        } else if u == 0.0 {
            0.0
        } else {
            u.signum() * f64::INFINITY
        };
        tail_log_odds(a)
    })))
}

/// Parity-symbol LLRs: MMSE on the cleaned key segment at power `Pk`.
pub fn llr_parity(y_k_clean: &CMatrix, h_hat: &CMatrix, cfg: &SystemConfig) -> Vec<LlrVector> {
    mmse_llr(y_k_clean, h_hat, cfg.key_power, cfg.sigma_c2, cfg.llr_scaling)
}

/// Recovers each decoded user's key from `[f_s, f_p]` and decrypts `c_hat`.
pub fn decode_keys_and_decrypt(
    decoded: &IterativeOutput,
    y_k: &CMatrix,
    params: &PublicParams,
    cfg: &SystemConfig,
    aux: &LlrAux,
) -> Result<Vec<DetectedUser>> {
    let k = decoded.decoded.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let l = cfg.feedback_len;
    let mut y_bar_hats = Vec::with_capacity(k);
    let mut systematic = Vec::with_capacity(k);
    for h in decoded.h_hat.column_iter() {
        let h = h.into_owned();
        match estimate_private_signal(&h, &params.downlink) {
            Ok((y_hat, y_bar_hat)) => {
                let (u_hat, _) = extract_key(&y_bar_hat, &params.key_projection)?;
                systematic.push(llr_systematic(&u_hat, aux, sample_variance(&y_hat))?);
                y_bar_hats.push(y_bar_hat);
            }
            // no usable estimate: nothing to cancel, no prior on the key
            Err(crate::Error::Degenerate { .. }) => {
                systematic.push(LlrVector::new(vec![0.0; cfg.key_bits]));
                y_bar_hats.push(CVector::zeros(l));
            }
            Err(e) => return Err(e),
        }
    }
    let clean = remove_artificial_noise(
        y_k,
        &decoded.h_hat,
        &y_bar_hats,
        &params.noise_projection,
        cfg.noise_power,
    )?;
    let parity = llr_parity(&clean, &decoded.h_hat, cfg);

    decoded
        .decoded
        .iter()
        .zip(systematic.iter().zip(&parity))
        .enumerate()
        .map(|(i, (dec, (f_s, f_p)))| {
            let out = params.ldpc.decode(&f_s.concat(f_p), cfg.bp_iters);
            let s_hat = out.systematic(cfg.key_bits).to_vec();
            let keystream = expand_key(&s_hat, &params.keystream)?;
            let w_hat = decrypt(dec.cipher.bits(), &keystream)?;
            Ok(DetectedUser {
                pilot_index: dec.pilot_index,
                h_hat: decoded.h_hat.column(i).into_owned(),
                c_hat: dec.cipher.clone(),
                s_hat,
                key_converged: out.converged,
                w_hat,
            })
        })
        .collect()
}
