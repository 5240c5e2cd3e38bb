//! Fast invariant checks runnable from the CLI.

use crate::coding::LlrVector;
use crate::config::SystemConfig;
use crate::crypto::{decrypt, encrypt};
use crate::key_extraction::standardize;
use crate::leakage::{leakage_eigen, leakage_from_eigenvalues, leakage_logdet};
use crate::params::generate_public_params;
use crate::rng::{complex_normal_matrix, complex_normal_vector, random_bits, StreamKey};
use crate::{CMatrix, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

/// Runs every check against the public parameters of `cfg`.
pub fn run_selftest(cfg: &SystemConfig) -> Result<Vec<Check>> {
    let params = generate_public_params(cfg)?;
    let mut rng = StreamKey::public(cfg.seed, "selftest").rng();
    let mut out = Vec::new();

    let m = cfg.bs_antennas;
    let l = cfg.feedback_len;
    let v_err = (params.downlink.norm_squared() / (cfg.feedback_power * (m * l) as f64) - 1.0).abs();
    let c1 = &params.key_projection;
    let c1_err = (c1.adjoint() * c1 - CMatrix::identity(c1.ncols(), c1.ncols())).norm();
    let c2_err = params
        .noise_projection
        .column_iter()
        .map(|c| (c.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(check(
        "public parameter norms",
        v_err < 1e-10 && c1_err < 1e-10 && c2_err < 1e-10,
        format!("V {v_err:.1e}, C1 {c1_err:.1e}, C2 {c2_err:.1e}"),
    ));

    let y = complex_normal_vector(&mut rng, l, 1.0);
    let a = standardize(&y)?;
    let scaled = standardize(&y.map(|z| z * C64::new(3.5, 0.0) + C64::new(-1.0, 2.0)))?;
    let twice = standardize(&a)?;
    let s_err = (&a - scaled).norm().max((&a - twice).norm());
    out.push(check("standardize invariance", s_err < 1e-10, format!("{s_err:.1e}")));

    let w = random_bits(&mut rng, cfg.message_bits);
    let k = random_bits(&mut rng, cfg.message_bits);
    out.push(check("encrypt involution", decrypt(&encrypt(&w, &k)?, &k)? == w, ""));

    let mut ldpc_fail = 0;
    let mut polar_fail = 0;
    let trials = 100;
    for _ in 0..trials {
        let key = random_bits(&mut rng, cfg.key_bits);
        let (sys, par) = params.ldpc.encode(&key);
        let llr = LlrVector::new(sys.iter().chain(&par).map(|&b| if b == 0 { 40.0 } else { -40.0 }));
        let dec = params.ldpc.decode(&llr, cfg.bp_iters);
        ldpc_fail += usize::from(dec.systematic(cfg.key_bits) != key.as_slice());

        let payload = random_bits(&mut rng, cfg.polar_payload_bits());
        let code = params.polar.encode(&payload);
        let llr = LlrVector::new(code.iter().map(|&b| if b == 0 { 40.0 } else { -40.0 }));
        let dec = params.polar.decode(&llr, cfg.list_size);
        polar_fail += usize::from(!dec.crc_ok || dec.payload != payload);
    }
    out.push(check("LDPC round trip", ldpc_fail == 0, format!("{ldpc_fail}/{trials} failures")));
    out.push(check("polar round trip", polar_fail == 0, format!("{polar_fail}/{trials} failures")));

    let point: f64 = leakage_from_eigenvalues(1.0, &[1.0], 0.15, 0.15, 1.0);
    out.push(check("leakage scalar point", (point - 0.17690).abs() < 1e-4, format!("{point:.6} bits")));

    let mut worst = 0.0f64;
    for e in [1, 2, 4] {
        for n in [1, 4, 16] {
            let mut c2 = complex_normal_matrix(&mut rng, l, n, 1.0);
            for mut col in c2.column_iter_mut() {
                let norm = col.norm();
                col /= C64::new(norm, 0.0);
            }
            let g = complex_normal_vector(&mut rng, e, 1.0);
            let a = leakage_eigen(&g, &c2, cfg.key_power, cfg.noise_power, cfg.sigma_e2);
            let b = leakage_logdet(&g, &c2, cfg.key_power, cfg.noise_power, cfg.sigma_e2)?;
            worst = worst.max((a - b).abs() / (1.0 + b));
        }
    }
    out.push(check("leakage eigen vs log-det", worst < 1e-9, format!("max rel {worst:.1e}")));
    Ok(out)
}
