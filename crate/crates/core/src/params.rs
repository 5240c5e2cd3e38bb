//! Public artifacts shared by every user, the BS and the eavesdropper.

use sha2::{Digest, Sha256};

use crate::coding::{Crc, LdpcCode, PolarCode};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::rng::{complex_normal_matrix, random_bits, StreamKey};
use crate::CMatrix;

/// LDPC column weight for the key-reconciliation code.
pub const LDPC_COLUMN_WEIGHT: usize = 3;

#[derive(Debug, Clone)]
pub struct PublicParams {
    /// Downlink feedback signal, `M x L`, `||V||_F^2 = Pf M L`.
    pub downlink: CMatrix,
    /// Pilot codebook, `2^Bp x np`, each row of energy `np Pp`.
    pub pilots: CMatrix,
    /// Key projection with orthonormal columns, `L x S/2`.
    pub key_projection: CMatrix,
    /// Artificial-noise projection with unit-norm columns, `L x (ns - S)`.
    pub noise_projection: CMatrix,
    /// Keystream expansion matrix `T`, `S x B`, rows of `0`/`1`.
    pub keystream: Vec<Vec<u8>>,
    pub ldpc: LdpcCode,
    pub polar: PolarCode,
    /// Eigenvalues of `C2^H C2`, ascending.
    pub noise_gram_eigenvalues: Vec<f64>,
}

impl PublicParams {
    pub fn crc_poly(&self) -> u32 {
        self.polar.crc().poly()
    }

    pub fn ldpc_parity_check(&self) -> Vec<Vec<u8>> {
        self.ldpc.parity_check_matrix()
    }

    pub fn ldpc_generator(&self) -> Vec<Vec<u8>> {
        self.ldpc.generator_matrix()
    }

    pub fn polar_frozen(&self) -> Vec<usize> {
        self.polar.frozen_positions()
    }

    /// SHA-256 over a canonical little-endian serialization of every field.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for m in [
            &self.downlink,
            &self.pilots,
            &self.key_projection,
            &self.noise_projection,
        ] {
            h.update((m.nrows() as u64).to_le_bytes());
            h.update((m.ncols() as u64).to_le_bytes());
            for z in m.iter() {
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
        }
        for rows in [&self.keystream, &self.ldpc_parity_check(), &self.ldpc_generator()] {
            h.update((rows.len() as u64).to_le_bytes());
            for r in rows.iter() {
                h.update(r);
            }
        }
        for p in self.polar.info_positions() {
            h.update((*p as u64).to_le_bytes());
        }
        h.update(self.crc_poly().to_le_bytes());
        for l in &self.noise_gram_eigenvalues {
            h.update(l.to_le_bytes());
        }
        h.finalize().into()
    }
}

/// Deterministically builds every public artifact from `cfg.seed`.
pub fn generate_public_params(cfg: &SystemConfig) -> Result<PublicParams> {
    cfg.validate()?;
    let seed = cfg.seed;
    let m = cfg.bs_antennas;
    let l = cfg.feedback_len;

    let mut downlink = complex_normal_matrix(&mut StreamKey::public(seed, "public/V").rng(), m, l, 1.0);
    let target = cfg.feedback_power * (m * l) as f64;
    let scale = if target == 0.0 {
        0.0
    } else {
        (target / downlink.norm_squared()).sqrt()
    };
    downlink *= crate::C64::new(scale, 0.0);

    let mut pilots = complex_normal_matrix(
        &mut StreamKey::public(seed, "public/P").rng(),
        cfg.codebook_size(),
        cfg.pilot_len,
        1.0,
    );
    let row_energy = cfg.pilot_len as f64 * cfg.pilot_power;
    for mut row in pilots.row_iter_mut() {
        let e = row.norm_squared();
        let s = if row_energy == 0.0 { 0.0 } else { (row_energy / e).sqrt() };
        row *= crate::C64::new(s, 0.0);
    }

    let raw_c1 = complex_normal_matrix(
        &mut StreamKey::public(seed, "public/C1").rng(),
        l,
        cfg.key_bits / 2,
        1.0,
    );
    let key_projection = raw_c1.qr().q();

    let mut noise_projection = complex_normal_matrix(
        &mut StreamKey::public(seed, "public/C2").rng(),
        l,
        cfg.key_parity_len(),
        1.0,
    );
    for mut col in noise_projection.column_iter_mut() {
        let n = col.norm();
        col /= crate::C64::new(n, 0.0);
    }
    let noise_gram_eigenvalues = crate::leakage::noise_gram_eigenvalues(&noise_projection);

    let mut t_rng = StreamKey::public(seed, "public/T").rng();
    let keystream: Vec<Vec<u8>> = (0..cfg.key_bits)
        .map(|_| random_bits(&mut t_rng, cfg.message_bits))
        .collect();

    let ldpc = LdpcCode::peg(
        cfg.key_segment_len,
        cfg.key_bits,
        LDPC_COLUMN_WEIGHT,
        &mut StreamKey::public(seed, "public/ldpc").rng(),
    );

    let crc = Crc::new(cfg.crc_polynomial()?, cfg.crc_bits);
    let polar = PolarCode::design(
        cfg.polar_len,
        cfg.polar_payload_bits(),
        crc,
        cfg.polar_power / cfg.sigma_c2,
    );

    Ok(PublicParams {
        downlink,
        pilots,
        key_projection,
        noise_projection,
        keystream,
        ldpc,
        polar,
        noise_gram_eigenvalues,
    })
}
