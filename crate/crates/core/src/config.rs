//! Simulation configuration and its flat `key = value` file format.
//!
//! The file is TOML restricted to top-level scalars, keyed by the usual
//! system-model symbols (`M`, `Ka`, `S`, `Pk`, ...). Every key is optional;
//! missing keys take the reference defaults. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that overrides `seed` when set.
pub const SEED_ENV: &str = "SURA_SEED";

/// CRC-11 generator x^11 + x^9 + x^8 + x^7 + x^3 + x + 1.
pub const CRC11_POLY: u32 = 0xB8B;

/// How the MMSE-based LLRs (polar and key-parity symbols) are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LlrScaling {
    /// `4 Re{x} / delta`: the log-likelihood ratio of the Gaussian
    /// post-MMSE model for a unit-energy BPSK symbol.
    #[default]
    Calibrated,
    /// `2 Re{sqrt(P) x / delta}` exactly as the receiver equations print it.
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    #[serde(rename = "M")]
    pub bs_antennas: usize,
    #[serde(rename = "E")]
    pub eve_antennas: usize,
    #[serde(rename = "Ka")]
    pub active_users: usize,
    #[serde(rename = "L")]
    pub feedback_len: usize,
    #[serde(rename = "np")]
    pub pilot_len: usize,
    #[serde(rename = "nc")]
    pub polar_len: usize,
    #[serde(rename = "ns")]
    pub key_segment_len: usize,
    #[serde(rename = "B")]
    pub message_bits: usize,
    #[serde(rename = "Bp")]
    pub pilot_bits: usize,
    #[serde(rename = "Br")]
    pub crc_bits: usize,
    #[serde(rename = "S")]
    pub key_bits: usize,
    #[serde(rename = "Pp")]
    pub pilot_power: f64,
    #[serde(rename = "Pc")]
    pub polar_power: f64,
    #[serde(rename = "Pk")]
    pub key_power: f64,
    #[serde(rename = "Pa")]
    pub noise_power: f64,
    #[serde(rename = "Pf")]
    pub feedback_power: f64,
    pub sigma_c2: f64,
    pub sigma_e2: f64,
    pub sigma_u2: f64,
    pub list_size: usize,
    pub bp_iters: usize,
    pub max_outer_iters: usize,
    /// Atoms accepted per OMP pass; `None` means `2 * Ka`.
    pub omp_batch: Option<usize>,
    /// OMP stops once residual energy falls below this fraction of the input.
    pub omp_residual_ratio: f64,
    /// CRC generator including the leading `x^Br` term; `None` picks the
    /// built-in polynomial for `Br`.
    pub crc_poly: Option<u32>,
    pub llr_scaling: LlrScaling,
    pub seed: u64,
    pub trials: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bs_antennas: 50,
            eve_antennas: 50,
            active_users: 25,
            feedback_len: 20,
            pilot_len: 200,
            polar_len: 512,
            key_segment_len: 60,
            message_bits: 100,
            pilot_bits: 12,
            crc_bits: 11,
            key_bits: 40,
            pilot_power: 0.3,
            polar_power: 0.3,
            key_power: 0.15,
            noise_power: 0.15,
            feedback_power: 0.6,
            sigma_c2: 1.0,
            sigma_e2: 1.0,
            sigma_u2: 1.0,
            list_size: 8,
            bp_iters: 50,
            max_outer_iters: 16,
            omp_batch: None,
            omp_residual_ratio: 0.05,
            crc_poly: None,
            llr_scaling: LlrScaling::Calibrated,
            seed: 1,
            trials: 50,
        }
    }
}

impl SystemConfig {
    /// Reduced-dimension preset used for desk-scale sweeps.
    pub fn desk_scale() -> Self {
        Self {
            bs_antennas: 16,
            eve_antennas: 16,
            trials: 200,
            ..Self::default()
        }
    }

    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn key_parity_len(&self) -> usize {
        self.key_segment_len - self.key_bits
    }

    pub fn frame_len(&self) -> usize {
        self.pilot_len + self.polar_len + self.key_parity_len()
    }

    pub fn polar_payload_bits(&self) -> usize {
        self.message_bits - self.pilot_bits
    }

    pub fn polar_info_bits(&self) -> usize {
        self.polar_payload_bits() + self.crc_bits
    }

    pub fn codebook_size(&self) -> usize {
        1usize << self.pilot_bits
    }

    pub fn omp_batch(&self) -> usize {
        self.omp_batch.unwrap_or(2 * self.active_users)
    }

    /// Combined key-segment budget `Pk + Pa`.
    pub fn key_segment_power(&self) -> f64 {
        self.key_power + self.noise_power
    }

    pub fn crc_polynomial(&self) -> Result<u32> {
        if let Some(poly) = self.crc_poly {
            return Ok(poly);
        }
        match self.crc_bits {
            11 => Ok(CRC11_POLY),
            16 => Ok(0x1_1021),
            24 => Ok(0x186_4CFB),
            n => Err(Error::config(
                "crc_poly",
                format!("no built-in CRC polynomial for Br = {n}; set crc_poly"),
            )),
        }
    }

    /// Applies the `SURA_SEED` environment override, if present.
    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| Error::config("seed", format!("{SEED_ENV}={raw:?} is not a u64")))?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("M", self.bs_antennas),
            ("E", self.eve_antennas),
            ("Ka", self.active_users),
            ("L", self.feedback_len),
            ("np", self.pilot_len),
            ("nc", self.polar_len),
            ("ns", self.key_segment_len),
            ("B", self.message_bits),
            ("Bp", self.pilot_bits),
            ("Br", self.crc_bits),
            ("S", self.key_bits),
            ("list_size", self.list_size),
            ("bp_iters", self.bp_iters),
            ("max_outer_iters", self.max_outer_iters),
            ("trials", self.trials),
        ];
        for (field, value) in positive {
            if value == 0 {
                return Err(Error::config(field, "must be a positive integer"));
            }
        }
        if self.omp_batch == Some(0) {
            return Err(Error::config("omp_batch", "must be a positive integer"));
        }
        if !self.key_bits.is_multiple_of(2) {
            return Err(Error::config("S", format!("must be even, got {}", self.key_bits)));
        }
        if 2 * self.feedback_len < self.key_bits {
            return Err(Error::config(
                "L",
                format!("L >= S/2 required, got L = {} and S = {}", self.feedback_len, self.key_bits),
            ));
        }
        if self.key_bits >= self.key_segment_len {
            return Err(Error::config(
                "S",
                format!("S < ns required, got S = {} and ns = {}", self.key_bits, self.key_segment_len),
            ));
        }
        if self.pilot_bits >= self.message_bits {
            return Err(Error::config("Bp", "Bp < B required"));
        }
        if self.pilot_bits > 30 {
            return Err(Error::config("Bp", "Bp <= 30 required"));
        }
        if !self.polar_len.is_power_of_two() {
            return Err(Error::config("nc", "must be a power of two"));
        }
        if self.polar_info_bits() > self.polar_len {
            return Err(Error::config("nc", "B - Bp + Br <= nc required"));
        }
        let powers = [
            ("Pp", self.pilot_power),
            ("Pc", self.polar_power),
            ("Pk", self.key_power),
            ("Pa", self.noise_power),
            ("Pf", self.feedback_power),
        ];
        for (field, value) in powers {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(field, "must be finite and >= 0"));
            }
        }
        let variances = [
            ("sigma_c2", self.sigma_c2),
            ("sigma_e2", self.sigma_e2),
            ("sigma_u2", self.sigma_u2),
        ];
        for (field, value) in variances {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        if !(0.0..1.0).contains(&self.omp_residual_ratio) {
            return Err(Error::config("omp_residual_ratio", "must lie in [0, 1)"));
        }
        let poly = self.crc_polynomial()?;
        if poly >> self.crc_bits != 1 {
            return Err(Error::config(
                "crc_poly",
                format!("degree must equal Br = {} (leading term included)", self.crc_bits),
            ));
        }
        Ok(())
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = SystemConfig::parse(&text).map_err(|e| Error::ConfigParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
