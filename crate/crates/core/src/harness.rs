//! Monte Carlo driver: end-to-end trials, grid sweeps and CSV output.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::channel::{feedback_observation, uplink, ReceivedFrame, SegmentLayout, UserChannels};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::leakage::{equivocation_lower, expected_leakage, leakage_report};
use crate::params::{generate_public_params, PublicParams};
use crate::receiver::{receive, LlrAux};
use crate::rng::{random_bits, StreamKey};
use crate::transmitter::{transmit, UserRealization};
use crate::{Bits, CMatrix};

pub const CSV_HEADER: [&str; 9] = [
    "ka",
    "ratio",
    "pa",
    "pk",
    "trials",
    "pupe_mean",
    "pupe_stderr",
    "zeta_lower_mean",
    "seed",
];

/// Outcome of one end-to-end trial.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub trial_id: u64,
    pub n_detected: usize,
    /// Users whose exact message was not among the decrypted outputs.
    pub n_err: usize,
    /// Users whose key was recovered exactly alongside their ciphertext.
    pub n_key_ok: usize,
    pub pupe: f64,
    /// Mean over this trial's users of `1 - leak / S`.
    pub mean_zeta_e_lower: f64,
    pub wallclock_ms: u64,
}

/// Timing is excluded from equality.
impl PartialEq for TrialReport {
    fn eq(&self, other: &Self) -> bool {
        self.trial_id == other.trial_id
            && self.n_detected == other.n_detected
            && self.n_err == other.n_err
            && self.n_key_ok == other.n_key_ok
            && self.pupe == other.pupe
            && self.mean_zeta_e_lower == other.mean_zeta_e_lower
    }
}

/// Config plus the public artifacts derived from it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub cfg: SystemConfig,
    pub params: PublicParams,
    pub aux: LlrAux,
}

impl Simulation {
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        let params = generate_public_params(&cfg)?;
        Ok(Self::with_params(cfg, params))
    }

    /// Reuses `params`; only valid when `cfg` matches the config they were
    /// generated from in every dimension.
    pub fn with_params(cfg: SystemConfig, params: PublicParams) -> Self {
        let aux = LlrAux::new(&params, &cfg);
        Self { cfg, params, aux }
    }

    pub fn layout(&self) -> SegmentLayout {
        SegmentLayout {
            pilot: self.cfg.pilot_len,
            polar: self.cfg.polar_len,
            key: self.cfg.key_parity_len(),
        }
    }

    /// User `index` of trial `trial_id`. Draws depend only on
    /// `(seed, trial_id, index)`, so the same user reappears across grid
    /// points and across `Ka`.
    pub fn user(&self, trial_id: u64, index: usize) -> Result<UserRealization> {
        let cfg = &self.cfg;
        let i = index as u64;
        let channels = UserChannels::sample(
            &mut StreamKey::trial(cfg.seed, trial_id, "user/channels", i).rng(),
            cfg.bs_antennas,
            cfg.eve_antennas,
        );
        let feedback = feedback_observation(
            &channels.h,
            &self.params.downlink,
            cfg.sigma_u2,
            &mut StreamKey::trial(cfg.seed, trial_id, "user/feedback", i).rng(),
        )?;
        let message = random_bits(
            &mut StreamKey::trial(cfg.seed, trial_id, "user/message", i).rng(),
            cfg.message_bits,
        );
        transmit(&message, channels, feedback, &self.params, cfg)
    }

    /// Transmitted users and the received frame at the base station.
    pub fn uplink_frame(&self, trial_id: u64) -> Result<(Vec<UserRealization>, ReceivedFrame)> {
        let cfg = &self.cfg;
        let users = (0..cfg.active_users)
            .map(|i| self.user(trial_id, i))
            .collect::<Result<Vec<_>>>()?;
        let x = CMatrix::from_rows(&users.iter().map(|u| u.signal.transpose()).collect::<Vec<_>>());
        let h = CMatrix::from_columns(&users.iter().map(|u| u.channels.h.clone()).collect::<Vec<_>>());
        let y = uplink(
            &x,
            &h,
            cfg.sigma_c2,
            &mut StreamKey::trial(cfg.seed, trial_id, "uplink/noise", 0).rng(),
        )?;
        Ok((users, ReceivedFrame::split(&y, self.layout())?))
    }

    pub fn run_trial(&self, trial_id: u64) -> Result<TrialReport> {
        self.run_trial_inner(trial_id).map_err(|e| Error::Trial {
            trial_id,
            source: Box::new(e),
        })
    }

    fn run_trial_inner(&self, trial_id: u64) -> Result<TrialReport> {
        let start = Instant::now();
        let cfg = &self.cfg;
        let (users, frame) = self.uplink_frame(trial_id)?;
        let out = receive(&frame, &self.params, cfg, &self.aux)?;

        let truth: Vec<Bits> = users.iter().map(|u| u.message.clone()).collect();
        let decoded: Vec<Bits> = out.users.iter().map(|u| u.w_hat.clone()).collect();
        let n_err = cfg.active_users - count_matches(&truth, &decoded);

        let n_key_ok = users
            .iter()
            .filter(|u| {
                out.users
                    .iter()
                    .any(|d| d.c_hat == u.cipher && d.s_hat.as_slice() == u.key())
            })
            .count();

        let eve: Vec<_> = users.iter().map(|u| u.channels.g.clone()).collect();
        let leak = leakage_report(
            &eve,
            &self.params.noise_gram_eigenvalues,
            cfg.key_bits,
            cfg.key_power,
            cfg.noise_power,
            cfg.sigma_e2,
        );
        let mean_zeta_e_lower = leak
            .per_user_leak
            .iter()
            .map(|&l| equivocation_lower(l, cfg.key_bits))
            .sum::<f64>()
            / users.len() as f64;

        Ok(TrialReport {
            trial_id,
            n_detected: out.users.len(),
            n_err,
            n_key_ok,
            pupe: n_err as f64 / cfg.active_users as f64,
            mean_zeta_e_lower,
            wallclock_ms: start.elapsed().as_millis() as u64,
        })
    }

    /// Trials `0..trials`, run in parallel and returned in `trial_id` order.
    pub fn run_trials(&self, trials: usize) -> Result<Vec<TrialReport>> {
        (0..trials as u64).into_par_iter().map(|t| self.run_trial(t)).collect()
    }
}

/// Size of the largest one-to-one matching between equal messages (both
/// sides treated as multisets).
pub fn count_matches(truth: &[Bits], decoded: &[Bits]) -> usize {
    let mut used = vec![false; decoded.len()];
    truth
        .iter()
        .filter(|w| {
            match decoded
                .iter()
                .enumerate()
                .position(|(j, d)| !used[j] && d == *w)
            {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        })
        .count()
}

/// Builds the public parameters for `cfg` and runs a single trial.
pub fn run_trial(cfg: &SystemConfig, trial_id: u64) -> Result<TrialReport> {
    Simulation::new(cfg.clone())?.run_trial(trial_id)
}

/// `(Pa, Pk)` with `Pa + Pk = budget` and `Pa / Pk = ratio`.
pub fn split_budget(budget: f64, ratio: f64) -> (f64, f64) {
    (budget * ratio / (1.0 + ratio), budget / (1.0 + ratio))
}

/// Aggregate of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub ka: usize,
    pub ratio: f64,
    pub pa: f64,
    pub pk: f64,
    pub trials: usize,
    pub pupe_mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub pupe_stderr: f64,
    /// `1 - E[leak] / S` with the expectation over `g ~ CN(0, I_E)`.
    pub zeta_lower_mean: f64,
    /// Per-trial average of the realized users' bound.
    pub zeta_lower_empirical: f64,
    pub seed: u64,
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every `(Ka, ratio)` pair, Ka-major. The key-segment budget
/// `Pa + Pk` of `base` is split per ratio; public parameters are generated
/// once and trial streams are shared by all grid points.
pub fn run_sweep(base: &SystemConfig, kas: &[usize], ratios: &[f64], trials: usize) -> Result<Vec<SweepResult>> {
    if trials == 0 {
        return Err(Error::config("trials", "must be a positive integer"));
    }
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::config("ratio", format!("must be finite and > 0, got {r}")));
    }
    let params = generate_public_params(base)?;
    let budget = base.key_segment_power();
    let mut results = Vec::with_capacity(kas.len() * ratios.len());
    for &ka in kas {
        for &ratio in ratios {
            let (pa, pk) = split_budget(budget, ratio);
            let cfg = SystemConfig {
                active_users: ka,
                noise_power: pa,
                key_power: pk,
                trials,
                ..base.clone()
            };
            cfg.validate()?;
            let sim = Simulation::with_params(cfg, params.clone());
            let reports = sim.run_trials(trials)?;
            let pupes: Vec<f64> = reports.iter().map(|r| r.pupe).collect();
            let (pupe_mean, pupe_stderr) = mean_stderr(&pupes);
            let zeta_lower_empirical = reports.iter().map(|r| r.mean_zeta_e_lower).sum::<f64>() / trials as f64;
            let leak = expected_leakage(base.eve_antennas, &params.noise_gram_eigenvalues, pk, pa, base.sigma_e2);
            results.push(SweepResult {
                ka,
                ratio,
                pa,
                pk,
                trials,
                pupe_mean,
                pupe_stderr,
                zeta_lower_mean: equivocation_lower(leak, base.key_bits),
                zeta_lower_empirical,
                seed: base.seed,
            });
        }
    }
    Ok(results)
}

/// One CSV row as read back from disk.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct CsvRow {
    pub ka: usize,
    pub ratio: f64,
    pub pa: f64,
    pub pk: f64,
    pub trials: usize,
    pub pupe_mean: f64,
    pub pupe_stderr: f64,
    pub zeta_lower_mean: f64,
    pub seed: u64,
}

impl From<&SweepResult> for CsvRow {
    fn from(r: &SweepResult) -> Self {
        Self {
            ka: r.ka,
            ratio: r.ratio,
            pa: r.pa,
            pk: r.pk,
            trials: r.trials,
            pupe_mean: r.pupe_mean,
            pupe_stderr: r.pupe_stderr,
            zeta_lower_mean: r.zeta_lower_mean,
            seed: r.seed,
        }
    }
}

/// Writes the sweep table. Floats use shortest round-trip formatting.
pub fn write_csv<W: Write>(results: &[SweepResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in results {
        w.write_record([
            r.ka.to_string(),
            r.ratio.to_string(),
            r.pa.to_string(),
            r.pk.to_string(),
            r.trials.to_string(),
            r.pupe_mean.to_string(),
            r.pupe_stderr.to_string(),
            r.zeta_lower_mean.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(results: &[SweepResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(results, file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<csv::Result<Vec<CsvRow>>>().map_err(csv_err)
}
