use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sura::harness::{emit_csv, mean_stderr, run_sweep, split_budget, write_csv, Simulation, SweepResult};
use sura::leakage::{equivocation_lower, expected_leakage};
use sura::params::generate_public_params;
use sura::selftest::run_selftest;
use sura::{config::load_config, Error, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "sura", version, about = "Secure unsourced random access link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials at a single configuration.
    Run(Common),
    /// Run a (Ka, Pa/Pk) grid and write the CSV table.
    Sweep(Common),
    /// Run the built-in invariant checks.
    Selftest(Common),
    /// Print the analytic leakage bound per ratio, without simulating.
    Leakage(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated active-user counts.
    #[arg(long, value_delimiter = ',')]
    ka: Vec<usize>,
    /// Comma-separated Pa/Pk ratios.
    #[arg(long, value_delimiter = ',')]
    ratio: Vec<f64>,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start from the reduced-dimension preset instead of the full defaults.
    #[arg(long)]
    desk_scale: bool,
}

impl Common {
    fn config(&self) -> Result<SystemConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None if self.desk_scale => SystemConfig::desk_scale(),
            None => SystemConfig::default(),
        };
        if self.config.is_some() && self.desk_scale {
            let desk = SystemConfig::desk_scale();
            cfg.bs_antennas = desk.bs_antennas;
            cfg.eve_antennas = desk.eve_antennas;
            cfg.trials = desk.trials;
        }
        cfg = cfg.with_env_overrides()?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        Ok(cfg)
    }

    fn ratios(&self, cfg: &SystemConfig) -> Vec<f64> {
        if self.ratio.is_empty() {
            vec![cfg.noise_power / cfg.key_power]
        } else {
            self.ratio.clone()
        }
    }

    fn write(&self, results: &[SweepResult]) -> Result<()> {
        match &self.out {
            Some(path) => emit_csv(results, path),
            None => write_csv(results, std::io::stdout().lock()).map_err(|source| Error::Csv {
                path: PathBuf::from("<stdout>"),
                source,
            }),
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run(c) => {
            let mut cfg = c.config()?;
            if let Some(&ka) = c.ka.first() {
                cfg.active_users = ka;
            }
            cfg.validate()?;
            let sim = Simulation::new(cfg.clone())?;
            let reports = sim.run_trials(cfg.trials)?;
            let pupes: Vec<f64> = reports.iter().map(|r| r.pupe).collect();
            let (mean, se) = mean_stderr(&pupes);
            let zeta = reports.iter().map(|r| r.mean_zeta_e_lower).sum::<f64>() / reports.len() as f64;
            let detected: usize = reports.iter().map(|r| r.n_detected).sum();
            eprintln!(
                "Ka={} Pa={} Pk={} trials={} pupe={mean:.6} (se {se:.6}) zeta_lower={zeta:.6} detected/trial={:.2}",
                cfg.active_users,
                cfg.noise_power,
                cfg.key_power,
                cfg.trials,
                detected as f64 / reports.len() as f64
            );
            if c.out.is_some() {
                let row = SweepResult {
                    ka: cfg.active_users,
                    ratio: cfg.noise_power / cfg.key_power,
                    pa: cfg.noise_power,
                    pk: cfg.key_power,
                    trials: cfg.trials,
                    pupe_mean: mean,
                    pupe_stderr: se,
                    zeta_lower_mean: zeta,
                    zeta_lower_empirical: zeta,
                    seed: cfg.seed,
                };
                c.write(&[row])?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            cfg.validate()?;
            let kas = if c.ka.is_empty() { vec![cfg.active_users] } else { c.ka.clone() };
            let results = run_sweep(&cfg, &kas, &c.ratios(&cfg), cfg.trials)?;
            c.write(&results)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest(c) => {
            let cfg = c.config()?;
            let checks = run_selftest(&cfg)?;
            let mut ok = true;
            for ch in &checks {
                println!("{} {}: {}", if ch.passed { "PASS" } else { "FAIL" }, ch.name, ch.detail);
                ok &= ch.passed;
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Leakage(c) => {
            let cfg = c.config()?;
            let params = generate_public_params(&cfg)?;
            let budget = cfg.key_segment_power();
            println!("ratio,pa,pk,expected_leak_bits,zeta_lower");
            for r in c.ratios(&cfg) {
                let (pa, pk) = split_budget(budget, r);
                let leak = expected_leakage(cfg.eve_antennas, &params.noise_gram_eigenvalues, pk, pa, cfg.sigma_e2);
                println!("{r},{pa},{pk},{leak},{}", equivocation_lower(leak, cfg.key_bits));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
