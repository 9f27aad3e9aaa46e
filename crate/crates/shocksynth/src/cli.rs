//! Command-line front end. Exit status: 0 on success, 1 when a synthesis or
//! verification completes but misses its tolerance, 2 on bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use shocksynth_core::nzdf::{bode, log_grid, DEFAULT_M, DEFAULT_N, DEFAULT_Q};
use shocksynth_core::synthesis::{synthesize_with_basis, verification_grid, verify_on};
use shocksynth_core::{
    apply_filter, build_basis, discretize, make_layout, srs, synth_reference, NzdfParams, PsoConfig, Signal, SrsSpec,
};

use crate::io;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(
    name = "shocksynth",
    version,
    about = "Shock synthesis against an SRS specification with a bank of net zero displacement filters"
)]
pub struct Cli {
    /// Sample rate in Hz. Required by `bank`; defaults to 100000 for
    /// `demo-ref` and for the surrogate reference of `synth`. When given with
    /// an input file it must match the file's rate.
    #[arg(long, global = true)]
    pub fs: Option<f64>,

    /// Seed for the optimizer (`synth`) or the surrogate (`demo-ref`).
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Quality factor of the SRS oscillators.
    #[arg(long, global = true, default_value_t = 10.0)]
    pub q_srs: f64,

    /// Allowed SRS deviation in dB.
    #[arg(long, global = true, default_value_t = 3.0)]
    pub tolerance_db: f64,

    /// Bank and analysis grid density, points per octave.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    pub ppo: u32,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximax absolute-acceleration SRS of a signal on a fractional-octave grid.
    Srs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        fmin: f64,
        /// Defaults to the lesser of 10 kHz and fs/4.
        #[arg(long)]
        fmax: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Passes a signal through one NZDF and writes its Bode table alongside.
    Filter {
        #[arg(long)]
        input: PathBuf,
        /// Center frequency in Hz.
        #[arg(long)]
        fc: f64,
        #[arg(long, default_value_t = DEFAULT_Q)]
        q: f64,
        #[arg(long, default_value_t = DEFAULT_N)]
        order_n: u32,
        #[arg(long, default_value_t = DEFAULT_M)]
        order_m: u32,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the output path with a `.bode.csv` suffix.
        #[arg(long)]
        bode: Option<PathBuf>,
    },
    /// Bank layout with per-filter magnitude responses, and optionally the
    /// basis built from a reference.
    Bank {
        #[arg(long, default_value_t = 100.0)]
        fmin: f64,
        #[arg(long, default_value_t = 10_000.0)]
        fmax: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, requires = "basis_out")]
        reference: Option<PathBuf>,
        #[arg(long, requires = "reference")]
        basis_out: Option<PathBuf>,
    },
    /// Synthesizes a net-zero shock meeting an SRS specification.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Reference shock; a surrogate is generated when omitted.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        ref_seed: u64,
        #[arg(long, default_value_t = 0.05)]
        ref_duration: f64,
        #[arg(long, default_value_t = PsoConfig::default().swarm_size)]
        swarm: usize,
        #[arg(long, default_value_t = PsoConfig::default().max_iters)]
        iters: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        basis_out: Option<PathBuf>,
    },
    /// Checks a signal against an SRS specification and the net-zero condition.
    Verify {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Writes the deterministic surrogate reference shock.
    DemoRef {
        #[arg(long, default_value_t = 0.05)]
        duration: f64,
        #[arg(long, default_value_t = 10_000.0)]
        fmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        match s {
            Status::Pass => ExitCode::SUCCESS,
            Status::Fail => ExitCode::from(1),
        }
    }
}

const DEFAULT_FS: f64 = 100_000.0;
const BODE_POINTS: usize = 400;

pub fn run(cli: &Cli) -> Result<Status> {
    validate_common(cli)?;
    match &cli.command {
        Command::Srs { input, fmin, fmax, out } => {
            let sig = read_signal(cli, input)?;
            let fmax = fmax.unwrap_or((sig.sample_rate() / 4.0).min(10_000.0));
            let layout = make_layout(*fmin, fmax, cli.ppo)?;
            let curve = srs(&sig, &layout.centers, cli.q_srs)?;
            io::write_srs(&curve, out)?;
        }
        Command::Filter { input, fc, q, order_n, order_m, out, bode: bode_path } => {
            let params = NzdfParams::with_order(*fc, *q, *order_n, *order_m)?;
            let sig = read_signal(cli, input)?;
            let filt = discretize(&params, sig.sample_rate())?;
            let filtered = apply_filter(&filt, &sig)?;
            let top = (100.0 * fc).min(0.49 * sig.sample_rate());
            let table = bode(|f| filt.response(f), &log_grid(fc / 100.0, top, BODE_POINTS));
            let bode_path = bode_path.clone().unwrap_or_else(|| sidecar(out, "bode.csv"));
            io::write_signal(&filtered, out)?;
            io::write_bode(&table, &bode_path)?;
        }
        Command::Bank { fmin, fmax, out, reference, basis_out } => {
            let Some(fs) = cli.fs else { bail!("`bank` needs --fs") };
            let layout = make_layout(*fmin, *fmax, cli.ppo)?;
            let filters = layout
                .centers
                .iter()
                .map(|&fc| discretize(&NzdfParams::new(fc)?, fs))
                .collect::<shocksynth_core::Result<Vec<_>>>()?;
            let top = (10.0 * fmax).min(0.49 * fs);
            let freqs = log_grid(fmin / 10.0, top, BODE_POINTS);
            let mags: Vec<Vec<f64>> = filters
                .iter()
                .map(|filt| freqs.iter().map(|&f| 20.0 * filt.response(f).norm().log10()).collect())
                .collect();
            if let (Some(reference), Some(basis_out)) = (reference, basis_out) {
                let r = read_signal(cli, reference)?;
                io::write_basis(&build_basis(&r, &layout)?, basis_out)?;
            }
            io::write_atomic(out, io::format_bank_magnitudes(&layout.centers, &freqs, &mags).as_bytes())?;
            info!("{} filters", layout.len());
        }
        Command::Synth { spec, reference, ref_seed, ref_duration, swarm, iters, out, report, basis_out } => {
            let spec = read_spec(cli, spec)?;
            let cfg = PsoConfig { swarm_size: *swarm, max_iters: *iters, seed: cli.seed, ..PsoConfig::default() };
            cfg.validate()?;
            let reference = match reference {
                Some(p) => read_signal(cli, p)?,
                None => synth_reference(cli.fs.unwrap_or(DEFAULT_FS), *ref_duration, spec.fmax(), *ref_seed)?,
            };
            let layout = make_layout(spec.fmin(), spec.fmax(), cli.ppo)?;
            let basis = build_basis(&reference, &layout)?;
            if let Some(p) = basis_out {
                io::write_basis(&basis, p)?;
            }
            info!("basis: {} columns of {} samples", basis.columns.len(), basis.column_len());
            let result = synthesize_with_basis(&spec, &basis, &cfg, cli.q_srs)?;
            let rep = Report::from_synthesis(&result);
            io::write_signal(&result.synthesized, out)?;
            rep.write(report)?;
            return Ok(summarize(&rep));
        }
        Command::Verify { signal, spec, report } => {
            let spec = read_spec(cli, spec)?;
            let sig = read_signal(cli, signal)?;
            let layout = make_layout(spec.fmin(), spec.fmax(), cli.ppo)?;
            let grid = verification_grid(&layout, &spec);
            let (actual, target, db, res) =
                verify_on(&sig, &spec, &grid, cli.q_srs, shocksynth_core::signal::DEFAULT_NET_ZERO_TOL)?;
            let rep = Report::new(&actual, &target, &db, &res);
            if let Some(p) = report {
                rep.write(p)?;
            }
            return Ok(summarize(&rep));
        }
        Command::DemoRef { duration, fmax, out } => {
            let sig = synth_reference(cli.fs.unwrap_or(DEFAULT_FS), *duration, *fmax, cli.seed)?;
            io::write_signal(&sig, out)?;
        }
    }
    Ok(Status::Pass)
}

fn validate_common(cli: &Cli) -> Result<()> {
    if let Some(fs) = cli.fs {
        if !(fs.is_finite() && fs > 0.0) {
            bail!("--fs must be positive");
        }
    }
    if !(cli.q_srs.is_finite() && cli.q_srs > 0.5) {
        bail!("--q-srs must exceed 0.5");
    }
    if !(cli.tolerance_db.is_finite() && cli.tolerance_db > 0.0) {
        bail!("--tolerance-db must be positive");
    }
    Ok(())
}

fn read_signal(cli: &Cli, path: &Path) -> Result<Signal> {
    let sig = io::read_signal(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(fs) = cli.fs {
        if (sig.sample_rate() - fs).abs() > 1e-6 * fs {
            bail!("{} is sampled at {} Hz, not --fs {fs}", path.display(), sig.sample_rate());
        }
    }
    Ok(sig)
}

fn read_spec(cli: &Cli, path: &Path) -> Result<SrsSpec> {
    let bp = io::read_spec(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(SrsSpec::new(bp, cli.tolerance_db)?)
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn summarize(rep: &Report) -> Status {
    let db = rep.max_abs_db.map_or("inf".to_string(), |v| format!("{v:.2}"));
    if rep.pass() {
        eprintln!("pass: max SRS error {db} dB");
        return Status::Pass;
    }
    if !rep.pass_srs {
        eprintln!("fail: max SRS error {db} dB exceeds the tolerance");
    }
    if !rep.pass_net_zero {
        eprintln!(
            "fail: residual velocity {:.3e}, displacement {:.3e}",
            rep.residual_velocity_ratio, rep.residual_displacement_ratio
        );
    }
    Status::Fail
}
