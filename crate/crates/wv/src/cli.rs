//! Command-line arguments and their merge into a [`RunSpec`].

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Parser;

use crate::commands;
use crate::spec::{CoinRule, Command, McTarget, OutputFormat, RunSpec, SweepAxis, UpdateSpec};
use crate::verify::{self, VerifyOptions};
use crate::CliError;

/// Finite-strength weak values: single evaluations, sweeps, Monte Carlo and
/// a self-check suite.
#[derive(Debug, Parser)]
#[command(name = "wv", version)]
pub struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    pub command: Command,

    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the fully resolved spec as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,

    /// Pre-selected state, polar angle.
    #[arg(long, allow_negative_numbers = true)]
    pub pre_theta: Option<f64>,
    /// Pre-selected state, azimuth.
    #[arg(long, allow_negative_numbers = true)]
    pub pre_phi: Option<f64>,
    /// Post-selected state, polar angle.
    #[arg(long, allow_negative_numbers = true)]
    pub post_theta: Option<f64>,
    /// Post-selected state, azimuth.
    #[arg(long, allow_negative_numbers = true)]
    pub post_phi: Option<f64>,

    /// Pointer shift.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Outcome variance.
    #[arg(long = "D", allow_negative_numbers = true)]
    pub d: Option<f64>,
    /// Position coupling of the dual meter.
    #[arg(long, allow_negative_numbers = true)]
    pub eps2: Option<f64>,

    /// Coin-toss strength.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Coin-toss disturbance.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Coin-toss weight of heads.
    #[arg(long, allow_negative_numbers = true)]
    pub p_up: Option<f64>,
    /// Coin-toss post-selection rule.
    #[arg(long, value_enum)]
    pub rule: Option<CoinRule>,
    /// s-independent acceptance for heads.
    #[arg(long)]
    pub q_up: Option<f64>,
    /// s-independent acceptance for tails.
    #[arg(long)]
    pub q_down: Option<f64>,

    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Trials per batch.
    #[arg(long)]
    pub batch_size: Option<u64>,
    /// Model sampled by `mc`.
    #[arg(long, value_enum)]
    pub target: Option<McTarget>,
    /// State update used by Gaussian Monte Carlo.
    #[arg(long, value_enum)]
    pub update: Option<UpdateSpec>,

    /// Sweep axis.
    #[arg(long, value_enum)]
    pub axis: Option<SweepAxis>,
    /// Sweep start.
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,
    /// Sweep stop.
    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,
    /// Sweep points.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Geometric spacing.
    #[arg(long, overrides_with = "linear")]
    pub log: bool,
    /// Linear spacing.
    #[arg(long, overrides_with = "log")]
    pub linear: bool,
    /// Run Monte Carlo at every sweep point.
    #[arg(long)]
    pub mc: bool,

    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// `verify`: skip Monte Carlo checks.
    #[arg(long)]
    pub fast: bool,
    /// `verify`: add this to G in the weak-value route (fault injection).
    #[arg(
        long,
        hide = true,
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    pub perturb_g: f64,
}

macro_rules! set {
    ($($target:expr => $value:expr),* $(,)?) => {
        $(if let Some(v) = $value { $target = v; })*
    };
}

impl Cli {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunSpec, CliError> {
        let mut s = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                RunSpec::from_json(&text)?
            }
            None => RunSpec::default(),
        };
        s.command = self.command;
        set! {
            s.pre_state.theta => self.pre_theta,
            s.pre_state.phi => self.pre_phi,
            s.post_state.theta => self.post_theta,
            s.post_state.phi => self.post_phi,
            s.meter.x0 => self.x0,
            s.meter.d => self.d,
            s.meter.eps2 => self.eps2,
            s.coin.lambda => self.lambda,
            s.coin.delta => self.delta,
            s.coin.p_up => self.p_up,
            s.coin.rule => self.rule,
            s.coin.q_up => self.q_up,
            s.coin.q_down => self.q_down,
            s.mc.seed => self.seed,
            s.mc.trials => self.trials,
            s.mc.batch_size => self.batch_size,
            s.mc.target => self.target,
            s.mc.update => self.update,
            s.sweep.axis => self.axis,
            s.sweep.start => self.start,
            s.sweep.stop => self.stop,
            s.sweep.steps => self.steps,
            s.output => self.format,
        }
        if self.log {
            s.sweep.log = true;
        }
        if self.linear {
            s.sweep.log = false;
        }
        if self.mc {
            s.sweep.mc = true;
        }
        if self.out.is_some() {
            s.out_path = self.out.clone();
        }
        Ok(s)
    }

    /// Runs the command and returns the process exit code.
    pub fn execute(&self) -> Result<i32, CliError> {
        let spec = self.resolve()?;
        if self.dump_config {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &spec)?;
            writeln!(out)?;
            return Ok(0);
        }
        spec.validate()?;
        let (table, code) = if spec.command == Command::Verify {
            let report = verify::run(&VerifyOptions {
                fast: self.fast,
                perturb_g: self.perturb_g,
                seed: self.seed.unwrap_or(VerifyOptions::default().seed),
            });
            if !report.passed() {
                eprintln!("verify failed: {}", report.failures().join(", "));
            }
            (report.table(), if report.passed() { 0 } else { 1 })
        } else {
            (commands::run(&spec)?, 0)
        };
        match &spec.out_path {
            Some(path) => {
                let file = File::create(path)?;
                let mut w = BufWriter::new(file);
                table.write(spec.output, &mut w)?;
                w.flush()?;
            }
            None => table.write(spec.output, io::stdout().lock())?,
        }
        Ok(code)
    }
}
