//! Fully resolved run specification.
//!
//! A [`RunSpec`] is built from defaults, then an optional JSON config file,
//! then command-line flags, in that order of increasing precedence. The
//! resolved spec is what `--dump-config` prints and what every command reads.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use wv_core::{
    make_state, CoinTossConfig, McConfig, MeterConfig, PostSelectionRule, PureQubitState,
    UpdateMode,
};

use crate::CliError;

/// Which computation to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// AAV weak value of the pre/post pair.
    Aav,
    /// Finite-strength PPS average of the plain meter.
    Pps,
    /// PPS average with the additional position coupling `eps2`.
    Dual,
    /// PPS average with coherences discarded.
    Classical,
    /// Classical coin-toss model.
    Cointoss,
    /// Monte Carlo estimate next to its analytic value.
    Mc,
    /// One row per point along a parameter axis.
    Sweep,
    /// Built-in self-check suite.
    Verify,
}

/// Output table format.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Comma-separated values with a header row.
    #[default]
    Csv,
    /// A single JSON document (see `schema/output.schema.json`).
    Json,
}

/// Bloch-sphere angles of a pure state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    /// Polar angle in `[0, π]`.
    pub theta: f64,
    /// Azimuth in `[−π, π]`.
    pub phi: f64,
}

impl Angles {
    /// The state `(cos θ/2, e^{iφ} sin θ/2)`.
    pub fn state(&self) -> Result<PureQubitState, CliError> {
        make_state(self.theta, self.phi).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Gaussian meter parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeterSpec {
    /// Pointer shift `x0`.
    pub x0: f64,
    /// Outcome variance `D`.
    #[serde(alias = "D")]
    pub d: f64,
    /// Position coupling used by the `dual` command.
    pub eps2: f64,
}

impl Default for MeterSpec {
    fn default() -> Self {
        MeterSpec {
            x0: 0.1,
            d: 1.0,
            eps2: 0.0,
        }
    }
}

impl MeterSpec {
    /// Validated meter configuration, including `eps2`.
    pub fn config(&self) -> Result<MeterConfig, CliError> {
        MeterConfig::dual(self.x0, self.d, self.eps2).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Post-selection rule of the coin-toss model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CoinRule {
    /// Acceptance `1 − δ/(1 ± sλ)` that looks at the outcome.
    #[default]
    #[value(alias = "s-dependent")]
    SDependent,
    /// Acceptance `q_σ` that depends only on the coin's state.
    #[value(alias = "s-independent")]
    SIndependent,
}

/// Coin-toss parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoinSpec {
    /// Strength λ.
    pub lambda: f64,
    /// Disturbance δ.
    pub delta: f64,
    /// Pre-state weight of heads.
    pub p_up: f64,
    /// Which post-selection rule to apply.
    pub rule: CoinRule,
    /// s-independent acceptance for heads.
    pub q_up: f64,
    /// s-independent acceptance for tails.
    pub q_down: f64,
}

impl Default for CoinSpec {
    fn default() -> Self {
        CoinSpec {
            lambda: 0.005,
            delta: 0.99,
            p_up: 1.0,
            rule: CoinRule::SDependent,
            q_up: 1.0,
            q_down: 1.0,
        }
    }
}

impl CoinSpec {
    /// Validated coin configuration.
    pub fn config(&self) -> Result<CoinTossConfig, CliError> {
        CoinTossConfig::new(self.lambda, self.delta, self.p_up)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Validated post-selection rule.
    pub fn post_rule(&self) -> Result<PostSelectionRule, CliError> {
        match self.rule {
            CoinRule::SDependent => Ok(PostSelectionRule::SDependent),
            CoinRule::SIndependent => PostSelectionRule::s_independent(self.q_up, self.q_down)
                .map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

/// State-update rule used by Monte Carlo runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum UpdateSpec {
    /// Quantum Bayesian update.
    #[default]
    Quantum,
    /// Quantum update with the `e^{−iε₂x}` coherence phase.
    Dual,
    /// Coherences dropped.
    Classical,
}

impl From<UpdateSpec> for UpdateMode {
    fn from(u: UpdateSpec) -> Self {
        match u {
            UpdateSpec::Quantum => UpdateMode::Quantum,
            UpdateSpec::Dual => UpdateMode::QuantumDualCoupling,
            UpdateSpec::Classical => UpdateMode::ClassicalDiagonal,
        }
    }
}

/// What the `mc` command samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum McTarget {
    /// Gaussian pointer with Bayesian update.
    #[default]
    Gaussian,
    /// Coin-toss model.
    Coin,
}

/// Monte Carlo parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    /// Seed of the counter-based random streams.
    pub seed: u64,
    /// Number of trials.
    pub trials: u64,
    /// Trials per batch; fixes the reduction tree.
    pub batch_size: u64,
    /// Model sampled by the `mc` command.
    pub target: McTarget,
    /// State-update rule for Gaussian runs.
    pub update: UpdateSpec,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec {
            seed: 1,
            trials: 1_000_000,
            batch_size: 8192,
            target: McTarget::Gaussian,
            update: UpdateSpec::Quantum,
        }
    }
}

impl McSpec {
    /// Validated Monte Carlo configuration.
    pub fn config(&self) -> Result<McConfig, CliError> {
        McConfig::new(self.seed, self.trials, self.batch_size, self.update.into())
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Parameter driven by a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Measurement strength `g`; `x0 = √(4Dg)`.
    #[default]
    G,
    /// Coin-toss disturbance δ.
    Delta,
    /// Post-selection polar angle.
    #[value(alias = "overlap-angle")]
    OverlapAngle,
    /// Position coupling of the dual meter.
    Eps2,
}

/// Sweep range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Driven parameter.
    pub axis: SweepAxis,
    /// First value.
    pub start: f64,
    /// Last value.
    pub stop: f64,
    /// Number of points, at least 2.
    pub steps: usize,
    /// Geometric instead of linear spacing.
    pub log: bool,
    /// Also run Monte Carlo at every point.
    pub mc: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            axis: SweepAxis::G,
            start: 1e-4,
            stop: 1.0,
            steps: 21,
            log: true,
            mc: false,
        }
    }
}

impl SweepSpec {
    /// Grid values, endpoints included exactly.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.steps < 2 {
            return Err(CliError::Config(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::Config("sweep bounds must be finite".into()));
        }
        if self.log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(CliError::Config(
                "log sweep needs positive start and stop".into(),
            ));
        }
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.steps - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect())
    }
}

/// Everything a command needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    /// Command to run.
    pub command: Command,
    /// Pre-selected state.
    pub pre_state: Angles,
    /// Post-selected state.
    pub post_state: Angles,
    /// Meter.
    pub meter: MeterSpec,
    /// Coin-toss model.
    pub coin: CoinSpec,
    /// Monte Carlo.
    pub mc: McSpec,
    /// Sweep range.
    pub sweep: SweepSpec,
    /// Output format.
    pub output: OutputFormat,
    /// Output file; standard output when absent.
    pub out_path: Option<PathBuf>,
}

impl Default for RunSpec {
    /// The default pair has `A_w = cot(0.05) ≈ 19.98`.
    fn default() -> Self {
        RunSpec {
            command: Command::Pps,
            pre_state: Angles {
                theta: FRAC_PI_2,
                phi: 0.0,
            },
            post_state: Angles {
                theta: FRAC_PI_2 - 0.1,
                phi: PI,
            },
            meter: MeterSpec::default(),
            coin: CoinSpec::default(),
            mc: McSpec::default(),
            sweep: SweepSpec::default(),
            output: OutputFormat::Csv,
            out_path: None,
        }
    }
}

impl RunSpec {
    /// Parses a JSON config; missing fields take their defaults.
    pub fn from_json(text: &str) -> Result<RunSpec, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    /// Checks every configuration the selected command will touch, so that
    /// invalid input fails before any work is done.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.command {
            Command::Aav => {
                self.pre_state.state()?;
                self.post_state.state()?;
            }
            Command::Pps | Command::Dual | Command::Classical => {
                self.pre_state.state()?;
                self.post_state.state()?;
                self.meter.config()?;
            }
            Command::Cointoss => {
                self.coin.config()?;
                self.coin.post_rule()?;
            }
            Command::Mc => {
                self.mc.config()?;
                match self.mc.target {
                    McTarget::Gaussian => {
                        self.pre_state.state()?;
                        self.post_state.state()?;
                        self.meter.config()?;
                    }
                    McTarget::Coin => {
                        self.coin.config()?;
                        self.coin.post_rule()?;
                    }
                }
            }
            Command::Sweep => {
                self.sweep.values()?;
                if self.sweep.mc {
                    self.mc.config()?;
                }
                // Parameters that the axis overrides are checked per row.
                match self.sweep.axis {
                    SweepAxis::Delta => {
                        CoinTossConfig::new(self.coin.lambda, 0.0, self.coin.p_up)
                            .map_err(|e| CliError::Config(e.to_string()))?;
                    }
                    SweepAxis::OverlapAngle => {
                        self.pre_state.state()?;
                        self.meter.config()?;
                    }
                    SweepAxis::G | SweepAxis::Eps2 => {
                        self.pre_state.state()?;
                        self.post_state.state()?;
                        if !(self.meter.d > 0.0 && self.meter.d.is_finite()) {
                            return Err(CliError::Config(format!(
                                "meter D must be positive, got {}",
                                self.meter.d
                            )));
                        }
                    }
                }
            }
            Command::Verify => {}
        }
        Ok(())
    }
}
