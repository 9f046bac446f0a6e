//! Run configuration: command-line flags, the flat `key = value` file that
//! mirrors them, and resolution into a runnable [`Scenario`].

use std::fmt;
use std::path::PathBuf;

use atomcav_core::scenarios::TRIPLET_RATIO;
use atomcav_core::{
    CouplingSchedule, CouplingWindow, Error, ExcitationSubspace, Pulse, PulseShape, Scenario,
    ScenarioKind,
};
use clap::{Args, Parser, ValueEnum};

pub const DEFAULT_RAMP_FRACTION: f64 = 0.25;
pub const DEFAULT_STRENGTH: f64 = 1.0;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    SingletDjc,
    WStateDjc,
    TripletDd,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Djc,
    Dd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    ClosedForm,
    Rk4,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PulseKind {
    Constant,
    SineSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A configuration problem, tied to the field that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Every simulate option, all optional so that flags can be layered over a
/// config file.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct SimulateArgs {
    /// Flat `key = value` file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioName>,
    /// Coupling model; required for custom schedules.
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// RK4 step size (default 1e-3 / max strength).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Samples per coupling window.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub pulse: Option<PulseKind>,
    /// Ramp length as a fraction of the window, for sine-squared pulses.
    #[arg(long)]
    pub ramp_fraction: Option<f64>,
    /// Peak coupling strength (atom 2 in the dd model).
    #[arg(long)]
    pub strength: Option<f64>,
    /// Coupling ratio γ₁/γ₂ in the dd model.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Excitation number of the conserved block.
    #[arg(long)]
    pub excitations: Option<u32>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub tau1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Parser)]
#[command(name = "config", no_binary_name = true, disable_help_flag = true)]
struct FileArgs {
    #[command(flatten)]
    args: SimulateArgs,
}

impl SimulateArgs {
    /// Parses the flat config format. Keys are flag names, with `_` and `-`
    /// interchangeable; `#` starts a comment.
    pub fn from_config_text(text: &str) -> Result<Self, ConfigError> {
        let mut argv = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(
                    format!("line {}", lineno + 1),
                    "expected `key = value`",
                ));
            };
            let key = key.trim().replace('_', "-");
            if key == "config" {
                return Err(ConfigError::new(
                    "config",
                    "config files cannot include other files",
                ));
            }
            argv.push(format!("--{key}"));
            argv.push(value.trim().to_owned());
        }
        FileArgs::try_parse_from(argv).map(|f| f.args).map_err(|e| {
            let field = match e.get(clap::error::ContextKind::InvalidArg) {
                Some(clap::error::ContextValue::String(s)) => field_name(s),
                _ => "config".to_owned(),
            };
            let message = e.render().to_string();
            let message = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            ConfigError::new(field, message)
        })
    }

    /// Field-wise merge; values in `self` win over `base`.
    pub fn over(self, base: SimulateArgs) -> SimulateArgs {
        SimulateArgs {
            config: self.config.or(base.config),
            scenario: self.scenario.or(base.scenario),
            model: self.model.or(base.model),
            method: self.method.or(base.method),
            dt: self.dt.or(base.dt),
            samples: self.samples.or(base.samples),
            pulse: self.pulse.or(base.pulse),
            ramp_fraction: self.ramp_fraction.or(base.ramp_fraction),
            strength: self.strength.or(base.strength),
            ratio: self.ratio.or(base.ratio),
            excitations: self.excitations.or(base.excitations),
            t1: self.t1.or(base.t1),
            tau1: self.tau1.or(base.tau1),
            t2: self.t2.or(base.t2),
            tau2: self.tau2.or(base.tau2),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
            seed: self.seed.or(base.seed),
        }
    }

    /// Loads the config file named by `--config`, if any, and layers the
    /// flags over it.
    pub fn with_config_file(self) -> Result<SimulateArgs, ConfigError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        Ok(self.over(Self::from_config_text(&text)?))
    }
}

fn field_name(arg: &str) -> String {
    arg.trim_start_matches("--")
        .split([' ', '='])
        .next()
        .unwrap_or(arg)
        .to_owned()
}

/// Fully resolved and validated simulate configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    pub model: Model,
    pub method: MethodChoice,
    pub dt: Option<f64>,
    pub samples: usize,
    pub pulse: PulseShape,
    pub strength: f64,
    pub ratio: Option<f64>,
    pub excitations: u32,
    pub custom: Option<CustomWindows>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomWindows {
    pub t1: f64,
    pub tau1: f64,
    pub t2: f64,
    pub tau2: f64,
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(
            field,
            format!("must be finite and positive, got {v}"),
        ))
    }
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be finite, got {v}")))
    }
}

impl RunConfig {
    pub fn resolve(args: SimulateArgs) -> Result<Self, ConfigError> {
        let scenario = args.scenario.ok_or_else(|| {
            ConfigError::new(
                "scenario",
                "required (singlet-djc, w-state-djc, triplet-dd or custom)",
            )
        })?;
        let natural = match scenario {
            ScenarioName::SingletDjc | ScenarioName::WStateDjc => Some(Model::Djc),
            ScenarioName::TripletDd => Some(Model::Dd),
            ScenarioName::Custom => None,
        };
        let model = match (natural, args.model) {
            (Some(m), None) => m,
            (Some(m), Some(given)) if m == given => m,
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "model",
                    "does not match the named scenario",
                ))
            }
            (None, Some(given)) => given,
            (None, None) => return Err(ConfigError::new("model", "required for custom scenarios")),
        };

        let method = args.method.unwrap_or(MethodChoice::ClosedForm);
        let dt = args.dt.map(|v| positive("dt", v)).transpose()?;
        let samples = args
            .samples
            .unwrap_or(atomcav_core::scenarios::DEFAULT_SAMPLES);
        if samples < 2 {
            return Err(ConfigError::new(
                "samples",
                format!("need at least 2 per window, got {samples}"),
            ));
        }
        let pulse = match (
            args.pulse.unwrap_or(PulseKind::Constant),
            args.ramp_fraction,
        ) {
            (PulseKind::Constant, None) => PulseShape::Constant,
            (PulseKind::Constant, Some(_)) => {
                return Err(ConfigError::new(
                    "ramp-fraction",
                    "only applies to sine-squared pulses",
                ))
            }
            (PulseKind::SineSquared, f) => {
                let f = f.unwrap_or(DEFAULT_RAMP_FRACTION);
                if !(f > 0.0 && f <= 0.5) {
                    return Err(ConfigError::new(
                        "ramp-fraction",
                        format!("must lie in (0, 0.5], got {f}"),
                    ));
                }
                PulseShape::SineSquaredRamp { ramp_fraction: f }
            }
        };
        let strength = positive("strength", args.strength.unwrap_or(DEFAULT_STRENGTH))?;
        let ratio = args.ratio.map(|r| positive("ratio", r)).transpose()?;
        if ratio.is_some() && model == Model::Djc {
            return Err(ConfigError::new("ratio", "only applies to the dd model"));
        }
        let excitations = args.excitations.unwrap_or(1);
        if excitations == 0 {
            return Err(ConfigError::new(
                "excitations",
                "the N = 0 block has no dynamics",
            ));
        }
        if excitations > 1 && method != MethodChoice::Rk4 {
            return Err(ConfigError::new(
                "method",
                "closed forms exist only for one excitation; use rk4",
            ));
        }

        let timing = [
            ("t1", args.t1),
            ("tau1", args.tau1),
            ("t2", args.t2),
            ("tau2", args.tau2),
        ];
        let custom = if scenario == ScenarioName::Custom {
            Some(custom_windows(
                model, args.t1, args.tau1, args.t2, args.tau2,
            )?)
        } else {
            if let Some((name, _)) = timing.iter().find(|(_, v)| v.is_some()) {
                return Err(ConfigError::new(
                    *name,
                    "window timing only applies to custom scenarios",
                ));
            }
            None
        };

        Ok(Self {
            scenario,
            model,
            method,
            dt,
            samples,
            pulse,
            strength,
            ratio,
            excitations,
            custom,
            output: args.output,
            format: args.format.unwrap_or(Format::Csv),
            seed: args.seed.unwrap_or(DEFAULT_SEED),
        })
    }

    /// Builds the scenario, with sampling and excitation block applied.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let built = match self.scenario {
            ScenarioName::SingletDjc => {
                Scenario::build(ScenarioKind::SingletDjc, self.pulse, self.strength)
            }
            ScenarioName::WStateDjc => {
                Scenario::build(ScenarioKind::WStateDjc, self.pulse, self.strength)
            }
            ScenarioName::TripletDd => Scenario::simultaneous_pi(
                self.pulse,
                self.strength,
                self.ratio.unwrap_or(TRIPLET_RATIO),
            ),
            ScenarioName::Custom => self.custom_schedule().map(Scenario::custom),
        };
        built
            .and_then(|s| s.with_samples(self.samples))
            .and_then(|s| s.with_subspace(ExcitationSubspace::new(self.excitations)))
            .map_err(from_core)
    }

    fn custom_schedule(&self) -> Result<CouplingSchedule, Error> {
        let w = self.custom.expect("custom scenario carries its windows");
        let pulse = Pulse {
            shape: self.pulse,
            strength: self.strength,
        };
        match self.model {
            Model::Djc => CouplingSchedule::sequential(
                CouplingWindow::new(w.t1, w.tau1, pulse)?,
                CouplingWindow::new(w.t2, w.tau2, pulse)?,
            ),
            Model::Dd => CouplingSchedule::simultaneous_with_ratio(
                CouplingWindow::new(w.t1, w.tau1, pulse)?,
                self.ratio.unwrap_or(1.0),
            ),
        }
    }
}

fn custom_windows(
    model: Model,
    t1: Option<f64>,
    tau1: Option<f64>,
    t2: Option<f64>,
    tau2: Option<f64>,
) -> Result<CustomWindows, ConfigError> {
    let t1 = finite("t1", t1.unwrap_or(0.0))?;
    let tau1 = positive(
        "tau1",
        tau1.ok_or_else(|| ConfigError::new("tau1", "required for custom scenarios"))?,
    )?;
    match model {
        Model::Djc => {
            let t2 = finite("t2", t2.unwrap_or(t1 + tau1))?;
            let tau2 = positive(
                "tau2",
                tau2.ok_or_else(|| ConfigError::new("tau2", "required for custom djc"))?,
            )?;
            Ok(CustomWindows { t1, tau1, t2, tau2 })
        }
        Model::Dd => {
            // Both atoms share one window.
            if t2.is_some_and(|v| v != t1) {
                return Err(ConfigError::new("t2", "must equal t1 in the dd model"));
            }
            if tau2.is_some_and(|v| v != tau1) {
                return Err(ConfigError::new("tau2", "must equal tau1 in the dd model"));
            }
            Ok(CustomWindows {
                t1,
                tau1,
                t2: t1,
                tau2: tau1,
            })
        }
    }
}

fn from_core(e: Error) -> ConfigError {
    match e {
        Error::InvalidParameter { name, reason } => ConfigError::new(name, reason),
        Error::UnreachableTarget { .. } => ConfigError::new("strength", e.to_string()),
        Error::EmptySubspace => ConfigError::new("excitations", e.to_string()),
        other => ConfigError::new("scenario", other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(scenario: ScenarioName) -> SimulateArgs {
        SimulateArgs {
            scenario: Some(scenario),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::resolve(args(ScenarioName::SingletDjc)).unwrap();
        assert_eq!(c.model, Model::Djc);
        assert_eq!(c.method, MethodChoice::ClosedForm);
        assert_eq!(c.samples, 512);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.pulse, PulseShape::Constant);
        c.build().unwrap();
    }

    #[test]
    fn file_parsing_and_precedence() {
        let file = SimulateArgs::from_config_text(
            "# comment\nscenario = w-state-djc\nsamples = 64  # trailing\nramp_fraction = 0.1\npulse=sine-squared\n",
        )
        .unwrap();
        assert_eq!(file.scenario, Some(ScenarioName::WStateDjc));
        assert_eq!(file.samples, Some(64));
        assert_eq!(file.ramp_fraction, Some(0.1));
        let flags = SimulateArgs {
            samples: Some(8),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.samples, Some(8));
        assert_eq!(merged.scenario, Some(ScenarioName::WStateDjc));
    }

    #[test]
    fn file_errors_name_the_field() {
        assert_eq!(
            SimulateArgs::from_config_text("samples = many")
                .unwrap_err()
                .field,
            "samples"
        );
        assert_eq!(
            SimulateArgs::from_config_text("bogus = 1")
                .unwrap_err()
                .field,
            "bogus"
        );
        assert_eq!(
            SimulateArgs::from_config_text("no equals sign")
                .unwrap_err()
                .field,
            "line 1"
        );
        assert_eq!(
            SimulateArgs::from_config_text("config = x")
                .unwrap_err()
                .field,
            "config"
        );
    }

    #[test]
    fn validation_names_fields() {
        let field = |a: SimulateArgs| RunConfig::resolve(a).unwrap_err().field;
        assert_eq!(field(SimulateArgs::default()), "scenario");
        assert_eq!(
            field(SimulateArgs {
                samples: Some(0),
                ..args(ScenarioName::SingletDjc)
            }),
            "samples"
        );
        assert_eq!(
            field(SimulateArgs {
                strength: Some(-1.0),
                ..args(ScenarioName::SingletDjc)
            }),
            "strength"
        );
        assert_eq!(
            field(SimulateArgs {
                dt: Some(0.0),
                ..args(ScenarioName::SingletDjc)
            }),
            "dt"
        );
        assert_eq!(
            field(SimulateArgs {
                ratio: Some(2.0),
                ..args(ScenarioName::SingletDjc)
            }),
            "ratio"
        );
        assert_eq!(
            field(SimulateArgs {
                model: Some(Model::Dd),
                ..args(ScenarioName::SingletDjc)
            }),
            "model"
        );
        assert_eq!(
            field(SimulateArgs {
                t1: Some(0.0),
                ..args(ScenarioName::TripletDd)
            }),
            "t1"
        );
        assert_eq!(
            field(SimulateArgs {
                excitations: Some(0),
                ..args(ScenarioName::TripletDd)
            }),
            "excitations"
        );
        assert_eq!(
            field(SimulateArgs {
                excitations: Some(2),
                ..args(ScenarioName::TripletDd)
            }),
            "method"
        );
        assert_eq!(
            field(SimulateArgs {
                ramp_fraction: Some(0.2),
                ..args(ScenarioName::TripletDd)
            }),
            "ramp-fraction"
        );
        assert_eq!(field(args(ScenarioName::Custom)), "model");
        assert_eq!(
            field(SimulateArgs {
                model: Some(Model::Djc),
                ..args(ScenarioName::Custom)
            }),
            "tau1"
        );
    }

    #[test]
    fn custom_schedules() {
        let djc = SimulateArgs {
            model: Some(Model::Djc),
            tau1: Some(0.5),
            tau2: Some(1.0),
            ..args(ScenarioName::Custom)
        };
        let s = RunConfig::resolve(djc.clone()).unwrap().build().unwrap();
        assert!(s.schedule().is_sequential());
        assert_eq!(s.schedule().window(2).start(), 0.5);
        let gap = SimulateArgs {
            t2: Some(0.7),
            ..djc
        };
        assert_eq!(
            RunConfig::resolve(gap).unwrap().build().unwrap_err().field,
            "t2"
        );

        let dd = SimulateArgs {
            model: Some(Model::Dd),
            tau1: Some(1.0),
            ratio: Some(3.0),
            ..args(ScenarioName::Custom)
        };
        let s = RunConfig::resolve(dd).unwrap().build().unwrap();
        assert_eq!(s.schedule().ratio(), Some(3.0));
    }

    #[test]
    fn triplet_ratio_override() {
        let c = RunConfig::resolve(SimulateArgs {
            ratio: Some(1.0),
            ..args(ScenarioName::TripletDd)
        })
        .unwrap();
        assert_eq!(c.build().unwrap().schedule().ratio(), Some(1.0));
    }
}
