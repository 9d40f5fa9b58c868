//! Experiment configuration: TOML files layered over per-scenario defaults.

use std::fmt;
use std::path::PathBuf;

use gaussnm_core::evolutions::CP_TOL;
use gaussnm_core::witnesses::BACKFLOW_REL_TOL;
use gaussnm_core::QbmParams;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

const DEFAULT_SAMPLES: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum Scenario {
    #[serde(rename = "classical_noise_steering")]
    ClassicalNoiseSteering,
    #[serde(rename = "classical_noise_entanglement")]
    ClassicalNoiseEntanglement,
    #[serde(rename = "oscillating_noise")]
    OscillatingNoise,
    #[serde(rename = "qbm_high_T")]
    QbmHighT,
    #[serde(rename = "qbm_low_T")]
    QbmLowT,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::ClassicalNoiseSteering => "classical_noise_steering",
            Scenario::ClassicalNoiseEntanglement => "classical_noise_entanglement",
            Scenario::OscillatingNoise => "oscillating_noise",
            Scenario::QbmHighT => "qbm_high_T",
            Scenario::QbmLowT => "qbm_low_T",
            Scenario::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum StateKind {
    #[serde(rename = "two_mode")]
    TwoMode,
    #[serde(rename = "three_mode")]
    ThreeMode,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateKind::TwoMode => "two_mode",
            StateKind::ThreeMode => "three_mode",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum WitnessKind {
    #[serde(rename = "steering_AB")]
    Steering,
    #[serde(rename = "entanglement_PPT")]
    Entanglement,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::Steering => "steering_AB",
            WitnessKind::Entanglement => "entanglement_PPT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Profile {
    /// `η = t²/(t² − 2t + 2)`
    #[serde(rename = "rational")]
    Rational,
    /// Twice the rational profile.
    #[serde(rename = "rational_scaled")]
    RationalScaled,
    /// `η = η₀(1 − cos 2πt)/2`
    #[serde(rename = "oscillating")]
    Oscillating,
    #[serde(rename = "qbm")]
    Qbm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    kind: Option<OneOrMany<StateKind>>,
    r: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolution {
    profile: Option<Profile>,
    eta0: Option<OneOrMany<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_max: Option<f64>,
    samples: Option<usize>,
    times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQbm {
    alpha: Option<OneOrMany<f64>>,
    omega0: Option<f64>,
    omega_c: Option<f64>,
    s: Option<f64>,
    temperature: Option<f64>,
    omega_max_factor: Option<f64>,
    verify_ode: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    cp: Option<f64>,
    backflow: Option<f64>,
    quad_rel: Option<f64>,
    ode_rel: Option<f64>,
    cross: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// A config file as written, before defaults are applied.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    scenario: Scenario,
    #[serde(default)]
    state: RawState,
    #[serde(default)]
    evolution: RawEvolution,
    #[serde(default)]
    grid: RawGrid,
    witnesses: Option<Vec<WitnessKind>>,
    #[serde(default)]
    qbm: RawQbm,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    output: RawOutput,
}

/// Command-line adjustments applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    /// `(key, value)` pairs naming `tolerances.*` entries.
    pub tolerances: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack on the CP-divisibility criterion.
    pub cp: f64,
    /// Relative rise that counts as a backflow step.
    pub backflow: f64,
    pub quad_rel: f64,
    pub ode_rel: f64,
    /// Entrywise agreement required between ODE propagation and the integrated channel.
    pub cross: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cp: CP_TOL,
            backflow: BACKFLOW_REL_TOL,
            quad_rel: 1e-8,
            ode_rel: 1e-9,
            cross: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionSpec {
    Rational { scale: f64 },
    Oscillating { eta0: Vec<f64> },
    Qbm {
        /// Bath at the first coupling; other couplings are rescalings of it.
        params: QbmParams,
        alphas: Vec<f64>,
        verify_ode: bool,
    },
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub states: Vec<StateKind>,
    pub r: f64,
    pub evolution: EvolutionSpec,
    pub grid: Vec<f64>,
    pub witnesses: Vec<WitnessKind>,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
}

struct Defaults {
    profile: Option<Profile>,
    witnesses: Vec<WitnessKind>,
    t_max: Option<f64>,
    temperature: Option<f64>,
}

fn defaults(scenario: Scenario) -> Defaults {
    use WitnessKind::*;
    let (profile, witnesses, t_max, temperature) = match scenario {
        Scenario::ClassicalNoiseSteering => (Some(Profile::Rational), vec![Steering], Some(8.0), None),
        Scenario::ClassicalNoiseEntanglement => {
            (Some(Profile::RationalScaled), vec![Entanglement], Some(8.0), None)
        }
        Scenario::OscillatingNoise => (Some(Profile::Oscillating), vec![Steering], Some(3.0), None),
        Scenario::QbmHighT => (Some(Profile::Qbm), vec![Steering, Entanglement], Some(3.0), Some(100.0)),
        Scenario::QbmLowT => (Some(Profile::Qbm), vec![Steering, Entanglement], Some(3.0), Some(0.5)),
        Scenario::Custom => (None, vec![Steering, Entanglement], None, None),
    };
    Defaults {
        profile,
        witnesses,
        t_max,
        temperature,
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(vec![e.message().trim().to_string()]))
    }

    /// Applies scenario defaults and overrides, then checks every invariant.
    ///
    /// All violations are reported together.
    pub fn resolve(self, overrides: &Overrides) -> CliResult<ExperimentConfig> {
        let mut errors = Vec::new();
        let d = defaults(self.scenario);
        let mut tol = Tolerances::default();
        let mut set_tol = |key: &str, value: Option<f64>, errors: &mut Vec<String>| {
            let Some(v) = value else { return };
            match key {
                "cp" => tol.cp = v,
                "backflow" => tol.backflow = v,
                "quad_rel" => tol.quad_rel = v,
                "ode_rel" => tol.ode_rel = v,
                "cross" => tol.cross = v,
                _ => errors.push(format!("unknown tolerance `{key}`")),
            }
        };
        let t = &self.tolerances;
        for (key, value) in [
            ("cp", t.cp),
            ("backflow", t.backflow),
            ("quad_rel", t.quad_rel),
            ("ode_rel", t.ode_rel),
            ("cross", t.cross),
        ] {
            set_tol(key, value, &mut errors);
        }
        for (key, value) in &overrides.tolerances {
            let key = key.strip_prefix("tolerances.").unwrap_or(key);
            match value.parse::<f64>() {
                Ok(v) => set_tol(key, Some(v), &mut errors),
                Err(_) => errors.push(format!("tolerance override {key}={value} is not a number")),
            }
        }
        for (key, v) in [
            ("cp", tol.cp),
            ("backflow", tol.backflow),
            ("quad_rel", tol.quad_rel),
            ("ode_rel", tol.ode_rel),
            ("cross", tol.cross),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("tolerances.{key} must be positive, got {v}"));
            }
        }

        let r = self.state.r.unwrap_or(2.0);
        if !(r >= 0.0 && r.is_finite()) {
            errors.push(format!("state.r must be finite and non-negative, got {r}"));
        }
        let states = self
            .state
            .kind
            .as_ref()
            .map_or(vec![StateKind::TwoMode, StateKind::ThreeMode], OneOrMany::to_vec);
        if states.is_empty() {
            errors.push("state.kind lists no state".into());
        }
        let witnesses = self.witnesses.clone().unwrap_or(d.witnesses);
        if witnesses.is_empty() {
            errors.push("witnesses must name at least one of steering_AB, entanglement_PPT".into());
        }

        let grid = self.resolve_grid(d.t_max, overrides.samples, &mut errors);
        let evolution = self.resolve_evolution(d.profile, d.temperature, tol, &mut errors);

        if !errors.is_empty() {
            return Err(CliError::Validation(errors));
        }
        Ok(ExperimentConfig {
            scenario: self.scenario,
            states,
            r,
            evolution: evolution.expect("no errors were reported"),
            grid: grid.expect("no errors were reported"),
            witnesses,
            tolerances: tol,
            output_dir: overrides
                .out
                .clone()
                .or(self.output.dir)
                .unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    fn resolve_grid(
        &self,
        default_t_max: Option<f64>,
        samples_override: Option<usize>,
        errors: &mut Vec<String>,
    ) -> Option<Vec<f64>> {
        if let Some(times) = &self.grid.times {
            if self.grid.t_max.is_some() || self.grid.samples.is_some() || samples_override.is_some() {
                errors.push("grid.times cannot be combined with grid.t_max or grid.samples".into());
            }
            let mut ok = true;
            if times.len() < 2 {
                errors.push(format!("grid needs at least 2 samples, got {}", times.len()));
                ok = false;
            }
            if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                errors.push("grid.times must be finite and non-negative".into());
                ok = false;
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                errors.push("grid.times must be strictly increasing".into());
                ok = false;
            }
            return ok.then(|| times.clone());
        }
        let samples = samples_override.or(self.grid.samples).unwrap_or(DEFAULT_SAMPLES);
        let t_max = self.grid.t_max.or(default_t_max);
        let mut ok = true;
        if samples < 2 {
            errors.push(format!("grid.samples must be at least 2, got {samples}"));
            ok = false;
        }
        match t_max {
            None => {
                errors.push("grid.t_max is required for custom scenarios".into());
                ok = false;
            }
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                errors.push(format!("grid.t_max must be positive and finite, got {t}"));
                ok = false;
            }
            Some(_) => {}
        }
        if !ok {
            return None;
        }
        gaussnm_core::uniform_grid(t_max?, samples).ok()
    }

    fn resolve_evolution(
        &self,
        default_profile: Option<Profile>,
        default_temperature: Option<f64>,
        tol: Tolerances,
        errors: &mut Vec<String>,
    ) -> Option<EvolutionSpec> {
        let profile = match (self.evolution.profile, default_profile) {
            (Some(p), Some(d)) if p != d => {
                errors.push(format!(
                    "evolution.profile conflicts with scenario {}; use scenario custom",
                    self.scenario
                ));
                return None;
            }
            (Some(p), _) | (None, Some(p)) => p,
            (None, None) => {
                errors.push("evolution.profile is required for custom scenarios".into());
                return None;
            }
        };
        if profile != Profile::Oscillating && self.evolution.eta0.is_some() {
            errors.push("evolution.eta0 only applies to the oscillating profile".into());
        }
        let q = &self.qbm;
        let qbm_keys = [q.omega0, q.omega_c, q.s, q.temperature, q.omega_max_factor];
        if profile != Profile::Qbm
            && (q.alpha.is_some() || q.verify_ode.is_some() || qbm_keys.iter().any(Option::is_some))
        {
            errors.push("qbm.* keys only apply to the qbm profile".into());
        }
        match profile {
            Profile::Rational => Some(EvolutionSpec::Rational { scale: 1.0 }),
            Profile::RationalScaled => Some(EvolutionSpec::Rational { scale: 2.0 }),
            Profile::Oscillating => {
                let eta0 = self.evolution.eta0.as_ref().map_or(vec![0.8], OneOrMany::to_vec);
                let mut ok = !eta0.is_empty();
                if eta0.is_empty() {
                    errors.push("evolution.eta0 lists no value".into());
                }
                for v in &eta0 {
                    if !(v.is_finite() && *v >= 0.0) {
                        errors.push(format!("evolution.eta0 must be finite and non-negative, got {v}"));
                        ok = false;
                    }
                }
                ok.then_some(EvolutionSpec::Oscillating { eta0 })
            }
            Profile::Qbm => {
                let alphas = q.alpha.as_ref().map_or(vec![0.7], OneOrMany::to_vec);
                let mut ok = true;
                if alphas.is_empty() {
                    errors.push("qbm.alpha lists no coupling".into());
                    ok = false;
                }
                for a in &alphas {
                    if !(a.is_finite() && *a > 0.0) {
                        errors.push(format!("qbm.alpha must be positive, got {a}"));
                        ok = false;
                    }
                }
                let Some(temperature) = q.temperature.or(default_temperature) else {
                    errors.push("qbm.temperature is required for custom scenarios".into());
                    return None;
                };
                let params = QbmParams {
                    alpha: alphas.first().copied().unwrap_or(1.0),
                    omega0: q.omega0.unwrap_or(7.0),
                    omega_c: q.omega_c.unwrap_or(1.0),
                    s: q.s.unwrap_or(1.0),
                    temperature,
                    quad_rel_tol: tol.quad_rel,
                    ode_rel_tol: tol.ode_rel,
                    omega_max_factor: q.omega_max_factor.unwrap_or(50.0),
                    cross_tol: tol.cross,
                };
                for (key, v) in [
                    ("omega0", params.omega0),
                    ("omega_c", params.omega_c),
                    ("s", params.s),
                    ("temperature", params.temperature),
                    ("omega_max_factor", params.omega_max_factor),
                ] {
                    if !(v > 0.0 && v.is_finite()) {
                        errors.push(format!("qbm.{key} must be positive and finite, got {v}"));
                        ok = false;
                    }
                }
                ok.then_some(EvolutionSpec::Qbm {
                    params,
                    alphas,
                    verify_ode: q.verify_ode.unwrap_or(true),
                })
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &Overrides) -> CliResult<Self> {
        RawConfig::parse(text)?.resolve(overrides)
    }

    /// Name and values of the swept parameter, if any.
    pub fn sweep(&self) -> Option<(&'static str, &[f64])> {
        match &self.evolution {
            EvolutionSpec::Oscillating { eta0 } => Some(("eta0", eta0)),
            EvolutionSpec::Qbm { alphas, .. } => Some(("alpha", alphas)),
            EvolutionSpec::Rational { .. } => None,
        }
    }
}

/// Figure presets shipped with the binary.
pub const PRESETS: [(&str, &str); 6] = [
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
