//! Turns a validated config into witness traces, NM verdicts and backflow reports.

use gaussnm_core::evolutions::NmVerdict;
use gaussnm_core::qbm::{self, propagate, QbmCoefficients};
use gaussnm_core::witnesses::flag_intervals;
use gaussnm_core::{
    detect_backflows, entanglement_ppt, ghz_w_state, noise_profile_oscillating,
    noise_profile_rational, noise_profile_rational_scaled, steerability, two_mode_squeezed,
    uniform_grid, BackflowReport, Bipartition, CovarianceMatrix, Direction, Evolution,
    WitnessTrace,
};
use rayon::prelude::*;

use crate::config::{EvolutionSpec, ExperimentConfig, StateKind, WitnessKind};
use crate::error::{CliError, CliResult};

/// Smallest grid on which QBM coefficients are tabulated before interpolation.
pub const MIN_QBM_SAMPLES: usize = 600;

/// One witness on one initial state at one sweep value.
#[derive(Debug, Clone)]
pub struct Run {
    pub state: StateKind,
    pub witness: WitnessKind,
    pub trace: WitnessTrace,
    pub backflow: BackflowReport,
    /// For each NM interval of the sweep point, whether a backflow interval overlaps it.
    pub witnessed: Vec<bool>,
}

impl Run {
    pub fn every_nm_interval_witnessed(&self) -> bool {
        self.witnessed.iter().all(|&w| w)
    }

    /// Backflow intervals sharing a stretch of positive length with an NM interval.
    pub fn backflows_inside(&self, nm_intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
        self.backflow
            .intervals
            .iter()
            .copied()
            .filter(|&b| nm_intervals.iter().any(|&n| overlap(b, n)))
            .collect()
    }
}

/// All runs sharing one evolution.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Swept parameter name and value.
    pub sweep: Option<(&'static str, f64)>,
    pub verdicts: Vec<NmVerdict>,
    pub nm_intervals: Vec<(f64, f64)>,
    pub runs: Vec<Run>,
    /// QBM coefficients on their tabulation grid.
    pub qbm: Option<QbmCoefficients>,
}

impl SweepPoint {
    pub fn run(&self, state: StateKind, witness: WitnessKind) -> Option<&Run> {
        self.runs.iter().find(|r| r.state == state && r.witness == witness)
    }
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
}

impl Bundle {
    pub fn point(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.sweep.map(|s| s.1) == Some(value))
    }

    /// One line per run stating whether every NM interval overlaps a backflow.
    pub fn summary(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for p in &self.points {
            for run in &p.runs {
                let verdict = if p.nm_intervals.is_empty() {
                    "no NM interval".to_string()
                } else if run.every_nm_interval_witnessed() {
                    "every NM interval overlaps a backflow".to_string()
                } else {
                    let n = run.witnessed.iter().filter(|&&w| !w).count();
                    format!("{n} NM interval(s) without backflow")
                };
                lines.push(format!(
                    "{}: {} NM interval(s), {} backflow interval(s); {verdict}",
                    run_label(p.sweep, run.state, run.witness, " "),
                    p.nm_intervals.len(),
                    run.backflow.intervals.len(),
                ));
            }
        }
        lines
    }
}

/// `steering_AB three_mode alpha=0.7` style label joined by `sep`.
pub fn run_label(sweep: Option<(&str, f64)>, state: StateKind, witness: WitnessKind, sep: &str) -> String {
    let mut s = format!("{witness}{sep}{state}");
    if let Some((name, v)) = sweep {
        s.push_str(sep);
        s.push_str(&format!("{name}={v}"));
    }
    s
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0.max(b.0) < a.1.min(b.1)
}

pub(crate) fn initial_state(kind: StateKind, r: f64) -> gaussnm_core::Result<(CovarianceMatrix, Bipartition)> {
    Ok(match kind {
        StateKind::TwoMode => (two_mode_squeezed(r)?, Bipartition::new(1, 1)?),
        StateKind::ThreeMode => (ghz_w_state(r)?, Bipartition::new(2, 1)?),
    })
}

pub(crate) fn witness_value(
    kind: WitnessKind,
    state: &CovarianceMatrix,
    part: Bipartition,
) -> gaussnm_core::Result<f64> {
    match kind {
        WitnessKind::Steering => steerability(state, part, Direction::AToB),
        WitnessKind::Entanglement => entanglement_ppt(state, part),
    }
}

/// Executes every sweep point in parallel. The result does not depend on the thread count.
pub fn run(config: &ExperimentConfig) -> CliResult<Bundle> {
    let evolutions = build_evolutions(config)?;
    let points = evolutions
        .into_par_iter()
        .map(|(sweep, ev, coeffs)| run_point(config, sweep, &ev, coeffs))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Bundle {
        config: config.clone(),
        points,
    })
}

type Prepared = (Option<(&'static str, f64)>, Evolution, Option<QbmCoefficients>);

fn build_evolutions(config: &ExperimentConfig) -> CliResult<Vec<Prepared>> {
    let scenario = config.scenario;
    match &config.evolution {
        EvolutionSpec::Rational { scale } => {
            let ev = if *scale == 1.0 {
                noise_profile_rational()
            } else {
                noise_profile_rational_scaled()
            };
            Ok(vec![(None, ev, None)])
        }
        EvolutionSpec::Oscillating { eta0 } => eta0
            .iter()
            .map(|&e| {
                let ev = noise_profile_oscillating(e)
                    .map_err(CliError::numerical(format!("{scenario}, eta0={e}")))?;
                Ok((Some(("eta0", e)), ev, None))
            })
            .collect(),
        EvolutionSpec::Qbm {
            params,
            alphas,
            verify_ode,
        } => {
            let grid = qbm_grid(&config.grid);
            let base = qbm::coefficients(params, &grid).map_err(CliError::numerical(format!(
                "{scenario}, alpha={}, coefficient integrals",
                params.alpha
            )))?;
            alphas
                .par_iter()
                .map(|&alpha| {
                    let context = format!("{scenario}, alpha={alpha}");
                    let coeffs = base
                        .rescaled(params.alpha, alpha)
                        .map_err(CliError::numerical(context.clone()))?;
                    if *verify_ode {
                        verify_propagation(config, &coeffs, &context)?;
                    }
                    let ev = qbm::as_evolution(&coeffs).map_err(CliError::numerical(context))?;
                    Ok((Some(("alpha", alpha)), ev, Some(coeffs)))
                })
                .collect()
        }
    }
}

/// Trace grid itself when it is fine enough and starts at zero, else a uniform refinement.
fn qbm_grid(trace_grid: &[f64]) -> Vec<f64> {
    if trace_grid[0] == 0.0 && trace_grid.len() >= MIN_QBM_SAMPLES {
        return trace_grid.to_vec();
    }
    let t_max = trace_grid[trace_grid.len() - 1];
    uniform_grid(t_max, trace_grid.len().max(MIN_QBM_SAMPLES)).expect("t_max was validated")
}

/// Integrates the covariance master equation and checks it against the integrated channel.
fn verify_propagation(config: &ExperimentConfig, coeffs: &QbmCoefficients, context: &str) -> CliResult<()> {
    let tol = config.tolerances;
    config.states.par_iter().try_for_each(|&kind| {
        let context = format!("{context}, {kind}, master-equation check");
        let (sigma0, _) = initial_state(kind, config.r).map_err(CliError::numerical(context.clone()))?;
        propagate(&sigma0, coeffs, 0, tol.ode_rel, tol.cross)
            .map(|_| ())
            .map_err(CliError::numerical(context))
    })
}

fn run_point(
    config: &ExperimentConfig,
    sweep: Option<(&'static str, f64)>,
    ev: &Evolution,
    coeffs: Option<QbmCoefficients>,
) -> CliResult<SweepPoint> {
    let tol = config.tolerances;
    let grid = &config.grid;
    let context = |t: f64| match sweep {
        Some((name, v)) => format!("{}, {name}={v}, t={t}", config.scenario),
        None => format!("{}, t={t}", config.scenario),
    };
    let verdicts = grid
        .par_iter()
        .map(|&t| ev.is_markovian_at(t, tol.cp).map_err(CliError::numerical(context(t))))
        .collect::<CliResult<Vec<_>>>()?;
    let non_markovian: Vec<bool> = verdicts.iter().map(|v| !v.markovian).collect();
    let nm_intervals = flag_intervals(grid, &non_markovian);

    let combos: Vec<(StateKind, WitnessKind)> = config
        .states
        .iter()
        .flat_map(|&s| config.witnesses.iter().map(move |&w| (s, w)))
        .collect();
    let runs = combos
        .par_iter()
        .map(|&(state, witness)| {
            let (sigma0, part) =
                initial_state(state, config.r).map_err(CliError::numerical(context(0.0)))?;
            let values = grid
                .par_iter()
                .map(|&t| {
                    let ch = ev
                        .channel_at(t)
                        .and_then(|c| c.embed_local(sigma0.modes(), 0))
                        .and_then(|c| c.apply(&sigma0))
                        .and_then(|s| witness_value(witness, &s, part));
                    ch.map_err(CliError::numerical(format!("{}, {state}, {witness}", context(t))))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let label = run_label(sweep, state, witness, "_");
            let trace = WitnessTrace::new(grid.clone(), values, label)
                .map_err(CliError::numerical(context(0.0)))?;
            let backflow =
                detect_backflows(&trace, tol.backflow).map_err(CliError::numerical(context(0.0)))?;
            let witnessed = nm_intervals
                .iter()
                .map(|&n| backflow.intervals.iter().any(|&b| overlap(b, n)))
                .collect();
            Ok(Run {
                state,
                witness,
                trace,
                backflow,
                witnessed,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    Ok(SweepPoint {
        sweep,
        verdicts,
        nm_intervals,
        runs,
        qbm: coeffs,
    })
}
