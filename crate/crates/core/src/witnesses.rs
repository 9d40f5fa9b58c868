//! Gaussian steerability, PPT entanglement and backflow detection on sampled traces.

use crate::error::{Error, Result};
use crate::symplectic::{
    direct_sum, hermitian_eigenvalues, schur_complement, symplectic_eigenvalues, symplectic_form,
    Bipartition, Complement, CovarianceMatrix,
};

/// Default relative tolerance for [`detect_backflows`].
pub const BACKFLOW_REL_TOL: f64 = 1e-9;

/// Steering direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AToB,
    BToA,
}

/// Gaussian steerability `max{0, -Σ_{ν<1} ln ν}` over the symplectic eigenvalues of the
/// Schur complement of the steering party's block.
pub fn steerability(
    cov: &CovarianceMatrix,
    part: Bipartition,
    direction: Direction,
) -> Result<f64> {
    let side = match direction {
        Direction::AToB => Complement::OfB,
        Direction::BToA => Complement::OfA,
    };
    let m = schur_complement(cov, part, side)?;
    let total: f64 = symplectic_eigenvalues(&m)?
        .into_iter()
        .filter(|&nu| nu < 1.0)
        .map(f64::ln)
        .sum();
    Ok((-total).max(0.0))
}

/// PPT entanglement `max{0, -Σ_{μ<0} μ}` over the eigenvalues of `σ + i(Ω_A ⊕ Ω_Bᵀ)`.
///
/// Only `1|n` and `n|1` bipartitions are accepted.
pub fn entanglement_ppt(cov: &CovarianceMatrix, part: Bipartition) -> Result<f64> {
    if cov.modes() != part.modes() {
        return Err(Error::InvalidDimension(format!(
            "bipartition {}|{} does not match a {}-mode state",
            part.n_a(),
            part.n_b(),
            cov.modes()
        )));
    }
    if part.n_a() > 1 && part.n_b() > 1 {
        return Err(Error::UnsupportedPartition(format!(
            "PPT is not sufficient for a {}|{} split",
            part.n_a(),
            part.n_b()
        )));
    }
    let form = direct_sum(
        &symplectic_form(part.n_a())?,
        &symplectic_form(part.n_b())?.transpose(),
    );
    let negative: f64 = hermitian_eigenvalues(cov.data(), &form)
        .into_iter()
        .filter(|&mu| mu < 0.0)
        .sum();
    Ok((-negative).max(0.0))
}

/// Witness values sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessTrace {
    times: Vec<f64>,
    values: Vec<f64>,
    label: String,
}

impl WitnessTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidDimension(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvariantViolation(
                "trace times must be finite and strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvariantViolation(format!(
                "witness values must be finite and non-negative, got {v}"
            )));
        }
        Ok(Self {
            times,
            values,
            label: label.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Time intervals over which a trace rises.
#[derive(Debug, Clone, PartialEq)]
pub struct BackflowReport {
    pub intervals: Vec<(f64, f64)>,
    /// Largest total increase over a single interval.
    pub max_rise: f64,
    /// Absolute rise threshold applied between consecutive samples.
    pub threshold: f64,
    /// Per-step flags: `rising[i]` refers to the step from sample `i` to `i + 1`.
    pub rising: Vec<bool>,
}

impl BackflowReport {
    pub fn has_backflow(&self) -> bool {
        !self.intervals.is_empty()
    }

    /// Whether any backflow interval intersects `[start, end]`.
    pub fn overlaps(&self, start: f64, end: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= end && b >= start)
    }
}

/// Finds every maximal run of consecutive steps that rise by more than `rel_tol·max(1, max value)`.
///
/// A run of rising steps `i..j` yields the interval `[t_i, t_{j+1}]`.
pub fn detect_backflows(trace: &WitnessTrace, rel_tol: f64) -> Result<BackflowReport> {
    if trace.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "backflow detection needs at least 2 samples, got {}",
            trace.len()
        )));
    }
    if !(rel_tol >= 0.0) {
        return Err(Error::Domain(format!(
            "rel_tol must be non-negative, got {rel_tol}"
        )));
    }
    let (t, v) = (trace.times(), trace.values());
    let peak = v.iter().copied().fold(1.0, f64::max);
    let threshold = rel_tol * peak;
    let rising: Vec<bool> = v.windows(2).map(|w| w[1] - w[0] > threshold).collect();

    let mut intervals = Vec::new();
    let mut max_rise: f64 = 0.0;
    let mut i = 0;
    while i < rising.len() {
        if !rising[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < rising.len() && rising[i] {
            i += 1;
        }
        intervals.push((t[start], t[i]));
        max_rise = max_rise.max(v[i] - v[start]);
    }
    Ok(BackflowReport {
        intervals,
        max_rise,
        threshold,
        rising,
    })
}

/// Maximal runs of `true` flags as half-open sample intervals `[t_first, t_after_last)`.
///
/// A run reaching the final sample ends at that sample's time.
pub fn flag_intervals(times: &[f64], flags: &[bool]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < flags.len() && flags[i] {
            i += 1;
        }
        let end = if i < times.len() {
            times[i]
        } else {
            times[times.len() - 1]
        };
        out.push((times[start], end));
    }
    out
}
