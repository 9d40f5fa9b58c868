//! Closed-form symplectic eigenvalues against the full numeric pipeline.

use gaussnm_core::oracles::{effective_noise, nu_minus_2mode, nu_minus_3mode};
use gaussnm_core::symplectic::{schur_complement, Complement};
use gaussnm_core::{symplectic_eigenvalues, GaussianChannel, Result};
use rayon::prelude::*;

use crate::config::StateKind;
use crate::runner::initial_state;

pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub points: usize,
    pub max_deviation: f64,
    /// `(state, r, tau, eta)` of the largest deviation.
    pub worst: (StateKind, f64, f64, f64),
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= ORACLE_TOL
    }
}

fn steps(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|k| from + step * k as f64).collect()
}

/// Smallest symplectic eigenvalue of the Schur complement after a local lossy channel.
pub fn pipeline_nu(kind: StateKind, r: f64, tau: f64, eta: f64) -> Result<f64> {
    let (state, part) = initial_state(kind, r)?;
    let out = GaussianChannel::isotropic(tau, eta)?
        .embed_local(state.modes(), 0)?
        .apply(&state)?;
    let m = schur_complement(&out, part, Complement::OfB)?;
    Ok(symplectic_eigenvalues(&m)?[0])
}

/// Sweeps `r ∈ {0.25..3}`, `η ∈ {0..5}` (step 0.25) and `τ ∈ {0.25..1}` (step 0.25) for both states.
pub fn oracle_equivalence() -> Result<OracleReport> {
    let mut cases = Vec::new();
    for kind in [StateKind::TwoMode, StateKind::ThreeMode] {
        for r in steps(0.25, 3.0, 0.25) {
            for eta in steps(0.0, 5.0, 0.25) {
                for tau in steps(0.25, 1.0, 0.25) {
                    cases.push((kind, r, tau, eta));
                }
            }
        }
    }
    let deviations = cases
        .par_iter()
        .map(|&(kind, r, tau, eta)| {
            let h = effective_noise(tau, eta);
            let closed = match kind {
                StateKind::TwoMode => nu_minus_2mode(r, h),
                StateKind::ThreeMode => nu_minus_3mode(r, h),
            };
            Ok((closed - pipeline_nu(kind, r, tau, eta)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (k, &max_deviation) = deviations
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is not empty");
    Ok(OracleReport {
        points: cases.len(),
        max_deviation,
        worst: cases[k],
    })
}
