//! Quantum Brownian motion: bath spectral density, damping and diffusion coefficients, the
//! induced lossy evolution and master-equation propagation of covariance matrices.

mod quadrature;
mod spline;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ode_solvers::{Dopri5, OutputType, System};
use rayon::prelude::*;

use crate::channels::GaussianChannel;
use crate::error::{Error, Result};
use crate::evolutions::{Evolution, LossyProfile};
use crate::symplectic::{is_physical, CovarianceMatrix, PSD_TOL};

pub use quadrature::{integrate, Quadrature};
pub use spline::CubicSpline;

/// Bath and numerical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbmParams {
    pub alpha: f64,
    pub omega0: f64,
    pub omega_c: f64,
    pub s: f64,
    pub temperature: f64,
    pub quad_rel_tol: f64,
    pub ode_rel_tol: f64,
    pub omega_max_factor: f64,
    pub cross_tol: f64,
}

impl QbmParams {
    /// Physical parameters with default numerical settings.
    pub fn new(alpha: f64, omega0: f64, omega_c: f64, s: f64, temperature: f64) -> Result<Self> {
        let p = Self {
            alpha,
            omega0,
            omega_c,
            s,
            temperature,
            quad_rel_tol: 1e-8,
            ode_rel_tol: 1e-9,
            omega_max_factor: 50.0,
            cross_tol: 1e-6,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("omega0", self.omega0),
            ("omega_c", self.omega_c),
            ("s", self.s),
            ("temperature", self.temperature),
            ("quad_rel_tol", self.quad_rel_tol),
            ("ode_rel_tol", self.ode_rel_tol),
            ("omega_max_factor", self.omega_max_factor),
            ("cross_tol", self.cross_tol),
        ];
        let bad: Vec<String> = fields
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "parameters must be positive and finite: {}",
                bad.join(", ")
            )))
        }
    }

    /// Upper limit of the frequency integrals.
    pub fn omega_max(&self) -> f64 {
        self.omega_max_factor * self.omega_c.max(self.omega0).max(self.temperature)
    }
}

/// Lorentz–Drude spectral density `J(ω) = (2ωˢ/π)·ω_c^{3−s}/(ω_c² + ω²)`.
pub fn spectral_density(omega: f64, p: &QbmParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!(
            "frequency must be non-negative, got {omega}"
        )));
    }
    Ok(density(omega, p))
}

fn density(omega: f64, p: &QbmParams) -> f64 {
    2.0 * omega.powf(p.s) / PI * p.omega_c.powf(3.0 - p.s) / (p.omega_c * p.omega_c + omega * omega)
}

/// `J(ω)·coth(ω/2T)`, finite at `ω = 0` for `s ≥ 1`.
fn thermal_density(omega: f64, p: &QbmParams) -> f64 {
    let x = omega / (2.0 * p.temperature);
    let x_coth_x = if x < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    };
    2.0 * p.omega_c.powf(3.0 - p.s) / PI / (p.omega_c * p.omega_c + omega * omega)
        * omega.powf(p.s - 1.0)
        * 2.0
        * p.temperature
        * x_coth_x
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫_0^t sin(ωu) sin(ω₀u) du` and `∫_0^t cos(ωu) cos(ω₀u) du`.
fn time_kernels(omega: f64, omega0: f64, t: f64) -> (f64, f64) {
    let resonant = t * sinc((omega - omega0) * t);
    let sum = omega + omega0;
    let counter = (sum * t).sin() / sum;
    (0.5 * (resonant - counter), 0.5 * (resonant + counter))
}

fn frequency_edges(p: &QbmParams, t: f64) -> Vec<f64> {
    let top = p.omega_max();
    let width = (2.0 * PI / t).min(top);
    let panels = ((top / width).ceil() as usize).clamp(1, 1 << 20);
    let mut edges: Vec<f64> = (0..=panels)
        .map(|k| top * k as f64 / panels as f64)
        .collect();
    edges.extend(
        [p.omega_c, p.omega0]
            .into_iter()
            .filter(|&w| w > 0.0 && w < top),
    );
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

/// `(γ(t), Δ(t))` at unit coupling with their quadrature error bounds.
fn unit_coefficients(p: &QbmParams, t: f64) -> Result<[(f64, f64); 2]> {
    if t == 0.0 {
        return Ok([(0.0, 0.0); 2]);
    }
    let edges = frequency_edges(p, t);
    let gamma = integrate(
        |w| density(w, p) * time_kernels(w, p.omega0, t).0,
        &edges,
        p.quad_rel_tol,
    )?;
    let delta = integrate(
        |w| thermal_density(w, p) * time_kernels(w, p.omega0, t).1,
        &edges,
        p.quad_rel_tol,
    )?;
    Ok([(gamma.value, gamma.error), (delta.value, delta.error)])
}

/// Damping `γ`, diffusion `Δ` and the induced lossy parameters `τ`, `η` on a time grid.
#[derive(Debug, Clone)]
pub struct QbmCoefficients {
    pub grid: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub tau: Vec<f64>,
    pub eta: Vec<f64>,
    pub gamma_error: Vec<f64>,
    pub delta_error: Vec<f64>,
    profile: Arc<QbmProfile>,
}

/// Computes `γ`, `Δ` at every grid time (in parallel) and integrates them to `τ`, `η`.
pub fn coefficients(p: &QbmParams, grid: &[f64]) -> Result<QbmCoefficients> {
    p.validate()?;
    check_grid(grid)?;
    let unit: Vec<[(f64, f64); 2]> = grid
        .par_iter()
        .map(|&t| unit_coefficients(p, t))
        .collect::<Result<_>>()?;
    let a2 = p.alpha * p.alpha;
    QbmCoefficients::from_samples(
        grid.to_vec(),
        unit.iter().map(|c| a2 * c[0].0).collect(),
        unit.iter().map(|c| a2 * c[1].0).collect(),
        unit.iter().map(|c| a2 * c[0].1).collect(),
        unit.iter().map(|c| a2 * c[1].1).collect(),
    )
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "time grid needs at least 2 samples, got {}",
            grid.len()
        )));
    }
    if grid[0] != 0.0
        || grid.iter().any(|t| !t.is_finite())
        || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvariantViolation(
            "time grid must start at 0 and be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

impl QbmCoefficients {
    /// Builds `τ`, `η` from sampled `γ`, `Δ` on `grid`.
    pub fn from_samples(
        grid: Vec<f64>,
        gamma: Vec<f64>,
        delta: Vec<f64>,
        gamma_error: Vec<f64>,
        delta_error: Vec<f64>,
    ) -> Result<Self> {
        check_grid(&grid)?;
        let n = grid.len();
        if [
            gamma.len(),
            delta.len(),
            gamma_error.len(),
            delta_error.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return Err(Error::InvalidDimension(
                "coefficient samples do not match the grid".into(),
            ));
        }
        if gamma.iter().chain(&delta).any(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(
                "non-finite coefficient sample".into(),
            ));
        }
        let profile = QbmProfile::new(&grid, &gamma, &delta)?;
        let tau = grid.iter().map(|&t| profile.tau(t)).collect();
        let eta = profile.eta_knots.clone();
        Ok(Self {
            grid,
            gamma,
            delta,
            tau,
            eta,
            gamma_error,
            delta_error,
            profile: Arc::new(profile),
        })
    }

    /// Same bath with coupling rescaled from `from_alpha` to `to_alpha` (`γ`, `Δ ∝ α²`).
    pub fn rescaled(&self, from_alpha: f64, to_alpha: f64) -> Result<Self> {
        if !(from_alpha > 0.0 && to_alpha > 0.0) {
            return Err(Error::Domain("couplings must be positive".into()));
        }
        let f = (to_alpha / from_alpha).powi(2);
        let scale = |v: &[f64]| v.iter().map(|x| f * x).collect::<Vec<_>>();
        Self::from_samples(
            self.grid.clone(),
            scale(&self.gamma),
            scale(&self.delta),
            scale(&self.gamma_error),
            scale(&self.delta_error),
        )
    }

    /// Interpolated `γ(t)`.
    pub fn gamma_at(&self, t: f64) -> f64 {
        self.profile.gamma.eval(t)
    }

    /// Interpolated `Δ(t)`.
    pub fn delta_at(&self, t: f64) -> f64 {
        self.profile.delta.eval(t)
    }

    pub fn t_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }
}

/// Lossy evolution with `τ = exp(−∫γ/2)`, `η = τ²∫Δ/τ²`, `τ̇ = −γτ/2`, `η̇ = Δ − γη`.
pub fn as_evolution(coeffs: &QbmCoefficients) -> Result<Evolution> {
    Evolution::lossy(SharedProfile(coeffs.profile.clone()), coeffs.t_max())
}

#[derive(Debug)]
struct QbmProfile {
    gamma: CubicSpline,
    delta: CubicSpline,
    eta_knots: Vec<f64>,
}

impl QbmProfile {
    fn new(grid: &[f64], gamma: &[f64], delta: &[f64]) -> Result<Self> {
        let gamma = CubicSpline::new(grid.to_vec(), gamma.to_vec())?;
        let delta = CubicSpline::new(grid.to_vec(), delta.to_vec())?;
        let mut profile = Self {
            gamma,
            delta,
            eta_knots: vec![0.0; grid.len()],
        };
        for (k, &t) in grid.iter().enumerate().skip(1) {
            profile.eta_knots[k] = profile.eta_from(k - 1, t);
        }
        Ok(profile)
    }

    fn big_gamma(&self, t: f64) -> f64 {
        self.gamma.integral(t)
    }

    /// `η(t)` propagated from knot `k ≤ t`.
    fn eta_from(&self, k: usize, t: f64) -> f64 {
        let tk = self.gamma.knots()[k];
        let g_t = self.big_gamma(t);
        let decay = (self.gamma.integral_at_knot(k) - g_t).exp();
        let fresh = quadrature::fixed(
            |u| self.delta.eval(u) * (self.big_gamma(u) - g_t).exp(),
            tk,
            t,
        );
        self.eta_knots[k] * decay + fresh
    }
}

impl LossyProfile for QbmProfile {
    fn tau(&self, t: f64) -> f64 {
        (-0.5 * self.big_gamma(t)).exp()
    }
    fn tau_dot(&self, t: f64) -> f64 {
        -0.5 * self.gamma.eval(t) * self.tau(t)
    }
    fn eta(&self, t: f64) -> f64 {
        let k = self.gamma.piece(t);
        if t == self.gamma.knots()[k] {
            return self.eta_knots[k];
        }
        self.eta_from(k, t)
    }
    fn eta_dot(&self, t: f64) -> f64 {
        self.delta.eval(t) - self.gamma.eval(t) * self.eta(t)
    }
}

struct SharedProfile(Arc<QbmProfile>);

impl LossyProfile for SharedProfile {
    fn tau(&self, t: f64) -> f64 {
        self.0.tau(t)
    }
    fn tau_dot(&self, t: f64) -> f64 {
        self.0.tau_dot(t)
    }
    fn eta(&self, t: f64) -> f64 {
        self.0.eta(t)
    }
    fn eta_dot(&self, t: f64) -> f64 {
        self.0.eta_dot(t)
    }
}

struct MasterEquation {
    profile: Arc<QbmProfile>,
    side: usize,
    target: usize,
}

impl MasterEquation {
    fn on_target(&self, i: usize) -> f64 {
        if i / 2 == self.target {
            1.0
        } else {
            0.0
        }
    }
}

impl System<f64, DVector<f64>> for MasterEquation {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let half_gamma = 0.5 * self.profile.gamma.eval(t);
        let delta = self.profile.delta.eval(t);
        let n = self.side;
        for j in 0..n {
            let pj = self.on_target(j);
            for i in 0..n {
                let pi = self.on_target(i);
                let idx = i + j * n;
                let mut v = -half_gamma * (pi + pj) * y[idx];
                if i == j {
                    v += delta * pi;
                }
                dy[idx] = v;
            }
        }
    }
}

/// Propagates `sigma0` through `dσ/dt = Aσ + σAᵀ + D` with `A = −(γ/2)·I` and `D = Δ·I` on
/// `target_mode` (0-based), returning the state at every grid time.
pub fn evolve_covariance(
    sigma0: &CovarianceMatrix,
    p: &QbmParams,
    grid: &[f64],
    target_mode: usize,
) -> Result<Vec<CovarianceMatrix>> {
    let coeffs = coefficients(p, grid)?;
    propagate(sigma0, &coeffs, target_mode, p.ode_rel_tol, p.cross_tol)
}

/// [`evolve_covariance`] with precomputed coefficients.
///
/// Every output is compared entrywise with the integrated lossy form
/// `(τI ⊕ I)σ₀(τI ⊕ I)ᵀ + ηI ⊕ 0`.
pub fn propagate(
    sigma0: &CovarianceMatrix,
    coeffs: &QbmCoefficients,
    target_mode: usize,
    ode_rel_tol: f64,
    cross_tol: f64,
) -> Result<Vec<CovarianceMatrix>> {
    let modes = sigma0.modes();
    if target_mode >= modes {
        return Err(Error::Index {
            index: target_mode,
            modes,
        });
    }
    if !is_physical(sigma0, PSD_TOL) {
        return Err(Error::InvariantViolation(
            "initial covariance matrix is not physical".into(),
        ));
    }
    if !(ode_rel_tol > 0.0 && cross_tol > 0.0) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }
    let side = 2 * modes;
    let y0 = DVector::from_column_slice(sigma0.data().as_slice());
    let atol = 1e-3 * ode_rel_tol * sigma0.data().amax().max(1.0);
    let mut states = Vec::with_capacity(coeffs.grid.len());
    let mut y = y0;
    states.push(y.clone());
    for w in coeffs.grid.windows(2) {
        let system = MasterEquation {
            profile: coeffs.profile.clone(),
            side,
            target: target_mode,
        };
        let (t0, t1) = (w[0], w[1]);
        let mut solver = Dopri5::new(system, t0, t1, t1 - t0, y, ode_rel_tol, atol);
        solver.set_output(OutputType::Sparse);
        solver
            .integrate()
            .map_err(|e| Error::Integration(format!("{e} (segment [{t0}, {t1}])")))?;
        let (ts, ys) = solver.results().get();
        match (ts.last(), ys.last()) {
            (Some(&end), Some(last)) if (end - t1).abs() <= 1e-12 * t1.max(1.0) => y = last.clone(),
            _ => {
                return Err(Error::Integration(format!(
                    "integration stopped before the end of segment [{t0}, {t1}]"
                )))
            }
        }
        states.push(y.clone());
    }

    coeffs
        .grid
        .iter()
        .zip(coeffs.tau.iter().zip(&coeffs.eta))
        .zip(states)
        .map(|((&t, (&tau, &eta)), y)| {
            let state = CovarianceMatrix::from_symmetrized(DMatrix::from_column_slice(
                side,
                side,
                y.as_slice(),
            ))?;
            let reference = GaussianChannel::isotropic(tau, eta)?
                .embed_local(modes, target_mode)?
                .apply(sigma0)?;
            let deviation = (state.data() - reference.data()).amax();
            if !(deviation <= cross_tol) {
                return Err(Error::Consistency {
                    t,
                    deviation,
                    tolerance: cross_tol,
                });
            }
            Ok(state)
        })
        .collect()
}
