//! Time-dependent channel families, CP-divisibility verdicts and backflow sign predicates.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::channels::GaussianChannel;
use crate::error::{Error, Result};
use crate::symplectic::{hermitian_eigenvalues, symmetrize, symplectic_form, INV_TOL};

/// Default tolerance on criterion eigenvalues; boundary values count as Markovian.
pub const CP_TOL: f64 = 1e-9;

/// `τ(t)`, `η(t)` and their derivatives for an isotropic single-mode family `(τI, ηI)`.
pub trait LossyProfile: Send + Sync {
    fn tau(&self, t: f64) -> f64;
    fn tau_dot(&self, t: f64) -> f64;
    fn eta(&self, t: f64) -> f64;
    fn eta_dot(&self, t: f64) -> f64;
}

/// A general family `t ↦ (T_t, N_t)` with analytic derivatives.
pub trait ChannelFamily: Send + Sync {
    fn channel(&self, t: f64) -> Result<GaussianChannel>;
    /// `(Ṫ_t, Ṅ_t)`.
    fn derivative(&self, t: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)>;
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// [`LossyProfile`] assembled from four closures.
#[derive(Clone)]
pub struct FnProfile {
    tau: ScalarFn,
    tau_dot: ScalarFn,
    eta: ScalarFn,
    eta_dot: ScalarFn,
}

impl FnProfile {
    pub fn new(
        tau: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tau_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            tau: Arc::new(tau),
            tau_dot: Arc::new(tau_dot),
            eta: Arc::new(eta),
            eta_dot: Arc::new(eta_dot),
        }
    }
}

impl LossyProfile for FnProfile {
    fn tau(&self, t: f64) -> f64 {
        (self.tau)(t)
    }
    fn tau_dot(&self, t: f64) -> f64 {
        (self.tau_dot)(t)
    }
    fn eta(&self, t: f64) -> f64 {
        (self.eta)(t)
    }
    fn eta_dot(&self, t: f64) -> f64 {
        (self.eta_dot)(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvolutionKind {
    ClassicalNoise,
    Lossy,
    Custom,
}

#[derive(Clone)]
enum Form {
    Lossy(Arc<dyn LossyProfile>),
    Custom(Arc<dyn ChannelFamily>),
}

/// Values of a lossy family at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossySample {
    pub tau: f64,
    pub tau_dot: f64,
    pub eta: f64,
    pub eta_dot: f64,
}

/// CP-divisibility verdict at one time.
///
/// For lossy families `lambda_plus`/`lambda_minus` are `η̇ − 2(η ± 1)τ̇/τ`. For custom families
/// they are the largest and smallest eigenvalues of the general criterion matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmVerdict {
    pub t: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub markovian: bool,
}

/// Which σ-initialization a steering predicate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setup {
    TwoMode,
    ThreeMode,
}

/// A dynamical map `t ↦ (T_t, N_t)` on `[0, t_max]` starting from the identity.
#[derive(Clone)]
pub struct Evolution {
    kind: EvolutionKind,
    form: Form,
    t_max: f64,
    modes: usize,
}

impl fmt::Debug for Evolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evolution")
            .field("kind", &self.kind)
            .field("t_max", &self.t_max)
            .field("modes", &self.modes)
            .finish_non_exhaustive()
    }
}

const START_TOL: f64 = 1e-12;

impl Evolution {
    /// Lossy family `(τ(t)I, η(t)I)`; requires `τ(0) = 1`, `η(0) = 0`.
    pub fn lossy(profile: impl LossyProfile + 'static, t_max: f64) -> Result<Self> {
        Self::lossy_kind(Arc::new(profile), t_max, EvolutionKind::Lossy)
    }

    /// Classical noise `(I, η(t)I)`.
    pub fn classical_noise(
        eta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eta_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t_max: f64,
    ) -> Result<Self> {
        let profile = FnProfile::new(|_| 1.0, |_| 0.0, eta, eta_dot);
        Self::lossy_kind(Arc::new(profile), t_max, EvolutionKind::ClassicalNoise)
    }

    fn lossy_kind(profile: Arc<dyn LossyProfile>, t_max: f64, kind: EvolutionKind) -> Result<Self> {
        check_t_max(t_max)?;
        let (tau0, eta0) = (profile.tau(0.0), profile.eta(0.0));
        if (tau0 - 1.0).abs() > START_TOL || eta0.abs() > START_TOL {
            return Err(Error::InvariantViolation(format!(
                "evolution must start at the identity, got tau(0) = {tau0}, eta(0) = {eta0}"
            )));
        }
        Ok(Self {
            kind,
            form: Form::Lossy(profile),
            t_max,
            modes: 1,
        })
    }

    /// General family; requires `(T_0, N_0) = (I, 0)`.
    pub fn custom(family: impl ChannelFamily + 'static, t_max: f64) -> Result<Self> {
        check_t_max(t_max)?;
        let start = family.channel(0.0)?;
        let modes = start.modes();
        let id = DMatrix::<f64>::identity(2 * modes, 2 * modes);
        let dev = (start.t() - id).amax().max(start.n().amax());
        if dev > START_TOL {
            return Err(Error::InvariantViolation(format!(
                "evolution must start at the identity channel (deviation {dev:e})"
            )));
        }
        Ok(Self {
            kind: EvolutionKind::Custom,
            form: Form::Custom(Arc::new(family)),
            t_max,
            modes,
        })
    }

    pub fn kind(&self) -> EvolutionKind {
        self.kind
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.t_max) {
            return Err(Error::Domain(format!(
                "t = {t} outside the evolution domain [0, {}]",
                self.t_max
            )));
        }
        Ok(())
    }

    /// `(τ, τ̇, η, η̇)` at `t` for lossy-form evolutions.
    pub fn lossy_sample(&self, t: f64) -> Result<LossySample> {
        self.check_time(t)?;
        match &self.form {
            Form::Lossy(p) => Ok(LossySample {
                tau: p.tau(t),
                tau_dot: p.tau_dot(t),
                eta: p.eta(t),
                eta_dot: p.eta_dot(t),
            }),
            Form::Custom(_) => Err(Error::UnsupportedForm(
                "custom evolutions have no (tau, eta) parametrisation".into(),
            )),
        }
    }

    fn checked_lossy_sample(&self, t: f64) -> Result<LossySample> {
        let s = self.lossy_sample(t)?;
        if !(s.tau > 0.0) {
            return Err(Error::DegenerateEvolution { t, tau: s.tau });
        }
        Ok(s)
    }

    /// `(T_t, N_t)`; the identity channel at `t = 0`.
    pub fn channel_at(&self, t: f64) -> Result<GaussianChannel> {
        self.check_time(t)?;
        if t == 0.0 {
            return GaussianChannel::identity(self.modes);
        }
        match &self.form {
            Form::Lossy(p) => GaussianChannel::isotropic(p.tau(t), p.eta(t)),
            Form::Custom(f) => f.channel(t),
        }
    }

    /// `(Ṫ_t, Ṅ_t)`.
    pub fn derivative_at(&self, t: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        self.check_time(t)?;
        match &self.form {
            Form::Lossy(p) => Ok((
                DMatrix::identity(2, 2) * p.tau_dot(t),
                DMatrix::identity(2, 2) * p.eta_dot(t),
            )),
            Form::Custom(f) => f.derivative(t),
        }
    }

    /// Eigenvalues, ascending, of `Ṅ − (ṪT⁻¹(iΩ+N) + (iΩ+N)T⁻ᵀṪᵀ)`.
    ///
    /// The evolution is CP-divisible at `t` iff all are non-negative.
    pub fn criterion_eigenvalues(&self, t: f64) -> Result<Vec<f64>> {
        let ch = self.channel_at(t)?;
        let (t_dot, n_dot) = self.derivative_at(t)?;
        let sv = ch.t().singular_values();
        if !(sv.min() > INV_TOL * sv.max()) {
            return Err(Error::NonInvertibleEvolution {
                singular_value: sv.min(),
            });
        }
        let inv = ch
            .t()
            .clone()
            .try_inverse()
            .ok_or(Error::NonInvertibleEvolution {
                singular_value: sv.min(),
            })?;
        let k = t_dot * inv;
        let omega = symplectic_form(self.modes)?;
        let re = symmetrize(n_dot - (&k * ch.n() + ch.n() * k.transpose()));
        let im = -(&k * &omega + &omega * k.transpose());
        let mut eig = hermitian_eigenvalues(&re, &im);
        eig.sort_by(f64::total_cmp);
        Ok(eig)
    }

    /// CP-divisibility verdict at `t`: closed-form `λ±` for lossy families, the general
    /// criterion otherwise.
    pub fn is_markovian_at(&self, t: f64, cp_tol: f64) -> Result<NmVerdict> {
        let (lambda_plus, lambda_minus) = match &self.form {
            Form::Lossy(_) => {
                let s = self.checked_lossy_sample(t)?;
                let rate = s.tau_dot / s.tau;
                (
                    s.eta_dot - 2.0 * (s.eta + 1.0) * rate,
                    s.eta_dot - 2.0 * (s.eta - 1.0) * rate,
                )
            }
            Form::Custom(_) => {
                let eig = self.criterion_eigenvalues(t)?;
                (eig[eig.len() - 1], eig[0])
            }
        };
        Ok(NmVerdict {
            t,
            lambda_plus,
            lambda_minus,
            markovian: lambda_plus.min(lambda_minus) >= -cp_tol,
        })
    }

    /// Sign condition for a steering backflow: `η̇ − 2ητ̇/τ < 0`, and additionally `η < τ²`
    /// for the two-mode setup.
    pub fn steering_backflow_predicate(&self, t: f64, setup: Setup) -> Result<bool> {
        let s = self.checked_lossy_sample(t)?;
        let decreasing = s.eta_dot - 2.0 * s.eta * s.tau_dot / s.tau < 0.0;
        Ok(match setup {
            Setup::ThreeMode => decreasing,
            Setup::TwoMode => decreasing && s.eta < s.tau * s.tau,
        })
    }

    /// Small-squeezing sign condition for a two-mode entanglement backflow:
    /// `η − τ² − 1 < 0` and `η̇ − 2(η − 1)τ̇/τ < 0`.
    pub fn entanglement_backflow_predicate_2mode(&self, t: f64) -> Result<bool> {
        let s = self.checked_lossy_sample(t)?;
        Ok(s.eta - s.tau * s.tau - 1.0 < 0.0
            && s.eta_dot - 2.0 * (s.eta - 1.0) * s.tau_dot / s.tau < 0.0)
    }
}

fn check_t_max(t_max: f64) -> Result<()> {
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    Ok(())
}

/// Classical noise with `η(t) = t²/(t² − 2t + 2)`: rising on `[0, 2]`, falling towards 1 after.
pub fn noise_profile_rational() -> Evolution {
    rational(1.0)
}

/// Twice [`noise_profile_rational`].
pub fn noise_profile_rational_scaled() -> Evolution {
    rational(2.0)
}

fn rational(scale: f64) -> Evolution {
    Evolution::classical_noise(
        move |t| {
            let d = t * t - 2.0 * t + 2.0;
            scale * t * t / d
        },
        move |t| {
            let d = t * t - 2.0 * t + 2.0;
            scale * 2.0 * t * (2.0 - t) / (d * d)
        },
        f64::INFINITY,
    )
    .expect("rational profile starts at the identity")
}

/// Classical noise `η(t) = η₀(1 − cos 2πt)/2`.
pub fn noise_profile_oscillating(eta0: f64) -> Result<Evolution> {
    if !(eta0 >= 0.0 && eta0.is_finite()) {
        return Err(Error::Domain(format!(
            "eta0 must be finite and non-negative, got {eta0}"
        )));
    }
    use std::f64::consts::PI;
    Evolution::classical_noise(
        move |t| 0.5 * eta0 * (1.0 - (2.0 * PI * t).cos()),
        move |t| eta0 * PI * (2.0 * PI * t).sin(),
        f64::INFINITY,
    )
}

/// `n` uniform samples `t_i = t_max·i/(n − 1)`.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "grid needs at least 2 samples, got {n}"
        )));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!(
            "t_max must be positive and finite, got {t_max}"
        )));
    }
    let last = (n - 1) as f64;
    Ok((0..n).map(|i| t_max * i as f64 / last).collect())
}

/// Central difference with step `1e-6·max(1, |t|)`. Intended for tests only.
pub fn central_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-6 * t.abs().max(1.0);
    (f(t + h) - f(t - h)) / (2.0 * h)
}
