//! Gaussian channels `(T, N)` acting on covariance matrices as `σ ↦ TσTᵀ + N`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::symplectic::{
    direct_sum, hermitian_eigenvalues, max_asymmetry, min_hermitian_eigenvalue, symmetrize,
    symplectic_form, two_mode_squeezed, Bipartition, CovarianceMatrix, INV_TOL, SYM_TOL,
};
use crate::witnesses::entanglement_ppt;

/// Default tolerance for complete-positivity verdicts.
pub const CPTP_TOL: f64 = 1e-9;
/// Squeezing of the two-mode probe used by the numerical entanglement-breaking test.
pub const EB_PROBE_SQUEEZING: f64 = 10.0;
/// Largest PPT entanglement still read as "separable" by the numerical entanglement-breaking test.
pub const EB_TOL: f64 = 1e-8;

/// A Gaussian channel on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    modes: usize,
    t: DMatrix<f64>,
    n: DMatrix<f64>,
}

impl GaussianChannel {
    pub fn new(t: DMatrix<f64>, n: DMatrix<f64>) -> Result<Self> {
        let side = t.nrows();
        if side == 0
            || !side.is_multiple_of(2)
            || t.shape() != (side, side)
            || n.shape() != (side, side)
        {
            return Err(Error::InvalidDimension(format!(
                "T ({:?}) and N ({:?}) must be equal square matrices with even side",
                t.shape(),
                n.shape()
            )));
        }
        if t.iter().chain(n.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(
                "channel has non-finite entries".into(),
            ));
        }
        let skew = max_asymmetry(&n);
        if skew > SYM_TOL * n.amax().max(1.0) {
            return Err(Error::InvariantViolation(format!(
                "noise matrix N must be symmetric (max skew {skew:e})"
            )));
        }
        Ok(Self {
            modes: side / 2,
            t,
            n: symmetrize(n),
        })
    }

    pub fn identity(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidDimension(
                "mode count must be positive".into(),
            ));
        }
        Ok(Self {
            modes,
            t: DMatrix::identity(2 * modes, 2 * modes),
            n: DMatrix::zeros(2 * modes, 2 * modes),
        })
    }

    /// Single-mode `(τI, ηI)`; classical noise when `τ = 1`.
    pub fn isotropic(tau: f64, eta: f64) -> Result<Self> {
        Self::new(DMatrix::identity(2, 2) * tau, DMatrix::identity(2, 2) * eta)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn n(&self) -> &DMatrix<f64> {
        &self.n
    }

    /// `(τ, η)` when the channel is single-mode with `T = τI`, `N = ηI` exactly.
    pub fn as_isotropic(&self) -> Option<(f64, f64)> {
        if self.modes != 1 {
            return None;
        }
        let (t, n) = (&self.t, &self.n);
        let iso = t[(0, 1)] == 0.0
            && t[(1, 0)] == 0.0
            && t[(0, 0)] == t[(1, 1)]
            && n[(0, 1)] == 0.0
            && n[(0, 0)] == n[(1, 1)];
        iso.then(|| (t[(0, 0)], n[(0, 0)]))
    }

    /// `σ ↦ TσTᵀ + N`.
    pub fn apply(&self, cov: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        if cov.modes() != self.modes {
            return Err(Error::InvalidDimension(format!(
                "{}-mode channel applied to a {}-mode state",
                self.modes,
                cov.modes()
            )));
        }
        CovarianceMatrix::from_symmetrized(&self.t * cov.data() * self.t.transpose() + &self.n)
    }

    /// `later ∘ earlier = (T″T′, T″N′T″ᵀ + N″)`.
    pub fn compose(later: &Self, earlier: &Self) -> Result<Self> {
        if later.modes != earlier.modes {
            return Err(Error::InvalidDimension(format!(
                "cannot compose {}-mode and {}-mode channels",
                later.modes, earlier.modes
            )));
        }
        Ok(Self {
            modes: later.modes,
            t: &later.t * &earlier.t,
            n: symmetrize(&later.t * &earlier.n * later.t.transpose() + &later.n),
        })
    }

    /// `N - iTΩTᵀ + iΩ ⪰ 0` within `tol`.
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.cptp_margin() >= -tol
    }

    /// Smallest eigenvalue of `N - iTΩTᵀ + iΩ`.
    pub fn cptp_margin(&self) -> f64 {
        let omega = symplectic_form(self.modes).expect("modes >= 1");
        let im = &omega - &self.t * &omega * self.t.transpose();
        min_hermitian_eigenvalue(&self.n, &im)
    }

    /// Single-mode complete positivity in its determinant form: `N ⪰ 0` and `det N ≥ (det T − 1)²`.
    pub fn single_mode_cptp_conditions(&self, tol: f64) -> Result<bool> {
        if self.modes != 1 {
            return Err(Error::UnsupportedChannel(format!(
                "determinant conditions need a single-mode channel, got {} modes",
                self.modes
            )));
        }
        let zero = DMatrix::zeros(2, 2);
        let n_psd = hermitian_eigenvalues(&self.n, &zero)
            .into_iter()
            .all(|l| l >= -tol);
        let gap = self.n.determinant() - (self.t.determinant() - 1.0).powi(2);
        Ok(n_psd && gap >= -tol)
    }

    /// Gaussian incompatibility breaking: `N - iTΩTᵀ ⪰ 0` within `tol`.
    pub fn is_gib(&self, tol: f64) -> bool {
        let omega = symplectic_form(self.modes).expect("modes >= 1");
        let im = -(&self.t * &omega * self.t.transpose());
        min_hermitian_eigenvalue(&self.n, &im) >= -tol
    }

    /// Entanglement breaking test for single-mode channels.
    ///
    /// Isotropic channels use the exact condition `η ≥ τ² + 1`. Any other single-mode channel
    /// is applied to Alice's half of a strongly squeezed two-mode state and declared entanglement
    /// breaking when the PPT entanglement of the output stays below [`EB_TOL`].
    pub fn is_eb(&self) -> Result<bool> {
        if self.modes != 1 {
            return Err(Error::UnsupportedChannel(format!(
                "entanglement-breaking test supports single-mode channels only, got {} modes",
                self.modes
            )));
        }
        if let Some((tau, eta)) = self.as_isotropic() {
            return Ok(eta >= tau * tau + 1.0);
        }
        let probe = two_mode_squeezed(EB_PROBE_SQUEEZING)?;
        let out = self.embed_local(2, 0)?.apply(&probe)?;
        Ok(entanglement_ppt(&out, Bipartition::new(1, 1)?)? <= EB_TOL)
    }

    /// Lifts a single-mode channel to `(T ⊕ I, N ⊕ 0)` acting on mode `target` (0-based)
    /// of a `total_modes`-mode system.
    pub fn embed_local(&self, total_modes: usize, target: usize) -> Result<Self> {
        if self.modes != 1 {
            return Err(Error::UnsupportedChannel(format!(
                "only single-mode channels can be embedded, got {} modes",
                self.modes
            )));
        }
        if target >= total_modes {
            return Err(Error::Index {
                index: target,
                modes: total_modes,
            });
        }
        let side = 2 * total_modes;
        let mut t = DMatrix::identity(side, side);
        let mut n = DMatrix::zeros(side, side);
        t.view_mut((2 * target, 2 * target), (2, 2))
            .copy_from(&self.t);
        n.view_mut((2 * target, 2 * target), (2, 2))
            .copy_from(&self.n);
        Ok(Self {
            modes: total_modes,
            t,
            n,
        })
    }

    /// Direct sum `self ⊕ other` acting on the concatenated modes.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            modes: self.modes + other.modes,
            t: direct_sum(&self.t, &other.t),
            n: direct_sum(&self.n, &other.n),
        }
    }

    /// Bridge map `(T_{t,s}, N_{t,s})` with `later = bridge ∘ earlier`:
    /// `T_{t,s} = T_t T_s⁻¹`, `N_{t,s} = N_t − T_{t,s} N_s T_{t,s}ᵀ`.
    pub fn intermediate_map(later: &Self, earlier: &Self) -> Result<Self> {
        if later.modes != earlier.modes {
            return Err(Error::InvalidDimension(format!(
                "intermediate map between {}-mode and {}-mode channels",
                later.modes, earlier.modes
            )));
        }
        let sv = earlier.t.singular_values();
        let smallest = sv.min();
        if !(smallest > INV_TOL * sv.max()) {
            return Err(Error::NonInvertibleEvolution {
                singular_value: smallest,
            });
        }
        let inv = earlier
            .t
            .clone()
            .try_inverse()
            .ok_or(Error::NonInvertibleEvolution {
                singular_value: smallest,
            })?;
        let bridge = &later.t * inv;
        let n = symmetrize(&later.n - &bridge * &earlier.n * bridge.transpose());
        Ok(Self {
            modes: later.modes,
            t: bridge,
            n,
        })
    }
}
