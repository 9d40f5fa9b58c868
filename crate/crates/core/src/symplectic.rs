//! Covariance matrices of Gaussian states and the symplectic algebra around them.
//!
//! Quadratures are ordered `(q_1, p_1, q_2, p_2, ...)` and normalised so that the
//! vacuum has covariance matrix `I`. A covariance matrix `σ` is physical iff
//!
//! ```text
//! σ + iΩ ⪰ 0,        Ω = ⊕_k [[0, 1], [-1, 0]]
//! ```
//!
//! First moments are never tracked.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Absolute tolerance on eigenvalues for positive-semidefiniteness tests.
pub const PSD_TOL: f64 = 1e-9;
/// Absolute tolerance on `|m[i][j] - m[j][i]|`.
pub const SYM_TOL: f64 = 1e-10;
/// Relative tolerance used when pairing `±ν` eigenvalues of `iΩM`.
pub const PAIR_TOL: f64 = 1e-7;
/// Relative singular-value guard for block inversions, scaled by the block norm.
pub const INV_TOL: f64 = 1e-12;

/// A real symmetric `2n × 2n` covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps `data` after checking shape and symmetry. Physicality is not checked.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "covariance matrix must be square with even side, got {rows}x{cols}"
            )));
        }
        if let Some(entry) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "non-finite covariance entry {entry}"
            )));
        }
        let skew = max_asymmetry(&data);
        if skew > SYM_TOL {
            return Err(Error::InvariantViolation(format!(
                "covariance matrix is not symmetric (max skew {skew:e})"
            )));
        }
        Ok(Self {
            modes: rows / 2,
            data,
        })
    }

    /// Like [`CovarianceMatrix::new`], additionally requiring `σ + iΩ ⪰ -PSD_TOL`.
    pub fn physical(data: DMatrix<f64>) -> Result<Self> {
        let cov = Self::new(data)?;
        if !is_physical(&cov, PSD_TOL) {
            return Err(Error::InvariantViolation(format!(
                "covariance matrix violates the uncertainty relation (min eigenvalue {:e})",
                min_eigen_with_form(&cov)
            )));
        }
        Ok(cov)
    }

    /// Symmetrises `data` before wrapping it; used for outputs of matrix arithmetic.
    pub(crate) fn from_symmetrized(data: DMatrix<f64>) -> Result<Self> {
        Self::new(symmetrize(data))
    }

    /// `n`-mode vacuum.
    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidDimension(
                "mode count must be positive".into(),
            ));
        }
        Ok(Self {
            modes,
            data: DMatrix::identity(2 * modes, 2 * modes),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    /// The `(A, B, C)` blocks of `[[A, C], [Cᵀ, B]]` for the given bipartition.
    pub fn blocks(&self, part: Bipartition) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        part.check(self)?;
        let a = 2 * part.n_a();
        let b = 2 * part.n_b();
        Ok((
            self.data.view((0, 0), (a, a)).into_owned(),
            self.data.view((a, a), (b, b)).into_owned(),
            self.data.view((0, a), (a, b)).into_owned(),
        ))
    }

    /// Returns the same state with modes reordered: mode `k` of the result is mode `order[k]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let n = self.modes;
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&m| m >= n || std::mem::replace(&mut seen[m], true))
        {
            return Err(Error::InvalidDimension(format!(
                "{order:?} is not a permutation of {n} modes"
            )));
        }
        let data = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            self.data[(2 * order[i / 2] + i % 2, 2 * order[j / 2] + j % 2)]
        });
        Ok(Self { modes: n, data })
    }
}

/// Split of `n_A + n_B` modes: Alice owns the leading `n_A`, Bob the trailing `n_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n_a: usize,
    n_b: usize,
}

impl Bipartition {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidDimension(format!(
                "both parties need at least one mode (got {n_a}|{n_b})"
            )));
        }
        Ok(Self { n_a, n_b })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn modes(&self) -> usize {
        self.n_a + self.n_b
    }

    fn check(&self, cov: &CovarianceMatrix) -> Result<()> {
        if self.modes() != cov.modes() {
            return Err(Error::InvalidDimension(format!(
                "bipartition {}|{} does not match a {}-mode state",
                self.n_a,
                self.n_b,
                cov.modes()
            )));
        }
        Ok(())
    }
}

/// Which block a Schur complement eliminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Complement {
    /// `M_B = B - Cᵀ A⁻¹ C`, the matrix tested for `A → B` steering.
    OfB,
    /// `M_A = A - C B⁻¹ Cᵀ`, the matrix tested for `B → A` steering.
    OfA,
}

/// The `n`-mode symplectic form `⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "symplectic form needs at least one mode".into(),
        ));
    }
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(omega)
}

/// `σ + iΩ ⪰ 0` up to `tol` on the smallest eigenvalue.
pub fn is_physical(cov: &CovarianceMatrix, tol: f64) -> bool {
    min_eigen_with_form(cov) >= -tol
}

fn min_eigen_with_form(cov: &CovarianceMatrix) -> f64 {
    let omega = symplectic_form(cov.modes()).expect("modes >= 1");
    min_hermitian_eigenvalue(cov.data(), &omega)
}

/// Smallest eigenvalue of the Hermitian matrix `re + i·im` (`im` antisymmetric).
pub(crate) fn min_hermitian_eigenvalue(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
    hermitian_eigenvalues(re, im)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of the Hermitian matrix `re + i·im`, unsorted.
pub(crate) fn hermitian_eigenvalues(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Vec<f64> {
    let h = DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex::new(re[(i, j)], im[(i, j)])
    });
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Two-mode squeezed vacuum: `[[cosh 2r·I, sinh 2r·Z], [sinh 2r·Z, cosh 2r·I]]`, `Z = diag(1, -1)`.
pub fn two_mode_squeezed(r: f64) -> Result<CovarianceMatrix> {
    check_squeezing(r)?;
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    #[rustfmt::skip]
    let data = DMatrix::from_row_slice(4, 4, &[
        c,   0.0, s,   0.0,
        0.0, c,   0.0, -s,
        s,   0.0, c,   0.0,
        0.0, -s,  0.0, c,
    ]);
    CovarianceMatrix::new(data)
}

/// Permutation-symmetric GHZ/W state of three equally squeezed beams mixed on a tritter.
///
/// Diagonal blocks `diag((e^{2r} + 2e^{-2r})/3, (e^{-2r} + 2e^{2r})/3)`, off-diagonal blocks
/// `(2/3) sinh(2r) Z`.
pub fn ghz_w_state(r: f64) -> Result<CovarianceMatrix> {
    check_squeezing(r)?;
    let (up, down) = ((2.0 * r).exp(), (-2.0 * r).exp());
    let diag = [(up + 2.0 * down) / 3.0, (down + 2.0 * up) / 3.0];
    let corr = 2.0 / 3.0 * (2.0 * r).sinh();
    let data = DMatrix::from_fn(6, 6, |i, j| {
        let (mi, mj) = (i / 2, j / 2);
        match (i % 2 == j % 2, mi == mj) {
            (false, _) => 0.0,
            (true, true) => diag[i % 2],
            (true, false) => {
                if i % 2 == 0 {
                    corr
                } else {
                    -corr
                }
            }
        }
    });
    CovarianceMatrix::new(data)
}

fn check_squeezing(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!(
            "squeezing must be finite and non-negative, got {r}"
        )));
    }
    Ok(())
}

/// Schur complement `B - Cᵀ A⁻¹ C` ([`Complement::OfB`]) or `A - C B⁻¹ Cᵀ` ([`Complement::OfA`]).
pub fn schur_complement(
    cov: &CovarianceMatrix,
    part: Bipartition,
    side: Complement,
) -> Result<DMatrix<f64>> {
    let (a, b, c) = cov.blocks(part)?;
    let (kept, inverted, corr) = match side {
        Complement::OfB => (b, a, c),
        Complement::OfA => (a, b, c.transpose()),
    };
    let solved = guarded_solve(&inverted, &corr)?;
    Ok(symmetrize(kept - corr.transpose() * solved))
}

/// Solves `m x = rhs`, refusing blocks whose smallest singular value is below `INV_TOL·‖m‖₂`.
pub(crate) fn guarded_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sv = m.singular_values();
    let largest = sv.max();
    let smallest = sv.min();
    let guard = INV_TOL * largest;
    if !(smallest > guard) {
        return Err(Error::SingularBlock {
            singular_value: smallest,
            guard,
        });
    }
    if let Some(chol) = m.clone().cholesky() {
        return Ok(chol.solve(rhs));
    }
    m.clone().lu().solve(rhs).ok_or(Error::SingularBlock {
        singular_value: smallest,
        guard,
    })
}

/// Symplectic eigenvalues of a symmetric `2m × 2m` matrix, ascending.
///
/// Computed as the moduli of the eigenvalues of `iΩM`, which come in `±ν` pairs.
pub fn symplectic_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "expected a square matrix with even side, got {rows}x{cols}"
        )));
    }
    let skew = max_asymmetry(m);
    if skew > SYM_TOL * m.amax().max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "matrix is not symmetric (max skew {skew:e})"
        )));
    }
    if rows == 2 {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        return Ok(vec![det.abs().sqrt()]);
    }
    let omega = symplectic_form(rows / 2)?;
    // eigenvalues of iΩM are i·λ for eigenvalues λ of the real matrix ΩM
    let mut moduli: Vec<f64> = (omega * m)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(f64::total_cmp);

    let scale = moduli.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    moduli
        .chunks_exact(2)
        .map(|pair| {
            let (lo, hi) = (pair[0], pair[1]);
            if hi - lo > PAIR_TOL * hi.max(1e-8 * scale) {
                Err(Error::NumericalDegeneracy(format!(
                    "eigenvalue moduli {lo} and {hi} do not form a ± pair"
                )))
            } else {
                Ok(0.5 * (lo + hi))
            }
        })
        .collect()
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Block-diagonal direct sum `a ⊕ b`.
pub(crate) fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}
