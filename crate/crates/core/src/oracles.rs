//! Closed-form symplectic eigenvalues and steerability expansions for noisy `σ₂,ᵣ` and `σ₃,ᵣ`.
//!
//! All functions take the effective noise `η_eff = η/τ²`, which covers lossy channels as well
//! as classical noise (`τ = 1`).

/// `η/τ²`.
pub fn effective_noise(tau: f64, eta: f64) -> f64 {
    eta / (tau * tau)
}

/// `ν₋ = (η cosh 2r + 1)/(η + cosh 2r)` for the two-mode state.
pub fn nu_minus_2mode(r: f64, eta_eff: f64) -> f64 {
    let c = (2.0 * r).cosh();
    (eta_eff * c + 1.0) / (eta_eff + c)
}

/// `∂ν₋/∂η = (cosh² 2r − 1)/(η + cosh 2r)²` for the two-mode state.
pub fn nu_minus_2mode_deta(r: f64, eta_eff: f64) -> f64 {
    let c = (2.0 * r).cosh();
    (c * c - 1.0) / (eta_eff + c).powi(2)
}

fn three_mode_parts(r: f64, h: f64) -> (f64, f64, f64, f64) {
    let e2 = (2.0 * r).exp();
    let e4 = e2 * e2;
    let n1 = (e4 + 2.0) * h + 3.0 * e2;
    let n2 = e2 * (2.0 * e2 * h + 3.0) + h;
    let d1 = (e4 + 2.0) * e2 * h + 2.0 * e4 + 1.0;
    let d2 = e2 * (e4 + 2.0 * e2 * h + 2.0) + h;
    (e2 * n1, n2, d1, d2)
}

/// Smallest symplectic eigenvalue of `M_B` for `σ₃,ᵣ` with noise on one of Alice's two modes.
pub fn nu_minus_3mode(r: f64, eta_eff: f64) -> f64 {
    let (n1, n2, d1, d2) = three_mode_parts(r, eta_eff);
    ((n1 / d1) * (n2 / d2)).sqrt()
}

/// `∂ν₋/∂η` of [`nu_minus_3mode`].
pub fn nu_minus_3mode_deta(r: f64, eta_eff: f64) -> f64 {
    let h = eta_eff;
    let e2 = (2.0 * r).exp();
    let e4 = e2 * e2;
    let e8 = e4 * e4;
    let e12 = e8 * e4;
    let poly = 4.0 * e2 * (2.0 * e8 + 5.0 * e4 + 2.0) * h
        + 9.0 * (e8 + e4)
        + (2.0 * e12 + 7.0 * e8 + 7.0 * e4 + 2.0) * h * h;
    let (_, _, d1, d2) = three_mode_parts(r, h);
    e2 * (e4 - 1.0).powi(2) * poly / (2.0 * d1 * d1 * nu_minus_3mode(r, h) * d2 * d2)
}

/// `max{0, −ln ν}`.
pub fn steerability_from_nu(nu: f64) -> f64 {
    (-nu.ln()).max(0.0)
}

/// `1 − 16r²/(9(η + 1))`, the small-squeezing expansion of [`nu_minus_3mode`].
pub fn nu_minus_3mode_small_r(r: f64, eta_eff: f64) -> f64 {
    1.0 - 16.0 * r * r / (9.0 * (eta_eff + 1.0))
}

/// `1 − 2r²(1 − η)/(1 + η)`, the small-squeezing expansion of [`nu_minus_2mode`].
pub fn nu_minus_2mode_small_r(r: f64, eta_eff: f64) -> f64 {
    1.0 - 2.0 * r * r * (1.0 - eta_eff) / (1.0 + eta_eff)
}

/// `½ ln(e^{2r}/(2η))`, the large-squeezing form of three-mode steerability.
pub fn steerability_large_r_3mode(r: f64, eta_eff: f64) -> f64 {
    0.5 * ((2.0 * r).exp() / (2.0 * eta_eff)).ln()
}

/// `max{0, ln(1/η)}`, the large-squeezing form of two-mode steerability.
pub fn steerability_large_r_2mode(eta_eff: f64) -> f64 {
    (-eta_eff.ln()).max(0.0)
}
