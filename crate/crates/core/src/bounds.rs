//! Closed-form variational bounds for lossy, thermal and diffusive phase estimation,
//! the raw variational expressions they minimise, and the exact Gaussian results
//! for a squeezed-vacuum probe.
//!
//! Every bound is assembled as a reciprocal sum `4 / (1/Δn² + loss + diffusion)`, so
//! vanishing moments give a zero Fisher bound (or an infinite variance bound) rather
//! than `NaN`.

use crate::channels::check_eta;
use crate::error::{check_param, Error, Result};
use crate::fock::InputMoments;

fn check_nt(n_thermal: f64) -> Result<()> {
    check_param(
        "n_T",
        n_thermal,
        n_thermal >= 0.0,
        "thermal occupation must be non-negative",
    )
}

fn check_lambda(lambda: f64) -> Result<()> {
    check_param(
        "lambda",
        lambda,
        lambda >= 0.0,
        "diffusion strength must be non-negative",
    )
}

fn check_r(r: f64) -> Result<()> {
    check_param("r", r, r >= 0.0, "squeezing must be non-negative")
}

/// `(1-η)/η · ((n_T+1)/<n> + n_T/(<n>+1))`; zero when lossless, infinite for an
/// empty probe under loss.
fn loss_penalty(m: &InputMoments, eta: f64, n_thermal: f64) -> f64 {
    if eta == 1.0 {
        return 0.0;
    }
    let n = m.mean_n;
    let bracket = if n == 0.0 {
        f64::INFINITY
    } else {
        (n_thermal + 1.0) / n + n_thermal / (n + 1.0)
    };
    (1.0 - eta) / eta * bracket
}

fn inverse_sum(m: &InputMoments, eta: f64, n_thermal: f64, lambda: f64) -> f64 {
    1.0 / m.var_n + loss_penalty(m, eta, n_thermal) + 8.0 * lambda * lambda
}

/// Minimised purification bound for loss into a bath of occupation `n_thermal`:
/// `4 / [1/Δn² + ((1-η)/η)((n_T+1)/<n> + n_T/(<n>+1))]`.
pub fn cq_min_loss_thermal(m: &InputMoments, eta: f64, n_thermal: f64) -> Result<f64> {
    check_eta(eta)?;
    check_nt(n_thermal)?;
    Ok(4.0 / inverse_sum(m, eta, n_thermal, 0.0))
}

/// Zero-temperature limit `4 / [1/Δn² + (1-η)/(η<n>)]`.
pub fn cq_min_loss_zero_t(m: &InputMoments, eta: f64) -> Result<f64> {
    cq_min_loss_thermal(m, eta, 0.0)
}

/// Loss at zero temperature combined with phase diffusion:
/// `4 / [1/Δn² + (1-η)/(η<n>) + 8λ²]`.
pub fn cq_min_loss_diffusion(m: &InputMoments, eta: f64, lambda: f64) -> Result<f64> {
    check_eta(eta)?;
    check_lambda(lambda)?;
    Ok(4.0 / inverse_sum(m, eta, 0.0, lambda))
}

/// Lower bound on the single-shot phase variance under thermal loss and diffusion:
/// `1/(4Δn²) + ((1-η)/(4η))((n_T+1)/<n> + n_T/(<n>+1)) + 2λ²`.
///
/// Probes without photons or without number fluctuations give `+∞`.
pub fn phase_variance_bound_full(
    m: &InputMoments,
    eta: f64,
    n_thermal: f64,
    lambda: f64,
) -> Result<f64> {
    check_eta(eta)?;
    check_nt(n_thermal)?;
    check_lambda(lambda)?;
    Ok(inverse_sum(m, eta, n_thermal, lambda) / 4.0)
}

/// Auxiliary Gaussian parameters of a squeezed vacuum after thermal loss:
/// `u = η sinh 2r`, `v = η cosh 2r + (1-η)(2n_T+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAux {
    pub u: f64,
    pub v: f64,
    /// `v - u`, kept separately to avoid cancellation at large `r`.
    v_minus_u: f64,
}

impl GaussianAux {
    pub fn new(r: f64, eta: f64, n_thermal: f64) -> Result<Self> {
        check_r(r)?;
        check_eta(eta)?;
        check_nt(n_thermal)?;
        let noise = (1.0 - eta) * (2.0 * n_thermal + 1.0);
        let aux = Self {
            u: eta * (2.0 * r).sinh(),
            v: eta * (2.0 * r).cosh() + noise,
            v_minus_u: eta * (-2.0 * r).exp() + noise,
        };
        if !(aux.det() > 0.0 && aux.det().is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "1 + v^2 - u^2 must be positive and finite",
            });
        }
        Ok(aux)
    }

    /// `1 + v² - u²`.
    pub fn det(&self) -> f64 {
        1.0 + self.v_minus_u * (self.v + self.u)
    }
}

/// Exact QFI of a squeezed vacuum after thermal loss, `4u² / (1 + v² - u²)`.
pub fn exact_qfi_squeezed(r: f64, eta: f64, n_thermal: f64) -> Result<f64> {
    let aux = GaussianAux::new(r, eta, n_thermal)?;
    Ok(4.0 * aux.u * aux.u / aux.det())
}

/// Error-propagation Fisher information of `M = i(a² - a†²)` at its optimal working
/// point, for a squeezed vacuum after zero-temperature loss and phase diffusion:
///
/// `4u² e^{-8λ²} / (1 + v² + u² (1 - 3 e^{-16λ²}) / 2)`.
///
/// The variance term carries `e^{-16λ²}` because the fourth-order coherences of the
/// output are damped by `exp(-λ² 4²)`; this is the value of the quadrature mean and
/// variance at zero phase and agrees with a direct Fock-space evaluation.
pub fn im_opt_squeezed(r: f64, eta: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let aux = GaussianAux::new(r, eta, 0.0)?;
    let damp = (-8.0 * lambda * lambda).exp();
    let u2 = aux.u * aux.u;
    Ok(4.0 * u2 * damp / (aux.det() + 1.5 * u2 * (1.0 - damp * damp)))
}

/// Literal transcription `4u² e^{-8λ²} / (1 + v² + u² (1 - 3e^{-8λ²}) / 2)`.
///
/// Kept for comparison only: for `λ > 0` it exceeds the exact QFI, see
/// [`im_opt_squeezed`].
pub fn im_opt_squeezed_as_printed(r: f64, eta: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let aux = GaussianAux::new(r, eta, 0.0)?;
    let damp = (-8.0 * lambda * lambda).exp();
    let u2 = aux.u * aux.u;
    Ok(4.0 * u2 * damp / (aux.det() + 1.5 * u2 * (1.0 - damp)))
}

/// Purification bound before minimisation, for loss into a thermal bath with the
/// environment generator `α b†b + β c†c + γ (bc + b†c†)`.
///
/// Uses `cos θ₁ = √η` and `cosh θ₂ = √(n_T + 1)`. The overall factor 4 makes the
/// lossless limit equal `4Δn²`.
pub fn raw_cq_loss_thermal(
    m: &InputMoments,
    eta: f64,
    n_thermal: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<f64> {
    check_eta(eta)?;
    check_nt(n_thermal)?;
    let (c1, s1) = (eta.sqrt(), (1.0 - eta).sqrt());
    let (c2, s2) = ((n_thermal + 1.0).sqrt(), n_thermal.sqrt());
    let (s1sq, c1sq) = (s1 * s1, c1 * c1);
    let signal = c1sq + alpha * s1sq;
    let leak_b = c1 * c2 * (1.0 - alpha) - gamma * s2;
    let leak_c = c1 * s2 * (1.0 - alpha) - gamma * c2;
    let bath = (s1sq + alpha * c1sq + beta) * c2 * s2 + gamma * c1 * (c2 * c2 + s2 * s2);
    Ok(4.0
        * (m.var_n * signal * signal
            + m.mean_n * s1sq * leak_b * leak_b
            + (m.mean_n + 1.0) * s1sq * leak_c * leak_c
            + bath * bath))
}

/// Purification bound before minimisation for zero-temperature loss plus diffusion:
/// `4Δn²[η + α(1-η) - β]² + 4<n>(1-α)²η(1-η) + β²/(2λ²)`.
///
/// At `λ = 0` the diffusion environment is absent, so the `β` term is dropped
/// whenever `β = 0` and is infinite otherwise.
pub fn raw_cq_loss_diffusion(
    m: &InputMoments,
    eta: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    check_eta(eta)?;
    check_lambda(lambda)?;
    let signal = eta + alpha * (1.0 - eta) - beta;
    let diffusion = if beta == 0.0 {
        0.0
    } else {
        beta * beta / (2.0 * lambda * lambda)
    };
    Ok(4.0 * m.var_n * signal * signal
        + 4.0 * m.mean_n * (1.0 - alpha).powi(2) * eta * (1.0 - eta)
        + diffusion)
}
