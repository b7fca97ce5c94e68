//! Spectral bounds on the mean-square error of tracking a stochastically fluctuating
//! phase with a stationary Gaussian beam.
//!
//! The bound on the zero-lag inverse Fisher kernel is
//! `(1/2π) ∫ F_C(ω) / (1 + F_C(ω) C_Q(ω; β)) dω`, maximised over the purification
//! parameter `β`. `F_C` is the prior phase power spectrum and `C_Q` the Fourier
//! transform of the variational quantum Fisher kernel of a beam sent through a loss
//! channel of transmission `η`.

use rayon::prelude::*;

use crate::channels::check_eta;
use crate::error::{check_param, Error, Result};
use crate::numerics::{
    integrate_semi_infinite_with_breaks, try_maximize_scalar, QUAD_REL_TOL, SCALAR_TOL,
};

/// Prior phase spectrum `κ^{p-1} / (λ_c^p + |ω|^p)`.
///
/// `lambda_c = 0` is the Wiener-type spectrum `κ^{p-1}/|ω|^p`; `p = 2` with
/// `lambda_c > 0` is the Lorentzian `κ/(λ_c² + ω²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpectrum {
    pub kappa: f64,
    pub p: f64,
    pub lambda_c: f64,
}

impl PriorSpectrum {
    pub fn new(kappa: f64, p: f64, lambda_c: f64) -> Result<Self> {
        check_param(
            "kappa",
            kappa,
            kappa > 0.0,
            "phase-noise scale must be positive",
        )?;
        check_param("p", p, p > 1.0, "spectral exponent must exceed one")?;
        check_param(
            "lambda_c",
            lambda_c,
            lambda_c >= 0.0,
            "cutoff must be non-negative",
        )?;
        Ok(Self { kappa, p, lambda_c })
    }

    pub fn wiener(kappa: f64, p: f64) -> Result<Self> {
        Self::new(kappa, p, 0.0)
    }

    pub fn lorentzian(kappa: f64, lambda_c: f64) -> Result<Self> {
        Self::new(kappa, 2.0, lambda_c)
    }

    pub fn value(&self, omega: f64) -> f64 {
        1.0 / self.inverse(omega)
    }

    /// `1 / F_C(ω)`, finite at `ω = 0` for the Wiener case.
    pub fn inverse(&self, omega: f64) -> f64 {
        (self.lambda_c.powf(self.p) + omega.abs().powf(self.p)) / self.kappa.powf(self.p - 1.0)
    }

    /// Frequency at which `F_C(ω) · level = 1`, ignoring the cutoff.
    fn crossover(&self, level: f64) -> f64 {
        (self.kappa.powf(self.p - 1.0) * level).powf(1.0 / self.p)
    }
}

/// Photon-number spectrum model of a squeezed-vacuum beam from a degenerate OPO.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoSpectrumModel {
    pub r_plus: f64,
    pub flux: f64,
    pub gamma: f64,
}

impl OpoSpectrumModel {
    /// Model with anti-squeezing `r_plus` and photon flux `flux`; the cavity decay rate is
    /// fixed by [`solve_gamma`].
    pub fn new(r_plus: f64, flux: f64) -> Result<Self> {
        let gamma = solve_gamma(r_plus, flux)?;
        Ok(Self {
            r_plus,
            flux,
            gamma,
        })
    }

    /// `R₋ = 1/R₊`.
    pub fn r_minus(&self) -> f64 {
        1.0 / self.r_plus
    }

    /// Normalised pump amplitude `(√R₊ - 1)/(√R₊ + 1)`.
    pub fn x(&self) -> f64 {
        let s = self.r_plus.sqrt();
        (s - 1.0) / (s + 1.0)
    }

    /// Flux implied by the stored decay rate,
    /// `(γ/16) [(R₊ - 1)(1 - x) + (R₋ - 1)(1 + x)]`.
    pub fn implied_flux(&self) -> f64 {
        self.gamma / 16.0 * flux_bracket(self.r_plus)
    }

    /// Lorentzian corner frequencies `(1 ∓ x) γ`.
    pub fn corner_frequencies(&self) -> [f64; 2] {
        let x = self.x();
        [(1.0 - x) * self.gamma, (1.0 + x) * self.gamma]
    }
}

fn flux_bracket(r_plus: f64) -> f64 {
    let s = r_plus.sqrt();
    let x = (s - 1.0) / (s + 1.0);
    (r_plus - 1.0) * (1.0 - x) + (1.0 / r_plus - 1.0) * (1.0 + x)
}

/// Cavity decay rate reproducing the flux:
/// `γ = 16 N / [(R₊ - 1)(1 - x) + (R₋ - 1)(1 + x)]`.
pub fn solve_gamma(r_plus: f64, flux: f64) -> Result<f64> {
    check_param(
        "r_plus",
        r_plus,
        r_plus > 1.0,
        "anti-squeezing level must exceed one",
    )?;
    check_param("flux", flux, flux > 0.0, "photon flux must be positive")?;
    let bracket = flux_bracket(r_plus);
    debug_assert!(bracket > 0.0);
    Ok(16.0 * flux / bracket)
}

/// Fourier transform of `4<Δn(t)Δn(t')>`:
/// `4N + (γ³/16)[(R₊-1)²(1-x)³/((1-x)²γ² + ω²) + (R₋-1)²(1+x)³/((1+x)²γ² + ω²)]`.
pub fn sigma_tilde(omega: f64, model: &OpoSpectrumModel) -> f64 {
    let x = model.x();
    let g = model.gamma;
    let w2 = omega * omega;
    let (a, b) = (1.0 - x, 1.0 + x);
    let anti = (model.r_plus - 1.0).powi(2) * a.powi(3) / (a * a * g * g + w2);
    let sq = (model.r_minus() - 1.0).powi(2) * b.powi(3) / (b * b * g * g + w2);
    4.0 * model.flux + g.powi(3) / 16.0 * (anti + sq)
}

/// Transmission and purification parameter of the loss channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCqParams {
    pub eta: f64,
    pub beta: f64,
}

impl SpectralCqParams {
    pub fn new(eta: f64, beta: f64) -> Result<Self> {
        check_eta(eta)?;
        check_param("beta", beta, true, "purification parameter must be finite")?;
        Ok(Self { eta, beta })
    }

    /// Coefficients `([η + β(1-η)]², 4η(1-η)(1-β)²)` multiplying `Σ̃(ω)` and `N`.
    fn weights(&self) -> (f64, f64) {
        let (eta, beta) = (self.eta, self.beta);
        let signal = eta + beta * (1.0 - eta);
        (
            signal * signal,
            4.0 * (1.0 - beta).powi(2) * eta * (1.0 - eta),
        )
    }
}

/// `C̃_Q(ω; β) = Σ̃(ω)[η + β(1-η)]² + 4N(1-β)²η(1-η)`.
pub fn spectral_cq(omega: f64, model: &OpoSpectrumModel, params: &SpectralCqParams) -> f64 {
    let (ws, wn) = params.weights();
    // avoid 0 * Σ̃ rounding when the spectral weight vanishes exactly
    let spectral = if ws == 0.0 {
        0.0
    } else {
        ws * sigma_tilde(omega, model)
    };
    spectral + wn * model.flux
}

/// `(1/π) ∫_0^∞ dω / (1/F_C(ω) + C(ω))` for an even, non-negative `C`.
///
/// `frequencies` are characteristic scales of `C`, `levels` representative values of
/// it; both seed the breakpoints of the adaptive quadrature.
pub fn mse_bound_with(
    prior: &PriorSpectrum,
    cq: impl Fn(f64) -> f64,
    frequencies: &[f64],
    levels: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let mut breaks: Vec<f64> = frequencies.to_vec();
    breaks.extend(
        levels
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| prior.crossover(c)),
    );
    if prior.lambda_c > 0.0 {
        breaks.push(prior.lambda_c);
    }
    let q = integrate_semi_infinite_with_breaks(
        |w| 1.0 / (prior.inverse(w) + cq(w)),
        0.0,
        &breaks,
        rel_tol,
    )?;
    Ok(q.value / std::f64::consts::PI)
}

/// Bound for a frequency-independent `C̃_Q = c`.
pub fn mse_bound_constant(prior: &PriorSpectrum, c: f64, rel_tol: f64) -> Result<f64> {
    check_param("c", c, c >= 0.0, "Fisher spectrum must be non-negative")?;
    mse_bound_with(prior, |_| c, &[], &[c], rel_tol)
}

/// Bound at a fixed `β` for the OPO beam.
pub fn mse_bound(
    prior: &PriorSpectrum,
    model: &OpoSpectrumModel,
    params: &SpectralCqParams,
) -> Result<f64> {
    mse_bound_tol(prior, model, params, QUAD_REL_TOL)
}

pub fn mse_bound_tol(
    prior: &PriorSpectrum,
    model: &OpoSpectrumModel,
    params: &SpectralCqParams,
    rel_tol: f64,
) -> Result<f64> {
    let (ws, wn) = params.weights();
    let flat = wn * model.flux;
    let levels = [
        ws * sigma_tilde(0.0, model) + flat,
        ws * 4.0 * model.flux + flat,
    ];
    mse_bound_with(
        prior,
        |w| spectral_cq(w, model, params),
        &model.corner_frequencies(),
        &levels,
        rel_tol,
    )
}

/// `β` maximising [`mse_bound`] together with the bound itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedBound {
    pub beta_star: f64,
    pub bound: f64,
    /// Set when the bound does not depend on `β` (lossless beam); `beta_star` is then 1.
    pub flat: bool,
}

/// `β = η/(η-1)`, which removes the `Σ̃` term from `C̃_Q` entirely.
pub fn spectrum_cancelling_beta(eta: f64) -> f64 {
    eta / (eta - 1.0)
}

/// Maximises [`mse_bound`] over `β ∈ [min(η/(η-1), 0) - 10, 1]`.
pub fn mse_bound_optimized(
    prior: &PriorSpectrum,
    model: &OpoSpectrumModel,
    eta: f64,
) -> Result<OptimizedBound> {
    mse_bound_optimized_tol(prior, model, eta, QUAD_REL_TOL)
}

pub fn mse_bound_optimized_tol(
    prior: &PriorSpectrum,
    model: &OpoSpectrumModel,
    eta: f64,
    rel_tol: f64,
) -> Result<OptimizedBound> {
    check_eta(eta)?;
    if eta == 1.0 {
        let bound = mse_bound_tol(prior, model, &SpectralCqParams::new(1.0, 1.0)?, rel_tol)?;
        return Ok(OptimizedBound {
            beta_star: 1.0,
            bound,
            flat: true,
        });
    }
    let lo = spectrum_cancelling_beta(eta).min(0.0) - 10.0;
    let best = try_maximize_scalar(
        |beta| mse_bound_tol(prior, model, &SpectralCqParams { eta, beta }, rel_tol),
        lo,
        1.0,
        SCALAR_TOL,
    )??;
    Ok(OptimizedBound {
        beta_star: if best.flat { 1.0 } else { best.argmax },
        bound: best.max,
        flat: best.flat,
    })
}

/// `D = 4κ^{p-1} η N (17N + 4μ) / (N(17 - η) + 4μ(1 - η))`.
pub fn scaling_construction_d(flux: f64, mu: f64, eta: f64, kappa: f64, p: f64) -> Result<f64> {
    check_param("mu", mu, mu > 0.0, "mu must be positive")?;
    check_param("flux", flux, flux > 0.0, "photon flux must be positive")?;
    check_eta(eta)?;
    let num = 4.0 * kappa.powf(p - 1.0) * eta * flux * (17.0 * flux + 4.0 * mu);
    Ok(num / (flux * (17.0 - eta) + 4.0 * mu * (1.0 - eta)))
}

/// Low-frequency cut `L = 8πN²/μ` paired with [`scaling_construction_d`].
pub fn scaling_construction_l(flux: f64, mu: f64) -> f64 {
    8.0 * std::f64::consts::PI * flux * flux / mu
}

/// Growth rules for `μ` (unit prefactor).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuRule {
    /// `μ = N^{2p/(p+1)}`
    Lossless,
    /// `μ = N^{2 - 1/p}`
    Lossy,
}

impl MuRule {
    pub fn mu(self, flux: f64, p: f64) -> f64 {
        match self {
            MuRule::Lossless => flux.powf(2.0 * p / (p + 1.0)),
            MuRule::Lossy => flux.powf(2.0 - 1.0 / p),
        }
    }
}

/// Anti-squeezing as a function of flux, `R₊ = prefactor · N^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiSqueezingRule {
    pub prefactor: f64,
    pub exponent: f64,
}

impl Default for AntiSqueezingRule {
    fn default() -> Self {
        Self {
            prefactor: 16.0,
            exponent: 1.0 / 3.0,
        }
    }
}

impl AntiSqueezingRule {
    pub fn r_plus(&self, flux: f64) -> f64 {
        self.prefactor * flux.powf(self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Point {
    pub flux: f64,
    pub eta: f64,
    pub bound: f64,
    pub beta_star: f64,
    pub flat: bool,
}

/// One point of the MSE-versus-flux curve with `κ = λ_c = 1`, `p = 2`.
pub fn fig3_point(
    eta: f64,
    flux: f64,
    rule: &AntiSqueezingRule,
    rel_tol: f64,
) -> Result<Fig3Point> {
    let prior = PriorSpectrum::lorentzian(1.0, 1.0)?;
    let model = OpoSpectrumModel::new(rule.r_plus(flux), flux)?;
    let opt = mse_bound_optimized_tol(&prior, &model, eta, rel_tol)?;
    Ok(Fig3Point {
        flux,
        eta,
        bound: opt.bound,
        beta_star: opt.beta_star,
        flat: opt.flat,
    })
}

/// Full curve over `flux_grid`; points are evaluated in parallel and returned in grid
/// order.
pub fn fig3_curve(
    eta: f64,
    flux_grid: &[f64],
    rule: &AntiSqueezingRule,
    rel_tol: f64,
) -> Result<Vec<Fig3Point>> {
    if flux_grid.iter().any(|&n| n.is_nan() || n <= 0.0)
        || flux_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::Domain(
            "flux grid must be positive and strictly ascending".into(),
        ));
    }
    flux_grid
        .par_iter()
        .map(|&flux| fig3_point(eta, flux, rule, rel_tol))
        .collect()
}
