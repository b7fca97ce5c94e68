//! Phase-covariant noise maps on truncated density matrices.
//!
//! All three maps commute with [`phase_shift`], so the derivative of any output with
//! respect to the encoded phase is `-i[n, rho]`; the oracle relies on this.

use num_complex::Complex64;

use crate::error::{check_param, Error, Result};
use crate::fock::{
    thermal_dim, thermal_state, BeamSplitter, CMatrix, DensityMatrix, MAX_PRODUCT_DIM,
    TRUNCATION_TOL,
};

/// Transmission, bath occupation and diffusion strength of the combined channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub eta: f64,
    pub n_thermal: f64,
    pub lambda: f64,
}

impl NoiseParams {
    pub fn new(eta: f64, n_thermal: f64, lambda: f64) -> Result<Self> {
        check_eta(eta)?;
        check_param(
            "n_T",
            n_thermal,
            n_thermal >= 0.0,
            "thermal occupation must be non-negative",
        )?;
        check_param(
            "lambda",
            lambda,
            lambda >= 0.0,
            "diffusion strength must be non-negative",
        )?;
        Ok(Self {
            eta,
            n_thermal,
            lambda,
        })
    }

    /// Loss into the thermal bath, then phase diffusion. The bath is truncated with
    /// [`thermal_dim`].
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let lossy =
            lossy_thermal_channel(rho, self.eta, self.n_thermal, thermal_dim(self.n_thermal))?;
        phase_diffusion(&lossy, self.lambda)
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    check_param(
        "eta",
        eta,
        eta > 0.0 && eta <= 1.0,
        "transmission must lie in (0, 1]",
    )
}

/// `rho_lk -> exp(-i phi (l - k)) rho_lk`, i.e. conjugation by `exp(-i phi n)`.
pub fn phase_shift(rho: &DensityMatrix, phi: f64) -> DensityMatrix {
    let d = rho.dim();
    let m = rho.elems();
    let out = CMatrix::from_fn(d, d, |l, k| {
        m[(l, k)] * Complex64::from_polar(1.0, -phi * (l as f64 - k as f64))
    });
    DensityMatrix::from_raw(out)
}

/// `rho_lk -> exp(-lambda^2 (l - k)^2) rho_lk`.
pub fn phase_diffusion(rho: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    check_param(
        "lambda",
        lambda,
        lambda >= 0.0,
        "diffusion strength must be non-negative",
    )?;
    let d = rho.dim();
    let m = rho.elems();
    let l2 = lambda * lambda;
    let out = CMatrix::from_fn(d, d, |l, k| {
        let dl = l as f64 - k as f64;
        m[(l, k)] * (-l2 * dl * dl).exp()
    });
    Ok(DensityMatrix::from_raw(out))
}

/// Output dimension of [`lossy_thermal_channel`] for a `dim`-level input and bath.
pub fn lossy_output_dim(dim: usize, bath_dim: usize) -> usize {
    dim + bath_dim - 1
}

/// Attenuation by a beam splitter with `cos^2 theta = eta` coupling to a thermal bath
/// of occupation `n_thermal` truncated to `bath_dim` levels, bath traced out.
///
/// The joint dilation `U (rho ⊗ tau) U†` is evaluated manifold by manifold: the
/// beam splitter conserves total photon number and the bath is diagonal, so only
/// the blocks with `n_a + n_b < dim + bath_dim` contribute. The output carries
/// `dim + bath_dim - 1` levels, enough to hold every photon that can reach mode `a`.
pub fn lossy_thermal_channel(
    rho: &DensityMatrix,
    eta: f64,
    n_thermal: f64,
    bath_dim: usize,
) -> Result<DensityMatrix> {
    check_eta(eta)?;
    let bath = thermal_state(n_thermal, bath_dim)?;
    let q = n_thermal / (n_thermal + 1.0);
    let tail = q.powi(bath_dim as i32);
    if tail > TRUNCATION_TOL {
        return Err(Error::Truncation {
            discarded: tail,
            suggested_dim: thermal_dim(n_thermal),
        });
    }
    let ds = rho.dim();
    if ds * bath_dim > MAX_PRODUCT_DIM {
        return Err(Error::DimensionCap(ds * bath_dim));
    }
    let d_out = lossy_output_dim(ds, bath_dim);
    let theta = eta.sqrt().acos();
    let bs = BeamSplitter::up_to_total(theta, d_out, d_out, d_out - 1)?;

    let p_bath = bath.populations();
    let m = rho.elems();
    let mut out = CMatrix::zeros(d_out, d_out);
    for (mb, &pm) in p_bath.iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        for n1 in 0..ds {
            let t1 = n1 + mb;
            let b1 = bs.block(t1);
            debug_assert_eq!(bs.block_offset(t1), 0);
            for n2 in 0..ds {
                let r12 = m[(n1, n2)];
                if r12 == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let t2 = n2 + mb;
                let b2 = bs.block(t2);
                let w = r12 * pm;
                // bath occupation after the splitter must agree: t1 - k1 = t2 - k2
                for k1 in t1.saturating_sub(t2)..=t1 {
                    let k2 = k1 + t2 - t1;
                    out[(k1, k2)] += w * (b1[(k1, n1)] * b2[(k2, n2)]);
                }
            }
        }
    }
    Ok(DensityMatrix::from_raw(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{
        beam_splitter, conjugate_by_real, partial_trace, squeezed_vacuum, squeezed_vacuum_dim,
        FockVector, Moments, Subsystem,
    };
    use crate::numerics::integrate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn random_state(dim: usize, re: &[f64], im: &[f64], mix: &[f64]) -> DensityMatrix {
        // mixture of two pure states built from the supplied coefficients
        let v1: Vec<Complex64> = (0..dim).map(|k| Complex64::new(re[k], im[k])).collect();
        let v2: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::new(im[k] - 0.3, re[k] * mix[k]))
            .collect();
        let p = 0.5 + 0.5 * mix[0].tanh();
        let r1 = FockVector::new(v1).unwrap().to_density();
        let r2 = FockVector::new(v2).unwrap().to_density();
        DensityMatrix::new(r1.elems().scale(p) + r2.elems().scale(1.0 - p)).unwrap()
    }

    #[test]
    fn phase_shift_properties() {
        let rho = squeezed_vacuum(0.4, 20).unwrap().to_density();
        assert_eq!(phase_shift(&rho, 0.0).elems(), rho.elems());
        let shifted = phase_shift(&rho, 0.37);
        assert_eq!(shifted.populations(), rho.populations());
        let back = phase_shift(&shifted, -0.37);
        assert!(max_abs(&(back.elems() - rho.elems())) < 1e-15);
    }

    #[test]
    fn diffusion_identity_and_diagonal() {
        let rho = squeezed_vacuum(0.4, 20).unwrap().to_density();
        assert_eq!(phase_diffusion(&rho, 0.0).unwrap().elems(), rho.elems());
        let out = phase_diffusion(&rho, 0.6).unwrap();
        assert_eq!(out.populations(), rho.populations());
        assert!(phase_diffusion(&rho, -0.1).is_err());
    }

    /// Gaussian average of `U†(phi) rho U(phi)` with density
    /// `exp(-phi^2 / 4 lambda^2) / sqrt(4 pi lambda^2)`, evaluated by quadrature.
    fn gaussian_phase_average(rho: &DensityMatrix, lambda: f64) -> CMatrix {
        let d = rho.dim();
        let sigma = std::f64::consts::SQRT_2 * lambda;
        let norm = 1.0 / (4.0 * std::f64::consts::PI * lambda * lambda).sqrt();
        let weight = move |phi: f64| norm * (-phi * phi / (4.0 * lambda * lambda)).exp();
        let mut factors = Vec::with_capacity(2 * d);
        for delta in -(d as i64 - 1)..=(d as i64 - 1) {
            let x = delta as f64;
            let re = integrate(
                |phi| weight(phi) * (phi * x).cos(),
                -8.0 * sigma,
                8.0 * sigma,
                1e-13,
                1e-13,
            )
            .unwrap();
            let im = integrate(
                |phi| weight(phi) * (phi * x).sin(),
                -8.0 * sigma,
                8.0 * sigma,
                1e-13,
                1e-13,
            )
            .unwrap();
            factors.push(Complex64::new(re.value, im.value));
        }
        let m = rho.elems();
        CMatrix::from_fn(d, d, |l, k| {
            m[(l, k)] * factors[(l as i64 - k as i64 + d as i64 - 1) as usize]
        })
    }

    #[test]
    fn diffusion_matches_phase_average_quadrature() {
        let psi = squeezed_vacuum(0.5, 24).unwrap();
        let rho = lossy_thermal_channel(&psi.to_density(), 0.9, 0.2, thermal_dim(0.2)).unwrap();
        for lambda in [0.05, 0.1, 0.3] {
            let closed = phase_diffusion(&rho, lambda).unwrap();
            let quad = gaussian_phase_average(&rho, lambda);
            assert!(max_abs(&(closed.elems() - quad)) <= 1e-7);
        }
    }

    #[test]
    fn lossless_channel_is_identity() {
        let rho = squeezed_vacuum(0.6, 30).unwrap().to_density();
        let out = lossy_thermal_channel(&rho, 1.0, 0.5, thermal_dim(0.5)).unwrap();
        let padded = rho.padded(out.dim()).unwrap();
        assert!(max_abs(&(out.elems() - padded.elems())) < 1e-14);
    }

    /// Dense two-mode computation: embed, conjugate by the full product-space
    /// unitary, trace out the bath.
    fn dense_lossy(rho: &DensityMatrix, eta: f64, n_t: f64, bath_dim: usize) -> DensityMatrix {
        let d = lossy_output_dim(rho.dim(), bath_dim);
        let joint = rho
            .padded(d)
            .unwrap()
            .tensor(&thermal_state(n_t, bath_dim).unwrap().padded(d).unwrap())
            .unwrap();
        let u = beam_splitter(eta.sqrt().acos(), d, d).unwrap();
        let out = DensityMatrix::from_raw(conjugate_by_real(&u, joint.elems()));
        partial_trace(&out, (d, d), Subsystem::A).unwrap()
    }

    #[test]
    fn block_evaluation_matches_dense_dilation() {
        let rho = squeezed_vacuum(0.3, 14).unwrap().to_density();
        let rho = phase_shift(&rho, 0.4);
        for (eta, n_t) in [(0.8, 0.0), (0.6, 0.3), (0.95, 0.6)] {
            let bd = thermal_dim(n_t);
            let fast = lossy_thermal_channel(&rho, eta, n_t, bd).unwrap();
            let dense = dense_lossy(&rho, eta, n_t, bd);
            assert!(max_abs(&(fast.elems() - dense.elems())) < 1e-12);
        }
    }

    #[test]
    fn vacuum_input_gives_attenuated_thermal_state() {
        let vac = FockVector::number_state(0, 3).unwrap().to_density();
        for (eta, n_t) in [(0.5, 0.5), (0.8, 1.5), (0.2, 0.1)] {
            let bd = thermal_dim(n_t);
            let out = lossy_thermal_channel(&vac, eta, n_t, bd).unwrap();
            let dense = dense_lossy(&vac, eta, n_t, bd);
            assert!(max_abs(&(out.elems() - dense.elems())) < 1e-12);
            let off: f64 = (0..out.dim())
                .flat_map(|i| (0..out.dim()).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| out.elems()[(i, j)].norm())
                .fold(0.0, f64::max);
            assert!(off < 1e-14);
            assert_abs_diff_eq!(out.moments().mean_n, (1.0 - eta) * n_t, epsilon = 1e-6);
        }
    }

    #[test]
    fn mean_photon_number_law() {
        let psi = squeezed_vacuum(0.7, squeezed_vacuum_dim(0.7)).unwrap();
        let n_in = psi.moments().mean_n;
        for (eta, n_t) in [(0.8, 0.5), (0.3, 2.0), (1.0, 3.0)] {
            let out = lossy_thermal_channel(&psi.to_density(), eta, n_t, thermal_dim(n_t)).unwrap();
            assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(
                out.moments().mean_n,
                eta * n_in + (1.0 - eta) * n_t,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn channel_rejects_bad_inputs() {
        let rho = squeezed_vacuum(0.3, 14).unwrap().to_density();
        assert!(lossy_thermal_channel(&rho, 0.0, 0.1, 10).is_err());
        assert!(lossy_thermal_channel(&rho, 1.2, 0.1, 10).is_err());
        assert!(matches!(
            lossy_thermal_channel(&rho, 0.5, 1.0, 5),
            Err(Error::Truncation { suggested_dim, .. }) if suggested_dim == thermal_dim(1.0)
        ));
        assert!(NoiseParams::new(0.5, -1.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn channels_preserve_positivity_and_commute(
            re in prop::collection::vec(-1.0f64..1.0, 6),
            im in prop::collection::vec(-1.0f64..1.0, 6),
            mix in prop::collection::vec(-2.0f64..2.0, 6),
            eta in 0.05f64..1.0,
            n_t in 0.0f64..1.5,
            lambda in 0.0f64..0.8,
            phi in -3.0f64..3.0,
        ) {
            prop_assume!(re.iter().chain(&im).any(|x| x.abs() > 1e-3));
            let rho = random_state(6, &re, &im, &mix);
            let bd = thermal_dim(n_t);

            let loss = lossy_thermal_channel(&rho, eta, n_t, bd).unwrap();
            let diff = phase_diffusion(&rho, lambda).unwrap();
            prop_assert!(loss.eigenvalues()[0] >= -1e-8);
            prop_assert!(diff.eigenvalues()[0] >= -1e-8);
            prop_assert!((loss.trace() - 1.0).abs() <= 1e-8);

            // phase covariance
            let a = lossy_thermal_channel(&phase_shift(&rho, phi), eta, n_t, bd).unwrap();
            let b = phase_shift(&loss, phi);
            prop_assert!(max_abs(&(a.elems() - b.elems())) <= 1e-9);
            let a = phase_diffusion(&phase_shift(&rho, phi), lambda).unwrap();
            let b = phase_shift(&diff, phi);
            prop_assert!(max_abs(&(a.elems() - b.elems())) <= 1e-9);

            // loss and diffusion commute
            let ld = phase_diffusion(&loss, lambda).unwrap();
            let dl = lossy_thermal_channel(&diff, eta, n_t, bd).unwrap();
            prop_assert!(max_abs(&(ld.elems() - dl.elems())) <= 1e-8);
        }
    }
}
