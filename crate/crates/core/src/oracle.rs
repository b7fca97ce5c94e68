//! Brute-force Fisher information on truncated density matrices, plus the simplex
//! minimiser used to evaluate raw variational expressions numerically.
//!
//! Nothing here uses the closed-form bounds; these routines are the reference those
//! bounds are checked against.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{annihilation_operator, CMatrix, DensityMatrix};

/// Eigenvalue support cutoff relative to the largest eigenvalue.
pub const SUPPORT_CUTOFF: f64 = 1e-11;

const PSD_TOL: f64 = 1e-8;

/// Quantum Fisher information of `rho` for a phase imprinted by `exp(-i phi n)`.
///
/// `rho` must be the zero-phase output of a phase-covariant channel, so that
/// `d rho / d phi = -i [n, rho]`. In the eigenbasis `{p_i, |e_i>}` the matrix element
/// of that derivative is `-i (p_j - p_i) <e_i|n|e_j>`, which gives
/// `F = 2 Σ (p_i - p_j)^2 |<e_i|n|e_j>|^2 / (p_i + p_j)` over pairs with
/// `p_i + p_j > SUPPORT_CUTOFF * p_max`.
pub fn qfi_phase_covariant(rho: &DensityMatrix) -> Result<f64> {
    qfi_phase_covariant_with_cutoff(rho, SUPPORT_CUTOFF)
}

pub fn qfi_phase_covariant_with_cutoff(rho: &DensityMatrix, rel_cutoff: f64) -> Result<f64> {
    let eig = rho.eigen();
    let p_min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if p_min < -PSD_TOL {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {p_min:.3e}"
        )));
    }
    let p: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let p_max = p.iter().copied().fold(0.0, f64::max);
    let eps = rel_cutoff * p_max;
    let v = &eig.eigenvectors;
    let d = rho.dim();
    // <e_i| n |e_j>
    let weighted = CMatrix::from_fn(d, d, |k, j| v[(k, j)] * k as f64);
    let n_eig = v.adjoint() * weighted;

    let mut f = 0.0;
    for i in 0..d {
        for j in 0..d {
            let s = p[i] + p[j];
            if s > eps {
                let dp = p[i] - p[j];
                f += dp * dp * n_eig[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(2.0 * f)
}

/// Error-propagation Fisher information `|d<M>/dphi|^2 / Var(M)`.
pub fn classical_fisher_error_propagation(mean_m: f64, var_m: f64, dmean_dphi: f64) -> Result<f64> {
    let _ = mean_m;
    if var_m.is_nan() || var_m <= 0.0 {
        return Err(Error::DegenerateMeasurement(var_m));
    }
    Ok(dmean_dphi * dmean_dphi / var_m)
}

/// Mean, variance and phase derivative of the mean of `M = i(a^2 - a†^2)` in `rho`.
///
/// The derivative uses `d<M>/dphi = Tr(-i[n, rho] M)`; `rho` should have negligible
/// population in its top two levels so the truncated `a^2` is faithful.
pub fn squeezing_quadrature_stats(rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
    let d = rho.dim();
    let a = annihilation_operator(d)?;
    let a2 = &a * &a;
    let i = Complex64::new(0.0, 1.0);
    let m = (&a2 - a2.adjoint()) * i;
    let r = rho.elems();
    let mean = (r * &m).trace().re;
    let second = (r * (&m * &m)).trace().re;
    let n_r = CMatrix::from_fn(d, d, |l, k| r[(l, k)] * (l as f64 - k as f64));
    let dmean = ((n_r * &m).trace() * -i).re;
    Ok((mean, second - mean * mean, dmean))
}

/// Error-propagation Fisher information of `M = i(a^2 - a†^2)` evaluated on `rho`.
pub fn squeezing_quadrature_fisher(rho: &DensityMatrix) -> Result<f64> {
    let (mean, var, dmean) = squeezing_quadrature_stats(rho)?;
    classical_fisher_error_propagation(mean, var, dmean)
}

/// Outcome of [`minimize_raw_cq`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Central finite-difference gradient norm at `argmin`.
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Iteration cap shared by all restarts.
pub const MAX_ITERATIONS: usize = 10_000;

const X_TOL: f64 = 1e-11;
const F_TOL: f64 = 1e-15;

/// Derivative-free Nelder-Mead descent with restarts.
///
/// Each pass runs until the simplex collapses (diameter below `1e-11` relative to the
/// point and value spread below `1e-15` relative), then a fresh simplex is built around
/// the best vertex. The search ends when a restart no longer improves the value.
pub fn minimize_raw_cq(raw_cq: impl Fn(&[f64]) -> f64, start: &[f64]) -> Result<Minimum> {
    let k = start.len();
    if k == 0 {
        return Err(Error::Shape(
            "at least one variational parameter is required".into(),
        ));
    }
    let mut best = start.to_vec();
    let mut best_f = raw_cq(&best);
    let mut iterations = 0;
    let mut step = 1.0;
    loop {
        let (x, fx, used) = nelder_mead_pass(&raw_cq, &best, step, MAX_ITERATIONS - iterations);
        iterations += used;
        let improved = fx < best_f - F_TOL * best_f.abs();
        if fx <= best_f {
            best = x;
            best_f = fx;
        }
        if iterations >= MAX_ITERATIONS || !best_f.is_finite() {
            return Err(Error::OptimizationFailure {
                iterations,
                best_value: best_f,
                best_point: best,
            });
        }
        if !improved {
            break;
        }
        step = 1e-3;
    }
    let grad_norm = fd_gradient(&raw_cq, &best)
        .iter()
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    Ok(Minimum {
        value: best_f,
        argmin: best,
        grad_norm,
        iterations,
    })
}

fn fd_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn nelder_mead_pass(
    f: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    budget: usize,
) -> (Vec<f64>, f64, usize) {
    let k = start.len();
    let mut simplex: Vec<Vec<f64>> = std::iter::once(start.to_vec())
        .chain((0..k).map(|i| {
            let mut v = start.to_vec();
            v[i] += step * start[i].abs().max(1.0);
            v
        }))
        .collect();
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut used = 0;

    let centroid = |simplex: &[Vec<f64>], skip: usize| -> Vec<f64> {
        let mut c = vec![0.0; k];
        for (idx, v) in simplex.iter().enumerate() {
            if idx != skip {
                for (ci, vi) in c.iter_mut().zip(v) {
                    *ci += vi / k as f64;
                }
            }
        }
        c
    };
    let along = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect()
    };

    while used < budget {
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (lo, hi, second) = (order[0], order[k], order[k - 1]);

        let spread = values[hi] - values[lo];
        let scale = simplex[lo].iter().map(|x| x.abs()).fold(1.0, f64::max);
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[lo])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter <= X_TOL * scale
            && spread <= F_TOL * values[lo].abs().max(1e-300) + f64::MIN_POSITIVE
        {
            break;
        }
        if diameter <= 1e-3 * X_TOL * scale {
            // collapsed onto roundoff
            break;
        }
        used += 1;

        let c = centroid(&simplex, hi);
        let refl = along(&c, &simplex[hi], -1.0);
        let fr = f(&refl);
        if fr < values[lo] {
            let exp = along(&c, &simplex[hi], -2.0);
            let fe = f(&exp);
            if fe < fr {
                simplex[hi] = exp;
                values[hi] = fe;
            } else {
                simplex[hi] = refl;
                values[hi] = fr;
            }
        } else if fr < values[second] {
            simplex[hi] = refl;
            values[hi] = fr;
        } else {
            let (contr, fc) = if fr < values[hi] {
                let x = along(&c, &simplex[hi], -0.5);
                let fx = f(&x);
                (x, fx)
            } else {
                let x = along(&c, &simplex[hi], 0.5);
                let fx = f(&x);
                (x, fx)
            };
            if fc < values[hi].min(fr) {
                simplex[hi] = contr;
                values[hi] = fc;
            } else {
                let anchor = simplex[lo].clone();
                for idx in 0..=k {
                    if idx != lo {
                        simplex[idx] = along(&anchor, &simplex[idx], 0.5);
                        values[idx] = f(&simplex[idx]);
                    }
                }
            }
        }
    }
    let lo = (0..=k)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty simplex");
    (simplex[lo].clone(), values[lo], used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::exact_qfi_squeezed;
    use crate::channels::{lossy_thermal_channel, phase_diffusion, NoiseParams};
    use crate::fock::{squeezed_vacuum, squeezed_vacuum_dim, thermal_dim, FockVector, Moments};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn lossy_squeezed(r: f64, eta: f64, n_t: f64) -> DensityMatrix {
        let psi = squeezed_vacuum(r, squeezed_vacuum_dim(r)).unwrap();
        lossy_thermal_channel(&psi.to_density(), eta, n_t, thermal_dim(n_t)).unwrap()
    }

    #[test]
    fn pure_state_gives_four_variance() {
        for r in [0.2, 0.5, 0.9] {
            let psi = squeezed_vacuum(r, squeezed_vacuum_dim(r)).unwrap();
            let f = qfi_phase_covariant(&psi.to_density()).unwrap();
            assert_relative_eq!(f, 4.0 * psi.moments().var_n, max_relative = 1e-10);
        }
        let mix = FockVector::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.5, 0.0),
        ])
        .unwrap();
        assert_relative_eq!(
            qfi_phase_covariant(&mix.to_density()).unwrap(),
            4.0 * mix.moments().var_n,
            max_relative = 1e-12
        );
    }

    #[test]
    fn phase_invariant_states_carry_no_information() {
        let d = 6;
        let mixed = DensityMatrix::new(CMatrix::identity(d, d).scale(1.0 / d as f64)).unwrap();
        assert_eq!(qfi_phase_covariant(&mixed).unwrap(), 0.0);
        let thermal = crate::fock::thermal_state(0.8, 20).unwrap();
        assert_abs_diff_eq!(qfi_phase_covariant(&thermal).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lossy_thermal_squeezed_vacuum_matches_gaussian_formula() {
        let f = qfi_phase_covariant(&lossy_squeezed(0.5, 0.8, 0.5)).unwrap();
        assert_relative_eq!(
            f,
            exact_qfi_squeezed(0.5, 0.8, 0.5).unwrap(),
            max_relative = 1e-3
        );
    }

    #[test]
    fn rejects_non_psd_input() {
        let bad = DensityMatrix::from_raw(CMatrix::from_diagonal(&nalgebra::dvector![
            Complex64::new(1.1, 0.0),
            Complex64::new(-0.1, 0.0)
        ]));
        assert!(matches!(
            qfi_phase_covariant(&bad),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn cutoff_stability() {
        let rho = phase_diffusion(&lossy_squeezed(0.6, 0.9, 0.3), 0.1).unwrap();
        let reference = qfi_phase_covariant(&rho).unwrap();
        for cutoff in [1e-12, 1e-10] {
            let f = qfi_phase_covariant_with_cutoff(&rho, cutoff).unwrap();
            assert_relative_eq!(f, reference, max_relative = 1e-6);
        }
    }

    #[test]
    fn qfi_monotone_in_temperature_and_diffusion() {
        let psi = squeezed_vacuum(0.6, squeezed_vacuum_dim(0.6))
            .unwrap()
            .to_density();
        let mut prev = f64::INFINITY;
        for n_t in [0.0, 0.1, 0.3, 0.6, 1.0] {
            let f = qfi_phase_covariant(
                &NoiseParams::new(0.9, n_t, 0.05)
                    .unwrap()
                    .apply(&psi)
                    .unwrap(),
            )
            .unwrap();
            assert!(f <= prev + 1e-12);
            prev = f;
        }
        let mut prev = f64::INFINITY;
        for lambda in [0.0, 0.05, 0.1, 0.2, 0.4] {
            let f = qfi_phase_covariant(
                &NoiseParams::new(0.9, 0.2, lambda)
                    .unwrap()
                    .apply(&psi)
                    .unwrap(),
            )
            .unwrap();
            assert!(f <= prev + 1e-12);
            prev = f;
        }
    }

    #[test]
    fn error_propagation() {
        assert_eq!(
            classical_fisher_error_propagation(1.0, 2.0, 0.0).unwrap(),
            0.0
        );
        assert_eq!(
            classical_fisher_error_propagation(0.0, 4.0, 2.0).unwrap(),
            1.0
        );
        assert!(matches!(
            classical_fisher_error_propagation(0.0, 0.0, 1.0),
            Err(Error::DegenerateMeasurement(_))
        ));
    }

    #[test]
    fn quadrature_fisher_below_qfi() {
        for (r, eta, lambda) in [(0.3, 0.95, 0.1), (0.7, 0.8, 0.2), (0.5, 1.0, 0.0)] {
            let psi = squeezed_vacuum(r, squeezed_vacuum_dim(r))
                .unwrap()
                .to_density();
            let rho = NoiseParams::new(eta, 0.0, lambda)
                .unwrap()
                .apply(&psi)
                .unwrap();
            let rho = rho.padded(rho.dim() + 4).unwrap();
            let im = squeezing_quadrature_fisher(&rho).unwrap();
            let f = qfi_phase_covariant(&rho).unwrap();
            assert!(im <= f + 1e-9, "I_M {im} > F_Q {f}");
        }
    }

    #[test]
    fn minimises_quadratic_bowl() {
        let m =
            minimize_raw_cq(|x| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2), &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(m.argmin[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.argmin[1], -2.0, epsilon = 1e-8);
        assert!(m.grad_norm <= 1e-7);
    }

    #[test]
    fn minimiser_handles_flat_directions() {
        // third coordinate does not enter
        let m = minimize_raw_cq(
            |x| 3.0 * (x[0] - 0.5).powi(2) + (x[0] + x[1]).powi(2) + 2.0,
            &[4.0, 4.0, 4.0],
        )
        .unwrap();
        assert_relative_eq!(m.value, 2.0, max_relative = 1e-14);
        assert!(m.grad_norm <= 1e-7);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        // unbounded below: the simplex keeps expanding until the value overflows
        match minimize_raw_cq(|x| -x[0].abs() - x[1].abs(), &[0.1, 0.1]) {
            Err(Error::OptimizationFailure {
                best_point,
                iterations,
                ..
            }) => {
                assert_eq!(best_point.len(), 2);
                assert!(iterations > 0 && iterations <= MAX_ITERATIONS);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
