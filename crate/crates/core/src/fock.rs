//! Dense linear algebra on truncated single- and two-mode Fock spaces.
//!
//! Two-mode operators use the Kronecker ordering `|n_a, n_b> -> n_a * dim_b + n_b`,
//! so mode `a` is the slow index, matching [`tensor_product`].

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{check_param, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest dense product-space dimension any two-mode routine will materialise.
pub const MAX_PRODUCT_DIM: usize = 4096;

/// Probability mass a truncated state may discard.
pub const TRUNCATION_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-8;

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

fn check_product(dim_a: usize, dim_b: usize) -> Result<usize> {
    let prod = dim_a
        .checked_mul(dim_b)
        .ok_or(Error::DimensionCap(usize::MAX))?;
    if prod > MAX_PRODUCT_DIM {
        Err(Error::DimensionCap(prod))
    } else {
        Ok(prod)
    }
}

/// `diag(0, 1, ..., dim - 1)`.
pub fn number_operator(dim: usize) -> Result<DMatrix<f64>> {
    check_dim(dim)?;
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_fn(
        dim,
        |k, _| k as f64,
    )))
}

/// Truncated lowering operator with `<k-1| a |k> = sqrt(k)`.
pub fn annihilation_operator(dim: usize) -> Result<CMatrix> {
    check_dim(dim)?;
    let mut a = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Kronecker product `a ⊗ b`, refusing results above [`MAX_PRODUCT_DIM`].
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::Shape(format!(
            "tensor_product expects square operands, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    check_product(a.nrows(), b.nrows())?;
    Ok(a.kronecker(b))
}

/// Pure state on a truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    /// Normalises `amps`; fails on fewer than two levels or a zero vector.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState(format!("amplitude norm {norm}")));
        }
        Ok(Self {
            amps: amps.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Number eigenstate `|k>` in a space of `dim` levels.
    pub fn number_state(k: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::Shape(format!("level {k} outside dimension {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let elems = CMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix::from_raw(elems)
    }
}

/// Populations `P_m` of `|2m>` in the untruncated squeezed vacuum, from
/// `P_0 = 1/cosh r` and `P_m / P_{m-1} = tanh^2 r (2m - 1) / (2m)`.
fn squeezed_even_populations(r: f64) -> impl Iterator<Item = f64> {
    let t2 = r.tanh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut m = 0u64;
    std::iter::from_fn(move || {
        let out = p;
        m += 1;
        p *= t2 * (2 * m - 1) as f64 / (2 * m) as f64;
        Some(out)
    })
}

/// Probability mass of the squeezed vacuum outside levels `0..dim`.
pub fn squeezed_vacuum_discarded(r: f64, dim: usize) -> f64 {
    let kept: f64 = squeezed_even_populations(r).take(dim.div_ceil(2)).sum();
    (1.0 - kept).max(0.0)
}

/// Smallest dimension whose discarded squeezed-vacuum mass is at most [`TRUNCATION_TOL`].
pub fn squeezed_vacuum_dim(r: f64) -> usize {
    let mut kept = 0.0;
    for (m, p) in squeezed_even_populations(r.abs()).enumerate() {
        kept += p;
        if 1.0 - kept <= TRUNCATION_TOL {
            return (2 * m + 1).max(2);
        }
    }
    unreachable!("population series is infinite")
}

/// Squeezed vacuum `exp(r (a†² - a²)/2)|0>` truncated to `dim` levels.
///
/// Amplitudes are taken real and non-negative:
/// `psi_{2m} = tanh^m(r) sqrt((2m)!) / (2^m m!) / sqrt(cosh r)`, odd levels vanish.
/// The sign convention does not affect any moment or Fisher information.
pub fn squeezed_vacuum(r: f64, dim: usize) -> Result<FockVector> {
    check_param("r", r, r >= 0.0, "squeezing must be non-negative")?;
    check_dim(dim)?;
    let discarded = squeezed_vacuum_discarded(r, dim);
    if discarded > TRUNCATION_TOL {
        return Err(Error::Truncation {
            discarded,
            suggested_dim: squeezed_vacuum_dim(r),
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (m, p) in squeezed_even_populations(r)
        .take(dim.div_ceil(2))
        .enumerate()
    {
        amps[2 * m] = Complex64::new(p.sqrt(), 0.0);
    }
    FockVector::new(amps)
}

/// Smallest dimension (at least two) with geometric tail mass `q^dim <= TRUNCATION_TOL`,
/// `q = n_T / (n_T + 1)`.
pub fn thermal_dim(n_thermal: f64) -> usize {
    if n_thermal <= 0.0 {
        return 2;
    }
    let q = n_thermal / (n_thermal + 1.0);
    let d = (TRUNCATION_TOL.ln() / q.ln()).ceil() as usize;
    let mut d = d.max(2);
    // guard against rounding in the logarithms
    while q.powi(d as i32) > TRUNCATION_TOL {
        d += 1;
    }
    d
}

/// Thermal state with mean occupation `n_thermal`, renormalised on `dim` levels.
pub fn thermal_state(n_thermal: f64, dim: usize) -> Result<DensityMatrix> {
    check_param(
        "n_T",
        n_thermal,
        n_thermal >= 0.0,
        "thermal occupation must be non-negative",
    )?;
    check_dim(dim)?;
    let q = n_thermal / (n_thermal + 1.0);
    let weights: Vec<f64> = (0..dim).map(|k| q.powi(k as i32)).collect();
    let total: f64 = weights.iter().sum();
    let mut elems = CMatrix::zeros(dim, dim);
    for (k, w) in weights.iter().enumerate() {
        elems[(k, k)] = Complex64::new(w / total, 0.0);
    }
    Ok(DensityMatrix::from_raw(elems))
}

/// Hermitian, unit-trace, positive semidefinite operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elems: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(elems: CMatrix) -> Result<Self> {
        if !elems.is_square() {
            return Err(Error::Shape(format!(
                "density matrix must be square, got {:?}",
                elems.shape()
            )));
        }
        check_dim(elems.nrows())?;
        let herm_err = (&elems - elems.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm_err:.3e})"
            )));
        }
        let rho = Self::from_raw(elems);
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from one")));
        }
        let min_eig = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(rho)
    }

    /// Wraps an operator produced by an invariant-preserving map, symmetrising roundoff.
    pub(crate) fn from_raw(elems: CMatrix) -> Self {
        let herm = (&elems + elems.adjoint()).scale(0.5);
        Self { elems: herm }
    }

    pub fn dim(&self) -> usize {
        self.elems.nrows()
    }

    pub fn elems(&self) -> &CMatrix {
        &self.elems
    }

    pub fn into_inner(self) -> CMatrix {
        self.elems
    }

    pub fn trace(&self) -> f64 {
        self.elems.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.elems.diagonal().iter().map(|c| c.re).collect()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .elems
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn eigen(&self) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
        SymmetricEigen::new(self.elems.clone())
    }

    /// `Tr(rho * op)`.
    pub fn expectation(&self, op: &CMatrix) -> Result<Complex64> {
        if op.shape() != self.elems.shape() {
            return Err(Error::Shape(format!(
                "operator {:?} does not match state {:?}",
                op.shape(),
                self.elems.shape()
            )));
        }
        Ok((&self.elems * op).trace())
    }

    /// `self ⊗ other` on the product space.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        tensor_product(&self.elems, &other.elems).map(Self::from_raw)
    }

    /// Copy embedded into a larger space, padding with empty levels.
    pub fn padded(&self, dim: usize) -> Result<DensityMatrix> {
        if dim < self.dim() {
            return Err(Error::Shape(format!(
                "cannot pad dimension {} down to {dim}",
                self.dim()
            )));
        }
        let mut elems = CMatrix::zeros(dim, dim);
        elems
            .view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.elems);
        Ok(Self { elems })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of a two-mode state with factor dimensions `dims = (dim_a, dim_b)`,
/// keeping the named subsystem.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if da * db != rho.dim() {
        return Err(Error::Shape(format!(
            "factor dimensions {da}x{db} do not match state dimension {}",
            rho.dim()
        )));
    }
    let m = rho.elems();
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(DensityMatrix::from_raw(out))
}

/// Photon-number mean and variance of a probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputMoments {
    pub mean_n: f64,
    pub var_n: f64,
}

impl InputMoments {
    pub fn new(mean_n: f64, var_n: f64) -> Result<Self> {
        check_param(
            "mean_n",
            mean_n,
            mean_n >= 0.0,
            "mean photon number must be non-negative",
        )?;
        check_param(
            "var_n",
            var_n,
            var_n >= 0.0,
            "photon-number variance must be non-negative",
        )?;
        Ok(Self { mean_n, var_n })
    }

    /// Closed-form squeezed-vacuum moments: `<n> = sinh^2 r`, `Δn^2 = 2<n>(<n>+1)`.
    pub fn squeezed_vacuum(r: f64) -> Result<Self> {
        check_param("r", r, r >= 0.0, "squeezing must be non-negative")?;
        let n = r.sinh().powi(2);
        Self::new(n, 2.0 * n * (n + 1.0))
    }

    /// Squeezing parameter of the squeezed vacuum with mean photon number `mean_n`.
    pub fn squeezing_for_mean(mean_n: f64) -> f64 {
        mean_n.sqrt().asinh()
    }
}

pub trait Moments {
    fn moments(&self) -> InputMoments;
}

fn moments_from_populations(p: &[f64]) -> InputMoments {
    let mean: f64 = p.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
    let second: f64 = p.iter().enumerate().map(|(k, w)| (k * k) as f64 * w).sum();
    InputMoments {
        mean_n: mean.max(0.0),
        var_n: (second - mean * mean).max(0.0),
    }
}

impl Moments for FockVector {
    fn moments(&self) -> InputMoments {
        moments_from_populations(&self.populations())
    }
}

impl Moments for DensityMatrix {
    fn moments(&self) -> InputMoments {
        moments_from_populations(&self.populations())
    }
}

/// Two-mode beam splitter `exp(theta (a b† - a† b))` on a truncated product space.
///
/// The generator conserves `n_a + n_b`, so the unitary is stored as one small real
/// orthogonal block per total photon number; [`BeamSplitter::to_dense`] assembles the
/// full product-space matrix.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    dim_a: usize,
    dim_b: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl BeamSplitter {
    pub fn new(theta: f64, dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::up_to_total(theta, dim_a, dim_b, dim_a + dim_b - 2)
    }

    /// Only the manifolds with `n_a + n_b <= max_total` are exponentiated; amplitudes
    /// involving larger totals read as zero.
    pub(crate) fn up_to_total(
        theta: f64,
        dim_a: usize,
        dim_b: usize,
        max_total: usize,
    ) -> Result<Self> {
        check_dim(dim_a)?;
        check_dim(dim_b)?;
        check_param("theta", theta, true, "mixing angle must be finite")?;
        let max_total = max_total.min(dim_a + dim_b - 2);
        let blocks = (0..=max_total)
            .map(|total| {
                let lo = total.saturating_sub(dim_b - 1);
                let hi = total.min(dim_a - 1);
                let size = hi - lo + 1;
                let mut gen = DMatrix::<f64>::zeros(size, size);
                for na in lo..=hi {
                    let nb = total - na;
                    let col = na - lo;
                    // a b† |na, nb> = sqrt(na (nb + 1)) |na - 1, nb + 1>
                    if na > lo {
                        gen[(col - 1, col)] = theta * ((na * (nb + 1)) as f64).sqrt();
                    }
                    // -a† b |na, nb> = -sqrt((na + 1) nb) |na + 1, nb - 1>
                    if na < hi {
                        gen[(col + 1, col)] = -theta * (((na + 1) * nb) as f64).sqrt();
                    }
                }
                gen.exp()
            })
            .collect();
        Ok(Self {
            dim_a,
            dim_b,
            blocks,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// `<out_a, out_b| U |in_a, in_b>`.
    pub fn amplitude(&self, out_a: usize, out_b: usize, in_a: usize, in_b: usize) -> f64 {
        let total = in_a + in_b;
        if out_a + out_b != total
            || total >= self.blocks.len()
            || out_a >= self.dim_a
            || out_b >= self.dim_b
            || in_a >= self.dim_a
            || in_b >= self.dim_b
        {
            return 0.0;
        }
        let lo = total.saturating_sub(self.dim_b - 1);
        self.blocks[total][(out_a - lo, in_a - lo)]
    }

    /// Orthogonal block acting on the manifold `n_a + n_b = total`, indexed by
    /// `n_a - block_offset(total)`.
    pub(crate) fn block(&self, total: usize) -> &DMatrix<f64> {
        &self.blocks[total]
    }

    pub(crate) fn block_offset(&self, total: usize) -> usize {
        total.saturating_sub(self.dim_b - 1)
    }

    /// Dense unitary on the `dim_a * dim_b` product space.
    pub fn to_dense(&self) -> Result<CMatrix> {
        let prod = check_product(self.dim_a, self.dim_b)?;
        let mut u = CMatrix::zeros(prod, prod);
        for (total, block) in self.blocks.iter().enumerate() {
            let lo = total.saturating_sub(self.dim_b - 1);
            for (i, j) in (0..block.nrows()).flat_map(|i| (0..block.ncols()).map(move |j| (i, j))) {
                let (oa, ia) = (lo + i, lo + j);
                let row = oa * self.dim_b + (total - oa);
                let col = ia * self.dim_b + (total - ia);
                u[(row, col)] = Complex64::new(block[(i, j)], 0.0);
            }
        }
        Ok(u)
    }
}

/// Dense beam-splitter unitary `exp(theta (a ⊗ b† - a† ⊗ b))`.
pub fn beam_splitter(theta: f64, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    check_product(dim_a, dim_b)?;
    BeamSplitter::new(theta, dim_a, dim_b)?.to_dense()
}

/// `U ρ U†` for a real `U`, using real matrix products on the two parts of `ρ`.
#[cfg(test)]
pub(crate) fn conjugate_by_real(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ur = u.map(|z| z.re);
    let urt = ur.transpose();
    let re = &ur * rho.map(|z| z.re) * &urt;
    let im = &ur * rho.map(|z| z.im) * &urt;
    re.zip_map(&im, Complex64::new)
}
