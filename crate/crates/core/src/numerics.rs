//! Numerical kernels shared by the spectral bounds: adaptive Gauss-Kronrod quadrature
//! on finite and semi-infinite ranges, bracketed scalar maximisation, and log-log
//! slope fitting.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::convert::Infallible;

use crate::error::{Error, Result};

/// Default relative tolerance for quadrature.
pub const QUAD_REL_TOL: f64 = 1e-8;
/// Default argmax tolerance for [`maximize_scalar`].
pub const SCALAR_TOL: f64 = 1e-6;
/// Grid points evaluated before golden-section refinement.
pub const PRESCAN_POINTS: usize = 33;

const MAX_SUBINTERVALS: usize = 4000;

// 15-point Kronrod abscissae (positive half) with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// weights of the Gauss nodes XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integral estimate with its (conservative) absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// One G7-K15 panel; the error is the raw Kronrod-Gauss difference.
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Quadrature {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Quadrature {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Finite,
    /// `x = origin + t / (1 - t)`, `t` in `[0, 1)`.
    Tail {
        origin: f64,
    },
}

#[derive(Debug)]
struct Panel {
    piece: usize,
    lo: f64,
    hi: f64,
    est: Quadrature,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive bisection over a list of pieces, always splitting the panel with
/// the largest error estimate.
fn adaptive(
    mut f: impl FnMut(f64) -> f64,
    pieces: &[(Piece, f64, f64)],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    let mut eval = |piece: Piece, lo: f64, hi: f64| match piece {
        Piece::Finite => gk15(&mut f, lo, hi),
        Piece::Tail { origin } => gk15(
            &mut |t: f64| {
                let s = 1.0 - t;
                f(origin + t / s) / (s * s)
            },
            lo,
            hi,
        ),
    };

    let mut heap = BinaryHeap::new();
    for (i, &(piece, lo, hi)) in pieces.iter().enumerate() {
        heap.push(Panel {
            piece: i,
            lo,
            hi,
            est: eval(piece, lo, hi),
        });
    }
    loop {
        let value: f64 = heap.iter().map(|p| p.est.value).sum();
        let error: f64 = heap.iter().map(|p| p.est.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::AccuracyFailure {
                estimate: value,
                error,
            });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::AccuracyFailure {
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::AccuracyFailure {
                estimate: value,
                error,
            });
        }
        let piece = pieces[worst.piece].0;
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            heap.push(Panel {
                piece: worst.piece,
                lo,
                hi,
                est: eval(piece, lo, hi),
            });
        }
    }
}

fn check_tols(rel_tol: f64, abs_tol: f64) -> Result<()> {
    if !(rel_tol >= 0.0 && abs_tol >= 0.0) || (rel_tol == 0.0 && abs_tol == 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            value: rel_tol.min(abs_tol),
            reason: "tolerances must be non-negative and not both zero",
        });
    }
    Ok(())
}

/// `∫_a^b f(x) dx`, refined until the error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate(
    f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    check_tols(rel_tol, abs_tol)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "finite limits required, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    if a > b {
        let q = adaptive(f, &[(Piece::Finite, b, a)], rel_tol, abs_tol)?;
        return Ok(Quadrature {
            value: -q.value,
            ..q
        });
    }
    adaptive(f, &[(Piece::Finite, a, b)], rel_tol, abs_tol)
}

/// `∫_a^∞ f(x) dx` through `x = a + t/(1 - t)`. `f` must decay faster than `1/x`.
pub fn integrate_semi_infinite(
    f: impl FnMut(f64) -> f64,
    a: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    integrate_semi_infinite_with_breaks(f, a, &[], rel_tol)
}

/// As [`integrate_semi_infinite`], with the range first split at `breaks`.
///
/// Segments between breakpoints are integrated directly; only the tail beyond the last
/// breakpoint is mapped onto `[0, 1)`. Breakpoints at or below `a` are ignored.
pub fn integrate_semi_infinite_with_breaks(
    f: impl FnMut(f64) -> f64,
    a: f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Result<Quadrature> {
    check_tols(rel_tol, 0.0)?;
    if !a.is_finite() {
        return Err(Error::Domain(format!(
            "finite lower limit required, got {a}"
        )));
    }
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
    let mut pieces = Vec::with_capacity(points.len() + 1);
    let mut lo = a;
    for &p in &points {
        pieces.push((Piece::Finite, lo, p));
        lo = p;
    }
    pieces.push((Piece::Tail { origin: lo }, 0.0, 1.0));
    adaptive(f, &pieces, rel_tol, f64::MIN_POSITIVE)
}

/// Result of [`maximize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMax {
    pub argmax: f64,
    pub max: f64,
    /// The pre-scan saw no variation; `argmax` is then the bracket midpoint.
    pub flat: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximises `f` on `[lo, hi]`: a [`PRESCAN_POINTS`] grid picks the bracket around
/// the best sample, then golden-section search shrinks it below `tol`.
pub fn maximize_scalar(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<ScalarMax> {
    try_maximize_scalar(|x| Ok::<f64, Infallible>(f(x)), lo, hi, tol)?.map_err(|e| match e {})
}

/// Fallible form of [`maximize_scalar`]; the first error from `f` aborts the search.
///
/// The outer `Result` reports invalid brackets, the inner one errors raised by `f`.
pub fn try_maximize_scalar<E>(
    mut f: impl FnMut(f64) -> std::result::Result<f64, E>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<std::result::Result<ScalarMax, E>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "tolerance must be positive",
        });
    }
    Ok((|| {
        let n = PRESCAN_POINTS - 1;
        let step = (hi - lo) / n as f64;
        let xs: Vec<f64> = (0..=n)
            .map(|i| if i == n { hi } else { lo + i as f64 * step })
            .collect();
        let mut ys = Vec::with_capacity(xs.len());
        for &x in &xs {
            ys.push(f(x)?);
        }
        let (best, &ymax) = ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
        if ymax - ymin <= 1e-12 * ymax.abs().max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo + hi);
            return Ok(ScalarMax {
                argmax: mid,
                max: f(mid)?,
                flat: true,
            });
        }

        let mut a = xs[best.saturating_sub(1)];
        let mut b = xs[(best + 1).min(n)];
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        while b - a > tol {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = f(d)?;
            }
        }
        let (x, y) = if fc >= fd { (c, fc) } else { (d, fd) };
        Ok(if y >= ymax {
            ScalarMax {
                argmax: x,
                max: y,
                flat: false,
            }
        } else {
            ScalarMax {
                argmax: xs[best],
                max: ymax,
                flat: false,
            }
        })
    })())
}

/// Least-squares slope of `ln y` against `ln x`, restricted to `window = (x_lo, x_hi)`
/// (inclusive) when given.
pub fn loglog_slope(xs: &[f64], ys: &[f64], window: Option<(f64, f64)>) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, _)| window.is_none_or(|(lo, hi)| x >= lo && x <= hi))
        .map(|(&x, &y)| (x, y))
        .collect();
    if let Some(&(x, y)) = pts.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Domain(format!(
            "log-log fit needs positive data, got ({x}, {y})"
        )));
    }
    if pts.len() < 3 {
        return Err(Error::Domain(format!(
            "log-log fit needs at least 3 points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x.ln(), sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        let dx = x.ln() - mx;
        (sxy + dx * (y.ln() - my), sxx + dx * dx)
    });
    Ok(sxy / sxx)
}

/// `n` points spaced evenly in `log10` between `lo` and `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}
