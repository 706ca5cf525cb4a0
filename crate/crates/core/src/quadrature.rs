//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used as the independent verification path for the closed-form error
//! functionals and for operator-valued integrals in the simulator. The
//! integrand value type only needs vector-space operations and a norm.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "no convergence after {intervals} intervals: error estimate {estimate:e} > {tolerance:e}"
    )]
    NoConvergence {
        intervals: usize,
        estimate: f64,
        tolerance: f64,
    },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
}

/// Values that can be integrated.
pub trait QuadValue:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
}

// Kronrod abscissae (positive half) and weights; odd indices are the
// Gauss-Legendre 7-point nodes.
const XK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gauss_kronrod<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc.clone() * WK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair.clone() * WK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let error = (kronrod.clone() - gauss).norm() * half;
    (kronrod * half, error)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`, bisecting the
/// piece with the largest error estimate until the total estimate is below
/// the tolerance or `max_intervals` pieces are in use.
pub fn integrate<T, F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<T, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    let (value, error) = gauss_kronrod(&f, a, b);
    let mut pieces = vec![Piece { a, b, value, error }];
    loop {
        let total_error: f64 = pieces.iter().map(|p| p.error).sum();
        if total_error <= abs_tol || b == a {
            break;
        }
        if pieces.len() >= max_intervals {
            return Err(QuadratureError::NoConvergence {
                intervals: pieces.len(),
                estimate: total_error,
                tolerance: abs_tol,
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one piece");
        let piece = pieces.swap_remove(worst);
        let mid = 0.5 * (piece.a + piece.b);
        if mid <= piece.a || mid >= piece.b {
            // Interval collapsed to adjacent floats; accept its estimate.
            pieces.push(Piece {
                error: 0.0,
                ..piece
            });
            continue;
        }
        let (lv, le) = gauss_kronrod(&f, piece.a, mid);
        let (rv, re) = gauss_kronrod(&f, mid, piece.b);
        pieces.push(Piece {
            a: piece.a,
            b: mid,
            value: lv,
            error: le,
        });
        pieces.push(Piece {
            a: mid,
            b: piece.b,
            value: rv,
            error: re,
        });
    }
    // Sum in position order so the result does not depend on refinement order.
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut iter = pieces.into_iter();
    let first = iter.next().expect("at least one piece").value;
    Ok(iter.fold(first, |acc, p| acc + p.value))
}

/// Integrates over consecutive sub-intervals given by `breakpoints`,
/// sharing `abs_tol` in proportion to each sub-interval's length.
pub fn integrate_piecewise<T, F>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_intervals: usize,
) -> Result<T, QuadratureError>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let (first, last) = match (breakpoints.first(), breakpoints.last()) {
        (Some(&a), Some(&b)) if breakpoints.len() >= 2 => (a, b),
        _ => {
            return Err(QuadratureError::InvalidInterval {
                a: f64::NAN,
                b: f64::NAN,
            })
        }
    };
    let span = last - first;
    let mut total: Option<T> = None;
    for w in breakpoints.windows(2) {
        let share = if span > 0.0 {
            abs_tol * (w[1] - w[0]) / span
        } else {
            abs_tol
        };
        let part = integrate(&f, w[0], w[1], share, max_intervals)?;
        total = Some(match total {
            None => part,
            Some(acc) => acc + part,
        });
    }
    Ok(total.expect("at least one window"))
}
