//! Dense complex operators: Hermitian propagators, the (anti)commuting
//! split with respect to an involution, and the spectral norm.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::QuadValue;

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 64;

/// Input Hermiticity tolerance for generators.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Tolerance on `Ω² = 1` and `Ω = Ω†`.
pub const INVOLUTION_TOLERANCE: f64 = 1e-12;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} outside 1..={MAX_DIMENSION}")]
    Dimension(usize),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("operator is not an involution (residual {residual:e})")]
    NotInvolution { residual: f64 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A square complex matrix of dimension at most [`MAX_DIMENSION`].
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator{}", self.0)
    }
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self, OperatorError> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(OperatorError::NotSquare { rows, cols });
        }
        if rows == 0 || rows > MAX_DIMENSION {
            return Err(OperatorError::Dimension(rows));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(OperatorError::NonFinite);
        }
        Ok(Self(matrix))
    }

    /// Builds a `d×d` operator from row-major entries.
    pub fn from_rows(d: usize, entries: &[C64]) -> Result<Self, OperatorError> {
        if entries.len() != d * d {
            return Err(OperatorError::Dimension(d));
        }
        Self::new(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn kron(&self, other: &Operator) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Largest entry magnitude of `A − A†`.
    pub fn hermitian_residual(&self) -> f64 {
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// Largest entry magnitude of `U U† − 1`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.dim();
        (&self.0 * self.0.adjoint() - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn check_same_dim(&self, other: &Operator) -> Result<(), OperatorError> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(OperatorError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            })
        }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator(self.0 - rhs.0)
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator(self.0 * C64::new(rhs, 0.0))
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator(&self.0 * rhs)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-self.0)
    }
}

impl QuadValue for Operator {
    fn norm(&self) -> f64 {
        // Frobenius norm bounds the spectral norm and is cheap.
        self.0.norm()
    }
}

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::{Operator, C64};

    const O: C64 = C64::new(0.0, 0.0);
    const I1: C64 = C64::new(1.0, 0.0);
    const IM: C64 = C64::new(0.0, 1.0);

    pub fn x() -> Operator {
        Operator::from_rows(2, &[O, I1, I1, O]).expect("valid 2x2")
    }

    pub fn y() -> Operator {
        Operator::from_rows(2, &[O, -IM, IM, O]).expect("valid 2x2")
    }

    pub fn z() -> Operator {
        Operator::from_rows(2, &[I1, O, O, -I1]).expect("valid 2x2")
    }
}

/// A Hermitian operator with `Ω² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Involution(Operator);

impl Involution {
    pub fn new(op: Operator) -> Result<Self, OperatorError> {
        let residual = op.hermitian_residual();
        if residual > INVOLUTION_TOLERANCE {
            return Err(OperatorError::NotHermitian { residual });
        }
        let squared = &op * &op;
        let residual = squared.max_abs_diff(&Operator::identity(op.dim()));
        if residual > INVOLUTION_TOLERANCE {
            return Err(OperatorError::NotInvolution { residual });
        }
        Ok(Self(op))
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `exp(−iθΩ) = cos θ·1 − i sin θ·Ω`.
    pub fn rotation(&self, theta: f64) -> Operator {
        let d = self.dim();
        Operator(
            DMatrix::<C64>::identity(d, d) * C64::new(theta.cos(), 0.0)
                + &self.0 .0 * C64::new(0.0, -theta.sin()),
        )
    }
}

/// Splits `A` into the part anticommuting with `Ω`, `(A − ΩAΩ)/2`, and the
/// part commuting with it, `(A + ΩAΩ)/2`.
pub fn split_by_involution(
    a: &Operator,
    omega: &Involution,
) -> Result<(Operator, Operator), OperatorError> {
    a.check_same_dim(omega.operator())?;
    let w = omega.operator();
    let conjugated = &(w * a) * w;
    let anti = (a - &conjugated) * 0.5;
    let comm = a - &anti;
    Ok((anti, comm))
}

/// `exp(−iAt)` for Hermitian `A`, via its eigendecomposition.
pub fn hermitian_propagator(a: &Operator, t: f64) -> Result<Operator, OperatorError> {
    let residual = a.hermitian_residual();
    if residual > HERMITIAN_TOLERANCE {
        return Err(OperatorError::NotHermitian { residual });
    }
    let symmetrized = (&a.0 + a.0.adjoint()) * C64::new(0.5, 0.0);
    let eigen = symmetrized.symmetric_eigen();
    let phases = eigen
        .eigenvalues
        .map(|lambda| C64::from_polar(1.0, -lambda * t));
    let q = &eigen.eigenvectors;
    let mut scaled = q.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Operator::new(scaled * q.adjoint())
}

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &Operator) -> f64 {
    a.0.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Parses one complex entry: `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`).
pub fn parse_complex(token: &str) -> Option<C64> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // Split at the last sign that is not leading and not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_str, im_str) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    let re = re_str.parse::<f64>().ok()?;
    Some(C64::new(re, im))
}

/// Parses consecutive matrix blocks. Each block is a line holding the
/// dimension `d` followed by `d` lines of `d` complex entries; blank lines
/// and `#` comments are skipped.
pub fn parse_matrix_blocks(text: &str) -> Result<Vec<Operator>, OperatorError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut out = Vec::new();
    while let Some((line, header)) = lines.next() {
        let d: usize = header.parse().map_err(|_| OperatorError::Parse {
            line,
            reason: format!("expected dimension, found {header:?}"),
        })?;
        if d == 0 || d > MAX_DIMENSION {
            return Err(OperatorError::Parse {
                line,
                reason: format!("dimension {d} outside 1..={MAX_DIMENSION}"),
            });
        }
        let mut entries = Vec::with_capacity(d * d);
        for _ in 0..d {
            let (row_line, row) = lines.next().ok_or(OperatorError::Parse {
                line,
                reason: format!("matrix truncated: expected {d} rows"),
            })?;
            let parsed: Option<Vec<C64>> = row.split_whitespace().map(parse_complex).collect();
            let parsed = parsed.ok_or_else(|| OperatorError::Parse {
                line: row_line,
                reason: "malformed complex entry".into(),
            })?;
            if parsed.len() != d {
                return Err(OperatorError::Parse {
                    line: row_line,
                    reason: format!("expected {d} entries, found {}", parsed.len()),
                });
            }
            entries.extend(parsed);
        }
        out.push(Operator::from_rows(d, &entries)?);
    }
    Ok(out)
}

pub fn parse_matrix_file(text: &str) -> Result<Operator, OperatorError> {
    let mut blocks = parse_matrix_blocks(text)?;
    match blocks.len() {
        1 => Ok(blocks.remove(0)),
        n => Err(OperatorError::Parse {
            line: 0,
            reason: format!("expected one matrix, found {n}"),
        }),
    }
}

/// Writes an operator in the matrix file format.
pub fn write_matrix(op: &Operator) -> String {
    let d = op.dim();
    let mut out = format!("{d}\n");
    for r in 0..d {
        let row: Vec<String> = (0..d)
            .map(|c| {
                let z = op.entry(r, c);
                if z.im.is_sign_negative() {
                    format!("{}-{}i", z.re, -z.im)
                } else {
                    format!("{}+{}i", z.re, z.im)
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
