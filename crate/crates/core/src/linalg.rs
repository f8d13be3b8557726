//! Dense complex matrices sized for desk-scale quantum work.
//!
//! Everything here is self-contained: Hermitian eigenvalues come from cyclic
//! complex Jacobi rotations and ranks from a one-sided (Hestenes) Jacobi SVD.
//! Matrices are stored row-major.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum dimension (rows or columns) a Kronecker product may produce.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Largest entrywise asymmetry absorbed by symmetrization when building a
/// [`HermitianMatrix`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self
                .row(r)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(d, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidMatrix("columns of unequal length".into()));
        }
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                m.data[i * cols + j] = z;
            }
        }
        Ok(m)
    }

    /// The rank-1 operator |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, &a) in u.iter().enumerate() {
            for (j, &b) in v.iter().enumerate() {
                m.data[i * v.len() + j] = a * b.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        self.data[r * self.cols + c] = z;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidMatrix(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::InvalidMatrix(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::InvalidMatrix(format!(
                "vector of length {} for a {}-column matrix",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Kronecker product `self ⊗ other` with the default dimension cap.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_capped(other, DEFAULT_DIMENSION_CAP)
    }

    pub fn tensor_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let rows = self
            .rows
            .checked_mul(other.rows)
            .filter(|&r| r <= cap)
            .ok_or(Error::DimensionCap { cap })?;
        let cols = self
            .cols
            .checked_mul(other.cols)
            .filter(|&c| c <= cap)
            .ok_or(Error::DimensionCap { cap })?;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cols + j * other.cols + l] =
                            a * other.get(k, l);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Numerical rank: singular values above `tol` times the largest one.
    pub fn rank(&self, tol: f64) -> usize {
        let sv = self.singular_values();
        let largest = sv.iter().cloned().fold(0.0, f64::max);
        if largest == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > tol * largest).count()
    }

    /// Singular values by one-sided Jacobi orthogonalization of the columns,
    /// sorted in decreasing order.
    #[allow(clippy::needless_range_loop)]
    pub fn singular_values(&self) -> Vec<f64> {
        // Work on whichever orientation has fewer columns.
        let work = if self.cols > self.rows {
            self.adjoint()
        } else {
            self.clone()
        };
        let (m, n) = (work.rows, work.cols);
        let mut cols: Vec<Vec<C64>> = (0..n).map(|j| work.column(j)).collect();
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let alpha: f64 = cols[i].iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum();
                    let gamma: C64 = cols[i]
                        .iter()
                        .zip(&cols[j])
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    let g = gamma.norm();
                    if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for k in 0..m {
                        let a = cols[i][k];
                        let b = cols[j][k] * phase.conj();
                        cols[i][k] = a * c - b * s;
                        cols[j][k] = a * s + b * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix shapes must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix shapes must agree")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix shapes must agree")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixWire {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(d)?;
        if wire.re.len() != wire.im.len() {
            return Err(serde::de::Error::custom("re and im lengths differ"));
        }
        let data = wire
            .re
            .iter()
            .zip(&wire.im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        ComplexMatrix::new(wire.rows, wire.cols, data).map_err(serde::de::Error::custom)
    }
}

/// A square matrix equal to its own adjoint.
///
/// Construction symmetrizes `(M + M†)/2` when the input is within
/// [`HERMITIAN_TOL`] of Hermitian and rejects it otherwise.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.0)
    }
}

/// Eigenvalues in ascending order with eigenvectors as the matching columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let n = m.rows;
        let mut out = m.clone();
        for i in 0..n {
            for j in i..n {
                let a = m.get(i, j);
                let b = m.get(j, i).conj();
                if (a - b).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i},{j}) differs from the conjugate of ({j},{i}) by {:.3e}",
                        (a - b).norm()
                    )));
                }
                let avg = (a + b) * 0.5;
                out.set(i, j, avg);
                out.set(j, i, avg.conj());
            }
        }
        Ok(HermitianMatrix(out))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(n, n))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        HermitianMatrix(ComplexMatrix::from_diag(diag))
    }

    /// The projector-like operator |v⟩⟨v| (not normalized).
    pub fn projector(v: &[C64]) -> Self {
        HermitianMatrix(ComplexMatrix::outer(v, v))
    }

    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(n, n, data)?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(self.0.scale(s))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(HermitianMatrix(self.0.try_add(&other.0)?))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(HermitianMatrix(self.0.try_sub(&other.0)?))
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.0.check_same_shape(&other.0)?;
        Ok(HermitianMatrix(
            self.0.zip_with(&other.0, |x, y| x * a + y * b),
        ))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(HermitianMatrix(self.0.tensor(&other.0)?))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `tr[self · other]` for Hermitian arguments (always real).
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        self.0.check_same_shape(&other.0)?;
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0.get(i, j) * other.0.get(j, i)).re;
            }
        }
        Ok(acc)
    }

    /// ⟨v|M v⟩.
    pub fn expectation(&self, v: &[C64]) -> Result<f64> {
        let mv = self.0.apply(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// Conjugation `U M U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let tmp = u.try_mul(&self.0)?.try_mul(&u.adjoint())?;
        HermitianMatrix::new(tmp)
    }

    /// Partial trace over the second factor of a `dim_a·dim_b` operator.
    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != self.dim() {
            return Err(Error::InvalidMatrix(format!(
                "cannot split dimension {} as {dim_a}x{dim_b}",
                self.dim()
            )));
        }
        let mut out = ComplexMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dim_b {
                    acc += self.0.get(i * dim_b + k, j * dim_b + k);
                }
                out.set(i, j, acc);
            }
        }
        HermitianMatrix::new(out)
    }

    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.0.try_sub(&other.0)?.frobenius_norm())
    }

    /// Eigen-decomposition by cyclic complex Jacobi rotations.
    pub fn eigen(&self) -> Result<EigenDecomposition> {
        jacobi_eigen(&self.0)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        if self.dim() == 0 {
            return Err(Error::InvalidMatrix(
                "empty matrix has no eigenvalues".into(),
            ));
        }
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        ev.last()
            .copied()
            .ok_or_else(|| Error::InvalidMatrix("empty matrix has no eigenvalues".into()))
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        matches!(self.min_eigenvalue(), Ok(v) if v >= -tol)
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eig = self.eigen()?;
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in eig.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = eig.vectors.get(i, k);
                for j in 0..n {
                    let v = out.get(i, j) + vik * eig.vectors.get(j, k).conj() * fl;
                    out.set(i, j, v);
                }
            }
        }
        HermitianMatrix::new(out)
    }

    /// Principal square root of a PSD matrix; tiny negative eigenvalues are
    /// clipped to zero.
    pub fn sqrt_psd(&self) -> Result<Self> {
        self.map_spectrum(|x| x.max(0.0).sqrt())
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        HermitianMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn jacobi_eigen(input: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !input.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let n = input.rows;
    let mut a = input.clone();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_OFF_TOL * input.frobenius_norm().max(1.0);

    let mut converged = off_diagonal_norm(&a) < threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let phase = apq / g;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let pc = phase.conj();

                // A ← A J with J_pp = c, J_pq = s, J_qp = −s·ē, J_qq = c·ē.
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * c - akq * pc * s);
                    a.set(k, q, akp * s + akq * pc * c);
                }
                // A ← J† A.
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk * c - aqk * phase * s);
                    a.set(q, k, apk * s + aqk * phase * c);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * c - vkq * pc * s);
                    v.set(k, q, vkp * s + vkq * pc * c);
                }
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                a.set(p, p, C64::new(a.get(p, p).re, 0.0));
                a.set(q, q, C64::new(a.get(q, q).re, 0.0));
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) < threshold;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Inner product ⟨u|v⟩ (conjugate-linear in the first argument).
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    v.iter().map(|z| z / n).collect()
}

/// Kronecker product of two vectors.
pub fn tensor_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    u.iter()
        .flat_map(|&a| v.iter().map(move |&b| a * b))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn min_eigenvalue_trivial_cases() {
        assert!((HermitianMatrix::identity(3).min_eigenvalue().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(HermitianMatrix::zeros(2).min_eigenvalue().unwrap(), 0.0);
    }

    #[test]
    fn min_eigenvalue_of_complex_matrix() {
        // Pauli Y has eigenvalues ±1.
        let y =
            ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let y = HermitianMatrix::new(y).unwrap();
        let ev = y.eigenvalues().unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let m = ComplexMatrix::new(
            3,
            3,
            vec![
                c(2., 0.),
                c(1., 1.),
                c(0., -0.5),
                c(1., -1.),
                c(-1., 0.),
                c(0.3, 0.2),
                c(0., 0.5),
                c(0.3, -0.2),
                c(0.7, 0.),
            ],
        )
        .unwrap();
        let h = HermitianMatrix::new(m.clone()).unwrap();
        let eig = h.eigen().unwrap();
        for k in 0..3 {
            let vk = eig.vectors.column(k);
            let mv = m.apply(&vk).unwrap();
            for i in 0..3 {
                assert!((mv[i] - vk[i] * eig.values[k]).norm() < 1e-12);
            }
        }
        let sum: f64 = eig.values.iter().sum();
        assert!((sum - h.trace()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_and_non_finite() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::InvalidMatrix(_))
        ));
        let m = ComplexMatrix::from_real(2, 2, &[f64::NAN, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::InvalidMatrix(_))
        ));
    }

    #[test]
    fn symmetrizes_small_asymmetry() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 0.5 + 1e-13, 0.5, 1.0]).unwrap();
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.as_matrix().get(0, 1), h.as_matrix().get(1, 0).conj());
    }

    #[test]
    fn tensor_examples() {
        let i6 = ComplexMatrix::identity(2)
            .tensor(&ComplexMatrix::identity(3))
            .unwrap();
        assert_eq!(i6, ComplexMatrix::identity(6));
        let d = ComplexMatrix::from_diag(&[1.0, 0.0])
            .tensor(&ComplexMatrix::identity(2))
            .unwrap();
        assert_eq!(d, ComplexMatrix::from_diag(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn tensor_dimension_cap() {
        let a = ComplexMatrix::identity(100);
        assert!(matches!(
            a.tensor(&a),
            Err(Error::DimensionCap {
                cap: DEFAULT_DIMENSION_CAP
            })
        ));
        assert!(a.tensor_capped(&ComplexMatrix::identity(2), 200).is_ok());
    }

    #[test]
    fn maximally_entangled_projector_has_trace_two() {
        // ψ₊ = e0⊗e0 + e1⊗e1, expanded by hand: entries 1 at (0,0),(0,3),(3,0),(3,3).
        let e0 = [c(1., 0.), c(0., 0.)];
        let e1 = [c(0., 0.), c(1., 0.)];
        let psi: Vec<C64> = tensor_vec(&e0, &e0)
            .iter()
            .zip(tensor_vec(&e1, &e1))
            .map(|(a, b)| a + b)
            .collect();
        let p = HermitianMatrix::projector(&psi);
        assert_eq!(p.trace(), 2.0);
        let mut expected = ComplexMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected.set(i, j, c(1., 0.));
        }
        assert_eq!(p.as_matrix(), &expected);
    }

    #[test]
    fn psd_checks() {
        assert!(HermitianMatrix::identity(2).is_psd(1e-9));
        assert!(!HermitianMatrix::from_diag(&[1.0, -1.0]).is_psd(1e-9));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(ComplexMatrix::identity(3).rank(1e-10), 3);
        let e0 = vec![c(1., 0.), c(0., 0.), c(0., 0.)];
        let e1 = vec![c(0., 0.), c(1., 0.), c(0., 0.)];
        let m = ComplexMatrix::from_columns(&[e0.clone(), e0, e1]).unwrap();
        assert_eq!(m.rank(1e-10), 2);
        assert_eq!(ComplexMatrix::zeros(2, 3).rank(1e-10), 0);
    }

    #[test]
    fn singular_values_of_wide_matrix() {
        let m = ComplexMatrix::from_real(2, 3, &[3.0, 0.0, 0.0, 0.0, 0.0, 4.0]).unwrap();
        let sv = m.singular_values();
        assert_eq!(sv.len(), 2);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = HermitianMatrix::from_diag(&[0.25, 0.75]);
        let b = HermitianMatrix::identity(3);
        let ab = a.tensor(&b).unwrap();
        let pt = ab.partial_trace_second(2, 3).unwrap();
        assert!(pt.frobenius_distance(&a.scale(3.0)).unwrap() < 1e-15);
    }

    #[test]
    fn json_layout() {
        let m = ComplexMatrix::new(1, 2, vec![c(1., 2.), c(3., -4.)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"re":[1.0,3.0],"im":[2.0,-4.0]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(
            r#"{"rows":2,"cols":2,"re":[1.0],"im":[0.0]}"#
        )
        .is_err());
    }
}
