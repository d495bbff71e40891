//! Coefficient fields: `f64` for speed and `BigRational` for exact oracles,
//! plus a small dense real matrix used for body-level linear algebra.

use std::fmt::Debug;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// How supernumber coefficients are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMode {
    Float64,
    Rational,
}

impl FromStr for CoefficientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float64" => Ok(CoefficientMode::Float64),
            "rational" => Ok(CoefficientMode::Rational),
            other => Err(Error::Parse(format!("unknown coefficient mode {other:?}"))),
        }
    }
}

/// A real coefficient field.
///
/// Implemented for `f64` (rounded, tolerance-pruned) and `BigRational`
/// (exact). Everything above this trait is written once against it.
pub trait Scalar: Num + Signed + Clone + Debug + PartialOrd + Send + Sync + 'static {
    const MODE: CoefficientMode;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_big_ratio(r: &BigRational) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;

    /// Exact square root when one exists in the field.
    fn sqrt_exact(&self) -> Option<Self>;

    /// Whether `self` should be dropped from a sum whose largest
    /// coefficient has magnitude `scale`.
    fn negligible(&self, scale: f64, tol: f64) -> bool;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    /// Scale-free invertibility gate for a square real matrix.
    fn well_conditioned(m: &RealMatrix<Self>) -> bool;

    /// Transition `T` with `T^T m T` diagonal, diagonal entries in descending
    /// order. `m` must be symmetric and nonsingular.
    fn diagonalize_symmetric(m: &RealMatrix<Self>) -> Result<RealMatrix<Self>>;

    /// Real matrix exponential, when representable.
    fn matrix_exp(m: &RealMatrix<Self>) -> Result<RealMatrix<Self>>;

    /// Is `x` zero for the purpose of a residual test relative to `scale`?
    fn residual_ok(x: &Self, scale: f64, rel_tol: f64) -> bool {
        match Self::MODE {
            CoefficientMode::Rational => x.is_zero(),
            CoefficientMode::Float64 => x.abs().to_f64() <= rel_tol * (1.0 + scale),
        }
    }
}

impl Scalar for f64 {
    const MODE: CoefficientMode = CoefficientMode::Float64;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_big_ratio(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn negligible(&self, scale: f64, tol: f64) -> bool {
        *self == 0.0 || self.abs() <= tol * scale
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            Value::String(s) => parse_rational(s).map(|r| f64::from_big_ratio(&r)),
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }

    fn well_conditioned(m: &RealMatrix<Self>) -> bool {
        if m.rows == 0 {
            return true;
        }
        let sv = m.to_nalgebra().singular_values();
        let max = sv.max();
        let min = sv.min();
        max > 0.0 && min > 1e-10 * max
    }

    fn diagonalize_symmetric(m: &RealMatrix<Self>) -> Result<RealMatrix<Self>> {
        let k = m.rows;
        if k == 0 {
            return Ok(RealMatrix::zeros(0, 0));
        }
        let eig = m.to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut out = RealMatrix::zeros(k, k);
        for (col, &src) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(src);
            let lead = v.iter().find(|x| x.abs() > 1e-12).copied().unwrap_or(1.0);
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            for row in 0..k {
                out[(row, col)] = sign * v[row];
            }
        }
        Ok(out)
    }

    fn matrix_exp(m: &RealMatrix<Self>) -> Result<RealMatrix<Self>> {
        if m.rows == 0 {
            return Ok(m.clone());
        }
        Ok(RealMatrix::from_nalgebra(&m.to_nalgebra().exp()))
    }
}

/// Parse `"p/q"`, `"p"`, or a decimal such as `"-0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse {s:?} as a rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    for _ in 0..shift.unsigned_abs() {
        if shift > 0 {
            value = value * ten.clone();
        } else {
            value = value / ten.clone();
        }
    }
    Ok(value)
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Scalar for BigRational {
    const MODE: CoefficientMode = CoefficientMode::Rational;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_big_ratio(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| BigRational::new(n, d))
    }

    fn negligible(&self, _scale: f64, _tol: f64) -> bool {
        self.is_zero()
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => parse_rational(&n.to_string()),
            Value::String(s) => parse_rational(s),
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }

    fn well_conditioned(m: &RealMatrix<Self>) -> bool {
        m.rows == m.cols && m.rank() == m.rows
    }

    fn diagonalize_symmetric(m: &RealMatrix<Self>) -> Result<RealMatrix<Self>> {
        let t = congruence_diagonalize(m)?;
        let d = t.transpose().matmul(m).matmul(&t);
        let mut order: Vec<usize> = (0..m.rows).collect();
        order.sort_by(|&a, &b| d[(b, b)].partial_cmp(&d[(a, a)]).unwrap());
        Ok(t.permute_columns(&order))
    }

    fn matrix_exp(_m: &RealMatrix<Self>) -> Result<RealMatrix<Self>> {
        Err(Error::Inexact(
            "the matrix exponential is irrational; use the Cayley parametrization".into(),
        ))
    }
}

/// Exact symmetric Gaussian elimination: returns `T` with `T^T m T` diagonal.
fn congruence_diagonalize<S: Scalar>(m: &RealMatrix<S>) -> Result<RealMatrix<S>> {
    let k = m.rows;
    let mut a = m.clone();
    let mut t = RealMatrix::identity(k);
    for p in 0..k {
        if a[(p, p)].is_zero() {
            if let Some(j) = (p + 1..k).find(|&j| !a[(j, j)].is_zero()) {
                a = a.swap_congruence(p, j);
                t = t.permute_columns(&swap_order(k, p, j));
            } else if let Some(j) = (p + 1..k).find(|&j| !a[(p, j)].is_zero()) {
                // e_p <- e_p + e_j makes the pivot 2 a_pj.
                let mut e = RealMatrix::identity(k);
                e[(j, p)] = S::one();
                a = e.transpose().matmul(&a).matmul(&e);
                t = t.matmul(&e);
            } else {
                return Err(Error::DegenerateBody("symmetric body is singular".into()));
            }
        }
        let pivot = a[(p, p)].clone();
        let mut e = RealMatrix::identity(k);
        for j in p + 1..k {
            e[(p, j)] = -(a[(p, j)].clone() / pivot.clone());
        }
        a = e.transpose().matmul(&a).matmul(&e);
        t = t.matmul(&e);
    }
    Ok(t)
}

fn swap_order(k: usize, i: usize, j: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..k).collect();
    order.swap(i, j);
    order
}

/// Dense row-major real matrix over a [`Scalar`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S> std::ops::Index<(usize, usize)> for RealMatrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for RealMatrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> RealMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(RealMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RealMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.cols.max(1)).map(<[S]>::to_vec).take(self.rows).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    let slot = &mut out[(i, j)];
                    *slot = slot.clone() + prod;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + other[(i, j)].clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - other[(i, j)].clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() * c.clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs().to_f64()).fold(0.0, f64::max)
    }

    /// Sum of absolute entries, kept in the field (exact in rational mode).
    pub fn abs_sum(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, x| acc + x.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn permute_columns(&self, order: &[usize]) -> Self {
        Self::from_fn(self.rows, order.len(), |i, j| self[(i, order[j])].clone())
    }

    fn swap_congruence(&self, a: usize, b: usize) -> Self {
        let order = swap_order(self.rows, a, b);
        Self::from_fn(self.rows, self.cols, |i, j| self[(order[i], order[j])].clone())
    }

    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let (ra, ca) = (a.rows, a.cols);
        Self::from_fn(ra + b.rows, ca + b.cols, |i, j| {
            if i < ra && j < ca {
                a[(i, j)].clone()
            } else if i >= ra && j >= ca {
                b[(i - ra, j - ca)].clone()
            } else {
                S::zero()
            }
        })
    }

    pub fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    fn pivot_threshold(&self) -> f64 {
        match S::MODE {
            CoefficientMode::Rational => 0.0,
            CoefficientMode::Float64 => 1e-12 * self.max_abs().max(f64::MIN_POSITIVE),
        }
    }

    fn is_pivot(x: &S, threshold: f64) -> bool {
        match S::MODE {
            CoefficientMode::Rational => !x.is_zero(),
            CoefficientMode::Float64 => x.abs().to_f64() > threshold,
        }
    }

    /// Row-echelon rank (exact in rational mode).
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let threshold = self.pivot_threshold();
        let mut rank = 0;
        for col in 0..a.cols {
            if rank == a.rows {
                break;
            }
            let best = (rank..a.rows).max_by(|&x, &y| {
                a[(x, col)].abs().partial_cmp(&a[(y, col)].abs()).unwrap()
            });
            let Some(p) = best else { break };
            if !Self::is_pivot(&a[(p, col)], threshold) {
                continue;
            }
            a.swap_rows(p, rank);
            let pivot = a[(rank, col)].clone();
            for r in rank + 1..a.rows {
                let f = a[(r, col)].clone() / pivot.clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..a.cols {
                    let v = a[(rank, c)].clone() * f.clone();
                    a[(r, c)] = a[(r, c)].clone() - v;
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
        }
        if !S::well_conditioned(self) {
            return Err(Error::body_not_invertible());
        }
        let k = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(k);
        for col in 0..k {
            let p = (col..k)
                .max_by(|&x, &y| a[(x, col)].abs().partial_cmp(&a[(y, col)].abs()).unwrap())
                .expect("non-empty pivot range");
            if a[(p, col)].is_zero() {
                return Err(Error::body_not_invertible());
            }
            a.swap_rows(p, col);
            inv.swap_rows(p, col);
            let pivot = a[(col, col)].clone();
            for c in 0..k {
                a[(col, c)] = a[(col, c)].clone() / pivot.clone();
                inv[(col, c)] = inv[(col, c)].clone() / pivot.clone();
            }
            for r in 0..k {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..k {
                    let va = a[(col, c)].clone() * f.clone();
                    let vi = inv[(col, c)].clone() * f.clone();
                    a[(r, c)] = a[(r, c)].clone() - va;
                    inv[(r, c)] = inv[(r, c)].clone() - vi;
                }
            }
        }
        Ok(inv)
    }

    pub fn to_f64(&self) -> RealMatrix<f64> {
        RealMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(S::to_f64).collect() }
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| S::from_f64(m[(i, j)]))
    }
}

/// Least-squares coordinate solver against a fixed set of real column vectors.
///
/// Coordinates come from the normal equations; callers check the residual
/// to decide span membership.
#[derive(Debug, Clone)]
pub(crate) struct ColumnSolver<S> {
    columns: RealMatrix<S>,
    gram_inverse: RealMatrix<S>,
}

impl<S: Scalar> ColumnSolver<S> {
    pub(crate) fn new(columns: RealMatrix<S>) -> Result<Self> {
        let gram = columns.transpose().matmul(&columns);
        let gram_inverse = gram
            .inverse()
            .map_err(|_| Error::BasisDegenerate("basis vectors are linearly dependent".into()))?;
        Ok(ColumnSolver { columns, gram_inverse })
    }

    pub(crate) fn dim(&self) -> usize {
        self.columns.cols
    }

    /// Coordinates of `v`, or `None` when `v` is outside the span.
    pub(crate) fn solve(&self, v: &[S]) -> Option<Vec<S>> {
        let rhs = RealMatrix { rows: v.len(), cols: 1, data: v.to_vec() };
        let proj = self.columns.transpose().matmul(&rhs);
        let coords = self.gram_inverse.matmul(&proj);
        let back = self.columns.matmul(&coords);
        let scale = v.iter().map(|x| x.abs().to_f64()).fold(0.0, f64::max);
        let ok = back
            .data
            .iter()
            .zip(v)
            .all(|(a, b)| S::residual_ok(&(a.clone() - b.clone()), scale, 1e-9));
        ok.then_some(coords.data)
    }
}
