//! Canonical forms of super Riemannian metric Gram matrices.
//!
//! A Gram matrix `G` on a pure basis transforms as `G ↦ P^ST G P` under an
//! even transition `P`. The pipeline below produces `P` with
//! `P^ST G P = diag(η, 𝒥)`, `η = diag(d_1, …, d_m)` and `𝒥` the
//! block-diagonal sum of `J = [[0, 1], [−1, 0]]`:
//!
//! 1. [`orthogonalize_even`]: diagonalize `β(A)` with a real transition, then
//!    Gram-Schmidt over the even supernumbers.
//! 2. [`odd_complement`]: subtract the even components from the odd basis
//!    vectors so the mixed blocks vanish.
//! 3. [`symplectic_reduce`]: pair the odd vectors into Darboux pairs.
//!
//! [`body_reduce`] then rescales η to ±1 where the soul is small enough.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{AlgebraConfig, Supernumber};
use crate::scalar::{CoefficientMode, RealMatrix, Scalar};
use crate::supermatrix::{BlockShape, ParityClass, SuperMatrix};

type Block<S> = Vec<Vec<Supernumber<S>>>;

/// A validated even, graded-symmetric, non-degenerate Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMetric<S: Scalar> {
    gram: SuperMatrix<S>,
}

/// Per-index body reducibility record.
#[derive(Debug, Clone, PartialEq)]
pub struct Reducibility<S> {
    /// `||s(d_i)|| / |β(d_i)|`.
    pub ratio: S,
    pub condition_met: bool,
    /// `±1` once the entry has been rescaled.
    pub sign: Option<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalizationResult<S: Scalar> {
    pub p: SuperMatrix<S>,
    pub gamma: SuperMatrix<S>,
    pub d: Vec<Supernumber<S>>,
    pub reducibility: Vec<Reducibility<S>>,
    pub body_reduced: bool,
}

fn block<S: Scalar>(g: &SuperMatrix<S>, r0: usize, c0: usize, rows: usize, cols: usize) -> Block<S> {
    (0..rows).map(|i| (0..cols).map(|j| g.get(r0 + i, c0 + j).clone()).collect()).collect()
}

fn entry_residual_ok<S: Scalar>(diff: &Supernumber<S>, scale: f64) -> bool {
    match S::MODE {
        CoefficientMode::Rational => diff.is_zero(),
        CoefficientMode::Float64 => diff.norm().to_f64() <= 1e-12 * (1.0 + scale),
    }
}

fn body_is_zero<S: Scalar>(x: &S, scale: f64) -> bool {
    match S::MODE {
        CoefficientMode::Rational => x.is_zero(),
        CoefficientMode::Float64 => x.abs().to_f64() <= 1e-10 * scale,
    }
}

/// Standard symplectic matrix `𝒥` of size `n` (n even).
pub fn standard_symplectic<S: Scalar>(config: AlgebraConfig, n: usize) -> Block<S> {
    let mut j = vec![vec![Supernumber::zero(config); n]; n];
    for p in 0..n / 2 {
        j[2 * p][2 * p + 1] = Supernumber::one(config);
        j[2 * p + 1][2 * p] = -Supernumber::one(config);
    }
    j
}

/// `diag(η, 𝒥)` as an even super matrix.
pub fn gamma_matrix<S: Scalar>(config: AlgebraConfig, eta: &[Supernumber<S>], n: usize) -> Result<SuperMatrix<S>> {
    let m = eta.len();
    let mut a = vec![vec![Supernumber::zero(config); m]; m];
    for (i, d) in eta.iter().enumerate() {
        a[i][i] = d.clone();
    }
    SuperMatrix::block_diagonal(&a, &standard_symplectic(config, n), config)
}

impl<S: Scalar> SuperMetric<S> {
    /// Checks evenness, `n` even, `A = Aᵀ`, `B = −Bᵀ`, `D = Cᵀ`, and
    /// invertible bodies of `A` and `B`.
    pub fn validate(g: &SuperMatrix<S>) -> Result<Self> {
        let gram = g
            .clone()
            .with_parity(ParityClass::Even)
            .map_err(|e| Error::NotEven(e.to_string()))?;
        let BlockShape { m, n } = g.shape();
        if n % 2 == 1 {
            return Err(Error::OddDimensionOdd(n));
        }
        let scale = g.max_entry_norm();
        for i in 0..m + n {
            for j in 0..m + n {
                let (i_odd, j_odd) = (i >= m, j >= m);
                let expected = match (i_odd, j_odd) {
                    (true, true) => -g.get(j, i),
                    _ => g.get(j, i).clone(),
                };
                if !entry_residual_ok(&(g.get(i, j) - &expected), scale) {
                    let which = match (i_odd, j_odd) {
                        (false, false) => "A is not symmetric",
                        (true, true) => "B is not skew-symmetric",
                        _ => "D is not the transpose of C",
                    };
                    return Err(Error::NotGradedSymmetric(format!("{which} at ({i},{j})")));
                }
            }
        }
        let body = g.body_matrix();
        if !S::well_conditioned(&body.sub_block(0, 0, m, m)) {
            return Err(Error::DegenerateBody("body of the even-even block is singular".into()));
        }
        if !S::well_conditioned(&body.sub_block(m, m, n, n)) {
            return Err(Error::DegenerateBody("body of the odd-odd block is singular".into()));
        }
        Ok(SuperMetric { gram })
    }

    pub fn gram(&self) -> &SuperMatrix<S> {
        &self.gram
    }

    pub fn shape(&self) -> BlockShape {
        self.gram.shape()
    }

    fn config(&self) -> AlgebraConfig {
        self.gram.config()
    }
}

/// Transition on the even block (as an `(m|0)` matrix) and `d_i = g(f_i, f_i)`.
pub fn orthogonalize_even<S: Scalar>(metric: &SuperMetric<S>) -> Result<(SuperMatrix<S>, Vec<Supernumber<S>>)> {
    let config = metric.config();
    let m = metric.shape().m;
    let even_shape = BlockShape::new(m, 0);
    let a = SuperMatrix::from_fn(config, even_shape, ParityClass::Even, |i, j| metric.gram.get(i, j).clone())?;
    let body = a.body_matrix();
    let rotation = S::diagonalize_symmetric(&body)?;
    let rot = SuperMatrix::from_real(config, even_shape, ParityClass::Even, &rotation)?;
    let a_bar = rot.transpose().matmul(&a)?.matmul(&rot)?;
    let body_scale = body.max_abs();

    let bilinear = |x: &[Supernumber<S>], y: &[Supernumber<S>]| -> Supernumber<S> {
        let mut acc = Supernumber::zero(config);
        for i in 0..m {
            for j in 0..m {
                acc = &acc + &(&(&x[i] * a_bar.get(i, j)) * &y[j]);
            }
        }
        acc
    };

    let mut fs: Vec<Vec<Supernumber<S>>> = Vec::with_capacity(m);
    let mut d: Vec<Supernumber<S>> = Vec::with_capacity(m);
    let mut d_inv: Vec<Supernumber<S>> = Vec::with_capacity(m);
    for k in 0..m {
        let mut e_k = vec![Supernumber::zero(config); m];
        e_k[k] = Supernumber::one(config);
        let mut f = e_k.clone();
        for l in 0..k {
            let coeff = &bilinear(&e_k, &fs[l]) * &d_inv[l];
            for (fi, fl) in f.iter_mut().zip(&fs[l]) {
                *fi = &*fi - &(&coeff * fl);
            }
        }
        let dk = bilinear(&f, &f);
        if body_is_zero(&dk.body(), body_scale) {
            return Err(Error::DegenerateBody(format!("g(f_{k}, f_{k}) has zero body")));
        }
        d_inv.push(dk.invert()?);
        d.push(dk);
        fs.push(f);
    }
    let f_matrix = SuperMatrix::from_fn(config, even_shape, ParityClass::Even, |i, j| fs[j][i].clone())?;
    Ok((rot.matmul(&f_matrix)?, d))
}

/// Full transition `P1` and the transformed metric with vanishing mixed blocks.
pub fn odd_complement<S: Scalar>(
    metric: &SuperMetric<S>,
    p0: &SuperMatrix<S>,
    d: &[Supernumber<S>],
) -> Result<(SuperMatrix<S>, SuperMetric<S>)> {
    let config = metric.config();
    let shape = metric.shape();
    let BlockShape { m, n } = shape;
    if p0.dim() != m || d.len() != m {
        return Err(Error::ShapeMismatch("even transition does not match the metric".into()));
    }
    let p0_block = block(p0, 0, 0, m, m);
    let identity_n: Block<S> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Supernumber::one(config) } else { Supernumber::zero(config) }).collect())
        .collect();
    let pa = SuperMatrix::block_diagonal(&p0_block, &identity_n, config)?;
    let g1 = pa.supertranspose()?.matmul(&metric.gram)?.matmul(&pa)?;

    // f_α = e_α − Σ_j d_j⁻¹ g(ē_j, e_α) ē_j
    let d_inv: Vec<Supernumber<S>> = d.iter().map(Supernumber::invert).collect::<Result<_>>()?;
    let pb = SuperMatrix::from_fn(config, shape, ParityClass::Even, |i, j| {
        if i == j {
            Supernumber::one(config)
        } else if i < m && j >= m {
            -&(&d_inv[i] * g1.get(i, j))
        } else {
            Supernumber::zero(config)
        }
    })?;
    let g2 = pb.supertranspose()?.matmul(&g1)?.matmul(&pb)?;
    Ok((pa.matmul(&pb)?, SuperMetric { gram: g2 }))
}

/// Transition `Q` on the odd block with `Qᵀ B1 Q = 𝒥`; `b1` is an `(n|0)`
/// matrix of even supernumbers.
pub fn symplectic_reduce<S: Scalar>(b1: &SuperMatrix<S>) -> Result<SuperMatrix<S>> {
    let config = b1.config();
    let n = b1.dim();
    if n % 2 == 1 {
        return Err(Error::OddDimensionOdd(n));
    }
    let scale = b1.body_matrix().max_abs();
    let omega = |x: &[Supernumber<S>], y: &[Supernumber<S>]| -> Supernumber<S> {
        let mut acc = Supernumber::zero(config);
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                acc = &acc + &(&(&x[i] * b1.get(i, j)) * &y[j]);
            }
        }
        acc
    };
    let mut remaining: Vec<Vec<Supernumber<S>>> = (0..n)
        .map(|k| (0..n).map(|i| if i == k { Supernumber::one(config) } else { Supernumber::zero(config) }).collect())
        .collect();
    let mut columns: Vec<Vec<Supernumber<S>>> = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let f = remaining.remove(0);
        let pairings: Vec<Supernumber<S>> = remaining.iter().map(|v| omega(&f, v)).collect();
        let (best, z) = pairings
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.body().abs().partial_cmp(&b.1.body().abs()).unwrap())
            .ok_or_else(|| Error::DegenerateBody("no symplectic partner left".into()))?;
        if body_is_zero(&z.body(), scale) {
            return Err(Error::DegenerateBody("no partner with nonzero body pairing".into()));
        }
        let z_inv = z.invert()?;
        let partner_raw = remaining.remove(best);
        let partner: Vec<Supernumber<S>> = partner_raw.iter().map(|x| x * &z_inv).collect();
        for x in remaining.iter_mut() {
            let with_partner = omega(x, &partner);
            let with_f = omega(x, &f);
            for i in 0..n {
                x[i] = &(&x[i] - &(&with_partner * &f[i])) + &(&with_f * &partner[i]);
            }
        }
        columns.push(f);
        columns.push(partner);
    }
    SuperMatrix::from_fn(config, BlockShape::new(n, 0), ParityClass::Even, |i, j| columns[j][i].clone())
}

fn reducibility<S: Scalar>(d: &Supernumber<S>) -> Reducibility<S> {
    let (b, s) = d.body_soul();
    let ratio = s.norm() / b.abs();
    let condition_met = ratio < S::one();
    Reducibility { ratio, condition_met, sign: None }
}

/// `||s(d̃)||` for `d̃ = d / ||d||`; below `1/2` exactly when the soul
/// ratio of `d` is below `1`.
pub fn normalized_soul_norm<S: Scalar>(d: &Supernumber<S>) -> S {
    let total = d.norm();
    d.soul().norm() / total
}

/// Per-entry reducibility record of `d`.
pub fn soul_ratio<S: Scalar>(d: &Supernumber<S>) -> Reducibility<S> {
    reducibility(d)
}

/// Runs the three stages and assembles `P` with `P^ST G P = diag(η, 𝒥)`.
pub fn canonical_form<S: Scalar>(metric: &SuperMetric<S>) -> Result<CanonicalizationResult<S>> {
    let config = metric.config();
    let BlockShape { m, n } = metric.shape();
    let (p0, d) = orthogonalize_even(metric)?;
    let (p1, g1) = odd_complement(metric, &p0, &d)?;
    let b1 = SuperMatrix::from_fn(config, BlockShape::new(n, 0), ParityClass::Even, |i, j| {
        g1.gram.get(m + i, m + j).clone()
    })?;
    let q = symplectic_reduce(&b1)?;
    let identity_m: Block<S> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { Supernumber::one(config) } else { Supernumber::zero(config) }).collect())
        .collect();
    let pq = SuperMatrix::block_diagonal(&identity_m, &block(&q, 0, 0, n, n), config)?;
    let p = p1.matmul(&pq)?;
    let gamma = gamma_matrix(config, &d, n)?;
    let reducibility = d.iter().map(reducibility).collect();
    Ok(CanonicalizationResult { p, gamma, d, reducibility, body_reduced: false })
}

impl<S: Scalar> CanonicalizationResult<S> {
    /// `P^ST G P − Γ`.
    pub fn residual(&self, metric: &SuperMetric<S>) -> Result<SuperMatrix<S>> {
        self.p.supertranspose()?.matmul(&metric.gram)?.matmul(&self.p)?.sub(&self.gamma)
    }

    /// Largest entry ℓ₁ norm of [`CanonicalizationResult::residual`].
    pub fn max_residual(&self, metric: &SuperMetric<S>) -> Result<S> {
        let r = self.residual(metric)?;
        Ok(r.entries().iter().map(Supernumber::norm).fold(S::zero(), |a, b| if b > a { b } else { a }))
    }

    /// True when every η entry satisfies the soul-ratio condition.
    pub fn body_reducible(&self) -> bool {
        self.reducibility.iter().all(|r| r.condition_met)
    }
}

/// Rescales each even basis vector by
/// `λ_i = |β(d_i)|^(−1/2) (1 + s(d_i)/β(d_i))^(−1/2)` so that `λ_i² d_i = ±1`,
/// then orders `+1` entries before `−1` entries.
pub fn body_reduce<S: Scalar>(result: &CanonicalizationResult<S>, strict: bool) -> Result<CanonicalizationResult<S>> {
    let config = result.p.config();
    let shape = result.p.shape();
    let BlockShape { m, n } = shape;
    let mut lambdas = Vec::with_capacity(m);
    let mut records = Vec::with_capacity(m);
    for (i, d) in result.d.iter().enumerate() {
        let (b, s) = d.body_soul();
        if b.is_zero() {
            return Err(Error::DegenerateBody(format!("d_{i} has zero body")));
        }
        let mut record = reducibility(d);
        if strict && !record.condition_met {
            return Err(Error::ConvergenceViolation(format!(
                "index {i}: ||s(d)||/|β(d)| = {} >= 1",
                record.ratio.to_f64()
            )));
        }
        let mu = s.scale(&(S::one() / b.clone()));
        let w = mu.binomial_inverse_sqrt(false)?;
        let root = b
            .abs()
            .sqrt_exact()
            .ok_or_else(|| Error::Inexact(format!("|β(d_{i})| has no exact square root")))?;
        lambdas.push(w.scale(&(S::one() / root)));
        record.sign = Some(if b > S::zero() { 1 } else { -1 });
        records.push(record);
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(records[i].sign));

    let scaling = SuperMatrix::from_fn(config, shape, ParityClass::Even, |i, j| {
        if i < m && j < m {
            if i == order[j] { lambdas[i].clone() } else { Supernumber::zero(config) }
        } else if i == j {
            Supernumber::one(config)
        } else {
            Supernumber::zero(config)
        }
    })?;
    let p = result.p.matmul(&scaling)?;
    let d: Vec<Supernumber<S>> = order
        .iter()
        .map(|&i| Supernumber::scalar(config, S::from_ratio(records[i].sign.unwrap_or(1) as i64, 1)))
        .collect();
    let reducibility = order.iter().map(|&i| records[i].clone()).collect();
    let gamma = gamma_matrix(config, &d, n)?;
    Ok(CanonicalizationResult { p, gamma, d, reducibility, body_reduced: true })
}

/// Real-arithmetic congruence of a body-level metric, used to cross-check
/// the body of the canonical form: returns the sorted diagonal of `Tᵀ β(A) T`.
pub fn body_eta<S: Scalar>(metric: &SuperMetric<S>) -> Result<Vec<S>> {
    let m = metric.shape().m;
    let a: RealMatrix<S> = metric.gram.body_matrix().sub_block(0, 0, m, m);
    let t = S::diagonalize_symmetric(&a)?;
    let dmat = t.transpose().matmul(&a).matmul(&t);
    Ok((0..m).map(|i| dmat[(i, i)].clone()).collect())
}

/// JSON-facing reducibility summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducibilityRecord {
    pub ratio: serde_json::Value,
    pub condition_met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
}

impl<S: Scalar> From<&Reducibility<S>> for ReducibilityRecord {
    fn from(r: &Reducibility<S>) -> Self {
        ReducibilityRecord { ratio: r.ratio.to_json(), condition_met: r.condition_met, sign: r.sign }
    }
}
