//! The covering group `H = G̃ ⋉ N` in exponential coordinates.
//!
//! `N` is the zero-body part of the isometry algebra with the global BCH
//! product `X ⋄ Y = log(exp X exp Y)`; `G̃` is represented by real
//! block-diagonal isometries of `β(Γ)` acting on `N` by conjugation.

use serde::{Deserialize, Serialize};

use crate::bch;
use crate::error::{Error, Result};
use crate::isometry::{lie_membership, GammaForm};
use crate::scalar::{CoefficientMode, RealMatrix, Scalar};
use crate::supermatrix::{ParityClass, SuperMatrix};

/// Truncation order of [`bch_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BchOrderConfig {
    max_order: usize,
}

impl Default for BchOrderConfig {
    fn default() -> Self {
        BchOrderConfig { max_order: 4 }
    }
}

impl BchOrderConfig {
    pub fn new(max_order: usize) -> Result<Self> {
        if max_order == 0 || max_order > bch::MAX_ORDER {
            return Err(Error::InvalidConfig(format!(
                "BCH order must be in 1..={}, got {max_order}",
                bch::MAX_ORDER
            )));
        }
        Ok(BchOrderConfig { max_order })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }
}

/// A zero-body element of the isometry algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct NilElement<S: Scalar> {
    x: SuperMatrix<S>,
}

impl<S: Scalar> NilElement<S> {
    pub fn new(x: SuperMatrix<S>, gamma: &GammaForm<S>) -> Result<Self> {
        if !x.has_zero_body() {
            return Err(Error::NonZeroBody);
        }
        let x = x.with_parity(ParityClass::Even)?;
        let report = lie_membership(&x, gamma)?;
        if !report.member {
            return Err(Error::NotInLieAlgebra(report.violated().join("; ")));
        }
        Ok(NilElement { x })
    }

    pub fn zero(gamma: &GammaForm<S>) -> Self {
        NilElement { x: SuperMatrix::zeros(gamma.config(), gamma.shape(), ParityClass::Even) }
    }

    pub fn matrix(&self) -> &SuperMatrix<S> {
        &self.x
    }

    pub fn into_matrix(self) -> SuperMatrix<S> {
        self.x
    }

    /// `X ⋄ Y`; stays in the algebra since both factors do.
    pub fn diamond(&self, other: &Self) -> Result<Self> {
        Ok(NilElement { x: diamond(&self.x, &other.x)? })
    }

    /// Diamond inverse `−X`.
    pub fn inverse(&self) -> Self {
        NilElement { x: self.x.neg() }
    }
}

/// `log(exp X · exp Y)` for zero-body `X`, `Y`; exact since every series terminates.
pub fn diamond<S: Scalar>(x: &SuperMatrix<S>, y: &SuperMatrix<S>) -> Result<SuperMatrix<S>> {
    if !x.has_zero_body() || !y.has_zero_body() {
        return Err(Error::NonZeroBody);
    }
    x.exp_zero_body()?.matmul(&y.exp_zero_body()?)?.log_unipotent()
}

/// Bracket-compatible matrix norm: twice the induced ∞-norm built from entry ℓ₁ norms.
pub fn lie_norm<S: Scalar>(x: &SuperMatrix<S>) -> f64 {
    2.0 * x.row_norm()
}

/// `Σ_{m ≤ max_order} Θ_m(X, Y)`. Inputs with nonzero body must satisfy
/// `||X|| + ||Y|| ≤ ln 2` in [`lie_norm`].
pub fn bch_series<S: Scalar>(x: &SuperMatrix<S>, y: &SuperMatrix<S>, cfg: BchOrderConfig) -> Result<SuperMatrix<S>> {
    if !(x.has_zero_body() && y.has_zero_body()) {
        let total = lie_norm(x) + lie_norm(y);
        if total > std::f64::consts::LN_2 {
            return Err(Error::NormBoundViolation(total));
        }
    }
    let terms = bch::homogeneous_terms(x, y, cfg.max_order)?;
    let mut sum = x.sub(x)?;
    for t in &terms {
        sum = sum.add(t)?;
    }
    Ok(sum)
}

fn lift<S: Scalar>(gamma: &GammaForm<S>, g: &RealMatrix<S>) -> Result<SuperMatrix<S>> {
    SuperMatrix::from_real(gamma.config(), gamma.shape(), ParityClass::Even, g)
}

fn off_diagonal_zero<S: Scalar>(m: usize, x: &RealMatrix<S>) -> bool {
    (0..x.rows()).all(|i| (0..x.cols()).all(|j| (i < m) == (j < m) || x[(i, j)].is_zero()))
}

/// Checks `X0` against the real conditions for `𝔤⁰`.
pub fn check_g0<S: Scalar>(x0: &RealMatrix<S>, gamma: &GammaForm<S>) -> Result<()> {
    let k = gamma.shape().dim();
    if x0.rows() != k || x0.cols() != k {
        return Err(Error::ShapeMismatch(format!("X0 is {}x{}, expected {k}x{k}", x0.rows(), x0.cols())));
    }
    if !off_diagonal_zero(gamma.m(), x0) {
        return Err(Error::NotInG0("mixed blocks must vanish".into()));
    }
    let report = lie_membership(&lift(gamma, x0)?, gamma)?;
    if !report.member {
        return Err(Error::NotInG0(report.violated().join("; ")));
    }
    Ok(())
}

/// Real isometry test for the body group: `gᵀ β(Γ) g = β(Γ)`, block diagonal.
pub fn check_body_isometry<S: Scalar>(g: &RealMatrix<S>, gamma: &GammaForm<S>) -> Result<()> {
    let k = gamma.shape().dim();
    if g.rows() != k || g.cols() != k {
        return Err(Error::ShapeMismatch(format!("g is {}x{}, expected {k}x{k}", g.rows(), g.cols())));
    }
    if !off_diagonal_zero(gamma.m(), g) {
        return Err(Error::NotInG0("body group element must be block diagonal".into()));
    }
    let body = gamma.body();
    let r = g.transpose().matmul(&body).matmul(g).sub(&body);
    let ok = match S::MODE {
        CoefficientMode::Rational => r.is_zero(),
        CoefficientMode::Float64 => r.max_abs() <= 1e-9 * (1.0 + g.max_abs() * g.max_abs()),
    };
    if !ok {
        return Err(Error::NotInG0("g is not an isometry of the body metric".into()));
    }
    Ok(())
}

/// `g · Y · g⁻¹` for a real body group element `g`.
pub fn action<S: Scalar>(g: &RealMatrix<S>, y: &SuperMatrix<S>, gamma: &GammaForm<S>) -> Result<SuperMatrix<S>> {
    let inv = g.inverse()?;
    lift(gamma, g)?.matmul(y)?.matmul(&lift(gamma, &inv)?)
}

/// `α(exp X0)(Y)`. Rational mode has no exact exponential and reports `Inexact`.
pub fn action_alpha<S: Scalar>(x0: &RealMatrix<S>, y: &NilElement<S>, gamma: &GammaForm<S>) -> Result<NilElement<S>> {
    check_g0(x0, gamma)?;
    let g = S::matrix_exp(x0)?;
    Ok(NilElement { x: action(&g, &y.x, gamma)? })
}

/// `(I − X/2)⁻¹ (I + X/2)`, a rational element of the body group for `X ∈ 𝔤⁰`.
pub fn cayley<S: Scalar>(x0: &RealMatrix<S>) -> Result<RealMatrix<S>> {
    let k = x0.rows();
    let half = x0.scale(&S::from_ratio(1, 2));
    let id = RealMatrix::<S>::identity(k);
    Ok(id.sub(&half).inverse()?.matmul(&id.add(&half)))
}

/// `(g, n)` with `g` a real body isometry and `n ∈ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<S: Scalar> {
    g_body: RealMatrix<S>,
    n_part: NilElement<S>,
}

impl<S: Scalar> GroupElement<S> {
    pub fn new(g_body: RealMatrix<S>, n_part: NilElement<S>, gamma: &GammaForm<S>) -> Result<Self> {
        check_body_isometry(&g_body, gamma)?;
        if n_part.x.shape() != gamma.shape() {
            return Err(Error::ShapeMismatch("nilpotent part does not match Γ".into()));
        }
        Ok(GroupElement { g_body, n_part })
    }

    pub fn identity(gamma: &GammaForm<S>) -> Self {
        GroupElement { g_body: RealMatrix::identity(gamma.shape().dim()), n_part: NilElement::zero(gamma) }
    }

    /// `(exp X0, n)`.
    pub fn from_algebra(x0: &RealMatrix<S>, n_part: NilElement<S>, gamma: &GammaForm<S>) -> Result<Self> {
        check_g0(x0, gamma)?;
        Self::new(S::matrix_exp(x0)?, n_part, gamma)
    }

    /// `(cayley(X0), n)`; exact in rational mode.
    pub fn from_cayley(x0: &RealMatrix<S>, n_part: NilElement<S>, gamma: &GammaForm<S>) -> Result<Self> {
        check_g0(x0, gamma)?;
        Self::new(cayley(x0)?, n_part, gamma)
    }

    pub fn g_body(&self) -> &RealMatrix<S> {
        &self.g_body
    }

    pub fn n_part(&self) -> &NilElement<S> {
        &self.n_part
    }
}

/// `(g₁, n₁)(g₂, n₂) = (g₁g₂, n₁ ⋄ g₁n₂g₁⁻¹)`.
pub fn semidirect_multiply<S: Scalar>(
    h1: &GroupElement<S>,
    h2: &GroupElement<S>,
    gamma: &GammaForm<S>,
) -> Result<GroupElement<S>> {
    if h1.g_body.rows() != h2.g_body.rows() || h1.n_part.x.shape() != h2.n_part.x.shape() {
        return Err(Error::ShapeMismatch("group elements have different shapes".into()));
    }
    let moved = action(&h1.g_body, &h2.n_part.x, gamma)?;
    let n = diamond(&h1.n_part.x, &moved)?;
    Ok(GroupElement { g_body: h1.g_body.matmul(&h2.g_body), n_part: NilElement { x: n } })
}

/// `(g⁻¹, g⁻¹(−n)g)`.
pub fn inverse<S: Scalar>(h: &GroupElement<S>, gamma: &GammaForm<S>) -> Result<GroupElement<S>> {
    let g_inv = h.g_body.inverse()?;
    let n = action(&g_inv, &h.n_part.x.neg(), gamma)?;
    Ok(GroupElement { g_body: g_inv, n_part: NilElement { x: n } })
}

/// The isometry `exp(n) · g` realizing `h`.
pub fn embed_isometry<S: Scalar>(h: &GroupElement<S>, gamma: &GammaForm<S>) -> Result<SuperMatrix<S>> {
    h.n_part.x.exp_zero_body()?.matmul(&lift(gamma, &h.g_body)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::AlgebraConfig;
    use crate::isometry::{is_isometry, isometry_residual, lie_basis};
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn gamma() -> GammaForm<Q> {
        GammaForm::signature(AlgebraConfig::new(4, CoefficientMode::Rational).unwrap(), 1, 1, 2).unwrap()
    }

    fn nil(g: &GammaForm<Q>, picks: &[(usize, i64)]) -> NilElement<Q> {
        let soul = lie_basis(g, 4).unwrap().soul_matrices();
        let mut x = SuperMatrix::zeros(g.config(), g.shape(), ParityClass::Even);
        for &(i, c) in picks {
            x = x.add(&soul[i % soul.len()].scale(&q(c, 1))).unwrap();
        }
        NilElement::new(x, g).unwrap()
    }

    fn g0_element(g: &GammaForm<Q>, coeffs: &[i64]) -> RealMatrix<Q> {
        let basis = lie_basis(g, 4).unwrap();
        let mut x = RealMatrix::zeros(g.shape().dim(), g.shape().dim());
        for (b, &c) in basis.g0.iter().zip(coeffs) {
            x = x.add(&b.body_matrix().scale(&q(c, 3)));
        }
        x
    }

    #[test]
    fn diamond_examples() {
        let g = gamma();
        let x = nil(&g, &[(0, 1), (9, -2), (30, 1)]);
        let zero = NilElement::zero(&g);
        assert_eq!(x.diamond(&zero).unwrap(), x);
        let twice = x.matrix().scale(&q(2, 1));
        assert_eq!(x.diamond(&x).unwrap().into_matrix(), twice);

        let y = nil(&g, &[(4, 1), (17, 3)]);
        let xy = diamond(x.matrix(), y.matrix()).unwrap();
        let series = bch_series(x.matrix(), y.matrix(), BchOrderConfig::new(6).unwrap()).unwrap();
        assert_eq!(xy, series, "BCH terminates at the nilpotency order");
        assert!(x.diamond(&x.inverse()).unwrap().matrix().is_zero());

        let a = SuperMatrix::<Q>::identity(g.config(), g.shape());
        assert_eq!(diamond(&a, x.matrix()), Err(Error::NonZeroBody));
    }

    #[test]
    fn norm_gate() {
        let g = gamma();
        let big = SuperMatrix::<Q>::identity(g.config(), g.shape());
        assert!(matches!(
            bch_series(&big, &big, BchOrderConfig::default()),
            Err(Error::NormBoundViolation(_))
        ));
        let small = big.scale(&q(1, 10));
        assert!(bch_series(&small, &small, BchOrderConfig::default()).is_ok());
        assert!(BchOrderConfig::new(7).is_err());
    }

    #[test]
    fn semidirect_group_law() {
        let g = gamma();
        let h1 = GroupElement::from_cayley(&g0_element(&g, &[1, 2, 0, -1]), nil(&g, &[(2, 1), (40, 1)]), &g).unwrap();
        let h2 = GroupElement::from_cayley(&g0_element(&g, &[-1, 0, 1, 1]), nil(&g, &[(7, 2), (33, -1)]), &g).unwrap();
        let h3 = GroupElement::from_cayley(&g0_element(&g, &[0, 1, 1, 0]), nil(&g, &[(11, 1)]), &g).unwrap();
        let id = GroupElement::identity(&g);

        assert_eq!(semidirect_multiply(&id, &h1, &g).unwrap(), h1);
        assert_eq!(semidirect_multiply(&h1, &id, &g).unwrap(), h1);
        let inv = inverse(&h1, &g).unwrap();
        assert_eq!(semidirect_multiply(&h1, &inv, &g).unwrap(), id);
        assert_eq!(semidirect_multiply(&inv, &h1, &g).unwrap(), id);

        let left = semidirect_multiply(&semidirect_multiply(&h1, &h2, &g).unwrap(), &h3, &g).unwrap();
        let right = semidirect_multiply(&h1, &semidirect_multiply(&h2, &h3, &g).unwrap(), &g).unwrap();
        assert_eq!(left, right);

        let e1 = embed_isometry(&h1, &g).unwrap();
        let e2 = embed_isometry(&h2, &g).unwrap();
        let e12 = embed_isometry(&semidirect_multiply(&h1, &h2, &g).unwrap(), &g).unwrap();
        assert_eq!(e1.matmul(&e2).unwrap(), e12);
        assert!(isometry_residual(&e12, &g).unwrap().is_zero());
        assert!(is_isometry(&embed_isometry(&id, &g).unwrap(), &g).unwrap());
    }

    #[test]
    fn action_examples() {
        let g = gamma();
        let y = nil(&g, &[(3, 1), (21, -1)]);
        let zero = RealMatrix::zeros(4, 4);
        assert!(matches!(action_alpha(&zero, &y, &g), Err(Error::Inexact(_))));

        let mut bad = RealMatrix::<Q>::zeros(4, 4);
        bad[(0, 0)] = q(1, 1);
        assert!(matches!(action_alpha(&bad, &y, &g), Err(Error::NotInG0(_))));

        let a = cayley(&g0_element(&g, &[1, 0, 2, 0])).unwrap();
        let b = cayley(&g0_element(&g, &[0, 1, 0, -1])).unwrap();
        let composed = action(&a, &action(&b, y.matrix(), &g).unwrap(), &g).unwrap();
        assert_eq!(action(&a.matmul(&b), y.matrix(), &g).unwrap(), composed);
        assert!(composed.has_zero_body());
    }

    #[test]
    fn float_action_of_zero_is_identity() {
        let c = AlgebraConfig::new(3, CoefficientMode::Float64).unwrap();
        let g = GammaForm::<f64>::signature(c, 2, 0, 2).unwrap();
        let soul = lie_basis(&g, 3).unwrap().soul_matrices();
        let y = NilElement::new(soul[1].add(&soul[5].scale(&0.5)).unwrap(), &g).unwrap();
        let moved = action_alpha(&RealMatrix::zeros(4, 4), &y, &g).unwrap();
        assert!(moved.matrix().sub(y.matrix()).unwrap().max_entry_norm() < 1e-14);
    }
}
