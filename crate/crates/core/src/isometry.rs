//! Isometries of `Γ = diag(η, 𝒥)` and their Lie superalgebra.
//!
//! An even matrix `N` is an isometry when `N^ST Γ N = Γ`. Writing
//! `ℓ = [[a, c], [d, b]]`, the linearized condition `ℓ^ST Γ + Γ ℓ = 0`
//! splits into
//!
//! 1. `aᵀη + ηa = 0`
//! 2. `bᵀ𝒥 + 𝒥b = 0`
//! 3. `ηc − dᵀ𝒥 = 0`
//!
//! (the lower-left block of the full identity is the transpose of the third).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{AlgebraConfig, MultiIndex, Supernumber};
use crate::metric::{gamma_matrix, CanonicalizationResult};
use crate::scalar::{CoefficientMode, RealMatrix, Scalar};
use crate::supermatrix::{BlockShape, GradedCoordinates, ParityClass, SuperMatrix};

/// `Γ = diag(η, 𝒥)` with `η` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaForm<S: Scalar> {
    config: AlgebraConfig,
    eta: Vec<Supernumber<S>>,
    n: usize,
}

impl<S: Scalar> GammaForm<S> {
    pub fn new(config: AlgebraConfig, eta: Vec<Supernumber<S>>, n: usize) -> Result<Self> {
        if n % 2 == 1 {
            return Err(Error::OddDimensionOdd(n));
        }
        for (i, e) in eta.iter().enumerate() {
            if e.config() != config {
                return Err(Error::ConfigMismatch);
            }
            if !e.is_even() {
                return Err(Error::NotEven(format!("η_{i} is not even")));
            }
            if e.body().is_zero() {
                return Err(Error::DegenerateBody(format!("η_{i} has zero body")));
            }
        }
        Ok(GammaForm { config, eta, n })
    }

    /// `η = diag(+1 × p, −1 × q)`.
    pub fn signature(config: AlgebraConfig, p: usize, q: usize, n: usize) -> Result<Self> {
        let eta = (0..p + q)
            .map(|i| Supernumber::scalar(config, if i < p { S::one() } else { -S::one() }))
            .collect();
        Self::new(config, eta, n)
    }

    pub fn from_canonical(result: &CanonicalizationResult<S>) -> Result<Self> {
        let shape = result.gamma.shape();
        Self::new(result.gamma.config(), result.d.clone(), shape.n)
    }

    pub fn config(&self) -> AlgebraConfig {
        self.config
    }

    pub fn eta(&self) -> &[Supernumber<S>] {
        &self.eta
    }

    pub fn m(&self) -> usize {
        self.eta.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> BlockShape {
        BlockShape::new(self.m(), self.n)
    }

    pub fn to_matrix(&self) -> SuperMatrix<S> {
        gamma_matrix(self.config, &self.eta, self.n).expect("gamma blocks are even")
    }

    /// True when every `η_i` is the real number `±1`.
    pub fn is_body_reduced(&self) -> bool {
        self.eta.iter().all(|e| {
            let (b, s) = e.body_soul();
            s.is_zero() && b.abs() == S::one()
        })
    }

    /// Real `η` and `𝒥` assembled into `β(Γ)`.
    pub fn body(&self) -> RealMatrix<S> {
        self.to_matrix().body_matrix()
    }

    fn j_entry(&self, alpha: usize, beta: usize) -> S {
        if alpha % 2 == 0 && beta == alpha + 1 {
            S::one()
        } else if alpha % 2 == 1 && beta + 1 == alpha {
            -S::one()
        } else {
            S::zero()
        }
    }

    fn check_shape(&self, x: &SuperMatrix<S>) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::ShapeMismatch(format!("matrix is {}, Γ is {}", x.shape(), self.shape())));
        }
        if x.config() != self.config {
            return Err(Error::ConfigMismatch);
        }
        Ok(())
    }
}

fn max_norm<S: Scalar>(entries: impl IntoIterator<Item = Supernumber<S>>) -> S {
    entries.into_iter().map(|e| e.norm()).fold(S::zero(), |a, b| if b > a { b } else { a })
}

fn within<S: Scalar>(residual: &S, tol: f64) -> bool {
    match S::MODE {
        CoefficientMode::Rational => residual.is_zero(),
        CoefficientMode::Float64 => residual.to_f64() <= tol,
    }
}

/// Largest entry ℓ₁ norm of `N^ST Γ N − Γ`.
pub fn isometry_residual<S: Scalar>(n: &SuperMatrix<S>, gamma: &GammaForm<S>) -> Result<S> {
    gamma.check_shape(n)?;
    let n = n
        .clone()
        .with_parity(ParityClass::Even)
        .map_err(|e| Error::ParityMismatch(e.to_string()))?;
    let g = gamma.to_matrix();
    let r = n.supertranspose()?.matmul(&g)?.matmul(&n)?.sub(&g)?;
    Ok(max_norm(r.entries().iter().cloned()))
}

pub fn is_isometry<S: Scalar>(n: &SuperMatrix<S>, gamma: &GammaForm<S>) -> Result<bool> {
    let r = isometry_residual(n, gamma)?;
    let scale = n.max_entry_norm();
    Ok(within(&r, 1e-10 * (1.0 + scale * scale)))
}

/// Result of one linearized condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub residual: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub member: bool,
    pub conditions: Vec<ConditionCheck>,
    /// Outcome of the single test `ℓ^ST Γ = −Γ ℓ`.
    pub supertranspose_test: bool,
    pub agree: bool,
}

impl MembershipReport {
    pub fn violated(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| !c.satisfied).map(|c| c.condition.as_str()).collect()
    }
}

/// Checks the three block conditions and the single supertranspose identity.
pub fn lie_membership<S: Scalar>(ell: &SuperMatrix<S>, gamma: &GammaForm<S>) -> Result<MembershipReport> {
    gamma.check_shape(ell)?;
    let config = gamma.config;
    let (m, n) = (gamma.m(), gamma.n());
    let eta = &gamma.eta;
    let tol = 1e-10 * (1.0 + ell.max_entry_norm() * (1.0 + gamma.to_matrix().max_entry_norm()));
    let zero = || Supernumber::<S>::zero(config);

    let mut first = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            first.push(&(ell.get(j, i) * &eta[j]) + &(&eta[i] * ell.get(i, j)));
        }
    }
    let mut second = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = zero();
            for g in 0..n {
                let jgb = gamma.j_entry(g, b);
                if !jgb.is_zero() {
                    acc = &acc + &ell.get(m + g, m + a).scale(&jgb);
                }
                let jag = gamma.j_entry(a, g);
                if !jag.is_zero() {
                    acc = &acc + &ell.get(m + g, m + b).scale(&jag);
                }
            }
            second.push(acc);
        }
    }
    let mut third = Vec::with_capacity(m * n);
    for i in 0..m {
        for a in 0..n {
            let mut acc = &eta[i] * ell.get(i, m + a);
            for b in 0..n {
                let jba = gamma.j_entry(b, a);
                if !jba.is_zero() {
                    acc = &acc - &ell.get(m + b, i).scale(&jba);
                }
            }
            third.push(acc);
        }
    }
    let conditions: Vec<ConditionCheck> = [("a^T eta + eta a = 0", first), ("b^T J + J b = 0", second), ("eta c - d^T J = 0", third)]
        .into_iter()
        .map(|(name, entries)| {
            let r = max_norm(entries);
            ConditionCheck { condition: name.to_string(), residual: r.to_f64(), satisfied: within(&r, tol) }
        })
        .collect();

    let g = gamma.to_matrix();
    let full = ell.supertranspose()?.matmul(&g)?.add(&g.matmul(ell)?)?;
    let supertranspose_test = within(&max_norm(full.entries().iter().cloned()), tol);
    let member = conditions.iter().all(|c| c.satisfied);
    Ok(MembershipReport { member, conditions, supertranspose_test, agree: member == supertranspose_test })
}

/// Which part of the graded algebra a Banach basis element comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasePart {
    G0,
    G1,
}

/// `ζ^J ⊗ X` with `X` the `base`-th element of `part`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BanachElement {
    pub index: MultiIndex,
    pub part: BasePart,
    pub base: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieBasis<S: Scalar> {
    pub g0: Vec<SuperMatrix<S>>,
    pub g1: Vec<SuperMatrix<S>>,
    pub hj: Vec<BanachElement>,
}

impl<S: Scalar> LieBasis<S> {
    /// `g0` followed by `g1`.
    pub fn graded(&self) -> Vec<SuperMatrix<S>> {
        self.g0.iter().chain(&self.g1).cloned().collect()
    }

    pub fn base(&self, e: &BanachElement) -> &SuperMatrix<S> {
        match e.part {
            BasePart::G0 => &self.g0[e.base],
            BasePart::G1 => &self.g1[e.base],
        }
    }

    /// Matrix realization of a Banach basis element.
    pub fn banach_matrix(&self, e: &BanachElement) -> SuperMatrix<S> {
        let x = self.base(e);
        let mono = Supernumber::monomial(x.config(), e.index, S::one());
        x.left_scale(&mono).with_parity(ParityClass::Even).expect("parity-matched Banach element")
    }

    pub fn banach_matrices(&self) -> Vec<SuperMatrix<S>> {
        self.hj.iter().map(|e| self.banach_matrix(e)).collect()
    }

    /// Banach elements with `J ≠ ∅`, spanning the nilpotent ideal.
    pub fn soul_matrices(&self) -> Vec<SuperMatrix<S>> {
        self.hj.iter().filter(|e| !e.index.is_empty()).map(|e| self.banach_matrix(e)).collect()
    }
}

/// Real bases of `𝔤⁰ = so(p,q) ⊕ sp(n)` and `𝔤¹`, and the Banach basis
/// `ζ^J X_i` over the first `generators` generators.
pub fn lie_basis<S: Scalar>(gamma: &GammaForm<S>, generators: usize) -> Result<LieBasis<S>> {
    if !gamma.is_body_reduced() {
        return Err(Error::NotBodyReduced("η entries must be ±1".into()));
    }
    let config = gamma.config;
    if generators > config.generators() {
        return Err(Error::InvalidConfig(format!(
            "{generators} generators requested, algebra has {}",
            config.generators()
        )));
    }
    let shape = gamma.shape();
    let (m, n) = (gamma.m(), gamma.n());
    let k = m + n;
    let eta: Vec<S> = gamma.eta.iter().map(Supernumber::body).collect();
    let unit = |entries: &[(usize, usize, S)]| -> RealMatrix<S> {
        let mut r = RealMatrix::<S>::zeros(k, k);
        for (i, j, v) in entries {
            r[(*i, *j)] = r[(*i, *j)].clone() + v.clone();
        }
        r
    };

    let mut g0 = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let r = unit(&[(i, j, S::one()), (j, i, -(eta[i].clone() * eta[j].clone()))]);
            g0.push(SuperMatrix::from_real(config, shape, ParityClass::Even, &r)?);
        }
    }
    // b = 𝒥S with S running over the symmetric matrix units.
    for p in 0..n {
        for q in p..n {
            let mut sym = RealMatrix::<S>::zeros(n, n);
            sym[(p, q)] = S::one();
            sym[(q, p)] = S::one();
            let mut entries = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    let mut v = S::zero();
                    for g in 0..n {
                        v = v + gamma.j_entry(a, g) * sym[(g, b)].clone();
                    }
                    if !v.is_zero() {
                        entries.push((m + a, m + b, v));
                    }
                }
            }
            g0.push(SuperMatrix::from_real(config, shape, ParityClass::Even, &unit(&entries))?);
        }
    }
    // d = E_{αi}, c = η⁻¹ dᵀ 𝒥.
    let mut g1 = Vec::new();
    for i in 0..m {
        for alpha in 0..n {
            let mut entries = vec![(m + alpha, i, S::one())];
            for b in 0..n {
                let v = gamma.j_entry(alpha, b) / eta[i].clone();
                if !v.is_zero() {
                    entries.push((i, m + b, v));
                }
            }
            g1.push(SuperMatrix::from_real(config, shape, ParityClass::Odd, &unit(&entries))?);
        }
    }

    let mut hj = Vec::new();
    for bits in 0u32..(1u32 << generators) {
        let index = MultiIndex::from_bits(bits);
        let (part, count) = if index.is_even() { (BasePart::G0, g0.len()) } else { (BasePart::G1, g1.len()) };
        hj.extend((0..count).map(|base| BanachElement { index, part, base }));
    }
    Ok(LieBasis { g0, g1, hj })
}

/// `β(ℓ)` restricted to the diagonal blocks.
pub fn body_project<S: Scalar>(ell: &SuperMatrix<S>) -> RealMatrix<S> {
    let m = ell.shape().m;
    let body = ell.body_matrix();
    RealMatrix::from_fn(body.rows(), body.cols(), |i, j| {
        if (i < m) == (j < m) {
            body[(i, j)].clone()
        } else {
            S::zero()
        }
    })
}

/// Supernumber coordinates of `ell` against a real basis.
pub fn coordinates<S: Scalar>(ell: &SuperMatrix<S>, basis: &[SuperMatrix<S>]) -> Result<Vec<Supernumber<S>>> {
    GradedCoordinates::new(basis)?.solve(ell)
}

/// `Σ_i ||y^i|| · ||X_i||`.
pub fn u_norm<S: Scalar>(coords: &[Supernumber<S>], basis_norms: &[S]) -> Result<S> {
    if coords.len() != basis_norms.len() {
        return Err(Error::LengthMismatch { expected: basis_norms.len(), got: coords.len() });
    }
    Ok(coords
        .iter()
        .zip(basis_norms)
        .fold(S::zero(), |acc, (y, w)| acc + y.norm() * w.clone()))
}

/// Graded bracket of real homogeneous elements: anticommutator for two odd
/// elements, commutator otherwise.
pub fn graded_bracket<S: Scalar>(x: &SuperMatrix<S>, y: &SuperMatrix<S>) -> Result<SuperMatrix<S>> {
    if x.parity() == ParityClass::Odd && y.parity() == ParityClass::Odd {
        x.anticommutator(y)
    } else {
        x.commutator(y)
    }
}

/// Structure constants `f^i_kj` with `[X_k, X_j] = Σ_i f^i_kj X_i`, indexed `[k][j][i]`.
pub fn structure_constants<S: Scalar>(basis: &[SuperMatrix<S>]) -> Result<Vec<Vec<Vec<S>>>> {
    let solver = GradedCoordinates::new(basis)?;
    basis
        .iter()
        .map(|xk| {
            basis
                .iter()
                .map(|xj| {
                    let coords = solver.solve(&graded_bracket(xk, xj)?)?;
                    Ok(coords.iter().map(Supernumber::body).collect())
                })
                .collect()
        })
        .collect()
}

/// Uniform basis norm `c = max(1, max_{k,j} Σ_i |f^i_kj|)`, which makes
/// [`u_norm`] submultiplicative under the bracket.
pub fn basis_norms<S: Scalar>(basis: &[SuperMatrix<S>]) -> Result<Vec<S>> {
    let f = structure_constants(basis)?;
    let mut c = S::one();
    for row in &f {
        for col in row {
            let s = col.iter().fold(S::zero(), |acc, v| acc + v.abs());
            if s > c {
                c = s;
            }
        }
    }
    Ok(vec![c; basis.len()])
}
