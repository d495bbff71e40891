//! Block-graded square matrices over the Grassmann algebra.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{AlgebraConfig, MultiIndex, Supernumber};
use crate::scalar::{ColumnSolver, RealMatrix, Scalar};

/// `(m|n)`: `m` even rows/columns followed by `n` odd ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub m: usize,
    pub n: usize,
}

impl BlockShape {
    pub fn new(m: usize, n: usize) -> Self {
        BlockShape { m, n }
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// Grading of row/column `i`: `false` for even, `true` for odd.
    pub fn is_odd_index(&self, i: usize) -> bool {
        i >= self.m
    }
}

impl fmt::Display for BlockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})", self.m, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityClass {
    Even,
    Odd,
    General,
}

impl ParityClass {
    fn compose(self, other: ParityClass) -> ParityClass {
        use ParityClass::*;
        match (self, other) {
            (Even, Even) | (Odd, Odd) => Even,
            (Even, Odd) | (Odd, Even) => Odd,
            _ => General,
        }
    }

    fn join(self, other: ParityClass) -> ParityClass {
        if self == other {
            self
        } else {
            ParityClass::General
        }
    }
}

/// A square `(m|n)` matrix of supernumbers.
///
/// Equality compares entries only; the parity label is not part of it.
#[derive(Clone)]
pub struct SuperMatrix<S> {
    config: AlgebraConfig,
    shape: BlockShape,
    parity: ParityClass,
    entries: Vec<Supernumber<S>>,
}

impl<S: Scalar> PartialEq for SuperMatrix<S> {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.shape == other.shape && self.entries == other.entries
    }
}

impl<S: Scalar> fmt::Debug for SuperMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SuperMatrix {} {:?} [", self.shape, self.parity)?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| format!("{:?}", self.get(i, j))).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> SuperMatrix<S> {
    pub fn zeros(config: AlgebraConfig, shape: BlockShape, parity: ParityClass) -> Self {
        let k = shape.dim();
        SuperMatrix { config, shape, parity, entries: vec![Supernumber::zero(config); k * k] }
    }

    pub fn identity(config: AlgebraConfig, shape: BlockShape) -> Self {
        let mut m = Self::zeros(config, shape, ParityClass::Even);
        for i in 0..shape.dim() {
            m.entries[i * shape.dim() + i] = Supernumber::one(config);
        }
        m
    }

    /// Row-major entries; the parity class is checked against the blocks.
    pub fn from_entries(
        config: AlgebraConfig,
        shape: BlockShape,
        parity: ParityClass,
        entries: Vec<Supernumber<S>>,
    ) -> Result<Self> {
        let k = shape.dim();
        if entries.len() != k * k {
            return Err(Error::LengthMismatch { expected: k * k, got: entries.len() });
        }
        if entries.iter().any(|e| e.config() != config) {
            return Err(Error::ConfigMismatch);
        }
        let m = SuperMatrix { config, shape, parity, entries };
        m.check_parity()?;
        Ok(m)
    }

    /// Embeds a real matrix (all entries are bodies).
    pub fn from_real(
        config: AlgebraConfig,
        shape: BlockShape,
        parity: ParityClass,
        real: &RealMatrix<S>,
    ) -> Result<Self> {
        let k = shape.dim();
        if real.rows() != k || real.cols() != k {
            return Err(Error::ShapeMismatch(format!("real matrix is not {k}x{k}")));
        }
        let entries = (0..k * k)
            .map(|idx| Supernumber::scalar(config, real[(idx / k, idx % k)].clone()))
            .collect();
        Self::from_entries(config, shape, parity, entries)
    }

    /// Entrywise `c · ζ^index · real`.
    pub fn from_real_monomial(
        config: AlgebraConfig,
        shape: BlockShape,
        parity: ParityClass,
        index: MultiIndex,
        real: &RealMatrix<S>,
    ) -> Result<Self> {
        let k = shape.dim();
        let entries = (0..k * k)
            .map(|idx| Supernumber::monomial(config, index, real[(idx / k, idx % k)].clone()))
            .collect();
        Self::from_entries(config, shape, parity, entries)
    }

    pub fn from_fn(
        config: AlgebraConfig,
        shape: BlockShape,
        parity: ParityClass,
        mut f: impl FnMut(usize, usize) -> Supernumber<S>,
    ) -> Result<Self> {
        let k = shape.dim();
        let entries = (0..k * k).map(|idx| f(idx / k, idx % k)).collect();
        Self::from_entries(config, shape, parity, entries)
    }

    fn from_fn_unchecked(
        config: AlgebraConfig,
        shape: BlockShape,
        parity: ParityClass,
        mut f: impl FnMut(usize, usize) -> Supernumber<S>,
    ) -> Self {
        let k = shape.dim();
        let entries = (0..k * k).map(|idx| f(idx / k, idx % k)).collect();
        SuperMatrix { config, shape, parity, entries }
    }

    pub fn config(&self) -> AlgebraConfig {
        self.config
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn parity(&self) -> ParityClass {
        self.parity
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> &Supernumber<S> {
        &self.entries[i * self.dim() + j]
    }

    pub fn entries(&self) -> &[Supernumber<S>] {
        &self.entries
    }

    /// Replaces an entry, re-checking the parity class.
    pub fn set(&mut self, i: usize, j: usize, value: Supernumber<S>) -> Result<()> {
        if value.config() != self.config {
            return Err(Error::ConfigMismatch);
        }
        let k = self.dim();
        let old = std::mem::replace(&mut self.entries[i * k + j], value);
        if let Err(e) = self.check_entry(i, j) {
            self.entries[i * k + j] = old;
            return Err(e);
        }
        Ok(())
    }

    /// Re-labels the parity class after validating it.
    pub fn with_parity(mut self, parity: ParityClass) -> Result<Self> {
        self.parity = parity;
        self.check_parity()?;
        Ok(self)
    }

    fn entry_should_be_even(&self, i: usize, j: usize) -> Option<bool> {
        let diagonal_block = self.shape.is_odd_index(i) == self.shape.is_odd_index(j);
        match self.parity {
            ParityClass::Even => Some(diagonal_block),
            ParityClass::Odd => Some(!diagonal_block),
            ParityClass::General => None,
        }
    }

    fn check_entry(&self, i: usize, j: usize) -> Result<()> {
        let e = self.get(i, j);
        match self.entry_should_be_even(i, j) {
            Some(true) if !e.is_even() => {
                Err(Error::ParityMismatch(format!("entry ({i},{j}) should be even")))
            }
            Some(false) if !e.is_odd() => {
                Err(Error::ParityMismatch(format!("entry ({i},{j}) should be odd")))
            }
            _ => Ok(()),
        }
    }

    fn check_parity(&self) -> Result<()> {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                self.check_entry(i, j)?;
            }
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.config != other.config {
            return Err(Error::ConfigMismatch);
        }
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!("{} vs {}", self.shape, other.shape)));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let k = self.dim();
        let mut out = Self::zeros(self.config, self.shape, self.parity.compose(other.parity));
        for i in 0..k {
            for j in 0..k {
                let slot = &mut out.entries[i * k + j];
                for l in 0..k {
                    slot.add_product_assign(self.get(i, l), other.get(l, j));
                }
                slot.prune();
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_fn_unchecked(self.config, self.shape, self.parity.join(other.parity), |i, j| {
            self.get(i, j) + other.get(i, j)
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_fn_unchecked(self.config, self.shape, self.parity.join(other.parity), |i, j| {
            self.get(i, j) - other.get(i, j)
        }))
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_fn_unchecked(self.config, self.shape, self.parity, |i, j| self.get(i, j).scale(c))
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Entrywise left multiplication by a supernumber.
    pub fn left_scale(&self, z: &Supernumber<S>) -> Self {
        let parity = if z.is_even() { self.parity } else { ParityClass::General };
        Self::from_fn_unchecked(self.config, self.shape, parity, |i, j| z * self.get(i, j))
    }

    /// Plain commutator `XY − YX`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Anticommutator `XY + YX`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.add(&other.matmul(self)?)
    }

    /// Grade involution applied to every entry (negates odd parts).
    pub fn grade_involution(&self) -> Self {
        Self::from_fn_unchecked(self.config, self.shape, self.parity, |i, j| {
            self.get(i, j).grade_involution()
        })
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::identity(self.config, self.shape);
        for _ in 0..k {
            acc = acc.matmul(self)?;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Supernumber::is_zero)
    }

    /// Σ of entry ℓ₁ norms.
    pub fn norm_l1(&self) -> S {
        self.entries.iter().fold(S::zero(), |acc, e| acc + e.norm())
    }

    /// Largest entry ℓ₁ norm.
    pub fn max_entry_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm().to_f64()).fold(0.0, f64::max)
    }

    /// Induced ∞-norm with ℓ₁ entry norms (submultiplicative).
    pub fn row_norm(&self) -> f64 {
        let k = self.dim();
        (0..k)
            .map(|i| (0..k).map(|j| self.get(i, j).norm().to_f64()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Supertranspose of an even matrix: `[[A, C], [D, B]] ↦ [[Aᵀ, −Dᵀ], [Cᵀ, Bᵀ]]`.
    pub fn supertranspose(&self) -> Result<Self> {
        if self.parity != ParityClass::Even {
            return Err(Error::ParityMismatch("supertranspose needs an even matrix".into()));
        }
        let shape = self.shape;
        Ok(Self::from_fn_unchecked(self.config, shape, ParityClass::Even, |i, j| {
            let src = self.get(j, i);
            // (i, j) in the upper-right block comes from D.
            if !shape.is_odd_index(i) && shape.is_odd_index(j) {
                -src
            } else {
                src.clone()
            }
        }))
    }

    /// Plain transpose (no grading signs).
    pub fn transpose(&self) -> Self {
        Self::from_fn_unchecked(self.config, self.shape, self.parity, |i, j| self.get(j, i).clone())
    }

    /// Entrywise body.
    pub fn body_matrix(&self) -> RealMatrix<S> {
        RealMatrix::from_fn(self.dim(), self.dim(), |i, j| self.get(i, j).body())
    }

    pub fn has_zero_body(&self) -> bool {
        self.entries.iter().all(|e| !e.has_body())
    }

    /// Entrywise soul.
    pub fn soul_matrix(&self) -> Self {
        Self::from_fn_unchecked(self.config, self.shape, self.parity, |i, j| self.get(i, j).soul())
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.terms().all(|(idx, _)| idx.is_empty()))
    }

    /// Inverse through `N = B(I + B⁻¹S)`: `N⁻¹ = Σ_k (−B⁻¹S)^k B⁻¹`.
    pub fn invert(&self) -> Result<Self> {
        let body = self.body_matrix();
        let body_inv = body.inverse()?;
        let binv = Self::from_real(self.config, self.shape, ParityClass::General, &body_inv)?;
        let step = binv.matmul(&self.soul_matrix())?.neg();
        let mut term = Self::identity(self.config, self.shape);
        let mut sum = term.clone();
        loop {
            term = term.matmul(&step)?;
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term)?;
        }
        let inv = sum.matmul(&binv)?;
        Ok(inv.relabel_like(self.parity))
    }

    fn relabel_like(mut self, parity: ParityClass) -> Self {
        let prev = self.parity;
        self.parity = parity;
        if self.check_parity().is_err() {
            self.parity = prev;
        }
        self
    }

    /// exp(X) = Σ X^k/k! for zero-body X; the sum terminates.
    pub fn exp_zero_body(&self) -> Result<Self> {
        if !self.has_zero_body() {
            return Err(Error::NonZeroBody);
        }
        let mut term = Self::identity(self.config, self.shape);
        let mut sum = term.clone();
        let mut k: i64 = 0;
        loop {
            k += 1;
            term = term.matmul(self)?.scale(&S::from_ratio(1, k));
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term)?;
        }
        Ok(sum.relabel_like(self.parity.compose(ParityClass::Even)))
    }

    /// log(U) = Σ (−1)^(k+1) (U − I)^k / k for unipotent U.
    pub fn log_unipotent(&self) -> Result<Self> {
        let identity = Self::identity(self.config, self.shape);
        let body_gap = self.body_matrix().sub(&RealMatrix::identity(self.dim()));
        let ok = match S::MODE {
            crate::scalar::CoefficientMode::Rational => body_gap.is_zero(),
            crate::scalar::CoefficientMode::Float64 => body_gap.max_abs() <= 1e-12,
        };
        if !ok {
            return Err(Error::NotUnipotent);
        }
        let nil = self.sub(&identity)?.soul_matrix();
        let mut term = identity;
        let mut sum = Self::zeros(self.config, self.shape, self.parity);
        let mut k: i64 = 0;
        loop {
            k += 1;
            term = term.matmul(&nil)?;
            if term.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            sum = sum.add(&term.scale(&S::from_ratio(sign, k)))?;
        }
        Ok(sum.relabel_like(self.parity))
    }

    /// Coordinates (ζ^I-coefficient real matrices) of this matrix.
    pub(crate) fn components(&self) -> std::collections::BTreeMap<MultiIndex, Vec<S>> {
        let k = self.dim();
        let mut out: std::collections::BTreeMap<MultiIndex, Vec<S>> = Default::default();
        for (idx, e) in self.entries.iter().enumerate() {
            for (mi, c) in e.terms() {
                out.entry(mi).or_insert_with(|| vec![S::zero(); k * k])[idx] = c.clone();
            }
        }
        out
    }

    /// Block-diagonal assembly: `a` on the even block, `b` on the odd block.
    pub fn block_diagonal(a: &[Vec<Supernumber<S>>], b: &[Vec<Supernumber<S>>], config: AlgebraConfig) -> Result<Self> {
        let shape = BlockShape::new(a.len(), b.len());
        let m = shape.m;
        Self::from_fn(config, shape, ParityClass::Even, |i, j| {
            if i < m && j < m {
                a[i][j].clone()
            } else if i >= m && j >= m {
                b[i - m][j - m].clone()
            } else {
                Supernumber::zero(config)
            }
        })
    }
}

/// Which presentation an [`AdOperator`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// Supernumber coordinates against a real homogeneous basis `{X_i}` of
    /// the underlying graded Lie algebra.
    Graded,
    /// Real coordinates against the Banach basis `{ζ^J X_i}`.
    Banach,
}

/// Matrix of `ad_X` on a chosen basis, as a flat `(k|0)` matrix.
#[derive(Clone)]
pub struct AdOperator<S> {
    pub source: SuperMatrix<S>,
    pub matrix: SuperMatrix<S>,
    pub basis_tag: BasisKind,
}

impl<S: Scalar> fmt::Debug for AdOperator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdOperator")
            .field("basis_tag", &self.basis_tag)
            .field("matrix", &self.matrix)
            .finish()
    }
}

/// Outcome of [`spectrum_gate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spectrum {
    Invertible,
    Singular,
}

fn flatten_real<S: Scalar>(basis: &[SuperMatrix<S>]) -> Result<RealMatrix<S>> {
    let first = basis.first().ok_or_else(|| Error::BasisDegenerate("empty basis".into()))?;
    let k = first.dim();
    for b in basis {
        first.check_compatible(b)?;
    }
    let mut cols = RealMatrix::zeros(k * k, basis.len());
    for (c, b) in basis.iter().enumerate() {
        for (idx, e) in b.entries.iter().enumerate() {
            cols[(idx, c)] = e.body();
        }
    }
    Ok(cols)
}

/// Supernumber coordinates of `y` against real basis matrices.
pub struct GradedCoordinates<S> {
    solver: ColumnSolver<S>,
    config: AlgebraConfig,
}

impl<S: Scalar> GradedCoordinates<S> {
    pub fn new(basis: &[SuperMatrix<S>]) -> Result<Self> {
        if basis.iter().any(|b| !b.is_real()) {
            return Err(Error::BasisDegenerate("graded basis elements must be real".into()));
        }
        let solver = ColumnSolver::new(flatten_real(basis)?)?;
        Ok(GradedCoordinates { solver, config: basis[0].config })
    }

    /// `y = Σ_i y^i X_i` with `y^i` supernumbers; errors if `y` is outside the span.
    pub fn solve(&self, y: &SuperMatrix<S>) -> Result<Vec<Supernumber<S>>> {
        let mut coords = vec![Supernumber::zero(self.config); self.solver.dim()];
        for (mi, comp) in y.components() {
            let c = self
                .solver
                .solve(&comp)
                .ok_or_else(|| Error::BasisDegenerate(format!("component ζ{mi} is outside the span")))?;
            for (slot, value) in coords.iter_mut().zip(c) {
                slot.add_scaled_assign(&Supernumber::monomial(self.config, mi, S::one()), &value);
            }
        }
        for c in coords.iter_mut() {
            c.prune();
        }
        Ok(coords)
    }
}

/// `ad_X` with supernumber coordinates against a real homogeneous basis.
///
/// Column `j` holds the coordinates of `X X_j − X_j X` for even `X_j` and
/// of `X X_j − X_j X^σ` for odd `X_j` (`σ` the grade involution), so that
/// for `Y = Σ y^j X_j` with parity-matched coefficients the coordinates of
/// `[X, Y]` are `M · ŷ`.
pub fn ad_operator<S: Scalar>(x: &SuperMatrix<S>, basis: &[SuperMatrix<S>]) -> Result<AdOperator<S>> {
    let coords = GradedCoordinates::new(basis)?;
    if let Some(b) = basis.first() {
        x.check_compatible(b)?;
    }
    let twisted = x.grade_involution();
    let k = basis.len();
    let mut columns = Vec::with_capacity(k);
    for b in basis {
        let right = if b.parity == ParityClass::Odd { &twisted } else { x };
        let image = x.matmul(b)?.sub(&b.matmul(right)?)?;
        columns.push(coords.solve(&image)?);
    }
    let matrix = SuperMatrix::from_fn_unchecked(
        x.config,
        BlockShape::new(k, 0),
        ParityClass::General,
        |i, j| columns[j][i].clone(),
    );
    Ok(AdOperator { source: x.clone(), matrix, basis_tag: BasisKind::Graded })
}

/// `ad_X` with real coordinates against an ℝ-linearly independent basis of
/// matrices (typically the `ζ^J X_i`), using the plain commutator.
pub fn ad_operator_banach<S: Scalar>(x: &SuperMatrix<S>, basis: &[SuperMatrix<S>]) -> Result<AdOperator<S>> {
    let first = basis.first().ok_or_else(|| Error::BasisDegenerate("empty basis".into()))?;
    x.check_compatible(first)?;
    let config = x.config;
    let slots: Vec<MultiIndex> = config.all_indices().collect();
    let k2 = x.dim() * x.dim();
    let flatten = |m: &SuperMatrix<S>| -> Vec<S> {
        let mut v = vec![S::zero(); k2 * slots.len()];
        for (idx, e) in m.entries.iter().enumerate() {
            for (mi, c) in e.terms() {
                v[mi.bits() as usize * k2 + idx] = c.clone();
            }
        }
        v
    };
    let rows = k2 * slots.len();
    let mut cols = RealMatrix::zeros(rows, basis.len());
    for (c, b) in basis.iter().enumerate() {
        x.check_compatible(b)?;
        for (r, v) in flatten(b).into_iter().enumerate() {
            cols[(r, c)] = v;
        }
    }
    let solver = ColumnSolver::new(cols)?;
    let k = basis.len();
    let mut matrix = SuperMatrix::zeros(config, BlockShape::new(k, 0), ParityClass::General);
    for (j, b) in basis.iter().enumerate() {
        let image = x.commutator(b)?;
        let c = solver
            .solve(&flatten(&image))
            .ok_or_else(|| Error::BasisDegenerate("commutator leaves the span".into()))?;
        for (i, value) in c.into_iter().enumerate() {
            matrix.entries[i * k + j] = Supernumber::scalar(config, value);
        }
    }
    Ok(AdOperator { source: x.clone(), matrix, basis_tag: BasisKind::Banach })
}

impl<S: Scalar> AdOperator<S> {
    /// Smallest `K ≤ limit` with `matrix^K = 0`.
    pub fn nilpotency_index(&self, limit: u32) -> Option<u32> {
        let mut power = SuperMatrix::identity(self.matrix.config, self.matrix.shape);
        for k in 1..=limit {
            power = power.matmul(&self.matrix).ok()?;
            let negligible = S::MODE == crate::scalar::CoefficientMode::Float64
                && power.max_entry_norm() <= 1e-12 * (1.0 + self.matrix.max_entry_norm());
            if power.is_zero() || negligible {
                return Some(k);
            }
        }
        None
    }

    fn check_gate_precondition(&self) -> Result<()> {
        match self.basis_tag {
            BasisKind::Graded => {
                let scale = self.matrix.max_entry_norm();
                let body = self.matrix.body_matrix();
                if !body.is_zero() && !(S::MODE == crate::scalar::CoefficientMode::Float64 && body.max_abs() <= 1e-12 * (1.0 + scale)) {
                    return Err(Error::NonZeroBodyOperator);
                }
            }
            BasisKind::Banach => {
                let k = self.matrix.dim() as u32;
                if self.nilpotency_index(k.max(1)).is_none() {
                    return Err(Error::NonZeroBodyOperator);
                }
            }
        }
        Ok(())
    }

    /// `(ξI − M)⁻¹`, failing exactly when `ξ = 0`.
    pub fn resolvent(&self, xi: &S) -> Result<SuperMatrix<S>> {
        self.check_gate_precondition()?;
        let shifted = SuperMatrix::identity(self.matrix.config, self.matrix.shape)
            .scale(xi)
            .sub(&self.matrix)?;
        match self.basis_tag {
            BasisKind::Graded => shifted.invert(),
            BasisKind::Banach => {
                if xi.is_zero() {
                    return Err(Error::body_not_invertible());
                }
                // Nilpotent M: (ξ − M)⁻¹ = Σ_j M^j / ξ^(j+1).
                let inv_xi = S::one() / xi.clone();
                let mut term = SuperMatrix::identity(self.matrix.config, self.matrix.shape).scale(&inv_xi);
                let mut sum = term.clone();
                for _ in 0..self.matrix.dim() {
                    term = term.matmul(&self.matrix)?.scale(&inv_xi);
                    if term.is_zero() {
                        break;
                    }
                    sum = sum.add(&term)?;
                }
                Ok(sum)
            }
        }
    }
}

/// Decides invertibility of `ξI − ad` from its body `ξI`.
pub fn spectrum_gate<S: Scalar>(ad: &AdOperator<S>, xi: &S) -> Result<Spectrum> {
    ad.check_gate_precondition()?;
    let k = ad.matrix.dim();
    let body = RealMatrix::<S>::identity(k).scale(xi);
    Ok(if S::well_conditioned(&body) { Spectrum::Invertible } else { Spectrum::Singular })
}
