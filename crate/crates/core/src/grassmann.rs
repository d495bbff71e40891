//! Supernumbers: the Grassmann algebra on `L` anticommuting generators with
//! the ℓ₁ norm.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};


use crate::error::{Error, Result};
use crate::scalar::{CoefficientMode, Scalar};

/// Generator count, coefficient mode, and pruning tolerance shared by all
/// supernumbers that may be combined with each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraConfig {
    generators: u8,
    mode: CoefficientMode,
    zero_tolerance: f64,
}

impl AlgebraConfig {
    pub const MAX_GENERATORS: usize = 24;
    pub const DEFAULT_GENERATORS: usize = 6;
    pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-14;

    pub fn new(generators: usize, mode: CoefficientMode) -> Result<Self> {
        if generators == 0 || generators > Self::MAX_GENERATORS {
            return Err(Error::InvalidConfig(format!(
                "generator count must be in 1..={}, got {generators}",
                Self::MAX_GENERATORS
            )));
        }
        let zero_tolerance = match mode {
            CoefficientMode::Float64 => Self::DEFAULT_FLOAT_TOLERANCE,
            CoefficientMode::Rational => 0.0,
        };
        Ok(AlgebraConfig { generators: generators as u8, mode, zero_tolerance })
    }

    /// Default configuration for the scalar type `S`.
    pub fn for_scalar<S: Scalar>(generators: usize) -> Result<Self> {
        Self::new(generators, S::MODE)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        if tol.is_nan() || tol < 0.0 {
            return Err(Error::InvalidConfig("zero_tolerance must be non-negative".into()));
        }
        if self.mode == CoefficientMode::Rational && tol != 0.0 {
            return Err(Error::InvalidConfig("zero_tolerance must be 0 in rational mode".into()));
        }
        self.zero_tolerance = tol;
        Ok(self)
    }

    pub fn generators(&self) -> usize {
        self.generators as usize
    }

    pub fn mode(&self) -> CoefficientMode {
        self.mode
    }

    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tolerance
    }

    /// Every multi-index of the truncated algebra, ascending by bitset.
    pub fn all_indices(&self) -> impl Iterator<Item = MultiIndex> {
        (0u32..(1u32 << self.generators)).map(MultiIndex)
    }
}

/// An increasing string of generator labels, stored as a bitset.
/// Generator `i` (1-based) occupies bit `i - 1`; the empty set is the body slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(u32);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_bits(bits: u32) -> Self {
        MultiIndex(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Build from strictly increasing 1-based generator labels.
    pub fn from_generators(labels: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        let mut prev = 0;
        for &g in labels {
            if g <= prev || g > AlgebraConfig::MAX_GENERATORS {
                return Err(Error::Parse(format!(
                    "multi-index {labels:?} must be strictly increasing labels in 1..=24"
                )));
            }
            bits |= 1 << (g - 1);
            prev = g;
        }
        Ok(MultiIndex(bits))
    }

    pub fn generator(label: usize) -> Self {
        assert!((1..=AlgebraConfig::MAX_GENERATORS).contains(&label));
        MultiIndex(1 << (label - 1))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_even(self) -> bool {
        self.len() % 2 == 0
    }

    /// 1-based labels in increasing order.
    pub fn labels(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b as usize + 1).collect()
    }

    pub fn max_label(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    /// `ζ^self · ζ^other = sign · ζ^(self ∪ other)`, or `None` when the
    /// indices overlap. `true` means the sign is negative.
    pub fn product(self, other: MultiIndex) -> Option<(MultiIndex, bool)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // Each generator of `other` must move left past every larger
        // generator of `self`.
        let mut swaps = 0u32;
        let mut rest = other.0;
        while rest != 0 {
            let j = rest.trailing_zeros();
            swaps += (self.0 >> (j + 1)).count_ones();
            rest &= rest - 1;
        }
        Some((MultiIndex(self.0 | other.0), swaps % 2 == 1))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(ToString::to_string).collect();
        write!(f, "({})", labels.join(","))
    }
}

/// Parity class of a supernumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
    Zero,
}

/// A finite linear combination `Σ z_I ζ^I` with nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct Supernumber<S> {
    config: AlgebraConfig,
    terms: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar + fmt::Display> fmt::Display for Supernumber<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(i, c)| if i.is_empty() { c.to_string() } else { format!("{c}ζ{i}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<S: Scalar> fmt::Debug for Supernumber<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(i, c)| (i.to_string(), c))).finish()
    }
}

impl<S: Scalar> Supernumber<S> {
    pub fn zero(config: AlgebraConfig) -> Self {
        debug_assert_eq!(config.mode, S::MODE);
        Supernumber { config, terms: BTreeMap::new() }
    }

    pub fn one(config: AlgebraConfig) -> Self {
        Self::scalar(config, S::one())
    }

    pub fn scalar(config: AlgebraConfig, c: S) -> Self {
        Self::monomial(config, MultiIndex::EMPTY, c)
    }

    /// `c · ζ^index`. Panics if the index uses generators beyond the config.
    pub fn monomial(config: AlgebraConfig, index: MultiIndex, c: S) -> Self {
        assert!(
            index.max_label() <= config.generators(),
            "multi-index {index} exceeds {} generators",
            config.generators
        );
        let mut z = Self::zero(config);
        if !c.is_zero() {
            z.terms.insert(index, c);
        }
        z
    }

    /// The generator `ζ^label` (1-based).
    pub fn generator(config: AlgebraConfig, label: usize) -> Self {
        Self::monomial(config, MultiIndex::generator(label), S::one())
    }

    pub fn from_terms(config: AlgebraConfig, terms: impl IntoIterator<Item = (MultiIndex, S)>) -> Result<Self> {
        let mut z = Self::zero(config);
        for (index, c) in terms {
            if index.max_label() > config.generators() {
                return Err(Error::Parse(format!(
                    "multi-index {index} exceeds {} generators",
                    config.generators
                )));
            }
            let slot = z.terms.entry(index).or_insert_with(S::zero);
            *slot = slot.clone() + c;
        }
        z.prune();
        Ok(z)
    }

    pub fn config(&self) -> AlgebraConfig {
        self.config
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &S)> {
        self.terms.iter().map(|(i, c)| (*i, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, index: MultiIndex) -> S {
        self.terms.get(&index).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// β(z): the coefficient of the empty index.
    pub fn body(&self) -> S {
        self.coeff(MultiIndex::EMPTY)
    }

    /// s(z) = z − β(z).
    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.terms.remove(&MultiIndex::EMPTY);
        s
    }

    pub fn body_soul(&self) -> (S, Self) {
        (self.body(), self.soul())
    }

    pub fn has_body(&self) -> bool {
        self.terms.contains_key(&MultiIndex::EMPTY)
    }

    /// ℓ₁ norm Σ|z_I|.
    pub fn norm(&self) -> S {
        self.terms.values().fold(S::zero(), |acc, c| acc + c.abs())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs().to_f64()).fold(0.0, f64::max)
    }

    pub fn parity(&self) -> Parity {
        let even = self.terms.keys().all(|i| i.is_even());
        let odd = self.terms.keys().all(|i| !i.is_even());
        match (self.terms.is_empty(), even, odd) {
            (true, _, _) => Parity::Zero,
            (false, true, _) => Parity::Even,
            (false, _, true) => Parity::Odd,
            _ => Parity::Mixed,
        }
    }

    /// Zero counts as both even and odd.
    pub fn is_even(&self) -> bool {
        matches!(self.parity(), Parity::Even | Parity::Zero)
    }

    pub fn is_odd(&self) -> bool {
        matches!(self.parity(), Parity::Odd | Parity::Zero)
    }

    /// Negates the odd part (the grade involution).
    pub fn grade_involution(&self) -> Self {
        let mut z = self.clone();
        for (i, c) in z.terms.iter_mut() {
            if !i.is_even() {
                *c = -c.clone();
            }
        }
        z
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut z = self.clone();
        for v in z.terms.values_mut() {
            *v = v.clone() * c.clone();
        }
        z.prune();
        z
    }

    fn check_config(&self, other: &Self) -> Result<()> {
        if self.config == other.config {
            Ok(())
        } else {
            Err(Error::ConfigMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_config(other)?;
        let mut z = self.clone();
        z.add_scaled_assign(other, &S::one());
        z.prune();
        Ok(z)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_config(other)?;
        let mut z = Self::zero(self.config);
        z.add_product_assign(self, other);
        z.prune();
        Ok(z)
    }

    /// `self += c · other` without pruning.
    pub(crate) fn add_scaled_assign(&mut self, other: &Self, c: &S) {
        for (i, v) in &other.terms {
            let slot = self.terms.entry(*i).or_insert_with(S::zero);
            *slot = slot.clone() + v.clone() * c.clone();
        }
    }

    /// `self += a · b` without pruning; call [`Supernumber::prune`] after a
    /// batch of accumulations.
    pub(crate) fn add_product_assign(&mut self, a: &Self, b: &Self) {
        for (ia, ca) in &a.terms {
            for (ib, cb) in &b.terms {
                if let Some((index, negative)) = ia.product(*ib) {
                    let prod = ca.clone() * cb.clone();
                    let slot = self.terms.entry(index).or_insert_with(S::zero);
                    *slot = if negative { slot.clone() - prod } else { slot.clone() + prod };
                }
            }
        }
    }

    /// Drops zero coefficients, and in float mode those below
    /// `zero_tolerance` times the largest coefficient.
    pub(crate) fn prune(&mut self) {
        let scale = self.max_abs_coeff();
        let tol = self.config.zero_tolerance;
        self.terms.retain(|_, c| !c.negligible(scale, tol));
    }

    /// Σ cᵢ·zᵢ.
    pub fn linear_combine(coeffs: &[S], terms: &[Self]) -> Result<Self> {
        if coeffs.len() != terms.len() {
            return Err(Error::LengthMismatch { expected: coeffs.len(), got: terms.len() });
        }
        let Some(first) = terms.first() else {
            return Err(Error::LengthMismatch { expected: 1, got: 0 });
        };
        let mut z = Self::zero(first.config);
        for (c, t) in coeffs.iter().zip(terms) {
            first.check_config(t)?;
            z.add_scaled_assign(t, c);
        }
        z.prune();
        Ok(z)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.config);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// z⁻¹ = β⁻¹ Σ_k (−s/β)^k, a finite sum since the soul is nilpotent.
    pub fn invert(&self) -> Result<Self> {
        let (b, s) = self.body_soul();
        let scale = self.max_abs_coeff();
        if b.is_zero() || b.abs().to_f64() <= self.config.zero_tolerance * scale {
            return Err(Error::body_not_invertible());
        }
        let binv = S::one() / b;
        let step = s.scale(&-binv.clone());
        let mut term = Self::one(self.config);
        let mut sum = Self::one(self.config);
        loop {
            term = &term * &step;
            if term.is_zero() {
                break;
            }
            sum.add_scaled_assign(&term, &S::one());
        }
        sum.prune();
        Ok(sum.scale(&binv))
    }

    /// (1+μ)^(−1/2) for even μ.
    ///
    /// Pure-soul μ gives a terminating binomial series. A nonzero body is
    /// factored out as `(1+β)^(−1/2) (1 + s/(1+β))^(−1/2)`; in strict mode
    /// this additionally requires ||μ|| < 1.
    pub fn binomial_inverse_sqrt(&self, strict: bool) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::ParityMismatch("binomial series needs an even argument".into()));
        }
        let (b, s) = self.body_soul();
        if b.is_zero() {
            return Ok(inverse_sqrt_series(&s));
        }
        if strict && self.norm() >= S::one() {
            return Err(Error::ConvergenceViolation(format!(
                "||mu|| = {} >= 1 with nonzero body",
                self.norm().to_f64()
            )));
        }
        let base = S::one() + b;
        if base <= S::zero() {
            return Err(Error::ConvergenceViolation("1 + body(mu) must be positive".into()));
        }
        let root = base
            .sqrt_exact()
            .ok_or_else(|| Error::Inexact("square root of 1 + body(mu)".into()))?;
        let rest = inverse_sqrt_series(&s.scale(&(S::one() / base)));
        Ok(rest.scale(&(S::one() / root)))
    }
}

/// Σ_k C(−1/2, k) s^k for nilpotent s.
fn inverse_sqrt_series<S: Scalar>(s: &Supernumber<S>) -> Supernumber<S> {
    let config = s.config;
    let mut sum = Supernumber::one(config);
    let mut power = Supernumber::one(config);
    let mut coeff = S::one();
    let mut k: i64 = 0;
    loop {
        power = &power * s;
        if power.is_zero() {
            break;
        }
        // C(−1/2, k+1) = C(−1/2, k) · (−1/2 − k)/(k + 1)
        coeff = coeff * S::from_ratio(-1 - 2 * k, 2 * (k + 1));
        k += 1;
        sum.add_scaled_assign(&power, &coeff);
    }
    sum.prune();
    sum
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl<S: Scalar> $trait<&Supernumber<S>> for &Supernumber<S> {
            type Output = Supernumber<S>;
            fn $method(self, rhs: &Supernumber<S>) -> Supernumber<S> {
                assert_eq!(self.config, rhs.config, "supernumber config mismatch");
                $inner(self, rhs)
            }
        }
        impl<S: Scalar> $trait for Supernumber<S> {
            type Output = Supernumber<S>;
            fn $method(self, rhs: Supernumber<S>) -> Supernumber<S> {
                (&self).$method(&rhs)
            }
        }
    };
}

fn add_impl<S: Scalar>(a: &Supernumber<S>, b: &Supernumber<S>) -> Supernumber<S> {
    let mut z = a.clone();
    z.add_scaled_assign(b, &S::one());
    z.prune();
    z
}

fn sub_impl<S: Scalar>(a: &Supernumber<S>, b: &Supernumber<S>) -> Supernumber<S> {
    let mut z = a.clone();
    z.add_scaled_assign(b, &-S::one());
    z.prune();
    z
}

fn mul_impl<S: Scalar>(a: &Supernumber<S>, b: &Supernumber<S>) -> Supernumber<S> {
    let mut z = Supernumber::zero(a.config);
    z.add_product_assign(a, b);
    z.prune();
    z
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);

impl<S: Scalar> Neg for &Supernumber<S> {
    type Output = Supernumber<S>;
    fn neg(self) -> Supernumber<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Neg for Supernumber<S> {
    type Output = Supernumber<S>;
    fn neg(self) -> Supernumber<S> {
        -&self
    }
}
