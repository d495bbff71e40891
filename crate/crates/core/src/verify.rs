//! Self-checking property suites behind the `verify` command.
//!
//! Every section draws from one seeded stream, so a fixed seed gives the
//! same cases, and in rational mode the same report bytes.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grassmann::{AlgebraConfig, Supernumber};
use crate::group::{
    action, bch_series, diamond, embed_isometry, inverse, semidirect_multiply, BchOrderConfig, GroupElement,
    NilElement,
};
use crate::isometry::{is_isometry, isometry_residual, lie_basis, lie_membership, GammaForm};
use crate::metric::{body_reduce, canonical_form, normalized_soul_norm, soul_ratio};
use crate::random::{Sampler, Support};
use crate::scalar::{CoefficientMode, Scalar};
use crate::supermatrix::{ad_operator, spectrum_gate, Spectrum, SuperMatrix};

/// Sizes and seed of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub generators: usize,
    pub m: usize,
    pub n: usize,
    pub strict: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 42, generators: 4, m: 2, n: 2, strict: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub name: String,
    pub status: String,
    pub cases: usize,
    pub failures: usize,
    pub max_residual: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub mode: CoefficientMode,
    pub seed: u64,
    pub generators: usize,
    pub m: usize,
    pub n: usize,
    pub strict: bool,
    pub sections: Vec<Section>,
    pub status: String,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.failures == 0)
    }
}

struct Tally<S: Scalar> {
    name: &'static str,
    cases: usize,
    failures: usize,
    max_residual: S,
    first_failure: Option<String>,
    tol: f64,
}

impl<S: Scalar> Tally<S> {
    fn new(name: &'static str, tol: f64) -> Self {
        Tally { name, cases: 0, failures: 0, max_residual: S::zero(), first_failure: None, tol }
    }

    fn fail(&mut self, what: impl Into<String>) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(what.into());
        }
    }

    /// Counts one case; passes when `ok` holds.
    fn check(&mut self, ok: bool, what: &str) {
        self.cases += 1;
        if !ok {
            self.fail(what);
        }
    }

    /// Counts one case; passes when the residual is zero (rational) or
    /// within `tol · (1 + scale)` (float).
    fn residual(&mut self, r: S, scale: f64, what: &str) {
        self.cases += 1;
        let ok = S::residual_ok(&r, scale, self.tol);
        if r > self.max_residual {
            self.max_residual = r;
        }
        if !ok {
            self.fail(what);
        }
    }

    /// Records a case that errored.
    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.cases += 1;
        self.fail(format!("{what}: {e}"));
    }

    fn finish(self) -> Section {
        Section {
            name: self.name.to_string(),
            status: if self.failures == 0 { "pass" } else { "fail" }.to_string(),
            cases: self.cases,
            failures: self.failures,
            max_residual: self.max_residual.to_json(),
            first_failure: self.first_failure,
        }
    }
}

fn max_entry<S: Scalar>(m: &SuperMatrix<S>) -> S {
    m.entries().iter().map(Supernumber::norm).fold(S::zero(), |p, q| if q > p { q } else { p })
}

fn entry_sum<S: Scalar>(m: &SuperMatrix<S>) -> S {
    m.entries().iter().map(Supernumber::norm).fold(S::zero(), |p, q| p + q)
}

fn sn_residual<S: Scalar>(a: &Supernumber<S>, b: &Supernumber<S>) -> S {
    (a - b).norm()
}

fn grassmann_suite<S: Scalar>(s: &mut Sampler, config: AlgebraConfig, cases: usize) -> Section {
    let mut t = Tally::<S>::new("grassmann", 1e-12);
    for l in 1..=config.generators() {
        for r in 1..=config.generators() {
            let a = Supernumber::<S>::generator(config, l);
            let b = Supernumber::<S>::generator(config, r);
            t.residual(sn_residual(&(&a * &b), &-(&b * &a)), 0.0, "anticommutation");
        }
    }
    for _ in 0..cases {
        let a = s.supernumber::<S>(config, Support::Any, 6);
        let b = s.supernumber::<S>(config, Support::Any, 6);
        let c = s.supernumber::<S>(config, Support::Any, 6);
        let scale = a.norm().to_f64() * b.norm().to_f64() * c.norm().to_f64();
        t.residual(sn_residual(&(&(&a * &b) * &c), &(&a * &(&b * &c))), scale, "associativity");
        let dist_scale = a.norm().to_f64() * (b.norm().to_f64() + c.norm().to_f64());
        t.residual(sn_residual(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c))), dist_scale, "distributivity");
        t.residual(sn_residual(&(&a * &Supernumber::one(config)), &a), a.norm().to_f64(), "unit");
        let bound = a.norm() * b.norm();
        let prod = (&a * &b).norm();
        let bound_f = bound.to_f64();
        let excess = if prod > bound { prod - bound } else { S::zero() };
        t.residual(excess, bound_f, "submultiplicativity");
    }
    t.finish()
}

fn inversion_suite<S: Scalar>(s: &mut Sampler, config: AlgebraConfig, cases: usize) -> Section {
    let mut t = Tally::<S>::new("inversion", 1e-12);
    let one = Supernumber::<S>::one(config);
    for _ in 0..cases {
        let z = s.invertible_even::<S>(config, 6);
        match z.invert() {
            Ok(inv) => {
                let scale = z.norm().to_f64() * inv.norm().to_f64();
                t.residual(sn_residual(&(&z * &inv), &one), scale, "z * z^-1");
                t.residual(sn_residual(&(&inv * &z), &one), scale, "z^-1 * z");
            }
            Err(e) => t.error("invert", e),
        }
        // μ with 1 + β(μ) a perfect square.
        let r: S = s.nonzero_coeff();
        let body = r.clone() * r - S::one();
        let mu = &Supernumber::scalar(config, body) + &s.supernumber::<S>(config, Support::EvenSoul, 5);
        match mu.binomial_inverse_sqrt(false) {
            Ok(w) => {
                let lhs = &(&w * &w) * &(&one + &mu);
                t.residual(sn_residual(&lhs, &one), w.norm().to_f64().powi(2) * (1.0 + mu.norm().to_f64()), "w^2 (1 + mu)");
            }
            Err(e) => t.error("binomial", e),
        }
        let d = s.invertible_even::<S>(config, 5);
        let below = soul_ratio(&d).condition_met;
        let half = normalized_soul_norm(&d) < S::from_ratio(1, 2);
        t.check(below == half, "normalized reducibility criterion");
    }
    t.finish()
}

fn canonical_suite<S: Scalar>(s: &mut Sampler, config: AlgebraConfig, m: usize, n: usize, cases: usize) -> Section {
    let mut t = Tally::<S>::new("canonicalization", 1e-9);
    for _ in 0..cases {
        let g = s.metric::<S>(config, m, n, 3);
        match canonical_form(&g) {
            Ok(r) => {
                t.check(r.d.iter().all(|d| !d.body().is_zero()), "zero body in eta");
                match r.max_residual(&g) {
                    Ok(res) => t.residual(res, 0.0, "P^ST G P - Gamma"),
                    Err(e) => t.error("residual", e),
                }
            }
            Err(e) => t.error("canonical_form", e),
        }
    }
    t.finish()
}

fn body_reduction_suite<S: Scalar>(
    s: &mut Sampler,
    config: AlgebraConfig,
    m: usize,
    n: usize,
    cases: usize,
    strict: bool,
) -> Section {
    let mut t = Tally::<S>::new("body_reduction", 1e-9);
    for _ in 0..cases {
        let g = s.square_body_metric::<S>(config, m, n, 3);
        let reduced = canonical_form(&g).and_then(|c| {
            if strict && !c.body_reducible() {
                // Strict mode only reduces where the condition holds.
                return Ok(None);
            }
            body_reduce(&c, strict).map(Some)
        });
        match reduced {
            Ok(Some(r)) => {
                let signs: Vec<S> = r.d.iter().map(Supernumber::body).collect();
                let unit = r.d.iter().all(|d| d.soul().is_zero() && d.body().abs() == S::one());
                let ordered = signs.windows(2).all(|w| w[0] >= w[1]);
                t.check(unit && ordered, "eta entries are +1 before -1");
                match r.max_residual(&g) {
                    Ok(res) => t.residual(res, 0.0, "lambda^2 d = +-1"),
                    Err(e) => t.error("residual", e),
                }
            }
            Ok(None) => t.check(true, "skipped"),
            Err(e) => t.error("body_reduce", e),
        }
    }
    t.finish()
}

fn isometry_suite<S: Scalar>(
    s: &mut Sampler,
    gamma: &GammaForm<S>,
    cases: usize,
) -> Result<Section> {
    let mut t = Tally::<S>::new("isometry_algebra", 1e-10);
    let config = gamma.config();
    let basis = lie_basis(gamma, config.generators())?;
    let shape = gamma.shape();
    for i in 0..cases {
        let x = if i % 2 == 0 { s.soul_lie(config, &basis, shape, 6) } else { s.even_matrix::<S>(config, shape, 3) };
        match lie_membership(&x, gamma) {
            Ok(r) => t.check(r.agree && (i % 2 == 1 || r.member), "triple test disagrees with supertranspose test"),
            Err(e) => t.error("membership", e),
        }
    }
    for _ in 0..cases / 4 {
        let ell = s.soul_lie(config, &basis, shape, 6);
        match ell.exp_zero_body().and_then(|n| isometry_residual(&n, gamma)) {
            Ok(r) => t.residual(r, 0.0, "exp of soul element is an isometry"),
            Err(e) => t.error("exp", e),
        }
    }
    for m in 0..=4usize {
        for n in [0usize, 2, 4] {
            if m + n == 0 {
                continue;
            }
            let g = GammaForm::<S>::signature(config, m, 0, n)?;
            let b = lie_basis(&g, 1)?;
            t.check(
                b.g0.len() == m * m.saturating_sub(1) / 2 + n * (n + 1) / 2 && b.g1.len() == m * n,
                "basis dimensions",
            );
        }
    }
    Ok(t.finish())
}

fn quasi_nilpotence_suite<S: Scalar>(s: &mut Sampler, gamma: &GammaForm<S>, cases: usize) -> Result<Section> {
    let mut t = Tally::<S>::new("quasi_nilpotence", 1e-12);
    let config = gamma.config();
    let basis = lie_basis(gamma, config.generators())?;
    let graded = basis.graded();
    if graded.is_empty() {
        // The algebra is trivial; there is no operator to test.
        return Ok(t.finish());
    }
    for _ in 0..cases {
        let x = s.soul_lie(config, &basis, gamma.shape(), 6);
        match ad_operator(&x, &graded) {
            Ok(ad) => {
                t.check(ad.matrix.has_zero_body(), "ad operator has zero body");
                t.check(spectrum_gate(&ad, &S::zero()) == Ok(Spectrum::Singular), "singular at 0");
                for _ in 0..3 {
                    let xi: S = s.nonzero_coeff();
                    t.check(spectrum_gate(&ad, &xi) == Ok(Spectrum::Invertible), "invertible away from 0");
                }
            }
            Err(e) => t.error("ad_operator", e),
        }
    }
    Ok(t.finish())
}

fn bch_suite<S: Scalar>(s: &mut Sampler, gamma: &GammaForm<S>, cases: usize) -> Result<Section> {
    let mut t = Tally::<S>::new("bch", 1e-10);
    let config = gamma.config();
    let basis = lie_basis(gamma, config.generators())?;
    let shape = gamma.shape();
    let zero = NilElement::zero(gamma);
    for _ in 0..cases {
        let x = NilElement::new(s.soul_lie(config, &basis, shape, 4), gamma)?;
        let y = NilElement::new(s.soul_lie(config, &basis, shape, 4), gamma)?;
        let z = NilElement::new(s.soul_lie(config, &basis, shape, 4), gamma)?;
        let scale = x.matrix().max_entry_norm() + y.matrix().max_entry_norm() + z.matrix().max_entry_norm();
        let res = |a: &NilElement<S>, b: &NilElement<S>| -> S {
            a.matrix().sub(b.matrix()).map(|d| max_entry(&d)).unwrap_or_else(|_| S::one())
        };
        let outcome = (|| -> Result<()> {
            let left = x.diamond(&y)?.diamond(&z)?;
            let right = x.diamond(&y.diamond(&z)?)?;
            t.residual(res(&left, &right), scale.powi(3), "associativity");
            t.residual(res(&x.diamond(&zero)?, &x), scale, "identity");
            t.residual(res(&x.diamond(&x.inverse())?, &zero), scale, "inverse");
            let exact = diamond(x.matrix(), y.matrix())?;
            let order2 = bch_series(x.matrix(), y.matrix(), BchOrderConfig::new(2)?)?;
            let expansion = x.matrix().add(y.matrix())?.add(&x.matrix().commutator(y.matrix())?.scale(&S::from_ratio(1, 2)))?;
            t.residual(max_entry(&order2.sub(&expansion)?), scale, "order-2 expansion");
            if config.generators() <= crate::bch::MAX_ORDER {
                // Θ_m vanishes beyond the nilpotency order L.
                let full = bch_series(x.matrix(), y.matrix(), BchOrderConfig::new(config.generators())?)?;
                t.residual(max_entry(&full.sub(&exact)?), scale.powi(4), "series equals diamond");
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            t.error("diamond", e);
        }
    }
    Ok(t.finish())
}

fn semidirect_suite<S: Scalar>(s: &mut Sampler, gamma: &GammaForm<S>, cases: usize) -> Result<Section> {
    let mut t = Tally::<S>::new("semidirect", 1e-9);
    let config = gamma.config();
    let basis = lie_basis(gamma, config.generators())?;
    let shape = gamma.shape();
    let small = S::from_ratio(1, 4);
    let id = GroupElement::identity(gamma);
    let gap = |a: &GroupElement<S>, b: &GroupElement<S>| -> S {
        let body = a.g_body().sub(b.g_body()).abs_sum();
        let nil = a
            .n_part()
            .matrix()
            .sub(b.n_part().matrix())
            .map(|d| entry_sum(&d))
            .unwrap_or_else(|_| S::one());
        body + nil
    };
    // Draws until the Cayley transform is defined.
    let element = |s: &mut Sampler| -> Result<GroupElement<S>> {
        let n = NilElement::new(s.soul_lie(config, &basis, shape, 3), gamma)?;
        loop {
            let x0 = s.g0_real(&basis, shape.dim(), &small);
            match GroupElement::from_cayley(&x0, n.clone(), gamma) {
                Err(Error::BodyNotInvertible { .. }) => continue,
                other => return other,
            }
        }
    };
    for _ in 0..cases {
        let outcome = (|| -> Result<()> {
            let (h1, h2, h3) = (element(s)?, element(s)?, element(s)?);
            // Float residuals are judged relative to the size of the operands.
            let size = |h: &GroupElement<S>| h.g_body().abs_sum().to_f64() + entry_sum(h.n_part().matrix()).to_f64();
            let scale = (1.0 + size(&h1)) * (1.0 + size(&h2)) * (1.0 + size(&h3));
            t.residual(gap(&semidirect_multiply(&id, &h1, gamma)?, &h1), scale, "left identity");
            t.residual(gap(&semidirect_multiply(&h1, &id, gamma)?, &h1), scale, "right identity");
            let inv = inverse(&h1, gamma)?;
            t.residual(gap(&semidirect_multiply(&h1, &inv, gamma)?, &id), scale, "right inverse");
            t.residual(gap(&semidirect_multiply(&inv, &h1, gamma)?, &id), scale, "left inverse");
            let left = semidirect_multiply(&semidirect_multiply(&h1, &h2, gamma)?, &h3, gamma)?;
            let right = semidirect_multiply(&h1, &semidirect_multiply(&h2, &h3, gamma)?, gamma)?;
            t.residual(gap(&left, &right), scale, "associativity");

            let a = h1.g_body();
            let b = h2.g_body();
            let y = h3.n_part().matrix();
            let composed = action(a, &action(b, y, gamma)?, gamma)?;
            let direct = action(&a.matmul(b), y, gamma)?;
            t.residual(entry_sum(&composed.sub(&direct)?), scale, "alpha homomorphism");

            let e12 = embed_isometry(&semidirect_multiply(&h1, &h2, gamma)?, gamma)?;
            let prod = embed_isometry(&h1, gamma)?.matmul(&embed_isometry(&h2, gamma)?)?;
            t.residual(entry_sum(&e12.sub(&prod)?), scale, "embed homomorphism");
            t.check(is_isometry(&e12, gamma)?, "embedded product is an isometry");
            Ok(())
        })();
        if let Err(e) = outcome {
            t.error("semidirect", e);
        }
    }
    Ok(t.finish())
}

/// Case counts per section for a run.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSizes {
    pub grassmann: usize,
    pub inversion: usize,
    pub canonical: usize,
    pub reduction: usize,
    pub isometry: usize,
    pub nilpotence: usize,
    pub bch: usize,
    pub semidirect: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            grassmann: 1000,
            inversion: 300,
            canonical: 50,
            reduction: 50,
            isometry: 200,
            nilpotence: 50,
            bch: 20,
            semidirect: 20,
        }
    }
}

pub fn run<S: Scalar>(cfg: VerifyConfig, sizes: SuiteSizes) -> Result<VerifyReport> {
    let config = AlgebraConfig::for_scalar::<S>(cfg.generators)?;
    let mut s = Sampler::new(cfg.seed);
    let (m, n) = (cfg.m, cfg.n);
    let p = m - m / 2;
    let gamma = GammaForm::<S>::signature(config, p, m - p, n)?;
    let sections = vec![
        grassmann_suite::<S>(&mut s, config, sizes.grassmann),
        inversion_suite::<S>(&mut s, config, sizes.inversion),
        canonical_suite::<S>(&mut s, config, m, n, sizes.canonical),
        body_reduction_suite::<S>(&mut s, config, m, n, sizes.reduction, cfg.strict),
        isometry_suite(&mut s, &gamma, sizes.isometry)?,
        quasi_nilpotence_suite(&mut s, &gamma, sizes.nilpotence)?,
        bch_suite(&mut s, &gamma, sizes.bch)?,
        semidirect_suite(&mut s, &gamma, sizes.semidirect)?,
    ];
    let status = if sections.iter().all(|s| s.failures == 0) { "pass" } else { "fail" }.to_string();
    Ok(VerifyReport {
        mode: S::MODE,
        seed: cfg.seed,
        generators: cfg.generators,
        m,
        n,
        strict: cfg.strict,
        sections,
        status,
    })
}
