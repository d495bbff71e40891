//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits nonzero if any failed.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Signed;
use superspin::group::{
    action, bch_series, diamond, embed_isometry, inverse, semidirect_multiply, BchOrderConfig, GroupElement, NilElement,
};
use superspin::isometry::{is_isometry, lie_basis, lie_membership, GammaForm};
use superspin::metric::{body_reduce, canonical_form, normalized_soul_norm, soul_ratio};
use superspin::random::{Sampler, Support};
use superspin::supermatrix::{ad_operator, spectrum_gate, Spectrum};
use superspin::{AlgebraConfig, BlockShape, ParityClass, Scalar, SuperMatrix, Supernumber};

use common::{gamma_dense, naive_dist, naive_mul, naive_norm, rank, to_naive, Dense};

type Q = BigRational;

/// Outcome of one criterion: failures plus a short detail line.
struct Outcome {
    failures: Vec<String>,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), detail: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }
}

fn config<S: Scalar>(l: usize) -> AlgebraConfig {
    AlgebraConfig::for_scalar::<S>(l).unwrap()
}

fn sn_dist<S: Scalar>(a: &Supernumber<S>, b: &Supernumber<S>) -> f64 {
    (a - b).norm().to_f64()
}

// 1. Grassmann kernel ------------------------------------------------------

fn grassmann_kernel<S: Scalar>(out: &mut Outcome, seed: u64, cases: usize) {
    let c = config::<S>(6);
    let mut s = Sampler::new(seed);
    let exact = S::MODE == superspin::CoefficientMode::Rational;
    let ok = |r: f64, scale: f64| if exact { r == 0.0 } else { r <= 1e-12 * scale.max(1.0) };
    for i in 1..=6 {
        for j in 1..=6 {
            let (a, b) = (Supernumber::<S>::generator(c, i), Supernumber::<S>::generator(c, j));
            out.check((&(&a * &b) + &(&b * &a)).is_zero(), || format!("ζ{i}ζ{j} + ζ{j}ζ{i} ≠ 0"));
        }
    }
    for _ in 0..cases {
        let a = s.supernumber::<S>(c, Support::Any, 8);
        let b = s.supernumber::<S>(c, Support::Any, 8);
        let d = s.supernumber::<S>(c, Support::Any, 8);
        let (na, nb, nd) = (to_naive(&a), to_naive(&b), to_naive(&d));
        let ab = &a * &b;
        let scale = naive_norm(&na) * naive_norm(&nb);
        out.check(ok(naive_dist(&to_naive(&ab), &naive_mul(&na, &nb)), scale), || "product vs reference".into());
        let lhs = &ab * &d;
        let rhs = &a * &(&b * &d);
        let scale3 = scale * naive_norm(&nd);
        out.check(ok(sn_dist(&lhs, &rhs), scale3), || "associativity".into());
        out.check(ok(sn_dist(&(&a * &(&b + &d)), &(&ab + &(&a * &d))), scale3 + scale), || "distributivity".into());
        out.check(ok(sn_dist(&(&a + &b), &(&b + &a)), 0.0), || "additive commutativity".into());
        out.check(ok(sn_dist(&(&a * &Supernumber::one(c)), &a), naive_norm(&na)), || "unit".into());
        let prod = naive_norm(&to_naive(&ab));
        out.check(prod <= scale * (1.0 + 1e-12), || format!("submultiplicativity {prod} > {scale}"));
        // Supercommutativity on homogeneous parts.
        let (ae, ao) = parts(&a);
        let (_, bo) = parts(&b);
        out.check(ok(sn_dist(&(&ae * &b), &(&b * &ae)), scale), || "even part is central".into());
        out.check(ok(sn_dist(&(&ao * &bo), &-(&bo * &ao)), scale), || "odd parts anticommute".into());
    }
}

fn parts<S: Scalar>(z: &Supernumber<S>) -> (Supernumber<S>, Supernumber<S>) {
    let even = z.terms().filter(|(mi, _)| mi.is_even()).map(|(mi, c)| (mi, c.clone()));
    let odd = z.terms().filter(|(mi, _)| !mi.is_even()).map(|(mi, c)| (mi, c.clone()));
    (
        Supernumber::from_terms(z.config(), even).unwrap(),
        Supernumber::from_terms(z.config(), odd).unwrap(),
    )
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    grassmann_kernel::<Q>(&mut out, 101, 10_000);
    grassmann_kernel::<f64>(&mut out, 102, 10_000);
    let took = start.elapsed();
    out.check(took < Duration::from_secs(10), || format!("runtime {took:?}"));
    out.detail = format!("2×10^4 samples in {:.2}s", took.as_secs_f64());
    out
}

// 2. Inversion and the binomial series --------------------------------------

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let c = config::<Q>(6);
    let mut s = Sampler::new(202);
    let one = Supernumber::<Q>::one(c);
    let mut split = (0, 0);
    for _ in 0..1000 {
        let z = s.invertible_even::<Q>(c, 8);
        out.check(z.body().abs() >= Q::from_ratio(1, 10), || "body below 0.1".into());
        match z.invert() {
            Ok(inv) => {
                out.check(&z * &inv == one && &inv * &z == one, || format!("z z⁻¹ ≠ 1 for {z:?}"));
            }
            Err(e) => out.check(false, || format!("invert: {e}")),
        }
        // 1 + β(μ) = r² keeps the square root rational.
        let r: Q = s.nonzero_coeff();
        let mu = &Supernumber::scalar(c, r.clone() * r - Q::from_ratio(1, 1)) + &s.supernumber::<Q>(c, Support::EvenSoul, 6);
        match mu.binomial_inverse_sqrt(false) {
            Ok(w) => out.check(&(&w * &w) * &(&one + &mu) == one, || format!("w²(1+μ) ≠ 1 for {mu:?}")),
            Err(e) => out.check(false, || format!("binomial: {e}")),
        }
        // Pure-soul μ uses the terminating series directly.
        let nu = s.supernumber::<Q>(c, Support::EvenSoul, 6);
        let w = nu.binomial_inverse_sqrt(true).unwrap();
        out.check(&(&w * &w) * &(&one + &nu) == one, || "w²(1+μ) ≠ 1 for pure soul".into());
    }
    for _ in 0..1000 {
        // Soul sizes spread across both sides of the threshold.
        let body: Q = s.nonzero_coeff();
        let soul = s.supernumber::<Q>(c, Support::EvenSoul, 6);
        let k = Q::from_ratio(s.rng_u(1, 24) as i64, 8);
        let d = &Supernumber::scalar(c, body.clone()) + &soul.scale(&k);
        let soul_norm: Q = d.soul().terms().map(|(_, x)| x.abs()).fold(Q::from_ratio(0, 1), |a, b| a + b);
        let ratio = soul_norm.clone() / body.abs();
        let below = ratio < Q::from_ratio(1, 1);
        // d̃ = d / ||d||, so ||s(d̃)|| = ||s|| / (|β| + ||s||).
        let normalized = soul_norm.clone() / (body.abs() + soul_norm);
        let half = normalized < Q::from_ratio(1, 2);
        out.check(below == half, || format!("criterion mismatch for {d:?}"));
        out.check(soul_ratio(&d).condition_met == below, || "soul_ratio disagrees".into());
        out.check((normalized_soul_norm(&d) < Q::from_ratio(1, 2)) == half, || "normalized norm disagrees".into());
        if below {
            split.0 += 1;
        } else {
            split.1 += 1;
        }
    }
    out.check(split.0 > 0 && split.1 > 0, || format!("one-sided sample {split:?}"));
    out.detail = format!("10^3 inversions/binomials exact; criterion split {}/{}", split.0, split.1);
    out
}

trait RngExt {
    fn rng_u(&mut self, lo: u32, hi: u32) -> u32;
}

impl RngExt for Sampler {
    fn rng_u(&mut self, lo: u32, hi: u32) -> u32 {
        use rand::Rng;
        self.rng().gen_range(lo..=hi)
    }
}

// 3. Canonicalization --------------------------------------------------------

fn canonical_check<S: Scalar>(out: &mut Outcome, s: &mut Sampler, c: AlgebraConfig, m: usize, n: usize) -> f64 {
    let g = s.metric::<S>(c, m, n, 3);
    let r = match canonical_form(&g) {
        Ok(r) => r,
        Err(e) => {
            out.check(false, || format!("canonical_form({m}|{n}): {e}"));
            return f64::INFINITY;
        }
    };
    out.check(r.d.iter().all(|d| !d.body().is_zero()), || "β(d_i) = 0".into());
    let expected = gamma_dense(c, &r.d, n);
    out.check(Dense::of(&r.gamma).sub(&expected).is_zero(), || "Γ is not diag(η, 𝒥)".into());
    let p = Dense::of(&r.p);
    let res = p.st().mul(&Dense::of(g.gram())).mul(&p).sub(&expected).max_entry();
    let exact = S::MODE == superspin::CoefficientMode::Rational;
    out.check(if exact { res == 0.0 } else { res <= 1e-9 }, || format!("residual {res:e} at ({m}|{n})"));
    res
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let shapes = [(2, 2), (3, 2), (1, 4), (4, 0), (0, 4), (3, 4)];
    let mut worst: f64 = 0.0;
    let mut s = Sampler::new(303);
    for i in 0..200 {
        let (m, n) = shapes[i % shapes.len()];
        worst = worst.max(canonical_check::<f64>(&mut out, &mut s, config::<f64>(4), m, n));
    }
    let mut s = Sampler::new(304);
    for i in 0..200 {
        let (m, n) = shapes[i % shapes.len()];
        canonical_check::<Q>(&mut out, &mut s, config::<Q>(4), m, n);
    }
    let took = start.elapsed();
    out.check(took < Duration::from_secs(60), || format!("runtime {took:?}"));
    out.detail = format!("max float residual {worst:.2e}; rational exact; {:.2}s", took.as_secs_f64());
    out
}

// 4. Body reduction ----------------------------------------------------------

/// λ = |d|^(−1/2) by Newton's iteration; exact once the soul degree is exhausted.
fn inverse_sqrt_newton(d: &Supernumber<Q>) -> Supernumber<Q> {
    let c = d.config();
    let a = if d.body() > Q::from_ratio(0, 1) { d.clone() } else { -d };
    let root = a.body().sqrt_exact().expect("perfect-square body");
    let mut x = Supernumber::scalar(c, Q::from_ratio(1, 1) / root);
    let three = Supernumber::scalar(c, Q::from_ratio(3, 1));
    for _ in 0..16 {
        let next = (&x * &(&three - &(&a * &(&x * &x)))).scale(&Q::from_ratio(1, 2));
        if next == x {
            break;
        }
        x = next;
    }
    x
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let c = config::<Q>(4);
    let mut s = Sampler::new(404);
    let shapes = [(2, 2), (3, 2), (4, 0), (1, 2)];
    for i in 0..60 {
        let (m, n) = shapes[i % shapes.len()];
        let g = s.square_body_metric::<Q>(c, m, n, 3);
        let canon = canonical_form(&g).unwrap();
        let red = match body_reduce(&canon, false) {
            Ok(r) => r,
            Err(e) => {
                out.check(false, || format!("body_reduce: {e}"));
                continue;
            }
        };
        let signs: Vec<Q> = red.d.iter().map(Supernumber::body).collect();
        let units = red.d.iter().all(|d| d.soul().is_zero() && d.body().abs() == Q::from_ratio(1, 1));
        out.check(units, || format!("η not ±1: {:?}", red.d));
        out.check(signs.windows(2).all(|w| w[0] >= w[1]), || "− before +".into());
        // Stable order: positive bodies first.
        let mut order: Vec<usize> = (0..m).filter(|&i| canon.d[i].body() > Q::from_ratio(0, 1)).collect();
        order.extend((0..m).filter(|&i| canon.d[i].body() < Q::from_ratio(0, 1)));
        let (p0, p1) = (Dense::of(&canon.p), Dense::of(&red.p));
        for (k, &src) in order.iter().enumerate() {
            let lambda = inverse_sqrt_newton(&canon.d[src]);
            let sign = if canon.d[src].body() > Q::from_ratio(0, 1) { 1 } else { -1 };
            let sq = &(&lambda * &lambda) * &canon.d[src];
            out.check(sq == Supernumber::scalar(c, Q::from_ratio(sign, 1)), || "λ²d ≠ ±1".into());
            for row in 0..m + n {
                out.check(p1.rows[row][k] == &p0.rows[row][src] * &lambda, || format!("column {k} is not λ·P[:, {src}]"));
            }
        }
        let res = p1.st().mul(&Dense::of(g.gram())).mul(&p1).sub(&gamma_dense(c, &red.d, n));
        out.check(res.is_zero(), || "reduced residual nonzero".into());
    }
    out.detail = "60 metrics, exact".into();
    out
}

// 5. Isometry algebra --------------------------------------------------------

fn member_oracle(ell: &SuperMatrix<Q>, gamma: &Dense<Q>) -> bool {
    let l = Dense::of(ell);
    l.st().mul(gamma).add(&gamma.mul(&l)).is_zero()
}

fn real_nullity(vars: usize, eqs: Vec<Vec<f64>>) -> usize {
    vars - rank(eqs)
}

/// Dimensions of 𝔤⁰ and 𝔤¹ from the linear conditions on a real body matrix.
fn dimension_oracle(p: usize, q: usize, n: usize) -> (usize, usize) {
    let m = p + q;
    let eta: Vec<f64> = (0..m).map(|i| if i < p { 1.0 } else { -1.0 }).collect();
    let jm = |a: usize, b: usize| -> f64 {
        if a / 2 != b / 2 {
            0.0
        } else if a % 2 == 0 && b == a + 1 {
            1.0
        } else if a % 2 == 1 && a == b + 1 {
            -1.0
        } else {
            0.0
        }
    };
    // aᵀη + ηa = 0: entry (i, j) is a_ji η_j + η_i a_ij.
    let mut eqs = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let mut row = vec![0.0; m * m];
            row[j * m + i] += eta[j];
            row[i * m + j] += eta[i];
            eqs.push(row);
        }
    }
    let so = real_nullity(m * m, eqs);
    // bᵀ𝒥 + 𝒥b = 0.
    let mut eqs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0.0; n * n];
            for k in 0..n {
                row[k * n + i] += jm(k, j);
                row[k * n + j] += jm(i, k);
            }
            eqs.push(row);
        }
    }
    let sp = real_nullity(n * n, eqs);
    // ηc − dᵀ𝒥 = 0 with c (m×n) and d (n×m).
    let mut eqs = Vec::new();
    for i in 0..m {
        for a in 0..n {
            let mut row = vec![0.0; 2 * m * n];
            row[i * n + a] += eta[i];
            for k in 0..n {
                row[m * n + k * m + i] -= jm(k, a);
            }
            eqs.push(row);
        }
    }
    let odd = real_nullity(2 * m * n, eqs);
    (so + sp, odd)
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let c = config::<Q>(4);
    let mut s = Sampler::new(505);
    let mut tally = (0, 0);
    let gammas = [(1, 1, 2), (2, 0, 2), (2, 1, 2), (1, 0, 4)];
    for (gi, &(p, q, n)) in gammas.iter().enumerate() {
        let gamma = GammaForm::<Q>::signature(c, p, q, n).unwrap();
        let gd = Dense::of(&gamma.to_matrix());
        let basis = lie_basis(&gamma, 4).unwrap();
        let shape = gamma.shape();
        for i in 0..250 {
            let ell = match (i + gi) % 4 {
                0 => s.soul_lie(c, &basis, shape, 6),
                1 => {
                    let x0 = s.g0_real(&basis, shape.dim(), &Q::from_ratio(1, 1));
                    let body = SuperMatrix::from_real(c, shape, ParityClass::Even, &x0).unwrap();
                    s.soul_lie(c, &basis, shape, 6).add(&body).unwrap()
                }
                2 => s.even_matrix::<Q>(c, shape, 3),
                _ => {
                    let mut x = s.soul_lie(c, &basis, shape, 6);
                    let (a, b) = (s.rng_u(0, shape.dim() as u32 - 1) as usize, s.rng_u(0, shape.dim() as u32 - 1) as usize);
                    let support = if shape.is_odd_index(a) == shape.is_odd_index(b) { Support::EvenSoul } else { Support::Odd };
                    let bump = s.supernumber::<Q>(c, support, 2);
                    x.set(a, b, x.get(a, b) + &bump).unwrap();
                    x
                }
            };
            let report = lie_membership(&ell, &gamma).unwrap();
            let truth = member_oracle(&ell, &gd);
            out.check(report.member == truth && report.agree, || format!("membership disagrees (truth {truth})"));
            if truth {
                tally.0 += 1;
            } else {
                tally.1 += 1;
            }
        }
    }
    out.check(tally.0 > 100 && tally.1 > 100, || format!("unbalanced accept/reject {tally:?}"));

    // Exponentials of soul Lie elements are isometries.
    let cf = config::<f64>(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (p, q, n) = gammas[i % gammas.len()];
        let gamma = GammaForm::<f64>::signature(cf, p, q, n).unwrap();
        let basis = lie_basis(&gamma, 4).unwrap();
        let ell = s.soul_lie(cf, &basis, gamma.shape(), 6).scale(&(1.0 / 3.0));
        out.check(!ell.is_zero(), || "zero sample".into());
        let big = Dense::of(&ell).exp_nil();
        let gd = Dense::of(&gamma.to_matrix());
        let res = big.st().mul(&gd).mul(&big).sub(&gd).max_entry();
        worst = worst.max(res);
        out.check(res <= 1e-10, || format!("exp residual {res:e}"));
        let lib = ell.exp_zero_body().unwrap();
        out.check(is_isometry(&lib, &gamma).unwrap(), || "is_isometry rejects exp".into());
    }

    for m in 0..=4 {
        for n in [0, 2, 4] {
            if m + n == 0 {
                continue;
            }
            for p in 0..=m {
                let gamma = GammaForm::<Q>::signature(c, p, m - p, n).unwrap();
                let b = lie_basis(&gamma, 1).unwrap();
                let formula = (m * m.saturating_sub(1) / 2 + n * (n + 1) / 2, m * n);
                let oracle = dimension_oracle(p, m - p, n);
                out.check(
                    (b.g0.len(), b.g1.len()) == formula && formula == oracle,
                    || format!("dims at (p,q,n)=({p},{},{n}): basis {:?} oracle {oracle:?}", m - p, (b.g0.len(), b.g1.len())),
                );
                let gd = Dense::of(&gamma.to_matrix());
                out.check(b.g0.iter().chain(&b.g1).all(|x| member_oracle(x, &gd)), || "basis element outside algebra".into());
            }
        }
    }
    out.detail = format!("accept/reject {}/{}; max exp residual {worst:.2e}", tally.0, tally.1);
    out
}

// 6. Quasi-nilpotence ---------------------------------------------------------

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let c = config::<Q>(4);
    let mut s = Sampler::new(606);
    let gamma = GammaForm::<Q>::signature(c, 1, 1, 2).unwrap();
    let basis = lie_basis(&gamma, 4).unwrap();
    let graded = basis.graded();
    for _ in 0..1000 {
        let x = NilElement::new(s.soul_lie(c, &basis, gamma.shape(), 6), &gamma).unwrap();
        let ad = ad_operator(x.matrix(), &graded).unwrap();
        out.check(ad.matrix.has_zero_body(), || "ad operator has a body".into());
        // Zero body means nilpotent: some power vanishes within L + 1 steps.
        let mut pow = ad.matrix.clone();
        for _ in 0..5 {
            pow = pow.matmul(&ad.matrix).unwrap();
        }
        out.check(pow.is_zero(), || "ad operator not nilpotent".into());
        out.check(spectrum_gate(&ad, &Q::from_ratio(0, 1)) == Ok(Spectrum::Singular), || "not singular at 0".into());
        for _ in 0..20 {
            let xi: Q = s.nonzero_coeff();
            out.check(spectrum_gate(&ad, &xi) == Ok(Spectrum::Invertible), || format!("singular at {xi}"));
        }
    }
    out.detail = "10^3 elements, 2×10^4 nonzero ξ".into();
    out
}

// 7. BCH ---------------------------------------------------------------------

/// Combination of low-degree soul basis elements, so long brackets survive
/// the nilpotency of the algebra; scaled to row norm `size`.
fn nil_sample(s: &mut Sampler, gamma: &GammaForm<f64>, size: f64) -> SuperMatrix<f64> {
    let basis = lie_basis(gamma, gamma.config().generators()).unwrap();
    let mut x = SuperMatrix::zeros(gamma.config(), gamma.shape(), ParityClass::Even);
    for e in basis.hj.iter().filter(|e| (1..=2).contains(&e.index.len())) {
        let c = s.uniform(-1.0, 1.0);
        x = x.add(&basis.banach_matrix(e).scale(&c)).unwrap();
    }
    let norm = x.row_norm();
    x.scale(&(size / norm))
}

fn oracle_diamond<S: Scalar>(x: &SuperMatrix<S>, y: &SuperMatrix<S>) -> Dense<S> {
    Dense::of(x).exp_nil().mul(&Dense::of(y).exp_nil()).log_unipotent()
}

fn group_law<S: Scalar>(out: &mut Outcome, seed: u64, cases: usize) -> f64 {
    let c = config::<S>(4);
    let gamma = GammaForm::<S>::signature(c, 2, 0, 2).unwrap();
    let mut s = Sampler::new(seed);
    let exact = S::MODE == superspin::CoefficientMode::Rational;
    let mut worst: f64 = 0.0;
    let mut ok = |r: f64, what: &str, out: &mut Outcome| {
        worst = worst.max(r);
        out.check(if exact { r == 0.0 } else { r <= 1e-10 }, || format!("{what}: {r:e}"));
    };
    let zero = NilElement::zero(&gamma);
    for _ in 0..cases {
        let draw = |s: &mut Sampler| {
            let basis = lie_basis(&gamma, 4).unwrap();
            let x = s.soul_lie(c, &basis, gamma.shape(), 4).scale(&S::from_ratio(1, 4));
            NilElement::new(x, &gamma).unwrap()
        };
        let (x, y, z) = (draw(&mut s), draw(&mut s), draw(&mut s));
        let left = x.diamond(&y).unwrap().diamond(&z).unwrap();
        let right = x.diamond(&y.diamond(&z).unwrap()).unwrap();
        ok(Dense::of(left.matrix()).sub(&Dense::of(right.matrix())).max_entry(), "associativity", out);
        ok(Dense::of(x.diamond(&zero).unwrap().matrix()).sub(&Dense::of(x.matrix())).max_entry(), "right identity", out);
        ok(Dense::of(zero.diamond(&x).unwrap().matrix()).sub(&Dense::of(x.matrix())).max_entry(), "left identity", out);
        ok(Dense::of(x.diamond(&x.inverse()).unwrap().matrix()).max_entry(), "inverse", out);
        let xy = diamond(x.matrix(), y.matrix()).unwrap();
        ok(Dense::of(&xy).sub(&oracle_diamond(x.matrix(), y.matrix())).max_entry(), "diamond vs reference", out);
        let order2 = bch_series(x.matrix(), y.matrix(), BchOrderConfig::new(2).unwrap()).unwrap();
        let (dx, dy) = (Dense::of(x.matrix()), Dense::of(y.matrix()));
        let bracket = dx.mul(&dy).sub(&dy.mul(&dx)).scale(&S::from_ratio(1, 2));
        ok(Dense::of(&order2).sub(&dx.add(&dy).add(&bracket)).max_entry(), "order-2 expansion", out);
    }
    worst
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    group_law::<Q>(&mut out, 707, 100);
    let worst = group_law::<f64>(&mut out, 708, 100);

    // Truncation error decay when the inputs are halved.
    let c = config::<f64>(6);
    let gamma = GammaForm::<f64>::signature(c, 2, 0, 2).unwrap();
    let mut s = Sampler::new(709);
    let mut ratios = vec![Vec::new(); 3];
    for _ in 0..20 {
        let x = nil_sample(&mut s, &gamma, 0.2);
        let y = nil_sample(&mut s, &gamma, 0.2);
        for (slot, m) in (2..=4).enumerate() {
            let err = |t: f64| {
                let (xt, yt) = (x.scale(&t), y.scale(&t));
                let series = bch_series(&xt, &yt, BchOrderConfig::new(m).unwrap()).unwrap();
                Dense::of(&series).sub(&oracle_diamond(&xt, &yt)).max_entry()
            };
            let (e1, e2) = (err(1.0), err(0.5));
            if e1 < 1e-13 {
                // Nothing left beyond order m for this pair.
                continue;
            }
            let ratio = e1 / e2;
            let target = 2f64.powi(m as i32 + 1);
            out.check(ratio >= 0.8 * target, || format!("order {m}: decay {ratio:.2} < 0.8·{target}"));
            ratios[slot].push(ratio);
        }
    }
    for (slot, r) in ratios.iter().enumerate() {
        out.check(r.len() >= 10, || format!("order {}: only {} usable pairs", slot + 2, r.len()));
    }
    let summary: Vec<String> = ratios
        .iter()
        .enumerate()
        .map(|(i, r)| format!("m={}: min {:.1}", i + 2, r.iter().cloned().fold(f64::INFINITY, f64::min)))
        .collect();
    out.detail = format!("float group law {worst:.2e}; decay {}", summary.join(", "));
    out
}

// 8. Semi-direct product -------------------------------------------------------

fn lift<S: Scalar>(g: &superspin::RealMatrix<S>, shape: BlockShape, c: AlgebraConfig) -> Dense<S> {
    Dense::of(&SuperMatrix::from_real(c, shape, ParityClass::Even, g).unwrap())
}

fn semidirect<S: Scalar>(out: &mut Outcome, seed: u64) -> f64 {
    let c = config::<S>(4);
    let gamma = GammaForm::<S>::signature(c, 1, 1, 2).unwrap();
    let basis = lie_basis(&gamma, 4).unwrap();
    let shape = gamma.shape();
    let gd = Dense::of(&gamma.to_matrix());
    let mut s = Sampler::new(seed);
    let exact = S::MODE == superspin::CoefficientMode::Rational;
    let mut worst: f64 = 0.0;
    let mut ok = |r: f64, what: &str, out: &mut Outcome| {
        worst = worst.max(r);
        out.check(if exact { r == 0.0 } else { r <= 1e-9 }, || format!("{what}: {r:e}"));
    };
    let draw = |s: &mut Sampler| -> GroupElement<S> {
        let n = NilElement::new(s.soul_lie(c, &basis, shape, 3).scale(&S::from_ratio(1, 8)), &gamma).unwrap();
        loop {
            let x0 = s.g0_real(&basis, shape.dim(), &S::from_ratio(1, 4));
            let h = if exact {
                GroupElement::from_cayley(&x0, n.clone(), &gamma)
            } else {
                GroupElement::from_algebra(&x0, n.clone(), &gamma)
            };
            if let Ok(h) = h {
                return h;
            }
        }
    };
    let gap = |a: &GroupElement<S>, b: &GroupElement<S>| -> f64 {
        a.g_body().sub(b.g_body()).max_abs() + Dense::of(a.n_part().matrix()).sub(&Dense::of(b.n_part().matrix())).max_entry()
    };
    let id = GroupElement::identity(&gamma);
    for _ in 0..100 {
        let (h1, h2, h3) = (draw(&mut s), draw(&mut s), draw(&mut s));
        let mul = |a: &GroupElement<S>, b: &GroupElement<S>| semidirect_multiply(a, b, &gamma).unwrap();
        ok(gap(&mul(&id, &h1), &h1), "left identity", out);
        ok(gap(&mul(&h1, &id), &h1), "right identity", out);
        let inv = inverse(&h1, &gamma).unwrap();
        ok(gap(&mul(&h1, &inv), &id), "right inverse", out);
        ok(gap(&mul(&inv, &h1), &id), "left inverse", out);
        ok(gap(&mul(&mul(&h1, &h2), &h3), &mul(&h1, &mul(&h2, &h3))), "associativity", out);

        // α(g₁g₂) = α(g₁)α(g₂), and α(g) is conjugation by the lifted body.
        let y = h3.n_part().matrix();
        let (a, b) = (h1.g_body(), h2.g_body());
        let composed = action(a, &action(b, y, &gamma).unwrap(), &gamma).unwrap();
        let direct = action(&a.matmul(b), y, &gamma).unwrap();
        ok(Dense::of(&composed).sub(&Dense::of(&direct)).max_entry(), "alpha homomorphism", out);
        let conj = lift(a, shape, c).mul(&Dense::of(y)).mul(&lift(&a.inverse().unwrap(), shape, c));
        ok(Dense::of(&action(a, y, &gamma).unwrap()).sub(&conj).max_entry(), "alpha as conjugation", out);

        // The embedding is a homomorphism into isometries of Γ.
        let e1 = Dense::of(&embed_isometry(&h1, &gamma).unwrap());
        let e2 = Dense::of(&embed_isometry(&h2, &gamma).unwrap());
        let e12 = Dense::of(&embed_isometry(&mul(&h1, &h2), &gamma).unwrap());
        ok(e12.sub(&e1.mul(&e2)).max_entry(), "embed(h1 h2) = embed(h1) embed(h2)", out);
        let reference = Dense::of(h1.n_part().matrix()).exp_nil().mul(&lift(h1.g_body(), shape, c));
        ok(e1.sub(&reference).max_entry(), "embed = exp(n) g", out);
        ok(e12.st().mul(&gd).mul(&e12).sub(&gd).max_entry(), "embedded isometry residual", out);
        let lib = embed_isometry(&mul(&h1, &h2), &gamma).unwrap();
        out.check(is_isometry(&lib, &gamma).unwrap(), || "is_isometry rejects embedded product".into());
    }
    worst
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    semidirect::<Q>(&mut out, 808);
    let worst = semidirect::<f64>(&mut out, 809);
    out.detail = format!("100 triples per mode; max float residual {worst:.2e}");
    out
}

// 9. CLI determinism -----------------------------------------------------------

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_superspin"))
            .args(["verify", "--seed", "42", "--mode", "rational"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    out.check(a.status.code() == Some(0), || format!("exit code {:?}", a.status.code()));
    out.check(!a.stdout.is_empty() && a.stdout == b.stdout, || "reports differ".into());
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap_or_default();
    out.check(report["status"] == "pass", || "report status is not pass".into());
    out.detail = format!("{} identical bytes", a.stdout.len());
    out
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("grassmann kernel", criterion_1),
        ("inversion and binomial series", criterion_2),
        ("canonicalization", criterion_3),
        ("body reduction", criterion_4),
        ("isometry algebra", criterion_5),
        ("quasi-nilpotence", criterion_6),
        ("BCH and diamond", criterion_7),
        ("semi-direct product", criterion_8),
        ("CLI determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {status} ({})", i + 1, o.detail);
        if !o.failures.is_empty() {
            failed += 1;
            println!("    {} failures; first: {:?}", o.failures.len(), &o.failures[..o.failures.len().min(3)]);
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
