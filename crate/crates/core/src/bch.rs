//! Homogeneous terms of the Baker-Campbell-Hausdorff series.
//!
//! The tables are computed once, exactly: the word expansion of
//! `log(e^x e^y)` is formed in the free associative algebra up to degree
//! [`MAX_ORDER`], and each homogeneous part `Θ_m` is turned into commutators
//! with the Dynkin-Specht-Wever projection
//! `Θ_m = (1/m) Σ_w c_w [w_1, [w_2, … [w_{m−1}, w_m]]]`.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::supermatrix::SuperMatrix;

pub const MAX_ORDER: usize = 6;

/// Letter `0` is `x`, letter `1` is `y`.
pub type Word = Vec<u8>;

type Poly = BTreeMap<Word, BigRational>;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn poly_mul(a: &Poly, b: &Poly, max_deg: usize) -> Poly {
    let mut out = Poly::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if wa.len() + wb.len() > max_deg {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            let slot = out.entry(w).or_insert_with(BigRational::zero);
            *slot += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Word coefficients of `log(e^x e^y)` through `max_deg`.
fn log_exp_words(max_deg: usize) -> Poly {
    // Z = e^x e^y − 1
    let mut z = Poly::new();
    for a in 0..=max_deg {
        for b in 0..=max_deg - a {
            if a + b == 0 {
                continue;
            }
            let mut w = vec![0u8; a];
            w.extend(std::iter::repeat_n(1u8, b));
            z.insert(w, ratio(1, factorial(a) * factorial(b)));
        }
    }
    let mut total = Poly::new();
    let mut power = z.clone();
    for k in 1..=max_deg {
        let c = ratio(if k % 2 == 1 { 1 } else { -1 }, k as i64);
        for (w, v) in &power {
            *total.entry(w.clone()).or_insert_with(BigRational::zero) += v * &c;
        }
        power = poly_mul(&power, &z, max_deg);
    }
    total.retain(|_, c| !c.is_zero());
    total
}

/// Right-nested commutator words with coefficients, grouped by degree.
pub struct BchTables {
    terms: Vec<Vec<(Word, BigRational)>>,
}

impl BchTables {
    fn build() -> Self {
        let words = log_exp_words(MAX_ORDER);
        let mut terms = vec![Vec::new(); MAX_ORDER + 1];
        for (w, c) in words {
            let m = w.len();
            let coeff = c / BigRational::from_integer(BigInt::from(m));
            terms[m].push((w, coeff));
        }
        BchTables { terms }
    }

    /// Terms of `Θ_m`; `[w_1, [w_2, …]]` weighted by the coefficient.
    pub fn order(&self, m: usize) -> &[(Word, BigRational)] {
        &self.terms[m]
    }
}

pub fn tables() -> &'static BchTables {
    static TABLES: OnceLock<BchTables> = OnceLock::new();
    TABLES.get_or_init(BchTables::build)
}

/// Right-nested commutators of every suffix, memoized by word.
struct Evaluator<'a, S: Scalar> {
    x: &'a SuperMatrix<S>,
    y: &'a SuperMatrix<S>,
    memo: HashMap<Word, SuperMatrix<S>>,
}

impl<S: Scalar> Evaluator<'_, S> {
    fn nested(&mut self, w: &[u8]) -> Result<SuperMatrix<S>> {
        if let Some(v) = self.memo.get(w) {
            return Ok(v.clone());
        }
        let head = if w[0] == 0 { self.x } else { self.y };
        let value = if w.len() == 1 {
            head.clone()
        } else {
            let tail = self.nested(&w[1..])?;
            head.commutator(&tail)?
        };
        self.memo.insert(w.to_vec(), value.clone());
        Ok(value)
    }
}

/// `Θ_m(x, y)` for each `m` in `1..=max_order`.
pub fn homogeneous_terms<S: Scalar>(x: &SuperMatrix<S>, y: &SuperMatrix<S>, max_order: usize) -> Result<Vec<SuperMatrix<S>>> {
    if max_order == 0 || max_order > MAX_ORDER {
        return Err(Error::InvalidConfig(format!("BCH order must be in 1..={MAX_ORDER}, got {max_order}")));
    }
    let mut eval = Evaluator { x, y, memo: HashMap::new() };
    let zero = x.sub(x)?;
    let mut out = Vec::with_capacity(max_order);
    for m in 1..=max_order {
        let mut acc = zero.clone();
        for (w, c) in tables().order(m) {
            let v = eval.nested(w)?;
            if !v.is_zero() {
                acc = acc.add(&v.scale(&S::from_big_ratio(c)))?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Number of nonzero table entries and the largest absolute coefficient of
/// order `m`, for reporting.
pub fn table_summary(m: usize) -> (usize, BigRational) {
    let t = tables().order(m);
    let max = t.iter().map(|(_, c)| c.abs()).fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    (t.len(), max)
}

/// Truncated word series of `log(e^x e^y)`, exposed for tests.
pub fn word_coefficient(w: &[u8]) -> BigRational {
    static WORDS: OnceLock<Poly> = OnceLock::new();
    WORDS.get_or_init(|| log_exp_words(MAX_ORDER)).get(w).cloned().unwrap_or_else(BigRational::zero)
}
