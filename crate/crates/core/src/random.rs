//! Seeded generators for property suites.
//!
//! Coefficients are small fractions `k/d`, so the same stream drives both
//! coefficient modes and rational runs stay cheap.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grassmann::{AlgebraConfig, MultiIndex, Supernumber};
use crate::isometry::LieBasis;
use crate::metric::SuperMetric;
use crate::scalar::{RealMatrix, Scalar};
use crate::supermatrix::{BlockShape, ParityClass, SuperMatrix};

/// Which multi-indices a random supernumber may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Any,
    Even,
    Odd,
    /// Even, without the empty index.
    EvenSoul,
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// `k/d` with `|k| ≤ 8`, `1 ≤ d ≤ 4`.
    pub fn coeff<S: Scalar>(&mut self) -> S {
        S::from_ratio(self.rng.gen_range(-8..=8), self.rng.gen_range(1..=4))
    }

    /// A nonzero `k/d` with `1 ≤ |k| ≤ 8`, `1 ≤ d ≤ 4` (so `|x| ≥ 1/4`).
    pub fn nonzero_coeff<S: Scalar>(&mut self) -> S {
        let k: i64 = self.rng.gen_range(1..=8);
        let sign = if self.rng.gen_bool(0.5) { 1 } else { -1 };
        S::from_ratio(sign * k, self.rng.gen_range(1..=4))
    }

    pub fn supernumber<S: Scalar>(&mut self, config: AlgebraConfig, support: Support, max_terms: usize) -> Supernumber<S> {
        let pool: Vec<MultiIndex> = config
            .all_indices()
            .filter(|mi| match support {
                Support::Any => true,
                Support::Even => mi.is_even(),
                Support::Odd => !mi.is_even(),
                Support::EvenSoul => mi.is_even() && !mi.is_empty(),
            })
            .collect();
        if pool.is_empty() || max_terms == 0 {
            return Supernumber::zero(config);
        }
        let count = self.rng.gen_range(1..=max_terms.min(pool.len()));
        let picked: Vec<MultiIndex> = pool.choose_multiple(&mut self.rng, count).copied().collect();
        let terms: Vec<(MultiIndex, S)> = picked.into_iter().map(|mi| (mi, self.coeff())).collect();
        Supernumber::from_terms(config, terms).expect("indices come from the config")
    }

    /// Even element with body of magnitude at least 1/4.
    pub fn invertible_even<S: Scalar>(&mut self, config: AlgebraConfig, max_terms: usize) -> Supernumber<S> {
        let body: S = self.nonzero_coeff();
        &Supernumber::scalar(config, body) + &self.supernumber(config, Support::EvenSoul, max_terms)
    }

    /// Soul of `(1 + μ)` with `||μ||` scaled into `[0, bound)`.
    pub fn small_soul<S: Scalar>(&mut self, config: AlgebraConfig, max_terms: usize, bound: &S) -> Supernumber<S> {
        let mu = self.supernumber::<S>(config, Support::EvenSoul, max_terms);
        let norm = mu.norm();
        if norm.is_zero() {
            return mu;
        }
        // Shrink to a random fraction of the bound.
        let t = S::from_ratio(self.rng.gen_range(0..16), 16);
        mu.scale(&(t * bound.clone() / norm))
    }

    /// Random valid super metric; `A` has an integer body and retries until
    /// the bodies are nonsingular.
    pub fn metric<S: Scalar>(&mut self, config: AlgebraConfig, m: usize, n: usize, max_terms: usize) -> SuperMetric<S> {
        loop {
            let g = self.metric_candidate(config, m, n, max_terms, false);
            if let Ok(metric) = SuperMetric::validate(&g) {
                return metric;
            }
        }
    }

    /// Metric whose even block has diagonal body `±k²`, so every `d_i` in
    /// the canonical form has a perfect-square body.
    pub fn square_body_metric<S: Scalar>(&mut self, config: AlgebraConfig, m: usize, n: usize, max_terms: usize) -> SuperMetric<S> {
        loop {
            let g = self.metric_candidate(config, m, n, max_terms, true);
            if let Ok(metric) = SuperMetric::validate(&g) {
                return metric;
            }
        }
    }

    fn metric_candidate<S: Scalar>(&mut self, config: AlgebraConfig, m: usize, n: usize, max_terms: usize, square: bool) -> SuperMatrix<S> {
        let k = m + n;
        let mut entries = vec![vec![Supernumber::zero(config); k]; k];
        for i in 0..m {
            for j in i..m {
                let soul = self.supernumber::<S>(config, Support::EvenSoul, max_terms);
                let body = if square {
                    if i == j {
                        let r: i64 = self.rng.gen_range(1..=3);
                        S::from_ratio(if self.rng.gen_bool(0.5) { r * r } else { -r * r }, 1)
                    } else {
                        S::zero()
                    }
                } else {
                    S::from_ratio(self.rng.gen_range(-3..=3), 1)
                };
                let v = &Supernumber::scalar(config, body) + &soul;
                entries[i][j] = v.clone();
                entries[j][i] = v;
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let v = &Supernumber::scalar(config, S::from_ratio(self.rng.gen_range(-3..=3), 1))
                    + &self.supernumber::<S>(config, Support::EvenSoul, max_terms);
                entries[m + a][m + b] = v.clone();
                entries[m + b][m + a] = -v;
            }
        }
        for i in 0..m {
            for a in 0..n {
                let c = self.supernumber::<S>(config, Support::Odd, max_terms);
                entries[i][m + a] = c.clone();
                entries[m + a][i] = c;
            }
        }
        SuperMatrix::from_entries(config, BlockShape::new(m, n), ParityClass::Even, entries.into_iter().flatten().collect())
            .expect("blocks have matching parity")
    }

    /// Even-class matrix with random entries of the matching parity.
    pub fn even_matrix<S: Scalar>(&mut self, config: AlgebraConfig, shape: BlockShape, max_terms: usize) -> SuperMatrix<S> {
        let entries = (0..shape.dim() * shape.dim())
            .map(|idx| {
                let (i, j) = (idx / shape.dim(), idx % shape.dim());
                let support = if shape.is_odd_index(i) == shape.is_odd_index(j) { Support::Even } else { Support::Odd };
                self.supernumber(config, support, max_terms)
            })
            .collect();
        SuperMatrix::from_entries(config, shape, ParityClass::Even, entries).expect("blocks have matching parity")
    }

    /// Random combination of up to `max_terms` soul Banach basis elements.
    pub fn soul_lie<S: Scalar>(&mut self, config: AlgebraConfig, basis: &LieBasis<S>, shape: BlockShape, max_terms: usize) -> SuperMatrix<S> {
        let soul: Vec<_> = basis.hj.iter().filter(|e| !e.index.is_empty()).collect();
        let mut x = SuperMatrix::zeros(config, shape, ParityClass::Even);
        if soul.is_empty() {
            return x;
        }
        let count = self.rng.gen_range(1..=max_terms.min(soul.len()));
        for e in soul.choose_multiple(&mut self.rng, count) {
            let c: S = self.nonzero_coeff();
            x = x.add(&basis.banach_matrix(e).scale(&c)).expect("same shape");
        }
        x
    }

    /// Real element of `𝔤⁰` with coefficients scaled by `scale`.
    pub fn g0_real<S: Scalar>(&mut self, basis: &LieBasis<S>, k: usize, scale: &S) -> RealMatrix<S> {
        let mut x = RealMatrix::zeros(k, k);
        for b in &basis.g0 {
            let c: S = self.coeff();
            x = x.add(&b.body_matrix().scale(&(c * scale.clone())));
        }
        x
    }

    /// Random float in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CoefficientMode;
    use num_rational::BigRational;

    #[test]
    fn determinism_and_support() {
        let c = AlgebraConfig::new(4, CoefficientMode::Rational).unwrap();
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        for _ in 0..20 {
            let x = a.supernumber::<BigRational>(c, Support::Odd, 5);
            assert_eq!(x, b.supernumber::<BigRational>(c, Support::Odd, 5));
            assert!(x.is_odd());
        }
        let z = a.invertible_even::<BigRational>(c, 4);
        assert!(z.is_even() && z.has_body());
    }

    #[test]
    fn metrics_validate() {
        let c = AlgebraConfig::new(3, CoefficientMode::Rational).unwrap();
        let mut s = Sampler::new(1);
        for _ in 0..5 {
            let g = s.square_body_metric::<BigRational>(c, 2, 2, 3);
            assert_eq!(g.shape(), BlockShape::new(2, 2));
        }
    }
}
