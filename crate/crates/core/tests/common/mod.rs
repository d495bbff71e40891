//! Reference implementations used by the integration tests. They work on
//! plain vectors and label lists so they share no arithmetic with the crate.
#![allow(dead_code)]

use std::collections::BTreeMap;

use superspin::{AlgebraConfig, MultiIndex, Scalar, SuperMatrix, Supernumber};

/// Supernumber as sorted generator labels → coefficient.
pub type Naive<S> = BTreeMap<Vec<usize>, S>;

pub fn to_naive<S: Scalar>(z: &Supernumber<S>) -> Naive<S> {
    z.terms().map(|(mi, c)| (mi.labels(), c.clone())).collect()
}

pub fn from_naive<S: Scalar>(config: AlgebraConfig, z: &Naive<S>) -> Supernumber<S> {
    let terms = z
        .iter()
        .map(|(l, c)| (MultiIndex::from_generators(l).unwrap(), c.clone()));
    Supernumber::from_terms(config, terms).unwrap()
}

/// Sorts `labels` by adjacent swaps; `None` when a generator repeats.
fn normal_order(mut labels: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut negative = false;
    for i in 0..labels.len() {
        for j in 0..labels.len() - 1 - i {
            if labels[j] > labels[j + 1] {
                labels.swap(j, j + 1);
                negative = !negative;
            }
        }
    }
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((labels, negative))
}

pub fn naive_mul<S: Scalar>(a: &Naive<S>, b: &Naive<S>) -> Naive<S> {
    let mut out: Naive<S> = BTreeMap::new();
    for (la, ca) in a {
        for (lb, cb) in b {
            let joined: Vec<usize> = la.iter().chain(lb).copied().collect();
            if let Some((key, neg)) = normal_order(joined) {
                let c = ca.clone() * cb.clone();
                let c = if neg { -c } else { c };
                let slot = out.entry(key).or_insert_with(S::zero);
                *slot = slot.clone() + c;
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// ℓ₁ distance between two supernumbers given as maps.
pub fn naive_dist<S: Scalar>(a: &Naive<S>, b: &Naive<S>) -> f64 {
    let mut keys: Vec<&Vec<usize>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(S::zero);
            let y = b.get(k).cloned().unwrap_or_else(S::zero);
            (x - y).abs().to_f64()
        })
        .sum()
}

pub fn naive_norm<S: Scalar>(a: &Naive<S>) -> f64 {
    a.values().map(|c| c.abs().to_f64()).sum()
}

/// Dense supermatrix as rows of supernumbers, with its even dimension `m`.
#[derive(Clone, Debug)]
pub struct Dense<S: Scalar> {
    pub m: usize,
    pub rows: Vec<Vec<Supernumber<S>>>,
}

impl<S: Scalar> Dense<S> {
    pub fn of(x: &SuperMatrix<S>) -> Self {
        let k = x.dim();
        Dense { m: x.shape().m, rows: (0..k).map(|i| (0..k).map(|j| x.get(i, j).clone()).collect()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn config(&self) -> AlgebraConfig {
        self.rows[0][0].config()
    }

    pub fn identity(config: AlgebraConfig, m: usize, k: usize) -> Self {
        let rows = (0..k)
            .map(|i| (0..k).map(|j| if i == j { Supernumber::one(config) } else { Supernumber::zero(config) }).collect())
            .collect();
        Dense { m, rows }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let k = self.dim();
        let config = self.config();
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        (0..k).fold(Supernumber::zero(config), |acc, l| &acc + &(&self.rows[i][l] * &o.rows[l][j]))
                    })
                    .collect()
            })
            .collect();
        Dense { m: self.m, rows }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, c: &S) -> Self {
        Dense { m: self.m, rows: self.rows.iter().map(|r| r.iter().map(|x| x.scale(c)).collect()).collect() }
    }

    fn zip(&self, o: &Self, f: impl Fn(&Supernumber<S>, &Supernumber<S>) -> Supernumber<S>) -> Self {
        let rows = self
            .rows
            .iter()
            .zip(&o.rows)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect())
            .collect();
        Dense { m: self.m, rows }
    }

    /// `[[A, C], [D, B]] ↦ [[Aᵀ, −Dᵀ], [Cᵀ, Bᵀ]]`.
    pub fn st(&self) -> Self {
        let k = self.dim();
        let m = self.m;
        let rows = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let x = self.rows[j][i].clone();
                        if i < m && j >= m {
                            -x
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        Dense { m, rows }
    }

    /// Largest entry ℓ₁ norm.
    pub fn max_entry(&self) -> f64 {
        self.rows.iter().flatten().map(|x| x.norm().to_f64()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_zero())
    }

    pub fn body_is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.body().is_zero())
    }

    /// Σ X^k/k! for nilpotent X.
    pub fn exp_nil(&self) -> Self {
        let config = self.config();
        let mut term = Dense::identity(config, self.m, self.dim());
        let mut sum = term.clone();
        for k in 1..64 {
            term = term.mul(self).scale(&S::from_ratio(1, k));
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
        }
        sum
    }

    /// Σ (−1)^(k+1) (U − I)^k / k for U = I + nilpotent.
    pub fn log_unipotent(&self) -> Self {
        let config = self.config();
        let id = Dense::identity(config, self.m, self.dim());
        let nil = self.sub(&id);
        let mut term = id.clone();
        let mut sum = id.sub(&id);
        for k in 1..64i64 {
            term = term.mul(&nil);
            if term.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            sum = sum.add(&term.scale(&S::from_ratio(sign, k)));
        }
        sum
    }
}

/// `diag(η, 𝒥)` with `𝒥` built from `[[0, 1], [−1, 0]]` blocks.
pub fn gamma_dense<S: Scalar>(config: AlgebraConfig, eta: &[Supernumber<S>], n: usize) -> Dense<S> {
    let m = eta.len();
    let mut g = Dense::identity(config, m, m + n).sub(&Dense::identity(config, m, m + n));
    for (i, d) in eta.iter().enumerate() {
        g.rows[i][i] = d.clone();
    }
    for p in 0..n / 2 {
        g.rows[m + 2 * p][m + 2 * p + 1] = Supernumber::one(config);
        g.rows[m + 2 * p + 1][m + 2 * p] = -Supernumber::one(config);
    }
    g
}

/// Rank of a real matrix by Gaussian elimination with partial pivoting.
pub fn rank(mut a: Vec<Vec<f64>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())) else {
            break;
        };
        if a[p][c].abs() < 1e-9 {
            continue;
        }
        a.swap(r, p);
        for i in 0..rows {
            if i != r {
                let f = a[i][c] / a[r][c];
                for j in 0..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        r += 1;
    }
    r
}
