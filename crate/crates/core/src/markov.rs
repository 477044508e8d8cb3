//! Finite stationary reversible Markov chains and the Markov type inequality
//! `E d(f(Z_t), f(Z_0))^p ≤ K^p t E d(f(Z_1), f(Z_0))^p`.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wreath::WreathElement;

const REVERSIBILITY_TOL: f64 = 1e-12;

/// Largest chain evolved exactly.
pub const EXACT_STATE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteChain {
    /// Sparse rows `(j, a_ij)` with `a_ij > 0`, sorted by `j`.
    rows: Vec<Vec<(usize, f64)>>,
    pi: Vec<f64>,
}

impl FiniteChain {
    /// Validates row-stochasticity, stationarity and reversibility.
    pub fn new(rows: Vec<Vec<(usize, f64)>>, pi: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || pi.len() != n {
            return Err(Error::InvalidChain(format!("{n} rows but {} stationary weights", pi.len())));
        }
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            row.retain(|&(_, w)| w != 0.0);
            row.sort_by_key(|&(j, _)| j);
            if row.iter().any(|&(j, w)| j >= n || !(w > 0.0)) {
                return Err(Error::InvalidChain(format!("row {i} has an invalid entry")));
            }
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidChain(format!("row {i} repeats a column")));
            }
            let s: f64 = row.iter().map(|&(_, w)| w).sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChain(format!("row {i} sums to {s}")));
            }
        }
        let total: f64 = pi.iter().sum();
        if pi.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChain("stationary weights are not a probability vector".into()));
        }
        let chain = FiniteChain { rows, pi };
        chain.check_reversible()?;
        Ok(chain)
    }

    /// `a_ij = w_ij / Σ_k w_ik` and `π_i ∝ Σ_k w_ik` for symmetric `w ≥ 0`.
    #[allow(clippy::needless_range_loop)]
    pub fn from_symmetric_weights(w: &[Vec<f64>]) -> Result<Self> {
        let n = w.len();
        for (i, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidChain("weight matrix is not square".into()));
            }
            for j in 0..n {
                if w[i][j] < 0.0 || w[i][j] != w[j][i] {
                    return Err(Error::InvalidChain(format!("weights not symmetric and nonnegative at ({i}, {j})")));
                }
            }
        }
        let sums: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
        if sums.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidChain("every state needs positive weight".into()));
        }
        let total: f64 = sums.iter().sum();
        let rows = w
            .iter()
            .zip(&sums)
            .map(|(r, s)| r.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(j, &v)| (j, v / s)).collect())
            .collect();
        FiniteChain::new(rows, sums.iter().map(|s| s / total).collect())
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(0.0)
    }

    fn check_reversible(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                let defect = (self.pi[i] * a - self.pi[j] * self.entry(j, i)).abs();
                if defect > REVERSIBILITY_TOL {
                    return Err(Error::NotReversible { i, j, defect });
                }
            }
        }
        Ok(())
    }

    /// `v ↦ v a`.
    fn push_forward(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                for &(j, a) in &self.rows[i] {
                    out[j] += vi * a;
                }
            }
        }
        out
    }

    pub fn sample_step<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(j, a) in &self.rows[i] {
            acc += a;
            if u < acc {
                return j;
            }
        }
        self.rows[i].last().map(|&(j, _)| j).unwrap_or(i)
    }
}

/// Symmetric weights with independent uniform entries, each zeroed with
/// probability `sparsity`; the diagonal is kept positive so no state is
/// isolated.
#[allow(clippy::needless_range_loop)]
pub fn random_reversible_chain<R: Rng + ?Sized>(size: usize, sparsity: f64, rng: &mut R) -> Result<FiniteChain> {
    let mut w = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in i..size {
            let v = if i != j && rng.gen::<f64>() < sparsity { 0.0 } else { rng.gen_range(0.01..1.0) };
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    FiniteChain::from_symmetric_weights(&w)
}

/// `f: {0, …, N-1} → X`, given either as points of `R^k` or as a distance
/// matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PointMap {
    Points(Vec<Vec<f64>>),
    Matrix(Vec<Vec<f64>>),
}

impl PointMap {
    pub fn len(&self) -> usize {
        match self {
            PointMap::Points(v) | PointMap::Matrix(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            PointMap::Points(v) => v[i].iter().zip(&v[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            PointMap::Matrix(m) => m[i][j],
        }
    }

    /// Metric axioms for the matrix form, to `1e-12`.
    pub fn validate(&self) -> Result<()> {
        let PointMap::Matrix(m) = self else {
            return Ok(());
        };
        let n = m.len();
        for i in 0..n {
            if m[i].len() != n || m[i][i] != 0.0 {
                return Err(Error::InvalidParameter(format!("distance matrix row {i} is malformed")));
            }
            for j in 0..n {
                if m[i][j] < 0.0 || (m[i][j] - m[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!("distance matrix not symmetric at ({i}, {j})")));
                }
                for k in 0..n {
                    if m[i][k] > m[i][j] + m[j][k] + 1e-12 {
                        return Err(Error::InvalidParameter(format!("triangle inequality fails at ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovRatio {
    /// `Σ_ij π_i (a^t)_ij d(i,j)^p`.
    pub lhs: f64,
    /// `t Σ_ij π_i a_ij d(i,j)^p`.
    pub rhs: f64,
}

impl MarkovRatio {
    /// `lhs ≤ K^p rhs` up to a relative rounding allowance.
    pub fn holds(&self, k_pow_p: f64) -> bool {
        self.lhs <= k_pow_p * self.rhs * (1.0 + 1e-12) + 1e-15
    }
}

fn weighted_energy(chain: &FiniteChain, map: &PointMap, i: usize, row: &[f64], p: f64) -> f64 {
    row.iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(j, &w)| w * map.dist(i, j).powf(p))
        .sum::<f64>()
        * chain.pi[i]
}

/// Exact evaluation by evolving each row distribution `e_i a^t`.
pub fn markov_type_ratio(chain: &FiniteChain, map: &PointMap, t: u32, p: f64) -> Result<MarkovRatio> {
    if map.len() != chain.size() {
        return Err(Error::DimensionMismatch(map.len(), chain.size()));
    }
    if chain.size() > EXACT_STATE_LIMIT {
        return Err(Error::Budget(format!("exact evolution handles at most {EXACT_STATE_LIMIT} states")));
    }
    map.validate()?;
    let n = chain.size();
    let mut lhs = 0.0;
    let mut one_step = 0.0;
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        let first = chain.push_forward(&v);
        one_step += weighted_energy(chain, map, i, &first, p);
        if t == 0 {
            continue;
        }
        let mut cur = first;
        for _ in 1..t {
            cur = chain.push_forward(&cur);
        }
        lhs += weighted_energy(chain, map, i, &cur, p);
    }
    Ok(MarkovRatio {
        lhs,
        rhs: f64::from(t) * one_step,
    })
}

/// Monte Carlo estimate of `lhs` for chains above the exact limit, with the
/// exact `rhs`. The stationary start is sampled from `π`.
pub fn markov_type_ratio_sampled<R: Rng + ?Sized>(
    chain: &FiniteChain,
    map: &PointMap,
    t: u32,
    p: f64,
    samples: u64,
    rng: &mut R,
) -> Result<MarkovRatio> {
    if map.len() != chain.size() {
        return Err(Error::DimensionMismatch(map.len(), chain.size()));
    }
    let mut one_step = 0.0;
    for i in 0..chain.size() {
        for &(j, a) in chain.row(i) {
            one_step += chain.pi[i] * a * map.dist(i, j).powf(p);
        }
    }
    let cdf: Vec<f64> = chain
        .pi
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let mut total = 0.0;
    for _ in 0..samples {
        let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
        let start = cdf.partition_point(|&c| c <= u).min(chain.size() - 1);
        let mut z = start;
        for _ in 0..t {
            z = chain.sample_step(z, rng);
        }
        total += map.dist(start, z).powf(p);
    }
    Ok(MarkovRatio {
        lhs: total / samples as f64,
        rhs: f64::from(t) * one_step,
    })
}

/// The chain on a finite region `A` that moves `x ↦ x g` with `g ~ μ` when
/// `x g ∈ A` and stays put otherwise: `a_xy = μ(x⁻¹ y)` off the diagonal.
/// For symmetric `μ` this matrix is symmetric, so `π` is uniform.
pub fn build_reflected_chain<T, M, I>(region: &[T], steps: &[(T, f64)], mul: M, inv: I) -> Result<FiniteChain>
where
    T: Clone + Eq + Hash,
    M: Fn(&T, &T) -> T,
    I: Fn(&T) -> T,
{
    if region.is_empty() {
        return Err(Error::InvalidParameter("region is empty".into()));
    }
    let mut measure: HashMap<T, f64> = HashMap::new();
    for (g, w) in steps {
        if !(*w >= 0.0) {
            return Err(Error::InvalidParameter("step weights must be nonnegative".into()));
        }
        *measure.entry(g.clone()).or_insert(0.0) += w;
    }
    let total: f64 = measure.values().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("step measure has mass {total}")));
    }
    for (g, w) in &measure {
        let back = measure.get(&inv(g)).copied().unwrap_or(0.0);
        if (w - back).abs() > 1e-12 {
            return Err(Error::InvalidParameter("step measure is not symmetric".into()));
        }
    }
    let index: HashMap<&T, usize> = region.iter().enumerate().map(|(i, x)| (x, i)).collect();
    if index.len() != region.len() {
        return Err(Error::InvalidParameter("region repeats a state".into()));
    }
    let mut rows = Vec::with_capacity(region.len());
    for (i, x) in region.iter().enumerate() {
        let mut row: HashMap<usize, f64> = HashMap::new();
        let mut stay = 0.0;
        for (g, &w) in &measure {
            match index.get(&mul(x, g)) {
                Some(&j) if j != i => *row.entry(j).or_insert(0.0) += w,
                _ => stay += w,
            }
        }
        let mut row: Vec<(usize, f64)> = row.into_iter().collect();
        if stay > 0.0 {
            row.push((i, stay));
        }
        // Renormalise the rounding in `stay` away.
        let s: f64 = row.iter().map(|&(_, w)| w).sum();
        for e in &mut row {
            e.1 /= s;
        }
        rows.push(row);
    }
    let n = region.len();
    FiniteChain::new(rows, vec![1.0 / n as f64; n])
}

/// [`build_reflected_chain`] on a region of a wreath product.
pub fn build_reflected_wreath_chain(region: &[WreathElement], steps: &[(WreathElement, f64)]) -> Result<FiniteChain> {
    build_reflected_chain(region, steps, |x, g| x.multiply(g).expect("steps share the region's group"), |g| g.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_chain() {
        let chain = FiniteChain::new(vec![vec![(1, 1.0)], vec![(0, 1.0)]], vec![0.5, 0.5]).unwrap();
        let map = PointMap::Points(vec![vec![0.0], vec![1.0]]);
        let r = markov_type_ratio(&chain, &map, 3, 2.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 3.0).abs() < 1e-15);
        assert_eq!(markov_type_ratio(&chain, &map, 0, 2.0).unwrap().lhs, 0.0);
    }

    #[test]
    fn irreversible_chain_is_rejected() {
        // A 3-cycle with uniform π is stationary but not reversible.
        let rows = vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]];
        let err = FiniteChain::new(rows, vec![1.0 / 3.0; 3]).unwrap_err();
        assert!(matches!(err, Error::NotReversible { .. }));
    }

    #[test]
    fn single_state_region() {
        let chain = build_reflected_chain(&[0i64], &[(1, 0.5), (-1, 0.5)], |x, g| x + g, |g| -g).unwrap();
        assert_eq!(chain.row(0), &[(0, 1.0)]);
    }

    #[test]
    fn interval_region_is_reflecting_walk() {
        let region: Vec<i64> = (-3..=3).collect();
        let chain = build_reflected_chain(&region, &[(1, 0.5), (-1, 0.5)], |x, g| x + g, |g| -g).unwrap();
        assert_eq!(chain.entry(0, 0), 0.5);
        assert_eq!(chain.entry(0, 1), 0.5);
        assert_eq!(chain.entry(3, 4), 0.5);
    }

    #[test]
    fn asymmetric_step_measure_is_rejected() {
        assert!(build_reflected_chain(&[0i64, 1], &[(1, 0.7), (-1, 0.3)], |x, g| x + g, |g| -g).is_err());
    }

    #[test]
    fn sampled_ratio_tracks_exact() {
        let mut rng = crate::exec::trial_rng(3, 0);
        let chain = random_reversible_chain(5, 0.3, &mut rng).unwrap();
        let map = PointMap::Points((0..5).map(|i| vec![i as f64, (i * i) as f64]).collect());
        let exact = markov_type_ratio(&chain, &map, 4, 2.0).unwrap();
        let est = markov_type_ratio_sampled(&chain, &map, 4, 2.0, 200_000, &mut rng).unwrap();
        assert!((est.rhs - exact.rhs).abs() < 1e-12);
        assert!((est.lhs - exact.lhs).abs() < 0.05 * exact.lhs);
    }
}
