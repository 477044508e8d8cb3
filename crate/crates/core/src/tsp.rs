//! Travelling-salesman paths on finite subsets of `Z^d`: exact bitmask DP,
//! a 2-opt heuristic, greedy covers and the dyadic multiscale upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wreath::LatticePoint;

/// Largest point set Held–Karp accepts.
pub const HELD_KARP_MAX_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    L1,
    LInf,
}

impl Norm {
    pub fn dist(self, a: &LatticePoint, b: &LatticePoint) -> u64 {
        match self {
            Norm::L1 => a.l1_dist(b),
            Norm::LInf => a.linf_dist(b),
        }
    }
}

/// Exact `TSP(A; x, y)`: shortest path from `x` through every point of `A`
/// ending at `y`.
pub fn held_karp(points: &[LatticePoint], x: &LatticePoint, y: &LatticePoint, norm: Norm) -> Result<u64> {
    let n = points.len();
    if n > HELD_KARP_MAX_POINTS {
        return Err(Error::Budget(format!(
            "held_karp accepts at most {HELD_KARP_MAX_POINTS} points, got {n}"
        )));
    }
    if n == 0 {
        return Ok(norm.dist(x, y));
    }
    let dist: Vec<Vec<u64>> = points
        .iter()
        .map(|a| points.iter().map(|b| norm.dist(a, b)).collect())
        .collect();
    let full = (1usize << n) - 1;
    // dp[mask * n + last]: shortest path from x visiting `mask`, ending at `last`.
    let mut dp = vec![u64::MAX; (1usize << n) * n];
    for (i, p) in points.iter().enumerate() {
        dp[(1 << i) * n + i] = norm.dist(x, p);
    }
    for mask in 1..=full {
        for last in 0..n {
            let cur = dp[mask * n + last];
            if cur == u64::MAX || mask & (1 << last) == 0 {
                continue;
            }
            let mut rest = full & !mask;
            while rest != 0 {
                let next = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let cand = cur + dist[last][next];
                let slot = &mut dp[(mask | (1 << next)) * n + next];
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }
    Ok((0..n)
        .map(|last| dp[full * n + last] + norm.dist(&points[last], y))
        .min()
        .unwrap())
}

/// A path visiting `points` in `order`, from `x` to `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: u64,
}

/// Nearest-neighbour construction followed by 2-opt with fixed endpoints.
/// At most `10 n^2` improving reversals are applied.
pub fn heuristic_tour(points: &[LatticePoint], x: &LatticePoint, y: &LatticePoint, norm: Norm) -> Tour {
    let n = points.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut here = x.clone();
    for _ in 0..n {
        let (best, _) = (0..n)
            .filter(|&i| !visited[i])
            .map(|i| (i, norm.dist(&here, &points[i])))
            .min_by_key(|&(i, d)| (d, i))
            .unwrap();
        visited[best] = true;
        order.push(best);
        here = points[best].clone();
    }

    // path[0] = x, path[n+1] = y, path[1..=n] = points in order.
    let node = |order: &[usize], i: usize| -> LatticePoint {
        if i == 0 {
            x.clone()
        } else if i == n + 1 {
            y.clone()
        } else {
            points[order[i - 1]].clone()
        }
    };
    let cap = 10 * n * n;
    let mut swaps = 0;
    'outer: while swaps < cap {
        for i in 1..n {
            for j in (i + 1)..=n {
                let (a, b) = (node(&order, i - 1), node(&order, i));
                let (c, e) = (node(&order, j), node(&order, j + 1));
                let before = norm.dist(&a, &b) + norm.dist(&c, &e);
                let after = norm.dist(&a, &c) + norm.dist(&b, &e);
                if after < before {
                    order[i - 1..j].reverse();
                    swaps += 1;
                    continue 'outer;
                }
            }
        }
        break;
    }
    let length = path_length(points, &order, x, y, norm);
    Tour { order, length }
}

pub fn path_length(points: &[LatticePoint], order: &[usize], x: &LatticePoint, y: &LatticePoint, norm: Norm) -> u64 {
    let mut here = x;
    let mut total = 0;
    for &i in order {
        total += norm.dist(here, &points[i]);
        here = &points[i];
    }
    total + norm.dist(here, y)
}

/// Lower bound on `TSP(A; x, y)`: any admissible path visits every pair
/// `u, v` in some order, so it is at least
/// `min(d(x,u) + d(u,v) + d(v,y), d(x,v) + d(v,u) + d(u,y))`.
pub fn tsp_lower_bound(points: &[LatticePoint], x: &LatticePoint, y: &LatticePoint, norm: Norm) -> u64 {
    let mut best = norm.dist(x, y);
    for (i, u) in points.iter().enumerate() {
        let (xu, uy) = (norm.dist(x, u), norm.dist(u, y));
        best = best.max(xu + uy);
        for v in &points[i + 1..] {
            let (xv, vy, uv) = (norm.dist(x, v), norm.dist(v, y), norm.dist(u, v));
            best = best.max((xu + uv + vy).min(xv + uv + uy));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub radius: u64,
    pub centers: Vec<LatticePoint>,
    pub count: usize,
}

/// Greedy `r`-cover of `A` by balls centred at points of `A`: scan `A` in
/// sorted order and open a ball at every point not yet covered. The centres
/// are pairwise more than `r` apart.
pub fn greedy_cover(points: &[LatticePoint], r: u64, norm: Norm) -> CoverReport {
    let mut sorted: Vec<&LatticePoint> = points.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut centers: Vec<LatticePoint> = Vec::new();
    for p in sorted {
        if !centers.iter().any(|c| norm.dist(c, p) <= r) {
            centers.push(p.clone());
        }
    }
    let count = centers.len();
    CoverReport {
        radius: r,
        centers,
        count,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleTerm {
    pub j: u32,
    pub cover_count: usize,
    pub term: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiscaleBound {
    pub level: u32,
    pub k: u32,
    pub per_scale: Vec<ScaleTerm>,
    pub total: u64,
}

/// Radius `2^{j-1}` rounded down to the lattice (radius 0 at `j = 0`).
fn half_dyadic(j: u32) -> u64 {
    if j == 0 {
        0
    } else {
        1u64 << (j - 1)
    }
}

/// Upper bound on the cost of an origin-anchored closed path that comes
/// within `2^{ℓ-1}` of every point of `A` (at `ℓ = 0`, visits every point):
/// `3 Σ_{j=ℓ}^{k} 2^j N(A, 2^{j-1})`, where `k` is minimal with
/// `A ⊆ B(e, 2^k)` and `N` is the greedy cover count in the ℓ¹ metric.
pub fn multiscale_tsp_bound(points: &[LatticePoint], level: u32) -> MultiscaleBound {
    let radius = points.iter().map(|p| p.l1_norm()).max();
    let k = match radius {
        None => 0,
        Some(r) => (0..64).find(|&k| (1u64 << k) >= r).unwrap(),
    };
    let mut per_scale = Vec::new();
    if radius.is_some() {
        for j in level..=k {
            let cover_count = greedy_cover(points, half_dyadic(j), Norm::L1).count;
            let term = 3 * (1u64 << j) * cover_count as u64;
            per_scale.push(ScaleTerm { j, cover_count, term });
        }
    }
    let total = per_scale.iter().map(|t| t.term).sum();
    MultiscaleBound {
        level,
        k,
        per_scale,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec())
    }

    #[test]
    fn held_karp_examples() {
        let o = p(&[0, 0]);
        assert_eq!(held_karp(&[p(&[2, 3])], &o, &o, Norm::L1).unwrap(), 10);
        assert_eq!(held_karp(&[p(&[2, 3])], &o, &o, Norm::LInf).unwrap(), 6);
        assert_eq!(held_karp(&[], &o, &p(&[4, -1]), Norm::L1).unwrap(), 5);
        let many: Vec<_> = (0..21).map(|i| p(&[i, 0])).collect();
        assert!(matches!(held_karp(&many, &o, &o, Norm::L1), Err(Error::Budget(_))));
    }

    #[test]
    fn heuristic_trivial_cases() {
        let o = p(&[0, 0]);
        let t = heuristic_tour(&[p(&[2, 3])], &o, &o, Norm::L1);
        assert_eq!(t.length, 10);
        assert_eq!(heuristic_tour(&[], &o, &p(&[1, 1]), Norm::L1).length, 2);
    }

    #[test]
    fn greedy_cover_examples() {
        let a = [p(&[0]), p(&[1])];
        assert_eq!(greedy_cover(&a, 1, Norm::L1).count, 1);
        let b: Vec<_> = (0..7).map(|i| p(&[i * 3, i])).collect();
        assert_eq!(greedy_cover(&b, 0, Norm::L1).count, b.len());
    }

    #[test]
    fn multiscale_degenerate_cases() {
        assert_eq!(multiscale_tsp_bound(&[], 0).total, 0);
        let a = [p(&[3, 1]), p(&[-2, 0])];
        let m = multiscale_tsp_bound(&a, 0);
        assert_eq!(m.k, 2);
        assert_eq!(multiscale_tsp_bound(&a, m.k + 1).total, 0);
        assert_eq!(m.total, m.per_scale.iter().map(|t| t.term).sum::<u64>());
    }
}
