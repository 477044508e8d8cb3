//! Lamplighter-type groups `G ≀ Z^d` with `G` either `C_2` or `Z`.
//!
//! Elements are immutable values `(f, x)`: a finitely supported lamp
//! configuration `f: Z^d -> G` and a cursor `x ∈ Z^d`. The word metric is with
//! respect to the standard generators (unit cursor moves and a lamp toggle at
//! the cursor), so distances reduce to a travelling-salesman problem on the
//! support of the lamp difference plus the lamp cost.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tsp::{self, Norm};

/// A point of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn origin(d: usize) -> Self {
        LatticePoint(vec![0; d])
    }

    pub fn scalar(x: i64) -> Self {
        LatticePoint(vec![x])
    }

    /// The unit vector `sign * e_axis`.
    pub fn unit(d: usize, axis: usize, sign: i64) -> Self {
        let mut v = vec![0; d];
        v[axis] = sign;
        LatticePoint(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| -a).collect())
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|a| a.unsigned_abs()).sum()
    }

    pub fn linf_norm(&self) -> u64 {
        self.0.iter().map(|a| a.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn l1_dist(&self, other: &LatticePoint) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .sum()
    }

    pub fn linf_dist(&self, other: &LatticePoint) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The lamp group `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LampGroup {
    C2,
    Z,
}

impl LampGroup {
    fn reduce(self, v: i64) -> i64 {
        match self {
            LampGroup::C2 => v.rem_euclid(2),
            LampGroup::Z => v,
        }
    }

    /// Word length of a lamp value in `G`.
    pub fn norm(self, v: i64) -> u64 {
        match self {
            LampGroup::C2 => u64::from(v.rem_euclid(2) != 0),
            LampGroup::Z => v.unsigned_abs(),
        }
    }
}

/// Finitely supported lamp configuration; zero values are never stored.
pub type LampConfig = BTreeMap<LatticePoint, i64>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WreathElement {
    group: LampGroup,
    lamps: LampConfig,
    cursor: LatticePoint,
}

impl WreathElement {
    pub fn identity(group: LampGroup, d: usize) -> Self {
        WreathElement {
            group,
            lamps: LampConfig::new(),
            cursor: LatticePoint::origin(d),
        }
    }

    /// Builds an element, reducing lamp values into `G` and dropping zeros.
    /// Repeated positions accumulate.
    pub fn new<I>(group: LampGroup, lamps: I, cursor: LatticePoint) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticePoint, i64)>,
    {
        let d = cursor.dim();
        let mut config = LampConfig::new();
        for (z, v) in lamps {
            if z.dim() != d {
                return Err(Error::DimensionMismatch(z.dim(), d));
            }
            let e = config.entry(z).or_insert(0);
            *e = group.reduce(*e + v);
        }
        config.retain(|_, v| *v != 0);
        Ok(WreathElement {
            group,
            lamps: config,
            cursor,
        })
    }

    /// The lamp generator: value 1 at the origin, cursor at the origin.
    pub fn lamp_generator(group: LampGroup, d: usize) -> Self {
        let mut lamps = LampConfig::new();
        lamps.insert(LatticePoint::origin(d), 1);
        WreathElement {
            group,
            lamps,
            cursor: LatticePoint::origin(d),
        }
    }

    /// The cursor generator `(0, sign * e_axis)`.
    pub fn cursor_generator(group: LampGroup, d: usize, axis: usize, sign: i64) -> Self {
        WreathElement {
            group,
            lamps: LampConfig::new(),
            cursor: LatticePoint::unit(d, axis, sign),
        }
    }

    /// The symmetric standard generating set.
    pub fn generators(group: LampGroup, d: usize) -> Vec<Self> {
        let mut gens = Vec::new();
        for axis in 0..d {
            for sign in [1, -1] {
                gens.push(Self::cursor_generator(group, d, axis, sign));
            }
        }
        gens.push(Self::lamp_generator(group, d));
        if group == LampGroup::Z {
            gens.push(Self::lamp_generator(group, d).inverse());
        }
        gens
    }

    pub fn group(&self) -> LampGroup {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.cursor.dim()
    }

    pub fn lamps(&self) -> &LampConfig {
        &self.lamps
    }

    pub fn cursor(&self) -> &LatticePoint {
        &self.cursor
    }

    pub fn lamp(&self, z: &LatticePoint) -> i64 {
        self.lamps.get(z).copied().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.lamps.is_empty() && self.cursor.0.iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::LampGroupMismatch);
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// `(f,x)(g,y) = (z ↦ f(z) + g(z - x), x + y)`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let shifted = other.lamps.iter().map(|(z, v)| (z.add(&self.cursor), *v));
        let lamps = self.lamps.iter().map(|(z, v)| (z.clone(), *v)).chain(shifted);
        WreathElement::new(self.group, lamps, self.cursor.add(&other.cursor))
    }

    /// `(f,x)^{-1} = (z ↦ -f(z + x), -x)`.
    pub fn inverse(&self) -> Self {
        let lamps = self
            .lamps
            .iter()
            .map(|(z, v)| (z.sub(&self.cursor), self.group.reduce(-v)))
            .filter(|(_, v)| *v != 0)
            .collect();
        WreathElement {
            group: self.group,
            lamps,
            cursor: self.cursor.neg(),
        }
    }

    /// Positions where the lamps of `self` and `other` differ.
    pub fn lamp_diff_support(&self, other: &Self) -> Vec<LatticePoint> {
        let mut out: Vec<LatticePoint> = self
            .lamps
            .iter()
            .filter(|(z, v)| other.lamp(z) != **v)
            .map(|(z, _)| z.clone())
            .collect();
        out.extend(
            other
                .lamps
                .keys()
                .filter(|z| !self.lamps.contains_key(*z))
                .cloned(),
        );
        out.sort();
        out
    }

    /// `Σ_z d_G(f(z), g(z))`.
    pub fn lamp_cost(&self, other: &Self) -> u64 {
        self.lamp_diff_support(other)
            .iter()
            .map(|z| self.group.norm(self.lamp(z) - other.lamp(z)))
            .sum()
    }
}

/// Word distance, exact or bracketed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceBounds {
    pub lower: u64,
    pub upper: u64,
    pub exact: bool,
}

impl DistanceBounds {
    pub fn exact(d: u64) -> Self {
        DistanceBounds {
            lower: d,
            upper: d,
            exact: true,
        }
    }

    pub fn value(&self) -> Option<u64> {
        self.exact.then_some(self.lower)
    }
}

pub const DEFAULT_TSP_BUDGET: usize = 16;

/// `d((f,x),(g,y)) = TSP(supp(f-g); x, y) + Σ_z d_G(f(z), g(z))`.
///
/// Exact on `Z` (closed form) and whenever the support of the lamp difference
/// has at most `tsp_budget` points; bounds otherwise.
pub fn word_distance(a: &WreathElement, b: &WreathElement, tsp_budget: usize) -> Result<DistanceBounds> {
    a.check_compatible(b)?;
    if tsp_budget == 0 {
        return Err(Error::InvalidParameter("tsp_budget must be at least 1".into()));
    }
    let support = a.lamp_diff_support(b);
    let lamp_cost = a.lamp_cost(b);
    let (x, y) = (a.cursor(), b.cursor());
    if a.dim() == 1 {
        let pts: Vec<i64> = support.iter().map(|p| p.0[0]).collect();
        return Ok(DistanceBounds::exact(lamp_cost + line_tsp(&pts, x.0[0], y.0[0])));
    }
    if support.len() <= tsp_budget.min(tsp::HELD_KARP_MAX_POINTS) {
        let t = tsp::held_karp(&support, x, y, Norm::L1)?;
        return Ok(DistanceBounds::exact(lamp_cost + t));
    }
    let lower = tsp::tsp_lower_bound(&support, x, y, Norm::L1);
    let upper = tsp::heuristic_tour(&support, x, y, Norm::L1).length;
    Ok(DistanceBounds {
        lower: lamp_cost + lower,
        upper: lamp_cost + upper,
        exact: lower == upper,
    })
}

/// Exact `TSP(A; x, y)` on `Z`: sweep to one extreme of `A ∪ {x, y}`, then to
/// the other, then to `y`, choosing the cheaper direction.
pub fn line_tsp(points: &[i64], x: i64, y: i64) -> u64 {
    if points.is_empty() {
        return x.abs_diff(y);
    }
    let lo = points.iter().copied().chain([x, y]).min().unwrap();
    let hi = points.iter().copied().chain([x, y]).max().unwrap();
    let span = hi.abs_diff(lo);
    let left_first = x.abs_diff(lo) + span + hi.abs_diff(y);
    let right_first = hi.abs_diff(x) + span + y.abs_diff(lo);
    left_first.min(right_first)
}
