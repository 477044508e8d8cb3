//! Walks on `Z ≀ Z` driven by the elements
//! `x_{n1,n2,n3} = (n1 δ_0 + n2 δ_{n3}, n3)`: right multiplication adds `n1`
//! at the cursor, moves the cursor by `n3`, then adds `n2` at the new cursor.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{run_trials, Exec};
use crate::walks::stable::StableCoeffTable;
use crate::walks::{check_probes, DriftTable};
use crate::wreath::{line_tsp, LampGroup, LatticePoint, WreathElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorTriple {
    pub n1: i64,
    pub n2: i64,
    pub n3: i64,
}

impl GeneratorTriple {
    pub fn to_element(self) -> WreathElement {
        WreathElement::new(
            LampGroup::Z,
            [(LatticePoint::scalar(0), self.n1), (LatticePoint::scalar(self.n3), self.n2)],
            LatticePoint::scalar(self.n3),
        )
        .expect("one-dimensional Z lamps are always valid")
    }

    /// The eight elements with `n1, n2, n3 ∈ {-1, 1}`.
    pub fn canonical8() -> Vec<GeneratorTriple> {
        let mut out = Vec::with_capacity(8);
        for n1 in [-1, 1] {
            for n2 in [-1, 1] {
                for n3 in [-1, 1] {
                    out.push(GeneratorTriple { n1, n2, n3 });
                }
            }
        }
        out
    }
}

/// Dense lamp storage over a growing window of `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LineLamps {
    offset: i64,
    vals: Vec<i64>,
    l1: u64,
}

impl LineLamps {
    pub fn new() -> Self {
        Self::default()
    }

    fn index(&mut self, j: i64) -> usize {
        if self.vals.is_empty() {
            self.offset = j - 32;
            self.vals = vec![0; 65];
        }
        if j < self.offset {
            let grow = ((self.offset - j) as usize).max(self.vals.len());
            let mut v = vec![0; grow];
            v.extend_from_slice(&self.vals);
            self.vals = v;
            self.offset -= grow as i64;
        }
        let hi = self.offset + self.vals.len() as i64;
        if j >= hi {
            let grow = ((j - hi + 1) as usize).max(self.vals.len());
            self.vals.resize(self.vals.len() + grow, 0);
        }
        (j - self.offset) as usize
    }

    pub fn add(&mut self, j: i64, v: i64) {
        if v == 0 {
            return;
        }
        let i = self.index(j);
        let old = self.vals[i];
        let new = old + v;
        self.l1 = self.l1 - old.unsigned_abs() + new.unsigned_abs();
        self.vals[i] = new;
    }

    pub fn get(&self, j: i64) -> i64 {
        if j < self.offset {
            return 0;
        }
        self.vals.get((j - self.offset) as usize).copied().unwrap_or(0)
    }

    /// `Σ_j |f(j)|`.
    pub fn l1(&self) -> u64 {
        self.l1
    }

    /// Smallest and largest points of the support.
    pub fn support_hull(&self) -> Option<(i64, i64)> {
        let lo = self.vals.iter().position(|&v| v != 0)?;
        let hi = self.vals.iter().rposition(|&v| v != 0)?;
        Some((self.offset + lo as i64, self.offset + hi as i64))
    }

    /// Word distance from `(f, cursor)` to `(0, origin)` for the standard
    /// generators: `Σ|f| + TSP(supp f; origin, cursor)`.
    pub fn distance(&self, origin: i64, cursor: i64) -> u64 {
        let hull: Vec<i64> = self.support_hull().map(|(a, b)| vec![a, b]).unwrap_or_default();
        self.l1 + line_tsp(&hull, origin, cursor)
    }

    pub fn to_config(&self) -> Vec<(i64, i64)> {
        self.vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (self.offset + i as i64, v))
            .collect()
    }
}

/// Incremental state `(f, m)` of a walk on `Z ≀ Z` started at the identity.
#[derive(Debug, Clone, Default)]
pub struct WreathWalker {
    pub lamps: LineLamps,
    pub cursor: i64,
}

impl WreathWalker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, g: GeneratorTriple) {
        self.lamps.add(self.cursor, g.n1);
        self.cursor += g.n3;
        self.lamps.add(self.cursor, g.n2);
    }

    /// Right multiplication by a zero-section element given as lamp offsets.
    pub fn add_lamps(&mut self, lamps: &[(i64, i64)]) {
        for &(j, v) in lamps {
            self.lamps.add(self.cursor + j, v);
        }
    }

    pub fn distance_to_identity(&self) -> u64 {
        self.lamps.distance(0, self.cursor)
    }

    pub fn element(&self) -> WreathElement {
        WreathElement::new(
            LampGroup::Z,
            self.lamps.to_config().into_iter().map(|(j, v)| (LatticePoint::scalar(j), v)),
            LatticePoint::scalar(self.cursor),
        )
        .expect("one-dimensional Z lamps are always valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkKind<'a> {
    /// Uniform on the eight `x_{±1,±1,±1}`.
    Canonical8,
    /// `x_{n1,n2,n3}` with i.i.d. coordinates from a stable table.
    Stable(&'a StableCoeffTable),
    /// Uniform on the `4n` zero-section elements `(ε n δ_0 + δ n δ_k, 0)`,
    /// `k ∈ ±[1, n/2]`, `ε, δ ∈ {±1}`; `n` even.
    ZeroSection(u64),
}

impl WalkKind<'_> {
    pub fn label(&self) -> String {
        match self {
            WalkKind::Canonical8 => "canonical8".into(),
            WalkKind::Stable(t) => format!("stable(q={})", t.q),
            WalkKind::ZeroSection(n) => format!("zero_section(n={n})"),
        }
    }

    fn validate(&self) -> Result<()> {
        if let WalkKind::ZeroSection(n) = self {
            if *n < 2 || n % 2 == 1 {
                return Err(Error::InvalidParameter(format!("zero-section walk needs an even n ≥ 2, got {n}")));
            }
        }
        Ok(())
    }

    /// Applies one step drawn from the walk's measure.
    pub fn step<R: Rng + ?Sized>(&self, w: &mut WreathWalker, rng: &mut R) {
        match self {
            WalkKind::Canonical8 => {
                let bits: u8 = rng.gen_range(0..8);
                let sign = |b: u8| if bits & b == 0 { -1 } else { 1 };
                w.step(GeneratorTriple {
                    n1: sign(1),
                    n2: sign(2),
                    n3: sign(4),
                });
            }
            WalkKind::Stable(t) => {
                let n1 = t.sample(rng);
                let n2 = t.sample(rng);
                let n3 = t.sample(rng);
                w.step(GeneratorTriple { n1, n2, n3 });
            }
            WalkKind::ZeroSection(n) => {
                let n = *n as i64;
                let half = n / 2;
                let mut k = rng.gen_range(1..=half);
                if rng.gen::<bool>() {
                    k = -k;
                }
                let eps = if rng.gen::<bool>() { n } else { -n };
                let delta = if rng.gen::<bool>() { n } else { -n };
                w.add_lamps(&[(0, eps), (k, delta)]);
            }
        }
    }
}

/// Exact `d(W_t, e)` at each probe time, one row per probe.
pub fn simulate_wreath_walk(kind: WalkKind<'_>, probes: &[u64], trials: u64, seed: u64, exec: Exec) -> Result<DriftTable> {
    kind.validate()?;
    check_probes(probes)?;
    let horizon = *probes.last().unwrap();
    let samples = run_trials(exec, seed, trials, |rng| {
        let mut w = WreathWalker::new();
        let mut out = Vec::with_capacity(probes.len());
        let mut next = 0;
        for t in 0..=horizon {
            if t > 0 {
                kind.step(&mut w, rng);
            }
            while next < probes.len() && probes[next] == t {
                out.push(w.distance_to_identity() as f64);
                next += 1;
            }
        }
        out
    });
    Ok(DriftTable::from_samples(kind.label(), probes, &samples, 0))
}

/// `E d(W_1, e)^p` under the walk's measure, by exhaustive enumeration where
/// the measure is finite and by Monte Carlo otherwise.
pub fn step_moment(kind: WalkKind<'_>, p: f64, trials: u64, seed: u64, exec: Exec) -> Result<f64> {
    kind.validate()?;
    match kind {
        WalkKind::Canonical8 => Ok(GeneratorTriple::canonical8()
            .into_iter()
            .map(|g| {
                let mut w = WreathWalker::new();
                w.step(g);
                (w.distance_to_identity() as f64).powf(p)
            })
            .sum::<f64>()
            / 8.0),
        WalkKind::ZeroSection(n) => {
            // d = 2n + 2|k|, uniform over |k| ∈ [1, n/2].
            let half = n / 2;
            Ok((1..=half).map(|k| ((2 * n + 2 * k) as f64).powf(p)).sum::<f64>() / half as f64)
        }
        WalkKind::Stable(_) => {
            let xs = run_trials(exec, seed, trials, |rng| {
                let mut w = WreathWalker::new();
                kind.step(&mut w, rng);
                (w.distance_to_identity() as f64).powf(p)
            });
            Ok(crate::stats::RunningStats::from_slice(&xs).mean)
        }
    }
}
