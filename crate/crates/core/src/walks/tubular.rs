//! A reflected walk confined to a tube around the zero section of `Z ≀ Z`:
//!
//! `U_n = {(f, k) : supp f ⊆ [-n, n], |k| ≤ 2n^{(1+ε)/2}, |f(ℓ)| ≤ n²}`.
//!
//! `Z_0` is uniform on `U_n`; each step proposes `Z_{t-1} g_t` with `g_t`
//! uniform on the eight `x_{±1,±1,±1}` and stays put if the proposal leaves
//! `U_n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{run_trials, Exec};
use crate::walks::lamplighter::{GeneratorTriple, LineLamps};
use crate::walks::{check_probes, DriftTable};
use crate::wreath::{LampGroup, WreathElement};

fn check_params(n: u64, eps: f64) -> Result<()> {
    if n == 0 || n > 1 << 20 {
        return Err(Error::InvalidParameter(format!("tube size n must lie in [1, 2^20], got {n}")));
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1/4), got {eps}")));
    }
    Ok(())
}

/// Real-valued cursor bound `2 n^{(1+ε)/2}`.
fn cursor_bound(n: u64, eps: f64) -> f64 {
    2.0 * (n as f64).powf((1.0 + eps) / 2.0)
}

#[derive(Debug, Clone)]
pub struct TubularState {
    pub n: i64,
    pub eps: f64,
    /// `⌊2 n^{(1+ε)/2}⌋`.
    pub radius: i64,
    /// `f(j)` for `j ∈ [-n, n]`, stored at `j + n`.
    pub lamps: Vec<i64>,
    pub cursor: i64,
    /// `f_t - f_0`, for the distance to the start.
    pub displacement: LineLamps,
    pub start_cursor: i64,
}

impl TubularState {
    /// Uniform sample from `U_n`.
    pub fn sample<R: Rng + ?Sized>(n: u64, eps: f64, rng: &mut R) -> Result<Self> {
        check_params(n, eps)?;
        let radius = cursor_bound(n, eps).floor() as i64;
        let n = n as i64;
        let cap = n * n;
        let lamps = (0..2 * n + 1).map(|_| rng.gen_range(-cap..=cap)).collect();
        let cursor = rng.gen_range(-radius..=radius);
        Ok(TubularState {
            n,
            eps,
            radius,
            lamps,
            cursor,
            displacement: LineLamps::new(),
            start_cursor: cursor,
        })
    }

    fn slot(&self, j: i64) -> Option<usize> {
        if j.abs() <= self.n {
            Some((j + self.n) as usize)
        } else {
            None
        }
    }

    /// Proposes `Z g`; returns whether it was accepted.
    pub fn step(&mut self, g: GeneratorTriple) -> bool {
        let cap = self.n * self.n;
        let target = self.cursor + g.n3;
        if target.abs() > self.radius {
            return false;
        }
        let (Some(a), Some(b)) = (self.slot(self.cursor), self.slot(target)) else {
            return false;
        };
        let (va, vb) = if a == b {
            let v = self.lamps[a] + g.n1 + g.n2;
            (v, v)
        } else {
            (self.lamps[a] + g.n1, self.lamps[b] + g.n2)
        };
        if va.abs() > cap || vb.abs() > cap {
            return false;
        }
        self.lamps[a] = va;
        self.lamps[b] = vb;
        self.displacement.add(self.cursor, g.n1);
        self.displacement.add(target, g.n2);
        self.cursor = target;
        true
    }

    /// `d(Z_t, Z_0) = Σ|f_t - f_0| + TSP(supp(f_t - f_0); k_0, k_t)`.
    pub fn distance_to_start(&self) -> u64 {
        self.displacement.distance(self.start_cursor, self.cursor)
    }

    /// Checks the sites touched by the last step and the cursor against the
    /// defining bounds of `U_n`.
    fn local_ok(&self, sites: [i64; 2]) -> bool {
        let n = self.n as f64;
        (self.cursor as f64).abs() <= cursor_bound(self.n as u64, self.eps)
            && sites.iter().all(|&j| match self.slot(j) {
                Some(i) => (self.lamps[i] as f64).abs() <= n * n,
                None => false,
            })
    }

    pub fn to_element(&self) -> WreathElement {
        WreathElement::new(
            LampGroup::Z,
            self.lamps
                .iter()
                .enumerate()
                .map(|(i, &v)| (crate::wreath::LatticePoint::scalar(i as i64 - self.n), v)),
            crate::wreath::LatticePoint::scalar(self.cursor),
        )
        .expect("one-dimensional Z lamps are always valid")
    }
}

/// Full membership test for `U_n`: support in `[-n, n]`, lamp values at most
/// `n²` in absolute value and cursor within `2 n^{(1+ε)/2}`.
pub fn tubular_geometry_check(state: &WreathElement, n: u64, eps: f64) -> Result<()> {
    check_params(n, eps)?;
    if state.group() != LampGroup::Z || state.dim() != 1 {
        return Err(Error::Unsupported("the tube lives in Z ≀ Z".into()));
    }
    let nf = n as f64;
    for (z, v) in state.lamps() {
        let j = z.0[0];
        if j.unsigned_abs() > n {
            return Err(Error::InvariantViolation(format!("lamp at {j} outside [-{n}, {n}]")));
        }
        if (*v as f64).abs() > nf * nf {
            return Err(Error::InvariantViolation(format!("lamp value {v} at {j} exceeds n² = {}", n * n)));
        }
    }
    let k = state.cursor().0[0];
    let bound = cursor_bound(n, eps);
    if (k as f64).abs() > bound {
        return Err(Error::InvariantViolation(format!("cursor {k} exceeds 2n^((1+ε)/2) = {bound}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubularReport {
    pub table: DriftTable,
    pub steps: u64,
    pub rejected: u64,
    /// Final states that failed the full membership test.
    pub final_violations: u64,
}

struct Trial {
    distances: Vec<f64>,
    rejected: u64,
    local_violations: u64,
    final_violation: bool,
}

fn run_chain<R: Rng + ?Sized>(n: u64, eps: f64, probes: &[u64], rng: &mut R) -> Trial {
    let mut state = TubularState::sample(n, eps, rng).expect("parameters validated by caller");
    let mut trial = Trial {
        distances: Vec::with_capacity(probes.len()),
        rejected: 0,
        local_violations: 0,
        final_violation: tubular_geometry_check(&state.to_element(), n, eps).is_err(),
    };
    let horizon = *probes.last().unwrap();
    let mut next = 0;
    for t in 0..=horizon {
        if t > 0 {
            let bits: u8 = rng.gen_range(0..8);
            let sign = |b: u8| if bits & b == 0 { -1 } else { 1 };
            let g = GeneratorTriple {
                n1: sign(1),
                n2: sign(2),
                n3: sign(4),
            };
            let from = state.cursor;
            if !state.step(g) {
                trial.rejected += 1;
            }
            if !state.local_ok([from, state.cursor]) {
                trial.local_violations += 1;
            }
        }
        while next < probes.len() && probes[next] == t {
            trial.distances.push(state.distance_to_start() as f64);
            next += 1;
        }
    }
    trial.final_violation |= tubular_geometry_check(&state.to_element(), n, eps).is_err();
    trial
}

/// `d(Z_t, Z_0)` at the probe times for the chain on `U_n`.
pub fn simulate_tubular(n: u64, eps: f64, probes: &[u64], trials: u64, seed: u64, exec: Exec) -> Result<TubularReport> {
    check_params(n, eps)?;
    check_probes(probes)?;
    let results = run_trials(exec, seed, trials, |rng| run_chain(n, eps, probes, rng));
    let samples: Vec<Vec<f64>> = results.iter().map(|t| t.distances.clone()).collect();
    let violations = results.iter().map(|t| t.local_violations).sum();
    Ok(TubularReport {
        table: DriftTable::from_samples(format!("tubular(n={n},eps={eps})"), probes, &samples, violations),
        steps: trials * probes.last().unwrap(),
        rejected: results.iter().map(|t| t.rejected).sum(),
        final_violations: results.iter().filter(|t| t.final_violation).count() as u64,
    })
}

/// `E d(Z_n, Z_0)` for the chain on `U_n`, one row per `n`. Each `n` uses its
/// own seed stream derived from `seed`.
pub fn tubular_drift(ns: &[u64], eps: f64, trials: u64, seed: u64, exec: Exec) -> Result<TubularReport> {
    check_probes(ns)?;
    let mut rows = Vec::with_capacity(ns.len());
    let (mut steps, mut rejected, mut final_violations, mut violations) = (0, 0, 0, 0);
    for &n in ns {
        let r = simulate_tubular(n, eps, &[n], trials, crate::exec::derive_seed(seed, &format!("tubular-{n}")), exec)?;
        rows.push(r.table.rows[0]);
        steps += r.steps;
        rejected += r.rejected;
        final_violations += r.final_violations;
        violations += r.table.violations;
    }
    Ok(TubularReport {
        table: DriftTable {
            walk: format!("tubular(eps={eps})"),
            rows,
            violations,
        },
        steps,
        rejected,
        final_violations,
    })
}
