//! One function per subcommand. Each reads its parameters from [`Settings`],
//! runs the experiment and returns a table plus whether every checked
//! invariant held.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wreathlab::embeddings::composite::{composite_diff, CompositeConfig};
use wreathlab::embeddings::jones::{jones_embed_diff_with, jones_lipschitz_bound, JonesConfig};
use wreathlab::embeddings::phi::{amgm_check, phi_embed_diff, phi_lipschitz_constant, scale_profile};
use wreathlab::embeddings::snowflake::snowflake_embed_diff;
use wreathlab::exec::{derive_seed, trial_rng, Exec};
use wreathlab::exponents::{beta_ratio, compression_envelope, loglog_fit_points, BetaWalk};
use wreathlab::markov::{build_reflected_wreath_chain, markov_type_ratio, random_reversible_chain, PointMap};
use wreathlab::tsp::{held_karp, multiscale_tsp_bound, Norm};
use wreathlab::walks::stable::{DEFAULT_CUTOFF, DEFAULT_QUAD_PANELS};
use wreathlab::walks::{
    return_probability, return_probability_sum, simulate_wreath_walk, stable_char_fn, stable_coeffs, tubular_drift,
    z_walk_drift, DriftTable, GeneratorTriple, StableCoeffTable, StepLaw, WalkKind,
};
use wreathlab::wreath::line_tsp;
use wreathlab::{word_distance, LampGroup, LatticePoint, WreathElement};

use crate::config::{Settings, UsageError};
use crate::table::{int, num, text, Table};

pub enum Failure {
    Usage(String),
    Compute(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<wreathlab::Error> for Failure {
    fn from(e: wreathlab::Error) -> Self {
        use wreathlab::Error as E;
        match e {
            E::InvalidParameter(_) | E::DimensionMismatch(..) | E::LampGroupMismatch | E::Unsupported(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Compute(other.to_string()),
        }
    }
}

pub struct Report {
    pub table: Table,
    pub ok: bool,
}

type Outcome = Result<Report, Failure>;

fn passed(table: Table) -> Outcome {
    Ok(Report { table, ok: true })
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn slope_meta(table: &mut Table, pts: &[(f64, f64)]) {
    if let Ok(fit) = loglog_fit_points(pts) {
        table.set_meta("slope", num(fit.slope));
        table.set_meta("slope_stderr", num(fit.slope_stderr));
    }
}

fn drift_rows(drift: &DriftTable) -> Table {
    let mut t = Table::new(&["n", "mean", "stderr", "trials"]);
    for r in &drift.rows {
        t.push(vec![int(r.n), num(r.mean), num(r.stderr), int(r.trials)]);
    }
    t.set_meta("walk", text(drift.walk.clone()));
    t.set_meta("violations", int(drift.violations));
    slope_meta(&mut t, &drift.rows.iter().map(|r| (r.n as f64, r.mean)).collect::<Vec<_>>());
    t
}

fn stable_table(s: &mut Settings) -> Result<StableCoeffTable, Failure> {
    let q = s.get("q", 1.5)?;
    Ok(stable_coeffs(q, DEFAULT_CUTOFF)?)
}

pub fn coeffs(s: &mut Settings) -> Outcome {
    let q = s.get("q", 1.5)?;
    let n: u64 = s.get("n", 16)?;
    let cutoff = usize::try_from(n.max(4)).map_err(|_| usage("--n too large"))?;
    let table = stable_coeffs(q, cutoff)?;
    let mut t = Table::new(&["n", "a_n"]);
    for i in 0..=n as usize {
        t.push(vec![int(i as u64), num(table.probs[i])]);
    }
    let total = table.table_mass() + table.tail_mass;
    t.set_meta("cutoff", int(cutoff as u64));
    t.set_meta("tail_mass", num(table.tail_mass));
    t.set_meta("total_mass", num(total));
    Ok(Report {
        table: t,
        ok: (total - 1.0).abs() <= 1e-12 && table.prob(1) == 0.0,
    })
}

pub fn charfn(s: &mut Settings) -> Outcome {
    let q = s.get("q", 1.5)?;
    let n: u64 = s.get("n", 64)?;
    if !(q > 1.0 && q < 2.0) || n == 0 {
        return Err(usage("charfn needs q in (1, 2) and n ≥ 1"));
    }
    let mut t = Table::new(&["theta", "phi"]);
    for i in 0..=n {
        let theta = std::f64::consts::PI * i as f64 / n as f64;
        t.push(vec![num(theta), num(stable_char_fn(q, theta))]);
    }
    passed(t)
}

pub fn return_prob(s: &mut Settings) -> Outcome {
    let q = s.get("q", 1.5)?;
    let ns = match s.opt::<u64>("n")? {
        Some(n) => vec![n],
        None => s.n_list("2^0..2^10")?,
    };
    let mut t = Table::new(&["n", "probability", "return_sum"]);
    let mut pts = Vec::new();
    for &n in &ns {
        let p = return_probability(q, n, DEFAULT_QUAD_PANELS)?;
        let sum = return_probability_sum(q, n, DEFAULT_QUAD_PANELS)?;
        if n > 0 {
            pts.push((n as f64, p));
        }
        t.push(vec![int(n), num(p), num(sum)]);
    }
    slope_meta(&mut t, &pts);
    passed(t)
}

pub fn drift(s: &mut Settings, exec: Exec) -> Outcome {
    let walk: String = s.get("walk", "canonical8".to_string())?;
    let probes = s.n_list("2^4..2^12")?;
    let trials = s.get("trials", 1000u64)?;
    let seed = s.seed()?;
    let table = match walk.as_str() {
        "simple" => z_walk_drift(StepLaw::Simple, &probes, trials, seed, exec)?,
        "stable" => z_walk_drift(StepLaw::Stable(&stable_table(s)?), &probes, trials, seed, exec)?,
        "canonical8" => simulate_wreath_walk(WalkKind::Canonical8, &probes, trials, seed, exec)?,
        "wreath-stable" => simulate_wreath_walk(WalkKind::Stable(&stable_table(s)?), &probes, trials, seed, exec)?,
        "zero-section" => {
            let n = s.get("n", 16u64)?;
            simulate_wreath_walk(WalkKind::ZeroSection(n), &probes, trials, seed, exec)?
        }
        other => return Err(usage(format!("unknown walk '{other}'"))),
    };
    passed(drift_rows(&table))
}

pub fn beta(s: &mut Settings, exec: Exec) -> Outcome {
    let walk: String = s.get("walk", "zero-section".to_string())?;
    let p = s.get("p", 2.0)?;
    let ts = s.n_list("2^4..2^10")?;
    let trials = s.get("trials", 1000u64)?;
    let seed = s.seed()?;
    let needs_table = matches!(walk.as_str(), "stable" | "wreath-stable");
    let table = if needs_table { Some(stable_table(s)?) } else { None };
    let bw = match (walk.as_str(), &table) {
        ("simple", _) => BetaWalk::Line(StepLaw::Simple),
        ("stable", Some(t)) => BetaWalk::Line(StepLaw::Stable(t)),
        ("canonical8", _) => BetaWalk::Wreath(WalkKind::Canonical8),
        ("wreath-stable", Some(t)) => BetaWalk::Wreath(WalkKind::Stable(t)),
        ("zero-section", _) => BetaWalk::ZeroSectionMatched,
        (other, _) => return Err(usage(format!("unknown walk '{other}'"))),
    };
    let series = beta_ratio(bw, p, &ts, trials, seed, exec)?;
    let mut t = Table::new(&["t", "mean_distance", "mean_distance_stderr", "step_moment", "ratio", "ratio_stderr"]);
    for r in &series.rows {
        t.push(vec![
            int(r.t),
            num(r.mean_distance),
            num(r.mean_distance_stderr),
            num(r.step_moment),
            num(r.ratio),
            num(r.ratio_stderr),
        ]);
    }
    t.set_meta("walk", text(series.walk));
    let ok = series.rows.iter().all(|r| r.ratio <= 1.05);
    Ok(Report { table: t, ok })
}

/// A `C₂ ≀ Z^d` element with up to `max_lamps` lamps and the cursor in the
/// box `[-w, w]^d`.
pub fn random_c2(rng: &mut ChaCha8Rng, d: usize, w: i64, max_lamps: usize) -> WreathElement {
    let m = rng.gen_range(1..=max_lamps);
    let mut pt = || LatticePoint::new((0..d).map(|_| rng.gen_range(-w..=w)).collect());
    let lamps: Vec<(LatticePoint, i64)> = (0..m).map(|_| (pt(), 1)).collect();
    WreathElement::new(LampGroup::C2, lamps, pt()).expect("C2 lamps")
}

pub fn envelope(s: &mut Settings, exec: Exec) -> Outcome {
    let embedding: String = s.get("embedding", "snowflake".to_string())?;
    let samples = s.get("trials", 4000u64)?;
    let seed = s.seed()?;
    let report = match embedding.as_str() {
        "identity" => compression_envelope(
            |rng| rng.gen_range(1..1_000_000u64) as f64,
            |&d| Ok(d),
            |&d| Ok(d),
            samples,
            seed,
            exec,
        )?,
        "snowflake" => {
            let eps = s.get("eps", 0.25)?;
            let p = s.get("p", 2.0)?;
            compression_envelope(
                |rng| {
                    let x: i64 = rng.gen_range(-(1 << 30)..(1 << 30));
                    let k = rng.gen_range(0..24);
                    (x, x + rng.gen_range(1i64 << k..=1i64 << (k + 1)))
                },
                |&(x, y)| snowflake_embed_diff(&LatticePoint::scalar(x), &LatticePoint::scalar(y), eps, p),
                |&(x, y)| Ok((y - x) as f64),
                samples,
                seed,
                exec,
            )?
        }
        "composite" => {
            let eps = s.get("eps", 0.25)?;
            let p = s.get("p", 2.0)?;
            let d = s.get("d", 2usize)?;
            let k_max = s.get("k-max", 24u32)?;
            if !(1..=2).contains(&d) {
                return Err(usage("composite envelope supports d = 1 or 2"));
            }
            let cfg = CompositeConfig {
                jones: JonesConfig {
                    p,
                    k_max,
                    exact_points: 1 << 20,
                },
                eps,
            };
            let e = WreathElement::identity(LampGroup::C2, d);
            compression_envelope(
                |rng| {
                    let w = 1i64 << rng.gen_range(1..=6);
                    random_c2(rng, d, w, 12)
                },
                |a| Ok(composite_diff(a, &e, &cfg)?.value),
                |a| Ok(word_distance(a, &e, 16)?.value().expect("at most 12 lamps") as f64),
                samples,
                seed,
                exec,
            )?
        }
        other => return Err(usage(format!("unknown embedding '{other}'"))),
    };
    let mut t = Table::new(&["level", "count", "min_norm", "argmin_distance"]);
    for b in &report.buckets {
        t.push(vec![int(b.level), int(b.count), num(b.min_norm), num(b.argmin_distance)]);
    }
    t.set_meta("embedding", text(embedding));
    t.set_meta("exponent", num(report.exponent));
    t.set_meta("exponent_stderr", num(report.fit.slope_stderr));
    let ok = report.exponent <= 1.0 + 1e-9;
    Ok(Report { table: t, ok })
}

pub fn tsp_check(s: &mut Settings) -> Outcome {
    let trials = s.get("trials", 200u64)?;
    let mut rng = trial_rng(s.seed()?, 0);
    let mut line_bad = 0u64;
    for _ in 0..trials {
        let n = rng.gen_range(0..=12);
        let pts: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..=50)).collect();
        let (x, y) = (rng.gen_range(-50..=50), rng.gen_range(-50..=50));
        let lattice: Vec<LatticePoint> = pts.iter().map(|&p| LatticePoint::scalar(p)).collect();
        let exact = held_karp(&lattice, &LatticePoint::scalar(x), &LatticePoint::scalar(y), Norm::L1)?;
        line_bad += u64::from(line_tsp(&pts, x, y) != exact);
    }
    let mut multi_bad = 0u64;
    let origin = LatticePoint::origin(2);
    for _ in 0..trials {
        let n = rng.gen_range(0..=12);
        let pts: Vec<LatticePoint> = (0..n)
            .map(|_| {
                let a: i64 = rng.gen_range(-64..=64);
                let room = 64 - a.abs();
                LatticePoint::new(vec![a, rng.gen_range(-room..=room)])
            })
            .collect();
        let exact = held_karp(&pts, &origin, &origin, Norm::L1)?;
        multi_bad += u64::from(multiscale_tsp_bound(&pts, 0).total < exact);
    }
    let mut split_bad = 0u64;
    for _ in 0..trials {
        let n = rng.gen_range(0..=10);
        let mut pt = || LatticePoint::new(vec![rng.gen_range(-20..=20), rng.gen_range(-20..=20)]);
        let a: Vec<LatticePoint> = (0..n).map(|_| pt()).collect();
        let (x, y) = (pt(), pt());
        let (left, right): (Vec<_>, Vec<_>) = a.iter().cloned().partition(|_| rng.gen::<bool>());
        let whole = held_karp(&a, &x, &y, Norm::L1)?;
        split_bad += u64::from(whole > 2 * held_karp(&left, &x, &y, Norm::L1)? + held_karp(&right, &x, &y, Norm::L1)?);
    }
    let mut t = Table::new(&["check", "instances", "failures"]);
    t.push(vec![text("line_vs_held_karp"), int(trials), int(line_bad)]);
    t.push(vec![text("multiscale_upper_bound"), int(trials), int(multi_bad)]);
    t.push(vec![text("split_inequality"), int(trials), int(split_bad)]);
    Ok(Report {
        table: t,
        ok: line_bad + multi_bad + split_bad == 0,
    })
}

/// Connected region of `Z ≀ Z` grown breadth-first from the identity along
/// the eight canonical generators.
fn wreath_region(rng: &mut ChaCha8Rng, size: usize) -> Vec<WreathElement> {
    let steps: Vec<WreathElement> = GeneratorTriple::canonical8().into_iter().map(|g| g.to_element()).collect();
    let start = WreathElement::identity(LampGroup::Z, 1);
    let mut seen = BTreeSet::from([format!("{start:?}")]);
    let mut region = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for g in &steps {
            if region.len() >= size {
                return region;
            }
            let y = x.multiply(g).expect("same group");
            if rng.gen::<f64>() < 0.6 && seen.insert(format!("{y:?}")) {
                region.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    region
}

pub fn markov_check(s: &mut Settings) -> Outcome {
    let chains = s.get("trials", 100u64)?;
    let t_max = s.get("n", 20u64)?;
    let p = s.get("p", 2.0)?;
    let seed = s.seed()?;
    if t_max == 0 || t_max > u64::from(u32::MAX) {
        return Err(usage("--n (largest t) must lie in [1, 2^32)"));
    }
    let mut rng = trial_rng(seed, 0);
    let mut failures = vec![0u64; t_max as usize];
    let mut worst = vec![0.0f64; t_max as usize];
    for _ in 0..chains {
        let size = rng.gen_range(2..=40);
        let chain = random_reversible_chain(size, rng.gen_range(0.0..0.8), &mut rng)?;
        let dim = rng.gen_range(1..=4);
        let map = PointMap::Points((0..size).map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect());
        for t in 1..=t_max as u32 {
            let r = markov_type_ratio(&chain, &map, t, p)?;
            let i = t as usize - 1;
            failures[i] += u64::from(!r.holds(1.0));
            if r.rhs > 0.0 {
                worst[i] = worst[i].max(r.lhs / r.rhs);
            }
        }
    }
    let steps: Vec<(WreathElement, f64)> = GeneratorTriple::canonical8().into_iter().map(|g| (g.to_element(), 0.125)).collect();
    let mut reflected_bad = 0u64;
    let mut region_rng = trial_rng(derive_seed(seed, "regions"), 0);
    for _ in 0..10 {
        let region = wreath_region(&mut region_rng, 80);
        let chain = build_reflected_wreath_chain(&region, &steps)?;
        let n = chain.size();
        let uniform = chain.pi().iter().all(|&w| (w - 1.0 / n as f64).abs() < 1e-15);
        let symmetric = (0..n).all(|a| (0..n).all(|b| (chain.entry(a, b) - chain.entry(b, a)).abs() < 1e-12));
        reflected_bad += u64::from(!(uniform && symmetric));
    }
    let mut t = Table::new(&["t", "chains", "failures", "max_ratio"]);
    for i in 0..t_max as usize {
        t.push(vec![int(i as u64 + 1), int(chains), int(failures[i]), num(worst[i])]);
    }
    t.set_meta("reflected_chains", int(10u64));
    t.set_meta("reflected_failures", int(reflected_bad));
    // Markov type 2 with constant 1 is a Hilbert space fact; other p are reported only.
    let ok = reflected_bad == 0 && (p != 2.0 || failures.iter().all(|&f| f == 0));
    Ok(Report { table: t, ok })
}

pub fn tubular(s: &mut Settings, exec: Exec) -> Outcome {
    let eps = s.get("eps", 0.2)?;
    let ns = s.n_list("2^4..2^10")?;
    let trials = s.get("trials", 200u64)?;
    let seed = s.seed()?;
    let r = tubular_drift(&ns, eps, trials, seed, exec)?;
    let mut t = drift_rows(&r.table);
    t.set_meta("steps", int(r.steps));
    t.set_meta("rejected", int(r.rejected));
    t.set_meta("final_violations", int(r.final_violations));
    Ok(Report {
        table: t,
        ok: r.table.violations == 0 && r.final_violations == 0,
    })
}

pub fn zero_section(s: &mut Settings, exec: Exec) -> Outcome {
    let ns = s.n_list("16,64,256")?;
    let trials = s.get("trials", 1000u64)?;
    let seed = s.seed()?;
    let mut t = Table::new(&["n", "mean", "stderr", "trials", "bound", "holds"]);
    let mut ok = true;
    for &n in &ns {
        let drift = simulate_wreath_walk(WalkKind::ZeroSection(n), &[n], trials, derive_seed(seed, &format!("zero-section-{n}")), exec)?;
        let r = drift.rows[0];
        let bound = (n as f64).powi(2) / 3.0;
        let holds = r.mean >= bound - 3.0 * r.stderr;
        ok &= holds;
        t.push(vec![int(n), num(r.mean), num(r.stderr), int(r.trials), num(bound), holds.into()]);
    }
    Ok(Report { table: t, ok })
}

fn zero_section_element(rng: &mut ChaCha8Rng) -> WreathElement {
    let m = rng.gen_range(0..=8);
    let lamps: Vec<(LatticePoint, i64)> = (0..m).map(|_| (LatticePoint::scalar(rng.gen_range(-64..=64)), rng.gen_range(-1024..=1024))).collect();
    WreathElement::new(LampGroup::Z, lamps, LatticePoint::scalar(0)).expect("Z lamps")
}

pub fn phi_check(s: &mut Settings) -> Outcome {
    let ps = s.opt::<f64>("p")?.map_or_else(|| vec![1.5, 2.0], |p| vec![p]);
    let pairs = s.get("trials", 500u64)?;
    let k_max = s.get("k-max", 64u32)?;
    let seed = s.seed()?;
    let e = WreathElement::identity(LampGroup::Z, 1);
    let mut t = Table::new(&["p", "pairs", "constant", "upper_failures", "lower_failures", "tail_failures", "max_ratio"]);
    let mut ok = true;
    for &p in &ps {
        let mut rng = trial_rng(derive_seed(seed, &format!("phi-{p}")), 0);
        let c = phi_lipschitz_constant(p);
        let (mut up, mut low, mut tail, mut worst) = (0u64, 0u64, 0u64, 0.0f64);
        for _ in 0..pairs {
            let f = zero_section_element(&mut rng);
            let g = zero_section_element(&mut rng);
            let d = word_distance(&f, &g, 16)?.value().expect("at most 16 lamps") as f64;
            let r = phi_embed_diff(&f, &g, p, k_max)?;
            up += u64::from(r.upper() > c * d + 1e-9);
            if d > 0.0 {
                worst = worst.max(r.upper() / (c * d));
            }
            let v = phi_embed_diff(&f, &e, p, k_max)?.value.powf(p);
            for (&(l, m), &count) in &scale_profile(&f)?.counts {
                let rhs = 0.5 * 2f64.powf(f64::from(m) + (p - 1.0) * f64::from(l)) / (f64::from(m) + 1.0).powf(p) * count as f64;
                low += u64::from(v < rhs);
            }
            let half = phi_embed_diff(&f, &g, p, k_max / 2)?;
            tail += u64::from(r.value.powf(p) - half.value.powf(p) > half.tail_bound.powf(p) * (1.0 + 1e-9) + 1e-9);
        }
        ok &= up + low + tail == 0;
        t.push(vec![num(p), int(pairs), num(c), int(up), int(low), int(tail), num(worst)]);
    }
    Ok(Report { table: t, ok })
}

pub fn jones_check(s: &mut Settings) -> Outcome {
    let d = s.get("d", 2usize)?;
    let p = s.get("p", 2.0)?;
    let bases = s.get("trials", 1000u64)?;
    let k_max = s.get("k-max", 48u32)?;
    let seed = s.seed()?;
    if !(1..=3).contains(&d) {
        return Err(usage("jones-check supports d in 1..=3"));
    }
    let cfg = JonesConfig {
        p,
        k_max,
        exact_points: 1 << 16,
    };
    let bound = jones_lipschitz_bound(d, p);
    let gens = WreathElement::generators(LampGroup::C2, d);
    let mut worst = vec![0.0f64; gens.len()];
    let mut rng = trial_rng(seed, 0);
    for _ in 0..bases {
        let k = rng.gen_range(4..=8);
        let base = random_c2(&mut rng, d, 1 << (k - 1), 16);
        for (i, g) in gens.iter().enumerate() {
            let moved = base.multiply(g)?;
            worst[i] = worst[i].max(jones_embed_diff_with(&moved, &base, &cfg)?.upper());
        }
    }
    let mut t = Table::new(&["generator", "max_norm", "bound"]);
    for (i, w) in worst.iter().enumerate() {
        t.push(vec![int(i as u64), num(*w), num(bound)]);
    }
    t.set_meta("generators", text("0 is the lamp; then ±e_i in axis order"));
    Ok(Report {
        ok: worst.iter().all(|&w| w <= bound),
        table: t,
    })
}

pub fn amgm(s: &mut Settings) -> Outcome {
    let ps = s.opt::<f64>("p")?.map_or_else(|| vec![1.25, 1.5, 2.0], |p| vec![p]);
    let max_level = s.get("k-max", 40u32)?;
    let mut t = Table::new(&["p", "evaluated", "violations", "min_ratio"]);
    let mut ok = true;
    for &p in &ps {
        if !(p > 1.0 && p <= 2.0) {
            return Err(usage("amgm-check needs p in (1, 2]"));
        }
        let r = amgm_check(&[p], max_level, 1 << 12, 64);
        ok &= r.violations == 0;
        t.push(vec![num(p), int(r.evaluated), int(r.violations), num(r.min_ratio)]);
    }
    Ok(Report { table: t, ok })
}
