//! End-to-end acceptance battery. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::{BTreeSet, VecDeque};
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wreathlab::embeddings::composite::{composite_diff, CompositeConfig};
use wreathlab::embeddings::jones::{jones_embed_diff_with, jones_lipschitz_bound, JonesConfig};
use wreathlab::embeddings::phi::{amgm_check, phi_embed_diff, phi_lipschitz_constant, scale_profile};
use wreathlab::exec::{derive_seed, trial_rng, Exec};
use wreathlab::exponents::{beta_ratio, compression_envelope, loglog_fit, loglog_fit_points, BetaWalk};
use wreathlab::markov::{build_reflected_wreath_chain, markov_type_ratio, random_reversible_chain, PointMap};
use wreathlab::tsp::{held_karp, multiscale_tsp_bound, Norm};
use wreathlab::walks::stable::{DEFAULT_CUTOFF, DEFAULT_QUAD_PANELS};
use wreathlab::walks::{
    dyadic_probes, lemma_check, return_probability, return_probability_sum, simple_return_probabilities,
    simulate_wreath_walk, stable_coeffs, tubular_drift, z_walk_drift, GeneratorTriple, StepLaw, WalkKind,
};
use wreathlab::wreath::line_tsp;
use wreathlab::{word_distance, LampGroup, LatticePoint, WreathElement};

const SEED: u64 = 0xC2AD;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: wreathlab::Error) -> String {
    e.to_string()
}

fn rng_for(label: &str) -> ChaCha8Rng {
    trial_rng(derive_seed(SEED, label), 0)
}

fn stable_step_law() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for q in [1.2, 1.5, 1.8] {
        let t = stable_coeffs(q, DEFAULT_CUTOFF).map_err(err)?;
        let symmetric = (0..64).all(|n| t.prob(n) == t.prob(-n));
        let total = t.table_mass() + t.tail_mass;
        let scaled: Vec<f64> = ((1usize << 10)..=(1 << 16)).map(|n| t.probs[n] * (n as f64).powf(q + 1.0)).collect();
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        let spread = hi / lo - 1.0;
        ok &= symmetric && t.prob(1) == 0.0 && t.prob(-1) == 0.0 && (total - 1.0).abs() <= 1e-12 && spread < 0.2;
        notes.push(format!("q={q}: |Σ-1|={:.1e} spread={:.3}", (total - 1.0).abs(), spread));
    }
    check(ok, notes.join("; "))
}

fn return_probability_slope() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for q in [1.2, 1.5, 1.8] {
        let pts = (6..=14)
            .map(|k| return_probability(q, 1 << k, DEFAULT_QUAD_PANELS).map(|p| ((1u64 << k) as f64, p)))
            .collect::<wreathlab::Result<Vec<_>>>()
            .map_err(err)?;
        let fit = loglog_fit_points(&pts).map_err(err)?;
        ok &= (fit.slope + 1.0 / q).abs() <= 0.03;
        notes.push(format!("q={q}: slope {:.4} vs {:.4}", fit.slope, -1.0 / q));
    }
    check(ok, notes.join("; "))
}

fn stable_displacement_slope() -> Outcome {
    let q = 1.5;
    let t = stable_coeffs(q, DEFAULT_CUTOFF).map_err(err)?;
    let table = z_walk_drift(StepLaw::Stable(&t), &dyadic_probes(8, 14), 10_000, derive_seed(SEED, "c3"), Exec::default())
        .map_err(err)?;
    let fit = loglog_fit(&table, 1 << 8, 1 << 14).map_err(err)?;
    check(
        (fit.slope - 1.0 / q).abs() <= 0.05,
        format!("q={q}: slope {:.4} ± {:.4} vs {:.4}", fit.slope, fit.slope_stderr, 1.0 / q),
    )
}

fn walk_lemmas() -> Outcome {
    let t = stable_coeffs(1.5, DEFAULT_CUTOFF).map_err(err)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [64usize, 256, 1024] {
        let simple_sum: f64 = simple_return_probabilities(n).iter().sum();
        let stable_sum = return_probability_sum(1.5, n as u64, DEFAULT_QUAD_PANELS).map_err(err)?;
        for (label, law, sum) in [("simple", StepLaw::Simple, simple_sum), ("stable", StepLaw::Stable(&t), stable_sum)] {
            let r = lemma_check(law, n, sum, 4000, derive_seed(SEED, &format!("c4-{label}-{n}")), Exec::default());
            let pass = r.size_range_holds(3.0) && r.second_moment_holds(3.0) && r.range_holds(3.0);
            ok &= pass;
            if !pass {
                notes.push(format!("{label} n={n} failed: {r:?}"));
            }
        }
    }
    notes.push("simple and stable(q=1.5) at n=64,256,1024".into());
    check(ok, notes.join("; "))
}

fn canonical_drift() -> Outcome {
    let table = simulate_wreath_walk(WalkKind::Canonical8, &dyadic_probes(8, 15), 4000, derive_seed(SEED, "c5"), Exec::default())
        .map_err(err)?;
    let fit = loglog_fit(&table, 1 << 8, 1 << 15).map_err(err)?;
    check(
        (0.70..=0.80).contains(&fit.slope),
        format!("slope {:.4} ± {:.4}, window [0.70, 0.80]", fit.slope, fit.slope_stderr),
    )
}

fn stable_wreath_drift() -> Outcome {
    let q = 1.5;
    let t = stable_coeffs(q, DEFAULT_CUTOFF).map_err(err)?;
    let table = simulate_wreath_walk(WalkKind::Stable(&t), &dyadic_probes(8, 15), 10_000, derive_seed(SEED, "c6"), Exec::default())
        .map_err(err)?;
    let fit = loglog_fit(&table, 1 << 8, 1 << 15).map_err(err)?;
    let target = (2.0 * q - 1.0) / (q * q);
    check(
        (fit.slope - target).abs() <= 0.06,
        format!("slope {:.4} ± {:.4} vs {:.4}", fit.slope, fit.slope_stderr, target),
    )
}

fn zero_section() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [16u64, 64, 256] {
        let table = simulate_wreath_walk(WalkKind::ZeroSection(n), &[n], 2000, derive_seed(SEED, &format!("c7-{n}")), Exec::default())
            .map_err(err)?;
        let row = table.rows[0];
        let bound = (n * n) as f64 / 3.0;
        ok &= row.mean >= bound - 3.0 * row.stderr;
        notes.push(format!("n={n}: E d/n² = {:.3}", row.mean / (n * n) as f64));
    }
    let s = beta_ratio(BetaWalk::ZeroSectionMatched, 2.0, &[1 << 10], 2000, derive_seed(SEED, "c7-beta"), Exec::default())
        .map_err(err)?;
    let ratio = s.rows[0].ratio;
    ok &= (ratio - 2.0 / 3.0).abs() <= 0.10;
    notes.push(format!("β(p=2, n=2^10) = {ratio:.4} ± {:.4}", s.rows[0].ratio_stderr));
    check(ok, notes.join("; "))
}

fn tubular() -> Outcome {
    let r = tubular_drift(&dyadic_probes(8, 14), 0.2, 1000, derive_seed(SEED, "c8"), Exec::default()).map_err(err)?;
    let fit = loglog_fit(&r.table, 1 << 8, 1 << 14).map_err(err)?;
    check(
        r.table.violations == 0 && r.final_violations == 0 && fit.slope >= 0.70,
        format!(
            "{} steps, {} local and {} final violations, slope {:.4} ± {:.4}",
            r.steps, r.table.violations, r.final_violations, fit.slope, fit.slope_stderr
        ),
    )
}

fn tsp_suite() -> Outcome {
    let mut rng = rng_for("c9");
    let mut line_bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(0..=12);
        let pts: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..=50)).collect();
        let (x, y) = (rng.gen_range(-50..=50), rng.gen_range(-50..=50));
        let lattice: Vec<LatticePoint> = pts.iter().map(|&p| LatticePoint::scalar(p)).collect();
        let exact = held_karp(&lattice, &LatticePoint::scalar(x), &LatticePoint::scalar(y), Norm::L1).map_err(err)?;
        line_bad += usize::from(line_tsp(&pts, x, y) != exact);
    }
    let mut multi_bad = 0;
    let origin = LatticePoint::origin(2);
    for _ in 0..200 {
        let n = rng.gen_range(0..=12);
        let pts: Vec<LatticePoint> = (0..n)
            .map(|_| {
                let a: i64 = rng.gen_range(-64..=64);
                let room = 64 - a.abs();
                LatticePoint::new(vec![a, rng.gen_range(-room..=room)])
            })
            .collect();
        let exact = held_karp(&pts, &origin, &origin, Norm::L1).map_err(err)?;
        multi_bad += usize::from(multiscale_tsp_bound(&pts, 0).total < exact);
    }
    let mut split_bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(0..=10);
        let mut pt = || LatticePoint::new(vec![rng.gen_range(-20..=20), rng.gen_range(-20..=20)]);
        let a: Vec<LatticePoint> = (0..n).map(|_| pt()).collect();
        let (x, y) = (pt(), pt());
        let (left, right): (Vec<_>, Vec<_>) = a.iter().cloned().partition(|_| rng.gen::<bool>());
        let whole = held_karp(&a, &x, &y, Norm::L1).map_err(err)?;
        let l = held_karp(&left, &x, &y, Norm::L1).map_err(err)?;
        let r = held_karp(&right, &x, &y, Norm::L1).map_err(err)?;
        split_bad += usize::from(whole > 2 * l + r);
    }
    check(
        line_bad + multi_bad + split_bad == 0,
        format!("mismatches: line {line_bad}/200, multiscale {multi_bad}/200, split {split_bad}/200"),
    )
}

fn random_c2(rng: &mut ChaCha8Rng, half_width: i64, max_lamps: usize) -> WreathElement {
    let m = rng.gen_range(1..=max_lamps);
    let mut pt = || LatticePoint::new(vec![rng.gen_range(-half_width..=half_width), rng.gen_range(-half_width..=half_width)]);
    let lamps: Vec<(LatticePoint, i64)> = (0..m).map(|_| (pt(), 1)).collect();
    WreathElement::new(LampGroup::C2, lamps, pt()).expect("C2 lamps in Z²")
}

fn jones_embedding() -> Outcome {
    let bound = jones_lipschitz_bound(2, 2.0);
    let cfg = JonesConfig {
        p: 2.0,
        k_max: 48,
        exact_points: 1 << 16,
    };
    let gens = WreathElement::generators(LampGroup::C2, 2);
    let mut rng = rng_for("c10-lip");
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.gen_range(4..=8);
        let base = random_c2(&mut rng, 1 << (k - 1), 16);
        for s in &gens {
            let moved = base.multiply(s).map_err(err)?;
            worst = worst.max(jones_embed_diff_with(&moved, &base, &cfg).map_err(err)?.upper());
        }
    }
    let composite = CompositeConfig {
        jones: JonesConfig {
            p: 2.0,
            k_max: 24,
            exact_points: 1 << 20,
        },
        eps: 0.25,
    };
    let e = WreathElement::identity(LampGroup::C2, 2);
    let gen = |rng: &mut ChaCha8Rng| {
        let r = 1i64 << rng.gen_range(1..=6);
        random_c2(rng, r, 12)
    };
    let dist = |a: &WreathElement| Ok(word_distance(a, &e, 16)?.value().expect("≤ 12 lamps is exact") as f64);
    let lower = compression_envelope(gen, |a| Ok(composite_diff(a, &e, &composite)?.value), dist, 2000, derive_seed(SEED, "c10-env"), Exec::default())
        .map_err(err)?;
    let upper = compression_envelope(gen, |a| Ok(composite_diff(a, &e, &composite)?.upper()), dist, 2000, derive_seed(SEED, "c10-env"), Exec::default())
        .map_err(err)?;
    check(
        worst <= bound && lower.exponent >= 0.45,
        format!(
            "max generator norm {worst:.3} ≤ C_Ψ = {bound:.3}; envelope exponent {:.4} (bracket up to {:.4}) over {} buckets",
            lower.exponent,
            upper.exponent,
            lower.buckets.len()
        ),
    )
}

fn zero_section_element(rng: &mut ChaCha8Rng) -> WreathElement {
    let m = rng.gen_range(0..=8);
    let lamps: Vec<(LatticePoint, i64)> = (0..m).map(|_| (LatticePoint::scalar(rng.gen_range(-64..=64)), rng.gen_range(-1024..=1024))).collect();
    WreathElement::new(LampGroup::Z, lamps, LatticePoint::scalar(0)).expect("Z lamps on the line")
}

fn phi_embedding() -> Outcome {
    let mut rng = rng_for("c11");
    let mut upper_bad = 0;
    let mut lower_bad = 0;
    let mut tail_bad = 0;
    let mut worst_ratio: f64 = 0.0;
    let e = WreathElement::identity(LampGroup::Z, 1);
    for _ in 0..500 {
        let f = zero_section_element(&mut rng);
        let g = zero_section_element(&mut rng);
        let d = word_distance(&f, &g, 16).map_err(err)?.value().expect("≤ 16 lamps is exact") as f64;
        let prof = scale_profile(&f).map_err(err)?;
        for p in [1.5, 2.0] {
            let r = phi_embed_diff(&f, &g, p, 64).map_err(err)?;
            if d > 0.0 {
                worst_ratio = worst_ratio.max(r.upper() / (phi_lipschitz_constant(p) * d));
            }
            upper_bad += usize::from(r.upper() > phi_lipschitz_constant(p) * d + 1e-9);
            let v = phi_embed_diff(&f, &e, p, 64).map_err(err)?.value.powf(p);
            for (&(l, m), &count) in &prof.counts {
                let rhs = 0.5 * 2f64.powf(f64::from(m) + (p - 1.0) * f64::from(l)) / (f64::from(m) + 1.0).powf(p) * count as f64;
                lower_bad += usize::from(v < rhs);
            }
            let small = phi_embed_diff(&f, &g, p, 16).map_err(err)?;
            let big = phi_embed_diff(&f, &g, p, 32).map_err(err)?;
            tail_bad += usize::from(big.value.powf(p) - small.value.powf(p) > small.tail_bound.powf(p) * (1.0 + 1e-9) + 1e-9);
        }
    }
    let amgm = amgm_check(&[1.5, 2.0], 40, 1 << 12, 64);
    check(
        upper_bad + lower_bad + tail_bad == 0 && amgm.violations == 0,
        format!(
            "upper {upper_bad}, scale-wise {lower_bad}, tail {tail_bad} failures; max ‖ΔΦ‖/(C_Φ d) = {worst_ratio:.3}; AM-GM {} points, min ratio {:.3}",
            amgm.evaluated, amgm.min_ratio
        ),
    )
}

fn wreath_region(seed: u64, size: usize) -> Vec<WreathElement> {
    let mut rng = trial_rng(seed, 0);
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

fn markov_battery() -> Outcome {
    let mut rng = rng_for("c12");
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let size = rng.gen_range(2..=40);
        let chain = random_reversible_chain(size, rng.gen_range(0.0..0.8), &mut rng).map_err(err)?;
        let dim = rng.gen_range(1..=4);
        let map = PointMap::Points((0..size).map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect());
        for t in 1..=20 {
            let r = markov_type_ratio(&chain, &map, t, 2.0).map_err(err)?;
            bad += usize::from(!r.holds(1.0));
            if r.rhs > 0.0 {
                worst = worst.max(r.lhs / r.rhs);
            }
        }
    }
    let steps: Vec<(WreathElement, f64)> = GeneratorTriple::canonical8().into_iter().map(|g| (g.to_element(), 0.125)).collect();
    let mut reflected_bad = 0;
    for i in 0..10 {
        let region = wreath_region(derive_seed(SEED, &format!("c12-region-{i}")), 80);
        let chain = build_reflected_wreath_chain(&region, &steps).map_err(err)?;
        let n = chain.size();
        let uniform = chain.pi().iter().all(|&w| (w - 1.0 / n as f64).abs() < 1e-15);
        let symmetric = (0..n).all(|a| (0..n).all(|b| (chain.entry(a, b) - chain.entry(b, a)).abs() < 1e-12));
        reflected_bad += usize::from(!(uniform && symmetric));
    }
    check(
        bad == 0 && reflected_bad == 0,
        format!("{bad} of 2000 (chain, t) pairs fail, max lhs/rhs = {worst:.4}; {reflected_bad} of 10 reflected chains fail"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("stable step law table", stable_step_law),
        ("return probability slope", return_probability_slope),
        ("stable displacement slope", stable_displacement_slope),
        ("range and return inequalities", walk_lemmas),
        ("canonical Z≀Z drift", canonical_drift),
        ("stable Z≀Z drift", stable_wreath_drift),
        ("zero-section walk", zero_section),
        ("tubular chain", tubular),
        ("TSP suite", tsp_suite),
        ("multiscale embedding", jones_embedding),
        ("zero-section embedding", phi_embedding),
        ("Markov type battery", markov_battery),
    ];
    let mut failures = 0;
    let total = Instant::now();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 12 passed in {:.1}s", 12 - failures, total.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
