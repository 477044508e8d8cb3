use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use wreathlab::exec::trial_rng;
use wreathlab::markov::{
    build_reflected_wreath_chain, markov_type_ratio, markov_type_ratio_sampled, random_reversible_chain, FiniteChain,
    PointMap,
};
use wreathlab::walks::GeneratorTriple;
use wreathlab::{LampGroup, LatticePoint, WreathElement};

fn points(rng: &mut impl rand::Rng, n: usize, dim: usize) -> PointMap {
    PointMap::Points((0..n).map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect())
}

fn canonical_steps() -> Vec<(WreathElement, f64)> {
    GeneratorTriple::canonical8().into_iter().map(|g| (g.to_element(), 0.125)).collect()
}

/// A connected region of `Z ≀ Z` grown by breadth-first search from the
/// identity, keeping each new neighbour with probability `keep`.
fn random_region(seed: u64, size: usize, keep: f64) -> Vec<WreathElement> {
    let mut rng = trial_rng(seed, 0);
    let steps = canonical_steps();
    let start = WreathElement::identity(LampGroup::Z, 1);
    let mut seen = BTreeSet::new();
    seen.insert(format!("{start:?}"));
    let mut region = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for (g, _) in &steps {
            if region.len() >= size {
                return region;
            }
            let y = x.multiply(g).unwrap();
            if rand::Rng::gen::<f64>(&mut rng) < keep && seen.insert(format!("{y:?}")) {
                region.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    region
}

/// Points in `R^m` for a region: the lamp configuration on `[-r, r]` and the
/// cursor, one coordinate each.
fn lamp_coordinates(region: &[WreathElement], r: i64) -> PointMap {
    PointMap::Points(
        region
            .iter()
            .map(|x| {
                let mut v: Vec<f64> = (-r..=r).map(|j| x.lamp(&LatticePoint::scalar(j)) as f64).collect();
                v.push(x.cursor().0[0] as f64);
                v
            })
            .collect(),
    )
}

#[test]
fn reflected_chains_are_symmetric() {
    for seed in 0..6 {
        let region = random_region(seed, 60, 0.6);
        let chain = build_reflected_wreath_chain(&region, &canonical_steps()).unwrap();
        let n = chain.size();
        for i in 0..n {
            for j in 0..n {
                assert!((chain.entry(i, j) - chain.entry(j, i)).abs() < 1e-12);
            }
            assert!((chain.pi()[i] - 1.0 / n as f64).abs() < 1e-15);
        }
        let map = lamp_coordinates(&region, 12);
        for t in [1, 2, 5, 10] {
            let r = markov_type_ratio(&chain, &map, t, 2.0).unwrap();
            assert!(r.holds(1.0), "seed {seed} t {t}: {r:?}");
        }
    }
}

#[test]
fn reflected_chain_moves_only_inside_region() {
    let region = random_region(9, 40, 0.7);
    let chain = build_reflected_wreath_chain(&region, &canonical_steps()).unwrap();
    for (i, x) in region.iter().enumerate() {
        // Linear scan instead of the builder's hash index.
        let mut mass = 0.0;
        for g in GeneratorTriple::canonical8() {
            let y = x.multiply(&g.to_element()).unwrap();
            if region.iter().position(|z| *z == y).is_some_and(|j| j != i) {
                mass += 0.125;
            }
        }
        let off: f64 = chain.row(i).iter().filter(|&&(j, _)| j != i).map(|&(_, a)| a).sum();
        assert!((off - mass).abs() < 1e-12);
    }
}

#[test]
fn asymmetric_steps_are_rejected() {
    let region = random_region(1, 10, 1.0);
    let g = GeneratorTriple { n1: 1, n2: 0, n3: 1 }.to_element();
    assert!(build_reflected_wreath_chain(&region, &[(g, 1.0)]).is_err());
}

#[test]
fn sampled_estimate_tracks_exact() {
    let mut rng = trial_rng(3, 0);
    let chain = random_reversible_chain(30, 0.5, &mut rng).unwrap();
    let map = points(&mut rng, 30, 3);
    let exact = markov_type_ratio(&chain, &map, 4, 2.0).unwrap();
    let sampled = markov_type_ratio_sampled(&chain, &map, 4, 2.0, 200_000, &mut rng).unwrap();
    assert!((sampled.rhs - exact.rhs).abs() < 1e-9 * exact.rhs);
    assert!((sampled.lhs - exact.lhs).abs() < 0.05 * exact.lhs);
}

#[test]
fn dimension_mismatch_is_rejected() {
    let chain = FiniteChain::new(vec![vec![(0, 1.0)]], vec![1.0]).unwrap();
    let map = PointMap::Points(vec![vec![0.0], vec![1.0]]);
    assert!(markov_type_ratio(&chain, &map, 1, 2.0).is_err());
    let bad = PointMap::Matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]]);
    assert!(bad.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_space_has_markov_type_two(seed in any::<u64>(), size in 2usize..24, dim in 1usize..5, t in 1u32..12, sparsity in 0.0f64..0.8) {
        let mut rng = trial_rng(seed, 0);
        let chain = random_reversible_chain(size, sparsity, &mut rng).unwrap();
        let map = points(&mut rng, size, dim);
        let r = markov_type_ratio(&chain, &map, t, 2.0).unwrap();
        prop_assert!(r.holds(1.0), "{:?}", r);
        prop_assert!(r.lhs >= 0.0 && r.rhs >= 0.0);
    }

    #[test]
    fn one_step_is_equality(seed in any::<u64>(), size in 2usize..16) {
        let mut rng = trial_rng(seed, 1);
        let chain = random_reversible_chain(size, 0.3, &mut rng).unwrap();
        let map = points(&mut rng, size, 2);
        let r = markov_type_ratio(&chain, &map, 1, 2.0).unwrap();
        prop_assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs.max(1.0));
    }
}
