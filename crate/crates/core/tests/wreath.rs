use proptest::prelude::*;
use wreathlab::tsp::{held_karp, Norm};
use wreathlab::wreath::line_tsp;
use wreathlab::{word_distance, LampGroup, LatticePoint, WreathElement};

fn z1(lamps: &[(i64, i64)], cursor: i64, group: LampGroup) -> WreathElement {
    WreathElement::new(
        group,
        lamps.iter().map(|&(z, v)| (LatticePoint::scalar(z), v)),
        LatticePoint::scalar(cursor),
    )
    .unwrap()
}

fn element(group: LampGroup, d: usize, span: i64, max_lamps: usize) -> impl Strategy<Value = WreathElement> {
    let point = proptest::collection::vec(-span..=span, d);
    (
        proptest::collection::vec((point.clone(), -3i64..=3), 0..=max_lamps),
        point,
    )
        .prop_map(move |(lamps, cursor)| {
            WreathElement::new(
                group,
                lamps.into_iter().map(|(z, v)| (LatticePoint::new(z), v)),
                LatticePoint::new(cursor),
            )
            .unwrap()
        })
}

fn exact(a: &WreathElement, b: &WreathElement) -> u64 {
    word_distance(a, b, 16).unwrap().value().expect("exact for small supports")
}

#[test]
fn distance_examples() {
    let e = WreathElement::identity(LampGroup::Z, 1);
    assert_eq!(exact(&z1(&[(0, 5)], 0, LampGroup::Z), &e), 5);
    let c = WreathElement::identity(LampGroup::C2, 1);
    assert_eq!(exact(&z1(&[(0, 1), (3, 1)], 2, LampGroup::C2), &c), 6);
    assert_eq!(exact(&e, &e), 0);
}

#[test]
fn inverse_examples() {
    let a = z1(&[(0, 5)], 2, LampGroup::Z);
    assert_eq!(a.inverse(), z1(&[(-2, -5)], -2, LampGroup::Z));
    let b = z1(&[(0, 1)], 0, LampGroup::C2);
    assert_eq!(b.inverse(), b);
    assert!(WreathElement::identity(LampGroup::Z, 2).inverse().is_identity());
}

#[test]
fn line_tsp_examples() {
    assert_eq!(line_tsp(&[3, -2], 0, 0), 10);
    assert_eq!(line_tsp(&[3], 0, 0), 6);
    assert_eq!(line_tsp(&[], 2, 7), 5);
}

#[test]
fn mismatched_operands_are_rejected() {
    let a = WreathElement::identity(LampGroup::Z, 1);
    let b = WreathElement::identity(LampGroup::C2, 1);
    let c = WreathElement::identity(LampGroup::Z, 2);
    assert!(a.multiply(&b).is_err());
    assert!(a.multiply(&c).is_err());
    assert!(word_distance(&a, &c, 16).is_err());
}

proptest! {
    #[test]
    fn inverse_cancels(a in element(LampGroup::Z, 2, 6, 6), g in element(LampGroup::C2, 1, 9, 6)) {
        prop_assert!(a.multiply(&a.inverse()).unwrap().is_identity());
        prop_assert!(a.inverse().multiply(&a).unwrap().is_identity());
        prop_assert!(g.multiply(&g.inverse()).unwrap().is_identity());
    }

    #[test]
    fn product_is_associative(a in element(LampGroup::Z, 2, 4, 4), b in element(LampGroup::Z, 2, 4, 4), c in element(LampGroup::Z, 2, 4, 4)) {
        let l = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let r = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn left_invariance(a in element(LampGroup::C2, 2, 5, 5), b in element(LampGroup::C2, 2, 5, 5), c in element(LampGroup::C2, 2, 5, 5)) {
        let ca = c.multiply(&a).unwrap();
        let cb = c.multiply(&b).unwrap();
        prop_assert_eq!(exact(&a, &b), exact(&ca, &cb));
    }

    #[test]
    fn left_invariance_on_line(a in element(LampGroup::Z, 1, 30, 10), b in element(LampGroup::Z, 1, 30, 10), c in element(LampGroup::Z, 1, 30, 10)) {
        let ca = c.multiply(&a).unwrap();
        let cb = c.multiply(&b).unwrap();
        prop_assert_eq!(exact(&a, &b), exact(&ca, &cb));
    }

    #[test]
    fn triangle_inequality(a in element(LampGroup::Z, 2, 4, 4), b in element(LampGroup::Z, 2, 4, 4), c in element(LampGroup::Z, 2, 4, 4)) {
        prop_assert!(exact(&a, &c) <= exact(&a, &b) + exact(&b, &c));
        prop_assert_eq!(exact(&a, &b), exact(&b, &a));
    }

    #[test]
    fn line_formula_matches_held_karp(
        pts in proptest::collection::vec(-50i64..=50, 0..=10),
        x in -50i64..=50,
        y in -50i64..=50,
    ) {
        let lattice: Vec<LatticePoint> = pts.iter().map(|&v| LatticePoint::scalar(v)).collect();
        let hk = held_karp(&lattice, &LatticePoint::scalar(x), &LatticePoint::scalar(y), Norm::L1).unwrap();
        prop_assert_eq!(line_tsp(&pts, x, y), hk);
    }

    #[test]
    fn bounds_bracket_exact(a in element(LampGroup::C2, 2, 6, 10), b in element(LampGroup::C2, 2, 6, 10)) {
        let bounds = word_distance(&a, &b, 1).unwrap();
        let support = a.lamp_diff_support(&b);
        let truth = held_karp(&support, a.cursor(), b.cursor(), Norm::L1).unwrap() + support.len() as u64;
        prop_assert!(bounds.lower <= truth && truth <= bounds.upper);
        prop_assert!(!bounds.exact || bounds.lower == bounds.upper);
    }
}
