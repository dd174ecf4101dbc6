use proptest::prelude::*;
use smapy::{Hypercube, Hypercube64, PushOutcome};

/// Intersection volume computed from scratch, per axis.
fn overlap_oracle(a: &Hypercube64, b: &Hypercube64) -> f64 {
    (0..a.dim())
        .map(|j| {
            let lo = if a.lower()[j] > b.lower()[j] { a.lower()[j] } else { b.lower()[j] };
            let hi = if a.upper()[j] < b.upper()[j] { a.upper()[j] } else { b.upper()[j] };
            if hi > lo {
                hi - lo
            } else {
                0.0
            }
        })
        .product()
}

fn inside(outer: &Hypercube64, inner: &Hypercube64) -> bool {
    (0..outer.dim()).all(|j| outer.lower()[j] <= inner.lower()[j] && inner.upper()[j] <= outer.upper()[j])
}

/// Every box obtained by moving one bound of `pushee` onto a face of
/// `pusher`, kept when it is valid and disjoint from `pusher`. Listed by
/// dimension, lower bound first. The cheapest one wins, first on ties.
fn push_oracle(pusher: &Hypercube64, pushee: &Hypercube64) -> Option<Hypercube64> {
    let mut best: Option<(Hypercube64, f64)> = None;
    let vol = pushee.volume();
    for j in 0..pushee.dim() {
        for moving_lower in [true, false] {
            for face in [pusher.lower()[j], pusher.upper()[j]] {
                let (mut lo, mut up) = (pushee.lower().to_vec(), pushee.upper().to_vec());
                if moving_lower {
                    lo[j] = face;
                } else {
                    up[j] = face;
                }
                let Ok(cand) = Hypercube::new(lo, up) else { continue };
                if !inside(pushee, &cand) || overlap_oracle(pusher, &cand) > 0.0 {
                    continue;
                }
                let removed = vol - cand.volume();
                if best.as_ref().is_none_or(|(_, r)| removed < *r - 1e-12 * vol.max(1.0)) {
                    best = Some((cand, removed));
                }
            }
        }
    }
    best.map(|(h, _)| h)
}

fn boxes(dim: usize) -> impl Strategy<Value = Hypercube64> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..3.0), dim)
        .prop_map(|axes| {
            Hypercube::new(axes.iter().map(|a| a.0).collect(), axes.iter().map(|a| a.0 + a.1).collect()).unwrap()
        })
}

fn box_pair() -> impl Strategy<Value = (Hypercube64, Hypercube64)> {
    (1usize..4).prop_flat_map(|d| (boxes(d), boxes(d)))
}

fn box_and_point() -> impl Strategy<Value = (Hypercube64, Vec<f64>)> {
    (1usize..4).prop_flat_map(|d| (boxes(d), prop::collection::vec(-5.0f64..5.0, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn expansion_and_retraction_scale_volume(h in (1usize..5).prop_flat_map(boxes), alpha in 0.0f64..0.9) {
        let v = h.volume();
        let e = h.expand(alpha).unwrap();
        let r = h.retract(alpha).unwrap();
        prop_assert!(((e.volume() - (1.0 + alpha) * v) / v).abs() < 1e-9);
        prop_assert!(((r.volume() - (1.0 - alpha) * v) / v).abs() < 1e-9);
        for j in 0..h.dim() {
            prop_assert!((e.center()[j] - h.center()[j]).abs() < 1e-12);
        }
        prop_assert!(inside(&e, &h));
        prop_assert!(inside(&h, &r));
    }

    #[test]
    fn overlap_index_properties((a, b) in box_pair()) {
        let o = a.overlap_index(&b).unwrap();
        prop_assert_eq!(o, b.overlap_index(&a).unwrap());
        prop_assert!((0.0..=1.0).contains(&o));
        let inter = a.intersection_volume(&b).unwrap();
        prop_assert!((inter - overlap_oracle(&a, &b)).abs() <= 1e-12 * inter.max(1.0));
        prop_assert_eq!(o == 0.0, inter == 0.0);
        if inside(&a, &b) || inside(&b, &a) {
            prop_assert!((o - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nested_boxes_have_unit_overlap(outer in (1usize..4).prop_flat_map(boxes), shrink in 0.0f64..0.9) {
        let inner = outer.retract(shrink).unwrap();
        prop_assert!((outer.overlap_index(&inner).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn push_separates_and_matches_cut_enumeration((pusher, pushee) in box_pair()) {
        let outcome = pusher.push(&pushee).unwrap();
        match (overlap_oracle(&pusher, &pushee) > 0.0, push_oracle(&pusher, &pushee), outcome) {
            (false, _, PushOutcome::NoOverlap) => {}
            (true, None, PushOutcome::Annihilate) => prop_assert!(inside(&pusher, &pushee)),
            (true, Some(expected), PushOutcome::Retracted(got)) => {
                prop_assert_eq!(pusher.intersection_volume(&got).unwrap(), 0.0);
                prop_assert!(inside(&pushee, &got));
                prop_assert_eq!(got, expected);
            }
            (overlap, oracle, got) => prop_assert!(false, "overlap {} oracle {:?} got {:?}", overlap, oracle, got),
        }
    }

    #[test]
    fn exclusion_drops_the_point((h, raw) in box_and_point(), eps_exp in 3i32..9) {
        // pull the point inside the box
        let x: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(j, &v)| h.lower()[j] + (v + 5.0) / 10.0 * h.width(j))
            .collect();
        let eps = 10f64.powi(-eps_exp);
        let r = h.exclude_point(&x, eps).unwrap().expect("point is inside");
        prop_assert!(!r.contains(&x).unwrap());
        prop_assert!(inside(&h, &r));
        // exactly one bound moved
        let moved = (0..h.dim())
            .map(|j| usize::from(r.lower()[j] != h.lower()[j]) + usize::from(r.upper()[j] != h.upper()[j]))
            .sum::<usize>();
        prop_assert_eq!(moved, 1);
        // no other single cut just past the point keeps more volume
        for j in 0..h.dim() {
            let e = eps * h.width(j);
            for kept in [h.upper()[j] - (x[j] + e), (x[j] - e) - h.lower()[j]] {
                if kept > 0.0 {
                    prop_assert!(r.volume() >= h.volume() / h.width(j) * kept * (1.0 - 1e-9));
                }
            }
        }
    }

    #[test]
    fn enclosing_is_commutative_idempotent_and_covering((a, b) in box_pair()) {
        let e = a.enclosing(&b).unwrap();
        prop_assert_eq!(&e, &b.enclosing(&a).unwrap());
        prop_assert_eq!(&a.enclosing(&a).unwrap(), &a);
        prop_assert!(inside(&e, &a) && inside(&e, &b));
        prop_assert_eq!(&e.enclosing(&a).unwrap(), &e);
    }

    #[test]
    fn distance_matches_projection((h, x) in box_and_point()) {
        // clamp onto the box and measure
        let projected: Vec<f64> = x.iter().enumerate().map(|(j, &v)| v.clamp(h.lower()[j], h.upper()[j])).collect();
        let oracle = x.iter().zip(&projected).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let d = h.distance_to_point(&x).unwrap();
        prop_assert!((d - oracle).abs() < 1e-9);
        prop_assert_eq!(d == 0.0, h.contains(&x).unwrap());
    }
}

#[test]
fn dimension_mismatches_are_input_errors() {
    let a = Hypercube::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let b = Hypercube::new(vec![0.0], vec![1.0]).unwrap();
    assert!(a.intersection_volume(&b).is_err());
    assert!(a.overlap_index(&b).is_err());
    assert!(a.enclosing(&b).is_err());
    assert!(a.push(&b).is_err());
    assert!(a.distance_to_point(&[0.0]).is_err());
    assert!(a.exclude_point(&[0.0], 1e-6).is_err());
}
