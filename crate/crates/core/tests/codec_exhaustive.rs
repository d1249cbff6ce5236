use toromaps::codec::{backbone, decode, encode, skeleton, successor_loop, BackboneKind, LabeledOneTree};
use toromaps::enumerate;
use toromaps::verify::codec_failures;

#[test]
fn round_trips_through_size_five() {
    for n in 2..=5 {
        let mut failures = 0;
        enumerate::for_each_labeled_one_face_map(n, 1, |t| failures += codec_failures(&t));
        assert_eq!(failures, 0, "n = {n}");
    }
}

#[test]
fn vertex_and_face_bookkeeping() {
    for t in enumerate::one_trees(4).unwrap() {
        let q = decode(&t).unwrap();
        assert_eq!(q.map.num_vertices(), t.map().num_vertices() + 1);
        assert_eq!(q.map.num_faces(), t.num_edges());
        assert_eq!(q.map.num_edges(), 2 * t.num_edges());
        assert_eq!(q.map.label(q.origin), Some(0));
    }
}

fn for_each_unrooted(nmax: usize, mut f: impl FnMut(&LabeledOneTree)) {
    for n in 2..=nmax {
        for (m, _) in enumerate::unrooted_one_face_maps(n, 1) {
            for labels in enumerate::well_labelings(&m) {
                f(&LabeledOneTree::new(m.clone().with_labels(labels).unwrap(), 0).unwrap());
            }
        }
    }
}

#[test]
fn shortest_loop_is_twice_the_skeleton_minimum() {
    for_each_unrooted(6, |t| {
        let q = decode(t).unwrap();
        let b = backbone(t).unwrap();
        let first = q.map.shortest_noncontractible_through(q.origin).unwrap();
        assert_eq!(first.length as i64, 2 * b.min_skeleton_label());
        assert_ne!(first.class, [0, 0]);
    });
}

#[test]
fn second_loop_is_twice_the_second_chain_minimum() {
    let mut generic = 0;
    for_each_unrooted(6, |t| {
        let b = backbone(t).unwrap();
        if b.kind != BackboneKind::Generic {
            return;
        }
        let q = decode(t).unwrap();
        let first = q.map.shortest_noncontractible_through(q.origin).unwrap();
        let second = q.map.second_shortest_noncontractible_through(q.origin, &first).unwrap();
        assert_eq!(second.length as i64, 2 * b.second_chain_minimum().unwrap());
        assert!(!toromaps::map::is_integer_multiple(second.class, first.class));
        generic += 1;
    });
    assert_eq!(generic, 3 + 16 + 255 + 3777);
}

#[test]
fn successor_loops_are_short_and_non_contractible() {
    for_each_unrooted(5, |t| {
        let sk = toromaps::codec::skeleton_of(t);
        let q = decode(t).unwrap();
        for v in (0..t.map().num_vertices()).filter(|&v| sk.in_skeleton[v]) {
            let lp = successor_loop(t, v).unwrap();
            assert_eq!(lp.length as i64, 2 * t.labels()[v]);
            assert_ne!(lp.class, [0, 0]);
            assert!(q.map.is_closed_walk(&lp.half_edges));
        }
    });
}

#[test]
fn skeleton_has_no_leaves() {
    for t in enumerate::one_trees(5).unwrap() {
        let s = skeleton(&t).unwrap();
        assert_eq!(s.genus(), 1);
        assert!((0..s.map().num_vertices()).all(|v| s.map().degree(v) >= 2));
    }
}

#[test]
fn encode_rejects_a_wrong_root() {
    let t = LabeledOneTree::figure_eight(1);
    let mut q = decode(&t).unwrap();
    q.root = q.map.alpha(q.root);
    assert!(encode(&q).is_err());
}
