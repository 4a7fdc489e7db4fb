//! Fixture and property tests for triangulations.
//!
//! The central oracle: flipping an arc and taking the signed adjacency
//! quiver must agree with taking the quiver first and mutating at the
//! corresponding vertex.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use mgs_core::surface::{parse_triangulation, serialize_triangulation, Triangulation};
use mgs_core::IceQuiver;

const TORUS4: &str = include_str!("../fixtures/torus4.json");
const TORUS_CUT: &str = include_str!("../fixtures/torus_cut.json");
const GENUS2_10: &str = include_str!("../fixtures/genus2_10.json");
const SPHERE4: &str = include_str!("../fixtures/suite/sphere4_base.json");
const SPHERE5: &str = include_str!("../fixtures/suite/sphere5_base.json");
const TORUS2: &str = include_str!("../fixtures/suite/torus2_base.json");
const GENUS2_2: &str = include_str!("../fixtures/suite/genus2_2_base.json");

fn quiver_from(n: u32, arrows: &[(u32, u32)]) -> IceQuiver {
    IceQuiver::new(n, 0, arrows.iter().map(|&(a, b)| (a, b, 1))).unwrap()
}

fn torus4_arrows() -> Vec<(u32, u32)> {
    vec![
        (4, 1), (1, 5), (8, 1), (1, 9), (3, 2), (2, 4), (6, 2), (2, 7),
        (4, 3), (9, 3), (3, 10), (5, 4), (5, 6), (11, 5), (7, 6), (6, 11),
        (7, 8), (12, 7), (9, 8), (8, 12), (10, 9), (10, 11), (12, 10), (11, 12),
    ]
}

fn genus2_arrows() -> Vec<(u32, u32)> {
    vec![
        (1, 2), (13, 1), (1, 23), (24, 1), (25, 1), (2, 13), (2, 15), (28, 2),
        (3, 4), (5, 3), (6, 3), (3, 9), (4, 5), (4, 7), (8, 4), (5, 6),
        (7, 5), (6, 7), (9, 6), (7, 8), (22, 8), (8, 23), (9, 10), (11, 9),
        (10, 12), (12, 11), (13, 12), (12, 14), (14, 13), (15, 14), (14, 16),
        (16, 15), (15, 28), (16, 17), (18, 16), (17, 18), (19, 17), (17, 21),
        (18, 19), (20, 18), (19, 20), (21, 19), (20, 26), (27, 20), (21, 22),
        (26, 21), (23, 22), (22, 26), (23, 24), (23, 25), (26, 27), (27, 28),
        (29, 27), (28, 29), (30, 29), (29, 31), (31, 30), (30, 32), (34, 30),
        (33, 31), (31, 35), (32, 33), (32, 34), (36, 32), (35, 33), (33, 36),
        (35, 34), (34, 36), (36, 35),
    ]
}

#[test]
fn torus4_fixture_has_expected_quiver() {
    let t = parse_triangulation(TORUS4).unwrap();
    assert!(t.validate().is_empty(), "{:?}", t.validate());
    assert_eq!(t.genus, 1);
    assert_eq!(t.n_punctures(), 4);
    assert_eq!(t.quiver().unwrap(), quiver_from(12, &torus4_arrows()));
}

#[test]
fn torus_cut_fixture_has_expected_quiver() {
    let t = parse_triangulation(TORUS_CUT).unwrap();
    assert!(t.validate().is_empty(), "{:?}", t.validate());
    assert_eq!(t.genus, 1);
    assert_eq!(t.boundary_marked, vec![3]);
    assert_eq!(t.n_punctures(), 1);
    // The bounded quiver is the full torus quiver restricted to arcs 1..9.
    let arrows: Vec<(u32, u32)> = torus4_arrows()
        .into_iter()
        .filter(|&(a, b)| a <= 9 && b <= 9)
        .collect();
    assert_eq!(t.quiver().unwrap(), quiver_from(9, &arrows));
}

#[test]
fn genus2_fixture_has_expected_quiver() {
    let t = parse_triangulation(GENUS2_10).unwrap();
    assert!(t.validate().is_empty(), "{:?}", t.validate());
    assert_eq!(t.genus, 2);
    assert_eq!(t.n_punctures(), 10);
    assert_eq!(t.radial_punctures().len(), 1);
    let radial = &t.radial_punctures()[0];
    assert_eq!(t.points[radial.puncture].name, "S1");
    assert_eq!(radial.inner, 24);
    assert_eq!(radial.companion, 25);
    assert_eq!(t.quiver().unwrap(), quiver_from(36, &genus2_arrows()));
}

#[test]
fn fixtures_roundtrip_through_serialization() {
    for text in [TORUS4, TORUS_CUT, GENUS2_10] {
        let t = parse_triangulation(text).unwrap();
        let s = serialize_triangulation(&t).unwrap();
        let t2 = parse_triangulation(&s).unwrap();
        assert_eq!(serialize_triangulation(&t2).unwrap(), s);
        assert_eq!(t2.canonical_complex(), t.canonical_complex());
    }
}

#[test]
fn genus2_independence_data_matches_known_escape_distances() {
    let t = parse_triangulation(GENUS2_10).unwrap();
    let p_set: BTreeSet<_> = ["P1", "P2", "P3", "P4", "P5"]
        .iter()
        .map(|n| t.point_named(n).unwrap())
        .collect();
    let data = t.independence_data(&p_set).unwrap();
    let expect: BTreeSet<u32> = [3, 4, 5, 10, 16, 17, 18, 19, 20, 21, 29]
        .into_iter()
        .collect();
    assert_eq!(data.e, expect);
    for a in [3, 4, 5, 10, 16, 20, 21, 29] {
        assert_eq!(data.sigma[&a], 0, "arc {a}");
    }
    for a in [17, 18, 19] {
        assert_eq!(data.sigma[&a], 1, "arc {a}");
    }
    assert_eq!(data.order, vec![3, 4, 5, 10, 16, 20, 21, 29, 17, 18, 19]);
}

fn random_arc(t: &Triangulation, rng: &mut ChaCha8Rng) -> u32 {
    let arcs: Vec<u32> = t.arc_ids().into_iter().collect();
    arcs[rng.gen_range(0..arcs.len())]
}

#[test]
fn flips_commute_with_mutation_on_random_walks() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f11b);
    let mut checked = 0usize;
    for text in [TORUS4, TORUS_CUT, GENUS2_10, SPHERE4, SPHERE5, TORUS2, GENUS2_2] {
        let start = parse_triangulation(text).unwrap();
        for _ in 0..20 {
            let mut t = start.clone();
            let mut q = t.quiver().unwrap();
            for _ in 0..20 {
                let a = random_arc(&t, &mut rng);
                let t2 = t.flip(a).unwrap();
                let q2 = t2.quiver().unwrap();
                assert_eq!(q2, q.mutate(a).unwrap(), "flip at {a} disagrees");
                assert!(t2.validate().is_empty(), "{:?}", t2.validate());
                t = t2;
                q = q2;
                checked += 1;
            }
        }
    }
    assert!(checked >= 1000, "only {checked} cases checked");
}

#[test]
fn flips_are_involutions_on_random_walks() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf1f1_f1f1);
    for text in [TORUS4, TORUS_CUT, GENUS2_10, SPHERE4, SPHERE5, TORUS2, GENUS2_2] {
        let mut t = parse_triangulation(text).unwrap();
        for _ in 0..120 {
            let a = random_arc(&t, &mut rng);
            let t2 = t.flip(a).unwrap();
            assert_eq!(
                t2.flip(a).unwrap().canonical_complex(),
                t.canonical_complex(),
                "double flip at {a} is not the identity"
            );
            t = t2;
        }
    }
}

#[test]
fn closing_the_cut_torus_restores_the_induced_quiver() {
    let t = parse_triangulation(TORUS_CUT).unwrap();
    let closed = t.close_surface().unwrap();
    assert!(closed.validate().is_empty(), "{:?}", closed.validate());
    assert_eq!(closed.boundary_marked.len(), 0);
    assert_eq!(closed.genus, 1);
    assert_eq!(closed.n_punctures(), 4);
    let q = closed.quiver().unwrap();
    let keep: Vec<u32> = (1..=9).collect();
    assert_eq!(q.induced_subquiver(&keep).unwrap(), t.quiver().unwrap());
}
