//! Acceptance gate: one test per acceptance criterion, each printing a
//! single summarizing line. Criteria share a mutex so the reported wall
//! times are not distorted by parallel siblings; run with
//! `cargo test --test acceptance -- --nocapture` to see the lines live.

use std::collections::BTreeSet;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use mgs_core::construct::{construct, construct_closed};
use mgs_core::quiver::{
    apply_green_sequence, apply_permutation, canonical_form, IceQuiver, Verdict, VertexState,
};
use mgs_core::search::{
    build_catalog, default_max_len, enumerate_class, search_mgs, seed, SearchOutcome,
};
use mgs_core::surface::{parse_triangulation, Triangulation};

static GATE: Mutex<()> = Mutex::new(());

fn fixture(name: &str) -> Triangulation {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_triangulation(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn report(criterion: u32, elapsed: Duration, budget: Duration, detail: &str) {
    println!(
        "criterion {criterion}: PASS ({detail}, {:.2?} of {:.0?} budget)",
        elapsed, budget
    );
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its {budget:?} budget: {elapsed:?}"
    );
}

#[test]
fn criterion_1_four_punctured_torus_quiver() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    let q = fixture("torus4.json").quiver().unwrap();
    let expected: BTreeSet<(u32, u32, i64)> = [
        (4, 1), (1, 5), (8, 1), (1, 9), (3, 2), (2, 4), (6, 2), (2, 7),
        (4, 3), (9, 3), (3, 10), (5, 4), (5, 6), (11, 5), (7, 6), (6, 11),
        (7, 8), (12, 7), (9, 8), (8, 12), (10, 9), (10, 11), (12, 10), (11, 12),
    ]
    .into_iter()
    .map(|(a, b)| (a, b, 1))
    .collect();
    assert_eq!(q.n_mutable(), 12);
    assert_eq!(q.arrows().collect::<BTreeSet<_>>(), expected);
    report(1, t0.elapsed(), Duration::from_secs(1), "24 arrows exact");
}

#[test]
fn criterion_2_staged_pipeline_on_worked_example() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    let tr = construct_closed(&fixture("genus2_10.json")).unwrap();
    assert_eq!(tr.verdict, Verdict::ValidMaximalGreen);
    assert_eq!(tr.full.len(), 100);
    let pin = |name: &str| tr.stage(name).unwrap().to_vec();
    assert_eq!(
        pin("cycle:P1"),
        vec![3, 6, 7, 9, 12, 14, 22, 8, 14, 12, 9, 7, 6, 3]
    );
    assert_eq!(pin("cycle:P3"), vec![16, 20, 21, 16]);
    assert_eq!(pin("ind:M1"), vec![32, 33, 36]);
    // The published stage list prints (24, 33, 35) here, but its own
    // surrounding derivation gives 34, and splicing 24 into the full run
    // is invalid at step 83; we pin the derived value.
    assert_eq!(pin("ind*:M1"), vec![34, 33, 35]);
    assert_eq!(pin("ind*:X"), vec![1, 24, 23, 13, 2]);
    report(
        2,
        t0.elapsed(),
        Duration::from_secs(5),
        "stage pins + 100-step ValidMaximalGreen",
    );
}

#[test]
fn criterion_3_oriented_cycle_sequences() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    for n in 3..=8u32 {
        // Oriented n-cycle with edges i -> i-1 and 1 -> n; the sequence
        // (n, ..., 1, 3, 4, ..., n) is maximal green and swaps labels 1, 2.
        let mut arrows: Vec<(u32, u32, i64)> = (2..=n).map(|i| (i, i - 1, 1)).collect();
        arrows.push((1, n, 1));
        let q = IceQuiver::new(n, 0, arrows).unwrap();
        let seq: Vec<u32> = (1..=n).rev().chain(3..=n).collect();
        let res = apply_green_sequence(&q.framed().unwrap(), &seq).unwrap();
        assert_eq!(res.verdict, Verdict::ValidMaximalGreen, "n = {n}");
        let mutable = {
            let arrows: Vec<(u32, u32, i64)> = res
                .final_quiver
                .arrows()
                .filter(|&(s, d, _)| s <= n && d <= n)
                .collect();
            IceQuiver::new(n, 0, arrows).unwrap()
        };
        let mut perm: Vec<u32> = (1..=n).collect();
        perm.swap(0, 1);
        assert_eq!(mutable, apply_permutation(&q, &perm), "n = {n}");
    }
    report(
        3,
        t0.elapsed(),
        Duration::from_secs(1),
        "n = 3..8 MGS + swap of labels 1, 2",
    );
}

fn suite_paths() -> Vec<std::path::PathBuf> {
    let dir = format!("{}/fixtures/suite", env!("CARGO_MANIFEST_DIR"));
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
}

#[test]
fn criterion_4_flip_mutation_commutation() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_4444);
    let bases = [
        "suite/sphere4_base.json",
        "suite/sphere5_base.json",
        "suite/torus2_base.json",
        "torus4.json",
        "suite/genus2_2_base.json",
        "genus2_10.json",
    ];
    let mut checked = 0usize;
    for name in bases {
        let start = fixture(name);
        for _ in 0..10 {
            let mut t = start.clone();
            let mut q = t.quiver().unwrap();
            for _ in 0..20 {
                let arcs: Vec<u32> = t.arc_ids().into_iter().collect();
                let a = arcs[rng.gen_range(0..arcs.len())];
                let t2 = t.flip(a).unwrap();
                let q2 = t2.quiver().unwrap();
                assert_eq!(q2, q.mutate(a).unwrap(), "{name}: flip {a}");
                t = t2;
                q = q2;
                checked += 1;
            }
        }
    }
    assert!(checked >= 1000);
    report(
        4,
        t0.elapsed(),
        Duration::from_secs(30),
        &format!("{checked} flip/mutation pairs"),
    );
}

#[test]
fn criterion_5_closed_construction_suite() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    let paths = suite_paths();
    assert!(paths.len() >= 20, "only {} fixtures", paths.len());
    for path in &paths {
        let t = parse_triangulation(&std::fs::read_to_string(path).unwrap()).unwrap();
        let tr = construct_closed(&t).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(tr.verdict, Verdict::ValidMaximalGreen, "{}", path.display());
    }
    report(
        5,
        t0.elapsed(),
        Duration::from_secs(60),
        &format!("{} closed triangulations", paths.len()),
    );
}

#[test]
fn criterion_6_bounded_surfaces() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    for name in ["torus_cut.json", "disk5.json"] {
        let t = fixture(name);
        let tr = construct(&t).unwrap();
        assert_eq!(tr.verdict, Verdict::ValidMaximalGreen, "{name}");
        let res = apply_green_sequence(&t.quiver().unwrap().framed().unwrap(), &tr.full).unwrap();
        assert_eq!(res.verdict, Verdict::ValidMaximalGreen, "{name}");
    }
    report(
        6,
        t0.elapsed(),
        Duration::from_secs(5),
        "one-holed torus + 5-marked disk",
    );
}

#[test]
fn criterion_7_exceptional_catalog() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    let sizes = [
        ("x7", 2usize),
        ("x6", 5),
        ("e6_11", 49),
        ("e6", 67),
        ("te6", 132),
        ("e7", 416),
        ("e7_11", 506),
        ("te7", 1080),
        ("e8", 1574),
        ("e8_11", 5739),
        ("te8", 7560),
    ];
    let mut small_elapsed = Duration::ZERO;
    let mut big_elapsed = Duration::ZERO;
    for (name, expect) in sizes {
        let t1 = Instant::now();
        if name == "x7" {
            let members = enumerate_class(&seed(name).unwrap(), 10).unwrap();
            assert_eq!(members.len(), expect);
            for m in &members {
                match search_mgs(m, 20).unwrap() {
                    SearchOutcome::NotFoundWithin { max_len: 20, .. } => {}
                    other => panic!("x7: {other:?}"),
                }
            }
        } else {
            let n = seed(name).unwrap().n_mutable();
            let cat = build_catalog(name, default_max_len(n), 100_000).unwrap();
            assert_eq!(cat.class_size(), expect, "{name}");
            assert_eq!(cat.certified(), expect, "{name}");
        }
        if matches!(name, "te8" | "e8_11") {
            big_elapsed += t1.elapsed();
        } else {
            small_elapsed += t1.elapsed();
        }
    }
    assert!(
        big_elapsed <= Duration::from_secs(1800),
        "large classes took {big_elapsed:?}"
    );
    report(
        7,
        t0.elapsed(),
        Duration::from_secs(2100),
        "11 classes, sizes + certificates + bounded X7 failure",
    );
}

#[test]
fn criterion_8_property_suites() {
    let _g = GATE.lock().unwrap();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_8888);
    let mut cases = 0usize;

    fn random_quiver(rng: &mut ChaCha8Rng, n: u32, max_mult: i64) -> IceQuiver {
        let mut arrows = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                match rng.gen_range(0..3) {
                    0 => {}
                    1 => arrows.push((i, j, rng.gen_range(1..=max_mult))),
                    _ => arrows.push((j, i, rng.gen_range(1..=max_mult))),
                }
            }
        }
        IceQuiver::new(n, 0, arrows).unwrap()
    }

    // Mutation involution and loop/2-cycle closure.
    for _ in 0..2500 {
        let n = rng.gen_range(2..=8);
        let q = random_quiver(&mut rng, n, 2);
        let v = rng.gen_range(1..=q.n_mutable());
        let m = q.mutate(v).unwrap();
        assert_eq!(m.mutate(v).unwrap(), q);
        for (s, d, mult) in m.arrows() {
            assert_ne!(s, d, "loop after mutation");
            assert!(mult > 0);
            assert_eq!(m.signed(d, s), -mult as i64, "2-cycle after mutation");
        }
        cases += 1;
    }

    // Sign coherence along random green walks of the framed quiver.
    for _ in 0..600 {
        let n = rng.gen_range(2..=6);
        let q = random_quiver(&mut rng, n, 2);
        let mut cur = q.framed().unwrap();
        for _ in 0..8 {
            let greens: Vec<u32> = (1..=cur.n_mutable())
                .filter(|&v| cur.vertex_state(v).unwrap() == VertexState::Green)
                .collect();
            let Some(&v) = greens.choose(&mut rng) else {
                break;
            };
            cur = cur.mutate(v).unwrap();
            for u in 1..=cur.n_mutable() {
                cur.vertex_state(u).unwrap(); // errors on mixed-sign rows
            }
            cases += 1;
        }
    }

    // Canonical form agrees with brute-force relabeling on small ranks.
    fn perms(n: u32) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for v in 1..=n {
            let mut next = Vec::new();
            for p in out {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, v);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }
    for _ in 0..400 {
        let n = rng.gen_range(2..=5);
        let q = random_quiver(&mut rng, n, 2);
        let brute = perms(n)
            .into_iter()
            .map(|p| apply_permutation(&q, &p))
            .min_by_key(|c| format!("{c:?}"))
            .unwrap();
        let shuffled = {
            let mut p: Vec<u32> = (1..=n).collect();
            p.shuffle(&mut rng);
            apply_permutation(&q, &p)
        };
        assert_eq!(canonical_form(&q).0, canonical_form(&shuffled).0);
        let _ = brute; // distinct quivers keep distinct canonical forms:
        for _ in 0..1 {
            let other = random_quiver(&mut rng, n, 2);
            let iso = perms(n)
                .into_iter()
                .any(|p| apply_permutation(&q, &p) == other);
            assert_eq!(
                canonical_form(&q).0 == canonical_form(&other).0,
                iso,
                "canonical form disagrees with brute-force isomorphism"
            );
        }
        cases += 2;
    }

    // Permanently red flags stay red in every green continuation,
    // exhaustively over all green-reachable states of framed A2 and A3.
    for chain in 2..=3u32 {
        let arrows: Vec<(u32, u32, i64)> = (1..chain).map(|i| (i, i + 1, 1)).collect();
        let q = IceQuiver::new(chain, 0, arrows).unwrap().framed().unwrap();
        let mut seen = BTreeSet::new();
        let mut stack = vec![q];
        while let Some(cur) = stack.pop() {
            if !seen.insert(format!("{cur:?}")) {
                continue;
            }
            let flagged = cur.permanently_red_vertices();
            for &v in &flagged {
                assert_eq!(cur.vertex_state(v).unwrap(), VertexState::Red);
            }
            for v in 1..=cur.n_mutable() {
                if cur.vertex_state(v).unwrap() != VertexState::Green {
                    continue;
                }
                let nb = cur.mutate(v).unwrap();
                for &f in &flagged {
                    assert_eq!(
                        nb.vertex_state(f).unwrap(),
                        VertexState::Red,
                        "flagged vertex {f} turned green"
                    );
                }
                cases += 1;
                stack.push(nb);
            }
        }
    }

    // Flip involution on random walks over the fixture suite.
    let mut outer = 0usize;
    'walks: loop {
        for path in suite_paths() {
            let mut t = parse_triangulation(&std::fs::read_to_string(&path).unwrap()).unwrap();
            for _ in 0..40 {
                let arcs: Vec<u32> = t.arc_ids().into_iter().collect();
                let a = arcs[rng.gen_range(0..arcs.len())];
                let t2 = t.flip(a).unwrap();
                assert_eq!(
                    t2.flip(a).unwrap().canonical_complex(),
                    t.canonical_complex()
                );
                t = t2;
                cases += 1;
            }
            outer += 1;
            if cases >= 10_000 && outer >= 25 {
                break 'walks;
            }
        }
    }

    assert!(cases >= 10_000, "only {cases} cases");
    report(
        8,
        t0.elapsed(),
        Duration::from_secs(120),
        &format!("{cases} randomized/exhaustive cases"),
    );
}
