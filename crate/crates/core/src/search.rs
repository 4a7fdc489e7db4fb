//! Mutation-class enumeration, bounded maximal-green-sequence search, and
//! the catalog over the exceptional finite-mutation-type seeds.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quiver::{
    apply_green_sequence, canonical_form, parse_quiver, serialize_quiver, IceQuiver, QuiverError,
    Verdict, VertexId, VertexState,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("unknown seed `{0}`")]
    UnknownSeed(String),
    #[error("mutation class exceeds cap of {0}")]
    ClassSizeCapExceeded(usize),
    #[error("catalog for `{seed}` incomplete: {missing} members uncertified at max length {max_len}")]
    IncompleteCatalog {
        seed: String,
        missing: usize,
        max_len: usize,
    },
    #[error("format error: {0}")]
    FormatError(String),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

// -------------------------------------------------------------------
// Seed registry
// -------------------------------------------------------------------

fn quiver(n: u32, arrows: &[(u32, u32, i64)]) -> IceQuiver {
    IceQuiver::new(n, 0, arrows.to_vec()).expect("registry seed is valid")
}

/// Simply laced tree on edges (orientation is irrelevant up to mutation).
fn tree(n: u32, edges: &[(u32, u32)]) -> IceQuiver {
    let arrows: Vec<(u32, u32, i64)> = edges.iter().map(|&(a, b)| (a, b, 1)).collect();
    quiver(n, &arrows)
}

/// Elliptic E-type seed: a doubled hub pair 1 ⇒ 2 shared by up to three
/// oriented triangles 1 ⇒ 2 → xᵢ → 1, with a simply laced path continuing
/// outward from each xᵢ so that leg i has `legs[i]` vertices in total.
fn elliptic(legs: [u32; 3]) -> IceQuiver {
    let n = 2 + legs.iter().sum::<u32>();
    let mut arrows: Vec<(u32, u32, i64)> = vec![(1, 2, 2)];
    let mut next = 3;
    for &len in &legs {
        if len == 0 {
            continue;
        }
        let x = next;
        next += 1;
        arrows.push((2, x, 1));
        arrows.push((x, 1, 1));
        let mut prev = x;
        for _ in 1..len {
            arrows.push((prev, next, 1));
            prev = next;
            next += 1;
        }
    }
    quiver(n, &arrows)
}

/// The named seed quivers: the A2 quiver, oriented cycles `cycle<n>`, and
/// the eleven exceptional finite-mutation-type classes.
pub fn seed(name: &str) -> Result<IceQuiver, SearchError> {
    if let Some(n) = name.strip_prefix("cycle") {
        let n: u32 = n
            .parse()
            .map_err(|_| SearchError::UnknownSeed(name.to_string()))?;
        if n < 3 {
            return Err(SearchError::UnknownSeed(name.to_string()));
        }
        let arrows: Vec<(u32, u32, i64)> = (1..=n).map(|i| (i, i % n + 1, 1)).collect();
        return Ok(quiver(n, &arrows));
    }
    Ok(match name {
        "a2" => quiver(2, &[(1, 2, 1)]),
        // E-type trees: a path with one extra vertex on the branch node.
        "e6" => tree(6, &[(1, 2), (2, 3), (3, 4), (4, 5), (3, 6)]),
        "e7" => tree(7, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 7)]),
        "e8" => tree(8, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (3, 8)]),
        // Affine E-type trees: star with legs (2,2,2), (3,3,1), (5,2,1).
        "te6" => tree(7, &[(1, 2), (2, 3), (1, 4), (4, 5), (1, 6), (6, 7)]),
        "te7" => tree(
            8,
            &[(1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (6, 7), (1, 8)],
        ),
        "te8" => tree(
            9,
            &[
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (1, 7),
                (7, 8),
                (1, 9),
            ],
        ),
        // Elliptic E types via the weighted-projective-line shapes
        // (3,3,3), (4,4,2), (6,3,2).
        "e6_11" => elliptic([2, 2, 2]),
        "e7_11" => elliptic([3, 3, 1]),
        "e8_11" => elliptic([5, 2, 1]),
        // X7: three oriented triangles c → aᵢ ⇒ bᵢ → c glued at c;
        // X6 drops one triangle and attaches a doubled pendant instead.
        "x7" => quiver(
            7,
            &[
                (7, 1, 1),
                (1, 2, 2),
                (2, 7, 1),
                (7, 3, 1),
                (3, 4, 2),
                (4, 7, 1),
                (7, 5, 1),
                (5, 6, 2),
                (6, 7, 1),
            ],
        ),
        "x6" => quiver(
            6,
            &[
                (6, 1, 1),
                (1, 2, 2),
                (2, 6, 1),
                (6, 3, 1),
                (3, 4, 2),
                (4, 6, 1),
                (6, 5, 1),
            ],
        ),
        _ => return Err(SearchError::UnknownSeed(name.to_string())),
    })
}

pub const EXCEPTIONAL_SEEDS: [&str; 11] = [
    "e6", "e7", "e8", "te6", "te7", "te8", "e6_11", "e7_11", "e8_11", "x6", "x7",
];

// -------------------------------------------------------------------
// Class enumeration
// -------------------------------------------------------------------

/// Breadth-first mutation closure of `q`, one representative per
/// isomorphism class, sorted by canonical serialization.
pub fn enumerate_class(q: &IceQuiver, cap: usize) -> Result<Vec<IceQuiver>, SearchError> {
    let start = canonical_form(q).0;
    let mut seen: BTreeMap<String, IceQuiver> = BTreeMap::new();
    seen.insert(serialize_quiver(&start), start.clone());
    let mut frontier = vec![start];
    while let Some(cur) = frontier.pop() {
        for v in 1..=cur.n_mutable() {
            let nb = canonical_form(&cur.mutate(v)?).0;
            let key = serialize_quiver(&nb);
            if !seen.contains_key(&key) {
                if seen.len() >= cap {
                    return Err(SearchError::ClassSizeCapExceeded(cap));
                }
                seen.insert(key, nb.clone());
                frontier.push(nb);
            }
        }
    }
    Ok(seen.into_values().collect())
}

// -------------------------------------------------------------------
// MGS search
// -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A verified maximal green sequence: the shortest, and among the
    /// shortest the lexicographically least.
    Found(Vec<VertexId>),
    /// No MGS with length ≤ max_len; records how many framed-quiver states
    /// the search visited.
    NotFoundWithin { max_len: usize, states: usize },
}

/// State budget for `search_mgs`. Some state spaces are astronomically
/// large well before the depth bound — green mutations of framed X7 grow
/// about 2.5x per level, passing 10^9 states before depth 20 — so the
/// search also stops at this many visited states. A NotFoundWithin result
/// is therefore evidence, not proof, of non-existence within the bound.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Breadth-first search for a maximal green sequence of `q` (unframed).
/// States are framed quivers deduplicated by exact labeled equality;
/// mutations at permanently red vertices are pruned.
pub fn search_mgs(q: &IceQuiver, max_len: usize) -> Result<SearchOutcome, SearchError> {
    search_mgs_pruned(q, max_len, true)
}

/// `search_mgs` with the permanent-red pruning switchable, for
/// differential testing of pruning soundness.
pub fn search_mgs_pruned(
    q: &IceQuiver,
    max_len: usize,
    prune: bool,
) -> Result<SearchOutcome, SearchError> {
    let start = q.framed()?;
    let mut visited: HashSet<String> = HashSet::new();
    visited.insert(serialize_quiver(&start));
    let mut queue: VecDeque<(IceQuiver, Vec<VertexId>)> = VecDeque::new();
    queue.push_back((start, Vec::new()));
    while let Some((cur, seq)) = queue.pop_front() {
        if cur.all_red()? {
            return Ok(SearchOutcome::Found(seq));
        }
        if seq.len() >= max_len || visited.len() >= DEFAULT_STATE_BUDGET {
            continue;
        }
        let perm = if prune {
            cur.permanently_red_vertices()
        } else {
            Vec::new()
        };
        for v in 1..=cur.n_mutable() {
            if cur.vertex_state(v)? != VertexState::Green || perm.contains(&v) {
                continue;
            }
            let nb = cur.mutate(v)?;
            let key = serialize_quiver(&nb);
            if visited.insert(key) {
                let mut s = seq.clone();
                s.push(v);
                queue.push_back((nb, s));
            }
        }
    }
    Ok(SearchOutcome::NotFoundWithin {
        max_len,
        states: visited.len(),
    })
}

/// Depth-first greedy probe for any (not necessarily shortest) maximal
/// green sequence. Much cheaper than the breadth-first search on larger
/// ranks; used to certify catalog members quickly.
///
/// Witnesses are abundant for the quivers this is used on, so a few
/// thousand seeded random playouts almost always suffice (on the rank-8
/// tree class the worst member needs 4 tries). Playouts are deterministic:
/// try `r` uses an xorshift stream seeded by `r`, so the returned witness
/// is reproducible. A bounded backtracking search runs last to keep the
/// probe complete on small quivers where playouts could miss.
pub fn probe_mgs(q: &IceQuiver, max_len: usize) -> Result<Option<Vec<VertexId>>, SearchError> {
    let start = q.framed()?;

    // Deterministic playouts: try 0 is greedy steepest descent (fewest
    // greens after the move, lowest id breaking ties); later tries pick a
    // random green vertex.
    for r in 0..2000u64 {
        let mut state = r.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut cur = start.clone();
        let mut seq: Vec<VertexId> = Vec::new();
        loop {
            if cur.all_red()? {
                return Ok(Some(seq));
            }
            if seq.len() >= max_len {
                break;
            }
            let perm = cur.permanently_red_vertices();
            let greens: Vec<VertexId> = (1..=cur.n_mutable())
                .filter(|&v| {
                    cur.vertex_state(v).ok() == Some(VertexState::Green) && !perm.contains(&v)
                })
                .collect();
            let pick = if greens.is_empty() {
                break;
            } else if r == 0 {
                *greens
                    .iter()
                    .min_by_key(|&&v| {
                        let nb = cur.mutate(v).unwrap();
                        let g = (1..=nb.n_mutable())
                            .filter(|&u| nb.vertex_state(u).ok() == Some(VertexState::Green))
                            .count();
                        (g, v)
                    })
                    .unwrap()
            } else {
                greens[(next() % greens.len() as u64) as usize]
            };
            cur = cur.mutate(pick)?;
            seq.push(pick);
        }
    }

    // Exhaustive fallback with an expansion budget, for completeness on
    // small quivers; the budget keeps pathological members from stalling.
    let mut visited: HashSet<String> = HashSet::new();
    let mut stack: Vec<(IceQuiver, Vec<VertexId>)> = vec![(start, Vec::new())];
    let mut expansions = 0usize;
    while let Some((cur, seq)) = stack.pop() {
        if cur.all_red()? {
            return Ok(Some(seq));
        }
        if seq.len() >= max_len || expansions >= 200_000 {
            continue;
        }
        expansions += 1;
        let perm = cur.permanently_red_vertices();
        for v in (1..=cur.n_mutable()).rev() {
            if cur.vertex_state(v)? != VertexState::Green || perm.contains(&v) {
                continue;
            }
            let nb = cur.mutate(v)?;
            if visited.insert(serialize_quiver(&nb)) {
                let mut s = seq.clone();
                s.push(v);
                stack.push((nb, s));
            }
        }
    }
    Ok(None)
}

// -------------------------------------------------------------------
// Catalog
// -------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CatalogMember {
    pub quiver: IceQuiver,
    pub mgs: Option<Vec<VertexId>>,
    pub searched_to: usize,
}

#[derive(Debug, Clone)]
pub struct MutationClassCatalog {
    pub seed: String,
    pub members: Vec<CatalogMember>,
}

impl MutationClassCatalog {
    pub fn class_size(&self) -> usize {
        self.members.len()
    }

    pub fn certified(&self) -> usize {
        self.members.iter().filter(|m| m.mgs.is_some()).count()
    }
}

/// Enumerates the class of a registered seed and searches each
/// representative for a maximal green sequence, in parallel. Every returned
/// certificate has been re-verified with `apply_green_sequence`.
///
/// Members are certified by the cheap depth-first probe; `search_mgs` keeps
/// the shortest-sequence contract for direct queries but is too slow to run
/// thousands of times on rank-10 representatives.
pub fn build_catalog(
    seed_name: &str,
    max_len: usize,
    cap: usize,
) -> Result<MutationClassCatalog, SearchError> {
    let q = seed(seed_name)?;
    let class = enumerate_class(&q, cap)?;
    let members: Vec<CatalogMember> = class
        .into_par_iter()
        .map(|rep| {
            let found = probe_mgs(&rep, max_len)?;
            if let Some(seq) = &found {
                let chk = apply_green_sequence(&rep.framed()?, seq)?;
                if chk.verdict != Verdict::ValidMaximalGreen {
                    return Err(SearchError::FormatError(format!(
                        "probe returned an invalid certificate for {}",
                        serialize_quiver(&rep)
                    )));
                }
            }
            Ok(CatalogMember {
                quiver: rep,
                mgs: found,
                searched_to: max_len,
            })
        })
        .collect::<Result<_, _>>()?;
    // Only the X7 class is expected to come back uncertified.
    let missing = members.iter().filter(|m| m.mgs.is_none()).count();
    if missing > 0 && seed_name != "x7" {
        return Err(SearchError::IncompleteCatalog {
            seed: seed_name.to_string(),
            missing,
            max_len,
        });
    }
    Ok(MutationClassCatalog {
        seed: seed_name.to_string(),
        members,
    })
}

/// Default search depth per rank.
pub fn default_max_len(n: u32) -> usize {
    4 * n as usize
}

// -------------------------------------------------------------------
// catalog-v1 serialization
// -------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CatalogMemberV1 {
    quiver: serde_json::Value,
    mgs: Option<Vec<u32>>,
    searched_to: usize,
}

#[derive(Serialize, Deserialize)]
struct CatalogV1 {
    format: String,
    seed: String,
    class_size: usize,
    members: Vec<CatalogMemberV1>,
}

pub fn serialize_catalog(c: &MutationClassCatalog) -> String {
    let doc = CatalogV1 {
        format: "catalog-v1".to_string(),
        seed: c.seed.clone(),
        class_size: c.members.len(),
        members: c
            .members
            .iter()
            .map(|m| CatalogMemberV1 {
                quiver: serde_json::from_str(&serialize_quiver(&m.quiver))
                    .expect("quiver serialization is valid JSON"),
                mgs: m.mgs.clone(),
                searched_to: m.searched_to,
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("catalog serialization cannot fail")
}

pub fn parse_catalog(text: &str) -> Result<MutationClassCatalog, SearchError> {
    let doc: CatalogV1 =
        serde_json::from_str(text).map_err(|e| SearchError::FormatError(e.to_string()))?;
    if doc.format != "catalog-v1" {
        return Err(SearchError::FormatError(format!(
            "unsupported format `{}`",
            doc.format
        )));
    }
    let members = doc
        .members
        .into_iter()
        .map(|m| {
            let q = parse_quiver(&m.quiver.to_string())?;
            Ok(CatalogMember {
                quiver: q,
                mgs: m.mgs,
                searched_to: m.searched_to,
            })
        })
        .collect::<Result<_, SearchError>>()?;
    Ok(MutationClassCatalog {
        seed: doc.seed,
        members,
    })
}
