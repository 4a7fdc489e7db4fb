//! Ice quivers, mutation, framed quivers and green/red vertex states.
//!
//! Mutable vertices are labelled `1..=n`, frozen vertices `n+1..=n+m`.
//! Arrows are stored consolidated: at most one `(src, dst, mult)` triple
//! per ordered pair, with `mult >= 1`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex identifier (1-based).
pub type VertexId = u32;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum QuiverError {
    #[error("vertex {0} is frozen or out of range; only mutable vertices can be mutated")]
    FrozenVertexMutation(VertexId),
    #[error("quiver already has frozen vertices")]
    AlreadyFramed,
    #[error("vertex {0} has incoherent frozen arrows; quiver is not in the mutation class of a framed quiver")]
    SignIncoherent(VertexId),
    #[error("arrow multiplicity overflow at ({0},{1})")]
    MultiplicityOverflow(VertexId, VertexId),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("format error: {0}")]
    FormatError(String),
}

/// Green/red state of a mutable vertex (Definition of green/red via frozen arrows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexState {
    Green,
    Red,
}

/// A quiver with mutable and frozen vertices.
///
/// Invariants: no loops, no 2-cycles, no frozen-frozen arrows, positive
/// multiplicities. Value-semantic; all operations return fresh quivers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IceQuiver {
    n_mutable: u32,
    n_frozen: u32,
    /// (src, dst) -> multiplicity; src != dst, never both directions.
    arrows: BTreeMap<(VertexId, VertexId), i64>,
}

impl IceQuiver {
    /// Builds a quiver from arrow triples, checking all invariants.
    pub fn new(
        n_mutable: u32,
        n_frozen: u32,
        arrows: impl IntoIterator<Item = (VertexId, VertexId, i64)>,
    ) -> Result<Self, QuiverError> {
        let total = n_mutable + n_frozen;
        let mut map = BTreeMap::new();
        for (src, dst, mult) in arrows {
            if src == dst {
                return Err(QuiverError::InvariantViolation(format!(
                    "loop at vertex {src}"
                )));
            }
            if src == 0 || dst == 0 || src > total || dst > total {
                return Err(QuiverError::InvariantViolation(format!(
                    "arrow ({src},{dst}) out of range 1..={total}"
                )));
            }
            if mult <= 0 {
                return Err(QuiverError::InvariantViolation(format!(
                    "non-positive multiplicity on ({src},{dst})"
                )));
            }
            if src > n_mutable && dst > n_mutable {
                return Err(QuiverError::InvariantViolation(format!(
                    "arrow ({src},{dst}) between frozen vertices"
                )));
            }
            if map.contains_key(&(dst, src)) {
                return Err(QuiverError::InvariantViolation(format!(
                    "2-cycle between {src} and {dst}"
                )));
            }
            if map.insert((src, dst), mult).is_some() {
                return Err(QuiverError::InvariantViolation(format!(
                    "duplicate arrow ({src},{dst})"
                )));
            }
        }
        Ok(IceQuiver {
            n_mutable,
            n_frozen,
            arrows: map,
        })
    }

    /// A quiver with no arrows.
    pub fn empty(n_mutable: u32) -> Self {
        IceQuiver {
            n_mutable,
            n_frozen: 0,
            arrows: BTreeMap::new(),
        }
    }

    pub fn n_mutable(&self) -> u32 {
        self.n_mutable
    }

    pub fn n_frozen(&self) -> u32 {
        self.n_frozen
    }

    pub fn n_vertices(&self) -> u32 {
        self.n_mutable + self.n_frozen
    }

    pub fn is_mutable(&self, v: VertexId) -> bool {
        v >= 1 && v <= self.n_mutable
    }

    /// Arrow triples sorted ascending by (src, dst).
    pub fn arrows(&self) -> impl Iterator<Item = (VertexId, VertexId, i64)> + '_ {
        self.arrows.iter().map(|(&(s, d), &m)| (s, d, m))
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    /// Signed multiplicity: positive for i -> j, negative for j -> i.
    pub fn signed(&self, i: VertexId, j: VertexId) -> i64 {
        if let Some(&m) = self.arrows.get(&(i, j)) {
            m
        } else if let Some(&m) = self.arrows.get(&(j, i)) {
            -m
        } else {
            0
        }
    }

    /// Mutation at a mutable vertex `k` (2-paths, reversal, cancellation).
    pub fn mutate(&self, k: VertexId) -> Result<IceQuiver, QuiverError> {
        if !self.is_mutable(k) {
            return Err(QuiverError::FrozenVertexMutation(k));
        }
        // Signed working map keyed by (min, max).
        let mut signed: BTreeMap<(VertexId, VertexId), i64> = BTreeMap::new();
        for (&(s, d), &m) in &self.arrows {
            if s < d {
                signed.insert((s, d), m);
            } else {
                signed.insert((d, s), -m);
            }
        }
        let ins: Vec<(VertexId, i64)> = (1..=self.n_vertices())
            .filter_map(|i| {
                let b = self.signed(i, k);
                (b > 0).then_some((i, b))
            })
            .collect();
        let outs: Vec<(VertexId, i64)> = (1..=self.n_vertices())
            .filter_map(|j| {
                let b = self.signed(k, j);
                (b > 0).then_some((j, b))
            })
            .collect();
        // Step 1: for every 2-path i -> k -> j add i -> j with product multiplicity.
        for &(i, bi) in &ins {
            for &(j, bj) in &outs {
                if i > self.n_mutable && j > self.n_mutable {
                    continue; // frozen-frozen arrows are deleted anyway
                }
                let add = bi
                    .checked_mul(bj)
                    .ok_or(QuiverError::MultiplicityOverflow(i, j))?;
                let (key, sgn) = if i < j { ((i, j), 1) } else { ((j, i), -1) };
                let e = signed.entry(key).or_insert(0);
                *e = e
                    .checked_add(sgn * add)
                    .ok_or(QuiverError::MultiplicityOverflow(i, j))?;
            }
        }
        // Step 2: reverse all arrows incident to k.
        for (&(a, b), v) in signed.iter_mut() {
            if a == k || b == k {
                *v = -*v;
            }
        }
        // Step 3 (cancellation) happened implicitly in the signed sums.
        let arrows = signed
            .into_iter()
            .filter(|&(_, v)| v != 0)
            .map(|((a, b), v)| if v > 0 { ((a, b), v) } else { ((b, a), -v) })
            .collect();
        Ok(IceQuiver {
            n_mutable: self.n_mutable,
            n_frozen: self.n_frozen,
            arrows,
        })
    }

    /// Applies mutations left to right.
    pub fn mutate_seq(&self, seq: &[VertexId]) -> Result<IceQuiver, QuiverError> {
        let mut q = self.clone();
        for &k in seq {
            q = q.mutate(k)?;
        }
        Ok(q)
    }

    /// The framed quiver: one frozen copy `n+i` per mutable `i`, with arrow `i -> n+i`.
    pub fn framed(&self) -> Result<IceQuiver, QuiverError> {
        if self.n_frozen > 0 {
            return Err(QuiverError::AlreadyFramed);
        }
        let n = self.n_mutable;
        let mut arrows = self.arrows.clone();
        for i in 1..=n {
            arrows.insert((i, n + i), 1);
        }
        Ok(IceQuiver {
            n_mutable: n,
            n_frozen: n,
            arrows,
        })
    }

    /// Green/red state of a mutable vertex, via its frozen arrows.
    ///
    /// A vertex with both frozen in- and out-arrows, or with no frozen
    /// arrows at all, signals an input outside the mutation class of a
    /// framed quiver and reports `SignIncoherent`.
    pub fn vertex_state(&self, i: VertexId) -> Result<VertexState, QuiverError> {
        if !self.is_mutable(i) {
            return Err(QuiverError::FrozenVertexMutation(i));
        }
        let mut from_frozen = false;
        let mut to_frozen = false;
        for f in self.n_mutable + 1..=self.n_vertices() {
            match self.signed(f, i) {
                b if b > 0 => from_frozen = true,
                b if b < 0 => to_frozen = true,
                _ => {}
            }
        }
        match (from_frozen, to_frozen) {
            (false, true) => Ok(VertexState::Green),
            (true, false) => Ok(VertexState::Red),
            _ => Err(QuiverError::SignIncoherent(i)),
        }
    }

    /// True when every mutable vertex is red.
    pub fn all_red(&self) -> Result<bool, QuiverError> {
        for i in 1..=self.n_mutable {
            if self.vertex_state(i)? == VertexState::Green {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Mutable vertices that can never again be mutated in a green sequence:
    /// some frozen vertex has exactly one incident arrow, of multiplicity 1,
    /// pointing at them.
    pub fn permanently_red_vertices(&self) -> Vec<VertexId> {
        let mut flagged = vec![false; self.n_mutable as usize + 1];
        for f in self.n_mutable + 1..=self.n_vertices() {
            let mut incident = Vec::new();
            for v in 1..=self.n_mutable {
                let b = self.signed(f, v);
                if b != 0 {
                    incident.push((v, b));
                }
            }
            if let [(v, 1)] = incident[..] {
                flagged[v as usize] = true;
            }
        }
        (1..=self.n_mutable)
            .filter(|&v| flagged[v as usize])
            .collect()
    }

    /// Restricts to the induced subquiver on the given mutable vertices
    /// (given in the order they should be relabelled 1..k), keeping the
    /// matching frozen partners when the quiver is framed-shaped.
    pub fn induced_subquiver(&self, keep: &[VertexId]) -> Result<IceQuiver, QuiverError> {
        let k = keep.len() as u32;
        let framed_shape = self.n_frozen == self.n_mutable;
        let mut relabel: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for (new0, &old) in keep.iter().enumerate() {
            if !self.is_mutable(old) {
                return Err(QuiverError::FrozenVertexMutation(old));
            }
            relabel.insert(old, new0 as u32 + 1);
            if framed_shape {
                relabel.insert(self.n_mutable + old, k + new0 as u32 + 1);
            }
        }
        let arrows = self
            .arrows
            .iter()
            .filter_map(|(&(s, d), &m)| {
                Some((*relabel.get(&s)?, *relabel.get(&d)?, m))
            })
            .collect::<Vec<_>>();
        IceQuiver::new(k, if framed_shape { k } else { 0 }, arrows)
    }
}

impl fmt::Display for IceQuiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IceQuiver(n={}, m={};", self.n_mutable, self.n_frozen)?;
        for (s, d, m) in self.arrows() {
            if m == 1 {
                write!(f, " {s}->{d}")?;
            } else {
                write!(f, " {s}->{d}x{m}")?;
            }
        }
        write!(f, ")")
    }
}

/// Verdict of a checked mutation sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ValidGreen,
    ValidMaximalGreen,
    /// 1-based index of the first mutation at a non-green vertex.
    InvalidAtStep(usize),
}

/// A mutation sequence applied to a framed quiver, with per-step states.
#[derive(Debug, Clone)]
pub struct GreenSequenceTrace {
    pub initial: IceQuiver,
    /// (vertex mutated, its state just before the mutation).
    pub steps: Vec<(VertexId, VertexState)>,
    pub final_quiver: IceQuiver,
    pub verdict: Verdict,
}

/// Applies `seq` to `q0` (a framed quiver or descendant), recording the
/// pre-mutation state of every vertex mutated. The whole sequence is applied
/// even past a non-green step; the verdict records the first violation.
pub fn apply_green_sequence(
    q0: &IceQuiver,
    seq: &[VertexId],
) -> Result<GreenSequenceTrace, QuiverError> {
    let mut q = q0.clone();
    let mut steps = Vec::with_capacity(seq.len());
    let mut first_bad = None;
    for (idx, &k) in seq.iter().enumerate() {
        let st = q.vertex_state(k)?;
        if st != VertexState::Green && first_bad.is_none() {
            first_bad = Some(idx + 1);
        }
        steps.push((k, st));
        q = q.mutate(k)?;
    }
    let verdict = match first_bad {
        Some(i) => Verdict::InvalidAtStep(i),
        None => {
            if q.all_red()? {
                Verdict::ValidMaximalGreen
            } else {
                Verdict::ValidGreen
            }
        }
    };
    Ok(GreenSequenceTrace {
        initial: q0.clone(),
        steps,
        final_quiver: q,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------

/// Composite arrow label between positions, folding in the frozen partners
/// when the quiver is framed-shaped.
fn pair_sig(q: &IceQuiver, i: VertexId, j: VertexId) -> (i64, i64, i64) {
    let n = q.n_mutable();
    if q.n_frozen() == n {
        (q.signed(i, j), q.signed(i, n + j), q.signed(n + i, j))
    } else {
        (q.signed(i, j), 0, 0)
    }
}

fn self_sig(q: &IceQuiver, i: VertexId) -> i64 {
    let n = q.n_mutable();
    if q.n_frozen() == n {
        q.signed(i, n + i)
    } else {
        0
    }
}

/// Assigns each element the rank of its key among sorted distinct keys, so
/// the colouring depends only on key content, not on vertex order.
fn rank_by_key<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut distinct: Vec<&K> = keys.iter().collect();
    distinct.sort_unstable();
    distinct.dedup_by(|a, b| a == b);
    keys.iter()
        .map(|k| distinct.binary_search(&k).unwrap() as u32)
        .collect()
}

/// Iterated neighbourhood-colour refinement; returns a colour per mutable vertex.
fn wl_colors(q: &IceQuiver) -> Vec<u32> {
    let n = q.n_mutable() as usize;
    let mut sigs: Vec<(i64, Vec<(i64, i64, i64)>)> = Vec::with_capacity(n);
    for i in 0..n {
        let v = (i + 1) as VertexId;
        let mut sig: Vec<(i64, i64, i64)> = (1..=n as u32)
            .filter(|&u| u != v)
            .map(|u| pair_sig(q, v, u))
            .collect();
        sig.sort_unstable();
        sigs.push((self_sig(q, v), sig));
    }
    let mut colors = rank_by_key(&sigs);
    // Refine until stable.
    loop {
        let mut keys: Vec<(u32, Vec<(u32, (i64, i64, i64))>)> = Vec::with_capacity(n);
        for i in 0..n {
            let v = (i + 1) as VertexId;
            let mut nb: Vec<(u32, (i64, i64, i64))> = (0..n)
                .filter(|&u| u != i)
                .map(|u| (colors[u], pair_sig(q, v, (u + 1) as VertexId)))
                .collect();
            nb.sort_unstable();
            keys.push((colors[i], nb));
        }
        let new_colors = rank_by_key(&keys);
        let stable = {
            let mut cls_old: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            let mut cls_new: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for i in 0..n {
                cls_old.entry(colors[i]).or_default().push(i);
                cls_new.entry(new_colors[i]).or_default().push(i);
            }
            cls_old.len() == cls_new.len()
        };
        colors = new_colors;
        if stable {
            break;
        }
    }
    colors
}

/// Canonically relabelled quiver plus the permutation used.
///
/// `perm[i-1]` is the new label of old mutable vertex `i`; frozen vertex
/// `n+i` follows its mutable partner. Two quivers are isomorphic (in the
/// partner-respecting sense) iff their canonical forms are equal.
pub fn canonical_form(q: &IceQuiver) -> (IceQuiver, Vec<VertexId>) {
    let n = q.n_mutable() as usize;
    if n == 0 {
        return (q.clone(), Vec::new());
    }
    let colors = wl_colors(q);

    // Key of a full assignment: row-major composite adjacency in new labels.
    // We search assignments new-label by new-label, branch and bound on the
    // growing key. `assign[new]` = old vertex index (0-based).
    let mut best_key: Option<Vec<(i64, i64, i64)>> = None;
    let mut best_perm: Vec<usize> = (0..n).collect();

    fn extend(
        q: &IceQuiver,
        colors: &[u32],
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
        key: &mut Vec<(i64, i64, i64)>,
        best_key: &mut Option<Vec<(i64, i64, i64)>>,
        best_perm: &mut Vec<usize>,
    ) {
        let n = colors.len();
        let pos = assign.len();
        if pos == n {
            if best_key.as_ref().map_or(true, |b| key[..] < b[..]) {
                *best_key = Some(key.clone());
                *best_perm = assign.clone();
            }
            return;
        }
        // Candidates: unused vertices of minimal colour among unused.
        let min_color = (0..n)
            .filter(|&i| !used[i])
            .map(|i| colors[i])
            .min()
            .unwrap();
        for cand in 0..n {
            if used[cand] || colors[cand] != min_color {
                continue;
            }
            let v = (cand + 1) as VertexId;
            let mut added = Vec::with_capacity(2 * pos + 1);
            added.push((self_sig(q, v), 0, 0));
            for &prev in assign.iter() {
                let u = (prev + 1) as VertexId;
                added.push(pair_sig(q, u, v));
                added.push(pair_sig(q, v, u));
            }
            let base = key.len();
            key.extend_from_slice(&added);
            let prune = match best_key {
                Some(b) if b.len() >= key.len() => key[..] > b[..key.len()],
                _ => false,
            };
            if !prune {
                used[cand] = true;
                assign.push(cand);
                extend(q, colors, assign, used, key, best_key, best_perm);
                assign.pop();
                used[cand] = false;
            }
            key.truncate(base);
        }
    }

    let mut assign = Vec::new();
    let mut used = vec![false; n];
    let mut key = Vec::new();
    extend(
        q,
        &colors,
        &mut assign,
        &mut used,
        &mut key,
        &mut best_key,
        &mut best_perm,
    );

    // best_perm[new0] = old0; invert to perm[old0] = new label.
    let mut perm = vec![0 as VertexId; n];
    for (new0, &old0) in best_perm.iter().enumerate() {
        perm[old0] = (new0 + 1) as VertexId;
    }
    let relabeled = apply_permutation(q, &perm);
    (relabeled, perm)
}

/// Relabels mutable vertices by `perm` (old `i` becomes `perm[i-1]`);
/// frozen partners follow when the quiver is framed-shaped.
pub fn apply_permutation(q: &IceQuiver, perm: &[VertexId]) -> IceQuiver {
    let n = q.n_mutable();
    let framed_shape = q.n_frozen() == n && n > 0;
    let map = |v: VertexId| -> VertexId {
        if v <= n {
            perm[(v - 1) as usize]
        } else if framed_shape {
            n + perm[(v - n - 1) as usize]
        } else {
            v
        }
    };
    let arrows: Vec<_> = q.arrows().map(|(s, d, m)| (map(s), map(d), m)).collect();
    IceQuiver::new(n, q.n_frozen(), arrows).expect("permutation preserves invariants")
}

// ---------------------------------------------------------------------------
// iceq-v1 serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct IceqV1 {
    format: String,
    mutable: u32,
    frozen: u32,
    arrows: Vec<(VertexId, VertexId, i64)>,
}

/// Serializes to the iceq-v1 JSON format; arrows sorted ascending by (src, dst).
pub fn serialize_quiver(q: &IceQuiver) -> String {
    let doc = IceqV1 {
        format: "iceq-v1".to_string(),
        mutable: q.n_mutable(),
        frozen: q.n_frozen(),
        arrows: q.arrows().collect(),
    };
    serde_json::to_string(&doc).expect("quiver serialization cannot fail")
}

/// Parses the iceq-v1 JSON format, enforcing all quiver invariants.
pub fn parse_quiver(text: &str) -> Result<IceQuiver, QuiverError> {
    let doc: IceqV1 =
        serde_json::from_str(text).map_err(|e| QuiverError::FormatError(e.to_string()))?;
    if doc.format != "iceq-v1" {
        return Err(QuiverError::FormatError(format!(
            "unknown format tag {:?}",
            doc.format
        )));
    }
    IceQuiver::new(doc.mutable, doc.frozen, doc.arrows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u32, arrows: &[(u32, u32, i64)]) -> IceQuiver {
        IceQuiver::new(n, 0, arrows.iter().copied()).unwrap()
    }

    fn arrows_of(q: &IceQuiver) -> Vec<(u32, u32, i64)> {
        q.arrows().collect()
    }

    #[test]
    fn mutate_sink_reverses() {
        let a2 = q(2, &[(1, 2, 1)]);
        let m = a2.mutate(2).unwrap();
        assert_eq!(arrows_of(&m), vec![(2, 1, 1)]);
    }

    #[test]
    fn mutate_path_creates_two_path_arrow() {
        let p = q(3, &[(1, 2, 1), (2, 3, 1)]);
        let m = p.mutate(2).unwrap();
        assert_eq!(arrows_of(&m), vec![(1, 3, 1), (2, 1, 1), (3, 2, 1)]);
    }

    #[test]
    fn mutate_cycle_cancels_two_cycle() {
        let c3 = q(3, &[(1, 2, 1), (2, 3, 1), (3, 1, 1)]);
        let m = c3.mutate(1).unwrap();
        assert_eq!(arrows_of(&m), vec![(1, 3, 1), (2, 1, 1)]);
    }

    #[test]
    fn mutate_frozen_rejected() {
        let f = q(2, &[(1, 2, 1)]).framed().unwrap();
        assert_eq!(f.mutate(3), Err(QuiverError::FrozenVertexMutation(3)));
    }

    #[test]
    fn framed_counts() {
        let f = q(2, &[(1, 2, 1)]).framed().unwrap();
        assert_eq!(f.n_frozen(), 2);
        assert_eq!(arrows_of(&f), vec![(1, 2, 1), (1, 3, 1), (2, 4, 1)]);
        assert_eq!(f.framed(), Err(QuiverError::AlreadyFramed));
        // Framing a single vertex.
        let s = IceQuiver::empty(1).framed().unwrap();
        assert_eq!(arrows_of(&s), vec![(1, 2, 1)]);
    }

    #[test]
    fn states_fresh_and_after_mutation() {
        let f = q(2, &[(1, 2, 1)]).framed().unwrap();
        assert_eq!(f.vertex_state(1), Ok(VertexState::Green));
        assert_eq!(f.vertex_state(2), Ok(VertexState::Green));
        let s = IceQuiver::empty(1).framed().unwrap().mutate(1).unwrap();
        assert_eq!(s.vertex_state(1), Ok(VertexState::Red));
    }

    #[test]
    fn state_incoherent_without_frozen() {
        let bare = q(2, &[(1, 2, 1)]);
        assert_eq!(
            bare.vertex_state(1),
            Err(QuiverError::SignIncoherent(1))
        );
    }

    #[test]
    fn a2_green_sequences() {
        let f = q(2, &[(1, 2, 1)]).framed().unwrap();
        let t = apply_green_sequence(&f, &[1, 2]).unwrap();
        assert_eq!(t.verdict, Verdict::ValidMaximalGreen);
        let t = apply_green_sequence(&f, &[2, 1, 2]).unwrap();
        assert_eq!(t.verdict, Verdict::ValidMaximalGreen);
        let t = apply_green_sequence(&f, &[1, 1]).unwrap();
        assert_eq!(t.verdict, Verdict::InvalidAtStep(2));
    }

    #[test]
    fn permanently_red_flags() {
        let f = q(2, &[(1, 2, 1)]).framed().unwrap();
        assert!(f.permanently_red_vertices().is_empty());
        let s = IceQuiver::empty(1).framed().unwrap().mutate(1).unwrap();
        assert_eq!(s.permanently_red_vertices(), vec![1]);
    }

    #[test]
    fn canonical_two_vertex() {
        let a = q(2, &[(1, 2, 1)]);
        let b = q(2, &[(2, 1, 1)]);
        assert_eq!(canonical_form(&a).0, canonical_form(&b).0);
    }

    #[test]
    fn canonical_distinguishes_cycle_from_path() {
        let c3 = q(3, &[(1, 2, 1), (2, 3, 1), (3, 1, 1)]);
        let p3 = q(3, &[(1, 2, 1), (2, 3, 1)]);
        assert_ne!(canonical_form(&c3).0, canonical_form(&p3).0);
    }

    #[test]
    fn iceq_roundtrip() {
        let f = q(3, &[(1, 2, 2), (2, 3, 1)]).framed().unwrap();
        let s = serialize_quiver(&f);
        assert_eq!(parse_quiver(&s).unwrap(), f);
        let e = IceQuiver::empty(1);
        assert_eq!(parse_quiver(&serialize_quiver(&e)).unwrap(), e);
    }

    #[test]
    fn iceq_rejects_loop() {
        let bad = r#"{"format":"iceq-v1","mutable":3,"frozen":0,"arrows":[[3,3,1]]}"#;
        assert!(matches!(
            parse_quiver(bad),
            Err(QuiverError::InvariantViolation(_))
        ));
    }
}
