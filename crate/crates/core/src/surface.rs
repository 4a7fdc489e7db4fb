//! Marked surfaces and tagged triangulations.
//!
//! A triangulation is stored as an ideal triangle complex plus a sign per
//! puncture encoding the tags. Triangles are oriented clockwise; corner `i`
//! of a triangle sits between sides `i` and `i+1`, so side `i` runs from
//! corner `i+2` to corner `i` in the clockwise traversal. A self-folded
//! triangle lists its radius twice; the two tagged arcs drawn at the
//! enclosed puncture are the radius id (tag equal to the puncture sign) and
//! the loop id (opposite tag).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quiver::{IceQuiver, QuiverError};

pub type ArcId = u32;
/// Index into the triangulation's marked point table.
pub type PointId = usize;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("format error: {0}")]
    FormatError(String),
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("unknown or unflippable arc {0}")]
    InvalidArc(ArcId),
    #[error("arc {0} is not a loop")]
    NotALoop(ArcId),
    #[error("loop {0} does not cut off a disk")]
    NotADisk(ArcId),
    #[error("no independence path for arc {0}")]
    NoIndependencePath(ArcId),
    #[error("surface has no boundary")]
    NotABoundedSurface,
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

/// One side of a triangle: an internal arc or a boundary segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Arc(ArcId),
    Boundary(u32),
}

impl Side {
    pub fn arc(self) -> Option<ArcId> {
        match self {
            Side::Arc(a) => Some(a),
            Side::Boundary(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triangle {
    pub sides: [Side; 3],
    /// Marked point at each corner; corner `i` lies between sides `i` and `i+1`.
    pub corners: [PointId; 3],
}

impl Triangle {
    fn rotated(&self, k: usize) -> Triangle {
        let s = self.sides;
        let c = self.corners;
        Triangle {
            sides: [s[k % 3], s[(k + 1) % 3], s[(k + 2) % 3]],
            corners: [c[k % 3], c[(k + 1) % 3], c[(k + 2) % 3]],
        }
    }

    fn canonical(&self) -> Triangle {
        (0..3).map(|k| self.rotated(k)).min().unwrap()
    }

    /// For a self-folded triangle returns (loop side index, repeated arc id,
    /// tip corner index).
    fn self_folded(&self) -> Option<(usize, ArcId, usize)> {
        for i in 0..3 {
            let j = (i + 1) % 3;
            if let (Side::Arc(a), Side::Arc(b)) = (self.sides[i], self.sides[j]) {
                if a == b {
                    // sides i and i+1 repeat; the loop is the remaining side,
                    // the tip is the corner between the repeated sides.
                    return Some(((i + 2) % 3, a, i));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointInfo {
    pub name: String,
    pub is_boundary: bool,
}

/// The underlying surface data of a triangulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSurface {
    pub genus: u32,
    /// Marked point counts per boundary component; empty means closed.
    pub boundary_marked: Vec<u32>,
    pub punctures: Vec<String>,
}

/// Where a radial puncture lives: the digon around a self-folded triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadialPunctureInfo {
    pub puncture: PointId,
    /// The arc notched at the puncture.
    pub inner: ArcId,
    /// The arc with the same underlying curve, plain at the puncture.
    pub companion: ArcId,
    /// The other two sides of the enclosing digon's outer triangle.
    pub outer: Vec<Side>,
}

/// Image of an arc under the untagging map used for independence sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IotaImage {
    Arc { ends: (PointId, PointId) },
    Loop { base: PointId, around: PointId },
}

impl IotaImage {
    pub fn ends(&self) -> (PointId, PointId) {
        match *self {
            IotaImage::Arc { ends } => ends,
            IotaImage::Loop { base, .. } => (base, base),
        }
    }
}

/// Plan for one independence stage: the arcs joining a puncture set to
/// itself and their escape distances.
#[derive(Debug, Clone)]
pub struct IndependenceData {
    pub p_set: BTreeSet<PointId>,
    pub e: BTreeSet<ArcId>,
    pub sigma: BTreeMap<ArcId, u32>,
    /// Ascending sigma, ties by ascending arc id.
    pub order: Vec<ArcId>,
}

/// A tagged triangulation of a marked surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub genus: u32,
    pub boundary_marked: Vec<u32>,
    pub points: Vec<PointInfo>,
    pub triangles: Vec<Triangle>,
    /// Tag sign per point (+1 plain, -1 notched); meaningful for punctures.
    pub eps: Vec<i8>,
}

impl Triangulation {
    // ---------------------------------------------------------------
    // Basic structure queries
    // ---------------------------------------------------------------

    pub fn punctures(&self) -> impl Iterator<Item = PointId> + '_ {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_boundary)
            .map(|(i, _)| i)
    }

    pub fn n_punctures(&self) -> usize {
        self.punctures().count()
    }

    pub fn surface(&self) -> MarkedSurface {
        MarkedSurface {
            genus: self.genus,
            boundary_marked: self.boundary_marked.clone(),
            punctures: self
                .punctures()
                .map(|p| self.points[p].name.clone())
                .collect(),
        }
    }

    /// Side -> list of (triangle index, side index) slots.
    pub fn slots(&self) -> BTreeMap<Side, Vec<(usize, usize)>> {
        let mut map: BTreeMap<Side, Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                map.entry(tri.sides[i]).or_default().push((t, i));
            }
        }
        map
    }

    pub fn arc_ids(&self) -> BTreeSet<ArcId> {
        self.slots()
            .keys()
            .filter_map(|s| s.arc())
            .collect()
    }

    pub fn n_arcs(&self) -> usize {
        self.arc_ids().len()
    }

    /// The two endpoints of an arc in the complex (equal for loops).
    pub fn endpoints(&self, a: ArcId) -> Result<(PointId, PointId), SurfaceError> {
        let slots = self.slots();
        let occ = slots.get(&Side::Arc(a)).ok_or(SurfaceError::InvalidArc(a))?;
        let (t, i) = occ[0];
        let tri = &self.triangles[t];
        Ok((tri.corners[(i + 2) % 3], tri.corners[i]))
    }

    /// True when `a` is the repeated arc of a self-folded triangle.
    pub fn is_radius(&self, a: ArcId) -> bool {
        self.slots()
            .get(&Side::Arc(a))
            .map(|occ| occ.len() == 2 && occ[0].0 == occ[1].0)
            .unwrap_or(false)
    }

    /// Self-folded triangle data: (triangle, loop arc, radius arc, tip point).
    fn self_folded_triangles(&self) -> Vec<(usize, ArcId, ArcId, PointId)> {
        let mut out = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some((loop_idx, radius, tip_idx)) = tri.self_folded() {
                let lp = tri.sides[loop_idx].arc().expect("loop of a self-folded triangle is an arc");
                out.push((t, lp, radius, tri.corners[tip_idx]));
            }
        }
        out
    }

    /// Punctures enclosed by self-folded triangles, keyed by point.
    fn tips(&self) -> BTreeMap<PointId, (ArcId, ArcId)> {
        self.self_folded_triangles()
            .into_iter()
            .map(|(_, lp, r, tip)| (tip, (lp, r)))
            .collect()
    }

    /// True when the end of `a` at point `p` is notched.
    ///
    /// For the loop of a self-folded triangle the end "at" the enclosed
    /// puncture carries the tag opposite to the puncture sign.
    pub fn notched_at(&self, a: ArcId, p: PointId) -> bool {
        let mut notched = self.eps[p] < 0;
        if let Some(&(lp, _)) = self.tips().get(&p) {
            if lp == a {
                notched = !notched;
            }
        }
        notched
    }

    // ---------------------------------------------------------------
    // Corner rotation around marked points
    // ---------------------------------------------------------------

    /// Crossing side `i+1` from corner `(t,i)` lands at corner `(t',j')`
    /// where `(t',j')` is the glued partner slot. Returns None at boundary.
    fn next_corner(&self, t: usize, i: usize) -> Option<(usize, usize)> {
        let side = self.triangles[t].sides[(i + 1) % 3];
        side.arc()?;
        let slots = self.slots();
        let occ = &slots[&side];
        let (pt, pi) = if occ[0] == (t, (i + 1) % 3) {
            occ[1]
        } else {
            occ[0]
        };
        Some((pt, pi))
    }

    fn prev_corner(&self, t: usize, i: usize) -> Option<(usize, usize)> {
        let side = self.triangles[t].sides[i];
        side.arc()?;
        let slots = self.slots();
        let occ = &slots[&side];
        let (pt, pi) = if occ[0] == (t, i) { occ[1] } else { occ[0] };
        Some((pt, (pi + 2) % 3))
    }

    /// All corners labeled with point `p`.
    fn corners_at(&self, p: PointId) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                if tri.corners[i] == p {
                    out.push((t, i));
                }
            }
        }
        out
    }

    /// Arc ends incident to puncture `p`, in the cyclic order induced by the
    /// orientation (consecutive entries are joined by quiver arrows). Loops
    /// appear twice. Radial punctures report their two parallel tagged arcs.
    pub fn arcs_around(&self, p: PointId) -> Vec<ArcId> {
        if let Some(&(lp, r)) = self.tips().get(&p) {
            let mut pair = vec![lp, r];
            pair.sort_unstable();
            return pair;
        }
        let corners = self.corners_at(p);
        if corners.is_empty() {
            return Vec::new();
        }
        let start = corners[0];
        let mut out = Vec::new();
        let (mut t, mut i) = start;
        loop {
            let crossed = self.triangles[t].sides[(i + 1) % 3]
                .arc()
                .expect("punctures are never adjacent to boundary sides");
            out.push(crossed);
            let (nt, ni) = self
                .next_corner(t, i)
                .expect("interior corner rotation is closed");
            t = nt;
            i = ni;
            if (t, i) == start {
                break;
            }
        }
        // Canonical rotation: start at the first occurrence of the minimum.
        let min = *out.iter().min().unwrap();
        let k = out.iter().position(|&a| a == min).unwrap();
        out.rotate_left(k);
        out
    }

    pub fn radial_punctures(&self) -> Vec<RadialPunctureInfo> {
        let slots = self.slots();
        let mut out = Vec::new();
        for (t, lp, radius, tip) in self.self_folded_triangles() {
            let inner = if self.eps[tip] < 0 { radius } else { lp };
            let companion = if inner == radius { lp } else { radius };
            let occ = &slots[&Side::Arc(lp)];
            let (ot, oi) = if occ[0].0 == t { occ[1] } else { occ[0] };
            let outer_tri = &self.triangles[ot];
            let outer = vec![
                outer_tri.sides[(oi + 1) % 3],
                outer_tri.sides[(oi + 2) % 3],
            ];
            out.push(RadialPunctureInfo {
                puncture: tip,
                inner,
                companion,
                outer,
            });
        }
        out.sort_by_key(|r| r.puncture);
        out
    }

    // ---------------------------------------------------------------
    // Flips
    // ---------------------------------------------------------------

    /// Rewrites every self-folded triangle into the standard encoding: the
    /// enclosed puncture carries sign +1 and the radius id is the arc that
    /// is plain there. The alternative encoding (sign -1 with the ids
    /// swapped) denotes the same two tagged arcs; the quiver is unaffected
    /// because the radius and loop ids receive identical arrows.
    /// Swaps two arc ids everywhere in the complex.
    pub(crate) fn swap_arc_ids(&mut self, a: ArcId, b: ArcId) {
        for tri in self.triangles.iter_mut() {
            for s in tri.sides.iter_mut() {
                *s = match *s {
                    Side::Arc(x) if x == a => Side::Arc(b),
                    Side::Arc(x) if x == b => Side::Arc(a),
                    other => other,
                };
            }
        }
    }

    pub(crate) fn normalize(&mut self) -> Vec<(ArcId, ArcId)> {
        let mut swaps: Vec<(ArcId, ArcId)> = Vec::new();
        for (_, lp, radius, tip) in self.self_folded_triangles() {
            if self.eps[tip] < 0 {
                self.eps[tip] = 1;
                swaps.push((lp, radius));
            }
        }
        for &(lp, radius) in &swaps {
            self.swap_arc_ids(lp, radius);
        }
        swaps
    }

    /// Flips arc `a`, preserving its id.
    pub fn flip(&self, a: ArcId) -> Result<Triangulation, SurfaceError> {
        Ok(self.flip_tracked(a)?.0)
    }

    /// Flips arc `a` and reports the id swaps the flip had to perform
    /// (radius/loop exchanges and renormalization).
    pub fn flip_tracked(
        &self,
        a: ArcId,
    ) -> Result<(Triangulation, Vec<(ArcId, ArcId)>), SurfaceError> {
        let slots = self.slots();
        let occ = slots
            .get(&Side::Arc(a))
            .ok_or(SurfaceError::InvalidArc(a))?
            .clone();
        if occ.len() != 2 {
            return Err(SurfaceError::InvalidTriangulation(format!(
                "arc {a} occupies {} slots",
                occ.len()
            )));
        }
        let mut t = self.clone();
        if occ[0].0 == occ[1].0 {
            // Radius of a self-folded triangle: exchange the ids of the
            // radius and its loop, flip the loop, and toggle the tip sign.
            let tri_idx = occ[0].0;
            let (loop_idx, _, tip_idx) = t.triangles[tri_idx]
                .self_folded()
                .expect("doubly occurring arc lies in a self-folded triangle");
            let lp = t.triangles[tri_idx].sides[loop_idx]
                .arc()
                .expect("loop side is an arc");
            let tip = t.triangles[tri_idx].corners[tip_idx];
            t.swap_arc_ids(a, lp);
            let mut swaps = vec![(a, lp)];
            t = t.ordinary_flip(a)?;
            t.eps[tip] = -t.eps[tip];
            swaps.extend(t.normalize());
            Ok((t, swaps))
        } else {
            let mut t = t.ordinary_flip(a)?;
            let swaps = t.normalize();
            Ok((t, swaps))
        }
    }

    /// Slot flip of an arc lying in two distinct triangles.
    fn ordinary_flip(&self, a: ArcId) -> Result<Triangulation, SurfaceError> {
        let slots = self.slots();
        let occ = &slots[&Side::Arc(a)];
        let ((t1, i1), (t2, i2)) = (occ[0], occ[1]);
        debug_assert_ne!(t1, t2);
        let d1 = self.triangles[t1].rotated(i1);
        let d2 = self.triangles[t2].rotated(i2);
        let [_, p, q] = d1.sides;
        let [_, r, s] = d2.sides;
        let [u0, u1, u2] = d1.corners;
        let [v0, v1, v2] = d2.corners;
        debug_assert_eq!(u2, v0, "glued slots must pair head to tail");
        debug_assert_eq!(u0, v2, "glued slots must pair head to tail");
        let mut t = self.clone();
        t.triangles[t1] = Triangle {
            sides: [Side::Arc(a), q, r],
            corners: [u1, u2, v1],
        };
        t.triangles[t2] = Triangle {
            sides: [Side::Arc(a), s, p],
            corners: [v1, u0, u1],
        };
        Ok(t)
    }

    // ---------------------------------------------------------------
    // Quiver extraction
    // ---------------------------------------------------------------

    /// The signed adjacency quiver; vertex ids equal arc ids (which must be
    /// contiguous 1..n).
    pub fn quiver(&self) -> Result<IceQuiver, SurfaceError> {
        let arcs = self.arc_ids();
        let n = arcs.len();
        for (expect, &got) in (1..=n as u32).zip(arcs.iter()) {
            if expect != got {
                return Err(SurfaceError::InvalidTriangulation(format!(
                    "arc ids must be contiguous from 1; missing {expect}"
                )));
            }
        }
        // Loops of self-folded triangles stand in for their radii as well.
        let mut expand: BTreeMap<ArcId, Vec<ArcId>> = arcs.iter().map(|&a| (a, vec![a])).collect();
        for (_, lp, radius, _) in self.self_folded_triangles() {
            expand.get_mut(&lp).unwrap().push(radius);
        }
        let mut b = vec![vec![0i64; n]; n];
        for tri in &self.triangles {
            if tri.self_folded().is_some() {
                continue;
            }
            for j in 0..3 {
                if let (Side::Arc(x), Side::Arc(y)) = (tri.sides[j], tri.sides[(j + 1) % 3]) {
                    for &u in &expand[&x] {
                        for &v in &expand[&y] {
                            b[(u - 1) as usize][(v - 1) as usize] += 1;
                            b[(v - 1) as usize][(u - 1) as usize] -= 1;
                        }
                    }
                }
            }
        }
        let mut arrows = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if b[i][j] > 0 {
                    arrows.push(((i + 1) as u32, (j + 1) as u32, b[i][j]));
                }
            }
        }
        Ok(IceQuiver::new(n as u32, 0, arrows)?)
    }

    // ---------------------------------------------------------------
    // Monogons and iota
    // ---------------------------------------------------------------

    /// Both complementary sides of a loop: (is disk, punctures strictly inside).
    pub(crate) fn loop_sides(
        &self,
        a: ArcId,
    ) -> Result<[(bool, BTreeSet<PointId>); 2], SurfaceError> {
        let (x, y) = self.endpoints(a)?;
        if x != y {
            return Err(SurfaceError::NotALoop(a));
        }
        let base = x;
        let slots = self.slots();
        let occ = &slots[&Side::Arc(a)];
        // Triangle components when crossing a is forbidden.
        let mut comp = vec![usize::MAX; self.triangles.len()];
        let mut sides_out: Vec<(bool, BTreeSet<PointId>)> = Vec::new();
        for &(seed, _) in occ.iter() {
            if comp[seed] != usize::MAX {
                continue;
            }
            let id = sides_out.len();
            let mut queue = VecDeque::from([seed]);
            comp[seed] = id;
            let mut tris = vec![seed];
            while let Some(t) = queue.pop_front() {
                for i in 0..3 {
                    let side = self.triangles[t].sides[i];
                    if side == Side::Arc(a) {
                        continue;
                    }
                    if let Some(list) = slots.get(&side) {
                        for &(nt, _) in list {
                            if comp[nt] == usize::MAX {
                                comp[nt] = id;
                                queue.push_back(nt);
                                tris.push(nt);
                            }
                        }
                    }
                }
            }
            let mut vertices = BTreeSet::new();
            let mut edges = BTreeSet::new();
            for &t in &tris {
                for i in 0..3 {
                    vertices.insert(self.triangles[t].corners[i]);
                    edges.insert(self.triangles[t].sides[i]);
                }
            }
            let chi = vertices.len() as i64 - edges.len() as i64 + tris.len() as i64;
            let mut inside: BTreeSet<PointId> = vertices
                .into_iter()
                .filter(|&v| v != base && !self.points[v].is_boundary)
                .collect();
            let has_boundary = edges.iter().any(|s| s.arc().is_none());
            if has_boundary {
                inside.clear();
            }
            sides_out.push((chi == 1 && !has_boundary, inside));
        }
        if sides_out.len() == 1 {
            // Non-separating loop: one component on both sides.
            sides_out.push((false, BTreeSet::new()));
            sides_out[0] = (false, BTreeSet::new());
        }
        Ok([sides_out[0].clone(), sides_out[1].clone()])
    }

    /// Punctures strictly inside the disk cut off by loop `a`. When both
    /// sides are disks the side with fewer punctures is reported.
    pub fn monogon_interior(&self, a: ArcId) -> Result<BTreeSet<PointId>, SurfaceError> {
        let [s0, s1] = self.loop_sides(a)?;
        match (s0.0, s1.0) {
            (true, false) => Ok(s0.1),
            (false, true) => Ok(s1.1),
            (true, true) => Ok(if s1.1.len() < s0.1.len() { s1.1 } else { s0.1 }),
            (false, false) => Err(SurfaceError::NotADisk(a)),
        }
    }

    /// The untagged object underlying arc `a`: its endpoints, unless the
    /// tags at its two ends disagree and one end sits at a radial puncture,
    /// in which case it is a loop around that puncture based at the other end.
    pub fn iota(&self, a: ArcId) -> Result<IotaImage, SurfaceError> {
        let tips = self.tips();
        // A self-folded loop's tagged endpoints are the base and the tip.
        let ends = self.tagged_ends(a)?;
        let ((p0, n0), (p1, n1)) = ends;
        let mixed = n0 != n1;
        if mixed && tips.contains_key(&p0) {
            Ok(IotaImage::Loop { base: p1, around: p0 })
        } else if mixed && tips.contains_key(&p1) {
            Ok(IotaImage::Loop { base: p0, around: p1 })
        } else {
            Ok(IotaImage::Arc { ends: (p0.min(p1), p0.max(p1)) })
        }
    }

    /// Tagged endpoints ((point, notched), (point, notched)) of arc `a`.
    pub fn tagged_ends(
        &self,
        a: ArcId,
    ) -> Result<((PointId, bool), (PointId, bool)), SurfaceError> {
        let tips = self.tips();
        for (tip, &(lp, radius)) in tips.iter() {
            if a == lp || a == radius {
                let base = {
                    let (x, y) = self.endpoints(radius)?;
                    if x == *tip {
                        y
                    } else {
                        x
                    }
                };
                return Ok((
                    (base, self.eps[base] < 0),
                    (*tip, self.notched_at(a, *tip)),
                ));
            }
        }
        let (x, y) = self.endpoints(a)?;
        Ok(((x, self.notched_at(a, x)), (y, self.notched_at(a, y))))
    }

    // ---------------------------------------------------------------
    // Independence data
    // ---------------------------------------------------------------

    /// Arcs joining `p_set` to itself and their escape distances: the least
    /// number of such arcs a dual path must cross to reach a triangle with a
    /// corner outside `p_set`, crossing no other arcs.
    pub fn independence_data(
        &self,
        p_set: &BTreeSet<PointId>,
    ) -> Result<IndependenceData, SurfaceError> {
        let mut e = BTreeSet::new();
        for &a in &self.arc_ids() {
            let ends = self.iota(a)?.ends();
            if p_set.contains(&ends.0) && p_set.contains(&ends.1) {
                e.insert(a);
            }
        }
        let slots = self.slots();
        let exits: Vec<bool> = self
            .triangles
            .iter()
            .map(|tri| tri.corners.iter().any(|c| !p_set.contains(c)))
            .collect();
        // Multi-source 0/1 BFS from all exit triangles; crossing an arc of E
        // costs one, crossing any other arc is free.
        let mut dist = vec![u32::MAX; self.triangles.len()];
        let mut queue = VecDeque::new();
        for (t, &ok) in exits.iter().enumerate() {
            if ok {
                dist[t] = 0;
                queue.push_back(t);
            }
        }
        while let Some(t) = queue.pop_front() {
            for i in 0..3 {
                let side = self.triangles[t].sides[i];
                let cost = match side {
                    Side::Arc(x) if e.contains(&x) => 1,
                    Side::Arc(_) => 0,
                    Side::Boundary(_) => continue,
                };
                for &(nt, _) in &slots[&side] {
                    if dist[t] + cost < dist[nt] {
                        dist[nt] = dist[t] + cost;
                        if cost == 0 {
                            queue.push_front(nt);
                        } else {
                            queue.push_back(nt);
                        }
                    }
                }
            }
        }
        let mut sigma = BTreeMap::new();
        for &a in &e {
            let occ = &slots[&Side::Arc(a)];
            let best = occ
                .iter()
                .map(|&(t, _)| dist[t])
                .min()
                .expect("arc has slots");
            if best == u32::MAX {
                return Err(SurfaceError::NoIndependencePath(a));
            }
            sigma.insert(a, best);
        }
        let mut order: Vec<ArcId> = e.iter().copied().collect();
        order.sort_by_key(|a| (sigma[a], *a));
        Ok(IndependenceData {
            p_set: p_set.clone(),
            e,
            sigma,
            order,
        })
    }

    // ---------------------------------------------------------------
    // Validation
    // ---------------------------------------------------------------

    /// Collects every invariant violation; an empty list means the
    /// triangulation is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let slots = self.slots();
        for (side, occ) in &slots {
            match side {
                Side::Arc(a) => {
                    if occ.len() != 2 {
                        bad.push(format!("arc {a} occupies {} slots, expected 2", occ.len()));
                    }
                }
                Side::Boundary(b) => {
                    if occ.len() != 1 {
                        bad.push(format!(
                            "boundary side {b} occupies {} slots, expected 1",
                            occ.len()
                        ));
                    }
                }
            }
        }
        if !bad.is_empty() {
            return bad;
        }
        let arcs = self.arc_ids();
        let n = arcs.len() as i64;
        let g = self.genus as i64;
        let b = self.boundary_marked.len() as i64;
        let p = self.n_punctures() as i64;
        let m: i64 = self.boundary_marked.iter().map(|&x| x as i64).sum();
        let expected = 6 * g + 3 * b + 3 * p + m - 6;
        if n != expected {
            bad.push(format!("arc count {n} differs from required {expected}"));
        }
        let n_boundary_sides = slots.keys().filter(|s| s.arc().is_none()).count() as i64;
        if n_boundary_sides != m {
            bad.push(format!(
                "boundary side count {n_boundary_sides} differs from marked point total {m}"
            ));
        }
        let v = self.points.len() as i64;
        let e = n + n_boundary_sides;
        let f = self.triangles.len() as i64;
        if v - e + f != 2 - 2 * g - b {
            bad.push(format!(
                "Euler characteristic {} differs from {}",
                v - e + f,
                2 - 2 * g - b
            ));
        }
        if g == 0 && b == 0 && p < 4 {
            bad.push(format!("sphere with {p} punctures is not allowed"));
        }
        if g == 0 && b == 1 && p == 0 && m <= 3 {
            bad.push(format!("unpunctured disk with {m} marked points is not allowed"));
        }
        if g == 0 && b == 1 && p == 1 && m == 1 {
            bad.push("once-punctured monogon is not allowed".to_string());
        }
        if self.eps.len() != self.points.len() {
            bad.push("tag sign table size differs from point count".to_string());
        }
        for (i, pt) in self.points.iter().enumerate() {
            if pt.is_boundary && self.eps.get(i).copied().unwrap_or(1) < 0 {
                bad.push(format!("boundary point {} carries a notched sign", pt.name));
            }
        }
        // Corner labels at glued slots must agree.
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                if tri.sides[i].arc().is_some() {
                    if let Some((pt, pi)) = {
                        let occ = &slots[&tri.sides[i]];
                        let other = if occ[0] == (t, i) { occ[1] } else { occ[0] };
                        Some(other)
                    } {
                        let head = tri.corners[i];
                        let tail = tri.corners[(i + 2) % 3];
                        let ptri = &self.triangles[pt];
                        if head != ptri.corners[(pi + 2) % 3] || tail != ptri.corners[pi] {
                            bad.push(format!(
                                "corner labels disagree across the gluing of side {:?}",
                                tri.sides[i]
                            ));
                        }
                    }
                }
            }
        }
        bad
    }

    /// Triangle multiset up to rotation and listing order, with tag signs.
    pub fn canonical_complex(&self) -> (Vec<Triangle>, Vec<i8>) {
        let mut tris: Vec<Triangle> = self.triangles.iter().map(|t| t.canonical()).collect();
        tris.sort();
        (tris, self.eps.clone())
    }

    // ---------------------------------------------------------------
    // Closing a bounded surface
    // ---------------------------------------------------------------

    /// Glues a disk to every boundary component: each boundary segment
    /// becomes an arc, a component with one or two marked points receives a
    /// new puncture, larger components receive a fan of chords. Returns the
    /// closed triangulation; original arc ids are preserved.
    pub fn close_surface(&self) -> Result<Triangulation, SurfaceError> {
        if self.boundary_marked.is_empty() {
            return Err(SurfaceError::NotABoundedSurface);
        }
        let slots = self.slots();
        let mut t = self.clone();
        let mut next_arc = self.arc_ids().iter().max().copied().unwrap_or(0);
        // Collect boundary components as cyclic chains of (side, slot).
        let mut boundary_slots: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        for (side, occ) in &slots {
            if let Side::Boundary(b) = side {
                boundary_slots.insert(*b, occ[0]);
            }
        }
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        let mut components: Vec<Vec<(u32, (usize, usize))>> = Vec::new();
        for (&b0, &slot0) in &boundary_slots {
            if seen.contains(&b0) {
                continue;
            }
            // Walk the boundary: from segment slot (t,i), the next segment
            // clockwise around the component starts at this segment's head
            // corner; rotate around that corner until the next boundary side.
            let mut comp = Vec::new();
            let (mut b, mut slot) = (b0, slot0);
            loop {
                seen.insert(b);
                comp.push((b, slot));
                // Rotate around the head corner of this segment until the
                // following side is the next boundary segment.
                let (mut ct, mut ci) = slot;
                while self.triangles[ct].sides[(ci + 1) % 3].arc().is_some() {
                    let (nt, ni) = self
                        .next_corner(ct, ci)
                        .expect("rotation ends only at a boundary side");
                    ct = nt;
                    ci = ni;
                }
                match self.triangles[ct].sides[(ci + 1) % 3] {
                    Side::Boundary(nb) => {
                        b = nb;
                        slot = (ct, (ci + 1) % 3);
                    }
                    Side::Arc(_) => unreachable!(),
                }
                if b == b0 {
                    break;
                }
            }
            components.push(comp);
        }
        // Replace each boundary side by a fresh arc and triangulate the disk.
        for comp in &components {
            let m = comp.len();
            let mut ring: Vec<ArcId> = Vec::with_capacity(m);
            for &(b, (ti, si)) in comp {
                next_arc += 1;
                ring.push(next_arc);
                debug_assert_eq!(t.triangles[ti].sides[si], Side::Boundary(b));
                t.triangles[ti].sides[si] = Side::Arc(next_arc);
            }
            // Marked points along the component: tail corner of each segment.
            let pts: Vec<PointId> = comp
                .iter()
                .map(|&(_, (ti, si))| self.triangles[ti].corners[(si + 2) % 3])
                .collect();
            // The old surface sees segment k running tail->head clockwise; the
            // glued disk sees the ring counterclockwise, so disk triangles
            // traverse the ring arcs in reverse component order.
            match m {
                1 => {
                    let p = t.add_puncture();
                    next_arc += 1;
                    let r = next_arc;
                    t.triangles.push(Triangle {
                        sides: [Side::Arc(ring[0]), Side::Arc(r), Side::Arc(r)],
                        corners: [pts[0], p, pts[0]],
                    });
                }
                2 => {
                    let p = t.add_puncture();
                    next_arc += 1;
                    let r0 = next_arc;
                    next_arc += 1;
                    let r1 = next_arc;
                    // Two triangles of the once-punctured digon; each ring arc
                    // is traversed opposite to its direction in the old surface.
                    t.triangles.push(Triangle {
                        sides: [Side::Arc(ring[0]), Side::Arc(r0), Side::Arc(r1)],
                        corners: [pts[0], p, pts[1]],
                    });
                    t.triangles.push(Triangle {
                        sides: [Side::Arc(ring[1]), Side::Arc(r1), Side::Arc(r0)],
                        corners: [pts[1], p, pts[0]],
                    });
                }
                _ => {
                    // Fan from pts[0]: chords to pts[2..=m-2].
                    let mut chords = Vec::new();
                    for _ in 2..m - 1 {
                        next_arc += 1;
                        chords.push(next_arc);
                    }
                    let chord = |k: usize| -> ArcId {
                        if k == 1 {
                            ring[0]
                        } else if k == m - 1 {
                            ring[m - 1]
                        } else {
                            chords[k - 2]
                        }
                    };
                    // The disk sees ring[k] running from pts[k+1] to pts[k],
                    // so its clockwise fan triangles are (chord k, chord k+1)
                    // around the outer edge ring[k].
                    for k in 1..=m - 2 {
                        t.triangles.push(Triangle {
                            sides: [
                                Side::Arc(ring[k]),
                                Side::Arc(chord(k)),
                                Side::Arc(chord(k + 1)),
                            ],
                            corners: [pts[k], pts[0], pts[k + 1]],
                        });
                    }
                }
            }
        }
        // Former boundary marked points are punctures of the closed surface.
        for p in t.points.iter_mut() {
            p.is_boundary = false;
        }
        t.boundary_marked.clear();
        Ok(t)
    }

    fn add_puncture(&mut self) -> PointId {
        let id = self.points.len();
        let mut k = id;
        let name = loop {
            let cand = format!("Q{k}");
            if self.point_named(&cand).is_none() {
                break cand;
            }
            k += 1;
        };
        self.points.push(PointInfo {
            name,
            is_boundary: false,
        });
        self.eps.push(1);
        id
    }

    pub fn point_named(&self, name: &str) -> Option<PointId> {
        self.points.iter().position(|p| p.name == name)
    }
}

// -------------------------------------------------------------------
// tagtri-v1 serialization
// -------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TagtriArc {
    id: ArcId,
    ends: [(String, String); 2],
}

#[derive(Serialize, Deserialize)]
struct TagtriV1 {
    format: String,
    genus: u32,
    boundary: Vec<u32>,
    punctures: Vec<String>,
    arcs: Vec<TagtriArc>,
    triangles: Vec<[u32; 3]>,
    boundary_sides: Vec<u32>,
}

/// Serializes a triangulation to the tagtri-v1 JSON format.
pub fn serialize_triangulation(t: &Triangulation) -> Result<String, SurfaceError> {
    let mut arcs = Vec::new();
    for a in t.arc_ids() {
        let ((p0, n0), (p1, n1)) = t.tagged_ends(a)?;
        let mut ends = vec![
            (t.points[p0].name.clone(), tag_str(n0)),
            (t.points[p1].name.clone(), tag_str(n1)),
        ];
        ends.sort();
        arcs.push(TagtriArc {
            id: a,
            ends: [ends[0].clone(), ends[1].clone()],
        });
    }
    let mut triangles: Vec<[u32; 3]> = t
        .triangles
        .iter()
        .map(|tri| {
            let ids: Vec<u32> = tri
                .sides
                .iter()
                .map(|s| match s {
                    Side::Arc(a) => *a,
                    Side::Boundary(b) => *b,
                })
                .collect();
            // Rotate to start at the smallest id, keeping orientation.
            let k = (0..3).min_by_key(|&k| (ids[k], ids[(k + 1) % 3])).unwrap();
            [ids[k], ids[(k + 1) % 3], ids[(k + 2) % 3]]
        })
        .collect();
    triangles.sort();
    let mut boundary_sides: Vec<u32> = t
        .slots()
        .keys()
        .filter_map(|s| match s {
            Side::Boundary(b) => Some(*b),
            _ => None,
        })
        .collect();
    boundary_sides.sort_unstable();
    let doc = TagtriV1 {
        format: "tagtri-v1".to_string(),
        genus: t.genus,
        boundary: t.boundary_marked.clone(),
        punctures: t.punctures().map(|p| t.points[p].name.clone()).collect(),
        arcs,
        triangles,
        boundary_sides,
    };
    Ok(serde_json::to_string(&doc).expect("triangulation serialization cannot fail"))
}

fn tag_str(notched: bool) -> String {
    if notched { "notched" } else { "plain" }.to_string()
}

/// Parses the tagtri-v1 JSON format, reconstructing corner labels from the
/// declared arc endpoints, and validates the result.
pub fn parse_triangulation(text: &str) -> Result<Triangulation, SurfaceError> {
    let doc: TagtriV1 =
        serde_json::from_str(text).map_err(|e| SurfaceError::FormatError(e.to_string()))?;
    if doc.format != "tagtri-v1" {
        return Err(SurfaceError::FormatError(format!(
            "unknown format tag {:?}",
            doc.format
        )));
    }
    let boundary_ids: BTreeSet<u32> = doc.boundary_sides.iter().copied().collect();
    let arc_ids: BTreeSet<u32> = doc.arcs.iter().map(|a| a.id).collect();
    if arc_ids.len() != doc.arcs.len() {
        return Err(SurfaceError::FormatError("duplicate arc id".to_string()));
    }
    if let Some(clash) = arc_ids.intersection(&boundary_ids).next() {
        return Err(SurfaceError::FormatError(format!(
            "id {clash} used for both an arc and a boundary side"
        )));
    }
    // Triangles with placeholder corners; corners are solved for below.
    let triangles: Vec<Triangle> = doc
        .triangles
        .iter()
        .map(|ids| {
            let sides: Result<Vec<Side>, SurfaceError> = ids
                .iter()
                .map(|id| {
                    if arc_ids.contains(id) {
                        Ok(Side::Arc(*id))
                    } else if boundary_ids.contains(id) {
                        Ok(Side::Boundary(*id))
                    } else {
                        Err(SurfaceError::FormatError(format!(
                            "triangle references unknown id {id}"
                        )))
                    }
                })
                .collect();
            let sides = sides?;
            Ok(Triangle {
                sides: [sides[0], sides[1], sides[2]],
                corners: [0, 0, 0],
            })
        })
        .collect::<Result<_, SurfaceError>>()?;

    let mut t = Triangulation {
        genus: doc.genus,
        boundary_marked: doc.boundary.clone(),
        points: Vec::new(),
        triangles,
        eps: Vec::new(),
    };

    // Slot occupancy checks must pass before orbit computation.
    for (side, occ) in t.slots() {
        let want = if side.arc().is_some() { 2 } else { 1 };
        if occ.len() != want {
            return Err(SurfaceError::InvalidTriangulation(format!(
                "side {side:?} occupies {} slots, expected {want}",
                occ.len()
            )));
        }
    }

    let orbits = corner_orbits(&t);
    let labels = solve_point_labels(&t, &doc, &orbits)?;
    let mut names: Vec<(String, bool)> = Vec::new();
    for name in &doc.punctures {
        names.push((name.clone(), false));
    }
    for label in &labels {
        if !names.iter().any(|(n, _)| n == label) {
            names.push((label.clone(), true));
        }
    }
    t.points = names
        .iter()
        .map(|(name, is_boundary)| PointInfo {
            name: name.clone(),
            is_boundary: *is_boundary,
        })
        .collect();
    let point_of: BTreeMap<&String, PointId> = names
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n, i))
        .collect();
    for (ti, tri) in t.triangles.iter_mut().enumerate() {
        for ci in 0..3 {
            tri.corners[ci] = point_of[&labels[orbits.orbit_of[ti][ci]]];
        }
    }
    t.eps = vec![1; t.points.len()];
    infer_eps(&mut t, &doc)?;
    let bad = t.validate();
    if !bad.is_empty() {
        return Err(SurfaceError::InvalidTriangulation(bad.join("; ")));
    }
    Ok(t)
}

struct CornerOrbits {
    /// orbit index per (triangle, corner).
    orbit_of: Vec<[usize; 3]>,
    n_orbits: usize,
    /// true when the orbit touches a boundary side.
    is_boundary: Vec<bool>,
}

fn corner_orbits(t: &Triangulation) -> CornerOrbits {
    let nt = t.triangles.len();
    let mut orbit_of = vec![[usize::MAX; 3]; nt];
    let mut n_orbits = 0;
    let mut is_boundary = Vec::new();
    for t0 in 0..nt {
        for c0 in 0..3 {
            if orbit_of[t0][c0] != usize::MAX {
                continue;
            }
            let id = n_orbits;
            n_orbits += 1;
            let mut touches_boundary = false;
            let mut stack = vec![(t0, c0)];
            orbit_of[t0][c0] = id;
            while let Some((ti, ci)) = stack.pop() {
                for step in [t.next_corner(ti, ci), t.prev_corner(ti, ci)] {
                    match step {
                        Some((nt_, ni)) => {
                            if orbit_of[nt_][ni] == usize::MAX {
                                orbit_of[nt_][ni] = id;
                                stack.push((nt_, ni));
                            }
                        }
                        None => touches_boundary = true,
                    }
                }
            }
            is_boundary.push(touches_boundary);
        }
    }
    CornerOrbits {
        orbit_of,
        n_orbits,
        is_boundary,
    }
}

/// Assigns a marked point name to every corner orbit so the declared arc
/// endpoints are all satisfied; backtracking over the orbit constraints.
fn solve_point_labels(
    t: &Triangulation,
    doc: &TagtriV1,
    orbits: &CornerOrbits,
) -> Result<Vec<String>, SurfaceError> {
    // Endpoint orbit pair per arc; for the loop of a self-folded triangle the
    // declared endpoints are the base and the enclosed tip.
    let slots = t.slots();
    let mut pair_of: BTreeMap<ArcId, (usize, usize)> = BTreeMap::new();
    for (side, occ) in &slots {
        if let Side::Arc(a) = side {
            let (ti, si) = occ[0];
            let tail = orbits.orbit_of[ti][(si + 2) % 3];
            let head = orbits.orbit_of[ti][si];
            pair_of.insert(*a, (tail, head));
        }
    }
    for (ti, tri) in t.triangles.iter().enumerate() {
        if let Some((loop_idx, _, tip_idx)) = tri.self_folded() {
            let lp = tri.sides[loop_idx].arc().unwrap();
            let base = orbits.orbit_of[ti][(loop_idx + 2) % 3];
            let tip = orbits.orbit_of[ti][tip_idx];
            pair_of.insert(lp, (base, tip));
        }
    }
    let declared: BTreeMap<ArcId, (String, String)> = doc
        .arcs
        .iter()
        .map(|a| (a.id, (a.ends[0].0.clone(), a.ends[1].0.clone())))
        .collect();
    let puncture_names: BTreeSet<&String> = doc.punctures.iter().collect();

    // Backtracking assignment orbit -> name with distinctness.
    let mut assign: Vec<Option<String>> = vec![None; orbits.n_orbits];
    let mut used: BTreeSet<String> = BTreeSet::new();
    let constraints: Vec<(usize, usize, &String, &String)> = declared
        .iter()
        .map(|(a, (n0, n1))| {
            let &(o0, o1) = pair_of.get(a).ok_or_else(|| {
                SurfaceError::FormatError(format!("arc {a} does not appear in any triangle"))
            })?;
            Ok((o0, o1, n0, n1))
        })
        .collect::<Result<_, SurfaceError>>()?;

    fn consistent(
        orbits: &CornerOrbits,
        puncture_names: &BTreeSet<&String>,
        orbit: usize,
        name: &str,
    ) -> bool {
        // Puncture names go to interior orbits, other names to boundary orbits.
        orbits.is_boundary[orbit] != puncture_names.contains(&name.to_string())
    }

    fn solve(
        constraints: &[(usize, usize, &String, &String)],
        orbits: &CornerOrbits,
        puncture_names: &BTreeSet<&String>,
        assign: &mut Vec<Option<String>>,
        used: &mut BTreeSet<String>,
        idx: usize,
    ) -> bool {
        if idx == constraints.len() {
            return true;
        }
        let (o0, o1, n0, n1) = constraints[idx];
        let options: Vec<(String, String)> = vec![
            (n0.clone(), n1.clone()),
            (n1.clone(), n0.clone()),
        ];
        for (a0, a1) in options {
            let mut placed = Vec::new();
            let mut ok = true;
            for (o, n) in [(o0, &a0), (o1, &a1)] {
                match &assign[o] {
                    Some(cur) => {
                        if cur != n {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        if used.contains(n) || !consistent(orbits, puncture_names, o, n) {
                            ok = false;
                            break;
                        }
                        assign[o] = Some(n.clone());
                        used.insert(n.clone());
                        placed.push((o, n.clone()));
                    }
                }
            }
            if ok && solve(constraints, orbits, puncture_names, assign, used, idx + 1) {
                return true;
            }
            for (o, n) in placed {
                assign[o] = None;
                used.remove(&n);
            }
            if o0 == o1 && n0 == n1 {
                break; // loop constraint has a single option
            }
        }
        false
    }

    if !solve(
        &constraints,
        orbits,
        &puncture_names,
        &mut assign,
        &mut used,
        0,
    ) {
        return Err(SurfaceError::InvalidTriangulation(
            "declared arc endpoints are inconsistent with the triangle complex".to_string(),
        ));
    }
    // Unconstrained orbits get synthetic boundary names.
    let mut out = Vec::with_capacity(orbits.n_orbits);
    let mut synth = 0;
    for (o, a) in assign.into_iter().enumerate() {
        match a {
            Some(n) => out.push(n),
            None => {
                if !orbits.is_boundary[o] {
                    return Err(SurfaceError::InvalidTriangulation(
                        "an interior marked point is not referenced by any arc".to_string(),
                    ));
                }
                loop {
                    let cand = format!("b{synth}");
                    synth += 1;
                    if !used.contains(&cand) {
                        used.insert(cand.clone());
                        out.push(cand);
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Derives the per-puncture tag signs from the declared arc-end tags.
fn infer_eps(t: &mut Triangulation, doc: &TagtriV1) -> Result<(), SurfaceError> {
    let tips = t.tips();
    let mut fixed: BTreeMap<PointId, i8> = BTreeMap::new();
    for arc in &doc.arcs {
        for (name, tag) in &arc.ends {
            let notched = match tag.as_str() {
                "plain" => false,
                "notched" => true,
                other => {
                    return Err(SurfaceError::FormatError(format!("unknown tag {other:?}")))
                }
            };
            let p = t
                .point_named(name)
                .ok_or_else(|| SurfaceError::FormatError(format!("unknown point {name:?}")))?;
            if t.points[p].is_boundary {
                if notched {
                    return Err(SurfaceError::InvalidTriangulation(format!(
                        "boundary end of arc {} is notched",
                        arc.id
                    )));
                }
                continue;
            }
            // At an enclosed tip the loop arc carries the opposite tag.
            let mut sign = if notched { -1 } else { 1 };
            if let Some(&(lp, _)) = tips.get(&p) {
                if lp == arc.id {
                    sign = -sign;
                }
            }
            if let Some(prev) = fixed.insert(p, sign) {
                if prev != sign {
                    return Err(SurfaceError::InvalidTriangulation(format!(
                        "conflicting tags at point {name}"
                    )));
                }
            }
        }
    }
    for (p, s) in fixed {
        t.eps[p] = s;
    }
    Ok(())
}
