//! Rotated dual lattices and the blocking events they carry.
//!
//! The dual lattice is `Z^2` shifted by `(1/2, 1/2)`. Dual site `(i, j)`
//! stands for the point `(i + 1/2, j + 1/2)`. Each primal edge is crossed by
//! exactly one dual edge, and the dual edge carries one arc:
//!
//! * `U`: the primal arc rotated by -90 degrees (east -> south,
//!   north -> east, west -> north, south -> west);
//! * `D`: the reverse of the `U` arc.
//!
//! Under `U` every primal arc crossing a dual path points to the path's left,
//! so a counterclockwise `U` circuit around the origin blocks every outward
//! primal crossing, and a `U` path from below the x-axis to the left of the
//! y-axis blocks the quadrant.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Bits, Config};
use crate::error::{Error, Result};
use crate::lattice::{Axis, Edge, Lattice, Region, Site, Step};
use crate::model::ModelSpec;
use crate::reach::{bfs_path, crosses, reachable_set, ArcSource};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DualVariant {
    U,
    D,
}

impl DualVariant {
    pub fn flipped(self) -> Self {
        match self {
            DualVariant::U => DualVariant::D,
            DualVariant::D => DualVariant::U,
        }
    }
}

/// Dual site `(i, j)` at the point `(i + 1/2, j + 1/2)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualSite {
    pub i: i32,
    pub j: i32,
}

impl DualSite {
    pub const fn new(i: i32, j: i32) -> Self {
        DualSite { i, j }
    }

    /// Start site `D(a)` at `(a + 1/2, 1/2)`, just above the positive x-axis.
    pub const fn start(a: i32) -> Self {
        DualSite { i: a, j: 0 }
    }

    /// Coordinates doubled so that they are integers.
    pub fn doubled(self) -> (i64, i64) {
        (2 * self.i as i64 + 1, 2 * self.j as i64 + 1)
    }

    pub fn point(self) -> (f64, f64) {
        (self.i as f64 + 0.5, self.j as f64 + 0.5)
    }

    /// Box ring the site sits in: the point's max-norm is `radius + 1/2`.
    pub fn radius(self) -> u32 {
        fn fold(c: i32) -> u32 {
            if c >= 0 {
                c as u32
            } else {
                (-c - 1) as u32
            }
        }
        fold(self.i).max(fold(self.j))
    }

    /// Quadrant 1..=4 counterclockwise from the north-east.
    pub fn quadrant(self) -> u8 {
        match (self.i >= 0, self.j >= 0) {
            (true, true) => 1,
            (false, true) => 2,
            (false, false) => 3,
            (true, false) => 4,
        }
    }

    fn as_site(self) -> Site {
        Site::planar(self.i, self.j)
    }

    fn from_site(s: Site) -> Self {
        DualSite { i: s.x, j: s.y }
    }
}

impl std::fmt::Display for DualSite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}+1/2,{}+1/2)", self.i, self.j)
    }
}

/// The dual edge crossing a planar primal edge, in dual index coordinates.
pub fn dual_edge(primal: Edge) -> Edge {
    let t = primal.tail;
    match primal.axis {
        Axis::X => Edge::new(Site::planar(t.x, t.y - 1), Axis::Y),
        _ => Edge::new(Site::planar(t.x - 1, t.y), Axis::X),
    }
}

/// Forward bit of the dual arc given the primal forward bit.
fn dual_bit(primal: Edge, primal_forward: bool, variant: DualVariant) -> bool {
    // U: east (fwd) -> south (bwd); north (fwd) -> east (fwd)
    let u = match primal.axis {
        Axis::X => !primal_forward,
        _ => primal_forward,
    };
    match variant {
        DualVariant::U => u,
        DualVariant::D => !u,
    }
}

/// A primal lattice together with its dual graph. Dual edge `k` crosses
/// primal edge `k`.
#[derive(Clone, Debug)]
pub struct DualLattice {
    primal: Lattice,
    graph: Lattice,
}

impl DualLattice {
    pub fn new(primal: &Lattice) -> Result<Self> {
        if !primal.region().is_some_and(Region::is_planar) {
            return Err(Error::NotPlanar);
        }
        let edges: Vec<Edge> = primal.edges().iter().map(|&e| dual_edge(e)).collect();
        let sites: Vec<Site> = edges.iter().flat_map(|e| [e.tail, e.head()]).collect();
        Ok(DualLattice { primal: primal.clone(), graph: Lattice::from_edges(sites, edges) })
    }

    pub fn primal(&self) -> &Lattice {
        &self.primal
    }

    /// The dual graph; its sites are dual indices stored as planar sites.
    pub fn graph(&self) -> &Lattice {
        &self.graph
    }

    pub fn site_id(&self, s: DualSite) -> Option<u32> {
        self.graph.site_id(s.as_site())
    }

    pub fn site(&self, id: u32) -> DualSite {
        DualSite::from_site(self.graph.site(id))
    }
}

/// Dual arcs derived from a primal configuration.
#[derive(Clone, Debug)]
pub struct DualConfig {
    lattice: DualLattice,
    model: ModelSpec,
    variant: DualVariant,
    bits: Bits,
}

impl DualConfig {
    pub fn lattice(&self) -> &DualLattice {
        &self.lattice
    }

    pub fn variant(&self) -> DualVariant {
        self.variant
    }

    pub fn model(&self) -> ModelSpec {
        self.model
    }

    /// Forward bits of the dual edges, in primal edge order.
    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    /// The dual arc crossing primal edge `edge`, as `(from, to)`.
    pub fn dual_arc(&self, edge: u32) -> (DualSite, DualSite) {
        let de = self.lattice.graph.edge(edge);
        let (t, h) = (DualSite::from_site(de.tail), DualSite::from_site(de.head()));
        if self.bits.get(edge as usize) {
            (t, h)
        } else {
            (h, t)
        }
    }

    /// Sets the dual arc between two adjacent dual sites.
    pub fn set_dual_arc(&mut self, from: DualSite, to: DualSite) -> Result<()> {
        let (id, fwd) = self
            .lattice
            .graph
            .edge_between(from.as_site(), to.as_site())
            .ok_or(Error::SiteOutsideRegion(to.as_site()))?;
        self.bits.set(id as usize, fwd);
        Ok(())
    }

    /// The same environment expressed in the other dual lattice.
    pub fn to_variant(&self, variant: DualVariant) -> DualConfig {
        if variant == self.variant {
            return self.clone();
        }
        DualConfig { variant, bits: self.bits.complement(), ..self.clone() }
    }

    /// Inverse rotation back to the primal configuration.
    pub fn to_primal(&self) -> Config {
        let primal = &self.lattice.primal;
        let bits = Bits::from_fn(primal.num_edges(), |k| {
            let e = primal.edge(k as u32);
            // dual_bit is an involution in its second argument
            dual_bit(e, self.bits.get(k), self.variant)
        });
        Config::new(primal.clone(), self.model, bits).expect("primal lattice has a region")
    }

    /// Fraction bookkeeping for dual arcs that turn counterclockwise about
    /// the origin: `(counterclockwise, total)`.
    pub fn counterclockwise_count(&self) -> (usize, usize) {
        let total = self.bits.len();
        let ccw = (0..total as u32)
            .filter(|&e| {
                let (a, b) = self.dual_arc(e);
                turn_sign(a, b) > 0
            })
            .count();
        (ccw, total)
    }
}

impl ArcSource for DualConfig {
    #[inline]
    fn has_arc(&self, edge: u32, forward: bool) -> bool {
        self.bits.get(edge as usize) == forward
    }
}

/// Sign of the angular momentum of the step `a -> b` about the origin.
fn turn_sign(a: DualSite, b: DualSite) -> i64 {
    let (ax, ay) = a.doubled();
    let (bx, by) = b.doubled();
    let (mx, my) = (ax + bx, ay + by);
    let (dx, dy) = (bx - ax, by - ay);
    (mx * dy - my * dx).signum()
}

/// Rotates every primal arc into the chosen dual lattice.
pub fn dualize(config: &Config, variant: DualVariant) -> Result<DualConfig> {
    let lattice = DualLattice::new(config.lattice())?;
    Ok(dualize_on(&lattice, config, variant))
}

/// [`dualize`] on a prebuilt dual lattice (which must belong to the config's
/// primal lattice).
pub fn dualize_on(lattice: &DualLattice, config: &Config, variant: DualVariant) -> DualConfig {
    debug_assert!(lattice.primal == *config.lattice());
    let primal = config.lattice();
    let bits = Bits::from_fn(primal.num_edges(), |k| {
        dual_bit(primal.edge(k as u32), config.forward(k as u32), variant)
    });
    DualConfig { lattice: lattice.clone(), model: config.model(), variant, bits }
}

/// Dual annulus filter: rings `inner..outer` (exclusive), i.e. the dual
/// sites strictly between the primal rims `inner` and `outer`.
fn in_dual_annulus(s: DualSite, inner: u32, outer: Option<u32>) -> bool {
    let r = s.radius();
    r >= inner && outer.is_none_or(|m| r < m)
}

/// Looks for a `U` path from `D(a)` to some `(0, b)`, `b >= 0`, inside the
/// dual north-east quadrant and the dual annulus between the primal rims
/// `inner` and `outer` (`outer = None` for no outer limit).
pub fn detect_b_plus(
    dual: &DualConfig,
    a: i32,
    inner: u32,
    outer: Option<u32>,
) -> Result<Option<Vec<DualSite>>> {
    if let Some(m) = outer {
        if inner >= m {
            return Err(Error::InvalidRegion(format!("need inner < outer, got {inner}:{m}")));
        }
    }
    let dual = dual.to_variant(DualVariant::U);
    let lat = dual.lattice();
    let start = DualSite::start(a);
    let ok = |s: DualSite| s.quadrant() == 1 && in_dual_annulus(s, inner, outer);
    let sid = match lat.site_id(start) {
        Some(id) if a >= 0 && ok(start) => id,
        _ => return Err(Error::StartOutOfRange(a)),
    };
    let path = bfs_path(
        lat.graph(),
        &dual,
        &[sid],
        |_, step: &Step| ok(lat.site(step.to)),
        |u| lat.site(u).i == 0,
    );
    Ok(path.map(|p| p.into_iter().map(|id| lat.site(id)).collect()))
}

/// A directed dual cycle around the origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitWitness {
    /// Sites in traversal order; the closing arc runs from the last site back
    /// to the first. Starts at the anchor.
    pub cycle: Vec<DualSite>,
    /// +1 counterclockwise, -1 clockwise.
    pub winding: i32,
    /// Smallest `a >= 0` with `D(a)` on the cycle.
    pub anchor: i32,
}

impl CircuitWitness {
    /// Winding number by cumulative angle.
    pub fn winding_by_angle(&self) -> i32 {
        let n = self.cycle.len();
        let mut total = 0.0;
        for k in 0..n {
            let (ax, ay) = self.cycle[k].point();
            let (bx, by) = self.cycle[(k + 1) % n].point();
            let mut d = by.atan2(bx) - ay.atan2(ax);
            if d > PI {
                d -= 2.0 * PI;
            } else if d < -PI {
                d += 2.0 * PI;
            }
            total += d;
        }
        (total / (2.0 * PI)).round() as i32
    }

    /// Checks that every step is a present arc of `dual`, the cycle is simple
    /// and closed, and the stored winding matches the angle sum.
    pub fn verify(&self, dual: &DualConfig) -> bool {
        let n = self.cycle.len();
        if n < 4 {
            return false;
        }
        let mut seen = std::collections::HashSet::new();
        if !self.cycle.iter().all(|s| seen.insert(*s)) {
            return false;
        }
        let g = dual.lattice().graph();
        let arcs_ok = (0..n).all(|k| {
            let (a, b) = (self.cycle[k], self.cycle[(k + 1) % n]);
            match g.edge_between(a.as_site(), b.as_site()) {
                Some((id, fwd)) => dual.has_arc(id, fwd),
                None => false,
            }
        });
        arcs_ok
            && self.winding.abs() == 1
            && self.winding_by_angle() == self.winding
            && self.cycle[0] == DualSite::start(self.anchor)
    }

    /// Cut points where the cycle changes dual quadrant: indices `k` such that
    /// the step `cycle[k] -> cycle[k + 1]` crosses an axis. For a four-leg
    /// counterclockwise circuit these split it into its legs.
    pub fn axis_crossings(&self) -> Vec<usize> {
        let n = self.cycle.len();
        (0..n)
            .filter(|&k| self.cycle[k].quadrant() != self.cycle[(k + 1) % n].quadrant())
            .collect()
    }
}

/// Signed crossing of the cut ray `{(x, 0): x > 0}`: +1 for a northward
/// crossing, -1 for southward.
fn cut_crossing(a: DualSite, b: DualSite) -> i32 {
    if a.i != b.i || a.i < 0 {
        return 0;
    }
    match (a.j, b.j) {
        (-1, 0) => 1,
        (0, -1) => -1,
        _ => 0,
    }
}

/// Finds an encircling circuit inside the annulus: counterclockwise in `U`
/// (winding +1), clockwise in `D` (winding -1). These are exactly the
/// circuits that block every primal crossing of the annulus. `inner = 0`
/// is allowed and makes the event the complement of reaching the outer rim
/// from the origin.
///
/// The primal region reachable from the inner rim is grown first; when it
/// misses the outer rim, its boundary arcs (all pointing into it) form an
/// Eulerian family of `U` cycles whose windings sum to +1. One of them is
/// reduced to a simple +1 cycle.
pub fn detect_circuit(
    dual: &DualConfig,
    annulus: Region,
    variant: DualVariant,
) -> Result<Option<CircuitWitness>> {
    let Region::Annulus { inner, outer } = annulus.validate()? else {
        return Err(Error::InvalidRegion(format!("{annulus} is not an annulus")));
    };
    let u = dual.to_variant(DualVariant::U);
    let lat = u.lattice();
    let primal_lat = lat.primal();
    let primal = u.to_primal();
    let in_ring = |s: Site| (inner..=outer).contains(&s.radius());
    let sources: Vec<u32> = (0..primal_lat.num_sites() as u32)
        .filter(|&id| primal_lat.site(id).radius() == inner)
        .collect();
    if sources.len() as u32 != (8 * inner).max(1) {
        return Err(Error::RegionMismatch(format!(
            "config on {} does not cover {annulus}",
            primal_lat.region().map(|r| r.to_string()).unwrap_or_default()
        )));
    }
    let grown = reachable_set(primal_lat, &primal, &sources, |_, step| {
        in_ring(primal_lat.site(step.to))
    });
    let crossed = (0..primal_lat.num_sites()).any(|k| {
        grown[k] && primal_lat.site(k as u32).radius() == outer
    });
    if crossed {
        return Ok(None);
    }
    // contour arcs, bucketed by dual tail site
    let g = lat.graph();
    let mut out: Vec<Vec<u32>> = vec![Vec::new(); g.num_sites()];
    for (k, e) in primal_lat.edges().iter().enumerate() {
        if !(in_ring(e.tail) && in_ring(e.head())) {
            continue;
        }
        let t = primal_lat.site_id(e.tail).unwrap() as usize;
        let h = primal_lat.site_id(e.head()).unwrap() as usize;
        if grown[t] != grown[h] {
            let (from, _) = u.dual_arc(k as u32);
            out[lat.site_id(from).unwrap() as usize].push(k as u32);
        }
    }
    let mut remaining: Vec<usize> = out.iter().map(Vec::len).collect();
    for start in 0..g.num_sites() {
        while remaining[start] > 0 {
            // closed trail from `start`
            let mut trail = vec![lat.site(start as u32)];
            let mut cur = start;
            let mut winding = 0;
            while remaining[cur] > 0 {
                remaining[cur] -= 1;
                let e = out[cur][remaining[cur]];
                let (a, b) = u.dual_arc(e);
                winding += cut_crossing(a, b);
                cur = lat.site_id(b).unwrap() as usize;
                trail.push(b);
            }
            debug_assert_eq!(cur, start, "contour arcs form closed trails");
            if winding > 0 {
                if let Some(cycle) = simple_cycle_with_winding(&trail, 1) {
                    let w = witness(cycle, 1);
                    return Ok(Some(match variant {
                        DualVariant::U => w,
                        DualVariant::D => reverse_witness(w),
                    }));
                }
            }
        }
    }
    unreachable!("a blocked annulus always has a +1 contour cycle")
}

/// Loop-erases a closed walk (first site repeated at the end) and returns the
/// first simple cycle with the requested winding.
fn simple_cycle_with_winding(walk: &[DualSite], want: i32) -> Option<Vec<DualSite>> {
    let mut stack: Vec<DualSite> = Vec::new();
    let mut pos = std::collections::HashMap::new();
    for &s in walk {
        if let Some(&k) = pos.get(&s) {
            let cycle: Vec<DualSite> = stack[k..].to_vec();
            let n = cycle.len();
            let w: i32 = (0..n).map(|t| cut_crossing(cycle[t], cycle[(t + 1) % n])).sum();
            if w == want {
                return Some(cycle);
            }
            for q in stack.drain(k + 1..) {
                pos.remove(&q);
            }
        } else {
            pos.insert(s, stack.len());
            stack.push(s);
        }
    }
    None
}

fn witness(mut cycle: Vec<DualSite>, winding: i32) -> CircuitWitness {
    let anchor = cycle
        .iter()
        .filter(|s| s.j == 0 && s.i >= 0)
        .map(|s| s.i)
        .min()
        .expect("an encircling cycle meets the positive x-axis row");
    let k = cycle.iter().position(|s| *s == DualSite::start(anchor)).unwrap();
    cycle.rotate_left(k);
    CircuitWitness { cycle, winding, anchor }
}

fn reverse_witness(w: CircuitWitness) -> CircuitWitness {
    let mut cycle = w.cycle;
    cycle.reverse();
    witness(cycle, -w.winding)
}

/// How a single dual step relates to the four-leg shape.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum LegMove {
    Within,
    Cross,
    Land,
    Forbidden,
}

fn leg_move(a: DualSite, b: DualSite) -> LegMove {
    match (a.quadrant(), b.quadrant()) {
        (x, y) if x == y => LegMove::Within,
        (1, 2) | (2, 3) | (3, 4) => LegMove::Cross,
        (4, 1) => LegMove::Land,
        _ => LegMove::Forbidden,
    }
}

fn leg_setup(dual: &DualConfig, a: i32, annulus: Region) -> Result<(DualConfig, u32, u32, u32)> {
    let Region::Annulus { inner, outer } = annulus.validate()? else {
        return Err(Error::InvalidRegion(format!("{annulus} is not an annulus")));
    };
    let u = dual.to_variant(DualVariant::U);
    let start = DualSite::start(a);
    match u.lattice().site_id(start) {
        Some(id) if a >= 0 && in_dual_annulus(start, inner, Some(outer)) => Ok((u, id, inner, outer)),
        _ => Err(Error::StartOutOfRange(a)),
    }
}

/// Every landing column `E` of a four-leg `U` path from `D(a)`: a leg in each
/// dual quadrant taken counterclockwise, joined by single axis-crossing arcs,
/// ending with the northward crossing into `D(E)`. Sorted ascending.
pub fn landing_columns(dual: &DualConfig, a: i32, annulus: Region) -> Result<Vec<i32>> {
    let (u, sid, inner, outer) = leg_setup(dual, a, annulus)?;
    let lat = u.lattice();
    let g = lat.graph();
    let mut seen = vec![false; g.num_sites()];
    let mut landed = vec![false; g.num_sites()];
    let mut stack = vec![sid];
    seen[sid as usize] = true;
    while let Some(v) = stack.pop() {
        let vs = lat.site(v);
        for step in g.steps(v) {
            let ws = lat.site(step.to);
            if !u.has_arc(step.edge, step.forward) || !in_dual_annulus(ws, inner, Some(outer)) {
                continue;
            }
            match leg_move(vs, ws) {
                LegMove::Land => landed[step.to as usize] = true,
                LegMove::Within | LegMove::Cross if !seen[step.to as usize] => {
                    seen[step.to as usize] = true;
                    stack.push(step.to);
                }
                _ => {}
            }
        }
    }
    let mut cols: Vec<i32> =
        (0..g.num_sites()).filter(|&k| landed[k]).map(|k| lat.site(k as u32).i).collect();
    cols.sort_unstable();
    Ok(cols)
}

/// Landing columns `(E_in, E_out)` of the inner-most and outer-most four-leg
/// paths from `D(a)`, or `None` when there is no such path.
pub fn extremal_legs(dual: &DualConfig, a: i32, annulus: Region) -> Result<Option<(i32, i32)>> {
    let cols = landing_columns(dual, a, annulus)?;
    Ok(cols.first().zip(cols.last()).map(|(&lo, &hi)| (lo, hi)))
}

/// Which side a turn-priority walk hugs.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Hug {
    /// Prefer turning toward the origin (left, for counterclockwise travel).
    Inner,
    /// Prefer turning away from the origin.
    Outer,
}

/// Traces a four-leg path from `D(a)` by depth-first search with a fixed turn
/// priority relative to the current heading; the first landing found is
/// returned as the full site sequence (landing site last).
pub fn trace_four_leg(
    dual: &DualConfig,
    a: i32,
    annulus: Region,
    hug: Hug,
) -> Result<Option<Vec<DualSite>>> {
    let (u, sid, inner, outer) = leg_setup(dual, a, annulus)?;
    let lat = u.lattice();
    let g = lat.graph();
    // headings counterclockwise: E, N, W, S
    const DIRS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let turn_order: [usize; 4] = match hug {
        Hug::Inner => [1, 0, 3, 2],
        Hug::Outer => [3, 0, 1, 2],
    };
    let next = |v: u32, heading: usize, k: usize| -> Option<(u32, usize, LegMove)> {
        let dir = (heading + turn_order[k]) % 4;
        let vs = lat.site(v);
        let ws = DualSite::new(vs.i + DIRS[dir].0, vs.j + DIRS[dir].1);
        let (edge, fwd) = g.edge_between(vs.as_site(), ws.as_site())?;
        if !u.has_arc(edge, fwd) || !in_dual_annulus(ws, inner, Some(outer)) {
            return None;
        }
        match leg_move(vs, ws) {
            LegMove::Forbidden => None,
            m => Some((lat.site_id(ws).unwrap(), dir, m)),
        }
    };
    let mut seen = vec![false; g.num_sites()];
    seen[sid as usize] = true;
    // (site, heading, next turn index)
    let mut stack: Vec<(u32, usize, usize)> = vec![(sid, 1, 0)];
    while let Some(top) = stack.last_mut() {
        let (v, heading, k) = *top;
        if k == 4 {
            stack.pop();
            continue;
        }
        top.2 += 1;
        let Some((w, dir, m)) = next(v, heading, k) else { continue };
        if m == LegMove::Land {
            let mut path: Vec<DualSite> = stack.iter().map(|&(s, _, _)| lat.site(s)).collect();
            path.push(lat.site(w));
            return Ok(Some(path));
        }
        if !seen[w as usize] {
            seen[w as usize] = true;
            stack.push((w, dir, 0));
        }
    }
    Ok(None)
}

/// Primal crossing and dual blocking on a quadrant window.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complementarity {
    /// The origin reaches the far rim (`x = n` or `y = n`).
    pub primal_crossing: bool,
    /// A `U` path runs from a dual site below the x-axis to one left of the
    /// y-axis.
    pub dual_blocking: bool,
}

impl Complementarity {
    pub fn holds(self) -> bool {
        self.primal_crossing != self.dual_blocking
    }
}

/// Evaluates both sides of the quadrant duality on a prebuilt dual lattice.
pub fn complementarity_on(lattice: &DualLattice, config: &Config) -> Result<Complementarity> {
    let Region::QuadrantBox { .. } = config.region() else {
        return Err(Error::InvalidRegion(format!("{} is not a quadrant window", config.region())));
    };
    let primal_crossing = crosses(config.lattice(), config);
    let u = dualize_on(lattice, config, DualVariant::U);
    let g = lattice.graph();
    let sources: Vec<u32> =
        (0..g.num_sites() as u32).filter(|&id| lattice.site(id).j == -1).collect();
    let dual_blocking =
        bfs_path(g, &u, &sources, |_, _| true, |id| lattice.site(id).i == -1).is_some();
    Ok(Complementarity { primal_crossing, dual_blocking })
}

pub fn complementarity(config: &Config) -> Result<Complementarity> {
    complementarity_on(&DualLattice::new(config.lattice())?, config)
}

/// True iff exactly one of primal crossing and dual blocking holds on the
/// quadrant window.
pub fn complementarity_check(config: &Config, window: Region) -> Result<bool> {
    if config.region() != window {
        return Err(Error::RegionMismatch(format!("config on {}, window {window}", config.region())));
    }
    complementarity(config).map(Complementarity::holds)
}

/// Largest edge count the exhaustive oracle accepts.
pub const EXHAUSTIVE_EDGE_CAP: usize = 24;

/// Event counts from a full enumeration, bucketed by the number of edges
/// whose coin took its probability-`p` outcome. Evaluates exactly at any `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCounts {
    pub edges: usize,
    /// `by_coins[k]` = configurations with `k` coin successes where the event holds.
    pub by_coins: Vec<u64>,
}

impl ExactCounts {
    pub fn configurations(&self) -> u64 {
        1u64 << self.edges
    }

    pub fn hits(&self) -> u64 {
        self.by_coins.iter().sum()
    }

    pub fn probability(&self, p: f64) -> f64 {
        let e = self.edges as i32;
        self.by_coins
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * p.powi(k as i32) * (1.0 - p).powi(e - k as i32))
            .sum()
    }
}

/// Enumerates all `2^E` configurations of the region and counts those where
/// `event` holds. The model fixes which orientation is each edge's coin
/// success; its `p` is not used.
pub fn exhaustive_counts<F>(model: ModelSpec, region: Region, event: F) -> Result<ExactCounts>
where
    F: Fn(&Config) -> bool + Sync,
{
    if !model.is_orientation_law() {
        return Err(Error::NotAnOrientationLaw(model.name()));
    }
    let lattice = Lattice::new(region)?;
    let e = lattice.num_edges();
    if e > EXHAUSTIVE_EDGE_CAP {
        return Err(Error::RegionTooLarge { edges: e, cap: EXHAUSTIVE_EDGE_CAP });
    }
    if model.is_planar() != region.is_planar() {
        return Err(Error::NotPlanar);
    }
    // forward = coin xor flip, for every orientation law
    let flip = (0..e).fold(0u64, |w, k| {
        w | ((model.forward_for(lattice.edge(k as u32), false) as u64) << k)
    });
    let total = 1u64 << e;
    let chunk = 1u64 << 10;
    let base = Config::new(lattice.clone(), model, Bits::zeros(e))?;
    let counts = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut local = vec![0u64; e + 1];
            let mut cfg = base.clone();
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                cfg.set_bits(Bits::from_word(e, idx ^ flip));
                if event(&cfg) {
                    local[idx.count_ones() as usize] += 1;
                }
            }
            local
        })
        .reduce(
            || vec![0u64; e + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(ExactCounts { edges: e, by_coins: counts })
}

/// Exact probability of `event` under `model` on `region`.
pub fn exhaustive_probability<F>(model: ModelSpec, region: Region, event: F) -> Result<f64>
where
    F: Fn(&Config) -> bool + Sync,
{
    let p = model.validate()?.p().ok_or(Error::NotAnOrientationLaw(model.name()))?;
    Ok(exhaustive_counts(model, region, event)?.probability(p))
}
