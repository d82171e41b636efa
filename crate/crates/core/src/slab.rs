//! Slab percolation on `Z^2 x {-1, 0, 1}` and its reduction to an enriched
//! middle plane.
//!
//! Every edge off the middle plane gets an availability state from the same
//! uniform that orients it. With `Y = 1 - U` (`U` the orientation uniform,
//! so the edge points forward iff `Y > 1 - p`):
//!
//! * backward available iff `Y <= 1 - p`,
//! * forward available iff `1 - p < Y <= 2 - 2p`,
//! * neither otherwise.
//!
//! Each direction is available with probability `1 - p`, and an available
//! direction is always the true one. A middle-plane site is black when
//! `x + y` is even; a black site's auxiliary paths climb to plane `+1`, step
//! once and come back down, a white site's go through plane `-1`. An
//! auxiliary path whose three arcs are all available adds an arc to the
//! middle plane.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::config::{edge_uniform, ArcSet, Bits, Config};
use crate::error::{Error, Result};
use crate::estimators::{cell_seed, count_cell, Estimate, McOptions, DEFAULT_LEVEL};
use crate::lattice::{Arc, Axis, Edge, Lattice, Region, Site};
use crate::model::ModelSpec;
use crate::reach::{bfs_path, crosses, ArcSource};
use crate::rng;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Black,
    White,
}

/// Chess colouring of the middle plane (the `z` coordinate is ignored).
pub fn color(site: Site) -> Color {
    if (site.x + site.y).rem_euclid(2) == 0 {
        Color::Black
    } else {
        Color::White
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Direction {
    pub const ALL: [Direction; 4] =
        [Direction::PlusX, Direction::MinusX, Direction::PlusY, Direction::MinusY];

    pub fn offset(self) -> (i32, i32) {
        match self {
            Direction::PlusX => (1, 0),
            Direction::MinusX => (-1, 0),
            Direction::PlusY => (0, 1),
            Direction::MinusY => (0, -1),
        }
    }

    pub fn between(from: Site, to: Site) -> Option<Direction> {
        Direction::ALL
            .into_iter()
            .find(|d| (from.x + d.offset().0, from.y + d.offset().1) == (to.x, to.y))
    }
}

/// Three-arc detour from a middle-plane site to a neighbour through an outer
/// plane.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AuxPath {
    pub source: Site,
    pub direction: Direction,
    /// The four sites visited, source first.
    pub sites: [Site; 4],
}

impl AuxPath {
    pub fn new(source: Site, direction: Direction) -> Result<Self> {
        if source.z != 0 {
            return Err(Error::InvalidRegion(format!("{source} is not in the middle plane")));
        }
        let z = match color(source) {
            Color::Black => 1,
            Color::White => -1,
        };
        let (dx, dy) = direction.offset();
        let (x, y) = (source.x, source.y);
        Ok(AuxPath {
            source,
            direction,
            sites: [
                source,
                Site::new(x, y, z),
                Site::new(x + dx, y + dy, z),
                Site::new(x + dx, y + dy, 0),
            ],
        })
    }

    pub fn head(&self) -> Site {
        self.sites[3]
    }

    /// The outer plane used: `+1` or `-1`.
    pub fn plane(&self) -> i32 {
        self.sites[1].z
    }

    pub fn arcs(&self) -> [Arc; 3] {
        [0, 1, 2].map(|k| Arc::between(self.sites[k], self.sites[k + 1]).expect("adjacent sites"))
    }

    pub fn edges(&self) -> [Edge; 3] {
        self.arcs().map(|a| a.edge)
    }
}

/// The four auxiliary paths out of a middle-plane site.
pub fn aux_paths(source: Site) -> Result<[AuxPath; 4]> {
    AuxPath::new(source, Direction::PlusX)?;
    Ok(Direction::ALL.map(|d| AuxPath::new(source, d).expect("planar source")))
}

/// Auxiliary paths that share at least one edge with `path`; their presence
/// indicators are the only ones `path`'s indicator depends on.
pub fn dependents(path: &AuxPath) -> Vec<AuxPath> {
    let mine: HashSet<Edge> = path.edges().into_iter().collect();
    let s = path.source;
    let mut out = Vec::new();
    for dx in -3..=3 {
        for dy in -3..=3 {
            let src = Site::planar(s.x + dx, s.y + dy);
            for q in aux_paths(src).expect("planar source") {
                if q != *path && q.edges().iter().any(|e| mine.contains(e)) {
                    out.push(q);
                }
            }
        }
    }
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Availability {
    Forward,
    Backward,
    Neither,
}

impl Availability {
    pub fn allows(self, forward: bool) -> bool {
        matches!(
            (self, forward),
            (Availability::Forward, true) | (Availability::Backward, false)
        )
    }
}

/// State of an edge whose orientation uniform is `u` (forward iff `u < p`).
/// Needs `p >= 1/2`.
#[inline]
pub fn availability(u: f64, p: f64) -> Availability {
    if u >= p {
        Availability::Backward
    } else if u >= 2.0 * p - 1.0 {
        Availability::Forward
    } else {
        Availability::Neither
    }
}

fn is_middle_edge(e: Edge) -> bool {
    e.tail.z == 0 && e.axis != Axis::Z
}

fn check_coupling_p(p: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&p) {
        return Err(Error::CouplingRange(p));
    }
    Ok(p)
}

/// Availability state of every edge off the middle plane of a slab box.
#[derive(Clone, Debug, PartialEq)]
pub struct AvailabilityMap {
    lattice: Lattice,
    p: f64,
    states: Vec<Option<Availability>>,
}

impl AvailabilityMap {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `None` for middle-plane edges.
    pub fn get(&self, edge: u32) -> Option<Availability> {
        self.states[edge as usize]
    }

    pub fn arc_available(&self, arc: Arc) -> bool {
        self.lattice
            .edge_id(arc.edge)
            .and_then(|id| self.get(id))
            .is_some_and(|s| s.allows(arc.forward))
    }

    pub fn path_available(&self, path: &AuxPath) -> bool {
        path.arcs().into_iter().all(|a| self.arc_available(a))
    }

    pub fn states(&self) -> impl Iterator<Item = (Edge, Availability)> + '_ {
        self.lattice
            .edges()
            .iter()
            .zip(&self.states)
            .filter_map(|(e, s)| s.map(|s| (*e, s)))
    }
}

/// Samples the slab law on a slab box together with the availability states
/// driven by the same uniforms. The config equals
/// `sample_config(Grimmett3DSlab { p }, region, seed)`.
pub fn sample_coupled(p: f64, region: Region, seed: u64) -> Result<(Config, AvailabilityMap)> {
    let p = check_coupling_p(p)?;
    let Region::SlabBox { .. } = region else {
        return Err(Error::InvalidRegion(format!("{region} is not a slab box")));
    };
    let lattice = Lattice::new(region)?;
    let config = Config::sample(&lattice, ModelSpec::Grimmett3DSlab { p }, seed)?;
    let states = lattice
        .edges()
        .iter()
        .map(|&e| (!is_middle_edge(e)).then(|| availability(edge_uniform(e, seed), p)))
        .collect();
    Ok((config, AvailabilityMap { lattice, p, states }))
}

/// Middle-plane arcs of the slab config plus every present auxiliary arc.
#[derive(Clone, Debug, PartialEq)]
pub struct EnrichedArcSet {
    arcs: ArcSet,
    middle: Bits,
    aux_forward: Bits,
    aux_backward: Bits,
}

impl EnrichedArcSet {
    /// Arcs on `Box(n)` (the middle plane).
    pub fn arcs(&self) -> &ArcSet {
        &self.arcs
    }

    pub fn lattice(&self) -> &Lattice {
        self.arcs.lattice()
    }

    /// Orientation of the middle-plane slab edge.
    pub fn middle_forward(&self, edge: u32) -> bool {
        self.middle.get(edge as usize)
    }

    pub fn aux_present(&self, edge: u32, forward: bool) -> bool {
        if forward {
            self.aux_forward.get(edge as usize)
        } else {
            self.aux_backward.get(edge as usize)
        }
    }

    pub fn aux_count(&self) -> usize {
        self.aux_forward.count_ones() + self.aux_backward.count_ones()
    }

    /// Two candidate auxiliary arcs per middle-plane edge.
    pub fn candidates(&self) -> usize {
        2 * self.middle.len()
    }
}

impl ArcSource for EnrichedArcSet {
    #[inline]
    fn has_arc(&self, edge: u32, forward: bool) -> bool {
        self.arcs.has_arc(edge, forward)
    }
}

/// Builds the enriched middle plane from a coupled sample.
pub fn enrich(avail: &AvailabilityMap, config: &Config) -> Result<EnrichedArcSet> {
    if avail.lattice != *config.lattice() {
        return Err(Error::RegionMismatch(format!(
            "availability on {}, config on {}",
            avail.lattice.region().map(|r| r.to_string()).unwrap_or_default(),
            config.region()
        )));
    }
    let Region::SlabBox { n } = config.region() else {
        return Err(Error::InvalidRegion(format!("{} is not a slab box", config.region())));
    };
    let plane = Lattice::new(Region::Box { n })?;
    let slab = config.lattice();
    let e = plane.num_edges();
    let mut middle = Bits::zeros(e);
    let mut aux_forward = Bits::zeros(e);
    let mut aux_backward = Bits::zeros(e);
    let mut arcs = ArcSet::empty(&plane);
    for (k, edge) in plane.edges().iter().enumerate() {
        let id = slab.edge_id(*edge).expect("middle plane lies in the slab");
        let fwd = config.forward(id);
        middle.set(k, fwd);
        let (t, h) = (edge.tail, edge.head());
        let f = avail.path_available(&aux_path_between(t, h));
        let b = avail.path_available(&aux_path_between(h, t));
        aux_forward.set(k, f);
        aux_backward.set(k, b);
        arcs.set(k as u32, true, fwd || f);
        arcs.set(k as u32, false, !fwd || b);
    }
    Ok(EnrichedArcSet { arcs, middle, aux_forward, aux_backward })
}

fn aux_path_between(from: Site, to: Site) -> AuxPath {
    let d = Direction::between(from, to).expect("adjacent planar sites");
    AuxPath::new(from, d).expect("planar source")
}

/// `(1 - p)^3 p^6`.
pub fn rho(p: f64) -> f64 {
    (1.0 - p).powi(3) * p.powi(6)
}

/// Origin to the outer rim of the slab box.
pub fn slab_reach(config: &Config) -> bool {
    crosses(config.lattice(), config)
}

/// Origin to the outer rim of the enriched middle plane; returns a shortest
/// witness path.
pub fn enriched_reach(enriched: &EnrichedArcSet) -> Option<Vec<Site>> {
    let lat = enriched.lattice();
    let origin = lat.site_id(Site::ORIGIN)?;
    let r = lat.region()?.outer_radius();
    bfs_path(lat, enriched, &[origin], |_, _| true, |u| lat.site(u).radius() == r)
        .map(|p| p.into_iter().map(|id| lat.site(id)).collect())
}

/// Replaces each step of a middle-plane path that is not a middle-plane arc
/// by its auxiliary path.
pub fn lift(enriched: &EnrichedArcSet, path: &[Site]) -> Result<Vec<Site>> {
    let lat = enriched.lattice();
    let mut out: Vec<Site> = path.first().copied().into_iter().collect();
    for w in path.windows(2) {
        let (id, fwd) = lat
            .edge_between(w[0], w[1])
            .ok_or_else(|| Error::Format(format!("{} -> {} is not a lattice step", w[0], w[1])))?;
        if enriched.middle_forward(id) == fwd {
            out.push(w[1]);
        } else if enriched.aux_present(id, fwd) {
            out.extend_from_slice(&aux_path_between(w[0], w[1]).sites[1..]);
        } else {
            return Err(Error::Format(format!("{} -> {} is not an enriched arc", w[0], w[1])));
        }
    }
    Ok(out)
}

/// Every step of `path` is an arc of `config`.
pub fn is_directed_path(config: &Config, path: &[Site]) -> bool {
    path.windows(2).all(|w| match config.lattice().edge_between(w[0], w[1]) {
        Some((id, fwd)) => config.forward(id) == fwd,
        None => false,
    })
}

/// Outcome of the enriched-versus-slab comparison on one coupled sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftReport {
    pub enriched_reach: bool,
    pub slab_reach: bool,
    /// The lifted witness is a directed path of the slab config.
    pub lift_valid: bool,
    pub aux_used: usize,
    pub path_len: usize,
    pub lifted_len: usize,
}

impl LiftReport {
    pub fn sound(&self) -> bool {
        !self.enriched_reach || (self.lift_valid && self.slab_reach)
    }
}

pub fn lift_check(config: &Config, enriched: &EnrichedArcSet) -> Result<LiftReport> {
    let slab_reach = slab_reach(config);
    let Some(path) = enriched_reach(enriched) else {
        return Ok(LiftReport {
            enriched_reach: false,
            slab_reach,
            lift_valid: false,
            aux_used: 0,
            path_len: 0,
            lifted_len: 0,
        });
    };
    let lifted = lift(enriched, &path)?;
    let aux_used = (lifted.len() - path.len()) / 2;
    Ok(LiftReport {
        enriched_reach: true,
        slab_reach,
        lift_valid: is_directed_path(config, &lifted),
        aux_used,
        path_len: path.len() - 1,
        lifted_len: lifted.len() - 1,
    })
}

/// Enriched-plane reach on coupled samples of `SlabBox(n)`, plus the number
/// of samples whose witness failed to lift to a slab path (always 0 unless
/// something is broken).
pub fn enriched_reach_cell(
    p: f64,
    n: u32,
    samples: u64,
    seed: u64,
    (p_index, n_index): (u64, u64),
    opts: &McOptions,
) -> Result<(Estimate, u64)> {
    check_coupling_p(p)?;
    let region = Region::SlabBox { n }.validate()?;
    let cell = cell_seed(seed, p_index, n_index, opts);
    let failures = std::sync::atomic::AtomicU64::new(0);
    let hits = count_cell(samples, cell, |s| {
        let (cfg, avail) = sample_coupled(p, region, s).expect("validated");
        let enr = enrich(&avail, &cfg).expect("same sample");
        let rep = lift_check(&cfg, &enr).expect("enriched path");
        if !rep.sound() {
            failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
        rep.enriched_reach
    });
    Ok((Estimate::from_counts(hits, samples, opts.level)?, failures.into_inner()))
}

/// A finite set of edges with three-state availability and a list of
/// auxiliary-path events over them. Enumerates the `3^k` joint states.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPatch {
    pub edges: Vec<Edge>,
    pub paths: Vec<AuxPath>,
    /// Per event: `(edge index, direction)` for each of its arcs.
    events: Vec<Vec<(usize, bool)>>,
}

impl LocalPatch {
    pub fn new(paths: Vec<AuxPath>) -> Self {
        let mut edges: Vec<Edge> = Vec::new();
        let events = paths
            .iter()
            .map(|p| {
                p.arcs()
                    .into_iter()
                    .map(|a| {
                        let k = edges.iter().position(|e| *e == a.edge).unwrap_or_else(|| {
                            edges.push(a.edge);
                            edges.len() - 1
                        });
                        (k, a.forward)
                    })
                    .collect()
            })
            .collect();
        LocalPatch { edges, paths, events }
    }

    /// A path followed by every path it depends on.
    pub fn neighbourhood(path: AuxPath) -> Self {
        let mut paths = vec![path];
        paths.extend(dependents(&path));
        LocalPatch::new(paths)
    }

    /// Exact probability of each joint outcome of the events, indexed by the
    /// bitmask of events that hold.
    pub fn outcome_masses(&self, p: f64) -> Result<Vec<f64>> {
        let q = 1.0 - check_coupling_p(p)?;
        let m = self.events.len();
        assert!(m <= 16, "too many events for a dense outcome table");
        // per edge, events killed by each state: [forward available,
        // backward available, neither]
        let mut kills = vec![[0u32; 3]; self.edges.len()];
        for (i, ev) in self.events.iter().enumerate() {
            for &(k, fwd) in ev {
                kills[k][2] |= 1 << i;
                kills[k][if fwd { 1 } else { 0 }] |= 1 << i;
            }
        }
        let weights = [q, q, 1.0 - 2.0 * q];
        let mut masses = vec![0.0; 1 << m];
        fn walk(k: usize, alive: u32, w: f64, kills: &[[u32; 3]], weights: &[f64; 3], out: &mut [f64]) {
            if w == 0.0 {
                return;
            }
            if k == kills.len() {
                out[alive as usize] += w;
                return;
            }
            for s in 0..3 {
                walk(k + 1, alive & !kills[k][s], w * weights[s], kills, weights, out);
            }
        }
        walk(0, (1u32 << m) - 1, 1.0, &kills, &weights, &mut masses);
        Ok(masses)
    }

    /// Indicator of each event for the given edge states.
    pub fn outcome(&self, states: &[Availability]) -> u32 {
        self.events.iter().enumerate().fold(0, |mask, (i, ev)| {
            if ev.iter().all(|&(k, fwd)| states[k].allows(fwd)) {
                mask | 1 << i
            } else {
                mask
            }
        })
    }
}

/// Exact `P(event 0 | every other event fails)` on the neighbourhood of the
/// `+x` auxiliary path at the origin.
pub fn exact_conditional(p: f64) -> Result<f64> {
    let path = AuxPath::new(Site::ORIGIN, Direction::PlusX)?;
    let patch = LocalPatch::neighbourhood(path);
    let masses = patch.outcome_masses(p)?;
    let den = masses[0] + masses[1];
    if den <= 0.0 {
        return Err(Error::DegenerateConditioning);
    }
    Ok(masses[1] / den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBound {
    pub p: f64,
    pub rho: f64,
    pub exact: f64,
    /// Rejection-sampling estimate; `None` when no sample met the condition.
    pub estimate: Option<Estimate>,
    pub holds: bool,
}

/// Conditional presence of one auxiliary arc given that all arcs sharing an
/// edge with it are absent, exactly and by rejection sampling.
pub fn conditional_bound_check(p: f64, samples: u64, seed: u64) -> Result<ConditionalBound> {
    let exact = exact_conditional(p)?;
    let path = AuxPath::new(Site::ORIGIN, Direction::PlusX)?;
    let patch = LocalPatch::neighbourhood(path);
    let others = !1u32 & ((1 << patch.paths.len()) - 1);
    let (mut hits, mut accepted) = (0u64, 0u64);
    let mut states = vec![Availability::Neither; patch.edges.len()];
    for i in 0..samples {
        let s = rng::derive(seed, i);
        for (k, e) in patch.edges.iter().enumerate() {
            states[k] = availability(edge_uniform(*e, s), p);
        }
        let out = patch.outcome(&states);
        if out & others == 0 {
            accepted += 1;
            hits += (out & 1) as u64;
        }
    }
    let estimate = if accepted > 0 { Some(Estimate::from_counts(hits, accepted, DEFAULT_LEVEL)?) } else { None };
    let r = rho(p);
    Ok(ConditionalBound { p, rho: r, exact, estimate, holds: exact >= r })
}

/// For every nonempty subset `I` of the four auxiliary events at the origin:
/// `(I as a bitmask, P(all of I), product of P(A_i))`.
pub fn positive_association_table(p: f64) -> Result<Vec<(u32, f64, f64)>> {
    let patch = LocalPatch::new(aux_paths(Site::ORIGIN)?.to_vec());
    let masses = patch.outcome_masses(p)?;
    let joint = |set: u32| -> f64 {
        masses.iter().enumerate().filter(|(m, _)| *m as u32 & set == set).map(|(_, w)| w).sum()
    };
    Ok((1u32..16)
        .map(|set| {
            let prod: f64 = (0..4).filter(|i| set >> i & 1 == 1).map(|i| joint(1 << i)).product();
            (set, joint(set), prod)
        })
        .collect())
}

pub fn positive_association_check(p: f64) -> Result<bool> {
    Ok(positive_association_table(p)?
        .iter()
        .all(|&(_, joint, prod)| joint >= prod - 1e-15))
}

/// Middle-plane auxiliary paths on `Box(n)` that share no edges: `+x` from
/// black sources, `-x` from white ones.
pub fn independent_aux_paths(n: u32) -> Vec<AuxPath> {
    let window = Region::Box { n };
    let n = n as i32;
    let mut out = Vec::new();
    for x in -n..=n {
        for y in -n..=n {
            let s = Site::planar(x, y);
            let d = match color(s) {
                Color::Black => Direction::PlusX,
                Color::White => Direction::MinusX,
            };
            let path = AuxPath::new(s, d).expect("planar source");
            if window.contains(path.head()) {
                out.push(path);
            }
        }
    }
    out
}

/// Fraction of present auxiliary paths over an edge-disjoint family on
/// `SlabBox(n)`, pooled over `samples` coupled samples. The pooled
/// indicators are independent, so the interval is exact binomial.
pub fn aux_density(p: f64, n: u32, samples: u64, seed: u64) -> Result<Estimate> {
    check_coupling_p(p)?;
    let family = independent_aux_paths(n);
    let mut hits = 0u64;
    for i in 0..samples {
        let s = rng::derive(seed, i);
        hits += family
            .iter()
            .filter(|path| {
                path.arcs()
                    .into_iter()
                    .all(|a| availability(edge_uniform(a.edge, s), p).allows(a.forward))
            })
            .count() as u64;
    }
    Estimate::from_counts(hits, samples * family.len() as u64, DEFAULT_LEVEL)
}
