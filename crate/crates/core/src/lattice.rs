//! Lattice geometry: sites, edges, arcs, finite regions and an indexed
//! graph view of a region used by every sampler and search.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Site { x, y, z }
    }

    pub const fn planar(x: i32, y: i32) -> Self {
        Site { x, y, z: 0 }
    }

    pub fn coord(self, axis: Axis) -> i32 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn shifted(self, axis: Axis, by: i32) -> Site {
        let mut s = self;
        match axis {
            Axis::X => s.x += by,
            Axis::Y => s.y += by,
            Axis::Z => s.z += by,
        }
        s
    }

    /// Squared Euclidean norm.
    pub fn norm2(self) -> i64 {
        let (x, y, z) = (self.x as i64, self.y as i64, self.z as i64);
        x * x + y * y + z * z
    }

    /// Max-norm in the plane (the box radius the site sits on).
    pub fn radius(self) -> u32 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.z == 0 {
            write!(f, "({},{})", self.x, self.y)
        } else {
            write!(f, "({},{},{})", self.x, self.y, self.z)
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// An undirected lattice edge, keyed by its tail (the endpoint with the
/// smaller coordinate along `axis`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub tail: Site,
    pub axis: Axis,
}

impl Edge {
    pub fn new(tail: Site, axis: Axis) -> Self {
        Edge { tail, axis }
    }

    pub fn head(self) -> Site {
        self.tail.shifted(self.axis, 1)
    }

    pub fn is_planar(self) -> bool {
        self.axis != Axis::Z && self.tail.z == 0
    }

    /// The edge joining two adjacent sites, and whether `from -> to` is the
    /// forward direction.
    pub fn between(from: Site, to: Site) -> Option<(Edge, bool)> {
        let d = (to.x - from.x, to.y - from.y, to.z - from.z);
        let (axis, forward) = match d {
            (1, 0, 0) => (Axis::X, true),
            (-1, 0, 0) => (Axis::X, false),
            (0, 1, 0) => (Axis::Y, true),
            (0, -1, 0) => (Axis::Y, false),
            (0, 0, 1) => (Axis::Z, true),
            (0, 0, -1) => (Axis::Z, false),
            _ => return None,
        };
        let tail = if forward { from } else { to };
        Some((Edge { tail, axis }, forward))
    }

    /// Injective 64-bit key: x and y in 21-bit fields offset by 2^20, z in a
    /// 19-bit field offset by 2^18, axis in the low 3 bits.
    pub fn key(self) -> u64 {
        const OFF: i64 = 1 << 20;
        const ZOFF: i64 = 1 << 18;
        let x = (self.tail.x as i64 + OFF) as u64 & 0x1f_ffff;
        let y = (self.tail.y as i64 + OFF) as u64 & 0x1f_ffff;
        let z = (self.tail.z as i64 + ZOFF) as u64 & 0x7_ffff;
        (x << 43) | (y << 22) | (z << 3) | self.axis.index() as u64
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.tail, self.head())
    }
}

/// A directed edge. `forward` means the direction of increasing coordinate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub edge: Edge,
    pub forward: bool,
}

impl Arc {
    pub fn new(edge: Edge, forward: bool) -> Self {
        Arc { edge, forward }
    }

    pub fn between(from: Site, to: Site) -> Option<Arc> {
        Edge::between(from, to).map(|(edge, forward)| Arc { edge, forward })
    }

    pub fn from(self) -> Site {
        if self.forward {
            self.edge.tail
        } else {
            self.edge.head()
        }
    }

    pub fn to(self) -> Site {
        if self.forward {
            self.edge.head()
        } else {
            self.edge.tail
        }
    }

    pub fn reversed(self) -> Arc {
        Arc { edge: self.edge, forward: !self.forward }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from(), self.to())
    }
}

/// Finite lattice windows.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `[-n, n]^2`
    Box { n: u32 },
    /// `[0, n]^2`
    QuadrantBox { n: u32 },
    /// Sites with `inner <= max(|x|, |y|) <= outer`.
    Annulus { inner: u32, outer: u32 },
    /// `[-n, n]^2 x {-1, 0, 1}`
    SlabBox { n: u32 },
}

impl Region {
    pub fn validate(self) -> Result<Self> {
        match self {
            Region::Annulus { inner, outer } if inner >= outer => Err(Error::InvalidRegion(
                format!("annulus needs inner < outer, got {inner}:{outer}"),
            )),
            r if r.outer_radius() >= (1 << 19) => {
                Err(Error::InvalidRegion(format!("{r} is too large")))
            }
            r => Ok(r),
        }
    }

    pub fn is_planar(self) -> bool {
        !matches!(self, Region::SlabBox { .. })
    }

    pub fn outer_radius(self) -> u32 {
        match self {
            Region::Box { n } | Region::QuadrantBox { n } | Region::SlabBox { n } => n,
            Region::Annulus { outer, .. } => outer,
        }
    }

    pub fn contains(self, s: Site) -> bool {
        match self {
            Region::Box { n } => s.z == 0 && s.radius() <= n,
            Region::QuadrantBox { n } => {
                s.z == 0 && s.x >= 0 && s.y >= 0 && s.x as u32 <= n && s.y as u32 <= n
            }
            Region::Annulus { inner, outer } => {
                s.z == 0 && (inner..=outer).contains(&s.radius())
            }
            Region::SlabBox { n } => (-1..=1).contains(&s.z) && s.radius() <= n,
        }
    }

    /// Inclusive bounding box `(lo, hi)`.
    pub fn bounds(self) -> ([i32; 3], [i32; 3]) {
        let n = self.outer_radius() as i32;
        match self {
            Region::Box { .. } | Region::Annulus { .. } => ([-n, -n, 0], [n, n, 0]),
            Region::QuadrantBox { .. } => ([0, 0, 0], [n, n, 0]),
            Region::SlabBox { .. } => ([-n, -n, -1], [n, n, 1]),
        }
    }

    /// Sites in lexicographic `(x, y, z)` order.
    pub fn sites(self) -> Vec<Site> {
        let (lo, hi) = self.bounds();
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let s = Site::new(x, y, z);
                    if self.contains(s) {
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    fn ambient_neighbors(self, s: Site) -> impl Iterator<Item = Site> {
        let slab = !self.is_planar();
        let mut v = Vec::with_capacity(6);
        for axis in Axis::ALL {
            if axis == Axis::Z && !slab {
                continue;
            }
            for d in [-1, 1] {
                let t = s.shifted(axis, d);
                if axis == Axis::Z && !(-1..=1).contains(&t.z) {
                    continue;
                }
                v.push(t);
            }
        }
        v.into_iter()
    }

    /// Vertex boundary: sites with at least one neighbor outside the region.
    /// The ambient lattice is `Z^2` for planar regions and the slab
    /// `Z^2 x {-1, 0, 1}` for slab boxes.
    pub fn boundary(self) -> Vec<Site> {
        self.sites()
            .into_iter()
            .filter(|&s| self.ambient_neighbors(s).any(|t| !self.contains(t)))
            .collect()
    }

    /// Sites on the outer rim `max(|x|, |y|) = outer_radius`; the target set
    /// of every origin-to-boundary crossing.
    pub fn outer_boundary(self) -> Vec<Site> {
        let r = self.outer_radius();
        self.sites().into_iter().filter(|s| s.radius() == r).collect()
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Region::Box { n } => write!(f, "box:{n}"),
            Region::QuadrantBox { n } => write!(f, "quad:{n}"),
            Region::Annulus { inner, outer } => write!(f, "annulus:{inner}:{outer}"),
            Region::SlabBox { n } => write!(f, "slab:{n}"),
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRegion(format!("cannot parse region {s:?}"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let nums: Vec<u32> = parts
            .map(|p| p.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let region = match (kind, nums.as_slice()) {
            ("box", [n]) => Region::Box { n: *n },
            ("quad", [n]) => Region::QuadrantBox { n: *n },
            ("annulus", [inner, outer]) => Region::Annulus { inner: *inner, outer: *outer },
            ("slab", [n]) => Region::SlabBox { n: *n },
            _ => return Err(bad()),
        };
        region.validate()
    }
}

/// Every edge with both endpoints in the region, ordered lexicographically by
/// tail and then by axis. This order is the bit order of serialized configs.
pub fn enumerate_edges(region: Region) -> Vec<Edge> {
    let mut out = Vec::new();
    for tail in region.sites() {
        for axis in Axis::ALL {
            if region.contains(tail.shifted(axis, 1)) {
                out.push(Edge { tail, axis });
            }
        }
    }
    out
}

/// One move out of a site along an edge.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub edge: u32,
    pub to: u32,
    /// The move goes tail -> head.
    pub forward: bool,
}

const NONE: u32 = u32::MAX;

/// Indexed graph over a set of sites and unit edges. Cheap to clone; the
/// index is shared.
#[derive(Clone, Debug)]
pub struct Lattice(std::sync::Arc<Graph>);

impl std::ops::Deref for Lattice {
    type Target = Graph;

    fn deref(&self) -> &Graph {
        &self.0
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        std::sync::Arc::ptr_eq(&self.0, &other.0)
            || (self.region == other.region && self.sites == other.sites && self.edges == other.edges)
    }
}

impl Lattice {
    pub fn new(region: Region) -> Result<Self> {
        let region = region.validate()?;
        let mut g = Graph::from_edges(region.sites(), enumerate_edges(region));
        g.region = Some(region);
        Ok(Lattice(std::sync::Arc::new(g)))
    }

    /// Builds a graph from explicit sites and edges; edge ids follow the order
    /// of `edges`. Both endpoints of every edge must be listed in `sites`.
    pub fn from_edges(sites: Vec<Site>, edges: Vec<Edge>) -> Self {
        Lattice(std::sync::Arc::new(Graph::from_edges(sites, edges)))
    }
}

#[derive(Debug)]
pub struct Graph {
    region: Option<Region>,
    lo: [i32; 3],
    dims: [usize; 3],
    index: Vec<u32>,
    sites: Vec<Site>,
    edges: Vec<Edge>,
    edge_at: Vec<u32>,
    adj_start: Vec<u32>,
    adj: Vec<Step>,
}

impl Graph {
    fn from_edges(mut sites: Vec<Site>, edges: Vec<Edge>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        let mut lo = [i32::MAX; 3];
        let mut hi = [i32::MIN; 3];
        for s in &sites {
            for (k, c) in [s.x, s.y, s.z].into_iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        if sites.is_empty() {
            lo = [0; 3];
            hi = [-1; 3];
        }
        let dims = [0, 1, 2].map(|k| (hi[k] - lo[k] + 1).max(0) as usize);
        let mut lat = Graph {
            region: None,
            lo,
            dims,
            index: vec![NONE; dims[0] * dims[1] * dims[2]],
            edge_at: vec![NONE; sites.len() * 3],
            sites,
            edges,
            adj_start: Vec::new(),
            adj: Vec::new(),
        };
        for (i, s) in lat.sites.iter().enumerate() {
            let d = lat.dense(*s).expect("site inside its own bounds");
            lat.index[d] = i as u32;
        }
        let mut degree = vec![0u32; lat.sites.len()];
        for (e, edge) in lat.edges.iter().enumerate() {
            let t = lat.site_id(edge.tail).expect("edge tail listed");
            let h = lat.site_id(edge.head()).expect("edge head listed");
            lat.edge_at[t as usize * 3 + edge.axis.index()] = e as u32;
            degree[t as usize] += 1;
            degree[h as usize] += 1;
        }
        let mut start = Vec::with_capacity(lat.sites.len() + 1);
        let mut acc = 0u32;
        for d in &degree {
            start.push(acc);
            acc += d;
        }
        start.push(acc);
        let mut fill = start.clone();
        let mut adj = vec![Step { edge: 0, to: 0, forward: true }; acc as usize];
        for (e, edge) in lat.edges.iter().enumerate() {
            let t = lat.site_id(edge.tail).unwrap();
            let h = lat.site_id(edge.head()).unwrap();
            adj[fill[t as usize] as usize] = Step { edge: e as u32, to: h, forward: true };
            fill[t as usize] += 1;
            adj[fill[h as usize] as usize] = Step { edge: e as u32, to: t, forward: false };
            fill[h as usize] += 1;
        }
        lat.adj_start = start;
        lat.adj = adj;
        lat
    }

    fn dense(&self, s: Site) -> Option<usize> {
        let c = [s.x, s.y, s.z];
        let mut idx = 0usize;
        for k in 0..3 {
            let off = c[k] as i64 - self.lo[k] as i64;
            if off < 0 || off >= self.dims[k] as i64 {
                return None;
            }
            idx = idx * self.dims[k] + off as usize;
        }
        Some(idx)
    }

    /// The region this lattice was built from, if any.
    pub fn region(&self) -> Option<Region> {
        self.region
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn site(&self, id: u32) -> Site {
        self.sites[id as usize]
    }

    pub fn edge(&self, id: u32) -> Edge {
        self.edges[id as usize]
    }

    pub fn site_id(&self, s: Site) -> Option<u32> {
        self.dense(s).map(|d| self.index[d]).filter(|&i| i != NONE)
    }

    pub fn edge_id(&self, e: Edge) -> Option<u32> {
        let t = self.site_id(e.tail)?;
        let id = self.edge_at[t as usize * 3 + e.axis.index()];
        (id != NONE).then_some(id)
    }

    /// Edge id joining `from` and `to`, and whether `from -> to` is forward.
    pub fn edge_between(&self, from: Site, to: Site) -> Option<(u32, bool)> {
        let (edge, forward) = Edge::between(from, to)?;
        self.edge_id(edge).map(|id| (id, forward))
    }

    #[inline]
    pub fn steps(&self, site: u32) -> &[Step] {
        let a = self.adj_start[site as usize] as usize;
        let b = self.adj_start[site as usize + 1] as usize;
        &self.adj[a..b]
    }

    /// Membership mask over site ids.
    pub fn mask<I: IntoIterator<Item = Site>>(&self, sites: I) -> Vec<bool> {
        let mut m = vec![false; self.sites.len()];
        for s in sites {
            if let Some(id) = self.site_id(s) {
                m[id as usize] = true;
            }
        }
        m
    }
}
