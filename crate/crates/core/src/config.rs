//! Sampled environments: one orientation per edge ([`Config`]) or an
//! independent set of arcs ([`ArcSet`]), plus their JSON wire format.
//!
//! Wire format. Bits follow [`enumerate_edges`](crate::lattice::enumerate_edges)
//! order and are packed most-significant-bit first: bit `i` lives in byte
//! `i / 8` under mask `0x80 >> (i % 8)`. Trailing pad bits are zero. Bytes are
//! lowercase hex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Arc, Edge, Lattice, Region, Site};
use crate::model::ModelSpec;
use crate::reach::ArcSource;
use crate::rng;

/// Fixed-length bit string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            if f(i) {
                b.set(i, true);
            }
        }
        b
    }

    /// Low `len` bits of `word`, bit `i` = `(word >> i) & 1`.
    pub fn from_word(len: usize, word: u64) -> Self {
        debug_assert!(len <= 64);
        let mut b = Bits::zeros(len);
        if len > 0 {
            b.words[0] = if len == 64 { word } else { word & ((1u64 << len) - 1) };
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        Bits::from_fn(self.len, |i| !self.get(i))
    }

    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        hex::encode(bytes)
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Format(e.to_string()))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "expected {} hex bytes for {len} bits, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut b = Bits::zeros(len);
        for (i, byte) in bytes.iter().enumerate() {
            for k in 0..8 {
                let idx = i * 8 + k;
                let on = byte & (0x80 >> k) != 0;
                if idx < len {
                    b.set(idx, on);
                } else if on {
                    return Err(Error::Format("nonzero pad bit".into()));
                }
            }
        }
        Ok(b)
    }
}

/// One orientation per edge of a region. Bit `i` is true when edge `i` is
/// oriented forward (increasing coordinate).
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    lattice: Lattice,
    model: ModelSpec,
    bits: Bits,
}

impl Config {
    pub fn new(lattice: Lattice, model: ModelSpec, bits: Bits) -> Result<Self> {
        if bits.len() != lattice.num_edges() {
            return Err(Error::Format(format!(
                "{} bits for {} edges",
                bits.len(),
                lattice.num_edges()
            )));
        }
        if lattice.region().is_none() {
            return Err(Error::InvalidRegion("config lattice must come from a region".into()));
        }
        Ok(Config { lattice, model, bits })
    }

    /// Builds a config from a per-edge orientation rule.
    pub fn from_fn(lattice: &Lattice, model: ModelSpec, f: impl Fn(Edge) -> bool) -> Self {
        let bits = Bits::from_fn(lattice.num_edges(), |i| f(lattice.edge(i as u32)));
        Config { lattice: lattice.clone(), model, bits }
    }

    /// Every edge set by its coin outcome (true = probability-`p` outcome).
    pub fn from_coins(lattice: &Lattice, model: ModelSpec, coin: impl Fn(Edge) -> bool) -> Self {
        Config::from_fn(lattice, model, |e| model.forward_for(e, coin(e)))
    }

    /// Draws each edge's coin from the counter-based generator; see
    /// [`edge_coin`].
    pub fn sample(lattice: &Lattice, model: ModelSpec, seed: u64) -> Result<Self> {
        let model = model.validate()?;
        if !model.is_orientation_law() {
            return Err(Error::NotAnOrientationLaw(model.name()));
        }
        let region = lattice.region().ok_or(Error::NotPlanar)?;
        if model.is_planar() != region.is_planar() {
            return Err(Error::NotPlanar);
        }
        Ok(Config::from_coins(lattice, model, |e| edge_coin(model, e, seed)))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn region(&self) -> Region {
        self.lattice.region().expect("config lattice has a region")
    }

    pub fn model(&self) -> ModelSpec {
        self.model
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub(crate) fn set_bits(&mut self, bits: Bits) {
        debug_assert_eq!(bits.len(), self.bits.len());
        self.bits = bits;
    }

    pub fn forward(&self, edge: u32) -> bool {
        self.bits.get(edge as usize)
    }

    pub fn set_forward(&mut self, edge: u32, forward: bool) {
        self.bits.set(edge as usize, forward);
    }

    /// Orients the edge between two adjacent sites as `from -> to`.
    pub fn set_arc(&mut self, from: Site, to: Site) -> Result<()> {
        let (id, fwd) = self
            .lattice
            .edge_between(from, to)
            .ok_or(Error::SiteOutsideRegion(to))?;
        self.set_forward(id, fwd);
        Ok(())
    }

    pub fn arc(&self, edge: u32) -> Arc {
        Arc::new(self.lattice.edge(edge), self.forward(edge))
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.lattice.num_edges() as u32).map(|e| self.arc(e))
    }

    /// Whether the edge's coin came up with its probability-`p` outcome.
    pub fn coin(&self, edge: u32) -> bool {
        self.model.coin_for(self.lattice.edge(edge), self.forward(edge))
    }

    pub fn coin_count(&self) -> usize {
        (0..self.lattice.num_edges() as u32).filter(|&e| self.coin(e)).count()
    }

    /// Every arc reversed. Maps the Grimmett law at `p` onto the law at `1 - p`.
    pub fn reversed(&self) -> Config {
        let model = self.model.with_p(1.0 - self.model.p().unwrap_or(0.5));
        Config { lattice: self.lattice.clone(), model, bits: self.bits.complement() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ConfigWire {
            format: CONFIG_FORMAT.into(),
            region: self.region(),
            model: self.model,
            edges: self.bits.len(),
            bits: self.bits.to_hex(),
        })
        .expect("config serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: ConfigWire = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if w.format != CONFIG_FORMAT {
            return Err(Error::Format(format!("unknown format {:?}", w.format)));
        }
        let lattice = Lattice::new(w.region)?;
        if w.edges != lattice.num_edges() {
            return Err(Error::Format(format!("edge count {} does not match {}", w.edges, w.region)));
        }
        let bits = Bits::from_hex(w.edges, &w.bits)?;
        Config::new(lattice, w.model.validate()?, bits)
    }
}

impl ArcSource for Config {
    #[inline]
    fn has_arc(&self, edge: u32, forward: bool) -> bool {
        self.bits.get(edge as usize) == forward
    }
}

const CONFIG_FORMAT: &str = "oriperc.config.v1";
const ARCSET_FORMAT: &str = "oriperc.arcset.v1";

#[derive(Serialize, Deserialize)]
struct ConfigWire {
    format: String,
    region: Region,
    model: ModelSpec,
    edges: usize,
    bits: String,
}

#[derive(Serialize, Deserialize)]
struct ArcSetWire {
    format: String,
    region: Region,
    edges: usize,
    forward: String,
    backward: String,
}

/// The uniform behind the orientation coin of `edge` under `seed`.
#[inline]
pub fn edge_uniform(edge: Edge, seed: u64) -> f64 {
    rng::uniform(seed, edge.key(), rng::STREAM_ORIENT)
}

/// The probability-`p` coin of `edge` under `seed`: `edge_uniform < p`.
#[inline]
pub fn edge_coin(model: ModelSpec, edge: Edge, seed: u64) -> bool {
    edge_uniform(edge, seed) < model.p().unwrap_or(0.0)
}

/// Samples an orientation law on a region.
pub fn sample_config(model: ModelSpec, region: Region, seed: u64) -> Result<Config> {
    Config::sample(&Lattice::new(region)?, model, seed)
}

/// Zero, one or two arcs per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSet {
    lattice: Lattice,
    forward: Bits,
    backward: Bits,
}

impl ArcSet {
    pub fn new(lattice: Lattice, forward: Bits, backward: Bits) -> Result<Self> {
        let n = lattice.num_edges();
        if forward.len() != n || backward.len() != n {
            return Err(Error::Format("arc bit strings do not match the edge count".into()));
        }
        Ok(ArcSet { lattice, forward, backward })
    }

    pub fn empty(lattice: &Lattice) -> Self {
        let n = lattice.num_edges();
        ArcSet { lattice: lattice.clone(), forward: Bits::zeros(n), backward: Bits::zeros(n) }
    }

    pub fn from_config(config: &Config) -> Self {
        ArcSet {
            lattice: config.lattice().clone(),
            forward: config.bits().clone(),
            backward: config.bits().complement(),
        }
    }

    pub fn sample(lattice: &Lattice, a: f64, b: f64, seed: u64) -> Result<Self> {
        ModelSpec::IndependentArcs { a, b }.validate()?;
        if !lattice.region().is_some_and(Region::is_planar) {
            return Err(Error::NotPlanar);
        }
        let n = lattice.num_edges();
        let key = |i: usize| lattice.edge(i as u32).key();
        Ok(ArcSet {
            lattice: lattice.clone(),
            forward: Bits::from_fn(n, |i| rng::coin(seed, key(i), rng::STREAM_FORWARD_ARC, a)),
            backward: Bits::from_fn(n, |i| rng::coin(seed, key(i), rng::STREAM_BACKWARD_ARC, b)),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn forward_bits(&self) -> &Bits {
        &self.forward
    }

    pub fn backward_bits(&self) -> &Bits {
        &self.backward
    }

    pub fn set(&mut self, edge: u32, forward: bool, present: bool) {
        if forward {
            self.forward.set(edge as usize, present);
        } else {
            self.backward.set(edge as usize, present);
        }
    }

    pub fn insert(&mut self, arc: Arc) -> Result<()> {
        let id = self
            .lattice
            .edge_id(arc.edge)
            .ok_or(Error::SiteOutsideRegion(arc.edge.head()))?;
        self.set(id, arc.forward, true);
        Ok(())
    }

    /// Number of arcs on an edge: 0, 1 or 2.
    pub fn arcs_on(&self, edge: u32) -> u8 {
        self.forward.get(edge as usize) as u8 + self.backward.get(edge as usize) as u8
    }

    pub fn len(&self) -> usize {
        self.forward.count_ones() + self.backward.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.lattice.num_edges() as u32).flat_map(move |e| {
            let edge = self.lattice.edge(e);
            [true, false]
                .into_iter()
                .filter(move |&f| self.has_arc(e, f))
                .map(move |f| Arc::new(edge, f))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ArcSetWire {
            format: ARCSET_FORMAT.into(),
            region: self.lattice.region().expect("arc set lattice has a region"),
            edges: self.forward.len(),
            forward: self.forward.to_hex(),
            backward: self.backward.to_hex(),
        })
        .expect("arc set serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: ArcSetWire = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if w.format != ARCSET_FORMAT {
            return Err(Error::Format(format!("unknown format {:?}", w.format)));
        }
        let lattice = Lattice::new(w.region)?;
        if w.edges != lattice.num_edges() {
            return Err(Error::Format(format!("edge count {} does not match {}", w.edges, w.region)));
        }
        let forward = Bits::from_hex(w.edges, &w.forward)?;
        let backward = Bits::from_hex(w.edges, &w.backward)?;
        ArcSet::new(lattice, forward, backward)
    }
}

impl ArcSource for ArcSet {
    #[inline]
    fn has_arc(&self, edge: u32, forward: bool) -> bool {
        if forward {
            self.forward.get(edge as usize)
        } else {
            self.backward.get(edge as usize)
        }
    }
}

/// Samples the independent arc process on a planar region.
pub fn sample_arcs(a: f64, b: f64, region: Region, seed: u64) -> Result<ArcSet> {
    ArcSet::sample(&Lattice::new(region)?, a, b, seed)
}

/// Computes arcs on demand from the generator. Agrees bit-for-bit with
/// [`Config::sample`] / [`ArcSet::sample`] under the same seed, but only pays
/// for the edges a search actually touches.
#[derive(Clone, Copy)]
pub struct LazySample<'a> {
    lattice: &'a Lattice,
    model: ModelSpec,
    seed: u64,
}

impl<'a> LazySample<'a> {
    pub fn new(lattice: &'a Lattice, model: ModelSpec, seed: u64) -> Self {
        LazySample { lattice, model, seed }
    }

    #[inline]
    pub fn coin(&self, edge: u32) -> bool {
        edge_coin(self.model, self.lattice.edge(edge), self.seed)
    }
}

impl ArcSource for LazySample<'_> {
    #[inline]
    fn has_arc(&self, edge: u32, forward: bool) -> bool {
        let e = self.lattice.edge(edge);
        match self.model {
            ModelSpec::IndependentArcs { a, b } => {
                if forward {
                    rng::coin(self.seed, e.key(), rng::STREAM_FORWARD_ARC, a)
                } else {
                    rng::coin(self.seed, e.key(), rng::STREAM_BACKWARD_ARC, b)
                }
            }
            m => m.forward_for(e, edge_coin(m, e, self.seed)) == forward,
        }
    }
}

/// Keeps only the arcs produced by a coin's probability-`p` outcome (for the
/// H-model: the outward arcs). Under common per-edge uniforms this arc set
/// grows with `p`.
pub struct CoinArcsOnly<'a, A> {
    pub inner: A,
    pub lattice: &'a Lattice,
    pub model: ModelSpec,
}

impl<A: ArcSource> ArcSource for CoinArcsOnly<'_, A> {
    #[inline]
    fn has_arc(&self, edge: u32, forward: bool) -> bool {
        self.model.coin_for(self.lattice.edge(edge), forward) && self.inner.has_arc(edge, forward)
    }
}
