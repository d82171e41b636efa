//! Orientation laws.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::lattice::{Arc, Edge, Region};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Right/up with probability `p`.
    #[serde(rename = "grimmett")]
    Grimmett2D { p: f64 },
    /// Away from the origin with probability `p`.
    #[serde(rename = "h")]
    HModel { p: f64 },
    /// Grimmett law on quadrant boxes, where it coincides with the H-model.
    #[serde(rename = "ne")]
    NEQuadrant { p: f64 },
    /// Positive axis direction with probability `p`, z-edges included.
    #[serde(rename = "slab")]
    Grimmett3DSlab { p: f64 },
    /// Forward arc with probability `a`, backward arc with probability `b`,
    /// all independent.
    #[serde(rename = "arcs")]
    IndependentArcs { a: f64, b: f64 },
}

impl ModelSpec {
    pub fn validate(self) -> Result<Self> {
        match self {
            ModelSpec::Grimmett2D { p }
            | ModelSpec::HModel { p }
            | ModelSpec::NEQuadrant { p }
            | ModelSpec::Grimmett3DSlab { p } => check_probability(p).map(|_| self),
            ModelSpec::IndependentArcs { a, b } => {
                check_probability(a)?;
                check_probability(b)?;
                Ok(self)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelSpec::Grimmett2D { .. } => "grimmett",
            ModelSpec::HModel { .. } => "h",
            ModelSpec::NEQuadrant { .. } => "ne",
            ModelSpec::Grimmett3DSlab { .. } => "slab",
            ModelSpec::IndependentArcs { .. } => "arcs",
        }
    }

    /// The orientation probability, `None` for the arc process.
    pub fn p(self) -> Option<f64> {
        match self {
            ModelSpec::Grimmett2D { p }
            | ModelSpec::HModel { p }
            | ModelSpec::NEQuadrant { p }
            | ModelSpec::Grimmett3DSlab { p } => Some(p),
            ModelSpec::IndependentArcs { .. } => None,
        }
    }

    /// Same law at a different orientation probability.
    pub fn with_p(self, p: f64) -> Self {
        match self {
            ModelSpec::Grimmett2D { .. } => ModelSpec::Grimmett2D { p },
            ModelSpec::HModel { .. } => ModelSpec::HModel { p },
            ModelSpec::NEQuadrant { .. } => ModelSpec::NEQuadrant { p },
            ModelSpec::Grimmett3DSlab { .. } => ModelSpec::Grimmett3DSlab { p },
            m @ ModelSpec::IndependentArcs { .. } => m,
        }
    }

    pub fn is_orientation_law(self) -> bool {
        !matches!(self, ModelSpec::IndependentArcs { .. })
    }

    pub fn is_planar(self) -> bool {
        !matches!(self, ModelSpec::Grimmett3DSlab { .. })
    }

    /// The window on which origin-to-rim crossings of size `n` are measured.
    pub fn crossing_region(self, n: u32) -> Region {
        match self {
            ModelSpec::NEQuadrant { .. } => Region::QuadrantBox { n },
            ModelSpec::Grimmett3DSlab { .. } => Region::SlabBox { n },
            _ => Region::Box { n },
        }
    }

    /// Orientation of `edge` given the outcome of its probability-`p` coin.
    /// Panics-free fast path; see [`ModelSpec::orient`] for the checked form.
    #[inline]
    pub fn forward_for(self, edge: Edge, coin: bool) -> bool {
        match self {
            // outward iff the head has the larger norm iff tail coordinate >= 0
            ModelSpec::HModel { .. } => coin == (edge.tail.coord(edge.axis) >= 0),
            _ => coin,
        }
    }

    /// Inverse of [`ModelSpec::forward_for`]: the coin that yields `forward`.
    #[inline]
    pub fn coin_for(self, edge: Edge, forward: bool) -> bool {
        match self {
            ModelSpec::HModel { .. } => forward == (edge.tail.coord(edge.axis) >= 0),
            _ => forward,
        }
    }

    pub fn orient(self, edge: Edge, coin: bool) -> Result<Arc> {
        if !self.is_orientation_law() {
            return Err(Error::NotAnOrientationLaw(self.name()));
        }
        if self.is_planar() && !edge.is_planar() {
            return Err(Error::NotPlanar);
        }
        Ok(Arc::new(edge, self.forward_for(edge, coin)))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ModelSpec::IndependentArcs { a, b } => write!(f, "arcs(a={a}, b={b})"),
            m => write!(f, "{}(p={})", m.name(), m.p().unwrap_or_default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_edges, Axis, Site};

    fn arc(m: ModelSpec, from: (i32, i32), to: (i32, i32), coin: bool) -> (Site, Site) {
        let (edge, _) = Edge::between(Site::planar(from.0, from.1), Site::planar(to.0, to.1)).unwrap();
        let a = m.orient(edge, coin).unwrap();
        (a.from(), a.to())
    }

    #[test]
    fn orientation_examples() {
        let h = ModelSpec::HModel { p: 0.5 };
        assert_eq!(arc(h, (0, 0), (1, 0), true), (Site::planar(0, 0), Site::planar(1, 0)));
        // inward points at the endpoint of smaller norm, here (-1, 0)
        assert_eq!(arc(h, (-2, 0), (-1, 0), false), (Site::planar(-2, 0), Site::planar(-1, 0)));
        assert_eq!(arc(h, (-2, 0), (-1, 0), true), (Site::planar(-1, 0), Site::planar(-2, 0)));
        let g = ModelSpec::Grimmett2D { p: 0.5 };
        assert_eq!(arc(g, (3, 4), (3, 5), false), (Site::planar(3, 5), Site::planar(3, 4)));
    }

    #[test]
    fn planar_laws_reject_3d_edges() {
        let e = Edge::new(Site::ORIGIN, Axis::Z);
        assert_eq!(ModelSpec::HModel { p: 0.5 }.orient(e, true), Err(Error::NotPlanar));
        assert!(ModelSpec::Grimmett3DSlab { p: 0.5 }.orient(e, true).unwrap().forward);
        assert!(ModelSpec::IndependentArcs { a: 0.5, b: 0.5 }.orient(e, true).is_err());
    }

    #[test]
    fn norm_gap_and_sign_rule() {
        let h = ModelSpec::HModel { p: 0.5 };
        for e in enumerate_edges(Region::Box { n: 50 }) {
            let (t, hd) = (e.tail.norm2(), e.head().norm2());
            assert!((hd - t).abs() >= 1);
            let outward = h.orient(e, true).unwrap();
            assert!(outward.to().norm2() > outward.from().norm2());
        }
    }

    #[test]
    fn ne_quadrant_coincidence() {
        let h = ModelSpec::HModel { p: 0.5 };
        let g = ModelSpec::Grimmett2D { p: 0.5 };
        for e in enumerate_edges(Region::QuadrantBox { n: 30 }) {
            for coin in [false, true] {
                assert_eq!(h.orient(e, coin), g.orient(e, coin));
            }
        }
    }

    #[test]
    fn validation() {
        assert!(ModelSpec::HModel { p: 1.5 }.validate().is_err());
        assert!(ModelSpec::IndependentArcs { a: 0.2, b: -0.1 }.validate().is_err());
        assert!(ModelSpec::Grimmett2D { p: 0.0 }.validate().is_ok());
    }
}
