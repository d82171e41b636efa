use proptest::prelude::*;

use oriperc::duality::{
    complementarity, detect_circuit, dualize, extremal_legs, DualVariant,
};
use oriperc::estimators::wilson_ci;
use oriperc::reach::{crosses, reachable_set, ArcSource};
use oriperc::slab::{positive_association_check, sample_coupled, Availability};
use oriperc::{sample_config, Config, LazySample, Lattice, ModelSpec, Region};

fn planar_model() -> impl Strategy<Value = ModelSpec> {
    (0.0..=1.0f64, 0..3u8).prop_map(|(p, k)| match k {
        0 => ModelSpec::Grimmett2D { p },
        1 => ModelSpec::HModel { p },
        _ => ModelSpec::NEQuadrant { p },
    })
}

fn region() -> impl Strategy<Value = Region> {
    prop_oneof![
        (0..6u32).prop_map(|n| Region::Box { n }),
        (0..6u32).prop_map(|n| Region::QuadrantBox { n }),
        (1..4u32, 1..4u32).prop_map(|(n, d)| Region::Annulus { inner: n, outer: n + d }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampling_is_deterministic(model in planar_model(), region in region(), seed: u64) {
        let a = sample_config(model, region, seed).unwrap();
        let b = sample_config(model, region, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let lazy = LazySample::new(a.lattice(), model, seed);
        for e in 0..a.lattice().num_edges() as u32 {
            prop_assert_eq!(lazy.has_arc(e, true), a.forward(e));
            prop_assert_eq!(lazy.has_arc(e, false), !a.forward(e));
        }
    }

    #[test]
    fn h_model_coin_means_outward(p in 0.0..=1.0f64, n in 1..8u32, seed: u64) {
        let c = sample_config(ModelSpec::HModel { p }, Region::Box { n }, seed).unwrap();
        for (k, arc) in c.arcs().enumerate() {
            let outward = arc.to().norm2() > arc.from().norm2();
            prop_assert_eq!(outward, c.coin(k as u32));
        }
    }

    #[test]
    fn json_roundtrip(model in planar_model(), region in region(), seed: u64) {
        let c = sample_config(model, region, seed).unwrap();
        prop_assert_eq!(Config::from_json(&c.to_json()).unwrap(), c.clone());
        let twice = c.reversed().reversed();
        prop_assert_eq!(twice.bits(), c.bits());
        prop_assert_eq!(region.to_string().parse::<Region>().unwrap(), region);
    }

    #[test]
    fn dual_is_invertible(p in 0.0..=1.0f64, n in 1..8u32, seed: u64) {
        let c = sample_config(ModelSpec::HModel { p }, Region::Box { n }, seed).unwrap();
        let u = dualize(&c, DualVariant::U).unwrap();
        let d = dualize(&c, DualVariant::D).unwrap();
        prop_assert_eq!(&u.to_primal(), &c);
        prop_assert_eq!(&d.to_primal(), &c);
        let flipped = u.to_variant(DualVariant::D);
        prop_assert_eq!(flipped.bits(), d.bits());
        for e in 0..c.lattice().num_edges() as u32 {
            let (a, b) = u.dual_arc(e);
            prop_assert_eq!(d.dual_arc(e), (b, a));
        }
    }

    #[test]
    fn quadrant_complementarity(p in 0.0..=1.0f64, n in 0..9u32, seed: u64) {
        let c = sample_config(ModelSpec::NEQuadrant { p }, Region::QuadrantBox { n }, seed).unwrap();
        prop_assert!(complementarity(&c).unwrap().holds());
    }

    #[test]
    fn circuit_iff_no_crossing(p in 0.0..=1.0f64, inner in 1..5u32, width in 1..5u32, seed: u64) {
        let outer = inner + width;
        let c = sample_config(ModelSpec::HModel { p }, Region::Box { n: outer + 1 }, seed).unwrap();
        let u = dualize(&c, DualVariant::U).unwrap();
        let found = detect_circuit(&u, Region::Annulus { inner, outer }, DualVariant::U).unwrap();
        // independent crossing check on the annulus lattice itself
        let ring = Lattice::new(Region::Annulus { inner, outer }).unwrap();
        let sub = Config::from_fn(&ring, c.model(), |e| {
            c.forward(c.lattice().edge_id(e).unwrap())
        });
        let sources: Vec<u32> = (0..ring.num_sites() as u32).filter(|&s| ring.site(s).radius() == inner).collect();
        let seen = reachable_set(&ring, &sub, &sources, |_, _| true);
        let crossing = (0..ring.num_sites()).any(|s| seen[s] && ring.site(s as u32).radius() == outer);
        prop_assert_eq!(found.is_some(), !crossing);
        if let Some(w) = found {
            prop_assert!(w.verify(&u));
        }
    }

    #[test]
    fn extremal_legs_ordered(p in 0.0..0.5f64, seed: u64, a in 1..5i32) {
        let c = sample_config(ModelSpec::HModel { p }, Region::Box { n: 6 }, seed).unwrap();
        let u = dualize(&c, DualVariant::U).unwrap();
        if let Some((lo, hi)) = extremal_legs(&u, a, Region::Annulus { inner: 1, outer: 6 }).unwrap() {
            prop_assert!(lo <= hi);
            prop_assert!((1..6).contains(&lo) && (1..6).contains(&hi));
        }
    }

    #[test]
    fn wilson_contains_estimate(samples in 1..100_000u64, frac in 0.0..=1.0f64, level in 0.5..0.999f64) {
        let k = ((samples as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_ci(k, samples, level).unwrap();
        let ph = k as f64 / samples as f64;
        prop_assert!(0.0 <= lo && lo <= ph && ph <= hi && hi <= 1.0);
    }

    #[test]
    fn coupling_sound(p in 0.5..=1.0f64, seed: u64) {
        let (cfg, avail) = sample_coupled(p, Region::SlabBox { n: 3 }, seed).unwrap();
        for (k, _) in cfg.lattice().edges().iter().enumerate() {
            match avail.get(k as u32) {
                Some(Availability::Forward) => prop_assert!(cfg.forward(k as u32)),
                Some(Availability::Backward) => prop_assert!(!cfg.forward(k as u32)),
                _ => {}
            }
        }
    }

    #[test]
    fn slab_p_one_reaches(n in 1..10u32, seed: u64) {
        let c = sample_config(ModelSpec::Grimmett3DSlab { p: 1.0 }, Region::SlabBox { n }, seed).unwrap();
        prop_assert!(crosses(c.lattice(), &c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn positive_association_holds(p in 0.5..=1.0f64) {
        prop_assert!(positive_association_check(p).unwrap());
    }
}
