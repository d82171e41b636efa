use oriperc::slab::*;
use oriperc::{sample_config, Config, Lattice, ModelSpec, Region, Site};

fn closed_form(p: f64) -> f64 {
    let q = 1.0 - p;
    let t = 1.0 - q * q;
    q.powi(3) * t.powi(6) / (q * q * t.powi(6) + 2.0 * q * (1.0 - q) * t.powi(3) + (1.0 - q).powi(2))
}

#[test]
fn exact_conditional_matches_closed_form() {
    for p in [0.5, 0.55, 0.6, 0.67, 0.8, 1.0] {
        let exact = exact_conditional(p).unwrap();
        assert!((exact - closed_form(p)).abs() < 1e-10, "p={p}: {exact} vs {}", closed_form(p));
        assert!(exact >= rho(p), "p={p}");
    }
    assert!((exact_conditional(0.5).unwrap() - 0.04402).abs() < 5e-5);
}

#[test]
fn conditional_monte_carlo_agrees() {
    let b = conditional_bound_check(0.6, 200_000, 11).unwrap();
    let est = b.estimate.unwrap();
    assert!((est.p_hat - b.exact).abs() <= 3.0 * est.std_err(), "{est:?} vs {}", b.exact);
    assert!(b.holds);
    let one = conditional_bound_check(1.0, 1000, 1).unwrap();
    assert_eq!(one.exact, 0.0);
    assert_eq!(one.estimate.unwrap().successes, 0);
}

#[test]
fn positive_association() {
    for p in [0.5, 0.55, 0.6, 0.67, 1.0] {
        assert!(positive_association_check(p).unwrap(), "p={p}");
        for (set, joint, prod) in positive_association_table(p).unwrap() {
            if set.count_ones() == 1 {
                assert!((joint - prod).abs() < 1e-15);
                assert!((joint - (1.0 - p).powi(3)).abs() < 1e-12);
            }
        }
    }
    // all four share the source vertical: P = q * (q^2)^4
    let q: f64 = 0.5;
    let all = positive_association_table(0.5).unwrap().into_iter().find(|r| r.0 == 15).unwrap();
    assert!((all.1 - q * q.powi(8)).abs() < 1e-15);
}

#[test]
fn coupling_is_sound_and_calibrated() {
    let p = 0.6;
    let (mut fwd, mut bwd, mut total) = (0u64, 0u64, 0u64);
    for seed in 0..6 {
        let (cfg, avail) = sample_coupled(p, Region::SlabBox { n: 40 }, seed).unwrap();
        assert_eq!(cfg, sample_config(ModelSpec::Grimmett3DSlab { p }, Region::SlabBox { n: 40 }, seed).unwrap());
        for (k, e) in cfg.lattice().edges().iter().enumerate() {
            match avail.get(k as u32) {
                None => assert!(e.tail.z == 0 && e.head().z == 0),
                Some(s) => {
                    total += 1;
                    match s {
                        Availability::Forward => {
                            fwd += 1;
                            assert!(cfg.forward(k as u32));
                        }
                        Availability::Backward => {
                            bwd += 1;
                            assert!(!cfg.forward(k as u32));
                        }
                        Availability::Neither => {}
                    }
                }
            }
        }
    }
    assert!(total > 100_000);
    let sigma = (0.4 * 0.6 / total as f64).sqrt();
    for c in [fwd, bwd] {
        assert!((c as f64 / total as f64 - 0.4).abs() < 3.0 * sigma, "{c}/{total}");
    }
}

#[test]
fn enrichment_hand_cases() {
    // p = 1/2: every off-plane edge has exactly one direction available
    let (cfg, avail) = sample_coupled(0.5, Region::SlabBox { n: 3 }, 4).unwrap();
    let enr = enrich(&avail, &cfg).unwrap();
    for (k, e) in enr.lattice().edges().iter().enumerate() {
        for (from, to) in [(e.tail, e.head()), (e.head(), e.tail)] {
            let d = Direction::between(from, to).unwrap();
            let path = AuxPath::new(from, d).unwrap();
            let want = path.arcs().iter().all(|a| {
                let id = cfg.lattice().edge_id(a.edge).unwrap();
                cfg.forward(id) == a.forward
            });
            assert_eq!(enr.aux_present(k as u32, from == e.tail), want);
        }
    }
    // p = 1: nothing available, enrichment adds nothing
    let (cfg, avail) = sample_coupled(1.0, Region::SlabBox { n: 3 }, 4).unwrap();
    assert_eq!(enrich(&avail, &cfg).unwrap().aux_count(), 0);
}

#[test]
fn lift_soundness_random() {
    let mut reached = 0;
    for seed in 0..300 {
        let (cfg, avail) = sample_coupled(0.55, Region::SlabBox { n: 6 }, seed).unwrap();
        let enr = enrich(&avail, &cfg).unwrap();
        let rep = lift_check(&cfg, &enr).unwrap();
        assert!(rep.sound(), "seed {seed}: {rep:?}");
        if rep.enriched_reach {
            reached += 1;
            assert_eq!(rep.lifted_len, rep.path_len + 2 * rep.aux_used);
        }
    }
    assert!(reached > 50);
}

#[test]
fn lift_of_single_aux_arc() {
    // slab all backward except the +x aux path at the origin
    let lat = Lattice::new(Region::SlabBox { n: 1 }).unwrap();
    let mut cfg = Config::from_fn(&lat, ModelSpec::Grimmett3DSlab { p: 0.5 }, |_| false);
    let path = AuxPath::new(Site::ORIGIN, Direction::PlusX).unwrap();
    for w in path.sites.windows(2) {
        cfg.set_arc(w[0], w[1]).unwrap();
    }
    cfg.set_arc(Site::planar(1, 0), Site::planar(1, 1)).ok();
    assert!(slab_reach(&cfg));
    assert!(is_directed_path(&cfg, &path.sites));
}

#[test]
fn slab_at_p_one_always_reaches() {
    for n in 1..6 {
        let cfg = sample_config(ModelSpec::Grimmett3DSlab { p: 1.0 }, Region::SlabBox { n }, 0).unwrap();
        assert!(slab_reach(&cfg));
    }
}

#[test]
fn color_routing_and_disjointness() {
    let mut black_edges = std::collections::HashSet::new();
    let mut white_edges = std::collections::HashSet::new();
    for x in -3..=3 {
        for y in -3..=3 {
            let s = Site::planar(x, y);
            for path in aux_paths(s).unwrap() {
                let planes: Vec<i32> = path.sites.iter().map(|q| q.z).collect();
                match color(s) {
                    Color::Black => assert!(planes.iter().all(|z| [0, 1].contains(z))),
                    Color::White => assert!(planes.iter().all(|z| [0, -1].contains(z))),
                }
                let set = if color(s) == Color::Black { &mut black_edges } else { &mut white_edges };
                set.extend(path.edges());
            }
        }
    }
    assert!(black_edges.is_disjoint(&white_edges));
}

#[test]
fn aux_density_three_sigma() {
    for p in [0.5, 0.55, 0.6] {
        let est = aux_density(p, 10, 200, 5).unwrap();
        let want = (1.0f64 - p).powi(3);
        let sigma = (want * (1.0 - want) / est.samples as f64).sqrt();
        assert!((est.p_hat - want).abs() < 3.0 * sigma, "p={p}: {}", est.p_hat);
    }
    assert_eq!(independent_aux_paths(1).len(), 6);
}
