use std::collections::{HashMap, HashSet, VecDeque};

use oriperc::duality::{
    complementarity, detect_b_plus, detect_circuit, dualize, exhaustive_counts, extremal_legs,
    landing_columns, trace_four_leg, DualConfig, DualSite, DualVariant, Hug,
};
use oriperc::{sample_config, Config, Lattice, ModelSpec, Region, Site};

fn ring(s: DualSite) -> u32 {
    let f = |c: i32| if c >= 0 { c } else { -c - 1 } as u32;
    f(s.i).max(f(s.j))
}

/// Dual arcs as an adjacency map, recomputed from the primal arcs by rotating
/// each one a quarter turn clockwise about its midpoint.
fn u_arcs(cfg: &Config) -> HashMap<DualSite, Vec<DualSite>> {
    let mut out: HashMap<DualSite, Vec<DualSite>> = HashMap::new();
    for arc in cfg.arcs() {
        let (a, b) = (arc.from(), arc.to());
        // doubled midpoint and direction
        let (mx, my) = (a.x + b.x, a.y + b.y);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        // clockwise rotation: (dx, dy) -> (dy, -dx)
        let (rx, ry) = (dy, -dx);
        let from = ((mx - rx - 1) / 2, (my - ry - 1) / 2);
        let to = ((mx + rx - 1) / 2, (my + ry - 1) / 2);
        // doubled coords of dual points are odd, so the halving is exact
        out.entry(DualSite::new(from.0, from.1)).or_default().push(DualSite::new(to.0, to.1));
    }
    out
}

fn angle_winding(cycle: &[DualSite]) -> i32 {
    let n = cycle.len();
    let mut t = 0.0f64;
    for k in 0..n {
        let (a, b) = (cycle[k], cycle[(k + 1) % n]);
        let pa = (a.j as f64 + 0.5).atan2(a.i as f64 + 0.5);
        let pb = (b.j as f64 + 0.5).atan2(b.i as f64 + 0.5);
        let mut d = pb - pa;
        while d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        while d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        t += d;
    }
    (t / std::f64::consts::TAU).round() as i32
}

/// Brute force over all simple directed cycles in the dual annulus.
fn has_ccw_cycle(adj: &HashMap<DualSite, Vec<DualSite>>, inner: u32, outer: u32) -> bool {
    let ok = |s: &DualSite| (inner..outer).contains(&ring(*s));
    let mut nodes: Vec<DualSite> = adj.keys().copied().filter(ok).collect();
    nodes.sort();
    for (k, &start) in nodes.iter().enumerate() {
        let allowed: HashSet<DualSite> = nodes[k..].iter().copied().collect();
        let mut path = vec![start];
        let mut on = HashSet::from([start]);
        let mut iters = vec![0usize];
        while let Some(&v) = path.last() {
            let nbrs = adj.get(&v).map(Vec::as_slice).unwrap_or(&[]);
            let idx = iters.last_mut().unwrap();
            if *idx == nbrs.len() {
                on.remove(&v);
                path.pop();
                iters.pop();
                continue;
            }
            let w = nbrs[*idx];
            *idx += 1;
            if w == start && path.len() >= 4 {
                if angle_winding(&path) == 1 {
                    return true;
                }
            } else if allowed.contains(&w) && !on.contains(&w) {
                on.insert(w);
                path.push(w);
                iters.push(0);
            }
        }
    }
    false
}

/// Independent primal annulus crossing.
fn primal_crosses(cfg: &Config, inner: u32, outer: u32) -> bool {
    let mut out: HashMap<Site, Vec<Site>> = HashMap::new();
    for arc in cfg.arcs() {
        out.entry(arc.from()).or_default().push(arc.to());
    }
    let inside = |s: &Site| (inner..=outer).contains(&s.radius());
    let mut seen: HashSet<Site> = cfg.lattice().sites().iter().copied().filter(|s| s.radius() == inner).collect();
    let mut q: VecDeque<Site> = seen.iter().copied().collect();
    while let Some(v) = q.pop_front() {
        if v.radius() == outer {
            return true;
        }
        for &w in out.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if inside(&w) && seen.insert(w) {
                q.push_back(w);
            }
        }
    }
    false
}

#[test]
fn rotated_arcs_match_independent_rotation() {
    let cfg = sample_config(ModelSpec::HModel { p: 0.4 }, Region::Box { n: 4 }, 9).unwrap();
    let dual = dualize(&cfg, DualVariant::U).unwrap();
    let expect = u_arcs(&cfg);
    for e in 0..cfg.lattice().num_edges() as u32 {
        let (a, b) = dual.dual_arc(e);
        assert!(expect[&a].contains(&b), "edge {e}: {a} -> {b}");
    }
}

#[test]
fn circuit_detection_is_complete_and_sound() {
    let cases = [(1, 2, 2), (1, 3, 3), (2, 3, 3), (1, 3, 4), (2, 4, 4)];
    let mut found = 0;
    for (inner, outer, n) in cases {
        for (k, p) in [0.05, 0.15, 0.3, 0.5, 0.65].into_iter().enumerate() {
            for seed in 0..40u64 {
                let cfg = sample_config(ModelSpec::HModel { p }, Region::Box { n }, seed * 7 + k as u64).unwrap();
                let u = dualize(&cfg, DualVariant::U).unwrap();
                let annulus = Region::Annulus { inner, outer };
                let got = detect_circuit(&u, annulus, DualVariant::U).unwrap();
                let brute = has_ccw_cycle(&u_arcs(&cfg), inner, outer);
                let crossing = primal_crosses(&cfg, inner, outer);
                assert_eq!(got.is_some(), brute, "{annulus} p={p} seed={seed}");
                assert_eq!(brute, !crossing, "{annulus} p={p} seed={seed}");
                if let Some(w) = got {
                    found += 1;
                    assert_eq!(w.winding, 1);
                    assert!(w.verify(&u));
                    assert!(w.cycle.iter().all(|s| (inner..outer).contains(&ring(*s))));
                    let d = u.to_variant(DualVariant::D);
                    let wd = detect_circuit(&d, annulus, DualVariant::D).unwrap().unwrap();
                    assert_eq!(wd.winding, -1);
                    assert!(wd.verify(&d));
                }
            }
        }
    }
    assert!(found > 50, "only {found} blocked samples");
}

#[test]
fn circuit_witness_legs() {
    // all inward: the smallest ring is a circuit
    let lat = Lattice::new(Region::Box { n: 3 }).unwrap();
    let cfg = Config::from_coins(&lat, ModelSpec::HModel { p: 0.5 }, |_| false);
    let u = dualize(&cfg, DualVariant::U).unwrap();
    let w = detect_circuit(&u, Region::Annulus { inner: 1, outer: 3 }, DualVariant::U)
        .unwrap()
        .unwrap();
    assert_eq!(w.axis_crossings().len(), 4);
    assert_eq!(w.cycle[0], DualSite::start(w.anchor));
    assert!(detect_circuit(&u, Region::Box { n: 3 }, DualVariant::U).is_err());
}

#[test]
fn quadrant_complementarity_exhaustive() {
    for n in 1..=2 {
        let region = Region::QuadrantBox { n };
        let holds = exhaustive_counts(ModelSpec::NEQuadrant { p: 0.5 }, region, |c| {
            complementarity(c).unwrap().holds()
        })
        .unwrap();
        assert_eq!(holds.hits(), holds.configurations(), "{region}");
    }
}

fn east_south(n: u32) -> (Lattice, DualConfig) {
    // every primal arc forward makes every U arc run east or south
    let lat = Lattice::new(Region::Box { n }).unwrap();
    let cfg = Config::from_fn(&lat, ModelSpec::Grimmett2D { p: 1.0 }, |_| true);
    let u = dualize(&cfg, DualVariant::U).unwrap();
    (lat, u)
}

#[test]
fn b_plus_on_hand_built_dual() {
    let (_, mut u) = east_south(4);
    assert_eq!(detect_b_plus(&u, 2, 0, None).unwrap(), None);
    // north along column 2, then west along row 2
    for j in 0..2 {
        u.set_dual_arc(DualSite::new(2, j), DualSite::new(2, j + 1)).unwrap();
    }
    for i in (1..=2).rev() {
        u.set_dual_arc(DualSite::new(i, 2), DualSite::new(i - 1, 2)).unwrap();
    }
    let path = detect_b_plus(&u, 2, 0, None).unwrap().unwrap();
    assert_eq!(path.first(), Some(&DualSite::start(2)));
    assert_eq!(path.last(), Some(&DualSite::new(0, 2)));
    // cutting ring 2 away leaves no admissible start
    assert!(detect_b_plus(&u, 2, 0, Some(2)).is_err());
    assert!(detect_b_plus(&u, 2, 1, Some(4)).unwrap().is_some());
    assert!(detect_b_plus(&u, 2, 3, None).is_err());
    assert!(detect_b_plus(&u, -1, 0, None).is_err());
}

fn four_leg_brute(u: &DualConfig, a: i32, inner: u32, outer: u32) -> Vec<i32> {
    let cfg = u.to_primal();
    let adj = u_arcs(&cfg);
    let ok = |s: &DualSite| (inner..outer).contains(&ring(*s));
    let order = |s: &DualSite| [1, 2, 3, 4].iter().position(|&q| q == s.quadrant()).unwrap();
    let mut lands = HashSet::new();
    let mut path = vec![DualSite::start(a)];
    fn go(
        path: &mut Vec<DualSite>,
        adj: &HashMap<DualSite, Vec<DualSite>>,
        ok: &dyn Fn(&DualSite) -> bool,
        order: &dyn Fn(&DualSite) -> usize,
        lands: &mut HashSet<i32>,
    ) {
        let v = *path.last().unwrap();
        for &w in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if !ok(&w) || path.contains(&w) && !(order(&v) == 3 && w.quadrant() == 1) {
                continue;
            }
            let (ov, ow) = (order(&v), order(&w));
            if ov == 3 && ow == 0 {
                lands.insert(w.i);
            } else if ow == ov || ow == ov + 1 {
                path.push(w);
                go(path, adj, ok, order, lands);
                path.pop();
            }
        }
    }
    go(&mut path, &adj, &ok, &order, &mut lands);
    let mut v: Vec<i32> = lands.into_iter().collect();
    v.sort();
    v
}

#[test]
fn four_leg_landings_match_brute_force() {
    let mut nonempty = 0;
    for seed in 0..300u64 {
        let p = [0.15, 0.25, 0.35][seed as usize % 3];
        let cfg = sample_config(ModelSpec::HModel { p }, Region::Box { n: 4 }, seed).unwrap();
        let u = dualize(&cfg, DualVariant::U).unwrap();
        for (inner, outer) in [(1, 3), (2, 4), (1, 4)] {
            let annulus = Region::Annulus { inner, outer };
            for a in inner as i32..outer as i32 {
                let got = landing_columns(&u, a, annulus).unwrap();
                assert_eq!(got, four_leg_brute(&u, a, inner, outer), "seed {seed} {annulus} a={a}");
                let legs = extremal_legs(&u, a, annulus).unwrap();
                assert_eq!(legs, got.first().zip(got.last()).map(|(x, y)| (*x, *y)));
                if let Some((e_in, e_out)) = legs {
                    nonempty += 1;
                    assert!(e_in <= e_out);
                    for hug in [Hug::Inner, Hug::Outer] {
                        let path = trace_four_leg(&u, a, annulus, hug).unwrap().unwrap();
                        assert!(got.contains(&path.last().unwrap().i));
                        let want = if hug == Hug::Inner { e_in } else { e_out };
                        assert_eq!(path.last().unwrap().i, want, "{hug:?} seed {seed} {annulus} a={a}");
                    }
                }
            }
        }
    }
    assert!(nonempty > 100, "{nonempty}");
}

#[test]
fn hand_built_four_leg_circuit() {
    let (_, mut u) = east_south(3);
    // counterclockwise square on ring 1, entered from D(1)
    let ring1 = [
        (1, 0), (1, 1), (0, 1), (-1, 1), (-2, 1), (-2, 0), (-2, -1), (-2, -2),
        (-1, -2), (0, -2), (1, -2), (1, -1),
    ];
    for k in 0..ring1.len() {
        let (a, b) = (ring1[k], ring1[(k + 1) % ring1.len()]);
        u.set_dual_arc(DualSite::new(a.0, a.1), DualSite::new(b.0, b.1)).unwrap();
    }
    let annulus = Region::Annulus { inner: 1, outer: 3 };
    assert_eq!(extremal_legs(&u, 1, annulus).unwrap(), Some((1, 1)));
    let inner_path = trace_four_leg(&u, 1, annulus, Hug::Inner).unwrap().unwrap();
    assert_eq!(inner_path.len(), ring1.len() + 1);
    let w = detect_circuit(&u, annulus, DualVariant::U).unwrap().unwrap();
    assert_eq!(w.anchor, 1);
    assert_eq!(w.cycle.len(), 12);
    // the same shape one ring further out lands further out
    assert!(extremal_legs(&u, 2, annulus).unwrap().is_none());
}

#[test]
fn circuit_from_origin_complements_reach() {
    for seed in 0..200u64 {
        let p = [0.2, 0.4, 0.6][seed as usize % 3];
        let cfg = sample_config(ModelSpec::HModel { p }, Region::Box { n: 4 }, seed).unwrap();
        let u = dualize(&cfg, DualVariant::U).unwrap();
        let w = detect_circuit(&u, Region::Annulus { inner: 0, outer: 4 }, DualVariant::U).unwrap();
        assert_eq!(w.is_some(), !primal_crosses(&cfg, 0, 4), "seed {seed}");
        if let Some(w) = w {
            assert!(w.verify(&u));
        }
    }
}
