//! Directed reachability over any source of arcs.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lattice::{Graph, Site, Step};

/// Anything that says which directed arcs are present on the edges of a
/// [`Graph`]. Edge ids refer to that graph.
pub trait ArcSource {
    fn has_arc(&self, edge: u32, forward: bool) -> bool;
}

impl<T: ArcSource + ?Sized> ArcSource for &T {
    #[inline]
    fn has_arc(&self, edge: u32, forward: bool) -> bool {
        (**self).has_arc(edge, forward)
    }
}

/// Breadth-first search from `sources` along present arcs accepted by
/// `allow`. Returns a minimum-length site-id path ending in a target.
pub fn bfs_path<A, F, T>(
    graph: &Graph,
    arcs: &A,
    sources: &[u32],
    allow: F,
    is_target: T,
) -> Option<Vec<u32>>
where
    A: ArcSource + ?Sized,
    F: Fn(u32, &Step) -> bool,
    T: Fn(u32) -> bool,
{
    const UNSEEN: u32 = u32::MAX;
    let mut parent = vec![UNSEEN; graph.num_sites()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if parent[s as usize] == UNSEEN {
            parent[s as usize] = s;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        if is_target(u) {
            let mut path = vec![u];
            let mut cur = u;
            while parent[cur as usize] != cur {
                cur = parent[cur as usize];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for step in graph.steps(u) {
            if parent[step.to as usize] == UNSEEN
                && arcs.has_arc(step.edge, step.forward)
                && allow(u, step)
            {
                parent[step.to as usize] = u;
                queue.push_back(step.to);
            }
        }
    }
    None
}

/// Depth-first existence check; cheaper than [`bfs_path`] when only a yes/no
/// answer is needed.
pub fn reaches<A, T>(graph: &Graph, arcs: &A, sources: &[u32], is_target: T) -> bool
where
    A: ArcSource + ?Sized,
    T: Fn(u32) -> bool,
{
    let mut seen = vec![false; graph.num_sites()];
    let mut stack = Vec::with_capacity(64);
    for &s in sources {
        if !seen[s as usize] {
            seen[s as usize] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        if is_target(u) {
            return true;
        }
        for step in graph.steps(u) {
            if !seen[step.to as usize] && arcs.has_arc(step.edge, step.forward) {
                seen[step.to as usize] = true;
                stack.push(step.to);
            }
        }
    }
    false
}

/// All sites reachable from `sources` along present arcs accepted by `allow`.
pub fn reachable_set<A, F>(graph: &Graph, arcs: &A, sources: &[u32], allow: F) -> Vec<bool>
where
    A: ArcSource + ?Sized,
    F: Fn(u32, &Step) -> bool,
{
    let mut seen = vec![false; graph.num_sites()];
    let mut stack: Vec<u32> = Vec::new();
    for &s in sources {
        if !seen[s as usize] {
            seen[s as usize] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for step in graph.steps(u) {
            if !seen[step.to as usize] && arcs.has_arc(step.edge, step.forward) && allow(u, step) {
                seen[step.to as usize] = true;
                stack.push(step.to);
            }
        }
    }
    seen
}

/// Shortest directed path from `source` to any of `targets`.
pub fn reach<A: ArcSource + ?Sized>(
    graph: &Graph,
    arcs: &A,
    source: Site,
    targets: &[Site],
) -> Result<Option<Vec<Site>>> {
    let s = graph.site_id(source).ok_or(Error::SiteOutsideRegion(source))?;
    let mut mask = vec![false; graph.num_sites()];
    for t in targets {
        if let Some(id) = graph.site_id(*t) {
            mask[id as usize] = true;
        }
    }
    Ok(bfs_path(graph, arcs, &[s], |_, _| true, |u| mask[u as usize])
        .map(|p| p.into_iter().map(|id| graph.site(id)).collect()))
}

/// Whether the origin reaches the outer rim of the graph's region.
pub fn crosses<A: ArcSource + ?Sized>(graph: &Graph, arcs: &A) -> bool {
    let Some(region) = graph.region() else {
        return false;
    };
    let Some(origin) = graph.site_id(Site::ORIGIN) else {
        return false;
    };
    let r = region.outer_radius();
    reaches(graph, arcs, &[origin], |u| graph.site(u).radius() == r)
}
