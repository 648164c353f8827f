//! Quotient cycle graphs, edge partitions and the hypergraph `H(pi, tau)`.
//!
//! Vertices are the blocks of `pi` (0-based block indices); edge `l` runs from
//! the block of `l` to the block of `l + 1 mod k`.

use serde_json::json;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// A partition of the edge positions `0..k` of a quotient cycle graph.
pub type EdgePartition = Partition;

/// The directed `k`-cycle with vertices merged according to `pi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientCycleGraph {
    pi: Partition,
    edges: Vec<(usize, usize)>,
}

impl QuotientCycleGraph {
    pub fn pi(&self) -> &Partition {
        &self.pi
    }

    pub fn vertex_count(&self) -> usize {
        self.pi.block_count()
    }

    /// `(tail, head)` per edge position.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

pub fn quotient_cycle(pi: &Partition) -> QuotientCycleGraph {
    let k = pi.k();
    let edges = (0..k)
        .map(|l| (pi.block_of(l), pi.block_of((l + 1) % k)))
        .collect();
    QuotientCycleGraph {
        pi: pi.clone(),
        edges,
    }
}

/// A hypergraph on vertices `0..vertex_count`; each edge is a sorted,
/// duplicate-free, non-empty vertex list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    vertex_count: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(vertex_count: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(Error::invalid("empty hyperedge"));
            }
            if *e.last().unwrap() >= vertex_count {
                return Err(Error::invalid("hyperedge vertex out of range"));
            }
            clean.push(e);
        }
        Ok(Hypergraph {
            vertex_count,
            edges: clean,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }
}

/// One hyperedge per block `W` of `tau`: the vertices touched by edges in `W`.
pub fn build_hypergraph(g: &QuotientCycleGraph, tau: &EdgePartition) -> Result<Hypergraph> {
    if tau.k() != g.edge_count() {
        return Err(Error::contract(format!(
            "edge partition has {} positions but the graph has {} edges",
            tau.k(),
            g.edge_count()
        )));
    }
    let mut edges = vec![Vec::new(); tau.block_count()];
    for (l, &(u, v)) in g.edges.iter().enumerate() {
        let e = &mut edges[tau.block_of(l)];
        e.push(u);
        e.push(v);
    }
    Hypergraph::new(g.vertex_count(), edges)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Number of connected components of the vertex set under hyperedge incidence.
pub fn hypergraph_components(h: &Hypergraph) -> usize {
    let mut parent: Vec<usize> = (0..h.vertex_count).collect();
    let mut count = h.vertex_count;
    for e in &h.edges {
        let root = find(&mut parent, e[0]);
        for &v in &e[1..] {
            let r = find(&mut parent, v);
            if r != root {
                parent[r] = root;
                count -= 1;
            }
        }
    }
    count
}

/// `sum |E_W| - #edges - #vertices + #components`; never negative, zero
/// exactly when the hypergraph has no cycle.
pub fn cyclomatic_number(h: &Hypergraph) -> i64 {
    let incidences: usize = h.edges.iter().map(Vec::len).sum();
    incidences as i64 - h.edges.len() as i64 - h.vertex_count as i64
        + hypergraph_components(h) as i64
}

pub fn is_acyclic(h: &Hypergraph) -> bool {
    cyclomatic_number(h) == 0
}

/// Largest vertex count accepted by [`cycle_search_oracle`].
pub const ORACLE_MAX_VERTICES: usize = 12;

/// Exhaustive search for a cycle `v0, E1, v1, ..., El, v0` with `l >= 2`,
/// distinct vertices and distinct edges. Returns true iff none exists.
pub fn cycle_search_oracle(h: &Hypergraph) -> Result<bool> {
    if h.vertex_count > ORACLE_MAX_VERTICES {
        return Err(Error::Bounds {
            what: "vertex count",
            value: h.vertex_count,
            cap_name: "ORACLE_MAX_VERTICES",
            cap: ORACLE_MAX_VERTICES,
        });
    }
    fn walk(
        h: &Hypergraph,
        start: usize,
        at: usize,
        len: usize,
        seen: &mut [bool],
        used: &mut [bool],
    ) -> bool {
        for (i, e) in h.edges.iter().enumerate() {
            if used[i] || !e.contains(&at) {
                continue;
            }
            used[i] = true;
            for &w in e {
                if w == at {
                    continue;
                }
                if w == start && len + 1 >= 2 {
                    used[i] = false;
                    return true;
                }
                if !seen[w] {
                    seen[w] = true;
                    let found = walk(h, start, w, len + 1, seen, used);
                    seen[w] = false;
                    if found {
                        used[i] = false;
                        return true;
                    }
                }
            }
            used[i] = false;
        }
        false
    }
    let mut seen = vec![false; h.vertex_count];
    let mut used = vec![false; h.edges.len()];
    for v in 0..h.vertex_count {
        seen[v] = true;
        let found = walk(h, v, v, 0, &mut seen, &mut used);
        seen[v] = false;
        if found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cyclomatic number of a hypergraph given as vertex bitmasks, one per edge.
fn mask_cyclomatic(masks: &[u32]) -> i32 {
    let mut comps: Vec<u32> = Vec::with_capacity(masks.len());
    let mut incidences = 0;
    for &m in masks {
        incidences += m.count_ones() as i32;
        let mut merged = m;
        comps.retain(|&c| {
            if c & merged != 0 {
                merged |= c;
                false
            } else {
                true
            }
        });
        comps.push(merged);
    }
    let covered = comps.iter().fold(0u32, |a, &c| a | c).count_ones() as i32;
    incidences - masks.len() as i32 - covered + comps.len() as i32
}

/// Calls `visit(tau_labels, block_count)` for every edge partition whose
/// hypergraph is acyclic, in restricted-growth lexicographic order.
///
/// Labels are assigned edge by edge and a branch is cut as soon as the partial
/// hypergraph has a cycle: adding incidences never removes one.
pub fn visit_acyclic_edge_partitions<F>(g: &QuotientCycleGraph, mut visit: F)
where
    F: FnMut(&[u8], usize),
{
    let k = g.edge_count();
    assert!(g.vertex_count() <= 32, "bitmask vertex sets hold at most 32 blocks");
    let mut labels = vec![0u8; k];
    let mut masks: Vec<u32> = Vec::with_capacity(k);
    fn rec<F: FnMut(&[u8], usize)>(
        g: &QuotientCycleGraph,
        pos: usize,
        labels: &mut [u8],
        masks: &mut Vec<u32>,
        visit: &mut F,
    ) {
        if pos == labels.len() {
            visit(labels, masks.len());
            return;
        }
        let (u, v) = g.edges[pos];
        let inc = (1u32 << u) | (1u32 << v);
        for c in 0..=masks.len() {
            let fresh = c == masks.len();
            if fresh {
                masks.push(inc);
            }
            let old = masks[c];
            masks[c] |= inc;
            if mask_cyclomatic(masks) == 0 {
                labels[pos] = c as u8;
                rec(g, pos + 1, labels, masks, visit);
            }
            masks[c] = old;
            if fresh {
                masks.pop();
            }
        }
    }
    rec(g, 0, &mut labels, &mut masks, &mut visit);
}

/// Every `tau` with `H(pi, tau)` acyclic, in restricted-growth order.
pub fn enumerate_acyclic_edge_partitions(pi: &Partition) -> Vec<EdgePartition> {
    let g = quotient_cycle(pi);
    let mut out = Vec::new();
    visit_acyclic_edge_partitions(&g, |labels, _| {
        out.push(Partition::canonical(labels));
    });
    out
}

/// Non-increasing per-colour out-degrees of a vertex, zeros dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeProfile(pub Vec<u32>);

impl DegreeProfile {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

/// Out-degree profile of every vertex (indexed by block of `pi`). The
/// hypergraph must be acyclic.
pub fn degree_profiles(g: &QuotientCycleGraph, tau: &EdgePartition) -> Result<Vec<DegreeProfile>> {
    let h = build_hypergraph(g, tau)?;
    if !is_acyclic(&h) {
        return Err(Error::contract(format!(
            "degree profiles requested for {tau} whose hypergraph has a cycle"
        )));
    }
    Ok(profiles_unchecked(g, tau.labels(), tau.block_count()))
}

pub(crate) fn profiles_unchecked(
    g: &QuotientCycleGraph,
    tau: &[u8],
    colours: usize,
) -> Vec<DegreeProfile> {
    let n = g.vertex_count();
    let mut out_counts = vec![0u32; n * colours];
    let mut in_counts = vec![0u32; n * colours];
    for (l, &(u, v)) in g.edges.iter().enumerate() {
        let c = tau[l] as usize;
        out_counts[u * colours + c] += 1;
        in_counts[v * colours + c] += 1;
    }
    debug_assert_eq!(out_counts, in_counts, "acyclic edge partitions are admissible");
    (0..n)
        .map(|u| {
            let mut p: Vec<u32> = out_counts[u * colours..(u + 1) * colours]
                .iter()
                .copied()
                .filter(|&x| x > 0)
                .collect();
            p.sort_unstable_by(|a, b| b.cmp(a));
            DegreeProfile(p)
        })
        .collect()
}

/// Splits the circuit into edge-disjoint directed cycles, each inside one
/// block of `tau`. Returns cycles as lists of edge positions, or `None` when
/// some colour class is unbalanced at a vertex.
pub fn monochromatic_decomposition(
    g: &QuotientCycleGraph,
    tau: &EdgePartition,
) -> Option<Vec<Vec<usize>>> {
    if tau.k() != g.edge_count() {
        return None;
    }
    let n = g.vertex_count();
    let mut cycles = Vec::new();
    for colour in 0..tau.block_count() {
        let class: Vec<usize> = (0..g.edge_count())
            .filter(|&l| tau.block_of(l) == colour)
            .collect();
        let mut balance = vec![0i32; n];
        for &l in &class {
            balance[g.edges[l].0] += 1;
            balance[g.edges[l].1] -= 1;
        }
        if balance.iter().any(|&b| b != 0) {
            return None;
        }
        let mut unused = class.clone();
        while let Some(first) = unused.pop() {
            // Walk unused edges until a vertex repeats, then cut off that loop.
            let mut path_edges = vec![first];
            let mut path_vertices = vec![g.edges[first].0];
            let mut at = g.edges[first].1;
            loop {
                if let Some(p) = path_vertices.iter().position(|&v| v == at) {
                    let cycle: Vec<usize> = path_edges.drain(p..).collect();
                    path_vertices.truncate(p);
                    cycles.push(cycle);
                    if path_edges.is_empty() {
                        break;
                    }
                    at = g.edges[*path_edges.last().unwrap()].1;
                    continue;
                }
                let i = unused.iter().position(|&l| g.edges[l].0 == at)?;
                let l = unused.swap_remove(i);
                path_edges.push(l);
                path_vertices.push(at);
                at = g.edges[l].1;
            }
        }
    }
    Some(cycles)
}

/// JSON dump of a `(pi, tau, H)` triple with 1-based indices.
pub fn debug_dump(pi: &Partition, tau: &EdgePartition) -> Result<serde_json::Value> {
    let g = quotient_cycle(pi);
    let h = build_hypergraph(&g, tau)?;
    let hyperedges: Vec<Vec<usize>> = h
        .edges()
        .iter()
        .map(|e| e.iter().map(|v| v + 1).collect())
        .collect();
    Ok(json!({
        "pi": pi.to_string(),
        "tau": tau.to_string(),
        "hyperedges": hyperedges,
        "acyclic": is_acyclic(&h),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_partitions;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn quotient_examples() {
        let g = quotient_cycle(&Partition::discrete(5));
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);

        let g = quotient_cycle(&p("{1,3}{2,4}"));
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), &[(0, 1), (1, 0), (0, 1), (1, 0)]);

        let g = quotient_cycle(&p("{1,8,10}{2,4}{3,5}{6,7,9}"));
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 10);
        // Circuit: head of each edge is the tail of the next.
        for l in 0..10 {
            assert_eq!(g.edges()[l].1, g.edges()[(l + 1) % 10].0);
        }
    }

    #[test]
    fn hypergraph_examples() {
        let pi = p("{1,3}{2,4}");
        let g = quotient_cycle(&pi);
        let h = build_hypergraph(&g, &Partition::one_block(4)).unwrap();
        assert_eq!(h.edges(), &[vec![0, 1]]);
        let h = build_hypergraph(&g, &p("{1,2}{3,4}")).unwrap();
        assert_eq!(h.edges(), &[vec![0, 1], vec![0, 1]]);
        assert_eq!(cyclomatic_number(&h), 1);
        assert!(!is_acyclic(&h));
        assert!(!cycle_search_oracle(&h).unwrap());
    }

    #[test]
    fn components_and_acyclicity() {
        let h = Hypergraph::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(hypergraph_components(&h), 1);
        assert!(is_acyclic(&h));
        let h = Hypergraph::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(hypergraph_components(&h), 2);
        assert!(is_acyclic(&h));
        let tri = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert!(!is_acyclic(&tri));
        assert!(!cycle_search_oracle(&tri).unwrap());
        let big = Hypergraph::new(13, vec![vec![0]]).unwrap();
        assert!(cycle_search_oracle(&big).is_err());
    }

    #[test]
    fn acyclic_tau_counts() {
        let one = enumerate_acyclic_edge_partitions(&Partition::discrete(4));
        assert_eq!(one, vec![Partition::one_block(4)]);
        assert_eq!(enumerate_acyclic_edge_partitions(&p("{1}{2,4}{3}")).len(), 2);
        assert_eq!(enumerate_acyclic_edge_partitions(&p("{1,3}{2,4}")).len(), 1);
    }

    #[test]
    fn pruned_enumeration_matches_filter() {
        for k in 1..=6 {
            for pi in enumerate_partitions(k).unwrap() {
                let g = quotient_cycle(&pi);
                let slow: Vec<Partition> = enumerate_partitions(k)
                    .unwrap()
                    .filter(|tau| is_acyclic(&build_hypergraph(&g, tau).unwrap()))
                    .collect();
                assert_eq!(enumerate_acyclic_edge_partitions(&pi), slow, "{pi}");
            }
        }
    }

    #[test]
    fn profiles() {
        let g = quotient_cycle(&Partition::discrete(4));
        let prof = degree_profiles(&g, &Partition::one_block(4)).unwrap();
        assert!(prof.iter().all(|d| d.counts() == [1]));
        let g = quotient_cycle(&p("{1,3}{2,4}"));
        let prof = degree_profiles(&g, &Partition::one_block(4)).unwrap();
        assert!(prof.iter().all(|d| d.counts() == [2]));
        assert!(matches!(
            degree_profiles(&g, &p("{1,2}{3,4}")),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn decomposition() {
        let g = quotient_cycle(&p("{1,3}{2,4}"));
        let d = monochromatic_decomposition(&g, &Partition::one_block(4)).unwrap();
        assert_eq!(d.iter().map(Vec::len).sum::<usize>(), 4);
        // Balanced colours without acyclicity: a decomposition exists anyway.
        let tau = p("{1,2}{3,4}");
        assert_eq!(monochromatic_decomposition(&g, &tau).unwrap().len(), 2);
        assert!(!is_acyclic(&build_hypergraph(&g, &tau).unwrap()));
        // Unbalanced colour class.
        assert!(monochromatic_decomposition(&g, &p("{1}{2,3,4}")).is_none());
    }

    #[test]
    fn dump_format() {
        let v = debug_dump(&p("{1,3}{2,4}"), &p("{1,2}{3,4}")).unwrap();
        assert_eq!(
            v.to_string(),
            r#"{"acyclic":false,"hyperedges":[[1,2],[1,2]],"pi":"{1,3}{2,4}","tau":"{1,2}{3,4}"}"#
        );
    }
}
