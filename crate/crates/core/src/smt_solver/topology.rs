//! Steiner topologies and their enumeration.
//!
//! Nodes `0..n` are terminals, `n..n+s` Steiner points. Terminals are
//! labeled, Steiner points are not: two topologies that differ only by a
//! permutation of Steiner labels are the same topology.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_ENUMERATION_TERMINALS: usize = 3;
pub const MAX_ENUMERATION_TERMINALS: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Topology {
    terminal_count: usize,
    steiner_count: usize,
    /// Normalized `(min, max)` pairs, sorted.
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(
        terminal_count: usize,
        steiner_count: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if terminal_count == 0 {
            return Err(Error::invalid("a topology needs at least one terminal"));
        }
        let nodes = terminal_count + steiner_count;
        if edges.len() + 1 != nodes {
            return Err(Error::invalid(format!(
                "a tree on {nodes} nodes has {} edges, got {}",
                nodes - 1,
                edges.len()
            )));
        }
        let mut norm: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        norm.sort_unstable();
        for w in norm.windows(2) {
            if w[0] == w[1] {
                return Err(Error::invalid(format!("duplicate edge {:?}", w[0])));
            }
        }
        for &(u, v) in &norm {
            if u == v || v >= nodes {
                return Err(Error::invalid(format!("invalid edge ({u}, {v})")));
            }
        }
        let t = Topology {
            terminal_count,
            steiner_count,
            edges: norm,
        };
        if !t.is_connected() {
            return Err(Error::invalid("edges do not form a connected tree"));
        }
        for s in terminal_count..nodes {
            if t.degree(s) < 3 {
                return Err(Error::invalid(format!(
                    "Steiner node {s} has degree {} < 3",
                    t.degree(s)
                )));
            }
        }
        Ok(t)
    }

    pub fn terminal_count(&self) -> usize {
        self.terminal_count
    }

    pub fn steiner_count(&self) -> usize {
        self.steiner_count
    }

    pub fn node_count(&self) -> usize {
        self.terminal_count + self.steiner_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_steiner(&self, node: usize) -> bool {
        node >= self.terminal_count
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| u == node || v == node)
            .count()
    }

    /// Sorted neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        adj
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; adj.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// The star joining every terminal to a single Steiner point.
    pub fn star(terminal_count: usize) -> Result<Self> {
        let s = terminal_count;
        Topology::new(
            terminal_count,
            1,
            (0..terminal_count).map(|i| (i, s)).collect(),
        )
    }

    /// Relabels Steiner nodes into a canonical order. Two topologies are equal
    /// up to Steiner relabeling iff their canonical forms are equal.
    pub fn canonical(&self) -> Topology {
        let edges = canonical_edges(self.terminal_count, self.node_count(), &self.edges);
        Topology {
            terminal_count: self.terminal_count,
            steiner_count: self.steiner_count,
            edges,
        }
    }
}

/// AHU-style encoding rooted at terminal 0; terminal labels make sibling
/// codes distinct, so the preorder of sorted children fixes Steiner labels.
fn canonical_edges(n: usize, nodes: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut adj = vec![Vec::new(); nodes];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }

    fn code(
        v: usize,
        parent: usize,
        n: usize,
        adj: &[Vec<usize>],
        out: &mut Vec<Option<String>>,
    ) -> String {
        let mut children: Vec<String> = adj[v]
            .iter()
            .filter(|&&c| c != parent)
            .map(|&c| code(c, v, n, adj, out))
            .collect();
        children.sort_unstable();
        let head = if v < n {
            format!("t{v}")
        } else {
            "s".to_string()
        };
        let s = if children.is_empty() {
            head
        } else {
            format!("{head}({})", children.join(","))
        };
        out[v] = Some(s.clone());
        s
    }

    let mut codes = vec![None; nodes];
    code(0, usize::MAX, n, &adj, &mut codes);

    let mut relabel = vec![usize::MAX; nodes];
    (0..n).for_each(|t| relabel[t] = t);
    let mut next = n;
    let mut stack = vec![(0usize, usize::MAX)];
    while let Some((v, parent)) = stack.pop() {
        if v >= n {
            relabel[v] = next;
            next += 1;
        }
        let mut children: Vec<usize> = adj[v].iter().copied().filter(|&c| c != parent).collect();
        children.sort_by(|a, b| codes[*a].cmp(&codes[*b]));
        // reversed so the smallest code is visited first
        for c in children.into_iter().rev() {
            stack.push((c, v));
        }
    }

    let mut out: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (relabel[u], relabel[v]);
            (a.min(b), a.max(b))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Decodes a Prüfer sequence over `nodes` labels into an edge list.
fn prufer_decode(seq: &[usize], nodes: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; nodes];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(nodes - 1);
    for &v in seq {
        let leaf = (0..nodes)
            .find(|&u| degree[u] == 1)
            .expect("a tree always has a leaf");
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..nodes).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// All Steiner topologies on `n` labeled terminals with Steiner degree in
/// `[3, max_steiner_degree]` and terminal degree in `[1, max_terminal_degree]`,
/// ordered by Steiner count and then by canonical edge list.
pub fn enumerate_topologies(
    n: usize,
    max_steiner_degree: usize,
    max_terminal_degree: usize,
) -> Result<Vec<Topology>> {
    if !(MIN_ENUMERATION_TERMINALS..=MAX_ENUMERATION_TERMINALS).contains(&n) {
        return Err(Error::ResourceLimit(format!(
            "topology enumeration supports {MIN_ENUMERATION_TERMINALS}..={MAX_ENUMERATION_TERMINALS} terminals, got {n}"
        )));
    }
    let mut found = BTreeSet::new();
    if max_terminal_degree == 0 {
        return Ok(Vec::new());
    }
    for s in 0..=n - 2 {
        if s > 0 && max_steiner_degree < 3 {
            break;
        }
        let nodes = n + s;
        let len = nodes - 2;
        // a node of degree k appears k - 1 times in the Prüfer sequence
        let t_max = (max_terminal_degree - 1).min(len);
        let s_min = 2;
        let s_max = max_steiner_degree.saturating_sub(1).min(len);
        let mut counts = vec![0usize; nodes];
        enumerate_counts(
            0,
            n,
            nodes,
            len,
            t_max,
            s_min,
            s_max,
            &mut counts,
            &mut |counts| {
                let mut rem = counts.to_vec();
                let mut seq = Vec::with_capacity(len);
                permutations(&mut rem, &mut seq, len, &mut |seq| {
                    let edges = prufer_decode(seq, nodes);
                    found.insert((s, canonical_edges(n, nodes, &edges)));
                });
            },
        );
    }
    found
        .into_iter()
        .map(|(s, edges)| Topology::new(n, s, edges))
        .collect()
}

/// Assigns Prüfer multiplicities node by node. Steiner multiplicities are kept
/// nonincreasing since Steiner labels are interchangeable.
#[allow(clippy::too_many_arguments)]
fn enumerate_counts(
    idx: usize,
    n: usize,
    nodes: usize,
    remaining: usize,
    t_max: usize,
    s_min: usize,
    s_max: usize,
    counts: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if idx == nodes {
        if remaining == 0 {
            emit(counts);
        }
        return;
    }
    let steiner_left = nodes - idx - usize::from(idx >= n);
    let (lo, hi) = if idx < n {
        (0, t_max)
    } else {
        let prev = if idx > n { counts[idx - 1] } else { s_max };
        (s_min, s_max.min(prev))
    };
    // remaining Steiner nodes after this one each need at least s_min
    let reserve = if idx < n {
        (nodes - n) * s_min
    } else {
        steiner_left * s_min
    };
    for c in lo..=hi {
        if c + reserve > remaining {
            break;
        }
        counts[idx] = c;
        enumerate_counts(
            idx + 1,
            n,
            nodes,
            remaining - c,
            t_max,
            s_min,
            s_max,
            counts,
            emit,
        );
    }
    counts[idx] = 0;
}

fn permutations(
    rem: &mut [usize],
    seq: &mut Vec<usize>,
    len: usize,
    emit: &mut dyn FnMut(&[usize]),
) {
    if seq.len() == len {
        emit(seq);
        return;
    }
    for v in 0..rem.len() {
        if rem[v] > 0 {
            rem[v] -= 1;
            seq.push(v);
            permutations(rem, seq, len, emit);
            seq.pop();
            rem[v] += 1;
        }
    }
}
