//! Canonical labeling of small vertex-colored graphs.
//!
//! Individualization-refinement with automorphism pruning. Graphs have at
//! most 32 vertices; adjacency is stored as one bitmask per vertex.

use std::cmp::Ordering;

/// Certificate of a colored graph: equal iff the graphs are isomorphic
/// under a color-preserving bijection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Certificate(Vec<u64>);

impl Certificate {
    pub fn as_words(&self) -> &[u64] {
        &self.0
    }
}

pub(crate) const MAX_VERTICES: usize = 32;

#[derive(Debug, Clone)]
pub(crate) struct ColoredGraph {
    pub colors: Vec<u32>,
    pub adj: Vec<u32>,
}

impl ColoredGraph {
    pub fn new(colors: Vec<u32>) -> Self {
        assert!(colors.len() <= MAX_VERTICES);
        let n = colors.len();
        ColoredGraph {
            colors,
            adj: vec![0; n],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
    }

    fn n(&self) -> usize {
        self.colors.len()
    }

    fn certificate(&self, lab: &[usize]) -> Certificate {
        let n = self.n();
        let mut pos = vec![0usize; n];
        for (i, &v) in lab.iter().enumerate() {
            pos[v] = i;
        }
        let mut words = Vec::with_capacity(2 * n + 1);
        words.push(n as u64);
        words.extend(lab.iter().map(|&v| u64::from(self.colors[v])));
        for &v in lab {
            let mut row = 0u64;
            let mut bits = self.adj[v];
            while bits != 0 {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                row |= 1 << pos[u];
            }
            words.push(row);
        }
        Certificate(words)
    }

    /// Refines an ordered partition to the coarsest equitable refinement.
    fn refine(&self, cells: &mut Vec<Vec<usize>>) {
        'outer: loop {
            for s in 0..cells.len() {
                let mask: u32 = cells[s].iter().fold(0, |m, &v| m | 1 << v);
                for x in 0..cells.len() {
                    if cells[x].len() < 2 {
                        continue;
                    }
                    let count = |v: usize| (self.adj[v] & mask).count_ones();
                    let first = count(cells[x][0]);
                    if cells[x].iter().all(|&v| count(v) == first) {
                        continue;
                    }
                    let mut keyed: Vec<(u32, usize)> =
                        cells[x].iter().map(|&v| (count(v), v)).collect();
                    keyed.sort_unstable();
                    let mut parts: Vec<Vec<usize>> = Vec::new();
                    let mut last = None;
                    for (k, v) in keyed {
                        if last != Some(k) {
                            parts.push(Vec::new());
                            last = Some(k);
                        }
                        parts.last_mut().unwrap().push(v);
                    }
                    cells.splice(x..=x, parts);
                    continue 'outer;
                }
            }
            break;
        }
    }
}

struct SearchState {
    first: Option<(Certificate, Vec<usize>)>,
    best: Option<(Certificate, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn search(
    g: &ColoredGraph,
    mut cells: Vec<Vec<usize>>,
    path: &mut Vec<usize>,
    st: &mut SearchState,
) {
    g.refine(&mut cells);
    let target = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() > 1)
        .min_by_key(|(i, c)| (c.len(), *i))
        .map(|(i, _)| i);
    let Some(t) = target else {
        let lab: Vec<usize> = cells.iter().map(|c| c[0]).collect();
        let cert = g.certificate(&lab);
        for known in [&st.first, &st.best].into_iter().flatten() {
            if known.0 == cert {
                let mut gamma = vec![0; lab.len()];
                for (i, &v) in known.1.iter().enumerate() {
                    gamma[v] = lab[i];
                }
                st.automorphisms.push(gamma);
                break;
            }
        }
        if st.first.is_none() {
            st.first = Some((cert.clone(), lab.clone()));
        }
        let better = match &st.best {
            None => true,
            Some((b, _)) => cert.cmp(b) == Ordering::Less,
        };
        if better {
            st.best = Some((cert, lab));
        }
        return;
    };

    let mut cell = cells[t].clone();
    cell.sort_unstable();
    let mut explored: Vec<usize> = Vec::new();
    for &v in &cell {
        if !explored.is_empty() {
            let mut parent: Vec<usize> = (0..g.n()).collect();
            for gamma in &st.automorphisms {
                if path.iter().all(|&p| gamma[p] == p) {
                    for (x, &y) in gamma.iter().enumerate() {
                        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                        if rx != ry {
                            parent[rx] = ry;
                        }
                    }
                }
            }
            let rv = find(&mut parent, v);
            if explored.iter().any(|&w| find(&mut parent, w) == rv) {
                continue;
            }
        }
        let mut child = cells.clone();
        let rest: Vec<usize> = child[t].iter().copied().filter(|&u| u != v).collect();
        child.splice(t..=t, [vec![v], rest]);
        path.push(v);
        search(g, child, path, st);
        path.pop();
        explored.push(v);
    }
}

/// Canonical certificate and the labeling that produces it
/// (`lab[i]` is the vertex placed at canonical position `i`).
pub(crate) fn canonical_labeling(g: &ColoredGraph) -> (Certificate, Vec<usize>) {
    let n = g.n();
    if n == 0 {
        return (Certificate(vec![0]), Vec::new());
    }
    let mut by_color: Vec<(u32, usize)> = (0..n).map(|v| (g.colors[v], v)).collect();
    by_color.sort_unstable();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut last = None;
    for (c, v) in by_color {
        if last != Some(c) {
            cells.push(Vec::new());
            last = Some(c);
        }
        cells.last_mut().unwrap().push(v);
    }
    let mut st = SearchState {
        first: None,
        best: None,
        automorphisms: Vec::new(),
    };
    search(g, cells, &mut Vec::new(), &mut st);
    st.best.expect("search visits at least one leaf")
}
