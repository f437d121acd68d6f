//! Hidden-check topologies of absorption sets.
//!
//! With the check nodes hidden, an absorption set becomes a small graph on
//! its variables: two variables are joined when they share a check touched
//! exactly twice by the set. A check touched four times is kept as a "quad"
//! group over its four members. `Deg(v)` is the graph degree plus the number
//! of quads containing `v`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use crate::canon::Certificate;
use crate::canon::{canonical_labeling, ColoredGraph};
use crate::{Error, Result};

/// Largest set size handled by the exhaustive realization enumerator.
pub const MAX_NODES: usize = 12;
/// Largest graph accepted by [`canonical_form`].
pub const MAX_CANONICAL_NODES: usize = 16;
const MAX_QUADS: usize = 2;

/// A hidden-check topology on vertices `0..a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Topology {
    pub a: usize,
    /// Pairwise hidden edges, each stored as `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Checks touching four members, each sorted.
    pub quads: Vec<[usize; 4]>,
}

impl Topology {
    /// Validates and normalizes a topology.
    pub fn new(a: usize, edges: &[(usize, usize)], quads: &[[usize; 4]]) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v || u >= a || v >= a {
                return Err(Error::Topology(format!(
                    "bad edge ({u},{v}) for {a} vertices"
                )));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Topology(
                "repeated edge: two variables would share two checks".into(),
            ));
        }
        let mut qs: Vec<[usize; 4]> = Vec::with_capacity(quads.len());
        for q in quads {
            let mut q = *q;
            q.sort_unstable();
            if q.windows(2).any(|w| w[0] == w[1]) || q[3] >= a {
                return Err(Error::Topology(format!("bad quad {q:?} for {a} vertices")));
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    if norm.binary_search(&(q[i], q[j])).is_ok() {
                        return Err(Error::Topology(format!(
                            "quad {q:?} members {} and {} are also joined by an edge",
                            q[i], q[j]
                        )));
                    }
                }
            }
            qs.push(q);
        }
        qs.sort_unstable();
        for i in 0..qs.len() {
            for j in i + 1..qs.len() {
                let shared = qs[i].iter().filter(|x| qs[j].contains(x)).count();
                if shared > 1 {
                    return Err(Error::Topology(
                        "two quads share more than one vertex".into(),
                    ));
                }
            }
        }
        Ok(Topology {
            a,
            edges: norm,
            quads: qs,
        })
    }

    /// `Deg(v)` for every vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.a];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        for q in &self.quads {
            for &v in q {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Degree multiset in non-increasing order.
    pub fn deg_seq(&self) -> Vec<usize> {
        let mut d = self.degrees();
        d.sort_unstable_by(|x, y| y.cmp(x));
        d
    }

    /// Number of unsatisfied checks when every odd check is touched once.
    pub fn b(&self, d_v: usize) -> usize {
        self.a * d_v - self.degrees().iter().sum::<usize>()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(x, y)| {
                if x == v {
                    Some(y)
                } else if y == v {
                    Some(x)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Certificate invariant under relabeling of vertices.
    pub fn certificate(&self) -> Certificate {
        canonical_labeling(&self.colored(|_| 1)).0
    }

    fn colored(&self, color: impl Fn(usize) -> u32) -> ColoredGraph {
        let mut colors: Vec<u32> = (0..self.a).map(color).collect();
        colors.extend(std::iter::repeat_n(0, self.quads.len()));
        let mut g = ColoredGraph::new(colors);
        for &(u, v) in &self.edges {
            g.add_edge(u, v);
        }
        for (k, q) in self.quads.iter().enumerate() {
            for &v in q {
                g.add_edge(v, self.a + k);
            }
        }
        g
    }

    /// Relabels vertices so that `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Topology {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        let quads: Vec<_> = self.quads.iter().map(|q| q.map(|v| perm[v])).collect();
        Topology::new(self.a, &edges, &quads).expect("relabeling preserves validity")
    }

    /// Removes vertices and reports what the survivors look like.
    ///
    /// Checks that lose members change parity: an edge check touched once
    /// becomes unsatisfied, a quad touched three times becomes unsatisfied and
    /// a quad touched twice becomes an ordinary edge.
    pub fn remove(&self, remove: &[usize], d_v: usize) -> Result<Residual> {
        let gone: BTreeSet<usize> = remove.iter().copied().collect();
        if gone.iter().any(|&v| v >= self.a) {
            return Err(Error::InvalidSet(
                "removed vertex outside the topology".into(),
            ));
        }
        if gone.len() >= self.a {
            return Err(Error::InvalidSet("cannot remove every vertex".into()));
        }
        let keep: Vec<usize> = (0..self.a).filter(|v| !gone.contains(v)).collect();
        let mut new_index = vec![usize::MAX; self.a];
        for (i, &v) in keep.iter().enumerate() {
            new_index[v] = i;
        }
        let deg = self.degrees();
        // original unsatisfied checks of survivors stay unsatisfied
        let mut b: usize = keep.iter().map(|&v| d_v - deg[v]).sum();
        let mut edges = Vec::new();
        let mut quads = Vec::new();
        for &(u, v) in &self.edges {
            match (gone.contains(&u), gone.contains(&v)) {
                (false, false) => edges.push((new_index[u], new_index[v])),
                (true, true) => {}
                _ => b += 1,
            }
        }
        for q in &self.quads {
            let left: Vec<usize> = q.iter().copied().filter(|v| !gone.contains(v)).collect();
            match left.len() {
                4 => quads.push([left[0], left[1], left[2], left[3]].map(|v| new_index[v])),
                2 => edges.push((new_index[left[0]], new_index[left[1]])),
                1 | 3 => b += 1,
                _ => {}
            }
        }
        let topology = Topology::new(keep.len(), &edges, &quads)?;
        let lo = d_v / 2;
        let absorbing = topology.degrees().iter().all(|&d| d > lo);
        Ok(Residual {
            kept: keep,
            a: topology.a,
            b,
            absorbing,
            topology,
        })
    }

    pub fn to_record(&self, d_v: usize) -> TopologyRecord {
        TopologyRecord {
            a: self.a,
            deg_seq: self.degrees(),
            b: self.b(d_v),
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            quad_checks: self.quads.clone(),
        }
    }
}

/// Result of deleting vertices from a topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    /// Original indices of the surviving vertices, in their new order.
    pub kept: Vec<usize>,
    pub a: usize,
    pub b: usize,
    /// Every survivor still has a strict majority of satisfied checks.
    pub absorbing: bool,
    pub topology: Topology,
}

/// Serialized form of a topology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyRecord {
    pub a: usize,
    /// `Deg` of each vertex in vertex order.
    pub deg_seq: Vec<usize>,
    pub b: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub quad_checks: Vec<[usize; 4]>,
}

impl TopologyRecord {
    pub fn to_topology(&self) -> Result<Topology> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let t = Topology::new(self.a, &edges, &self.quad_checks)?;
        if t.degrees() != self.deg_seq {
            return Err(Error::Topology(
                "deg_seq does not match edges and quads".into(),
            ));
        }
        Ok(t)
    }
}

/// A degree class with all of its realizations up to isomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyClass {
    pub a: usize,
    pub deg_seq: Vec<usize>,
    pub b: usize,
    pub d_v: usize,
    pub allow_quad_checks: bool,
    pub realizations: Vec<Topology>,
}

/// Canonical certificate of a simple graph given as an edge list.
pub fn canonical_form(n: usize, edges: &[(usize, usize)]) -> Result<Certificate> {
    if n > MAX_CANONICAL_NODES {
        return Err(Error::Topology(format!(
            "canonical form limited to {MAX_CANONICAL_NODES} nodes, got {n}"
        )));
    }
    Ok(Topology::new(n, edges, &[])?.certificate())
}

/// Degree multisets over `(d_v/2, d_v]` summing to `a*d_v - b`, each
/// non-increasing. Infeasible pairs yield an empty list.
pub fn enumerate_classes(a: usize, b: usize, d_v: usize) -> Result<Vec<Vec<usize>>> {
    if a == 0 || d_v == 0 {
        return Err(Error::Infeasible(format!("({a},{b}) with d_v = {d_v}")));
    }
    if b > a * d_v {
        return Ok(Vec::new());
    }
    Ok(classes_with_sum(a, a * d_v - b, d_v))
}

/// Degree multisets of length `a` over `(d_v/2, d_v]` with the given sum.
pub fn classes_with_sum(a: usize, sum: usize, d_v: usize) -> Vec<Vec<usize>> {
    fn rec(
        left: usize,
        sum: usize,
        hi: usize,
        lo: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left == 0 {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if sum < left * lo || sum > left * hi {
            return;
        }
        for d in (lo..=hi).rev() {
            if d <= sum {
                cur.push(d);
                rec(left - 1, sum - d, d, lo, cur, out);
                cur.pop();
            }
        }
    }
    let lo = d_v / 2 + 1;
    let mut out = Vec::new();
    if lo <= d_v {
        rec(a, sum, d_v, lo, &mut Vec::new(), &mut out);
    }
    out
}

/// Erdős–Gallai test for a degree sequence.
pub fn is_graphic(degrees: &[usize]) -> bool {
    let mut d: Vec<usize> = degrees.to_vec();
    d.sort_unstable_by(|x, y| y.cmp(x));
    let total: usize = d.iter().sum();
    if total % 2 == 1 {
        return false;
    }
    let n = d.len();
    let mut left = 0;
    for k in 1..=n {
        left += d[k - 1];
        let right = k * (k - 1) + d[k..].iter().map(|&x| x.min(k)).sum::<usize>();
        if left > right {
            return false;
        }
    }
    true
}

#[derive(Clone)]
struct PartialState {
    adj: Vec<u32>,
    quads: Vec<[usize; 4]>,
    rem: Vec<usize>,
}

impl PartialState {
    fn colored(&self) -> ColoredGraph {
        let a = self.rem.len();
        let mut colors: Vec<u32> = self.rem.iter().map(|&r| r as u32 + 1).collect();
        colors.extend(std::iter::repeat_n(0, self.quads.len()));
        let mut g = ColoredGraph::new(colors);
        for u in 0..a {
            for v in u + 1..a {
                if self.adj[u] >> v & 1 == 1 {
                    g.add_edge(u, v);
                }
            }
        }
        for (k, q) in self.quads.iter().enumerate() {
            for &v in q {
                g.add_edge(v, a + k);
            }
        }
        g
    }

    fn key(&self) -> Certificate {
        canonical_labeling(&self.colored()).0
    }

    fn forbidden(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1 || self.quads.iter().any(|q| q.contains(&u) && q.contains(&v))
    }

    fn finish(&self) -> Topology {
        let a = self.rem.len();
        let edges: Vec<(usize, usize)> = (0..a)
            .flat_map(|u| (u + 1..a).map(move |v| (u, v)))
            .filter(|&(u, v)| self.adj[u] >> v & 1 == 1)
            .collect();
        Topology::new(a, &edges, &self.quads).expect("enumerated state is a valid topology")
    }
}

fn combinations(items: &[usize], k: usize, mut f: impl FnMut(&[usize])) {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut f);
}

/// All realizations of a degree class, pairwise non-isomorphic.
///
/// With `allow_quad`, up to two checks may touch four members each; quad
/// members are never joined by an edge and two quads share at most one
/// vertex. Vertex `i` of every realization has degree `deg_seq[i]` after the
/// sequence is sorted non-increasingly.
pub fn enumerate_realizations(
    deg_seq: &[usize],
    d_v: usize,
    allow_quad: bool,
) -> Result<TopologyClass> {
    let a = deg_seq.len();
    if a == 0 {
        return Err(Error::Infeasible("empty degree sequence".into()));
    }
    if a > MAX_NODES {
        return Err(Error::Topology(format!(
            "at most {MAX_NODES} nodes are enumerated, got {a}"
        )));
    }
    if let Some(&d) = deg_seq.iter().find(|&&d| d > d_v) {
        return Err(Error::Infeasible(format!("degree {d} exceeds d_v = {d_v}")));
    }
    let mut degs = deg_seq.to_vec();
    degs.sort_unstable_by(|x, y| y.cmp(x));
    let sum: usize = degs.iter().sum();
    let b = a * d_v - sum;

    let start = PartialState {
        adj: vec![0; a],
        quads: Vec::new(),
        rem: degs.clone(),
    };
    let mut seeds: BTreeMap<Certificate, PartialState> = BTreeMap::new();
    seeds.insert(start.key(), start);
    let mut level: Vec<PartialState> = seeds.values().cloned().collect();
    for _ in 0..if allow_quad { MAX_QUADS } else { 0 } {
        let mut next: BTreeMap<Certificate, PartialState> = BTreeMap::new();
        for st in &level {
            let avail: Vec<usize> = (0..a).filter(|&v| st.rem[v] > 0).collect();
            combinations(&avail, 4, |q| {
                let q = [q[0], q[1], q[2], q[3]];
                if st
                    .quads
                    .iter()
                    .any(|p| p.iter().filter(|x| q.contains(x)).count() > 1)
                {
                    return;
                }
                let mut s = st.clone();
                for &v in &q {
                    s.rem[v] -= 1;
                }
                s.quads.push(q);
                next.entry(s.key()).or_insert(s);
            });
        }
        level = next.values().cloned().collect();
        for (k, s) in next {
            seeds.entry(k).or_insert(s);
        }
    }

    let mut done: BTreeMap<Certificate, Topology> = BTreeMap::new();
    let mut frontier: Vec<PartialState> = seeds.into_values().collect();
    while !frontier.is_empty() {
        let mut next: BTreeMap<Certificate, PartialState> = BTreeMap::new();
        for st in frontier {
            let active: Vec<usize> = (0..a).filter(|&v| st.rem[v] > 0).collect();
            if active.is_empty() {
                let t = st.finish();
                done.entry(t.certificate()).or_insert(t);
                continue;
            }
            let rems: Vec<usize> = active.iter().map(|&v| st.rem[v]).collect();
            if !is_graphic(&rems) {
                continue;
            }
            let x = *active
                .iter()
                .max_by_key(|&&v| (st.rem[v], std::cmp::Reverse(v)))
                .unwrap();
            let cands: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&y| y != x && !st.forbidden(x, y))
                .collect();
            combinations(&cands, st.rem[x], |chosen| {
                let mut s = st.clone();
                for &y in chosen {
                    s.adj[x] |= 1 << y;
                    s.adj[y] |= 1 << x;
                    s.rem[y] -= 1;
                }
                s.rem[x] = 0;
                next.entry(s.key()).or_insert(s);
            });
        }
        frontier = next.into_values().collect();
    }

    Ok(TopologyClass {
        a,
        deg_seq: degs,
        b,
        d_v,
        allow_quad_checks: allow_quad,
        realizations: done.into_values().collect(),
    })
}

/// Every realization of every class with `a` vertices and degree sum
/// `a*d_v - b`.
pub fn enumerate_family(
    a: usize,
    b: usize,
    d_v: usize,
    allow_quad: bool,
) -> Result<Vec<TopologyClass>> {
    enumerate_classes(a, b, d_v)?
        .iter()
        .map(|c| enumerate_realizations(c, d_v, allow_quad))
        .collect()
}

/// Why a realization was pruned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReason {
    pub removed: Vec<usize>,
    pub residual_a: usize,
    pub residual_b: usize,
}

/// Outcome of [`reduction_closure`] for one realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionVerdict {
    pub a: usize,
    pub b: usize,
    pub deg_seq: Vec<usize>,
    pub topology: Topology,
    /// `None` when the realization survives and must be searched for directly.
    pub pruned_by: Option<PruneReason>,
}

/// Prunes realizations that contain an absorption set of an absent family.
///
/// For each realization, every removal of one vertex and then every removal
/// of two vertices is tried; if the survivors form an absorption set whose
/// `(a, b)` is in `known_absent`, the realization cannot occur in the code.
pub fn reduction_closure(
    classes: &[TopologyClass],
    known_absent: &BTreeSet<(usize, usize)>,
) -> Vec<ReductionVerdict> {
    let mut out = Vec::new();
    for class in classes {
        for t in &class.realizations {
            let mut reason = None;
            if !known_absent.is_empty() {
                'search: for k in 1..=2.min(t.a.saturating_sub(1)) {
                    let all: Vec<usize> = (0..t.a).collect();
                    let mut found = None;
                    combinations(&all, k, |rm| {
                        if found.is_some() {
                            return;
                        }
                        if let Ok(r) = t.remove(rm, class.d_v) {
                            if r.absorbing && known_absent.contains(&(r.a, r.b)) {
                                found = Some(PruneReason {
                                    removed: rm.to_vec(),
                                    residual_a: r.a,
                                    residual_b: r.b,
                                });
                            }
                        }
                    });
                    if found.is_some() {
                        reason = found;
                        break 'search;
                    }
                }
            }
            out.push(ReductionVerdict {
                a: class.a,
                b: class.b,
                deg_seq: class.deg_seq.clone(),
                topology: t.clone(),
                pruned_by: reason,
            });
        }
    }
    out
}

/// The dominant (8,8) topology for `d_v = 6`: the complement of two
/// disjoint 4-cycles, every vertex of degree 5.
pub fn dominant_eight_eight() -> Topology {
    let a = 8;
    let missing = [
        (0, 6),
        (6, 1),
        (1, 7),
        (7, 0),
        (2, 3),
        (3, 4),
        (4, 5),
        (5, 2),
    ];
    let mut edges = Vec::new();
    for u in 0..a {
        for v in u + 1..a {
            if !missing
                .iter()
                .any(|&(x, y)| (x, y) == (u, v) || (y, x) == (u, v))
            {
                edges.push((u, v));
            }
        }
    }
    Topology::new(a, &edges, &[]).expect("static topology")
}

/// Complete graph on `a` vertices.
pub fn complete(a: usize) -> Topology {
    let edges: Vec<_> = (0..a)
        .flat_map(|u| (u + 1..a).map(move |v| (u, v)))
        .collect();
    Topology::new(a, &edges, &[]).expect("static topology")
}
