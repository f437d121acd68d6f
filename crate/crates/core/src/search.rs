//! Topology-guided absorption set search.
//!
//! A topology is embedded into the Tanner graph vertex by vertex: each new
//! vertex must share a check with every already placed neighbour, so the
//! candidates come from a short adjacency list instead of the whole code.
//! Complete embeddings are accepted only if the checks they induce match the
//! topology exactly.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::absorption::{AbsorptionSet, SetCatalog};
use crate::topology::{classes_with_sum, enumerate_realizations, Topology};
use crate::{Error, Result, TannerGraph};

/// Search context over one 4-cycle-free code.
pub struct GuidedSearch<'g> {
    g: &'g TannerGraph,
    /// Sorted variables sharing a check with each variable.
    var_nbrs: Vec<Vec<usize>>,
}

struct Plan {
    order: Vec<usize>,
    /// For position `k`, earlier positions it must share a check with.
    partners: Vec<Vec<usize>>,
    /// `allowed[k][i]`: placed positions that may sit on the check shared
    /// with `partners[k][i]` (the partner itself, or its quad).
    allowed: Vec<Vec<Vec<usize>>>,
}

fn plan(t: &Topology) -> Plan {
    let a = t.a;
    let mut linked = vec![BTreeSet::new(); a];
    for &(u, v) in &t.edges {
        linked[u].insert(v);
        linked[v].insert(u);
    }
    for q in &t.quads {
        for &u in q {
            for &v in q {
                if u != v {
                    linked[u].insert(v);
                }
            }
        }
    }
    let deg = t.degrees();
    let mut placed = vec![false; a];
    let mut order = Vec::with_capacity(a);
    for _ in 0..a {
        let next = (0..a)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let c = linked[v].iter().filter(|&&u| placed[u]).count();
                (c, deg[v], std::cmp::Reverse(v))
            })
            .expect("unplaced vertex remains");
        placed[next] = true;
        order.push(next);
    }
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let partners: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            linked[v]
                .iter()
                .map(|u| pos[u])
                .filter(|&p| p < k)
                .collect()
        })
        .collect();
    let allowed = order
        .iter()
        .zip(&partners)
        .map(|(&v, ps)| {
            ps.iter()
                .map(|&p| {
                    let u = order[p];
                    match t.quads.iter().find(|q| q.contains(&u) && q.contains(&v)) {
                        Some(q) => q.iter().map(|x| pos[x]).collect(),
                        None => vec![p],
                    }
                })
                .collect()
        })
        .collect();
    Plan {
        order,
        partners,
        allowed,
    }
}

impl<'g> GuidedSearch<'g> {
    pub fn new(g: &'g TannerGraph) -> Result<Self> {
        if !g.is_four_cycle_free() {
            return Err(Error::FourCycles);
        }
        let var_nbrs = (0..g.n_vars())
            .map(|v| {
                let mut n: Vec<usize> = g
                    .var_neighbors(v)
                    .iter()
                    .flat_map(|&c| g.check_neighbors(c).iter().copied())
                    .filter(|&u| u != v)
                    .collect();
                n.sort_unstable();
                n
            })
            .collect();
        Ok(GuidedSearch { g, var_nbrs })
    }

    pub fn graph(&self) -> &TannerGraph {
        self.g
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        self.var_nbrs[u].binary_search(&v).is_ok()
    }

    /// Every set of the code whose hidden-check topology is `t`.
    pub fn run(&self, t: &Topology) -> Result<Vec<AbsorptionSet>> {
        let p = plan(t);
        let found: BTreeSet<Vec<usize>> = (0..self.g.n_vars())
            .into_par_iter()
            .map(|root| {
                let mut out = BTreeSet::new();
                let mut placed = vec![root];
                let mut slot = vec![usize::MAX; self.g.n_vars()];
                slot[root] = 0;
                self.extend(t, &p, &mut placed, &mut slot, &mut out);
                out
            })
            .reduce(BTreeSet::new, |mut x, y| {
                x.extend(y);
                x
            });
        found
            .into_iter()
            .map(|vars| AbsorptionSet::new(self.g, &vars))
            .collect()
    }

    /// The check shared by `u` and `v`, unique in a 4-cycle-free code.
    fn shared_check(&self, u: usize, v: usize) -> Option<usize> {
        let cv = self.g.var_neighbors(v);
        self.g
            .var_neighbors(u)
            .iter()
            .copied()
            .find(|c| cv.contains(c))
    }

    /// Every placed member of the check linking `c` to partner `i` must be
    /// allowed there, or that check can never end with the right count.
    fn check_is_clean(
        &self,
        p: &Plan,
        k: usize,
        placed: &[usize],
        slot: &[usize],
        c: usize,
    ) -> bool {
        p.partners[k].iter().zip(&p.allowed[k]).all(|(&q, ok)| {
            let Some(chk) = self.shared_check(placed[q], c) else {
                return false;
            };
            self.g
                .check_neighbors(chk)
                .iter()
                .all(|&w| slot[w] == usize::MAX || ok.contains(&slot[w]))
        })
    }

    fn extend(
        &self,
        t: &Topology,
        p: &Plan,
        placed: &mut Vec<usize>,
        slot: &mut [usize],
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        let k = placed.len();
        if k == t.a {
            if let Some(vars) = self.accept(t, p, placed) {
                out.insert(vars);
            }
            return;
        }
        let partners = &p.partners[k];
        let candidates: Vec<usize> = match partners.first() {
            Some(&first) => self.var_nbrs[placed[first]].clone(),
            None => (0..self.g.n_vars()).collect(),
        };
        for c in candidates {
            if slot[c] != usize::MAX {
                continue;
            }
            if partners[1..].iter().any(|&q| !self.adjacent(placed[q], c)) {
                continue;
            }
            if !self.check_is_clean(p, k, placed, slot, c) {
                continue;
            }
            slot[c] = k;
            placed.push(c);
            self.extend(t, p, placed, slot, out);
            placed.pop();
            slot[c] = usize::MAX;
        }
    }

    /// Checks that the embedding induces exactly the topology's checks.
    fn accept(&self, t: &Topology, p: &Plan, placed: &[usize]) -> Option<Vec<usize>> {
        let mut touch: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, &v) in placed.iter().enumerate() {
            for &c in self.g.var_neighbors(v) {
                touch.entry(c).or_default().push(p.order[k]);
            }
        }
        let mut pairs = Vec::new();
        let mut quads = Vec::new();
        for members in touch.values() {
            match members.len() {
                2 => pairs.push((members[0].min(members[1]), members[0].max(members[1]))),
                4 => {
                    let mut q = [members[0], members[1], members[2], members[3]];
                    q.sort_unstable();
                    quads.push(q);
                }
                n if n % 2 == 0 => return None,
                _ => {}
            }
        }
        pairs.sort_unstable();
        quads.sort_unstable();
        if pairs != t.edges || quads != t.quads {
            return None;
        }
        let mut vars = placed.to_vec();
        vars.sort_unstable();
        crate::absorption::is_absorption_set(self.g, &vars)
            .ok()
            .flatten()
            .map(|_| vars)
    }
}

/// Free-function form of [`GuidedSearch::run`].
pub fn topology_guided_search(g: &TannerGraph, t: &Topology) -> Result<Vec<AbsorptionSet>> {
    GuidedSearch::new(g)?.run(t)
}

/// All `(a, b)` sets, searching every class that can produce them.
///
/// An unsatisfied check touched three or more times lowers the degree sum
/// below `a*d_v - b`, so smaller sums are searched too and the results are
/// filtered on the actual `b`.
pub fn search_family(g: &TannerGraph, a: usize, b: usize, allow_quad: bool) -> Result<SetCatalog> {
    let (d_v, _) = g.require_regular()?;
    if a == 0 || b > a * d_v {
        return Err(Error::Infeasible(format!("({a},{b})")));
    }
    let gs = GuidedSearch::new(g)?;
    let mut cat = SetCatalog::default();
    let top = a * d_v - b;
    let mut sum = top as isize;
    while sum >= 0 {
        for class in classes_with_sum(a, sum as usize, d_v) {
            for t in enumerate_realizations(&class, d_v, allow_quad)?.realizations {
                for s in gs.run(&t)? {
                    if s.b == b {
                        cat.insert(s, "guided");
                    }
                }
            }
        }
        sum -= 2;
    }
    cat.sorted();
    Ok(cat)
}

/// Every set with at most `max_a` members reachable by guided search.
pub fn search_up_to(g: &TannerGraph, max_a: usize, allow_quad: bool) -> Result<SetCatalog> {
    let (d_v, _) = g.require_regular()?;
    let gs = GuidedSearch::new(g)?;
    let mut cat = SetCatalog::default();
    for a in 1..=max_a {
        for sum in 0..=a * d_v {
            for class in classes_with_sum(a, sum, d_v) {
                for t in enumerate_realizations(&class, d_v, allow_quad)?.realizations {
                    for s in gs.run(&t)? {
                        cat.insert(s, "guided");
                    }
                }
            }
        }
    }
    cat.sorted();
    Ok(cat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::complete;

    #[test]
    fn triangle_embeds_once() {
        let g = TannerGraph::from_check_lists(
            3,
            vec![
                vec![0, 1],
                vec![1, 2],
                vec![0, 2],
                vec![0],
                vec![1],
                vec![2],
            ],
        )
        .unwrap();
        let found = topology_guided_search(&g, &complete(3)).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].vars, vec![0, 1, 2]);
    }

    #[test]
    fn four_cycles_refused() {
        let g = TannerGraph::from_check_lists(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert!(matches!(
            topology_guided_search(&g, &complete(2)),
            Err(Error::FourCycles)
        ));
    }

    #[test]
    fn plan_places_partners_first() {
        let p = plan(&crate::topology::dominant_eight_eight());
        assert!(p.partners.iter().skip(1).all(|ps| !ps.is_empty()));
    }
}
