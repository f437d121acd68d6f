//! Small synthetic codes: random 4-cycle-free regular graphs and codes with
//! a planted absorption set of a chosen topology.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::topology::Topology;
use crate::{Error, Result, TannerGraph};

/// Socket-level builder: a random matching of variable and check sockets,
/// then edge swaps until no two variables share two checks.
struct Builder {
    d_c: usize,
    chk_adj: Vec<Vec<usize>>,
    var_adj: Vec<Vec<usize>>,
    /// Variables whose edges may be moved.
    movable: Vec<usize>,
}

impl Builder {
    fn new(n: usize, d_v: usize, d_c: usize) -> Result<Self> {
        if d_v == 0 || d_c < 2 || !(n * d_v).is_multiple_of(d_c) {
            return Err(Error::Construction(format!(
                "n*d_v = {} is not a multiple of d_c = {d_c}",
                n * d_v
            )));
        }
        Ok(Builder {
            d_c,
            chk_adj: vec![Vec::new(); n * d_v / d_c],
            var_adj: vec![Vec::new(); n],
            movable: Vec::new(),
        })
    }

    fn connect(&mut self, v: usize, c: usize) {
        self.var_adj[v].push(c);
        self.chk_adj[c].push(v);
    }

    /// Matches the sockets of `vars` to the free check sockets at random.
    fn fill<R: Rng + ?Sized>(&mut self, vars: &[usize], d_v: usize, rng: &mut R) {
        let mut sockets: Vec<usize> = (0..self.chk_adj.len())
            .flat_map(|c| std::iter::repeat_n(c, self.d_c - self.chk_adj[c].len()))
            .collect();
        sockets.shuffle(rng);
        let mut it = sockets.into_iter();
        for &v in vars {
            for _ in 0..d_v {
                let c = it.next().expect("socket counts agree");
                self.connect(v, c);
            }
        }
        self.movable = vars.to_vec();
    }

    /// Repeated checks plus extra shared checks with every other variable.
    fn cost(&self, v: usize, scratch: &mut [u32]) -> usize {
        let mut cost = 0;
        let mut touched = Vec::new();
        for (i, &c) in self.var_adj[v].iter().enumerate() {
            if self.var_adj[v][..i].contains(&c) {
                cost += 1;
                continue;
            }
            for &u in &self.chk_adj[c] {
                if u != v {
                    if scratch[u] > 0 {
                        cost += 1;
                    }
                    scratch[u] += 1;
                    touched.push(u);
                }
            }
        }
        for u in touched {
            scratch[u] = 0;
        }
        cost
    }

    /// Edge slots of `v` whose check leads to a variable sharing two checks.
    fn conflicting_edges(&self, v: usize, scratch: &mut [u32]) -> Vec<usize> {
        for &c in &self.var_adj[v] {
            for &u in &self.chk_adj[c] {
                scratch[u] += 1;
            }
        }
        let hot = self.var_adj[v]
            .iter()
            .enumerate()
            .filter(|&(i, &c)| {
                self.var_adj[v][..i].contains(&c)
                    || self.chk_adj[c].iter().any(|&u| u != v && scratch[u] > 1)
            })
            .map(|(i, _)| i)
            .collect();
        for &c in &self.var_adj[v] {
            for &u in &self.chk_adj[c] {
                scratch[u] = 0;
            }
        }
        hot
    }

    fn swap(&mut self, v1: usize, i1: usize, v2: usize, i2: usize) {
        let c1 = self.var_adj[v1][i1];
        let c2 = self.var_adj[v2][i2];
        self.var_adj[v1][i1] = c2;
        self.var_adj[v2][i2] = c1;
        let p = self.chk_adj[c1]
            .iter()
            .position(|&u| u == v1)
            .expect("edge present");
        self.chk_adj[c1][p] = v2;
        let p = self.chk_adj[c2]
            .iter()
            .position(|&u| u == v2)
            .expect("edge present");
        self.chk_adj[c2][p] = v1;
    }

    fn repair<R: Rng + ?Sized>(&mut self, rng: &mut R, budget: usize) -> bool {
        let n = self.var_adj.len();
        let m = self.chk_adj.len();
        let mut scratch = vec![0u32; n];
        let mut near = vec![false; n];
        let mut is_movable = vec![false; n];
        for &v in &self.movable {
            is_movable[v] = true;
        }
        let mut spent = 0;
        loop {
            let mut bad: Vec<usize> = self
                .movable
                .iter()
                .copied()
                .filter(|&v| self.cost(v, &mut scratch) > 0)
                .collect();
            if bad.is_empty() {
                return true;
            }
            bad.shuffle(rng);
            for &v1 in &bad {
                let hot = self.conflicting_edges(v1, &mut scratch);
                let Some(&i1) = hot.choose(rng) else {
                    continue;
                };
                let c1 = self.var_adj[v1][i1];
                for (i, &c) in self.var_adj[v1].iter().enumerate() {
                    if i != i1 {
                        for &u in &self.chk_adj[c] {
                            near[u] = true;
                        }
                    }
                }
                for _ in 0..64 {
                    spent += 1;
                    if spent > budget {
                        return false;
                    }
                    // a check that v1 can join without meeting a neighbour again
                    let c2 = rng.random_range(0..m);
                    if c2 == c1
                        || self.var_adj[v1].contains(&c2)
                        || self.chk_adj[c2].iter().any(|&u| near[u])
                    {
                        continue;
                    }
                    let mut members: Vec<usize> = self.chk_adj[c2]
                        .iter()
                        .copied()
                        .filter(|&u| is_movable[u] && !self.chk_adj[c1].contains(&u))
                        .collect();
                    if members.is_empty() {
                        continue;
                    }
                    members.shuffle(rng);
                    let clean = members.iter().copied().find(|&u| {
                        let mut seen = std::collections::HashSet::new();
                        for &c in &self.var_adj[u] {
                            if c != c2 {
                                seen.extend(self.chk_adj[c].iter().copied());
                            }
                        }
                        self.chk_adj[c1]
                            .iter()
                            .all(|w| *w == v1 || !seen.contains(w))
                    });
                    let v2 = clean.unwrap_or(members[0]);
                    let i2 = self.var_adj[v2]
                        .iter()
                        .position(|&c| c == c2)
                        .expect("edge present");
                    let before = self.cost(v1, &mut scratch) + self.cost(v2, &mut scratch);
                    self.swap(v1, i1, v2, i2);
                    let after = self.cost(v1, &mut scratch) + self.cost(v2, &mut scratch);
                    if after < before || (after == before && rng.random_bool(0.5)) {
                        break;
                    }
                    self.swap(v1, i1, v2, i2);
                }
                near.iter_mut().for_each(|x| *x = false);
            }
        }
    }

    fn finish(self) -> Result<TannerGraph> {
        let n = self.var_adj.len();
        TannerGraph::from_check_lists(n, self.chk_adj)
    }
}

const REPAIR_BUDGET: usize = 2_000_000;

/// Random 4-cycle-free `(d_v, d_c)`-regular code with `n` variables.
pub fn random_regular<R: Rng + ?Sized>(
    n: usize,
    d_v: usize,
    d_c: usize,
    rng: &mut R,
    attempts: usize,
) -> Result<TannerGraph> {
    for _ in 0..attempts.max(1) {
        let mut b = Builder::new(n, d_v, d_c)?;
        let vars: Vec<usize> = (0..n).collect();
        b.fill(&vars, d_v, rng);
        if b.repair(rng, REPAIR_BUDGET) {
            let g = b.finish()?;
            if g.is_four_cycle_free() {
                return Ok(g);
            }
        }
    }
    Err(Error::Construction(format!(
        "no 4-cycle-free ({d_v},{d_c}) code with n = {n} found in {attempts} attempts"
    )))
}

/// Code with a planted absorption set.
#[derive(Debug, Clone)]
pub struct PlantedCode {
    pub graph: TannerGraph,
    /// Variables of the planted set; topology vertex `i` is `set_vars[i]`.
    pub set_vars: Vec<usize>,
}

/// Builds a 4-cycle-free regular code whose first `t.a` variables carry the
/// topology `t`: one check per edge, one per quad, and one private
/// unsatisfied check for every missing degree. Remaining sockets are filled
/// by the other variables at random.
pub fn plant_topology<R: Rng + ?Sized>(
    t: &Topology,
    n: usize,
    d_v: usize,
    d_c: usize,
    rng: &mut R,
    attempts: usize,
) -> Result<PlantedCode> {
    let deg = t.degrees();
    if deg.iter().any(|&d| d > d_v) {
        return Err(Error::Construction("topology degree exceeds d_v".into()));
    }
    if t.quads.is_empty() && d_c < 2 || !t.quads.is_empty() && d_c < 4 || n < t.a {
        return Err(Error::Construction(
            "check degree too small for the topology".into(),
        ));
    }
    let needed = t.edges.len() + t.quads.len() + t.b(d_v);
    for _ in 0..attempts.max(1) {
        let mut b = Builder::new(n, d_v, d_c)?;
        if needed > b.chk_adj.len() {
            return Err(Error::Construction(format!(
                "topology needs {needed} checks, code has {}",
                b.chk_adj.len()
            )));
        }
        let mut checks: Vec<usize> = (0..b.chk_adj.len()).collect();
        checks.shuffle(rng);
        let mut next = checks.into_iter();
        for &(u, v) in &t.edges {
            let c = next.next().expect("counted above");
            b.connect(u, c);
            b.connect(v, c);
        }
        for q in &t.quads {
            let c = next.next().expect("counted above");
            for &v in q {
                b.connect(v, c);
            }
        }
        for (v, &d) in deg.iter().enumerate() {
            for _ in d..d_v {
                let c = next.next().expect("counted above");
                b.connect(v, c);
            }
        }
        let outside: Vec<usize> = (t.a..n).collect();
        b.fill(&outside, d_v, rng);
        if b.repair(rng, REPAIR_BUDGET) {
            let graph = b.finish()?;
            if graph.is_four_cycle_free() {
                return Ok(PlantedCode {
                    graph,
                    set_vars: (0..t.a).collect(),
                });
            }
        }
    }
    Err(Error::Construction(format!(
        "could not complete a ({d_v},{d_c}) code with n = {n} around the topology in {attempts} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorption::AbsorptionSet;
    use crate::topology::{complete, dominant_eight_eight};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_code_is_regular_and_clean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_regular(32, 3, 6, &mut rng, 200).unwrap();
        assert!(g.is_regular());
        assert_eq!((g.d_v(), g.d_c(), g.n_checks()), (3, 6, 16));
        assert!(g.is_four_cycle_free());
    }

    #[test]
    fn planted_sets_survive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = plant_topology(&complete(5), 240, 6, 12, &mut rng, 200).unwrap();
        let s = AbsorptionSet::new(&p.graph, &p.set_vars).unwrap();
        assert_eq!((s.a, s.b), (5, 10));

        let p = plant_topology(&dominant_eight_eight(), 512, 6, 16, &mut rng, 200).unwrap();
        let s = AbsorptionSet::new(&p.graph, &p.set_vars).unwrap();
        assert_eq!((s.a, s.b), (8, 8));
        assert!(p.graph.is_four_cycle_free());
    }

    #[test]
    fn indivisible_sizes_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(random_regular(10, 3, 4, &mut rng, 5).is_err());
    }
}
