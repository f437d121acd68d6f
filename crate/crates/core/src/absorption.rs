//! Stopping and absorption set predicates, exhaustive enumeration and the
//! set catalog.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, TannerGraph};

/// Default cap on subset tests for [`brute_force_enumerate`].
pub const DEFAULT_WORK_BOUND: u128 = 100_000_000;

fn validate(g: &TannerGraph, vars: &[usize]) -> Result<Vec<usize>> {
    if vars.is_empty() {
        return Err(Error::InvalidSet("empty variable set".into()));
    }
    let mut sorted = vars.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSet("repeated variable index".into()));
    }
    if let Some(&v) = sorted.last().filter(|&&v| v >= g.n_vars()) {
        return Err(Error::InvalidSet(format!("variable {v} out of range")));
    }
    Ok(sorted)
}

/// How many times each neighbouring check is touched by `vars`.
pub fn check_multiplicities(g: &TannerGraph, vars: &[usize]) -> BTreeMap<usize, usize> {
    let mut mult = BTreeMap::new();
    for &v in vars {
        for &c in g.var_neighbors(v) {
            *mult.entry(c).or_insert(0) += 1;
        }
    }
    mult
}

/// Every neighbouring check touches the set at least twice.
pub fn is_stopping_set(g: &TannerGraph, vars: &[usize]) -> Result<bool> {
    let vars = validate(g, vars)?;
    Ok(check_multiplicities(g, &vars).values().all(|&m| m >= 2))
}

/// `Deg(v)` per member (in the given order) if every member has a strict
/// majority of its checks touched an even number of times, else `None`.
pub fn is_absorption_set(g: &TannerGraph, vars: &[usize]) -> Result<Option<Vec<usize>>> {
    validate(g, vars)?;
    let mult = check_multiplicities(g, vars);
    let mut degs = Vec::with_capacity(vars.len());
    for &v in vars {
        let deg = g
            .var_neighbors(v)
            .iter()
            .filter(|c| mult[c].is_multiple_of(2))
            .count();
        if 2 * deg <= g.var_degree(v) {
            return Ok(None);
        }
        degs.push(deg);
    }
    Ok(Some(degs))
}

/// A verified absorption set with its check partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbsorptionSet {
    pub vars: Vec<usize>,
    pub a: usize,
    pub b: usize,
    /// `Deg(v)` for each entry of `vars`.
    pub deg_profile: Vec<usize>,
    pub unsat_checks: Vec<usize>,
    /// Even-connected checks with their multiplicities.
    pub sat_checks: Vec<(usize, usize)>,
}

impl AbsorptionSet {
    /// Builds the set, failing if `vars` is not an absorption set of `g`.
    pub fn new(g: &TannerGraph, vars: &[usize]) -> Result<Self> {
        let s = Self::describe(g, vars)?;
        for (&v, &d) in s.vars.iter().zip(&s.deg_profile) {
            if 2 * d <= g.var_degree(v) {
                return Err(Error::InvalidSet(format!(
                    "variable {v} has only {d} of {} checks satisfied",
                    g.var_degree(v)
                )));
            }
        }
        Ok(s)
    }

    /// Computes the fields without requiring the majority condition.
    pub fn describe(g: &TannerGraph, vars: &[usize]) -> Result<Self> {
        let vars = validate(g, vars)?;
        let mult = check_multiplicities(g, &vars);
        let deg_profile = vars
            .iter()
            .map(|&v| {
                g.var_neighbors(v)
                    .iter()
                    .filter(|c| mult[c].is_multiple_of(2))
                    .count()
            })
            .collect();
        let unsat_checks: Vec<usize> = mult
            .iter()
            .filter(|(_, &m)| m % 2 == 1)
            .map(|(&c, _)| c)
            .collect();
        let sat_checks = mult
            .iter()
            .filter(|(_, &m)| m % 2 == 0)
            .map(|(&c, &m)| (c, m))
            .collect();
        Ok(AbsorptionSet {
            a: vars.len(),
            b: unsat_checks.len(),
            vars,
            deg_profile,
            unsat_checks,
            sat_checks,
        })
    }

    /// Degree profile sorted non-increasingly.
    pub fn class(&self) -> Vec<usize> {
        let mut d = self.deg_profile.clone();
        d.sort_unstable_by(|x, y| y.cmp(x));
        d
    }

    pub fn class_label(&self) -> String {
        class_label(&self.class())
    }
}

/// Formats a degree class as `[5 5 4]`.
pub fn class_label(class: &[usize]) -> String {
    let inner: Vec<String> = class.iter().map(usize::to_string).collect();
    format!("[{}]", inner.join(" "))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Non-negative rational number in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: usize,
    pub den: usize,
}

impl Ratio {
    pub fn new(num: usize, den: usize) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

/// `(a, b)` label, degree class and average EMD `b/a` of a set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub a: usize,
    pub b: usize,
    pub deg_profile: Vec<usize>,
    pub avg_emd: Ratio,
}

pub fn classify(s: &AbsorptionSet) -> Classification {
    Classification {
        a: s.a,
        b: s.b,
        deg_profile: s.class(),
        avg_emd: Ratio::new(s.b, s.a),
    }
}

/// Outcome of deleting members from a set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionOutcome {
    pub residual: Vec<usize>,
    pub absorbing: bool,
    pub a: usize,
    pub b: usize,
}

/// Removes `remove` from `s` and tests the survivors.
pub fn reduction_check(
    g: &TannerGraph,
    s: &AbsorptionSet,
    remove: &[usize],
) -> Result<ReductionOutcome> {
    let gone: BTreeSet<usize> = remove.iter().copied().collect();
    if let Some(v) = gone.iter().find(|v| s.vars.binary_search(v).is_err()) {
        return Err(Error::InvalidSet(format!("variable {v} is not in the set")));
    }
    let residual: Vec<usize> = s
        .vars
        .iter()
        .copied()
        .filter(|v| !gone.contains(v))
        .collect();
    if residual.is_empty() {
        return Err(Error::InvalidSet("cannot remove every member".into()));
    }
    let d = AbsorptionSet::describe(g, &residual)?;
    Ok(ReductionOutcome {
        absorbing: is_absorption_set(g, &residual)?.is_some(),
        a: d.a,
        b: d.b,
        residual,
    })
}

/// Number of subsets of size `1..=max_a` of `n` items.
pub fn subset_work(n: usize, max_a: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for k in 1..=max_a.min(n) {
        c = c * (n - k + 1) as u128 / k as u128;
        total = total.saturating_add(c);
    }
    total
}

/// All absorption sets with at most `max_a` members, by exhaustive search.
pub fn brute_force_enumerate(
    g: &TannerGraph,
    max_a: usize,
    work_bound: u128,
) -> Result<SetCatalog> {
    let needed = subset_work(g.n_vars(), max_a);
    if needed > work_bound {
        return Err(Error::WorkBound {
            needed,
            bound: work_bound,
        });
    }
    let n = g.n_vars();
    let found: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut cnt = vec![0u32; g.n_checks()];
            let mut cur = Vec::with_capacity(max_a);
            grow(g, first, max_a, &mut cnt, &mut cur, &mut out);
            out
        })
        .flatten()
        .collect();
    let mut cat = SetCatalog::default();
    for vars in found {
        cat.insert(AbsorptionSet::new(g, &vars)?, "brute-force");
    }
    Ok(cat)
}

fn grow(
    g: &TannerGraph,
    v: usize,
    max_a: usize,
    cnt: &mut [u32],
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    cur.push(v);
    for &c in g.var_neighbors(v) {
        cnt[c] += 1;
    }
    let absorbing = cur.iter().all(|&u| {
        let even = g
            .var_neighbors(u)
            .iter()
            .filter(|&&c| cnt[c].is_multiple_of(2))
            .count();
        2 * even > g.var_degree(u)
    });
    if absorbing {
        out.push(cur.clone());
    }
    if cur.len() < max_a {
        for w in v + 1..g.n_vars() {
            grow(g, w, max_a, cnt, cur, out);
        }
    }
    for &c in g.var_neighbors(v) {
        cnt[c] -= 1;
    }
    cur.pop();
}

/// One catalog row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub set: AbsorptionSet,
    pub class: String,
    pub source: String,
}

/// Serialized set record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetRecord {
    pub vars: Vec<usize>,
    pub a: usize,
    pub b: usize,
    pub deg_profile: Vec<usize>,
    pub unsat_checks: Vec<usize>,
}

/// Containment counts between two families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Containment {
    pub total: usize,
    pub contained: usize,
    pub free_standing: usize,
}

/// Deduplicated collection of absorption sets.
#[derive(Debug, Clone, Default)]
pub struct SetCatalog {
    entries: Vec<CatalogEntry>,
    seen: HashSet<Vec<usize>>,
}

impl SetCatalog {
    /// Adds a set; returns false if its variable set is already present.
    pub fn insert(&mut self, set: AbsorptionSet, source: &str) -> bool {
        if !self.seen.insert(set.vars.clone()) {
            return false;
        }
        self.entries.push(CatalogEntry {
            class: set.class_label(),
            set,
            source: source.to_string(),
        });
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, vars: &[usize]) -> bool {
        self.seen.contains(vars)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    /// Entries ordered by `(a, b, vars)`.
    pub fn sorted(&mut self) {
        self.entries
            .sort_by(|x, y| (x.set.a, x.set.b, &x.set.vars).cmp(&(y.set.a, y.set.b, &y.set.vars)));
    }

    /// Distinct variable sets, sorted.
    pub fn var_sets(&self) -> BTreeSet<Vec<usize>> {
        self.entries.iter().map(|e| e.set.vars.clone()).collect()
    }

    pub fn family(&self, a: usize, b: usize) -> impl Iterator<Item = &AbsorptionSet> {
        self.entries
            .iter()
            .map(|e| &e.set)
            .filter(move |s| s.a == a && s.b == b)
    }

    /// Number of sets per `(a, b)`.
    pub fn multiplicities(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry((e.set.a, e.set.b)).or_insert(0) += 1;
        }
        m
    }

    /// How often each variable appears in the sets of one family.
    pub fn participation_table(&self, n_vars: usize, family: (usize, usize)) -> Result<Vec<usize>> {
        let mut counts = vec![0; n_vars];
        let mut any = false;
        for s in self.family(family.0, family.1) {
            any = true;
            for &v in &s.vars {
                counts[v] += 1;
            }
        }
        if !any {
            return Err(Error::MissingFamily {
                a: family.0,
                b: family.1,
            });
        }
        Ok(counts)
    }

    /// Counts the `small` sets that are subsets of some `large` set.
    pub fn containment_analysis(
        &self,
        small: (usize, usize),
        large: (usize, usize),
    ) -> Result<Containment> {
        let smalls: HashSet<&Vec<usize>> = self.family(small.0, small.1).map(|s| &s.vars).collect();
        if smalls.is_empty() {
            return Err(Error::MissingFamily {
                a: small.0,
                b: small.1,
            });
        }
        if self.family(large.0, large.1).next().is_none() {
            return Err(Error::MissingFamily {
                a: large.0,
                b: large.1,
            });
        }
        let mut contained: HashSet<&Vec<usize>> = HashSet::new();
        if small.0 < large.0 {
            for l in self.family(large.0, large.1) {
                subsets_of_size(&l.vars, small.0, &mut |sub| {
                    if let Some(s) = smalls.get(&sub.to_vec()) {
                        contained.insert(s);
                    }
                });
            }
        }
        Ok(Containment {
            total: smalls.len(),
            contained: contained.len(),
            free_standing: smalls.len() - contained.len(),
        })
    }

    pub fn records(&self) -> Vec<SetRecord> {
        self.entries
            .iter()
            .map(|e| SetRecord {
                vars: e.set.vars.clone(),
                a: e.set.a,
                b: e.set.b,
                deg_profile: e.set.deg_profile.clone(),
                unsat_checks: e.set.unsat_checks.clone(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("records serialize")
    }

    /// Rebuilds a catalog from JSON records, re-verifying each set.
    pub fn from_json(g: &TannerGraph, text: &str) -> Result<Self> {
        let records: Vec<SetRecord> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidSet(format!("bad catalog JSON: {e}")))?;
        let mut cat = SetCatalog::default();
        for r in records {
            cat.insert(AbsorptionSet::new(g, &r.vars)?, "file");
        }
        Ok(cat)
    }

    /// CSV with columns `a,b,class,multiplicity`.
    pub fn summary_csv(&self) -> String {
        let mut groups: BTreeMap<(usize, usize, String), usize> = BTreeMap::new();
        for e in &self.entries {
            *groups
                .entry((e.set.a, e.set.b, e.class.clone()))
                .or_insert(0) += 1;
        }
        let mut out = String::from("a,b,class,multiplicity\n");
        for ((a, b, class), m) in groups {
            let _ = writeln!(out, "{a},{b},{class},{m}");
        }
        out
    }

    /// Informational notes on codeword supports found among the sets.
    pub fn codeword_notes(&self) -> Vec<String> {
        let weights: BTreeSet<usize> = self
            .entries
            .iter()
            .filter(|e| e.set.b == 0)
            .map(|e| e.set.a)
            .collect();
        weights
            .into_iter()
            .map(|w| format!("codeword of weight {w}"))
            .collect()
    }
}

fn subsets_of_size(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize])) {
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
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f);
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three variables pairwise sharing one check each, plus one private check.
    fn triangle() -> TannerGraph {
        // checks 0..3 are the pair checks, 3..6 are private
        TannerGraph::from_check_lists(
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
        .unwrap()
    }

    #[test]
    fn triangle_is_absorbing() {
        let g = triangle();
        assert_eq!(
            is_absorption_set(&g, &[0, 1, 2]).unwrap(),
            Some(vec![2, 2, 2])
        );
        assert!(!is_stopping_set(&g, &[0, 1, 2]).unwrap());
        let s = AbsorptionSet::new(&g, &[2, 0, 1]).unwrap();
        assert_eq!((s.a, s.b), (3, 3));
        assert_eq!(s.unsat_checks, vec![3, 4, 5]);
        assert_eq!(s.sat_checks, vec![(0, 2), (1, 2), (2, 2)]);
        let c = classify(&s);
        assert_eq!(c.avg_emd, Ratio::new(1, 1));
    }

    #[test]
    fn majority_is_strict() {
        let g = triangle();
        // a pair has Deg 1 of 3 per member
        assert_eq!(is_absorption_set(&g, &[0, 1]).unwrap(), None);
        // d_v = 2, Deg exactly 1 = half: rejected
        let h = TannerGraph::from_check_lists(2, vec![vec![0, 1], vec![0], vec![1]]).unwrap();
        assert_eq!(is_absorption_set(&h, &[0, 1]).unwrap(), None);
    }

    #[test]
    fn bad_inputs() {
        let g = triangle();
        assert!(is_absorption_set(&g, &[]).is_err());
        assert!(is_absorption_set(&g, &[0, 0]).is_err());
        assert!(is_stopping_set(&g, &[7]).is_err());
    }

    #[test]
    fn reduction_basics() {
        let g = triangle();
        let s = AbsorptionSet::new(&g, &[0, 1, 2]).unwrap();
        let same = reduction_check(&g, &s, &[]).unwrap();
        assert!(same.absorbing);
        assert_eq!(same.residual, vec![0, 1, 2]);
        let less = reduction_check(&g, &s, &[1]).unwrap();
        assert!(!less.absorbing);
        assert!(reduction_check(&g, &s, &[0, 1, 2]).is_err());
        assert!(reduction_check(&g, &s, &[5]).is_err());
    }

    #[test]
    fn catalog_dedup_and_counts() {
        let g = triangle();
        let mut cat = SetCatalog::default();
        let s = AbsorptionSet::new(&g, &[0, 1, 2]).unwrap();
        assert!(cat.insert(s.clone(), "test"));
        assert!(!cat.insert(s, "again"));
        assert_eq!(cat.multiplicities()[&(3, 3)], 1);
        assert_eq!(cat.participation_table(3, (3, 3)).unwrap(), vec![1, 1, 1]);
        assert!(matches!(
            cat.participation_table(3, (4, 4)),
            Err(Error::MissingFamily { .. })
        ));
        assert_eq!(cat.summary_csv(), "a,b,class,multiplicity\n3,3,[2 2 2],1\n");
        let back = SetCatalog::from_json(&g, &cat.to_json()).unwrap();
        assert_eq!(back.var_sets(), cat.var_sets());
    }

    #[test]
    fn work_bound_guard() {
        assert_eq!(subset_work(5, 2), 15);
        let g = triangle();
        assert!(matches!(
            brute_force_enumerate(&g, 3, 5),
            Err(Error::WorkBound { needed: 7, .. })
        ));
        let cat = brute_force_enumerate(&g, 3, DEFAULT_WORK_BOUND).unwrap();
        assert_eq!(
            cat.var_sets().into_iter().collect::<Vec<_>>(),
            vec![vec![0, 1, 2]]
        );
    }

    #[test]
    fn ratio_order() {
        assert!(Ratio::new(12, 7) > Ratio::new(8, 8));
        assert_eq!(Ratio::new(10, 5), Ratio::new(2, 1));
    }
}
