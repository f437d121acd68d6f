//! Linearised message passing inside an absorption set.
//!
//! Messages live on the (variable, internal check) incidences of the set. The
//! variable map `V` sums a variable's other inputs; the check map `C` hands
//! each message to the partner slot on the same check. `VC` is the
//! non-backtracking operator of the hidden-check graph, and its dominant
//! eigenpair decides how fast extrinsic information is absorbed.

use serde::{Deserialize, Serialize};

use crate::absorption::AbsorptionSet;
use crate::topology::Topology;
use crate::{Error, Result, TannerGraph};

/// Power iteration defaults.
pub const MAX_POWER_ITERS: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Linear model of one set.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalModel {
    /// Set members (global variable ids, or topology vertices).
    pub vars: Vec<usize>,
    /// `(member position, internal check id)` for every message slot.
    pub edge_index: Vec<(usize, usize)>,
    /// Partner slot on the same check; `C` as a permutation.
    pub partner: Vec<usize>,
    /// Unsatisfied checks of the set.
    pub b: usize,
    /// True when a four-member check forced a fixed routing choice.
    pub heuristic: bool,
    mu_max: f64,
    v_max: Vec<f64>,
}

/// Internal check as the member positions it joins.
type Internal = Vec<usize>;

const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

fn assemble(
    vars: Vec<usize>,
    checks: &[(usize, Internal)],
    pairing: &[usize],
    b: usize,
) -> InternalModel {
    let a = vars.len();
    let mut edge_index = Vec::new();
    for p in 0..a {
        for (id, members) in checks {
            if members.contains(&p) {
                edge_index.push((p, *id));
            }
        }
    }
    let slot = |p: usize, id: usize| {
        edge_index
            .iter()
            .position(|&e| e == (p, id))
            .expect("slot exists")
    };
    let mut partner = vec![usize::MAX; edge_index.len()];
    let mut quad_no = 0;
    for (id, members) in checks {
        let pairs: Vec<(usize, usize)> = if members.len() == 2 {
            vec![(members[0], members[1])]
        } else {
            let choice = PAIRINGS[pairing[quad_no]];
            quad_no += 1;
            choice
                .iter()
                .map(|&(i, j)| (members[i], members[j]))
                .collect()
        };
        for (u, v) in pairs {
            let (eu, ev) = (slot(u, *id), slot(v, *id));
            partner[eu] = ev;
            partner[ev] = eu;
        }
    }
    InternalModel {
        vars,
        edge_index,
        partner,
        b,
        heuristic: quad_no > 0,
        mu_max: f64::NAN,
        v_max: Vec::new(),
    }
}

/// Builds the model for every quad routing and keeps the one with the
/// largest dominant eigenvalue.
fn best_routing(vars: Vec<usize>, checks: &[(usize, Internal)], b: usize) -> Result<InternalModel> {
    let quads = checks.iter().filter(|(_, m)| m.len() == 4).count();
    let mut best: Option<InternalModel> = None;
    for code in 0..3usize.pow(quads as u32) {
        let pairing: Vec<usize> = (0..quads)
            .map(|k| code / 3usize.pow(k as u32) % 3)
            .collect();
        let mut m = assemble(vars.clone(), checks, &pairing, b);
        let (mu, v) = m.power_iteration(DEFAULT_TOL)?;
        m.mu_max = mu;
        m.v_max = v;
        if best.as_ref().is_none_or(|b| mu > b.mu_max) {
            best = Some(m);
        }
    }
    Ok(best.expect("at least one routing"))
}

/// Builds the model of a set found in `g`.
///
/// Satisfied checks must touch the set two or four times. With `force`, the
/// set need not be an absorption set, which allows toy models.
pub fn build_model(g: &TannerGraph, s: &AbsorptionSet, force: bool) -> Result<InternalModel> {
    if !force {
        AbsorptionSet::new(g, &s.vars)?;
    }
    let mut checks = Vec::new();
    for &(c, mult) in &s.sat_checks {
        if mult != 2 && mult != 4 {
            return Err(Error::UnsupportedMultiplicity {
                check: c,
                multiplicity: mult,
            });
        }
        let members: Vec<usize> = g
            .check_neighbors(c)
            .iter()
            .filter_map(|v| s.vars.binary_search(v).ok())
            .collect();
        checks.push((c, members));
    }
    best_routing(s.vars.clone(), &checks, s.b)
}

/// Builds the model directly from a hidden-check topology.
pub fn model_from_topology(t: &Topology, d_v: usize) -> Result<InternalModel> {
    let mut checks: Vec<(usize, Internal)> = t
        .edges
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| (i, vec![u, v]))
        .collect();
    let e = checks.len();
    checks.extend(t.quads.iter().enumerate().map(|(i, q)| (e + i, q.to_vec())));
    best_routing((0..t.a).collect(), &checks, t.b(d_v))
}

impl InternalModel {
    pub fn dim(&self) -> usize {
        self.edge_index.len()
    }

    pub fn a(&self) -> usize {
        self.vars.len()
    }

    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }

    pub fn v_max(&self) -> &[f64] {
        &self.v_max
    }

    /// Column indices of the ones in row `e` of `VC`.
    pub fn vc_row(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        let (p, _) = self.edge_index[e];
        self.edge_index
            .iter()
            .enumerate()
            .filter(move |&(f, &(q, _))| q == p && f != e)
            .map(move |(f, _)| self.partner[f])
    }

    /// `VC` as a dense row-major matrix.
    pub fn vc_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (e, row) in m.iter_mut().enumerate() {
            for col in self.vc_row(e) {
                row[col] += 1.0;
            }
        }
        m
    }

    /// `VC` as `(row, col, value)` triplets.
    pub fn vc_triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.dim())
            .flat_map(|e| self.vc_row(e).map(move |c| (e, c, 1.0)))
            .collect()
    }

    /// Applies `VC` to an edge vector.
    pub fn apply_vc(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|e| self.vc_row(e).map(|c| x[c]).sum())
            .collect()
    }

    /// Spreads per-member values onto message slots.
    pub fn lift(&self, per_var: &[f64]) -> Vec<f64> {
        self.edge_index.iter().map(|&(p, _)| per_var[p]).collect()
    }

    fn power_iteration(&self, tol: f64) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        if n == 0 {
            return Ok((0.0, Vec::new()));
        }
        let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_POWER_ITERS {
            // iterate on VC + I so that periodic spectra still converge
            let w: Vec<f64> = self
                .apply_vc(&v)
                .iter()
                .zip(&v)
                .map(|(a, b)| a + b)
                .collect();
            let len = norm(&w);
            if len == 0.0 {
                return Ok((0.0, v));
            }
            let next: Vec<f64> = w.iter().map(|x| x / len).collect();
            let avc = self.apply_vc(&next);
            let mu: f64 = avc.iter().zip(&next).map(|(a, b)| a * b).sum();
            residual = avc
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - mu * b).abs())
                .fold(0.0, f64::max);
            v = next;
            if residual <= tol * mu.abs().max(f64::MIN_POSITIVE) || (mu == 0.0 && residual == 0.0) {
                if v.iter().sum::<f64>() < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                return Ok((mu, v));
            }
        }
        Err(Error::NonConvergence {
            iterations: MAX_POWER_ITERS,
            residual,
        })
    }

    /// Serializable dump of the model.
    pub fn dump(&self) -> ModelDump {
        ModelDump {
            vars: self.vars.clone(),
            edge_index: self.edge_index.clone(),
            vc: self.vc_triplets(),
            mu_max: self.mu_max,
            v_max: self.v_max.clone(),
            heuristic_routing: self.heuristic,
        }
    }
}

/// JSON form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub vars: Vec<usize>,
    pub edge_index: Vec<(usize, usize)>,
    pub vc: Vec<(usize, usize, f64)>,
    pub mu_max: f64,
    pub v_max: Vec<f64>,
    pub heuristic_routing: bool,
}

/// Dominant eigenpair of `VC`, recomputed to tolerance `tol`.
///
/// `v` has unit length and a positive entry sum.
pub fn dominant_eigen(model: &InternalModel, tol: f64) -> Result<(f64, Vec<f64>)> {
    model.power_iteration(tol)
}

/// `(d_v - 1) - b/a`, exact for symmetric sets with `a = b`.
pub fn approx_gain(a: usize, b: usize, d_v: usize) -> f64 {
    (d_v as f64 - 1.0) - b as f64 / a as f64
}

/// Channel and extrinsic means fed into the linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsInput {
    /// Intrinsic LLR per member.
    pub lambda: Vec<f64>,
    /// `lambda_ex[j]` is the extrinsic injection per member at iteration `j+1`.
    pub lambda_ex: Vec<Vec<f64>>,
    pub iters: usize,
}

impl DynamicsInput {
    pub fn validate(&self, a: usize) -> Result<()> {
        if self.lambda.len() != a {
            return Err(Error::OutOfRange(format!(
                "lambda has {} entries for a set of {a}",
                self.lambda.len()
            )));
        }
        if self.lambda_ex.len() < self.iters
            || self.lambda_ex.iter().take(self.iters).any(|r| r.len() != a)
        {
            return Err(Error::OutOfRange(
                "lambda_ex must give a entries for each iteration".into(),
            ));
        }
        Ok(())
    }
}

/// Decision statistic of the set and whether it signals failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beta {
    pub beta: f64,
    pub fails: bool,
}

/// `beta = lambda.v + sum_j (lambda_ex_j + lambda).v / mu^j`, failing when
/// `beta <= 0`.
pub fn failure_statistic(model: &InternalModel, input: &DynamicsInput) -> Result<Beta> {
    input.validate(model.a())?;
    let v = model.v_max();
    let mu = model.mu_max();
    if input.iters > 0 && mu <= 0.0 {
        return Err(Error::OutOfRange(
            "failure statistic needs a positive mu_max".into(),
        ));
    }
    let dot =
        |per_var: &[f64]| -> f64 { model.lift(per_var).iter().zip(v).map(|(x, y)| x * y).sum() };
    let base = dot(&input.lambda);
    let mut beta = base;
    let mut scale = 1.0;
    for j in 0..input.iters {
        scale /= mu;
        beta += (dot(&input.lambda_ex[j]) + base) * scale;
    }
    Ok(Beta {
        beta,
        fails: beta <= 0.0,
    })
}

/// Exact linear recursion `x_0 = lambda`,
/// `x_i = VC x_{i-1} + lambda + lambda_ex_i`; returns `x_0..=x_I`.
pub fn simulate_linear_iterations(
    model: &InternalModel,
    input: &DynamicsInput,
) -> Result<Vec<Vec<f64>>> {
    input.validate(model.a())?;
    let lam = model.lift(&input.lambda);
    let mut xs = vec![lam.clone()];
    for j in 0..input.iters {
        let ex = model.lift(&input.lambda_ex[j]);
        let prev = xs.last().expect("x_0 present");
        let next = model
            .apply_vc(prev)
            .iter()
            .zip(&lam)
            .zip(&ex)
            .map(|((a, b), c)| a + b + c)
            .collect();
        xs.push(next);
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{complete, dominant_eight_eight};

    #[test]
    fn dominant_set_lemma() {
        let m = model_from_topology(&dominant_eight_eight(), 6).unwrap();
        assert_eq!(m.dim(), 40);
        assert!((m.mu_max() - 4.0).abs() < 1e-9);
        let target = 1.0 / 40f64.sqrt();
        assert!(m.v_max().iter().all(|x| (x - target).abs() < 1e-8));
        for e in 0..m.dim() {
            assert_eq!(m.vc_row(e).count(), 4);
        }
    }

    #[test]
    fn complete_graph_gain() {
        let m = model_from_topology(&complete(5), 6).unwrap();
        assert!((m.mu_max() - 3.0).abs() < 1e-9);
        assert_eq!(approx_gain(5, 10, 6), 3.0);
        assert!((approx_gain(7, 12, 6) - 3.285_714_285_714_285_5).abs() < 1e-12);
    }

    #[test]
    fn toy_pair_is_degenerate() {
        let g = TannerGraph::from_check_lists(2, vec![vec![0, 1], vec![0], vec![1]]).unwrap();
        let s = AbsorptionSet::describe(&g, &[0, 1]).unwrap();
        assert!(build_model(&g, &s, false).is_err());
        let m = build_model(&g, &s, true).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.partner, vec![1, 0]);
        assert_eq!(m.mu_max(), 0.0);
    }

    #[test]
    fn beta_trivial_cases() {
        let m = model_from_topology(&dominant_eight_eight(), 6).unwrap();
        let pos = DynamicsInput {
            lambda: vec![2.0; 8],
            lambda_ex: vec![],
            iters: 0,
        };
        let b = failure_statistic(&m, &pos).unwrap();
        let sum: f64 = m.v_max().iter().sum();
        assert!((b.beta - 2.0 * sum).abs() < 1e-9);
        assert!(!b.fails);
        let neg = DynamicsInput {
            lambda: vec![-2.0; 8],
            ..pos
        };
        assert!(failure_statistic(&m, &neg).unwrap().fails);
    }

    #[test]
    fn quad_routing_is_flagged() {
        let t = Topology::new(4, &[(0, 1), (2, 3)], &[[0, 1, 2, 3]]);
        assert!(t.is_err());
        let t = Topology::new(
            6,
            &[(0, 4), (1, 4), (2, 5), (3, 5), (4, 5)],
            &[[0, 1, 2, 3]],
        )
        .unwrap();
        let m = model_from_topology(&t, 6).unwrap();
        assert!(m.heuristic);
        for e in 0..m.dim() {
            assert_eq!(m.partner[m.partner[e]], e);
        }
    }
}
