//! Tanner graph representation, alist I/O and quasi-cyclic expansion.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bipartite variable/check graph of a binary LDPC code.
///
/// Indices are 0-based. Adjacency lists are sorted and free of duplicates, and
/// the two directions always agree. The graph is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    n_checks: usize,
    var_adj: Vec<Vec<usize>>,
    chk_adj: Vec<Vec<usize>>,
    d_v: usize,
    d_c: usize,
    regular: bool,
}

impl TannerGraph {
    /// Builds a graph from per-check variable lists.
    pub fn from_check_lists(n_vars: usize, chk_adj: Vec<Vec<usize>>) -> Result<Self> {
        let mut var_adj = vec![Vec::new(); n_vars];
        for (c, vars) in chk_adj.iter().enumerate() {
            for &v in vars {
                if v >= n_vars {
                    return Err(Error::InvalidGraph(format!(
                        "check {c} references variable {v}, but there are only {n_vars}"
                    )));
                }
                var_adj[v].push(c);
            }
        }
        Self::from_parts(var_adj, chk_adj)
    }

    /// Builds a graph from (variable, check) incidences.
    pub fn from_edges(n_vars: usize, n_checks: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut chk_adj = vec![Vec::new(); n_checks];
        for &(v, c) in edges {
            if c >= n_checks {
                return Err(Error::InvalidGraph(format!(
                    "edge ({v},{c}) references check {c}, but there are only {n_checks}"
                )));
            }
            chk_adj[c].push(v);
        }
        Self::from_check_lists(n_vars, chk_adj)
    }

    fn from_parts(mut var_adj: Vec<Vec<usize>>, mut chk_adj: Vec<Vec<usize>>) -> Result<Self> {
        for (v, list) in var_adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate incidence at variable {v}"
                )));
            }
        }
        for list in chk_adj.iter_mut() {
            list.sort_unstable();
        }
        let n_vars = var_adj.len();
        let n_checks = chk_adj.len();
        let d_v = var_adj.iter().map(Vec::len).max().unwrap_or(0);
        let d_c = chk_adj.iter().map(Vec::len).max().unwrap_or(0);
        let regular =
            var_adj.iter().all(|l| l.len() == d_v) && chk_adj.iter().all(|l| l.len() == d_c);
        Ok(TannerGraph {
            n_vars,
            n_checks,
            var_adj,
            chk_adj,
            d_v,
            d_c,
            regular,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_edges(&self) -> usize {
        self.var_adj.iter().map(Vec::len).sum()
    }

    /// Checks adjacent to variable `v`, sorted.
    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_adj[v]
    }

    /// Variables adjacent to check `c`, sorted.
    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.chk_adj[c]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_adj[v].len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.chk_adj[c].len()
    }

    /// Maximum variable degree; the variable degree of a regular code.
    pub fn d_v(&self) -> usize {
        self.d_v
    }

    /// Maximum check degree; the check degree of a regular code.
    pub fn d_c(&self) -> usize {
        self.d_c
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// Returns `(d_v, d_c)` or an error if the code is irregular.
    pub fn require_regular(&self) -> Result<(usize, usize)> {
        if self.regular {
            Ok((self.d_v, self.d_c))
        } else {
            Err(Error::InvalidGraph(
                "operation requires a regular code".into(),
            ))
        }
    }

    /// True iff no two variables share two or more checks.
    pub fn is_four_cycle_free(&self) -> bool {
        let mut seen = vec![usize::MAX; self.n_vars];
        for v in 0..self.n_vars {
            for &c in &self.var_adj[v] {
                for &u in &self.chk_adj[c] {
                    if u == v {
                        continue;
                    }
                    if seen[u] == v {
                        return false;
                    }
                    seen[u] = v;
                }
            }
        }
        true
    }

    /// True iff every check sees an even number of ones in `bits`.
    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        self.chk_adj
            .iter()
            .all(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// Reads and parses an alist file.
    pub fn read_alist(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_alist(&text)
    }

    /// Parses the alist interchange format (1-based indices, zero padding).
    pub fn parse_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let mut next_line = |what: &str| -> Result<(usize, Vec<usize>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::Alist {
                line: 0,
                msg: format!("unexpected end of input while reading {what}"),
            })?;
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Alist {
                        line: no,
                        msg: format!("'{t}' is not a non-negative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((no, nums))
        };

        let (no, header) = next_line("header")?;
        let [n, m] = header[..] else {
            return Err(Error::Alist {
                line: no,
                msg: "header must be \"n m\"".into(),
            });
        };
        let (no, maxes) = next_line("maximum degrees")?;
        let [max_dv, max_dc] = maxes[..] else {
            return Err(Error::Alist {
                line: no,
                msg: "second line must be \"max_dv max_dc\"".into(),
            });
        };
        let (no, var_degs) = next_line("variable degrees")?;
        if var_degs.len() != n {
            return Err(Error::Alist {
                line: no,
                msg: format!("expected {n} variable degrees, found {}", var_degs.len()),
            });
        }
        if let Some(d) = var_degs.iter().find(|&&d| d > max_dv) {
            return Err(Error::Alist {
                line: no,
                msg: format!("variable degree {d} exceeds max {max_dv}"),
            });
        }
        let (no, chk_degs) = next_line("check degrees")?;
        if chk_degs.len() != m {
            return Err(Error::Alist {
                line: no,
                msg: format!("expected {m} check degrees, found {}", chk_degs.len()),
            });
        }
        if let Some(d) = chk_degs.iter().find(|&&d| d > max_dc) {
            return Err(Error::Alist {
                line: no,
                msg: format!("check degree {d} exceeds max {max_dc}"),
            });
        }

        let mut read_lists =
            |count: usize, degs: &[usize], max: usize, range: usize, kind: &str| {
                let mut out = Vec::with_capacity(count);
                for (i, &deg) in degs.iter().enumerate().take(count) {
                    let (no, entries) = next_line(kind)?;
                    // an empty list is written as a lone 0 so the line is not blank
                    if entries.len() > max.max(1) {
                        return Err(Error::Alist {
                            line: no,
                            msg: format!(
                                "{kind} {} lists {} entries, max is {max}",
                                i + 1,
                                entries.len()
                            ),
                        });
                    }
                    let list: Vec<usize> = entries
                        .iter()
                        .filter(|&&x| x != 0)
                        .map(|&x| x - 1)
                        .collect();
                    if list.len() != deg {
                        return Err(Error::Alist {
                            line: no,
                            msg: format!(
                                "{kind} {} has {} entries but degree {deg}",
                                i + 1,
                                list.len()
                            ),
                        });
                    }
                    if let Some(&bad) = list.iter().find(|&&x| x >= range) {
                        return Err(Error::Alist {
                            line: no,
                            msg: format!("index {} out of range 1..={range}", bad + 1),
                        });
                    }
                    out.push((no, list));
                }
                Ok(out)
            };
        let var_lists = read_lists(n, &var_degs, max_dv, m, "variable")?;
        let chk_lists = read_lists(m, &chk_degs, max_dc, n, "check")?;

        let mut from_vars = vec![Vec::new(); m];
        for (v, (no, checks)) in var_lists.iter().enumerate() {
            for &c in checks {
                from_vars[c].push(v);
            }
            let mut sorted = checks.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Alist {
                    line: *no,
                    msg: "duplicate check index".into(),
                });
            }
        }
        for (c, (no, vars)) in chk_lists.iter().enumerate() {
            let mut sorted = vars.clone();
            sorted.sort_unstable();
            if sorted != from_vars[c] {
                return Err(Error::Alist {
                    line: *no,
                    msg: format!(
                        "check {} adjacency disagrees with the variable lists",
                        c + 1
                    ),
                });
            }
        }
        Self::from_check_lists(n, from_vars)
    }

    /// Writes the alist format: single spaces, zero padding, trailing newline.
    pub fn to_alist(&self) -> String {
        fn join(out: &mut String, items: impl Iterator<Item = usize>) {
            let mut first = true;
            for x in items {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_vars, self.n_checks);
        let _ = writeln!(out, "{} {}", self.d_v, self.d_c);
        join(&mut out, self.var_adj.iter().map(Vec::len));
        join(&mut out, self.chk_adj.iter().map(Vec::len));
        for list in &self.var_adj {
            let pad = self.d_v.max(1) - list.len();
            join(
                &mut out,
                list.iter()
                    .map(|c| c + 1)
                    .chain(std::iter::repeat_n(0, pad)),
            );
        }
        for list in &self.chk_adj {
            let pad = self.d_c.max(1) - list.len();
            join(
                &mut out,
                list.iter()
                    .map(|v| v + 1)
                    .chain(std::iter::repeat_n(0, pad)),
            );
        }
        out
    }
}

/// Block description of a quasi-cyclic (or general block-permutation) code.
///
/// `perms[i][j][t]` is the row offset inside block-row `i` hit by column offset
/// `t` of block-column `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcBlockSpec {
    pub rows: usize,
    pub cols: usize,
    pub block_size: usize,
    pub perms: Vec<Vec<Vec<usize>>>,
}

impl QcBlockSpec {
    /// Circulant blocks: column offset `t` maps to row offset `(t + shift) mod block_size`.
    pub fn circulant(block_size: usize, shifts: &[Vec<usize>]) -> Self {
        let rows = shifts.len();
        let cols = shifts.first().map_or(0, Vec::len);
        let perms = shifts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&s| (0..block_size).map(|t| (t + s) % block_size).collect())
                    .collect()
            })
            .collect();
        QcBlockSpec {
            rows,
            cols,
            block_size,
            perms,
        }
    }

    /// Array-code shifts `i*j mod p`; 4-cycle free whenever `p` is prime and
    /// `rows, cols <= p`.
    pub fn array_code(rows: usize, cols: usize, p: usize) -> Self {
        let shifts: Vec<Vec<usize>> = (0..rows)
            .map(|i| (0..cols).map(|j| (i * j) % p).collect())
            .collect();
        Self::circulant(p, &shifts)
    }

    /// Expands the block description into a Tanner graph.
    pub fn expand(&self) -> Result<TannerGraph> {
        let b = self.block_size;
        if self.perms.len() != self.rows || self.perms.iter().any(|r| r.len() != self.cols) {
            return Err(Error::InvalidGraph(format!(
                "permutation table must be {}x{} blocks",
                self.rows, self.cols
            )));
        }
        let mut chk_adj = vec![Vec::with_capacity(self.cols); self.rows * b];
        for (i, row) in self.perms.iter().enumerate() {
            for (j, perm) in row.iter().enumerate() {
                let mut hit = vec![false; b];
                if perm.len() != b {
                    return Err(Error::NonBijective {
                        row: i,
                        col: j,
                        size: b,
                    });
                }
                for (t, &r) in perm.iter().enumerate() {
                    if r >= b || hit[r] {
                        return Err(Error::NonBijective {
                            row: i,
                            col: j,
                            size: b,
                        });
                    }
                    hit[r] = true;
                    chk_adj[i * b + r].push(j * b + t);
                }
            }
        }
        TannerGraph::from_check_lists(self.cols * b, chk_adj)
    }
}

/// Free-function form of [`QcBlockSpec::expand`].
pub fn expand_qc(spec: &QcBlockSpec) -> Result<TannerGraph> {
    spec.expand()
}
