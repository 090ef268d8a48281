//! Dense two-phase simplex with Bland's rule.
//!
//! Sized for the small programs in this crate (concave closures with a few
//! thousand columns and a dozen rows, matroid-polytope LPs with a handful of
//! variables). Variables are shifted to their lower bounds, finite upper
//! bounds become explicit rows, and phase 1 drives artificial variables out
//! instead of using a big-M penalty.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Pivot and ratio-test tolerance.
const EPS: f64 = 1e-10;

pub const MAX_VARIABLES: usize = 5000;
pub const MAX_CONSTRAINTS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize c.x` subject to linear rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// `(lo, hi)` per variable; `hi = None` means unbounded above.
    pub bounds: Vec<(f64, Option<f64>)>,
}

impl LinearProgram {
    /// A program over `n` variables with bounds `[0, inf)`.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, None); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn bound(&mut self, var: usize, lo: f64, hi: Option<f64>) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n > MAX_VARIABLES || self.constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::TooLarge {
                what: "simplex (variables/constraints)",
                size: n.max(self.constraints.len()) as u128,
                limit: MAX_VARIABLES as u128,
            });
        }
        if self.bounds.len() != n {
            return Err(Error::InvalidProgram(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::InvalidProgram(format!(
                    "row {r} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidProgram(format!("row {r} is not finite")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() {
                return Err(Error::InvalidProgram(format!(
                    "variable {j} needs a finite lower bound"
                )));
            }
            if let Some(hi) = hi {
                if hi.is_nan() || hi < lo {
                    return Err(Error::InvalidProgram(format!(
                        "variable {j} has bounds [{lo}, {hi}]"
                    )));
                }
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProgram("objective is not finite".into()));
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - v);
            if let Some(hi) = hi {
                worst = worst.max(v - hi);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Primal solution; empty unless optimal.
    pub x: Vec<f64>,
    /// `c.x` when optimal, `-inf` when infeasible, `+inf` when unbounded.
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SolverOptions {
    /// Pivot cap across both phases; `None` picks a size-based default.
    pub max_pivots: Option<usize>,
    /// Writes one line per pivot to this file when set.
    pub trace: Option<PathBuf>,
}

pub fn solve_lp(p: &LinearProgram) -> Result<LpOutcome> {
    solve_lp_with(p, &SolverOptions::default())
}

pub fn solve_lp_with(p: &LinearProgram, opts: &SolverOptions) -> Result<LpOutcome> {
    p.validate()?;
    let mut trace = opts.trace.as_ref().map(|_| String::new());
    let out = Tableau::build(p).and_then(|t| t.solve(p, opts, trace.as_mut()));
    if let (Some(path), Some(text)) = (&opts.trace, trace) {
        std::fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write trace {}: {e}", path.display())))?;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// `rows x (cols + 1)`, rhs in the last column.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    n_struct: usize,
}

enum Pivoting {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(p: &LinearProgram) -> Result<Tableau> {
        let n = p.num_vars();
        let lo: Vec<f64> = p.bounds.iter().map(|b| b.0).collect();

        // rows in y = x - lo, rhs made non-negative
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
        for c in &p.constraints {
            let shift: f64 = c.coeffs.iter().zip(&lo).map(|(a, l)| a * l).sum();
            rows.push((c.coeffs.clone(), c.relation, c.rhs - shift));
        }
        for (j, &(l, hi)) in p.bounds.iter().enumerate() {
            if let Some(hi) = hi {
                let mut coeffs = vec![0.0; n];
                coeffs[j] = 1.0;
                rows.push((coeffs, Relation::Le, hi - l));
            }
        }
        for row in rows.iter_mut() {
            if row.2 < 0.0 {
                row.0.iter_mut().for_each(|a| *a = -*a);
                row.2 = -row.2;
                row.1 = match row.1 {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = n + n_slack + n_art;
        let mut kinds = vec![ColKind::Structural; n];
        kinds.extend(std::iter::repeat_n(ColKind::Slack, n_slack));
        kinds.extend(std::iter::repeat_n(ColKind::Artificial, n_art));

        let mut a = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut s, mut r) = (n, n + n_slack);
        for (coeffs, rel, rhs) in rows {
            let mut line = vec![0.0; cols + 1];
            line[..n].copy_from_slice(&coeffs);
            line[cols] = rhs;
            match rel {
                Relation::Le => {
                    line[s] = 1.0;
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    line[s] = -1.0;
                    s += 1;
                    line[r] = 1.0;
                    basis.push(r);
                    r += 1;
                }
                Relation::Eq => {
                    line[r] = 1.0;
                    basis.push(r);
                    r += 1;
                }
            }
            a.push(line);
        }
        Ok(Tableau {
            a,
            basis,
            kinds,
            n_struct: n,
        })
    }

    fn cols(&self) -> usize {
        self.kinds.len()
    }

    fn solve(
        mut self,
        p: &LinearProgram,
        opts: &SolverOptions,
        mut trace: Option<&mut String>,
    ) -> Result<LpOutcome> {
        let cols = self.cols();
        let cap = opts
            .max_pivots
            .unwrap_or(50 * (cols + self.a.len()) + 1000);
        let mut pivots = 0usize;

        // phase 1: maximize -sum(artificials)
        if self.kinds.contains(&ColKind::Artificial) {
            let cost: Vec<f64> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { -1.0 } else { 0.0 })
                .collect();
            match self.optimize(&cost, true, cap, &mut pivots, 1, trace.as_deref_mut())? {
                Pivoting::Optimal => {}
                Pivoting::Unbounded => {
                    return Err(Error::Internal("phase 1 reported unbounded".into()))
                }
            }
            let infeasibility: f64 = self
                .basis
                .iter()
                .zip(&self.a)
                .filter(|(b, _)| self.kinds[**b] == ColKind::Artificial)
                .map(|(_, row)| row[cols])
                .sum();
            let scale = 1.0 + self.a.iter().map(|r| r[cols].abs()).fold(0.0, f64::max);
            if infeasibility > 1e-9 * scale {
                return Ok(LpOutcome {
                    status: LpStatus::Infeasible,
                    x: Vec::new(),
                    value: f64::NEG_INFINITY,
                });
            }
            self.expel_artificials(&mut pivots);
        }

        let mut cost = vec![0.0; cols];
        cost[..self.n_struct].copy_from_slice(&p.objective);
        match self.optimize(&cost, false, cap, &mut pivots, 2, trace)? {
            Pivoting::Unbounded => Ok(LpOutcome {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                value: f64::INFINITY,
            }),
            Pivoting::Optimal => {
                let mut x: Vec<f64> = p.bounds.iter().map(|b| b.0).collect();
                for (row, &b) in self.a.iter().zip(&self.basis) {
                    if b < self.n_struct {
                        x[b] += row[cols];
                    }
                }
                let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                Ok(LpOutcome {
                    status: LpStatus::Optimal,
                    x,
                    value,
                })
            }
        }
    }

    /// Primal simplex on the current basis for `cost`, Bland's rule.
    fn optimize(
        &mut self,
        cost: &[f64],
        allow_artificial: bool,
        cap: usize,
        pivots: &mut usize,
        phase: u8,
        mut trace: Option<&mut String>,
    ) -> Result<Pivoting> {
        let cols = self.cols();
        let m = self.a.len();
        // reduced costs r_j = c_j - c_B B^-1 A_j, rhs slot holds -objective
        let mut reduced = vec![0.0; cols + 1];
        reduced[..cols].copy_from_slice(cost);
        for (row, &b) in self.a.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (r, v) in reduced.iter_mut().zip(row) {
                    *r -= cb * v;
                }
            }
        }

        loop {
            let entering = (0..cols).find(|&j| {
                reduced[j] > EPS && (allow_artificial || self.kinds[j] != ColKind::Artificial)
            });
            let Some(e) = entering else {
                if let Some(t) = trace.as_deref_mut() {
                    let _ = writeln!(t, "phase={phase} optimal objective={:.12}", -reduced[cols]);
                }
                return Ok(Pivoting::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let aie = self.a[i][e];
                if aie > EPS {
                    let ratio = self.a[i][cols] / aie;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= EPS * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((l, _)) = leave else {
                return Ok(Pivoting::Unbounded);
            };

            *pivots += 1;
            if *pivots > cap {
                return Err(Error::IterationLimit(cap));
            }
            if let Some(t) = trace.as_deref_mut() {
                let _ = writeln!(
                    t,
                    "phase={phase} pivot={} enter={e} leave={} objective={:.12}",
                    *pivots, self.basis[l], -reduced[cols]
                );
            }
            self.pivot(l, e);
            let f = reduced[e];
            if f != 0.0 {
                let row = &self.a[l];
                for (r, v) in reduced.iter_mut().zip(row) {
                    *r -= f * v;
                }
            }
            reduced[e] = 0.0;
        }
    }

    fn pivot(&mut self, l: usize, e: usize) {
        let p = self.a[l][e];
        for v in self.a[l].iter_mut() {
            *v /= p;
        }
        self.a[l][e] = 1.0;
        let pivot_row = std::mem::take(&mut self.a[l]);
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == l {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[e] = 0.0;
            }
        }
        self.a[l] = pivot_row;
        self.basis[l] = e;
    }

    /// Pivots zero-level artificials out of the basis, dropping redundant rows.
    fn expel_artificials(&mut self, pivots: &mut usize) {
        let cols = self.cols();
        let mut i = 0;
        while i < self.a.len() {
            if self.kinds[self.basis[i]] != ColKind::Artificial {
                i += 1;
                continue;
            }
            let replacement = (0..cols)
                .filter(|&j| self.kinds[j] != ColKind::Artificial)
                .max_by(|&x, &y| self.a[i][x].abs().total_cmp(&self.a[i][y].abs()))
                .filter(|&j| self.a[i][j].abs() > 1e-9);
            match replacement {
                Some(j) => {
                    *pivots += 1;
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.a.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}
