//! Depth-first branch-and-bound over the LP relaxation, and exact enumeration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{relax, solve_lp, LpProblem, LpStatus};
use crate::model::{eval_constraint, eval_objective, Assignment, Model, ObjectiveSense, Sense};
use crate::INTEGRALITY_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MipStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MipResult {
    pub status: MipStatus,
    pub best: Option<Assignment>,
    /// Exact objective of `best`.
    pub objective: Option<i64>,
    /// Dual bound at termination; equals `objective` when optimal.
    pub bound: Option<i64>,
    pub nodes: u64,
}

#[derive(Debug, Clone, Default)]
pub struct MipOptions {
    /// Print `node=<n> bound=<b> incumbent=<i>` to stderr for every node.
    pub verbose: bool,
}

pub fn solve_mip(model: &Model) -> Result<MipResult> {
    solve_mip_with(model, &MipOptions::default())
}

struct Node {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

pub fn solve_mip_with(model: &Model, options: &MipOptions) -> Result<MipResult> {
    model.ensure_valid()?;
    let sense = model.objective().sense;
    // Internally every objective is maximized: score = sign · objective.
    let sign: i64 = match sense {
        ObjectiveSense::Minimize => -1,
        _ => 1,
    };
    let base = relax(model);
    let mut stack = vec![Node {
        lo: model.variables().iter().map(|v| v.lo).collect(),
        hi: model.variables().iter().map(|v| v.hi).collect(),
    }];
    let mut incumbent: Option<(Assignment, i64)> = None;
    let mut nodes = 0u64;

    while let Some(node) = stack.pop() {
        nodes += 1;
        let problem = with_bounds(&base, &node);
        let outcome = solve_lp(&problem)?;
        if outcome.status == LpStatus::Infeasible {
            continue;
        }
        let lp_score = sign as f64 * outcome.objective;
        let node_bound = (lp_score + INTEGRALITY_TOL).floor() as i64;
        if options.verbose {
            let inc = incumbent
                .as_ref()
                .map_or("none".to_string(), |(_, s)| (sign * s).to_string());
            eprintln!("node={nodes} bound={} incumbent={inc}", sign * node_bound);
        }
        if matches!(&incumbent, Some((_, best)) if node_bound <= *best) {
            continue;
        }

        let rounded = Assignment::new(
            outcome
                .point
                .iter()
                .enumerate()
                .map(|(j, v)| (v.round() as i64).clamp(node.lo[j], node.hi[j]))
                .collect(),
        );
        if is_feasible(model, &rounded)? {
            let score = sign * eval_objective(model.objective(), &rounded)?;
            if incumbent.as_ref().is_none_or(|(_, best)| score > *best) {
                incumbent = Some((rounded, score));
            }
        }
        if matches!(&incumbent, Some((_, best)) if node_bound <= *best) {
            continue;
        }

        let Some(j) = branching_var(&outcome.point) else {
            return Err(Error::NumericalFailure(
                "integral LP point failed exact verification".into(),
            ));
        };
        let v = outcome.point[j];
        let (down, up) = (v.floor() as i64, v.ceil() as i64);
        if up <= node.hi[j] {
            let mut lo = node.lo.clone();
            lo[j] = up.max(node.lo[j]);
            stack.push(Node {
                lo,
                hi: node.hi.clone(),
            });
        }
        if down >= node.lo[j] {
            let mut hi = node.hi;
            hi[j] = down.min(hi[j]);
            stack.push(Node { lo: node.lo, hi });
        }
    }

    Ok(match incumbent {
        Some((best, score)) => MipResult {
            status: MipStatus::Optimal,
            objective: Some(sign * score),
            bound: Some(sign * score),
            best: Some(best),
            nodes,
        },
        None => MipResult {
            status: MipStatus::Infeasible,
            best: None,
            objective: None,
            bound: None,
            nodes,
        },
    })
}

/// `problem` with the box replaced by a node's bounds.
fn with_bounds(problem: &LpProblem, node: &Node) -> LpProblem {
    let mut p = problem.clone();
    p.lo = node.lo.iter().map(|&v| v as f64).collect();
    p.hi = node.hi.iter().map(|&v| v as f64).collect();
    p
}

/// Most fractional variable; ties go to the lowest id. Falls back to any
/// non-integral value below the integrality tolerance.
fn branching_var(point: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in point.iter().enumerate() {
        let frac = (v - v.round()).abs();
        if frac > 0.0 && best.is_none_or(|(_, f)| frac > f) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

fn is_feasible(model: &Model, assignment: &Assignment) -> Result<bool> {
    for (v, &value) in model.variables().iter().zip(assignment.values()) {
        if value < v.lo || value > v.hi {
            return Ok(false);
        }
    }
    for c in model.constraints() {
        if !eval_constraint(c, assignment)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All feasible assignments in lexicographic order (variable 0 most
/// significant), truncated at `limit`. Without a limit the variable box must
/// not exceed `guard` assignments.
pub fn enumerate(model: &Model, limit: Option<usize>, guard: u128) -> Result<Vec<Assignment>> {
    model.ensure_valid()?;
    let size = model.search_space_size();
    if limit.is_none() && size > guard {
        return Err(Error::SearchSpaceTooLarge { size, guard });
    }
    let mut search = Search::new(model);
    let mut out = Vec::new();
    if limit == Some(0) || !search.rows_ok(0, None) {
        return Ok(out);
    }
    search.descend(0, limit.unwrap_or(usize::MAX), &mut out);
    Ok(out)
}

/// Exact DFS over the box with interval pruning on every row.
struct Search<'a> {
    model: &'a Model,
    /// `coef[r][j]`, dense.
    coef: Vec<Vec<i128>>,
    /// `suffix_min[r][d]`: least value of `Σ_{j >= d} coef·x_j` over the box.
    suffix_min: Vec<Vec<i128>>,
    suffix_max: Vec<Vec<i128>>,
    partial: Vec<i128>,
    /// Rows that mention each variable.
    rows_of: Vec<Vec<usize>>,
    values: Vec<i64>,
}

impl<'a> Search<'a> {
    fn new(model: &'a Model) -> Self {
        let n = model.num_vars();
        let rows = model.constraints();
        let mut coef = vec![vec![0i128; n]; rows.len()];
        let mut rows_of = vec![Vec::new(); n];
        for (r, c) in rows.iter().enumerate() {
            for &(v, a) in &c.terms {
                coef[r][v.0] = a as i128;
                rows_of[v.0].push(r);
            }
        }
        let mut suffix_min = vec![vec![0i128; n + 1]; rows.len()];
        let mut suffix_max = vec![vec![0i128; n + 1]; rows.len()];
        for r in 0..rows.len() {
            for j in (0..n).rev() {
                let v = &model.variables()[j];
                let (a, b) = (coef[r][j] * v.lo as i128, coef[r][j] * v.hi as i128);
                suffix_min[r][j] = suffix_min[r][j + 1] + a.min(b);
                suffix_max[r][j] = suffix_max[r][j + 1] + a.max(b);
            }
        }
        Search {
            model,
            coef,
            suffix_min,
            suffix_max,
            partial: vec![0; rows.len()],
            rows_of,
            values: vec![0; n],
        }
    }

    /// Whether the rows (all, or those touching `var`) can still be satisfied
    /// once variables `< depth` are fixed.
    fn rows_ok(&self, depth: usize, var: Option<usize>) -> bool {
        let check = |r: usize| {
            let c = &self.model.constraints()[r];
            let lo = self.partial[r] + self.suffix_min[r][depth];
            let hi = self.partial[r] + self.suffix_max[r][depth];
            let rhs = c.rhs as i128;
            match c.sense {
                Sense::Le => lo <= rhs,
                Sense::Ge => hi >= rhs,
                Sense::Eq => lo <= rhs && rhs <= hi,
            }
        };
        match var {
            Some(j) => self.rows_of[j].iter().all(|&r| check(r)),
            None => (0..self.partial.len()).all(check),
        }
    }

    fn descend(&mut self, depth: usize, limit: usize, out: &mut Vec<Assignment>) {
        if out.len() >= limit {
            return;
        }
        if depth == self.values.len() {
            out.push(Assignment::new(self.values.clone()));
            return;
        }
        let v = &self.model.variables()[depth];
        for value in v.lo..=v.hi {
            self.values[depth] = value;
            for &r in &self.rows_of[depth] {
                self.partial[r] += self.coef[r][depth] * value as i128;
            }
            if self.rows_ok(depth + 1, Some(depth)) {
                self.descend(depth + 1, limit, out);
            }
            for &r in &self.rows_of[depth] {
                self.partial[r] -= self.coef[r][depth] * value as i128;
            }
            if out.len() >= limit {
                return;
            }
        }
    }
}
