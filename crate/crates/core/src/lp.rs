//! Dense bounded-variable primal simplex for the continuous relaxation.
//!
//! Each row `a·x (sense) b` becomes `a·x + s = b` with the slack bounded by
//! the sense. Rows whose slack cannot absorb the residual at the starting
//! vertex get an artificial column; phase one drives those to zero, phase two
//! optimizes the real objective with the artificials fixed at zero.
//!
//! Pricing is Dantzig's largest reduced cost. After [`BLAND_AFTER`] consecutive
//! degenerate pivots the solver switches to Bland's lowest-index rule until it
//! makes progress again.

use crate::error::{Error, Result};
use crate::model::{Model, ObjectiveSense, Sense};
use crate::{FEASIBILITY_TOL, OPTIMALITY_TOL};

/// Consecutive degenerate pivots tolerated before Bland's rule takes over.
pub const BLAND_AFTER: usize = 50;
/// Smallest tableau entry accepted as a pivot.
const PIVOT_TOL: f64 = 1e-9;
/// Step lengths below this count as degenerate.
const DEGENERATE_STEP: f64 = 1e-12;
/// Basic values are recomputed from the original rows this often.
const REFRESH_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Continuous relaxation: the model's rows over the box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub objective: Vec<f64>,
    pub sense: ObjectiveSense,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.lo.len()
    }

    /// Objective value of `point` in the problem's own sense.
    pub fn objective_at(&self, point: &[f64]) -> f64 {
        if self.sense == ObjectiveSense::Feasibility {
            return 0.0;
        }
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Indexed by variable; empty when infeasible.
    pub point: Vec<f64>,
    /// In the problem's sense; 0 for feasibility problems.
    pub objective: f64,
    pub iterations: usize,
}

/// Drops integrality. Binaries become `[0, 1]`.
pub fn relax(model: &Model) -> LpProblem {
    let n = model.num_vars();
    let mut objective = vec![0.0; n];
    for &(var, w) in &model.objective().terms {
        objective[var.0] += w as f64;
    }
    LpProblem {
        lo: model.variables().iter().map(|v| v.lo as f64).collect(),
        hi: model.variables().iter().map(|v| v.hi as f64).collect(),
        rows: model
            .constraints()
            .iter()
            .map(|c| LpRow {
                coefs: c.terms.iter().map(|&(v, a)| (v.0, a as f64)).collect(),
                sense: c.sense,
                rhs: c.rhs as f64,
            })
            .collect(),
        objective,
        sense: model.objective().sense,
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpOutcome> {
    if let Some(j) = (0..problem.num_vars()).find(|&j| {
        let (lo, hi) = (problem.lo[j], problem.hi[j]);
        !lo.is_finite() || !hi.is_finite()
    }) {
        return Err(Error::NumericalFailure(format!(
            "variable {j} has an infinite bound"
        )));
    }
    if (0..problem.num_vars()).any(|j| problem.lo[j] > problem.hi[j]) {
        return Ok(infeasible(0));
    }
    let mut tableau = Tableau::new(problem);
    let phase_one = tableau.phase_one_costs();
    tableau.optimize(&phase_one)?;
    let residual: f64 = tableau.artificial_sum();
    if residual > FEASIBILITY_TOL {
        return Ok(infeasible(tableau.iterations));
    }
    tableau.fix_artificials();

    let sign = match problem.sense {
        ObjectiveSense::Maximize => -1.0,
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Feasibility => 0.0,
    };
    let mut costs = vec![0.0; tableau.cols];
    for (j, c) in problem.objective.iter().enumerate() {
        costs[j] = sign * c;
    }
    tableau.optimize(&costs)?;

    let point = tableau.structural_point(problem);
    for (i, row) in problem.rows.iter().enumerate() {
        let activity: f64 = row.coefs.iter().map(|&(j, a)| a * point[j]).sum();
        let scale = 1.0 + row.rhs.abs();
        let violation = match row.sense {
            Sense::Le => activity - row.rhs,
            Sense::Ge => row.rhs - activity,
            Sense::Eq => (activity - row.rhs).abs(),
        };
        if violation > FEASIBILITY_TOL * scale {
            return Err(Error::NumericalFailure(format!(
                "row {i} violated by {violation:e} at the final basis"
            )));
        }
    }
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        objective: problem.objective_at(&point),
        point,
        iterations: tableau.iterations,
    })
}

fn infeasible(iterations: usize) -> LpOutcome {
    LpOutcome {
        status: LpStatus::Infeasible,
        point: Vec::new(),
        objective: 0.0,
        iterations,
    }
}

struct Tableau {
    rows: usize,
    structural: usize,
    cols: usize,
    /// `B⁻¹·[A | I | diag(σ)]`, row-major.
    t: Vec<f64>,
    /// Original `[A | I | diag(σ)]`, row-major, for refreshes.
    a: Vec<f64>,
    b: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    is_basic: Vec<bool>,
    /// Artificial columns that started in the basis.
    active_artificial: Vec<bool>,
    iterations: usize,
}

impl Tableau {
    fn new(problem: &LpProblem) -> Self {
        let m = problem.rows.len();
        let n = problem.num_vars();
        let cols = n + 2 * m;
        let mut a = vec![0.0; m * cols];
        let mut lb = vec![0.0; cols];
        let mut ub = vec![0.0; cols];
        let mut x = vec![0.0; cols];
        lb[..n].copy_from_slice(&problem.lo);
        ub[..n].copy_from_slice(&problem.hi);
        x[..n].copy_from_slice(&problem.lo);

        let mut head = vec![0; m];
        let mut active_artificial = vec![false; m];
        for (i, row) in problem.rows.iter().enumerate() {
            for &(j, coef) in &row.coefs {
                a[i * cols + j] += coef;
            }
            let slack = n + i;
            let art = n + m + i;
            a[i * cols + slack] = 1.0;
            (lb[slack], ub[slack]) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            let residual = row.rhs
                - row
                    .coefs
                    .iter()
                    .map(|&(j, c)| c * problem.lo[j])
                    .sum::<f64>();
            if residual >= lb[slack] && residual <= ub[slack] {
                head[i] = slack;
                x[slack] = residual;
                a[i * cols + art] = 1.0;
            } else {
                head[i] = art;
                active_artificial[i] = true;
                a[i * cols + art] = if residual >= 0.0 { 1.0 } else { -1.0 };
                x[art] = residual.abs();
                ub[art] = f64::INFINITY;
            }
        }

        // B is diagonal with entries ±1, so B⁻¹·A is a row sign flip.
        let mut t = a.clone();
        for i in 0..m {
            let pivot = a[i * cols + head[i]];
            if pivot < 0.0 {
                t[i * cols..(i + 1) * cols]
                    .iter_mut()
                    .for_each(|v| *v = -*v);
            }
        }
        let mut is_basic = vec![false; cols];
        for &h in &head {
            is_basic[h] = true;
        }
        Tableau {
            rows: m,
            structural: n,
            cols,
            t,
            a,
            b: problem.rows.iter().map(|r| r.rhs).collect(),
            lb,
            ub,
            x,
            head,
            is_basic,
            active_artificial,
            iterations: 0,
        }
    }

    fn art(&self, i: usize) -> usize {
        self.structural + self.rows + i
    }

    fn phase_one_costs(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.cols];
        for i in 0..self.rows {
            if self.active_artificial[i] {
                c[self.art(i)] = 1.0;
            }
        }
        c
    }

    fn artificial_sum(&self) -> f64 {
        (0..self.rows).map(|i| self.x[self.art(i)].abs()).sum()
    }

    fn fix_artificials(&mut self) {
        for i in 0..self.rows {
            let j = self.art(i);
            self.ub[j] = 0.0;
            if !self.is_basic[j] {
                self.x[j] = 0.0;
            }
        }
    }

    /// Recomputes basic values as `B⁻¹(b - N·x_N)`. The artificial columns of
    /// the tableau hold `B⁻¹·diag(σ)`.
    fn refresh(&mut self) {
        let m = self.rows;
        let cols = self.cols;
        let mut residual = self.b.clone();
        for (i, r) in residual.iter_mut().enumerate() {
            for j in 0..cols {
                if !self.is_basic[j] && self.x[j] != 0.0 {
                    *r -= self.a[i * cols + j] * self.x[j];
                }
            }
        }
        for i in 0..m {
            let mut value = 0.0;
            for (k, r) in residual.iter().enumerate() {
                let art = self.art(k);
                let sigma = self.a[k * cols + art];
                value += self.t[i * cols + art] * sigma * r;
            }
            self.x[self.head[i]] = value;
        }
    }

    fn optimize(&mut self, costs: &[f64]) -> Result<()> {
        let limit = 1000 + 200 * (self.rows + self.cols);
        let mut degenerate_run = 0usize;
        let mut since_refresh = 0usize;
        loop {
            if self.iterations > limit {
                return Err(Error::NumericalFailure(format!(
                    "no convergence after {} pivots",
                    self.iterations
                )));
            }
            let bland = degenerate_run >= BLAND_AFTER;
            let Some((enter, dir)) = self.price(costs, bland) else {
                self.refresh();
                return Ok(());
            };
            let step = self.ratio_test(enter, dir, bland)?;
            self.iterations += 1;
            let length = match step {
                Step::Flip(len) => {
                    self.move_entering(enter, dir, len);
                    len
                }
                Step::Pivot { row, len, to_upper } => {
                    self.move_entering(enter, dir, len);
                    let leaving = self.head[row];
                    self.x[leaving] = if to_upper {
                        self.ub[leaving]
                    } else {
                        self.lb[leaving]
                    };
                    self.pivot(row, enter);
                    len
                }
            };
            if length < DEGENERATE_STEP {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                self.refresh();
                since_refresh = 0;
            }
        }
    }

    /// Entering column and direction (+1 increase, -1 decrease), or `None` at optimality.
    fn price(&self, costs: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if self.is_basic[j] || self.ub[j] - self.lb[j] <= 0.0 {
                continue;
            }
            let mut d = costs[j];
            for i in 0..self.rows {
                let tij = self.t[i * self.cols + j];
                if tij != 0.0 {
                    d -= costs[self.head[i]] * tij;
                }
            }
            let at_lower = self.x[j] <= self.lb[j];
            let at_upper = self.x[j] >= self.ub[j];
            let dir = if d < -OPTIMALITY_TOL && !at_upper {
                1.0
            } else if d > OPTIMALITY_TOL && !at_lower {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, score)| d.abs() > score) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ratio_test(&self, enter: usize, dir: f64, bland: bool) -> Result<Step> {
        let flip = self.ub[enter] - self.lb[enter];
        let mut best: Option<(usize, f64, bool, f64)> = None;
        for i in 0..self.rows {
            let alpha = dir * self.t[i * self.cols + enter];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let basic = self.head[i];
            let (limit, to_upper) = if alpha > 0.0 {
                if !self.lb[basic].is_finite() {
                    continue;
                }
                (((self.x[basic] - self.lb[basic]) / alpha).max(0.0), false)
            } else {
                if !self.ub[basic].is_finite() {
                    continue;
                }
                (((self.ub[basic] - self.x[basic]) / -alpha).max(0.0), true)
            };
            let better = match best {
                None => true,
                Some((row, len, _, mag)) => {
                    if limit < len - 1e-12 {
                        true
                    } else if limit <= len + 1e-12 {
                        if bland {
                            basic < self.head[row]
                        } else {
                            alpha.abs() > mag
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((i, limit, to_upper, alpha.abs()));
            }
        }
        match best {
            Some((row, len, to_upper, _)) if len < flip => Ok(Step::Pivot { row, len, to_upper }),
            _ if flip.is_finite() => Ok(Step::Flip(flip)),
            Some((row, len, to_upper, _)) => Ok(Step::Pivot { row, len, to_upper }),
            None => Err(Error::NumericalFailure(format!(
                "column {enter} is unbounded inside a bounded box"
            ))),
        }
    }

    fn move_entering(&mut self, enter: usize, dir: f64, len: f64) {
        if len == 0.0 {
            return;
        }
        for i in 0..self.rows {
            let tij = self.t[i * self.cols + enter];
            if tij != 0.0 {
                self.x[self.head[i]] -= dir * len * tij;
            }
        }
        self.x[enter] += dir * len;
        if dir > 0.0
            && self.ub[enter].is_finite()
            && self.x[enter] > self.ub[enter] - 1e-12 * (1.0 + self.ub[enter].abs())
        {
            self.x[enter] = self.x[enter].min(self.ub[enter]);
        }
        if dir < 0.0
            && self.lb[enter].is_finite()
            && self.x[enter] < self.lb[enter] + 1e-12 * (1.0 + self.lb[enter].abs())
        {
            self.x[enter] = self.x[enter].max(self.lb[enter]);
        }
    }

    fn pivot(&mut self, row: usize, enter: usize) {
        let cols = self.cols;
        let p = self.t[row * cols + enter];
        for v in &mut self.t[row * cols..(row + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[row * cols..(row + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.t[i * cols + enter];
            if factor == 0.0 {
                continue;
            }
            for (v, pr) in self.t[i * cols..(i + 1) * cols].iter_mut().zip(&pivot_row) {
                *v -= factor * pr;
            }
            self.t[i * cols + enter] = 0.0;
        }
        let leaving = self.head[row];
        self.is_basic[leaving] = false;
        self.is_basic[enter] = true;
        self.head[row] = enter;
    }

    fn structural_point(&self, problem: &LpProblem) -> Vec<f64> {
        (0..self.structural)
            .map(|j| self.x[j].clamp(problem.lo[j], problem.hi[j]))
            .collect()
    }
}

enum Step {
    Flip(f64),
    Pivot {
        row: usize,
        len: f64,
        to_upper: bool,
    },
}
