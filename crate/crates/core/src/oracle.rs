//! Exhaustive ground truth. Nothing here touches the LP or MILP layers.
//!
//! [`brute_force`] walks the whole variable box in lexicographic order. The
//! box is cut into fixed-size blocks of consecutive indices which are scanned
//! independently (in parallel with the `parallel` feature) and merged in index
//! order, so the report is identical under both execution modes.

use crate::error::{Error, Result};
use crate::model::{eval_constraint, eval_objective, Assignment, Model, ObjectiveSense};
use crate::sequence::{parse_builtin, KernelApplication, Mode, SequenceSpec};

/// Assignments scanned per work unit.
const BLOCK: u128 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub feasible_count: u64,
    /// Best objective; absent for feasibility objectives or infeasible models.
    pub optimum: Option<i64>,
    /// Lexicographically first optimal assignment (first feasible one under a
    /// feasibility objective).
    pub argmax: Option<Assignment>,
    /// Every feasible assignment in order, when collection was requested.
    pub enumerated: Option<Vec<Assignment>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub collect: bool,
    pub guard: u128,
    pub execution: Execution,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            collect: false,
            guard: crate::DEFAULT_GUARD,
            execution: Execution::default(),
        }
    }
}

pub fn brute_force(model: &Model, collect: bool) -> Result<OracleReport> {
    brute_force_with(
        model,
        &OracleOptions {
            collect,
            ..OracleOptions::default()
        },
    )
}

pub fn brute_force_with(model: &Model, options: &OracleOptions) -> Result<OracleReport> {
    model.ensure_valid()?;
    let size = model.search_space_size();
    if size > options.guard {
        return Err(Error::SearchSpaceTooLarge {
            size,
            guard: options.guard,
        });
    }
    let blocks = size.div_ceil(BLOCK);
    let scan = |b: u128| {
        scan_block(
            model,
            b * BLOCK,
            ((b + 1) * BLOCK).min(size),
            options.collect,
        )
    };
    let parts: Vec<Result<Block>> = match options.execution {
        Execution::Sequential => (0..blocks).map(scan).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..blocks as u64)
                .into_par_iter()
                .map(|b| scan(b as u128))
                .collect()
        }
    };

    let scored = model.objective().sense != ObjectiveSense::Feasibility;
    let mut report = OracleReport {
        feasible_count: 0,
        optimum: None,
        argmax: None,
        enumerated: options.collect.then(Vec::new),
    };
    for part in parts {
        let part = part?;
        report.feasible_count += part.count;
        if let Some((score, assignment)) = part.best {
            // Earlier blocks win ties.
            if report.argmax.is_none() || (scored && Some(score) > report.optimum) {
                report.optimum = scored.then_some(score);
                report.argmax = Some(assignment);
            }
        }
        if let (Some(all), Some(mut found)) = (report.enumerated.as_mut(), part.found) {
            all.append(&mut found);
        }
    }
    if let (Some(opt), ObjectiveSense::Minimize) = (report.optimum, model.objective().sense) {
        report.optimum = Some(-opt);
    }
    Ok(report)
}

struct Block {
    count: u64,
    /// Best score (objective, negated when minimizing) and its first assignment.
    best: Option<(i64, Assignment)>,
    found: Option<Vec<Assignment>>,
}

/// Decodes `index` in mixed radix, variable 0 most significant.
fn decode(model: &Model, mut index: u128, values: &mut [i64]) {
    for (v, slot) in model.variables().iter().zip(values.iter_mut()).rev() {
        let span = v.span();
        *slot = v.lo + (index % span) as i64;
        index /= span;
    }
}

/// Advances `values` to the next assignment in lexicographic order.
fn advance(model: &Model, values: &mut [i64]) {
    for (v, slot) in model.variables().iter().zip(values.iter_mut()).rev() {
        if *slot < v.hi {
            *slot += 1;
            return;
        }
        *slot = v.lo;
    }
}

fn scan_block(model: &Model, start: u128, end: u128, collect: bool) -> Result<Block> {
    let sign = if model.objective().sense == ObjectiveSense::Minimize {
        -1
    } else {
        1
    };
    let mut values = vec![0i64; model.num_vars()];
    decode(model, start, &mut values);
    let mut block = Block {
        count: 0,
        best: None,
        found: collect.then(Vec::new),
    };
    let mut assignment = Assignment::new(values);
    for _ in start..end {
        let mut ok = true;
        for c in model.constraints() {
            if !eval_constraint(c, &assignment)? {
                ok = false;
                break;
            }
        }
        if ok {
            block.count += 1;
            let score = sign * eval_objective(model.objective(), &assignment)?;
            if block.best.as_ref().is_none_or(|(s, _)| score > *s) {
                block.best = Some((score, assignment.clone()));
            }
            if let Some(found) = block.found.as_mut() {
                found.push(assignment.clone());
            }
        }
        advance(model, assignment.values_mut());
    }
    Ok(block)
}

/// Maximum over raw state sequences of the summed weights of satisfied soft
/// properties, subject to every required property. Properties are evaluated
/// arithmetically (`s_t mod k == r`). An indicator may always be left at 0,
/// so only positive weights contribute. `None` when the required properties
/// admit no sequence.
pub fn property_oracle_sequence(
    spec: &SequenceSpec,
    applications: &[KernelApplication],
    guard: u128,
) -> Result<Option<i64>> {
    spec.check()?;
    let states = spec.length + 1;
    let span = (spec.state_hi - spec.state_lo + 1) as u128;
    let size = span.checked_pow(states as u32).unwrap_or(u128::MAX);
    if size > guard {
        return Err(Error::SearchSpaceTooLarge { size, guard });
    }
    let mut props = Vec::with_capacity(applications.len());
    for app in applications {
        if app.step == 0 || app.step > spec.length {
            return Err(Error::BadStep {
                step: app.step,
                len: spec.length,
            });
        }
        props.push((app.step, parse_builtin(&app.kernel)?, app.mode, app.weight));
    }

    let mut seq = vec![spec.state_lo; states];
    let mut best: Option<i64> = None;
    for _ in 0..size {
        let mut total = 0i64;
        let mut admissible = true;
        for (step, kernel, mode, weight) in &props {
            let holds = kernel.holds(seq[*step]);
            match mode {
                Mode::Require if !holds => {
                    admissible = false;
                    break;
                }
                Mode::Require => {}
                Mode::Soft if holds => total += (*weight).max(0),
                Mode::Soft => {}
            }
        }
        if admissible {
            best = Some(best.map_or(total, |b| b.max(total)));
        }
        for slot in seq.iter_mut().rev() {
            if *slot < spec.state_hi {
                *slot += 1;
                break;
            }
            *slot = spec.state_lo;
        }
    }
    Ok(best)
}
