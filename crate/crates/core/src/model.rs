//! Exact-integer linear model shared by every front-end and solver.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest magnitude any row or objective may reach over the variable box.
/// Keeping activities below 2^53 makes the float relaxation exact on integer points.
pub const MAX_ACTIVITY: i128 = 1 << 53;

/// Dense variable identifier, assigned in creation order from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    IntBounded,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
    pub lo: i64,
    pub hi: i64,
}

impl Variable {
    /// Number of integer values in `[lo, hi]`, zero when the bounds are inverted.
    pub fn span(&self) -> u128 {
        if self.hi < self.lo {
            0
        } else {
            (self.hi as i128 - self.lo as i128 + 1) as u128
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    /// Whether `activity (sense) rhs` holds.
    pub fn holds(self, activity: i128, rhs: i128) -> bool {
        match self {
            Sense::Le => activity <= rhs,
            Sense::Ge => activity >= rhs,
            Sense::Eq => activity == rhs,
        }
    }
}

/// `Σ coef·var (sense) rhs`, all data exact integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub terms: Vec<(VarId, i64)>,
    pub sense: Sense,
    pub rhs: i64,
    /// Empty labels are replaced by `c<index>` when the row is added to a model.
    pub label: String,
}

impl LinearConstraint {
    pub fn new(terms: Vec<(VarId, i64)>, sense: Sense, rhs: i64) -> Self {
        LinearConstraint {
            terms,
            sense,
            rhs,
            label: String::new(),
        }
    }

    pub fn le(terms: Vec<(VarId, i64)>, rhs: i64) -> Self {
        Self::new(terms, Sense::Le, rhs)
    }

    pub fn ge(terms: Vec<(VarId, i64)>, rhs: i64) -> Self {
        Self::new(terms, Sense::Ge, rhs)
    }

    pub fn eq(terms: Vec<(VarId, i64)>, rhs: i64) -> Self {
        Self::new(terms, Sense::Eq, rhs)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Exact left-hand side at `assignment`.
    pub fn activity(&self, assignment: &Assignment) -> Result<i128> {
        self.terms.iter().try_fold(0i128, |acc, &(var, coef)| {
            let value = assignment.get(var).ok_or(Error::MissingValue(var.0))?;
            Ok(acc + coef as i128 * value as i128)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub terms: Vec<(VarId, i64)>,
}

impl Objective {
    pub fn feasibility() -> Self {
        Objective {
            sense: ObjectiveSense::Feasibility,
            terms: Vec::new(),
        }
    }

    pub fn maximize(terms: Vec<(VarId, i64)>) -> Self {
        Objective {
            sense: ObjectiveSense::Maximize,
            terms,
        }
    }

    pub fn minimize(terms: Vec<(VarId, i64)>) -> Self {
        Objective {
            sense: ObjectiveSense::Minimize,
            terms,
        }
    }
}

impl Default for Objective {
    fn default() -> Self {
        Objective::feasibility()
    }
}

/// Total map from variable ids to integer values, stored densely by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<i64>,
}

impl Assignment {
    pub fn new(values: Vec<i64>) -> Self {
        Assignment { values }
    }

    pub fn get(&self, var: VarId) -> Option<i64> {
        self.values.get(var.0).copied()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [i64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<VarId> for Assignment {
    type Output = i64;

    fn index(&self, var: VarId) -> &i64 {
        &self.values[var.0]
    }
}

/// True iff the row holds at `assignment`, using exact integer arithmetic.
pub fn eval_constraint(constraint: &LinearConstraint, assignment: &Assignment) -> Result<bool> {
    let activity = constraint.activity(assignment)?;
    Ok(constraint.sense.holds(activity, constraint.rhs as i128))
}

/// `Σ weight·value`; zero for a feasibility objective.
pub fn eval_objective(objective: &Objective, assignment: &Assignment) -> Result<i64> {
    if objective.sense == ObjectiveSense::Feasibility {
        return Ok(0);
    }
    let total = objective.terms.iter().try_fold(0i128, |acc, &(var, w)| {
        let value = assignment.get(var).ok_or(Error::MissingValue(var.0))?;
        Ok::<_, Error>(acc + w as i128 * value as i128)
    })?;
    Ok(total as i64)
}

/// A broken model invariant, reported by [`Model::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    IdMismatch { index: usize, id: usize },
    EmptyName { index: usize },
    DuplicateName { name: String },
    InvertedBounds { name: String, lo: i64, hi: i64 },
    BinaryBounds { name: String, lo: i64, hi: i64 },
    UnknownVar { label: String, id: usize },
    DuplicateTerm { label: String, id: usize },
    DuplicateLabel { label: String },
    EmptyLabel { index: usize },
    FeasibilityWithTerms,
    ActivityTooLarge { label: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IdMismatch { index, id } => {
                write!(f, "variable at position {index} carries id {id}")
            }
            Violation::EmptyName { index } => write!(f, "variable {index} has an empty name"),
            Violation::DuplicateName { name } => write!(f, "duplicate variable name `{name}`"),
            Violation::InvertedBounds { name, lo, hi } => {
                write!(f, "variable `{name}` has inverted bounds [{lo}, {hi}]")
            }
            Violation::BinaryBounds { name, lo, hi } => {
                write!(f, "binary variable `{name}` has bounds [{lo}, {hi}]")
            }
            Violation::UnknownVar { label, id } => {
                write!(f, "`{label}` references unknown variable id {id}")
            }
            Violation::DuplicateTerm { label, id } => {
                write!(f, "`{label}` mentions variable id {id} twice")
            }
            Violation::DuplicateLabel { label } => {
                write!(f, "duplicate constraint label `{label}`")
            }
            Violation::EmptyLabel { index } => write!(f, "constraint {index} has an empty label"),
            Violation::FeasibilityWithTerms => {
                write!(f, "feasibility objective must not carry terms")
            }
            Violation::ActivityTooLarge { label } => {
                write!(
                    f,
                    "`{label}` can exceed 2^53 in magnitude over the variable box"
                )
            }
        }
    }
}

/// Variables, rows and objective. Build through the checked methods, or use
/// [`Model::from_parts`] and [`Model::validate`] for raw data.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Objective,
    names: HashMap<String, VarId>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assembles a model without checking invariants. Call [`Model::validate`] before solving.
    pub fn from_parts(
        variables: Vec<Variable>,
        constraints: Vec<LinearConstraint>,
        objective: Objective,
    ) -> Self {
        let mut names = HashMap::new();
        for v in &variables {
            names.entry(v.name.clone()).or_insert(v.id);
        }
        Model {
            variables,
            constraints,
            objective,
            names,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var(&self, id: VarId) -> Option<&Variable> {
        self.variables.get(id.0)
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    /// `base` if unused, otherwise the first free `base_2`, `base_3`, ...
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.names.contains_key(base) {
            return base.to_string();
        }
        (2..)
            .map(|i| format!("{base}_{i}"))
            .find(|candidate| !self.names.contains_key(candidate))
            .expect("unbounded suffix search")
    }

    pub fn add_int_var(&mut self, name: impl Into<String>, lo: i64, hi: i64) -> Result<VarId> {
        self.push_var(name.into(), VarKind::IntBounded, lo, hi)
    }

    pub fn add_bool_var(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.push_var(name.into(), VarKind::Binary, 0, 1)
    }

    fn push_var(&mut self, name: String, kind: VarKind, lo: i64, hi: i64) -> Result<VarId> {
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        if self.names.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        if lo > hi {
            return Err(Error::InvertedBounds { name, lo, hi });
        }
        let id = VarId(self.variables.len());
        self.names.insert(name.clone(), id);
        self.variables.push(Variable {
            id,
            name,
            kind,
            lo,
            hi,
        });
        Ok(id)
    }

    /// Appends a row and returns its index. Unlabelled rows become `c<index>`.
    pub fn add_constraint(&mut self, mut constraint: LinearConstraint) -> Result<usize> {
        let mut seen = HashSet::new();
        for &(var, _) in &constraint.terms {
            if var.0 >= self.variables.len() {
                return Err(Error::UnknownVar(var.0));
            }
            if !seen.insert(var) {
                return Err(Error::DuplicateTerm(var.0));
            }
        }
        let index = self.constraints.len();
        if constraint.label.is_empty() {
            constraint.label = format!("c{index}");
        }
        self.constraints.push(constraint);
        Ok(index)
    }

    pub fn set_objective(&mut self, objective: Objective) -> Result<()> {
        let mut seen = HashSet::new();
        for &(var, _) in &objective.terms {
            if var.0 >= self.variables.len() {
                return Err(Error::UnknownVar(var.0));
            }
            if !seen.insert(var) {
                return Err(Error::DuplicateTerm(var.0));
            }
        }
        self.objective = if objective.sense == ObjectiveSense::Feasibility {
            Objective::feasibility()
        } else {
            objective
        };
        Ok(())
    }

    /// Product of all variable spans, saturating at `u128::MAX`.
    pub fn search_space_size(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.span()))
    }

    /// Checks every structural invariant and returns all violations found.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut names = HashSet::new();
        for (index, v) in self.variables.iter().enumerate() {
            if v.id.0 != index {
                out.push(Violation::IdMismatch { index, id: v.id.0 });
            }
            if v.name.is_empty() {
                out.push(Violation::EmptyName { index });
            } else if !names.insert(v.name.as_str()) {
                out.push(Violation::DuplicateName {
                    name: v.name.clone(),
                });
            }
            if v.lo > v.hi {
                out.push(Violation::InvertedBounds {
                    name: v.name.clone(),
                    lo: v.lo,
                    hi: v.hi,
                });
            }
            if v.kind == VarKind::Binary && (v.lo != 0 || v.hi != 1) {
                out.push(Violation::BinaryBounds {
                    name: v.name.clone(),
                    lo: v.lo,
                    hi: v.hi,
                });
            }
        }

        let mut labels = HashSet::new();
        for (index, c) in self.constraints.iter().enumerate() {
            if c.label.is_empty() {
                out.push(Violation::EmptyLabel { index });
            } else if !labels.insert(c.label.as_str()) {
                out.push(Violation::DuplicateLabel {
                    label: c.label.clone(),
                });
            }
            self.check_terms(&c.terms, &c.label, &mut out);
            if self.max_magnitude(&c.terms).max((c.rhs as i128).abs()) > MAX_ACTIVITY {
                out.push(Violation::ActivityTooLarge {
                    label: c.label.clone(),
                });
            }
        }

        if self.objective.sense == ObjectiveSense::Feasibility && !self.objective.terms.is_empty() {
            out.push(Violation::FeasibilityWithTerms);
        }
        self.check_terms(&self.objective.terms, "objective", &mut out);
        if self.max_magnitude(&self.objective.terms) > MAX_ACTIVITY {
            out.push(Violation::ActivityTooLarge {
                label: "objective".into(),
            });
        }

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// [`Model::validate`] folded into an error, for solver entry points.
    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().map_err(Error::InvalidModel)
    }

    fn check_terms(&self, terms: &[(VarId, i64)], label: &str, out: &mut Vec<Violation>) {
        let mut seen = HashSet::new();
        for &(var, _) in terms {
            if var.0 >= self.variables.len() {
                out.push(Violation::UnknownVar {
                    label: label.to_string(),
                    id: var.0,
                });
            } else if !seen.insert(var) {
                out.push(Violation::DuplicateTerm {
                    label: label.to_string(),
                    id: var.0,
                });
            }
        }
    }

    fn max_magnitude(&self, terms: &[(VarId, i64)]) -> i128 {
        terms
            .iter()
            .filter_map(|&(var, coef)| {
                let v = self.variables.get(var.0)?;
                let reach = (v.lo as i128).abs().max((v.hi as i128).abs());
                Some((coef as i128).abs() * reach)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_variable_gets_index_zero() {
        let mut m = Model::new();
        let s1 = m.add_int_var("s1", 0, 10).unwrap();
        assert_eq!(s1, VarId(0));
        let v = m.var(s1).unwrap();
        assert_eq!((v.lo, v.hi, v.kind), (0, 10, VarKind::IntBounded));
        let n = m.add_int_var("n_even", 0, 5).unwrap();
        assert_eq!(n, VarId(1));
        let x = m.add_int_var("x", 3, 3).unwrap();
        assert_eq!((m.var(x).unwrap().lo, m.var(x).unwrap().hi), (3, 3));
    }

    #[test]
    fn rejects_inverted_and_duplicate() {
        let mut m = Model::new();
        assert!(matches!(
            m.add_int_var("x", 4, 3),
            Err(Error::InvertedBounds { .. })
        ));
        m.add_bool_var("b_even").unwrap();
        m.add_bool_var("b_odd").unwrap();
        assert_eq!(
            m.add_bool_var("b_even"),
            Err(Error::DuplicateName("b_even".into()))
        );
        assert_eq!(m.add_int_var("", 0, 1), Err(Error::EmptyName));
        let b = m.var(VarId(1)).unwrap();
        assert_eq!((b.kind, b.lo, b.hi), (VarKind::Binary, 0, 1));
    }

    #[test]
    fn big_m_row_is_stored_expanded() {
        let mut m = Model::new();
        let x = m.add_int_var("x", 0, 10).unwrap();
        let n = m.add_int_var("n", 0, 5).unwrap();
        let b = m.add_bool_var("b").unwrap();
        // x - 2n <= 10 (1 - b)  ==>  x - 2n + 10b <= 10
        let idx = m
            .add_constraint(LinearConstraint::le(vec![(x, 1), (n, -2), (b, 10)], 10))
            .unwrap();
        let row = &m.constraints()[idx];
        assert_eq!(row.terms, vec![(x, 1), (n, -2), (b, 10)]);
        assert_eq!((row.sense, row.rhs), (Sense::Le, 10));
        assert_eq!(row.label, "c0");

        let y = m.add_bool_var("y_u_c").unwrap();
        let z = m.add_bool_var("y_v_c").unwrap();
        let cut = LinearConstraint::le(vec![(y, 1), (z, 1)], 1).with_label("cut");
        let idx = m.add_constraint(cut.clone()).unwrap();
        assert_eq!(m.constraints()[idx], cut);

        assert_eq!(
            m.add_constraint(LinearConstraint::le(vec![(VarId(99), 1)], 0)),
            Err(Error::UnknownVar(99))
        );
        assert_eq!(
            m.add_constraint(LinearConstraint::le(vec![(x, 1), (x, 2)], 0)),
            Err(Error::DuplicateTerm(0))
        );
    }

    #[test]
    fn exact_evaluation() {
        let (x, n, b) = (VarId(0), VarId(1), VarId(2));
        assert!(eval_constraint(
            &LinearConstraint::le(vec![(x, 1)], 5),
            &Assignment::new(vec![3])
        )
        .unwrap());
        let row = LinearConstraint::le(vec![(x, 1), (n, -2), (b, 10)], 10);
        assert!(!eval_constraint(&row, &Assignment::new(vec![7, 3, 1])).unwrap());
        assert!(eval_constraint(&row, &Assignment::new(vec![8, 4, 1])).unwrap());
        assert_eq!(
            eval_constraint(&row, &Assignment::new(vec![8, 4])),
            Err(Error::MissingValue(2))
        );

        let b0 = VarId(0);
        let b1 = VarId(1);
        assert_eq!(
            eval_objective(
                &Objective::maximize(vec![(b0, 1)]),
                &Assignment::new(vec![1])
            )
            .unwrap(),
            1
        );
        assert_eq!(
            eval_objective(&Objective::feasibility(), &Assignment::new(vec![])).unwrap(),
            0
        );
        assert_eq!(
            eval_objective(
                &Objective::maximize(vec![(b0, 2), (b1, 3)]),
                &Assignment::new(vec![1, 0])
            )
            .unwrap(),
            2
        );
    }

    #[test]
    fn validation_reports_violations() {
        assert!(Model::new().validate().is_ok());

        let bad = Model::from_parts(
            vec![Variable {
                id: VarId(0),
                name: "x".into(),
                kind: VarKind::IntBounded,
                lo: 5,
                hi: 1,
            }],
            vec![LinearConstraint::le(vec![(VarId(3), 1)], 0).with_label("c0")],
            Objective::feasibility(),
        );
        let violations = bad.validate().unwrap_err();
        assert!(violations.contains(&Violation::InvertedBounds {
            name: "x".into(),
            lo: 5,
            hi: 1
        }));
        assert!(violations.contains(&Violation::UnknownVar {
            label: "c0".into(),
            id: 3
        }));
    }

    #[test]
    fn fresh_names_are_suffixed() {
        let mut m = Model::new();
        assert_eq!(m.fresh_name("n_even"), "n_even");
        m.add_int_var("n_even", 0, 1).unwrap();
        assert_eq!(m.fresh_name("n_even"), "n_even_2");
        m.add_int_var("n_even_2", 0, 1).unwrap();
        assert_eq!(m.fresh_name("n_even"), "n_even_3");
    }

    #[test]
    fn identical_builds_are_identical() {
        let build = || {
            let mut m = Model::new();
            let x = m.add_int_var("x", 0, 4).unwrap();
            let b = m.add_bool_var("b").unwrap();
            m.add_constraint(LinearConstraint::ge(vec![(x, 1), (b, -4)], -4))
                .unwrap();
            m.set_objective(Objective::maximize(vec![(x, 1)])).unwrap();
            m
        };
        assert_eq!(build(), build());
    }
}
