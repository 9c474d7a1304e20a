//! Binary finite-domain CSPs, their homomorphism semantics, and a one-hot
//! MILP encoding with one cut row per forbidden value pair.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::{Assignment, LinearConstraint, Model, VarId};

/// Ordered list of distinct value labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    values: Vec<String>,
}

impl Domain {
    pub fn new<S: Into<String>>(values: impl IntoIterator<Item = S>) -> Result<Self> {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(Error::InvalidSpec("domain must be nonempty".into()));
        }
        let distinct: BTreeSet<&str> = values.iter().map(String::as_str).collect();
        if distinct.len() != values.len() {
            return Err(Error::InvalidSpec("domain values must be distinct".into()));
        }
        Ok(Domain { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn label(&self, index: usize) -> &str {
        &self.values[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

/// Allowed ordered pairs of domain indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BinaryRelation {
    allowed: BTreeSet<(usize, usize)>,
}

impl BinaryRelation {
    pub fn new(allowed: impl IntoIterator<Item = (usize, usize)>) -> Self {
        BinaryRelation {
            allowed: allowed.into_iter().collect(),
        }
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.allowed.contains(&(a, b))
    }

    pub fn len(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.allowed.iter().copied()
    }
}

/// `a ≠ b` over every ordered pair of the domain.
pub fn neq_relation(domain: &Domain) -> BinaryRelation {
    let n = domain.len();
    BinaryRelation::new((0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspConstraint {
    pub scope: (usize, usize),
    pub relation: BinaryRelation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    domain: Domain,
    variables: Vec<String>,
    constraints: Vec<CspConstraint>,
}

impl CspInstance {
    pub fn new<S: Into<String>>(
        domain: Domain,
        variables: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let variables: Vec<String> = variables.into_iter().map(Into::into).collect();
        let distinct: BTreeSet<&str> = variables.iter().map(String::as_str).collect();
        if distinct.len() != variables.len() {
            return Err(Error::InvalidSpec(
                "csp variable names must be distinct".into(),
            ));
        }
        Ok(CspInstance {
            domain,
            variables,
            constraints: Vec::new(),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn constraints(&self) -> &[CspConstraint] {
        &self.constraints
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn add_constraint(&mut self, u: usize, v: usize, relation: BinaryRelation) -> Result<()> {
        let n = self.variables.len();
        if u >= n || v >= n {
            return Err(Error::InvalidSpec(format!(
                "scope ({u}, {v}) references an undeclared variable"
            )));
        }
        let d = self.domain.len();
        if let Some((a, b)) = relation.pairs().find(|&(a, b)| a >= d || b >= d) {
            return Err(Error::InvalidSpec(format!(
                "relation pair ({a}, {b}) is outside the domain"
            )));
        }
        self.constraints.push(CspConstraint {
            scope: (u, v),
            relation,
        });
        Ok(())
    }

    /// Adds `u ≠ v` by variable name.
    pub fn add_neq(&mut self, u: &str, v: &str) -> Result<()> {
        let lookup = |name: &str| {
            self.var_index(name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown csp variable `{name}`")))
        };
        let (ui, vi) = (lookup(u)?, lookup(v)?);
        let rel = neq_relation(&self.domain);
        self.add_constraint(ui, vi, rel)
    }

    /// Human-readable label of constraint `index`, e.g. `x1!=x2`.
    pub fn constraint_label(&self, index: usize) -> String {
        let c = &self.constraints[index];
        let (u, v) = (&self.variables[c.scope.0], &self.variables[c.scope.1]);
        if c.relation == neq_relation(&self.domain) {
            format!("{u}!={v}")
        } else {
            format!("rel{index}({u},{v})")
        }
    }
}

/// Variable name to domain index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mapping(pub BTreeMap<String, usize>);

impl Mapping {
    pub fn from_labels<'a>(
        instance: &CspInstance,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (var, label) in pairs {
            let value = instance
                .domain
                .index_of(label)
                .ok_or_else(|| Error::InvalidSpec(format!("`{label}` is not a domain value")))?;
            out.insert(var.to_string(), value);
        }
        Ok(Mapping(out))
    }

    pub fn get(&self, var: &str) -> Option<usize> {
        self.0.get(var).copied()
    }
}

/// Indices of the constraints whose scope image falls outside the relation.
pub fn violated_constraints(instance: &CspInstance, mapping: &Mapping) -> Result<Vec<usize>> {
    let mut values = Vec::with_capacity(instance.variables.len());
    for name in &instance.variables {
        let value = mapping
            .get(name)
            .ok_or_else(|| Error::PartialMapping(name.clone()))?;
        if value >= instance.domain.len() {
            return Err(Error::BadValue {
                value,
                size: instance.domain.len(),
            });
        }
        values.push(value);
    }
    Ok(instance
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.relation.contains(values[c.scope.0], values[c.scope.1]))
        .map(|(i, _)| i)
        .collect())
}

/// True iff every constraint tuple maps into its relation.
pub fn check_homomorphism(instance: &CspInstance, mapping: &Mapping) -> Result<bool> {
    Ok(violated_constraints(instance, mapping)?.is_empty())
}

/// Links CSP variables and values to the binaries that encode them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    variables: Vec<String>,
    values: Vec<String>,
    /// `blocks[v][d]` is `y_{v,d}`.
    blocks: Vec<Vec<VarId>>,
    /// Rows emitted by the encoding.
    pub rows: Range<usize>,
}

impl Codebook {
    pub fn var_for(&self, variable: usize, value: usize) -> VarId {
        self.blocks[variable][value]
    }

    pub fn block(&self, variable: usize) -> &[VarId] {
        &self.blocks[variable]
    }

    pub fn num_binaries(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn owns(&self, var: VarId) -> bool {
        self.blocks.iter().flatten().any(|&v| v == var)
    }

    /// Values of the encoding binaries that represent `mapping`, as `(var, 0|1)`.
    pub fn lift(&self, mapping: &Mapping) -> Result<Vec<(VarId, i64)>> {
        let mut out = Vec::with_capacity(self.num_binaries());
        for (v, name) in self.variables.iter().enumerate() {
            let hot = mapping
                .get(name)
                .ok_or_else(|| Error::PartialMapping(name.clone()))?;
            for (d, &var) in self.blocks[v].iter().enumerate() {
                out.push((var, i64::from(d == hot)));
            }
        }
        Ok(out)
    }
}

/// Encodes `instance` into a fresh model with a feasibility objective.
pub fn encode_csp(instance: &CspInstance) -> Result<(Model, Codebook)> {
    let mut model = Model::new();
    let codebook = encode_csp_into(&mut model, instance)?;
    Ok((model, codebook))
}

/// Appends the one-hot encoding of `instance` to `model`.
pub fn encode_csp_into(model: &mut Model, instance: &CspInstance) -> Result<Codebook> {
    let domain = &instance.domain;
    let mut blocks = Vec::with_capacity(instance.variables.len());
    for name in &instance.variables {
        let block = domain
            .values()
            .iter()
            .map(|d| model.add_bool_var(model.fresh_name(&format!("y_{name}_{d}"))))
            .collect::<Result<Vec<_>>>()?;
        blocks.push(block);
    }

    let first_row = model.constraints().len();
    for (v, block) in blocks.iter().enumerate() {
        let terms = block.iter().map(|&y| (y, 1)).collect();
        let label = model_label(model, &format!("onehot_{}", instance.variables[v]));
        model.add_constraint(LinearConstraint::eq(terms, 1).with_label(label))?;
    }
    for (i, c) in instance.constraints.iter().enumerate() {
        let (u, v) = c.scope;
        for a in 0..domain.len() {
            for b in 0..domain.len() {
                if c.relation.contains(a, b) {
                    continue;
                }
                let terms = if u == v {
                    // a self-loop forbids (a, a) outright and (a, b) only via the one-hot row
                    if a != b {
                        continue;
                    }
                    vec![(blocks[u][a], 1)]
                } else {
                    vec![(blocks[u][a], 1), (blocks[v][b], 1)]
                };
                let rhs = if u == v { 0 } else { 1 };
                let label = model_label(
                    model,
                    &format!("cut{i}_{}_{}", domain.label(a), domain.label(b)),
                );
                model.add_constraint(LinearConstraint::le(terms, rhs).with_label(label))?;
            }
        }
    }
    let rows = first_row..model.constraints().len();
    Ok(Codebook {
        variables: instance.variables.clone(),
        values: domain.values().to_vec(),
        blocks,
        rows,
    })
}

fn model_label(model: &Model, base: &str) -> String {
    if model.constraints().iter().all(|c| c.label != base) {
        return base.to_string();
    }
    (2..)
        .map(|i| format!("{base}_{i}"))
        .find(|l| model.constraints().iter().all(|c| &c.label != l))
        .expect("unbounded suffix search")
}

/// Reads the hot value of every block.
pub fn decode(codebook: &Codebook, assignment: &Assignment) -> Result<Mapping> {
    let mut out = BTreeMap::new();
    for (v, name) in codebook.variables.iter().enumerate() {
        let mut hot = None;
        for (d, &var) in codebook.blocks[v].iter().enumerate() {
            match assignment.get(var).ok_or(Error::MissingValue(var.0))? {
                0 => {}
                1 if hot.is_none() => hot = Some(d),
                _ => return Err(Error::NotOneHot(name.clone())),
            }
        }
        let hot = hot.ok_or_else(|| Error::NotOneHot(name.clone()))?;
        out.insert(name.clone(), hot);
    }
    Ok(Mapping(out))
}

/// Renders a mapping as `var -> label` pairs in variable order.
pub fn mapping_labels(instance: &CspInstance, mapping: &Mapping) -> Vec<(String, String)> {
    instance
        .variables
        .iter()
        .filter_map(|v| {
            let d = mapping.get(v)?;
            Some((v.clone(), instance.domain.values.get(d)?.clone()))
        })
        .collect()
}

/// Three colours, five nodes, seven edges:
///
/// ```text
/// x1 - x2 - x3
///  \  /  \  /
///   x4 -- x5
/// ```
pub fn worked_instance() -> CspInstance {
    let domain = Domain::new(["Blue", "Red", "Green"]).expect("static domain");
    let mut csp =
        CspInstance::new(domain, ["x1", "x2", "x3", "x4", "x5"]).expect("static variables");
    for (u, v) in [
        ("x1", "x2"),
        ("x2", "x3"),
        ("x1", "x4"),
        ("x4", "x5"),
        ("x5", "x3"),
        ("x4", "x2"),
        ("x5", "x2"),
    ] {
        csp.add_neq(u, v).expect("static edges");
    }
    csp
}

/// Inequality relation with `(Green, Red)` missing, kept as a test fixture.
pub fn literal_five_pair_relation(domain: &Domain) -> Result<BinaryRelation> {
    let idx = |l: &str| {
        domain
            .index_of(l)
            .ok_or_else(|| Error::InvalidSpec(format!("domain lacks `{l}`")))
    };
    let (blue, red, green) = (idx("Blue")?, idx("Red")?, idx("Green")?);
    Ok(BinaryRelation::new([
        (blue, red),
        (blue, green),
        (red, blue),
        (red, green),
        (green, blue),
    ]))
}
