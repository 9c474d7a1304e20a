//! Big-M reification of congruences `x ≡ r (mod k)` onto indicator booleans.
//!
//! A reification adds an auxiliary integer `n ∈ [0, n_hi]` and a binary `b`
//! and the pair of rows
//!
//! ```text
//! x - k·n - r <=  M·(1 - b)      i.e.   x - k·n + M·b <= M + r
//! x - k·n - r >= -M·(1 - b)      i.e.   x - k·n - M·b >= r - M
//! ```
//!
//! With `b = 1` the rows force `x = k·n + r`. With `b = 0` they are slack for
//! every `x` in the box, because `M` is computed from the same bounds as `n`.
//! This is a half-reification: `b = 1 ⇒ x ≡ r (mod k)` and nothing more.
//! [`complement_pair`] upgrades the parity case to a full reification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LinearConstraint, Model, Objective, Sense, VarId, VarKind};

/// An indicator and the weight it contributes when maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReifiedTerm {
    pub indicator: VarId,
    pub weight: i64,
}

/// `target ≡ remainder (mod modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CongruenceSpec {
    pub target: VarId,
    pub modulus: i64,
    pub remainder: i64,
}

impl CongruenceSpec {
    pub fn new(target: VarId, modulus: i64, remainder: i64) -> Self {
        CongruenceSpec {
            target,
            modulus,
            remainder,
        }
    }

    pub fn even(target: VarId) -> Self {
        Self::new(target, 2, 0)
    }

    pub fn odd(target: VarId) -> Self {
        Self::new(target, 2, 1)
    }

    /// Checks the spec against `model` and returns the target's bounds.
    pub fn check(&self, model: &Model) -> Result<(i64, i64)> {
        check_modulus(self.modulus, self.remainder)?;
        let var = model
            .var(self.target)
            .ok_or(Error::UnknownVar(self.target.0))?;
        if var.kind != VarKind::IntBounded {
            return Err(Error::InvalidSpec(format!(
                "target `{}` must be a bounded integer",
                var.name
            )));
        }
        if var.lo < 0 {
            return Err(Error::InvalidSpec(format!(
                "target `{}` has negative lower bound {}",
                var.name, var.lo
            )));
        }
        Ok((var.lo, var.hi))
    }

    /// Upper bound of the auxiliary quotient: `floor((hi - r) / k)`, or 0 when negative.
    pub fn quotient_bound(&self, hi: i64) -> i64 {
        (hi - self.remainder).div_euclid(self.modulus).max(0)
    }

    /// Name suffix shared by the auxiliary variables.
    fn tag(&self) -> String {
        match (self.modulus, self.remainder) {
            (2, 0) => "even".to_string(),
            (2, 1) => "odd".to_string(),
            (k, r) => format!("mod{k}_{r}"),
        }
    }
}

pub(crate) fn check_modulus(k: i64, r: i64) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidSpec(format!(
            "modulus {k} must be at least 1"
        )));
    }
    if !(0..k).contains(&r) {
        return Err(Error::InvalidSpec(format!(
            "remainder {r} must lie in [0, {k})"
        )));
    }
    Ok(())
}

/// The big-M constant of one reification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BigM(pub i64);

/// Smallest `M` with `M >= |x - k·n - r|` over `x ∈ [lo, hi]`, `n ∈ [0, n_hi]`.
///
/// `target_bounds` are the bounds of the congruence target.
pub fn compute_big_m(spec: &CongruenceSpec, target_bounds: (i64, i64), n_hi: i64) -> BigM {
    let (lo, hi) = target_bounds;
    let above = hi - spec.remainder;
    let below = spec.modulus * n_hi + spec.remainder - lo;
    BigM(above.max(below).max(0))
}

/// Adds the auxiliary quotient, the indicator and the two big-M rows.
/// Returns `(indicator, weight)`.
pub fn reify_congruence(
    model: &mut Model,
    spec: CongruenceSpec,
    weight: i64,
) -> Result<ReifiedTerm> {
    let (lo, hi) = spec.check(model)?;
    let n_hi = spec.quotient_bound(hi);
    let BigM(m) = compute_big_m(&spec, (lo, hi), n_hi);
    let tag = spec.tag();

    let n = model.add_int_var(model.fresh_name(&format!("n_{tag}")), 0, n_hi)?;
    let b = model.add_bool_var(model.fresh_name(&format!("b_{tag}")))?;
    let x = spec.target;
    let k = spec.modulus;
    let r = spec.remainder;

    model.add_constraint(LinearConstraint::le(vec![(x, 1), (n, -k), (b, m)], m + r))?;
    model.add_constraint(LinearConstraint::ge(vec![(x, 1), (n, -k), (b, -m)], r - m))?;
    Ok(ReifiedTerm {
        indicator: b,
        weight,
    })
}

fn check_binary(model: &Model, var: VarId) -> Result<()> {
    match model.var(var) {
        None => Err(Error::UnknownVar(var.0)),
        Some(v) if v.kind != VarKind::Binary => Err(Error::NotBinary(var.0)),
        Some(_) => Ok(()),
    }
}

/// Hardens a term: adds `b = 1`.
pub fn require(model: &mut Model, term: ReifiedTerm) -> Result<()> {
    if model.var(term.indicator).is_none() {
        return Err(Error::UnknownVar(term.indicator.0));
    }
    model.add_constraint(LinearConstraint::eq(vec![(term.indicator, 1)], 1))?;
    Ok(())
}

/// Reifies evenness and oddness of `x` and couples them with `b_even + b_odd = 1`.
/// Returns `(even, odd)`.
pub fn complement_pair(model: &mut Model, x: VarId) -> Result<(ReifiedTerm, ReifiedTerm)> {
    CongruenceSpec::even(x).check(model)?;
    let even = reify_congruence(model, CongruenceSpec::even(x), 1)?;
    let odd = reify_congruence(model, CongruenceSpec::odd(x), 1)?;
    cardinality(
        model,
        &[even.indicator, odd.indicator],
        Cardinality::Exactly,
        1,
    )?;
    Ok((even, odd))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    AtLeast,
    AtMost,
    Exactly,
}

/// Adds `Σ indicators (≥ | ≤ | =) k`.
pub fn cardinality(
    model: &mut Model,
    indicators: &[VarId],
    sense: Cardinality,
    k: i64,
) -> Result<()> {
    for &b in indicators {
        check_binary(model, b)?;
    }
    if k < 0 || k > indicators.len() as i64 {
        return Err(Error::BadK {
            k,
            len: indicators.len(),
        });
    }
    let sense = match sense {
        Cardinality::AtLeast => Sense::Ge,
        Cardinality::AtMost => Sense::Le,
        Cardinality::Exactly => Sense::Eq,
    };
    let terms = indicators.iter().map(|&b| (b, 1)).collect();
    model.add_constraint(LinearConstraint::new(terms, sense, k))?;
    Ok(())
}

/// Sets the objective to maximize `Σ weight·indicator`. An empty list gives a
/// feasibility objective. Repeated indicators have their weights summed.
pub fn maximize_weighted(model: &mut Model, terms: &[ReifiedTerm]) -> Result<()> {
    if terms.is_empty() {
        return model.set_objective(Objective::feasibility());
    }
    let mut merged: Vec<(VarId, i64)> = Vec::with_capacity(terms.len());
    for term in terms {
        check_binary(model, term.indicator)?;
        match merged.iter_mut().find(|(v, _)| *v == term.indicator) {
            Some((_, w)) => *w += term.weight,
            None => merged.push((term.indicator, term.weight)),
        }
    }
    model.set_objective(Objective::maximize(merged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectiveSense;

    /// Brute-force max of |x - k·n - r| over the box.
    fn brute_max(lo: i64, hi: i64, k: i64, r: i64, n_hi: i64) -> i64 {
        let mut best = 0;
        for x in lo..=hi {
            for n in 0..=n_hi {
                best = best.max((x - k * n - r).abs());
            }
        }
        best
    }

    #[test]
    fn big_m_examples() {
        let x = VarId(0);
        assert_eq!(
            compute_big_m(&CongruenceSpec::even(x), (0, 10), 5),
            BigM(10)
        );
        assert_eq!(compute_big_m(&CongruenceSpec::even(x), (0, 0), 0), BigM(0));
        assert_eq!(compute_big_m(&CongruenceSpec::odd(x), (0, 11), 5), BigM(11));
        assert_eq!(brute_max(0, 10, 2, 0, 5), 10);
        assert_eq!(brute_max(0, 11, 2, 1, 5), 11);
    }

    #[test]
    fn big_m_matches_enumeration_on_small_boxes() {
        for k in 1..=5 {
            for r in 0..k {
                for lo in 0..=6 {
                    for hi in lo..=12 {
                        let spec = CongruenceSpec::new(VarId(0), k, r);
                        let n_hi = spec.quotient_bound(hi);
                        assert_eq!(
                            compute_big_m(&spec, (lo, hi), n_hi).0,
                            brute_max(lo, hi, k, r, n_hi),
                            "k={k} r={r} box=[{lo},{hi}]"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn even_reification_structure() {
        let mut m = Model::new();
        let x = m.add_int_var("x", 0, 10).unwrap();
        let term = reify_congruence(&mut m, CongruenceSpec::even(x), 1).unwrap();
        assert_eq!(m.num_vars(), 3);
        let n = &m.variables()[1];
        assert_eq!((n.name.as_str(), n.lo, n.hi), ("n_even", 0, 5));
        let b = &m.variables()[2];
        assert_eq!((b.name.as_str(), b.kind), ("b_even", VarKind::Binary));
        assert_eq!(
            term,
            ReifiedTerm {
                indicator: b.id,
                weight: 1
            }
        );
        let rows = m.constraints();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].terms, vec![(x, 1), (n.id, -2), (b.id, 10)]);
        assert_eq!((rows[0].sense, rows[0].rhs), (Sense::Le, 10));
        assert_eq!(rows[1].terms, vec![(x, 1), (n.id, -2), (b.id, -10)]);
        assert_eq!((rows[1].sense, rows[1].rhs), (Sense::Ge, -10));
    }

    #[test]
    fn odd_reification_has_offset() {
        let mut m = Model::new();
        let x = m.add_int_var("x", 0, 10).unwrap();
        reify_congruence(&mut m, CongruenceSpec::odd(x), 1).unwrap();
        let n = &m.variables()[1];
        assert_eq!((n.name.as_str(), n.hi), ("n_odd", 4));
        // M = max(10 - 1, 2·4 + 1 - 0) = 9
        let rows = m.constraints();
        assert_eq!(rows[0].terms[2].1, 9);
        assert_eq!(rows[0].rhs, 10);
        assert_eq!(rows[1].rhs, 1 - 9);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut m = Model::new();
        let x = m.add_int_var("x", 0, 10).unwrap();
        let neg = m.add_int_var("neg", -1, 3).unwrap();
        let b = m.add_bool_var("b").unwrap();
        for spec in [
            CongruenceSpec::new(x, 0, 0),
            CongruenceSpec::new(x, 3, 3),
            CongruenceSpec::new(x, 3, -1),
            CongruenceSpec::even(neg),
            CongruenceSpec::even(b),
        ] {
            assert!(matches!(
                reify_congruence(&mut m, spec, 1),
                Err(Error::InvalidSpec(_))
            ));
        }
        assert_eq!(
            reify_congruence(&mut m, CongruenceSpec::even(VarId(42)), 1),
            Err(Error::UnknownVar(42))
        );
        assert!(matches!(
            complement_pair(&mut m, neg),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn cardinality_checks() {
        let mut m = Model::new();
        let x = m.add_int_var("x", 0, 3).unwrap();
        let b0 = m.add_bool_var("b0").unwrap();
        let b1 = m.add_bool_var("b1").unwrap();
        assert_eq!(
            cardinality(&mut m, &[b0, x], Cardinality::AtLeast, 1),
            Err(Error::NotBinary(0))
        );
        assert_eq!(
            cardinality(&mut m, &[b0, b1], Cardinality::AtMost, 3),
            Err(Error::BadK { k: 3, len: 2 })
        );
        cardinality(&mut m, &[b0, b1], Cardinality::Exactly, 1).unwrap();
        let row = m.constraints().last().unwrap();
        assert_eq!(row.terms, vec![(b0, 1), (b1, 1)]);
        assert_eq!((row.sense, row.rhs), (Sense::Eq, 1));
    }

    #[test]
    fn complement_pair_row_equals_exactly_one() {
        let mut a = Model::new();
        let x = a.add_int_var("x", 0, 20).unwrap();
        let (even, odd) = complement_pair(&mut a, x).unwrap();
        assert_eq!(a.constraints().len(), 5);

        let mut b = Model::new();
        b.add_int_var("x", 0, 20).unwrap();
        reify_congruence(&mut b, CongruenceSpec::even(x), 1).unwrap();
        reify_congruence(&mut b, CongruenceSpec::odd(x), 1).unwrap();
        cardinality(
            &mut b,
            &[even.indicator, odd.indicator],
            Cardinality::Exactly,
            1,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exactly_two_of_three_parities_keeps_the_even_copies() {
        let mut m = Model::new();
        let x = m.add_int_var("x", 0, 6).unwrap();
        let a = reify_congruence(&mut m, CongruenceSpec::even(x), 1).unwrap();
        let b = reify_congruence(&mut m, CongruenceSpec::odd(x), 1).unwrap();
        let c = reify_congruence(&mut m, CongruenceSpec::even(x), 1).unwrap();
        let ids = [a.indicator, b.indicator, c.indicator];
        cardinality(&mut m, &ids, Cardinality::Exactly, 2).unwrap();
        let all = crate::oracle::brute_force(&m, true)
            .unwrap()
            .enumerated
            .unwrap();
        assert!(!all.is_empty());
        for s in &all {
            assert_eq!((s[ids[0]], s[ids[1]], s[ids[2]]), (1, 0, 1));
            assert_eq!(s[x] % 2, 0);
        }
        assert_eq!(m.var(c.indicator).unwrap().name, "b_even_2");
    }

    #[test]
    fn maximize_weighted_objective() {
        let mut m = Model::new();
        let x = m.add_int_var("x", 0, 4).unwrap();
        maximize_weighted(&mut m, &[]).unwrap();
        assert_eq!(m.objective().sense, ObjectiveSense::Feasibility);

        let t = reify_congruence(&mut m, CongruenceSpec::even(x), 3).unwrap();
        maximize_weighted(&mut m, &[t]).unwrap();
        assert_eq!(m.objective(), &Objective::maximize(vec![(t.indicator, 3)]));

        let bad = ReifiedTerm {
            indicator: x,
            weight: 1,
        };
        assert_eq!(maximize_weighted(&mut m, &[bad]), Err(Error::NotBinary(0)));
    }
}
