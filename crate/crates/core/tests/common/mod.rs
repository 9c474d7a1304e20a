//! Random instance generators and independent oracles shared by the
//! integration tests. Nothing here calls the solver under test.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use bigm::csp::{BinaryRelation, CspInstance, Domain, Mapping};
use bigm::lp::{LpProblem, LpRow};
use bigm::model::{LinearConstraint, Model, Objective, ObjectiveSense, Sense};
use bigm::sequence::{KernelApplication, Mode, SequenceSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn random_sense(rng: &mut impl Rng) -> Sense {
    match rng.gen_range(0..5) {
        0 | 1 => Sense::Le,
        2 | 3 => Sense::Ge,
        _ => Sense::Eq,
    }
}

/// Up to 5 integer variables with bounds inside [0, 6], up to 10 rows with
/// coefficients in [-3, 3], and an objective with weights in [-3, 3]. Most
/// rows hold at a random anchor point so that a good share of models is
/// feasible; the rest are unanchored.
pub fn random_milp(rng: &mut impl Rng) -> Model {
    let mut m = Model::new();
    let n = rng.gen_range(1..=5);
    let mut anchor = Vec::new();
    let vars: Vec<_> = (0..n)
        .map(|i| {
            let lo = rng.gen_range(0..=6);
            let hi = rng.gen_range(lo..=6);
            anchor.push(rng.gen_range(lo..=hi));
            m.add_int_var(format!("x{i}"), lo, hi).unwrap()
        })
        .collect();
    for _ in 0..rng.gen_range(0..=10) {
        let mut terms = Vec::new();
        for &v in &vars {
            if rng.gen_bool(0.7) {
                let c: i64 = rng.gen_range(-3..=3);
                if c != 0 {
                    terms.push((v, c));
                }
            }
        }
        let sense = random_sense(rng);
        let rhs = if rng.gen_bool(0.85) {
            let at: i64 = terms.iter().map(|(v, c)| c * anchor[v.0]).sum();
            let slack = if sense == Sense::Eq {
                0
            } else {
                rng.gen_range(0..=3)
            };
            if sense == Sense::Ge {
                at - slack
            } else {
                at + slack
            }
        } else {
            let reach: i64 = terms.iter().map(|(_, c)| c.abs() * 6).sum();
            rng.gen_range(-reach / 2..=reach / 2 + 3)
        };
        m.add_constraint(LinearConstraint::new(terms, sense, rhs))
            .unwrap();
    }
    let terms: Vec<_> = vars.iter().map(|&v| (v, rng.gen_range(-3..=3))).collect();
    let objective = match rng.gen_range(0..5) {
        0 => Objective::feasibility(),
        1 | 2 => Objective::maximize(terms),
        _ => Objective::minimize(terms),
    };
    m.set_objective(objective).unwrap();
    m
}

/// Up to 5 variables, domains of up to 4 values, up to 7 constraints with
/// random relations (self-loops included).
pub fn random_csp(rng: &mut impl Rng) -> CspInstance {
    let d = rng.gen_range(1..=4);
    let domain = Domain::new((0..d).map(|i| format!("d{i}"))).unwrap();
    let n = rng.gen_range(1..=5);
    let mut inst = CspInstance::new(domain, (0..n).map(|i| format!("v{i}"))).unwrap();
    for _ in 0..rng.gen_range(0..=7) {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let mut pairs = Vec::new();
        for a in 0..d {
            for b in 0..d {
                if rng.gen_bool(0.6) {
                    pairs.push((a, b));
                }
            }
        }
        inst.add_constraint(u, v, BinaryRelation::new(pairs))
            .unwrap();
    }
    inst
}

/// Every mapping of the instance, filtered by direct relation membership.
pub fn homomorphisms(inst: &CspInstance) -> BTreeSet<Vec<usize>> {
    let n = inst.variables().len();
    let d = inst.domain().len();
    let mut out = BTreeSet::new();
    let mut values = vec![0usize; n];
    loop {
        let ok = inst
            .constraints()
            .iter()
            .all(|c| c.relation.contains(values[c.scope.0], values[c.scope.1]));
        if ok {
            out.insert(values.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            values[i] += 1;
            if values[i] < d {
                break;
            }
            values[i] = 0;
        }
    }
}

pub fn mapping_vector(inst: &CspInstance, mapping: &Mapping) -> Vec<usize> {
    inst.variables()
        .iter()
        .map(|v| mapping.get(v).expect("total mapping"))
        .collect()
}

pub fn random_kernel(rng: &mut impl Rng) -> String {
    match rng.gen_range(0..3) {
        0 => "even".into(),
        1 => "odd".into(),
        _ => {
            let k = rng.gen_range(1..=5);
            format!("congruence:{k}:{}", rng.gen_range(0..k))
        }
    }
}

/// T up to 3, state bounds inside [0, 9], up to 4 soft applications and
/// occasionally one required application.
pub fn random_sequence(rng: &mut impl Rng) -> (SequenceSpec, Vec<KernelApplication>) {
    let length = rng.gen_range(1..=3);
    let lo = rng.gen_range(0..=5);
    let hi = rng.gen_range(lo..=9);
    let mut apps = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        let step = rng.gen_range(1..=length);
        apps.push(KernelApplication::new(
            step,
            random_kernel(rng),
            Mode::Soft,
            rng.gen_range(-1..=3),
        ));
    }
    if rng.gen_bool(0.25) {
        let step = rng.gen_range(1..=length);
        apps.push(KernelApplication::require(step, random_kernel(rng)));
    }
    (SequenceSpec::new(length, lo, hi), apps)
}

/// A feasible bounded LP: up to 6 variables, up to 10 rows built to hold at a
/// random interior point.
pub fn random_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=2) as f64).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0..=8) as f64).collect();
    let anchor: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| rng.gen_range(*l..=*h))
        .collect();
    let mut rows = Vec::new();
    for _ in 0..rng.gen_range(0..=10) {
        let mut coefs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let c = rng.gen_range(-4..=4);
            if c != 0 && rng.gen_bool(0.7) {
                coefs.push((j, c as f64));
            }
        }
        let at: f64 = coefs.iter().map(|(j, c)| c * anchor[*j]).sum();
        let slack = rng.gen_range(0.0..4.0);
        let (sense, rhs) = match rng.gen_range(0..5) {
            0 | 1 => (Sense::Le, at + slack),
            2 | 3 => (Sense::Ge, at - slack),
            _ => (Sense::Eq, at),
        };
        rows.push(LpRow { coefs, sense, rhs });
    }
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
    let sense = if rng.gen_bool(0.5) {
        ObjectiveSense::Maximize
    } else {
        ObjectiveSense::Minimize
    };
    LpProblem {
        lo,
        hi,
        rows,
        objective,
        sense,
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (x, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                        *x -= f * p;
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over all basic feasible points, found by solving every
/// choice of `n` tight constraints. `None` when no vertex is feasible.
pub fn lp_vertex_oracle(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    // Every row and bound as a hyperplane; equalities are enforced by the
    // feasibility filter.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &p.rows {
        let mut a = vec![0.0; n];
        for &(j, c) in &row.coefs {
            a[j] += c;
        }
        planes.push((a, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), p.lo[j]));
        planes.push((e, p.hi[j]));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-7;
        (0..n).all(|j| x[j] >= p.lo[j] - tol && x[j] <= p.hi[j] + tol)
            && p.rows.iter().all(|r| {
                let act: f64 = r.coefs.iter().map(|(j, c)| c * x[*j]).sum();
                let scale = 1.0 + r.rhs.abs();
                match r.sense {
                    Sense::Le => act <= r.rhs + tol * scale,
                    Sense::Ge => act >= r.rhs - tol * scale,
                    Sense::Eq => (act - r.rhs).abs() <= tol * scale,
                }
            })
    };
    let sign = if p.sense == ObjectiveSense::Minimize {
        -1.0
    } else {
        1.0
    };
    let mut best: Option<f64> = None;
    combinations(planes.len(), n, &mut |chosen| {
        let a: Vec<Vec<f64>> = chosen.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = chosen.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let value = sign * p.objective_at(&x);
                if best.is_none_or(|v| value > v) {
                    best = Some(value);
                }
            }
        }
    });
    best.map(|v| sign * v)
}

fn combinations(total: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(
        start: usize,
        total: usize,
        k: usize,
        acc: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if acc.len() == k {
            f(acc);
            return;
        }
        for i in start..total {
            if total - i < k - acc.len() {
                break;
            }
            acc.push(i);
            rec(i + 1, total, k, acc, f);
            acc.pop();
        }
    }
    rec(0, total, k, &mut Vec::new(), f);
}
