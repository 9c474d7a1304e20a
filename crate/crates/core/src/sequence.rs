//! State sequences `s_0..s_T` with per-transition constraint kernels.
//!
//! A kernel is called once per applied step with `(s_{t-1}, s_t, model)` and
//! returns the `(indicator, weight)` pairs it created. The built-in kernels
//! reify a congruence on the next state and ignore the previous one.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Model, VarId};
use crate::reify::{self, CongruenceSpec, ReifiedTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceSpec {
    /// Number of transitions; the sequence has `length + 1` states.
    pub length: usize,
    pub state_lo: i64,
    pub state_hi: i64,
}

impl SequenceSpec {
    pub fn new(length: usize, state_lo: i64, state_hi: i64) -> Self {
        SequenceSpec {
            length,
            state_lo,
            state_hi,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidSpec(
                "sequence needs at least one transition".into(),
            ));
        }
        if self.state_lo < 0 || self.state_lo > self.state_hi {
            return Err(Error::InvalidSpec(format!(
                "state bounds [{}, {}] must satisfy 0 <= lo <= hi",
                self.state_lo, self.state_hi
            )));
        }
        Ok(())
    }
}

/// Creates `s0..sT` (named with `prefix`) and returns their ids in order.
pub fn build_sequence(model: &mut Model, spec: &SequenceSpec, prefix: &str) -> Result<Vec<VarId>> {
    spec.check()?;
    (0..=spec.length)
        .map(|t| model.add_int_var(format!("{prefix}{t}"), spec.state_lo, spec.state_hi))
        .collect()
}

/// Per-step constraint generator. Implementations may only append to the model.
pub trait TransitionKernel: Send + Sync {
    fn apply(
        &self,
        last_state: VarId,
        next_state: VarId,
        model: &mut Model,
    ) -> Result<Vec<ReifiedTerm>>;
}

/// Reifies `next_state ≡ remainder (mod modulus)` with weight 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CongruenceKernel {
    modulus: i64,
    remainder: i64,
}

impl CongruenceKernel {
    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn remainder(&self) -> i64 {
        self.remainder
    }

    /// Whether `value` has the property this kernel reifies.
    pub fn holds(&self, value: i64) -> bool {
        value.rem_euclid(self.modulus) == self.remainder
    }
}

impl fmt::Display for CongruenceKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.modulus, self.remainder) {
            (2, 0) => f.write_str("even"),
            (2, 1) => f.write_str("odd"),
            (k, r) => write!(f, "congruence:{k}:{r}"),
        }
    }
}

impl TransitionKernel for CongruenceKernel {
    fn apply(
        &self,
        _last_state: VarId,
        next_state: VarId,
        model: &mut Model,
    ) -> Result<Vec<ReifiedTerm>> {
        let spec = CongruenceSpec::new(next_state, self.modulus, self.remainder);
        Ok(vec![reify::reify_congruence(model, spec, 1)?])
    }
}

pub fn kernel_even() -> CongruenceKernel {
    CongruenceKernel {
        modulus: 2,
        remainder: 0,
    }
}

pub fn kernel_odd() -> CongruenceKernel {
    CongruenceKernel {
        modulus: 2,
        remainder: 1,
    }
}

pub fn kernel_congruence(modulus: i64, remainder: i64) -> Result<CongruenceKernel> {
    reify::check_modulus(modulus, remainder)?;
    Ok(CongruenceKernel { modulus, remainder })
}

/// Parses a built-in kernel name: `even`, `odd` or `congruence:<k>:<r>`.
pub fn parse_builtin(name: &str) -> Result<CongruenceKernel> {
    match name {
        "even" => Ok(kernel_even()),
        "odd" => Ok(kernel_odd()),
        _ => {
            let unknown = || Error::UnknownKernel(name.to_string());
            let rest = name.strip_prefix("congruence:").ok_or_else(unknown)?;
            let (k, r) = rest.split_once(':').ok_or_else(unknown)?;
            let k = k.parse().map_err(|_| unknown())?;
            let r = r.parse().map_err(|_| unknown())?;
            kernel_congruence(k, r)
        }
    }
}

/// Named kernels. Built-in names resolve without registration.
#[derive(Default)]
pub struct KernelRegistry {
    custom: BTreeMap<String, Box<dyn TransitionKernel>>,
}

impl KernelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, kernel: Box<dyn TransitionKernel>) {
        self.custom.insert(name.into(), kernel);
    }

    fn apply(
        &self,
        name: &str,
        last: VarId,
        next: VarId,
        model: &mut Model,
    ) -> Result<Vec<ReifiedTerm>> {
        match self.custom.get(name) {
            Some(kernel) => kernel.apply(last, next, model),
            None => parse_builtin(name)?.apply(last, next, model),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Soft,
    Require,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelApplication {
    /// Transition index in `1..=T`; the kernel sees `(s_{step-1}, s_step)`.
    pub step: usize,
    pub kernel: String,
    pub mode: Mode,
    pub weight: i64,
}

impl KernelApplication {
    pub fn new(step: usize, kernel: impl Into<String>, mode: Mode, weight: i64) -> Self {
        KernelApplication {
            step,
            kernel: kernel.into(),
            mode,
            weight,
        }
    }

    pub fn require(step: usize, kernel: impl Into<String>) -> Self {
        Self::new(step, kernel, Mode::Require, 1)
    }

    pub fn soft(step: usize, kernel: impl Into<String>, weight: i64) -> Self {
        Self::new(step, kernel, Mode::Soft, weight)
    }
}

/// Applies kernels in order. Required terms are hardened; soft terms are
/// returned with their weights scaled by the application weight.
pub fn apply_kernels(
    model: &mut Model,
    states: &[VarId],
    applications: &[KernelApplication],
    registry: &KernelRegistry,
) -> Result<Vec<ReifiedTerm>> {
    let transitions = states.len().saturating_sub(1);
    for app in applications {
        if app.step == 0 || app.step > transitions {
            return Err(Error::BadStep {
                step: app.step,
                len: transitions,
            });
        }
    }
    let mut soft = Vec::new();
    for app in applications {
        let terms = registry.apply(&app.kernel, states[app.step - 1], states[app.step], model)?;
        for term in terms {
            match app.mode {
                Mode::Require => reify::require(model, term)?,
                Mode::Soft => soft.push(ReifiedTerm {
                    indicator: term.indicator,
                    weight: term.weight * app.weight,
                }),
            }
        }
    }
    Ok(soft)
}
