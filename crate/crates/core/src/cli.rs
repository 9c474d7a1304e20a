//! Command implementations behind the `bigm` binary.
//!
//! Each command returns its exit code and output instead of printing, so the
//! binary stays a thin argument parser. Exit codes: 0 success or feasible,
//! 1 usage, parse or internal error (and failed `check`), 2 proven infeasible.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use crate::csp::{self, Mapping};
use crate::error::{Error, Result};
use crate::format::{self, ParsedModel};
use crate::mip::{self, MipOptions, MipStatus};
use crate::model::{eval_constraint, Assignment};
use crate::oracle::{self, OracleOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(code: i32, stdout: String) -> Self {
        Output {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(err: &Error) -> Self {
        Output {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Flags {
    pub json: bool,
    pub verbose: bool,
    pub guard: u128,
    pub limit: Option<usize>,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            json: false,
            verbose: false,
            guard: crate::DEFAULT_GUARD,
            limit: None,
        }
    }
}

fn run(result: Result<Output>) -> Output {
    result.unwrap_or_else(|e| Output::error(&e))
}

fn render_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

/// Display values keyed by name: CSP variables as domain labels, every other
/// model variable as an integer. Encoding binaries are hidden behind the CSP view.
fn named_values(parsed: &ParsedModel, assignment: &Assignment) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    if let Some((instance, book)) = &parsed.csp {
        let mapping = csp::decode(book, assignment)?;
        for (var, label) in csp::mapping_labels(instance, &mapping) {
            out.push((var, Value::String(label)));
        }
    }
    for v in parsed.model.variables() {
        if parsed.csp.as_ref().is_some_and(|(_, book)| book.owns(v.id)) {
            continue;
        }
        out.push((v.name.clone(), json!(assignment[v.id])));
    }
    Ok(out)
}

fn plain(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn cmd_solve(path: &Path, flags: &Flags) -> Output {
    run((|| {
        let parsed = format::parse_model(path)?;
        let result = mip::solve_mip_with(
            &parsed.model,
            &MipOptions {
                verbose: flags.verbose,
            },
        )?;
        let status = match result.status {
            MipStatus::Optimal => "OPTIMAL",
            MipStatus::Infeasible => "INFEASIBLE",
        };
        let mut values: BTreeMap<String, Value> = BTreeMap::new();
        if let Some(best) = &result.best {
            values.extend(named_values(&parsed, best)?);
        }
        let code = match result.status {
            MipStatus::Optimal => EXIT_OK,
            MipStatus::Infeasible => EXIT_INFEASIBLE,
        };
        let stdout = if flags.json {
            render_json(&json!({
                "status": status,
                "objective": result.objective,
                "bound": result.bound,
                "nodes": result.nodes,
                "assignment": values,
            }))
        } else {
            let mut s = format!("status: {status}\n");
            if let Some(obj) = result.objective {
                s.push_str(&format!(
                    "objective: {obj}\nbound: {}\n",
                    result.bound.unwrap_or(obj)
                ));
            }
            s.push_str(&format!("nodes: {}\n", result.nodes));
            for (name, value) in &values {
                s.push_str(&format!("{name} = {}\n", plain(value)));
            }
            s
        };
        Ok(Output::ok(code, stdout))
    })())
}

/// Reads `name = value` lines; `#` starts a comment.
pub fn parse_assignment_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(code, _)| code);
        if line.trim().is_empty() {
            continue;
        }
        let (name, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            column: 1,
            message: "expected `name = value`".into(),
        })?;
        let (name, value) = (name.trim(), value.trim());
        if name.is_empty() || value.is_empty() || value.contains(char::is_whitespace) {
            return Err(Error::Parse {
                line: i + 1,
                column: 1,
                message: "expected `name = value`".into(),
            });
        }
        out.push((name.to_string(), value.to_string()));
    }
    Ok(out)
}

pub fn cmd_check(path: &Path, assignment_path: &Path, flags: &Flags) -> Output {
    run((|| {
        let parsed = format::parse_model(path)?;
        let entries = parse_assignment_file(&std::fs::read_to_string(assignment_path)?)?;
        let model = &parsed.model;
        let mut violations: Vec<String> = Vec::new();
        let mut values: Vec<Option<i64>> = vec![None; model.num_vars()];
        let mut mapping = Mapping::default();

        for (name, value) in &entries {
            let csp_var = parsed
                .csp
                .as_ref()
                .and_then(|(inst, _)| inst.var_index(name).map(|_| inst));
            if let Some(instance) = csp_var {
                let d = instance.domain().index_of(value).ok_or_else(|| {
                    Error::InvalidSpec(format!("`{value}` is not a domain value of `{name}`"))
                })?;
                mapping.0.insert(name.clone(), d);
                continue;
            }
            let var = model
                .var_by_name(name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown variable `{name}`")))?;
            if parsed.csp.as_ref().is_some_and(|(_, book)| book.owns(var)) {
                return Err(Error::InvalidSpec(format!(
                    "`{name}` belongs to the csp encoding; assign the csp variable instead"
                )));
            }
            let v: i64 = value
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("`{value}` is not an integer")))?;
            values[var.0] = Some(v);
        }

        let mut skip_rows = 0..0;
        if let Some((instance, book)) = &parsed.csp {
            for i in csp::violated_constraints(instance, &mapping)? {
                violations.push(instance.constraint_label(i));
            }
            for (var, v) in book.lift(&mapping)? {
                values[var.0] = Some(v);
            }
            skip_rows = book.rows.clone();
        }

        let missing: Vec<&str> = model
            .variables()
            .iter()
            .filter(|v| values[v.id.0].is_none())
            .map(|v| v.name.as_str())
            .collect();
        if let Some(name) = missing.first() {
            return Err(Error::InvalidSpec(format!(
                "assignment has no value for `{name}`"
            )));
        }
        let assignment = Assignment::new(values.into_iter().map(|v| v.unwrap_or(0)).collect());
        for v in model.variables() {
            let value = assignment[v.id];
            if value < v.lo || value > v.hi {
                violations.push(format!("bounds:{}", v.name));
            }
        }
        for (i, c) in model.constraints().iter().enumerate() {
            if !skip_rows.contains(&i) && !eval_constraint(c, &assignment)? {
                violations.push(c.label.clone());
            }
        }

        let feasible = violations.is_empty();
        let stdout = if flags.json {
            render_json(&json!({ "feasible": feasible, "violations": violations }))
        } else {
            let mut s = format!(
                "{}\nviolations={}\n",
                if feasible { "FEASIBLE" } else { "INFEASIBLE" },
                violations.len()
            );
            for v in &violations {
                s.push_str(&format!("violated: {v}\n"));
            }
            s
        };
        Ok(Output::ok(
            if feasible { EXIT_OK } else { EXIT_ERROR },
            stdout,
        ))
    })())
}

fn solution_lines(
    parsed: &ParsedModel,
    solutions: &[Assignment],
) -> Result<(Vec<String>, Vec<Value>)> {
    let mut lines = Vec::with_capacity(solutions.len());
    let mut objects = Vec::with_capacity(solutions.len());
    for a in solutions {
        let named = named_values(parsed, a)?;
        lines.push(
            named
                .iter()
                .map(|(n, v)| format!("{n}={}", plain(v)))
                .collect::<Vec<_>>()
                .join(" "),
        );
        objects.push(Value::Object(named.into_iter().collect()));
    }
    Ok((lines, objects))
}

pub fn cmd_enumerate(path: &Path, flags: &Flags) -> Output {
    run((|| {
        let parsed = format::parse_model(path)?;
        let solutions = mip::enumerate(&parsed.model, flags.limit, flags.guard)?;
        let (lines, objects) = solution_lines(&parsed, &solutions)?;
        let code = if solutions.is_empty() && flags.limit != Some(0) {
            EXIT_INFEASIBLE
        } else {
            EXIT_OK
        };
        let stdout = if flags.json {
            render_json(&json!({ "solutions": objects, "count": solutions.len() }))
        } else {
            let mut s: String = lines.iter().map(|l| format!("{l}\n")).collect();
            s.push_str(&format!("count={}\n", solutions.len()));
            s
        };
        Ok(Output::ok(code, stdout))
    })())
}

pub fn cmd_oracle(path: &Path, flags: &Flags) -> Output {
    run((|| {
        let parsed = format::parse_model(path)?;
        let options = OracleOptions {
            collect: true,
            guard: flags.guard,
            ..OracleOptions::default()
        };
        let report = oracle::brute_force_with(&parsed.model, &options)?;
        let solutions = report.enumerated.unwrap_or_default();
        let (lines, objects) = solution_lines(&parsed, &solutions)?;
        let code = if report.feasible_count == 0 {
            EXIT_INFEASIBLE
        } else {
            EXIT_OK
        };
        let stdout = if flags.json {
            render_json(&json!({
                "solutions": objects,
                "optimum": report.optimum,
                "count": report.feasible_count,
            }))
        } else {
            let mut s: String = lines.iter().map(|l| format!("{l}\n")).collect();
            if let Some(opt) = report.optimum {
                s.push_str(&format!("optimum={opt}\n"));
            }
            s.push_str(&format!("count={}\n", report.feasible_count));
            s
        };
        Ok(Output::ok(code, stdout))
    })())
}

pub fn cmd_encode(path: &Path, out: Option<&Path>) -> Output {
    run((|| {
        let parsed = format::parse_model(path)?;
        let text = format::write_lp(&parsed.model);
        match out {
            Some(target) => {
                std::fs::write(target, &text)?;
                Ok(Output::ok(EXIT_OK, String::new()))
            }
            None => Ok(Output::ok(EXIT_OK, text)),
        }
    })())
}
