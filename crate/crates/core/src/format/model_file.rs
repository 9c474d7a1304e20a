//! Sectioned text format for models.
//!
//! ```text
//! # comments run to end of line
//! [variables]
//! x int 0 10
//! b binary
//!
//! [csp]
//! domain Blue Red Green
//! variables x1 x2 x3
//! neq x1 x2
//!
//! [sequence]
//! T 3
//! lo 0
//! hi 9
//! prefix s            # optional, states are s0..sT
//!
//! [kernels]
//! odd 1 require       # <kind> <step | variable> <soft | require> [weight]
//! congruence:3:0 2 soft 2
//!
//! [constraints]
//! cap: x + 2 b <= 11  # label is optional
//!
//! [objective]
//! max x               # or `min <expr>` or `feasibility`
//! ```
//!
//! Sections may appear in any order, each at most once. Construction order is
//! fixed: variables, csp, sequence, kernels, constraints, objective. Soft
//! kernel terms become a maximized objective when no `[objective]` is given.
//! Unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::lex::{is_ident, parse_error, strip_comment, tokenize, words, Tok, Token};
use crate::csp::{encode_csp_into, Codebook, CspInstance, Domain};
use crate::error::{Error, Result};
use crate::model::{
    LinearConstraint, Model, Objective, ObjectiveSense, Sense, VarId, VarKind, Variable,
};
use crate::reify::{self, ReifiedTerm};
use crate::sequence::{
    apply_kernels, build_sequence, parse_builtin, KernelApplication, KernelRegistry, Mode,
    SequenceSpec, TransitionKernel,
};

const SECTIONS: [&str; 6] = [
    "variables",
    "csp",
    "sequence",
    "kernels",
    "constraints",
    "objective",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceBlock {
    pub spec: SequenceSpec,
    pub prefix: String,
    pub states: Vec<VarId>,
}

/// A model file after lowering, with the front-end data needed to report
/// solutions in the file's own terms.
#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub model: Model,
    pub csp: Option<(CspInstance, Codebook)>,
    pub sequence: Option<SequenceBlock>,
    pub soft_terms: Vec<ReifiedTerm>,
}

type Line<'a> = (usize, &'a str);

pub fn parse_model(path: impl AsRef<Path>) -> Result<ParsedModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model_str(&text)
}

pub fn parse_model_str(text: &str) -> Result<ParsedModel> {
    let sections = split_sections(text)?;
    let lines = |name: &str| sections.get(name).map(|(_, l)| l.as_slice()).unwrap_or(&[]);

    let mut model = parse_variables(lines("variables"))?;
    model.ensure_valid()?;

    let csp = match sections.get("csp") {
        Some((header, body)) => {
            let instance = parse_csp(*header, body)?;
            let codebook = encode_csp_into(&mut model, &instance)?;
            Some((instance, codebook))
        }
        None => None,
    };

    let sequence = match sections.get("sequence") {
        Some((header, body)) => Some(parse_sequence(&mut model, *header, body)?),
        None => None,
    };

    let soft_terms = parse_kernels(&mut model, sequence.as_ref(), lines("kernels"))?;

    for &(lineno, line) in lines("constraints") {
        let row = parse_constraint(&model, lineno, line)?;
        model
            .add_constraint(row)
            .map_err(|e| parse_error(lineno, 1, e.to_string()))?;
    }

    match sections.get("objective") {
        Some((header, body)) => {
            if !soft_terms.is_empty() {
                return Err(parse_error(
                    *header,
                    1,
                    "an explicit objective cannot be combined with soft kernels",
                ));
            }
            let objective = parse_objective(&model, *header, body)?;
            model.set_objective(objective)?;
        }
        None => reify::maximize_weighted(&mut model, &soft_terms)?,
    }

    model.ensure_valid()?;
    Ok(ParsedModel {
        model,
        csp,
        sequence,
        soft_terms,
    })
}

fn split_sections(text: &str) -> Result<BTreeMap<String, (usize, Vec<Line<'_>>)>> {
    let mut sections: BTreeMap<String, (usize, Vec<Line<'_>>)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            let col = line.find('[').unwrap_or(0) + 1;
            if !SECTIONS.contains(&name) {
                return Err(parse_error(
                    lineno,
                    col,
                    format!("unknown section `[{name}]`"),
                ));
            }
            if sections.contains_key(name) {
                return Err(parse_error(
                    lineno,
                    col,
                    format!("section `[{name}]` appears twice"),
                ));
            }
            sections.insert(name.to_string(), (lineno, Vec::new()));
            current = Some(name.to_string());
            continue;
        }
        match &current {
            Some(name) => sections
                .get_mut(name)
                .expect("section exists")
                .1
                .push((lineno, line)),
            None => {
                let col = line.len() - line.trim_start().len() + 1;
                return Err(parse_error(
                    lineno,
                    col,
                    "content before the first section header",
                ));
            }
        }
    }
    Ok(sections)
}

fn parse_int(lineno: usize, (col, word): (usize, &str)) -> Result<i64> {
    word.parse()
        .map_err(|_| parse_error(lineno, col, format!("expected an integer, found `{word}`")))
}

fn expect_ident(lineno: usize, (col, word): (usize, &str)) -> Result<String> {
    if is_ident(word) {
        Ok(word.to_string())
    } else {
        Err(parse_error(
            lineno,
            col,
            format!("`{word}` is not a valid name"),
        ))
    }
}

fn parse_variables(lines: &[Line<'_>]) -> Result<Model> {
    let mut vars = Vec::with_capacity(lines.len());
    for &(lineno, line) in lines {
        let w = words(line);
        let name = expect_ident(lineno, w[0])?;
        let (kind, lo, hi) = match (w.get(1).map(|p| p.1), w.len()) {
            (Some("int"), 4) => (
                VarKind::IntBounded,
                parse_int(lineno, w[2])?,
                parse_int(lineno, w[3])?,
            ),
            (Some("binary"), 2) => (VarKind::Binary, 0, 1),
            _ => {
                return Err(parse_error(
                    lineno,
                    w.get(1).map_or(w[0].0, |p| p.0),
                    "expected `<name> int <lo> <hi>` or `<name> binary`",
                ))
            }
        };
        vars.push(Variable {
            id: VarId(vars.len()),
            name,
            kind,
            lo,
            hi,
        });
    }
    Ok(Model::from_parts(
        vars,
        Vec::new(),
        Objective::feasibility(),
    ))
}

fn parse_csp(header: usize, lines: &[Line<'_>]) -> Result<CspInstance> {
    let mut domain: Option<(usize, Vec<(usize, &str)>)> = None;
    let mut variables: Option<Vec<(usize, &str)>> = None;
    let mut edges = Vec::new();
    for &(lineno, line) in lines {
        let w = words(line);
        let rest = w[1..].to_vec();
        match w[0].1 {
            "domain" if domain.is_none() => domain = Some((lineno, rest)),
            "variables" if variables.is_none() => variables = Some(rest),
            "neq" => {
                if rest.len() != 2 {
                    return Err(parse_error(lineno, w[0].0, "expected `neq <u> <v>`"));
                }
                edges.push((lineno, rest[0], rest[1]));
            }
            "domain" | "variables" => {
                return Err(parse_error(
                    lineno,
                    w[0].0,
                    format!("`{}` given twice", w[0].1),
                ))
            }
            other => {
                return Err(parse_error(
                    lineno,
                    w[0].0,
                    format!("unknown csp key `{other}`"),
                ))
            }
        }
    }
    let (dom_line, labels) =
        domain.ok_or_else(|| parse_error(header, 1, "csp block needs a `domain` line"))?;
    for &(col, label) in &labels {
        expect_ident(dom_line, (col, label))?;
    }
    let domain = Domain::new(labels.iter().map(|p| p.1))
        .map_err(|e| parse_error(dom_line, 1, e.to_string()))?;
    let names =
        variables.ok_or_else(|| parse_error(header, 1, "csp block needs a `variables` line"))?;
    let mut instance = CspInstance::new(domain, names.iter().map(|p| p.1))
        .map_err(|e| parse_error(header, 1, e.to_string()))?;
    for (lineno, u, v) in edges {
        for (col, name) in [u, v] {
            if instance.var_index(name).is_none() {
                return Err(parse_error(
                    lineno,
                    col,
                    format!("unknown csp variable `{name}`"),
                ));
            }
        }
        instance.add_neq(u.1, v.1)?;
    }
    Ok(instance)
}

fn parse_sequence(model: &mut Model, header: usize, lines: &[Line<'_>]) -> Result<SequenceBlock> {
    let mut fields: BTreeMap<&str, (usize, (usize, &str))> = BTreeMap::new();
    for &(lineno, line) in lines {
        let w = words(line);
        let key = w[0].1;
        if !["T", "lo", "hi", "prefix"].contains(&key) {
            return Err(parse_error(
                lineno,
                w[0].0,
                format!("unknown sequence key `{key}`"),
            ));
        }
        if w.len() != 2 {
            return Err(parse_error(
                lineno,
                w[0].0,
                format!("expected `{key} <value>`"),
            ));
        }
        if fields.insert(key, (lineno, w[1])).is_some() {
            return Err(parse_error(lineno, w[0].0, format!("`{key}` given twice")));
        }
    }
    let int = |key: &str| -> Result<i64> {
        let &(lineno, word) = fields
            .get(key)
            .ok_or_else(|| parse_error(header, 1, format!("sequence block needs `{key}`")))?;
        parse_int(lineno, word)
    };
    let length = int("T")?;
    let spec = SequenceSpec::new(length.max(0) as usize, int("lo")?, int("hi")?);
    if length < 1 {
        return Err(parse_error(header, 1, "`T` must be at least 1"));
    }
    let prefix = match fields.get("prefix") {
        Some(&(lineno, word)) => expect_ident(lineno, word)?,
        None => "s".to_string(),
    };
    let states =
        build_sequence(model, &spec, &prefix).map_err(|e| parse_error(header, 1, e.to_string()))?;
    Ok(SequenceBlock {
        spec,
        prefix,
        states,
    })
}

fn parse_kernels(
    model: &mut Model,
    sequence: Option<&SequenceBlock>,
    lines: &[Line<'_>],
) -> Result<Vec<ReifiedTerm>> {
    let registry = KernelRegistry::new();
    let mut soft = Vec::new();
    for &(lineno, line) in lines {
        let w = words(line);
        if !(3..=4).contains(&w.len()) {
            return Err(parse_error(
                lineno,
                w[0].0,
                "expected `<kind> <step|variable> <soft|require> [weight]`",
            ));
        }
        let kernel =
            parse_builtin(w[0].1).map_err(|e| parse_error(lineno, w[0].0, e.to_string()))?;
        let mode = match w[2].1 {
            "soft" => Mode::Soft,
            "require" => Mode::Require,
            other => {
                return Err(parse_error(
                    lineno,
                    w[2].0,
                    format!("unknown mode `{other}`"),
                ))
            }
        };
        let weight = match w.get(3) {
            Some(&word) => parse_int(lineno, word)?,
            None => 1,
        };
        let at = |e: Error| parse_error(lineno, 1, e.to_string());
        let (col, target) = w[1];
        if target.starts_with(|c: char| c.is_ascii_digit()) {
            let step: usize = target
                .parse()
                .map_err(|_| parse_error(lineno, col, format!("bad step `{target}`")))?;
            let seq = sequence
                .ok_or_else(|| parse_error(lineno, col, "step targets need a [sequence] block"))?;
            let app = KernelApplication::new(step, w[0].1, mode, weight);
            let terms = apply_kernels(model, &seq.states, &[app], &registry)
                .map_err(|e| parse_error(lineno, col, e.to_string()))?;
            soft.extend(terms);
        } else {
            let var = model
                .var_by_name(target)
                .ok_or_else(|| parse_error(lineno, col, format!("unknown variable `{target}`")))?;
            for term in kernel.apply(var, var, model).map_err(at)? {
                match mode {
                    Mode::Require => reify::require(model, term).map_err(at)?,
                    Mode::Soft => soft.push(ReifiedTerm {
                        indicator: term.indicator,
                        weight: term.weight * weight,
                    }),
                }
            }
        }
    }
    Ok(soft)
}

/// Parses `[-] [coef] name (± [coef] name)*`, or a lone `0` for no terms.
fn parse_terms(
    model: &Model,
    lineno: usize,
    toks: &[Token],
    end_col: usize,
) -> Result<Vec<(VarId, i64)>> {
    if let [Token {
        tok: Tok::Int(0), ..
    }] = toks
    {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    let mut i = 0;
    let mut first = true;
    while i < toks.len() || first {
        let mut sign = 1i64;
        match toks.get(i).map(|t| &t.tok) {
            Some(Tok::Plus) if !first => i += 1,
            Some(Tok::Minus) => {
                sign = -1;
                i += 1;
            }
            _ if !first => {
                return Err(parse_error(
                    lineno,
                    toks[i].col,
                    "expected `+` or `-` between terms",
                ))
            }
            _ => {}
        }
        first = false;
        let mut coef = 1i64;
        if let Some(Token {
            tok: Tok::Int(c), ..
        }) = toks.get(i)
        {
            coef = *c;
            i += 1;
        }
        match toks.get(i) {
            Some(Token {
                tok: Tok::Ident(name),
                col,
            }) => {
                let var = model.var_by_name(name).ok_or_else(|| {
                    parse_error(lineno, *col, format!("unknown variable `{name}`"))
                })?;
                terms.push((var, sign * coef));
                i += 1;
            }
            Some(t) => return Err(parse_error(lineno, t.col, "expected a variable name")),
            None => return Err(parse_error(lineno, end_col, "expected a variable name")),
        }
    }
    Ok(terms)
}

fn parse_constraint(model: &Model, lineno: usize, line: &str) -> Result<LinearConstraint> {
    let toks = tokenize(line, lineno)?;
    let mut rest = toks.as_slice();
    let mut label = String::new();
    if let [Token {
        tok: Tok::Ident(name),
        ..
    }, Token {
        tok: Tok::Colon, ..
    }, tail @ ..] = rest
    {
        label = name.clone();
        rest = tail;
    }
    let pos = rest
        .iter()
        .position(|t| matches!(t.tok, Tok::Le | Tok::Ge | Tok::Eq))
        .ok_or_else(|| {
            parse_error(
                lineno,
                line.trim_end().len() + 1,
                "expected `<=`, `>=` or `=`",
            )
        })?;
    let sense = match rest[pos].tok {
        Tok::Le => Sense::Le,
        Tok::Ge => Sense::Ge,
        _ => Sense::Eq,
    };
    let terms = parse_terms(model, lineno, &rest[..pos], rest[pos].col)?;
    let rhs = match &rest[pos + 1..] {
        [Token {
            tok: Tok::Int(v), ..
        }] => *v,
        [Token {
            tok: Tok::Minus, ..
        }, Token {
            tok: Tok::Int(v), ..
        }] => -*v,
        [t, ..] => {
            return Err(parse_error(
                lineno,
                t.col,
                "right-hand side must be a single integer",
            ))
        }
        [] => {
            return Err(parse_error(
                lineno,
                rest[pos].col,
                "missing right-hand side",
            ))
        }
    };
    Ok(LinearConstraint::new(terms, sense, rhs).with_label(label))
}

fn parse_objective(model: &Model, header: usize, lines: &[Line<'_>]) -> Result<Objective> {
    let (lineno, line) = match lines {
        [single] => *single,
        [] => return Err(parse_error(header, 1, "objective section is empty")),
        [_, (lineno, _), ..] => {
            return Err(parse_error(*lineno, 1, "objective takes a single line"))
        }
    };
    let toks = tokenize(line, lineno)?;
    let (first, rest) = toks.split_first().expect("nonblank line has a token");
    let end_col = line.trim_end().len() + 1;
    match &first.tok {
        Tok::Ident(kw) if kw == "feasibility" => match rest.first() {
            None => Ok(Objective::feasibility()),
            Some(t) => Err(parse_error(lineno, t.col, "`feasibility` takes no terms")),
        },
        Tok::Ident(kw) if kw == "max" => Ok(Objective::maximize(parse_terms(
            model, lineno, rest, end_col,
        )?)),
        Tok::Ident(kw) if kw == "min" => Ok(Objective::minimize(parse_terms(
            model, lineno, rest, end_col,
        )?)),
        _ => Err(parse_error(
            lineno,
            first.col,
            "expected `max`, `min` or `feasibility`",
        )),
    }
}

/// `x - 2 n + 10 b`; `0` when there are no terms.
pub(crate) fn format_terms(model: &Model, terms: &[(VarId, i64)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, &(var, coef)) in terms.iter().enumerate() {
        let name = model
            .var(var)
            .map_or_else(|| var.to_string(), |v| v.name.clone());
        let magnitude = coef.unsigned_abs();
        let body = if magnitude == 1 {
            name
        } else {
            format!("{magnitude} {name}")
        };
        match (i, coef < 0) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (_, false) => write!(out, " + {body}").unwrap(),
            (_, true) => write!(out, " - {body}").unwrap(),
        }
    }
    out
}

/// Writes the lowered model (variables, constraints, objective) in the file format.
pub fn print_model(model: &Model) -> String {
    let mut out = String::from("[variables]\n");
    for v in model.variables() {
        match v.kind {
            VarKind::Binary => writeln!(out, "{} binary", v.name).unwrap(),
            VarKind::IntBounded => writeln!(out, "{} int {} {}", v.name, v.lo, v.hi).unwrap(),
        }
    }
    out.push_str("\n[constraints]\n");
    for c in model.constraints() {
        writeln!(
            out,
            "{}: {} {} {}",
            c.label,
            format_terms(model, &c.terms),
            c.sense.symbol(),
            c.rhs
        )
        .unwrap();
    }
    out.push_str("\n[objective]\n");
    let obj = model.objective();
    match obj.sense {
        ObjectiveSense::Feasibility => out.push_str("feasibility\n"),
        ObjectiveSense::Maximize => {
            writeln!(out, "max {}", format_terms(model, &obj.terms)).unwrap()
        }
        ObjectiveSense::Minimize => {
            writeln!(out, "min {}", format_terms(model, &obj.terms)).unwrap()
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_model() {
        let p = parse_model_str("[variables]\nx int 0 10\n[objective]\nmax x\n").unwrap();
        assert_eq!(p.model.num_vars(), 1);
        assert_eq!(
            p.model.objective(),
            &Objective::maximize(vec![(VarId(0), 1)])
        );
    }

    #[test]
    fn duplicate_variables_fail_validation() {
        let err = parse_model_str("[variables]\nx int 0 1\nx binary\n").unwrap_err();
        assert!(
            matches!(err, Error::InvalidModel(ref v) if v.len() == 1),
            "{err:?}"
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        let cases = [
            ("x int 0 1\n", 1, 1),
            ("[vars]\n", 1, 1),
            ("[variables]\nx int zero 1\n", 2, 7),
            ("[variables]\nx int 0 1\n[constraints]\nx + y <= 1\n", 4, 5),
            ("[variables]\nx int 0 1\n[constraints]\nx 1\n", 4, 4),
            ("[variables]\nx int 0 1\n[objective]\nbest x\n", 4, 1),
            ("[sequence]\nT 2\nlo 0\nhi 3\nwidth 4\n", 5, 1),
            ("[csp]\ndomain a b\nvariables u v\ncolour u\n", 4, 1),
            (
                "[sequence]\nT 1\nlo 0\nhi 3\n[kernels]\nprime 1 require\n",
                6,
                1,
            ),
        ];
        for (text, line, column) in cases {
            match parse_model_str(text) {
                Err(Error::Parse {
                    line: l, column: c, ..
                }) => {
                    assert_eq!((l, c), (line, column), "{text:?}")
                }
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn csp_block_lowers() {
        let text = "[csp]\ndomain Blue Red Green\nvariables x1 x2\nneq x1 x2\n";
        let p = parse_model_str(text).unwrap();
        assert_eq!(p.model.num_vars(), 6);
        assert_eq!(p.model.constraints().len(), 2 + 3);
        assert!(p.csp.is_some());
    }

    #[test]
    fn kernels_on_steps_and_variables() {
        let text = "\
[variables]
x int 0 10
[sequence]
T 2
lo 0
hi 4
[kernels]
even x require
odd 1 soft 3
even 2 soft
";
        let p = parse_model_str(text).unwrap();
        let names: Vec<&str> = p
            .model
            .variables()
            .iter()
            .map(|v| v.name.as_str())
            .collect();
        assert_eq!(
            names,
            ["x", "s0", "s1", "s2", "n_even", "b_even", "n_odd", "b_odd", "n_even_2", "b_even_2"]
        );
        assert_eq!(
            p.soft_terms.iter().map(|t| t.weight).collect::<Vec<_>>(),
            vec![3, 1]
        );
        assert_eq!(p.model.objective().sense, ObjectiveSense::Maximize);

        let clash = format!("{text}[objective]\nmax x\n");
        assert!(matches!(
            parse_model_str(&clash),
            Err(Error::Parse { line: 11, .. })
        ));
    }

    #[test]
    fn print_then_parse_is_identity() {
        let text = "\
[variables]
x int 0 10
neg int -4 3
[kernels]
congruence:3:1 x soft 2
[constraints]
-x - neg >= -9
cap: 2 x + 0 neg = 4
empty: 0 <= 0
";
        let m = parse_model_str(text).unwrap().model;
        let printed = print_model(&m);
        assert!(printed.contains("c2: -x - neg >= -9"), "{printed}");
        assert!(printed.contains("empty: 0 <= 0"), "{printed}");
        let again = parse_model_str(&printed).unwrap().model;
        assert_eq!(again, m);
        assert_eq!(print_model(&again), printed);
    }
}
