//! LP text export (objective, Subject To, Bounds, General, Binary, End).

use std::fmt::Write as _;

use super::model_file::format_terms;
use crate::model::{Model, ObjectiveSense, VarKind};

pub fn write_lp(model: &Model) -> String {
    let mut out = String::from("\\ exported by bigm\n");
    let objective = model.objective();
    let header = match objective.sense {
        ObjectiveSense::Maximize => "Maximize",
        ObjectiveSense::Minimize | ObjectiveSense::Feasibility => "Minimize",
    };
    writeln!(out, "{header}").unwrap();
    if objective.terms.is_empty() {
        out.push_str(" obj:\n");
    } else {
        writeln!(out, " obj: {}", format_terms(model, &objective.terms)).unwrap();
    }

    out.push_str("Subject To\n");
    for c in model.constraints() {
        if c.terms.is_empty() {
            match model.variables().first() {
                Some(v) => writeln!(
                    out,
                    " {}: 0 {} {} {}",
                    c.label,
                    v.name,
                    c.sense.symbol(),
                    c.rhs
                )
                .unwrap(),
                None => writeln!(out, "\\ {}: 0 {} {}", c.label, c.sense.symbol(), c.rhs).unwrap(),
            }
            continue;
        }
        writeln!(
            out,
            " {}: {} {} {}",
            c.label,
            format_terms(model, &c.terms),
            c.sense.symbol(),
            c.rhs
        )
        .unwrap();
    }

    out.push_str("Bounds\n");
    for v in model.variables() {
        writeln!(out, " {} <= {} <= {}", v.lo, v.name, v.hi).unwrap();
    }

    for (section, kind) in [
        ("General", VarKind::IntBounded),
        ("Binary", VarKind::Binary),
    ] {
        writeln!(out, "{section}").unwrap();
        let names: Vec<&str> = model
            .variables()
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect();
        for chunk in names.chunks(8) {
            writeln!(out, " {}", chunk.join(" ")).unwrap();
        }
    }
    out.push_str("End\n");
    out
}
