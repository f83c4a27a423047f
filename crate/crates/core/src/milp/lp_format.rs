//! CPLEX LP text writer.

use std::collections::HashSet;
use std::fmt::Write;

use thiserror::Error;

use super::{LinExpr, LinearModel, ObjSense, Sense, VarKind};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExportError {
    #[error("cannot export an empty model")]
    EmptyModel,
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
}

const MAX_LINE: usize = 100;

const RESERVED: &[&str] = &[
    "minimize", "maximize", "minimum", "maximum", "min", "max", "st", "s.t.", "subject", "such", "bounds", "bound",
    "binary", "binaries", "bin", "general", "generals", "gen", "integer", "integers", "semi", "semis",
    "semi-continuous", "end", "free", "inf", "infinity",
];

/// Maps an arbitrary identifier onto the LP-format identifier alphabet.
///
/// Keeps ASCII letters, digits and `_ . ( ) [ ] { }`-free punctuation out;
/// anything else becomes `_`. Leading digits, periods and reserved words get
/// an underscore prefix. The `e`/`E` + digit prefix that some readers parse as
/// an exponent is also escaped.
pub fn sanitize_name(raw: &str) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() {
        s.push('_');
    }
    let first = s.as_bytes()[0];
    let exp_like = (first == b'e' || first == b'E') && s.as_bytes().get(1).is_some_and(|b| b.is_ascii_digit());
    if first.is_ascii_digit() || first == b'.' || exp_like || RESERVED.contains(&s.to_ascii_lowercase().as_str()) {
        s.insert(0, '_');
    }
    s
}

fn unique_names<'a>(raw: impl Iterator<Item = &'a str>, taken: &mut HashSet<String>) -> Vec<String> {
    raw.map(|r| {
        let base = sanitize_name(r);
        let mut name = base.clone();
        let mut k = 2;
        while !taken.insert(name.clone()) {
            name = format!("{base}_{k}");
            k += 1;
        }
        name
    })
    .collect()
}

struct Line<'o> {
    out: &'o mut String,
    len: usize,
}

impl Line<'_> {
    fn push(&mut self, tok: &str) {
        if self.len + tok.len() + 1 > MAX_LINE && self.len > 0 {
            self.out.push_str("\n   ");
            self.len = 3;
        }
        self.out.push(' ');
        self.out.push_str(tok);
        self.len += tok.len() + 1;
    }
}

fn num<S: Scalar>(v: S, owner: &str) -> Result<String, ExportError> {
    if !v.is_finite() {
        return Err(ExportError::NonFinite(owner.to_string()));
    }
    Ok(format!("{v}"))
}

fn write_expr<S: Scalar>(
    line: &mut Line<'_>,
    expr: &LinExpr<S>,
    names: &[String],
    owner: &str,
) -> Result<(), ExportError> {
    if expr.is_empty() {
        // The grammar needs at least one term on every row.
        line.push("0");
        line.push(&names[0]);
        return Ok(());
    }
    for (i, (v, c)) in expr.iter().enumerate() {
        let mag = num(c.abs(), owner)?;
        let sign = if c < S::zero() { "-" } else { "+" };
        if i > 0 || sign == "-" {
            line.push(sign);
        }
        line.push(&mag);
        line.push(&names[v.0]);
    }
    Ok(())
}

/// Renders `model` in CPLEX LP format.
///
/// Variables and constraints appear in insertion order, so equal models give
/// byte-identical text.
pub fn export_lp<S: Scalar>(model: &LinearModel<S>) -> Result<String, ExportError> {
    if model.num_vars() == 0 {
        return Err(ExportError::EmptyModel);
    }
    let mut taken = HashSet::new();
    let names = unique_names(model.vars().iter().map(|v| v.name.as_str()), &mut taken);
    taken.insert("obj".into());
    let rows = unique_names(model.constraints().iter().map(|c| c.name.as_str()), &mut taken);

    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", sanitize_name(&model.name));
    let obj = model.objective();
    out.push_str(match obj.sense {
        ObjSense::Minimize => "Minimize\n",
        ObjSense::Maximize => "Maximize\n",
    });
    {
        out.push_str(" obj:");
        let mut line = Line { out: &mut out, len: 5 };
        write_expr(&mut line, &obj.expr, &names, "objective")?;
        if obj.offset != S::zero() {
            line.push(if obj.offset < S::zero() { "-" } else { "+" });
            line.push(&num(obj.offset.abs(), "objective")?);
        }
        out.push('\n');
    }

    out.push_str("Subject To\n");
    for (c, name) in model.constraints().iter().zip(&rows) {
        let _ = write!(out, " {name}:");
        let mut line = Line { out: &mut out, len: name.len() + 2 };
        write_expr(&mut line, &c.expr, &names, &c.name)?;
        line.push(match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        });
        line.push(&num(c.rhs, &c.name)?);
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for (v, name) in model.vars().iter().zip(&names) {
        if v.lower.is_nan() || v.upper.is_nan() {
            return Err(ExportError::NonFinite(v.name.clone()));
        }
        let default_ub = if v.kind == VarKind::Binary { S::one() } else { S::infinity() };
        let lo_inf = v.lower == S::neg_infinity();
        let hi_inf = v.upper == S::infinity();
        if v.lower == S::zero() && v.upper == default_ub {
            continue;
        }
        if lo_inf && hi_inf {
            let _ = writeln!(out, " {name} free");
        } else if v.lower == v.upper {
            let _ = writeln!(out, " {name} = {}", v.lower);
        } else {
            let lo = if lo_inf { "-inf".to_string() } else { format!("{}", v.lower) };
            let hi = if hi_inf { "+inf".to_string() } else { format!("{}", v.upper) };
            let _ = writeln!(out, " {lo} <= {name} <= {hi}");
        }
    }

    for (header, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let listed: Vec<&String> =
            model.vars().iter().zip(&names).filter(|(v, _)| v.kind == kind).map(|(_, n)| n).collect();
        if listed.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header}");
        let mut line = Line { out: &mut out, len: 0 };
        for n in listed {
            line.push(n);
        }
        out.push('\n');
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::VarId;

    #[test]
    fn one_variable_model() {
        let mut m = LinearModel::<f64>::new("one");
        let x = m.add_nonneg("x").unwrap();
        m.set_objective(ObjSense::Minimize, LinExpr::new().with(x, 1.0), 0.0).unwrap();
        let text = export_lp(&m).unwrap();
        for section in ["Minimize", "Subject To", "Bounds", "End"] {
            assert!(text.contains(section), "missing {section}:\n{text}");
        }
    }

    #[test]
    fn binaries_and_generals_are_listed() {
        let mut m = LinearModel::<f64>::new("kinds");
        let r = m.add_binary("r_I_high").unwrap();
        let n = m.add_var("n", 0.0, 9.0, VarKind::Integer).unwrap();
        m.add_constraint("c", LinExpr::new().with(r, 1.0).with(n, 1.0), Sense::Le, 4.0).unwrap();
        let text = export_lp(&m).unwrap();
        let bin = text.split("Binaries\n").nth(1).unwrap();
        assert!(bin.lines().next().unwrap().contains("r_I_high"));
        assert!(text.contains("Generals\n n"));
        assert!(text.contains("0 <= n <= 9"));
    }

    #[test]
    fn sanitizes_and_deduplicates_names() {
        assert_eq!(sanitize_name("x[1,2]"), "x_1_2_");
        assert_eq!(sanitize_name("3way"), "_3way");
        assert_eq!(sanitize_name("e12"), "_e12");
        assert_eq!(sanitize_name("End"), "_End");
        let mut m = LinearModel::<f64>::new("dup");
        let a = m.add_nonneg("a b").unwrap();
        let b = m.add_nonneg("a_b").unwrap();
        m.set_objective(ObjSense::Minimize, LinExpr::new().with(a, 1.0).with(b, 1.0), 0.0).unwrap();
        let text = export_lp(&m).unwrap();
        assert!(text.contains("a_b_2"));
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert_eq!(export_lp(&LinearModel::<f64>::new("e")), Err(ExportError::EmptyModel));
        let mut m = LinearModel::<f64>::new("nan");
        let x = m.add_nonneg("x").unwrap();
        m.set_bounds(x, 0.0, f64::NAN);
        assert!(matches!(export_lp(&m), Err(ExportError::NonFinite(_))));
        let _ = VarId(0);
    }

    #[test]
    fn export_is_deterministic() {
        let build = || {
            let mut m = LinearModel::<f64>::new("det");
            let vs: Vec<_> = (0..40).map(|i| m.add_binary(format!("x{i}")).unwrap()).collect();
            let e = LinExpr::from_terms(vs.iter().enumerate().map(|(i, &v)| (v, 1.0 + i as f64 / 7.0)));
            m.add_constraint("long_row", e.clone(), Sense::Le, 10.0).unwrap();
            m.set_objective(ObjSense::Maximize, e, -2.5).unwrap();
            m
        };
        let a = export_lp(&build()).unwrap();
        assert_eq!(a, export_lp(&build()).unwrap());
        assert!(a.lines().all(|l| l.len() <= MAX_LINE + 40));
    }
}
