//! CPLEX LP text export.

use std::fmt::Write;

use super::{Comparator, LinearModel, VarId};

/// Characters the LP format accepts in names besides ASCII alphanumerics.
const NAME_PUNCT: &str = "!\"#$%&()/,.;?@_`'{}|~";

fn lp_name(raw: &str) -> String {
    let mut out: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || NAME_PUNCT.contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    // Names may not start with a digit or a period.
    if out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out.insert(0, '_');
    }
    out.truncate(255);
    out
}

fn number(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, terms: &[(VarId, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names.first().cloned().unwrap_or_default());
        return;
    }
    let mut line_len = 0;
    for (k, &(v, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 { '-' } else { '+' };
        let piece = if k == 0 && c >= 0.0 {
            format!(" {} {}", number(c.abs()), names[v.0])
        } else {
            format!(" {sign} {} {}", number(c.abs()), names[v.0])
        };
        line_len += piece.len();
        if line_len > 200 {
            out.push_str("\n   ");
            line_len = piece.len();
        }
        out.push_str(&piece);
    }
}

/// Renders `model` in LP format. Names are sanitized to the LP character set;
/// collisions after sanitizing are disambiguated with the variable index.
pub fn write_lp(model: &LinearModel) -> String {
    let mut names: Vec<String> = model.vars().iter().map(|v| lp_name(&v.name)).collect();
    let mut seen = std::collections::HashSet::new();
    for (i, n) in names.iter_mut().enumerate() {
        if !seen.insert(n.clone()) {
            *n = format!("{n}#{i}");
            seen.insert(n.clone());
        }
    }

    let mut out = String::new();
    out.push_str("\\ exported by flexnet\nMinimize\n obj:");
    write_expr(&mut out, model.objective(), &names);
    out.push_str("\nSubject To\n");
    let mut row_names = std::collections::HashSet::new();
    for (i, c) in model.constraints().iter().enumerate() {
        let mut name = lp_name(&c.name);
        if !row_names.insert(name.clone()) {
            name = format!("{name}#{i}");
            row_names.insert(name.clone());
        }
        let _ = write!(out, " {name}:");
        write_expr(&mut out, &c.terms, &names);
        let op = match c.cmp {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", number(c.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in model.vars().iter().zip(&names) {
        match (v.lower, v.upper) {
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => {
                let _ = writeln!(out, " {name} free");
            }
            (l, u) if l == u => {
                let _ = writeln!(out, " {name} = {}", number(l));
            }
            (l, u) => {
                let _ = writeln!(out, " {} <= {name} <= {}", number(l), number(u));
            }
        }
    }
    let ints: Vec<&String> = model
        .vars()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer)
        .map(|(_, n)| n)
        .collect();
    if !ints.is_empty() {
        out.push_str("Generals\n");
        for chunk in ints.chunks(8) {
            out.push(' ');
            out.push_str(
                &chunk
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_model_text() {
        let mut m = LinearModel::new();
        let x = m.add_var("x[a-b]", 0.0, f64::INFINITY, true);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY, false);
        m.add_constraint("c 1", vec![(x, 1.0), (y, -2.5)], Comparator::Ge, 3.0);
        m.add_objective_term(x, 1.0);
        let text = write_lp(&m);
        assert_eq!(
            text,
            "\\ exported by flexnet\nMinimize\n obj: 1 x_a_b_\nSubject To\n c_1: 1 x_a_b_ - 2.5 y >= 3\n\
             Bounds\n 0 <= x_a_b_ <= +inf\n y free\nGenerals\n x_a_b_\nEnd\n"
        );
    }

    #[test]
    fn leading_digit_is_escaped() {
        assert_eq!(lp_name("3x"), "_3x");
        assert_eq!(lp_name("ok(1,2)"), "ok(1,2)");
    }
}
