use std::fmt::Write;

use crate::bend::{Bend, Literal, VarId};
use crate::formula::BijunctiveFormula;
use crate::num::Rational;

fn push_term(out: &mut String, coeff: &Rational, name: &str, first: bool) {
    let one = Rational::one();
    let magnitude = coeff.abs();
    match (first, coeff.is_negative()) {
        (true, false) => {}
        (true, true) => out.push('-'),
        (false, false) => out.push_str(" + "),
        (false, true) => out.push_str(" - "),
    }
    if magnitude != one {
        let _ = write!(out, "{magnitude} ");
    }
    out.push_str(name);
}

pub fn format_literal(lit: &Literal, name: &dyn Fn(VarId) -> String) -> String {
    let mut out = String::new();
    match lit {
        Literal::Bound(b) => {
            let _ = write!(out, "{} {} {}", name(b.var), b.rel.symbol(), b.constant);
        }
        Literal::Ineq(t) => {
            push_term(&mut out, &t.coeff_x, &name(t.var_x), true);
            push_term(&mut out, &t.coeff_y, &name(t.var_y), false);
            let _ = write!(out, " {} {}", t.rel().symbol(), t.constant);
        }
    }
    out
}

/// One line of the text format; `⊥` prints as `x <= -inf`.
pub fn format_bend(bend: &Bend, name: &dyn Fn(VarId) -> String) -> String {
    if bend.is_bottom() {
        return format!("{} <= -inf", name(bend.x()));
    }
    bend.literals()
        .map(|(_, l)| format_literal(&l, name))
        .collect::<Vec<_>>()
        .join(" | ")
}

/// The formula in the text format, starting with a `vars` line.
pub fn pretty_print(phi: &BijunctiveFormula) -> String {
    let name = |v: VarId| phi.name(v).to_string();
    let mut out = String::new();
    if phi.num_vars() > 0 {
        out.push_str("vars ");
        out.push_str(&phi.names().join(" "));
        out.push('\n');
    }
    for b in phi.bends() {
        out.push_str(&format_bend(b, &name));
        out.push('\n');
    }
    out
}
