//! Checkers for witnesses and handcuff refutations, and the certificate text.
//!
//! ```text
//! handcuff-refutation v1
//! h(u0)=x
//! h(u1)=y
//! ends u0 u0
//! C u0 u0: u0 >= 1
//! D u0 u1: u0 - 1/2 u1 <= 0
//! D u1 u0: u1 - 1/2 u0 <= 0
//! residue C: u0 >= 1
//! residue P: u0 <= inf
//! residue D: u0 <= 0
//! ```
//!
//! Step lines name the local variables the bend is read from and to; a step
//! from a variable to itself is a length-0 cycle.

use std::collections::{BTreeMap, HashSet};

use crate::bend::{Bend, VarId};
use crate::error::Error;
use crate::formula::{Assignment, BijunctiveFormula};
use crate::frontend::parse::parse_bend_line;
use crate::frontend::print::format_bend;
use crate::residue::{handcuff_unsat, Cycle, Handcuff, HandcuffRefutation, Path, Step, Walk};

pub const CERTIFICATE_HEADER: &str = "handcuff-refutation v1";

/// Whether `a` assigns exactly the variables of `phi` and satisfies every bend.
pub fn check_witness(phi: &BijunctiveFormula, a: &Assignment) -> bool {
    a.is_total_for(phi) && phi.eval(a).unwrap_or(false)
}

/// Why `cert` is not a refutation of `phi`, or `None` if it is one.
pub fn refutation_problem(cert: &HandcuffRefutation, phi: &BijunctiveFormula) -> Option<String> {
    let h = &cert.handcuff;
    let rebuilt = Handcuff::new(h.cycle_c.clone(), h.path_p.clone(), h.cycle_d.clone());
    if let Err(e) = rebuilt {
        return Some(format!("not a handcuff: {e}"));
    }
    let conjuncts: HashSet<_> = phi.bends().iter().map(Bend::key).collect();
    for v in h.vertices() {
        match cert.hom.get(&v) {
            None => return Some(format!("local variable {v} has no image")),
            Some(w) if !phi.contains_var(*w) => return Some(format!("image of {v} is not a formula variable")),
            Some(_) => {}
        }
    }
    for step in h.steps() {
        let b = &step.bend;
        let image = match b.renamed(cert.hom[&b.x()], cert.hom[&b.y()]) {
            Ok(i) => i,
            Err(e) => return Some(format!("bend {b} has no image: {e}")),
        };
        if !conjuncts.contains(&image.key()) {
            return Some(format!("image {image} of a handcuff bend is not a conjunct"));
        }
    }
    match handcuff_unsat(h) {
        Ok(true) => None,
        Ok(false) => Some("the handcuff is satisfiable".into()),
        Err(e) => Some(format!("residues cannot be computed: {e}")),
    }
}

pub fn check_refutation(cert: &HandcuffRefutation, phi: &BijunctiveFormula) -> bool {
    refutation_problem(cert, phi).is_none()
}

fn local_name(v: VarId) -> String {
    format!("u{}", v.0)
}

/// The certificate in the text form above, with formula names from `phi`.
pub fn write_refutation(cert: &HandcuffRefutation, phi: &BijunctiveFormula) -> Result<String, Error> {
    let h = &cert.handcuff;
    let name = |v: VarId| local_name(v);
    let mut out = String::new();
    out.push_str(CERTIFICATE_HEADER);
    out.push('\n');
    for (local, target) in &cert.hom {
        out.push_str(&format!("h({})={}\n", local_name(*local), phi.name(*target)));
    }
    out.push_str(&format!(
        "ends {} {}\n",
        local_name(h.path_p.start()),
        local_name(h.path_p.end())
    ));
    let mut steps = |tag: &str, list: Vec<Step>| {
        for s in list {
            out.push_str(&format!(
                "{tag} {} {}: {}\n",
                local_name(s.from),
                local_name(s.to),
                format_bend(&s.bend, &name)
            ));
        }
    };
    steps("C", h.cycle_c.steps());
    steps("P", h.path_p.walk().steps.clone());
    steps("D", h.cycle_d.steps());
    let (c, p, d) = h.residues()?;
    out.push_str(&format!("residue C: {}\n", format_bend(&c.bend, &name)));
    out.push_str(&format!("residue P: {}\n", format_bend(&p.bend, &name)));
    out.push_str(&format!("residue D: {}\n", format_bend(&d.bend, &name)));
    Ok(out)
}

fn cert_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Certificate(format!("line {line}: {}", msg.into()))
}

fn build_cycle(at: VarId, steps: Vec<Step>, line: usize) -> Result<Cycle, Error> {
    match steps.as_slice() {
        [s] if s.from == s.to => Cycle::loop_at(at, s.bend.clone()),
        _ => Cycle::new(Walk::from_steps(at, steps)?),
    }
    .map_err(|e| cert_err(line, e.to_string()))
}

/// Reads a certificate against `phi`. Residue lines must match the
/// recomputed residues; everything else is left to [`check_refutation`].
pub fn read_refutation(text: &str, phi: &BijunctiveFormula) -> Result<HandcuffRefutation, Error> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == CERTIFICATE_HEADER => {}
        _ => return Err(cert_err(1, format!("expected '{CERTIFICATE_HEADER}'"))),
    }
    let mut locals = BijunctiveFormula::new();
    let mut hom: BTreeMap<VarId, VarId> = BTreeMap::new();
    let mut ends: Option<(VarId, VarId)> = None;
    let mut groups: BTreeMap<&str, Vec<Step>> = BTreeMap::new();
    let mut residues: Vec<(usize, String, String)> = Vec::new();
    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("h(") {
            let (local, target) = rest
                .split_once(")=")
                .ok_or_else(|| cert_err(n, "expected h(local)=variable"))?;
            let target = phi
                .lookup(target.trim())
                .ok_or_else(|| cert_err(n, format!("unknown variable '{}'", target.trim())))?;
            hom.insert(locals.var(local.trim()), target);
        } else if let Some(rest) = line.strip_prefix("ends ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [x, y] = parts.as_slice() else {
                return Err(cert_err(n, "expected 'ends x y'"));
            };
            ends = Some((locals.var(x), locals.var(y)));
        } else if let Some(rest) = line.strip_prefix("residue ") {
            let (tag, bend) = rest.split_once(':').ok_or_else(|| cert_err(n, "expected 'residue T: bend'"))?;
            residues.push((n, tag.trim().to_string(), bend.trim().to_string()));
        } else {
            let (head, bend_text) = line.split_once(':').ok_or_else(|| cert_err(n, "expected 'T from to: bend'"))?;
            let parts: Vec<&str> = head.split_whitespace().collect();
            let [tag @ ("C" | "P" | "D"), from, to] = parts.as_slice() else {
                return Err(cert_err(n, format!("unrecognised line '{line}'")));
            };
            let (from, to) = (locals.var(from), locals.var(to));
            let bend = {
                let mut intern = |s: &str| locals.var(s);
                parse_bend_line(bend_text, &mut intern).map_err(|e| cert_err(n, e.message))?
            };
            let step = if from == to {
                Step {
                    bend: bend.with_scope(from, to),
                    from,
                    to,
                }
            } else {
                Step::new(&bend, from, to).map_err(|e| cert_err(n, e.to_string()))?
            };
            groups.entry(tag).or_default().push(step);
        }
    }
    let (x, y) = ends.ok_or_else(|| cert_err(0, "missing 'ends' line"))?;
    let cycle_c = build_cycle(x, groups.remove("C").unwrap_or_default(), 0)?;
    let path_steps = groups.remove("P").unwrap_or_default();
    let path_p = if path_steps.is_empty() {
        Path::empty(x)
    } else {
        Path::new(Walk::from_steps(x, path_steps)?)?
    };
    if path_p.end() != y {
        return Err(cert_err(0, "path does not end at the second 'ends' variable"));
    }
    let cycle_d = build_cycle(y, groups.remove("D").unwrap_or_default(), 0)?;
    let handcuff = Handcuff::new(cycle_c, path_p, cycle_d).map_err(|e| cert_err(0, e.to_string()))?;

    let (c, p, d) = handcuff.residues()?;
    for (n, tag, text) in residues {
        let expected = match tag.as_str() {
            "C" => &c.bend,
            "P" => &p.bend,
            "D" => &d.bend,
            _ => return Err(cert_err(n, format!("unknown residue '{tag}'"))),
        };
        let mut intern = |s: &str| locals.var(s);
        let stated = parse_bend_line(&text, &mut intern).map_err(|e| cert_err(n, e.message))?;
        if stated != *expected {
            return Err(cert_err(n, format!("residue {tag} is {expected}, not {stated}")));
        }
    }
    Ok(HandcuffRefutation { handcuff, hom })
}
