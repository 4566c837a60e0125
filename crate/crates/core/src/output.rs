//! Rendering for the two report formats.
//!
//! Machine format is line-oriented `key=value`, with every value printed in
//! the literal grammar so that reports re-parse to equal objects.

use std::fmt::Write as _;

use crate::relation::Relation;
use crate::stone::{NbisimVerdict, VietorisVerdict};

/// Output format selected by `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

/// Renders a relation in machine format; [`crate::parse::parse_machine_relation`]
/// is its inverse.
pub fn machine_relation(rel: &Relation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dom={}", rel.dom());
    let _ = writeln!(out, "cod={}", rel.cod());
    for (a, b) in rel.pairs() {
        let _ = writeln!(out, "pair=({a},{b})");
    }
    out
}

/// Renders a relation as human-readable text.
pub fn text_relation(rel: &Relation) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "relation on {} x {} with {} pairs:",
        rel.dom(),
        rel.cod(),
        rel.len()
    );
    for (a, b) in rel.pairs() {
        let _ = writeln!(out, "  {a} ~ {b}");
    }
    out
}

pub(crate) fn nbisim_lines(out: &mut String, prefix: &str, v: &NbisimVerdict, format: Format) {
    match format {
        Format::Machine => {
            let _ = writeln!(out, "{prefix}holds={}", v.holds);
            let _ = writeln!(out, "{prefix}mode={}", v.mode);
            if let Some(n) = v.stats.t_px {
                let _ = writeln!(out, "{prefix}size.t_px={n}");
            }
            if let Some(n) = v.stats.t_py {
                let _ = writeln!(out, "{prefix}size.t_py={n}");
            }
            if let Some(n) = v.stats.lifted_forward {
                let _ = writeln!(out, "{prefix}size.lifted_forward={n}");
            }
            if let Some(n) = v.stats.lifted_backward {
                let _ = writeln!(out, "{prefix}size.lifted_backward={n}");
            }
            if let Some(w) = &v.witness {
                let _ = writeln!(out, "{prefix}witness.u={}", w.u);
                let _ = writeln!(out, "{prefix}witness.v={}", w.v);
                let _ = writeln!(out, "{prefix}witness.phi={}", w.phi);
                let _ = writeln!(out, "{prefix}witness.psi={}", w.psi);
                let _ = writeln!(out, "{prefix}witness.direction={}", w.direction);
            }
            if let Some(note) = &v.note {
                let _ = writeln!(out, "{prefix}note={note}");
            }
        }
        Format::Text => {
            let _ = writeln!(
                out,
                "{prefix}{} (checked via the {} route)",
                if v.holds { "holds" } else { "fails" },
                v.mode
            );
            if let (Some(px), Some(py)) = (v.stats.t_px, v.stats.t_py) {
                let _ = writeln!(out, "{prefix}formula space sizes: |T(PX)| = {px}, |T(PY)| = {py}");
            }
            if let (Some(f), Some(b)) = (v.stats.lifted_forward, v.stats.lifted_backward) {
                let _ = writeln!(out, "{prefix}lifted pairs: {f} forward, {b} backward");
            }
            if let Some(w) = &v.witness {
                let _ = writeln!(
                    out,
                    "{prefix}witness: u={} v={} phi={} psi={} ({})",
                    w.u, w.v, w.phi, w.psi, w.direction
                );
            }
            if let Some(note) = &v.note {
                let _ = writeln!(out, "{prefix}note: {note}");
            }
        }
    }
}

pub(crate) fn vietoris_lines(out: &mut String, v: &VietorisVerdict, format: Format) {
    match format {
        Format::Machine => {
            let _ = writeln!(out, "holds={}", v.holds);
            if let Some((a, b)) = &v.witness {
                let _ = writeln!(out, "witness.u={a}");
                let _ = writeln!(out, "witness.v={b}");
            }
            let _ = writeln!(out, "note={}", v.note);
        }
        Format::Text => {
            let _ = writeln!(out, "{}", if v.holds { "holds" } else { "fails" });
            if let Some((a, b)) = &v.witness {
                let _ = writeln!(out, "witness: ({a},{b})");
            }
            let _ = writeln!(out, "note: {}", v.note);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_machine_relation, parse_set, parse_value};

    #[test]
    fn machine_relation_round_trips() {
        let rel = Relation::new(
            parse_set("{a,b}").unwrap(),
            parse_set("{{0},{1}}").unwrap(),
            [
                (parse_value("a").unwrap(), parse_value("{0}").unwrap()),
                (parse_value("b").unwrap(), parse_value("{1}").unwrap()),
            ],
        )
        .unwrap();
        let text = machine_relation(&rel);
        let back = parse_machine_relation(&text).unwrap();
        assert_eq!(back, rel);
    }
}
