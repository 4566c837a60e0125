//! Text parsers for functor expressions, value literals, and the file
//! formats used by the CLI.
//!
//! The grammars are small and stable; the exact forms are documented in the
//! repository README and re-stated briefly here.
//!
//! Functor expressions: `Id`, `P`, `Const{c1,c2}`, `F * G`, `F + G`,
//! `F . G`, with `.` binding tightest, then `*`, then `+`; parentheses
//! allowed.
//!
//! Value literals: atoms (`[A-Za-z0-9_]+` or `*`), sets `{v,...}`, pairs
//! `(v,w)`, injections `inl v` / `inr v`. `inl` and `inr` are reserved
//! words.

use std::collections::BTreeMap;

use crate::coalgebra::FinCoalgebra;
use crate::functor::FunctorExpr;
use crate::relation::Relation;
use crate::tower::Tower;
use crate::value::{FinMap, FinSet, Value};
use crate::{Error, Result};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor { src, pos: 0, line }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected '{c}', found '{got}'"))),
            None => Err(self.err(format!("expected '{c}', found end of input"))),
        }
    }

    fn try_eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        if self.try_eat('*') {
            return Ok("*".to_string());
        }
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.err(format!(
                "expected an identifier, found {:?}",
                rest.chars().next()
            )));
        }
        let word = &rest[..end];
        self.pos += end;
        Ok(word.to_string())
    }

    fn done(&mut self) -> Result<()> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.err(format!("trailing input: {:?}", self.rest())))
        }
    }
}

fn value_inner(c: &mut Cursor) -> Result<Value> {
    match c.peek() {
        Some('{') => {
            c.eat('{')?;
            let mut items = Vec::new();
            if !c.try_eat('}') {
                loop {
                    items.push(value_inner(c)?);
                    if c.try_eat(',') {
                        continue;
                    }
                    c.eat('}')?;
                    break;
                }
            }
            Ok(Value::set(items))
        }
        Some('(') => {
            c.eat('(')?;
            let left = value_inner(c)?;
            c.eat(',')?;
            let right = value_inner(c)?;
            c.eat(')')?;
            Ok(Value::pair(left, right))
        }
        Some(_) => {
            let word = c.ident()?;
            match word.as_str() {
                "inl" => Ok(Value::inl(value_inner(c)?)),
                "inr" => Ok(Value::inr(value_inner(c)?)),
                _ => Ok(Value::Atom(word)),
            }
        }
        None => Err(c.err("expected a value, found end of input")),
    }
}

/// Parses a single value literal.
pub fn parse_value(src: &str) -> Result<Value> {
    parse_value_at(src, 0)
}

fn parse_value_at(src: &str, line: usize) -> Result<Value> {
    let mut c = Cursor::new(src, line);
    let v = value_inner(&mut c)?;
    c.done()?;
    Ok(v)
}

/// Parses a set literal into a [`FinSet`].
pub fn parse_set(src: &str) -> Result<FinSet> {
    parse_set_at(src, 0)
}

fn parse_set_at(src: &str, line: usize) -> Result<FinSet> {
    let v = parse_value_at(src, line)?;
    FinSet::from_value(&v).ok_or(Error::Parse {
        line,
        msg: format!("expected a set literal, found {v}"),
    })
}

fn functor_primary(c: &mut Cursor) -> Result<FunctorExpr> {
    if c.try_eat('(') {
        let e = functor_sum(c)?;
        c.eat(')')?;
        return Ok(e);
    }
    let word = c.ident()?;
    match word.as_str() {
        "Id" => Ok(FunctorExpr::Identity),
        "P" => Ok(FunctorExpr::Powerset),
        "Const" => {
            c.eat('{')?;
            let mut labels = FinSet::new();
            if !c.try_eat('}') {
                loop {
                    labels.insert(Value::Atom(c.ident()?));
                    if c.try_eat(',') {
                        continue;
                    }
                    c.eat('}')?;
                    break;
                }
            }
            FunctorExpr::constant(labels).map_err(|e| c.err(e.to_string()))
        }
        other => Err(c.err(format!("unknown functor '{other}'"))),
    }
}

fn functor_comp(c: &mut Cursor) -> Result<FunctorExpr> {
    let mut e = functor_primary(c)?;
    while c.try_eat('.') {
        let inner = functor_primary(c)?;
        e = FunctorExpr::compose(e, inner);
    }
    Ok(e)
}

fn functor_prod(c: &mut Cursor) -> Result<FunctorExpr> {
    let mut e = functor_comp(c)?;
    while c.try_eat('*') {
        let rhs = functor_comp(c)?;
        e = FunctorExpr::product(e, rhs);
    }
    Ok(e)
}

fn functor_sum(c: &mut Cursor) -> Result<FunctorExpr> {
    let mut e = functor_prod(c)?;
    while c.try_eat('+') {
        let rhs = functor_prod(c)?;
        e = FunctorExpr::coproduct(e, rhs);
    }
    Ok(e)
}

/// Parses a functor expression.
pub fn parse_functor(src: &str) -> Result<FunctorExpr> {
    parse_functor_at(src, 0)
}

fn parse_functor_at(src: &str, line: usize) -> Result<FunctorExpr> {
    let mut c = Cursor::new(src, line);
    let e = functor_sum(&mut c)?;
    c.done()?;
    Ok(e)
}

/// Strips comments (`#` to end of line) and returns non-blank lines with
/// their 1-based line numbers.
fn content_lines(src: &str) -> Vec<(usize, &str)> {
    src.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                None
            } else {
                Some((i + 1, line))
            }
        })
        .collect()
}

/// Parses a coalgebra file: a `functor: <expr>` header, then one line per
/// state, `state -> <value literal>`. The carrier is the set of listed
/// states.
pub fn parse_coalgebra(src: &str) -> Result<FinCoalgebra> {
    let lines = content_lines(src);
    let mut functor: Option<FunctorExpr> = None;
    let mut structure: BTreeMap<Value, Value> = BTreeMap::new();
    for (line, text) in lines {
        if let Some(rest) = text.strip_prefix("functor:") {
            if functor.is_some() {
                return Err(Error::Parse {
                    line,
                    msg: "duplicate functor header".into(),
                });
            }
            functor = Some(parse_functor_at(rest, line)?);
            continue;
        }
        let (lhs, rhs) = split_arrow(text, line)?;
        let state = parse_value_at(lhs, line)?;
        let val = parse_value_at(rhs, line)?;
        if structure.insert(state.clone(), val).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("state {state} defined twice"),
            });
        }
    }
    let functor = functor.ok_or(Error::Parse {
        line: 0,
        msg: "missing 'functor:' header".into(),
    })?;
    let carrier: FinSet = structure.keys().cloned().collect();
    FinCoalgebra::new(functor, carrier, structure)
}

fn split_arrow<'a>(text: &'a str, line: usize) -> Result<(&'a str, &'a str)> {
    text.split_once("->").ok_or(Error::Parse {
        line,
        msg: "expected 'state -> value'".into(),
    })
}

/// Parses a relation file: optional `dom = <set>` / `cod = <set>` lines and
/// one `x ~ y` line per pair. Defaults for missing carriers can be supplied
/// by the caller (for instance the carriers of two coalgebras under check).
pub fn parse_relation(
    src: &str,
    default_dom: Option<&FinSet>,
    default_cod: Option<&FinSet>,
) -> Result<Relation> {
    let mut dom: Option<FinSet> = None;
    let mut cod: Option<FinSet> = None;
    let mut pairs = Vec::new();
    for (line, text) in content_lines(src) {
        if let Some(rest) = text.strip_prefix("dom") {
            let rest = rest.trim_start();
            if let Some(rest) = rest.strip_prefix('=') {
                dom = Some(parse_set_at(rest, line)?);
                continue;
            }
        }
        if let Some(rest) = text.strip_prefix("cod") {
            let rest = rest.trim_start();
            if let Some(rest) = rest.strip_prefix('=') {
                cod = Some(parse_set_at(rest, line)?);
                continue;
            }
        }
        let (lhs, rhs) = text.split_once('~').ok_or(Error::Parse {
            line,
            msg: "expected 'x ~ y'".into(),
        })?;
        pairs.push((parse_value_at(lhs, line)?, parse_value_at(rhs, line)?));
    }
    let dom = dom
        .or_else(|| default_dom.cloned())
        .ok_or(Error::Parse {
            line: 0,
            msg: "relation file has no 'dom =' line and no default domain".into(),
        })?;
    let cod = cod
        .or_else(|| default_cod.cloned())
        .ok_or(Error::Parse {
            line: 0,
            msg: "relation file has no 'cod =' line and no default codomain".into(),
        })?;
    Relation::new(dom, cod, pairs)
}

/// Parses a tower file: `level N` blocks in the coalgebra grammar, plus
/// `proj N: x -> y` lines giving the projection from level `N+1` onto
/// level `N`.
pub fn parse_tower(src: &str) -> Result<Tower> {
    let mut blocks: BTreeMap<usize, (Option<FunctorExpr>, BTreeMap<Value, Value>)> =
        BTreeMap::new();
    let mut proj_entries: BTreeMap<usize, BTreeMap<Value, Value>> = BTreeMap::new();
    let mut current: Option<usize> = None;
    for (line, text) in content_lines(src) {
        if let Some(rest) = text.strip_prefix("level") {
            let rest = rest.trim();
            let n: usize = rest.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad level index {rest:?}"),
            })?;
            blocks.entry(n).or_default();
            current = Some(n);
            continue;
        }
        if let Some(rest) = text.strip_prefix("proj") {
            let (idx, mapping) = rest.split_once(':').ok_or(Error::Parse {
                line,
                msg: "expected 'proj N: x -> y'".into(),
            })?;
            let n: usize = idx.trim().parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad projection index {:?}", idx.trim()),
            })?;
            let (lhs, rhs) = split_arrow(mapping, line)?;
            proj_entries
                .entry(n)
                .or_default()
                .insert(parse_value_at(lhs, line)?, parse_value_at(rhs, line)?);
            continue;
        }
        let n = current.ok_or(Error::Parse {
            line,
            msg: "expected a 'level N' header before coalgebra lines".into(),
        })?;
        let block = blocks.get_mut(&n).expect("block exists");
        if let Some(rest) = text.strip_prefix("functor:") {
            block.0 = Some(parse_functor_at(rest, line)?);
            continue;
        }
        let (lhs, rhs) = split_arrow(text, line)?;
        block
            .1
            .insert(parse_value_at(lhs, line)?, parse_value_at(rhs, line)?);
    }

    let count = blocks.len();
    let mut levels = Vec::with_capacity(count);
    for n in 0..count {
        let (functor, structure) = blocks.remove(&n).ok_or(Error::Parse {
            line: 0,
            msg: format!("missing 'level {n}' block"),
        })?;
        let functor = functor.ok_or(Error::Parse {
            line: 0,
            msg: format!("level {n} has no 'functor:' header"),
        })?;
        let carrier: FinSet = structure.keys().cloned().collect();
        levels.push(FinCoalgebra::new(functor, carrier, structure)?);
    }

    let mut projections = Vec::new();
    for n in 0..count.saturating_sub(1) {
        let entries = proj_entries.remove(&n).ok_or(Error::Parse {
            line: 0,
            msg: format!("missing 'proj {n}:' lines"),
        })?;
        projections.push(FinMap::new(
            levels[n + 1].carrier().clone(),
            levels[n].carrier().clone(),
            entries,
        )?);
    }
    if let Some(extra) = proj_entries.keys().next() {
        return Err(Error::Parse {
            line: 0,
            msg: format!("projection index {extra} has no matching pair of levels"),
        });
    }
    Tower::new(levels, projections)
}

/// Parses a level-relation file: `level N` headers followed by `x ~ y`
/// lines. Levels must be contiguous from 0.
pub fn parse_level_relation_pairs(src: &str) -> Result<Vec<Vec<(Value, Value)>>> {
    let mut levels: BTreeMap<usize, Vec<(Value, Value)>> = BTreeMap::new();
    let mut current: Option<usize> = None;
    for (line, text) in content_lines(src) {
        if let Some(rest) = text.strip_prefix("level") {
            let n: usize = rest.trim().parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad level index {:?}", rest.trim()),
            })?;
            levels.entry(n).or_default();
            current = Some(n);
            continue;
        }
        let n = current.ok_or(Error::Parse {
            line,
            msg: "expected a 'level N' header before pair lines".into(),
        })?;
        let (lhs, rhs) = text.split_once('~').ok_or(Error::Parse {
            line,
            msg: "expected 'x ~ y'".into(),
        })?;
        levels
            .get_mut(&n)
            .expect("level exists")
            .push((parse_value_at(lhs, line)?, parse_value_at(rhs, line)?));
    }
    let count = levels.len();
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        out.push(levels.remove(&n).ok_or(Error::Parse {
            line: 0,
            msg: format!("missing 'level {n}' block"),
        })?);
    }
    Ok(out)
}

/// Parses a thread-pair file. Each line presents one pair of threads as two
/// `;`-separated component lists: `v0 ; v1 ; ... ; vk ~ w0 ; ... ; wk`.
pub fn parse_thread_pairs(src: &str) -> Result<Vec<(Vec<Value>, Vec<Value>)>> {
    let mut out = Vec::new();
    for (line, text) in content_lines(src) {
        let (lhs, rhs) = text.split_once('~').ok_or(Error::Parse {
            line,
            msg: "expected 'v0 ; v1 ; ... ~ w0 ; w1 ; ...'".into(),
        })?;
        let parse_side = |side: &str| -> Result<Vec<Value>> {
            side.split(';')
                .map(|part| parse_value_at(part, line))
                .collect()
        };
        let left = parse_side(lhs)?;
        let right = parse_side(rhs)?;
        if left.len() != right.len() {
            return Err(Error::Parse {
                line,
                msg: "thread components have different depths".into(),
            });
        }
        out.push((left, right));
    }
    Ok(out)
}

/// Re-parses a relation printed in machine format (`dom=`, `cod=`, and
/// `pair=` lines). Inverse of [`crate::output::machine_relation`].
pub fn parse_machine_relation(src: &str) -> Result<Relation> {
    let mut dom = None;
    let mut cod = None;
    let mut pairs = Vec::new();
    for (line, text) in content_lines(src) {
        let (key, val) = text.split_once('=').ok_or(Error::Parse {
            line,
            msg: "expected 'key=value'".into(),
        })?;
        match key.trim() {
            "dom" => dom = Some(parse_set_at(val, line)?),
            "cod" => cod = Some(parse_set_at(val, line)?),
            "pair" => {
                let v = parse_value_at(val, line)?;
                match v {
                    Value::Pair(a, b) => pairs.push((*a, *b)),
                    other => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("expected a pair literal, found {other}"),
                        })
                    }
                }
            }
            _ => {}
        }
    }
    let dom = dom.ok_or(Error::Parse {
        line: 0,
        msg: "missing dom= line".into(),
    })?;
    let cod = cod.ok_or(Error::Parse {
        line: 0,
        msg: "missing cod= line".into(),
    })?;
    Relation::new(dom, cod, pairs)
}
