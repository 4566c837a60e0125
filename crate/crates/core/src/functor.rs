//! The functor grammar, value enumeration, functorial action on maps, and
//! the Barr relation lifting.
//!
//! Every constructor in the grammar denotes a weak-pullback-preserving set
//! functor, so the Barr lifting is a symmetric lax extension and is
//! functorial (it preserves identities and relation composition). The
//! module provides three independent routes to the lifting:
//!
//! - [`barr_lift`] materialises the lifted relation by enumerating functor
//!   values over the relation's pair set and projecting, which is the
//!   defining construction;
//! - [`barr_relates`] decides membership of a single pair structurally,
//!   without enumerating anything, so it scales to large carriers;
//! - [`lift_matrix`] tabulates membership for all pairs of enumerated
//!   values bottom-up over the functor tree, for batch checks.
//!
//! The three routes are cross-checked against each other in the tests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::prelude::IndexedRandom;
use rand::Rng;

use crate::relation::Relation;
use crate::value::{FinMap, FinSet, Value};
use crate::{Error, Limits, Result};

/// Syntax tree of a finite-set endofunctor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FunctorExpr {
    Identity,
    /// Constant functor at a fixed nonempty set of labels.
    Constant(FinSet),
    Powerset,
    Product(Box<FunctorExpr>, Box<FunctorExpr>),
    Coproduct(Box<FunctorExpr>, Box<FunctorExpr>),
    /// `Compose(outer, inner)` denotes `outer . inner`.
    Compose(Box<FunctorExpr>, Box<FunctorExpr>),
}

impl FunctorExpr {
    /// Constant functor; the carrier must be nonempty.
    pub fn constant(labels: FinSet) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput(
                "constant functor carrier must be nonempty".into(),
            ));
        }
        for l in labels.iter() {
            if !matches!(l, Value::Atom(_)) {
                return Err(Error::InvalidInput(format!(
                    "constant carrier must consist of labels, found {l}"
                )));
            }
        }
        Ok(FunctorExpr::Constant(labels))
    }

    pub fn product(left: FunctorExpr, right: FunctorExpr) -> Self {
        FunctorExpr::Product(Box::new(left), Box::new(right))
    }

    pub fn coproduct(left: FunctorExpr, right: FunctorExpr) -> Self {
        FunctorExpr::Coproduct(Box::new(left), Box::new(right))
    }

    pub fn compose(outer: FunctorExpr, inner: FunctorExpr) -> Self {
        FunctorExpr::Compose(Box::new(outer), Box::new(inner))
    }

    /// Number of values over a carrier of the given size, saturating.
    pub fn count_values(&self, carrier: u128) -> u128 {
        match self {
            FunctorExpr::Identity => carrier,
            FunctorExpr::Constant(c) => c.len() as u128,
            FunctorExpr::Powerset => {
                if carrier >= 127 {
                    u128::MAX
                } else {
                    1u128 << carrier
                }
            }
            FunctorExpr::Product(f, g) => f
                .count_values(carrier)
                .saturating_mul(g.count_values(carrier)),
            FunctorExpr::Coproduct(f, g) => f
                .count_values(carrier)
                .saturating_add(g.count_values(carrier)),
            FunctorExpr::Compose(f, g) => f.count_values(g.count_values(carrier)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FunctorExpr::Coproduct(..) => 1,
            FunctorExpr::Product(..) => 2,
            FunctorExpr::Compose(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for FunctorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &FunctorExpr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            FunctorExpr::Identity => write!(f, "Id"),
            FunctorExpr::Powerset => write!(f, "P"),
            FunctorExpr::Constant(labels) => write!(f, "Const{labels}"),
            FunctorExpr::Product(l, r) => {
                child(f, l, 2)?;
                write!(f, " * ")?;
                child(f, r, 3)
            }
            FunctorExpr::Coproduct(l, r) => {
                child(f, l, 1)?;
                write!(f, " + ")?;
                child(f, r, 2)
            }
            FunctorExpr::Compose(l, r) => {
                child(f, l, 4)?;
                write!(f, " . ")?;
                child(f, r, 4)
            }
        }
    }
}

/// Checks that `t` is a well-formed value for `expr` over carrier `x`.
pub fn check_well_formed(expr: &FunctorExpr, x: &FinSet, t: &Value) -> Result<()> {
    let member = |v: &Value| -> Result<()> {
        if x.contains(v) {
            Ok(())
        } else {
            Err(Error::MalformedValue(format!(
                "base element {v} is not in the carrier {x}"
            )))
        }
    };
    check_well_formed_with(expr, &member, t)
}

/// As [`check_well_formed`], with the carrier given as a membership test.
pub fn check_well_formed_with(
    expr: &FunctorExpr,
    base: &dyn Fn(&Value) -> Result<()>,
    t: &Value,
) -> Result<()> {
    match expr {
        FunctorExpr::Identity => base(t),
        FunctorExpr::Constant(labels) => {
            if labels.contains(t) {
                Ok(())
            } else {
                Err(Error::MalformedValue(format!(
                    "{t} is not a label of {labels}"
                )))
            }
        }
        FunctorExpr::Powerset => match t {
            Value::Set(items) => {
                for v in items {
                    base(v)?;
                }
                Ok(())
            }
            _ => Err(Error::MalformedValue(format!(
                "powerset value must be a set, found {t}"
            ))),
        },
        FunctorExpr::Product(f, g) => match t {
            Value::Pair(a, b) => {
                check_well_formed_with(f, base, a)?;
                check_well_formed_with(g, base, b)
            }
            _ => Err(Error::MalformedValue(format!(
                "product value must be a pair, found {t}"
            ))),
        },
        FunctorExpr::Coproduct(f, g) => match t {
            Value::Inl(a) => check_well_formed_with(f, base, a),
            Value::Inr(b) => check_well_formed_with(g, base, b),
            _ => Err(Error::MalformedValue(format!(
                "coproduct value must be tagged inl/inr, found {t}"
            ))),
        },
        FunctorExpr::Compose(f, g) => {
            let inner = |v: &Value| check_well_formed_with(g, base, v);
            check_well_formed_with(f, &inner, t)
        }
    }
}

/// Enumerates all values of `expr` over the carrier `x`, in canonical
/// order and without duplicates.
pub fn enumerate_values(expr: &FunctorExpr, x: &FinSet, limits: Limits) -> Result<Vec<Value>> {
    limits.check(expr.count_values(x.len() as u128), || {
        format!("values of {expr} over a {}-element carrier", x.len())
    })?;
    let base: Vec<Value> = x.iter().cloned().collect();
    Ok(enumerate_over(expr, &base))
}

fn enumerate_over(expr: &FunctorExpr, base: &[Value]) -> Vec<Value> {
    match expr {
        FunctorExpr::Identity => base.to_vec(),
        FunctorExpr::Constant(labels) => labels.iter().cloned().collect(),
        FunctorExpr::Powerset => {
            let mut out: BTreeSet<Value> = BTreeSet::new();
            let mut current: Vec<Value> = Vec::new();
            fn rec(
                items: &[Value],
                i: usize,
                current: &mut Vec<Value>,
                out: &mut BTreeSet<Value>,
            ) {
                if i == items.len() {
                    out.insert(Value::set(current.iter().cloned()));
                    return;
                }
                rec(items, i + 1, current, out);
                current.push(items[i].clone());
                rec(items, i + 1, current, out);
                current.pop();
            }
            rec(base, 0, &mut current, &mut out);
            out.into_iter().collect()
        }
        FunctorExpr::Product(f, g) => {
            let left = enumerate_over(f, base);
            let right = enumerate_over(g, base);
            let mut out = BTreeSet::new();
            for a in &left {
                for b in &right {
                    out.insert(Value::pair(a.clone(), b.clone()));
                }
            }
            out.into_iter().collect()
        }
        FunctorExpr::Coproduct(f, g) => {
            let mut out: BTreeSet<Value> = enumerate_over(f, base)
                .into_iter()
                .map(Value::inl)
                .collect();
            out.extend(enumerate_over(g, base).into_iter().map(Value::inr));
            out.into_iter().collect()
        }
        FunctorExpr::Compose(f, g) => {
            let inner = enumerate_over(g, base);
            enumerate_over(f, &inner)
        }
    }
}

/// Applies the functorial action of `expr` on the map `f` to the value `t`.
/// For the powerset this is direct image.
pub fn apply_map(expr: &FunctorExpr, f: &FinMap, t: &Value) -> Result<Value> {
    let base = |v: &Value| f.apply(v).cloned();
    apply_map_by(expr, &base, t)
}

fn apply_map_by(
    expr: &FunctorExpr,
    base: &dyn Fn(&Value) -> Result<Value>,
    t: &Value,
) -> Result<Value> {
    match expr {
        FunctorExpr::Identity => base(t),
        FunctorExpr::Constant(labels) => {
            if labels.contains(t) {
                Ok(t.clone())
            } else {
                Err(Error::MalformedValue(format!(
                    "{t} is not a label of {labels}"
                )))
            }
        }
        FunctorExpr::Powerset => match t {
            Value::Set(items) => {
                let mut out = BTreeSet::new();
                for v in items {
                    out.insert(base(v)?);
                }
                Ok(Value::Set(out))
            }
            _ => Err(Error::MalformedValue(format!(
                "powerset value must be a set, found {t}"
            ))),
        },
        FunctorExpr::Product(f, g) => match t {
            Value::Pair(a, b) => Ok(Value::pair(
                apply_map_by(f, base, a)?,
                apply_map_by(g, base, b)?,
            )),
            _ => Err(Error::MalformedValue(format!(
                "product value must be a pair, found {t}"
            ))),
        },
        FunctorExpr::Coproduct(f, g) => match t {
            Value::Inl(a) => Ok(Value::inl(apply_map_by(f, base, a)?)),
            Value::Inr(b) => Ok(Value::inr(apply_map_by(g, base, b)?)),
            _ => Err(Error::MalformedValue(format!(
                "coproduct value must be tagged inl/inr, found {t}"
            ))),
        },
        FunctorExpr::Compose(f, g) => {
            let inner = |v: &Value| apply_map_by(g, base, v);
            apply_map_by(f, &inner, t)
        }
    }
}

/// The Barr lifting of `rel`, materialised by its defining construction:
/// enumerate all values over the pair set and project both ways.
pub fn barr_lift(expr: &FunctorExpr, rel: &Relation, limits: Limits) -> Result<Relation> {
    let pair_carrier: FinSet = rel
        .pairs()
        .map(|(a, b)| Value::pair(a.clone(), b.clone()))
        .collect();
    let values = enumerate_values(expr, &pair_carrier, limits)?;
    let left = |v: &Value| match v {
        Value::Pair(a, _) => Ok((**a).clone()),
        _ => Err(Error::MalformedValue("expected a pair".into())),
    };
    let right = |v: &Value| match v {
        Value::Pair(_, b) => Ok((**b).clone()),
        _ => Err(Error::MalformedValue("expected a pair".into())),
    };
    let mut lifted = BTreeSet::new();
    for rho in &values {
        lifted.insert((
            apply_map_by(expr, &left, rho)?,
            apply_map_by(expr, &right, rho)?,
        ));
    }
    let dom: FinSet = enumerate_values(expr, rel.dom(), limits)?.into_iter().collect();
    let cod: FinSet = enumerate_values(expr, rel.cod(), limits)?.into_iter().collect();
    Relation::new(dom, cod, lifted)
}

/// Decides `(a, b) ∈ barr_lift(expr, rel)` structurally, without enumerating
/// functor values. Inputs are assumed well-formed over the relation's
/// carriers.
pub fn barr_relates(expr: &FunctorExpr, rel: &Relation, a: &Value, b: &Value) -> bool {
    barr_relates_by(expr, &|x, y| rel.contains(x, y), a, b)
}

/// As [`barr_relates`], with the base relation given as a predicate.
pub fn barr_relates_by(
    expr: &FunctorExpr,
    base: &dyn Fn(&Value, &Value) -> bool,
    a: &Value,
    b: &Value,
) -> bool {
    match expr {
        FunctorExpr::Identity => base(a, b),
        FunctorExpr::Constant(_) => a == b,
        FunctorExpr::Powerset => match (a, b) {
            (Value::Set(items_a), Value::Set(items_b)) => {
                items_a
                    .iter()
                    .all(|x| items_b.iter().any(|y| base(x, y)))
                    && items_b
                        .iter()
                        .all(|y| items_a.iter().any(|x| base(x, y)))
            }
            _ => false,
        },
        FunctorExpr::Product(f, g) => match (a, b) {
            (Value::Pair(a1, a2), Value::Pair(b1, b2)) => {
                barr_relates_by(f, base, a1, b1) && barr_relates_by(g, base, a2, b2)
            }
            _ => false,
        },
        FunctorExpr::Coproduct(f, g) => match (a, b) {
            (Value::Inl(x), Value::Inl(y)) => barr_relates_by(f, base, x, y),
            (Value::Inr(x), Value::Inr(y)) => barr_relates_by(g, base, x, y),
            _ => false,
        },
        FunctorExpr::Compose(f, g) => {
            let inner = |x: &Value, y: &Value| barr_relates_by(g, base, x, y);
            barr_relates_by(f, &inner, a, b)
        }
    }
}

/// A carrier enumeration with positions, for the matrix engine.
#[derive(Debug, Clone)]
pub struct Indexed {
    vals: Vec<Value>,
    pos: BTreeMap<Value, u32>,
}

impl Indexed {
    pub fn new(vals: Vec<Value>) -> Self {
        let pos = vals
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        Indexed { vals, pos }
    }

    pub fn from_set(s: &FinSet) -> Self {
        Self::new(s.iter().cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn value(&self, i: usize) -> &Value {
        &self.vals[i]
    }

    pub fn values(&self) -> &[Value] {
        &self.vals
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.pos.get(v).map(|&i| i as usize)
    }
}

/// A dense boolean matrix with row-bitset access.
#[derive(Debug, Clone)]
pub struct BitMat {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMat {
    pub fn new(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        BitMat {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.bits[r * self.words_per_row + c / 64] |= 1u64 << (c % 64);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words_per_row + c / 64] & (1u64 << (c % 64)) != 0
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn transpose(&self) -> BitMat {
        let mut t = BitMat::new(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r);
                }
            }
        }
        t
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// One level of a lifted-membership tabulation: enumerations of the functor
/// values on both sides and the full membership matrix of the Barr lifting
/// between them.
pub struct LiftLayer {
    pub left: Indexed,
    pub right: Indexed,
    pub mat: BitMat,
}

/// Tabulates the Barr lifting of a base relation (given as a matrix over
/// indexed base carriers) for all pairs of functor values, bottom-up over
/// the functor tree. Guards the size of every intermediate enumeration and
/// matrix.
pub fn lift_matrix(
    expr: &FunctorExpr,
    left: &Indexed,
    right: &Indexed,
    base: &BitMat,
    limits: Limits,
) -> Result<LiftLayer> {
    let nl = expr.count_values(left.len() as u128);
    let nr = expr.count_values(right.len() as u128);
    limits.check(nl, || format!("values of {expr} (left side)"))?;
    limits.check(nr, || format!("values of {expr} (right side)"))?;
    limits.check(nl.saturating_mul(nr), || {
        format!("lifted membership matrix for {expr}")
    })?;
    match expr {
        FunctorExpr::Identity => Ok(LiftLayer {
            left: left.clone(),
            right: right.clone(),
            mat: base.clone(),
        }),
        FunctorExpr::Constant(labels) => {
            let idx = Indexed::new(labels.iter().cloned().collect());
            let n = idx.len();
            let mut mat = BitMat::new(n, n);
            for i in 0..n {
                mat.set(i, i);
            }
            Ok(LiftLayer {
                left: idx.clone(),
                right: idx,
                mat,
            })
        }
        FunctorExpr::Powerset => {
            let lsubs = index_subsets(left);
            let rsubs = index_subsets(right);
            let baset = base.transpose();
            // Masks of the members of each subset, over the child indices.
            let lmask: Vec<Vec<u64>> = lsubs.members.iter().map(|m| to_mask(m, left.len())).collect();
            let rmask: Vec<Vec<u64>> = rsubs.members.iter().map(|m| to_mask(m, right.len())).collect();
            let mut mat = BitMat::new(lsubs.index.len(), rsubs.index.len());
            for (i, a) in lsubs.members.iter().enumerate() {
                for (j, b) in rsubs.members.iter().enumerate() {
                    let forth = a
                        .iter()
                        .all(|&x| mask_intersects(base.row(x as usize), &rmask[j]));
                    if !forth {
                        continue;
                    }
                    let back = b
                        .iter()
                        .all(|&y| mask_intersects(baset.row(y as usize), &lmask[i]));
                    if back {
                        mat.set(i, j);
                    }
                }
            }
            Ok(LiftLayer {
                left: lsubs.index,
                right: rsubs.index,
                mat,
            })
        }
        FunctorExpr::Product(f, g) => {
            let fl = lift_matrix(f, left, right, base, limits)?;
            let gl = lift_matrix(g, left, right, base, limits)?;
            let lpairs = index_pairs(&fl.left, &gl.left);
            let rpairs = index_pairs(&fl.right, &gl.right);
            let mut mat = BitMat::new(lpairs.index.len(), rpairs.index.len());
            for (i, &(a1, a2)) in lpairs.components.iter().enumerate() {
                for (j, &(b1, b2)) in rpairs.components.iter().enumerate() {
                    if fl.mat.get(a1 as usize, b1 as usize) && gl.mat.get(a2 as usize, b2 as usize)
                    {
                        mat.set(i, j);
                    }
                }
            }
            Ok(LiftLayer {
                left: lpairs.index,
                right: rpairs.index,
                mat,
            })
        }
        FunctorExpr::Coproduct(f, g) => {
            let fl = lift_matrix(f, left, right, base, limits)?;
            let gl = lift_matrix(g, left, right, base, limits)?;
            let tag = |layer_f: &Indexed, layer_g: &Indexed| -> (Indexed, Vec<(bool, u32)>) {
                let mut vals: Vec<(Value, (bool, u32))> = Vec::new();
                for (i, v) in layer_f.values().iter().enumerate() {
                    vals.push((Value::inl(v.clone()), (false, i as u32)));
                }
                for (i, v) in layer_g.values().iter().enumerate() {
                    vals.push((Value::inr(v.clone()), (true, i as u32)));
                }
                vals.sort_by(|a, b| a.0.cmp(&b.0));
                let index = Indexed::new(vals.iter().map(|(v, _)| v.clone()).collect());
                let sources = vals.into_iter().map(|(_, s)| s).collect();
                (index, sources)
            };
            let (lidx, lsrc) = tag(&fl.left, &gl.left);
            let (ridx, rsrc) = tag(&fl.right, &gl.right);
            let mut mat = BitMat::new(lidx.len(), ridx.len());
            for (i, &(ltag, li)) in lsrc.iter().enumerate() {
                for (j, &(rtag, rj)) in rsrc.iter().enumerate() {
                    let related = match (ltag, rtag) {
                        (false, false) => fl.mat.get(li as usize, rj as usize),
                        (true, true) => gl.mat.get(li as usize, rj as usize),
                        _ => false,
                    };
                    if related {
                        mat.set(i, j);
                    }
                }
            }
            Ok(LiftLayer {
                left: lidx,
                right: ridx,
                mat,
            })
        }
        FunctorExpr::Compose(f, g) => {
            let inner = lift_matrix(g, left, right, base, limits)?;
            lift_matrix(f, &inner.left, &inner.right, &inner.mat, limits)
        }
    }
}

struct SubsetIndex {
    index: Indexed,
    /// Sorted member positions (into the child index) for each subset,
    /// aligned with `index`.
    members: Vec<Vec<u32>>,
}

fn index_subsets(child: &Indexed) -> SubsetIndex {
    let n = child.len();
    let mut entries: Vec<(Value, Vec<u32>)> = Vec::with_capacity(1usize << n);
    let mut current: Vec<u32> = Vec::new();
    fn rec(child: &Indexed, i: usize, current: &mut Vec<u32>, out: &mut Vec<(Value, Vec<u32>)>) {
        if i == child.len() {
            let v = Value::set(current.iter().map(|&k| child.value(k as usize).clone()));
            out.push((v, current.clone()));
            return;
        }
        rec(child, i + 1, current, out);
        current.push(i as u32);
        rec(child, i + 1, current, out);
        current.pop();
    }
    rec(child, 0, &mut current, &mut entries);
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries.dedup_by(|a, b| a.0 == b.0);
    let index = Indexed::new(entries.iter().map(|(v, _)| v.clone()).collect());
    let members = entries.into_iter().map(|(_, m)| m).collect();
    SubsetIndex { index, members }
}

struct PairIndex {
    index: Indexed,
    components: Vec<(u32, u32)>,
}

fn index_pairs(f: &Indexed, g: &Indexed) -> PairIndex {
    let mut entries: Vec<(Value, (u32, u32))> = Vec::with_capacity(f.len() * g.len());
    for (i, a) in f.values().iter().enumerate() {
        for (j, b) in g.values().iter().enumerate() {
            entries.push((Value::pair(a.clone(), b.clone()), (i as u32, j as u32)));
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let index = Indexed::new(entries.iter().map(|(v, _)| v.clone()).collect());
    let components = entries.into_iter().map(|(_, c)| c).collect();
    PairIndex { index, components }
}

fn to_mask(members: &[u32], n: usize) -> Vec<u64> {
    let mut mask = vec![0u64; n.div_ceil(64)];
    for &m in members {
        mask[m as usize / 64] |= 1u64 << (m % 64);
    }
    mask
}

fn mask_intersects(row: &[u64], mask: &[u64]) -> bool {
    row.iter().zip(mask).any(|(a, b)| a & b != 0)
}

/// One sampled instance for the lax-extension law checks: relations
/// `r ⊆ X×Z` and `s ⊆ Z×Y`, a sub-relation `r_sub ⊆ r` for monotonicity,
/// and a function `f : X → Z`.
#[derive(Debug, Clone)]
pub struct LawSample {
    pub r: Relation,
    pub r_sub: Relation,
    pub s: Relation,
    pub f: FinMap,
}

impl LawSample {
    /// Draws a random sample on carriers of at most `max_carrier` elements.
    pub fn random(rng: &mut impl Rng, max_carrier: usize) -> Self {
        let carrier = |rng: &mut dyn rand::RngCore, prefix: &str| -> FinSet {
            let n = rng.random_range(1..=max_carrier);
            FinSet::atoms((0..n).map(|i| format!("{prefix}{i}")))
        };
        let x = carrier(rng, "x");
        let z = carrier(rng, "z");
        let y = carrier(rng, "y");
        let r = Relation::random(rng, &x, &z);
        let r_sub = r.random_subrelation(rng);
        let s = Relation::random(rng, &z, &y);
        let zvals: Vec<Value> = z.iter().cloned().collect();
        let f = FinMap::from_fn(x.clone(), z.clone(), |_| {
            zvals.choose(rng).expect("nonempty carrier").clone()
        })
        .expect("total by construction");
        LawSample { r, r_sub, s, f }
    }
}

/// Outcome of one law across all samples.
#[derive(Debug, Clone)]
pub struct LawStatus {
    pub holds: bool,
    /// A violating pair of lifted values, if any.
    pub counterexample: Option<(Value, Value)>,
}

impl LawStatus {
    fn ok() -> Self {
        LawStatus {
            holds: true,
            counterexample: None,
        }
    }

    fn record(&mut self, witness: (Value, Value)) {
        if self.holds {
            self.holds = false;
            self.counterexample = Some(witness);
        }
    }
}

/// Report of the lax-extension laws over a batch of samples.
#[derive(Debug, Clone)]
pub struct LawReport {
    pub samples: usize,
    /// Monotonicity: `R' ⊆ R` implies `LR' ⊆ LR`.
    pub l1: LawStatus,
    /// Lax composition: `LR ; LS ⊆ L(R;S)`.
    pub l2: LawStatus,
    /// Whether `LR ; LS = L(R;S)` held on every sample (functoriality).
    pub l2_equality: bool,
    /// `Tf ⊆ Lf` on graphs.
    pub l3: LawStatus,
    /// `L(R†) = (LR)†`.
    pub symmetry: LawStatus,
}

impl LawReport {
    pub fn all_hold(&self) -> bool {
        self.l1.holds && self.l2.holds && self.l3.holds && self.symmetry.holds
    }
}

/// Checks L1, L2 (with an equality flag), L3 and symmetry of the Barr
/// lifting of `expr` on every sample.
pub fn check_lax_laws(
    expr: &FunctorExpr,
    samples: impl IntoIterator<Item = LawSample>,
    limits: Limits,
) -> Result<LawReport> {
    let mut report = LawReport {
        samples: 0,
        l1: LawStatus::ok(),
        l2: LawStatus::ok(),
        l2_equality: true,
        l3: LawStatus::ok(),
        symmetry: LawStatus::ok(),
    };
    for sample in samples {
        report.samples += 1;
        let lr = barr_lift(expr, &sample.r, limits)?;

        // L1 on the provided sub-relation.
        let lr_sub = barr_lift(expr, &sample.r_sub, limits)?;
        if let Some(w) = lr_sub.pairs().find(|(a, b)| !lr.contains(a, b)) {
            report.l1.record((w.0.clone(), w.1.clone()));
        }

        // L2 and its strengthening to equality.
        let ls = barr_lift(expr, &sample.s, limits)?;
        let composed = lr.compose(&ls)?;
        let lifted_comp = barr_lift(expr, &sample.r.compose(&sample.s)?, limits)?;
        if let Some(w) = composed.pairs().find(|(a, b)| !lifted_comp.contains(a, b)) {
            report.l2.record((w.0.clone(), w.1.clone()));
        }
        if composed != lifted_comp {
            report.l2_equality = false;
        }

        // L3: the graph of the functorial action is inside the lifted graph.
        let graph = Relation::graph_of(&sample.f);
        let lf = barr_lift(expr, &graph, limits)?;
        for t in enumerate_values(expr, sample.f.dom(), limits)? {
            let image = apply_map(expr, &sample.f, &t)?;
            if !lf.contains(&t, &image) {
                report.l3.record((t, image));
                break;
            }
        }

        // Symmetry.
        let lr_conv = barr_lift(expr, &sample.r.converse(), limits)?;
        if lr_conv != lr.converse() {
            let w = lr_conv
                .pairs()
                .find(|(a, b)| !lr.contains(b, a))
                .map(|(a, b)| (a.clone(), b.clone()))
                .or_else(|| {
                    lr.pairs()
                        .find(|(a, b)| !lr_conv.contains(b, a))
                        .map(|(a, b)| (a.clone(), b.clone()))
                });
            report.symmetry.record(w.expect("unequal relations differ"));
        }
    }
    Ok(report)
}
