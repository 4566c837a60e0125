//! Canonical tree-structured values, finite sets of values, and finite maps.
//!
//! A [`Value`] is both a carrier element and a functor value: powerset
//! values are sets of values, product values are pairs, coproduct values are
//! tagged, and composite functors simply nest. Sets are kept canonical
//! (ordered, duplicate-free) so structural equality is set equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::{Error, Limits, Result};

/// A canonical value. The `Ord` instance is structural and fixes the
/// canonical order used everywhere for reproducible output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// A named base element or constant label.
    Atom(String),
    /// A powerset value, or a subset-as-a-point of a carrier `P(X)`.
    Set(BTreeSet<Value>),
    /// A product value.
    Pair(Box<Value>, Box<Value>),
    /// Left injection into a coproduct.
    Inl(Box<Value>),
    /// Right injection into a coproduct.
    Inr(Box<Value>),
}

impl Value {
    pub fn atom(name: impl Into<String>) -> Self {
        Value::Atom(name.into())
    }

    pub fn set(items: impl IntoIterator<Item = Value>) -> Self {
        Value::Set(items.into_iter().collect())
    }

    pub fn pair(left: Value, right: Value) -> Self {
        Value::Pair(Box::new(left), Box::new(right))
    }

    pub fn inl(inner: Value) -> Self {
        Value::Inl(Box::new(inner))
    }

    pub fn inr(inner: Value) -> Self {
        Value::Inr(Box::new(inner))
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => write!(f, "{a}"),
            Value::Set(items) => {
                write!(f, "{{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            Value::Pair(a, b) => write!(f, "({a},{b})"),
            Value::Inl(v) => write!(f, "inl {v}"),
            Value::Inr(v) => write!(f, "inr {v}"),
        }
    }
}

/// A finite set of values with canonical iteration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct FinSet(BTreeSet<Value>);

impl FinSet {
    pub fn new() -> Self {
        FinSet(BTreeSet::new())
    }

    /// Carrier of named atoms.
    pub fn atoms<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Self {
        names
            .into_iter()
            .map(|n| Value::atom(n.as_ref()))
            .collect()
    }

    pub fn singleton(v: Value) -> Self {
        let mut s = BTreeSet::new();
        s.insert(v);
        FinSet(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.0.contains(v)
    }

    pub fn insert(&mut self, v: Value) -> bool {
        self.0.insert(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &FinSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &FinSet) -> FinSet {
        FinSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &FinSet) -> FinSet {
        FinSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &FinSet) -> FinSet {
        FinSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn complement_in(&self, universe: &FinSet) -> FinSet {
        universe.difference(self)
    }

    /// The set as a single `Value::Set`, for use as a point of `P(X)`.
    pub fn to_value(&self) -> Value {
        Value::Set(self.0.clone())
    }

    pub fn from_value(v: &Value) -> Option<FinSet> {
        v.as_set().map(|s| FinSet(s.clone()))
    }

    /// All subsets, each as a `FinSet`, in canonical order.
    pub fn subsets(&self, limits: Limits) -> Result<Vec<FinSet>> {
        let n = self.len() as u32;
        let count = if n >= 128 { u128::MAX } else { 1u128 << n };
        limits.check(count, || format!("powerset of a {n}-element set"))?;
        let items: Vec<&Value> = self.0.iter().collect();
        let mut out: BTreeSet<FinSet> = BTreeSet::new();
        let mut current: Vec<Value> = Vec::new();
        fn rec(
            items: &[&Value],
            i: usize,
            current: &mut Vec<Value>,
            out: &mut BTreeSet<FinSet>,
        ) {
            if i == items.len() {
                out.insert(current.iter().cloned().collect());
                return;
            }
            rec(items, i + 1, current, out);
            current.push(items[i].clone());
            rec(items, i + 1, current, out);
            current.pop();
        }
        rec(&items, 0, &mut current, &mut out);
        Ok(out.into_iter().collect())
    }
}

impl FromIterator<Value> for FinSet {
    fn from_iter<T: IntoIterator<Item = Value>>(iter: T) -> Self {
        FinSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a FinSet {
    type Item = &'a Value;
    type IntoIter = std::collections::btree_set::Iter<'a, Value>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Value::Set(self.0.clone()))
    }
}

/// A total function between finite carriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinMap {
    dom: FinSet,
    cod: FinSet,
    map: BTreeMap<Value, Value>,
}

impl FinMap {
    /// Builds a map, checking totality on `dom` and that images lie in `cod`.
    pub fn new(dom: FinSet, cod: FinSet, map: BTreeMap<Value, Value>) -> Result<Self> {
        for x in dom.iter() {
            match map.get(x) {
                Some(y) if cod.contains(y) => {}
                Some(y) => {
                    return Err(Error::CarrierMismatch(format!(
                        "image {y} of {x} is not in the codomain"
                    )))
                }
                None => {
                    return Err(Error::CarrierMismatch(format!(
                        "map is undefined on {x}"
                    )))
                }
            }
        }
        for x in map.keys() {
            if !dom.contains(x) {
                return Err(Error::CarrierMismatch(format!(
                    "map defined on {x} outside the domain"
                )));
            }
        }
        Ok(FinMap { dom, cod, map })
    }

    /// Builds a map from a rule, total by construction.
    pub fn from_fn(
        dom: FinSet,
        cod: FinSet,
        mut f: impl FnMut(&Value) -> Value,
    ) -> Result<Self> {
        let map: BTreeMap<Value, Value> = dom.iter().map(|x| (x.clone(), f(x))).collect();
        Self::new(dom, cod, map)
    }

    pub fn identity(carrier: &FinSet) -> Self {
        FinMap {
            dom: carrier.clone(),
            cod: carrier.clone(),
            map: carrier.iter().map(|x| (x.clone(), x.clone())).collect(),
        }
    }

    /// The unique map into a one-point carrier.
    pub fn constant(dom: FinSet, point: Value) -> Self {
        let map = dom.iter().map(|x| (x.clone(), point.clone())).collect();
        FinMap {
            dom,
            cod: FinSet::singleton(point),
            map,
        }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn apply(&self, x: &Value) -> Result<&Value> {
        self.map
            .get(x)
            .ok_or_else(|| Error::CarrierMismatch(format!("{x} is not in the domain")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, &Value)> {
        self.map.iter()
    }

    pub fn is_surjective(&self) -> bool {
        let image: BTreeSet<&Value> = self.map.values().collect();
        self.cod.iter().all(|y| image.contains(y))
    }

    /// `other` after `self` (first `self`, then `other`).
    pub fn then(&self, other: &FinMap) -> Result<FinMap> {
        if self.cod != other.dom {
            return Err(Error::CarrierMismatch(
                "composition carriers do not line up".into(),
            ));
        }
        let map = self
            .map
            .iter()
            .map(|(x, y)| Ok((x.clone(), other.apply(y)?.clone())))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(FinMap {
            dom: self.dom.clone(),
            cod: other.cod.clone(),
            map,
        })
    }

    /// The kernel of the map as a canonical partition of the domain:
    /// the fibres over the image, ordered.
    pub fn kernel_partition(&self) -> BTreeSet<FinSet> {
        let mut fibres: BTreeMap<&Value, FinSet> = BTreeMap::new();
        for (x, y) in &self.map {
            fibres.entry(y).or_default().insert(x.clone());
        }
        fibres.into_values().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Value {
        crate::parse::parse_value(s).unwrap()
    }

    #[test]
    fn canonical_set_order_and_equality() {
        let a = Value::set([v("b"), v("a"), v("a")]);
        let b = Value::set([v("a"), v("b")]);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "{a,b}");
    }

    #[test]
    fn subsets_of_two_element_set() {
        let x = FinSet::atoms(["a", "b"]);
        let subs = x.subsets(Limits::default()).unwrap();
        let rendered: Vec<String> = subs.iter().map(|s| s.to_string()).collect();
        assert_eq!(rendered, vec!["{}", "{a}", "{a,b}", "{b}"]);
    }

    #[test]
    fn subsets_respect_guard() {
        let x = FinSet::atoms((0..25).map(|i| format!("x{i}")));
        let err = x.subsets(Limits::default()).unwrap_err();
        assert!(matches!(err, Error::SizeGuardExceeded { .. }));
    }

    #[test]
    fn finmap_validation() {
        let dom = FinSet::atoms(["a"]);
        let cod = FinSet::atoms(["1"]);
        let bad = FinMap::new(dom.clone(), cod.clone(), BTreeMap::new());
        assert!(bad.is_err());
        let ok = FinMap::from_fn(dom, cod, |_| Value::atom("1")).unwrap();
        assert_eq!(ok.apply(&Value::atom("a")).unwrap(), &Value::atom("1"));
    }

    #[test]
    fn kernel_partition_groups_fibres() {
        let dom = FinSet::atoms(["a", "b", "c"]);
        let cod = FinSet::atoms(["0", "1"]);
        let f = FinMap::from_fn(dom, cod, |x| {
            if x == &Value::atom("c") {
                Value::atom("1")
            } else {
                Value::atom("0")
            }
        })
        .unwrap();
        let classes: Vec<String> = f.kernel_partition().iter().map(|c| c.to_string()).collect();
        assert_eq!(classes, vec!["{a,b}", "{c}"]);
    }
}
