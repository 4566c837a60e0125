//! Finite binary relations with explicit carriers, and the forward and
//! backward arrow liftings between families of clopens.
//!
//! Relations always carry their domain and codomain, so empty relations on
//! different carriers are distinct objects; the arrow liftings depend on
//! the carriers.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::value::{FinMap, FinSet, Value};
use crate::{Error, Limits, Result};

/// A binary relation `pairs ⊆ dom × cod`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Relation {
    dom: FinSet,
    cod: FinSet,
    pairs: BTreeSet<(Value, Value)>,
}

impl Relation {
    pub fn new(
        dom: FinSet,
        cod: FinSet,
        pairs: impl IntoIterator<Item = (Value, Value)>,
    ) -> Result<Self> {
        let pairs: BTreeSet<(Value, Value)> = pairs.into_iter().collect();
        for (a, b) in &pairs {
            if !dom.contains(a) {
                return Err(Error::CarrierMismatch(format!(
                    "{a} is not in the domain {dom}"
                )));
            }
            if !cod.contains(b) {
                return Err(Error::CarrierMismatch(format!(
                    "{b} is not in the codomain {cod}"
                )));
            }
        }
        Ok(Relation { dom, cod, pairs })
    }

    pub fn empty(dom: FinSet, cod: FinSet) -> Self {
        Relation {
            dom,
            cod,
            pairs: BTreeSet::new(),
        }
    }

    pub fn full(dom: FinSet, cod: FinSet) -> Self {
        let pairs = dom
            .iter()
            .flat_map(|a| cod.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        Relation { dom, cod, pairs }
    }

    pub fn identity(carrier: &FinSet) -> Self {
        Relation {
            dom: carrier.clone(),
            cod: carrier.clone(),
            pairs: carrier.iter().map(|x| (x.clone(), x.clone())).collect(),
        }
    }

    /// The graph of a map as a relation.
    pub fn graph_of(f: &FinMap) -> Self {
        Relation {
            dom: f.dom().clone(),
            cod: f.cod().clone(),
            pairs: f.iter().map(|(x, y)| (x.clone(), y.clone())).collect(),
        }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &Value, b: &Value) -> bool {
        self.pairs.contains(&(a.clone(), b.clone()))
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(Value, Value)> {
        self.pairs.iter()
    }

    pub fn insert(&mut self, a: Value, b: Value) -> Result<()> {
        if !self.dom.contains(&a) || !self.cod.contains(&b) {
            return Err(Error::CarrierMismatch(format!(
                "pair ({a},{b}) is outside {} × {}",
                self.dom, self.cod
            )));
        }
        self.pairs.insert((a, b));
        Ok(())
    }

    pub fn remove(&mut self, a: &Value, b: &Value) {
        self.pairs.remove(&(a.clone(), b.clone()));
    }

    /// `{(x,z) | ∃y: xRy and ySz}`.
    pub fn compose(&self, other: &Relation) -> Result<Relation> {
        if self.cod != other.dom {
            return Err(Error::CarrierMismatch(
                "relation composition: codomain and domain differ".into(),
            ));
        }
        let mut pairs = BTreeSet::new();
        for (a, b) in &self.pairs {
            for (b2, c) in &other.pairs {
                if b == b2 {
                    pairs.insert((a.clone(), c.clone()));
                }
            }
        }
        Ok(Relation {
            dom: self.dom.clone(),
            cod: other.cod.clone(),
            pairs,
        })
    }

    /// `{(y,x) | xRy}`.
    pub fn converse(&self) -> Relation {
        Relation {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// `R[A] = {v | ∃u ∈ A: uRv}`; requires `A ⊆ dom`.
    pub fn image(&self, a: &FinSet) -> Result<FinSet> {
        if !a.is_subset(&self.dom) {
            return Err(Error::CarrierMismatch(format!(
                "image argument {a} is not a subset of the domain {}",
                self.dom
            )));
        }
        Ok(self
            .pairs
            .iter()
            .filter(|(u, _)| a.contains(u))
            .map(|(_, v)| v.clone())
            .collect())
    }

    pub fn is_subrelation(&self, other: &Relation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Union on equal carriers.
    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.check_same_carriers(other)?;
        Ok(Relation {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            pairs: self.pairs.union(&other.pairs).cloned().collect(),
        })
    }

    /// Intersection on equal carriers.
    pub fn intersection(&self, other: &Relation) -> Result<Relation> {
        self.check_same_carriers(other)?;
        Ok(Relation {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            pairs: self.pairs.intersection(&other.pairs).cloned().collect(),
        })
    }

    fn check_same_carriers(&self, other: &Relation) -> Result<()> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(Error::CarrierMismatch(
                "relations live on different carriers".into(),
            ));
        }
        Ok(())
    }

    /// Uniform random relation between the given carriers.
    pub fn random(rng: &mut impl Rng, dom: &FinSet, cod: &FinSet) -> Relation {
        let pairs = dom
            .iter()
            .flat_map(|a| cod.iter().map(move |b| (a.clone(), b.clone())))
            .filter(|_| rng.random::<bool>())
            .collect();
        Relation {
            dom: dom.clone(),
            cod: cod.clone(),
            pairs,
        }
    }

    /// Random subset of this relation, on the same carriers.
    pub fn random_subrelation(&self, rng: &mut impl Rng) -> Relation {
        Relation {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            pairs: self
                .pairs
                .iter()
                .filter(|_| rng.random::<bool>())
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({a},{b})")?;
        }
        write!(f, "}}")
    }
}

/// The membership relation `∈ ⊆ X × P(X)`.
pub fn membership_relation(x: &FinSet, limits: Limits) -> Result<Relation> {
    let subsets = x.subsets(limits)?;
    let cod: FinSet = subsets.iter().map(|s| s.to_value()).collect();
    let mut pairs = BTreeSet::new();
    for s in &subsets {
        for e in s.iter() {
            pairs.insert((e.clone(), s.to_value()));
        }
    }
    Ok(Relation {
        dom: x.clone(),
        cod,
        pairs,
    })
}

/// The subsethood relation `⊆` on `P(X)`.
pub fn subset_relation(x: &FinSet, limits: Limits) -> Result<Relation> {
    let subsets = x.subsets(limits)?;
    let carrier: FinSet = subsets.iter().map(|s| s.to_value()).collect();
    let mut pairs = BTreeSet::new();
    for a in &subsets {
        for b in &subsets {
            if a.is_subset(b) {
                pairs.insert((a.to_value(), b.to_value()));
            }
        }
    }
    Ok(Relation {
        dom: carrier.clone(),
        cod: carrier,
        pairs,
    })
}

/// Forward arrow lifting: `A → B` iff `R[A] ⊆ B`, over all subsets of the
/// carriers (the clopens of finite discrete spaces).
pub fn forward_lift(rel: &Relation, limits: Limits) -> Result<Relation> {
    arrow_lift(rel, limits, |r, a, b| {
        r.image(a).map(|img| img.is_subset(b))
    })
}

/// Backward arrow lifting: `A ← B` iff `R†[B] ⊆ A`.
pub fn backward_lift(rel: &Relation, limits: Limits) -> Result<Relation> {
    let conv = rel.converse();
    arrow_lift(rel, limits, move |_, a, b| {
        conv.image(b).map(|img| img.is_subset(a))
    })
}

fn arrow_lift(
    rel: &Relation,
    limits: Limits,
    holds: impl Fn(&Relation, &FinSet, &FinSet) -> Result<bool>,
) -> Result<Relation> {
    let dom_subs = rel.dom.subsets(limits)?;
    let cod_subs = rel.cod.subsets(limits)?;
    limits.check(
        (dom_subs.len() as u128) * (cod_subs.len() as u128),
        || "arrow lifting over all pairs of subsets".to_string(),
    )?;
    let mut pairs = BTreeSet::new();
    for a in &dom_subs {
        for b in &cod_subs {
            if holds(rel, a, b)? {
                pairs.insert((a.to_value(), b.to_value()));
            }
        }
    }
    Ok(Relation {
        dom: dom_subs.iter().map(|s| s.to_value()).collect(),
        cod: cod_subs.iter().map(|s| s.to_value()).collect(),
        pairs,
    })
}

/// A family of clopen subsets of a finite base. On a discrete space this is
/// the full powerset; on quotient or approximation carriers it is any
/// family closed under complement and binary union (hence intersection).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenFamily {
    pub base: FinSet,
    pub members: BTreeSet<FinSet>,
}

impl ClopenFamily {
    /// All subsets of the base.
    pub fn discrete(base: &FinSet, limits: Limits) -> Result<Self> {
        let members = base.subsets(limits)?.into_iter().collect();
        Ok(ClopenFamily {
            base: base.clone(),
            members,
        })
    }

    pub fn is_boolean_closed(&self) -> bool {
        for a in &self.members {
            if !self.members.contains(&a.complement_in(&self.base)) {
                return false;
            }
            for b in &self.members {
                if !self.members.contains(&a.union(b)) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_set, parse_value};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fs(src: &str) -> FinSet {
        parse_set(src).unwrap()
    }

    fn v(src: &str) -> Value {
        parse_value(src).unwrap()
    }

    fn rel(dom: &str, cod: &str, pairs: &[(&str, &str)]) -> Relation {
        Relation::new(fs(dom), fs(cod), pairs.iter().map(|(a, b)| (v(a), v(b)))).unwrap()
    }

    #[test]
    fn image_compose_converse() {
        let r = rel("{a}", "{1}", &[("a", "1")]);
        assert_eq!(r.image(&fs("{a}")).unwrap(), fs("{1}"));
        let s = rel("{1}", "{p}", &[("1", "p")]);
        let rs = r.compose(&s).unwrap();
        assert!(rs.contains(&v("a"), &v("p")));
        assert_eq!(rs.len(), 1);
    }

    #[test]
    fn converse_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let dom = fs("{a,b,c,d}");
            let cod = fs("{1,2,3}");
            let r = Relation::random(&mut rng, &dom, &cod);
            assert_eq!(r.converse().converse(), r);
        }
    }

    #[test]
    fn carrier_checks() {
        let r = rel("{a}", "{1}", &[]);
        assert!(r.image(&fs("{z}")).is_err());
        let s = rel("{2}", "{p}", &[]);
        assert!(r.compose(&s).is_err());
        assert!(Relation::new(fs("{a}"), fs("{1}"), [(v("b"), v("1"))]).is_err());
    }

    #[test]
    fn forward_lift_of_empty_relation_is_total() {
        let r = rel("{a,b}", "{1}", &[]);
        let fwd = forward_lift(&r, Limits::default()).unwrap();
        assert_eq!(fwd.len(), fwd.dom().len() * fwd.cod().len());
    }

    #[test]
    fn forward_lift_of_identity_is_subsethood() {
        let x = fs("{a,b}");
        let fwd = forward_lift(&Relation::identity(&x), Limits::default()).unwrap();
        assert_eq!(fwd, subset_relation(&x, Limits::default()).unwrap());
    }

    #[test]
    fn forward_lift_spot_checks() {
        let r = rel("{a,b}", "{1}", &[("a", "1")]);
        let fwd = forward_lift(&r, Limits::default()).unwrap();
        assert!(fwd.contains(&v("{a,b}"), &v("{1}")));
        assert!(!fwd.contains(&v("{a}"), &v("{}")));
    }

    #[test]
    fn backward_lift_of_identity_is_reverse_subsethood() {
        let x = fs("{a,b}");
        let bwd = backward_lift(&Relation::identity(&x), Limits::default()).unwrap();
        let subs = subset_relation(&x, Limits::default()).unwrap();
        assert_eq!(bwd, subs.converse());
    }

    #[test]
    fn arrow_liftings_are_antitone_and_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let dom = fs("{a,b,c}");
            let cod = fs("{1,2}");
            let s = Relation::random(&mut rng, &dom, &cod);
            let r = s.random_subrelation(&mut rng);
            let fr = forward_lift(&r, Limits::default()).unwrap();
            let fsl = forward_lift(&s, Limits::default()).unwrap();
            assert!(fsl.is_subrelation(&fr), "forward lifting not antitone");
            let br = backward_lift(&r, Limits::default()).unwrap();
            let bs = backward_lift(&s, Limits::default()).unwrap();
            assert!(bs.is_subrelation(&br), "backward lifting not antitone");

            // Definitional duality.
            let fwd_conv = forward_lift(&r.converse(), Limits::default()).unwrap();
            assert_eq!(fwd_conv, br.converse());
        }
    }

    #[test]
    fn key_inclusion_for_transfer() {
        // R† ; ∈_X ; →R ⊆ ∈_Y, enumerated on small carriers.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let x = fs("{a,b,c}");
            let y = fs("{1,2}");
            let r = Relation::random(&mut rng, &x, &y);
            let mem_x = membership_relation(&x, Limits::default()).unwrap();
            let mem_y = membership_relation(&y, Limits::default()).unwrap();
            let fwd = forward_lift(&r, Limits::default()).unwrap();
            let chain = r
                .converse()
                .compose(&mem_x)
                .unwrap()
                .compose(&fwd)
                .unwrap();
            assert!(chain.is_subrelation(&mem_y));
        }
    }

    #[test]
    fn discrete_clopen_family_is_boolean_closed() {
        let fam = ClopenFamily::discrete(&fs("{a,b}"), Limits::default()).unwrap();
        assert_eq!(fam.members.len(), 4);
        assert!(fam.is_boolean_closed());
        let partial = ClopenFamily {
            base: fs("{a,b}"),
            members: [fs("{}"), fs("{a}")].into_iter().collect(),
        };
        assert!(!partial.is_boolean_closed());
    }
}
