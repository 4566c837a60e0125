//! Finite coalgebras: morphism checking, Barr bisimulations with their
//! greatest fixed point, behavioural equivalence via the terminal sequence,
//! and the companion construction into finite Stone coalgebras.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::IndexedRandom;
use rand::Rng;

use crate::functor::{
    apply_map, barr_relates, check_well_formed, enumerate_values, FunctorExpr,
};
use crate::nabla::generated_clopen_algebra;
use crate::relation::Relation;
use crate::stone::StoneCoalgebra;
use crate::value::{FinMap, FinSet, Value};
use crate::{Error, Limits, Result};

/// A finite coalgebra: a carrier and a total structure map into functor
/// values over the carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinCoalgebra {
    functor: FunctorExpr,
    carrier: FinSet,
    structure: BTreeMap<Value, Value>,
}

impl FinCoalgebra {
    pub fn new(
        functor: FunctorExpr,
        carrier: FinSet,
        structure: BTreeMap<Value, Value>,
    ) -> Result<Self> {
        for x in carrier.iter() {
            let t = structure.get(x).ok_or_else(|| {
                Error::CarrierMismatch(format!("no structure value for state {x}"))
            })?;
            check_well_formed(&functor, &carrier, t)?;
        }
        for x in structure.keys() {
            if !carrier.contains(x) {
                return Err(Error::CarrierMismatch(format!(
                    "structure defined on {x} outside the carrier"
                )));
            }
        }
        Ok(FinCoalgebra {
            functor,
            carrier,
            structure,
        })
    }

    pub fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn structure(&self, x: &Value) -> Result<&Value> {
        self.structure
            .get(x)
            .ok_or_else(|| Error::CarrierMismatch(format!("{x} is not a state")))
    }

    pub fn states(&self) -> impl Iterator<Item = (&Value, &Value)> {
        self.structure.iter()
    }

    /// Uniform random coalgebra over the given carrier.
    pub fn random(
        rng: &mut impl Rng,
        functor: &FunctorExpr,
        carrier: &FinSet,
        limits: Limits,
    ) -> Result<Self> {
        let values = enumerate_values(functor, carrier, limits)?;
        if values.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{functor} has no values over {carrier}; no structure map exists"
            )));
        }
        let structure = carrier
            .iter()
            .map(|x| (x.clone(), values.choose(rng).expect("nonempty").clone()))
            .collect();
        FinCoalgebra::new(functor.clone(), carrier.clone(), structure)
    }

    /// Every coalgebra over the given carrier, in canonical order. Small
    /// carriers only; the count is |T X| ^ |X|.
    pub fn enumerate_all(
        functor: &FunctorExpr,
        carrier: &FinSet,
        limits: Limits,
    ) -> Result<Vec<FinCoalgebra>> {
        let values = enumerate_values(functor, carrier, limits)?;
        let n = carrier.len() as u32;
        limits.check((values.len() as u128).saturating_pow(n), || {
            format!("all {functor}-coalgebras over {carrier}")
        })?;
        let states: Vec<&Value> = carrier.iter().collect();
        let mut out = Vec::new();
        let mut choice = vec![0usize; states.len()];
        loop {
            let structure: BTreeMap<Value, Value> = states
                .iter()
                .zip(&choice)
                .map(|(x, &i)| ((*x).clone(), values[i].clone()))
                .collect();
            out.push(FinCoalgebra {
                functor: functor.clone(),
                carrier: carrier.clone(),
                structure,
            });
            // Odometer step.
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return Ok(out);
                }
                choice[k] += 1;
                if choice[k] < values.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    /// Disjoint union, with states tagged left/right.
    pub fn disjoint_union(a: &FinCoalgebra, b: &FinCoalgebra) -> Result<FinCoalgebra> {
        if a.functor != b.functor {
            return Err(Error::CarrierMismatch(
                "disjoint union of coalgebras for different functors".into(),
            ));
        }
        let carrier: FinSet = a
            .carrier
            .iter()
            .map(|x| Value::inl(x.clone()))
            .chain(b.carrier.iter().map(|x| Value::inr(x.clone())))
            .collect();
        let inl = FinMap::from_fn(a.carrier.clone(), carrier.clone(), |x| Value::inl(x.clone()))?;
        let inr = FinMap::from_fn(b.carrier.clone(), carrier.clone(), |x| Value::inr(x.clone()))?;
        let mut structure = BTreeMap::new();
        for (x, t) in a.states() {
            structure.insert(Value::inl(x.clone()), apply_map(&a.functor, &inl, t)?);
        }
        for (x, t) in b.states() {
            structure.insert(Value::inr(x.clone()), apply_map(&b.functor, &inr, t)?);
        }
        FinCoalgebra::new(a.functor.clone(), carrier, structure)
    }
}

/// Verdict of a coalgebra-morphism check, with a witnessing state on
/// failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismVerdict {
    pub holds: bool,
    pub witness: Option<Value>,
}

/// Checks that the structure square commutes at every state of `a`.
pub fn is_coalgebra_morphism(
    f: &FinMap,
    a: &FinCoalgebra,
    b: &FinCoalgebra,
) -> Result<MorphismVerdict> {
    if a.functor != b.functor {
        return Err(Error::CarrierMismatch(
            "coalgebras are for different functors".into(),
        ));
    }
    if f.dom() != a.carrier() || f.cod() != b.carrier() {
        return Err(Error::CarrierMismatch(
            "map carriers do not match the coalgebra carriers".into(),
        ));
    }
    for (x, t) in a.states() {
        let via_structure = b.structure(f.apply(x)?)?;
        let via_map = apply_map(&a.functor, f, t)?;
        if via_structure != &via_map {
            return Ok(MorphismVerdict {
                holds: false,
                witness: Some(x.clone()),
            });
        }
    }
    Ok(MorphismVerdict {
        holds: true,
        witness: None,
    })
}

/// Verdict of a bisimulation check, with a witnessing state pair on
/// failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimVerdict {
    pub holds: bool,
    pub witness: Option<(Value, Value)>,
}

/// Checks that `rel` is a Barr bisimulation: the lifted relation relates
/// the structure values of every related pair.
pub fn is_l_bisimulation(
    rel: &Relation,
    a: &FinCoalgebra,
    b: &FinCoalgebra,
) -> Result<BisimVerdict> {
    check_rel_carriers(rel, a, b)?;
    for (x, y) in rel.pairs() {
        if !barr_relates(&a.functor, rel, a.structure(x)?, b.structure(y)?) {
            return Ok(BisimVerdict {
                holds: false,
                witness: Some((x.clone(), y.clone())),
            });
        }
    }
    Ok(BisimVerdict {
        holds: true,
        witness: None,
    })
}

fn check_rel_carriers(rel: &Relation, a: &FinCoalgebra, b: &FinCoalgebra) -> Result<()> {
    if a.functor != b.functor {
        return Err(Error::CarrierMismatch(
            "coalgebras are for different functors".into(),
        ));
    }
    if rel.dom() != a.carrier() || rel.cod() != b.carrier() {
        return Err(Error::CarrierMismatch(
            "relation carriers do not match the coalgebra carriers".into(),
        ));
    }
    Ok(())
}

/// The largest Barr bisimulation between `a` and `b`: the greatest fixed
/// point of one-step refinement, starting from the full relation.
pub fn greatest_l_bisimulation(a: &FinCoalgebra, b: &FinCoalgebra) -> Result<Relation> {
    if a.functor() != b.functor() {
        return Err(Error::CarrierMismatch(
            "coalgebras are for different functors".into(),
        ));
    }
    let mut rel = Relation::full(a.carrier().clone(), b.carrier().clone());
    loop {
        let violating: Vec<(Value, Value)> = rel
            .pairs()
            .filter(|(x, y)| {
                let ax = a.structure(x).expect("state");
                let by = b.structure(y).expect("state");
                !barr_relates(&a.functor, &rel, ax, by)
            })
            .cloned()
            .collect();
        if violating.is_empty() {
            return Ok(rel);
        }
        for (x, y) in &violating {
            rel.remove(x, y);
        }
    }
}

/// One stage of the terminal-sequence approximation: the reachable stage
/// carrier, the behaviour map into it, and the connecting map down to the
/// previous stage.
#[derive(Debug, Clone)]
pub struct Stage {
    pub carrier: FinSet,
    pub beh: FinMap,
    /// Connecting map from this stage onto the previous one; `None` at
    /// stage 0.
    pub connecting: Option<FinMap>,
}

/// The behaviour maps of the terminal sequence, corestricted to their
/// images, tabulated until the induced kernel partition stops changing.
#[derive(Debug, Clone)]
pub struct BehaviourTower {
    pub stages: Vec<Stage>,
    /// First stage whose kernel equals the next stage's kernel.
    pub stabilized_at: usize,
}

impl BehaviourTower {
    /// The partition of the carrier at the stabilised stage.
    pub fn final_partition(&self) -> BTreeSet<FinSet> {
        self.stages[self.stabilized_at].beh.kernel_partition()
    }
}

/// Runs the terminal-sequence approximation for a single coalgebra.
///
/// Stage 0 is a one-point carrier; stage `n+1` is the image of the
/// structure map followed by the functorial action of the stage-`n`
/// behaviour map. Stages are kept as reachable images, which leaves the
/// kernels (and hence equivalence verdicts) unchanged while bounding
/// growth by the carrier size.
pub fn behaviour_tower(a: &FinCoalgebra) -> Result<BehaviourTower> {
    let point = Value::atom("*");
    let mut stages = vec![Stage {
        carrier: FinSet::singleton(point.clone()),
        beh: FinMap::constant(a.carrier().clone(), point),
        connecting: None,
    }];
    loop {
        let prev = stages.last().expect("stage 0 exists");
        let mut images: BTreeMap<Value, Value> = BTreeMap::new();
        for (x, t) in a.states() {
            images.insert(x.clone(), apply_map(&a.functor, &prev.beh, t)?);
        }
        let carrier: FinSet = images.values().cloned().collect();
        let beh = FinMap::new(a.carrier().clone(), carrier.clone(), images)?;
        // The connecting map sends the image of a state back to its
        // previous-stage behaviour; well-defined because kernels only
        // refine.
        let mut down: BTreeMap<Value, Value> = BTreeMap::new();
        for x in a.carrier().iter() {
            down.insert(beh.apply(x)?.clone(), prev.beh.apply(x)?.clone());
        }
        let connecting = FinMap::new(carrier.clone(), prev.carrier.clone(), down)?;
        let stabilized = beh.kernel_partition() == prev.beh.kernel_partition();
        stages.push(Stage {
            carrier,
            beh,
            connecting: Some(connecting),
        });
        if stabilized {
            let stabilized_at = stages.len() - 2;
            return Ok(BehaviourTower {
                stages,
                stabilized_at,
            });
        }
    }
}

/// Verdict of a behavioural-equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeqVerdict {
    pub equivalent: bool,
    /// First stage whose behaviour map separates the two states.
    pub separated_at: Option<usize>,
}

/// Decides behavioural equivalence of `u` in `a` and `v` in `b` by running
/// the terminal sequence on the disjoint union until the kernel partition
/// stabilises.
pub fn behaviourally_equivalent(
    a: &FinCoalgebra,
    u: &Value,
    b: &FinCoalgebra,
    v: &Value,
) -> Result<BeqVerdict> {
    if !a.carrier().contains(u) {
        return Err(Error::CarrierMismatch(format!("{u} is not a state of the first coalgebra")));
    }
    if !b.carrier().contains(v) {
        return Err(Error::CarrierMismatch(format!("{v} is not a state of the second coalgebra")));
    }
    let union = FinCoalgebra::disjoint_union(a, b)?;
    let tower = behaviour_tower(&union)?;
    let lu = Value::inl(u.clone());
    let rv = Value::inr(v.clone());
    for (n, stage) in tower.stages.iter().enumerate() {
        if stage.beh.apply(&lu)? != stage.beh.apply(&rv)? {
            return Ok(BeqVerdict {
                equivalent: false,
                separated_at: Some(n),
            });
        }
        if n == tower.stabilized_at {
            break;
        }
    }
    Ok(BeqVerdict {
        equivalent: true,
        separated_at: None,
    })
}

/// The behavioural-equivalence relation between the carriers of `a` and
/// `b`, read off from one terminal-sequence run on the disjoint union.
pub fn behavioural_equivalence_relation(
    a: &FinCoalgebra,
    b: &FinCoalgebra,
) -> Result<Relation> {
    let union = FinCoalgebra::disjoint_union(a, b)?;
    let tower = behaviour_tower(&union)?;
    let beh = &tower.stages[tower.stabilized_at].beh;
    let mut rel = Relation::empty(a.carrier().clone(), b.carrier().clone());
    for u in a.carrier().iter() {
        for v in b.carrier().iter() {
            if beh.apply(&Value::inl(u.clone()))? == beh.apply(&Value::inr(v.clone()))? {
                rel.insert(u.clone(), v.clone())?;
            }
        }
    }
    Ok(rel)
}

/// The companion of a finite coalgebra: same carrier, structure sending a
/// state to the atom of the generated clopen algebra that contains its
/// structure value.
pub fn companion(a: &FinCoalgebra, limits: Limits) -> Result<StoneCoalgebra> {
    let algebra = generated_clopen_algebra(&a.functor, a.carrier(), limits)?;
    let mut structure = BTreeMap::new();
    for (x, t) in a.states() {
        let atom = algebra.atom_of(t).ok_or_else(|| {
            Error::InvariantViolated(format!("structure value {t} missing from the algebra"))
        })?;
        structure.insert(x.clone(), atom);
    }
    StoneCoalgebra::new(a.functor.clone(), a.carrier().clone(), algebra, structure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_coalgebra, parse_set, parse_value};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fs(src: &str) -> FinSet {
        parse_set(src).unwrap()
    }

    fn v(src: &str) -> Value {
        parse_value(src).unwrap()
    }

    fn coalg(src: &str) -> FinCoalgebra {
        parse_coalgebra(src).unwrap()
    }

    fn loop_() -> FinCoalgebra {
        coalg("functor: P\n1 -> {1}")
    }

    fn cycle() -> FinCoalgebra {
        coalg("functor: P\na -> {b}\nb -> {a}")
    }

    fn deadlock() -> FinCoalgebra {
        coalg("functor: P\na -> {}")
    }

    fn rel(a: &FinCoalgebra, b: &FinCoalgebra, pairs: &[(&str, &str)]) -> Relation {
        Relation::new(
            a.carrier().clone(),
            b.carrier().clone(),
            pairs.iter().map(|(x, y)| (v(x), v(y))),
        )
        .unwrap()
    }

    #[test]
    fn identity_is_a_morphism() {
        let a = cycle();
        let id = FinMap::identity(a.carrier());
        assert!(is_coalgebra_morphism(&id, &a, &a).unwrap().holds);
    }

    #[test]
    fn collapsing_into_deadlock_is_not_a_morphism() {
        let a = coalg("functor: P\na -> {a}");
        let b = coalg("functor: P\n1 -> {}");
        let f = FinMap::from_fn(a.carrier().clone(), b.carrier().clone(), |_| v("1")).unwrap();
        let verdict = is_coalgebra_morphism(&f, &a, &b).unwrap();
        assert!(!verdict.holds);
        assert_eq!(verdict.witness, Some(v("a")));
    }

    #[test]
    fn quotient_of_cycle_onto_loop_is_a_morphism() {
        let a = cycle();
        let b = loop_();
        let f = FinMap::from_fn(a.carrier().clone(), b.carrier().clone(), |_| v("1")).unwrap();
        assert!(is_coalgebra_morphism(&f, &a, &b).unwrap().holds);
    }

    #[test]
    fn empty_relation_is_a_bisimulation() {
        let a = deadlock();
        let b = loop_();
        let r = rel(&a, &b, &[]);
        assert!(is_l_bisimulation(&r, &a, &b).unwrap().holds);
    }

    #[test]
    fn loops_are_bisimilar_deadlock_is_not() {
        let a = coalg("functor: P\na -> {a}");
        let b = loop_();
        assert!(is_l_bisimulation(&rel(&a, &b, &[("a", "1")]), &a, &b)
            .unwrap()
            .holds);

        let d = deadlock();
        let verdict = is_l_bisimulation(&rel(&d, &b, &[("a", "1")]), &d, &b).unwrap();
        assert!(!verdict.holds);
        assert_eq!(verdict.witness, Some((v("a"), v("1"))));
    }

    #[test]
    fn greatest_bisimulation_examples() {
        let a = coalg("functor: P\na -> {a}");
        assert_eq!(
            greatest_l_bisimulation(&a, &a).unwrap(),
            Relation::identity(a.carrier())
        );

        let c = cycle();
        let l = loop_();
        assert_eq!(
            greatest_l_bisimulation(&c, &l).unwrap(),
            Relation::full(c.carrier().clone(), l.carrier().clone())
        );

        let d = deadlock();
        assert!(greatest_l_bisimulation(&d, &l).unwrap().is_empty());
    }

    #[test]
    fn stage_zero_identifies_everything() {
        let a = FinCoalgebra::disjoint_union(&deadlock(), &loop_()).unwrap();
        let tower = behaviour_tower(&a).unwrap();
        assert_eq!(tower.stages[0].carrier.len(), 1);
        assert_eq!(tower.stages[0].beh.kernel_partition().len(), 1);
    }

    #[test]
    fn cycle_state_is_equivalent_to_loop_state() {
        let verdict = behaviourally_equivalent(&cycle(), &v("a"), &loop_(), &v("1")).unwrap();
        assert!(verdict.equivalent);
    }

    #[test]
    fn deadlock_separates_from_loop_at_stage_one() {
        let verdict = behaviourally_equivalent(&deadlock(), &v("a"), &loop_(), &v("1")).unwrap();
        assert!(!verdict.equivalent);
        assert_eq!(verdict.separated_at, Some(1));
    }

    #[test]
    fn kernel_chain_refines_and_connecting_maps_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let carrier = FinSet::atoms((0..rng.random_range(1..=4usize)).map(|i| format!("s{i}")));
            let a = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &carrier, Limits::default())
                .unwrap();
            let tower = behaviour_tower(&a).unwrap();
            for w in tower.stages.windows(2) {
                let coarse = w[0].beh.kernel_partition();
                let fine = w[1].beh.kernel_partition();
                // Every finer class is inside a coarser class.
                for c in &fine {
                    assert!(coarse.iter().any(|d| c.is_subset(d)));
                }
                // h ∘ beh_{n+1} = beh_n.
                let connected = w[1].beh.then(w[1].connecting.as_ref().unwrap()).unwrap();
                assert_eq!(&connected, &w[0].beh);
            }
        }
    }

    #[test]
    fn morphism_graphs_are_bisimulations() {
        let c = cycle();
        let l = loop_();
        let f = FinMap::from_fn(c.carrier().clone(), l.carrier().clone(), |_| v("1")).unwrap();
        assert!(is_coalgebra_morphism(&f, &c, &l).unwrap().holds);
        let graph = Relation::graph_of(&f);
        assert!(is_l_bisimulation(&graph, &c, &l).unwrap().holds);
    }

    #[test]
    fn greatest_bisimulation_matches_behavioural_equivalence_exhaustively() {
        // All powerset coalgebra pairs on carriers of size <= 2.
        let mut corpus = Vec::new();
        for names in [vec!["x0"], vec!["x0", "x1"]] {
            let carrier = FinSet::atoms(names);
            corpus.extend(
                FinCoalgebra::enumerate_all(&FunctorExpr::Powerset, &carrier, Limits::default())
                    .unwrap(),
            );
        }
        for a in &corpus {
            for b in &corpus {
                let gfp = greatest_l_bisimulation(a, b).unwrap();
                let beq = behavioural_equivalence_relation(a, b).unwrap();
                assert_eq!(gfp, beq, "mismatch for {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn greatest_bisimulation_matches_behavioural_equivalence_randomly_to_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..40 {
            let na = rng.random_range(1..=5usize);
            let nb = rng.random_range(1..=5usize);
            let ca = FinSet::atoms((0..na).map(|i| format!("a{i}")));
            let cb = FinSet::atoms((0..nb).map(|i| format!("b{i}")));
            let a = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &ca, Limits::default())
                .unwrap();
            let b = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &cb, Limits::default())
                .unwrap();
            let gfp = greatest_l_bisimulation(&a, &b).unwrap();
            let beq = behavioural_equivalence_relation(&a, &b).unwrap();
            assert_eq!(gfp, beq);
        }
    }

    // Exhaustive over all powerset coalgebra pairs with carriers up to 3
    // (280900 pairs, around fifteen seconds in the test profile).
    #[test]
    fn greatest_bisimulation_matches_behavioural_equivalence_exhaustive_three() {
        let mut corpus = Vec::new();
        for n in 1..=3usize {
            let carrier = FinSet::atoms((0..n).map(|i| format!("x{i}")));
            corpus.extend(
                FinCoalgebra::enumerate_all(&FunctorExpr::Powerset, &carrier, Limits::default())
                    .unwrap(),
            );
        }
        for a in &corpus {
            for b in &corpus {
                let gfp = greatest_l_bisimulation(a, b).unwrap();
                let beq = behavioural_equivalence_relation(a, b).unwrap();
                assert_eq!(gfp, beq);
            }
        }
    }

    #[test]
    fn companion_atoms_examples() {
        let a = coalg("functor: P\na -> {a,b}\nb -> {}");
        let hat = companion(&a, Limits::default()).unwrap();
        let atom = &hat.algebra().atoms()[*hat.structure_atom(&v("a")).unwrap()];
        assert_eq!(atom, &fs("{{a,b}}"));

        let c = coalg("functor: Const{c}\ns -> c\nt -> c");
        let hat = companion(&c, Limits::default()).unwrap();
        assert_eq!(hat.algebra().atoms().len(), 1);
        assert_eq!(
            hat.structure_atom(&v("s")).unwrap(),
            hat.structure_atom(&v("t")).unwrap()
        );

        let i = coalg("functor: Id\na -> b\nb -> b");
        let hat = companion(&i, Limits::default()).unwrap();
        let atom = &hat.algebra().atoms()[*hat.structure_atom(&v("a")).unwrap()];
        assert_eq!(atom, &fs("{b}"));
    }

    #[test]
    fn companion_satisfies_defining_membership_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let carrier = FinSet::atoms((0..rng.random_range(1..=3usize)).map(|i| format!("s{i}")));
            let a = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &carrier, Limits::default())
                .unwrap();
            let hat = companion(&a, Limits::default()).unwrap();
            for g in hat.algebra().generators() {
                for (x, t) in a.states() {
                    let atom = &hat.algebra().atoms()[*hat.structure_atom(x).unwrap()];
                    assert_eq!(atom.is_subset(g), g.contains(t));
                }
            }
        }
    }
}
