//! The nabla modality and the clopen algebra it generates.
//!
//! A formula over a carrier `X` is a functor value over `P(X)`; its
//! semantics is the set of functor values over `X` that the Barr lifting of
//! membership relates to it. The subalgebra of `P(T X)` generated by all
//! such semantic sets is represented by its atoms, which are the points of
//! the finite Stone dual.

use std::collections::BTreeSet;

use crate::functor::{
    barr_relates_by, check_well_formed_with, enumerate_values, lift_matrix, BitMat, FunctorExpr,
    Indexed,
};
use crate::value::{FinSet, Value};
use crate::{Error, Limits, Result};

/// A modal formula: a functor value over the subsets of `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NablaFormula {
    functor: FunctorExpr,
    base: FinSet,
    body: Value,
}

impl NablaFormula {
    pub fn new(functor: FunctorExpr, base: FinSet, body: Value) -> Result<Self> {
        let member = |v: &Value| match v {
            Value::Set(items) => {
                for e in items {
                    if !base.contains(e) {
                        return Err(Error::MalformedValue(format!(
                            "{e} is not in the base carrier {base}"
                        )));
                    }
                }
                Ok(())
            }
            other => Err(Error::MalformedValue(format!(
                "formula base elements must be subsets, found {other}"
            ))),
        };
        check_well_formed_with(&functor, &member, &body)?;
        Ok(NablaFormula {
            functor,
            base,
            body,
        })
    }

    pub fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    pub fn base(&self) -> &FinSet {
        &self.base
    }

    pub fn body(&self) -> &Value {
        &self.body
    }
}

/// Evaluates a formula: the set of functor values over the base that the
/// lifted membership relation relates to the body.
pub fn eval_nabla(formula: &NablaFormula, limits: Limits) -> Result<FinSet> {
    let values = enumerate_values(&formula.functor, &formula.base, limits)?;
    let mem = |x: &Value, s: &Value| match s.as_set() {
        Some(items) => items.contains(x),
        None => false,
    };
    Ok(values
        .into_iter()
        .filter(|alpha| barr_relates_by(&formula.functor, &mem, alpha, &formula.body))
        .collect())
}

/// `◇Z` over the powerset functor: all subsets of `x` that meet `z`.
/// Computed as the nabla semantics of `{Z, X}`.
pub fn diamond(x: &FinSet, z: &FinSet, limits: Limits) -> Result<FinSet> {
    check_subset(x, z)?;
    let body = Value::set([z.to_value(), x.to_value()]);
    let formula = NablaFormula::new(FunctorExpr::Powerset, x.clone(), body)?;
    eval_nabla(&formula, limits)
}

/// `□Z` over the powerset functor: all subsets of `z`. Computed as the
/// union of the nabla semantics of `{Z}` and of the empty formula.
pub fn box_(x: &FinSet, z: &FinSet, limits: Limits) -> Result<FinSet> {
    check_subset(x, z)?;
    let singleton = NablaFormula::new(
        FunctorExpr::Powerset,
        x.clone(),
        Value::set([z.to_value()]),
    )?;
    let empty = NablaFormula::new(FunctorExpr::Powerset, x.clone(), Value::set([]))?;
    Ok(eval_nabla(&singleton, limits)?.union(&eval_nabla(&empty, limits)?))
}

fn check_subset(x: &FinSet, z: &FinSet) -> Result<()> {
    if z.is_subset(x) {
        Ok(())
    } else {
        Err(Error::CarrierMismatch(format!("{z} is not a subset of {x}")))
    }
}

/// A finite Boolean subalgebra of the powerset of `universe`, presented by
/// generators and atoms. Elements are materialised only on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenAlgebra {
    universe: FinSet,
    generators: BTreeSet<FinSet>,
    atoms: Vec<FinSet>,
}

impl ClopenAlgebra {
    pub fn new(universe: FinSet, generators: BTreeSet<FinSet>) -> Result<Self> {
        for g in &generators {
            if !g.is_subset(&universe) {
                return Err(Error::CarrierMismatch(format!(
                    "generator {g} is not a subset of the universe"
                )));
            }
        }
        // Atoms are the classes of "member of exactly the same generators".
        let mut classes: std::collections::BTreeMap<Vec<bool>, FinSet> =
            std::collections::BTreeMap::new();
        for t in universe.iter() {
            let signature: Vec<bool> = generators.iter().map(|g| g.contains(t)).collect();
            classes.entry(signature).or_default().insert(t.clone());
        }
        let mut atoms: Vec<FinSet> = classes.into_values().collect();
        atoms.sort();
        Ok(ClopenAlgebra {
            universe,
            generators,
            atoms,
        })
    }

    pub fn universe(&self) -> &FinSet {
        &self.universe
    }

    pub fn generators(&self) -> &BTreeSet<FinSet> {
        &self.generators
    }

    pub fn atoms(&self) -> &[FinSet] {
        &self.atoms
    }

    /// Index of the atom containing `t`, if `t` is in the universe.
    pub fn atom_of(&self, t: &Value) -> Option<usize> {
        self.atoms.iter().position(|a| a.contains(t))
    }

    /// Materialises the full element set: all unions of atoms.
    pub fn elements(&self, limits: Limits) -> Result<BTreeSet<FinSet>> {
        let n = self.atoms.len() as u32;
        let count = if n >= 128 { u128::MAX } else { 1u128 << n };
        limits.check(count, || format!("Boolean closure over {n} atoms"))?;
        let mut out = BTreeSet::new();
        for mask in 0u128..(1u128 << n) {
            let mut e = FinSet::new();
            for (i, atom) in self.atoms.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    e = e.union(atom);
                }
            }
            out.insert(e);
        }
        Ok(out)
    }

    /// True when every element of the universe lies in exactly one atom.
    pub fn atoms_partition_universe(&self) -> bool {
        let mut seen = FinSet::new();
        for a in &self.atoms {
            for t in a.iter() {
                if !seen.insert(t.clone()) {
                    return false;
                }
            }
        }
        seen == self.universe
    }
}

/// The subalgebra of `P(T X)` generated by the semantics of every formula,
/// with atoms computed by the same-generators equivalence.
pub fn generated_clopen_algebra(
    functor: &FunctorExpr,
    x: &FinSet,
    limits: Limits,
) -> Result<ClopenAlgebra> {
    let (universe, generators) = nabla_image(functor, x, limits)?;
    ClopenAlgebra::new(universe, generators)
}

/// Enumerates `T X` and the semantic sets of all formulas over `X` in one
/// batch, via the lifted-membership matrix of `∈ ⊆ X × P(X)`.
fn nabla_image(
    functor: &FunctorExpr,
    x: &FinSet,
    limits: Limits,
) -> Result<(FinSet, BTreeSet<FinSet>)> {
    let subsets = x.subsets(limits)?;
    let base_left = Indexed::from_set(x);
    let base_right = Indexed::new(subsets.iter().map(|s| s.to_value()).collect());
    let mut mem = BitMat::new(base_left.len(), base_right.len());
    for (j, s) in base_right.values().iter().enumerate() {
        let items = s.as_set().expect("subset value");
        for e in items {
            let i = base_left.index_of(e).expect("carrier element");
            mem.set(i, j);
        }
    }
    let layer = lift_matrix(functor, &base_left, &base_right, &mem, limits)?;
    let universe: FinSet = layer.left.values().iter().cloned().collect();
    let mut generators = BTreeSet::new();
    for j in 0..layer.right.len() {
        let gen: FinSet = (0..layer.left.len())
            .filter(|&i| layer.mat.get(i, j))
            .map(|i| layer.left.value(i).clone())
            .collect();
        generators.insert(gen);
    }
    Ok((universe, generators))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_functor, parse_set, parse_value};
    use crate::value::FinMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fs(src: &str) -> FinSet {
        parse_set(src).unwrap()
    }

    fn v(src: &str) -> Value {
        parse_value(src).unwrap()
    }

    fn formula(functor: &str, base: &str, body: &str) -> NablaFormula {
        NablaFormula::new(parse_functor(functor).unwrap(), fs(base), v(body)).unwrap()
    }

    #[test]
    fn eval_singleton_cover() {
        let f = formula("P", "{0,1}", "{{0}}");
        assert_eq!(eval_nabla(&f, Limits::default()).unwrap(), fs("{{0}}"));
    }

    #[test]
    fn eval_empty_formula() {
        for base in ["{0,1}", "{0,1,2}"] {
            let f = formula("P", base, "{}");
            assert_eq!(eval_nabla(&f, Limits::default()).unwrap(), fs("{{}}"));
        }
    }

    #[test]
    fn eval_identity_functor_is_identity() {
        let f = formula("Id", "{0,1}", "{0}");
        assert_eq!(eval_nabla(&f, Limits::default()).unwrap(), fs("{0}"));
    }

    #[test]
    fn diamond_and_box_examples() {
        let x = fs("{0,1}");
        assert_eq!(
            diamond(&x, &fs("{0}"), Limits::default()).unwrap(),
            fs("{{0},{0,1}}")
        );
        assert_eq!(
            box_(&x, &x, Limits::default()).unwrap(),
            fs("{{},{0},{0,1},{1}}")
        );
        assert_eq!(diamond(&x, &FinSet::new(), Limits::default()).unwrap(), FinSet::new());
        assert_eq!(box_(&x, &FinSet::new(), Limits::default()).unwrap(), fs("{{}}"));
    }

    #[test]
    fn diamond_box_match_direct_comprehension() {
        // Oracle: direct comprehension over all subsets.
        for n in 0..=3 {
            let x = FinSet::atoms((0..n).map(|i| i.to_string()));
            let subsets = x.subsets(Limits::default()).unwrap();
            for z in &subsets {
                let dia = diamond(&x, z, Limits::default()).unwrap();
                let expected_dia: FinSet = subsets
                    .iter()
                    .filter(|a| !a.intersection(z).is_empty())
                    .map(|a| a.to_value())
                    .collect();
                assert_eq!(dia, expected_dia, "diamond mismatch at |X|={n}, Z={z}");

                let bx = box_(&x, z, Limits::default()).unwrap();
                let expected_box: FinSet = subsets
                    .iter()
                    .filter(|a| a.is_subset(z))
                    .map(|a| a.to_value())
                    .collect();
                assert_eq!(bx, expected_box, "box mismatch at |X|={n}, Z={z}");
            }
        }
    }

    #[test]
    fn monotone_lemma_exhaustive_small() {
        // If the lifted subsethood relates two formulas, their semantic
        // sets are ordered by inclusion. Exhaustive for |X| <= 2.
        for n in 0..=2 {
            let x = FinSet::atoms((0..n).map(|i| i.to_string()));
            let px: FinSet = x
                .subsets(Limits::default())
                .unwrap()
                .iter()
                .map(|s| s.to_value())
                .collect();
            let formulas =
                enumerate_values(&FunctorExpr::Powerset, &px, Limits::default()).unwrap();
            let subs = crate::relation::subset_relation(&x, Limits::default()).unwrap();
            for phi in &formulas {
                for psi in &formulas {
                    if crate::functor::barr_relates(&FunctorExpr::Powerset, &subs, phi, psi) {
                        let ephi = eval_nabla(
                            &NablaFormula::new(FunctorExpr::Powerset, x.clone(), phi.clone())
                                .unwrap(),
                            Limits::default(),
                        )
                        .unwrap();
                        let epsi = eval_nabla(
                            &NablaFormula::new(FunctorExpr::Powerset, x.clone(), psi.clone())
                                .unwrap(),
                            Limits::default(),
                        )
                        .unwrap();
                        assert!(ephi.is_subset(&epsi));
                    }
                }
            }
        }
    }

    #[test]
    fn nabla_is_natural() {
        // Q(Tf)(∇φ) = ∇(T(Qf)(φ)) for f : X → Y and φ a formula over Y.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = fs("{a,b}");
        let y = fs("{0,1}");
        let yvals: Vec<Value> = y.iter().cloned().collect();
        for functor in ["P", "Id", "Id * P"] {
            let functor = parse_functor(functor).unwrap();
            for _ in 0..10 {
                let f = FinMap::from_fn(x.clone(), y.clone(), |_| {
                    use rand::prelude::IndexedRandom;
                    yvals.choose(&mut rng).unwrap().clone()
                })
                .unwrap();
                // Preimage map between the subset carriers.
                let px: FinSet = x
                    .subsets(Limits::default())
                    .unwrap()
                    .iter()
                    .map(|s| s.to_value())
                    .collect();
                let py: FinSet = y
                    .subsets(Limits::default())
                    .unwrap()
                    .iter()
                    .map(|s| s.to_value())
                    .collect();
                let preimage = FinMap::from_fn(py.clone(), px.clone(), |s| {
                    let zs = FinSet::from_value(s).unwrap();
                    x.iter()
                        .filter(|e| zs.contains(f.apply(e).unwrap()))
                        .cloned()
                        .collect::<FinSet>()
                        .to_value()
                })
                .unwrap();
                for phi in enumerate_values(&functor, &py, Limits::default()).unwrap() {
                    let lhs: FinSet = {
                        let ephi = eval_nabla(
                            &NablaFormula::new(functor.clone(), y.clone(), phi.clone()).unwrap(),
                            Limits::default(),
                        )
                        .unwrap();
                        enumerate_values(&functor, &x, Limits::default())
                            .unwrap()
                            .into_iter()
                            .filter(|t| {
                                ephi.contains(
                                    &crate::functor::apply_map(&functor, &f, t).unwrap(),
                                )
                            })
                            .collect()
                    };
                    let pulled =
                        crate::functor::apply_map(&functor, &preimage, &phi).unwrap();
                    let rhs = eval_nabla(
                        &NablaFormula::new(functor.clone(), x.clone(), pulled).unwrap(),
                        Limits::default(),
                    )
                    .unwrap();
                    assert_eq!(lhs, rhs, "naturality fails for {functor} at {phi}");
                }
            }
        }
    }

    #[test]
    fn finitary_formulas_are_realized_by_subcarrier_images() {
        // Formulas quantified over all of T(P X) coincide with the images
        // of formulas over finite subcarriers Y of P(X): every formula is
        // realized over the subcarrier of subsets it mentions, and its
        // semantics is unchanged when membership is restricted to Y.
        for functor in [FunctorExpr::Powerset, FunctorExpr::Identity] {
            for n in 0..=2usize {
                let x = FinSet::atoms((0..n).map(|i| i.to_string()));
                let px: FinSet = x
                    .subsets(Limits::default())
                    .unwrap()
                    .iter()
                    .map(|s| s.to_value())
                    .collect();
                let mem = |e: &Value, s: &Value| {
                    s.as_set().map(|items| items.contains(e)).unwrap_or(false)
                };
                for subcarrier in px.subsets(Limits::default()).unwrap() {
                    for phi in enumerate_values(&functor, &subcarrier, Limits::default()).unwrap()
                    {
                        // The image under the inclusion is the formula
                        // itself, well-formed over the full carrier.
                        crate::functor::check_well_formed(&functor, &px, &phi).unwrap();
                        let restricted_mem = |e: &Value, s: &Value| {
                            subcarrier.contains(s) && mem(e, s)
                        };
                        for alpha in
                            enumerate_values(&functor, &x, Limits::default()).unwrap()
                        {
                            assert_eq!(
                                barr_relates_by(&functor, &mem, &alpha, &phi),
                                barr_relates_by(&functor, &restricted_mem, &alpha, &phi),
                                "restricted membership changes the semantics"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn algebra_for_powerset_two_points() {
        let alg =
            generated_clopen_algebra(&FunctorExpr::Powerset, &fs("{0,1}"), Limits::default())
                .unwrap();
        assert_eq!(alg.universe().len(), 4);
        assert_eq!(alg.atoms().len(), 4);
        assert!(alg.atoms().iter().all(|a| a.len() == 1));
        assert!(alg.atoms_partition_universe());
    }

    #[test]
    fn algebra_for_constant_functor() {
        let f = parse_functor("Const{c}").unwrap();
        let alg = generated_clopen_algebra(&f, &fs("{a,b}"), Limits::default()).unwrap();
        assert_eq!(alg.universe(), &fs("{c}"));
        assert_eq!(
            alg.elements(Limits::default()).unwrap(),
            [fs("{}"), fs("{c}")].into_iter().collect()
        );
    }

    #[test]
    fn algebra_for_identity_functor() {
        let alg =
            generated_clopen_algebra(&FunctorExpr::Identity, &fs("{0,1}"), Limits::default())
                .unwrap();
        assert_eq!(alg.atoms(), &[fs("{0}"), fs("{1}")]);
    }

    #[test]
    fn atoms_refine_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for functor in ["P", "Id * P", "Id + Const{c}"] {
            let functor = parse_functor(functor).unwrap();
            for _ in 0..5 {
                let n = rng.random_range(1..=3usize);
                let x = FinSet::atoms((0..n).map(|i| format!("s{i}")));
                let alg = generated_clopen_algebra(&functor, &x, Limits::default()).unwrap();
                assert!(alg.atoms_partition_universe());
                for g in alg.generators() {
                    for atom in alg.atoms() {
                        let inter = atom.intersection(g);
                        assert!(
                            inter.is_empty() || inter == *atom,
                            "atom {atom} splits generator {g}"
                        );
                    }
                }
            }
        }
    }
}
