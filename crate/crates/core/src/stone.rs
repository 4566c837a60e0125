//! Finite Stone coalgebras, neighbourhood bisimulation checking, Vietoris
//! bisimulation for the powerset functor, and the lattice operations on
//! neighbourhood bisimulations.
//!
//! A finite Stone coalgebra keeps, for every state, the atom of the
//! generated clopen algebra that plays the role of the state's ultrafilter.
//! Membership of a semantic set in that ultrafilter is decided by atom
//! containment; for companions this agrees with direct membership of the
//! structure value.
//!
//! The neighbourhood check has two interchangeable routes:
//!
//! - the formula route quantifies over all pairs of formulas related by the
//!   lifted forward/backward arrow liftings, exactly as defined;
//! - the structural route checks the Barr bisimulation condition on the
//!   underlying structure values and, on failure, constructs an explicit
//!   violating formula pair from the failing state pair.
//!
//! On companion semantics the two routes agree: the canonical formula pair
//! built from singletons (`φ` the image of the structure value under
//! `x ↦ {x}`, `ψ` its image under `x ↦ R[{x}]`) is always related by the
//! lifted forward arrow, is always satisfied on the left, and is satisfied
//! on the right exactly when the lifted base relation relates the two
//! structure values. The agreement is asserted by tests on exhaustive small
//! corpora, and lets depth checks on towers scale past the point where the
//! formula spaces are enumerable.

use std::collections::BTreeMap;
use std::fmt;

use crate::coalgebra::{is_l_bisimulation, FinCoalgebra};
use crate::functor::{
    apply_map, barr_relates_by, lift_matrix, BitMat, FunctorExpr, Indexed,
};
use crate::nabla::ClopenAlgebra;
use crate::relation::Relation;
use crate::value::{FinMap, FinSet, Value};
use crate::{Error, Limits, Result};

/// A finite Stone coalgebra: a discrete carrier, the clopen algebra over
/// the functor values, and a structure map into its atoms.
#[derive(Debug, Clone)]
pub struct StoneCoalgebra {
    functor: FunctorExpr,
    carrier: FinSet,
    algebra: ClopenAlgebra,
    structure: BTreeMap<Value, usize>,
}

impl StoneCoalgebra {
    pub fn new(
        functor: FunctorExpr,
        carrier: FinSet,
        algebra: ClopenAlgebra,
        structure: BTreeMap<Value, usize>,
    ) -> Result<Self> {
        if !algebra.atoms_partition_universe() {
            return Err(Error::InvalidInput(
                "algebra atoms do not partition the universe".into(),
            ));
        }
        for x in carrier.iter() {
            match structure.get(x) {
                Some(&i) if i < algebra.atoms().len() => {}
                Some(&i) => {
                    return Err(Error::InvalidInput(format!(
                        "state {x} maps to nonexistent atom index {i}"
                    )))
                }
                None => {
                    return Err(Error::CarrierMismatch(format!(
                        "no structure atom for state {x}"
                    )))
                }
            }
        }
        Ok(StoneCoalgebra {
            functor,
            carrier,
            algebra,
            structure,
        })
    }

    pub fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn algebra(&self) -> &ClopenAlgebra {
        &self.algebra
    }

    pub fn structure_atom(&self, x: &Value) -> Result<&usize> {
        self.structure
            .get(x)
            .ok_or_else(|| Error::CarrierMismatch(format!("{x} is not a state")))
    }

    /// The atom assigned to a state, as a set of functor values.
    pub fn atom_set(&self, x: &Value) -> Result<&FinSet> {
        Ok(&self.algebra.atoms()[*self.structure_atom(x)?])
    }
}

/// Which route decided a neighbourhood check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Full quantification over lifted formula pairs.
    Nabla,
    /// Structural check on the underlying structure values, with formula
    /// witnesses constructed from failing state pairs.
    Barr,
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckMode::Nabla => write!(f, "nabla"),
            CheckMode::Barr => write!(f, "barr"),
        }
    }
}

/// Sizes visited by a neighbourhood check, for guard-proximity reporting.
#[derive(Debug, Clone, Copy, Default)]
pub struct NbisimStats {
    pub t_px: Option<u64>,
    pub t_py: Option<u64>,
    pub lifted_forward: Option<u64>,
    pub lifted_backward: Option<u64>,
}

/// Which clause of the definition a witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Forward => write!(f, "forward"),
            Direction::Backward => write!(f, "backward"),
        }
    }
}

/// A violation of the neighbourhood-bisimulation condition: the formula
/// pair is related by the lifted arrow relation for `direction`, but the
/// membership transfer fails at `(u, v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NbisimWitness {
    pub u: Value,
    pub v: Value,
    pub phi: Value,
    pub psi: Value,
    pub direction: Direction,
}

/// Verdict of a neighbourhood-bisimulation check.
#[derive(Debug, Clone)]
pub struct NbisimVerdict {
    pub holds: bool,
    pub witness: Option<NbisimWitness>,
    pub mode: CheckMode,
    pub stats: NbisimStats,
    pub note: Option<String>,
}

impl NbisimVerdict {
    fn holding(mode: CheckMode, stats: NbisimStats) -> Self {
        NbisimVerdict {
            holds: true,
            witness: None,
            mode,
            stats,
            note: None,
        }
    }

    fn failing(witness: NbisimWitness, mode: CheckMode, stats: NbisimStats) -> Self {
        NbisimVerdict {
            holds: false,
            witness: Some(witness),
            mode,
            stats,
            note: None,
        }
    }
}

/// Per-state formula membership on one side of a check.
struct SideTables {
    states: Indexed,
    subsets: Indexed,
    formulas: Indexed,
    /// For each state (by `states` index): bitset over `formulas` of the
    /// semantic sets its ultrafilter contains.
    member: Vec<Vec<u64>>,
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn bit_get(row: &[u64], i: usize) -> bool {
    row[i / 64] & (1u64 << (i % 64)) != 0
}

fn bit_set(row: &mut [u64], i: usize) {
    row[i / 64] |= 1u64 << (i % 64);
}

/// Builds the side tables for a carrier, deciding membership of each
/// semantic set by a per-state predicate over the functor-value index.
fn side_tables(
    functor: &FunctorExpr,
    carrier: &FinSet,
    limits: Limits,
    member_of: impl Fn(&Value, &Indexed, &BitMat) -> Result<Vec<u64>>,
) -> Result<SideTables> {
    let states = Indexed::from_set(carrier);
    let subsets = Indexed::new(
        carrier
            .subsets(limits)?
            .iter()
            .map(|s| s.to_value())
            .collect(),
    );
    let mut mem = BitMat::new(states.len(), subsets.len());
    for (j, s) in subsets.values().iter().enumerate() {
        for e in s.as_set().expect("subset value") {
            mem.set(states.index_of(e).expect("carrier element"), j);
        }
    }
    // Lifted membership: rows are functor values over the carrier, columns
    // are formulas; a set bit means the value lies in the formula's
    // semantic set.
    let layer = lift_matrix(functor, &states, &subsets, &mem, limits)?;
    let mut member = Vec::with_capacity(states.len());
    for x in states.values() {
        member.push(member_of(x, &layer.left, &layer.mat)?);
    }
    Ok(SideTables {
        states,
        subsets,
        formulas: layer.right,
        member,
    })
}

fn side_tables_for_stone(
    a: &StoneCoalgebra,
    limits: Limits,
) -> Result<SideTables> {
    side_tables(&a.functor, &a.carrier, limits, |x, values, mat| {
        let atom = a.atom_set(x)?;
        let mut row = vec![u64::MAX; words(mat.cols())];
        fixup_tail(&mut row, mat.cols());
        for t in atom.iter() {
            let i = values.index_of(t).ok_or_else(|| {
                Error::InvariantViolated(format!("atom element {t} is not a functor value"))
            })?;
            for (w, m) in row.iter_mut().zip(mat.row(i)) {
                *w &= m;
            }
        }
        Ok(row)
    })
}

fn side_tables_for_fin(a: &FinCoalgebra, limits: Limits) -> Result<SideTables> {
    side_tables(a.functor(), a.carrier(), limits, |x, values, mat| {
        let t = a.structure(x)?;
        let i = values.index_of(t).ok_or_else(|| {
            Error::InvariantViolated(format!("structure value {t} is not enumerated"))
        })?;
        Ok(mat.row(i).to_vec())
    })
}

fn fixup_tail(row: &mut [u64], cols: usize) {
    if cols % 64 != 0 {
        if let Some(last) = row.last_mut() {
            *last &= (1u64 << (cols % 64)) - 1;
        }
    }
}

/// The forward and backward arrow liftings of `rel` as matrices over the
/// subset indices.
fn arrow_base_matrices(
    rel: &Relation,
    x_side: &SideTables,
    y_side: &SideTables,
) -> (BitMat, BitMat) {
    let ny = y_side.states.len();
    // Successor masks per left state, predecessor masks per right state.
    let mut succ = vec![vec![0u64; words(ny)]; x_side.states.len()];
    let nx = x_side.states.len();
    let mut pred = vec![vec![0u64; words(nx)]; ny];
    for (a, b) in rel.pairs() {
        let i = x_side.states.index_of(a).expect("dom element");
        let j = y_side.states.index_of(b).expect("cod element");
        bit_set(&mut succ[i], j);
        bit_set(&mut pred[j], i);
    }
    let member_mask = |side: &SideTables, s: &Value| -> Vec<u64> {
        let mut mask = vec![0u64; words(side.states.len())];
        for e in s.as_set().expect("subset value") {
            bit_set(&mut mask, side.states.index_of(e).expect("carrier element"));
        }
        mask
    };
    let x_masks: Vec<Vec<u64>> = x_side
        .subsets
        .values()
        .iter()
        .map(|s| member_mask(x_side, s))
        .collect();
    let y_masks: Vec<Vec<u64>> = y_side
        .subsets
        .values()
        .iter()
        .map(|s| member_mask(y_side, s))
        .collect();

    let image = |members: &[u64], rows: &[Vec<u64>], out_words: usize| -> Vec<u64> {
        let mut img = vec![0u64; out_words];
        for (i, row) in rows.iter().enumerate() {
            if bit_get(members, i) {
                for (w, r) in img.iter_mut().zip(row) {
                    *w |= r;
                }
            }
        }
        img
    };
    let subset_of = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);

    let mut fwd = BitMat::new(x_side.subsets.len(), y_side.subsets.len());
    let mut bwd = BitMat::new(x_side.subsets.len(), y_side.subsets.len());
    for (ai, amask) in x_masks.iter().enumerate() {
        let a_image = image(amask, &succ, words(ny));
        for (bi, bmask) in y_masks.iter().enumerate() {
            if subset_of(&a_image, bmask) {
                fwd.set(ai, bi);
            }
            let b_preimage = image(bmask, &pred, words(nx));
            if subset_of(&b_preimage, amask) {
                bwd.set(ai, bi);
            }
        }
    }
    (fwd, bwd)
}

/// Scans all lifted formula pairs against the membership tables, returning
/// the lexicographically least witness under the canonical order
/// `(u, v, φ, ψ, direction)`.
fn nbisim_scan(
    functor: &FunctorExpr,
    rel: &Relation,
    x_side: &SideTables,
    y_side: &SideTables,
    limits: Limits,
) -> Result<(Option<NbisimWitness>, NbisimStats)> {
    let (fwd_base, bwd_base) = arrow_base_matrices(rel, x_side, y_side);
    let fwd = lift_matrix(functor, &x_side.subsets, &y_side.subsets, &fwd_base, limits)?;
    let bwd = lift_matrix(functor, &x_side.subsets, &y_side.subsets, &bwd_base, limits)?;
    debug_assert_eq!(fwd.left.len(), x_side.formulas.len());
    debug_assert_eq!(fwd.right.len(), y_side.formulas.len());
    let stats = NbisimStats {
        t_px: Some(x_side.formulas.len() as u64),
        t_py: Some(y_side.formulas.len() as u64),
        lifted_forward: Some(fwd.mat.count_ones()),
        lifted_backward: Some(bwd.mat.count_ones()),
    };

    let nf_y = y_side.formulas.len();
    for (u, v) in rel.pairs() {
        let ui = x_side.states.index_of(u).expect("dom element");
        let vi = y_side.states.index_of(v).expect("cod element");
        let phi_u = &x_side.member[ui];
        let psi_v = &y_side.member[vi];

        // Forward clause: φ satisfied at u, lifted-forward-related to ψ,
        // but ψ not satisfied at v.
        let mut fwd_hit: Option<(usize, usize)> = None;
        for i in 0..x_side.formulas.len() {
            if !bit_get(phi_u, i) {
                continue;
            }
            if let Some(j) = first_and_not(fwd.mat.row(i), psi_v, nf_y) {
                fwd_hit = Some((i, j));
                break;
            }
        }
        // Backward clause: ψ satisfied at v, lifted-backward-related from
        // φ, but φ not satisfied at u.
        let mut bwd_hit: Option<(usize, usize)> = None;
        for i in 0..x_side.formulas.len() {
            if bit_get(phi_u, i) {
                continue;
            }
            if let Some(j) = first_and(bwd.mat.row(i), psi_v, nf_y) {
                bwd_hit = Some((i, j));
                break;
            }
        }
        let hit = match (fwd_hit, bwd_hit) {
            (None, None) => continue,
            (Some(f), None) => (f, Direction::Forward),
            (None, Some(b)) => (b, Direction::Backward),
            (Some(f), Some(b)) => {
                if f <= b {
                    (f, Direction::Forward)
                } else {
                    (b, Direction::Backward)
                }
            }
        };
        let ((i, j), direction) = hit;
        return Ok((
            Some(NbisimWitness {
                u: u.clone(),
                v: v.clone(),
                phi: x_side.formulas.value(i).clone(),
                psi: y_side.formulas.value(j).clone(),
                direction,
            }),
            stats,
        ));
    }
    Ok((None, stats))
}

fn first_and_not(row: &[u64], mask: &[u64], bits: usize) -> Option<usize> {
    first_bit(row.iter().zip(mask).map(|(r, m)| r & !m), bits)
}

fn first_and(row: &[u64], mask: &[u64], bits: usize) -> Option<usize> {
    first_bit(row.iter().zip(mask).map(|(r, m)| r & m), bits)
}

fn first_bit(wordsit: impl Iterator<Item = u64>, bits: usize) -> Option<usize> {
    for (w, word) in wordsit.enumerate() {
        if word != 0 {
            let i = w * 64 + word.trailing_zeros() as usize;
            if i < bits {
                return Some(i);
            }
        }
    }
    None
}

fn check_rel_carriers_stone(
    rel: &Relation,
    a: &StoneCoalgebra,
    b: &StoneCoalgebra,
) -> Result<()> {
    if a.functor != b.functor {
        return Err(Error::CarrierMismatch(
            "coalgebras are for different functors".into(),
        ));
    }
    if rel.dom() != &a.carrier || rel.cod() != &b.carrier {
        return Err(Error::CarrierMismatch(
            "relation carriers do not match the coalgebra carriers".into(),
        ));
    }
    Ok(())
}

/// Checks the neighbourhood-bisimulation condition for `rel`, quantifying
/// over all lifted formula pairs. Membership is decided by atom
/// containment.
pub fn is_neighbourhood_bisimulation(
    rel: &Relation,
    a: &StoneCoalgebra,
    b: &StoneCoalgebra,
    limits: Limits,
) -> Result<NbisimVerdict> {
    check_rel_carriers_stone(rel, a, b)?;
    let x_side = side_tables_for_stone(a, limits)?;
    let y_side = side_tables_for_stone(b, limits)?;
    let (witness, stats) = nbisim_scan(&a.functor, rel, &x_side, &y_side, limits)?;
    Ok(match witness {
        None => NbisimVerdict::holding(CheckMode::Nabla, stats),
        Some(w) => NbisimVerdict::failing(w, CheckMode::Nabla, stats),
    })
}

/// As [`is_neighbourhood_bisimulation`], but on finite coalgebras with
/// membership decided directly by the structure values. This is companion
/// semantics without materialising the companion.
pub fn nbisim_check_direct(
    rel: &Relation,
    a: &FinCoalgebra,
    b: &FinCoalgebra,
    limits: Limits,
) -> Result<NbisimVerdict> {
    if a.functor() != b.functor() {
        return Err(Error::CarrierMismatch(
            "coalgebras are for different functors".into(),
        ));
    }
    let x_side = side_tables_for_fin(a, limits)?;
    let y_side = side_tables_for_fin(b, limits)?;
    let (witness, stats) = nbisim_scan(a.functor(), rel, &x_side, &y_side, limits)?;
    Ok(match witness {
        None => NbisimVerdict::holding(CheckMode::Nabla, stats),
        Some(w) => NbisimVerdict::failing(w, CheckMode::Nabla, stats),
    })
}

/// Structural route: checks the Barr bisimulation condition on the
/// underlying structure values and constructs an explicit formula witness
/// from a failing pair. Agrees with [`nbisim_check_direct`] on companion
/// semantics and scales to carriers whose formula spaces are not
/// enumerable.
pub fn nbisim_check_barr(
    rel: &Relation,
    a: &FinCoalgebra,
    b: &FinCoalgebra,
) -> Result<NbisimVerdict> {
    let verdict = is_l_bisimulation(rel, a, b)?;
    let stats = NbisimStats::default();
    match verdict.witness {
        None => Ok(NbisimVerdict::holding(CheckMode::Barr, stats)),
        Some((u, v)) => {
            let alpha_u = a.structure(&u)?;
            // φ is the structure value seen through x ↦ {x}; ψ through
            // x ↦ R[{x}]. The pair is always related by the lifted forward
            // arrow, and φ always holds at u, so failure of the lifted base
            // relation shows up as a failed transfer to ψ at v.
            let singletons: FinSet = a
                .carrier()
                .iter()
                .map(|x| Value::set([x.clone()]))
                .collect();
            let single = FinMap::from_fn(a.carrier().clone(), singletons, |x| {
                Value::set([x.clone()])
            })?;
            let mut images = FinSet::new();
            for x in a.carrier().iter() {
                images.insert(
                    rel.image(&FinSet::singleton(x.clone()))
                        .expect("carrier element")
                        .to_value(),
                );
            }
            let forward_image = FinMap::from_fn(a.carrier().clone(), images, |x| {
                rel.image(&FinSet::singleton(x.clone()))
                    .expect("carrier element")
                    .to_value()
            })?;
            let phi = apply_map(a.functor(), &single, alpha_u)?;
            let psi = apply_map(a.functor(), &forward_image, alpha_u)?;
            debug_assert!(
                {
                    let mem = |x: &Value, s: &Value| {
                        s.as_set().map(|items| items.contains(x)).unwrap_or(false)
                    };
                    !barr_relates_by(a.functor(), &mem, b.structure(&v)?, &psi)
                },
                "constructed witness must fail on the right"
            );
            Ok(NbisimVerdict::failing(
                NbisimWitness {
                    u,
                    v,
                    phi,
                    psi,
                    direction: Direction::Forward,
                },
                CheckMode::Barr,
                stats,
            ))
        }
    }
}

/// Whether the formula route fits within the guard for the given carriers.
pub fn nabla_route_feasible(
    functor: &FunctorExpr,
    x_size: usize,
    y_size: usize,
    limits: Limits,
) -> bool {
    let fits = |n: usize| -> Option<u128> {
        if n >= 127 {
            return None;
        }
        let subsets = 1u128 << n;
        if subsets > limits.max_values as u128 {
            return None;
        }
        let values = functor.count_values(n as u128);
        let formulas = functor.count_values(subsets);
        if values > limits.max_values as u128 || formulas > limits.max_values as u128 {
            return None;
        }
        if values.saturating_mul(formulas) > limits.max_values as u128 {
            return None;
        }
        Some(formulas)
    };
    match (fits(x_size), fits(y_size)) {
        (Some(fx), Some(fy)) => fx.saturating_mul(fy) <= limits.max_values as u128,
        _ => false,
    }
}

/// One refinement round: removes every pair that violates the condition
/// with respect to the current relation. Returns the surviving relation.
fn refine_once(
    rel: &Relation,
    functor: &FunctorExpr,
    x_side: &SideTables,
    y_side: &SideTables,
    limits: Limits,
) -> Result<Relation> {
    let (fwd_base, bwd_base) = arrow_base_matrices(rel, x_side, y_side);
    let fwd = lift_matrix(functor, &x_side.subsets, &y_side.subsets, &fwd_base, limits)?;
    let bwd = lift_matrix(functor, &x_side.subsets, &y_side.subsets, &bwd_base, limits)?;
    let nf_y = y_side.formulas.len();
    let mut out = Relation::empty(rel.dom().clone(), rel.cod().clone());
    for (u, v) in rel.pairs() {
        let ui = x_side.states.index_of(u).expect("dom element");
        let vi = y_side.states.index_of(v).expect("cod element");
        let phi_u = &x_side.member[ui];
        let psi_v = &y_side.member[vi];
        let violates = (0..x_side.formulas.len()).any(|i| {
            if bit_get(phi_u, i) {
                first_and_not(fwd.mat.row(i), psi_v, nf_y).is_some()
            } else {
                first_and(bwd.mat.row(i), psi_v, nf_y).is_some()
            }
        });
        if !violates {
            out.insert(u.clone(), v.clone())?;
        }
    }
    Ok(out)
}

/// The largest neighbourhood bisimulation between two finite Stone
/// coalgebras: iterated removal of violating pairs from the full relation.
/// Convergence to a relation that actually passes the check is verified,
/// not assumed.
pub fn greatest_neighbourhood_bisimulation(
    a: &StoneCoalgebra,
    b: &StoneCoalgebra,
    limits: Limits,
) -> Result<Relation> {
    let x_side = side_tables_for_stone(a, limits)?;
    let y_side = side_tables_for_stone(b, limits)?;
    let start = Relation::full(a.carrier.clone(), b.carrier.clone());
    let result = gfp(&a.functor, start, &x_side, &y_side, limits)?;
    let verdict = is_neighbourhood_bisimulation(&result, a, b, limits)?;
    if !verdict.holds {
        return Err(Error::InvariantViolated(
            "refinement fixpoint fails the neighbourhood check".into(),
        ));
    }
    Ok(result)
}

fn gfp(
    functor: &FunctorExpr,
    start: Relation,
    x_side: &SideTables,
    y_side: &SideTables,
    limits: Limits,
) -> Result<Relation> {
    let mut rel = start;
    loop {
        let next = refine_once(&rel, functor, x_side, y_side, limits)?;
        if next == rel {
            return Ok(rel);
        }
        rel = next;
    }
}

/// Verdict of a Vietoris bisimulation check.
#[derive(Debug, Clone)]
pub struct VietorisVerdict {
    pub holds: bool,
    pub witness: Option<(Value, Value)>,
    pub note: &'static str,
}

/// A Vietoris bisimulation between powerset coalgebras on finite discrete
/// spaces is exactly a Kripke bisimulation; closedness is automatic.
pub fn is_vietoris_bisimulation(
    rel: &Relation,
    a: &FinCoalgebra,
    b: &FinCoalgebra,
) -> Result<VietorisVerdict> {
    if a.functor() != &FunctorExpr::Powerset || b.functor() != &FunctorExpr::Powerset {
        return Err(Error::InvalidInput(
            "Vietoris bisimulation is defined for powerset coalgebras".into(),
        ));
    }
    let verdict = is_l_bisimulation(rel, a, b)?;
    Ok(VietorisVerdict {
        holds: verdict.holds,
        witness: verdict.witness,
        note: "closedness is automatic on finite discrete carriers",
    })
}

fn validate_members(
    members: &[Relation],
    a: &StoneCoalgebra,
    b: &StoneCoalgebra,
    limits: Limits,
) -> Result<()> {
    for r in members {
        let verdict = is_neighbourhood_bisimulation(r, a, b, limits)?;
        if !verdict.holds {
            return Err(Error::InvalidInput(format!(
                "relation {r} is not a neighbourhood bisimulation"
            )));
        }
    }
    Ok(())
}

/// Join in the lattice of neighbourhood bisimulations: the union of the
/// members (topological closure is the identity on finite discrete
/// spaces). The result is re-checked.
pub fn nbisim_join(
    members: &[Relation],
    a: &StoneCoalgebra,
    b: &StoneCoalgebra,
    limits: Limits,
) -> Result<Relation> {
    validate_members(members, a, b, limits)?;
    let mut join = Relation::empty(a.carrier.clone(), b.carrier.clone());
    for r in members {
        join = join.union(r)?;
    }
    let verdict = is_neighbourhood_bisimulation(&join, a, b, limits)?;
    if !verdict.holds {
        return Err(Error::InvariantViolated(
            "union of neighbourhood bisimulations fails the check".into(),
        ));
    }
    Ok(join)
}

/// Meet in the lattice: the largest neighbourhood bisimulation contained in
/// the intersection of the members, computed by refinement restricted below
/// the intersection. The result is re-checked.
pub fn nbisim_meet(
    members: &[Relation],
    a: &StoneCoalgebra,
    b: &StoneCoalgebra,
    limits: Limits,
) -> Result<Relation> {
    validate_members(members, a, b, limits)?;
    let mut bound = Relation::full(a.carrier.clone(), b.carrier.clone());
    for r in members {
        bound = bound.intersection(r)?;
    }
    let x_side = side_tables_for_stone(a, limits)?;
    let y_side = side_tables_for_stone(b, limits)?;
    let result = gfp(&a.functor, bound, &x_side, &y_side, limits)?;
    let verdict = is_neighbourhood_bisimulation(&result, a, b, limits)?;
    if !verdict.holds {
        return Err(Error::InvariantViolated(
            "meet fixpoint fails the neighbourhood check".into(),
        ));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::{
        behavioural_equivalence_relation, companion, greatest_l_bisimulation,
    };
    use crate::parse::{parse_coalgebra, parse_value};
    use crate::value::FinSet;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(src: &str) -> Value {
        parse_value(src).unwrap()
    }

    fn coalg(src: &str) -> FinCoalgebra {
        parse_coalgebra(src).unwrap()
    }

    fn rel(a: &FinCoalgebra, b: &FinCoalgebra, pairs: &[(&str, &str)]) -> Relation {
        Relation::new(
            a.carrier().clone(),
            b.carrier().clone(),
            pairs.iter().map(|(x, y)| (v(x), v(y))),
        )
        .unwrap()
    }

    fn loop_() -> FinCoalgebra {
        coalg("functor: P\n1 -> {1}")
    }

    fn self_loop_a() -> FinCoalgebra {
        coalg("functor: P\na -> {a}")
    }

    fn deadlock() -> FinCoalgebra {
        coalg("functor: P\na -> {}")
    }

    fn cycle() -> FinCoalgebra {
        coalg("functor: P\na -> {b}\nb -> {a}")
    }

    #[test]
    fn empty_relation_holds() {
        let a = companion(&deadlock(), Limits::default()).unwrap();
        let b = companion(&loop_(), Limits::default()).unwrap();
        let r = Relation::empty(a.carrier().clone(), b.carrier().clone());
        assert!(is_neighbourhood_bisimulation(&r, &a, &b, Limits::default())
            .unwrap()
            .holds);
    }

    #[test]
    fn matching_loops_hold() {
        let a = companion(&self_loop_a(), Limits::default()).unwrap();
        let b = companion(&loop_(), Limits::default()).unwrap();
        let r = rel(&self_loop_a(), &loop_(), &[("a", "1")]);
        let verdict = is_neighbourhood_bisimulation(&r, &a, &b, Limits::default()).unwrap();
        assert!(verdict.holds);
        assert_eq!(verdict.stats.t_px, Some(4));
    }

    #[test]
    fn deadlock_fails_with_empty_formula_witness() {
        let a = companion(&deadlock(), Limits::default()).unwrap();
        let b = companion(&loop_(), Limits::default()).unwrap();
        let r = rel(&deadlock(), &loop_(), &[("a", "1")]);
        let verdict = is_neighbourhood_bisimulation(&r, &a, &b, Limits::default()).unwrap();
        assert!(!verdict.holds);
        let w = verdict.witness.unwrap();
        assert_eq!(
            (w.u, w.v, w.phi, w.psi, w.direction),
            (v("a"), v("1"), v("{}"), v("{}"), Direction::Forward)
        );
    }

    #[test]
    fn greatest_contains_identity_on_shared_coalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let carrier =
                FinSet::atoms((0..rng.random_range(1..=3usize)).map(|i| format!("s{i}")));
            let a = FinCoalgebra::random(
                &mut rng,
                &FunctorExpr::Powerset,
                &carrier,
                Limits::default(),
            )
            .unwrap();
            let hat = companion(&a, Limits::default()).unwrap();
            let greatest =
                greatest_neighbourhood_bisimulation(&hat, &hat, Limits::default()).unwrap();
            assert!(Relation::identity(&carrier).is_subrelation(&greatest));

            let diag = Relation::identity(&carrier);
            assert!(
                is_neighbourhood_bisimulation(&diag, &hat, &hat, Limits::default())
                    .unwrap()
                    .holds
            );
        }
    }

    #[test]
    fn greatest_examples() {
        let c = companion(&cycle(), Limits::default()).unwrap();
        let l = companion(&loop_(), Limits::default()).unwrap();
        let greatest = greatest_neighbourhood_bisimulation(&c, &l, Limits::default()).unwrap();
        assert_eq!(
            greatest,
            Relation::full(cycle().carrier().clone(), loop_().carrier().clone())
        );

        let d = companion(&deadlock(), Limits::default()).unwrap();
        let greatest = greatest_neighbourhood_bisimulation(&d, &l, Limits::default()).unwrap();
        assert!(greatest.is_empty());
    }

    #[test]
    fn vietoris_examples() {
        let a = self_loop_a();
        let b = loop_();
        assert!(is_vietoris_bisimulation(&rel(&a, &b, &[("a", "1")]), &a, &b)
            .unwrap()
            .holds);
        let d = deadlock();
        let verdict =
            is_vietoris_bisimulation(&rel(&d, &b, &[("a", "1")]), &d, &b).unwrap();
        assert!(!verdict.holds);
        assert!(is_vietoris_bisimulation(&rel(&d, &b, &[]), &d, &b).unwrap().holds);
        let i = coalg("functor: Id\na -> a");
        assert!(is_vietoris_bisimulation(&rel(&i, &i, &[]), &i, &i).is_err());
    }

    fn all_relations(a: &FinCoalgebra, b: &FinCoalgebra) -> Vec<Relation> {
        let full: Vec<(Value, Value)> = Relation::full(
            a.carrier().clone(),
            b.carrier().clone(),
        )
        .pairs()
        .cloned()
        .collect();
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << full.len()) {
            let pairs = full
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, p)| p.clone());
            out.push(Relation::new(a.carrier().clone(), b.carrier().clone(), pairs).unwrap());
        }
        out
    }

    fn small_corpus(functor: &FunctorExpr) -> Vec<FinCoalgebra> {
        let mut out = Vec::new();
        for names in [vec!["x0"], vec!["x0", "x1"]] {
            let carrier = FinSet::atoms(names);
            out.extend(
                FinCoalgebra::enumerate_all(functor, &carrier, Limits::default()).unwrap(),
            );
        }
        out
    }

    #[test]
    fn formula_and_structural_routes_agree_exhaustively() {
        let corpus = small_corpus(&FunctorExpr::Powerset);
        for a in &corpus {
            for b in &corpus {
                for r in all_relations(a, b) {
                    let direct = nbisim_check_direct(&r, a, b, Limits::default()).unwrap();
                    let barr = nbisim_check_barr(&r, a, b).unwrap();
                    assert_eq!(direct.holds, barr.holds, "routes disagree on {r}");
                }
            }
        }
    }

    #[test]
    fn routes_agree_for_polynomial_functors() {
        use crate::parse::parse_functor;
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for functor in ["Id", "Id * P", "Id + Const{c}", "P . P"] {
            let functor = parse_functor(functor).unwrap();
            let max = if matches!(functor, FunctorExpr::Compose(..)) { 1 } else { 2 };
            for _ in 0..20 {
                let na = rng.random_range(1..=max);
                let nb = rng.random_range(1..=max);
                let ca = FinSet::atoms((0..na).map(|i| format!("a{i}")));
                let cb = FinSet::atoms((0..nb).map(|i| format!("b{i}")));
                let a = FinCoalgebra::random(&mut rng, &functor, &ca, Limits::default()).unwrap();
                let b = FinCoalgebra::random(&mut rng, &functor, &cb, Limits::default()).unwrap();
                let r = Relation::random(&mut rng, &ca, &cb);
                let direct = nbisim_check_direct(&r, &a, &b, Limits::default()).unwrap();
                let barr = nbisim_check_barr(&r, &a, &b).unwrap();
                assert_eq!(direct.holds, barr.holds, "routes disagree for {functor} on {r}");
            }
        }
    }

    #[test]
    fn direct_check_matches_companion_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..15 {
            let na = rng.random_range(1..=2usize);
            let nb = rng.random_range(1..=2usize);
            let ca = FinSet::atoms((0..na).map(|i| format!("a{i}")));
            let cb = FinSet::atoms((0..nb).map(|i| format!("b{i}")));
            let a = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &ca, Limits::default())
                .unwrap();
            let b = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &cb, Limits::default())
                .unwrap();
            let ha = companion(&a, Limits::default()).unwrap();
            let hb = companion(&b, Limits::default()).unwrap();
            let r = Relation::random(&mut rng, &ca, &cb);
            let direct = nbisim_check_direct(&r, &a, &b, Limits::default()).unwrap();
            let on_companions =
                is_neighbourhood_bisimulation(&r, &ha, &hb, Limits::default()).unwrap();
            assert_eq!(direct.holds, on_companions.holds);
            assert_eq!(
                direct.witness.map(|w| (w.u, w.v, w.phi, w.psi, w.direction)),
                on_companions
                    .witness
                    .map(|w| (w.u, w.v, w.phi, w.psi, w.direction))
            );
        }
    }

    #[test]
    fn l_bisimulations_pass_on_companions_exhaustively() {
        let corpus = small_corpus(&FunctorExpr::Powerset);
        for a in &corpus {
            for b in &corpus {
                let ha = companion(a, Limits::default()).unwrap();
                let hb = companion(b, Limits::default()).unwrap();
                for r in all_relations(a, b) {
                    if is_l_bisimulation(&r, a, b).unwrap().holds {
                        assert!(
                            is_neighbourhood_bisimulation(&r, &ha, &hb, Limits::default())
                                .unwrap()
                                .holds,
                            "L-bisimulation {r} fails the neighbourhood check"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn unions_of_passing_relations_pass() {
        let c = cycle();
        let hc = companion(&c, Limits::default()).unwrap();
        let diag = Relation::identity(c.carrier());
        let swap = rel(&c, &c, &[("a", "b"), ("b", "a")]);
        for r in [&diag, &swap] {
            assert!(is_neighbourhood_bisimulation(r, &hc, &hc, Limits::default())
                .unwrap()
                .holds);
        }
        let join = nbisim_join(&[diag.clone(), swap.clone()], &hc, &hc, Limits::default())
            .unwrap();
        assert_eq!(join, diag.union(&swap).unwrap());
    }

    #[test]
    fn lattice_examples() {
        let c = cycle();
        let hc = companion(&c, Limits::default()).unwrap();
        let empty = Relation::empty(c.carrier().clone(), c.carrier().clone());
        assert_eq!(
            nbisim_meet(&[empty.clone()], &hc, &hc, Limits::default()).unwrap(),
            empty
        );
        assert_eq!(
            nbisim_join(&[empty.clone()], &hc, &hc, Limits::default()).unwrap(),
            empty
        );

        let diag = Relation::identity(c.carrier());
        assert_eq!(
            nbisim_meet(&[diag.clone()], &hc, &hc, Limits::default()).unwrap(),
            diag
        );
        assert_eq!(
            nbisim_join(&[diag.clone()], &hc, &hc, Limits::default()).unwrap(),
            diag
        );

        let swap = rel(&c, &c, &[("a", "b"), ("b", "a")]);
        let meet = nbisim_meet(&[diag.clone(), swap], &hc, &hc, Limits::default()).unwrap();
        assert!(meet.is_empty());

        let hl = companion(&loop_(), Limits::default()).unwrap();
        let d = companion(&deadlock(), Limits::default()).unwrap();
        let bad = Relation::full(deadlock().carrier().clone(), loop_().carrier().clone());
        assert!(matches!(
            nbisim_join(&[bad], &d, &hl, Limits::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn three_way_agreement_for_other_functors() {
        use crate::parse::parse_functor;
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for (functor, max) in [("Id", 3usize), ("Id * P", 2), ("Id + Const{c}", 2)] {
            let functor = parse_functor(functor).unwrap();
            for _ in 0..8 {
                let na = rng.random_range(1..=max);
                let nb = rng.random_range(1..=max);
                let ca = FinSet::atoms((0..na).map(|i| format!("a{i}")));
                let cb = FinSet::atoms((0..nb).map(|i| format!("b{i}")));
                let a = FinCoalgebra::random(&mut rng, &functor, &ca, Limits::default()).unwrap();
                let b = FinCoalgebra::random(&mut rng, &functor, &cb, Limits::default()).unwrap();
                let ha = companion(&a, Limits::default()).unwrap();
                let hb = companion(&b, Limits::default()).unwrap();
                let nb_rel =
                    greatest_neighbourhood_bisimulation(&ha, &hb, Limits::default()).unwrap();
                let l_rel = greatest_l_bisimulation(&a, &b).unwrap();
                let beq_rel = behavioural_equivalence_relation(&a, &b).unwrap();
                assert_eq!(nb_rel, l_rel, "for {functor}");
                assert_eq!(l_rel, beq_rel, "for {functor}");
            }
        }
    }

    #[test]
    fn three_way_agreement_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let na = rng.random_range(1..=3usize);
            let nb = rng.random_range(1..=3usize);
            let ca = FinSet::atoms((0..na).map(|i| format!("a{i}")));
            let cb = FinSet::atoms((0..nb).map(|i| format!("b{i}")));
            let a = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &ca, Limits::default())
                .unwrap();
            let b = FinCoalgebra::random(&mut rng, &FunctorExpr::Powerset, &cb, Limits::default())
                .unwrap();
            let ha = companion(&a, Limits::default()).unwrap();
            let hb = companion(&b, Limits::default()).unwrap();
            let nb_rel =
                greatest_neighbourhood_bisimulation(&ha, &hb, Limits::default()).unwrap();
            let l_rel = greatest_l_bisimulation(&a, &b).unwrap();
            let beq_rel = behavioural_equivalence_relation(&a, &b).unwrap();
            assert_eq!(nb_rel, l_rel);
            assert_eq!(l_rel, beq_rel);
        }
    }

    #[test]
    fn feasibility_predicate() {
        let limits = Limits::default();
        assert!(nabla_route_feasible(&FunctorExpr::Powerset, 3, 3, limits));
        assert!(!nabla_route_feasible(&FunctorExpr::Powerset, 6, 6, limits));
        assert!(!nabla_route_feasible(&FunctorExpr::Powerset, 64, 64, limits));
    }
}
