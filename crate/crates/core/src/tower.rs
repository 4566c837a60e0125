//! Inverse towers of finite coalgebras presenting profinite systems, with
//! level-wise closure of thread relations and depth-bounded neighbourhood
//! checks.
//!
//! A tower is a sequence of finite coalgebras for one functor together with
//! surjective coalgebra morphisms from each level onto the one below. Its
//! inverse limit is a Stone coalgebra; points of the limit are threads.
//! Every clopen of the limit factors through some level, so checks run
//! level by level: "verified to depth n" is the claim made here, never the
//! unbounded statement.
//!
//! Level-wise closure is exact: a finite level cannot separate a set of
//! threads from its topological closure, so the level-n projection of a
//! thread relation equals the level-n projection of its closure.

use std::collections::BTreeMap;

use crate::coalgebra::{is_coalgebra_morphism, FinCoalgebra};
use crate::functor::FunctorExpr;
use crate::relation::Relation;
use crate::stone::{nabla_route_feasible, nbisim_check_barr, nbisim_check_direct, NbisimVerdict};
use crate::value::{FinMap, FinSet, Value};
use crate::{Error, Limits, Result};

/// Maximum depth of the built-in tower constructions.
pub const MAX_TOWER_DEPTH: usize = 12;

/// An inverse sequence of finite coalgebras with projections
/// `p_n : level(n+1) → level(n)`.
#[derive(Debug, Clone)]
pub struct Tower {
    levels: Vec<FinCoalgebra>,
    projections: Vec<FinMap>,
}

impl Tower {
    /// Builds a tower, checking only that the shapes line up; surjectivity
    /// and the morphism squares are the business of [`Tower::validate`].
    pub fn new(levels: Vec<FinCoalgebra>, projections: Vec<FinMap>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidInput("tower has no levels".into()));
        }
        if projections.len() + 1 != levels.len() {
            return Err(Error::InvalidInput(format!(
                "{} levels need {} projections, got {}",
                levels.len(),
                levels.len() - 1,
                projections.len()
            )));
        }
        for (n, p) in projections.iter().enumerate() {
            if p.dom() != levels[n + 1].carrier() || p.cod() != levels[n].carrier() {
                return Err(Error::CarrierMismatch(format!(
                    "projection {n} does not map level {} onto level {n}",
                    n + 1
                )));
            }
        }
        Ok(Tower {
            levels,
            projections,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn functor(&self) -> &FunctorExpr {
        self.levels[0].functor()
    }

    pub fn level(&self, n: usize) -> Result<&FinCoalgebra> {
        self.levels.get(n).ok_or(Error::DepthUnavailable {
            requested: n,
            available: self.depth(),
        })
    }

    pub fn projection(&self, n: usize) -> Result<&FinMap> {
        self.projections.get(n).ok_or(Error::DepthUnavailable {
            requested: n + 1,
            available: self.depth(),
        })
    }

    /// Checks level-0 nonemptiness and, for every provided level, that the
    /// projection is surjective and a coalgebra morphism. Reports the first
    /// failing level.
    pub fn validate(&self) -> TowerVerdict {
        if self.levels[0].carrier().is_empty() {
            return TowerVerdict::failure(0, "level 0 carrier is empty");
        }
        for (n, p) in self.projections.iter().enumerate() {
            if self.levels[n + 1].functor() != self.levels[n].functor() {
                return TowerVerdict::failure(n + 1, "functor differs from the level below");
            }
            if !p.is_surjective() {
                return TowerVerdict::failure(n + 1, "projection is not surjective");
            }
            match is_coalgebra_morphism(p, &self.levels[n + 1], &self.levels[n]) {
                Ok(v) if v.holds => {}
                Ok(v) => {
                    return TowerVerdict::failure(
                        n + 1,
                        format!(
                            "projection is not a coalgebra morphism (witness {})",
                            v.witness.expect("failing verdict has witness")
                        ),
                    )
                }
                Err(e) => return TowerVerdict::failure(n + 1, e.to_string()),
            }
        }
        TowerVerdict {
            valid: true,
            first_failure: None,
        }
    }
}

/// Verdict of tower validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerVerdict {
    pub valid: bool,
    /// Level index and reason of the first failure.
    pub first_failure: Option<(usize, String)>,
}

impl TowerVerdict {
    fn failure(level: usize, reason: impl Into<String>) -> Self {
        TowerVerdict {
            valid: false,
            first_failure: Some((level, reason.into())),
        }
    }
}

fn word_atom(w: &str) -> Value {
    if w.is_empty() {
        Value::atom("e")
    } else {
        Value::atom(w)
    }
}

fn words_of_length(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|w| [format!("{w}0"), format!("{w}1")])
            .collect();
    }
    out
}

/// The built-in shift system on Cantor space, presented as a tower.
///
/// Level `n` has all binary words of length `n` (the empty word prints as
/// `e`). A word's successors are the words whose prefix of length `n-1` is
/// the word's tail, and the projections drop the first letter, which makes
/// every projection a surjective coalgebra morphism.
pub fn cantor_shift_example(depth: usize, limits: Limits) -> Result<Tower> {
    if depth < 1 {
        return Err(Error::InvalidInput("tower depth must be at least 1".into()));
    }
    if depth > MAX_TOWER_DEPTH {
        return Err(Error::SizeGuardExceeded {
            what: format!("cantor tower of depth {depth} (maximum {MAX_TOWER_DEPTH})"),
            needed: 1u128 << depth,
            guard: limits.max_values,
        });
    }
    limits.check(1u128 << depth, || format!("cantor tower carrier at depth {depth}"))?;
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let words = words_of_length(n);
        let carrier: FinSet = words.iter().map(|w| word_atom(w)).collect();
        let structure: BTreeMap<Value, Value> = words
            .iter()
            .map(|w| {
                let tail = if w.is_empty() { "" } else { &w[1..] };
                let successors: Vec<Value> = if n == 0 {
                    vec![word_atom("")]
                } else {
                    vec![word_atom(&format!("{tail}0")), word_atom(&format!("{tail}1"))]
                };
                (word_atom(w), Value::set(successors))
            })
            .collect();
        levels.push(FinCoalgebra::new(
            FunctorExpr::Powerset,
            carrier,
            structure,
        )?);
    }
    let mut projections = Vec::with_capacity(depth);
    for n in 0..depth {
        let p = FinMap::from_fn(
            levels[n + 1].carrier().clone(),
            levels[n].carrier().clone(),
            |w| match w {
                Value::Atom(s) => word_atom(&s[1..]),
                _ => unreachable!("cantor carriers are atoms"),
            },
        )?;
        projections.push(p);
    }
    Tower::new(levels, projections)
}

/// A constant tower: the same coalgebra at every level with identity
/// projections. Useful as the degenerate case tying level checks to the
/// finite checker.
pub fn constant_tower(a: &FinCoalgebra, depth: usize) -> Result<Tower> {
    let levels = vec![a.clone(); depth + 1];
    let projections = vec![FinMap::identity(a.carrier()); depth];
    Tower::new(levels, projections)
}

/// A point of the inverse limit, tabulated to a fixed depth.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Thread {
    components: Vec<Value>,
}

impl Thread {
    /// Tabulates a generator rule against a tower, checking at every level
    /// that the component is a state and projects onto the previous
    /// component.
    pub fn tabulate(
        tower: &Tower,
        rule: impl Fn(usize) -> Value,
        depth: usize,
    ) -> Result<Thread> {
        if depth > tower.depth() {
            return Err(Error::DepthUnavailable {
                requested: depth,
                available: tower.depth(),
            });
        }
        let mut components = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let c = rule(n);
            if !tower.level(n)?.carrier().contains(&c) {
                return Err(Error::InvalidInput(format!(
                    "thread component {c} is not a level-{n} state"
                )));
            }
            if n > 0 {
                let projected = tower.projection(n - 1)?.apply(&c)?;
                if projected != &components[n - 1] {
                    return Err(Error::InvalidInput(format!(
                        "thread components incompatible at level {n}: {c} projects to {projected}, expected {}",
                        components[n - 1]
                    )));
                }
            }
            components.push(c);
        }
        Ok(Thread { components })
    }

    /// Builds a thread from explicit components, with the same checks.
    pub fn from_components(tower: &Tower, components: Vec<Value>) -> Result<Thread> {
        if components.is_empty() {
            return Err(Error::InvalidInput("thread has no components".into()));
        }
        let depth = components.len() - 1;
        Thread::tabulate(tower, |n| components[n].clone(), depth)
    }

    pub fn depth(&self) -> usize {
        self.components.len() - 1
    }

    pub fn component(&self, n: usize) -> Result<&Value> {
        self.components.get(n).ok_or(Error::DepthUnavailable {
            requested: n,
            available: self.depth(),
        })
    }
}

/// The thread of the cantor tower that is eventually `fill` to the left and
/// ends in `word`: its level-`n` component is the length-`n` suffix of the
/// left-infinite word `fill^ω · word`.
pub fn eventually_constant_thread(
    tower: &Tower,
    fill: char,
    word: &str,
    depth: usize,
) -> Result<Thread> {
    Thread::tabulate(
        tower,
        |n| {
            let w = if n <= word.len() {
                word[word.len() - n..].to_string()
            } else {
                let mut s: String = std::iter::repeat(fill).take(n - word.len()).collect();
                s.push_str(word);
                s
            };
            word_atom(&w)
        },
        depth,
    )
}

/// A relation presented level by level, compatible with the projections:
/// related pairs at level `n+1` project to related pairs at level `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRelation {
    levels: Vec<Relation>,
}

impl LevelRelation {
    pub fn new(left: &Tower, right: &Tower, levels: Vec<Relation>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidInput("level relation has no levels".into()));
        }
        for (n, r) in levels.iter().enumerate() {
            if r.dom() != left.level(n)?.carrier() || r.cod() != right.level(n)?.carrier() {
                return Err(Error::CarrierMismatch(format!(
                    "level-{n} relation carriers do not match the towers"
                )));
            }
        }
        for n in 0..levels.len() - 1 {
            let pl = left.projection(n)?;
            let pr = right.projection(n)?;
            for (x, y) in levels[n + 1].pairs() {
                if !levels[n].contains(pl.apply(x)?, pr.apply(y)?) {
                    return Err(Error::InvalidInput(format!(
                        "incompatible level relation: ({x},{y}) at level {} projects outside level {n}",
                        n + 1
                    )));
                }
            }
        }
        Ok(LevelRelation { levels })
    }

    /// The identity relation at every level of a tower against itself.
    pub fn identity(tower: &Tower, depth: usize) -> Result<Self> {
        let mut levels = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            levels.push(Relation::identity(tower.level(n)?.carrier()));
        }
        LevelRelation::new(tower, tower, levels)
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> Result<&Relation> {
        self.levels.get(n).ok_or(Error::DepthUnavailable {
            requested: n,
            available: self.depth(),
        })
    }
}

/// A bisimulation candidate between the limits of two towers.
#[derive(Debug, Clone)]
pub enum BisimPresentation {
    /// Finitely many thread pairs; the presented relation is their set.
    ThreadPairs(Vec<(Thread, Thread)>),
    /// A relation given directly by its level projections.
    Levels(LevelRelation),
    /// The identity on a level-dense family of threads (for the cantor
    /// tower: the eventually-zero threads). Dense means every level state
    /// is a component of some thread in the family, so each level
    /// projection is the full identity.
    DenseIdentity,
}

/// The level-`n` projection of the presented relation. For thread pairs
/// this is also the level-`n` projection of the topological closure:
/// finite levels cannot separate a thread relation from its closure.
pub fn closure_approx(
    b: &BisimPresentation,
    left: &Tower,
    right: &Tower,
    n: usize,
) -> Result<Relation> {
    match b {
        BisimPresentation::ThreadPairs(pairs) => {
            let mut rel = Relation::empty(
                left.level(n)?.carrier().clone(),
                right.level(n)?.carrier().clone(),
            );
            for (x, y) in pairs {
                rel.insert(x.component(n)?.clone(), y.component(n)?.clone())?;
            }
            Ok(rel)
        }
        BisimPresentation::Levels(lr) => Ok(lr.level(n)?.clone()),
        BisimPresentation::DenseIdentity => {
            let carrier = left.level(n)?.carrier();
            if carrier != right.level(n)?.carrier() {
                return Err(Error::CarrierMismatch(
                    "dense identity needs towers with equal level carriers".into(),
                ));
            }
            Ok(Relation::identity(carrier))
        }
    }
}

/// Verdict of one level of a depth-bounded neighbourhood check.
#[derive(Debug, Clone)]
pub struct LevelVerdict {
    pub level: usize,
    pub verdict: NbisimVerdict,
}

/// Runs the neighbourhood-bisimulation clauses level by level up to
/// `depth`. Each level is checked against the level's finite coalgebra;
/// membership of a level formula in a state's ultrafilter coincides with
/// membership of the structure value in the formula's semantic set because
/// the projections are coalgebra morphisms.
///
/// Levels whose formula spaces fit the guard run the full formula
/// quantification; deeper levels use the structural route, which agrees on
/// companion semantics.
pub fn check_nbisim_to_depth(
    rel: &LevelRelation,
    left: &Tower,
    right: &Tower,
    depth: usize,
    limits: Limits,
) -> Result<Vec<LevelVerdict>> {
    if depth > rel.depth() {
        return Err(Error::DepthUnavailable {
            requested: depth,
            available: rel.depth(),
        });
    }
    let mut out = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let a = left.level(n)?;
        let b = right.level(n)?;
        let r = rel.level(n)?;
        let verdict = if nabla_route_feasible(
            a.functor(),
            a.carrier().len(),
            b.carrier().len(),
            limits,
        ) {
            nbisim_check_direct(r, a, b, limits)?
        } else {
            nbisim_check_barr(r, a, b)?
        };
        out.push(LevelVerdict { level: n, verdict });
    }
    Ok(out)
}

/// Report of a closure probe.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub levels: Vec<LevelVerdict>,
}

impl ProbeReport {
    pub fn all_pass(&self) -> bool {
        self.levels.iter().all(|l| l.verdict.holds)
    }
}

/// Projects the presented relation to every level up to `depth` (this is
/// the level-wise closure), assembles the level relation, and runs the
/// depth-bounded neighbourhood check on it.
pub fn closure_theorem_probe(
    b: &BisimPresentation,
    left: &Tower,
    right: &Tower,
    depth: usize,
    limits: Limits,
) -> Result<ProbeReport> {
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        levels.push(closure_approx(b, left, right, n)?);
    }
    let rel = LevelRelation::new(left, right, levels)?;
    let verdicts = check_nbisim_to_depth(&rel, left, right, depth, limits)?;
    Ok(ProbeReport { levels: verdicts })
}
