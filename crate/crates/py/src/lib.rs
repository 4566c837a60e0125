//! Python bindings. Values cross the boundary as literal strings in the
//! same grammar the CLI uses (`{a,b}`, `(x,y)`, `inl x`), relations as
//! lists of string pairs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use stonebis::coalgebra::{self, FinCoalgebra};
use stonebis::functor::{self, LawSample};
use stonebis::nabla;
use stonebis::parse;
use stonebis::relation::Relation;
use stonebis::stone;
use stonebis::tower;
use stonebis::value::{FinSet, Value};
use stonebis::Limits;

fn err(e: stonebis::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn limits(guard: Option<u64>) -> Limits {
    guard.map(Limits::new).unwrap_or_default()
}

fn value(src: &str) -> PyResult<Value> {
    parse::parse_value(src).map_err(err)
}

fn set(src: &str) -> PyResult<FinSet> {
    parse::parse_set(src).map_err(err)
}

fn relation_from_pairs(
    dom: &FinSet,
    cod: &FinSet,
    pairs: Vec<(String, String)>,
) -> PyResult<Relation> {
    let parsed = pairs
        .iter()
        .map(|(a, b)| Ok((value(a)?, value(b)?)))
        .collect::<PyResult<Vec<_>>>()?;
    Relation::new(dom.clone(), cod.clone(), parsed).map_err(err)
}

fn pairs_out(rel: &Relation) -> Vec<(String, String)> {
    rel.pairs()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// A finite coalgebra, constructed from the same text grammar the CLI
/// reads: a `functor:` header and `state -> value` lines.
#[pyclass(skip_from_py_object)]
struct Coalgebra {
    inner: FinCoalgebra,
}

#[pymethods]
impl Coalgebra {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Coalgebra {
            inner: parse::parse_coalgebra(text).map_err(err)?,
        })
    }

    /// Builds a coalgebra from a functor expression and a state -> value
    /// mapping of literals.
    #[staticmethod]
    fn from_map(functor: &str, structure: std::collections::BTreeMap<String, String>) -> PyResult<Self> {
        let expr = parse::parse_functor(functor).map_err(err)?;
        let mut map = std::collections::BTreeMap::new();
        for (k, v) in &structure {
            map.insert(value(k)?, value(v)?);
        }
        let carrier: FinSet = map.keys().cloned().collect();
        Ok(Coalgebra {
            inner: FinCoalgebra::new(expr, carrier, map).map_err(err)?,
        })
    }

    fn functor(&self) -> String {
        self.inner.functor().to_string()
    }

    fn states(&self) -> Vec<String> {
        self.inner.carrier().iter().map(|v| v.to_string()).collect()
    }

    fn structure(&self, state: &str) -> PyResult<String> {
        Ok(self.inner.structure(&value(state)?).map_err(err)?.to_string())
    }

    fn __repr__(&self) -> String {
        format!(
            "Coalgebra(functor={}, states={})",
            self.inner.functor(),
            self.inner.carrier()
        )
    }
}

/// All functor values over a carrier, as literals in canonical order.
#[pyfunction]
#[pyo3(signature = (functor, carrier, guard=None))]
fn enumerate_values(functor: &str, carrier: &str, guard: Option<u64>) -> PyResult<Vec<String>> {
    let expr = parse::parse_functor(functor).map_err(err)?;
    let x = set(carrier)?;
    Ok(functor::enumerate_values(&expr, &x, limits(guard))
        .map_err(err)?
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Barr lifting of a relation given by carriers and pairs.
#[pyfunction]
#[pyo3(signature = (functor, dom, cod, pairs, guard=None))]
fn barr_lift(
    functor: &str,
    dom: &str,
    cod: &str,
    pairs: Vec<(String, String)>,
    guard: Option<u64>,
) -> PyResult<Vec<(String, String)>> {
    let expr = parse::parse_functor(functor).map_err(err)?;
    let rel = relation_from_pairs(&set(dom)?, &set(cod)?, pairs)?;
    Ok(pairs_out(
        &functor::barr_lift(&expr, &rel, limits(guard)).map_err(err)?,
    ))
}

/// Semantic set of a nabla formula over the subsets of the base.
#[pyfunction]
#[pyo3(signature = (functor, base, formula, guard=None))]
fn eval_nabla(functor: &str, base: &str, formula: &str, guard: Option<u64>) -> PyResult<Vec<String>> {
    let expr = parse::parse_functor(functor).map_err(err)?;
    let f = nabla::NablaFormula::new(expr, set(base)?, value(formula)?).map_err(err)?;
    Ok(nabla::eval_nabla(&f, limits(guard))
        .map_err(err)?
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// All subsets of the base meeting z.
#[pyfunction]
#[pyo3(signature = (base, z, guard=None))]
fn diamond(base: &str, z: &str, guard: Option<u64>) -> PyResult<Vec<String>> {
    Ok(nabla::diamond(&set(base)?, &set(z)?, limits(guard))
        .map_err(err)?
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// All subsets of z.
#[pyfunction]
#[pyo3(signature = (base, z, guard=None))]
fn box_(base: &str, z: &str, guard: Option<u64>) -> PyResult<Vec<String>> {
    Ok(nabla::box_(&set(base)?, &set(z)?, limits(guard))
        .map_err(err)?
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Atoms of the clopen algebra generated by all formula semantics.
#[pyfunction]
#[pyo3(signature = (functor, base, guard=None))]
fn algebra_atoms(functor: &str, base: &str, guard: Option<u64>) -> PyResult<Vec<String>> {
    let expr = parse::parse_functor(functor).map_err(err)?;
    let algebra = nabla::generated_clopen_algebra(&expr, &set(base)?, limits(guard)).map_err(err)?;
    Ok(algebra.atoms().iter().map(|a| a.to_string()).collect())
}

/// Barr bisimulation check; returns (holds, witness_pair_or_None).
#[pyfunction]
fn is_l_bisimulation(
    a: &Coalgebra,
    b: &Coalgebra,
    pairs: Vec<(String, String)>,
) -> PyResult<(bool, Option<(String, String)>)> {
    let rel = relation_from_pairs(a.inner.carrier(), b.inner.carrier(), pairs)?;
    let verdict = coalgebra::is_l_bisimulation(&rel, &a.inner, &b.inner).map_err(err)?;
    Ok((
        verdict.holds,
        verdict.witness.map(|(x, y)| (x.to_string(), y.to_string())),
    ))
}

/// Greatest Barr bisimulation, as a list of state pairs.
#[pyfunction]
fn greatest_l_bisimulation(a: &Coalgebra, b: &Coalgebra) -> PyResult<Vec<(String, String)>> {
    Ok(pairs_out(
        &coalgebra::greatest_l_bisimulation(&a.inner, &b.inner).map_err(err)?,
    ))
}

/// Behavioural equivalence of two pointed coalgebras.
#[pyfunction]
fn behaviourally_equivalent(a: &Coalgebra, u: &str, b: &Coalgebra, v: &str) -> PyResult<bool> {
    Ok(
        coalgebra::behaviourally_equivalent(&a.inner, &value(u)?, &b.inner, &value(v)?)
            .map_err(err)?
            .equivalent,
    )
}

/// Neighbourhood bisimulation check on the companions. Returns
/// (holds, witness_or_None, mode) where a witness is
/// (u, v, phi, psi, direction).
#[pyfunction]
#[pyo3(signature = (a, b, pairs, guard=None))]
fn nbisim_check(
    a: &Coalgebra,
    b: &Coalgebra,
    pairs: Vec<(String, String)>,
    guard: Option<u64>,
) -> PyResult<(bool, Option<(String, String, String, String, String)>, String)> {
    let rel = relation_from_pairs(a.inner.carrier(), b.inner.carrier(), pairs)?;
    let lim = limits(guard);
    let ha = coalgebra::companion(&a.inner, lim).map_err(err)?;
    let hb = coalgebra::companion(&b.inner, lim).map_err(err)?;
    let verdict = stone::is_neighbourhood_bisimulation(&rel, &ha, &hb, lim).map_err(err)?;
    Ok((
        verdict.holds,
        verdict.witness.map(|w| {
            (
                w.u.to_string(),
                w.v.to_string(),
                w.phi.to_string(),
                w.psi.to_string(),
                w.direction.to_string(),
            )
        }),
        verdict.mode.to_string(),
    ))
}

/// Greatest neighbourhood bisimulation on the companions.
#[pyfunction]
#[pyo3(signature = (a, b, guard=None))]
fn greatest_nbisim(
    a: &Coalgebra,
    b: &Coalgebra,
    guard: Option<u64>,
) -> PyResult<Vec<(String, String)>> {
    let lim = limits(guard);
    let ha = coalgebra::companion(&a.inner, lim).map_err(err)?;
    let hb = coalgebra::companion(&b.inner, lim).map_err(err)?;
    Ok(pairs_out(
        &stone::greatest_neighbourhood_bisimulation(&ha, &hb, lim).map_err(err)?,
    ))
}

/// Vietoris bisimulation check for powerset coalgebras.
#[pyfunction]
fn vietoris_check(
    a: &Coalgebra,
    b: &Coalgebra,
    pairs: Vec<(String, String)>,
) -> PyResult<(bool, Option<(String, String)>)> {
    let rel = relation_from_pairs(a.inner.carrier(), b.inner.carrier(), pairs)?;
    let verdict = stone::is_vietoris_bisimulation(&rel, &a.inner, &b.inner).map_err(err)?;
    Ok((
        verdict.holds,
        verdict.witness.map(|(x, y)| (x.to_string(), y.to_string())),
    ))
}

/// Closure probe on the built-in shift tower. `pairs` is one of
/// 'dense-identity', 'complement' or 'zeros'. Returns the per-level
/// verdicts.
#[pyfunction]
#[pyo3(signature = (depth, pairs, guard=None))]
fn cantor_probe(depth: usize, pairs: &str, guard: Option<u64>) -> PyResult<Vec<bool>> {
    let lim = limits(guard);
    let t = tower::cantor_shift_example(depth, lim).map_err(err)?;
    let b = match pairs {
        "dense-identity" => tower::BisimPresentation::DenseIdentity,
        "zeros" => {
            let z = tower::eventually_constant_thread(&t, '0', "", depth).map_err(err)?;
            tower::BisimPresentation::ThreadPairs(vec![(z.clone(), z)])
        }
        "complement" => {
            let mut words = vec![String::new()];
            for _ in 0..depth {
                words = words
                    .iter()
                    .flat_map(|w| [format!("{w}0"), format!("{w}1")])
                    .collect();
            }
            let mut ps = Vec::new();
            for w in &words {
                let comp: String = w.chars().map(|c| if c == '0' { '1' } else { '0' }).collect();
                ps.push((
                    tower::eventually_constant_thread(&t, '0', w, depth).map_err(err)?,
                    tower::eventually_constant_thread(&t, '1', &comp, depth).map_err(err)?,
                ));
            }
            tower::BisimPresentation::ThreadPairs(ps)
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown pair family '{other}'"
            )))
        }
    };
    let report = tower::closure_theorem_probe(&b, &t, &t, depth, lim).map_err(err)?;
    Ok(report.levels.iter().map(|lv| lv.verdict.holds).collect())
}

/// Lax-extension law report over seeded random samples. Returns a dict
/// law name -> holds.
#[pyfunction]
#[pyo3(signature = (functor, samples=100, seed=0, max_carrier=3, guard=None))]
fn check_lax_laws(
    py: Python<'_>,
    functor: &str,
    samples: usize,
    seed: u64,
    max_carrier: usize,
    guard: Option<u64>,
) -> PyResult<Py<pyo3::types::PyDict>> {
    use rand::SeedableRng;
    let expr = parse::parse_functor(functor).map_err(err)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let batch: Vec<LawSample> = (0..samples)
        .map(|_| LawSample::random(&mut rng, max_carrier.max(1)))
        .collect();
    let report = functor::check_lax_laws(&expr, batch, limits(guard)).map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("l1", report.l1.holds)?;
    dict.set_item("l2", report.l2.holds)?;
    dict.set_item("l2_equality", report.l2_equality)?;
    dict.set_item("l3", report.l3.holds)?;
    dict.set_item("symmetry", report.symmetry.holds)?;
    Ok(dict.into())
}

#[pymodule]
fn stonebis_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Coalgebra>()?;
    m.add_function(wrap_pyfunction!(enumerate_values, m)?)?;
    m.add_function(wrap_pyfunction!(barr_lift, m)?)?;
    m.add_function(wrap_pyfunction!(eval_nabla, m)?)?;
    m.add_function(wrap_pyfunction!(diamond, m)?)?;
    m.add_function(wrap_pyfunction!(box_, m)?)?;
    m.add_function(wrap_pyfunction!(algebra_atoms, m)?)?;
    m.add_function(wrap_pyfunction!(is_l_bisimulation, m)?)?;
    m.add_function(wrap_pyfunction!(greatest_l_bisimulation, m)?)?;
    m.add_function(wrap_pyfunction!(behaviourally_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(nbisim_check, m)?)?;
    m.add_function(wrap_pyfunction!(greatest_nbisim, m)?)?;
    m.add_function(wrap_pyfunction!(vietoris_check, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_probe, m)?)?;
    m.add_function(wrap_pyfunction!(check_lax_laws, m)?)?;
    Ok(())
}
