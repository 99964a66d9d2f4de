//! Finite many-sorted algebras with possibly-empty carriers: term evaluation,
//! identity satisfaction under the empty-sort principle, homomorphism tests
//! and enumeration, subalgebra generation, finite products.
//!
//! Elements are indices into per-sort carrier lists; display names live next
//! to the indices. Operation tables are stored row-major over the mixed-radix
//! argument space, in the style of finite model checkers.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::signature::{Identity, Signature, VarietySpec};
use crate::term::Term;

pub type Elem = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("assignment for `{var}` out of range for sort `{sort}`")]
    BadAssignment { var: String, sort: String },
    #[error("budget exceeded: {what} needs {needed} but the budget is {budget}")]
    Budget {
        what: String,
        needed: u128,
        budget: u128,
    },
    #[error("algebra invalid: {0}")]
    Invalid(String),
}

/// One operation table: outputs in row-major order over the argument tuples
/// of the op's argument carriers (rightmost argument fastest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpTable {
    pub data: Vec<Elem>,
}

/// A finite algebra over a signature: per-sort carriers (possibly empty) with
/// element names, and one total table per operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteAlgebra {
    pub signature: Signature,
    /// sort name -> element display names; element ids are indices.
    pub carriers: BTreeMap<String, Vec<String>>,
    pub tables: BTreeMap<String, OpTable>,
}

impl FiniteAlgebra {
    pub fn carrier(&self, sort: &str) -> &[String] {
        self.carriers
            .get(sort)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn carrier_size(&self, sort: &str) -> usize {
        self.carrier(sort).len()
    }

    /// Sorts with nonempty carrier.
    pub fn inhabited_sorts(&self) -> Vec<&str> {
        self.signature
            .sorts
            .iter()
            .filter(|s| self.carrier_size(s) > 0)
            .map(String::as_str)
            .collect()
    }

    pub fn element_name(&self, sort: &str, elem: Elem) -> &str {
        &self.carrier(sort)[elem]
    }

    pub fn element_index(&self, sort: &str, name: &str) -> Option<Elem> {
        self.carrier(sort).iter().position(|n| n == name)
    }

    fn table_index(&self, op: &str, args: &[Elem]) -> usize {
        let ty = &self.signature.ops[op];
        let mut index = 0usize;
        for (a, sort) in args.iter().zip(&ty.args) {
            index = index * self.carrier_size(sort) + a;
        }
        index
    }

    /// Looks up one table entry. Panics on malformed input; validated
    /// algebras and well-sorted arguments never do.
    pub fn apply(&self, op: &str, args: &[Elem]) -> Elem {
        let idx = self.table_index(op, args);
        self.tables[op].data[idx]
    }

    /// Number of argument tuples the op's table must cover.
    pub fn table_domain_size(&self, op: &str) -> usize {
        let ty = &self.signature.ops[op];
        ty.args
            .iter()
            .map(|s| self.carrier_size(s))
            .product::<usize>()
    }

    /// Structural validation: carriers declared for every sort, tables total
    /// with in-range outputs, and no constant into an empty carrier.
    pub fn validate(&self) -> Result<(), ModelError> {
        for sort in &self.signature.sorts {
            if !self.carriers.contains_key(sort) {
                return Err(ModelError::Invalid(format!(
                    "missing carrier for sort `{sort}`"
                )));
            }
        }
        for extra in self.carriers.keys() {
            if !self.signature.has_sort(extra) {
                return Err(ModelError::Invalid(format!(
                    "carrier for undeclared sort `{extra}`"
                )));
            }
        }
        for (op, ty) in &self.signature.ops {
            let table = self
                .tables
                .get(op)
                .ok_or_else(|| ModelError::Invalid(format!("missing table for op `{op}`")))?;
            let domain = self.table_domain_size(op);
            if table.data.len() != domain {
                return Err(ModelError::Invalid(format!(
                    "table for op `{op}` has {} entries, domain needs {domain}",
                    table.data.len()
                )));
            }
            if ty.is_constant() && self.carrier_size(&ty.result) == 0 {
                return Err(ModelError::Invalid(format!(
                    "constant `{op}` into empty carrier of sort `{}`",
                    ty.result
                )));
            }
            let result_size = self.carrier_size(&ty.result);
            for &out in &table.data {
                if out >= result_size {
                    return Err(ModelError::Invalid(format!(
                        "table for op `{op}` maps outside the carrier of sort `{}`",
                        ty.result
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A sort-preserving assignment of algebra elements to variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize)]
pub struct Assignment {
    pub values: BTreeMap<String, Elem>,
}

impl Assignment {
    pub fn get(&self, var: &str) -> Option<Elem> {
        self.values.get(var).copied()
    }
}

/// Iterates over all assignments of an alphabet into an algebra, in
/// mixed-radix order (variables in name order, last variable fastest).
/// Yields nothing when some variable's sort has an empty carrier.
pub fn all_assignments(
    alg: &FiniteAlgebra,
    alphabet: &crate::signature::SortedAlphabet,
) -> Vec<Assignment> {
    let vars: Vec<(&String, &String)> = alphabet.vars.iter().collect();
    let sizes: Vec<usize> = vars.iter().map(|(_, s)| alg.carrier_size(s)).collect();
    if sizes.contains(&0) && !vars.is_empty() {
        return Vec::new();
    }
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; vars.len()];
    for _ in 0..total {
        let values = vars
            .iter()
            .zip(&current)
            .map(|((v, _), &e)| ((*v).clone(), e))
            .collect();
        out.push(Assignment { values });
        for pos in (0..current.len()).rev() {
            current[pos] += 1;
            if current[pos] < sizes[pos] {
                break;
            }
            current[pos] = 0;
        }
    }
    out
}

/// Evaluates a term under an assignment; the induced homomorphism from the
/// term algebra applied at one point.
pub fn eval(alg: &FiniteAlgebra, term: &Term, assignment: &Assignment) -> Result<Elem, ModelError> {
    match term {
        Term::Var { name, .. } => assignment
            .get(name)
            .ok_or_else(|| ModelError::UnboundVar(name.clone())),
        Term::App { op, args, .. } => {
            if !alg.signature.ops.contains_key(op) {
                return Err(ModelError::UnknownOp(op.clone()));
            }
            let vals = args
                .iter()
                .map(|a| eval(alg, a, assignment))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(alg.apply(op, &vals))
        }
    }
}

/// True iff the identity holds under every assignment of its alphabet.
/// Vacuously true when some needed sort has an empty carrier.
pub fn satisfies_identity(alg: &FiniteAlgebra, identity: &Identity) -> bool {
    witness_violation(alg, identity).is_none()
}

/// First assignment violating the identity, if any, in canonical order.
pub fn witness_violation(alg: &FiniteAlgebra, identity: &Identity) -> Option<Assignment> {
    all_assignments(alg, &identity.alphabet)
        .into_iter()
        .find(|a| {
            eval(alg, &identity.lhs, a).expect("identity is sort-valid")
                != eval(alg, &identity.rhs, a).expect("identity is sort-valid")
        })
}

pub fn in_variety(alg: &FiniteAlgebra, variety: &VarietySpec) -> bool {
    variety
        .identities
        .iter()
        .all(|id| satisfies_identity(alg, id))
}

/// A per-sort function between the carriers of two algebras over the same
/// signature. Respecting the sorting is built into the shape.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SortedMap {
    /// sort name -> image of each element index of the domain carrier.
    pub maps: BTreeMap<String, Vec<Elem>>,
}

impl SortedMap {
    pub fn identity(alg: &FiniteAlgebra) -> SortedMap {
        SortedMap {
            maps: alg
                .carriers
                .iter()
                .map(|(s, c)| (s.clone(), (0..c.len()).collect()))
                .collect(),
        }
    }

    pub fn apply(&self, sort: &str, elem: Elem) -> Elem {
        self.maps[sort][elem]
    }

    pub fn is_injective(&self) -> bool {
        self.maps.values().all(|m| {
            let mut seen = m.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len() == m.len()
        })
    }
}

/// A homomorphism check failure witness: the op and argument tuple where
/// compatibility breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomViolation {
    pub op: String,
    pub args: Vec<Elem>,
}

/// Checks the two homomorphism conditions: the map respects the sorting (by
/// construction of `SortedMap`) and commutes with every operation table over
/// every argument tuple. Vacuous over empty domains.
pub fn hom_violation(
    map: &SortedMap,
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
) -> Option<HomViolation> {
    for (op, ty) in &a.signature.ops {
        let sizes: Vec<usize> = ty.args.iter().map(|s| a.carrier_size(s)).collect();
        if sizes.contains(&0) {
            continue;
        }
        let total: usize = sizes.iter().product();
        let mut args = vec![0usize; sizes.len()];
        for _ in 0..total {
            let lhs = map.apply(&ty.result, a.apply(op, &args));
            let mapped: Vec<Elem> = args
                .iter()
                .zip(&ty.args)
                .map(|(&e, s)| map.apply(s, e))
                .collect();
            let rhs = b.apply(op, &mapped);
            if lhs != rhs {
                return Some(HomViolation {
                    op: op.clone(),
                    args,
                });
            }
            for pos in (0..args.len()).rev() {
                args[pos] += 1;
                if args[pos] < sizes[pos] {
                    break;
                }
                args[pos] = 0;
            }
        }
    }
    None
}

pub fn is_homomorphism(map: &SortedMap, a: &FiniteAlgebra, b: &FiniteAlgebra) -> bool {
    hom_violation(map, a, b).is_none()
}

/// An embedding is an injective homomorphism (kernel is the diagonal).
pub fn is_embedding(map: &SortedMap, a: &FiniteAlgebra, b: &FiniteAlgebra) -> bool {
    is_homomorphism(map, a, b) && map.is_injective()
}

/// Enumerates all homomorphisms `a -> b` by filtering every sorted map, in
/// mixed-radix order. Empty when some inhabited sort of `a` is empty in `b`.
pub fn enumerate_homs(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    budget: u128,
) -> Result<Vec<SortedMap>, ModelError> {
    let sorts: Vec<&String> = a.signature.sorts.iter().collect();
    let mut total: u128 = 1;
    for sort in &sorts {
        let dom = a.carrier_size(sort) as u128;
        let cod = b.carrier_size(sort) as u128;
        if dom > 0 && cod == 0 {
            return Ok(Vec::new());
        }
        let count = cod.checked_pow(dom as u32).unwrap_or(u128::MAX);
        total = total.saturating_mul(count.max(1));
    }
    if total > budget {
        return Err(ModelError::Budget {
            what: "sorted maps to test".to_string(),
            needed: total,
            budget,
        });
    }

    let mut maps = vec![SortedMap {
        maps: sorts
            .iter()
            .map(|s| ((*s).clone(), vec![0usize; a.carrier_size(s)]))
            .collect(),
    }];
    for sort in &sorts {
        let dom = a.carrier_size(sort);
        let cod = b.carrier_size(sort);
        for slot in 0..dom {
            let mut next = Vec::with_capacity(maps.len() * cod.max(1));
            for m in &maps {
                for image in 0..cod {
                    let mut m2 = m.clone();
                    m2.maps.get_mut(*sort).unwrap()[slot] = image;
                    next.push(m2);
                }
            }
            maps = next;
        }
    }
    Ok(maps
        .into_iter()
        .filter(|m| is_homomorphism(m, a, b))
        .collect())
}

/// Least subalgebra containing the seed and all constants, plus how each new
/// element arose (a seed, or an op applied to earlier elements). The returned
/// inclusion maps the subalgebra's indices into the parent's.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    pub algebra: FiniteAlgebra,
    pub inclusion: SortedMap,
    /// Per sort, per subalgebra element: how it entered the closure.
    pub provenance: BTreeMap<String, Vec<Provenance>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Seed,
    Op { op: String, args: Vec<(String, Elem)> },
}

pub fn generated_subalgebra(
    alg: &FiniteAlgebra,
    seed: &BTreeMap<String, Vec<Elem>>,
) -> Subalgebra {
    // members[sort][parent elem] = Some(sub index)
    let mut members: BTreeMap<String, Vec<Option<usize>>> = alg
        .carriers
        .iter()
        .map(|(s, c)| (s.clone(), vec![None; c.len()]))
        .collect();
    let mut order: BTreeMap<String, Vec<Elem>> = BTreeMap::new();
    let mut provenance: BTreeMap<String, Vec<Provenance>> = BTreeMap::new();

    let add = |members: &mut BTreeMap<String, Vec<Option<usize>>>,
                   order: &mut BTreeMap<String, Vec<Elem>>,
                   provenance: &mut BTreeMap<String, Vec<Provenance>>,
                   sort: &str,
                   elem: Elem,
                   how: Provenance|
     -> bool {
        let slot = &mut members.get_mut(sort).unwrap()[elem];
        if slot.is_some() {
            return false;
        }
        let list = order.entry(sort.to_string()).or_default();
        *slot = Some(list.len());
        list.push(elem);
        provenance.entry(sort.to_string()).or_default().push(how);
        true
    };

    for (sort, elems) in seed {
        let mut sorted = elems.clone();
        sorted.sort_unstable();
        sorted.dedup();
        for e in sorted {
            add(
                &mut members,
                &mut order,
                &mut provenance,
                sort,
                e,
                Provenance::Seed,
            );
        }
    }

    loop {
        let mut changed = false;
        for (op, ty) in &alg.signature.ops {
            let pools: Vec<Vec<Elem>> = ty
                .args
                .iter()
                .map(|s| order.get(s).cloned().unwrap_or_default())
                .collect();
            if pools.iter().any(Vec::is_empty) && !ty.is_constant() {
                continue;
            }
            let mut tuples = vec![Vec::new()];
            for pool in &pools {
                let mut next = Vec::with_capacity(tuples.len() * pool.len());
                for t in &tuples {
                    for &e in pool {
                        let mut t2 = t.clone();
                        t2.push(e);
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            for tuple in tuples {
                let result = alg.apply(op, &tuple);
                let how = Provenance::Op {
                    op: op.clone(),
                    args: tuple
                        .iter()
                        .zip(&ty.args)
                        .map(|(&e, s)| (s.clone(), e))
                        .collect(),
                };
                if add(
                    &mut members,
                    &mut order,
                    &mut provenance,
                    &ty.result,
                    result,
                    how,
                ) {
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Canonicalize: order sub elements by parent index, remap provenance.
    let mut carriers = BTreeMap::new();
    let mut inclusion_maps = BTreeMap::new();
    let mut parent_to_sub: BTreeMap<String, BTreeMap<Elem, usize>> = BTreeMap::new();
    for sort in &alg.signature.sorts {
        let mut elems = order.get(sort).cloned().unwrap_or_default();
        elems.sort_unstable();
        let names = elems
            .iter()
            .map(|&e| alg.element_name(sort, e).to_string())
            .collect();
        parent_to_sub.insert(
            sort.clone(),
            elems.iter().enumerate().map(|(i, &e)| (e, i)).collect(),
        );
        carriers.insert(sort.clone(), names);
        inclusion_maps.insert(sort.clone(), elems);
    }

    let mut tables = BTreeMap::new();
    for (op, ty) in &alg.signature.ops {
        let sizes: Vec<usize> = ty
            .args
            .iter()
            .map(|s| inclusion_maps[s].len())
            .collect();
        let total: usize = sizes.iter().product();
        let mut data = Vec::with_capacity(total);
        let mut args = vec![0usize; sizes.len()];
        for _ in 0..total {
            let parent_args: Vec<Elem> = args
                .iter()
                .zip(&ty.args)
                .map(|(&i, s)| inclusion_maps[s][i])
                .collect();
            let parent_result = alg.apply(op, &parent_args);
            data.push(parent_to_sub[&ty.result][&parent_result]);
            for pos in (0..args.len()).rev() {
                args[pos] += 1;
                if args[pos] < sizes[pos] {
                    break;
                }
                args[pos] = 0;
            }
        }
        tables.insert(op.clone(), OpTable { data });
    }

    let mut remapped_provenance: BTreeMap<String, Vec<Provenance>> = BTreeMap::new();
    for sort in &alg.signature.sorts {
        let elems = &inclusion_maps[sort];
        let discovered = order.get(sort).cloned().unwrap_or_default();
        let prov = provenance.get(sort).cloned().unwrap_or_default();
        let by_parent: BTreeMap<Elem, &Provenance> = discovered
            .iter()
            .zip(prov.iter())
            .map(|(&e, p)| (e, p))
            .collect();
        let remapped = elems
            .iter()
            .map(|e| {
                let p = by_parent[e];
                match p {
                    Provenance::Seed => Provenance::Seed,
                    Provenance::Op { op, args } => Provenance::Op {
                        op: op.clone(),
                        args: args
                            .iter()
                            .map(|(s, parent)| (s.clone(), parent_to_sub[s][parent]))
                            .collect(),
                    },
                }
            })
            .collect();
        remapped_provenance.insert(sort.clone(), remapped);
    }

    Subalgebra {
        algebra: FiniteAlgebra {
            signature: alg.signature.clone(),
            carriers,
            tables,
        },
        inclusion: SortedMap {
            maps: inclusion_maps,
        },
        provenance: remapped_provenance,
    }
}

/// Finite product of algebras over a shared signature: carriers are cartesian
/// products, tables componentwise. The empty product is the one-element-per-
/// sort algebra.
pub fn product_algebra(
    sig: &Signature,
    factors: &[&FiniteAlgebra],
    budget: u128,
) -> Result<FiniteAlgebra, ModelError> {
    let mut carriers = BTreeMap::new();
    let mut index_strides: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for sort in &sig.sorts {
        let sizes: Vec<usize> = factors.iter().map(|f| f.carrier_size(sort)).collect();
        let total: u128 = sizes.iter().map(|&n| n as u128).product();
        if total > budget {
            return Err(ModelError::Budget {
                what: format!("product carrier of sort `{sort}`"),
                needed: total,
                budget,
            });
        }
        let total = total as usize;
        let mut names = Vec::with_capacity(total);
        let mut tuple = vec![0usize; sizes.len()];
        for _ in 0..total {
            let name = if tuple.is_empty() {
                "()".to_string()
            } else {
                tuple
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| factors[i].element_name(sort, e).to_string())
                    .collect::<Vec<_>>()
                    .join("|")
            };
            names.push(name);
            for pos in (0..tuple.len()).rev() {
                tuple[pos] += 1;
                if tuple[pos] < sizes[pos] {
                    break;
                }
                tuple[pos] = 0;
            }
        }
        carriers.insert(sort.clone(), names);
        index_strides.insert(sort.clone(), sizes);
    }

    // tuple <-> flat index helpers per sort
    let decode = |sort: &str, mut flat: usize| -> Vec<usize> {
        let sizes = &index_strides[sort];
        let mut tuple = vec![0usize; sizes.len()];
        for pos in (0..sizes.len()).rev() {
            tuple[pos] = flat % sizes[pos];
            flat /= sizes[pos];
        }
        tuple
    };
    let encode = |sort: &str, tuple: &[usize]| -> usize {
        let sizes = &index_strides[sort];
        tuple
            .iter()
            .zip(sizes)
            .fold(0usize, |acc, (&e, &n)| acc * n + e)
    };

    let mut tables = BTreeMap::new();
    for (op, ty) in &sig.ops {
        let arg_sizes: Vec<usize> = ty.args.iter().map(|s| carriers[s].len()).collect();
        let total: usize = arg_sizes.iter().product();
        let mut data = Vec::with_capacity(total);
        let mut args = vec![0usize; arg_sizes.len()];
        for _ in 0..total {
            let arg_tuples: Vec<Vec<usize>> = args
                .iter()
                .zip(&ty.args)
                .map(|(&flat, s)| decode(s, flat))
                .collect();
            let result_tuple: Vec<usize> = (0..factors.len())
                .map(|i| {
                    let component_args: Vec<Elem> =
                        arg_tuples.iter().map(|t| t[i]).collect();
                    factors[i].apply(op, &component_args)
                })
                .collect();
            data.push(encode(&ty.result, &result_tuple));
            for pos in (0..args.len()).rev() {
                args[pos] += 1;
                if args[pos] < arg_sizes[pos] {
                    break;
                }
                args[pos] = 0;
            }
        }
        tables.insert(op.clone(), OpTable { data });
    }

    Ok(FiniteAlgebra {
        signature: sig.clone(),
        carriers,
        tables,
    })
}

/// Builder used by tests, fixtures and the model enumerator.
pub struct AlgebraBuilder {
    signature: Signature,
    carriers: BTreeMap<String, Vec<String>>,
    tables: BTreeMap<String, OpTable>,
}

impl AlgebraBuilder {
    pub fn new(signature: &Signature) -> Self {
        AlgebraBuilder {
            signature: signature.clone(),
            carriers: signature
                .sorts
                .iter()
                .map(|s| (s.clone(), Vec::new()))
                .collect(),
            tables: BTreeMap::new(),
        }
    }

    pub fn carrier(mut self, sort: &str, names: &[&str]) -> Self {
        self.carriers
            .insert(sort.to_string(), names.iter().map(|s| s.to_string()).collect());
        self
    }

    /// Table rows in row-major order (rightmost argument fastest), given as
    /// element names.
    pub fn table(mut self, op: &str, outputs: &[&str]) -> Self {
        let ty = self.signature.ops[op].clone();
        let data = outputs
            .iter()
            .map(|name| {
                self.carriers[&ty.result]
                    .iter()
                    .position(|n| n == name)
                    .unwrap_or_else(|| panic!("unknown element `{name}` of sort `{}`", ty.result))
            })
            .collect();
        self.tables.insert(op.to_string(), OpTable { data });
        self
    }

    pub fn build(mut self) -> FiniteAlgebra {
        // Fill empty-domain tables for ops over empty carriers.
        for (op, ty) in self.signature.ops.clone() {
            let domain: usize = ty
                .args
                .iter()
                .map(|s| self.carriers[s].len())
                .product();
            if domain == 0 {
                self.tables.entry(op).or_insert(OpTable { data: vec![] });
            }
        }
        let alg = FiniteAlgebra {
            signature: self.signature,
            carriers: self.carriers,
            tables: self.tables,
        };
        alg.validate().expect("builder produced invalid algebra");
        alg
    }
}
