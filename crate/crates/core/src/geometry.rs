//! Universal algebraic geometry over finite algebras: solution sets of
//! equation systems, algebraic closures, exact closure comparison, and
//! geometric equivalence up to a generator bound.
//!
//! A closed congruence is never materialized as a pair set. It is carried by
//! a witness set of assignments and compared through the diagonal
//! subalgebra: the kernel of one diagonal map includes the kernel of another
//! iff the subalgebra of the product generated by the paired generator
//! tuples is the graph of a function. Every diagonal element remembers one
//! term that reaches it, so failed comparisons yield a separating term pair
//! that replays through plain membership queries.

mod cc;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::freealg::{nf_to_term, VarietyId};
use crate::model::{all_assignments, eval, Assignment, Elem, FiniteAlgebra};
use crate::signature::SortedAlphabet;
use crate::term::Term;
use crate::verbal::{InducedS, SVerdict};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: String,
        needed: u128,
        budget: u128,
    },
    #[error("equation system invalid: {0}")]
    BadSystem(String),
    #[error("term `{0}` is outside the verified fragment of the bijection")]
    OutsideFragment(String),
    #[error("the fragment bijection was rejected; transport is undefined")]
    RejectedBijection,
}

/// Budgets for the closure machinery.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeometryBudget {
    /// Cap on `|H|^|X|`, the assignments scanned per solution set.
    pub max_assignments: u128,
    /// Cap on the number of elements of one diagonal subalgebra.
    pub max_diagonal: u128,
    /// Cap on the distinct closed congruences enumerated per alphabet.
    pub max_kernels: u128,
}

impl Default for GeometryBudget {
    fn default() -> Self {
        GeometryBudget {
            max_assignments: 1 << 16,
            max_diagonal: 1_000_000,
            max_kernels: 1 << 12,
        }
    }
}

/// A finite system of same-sort term pairs over a sorted alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationSystem {
    pub alphabet: SortedAlphabet,
    pub pairs: Vec<(Term, Term)>,
}

impl EquationSystem {
    pub fn new(
        alphabet: SortedAlphabet,
        pairs: Vec<(Term, Term)>,
    ) -> Result<EquationSystem, GeometryError> {
        let system = EquationSystem { alphabet, pairs };
        system.validate()?;
        Ok(system)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for (i, (lhs, rhs)) in self.pairs.iter().enumerate() {
            if lhs.sort() != rhs.sort() {
                return Err(GeometryError::BadSystem(format!(
                    "pair {i}: sides have sorts `{}` and `{}`",
                    lhs.sort(),
                    rhs.sort()
                )));
            }
            for side in [lhs, rhs] {
                for (var, sort) in side.vars().vars {
                    match self.alphabet.sort_of(&var) {
                        Some(s) if s == sort => {}
                        Some(s) => {
                            return Err(GeometryError::BadSystem(format!(
                                "pair {i}: variable `{var}` used at sort `{sort}`, declared `{s}`"
                            )))
                        }
                        None => {
                            return Err(GeometryError::BadSystem(format!(
                                "pair {i}: variable `{var}` not declared"
                            )))
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// All assignments of the alphabet into `target` whose induced homomorphisms
/// satisfy every pair. Empty when a needed sort has an empty carrier.
pub fn solutions(
    system: &EquationSystem,
    target: &FiniteAlgebra,
    budget: &GeometryBudget,
) -> Result<Vec<Assignment>, GeometryError> {
    let mut total: u128 = 1;
    for sort in system.alphabet.vars.values() {
        total = total.saturating_mul(target.carrier_size(sort).max(1) as u128);
    }
    if total > budget.max_assignments {
        return Err(GeometryError::Budget {
            what: "assignments".to_string(),
            needed: total,
            budget: budget.max_assignments,
        });
    }
    Ok(all_assignments(target, &system.alphabet)
        .into_iter()
        .filter(|a| {
            system.pairs.iter().all(|(lhs, rhs)| {
                eval(target, lhs, a).expect("validated system")
                    == eval(target, rhs, a).expect("validated system")
            })
        })
        .collect())
}

/// Membership in the algebraic closure: every solution equalizes the pair.
/// True for every pair when no solutions exist.
pub fn closure_member(
    system: &EquationSystem,
    target: &FiniteAlgebra,
    pair: (&Term, &Term),
    budget: &GeometryBudget,
) -> Result<bool, GeometryError> {
    if pair.0.sort() != pair.1.sort() {
        return Err(GeometryError::BadSystem(
            "query pair sides have different sorts".to_string(),
        ));
    }
    let sols = solutions(system, target, budget)?;
    Ok(sols.iter().all(|a| {
        eval(target, pair.0, a).expect("validated query")
            == eval(target, pair.1, a).expect("validated query")
    }))
}

/// One element of a diagonal subalgebra: the tuple of values over the
/// witness assignments, and how it was first reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagElem {
    pub tuple: Vec<Elem>,
    pub origin: Origin,
}

/// Provenance of a diagonal element: a generator, or an operation applied
/// to earlier elements (referenced by sort and index). A reaching term is
/// materialized from this lazily, so the closure loops never copy terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Origin {
    Var(String),
    App { op: String, args: Vec<(String, usize)> },
}

/// The kernel of the diagonal map `F(X) -> H^S` for a witness assignment
/// set `S`, carried by the generated diagonal subalgebra.
///
/// With `S` empty every sort collapses to the empty tuple and the kernel is
/// the everything-congruence, which is what the empty-sort principle
/// demands.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalKernel {
    pub alphabet: SortedAlphabet,
    pub target: FiniteAlgebra,
    pub witnesses: Vec<Assignment>,
    /// Per sort: the elements of the generated diagonal subalgebra.
    pub elems: BTreeMap<String, Vec<DiagElem>>,
    /// Per sort: tuple -> index into `elems`. Only probed by key, never
    /// iterated, so hashing does not disturb determinism.
    #[serde(skip)]
    index: BTreeMap<String, HashMap<Vec<Elem>, usize>>,
    /// Variable -> (sort, element index) of its generator tuple.
    #[serde(skip)]
    var_elem: BTreeMap<String, (String, usize)>,
}

impl DiagonalKernel {
    /// Builds the diagonal subalgebra generated by the variable tuples,
    /// closing lazily so large products are never materialized. The closure
    /// runs seminaive: each round only touches tuples with at least one
    /// element discovered in the previous round.
    pub fn build(
        target: &FiniteAlgebra,
        alphabet: &SortedAlphabet,
        witnesses: Vec<Assignment>,
        budget: &GeometryBudget,
    ) -> Result<DiagonalKernel, GeometryError> {
        let mut elems: BTreeMap<String, Vec<DiagElem>> = BTreeMap::new();
        let mut index: BTreeMap<String, HashMap<Vec<Elem>, usize>> = BTreeMap::new();
        let mut var_elem = BTreeMap::new();
        for sort in &target.signature.sorts {
            elems.insert(sort.clone(), Vec::new());
            index.insert(sort.clone(), HashMap::new());
        }

        let mut size: u128 = 0;
        for (var, sort) in &alphabet.vars {
            let tuple: Vec<Elem> = witnesses
                .iter()
                .map(|a| a.get(var).expect("assignment total on alphabet"))
                .collect();
            let sort_index = index.get_mut(sort).expect("declared sort");
            let at = match sort_index.get(&tuple) {
                Some(&i) => i,
                None => {
                    let list = elems.get_mut(sort).unwrap();
                    list.push(DiagElem {
                        tuple: tuple.clone(),
                        origin: Origin::Var(var.clone()),
                    });
                    size += 1;
                    sort_index.insert(tuple, list.len() - 1);
                    list.len() - 1
                }
            };
            var_elem.insert(var.clone(), (sort.clone(), at));
        }

        // seminaive closure: `old` marks how much of each carrier previous
        // rounds already processed
        let mut old: BTreeMap<String, usize> = target
            .signature
            .sorts
            .iter()
            .map(|s| (s.clone(), 0))
            .collect();
        let mut first_round = true;
        let nw = witnesses.len();
        let mut tuple_scratch: Vec<Elem> = vec![0; nw];
        let mut args_scratch: Vec<Elem> = Vec::new();
        loop {
            let snapshot: BTreeMap<String, usize> = elems
                .iter()
                .map(|(s, v)| (s.clone(), v.len()))
                .collect();
            let mut added = false;
            for (op, ty) in &target.signature.ops {
                if ty.is_constant() {
                    if !first_round {
                        continue;
                    }
                    let tuple: Vec<Elem> = (0..nw).map(|_| target.apply(op, &[])).collect();
                    if !index[&ty.result].contains_key(&tuple) {
                        Self::insert_elem(
                            &mut elems,
                            &mut index,
                            &ty.result,
                            tuple,
                            Origin::App {
                                op: op.clone(),
                                args: vec![],
                            },
                            &mut size,
                            budget,
                        )?;
                        added = true;
                    }
                    continue;
                }
                let arity = ty.args.len();
                args_scratch.resize(arity, 0);
                // cover every tuple with >= 1 new argument exactly once:
                // position p takes new elements, earlier positions old ones,
                // later positions anything
                for p in 0..arity {
                    let ranges: Vec<(usize, usize)> = (0..arity)
                        .map(|pos| {
                            let sort = &ty.args[pos];
                            if pos < p {
                                (0, old[sort])
                            } else if pos == p {
                                (old[sort], snapshot[sort])
                            } else {
                                (0, snapshot[sort])
                            }
                        })
                        .collect();
                    if ranges.iter().any(|(lo, hi)| lo >= hi) {
                        continue;
                    }
                    let arg_lists: Vec<&Vec<DiagElem>> =
                        ty.args.iter().map(|s| &elems[s]).collect();
                    let mut indices: Vec<usize> = ranges.iter().map(|(lo, _)| *lo).collect();
                    let mut fresh: Vec<(Vec<Elem>, Origin)> = Vec::new();
                    loop {
                        for w in 0..nw {
                            for (k, list) in arg_lists.iter().enumerate() {
                                args_scratch[k] = list[indices[k]].tuple[w];
                            }
                            tuple_scratch[w] = target.apply(op, &args_scratch);
                        }
                        if !index[&ty.result].contains_key(tuple_scratch.as_slice()) {
                            let origin = Origin::App {
                                op: op.clone(),
                                args: indices
                                    .iter()
                                    .zip(&ty.args)
                                    .map(|(&i, s)| (s.clone(), i))
                                    .collect(),
                            };
                            // stage; inserting into `elems` here would alias
                            // the argument lists borrowed above
                            size += 1;
                            if size > budget.max_diagonal {
                                return Err(GeometryError::Budget {
                                    what: "diagonal subalgebra elements".to_string(),
                                    needed: size,
                                    budget: budget.max_diagonal,
                                });
                            }
                            // the index probe prevents staging duplicates
                            // within this range walk only when tuples repeat
                            // exactly; recheck at flush time
                            fresh.push((tuple_scratch.clone(), origin));
                            index
                                .get_mut(&ty.result)
                                .unwrap()
                                .insert(tuple_scratch.clone(), usize::MAX);
                        }
                        let mut pos = indices.len();
                        let mut wrapped = true;
                        while pos > 0 {
                            pos -= 1;
                            indices[pos] += 1;
                            if indices[pos] < ranges[pos].1 {
                                wrapped = false;
                                break;
                            }
                            indices[pos] = ranges[pos].0;
                        }
                        if wrapped {
                            break;
                        }
                    }
                    drop(arg_lists);
                    if !fresh.is_empty() {
                        added = true;
                        let list = elems.get_mut(&ty.result).unwrap();
                        let sort_index = index.get_mut(&ty.result).unwrap();
                        for (tuple, origin) in fresh {
                            list.push(DiagElem {
                                tuple: tuple.clone(),
                                origin,
                            });
                            sort_index.insert(tuple, list.len() - 1);
                        }
                    }
                }
            }
            old = snapshot;
            first_round = false;
            if !added {
                break;
            }
        }

        Ok(DiagonalKernel {
            alphabet: alphabet.clone(),
            target: target.clone(),
            witnesses,
            elems,
            index,
            var_elem,
        })
    }

    fn insert_elem(
        elems: &mut BTreeMap<String, Vec<DiagElem>>,
        index: &mut BTreeMap<String, HashMap<Vec<Elem>, usize>>,
        sort: &str,
        tuple: Vec<Elem>,
        origin: Origin,
        size: &mut u128,
        budget: &GeometryBudget,
    ) -> Result<(), GeometryError> {
        *size += 1;
        if *size > budget.max_diagonal {
            return Err(GeometryError::Budget {
                what: "diagonal subalgebra elements".to_string(),
                needed: *size,
                budget: budget.max_diagonal,
            });
        }
        let list = elems.get_mut(sort).unwrap();
        list.push(DiagElem {
            tuple: tuple.clone(),
            origin,
        });
        index.get_mut(sort).unwrap().insert(tuple, list.len() - 1);
        Ok(())
    }

    /// Per-sort sizes of the diagonal subalgebra.
    pub fn diagonal_sizes(&self) -> BTreeMap<String, usize> {
        self.elems
            .iter()
            .map(|(s, v)| (s.clone(), v.len()))
            .collect()
    }

    /// Evaluates the diagonal map at a term.
    pub fn delta(&self, term: &Term) -> Vec<Elem> {
        self.witnesses
            .iter()
            .map(|a| eval(&self.target, term, a).expect("well-sorted term over the alphabet"))
            .collect()
    }

    /// Membership of a pair in this kernel.
    pub fn contains_pair(&self, lhs: &Term, rhs: &Term) -> bool {
        self.delta(lhs) == self.delta(rhs)
    }

    /// One term reaching the given diagonal element, materialized from the
    /// recorded provenance.
    pub fn reach_term(&self, sort: &str, idx: usize) -> Term {
        match &self.elems[sort][idx].origin {
            Origin::Var(name) => Term::var(name.clone(), sort),
            Origin::App { op, args } => Term::App {
                op: op.clone(),
                sort: sort.to_string(),
                args: args
                    .iter()
                    .map(|(s, i)| self.reach_term(s, *i))
                    .collect(),
            },
        }
    }

    /// The canonical finite presentation: one pair per duplicate generator
    /// tuple and one pair per operation-table entry of the diagonal. Its
    /// closure over any algebra of the signature coincides with this
    /// kernel's closure.
    pub fn presentation(&self) -> EquationSystem {
        let mut pairs = Vec::new();
        for (var, (sort, idx)) in &self.var_elem {
            let reach = self.reach_term(sort, *idx);
            let var_term = Term::var(var.clone(), sort.clone());
            if reach != var_term {
                pairs.push((var_term, reach));
            }
        }
        for (op, ty) in &self.target.signature.ops {
            let pools: Vec<usize> = ty.args.iter().map(|s| self.elems[s].len()).collect();
            if pools.contains(&0) && !ty.is_constant() {
                continue;
            }
            let total: usize = pools.iter().product();
            let mut indices = vec![0usize; pools.len()];
            for _ in 0..total {
                let arg_elems: Vec<&DiagElem> = indices
                    .iter()
                    .zip(&ty.args)
                    .map(|(&i, s)| &self.elems[s][i])
                    .collect();
                let tuple: Vec<Elem> = (0..self.witnesses.len())
                    .map(|w| {
                        let args: Vec<Elem> = arg_elems.iter().map(|e| e.tuple[w]).collect();
                        self.target.apply(op, &args)
                    })
                    .collect();
                let result_idx = self.index[&ty.result][&tuple];
                let lhs = Term::App {
                    op: op.clone(),
                    sort: ty.result.clone(),
                    args: indices
                        .iter()
                        .zip(&ty.args)
                        .map(|(&i, s)| self.reach_term(s, i))
                        .collect(),
                };
                let rhs = self.reach_term(&ty.result, result_idx);
                if lhs != rhs {
                    pairs.push((lhs, rhs));
                }
                for pos in (0..indices.len()).rev() {
                    indices[pos] += 1;
                    if indices[pos] < pools[pos] {
                        break;
                    }
                    indices[pos] = 0;
                }
            }
        }
        pairs.sort();
        pairs.dedup();
        EquationSystem {
            alphabet: self.alphabet.clone(),
            pairs,
        }
    }
}

/// Decides `ker(fine) subseteq ker(coarse)` by closing the paired generator
/// tuples inside the product of the two diagonals and checking that the
/// result is left-projection functional. On failure returns a term pair in
/// the first kernel but not the second. Seminaive, like the diagonal build.
pub fn kernel_included(
    fine: &DiagonalKernel,
    coarse: &DiagonalKernel,
    budget: &GeometryBudget,
) -> Result<Result<(), (Term, Term)>, GeometryError> {
    // one graph entry per reached element of the product: the pair of
    // indices, plus provenance for witness extraction
    struct Entry {
        left: usize,
        right: usize,
        origin: Origin,
    }

    struct Graph {
        pairs: BTreeMap<String, Vec<Entry>>,
        seen: BTreeMap<String, HashMap<(usize, usize), usize>>,
        functional: BTreeMap<String, HashMap<usize, usize>>,
        size: u128,
        budget: u128,
    }

    enum Pushed {
        New,
        Known,
        Conflict { existing: usize, candidate: Origin },
    }

    impl Graph {
        fn push(
            &mut self,
            sort: &str,
            left: usize,
            right: usize,
            origin: Origin,
        ) -> Result<Pushed, GeometryError> {
            if self.seen[sort].contains_key(&(left, right)) {
                return Ok(Pushed::Known);
            }
            self.size += 1;
            if self.size > self.budget {
                return Err(GeometryError::Budget {
                    what: "kernel comparison graph".to_string(),
                    needed: self.size,
                    budget: self.budget,
                });
            }
            if let Some(&existing) = self.functional[sort].get(&left) {
                let other_right = self.pairs[sort][existing].right;
                if other_right != right {
                    // same left component, different right: separating pair
                    return Ok(Pushed::Conflict {
                        existing,
                        candidate: origin,
                    });
                }
            }
            let list = self.pairs.get_mut(sort).unwrap();
            list.push(Entry {
                left,
                right,
                origin,
            });
            let at = list.len() - 1;
            self.seen.get_mut(sort).unwrap().insert((left, right), at);
            self.functional.get_mut(sort).unwrap().entry(left).or_insert(at);
            Ok(Pushed::New)
        }

        fn term_of(&self, sort: &str, at: usize) -> Term {
            match &self.pairs[sort][at].origin {
                Origin::Var(name) => Term::var(name.clone(), sort),
                Origin::App { op, args } => Term::App {
                    op: op.clone(),
                    sort: sort.to_string(),
                    args: args.iter().map(|(s, i)| self.term_of(s, *i)).collect(),
                },
            }
        }

        fn term_of_origin(&self, sort: &str, origin: &Origin) -> Term {
            match origin {
                Origin::Var(name) => Term::var(name.clone(), sort),
                Origin::App { op, args } => Term::App {
                    op: op.clone(),
                    sort: sort.to_string(),
                    args: args.iter().map(|(s, i)| self.term_of(s, *i)).collect(),
                },
            }
        }
    }

    let sig = &fine.target.signature;
    let mut graph = Graph {
        pairs: BTreeMap::new(),
        seen: BTreeMap::new(),
        functional: BTreeMap::new(),
        size: 0,
        budget: budget.max_diagonal,
    };
    for sort in &sig.sorts {
        graph.pairs.insert(sort.clone(), Vec::new());
        graph.seen.insert(sort.clone(), HashMap::new());
        graph.functional.insert(sort.clone(), HashMap::new());
    }

    let witness =
        |graph: &Graph, sort: &str, existing: usize, candidate: &Origin| -> (Term, Term) {
            (
                graph.term_of(sort, existing),
                graph.term_of_origin(sort, candidate),
            )
        };

    for (var, sort) in &fine.alphabet.vars {
        let (_, li) = &fine.var_elem[var];
        let (_, ri) = &coarse.var_elem[var];
        if let Pushed::Conflict {
            existing,
            candidate,
        } = graph.push(sort, *li, *ri, Origin::Var(var.clone()))?
        {
            return Ok(Err(witness(&graph, sort, existing, &candidate)));
        }
    }

    let mut old: BTreeMap<String, usize> =
        sig.sorts.iter().map(|s| (s.clone(), 0)).collect();
    let mut first_round = true;
    let nw_left = fine.witnesses.len();
    let nw_right = coarse.witnesses.len();
    let mut left_tuple: Vec<Elem> = vec![0; nw_left];
    let mut right_tuple: Vec<Elem> = vec![0; nw_right];
    let mut args_scratch: Vec<Elem> = Vec::new();
    loop {
        let snapshot: BTreeMap<String, usize> = graph
            .pairs
            .iter()
            .map(|(s, v)| (s.clone(), v.len()))
            .collect();
        let mut added = false;
        for (op, ty) in &sig.ops {
            if ty.is_constant() {
                if !first_round {
                    continue;
                }
                let lt: Vec<Elem> = (0..nw_left).map(|_| fine.target.apply(op, &[])).collect();
                let rt: Vec<Elem> = (0..nw_right)
                    .map(|_| coarse.target.apply(op, &[]))
                    .collect();
                let li = fine.index[&ty.result][&lt];
                let ri = coarse.index[&ty.result][&rt];
                let origin = Origin::App {
                    op: op.clone(),
                    args: vec![],
                };
                match graph.push(&ty.result, li, ri, origin)? {
                    Pushed::Conflict {
                        existing,
                        candidate,
                    } => return Ok(Err(witness(&graph, &ty.result, existing, &candidate))),
                    Pushed::New => added = true,
                    Pushed::Known => {}
                }
                continue;
            }
            let arity = ty.args.len();
            args_scratch.resize(arity, 0);
            for p in 0..arity {
                let ranges: Vec<(usize, usize)> = (0..arity)
                    .map(|pos| {
                        let sort = &ty.args[pos];
                        if pos < p {
                            (0, old[sort])
                        } else if pos == p {
                            (old[sort], snapshot[sort])
                        } else {
                            (0, snapshot[sort])
                        }
                    })
                    .collect();
                if ranges.iter().any(|(lo, hi)| lo >= hi) {
                    continue;
                }
                let mut indices: Vec<usize> = ranges.iter().map(|(lo, _)| *lo).collect();
                let mut staged: Vec<(usize, usize, Origin)> = Vec::new();
                loop {
                    for w in 0..nw_left {
                        for (k, s) in ty.args.iter().enumerate() {
                            let entry = &graph.pairs[s][indices[k]];
                            args_scratch[k] = fine.elems[s][entry.left].tuple[w];
                        }
                        left_tuple[w] = fine.target.apply(op, &args_scratch);
                    }
                    for w in 0..nw_right {
                        for (k, s) in ty.args.iter().enumerate() {
                            let entry = &graph.pairs[s][indices[k]];
                            args_scratch[k] = coarse.elems[s][entry.right].tuple[w];
                        }
                        right_tuple[w] = coarse.target.apply(op, &args_scratch);
                    }
                    let li = fine.index[&ty.result][left_tuple.as_slice()];
                    let ri = coarse.index[&ty.result][right_tuple.as_slice()];
                    if !graph.seen[&ty.result].contains_key(&(li, ri)) {
                        let origin = Origin::App {
                            op: op.clone(),
                            args: indices
                                .iter()
                                .zip(&ty.args)
                                .map(|(&i, s)| (s.clone(), i))
                                .collect(),
                        };
                        staged.push((li, ri, origin));
                    }
                    let mut pos = indices.len();
                    let mut wrapped = true;
                    while pos > 0 {
                        pos -= 1;
                        indices[pos] += 1;
                        if indices[pos] < ranges[pos].1 {
                            wrapped = false;
                            break;
                        }
                        indices[pos] = ranges[pos].0;
                    }
                    if wrapped {
                        break;
                    }
                }
                for (li, ri, origin) in staged {
                    match graph.push(&ty.result, li, ri, origin)? {
                        Pushed::Conflict {
                            existing,
                            candidate,
                        } => {
                            return Ok(Err(witness(&graph, &ty.result, existing, &candidate)))
                        }
                        Pushed::New => added = true,
                        Pushed::Known => {}
                    }
                }
            }
        }
        old = snapshot;
        first_round = false;
        if !added {
            break;
        }
    }
    Ok(Ok(()))
}

/// Exact equality of two kernels, by mutual inclusion.
pub fn kernel_equal(
    a: &DiagonalKernel,
    b: &DiagonalKernel,
    budget: &GeometryBudget,
) -> Result<bool, GeometryError> {
    Ok(kernel_included(a, b, budget)?.is_ok() && kernel_included(b, a, budget)?.is_ok())
}

/// Outcome of an exact closure comparison across two algebras.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ClosureCompare {
    Equal,
    /// A pair in exactly one of the two closures.
    Separated {
        lhs: Term,
        rhs: Term,
        /// true when the pair lies in the closure over the first algebra
        in_first: bool,
    },
}

/// Decides whether the closures of `system` over the two algebras coincide,
/// by diagonal factoring in both directions.
pub fn closure_equal(
    system: &EquationSystem,
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    budget: &GeometryBudget,
) -> Result<ClosureCompare, GeometryError> {
    let s1 = solutions(system, h1, budget)?;
    let s2 = solutions(system, h2, budget)?;
    let k1 = DiagonalKernel::build(h1, &system.alphabet, s1, budget)?;
    let k2 = DiagonalKernel::build(h2, &system.alphabet, s2, budget)?;
    if let Err((lhs, rhs)) = kernel_included(&k1, &k2, budget)? {
        return Ok(ClosureCompare::Separated {
            lhs,
            rhs,
            in_first: true,
        });
    }
    if let Err((lhs, rhs)) = kernel_included(&k2, &k1, budget)? {
        return Ok(ClosureCompare::Separated {
            lhs,
            rhs,
            in_first: false,
        });
    }
    Ok(ClosureCompare::Equal)
}

/// Decides whether the congruence generated by the pairs of `system` is
/// already algebraically closed over `target`.
///
/// The generated congruence is saturated by congruence closure, capped by
/// the diagonal sizes: the quotient surjects onto the diagonal subalgebra,
/// so the two coincide exactly when saturation stabilizes within the caps.
pub fn is_closed(
    system: &EquationSystem,
    target: &FiniteAlgebra,
    budget: &GeometryBudget,
) -> Result<bool, GeometryError> {
    let sols = solutions(system, target, budget)?;
    let kernel = DiagonalKernel::build(target, &system.alphabet, sols, budget)?;
    let caps = kernel.diagonal_sizes();

    let mut engine = cc::CongruenceClosure::new(&target.signature);
    for (var, sort) in &system.alphabet.vars {
        engine.add_term(&Term::var(var.clone(), sort.clone()), &system.alphabet);
    }
    for (lhs, rhs) in &system.pairs {
        let a = engine.add_term(lhs, &system.alphabet);
        let b = engine.add_term(rhs, &system.alphabet);
        engine.merge(a, b);
    }
    match engine.saturate(&caps) {
        cc::Saturation::Overflow(_) => Ok(false),
        cc::Saturation::Complete(counts) => Ok(counts
            .iter()
            .all(|(sort, &n)| n == caps.get(sort).copied().unwrap_or(0))),
    }
}

/// A closed congruence over an algebra, for the equivalence scan.
#[derive(Debug, Clone)]
pub struct ClosedCongruence {
    pub kernel: DiagonalKernel,
}

/// Enumerates every algebraically closed congruence on `F(X)` over the
/// algebra: all intersections of assignment kernels, including the empty
/// intersection (the everything-congruence), deduplicated by exact kernel
/// equality.
pub fn closed_congruences(
    target: &FiniteAlgebra,
    alphabet: &SortedAlphabet,
    budget: &GeometryBudget,
) -> Result<Vec<ClosedCongruence>, GeometryError> {
    let assignments = {
        let mut total: u128 = 1;
        for sort in alphabet.vars.values() {
            total = total.saturating_mul(target.carrier_size(sort).max(1) as u128);
        }
        if total > budget.max_assignments {
            return Err(GeometryError::Budget {
                what: "assignments".to_string(),
                needed: total,
                budget: budget.max_assignments,
            });
        }
        all_assignments(target, alphabet)
    };

    let mut kernels: Vec<ClosedCongruence> = Vec::new();
    // seed: the everything-congruence (empty witness set)
    kernels.push(ClosedCongruence {
        kernel: DiagonalKernel::build(target, alphabet, Vec::new(), budget)?,
    });

    let mut frontier = vec![0usize];
    while let Some(at) = frontier.pop() {
        let base_witnesses = kernels[at].kernel.witnesses.clone();
        for a in &assignments {
            if base_witnesses.contains(a) {
                continue;
            }
            let mut extended = base_witnesses.clone();
            extended.push(a.clone());
            extended.sort();
            let candidate = DiagonalKernel::build(target, alphabet, extended, budget)?;
            let mut known = false;
            for existing in &kernels {
                if kernel_equal(&existing.kernel, &candidate, budget)? {
                    known = true;
                    break;
                }
            }
            if !known {
                if kernels.len() as u128 >= budget.max_kernels {
                    return Err(GeometryError::Budget {
                        what: "closed congruences".to_string(),
                        needed: kernels.len() as u128 + 1,
                        budget: budget.max_kernels,
                    });
                }
                kernels.push(ClosedCongruence { kernel: candidate });
                frontier.push(kernels.len() - 1);
            }
        }
    }
    Ok(kernels)
}

/// Verdict of the bounded geometric-equivalence scan.
#[derive(Debug, Clone, Serialize)]
pub enum GeomVerdict {
    EquivalentUpToBound,
    NotEquivalent(GeomWitness),
}

/// A machine-checkable inequivalence witness: an alphabet, a finite system
/// presenting a congruence closed over one algebra but not the other, and a
/// separating pair.
#[derive(Debug, Clone, Serialize)]
pub struct GeomWitness {
    pub alphabet: SortedAlphabet,
    pub system: EquationSystem,
    pub lhs: Term,
    pub rhs: Term,
    /// Index (1 or 2) of the algebra over which `system` is closed and the
    /// pair is NOT entailed; over the other algebra the pair is entailed.
    pub closed_over: u8,
}

impl GeomVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, GeomVerdict::EquivalentUpToBound)
    }
}

/// Canonical scan alphabets: every per-sort generator-count vector with
/// counts up to the bound, excluding the empty one, in lexicographic order.
/// Variables are named `x<i>_<sort>`.
pub fn scan_alphabets(sorts: &[String], max_generators: usize) -> Vec<SortedAlphabet> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; sorts.len()];
    loop {
        if counts.iter().any(|&c| c > 0) {
            let mut alphabet = SortedAlphabet::new();
            for (sort, &count) in sorts.iter().zip(&counts) {
                for i in 1..=count {
                    alphabet.vars.insert(format!("x{i}_{sort}"), sort.clone());
                }
            }
            out.push(alphabet);
        }
        let mut pos = counts.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            counts[pos] += 1;
            if counts[pos] <= max_generators {
                break;
            }
            counts[pos] = 0;
        }
    }
}

/// Bounded decision of geometric equivalence: for every scan alphabet, every
/// congruence closed over one algebra must be closed over the other, in both
/// directions. Inequivalence returns the first witness in canonical order;
/// equivalence is only certified up to the generator bound.
pub fn geom_equivalent(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    max_generators: usize,
    budget: &GeometryBudget,
) -> Result<GeomVerdict, GeometryError> {
    let sorts: Vec<String> = h1.signature.sorts.iter().cloned().collect();
    for alphabet in scan_alphabets(&sorts, max_generators) {
        if let Some(w) = half_scan(h1, h2, &alphabet, 1, budget)? {
            return Ok(GeomVerdict::NotEquivalent(w));
        }
        if let Some(w) = half_scan(h2, h1, &alphabet, 2, budget)? {
            return Ok(GeomVerdict::NotEquivalent(w));
        }
    }
    Ok(GeomVerdict::EquivalentUpToBound)
}

/// Checks that every congruence closed over `from` is closed over `to`.
fn half_scan(
    from: &FiniteAlgebra,
    to: &FiniteAlgebra,
    alphabet: &SortedAlphabet,
    from_index: u8,
    budget: &GeometryBudget,
) -> Result<Option<GeomWitness>, GeometryError> {
    let closed = closed_congruences(from, alphabet, budget)?;
    let to_assignments = all_assignments(to, alphabet);
    for c in &closed {
        // solutions of the congruence in `to`: assignments whose kernel
        // includes it
        let mut sols = Vec::new();
        for a in &to_assignments {
            let single = DiagonalKernel::build(to, alphabet, vec![a.clone()], budget)?;
            if kernel_included(&c.kernel, &single, budget)?.is_ok() {
                sols.push(a.clone());
            }
        }
        let reclosed = DiagonalKernel::build(to, alphabet, sols, budget)?;
        // the closure over `to` always contains the congruence; closedness
        // fails exactly when the reverse inclusion fails
        if let Err((lhs, rhs)) = kernel_included(&reclosed, &c.kernel, budget)? {
            return Ok(Some(GeomWitness {
                alphabet: alphabet.clone(),
                system: c.kernel.presentation(),
                lhs,
                rhs,
                closed_over: from_index,
            }));
        }
    }
    Ok(None)
}

/// Transports an equation system along a verified fragment bijection: each
/// side is normalized, mapped through the bijection, and read back as a
/// canonical term.
pub fn transport_closure(
    variety: VarietyId,
    s: &InducedS,
    system: &EquationSystem,
) -> Result<EquationSystem, GeometryError> {
    if !matches!(s.verdict, SVerdict::BoundedOk) {
        return Err(GeometryError::RejectedBijection);
    }
    let env = BTreeMap::new();
    let mut pairs = Vec::new();
    for (lhs, rhs) in &system.pairs {
        let mapped_side = |side: &Term| -> Result<Term, GeometryError> {
            let nf = crate::freealg::nf_eval(variety, side, &env)
                .map_err(|e| GeometryError::BadSystem(e.to_string()))?;
            let image = s
                .image_of(&nf)
                .ok_or_else(|| GeometryError::OutsideFragment(side.to_string()))?;
            Ok(nf_to_term(variety, image))
        };
        pairs.push((mapped_side(lhs)?, mapped_side(rhs)?));
    }
    Ok(EquationSystem {
        alphabet: system.alphabet.clone(),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::{act_variety, VarietyId, ACT_MUL, ACT_OP};
    use crate::model::AlgebraBuilder;
    use crate::signature::Signature;
    use crate::verbal::{induced_s, WordSystem};

    fn budget() -> GeometryBudget {
        GeometryBudget::default()
    }

    fn semigroup_sig() -> Signature {
        let mut sig = Signature::with_sorts(["s"]);
        sig.add_op("mul", vec!["s", "s"], "s");
        sig
    }

    fn left_proj() -> FiniteAlgebra {
        AlgebraBuilder::new(&semigroup_sig())
            .carrier("s", &["a", "b"])
            .table("mul", &["a", "a", "b", "b"])
            .build()
    }

    fn right_proj() -> FiniteAlgebra {
        AlgebraBuilder::new(&semigroup_sig())
            .carrier("s", &["a", "b"])
            .table("mul", &["a", "b", "a", "b"])
            .build()
    }

    fn act_with_empty_sort2() -> FiniteAlgebra {
        let v = act_variety();
        AlgebraBuilder::new(&v.signature)
            .carrier("1", &["a", "b"])
            .carrier("2", &[])
            .table(ACT_MUL, &["a", "a", "b", "b"])
            .build()
    }

    fn x(n: &str) -> Term {
        Term::var(n, "s")
    }

    fn mul(a: Term, b: Term) -> Term {
        Term::app(&semigroup_sig(), "mul", vec![a, b]).unwrap()
    }

    #[test]
    fn empty_system_has_all_assignments_as_solutions() {
        let alg = left_proj();
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]),
            vec![],
        )
        .unwrap();
        assert_eq!(solutions(&system, &alg, &budget()).unwrap().len(), 4);
    }

    #[test]
    fn solutions_filter_by_pairs() {
        // mul(x1,x2) = x2 on the left projection means x1 = x2
        let alg = left_proj();
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]),
            vec![(mul(x("x1"), x("x2")), x("x2"))],
        )
        .unwrap();
        let sols = solutions(&system, &alg, &budget()).unwrap();
        assert_eq!(sols.len(), 2);
        for a in sols {
            assert_eq!(a.get("x1"), a.get("x2"));
        }
    }

    #[test]
    fn empty_carrier_gives_no_solutions_and_everything_closure() {
        let alg = act_with_empty_sort2();
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("g", "1"), ("v", "2")]),
            vec![],
        )
        .unwrap();
        assert!(solutions(&system, &alg, &budget()).unwrap().is_empty());
        // every same-sort pair is in the closure
        let g = Term::var("g", "1");
        let sig = &act_variety().signature;
        let gg = Term::app(sig, ACT_MUL, vec![g.clone(), g.clone()]).unwrap();
        assert!(closure_member(&system, &alg, (&g, &gg), &budget()).unwrap());
        let v = Term::var("v", "2");
        let gv = Term::app(sig, ACT_OP, vec![g.clone(), v.clone()]).unwrap();
        assert!(closure_member(&system, &alg, (&v, &gv), &budget()).unwrap());
    }

    #[test]
    fn closure_membership_reflexive_and_entailed() {
        let alg = left_proj();
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]),
            vec![(mul(x("x1"), x("x2")), x("x2"))],
        )
        .unwrap();
        let t = mul(x("x1"), x("x1"));
        assert!(closure_member(&system, &alg, (&t, &t), &budget()).unwrap());
        // solutions have x1 = x2, so the pair (x1, x2) is entailed
        assert!(closure_member(&system, &alg, (&x("x1"), &x("x2")), &budget()).unwrap());
        // and mul(x2,x1) = x1 is entailed as well
        assert!(
            closure_member(&system, &alg, (&mul(x("x2"), x("x1")), &x("x1")), &budget()).unwrap()
        );
    }

    #[test]
    fn diagonal_kernel_tracks_reach_terms() {
        let alg = left_proj();
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        let sols = all_assignments(&alg, &alphabet);
        let k = DiagonalKernel::build(&alg, &alphabet, sols, &budget()).unwrap();
        for (i, elem) in k.elems["s"].iter().enumerate() {
            assert_eq!(k.delta(&k.reach_term("s", i)), elem.tuple);
        }
    }

    #[test]
    fn kernel_inclusion_reflexive() {
        let alg = left_proj();
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        let sols = all_assignments(&alg, &alphabet);
        let k = DiagonalKernel::build(&alg, &alphabet, sols, &budget()).unwrap();
        assert!(kernel_included(&k, &k, &budget()).unwrap().is_ok());
    }

    #[test]
    fn closure_equal_same_algebra() {
        let alg = left_proj();
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]),
            vec![],
        )
        .unwrap();
        assert_eq!(
            closure_equal(&system, &alg, &alg, &budget()).unwrap(),
            ClosureCompare::Equal
        );
    }

    #[test]
    fn left_vs_right_projection_closures_differ() {
        // the minimal closure over the left projection contains
        // (mul(x1,x2), x1); over the right projection (mul(x1,x2), x2)
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]),
            vec![],
        )
        .unwrap();
        let compare = closure_equal(&system, &left_proj(), &right_proj(), &budget()).unwrap();
        match compare {
            ClosureCompare::Separated { lhs, rhs, in_first } => {
                // replay the witness through plain membership
                let member1 =
                    closure_member(&system, &left_proj(), (&lhs, &rhs), &budget()).unwrap();
                let member2 =
                    closure_member(&system, &right_proj(), (&lhs, &rhs), &budget()).unwrap();
                assert_ne!(member1, member2);
                assert_eq!(member1, in_first);
            }
            ClosureCompare::Equal => panic!("projections must separate"),
        }
    }

    /// Oracle for closure comparison: enumerate terms to a depth, evaluate
    /// each under every solution once, and demand that the two partitions
    /// by value vector coincide. Equivalent to testing every pair, without
    /// the quadratic rescan.
    pub(crate) fn pair_enumeration_oracle(
        system: &EquationSystem,
        h1: &FiniteAlgebra,
        h2: &FiniteAlgebra,
        depth: usize,
        budget: &GeometryBudget,
    ) -> bool {
        let terms = crate::term::enumerate_terms(&h1.signature, &system.alphabet, depth);
        let s1 = solutions(system, h1, budget).unwrap();
        let s2 = solutions(system, h2, budget).unwrap();
        let key = |alg: &FiniteAlgebra, sols: &[Assignment], t: &Term| -> Vec<Elem> {
            sols.iter().map(|a| eval(alg, t, a).unwrap()).collect()
        };
        // group terms per sort by their value vector under side 1, then
        // check each group is constant under side 2, and conversely
        let mut groups1: BTreeMap<(String, Vec<Elem>), Vec<usize>> = BTreeMap::new();
        let mut groups2: BTreeMap<(String, Vec<Elem>), Vec<usize>> = BTreeMap::new();
        for (i, t) in terms.iter().enumerate() {
            groups1
                .entry((t.sort().to_string(), key(h1, &s1, t)))
                .or_default()
                .push(i);
            groups2
                .entry((t.sort().to_string(), key(h2, &s2, t)))
                .or_default()
                .push(i);
        }
        let constant_under = |groups: &BTreeMap<(String, Vec<Elem>), Vec<usize>>,
                              alg: &FiniteAlgebra,
                              sols: &[Assignment]|
         -> bool {
            groups.values().all(|members| {
                let first = key(alg, sols, &terms[members[0]]);
                members.iter().all(|&i| key(alg, sols, &terms[i]) == first)
            })
        };
        constant_under(&groups1, h2, &s2) && constant_under(&groups2, h1, &s1)
    }

    #[test]
    fn closure_equal_agrees_with_pair_enumeration_oracle() {
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        let algebras = [left_proj(), right_proj()];
        let systems = [
            EquationSystem::new(alphabet.clone(), vec![]).unwrap(),
            EquationSystem::new(alphabet.clone(), vec![(mul(x("x1"), x("x2")), x("x2"))]).unwrap(),
            EquationSystem::new(alphabet.clone(), vec![(mul(x("x1"), x("x1")), x("x1"))]).unwrap(),
        ];
        for system in &systems {
            for h1 in &algebras {
                for h2 in &algebras {
                    let exact =
                        closure_equal(system, h1, h2, &budget()).unwrap() == ClosureCompare::Equal;
                    let oracle = pair_enumeration_oracle(system, h1, h2, 3, &budget());
                    assert_eq!(exact, oracle, "disagreement on {system:?}");
                }
            }
        }
    }

    #[test]
    fn single_hom_kernels_are_closed() {
        let alg = left_proj();
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        for a in all_assignments(&alg, &alphabet) {
            let k = DiagonalKernel::build(&alg, &alphabet, vec![a], &budget()).unwrap();
            let presentation = k.presentation();
            assert!(is_closed(&presentation, &alg, &budget()).unwrap());
        }
    }

    #[test]
    fn empty_system_not_closed_when_solutions_separate() {
        // the diagonal congruence is strictly finer than its closure here
        let alg = left_proj();
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]),
            vec![],
        )
        .unwrap();
        assert!(!is_closed(&system, &alg, &budget()).unwrap());
    }

    #[test]
    fn everything_congruence_closed_without_solutions() {
        let alg = act_with_empty_sort2();
        let sig = &act_variety().signature;
        let g = Term::var("g", "1");
        let v = Term::var("v", "2");
        let system = EquationSystem::new(
            SortedAlphabet::from_pairs([("g", "1"), ("v", "2")]),
            vec![
                (
                    g.clone(),
                    Term::app(sig, ACT_MUL, vec![g.clone(), g.clone()]).unwrap(),
                ),
                (
                    v.clone(),
                    Term::app(sig, ACT_OP, vec![g.clone(), v.clone()]).unwrap(),
                ),
            ],
        )
        .unwrap();
        // no solutions: sort 2 is empty; the collapsed congruence is closed
        assert!(solutions(&system, &alg, &budget()).unwrap().is_empty());
        assert!(is_closed(&system, &alg, &budget()).unwrap());
    }

    #[test]
    fn closed_congruence_enumeration_is_deduplicated() {
        let alg = left_proj();
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        let closed = closed_congruences(&alg, &alphabet, &budget()).unwrap();
        for (i, a) in closed.iter().enumerate() {
            for b in closed.iter().skip(i + 1) {
                assert!(!kernel_equal(&a.kernel, &b.kernel, &budget()).unwrap());
            }
        }
        assert!(closed.len() >= 2);
    }

    #[test]
    fn geom_equivalence_reflexive() {
        let alg = left_proj();
        assert!(geom_equivalent(&alg, &alg, 2, &budget())
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn geom_equivalence_with_isomorphic_copy() {
        let alg = left_proj();
        let iso = AlgebraBuilder::new(&semigroup_sig())
            .carrier("s", &["u", "w"])
            .table("mul", &["u", "u", "w", "w"])
            .build();
        assert!(geom_equivalent(&alg, &iso, 2, &budget())
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn left_and_right_projection_not_equivalent() {
        let verdict = geom_equivalent(&left_proj(), &right_proj(), 2, &budget()).unwrap();
        match verdict {
            GeomVerdict::NotEquivalent(w) => {
                // replay: membership must differ across the algebras
                let m_left =
                    closure_member(&w.system, &left_proj(), (&w.lhs, &w.rhs), &budget()).unwrap();
                let m_right =
                    closure_member(&w.system, &right_proj(), (&w.lhs, &w.rhs), &budget()).unwrap();
                assert_ne!(m_left, m_right);
            }
            GeomVerdict::EquivalentUpToBound => panic!("expected inequivalence"),
        }
    }

    #[test]
    fn geom_equivalence_verdicts_symmetric() {
        let a = left_proj();
        let b = right_proj();
        let ab = geom_equivalent(&a, &b, 2, &budget()).unwrap().is_equivalent();
        let ba = geom_equivalent(&b, &a, 2, &budget()).unwrap().is_equivalent();
        assert_eq!(ab, ba);
    }

    #[test]
    fn transport_by_identity_is_identity() {
        let v = act_variety();
        let w = WordSystem::identity(&v.signature);
        let alphabet = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1"), ("y", "2")]);
        let s = induced_s(VarietyId::Act, &alphabet, &w, 4).unwrap();
        let sig = &v.signature;
        let system = EquationSystem::new(
            alphabet.clone(),
            vec![(
                Term::app(sig, ACT_MUL, vec![Term::var("x1", "1"), Term::var("x2", "1")]).unwrap(),
                Term::var("x1", "1"),
            )],
        )
        .unwrap();
        let moved = transport_closure(VarietyId::Act, &s, &system).unwrap();
        assert_eq!(moved.pairs.len(), 1);
        assert!(crate::freealg::nf_equal(
            VarietyId::Act,
            &moved.pairs[0].0,
            &system.pairs[0].0,
            &BTreeMap::new()
        )
        .unwrap());
        // transported pairs stay same-sorted
        moved.validate().unwrap();
    }

    #[test]
    fn transport_outside_fragment_errors() {
        let v = act_variety();
        let w = WordSystem::identity(&v.signature);
        let alphabet = SortedAlphabet::from_pairs([("x1", "1")]);
        let s = induced_s(VarietyId::Act, &alphabet, &w, 2).unwrap();
        let sig = &v.signature;
        let x1 = Term::var("x1", "1");
        let big = Term::app(
            sig,
            ACT_MUL,
            vec![
                Term::app(sig, ACT_MUL, vec![x1.clone(), x1.clone()]).unwrap(),
                x1.clone(),
            ],
        )
        .unwrap();
        let system = EquationSystem::new(alphabet, vec![(big, x1)]).unwrap();
        assert!(matches!(
            transport_closure(VarietyId::Act, &s, &system),
            Err(GeometryError::OutsideFragment(_))
        ));
    }

    #[test]
    fn solutions_of_closure_presentation_match() {
        // Galois: the presentation of T'' has exactly T's solutions
        let alg = left_proj();
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        for system in [
            EquationSystem::new(alphabet.clone(), vec![]).unwrap(),
            EquationSystem::new(alphabet.clone(), vec![(mul(x("x1"), x("x2")), x("x2"))]).unwrap(),
        ] {
            let sols = solutions(&system, &alg, &budget()).unwrap();
            let kernel =
                DiagonalKernel::build(&alg, &alphabet, sols.clone(), &budget()).unwrap();
            let again = solutions(&kernel.presentation(), &alg, &budget()).unwrap();
            assert_eq!(sols, again);
        }
    }

    #[test]
    fn non_entailed_pair_strictly_shrinks_solutions() {
        let alg = left_proj();
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        let system = EquationSystem::new(alphabet.clone(), vec![]).unwrap();
        let pair = (mul(x("x1"), x("x2")), x("x2"));
        assert!(!closure_member(&system, &alg, (&pair.0, &pair.1), &budget()).unwrap());
        let mut extended = system.clone();
        extended.pairs.push(pair);
        let before = solutions(&system, &alg, &budget()).unwrap().len();
        let after = solutions(&extended, &alg, &budget()).unwrap().len();
        assert!(after < before);
    }

    #[test]
    fn solutions_antitone_in_system() {
        let alg = left_proj();
        let alphabet = SortedAlphabet::from_pairs([("x1", "s"), ("x2", "s")]);
        let small = EquationSystem::new(alphabet.clone(), vec![]).unwrap();
        let big = EquationSystem::new(alphabet, vec![(mul(x("x1"), x("x2")), x("x2"))]).unwrap();
        let sols_small = solutions(&small, &alg, &budget()).unwrap();
        let sols_big = solutions(&big, &alg, &budget()).unwrap();
        for a in &sols_big {
            assert!(sols_small.contains(a));
        }
        assert!(sols_big.len() < sols_small.len());
    }
}
