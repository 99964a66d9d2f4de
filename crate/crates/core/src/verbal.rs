//! Verbal operations, word systems, derived algebras, and the bounded
//! machinery for the induced bijections `s_F` on free-algebra fragments.
//!
//! A word of type `(i1,...,in; j)` is a sort-`j` term over the designated
//! variables `x1:i1, ..., xn:in`; unused designated variables are legal. A
//! word system picks one word per operation symbol and induces on every
//! algebra `H` the derived algebra: same carriers, tables given by
//! evaluating the words.
//!
//! Whether a word system admits the bijections required of a strongly
//! stable automorphism is undecidable for arbitrary varieties; for the
//! built-in varieties it is checked on free fragments up to a size bound.
//! Rejection is definitive and witness-backed; acceptance is only ever
//! "up to the bound".

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::freealg::{
    apply_free_op, decompose, eval_term_nf, free_elements_up_to, Decomposition, NormalForm,
    VarietyId,
};
use crate::model::{
    eval, hom_violation, in_variety, Assignment, Elem, FiniteAlgebra, ModelError, OpTable,
    SortedMap,
};
use crate::signature::{OpType, Signature, SortedAlphabet, VarietySpec};
use crate::term::Term;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerbalError {
    #[error("word for `{op}` has sort `{actual}`, expected `{expected}`")]
    WordSort {
        op: String,
        expected: String,
        actual: String,
    },
    #[error("word for `{op}` uses `{var}`, which is not a designated variable")]
    ForeignVariable { op: String, var: String },
    #[error("word for `{op}` uses `{var}` at sort `{actual}`, expected `{expected}`")]
    DesignatedVariableSort {
        op: String,
        var: String,
        expected: String,
        actual: String,
    },
    #[error("word system is missing a word for `{0}`")]
    MissingWord(String),
    #[error("word system names unknown operation `{0}`")]
    UnknownOp(String),
    #[error("argument {pos} has sort `{actual}`, expected `{expected}`")]
    ArgSort {
        pos: usize,
        expected: String,
        actual: String,
    },
    #[error("wrong number of arguments: expected {expected}, got {actual}")]
    ArgCount { expected: usize, actual: usize },
    #[error("required carrier of sort `{0}` is empty")]
    EmptyCarrier(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Canonical names of the designated variables of an n-ary word.
pub fn designated_vars(ty: &OpType) -> SortedAlphabet {
    SortedAlphabet::from_pairs(
        ty.args
            .iter()
            .enumerate()
            .map(|(i, sort)| (format!("x{}", i + 1), sort.clone())),
    )
}

/// A word: a term over the designated variables of its declared type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Word {
    pub op_type: OpType,
    pub body: Term,
}

impl Word {
    pub fn new(op_type: OpType, body: Term) -> Result<Word, VerbalError> {
        let w = Word { op_type, body };
        w.check("")?;
        Ok(w)
    }

    fn check(&self, op: &str) -> Result<(), VerbalError> {
        if self.body.sort() != self.op_type.result {
            return Err(VerbalError::WordSort {
                op: op.to_string(),
                expected: self.op_type.result.clone(),
                actual: self.body.sort().to_string(),
            });
        }
        let designated = designated_vars(&self.op_type);
        for (var, sort) in self.body.vars().vars {
            match designated.sort_of(&var) {
                None => {
                    return Err(VerbalError::ForeignVariable {
                        op: op.to_string(),
                        var,
                    })
                }
                Some(expected) if expected != sort => {
                    return Err(VerbalError::DesignatedVariableSort {
                        op: op.to_string(),
                        var,
                        expected: expected.to_string(),
                        actual: sort,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// The identity word `w(x1,...,xn) = op(x1,...,xn)`.
    pub fn identity(sig: &Signature, op: &str) -> Word {
        let ty = sig.op(op).expect("op declared").clone();
        let args = ty
            .args
            .iter()
            .enumerate()
            .map(|(i, sort)| Term::var(format!("x{}", i + 1), sort.clone()))
            .collect();
        let body = Term::app(sig, op, args).expect("identity word is well-sorted");
        Word { op_type: ty, body }
    }

    /// True when the body is a bare designated variable.
    pub fn is_projection(&self) -> bool {
        self.body.is_var()
    }

    /// Generator-occurrence count of the body.
    pub fn size(&self) -> usize {
        fn go(t: &Term) -> usize {
            match t {
                Term::Var { .. } => 1,
                Term::App { args, .. } => args.iter().map(go).sum(),
            }
        }
        go(&self.body)
    }
}

/// One word per operation symbol, with matching types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct WordSystem {
    pub words: BTreeMap<String, Word>,
}

impl WordSystem {
    pub fn new(sig: &Signature, words: BTreeMap<String, Word>) -> Result<WordSystem, VerbalError> {
        for op in words.keys() {
            if sig.op(op).is_none() {
                return Err(VerbalError::UnknownOp(op.clone()));
            }
        }
        for (op, ty) in &sig.ops {
            let word = words
                .get(op)
                .ok_or_else(|| VerbalError::MissingWord(op.clone()))?;
            if &word.op_type != ty {
                return Err(VerbalError::WordSort {
                    op: op.clone(),
                    expected: ty.to_string(),
                    actual: word.op_type.to_string(),
                });
            }
            word.check(op)?;
        }
        Ok(WordSystem { words })
    }

    /// The identity system `w_op = op(x1,...,xn)` for every op.
    pub fn identity(sig: &Signature) -> WordSystem {
        WordSystem {
            words: sig
                .ops
                .keys()
                .map(|op| (op.clone(), Word::identity(sig, op)))
                .collect(),
        }
    }

    pub fn is_identity(&self, sig: &Signature) -> bool {
        self == &WordSystem::identity(sig)
    }

    pub fn word(&self, op: &str) -> &Word {
        &self.words[op]
    }
}

/// Evaluates a word at a concrete argument tuple in a finite algebra.
pub fn verbal_apply(
    alg: &FiniteAlgebra,
    word: &Word,
    args: &[Elem],
) -> Result<Elem, VerbalError> {
    if args.len() != word.op_type.arity() {
        return Err(VerbalError::ArgCount {
            expected: word.op_type.arity(),
            actual: args.len(),
        });
    }
    let mut assignment = Assignment::default();
    for (i, (&value, sort)) in args.iter().zip(&word.op_type.args).enumerate() {
        if alg.carrier_size(sort) == 0 {
            return Err(VerbalError::EmptyCarrier(sort.clone()));
        }
        if value >= alg.carrier_size(sort) {
            return Err(VerbalError::ArgSort {
                pos: i,
                expected: sort.clone(),
                actual: format!("index {value} out of range"),
            });
        }
        assignment.values.insert(format!("x{}", i + 1), value);
    }
    Ok(eval(alg, &word.body, &assignment)?)
}

/// An algebra with the same carriers as its base but tables computed from a
/// word system.
#[derive(Debug, Clone)]
pub struct DerivedAlgebra {
    pub base: FiniteAlgebra,
    pub system: WordSystem,
    pub algebra: FiniteAlgebra,
}

/// Materializes every verbal-operation table over the base algebra.
pub fn derive_algebra(
    base: &FiniteAlgebra,
    system: &WordSystem,
) -> Result<DerivedAlgebra, VerbalError> {
    let mut tables = BTreeMap::new();
    for (op, ty) in &base.signature.ops {
        let word = system.word(op);
        let sizes: Vec<usize> = ty.args.iter().map(|s| base.carrier_size(s)).collect();
        let total: usize = sizes.iter().product();
        let mut data = Vec::with_capacity(total);
        if total > 0 {
            let mut args = vec![0usize; sizes.len()];
            for _ in 0..total {
                data.push(verbal_apply(base, word, &args)?);
                for pos in (0..args.len()).rev() {
                    args[pos] += 1;
                    if args[pos] < sizes[pos] {
                        break;
                    }
                    args[pos] = 0;
                }
            }
        }
        tables.insert(op.clone(), OpTable { data });
    }
    Ok(DerivedAlgebra {
        base: base.clone(),
        system: system.clone(),
        algebra: FiniteAlgebra {
            signature: base.signature.clone(),
            carriers: base.carriers.clone(),
            tables,
        },
    })
}

/// Probe check used as a rejection filter: if `H` lies in the variety but
/// the derived algebra does not, the word system cannot come from a strongly
/// stable automorphism.
pub fn check_derived_in_variety(
    base: &FiniteAlgebra,
    system: &WordSystem,
    variety: &VarietySpec,
) -> Result<bool, VerbalError> {
    let derived = derive_algebra(base, system)?;
    Ok(in_variety(&derived.algebra, variety))
}

/// True iff the homomorphism also commutes with every verbal operation,
/// checked table-exhaustively on the derived algebras.
pub fn naturality_check(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    map: &SortedMap,
    system: &WordSystem,
) -> Result<bool, VerbalError> {
    let d1 = derive_algebra(h1, system)?;
    let d2 = derive_algebra(h2, system)?;
    Ok(hom_violation(map, &d1.algebra, &d2.algebra).is_none())
}

/// Why a word system was rejected on a fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SRejection {
    /// Two distinct fragment elements share an image.
    NotInjective {
        first: String,
        second: String,
        image: String,
    },
    /// A fragment element is not reachable from the generators under the
    /// verbal operations, so no bijection fixing the generators exists.
    NotSurjective { missing: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SVerdict {
    Rejected(SRejection),
    BoundedOk,
}

/// The induced map `s_F` on a free fragment: the unique homomorphism
/// `F -> F_W*` fixing the generators, restricted to normal forms of size at
/// most the bound, plus the verdict of the bijectivity checks.
#[derive(Debug, Clone)]
pub struct InducedS {
    pub variety: VarietyId,
    pub alphabet: SortedAlphabet,
    pub bound: usize,
    /// fragment element -> image under s_F, in canonical fragment order.
    pub forward: Vec<(NormalForm, NormalForm)>,
    pub verdict: SVerdict,
}

impl InducedS {
    pub fn image_of(&self, nf: &NormalForm) -> Option<&NormalForm> {
        self.forward
            .iter()
            .find(|(src, _)| src == nf)
            .map(|(_, img)| img)
    }

    pub fn preimage_of(&self, nf: &NormalForm) -> Option<&NormalForm> {
        self.forward
            .iter()
            .find(|(_, img)| img == nf)
            .map(|(src, _)| src)
    }
}

/// Computes `s_F` by structural recursion over normal forms: generators map
/// to themselves and each operation node maps to its verbal operation
/// applied to the children's images.
pub fn apply_s(
    variety: VarietyId,
    system: &WordSystem,
    nf: &NormalForm,
) -> Result<NormalForm, VerbalError> {
    match decompose(nf) {
        Decomposition::Generator(_) => Ok(nf.clone()),
        Decomposition::App { op, args } => {
            let images = args
                .iter()
                .map(|a| apply_s(variety, system, a))
                .collect::<Result<Vec<_>, _>>()?;
            let word = system.word(op);
            let binding: BTreeMap<String, NormalForm> = images
                .into_iter()
                .enumerate()
                .map(|(i, nf)| (format!("x{}", i + 1), nf))
                .collect();
            eval_term_nf(variety, &word.body, &binding).map_err(|e| VerbalError::WordSort {
                op: op.to_string(),
                expected: word.op_type.result.clone(),
                actual: e.to_string(),
            })
        }
    }
}

/// Builds `s_F` on the fragment and checks injectivity and reachability.
///
/// Rejections are sound: a non-injective `s_F` witness pair, or a fragment
/// element outside the closure of the generators under the verbal
/// operations, rules out every bijection demanded by the automorphism
/// correspondence. Acceptance only certifies the fragment.
pub fn induced_s(
    variety: VarietyId,
    alphabet: &SortedAlphabet,
    system: &WordSystem,
    bound: usize,
) -> Result<InducedS, VerbalError> {
    let fragment = free_elements_up_to(variety, alphabet, bound);
    let ordered: Vec<NormalForm> = fragment.values().flatten().cloned().collect();

    let mut forward = Vec::with_capacity(ordered.len());
    let mut seen: BTreeMap<NormalForm, NormalForm> = BTreeMap::new();
    let mut verdict = None;
    for nf in &ordered {
        let image = apply_s(variety, system, nf)?;
        if let Some(prev) = seen.get(&image) {
            if verdict.is_none() {
                verdict = Some(SVerdict::Rejected(SRejection::NotInjective {
                    first: prev.to_string(),
                    second: nf.to_string(),
                    image: image.to_string(),
                }));
            }
        } else {
            seen.insert(image.clone(), nf.clone());
        }
        forward.push((nf.clone(), image));
    }

    if verdict.is_none() {
        if let Some(missing) = first_unreachable(variety, alphabet, system, bound, &ordered)? {
            verdict = Some(SVerdict::Rejected(SRejection::NotSurjective {
                missing: missing.to_string(),
            }));
        }
    }

    Ok(InducedS {
        variety,
        alphabet: alphabet.clone(),
        bound,
        forward,
        verdict: verdict.unwrap_or(SVerdict::BoundedOk),
    })
}

/// Closes the generators under the verbal operations, keeping only elements
/// within the size bound, and returns the first fragment element the closure
/// misses.
///
/// Verbal operations on the built-in free algebras are size-linear in the
/// arguments they use, so an element of size <= bound lies in the closure of
/// the generators iff it lies in this capped closure.
fn first_unreachable(
    variety: VarietyId,
    alphabet: &SortedAlphabet,
    system: &WordSystem,
    bound: usize,
    fragment: &[NormalForm],
) -> Result<Option<NormalForm>, VerbalError> {
    use std::collections::BTreeSet;

    let sig = variety.variety().signature;
    let mut reached: BTreeSet<NormalForm> = alphabet
        .vars
        .iter()
        .filter_map(|(name, sort)| {
            crate::freealg::nf_eval(
                variety,
                &Term::var(name.clone(), sort.clone()),
                &BTreeMap::new(),
            )
            .ok()
        })
        .collect();

    loop {
        let mut added = Vec::new();
        for (op, ty) in &sig.ops {
            let word = system.word(op);
            let pools: Vec<Vec<&NormalForm>> = ty
                .args
                .iter()
                .map(|s| reached.iter().filter(|nf| nf.sort() == s).collect())
                .collect();
            if pools.iter().any(Vec::is_empty) {
                continue;
            }
            let mut indices = vec![0usize; pools.len()];
            loop {
                let binding: BTreeMap<String, NormalForm> = indices
                    .iter()
                    .zip(&pools)
                    .enumerate()
                    .map(|(i, (&idx, pool))| (format!("x{}", i + 1), pool[idx].clone()))
                    .collect();
                let result =
                    eval_term_nf(variety, &word.body, &binding).map_err(|e| {
                        VerbalError::WordSort {
                            op: op.clone(),
                            expected: ty.result.clone(),
                            actual: e.to_string(),
                        }
                    })?;
                if result.size() <= bound && !reached.contains(&result) {
                    added.push(result);
                }
                let mut pos = indices.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    indices[pos] += 1;
                    if indices[pos] < pools[pos].len() {
                        break;
                    }
                    indices[pos] = 0;
                    if pos == 0 {
                        break;
                    }
                }
                if indices.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        if added.is_empty() {
            break;
        }
        reached.extend(added);
    }

    Ok(fragment.iter().find(|nf| !reached.contains(nf)).cloned())
}

/// Outcome of one B-condition check instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BOutcome {
    Pass,
    Fail { op: String, instance: String },
    Skipped { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct BCheck {
    pub source: String,
    pub target: String,
    pub morphism: String,
    pub outcome: BOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct BConditionReport {
    pub checks: Vec<BCheck>,
}

impl BConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| matches!(c.outcome, BOutcome::Pass))
    }
}

/// Verifies, for sampled generator assignments between two free fragments,
/// that conjugating a morphism by the induced bijections again yields a
/// homomorphism. Instances whose values leave the verified fragments are
/// skipped with a reason.
pub fn check_b_conditions(
    variety: VarietyId,
    system: &WordSystem,
    source: &SortedAlphabet,
    target: &SortedAlphabet,
    bound: usize,
    morphism_size: usize,
) -> Result<BConditionReport, VerbalError> {
    let s_source = induced_s(variety, source, system, bound)?;
    let s_target = induced_s(variety, target, system, bound)?;
    let mut checks = Vec::new();

    if !matches!(s_source.verdict, SVerdict::BoundedOk)
        || !matches!(s_target.verdict, SVerdict::BoundedOk)
    {
        checks.push(BCheck {
            source: alphabet_label(source),
            target: alphabet_label(target),
            morphism: "*".to_string(),
            outcome: BOutcome::Skipped {
                reason: "word system failed the fragment bijection checks".to_string(),
            },
        });
        return Ok(BConditionReport { checks });
    }

    let target_fragment = free_elements_up_to(variety, target, morphism_size);
    let source_fragment = free_elements_up_to(variety, source, bound);
    let sig = variety.variety().signature;

    // morphisms = all sort-preserving maps from source generators into the
    // small target fragment
    let gen_list: Vec<(&String, &String)> = source.vars.iter().collect();
    let pools: Vec<&Vec<NormalForm>> = gen_list
        .iter()
        .map(|(_, sort)| &target_fragment[*sort])
        .collect();
    if pools.iter().any(|p| p.is_empty()) && !gen_list.is_empty() {
        checks.push(BCheck {
            source: alphabet_label(source),
            target: alphabet_label(target),
            morphism: "*".to_string(),
            outcome: BOutcome::Skipped {
                reason: "no morphisms: a generator sort is uninhabited in the target".to_string(),
            },
        });
        return Ok(BConditionReport { checks });
    }

    let mut indices = vec![0usize; gen_list.len()];
    loop {
        let images: Vec<&NormalForm> = indices
            .iter()
            .zip(&pools)
            .map(|(&i, pool)| &pool[i])
            .collect();
        let morphism: BTreeMap<String, NormalForm> = gen_list
            .iter()
            .zip(&images)
            .map(|((name, _), img)| ((*name).clone(), (*img).clone()))
            .collect();
        let label = gen_list
            .iter()
            .zip(&images)
            .map(|((name, _), img)| format!("{name}->{img}"))
            .collect::<Vec<_>>()
            .join(", ");

        checks.push(BCheck {
            source: alphabet_label(source),
            target: alphabet_label(target),
            morphism: label,
            outcome: check_one_morphism(
                variety,
                system,
                &sig,
                &source_fragment,
                &morphism,
                morphism_size,
            )?,
        });

        if gen_list.is_empty() {
            break;
        }
        let mut pos = indices.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < pools[pos].len() {
                break;
            }
            indices[pos] = 0;
            if pos == 0 {
                break;
            }
        }
        if indices.iter().all(|&i| i == 0) {
            break;
        }
    }

    Ok(BConditionReport { checks })
}

/// Checks `s_B mu s_A^{-1}` homomorphically at every op instance over the
/// small part of the source fragment. Arguments range over images of `s_A`,
/// so the conjugate is evaluated as `nu(s_A(t)) = s_B(mu(t))`.
fn check_one_morphism(
    variety: VarietyId,
    system: &WordSystem,
    sig: &Signature,
    source_fragment: &BTreeMap<String, Vec<NormalForm>>,
    morphism: &BTreeMap<String, NormalForm>,
    morphism_size: usize,
) -> Result<BOutcome, VerbalError> {
    let nu = |t: &NormalForm| -> Result<NormalForm, VerbalError> {
        let mapped = apply_morphism(variety, morphism, t)?;
        apply_s(variety, system, &mapped)
    };
    for (op, ty) in &sig.ops {
        let arg_pools: Vec<Vec<&NormalForm>> = ty
            .args
            .iter()
            .map(|s| {
                source_fragment[s]
                    .iter()
                    .filter(|nf| nf.size() <= morphism_size)
                    .collect()
            })
            .collect();
        if arg_pools.iter().any(Vec::is_empty) {
            continue;
        }
        let mut arg_idx = vec![0usize; arg_pools.len()];
        loop {
            let args: Vec<NormalForm> = arg_idx
                .iter()
                .zip(&arg_pools)
                .map(|(&i, pool)| pool[i].clone())
                .collect();
            let combined = apply_free_op(variety, op, &args).expect("well-sorted");
            let lhs = nu(&combined)?;
            let mapped_args = args.iter().map(nu).collect::<Result<Vec<_>, _>>()?;
            let rhs = apply_free_op(variety, op, &mapped_args).expect("well-sorted");
            if lhs != rhs {
                return Ok(BOutcome::Fail {
                    op: op.clone(),
                    instance: args
                        .iter()
                        .map(|nf| nf.to_string())
                        .collect::<Vec<_>>()
                        .join(", "),
                });
            }
            let mut pos = arg_idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                arg_idx[pos] += 1;
                if arg_idx[pos] < arg_pools[pos].len() {
                    break;
                }
                arg_idx[pos] = 0;
                if pos == 0 {
                    break;
                }
            }
            if arg_idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(BOutcome::Pass)
}

fn alphabet_label(alphabet: &SortedAlphabet) -> String {
    alphabet
        .vars
        .iter()
        .map(|(v, s)| format!("{v}:{s}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Extends a generator assignment to the whole free algebra: substitute the
/// generator images and renormalize.
pub fn apply_morphism(
    variety: VarietyId,
    images: &BTreeMap<String, NormalForm>,
    nf: &NormalForm,
) -> Result<NormalForm, VerbalError> {
    match decompose(nf) {
        Decomposition::Generator(g) => {
            images
                .get(&g)
                .cloned()
                .ok_or_else(|| VerbalError::WordSort {
                    op: g,
                    expected: "generator image".to_string(),
                    actual: "unbound".to_string(),
                })
        }
        Decomposition::App { op, args } => {
            let mapped = args
                .iter()
                .map(|a| apply_morphism(variety, images, a))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(apply_free_op(variety, op, &mapped).expect("morphism images are sort-preserving"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::{act_variety, ACT_MUL, ACT_OP};
    use crate::model::AlgebraBuilder;

    fn left_proj_action() -> FiniteAlgebra {
        let v = act_variety();
        AlgebraBuilder::new(&v.signature)
            .carrier("1", &["a", "b"])
            .carrier("2", &["p", "q"])
            .table(ACT_MUL, &["a", "a", "b", "b"])
            .table(ACT_OP, &["p", "p", "q", "q"])
            .build()
    }

    fn opposite_word_system() -> WordSystem {
        let sig = act_variety().signature;
        let mut words = BTreeMap::new();
        words.insert(
            ACT_MUL.to_string(),
            Word::new(
                sig.op(ACT_MUL).unwrap().clone(),
                Term::app(
                    &sig,
                    ACT_MUL,
                    vec![Term::var("x2", "1"), Term::var("x1", "1")],
                )
                .unwrap(),
            )
            .unwrap(),
        );
        words.insert(ACT_OP.to_string(), Word::identity(&sig, ACT_OP));
        WordSystem::new(&sig, words).unwrap()
    }

    #[test]
    fn projection_word_returns_argument() {
        let sig = act_variety().signature;
        let w = Word::new(sig.op(ACT_MUL).unwrap().clone(), Term::var("x1", "1")).unwrap();
        assert!(w.is_projection());
        let alg = left_proj_action();
        assert_eq!(verbal_apply(&alg, &w, &[1, 0]).unwrap(), 1);
    }

    #[test]
    fn swapped_word_swaps_table_lookup() {
        // w = mul(x2,x1) on the left projection: w(a,b) = b*a = b
        let alg = left_proj_action();
        let w = opposite_word_system().word(ACT_MUL).clone();
        assert_eq!(verbal_apply(&alg, &w, &[0, 1]).unwrap(), 1);
    }

    #[test]
    fn identity_word_reproduces_table() {
        let alg = left_proj_action();
        let sig = alg.signature.clone();
        let w = Word::identity(&sig, ACT_OP);
        for g in 0..2 {
            for v in 0..2 {
                assert_eq!(
                    verbal_apply(&alg, &w, &[g, v]).unwrap(),
                    alg.apply(ACT_OP, &[g, v])
                );
            }
        }
    }

    #[test]
    fn derive_identity_system_is_table_exact() {
        let alg = left_proj_action();
        let w = WordSystem::identity(&alg.signature);
        let derived = derive_algebra(&alg, &w).unwrap();
        assert_eq!(derived.algebra, alg);
    }

    #[test]
    fn derive_opposite_transposes_mul() {
        // noncommutative base: left projection; derived mul table is the
        // transpose (right projection)
        let alg = left_proj_action();
        let derived = derive_algebra(&alg, &opposite_word_system()).unwrap();
        assert_eq!(derived.algebra.tables[ACT_MUL].data, vec![0, 1, 0, 1]);
        assert_eq!(derived.algebra.tables[ACT_OP], alg.tables[ACT_OP]);
    }

    #[test]
    fn one_point_derives_to_itself() {
        let v = act_variety();
        let alg = AlgebraBuilder::new(&v.signature)
            .carrier("1", &["*"])
            .carrier("2", &["*"])
            .table(ACT_MUL, &["*"])
            .table(ACT_OP, &["*"])
            .build();
        let derived = derive_algebra(&alg, &opposite_word_system()).unwrap();
        assert_eq!(derived.algebra, alg);
    }

    #[test]
    fn opposite_system_fails_mixed_identity_on_probe() {
        let v = act_variety();
        let alg = left_proj_action();
        assert!(in_variety(&alg, &v));
        assert!(!check_derived_in_variety(&alg, &opposite_word_system(), &v).unwrap());
    }

    #[test]
    fn identity_system_stays_in_variety() {
        let v = act_variety();
        let alg = left_proj_action();
        let w = WordSystem::identity(&v.signature);
        assert!(check_derived_in_variety(&alg, &w, &v).unwrap());
    }

    #[test]
    fn naturality_for_identity_system_is_hom_check() {
        let alg = left_proj_action();
        let id_map = SortedMap::identity(&alg);
        let w = WordSystem::identity(&alg.signature);
        assert!(naturality_check(&alg, &alg, &id_map, &w).unwrap());
    }

    #[test]
    fn naturality_holds_for_all_systems_and_homs() {
        let alg = left_proj_action();
        let homs = crate::model::enumerate_homs(&alg, &alg, 1 << 20).unwrap();
        for system in [WordSystem::identity(&alg.signature), opposite_word_system()] {
            for h in &homs {
                assert!(naturality_check(&alg, &alg, h, &system).unwrap());
            }
        }
    }

    #[test]
    fn corrupted_map_fails_naturality() {
        let alg = left_proj_action();
        // swap on sort 1, identity on sort 2: not a homomorphism
        let map = SortedMap {
            maps: [("1".to_string(), vec![1, 0]), ("2".to_string(), vec![0, 1])]
                .into_iter()
                .collect(),
        };
        assert!(
            !naturality_check(&alg, &alg, &map, &WordSystem::identity(&alg.signature)).unwrap()
        );
    }

    #[test]
    fn induced_s_identity_is_identity() {
        let alphabet = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1"), ("v", "2")]);
        let w = WordSystem::identity(&act_variety().signature);
        let s = induced_s(VarietyId::Act, &alphabet, &w, 4).unwrap();
        assert_eq!(s.verdict, SVerdict::BoundedOk);
        for (src, img) in &s.forward {
            assert_eq!(src, img);
        }
    }

    #[test]
    fn induced_s_rejects_long_word() {
        // w_mul = mul(mul(x1,x2),x1): too long, length-2 words become
        // unreachable
        let sig = act_variety().signature;
        let x1 = Term::var("x1", "1");
        let x2 = Term::var("x2", "1");
        let body = Term::app(
            &sig,
            ACT_MUL,
            vec![Term::app(&sig, ACT_MUL, vec![x1.clone(), x2]).unwrap(), x1],
        )
        .unwrap();
        let mut words = BTreeMap::new();
        words.insert(
            ACT_MUL.to_string(),
            Word::new(sig.op(ACT_MUL).unwrap().clone(), body).unwrap(),
        );
        words.insert(ACT_OP.to_string(), Word::identity(&sig, ACT_OP));
        let system = WordSystem::new(&sig, words).unwrap();

        let alphabet = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1")]);
        let s = induced_s(VarietyId::Act, &alphabet, &system, 3).unwrap();
        match s.verdict {
            SVerdict::Rejected(SRejection::NotSurjective { missing }) => {
                // first missing element in canonical order is a length-2 word
                assert_eq!(missing, "x1x1");
            }
            other => panic!("expected non-surjective rejection, got {other:?}"),
        }
    }

    #[test]
    fn induced_s_rejects_projection_word() {
        let sig = act_variety().signature;
        let mut words = BTreeMap::new();
        words.insert(
            ACT_MUL.to_string(),
            Word::new(sig.op(ACT_MUL).unwrap().clone(), Term::var("x1", "1")).unwrap(),
        );
        words.insert(ACT_OP.to_string(), Word::identity(&sig, ACT_OP));
        let system = WordSystem::new(&sig, words).unwrap();

        let alphabet = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1")]);
        let s = induced_s(VarietyId::Act, &alphabet, &system, 3).unwrap();
        match s.verdict {
            SVerdict::Rejected(SRejection::NotInjective { first, second, .. }) => {
                assert_ne!(first, second);
            }
            other => panic!("expected non-injective rejection, got {other:?}"),
        }
    }

    #[test]
    fn b_conditions_pass_for_identity() {
        let w = WordSystem::identity(&act_variety().signature);
        let a = SortedAlphabet::from_pairs([("x", "1")]);
        let b = SortedAlphabet::from_pairs([("y1", "1"), ("y2", "1")]);
        let report = check_b_conditions(VarietyId::Act, &w, &a, &b, 4, 2).unwrap();
        assert!(report.all_passed());
        assert!(!report.checks.is_empty());
    }

    #[test]
    fn b_conditions_skip_rejected_system() {
        let sig = act_variety().signature;
        let mut words = BTreeMap::new();
        words.insert(
            ACT_MUL.to_string(),
            Word::new(sig.op(ACT_MUL).unwrap().clone(), Term::var("x1", "1")).unwrap(),
        );
        words.insert(ACT_OP.to_string(), Word::identity(&sig, ACT_OP));
        let system = WordSystem::new(&sig, words).unwrap();
        let a = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1")]);
        let report = check_b_conditions(VarietyId::Act, &system, &a, &a, 3, 2).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert!(matches!(report.checks[0].outcome, BOutcome::Skipped { .. }));
    }

    #[test]
    fn word_validation_rejects_foreign_variable() {
        let sig = act_variety().signature;
        let err = Word::new(sig.op(ACT_MUL).unwrap().clone(), Term::var("z", "1")).unwrap_err();
        assert!(matches!(err, VerbalError::ForeignVariable { .. }));
    }

    #[test]
    fn word_system_must_be_total() {
        let sig = act_variety().signature;
        let words = BTreeMap::new();
        assert!(matches!(
            WordSystem::new(&sig, words).unwrap_err(),
            VerbalError::MissingWord(_)
        ));
    }

    #[test]
    fn unused_designated_variable_is_legal() {
        let sig = act_variety().signature;
        let w = Word::new(sig.op(ACT_MUL).unwrap().clone(), Term::var("x2", "1")).unwrap();
        assert_eq!(w.size(), 1);
    }

    #[test]
    fn double_derivation_with_identity_is_identity() {
        let alg = left_proj_action();
        let w = WordSystem::identity(&alg.signature);
        let once = derive_algebra(&alg, &w).unwrap();
        let twice = derive_algebra(&once.algebra, &w).unwrap();
        assert_eq!(twice.algebra, alg);
    }
}
