//! Exact free algebras with decidable equality for the two built-in
//! varieties: actions of semigroups over sets, and automatons.
//!
//! Free elements are kept in normal form. For actions the sort-1 carrier is
//! the free semigroup (nonempty words) and the sort-2 carrier is a word
//! acting on a point generator. For automatons the sort-1 carrier is the
//! generators themselves, sort 2 is a word of input signals applied to a
//! state generator, and sort 3 is either an output generator or one output
//! application over a sort-2 form.
//!
//! The size of a normal form is its total generator-occurrence count, which
//! makes length-preservation arguments mechanically checkable.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::signature::{Identity, Signature, SortedAlphabet, VarietySpec};
use crate::term::Term;

pub const ACT_MUL: &str = "mul";
pub const ACT_OP: &str = "act";
pub const AUT_STEP: &str = "step";
pub const AUT_OUT: &str = "out";

/// The built-in decidable varieties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum VarietyId {
    Act,
    Automaton,
}

impl VarietyId {
    pub fn from_name(name: &str) -> Option<VarietyId> {
        match name {
            "act" => Some(VarietyId::Act),
            "automaton" => Some(VarietyId::Automaton),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VarietyId::Act => "act",
            VarietyId::Automaton => "automaton",
        }
    }

    pub fn variety(&self) -> VarietySpec {
        match self {
            VarietyId::Act => act_variety(),
            VarietyId::Automaton => automaton_variety(),
        }
    }
}

/// Actions of semigroups over sets. Sort 1 holds semigroup elements, sort 2
/// the points acted on; `mul` is the semigroup product, `act` the action.
pub fn act_variety() -> VarietySpec {
    let mut sig = Signature::with_sorts(["1", "2"]);
    sig.add_op(ACT_MUL, vec!["1", "1"], "1");
    sig.add_op(ACT_OP, vec!["1", "2"], "2");

    let x1 = || Term::var("x1", "1");
    let x2 = || Term::var("x2", "1");
    let x3 = || Term::var("x3", "1");
    let y = || Term::var("y", "2");
    let app = |op: &str, args: Vec<Term>| Term::app(&sig, op, args).unwrap();

    let assoc = Identity {
        alphabet: SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1"), ("x3", "1")]),
        lhs: app(ACT_MUL, vec![app(ACT_MUL, vec![x1(), x2()]), x3()]),
        rhs: app(ACT_MUL, vec![x1(), app(ACT_MUL, vec![x2(), x3()])]),
    };
    let mixed = Identity {
        alphabet: SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1"), ("y", "2")]),
        lhs: app(ACT_OP, vec![app(ACT_MUL, vec![x1(), x2()]), y()]),
        rhs: app(ACT_OP, vec![x1(), app(ACT_OP, vec![x2(), y()])]),
    };

    VarietySpec {
        signature: sig,
        identities: vec![assoc, mixed],
    }
}

/// Automatons. Sort 1 holds input signals, sort 2 states, sort 3 output
/// signals; `step` advances the state, `out` emits an output. The variety is
/// defined by the empty set of identities.
pub fn automaton_variety() -> VarietySpec {
    let mut sig = Signature::with_sorts(["1", "2", "3"]);
    sig.add_op(AUT_STEP, vec!["1", "2"], "2");
    sig.add_op(AUT_OUT, vec!["1", "2"], "3");
    VarietySpec {
        signature: sig,
        identities: vec![],
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FreeAlgError {
    #[error("term does not fit the `{0}` signature: {1}")]
    BadTerm(&'static str, String),
    #[error("variable `{0}` has sort `{1}`, which the `{2}` variety does not declare")]
    BadVarSort(String, String, &'static str),
}

/// A free-algebra element of the action variety.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FreeActElem {
    /// Nonempty word in the free semigroup on the sort-1 generators.
    Sem(Vec<String>),
    /// A possibly-empty word acting on a sort-2 generator; the empty word is
    /// the bare generator.
    Point { word: Vec<String>, gen: String },
}

/// A free-algebra element of the automaton variety.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FreeAutElem {
    /// Sort 1: a bare input generator (no operation produces sort 1).
    Input(String),
    /// Sort 2: a word of inputs applied to a state generator.
    State { word: Vec<String>, gen: String },
    /// Sort 3: a bare output generator.
    OutputGen(String),
    /// Sort 3: a nonempty output word over one sort-2 form.
    Output {
        prefix: Vec<String>,
        word: Vec<String>,
        gen: String,
    },
}

/// A normal form in one of the built-in free algebras.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NormalForm {
    Act(FreeActElem),
    Aut(FreeAutElem),
}

impl NormalForm {
    pub fn sort(&self) -> &'static str {
        match self {
            NormalForm::Act(FreeActElem::Sem(_)) => "1",
            NormalForm::Act(FreeActElem::Point { .. }) => "2",
            NormalForm::Aut(FreeAutElem::Input(_)) => "1",
            NormalForm::Aut(FreeAutElem::State { .. }) => "2",
            NormalForm::Aut(FreeAutElem::OutputGen(_)) => "3",
            NormalForm::Aut(FreeAutElem::Output { .. }) => "3",
        }
    }

    /// Total generator-occurrence count.
    pub fn size(&self) -> usize {
        match self {
            NormalForm::Act(FreeActElem::Sem(w)) => w.len(),
            NormalForm::Act(FreeActElem::Point { word, .. }) => word.len() + 1,
            NormalForm::Aut(FreeAutElem::Input(_)) => 1,
            NormalForm::Aut(FreeAutElem::State { word, .. }) => word.len() + 1,
            NormalForm::Aut(FreeAutElem::OutputGen(_)) => 1,
            NormalForm::Aut(FreeAutElem::Output { prefix, word, .. }) => {
                prefix.len() + word.len() + 1
            }
        }
    }

    /// True when the element is a bare generator.
    pub fn is_generator(&self) -> bool {
        match self {
            NormalForm::Act(FreeActElem::Sem(w)) => w.len() == 1,
            NormalForm::Act(FreeActElem::Point { word, .. }) => word.is_empty(),
            NormalForm::Aut(FreeAutElem::Input(_)) => true,
            NormalForm::Aut(FreeAutElem::State { word, .. }) => word.is_empty(),
            NormalForm::Aut(FreeAutElem::OutputGen(_)) => true,
            NormalForm::Aut(FreeAutElem::Output { .. }) => false,
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalForm::Act(FreeActElem::Sem(w)) => write!(f, "{}", w.concat()),
            NormalForm::Act(FreeActElem::Point { word, gen })
            | NormalForm::Aut(FreeAutElem::State { word, gen }) => {
                if word.is_empty() {
                    write!(f, "{gen}")
                } else {
                    write!(f, "{}@{gen}", word.concat())
                }
            }
            NormalForm::Aut(FreeAutElem::Input(g)) => write!(f, "{g}"),
            NormalForm::Aut(FreeAutElem::OutputGen(g)) => write!(f, "{g}"),
            NormalForm::Aut(FreeAutElem::Output { prefix, word, gen }) => {
                if word.is_empty() {
                    write!(f, "{}!{gen}", prefix.concat())
                } else {
                    write!(f, "{}!{}@{gen}", prefix.concat(), word.concat())
                }
            }
        }
    }
}

fn generator_nf(variety: VarietyId, name: &str, sort: &str) -> Result<NormalForm, FreeAlgError> {
    match (variety, sort) {
        (VarietyId::Act, "1") => Ok(NormalForm::Act(FreeActElem::Sem(vec![name.to_string()]))),
        (VarietyId::Act, "2") => Ok(NormalForm::Act(FreeActElem::Point {
            word: vec![],
            gen: name.to_string(),
        })),
        (VarietyId::Automaton, "1") => Ok(NormalForm::Aut(FreeAutElem::Input(name.to_string()))),
        (VarietyId::Automaton, "2") => Ok(NormalForm::Aut(FreeAutElem::State {
            word: vec![],
            gen: name.to_string(),
        })),
        (VarietyId::Automaton, "3") => {
            Ok(NormalForm::Aut(FreeAutElem::OutputGen(name.to_string())))
        }
        _ => Err(FreeAlgError::BadVarSort(
            name.to_string(),
            sort.to_string(),
            variety.name(),
        )),
    }
}

/// Applies one built-in operation to normal forms of the matching sorts.
pub fn apply_free_op(
    variety: VarietyId,
    op: &str,
    args: &[NormalForm],
) -> Result<NormalForm, FreeAlgError> {
    let bad = |msg: &str| FreeAlgError::BadTerm(variety.name(), msg.to_string());
    match (variety, op) {
        (VarietyId::Act, ACT_MUL) => match args {
            [NormalForm::Act(FreeActElem::Sem(a)), NormalForm::Act(FreeActElem::Sem(b))] => {
                let mut w = a.clone();
                w.extend(b.iter().cloned());
                Ok(NormalForm::Act(FreeActElem::Sem(w)))
            }
            _ => Err(bad("mul expects two sort-1 elements")),
        },
        (VarietyId::Act, ACT_OP) => match args {
            [NormalForm::Act(FreeActElem::Sem(a)), NormalForm::Act(FreeActElem::Point { word, gen })] =>
            {
                let mut w = a.clone();
                w.extend(word.iter().cloned());
                Ok(NormalForm::Act(FreeActElem::Point {
                    word: w,
                    gen: gen.clone(),
                }))
            }
            _ => Err(bad("act expects a sort-1 and a sort-2 element")),
        },
        (VarietyId::Automaton, AUT_STEP) => match args {
            [NormalForm::Aut(FreeAutElem::Input(g)), NormalForm::Aut(FreeAutElem::State { word, gen })] =>
            {
                let mut w = vec![g.clone()];
                w.extend(word.iter().cloned());
                Ok(NormalForm::Aut(FreeAutElem::State {
                    word: w,
                    gen: gen.clone(),
                }))
            }
            _ => Err(bad("step expects a sort-1 and a sort-2 element")),
        },
        (VarietyId::Automaton, AUT_OUT) => match args {
            [NormalForm::Aut(FreeAutElem::Input(g)), NormalForm::Aut(FreeAutElem::State { word, gen })] => {
                Ok(NormalForm::Aut(FreeAutElem::Output {
                    prefix: vec![g.clone()],
                    word: word.clone(),
                    gen: gen.clone(),
                }))
            }
            _ => Err(bad("out expects a sort-1 and a sort-2 element")),
        },
        _ => Err(bad(&format!("unknown operation `{op}`"))),
    }
}

/// Evaluates a term whose leaves are bound to normal forms.
pub fn eval_term_nf(
    variety: VarietyId,
    term: &Term,
    binding: &BTreeMap<String, NormalForm>,
) -> Result<NormalForm, FreeAlgError> {
    match term {
        Term::Var { name, sort } => match binding.get(name) {
            Some(nf) if nf.sort() == sort => Ok(nf.clone()),
            Some(nf) => Err(FreeAlgError::BadTerm(
                variety.name(),
                format!(
                    "variable `{name}` bound to sort `{}` but used at sort `{sort}`",
                    nf.sort()
                ),
            )),
            None => Err(FreeAlgError::BadTerm(
                variety.name(),
                format!("unbound variable `{name}`"),
            )),
        },
        Term::App { op, args, .. } => {
            let vals = args
                .iter()
                .map(|a| eval_term_nf(variety, a, binding))
                .collect::<Result<Vec<_>, _>>()?;
            apply_free_op(variety, op, &vals)
        }
    }
}

/// The canonical normal form of a term's image in the free algebra, with
/// variables renamed to generators through `env` (identity when absent).
pub fn nf_eval(
    variety: VarietyId,
    term: &Term,
    env: &BTreeMap<String, String>,
) -> Result<NormalForm, FreeAlgError> {
    let mut binding = BTreeMap::new();
    for (var, sort) in term.vars().vars {
        let gen = env.get(&var).cloned().unwrap_or_else(|| var.clone());
        binding.insert(var, generator_nf(variety, &gen, &sort)?);
    }
    eval_term_nf(variety, term, &binding)
}

/// Equality in the free algebra: equal normal forms.
pub fn nf_equal(
    variety: VarietyId,
    t1: &Term,
    t2: &Term,
    env: &BTreeMap<String, String>,
) -> Result<bool, FreeAlgError> {
    Ok(nf_eval(variety, t1, env)? == nf_eval(variety, t2, env)?)
}

/// All normal forms over the alphabet with size at most `bound`, grouped by
/// sort, each sort list ordered size-major then lexicographically.
pub fn free_elements_up_to(
    variety: VarietyId,
    alphabet: &SortedAlphabet,
    bound: usize,
) -> BTreeMap<String, Vec<NormalForm>> {
    let gens = |sort: &str| -> Vec<String> {
        alphabet.vars_of_sort(sort).map(String::from).collect()
    };
    let mut by_sort: BTreeMap<String, Vec<NormalForm>> = BTreeMap::new();
    for sort in variety.variety().signature.sorts.iter() {
        by_sort.insert(sort.clone(), Vec::new());
    }

    // all words over `letters` with the given exact length, lexicographic
    fn words(letters: &[String], len: usize) -> Vec<Vec<String>> {
        if len == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for w in words(letters, len - 1) {
            for l in letters {
                let mut w2 = w.clone();
                w2.push(l.clone());
                out.push(w2);
            }
        }
        out
    }

    match variety {
        VarietyId::Act => {
            let g1 = gens("1");
            let g2 = gens("2");
            let sort1 = by_sort.get_mut("1").unwrap();
            for len in 1..=bound {
                for w in words(&g1, len) {
                    sort1.push(NormalForm::Act(FreeActElem::Sem(w)));
                }
            }
            let sort2 = by_sort.get_mut("2").unwrap();
            for size in 1..=bound {
                for w in words(&g1, size - 1) {
                    for q in &g2 {
                        sort2.push(NormalForm::Act(FreeActElem::Point {
                            word: w.clone(),
                            gen: q.clone(),
                        }));
                    }
                }
            }
        }
        VarietyId::Automaton => {
            let g1 = gens("1");
            let g2 = gens("2");
            let g3 = gens("3");
            if bound >= 1 {
                let sort1 = by_sort.get_mut("1").unwrap();
                for g in &g1 {
                    sort1.push(NormalForm::Aut(FreeAutElem::Input(g.clone())));
                }
            }
            let sort2 = by_sort.get_mut("2").unwrap();
            for size in 1..=bound {
                for w in words(&g1, size - 1) {
                    for q in &g2 {
                        sort2.push(NormalForm::Aut(FreeAutElem::State {
                            word: w.clone(),
                            gen: q.clone(),
                        }));
                    }
                }
            }
            let sort3 = by_sort.get_mut("3").unwrap();
            if bound >= 1 {
                for z in &g3 {
                    sort3.push(NormalForm::Aut(FreeAutElem::OutputGen(z.clone())));
                }
            }
            // Reachable sort-3 forms carry a single-letter output prefix.
            for size in 2..=bound {
                for p in &g1 {
                    for w in words(&g1, size - 2) {
                        for q in &g2 {
                            sort3.push(NormalForm::Aut(FreeAutElem::Output {
                                prefix: vec![p.clone()],
                                word: w.clone(),
                                gen: q.clone(),
                            }));
                        }
                    }
                }
            }
        }
    }

    for list in by_sort.values_mut() {
        list.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
        list.dedup();
    }
    by_sort
}

/// How a non-generator normal form decomposes into one operation over
/// smaller normal forms. Generators do not decompose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Generator(String),
    App { op: &'static str, args: Vec<NormalForm> },
}

pub fn decompose(nf: &NormalForm) -> Decomposition {
    match nf {
        NormalForm::Act(FreeActElem::Sem(w)) => {
            if w.len() == 1 {
                Decomposition::Generator(w[0].clone())
            } else {
                Decomposition::App {
                    op: ACT_MUL,
                    args: vec![
                        NormalForm::Act(FreeActElem::Sem(vec![w[0].clone()])),
                        NormalForm::Act(FreeActElem::Sem(w[1..].to_vec())),
                    ],
                }
            }
        }
        NormalForm::Act(FreeActElem::Point { word, gen }) => {
            if word.is_empty() {
                Decomposition::Generator(gen.clone())
            } else {
                Decomposition::App {
                    op: ACT_OP,
                    args: vec![
                        NormalForm::Act(FreeActElem::Sem(vec![word[0].clone()])),
                        NormalForm::Act(FreeActElem::Point {
                            word: word[1..].to_vec(),
                            gen: gen.clone(),
                        }),
                    ],
                }
            }
        }
        NormalForm::Aut(FreeAutElem::Input(g)) => Decomposition::Generator(g.clone()),
        NormalForm::Aut(FreeAutElem::State { word, gen }) => {
            if word.is_empty() {
                Decomposition::Generator(gen.clone())
            } else {
                Decomposition::App {
                    op: AUT_STEP,
                    args: vec![
                        NormalForm::Aut(FreeAutElem::Input(word[0].clone())),
                        NormalForm::Aut(FreeAutElem::State {
                            word: word[1..].to_vec(),
                            gen: gen.clone(),
                        }),
                    ],
                }
            }
        }
        NormalForm::Aut(FreeAutElem::OutputGen(g)) => Decomposition::Generator(g.clone()),
        NormalForm::Aut(FreeAutElem::Output { prefix, word, gen }) => {
            debug_assert_eq!(prefix.len(), 1, "reachable output prefixes have length 1");
            Decomposition::App {
                op: AUT_OUT,
                args: vec![
                    NormalForm::Aut(FreeAutElem::Input(prefix[0].clone())),
                    NormalForm::Aut(FreeAutElem::State {
                        word: word.clone(),
                        gen: gen.clone(),
                    }),
                ],
            }
        }
    }
}

/// Reconstructs a canonical (right-nested) term from a normal form.
pub fn nf_to_term(variety: VarietyId, nf: &NormalForm) -> Term {
    let sig = variety.variety().signature;
    match decompose(nf) {
        Decomposition::Generator(g) => Term::var(g, nf.sort()),
        Decomposition::App { op, args } => {
            let terms = args.iter().map(|a| nf_to_term(variety, a)).collect();
            Term::app(&sig, op, terms).expect("decomposition is well-sorted")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: Term, b: Term) -> Term {
        Term::app(&act_variety().signature, ACT_MUL, vec![a, b]).unwrap()
    }

    fn act(a: Term, b: Term) -> Term {
        Term::app(&act_variety().signature, ACT_OP, vec![a, b]).unwrap()
    }

    fn step(a: Term, b: Term) -> Term {
        Term::app(&automaton_variety().signature, AUT_STEP, vec![a, b]).unwrap()
    }

    fn out(a: Term, b: Term) -> Term {
        Term::app(&automaton_variety().signature, AUT_OUT, vec![a, b]).unwrap()
    }

    #[test]
    fn act_mul_concatenates() {
        let t = mul(Term::var("x1", "1"), Term::var("x2", "1"));
        let nf = nf_eval(VarietyId::Act, &t, &BTreeMap::new()).unwrap();
        assert_eq!(nf.to_string(), "x1x2");
        assert_eq!(nf.size(), 2);
    }

    #[test]
    fn act_mixed_identity_normalizes() {
        // act(mul(g,h), v) and act(g, act(h, v)) share the normal form gh@v
        let lhs = act(
            mul(Term::var("g", "1"), Term::var("h", "1")),
            Term::var("v", "2"),
        );
        let rhs = act(
            Term::var("g", "1"),
            act(Term::var("h", "1"), Term::var("v", "2")),
        );
        let env = BTreeMap::new();
        let l = nf_eval(VarietyId::Act, &lhs, &env).unwrap();
        assert_eq!(l.to_string(), "gh@v");
        assert!(nf_equal(VarietyId::Act, &lhs, &rhs, &env).unwrap());
    }

    #[test]
    fn free_semigroup_not_commutative() {
        let t1 = mul(Term::var("x1", "1"), Term::var("x2", "1"));
        let t2 = mul(Term::var("x2", "1"), Term::var("x1", "1"));
        assert!(!nf_equal(VarietyId::Act, &t1, &t2, &BTreeMap::new()).unwrap());
    }

    #[test]
    fn associativity_instances_agree() {
        let x = |n: &str| Term::var(n, "1");
        let t1 = mul(mul(x("a"), x("b")), x("c"));
        let t2 = mul(x("a"), mul(x("b"), x("c")));
        assert!(nf_equal(VarietyId::Act, &t1, &t2, &BTreeMap::new()).unwrap());
        assert!(nf_equal(VarietyId::Act, &t1, &t1, &BTreeMap::new()).unwrap());
    }

    #[test]
    fn automaton_step_chain() {
        let t = step(
            Term::var("a", "1"),
            step(Term::var("b", "1"), Term::var("q", "2")),
        );
        let nf = nf_eval(VarietyId::Automaton, &t, &BTreeMap::new()).unwrap();
        assert_eq!(nf.to_string(), "ab@q");
    }

    #[test]
    fn automaton_out_form() {
        let t = out(
            Term::var("a", "1"),
            step(Term::var("b", "1"), Term::var("q", "2")),
        );
        let nf = nf_eval(VarietyId::Automaton, &t, &BTreeMap::new()).unwrap();
        assert_eq!(nf.to_string(), "a!b@q");
        assert_eq!(nf.size(), 3);
    }

    #[test]
    fn nf_eval_is_homomorphic() {
        // nf of an application equals the free op applied to children's nfs
        let g = Term::var("g", "1");
        let h = Term::var("h", "1");
        let v = Term::var("v", "2");
        let t = act(mul(g.clone(), h.clone()), v.clone());
        let env = BTreeMap::new();
        let whole = nf_eval(VarietyId::Act, &t, &env).unwrap();
        let children = [
            nf_eval(VarietyId::Act, &mul(g, h), &env).unwrap(),
            nf_eval(VarietyId::Act, &v, &env).unwrap(),
        ];
        assert_eq!(apply_free_op(VarietyId::Act, ACT_OP, &children).unwrap(), whole);
    }

    #[test]
    fn fragment_act_single_generator() {
        let alphabet = SortedAlphabet::from_pairs([("x", "1")]);
        let frag = free_elements_up_to(VarietyId::Act, &alphabet, 2);
        let sort1: Vec<String> = frag["1"].iter().map(|n| n.to_string()).collect();
        assert_eq!(sort1, vec!["x", "xx"]);
        assert!(frag["2"].is_empty());
    }

    #[test]
    fn fragment_automaton_bound_one() {
        let alphabet = SortedAlphabet::from_pairs([("a", "1"), ("q", "2")]);
        let frag = free_elements_up_to(VarietyId::Automaton, &alphabet, 1);
        assert_eq!(frag["1"].len(), 1);
        assert_eq!(frag["2"].len(), 1);
        assert!(frag["3"].is_empty());
        assert_eq!(frag["1"][0].to_string(), "a");
        assert_eq!(frag["2"][0].to_string(), "q");
    }

    #[test]
    fn fragment_bound_zero_is_empty() {
        let alphabet = SortedAlphabet::from_pairs([("x", "1"), ("v", "2")]);
        let frag = free_elements_up_to(VarietyId::Act, &alphabet, 0);
        assert!(frag.values().all(Vec::is_empty));
    }

    #[test]
    fn fragment_sizes_and_order() {
        let alphabet = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1"), ("v", "2")]);
        let frag = free_elements_up_to(VarietyId::Act, &alphabet, 3);
        for list in frag.values() {
            for pair in list.windows(2) {
                assert!(pair[0].size() <= pair[1].size());
                assert_ne!(pair[0], pair[1]);
            }
        }
        // sort 1: 2 + 4 + 8 words
        assert_eq!(frag["1"].len(), 14);
        // sort 2: 1 + 2 + 4 points
        assert_eq!(frag["2"].len(), 7);
    }

    #[test]
    fn decompose_round_trips_through_terms() {
        let alphabet = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1"), ("v", "2")]);
        let frag = free_elements_up_to(VarietyId::Act, &alphabet, 3);
        for list in frag.values() {
            for nf in list {
                let t = nf_to_term(VarietyId::Act, nf);
                assert_eq!(&nf_eval(VarietyId::Act, &t, &BTreeMap::new()).unwrap(), nf);
            }
        }
        let frag = free_elements_up_to(
            VarietyId::Automaton,
            &SortedAlphabet::from_pairs([("a", "1"), ("b", "1"), ("q", "2"), ("z", "3")]),
            3,
        );
        for list in frag.values() {
            for nf in list {
                let t = nf_to_term(VarietyId::Automaton, nf);
                assert_eq!(
                    &nf_eval(VarietyId::Automaton, &t, &BTreeMap::new()).unwrap(),
                    nf
                );
            }
        }
    }

    mod prop_tests {
        use super::*;
        use proptest::prelude::*;

        fn arb_sort1_term() -> impl Strategy<Value = Term> {
            let leaf = prop_oneof![Just(Term::var("g", "1")), Just(Term::var("h", "1"))];
            leaf.prop_recursive(3, 24, 2, |inner| {
                (inner.clone(), inner)
                    .prop_map(|(a, b)| mul(a, b))
            })
        }

        fn arb_sort2_term() -> impl Strategy<Value = Term> {
            (arb_sort1_term(), Just(Term::var("v", "2")))
                .prop_map(|(g, v)| act(g, v))
        }

        proptest! {
            #[test]
            fn nf_eval_homomorphic_over_mul(a in arb_sort1_term(), b in arb_sort1_term()) {
                let env = BTreeMap::new();
                let whole = nf_eval(VarietyId::Act, &mul(a.clone(), b.clone()), &env).unwrap();
                let parts = [
                    nf_eval(VarietyId::Act, &a, &env).unwrap(),
                    nf_eval(VarietyId::Act, &b, &env).unwrap(),
                ];
                prop_assert_eq!(apply_free_op(VarietyId::Act, ACT_MUL, &parts).unwrap(), whole);
            }

            #[test]
            fn nf_equal_terms_agree_in_models(t1 in arb_sort2_term(), t2 in arb_sort2_term()) {
                use crate::model::{all_assignments, eval, AlgebraBuilder};
                let env = BTreeMap::new();
                if nf_equal(VarietyId::Act, &t1, &t2, &env).unwrap() {
                    let v = act_variety();
                    let h = AlgebraBuilder::new(&v.signature)
                        .carrier("1", &["a", "b"])
                        .carrier("2", &["p", "q"])
                        .table(ACT_MUL, &["a", "a", "b", "b"])
                        .table(ACT_OP, &["p", "p", "q", "q"])
                        .build();
                    let alphabet =
                        SortedAlphabet::from_pairs([("g", "1"), ("h", "1"), ("v", "2")]);
                    for assignment in all_assignments(&h, &alphabet) {
                        prop_assert_eq!(
                            eval(&h, &t1, &assignment).unwrap(),
                            eval(&h, &t2, &assignment).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn nf_soundness_against_finite_models() {
        // nf-equal terms evaluate equally in every small model of the variety
        use crate::model::{all_assignments, eval, AlgebraBuilder};
        let v = act_variety();
        let h = AlgebraBuilder::new(&v.signature)
            .carrier("1", &["a", "b"])
            .carrier("2", &["p", "q"])
            .table(ACT_MUL, &["a", "a", "b", "b"])
            .table(ACT_OP, &["p", "p", "q", "q"])
            .build();
        assert!(crate::model::in_variety(&h, &v));

        let alphabet = SortedAlphabet::from_pairs([("x1", "1"), ("x2", "1"), ("y", "2")]);
        let terms = crate::term::enumerate_terms(&v.signature, &alphabet, 2);
        let env = BTreeMap::new();
        for t1 in &terms {
            for t2 in &terms {
                if t1.sort() != t2.sort() {
                    continue;
                }
                if nf_equal(VarietyId::Act, t1, t2, &env).unwrap() {
                    for a in all_assignments(&h, &alphabet) {
                        assert_eq!(eval(&h, t1, &a).unwrap(), eval(&h, t2, &a).unwrap());
                    }
                }
            }
        }
    }
}
