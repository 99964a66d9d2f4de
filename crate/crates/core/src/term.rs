//! The absolutely free term algebra over a sorted alphabet: construction,
//! substitution, variable extraction and bounded enumeration.
//!
//! Terms are immutable trees with structural equality. Every `App` node
//! caches its sort so downstream code never re-derives it.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::signature::{Signature, SortedAlphabet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("op `{op}` expects {expected} arguments, got {actual}")]
    ArityMismatch {
        op: String,
        expected: usize,
        actual: usize,
    },
    #[error("op `{op}` argument {pos}: expected sort `{expected}`, got `{actual}`")]
    SortMismatch {
        op: String,
        pos: usize,
        expected: String,
        actual: String,
    },
    #[error("op `{op}`: cached sort `{actual}` does not match declared result sort `{expected}`")]
    ResultSortMismatch {
        op: String,
        expected: String,
        actual: String,
    },
    #[error("variable `{var}` declared with sort `{declared}` but used with sort `{used}`")]
    VarSortClash {
        var: String,
        declared: String,
        used: String,
    },
    #[error("variable `{0}` not declared in the alphabet")]
    UndeclaredVar(String),
    #[error("unbound variable `{0}` in substitution")]
    UnboundVar(String),
    #[error("binding for `{var}` has sort `{actual}`, expected `{expected}`")]
    BindingSortMismatch {
        var: String,
        expected: String,
        actual: String,
    },
}

/// A sorted term: a variable or an operation applied to child terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Term {
    Var { name: String, sort: String },
    App { op: String, sort: String, args: Vec<Term> },
}

impl Term {
    pub fn var(name: impl Into<String>, sort: impl Into<String>) -> Term {
        Term::Var {
            name: name.into(),
            sort: sort.into(),
        }
    }

    /// Builds an application term, checking arity and child sorts against the
    /// operation's declared type.
    pub fn app(sig: &Signature, op: &str, args: Vec<Term>) -> Result<Term, TermError> {
        let ty = sig
            .op(op)
            .ok_or_else(|| TermError::UnknownOp(op.to_string()))?;
        if ty.args.len() != args.len() {
            return Err(TermError::ArityMismatch {
                op: op.to_string(),
                expected: ty.args.len(),
                actual: args.len(),
            });
        }
        for (pos, (child, expected)) in args.iter().zip(&ty.args).enumerate() {
            if child.sort() != expected {
                return Err(TermError::SortMismatch {
                    op: op.to_string(),
                    pos,
                    expected: expected.clone(),
                    actual: child.sort().to_string(),
                });
            }
        }
        Ok(Term::App {
            op: op.to_string(),
            sort: ty.result.clone(),
            args,
        })
    }

    pub fn sort(&self) -> &str {
        match self {
            Term::Var { sort, .. } | Term::App { sort, .. } => sort,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var { .. })
    }

    /// Depth: variables have depth 0, applications 1 + max child depth.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var { .. } => 0,
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Number of nodes, used as a size measure for witnesses.
    pub fn node_count(&self) -> usize {
        match self {
            Term::Var { .. } => 1,
            Term::App { args, .. } => 1 + args.iter().map(Term::node_count).sum::<usize>(),
        }
    }

    /// The variables really occurring in the term, with their sorts.
    pub fn vars(&self) -> SortedAlphabet {
        let mut alphabet = SortedAlphabet::new();
        self.collect_vars(&mut alphabet.vars);
        alphabet
    }

    fn collect_vars(&self, into: &mut BTreeMap<String, String>) {
        match self {
            Term::Var { name, sort } => {
                into.insert(name.clone(), sort.clone());
            }
            Term::App { args, .. } => {
                for a in args {
                    a.collect_vars(into);
                }
            }
        }
    }

    /// Recursive sort-soundness validator against a signature and alphabet.
    pub fn check_sorts(
        &self,
        sig: &Signature,
        alphabet: &SortedAlphabet,
    ) -> Result<(), TermError> {
        match self {
            Term::Var { name, sort } => match alphabet.sort_of(name) {
                None => Err(TermError::UndeclaredVar(name.clone())),
                Some(declared) if declared != sort => Err(TermError::VarSortClash {
                    var: name.clone(),
                    declared: declared.to_string(),
                    used: sort.clone(),
                }),
                Some(_) => Ok(()),
            },
            Term::App { op, sort, args } => {
                let ty = sig
                    .op(op)
                    .ok_or_else(|| TermError::UnknownOp(op.clone()))?;
                if ty.args.len() != args.len() {
                    return Err(TermError::ArityMismatch {
                        op: op.clone(),
                        expected: ty.args.len(),
                        actual: args.len(),
                    });
                }
                if &ty.result != sort {
                    return Err(TermError::ResultSortMismatch {
                        op: op.clone(),
                        expected: ty.result.clone(),
                        actual: sort.clone(),
                    });
                }
                for (pos, (child, expected)) in args.iter().zip(&ty.args).enumerate() {
                    if child.sort() != expected {
                        return Err(TermError::SortMismatch {
                            op: op.clone(),
                            pos,
                            expected: expected.clone(),
                            actual: child.sort().to_string(),
                        });
                    }
                    child.check_sorts(sig, alphabet)?;
                }
                Ok(())
            }
        }
    }

    /// Applies a sort-preserving assignment of terms to variables. Total on
    /// the term's variables or an error.
    pub fn substitute(&self, assignment: &TermAssignment) -> Result<Term, TermError> {
        match self {
            Term::Var { name, sort } => match assignment.bindings.get(name) {
                None => Err(TermError::UnboundVar(name.clone())),
                Some(t) if t.sort() != sort => Err(TermError::BindingSortMismatch {
                    var: name.clone(),
                    expected: sort.clone(),
                    actual: t.sort().to_string(),
                }),
                Some(t) => Ok(t.clone()),
            },
            Term::App { op, sort, args } => {
                let args = args
                    .iter()
                    .map(|a| a.substitute(assignment))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Term::App {
                    op: op.clone(),
                    sort: sort.clone(),
                    args,
                })
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, .. } => write!(f, "{name}"),
            Term::App { op, args, .. } => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A sort-preserving map from variable names to terms.
#[derive(Debug, Clone, Default)]
pub struct TermAssignment {
    pub bindings: BTreeMap<String, Term>,
}

impl TermAssignment {
    pub fn new() -> Self {
        TermAssignment {
            bindings: BTreeMap::new(),
        }
    }

    pub fn bind(mut self, var: impl Into<String>, term: Term) -> Self {
        self.bindings.insert(var.into(), term);
        self
    }

    /// Composition `(a;b)(x) = substitute(a(x), b)`.
    pub fn then(&self, other: &TermAssignment) -> Result<TermAssignment, TermError> {
        let mut bindings = BTreeMap::new();
        for (var, term) in &self.bindings {
            bindings.insert(var.clone(), term.substitute(other)?);
        }
        Ok(TermAssignment { bindings })
    }
}

/// All well-sorted terms over the alphabet with depth at most `max_depth`,
/// each exactly once, depth-major and lexicographic within a depth level.
pub fn enumerate_terms(
    sig: &Signature,
    alphabet: &SortedAlphabet,
    max_depth: usize,
) -> Vec<Term> {
    // by_depth[d] holds the terms of exact depth d, already sorted.
    let mut by_depth: Vec<Vec<Term>> = Vec::new();
    let mut level0: Vec<Term> = alphabet
        .vars
        .iter()
        .map(|(name, sort)| Term::var(name.clone(), sort.clone()))
        .collect();
    level0.sort();
    by_depth.push(level0);

    for depth in 1..=max_depth {
        let mut level: Vec<Term> = Vec::new();
        let shallower: Vec<&Term> = by_depth.iter().flatten().collect();
        for (op, ty) in &sig.ops {
            // Constants appear once, at depth 1.
            if ty.is_constant() {
                if depth == 1 {
                    level.push(Term::App {
                        op: op.clone(),
                        sort: ty.result.clone(),
                        args: vec![],
                    });
                }
                continue;
            }
            let candidates: Vec<Vec<&Term>> = ty
                .args
                .iter()
                .map(|arg_sort| {
                    shallower
                        .iter()
                        .copied()
                        .filter(|t| t.sort() == arg_sort)
                        .collect()
                })
                .collect();
            if candidates.iter().any(Vec::is_empty) {
                continue;
            }
            let mut indices = vec![0usize; candidates.len()];
            loop {
                let args: Vec<Term> = indices
                    .iter()
                    .zip(&candidates)
                    .map(|(&i, c)| c[i].clone())
                    .collect();
                // Keep only tuples whose deepest child is at depth - 1,
                // so each term is produced exactly once.
                if args.iter().map(Term::depth).max().unwrap_or(0) == depth - 1 {
                    level.push(Term::App {
                        op: op.clone(),
                        sort: ty.result.clone(),
                        args,
                    });
                }
                let mut pos = indices.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    indices[pos] += 1;
                    if indices[pos] < candidates[pos].len() {
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
        level.sort();
        level.dedup();
        by_depth.push(level);
    }

    by_depth.into_iter().flatten().collect()
}
