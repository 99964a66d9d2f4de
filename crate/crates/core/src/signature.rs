//! Sorted signatures: sort sets, operation types, sorted variable alphabets,
//! and variety specifications (a signature plus defining identities).
//!
//! All collections are ordered maps so that every enumeration and report in
//! the crate is deterministic; the canonical order is lexicographic on names.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::term::Term;

/// The type of an operation symbol: argument sorts `(i1,...,in)` and result
/// sort `j`. An empty argument list denotes a constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct OpType {
    pub args: Vec<String>,
    pub result: String,
}

impl OpType {
    pub fn new(args: Vec<String>, result: impl Into<String>) -> Self {
        OpType {
            args,
            result: result.into(),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_constant(&self) -> bool {
        self.args.is_empty()
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) -> {}", self.args.join(","), self.result)
    }
}

/// A many-sorted signature: a finite set of sort names and a map from
/// operation names to their types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub sorts: BTreeSet<String>,
    pub ops: BTreeMap<String, OpType>,
}

impl Signature {
    pub fn new() -> Self {
        Signature {
            sorts: BTreeSet::new(),
            ops: BTreeMap::new(),
        }
    }

    pub fn with_sorts<I, S>(sorts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Signature {
            sorts: sorts.into_iter().map(Into::into).collect(),
            ops: BTreeMap::new(),
        }
    }

    pub fn add_op(&mut self, name: impl Into<String>, args: Vec<&str>, result: &str) {
        self.ops.insert(
            name.into(),
            OpType::new(args.into_iter().map(String::from).collect(), result),
        );
    }

    pub fn op(&self, name: &str) -> Option<&OpType> {
        self.ops.get(name)
    }

    pub fn has_sort(&self, sort: &str) -> bool {
        self.sorts.contains(sort)
    }
}

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

/// A sorted variable alphabet: the sorting map `X -> Gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SortedAlphabet {
    pub vars: BTreeMap<String, String>,
}

impl SortedAlphabet {
    pub fn new() -> Self {
        SortedAlphabet {
            vars: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        SortedAlphabet {
            vars: pairs
                .into_iter()
                .map(|(v, s)| (v.into(), s.into()))
                .collect(),
        }
    }

    pub fn sort_of(&self, var: &str) -> Option<&str> {
        self.vars.get(var).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    /// Variables of the given sort, in name order.
    pub fn vars_of_sort<'a>(&'a self, sort: &'a str) -> impl Iterator<Item = &'a str> {
        self.vars
            .iter()
            .filter(move |(_, s)| s.as_str() == sort)
            .map(|(v, _)| v.as_str())
    }
}

/// One defining identity `lhs = rhs`, carrying its own alphabet (the letters
/// that may occur in either side, with their sorts).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Identity {
    pub alphabet: SortedAlphabet,
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// A variety specification: a signature together with its defining identities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarietySpec {
    pub signature: Signature,
    pub identities: Vec<Identity>,
}

/// Outcome of a structural validation pass. `violations` empty means ok.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            for (i, v) in self.violations.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "violation: {v}")?;
            }
            Ok(())
        }
    }
}

/// Checks structural well-formedness of a signature: a nonempty sort set and
/// every operation type referencing only declared sorts.
pub fn validate_signature(sig: &Signature) -> ValidationReport {
    let mut report = ValidationReport::default();
    if sig.sorts.is_empty() {
        report.push("no sorts declared".to_string());
    }
    for (name, ty) in &sig.ops {
        for (pos, arg) in ty.args.iter().enumerate() {
            if !sig.has_sort(arg) {
                report.push(format!(
                    "op `{name}`: undeclared sort `{arg}` at argument {pos}"
                ));
            }
        }
        if !sig.has_sort(&ty.result) {
            report.push(format!(
                "op `{name}`: undeclared result sort `{}`",
                ty.result
            ));
        }
    }
    report
}

/// Checks that every identity of a variety is sort-correct: both sides are
/// well-sorted terms over the identity's alphabet and share a sort.
pub fn validate_variety(variety: &VarietySpec) -> ValidationReport {
    let mut report = validate_signature(&variety.signature);
    for (idx, identity) in variety.identities.iter().enumerate() {
        for (var, sort) in &identity.alphabet.vars {
            if !variety.signature.has_sort(sort) {
                report.push(format!(
                    "identity {idx}: variable `{var}` has undeclared sort `{sort}`"
                ));
            }
        }
        let mut side = |label: &str, term: &Term| match term.check_sorts(
            &variety.signature,
            &identity.alphabet,
        ) {
            Ok(()) => None,
            Err(e) => {
                report.push(format!("identity {idx}, {label}: {e}"));
                Some(())
            }
        };
        let lhs_bad = side("lhs", &identity.lhs).is_some();
        let rhs_bad = side("rhs", &identity.rhs).is_some();
        if !lhs_bad && !rhs_bad && identity.lhs.sort() != identity.rhs.sort() {
            report.push(format!(
                "identity {idx}: sides have different sorts `{}` and `{}`",
                identity.lhs.sort(),
                identity.rhs.sort()
            ));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    fn single_sorted() -> Signature {
        let mut sig = Signature::with_sorts(["s"]);
        sig.add_op("mul", vec!["s", "s"], "s");
        sig
    }

    #[test]
    fn minimal_signature_ok() {
        assert!(validate_signature(&single_sorted()).is_ok());
    }

    #[test]
    fn undeclared_sort_is_reported() {
        let mut sig = Signature::with_sorts(["s"]);
        sig.add_op("f", vec!["t"], "s");
        let report = validate_signature(&sig);
        assert!(!report.is_ok());
        assert!(report.violations[0].contains("undeclared sort `t`"));
    }

    #[test]
    fn semigroup_action_signature_ok() {
        let sig = crate::freealg::act_variety().signature;
        assert_eq!(sig.op("mul").unwrap().args, vec!["1", "1"]);
        assert_eq!(sig.op("mul").unwrap().result, "1");
        assert_eq!(sig.op("act").unwrap().args, vec!["1", "2"]);
        assert_eq!(sig.op("act").unwrap().result, "2");
        assert!(validate_signature(&sig).is_ok());
    }

    #[test]
    fn act_variety_validates() {
        assert!(validate_variety(&crate::freealg::act_variety()).is_ok());
    }

    #[test]
    fn empty_identity_list_is_a_variety() {
        let v = VarietySpec {
            signature: single_sorted(),
            identities: vec![],
        };
        assert!(validate_variety(&v).is_ok());
    }

    #[test]
    fn cross_sort_identity_rejected() {
        let variety = crate::freealg::act_variety();
        let alphabet = SortedAlphabet::from_pairs([("x", "1"), ("v", "2")]);
        let bad = VarietySpec {
            signature: variety.signature.clone(),
            identities: vec![Identity {
                alphabet,
                lhs: Term::var("x", "1"),
                rhs: Term::var("v", "2"),
            }],
        };
        let report = validate_variety(&bad);
        assert!(!report.is_ok());
        assert!(report.violations[0].contains("different sorts"));
    }

    #[test]
    fn validation_is_order_independent() {
        let mut a = Signature::with_sorts(["1", "2"]);
        a.add_op("mul", vec!["1", "1"], "1");
        a.add_op("act", vec!["1", "2"], "2");
        let mut b = Signature::with_sorts(["2", "1"]);
        b.add_op("act", vec!["1", "2"], "2");
        b.add_op("mul", vec!["1", "1"], "1");
        assert_eq!(validate_signature(&a), validate_signature(&b));
        assert_eq!(a, b);
    }
}
