//! A small congruence-closure engine over the term algebra, with sort-aware
//! class counting.
//!
//! Used to decide whether the congruence generated by a finite pair set
//! already equals its algebraic closure: saturate the e-graph under all
//! operations, capped per sort by the size of the diagonal subalgebra. The
//! quotient surjects onto the diagonal, so hitting the cap exactly (with no
//! overflow) certifies equality and any overflow certifies a strict gap.

use std::collections::BTreeMap;

use crate::signature::{Signature, SortedAlphabet};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Var(String),
    App(String, Vec<usize>),
}

pub struct CongruenceClosure {
    signature: Signature,
    parent: Vec<usize>,
    sort: Vec<String>,
    nodes: BTreeMap<Node, usize>,
}

/// Result of a capped saturation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Saturation {
    /// Stable; per-sort class counts of the full quotient.
    Complete(BTreeMap<String, usize>),
    /// Some sort exceeded its cap while saturating.
    Overflow(String),
}

impl CongruenceClosure {
    pub fn new(signature: &Signature) -> Self {
        CongruenceClosure {
            signature: signature.clone(),
            parent: Vec::new(),
            sort: Vec::new(),
            nodes: BTreeMap::new(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        // keep the smaller id as representative for determinism
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop] = keep;
        true
    }

    fn new_class(&mut self, sort: &str) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.sort.push(sort.to_string());
        id
    }

    /// Interns a term, returning its class.
    pub fn add_term(&mut self, term: &Term, alphabet: &SortedAlphabet) -> usize {
        match term {
            Term::Var { name, .. } => {
                let node = Node::Var(name.clone());
                if let Some(&c) = self.nodes.get(&node) {
                    return self.find(c);
                }
                let sort = alphabet
                    .sort_of(name)
                    .expect("equation variables are declared")
                    .to_string();
                let c = self.new_class(&sort);
                self.nodes.insert(node, c);
                c
            }
            Term::App { op, args, sort } => {
                let arg_classes: Vec<usize> = args
                    .iter()
                    .map(|a| self.add_term(a, alphabet))
                    .collect();
                self.lookup_or_create(op, &arg_classes, sort)
            }
        }
    }

    fn lookup_or_create(&mut self, op: &str, args: &[usize], sort: &str) -> usize {
        let canon: Vec<usize> = args.iter().map(|&a| self.find(a)).collect();
        let node = Node::App(op.to_string(), canon);
        if let Some(&c) = self.nodes.get(&node) {
            return self.find(c);
        }
        let c = self.new_class(sort);
        self.nodes.insert(node, c);
        c
    }

    pub fn merge(&mut self, a: usize, b: usize) {
        self.union(a, b);
        self.rebuild();
    }

    /// Recanonicalizes the node table until congruence is restored.
    fn rebuild(&mut self) {
        loop {
            let mut merges = Vec::new();
            let mut fresh: BTreeMap<Node, usize> = BTreeMap::new();
            let entries: Vec<(Node, usize)> = self
                .nodes
                .iter()
                .map(|(n, &c)| (n.clone(), c))
                .collect();
            for (node, class) in entries {
                let canon = match &node {
                    Node::Var(_) => node.clone(),
                    Node::App(op, args) => {
                        let c: Vec<usize> = args.iter().map(|&a| self.find(a)).collect();
                        Node::App(op.clone(), c)
                    }
                };
                let class = self.find(class);
                if let Some(&other) = fresh.get(&canon) {
                    if other != class {
                        merges.push((other, class));
                    }
                } else {
                    fresh.insert(canon, class);
                }
            }
            self.nodes = fresh;
            if merges.is_empty() {
                break;
            }
            for (a, b) in merges {
                self.union(a, b);
            }
        }
    }

    #[cfg(test)]
    pub fn same_class(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    fn class_counts(&mut self) -> BTreeMap<String, usize> {
        let mut roots: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for i in 0..self.parent.len() {
            let r = self.find(i);
            let sort = self.sort[r].clone();
            roots.entry(sort).or_default().push(r);
        }
        roots
            .into_iter()
            .map(|(s, mut v)| {
                v.sort_unstable();
                v.dedup();
                (s, v.len())
            })
            .collect()
    }

    fn classes_of_sort(&mut self, sort: &str) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.parent.len() {
            if self.find(i) == i && self.sort[i] == sort {
                out.push(i);
            }
        }
        out
    }

    /// Saturates under all operations: every op applied to every tuple of
    /// existing classes gets a class, re-closing after each round. Stops
    /// early once a sort holds more classes than its cap.
    pub fn saturate(&mut self, caps: &BTreeMap<String, usize>) -> Saturation {
        loop {
            if let Some(sort) = self.overflowed(caps) {
                return Saturation::Overflow(sort);
            }
            let mut grew = false;
            let ops: Vec<(String, Vec<String>, String)> = self
                .signature
                .ops
                .iter()
                .map(|(op, ty)| (op.clone(), ty.args.clone(), ty.result.clone()))
                .collect();
            for (op, arg_sorts, result) in ops {
                let pools: Vec<Vec<usize>> = arg_sorts
                    .iter()
                    .map(|s| self.classes_of_sort(s))
                    .collect();
                if pools.iter().any(Vec::is_empty) && !arg_sorts.is_empty() {
                    continue;
                }
                let mut indices = vec![0usize; pools.len()];
                let total: usize = pools.iter().map(Vec::len).product();
                for _ in 0..total {
                    let args: Vec<usize> = indices
                        .iter()
                        .zip(&pools)
                        .map(|(&i, p)| p[i])
                        .collect();
                    let before = self.parent.len();
                    let before_nodes = self.nodes.len();
                    self.lookup_or_create(&op, &args, &result);
                    if self.parent.len() > before || self.nodes.len() > before_nodes {
                        grew = true;
                    }
                    for pos in (0..indices.len()).rev() {
                        indices[pos] += 1;
                        if indices[pos] < pools[pos].len() {
                            break;
                        }
                        indices[pos] = 0;
                    }
                }
            }
            self.rebuild();
            if !grew {
                if let Some(sort) = self.overflowed(caps) {
                    return Saturation::Overflow(sort);
                }
                return Saturation::Complete(self.class_counts());
            }
        }
    }

    fn overflowed(&mut self, caps: &BTreeMap<String, usize>) -> Option<String> {
        let counts = self.class_counts();
        for (sort, count) in counts {
            let cap = caps.get(&sort).copied().unwrap_or(0);
            if count > cap {
                return Some(sort);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::{act_variety, ACT_MUL};
    use crate::signature::SortedAlphabet;

    #[test]
    fn generated_pairs_are_provable() {
        let sig = act_variety().signature;
        let alphabet = SortedAlphabet::from_pairs([("x", "1")]);
        let x = Term::var("x", "1");
        let xx = Term::app(&sig, ACT_MUL, vec![x.clone(), x.clone()]).unwrap();
        let xxx = Term::app(&sig, ACT_MUL, vec![x.clone(), xx.clone()]).unwrap();

        let mut cc = CongruenceClosure::new(&sig);
        let cx = cc.add_term(&x, &alphabet);
        let cxx = cc.add_term(&xx, &alphabet);
        cc.merge(cx, cxx);

        // congruence: x ~ xx implies mul(x, x) ~ mul(x, xx)
        let cxxx = cc.add_term(&xxx, &alphabet);
        let cxx2 = cc.add_term(&xx, &alphabet);
        assert!(cc.same_class(cxx2, cxxx));
    }

    #[test]
    fn saturation_collapses_to_one_class() {
        // x ~ mul(x,x) collapses the whole sort-1 carrier
        let sig = act_variety().signature;
        let alphabet = SortedAlphabet::from_pairs([("x", "1")]);
        let x = Term::var("x", "1");
        let xx = Term::app(&sig, ACT_MUL, vec![x.clone(), x.clone()]).unwrap();
        let mut cc = CongruenceClosure::new(&sig);
        let a = cc.add_term(&x, &alphabet);
        let b = cc.add_term(&xx, &alphabet);
        cc.merge(a, b);
        let caps = [("1".to_string(), 1)].into_iter().collect();
        match cc.saturate(&caps) {
            Saturation::Complete(counts) => {
                assert_eq!(counts.get("1"), Some(&1));
            }
            other => panic!("expected completion, got {other:?}"),
        }
    }

    #[test]
    fn free_generation_overflows_small_cap() {
        // with no merges the term algebra on one generator is infinite
        let sig = act_variety().signature;
        let alphabet = SortedAlphabet::from_pairs([("x", "1")]);
        let mut cc = CongruenceClosure::new(&sig);
        cc.add_term(&Term::var("x", "1"), &alphabet);
        let caps = [("1".to_string(), 3)].into_iter().collect();
        assert_eq!(
            cc.saturate(&caps),
            Saturation::Overflow("1".to_string())
        );
    }
}
