//! Word-system search for the built-in varieties, classification of
//! strongly stable automorphism candidates, automorphic equivalence via the
//! derived-algebra reduction, and an exploratory counterexample scan over
//! finite models.
//!
//! The pipeline per candidate system: reject fast on small probe models
//! (the derived algebra must stay inside the variety), then reject on free
//! fragments (the induced map must be bijective there). Whatever survives is
//! accepted up to the configured bounds, never absolutely.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::freealg::{free_elements_up_to, nf_to_term, VarietyId};
use crate::geometry::{
    closure_member, geom_equivalent, GeometryBudget, GeometryError, GeomVerdict, GeomWitness,
};
use crate::model::{
    in_variety, witness_violation, AlgebraBuilder, Assignment, FiniteAlgebra, ModelError, OpTable,
};
use crate::signature::{SortedAlphabet, VarietySpec};
use crate::verbal::{
    check_derived_in_variety, derive_algebra, designated_vars, induced_s, SRejection, SVerdict,
    VerbalError, Word, WordSystem,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget {
        what: String,
        needed: u128,
        budget: u128,
    },
    #[error("algebra is not in the variety: {0}")]
    NotInVariety(String),
    #[error("word system leaves the variety on model `{0}`; it does not satisfy the search precondition")]
    InvalidWordSystem(String),
    #[error(transparent)]
    Verbal(#[from] VerbalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Bounds for the classification and equivalence searches.
#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub variety: VarietyId,
    /// Generator-occurrence cap on each candidate word.
    pub max_word_size: usize,
    /// Size cap for the free fragments checked by `induced_s`.
    pub fragment_bound: usize,
    /// Probe models are enumerated exhaustively up to this many elements per
    /// sort.
    pub probe_max_elems: usize,
    /// Generator bound handed to the geometric-equivalence scan.
    pub max_generators: usize,
    /// Include bare-projection words among the candidates.
    pub include_projections: bool,
    /// Cap on the number of enumerated probe models.
    pub max_models: u128,
    pub geometry: GeometryBudget,
}

impl SearchConfig {
    pub fn new(variety: VarietyId) -> Self {
        SearchConfig {
            variety,
            max_word_size: 3,
            fragment_bound: 6,
            probe_max_elems: 2,
            max_generators: 2,
            include_projections: false,
            max_models: 1 << 20,
            geometry: GeometryBudget::default(),
        }
    }
}

/// All word systems of the Op1 shape with each word within the size bound,
/// in canonical order (per-op candidates ordered size-major, combined
/// lexicographically). Projection words are pruned unless requested.
pub fn enumerate_word_systems(cfg: &SearchConfig) -> Vec<WordSystem> {
    let variety = cfg.variety.variety();
    let sig = &variety.signature;
    let mut per_op: Vec<(String, Vec<Word>)> = Vec::new();
    for (op, ty) in &sig.ops {
        let alphabet = designated_vars(ty);
        let fragment = free_elements_up_to(cfg.variety, &alphabet, cfg.max_word_size);
        let mut candidates = Vec::new();
        for nf in &fragment[&ty.result] {
            let body = nf_to_term(cfg.variety, nf);
            let word = Word::new(ty.clone(), body).expect("fragment terms are valid words");
            if word.is_projection() && !cfg.include_projections {
                continue;
            }
            candidates.push(word);
        }
        per_op.push((op.clone(), candidates));
    }

    let mut systems = Vec::new();
    if per_op.iter().any(|(_, c)| c.is_empty()) {
        return systems;
    }
    let mut indices = vec![0usize; per_op.len()];
    loop {
        let words: BTreeMap<String, Word> = per_op
            .iter()
            .zip(&indices)
            .map(|((op, candidates), &i)| (op.clone(), candidates[i].clone()))
            .collect();
        systems.push(WordSystem::new(sig, words).expect("candidates are type-correct"));
        let mut pos = indices.len();
        loop {
            if pos == 0 {
                return systems;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < per_op[pos].1.len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}

/// Exhaustively enumerates the finite models of a variety with at most
/// `max_per_sort` elements per sort, in canonical order. Carrier size
/// vectors ascend lexicographically; tables ascend in row-major mixed-radix
/// order. Elements are named `e0`, `e1`, ...
pub fn enumerate_models(
    variety: &VarietySpec,
    max_per_sort: usize,
    max_models: u128,
) -> Result<Vec<FiniteAlgebra>, SearchError> {
    let sig = &variety.signature;
    let sorts: Vec<&String> = sig.sorts.iter().collect();
    let mut out = Vec::new();

    let mut sizes = vec![0usize; sorts.len()];
    loop {
        // table shapes for this carrier choice
        let carrier_of = |sort: &str| -> usize {
            sorts
                .iter()
                .position(|s| s.as_str() == sort)
                .map(|i| sizes[i])
                .unwrap_or(0)
        };
        let mut shapes: Vec<(String, usize, usize)> = Vec::new(); // op, domain, codomain
        let mut feasible = true;
        let mut combos: u128 = 1;
        for (op, ty) in &sig.ops {
            let domain: usize = ty.args.iter().map(|s| carrier_of(s)).product();
            let codomain = carrier_of(&ty.result);
            if domain > 0 && codomain == 0 {
                feasible = false;
                break;
            }
            let count = (codomain.max(1) as u128).saturating_pow(domain as u32);
            combos = combos.saturating_mul(count);
            shapes.push((op.clone(), domain, codomain));
        }
        if feasible {
            if combos > max_models {
                return Err(SearchError::Budget {
                    what: "candidate models".to_string(),
                    needed: combos,
                    budget: max_models,
                });
            }
            let total_cells: usize = shapes.iter().map(|(_, d, _)| *d).sum();
            let mut cells: Vec<usize> = vec![0; total_cells];
            loop {
                // build an algebra from the current cell values
                let mut builder_carriers: BTreeMap<String, Vec<String>> = BTreeMap::new();
                for (i, sort) in sorts.iter().enumerate() {
                    builder_carriers.insert(
                        (*sort).clone(),
                        (0..sizes[i]).map(|k| format!("e{k}")).collect(),
                    );
                }
                let mut tables = BTreeMap::new();
                let mut at = 0usize;
                for (op, domain, _) in &shapes {
                    tables.insert(
                        op.clone(),
                        OpTable {
                            data: cells[at..at + domain].to_vec(),
                        },
                    );
                    at += domain;
                }
                let alg = FiniteAlgebra {
                    signature: sig.clone(),
                    carriers: builder_carriers,
                    tables,
                };
                debug_assert!(alg.validate().is_ok());
                if in_variety(&alg, variety) {
                    out.push(alg);
                }

                // advance the mixed-radix cell counter
                let mut pos = cells.len();
                let mut done = true;
                while pos > 0 {
                    pos -= 1;
                    // codomain of the table this cell belongs to
                    let mut acc = 0usize;
                    let mut codomain = 1usize;
                    for (_, domain, cod) in &shapes {
                        if pos < acc + domain {
                            codomain = *cod;
                            break;
                        }
                        acc += domain;
                    }
                    cells[pos] += 1;
                    if cells[pos] < codomain {
                        done = false;
                        break;
                    }
                    cells[pos] = 0;
                }
                if done {
                    break;
                }
            }
        }

        let mut pos = sizes.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            sizes[pos] += 1;
            if sizes[pos] <= max_per_sort {
                break;
            }
            sizes[pos] = 0;
        }
    }
}

/// Why a candidate word system was rejected.
#[derive(Debug, Clone, Serialize)]
pub enum RejectReason {
    /// The derived algebra of an in-variety probe model violates a defining
    /// identity at a specific assignment.
    ProbeViolation {
        model: FiniteAlgebra,
        identity: String,
        assignment: BTreeMap<String, String>,
    },
    /// The induced map on a free fragment cannot be a bijection.
    Fragment {
        alphabet: SortedAlphabet,
        rejection: SRejection,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectedCandidate {
    pub system: WordSystem,
    pub reason: RejectReason,
}

/// Outcome of the classification search: every candidate lands in
/// `rejected` (definitive, witness-backed) or `accepted` (up to bounds).
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub examined: usize,
    pub accepted: Vec<WordSystem>,
    pub rejected: Vec<RejectedCandidate>,
}

/// The fragment alphabets checked per variety; the first entries are the
/// designated-variable algebras of the operations themselves.
pub fn fragment_alphabets(variety: VarietyId) -> Vec<SortedAlphabet> {
    let counts: Vec<Vec<usize>> = match variety {
        VarietyId::Act => vec![vec![2, 0], vec![1, 1], vec![2, 1]],
        VarietyId::Automaton => vec![vec![1, 1, 0], vec![2, 1, 0], vec![1, 1, 1]],
    };
    let sorts: Vec<String> = variety
        .variety()
        .signature
        .sorts
        .iter()
        .cloned()
        .collect();
    counts
        .into_iter()
        .map(|vector| {
            let mut alphabet = SortedAlphabet::new();
            for (sort, &count) in sorts.iter().zip(vector.iter()) {
                for i in 1..=count {
                    alphabet.vars.insert(format!("x{i}_{sort}"), sort.clone());
                }
            }
            alphabet
        })
        .collect()
}

/// Runs the full rejection pipeline on every candidate word system.
pub fn classify_strongly_stable(cfg: &SearchConfig) -> Result<ClassificationReport, SearchError> {
    let variety = cfg.variety.variety();
    let candidates = enumerate_word_systems(cfg);
    let probes = enumerate_models(&variety, cfg.probe_max_elems, cfg.max_models)?;
    let alphabets = fragment_alphabets(cfg.variety);

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    'candidates: for system in &candidates {
        for probe in &probes {
            let derived = derive_algebra(probe, system)?;
            for identity in &variety.identities {
                if let Some(assignment) = witness_violation(&derived.algebra, identity) {
                    rejected.push(RejectedCandidate {
                        system: system.clone(),
                        reason: RejectReason::ProbeViolation {
                            model: probe.clone(),
                            identity: identity.to_string(),
                            assignment: render_assignment(probe, identity, &assignment),
                        },
                    });
                    continue 'candidates;
                }
            }
        }
        for alphabet in &alphabets {
            let s = induced_s(cfg.variety, alphabet, system, cfg.fragment_bound)?;
            if let SVerdict::Rejected(rejection) = s.verdict {
                rejected.push(RejectedCandidate {
                    system: system.clone(),
                    reason: RejectReason::Fragment {
                        alphabet: alphabet.clone(),
                        rejection,
                    },
                });
                continue 'candidates;
            }
        }
        accepted.push(system.clone());
    }

    Ok(ClassificationReport {
        examined: candidates.len(),
        accepted,
        rejected,
    })
}

fn render_assignment(
    alg: &FiniteAlgebra,
    identity: &crate::signature::Identity,
    assignment: &Assignment,
) -> BTreeMap<String, String> {
    assignment
        .values
        .iter()
        .map(|(var, &elem)| {
            let sort = identity.alphabet.sort_of(var).unwrap_or("?");
            (
                var.clone(),
                alg.carrier(sort)
                    .get(elem)
                    .cloned()
                    .unwrap_or_else(|| format!("#{elem}")),
            )
        })
        .collect()
}

/// Replays a rejection record: the cited check must fail again on the cited
/// witness.
pub fn replay_rejection(rejection: &RejectedCandidate, cfg: &SearchConfig) -> Result<bool, SearchError> {
    match &rejection.reason {
        RejectReason::ProbeViolation { model, .. } => {
            let variety = cfg.variety.variety();
            Ok(in_variety(model, &variety)
                && !check_derived_in_variety(model, &rejection.system, &variety)?)
        }
        RejectReason::Fragment {
            alphabet,
            rejection: expected,
        } => {
            let s = induced_s(cfg.variety, alphabet, &rejection.system, cfg.fragment_bound)?;
            Ok(matches!(s.verdict, SVerdict::Rejected(ref got) if got == expected))
        }
    }
}

/// Verdict of the automorphic-equivalence search.
#[derive(Debug, Clone, Serialize)]
pub enum AutoVerdict {
    /// Some accepted word system makes the first algebra geometrically
    /// equivalent to the derived second algebra.
    Yes { system: WordSystem },
    /// No accepted system worked within the bounds; one witness per system.
    NoUpToBounds { attempts: Vec<AutoAttempt> },
}

#[derive(Debug, Clone, Serialize)]
pub struct AutoAttempt {
    pub system: WordSystem,
    pub witness: GeomWitness,
}

impl AutoVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, AutoVerdict::Yes { .. })
    }
}

/// Decides automorphic equivalence up to bounds by scanning the accepted
/// word systems: the algebras are automorphically equivalent iff some valid
/// system makes `h1` geometrically equivalent to the derived `h2`.
pub fn auto_equivalent(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    cfg: &SearchConfig,
) -> Result<AutoVerdict, SearchError> {
    let variety = cfg.variety.variety();
    for (name, alg) in [("first", h1), ("second", h2)] {
        if !in_variety(alg, &variety) {
            return Err(SearchError::NotInVariety(name.to_string()));
        }
    }
    let classification = classify_strongly_stable(cfg)?;
    let mut attempts = Vec::new();
    for system in &classification.accepted {
        let derived = derive_algebra(h2, system)?;
        match geom_equivalent(h1, &derived.algebra, cfg.max_generators, &cfg.geometry)? {
            GeomVerdict::EquivalentUpToBound => {
                return Ok(AutoVerdict::Yes {
                    system: system.clone(),
                })
            }
            GeomVerdict::NotEquivalent(witness) => attempts.push(AutoAttempt {
                system: system.clone(),
                witness,
            }),
        }
    }
    Ok(AutoVerdict::NoUpToBounds { attempts })
}

/// A verified counterexample: a model geometrically inequivalent to its own
/// derived algebra.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub model: FiniteAlgebra,
    pub witness: GeomWitness,
}

/// Scans the finite models of a variety for one that is not geometrically
/// equivalent to its derived algebra under `system`. Any hit is re-verified
/// end to end through plain closure membership before being reported.
pub fn counterexample_search(
    variety: &VarietySpec,
    system: &WordSystem,
    max_model_elems: usize,
    cfg: &SearchConfig,
) -> Result<Option<Counterexample>, SearchError> {
    let models = enumerate_models(variety, max_model_elems, cfg.max_models)?;
    for model in models {
        let derived = derive_algebra(&model, system)?;
        if !in_variety(&derived.algebra, variety) {
            // the system was not valid for this variety after all
            let label = model
                .carriers
                .iter()
                .map(|(s, c)| format!("{s}:{}", c.len()))
                .collect::<Vec<_>>()
                .join(",");
            return Err(SearchError::InvalidWordSystem(label));
        }
        if let GeomVerdict::NotEquivalent(witness) =
            geom_equivalent(&model, &derived.algebra, cfg.max_generators, &cfg.geometry)?
        {
            // end-to-end re-verification through membership queries
            let in_model = closure_member(
                &witness.system,
                &model,
                (&witness.lhs, &witness.rhs),
                &cfg.geometry,
            )?;
            let in_derived = closure_member(
                &witness.system,
                &derived.algebra,
                (&witness.lhs, &witness.rhs),
                &cfg.geometry,
            )?;
            if in_model == in_derived {
                // witness failed to replay; treat as no hit rather than
                // report an unverified counterexample
                continue;
            }
            return Ok(Some(Counterexample { model, witness }));
        }
    }
    Ok(None)
}

/// Convenience constructor used by tests and fixtures.
pub fn builder(variety: &VarietySpec) -> AlgebraBuilder {
    AlgebraBuilder::new(&variety.signature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::{act_variety, ACT_MUL, ACT_OP};

    fn act_cfg() -> SearchConfig {
        SearchConfig::new(VarietyId::Act)
    }

    fn left_proj_action() -> FiniteAlgebra {
        builder(&act_variety())
            .carrier("1", &["a", "b"])
            .carrier("2", &["p", "q"])
            .table(ACT_MUL, &["a", "a", "b", "b"])
            .table(ACT_OP, &["p", "p", "q", "q"])
            .build()
    }

    #[test]
    fn act_candidates_at_bound_two() {
        let mut cfg = act_cfg();
        cfg.max_word_size = 2;
        let systems = enumerate_word_systems(&cfg);
        // four size-2 mul words, one size-2 act word
        assert_eq!(systems.len(), 4);
        let mul_bodies: Vec<String> = systems
            .iter()
            .map(|s| s.word(ACT_MUL).body.to_string())
            .collect();
        assert!(mul_bodies.contains(&"mul(x1,x2)".to_string()));
        assert!(mul_bodies.contains(&"mul(x2,x1)".to_string()));
        for s in &systems {
            assert_eq!(s.word(ACT_OP).body.to_string(), "act(x1,x2)");
        }
    }

    #[test]
    fn bound_one_prunes_to_nothing() {
        let mut cfg = act_cfg();
        cfg.max_word_size = 1;
        assert!(enumerate_word_systems(&cfg).is_empty());
        cfg.include_projections = true;
        let systems = enumerate_word_systems(&cfg);
        assert!(!systems.is_empty());
        assert!(systems.iter().all(|s| s.word(ACT_MUL).is_projection()));
    }

    #[test]
    fn probe_models_small_and_in_variety() {
        let v = act_variety();
        let probes = enumerate_models(&v, 1, 1 << 20).unwrap();
        // carriers (0,0), (0,1), (1,0), (1,1): all singleton tables
        assert_eq!(probes.len(), 4);
        for p in &probes {
            assert!(in_variety(p, &v));
        }
    }

    #[test]
    fn act_classification_accepts_only_identity() {
        let report = classify_strongly_stable(&act_cfg()).unwrap();
        assert_eq!(report.examined, report.accepted.len() + report.rejected.len());
        assert_eq!(report.accepted.len(), 1);
        assert!(report.accepted[0].is_identity(&act_variety().signature));
    }

    #[test]
    fn act_opposite_system_rejected_by_probe_with_replay() {
        let report = classify_strongly_stable(&act_cfg()).unwrap();
        let opposite = report
            .rejected
            .iter()
            .find(|r| {
                r.system.word(ACT_MUL).body.to_string() == "mul(x2,x1)"
                    && r.system.word(ACT_OP).body.to_string() == "act(x1,x2)"
            })
            .expect("opposite system among rejections");
        match &opposite.reason {
            RejectReason::ProbeViolation { identity, .. } => {
                // the mixed associativity law is the separating identity
                assert!(identity.contains("act("));
            }
            other => panic!("expected probe rejection, got {other:?}"),
        }
        assert!(replay_rejection(opposite, &act_cfg()).unwrap());
    }

    #[test]
    fn every_rejection_replays() {
        let cfg = act_cfg();
        let report = classify_strongly_stable(&cfg).unwrap();
        for rejection in &report.rejected {
            assert!(
                replay_rejection(rejection, &cfg).unwrap(),
                "rejection failed to replay: {:?}",
                rejection.reason
            );
        }
    }

    #[test]
    fn automaton_classification_accepts_only_identity() {
        let cfg = SearchConfig::new(VarietyId::Automaton);
        let report = classify_strongly_stable(&cfg).unwrap();
        assert_eq!(report.accepted.len(), 1);
        assert!(report.accepted[0].is_identity(&crate::freealg::automaton_variety().signature));
        // with no defining identities every rejection comes from fragments
        for r in &report.rejected {
            assert!(matches!(r.reason, RejectReason::Fragment { .. }));
        }
    }

    #[test]
    fn auto_equivalence_reflexive() {
        let alg = left_proj_action();
        let verdict = auto_equivalent(&alg, &alg, &act_cfg()).unwrap();
        match verdict {
            AutoVerdict::Yes { system } => {
                assert!(system.is_identity(&act_variety().signature));
            }
            other => panic!("expected YES, got {other:?}"),
        }
    }

    #[test]
    fn auto_equivalence_requires_variety_membership() {
        let v = act_variety();
        // right-projection semigroup with an action table breaking the
        // mixed law: act(mul(a,b),p)=act(b,p) vs act(a,act(b,p))
        let bad = builder(&v)
            .carrier("1", &["a", "b"])
            .carrier("2", &["p", "q"])
            .table(ACT_MUL, &["a", "b", "a", "b"])
            .table(ACT_OP, &["p", "q", "q", "p"])
            .build();
        assert!(!in_variety(&bad, &v));
        assert!(matches!(
            auto_equivalent(&bad, &bad, &act_cfg()),
            Err(SearchError::NotInVariety(_))
        ));
    }

    #[test]
    fn counterexample_search_identity_finds_nothing() {
        let v = act_variety();
        let w = WordSystem::identity(&v.signature);
        let mut cfg = act_cfg();
        cfg.max_generators = 1;
        let hit = counterexample_search(&v, &w, 1, &cfg).unwrap();
        assert!(hit.is_none());
    }
}
