//! Shared test support: fixture loading, random systems and independent
//! brute-force oracles that only use the public data types.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use pmcs::logic::{AspProgram, AspRule, Formula, PropKb};
use pmcs::mcs::{modify, BodyRef, BridgeRule, Context, McsSystem};
use pmcs::{
    dsl, BeliefSet, BeliefState, KnowledgeBase, Literal, PmcsSystem, RuleId, StratifiedBeliefState,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture(name: &str) -> PmcsSystem {
    dsl::parse(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

/// `"-a"` is the classical negation of `a`.
pub fn lit(s: &str) -> Literal {
    match s.strip_prefix('-') {
        Some(a) => Literal::neg(a),
        None => Literal::pos(s),
    }
}

pub fn bs(lits: &[&str]) -> BeliefSet {
    let mut b = BeliefSet::new();
    for l in lits {
        b.insert(lit(l));
    }
    b
}

pub fn state(sets: &[&[&str]]) -> BeliefState {
    BeliefState(sets.iter().map(|s| bs(s)).collect())
}

pub fn stratified(strata: &[&[&[&str]]]) -> StratifiedBeliefState {
    StratifiedBeliefState(
        strata
            .iter()
            .map(|s| s.iter().map(|b| bs(b)).collect())
            .collect(),
    )
}

pub fn ids(names: &[&str]) -> BTreeSet<RuleId> {
    names.iter().map(|s| RuleId::from(*s)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Random systems

#[derive(Clone, Debug)]
pub struct GenParams {
    pub max_contexts: usize,
    pub max_rules: usize,
    /// Shared atom pool; every signature is a subset of it.
    pub atoms: Vec<&'static str>,
    pub max_kb_items: usize,
    pub stratified: bool,
    pub extra_atoms: bool,
}

impl GenParams {
    pub fn small() -> Self {
        GenParams {
            max_contexts: 4,
            max_rules: 5,
            atoms: vec!["a", "b", "c", "d"],
            max_kb_items: 3,
            stratified: false,
            extra_atoms: false,
        }
    }
}

fn random_literal(rng: &mut impl Rng, atoms: &[&str]) -> Literal {
    let atom = *atoms.choose(rng).unwrap();
    if rng.gen_bool(0.25) {
        Literal::neg(atom)
    } else {
        Literal::pos(atom)
    }
}

fn random_formula(rng: &mut impl Rng, atoms: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.4) {
        return Formula::atom(*atoms.choose(rng).unwrap());
    }
    let a = Box::new(random_formula(rng, atoms, depth - 1));
    match rng.gen_range(0..4) {
        0 => Formula::Not(a),
        1 => Formula::And(a, Box::new(random_formula(rng, atoms, depth - 1))),
        2 => Formula::Or(a, Box::new(random_formula(rng, atoms, depth - 1))),
        _ => Formula::Implies(a, Box::new(random_formula(rng, atoms, depth - 1))),
    }
}

fn random_asp_rule(rng: &mut impl Rng, atoms: &[&str]) -> AspRule {
    let head = if rng.gen_bool(0.15) {
        None
    } else {
        Some(random_literal(rng, atoms))
    };
    let pos = (0..rng.gen_range(0..=2))
        .map(|_| random_literal(rng, atoms))
        .collect();
    let neg = (0..rng.gen_range(0..=2))
        .map(|_| random_literal(rng, atoms))
        .collect();
    let mut r = AspRule { head, pos, neg };
    if r.head.is_none() && r.pos.is_empty() && r.neg.is_empty() {
        r.pos.push(random_literal(rng, atoms));
    }
    r
}

fn random_kb(rng: &mut impl Rng, p: &GenParams) -> KnowledgeBase {
    let items = rng.gen_range(0..=p.max_kb_items);
    if rng.gen_bool(0.5) {
        KnowledgeBase::Prop(PropKb::new(
            (0..items)
                .map(|_| random_formula(rng, &p.atoms, 2))
                .collect(),
        ))
    } else {
        KnowledgeBase::Asp(AspProgram::new(
            (0..items).map(|_| random_asp_rule(rng, &p.atoms)).collect(),
        ))
    }
}

fn random_body(rng: &mut impl Rng, horizon: usize, atoms: &[&str]) -> Vec<BodyRef> {
    (0..rng.gen_range(0..=2))
        .map(|_| BodyRef::new(rng.gen_range(1..=horizon), random_literal(rng, atoms)))
        .collect()
}

pub fn random_program(rng: &mut impl Rng, atoms: &[&str], rules: usize) -> AspProgram {
    AspProgram::new((0..rules).map(|_| random_asp_rule(rng, atoms)).collect())
}

pub fn random_prop_kb(rng: &mut impl Rng, atoms: &[&str], formulas: usize) -> PropKb {
    PropKb::new(
        (0..formulas)
            .map(|_| random_formula(rng, atoms, 3))
            .collect(),
    )
}

/// A random valid system. With `stratified`, the contexts are split into
/// contiguous strata and rule bodies only read from the owner's stratum or
/// more preferred ones.
pub fn random_system(rng: &mut impl Rng, p: &GenParams) -> PmcsSystem {
    let n = rng.gen_range(1..=p.max_contexts);
    let mut sizes = Vec::new();
    if p.stratified {
        let mut left = n;
        while left > 0 {
            let k = rng.gen_range(1..=left);
            sizes.push(k);
            left -= k;
        }
    } else {
        sizes.push(n);
    }
    // last context index visible from each context
    let mut horizon = Vec::with_capacity(n);
    let mut end = 0;
    for &k in &sizes {
        end += k;
        horizon.extend(std::iter::repeat_n(end, k));
    }
    let mut rules: Vec<Vec<BridgeRule>> = vec![Vec::new(); n];
    for r in 0..rng.gen_range(0..=p.max_rules) {
        let owner = rng.gen_range(1..=n);
        let pos = random_body(rng, horizon[owner - 1], &p.atoms);
        let neg = random_body(rng, horizon[owner - 1], &p.atoms);
        let head = random_literal(rng, &p.atoms);
        rules[owner - 1].push(BridgeRule::new(
            format!("r{}", r + 1),
            owner,
            head,
            pos,
            neg,
        ));
    }
    let contexts = rules
        .into_iter()
        .enumerate()
        .map(|(i, rs)| {
            let mut c = Context::new(format!("k{}", i + 1), random_kb(rng, p), rs);
            if p.extra_atoms && rng.gen_bool(0.3) {
                c = c.with_atoms([*p.atoms.choose(rng).unwrap()]);
            }
            c
        })
        .collect();
    let base = McsSystem::new(contexts).expect("generated system is valid");
    let mut next = 1;
    let strata = sizes
        .iter()
        .map(|&k| {
            let s: Vec<usize> = (next..next + k).collect();
            next += k;
            s
        })
        .collect();
    PmcsSystem::new(base, strata).expect("generated stratification is compatible")
}

pub fn random_systems(seed: u64, count: usize, p: &GenParams) -> Vec<PmcsSystem> {
    let mut r = rng(seed);
    (0..count).map(|_| random_system(&mut r, p)).collect()
}

// ---------------------------------------------------------------------------
// Independent oracles

pub type LitSet = BTreeSet<Literal>;

fn eval(f: &Formula, truth: &dyn Fn(&str) -> bool) -> bool {
    match f {
        Formula::Atom(a) => truth(a),
        Formula::Not(a) => !eval(a, truth),
        Formula::And(a, b) => eval(a, truth) && eval(b, truth),
        Formula::Or(a, b) => eval(a, truth) || eval(b, truth),
        Formula::Implies(a, b) => !eval(a, truth) || eval(b, truth),
    }
}

fn consistent(s: &LitSet) -> bool {
    s.iter().all(|l| !s.contains(&l.complement()))
}

/// Entailed literals over `atoms`, or nothing if unsatisfiable.
pub fn oracle_prop_acc(kb: &PropKb, atoms: &[String], additions: &[Literal]) -> BTreeSet<LitSet> {
    let n = atoms.len();
    let mut models: Vec<u64> = Vec::new();
    for v in 0..(1u64 << n) {
        let truth = |a: &str| {
            let i = atoms
                .iter()
                .position(|x| x == a)
                .expect("atom in signature");
            v & (1 << i) != 0
        };
        let ok = kb.formulas.iter().all(|f| eval(f, &truth))
            && additions.iter().all(|l| truth(&l.atom) != l.negated);
        if ok {
            models.push(v);
        }
    }
    if models.is_empty() {
        return BTreeSet::new();
    }
    let mut s = LitSet::new();
    for (i, a) in atoms.iter().enumerate() {
        if models.iter().all(|v| v & (1 << i) != 0) {
            s.insert(Literal::pos(a.as_str()));
        }
        if models.iter().all(|v| v & (1 << i) == 0) {
            s.insert(Literal::neg(a.as_str()));
        }
    }
    BTreeSet::from([s])
}

/// Answer sets by checking every consistent literal set against the
/// reduct-fixpoint definition.
pub fn oracle_asp_acc(
    program: &AspProgram,
    atoms: &[String],
    additions: &[Literal],
) -> BTreeSet<LitSet> {
    let mut rules: Vec<AspRule> = program.rules.clone();
    rules.extend(additions.iter().map(|l| AspRule {
        head: Some(l.clone()),
        pos: vec![],
        neg: vec![],
    }));
    let universe: Vec<Literal> = atoms
        .iter()
        .flat_map(|a| [Literal::pos(a.as_str()), Literal::neg(a.as_str())])
        .collect();
    let mut out = BTreeSet::new();
    for mask in 0..(1u64 << universe.len()) {
        let cand: LitSet = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| l.clone())
            .collect();
        if !consistent(&cand) {
            continue;
        }
        let reduct: Vec<&AspRule> = rules
            .iter()
            .filter(|r| r.neg.iter().all(|l| !cand.contains(l)))
            .collect();
        let mut model = LitSet::new();
        loop {
            let mut changed = false;
            for r in &reduct {
                if let Some(h) = &r.head {
                    if r.pos.iter().all(|l| model.contains(l)) && model.insert(h.clone()) {
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let violated = reduct
            .iter()
            .any(|r| r.head.is_none() && r.pos.iter().all(|l| model.contains(l)));
        if !violated && consistent(&model) && model == cand {
            out.insert(cand);
        }
    }
    out
}

pub fn oracle_acc(c: &Context, additions: &[Literal]) -> BTreeSet<LitSet> {
    let atoms: Vec<String> = c.signature().atoms().map(str::to_string).collect();
    match &c.kb {
        KnowledgeBase::Prop(kb) => oracle_prop_acc(kb, &atoms, additions),
        KnowledgeBase::Asp(p) => oracle_asp_acc(p, &atoms, additions),
    }
}

fn applicable(r: &BridgeRule, s: &[LitSet]) -> bool {
    r.pos.iter().all(|b| s[b.context - 1].contains(&b.literal))
        && r.neg.iter().all(|b| !s[b.context - 1].contains(&b.literal))
}

/// Equilibria by brute force: each context ranges over everything it could
/// accept for any subset of its rule heads, and every combination is
/// checked against the equilibrium definition.
pub fn naive_equilibria(m: &McsSystem) -> BTreeSet<Vec<LitSet>> {
    let candidates: Vec<Vec<LitSet>> = m
        .contexts()
        .iter()
        .map(|c| {
            let heads: Vec<Literal> = c.rules.iter().map(|r| r.head.clone()).collect();
            let mut all = BTreeSet::new();
            for mask in 0..(1u64 << heads.len()) {
                let chosen: Vec<Literal> = heads
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, h)| h.clone())
                    .collect();
                all.extend(oracle_acc(c, &chosen));
            }
            all.into_iter().collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; candidates.len()];
    if candidates.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        let s: Vec<LitSet> = idx
            .iter()
            .zip(&candidates)
            .map(|(&i, c)| c[i].clone())
            .collect();
        let ok = m.contexts().iter().zip(&s).all(|(c, si)| {
            let heads: Vec<Literal> = c
                .rules
                .iter()
                .filter(|r| applicable(r, &s))
                .map(|r| r.head.clone())
                .collect();
            oracle_acc(c, &heads).contains(si)
        });
        if ok {
            out.insert(s);
        }
        // odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < candidates[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn naive_consistent(m: &McsSystem) -> bool {
    !naive_equilibria(m).is_empty()
}

pub fn as_litsets(s: &BeliefState) -> Vec<LitSet> {
    s.0.iter().map(|b| b.literals().clone()).collect()
}

/// M[R1 ∪ heads(R2)].
pub fn with_selection(m: &McsSystem, r1: &BTreeSet<RuleId>, r2: &BTreeSet<RuleId>) -> McsSystem {
    let remove: BTreeSet<RuleId> = m.rule_ids().difference(r1).cloned().collect();
    modify(m, &remove, r2).expect("known rule ids")
}

/// All subsets of a rule set.
pub fn subsets(of: &BTreeSet<RuleId>) -> Vec<BTreeSet<RuleId>> {
    let v: Vec<&RuleId> = of.iter().collect();
    (0..(1u64 << v.len()))
        .map(|mask| {
            v.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, r)| (*r).clone())
                .collect()
        })
        .collect()
}
