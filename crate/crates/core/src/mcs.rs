//! Unstratified multi-context systems: contexts, bridge rules, belief states,
//! equilibria and bridge-rule modification.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::{
    BeliefSet, CompiledKb, KnowledgeBase, Literal, LiteralIndex, LogicKind, Signature,
};
use crate::rule_id::RuleId;
use crate::Config;

/// Hard limit on bridge rules: rule sets are packed into a `u64`.
pub const MAX_RULES: usize = 64;

/// A body condition `(context:literal)`. Context indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BodyRef {
    pub context: usize,
    pub literal: Literal,
}

impl BodyRef {
    pub fn new(context: usize, literal: Literal) -> Self {
        BodyRef { context, literal }
    }
}

impl fmt::Display for BodyRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{})", self.context, self.literal)
    }
}

/// `(owner:head) <- (r1:p1), ..., not (rk:pk)`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BridgeRule {
    pub id: RuleId,
    pub owner: usize,
    pub head: Literal,
    pub pos: Vec<BodyRef>,
    pub neg: Vec<BodyRef>,
}

impl BridgeRule {
    pub fn new(
        id: impl Into<RuleId>,
        owner: usize,
        head: Literal,
        pos: Vec<BodyRef>,
        neg: Vec<BodyRef>,
    ) -> Self {
        BridgeRule {
            id: id.into(),
            owner,
            head,
            pos,
            neg,
        }
    }

    /// Contexts referenced positively.
    pub fn cnt_pos(&self) -> BTreeSet<usize> {
        self.pos.iter().map(|b| b.context).collect()
    }

    pub fn cnt_neg(&self) -> BTreeSet<usize> {
        self.neg.iter().map(|b| b.context).collect()
    }

    /// Every context referenced in the body.
    pub fn cnt(&self) -> BTreeSet<usize> {
        self.body().map(|b| b.context).collect()
    }

    pub fn body(&self) -> impl Iterator<Item = &BodyRef> {
        self.pos.iter().chain(&self.neg)
    }

    pub fn is_unconditional(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    /// Same id, owner and head, empty body.
    pub fn unconditional(&self) -> BridgeRule {
        BridgeRule {
            id: self.id.clone(),
            owner: self.owner,
            head: self.head.clone(),
            pos: Vec::new(),
            neg: Vec::new(),
        }
    }

    /// Applicability in `state`, which must be aligned with the system.
    pub fn is_applicable(&self, state: &BeliefState) -> bool {
        self.pos
            .iter()
            .all(|b| state.0[b.context - 1].contains(&b.literal))
            && self
                .neg
                .iter()
                .all(|b| !state.0[b.context - 1].contains(&b.literal))
    }
}

impl fmt::Display for BridgeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ({}:{}) <-", self.id, self.owner, self.head)?;
        let body = self
            .pos
            .iter()
            .map(|b| b.to_string())
            .chain(self.neg.iter().map(|b| format!("not {b}")));
        for (i, b) in body.enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            f.write_str(&b)?;
        }
        f.write_str(".")
    }
}

/// A logic instance with its knowledge base and bridge rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub name: String,
    pub kb: KnowledgeBase,
    /// Sorted by rule id.
    pub rules: Vec<BridgeRule>,
    /// Atoms declared explicitly in addition to the derived signature.
    pub extra_atoms: BTreeSet<String>,
    index: usize,
    signature: Signature,
}

impl Context {
    pub fn new(name: impl Into<String>, kb: KnowledgeBase, mut rules: Vec<BridgeRule>) -> Self {
        rules.sort_by(|a, b| a.id.cmp(&b.id));
        Context {
            name: name.into(),
            kb,
            rules,
            extra_atoms: BTreeSet::new(),
            index: 0,
            signature: Signature::new(),
        }
    }

    pub fn with_atoms<S: Into<String>>(mut self, atoms: impl IntoIterator<Item = S>) -> Self {
        self.extra_atoms.extend(atoms.into_iter().map(Into::into));
        self
    }

    /// 1-based position in the owning system.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn logic(&self) -> LogicKind {
        self.kb.kind()
    }

    /// Acceptable belief sets of the knowledge base extended with `heads`.
    pub fn acc(&self, heads: &[Literal], cfg: &Config) -> Result<Vec<BeliefSet>> {
        self.kb
            .acc(&self.signature, heads, cfg.max_atoms)
            .map_err(|source| Error::Logic {
                context: self.name.clone(),
                source,
            })
    }
}

/// A finite multi-context system. Construction validates rule ownership,
/// references and id uniqueness, and derives every context's signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McsSystem {
    contexts: Vec<Context>,
}

impl McsSystem {
    pub fn new(mut contexts: Vec<Context>) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::InvalidSystem(
                "a system needs at least one context".into(),
            ));
        }
        let n = contexts.len();
        let mut seen = HashSet::new();
        for (i, ctx) in contexts.iter_mut().enumerate() {
            ctx.index = i + 1;
            for r in &ctx.rules {
                if r.owner != i + 1 {
                    return Err(Error::InvalidSystem(format!(
                        "rule {} in context {} has head ({}:{})",
                        r.id,
                        i + 1,
                        r.owner,
                        r.head
                    )));
                }
                if let Some(b) = r.body().find(|b| b.context == 0 || b.context > n) {
                    return Err(Error::InvalidSystem(format!(
                        "rule {} references unknown context {}",
                        r.id, b.context
                    )));
                }
                if !seen.insert(r.id.clone()) {
                    return Err(Error::InvalidSystem(format!("duplicate rule id {}", r.id)));
                }
            }
        }
        let mut sigs: Vec<Signature> = contexts
            .iter()
            .map(|c| {
                let mut s: Signature = c.kb.atoms().into_iter().collect();
                for a in &c.extra_atoms {
                    s.insert(a.clone());
                }
                for r in &c.rules {
                    s.insert(r.head.atom.clone());
                }
                s
            })
            .collect();
        for c in &contexts {
            for b in c.rules.iter().flat_map(BridgeRule::body) {
                sigs[b.context - 1].insert(b.literal.atom.clone());
            }
        }
        for (c, s) in contexts.iter_mut().zip(sigs) {
            c.signature = s;
        }
        Ok(McsSystem { contexts })
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// 1-based lookup.
    pub fn context(&self, index: usize) -> Option<&Context> {
        index.checked_sub(1).and_then(|i| self.contexts.get(i))
    }

    /// All bridge rules, by context then id.
    pub fn rules(&self) -> impl Iterator<Item = &BridgeRule> {
        self.contexts.iter().flat_map(|c| c.rules.iter())
    }

    pub fn rule_count(&self) -> usize {
        self.contexts.iter().map(|c| c.rules.len()).sum()
    }

    pub fn rule(&self, id: &RuleId) -> Option<&BridgeRule> {
        self.rules().find(|r| &r.id == id)
    }

    pub fn rule_ids(&self) -> BTreeSet<RuleId> {
        self.rules().map(|r| r.id.clone()).collect()
    }

    /// M[R]: the same contexts with the bridge rules replaced by `rules`.
    pub fn with_rules(&self, rules: Vec<BridgeRule>) -> Result<McsSystem> {
        let mut by_owner: Vec<Vec<BridgeRule>> = vec![Vec::new(); self.contexts.len()];
        for r in rules {
            let slot = r
                .owner
                .checked_sub(1)
                .and_then(|i| by_owner.get_mut(i))
                .ok_or_else(|| Error::InvalidSystem(format!("rule {} has no owner", r.id)))?;
            slot.push(r);
        }
        let contexts = self
            .contexts
            .iter()
            .zip(by_owner)
            .map(|(c, rules)| {
                Context::new(c.name.clone(), c.kb.clone(), rules)
                    .with_atoms(c.extra_atoms.iter().cloned())
            })
            .collect();
        McsSystem::new(contexts)
    }
}

/// One belief set per context, positionally aligned.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BeliefState(pub Vec<BeliefSet>);

impl BeliefState {
    pub fn new(sets: Vec<BeliefSet>) -> Self {
        BeliefState(sets)
    }

    pub fn sets(&self) -> &[BeliefSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for BeliefState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

fn check_aligned(m: &McsSystem, s: &BeliefState) -> Result<()> {
    if s.len() != m.len() {
        return Err(Error::Alignment {
            expected: m.len(),
            found: s.len(),
        });
    }
    Ok(())
}

/// Rules applicable in `s`, partitioned by owner (entry `i` is context
/// `i + 1`).
pub fn applicable_rules(m: &McsSystem, s: &BeliefState) -> Result<Vec<BTreeSet<RuleId>>> {
    check_aligned(m, s)?;
    Ok(m.contexts
        .iter()
        .map(|c| {
            c.rules
                .iter()
                .filter(|r| r.is_applicable(s))
                .map(|r| r.id.clone())
                .collect()
        })
        .collect())
}

/// Checks the equilibrium condition directly: every `S_i` is acceptable for
/// `kb_i` plus the heads of its applicable rules.
pub fn is_equilibrium(m: &McsSystem, s: &BeliefState, cfg: &Config) -> Result<bool> {
    check_aligned(m, s)?;
    for (c, set) in m.contexts.iter().zip(&s.0) {
        let heads: Vec<Literal> = c
            .rules
            .iter()
            .filter(|r| r.is_applicable(s))
            .map(|r| r.head.clone())
            .collect();
        if !c.acc(&heads, cfg)?.contains(set) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All equilibria in canonical order, truncated to `limit`.
pub fn enumerate_equilibria(
    m: &McsSystem,
    limit: Option<usize>,
    cfg: &Config,
) -> Result<Vec<BeliefState>> {
    let engine = Engine::new(m, cfg)?;
    let sel = Selection::full(engine.rule_count());
    let mut out: Vec<BeliefState> = engine
        .equilibria(sel)
        .into_iter()
        .map(|masks| engine.decode(&masks))
        .collect();
    out.sort();
    if let Some(n) = limit {
        out.truncate(n);
    }
    Ok(out)
}

/// True iff the system has an equilibrium.
pub fn is_consistent(m: &McsSystem, cfg: &Config) -> Result<bool> {
    let engine = Engine::new(m, cfg)?;
    Ok(engine.consistent(Selection::full(engine.rule_count())))
}

/// M[(br \ remove) ∪ heads(unconditional)]. Rules in `unconditional` keep
/// their id and owner but lose their body.
pub fn modify(
    m: &McsSystem,
    remove: &BTreeSet<RuleId>,
    unconditional: &BTreeSet<RuleId>,
) -> Result<McsSystem> {
    for id in remove.iter().chain(unconditional) {
        if m.rule(id).is_none() {
            return Err(Error::UnknownRule(id.to_string()));
        }
    }
    let rules = m
        .rules()
        .filter_map(|r| {
            if unconditional.contains(&r.id) {
                Some(r.unconditional())
            } else if remove.contains(&r.id) {
                None
            } else {
                Some(r.clone())
            }
        })
        .collect();
    m.with_rules(rules)
}

/// Contexts with no acceptable belief set when no bridge rule applies. The
/// analysis assumes this list is empty; a non-empty list is a warning.
pub fn local_consistency_warnings(m: &McsSystem, cfg: &Config) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for c in &m.contexts {
        if c.acc(&[], cfg)?.is_empty() {
            out.push(format!(
                "context {} ({}) has no acceptable belief set without bridge rules",
                c.index, c.name
            ));
        }
    }
    Ok(out)
}

/// A modified rule set over the engine's rule indices. Rules in
/// `unconditional` fire always; rules in `conditional` fire when applicable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Selection {
    pub conditional: u64,
    pub unconditional: u64,
}

impl Selection {
    pub fn full(rules: usize) -> Self {
        Selection::new(low_bits(rules), 0)
    }

    /// A rule present both conditionally and unconditionally contributes the
    /// same head as its unconditional copy alone.
    pub fn new(conditional: u64, unconditional: u64) -> Self {
        Selection {
            conditional: conditional & !unconditional,
            unconditional,
        }
    }
}

pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask & (1u64 << i) != 0)
}

/// Scatter the low bits of `pattern` onto the set bits of `support`.
fn deposit(pattern: u64, support: &[usize]) -> u64 {
    support
        .iter()
        .enumerate()
        .filter(|(i, _)| pattern & (1 << i) != 0)
        .fold(0, |m, (_, &b)| m | (1 << b))
}

#[derive(Clone)]
pub(crate) enum Parallelism {
    Sequential,
    Global,
    Pool(Arc<rayon::ThreadPool>),
}

impl Parallelism {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(0) => Parallelism::Sequential,
            None => Parallelism::Global,
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => Parallelism::Pool(Arc::new(pool)),
                Err(_) => Parallelism::Sequential,
            },
        }
    }

    pub fn is_sequential(&self) -> bool {
        matches!(self, Parallelism::Sequential)
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match self {
            Parallelism::Pool(p) => p.install(f),
            _ => f(),
        }
    }
}

struct EngineContext {
    index: LiteralIndex,
    kb: CompiledKb,
    cache: RwLock<HashMap<u64, Arc<Vec<u64>>>>,
}

struct EngineRule {
    owner: usize,
    head: u64,
    pos: Vec<(usize, u64)>,
    neg: Vec<(usize, u64)>,
}

impl EngineRule {
    fn applicable(&self, state: &[u64]) -> bool {
        self.pos.iter().all(|&(c, m)| state[c] & m == m)
            && self.neg.iter().all(|&(c, m)| state[c] & m == 0)
    }
}

/// Bit-packed view of a system for repeated equilibrium search. Acceptable
/// belief sets are memoized per (context, added heads).
pub(crate) struct Engine {
    contexts: Vec<EngineContext>,
    rules: Vec<EngineRule>,
    ids: Vec<RuleId>,
    parallelism: Parallelism,
}

impl Engine {
    pub fn new(m: &McsSystem, cfg: &Config) -> Result<Self> {
        let n_rules = m.rule_count();
        let rule_cap = cfg.max_rules.min(MAX_RULES);
        if n_rules > rule_cap {
            return Err(Error::Capacity {
                what: "bridge rules".into(),
                found: n_rules,
                cap: rule_cap,
            });
        }
        let atom_cap = cfg.max_atoms.min(crate::logic::MAX_SIGNATURE_ATOMS);
        for c in &m.contexts {
            if c.signature.len() > atom_cap {
                return Err(Error::Capacity {
                    what: format!("signature of context `{}`", c.name),
                    found: c.signature.len(),
                    cap: atom_cap,
                });
            }
        }
        let contexts: Vec<EngineContext> = m
            .contexts
            .iter()
            .map(|c| EngineContext {
                index: LiteralIndex::new(&c.signature),
                kb: CompiledKb::compile(&c.kb, &c.signature),
                cache: RwLock::new(HashMap::new()),
            })
            .collect();
        let group = |refs: &[BodyRef]| -> Vec<(usize, u64)> {
            let mut out: Vec<(usize, u64)> = Vec::new();
            for b in refs {
                let bit = contexts[b.context - 1]
                    .index
                    .bit(&b.literal)
                    .expect("body literal in signature");
                match out.iter_mut().find(|(c, _)| *c == b.context - 1) {
                    Some((_, m)) => *m |= bit,
                    None => out.push((b.context - 1, bit)),
                }
            }
            out
        };
        let rules = m
            .rules()
            .map(|r| EngineRule {
                owner: r.owner - 1,
                head: contexts[r.owner - 1]
                    .index
                    .bit(&r.head)
                    .expect("head in signature"),
                pos: group(&r.pos),
                neg: group(&r.neg),
            })
            .collect();
        Ok(Engine {
            contexts,
            rules,
            ids: m.rules().map(|r| r.id.clone()).collect(),
            parallelism: Parallelism::from_workers(cfg.workers),
        })
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn parallelism(&self) -> &Parallelism {
        &self.parallelism
    }

    pub fn mask_of<'a>(&self, ids: impl IntoIterator<Item = &'a RuleId>) -> Result<u64> {
        let mut mask = 0;
        for id in ids {
            let i = self
                .ids
                .iter()
                .position(|x| x == id)
                .ok_or_else(|| Error::UnknownRule(id.to_string()))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn ids_of(&self, mask: u64) -> BTreeSet<RuleId> {
        bits(mask).map(|i| self.ids[i].clone()).collect()
    }

    pub fn decode(&self, masks: &[u64]) -> BeliefState {
        BeliefState(
            self.contexts
                .iter()
                .zip(masks)
                .map(|(c, &m)| c.index.decode(m))
                .collect(),
        )
    }

    fn acc(&self, ctx: usize, heads: u64) -> Arc<Vec<u64>> {
        let c = &self.contexts[ctx];
        if let Some(hit) = c.cache.read().expect("cache lock").get(&heads) {
            return Arc::clone(hit);
        }
        let sets = Arc::new(c.kb.acc(heads));
        c.cache
            .write()
            .expect("cache lock")
            .entry(heads)
            .or_insert(sets)
            .clone()
    }

    /// Equilibria whose applicable conditional rules are exactly `guess`.
    fn equilibria_for_guess(&self, sel: Selection, guess: u64, first_only: bool) -> Vec<Vec<u64>> {
        let n = self.contexts.len();
        let mut heads = vec![0u64; n];
        for i in bits(guess | sel.unconditional) {
            let r = &self.rules[i];
            heads[r.owner] |= r.head;
        }
        let mut options = Vec::with_capacity(n);
        for (ctx, &h) in heads.iter().enumerate() {
            let sets = self.acc(ctx, h);
            if sets.is_empty() {
                return Vec::new();
            }
            options.push(sets);
        }
        let mut out = Vec::new();
        let mut odometer = vec![0usize; n];
        let mut state: Vec<u64> = options.iter().map(|o| o[0]).collect();
        loop {
            let app = bits(sel.conditional)
                .filter(|&i| self.rules[i].applicable(&state))
                .fold(0u64, |m, i| m | (1 << i));
            if app == guess {
                out.push(state.clone());
                if first_only {
                    return out;
                }
            }
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                odometer[k] += 1;
                if odometer[k] < options[k].len() {
                    state[k] = options[k][odometer[k]];
                    break;
                }
                odometer[k] = 0;
                state[k] = options[k][0];
                k += 1;
            }
        }
    }

    fn support(sel: Selection) -> (Vec<usize>, u64) {
        let support: Vec<usize> = bits(sel.conditional).collect();
        let count = 1u64 << support.len();
        (support, count)
    }

    /// Every equilibrium of the selected system, unordered.
    pub fn equilibria(&self, sel: Selection) -> Vec<Vec<u64>> {
        let (support, count) = Self::support(sel);
        let run = |p: u64| self.equilibria_for_guess(sel, deposit(p, &support), false);
        if self.parallelism.is_sequential() {
            (0..count).flat_map(run).collect()
        } else {
            self.parallelism
                .install(|| (0..count).into_par_iter().flat_map_iter(run).collect())
        }
    }

    pub fn consistent(&self, sel: Selection) -> bool {
        if self.parallelism.is_sequential() {
            return self.consistent_seq(sel);
        }
        let (support, count) = Self::support(sel);
        self.parallelism.install(|| {
            (0..count).into_par_iter().any(|p| {
                !self
                    .equilibria_for_guess(sel, deposit(p, &support), true)
                    .is_empty()
            })
        })
    }

    /// Single-threaded consistency check, for callers that parallelize at
    /// an outer level.
    pub fn consistent_seq(&self, sel: Selection) -> bool {
        let (support, count) = Self::support(sel);
        (0..count).any(|p| {
            !self
                .equilibria_for_guess(sel, deposit(p, &support), true)
                .is_empty()
        })
    }
}
