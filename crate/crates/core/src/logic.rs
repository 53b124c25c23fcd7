//! Logic kernel: literals, signatures, belief sets and the two concrete
//! logics contexts can be written in.
//!
//! A logic is the triple (well-formed knowledge bases, belief sets,
//! acceptability function). [`LogicEngine`] captures that triple; the two
//! instances are classical propositional logic ([`PropLogic`]) and ground
//! normal answer-set programs with constraints and classical negation
//! ([`AspLogic`]).
//!
//! Belief sets are sets of literals over a finite [`Signature`]. An
//! inconsistent propositional knowledge base has *no* acceptable belief set,
//! and an answer-set candidate containing a complementary pair is rejected.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Errors raised while checking or evaluating a single knowledge base.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("atom `{atom}` is not in the signature")]
    IllFormed { atom: String },
    #[error("{what}: {found} exceeds the enumeration cap of {cap}")]
    Capacity {
        what: &'static str,
        found: usize,
        cap: usize,
    },
}

/// Hard upper bound on signature size: literal sets are packed two bits per
/// atom into a `u64`.
pub const MAX_SIGNATURE_ATOMS: usize = 32;

/// An atom, or its classical negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: String,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: impl Into<String>) -> Self {
        Literal {
            atom: atom.into(),
            negated: false,
        }
    }

    pub fn neg(atom: impl Into<String>) -> Self {
        Literal {
            atom: atom.into(),
            negated: true,
        }
    }

    pub fn complement(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.atom)
        } else {
            f.write_str(&self.atom)
        }
    }
}

impl Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Finite, lexicographically ordered set of atom names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature(BTreeSet<String>);

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: impl Into<String>) -> bool {
        self.0.insert(atom.into())
    }

    pub fn contains(&self, atom: &str) -> bool {
        self.0.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Every literal over the signature, in canonical order.
    pub fn literals(&self) -> Vec<Literal> {
        self.0
            .iter()
            .flat_map(|a| [Literal::pos(a.clone()), Literal::neg(a.clone())])
            .collect()
    }
}

impl<S: Into<String>> FromIterator<S> for Signature {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Signature(iter.into_iter().map(Into::into).collect())
    }
}

/// A set of literals accepted by a context.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BeliefSet(BTreeSet<Literal>);

impl BeliefSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.0.contains(lit)
    }

    pub fn insert(&mut self, lit: Literal) -> bool {
        self.0.insert(lit)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter()
    }

    pub fn literals(&self) -> &BTreeSet<Literal> {
        &self.0
    }

    /// No atom occurs with both polarities.
    pub fn is_consistent(&self) -> bool {
        self.0
            .iter()
            .all(|l| !l.negated || !self.0.contains(&Literal::pos(l.atom.clone())))
    }

    pub fn within(&self, sig: &Signature) -> bool {
        self.0.iter().all(|l| sig.contains(&l.atom))
    }
}

impl FromIterator<Literal> for BeliefSet {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        BeliefSet(iter.into_iter().collect())
    }
}

impl From<BTreeSet<Literal>> for BeliefSet {
    fn from(set: BTreeSet<Literal>) -> Self {
        BeliefSet(set)
    }
}

impl fmt::Display for BeliefSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

/// Propositional formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn literal(lit: &Literal) -> Self {
        let a = Formula::Atom(lit.atom.clone());
        if lit.negated {
            Formula::Not(Box::new(a))
        } else {
            a
        }
    }

    pub fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    pub fn eval(&self, value: &impl Fn(&str) -> bool) -> bool {
        match self {
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(l, r) => l.eval(value) && r.eval(value),
            Formula::Or(l, r) => l.eval(value) || r.eval(value),
            Formula::Implies(l, r) => !l.eval(value) || r.eval(value),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Atom(_) | Formula::Not(_) => 4,
            Formula::And(..) => 3,
            Formula::Or(..) => 2,
            Formula::Implies(..) => 1,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.precedence();
        if p < min {
            f.write_str("(")?;
        }
        match self {
            Formula::Atom(a) => f.write_str(a)?,
            Formula::Not(x) => {
                f.write_str("~")?;
                x.fmt_at(f, 4)?;
            }
            // & and | are left-associative, -> is right-associative.
            Formula::And(l, r) => {
                l.fmt_at(f, 3)?;
                f.write_str(" & ")?;
                r.fmt_at(f, 4)?;
            }
            Formula::Or(l, r) => {
                l.fmt_at(f, 2)?;
                f.write_str(" | ")?;
                r.fmt_at(f, 3)?;
            }
            Formula::Implies(l, r) => {
                l.fmt_at(f, 2)?;
                f.write_str(" -> ")?;
                r.fmt_at(f, 1)?;
            }
        }
        if p < min {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// A propositional knowledge base: a list of formulas read conjunctively.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PropKb {
    pub formulas: Vec<Formula>,
}

impl PropKb {
    pub fn new(formulas: Vec<Formula>) -> Self {
        PropKb { formulas }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for f in &self.formulas {
            f.collect_atoms(&mut out);
        }
        out
    }
}

/// Ground normal rule `head <- pos, not neg`. A rule without a head is a
/// constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AspRule {
    pub head: Option<Literal>,
    pub pos: Vec<Literal>,
    pub neg: Vec<Literal>,
}

impl AspRule {
    pub fn fact(head: Literal) -> Self {
        AspRule {
            head: Some(head),
            pos: Vec::new(),
            neg: Vec::new(),
        }
    }

    pub fn new(head: Literal, pos: Vec<Literal>, neg: Vec<Literal>) -> Self {
        AspRule {
            head: Some(head),
            pos,
            neg,
        }
    }

    pub fn constraint(pos: Vec<Literal>, neg: Vec<Literal>) -> Self {
        AspRule {
            head: None,
            pos,
            neg,
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.head.iter().chain(&self.pos).chain(&self.neg)
    }
}

impl fmt::Display for AspRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
            if self.pos.is_empty() && self.neg.is_empty() {
                return Ok(());
            }
            f.write_str(" ")?;
        }
        f.write_str("<-")?;
        let body = self
            .pos
            .iter()
            .map(|l| l.to_string())
            .chain(self.neg.iter().map(|l| format!("not {l}")));
        for (i, b) in body.enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            f.write_str(&b)?;
        }
        Ok(())
    }
}

/// A ground normal logic program.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AspProgram {
    pub rules: Vec<AspRule>,
}

impl AspProgram {
    pub fn new(rules: Vec<AspRule>) -> Self {
        AspProgram { rules }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        self.rules
            .iter()
            .flat_map(AspRule::literals)
            .map(|l| l.atom.as_str())
            .collect()
    }

    pub fn has_default_negation(&self) -> bool {
        self.rules.iter().any(|r| !r.neg.is_empty())
    }
}

/// Outcome of computing the least model of a positive program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeastModel {
    Model(BTreeSet<Literal>),
    /// A constraint fired or a complementary pair was derived.
    Violation,
}

fn check_atoms<'a>(
    atoms: impl IntoIterator<Item = &'a str>,
    sig: &Signature,
) -> Result<(), LogicError> {
    for a in atoms {
        if !sig.contains(a) {
            return Err(LogicError::IllFormed {
                atom: a.to_string(),
            });
        }
    }
    Ok(())
}

fn check_cap(sig: &Signature, max_atoms: usize) -> Result<(), LogicError> {
    let cap = max_atoms.min(MAX_SIGNATURE_ATOMS);
    if sig.len() > cap {
        return Err(LogicError::Capacity {
            what: "signature atoms",
            found: sig.len(),
            cap,
        });
    }
    Ok(())
}

/// Acceptable belief sets of a propositional knowledge base: the single set
/// of signature literals it classically entails, or none if unsatisfiable.
pub fn prop_acc(kb: &PropKb, sig: &Signature) -> Result<Vec<BeliefSet>, LogicError> {
    PropLogic.acc(kb, sig, &[])
}

/// Gelfond-Lifschitz reduct of `program` with respect to `candidate`.
pub fn gl_reduct(program: &AspProgram, candidate: &BTreeSet<Literal>) -> AspProgram {
    let rules = program
        .rules
        .iter()
        .filter(|r| r.neg.iter().all(|l| !candidate.contains(l)))
        .map(|r| AspRule {
            head: r.head.clone(),
            pos: r.pos.clone(),
            neg: Vec::new(),
        })
        .collect();
    AspProgram { rules }
}

/// Least model of a positive program by iterating the immediate-consequence
/// operator. Default-negated body literals, if any, are ignored.
pub fn least_model(program: &AspProgram, _sig: &Signature) -> LeastModel {
    let mut model: BTreeSet<Literal> = BTreeSet::new();
    loop {
        let mut changed = false;
        for rule in &program.rules {
            if !rule.pos.iter().all(|l| model.contains(l)) {
                continue;
            }
            match &rule.head {
                None => return LeastModel::Violation,
                Some(h) => {
                    if model.insert(h.clone()) {
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    if model.iter().any(|l| model.contains(&l.complement())) {
        return LeastModel::Violation;
    }
    LeastModel::Model(model)
}

/// Answer sets of a ground normal program over `sig`.
pub fn asp_acc(
    program: &AspProgram,
    sig: &Signature,
    max_atoms: usize,
) -> Result<Vec<BeliefSet>, LogicError> {
    AspLogic { max_atoms }.acc(program, sig, &[])
}

/// The abstract logic interface: syntax check plus acceptability function.
pub trait LogicEngine {
    type Kb;

    /// Fails if the knowledge base mentions an atom outside `sig`.
    fn check(&self, kb: &Self::Kb, sig: &Signature) -> Result<(), LogicError>;

    /// Acceptable belief sets of `kb` extended with `additions` (bridge-rule
    /// heads), in canonical order.
    fn acc(
        &self,
        kb: &Self::Kb,
        sig: &Signature,
        additions: &[Literal],
    ) -> Result<Vec<BeliefSet>, LogicError>;
}

/// Classical propositional logic.
#[derive(Clone, Copy, Debug, Default)]
pub struct PropLogic;

/// Ground normal answer-set programs.
#[derive(Clone, Copy, Debug)]
pub struct AspLogic {
    pub max_atoms: usize,
}

impl Default for AspLogic {
    fn default() -> Self {
        AspLogic { max_atoms: 16 }
    }
}

impl LogicEngine for PropLogic {
    type Kb = PropKb;

    fn check(&self, kb: &PropKb, sig: &Signature) -> Result<(), LogicError> {
        check_atoms(kb.atoms(), sig)
    }

    fn acc(
        &self,
        kb: &PropKb,
        sig: &Signature,
        additions: &[Literal],
    ) -> Result<Vec<BeliefSet>, LogicError> {
        self.check(kb, sig)?;
        check_atoms(additions.iter().map(|l| l.atom.as_str()), sig)?;
        check_cap(sig, MAX_SIGNATURE_ATOMS)?;
        let compiled = CompiledKb::compile(&KnowledgeBase::Prop(kb.clone()), sig);
        let index = LiteralIndex::new(sig);
        let extra = index.mask(additions);
        Ok(index.decode_all(&compiled.acc(extra)))
    }
}

impl LogicEngine for AspLogic {
    type Kb = AspProgram;

    fn check(&self, kb: &AspProgram, sig: &Signature) -> Result<(), LogicError> {
        check_atoms(kb.atoms(), sig)
    }

    fn acc(
        &self,
        kb: &AspProgram,
        sig: &Signature,
        additions: &[Literal],
    ) -> Result<Vec<BeliefSet>, LogicError> {
        self.check(kb, sig)?;
        check_atoms(additions.iter().map(|l| l.atom.as_str()), sig)?;
        check_cap(sig, self.max_atoms)?;
        let compiled = CompiledKb::compile(&KnowledgeBase::Asp(kb.clone()), sig);
        let index = LiteralIndex::new(sig);
        let extra = index.mask(additions);
        Ok(index.decode_all(&compiled.acc(extra)))
    }
}

/// Which concrete logic a context uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicKind {
    Prop,
    Asp,
}

impl fmt::Display for LogicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicKind::Prop => "prop",
            LogicKind::Asp => "asp",
        })
    }
}

/// A knowledge base in one of the supported logics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum KnowledgeBase {
    Prop(PropKb),
    Asp(AspProgram),
}

impl KnowledgeBase {
    pub fn kind(&self) -> LogicKind {
        match self {
            KnowledgeBase::Prop(_) => LogicKind::Prop,
            KnowledgeBase::Asp(_) => LogicKind::Asp,
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        match self {
            KnowledgeBase::Prop(kb) => kb.atoms(),
            KnowledgeBase::Asp(p) => p.atoms(),
        }
    }

    pub fn acc(
        &self,
        sig: &Signature,
        additions: &[Literal],
        max_atoms: usize,
    ) -> Result<Vec<BeliefSet>, LogicError> {
        match self {
            KnowledgeBase::Prop(kb) => {
                check_cap(sig, max_atoms)?;
                PropLogic.acc(kb, sig, additions)
            }
            KnowledgeBase::Asp(p) => AspLogic { max_atoms }.acc(p, sig, additions),
        }
    }
}

/// Bit layout for literal sets over one signature: atom `i` is bit `2i`, its
/// negation bit `2i + 1`.
#[derive(Clone, Debug)]
pub(crate) struct LiteralIndex {
    atoms: Vec<String>,
}

const POSITIVE_BITS: u64 = 0x5555_5555_5555_5555;

impl LiteralIndex {
    pub(crate) fn new(sig: &Signature) -> Self {
        LiteralIndex {
            atoms: sig.atoms().map(str::to_string).collect(),
        }
    }

    pub(crate) fn bit(&self, lit: &Literal) -> Option<u64> {
        let i = self.atoms.binary_search(&lit.atom).ok()?;
        Some(1u64 << (2 * i + usize::from(lit.negated)))
    }

    pub(crate) fn mask<'a>(&self, lits: impl IntoIterator<Item = &'a Literal>) -> u64 {
        lits.into_iter()
            .map(|l| self.bit(l).expect("literal outside signature"))
            .fold(0, |m, b| m | b)
    }

    pub(crate) fn decode(&self, mask: u64) -> BeliefSet {
        let mut out = BeliefSet::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if mask & (1 << (2 * i)) != 0 {
                out.insert(Literal::pos(a.clone()));
            }
            if mask & (1 << (2 * i + 1)) != 0 {
                out.insert(Literal::neg(a.clone()));
            }
        }
        out
    }

    pub(crate) fn decode_all(&self, masks: &[u64]) -> Vec<BeliefSet> {
        let mut out: Vec<BeliefSet> = masks.iter().map(|&m| self.decode(m)).collect();
        out.sort();
        out
    }
}

pub(crate) fn mask_consistent(mask: u64) -> bool {
    mask & (mask >> 1) & POSITIVE_BITS == 0
}

#[derive(Clone, Debug)]
pub(crate) enum CFormula {
    Atom(usize),
    Not(Box<CFormula>),
    And(Box<CFormula>, Box<CFormula>),
    Or(Box<CFormula>, Box<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
}

impl CFormula {
    fn compile(f: &Formula, atoms: &[String]) -> Self {
        let c = |x: &Formula| Box::new(CFormula::compile(x, atoms));
        match f {
            Formula::Atom(a) => CFormula::Atom(atoms.binary_search(a).expect("atom in signature")),
            Formula::Not(x) => CFormula::Not(c(x)),
            Formula::And(l, r) => CFormula::And(c(l), c(r)),
            Formula::Or(l, r) => CFormula::Or(c(l), c(r)),
            Formula::Implies(l, r) => CFormula::Implies(c(l), c(r)),
        }
    }

    fn eval(&self, assignment: u64) -> bool {
        match self {
            CFormula::Atom(i) => assignment & (1 << i) != 0,
            CFormula::Not(x) => !x.eval(assignment),
            CFormula::And(l, r) => l.eval(assignment) && r.eval(assignment),
            CFormula::Or(l, r) => l.eval(assignment) || r.eval(assignment),
            CFormula::Implies(l, r) => !l.eval(assignment) || r.eval(assignment),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CRule {
    head: Option<u64>,
    pos: u64,
    neg: u64,
}

/// Knowledge base lowered onto the bit layout of a [`LiteralIndex`].
#[derive(Clone, Debug)]
pub(crate) enum CompiledKb {
    Prop {
        atoms: usize,
        formulas: Vec<CFormula>,
    },
    Asp {
        rules: Vec<CRule>,
        /// Literals occurring under default negation, one bit each.
        guess: Vec<u64>,
    },
}

impl CompiledKb {
    /// Assumes `kb` has been checked against `sig`.
    pub(crate) fn compile(kb: &KnowledgeBase, sig: &Signature) -> Self {
        let index = LiteralIndex::new(sig);
        match kb {
            KnowledgeBase::Prop(kb) => CompiledKb::Prop {
                atoms: sig.len(),
                formulas: kb
                    .formulas
                    .iter()
                    .map(|f| CFormula::compile(f, &index.atoms))
                    .collect(),
            },
            KnowledgeBase::Asp(p) => {
                let rules: Vec<CRule> = p
                    .rules
                    .iter()
                    .map(|r| CRule {
                        head: r.head.as_ref().map(|h| index.mask([h])),
                        pos: index.mask(&r.pos),
                        neg: index.mask(&r.neg),
                    })
                    .collect();
                let negated = rules.iter().fold(0u64, |m, r| m | r.neg);
                let guess = (0..64)
                    .map(|b| 1u64 << b)
                    .filter(|b| negated & b != 0)
                    .collect();
                CompiledKb::Asp { rules, guess }
            }
        }
    }

    /// Acceptable belief sets (as literal masks) of the knowledge base
    /// extended with the literals in `additions`.
    pub(crate) fn acc(&self, additions: u64) -> Vec<u64> {
        match self {
            CompiledKb::Prop { atoms, formulas } => prop_acc_masked(*atoms, formulas, additions),
            CompiledKb::Asp { rules, guess } => asp_acc_masked(rules, guess, additions),
        }
    }
}

fn prop_acc_masked(atoms: usize, formulas: &[CFormula], additions: u64) -> Vec<u64> {
    // Literals forced by unit additions restrict the assignments to scan.
    let mut must_true = 0u64;
    let mut must_false = 0u64;
    for i in 0..atoms {
        if additions & (1 << (2 * i)) != 0 {
            must_true |= 1 << i;
        }
        if additions & (1 << (2 * i + 1)) != 0 {
            must_false |= 1 << i;
        }
    }
    if must_true & must_false != 0 {
        return Vec::new();
    }
    let mut all_true = u64::MAX;
    let mut all_false = u64::MAX;
    let mut any = false;
    for assignment in 0..(1u64 << atoms) {
        if assignment & must_true != must_true || assignment & must_false != 0 {
            continue;
        }
        if formulas.iter().all(|f| f.eval(assignment)) {
            any = true;
            all_true &= assignment;
            all_false &= !assignment;
        }
    }
    if !any {
        return Vec::new();
    }
    let mut entailed = 0u64;
    for i in 0..atoms {
        if all_true & (1 << i) != 0 {
            entailed |= 1 << (2 * i);
        }
        if all_false & (1 << i) != 0 {
            entailed |= 1 << (2 * i + 1);
        }
    }
    vec![entailed]
}

/// Least model of the reduct w.r.t. `assumed` (the default-negated literals
/// taken to be true); `None` on constraint or complement violation.
fn reduct_least_model(rules: &[CRule], facts: u64, assumed: u64) -> Option<u64> {
    let mut model = facts;
    loop {
        let mut changed = false;
        for r in rules {
            if r.neg & assumed != 0 || r.pos & model != r.pos {
                continue;
            }
            match r.head {
                None => return None,
                Some(h) if model & h == 0 => {
                    model |= h;
                    changed = true;
                }
                Some(_) => {}
            }
        }
        if !changed {
            break;
        }
    }
    mask_consistent(model).then_some(model)
}

fn asp_acc_masked(rules: &[CRule], guess: &[u64], facts: u64) -> Vec<u64> {
    let guess_mask = guess.iter().fold(0, |m, b| m | b);
    let mut out = Vec::new();
    for pattern in 0..(1u64 << guess.len()) {
        let assumed = guess
            .iter()
            .enumerate()
            .filter(|(i, _)| pattern & (1 << i) != 0)
            .fold(0, |m, (_, b)| m | b);
        if let Some(model) = reduct_least_model(rules, facts, assumed) {
            if model & guess_mask == assumed {
                out.push(model);
            }
        }
    }
    out
}
