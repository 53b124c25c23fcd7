//! Preferential multi-context systems: strata, compatibility, cuts and
//! sections, stratified equilibria, the maximal consistent section and the
//! degree of inconsistency.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::{BeliefSet, Literal};
use crate::mcs::{self, BeliefState, BodyRef, BridgeRule, Context, McsSystem};
use crate::rule_id::RuleId;
use crate::Config;

/// How [`maximal_level`] locates the last consistent cut.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Binary search over cuts `1..m-1`.
    #[default]
    Binary,
    /// Check every cut; fails if cut consistency is not monotone.
    Linear,
}

/// A bridge rule reading from a strictly less preferred stratum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: RuleId,
    pub reference: String,
    pub rule_stratum: usize,
    pub referenced_stratum: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule {} in stratum {} reads {} from stratum {}",
            self.rule, self.rule_stratum, self.reference, self.referenced_stratum
        )
    }
}

fn stratum_index(base: &McsSystem, strata: &[Vec<usize>]) -> Result<Vec<usize>> {
    let n = base.len();
    let mut stratum_of = vec![0usize; n];
    for (i, s) in strata.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Structural(format!("stratum {} is empty", i + 1)));
        }
        for &c in s {
            if c == 0 || c > n {
                return Err(Error::Structural(format!("context {c} does not exist")));
            }
            if stratum_of[c - 1] != 0 {
                return Err(Error::Structural(format!("context {c} appears twice")));
            }
            stratum_of[c - 1] = i + 1;
        }
    }
    if let Some(missing) = stratum_of.iter().position(|&s| s == 0) {
        return Err(Error::Structural(format!(
            "context {} is in no stratum",
            missing + 1
        )));
    }
    Ok(stratum_of)
}

/// Lists every body reference into a strictly less preferred stratum.
/// `strata` holds 1-based context indices, most preferred first.
pub fn validate_compatibility(base: &McsSystem, strata: &[Vec<usize>]) -> Result<Vec<Violation>> {
    let stratum_of = stratum_index(base, strata)?;
    let mut out = Vec::new();
    for r in base.rules() {
        let own = stratum_of[r.owner - 1];
        let refs = r
            .pos
            .iter()
            .map(|b| b.to_string())
            .zip(r.pos.iter().map(|b| b.context))
            .chain(r.neg.iter().map(|b| (format!("not {b}"), b.context)));
        for (text, ctx) in refs {
            let theirs = stratum_of[ctx - 1];
            if theirs > own {
                out.push(Violation {
                    rule: r.id.clone(),
                    reference: text,
                    rule_stratum: own,
                    referenced_stratum: theirs,
                });
            }
        }
    }
    Ok(out)
}

/// An MCS together with an ordered partition of its contexts. Contexts are
/// stored in stratum order, so stratum `i` is a contiguous block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmcsSystem {
    base: McsSystem,
    /// Number of contexts in each stratum.
    sizes: Vec<usize>,
}

impl PmcsSystem {
    /// Validates the partition and compatibility. Contexts are renumbered
    /// into stratum order when the strata are not already contiguous.
    pub fn new(base: McsSystem, strata: Vec<Vec<usize>>) -> Result<Self> {
        let violations = validate_compatibility(&base, &strata)?;
        if !violations.is_empty() {
            return Err(Error::Compatibility(violations));
        }
        let order: Vec<usize> = strata.iter().flatten().copied().collect();
        let sizes = strata.iter().map(Vec::len).collect();
        let base = if order.iter().enumerate().all(|(i, &c)| c == i + 1) {
            base
        } else {
            renumber(&base, &order)?
        };
        Ok(PmcsSystem { base, sizes })
    }

    /// A plain MCS as a single-stratum system.
    pub fn from_mcs(base: McsSystem) -> Self {
        let sizes = vec![base.len()];
        PmcsSystem { base, sizes }
    }

    pub fn base(&self) -> &McsSystem {
        &self.base
    }

    /// Number of strata.
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    /// 1-based context indices per stratum.
    pub fn strata(&self) -> Vec<Vec<usize>> {
        let mut next = 1;
        self.sizes
            .iter()
            .map(|&k| {
                let s: Vec<usize> = (next..next + k).collect();
                next += k;
                s
            })
            .collect()
    }

    pub fn stratum_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// 1-based stratum of a 1-based context.
    pub fn stratum_of(&self, context: usize) -> Option<usize> {
        let mut end = 0;
        for (i, &k) in self.sizes.iter().enumerate() {
            end += k;
            if context >= 1 && context <= end {
                return Some(i + 1);
            }
        }
        None
    }

    /// Number of contexts in strata `1..=i`.
    pub fn contexts_in_cut(&self, i: usize) -> usize {
        self.sizes[..i].iter().sum()
    }

    /// Ids of the bridge rules owned by contexts in strata `1..=i`.
    pub fn cut_rules(&self, i: usize) -> BTreeSet<RuleId> {
        let k = self.contexts_in_cut(i.min(self.m()));
        self.base.contexts()[..k]
            .iter()
            .flat_map(|c| c.rules.iter().map(|r| r.id.clone()))
            .collect()
    }

    fn check_level(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.m() {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.m(),
            });
        }
        Ok(())
    }
}

fn renumber(base: &McsSystem, order: &[usize]) -> Result<McsSystem> {
    let mut new_index = vec![0usize; base.len() + 1];
    for (i, &c) in order.iter().enumerate() {
        new_index[c] = i + 1;
    }
    let map_ref = |b: &BodyRef| BodyRef::new(new_index[b.context], b.literal.clone());
    let contexts = order
        .iter()
        .map(|&c| {
            let ctx = base.context(c).expect("validated index");
            let rules = ctx
                .rules
                .iter()
                .map(|r| BridgeRule {
                    id: r.id.clone(),
                    owner: new_index[r.owner],
                    head: r.head.clone(),
                    pos: r.pos.iter().map(map_ref).collect(),
                    neg: r.neg.iter().map(map_ref).collect(),
                })
                .collect();
            Context::new(ctx.name.clone(), ctx.kb.clone(), rules)
                .with_atoms(ctx.extra_atoms.iter().cloned())
        })
        .collect();
    McsSystem::new(contexts)
}

/// The MCS over strata `1..=i`. Each context keeps its full signature from
/// `P`, so belief sets of `P` project onto the cut unchanged.
pub fn cut(p: &PmcsSystem, i: usize) -> Result<McsSystem> {
    p.check_level(i)?;
    let k = p.contexts_in_cut(i);
    let contexts: Vec<Context> = p.base.contexts()[..k].to_vec();
    let plain = McsSystem::new(
        contexts
            .iter()
            .map(|c| {
                Context::new(c.name.clone(), c.kb.clone(), c.rules.clone())
                    .with_atoms(c.extra_atoms.iter().cloned())
            })
            .collect(),
    )?;
    let needs_pin = plain
        .contexts()
        .iter()
        .zip(&contexts)
        .any(|(a, b)| a.signature() != b.signature());
    if !needs_pin {
        return Ok(plain);
    }
    McsSystem::new(
        contexts
            .iter()
            .zip(plain.contexts())
            .map(|(full, derived)| {
                let missing: Vec<String> = full
                    .signature()
                    .atoms()
                    .filter(|a| !derived.signature().contains(a))
                    .map(str::to_string)
                    .collect();
                Context::new(full.name.clone(), full.kb.clone(), full.rules.clone())
                    .with_atoms(full.extra_atoms.iter().cloned())
                    .with_atoms(missing)
            })
            .collect(),
    )
}

/// The PMCS formed by strata `1..=i`.
pub fn section(p: &PmcsSystem, i: usize) -> Result<PmcsSystem> {
    let base = cut(p, i)?;
    Ok(PmcsSystem {
        base,
        sizes: p.sizes[..i].to_vec(),
    })
}

/// A belief state grouped by strata.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct StratifiedBeliefState(pub Vec<Vec<BeliefSet>>);

impl StratifiedBeliefState {
    /// Groups a flat state (in `p`'s context order) by stratum.
    pub fn from_flat(p: &PmcsSystem, state: &BeliefState) -> Result<Self> {
        if state.len() != p.base.len() {
            return Err(Error::Alignment {
                expected: p.base.len(),
                found: state.len(),
            });
        }
        let mut rest = state.sets();
        let mut out = Vec::with_capacity(p.m());
        for &k in &p.sizes {
            let (head, tail) = rest.split_at(k);
            out.push(head.to_vec());
            rest = tail;
        }
        Ok(StratifiedBeliefState(out))
    }

    /// The concatenation of all strata.
    pub fn flatten(&self) -> BeliefState {
        self.prefix(self.0.len())
    }

    /// The concatenation of the first `l` strata.
    pub fn prefix(&self, l: usize) -> BeliefState {
        BeliefState(self.0[..l].iter().flatten().cloned().collect())
    }

    fn check_aligned(&self, p: &PmcsSystem) -> Result<()> {
        let shape: Vec<usize> = self.0.iter().map(Vec::len).collect();
        if shape != p.sizes {
            return Err(Error::Alignment {
                expected: p.base.len(),
                found: shape.iter().sum(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for StratifiedBeliefState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", BeliefState(s.clone()))?;
        }
        f.write_str(">")
    }
}

/// Is the equilibrium of `P` (its concatenation is an equilibrium of the
/// base).
pub fn is_equilibrium(p: &PmcsSystem, s: &StratifiedBeliefState, cfg: &Config) -> Result<bool> {
    s.check_aligned(p)?;
    mcs::is_equilibrium(&p.base, &s.flatten(), cfg)
}

/// The first `l` strata of `s` form an equilibrium of the `l`-cut.
pub fn is_l_leq_equilibrium(
    p: &PmcsSystem,
    s: &StratifiedBeliefState,
    l: usize,
    cfg: &Config,
) -> Result<bool> {
    p.check_level(l)?;
    s.check_aligned(p)?;
    mcs::is_equilibrium(&cut(p, l)?, &s.prefix(l), cfg)
}

/// An `l`-level equilibrium that fails at level `l + 1` (when that exists).
pub fn is_l_lt_equilibrium(
    p: &PmcsSystem,
    s: &StratifiedBeliefState,
    l: usize,
    cfg: &Config,
) -> Result<bool> {
    if !is_l_leq_equilibrium(p, s, l, cfg)? {
        return Ok(false);
    }
    Ok(l == p.m() || !is_l_leq_equilibrium(p, s, l + 1, cfg)?)
}

/// A belief state whose first `level` strata form an equilibrium of the
/// corresponding cut.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub state: StratifiedBeliefState,
    /// Strata beyond the level were filled greedily and are not constrained
    /// by any equilibrium condition.
    pub suffix_unconstrained: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalLevel {
    pub level: usize,
    pub strata: usize,
    /// Absent when the first stratum is already inconsistent.
    pub witness: Option<Witness>,
}

fn cut_consistent(
    p: &PmcsSystem,
    i: usize,
    cfg: &Config,
    memo: &mut HashMap<usize, bool>,
) -> Result<bool> {
    if let Some(&c) = memo.get(&i) {
        return Ok(c);
    }
    let c = mcs::is_consistent(&cut(p, i)?, cfg)?;
    memo.insert(i, c);
    Ok(c)
}

/// Consistency of every cut `1..=m`, checking that it never reappears after
/// being lost.
pub fn cut_consistency_profile(p: &PmcsSystem, cfg: &Config) -> Result<Vec<bool>> {
    let mut profile = Vec::with_capacity(p.m());
    for i in 1..=p.m() {
        profile.push(mcs::is_consistent(&cut(p, i)?, cfg)?);
    }
    for i in 1..profile.len() {
        if profile[i] && !profile[i - 1] {
            return Err(Error::Monotonicity {
                consistent: i + 1,
                inconsistent: i,
            });
        }
    }
    Ok(profile)
}

/// The largest `l` such that the `l`-cut is consistent (0 if none), with a
/// canonical witness.
pub fn maximal_level(p: &PmcsSystem, cfg: &Config) -> Result<MaximalLevel> {
    let m = p.m();
    let level = match cfg.search {
        SearchMode::Linear => cut_consistency_profile(p, cfg)?
            .iter()
            .take_while(|&&c| c)
            .count(),
        SearchMode::Binary => {
            let mut memo = HashMap::new();
            if cut_consistent(p, m, cfg, &mut memo)? {
                m
            } else if !cut_consistent(p, 1, cfg, &mut memo)? {
                0
            } else {
                // cut `lo` is consistent, cut `hi` is not
                let (mut lo, mut hi) = (1, m);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if cut_consistent(p, mid, cfg, &mut memo)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    };
    let witness = if level == 0 {
        None
    } else {
        Some(witness_for(p, level, cfg)?)
    };
    Ok(MaximalLevel {
        level,
        strata: m,
        witness,
    })
}

/// Canonical equilibrium of the `level`-cut, extended stratum by stratum:
/// each later context takes its first acceptable belief set given the heads
/// applicable so far (contexts not yet filled count as empty), or the empty
/// set if it has none.
fn witness_for(p: &PmcsSystem, level: usize, cfg: &Config) -> Result<Witness> {
    let c = cut(p, level)?;
    let prefix = mcs::enumerate_equilibria(&c, Some(1), cfg)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Domain(format!("cut {level} has no equilibrium")))?;
    let n = p.base.len();
    let mut sets = prefix.0;
    sets.resize(n, BeliefSet::new());
    for ctx in p.contexts_in_cut(level)..n {
        let state = BeliefState(sets.clone());
        let context = &p.base.contexts()[ctx];
        let heads: Vec<Literal> = context
            .rules
            .iter()
            .filter(|r| r.is_applicable(&state))
            .map(|r| r.head.clone())
            .collect();
        sets[ctx] = context
            .acc(&heads, cfg)?
            .into_iter()
            .next()
            .unwrap_or_default();
    }
    Ok(Witness {
        state: StratifiedBeliefState::from_flat(p, &BeliefState(sets))?,
        suffix_unconstrained: level < p.m(),
    })
}

/// `1 - l/m` for the maximal level `l`.
pub fn degree_of_inconsistency(p: &PmcsSystem, cfg: &Config) -> Result<Ratio<u64>> {
    let ml = maximal_level(p, cfg)?;
    Ok(di_from_level(ml.level, ml.strata))
}

pub fn di_from_level(level: usize, strata: usize) -> Ratio<u64> {
    Ratio::from_integer(1) - Ratio::new(level as u64, strata as u64)
}

/// The largest consistent section with its number of strata, or `None`
/// when even the first stratum is inconsistent.
pub fn maximal_consistent_section(
    p: &PmcsSystem,
    cfg: &Config,
) -> Result<Option<(usize, PmcsSystem)>> {
    let ml = maximal_level(p, cfg)?;
    if ml.level == 0 {
        return Ok(None);
    }
    Ok(Some((ml.level, section(p, ml.level)?)))
}

/// Summary of the stratified consistency analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub level: usize,
    pub strata: usize,
    pub di: Ratio<u64>,
    pub witness: Option<Witness>,
    pub consistent: bool,
}

pub fn analyze(p: &PmcsSystem, cfg: &Config) -> Result<AnalysisReport> {
    let ml = maximal_level(p, cfg)?;
    Ok(AnalysisReport {
        level: ml.level,
        strata: ml.strata,
        di: di_from_level(ml.level, ml.strata),
        consistent: ml.level == ml.strata,
        witness: ml.witness,
    })
}
