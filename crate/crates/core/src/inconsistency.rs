//! Consistency-based and entailment-based inconsistency analysis.
//!
//! A *diagnosis* `(D1, D2)` restores consistency by deactivating the rules
//! in `D1` and adding those in `D2` unconditionally. An *inconsistency
//! explanation* `(E1, E2)` keeps the system inconsistent whenever all rules
//! of `E1` are present and none of `E2` is made unconditional. The `s`
//! variants only remove (resp. only add) rules; the `c` variants leave the
//! bridge rules of the maximal consistent section untouched.
//!
//! Everything is computed from the definitions over a memoized consistency
//! oracle keyed on the modified rule set. The union identities between
//! diagnoses and explanations are checked separately by [`Analyzer::duality_check`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{OnceLock, RwLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mcs::{bits, low_bits, Engine, McsSystem, Selection};
use crate::pmcs::{self, PmcsSystem};
use crate::rule_id::RuleId;
use crate::Config;

/// Analyses that tabulate every pair of rule sets need `4^n` entries.
pub const ANALYSIS_MAX_RULES: usize = 12;

pub type RuleSet = BTreeSet<RuleId>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Diagnosis {
    pub remove: RuleSet,
    pub unconditional: RuleSet,
    pub minimal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Explanation {
    pub cause: RuleSet,
    pub protected: RuleSet,
    pub minimal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SDiagnosis {
    pub rules: RuleSet,
    pub minimal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SExplanation {
    pub rules: RuleSet,
    pub minimal: bool,
}

/// Which diagnoses [`Analyzer::compatible_diagnoses`] filters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosisFamily {
    /// Every diagnosis.
    Full,
    /// Pointwise-minimal diagnoses.
    #[default]
    Minimal,
    /// Subset-minimal removal-only diagnoses, as `(D, {})` pairs.
    SMinimal,
}

/// Both sides of one union identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityCheck {
    pub name: &'static str,
    pub diagnoses: RuleSet,
    pub explanations: RuleSet,
    pub holds: bool,
    pub symmetric_difference: RuleSet,
}

impl DualityCheck {
    fn new(name: &'static str, diagnoses: RuleSet, explanations: RuleSet) -> Self {
        let symmetric_difference: RuleSet = diagnoses
            .symmetric_difference(&explanations)
            .cloned()
            .collect();
        DualityCheck {
            name,
            holds: symmetric_difference.is_empty(),
            diagnoses,
            explanations,
            symmetric_difference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityReport {
    pub checks: Vec<DualityCheck>,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Keep the candidates not pointwise-above an earlier kept one; candidates
/// must come in nondecreasing size.
fn minimal_pairs(mut candidates: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    candidates.sort_by_key(|&(a, b)| (a.count_ones() + b.count_ones(), a, b));
    let mut kept: Vec<(u64, u64)> = Vec::new();
    for (a, b) in candidates {
        if !kept.iter().any(|&(x, y)| x & a == x && y & b == y) {
            kept.push((a, b));
        }
    }
    kept
}

/// OR each entry with all entries above it in the subset lattice, over the
/// given bit positions.
fn superset_closure(f: &mut [bool], positions: impl Iterator<Item = usize>) {
    for b in positions {
        let bit = 1usize << b;
        for mask in 0..f.len() {
            if mask & bit == 0 && f[mask | bit] {
                f[mask] = true;
            }
        }
    }
}

/// Inconsistency analysis of one system, sharing a consistency cache across
/// all queries.
pub struct Analyzer {
    system: PmcsSystem,
    engine: Engine,
    cfg: Config,
    n: usize,
    cache: RwLock<HashMap<Selection, bool>>,
    /// `table[r1 | r2 << n]`: is M[R1 ∪ heads(R2)] consistent.
    table: OnceLock<Vec<bool>>,
    section: OnceLock<usize>,
}

impl Analyzer {
    pub fn new(system: &PmcsSystem, cfg: &Config) -> Result<Self> {
        let engine = Engine::new(system.base(), cfg)?;
        Ok(Analyzer {
            n: engine.rule_count(),
            system: system.clone(),
            engine,
            cfg: cfg.clone(),
            cache: RwLock::new(HashMap::new()),
            table: OnceLock::new(),
            section: OnceLock::new(),
        })
    }

    /// A plain MCS, treated as a single-stratum system.
    pub fn for_mcs(m: &McsSystem, cfg: &Config) -> Result<Self> {
        Analyzer::new(&PmcsSystem::from_mcs(m.clone()), cfg)
    }

    pub fn system(&self) -> &McsSystem {
        self.system.base()
    }

    fn full(&self) -> u64 {
        low_bits(self.n)
    }

    fn consistent(&self, sel: Selection) -> bool {
        if let Some(t) = self.table.get() {
            return t
                [(sel.conditional | sel.unconditional | (sel.unconditional << self.n)) as usize];
        }
        if let Some(&c) = self.cache.read().expect("cache lock").get(&sel) {
            return c;
        }
        let c = self.engine.consistent(sel);
        self.cache.write().expect("cache lock").insert(sel, c);
        c
    }

    fn table(&self) -> Result<&[bool]> {
        if self.n > ANALYSIS_MAX_RULES {
            return Err(Error::Capacity {
                what: "bridge rules for diagnosis/explanation enumeration".into(),
                found: self.n,
                cap: ANALYSIS_MAX_RULES,
            });
        }
        Ok(self.table.get_or_init(|| self.build_table()))
    }

    fn build_table(&self) -> Vec<bool> {
        let n = self.n;
        let size = 1usize << (2 * n);
        let key = |idx: usize| {
            let r1 = idx as u64 & low_bits(n);
            let r2 = (idx >> n) as u64;
            Selection::new(r1, r2)
        };
        let mut unique: Vec<Selection> = {
            let mut seen = HashSet::new();
            (0..size).map(key).filter(|s| seen.insert(*s)).collect()
        };
        unique.sort_by_key(|s| (s.conditional, s.unconditional));
        let known = self.cache.read().expect("cache lock").clone();
        let eval = |s: &Selection| {
            known
                .get(s)
                .copied()
                .unwrap_or_else(|| self.engine.consistent_seq(*s))
        };
        let results: Vec<bool> = if self.engine.parallelism().is_sequential() {
            unique.iter().map(eval).collect()
        } else {
            self.engine
                .parallelism()
                .install(|| unique.par_iter().map(eval).collect())
        };
        let lookup: HashMap<Selection, bool> = unique.into_iter().zip(results).collect();
        (0..size).map(|i| lookup[&key(i)]).collect()
    }

    fn mask(&self, ids: &RuleSet) -> Result<u64> {
        self.engine.mask_of(ids)
    }

    fn ids(&self, mask: u64) -> RuleSet {
        self.engine.ids_of(mask)
    }

    /// Is M[(br \ remove) ∪ heads(unconditional)] consistent.
    pub fn is_diagnosis(&self, remove: &RuleSet, unconditional: &RuleSet) -> Result<bool> {
        let d1 = self.mask(remove)?;
        let d2 = self.mask(unconditional)?;
        Ok(self.consistent(Selection::new(self.full() & !d1, d2)))
    }

    fn diagnosis_pairs(&self) -> Result<Vec<(u64, u64)>> {
        let t = self.table()?;
        let full = self.full();
        let mut out = Vec::new();
        for d1 in 0..=full {
            for d2 in 0..=full {
                let idx = ((full & !d1) | (d2 << self.n)) as usize;
                if t[idx] {
                    out.push((d1, d2));
                }
            }
        }
        Ok(out)
    }

    fn to_diagnoses(&self, pairs: &[(u64, u64)], minimal: &HashSet<(u64, u64)>) -> Vec<Diagnosis> {
        let mut out: Vec<Diagnosis> = pairs
            .iter()
            .map(|&(a, b)| Diagnosis {
                remove: self.ids(a),
                unconditional: self.ids(b),
                minimal: minimal.contains(&(a, b)),
            })
            .collect();
        out.sort();
        out
    }

    /// Every diagnosis (exponential in the number of rules).
    pub fn all_diagnoses(&self) -> Result<Vec<Diagnosis>> {
        let pairs = self.diagnosis_pairs()?;
        let minimal: HashSet<_> = minimal_pairs(pairs.clone()).into_iter().collect();
        Ok(self.to_diagnoses(&pairs, &minimal))
    }

    /// Pointwise subset-minimal diagnoses.
    pub fn minimal_diagnoses(&self) -> Result<Vec<Diagnosis>> {
        let minimal = minimal_pairs(self.diagnosis_pairs()?);
        let set: HashSet<_> = minimal.iter().copied().collect();
        Ok(self.to_diagnoses(&minimal, &set))
    }

    /// Subset-minimal removal-only diagnoses.
    pub fn s_diagnoses_min(&self) -> Result<Vec<SDiagnosis>> {
        Ok(self
            .s_diagnosis_masks()?
            .into_iter()
            .map(|d| SDiagnosis {
                rules: self.ids(d),
                minimal: true,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect())
    }

    fn s_diagnosis_masks(&self) -> Result<Vec<u64>> {
        let t = self.table()?;
        let full = self.full();
        let candidates = (0..=full)
            .filter(|&d| t[(full & !d) as usize])
            .map(|d| (d, 0))
            .collect();
        Ok(minimal_pairs(candidates)
            .into_iter()
            .map(|(d, _)| d)
            .collect())
    }

    /// Direct check: every `R1 ⊇ cause` and `R2 ⊆ br \ protected` leaves
    /// M[R1 ∪ heads(R2)] inconsistent.
    pub fn is_explanation(&self, cause: &RuleSet, protected: &RuleSet) -> Result<bool> {
        let e1 = self.mask(cause)?;
        let e2 = self.mask(protected)?;
        let full = self.full();
        let free1: Vec<usize> = bits(full & !e1).collect();
        let free2: Vec<usize> = bits(full & !e2).collect();
        for p in 0..(1u64 << free1.len()) {
            let r1 = e1 | scatter(p, &free1);
            for q in 0..(1u64 << free2.len()) {
                let r2 = scatter(q, &free2);
                if self.consistent(Selection::new(r1, r2)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `refuted[e1 | e2 << n]`: some consistent (R1, R2) has R1 ⊇ E1 and
    /// R2 ∩ E2 = ∅.
    fn refuted_pairs(&self) -> Result<Vec<bool>> {
        let t = self.table()?;
        let n = self.n;
        let full = self.full();
        let mut f = vec![false; t.len()];
        for (idx, &consistent) in t.iter().enumerate() {
            if consistent {
                let r1 = idx as u64 & full;
                let r2 = (idx >> n) as u64;
                f[(r1 | ((full & !r2) << n)) as usize] = true;
            }
        }
        superset_closure(&mut f, 0..2 * n);
        Ok(f)
    }

    /// Pointwise subset-minimal inconsistency explanations.
    pub fn minimal_explanations(&self) -> Result<Vec<Explanation>> {
        let refuted = self.refuted_pairs()?;
        let n = self.n;
        let full = self.full();
        let mut out = Vec::new();
        for y in 0..refuted.len() {
            if refuted[y] {
                continue;
            }
            if (0..2 * n)
                .filter(|b| y & (1 << b) != 0)
                .all(|b| refuted[y & !(1 << b)])
            {
                out.push(Explanation {
                    cause: self.ids(y as u64 & full),
                    protected: self.ids((y >> n) as u64),
                    minimal: true,
                });
            }
        }
        out.sort();
        Ok(out)
    }

    /// Subset-minimal `E` such that every `R ⊇ E` is inconsistent.
    pub fn s_explanations_min(&self) -> Result<Vec<SExplanation>> {
        let t = self.table()?;
        let full = self.full();
        let mut g: Vec<bool> = (0..=full).map(|r| t[r as usize]).collect();
        superset_closure(&mut g, 0..self.n);
        Ok(minimal_unrefuted(&g, full)
            .into_iter()
            .map(|e| SExplanation {
                rules: self.ids(e),
                minimal: true,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect())
    }

    /// Number of strata in the maximal consistent section. Fails when the
    /// system is consistent or its first stratum is already inconsistent.
    pub fn maximal_consistent_level(&self) -> Result<usize> {
        let level = match self.section.get() {
            Some(&l) => l,
            None => {
                let l = pmcs::maximal_level(&self.system, &self.cfg)?.level;
                *self.section.get_or_init(|| l)
            }
        };
        if level == self.system.m() {
            return Err(Error::Domain(
                "the system is consistent; section-compatible analysis needs an inconsistent system".into(),
            ));
        }
        if level == 0 {
            return Err(Error::Domain(
                "the first stratum is inconsistent, so there is no consistent section; analyze cut 1 as a plain MCS"
                    .into(),
            ));
        }
        Ok(level)
    }

    fn section_mask(&self) -> Result<u64> {
        let level = self.maximal_consistent_level()?;
        self.mask(&self.system.cut_rules(level))
    }

    /// Diagnoses of the chosen family touching no rule of the maximal
    /// consistent section.
    pub fn compatible_diagnoses(&self, family: DiagnosisFamily) -> Result<Vec<Diagnosis>> {
        let protected = self.section_mask()?;
        let candidates = match family {
            DiagnosisFamily::Full => self.all_diagnoses()?,
            DiagnosisFamily::Minimal => self.minimal_diagnoses()?,
            DiagnosisFamily::SMinimal => self
                .s_diagnoses_min()?
                .into_iter()
                .map(|d| Diagnosis {
                    minimal: self.is_minimal_pair(&d.rules, &RuleSet::new()),
                    remove: d.rules,
                    unconditional: RuleSet::new(),
                })
                .collect(),
        };
        let mut out = Vec::new();
        for d in candidates {
            let used = self.mask(&d.remove)? | self.mask(&d.unconditional)?;
            if used & protected == 0 {
                out.push(d);
            }
        }
        Ok(out)
    }

    fn is_minimal_pair(&self, remove: &RuleSet, unconditional: &RuleSet) -> bool {
        self.minimal_diagnoses()
            .map(|ds| {
                ds.iter()
                    .any(|d| &d.remove == remove && &d.unconditional == unconditional)
            })
            .unwrap_or(false)
    }

    /// Minimal s-diagnoses disjoint from the maximal consistent section.
    pub fn c_diagnoses(&self) -> Result<Vec<SDiagnosis>> {
        let protected = self.section_mask()?;
        Ok(self
            .s_diagnoses_min()?
            .into_iter()
            .filter(|d| {
                self.mask(&d.rules)
                    .map(|m| m & protected == 0)
                    .unwrap_or(false)
            })
            .collect())
    }

    /// Subset-minimal `E` outside the section such that every `R` with
    /// `E ⊆ R ⊆ br \ section` keeps M[section ∪ R] inconsistent.
    pub fn c_explanations_min(&self) -> Result<Vec<SExplanation>> {
        let protected = self.section_mask()?;
        let t = self.table()?;
        let full = self.full();
        let outside = full & !protected;
        let mut h: Vec<bool> = (0..=full)
            .map(|x| x & protected == 0 && t[(protected | x) as usize])
            .collect();
        superset_closure(&mut h, bits(outside));
        let mut out: Vec<SExplanation> = minimal_unrefuted(&h, full)
            .into_iter()
            .filter(|e| e & protected == 0)
            .map(|e| SExplanation {
                rules: self.ids(e),
                minimal: true,
            })
            .collect();
        out.sort();
        Ok(out)
    }

    /// Computes both sides of each union identity between diagnoses and
    /// explanations. The section-compatible identity is included when the
    /// system is inconsistent with a consistent first stratum.
    pub fn duality_check(&self) -> Result<DualityReport> {
        let union_pairs = |xs: Vec<(RuleSet, RuleSet)>| -> RuleSet {
            xs.into_iter()
                .flat_map(|(a, b)| a.into_iter().chain(b))
                .collect()
        };
        let d_pm = union_pairs(
            self.minimal_diagnoses()?
                .into_iter()
                .map(|d| (d.remove, d.unconditional))
                .collect(),
        );
        let e_pm = union_pairs(
            self.minimal_explanations()?
                .into_iter()
                .map(|e| (e.cause, e.protected))
                .collect(),
        );
        let d_m: RuleSet = self
            .s_diagnoses_min()?
            .into_iter()
            .flat_map(|d| d.rules)
            .collect();
        let e_p: RuleSet = self
            .s_explanations_min()?
            .into_iter()
            .flat_map(|e| e.rules)
            .collect();
        let mut checks = vec![
            DualityCheck::new("minimal diagnoses / minimal explanations", d_pm, e_pm),
            DualityCheck::new("s-diagnoses / s-explanations", d_m, e_p),
        ];
        match self.maximal_consistent_level() {
            Ok(_) => {
                let d_c: RuleSet = self
                    .c_diagnoses()?
                    .into_iter()
                    .flat_map(|d| d.rules)
                    .collect();
                let e_c: RuleSet = self
                    .c_explanations_min()?
                    .into_iter()
                    .flat_map(|e| e.rules)
                    .collect();
                checks.push(DualityCheck::new("c-diagnoses / c-explanations", d_c, e_c));
            }
            Err(Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(DualityReport { checks })
    }
}

fn scatter(pattern: u64, positions: &[usize]) -> u64 {
    positions
        .iter()
        .enumerate()
        .filter(|(i, _)| pattern & (1 << i) != 0)
        .fold(0, |m, (_, &b)| m | (1 << b))
}

/// Masks `e ⊆ full` with `refuted[e]` false but `refuted[e \ {b}]` true for
/// every member `b`.
fn minimal_unrefuted(refuted: &[bool], full: u64) -> Vec<u64> {
    (0..=full)
        .filter(|&e| !refuted[e as usize] && bits(e).all(|b| refuted[(e & !(1 << b)) as usize]))
        .collect()
}
