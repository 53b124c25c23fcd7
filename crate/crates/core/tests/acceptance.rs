//! End-to-end acceptance checks. Each criterion prints one status line; the
//! test fails if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use common::*;
use num_rational::Ratio;
use pmcs::cli;
use pmcs::graph::FlowGraph;
use pmcs::inconsistency::{Analyzer, DiagnosisFamily};
use pmcs::logic::{AspProgram, AspRule};
use pmcs::mcs::{self, applicable_rules, enumerate_equilibria, is_consistent};
use pmcs::pmcs::{
    cut, cut_consistency_profile, degree_of_inconsistency, is_equilibrium, is_l_leq_equilibrium,
    is_l_lt_equilibrium, maximal_consistent_section, maximal_level, validate_compatibility,
};
use pmcs::{dsl, Config, KnowledgeBase, Literal, PmcsSystem, RuleId, SearchMode};

enum Status {
    Pass(String),
    /// Not achievable as stated; the checked facts explain why.
    Unattainable(String),
}

type Outcome = Result<Status, String>;

type Criterion = (&'static str, fn() -> Outcome);

fn cfg() -> Config {
    Config::sequential()
}

fn fixture_cli(args: &[&str], file: &str) -> cli::Outcome {
    let path = fixture_path(file);
    let mut argv: Vec<String> = vec!["pmcs".into()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push(path.display().to_string());
    let cli = <cli::Cli as clap::Parser>::try_parse_from(&argv).expect("valid arguments");
    cli::run_cli(&cli, Some(0))
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Supported-model (completion) check for a ground program plus facts:
/// `s` is consistent, closed under the rules and every literal has a rule
/// whose body holds in `s`.
fn supported_model(program: &AspProgram, additions: &[Literal], s: &LitSet) -> bool {
    let mut rules = program.rules.clone();
    rules.extend(additions.iter().map(|l| AspRule::fact(l.clone())));
    let body =
        |r: &AspRule| r.pos.iter().all(|l| s.contains(l)) && r.neg.iter().all(|l| !s.contains(l));
    let closed = rules
        .iter()
        .all(|r| !body(r) || r.head.as_ref().is_some_and(|h| s.contains(h)));
    let supported = s
        .iter()
        .all(|l| rules.iter().any(|r| r.head.as_ref() == Some(l) && body(r)));
    closed && supported && s.iter().all(|l| !s.contains(&l.complement()))
}

fn criterion_1() -> Outcome {
    let p = fixture("m0.pmcs");
    let m = p.base();
    ensure!(
        m.len() == 3 && p.m() == 1 && m.rule_count() == 4,
        "m0 shape"
    );
    let s = state(&[&["a", "b", "c"], &["d", "e", "p"], &["f", "g", "q"]]);
    let app = applicable_rules(m, &s).map_err(|e| e.to_string())?;
    ensure!(
        app == vec![ids(&["r1"]), ids(&["r2"]), ids(&["r3"])],
        "applicable rules in S: {app:?}"
    );
    let eqs = enumerate_equilibria(m, None, &cfg()).map_err(|e| e.to_string())?;
    if eqs.contains(&s) {
        return Ok(Status::Pass("S is an equilibrium of m0".into()));
    }
    // S2 = {d, e, p} needs the loop d <- e, e <- d to justify itself.
    let c2 = &m.contexts()[1];
    let acc2 = c2.acc(&[lit("p")], &cfg()).map_err(|e| e.to_string())?;
    ensure!(acc2 == vec![bs(&["p"])], "C2 with head p accepts {acc2:?}");
    ensure!(
        oracle_acc(c2, &[lit("p")]) == BTreeSet::from([bs(&["p"]).literals().clone()]),
        "oracle disagrees on C2"
    );
    ensure!(
        eqs == vec![state(&[&["a", "b"], &[], &["f", "g", "h"]])],
        "unexpected equilibria {eqs:?}"
    );
    let KnowledgeBase::Asp(kb2) = &c2.kb else {
        return Err("C2 should be an answer-set context".into());
    };
    ensure!(
        supported_model(kb2, &[lit("p")], s.0[1].literals()),
        "S2 is not even a supported model"
    );
    // Reading the second rule of kb2 as the fact `e.` makes S the unique equilibrium.
    let patched = fixture_text("m0.pmcs").replace("e <- d.", "e.");
    let alt = dsl::parse(&patched).map_err(|e| format!("{e:?}"))?;
    let alt_eqs = enumerate_equilibria(alt.base(), None, &cfg()).map_err(|e| e.to_string())?;
    ensure!(
        alt_eqs == vec![s.clone()],
        "patched m0 equilibria {alt_eqs:?}"
    );
    Ok(Status::Unattainable(
        "S is not an equilibrium under answer-set semantics: C2 = {d <- e. e <- d.} plus p has the single \
         answer set {p}, so m0's only equilibrium is ({a, b}, {}, {f, g, h}). S is a supported-model \
         equilibrium, and the unique equilibrium if e is a fact in C2"
            .into(),
    ))
}

fn criterion_2() -> Outcome {
    let out = fixture_cli(&["check"], "m1.pmcs");
    ensure!(out.code == 1, "check exit {}", out.code);
    let out = fixture_cli(&["equilibria"], "m1.pmcs");
    ensure!(
        out.code == 0 && out.stdout == "no equilibria\n",
        "equilibria output {:?}",
        out.stdout
    );
    let eqs =
        enumerate_equilibria(fixture("m1.pmcs").base(), None, &cfg()).map_err(|e| e.to_string())?;
    ensure!(eqs.is_empty(), "m1 has equilibria");
    Ok(Status::Pass("check m1 exits 1, no equilibria".into()))
}

fn criterion_3() -> Outcome {
    let a = Analyzer::new(&fixture("m1.pmcs"), &cfg()).map_err(|e| e.to_string())?;
    let diags: BTreeSet<_> = a
        .minimal_diagnoses()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|d| (d.remove, d.unconditional))
        .collect();
    let want: BTreeSet<_> = [
        (ids(&["r1"]), ids(&[])),
        (ids(&["r2"]), ids(&[])),
        (ids(&["r3"]), ids(&[])),
        (ids(&[]), ids(&["r4"])),
    ]
    .into();
    ensure!(diags == want, "minimal diagnoses {diags:?}");
    let expl: BTreeSet<_> = a
        .minimal_explanations()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|e| (e.cause, e.protected))
        .collect();
    ensure!(
        expl == BTreeSet::from([(ids(&["r1", "r2", "r3"]), ids(&["r4"]))]),
        "minimal explanations {expl:?}"
    );
    Ok(Status::Pass(
        "4 minimal diagnoses, 1 minimal explanation".into(),
    ))
}

fn criterion_4() -> Outcome {
    let a = Analyzer::new(&fixture("m1.pmcs"), &cfg()).map_err(|e| e.to_string())?;
    let d: BTreeSet<_> = a
        .s_diagnoses_min()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|d| d.rules)
        .collect();
    ensure!(
        d == BTreeSet::from([ids(&["r1"]), ids(&["r2"]), ids(&["r3"])]),
        "s-diagnoses {d:?}"
    );
    let e: BTreeSet<_> = a
        .s_explanations_min()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|e| e.rules)
        .collect();
    ensure!(
        e == BTreeSet::from([ids(&["r1", "r2", "r3"])]),
        "s-explanations {e:?}"
    );
    Ok(Status::Pass(
        "s-diagnoses {r1},{r2},{r3}; s-explanation {r1,r2,r3}".into(),
    ))
}

fn criterion_5() -> Outcome {
    let p = fixture("m2.pmcs");
    let s = stratified(&[
        &[&["a", "c"], &["b", "d"]],
        &[&["e", "f"]],
        &[&["h", "g"], &["p", "q"]],
    ]);
    ensure!(
        is_equilibrium(&p, &s, &cfg()).map_err(|e| e.to_string())?,
        "state is not an equilibrium"
    );
    let app = applicable_rules(p.base(), &s.flatten()).map_err(|e| e.to_string())?;
    let app: BTreeSet<RuleId> = app.into_iter().flatten().collect();
    ensure!(
        app == ids(&["r11", "r21", "r31", "r41", "r51"]),
        "applicable {app:?}"
    );
    let v = validate_compatibility(p.base(), &p.strata()).map_err(|e| e.to_string())?;
    ensure!(v.is_empty(), "violations {v:?}");
    let g = FlowGraph::of(&p);
    let want: BTreeSet<(usize, usize)> = [
        (2, 1),
        (1, 2),
        (1, 3),
        (2, 3),
        (1, 4),
        (3, 4),
        (2, 5),
        (3, 5),
        (4, 5),
    ]
    .into();
    ensure!(g.edges == want, "edges {:?}", g.edges);
    Ok(Status::Pass(
        "equilibrium verified, compatible, 9 flow edges".into(),
    ))
}

fn criterion_6() -> Outcome {
    let p = fixture("m3.pmcs");
    let c = cfg();
    let ml = maximal_level(&p, &c).map_err(|e| e.to_string())?;
    ensure!(
        ml.level == 2 && ml.strata == 4,
        "maximal level {}",
        ml.level
    );
    let s0 = stratified(&[
        &[&["a", "c"], &["b", "d"]],
        &[&["e"], &["h"]],
        &[&["m", "q"]],
        &[&["r"]],
    ]);
    let s1 = stratified(&[
        &[&["a", "c"], &["b", "d"]],
        &[&["e", "f"], &["g", "h"]],
        &[&["m", "q"]],
        &[&["r"]],
    ]);
    let e = |r: pmcs::Result<bool>| r.map_err(|e| e.to_string());
    ensure!(e(is_l_leq_equilibrium(&p, &s0, 1, &c))?, "S0 not 1<=");
    ensure!(!e(is_l_leq_equilibrium(&p, &s0, 2, &c))?, "S0 is 2<=");
    ensure!(e(is_l_lt_equilibrium(&p, &s0, 1, &c))?, "S0 not 1<");
    ensure!(e(is_l_lt_equilibrium(&p, &s1, 2, &c))?, "S1 not 2<");
    // maximal: no state reaches level 3
    ensure!(
        !e(mcs::is_consistent(
            &cut(&p, 3).map_err(|e| e.to_string())?,
            &c
        ))?,
        "cut 3 consistent"
    );
    ensure!(!e(is_consistent(p.base(), &c))?, "base consistent");
    let w = ml.witness.ok_or("no witness")?;
    ensure!(
        w.state.prefix(2) == s1.prefix(2) && w.suffix_unconstrained,
        "witness {}",
        w.state
    );
    Ok(Status::Pass(
        "l = 2; S0 is 1<, S1 is maximal 2<; cut 3 and base inconsistent".into(),
    ))
}

fn criterion_7() -> Outcome {
    let c = cfg();
    let di = |name: &str| degree_of_inconsistency(&fixture(name), &c).map_err(|e| e.to_string());
    ensure!(di("m3.pmcs")? == Ratio::new(1, 2), "DI(m3)");
    ensure!(di("m0.pmcs")? == Ratio::from_integer(0), "DI(m0)");
    ensure!(di("m2.pmcs")? == Ratio::from_integer(0), "DI(m2)");
    ensure!(
        di("selfdefeat_prop.pmcs")? == Ratio::from_integer(1),
        "DI(prop gadget)"
    );
    ensure!(
        di("selfdefeat_asp.pmcs")? == Ratio::from_integer(1),
        "DI(asp gadget)"
    );
    let out = fixture_cli(&["--json", "analyze"], "m3.pmcs");
    let v: serde_json::Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
    ensure!(
        v["result"]["di"] == serde_json::json!({"num": 1, "den": 2, "decimal": "0.5"}),
        "json di {}",
        v["result"]["di"]
    );
    Ok(Status::Pass(
        "DI(m3) = 1/2, DI(m0) = DI(m2) = 0, DI(gadgets) = 1".into(),
    ))
}

fn criterion_8() -> Outcome {
    let p = fixture("m3.pmcs");
    let (level, section) = maximal_consistent_section(&p, &cfg())
        .map_err(|e| e.to_string())?
        .ok_or("no section")?;
    let names: Vec<&str> = section
        .base()
        .contexts()
        .iter()
        .map(|c| c.name.as_str())
        .collect();
    ensure!(
        level == 2 && names == ["c1", "c2", "c3", "c4"],
        "section {level} {names:?}"
    );
    let a = Analyzer::new(&p, &cfg()).map_err(|e| e.to_string())?;
    let got: BTreeSet<_> = a
        .s_diagnoses_min()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|d| d.rules)
        .collect();
    let listed: BTreeSet<_> = [
        ["r51", "r61"],
        ["r51", "r41"],
        ["r51", "r21"],
        ["r31", "r61"],
        ["r31", "r41"],
        ["r31", "r21"],
        ["r11", "r61"],
        ["r11", "r41"],
        ["r11", "r21"],
    ]
    .iter()
    .map(|d| ids(d))
    .collect();
    let extra: Vec<_> = got.difference(&listed).collect();
    let missing: Vec<_> = listed.difference(&got).collect();
    ensure!(
        extra.is_empty() && missing.is_empty(),
        "s-diagnoses outside the published list {extra:?}, missing {missing:?}"
    );
    Ok(Status::Pass(
        "2-section over c1..c4; exactly the nine listed s-diagnoses".into(),
    ))
}

fn criterion_9() -> Outcome {
    let a = Analyzer::new(&fixture("m3.pmcs"), &cfg()).map_err(|e| e.to_string())?;
    let c: BTreeSet<_> = a
        .c_diagnoses()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|d| d.rules)
        .collect();
    ensure!(
        c == BTreeSet::from([ids(&["r51", "r61"])]),
        "c-diagnoses {c:?}"
    );
    let e: BTreeSet<_> = a
        .c_explanations_min()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|e| e.rules)
        .collect();
    ensure!(
        e == BTreeSet::from([ids(&["r51"]), ids(&["r61"])]),
        "c-explanations {e:?}"
    );
    let compat: BTreeSet<_> = a
        .compatible_diagnoses(DiagnosisFamily::Full)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|d| (d.remove, d.unconditional))
        .collect();
    for pair in [
        (ids(&["r51", "r61", "r52"]), ids(&[])),
        (ids(&["r51", "r61"]), ids(&[])),
        (ids(&["r61"]), ids(&["r52"])),
    ] {
        ensure!(
            compat.contains(&pair),
            "missing compatible diagnosis {pair:?}"
        );
    }
    let out = fixture_cli(&["explain", "--family", "c"], "m3.pmcs");
    ensure!(
        out.stdout == "{r51}\n{r61}\n",
        "cli explain c: {:?}",
        out.stdout
    );
    Ok(Status::Pass(
        "c-diagnoses {{r51,r61}}; c-explanations {{r51}},{{r61}}; 3 compatible pairs".into(),
    ))
}

fn criterion_10() -> Outcome {
    let c = cfg();
    let mut c_checks = 0;
    for name in ["m1.pmcs", "m3.pmcs"] {
        let report = Analyzer::new(&fixture(name), &c)
            .and_then(|a| a.duality_check())
            .map_err(|e| e.to_string())?;
        ensure!(report.holds(), "{name}: {:?}", report.checks);
        c_checks += usize::from(report.checks.len() == 3);
    }
    let params = GenParams {
        max_contexts: 4,
        max_rules: 6,
        atoms: vec!["a", "b", "c", "d", "e"],
        max_kb_items: 3,
        stratified: true,
        extra_atoms: false,
    };
    let systems = random_systems(0x5eed_0010, 240, &params);
    let mut inconsistent = 0;
    for (i, p) in systems.iter().enumerate() {
        let a = Analyzer::new(p, &c).map_err(|e| e.to_string())?;
        let report = a.duality_check().map_err(|e| e.to_string())?;
        ensure!(
            report.holds(),
            "random system {i}: {:?}\n{}",
            report.checks,
            dsl::serialize(p)
        );
        if !is_consistent(p.base(), &c).map_err(|e| e.to_string())? {
            inconsistent += 1;
        }
        c_checks += usize::from(report.checks.len() == 3);
    }
    ensure!(
        c_checks >= 10,
        "only {c_checks} section-compatible checks exercised"
    );
    Ok(Status::Pass(format!(
        "m1, m3 and {} random systems ({inconsistent} inconsistent, {c_checks} with the section identity): 0 violations",
        systems.len()
    )))
}

fn criterion_11() -> Outcome {
    let systems = random_systems(0x5eed_0011, 600, &GenParams::small());
    let c = cfg();
    let mut nonempty = 0;
    for (i, p) in systems.iter().enumerate() {
        let got: BTreeSet<_> = enumerate_equilibria(p.base(), None, &c)
            .map_err(|e| e.to_string())?
            .iter()
            .map(as_litsets)
            .collect();
        let want = naive_equilibria(p.base());
        ensure!(
            got == want,
            "trial {i}: {got:?} != {want:?}\n{}",
            dsl::serialize(p)
        );
        nonempty += usize::from(!want.is_empty());
    }
    Ok(Status::Pass(format!(
        "{} trials ({nonempty} with equilibria), 0 discrepancies",
        systems.len()
    )))
}

fn criterion_12() -> Outcome {
    let binary = Config::sequential();
    let linear = Config {
        search: SearchMode::Linear,
        ..Config::sequential()
    };
    let mut fixtures: Vec<PmcsSystem> =
        ["m0", "m1", "m2", "m3", "selfdefeat_prop", "selfdefeat_asp"]
            .iter()
            .map(|n| fixture(&format!("{n}.pmcs")))
            .collect();
    let params = GenParams {
        stratified: true,
        max_contexts: 5,
        ..GenParams::small()
    };
    let random = random_systems(0x5eed_0012, 300, &params);
    let count = random.len();
    fixtures.extend(random);
    for (i, p) in fixtures.iter().enumerate() {
        let b = maximal_level(p, &binary).map_err(|e| e.to_string())?;
        let l = maximal_level(p, &linear).map_err(|e| format!("instance {i}: {e}"))?;
        ensure!(
            b == l,
            "instance {i}: binary {} vs linear {}",
            b.level,
            l.level
        );
        let profile = cut_consistency_profile(p, &binary).map_err(|e| e.to_string())?;
        ensure!(
            profile.iter().take_while(|&&c| c).count() == b.level,
            "instance {i}: profile"
        );
    }
    Ok(Status::Pass(format!(
        "6 fixtures and {count} random stratified systems agree; monotone"
    )))
}

fn criterion_13() -> Outcome {
    for name in ["m0", "m1", "m2", "m3", "selfdefeat_prop", "selfdefeat_asp"] {
        let p = fixture(&format!("{name}.pmcs"));
        let text = dsl::serialize(&p);
        let q = dsl::parse(&text).map_err(|e| format!("{name}: {e:?}"))?;
        ensure!(p == q, "{name} does not round-trip");
    }
    let params = GenParams {
        stratified: true,
        extra_atoms: true,
        max_rules: 8,
        ..GenParams::small()
    };
    let systems = random_systems(0x5eed_0013, 250, &params);
    for (i, p) in systems.iter().enumerate() {
        let text = dsl::serialize(p);
        let q = dsl::parse(&text).map_err(|e| format!("trial {i}: {e:?}\n{text}"))?;
        ensure!(&q == p, "trial {i} differs:\n{text}");
        ensure!(
            dsl::serialize(&q) == text,
            "trial {i}: serialization not canonical"
        );
    }
    Ok(Status::Pass(format!(
        "6 fixtures and {} random systems round-trip",
        systems.len()
    )))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 13] = [
        ("m0 equilibrium S", criterion_1),
        ("m1 inconsistent", criterion_2),
        ("m1 minimal diagnoses and explanations", criterion_3),
        ("m1 s-diagnoses and s-explanations", criterion_4),
        ("m2 equilibrium, compatibility, flow graph", criterion_5),
        ("m3 stratified equilibria", criterion_6),
        ("degree of inconsistency", criterion_7),
        ("m3 maximal consistent section and s-diagnoses", criterion_8),
        (
            "m3 c-diagnoses, c-explanations, compatible diagnoses",
            criterion_9,
        ),
        ("duality identities", criterion_10),
        ("equilibria match the brute-force oracle", criterion_11),
        ("binary search matches linear scan", criterion_12),
        ("text format round-trip", criterion_13),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(Status::Pass(detail)) => println!("criterion {n:>2}: PASS  {name}: {detail}"),
            Ok(Status::Unattainable(detail)) => {
                println!("criterion {n:>2}: UNATTAINABLE  {name}: {detail}")
            }
            Err(why) => {
                println!("criterion {n:>2}: FAIL  {name}: {why}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
