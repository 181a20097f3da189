//! Acceptance suite: one test per criterion, each printing a verdict
//! line. Property counts, tolerances and budgets are pinned here; time
//! limits are asserted in release builds (debug builds run the same
//! checks without the stopwatch).

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;

use seqren_core::atom::AtomName;
use seqren_core::canonical::{canonicalize, equiv};
use seqren_core::cert::Certificate;
use seqren_core::context::Context;
use seqren_core::corpus;
use seqren_core::derived::{
    def_down, def_up, gen_interaction_down, gen_interaction_up, mixp, pmix,
};
use seqren_core::imll::{compile_proof, embed_sequent, parse_formula, ImllProof};
use seqren_core::lambda::{
    alpha_eq, find_redexes, parse_lam, reduce, step, LamTerm, RedexRule, Strategy,
};
use seqren_core::parse::parse_structure;
use seqren_core::prover::{
    exhaustive_oracle, prove, prove_batch, reduction_goal, SearchBudget, SearchOutcome,
};
use seqren_core::rules::{
    check_affinity, check_derivation, check_derivation_detailed, context_extrusion,
    down_fragment, full_system, up_fragment, Derivation, RuleName,
};
use seqren_core::simulate::{recognize_step, simulate_trace};
use seqren_core::structure::Structure;
use seqren_core::translate::{readback, translate, ChannelSupply};

fn assert_runtime(name: &str, started: Instant, limit: Duration) {
    let elapsed = started.elapsed();
    if cfg!(debug_assertions) {
        eprintln!("{name}: {elapsed:?} (limit {limit:?} enforced in release)");
    } else {
        assert!(elapsed < limit, "{name} took {elapsed:?}, limit {limit:?}");
    }
}

fn o() -> AtomName {
    AtomName::new("ch_o")
}

fn tr(m: &LamTerm) -> Structure {
    translate(m, &o(), &mut ChannelSupply::new()).unwrap()
}

/// A congruent variant of `s`, produced by random applications of the
/// defining axioms: child permutation, re-association, unit padding,
/// alpha-renaming, vacuous binders, binder commutation, scope extrusion.
fn congruent_variant(rng: &mut impl Rng, s: &Structure, moves: usize) -> Structure {
    let mut cur = s.clone();
    for _ in 0..moves {
        cur = one_move(rng, &cur);
    }
    cur
}

fn one_move(rng: &mut impl Rng, s: &Structure) -> Structure {
    use Structure::*;
    match rng.gen_range(0..8) {
        // descend
        0 | 1 => match s {
            Par(cs) | CoPar(cs) | Seq(cs) if !cs.is_empty() => {
                let i = rng.gen_range(0..cs.len());
                let mut cs2 = cs.clone();
                cs2[i] = one_move(rng, &cs[i]);
                rebuild_kind(s, cs2)
            }
            Ren(a, body) => Ren(a.clone(), Box::new(one_move(rng, body))),
            _ => s.clone(),
        },
        // permute commutative children
        2 => match s {
            Par(cs) | CoPar(cs) if cs.len() >= 2 => {
                let mut cs2 = cs.clone();
                let i = rng.gen_range(0..cs2.len());
                let j = rng.gen_range(0..cs2.len());
                cs2.swap(i, j);
                rebuild_kind(s, cs2)
            }
            _ => s.clone(),
        },
        // re-associate a window into a nested same-kind node
        3 => match s {
            Par(cs) | CoPar(cs) | Seq(cs) if cs.len() >= 3 => {
										let lo = rng.gen_range(0..cs.len() - 1);
                let hi = rng.gen_range(lo + 1..cs.len());
                let mut cs2: Vec<Structure> = cs[..lo].to_vec();
                let window = cs[lo..=hi].to_vec();
                cs2.push(rebuild_kind(s, window));
                cs2.extend(cs[hi + 1..].iter().cloned());
                rebuild_kind(s, cs2)
            }
            _ => s.clone(),
        },
        // unit padding
        4 => {
            let unit_side = rng.gen_bool(0.5);
            match rng.gen_range(0..3) {
                0 => Par(if unit_side {
                    vec![Unit, s.clone()]
                } else {
                    vec![s.clone(), Unit]
                }),
                1 => CoPar(vec![s.clone(), Unit]),
                _ => Seq(if unit_side {
                    vec![Unit, s.clone()]
                } else {
                    vec![s.clone(), Unit]
                }),
            }
        }
        // vacuous binder
        5 => {
            let name = AtomName::new(format!("fresh{}", rng.gen_range(0..1000)));
            if s.has_free(&name) {
                s.clone()
            } else {
                Ren(name, Box::new(s.clone()))
            }
        }
        // alpha-rename a top binder
        6 => match s {
            Ren(a, body) => {
                let fresh = AtomName::new(format!("al{}", rng.gen_range(0..1000)));
                if body.has_free(&fresh) {
                    s.clone()
                } else {
                    Ren(fresh.clone(), Box::new(body.subst_atom(a, &fresh)))
                }
            }
            _ => s.clone(),
        },
        // scope extrusion in or out of a par/copar/seq child
        _ => match s {
            // pull a binder out over material it does not touch
            Par(cs) | CoPar(cs) | Seq(cs) if cs.len() >= 2 => {
                let i = rng.gen_range(0..cs.len());
                if let Ren(a, body) = &cs[i] {
                    let captures = cs
                        .iter()
                        .enumerate()
                        .any(|(k, c)| k != i && c.has_free(a));
                    if !captures && (!matches!(s, Seq(_)) || i == 0 || i == cs.len() - 1) {
                        let mut cs2 = cs.clone();
                        cs2[i] = (**body).clone();
                        return Ren(a.clone(), Box::new(rebuild_kind(s, cs2)));
                    }
                }
                s.clone()
            }
            // push a binder onto the one child that uses it
            Ren(a, body) => match &**body {
                Par(cs) | CoPar(cs) | Seq(cs) => {
                    let holders: Vec<usize> = cs
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.has_free(a))
                        .map(|(k, _)| k)
                        .collect();
                    if holders.len() == 1 {
                        let mut cs2 = cs.clone();
                        let k = holders[0];
                        cs2[k] = Ren(a.clone(), Box::new(cs[k].clone()));
                        rebuild_kind(body, cs2)
                    } else {
                        s.clone()
                    }
                }
                _ => s.clone(),
            },
            _ => s.clone(),
        },
    }
}

fn rebuild_kind(template: &Structure, children: Vec<Structure>) -> Structure {
    match template {
        Structure::Par(_) => Structure::Par(children),
        Structure::CoPar(_) => Structure::CoPar(children),
        Structure::Seq(_) => Structure::Seq(children),
        _ => unreachable!(),
    }
}

#[test]
fn criterion_01_congruence_suite() {
    let started = Instant::now();
    let mut rng = corpus::rng();
    for i in 0..500 {
        let r = corpus::random_structure(&mut rng, 20, 4);
        // canonicalize idempotent
        let k = canonicalize(&r);
        assert_eq!(k, canonicalize(&k), "idempotence failed on sample {i}: {r}");
        // negate involutive
        assert!(equiv(&r.negate().negate(), &r), "involution failed on {r}");
        // a congruent variant shares the canonical form, size and names
        let t = congruent_variant(&mut rng, &r, 4);
        assert!(equiv(&r, &t), "variant drifted on sample {i}:\n  {r}\n  {t}");
        assert_eq!(r.size(), t.size(), "size not invariant on {r}");
        assert_eq!(r.free_names(), t.free_names(), "FN not invariant on {r}");
        assert_eq!(r.free_names(), r.negate().free_names());
        // congruence: a common context preserves equivalence
        let ctx = corpus::random_context(&mut rng, 2);
        assert!(
            equiv(&ctx.plug(&r), &ctx.plug(&t)),
            "context broke congruence on sample {i}"
        );
        // and equiv stays symmetric/transitive on a third variant
        let u = congruent_variant(&mut rng, &t, 3);
        assert!(equiv(&t, &u) && equiv(&r, &u));
    }
    assert_runtime("criterion 1", started, Duration::from_secs(10));
    println!("criterion 1 (congruence suite, 500 structures): PASS");
}

#[test]
fn criterion_02_paper_values() {
    let p = |s: &str| parse_structure(s).unwrap();
    assert_eq!(p("{a}[b;~b]").size(), 2);
    assert_eq!(p("{a}[a;~a]").size(), 3);
    assert!(p("{a}[~a;b]").is_legal());
    assert!(p("<{a}[a;~a];{a}(a;~a);~a>").is_legal());
    assert!(!p("(a;{b}<a;~a>)").is_legal());
    println!("criterion 2 (paper size and legality values): PASS");
}

#[test]
fn criterion_03_derived_rules() {
    let started = Instant::now();
    let mut rng = corpus::rng();
    let down = down_fragment();
    let up = up_fragment();
    let def_down_rules: BTreeSet<RuleName> =
        [RuleName::AiDown, RuleName::Switch, RuleName::QDown].into_iter().collect();
    let def_up_rules: BTreeSet<RuleName> =
        [RuleName::AiUp, RuleName::Switch, RuleName::QUp].into_iter().collect();
    let extrusion_rules: BTreeSet<RuleName> =
        [RuleName::QDown, RuleName::Switch, RuleName::RDown].into_iter().collect();
    let qup_only: BTreeSet<RuleName> = [RuleName::QUp].into_iter().collect();
    let qdown_only: BTreeSet<RuleName> = [RuleName::QDown].into_iter().collect();

    for i in 0..200 {
        let r = corpus::random_structure(&mut rng, 6, 1);
        let t = corpus::random_structure(&mut rng, 5, 1);

        let d = gen_interaction_down(&r);
        assert!(equiv(&d.conclusion, &Structure::par(vec![r.clone(), r.negate()])));
        assert!(d.is_proof());
        assert!(check_derivation(&d, &down), "i-down failed on sample {i}: {r}");

        let d = gen_interaction_up(&r);
        assert!(equiv(d.premise(), &Structure::copar(vec![r.clone(), r.negate()])));
        assert!(equiv(&d.conclusion, &Structure::Unit));
        assert!(check_derivation(&d, &up), "i-up failed on sample {i}: {r}");

        let a = AtomName::new("zz");
        if !r.has_free(&a) && !t.has_free(&a) {
            let d = def_down(&r, &t, &a).unwrap();
            assert!(check_derivation(&d, &def_down_rules), "def-down failed on {r} | {t}");
            let mut names = d.conclusion.free_names();
            names.remove(&a);
            assert_eq!(
                names,
                r.free_names().union(&t.free_names()).cloned().collect(),
                "def-down names wrong"
            );

            let d = def_up(&r, &t, &a).unwrap();
            assert!(check_derivation(&d, &def_up_rules), "def-up failed on {r} | {t}");
            assert!(equiv(&d.conclusion, &Structure::seq(vec![r.clone(), t.clone()])));
        }

        let d = mixp(&r, &t);
        assert!(check_derivation(&d, &qup_only), "mixp failed on {r} | {t}");
        let d = pmix(&r, &t);
        assert!(check_derivation(&d, &qdown_only), "pmix failed on {r} | {t}");

        let ctx = corpus::random_context(&mut rng, 2);
        let d = context_extrusion(&ctx, &r, &t);
        assert!(
            check_derivation(&d, &extrusion_rules),
            "extrusion failed on sample {i}"
        );
        assert!(equiv(
            &d.conclusion,
            &Structure::par(vec![ctx.plug(&r), t.clone()])
        ));
    }
    assert_runtime("criterion 3", started, Duration::from_secs(30));
    println!("criterion 3 (derived rules, 200 structures): PASS");
}

#[test]
fn criterion_04_completeness_of_sbvr() {
    let started = Instant::now();
    let corpus_terms = corpus::beta_corpus();
    assert!(corpus_terms.len() >= 20);
    let mut clause_census: BTreeSet<RedexRule> = BTreeSet::new();
    let mut allowed = down_fragment();
    allowed.insert(RuleName::QUp);
    for src in &corpus_terms {
        let m = parse_lam(src).unwrap();
        let trace = reduce(&m, &Strategy::LeftmostOutermost, 400).unwrap();
        for (site, _) in &trace.steps {
            clause_census.insert(site.rule);
        }
        let d = simulate_trace(&trace, &o(), &ChannelSupply::new())
            .unwrap_or_else(|e| panic!("simulation failed on {src}: {e}"));
        assert!(
            equiv(&d.conclusion, &tr(&m)),
            "conclusion is not the translated start on {src}"
        );
        assert!(
            equiv(d.premise(), &tr(trace.terminal())),
            "premise is not the translated reduct on {src}"
        );
        check_derivation_detailed(&d, &allowed)
            .unwrap_or_else(|e| panic!("checker rejected simulation of {src}: {e}"));
        let census = d.census();
        assert_eq!(census.get(&RuleName::AiUp), None, "ai_up leaked into {src}");
        assert_eq!(census.get(&RuleName::RUp), None, "r_up leaked into {src}");
        let sub_vars =
            trace.steps.iter().filter(|(s, _)| s.rule == RedexRule::SubVar).count();
        assert_eq!(
            census.get(&RuleName::QUp).copied().unwrap_or(0),
            sub_vars,
            "q_up census mismatch on {src}"
        );
    }
    // the corpus exercises every beta clause
    for rule in [
        RedexRule::BetaIntro,
        RedexRule::SubVar,
        RedexRule::SubAbs,
        RedexRule::SubAppLeft,
        RedexRule::SubAppRight,
    ] {
        assert!(clause_census.contains(&rule), "corpus missed {rule:?}");
    }
    assert_runtime("criterion 4", started, Duration::from_secs(60));
    println!(
        "criterion 4 (completeness of SBVr, {} terms): PASS",
        corpus_terms.len()
    );
}

#[test]
fn criterion_05_completeness_of_bvr() {
    let started = Instant::now();
    let budget = SearchBudget {
        max_depth: 16,
        max_states: 5_000_000,
        wall_clock: Duration::from_secs(60),
    };
    let mut pairs: Vec<(LamTerm, LamTerm)> = Vec::new();
    for src in corpus::beta_corpus() {
        let m = parse_lam(src).unwrap();
        let trace = reduce(&m, &Strategy::LeftmostOutermost, 400).unwrap();
        let n = trace.terminal().clone();
        let total = tr(&m).size() + tr(&n).size();
        if total <= 14 {
            pairs.push((m, n));
        }
    }
    assert!(pairs.len() >= 3, "need several desk-scale pairs, found {}", pairs.len());
    let down = down_fragment();
    for (m, n) in &pairs {
        let goal = reduction_goal(m, n, &o()).unwrap();
        let (outcome, stats) = prove(&goal, &budget);
        match outcome {
            SearchOutcome::Proved(d) => {
                check_derivation_detailed(&d, &down).unwrap_or_else(|e| {
                    panic!("proof of {m} => {n} rejected: {e}")
                });
                assert!(d.is_proof());
                check_affinity(&d).unwrap();
            }
            other => panic!(
                "prover failed on {m} => {n}: {other:?} (stats {})",
                serde_json::to_string(&stats).unwrap()
            ),
        }
    }
    assert_runtime("criterion 5", started, Duration::from_secs(60 * pairs.len() as u64));
    println!("criterion 5 (completeness of BVr, {} pairs): PASS", pairs.len());
}

#[test]
fn criterion_06_prover_ground_truth() {
    let started = Instant::now();
    let family = corpus::oracle_family(3, 120);
    assert!(family.len() >= 200, "family too small: {}", family.len());
    // the named negative case must be present
    let neg = canonicalize(&parse_structure("[<a;b>;<~b;~a>]").unwrap());
    assert!(family.contains(&neg));

    let budget = SearchBudget {
        max_depth: 10,
        max_states: 500_000,
        wall_clock: Duration::from_secs(30),
    };
    let verdicts = prove_batch(&family, &budget);
    let truths = seqren_core::prover::oracle_batch(&family, 8);
    let mut provable = 0usize;
    for ((goal, (outcome, _)), truth) in family.iter().zip(&verdicts).zip(&truths) {
        let truth = truth.as_ref().unwrap_or_else(|e| panic!("oracle failed: {e}"));
        match outcome {
            SearchOutcome::Proved(d) => {
                assert!(*truth, "prover claims {goal} but oracle refutes it");
                assert!(check_derivation(d, &down_fragment()), "bad certificate for {goal}");
                provable += 1;
            }
            SearchOutcome::ExhaustedComplete => {
                assert!(!*truth, "prover refutes {goal} but oracle proves it");
            }
            SearchOutcome::BudgetHit => panic!("budget hit on small goal {goal}"),
        }
    }
    assert!(provable > 0, "family contains no provable goals");
    assert!(provable < family.len(), "family contains no refutable goals");
    assert_runtime("criterion 6", started, Duration::from_secs(300));
    println!(
        "criterion 6 (prover vs oracle on {} goals, {} provable): PASS",
        family.len(),
        provable
    );
}

#[test]
fn criterion_07_affinity() {
    let started = Instant::now();
    let mut rng = corpus::rng();
    let mut derivations: Vec<Derivation> = Vec::new();
    for _ in 0..60 {
        let r = corpus::random_structure(&mut rng, 6, 1);
        derivations.push(gen_interaction_down(&r));
        derivations.push(gen_interaction_up(&r));
    }
    for src in corpus::beta_corpus() {
        let m = parse_lam(src).unwrap();
        let trace = reduce(&m, &Strategy::LeftmostOutermost, 400).unwrap();
        derivations.push(simulate_trace(&trace, &o(), &ChannelSupply::new()).unwrap());
    }
    for goal_src in ["[a;~a]", "[<a;b>;<~a;~b>]", "[{a}<a;b>;{a}<~a;~b>]"] {
        let goal = parse_structure(goal_src).unwrap();
        if let (SearchOutcome::Proved(d), _) = prove(&goal, &SearchBudget::default()) {
            derivations.push(d);
        }
    }
    for (i, d) in derivations.iter().enumerate() {
        check_affinity(d).unwrap_or_else(|e| panic!("derivation {i} violates affinity: {e}"));
        // name monotonicity along down steps
        for step in &d.steps {
            if step.rule.is_down() {
                assert!(
                    step.premise.free_names().is_subset(&step.conclusion.free_names()),
                    "free names grew upward in derivation {i}"
                );
            }
        }
    }
    assert_runtime("criterion 7", started, Duration::from_secs(120));
    println!(
        "criterion 7 (affinity over {} derivations): PASS",
        derivations.len()
    );
}

#[test]
fn criterion_08_translation_round_trip() {
    let started = Instant::now();
    let mut rng = corpus::rng();
    let mut checked = 0;
    while checked < 300 {
        let m = corpus::random_term(&mut rng, 12);
        if m.node_count() > 25 {
            continue;
        }
        checked += 1;
        let s = tr(&m);
        let back = readback(&s).unwrap_or_else(|| panic!("no readback for {m}"));
        assert!(alpha_eq(&back, &m), "round trip drifted: {m} vs {back}");
        // output names are linear: each channel occurs at most once per
        // polarity, and the output channel exactly once
        for name in s.all_names() {
            if name.namespace() == seqren_core::atom::Namespace::Channel {
                let (pos, neg) = s.polarity_counts(&name);
                assert!(pos <= 1 && neg <= 1, "channel {name} duplicated in [[{m}]]");
            }
        }
        let (pos, neg) = s.polarity_counts(&o());
        assert_eq!((pos, neg), (0, 1), "output channel not linear in [[{m}]]");
    }
    assert_runtime("criterion 8", started, Duration::from_secs(60));
    println!("criterion 8 (round trip, 300 terms): PASS");
}

#[test]
fn criterion_09_soundness_loop() {
    let started = Instant::now();
    let mut rng = corpus::rng();
    let mut checked = 0;
    while checked < 200 {
        let m = corpus::random_term(&mut rng, 10);
        if m.node_count() > 25 {
            continue;
        }
        checked += 1;
        let s = tr(&m);
        let recognized = recognize_step(&s)
            .unwrap_or_else(|e| panic!("recognize failed on image of {m}: {e}"));
        let sites = find_redexes(&m);
        assert_eq!(
            recognized.len(),
            sites.len(),
            "reduct count mismatch on {m}"
        );
        for ((rule, premise, reduct), site) in recognized.iter().zip(&sites) {
            assert_eq!(*rule, site.rule, "clause mismatch on {m}");
            let direct = step(&m, site).unwrap();
            assert!(
                alpha_eq(reduct, &direct),
                "reduct disagrees on {m}: {reduct} vs {direct}"
            );
            assert!(
                equiv(premise, &tr(&direct)),
                "premise is not the translated reduct on {m}"
            );
        }
    }
    assert_runtime("criterion 9", started, Duration::from_secs(120));
    println!("criterion 9 (soundness loop, 200 terms): PASS");
}

#[test]
fn criterion_10_imll_embedding() {
    let started = Instant::now();
    let full = full_system();

    // ax
    let ax = ImllProof::Ax("a".into());
    let d = compile_proof(&ax).unwrap();
    assert!(d.steps.is_empty());
    assert_eq!(d.conclusion, parse_structure("<~a;a>").unwrap());

    // lolli over ax: |- a -o a
    let lolli = ImllProof::Lolli { sub: Box::new(ImllProof::Ax("a".into())), index: 0 };
    let d = compile_proof(&lolli).unwrap();
    assert!(check_derivation(&d, &full));
    assert!(equiv(&d.conclusion, &parse_structure("[~a;a]").unwrap()));
    assert!(equiv(d.premise(), &parse_structure("<~a;a>").unwrap()));

    // tensor of axioms: a, b |- a * b
    let tensor = ImllProof::Tensor {
        left: Box::new(ImllProof::Ax("a".into())),
        right: Box::new(ImllProof::Ax("b".into())),
    };
    let d = compile_proof(&tensor).unwrap();
    assert!(check_derivation(&d, &full));
    let a = parse_formula("a").unwrap();
    let b = parse_formula("b").unwrap();
    let ab = parse_formula("a * b").unwrap();
    assert!(equiv(&d.conclusion, &embed_sequent(&[a.clone(), b.clone()], &ab)));
    assert!(equiv(
        d.premise(),
        &parse_structure("(<~a;a>;<~b;b>)").unwrap()
    ));

    // one cut: a |- a  cut  a |- a
    let cut = ImllProof::Cut {
        left: Box::new(ImllProof::Ax("a".into())),
        right: Box::new(ImllProof::Ax("a".into())),
        index: 0,
    };
    let d = compile_proof(&cut).unwrap();
    assert!(check_derivation(&d, &full));
    assert!(equiv(&d.conclusion, &parse_structure("<~a;a>").unwrap()));
    assert!(equiv(
        d.premise(),
        &parse_structure("(<~a;a>;<~a;a>)").unwrap()
    ));

    // a certificate written and reread still checks
    let cert = Certificate::from_derivation(&d);
    let back = Certificate::from_json_str(&cert.to_json_string())
        .unwrap()
        .to_derivation()
        .unwrap();
    assert!(check_derivation(&back, &full));

    assert_runtime("criterion 10", started, Duration::from_secs(30));
    println!("criterion 10 (IMLL embedding): PASS");
}
