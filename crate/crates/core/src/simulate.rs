//! Compiles beta reduction into derivations: the output-renaming lemma,
//! the five simulation rules, and trace-level composition.
//!
//! Each simulation step is a derivation from the translated reduct (as
//! premise) down to the translated redex (as conclusion). Four of the five
//! clauses live in the down fragment; `sub_var` additionally needs one
//! q_up, introduced through the mixp combinator.

use thiserror::Error;

use crate::atom::{Atom, AtomName, Polarity};
use crate::canonical::equiv;
use crate::context::Context;
use crate::derived::{def_down_atom, mixp};
use crate::lambda::{find_redexes, step, LamTerm, RedexRule, ReductionTrace};
use crate::rules::{compose, plug_in_context, Derivation, DerivationError, RuleName};
use crate::structure::{assemble, Kind, Structure};
use crate::translate::{
    output_channel, readback, translate, translate_ctx, ChannelSupply, TranslateError,
};

#[derive(Debug, Clone, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("term `{term}` is not a {rule:?} redex")]
    NotARedex { term: LamTerm, rule: RedexRule },
    #[error("structure is not congruent to any translation image")]
    NotAnImage,
    #[error(transparent)]
    Chain(#[from] Box<DerivationError>),
    #[error("step failed: {0}")]
    Step(#[from] crate::lambda::StepError),
}

fn link(p: &AtomName, o: &AtomName) -> Structure {
    assemble(
        Kind::CoPar,
        vec![
            Structure::Atom(Atom { name: p.clone(), polarity: Polarity::Positive }),
            Structure::Atom(Atom { name: o.clone(), polarity: Polarity::Negative }),
        ],
    )
}

fn par(cs: Vec<Structure>) -> Structure {
    assemble(Kind::Par, cs)
}

fn ren(a: &AtomName, s: Structure) -> Structure {
    Structure::ren(a.clone(), s)
}

fn append(lower: &mut Derivation, upper: Derivation) {
    debug_assert!(
        equiv(lower.premise(), &upper.conclusion),
        "chain break: {} vs {}",
        lower.premise(),
        upper.conclusion
    );
    lower.steps.extend(upper.steps);
}

/// Output renaming: a down-fragment derivation from `[[m]]o` (premise)
/// down to `[ [[m]]p ; (p;~o) ]` (conclusion). `p` must be fresh for the
/// term and distinct from `o`; the supply mirrors the one used to
/// translate `m` in the surrounding context.
pub fn o_ren(
    m: &LamTerm,
    o: &AtomName,
    p: &AtomName,
    supply: &ChannelSupply,
) -> Result<Derivation, SimulateError> {
    let m_at_p = translate(m, p, &mut supply.clone())?;
    let conclusion = par(vec![m_at_p.clone(), link(p, o)]);
    let mut d = Derivation::identity(conclusion);
    match m {
        LamTerm::Var(x) => {
            // def-down with the negative placeholder ~p
            let sub = def_down_atom(
                &Structure::atom(x.as_str()),
                &Structure::Atom(Atom { name: o.clone(), polarity: Polarity::Negative }),
                Atom { name: p.clone(), polarity: Polarity::Negative },
            );
            append(&mut d, sub);
        }
        LamTerm::Abs(x, body) => {
            let mut sup = supply.clone();
            let p1 = sup.fresh();
            let body_p1 = translate(body, &p1, &mut sup.clone())?;
            let xn = AtomName::new(x.as_str());
            // two r_down merge the link under both binders
            d.push_step(
                RuleName::RDown,
                ren(&xn, par(vec![ren(&p1, par(vec![body_p1.clone(), link(&p1, p)])), link(p, o)])),
            );
            d.push_step(
                RuleName::RDown,
                ren(&xn, ren(&p1, par(vec![body_p1.clone(), link(&p1, p), link(p, o)]))),
            );
            // then the two switches bring ~p next to p, and ai_down fires
            let ctx = |inner: Structure| ren(&xn, ren(&p1, par(vec![body_p1.clone(), inner])));
            d.push_step(
                RuleName::Switch,
                ctx(assemble(
                    Kind::CoPar,
                    vec![
                        par(vec![
                            Structure::Atom(Atom { name: p.clone(), polarity: Polarity::Negative }),
                            link(p, o),
                        ]),
                        Structure::atom(p1.text()),
                    ],
                )),
            );
            d.push_step(
                RuleName::Switch,
                ctx(assemble(
                    Kind::CoPar,
                    vec![
                        assemble(
                            Kind::CoPar,
                            vec![
                                par(vec![
                                    Structure::atom(p.text()),
                                    Structure::natom(p.text()),
                                ]),
                                Structure::natom(o.text()),
                            ],
                        ),
                        Structure::atom(p1.text()),
                    ],
                )),
            );
            d.push_step(RuleName::AiDown, ctx(link(&p1, o)));
            d.relabel_premise(translate(m, o, &mut supply.clone())?);
        }
        LamTerm::App(f, a) => {
            let mut sup = supply.clone();
            let p1 = sup.fresh();
            let q = sup.fresh();
            let f_p1 = translate(f, &p1, &mut sup)?;
            let a_q = translate(a, &q, &mut sup.clone())?;
            let arg = ren(&q, a_q);
            d.push_step(
                RuleName::RDown,
                ren(&p1, par(vec![f_p1.clone(), arg.clone(), link(&p1, p), link(p, o)])),
            );
            let ctx = |inner: Structure| ren(&p1, par(vec![f_p1.clone(), arg.clone(), inner]));
            d.push_step(
                RuleName::Switch,
                ctx(assemble(
                    Kind::CoPar,
                    vec![
                        par(vec![
                            Structure::Atom(Atom { name: p.clone(), polarity: Polarity::Negative }),
                            link(p, o),
                        ]),
                        Structure::atom(p1.text()),
                    ],
                )),
            );
            d.push_step(
                RuleName::Switch,
                ctx(assemble(
                    Kind::CoPar,
                    vec![
                        assemble(
                            Kind::CoPar,
                            vec![
                                par(vec![
                                    Structure::atom(p.text()),
                                    Structure::natom(p.text()),
                                ]),
                                Structure::natom(o.text()),
                            ],
                        ),
                        Structure::atom(p1.text()),
                    ],
                )),
            );
            d.push_step(RuleName::AiDown, ctx(link(&p1, o)));
            d.relabel_premise(translate(m, o, &mut supply.clone())?);
        }
        LamTerm::ESub(body, x, _bound) => {
            let xn = AtomName::new(x.as_str());
            let Structure::Ren(_, esub_body) = &m_at_p else { unreachable!() };
            let Structure::Par(kids) = &**esub_body else { unreachable!() };
            // kids = [ [[body]]p , [[bound]]x ]
            let bound_part = kids[1].clone();
            d.push_step(
                RuleName::RDown,
                ren(&xn, par(vec![kids[0].clone(), bound_part.clone(), link(p, o)])),
            );
            let sub = o_ren(body, o, p, supply)?;
            let ctx = Context::Ren(xn.clone(), Box::new(Context::Par(vec![bound_part], Box::new(Context::Hole))));
            append(&mut d, plug_in_context(&sub, &ctx));
            d.relabel_premise(translate(m, o, &mut supply.clone())?);
        }
    }
    Ok(d)
}

/// One simulation step: a derivation from `[[reduct]]o` (premise) down to
/// `[[redex]]o` (conclusion).
pub fn sim_step(
    rule: RedexRule,
    redex: &LamTerm,
    o: &AtomName,
    supply: &ChannelSupply,
) -> Result<Derivation, SimulateError> {
    let wrong = || SimulateError::NotARedex { term: redex.clone(), rule };
    let conclusion = translate(redex, o, &mut supply.clone())?;
    let mut d = Derivation::identity(conclusion);
    match (rule, redex) {
        (RedexRule::BetaIntro, LamTerm::App(f, a)) => {
            let LamTerm::Abs(x, body) = &**f else { return Err(wrong()) };
            let xn = AtomName::new(x.as_str());
            let mut sup = supply.clone();
            let p = sup.fresh();
            let _q = sup.fresh();
            let mut sup_f = sup.clone();
            let p1 = sup_f.fresh();
            let body_p1 = translate(body, &p1, &mut sup_f)?;
            let arg_x = translate(a, &xn, &mut sup_f.clone())?;
            // merge the lambda binder with the alpha-renamed argument binder
            d.push_step(
                RuleName::RDown,
                ren(
                    &p,
                    par(vec![
                        ren(
                            &xn,
                            par(vec![
                                ren(&p1, par(vec![body_p1.clone(), link(&p1, &p)])),
                                arg_x.clone(),
                            ]),
                        ),
                        link(&p, o),
                    ]),
                ),
            );
            // rename the function body output p1 to p; the body sits after
            // the draws of p, q and p1
            let sup_body = {
                let mut s = sup.clone();
                let _ = s.fresh();
                s
            };
            let inner = o_ren(body, &p, &p1, &sup_body)?;
            let ctx = Context::Ren(
                p.clone(),
                Box::new(Context::Par(
                    vec![link(&p, o)],
                    Box::new(Context::Ren(
                        xn.clone(),
                        Box::new(Context::Par(
                            vec![arg_x],
                            Box::new(Context::Ren(p1.clone(), Box::new(Context::Hole))),
                        )),
                    )),
                )),
            );
            append(&mut d, plug_in_context(&inner, &ctx));
            // rename the substitution output p to o; the supply sits past
            // the p and q draws so fresh channels cannot collide with p
            let reduct = LamTerm::esub((**body).clone(), x.clone(), (**a).clone());
            let outer = o_ren(&reduct, o, &p, &sup)?;
            let ctx = Context::Ren(p.clone(), Box::new(Context::Hole));
            let plugged = plug_in_context(&outer, &ctx);
            if !equiv(d.premise(), &plugged.conclusion) {
                return Err(SimulateError::Chain(Box::new(DerivationError::ComposeMismatch {
                    lower: d.premise().clone(),
                    upper: plugged.conclusion,
                })));
            }
            d.steps.extend(plugged.steps);
            d.relabel_premise(translate(&reduct, o, &mut supply.clone())?);
        }
        (RedexRule::SubVar, LamTerm::ESub(body, x, p_term)) => {
            let LamTerm::Var(y) = &**body else { return Err(wrong()) };
            if y != x {
                return Err(wrong());
            }
            let xn = AtomName::new(x.as_str());
            let p_at_x = translate(p_term, &xn, &mut supply.clone())?;
            // mixp turns the forwarder <x;~o> into (x;~o)
            let fwd = assemble(
                Kind::Seq,
                vec![
                    Structure::atom(x.as_str()),
                    Structure::Atom(Atom { name: o.clone(), polarity: Polarity::Negative }),
                ],
            );
            let m = mixp(
                &Structure::atom(x.as_str()),
                &Structure::Atom(Atom { name: o.clone(), polarity: Polarity::Negative }),
            );
            debug_assert!(equiv(&m.conclusion, &fwd));
            let ctx = Context::Ren(
                xn.clone(),
                Box::new(Context::Par(vec![p_at_x.clone()], Box::new(Context::Hole))),
            );
            append(&mut d, plug_in_context(&m, &ctx));
            // then o-ren links P's output x to o
            let sub = o_ren(p_term, o, &xn, supply)?;
            let ctx = Context::Ren(xn, Box::new(Context::Hole));
            append(&mut d, plug_in_context(&sub, &ctx));
            d.relabel_premise(translate(p_term, o, &mut supply.clone())?);
        }
        (RedexRule::SubAbs, LamTerm::ESub(body, x, p_term)) => {
            let LamTerm::Abs(y, inner) = &**body else { return Err(wrong()) };
            let xn = AtomName::new(x.as_str());
            let yn = AtomName::new(y.as_str());
            let mut sup = supply.clone();
            let p = sup.fresh();
            let inner_p = translate(inner, &p, &mut sup)?;
            let bound_x = translate(p_term, &xn, &mut sup)?;
            d.push_step(
                RuleName::RDown,
                ren(
                    &xn,
                    ren(&yn, par(vec![ren(&p, par(vec![inner_p.clone(), link(&p, o)])), bound_x.clone()])),
                ),
            );
            d.push_step(
                RuleName::RDown,
                ren(&xn, ren(&yn, ren(&p, par(vec![inner_p, link(&p, o), bound_x])))),
            );
            let reduct = LamTerm::abs(y.clone(), LamTerm::esub((**inner).clone(), x.clone(), (**p_term).clone()));
            d.relabel_premise(translate(&reduct, o, &mut supply.clone())?);
        }
        (RedexRule::SubAppLeft, LamTerm::ESub(body, x, p_term))
        | (RedexRule::SubAppRight, LamTerm::ESub(body, x, p_term)) => {
            let LamTerm::App(f, a) = &**body else { return Err(wrong()) };
            let expected_left = f.count_free(x) > 0;
            if (rule == RedexRule::SubAppLeft) != expected_left {
                return Err(wrong());
            }
            let xn = AtomName::new(x.as_str());
            let mut sup = supply.clone();
            let p = sup.fresh();
            let q = sup.fresh();
            let f_p = translate(f, &p, &mut sup)?;
            let a_q = translate(a, &q, &mut sup)?;
            let bound_x = translate(p_term, &xn, &mut sup)?;
            d.push_step(
                RuleName::RDown,
                ren(
                    &xn,
                    ren(&p, par(vec![f_p, ren(&q, a_q), link(&p, o), bound_x])),
                ),
            );
            let reduct = if rule == RedexRule::SubAppLeft {
                LamTerm::app(
                    LamTerm::esub((**f).clone(), x.clone(), (**p_term).clone()),
                    (**a).clone(),
                )
            } else {
                LamTerm::app(
                    (**f).clone(),
                    LamTerm::esub((**a).clone(), x.clone(), (**p_term).clone()),
                )
            };
            d.relabel_premise(translate(&reduct, o, &mut supply.clone())?);
        }
        _ => return Err(wrong()),
    }
    Ok(d)
}

/// Compiles a whole reduction trace into one derivation from `[[N]]o`
/// (premise) down to `[[M]]o` (conclusion), plugging each simulation step
/// into the translated term context.
pub fn simulate_trace(
    trace: &ReductionTrace,
    o: &AtomName,
    supply: &ChannelSupply,
) -> Result<Derivation, SimulateError> {
    let mut current = trace.start.clone();
    let mut d = Derivation::identity(translate(&current, o, &mut supply.clone())?);
    for (site, next) in &trace.steps {
        let mut sup = supply.clone();
        let (ctx, redex, hole_out, hole_supply) =
            translate_ctx(&current, &site.path, o, &mut sup)?;
        let step_d = sim_step(site.rule, &redex, &hole_out, &hole_supply)?;
        let plugged = plug_in_context(&step_d, &ctx);
        let upper = compose(
            &Derivation::identity(d.premise().clone()),
            &plugged,
        )
        .map_err(|e| SimulateError::Chain(Box::new(e)))?;
        d.steps.extend(upper.steps);
        current = next.clone();
        d.relabel_premise(translate(&current, o, &mut supply.clone())?);
    }
    Ok(d)
}

/// The simulation steps applicable to a translation image, each with its
/// premise structure and lambda-level reduct. Empty on normal forms.
pub fn recognize_step(
    r: &Structure,
) -> Result<Vec<(RedexRule, Structure, LamTerm)>, SimulateError> {
    let term = readback(r).ok_or(SimulateError::NotAnImage)?;
    let out = output_channel(r).ok_or(SimulateError::NotAnImage)?;
    let mut result = Vec::new();
    for site in find_redexes(&term) {
        let reduct = step(&term, &site)?;
        let premise = translate(&reduct, &out, &mut ChannelSupply::new())?;
        result.push((site.rule, premise, reduct));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::lambda::{alpha_eq, parse_lam, reduce, Strategy};
    use crate::parse::parse_structure;
    use crate::rules::{check_derivation, down_fragment};
    use std::collections::BTreeSet;

    fn t(src: &str) -> LamTerm {
        parse_lam(src).unwrap()
    }

    fn o() -> AtomName {
        AtomName::new("ch_o")
    }

    fn down_plus_qup() -> BTreeSet<RuleName> {
        let mut s = down_fragment();
        s.insert(RuleName::QUp);
        s
    }

    #[test]
    fn o_ren_var_case() {
        let d = o_ren(&t("x"), &o(), &AtomName::new("ch_pp"), &ChannelSupply::new()).unwrap();
        assert!(equiv(&d.conclusion, &parse_structure("[<x;~ch_pp>;(ch_pp;~ch_o)]").unwrap()));
        assert!(equiv(d.premise(), &parse_structure("<x;~ch_o>").unwrap()));
        assert!(check_derivation(&d, &down_fragment()));
    }

    #[test]
    fn o_ren_all_cases_check() {
        for src in ["x", "\\x. x", "x y", "x[x:=y]", "\\x. x y", "(\\x. x) y"] {
            let m = t(src);
            let d = o_ren(&m, &o(), &AtomName::new("ch_pp"), &ChannelSupply::new())
                .unwrap_or_else(|e| panic!("o_ren failed on {src}: {e}"));
            assert!(
                check_derivation(&d, &down_fragment()),
                "o_ren not down-valid on {src}"
            );
            let want_concl = {
                let mp = translate(&m, &AtomName::new("ch_pp"), &mut ChannelSupply::new()).unwrap();
                par(vec![mp, link(&AtomName::new("ch_pp"), &o())])
            };
            assert!(equiv(&d.conclusion, &want_concl), "conclusion off on {src}");
            let want_prem = translate(&m, &o(), &mut ChannelSupply::new()).unwrap();
            assert!(equiv(d.premise(), &want_prem), "premise off on {src}");
        }
    }

    #[test]
    fn sim_s_var() {
        let redex = t("x[x:=y]");
        let d = sim_step(RedexRule::SubVar, &redex, &o(), &ChannelSupply::new()).unwrap();
        assert!(equiv(&d.conclusion, &parse_structure("{x}[<x;~ch_o>;<y;~x>]").unwrap()));
        assert!(equiv(d.premise(), &parse_structure("<y;~ch_o>").unwrap()));
        assert!(check_derivation(&d, &down_plus_qup()));
        assert_eq!(d.census().get(&RuleName::QUp), Some(&1));
        assert_eq!(d.census().get(&RuleName::AiUp), None);
        assert_eq!(d.census().get(&RuleName::RUp), None);
    }

    #[test]
    fn sim_s_intro() {
        let redex = t("(\\x. x) y");
        let d = sim_step(RedexRule::BetaIntro, &redex, &o(), &ChannelSupply::new()).unwrap();
        let want_prem = translate(&t("x[x:=y]"), &o(), &mut ChannelSupply::new()).unwrap();
        assert!(equiv(d.premise(), &want_prem));
        assert!(check_derivation(&d, &down_fragment()));
    }

    #[test]
    fn sim_s_abs() {
        let redex = t("(\\y. y x)[x:=z]");
        let d = sim_step(RedexRule::SubAbs, &redex, &o(), &ChannelSupply::new()).unwrap();
        let want_prem = translate(&t("\\y. (y x)[x:=z]"), &o(), &mut ChannelSupply::new()).unwrap();
        assert!(equiv(d.premise(), &want_prem));
        assert!(check_derivation(&d, &down_fragment()));
    }

    #[test]
    fn sim_s_app_both_sides() {
        let redex = t("(x y)[x:=z]");
        let d = sim_step(RedexRule::SubAppLeft, &redex, &o(), &ChannelSupply::new()).unwrap();
        let want = translate(&t("(x[x:=z]) y"), &o(), &mut ChannelSupply::new()).unwrap();
        assert!(equiv(d.premise(), &want));
        assert!(check_derivation(&d, &down_fragment()));

        let redex = t("(y x)[x:=z]");
        let d = sim_step(RedexRule::SubAppRight, &redex, &o(), &ChannelSupply::new()).unwrap();
        let want = translate(&t("y (x[x:=z])"), &o(), &mut ChannelSupply::new()).unwrap();
        assert!(equiv(d.premise(), &want));
        assert!(check_derivation(&d, &down_fragment()));
    }

    #[test]
    fn trace_simulation_identity_beta() {
        let m = t("(\\x. x) y");
        let trace = reduce(&m, &Strategy::LeftmostOutermost, 100).unwrap();
        let d = simulate_trace(&trace, &o(), &ChannelSupply::new()).unwrap();
        assert!(equiv(d.premise(), &parse_structure("<y;~ch_o>").unwrap()));
        assert!(equiv(
            &d.conclusion,
            &translate(&m, &o(), &mut ChannelSupply::new()).unwrap()
        ));
        assert!(check_derivation(&d, &down_plus_qup()));
        // exactly one q_up: the single sub_var step
        assert_eq!(d.census().get(&RuleName::QUp), Some(&1));
    }

    #[test]
    fn trace_simulation_under_binder() {
        // a congruence step below a lambda
        let m = t("\\w. (\\x. w x) u");
        let trace = reduce(&m, &Strategy::LeftmostOutermost, 100).unwrap();
        assert!(trace.len() >= 2);
        let d = simulate_trace(&trace, &o(), &ChannelSupply::new()).unwrap();
        assert!(check_derivation(&d, &down_plus_qup()));
        let sub_vars =
            trace.steps.iter().filter(|(s, _)| s.rule == RedexRule::SubVar).count();
        assert_eq!(d.census().get(&RuleName::QUp).copied().unwrap_or(0), sub_vars);
    }

    #[test]
    fn empty_trace() {
        let m = t("y z");
        let trace = reduce(&m, &Strategy::LeftmostOutermost, 100).unwrap();
        assert!(trace.is_empty());
        let d = simulate_trace(&trace, &o(), &ChannelSupply::new()).unwrap();
        assert!(d.steps.is_empty());
    }

    #[test]
    fn recognize_matches_find_redexes() {
        for src in ["x[x:=y]", "(\\x. x) y", "y", "(x y)[x:=z]"] {
            let m = t(src);
            let s = translate(&m, &o(), &mut ChannelSupply::new()).unwrap();
            let recognized = recognize_step(&s).unwrap();
            let sites = find_redexes(&m);
            assert_eq!(recognized.len(), sites.len(), "count mismatch on {src}");
            for ((rule, premise, reduct), site) in recognized.iter().zip(&sites) {
                assert_eq!(*rule, site.rule);
                let direct = step(&m, site).unwrap();
                assert!(alpha_eq(reduct, &direct), "reduct mismatch on {src}");
                let want = translate(&direct, &o(), &mut ChannelSupply::new()).unwrap();
                assert_eq!(canonicalize(premise), canonicalize(&want));
            }
        }
    }

    #[test]
    fn recognize_rejects_non_images() {
        assert!(matches!(
            recognize_step(&parse_structure("[a;b]").unwrap()),
            Err(SimulateError::NotAnImage)
        ));
    }
}
