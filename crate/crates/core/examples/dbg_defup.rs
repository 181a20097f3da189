use seqren_core::derived::def_up;
use seqren_core::parse::parse_structure;
use seqren_core::rules::{check_derivation_detailed, RuleName};
use std::collections::BTreeSet;

fn main() {
    let r = parse_structure("<[a;~a;b];[~b;b];~d>").unwrap();
    let t = parse_structure("<(b;<a;d>);d;~a>").unwrap();
    let d = def_up(&r, &t, &"zz".into()).unwrap();
    for (i, s) in d.steps.iter().enumerate() {
        println!("step {i}: {} : {}  =>  {}", s.rule, s.conclusion, s.premise);
    }
    let allowed: BTreeSet<_> = [RuleName::AiUp, RuleName::Switch, RuleName::QUp].into_iter().collect();
    match check_derivation_detailed(&d, &allowed) {
        Ok(()) => println!("OK"),
        Err(e) => println!("FAIL: {e}"),
    }
}
