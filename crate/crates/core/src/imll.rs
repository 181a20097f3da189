//! The intuitionistic multiplicative fragment: formulas, proof trees, the
//! embedding into structures, and compilation of proofs into derivations.
//!
//! A sequent `A1,...,Am |- A` embeds as `<(~A1*;...;~Am*); A*>`. A proof
//! compiles to a derivation whose conclusion is the embedded root sequent
//! and whose premise is the copar of one forwarder `<~A*;A*>` per axiom
//! leaf.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::equiv;
use crate::context::Context;
use crate::derived::gen_interaction_up;
use crate::rules::{compose, plug_in_context, Derivation, RuleName};
use crate::structure::{assemble, Kind, Structure};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ImllFormula {
    Var(String),
    Tensor(Box<ImllFormula>, Box<ImllFormula>),
    Lolli(Box<ImllFormula>, Box<ImllFormula>),
}

impl ImllFormula {
    pub fn var(s: impl Into<String>) -> Self {
        ImllFormula::Var(s.into())
    }

    pub fn tensor(l: ImllFormula, r: ImllFormula) -> Self {
        ImllFormula::Tensor(Box::new(l), Box::new(r))
    }

    pub fn lolli(l: ImllFormula, r: ImllFormula) -> Self {
        ImllFormula::Lolli(Box::new(l), Box::new(r))
    }
}

impl fmt::Display for ImllFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // tensor binds tighter than lolli; lolli is right-associative
        fn go(x: &ImllFormula, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match x {
                ImllFormula::Var(v) => f.write_str(v),
                ImllFormula::Tensor(l, r) => {
                    let need = prec > 2;
                    if need {
                        f.write_str("(")?;
                    }
                    go(l, f, 3)?;
                    f.write_str(" * ")?;
                    go(r, f, 2)?;
                    if need {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                ImllFormula::Lolli(l, r) => {
                    let need = prec > 1;
                    if need {
                        f.write_str("(")?;
                    }
                    go(l, f, 2)?;
                    f.write_str(" -o ")?;
                    go(r, f, 1)?;
                    if need {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImllError {
    #[error("formula syntax error at {0}: {1}")]
    Formula(usize, String),
    #[error("discharge index {index} out of range for a context of {len}")]
    BadIndex { index: usize, len: usize },
    #[error("cut formula mismatch: left proves `{left}`, right consumes `{right}`")]
    CutMismatch { left: ImllFormula, right: ImllFormula },
    #[error("malformed proof JSON: {0}")]
    Json(String),
}

/// F ::= NAME | F "*" F | F "-o" F, with "*" tighter and "-o"
/// right-associative.
pub fn parse_formula(text: &str) -> Result<ImllFormula, ImllError> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
    }
    impl<'a> P<'a> {
        fn ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn lolli(&mut self) -> Result<ImllFormula, ImllError> {
            let l = self.tensor()?;
            self.ws();
            if self.s[self.i..].starts_with(b"-o") {
                self.i += 2;
                let r = self.lolli()?;
                Ok(ImllFormula::lolli(l, r))
            } else {
                Ok(l)
            }
        }
        fn tensor(&mut self) -> Result<ImllFormula, ImllError> {
            let mut acc = self.atom()?;
            loop {
                self.ws();
                if self.i < self.s.len() && self.s[self.i] == b'*' {
                    self.i += 1;
                    let r = self.atom()?;
                    acc = ImllFormula::tensor(acc, r);
                } else {
                    return Ok(acc);
                }
            }
        }
        fn atom(&mut self) -> Result<ImllFormula, ImllError> {
            self.ws();
            if self.i < self.s.len() && self.s[self.i] == b'(' {
                self.i += 1;
                let f = self.lolli()?;
                self.ws();
                if self.i >= self.s.len() || self.s[self.i] != b')' {
                    return Err(ImllError::Formula(self.i, "expected `)`".into()));
                }
                self.i += 1;
                return Ok(f);
            }
            let start = self.i;
            while self.i < self.s.len()
                && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_')
            {
                self.i += 1;
            }
            if start == self.i {
                return Err(ImllError::Formula(self.i, "expected a formula".into()));
            }
            Ok(ImllFormula::var(
                std::str::from_utf8(&self.s[start..self.i]).unwrap(),
            ))
        }
    }
    let mut p = P { s: text.as_bytes(), i: 0 };
    let f = p.lolli()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(ImllError::Formula(p.i, "trailing input".into()));
    }
    Ok(f)
}

/// var -> atom; A (x) B -> (A*;B*); A -o B -> [~A*;B*].
pub fn embed_formula(f: &ImllFormula) -> Structure {
    match f {
        ImllFormula::Var(v) => Structure::atom(v.as_str()),
        ImllFormula::Tensor(l, r) => {
            assemble(Kind::CoPar, vec![embed_formula(l), embed_formula(r)])
        }
        ImllFormula::Lolli(l, r) => assemble(
            Kind::Par,
            vec![embed_formula(l).negate(), embed_formula(r)],
        ),
    }
}

/// `A1,...,Am |- A` embeds as `<(~A1*;...;~Am*); A*>`; an empty context
/// collapses to `A*`.
pub fn embed_sequent(gamma: &[ImllFormula], rhs: &ImllFormula) -> Structure {
    let neg = assemble(
        Kind::CoPar,
        gamma.iter().map(|f| embed_formula(f).negate()).collect(),
    );
    assemble(Kind::Seq, vec![neg, embed_formula(rhs)])
}

/// Proof trees with positional context bookkeeping. The sequent at every
/// node is computed, not stored; contexts concatenate left-to-right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImllProof {
    /// `A |- A`, written with the formula in text syntax.
    Ax(String),
    /// From `G |- A` and `D |- B` conclude `G, D |- A (x) B`.
    Tensor { left: Box<ImllProof>, right: Box<ImllProof> },
    /// From `G |- A` with the hypothesis at `index` discharged as `B`,
    /// conclude `G minus B |- B -o A`.
    Lolli { sub: Box<ImllProof>, index: usize },
    /// From `G |- A` and `D |- B` with `A` consumed at `index` in `D`,
    /// conclude `G, D minus A |- B`.
    Cut { left: Box<ImllProof>, right: Box<ImllProof>, index: usize },
}

impl ImllProof {
    pub fn from_json_str(s: &str) -> Result<ImllProof, ImllError> {
        serde_json::from_str(s).map_err(|e| ImllError::Json(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("proof serializes");
        s.push('\n');
        s
    }
}

/// The sequent proved by a proof tree.
pub fn sequent(p: &ImllProof) -> Result<(Vec<ImllFormula>, ImllFormula), ImllError> {
    match p {
        ImllProof::Ax(text) => {
            let f = parse_formula(text)?;
            Ok((vec![f.clone()], f))
        }
        ImllProof::Tensor { left, right } => {
            let (mut g, a) = sequent(left)?;
            let (d, b) = sequent(right)?;
            g.extend(d);
            Ok((g, ImllFormula::tensor(a, b)))
        }
        ImllProof::Lolli { sub, index } => {
            let (mut g, a) = sequent(sub)?;
            if *index >= g.len() {
                return Err(ImllError::BadIndex { index: *index, len: g.len() });
            }
            let b = g.remove(*index);
            Ok((g, ImllFormula::lolli(b, a)))
        }
        ImllProof::Cut { left, right, index } => {
            let (g, a) = sequent(left)?;
            let (mut d, b) = sequent(right)?;
            if *index >= d.len() {
                return Err(ImllError::BadIndex { index: *index, len: d.len() });
            }
            let consumed = d.remove(*index);
            if consumed != a {
                return Err(ImllError::CutMismatch { left: a, right: consumed });
            }
            let mut ctx = g;
            ctx.extend(d);
            Ok((ctx, b))
        }
    }
}

/// Compiles a proof into a full-SBVr derivation with the embedded root
/// sequent as conclusion and the copar of axiom forwarders as premise.
pub fn compile_proof(p: &ImllProof) -> Result<Derivation, ImllError> {
    sequent(p)?; // validate the whole tree before building
    match p {
        ImllProof::Ax(text) => {
            let f = parse_formula(text)?;
            Ok(Derivation::identity(embed_sequent(&[f.clone()], &f)))
        }
        ImllProof::Tensor { left, right } => {
            let dl = compile_proof(left)?;
            let dr = compile_proof(right)?;
            let (g, a) = sequent(left)?;
            let (dctx, b) = sequent(right)?;
            let mut ctx = g.clone();
            ctx.extend(dctx.clone());
            let conclusion = embed_sequent(&ctx, &ImllFormula::tensor(a, b));
            let mut d = Derivation::identity(conclusion);
            d.push_step(
                RuleName::QUp,
                assemble(Kind::CoPar, vec![dl.conclusion.clone(), dr.conclusion.clone()]),
            );
            let pair = side_by_side(&dl, &dr);
            let joined = compose(&d, &pair).expect("tensor boundary");
            Ok(joined)
        }
        ImllProof::Lolli { sub, index } => {
            let ds = compile_proof(sub)?;
            let (g_all, a) = sequent(sub)?;
            let mut g = g_all.clone();
            let b = g.remove(*index);
            let conclusion = embed_sequent(&g, &ImllFormula::lolli(b.clone(), a.clone()));
            let mut d = Derivation::identity(conclusion);
            // pmix inside the seq: [~B*;A*] opens into <~B*;A*>
            let neg_rest = assemble(
                Kind::CoPar,
                g.iter().map(|f| embed_formula(f).negate()).collect(),
            );
            d.push_step(
                RuleName::QDown,
                assemble(
                    Kind::Seq,
                    vec![neg_rest, embed_formula(&b).negate(), embed_formula(&a)],
                ),
            );
            // mixp merges ~B* into the context copar
            d.push_step(RuleName::QUp, embed_sequent(&g_all, &a));
            let joined = compose(&d, &ds).expect("lolli boundary");
            Ok(joined)
        }
        ImllProof::Cut { left, right, index } => {
            let dl = compile_proof(left)?;
            let dr = compile_proof(right)?;
            let (g, a) = sequent(left)?;
            let (mut dctx, b) = sequent(right)?;
            dctx.remove(*index);
            let mut ctx = g.clone();
            ctx.extend(dctx.clone());
            let conclusion = embed_sequent(&ctx, &b);
            let a_emb = embed_formula(&a);
            // interaction introduces (~A*;A*) beside the context
            let neg_g = assemble(
                Kind::CoPar,
                g.iter().map(|f| embed_formula(f).negate()).collect(),
            );
            let hole_ctx = Context::Seq(
                vec![],
                Box::new(Context::CoPar(
                    dctx.iter().map(|f| embed_formula(f).negate()).collect(),
                    Box::new(Context::Seq(
                        vec![neg_g.clone()],
                        Box::new(Context::Hole),
                        vec![],
                    )),
                )),
                vec![embed_formula(&b)],
            );
            let interaction = plug_in_context(&gen_interaction_up(&a_emb.negate()), &hole_ctx);
            let mut d = Derivation::identity(conclusion);
            if !equiv(&d.conclusion, &interaction.conclusion) {
                panic!(
                    "cut interaction boundary: {} vs {}",
                    d.conclusion, interaction.conclusion
                );
            }
            d.steps.extend(interaction.steps);
            // first q_up splits ~A* off toward the right premise
            let q1 = assemble(
                Kind::Seq,
                vec![
                    assemble(
                        Kind::CoPar,
                        std::iter::once(a_emb.negate())
                            .chain(std::iter::once(assemble(
                                Kind::Seq,
                                vec![neg_g, a_emb.clone()],
                            )))
                            .chain(dctx.iter().map(|f| embed_formula(f).negate()))
                            .collect(),
                    ),
                    embed_formula(&b),
                ],
            );
            d.push_step(RuleName::QUp, q1);
            // second q_up produces the copar of the two premises
            let (dctx_full, _) = sequent(right)?;
            let q2 = assemble(
                Kind::CoPar,
                vec![embed_sequent(&g, &a), embed_sequent(&dctx_full, &b)],
            );
            d.push_step(RuleName::QUp, q2);
            let pair = side_by_side(&dl, &dr);
            let joined = compose(&d, &pair).expect("cut boundary");
            Ok(joined)
        }
    }
}

/// Two derivations running side by side under a copar.
fn side_by_side(left: &Derivation, right: &Derivation) -> Derivation {
    let l = plug_in_context(
        left,
        &Context::CoPar(vec![right.conclusion.clone()], Box::new(Context::Hole)),
    );
    let r = plug_in_context(
        right,
        &Context::CoPar(vec![left.premise().clone()], Box::new(Context::Hole)),
    );
    compose(&l, &r).expect("side-by-side boundary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_structure;
    use crate::rules::{check_derivation, full_system, RuleName};

    fn p(s: &str) -> Structure {
        parse_structure(s).unwrap()
    }

    #[test]
    fn formula_embedding() {
        assert_eq!(embed_formula(&parse_formula("a -o b").unwrap()), p("[~a;b]"));
        assert_eq!(embed_formula(&parse_formula("a * b").unwrap()), p("(a;b)"));
        assert_eq!(embed_formula(&parse_formula("a").unwrap()), p("a"));
        // precedence: * over -o, -o right-associative
        assert_eq!(
            parse_formula("a * b -o c").unwrap(),
            ImllFormula::lolli(
                ImllFormula::tensor(ImllFormula::var("a"), ImllFormula::var("b")),
                ImllFormula::var("c")
            )
        );
        assert_eq!(
            parse_formula("a -o b -o c").unwrap(),
            ImllFormula::lolli(
                ImllFormula::var("a"),
                ImllFormula::lolli(ImllFormula::var("b"), ImllFormula::var("c"))
            )
        );
    }

    #[test]
    fn sequent_embedding() {
        let a = parse_formula("a").unwrap();
        assert_eq!(embed_sequent(&[a.clone()], &a), p("<~a;a>"));
        let imp = parse_formula("a -o a").unwrap();
        assert_eq!(embed_sequent(&[], &imp), p("[~a;a]"));
        let b = parse_formula("b").unwrap();
        let ab = parse_formula("a * b").unwrap();
        assert_eq!(embed_sequent(&[a, b], &ab), p("<(~a;~b);(a;b)>"));
    }

    #[test]
    fn compile_ax() {
        let d = compile_proof(&ImllProof::Ax("a -o b".into())).unwrap();
        assert!(d.steps.is_empty());
        assert_eq!(d.conclusion, p("<(a;~b);[~a;b]>"));
    }

    #[test]
    fn compile_lolli_over_ax() {
        let proof = ImllProof::Lolli {
            sub: Box::new(ImllProof::Ax("a".into())),
            index: 0,
        };
        let d = compile_proof(&proof).unwrap();
        assert!(equiv(&d.conclusion, &p("[~a;a]")));
        assert!(equiv(d.premise(), &p("<~a;a>")));
        assert!(check_derivation(&d, &full_system()));
        assert_eq!(d.census().get(&RuleName::AiUp), None);
    }

    #[test]
    fn compile_tensor_of_axioms() {
        let proof = ImllProof::Tensor {
            left: Box::new(ImllProof::Ax("a".into())),
            right: Box::new(ImllProof::Ax("b".into())),
        };
        let d = compile_proof(&proof).unwrap();
        assert!(equiv(&d.conclusion, &p("<(~a;~b);(a;b)>")));
        assert!(equiv(d.premise(), &p("(<~a;a>;<~b;b>)")));
        assert!(check_derivation(&d, &full_system()));
        assert_eq!(d.census().get(&RuleName::QUp), Some(&1));
        assert_eq!(d.census().get(&RuleName::AiUp), None);
    }

    #[test]
    fn compile_cut_of_axioms() {
        let proof = ImllProof::Cut {
            left: Box::new(ImllProof::Ax("a".into())),
            right: Box::new(ImllProof::Ax("a".into())),
            index: 0,
        };
        let d = compile_proof(&proof).unwrap();
        assert!(equiv(&d.conclusion, &p("<~a;a>")));
        assert!(equiv(d.premise(), &p("(<~a;a>;<~a;a>)")));
        assert!(check_derivation(&d, &full_system()));
    }

    #[test]
    fn compile_composite_cut() {
        // |- a -o a  cut against  a -o a |- a -o a
        let proof = ImllProof::Cut {
            left: Box::new(ImllProof::Lolli {
                sub: Box::new(ImllProof::Ax("a".into())),
                index: 0,
            }),
            right: Box::new(ImllProof::Ax("a -o a".into())),
            index: 0,
        };
        let d = compile_proof(&proof).unwrap();
        assert!(equiv(&d.conclusion, &p("[~a;a]")));
        assert!(check_derivation(&d, &full_system()));
        // the cut consumes general interaction up
        assert!(d.census().get(&RuleName::AiUp).copied().unwrap_or(0) > 0);
    }

    #[test]
    fn sequent_errors() {
        let bad = ImllProof::Cut {
            left: Box::new(ImllProof::Ax("a".into())),
            right: Box::new(ImllProof::Ax("b".into())),
            index: 0,
        };
        assert!(matches!(sequent(&bad), Err(ImllError::CutMismatch { .. })));
        assert!(compile_proof(&bad).is_err());
    }

    #[test]
    fn proof_json_round_trip() {
        let proof = ImllProof::Tensor {
            left: Box::new(ImllProof::Ax("a".into())),
            right: Box::new(ImllProof::Lolli {
                sub: Box::new(ImllProof::Ax("b".into())),
                index: 0,
            }),
        };
        let text = proof.to_json_string();
        let back = ImllProof::from_json_str(&text).unwrap();
        assert_eq!(back, proof);
    }
}
