//! Linear lambda terms with explicit substitutions.
//!
//! `M[x:=P]` is a syntactic node, not a meta-operation; reduction moves it
//! around by dedicated clauses. Formation is linear: a bound variable
//! occurs free in its body exactly once, and the operands of applications
//! and substitutions use disjoint variables. There is deliberately no
//! garbage-collection clause `y[x:=P] => y`: the logic has no tool that
//! erases P, so such terms are stuck and reported as normal forms.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LamTerm {
    Var(String),
    Abs(String, Box<LamTerm>),
    App(Box<LamTerm>, Box<LamTerm>),
    /// `ESub(m, x, p)` renders `m[x:=p]`.
    ESub(Box<LamTerm>, String, Box<LamTerm>),
}

use LamTerm::*;

impl LamTerm {
    pub fn var(x: impl Into<String>) -> LamTerm {
        Var(x.into())
    }

    pub fn abs(x: impl Into<String>, body: LamTerm) -> LamTerm {
        Abs(x.into(), Box::new(body))
    }

    pub fn app(f: LamTerm, a: LamTerm) -> LamTerm {
        App(Box::new(f), Box::new(a))
    }

    pub fn esub(m: LamTerm, x: impl Into<String>, p: LamTerm) -> LamTerm {
        ESub(Box::new(m), x.into(), Box::new(p))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Var(x) => BTreeSet::from([x.clone()]),
            Abs(x, body) => {
                let mut f = body.free_vars();
                f.remove(x);
                f
            }
            App(m, n) => m.free_vars().union(&n.free_vars()).cloned().collect(),
            ESub(m, x, p) => {
                let mut f = m.free_vars();
                f.remove(x);
                f.extend(p.free_vars());
                f
            }
        }
    }

    pub fn count_free(&self, x: &str) -> usize {
        match self {
            Var(y) => usize::from(y == x),
            Abs(y, body) => {
                if y == x {
                    0
                } else {
                    body.count_free(x)
                }
            }
            App(m, n) => m.count_free(x) + n.count_free(x),
            ESub(m, y, p) => {
                let in_m = if y == x { 0 } else { m.count_free(x) };
                in_m + p.count_free(x)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Var(_) => 1,
            Abs(_, body) => 1 + body.node_count(),
            App(m, n) | ESub(m, _, n) => 1 + m.node_count() + n.node_count(),
        }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&LamTerm> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match (self, i) {
                (Abs(_, body), 0) => body.subterm(rest),
                (App(m, _), 0) | (ESub(m, _, _), 0) => m.subterm(rest),
                (App(_, n), 1) | (ESub(_, _, n), 1) => n.subterm(rest),
                _ => None,
            },
        }
    }
}

/// Alpha-equality of terms, comparing binders by position.
pub fn alpha_eq(a: &LamTerm, b: &LamTerm) -> bool {
    fn go(a: &LamTerm, b: &LamTerm, ea: &mut Vec<String>, eb: &mut Vec<String>) -> bool {
        match (a, b) {
            (Var(x), Var(y)) => {
                let ia = ea.iter().rev().position(|v| v == x);
                let ib = eb.iter().rev().position(|v| v == y);
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Abs(x, m), Abs(y, n)) => {
                ea.push(x.clone());
                eb.push(y.clone());
                let r = go(m, n, ea, eb);
                ea.pop();
                eb.pop();
                r
            }
            (App(m1, n1), App(m2, n2)) => go(m1, m2, ea, eb) && go(n1, n2, ea, eb),
            (ESub(m1, x, p1), ESub(m2, y, p2)) => {
                if !go(p1, p2, ea, eb) {
                    return false;
                }
                ea.push(x.clone());
                eb.push(y.clone());
                let r = go(m1, m2, ea, eb);
                ea.pop();
                eb.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearityError {
    #[error("binder `{0}` is unused in its body")]
    UnusedBinder(String),
    #[error("variable `{0}` occurs more than once")]
    MultipleUse(String),
    #[error("variable `{0}` is shared between disjoint operands")]
    Overlap(String),
    #[error("substitution binder `{0}` is unused in its body")]
    UnusedSubstBinder(String),
}

/// Checks the linear formation rules, returning the free variables.
pub fn check_linear(m: &LamTerm) -> Result<BTreeSet<String>, LinearityError> {
    match m {
        Var(x) => Ok(BTreeSet::from([x.clone()])),
        Abs(x, body) => {
            let fv = check_linear(body)?;
            match body.count_free(x) {
                0 => Err(LinearityError::UnusedBinder(x.clone())),
                1 => Ok(fv.into_iter().filter(|v| v != x).collect()),
                _ => Err(LinearityError::MultipleUse(x.clone())),
            }
        }
        App(f, a) => {
            let ff = check_linear(f)?;
            let fa = check_linear(a)?;
            if let Some(shared) = ff.intersection(&fa).next() {
                return Err(LinearityError::Overlap(shared.clone()));
            }
            Ok(ff.union(&fa).cloned().collect())
        }
        ESub(body, x, p) => {
            let fb = check_linear(body)?;
            match body.count_free(x) {
                0 => return Err(LinearityError::UnusedSubstBinder(x.clone())),
                1 => {}
                _ => return Err(LinearityError::MultipleUse(x.clone())),
            }
            let fp = check_linear(p)?;
            let fb_minus: BTreeSet<String> = fb.into_iter().filter(|v| v != x).collect();
            if let Some(shared) = fb_minus.intersection(&fp).next() {
                return Err(LinearityError::Overlap(shared.clone()));
            }
            Ok(fb_minus.union(&fp).cloned().collect())
        }
    }
}

pub fn is_linear(m: &LamTerm) -> bool {
    check_linear(m).is_ok()
}

/// The five beta clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RedexRule {
    BetaIntro,
    SubVar,
    SubAbs,
    SubAppLeft,
    SubAppRight,
}

impl RedexRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RedexRule::BetaIntro => "beta_intro",
            RedexRule::SubVar => "sub_var",
            RedexRule::SubAbs => "sub_abs",
            RedexRule::SubAppLeft => "sub_app_left",
            RedexRule::SubAppRight => "sub_app_right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedexSite {
    pub path: Vec<usize>,
    pub rule: RedexRule,
}

/// All positions where one beta clause applies, in preorder.
pub fn find_redexes(m: &LamTerm) -> Vec<RedexSite> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk(m, &mut path, &mut out);
    out
}

fn walk(m: &LamTerm, path: &mut Vec<usize>, out: &mut Vec<RedexSite>) {
    if let Some(rule) = redex_at(m) {
        out.push(RedexSite { path: path.clone(), rule });
    }
    match m {
        Var(_) => {}
        Abs(_, body) => {
            path.push(0);
            walk(body, path, out);
            path.pop();
        }
        App(f, a) | ESub(f, _, a) => {
            path.push(0);
            walk(f, path, out);
            path.pop();
            path.push(1);
            walk(a, path, out);
            path.pop();
        }
    }
}

fn redex_at(m: &LamTerm) -> Option<RedexRule> {
    match m {
        App(f, _) if matches!(**f, Abs(_, _)) => Some(RedexRule::BetaIntro),
        ESub(body, x, _) => match &**body {
            Var(y) if y == x => Some(RedexRule::SubVar),
            Abs(y, inner) if y != x && inner.count_free(x) > 0 => Some(RedexRule::SubAbs),
            App(f, a) => {
                if f.count_free(x) > 0 {
                    Some(RedexRule::SubAppLeft)
                } else if a.count_free(x) > 0 {
                    Some(RedexRule::SubAppRight)
                } else {
                    None // stuck: nothing can erase P
                }
            }
            _ => None,
        },
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("no such subterm at path {0:?}")]
    BadPath(Vec<usize>),
    #[error("rule {rule:?} does not apply at path {path:?}")]
    NotARedex { path: Vec<usize>, rule: RedexRule },
    #[error("step limit of {0} exceeded")]
    StepLimit(usize),
}

/// Applies one beta step at the given site.
pub fn step(m: &LamTerm, site: &RedexSite) -> Result<LamTerm, StepError> {
    fn go(m: &LamTerm, path: &[usize], site: &RedexSite) -> Result<LamTerm, StepError> {
        match path.split_first() {
            None => contract(m, site),
            Some((&i, rest)) => match (m, i) {
                (Abs(x, body), 0) => Ok(LamTerm::abs(x.clone(), go(body, rest, site)?)),
                (App(f, a), 0) => Ok(LamTerm::app(go(f, rest, site)?, (**a).clone())),
                (App(f, a), 1) => Ok(LamTerm::app((**f).clone(), go(a, rest, site)?)),
                (ESub(b, x, p), 0) => {
                    Ok(LamTerm::esub(go(b, rest, site)?, x.clone(), (**p).clone()))
                }
                (ESub(b, x, p), 1) => {
                    Ok(LamTerm::esub((**b).clone(), x.clone(), go(p, rest, site)?))
                }
                _ => Err(StepError::BadPath(site.path.clone())),
            },
        }
    }
    fn contract(m: &LamTerm, site: &RedexSite) -> Result<LamTerm, StepError> {
        let wrong = || StepError::NotARedex { path: site.path.clone(), rule: site.rule };
        match (site.rule, m) {
            (RedexRule::BetaIntro, App(f, a)) => match &**f {
                Abs(x, body) => Ok(LamTerm::esub((**body).clone(), x.clone(), (**a).clone())),
                _ => Err(wrong()),
            },
            (RedexRule::SubVar, ESub(body, x, p)) => match &**body {
                Var(y) if y == x => Ok((**p).clone()),
                _ => Err(wrong()),
            },
            (RedexRule::SubAbs, ESub(body, x, p)) => match &**body {
                Abs(y, inner) if y != x => Ok(LamTerm::abs(
                    y.clone(),
                    LamTerm::esub((**inner).clone(), x.clone(), (**p).clone()),
                )),
                _ => Err(wrong()),
            },
            (RedexRule::SubAppLeft, ESub(body, x, p)) => match &**body {
                App(f, a) if f.count_free(x) > 0 => Ok(LamTerm::app(
                    LamTerm::esub((**f).clone(), x.clone(), (**p).clone()),
                    (**a).clone(),
                )),
                _ => Err(wrong()),
            },
            (RedexRule::SubAppRight, ESub(body, x, p)) => match &**body {
                App(f, a) if a.count_free(x) > 0 => Ok(LamTerm::app(
                    (**f).clone(),
                    LamTerm::esub((**a).clone(), x.clone(), (**p).clone()),
                )),
                _ => Err(wrong()),
            },
            _ => Err(wrong()),
        }
    }
    go(m, &site.path, site)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    RightmostInnermost,
    Scripted(Vec<RedexSite>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEnd {
    NormalForm,
    StepLimit,
    ScriptComplete,
}

#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub start: LamTerm,
    pub steps: Vec<(RedexSite, LamTerm)>,
    pub end: TraceEnd,
}

impl ReductionTrace {
    pub fn terminal(&self) -> &LamTerm {
        self.steps.last().map(|(_, t)| t).unwrap_or(&self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A generous step budget for linear terms.
pub fn default_step_bound(m: &LamTerm) -> usize {
    let n = m.node_count();
    4 * n * n
}

/// Small-step reduction under the chosen strategy.
pub fn reduce(
    m: &LamTerm,
    strategy: &Strategy,
    max_steps: usize,
) -> Result<ReductionTrace, StepError> {
    let mut trace =
        ReductionTrace { start: m.clone(), steps: Vec::new(), end: TraceEnd::NormalForm };
    match strategy {
        Strategy::Scripted(sites) => {
            for site in sites {
                if trace.steps.len() >= max_steps {
                    return Err(StepError::StepLimit(max_steps));
                }
                let current = trace.terminal().clone();
                let found = find_redexes(&current);
                if !found.iter().any(|s| s == site) {
                    return Err(StepError::NotARedex {
                        path: site.path.clone(),
                        rule: site.rule,
                    });
                }
                let next = step(&current, site)?;
                trace.steps.push((site.clone(), next));
            }
            trace.end = TraceEnd::ScriptComplete;
            Ok(trace)
        }
        _ => {
            loop {
                let current = trace.terminal().clone();
                let mut found = find_redexes(&current);
                if found.is_empty() {
                    trace.end = TraceEnd::NormalForm;
                    return Ok(trace);
                }
                if trace.steps.len() >= max_steps {
                    trace.end = TraceEnd::StepLimit;
                    return Ok(trace);
                }
                let site = match strategy {
                    Strategy::LeftmostOutermost => found.remove(0),
                    Strategy::RightmostInnermost => {
                        let mut best = 0;
                        for i in 1..found.len() {
                            if more_inner_right(&found[i].path, &found[best].path) {
                                best = i;
                            }
                        }
                        found.remove(best)
                    }
                    Strategy::Scripted(_) => unreachable!(),
                };
                let next = step(&current, &site)?;
                trace.steps.push((site, next));
            }
        }
    }
}

/// True iff `a` is deeper-right of `b`: extensions beat prefixes, larger
/// child indices beat smaller ones.
fn more_inner_right(a: &[usize], b: &[usize]) -> bool {
    for i in 0..a.len().min(b.len()) {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    a.len() > b.len()
}

// ---------------------------------------------------------------------
// text syntax
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LamParseError {
    #[error("{pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("{pos}: variable `{name}` uses the reserved channel prefix `ch_`")]
    ReservedName { pos: usize, name: String },
}

struct LamParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> LamParser<'a> {
    fn err(&self, msg: impl Into<String>) -> LamParseError {
        LamParseError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), LamParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn name(&mut self) -> Result<String, LamParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            return Err(self.err("expected a variable name"));
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        if name.starts_with("ch_") {
            return Err(LamParseError::ReservedName { pos: start, name });
        }
        Ok(name)
    }

    fn term(&mut self) -> Result<LamTerm, LamParseError> {
        if self.peek() == Some(b'\\') {
            self.pos += 1;
            let x = self.name()?;
            self.eat(b'.')?;
            let body = self.term()?;
            return Ok(LamTerm::abs(x, body));
        }
        let mut acc = self.postfix()?;
        loop {
            match self.peek() {
                Some(c) if c == b'(' || c.is_ascii_alphabetic() || c == b'_' => {
                    let arg = self.postfix()?;
                    acc = LamTerm::app(acc, arg);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn postfix(&mut self) -> Result<LamTerm, LamParseError> {
        let mut acc = self.primary()?;
        while self.peek() == Some(b'[') {
            self.pos += 1;
            let x = self.name()?;
            self.skip_ws();
            if !self.src[self.pos..].starts_with(b":=") {
                return Err(self.err("expected `:=`"));
            }
            self.pos += 2;
            let p = self.term()?;
            self.eat(b']')?;
            acc = LamTerm::esub(acc, x, p);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<LamTerm, LamParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                self.eat(b')')?;
                Ok(t)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => Ok(LamTerm::var(self.name()?)),
            _ => Err(self.err("expected a term")),
        }
    }
}

pub fn parse_lam(text: &str) -> Result<LamTerm, LamParseError> {
    let mut p = LamParser { src: text.as_bytes(), pos: 0 };
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

pub fn print_lam(m: &LamTerm) -> String {
    m.to_string()
}

impl fmt::Display for LamTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn primary(t: &LamTerm) -> bool {
            matches!(t, Var(_) | ESub(_, _, _))
        }
        fn atom(t: &LamTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if primary(t) {
                write!(f, "{t}")
            } else {
                write!(f, "({t})")
            }
        }
        match self {
            Var(x) => f.write_str(x),
            Abs(x, body) => write!(f, "\\{x}. {body}"),
            App(m, n) => {
                // left operand may itself be an application chain
                match &**m {
                    App(_, _) => write!(f, "{m}")?,
                    other => atom(other, f)?,
                }
                f.write_str(" ")?;
                atom(n, f)
            }
            ESub(m, x, p) => {
                atom(m, f)?;
                write!(f, "[{x}:={p}]")
            }
        }
    }
}

impl fmt::Debug for LamTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
