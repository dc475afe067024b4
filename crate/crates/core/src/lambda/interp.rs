use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::parser::parse;
use super::syntax::{Binder, Combinator, Term};
use crate::error::{Error, Result};
use crate::order::{Elem, ImplicativeStructure};

/// Names bound to algebra elements, used for free variables of a term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env(BTreeMap<String, Elem>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Binds `name`; rebinding an existing name is an error.
    pub fn bind(&mut self, name: &str, e: Elem) -> Result<()> {
        if self.0.insert(name.to_string(), e).is_some() {
            return Err(Error::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    pub fn with(mut self, name: &str, e: Elem) -> Env {
        self.0.insert(name.to_string(), e);
        self
    }

    pub fn get(&self, name: &str) -> Option<Elem> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Elem)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

type NodeId = usize;

#[derive(Debug, Clone)]
enum Node {
    Level(usize),
    Value(Elem),
    App(NodeId, NodeId),
    Meet(NodeId, NodeId),
    Lam { level: usize, body: NodeId },
}

#[derive(Clone)]
enum Scope {
    Level(usize),
    Macro(NodeId),
}

/// A term compiled against a structure, with binders as absolute levels so
/// that `let` bodies can be inlined without shifting.
struct Compiled<'a> {
    a: &'a ImplicativeStructure,
    nodes: Vec<Node>,
    fv: Vec<Vec<usize>>,
    combinators: HashMap<Combinator, NodeId>,
}

const MEMO_CAP: usize = 1 << 20;

impl<'a> Compiled<'a> {
    fn new(a: &'a ImplicativeStructure) -> Compiled<'a> {
        Compiled { a, nodes: Vec::new(), fv: Vec::new(), combinators: HashMap::new() }
    }

    fn push(&mut self, node: Node) -> NodeId {
        let fv = match &node {
            Node::Level(l) => vec![*l],
            Node::Value(_) => vec![],
            Node::App(x, y) | Node::Meet(x, y) => {
                let mut v = self.fv[*x].clone();
                v.extend(&self.fv[*y]);
                v.sort_unstable();
                v.dedup();
                v
            }
            Node::Lam { level, body } => self.fv[*body].iter().copied().filter(|l| l != level).collect(),
        };
        self.nodes.push(node);
        self.fv.push(fv);
        self.nodes.len() - 1
    }

    fn compile(&mut self, t: &Term, scope: &mut Vec<(String, Scope)>, depth: usize, env: &Env) -> Result<NodeId> {
        match t {
            Term::Var(x) => match scope.iter().rev().find(|(n, _)| n == x) {
                Some((_, Scope::Level(l))) => Ok(self.push(Node::Level(*l))),
                Some((_, Scope::Macro(id))) => Ok(*id),
                None => match env.get(x) {
                    Some(e) => Ok(self.push(Node::Value(e))),
                    None => Err(Error::UnboundVariable(x.clone())),
                },
            },
            Term::Quote(x) => {
                let e = self.a.elem(x)?;
                Ok(self.push(Node::Value(e)))
            }
            Term::Const(c) => {
                if let Some(id) = self.combinators.get(c) {
                    return Ok(*id);
                }
                let def = parse(c.definition()).expect("combinator definitions parse");
                let id = self.compile(&def, &mut Vec::new(), 0, &Env::new())?;
                self.combinators.insert(*c, id);
                Ok(id)
            }
            Term::App(f, x) => {
                let f = self.compile(f, scope, depth, env)?;
                let x = self.compile(x, scope, depth, env)?;
                Ok(self.push(Node::App(f, x)))
            }
            Term::MeetPair(x, y) => {
                let x = self.compile(x, scope, depth, env)?;
                let y = self.compile(y, scope, depth, env)?;
                Ok(self.push(Node::Meet(x, y)))
            }
            Term::Pair(x, y) => {
                // lam z . z x y with z one level deeper than everything in scope
                let z = depth;
                let xs = self.compile(x, scope, depth + 1, env)?;
                let ys = self.compile(y, scope, depth + 1, env)?;
                let zn = self.push(Node::Level(z));
                let zx = self.push(Node::App(zn, xs));
                let body = self.push(Node::App(zx, ys));
                Ok(self.push(Node::Lam { level: z, body }))
            }
            Term::LetIn(x, bound, body) => {
                let b = self.compile(bound, scope, depth, env)?;
                scope.push((x.clone(), Scope::Macro(b)));
                let r = self.compile(body, scope, depth, env);
                scope.pop();
                r
            }
            Term::Lam(binders, body) => {
                let k = scope.len();
                let mut levels = Vec::with_capacity(binders.len());
                for (i, b) in binders.iter().enumerate() {
                    let level = depth + i;
                    levels.push(level);
                    if let Binder::Named(x) = b {
                        scope.push((x.clone(), Scope::Level(level)));
                    }
                }
                let r = self.compile(body, scope, depth + binders.len(), env);
                scope.truncate(k);
                let mut id = r?;
                for level in levels.into_iter().rev() {
                    id = self.push(Node::Lam { level, body: id });
                }
                Ok(id)
            }
        }
    }
}

struct Evaluator<'c, 'a> {
    c: &'c Compiled<'a>,
    memo: HashMap<(NodeId, Vec<u8>), Elem>,
}

impl Evaluator<'_, '_> {
    fn eval(&mut self, id: NodeId, vals: &mut Vec<Elem>) -> Elem {
        let a = self.c.a;
        let key_vars = &self.c.fv[id];
        let memoize = !key_vars.is_empty() || matches!(self.c.nodes[id], Node::Lam { .. });
        let key = memoize.then(|| (id, key_vars.iter().map(|&l| vals[l].0).collect::<Vec<u8>>()));
        if let Some(k) = &key {
            if let Some(v) = self.memo.get(k) {
                return *v;
            }
        }
        let v = match self.c.nodes[id] {
            Node::Level(l) => vals[l],
            Node::Value(e) => e,
            Node::App(f, x) => {
                let f = self.eval(f, vals);
                let x = self.eval(x, vals);
                a.app(f, x)
            }
            Node::Meet(x, y) => {
                let x = self.eval(x, vals);
                let y = self.eval(y, vals);
                a.enc(x, y)
            }
            Node::Lam { level, body } => {
                if vals.len() <= level {
                    vals.resize(level + 1, a.top());
                }
                if !self.c.fv[body].contains(&level) {
                    // A constant body: antitonicity makes the meet exact at top.
                    let b = self.eval(body, vals);
                    a.imp(a.top(), b)
                } else {
                    let saved = vals[level];
                    let mut acc = a.top();
                    for x in a.elems() {
                        vals[level] = x;
                        let b = self.eval(body, vals);
                        acc = a.lattice().meet2(acc, a.imp(x, b));
                    }
                    vals[level] = saved;
                    acc
                }
            }
        };
        if let Some(k) = key {
            if self.memo.len() < MEMO_CAP {
                self.memo.insert(k, v);
            }
        }
        v
    }
}

/// Interprets a closed term (free variables resolved through `env`).
pub fn interp(t: &Term, env: &Env, a: &ImplicativeStructure) -> Result<Elem> {
    let mut c = Compiled::new(a);
    let root = c.compile(t, &mut Vec::new(), 0, env)?;
    let mut ev = Evaluator { c: &c, memo: HashMap::new() };
    Ok(ev.eval(root, &mut Vec::new()))
}

/// Parses and interprets in one step.
pub fn interp_str(text: &str, env: &Env, a: &ImplicativeStructure) -> Result<Elem> {
    interp(&parse(text)?, env, a)
}

/// Value of a named combinator.
pub fn combinator(c: Combinator, a: &ImplicativeStructure) -> Elem {
    interp(&Term::Const(c), &Env::new(), a).expect("combinators are closed")
}

/// Interprets `body` as a function of `x`, at every element of the carrier.
pub fn graph(x: &str, body: &Term, env: &Env, a: &ImplicativeStructure) -> Result<Vec<Elem>> {
    a.elems().map(|v| interp(body, &env.clone().with(x, v), a)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BetaCase {
    pub argument: String,
    pub applied: String,
    pub substituted: String,
    pub holds: bool,
}

/// Outcome of checking `(lam x . b) s <= b[x := s]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BetaReport {
    /// The check for the supplied argument term.
    pub supplied: BetaCase,
    /// The same check with the argument ranging over the carrier.
    pub carrier: Vec<BetaCase>,
}

impl BetaReport {
    pub fn holds(&self) -> bool {
        self.supplied.holds && self.carrier.iter().all(|c| c.holds)
    }
}

/// Checks the beta inequality for a single-binder head of `t`.
///
/// `t` must be a λ-abstraction or a combinator; a multi-binder λ is
/// peeled one binder at a time.
pub fn beta_soundness_check(t: &Term, s: &Term, env: &Env, a: &ImplicativeStructure) -> Result<BetaReport> {
    let t = t.desugar();
    let (binder, body) = match &t {
        Term::Lam(bs, body) => {
            let rest = if bs.len() > 1 { Term::Lam(bs[1..].to_vec(), body.clone()) } else { (**body).clone() };
            (bs[0].clone(), rest)
        }
        Term::Const(c) => return beta_soundness_check(&parse(c.definition())?, s, env, a),
        _ => return Err(Error::Invalid(format!("`{t}` is not an abstraction"))),
    };
    let fresh = "__beta_arg";
    let body = match &binder {
        Binder::Named(x) => body.subst(x, &Term::Var(fresh.into())),
        Binder::Dummy => body,
    };
    let tv = interp(&t, env, a)?;
    let case = |arg: Elem, label: String| -> Result<BetaCase> {
        let lhs = a.app(tv, arg);
        let rhs = interp(&body, &env.clone().with(fresh, arg), a)?;
        Ok(BetaCase {
            argument: label,
            applied: a.name(lhs).into(),
            substituted: a.name(rhs).into(),
            holds: a.leq(lhs, rhs),
        })
    };
    let sv = interp(s, env, a)?;
    let supplied = case(sv, s.to_string())?;
    let carrier = a.elems().map(|x| case(x, format!("#{}", a.name(x)))).collect::<Result<_>>()?;
    Ok(BetaReport { supplied, carrier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::Lattice;

    fn b2() -> ImplicativeStructure {
        ImplicativeStructure::derive_heyting(Lattice::chain(&["0", "1"]).unwrap()).unwrap()
    }

    fn h3() -> ImplicativeStructure {
        ImplicativeStructure::derive_heyting(Lattice::chain(&["0", "h", "1"]).unwrap()).unwrap()
    }

    // Direct meet over the carrier, independent of the compiler.
    fn lam1(a: &ImplicativeStructure, f: impl Fn(Elem) -> Elem) -> Elem {
        a.meet_iter(a.elems().map(|x| a.imp(x, f(x))))
    }

    #[test]
    fn combinators_in_b2() {
        let a = b2();
        let one = a.elem("1").unwrap();
        assert_eq!(combinator(Combinator::I, &a), one);
        assert_eq!(combinator(Combinator::K, &a), one);
        assert_eq!(combinator(Combinator::S, &a), one);
        assert_eq!(interp_str("lam z . z", &Env::new(), &a).unwrap(), one);
    }

    #[test]
    fn matches_direct_meets() {
        for a in [b2(), h3()] {
            let i = lam1(&a, |x| x);
            assert_eq!(combinator(Combinator::I, &a), i);
            let k = lam1(&a, |x| lam1(&a, |_| x));
            assert_eq!(combinator(Combinator::K, &a), k);
            for u in a.elems() {
                let expect = lam1(&a, |z| a.app(z, u));
                let env = Env::new().with("u", u);
                assert_eq!(interp_str("lam z . z u", &env, &a).unwrap(), expect);
                let pair = lam1(&a, |z| a.app(a.app(z, u), u));
                assert_eq!(interp_str("<u, u>", &env, &a).unwrap(), pair);
            }
        }
    }

    #[test]
    fn let_is_transparent() {
        let a = h3();
        let t = parse("let t = lam p . p I in lam q . t q").unwrap();
        assert_eq!(interp(&t, &Env::new(), &a).unwrap(), interp(&t.desugar(), &Env::new(), &a).unwrap());
    }

    #[test]
    fn unbound_and_unknown() {
        let a = b2();
        assert_eq!(interp_str("lam x . y", &Env::new(), &a), Err(Error::UnboundVariable("y".into())));
        assert!(matches!(interp_str("#q", &Env::new(), &a), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn beta_examples() {
        let a = b2();
        let r = beta_soundness_check(&parse("lam x . x").unwrap(), &parse("#1").unwrap(), &Env::new(), &a).unwrap();
        assert!(r.holds());
        assert_eq!(r.supplied.applied, "1");
        let r = beta_soundness_check(&parse("lam x . #0").unwrap(), &parse("#1").unwrap(), &Env::new(), &a).unwrap();
        assert!(r.holds());
        assert_eq!(r.supplied.applied, "0");
        let a = h3();
        let r = beta_soundness_check(&parse("K").unwrap(), &parse("#1").unwrap(), &Env::new(), &a).unwrap();
        assert!(r.holds());
        let rhs = interp_str("lam y . #1", &Env::new(), &a).unwrap();
        assert!(a.leq(a.app(combinator(Combinator::K, &a), a.top()), rhs));
    }

    #[test]
    fn duplicate_binding_rejected() {
        let mut env = Env::new();
        env.bind("x", Elem(0)).unwrap();
        assert!(env.bind("x", Elem(1)).is_err());
    }
}
