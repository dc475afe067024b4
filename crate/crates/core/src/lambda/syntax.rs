use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

/// Named combinators with a fixed defining term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Combinator {
    I,
    K,
    S,
    Pi0,
    Pi1,
    Pi2,
}

impl Combinator {
    pub const ALL: [Combinator; 6] =
        [Combinator::I, Combinator::K, Combinator::S, Combinator::Pi0, Combinator::Pi1, Combinator::Pi2];

    pub fn keyword(self) -> &'static str {
        match self {
            Combinator::I => "I",
            Combinator::K => "K",
            Combinator::S => "S",
            Combinator::Pi0 => "pi0",
            Combinator::Pi1 => "pi1",
            Combinator::Pi2 => "pi2",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Combinator> {
        Combinator::ALL.into_iter().find(|c| c.keyword() == s)
    }

    /// The defining term. Projections act on right-nested encoded pairs
    /// `a /\ (b /\ c)`.
    pub fn definition(self) -> &'static str {
        match self {
            Combinator::I => "lam x . x",
            Combinator::K => "lam x y . x",
            Combinator::S => "lam x y z . x z (y z)",
            Combinator::Pi0 => "lam p . p (lam x y . x)",
            Combinator::Pi1 => "lam p . p (lam x y . y (lam u v . u))",
            Combinator::Pi2 => "lam p . p (lam x y . y (lam u v . v))",
        }
    }
}

/// A λ-binder; `_` binds a name that is never referenced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Binder {
    Named(String),
    Dummy,
}

impl Binder {
    pub fn named(s: &str) -> Binder {
        Binder::Named(s.to_string())
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Binder::Named(s) => Some(s),
            Binder::Dummy => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Term {
    Var(String),
    Lam(Vec<Binder>, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// The encoded meet `t /\ u`, not the lattice meet.
    MeetPair(Box<Term>, Box<Term>),
    LetIn(String, Box<Term>, Box<Term>),
    Const(Combinator),
    /// `<t, u>`, read as `lam z . z t u`.
    Pair(Box<Term>, Box<Term>),
    /// `#name`, an algebra element.
    Quote(String),
}

pub fn var(s: &str) -> Term {
    Term::Var(s.to_string())
}

pub fn lam(binders: &[&str], body: Term) -> Term {
    let bs = binders.iter().map(|b| if *b == "_" { Binder::Dummy } else { Binder::named(b) }).collect();
    Term::Lam(bs, Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn meet(a: Term, b: Term) -> Term {
    Term::MeetPair(Box::new(a), Box::new(b))
}

pub fn quote(s: &str) -> Term {
    Term::Quote(s.to_string())
}

impl Term {
    /// Free variables, excluding quotes and combinators.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Term::Lam(bs, body) => {
                let k = bound.len();
                bound.extend(bs.iter().filter_map(|b| b.name().map(String::from)));
                body.collect_free(bound, out);
                bound.truncate(k);
            }
            Term::App(a, b) | Term::MeetPair(a, b) | Term::Pair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::LetIn(x, t, u) => {
                t.collect_free(bound, out);
                bound.push(x.clone());
                u.collect_free(bound, out);
                bound.pop();
            }
            Term::Const(_) | Term::Quote(_) => {}
        }
    }

    fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Lam(bs, body) => {
                out.extend(bs.iter().filter_map(|b| b.name().map(String::from)));
                body.all_names(out);
            }
            Term::App(a, b) | Term::MeetPair(a, b) | Term::Pair(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Term::LetIn(x, t, u) => {
                out.insert(x.clone());
                t.all_names(out);
                u.all_names(out);
            }
            Term::Const(_) | Term::Quote(_) => {}
        }
    }

    /// Capture-avoiding substitution of `s` for the free variable `x`.
    pub fn subst(&self, x: &str, s: &Term) -> Term {
        let fv = s.free_vars();
        self.subst_inner(x, s, &fv)
    }

    fn subst_inner(&self, x: &str, s: &Term, fv: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(y) if y == x => s.clone(),
            Term::Var(_) | Term::Const(_) | Term::Quote(_) => self.clone(),
            Term::App(a, b) => app(a.subst_inner(x, s, fv), b.subst_inner(x, s, fv)),
            Term::MeetPair(a, b) => meet(a.subst_inner(x, s, fv), b.subst_inner(x, s, fv)),
            Term::Pair(a, b) => Term::Pair(Box::new(a.subst_inner(x, s, fv)), Box::new(b.subst_inner(x, s, fv))),
            Term::LetIn(y, t, u) => {
                let t2 = t.subst_inner(x, s, fv);
                if y == x {
                    return Term::LetIn(y.clone(), Box::new(t2), u.clone());
                }
                let (y2, u2) = self.freshen(y, u, fv, s);
                Term::LetIn(y2, Box::new(t2), Box::new(u2.subst_inner(x, s, fv)))
            }
            Term::Lam(bs, body) => {
                if bs.iter().any(|b| b.name() == Some(x)) {
                    return self.clone();
                }
                let mut body = (**body).clone();
                let mut new_bs = Vec::with_capacity(bs.len());
                for b in bs {
                    match b {
                        Binder::Named(y) if fv.contains(y) => {
                            let (y2, b2) = self.freshen(y, &body, fv, s);
                            body = b2;
                            new_bs.push(Binder::Named(y2));
                        }
                        _ => new_bs.push(b.clone()),
                    }
                }
                Term::Lam(new_bs, Box::new(body.subst_inner(x, s, fv)))
            }
        }
    }

    // Renames binder `y` in `body` when it would capture a free variable of `s`.
    fn freshen(&self, y: &str, body: &Term, fv: &BTreeSet<String>, s: &Term) -> (String, Term) {
        if !fv.contains(y) {
            return (y.to_string(), body.clone());
        }
        let mut taken = BTreeSet::new();
        self.all_names(&mut taken);
        s.all_names(&mut taken);
        let fresh = (1..).map(|i| format!("{y}{i}")).find(|c| !taken.contains(c)).unwrap();
        (fresh.clone(), body.subst(y, &Term::Var(fresh)))
    }

    /// Expands every `let` by substitution.
    pub fn desugar(&self) -> Term {
        match self {
            Term::LetIn(x, t, u) => u.desugar().subst(x, &t.desugar()),
            Term::Lam(bs, body) => Term::Lam(bs.clone(), Box::new(body.desugar())),
            Term::App(a, b) => app(a.desugar(), b.desugar()),
            Term::MeetPair(a, b) => meet(a.desugar(), b.desugar()),
            Term::Pair(a, b) => Term::Pair(Box::new(a.desugar()), Box::new(b.desugar())),
            Term::Var(_) | Term::Const(_) | Term::Quote(_) => self.clone(),
        }
    }
}

// Printing levels: 0 = term (lam, let), 1 = meet, 2 = application, 3 = atom.
impl Term {
    fn level(&self) -> u8 {
        match self {
            Term::Lam(..) | Term::LetIn(..) => 0,
            Term::MeetPair(..) => 1,
            Term::App(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
        if self.level() < need {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Quote(x) => write!(f, "#{x}"),
            Term::Const(c) => write!(f, "{}", c.keyword()),
            Term::Lam(bs, body) => {
                write!(f, "lam")?;
                for b in bs {
                    write!(f, " {}", b.name().unwrap_or("_"))?;
                }
                write!(f, " . ")?;
                body.fmt_at(f, 0)
            }
            Term::LetIn(x, t, u) => {
                write!(f, "let {x} = ")?;
                t.fmt_at(f, 0)?;
                write!(f, " in ")?;
                u.fmt_at(f, 0)
            }
            Term::MeetPair(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " /\\ ")?;
                b.fmt_at(f, 1)
            }
            Term::App(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " ")?;
                b.fmt_at(f, 3)
            }
            Term::Pair(a, b) => {
                write!(f, "<")?;
                a.fmt_at(f, 0)?;
                write!(f, ", ")?;
                b.fmt_at(f, 0)?;
                write!(f, ">")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
