use super::syntax::{Binder, Combinator, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quote(String),
    Lam,
    Let,
    In,
    Dot,
    Eq,
    Meet,
    LParen,
    RParen,
    LAngle,
    RAngle,
    Comma,
    Underscore,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, col, message: message.into() }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn is_quote_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '+' | '-' | '*')
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: l0, col: c0 });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '<' => push(Tok::LAngle, 1, &mut i, &mut col),
            '>' => push(Tok::RAngle, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            'λ' => push(Tok::Lam, 1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'\\') => push(Tok::Meet, 2, &mut i, &mut col),
            '#' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && is_quote_char(chars[j]) {
                    j += 1;
                }
                if j == start {
                    return Err(syntax(l0, c0, "expected an element name after `#`"));
                }
                let name: String = chars[start..j].iter().collect();
                push(Tok::Quote(name), j - i, &mut i, &mut col);
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "lam" => Tok::Lam,
                    "let" => Tok::Let,
                    "in" => Tok::In,
                    "_" => Tok::Underscore,
                    _ => Tok::Ident(word),
                };
                push(tok, j - i, &mut i, &mut col);
            }
            c => return Err(syntax(l0, c0, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let (l, c) = self.here();
            Err(syntax(l, c, format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek() {
            Tok::Lam => {
                self.bump();
                let mut binders = Vec::new();
                loop {
                    match self.bump() {
                        Tok::Ident(x) if Combinator::from_keyword(&x).is_none() => binders.push(Binder::Named(x)),
                        Tok::Underscore => binders.push(Binder::Dummy),
                        Tok::Dot if !binders.is_empty() => break,
                        t => {
                            self.pos -= usize::from(t != Tok::Eof);
                            let (l, c) = self.here();
                            return Err(syntax(l, c, format!("expected a binder or `.`, found {}", describe(&t))));
                        }
                    }
                }
                Ok(Term::Lam(binders, Box::new(self.term()?)))
            }
            Tok::Let => {
                self.bump();
                let (l, c) = self.here();
                let name = match self.bump() {
                    Tok::Ident(x) if Combinator::from_keyword(&x).is_none() => x,
                    t => return Err(syntax(l, c, format!("expected a name after `let`, found {}", describe(&t)))),
                };
                self.expect(Tok::Eq, "`=`")?;
                let bound = self.term()?;
                self.expect(Tok::In, "`in`")?;
                let body = self.term()?;
                Ok(Term::LetIn(name, Box::new(bound), Box::new(body)))
            }
            _ => self.meet(),
        }
    }

    fn meet(&mut self) -> Result<Term> {
        let left = self.application()?;
        if *self.peek() == Tok::Meet {
            self.bump();
            let right = match self.peek() {
                Tok::Lam | Tok::Let => self.term()?,
                _ => self.meet()?,
            };
            return Ok(Term::MeetPair(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn application(&mut self) -> Result<Term> {
        let mut t = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            t = Term::App(Box::new(t), Box::new(a));
        }
        Ok(t)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Quote(_) | Tok::LParen | Tok::LAngle)
    }

    fn atom(&mut self) -> Result<Term> {
        let (l, c) = self.here();
        match self.bump() {
            Tok::Ident(x) => Ok(match Combinator::from_keyword(&x) {
                Some(k) => Term::Const(k),
                None => Term::Var(x),
            }),
            Tok::Quote(x) => Ok(Term::Quote(x)),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::LAngle => {
                let a = self.term()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.term()?;
                self.expect(Tok::RAngle, "`>`")?;
                Ok(Term::Pair(Box::new(a), Box::new(b)))
            }
            t => Err(syntax(l, c, format!("expected a term, found {}", describe(&t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(x) => format!("`{x}`"),
        Tok::Quote(x) => format!("`#{x}`"),
        Tok::Lam => "`lam`".into(),
        Tok::Let => "`let`".into(),
        Tok::In => "`in`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Meet => "`/\\`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LAngle => "`<`".into(),
        Tok::RAngle => "`>`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Underscore => "`_`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a tracker term.
pub fn parse(text: &str) -> Result<Term> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        let (l, c) = p.here();
        return Err(syntax(l, c, format!("unexpected {}", describe(p.peek()))));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::syntax::{app, lam, meet, var};

    #[test]
    fn basic_shapes() {
        assert_eq!(parse("lam z . z u").unwrap(), lam(&["z"], app(var("z"), var("u"))));
        assert_eq!(
            parse("lam u v w . u /\\ v /\\ w").unwrap(),
            lam(&["u", "v", "w"], meet(var("u"), meet(var("v"), var("w"))))
        );
        assert_eq!(parse("f a b").unwrap(), app(app(var("f"), var("a")), var("b")));
        assert_eq!(parse("lam _ x . x").unwrap(), lam(&["_", "x"], var("x")));
        assert_eq!(parse("pi2 #h").unwrap(), app(Term::Const(Combinator::Pi2), Term::Quote("h".into())));
        assert_eq!(parse("λx.x").unwrap(), lam(&["x"], var("x")));
    }

    #[test]
    fn meet_binds_looser_than_application() {
        assert_eq!(parse("f a /\\ g b").unwrap(), meet(app(var("f"), var("a")), app(var("g"), var("b"))));
    }

    #[test]
    fn let_desugars_by_substitution() {
        let t = parse("let t = lam p . p I in lam q . t q").unwrap();
        let expect = lam(&["q"], app(lam(&["p"], app(var("p"), Term::Const(Combinator::I))), var("q")));
        assert_eq!(t.desugar(), expect);
    }

    #[test]
    fn errors_carry_positions() {
        match parse("lam x .\n  (x") {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 5)),
            other => panic!("unexpected {other:?}"),
        }
        match parse("lam . x") {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 5)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("x $ y").is_err());
        assert!(parse("<x y>").is_err());
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "lam z . z u",
            "lam u v w . u /\\ v /\\ (lam z . z (xi (w I)))",
            "(a /\\ b) /\\ c",
            "let t = lam p . p I in lam q . t q",
            "<x, y /\\ z> (lam _ v . v)",
            "f (g h) #0",
        ] {
            let t = parse(src).unwrap();
            assert_eq!(parse(&t.to_string()).unwrap(), t, "{src}");
        }
    }
}
