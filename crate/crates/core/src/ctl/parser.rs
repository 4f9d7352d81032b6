use thiserror::Error;

use super::Ctl;
use crate::predicate::Predicate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct CtlParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Label(String),
    Kw(&'static str),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Not,
    And,
    Or,
    Implies,
    /// `=>` inside `A[...]`; also accepted as implication.
    Entails,
    Eof,
}

const KEYWORDS: &[&str] = &[
    "AG", "AF", "AX", "EG", "EF", "EX", "A", "E", "U", "G", "F", "X", "true", "false",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, CtlParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |column: usize, message: String| CtlParseError { column, message };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            '!' => (Tok::Not, 1),
            '&' => (Tok::And, 1),
            '|' => (Tok::Or, 1),
            _ if two == "->" => (Tok::Implies, 2),
            _ if two == "=>" => (Tok::Entails, 2),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                if let Some(kw) = KEYWORDS.iter().find(|k| **k == word) {
                    out.push((Tok::Kw(kw), col));
                    i = j;
                    continue;
                }
                // A call-style predicate: `name(...)` with an optional
                // `=status` or `>=fraction` suffix.
                if j < chars.len() && chars[j] == '(' {
                    let mut depth = 0usize;
                    loop {
                        if j >= chars.len() {
                            return Err(err(col, format!("unclosed `(` in `{word}(`")));
                        }
                        match chars[j] {
                            '(' => depth += 1,
                            ')' => {
                                depth -= 1;
                                if depth == 0 {
                                    j += 1;
                                    break;
                                }
                            }
                            _ => {}
                        }
                        j += 1;
                    }
                    let suffix_start = if chars.get(j) == Some(&'=') && chars.get(j + 1) != Some(&'>') {
                        Some(j + 1)
                    } else if chars.get(j) == Some(&'>') && chars.get(j + 1) == Some(&'=') {
                        Some(j + 2)
                    } else {
                        None
                    };
                    if let Some(mut k) = suffix_start {
                        while k < chars.len()
                            && (chars[k].is_ascii_alphanumeric() || matches!(chars[k], '_' | '/' | '.'))
                        {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let raw: String = chars[start..j].iter().collect();
                out.push((Tok::Label(normalize(&raw)), col));
                i = j;
                continue;
            }
            other => return Err(err(col, format!("unexpected character `{other}`"))),
        };
        out.push((tok, col));
        i += len;
    }
    out.push((Tok::Eof, chars.len() + 1));
    Ok(out)
}

/// Predicate labels are stored in their printed form so spacing differences
/// in property files do not matter.
fn normalize(raw: &str) -> String {
    match raw.parse::<Predicate>() {
        Ok(p) => p.to_string(),
        Err(_) => raw.to_owned(),
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, CtlParseError> {
        let found = match self.peek() {
            Tok::Label(l) => format!("`{l}`"),
            Tok::Kw(k) => format!("`{k}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Entails => "`=>`".into(),
            Tok::Eof => "end of input".into(),
        };
        Err(CtlParseError {
            column: self.column(),
            message: format!("expected {expected}, found {found}"),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), CtlParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(what)
        }
    }

    fn implication(&mut self) -> Result<Ctl, CtlParseError> {
        let lhs = self.disjunction()?;
        if matches!(self.peek(), Tok::Implies | Tok::Entails) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Ctl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ctl, CtlParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Ctl::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Ctl, CtlParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Ctl::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ctl, CtlParseError> {
        match self.bump() {
            Tok::Not => Ok(Ctl::not(self.unary()?)),
            Tok::Kw("true") => Ok(Ctl::True),
            Tok::Kw("false") => Ok(Ctl::False),
            Tok::Kw("AG") => Ok(Ctl::AG(Box::new(self.unary()?))),
            Tok::Kw("AF") => Ok(Ctl::AF(Box::new(self.unary()?))),
            Tok::Kw("AX") => Ok(Ctl::AX(Box::new(self.unary()?))),
            Tok::Kw("EG") => Ok(Ctl::EG(Box::new(self.unary()?))),
            Tok::Kw("EF") => Ok(Ctl::EF(Box::new(self.unary()?))),
            Tok::Kw("EX") => Ok(Ctl::EX(Box::new(self.unary()?))),
            Tok::Kw(q @ ("A" | "E")) => self.bracketed(q == "A"),
            Tok::Label(l) => Ok(Ctl::Label(l)),
            Tok::LParen => {
                let f = self.implication()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                self.error("a formula")
            }
        }
    }

    /// `[G φ]`, `[F φ]`, `[X φ]`, `[φ U ψ]` or `[φ => F ψ]` after a path quantifier.
    fn bracketed(&mut self, universal: bool) -> Result<Ctl, CtlParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let f = if let Some(op) = self.path_operator() {
            let inner = self.implication()?;
            temporal(universal, op, inner)
        } else {
            let lhs = self.disjunction()?;
            match self.peek() {
                Tok::Kw("U") => {
                    self.bump();
                    let rhs = self.implication()?;
                    if universal {
                        Ctl::AU(Box::new(lhs), Box::new(rhs))
                    } else {
                        Ctl::EU(Box::new(lhs), Box::new(rhs))
                    }
                }
                Tok::Implies | Tok::Entails => {
                    self.bump();
                    let Some(op) = self.path_operator() else {
                        return self.error("`F`, `G` or `X`");
                    };
                    let rhs = self.implication()?;
                    // Along every path, whenever lhs holds the path property follows.
                    let body = Ctl::implies(lhs, temporal(universal, op, rhs));
                    if universal {
                        Ctl::AG(Box::new(body))
                    } else {
                        Ctl::EG(Box::new(body))
                    }
                }
                _ => return self.error("`U` or `=>`"),
            }
        };
        self.expect(Tok::RBracket, "`]`")?;
        Ok(f)
    }

    fn path_operator(&mut self) -> Option<char> {
        let op = match self.peek() {
            Tok::Kw("G") => 'G',
            Tok::Kw("F") => 'F',
            Tok::Kw("X") => 'X',
            _ => return None,
        };
        self.bump();
        Some(op)
    }
}

fn temporal(universal: bool, op: char, f: Ctl) -> Ctl {
    let f = Box::new(f);
    match (universal, op) {
        (true, 'G') => Ctl::AG(f),
        (true, 'F') => Ctl::AF(f),
        (true, _) => Ctl::AX(f),
        (false, 'G') => Ctl::EG(f),
        (false, 'F') => Ctl::EF(f),
        (false, _) => Ctl::EX(f),
    }
}

pub fn parse_ctl(text: &str) -> Result<Ctl, CtlParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.implication()?;
    if *p.peek() != Tok::Eof {
        return p.error("end of formula");
    }
    Ok(f)
}
