use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::lexer::{tokenize, Pos, Spanned, Tok};
use super::{
    ActionDecl, AgentError, BodyExpr, CompiledAgent, ExternalEvent, MotivationDecl, PlanDecl,
    ValidationError,
};
use crate::belief::BeliefFormula;
use crate::names::{Atom, Identifier};

const KEYWORDS: &[&str] = &[
    "belief",
    "assert-not",
    "event",
    "motivation",
    "plan",
    "action",
    "true",
    "nil",
    "goal",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {}, found {found}", join_expected(.expected))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

fn join_expected(expected: &[String]) -> String {
    match expected {
        [] => "nothing".to_owned(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} or {}", init.join(", "), last),
    }
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Parser {
            toks: tokenize(src),
            at: 0,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let pos = self.pos();
        ParseError {
            line: pos.line,
            col: pos.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: match self.peek() {
                Tok::Ident(w) if KEYWORDS.contains(&w.as_str()) => format!("keyword `{w}`"),
                other => other.to_string(),
            },
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&tok.to_string()]))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn program(&mut self) -> Result<CompiledAgent, AgentError> {
        let mut agent = CompiledAgent::default();
        loop {
            let kw = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(w) => w.clone(),
                _ => return Err(self.statement_error().into()),
            };
            match kw.as_str() {
                "belief" => {
                    self.bump();
                    let atom = self.name()?;
                    agent.initial_beliefs.insert(Atom::new(atom));
                }
                "assert-not" => {
                    self.bump();
                    let atom = self.name()?;
                    agent.negative_assertions.insert(Atom::new(atom));
                }
                "event" => {
                    self.bump();
                    let event = self.name()?;
                    let identifier = self.identifier()?;
                    agent.external_events.push(ExternalEvent {
                        event: event.into(),
                        identifier,
                    });
                }
                "motivation" => {
                    self.bump();
                    let condition = self.formula()?;
                    self.expect(Tok::Leads)?;
                    let event = self.name()?;
                    let identifier = self.identifier()?;
                    agent.motivations.push(MotivationDecl {
                        condition,
                        event: event.into(),
                        identifier,
                    });
                }
                "plan" => {
                    self.bump();
                    let event = self.name()?;
                    self.expect(Tok::Colon)?;
                    let context = self.formula()?;
                    self.expect(Tok::Arrow)?;
                    let body = self.body()?;
                    agent.plans.push(PlanDecl {
                        event: event.into(),
                        context,
                        body,
                    });
                }
                "action" => {
                    self.bump();
                    let decl = self.action()?;
                    if agent.actions.contains_key(&decl.name) {
                        return Err(ValidationError::DuplicateAction(decl.name).into());
                    }
                    agent.actions.insert(decl.name.clone(), decl);
                }
                _ => return Err(self.statement_error().into()),
            }
            self.expect(Tok::Dot)?;
        }
        Ok(agent)
    }

    fn statement_error(&self) -> ParseError {
        self.error(&[
            "`belief`",
            "`assert-not`",
            "`event`",
            "`motivation`",
            "`plan`",
            "`action`",
        ])
    }

    fn identifier(&mut self) -> PResult<Identifier> {
        self.expect(Tok::LBracket)?;
        let id = self.name()?;
        self.expect(Tok::RBracket)?;
        Ok(Identifier::new(id))
    }

    fn action(&mut self) -> PResult<ActionDecl> {
        let name = self.name()?;
        self.expect(Tok::Colon)?;
        let pre = self.formula()?;
        self.expect(Tok::Arrow)?;
        let mut adds = BTreeSet::new();
        let mut dels = BTreeSet::new();
        if *self.peek() == Tok::Plus {
            self.bump();
            adds = self.atom_set()?;
        }
        if *self.peek() == Tok::Minus {
            self.bump();
            dels = self.atom_set()?;
        }
        Ok(ActionDecl {
            name: name.into(),
            pre,
            adds,
            dels,
        })
    }

    fn atom_set(&mut self) -> PResult<BTreeSet<Atom>> {
        self.expect(Tok::LBrace)?;
        let mut out = BTreeSet::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(out);
        }
        loop {
            out.insert(Atom::new(self.name()?));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrace => {
                    self.bump();
                    return Ok(out);
                }
                _ => return Err(self.error(&["`,`", "`}`"])),
            }
        }
    }

    fn formula(&mut self) -> PResult<BeliefFormula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = BeliefFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<BeliefFormula> {
        let mut lhs = self.literal()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.literal()?;
            lhs = BeliefFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn literal(&mut self) -> PResult<BeliefFormula> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(BeliefFormula::not(self.literal()?))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(w) if w == "true" => {
                self.bump();
                Ok(BeliefFormula::True)
            }
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(BeliefFormula::atom(w))
            }
            _ => Err(self.error(&["atom", "`true`", "`~`", "`(`"])),
        }
    }

    fn body(&mut self) -> PResult<BodyExpr> {
        let lhs = self.sequence()?;
        if *self.peek() == Tok::BarBar {
            self.bump();
            let rhs = self.body()?;
            return Ok(BodyExpr::par(lhs, rhs));
        }
        Ok(lhs)
    }

    fn sequence(&mut self) -> PResult<BodyExpr> {
        let lhs = self.step()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            let rhs = self.sequence()?;
            return Ok(BodyExpr::seq(lhs, rhs));
        }
        Ok(lhs)
    }

    fn step(&mut self) -> PResult<BodyExpr> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(BodyExpr::Post(self.name()?.into()))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.body()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(w) if w == "nil" => {
                self.bump();
                Ok(BodyExpr::Nil)
            }
            Tok::Ident(w) if w == "goal" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let success = self.formula()?;
                self.expect(Tok::Comma)?;
                let event = self.name()?;
                self.expect(Tok::Comma)?;
                let failure = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(BodyExpr::Goal {
                    success,
                    event: event.into(),
                    failure,
                })
            }
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(BodyExpr::Act(w.into()))
            }
            _ => Err(self.error(&["action", "`!`", "`nil`", "`goal`", "`(`"])),
        }
    }
}

pub(crate) fn parse(src: &str) -> Result<CompiledAgent, AgentError> {
    Parser::new(src).program()
}

pub(crate) fn parse_formula(src: &str) -> Result<BeliefFormula, ParseError> {
    let mut p = Parser::new(src);
    let f = p.formula()?;
    p.expect(Tok::Eof)?;
    Ok(f)
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}
