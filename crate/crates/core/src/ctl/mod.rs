//! CTL model checking over explicit-state systems.
//!
//! Satisfaction sets are computed bottom-up: `EX` by pre-image, `EU` as a
//! least fixed point and `EG` as a greatest fixed point. Every universal
//! operator is reduced to the existential ones. The transition relation is
//! expected to be total.

mod parser;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::explorer::TransitionSystem;

pub use parser::{parse_ctl, CtlParseError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ctl {
    True,
    False,
    Label(String),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    Implies(Box<Ctl>, Box<Ctl>),
    EX(Box<Ctl>),
    AX(Box<Ctl>),
    EF(Box<Ctl>),
    AF(Box<Ctl>),
    EG(Box<Ctl>),
    AG(Box<Ctl>),
    EU(Box<Ctl>, Box<Ctl>),
    AU(Box<Ctl>, Box<Ctl>),
}

impl Ctl {
    pub fn label(name: impl Into<String>) -> Self {
        Ctl::Label(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Ctl) -> Self {
        Ctl::Not(Box::new(f))
    }

    pub fn and(a: Ctl, b: Ctl) -> Self {
        Ctl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ctl, b: Ctl) -> Self {
        Ctl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Ctl, b: Ctl) -> Self {
        Ctl::Implies(Box::new(a), Box::new(b))
    }

    /// Label names used anywhere in the formula.
    pub fn labels(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Ctl::True | Ctl::False => {}
            Ctl::Label(l) => {
                out.insert(l);
            }
            Ctl::Not(f) | Ctl::EX(f) | Ctl::AX(f) | Ctl::EF(f) | Ctl::AF(f) | Ctl::EG(f) | Ctl::AG(f) => {
                f.collect_labels(out)
            }
            Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) | Ctl::EU(a, b) | Ctl::AU(a, b) => {
                a.collect_labels(out);
                b.collect_labels(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Ctl::True | Ctl::False | Ctl::Label(_) => 0,
            Ctl::Not(f) | Ctl::EX(f) | Ctl::AX(f) | Ctl::EF(f) | Ctl::AF(f) | Ctl::EG(f) | Ctl::AG(f) => {
                1 + f.depth()
            }
            Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) | Ctl::EU(a, b) | Ctl::AU(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

/// Fully parenthesised; re-parses to the same tree.
impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctl::True => f.write_str("true"),
            Ctl::False => f.write_str("false"),
            Ctl::Label(l) => f.write_str(l),
            Ctl::Not(a) => write!(f, "!{a}"),
            Ctl::And(a, b) => write!(f, "({a} & {b})"),
            Ctl::Or(a, b) => write!(f, "({a} | {b})"),
            Ctl::Implies(a, b) => write!(f, "({a} -> {b})"),
            Ctl::EX(a) => write!(f, "EX {a}"),
            Ctl::AX(a) => write!(f, "AX {a}"),
            Ctl::EF(a) => write!(f, "EF {a}"),
            Ctl::AF(a) => write!(f, "AF {a}"),
            Ctl::EG(a) => write!(f, "EG {a}"),
            Ctl::AG(a) => write!(f, "AG {a}"),
            Ctl::EU(a, b) => write!(f, "E[{a} U {b}]"),
            Ctl::AU(a, b) => write!(f, "A[{a} U {b}]"),
        }
    }
}

/// A Kripke structure: successor lists and named state sets.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub successors: Vec<Vec<usize>>,
    pub labels: BTreeMap<String, BTreeSet<usize>>,
    pub initial: usize,
}

impl Model {
    pub fn len(&self) -> usize {
        self.successors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successors.is_empty()
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.len()];
        for (s, succs) in self.successors.iter().enumerate() {
            for &t in succs {
                pre[t].push(s);
            }
        }
        pre
    }
}

impl From<&TransitionSystem> for Model {
    fn from(ts: &TransitionSystem) -> Self {
        let mut labels: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        labels.insert("init".into(), BTreeSet::from([ts.initial()]));
        labels.insert("deadlock".into(), ts.deadlocks.clone());
        for (i, p) in ts.predicates.iter().enumerate() {
            labels.insert(p.to_string(), ts.sat(i));
        }
        Model {
            successors: ts.successors(),
            labels,
            initial: ts.initial(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub holds_at_initial: bool,
    pub satisfying: BTreeSet<usize>,
}

type Set = Vec<bool>;

struct Checker<'m> {
    model: &'m Model,
    pre: Vec<Vec<usize>>,
}

impl Checker<'_> {
    fn sat(&self, f: &Ctl) -> Result<Set, CheckError> {
        let n = self.model.len();
        Ok(match f {
            Ctl::True => vec![true; n],
            Ctl::False => vec![false; n],
            Ctl::Label(l) => {
                let states = self
                    .model
                    .labels
                    .get(l)
                    .ok_or_else(|| CheckError::UnknownLabel(l.clone()))?;
                (0..n).map(|s| states.contains(&s)).collect()
            }
            Ctl::Not(a) => self.sat(a)?.into_iter().map(|x| !x).collect(),
            Ctl::And(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| x && y),
            Ctl::Or(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| x || y),
            Ctl::Implies(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| !x || y),
            Ctl::EX(a) => self.ex(&self.sat(a)?),
            Ctl::AX(a) => negate(self.ex(&negate(self.sat(a)?))),
            Ctl::EF(a) => self.eu(&vec![true; n], &self.sat(a)?),
            Ctl::AF(a) => negate(self.eg(&negate(self.sat(a)?))),
            Ctl::EG(a) => self.eg(&self.sat(a)?),
            Ctl::AG(a) => negate(self.eu(&vec![true; n], &negate(self.sat(a)?))),
            Ctl::EU(a, b) => self.eu(&self.sat(a)?, &self.sat(b)?),
            Ctl::AU(a, b) => {
                // A[a U b] = !(E[!b U (!a & !b)] | EG !b)
                let (a, b) = (self.sat(a)?, self.sat(b)?);
                let not_b = negate(b);
                let stuck = zip(negate(a), not_b.clone(), |x, y| x && y);
                let bad = zip(self.eu(&not_b, &stuck), self.eg(&not_b), |x, y| x || y);
                negate(bad)
            }
        })
    }

    fn ex(&self, target: &Set) -> Set {
        self.model
            .successors
            .iter()
            .map(|succs| succs.iter().any(|&t| target[t]))
            .collect()
    }

    /// Least fixed point of `Z = b ∪ (a ∩ EX Z)`, by backward search from `b`.
    fn eu(&self, a: &Set, b: &Set) -> Set {
        let mut z = b.clone();
        let mut queue: VecDeque<usize> = (0..z.len()).filter(|&s| z[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &self.pre[t] {
                if !z[s] && a[s] {
                    z[s] = true;
                    queue.push_back(s);
                }
            }
        }
        z
    }

    /// Greatest fixed point of `Z = a ∩ EX Z`: prune states with no successor left in `Z`.
    fn eg(&self, a: &Set) -> Set {
        let mut z = a.clone();
        let mut count: Vec<usize> = self
            .model
            .successors
            .iter()
            .map(|succs| succs.iter().filter(|&&t| z[t]).count())
            .collect();
        let mut queue: VecDeque<usize> = (0..z.len()).filter(|&s| z[s] && count[s] == 0).collect();
        while let Some(t) = queue.pop_front() {
            if !z[t] {
                continue;
            }
            z[t] = false;
            for &s in &self.pre[t] {
                count[s] -= 1;
                if z[s] && count[s] == 0 {
                    queue.push_back(s);
                }
            }
        }
        z
    }
}

fn negate(s: Set) -> Set {
    s.into_iter().map(|x| !x).collect()
}

fn zip(a: Set, b: Set, f: impl Fn(bool, bool) -> bool) -> Set {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

fn to_set(s: &Set) -> BTreeSet<usize> {
    s.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i).collect()
}

pub fn check(model: &Model, formula: &Ctl) -> Result<CheckResult, CheckError> {
    let checker = Checker {
        model,
        pre: model.predecessors(),
    };
    let sat = checker.sat(formula)?;
    Ok(CheckResult {
        holds_at_initial: sat.get(model.initial).copied().unwrap_or(false),
        satisfying: to_set(&sat),
    })
}

/// Counterexample path from the initial state for a failing `AG`, `AF` or
/// `AG(p -> AF q)`. Lasso-shaped paths end by revisiting a state already on
/// the path. Returns `None` for other shapes or when the formula holds.
pub fn witness(model: &Model, formula: &Ctl) -> Result<Option<Vec<usize>>, CheckError> {
    let checker = Checker {
        model,
        pre: model.predecessors(),
    };
    let start = model.initial;
    match formula {
        Ctl::AG(inner) => {
            let good = checker.sat(inner)?;
            let Some(mut path) = shortest_path(model, start, |s| !good[s]) else {
                return Ok(None);
            };
            let last = *path.last().expect("non-empty");
            let eventually = match &**inner {
                Ctl::AF(q) => Some(q),
                Ctl::Implies(_, r) => match &**r {
                    Ctl::AF(q) => Some(q),
                    _ => None,
                },
                _ => None,
            };
            if let Some(q) = eventually {
                let avoid = checker.eg(&negate(checker.sat(q)?));
                path.extend(lasso(model, last, &avoid).into_iter().skip(1));
            }
            Ok(Some(path))
        }
        Ctl::AF(inner) => {
            let avoid = checker.eg(&negate(checker.sat(inner)?));
            if !avoid[start] {
                return Ok(None);
            }
            Ok(Some(lasso(model, start, &avoid)))
        }
        _ => Ok(None),
    }
}

fn shortest_path(model: &Model, start: usize, target: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; model.len()];
    let mut queue = VecDeque::from([start]);
    parent[start] = start;
    while let Some(s) = queue.pop_front() {
        if target(s) {
            let mut path = vec![s];
            let mut cur = s;
            while cur != start {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &t in &model.successors[s] {
            if parent[t] == usize::MAX {
                parent[t] = s;
                queue.push_back(t);
            }
        }
    }
    None
}

/// Walks inside `region` (an `EG` set containing `start`) until a state repeats.
fn lasso(model: &Model, start: usize, region: &Set) -> Vec<usize> {
    let mut path = vec![start];
    let mut seen = BTreeSet::from([start]);
    let mut cur = start;
    while let Some(&next) = model.successors[cur].iter().find(|&&t| region[t]) {
        path.push(next);
        if !seen.insert(next) {
            break;
        }
        cur = next;
    }
    path
}

/// A named property from a property file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub formula: Ctl,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct PropertyFileError {
    pub line: usize,
    pub message: String,
}

/// Parses `name: formula` lines. Blank lines and `//` comments are skipped.
pub fn parse_properties(source: &str) -> Result<Vec<Property>, PropertyFileError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let err = |message: String| PropertyFileError { line: i + 1, message };
        let (name, formula) = line
            .split_once(':')
            .ok_or_else(|| err("expected `name: formula`".into()))?;
        let name = name.trim();
        if !crate::names::is_identifier(name) {
            return Err(err(format!("`{name}` is not a valid property name")));
        }
        let formula = parse_ctl(formula).map_err(|e| err(e.to_string()))?;
        out.push(Property {
            name: name.to_owned(),
            formula,
        });
    }
    Ok(out)
}
