//! Belief formulas and the closed-world belief base.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::names::Atom;

/// Propositional formula over belief atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BeliefFormula {
    True,
    Atom(Atom),
    Not(Box<BeliefFormula>),
    And(Box<BeliefFormula>, Box<BeliefFormula>),
    Or(Box<BeliefFormula>, Box<BeliefFormula>),
}

impl BeliefFormula {
    pub fn atom(name: impl Into<Atom>) -> Self {
        BeliefFormula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: BeliefFormula) -> Self {
        BeliefFormula::Not(Box::new(inner))
    }

    pub fn and(lhs: BeliefFormula, rhs: BeliefFormula) -> Self {
        BeliefFormula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: BeliefFormula, rhs: BeliefFormula) -> Self {
        BeliefFormula::Or(Box::new(lhs), Box::new(rhs))
    }

    /// Every atom mentioned in the formula.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            BeliefFormula::True => {}
            BeliefFormula::Atom(a) => {
                out.insert(a.clone());
            }
            BeliefFormula::Not(f) => f.collect_atoms(out),
            BeliefFormula::And(l, r) | BeliefFormula::Or(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BeliefFormula::Or(..) => 1,
            BeliefFormula::And(..) => 2,
            BeliefFormula::Not(_) => 3,
            BeliefFormula::True | BeliefFormula::Atom(_) => 4,
        }
    }

    fn fmt_child(&self, child: &BeliefFormula, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

/// Surface syntax: `~`, `&`, `|`, `true`. Binary operators are left associative,
/// so a right operand of equal precedence is parenthesised.
impl fmt::Display for BeliefFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeliefFormula::True => f.write_str("true"),
            BeliefFormula::Atom(a) => write!(f, "{a}"),
            BeliefFormula::Not(inner) => {
                f.write_str("~")?;
                self.fmt_child(inner, 3, f)
            }
            BeliefFormula::And(l, r) => {
                self.fmt_child(l, 2, f)?;
                f.write_str(" & ")?;
                self.fmt_child(r, 3, f)
            }
            BeliefFormula::Or(l, r) => {
                self.fmt_child(l, 1, f)?;
                f.write_str(" | ")?;
                self.fmt_child(r, 2, f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atoms {0:?} are both added and deleted by the same effect")]
pub struct EffectConflict(pub Vec<Atom>);

/// A finite set of believed atoms. Anything not in the set is false.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeliefBase {
    atoms: BTreeSet<Atom>,
}

impl BeliefBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: &str) -> bool {
        self.atoms.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.atoms.insert(atom)
    }

    pub fn remove(&mut self, atom: &str) -> bool {
        self.atoms.remove(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    /// Closed-world evaluation of `formula` against this base.
    pub fn entails(&self, formula: &BeliefFormula) -> bool {
        match formula {
            BeliefFormula::True => true,
            BeliefFormula::Atom(a) => self.atoms.contains(a),
            BeliefFormula::Not(inner) => !self.entails(inner),
            BeliefFormula::And(l, r) => self.entails(l) && self.entails(r),
            BeliefFormula::Or(l, r) => self.entails(l) || self.entails(r),
        }
    }

    /// `(self \ dels) ∪ adds`. Fails if an atom is in both sets.
    pub fn apply_effects(
        &self,
        adds: &BTreeSet<Atom>,
        dels: &BTreeSet<Atom>,
    ) -> Result<BeliefBase, EffectConflict> {
        let clash: Vec<Atom> = adds.intersection(dels).cloned().collect();
        if !clash.is_empty() {
            return Err(EffectConflict(clash));
        }
        let mut atoms: BTreeSet<Atom> = self.atoms.difference(dels).cloned().collect();
        atoms.extend(adds.iter().cloned());
        Ok(BeliefBase { atoms })
    }

    /// `(self \ dels) ∪ adds` without the conflict check; adds win.
    pub(crate) fn update(&self, adds: &BTreeSet<Atom>, dels: &BTreeSet<Atom>) -> BeliefBase {
        let mut atoms: BTreeSet<Atom> = self.atoms.difference(dels).cloned().collect();
        atoms.extend(adds.iter().cloned());
        BeliefBase { atoms }
    }
}

impl FromIterator<Atom> for BeliefBase {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        BeliefBase {
            atoms: iter.into_iter().collect(),
        }
    }
}

impl<'a> FromIterator<&'a str> for BeliefBase {
    fn from_iter<T: IntoIterator<Item = &'a str>>(iter: T) -> Self {
        iter.into_iter().map(Atom::from).collect()
    }
}

/// Free-function form of [`BeliefBase::entails`].
pub fn entails(beliefs: &BeliefBase, formula: &BeliefFormula) -> bool {
    beliefs.entails(formula)
}

/// Free-function form of [`BeliefBase::apply_effects`].
pub fn apply_effects(
    beliefs: &BeliefBase,
    adds: &BTreeSet<Atom>,
    dels: &BTreeSet<Atom>,
) -> Result<BeliefBase, EffectConflict> {
    beliefs.apply_effects(adds, dels)
}
