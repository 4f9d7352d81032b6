//! Brute-force CTL semantics by path enumeration.
//!
//! On a total model with `n` states every path quantifier can be decided by
//! looking at all paths of `n + 1` states: such a prefix always repeats a
//! state, so a prefix avoiding something extends to an infinite path that
//! avoids it forever.

use canrt_core::{Ctl, Model};

fn paths(model: &Model, start: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![start]];
    while let Some(p) = stack.pop() {
        if p.len() == len {
            out.push(p);
            continue;
        }
        for &t in &model.successors[*p.last().unwrap()] {
            let mut q = p.clone();
            q.push(t);
            stack.push(q);
        }
    }
    out
}

fn until(path: &[usize], a: &[bool], b: &[bool]) -> bool {
    for &s in path {
        if b[s] {
            return true;
        }
        if !a[s] {
            return false;
        }
    }
    false
}

pub struct Oracle<'m> {
    model: &'m Model,
    /// `paths[s]`: every path of `n + 1` states starting at `s`.
    paths: Vec<Vec<Vec<usize>>>,
}

impl<'m> Oracle<'m> {
    pub fn new(model: &'m Model) -> Self {
        let n = model.successors.len();
        Oracle {
            model,
            paths: (0..n).map(|s| paths(model, s, n + 1)).collect(),
        }
    }

    /// Satisfaction vector of `f`, or `None` on an unknown label.
    pub fn sat(&self, f: &Ctl) -> Option<Vec<bool>> {
        sat(self.model, &self.paths, f)
    }
}

fn sat(model: &Model, paths: &[Vec<Vec<usize>>], f: &Ctl) -> Option<Vec<bool>> {
    let n = model.successors.len();
    let all = |g: &dyn Fn(usize) -> bool| (0..n).map(g).collect::<Vec<bool>>();
    Some(match f {
        Ctl::True => vec![true; n],
        Ctl::False => vec![false; n],
        Ctl::Label(l) => {
            let set = model.labels.get(l)?;
            all(&|s| set.contains(&s))
        }
        Ctl::Not(a) => sat(model, paths, a)?.iter().map(|x| !x).collect(),
        Ctl::And(a, b) => {
            let (a, b) = (sat(model, paths, a)?, sat(model, paths, b)?);
            all(&|s| a[s] && b[s])
        }
        Ctl::Or(a, b) => {
            let (a, b) = (sat(model, paths, a)?, sat(model, paths, b)?);
            all(&|s| a[s] || b[s])
        }
        Ctl::Implies(a, b) => {
            let (a, b) = (sat(model, paths, a)?, sat(model, paths, b)?);
            all(&|s| !a[s] || b[s])
        }
        Ctl::EX(a) => {
            let a = sat(model, paths, a)?;
            all(&|s| model.successors[s].iter().any(|&t| a[t]))
        }
        Ctl::AX(a) => {
            let a = sat(model, paths, a)?;
            all(&|s| model.successors[s].iter().all(|&t| a[t]))
        }
        Ctl::EF(a) => {
            let a = sat(model, paths, a)?;
            all(&|s| paths[s].iter().any(|p| p.iter().any(|&x| a[x])))
        }
        Ctl::AF(a) => {
            let a = sat(model, paths, a)?;
            all(&|s| paths[s].iter().all(|p| p.iter().any(|&x| a[x])))
        }
        Ctl::EG(a) => {
            let a = sat(model, paths, a)?;
            all(&|s| paths[s].iter().any(|p| p.iter().all(|&x| a[x])))
        }
        Ctl::AG(a) => {
            let a = sat(model, paths, a)?;
            all(&|s| paths[s].iter().all(|p| p.iter().all(|&x| a[x])))
        }
        Ctl::EU(a, b) => {
            let (a, b) = (sat(model, paths, a)?, sat(model, paths, b)?);
            all(&|s| paths[s].iter().any(|p| until(p, &a, &b)))
        }
        Ctl::AU(a, b) => {
            let (a, b) = (sat(model, paths, a)?, sat(model, paths, b)?);
            all(&|s| paths[s].iter().all(|p| until(p, &a, &b)))
        }
    })
}
