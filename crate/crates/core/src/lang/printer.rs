use std::fmt::{self, Write};

use super::{BodyExpr, CompiledAgent};

/// Renders an agent back to `.can` source. Re-parsing the output yields an
/// agent equal to the input.
pub fn pretty_print(agent: &CompiledAgent) -> String {
    let mut out = String::new();
    for atom in &agent.initial_beliefs {
        let _ = writeln!(out, "belief {atom}.");
    }
    for atom in &agent.negative_assertions {
        let _ = writeln!(out, "assert-not {atom}.");
    }
    for ev in &agent.external_events {
        let _ = writeln!(out, "event {} [{}].", ev.event, ev.identifier);
    }
    for m in &agent.motivations {
        let _ = writeln!(out, "motivation {} ~> {} [{}].", m.condition, m.event, m.identifier);
    }
    for a in agent.actions.values() {
        let adds: Vec<&str> = a.adds.iter().map(|x| x.as_str()).collect();
        let dels: Vec<&str> = a.dels.iter().map(|x| x.as_str()).collect();
        let _ = writeln!(
            out,
            "action {} : {} <- +{{{}}} -{{{}}}.",
            a.name,
            a.pre,
            adds.join(", "),
            dels.join(", ")
        );
    }
    for p in &agent.plans {
        let _ = writeln!(out, "plan {} : {} <- {}.", p.event, p.context, p.body);
    }
    out
}

impl BodyExpr {
    fn precedence(&self) -> u8 {
        match self {
            BodyExpr::Par(..) => 1,
            BodyExpr::Seq(..) => 2,
            _ => 3,
        }
    }

    fn fmt_child(child: &BodyExpr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for BodyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyExpr::Nil => f.write_str("nil"),
            BodyExpr::Act(a) => write!(f, "{a}"),
            BodyExpr::Post(e) => write!(f, "!{e}"),
            BodyExpr::Goal {
                success,
                event,
                failure,
            } => write!(f, "goal({success}, {event}, {failure})"),
            BodyExpr::Seq(l, r) => {
                Self::fmt_child(l, 3, f)?;
                f.write_str("; ")?;
                Self::fmt_child(r, 2, f)
            }
            BodyExpr::Par(l, r) => {
                Self::fmt_child(l, 2, f)?;
                f.write_str(" || ")?;
                Self::fmt_child(r, 1, f)
            }
        }
    }
}
