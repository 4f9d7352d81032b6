use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gen::{random_agent, AgentShape};

const UAV: &str = include_str!("../../agents/uav.can");

#[test]
fn uav_declarations() {
    let agent = parse_program(UAV).unwrap();
    assert_eq!(agent.external_events.len(), 1);
    assert_eq!(agent.motivations.len(), 1);
    assert_eq!(agent.plans.len(), 9);
    assert_eq!(agent.negative_assertions.len(), 2);
    assert_eq!(agent.actions.len(), 8);
    assert!(agent.initial_beliefs.is_empty());
    assert_eq!(agent.plans_for("e_retrv").collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    assert_eq!(agent.plan_ordinal(4), 5);
    assert_eq!(agent.plan_ordinal(5), 1);
    let m = &agent.motivations[0];
    assert_eq!(m.condition, BeliefFormula::atom("parked"));
    assert_eq!(m.event.as_str(), "e_parked");
    assert_eq!(m.identifier.as_str(), "identifier2");
}

#[test]
fn empty_program_is_empty_agent() {
    assert_eq!(parse_program("").unwrap(), CompiledAgent::default());
    assert_eq!(parse_program("// nothing\n\n").unwrap(), CompiledAgent::default());
}

#[test]
fn precedence_of_body_operators() {
    let agent = parse_program("event e [i].\nplan e : true <- a; b || c.\naction a : true <- +{} -{}.\naction b : true <- +{} -{}.\naction c : true <- +{} -{}.\n").unwrap();
    let expected = BodyExpr::par(
        BodyExpr::seq(BodyExpr::Act("a".into()), BodyExpr::Act("b".into())),
        BodyExpr::Act("c".into()),
    );
    assert_eq!(agent.plans[0].body, expected);
}

#[test]
fn formula_precedence() {
    let f = parse_formula("a | b & ~c").unwrap();
    assert_eq!(
        f,
        BeliefFormula::or(
            BeliefFormula::atom("a"),
            BeliefFormula::and(BeliefFormula::atom("b"), BeliefFormula::not(BeliefFormula::atom("c")))
        )
    );
}

#[test]
fn missing_terminator_reports_position() {
    let err = parse_program("event e [i].\nplan e : true <- a").unwrap_err();
    let AgentError::Parse(p) = err else { panic!("expected a parse error") };
    assert_eq!((p.line, p.col), (2, 19));
    assert!(p.to_string().contains("found end of input"), "{p}");
    assert!(p.render("uav.can").starts_with("uav.can:2:19: expected"));
}

#[test]
fn unknown_statement() {
    let err = parse_program("believe x.").unwrap_err();
    let AgentError::Parse(p) = err else { panic!() };
    assert_eq!((p.line, p.col), (1, 1));
    assert!(p.expected.contains(&"`belief`".to_string()));
}

#[test]
fn keywords_are_not_names() {
    assert!(parse_program("belief plan.").is_err());
    assert!(parse_program("event goal [i].").is_err());
}

#[test]
fn validation_errors() {
    type Case = (&'static str, fn(&ValidationError) -> bool);
    let cases: &[Case] = &[
        ("event e [i].\nplan e : true <- fly.", |e| {
            matches!(e, ValidationError::UndeclaredAction { action, .. } if action.as_str() == "fly")
        }),
        ("event e [i].\nplan e : true <- !nowhere.", |e| {
            matches!(e, ValidationError::UndeclaredEvent { posted, .. } if posted.as_str() == "nowhere")
        }),
        ("event e [i].\nevent f [i].", |e| matches!(e, ValidationError::DuplicateIdentifier(_))),
        ("event e [i].\nmotivation x ~> e [i].", |e| matches!(e, ValidationError::DuplicateIdentifier(_))),
        ("action a : true <- +{x} -{x}.", |e| matches!(e, ValidationError::ConflictingEffects { .. })),
        ("action a : true <- +{} -{}.\naction a : true <- +{} -{}.", |e| {
            matches!(e, ValidationError::DuplicateAction(_))
        }),
        ("belief x.\nassert-not x.", |e| matches!(e, ValidationError::ContradictoryInitialBelief(_))),
        ("event e [i].\nplan e : true <- !f.\nplan f : true <- !e.", |e| {
            matches!(e, ValidationError::Recursion(c) if c.first() == c.last() && c.len() == 3)
        }),
        ("event e [i].\nplan e : true <- goal(x, e, y).", |e| matches!(e, ValidationError::Recursion(_))),
    ];
    for (src, check) in cases {
        match parse_program(src) {
            Err(AgentError::Validation(e)) => assert!(check(&e), "{src}: {e}"),
            other => panic!("{src}: expected validation error, got {other:?}"),
        }
    }
}

#[test]
fn unvalidated_parse_keeps_bad_programs() {
    let agent = parse_unvalidated("event e [i].\nplan e : true <- fly.").unwrap();
    assert_eq!(agent.plans.len(), 1);
    assert!(agent.validate().is_err());
}

#[test]
fn uav_round_trips() {
    let agent = parse_program(UAV).unwrap();
    let printed = pretty_print(&agent);
    assert_eq!(parse_program(&printed).unwrap(), agent);
    assert_eq!(pretty_print(&parse_program(&printed).unwrap()), printed);
}

#[test]
fn nested_bodies_print_with_parentheses() {
    let src = "event e [i].\nplan e : ~(a | b) & c <- (x; y); z || (x || y).\naction x : true <- +{} -{}.\naction y : true <- +{} -{}.\naction z : true <- +{} -{}.\n";
    let agent = parse_program(src).unwrap();
    let again = parse_program(&pretty_print(&agent)).unwrap();
    assert_eq!(again, agent);
}

/// Reachability over the event graph by repeated relaxation.
fn has_cycle_oracle(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n).any(|i| reach[i][i])
}

proptest! {
    #[test]
    fn printed_agents_reparse_to_themselves(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = AgentShape { motivations: 1, ..AgentShape::default() };
        let agent = random_agent(&mut rng, &shape);
        let printed = pretty_print(&agent);
        prop_assert_eq!(parse_unvalidated(&printed).unwrap(), agent);
    }

    #[test]
    fn parser_never_panics(src in "\\PC{0,80}") {
        let _ = parse_program(&src);
    }

    #[test]
    fn parser_never_panics_on_token_soup(
        toks in proptest::collection::vec(
            prop::sample::select(vec![
                "plan", "event", "action", "e", "a", ":", "<-", ";", "||", "!", "(", ")", "[", "]",
                "goal", ",", ".", "~", "&", "|", "+{", "}", "-{", "~>", "true", "nil", "motivation",
            ]),
            0..40,
        )
    ) {
        let _ = parse_program(&toks.join(" "));
    }

    #[test]
    fn recursion_check_matches_transitive_closure(
        n in 1usize..5,
        raw in proptest::collection::vec((0usize..5, 0usize..5), 0..6),
    ) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let mut src = String::new();
        for i in 0..n {
            src.push_str(&format!("event e{i} [i{i}].\n"));
        }
        for (a, b) in &edges {
            src.push_str(&format!("plan e{a} : true <- !e{b}.\n"));
        }
        let result = parse_program(&src);
        let cyclic = matches!(result, Err(AgentError::Validation(ValidationError::Recursion(_))));
        prop_assert_eq!(cyclic, has_cycle_oracle(n, &edges));
        if !cyclic {
            prop_assert!(result.is_ok());
        }
    }
}
