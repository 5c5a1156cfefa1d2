use super::notation::parse_theory;
use super::*;

const EQ_1_TO_4: &str = "\
r1: max_imprisonment(Offence, X), X <= 10 => jurisdiction_level(Offence, basic)
r2: max_imprisonment(Offence, X), X > 10 => jurisdiction_level(Offence, higher)
r3: is_minor(Defendant) => jurisdiction_level(Offence, higher)
r1 < r3
conflict jurisdiction_level/2 @2
";

fn ground(text: &str) -> GroundTheory {
    ground_theory(&parse_theory(text).unwrap()).unwrap()
}

fn lit(text: &str) -> Literal {
    notation::parse_literal(text).unwrap()
}

fn scenario(facts: &str) -> GroundTheory {
    ground(&format!("{EQ_1_TO_4}{facts}"))
}

#[test]
fn basic_court_for_short_sentence() {
    let c = prove(&scenario("fact max_imprisonment(o1, 8)\n"));
    assert!(c.contains(Tag::PlusPartial, &lit("jurisdiction_level(o1, basic)")));
    assert!(c.contains(Tag::MinusDelta, &lit("jurisdiction_level(o1, basic)")));
    assert!(c.contains(Tag::PlusDelta, &lit("max_imprisonment(o1, 8)")));
}

#[test]
fn minor_defendant_overrides_by_superiority() {
    let c = prove(&scenario("fact max_imprisonment(o1, 8)\nfact is_minor(d1)\n"));
    assert!(c.contains(Tag::PlusPartial, &lit("jurisdiction_level(o1, higher)")));
    assert!(c.contains(Tag::MinusPartial, &lit("jurisdiction_level(o1, basic)")));
}

#[test]
fn long_sentence_goes_to_higher_court() {
    let c = prove(&scenario("fact max_imprisonment(o1, 12)\n"));
    assert!(c.contains(Tag::PlusPartial, &lit("jurisdiction_level(o1, higher)")));
}

#[test]
fn empty_theory_proves_nothing() {
    assert!(prove(&GroundTheory::default()).is_empty());
}

#[test]
fn without_superiority_both_sides_are_blocked() {
    let text = EQ_1_TO_4.replace("r1 < r3\n", "");
    let c = prove(&ground(&format!(
        "{text}fact max_imprisonment(o1, 8)\nfact is_minor(d1)\n"
    )));
    assert!(c.contains(Tag::MinusPartial, &lit("jurisdiction_level(o1, higher)")));
    assert!(c.contains(Tag::MinusPartial, &lit("jurisdiction_level(o1, basic)")));
}

#[test]
fn conflict_set_examples() {
    let gt = scenario("fact max_imprisonment(o1, 8)\nfact is_minor(d1)\n");
    let set = conflict_set(&lit("jurisdiction_level(o1, basic)"), &gt);
    assert_eq!(
        set.into_iter().collect::<Vec<_>>(),
        vec![
            lit("~jurisdiction_level(o1, basic)"),
            lit("jurisdiction_level(o1, higher)")
        ]
    );
    let set = conflict_set(&lit("is_minor(d1)"), &gt);
    assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![lit("~is_minor(d1)")]);
    // `higher` never occurs when only the short-sentence rule fires
    let gt = scenario("fact max_imprisonment(o1, 8)\n");
    let set = conflict_set(&lit("jurisdiction_level(o1, basic)"), &gt);
    assert_eq!(
        set.into_iter().collect::<Vec<_>>(),
        vec![lit("~jurisdiction_level(o1, basic)")]
    );
}

#[test]
fn trace_of_overriding_rule() {
    let gt = scenario("fact max_imprisonment(o1, 8)\nfact is_minor(d1)\n");
    let record = proof_trace(
        &gt,
        &Conclusion::new(Tag::PlusPartial, lit("jurisdiction_level(o1, higher)")),
    )
    .unwrap();
    assert_eq!(record.supporting_rule.as_ref().unwrap().id, "r3#0");
    assert_eq!(record.premises.len(), 1);
    let premise = &record.premises[0];
    assert_eq!(premise.conclusion.literal, lit("is_minor(d1)"));
    assert!(premise.supporting_rule.is_none() && premise.premises.is_empty());
    assert_eq!(record.defeated_attackers.len(), 1);
    let defeated = &record.defeated_attackers[0];
    assert_eq!(defeated.attacker.id, "r1#0");
    assert!(matches!(&defeated.reason, DefeatReason::DefeatedBy(r) if r.id == "r3#0"));
    assert_eq!(defeated.premises[0].conclusion.literal, lit("max_imprisonment(o1, 8)"));
}

#[test]
fn trace_of_fact_is_a_leaf() {
    let gt = scenario("fact is_minor(d1)\n");
    let record = proof_trace(&gt, &Conclusion::new(Tag::PlusDelta, lit("is_minor(d1)"))).unwrap();
    assert!(record.supporting_rule.is_none());
    assert!(record.premises.is_empty());
}

#[test]
fn trace_rejects_negative_or_unknown() {
    let gt = scenario("fact max_imprisonment(o1, 8)\nfact is_minor(d1)\n");
    let err = proof_trace(
        &gt,
        &Conclusion::new(Tag::MinusPartial, lit("jurisdiction_level(o1, basic)")),
    );
    assert!(matches!(err, Err(TraceError::NoProof(_))));
    let err = proof_trace(&gt, &Conclusion::new(Tag::PlusPartial, lit("nowhere")));
    assert!(matches!(err, Err(TraceError::NoProof(_))));
}

#[test]
fn defeaters_attack_but_never_support() {
    let gt = ground("a: p => q\nd: p ~> ~q\nd2: p ~> r\nfact p\n");
    let c = prove(&gt);
    assert!(c.contains(Tag::MinusPartial, &lit("q")));
    assert!(c.contains(Tag::MinusPartial, &lit("~q")));
    assert!(c.contains(Tag::MinusPartial, &lit("r")));
    let gt = ground("a: p => q\nd: p ~> ~q\nd < a\nfact p\n");
    assert!(prove(&gt).contains(Tag::PlusPartial, &lit("q")));
}

#[test]
fn team_defeat() {
    // neither a nor b beats both attackers alone, together they do
    let gt = ground("a: p => q\nb: p => q\nc: p => ~q\nd: p => ~q\nc < a\nd < b\nfact p\n");
    assert!(prove(&gt).contains(Tag::PlusPartial, &lit("q")));
}

#[test]
fn strict_chains_are_definite() {
    let gt = ground("a: p -> q\nb: q -> r\nc: p => ~r\nfact p\n");
    let c = prove(&gt);
    assert!(c.contains(Tag::PlusDelta, &lit("r")));
    assert!(c.contains(Tag::PlusPartial, &lit("r")));
    assert!(c.contains(Tag::MinusPartial, &lit("~r")));
    let record = proof_trace(&gt, &Conclusion::new(Tag::PlusPartial, lit("r"))).unwrap();
    assert_eq!(record.supporting_rule.unwrap().id, "b#0");
    assert_eq!(record.premises[0].supporting_rule.as_ref().unwrap().id, "a#0");
}

#[test]
fn cyclic_theory_defaults_to_unprovable() {
    let gt = ground("a: p => q\nb: q => p\n");
    let reasoner = Reasoner::new(&gt);
    let c = reasoner.conclusions();
    assert!(c.contains(Tag::MinusPartial, &lit("p")));
    assert!(c.contains(Tag::MinusPartial, &lit("q")));
    assert!(!reasoner.undetermined().is_empty());
    assert!(reasoner.inductive_collisions().is_empty());
}

#[test]
fn proving_is_deterministic() {
    let gt = scenario("fact max_imprisonment(o1, 8)\nfact is_minor(d1)\n");
    let c = Conclusion::new(Tag::PlusPartial, lit("jurisdiction_level(o1, higher)"));
    assert_eq!(prove(&gt), prove(&gt));
    assert_eq!(proof_trace(&gt, &c).unwrap(), proof_trace(&gt, &c).unwrap());
}
