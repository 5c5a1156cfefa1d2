//! Brute-force evaluation of the defeasible proof conditions.
//!
//! Every round recomputes all four tags for every literal from the previous
//! round's tag sets, scanning the full rule list for each condition, until a
//! round changes nothing. Literals left without a `+` tag get the `−` tag.

use std::collections::BTreeSet;

use docasm_core::logic::{Atom, Conclusion, GroundRule, GroundTheory, Literal, Strength, Tag};

#[derive(Clone, Default, PartialEq, Eq)]
struct Tags {
    plus_delta: BTreeSet<Literal>,
    minus_delta: BTreeSet<Literal>,
    plus_partial: BTreeSet<Literal>,
    minus_partial: BTreeSet<Literal>,
}

fn negate(l: &Literal) -> Literal {
    Literal {
        atom: l.atom.clone(),
        negated: !l.negated,
    }
}

fn declared_conflict(theory: &GroundTheory, a: &Atom, b: &Atom) -> bool {
    theory.conflicts().iter().any(|d| {
        a.predicate == d.predicate
            && b.predicate == d.predicate
            && a.args.len() == b.args.len()
            && d.position >= 1
            && d.position <= a.args.len()
            && (0..a.args.len()).all(|i| {
                if i + 1 == d.position {
                    a.args[i] != b.args[i]
                } else {
                    a.args[i] == b.args[i]
                }
            })
    })
}

fn atoms(theory: &GroundTheory) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    for f in theory.facts() {
        out.insert(f.clone());
    }
    for r in theory.rules() {
        out.insert(r.head.atom.clone());
        for b in &r.body {
            out.insert(b.atom.clone());
        }
    }
    out
}

fn conflicts_of(theory: &GroundTheory, all: &BTreeSet<Atom>, l: &Literal) -> Vec<Literal> {
    let mut out = vec![negate(l)];
    if !l.negated {
        for a in all {
            if declared_conflict(theory, &l.atom, a) {
                out.push(Literal {
                    atom: a.clone(),
                    negated: false,
                });
            }
        }
    }
    out
}

fn beats(theory: &GroundTheory, t: &GroundRule, s: &GroundRule) -> bool {
    theory
        .superiorities()
        .iter()
        .any(|sup| sup.superior == t.id && sup.inferior == s.id)
}

pub fn brute_force(theory: &GroundTheory) -> BTreeSet<Conclusion> {
    let all = atoms(theory);
    let mut universe = Vec::new();
    for a in &all {
        universe.push(Literal {
            atom: a.clone(),
            negated: false,
        });
        universe.push(Literal {
            atom: a.clone(),
            negated: true,
        });
    }
    let is_fact = |l: &Literal| !l.negated && theory.facts().contains(&l.atom);

    let mut tags = Tags::default();
    loop {
        let mut next = tags.clone();
        for l in &universe {
            let conflicts = conflicts_of(theory, &all, l);
            let for_l: Vec<&GroundRule> = theory.rules().iter().filter(|r| &r.head == l).collect();
            let supporters: Vec<&GroundRule> = for_l
                .iter()
                .copied()
                .filter(|r| r.strength != Strength::Defeater)
                .collect();
            let attackers: Vec<&GroundRule> = theory.rules().iter().filter(|r| conflicts.contains(&r.head)).collect();
            let all_in = |r: &GroundRule, set: &BTreeSet<Literal>| r.body.iter().all(|b| set.contains(b));
            let any_in = |r: &GroundRule, set: &BTreeSet<Literal>| r.body.iter().any(|b| set.contains(b));

            let plus_delta = is_fact(l)
                || for_l
                    .iter()
                    .any(|r| r.strength == Strength::Strict && all_in(r, &tags.plus_delta));
            let minus_delta = !is_fact(l)
                && for_l
                    .iter()
                    .filter(|r| r.strength == Strength::Strict)
                    .all(|r| any_in(r, &tags.minus_delta));

            let plus_partial = tags.plus_delta.contains(l)
                || (conflicts.iter().all(|c| tags.minus_delta.contains(c))
                    && supporters.iter().any(|r| all_in(r, &tags.plus_partial))
                    && attackers.iter().all(|s| {
                        any_in(s, &tags.minus_partial)
                            || supporters
                                .iter()
                                .any(|t| all_in(t, &tags.plus_partial) && beats(theory, t, s))
                    }));
            let minus_partial = tags.minus_delta.contains(l)
                && (conflicts.iter().any(|c| tags.plus_delta.contains(c))
                    || supporters.iter().all(|r| any_in(r, &tags.minus_partial))
                    || attackers.iter().any(|s| {
                        all_in(s, &tags.plus_partial)
                            && supporters
                                .iter()
                                .all(|t| any_in(t, &tags.minus_partial) || !beats(theory, t, s))
                    }));

            for (holds, set) in [
                (plus_delta, &mut next.plus_delta),
                (minus_delta, &mut next.minus_delta),
                (plus_partial, &mut next.plus_partial),
                (minus_partial, &mut next.minus_partial),
            ] {
                if holds {
                    set.insert(l.clone());
                }
            }
        }
        if next == tags {
            break;
        }
        tags = next;
    }

    let mut out = BTreeSet::new();
    for l in universe {
        let d = if tags.plus_delta.contains(&l) {
            Tag::PlusDelta
        } else {
            Tag::MinusDelta
        };
        let p = if tags.plus_partial.contains(&l) {
            Tag::PlusPartial
        } else {
            Tag::MinusPartial
        };
        out.insert(Conclusion::new(d, l.clone()));
        out.insert(Conclusion::new(p, l));
    }
    out
}
