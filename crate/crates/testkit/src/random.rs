//! Random small ground theories.

use docasm_core::logic::{Atom, ConflictDeclaration, GroundRule, GroundTheory, Literal, Strength, Superiority, Term};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_ATOMS: usize = 8;
pub const MAX_RULES: usize = 12;
pub const MAX_SUPERIORITIES: usize = 4;
pub const MAX_CONFLICTS: usize = 2;

fn pool() -> Vec<Atom> {
    let mut atoms = Vec::new();
    for p in ["p", "q"] {
        for c in ["a", "b", "c"] {
            atoms.push(Atom::new(p, vec![Term::constant(c)]));
        }
    }
    for p in ["r", "s", "t", "u"] {
        atoms.push(Atom::new(p, vec![]));
    }
    atoms
}

/// Deterministic theory for `seed`, within the size bounds above.
pub fn theory_from_seed(seed: u64) -> GroundTheory {
    random_theory(&mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_theory(rng: &mut impl Rng) -> GroundTheory {
    let mut atoms = pool();
    atoms.shuffle(rng);
    atoms.truncate(rng.random_range(1..=MAX_ATOMS));

    let literal = |rng: &mut dyn rand::RngCore, atoms: &[Atom]| Literal {
        atom: atoms.choose(rng).unwrap().clone(),
        negated: rng.random_bool(0.3),
    };

    let mut rules = Vec::new();
    for i in 0..rng.random_range(0..=MAX_RULES) {
        let mut body: Vec<Literal> = Vec::new();
        for _ in 0..rng.random_range(0..=3) {
            let l = literal(rng, &atoms);
            if !body.contains(&l) {
                body.push(l);
            }
        }
        let strength = match rng.random_range(0..10) {
            0..=1 => Strength::Strict,
            2..=7 => Strength::Defeasible,
            _ => Strength::Defeater,
        };
        rules.push(GroundRule {
            id: format!("r{i}"),
            source: format!("r{i}"),
            strength,
            body,
            head: literal(rng, &atoms),
        });
    }

    let mut conflicts = Vec::new();
    for p in ["p", "q"] {
        if conflicts.len() < MAX_CONFLICTS && rng.random_bool(0.5) {
            conflicts.push(ConflictDeclaration::new(p, 1));
        }
    }

    // pairs with opposing heads are the interesting ones
    let opposed = |a: &GroundRule, b: &GroundRule| {
        a.head.atom == b.head.atom && a.head.negated != b.head.negated
            || !a.head.negated && !b.head.negated && conflicts.iter().any(|d| d.excludes(&a.head.atom, &b.head.atom))
    };
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for i in 0..rules.len() {
        for j in i + 1..rules.len() {
            if opposed(&rules[i], &rules[j]) || rng.random_bool(0.1) {
                candidates.push((i, j));
            }
        }
    }
    candidates.shuffle(rng);
    candidates.truncate(rng.random_range(0..=MAX_SUPERIORITIES));
    // superior is always the later rule, so the relation is acyclic
    let superiorities = candidates
        .into_iter()
        .map(|(i, j)| Superiority {
            superior: rules[j].id.clone(),
            inferior: rules[i].id.clone(),
        })
        .collect();

    let facts = atoms.iter().filter(|_| rng.random_bool(0.3)).cloned().collect();

    GroundTheory::new(rules, superiorities, conflicts, facts).expect("generated theory is valid")
}
