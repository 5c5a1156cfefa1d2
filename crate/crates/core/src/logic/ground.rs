use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::term::{evaluate_guard, Atom, Guard, GuardError, Literal, Term, Variable};
use super::theory::{check_acyclic, BodyItem, ConflictDeclaration, Rule, Strength, Superiority, Theory, TheoryError};

pub const DEFAULT_INSTANCE_CAP: usize = 100_000;

/// A variable-free, guard-free rule instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRule {
    /// Instance id, `<rule-id>#<k>` when produced by grounding.
    pub id: String,
    /// Id of the rule this instance came from.
    pub source: String,
    pub strength: Strength,
    pub body: Vec<Literal>,
    pub head: Literal,
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        if !self.body.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "{} {}", self.strength.arrow(), self.head)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTheory {
    rules: Vec<GroundRule>,
    superiorities: Vec<Superiority>,
    conflicts: Vec<ConflictDeclaration>,
    facts: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("grounding would produce more than {cap} rule instances")]
    Explosion { cap: usize },
    #[error("rule `{rule}`: {source}")]
    Guard {
        rule: String,
        #[source]
        source: GuardError,
    },
    #[error("ground theory mentions non-ground atom `{0}`")]
    NotGround(String),
}

impl GroundTheory {
    /// Builds a ground theory directly, checking the same invariants as
    /// [`Theory::validate`] plus groundness.
    pub fn new(
        rules: Vec<GroundRule>,
        superiorities: Vec<Superiority>,
        conflicts: Vec<ConflictDeclaration>,
        facts: Vec<Atom>,
    ) -> Result<Self, GroundError> {
        let as_theory = Theory {
            rules: rules
                .iter()
                .map(|r| Rule {
                    id: r.id.clone(),
                    strength: r.strength,
                    body: r.body.iter().cloned().map(BodyItem::Literal).collect(),
                    head: r.head.clone(),
                })
                .collect(),
            superiorities: superiorities.clone(),
            conflicts: conflicts.clone(),
            facts: facts.clone(),
        };
        as_theory.validate()?;
        for rule in &rules {
            if let Some(l) = rule
                .body
                .iter()
                .chain(std::iter::once(&rule.head))
                .find(|l| !l.atom.is_ground())
            {
                return Err(GroundError::NotGround(l.to_string()));
            }
        }
        Ok(GroundTheory {
            rules,
            superiorities,
            conflicts,
            facts,
        })
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn superiorities(&self) -> &[Superiority] {
        &self.superiorities
    }

    pub fn conflicts(&self) -> &[ConflictDeclaration] {
        &self.conflicts
    }

    pub fn facts(&self) -> &[Atom] {
        &self.facts
    }

    pub fn rule(&self, id: &str) -> Option<&GroundRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Whether the atom dependency graph (body atom → head atom) has a cycle.
    pub fn is_cyclic(&self) -> bool {
        let names: Vec<(String, String)> = self
            .rules
            .iter()
            .flat_map(|r| {
                r.body
                    .iter()
                    .map(move |b| (b.atom.to_string(), r.head.atom.to_string()))
            })
            .collect();
        check_acyclic(names.iter().map(|(a, b)| (a.as_str(), b.as_str()))).is_err()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GroundingOptions {
    /// Upper bound on candidate substitutions across all rules.
    pub max_instances: usize,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        GroundingOptions {
            max_instances: DEFAULT_INSTANCE_CAP,
        }
    }
}

pub fn ground_theory(theory: &Theory) -> Result<GroundTheory, GroundError> {
    ground_theory_with(theory, GroundingOptions::default())
}

/// Instantiates every rule over its substitution domain.
///
/// A variable ranges over the constants observed at the argument positions it
/// is linked to. Positions are linked when one rule uses the same variable at
/// both, or when variables carrying the same type annotation occupy them.
/// Variables that occur only in guards range over every constant in the theory.
pub fn ground_theory_with(theory: &Theory, options: GroundingOptions) -> Result<GroundTheory, GroundError> {
    theory.validate()?;
    let domains = PositionDomains::build(theory);

    let mut rules = Vec::new();
    let mut instances: HashMap<&str, Vec<String>> = HashMap::new();
    let mut budget = options.max_instances;
    for rule in &theory.rules {
        let vars = rule_variables(rule);
        let var_domains: Vec<Vec<Term>> = vars
            .iter()
            .map(|v| domains.domain_of(rule, v).into_iter().collect())
            .collect();
        let candidates = var_domains
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(d.len()))
            .unwrap_or(usize::MAX);
        budget = budget.checked_sub(candidates).ok_or(GroundError::Explosion {
            cap: options.max_instances,
        })?;

        let ids = instances.entry(rule.id.as_str()).or_default();
        for_each_substitution(&var_domains, |values| {
            let binding: HashMap<&str, &Term> = vars
                .iter()
                .map(|v| v.name.as_str())
                .zip(values.iter().copied())
                .collect();
            let mut body = Vec::new();
            for item in &rule.body {
                match item {
                    BodyItem::Literal(l) => body.push(substitute_literal(l, &binding)),
                    BodyItem::Guard(g) => {
                        let g = substitute_guard(g, &binding);
                        let holds = evaluate_guard(&g).map_err(|source| GroundError::Guard {
                            rule: rule.id.clone(),
                            source,
                        })?;
                        if !holds {
                            return Ok(());
                        }
                    }
                }
            }
            let id = format!("{}#{}", rule.id, ids.len());
            ids.push(id.clone());
            rules.push(GroundRule {
                id,
                source: rule.id.clone(),
                strength: rule.strength,
                body,
                head: substitute_literal(&rule.head, &binding),
            });
            Ok(())
        })?;
    }

    let mut superiorities = Vec::new();
    for sup in &theory.superiorities {
        for superior in instances.get(sup.superior.as_str()).into_iter().flatten() {
            for inferior in instances.get(sup.inferior.as_str()).into_iter().flatten() {
                superiorities.push(Superiority {
                    superior: superior.clone(),
                    inferior: inferior.clone(),
                });
            }
        }
    }

    Ok(GroundTheory {
        rules,
        superiorities,
        conflicts: theory.conflicts.clone(),
        facts: theory.facts.clone(),
    })
}

/// Variables of a rule in order of first occurrence (body, then head).
fn rule_variables(rule: &Rule) -> Vec<&Variable> {
    let mut seen = BTreeSet::new();
    let mut vars = Vec::new();
    let body_terms = rule.body.iter().flat_map(|item| match item {
        BodyItem::Literal(l) => l.atom.args.iter().collect::<Vec<_>>(),
        BodyItem::Guard(g) => vec![&g.lhs, &g.rhs],
    });
    for term in body_terms.chain(&rule.head.atom.args) {
        if let Term::Var(v) = term {
            if seen.insert(v.name.as_str()) {
                vars.push(v);
            }
        }
    }
    vars
}

fn for_each_substitution<'a>(
    domains: &'a [Vec<Term>],
    mut f: impl FnMut(&[&'a Term]) -> Result<(), GroundError>,
) -> Result<(), GroundError> {
    if domains.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let mut idx = vec![0usize; domains.len()];
    loop {
        let values: Vec<&Term> = idx.iter().zip(domains).map(|(&i, d)| &d[i]).collect();
        f(&values)?;
        // odometer, last variable fastest
        let mut k = domains.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn substitute_term(term: &Term, binding: &HashMap<&str, &Term>) -> Term {
    match term {
        Term::Var(v) => binding
            .get(v.name.as_str())
            .map(|t| (*t).clone())
            .unwrap_or_else(|| term.clone()),
        _ => term.clone(),
    }
}

fn substitute_literal(lit: &Literal, binding: &HashMap<&str, &Term>) -> Literal {
    Literal {
        atom: Atom {
            predicate: lit.atom.predicate.clone(),
            args: lit.atom.args.iter().map(|t| substitute_term(t, binding)).collect(),
        },
        negated: lit.negated,
    }
}

fn substitute_guard(guard: &Guard, binding: &HashMap<&str, &Term>) -> Guard {
    Guard {
        comparator: guard.comparator,
        lhs: substitute_term(&guard.lhs, binding),
        rhs: substitute_term(&guard.rhs, binding),
    }
}

type Position = (String, usize);

/// Union-find over argument positions, with the constants observed per class.
struct PositionDomains {
    index: HashMap<Position, usize>,
    parent: Vec<usize>,
    constants: BTreeMap<usize, BTreeSet<Term>>,
    all_constants: BTreeSet<Term>,
}

impl PositionDomains {
    fn build(theory: &Theory) -> Self {
        let mut pd = PositionDomains {
            index: HashMap::new(),
            parent: Vec::new(),
            constants: BTreeMap::new(),
            all_constants: BTreeSet::new(),
        };
        let mut by_type: HashMap<&str, usize> = HashMap::new();
        for rule in &theory.rules {
            let mut by_var: HashMap<&str, usize> = HashMap::new();
            let literals = rule.body_literals().chain(std::iter::once(&rule.head));
            for lit in literals {
                for (i, term) in lit.atom.args.iter().enumerate() {
                    let pos = pd.position(&lit.atom.predicate, i);
                    match term {
                        Term::Var(v) => {
                            if let Some(&other) = by_var.get(v.name.as_str()) {
                                pd.union(pos, other);
                            } else {
                                by_var.insert(&v.name, pos);
                            }
                            if let Some(ty) = &v.ty {
                                if let Some(&other) = by_type.get(ty.as_str()) {
                                    pd.union(pos, other);
                                } else {
                                    by_type.insert(ty, pos);
                                }
                            }
                        }
                        ground => pd.observe(pos, ground.clone()),
                    }
                }
            }
            for guard in rule.guards() {
                for term in [&guard.lhs, &guard.rhs] {
                    if term.is_ground() {
                        pd.all_constants.insert(term.clone());
                    }
                }
            }
        }
        for fact in &theory.facts {
            for (i, term) in fact.args.iter().enumerate() {
                let pos = pd.position(&fact.predicate, i);
                pd.observe(pos, term.clone());
            }
        }
        // fold observations onto class roots
        let observed = std::mem::take(&mut pd.constants);
        for (pos, terms) in observed {
            let root = pd.find(pos);
            pd.constants.entry(root).or_default().extend(terms);
        }
        pd
    }

    fn position(&mut self, predicate: &str, index: usize) -> usize {
        let next = self.parent.len();
        let id = *self.index.entry((predicate.to_string(), index)).or_insert(next);
        if id == next {
            self.parent.push(next);
        }
        id
    }

    fn observe(&mut self, pos: usize, term: Term) {
        self.all_constants.insert(term.clone());
        self.constants.entry(pos).or_default().insert(term);
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn domain_of(&self, rule: &Rule, var: &Variable) -> BTreeSet<Term> {
        let literals = rule.body_literals().chain(std::iter::once(&rule.head));
        for lit in literals {
            for (i, term) in lit.atom.args.iter().enumerate() {
                if matches!(term, Term::Var(v) if v.name == var.name) {
                    let pos = self.index[&(lit.atom.predicate.clone(), i)];
                    let root = self.root(pos);
                    return self.constants.get(&root).cloned().unwrap_or_default();
                }
            }
        }
        self.all_constants.clone()
    }

    fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::notation::parse_theory;

    const EQ_1_TO_4: &str = "\
r1: max_imprisonment(Offence, X), X <= 10 => jurisdiction_level(Offence, basic)
r2: max_imprisonment(Offence, X), X > 10 => jurisdiction_level(Offence, higher)
r3: is_minor(Defendant) => jurisdiction_level(Offence, higher)
r1 < r3
conflict jurisdiction_level/2 @2
";

    fn theory_with(facts: &str) -> Theory {
        parse_theory(&format!("{EQ_1_TO_4}{facts}")).unwrap()
    }

    #[test]
    fn r1_instance_with_guard_discharged() {
        let gt = ground_theory(&theory_with("fact max_imprisonment(o1, 8)\n")).unwrap();
        let r1: Vec<_> = gt.rules().iter().filter(|r| r.source == "r1").collect();
        assert_eq!(r1.len(), 1);
        assert_eq!(
            r1[0].to_string(),
            "r1#0: max_imprisonment(o1, 8) => jurisdiction_level(o1, basic)"
        );
        assert!(gt.rules().iter().all(|r| r.source != "r2" && r.source != "r3"));
        assert!(gt.superiorities().is_empty());
    }

    #[test]
    fn failing_guard_drops_instance() {
        let gt = ground_theory(&theory_with("fact max_imprisonment(o1, 12)\n")).unwrap();
        let ids: Vec<_> = gt.rules().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["r2#0"]);
    }

    #[test]
    fn empty_domain_yields_no_instances() {
        let gt = ground_theory(&theory_with("")).unwrap();
        assert!(gt.rules().is_empty());
    }

    #[test]
    fn unbound_head_variable_ranges_over_linked_positions() {
        let gt = ground_theory(&theory_with("fact max_imprisonment(o1, 8)\nfact is_minor(d1)\n")).unwrap();
        let r3 = gt.rule("r3#0").unwrap();
        assert_eq!(r3.to_string(), "r3#0: is_minor(d1) => jurisdiction_level(o1, higher)");
        assert_eq!(gt.rules().len(), 2);
        assert_eq!(
            gt.superiorities(),
            &[Superiority {
                superior: "r3#0".into(),
                inferior: "r1#0".into()
            }]
        );
    }

    #[test]
    fn typed_variables_share_domains() {
        // `Who` is only in the head, linked to `Person` through its type
        let t = parse_theory(
            "a: flag(Z) => owes(Who:person)\nb: knows(Person:person) => seen(Person)\nfact knows(ann)\nfact flag(on)\n",
        )
        .unwrap();
        let gt = ground_theory(&t).unwrap();
        assert_eq!(gt.rule("a#0").unwrap().head.to_string(), "owes(ann)");
    }

    #[test]
    fn explosion_cap() {
        let mut facts = String::new();
        for i in 0..20 {
            facts.push_str(&format!("fact p(c{i})\n"));
        }
        let t = parse_theory(&format!("r: p(X), p(Y), p(Z) => q(X, Y, Z)\n{facts}")).unwrap();
        let err = ground_theory_with(&t, GroundingOptions { max_instances: 1000 }).unwrap_err();
        assert_eq!(err, GroundError::Explosion { cap: 1000 });
        assert_eq!(ground_theory(&t).unwrap().rules().len(), 8000);
    }

    #[test]
    fn guard_type_mismatch_is_reported() {
        let t = parse_theory("r: p(X), X < 3 => q(X)\nfact p(abc)\n").unwrap();
        assert!(matches!(ground_theory(&t), Err(GroundError::Guard { .. })));
    }

    #[test]
    fn cycle_detection() {
        let t = parse_theory("a: p -> q\nb: q => p\nfact p\n").unwrap();
        assert!(ground_theory(&t).unwrap().is_cyclic());
        let t = parse_theory("a: p -> q\nfact p\n").unwrap();
        assert!(!ground_theory(&t).unwrap().is_cyclic());
    }
}
