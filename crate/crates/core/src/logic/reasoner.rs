use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::ground::GroundTheory;
use super::term::{Atom, Literal};
use super::theory::Strength;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// +Δ: definitely provable
    PlusDelta,
    /// −Δ: definitely unprovable
    MinusDelta,
    /// +∂: defeasibly provable
    PlusPartial,
    /// −∂: defeasibly unprovable
    MinusPartial,
}

impl Tag {
    pub fn is_positive(self) -> bool {
        matches!(self, Tag::PlusDelta | Tag::PlusPartial)
    }

    pub fn ascii(self) -> &'static str {
        match self {
            Tag::PlusDelta => "+D",
            Tag::MinusDelta => "-D",
            Tag::PlusPartial => "+d",
            Tag::MinusPartial => "-d",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::PlusDelta => "+Δ",
            Tag::MinusDelta => "-Δ",
            Tag::PlusPartial => "+∂",
            Tag::MinusPartial => "-∂",
        })
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "+D" | "+Δ" => Tag::PlusDelta,
            "-D" | "-Δ" | "−Δ" => Tag::MinusDelta,
            "+d" | "+∂" => Tag::PlusPartial,
            "-d" | "-∂" | "−∂" => Tag::MinusPartial,
            _ => return Err(format!("unknown tag `{s}`")),
        })
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.ascii())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Conclusion {
    pub tag: Tag,
    pub literal: Literal,
}

impl Conclusion {
    pub fn new(tag: Tag, literal: Literal) -> Self {
        Conclusion { tag, literal }
    }
}

impl Ord for Conclusion {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.literal, self.tag).cmp(&(&other.literal, other.tag))
    }
}

impl PartialOrd for Conclusion {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.tag, self.literal)
    }
}

/// Tagged conclusions over a theory's literal universe, ordered by literal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ConclusionSet(BTreeSet<Conclusion>);

impl ConclusionSet {
    pub fn contains(&self, tag: Tag, literal: &Literal) -> bool {
        self.0.contains(&Conclusion::new(tag, literal.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Conclusion> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with_tag(&self, tag: Tag) -> impl Iterator<Item = &Literal> {
        self.0.iter().filter(move |c| c.tag == tag).map(|c| &c.literal)
    }
}

impl FromIterator<Conclusion> for ConclusionSet {
    fn from_iter<I: IntoIterator<Item = Conclusion>>(iter: I) -> Self {
        ConclusionSet(iter.into_iter().collect())
    }
}

impl fmt::Display for ConclusionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Literals incompatible with `literal`: its complement, plus for a positive
/// literal every atom of the theory excluded by a conflict declaration.
pub fn conflict_set(literal: &Literal, theory: &GroundTheory) -> BTreeSet<Literal> {
    let mut set = BTreeSet::from([literal.complement()]);
    if !literal.negated {
        for atom in theory_atoms(theory) {
            if theory.conflicts().iter().any(|d| d.excludes(&literal.atom, atom)) {
                set.insert(Literal::positive(atom.clone()));
            }
        }
    }
    set
}

fn theory_atoms(theory: &GroundTheory) -> BTreeSet<&Atom> {
    theory
        .rules()
        .iter()
        .flat_map(|r| r.body.iter().chain(std::iter::once(&r.head)))
        .map(|l| &l.atom)
        .chain(theory.facts())
        .collect()
}

pub fn prove(theory: &GroundTheory) -> ConclusionSet {
    Reasoner::new(theory).conclusions()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleRef {
    /// Ground instance id.
    pub id: String,
    /// Id of the unground rule the instance came from.
    pub source: String,
    pub strength: Strength,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "rule", rename_all = "snake_case")]
pub enum DefeatReason {
    /// A superior supporting rule for the proven literal overrides the attacker.
    DefeatedBy(RuleRef),
    /// Some premise of the attacker is not defeasibly provable.
    UnprovablePremise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefeatedAttacker {
    pub attacker: RuleRef,
    pub reason: DefeatReason,
    /// Proofs of the attacker's premises, present when it was overridden.
    pub premises: Vec<ProofRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofRecord {
    pub conclusion: Conclusion,
    pub supporting_rule: Option<RuleRef>,
    pub premises: Vec<ProofRecord>,
    pub defeated_attackers: Vec<DefeatedAttacker>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("no proof for `{0}`")]
    NoProof(String),
}

pub fn proof_trace(theory: &GroundTheory, conclusion: &Conclusion) -> Result<ProofRecord, TraceError> {
    Reasoner::new(theory).trace(conclusion)
}

struct IndexedRule {
    head: usize,
    body: Vec<usize>,
    strength: Strength,
}

/// Saturated proof state for one ground theory.
///
/// Tags are derived inductively by an agenda-driven fixpoint over the four
/// proof conditions (team defeat, ambiguity blocking). At saturation a literal
/// without a `+` tag receives the corresponding `−` tag.
pub struct Reasoner<'t> {
    theory: &'t GroundTheory,
    literals: Vec<Literal>,
    ids: HashMap<Literal, usize>,
    facts: Vec<bool>,
    conflicts: Vec<Vec<usize>>,
    rules: Vec<IndexedRule>,
    rules_for: Vec<Vec<usize>>,
    attackers: Vec<Vec<usize>>,
    superior: HashSet<(usize, usize)>,
    /// Rule indices sorted by instance id.
    by_id: Vec<usize>,
    state: [Vec<Option<u32>>; 4],
}

const PD: usize = 0;
const MD: usize = 1;
const PP: usize = 2;
const MP: usize = 3;

impl<'t> Reasoner<'t> {
    pub fn new(theory: &'t GroundTheory) -> Self {
        let mut r = Reasoner {
            theory,
            literals: Vec::new(),
            ids: HashMap::new(),
            facts: Vec::new(),
            conflicts: Vec::new(),
            rules: Vec::new(),
            rules_for: Vec::new(),
            attackers: Vec::new(),
            superior: HashSet::new(),
            by_id: Vec::new(),
            state: Default::default(),
        };
        r.index();
        if theory.is_cyclic() {
            tracing::warn!("theory has a cyclic dependency graph; negative tags are assigned by failure at saturation");
        }
        r.saturate();
        r
    }

    fn intern(&mut self, literal: &Literal) -> usize {
        if let Some(&id) = self.ids.get(literal) {
            return id;
        }
        for l in [literal.clone(), literal.complement()] {
            self.ids.insert(l.clone(), self.literals.len());
            self.literals.push(l);
        }
        self.ids[literal]
    }

    fn index(&mut self) {
        let theory = self.theory;
        for fact in theory.facts() {
            self.intern(&Literal::positive(fact.clone()));
        }
        for rule in theory.rules() {
            let head = self.intern(&rule.head);
            let body = rule.body.iter().map(|l| self.intern(l)).collect();
            self.rules.push(IndexedRule {
                head,
                body,
                strength: rule.strength,
            });
        }
        let n = self.literals.len();
        self.facts = vec![false; n];
        for fact in theory.facts() {
            self.facts[self.ids[&Literal::positive(fact.clone())]] = true;
        }
        self.rules_for = vec![Vec::new(); n];
        for (i, rule) in self.rules.iter().enumerate() {
            self.rules_for[rule.head].push(i);
        }

        // declared conflicts, grouped by predicate to avoid a full pairwise scan
        let mut by_pred: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, l) in self.literals.iter().enumerate() {
            if !l.negated {
                by_pred.entry(l.atom.predicate.as_str()).or_default().push(i);
            }
        }
        self.conflicts = (0..n).map(|i| vec![i ^ 1]).collect();
        for decl in theory.conflicts() {
            let Some(group) = by_pred.get(decl.predicate.as_str()) else {
                continue;
            };
            for &a in group {
                for &b in group {
                    if decl.excludes(&self.literals[a].atom, &self.literals[b].atom) && !self.conflicts[a].contains(&b)
                    {
                        self.conflicts[a].push(b);
                    }
                }
            }
        }
        self.attackers = self
            .conflicts
            .iter()
            .map(|cs| cs.iter().flat_map(|&c| self.rules_for[c].iter().copied()).collect())
            .collect();

        let index_of: HashMap<&str, usize> = theory
            .rules()
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.as_str(), i))
            .collect();
        self.superior = theory
            .superiorities()
            .iter()
            .filter_map(|s| Some((*index_of.get(s.superior.as_str())?, *index_of.get(s.inferior.as_str())?)))
            .collect();
        self.by_id = (0..self.rules.len()).collect();
        self.by_id
            .sort_by(|&a, &b| theory.rules()[a].id.cmp(&theory.rules()[b].id));
        self.state = std::array::from_fn(|_| vec![None; n]);
    }

    fn has(&self, tag: usize, lit: usize) -> bool {
        self.state[tag][lit].is_some()
    }

    fn body_all(&self, rule: usize, tag: usize) -> bool {
        self.rules[rule].body.iter().all(|&b| self.has(tag, b))
    }

    fn body_any(&self, rule: usize, tag: usize) -> bool {
        self.rules[rule].body.iter().any(|&b| self.has(tag, b))
    }

    fn supporters(&self, lit: usize) -> impl Iterator<Item = usize> + '_ {
        self.rules_for[lit]
            .iter()
            .copied()
            .filter(|&r| self.rules[r].strength.supports())
    }

    fn strict_rules(&self, lit: usize) -> impl Iterator<Item = usize> + '_ {
        self.rules_for[lit]
            .iter()
            .copied()
            .filter(|&r| self.rules[r].strength == Strength::Strict)
    }

    fn check(&self, tag: usize, l: usize) -> bool {
        match tag {
            PD => self.facts[l] || self.strict_rules(l).any(|r| self.body_all(r, PD)),
            MD => !self.facts[l] && self.strict_rules(l).all(|r| self.body_any(r, MD)),
            PP => {
                self.has(PD, l)
                    || (self.conflicts[l].iter().all(|&c| self.has(MD, c))
                        && self.supporters(l).any(|r| self.body_all(r, PP))
                        && self.attackers[l].iter().all(|&s| {
                            self.body_any(s, MP)
                                || self
                                    .supporters(l)
                                    .any(|t| self.body_all(t, PP) && self.superior.contains(&(t, s)))
                        }))
            }
            MP => {
                self.has(MD, l)
                    && (self.conflicts[l].iter().any(|&c| self.has(PD, c))
                        || self.supporters(l).all(|r| self.body_any(r, MP))
                        || self.attackers[l].iter().any(|&s| {
                            self.body_all(s, PP)
                                && self
                                    .supporters(l)
                                    .all(|t| self.body_any(t, MP) || !self.superior.contains(&(t, s)))
                        }))
            }
            _ => unreachable!(),
        }
    }

    fn saturate(&mut self) {
        let n = self.literals.len();
        // literals whose conditions mention each literal
        let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for rule in &self.rules {
            for &b in &rule.body {
                dependents[b].push(rule.head);
                dependents[b].extend(self.conflicts[rule.head].iter().copied());
            }
        }
        for (l, cs) in self.conflicts.iter().enumerate() {
            for &c in cs {
                dependents[c].push(l);
            }
        }
        for d in &mut dependents {
            d.sort_unstable();
            d.dedup();
        }

        let mut queued = vec![true; n];
        let mut agenda: VecDeque<usize> = (0..n).collect();
        let mut seq = 0u32;
        while let Some(l) = agenda.pop_front() {
            queued[l] = false;
            let mut changed = false;
            for tag in [PD, MD, PP, MP] {
                if self.state[tag][l].is_none() && self.check(tag, l) {
                    self.state[tag][l] = Some(seq);
                    seq += 1;
                    changed = true;
                }
            }
            if changed {
                for &d in dependents[l].iter().chain(std::iter::once(&l)) {
                    if !queued[d] {
                        queued[d] = true;
                        agenda.push_back(d);
                    }
                }
            }
        }
    }

    /// Final tags: `+` where derived, `−` otherwise.
    pub fn conclusions(&self) -> ConclusionSet {
        let mut set = BTreeSet::new();
        for (i, lit) in self.literals.iter().enumerate() {
            let definite = if self.has(PD, i) {
                Tag::PlusDelta
            } else {
                Tag::MinusDelta
            };
            let defeasible = if self.has(PP, i) {
                Tag::PlusPartial
            } else {
                Tag::MinusPartial
            };
            set.insert(Conclusion::new(definite, lit.clone()));
            set.insert(Conclusion::new(defeasible, lit.clone()));
        }
        ConclusionSet(set)
    }

    /// Literals for which the inductive fixpoint derived both a `+` and the
    /// matching `−` tag. Empty for every valid theory.
    pub fn inductive_collisions(&self) -> Vec<Literal> {
        (0..self.literals.len())
            .filter(|&i| (self.has(PD, i) && self.has(MD, i)) || (self.has(PP, i) && self.has(MP, i)))
            .map(|i| self.literals[i].clone())
            .collect()
    }

    /// Literals whose `−` tags were assigned only by failure at saturation.
    pub fn undetermined(&self) -> Vec<Literal> {
        (0..self.literals.len())
            .filter(|&i| (!self.has(PD, i) && !self.has(MD, i)) || (!self.has(PP, i) && !self.has(MP, i)))
            .map(|i| self.literals[i].clone())
            .collect()
    }

    fn rule_ref(&self, rule: usize) -> RuleRef {
        let r = &self.theory.rules()[rule];
        RuleRef {
            id: r.id.clone(),
            source: r.source.clone(),
            strength: r.strength,
        }
    }

    /// One derivation tree for a `+`-tagged member of the conclusion set.
    ///
    /// The exhibited supporting rule is the first qualifying rule in instance-id
    /// order whose premises were derived before the conclusion itself.
    pub fn trace(&self, conclusion: &Conclusion) -> Result<ProofRecord, TraceError> {
        let no_proof = || TraceError::NoProof(conclusion.to_string());
        let &l = self.ids.get(&conclusion.literal).ok_or_else(no_proof)?;
        match conclusion.tag {
            Tag::PlusDelta if self.has(PD, l) => Ok(self.trace_definite(l, Tag::PlusDelta)),
            Tag::PlusPartial if self.has(PP, l) => Ok(self.trace_defeasible(l, &mut Vec::new())),
            _ => Err(no_proof()),
        }
    }

    fn earliest(&self, rule: usize, tag: usize, before: u32) -> bool {
        self.rules[rule]
            .body
            .iter()
            .all(|&b| self.state[tag][b].is_some_and(|s| s < before))
    }

    fn trace_definite(&self, l: usize, tag: Tag) -> ProofRecord {
        let conclusion = Conclusion::new(tag, self.literals[l].clone());
        let at = self.state[PD][l].expect("+Δ literal");
        if self.facts[l] {
            return leaf(conclusion);
        }
        let rule = self
            .by_id
            .iter()
            .copied()
            .find(|&r| {
                self.rules[r].head == l && self.rules[r].strength == Strength::Strict && self.earliest(r, PD, at)
            })
            .expect("+Δ literal has a strict derivation");
        ProofRecord {
            conclusion,
            supporting_rule: Some(self.rule_ref(rule)),
            premises: self.rules[rule]
                .body
                .iter()
                .map(|&b| self.trace_definite(b, tag))
                .collect(),
            defeated_attackers: Vec::new(),
        }
    }

    fn trace_defeasible(&self, l: usize, path: &mut Vec<usize>) -> ProofRecord {
        if self.has(PD, l) {
            return self.trace_definite(l, Tag::PlusPartial);
        }
        let conclusion = Conclusion::new(Tag::PlusPartial, self.literals[l].clone());
        if path.contains(&l) {
            return leaf(conclusion);
        }
        path.push(l);
        let at = self.state[PP][l].expect("+∂ literal");
        let rule = self
            .by_id
            .iter()
            .copied()
            .find(|&r| self.rules[r].head == l && self.rules[r].strength.supports() && self.earliest(r, PP, at))
            .expect("+∂ literal has a supporting rule");
        let premises = self.rules[rule]
            .body
            .iter()
            .map(|&b| self.trace_defeasible(b, path))
            .collect();

        let mut attackers: Vec<usize> = self.attackers[l].clone();
        attackers.sort_by(|&a, &b| self.theory.rules()[a].id.cmp(&self.theory.rules()[b].id));
        let defeated_attackers = attackers
            .into_iter()
            .map(|s| {
                if !self.body_all(s, PP) {
                    return DefeatedAttacker {
                        attacker: self.rule_ref(s),
                        reason: DefeatReason::UnprovablePremise,
                        premises: Vec::new(),
                    };
                }
                let winner = self
                    .by_id
                    .iter()
                    .copied()
                    .find(|&t| {
                        self.rules[t].head == l
                            && self.rules[t].strength.supports()
                            && self.body_all(t, PP)
                            && self.superior.contains(&(t, s))
                    })
                    .expect("applicable attacker of a +∂ literal is overridden");
                DefeatedAttacker {
                    attacker: self.rule_ref(s),
                    reason: DefeatReason::DefeatedBy(self.rule_ref(winner)),
                    premises: self.rules[s]
                        .body
                        .iter()
                        .map(|&b| self.trace_defeasible(b, path))
                        .collect(),
                }
            })
            .collect();
        path.pop();
        ProofRecord {
            conclusion,
            supporting_rule: Some(self.rule_ref(rule)),
            premises,
            defeated_attackers,
        }
    }
}

fn leaf(conclusion: Conclusion) -> ProofRecord {
    ProofRecord {
        conclusion,
        supporting_rule: None,
        premises: Vec::new(),
        defeated_attackers: Vec::new(),
    }
}
