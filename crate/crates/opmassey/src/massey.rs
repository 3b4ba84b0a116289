//! Defining systems and operadic Massey products.
//!
//! A cooperation of weight `w >= 1` over a presented operad, applied to
//! homology classes of a dg algebra over that operad, determines a tower of
//! boundary conditions indexed by the faces produced by the splitting
//! differential. A defining system solves every condition below the top;
//! the top condition of a solved system is then a cycle, and its homology
//! class is the Massey product of the classes relative to that system.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{AlgebraError, AlgebraMorphism, DgAlgebra, HomologyData};
use crate::kdual::{Cooperad, Cooperation, KdualError};
use crate::linalg::{invert, solve, LinalgError, Mat, SVec, Subspace};
use crate::operad::{OperadError, OperadMorphism};
use crate::trees::TreeVec;
use crate::{rint, Rat};

#[derive(thiserror::Error, Debug)]
pub enum MasseyError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Kdual(#[from] KdualError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("expected {expected} classes, got {got}")]
    ClassCount { expected: usize, got: usize },
    #[error("class {0} is not degree-homogeneous")]
    InhomogeneousClass(usize),
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
    #[error("assignment is missing key {0}")]
    MissingKey(String),
    #[error("choice at key {0} is not an admissible shift")]
    BadChoice(String),
    #[error("morphism is not a quasi-isomorphism")]
    NotQuasiIso,
    #[error("cooperation maps to zero under the dual morphism")]
    ZeroImage,
    #[error("cooperation has weight {0}, expected 2")]
    NotWeightTwo(usize),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// Parity sign as a rational, with negative exponents allowed.
fn sign(n: i64) -> Rat {
    if n.rem_euclid(2) == 0 {
        rint(1)
    } else {
        rint(-1)
    }
}

/// Degree of the operation underlying a weight-one combination. The terms of
/// such a combination carry generators of a single total degree.
fn op_degree(zeta: &TreeVec) -> i64 {
    debug_assert!(
        zeta.terms
            .windows(2)
            .all(|w| w[0].1.degree() == w[1].1.degree()),
        "weight-one combination mixes operation degrees"
    );
    zeta.terms.first().map(|(_, t)| t.degree()).unwrap_or(0)
}

/// Face label inside an indexing set: the identity cooperation or one basis
/// element of a cooperad cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CoopRef {
    Identity,
    Cell {
        arity: usize,
        weight: usize,
        index: usize,
    },
}

impl CoopRef {
    /// Classifies a scalar multiple of a basis cooperation. The scale is
    /// deliberately ignored: a key names a face, not a magnitude.
    pub fn from_cooperation(c: &Cooperation) -> Result<CoopRef, MasseyError> {
        if c.is_identity() {
            return Ok(CoopRef::Identity);
        }
        let pairs: Vec<(usize, Rat)> = c.coords.iter().cloned().collect();
        match pairs.as_slice() {
            [(i, c0)] if *c0 != rint(0) => Ok(CoopRef::Cell {
                arity: c.arity(),
                weight: c.weight(),
                index: *i,
            }),
            _ => Err(MasseyError::Internal(
                "split part is not a multiple of a basis cooperation".to_string(),
            )),
        }
    }

    pub fn weight(&self) -> usize {
        match self {
            CoopRef::Identity => 0,
            CoopRef::Cell { weight, .. } => *weight,
        }
    }

    /// The cooperation this label stands for.
    pub fn cooperation(&self, coop: &Cooperad) -> Cooperation {
        match self {
            CoopRef::Identity => coop.identity_cooperation(),
            CoopRef::Cell {
                arity,
                weight,
                index,
            } => coop.element(*arity, *weight, SVec::unit(*index)),
        }
    }
}

/// One member of an indexing set: a face cooperation together with the
/// sorted 1-based global input labels it consumes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexKey {
    pub coop: CoopRef,
    pub slots: Vec<usize>,
}

impl IndexKey {
    pub fn weight(&self) -> usize {
        self.coop.weight()
    }

    /// Degree of the chain a defining system assigns to this key: the sum of
    /// the consumed class degrees plus the face degree.
    pub fn degree(&self, coop: &Cooperad, class_degrees: &[i64]) -> i64 {
        let face = match &self.coop {
            CoopRef::Identity => 0,
            c => c.cooperation(coop).degree(),
        };
        self.slots
            .iter()
            .map(|&s| class_degrees[s - 1])
            .sum::<i64>()
            + face
    }

    /// Key encoding used in reports: `(name, k1,...,kr)` where the name is a
    /// distinguished element of the cell when the face is one, otherwise a
    /// positional basis label.
    pub fn label(&self, coop: &Cooperad) -> String {
        let name = match &self.coop {
            CoopRef::Identity => "id".to_string(),
            CoopRef::Cell {
                arity,
                weight,
                index,
            } => {
                let cell = coop.cell(*arity, *weight);
                cell.named
                    .iter()
                    .find(|(_, v)| **v == SVec::unit(*index))
                    .map(|(n, _)| n.clone())
                    .unwrap_or_else(|| format!("e{}@({},{})", index, arity, weight))
            }
        };
        let slots: Vec<String> = self.slots.iter().map(|s| s.to_string()).collect();
        format!("({}, {})", name, slots.join(","))
    }
}

/// The indexing set of a cooperation: every face key whose boundary
/// condition a defining system must solve, sorted by weight.
#[derive(Clone, Debug)]
pub struct IndexingSet {
    pub keys: Vec<IndexKey>,
}

impl IndexingSet {
    pub fn contains(&self, key: &IndexKey) -> bool {
        self.keys.binary_search(key).is_ok()
    }
}

/// Computes the indexing set by closing the two production rules: faces of
/// the splitting terms of the cooperation itself, then faces of the splits
/// of every face already present, with slot tuples composed along the way.
pub fn indexing_set(coop: &Cooperad, gamma: &Cooperation) -> Result<IndexingSet, MasseyError> {
    if gamma.weight() == 0 || gamma.is_zero() {
        return Err(MasseyError::Mismatch(
            "cooperation must be nonzero of positive weight".to_string(),
        ));
    }
    let mut seen: BTreeSet<IndexKey> = BTreeSet::new();
    let mut work: Vec<IndexKey> = Vec::new();
    let top_slots: Vec<usize> = (1..=gamma.arity()).collect();
    expand_faces(coop, gamma, &top_slots, &mut seen, &mut work)?;
    while let Some(key) = work.pop() {
        let c = key.coop.cooperation(coop);
        expand_faces(coop, &c, &key.slots, &mut seen, &mut work)?;
    }
    let mut keys: Vec<IndexKey> = seen.into_iter().collect();
    keys.sort_by_key(|k| (k.weight(), k.clone()));
    Ok(IndexingSet { keys })
}

fn expand_faces(
    coop: &Cooperad,
    c: &Cooperation,
    slots: &[usize],
    seen: &mut BTreeSet<IndexKey>,
    work: &mut Vec<IndexKey>,
) -> Result<(), MasseyError> {
    for term in coop.massey_d(c)? {
        for (part, block) in term.parts.iter().zip(&term.slots) {
            let global: Vec<usize> = block.iter().map(|&l| slots[l - 1]).collect();
            let key = IndexKey {
                coop: CoopRef::from_cooperation(part)?,
                slots: global,
            };
            if seen.insert(key.clone()) && key.weight() > 0 {
                work.push(key);
            }
        }
    }
    Ok(())
}

/// One summand of a boundary condition: a coefficient, the weight-one
/// combination to evaluate, and the keys supplying its arguments in order.
struct RelationTerm {
    coeff: Rat,
    zeta: TreeVec,
    args: Vec<IndexKey>,
}

/// Exponent of the sign aligning a face's suspended inputs with its cell
/// orientation: the input in slot `l` crosses the suspensions of the later
/// slots, and each unit of weight contributes one further transposition.
fn face_normalization(weight: usize, slots: &[usize], class_degrees: &[i64]) -> i64 {
    let v = slots.len();
    let mut g = weight as i64;
    for (j, &s) in slots.iter().enumerate() {
        g += ((v - 1 - j) as i64) * class_degrees[s - 1];
    }
    g
}

/// Expands the boundary condition attached to a face over given global
/// slots. The coefficient of each summand is the splitting coefficient,
/// signed by the Koszul cost of gathering the graded inputs into the part
/// blocks, each part's degree crossing the inputs gathered before it, and
/// the orientation normalizations of the face itself and of every part.
fn relation_terms(
    coop: &Cooperad,
    c: &Cooperation,
    slots: &[usize],
    class_degrees: &[i64],
) -> Result<Vec<RelationTerm>, MasseyError> {
    let deg_local = |l: usize| class_degrees[slots[l - 1] - 1];
    let mut out = Vec::new();
    for term in coop.massey_d(c)? {
        let word: Vec<usize> = term.slots.iter().flatten().copied().collect();
        let mut eta: i64 = face_normalization(c.weight(), slots, class_degrees);
        for p in 0..word.len() {
            for q in p + 1..word.len() {
                if word[p] > word[q] {
                    eta += deg_local(word[p]) * deg_local(word[q]);
                }
            }
        }
        let mut args = Vec::with_capacity(term.parts.len());
        let mut before: i64 = 0;
        for (j, (part, block)) in term.parts.iter().zip(&term.slots).enumerate() {
            if j > 0 {
                eta += part.degree() * before;
            }
            before += block.iter().map(|&l| deg_local(l)).sum::<i64>();
            let global: Vec<usize> = block.iter().map(|&l| slots[l - 1]).collect();
            eta += face_normalization(part.weight(), &global, class_degrees);
            args.push(IndexKey {
                coop: CoopRef::from_cooperation(part)?,
                slots: global,
            });
        }
        out.push(RelationTerm {
            coeff: term.coeff.clone() * sign(eta),
            zeta: term.zeta.clone(),
            args,
        });
    }
    Ok(out)
}

/// Assembles the right-hand side of a boundary condition from an assignment.
fn relation_value(
    coop: &Cooperad,
    algebra: &DgAlgebra,
    assignment: &BTreeMap<IndexKey, SVec<Rat>>,
    terms: &[RelationTerm],
) -> Result<SVec<Rat>, MasseyError> {
    let mut rhs = SVec::zero();
    for term in terms {
        let mut args = Vec::with_capacity(term.args.len());
        for key in &term.args {
            let v = assignment
                .get(key)
                .ok_or_else(|| MasseyError::MissingKey(key.label(coop)))?;
            args.push(v.clone());
        }
        let value = algebra.evaluate(&term.zeta, &args)?;
        rhs = rhs.add(&value.scale(&term.coeff));
    }
    Ok(rhs)
}

/// Solves `d x = rhs` and keeps the solution component in the single degree
/// compatible with a homogeneous right-hand side.
fn solve_in_degree(a: &DgAlgebra, rhs: &SVec<Rat>) -> Option<SVec<Rat>> {
    if rhs.is_zero() {
        return Some(SVec::zero());
    }
    let x = solve(&a.differential, rhs)?;
    match a.homogeneous_degree(rhs) {
        Some(d) => {
            let mut parts = a.homogeneous_parts(&x);
            Some(parts.remove(&(d + 1)).unwrap_or_else(SVec::zero))
        }
        None => Some(x),
    }
}

fn homogeneous_class_degree(
    h: &HomologyData,
    v: &SVec<Rat>,
    which: usize,
) -> Result<i64, MasseyError> {
    let mut deg = None;
    for (i, _) in v.iter() {
        let d = h.degree(*i);
        match deg {
            None => deg = Some(d),
            Some(e) if e == d => {}
            _ => return Err(MasseyError::InhomogeneousClass(which)),
        }
    }
    Ok(deg.unwrap_or(0))
}

fn check_operads_match(coop: &Cooperad, algebra: &DgAlgebra) -> Result<(), MasseyError> {
    if coop.pres().content_hash() != algebra.operad.content_hash() {
        return Err(MasseyError::Mismatch(format!(
            "algebra over {} paired with cooperad over {}",
            algebra.operad.name,
            coop.pres().name
        )));
    }
    Ok(())
}

/// A solved tower of boundary conditions below the top face of `gamma`.
#[derive(Clone, Debug)]
pub struct DefiningSystem {
    pub algebra: DgAlgebra,
    pub homology: HomologyData,
    pub gamma: Cooperation,
    pub classes: Vec<SVec<Rat>>,
    pub class_degrees: Vec<i64>,
    pub assignment: BTreeMap<IndexKey, SVec<Rat>>,
}

/// One failed check of a defining system.
#[derive(Clone, Debug)]
pub struct SystemViolation {
    pub key: String,
    pub kind: String,
    pub residual: String,
}

/// Result of checking a defining system; empty violations means valid.
#[derive(Clone, Debug, Default)]
pub struct SystemReport {
    pub violations: Vec<SystemViolation>,
}

impl SystemReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn fmt_chain(a: &DgAlgebra, v: &SVec<Rat>) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    v.iter()
        .map(|(i, c)| format!("{}*{}", c, a.basis[*i].0))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Checks every boundary condition of a defining system exactly: identity
/// keys must carry cycles representing the given classes, and each positive
/// weight key must carry a chain whose boundary equals its condition.
pub fn verify_defining_system(
    coop: &Cooperad,
    ds: &DefiningSystem,
) -> Result<SystemReport, MasseyError> {
    check_operads_match(coop, &ds.algebra)?;
    if ds.classes.len() != ds.gamma.arity() {
        return Err(MasseyError::ClassCount {
            expected: ds.gamma.arity(),
            got: ds.classes.len(),
        });
    }
    let mut report = SystemReport::default();
    let keys = indexing_set(coop, &ds.gamma)?;
    for key in &keys.keys {
        let label = key.label(coop);
        let value = match ds.assignment.get(key) {
            Some(v) => v,
            None => {
                report.violations.push(SystemViolation {
                    key: label,
                    kind: "missing-key".to_string(),
                    residual: String::new(),
                });
                continue;
            }
        };
        match &key.coop {
            CoopRef::Identity => {
                let boundary = ds.algebra.d(value);
                if !boundary.is_zero() {
                    report.violations.push(SystemViolation {
                        key: label.clone(),
                        kind: "identity-cycle".to_string(),
                        residual: fmt_chain(&ds.algebra, &boundary),
                    });
                    continue;
                }
                let class = ds.homology.class_of(value);
                let expected = &ds.classes[key.slots[0] - 1];
                if class != *expected {
                    report.violations.push(SystemViolation {
                        key: label,
                        kind: "identity-class".to_string(),
                        residual: fmt_chain(&ds.algebra, &class.sub(expected)),
                    });
                }
            }
            face => {
                let c = face.cooperation(coop);
                let terms = relation_terms(coop, &c, &key.slots, &ds.class_degrees)?;
                let rhs = match relation_value(coop, &ds.algebra, &ds.assignment, &terms) {
                    Ok(rhs) => rhs,
                    Err(MasseyError::MissingKey(_)) => {
                        report.violations.push(SystemViolation {
                            key: label,
                            kind: "unresolved-arguments".to_string(),
                            residual: String::new(),
                        });
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let residual = ds.algebra.d(value).sub(&rhs);
                if !residual.is_zero() {
                    report.violations.push(SystemViolation {
                        key: label,
                        kind: "boundary".to_string(),
                        residual: fmt_chain(&ds.algebra, &residual),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Result of attempting to build a defining system. An obstruction names the
/// first key whose condition is a cycle in a nonzero homology class.
#[derive(Clone, Debug)]
pub enum BuildOutcome {
    Built(DefiningSystem),
    Obstructed { key: IndexKey, class: SVec<Rat> },
}

/// Builds a defining system by solving conditions in increasing weight.
/// Identity keys receive the canonical representatives of the classes;
/// `choices` adds an optional shift per key, which must be a boundary at an
/// identity key and a cycle elsewhere.
pub fn build_defining_system(
    coop: &Cooperad,
    algebra: &DgAlgebra,
    gamma: &Cooperation,
    classes: &[SVec<Rat>],
    choices: &BTreeMap<IndexKey, SVec<Rat>>,
) -> Result<BuildOutcome, MasseyError> {
    check_operads_match(coop, algebra)?;
    if classes.len() != gamma.arity() {
        return Err(MasseyError::ClassCount {
            expected: gamma.arity(),
            got: classes.len(),
        });
    }
    let (homology, _) = algebra.homology_of()?;
    let mut class_degrees = Vec::with_capacity(classes.len());
    for (i, c) in classes.iter().enumerate() {
        class_degrees.push(homogeneous_class_degree(&homology, c, i)?);
    }
    let keys = indexing_set(coop, gamma)?;
    let mut assignment: BTreeMap<IndexKey, SVec<Rat>> = BTreeMap::new();
    for key in &keys.keys {
        let mut value = match &key.coop {
            CoopRef::Identity => homology.section_of(&classes[key.slots[0] - 1]),
            face => {
                let c = face.cooperation(coop);
                let terms = relation_terms(coop, &c, &key.slots, &class_degrees)?;
                let rhs = relation_value(coop, algebra, &assignment, &terms)?;
                if !algebra.d(&rhs).is_zero() {
                    return Err(MasseyError::Internal(format!(
                        "condition at {} is not a cycle",
                        key.label(coop)
                    )));
                }
                match solve_in_degree(algebra, &rhs) {
                    Some(v) => v,
                    None => {
                        return Ok(BuildOutcome::Obstructed {
                            key: key.clone(),
                            class: homology.class_of(&rhs),
                        });
                    }
                }
            }
        };
        if let Some(shift) = choices.get(key) {
            let admissible = match &key.coop {
                CoopRef::Identity => solve(&algebra.differential, shift).is_some(),
                _ => algebra.d(shift).is_zero(),
            };
            if !admissible {
                return Err(MasseyError::BadChoice(key.label(coop)));
            }
            value = value.add(shift);
        }
        assignment.insert(key.clone(), value);
    }
    Ok(BuildOutcome::Built(DefiningSystem {
        algebra: algebra.clone(),
        homology,
        gamma: gamma.clone(),
        classes: classes.to_vec(),
        class_degrees,
        assignment,
    }))
}

/// The top condition of a defining system: a cycle and its homology class.
#[derive(Clone, Debug)]
pub struct MasseyOutcome {
    pub cycle: SVec<Rat>,
    pub class: SVec<Rat>,
    pub system: DefiningSystem,
}

/// Evaluates the top boundary condition of the system's cooperation. The
/// result is a cycle whenever the system is valid; its class is the Massey
/// product relative to the system.
pub fn massey_product(coop: &Cooperad, ds: &DefiningSystem) -> Result<MasseyOutcome, MasseyError> {
    check_operads_match(coop, &ds.algebra)?;
    let top_slots: Vec<usize> = (1..=ds.gamma.arity()).collect();
    let terms = relation_terms(coop, &ds.gamma, &top_slots, &ds.class_degrees)?;
    let cycle = relation_value(coop, &ds.algebra, &ds.assignment, &terms)?;
    if !ds.algebra.d(&cycle).is_zero() {
        return Err(MasseyError::Internal(
            "top condition of a defining system is not a cycle".to_string(),
        ));
    }
    let class = ds.homology.class_of(&cycle);
    Ok(MasseyOutcome {
        cycle,
        class,
        system: ds.clone(),
    })
}

/// Massey product value set assembled from sampled defining systems. The
/// first outcome is the unshifted system. For weight-two cooperations the
/// value set is an affine subspace and `indeterminacy` spans it exactly;
/// for higher weights membership falls back to the sampled classes.
#[derive(Clone, Debug)]
pub struct MasseySet {
    pub outcomes: Vec<MasseyOutcome>,
    pub indeterminacy: Option<Subspace<Rat>>,
}

impl MasseySet {
    pub fn is_defined(&self) -> bool {
        !self.outcomes.is_empty()
    }

    pub fn classes(&self) -> Vec<SVec<Rat>> {
        self.outcomes.iter().map(|o| o.class.clone()).collect()
    }

    pub fn contains(&self, class: &SVec<Rat>) -> bool {
        let Some(base) = self.outcomes.first() else {
            return false;
        };
        match &self.indeterminacy {
            Some(span) => span.contains(&class.sub(&base.class)),
            None => self.outcomes.iter().any(|o| o.class == *class),
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&SVec::zero())
    }
}

/// Samples defining systems for `gamma` on the given classes: the canonical
/// build, then one admissible shift at a time per key. Shift outcomes whose
/// build obstructs are skipped. Returns an undefined (empty) set when the
/// canonical build is obstructed.
pub fn massey_set_sample(
    coop: &Cooperad,
    algebra: &DgAlgebra,
    gamma: &Cooperation,
    classes: &[SVec<Rat>],
    budget: usize,
) -> Result<MasseySet, MasseyError> {
    let base = match build_defining_system(coop, algebra, gamma, classes, &BTreeMap::new())? {
        BuildOutcome::Built(ds) => ds,
        BuildOutcome::Obstructed { .. } => {
            return Ok(MasseySet {
                outcomes: Vec::new(),
                indeterminacy: None,
            });
        }
    };
    let base_outcome = massey_product(coop, &base)?;
    let homology = base.homology.clone();
    let keys = indexing_set(coop, gamma)?;
    let mut outcomes = vec![base_outcome.clone()];
    let mut deltas: Vec<SVec<Rat>> = Vec::new();
    let mut seen: Vec<SVec<Rat>> = vec![base_outcome.class.clone()];
    let mut builds = 0usize;
    for key in &keys.keys {
        if builds >= budget {
            break;
        }
        let key_degree = key.degree(coop, &base.class_degrees);
        let shifts: Vec<(bool, SVec<Rat>)> = match &key.coop {
            // Representative shifts at identity keys are boundaries.
            CoopRef::Identity => (0..algebra.dim())
                .filter(|&j| algebra.degree(j) == key_degree + 1)
                .map(|j| (false, algebra.d(&SVec::unit(j))))
                .filter(|(_, b)| !b.is_zero())
                .collect(),
            // Solution shifts at positive weight keys are cycles.
            _ => (0..homology.dim())
                .filter(|&j| homology.degree(j) == key_degree)
                .map(|j| (true, homology.section_of(&SVec::unit(j))))
                .collect(),
        };
        for (is_cycle_shift, shift) in shifts {
            if builds >= budget {
                break;
            }
            builds += 1;
            let mut choices = BTreeMap::new();
            choices.insert(key.clone(), shift);
            let BuildOutcome::Built(ds) =
                build_defining_system(coop, algebra, gamma, classes, &choices)?
            else {
                continue;
            };
            let outcome = massey_product(coop, &ds)?;
            if is_cycle_shift {
                deltas.push(outcome.class.sub(&base_outcome.class));
            }
            if !seen.contains(&outcome.class) {
                seen.push(outcome.class.clone());
                outcomes.push(outcome);
            }
        }
    }
    let indeterminacy = if gamma.weight() == 2 {
        Some(Subspace::span(homology.dim(), deltas))
    } else {
        None
    };
    Ok(MasseySet {
        outcomes,
        indeterminacy,
    })
}

/// First-order Massey product oracle in the insertion convention: each
/// splitting term contributes its operation applied to representatives with
/// one argument replaced by a chosen null-homotopy, weighted by the gather
/// sign plus the outer operation degree plus the inserted operation degree
/// minus one times the degrees passed over. Returns the sampled classes,
/// canonical lifts first; empty when some term has no null-homotopy.
pub fn muro_first_order(
    coop: &Cooperad,
    algebra: &DgAlgebra,
    gamma: &Cooperation,
    classes: &[SVec<Rat>],
) -> Result<Vec<SVec<Rat>>, MasseyError> {
    check_operads_match(coop, algebra)?;
    if gamma.weight() != 2 {
        return Err(MasseyError::NotWeightTwo(gamma.weight()));
    }
    if classes.len() != gamma.arity() {
        return Err(MasseyError::ClassCount {
            expected: gamma.arity(),
            got: classes.len(),
        });
    }
    let (homology, _) = algebra.homology_of()?;
    let mut class_degrees = Vec::with_capacity(classes.len());
    for (i, c) in classes.iter().enumerate() {
        class_degrees.push(homogeneous_class_degree(&homology, c, i)?);
    }
    let reps: Vec<SVec<Rat>> = classes.iter().map(|c| homology.section_of(c)).collect();

    struct MuroTerm {
        coeff: Rat,
        zeta: TreeVec,
        args: Vec<SVec<Rat>>,
        insert_at: usize,
        lift_degree: i64,
        lift: SVec<Rat>,
    }

    let mut terms = Vec::new();
    for term in coop.massey_d(gamma)? {
        let inner = term
            .parts
            .iter()
            .position(|p| p.weight() == 1)
            .ok_or_else(|| MasseyError::Internal("weight-two split lacks an inner face".into()))?;
        let op = coop.kappa(&term.parts[inner]);
        let inner_args: Vec<SVec<Rat>> = term.slots[inner]
            .iter()
            .map(|&s| reps[s - 1].clone())
            .collect();
        let vanishing = algebra.evaluate(&op, &inner_args)?;
        let Some(lift) = solve_in_degree(algebra, &vanishing) else {
            return Ok(Vec::new());
        };
        let lift_degree = algebra
            .homogeneous_degree(&vanishing)
            .map(|d| d + 1)
            .unwrap_or(0);
        let word: Vec<usize> = term.slots.iter().flatten().copied().collect();
        let mut gamma_exp: i64 = 0;
        for p in 0..word.len() {
            for q in p + 1..word.len() {
                if word[p] > word[q] {
                    gamma_exp += class_degrees[word[p] - 1] * class_degrees[word[q] - 1];
                }
            }
        }
        gamma_exp += op_degree(&term.zeta);
        let passed: i64 = term.slots[..inner]
            .iter()
            .flatten()
            .map(|&s| class_degrees[s - 1])
            .sum();
        gamma_exp += (op_degree(&op) - 1) * passed;
        let mut args = Vec::with_capacity(term.parts.len());
        for (i, block) in term.slots.iter().enumerate() {
            if i == inner {
                args.push(SVec::zero());
            } else {
                args.push(reps[block[0] - 1].clone());
            }
        }
        terms.push(MuroTerm {
            coeff: term.coeff.clone() * sign(gamma_exp),
            zeta: term.zeta.clone(),
            args,
            insert_at: inner,
            lift_degree,
            lift,
        });
    }

    let cycle_class = |lifts: &[SVec<Rat>]| -> Result<SVec<Rat>, MasseyError> {
        let mut cycle = SVec::zero();
        for (term, lift) in terms.iter().zip(lifts) {
            let mut args = term.args.clone();
            args[term.insert_at] = lift.clone();
            let value = algebra.evaluate(&term.zeta, &args)?;
            cycle = cycle.add(&value.scale(&term.coeff));
        }
        Ok(homology.class_of(&cycle))
    };

    let base_lifts: Vec<SVec<Rat>> = terms.iter().map(|t| t.lift.clone()).collect();
    let mut classes_out = vec![cycle_class(&base_lifts)?];
    for (t, term) in terms.iter().enumerate() {
        for j in 0..homology.dim() {
            if homology.degree(j) != term.lift_degree {
                continue;
            }
            let mut lifts = base_lifts.clone();
            lifts[t] = lifts[t].add(&homology.section_of(&SVec::unit(j)));
            let class = cycle_class(&lifts)?;
            if !classes_out.contains(&class) {
                classes_out.push(class);
            }
        }
    }
    Ok(classes_out)
}

/// Matrix of the map induced on homology by a chain morphism.
fn induced_matrix(f: &AlgebraMorphism, hs: &HomologyData, ht: &HomologyData) -> Mat<Rat> {
    let mut m = Mat::zero(ht.dim(), hs.dim());
    for j in 0..hs.dim() {
        let col = ht.class_of(&f.apply(&hs.rep(j)));
        for (i, c) in col.iter() {
            m.set(*i, j, c.clone());
        }
    }
    m
}

fn same_complex(a: &DgAlgebra, b: &DgAlgebra) -> bool {
    a.basis == b.basis && a.differential == b.differential
}

/// Transports a defining system along a morphism of algebras over the same
/// operad by applying the morphism to every assigned chain.
pub fn pushforward_system(
    f: &AlgebraMorphism,
    coop: &Cooperad,
    ds: &DefiningSystem,
) -> Result<DefiningSystem, MasseyError> {
    check_operads_match(coop, &f.target)?;
    if !same_complex(&f.source, &ds.algebra) {
        return Err(MasseyError::Mismatch(
            "defining system does not live on the morphism source".to_string(),
        ));
    }
    let (ht, _) = f.target.homology_of()?;
    let induced = induced_matrix(f, &ds.homology, &ht);
    let classes: Vec<SVec<Rat>> = ds.classes.iter().map(|c| induced.apply(c)).collect();
    let assignment: BTreeMap<IndexKey, SVec<Rat>> = ds
        .assignment
        .iter()
        .map(|(k, v)| (k.clone(), f.apply(v)))
        .collect();
    Ok(DefiningSystem {
        algebra: f.target.clone(),
        homology: ht,
        gamma: ds.gamma.clone(),
        classes,
        class_degrees: ds.class_degrees.clone(),
        assignment,
    })
}

/// Lifts a defining system backwards along a quasi-isomorphism. Each key is
/// first solved in the source; the defect between its image and the target
/// assignment, corrected by the null-homotopies of lower keys propagated
/// through the boundary conditions, is a cycle whose preimage class adjusts
/// the solution. The lifted system's product maps onto the original's class.
pub fn lift_defining_system(
    f: &AlgebraMorphism,
    coop: &Cooperad,
    ds: &DefiningSystem,
) -> Result<DefiningSystem, MasseyError> {
    check_operads_match(coop, &f.source)?;
    if !same_complex(&f.target, &ds.algebra) {
        return Err(MasseyError::Mismatch(
            "defining system does not live on the morphism target".to_string(),
        ));
    }
    if !f.is_quasi_iso()? {
        return Err(MasseyError::NotQuasiIso);
    }
    let (hs, _) = f.source.homology_of()?;
    let ht = &ds.homology;
    let induced = induced_matrix(f, &hs, ht);
    let induced_inv = invert(&induced).ok_or(MasseyError::NotQuasiIso)?;
    let classes: Vec<SVec<Rat>> = ds.classes.iter().map(|c| induced_inv.apply(c)).collect();

    let keys = indexing_set(coop, &ds.gamma)?;
    let mut assignment: BTreeMap<IndexKey, SVec<Rat>> = BTreeMap::new();
    let mut corrections: BTreeMap<IndexKey, SVec<Rat>> = BTreeMap::new();
    for key in &keys.keys {
        let target_value = ds
            .assignment
            .get(key)
            .ok_or_else(|| MasseyError::MissingKey(key.label(coop)))?;
        let (lifted, defect) = match &key.coop {
            CoopRef::Identity => {
                let a = hs.section_of(&classes[key.slots[0] - 1]);
                let e = f.apply(&a).sub(target_value);
                (a, e)
            }
            face => {
                let c = face.cooperation(coop);
                let terms = relation_terms(coop, &c, &key.slots, &ds.class_degrees)?;
                let rhs = relation_value(coop, &f.source, &assignment, &terms)?;
                let a = solve_in_degree(&f.source, &rhs).ok_or_else(|| {
                    MasseyError::Internal(format!(
                        "lifted condition at {} is not exact",
                        key.label(coop)
                    ))
                })?;
                // Homotopy correction: replace arguments one at a time by
                // their null-homotopies, with a suspension sign in front of
                // each replacement position.
                let mut q = SVec::zero();
                for term in &terms {
                    let zdeg = op_degree(&term.zeta);
                    let mut passed: i64 = 0;
                    for j in 0..term.args.len() {
                        let mut args = Vec::with_capacity(term.args.len());
                        for (l, arg_key) in term.args.iter().enumerate() {
                            let v = if l < j {
                                f.apply(assignment.get(arg_key).ok_or_else(|| {
                                    MasseyError::MissingKey(arg_key.label(coop))
                                })?)
                            } else if l == j {
                                corrections
                                    .get(arg_key)
                                    .cloned()
                                    .ok_or_else(|| MasseyError::MissingKey(arg_key.label(coop)))?
                            } else {
                                ds.assignment
                                    .get(arg_key)
                                    .cloned()
                                    .ok_or_else(|| MasseyError::MissingKey(arg_key.label(coop)))?
                            };
                            args.push(v);
                        }
                        let value = ds.algebra.evaluate(&term.zeta, &args)?;
                        let coeff = term.coeff.clone() * sign(zdeg + passed);
                        q = q.add(&value.scale(&coeff));
                        passed += term.args[j].degree(coop, &ds.class_degrees);
                    }
                }
                let e = f.apply(&a).sub(target_value).add(&q);
                (a, e)
            }
        };
        if !ds.algebra.d(&defect).is_zero() {
            return Err(MasseyError::Internal(format!(
                "lift defect at {} is not a cycle",
                key.label(coop)
            )));
        }
        let adjust = hs.section_of(&induced_inv.apply(&ht.class_of(&defect)));
        let correction =
            solve_in_degree(&ds.algebra, &f.apply(&adjust).sub(&defect)).ok_or_else(|| {
                MasseyError::Internal(format!(
                    "lift correction at {} is not exact",
                    key.label(coop)
                ))
            })?;
        assignment.insert(key.clone(), lifted.sub(&adjust));
        corrections.insert(key.clone(), correction);
    }
    Ok(DefiningSystem {
        algebra: f.source.clone(),
        homology: hs,
        gamma: ds.gamma.clone(),
        classes,
        class_degrees: ds.class_degrees.clone(),
        assignment,
    })
}

/// Restricts an algebra along an operad morphism: the same complex, with
/// each source generator acting through the evaluation of its image.
pub fn pullback_algebra(m: &OperadMorphism, b: &DgAlgebra) -> Result<DgAlgebra, MasseyError> {
    if m.target.content_hash() != b.operad.content_hash() {
        return Err(MasseyError::Mismatch(format!(
            "algebra over {} restricted along a morphism into {}",
            b.operad.name, m.target.name
        )));
    }
    let dim = b.dim();
    let mut actions: BTreeMap<String, BTreeMap<Vec<usize>, SVec<Rat>>> = BTreeMap::new();
    for g in &m.source.generators {
        let img = &m.images[&g.name];
        let mut table: BTreeMap<Vec<usize>, SVec<Rat>> = BTreeMap::new();
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..g.arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    (0..dim).map(move |i| {
                        let mut u = t.clone();
                        u.push(i);
                        u
                    })
                })
                .collect();
        }
        for tuple in tuples {
            let args: Vec<SVec<Rat>> = tuple.iter().map(|&i| SVec::unit(i)).collect();
            let value = b.evaluate(img, &args)?;
            if !value.is_zero() {
                table.insert(tuple, value);
            }
        }
        if !table.is_empty() {
            actions.insert(g.name.clone(), table);
        }
    }
    let a = DgAlgebra::new(
        m.source.clone(),
        b.basis.clone(),
        b.differential.clone(),
        actions,
    )?;
    let report = a.validate();
    if !report.is_valid() {
        return Err(MasseyError::Mismatch(format!(
            "restricted algebra violates {} axiom checks",
            report.violations.len()
        )));
    }
    Ok(a)
}

/// Comparison of a Massey product set with the one attached to the image
/// cooperation under the dual morphism, computed on the same complex.
#[derive(Clone, Debug)]
pub struct PullbackReport {
    pub image: Cooperation,
    pub source: MasseySet,
    pub target: MasseySet,
    pub included: bool,
}

/// Samples the product set of `gamma` on the restricted algebra and the
/// product set of its image cooperation on the original algebra, then checks
/// that every sampled source class lies in the target set. Both sets share
/// the homology of the common complex, so classes compare coordinatewise.
pub fn pullback_massey(
    m: &OperadMorphism,
    source_coop: &Cooperad,
    target_coop: &Cooperad,
    b: &DgAlgebra,
    gamma: &Cooperation,
    classes: &[SVec<Rat>],
    budget: usize,
) -> Result<PullbackReport, MasseyError> {
    let image = crate::kdual::induced_map(m, source_coop, target_coop, gamma)?;
    if image.is_zero() {
        return Err(MasseyError::ZeroImage);
    }
    let a = pullback_algebra(m, b)?;
    let source = massey_set_sample(source_coop, &a, gamma, classes, budget)?;
    let target = massey_set_sample(target_coop, b, &image, classes, budget)?;
    let included = source
        .outcomes
        .iter()
        .all(|o| target.contains(&o.class));
    Ok(PullbackReport {
        image,
        source,
        target,
        included,
    })
}
