//! Finite-dimensional differential graded algebras over an operad
//! presentation: structure tables, axiom checking, evaluation of arbitrary
//! operad elements, homology with its induced structure, and morphisms.
//!
//! An algebra is given by an explicit graded basis, a differential matrix,
//! and one multilinear action table per generating operation. Everything
//! downstream (secondary operations, spectral sequences, transfer) consumes
//! algebras through [`DgAlgebra::evaluate`], which extends the generator
//! tables to arbitrary tree monomials with Koszul signs.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::linalg::{homology, LinalgError, Mat, SVec};
use crate::operad::{OperadError, Presentation};
use crate::trees::{act, Node, Perm, TreeError, TreeMonomial, TreeVec};
use crate::{rint, Rat};

/// Errors raised while building or evaluating algebras.
#[derive(thiserror::Error, Debug)]
pub enum AlgebraError {
    #[error("unknown basis element {0}")]
    UnknownBasis(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("operation of arity {expected} applied to {got} arguments")]
    ArityMismatch { expected: usize, got: usize },
    #[error("malformed algebra: {0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Koszul sign of rearranging graded slots into `word` order: every inverted
/// pair of labels crosses once.
fn word_sign(word: &[usize], deg_of_label: &[i64]) -> i64 {
    let mut acc = 0i64;
    for p in 0..word.len() {
        for q in p + 1..word.len() {
            if word[p] > word[q] {
                acc += deg_of_label[word[p] - 1] * deg_of_label[word[q] - 1];
            }
        }
    }
    if acc % 2 == 0 {
        1
    } else {
        -1
    }
}

/// One failed axiom instance: which check, where, and the nonzero residual.
#[derive(Clone, Debug)]
pub struct Violation {
    pub check: &'static str,
    pub location: String,
    pub residual: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: residual {}", self.check, self.location, self.residual)
    }
}

/// Outcome of checking every algebra axiom on every basis tuple.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A finite-dimensional dg algebra over the operad presented by `operad`.
///
/// `differential` stores d(e_j) in column j and lowers degree by one. The
/// action table of a generator maps each tuple of basis indices to the value
/// on those basis elements; absent tuples are zero.
#[derive(Clone, Debug)]
pub struct DgAlgebra {
    pub operad: Presentation,
    pub basis: Vec<(String, i64)>,
    pub differential: Mat<Rat>,
    pub actions: BTreeMap<String, BTreeMap<Vec<usize>, SVec<Rat>>>,
}

impl DgAlgebra {
    /// Builds an algebra after shape checks: square differential, known
    /// generators, tuples of the right arity with indices in range. Axioms
    /// are checked separately by [`DgAlgebra::validate`].
    pub fn new(
        operad: Presentation,
        basis: Vec<(String, i64)>,
        differential: Mat<Rat>,
        actions: BTreeMap<String, BTreeMap<Vec<usize>, SVec<Rat>>>,
    ) -> Result<DgAlgebra, AlgebraError> {
        let dim = basis.len();
        let mut seen = BTreeMap::new();
        for (i, (name, _)) in basis.iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(AlgebraError::Shape(format!("duplicate basis name {name}")));
            }
        }
        if differential.nrows() != dim || differential.ncols() != dim {
            return Err(AlgebraError::Shape(format!(
                "differential is {}x{}, expected {dim}x{dim}",
                differential.nrows(),
                differential.ncols()
            )));
        }
        for (gen, table) in &actions {
            let g = operad
                .gen(gen)
                .ok_or_else(|| AlgebraError::UnknownGenerator(gen.clone()))?;
            for (tuple, out) in table {
                if tuple.len() != g.arity {
                    return Err(AlgebraError::Shape(format!(
                        "action of {gen} keyed by a {}-tuple, arity is {}",
                        tuple.len(),
                        g.arity
                    )));
                }
                if tuple.iter().any(|&i| i >= dim) || out.iter().any(|(i, _)| *i >= dim) {
                    return Err(AlgebraError::Shape(format!(
                        "action of {gen} references a basis index out of range"
                    )));
                }
            }
        }
        Ok(DgAlgebra { operad, basis, differential, actions })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.basis[i].1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|(n, _)| n == name)
    }

    /// Degree of a nonzero homogeneous vector; `None` for zero or mixed.
    pub fn homogeneous_degree(&self, v: &SVec<Rat>) -> Option<i64> {
        let mut deg = None;
        for (i, _) in v.iter() {
            match deg {
                None => deg = Some(self.degree(*i)),
                Some(d) if d != self.degree(*i) => return None,
                _ => {}
            }
        }
        deg
    }

    /// Splits a vector into its homogeneous components by degree.
    pub fn homogeneous_parts(&self, v: &SVec<Rat>) -> BTreeMap<i64, SVec<Rat>> {
        let mut parts: BTreeMap<i64, SVec<Rat>> = BTreeMap::new();
        for (i, c) in v.iter() {
            parts
                .entry(self.degree(*i))
                .or_insert_with(SVec::zero)
                .0
                .push((*i, c.clone()));
        }
        parts
    }

    pub fn d(&self, v: &SVec<Rat>) -> SVec<Rat> {
        self.differential.apply(v)
    }

    /// Multilinear extension of one generator table.
    pub fn apply_generator(
        &self,
        gen: &str,
        args: &[SVec<Rat>],
    ) -> Result<SVec<Rat>, AlgebraError> {
        let g = self
            .operad
            .gen(gen)
            .ok_or_else(|| AlgebraError::UnknownGenerator(gen.to_string()))?;
        if args.len() != g.arity {
            return Err(AlgebraError::ArityMismatch { expected: g.arity, got: args.len() });
        }
        let empty = BTreeMap::new();
        let table = self.actions.get(gen).unwrap_or(&empty);
        let mut out = SVec::zero();
        let mut tuple = vec![0usize; args.len()];
        let mut coeffs = vec![Rat::zero(); args.len()];
        fn expand(
            args: &[SVec<Rat>],
            pos: usize,
            tuple: &mut Vec<usize>,
            coeffs: &mut Vec<Rat>,
            table: &BTreeMap<Vec<usize>, SVec<Rat>>,
            out: &mut SVec<Rat>,
        ) {
            if pos == args.len() {
                if let Some(val) = table.get(tuple) {
                    let c = coeffs.iter().fold(rint(1), |a, b| a * b);
                    *out = out.add_scaled(&c, val);
                }
                return;
            }
            for (i, c) in args[pos].iter() {
                tuple[pos] = *i;
                coeffs[pos] = c.clone();
                expand(args, pos + 1, tuple, coeffs, table, out);
            }
        }
        expand(args, 0, &mut tuple, &mut coeffs, table, &mut out);
        Ok(out)
    }

    /// Evaluates one tree monomial on homogeneous arguments indexed by leaf
    /// label. Two Koszul sign sources: sorting the argument tensor into leaf
    /// word order, and subtree operators crossing the argument blocks of
    /// their left siblings.
    fn evaluate_monomial_homogeneous(
        &self,
        t: &TreeMonomial,
        args: &[SVec<Rat>],
        degs: &[i64],
    ) -> Result<SVec<Rat>, AlgebraError> {
        struct Walk<'a> {
            alg: &'a DgAlgebra,
            ordered: &'a [&'a SVec<Rat>],
            block_degs: &'a [i64],
            next: usize,
        }
        impl Walk<'_> {
            // Returns (value, consumed block degree, operator degree, sign exponent).
            fn go(&mut self, node: &Node) -> Result<(SVec<Rat>, i64, i64, i64), AlgebraError> {
                match node {
                    Node::Leaf(_) => {
                        let v = self.ordered[self.next].clone();
                        let d = self.block_degs[self.next];
                        self.next += 1;
                        Ok((v, d, 0, 0))
                    }
                    Node::Vertex(g, children) => {
                        let mut vals = Vec::with_capacity(children.len());
                        let mut block = 0i64;
                        let mut op = g.degree;
                        let mut sign = 0i64;
                        for child in children {
                            let (v, b, o, s) = self.go(child)?;
                            sign += s + o * block;
                            block += b;
                            op += o;
                            vals.push(v);
                        }
                        let out = self.alg.apply_generator(&g.name, &vals)?;
                        Ok((out, block, op, sign))
                    }
                }
            }
        }
        let word = t.leaf_word();
        let sort_sign = word_sign(&word, degs);
        let ordered: Vec<&SVec<Rat>> = word.iter().map(|&l| &args[l - 1]).collect();
        let block_degs: Vec<i64> = word.iter().map(|&l| degs[l - 1]).collect();
        let mut walk = Walk { alg: self, ordered: &ordered, block_degs: &block_degs, next: 0 };
        let (val, _, _, exp) = walk.go(&t.root)?;
        let sign = if exp % 2 == 0 { sort_sign } else { -sort_sign };
        Ok(val.scale(&rint(sign)))
    }

    /// Evaluates an operad element on algebra elements. Multilinear and
    /// Koszul-sign-correct; arguments of mixed degree are expanded into their
    /// homogeneous components first.
    pub fn evaluate(&self, op: &TreeVec, args: &[SVec<Rat>]) -> Result<SVec<Rat>, AlgebraError> {
        if args.len() != op.arity {
            return Err(AlgebraError::ArityMismatch { expected: op.arity, got: args.len() });
        }
        let split: Vec<Vec<SVec<Rat>>> = args
            .iter()
            .map(|a| self.homogeneous_parts(a).into_values().collect::<Vec<_>>())
            .collect();
        if split.iter().any(|p| p.is_empty()) {
            return Ok(SVec::zero());
        }
        let mut total = SVec::zero();
        let mut choice = vec![0usize; args.len()];
        loop {
            let current: Vec<&SVec<Rat>> =
                choice.iter().enumerate().map(|(k, &i)| &split[k][i]).collect();
            let degs: Vec<i64> = current
                .iter()
                .map(|v| self.homogeneous_degree(v).expect("split parts are homogeneous"))
                .collect();
            for (c, t) in &op.terms {
                let owned: Vec<SVec<Rat>> = current.iter().map(|v| (*v).clone()).collect();
                let v = self.evaluate_monomial_homogeneous(t, &owned, &degs)?;
                total = total.add_scaled(c, &v);
            }
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return Ok(total);
                }
                choice[k] += 1;
                if choice[k] < split[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    fn basis_tuples(&self, arity: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            let mut next = Vec::new();
            for t in &out {
                for i in 0..self.dim() {
                    let mut u = t.clone();
                    u.push(i);
                    next.push(u);
                }
            }
            out = next;
        }
        out
    }

    fn tuple_name(&self, tuple: &[usize]) -> String {
        tuple.iter().map(|&i| self.basis[i].0.as_str()).collect::<Vec<_>>().join(",")
    }

    fn describe(&self, v: &SVec<Rat>) -> String {
        if v.is_zero() {
            return "0".to_string();
        }
        v.iter()
            .map(|(i, c)| format!("{c}*{}", self.basis[*i].0))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Checks every axiom on every basis tuple: differential degree and
    /// square, action degrees, the Leibniz rule per generator, the declared
    /// generator symmetries, and every presentation relation.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let dim = self.dim();

        for j in 0..dim {
            let dj = self.differential.column(j);
            for (i, _) in dj.iter() {
                if self.degree(*i) != self.degree(j) - 1 {
                    report.violations.push(Violation {
                        check: "differential-degree",
                        location: self.basis[j].0.clone(),
                        residual: format!("component on {}", self.basis[*i].0),
                    });
                }
            }
            let ddj = self.d(&dj);
            if !ddj.is_zero() {
                report.violations.push(Violation {
                    check: "d-squared",
                    location: self.basis[j].0.clone(),
                    residual: self.describe(&ddj),
                });
            }
        }

        for (gen, table) in &self.actions {
            let g = self.operad.gen(gen).expect("checked at construction");
            for (tuple, out) in table {
                let want: i64 = tuple.iter().map(|&i| self.degree(i)).sum::<i64>() + g.degree;
                for (i, _) in out.iter() {
                    if self.degree(*i) != want {
                        report.violations.push(Violation {
                            check: "action-degree",
                            location: format!("{gen}({})", self.tuple_name(tuple)),
                            residual: format!("component on {}", self.basis[*i].0),
                        });
                    }
                }
            }
        }

        // Leibniz: d(g(e_1..e_k)) = sum_t (-1)^{|g| + |e_1|+..+|e_{t-1}|}
        // g(e_1,..,d e_t,..,e_k).
        let gens: Vec<_> = self.operad.generators.clone();
        for g in &gens {
            for tuple in self.basis_tuples(g.arity) {
                let args: Vec<SVec<Rat>> = tuple.iter().map(|&i| SVec::unit(i)).collect();
                let lhs = self.d(&self.apply_generator(&g.name, &args).expect("shape checked"));
                let mut rhs = SVec::zero();
                let mut before = g.degree;
                for t in 0..tuple.len() {
                    let mut moved = args.clone();
                    moved[t] = self.d(&args[t]);
                    let term = self.apply_generator(&g.name, &moved).expect("shape checked");
                    let sign = if before % 2 == 0 { 1 } else { -1 };
                    rhs = rhs.add_scaled(&rint(sign), &term);
                    before += self.degree(tuple[t]);
                }
                let residual = lhs.sub(&rhs);
                if !residual.is_zero() {
                    report.violations.push(Violation {
                        check: "leibniz",
                        location: format!("{}({})", g.name, self.tuple_name(&tuple)),
                        residual: self.describe(&residual),
                    });
                }
            }
        }

        // Declared symmetries, as identities of operations evaluated on
        // every tuple.
        for ((gen, i), image) in &self.operad.symmetry {
            let g = self.operad.gen(gen).expect("validated presentation");
            let mut images = (1..=g.arity).collect::<Vec<_>>();
            images.swap(i - 1, *i);
            let sigma = Perm::from_images(images).expect("adjacent transposition");
            let acted = act(&sigma, &TreeVec::monomial(rint(1), TreeMonomial::corolla(g)))
                .expect("arity matches");
            for tuple in self.basis_tuples(g.arity) {
                let args: Vec<SVec<Rat>> = tuple.iter().map(|&i| SVec::unit(i)).collect();
                let lhs = self.evaluate(&acted, &args).expect("shape checked");
                let mut rhs = SVec::zero();
                for (c, h) in image {
                    let term = self.apply_generator(h, &args).expect("shape checked");
                    rhs = rhs.add_scaled(c, &term);
                }
                let residual = lhs.sub(&rhs);
                if !residual.is_zero() {
                    report.violations.push(Violation {
                        check: "symmetry",
                        location: format!("{gen}.s{i}({})", self.tuple_name(&tuple)),
                        residual: self.describe(&residual),
                    });
                }
            }
        }

        for (r, rel) in self.operad.relations.iter().enumerate() {
            for tuple in self.basis_tuples(rel.arity) {
                let args: Vec<SVec<Rat>> = tuple.iter().map(|&i| SVec::unit(i)).collect();
                let val = self.evaluate(rel, &args).expect("shape checked");
                if !val.is_zero() {
                    report.violations.push(Violation {
                        check: "relation",
                        location: format!("relation {r} on ({})", self.tuple_name(&tuple)),
                        residual: self.describe(&val),
                    });
                }
            }
        }

        report
    }

    /// Homology with explicit projection and section, plus the induced
    /// algebra structure on it (zero differential).
    pub fn homology_of(&self) -> Result<(HomologyData, DgAlgebra), AlgebraError> {
        let lin = homology(&self.differential, &self.differential)?;
        let mut h_basis = Vec::with_capacity(lin.dim);
        for i in 0..lin.dim {
            let rep = lin.rep(i);
            let deg = self
                .homogeneous_degree(&rep)
                .expect("graded differential yields homogeneous representatives");
            h_basis.push((format!("h{i}"), deg));
        }
        let data = HomologyData {
            h_basis,
            projection: lin.projection.clone(),
            section: lin.section.clone(),
        };

        let hdim = data.h_basis.len();
        let mut actions: BTreeMap<String, BTreeMap<Vec<usize>, SVec<Rat>>> = BTreeMap::new();
        for g in &self.operad.generators {
            let mut table = BTreeMap::new();
            let mut tuples = vec![Vec::new()];
            for _ in 0..g.arity {
                let mut next = Vec::new();
                for t in &tuples {
                    for i in 0..hdim {
                        let mut u = t.clone();
                        u.push(i);
                        next.push(u);
                    }
                }
                tuples = next;
            }
            for tuple in tuples {
                let args: Vec<SVec<Rat>> = tuple.iter().map(|&i| data.rep(i)).collect();
                let val = self.apply_generator(&g.name, &args)?;
                let class = data.class_of(&val);
                if !class.is_zero() {
                    table.insert(tuple, class);
                }
            }
            if !table.is_empty() {
                actions.insert(g.name.clone(), table);
            }
        }
        let h_alg = DgAlgebra::new(
            self.operad.clone(),
            data.h_basis.clone(),
            Mat::zero(hdim, hdim),
            actions,
        )?;
        Ok((data, h_alg))
    }
}

/// Homology of an algebra: named graded basis plus the projection and
/// section matrices of the underlying chain-level computation.
#[derive(Clone, Debug)]
pub struct HomologyData {
    pub h_basis: Vec<(String, i64)>,
    pub projection: Mat<Rat>,
    pub section: Mat<Rat>,
}

impl HomologyData {
    pub fn dim(&self) -> usize {
        self.h_basis.len()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.h_basis[i].1
    }

    /// Chain-level representative of the i-th class.
    pub fn rep(&self, i: usize) -> SVec<Rat> {
        self.section.column(i)
    }

    /// Cycle representative of a class given by coordinates.
    pub fn section_of(&self, class: &SVec<Rat>) -> SVec<Rat> {
        self.section.apply(class)
    }

    /// Class coordinates of a chain; vanishes on boundaries.
    pub fn class_of(&self, chain: &SVec<Rat>) -> SVec<Rat> {
        self.projection.apply(chain)
    }
}

/// A degree-zero map of algebras over the same presentation.
#[derive(Clone, Debug)]
pub struct AlgebraMorphism {
    pub source: DgAlgebra,
    pub target: DgAlgebra,
    pub matrix: Mat<Rat>,
}

impl AlgebraMorphism {
    pub fn new(
        source: DgAlgebra,
        target: DgAlgebra,
        matrix: Mat<Rat>,
    ) -> Result<AlgebraMorphism, AlgebraError> {
        if source.operad.name != target.operad.name {
            return Err(AlgebraError::Shape(format!(
                "morphism between algebras over {} and {}",
                source.operad.name, target.operad.name
            )));
        }
        if matrix.nrows() != target.dim() || matrix.ncols() != source.dim() {
            return Err(AlgebraError::Shape(format!(
                "morphism matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                target.dim(),
                source.dim()
            )));
        }
        Ok(AlgebraMorphism { source, target, matrix })
    }

    pub fn apply(&self, v: &SVec<Rat>) -> SVec<Rat> {
        self.matrix.apply(v)
    }

    /// Checks degree preservation, the chain-map identity, and commutation
    /// with every generator action on all basis tuples.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for j in 0..self.source.dim() {
            let fj = self.matrix.column(j);
            for (i, _) in fj.iter() {
                if self.target.degree(*i) != self.source.degree(j) {
                    report.violations.push(Violation {
                        check: "morphism-degree",
                        location: self.source.basis[j].0.clone(),
                        residual: format!("component on {}", self.target.basis[*i].0),
                    });
                }
            }
            let residual = self.target.d(&fj).sub(&self.apply(&self.source.d(&SVec::unit(j))));
            if !residual.is_zero() {
                report.violations.push(Violation {
                    check: "chain-map",
                    location: self.source.basis[j].0.clone(),
                    residual: self.target.describe(&residual),
                });
            }
        }
        for g in &self.source.operad.generators {
            for tuple in self.source.basis_tuples(g.arity) {
                let args: Vec<SVec<Rat>> = tuple.iter().map(|&i| SVec::unit(i)).collect();
                let lhs = self
                    .apply(&self.source.apply_generator(&g.name, &args).expect("shape checked"));
                let mapped: Vec<SVec<Rat>> = args.iter().map(|a| self.apply(a)).collect();
                let rhs = self.target.apply_generator(&g.name, &mapped).expect("shape checked");
                let residual = lhs.sub(&rhs);
                if !residual.is_zero() {
                    report.violations.push(Violation {
                        check: "action-commutes",
                        location: format!("{}({})", g.name, self.source.tuple_name(&tuple)),
                        residual: self.target.describe(&residual),
                    });
                }
            }
        }
        report
    }

    /// True when the induced map on homology is an isomorphism.
    pub fn is_quasi_iso(&self) -> Result<bool, AlgebraError> {
        let (hs, _) = self.source.homology_of()?;
        let (ht, _) = self.target.homology_of()?;
        if hs.dim() != ht.dim() {
            return Ok(false);
        }
        let induced = ht.projection.mul(&self.matrix).mul(&hs.section);
        Ok(crate::linalg::image(&induced).dim() == hs.dim())
    }
}
