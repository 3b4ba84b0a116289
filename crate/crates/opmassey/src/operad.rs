//! Quadratic operad presentations and their truncated quotient bases.
//!
//! A presentation consists of generating operations, an optional symmetric
//! action table per generator, and weight-2 relation vectors. The operad it
//! presents is computed cell by cell: each (arity, weight) component is the
//! raw planar tree span modulo the lifted vertex symmetries and the operadic
//! ideal generated by the relations. All quotients are exact over the
//! rationals, so cell dimensions are certificates, not approximations.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::linalg::{quotient, HomologyData, Mat, Rref, SVec, Subspace};
use crate::trees::{
    act, act_monomial, compose_all, enumerate_monomials, graft_vec, GenSym, Node, Perm,
    TreeError, TreeMonomial, TreeVec,
};
use crate::{rint, Rat};

/// Errors raised while loading or computing with a presentation.
#[derive(thiserror::Error, Debug)]
pub enum OperadError {
    #[error("presentation has no generators")]
    NoGenerators,
    #[error("generator {0} has arity 0; nullary operations are excluded")]
    Nullary(String),
    #[error("duplicate generator name {0}")]
    DuplicateGenerator(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("unknown builtin operad {0}")]
    UnknownBuiltin(String),
    #[error("symmetry table for {gen}: {reason}")]
    BadSymmetry { gen: String, reason: String },
    #[error("relation {index}: {reason}")]
    BadRelation { index: usize, reason: String },
    #[error("morphism image for {gen}: {reason}")]
    BadMorphism { gen: String, reason: String },
    #[error("zero denominator in a rational coefficient")]
    ZeroDenominator,
    #[error("malformed operad file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Nested composition expression: either a leaf input or a named operation
/// applied to subexpressions. This is the wire format for tree monomials.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum TreeJson {
    Leaf { leaf: usize },
    Op { op: String, args: Vec<TreeJson> },
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct GenJson {
    name: String,
    arity: usize,
    degree: i64,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct SymTermJson {
    gen: String,
    coeff: [i64; 2],
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct RelTermJson {
    coeff: [i64; 2],
    tree: TreeJson,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct PresentationJson {
    name: String,
    generators: Vec<GenJson>,
    #[serde(default)]
    symmetry: BTreeMap<String, BTreeMap<String, Vec<SymTermJson>>>,
    #[serde(default)]
    relations: Vec<Vec<RelTermJson>>,
}

fn rat_pair(p: [i64; 2]) -> Result<Rat, OperadError> {
    if p[1] == 0 {
        return Err(OperadError::ZeroDenominator);
    }
    Ok(Rat::new(p[0].into(), p[1].into()))
}

/// Converts a nested expression into a tree monomial over the given symbols.
pub fn tree_from_json(
    j: &TreeJson,
    gens: &BTreeMap<String, GenSym>,
) -> Result<TreeMonomial, String> {
    fn build(j: &TreeJson, gens: &BTreeMap<String, GenSym>) -> Result<Node, String> {
        match j {
            TreeJson::Leaf { leaf } => {
                if *leaf == 0 {
                    return Err("leaf labels are 1-based".to_string());
                }
                Ok(Node::Leaf(*leaf))
            }
            TreeJson::Op { op, args } => {
                let g = gens.get(op).ok_or_else(|| format!("unknown operation {op}"))?;
                if args.len() != g.arity {
                    return Err(format!(
                        "operation {op} takes {} arguments, found {}",
                        g.arity,
                        args.len()
                    ));
                }
                let children = args.iter().map(|a| build(a, gens)).collect::<Result<_, _>>()?;
                Ok(Node::Vertex(g.clone(), children))
            }
        }
    }
    let root = build(j, gens)?;
    let t = TreeMonomial { root };
    t.leaf_perm().map_err(|_| format!("leaf labels of {t} are not a bijection"))?;
    Ok(t)
}

/// Serializes a tree monomial back into the nested expression form.
pub fn tree_to_json(t: &TreeMonomial) -> TreeJson {
    fn walk(n: &Node) -> TreeJson {
        match n {
            Node::Leaf(l) => TreeJson::Leaf { leaf: *l },
            Node::Vertex(g, ch) => TreeJson::Op {
                op: g.name.clone(),
                args: ch.iter().map(walk).collect(),
            },
        }
    }
    walk(&t.root)
}

/// A quadratic presentation: generators, symmetry table, weight-2 relations.
///
/// The symmetry table assigns to (generator, adjacent transposition s_i) the
/// image of the right action as a combination of generators of the same
/// arity and degree. Generators absent from the table carry the free action.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<GenSym>,
    pub symmetry: BTreeMap<(String, usize), Vec<(Rat, String)>>,
    pub relations: Vec<TreeVec>,
}

impl Presentation {
    /// Parses and validates a presentation from its JSON form.
    pub fn from_json_str(s: &str) -> Result<Presentation, OperadError> {
        let j: PresentationJson = serde_json::from_str(s)?;
        let generators: Vec<GenSym> =
            j.generators.iter().map(|g| GenSym { name: g.name.clone(), arity: g.arity, degree: g.degree, suspended: false }).collect();
        let mut symmetry = BTreeMap::new();
        for (gen, table) in &j.symmetry {
            for (key, terms) in table {
                let i: usize = key
                    .parse()
                    .map_err(|_| OperadError::BadSymmetry { gen: gen.clone(), reason: format!("transposition key {key} is not a number") })?;
                let mut image = Vec::new();
                for t in terms {
                    image.push((rat_pair(t.coeff)?, t.gen.clone()));
                }
                symmetry.insert((gen.clone(), i), image);
            }
        }
        let by_name: BTreeMap<String, GenSym> =
            generators.iter().map(|g| (g.name.clone(), g.clone())).collect();
        let mut relations = Vec::new();
        for (index, rel) in j.relations.iter().enumerate() {
            let mut terms = Vec::new();
            for term in rel {
                let c = rat_pair(term.coeff)?;
                let t = tree_from_json(&term.tree, &by_name)
                    .map_err(|reason| OperadError::BadRelation { index, reason })?;
                terms.push((c, t));
            }
            let (arity, weight) = match terms.first() {
                Some((_, t)) => (t.arity(), t.weight()),
                None => {
                    return Err(OperadError::BadRelation { index, reason: "empty relation".to_string() })
                }
            };
            for (_, t) in &terms {
                if t.arity() != arity || t.weight() != weight {
                    return Err(OperadError::BadRelation {
                        index,
                        reason: format!("terms mix arity/weight ({},{}) and ({},{})", arity, weight, t.arity(), t.weight()),
                    });
                }
            }
            relations.push(TreeVec { arity, weight, terms }.normalized());
        }
        let p = Presentation { name: j.name, generators, symmetry, relations };
        p.validate()?;
        Ok(p)
    }

    /// One of the shipped presentations: ass, com, lie, pois, or dual.
    pub fn builtin(name: &str) -> Result<Presentation, OperadError> {
        let text = match name {
            "ass" => include_str!("../fixtures/operads/ass.json"),
            "com" => include_str!("../fixtures/operads/com.json"),
            "lie" => include_str!("../fixtures/operads/lie.json"),
            "pois" => include_str!("../fixtures/operads/pois.json"),
            "dual" => include_str!("../fixtures/operads/dual.json"),
            other => return Err(OperadError::UnknownBuiltin(other.to_string())),
        };
        Presentation::from_json_str(text)
    }

    pub fn gen(&self, name: &str) -> Option<&GenSym> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn validate(&self) -> Result<(), OperadError> {
        if self.generators.is_empty() {
            return Err(OperadError::NoGenerators);
        }
        let mut names = BTreeMap::new();
        for g in &self.generators {
            if g.arity == 0 {
                return Err(OperadError::Nullary(g.name.clone()));
            }
            if names.insert(g.name.clone(), g).is_some() {
                return Err(OperadError::DuplicateGenerator(g.name.clone()));
            }
        }
        // Symmetry table shape: declared generators exist, keys are in range,
        // the table is complete per generator, and images stay inside the
        // declared set with matching arity and degree.
        let declared: Vec<String> = {
            let mut v: Vec<String> = self.symmetry.keys().map(|(n, _)| n.clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        for name in &declared {
            let g = names
                .get(name)
                .ok_or_else(|| OperadError::UnknownGenerator(name.clone()))?;
            if g.arity < 2 {
                return Err(OperadError::BadSymmetry { gen: name.clone(), reason: "unary generators admit no transpositions".to_string() });
            }
            for i in 1..g.arity {
                let image = self.symmetry.get(&(name.clone(), i)).ok_or_else(|| OperadError::BadSymmetry {
                    gen: name.clone(),
                    reason: format!("missing entry for transposition {i}"),
                })?;
                for (_, h) in image {
                    let hg = names.get(h).ok_or_else(|| OperadError::UnknownGenerator(h.clone()))?;
                    if hg.arity != g.arity || hg.degree != g.degree {
                        return Err(OperadError::BadSymmetry {
                            gen: name.clone(),
                            reason: format!("image generator {h} has different arity or degree"),
                        });
                    }
                    if !declared.contains(h) {
                        return Err(OperadError::BadSymmetry {
                            gen: name.clone(),
                            reason: format!("image generator {h} declares no symmetry of its own"),
                        });
                    }
                }
            }
        }
        // Involution and braid identities, checked as matrices on the span of
        // declared generators of each arity.
        let mut by_arity: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for name in &declared {
            by_arity.entry(names[name].arity).or_default().push(name.clone());
        }
        for (arity, group) in &by_arity {
            let dim = group.len();
            let idx: BTreeMap<&String, usize> = group.iter().enumerate().map(|(i, n)| (n, i)).collect();
            let mat_of = |i: usize| -> Mat<Rat> {
                let mut m = Mat::zero(dim, dim);
                for (col, name) in group.iter().enumerate() {
                    for (c, h) in &self.symmetry[&(name.clone(), i)] {
                        m.add_to(idx[h], col, c.clone());
                    }
                }
                m
            };
            let mats: Vec<Mat<Rat>> = (1..*arity).map(mat_of).collect();
            for (i, m) in mats.iter().enumerate() {
                if m.mul(m) != Mat::identity(dim) {
                    return Err(OperadError::BadSymmetry {
                        gen: group.join(","),
                        reason: format!("transposition {} is not an involution", i + 1),
                    });
                }
            }
            for i in 0..mats.len() {
                for j in i + 1..mats.len() {
                    let (a, b) = (&mats[i], &mats[j]);
                    let ok = if j == i + 1 {
                        a.mul(&b.mul(a)) == b.mul(&a.mul(b))
                    } else {
                        a.mul(b) == b.mul(a)
                    };
                    if !ok {
                        return Err(OperadError::BadSymmetry {
                            gen: group.join(","),
                            reason: format!("transpositions {} and {} violate the braid identities", i + 1, j + 1),
                        });
                    }
                }
            }
        }
        // Relations are quadratic.
        for (index, r) in self.relations.iter().enumerate() {
            if r.weight != 2 {
                return Err(OperadError::BadRelation { index, reason: format!("weight {} is not 2", r.weight) });
            }
        }
        Ok(())
    }

    /// Stable hash of the presentation content, used as a cache key component.
    pub fn content_hash(&self) -> String {
        let mut text = String::new();
        text.push_str(&self.name);
        for g in &self.generators {
            text.push_str(&format!("|g:{}:{}:{}", g.name, g.arity, g.degree));
        }
        for ((g, i), image) in &self.symmetry {
            text.push_str(&format!("|s:{g}:{i}"));
            for (c, h) in image {
                text.push_str(&format!(":{c}*{h}"));
            }
        }
        for r in &self.relations {
            text.push_str(&format!("|r:{r}"));
        }
        let mut hash: u64 = 0xcbf29ce484222325;
        for b in text.bytes() {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

/// One (arity, weight) component of the presented operad: a basis of
/// representative vectors in raw tree coordinates and the reduction matrix
/// projecting any raw vector onto quotient coordinates.
#[derive(Clone, Debug)]
pub struct OperadCell {
    pub arity: usize,
    pub weight: usize,
    /// Raw monomial basis of the ambient tree span, canonical order.
    pub monomials: Arc<Vec<TreeMonomial>>,
    pub dim: usize,
    /// Representative vectors, one per quotient basis class.
    pub basis: Vec<SVec<Rat>>,
    /// dim x raw: quotient coordinates of a raw vector. Kills the ideal and
    /// the lifted vertex symmetries; composed with inclusion it is identity.
    pub reduce: Mat<Rat>,
    /// raw x dim: representative of each quotient coordinate.
    pub section: Mat<Rat>,
}

impl OperadCell {
    /// Quotient coordinates of a combination.
    pub fn coords_of(&self, v: &TreeVec) -> SVec<Rat> {
        self.reduce.apply(&v.coords(&self.monomials))
    }

    /// Canonical representative of a combination's class.
    pub fn reduce_vec(&self, v: &TreeVec) -> TreeVec {
        let coords = self.section.apply(&self.coords_of(v));
        TreeVec::from_coords(self.arity, self.weight, &self.monomials, &coords)
    }

    /// Representative combination of the i-th quotient basis class.
    pub fn rep(&self, i: usize) -> TreeVec {
        TreeVec::from_coords(self.arity, self.weight, &self.monomials, &self.basis[i])
    }
}

type CellKey = (usize, usize);

/// A validated presentation together with caches of computed cells.
/// Cells are computed once and then shared read-only.
pub struct Operad {
    pres: Presentation,
    raw: RwLock<HashMap<CellKey, Arc<Vec<TreeMonomial>>>>,
    sym: RwLock<HashMap<CellKey, Arc<Subspace<Rat>>>>,
    ideal: RwLock<HashMap<CellKey, Arc<Subspace<Rat>>>>,
    ideal_gens: RwLock<HashMap<CellKey, Arc<Vec<TreeVec>>>>,
    cells: RwLock<HashMap<CellKey, Arc<OperadCell>>>,
}

fn cached<V, F: FnOnce() -> V>(lock: &RwLock<HashMap<CellKey, Arc<V>>>, key: CellKey, compute: F) -> Arc<V> {
    if let Some(v) = lock.read().expect("cache lock").get(&key) {
        return v.clone();
    }
    let v = Arc::new(compute());
    lock.write().expect("cache lock").entry(key).or_insert(v).clone()
}

impl Operad {
    pub fn new(pres: Presentation) -> Result<Operad, OperadError> {
        pres.validate()?;
        Ok(Operad {
            pres,
            raw: RwLock::new(HashMap::new()),
            sym: RwLock::new(HashMap::new()),
            ideal: RwLock::new(HashMap::new()),
            ideal_gens: RwLock::new(HashMap::new()),
            cells: RwLock::new(HashMap::new()),
        })
    }

    pub fn builtin(name: &str) -> Result<Operad, OperadError> {
        Operad::new(Presentation::builtin(name)?)
    }

    pub fn pres(&self) -> &Presentation {
        &self.pres
    }

    /// Canonical raw monomial basis of the (arity, weight) tree span.
    pub fn raw_basis(&self, arity: usize, weight: usize) -> Arc<Vec<TreeMonomial>> {
        cached(&self.raw, (arity, weight), || {
            if weight == 0 {
                return if arity == 1 { vec![TreeMonomial::identity()] } else { vec![] };
            }
            enumerate_monomials(&self.pres.generators, arity, weight)
        })
    }

    /// Span of the lifted vertex-symmetry relations inside the raw span:
    /// for every monomial, every vertex whose symbol declares symmetry, and
    /// every adjacent transposition of that vertex's inputs, the difference
    /// between the table image and the (Koszul-signed) child-block swap.
    pub fn sym_cell(&self, arity: usize, weight: usize) -> Arc<Subspace<Rat>> {
        cached(&self.sym, (arity, weight), || {
            let basis = self.raw_basis(arity, weight);
            let mut rows = Vec::new();
            for t in basis.iter() {
                for path in vertex_paths(&t.root) {
                    let (g, child_degrees) = at_path(&t.root, &path);
                    let Some(g) = g else { continue };
                    if !self.pres.symmetry.contains_key(&(g.name.clone(), 1)) {
                        continue;
                    }
                    for i in 1..g.arity {
                        let image = &self.pres.symmetry[&(g.name.clone(), i)];
                        let mut vec = TreeVec::zero(arity, weight);
                        for (c, h) in image {
                            let hg = self.pres.gen(h).expect("validated symbol").clone();
                            let replaced = TreeMonomial { root: with_symbol(&t.root, &path, &hg) };
                            vec = vec.add(&TreeVec::monomial(c.clone(), replaced)).expect("same cell");
                        }
                        let sign = if (child_degrees[i - 1] * child_degrees[i]) % 2 == 0 { 1 } else { -1 };
                        let swapped = TreeMonomial { root: with_swapped_children(&t.root, &path, i - 1) };
                        vec = vec
                            .add(&TreeVec::monomial(rint(-i64::from(sign)), swapped))
                            .expect("same cell");
                        if !vec.is_zero() {
                            rows.push(vec.coords(&basis));
                        }
                    }
                }
            }
            Subspace::span(basis.len(), rows)
        })
    }

    /// The (arity, weight) piece of the operadic ideal generated by the
    /// relations: at weight 2 the symmetric-orbit span of the relation
    /// vectors, at higher weight the span of all one-generator graftings of
    /// the previous weight, closed under the symmetric action.
    pub fn ideal_cell(&self, arity: usize, weight: usize) -> Arc<Subspace<Rat>> {
        self.ideal_data(arity, weight).0
    }

    /// Ideal span plus a pruned sparse generating set (the independent
    /// vectors actually inserted), which the next weight grafts from. The
    /// symmetric closure runs as a worklist over adjacent transpositions so
    /// every processed vector stays as sparse as the relations themselves.
    fn ideal_data(&self, arity: usize, weight: usize) -> (Arc<Subspace<Rat>>, Arc<Vec<TreeVec>>) {
        {
            let spans = self.ideal.read().expect("cache lock");
            let gens = self.ideal_gens.read().expect("cache lock");
            if let (Some(s), Some(g)) = (spans.get(&(arity, weight)), gens.get(&(arity, weight))) {
                return (s.clone(), g.clone());
            }
        }
        let basis = self.raw_basis(arity, weight);
        let ambient = basis.len();
        let mut queue: VecDeque<TreeVec> = VecDeque::new();
        if weight >= 2 && ambient > 0 {
            if weight == 2 {
                for r in &self.pres.relations {
                    if r.arity == arity {
                        queue.push_back(r.clone());
                    }
                }
            } else {
                for g in &self.pres.generators {
                    let k = g.arity;
                    if k > arity {
                        continue;
                    }
                    let inner_arity = arity - k + 1;
                    let (_, lower_gens) = self.ideal_data(inner_arity, weight - 1);
                    let corolla = TreeVec::monomial(rint(1), TreeMonomial::corolla(g));
                    for x in lower_gens.iter() {
                        for slot in 1..=k {
                            queue.push_back(graft_vec(&corolla, slot, x).expect("slot in range"));
                        }
                        for slot in 1..=inner_arity {
                            queue.push_back(graft_vec(x, slot, &corolla).expect("slot in range"));
                        }
                    }
                }
            }
        }
        let transpositions: Vec<Perm> = (1..arity)
            .map(|i| {
                let mut images = (1..=arity).collect::<Vec<_>>();
                images.swap(i - 1, i);
                Perm::from_images(images).expect("transposition")
            })
            .collect();
        let mut echelon = Rref::new();
        let mut gens: Vec<TreeVec> = Vec::new();
        while let Some(v) = queue.pop_front() {
            if v.is_zero() {
                continue;
            }
            if echelon.insert(v.coords(&basis)) {
                for s in &transpositions {
                    queue.push_back(act(s, &v).expect("matching size"));
                }
                gens.push(v);
            }
        }
        let span = Arc::new(Subspace::from_rref(ambient, echelon));
        let gens = Arc::new(gens);
        self.ideal
            .write()
            .expect("cache lock")
            .entry((arity, weight))
            .or_insert_with(|| span.clone());
        self.ideal_gens
            .write()
            .expect("cache lock")
            .entry((arity, weight))
            .or_insert_with(|| gens.clone());
        (span, gens)
    }

    /// The (arity, weight) component of the presented operad, as a quotient
    /// of the raw tree span by vertex symmetries plus the relation ideal.
    pub fn operad_cell(&self, arity: usize, weight: usize) -> Arc<OperadCell> {
        cached(&self.cells, (arity, weight), || {
            let monomials = self.raw_basis(arity, weight);
            let sym = self.sym_cell(arity, weight);
            let ideal = self.ideal_cell(arity, weight);
            let u = sym.sum(&ideal).expect("same ambient");
            let HomologyData { dim, section, projection, .. } = quotient(&u);
            let basis = (0..dim).map(|i| section.column(i)).collect();
            OperadCell {
                arity,
                weight,
                monomials: monomials.clone(),
                dim,
                basis,
                reduce: projection,
                section,
            }
        })
    }

    /// Total dimension of the arity-n component across all weights up to the
    /// bound (for a quadratic operad on binary generators only weight n−1
    /// contributes; unary generators spread over all weights).
    pub fn dim_upto(&self, arity: usize, max_weight: usize) -> usize {
        (if arity == 1 { 0 } else { 1 }..=max_weight)
            .map(|w| self.operad_cell(arity, w).dim)
            .sum::<usize>()
            + usize::from(arity == 1)
    }

    /// Canonical representative of a combination's class.
    pub fn reduce(&self, v: &TreeVec) -> TreeVec {
        self.operad_cell(v.arity, v.weight).reduce_vec(v)
    }

    /// Partial composition on the quotient: graft, then reduce.
    pub fn compose(&self, outer: &TreeVec, slot: usize, inner: &TreeVec) -> Result<TreeVec, OperadError> {
        if slot < 1 || slot > outer.arity {
            return Err(TreeError::SlotOutOfRange { slot, arity: outer.arity }.into());
        }
        let grafted = graft_vec(outer, slot, inner)?;
        Ok(self.reduce(&grafted))
    }
}

fn vertex_paths(root: &Node) -> Vec<Vec<usize>> {
    fn walk(n: &Node, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if let Node::Vertex(_, ch) = n {
            out.push(path.clone());
            for (i, c) in ch.iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(root, &mut Vec::new(), &mut out);
    out
}

/// Symbol and child subtree degrees at a vertex path (None for a leaf).
fn at_path<'a>(root: &'a Node, path: &[usize]) -> (Option<&'a GenSym>, Vec<i64>) {
    let mut n = root;
    for &i in path {
        match n {
            Node::Vertex(_, ch) => n = &ch[i],
            Node::Leaf(_) => return (None, vec![]),
        }
    }
    match n {
        Node::Vertex(g, ch) => {
            let degrees = ch
                .iter()
                .map(|c| TreeMonomial { root: c.clone() }.degree())
                .collect();
            (Some(g), degrees)
        }
        Node::Leaf(_) => (None, vec![]),
    }
}

fn with_symbol(root: &Node, path: &[usize], g: &GenSym) -> Node {
    match (root, path.split_first()) {
        (Node::Vertex(_, ch), None) => Node::Vertex(g.clone(), ch.clone()),
        (Node::Vertex(sym, ch), Some((&i, rest))) => {
            let mut ch = ch.clone();
            ch[i] = with_symbol(&ch[i], rest, g);
            Node::Vertex(sym.clone(), ch)
        }
        (Node::Leaf(_), _) => panic!("path leads through a leaf"),
    }
}

fn with_swapped_children(root: &Node, path: &[usize], i: usize) -> Node {
    match (root, path.split_first()) {
        (Node::Vertex(sym, ch), None) => {
            let mut ch = ch.clone();
            ch.swap(i, i + 1);
            Node::Vertex(sym.clone(), ch)
        }
        (Node::Vertex(sym, ch), Some((&j, rest))) => {
            let mut ch = ch.clone();
            ch[j] = with_swapped_children(&ch[j], rest, i);
            Node::Vertex(sym.clone(), ch)
        }
        (Node::Leaf(_), _) => panic!("path leads through a leaf"),
    }
}

/// An operad morphism determined by weight-1 images of the generators.
#[derive(Clone, Debug)]
pub struct OperadMorphism {
    pub source: Presentation,
    pub target: Presentation,
    pub images: BTreeMap<String, TreeVec>,
}

impl OperadMorphism {
    pub fn new(
        source: Presentation,
        target: Presentation,
        images: BTreeMap<String, TreeVec>,
    ) -> Result<OperadMorphism, OperadError> {
        for g in &source.generators {
            let img = images
                .get(&g.name)
                .ok_or_else(|| OperadError::BadMorphism { gen: g.name.clone(), reason: "missing image".to_string() })?;
            if img.weight != 1 {
                return Err(OperadError::BadMorphism { gen: g.name.clone(), reason: format!("image weight {} is not 1", img.weight) });
            }
            if img.arity != g.arity {
                return Err(OperadError::BadMorphism { gen: g.name.clone(), reason: format!("image arity {} differs from {}", img.arity, g.arity) });
            }
            for (_, t) in &img.terms {
                let (_, sym, _, _) = crate::trees::last_vertex_split(t);
                if sym.degree != g.degree {
                    return Err(OperadError::BadMorphism { gen: g.name.clone(), reason: format!("image symbol {} has different degree", sym.name) });
                }
                if target.gen(&sym.name).is_none() {
                    return Err(OperadError::BadMorphism { gen: g.name.clone(), reason: format!("unknown target generator {}", sym.name) });
                }
            }
        }
        Ok(OperadMorphism { source, target, images })
    }

    /// Image of one monomial under the induced map on tree spans.
    pub fn apply_monomial(&self, t: &TreeMonomial) -> TreeVec {
        apply_images(&self.images, t)
    }

    /// Linear extension of the induced map to combinations.
    pub fn apply(&self, v: &TreeVec) -> TreeVec {
        let mut total = TreeVec::zero(v.arity, v.weight);
        for (c, t) in &v.terms {
            total = total.add(&self.apply_monomial(t).scale(c)).expect("grading preserved");
        }
        total
    }
}

/// Substitutes an image vector for every vertex symbol of `t`, by name.
/// Images must be weight-1 combinations on symbols of the same arity and
/// degree; signs come from the graft convention of the tree module.
pub(crate) fn apply_images(images: &BTreeMap<String, TreeVec>, t: &TreeMonomial) -> TreeVec {
    if t.is_identity() {
        return TreeVec::monomial(rint(1), TreeMonomial::identity());
    }
    let (_, x, parts, sigma) = crate::trees::last_vertex_split(t);
    let img = &images[&x.name];
    let mapped: Vec<TreeVec> = parts.iter().map(|p| apply_images(images, p)).collect();
    let mut total = TreeVec::zero(t.arity(), t.weight());
    // Cartesian product over one term from the root image and one term
    // from each mapped part.
    let mut stack: Vec<(Rat, Vec<TreeMonomial>)> = vec![(Rat::one(), Vec::new())];
    for part in &mapped {
        let mut next = Vec::new();
        for (c, chosen) in &stack {
            for (pc, pt) in &part.terms {
                let mut chosen2 = chosen.clone();
                chosen2.push(pt.clone());
                next.push((c * pc, chosen2));
            }
        }
        stack = next;
    }
    for (c0, m0) in &img.terms {
        for (c, chosen) in &stack {
            let (sign, composite) = compose_all(m0, chosen);
            let coeff = c0 * c * Rat::from_integer(sign.into());
            total = total
                .add(&TreeVec::monomial(coeff, composite))
                .expect("grading preserved");
        }
    }
    let acted_terms = total
        .terms
        .iter()
        .map(|(c, m)| (c.clone(), act_monomial(&sigma, m)))
        .collect();
    TreeVec { arity: total.arity, weight: total.weight, terms: acted_terms }.normalized()
}

/// What failed inside a morphism check.
#[derive(Clone, Debug, PartialEq)]
pub enum MorphismDefect {
    /// A relation's image does not reduce to zero in the target.
    Relation { index: usize },
    /// A declared symmetry is not intertwined by the generator images.
    Symmetry { gen: String, transposition: usize },
}

#[derive(Clone, Debug)]
pub struct MorphismFailure {
    pub defect: MorphismDefect,
    pub arity: usize,
    pub residual: TreeVec,
}

#[derive(Clone, Debug, Default)]
pub struct MorphismReport {
    pub failures: Vec<MorphismFailure>,
}

impl MorphismReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies a morphism: every source relation must map into the target
/// ideal, and declared symmetric actions must be intertwined. Checks all
/// relations and symmetry entries of arity at most `max_arity`.
pub fn check_morphism(m: &OperadMorphism, max_arity: usize) -> Result<MorphismReport, OperadError> {
    let target = Operad::new(m.target.clone())?;
    let mut report = MorphismReport::default();
    for (index, r) in m.source.relations.iter().enumerate() {
        if r.arity > max_arity {
            continue;
        }
        let residual = target.reduce(&m.apply(r));
        if !residual.is_zero() {
            report.failures.push(MorphismFailure {
                defect: MorphismDefect::Relation { index },
                arity: r.arity,
                residual,
            });
        }
    }
    for ((gen, i), image) in &m.source.symmetry {
        let g = m.source.gen(gen).expect("validated generator");
        if g.arity > max_arity {
            continue;
        }
        let mut images = (1..=g.arity).collect::<Vec<_>>();
        images.swap(*i - 1, *i);
        let s = Perm::from_images(images).expect("transposition");
        let f_g = m.apply(&TreeVec::monomial(rint(1), TreeMonomial::corolla(g)));
        let lhs = act(&s, &f_g)?;
        let mut rhs = TreeVec::zero(g.arity, 1);
        for (c, h) in image {
            let hc = TreeVec::monomial(c.clone(), TreeMonomial::corolla(m.source.gen(h).expect("validated")));
            rhs = rhs.add(&m.apply(&hc))?;
        }
        let residual = target.reduce(&lhs.add(&rhs.scale(&rint(-1)))?);
        if !residual.is_zero() {
            report.failures.push(MorphismFailure {
                defect: MorphismDefect::Symmetry { gen: gen.clone(), transposition: *i },
                arity: g.arity,
                residual,
            });
        }
    }
    Ok(report)
}

/// The standard bracket-to-commutator morphism.
pub fn lie_to_ass() -> Result<OperadMorphism, OperadError> {
    let source = Presentation::builtin("lie")?;
    let target = Presentation::builtin("ass")?;
    let mu = target.gen("mu").expect("ass generator").clone();
    let commutator = TreeVec::monomial(rint(1), TreeMonomial::corolla(&mu))
        .add(&TreeVec::monomial(rint(-1), TreeMonomial::corolla_with(&mu, &[2, 1])))
        .expect("same cell");
    let images = BTreeMap::from([("br".to_string(), commutator)]);
    OperadMorphism::new(source, target, images)
}

/// The canonical abelianization morphism.
pub fn ass_to_com() -> Result<OperadMorphism, OperadError> {
    let source = Presentation::builtin("ass")?;
    let target = Presentation::builtin("com")?;
    let mu = target.gen("mu").expect("com generator").clone();
    let images = BTreeMap::from([(
        "mu".to_string(),
        TreeVec::monomial(rint(1), TreeMonomial::corolla(&mu)),
    )]);
    OperadMorphism::new(source, target, images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    #[test]
    fn builtins_load_and_validate() {
        for name in ["ass", "com", "lie", "pois", "dual"] {
            let p = Presentation::builtin(name).unwrap_or_else(|e| panic!("loading {name}: {e}"));
            assert_eq!(p.name, name);
        }
        assert!(matches!(Presentation::builtin("nope"), Err(OperadError::UnknownBuiltin(_))));
    }

    #[test]
    fn arity_zero_generators_are_rejected() {
        let text = r#"{"name":"bad","generators":[{"name":"c","arity":0,"degree":0}]}"#;
        assert!(matches!(Presentation::from_json_str(text), Err(OperadError::Nullary(_))));
        let empty = r#"{"name":"bad","generators":[]}"#;
        assert!(matches!(Presentation::from_json_str(empty), Err(OperadError::NoGenerators)));
    }

    #[test]
    fn non_involutive_symmetry_is_rejected() {
        let text = r#"{
            "name": "bad",
            "generators": [{"name": "mu", "arity": 2, "degree": 0}],
            "symmetry": {"mu": {"1": [{"gen": "mu", "coeff": [2, 1]}]}}
        }"#;
        match Presentation::from_json_str(text) {
            Err(OperadError::BadSymmetry { reason, .. }) => {
                assert!(reason.contains("involution"), "got reason: {reason}")
            }
            other => panic!("expected symmetry error, got {other:?}"),
        }
    }

    #[test]
    fn ass_ideal_at_arity3_weight2_is_the_associator_orbit() {
        let op = Operad::builtin("ass").unwrap();
        assert_eq!(op.raw_basis(3, 2).len(), 12);
        assert_eq!(op.ideal_cell(3, 2).dim(), 6);
        // At generating weight the ideal is exactly the symmetric orbit span.
        let basis = op.raw_basis(3, 2);
        let r = &op.pres().relations[0];
        let mut rows = Vec::new();
        for sigma in Perm::all(3) {
            rows.push(act(&sigma, r).unwrap().coords(&basis));
        }
        assert_eq!(*op.ideal_cell(3, 2), Subspace::span(12, rows));
    }

    #[test]
    fn dual_numbers_weight2_cell_vanishes() {
        let op = Operad::builtin("dual").unwrap();
        assert_eq!(op.raw_basis(1, 2).len(), 1);
        assert_eq!(op.ideal_cell(1, 2).dim(), 1);
        assert_eq!(op.operad_cell(1, 2).dim, 0);
        assert_eq!(op.operad_cell(1, 3).dim, 0);
    }

    #[test]
    fn classical_dimension_counts_hold_through_arity_5() {
        let ass = Operad::builtin("ass").unwrap();
        let com = Operad::builtin("com").unwrap();
        let lie = Operad::builtin("lie").unwrap();
        for n in 2..=5usize {
            assert_eq!(ass.operad_cell(n, n - 1).dim, factorial(n), "ass arity {n}");
            assert_eq!(com.operad_cell(n, n - 1).dim, 1, "com arity {n}");
            assert_eq!(lie.operad_cell(n, n - 1).dim, factorial(n - 1), "lie arity {n}");
        }
    }

    #[test]
    fn lie_weight1_cell_is_one_dimensional() {
        let lie = Operad::builtin("lie").unwrap();
        assert_eq!(lie.operad_cell(2, 1).dim, 1);
    }

    #[test]
    fn reduce_is_idempotent_and_kills_the_ideal() {
        let op = Operad::builtin("ass").unwrap();
        let basis = op.raw_basis(3, 2);
        for t in basis.iter() {
            let v = TreeVec::monomial(rint(1), t.clone());
            let once = op.reduce(&v);
            assert_eq!(op.reduce(&once), once);
        }
        let ideal = op.ideal_cell(3, 2);
        for b in ideal.basis() {
            let v = TreeVec::from_coords(3, 2, &basis, b);
            assert!(op.reduce(&v).is_zero(), "ideal vector survives reduction: {v}");
        }
    }

    #[test]
    fn symmetric_action_descends_to_the_quotient() {
        for name in ["ass", "com", "lie", "pois"] {
            let op = Operad::builtin(name).unwrap();
            let basis = op.raw_basis(3, 2);
            for t in basis.iter() {
                let v = TreeVec::monomial(rint(1), t.clone());
                for sigma in Perm::all(3) {
                    let lhs = op.reduce(&act(&sigma, &op.reduce(&v)).unwrap());
                    let rhs = op.reduce(&act(&sigma, &v).unwrap());
                    assert_eq!(lhs, rhs, "operad {name}, monomial {t}, sigma {sigma:?}");
                }
            }
        }
    }

    #[test]
    fn composition_satisfies_the_defining_relations() {
        let ass = Operad::builtin("ass").unwrap();
        let mu = TreeVec::monomial(rint(1), TreeMonomial::corolla(ass.pres().gen("mu").unwrap()));
        let left = ass.compose(&mu, 1, &mu).unwrap();
        let right = ass.compose(&mu, 2, &mu).unwrap();
        assert_eq!(left, right, "associativity holds in the quotient");

        let dual = Operad::builtin("dual").unwrap();
        let d = TreeVec::monomial(rint(1), TreeMonomial::corolla(dual.pres().gen("delta").unwrap()));
        assert!(dual.compose(&d, 1, &d).unwrap().is_zero());

        let lie = Operad::builtin("lie").unwrap();
        let jacobi = &lie.pres().relations[0];
        assert!(lie.reduce(jacobi).is_zero());
    }

    #[test]
    fn composition_axioms_hold_on_random_quotient_elements() {
        let mut rng = StdRng::seed_from_u64(7);
        let op = Operad::builtin("pois").unwrap();
        let rand_elt = |rng: &mut StdRng, arity: usize, weight: usize| -> TreeVec {
            let cell = op.operad_cell(arity, weight);
            let mut v = TreeVec::zero(arity, weight);
            for i in 0..cell.dim {
                let c = rint(rng.gen_range(-2i64..=2));
                v = v.add(&cell.rep(i).scale(&c)).unwrap();
            }
            v
        };
        for _ in 0..3 {
            let x = rand_elt(&mut rng, 2, 1);
            let y = rand_elt(&mut rng, 2, 1);
            let z = rand_elt(&mut rng, 2, 1);
            // Nested: (x o_1 y) o_2 z = x o_1 (y o_2 z).
            let lhs = op.compose(&op.compose(&x, 1, &y).unwrap(), 2, &z).unwrap();
            let rhs = op.compose(&x, 1, &op.compose(&y, 2, &z).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "nested composition");
            // Disjoint: (x o_1 y) o_3 z = (x o_2 z) o_1 y for degree-0 parts.
            let a = op.compose(&op.compose(&x, 1, &y).unwrap(), 3, &z).unwrap();
            let b = op.compose(&op.compose(&x, 2, &z).unwrap(), 1, &y).unwrap();
            assert_eq!(a, b, "disjoint composition");
        }
    }

    #[test]
    fn bracket_to_commutator_is_a_morphism() {
        let m = lie_to_ass().unwrap();
        let report = check_morphism(&m, 5).unwrap();
        assert!(report.is_valid(), "failures: {:?}", report.failures);
    }

    #[test]
    fn abelianization_is_a_morphism() {
        let m = ass_to_com().unwrap();
        let report = check_morphism(&m, 5).unwrap();
        assert!(report.is_valid(), "failures: {:?}", report.failures);
    }

    #[test]
    fn bracket_to_product_fails_antisymmetry() {
        let source = Presentation::builtin("lie").unwrap();
        let target = Presentation::builtin("com").unwrap();
        let mu = target.gen("mu").unwrap().clone();
        let images = BTreeMap::from([(
            "br".to_string(),
            TreeVec::monomial(rint(1), TreeMonomial::corolla(&mu)),
        )]);
        let m = OperadMorphism::new(source, target, images).unwrap();
        let report = check_morphism(&m, 5).unwrap();
        assert!(!report.is_valid());
        assert!(
            report
                .failures
                .iter()
                .any(|f| matches!(f.defect, MorphismDefect::Symmetry { .. })),
            "antisymmetry defect expected, got {:?}",
            report.failures
        );
    }

    #[test]
    fn content_hash_distinguishes_presentations() {
        let a = Presentation::builtin("ass").unwrap();
        let b = Presentation::builtin("com").unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash(), Presentation::builtin("ass").unwrap().content_hash());
    }
}
