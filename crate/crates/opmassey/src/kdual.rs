//! Koszul dual cooperad of a quadratic presentation, computed cell by cell.
//!
//! A cell of arity n and weight w lives inside the span of suspended tree
//! monomials. It is cut out by two families of linear conditions: invariance
//! under the declared vertex symmetries (with Koszul signs in the suspended
//! grading) and, at every internal edge, a two-vertex co-restriction that
//! must land in the suspended relation span. On top of the cells the module
//! provides the decomposition maps (full and reduced coproduct), the
//! desuspension map onto the operad, the inductive splitting map used by
//! Massey products, and maps induced by operad morphisms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{kernel, solve, Mat, SVec, Subspace};
use crate::operad::{apply_images, Operad, OperadError, OperadMorphism, Presentation};
use crate::trees::{
    act, GenSym, Node, Perm, TreeError, TreeMonomial, TreeVec,
};
use crate::{rint, Rat};

#[derive(Error, Debug)]
pub enum KdualError {
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("vector of arity {arity}, weight {weight} is not in the cooperad cell")]
    NotInCell { arity: usize, weight: usize },
    #[error("no named element {0}")]
    UnknownElement(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// One component of the dual cooperad: the subspace of the suspended tree
/// span satisfying the symmetry and edge co-restriction conditions, plus a
/// table of distinguished elements in basis coordinates.
#[derive(Clone, Debug)]
pub struct CooperadCell {
    pub arity: usize,
    pub weight: usize,
    /// Suspended tree monomials spanning the ambient space, canonical order.
    pub monomials: Arc<Vec<TreeMonomial>>,
    pub basis: Subspace<Rat>,
    /// Distinguished elements, as coordinate vectors on the cell basis.
    pub named: BTreeMap<String, SVec<Rat>>,
}

impl CooperadCell {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Ambient combination of a coordinate vector on the cell basis.
    pub fn vector(&self, coords: &SVec<Rat>) -> TreeVec {
        let mut amb = SVec::zero();
        for (i, c) in coords.iter() {
            amb = amb.add_scaled(c, &self.basis.basis()[*i]);
        }
        TreeVec::from_coords(self.arity, self.weight, &self.monomials, &amb)
    }

    /// Basis coordinates of an ambient combination, when it lies in the cell.
    pub fn coords(&self, v: &TreeVec) -> Option<SVec<Rat>> {
        let amb = v.coords(&self.monomials);
        self.basis.coords_of(&amb).map(|c| SVec::from_dense(&c))
    }
}

/// An element of one cooperad cell.
#[derive(Clone, Debug)]
pub struct Cooperation {
    pub cell: Arc<CooperadCell>,
    pub coords: SVec<Rat>,
}

impl Cooperation {
    pub fn arity(&self) -> usize {
        self.cell.arity
    }

    pub fn weight(&self) -> usize {
        self.cell.weight
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0 && !self.is_zero()
    }

    /// Ambient combination over the suspended tree monomials.
    pub fn vector(&self) -> TreeVec {
        self.cell.vector(&self.coords)
    }

    /// Homological degree. Cells over homogeneous conditions have
    /// degree-homogeneous basis rows, so the first term decides.
    pub fn degree(&self) -> i64 {
        let v = self.vector();
        debug_assert!(
            v.terms.windows(2).all(|w| w[0].1.degree() == w[1].1.degree()),
            "cooperation is not degree-homogeneous"
        );
        v.terms.first().map(|(_, t)| t.degree()).unwrap_or(0)
    }
}

impl PartialEq for Cooperation {
    fn eq(&self, other: &Self) -> bool {
        self.arity() == other.arity()
            && self.weight() == other.weight()
            && self.coords == other.coords
    }
}

impl fmt::Display for Cooperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.vector())
    }
}

/// One term of the full or reduced coproduct: an outer cooperation applied
/// to inner cooperations, with `slots[i]` the sorted global input set fed to
/// part i and `sigma` the input reindexing (inverse given by reading the
/// slot sets in order).
#[derive(Clone, Debug)]
pub struct CoproductTerm {
    pub coeff: Rat,
    pub outer: Cooperation,
    pub parts: Vec<Cooperation>,
    pub slots: Vec<Vec<usize>>,
    pub sigma: Perm,
}

/// One term of the inductive splitting map: the outer factor has been pushed
/// down to the operad. `zeta` is an unreduced weight-1 combination whose leaf
/// labels name the parts; reducing it in the operad gives the operation that
/// consumes the parts' outputs.
#[derive(Clone, Debug)]
pub struct SplitTerm {
    pub coeff: Rat,
    pub zeta: TreeVec,
    pub parts: Vec<Cooperation>,
    pub slots: Vec<Vec<usize>>,
    pub sigma: Perm,
}

type CellKey = (usize, usize);

/// The truncated dual cooperad of a presented operad. Cells are computed on
/// demand and cached; they are immutable once built.
pub struct Cooperad {
    op: Arc<Operad>,
    /// The same presentation with every generator suspended and the
    /// relations carried across with the suspension signs.
    sop: Operad,
    cells: RwLock<HashMap<CellKey, Arc<CooperadCell>>>,
    /// Per inner arity: residual map of (relation orbit span + symmetry span)
    /// in the two-vertex suspended span.
    targets: RwLock<HashMap<usize, Arc<Mat<Rat>>>>,
}

/// The suspended copy of a monomial: every vertex symbol suspended.
fn suspend_monomial(t: &TreeMonomial) -> TreeMonomial {
    fn walk(n: &Node) -> Node {
        match n {
            Node::Leaf(l) => Node::Leaf(*l),
            Node::Vertex(g, ch) => Node::Vertex(g.suspend(), ch.iter().map(walk).collect()),
        }
    }
    TreeMonomial { root: walk(&t.root) }
}

/// The presentation on suspended generators. A weight-2 relation term picks
/// up the sign of moving one suspension past the root letter.
fn suspended_presentation(p: &Presentation) -> Presentation {
    let generators = p.generators.iter().map(|g| g.suspend()).collect();
    let relations = p
        .relations
        .iter()
        .map(|r| {
            let terms = r
                .terms
                .iter()
                .map(|(c, t)| {
                    let root_degree = match &t.root {
                        Node::Vertex(g, _) => g.degree,
                        Node::Leaf(_) => 0,
                    };
                    let sign = if root_degree % 2 == 0 { rint(1) } else { rint(-1) };
                    (c * sign, suspend_monomial(t))
                })
                .collect();
            TreeVec { arity: r.arity, weight: r.weight, terms }.normalized()
        })
        .collect();
    Presentation {
        name: format!("{}-suspended", p.name),
        generators,
        symmetry: p.symmetry.clone(),
        relations,
    }
}

/// Vertex paths and effective degrees in preorder.
fn preorder_letters(t: &TreeMonomial) -> Vec<(Vec<usize>, i64)> {
    fn walk(n: &Node, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if let Node::Vertex(g, ch) = n {
            out.push((path.clone(), g.effective_degree()));
            for (i, c) in ch.iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(&t.root, &mut Vec::new(), &mut out);
    out
}

/// Koszul sign of reordering graded letters into the order given by `order`
/// (a permutation of 0..degs.len() listing original positions).
fn reorder_sign(order: &[usize], degs: &[i64]) -> i64 {
    let mut acc: i64 = 0;
    for p in 0..order.len() {
        for q in p + 1..order.len() {
            if order[p] > order[q] {
                acc += degs[order[p]] * degs[order[q]];
            }
        }
    }
    if acc % 2 == 0 { 1 } else { -1 }
}

fn min_leaf(n: &Node) -> usize {
    match n {
        Node::Leaf(l) => *l,
        Node::Vertex(_, ch) => ch.iter().map(min_leaf).min().expect("positive arity"),
    }
}

fn leaf_labels(n: &Node) -> Vec<usize> {
    match n {
        Node::Leaf(l) => vec![*l],
        Node::Vertex(_, ch) => ch.iter().flat_map(leaf_labels).collect(),
    }
}

/// A cut of a tree monomial in the block-rank normal form: parts are ordered
/// by their smallest global input, relabeled to local inputs by rank; the
/// outer tree's leaf at the position of part p carries p's rank.
struct RawCut {
    sign: i64,
    outer: TreeMonomial,
    parts: Vec<TreeMonomial>,
    slots: Vec<Vec<usize>>,
}

/// All cuts of `t`: every way of pruning a disjoint family of subtrees
/// (parts) so that the remaining root piece (outer) is a tree on the stumps.
/// Leaves always close a part (the identity token). Pruning at the root
/// itself yields the outer-identity cut.
fn cuts(t: &TreeMonomial) -> Vec<RawCut> {
    // Per node: (outer skeleton with Leaf(0) stumps, pruned parts with their
    // paths, in planar order).
    fn choices(n: &Node, path: &[usize]) -> Vec<(Node, Vec<(Vec<usize>, Node)>)> {
        match n {
            Node::Leaf(_) => vec![(Node::Leaf(0), vec![(path.to_vec(), n.clone())])],
            Node::Vertex(g, ch) => {
                let mut out = vec![(Node::Leaf(0), vec![(path.to_vec(), n.clone())])];
                let mut combos: Vec<(Vec<Node>, Vec<(Vec<usize>, Node)>)> =
                    vec![(Vec::new(), Vec::new())];
                for (i, c) in ch.iter().enumerate() {
                    let mut sub_path = path.to_vec();
                    sub_path.push(i);
                    let subs = choices(c, &sub_path);
                    let mut next = Vec::new();
                    for (nodes, parts) in &combos {
                        for (skel, sub_parts) in &subs {
                            let mut nodes2 = nodes.clone();
                            nodes2.push(skel.clone());
                            let mut parts2 = parts.clone();
                            parts2.extend(sub_parts.iter().cloned());
                            next.push((nodes2, parts2));
                        }
                    }
                    combos = next;
                }
                for (nodes, parts) in combos {
                    out.push((Node::Vertex(g.clone(), nodes), parts));
                }
                out
            }
        }
    }

    let letters = preorder_letters(t);
    let degs: Vec<i64> = letters.iter().map(|(_, d)| *d).collect();
    let mut out = Vec::new();
    for (skel, parts) in choices(&t.root, &[]) {
        let m = parts.len();
        let mins: Vec<usize> = parts.iter().map(|(_, n)| min_leaf(n)).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| mins[p]);
        // rank_of[planar position] = 1-based rank by smallest input.
        let mut rank_of = vec![0usize; m];
        for (r, &p) in order.iter().enumerate() {
            rank_of[p] = r + 1;
        }
        // Outer: replace the stump leaves, left to right, by the part ranks.
        fn fill(n: &Node, ranks: &[usize], pos: &mut usize) -> Node {
            match n {
                Node::Leaf(_) => {
                    let r = ranks[*pos];
                    *pos += 1;
                    Node::Leaf(r)
                }
                Node::Vertex(g, ch) => Node::Vertex(
                    g.clone(),
                    ch.iter().map(|c| fill(c, ranks, pos)).collect(),
                ),
            }
        }
        let outer = TreeMonomial { root: fill(&skel, &rank_of, &mut 0) };
        let mut ranked_parts = Vec::with_capacity(m);
        let mut slots = Vec::with_capacity(m);
        for &p in &order {
            let mono = TreeMonomial { root: parts[p].1.clone() };
            let mut labels = leaf_labels(&parts[p].1);
            labels.sort_unstable();
            slots.push(labels);
            ranked_parts.push(mono.relabeled_by_rank());
        }
        // Sign: reorder the letter word of t into outer letters (their
        // relative order is preserved by pruning) followed by the parts'
        // letters in rank order.
        let mut word: Vec<usize> = Vec::with_capacity(letters.len());
        let part_paths: Vec<&Vec<usize>> = parts.iter().map(|(p, _)| p).collect();
        let in_part = |idx: usize| -> Option<usize> {
            let path = &letters[idx].0;
            part_paths.iter().position(|pp| path.len() >= pp.len() && &path[..pp.len()] == pp.as_slice())
        };
        for idx in 0..letters.len() {
            if in_part(idx).is_none() {
                word.push(idx);
            }
        }
        for &p in &order {
            for idx in 0..letters.len() {
                if in_part(idx) == Some(p) {
                    word.push(idx);
                }
            }
        }
        let sign = reorder_sign(&word, &degs);
        out.push(RawCut { sign, outer, parts: ranked_parts, slots });
    }
    out
}

/// Permutation with the concatenation of the sorted slot sets as its inverse.
fn sigma_of_slots(slots: &[Vec<usize>]) -> Result<Perm, TreeError> {
    let inv: Vec<usize> = slots.iter().flatten().copied().collect();
    Ok(Perm::from_images(inv)?.inverse())
}

/// Identity of the part-vector encoding used to group split terms: identity
/// parts carry no index, proper parts are (arity, weight, basis index).
type PartKey = Option<(usize, usize, usize)>;

/// Canonical coordinate key for the image of the inductive splitting map:
/// the slot sets, the parts as basis elements, and one coordinate of the
/// reduced outer operation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct DKey {
    slots: Vec<Vec<usize>>,
    parts: Vec<PartKey>,
    op_coord: usize,
}

/// A right-hand-side part for pinning named elements: the identity or a
/// named element of a lower cell.
enum RhsPart {
    Id,
    Named(usize, usize, &'static str),
}

/// One term of a pinned splitting formula.
struct RhsTerm {
    coeff: Rat,
    zeta: TreeVec,
    parts: Vec<RhsPart>,
    slots: Vec<Vec<usize>>,
}

impl Cooperad {
    pub fn new(op: Arc<Operad>) -> Result<Cooperad, OperadError> {
        let sop = Operad::new(suspended_presentation(op.pres()))?;
        Ok(Cooperad {
            op,
            sop,
            cells: RwLock::new(HashMap::new()),
            targets: RwLock::new(HashMap::new()),
        })
    }

    pub fn builtin(name: &str) -> Result<Cooperad, OperadError> {
        Cooperad::new(Arc::new(Operad::builtin(name)?))
    }

    pub fn operad(&self) -> &Arc<Operad> {
        &self.op
    }

    pub fn pres(&self) -> &Presentation {
        self.op.pres()
    }

    /// The weight-0 identity cooperation.
    pub fn identity_cooperation(&self) -> Cooperation {
        Cooperation { cell: self.cell(1, 0), coords: SVec::unit(0) }
    }

    /// The element of a cell with the given coordinates.
    pub fn element(&self, arity: usize, weight: usize, coords: SVec<Rat>) -> Cooperation {
        Cooperation { cell: self.cell(arity, weight), coords }
    }

    /// A named element, looked up by the naming convention of the built-in
    /// presentations (for example mu3c, tau4c, delta2, w2c, wb3c).
    pub fn named(&self, name: &str) -> Result<Cooperation, KdualError> {
        let (arity, weight) = self
            .named_location(name)
            .ok_or_else(|| KdualError::UnknownElement(name.to_string()))?;
        let cell = self.cell(arity, weight);
        let coords = cell
            .named
            .get(name)
            .cloned()
            .ok_or_else(|| KdualError::UnknownElement(name.to_string()))?;
        Ok(Cooperation { cell, coords })
    }

    /// Cell location of a named element, by name shape.
    fn named_location(&self, name: &str) -> Option<(usize, usize)> {
        let strip = |prefix: &str, suffix: &str| -> Option<usize> {
            name.strip_prefix(prefix)?.strip_suffix(suffix)?.parse().ok()
        };
        match self.pres().name.as_str() {
            "ass" => strip("mu", "c").map(|n| (n, n - 1)),
            "lie" => strip("tau", "c").map(|n| (n, n - 1)),
            "dual" => strip("delta", "").map(|n| (1, n)),
            "pois" => match name {
                "w2c" | "b2c" => Some((2, 1)),
                "wb3c" => Some((3, 2)),
                _ => None,
            },
            _ => None,
        }
    }

    /// The cell of the given arity and weight, computed on first use.
    pub fn cell(&self, arity: usize, weight: usize) -> Arc<CooperadCell> {
        if let Some(c) = self.cells.read().expect("cell lock").get(&(arity, weight)) {
            return c.clone();
        }
        let cell = Arc::new(self.compute_cell(arity, weight));
        self.cells
            .write()
            .expect("cell lock")
            .entry((arity, weight))
            .or_insert(cell)
            .clone()
    }

    /// Residual map of (suspended relation orbit span + symmetry span) in
    /// the two-vertex span of the given arity.
    fn weight2_target(&self, arity: usize) -> Arc<Mat<Rat>> {
        if let Some(m) = self.targets.read().expect("target lock").get(&arity) {
            return m.clone();
        }
        let ideal = self.sop.ideal_cell(arity, 2);
        let sym = self.sop.sym_cell(arity, 2);
        let target = ideal.sum(&sym).expect("same ambient");
        let rmap = Arc::new(target.residual_map());
        self.targets
            .write()
            .expect("target lock")
            .entry(arity)
            .or_insert(rmap)
            .clone()
    }

    fn compute_cell(&self, arity: usize, weight: usize) -> CooperadCell {
        let mons = self.sop.raw_basis(arity, weight);
        let n_amb = mons.len();
        let mut rows: Vec<SVec<Rat>> = self.sop.sym_cell(arity, weight).basis().to_vec();
        if weight >= 2 {
            // Group the edge co-restrictions by their residual: the tree with
            // the edge's two vertices merged into a placeholder whose hanging
            // subtrees are ordered by rank of smallest input. Each group is
            // one block of conditions, valued in the two-vertex span modulo
            // the relation target.
            let mut groups: BTreeMap<(usize, TreeMonomial), Vec<(usize, i64, usize)>> =
                BTreeMap::new();
            for (col, t) in mons.iter().enumerate() {
                for (g_mono, residual, sign) in edge_corestrictions(t) {
                    let m = g_mono.arity();
                    let amb2 = self.sop.raw_basis(m, 2);
                    let g_idx = amb2
                        .binary_search(&g_mono)
                        .expect("extracted two-vertex monomial is in the span");
                    groups.entry((m, residual)).or_default().push((g_idx, sign, col));
                }
            }
            for ((m, _), entries) in groups {
                let amb2 = self.sop.raw_basis(m, 2);
                let rmap = self.weight2_target(m);
                let mut x = Mat::zero(amb2.len(), n_amb);
                for (g_idx, sign, col) in entries {
                    x.add_to(g_idx, col, rint(sign));
                }
                let conditions = rmap.mul(&x);
                for r in 0..conditions.nrows() {
                    let row = conditions.row(r);
                    if !row.is_zero() {
                        rows.push(row.clone());
                    }
                }
            }
        }
        let basis = kernel(&Mat::from_rows(n_amb, rows));
        let named = self.named_elements(arity, weight, &mons, &basis);
        CooperadCell { arity, weight, monomials: mons, basis, named }
    }

    /// Distinguished elements of the built-in presentations.
    fn named_elements(
        &self,
        arity: usize,
        weight: usize,
        mons: &[TreeMonomial],
        basis: &Subspace<Rat>,
    ) -> BTreeMap<String, SVec<Rat>> {
        let mut named = BTreeMap::new();
        if basis.dim() == 0 {
            return named;
        }
        match self.pres().name.as_str() {
            "ass" => {
                if weight + 1 == arity && arity == 2 {
                    if let Some(v) = self.suspended_corolla_coords("mu", mons, basis) {
                        named.insert("mu2c".to_string(), v);
                    }
                } else if weight + 1 == arity && arity >= 3 {
                    if let Some(v) = self.solve_pinned(arity, weight, mons, basis, &mu_rhs(self, arity)) {
                        named.insert(format!("mu{arity}c"), v);
                    }
                }
            }
            "lie" => {
                if weight + 1 == arity && arity == 2 {
                    if let Some(v) = self.symmetrized_generator("br", mons, basis) {
                        named.insert("tau2c".to_string(), v);
                    }
                } else if weight + 1 == arity && arity >= 3 {
                    if let Some(v) = self.solve_pinned(arity, weight, mons, basis, &tau_rhs(self, arity)) {
                        named.insert(format!("tau{arity}c"), v);
                    }
                }
            }
            "dual" => {
                if arity == 1 && weight >= 1 && basis.dim() == 1 && mons.len() == 1 {
                    // The chain is the only monomial; the cell is its span.
                    let amb = SVec::unit(0);
                    if let Some(c) = basis.coords_of(&amb) {
                        named.insert(format!("delta{weight}"), SVec::from_dense(&c));
                    }
                }
            }
            "pois" => {
                if (arity, weight) == (2, 1) {
                    if let Some(v) = self.symmetrized_generator("wedge", mons, basis) {
                        named.insert("w2c".to_string(), v);
                    }
                    if let Some(v) = self.symmetrized_generator("br", mons, basis) {
                        named.insert("b2c".to_string(), v);
                    }
                } else if (arity, weight) == (3, 2) {
                    if let Some(v) = self.solve_pinned(arity, weight, mons, basis, &wb_rhs(self)) {
                        named.insert("wb3c".to_string(), v);
                    }
                }
            }
            _ => {}
        }
        named
    }

    /// The weight-1 element projecting the suspended corolla of `gen` onto
    /// the cell along the symmetry span. Its desuspension reduces to the
    /// generator itself.
    fn symmetrized_generator(
        &self,
        gen: &str,
        mons: &[TreeMonomial],
        basis: &Subspace<Rat>,
    ) -> Option<SVec<Rat>> {
        let g = self.sop.pres().gen(gen)?;
        let corolla = TreeMonomial::corolla(g);
        let idx = mons.binary_search(&corolla).ok()?;
        let sym = self.sop.sym_cell(g.arity, 1);
        // Ambient = cell ⊕ symmetry span; read off the cell component.
        let mut cols: Vec<SVec<Rat>> = basis.basis().to_vec();
        cols.extend(sym.basis().iter().cloned());
        let m = Mat::from_rows(mons.len(), cols).transpose();
        let sol = solve(&m, &SVec::unit(idx))?;
        let coords: Vec<(usize, Rat)> = sol
            .iter()
            .filter(|(i, _)| *i < basis.dim())
            .map(|(i, c)| (*i, c.clone()))
            .collect();
        Some(SVec(coords))
    }

    /// The cell coordinates of the identity-labeled suspended corolla of a
    /// generator, when it lies in the cell on the nose.
    fn suspended_corolla_coords(
        &self,
        gen: &str,
        mons: &[TreeMonomial],
        basis: &Subspace<Rat>,
    ) -> Option<SVec<Rat>> {
        let g = self.sop.pres().gen(gen)?;
        let idx = mons.binary_search(&TreeMonomial::corolla(g)).ok()?;
        basis.coords_of(&SVec::unit(idx)).map(|c| SVec::from_dense(&c))
    }

    /// Pins a named element as the unique cell solution X of
    /// split(X) = right-hand side. Returns None when the splitting map has a
    /// kernel on the cell or the system is inconsistent.
    fn solve_pinned(
        &self,
        arity: usize,
        weight: usize,
        mons: &[TreeMonomial],
        basis: &Subspace<Rat>,
        rhs: &[RhsTerm],
    ) -> Option<SVec<Rat>> {
        let dim = basis.dim();
        let mut keys: BTreeMap<DKey, usize> = BTreeMap::new();
        let mut columns: Vec<BTreeMap<DKey, Rat>> = Vec::with_capacity(dim);
        for j in 0..dim {
            let rep = TreeVec::from_coords(arity, weight, mons, &basis.basis()[j]);
            let terms = self.split_vector(arity, weight, &rep).ok()?;
            let enc = self.encode_split(&terms).ok()?;
            for k in enc.keys() {
                let next = keys.len();
                keys.entry(k.clone()).or_insert(next);
            }
            columns.push(enc);
        }
        let b_enc = self.encode_rhs(rhs).ok()?;
        for k in b_enc.keys() {
            let next = keys.len();
            keys.entry(k.clone()).or_insert(next);
        }
        let mut a = Mat::zero(keys.len(), dim);
        for (j, enc) in columns.iter().enumerate() {
            for (k, c) in enc {
                a.add_to(keys[k], j, c.clone());
            }
        }
        let mut b = SVec::zero();
        for (k, c) in &b_enc {
            b = b.add(&SVec::unit(keys[k]).scale(c));
        }
        if kernel(&a).dim() != 0 {
            return None;
        }
        solve(&a, &b)
    }

    /// Full decomposition map: every cut of every term, with the outer
    /// factor expressed in its cell.
    pub fn coproduct(&self, g: &Cooperation) -> Result<Vec<CoproductTerm>, KdualError> {
        self.coproduct_terms(g, false)
    }

    /// Reduced decomposition map: drops the cut with identity outer factor
    /// (the one with the whole element as its single part), keeping the
    /// all-identity-parts term.
    pub fn coproduct_plus(&self, g: &Cooperation) -> Result<Vec<CoproductTerm>, KdualError> {
        self.coproduct_terms(g, true)
    }

    fn coproduct_terms(
        &self,
        g: &Cooperation,
        reduced: bool,
    ) -> Result<Vec<CoproductTerm>, KdualError> {
        let v = g.vector();
        type SliceKey = ((usize, usize), Vec<(usize, usize)>, Vec<Vec<usize>>);
        let mut slices: BTreeMap<SliceKey, BTreeMap<Vec<TreeMonomial>, Rat>> = BTreeMap::new();
        for (c, t) in &v.terms {
            for cut in cuts(t) {
                if reduced && cut.outer.is_identity() {
                    continue;
                }
                let key: SliceKey = (
                    (cut.outer.arity(), cut.outer.weight()),
                    cut.parts.iter().map(|p| (p.arity(), p.weight())).collect(),
                    cut.slots.clone(),
                );
                let mut combo = Vec::with_capacity(cut.parts.len() + 1);
                combo.push(cut.outer);
                combo.extend(cut.parts);
                let coeff = c * rint(cut.sign);
                let entry = slices.entry(key).or_default().entry(combo).or_insert_with(Rat::zero);
                *entry += coeff;
            }
        }
        let mut out = Vec::new();
        for (((oa, ow), parts_aw, slots), terms) in slices {
            let terms: BTreeMap<Vec<TreeMonomial>, Rat> =
                terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            if terms.is_empty() {
                continue;
            }
            let mut factors = vec![self.cell(oa, ow)];
            for (a, w) in &parts_aw {
                factors.push(self.cell(*a, *w));
            }
            let sigma = sigma_of_slots(&slots)?;
            for (coeff, idxs) in expand_slices(&factors, &terms)? {
                let outer = Cooperation { cell: factors[0].clone(), coords: SVec::unit(idxs[0]) };
                let parts = idxs[1..]
                    .iter()
                    .zip(&factors[1..])
                    .map(|(&i, cell)| Cooperation { cell: cell.clone(), coords: SVec::unit(i) })
                    .collect();
                out.push(CoproductTerm {
                    coeff,
                    outer,
                    parts,
                    slots: slots.clone(),
                    sigma: sigma.clone(),
                });
            }
        }
        Ok(out)
    }

    /// Desuspension onto the operad: zero except in weight one, where the
    /// suspended corollas drop to the generators and the result is reduced.
    pub fn kappa(&self, g: &Cooperation) -> TreeVec {
        if g.weight() != 1 {
            return TreeVec::zero(g.arity(), 1);
        }
        self.op.reduce(&self.desuspend_weight1(&g.vector()))
    }

    fn desuspend_weight1(&self, v: &TreeVec) -> TreeVec {
        let terms = v
            .terms
            .iter()
            .map(|(c, t)| {
                let Node::Vertex(g, _) = &t.root else {
                    panic!("weight-1 monomial has a root vertex")
                };
                let base = self.pres().gen(&g.name).expect("generator exists").clone();
                (c.clone(), TreeMonomial::corolla_with(&base, &t.leaf_word()))
            })
            .collect();
        TreeVec { arity: v.arity, weight: v.weight, terms }.normalized()
    }

    /// The inductive splitting map: the cuts whose outer factor has weight
    /// one, with that factor desuspended (unreduced) as `zeta`.
    pub fn massey_d(&self, g: &Cooperation) -> Result<Vec<SplitTerm>, KdualError> {
        self.split_vector(g.arity(), g.weight(), &g.vector())
    }

    fn split_vector(
        &self,
        arity: usize,
        weight: usize,
        v: &TreeVec,
    ) -> Result<Vec<SplitTerm>, KdualError> {
        let _ = arity;
        type SliceKey = (usize, Vec<(usize, usize)>, Vec<Vec<usize>>);
        let mut slices: BTreeMap<SliceKey, BTreeMap<Vec<TreeMonomial>, Rat>> = BTreeMap::new();
        if weight == 0 {
            return Ok(Vec::new());
        }
        for (c, t) in &v.terms {
            for cut in cuts(t) {
                if cut.outer.weight() != 1 {
                    continue;
                }
                let key: SliceKey = (
                    cut.outer.arity(),
                    cut.parts.iter().map(|p| (p.arity(), p.weight())).collect(),
                    cut.slots.clone(),
                );
                let mut combo = Vec::with_capacity(cut.parts.len() + 1);
                combo.push(cut.outer);
                combo.extend(cut.parts);
                let coeff = c * rint(cut.sign);
                let entry = slices.entry(key).or_default().entry(combo).or_insert_with(Rat::zero);
                *entry += coeff;
            }
        }
        let mut out = Vec::new();
        for ((m, parts_aw, slots), terms) in slices {
            let terms: BTreeMap<Vec<TreeMonomial>, Rat> =
                terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            if terms.is_empty() {
                continue;
            }
            let mut factors = vec![self.cell(m, 1)];
            for (a, w) in &parts_aw {
                factors.push(self.cell(*a, *w));
            }
            let sigma = sigma_of_slots(&slots)?;
            for (coeff, idxs) in expand_slices(&factors, &terms)? {
                let zeta_susp = TreeVec::from_coords(
                    m,
                    1,
                    &factors[0].monomials,
                    &factors[0].basis.basis()[idxs[0]],
                );
                let zeta = self.desuspend_weight1(&zeta_susp);
                let parts = idxs[1..]
                    .iter()
                    .zip(&factors[1..])
                    .map(|(&i, cell)| Cooperation { cell: cell.clone(), coords: SVec::unit(i) })
                    .collect();
                out.push(SplitTerm {
                    coeff,
                    zeta,
                    parts,
                    slots: slots.clone(),
                    sigma: sigma.clone(),
                });
            }
        }
        Ok(out)
    }

    /// Encodes split terms in the canonical coordinate space keyed by slot
    /// sets, part basis indices, and reduced outer coordinates.
    fn encode_split(&self, terms: &[SplitTerm]) -> Result<BTreeMap<DKey, Rat>, KdualError> {
        let mut out: BTreeMap<DKey, Rat> = BTreeMap::new();
        for term in terms {
            let m = term.parts.len();
            let opcell = self.op.operad_cell(m, 1);
            let oc = opcell.coords_of(&term.zeta);
            let parts: Vec<PartKey> = term
                .parts
                .iter()
                .map(|p| {
                    if p.weight() == 0 {
                        return Ok(None);
                    }
                    match p.coords.0.as_slice() {
                        [(i, c)] if c.is_one() => Ok(Some((p.arity(), p.weight(), *i))),
                        _ => Err(KdualError::Internal(
                            "split part is not a basis element".to_string(),
                        )),
                    }
                })
                .collect::<Result<_, _>>()?;
            for (k, c) in oc.iter() {
                let key = DKey { slots: term.slots.clone(), parts: parts.clone(), op_coord: *k };
                let entry = out.entry(key).or_insert_with(Rat::zero);
                *entry += &term.coeff * c;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Encodes a pinned formula right-hand side in the same coordinates.
    fn encode_rhs(&self, rhs: &[RhsTerm]) -> Result<BTreeMap<DKey, Rat>, KdualError> {
        let mut out: BTreeMap<DKey, Rat> = BTreeMap::new();
        for term in rhs {
            let m = term.parts.len();
            let opcell = self.op.operad_cell(m, 1);
            let oc = opcell.coords_of(&term.zeta);
            // Expand each named part over its cell basis.
            let mut combos: Vec<(Rat, Vec<PartKey>)> = vec![(Rat::one(), Vec::new())];
            for part in &term.parts {
                let choices: Vec<(Rat, PartKey)> = match part {
                    RhsPart::Id => vec![(Rat::one(), None)],
                    RhsPart::Named(a, w, name) => {
                        let cell = self.cell(*a, *w);
                        let coords = cell.named.get(*name).ok_or_else(|| {
                            KdualError::UnknownElement((*name).to_string())
                        })?;
                        coords
                            .iter()
                            .map(|(i, c)| (c.clone(), Some((*a, *w, *i))))
                            .collect()
                    }
                };
                let mut next = Vec::new();
                for (c, keys) in &combos {
                    for (pc, pk) in &choices {
                        let mut keys2 = keys.clone();
                        keys2.push(pk.clone());
                        next.push((c * pc, keys2));
                    }
                }
                combos = next;
            }
            for (k, c) in oc.iter() {
                for (cc, parts) in &combos {
                    let key =
                        DKey { slots: term.slots.clone(), parts: parts.clone(), op_coord: *k };
                    let entry = out.entry(key).or_insert_with(Rat::zero);
                    *entry += &term.coeff * c * cc;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Projects a weight-one combination of suspended corollas onto the
    /// symmetry-invariant subspace along the span of the symmetry
    /// conditions. Weight-one cells are exactly those invariants.
    fn weight_one_invariant_part(&self, v: &TreeVec) -> Result<TreeVec, KdualError> {
        let cell = self.cell(v.arity, 1);
        let sym = self.sop.sym_cell(v.arity, 1);
        let mut cols: Vec<SVec<Rat>> = cell.basis.basis().to_vec();
        cols.extend(sym.basis().iter().cloned());
        let m = Mat::from_rows(cell.monomials.len(), cols).transpose();
        let x = solve(&m, &v.coords(&cell.monomials)).ok_or_else(|| {
            KdualError::Internal("weight-one span is not invariants plus conditions".to_string())
        })?;
        let mut amb = SVec::zero();
        for (i, c) in x.iter() {
            if *i < cell.dim() {
                amb = amb.add_scaled(c, &cell.basis.basis()[*i]);
            }
        }
        Ok(TreeVec::from_coords(v.arity, 1, &cell.monomials, &amb))
    }

    /// Relabels the inputs of a cooperation. The cells are stable under this
    /// action; landing outside the cell signals a broken cell computation.
    pub fn act(&self, sigma: &Perm, g: &Cooperation) -> Result<Cooperation, KdualError> {
        let v = act(sigma, &g.vector())?;
        let coords = g
            .cell
            .coords(&v)
            .ok_or(KdualError::NotInCell { arity: g.arity(), weight: g.weight() })?;
        Ok(Cooperation { cell: g.cell.clone(), coords })
    }

    /// Applies the splitting map twice — once to `g` and once inside every
    /// part — composes each outer pair in the operad, and groups the results
    /// by the remaining frozen data. Every returned group vector is the
    /// operad reduction of the accumulated two-vertex outer factor; they all
    /// vanish, which is the coherence the Massey machinery rests on.
    pub fn split_twice_composed(&self, g: &Cooperation) -> Result<Vec<TreeVec>, KdualError> {
        type GroupKey = (Vec<PartKey>, Vec<Vec<usize>>);
        let mut groups: BTreeMap<GroupKey, TreeVec> = BTreeMap::new();
        let level1 = self.massey_d(g)?;
        for t1 in &level1 {
            let m = t1.parts.len();
            let zeta1_deg = t1.zeta.terms.first().map(|(_, t)| t.degree()).unwrap_or(0);
            for i in 0..m {
                let part = &t1.parts[i];
                if part.weight() == 0 {
                    continue;
                }
                let before: i64 = t1.parts[..i].iter().map(|p| p.degree()).sum();
                let level2 = self.massey_d(part)?;
                for t2 in &level2 {
                    let zeta2_deg =
                        t2.zeta.terms.first().map(|(_, t)| t.degree()).unwrap_or(0);
                    let inner_sign =
                        if (zeta1_deg + before + zeta2_deg * before) % 2 == 0 { 1 } else { -1 };
                    // New part list: the old parts with part i replaced by
                    // the inner parts, slots mapped through t1.slots[i],
                    // then re-ranked by smallest slot.
                    let mut blocks: Vec<(Cooperation, Vec<usize>, i64)> = Vec::new();
                    let mut incoming_degs: Vec<i64> = Vec::new();
                    for (j, p) in t1.parts.iter().enumerate() {
                        if j == i {
                            for (k, sp) in t2.parts.iter().enumerate() {
                                let global: Vec<usize> = t2.slots[k]
                                    .iter()
                                    .map(|&local| t1.slots[i][local - 1])
                                    .collect();
                                blocks.push((sp.clone(), global, sp.degree()));
                                incoming_degs.push(sp.degree());
                            }
                        } else {
                            blocks.push((p.clone(), t1.slots[j].clone(), p.degree()));
                            incoming_degs.push(p.degree());
                        }
                    }
                    let mut order: Vec<usize> = (0..blocks.len()).collect();
                    order.sort_by_key(|&b| *blocks[b].1.iter().min().expect("nonempty slots"));
                    let block_sign = reorder_sign(&order, &incoming_degs);
                    let mut new_parts = Vec::with_capacity(blocks.len());
                    let mut new_slots = Vec::with_capacity(blocks.len());
                    let mut new_rank = vec![0usize; blocks.len()];
                    for (r, &b) in order.iter().enumerate() {
                        new_rank[b] = r + 1;
                        let (p, s, _) = &blocks[b];
                        new_parts.push(p.clone());
                        let mut s = s.clone();
                        s.sort_unstable();
                        new_slots.push(s);
                    }
                    // Ranks of the old parts and the inner parts in the
                    // combined list, in their incoming positions.
                    let rank_of_old = |j: usize| -> usize {
                        let pos = if j < i { j } else { j - 1 + t2.parts.len() };
                        new_rank[pos]
                    };
                    let rank_of_inner = |k: usize| -> usize { new_rank[i + k] };
                    // Compose the outer factors: graft each zeta2 monomial
                    // into the leaf of each zeta1 monomial labeled i+1, and
                    // wire the leaves by the new ranks.
                    let mut composed = TreeVec::zero(
                        t1.zeta.arity + t2.zeta.arity - 1,
                        2,
                    );
                    for (c1, z1) in &t1.zeta.terms {
                        let Node::Vertex(g1, ch1) = &z1.root else {
                            return Err(KdualError::Internal("weight-1 outer factor".into()));
                        };
                        for (c2, z2) in &t2.zeta.terms {
                            let Node::Vertex(g2, ch2) = &z2.root else {
                                return Err(KdualError::Internal("weight-1 outer factor".into()));
                            };
                            let inner_children: Vec<Node> = ch2
                                .iter()
                                .map(|n| {
                                    let Node::Leaf(l) = n else { unreachable!() };
                                    Node::Leaf(rank_of_inner(*l - 1))
                                })
                                .collect();
                            let children: Vec<Node> = ch1
                                .iter()
                                .map(|n| {
                                    let Node::Leaf(l) = n else { unreachable!() };
                                    if *l == i + 1 {
                                        Node::Vertex(g2.clone(), inner_children.clone())
                                    } else {
                                        let old_j = *l - 1;
                                        Node::Leaf(rank_of_old(old_j))
                                    }
                                })
                                .collect();
                            let mono = TreeMonomial { root: Node::Vertex(g1.clone(), children) };
                            let coeff = &t1.coeff
                                * &t2.coeff
                                * c1
                                * c2
                                * rint(inner_sign * block_sign);
                            composed = composed
                                .add(&TreeVec::monomial(coeff, mono))
                                .map_err(KdualError::Tree)?;
                        }
                    }
                    let key: GroupKey = (
                        new_parts
                            .iter()
                            .map(|p| {
                                if p.weight() == 0 {
                                    Ok(None)
                                } else {
                                    match p.coords.0.as_slice() {
                                        [(idx, c)] if c.is_one() => {
                                            Ok(Some((p.arity(), p.weight(), *idx)))
                                        }
                                        _ => Err(KdualError::Internal(
                                            "split part is not a basis element".to_string(),
                                        )),
                                    }
                                }
                            })
                            .collect::<Result<_, _>>()?,
                        new_slots,
                    );
                    match groups.get_mut(&key) {
                        Some(acc) => *acc = acc.add(&composed).map_err(KdualError::Tree)?,
                        None => {
                            groups.insert(key, composed);
                        }
                    }
                }
            }
        }
        Ok(groups.into_values().map(|v| self.op.reduce(&v)).collect())
    }
}

/// Tensor decomposition of a sum of monomial combinations over the product
/// of cell bases: peel the first factor at its basis pivots, recurse, and
/// verify by full reconstruction.
fn expand_slices(
    factors: &[Arc<CooperadCell>],
    terms: &BTreeMap<Vec<TreeMonomial>, Rat>,
) -> Result<Vec<(Rat, Vec<usize>)>, KdualError> {
    fn expand(
        factors: &[Arc<CooperadCell>],
        terms: &BTreeMap<Vec<TreeMonomial>, Rat>,
    ) -> Result<Vec<(Rat, Vec<usize>)>, KdualError> {
        if factors.is_empty() {
            let mut out = Vec::new();
            for (combo, c) in terms {
                if !combo.is_empty() {
                    return Err(KdualError::Internal("leftover factors in slice".into()));
                }
                if !c.is_zero() {
                    out.push((c.clone(), Vec::new()));
                }
            }
            return Ok(out);
        }
        let cell = &factors[0];
        let mut out = Vec::new();
        for r in 0..cell.basis.dim() {
            let pivot = cell.basis.pivots()[r];
            let pivot_mono = &cell.monomials[pivot];
            let mut rest: BTreeMap<Vec<TreeMonomial>, Rat> = BTreeMap::new();
            for (combo, c) in terms {
                if &combo[0] == pivot_mono {
                    let entry = rest.entry(combo[1..].to_vec()).or_insert_with(Rat::zero);
                    *entry += c;
                }
            }
            rest.retain(|_, c| !c.is_zero());
            if rest.is_empty() {
                continue;
            }
            for (c, mut idxs) in expand(&factors[1..], &rest)? {
                idxs.insert(0, r);
                out.push((c, idxs));
            }
        }
        Ok(out)
    }

    let result = expand(factors, terms)?;
    // Reconstruction check: the decomposition must reproduce the input sum
    // exactly, otherwise the slice was not a product of cell elements.
    let mut rebuilt: BTreeMap<Vec<TreeMonomial>, Rat> = BTreeMap::new();
    for (c, idxs) in &result {
        let mut combos: Vec<(Rat, Vec<TreeMonomial>)> = vec![(c.clone(), Vec::new())];
        for (f, &idx) in factors.iter().zip(idxs) {
            let row = &f.basis.basis()[idx];
            let mut next = Vec::new();
            for (cc, monos) in &combos {
                for (i, x) in row.iter() {
                    let mut monos2 = monos.clone();
                    monos2.push(f.monomials[*i].clone());
                    next.push((cc * x, monos2));
                }
            }
            combos = next;
        }
        for (cc, monos) in combos {
            let entry = rebuilt.entry(monos).or_insert_with(Rat::zero);
            *entry += cc;
        }
    }
    rebuilt.retain(|_, c| !c.is_zero());
    let mut input: BTreeMap<Vec<TreeMonomial>, Rat> = terms.clone();
    input.retain(|_, c| !c.is_zero());
    if rebuilt != input {
        return Err(KdualError::Internal(
            "slice does not decompose over the cell bases".to_string(),
        ));
    }
    Ok(result)
}

/// The two-vertex co-restrictions of a monomial: for every internal edge,
/// the extracted two-vertex piece (inputs wired by rank of smallest global
/// input), the residual (edge merged into a placeholder vertex, hanging
/// subtrees in rank order), and the Koszul sign of reordering the letter
/// word into residual order followed by the two extracted letters.
fn edge_corestrictions(t: &TreeMonomial) -> Vec<(TreeMonomial, TreeMonomial, i64)> {
    let letters = preorder_letters(t);
    let degs: Vec<i64> = letters.iter().map(|(_, d)| *d).collect();
    let mut edges: Vec<(Vec<usize>, usize)> = Vec::new();
    fn find_edges(n: &Node, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize)>) {
        if let Node::Vertex(_, ch) = n {
            for (i, c) in ch.iter().enumerate() {
                if matches!(c, Node::Vertex(_, _)) {
                    out.push((path.clone(), i));
                }
                path.push(i);
                find_edges(c, path, out);
                path.pop();
            }
        }
    }
    find_edges(&t.root, &mut Vec::new(), &mut edges);

    let mut out = Vec::new();
    for (u_path, k) in edges {
        fn node_at<'a>(n: &'a Node, path: &[usize]) -> &'a Node {
            match path.split_first() {
                None => n,
                Some((&i, rest)) => match n {
                    Node::Vertex(_, ch) => node_at(&ch[i], rest),
                    Node::Leaf(_) => panic!("path through a leaf"),
                },
            }
        }
        let u_node = node_at(&t.root, &u_path);
        let Node::Vertex(gu, ch) = u_node else { unreachable!() };
        let Node::Vertex(gv, vch) = &ch[k] else { unreachable!() };
        // Hanging subtrees in the planar order of the extracted piece.
        let mut hanging: Vec<&Node> = Vec::new();
        hanging.extend(ch[..k].iter());
        hanging.extend(vch.iter());
        hanging.extend(ch[k + 1..].iter());
        let mins: Vec<usize> = hanging.iter().map(|n| min_leaf(n)).collect();
        let mut order: Vec<usize> = (0..hanging.len()).collect();
        order.sort_by_key(|&p| mins[p]);
        let mut rank_of = vec![0usize; hanging.len()];
        for (r, &p) in order.iter().enumerate() {
            rank_of[p] = r + 1;
        }
        let m = gu.arity + gv.arity - 1;
        // Extracted piece: u over v with rank-wired leaves.
        let mut children: Vec<Node> = Vec::with_capacity(gu.arity);
        for i in 0..k {
            children.push(Node::Leaf(rank_of[i]));
        }
        children.push(Node::Vertex(
            gv.clone(),
            (0..gv.arity).map(|p| Node::Leaf(rank_of[k + p])).collect(),
        ));
        for i in k + 1..gu.arity {
            children.push(Node::Leaf(rank_of[i + gv.arity - 1]));
        }
        let extracted = TreeMonomial { root: Node::Vertex(gu.clone(), children) };
        // Residual: u replaced by a placeholder vertex over the hanging
        // subtrees in rank order. Used only as a grouping key.
        let hole = GenSym::new(&format!("\u{7f}merge{m}"), m, 0);
        let sorted_hanging: Vec<Node> = order.iter().map(|&p| hanging[p].clone()).collect();
        fn replace_at(n: &Node, path: &[usize], with: &Node) -> Node {
            match path.split_first() {
                None => with.clone(),
                Some((&i, rest)) => match n {
                    Node::Vertex(g, ch) => {
                        let mut ch = ch.clone();
                        ch[i] = replace_at(&ch[i], rest, with);
                        Node::Vertex(g.clone(), ch)
                    }
                    Node::Leaf(_) => panic!("path through a leaf"),
                },
            }
        }
        let residual = TreeMonomial {
            root: replace_at(&t.root, &u_path, &Node::Vertex(hole, sorted_hanging)),
        };
        // Sign: reorder the letter word into (residual letters in residual
        // preorder) then (u, v).
        let mut v_path = u_path.clone();
        v_path.push(k);
        let idx_of = |path: &[usize]| -> usize {
            letters.iter().position(|(p, _)| p.as_slice() == path).expect("letter exists")
        };
        let idx_u = idx_of(&u_path);
        let idx_v = idx_of(&v_path);
        let under = |idx: usize, prefix: &[usize]| -> bool {
            let p = &letters[idx].0;
            p.len() >= prefix.len() && &p[..prefix.len()] == prefix
        };
        let mut word: Vec<usize> = Vec::with_capacity(letters.len());
        for idx in 0..letters.len() {
            if !under(idx, &u_path) {
                if idx < idx_u {
                    word.push(idx);
                }
            }
        }
        for &p in &order {
            let prefix: Vec<usize> = if p < k {
                let mut q = u_path.clone();
                q.push(p);
                q
            } else if p < k + gv.arity {
                let mut q = v_path.clone();
                q.push(p - k);
                q
            } else {
                let mut q = u_path.clone();
                q.push(p - gv.arity + 1);
                q
            };
            for idx in 0..letters.len() {
                if under(idx, &prefix) {
                    word.push(idx);
                }
            }
        }
        for idx in 0..letters.len() {
            if !under(idx, &u_path) && idx > idx_u {
                word.push(idx);
            }
        }
        word.push(idx_u);
        word.push(idx_v);
        let sign = reorder_sign(&word, &degs);
        out.push((extracted, residual, sign));
    }
    out
}

/// The right-hand side pinning tau_n^c: the sum over two-block partitions
/// with 1 in the first block, signed by (−1)^{i+1} and the permutation sign
/// of the block reindexing.
fn tau_rhs(coop: &Cooperad, n: usize) -> Vec<RhsTerm> {
    let br = coop.pres().gen("br").expect("bracket generator").clone();
    let zeta = TreeVec::monomial(Rat::one(), TreeMonomial::corolla(&br));
    let mut out = Vec::new();
    for i in 1..n {
        let j = n - i;
        // Choose the rest of the first block from {2, .., n}.
        for subset in subsets_of_size(2, n, i - 1) {
            let mut b1 = vec![1usize];
            b1.extend(subset);
            let b2: Vec<usize> = (1..=n).filter(|x| !b1.contains(x)).collect();
            let slots = vec![b1.clone(), b2.clone()];
            let sigma = sigma_of_slots(&slots).expect("valid blocks");
            let sgn = i64::from(sigma.sign());
            let sign_i = if (i + 1) % 2 == 0 { 1 } else { -1 };
            let block = |a: usize| {
                if a == 1 { RhsPart::Id } else { RhsPart::Named(a, a - 1, tau_name(a)) }
            };
            let parts = vec![block(i), block(j)];
            out.push(RhsTerm { coeff: rint(sign_i * sgn), zeta: zeta.clone(), parts, slots });
        }
    }
    out
}

fn tau_name(n: usize) -> &'static str {
    match n {
        2 => "tau2c",
        3 => "tau3c",
        4 => "tau4c",
        5 => "tau5c",
        _ => panic!("no pinned name at arity {n}"),
    }
}

fn mu_name(n: usize) -> &'static str {
    match n {
        2 => "mu2c",
        3 => "mu3c",
        4 => "mu4c",
        5 => "mu5c",
        _ => panic!("no pinned name at arity {n}"),
    }
}

/// The right-hand side pinning mu_n^c: the two-consecutive-block splitting
/// formula, alternating in the length of the first block.
fn mu_rhs(coop: &Cooperad, n: usize) -> Vec<RhsTerm> {
    let mu = coop.pres().gen("mu").expect("binary generator").clone();
    let zeta = TreeVec::monomial(Rat::one(), TreeMonomial::corolla(&mu));
    let mut out = Vec::new();
    for i in 1..n {
        let j = n - i;
        let part = |a: usize| {
            if a == 1 { RhsPart::Id } else { RhsPart::Named(a, a - 1, mu_name(a)) }
        };
        let sign = if (i + 1) % 2 == 0 { 1 } else { -1 };
        out.push(RhsTerm {
            coeff: rint(sign),
            zeta: zeta.clone(),
            parts: vec![part(i), part(j)],
            slots: vec![(1..=i).collect(), (i + 1..=n).collect()],
        });
    }
    out
}

/// The right-hand side pinning the weight-2 Poisson element. The printed
/// expansion is written entirely in cogenerator names; under the self-dual
/// convention the desuspension swaps the two binary cogenerators, so the
/// outer factors land on the opposite generator of their printed name.
fn wb_rhs(coop: &Cooperad) -> Vec<RhsTerm> {
    let wedge = coop.pres().gen("wedge").expect("product generator").clone();
    let br = coop.pres().gen("br").expect("bracket generator").clone();
    let zw = TreeVec::monomial(Rat::one(), TreeMonomial::corolla(&wedge));
    let zb = TreeVec::monomial(Rat::one(), TreeMonomial::corolla(&br));
    vec![
        RhsTerm {
            coeff: rint(1),
            zeta: zb,
            parts: vec![RhsPart::Named(2, 1, "w2c"), RhsPart::Id],
            slots: vec![vec![1, 2], vec![3]],
        },
        RhsTerm {
            coeff: rint(-1),
            zeta: zw.clone(),
            parts: vec![RhsPart::Id, RhsPart::Named(2, 1, "b2c")],
            slots: vec![vec![1], vec![2, 3]],
        },
        RhsTerm {
            coeff: rint(-1),
            zeta: zw,
            parts: vec![RhsPart::Named(2, 1, "b2c"), RhsPart::Id],
            slots: vec![vec![1, 3], vec![2]],
        },
    ]
}

/// Size-k subsets of {lo, .., hi}, in lexicographic order.
fn subsets_of_size(lo: usize, hi: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, hi: usize, k: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(acc.clone());
            return;
        }
        for x in start..=hi {
            if hi - x + 1 < k {
                break;
            }
            acc.push(x);
            rec(x + 1, hi, k - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(lo, hi, k, &mut Vec::new(), &mut out);
    out
}


/// The map on dual cooperads induced by an operad morphism: project each
/// suspended generator image onto the target's symmetry invariants, apply
/// the images vertexwise, and express the result in the target cell.
pub fn induced_map(
    f: &OperadMorphism,
    source: &Cooperad,
    target: &Cooperad,
    g: &Cooperation,
) -> Result<Cooperation, KdualError> {
    if f.source.content_hash() != source.pres().content_hash()
        || f.target.content_hash() != target.pres().content_hash()
    {
        return Err(KdualError::Internal(
            "morphism endpoints do not match the cooperads".to_string(),
        ));
    }
    let mut images: BTreeMap<String, TreeVec> = BTreeMap::new();
    for (name, img) in &f.images {
        let source_gen = source.sop.pres().gen(name).expect("validated generator");
        let terms = img
            .terms
            .iter()
            .map(|(c, t)| {
                let Node::Vertex(h, _) = &t.root else {
                    panic!("weight-1 image has a root vertex")
                };
                let th = target.sop.pres().gen(&h.name).expect("validated image").clone();
                (c.clone(), TreeMonomial::corolla_with(&th, &t.leaf_word()))
            })
            .collect();
        let raw = TreeVec { arity: img.arity, weight: img.weight, terms }.normalized();
        images.insert(source_gen.name.clone(), target.weight_one_invariant_part(&raw)?);
    }
    let v = g.vector();
    let mut total = TreeVec::zero(v.arity, v.weight);
    for (c, t) in &v.terms {
        total = total
            .add(&apply_images(&images, t).scale(c))
            .map_err(KdualError::Tree)?;
    }
    let cell = target.cell(g.arity(), g.weight());
    let coords = cell.coords(&total).ok_or_else(|| {
        KdualError::Internal("induced image left the target cell".to_string())
    })?;
    Ok(Cooperation { cell, coords })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operad::{ass_to_com, lie_to_ass};
    use crate::trees::compose_all;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    fn delta_name(n: usize) -> &'static str {
        match n {
            1 => "delta1",
            2 => "delta2",
            3 => "delta3",
            4 => "delta4",
            5 => "delta5",
            6 => "delta6",
            _ => panic!("no pinned name at weight {n}"),
        }
    }

    /// The one-term splitting formula for the chain family.
    fn delta_rhs(coop: &Cooperad, w: usize) -> Vec<RhsTerm> {
        let d = coop.pres().gen("delta").expect("unary generator").clone();
        let zeta = TreeVec::monomial(Rat::one(), TreeMonomial::corolla(&d));
        let parts =
            vec![if w == 1 { RhsPart::Id } else { RhsPart::Named(1, w - 1, delta_name(w - 1)) }];
        vec![RhsTerm { coeff: rint(1), zeta, parts, slots: vec![vec![1]] }]
    }

    /// Global sign with which the splitting of a named element matches its
    /// pinned formula; panics if no single sign works.
    fn splitting_sign(coop: &Cooperad, name: &str, rhs: &[RhsTerm]) -> i64 {
        let g = coop.named(name).unwrap_or_else(|e| panic!("named {name}: {e}"));
        let actual = coop.encode_split(&coop.massey_d(&g).expect("split")).expect("encode");
        let expected = coop.encode_rhs(rhs).expect("encode rhs");
        if actual == expected {
            return 1;
        }
        let negated: BTreeMap<DKey, Rat> =
            expected.iter().map(|(k, c)| (k.clone(), -c)).collect();
        assert_eq!(actual, negated, "splitting of {name} matches no global sign");
        -1
    }

    #[test]
    fn identity_cell_and_trivial_decompositions() {
        let coop = Cooperad::builtin("ass").expect("ass");
        assert_eq!(coop.cell(1, 0).dim(), 1);
        assert_eq!(coop.cell(2, 0).dim(), 0);
        assert_eq!(coop.cell(3, 0).dim(), 0);
        let id = coop.identity_cooperation();
        assert!(id.is_identity());
        assert_eq!(id.degree(), 0);
        assert!(coop.massey_d(&id).expect("split").is_empty());
        assert!(coop.coproduct_plus(&id).expect("reduced").is_empty());
        let full = coop.coproduct(&id).expect("full");
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].coeff, rint(1));
        assert_eq!(full[0].outer.weight(), 0);
        assert_eq!(full[0].parts.len(), 1);
        assert_eq!(full[0].parts[0].weight(), 0);
    }

    #[test]
    fn associative_dual_dimensions() {
        let coop = Cooperad::builtin("ass").expect("ass");
        for n in 2..=5 {
            assert_eq!(coop.cell(n, n - 1).dim(), factorial(n), "arity {n}");
        }
    }

    #[test]
    fn lie_dual_dimensions() {
        let coop = Cooperad::builtin("lie").expect("lie");
        for n in 2..=5 {
            assert_eq!(coop.cell(n, n - 1).dim(), 1, "arity {n}");
        }
    }

    #[test]
    fn commutative_dual_dimensions() {
        let coop = Cooperad::builtin("com").expect("com");
        for n in 2..=4 {
            assert_eq!(coop.cell(n, n - 1).dim(), factorial(n - 1), "arity {n}");
        }
    }

    #[test]
    fn chain_dual_cells() {
        let coop = Cooperad::builtin("dual").expect("dual");
        for w in 1..=6 {
            let cell = coop.cell(1, w);
            assert_eq!(cell.dim(), 1, "weight {w}");
            let g = coop.named(delta_name(w)).expect("named chain element");
            assert_eq!(g.degree(), 2 * w as i64, "weight {w}");
        }
    }

    #[test]
    fn poisson_cells_and_named_elements() {
        let coop = Cooperad::builtin("pois").expect("pois");
        assert_eq!(coop.cell(2, 1).dim(), 2);
        assert_eq!(coop.cell(3, 2).dim(), 6);
        let w2c = coop.named("w2c").expect("w2c");
        let b2c = coop.named("b2c").expect("b2c");
        let wedge = coop.sop.pres().gen("wedge").expect("wedge").clone();
        let br = coop.sop.pres().gen("br").expect("br").clone();
        let half = crate::rat(1, 2);
        let expected_w = TreeVec::monomial(half.clone(), TreeMonomial::corolla(&wedge))
            .add(&TreeVec::monomial(half.clone(), TreeMonomial::corolla_with(&wedge, &[2, 1])))
            .expect("same cell");
        let expected_b = TreeVec::monomial(half.clone(), TreeMonomial::corolla(&br))
            .add(&TreeVec::monomial(-half, TreeMonomial::corolla_with(&br, &[2, 1])))
            .expect("same cell");
        assert_eq!(w2c.vector().terms, expected_w.terms);
        assert_eq!(b2c.vector().terms, expected_b.terms);
        assert!(coop.named("wb3c").is_ok());
    }

    #[test]
    fn splitting_matches_pinned_formulas() {
        let ass = Cooperad::builtin("ass").expect("ass");
        for n in 3..=5 {
            assert_eq!(splitting_sign(&ass, mu_name(n), &mu_rhs(&ass, n)), 1, "arity {n}");
        }
        let lie = Cooperad::builtin("lie").expect("lie");
        for n in 3..=4 {
            assert_eq!(splitting_sign(&lie, tau_name(n), &tau_rhs(&lie, n)), 1, "arity {n}");
        }
        let dual = Cooperad::builtin("dual").expect("dual");
        for w in 1..=6 {
            assert_eq!(splitting_sign(&dual, delta_name(w), &delta_rhs(&dual, w)), 1, "weight {w}");
        }
        let pois = Cooperad::builtin("pois").expect("pois");
        assert_eq!(splitting_sign(&pois, "wb3c", &wb_rhs(&pois)), 1);
    }

    #[test]
    fn cut_signs_reassemble_through_grafting() {
        let table: &[(&str, &[(usize, usize)])] = &[
            ("ass", &[(3, 2), (4, 3)]),
            ("lie", &[(3, 2), (4, 3)]),
            ("pois", &[(2, 1), (3, 2)]),
            ("dual", &[(1, 2), (1, 3)]),
        ];
        for (name, cells) in table {
            let coop = Cooperad::builtin(name).expect("builtin");
            for &(arity, weight) in *cells {
                for t in coop.sop.raw_basis(arity, weight).iter() {
                    for cut in cuts(t) {
                        let (s, composite) = compose_all(&cut.outer, &cut.parts);
                        let sigma = sigma_of_slots(&cut.slots).expect("valid slots");
                        let signed =
                            TreeVec::monomial(rint(cut.sign * i64::from(s)), composite);
                        let acted = act(&sigma, &signed).expect("relabel");
                        assert_eq!(acted.terms.len(), 1, "{name} {t}");
                        assert_eq!(acted.terms[0].0, rint(1), "{name} {t}");
                        assert_eq!(&acted.terms[0].1, t, "{name} {t}");
                    }
                }
            }
        }
    }

    #[test]
    fn weight_one_outer_sector_agrees_with_splitting() {
        let cases: &[(&str, &str)] =
            &[("ass", "mu3c"), ("ass", "mu4c"), ("lie", "tau3c"), ("pois", "wb3c")];
        for (name, elem) in cases {
            let coop = Cooperad::builtin(name).expect("builtin");
            let g = coop.named(elem).expect("named");
            let sector: Vec<SplitTerm> = coop
                .coproduct(&g)
                .expect("full")
                .into_iter()
                .filter(|t| t.outer.weight() == 1)
                .map(|t| SplitTerm {
                    coeff: t.coeff,
                    zeta: coop.desuspend_weight1(&t.outer.vector()),
                    parts: t.parts,
                    slots: t.slots,
                    sigma: t.sigma,
                })
                .collect();
            let direct = coop.massey_d(&g).expect("split");
            assert_eq!(
                coop.encode_split(&sector).expect("encode"),
                coop.encode_split(&direct).expect("encode"),
                "{name} {elem}"
            );
        }
    }

    #[test]
    fn coproduct_has_conilpotent_ends() {
        let cases: &[(&str, &str)] =
            &[("ass", "mu3c"), ("lie", "tau3c"), ("dual", "delta2"), ("pois", "b2c")];
        for (name, elem) in cases {
            let coop = Cooperad::builtin(name).expect("builtin");
            let g = coop.named(elem).expect("named");
            let n = g.arity();
            let w = g.weight();
            let full = coop.coproduct(&g).expect("full");
            let mut bottom = SVec::zero();
            let mut top = SVec::zero();
            for term in &full {
                if term.outer.weight() == 0 {
                    assert_eq!(term.parts.len(), 1);
                    assert_eq!(term.slots, vec![(1..=n).collect::<Vec<_>>()]);
                    let idx = term.parts[0].coords.0[0].0;
                    bottom = bottom.add(&SVec::unit(idx).scale(&term.coeff));
                }
                if term.outer.weight() == w && term.parts.iter().all(|p| p.weight() == 0) {
                    assert_eq!(term.parts.len(), n);
                    assert_eq!(term.slots, (1..=n).map(|k| vec![k]).collect::<Vec<_>>());
                    let idx = term.outer.coords.0[0].0;
                    top = top.add(&SVec::unit(idx).scale(&term.coeff));
                }
            }
            assert_eq!(bottom, g.coords, "{name} {elem} bottom");
            assert_eq!(top, g.coords, "{name} {elem} top");
        }
    }

    #[test]
    fn reduced_coproduct_of_chains() {
        let coop = Cooperad::builtin("dual").expect("dual");
        for n in 1..=4usize {
            let g = coop.named(delta_name(n)).expect("named");
            let terms = coop.coproduct_plus(&g).expect("reduced");
            assert_eq!(terms.len(), n, "weight {n}");
            let mut seen_id_part = false;
            let mut seen_pairs = Vec::new();
            for term in terms {
                assert_eq!(term.coeff, rint(1), "weight {n}");
                assert_eq!(term.parts.len(), 1);
                let l = term.parts[0].weight();
                if l == 0 {
                    assert_eq!(term.outer.weight(), n);
                    seen_id_part = true;
                } else {
                    assert_eq!(term.outer.weight() + l, n);
                    assert_eq!(term.outer.coords, coop.named(delta_name(term.outer.weight())).expect("named").coords);
                    assert_eq!(term.parts[0].coords, coop.named(delta_name(l)).expect("named").coords);
                    seen_pairs.push((term.outer.weight(), l));
                }
            }
            assert!(seen_id_part, "weight {n}");
            seen_pairs.sort_unstable();
            assert_eq!(seen_pairs, (1..n).map(|k| (k, n - k)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn desuspension_hits_generators() {
        // kappa returns reduced operad vectors, so compare against the
        // reduced form of each generator corolla.
        let reduced_corolla = |coop: &Cooperad, gen: &GenSym| {
            coop.operad()
                .reduce(&TreeVec::monomial(rint(1), TreeMonomial::corolla(gen)))
                .terms
        };

        let ass = Cooperad::builtin("ass").expect("ass");
        let mu = ass.pres().gen("mu").expect("mu").clone();
        assert_eq!(
            ass.kappa(&ass.named("mu2c").expect("named")).terms,
            reduced_corolla(&ass, &mu)
        );
        assert!(ass.kappa(&ass.named("mu3c").expect("named")).terms.is_empty());
        assert!(ass.kappa(&ass.identity_cooperation()).terms.is_empty());

        let lie = Cooperad::builtin("lie").expect("lie");
        let br = lie.pres().gen("br").expect("br").clone();
        assert_eq!(
            lie.kappa(&lie.named("tau2c").expect("named")).terms,
            reduced_corolla(&lie, &br)
        );

        let pois = Cooperad::builtin("pois").expect("pois");
        let wedge = pois.pres().gen("wedge").expect("wedge").clone();
        let pbr = pois.pres().gen("br").expect("br").clone();
        assert_eq!(
            pois.kappa(&pois.named("w2c").expect("named")).terms,
            reduced_corolla(&pois, &wedge)
        );
        assert_eq!(
            pois.kappa(&pois.named("b2c").expect("named")).terms,
            reduced_corolla(&pois, &pbr)
        );

        let dual = Cooperad::builtin("dual").expect("dual");
        let delta = dual.pres().gen("delta").expect("delta").clone();
        assert_eq!(
            dual.kappa(&dual.named("delta1").expect("named")).terms,
            reduced_corolla(&dual, &delta)
        );
        assert!(dual.kappa(&dual.named("delta2").expect("named")).terms.is_empty());
    }

    #[test]
    fn cells_are_stable_under_relabeling() {
        let cases: &[(&str, usize, usize)] = &[("ass", 3, 2), ("lie", 4, 3), ("pois", 3, 2)];
        for &(name, arity, weight) in cases {
            let coop = Cooperad::builtin(name).expect("builtin");
            let cell = coop.cell(arity, weight);
            for sigma in Perm::all(arity) {
                for j in 0..cell.dim() {
                    let g = Cooperation { cell: cell.clone(), coords: SVec::unit(j) };
                    let acted = coop.act(&sigma, &g);
                    assert!(acted.is_ok(), "{name} basis {j} under {sigma:?}");
                }
            }
            let id = Perm::identity(arity);
            let g = Cooperation { cell: cell.clone(), coords: SVec::unit(0) };
            assert_eq!(coop.act(&id, &g).expect("identity").coords, g.coords);
        }
    }

    #[test]
    fn split_twice_composes_to_zero() {
        let table: &[(&str, &[(usize, usize)])] = &[
            ("ass", &[(3, 2), (4, 3)]),
            ("lie", &[(4, 3)]),
            ("pois", &[(3, 2)]),
            ("dual", &[(1, 3)]),
        ];
        for (name, cells) in table {
            let coop = Cooperad::builtin(name).expect("builtin");
            for &(arity, weight) in *cells {
                let cell = coop.cell(arity, weight);
                for j in 0..cell.dim() {
                    let g = Cooperation { cell: cell.clone(), coords: SVec::unit(j) };
                    for v in coop.split_twice_composed(&g).expect("double split") {
                        assert!(v.terms.is_empty(), "{name} ({arity},{weight}) basis {j}: {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn induced_maps_match_symmetrized_images() {
        let f = lie_to_ass().expect("morphism");
        let lie = Cooperad::builtin("lie").expect("lie");
        let ass = Cooperad::builtin("ass").expect("ass");
        for n in 2..=4usize {
            let tau = lie.named(tau_name(n)).expect("named");
            let image = induced_map(&f, &lie, &ass, &tau).expect("induced");
            let mu = ass.named(mu_name(n)).expect("named");
            let mut acc = SVec::zero();
            for sigma in Perm::all(n) {
                let acted = ass.act(&sigma, &mu).expect("stable");
                acc = acc.add_scaled(&rint(i64::from(sigma.sign())), &acted.coords);
            }
            assert_eq!(image.coords, acc, "arity {n}");
        }

        let g = ass_to_com().expect("morphism");
        let com = Cooperad::builtin("com").expect("com");
        for (arity, weight) in [(3usize, 2usize), (4, 3)] {
            let source = ass.cell(arity, weight);
            let images: Vec<SVec<Rat>> = (0..source.dim())
                .map(|j| {
                    let e = Cooperation { cell: source.clone(), coords: SVec::unit(j) };
                    induced_map(&g, &ass, &com, &e).expect("induced").coords
                })
                .collect();
            let span = Subspace::span(com.cell(arity, weight).dim(), images);
            assert_eq!(span.dim(), com.cell(arity, weight).dim(), "({arity},{weight})");
        }

        let mu = ass.pres().gen("mu").expect("mu").clone();
        let ident = OperadMorphism::new(
            ass.pres().clone(),
            ass.pres().clone(),
            BTreeMap::from([(
                "mu".to_string(),
                TreeVec::monomial(rint(1), TreeMonomial::corolla(&mu)),
            )]),
        )
        .expect("identity morphism");
        let mu3 = ass.named("mu3c").expect("named");
        assert_eq!(induced_map(&ident, &ass, &ass, &mu3).expect("induced").coords, mu3.coords);
    }

    #[test]
    fn random_cell_elements_stay_coherent() {
        let mut rng = StdRng::seed_from_u64(11);
        let cases: &[(&str, usize, usize)] = &[("ass", 4, 3), ("pois", 3, 2)];
        for &(name, arity, weight) in cases {
            let coop = Cooperad::builtin(name).expect("builtin");
            let cell = coop.cell(arity, weight);
            for _ in 0..5 {
                let coords: Vec<Rat> =
                    (0..cell.dim()).map(|_| rint(rng.gen_range(-3i64..=3))).collect();
                let g = Cooperation { cell: cell.clone(), coords: SVec::from_dense(&coords) };
                if g.is_zero() {
                    continue;
                }
                coop.coproduct(&g).expect("full coproduct decomposes");
                coop.massey_d(&g).expect("splitting decomposes");
                for v in coop.split_twice_composed(&g).expect("double split") {
                    assert!(v.terms.is_empty(), "{name}: {v}");
                }
                let sigma = &Perm::all(arity)[rng.gen_range(0..factorial(arity))];
                coop.act(sigma, &g).expect("stable under relabeling");
            }
        }
    }

    #[test]
    fn suspended_presentations_validate() {
        for name in ["ass", "com", "lie", "pois", "dual"] {
            let coop = Cooperad::builtin(name).expect("builtin");
            assert_ne!(
                coop.sop.pres().content_hash(),
                coop.pres().content_hash(),
                "{name}"
            );
            for g in &coop.sop.pres().generators {
                let base = coop.pres().gen(&g.name).expect("same generator names");
                assert_eq!(g.effective_degree(), base.effective_degree() + 1, "{name}/{}", g.name);
            }
        }
    }
}
