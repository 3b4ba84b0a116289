//! Planar tree monomials, symmetric-group actions, and Koszul signs.
//!
//! Free operads and cofree conilpotent cooperads are both spanned by rooted
//! planar trees whose internal vertices carry generator symbols and whose
//! leaves carry input labels. This module owns that combinatorics: canonical
//! enumeration, grafting, the last-vertex split, and the sign conventions
//! that every graded computation downstream relies on.
//!
//! Sign convention, used everywhere: the letters of a monomial are its vertex
//! symbols read in planar preorder (root vertex first, then subtrees left to
//! right). Every structural operation contributes the Koszul sign of the
//! reordering it induces on that letter word. A suspended symbol is a single
//! letter of degree one more than its base degree.

use std::collections::BTreeSet;
use std::fmt;

use crate::linalg::SVec;
use crate::Rat;
use num_traits::Zero;

/// Structural errors for tree and permutation operations.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("slot {slot} out of range for arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("permutation size {got} does not match arity {want}")]
    SizeMismatch { got: usize, want: usize },
    #[error("images {0:?} are not a bijection of 1..={1}")]
    NotABijection(Vec<usize>, usize),
    #[error("terms of arity {got_arity}, weight {got_weight} cannot join a combination of arity {want_arity}, weight {want_weight}")]
    GradingMismatch { got_arity: usize, got_weight: usize, want_arity: usize, want_weight: usize },
}

/// A permutation of {1..n}, stored as the list of images σ(1), …, σ(n).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm { images: (1..=n).collect() }
    }

    /// Builds a permutation from its image list, rejecting non-bijections.
    pub fn from_images(images: Vec<usize>) -> Result<Perm, TreeError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v < 1 || v > n || seen[v - 1] {
                return Err(TreeError::NotABijection(images.clone(), n));
            }
            seen[v - 1] = true;
        }
        Ok(Perm { images })
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    /// σ(i) for 1-based i.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// self ∘ other: first apply `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.size(), other.size(), "composing permutations of different sizes");
        Perm { images: other.images.iter().map(|&v| self.images[v - 1]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v - 1] = i + 1;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// (−1)^{number of inversions}.
    pub fn sign(&self) -> i32 {
        let mut inv = 0usize;
        for i in 0..self.images.len() {
            for j in i + 1..self.images.len() {
                if self.images[i] > self.images[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 { 1 } else { -1 }
    }

    /// All permutations of {1..n} in lexicographic order of their image lists.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut avail: Vec<usize> = (1..=n).collect();
        let mut cur = Vec::new();
        fn rec(avail: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Perm>) {
            if avail.is_empty() {
                out.push(Perm { images: cur.clone() });
                return;
            }
            for i in 0..avail.len() {
                let v = avail.remove(i);
                cur.push(v);
                rec(avail, cur, out);
                cur.pop();
                avail.insert(i, v);
            }
        }
        rec(&mut avail, &mut cur, &mut out);
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images)
    }
}

/// A generating operation symbol: a name, an arity, a homological degree,
/// and a flag marking the suspended copy (degree shifted up by one).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GenSym {
    pub name: String,
    pub arity: usize,
    pub degree: i64,
    pub suspended: bool,
}

impl GenSym {
    pub fn new(name: &str, arity: usize, degree: i64) -> GenSym {
        assert!(arity >= 1, "generator arity must be at least 1");
        GenSym { name: name.to_string(), arity, degree, suspended: false }
    }

    /// The suspended copy of this symbol, one degree higher.
    pub fn suspend(&self) -> GenSym {
        assert!(!self.suspended, "symbol {} is already suspended", self.name);
        GenSym { suspended: true, ..self.clone() }
    }

    /// Degree as a letter in a monomial word: base degree, plus one if suspended.
    pub fn effective_degree(&self) -> i64 {
        self.degree + i64::from(self.suspended)
    }
}

/// A node of a planar tree: a leaf carrying an input label, or an internal
/// vertex carrying a generator symbol and an ordered list of children.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Leaf(usize),
    Vertex(GenSym, Vec<Node>),
}

/// A rooted planar tree monomial. Equality is structural: planar order and
/// leaf labels both count. The bare leaf `Leaf(1)` is the distinguished
/// identity token of arity 1, weight 0, degree 0.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TreeMonomial {
    pub root: Node,
}

/// Canonical comparison key: preorder shape code, then vertex symbols in
/// preorder, then the leaf label word.
pub type MonKey = (Vec<usize>, Vec<(String, usize, i64, bool)>, Vec<usize>);

impl TreeMonomial {
    /// The identity cooperation token: arity 1, weight 0, degree 0.
    pub fn identity() -> TreeMonomial {
        TreeMonomial { root: Node::Leaf(1) }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.root, Node::Leaf(_))
    }

    /// The one-vertex tree on `g` with leaves labeled 1..arity in planar order.
    pub fn corolla(g: &GenSym) -> TreeMonomial {
        Self::corolla_with(g, &(1..=g.arity).collect::<Vec<_>>())
    }

    /// The one-vertex tree on `g` with the given leaf labels in planar order.
    pub fn corolla_with(g: &GenSym, labels: &[usize]) -> TreeMonomial {
        assert_eq!(labels.len(), g.arity, "label count must match arity of {}", g.name);
        TreeMonomial { root: Node::Vertex(g.clone(), labels.iter().map(|&l| Node::Leaf(l)).collect()) }
    }

    pub fn arity(&self) -> usize {
        fn count(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 1,
                Node::Vertex(_, ch) => ch.iter().map(count).sum(),
            }
        }
        count(&self.root)
    }

    pub fn weight(&self) -> usize {
        self.vertices().len()
    }

    /// Sum of the effective degrees of all vertex symbols.
    pub fn degree(&self) -> i64 {
        self.vertices().iter().map(|g| g.effective_degree()).sum()
    }

    /// Vertex symbols in planar preorder: this is the monomial's letter word.
    pub fn vertices(&self) -> Vec<&GenSym> {
        fn walk<'a>(n: &'a Node, out: &mut Vec<&'a GenSym>) {
            if let Node::Vertex(g, ch) = n {
                out.push(g);
                for c in ch {
                    walk(c, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// Leaf labels in planar left-to-right order.
    pub fn leaf_word(&self) -> Vec<usize> {
        fn walk(n: &Node, out: &mut Vec<usize>) {
            match n {
                Node::Leaf(l) => out.push(*l),
                Node::Vertex(_, ch) => {
                    for c in ch {
                        walk(c, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// The leaf word as a permutation (valid when labels are exactly 1..n).
    pub fn leaf_perm(&self) -> Result<Perm, TreeError> {
        Perm::from_images(self.leaf_word())
    }

    /// Applies `f` to every leaf label.
    pub fn relabeled(&self, f: &impl Fn(usize) -> usize) -> TreeMonomial {
        fn walk(n: &Node, f: &impl Fn(usize) -> usize) -> Node {
            match n {
                Node::Leaf(l) => Node::Leaf(f(*l)),
                Node::Vertex(g, ch) => Node::Vertex(g.clone(), ch.iter().map(|c| walk(c, f)).collect()),
            }
        }
        TreeMonomial { root: walk(&self.root, f) }
    }

    /// Replaces each leaf label by its rank (1-based) among this tree's labels.
    pub fn relabeled_by_rank(&self) -> TreeMonomial {
        let sorted: Vec<usize> = {
            let set: BTreeSet<usize> = self.leaf_word().into_iter().collect();
            set.into_iter().collect()
        };
        self.relabeled(&|l| sorted.binary_search(&l).expect("label present") + 1)
    }

    pub fn sort_key(&self) -> MonKey {
        let mut shape = Vec::new();
        let mut syms = Vec::new();
        let mut leaves = Vec::new();
        fn walk(
            n: &Node,
            shape: &mut Vec<usize>,
            syms: &mut Vec<(String, usize, i64, bool)>,
            leaves: &mut Vec<usize>,
        ) {
            match n {
                Node::Leaf(l) => {
                    shape.push(0);
                    leaves.push(*l);
                }
                Node::Vertex(g, ch) => {
                    shape.push(ch.len() + 1);
                    syms.push((g.name.clone(), g.arity, g.degree, g.suspended));
                    for c in ch {
                        walk(c, shape, syms, leaves);
                    }
                }
            }
        }
        walk(&self.root, &mut shape, &mut syms, &mut leaves);
        (shape, syms, leaves)
    }
}

impl PartialOrd for TreeMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TreeMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for TreeMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn walk(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                Node::Leaf(l) => write!(f, "{l}"),
                Node::Vertex(g, ch) => {
                    if g.suspended {
                        write!(f, "s")?;
                    }
                    write!(f, "{}(", g.name)?;
                    for (i, c) in ch.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        walk(c, f)?;
                    }
                    write!(f, ")")
                }
            }
        }
        walk(&self.root, f)
    }
}

/// A linear combination of tree monomials of one fixed arity and weight,
/// kept sorted in canonical monomial order with no zero coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeVec {
    pub arity: usize,
    pub weight: usize,
    pub terms: Vec<(Rat, TreeMonomial)>,
}

impl TreeVec {
    pub fn zero(arity: usize, weight: usize) -> TreeVec {
        TreeVec { arity, weight, terms: Vec::new() }
    }

    pub fn monomial(c: Rat, t: TreeMonomial) -> TreeVec {
        let (arity, weight) = (t.arity(), t.weight());
        let mut v = TreeVec::zero(arity, weight);
        if !c.is_zero() {
            v.terms.push((c, t));
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sorts terms, merges duplicates, and drops zero coefficients.
    pub fn normalized(mut self) -> TreeVec {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(Rat, TreeMonomial)> = Vec::new();
        for (c, t) in self.terms {
            match merged.last_mut() {
                Some((lc, lt)) if *lt == t => *lc = lc.clone() + c,
                _ => merged.push((c, t)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        TreeVec { arity: self.arity, weight: self.weight, terms: merged }
    }

    pub fn add(&self, other: &TreeVec) -> Result<TreeVec, TreeError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.arity != other.arity || self.weight != other.weight {
            return Err(TreeError::GradingMismatch {
                got_arity: other.arity,
                got_weight: other.weight,
                want_arity: self.arity,
                want_weight: self.weight,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(TreeVec { arity: self.arity, weight: self.weight, terms }.normalized())
    }

    pub fn scale(&self, c: &Rat) -> TreeVec {
        if c.is_zero() {
            return TreeVec::zero(self.arity, self.weight);
        }
        TreeVec {
            arity: self.arity,
            weight: self.weight,
            terms: self.terms.iter().map(|(x, t)| (x * c, t.clone())).collect(),
        }
    }

    /// Coordinates with respect to an ordered basis of monomials.
    pub fn coords(&self, basis: &[TreeMonomial]) -> SVec<Rat> {
        let mut entries = Vec::new();
        for (c, t) in &self.terms {
            let idx = basis.binary_search(t).expect("monomial lies in the basis");
            entries.push((idx, c.clone()));
        }
        entries.sort_by_key(|(i, _)| *i);
        SVec(entries)
    }

    /// Rebuilds a combination from coordinates in an ordered monomial basis.
    pub fn from_coords(arity: usize, weight: usize, basis: &[TreeMonomial], v: &SVec<Rat>) -> TreeVec {
        let terms = v.0.iter().map(|(i, c)| (c.clone(), basis[*i].clone())).collect();
        TreeVec { arity, weight, terms }
    }
}

impl fmt::Display for TreeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, t)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{t}")?;
        }
        Ok(())
    }
}

fn compositions(total: usize, parts: usize, min: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let hi = total.saturating_sub(min.saturating_mul(parts - 1));
    for first in min..=hi {
        for mut rest in compositions(total - first, parts - 1, min) {
            let mut c = vec![first];
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

fn shapes(gens: &[GenSym], arity: usize, weight: usize) -> Vec<Node> {
    if weight == 0 {
        return if arity == 1 { vec![Node::Leaf(0)] } else { vec![] };
    }
    let mut out = Vec::new();
    for g in gens {
        let k = g.arity;
        for arity_comp in compositions(arity, k, 1) {
            for weight_comp in compositions(weight - 1, k, 0) {
                let options: Vec<Vec<Node>> = arity_comp
                    .iter()
                    .zip(&weight_comp)
                    .map(|(&a, &w)| shapes(gens, a, w))
                    .collect();
                if options.iter().any(|o| o.is_empty()) {
                    continue;
                }
                let mut combos: Vec<Vec<Node>> = vec![Vec::new()];
                for opt in &options {
                    let mut next = Vec::new();
                    for partial in &combos {
                        for node in opt {
                            let mut p = partial.clone();
                            p.push(node.clone());
                            next.push(p);
                        }
                    }
                    combos = next;
                }
                for children in combos {
                    out.push(Node::Vertex(g.clone(), children));
                }
            }
        }
    }
    out
}

fn fill_labels(shape: &Node, word: &[usize]) -> Node {
    fn walk(n: &Node, word: &[usize], pos: &mut usize) -> Node {
        match n {
            Node::Leaf(_) => {
                let l = word[*pos];
                *pos += 1;
                Node::Leaf(l)
            }
            Node::Vertex(g, ch) => {
                Node::Vertex(g.clone(), ch.iter().map(|c| walk(c, word, pos)).collect())
            }
        }
    }
    let mut pos = 0;
    walk(shape, word, &mut pos)
}

/// Enumerates every planar tree monomial with the given arity and weight,
/// in canonical order. The order is the index used by coordinate vectors.
pub fn enumerate_monomials(gens: &[GenSym], arity: usize, weight: usize) -> Vec<TreeMonomial> {
    assert!(arity >= 1, "arity must be at least 1");
    assert!(weight >= 1, "weight must be at least 1");
    let mut out = Vec::new();
    for shape in shapes(gens, arity, weight) {
        for p in Perm::all(arity) {
            out.push(TreeMonomial { root: fill_labels(&shape, p.images()) });
        }
    }
    out.sort();
    out
}

/// The Koszul sign of permuting graded letters: (−1)^{Σ |x_i||x_j|} over
/// pairs i < j with σ(i) > σ(j). Degrees are listed in the original order.
pub fn koszul_sign(degrees: &[i64], sigma: &Perm) -> i32 {
    assert_eq!(degrees.len(), sigma.size(), "degree list and permutation must agree");
    let mut acc: i64 = 0;
    for i in 0..degrees.len() {
        for j in i + 1..degrees.len() {
            if sigma.apply(i + 1) > sigma.apply(j + 1) {
                acc += degrees[i] * degrees[j];
            }
        }
    }
    if acc % 2 == 0 { 1 } else { -1 }
}

/// Partial composition: substitutes `child` into input `slot` of `parent`.
///
/// Leaf labels follow the standard block substitution: parent labels above
/// `slot` shift up by arity(child) − 1, and child labels move to the block
/// starting at `slot`. The sign is the Koszul sign of moving the child's
/// letter word from the end of the combined word to its preorder position,
/// which crosses exactly the parent letters visited after the grafted leaf.
pub fn graft(
    parent: &TreeMonomial,
    slot: usize,
    child: &TreeMonomial,
) -> Result<(i32, TreeMonomial), TreeError> {
    let m = parent.arity();
    if slot < 1 || slot > m {
        return Err(TreeError::SlotOutOfRange { slot, arity: m });
    }
    let n = child.arity();

    // Degree of parent letters visited after the leaf labeled `slot`.
    fn after_degree(node: &Node, slot: usize, seen: &mut bool, acc: &mut i64) {
        match node {
            Node::Leaf(l) => {
                if *l == slot {
                    *seen = true;
                }
            }
            Node::Vertex(g, ch) => {
                if *seen {
                    *acc += g.effective_degree();
                }
                for c in ch {
                    after_degree(c, slot, seen, acc);
                }
            }
        }
    }
    let mut seen = false;
    let mut after = 0i64;
    after_degree(&parent.root, slot, &mut seen, &mut after);
    debug_assert!(seen, "leaf labeled {slot} must exist");

    let sign = if (child.degree() * after) % 2 == 0 { 1 } else { -1 };

    fn rebuild(node: &Node, slot: usize, n: usize, child: &TreeMonomial) -> Node {
        match node {
            Node::Leaf(l) => {
                if *l == slot {
                    child.relabeled(&|i| slot + i - 1).root
                } else if *l > slot {
                    Node::Leaf(*l + n - 1)
                } else {
                    Node::Leaf(*l)
                }
            }
            Node::Vertex(g, ch) => {
                Node::Vertex(g.clone(), ch.iter().map(|c| rebuild(c, slot, n, child)).collect())
            }
        }
    }
    let root = rebuild(&parent.root, slot, n, child);
    Ok((sign, TreeMonomial { root }))
}

/// Grafts `parts[j]` into input j+1 of `base` for every j, left to right,
/// accumulating the Koszul signs of each graft.
pub fn compose_all(base: &TreeMonomial, parts: &[TreeMonomial]) -> (i32, TreeMonomial) {
    assert_eq!(parts.len(), base.arity(), "one part per input of the base");
    let mut t = base.clone();
    let mut sign = 1;
    let mut offset = 0;
    for (idx, part) in parts.iter().enumerate() {
        let slot = idx + 1 + offset;
        let (s, next) = graft(&t, slot, part).expect("slot in range");
        sign *= s;
        t = next;
        offset += part.arity() - 1;
    }
    (sign, t)
}

/// Full composition x(T_1, …, T_m): each part keeps its own local labels
/// 1..n_i, and the result labels part i by the i-th consecutive block.
///
/// Grafting the parts left to right moves no letters past each other, so the
/// composite is sign-free and its letter word is x followed by the parts'
/// words in order.
pub fn compose_full(root: &GenSym, parts: &[TreeMonomial]) -> TreeMonomial {
    let (sign, t) = compose_all(&TreeMonomial::corolla(root), parts);
    debug_assert_eq!(sign, 1, "left-to-right grafting into a corolla crosses no letters");
    t
}

/// Linear extension of `graft` to combinations, with signs folded into the
/// coefficients.
pub fn graft_vec(outer: &TreeVec, slot: usize, inner: &TreeVec) -> Result<TreeVec, TreeError> {
    let arity = outer.arity + inner.arity - 1;
    let weight = outer.weight + inner.weight;
    let mut terms = Vec::new();
    for (c1, t1) in &outer.terms {
        for (c2, t2) in &inner.terms {
            let (sign, t) = graft(t1, slot, t2)?;
            let c = c1 * c2 * Rat::from_integer(sign.into());
            terms.push((c, t));
        }
    }
    Ok(TreeVec { arity, weight, terms }.normalized())
}

/// Splits a monomial at its last vertex (the vertex adjacent to the root):
/// returns (sign, root symbol x, branch subtrees with local labels, σ) with
/// t = sign · act(σ, x(T_1, …, T_m)).
///
/// Branches are relabeled by rank; σ⁻¹ is the concatenation of each branch's
/// sorted global labels. The branch words sit in the same planar positions
/// before and after, so no letters cross and the sign is always +1; it stays
/// in the signature because callers fold in suspension signs of their own.
pub fn last_vertex_split(t: &TreeMonomial) -> (i32, GenSym, Vec<TreeMonomial>, Perm) {
    match &t.root {
        Node::Leaf(_) => panic!("cannot split the identity token"),
        Node::Vertex(g, children) => {
            let mut sigma_inv_images = Vec::new();
            let mut parts = Vec::new();
            for c in children {
                let branch = TreeMonomial { root: c.clone() };
                let mut labels = branch.leaf_word();
                labels.sort_unstable();
                sigma_inv_images.extend(labels.iter().copied());
                parts.push(branch.relabeled_by_rank());
            }
            let sigma_inv = Perm::from_images(sigma_inv_images).expect("leaf labels form a bijection");
            (1, g.clone(), parts, sigma_inv.inverse())
        }
    }
}

/// Relabels one monomial by the right action of σ: leaf label l becomes σ⁻¹(l).
pub fn act_monomial(sigma: &Perm, t: &TreeMonomial) -> TreeMonomial {
    let inv = sigma.inverse();
    t.relabeled(&|l| inv.apply(l))
}

/// Right action of σ on a combination: relabels every monomial, coefficients
/// untouched. Signs for graded generator symmetries enter at the quotient
/// stage, not here; the raw action only permutes inputs.
pub fn act(sigma: &Perm, t: &TreeVec) -> Result<TreeVec, TreeError> {
    if sigma.size() != t.arity {
        return Err(TreeError::SizeMismatch { got: sigma.size(), want: t.arity });
    }
    let terms = t.terms.iter().map(|(c, m)| (c.clone(), act_monomial(sigma, m))).collect();
    Ok(TreeVec { arity: t.arity, weight: t.weight, terms }.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rint;

    fn mu() -> GenSym {
        GenSym::new("mu", 2, 0)
    }

    fn nu() -> GenSym {
        GenSym::new("nu", 2, 0)
    }

    fn tri() -> GenSym {
        GenSym::new("tri", 1, 0)
    }

    #[test]
    fn corolla_enumeration_counts_match_forced_values() {
        let gens = [mu()];
        assert_eq!(enumerate_monomials(&gens, 2, 1).len(), 2);
        assert_eq!(enumerate_monomials(&gens, 3, 2).len(), 12);
        let unary = [tri()];
        for w in 1..=4 {
            assert_eq!(enumerate_monomials(&unary, 1, w).len(), 1, "chain of weight {w}");
        }
        assert_eq!(enumerate_monomials(&gens, 4, 3).len(), 120, "5 binary shapes, 24 labelings");
        assert!(enumerate_monomials(&gens, 4, 2).is_empty(), "two binary vertices only reach arity 3");
    }

    #[test]
    fn enumeration_is_deterministic_and_duplicate_free() {
        let gens = [mu(), nu()];
        let a = enumerate_monomials(&gens, 3, 2);
        let b = enumerate_monomials(&gens, 3, 2);
        assert_eq!(a, b);
        let mut dedup = a.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), a.len(), "no repeated monomials");
        assert_eq!(a.len(), 48, "2 shapes, 2 symbol choices per vertex, 6 labelings");
    }

    #[test]
    fn koszul_sign_basic_cases() {
        let id = Perm::identity(3);
        assert_eq!(koszul_sign(&[1, 2, 3], &id), 1);
        let swap = Perm::from_images(vec![2, 1]).unwrap();
        assert_eq!(koszul_sign(&[1, 1], &swap), -1, "two odd letters transpose");
        assert_eq!(koszul_sign(&[1, 2], &swap), 1, "odd past even");
        assert_eq!(koszul_sign(&[3, 5], &swap), -1);
    }

    #[test]
    fn koszul_sign_inverse_cancels() {
        let degrees = [1i64, 2, 1, 3];
        for sigma in Perm::all(4) {
            let permuted: Vec<i64> =
                (1..=4).map(|k| degrees[sigma.inverse().apply(k) - 1]).collect();
            let fwd = koszul_sign(&degrees, &sigma);
            let back = koszul_sign(&permuted, &sigma.inverse());
            assert_eq!(fwd * back, 1, "round trip for {sigma:?}");
        }
    }

    #[test]
    fn graft_of_even_symbols_is_sign_free_left_comb() {
        let p = TreeMonomial::corolla(&mu());
        let c = TreeMonomial::corolla(&nu());
        let (sign, t) = graft(&p, 1, &c).unwrap();
        assert_eq!(sign, 1);
        assert_eq!(t.to_string(), "mu(nu(1,2),3)");
        assert_eq!(t.arity(), 3);
        assert_eq!(t.weight(), 2);
    }

    #[test]
    fn graft_slot_out_of_range_is_an_error() {
        let p = TreeMonomial::corolla(&mu());
        let c = TreeMonomial::corolla(&nu());
        assert_eq!(
            graft(&p, 3, &c).unwrap_err(),
            TreeError::SlotOutOfRange { slot: 3, arity: 2 }
        );
    }

    #[test]
    fn graft_crossing_a_suspended_letter_flips_sign() {
        let smu = mu().suspend();
        let snu = nu().suspend();
        // Parent smu(1, snu(2,3)): grafting at slot 1 moves the child word
        // past the snu letter, odd times odd.
        let inner = TreeMonomial::corolla(&snu);
        let (s0, parent) = graft(&TreeMonomial::corolla(&smu), 2, &inner).unwrap();
        assert_eq!(s0, 1, "nothing after the last slot");
        assert_eq!(parent.to_string(), "smu(1,snu(2,3))");
        let child = TreeMonomial::corolla(&snu);
        let (sign, t) = graft(&parent, 1, &child).unwrap();
        assert_eq!(sign, -1);
        assert_eq!(t.to_string(), "smu(snu(1,2),snu(3,4))");
    }

    #[test]
    fn graft_of_unary_chains_builds_longer_chain() {
        let d1 = TreeMonomial::corolla(&tri().suspend());
        let (sign, d2) = graft(&d1, 1, &d1).unwrap();
        assert_eq!(sign, 1);
        assert_eq!(d2.to_string(), "stri(stri(1))");
        assert_eq!(d2.weight(), 2);
        assert_eq!(d2.arity(), 1);
    }

    #[test]
    fn graft_with_identity_on_either_side_is_neutral() {
        let t = TreeMonomial::corolla_with(&mu(), &[2, 1]);
        let id = TreeMonomial::identity();
        let (s1, a) = graft(&t, 1, &id).unwrap();
        let (s2, b) = graft(&id, 1, &t).unwrap();
        assert_eq!((s1, &a), (1, &t));
        assert_eq!((s2, &b), (1, &t));
    }

    #[test]
    fn last_vertex_split_of_a_corolla_is_trivial() {
        let g = GenSym::new("gamma", 3, 1);
        let t = TreeMonomial::corolla(&g);
        let (sign, label, parts, sigma) = last_vertex_split(&t);
        assert_eq!(sign, 1);
        assert_eq!(label, g);
        assert_eq!(parts, vec![TreeMonomial::identity(); 3]);
        assert!(sigma.is_identity());
    }

    #[test]
    fn last_vertex_split_of_a_chain_peels_one_vertex() {
        let d1 = TreeMonomial::corolla(&tri().suspend());
        let (_, d2) = graft(&d1, 1, &d1).unwrap();
        let (_, d3) = graft(&d1, 1, &d2).unwrap();
        let (sign, label, parts, sigma) = last_vertex_split(&d3);
        assert_eq!(sign, 1);
        assert_eq!(label, tri().suspend());
        assert_eq!(parts, vec![d2]);
        assert!(sigma.is_identity());
    }

    #[test]
    fn last_vertex_split_of_left_comb_matches_structure() {
        let p = TreeMonomial::corolla(&mu());
        let (_, comb) = graft(&p, 1, &p).unwrap();
        let (sign, label, parts, sigma) = last_vertex_split(&comb);
        assert_eq!(sign, 1);
        assert_eq!(label, mu());
        assert_eq!(parts, vec![TreeMonomial::corolla(&mu()), TreeMonomial::identity()]);
        assert!(sigma.is_identity());
    }

    #[test]
    fn split_then_reassemble_recovers_the_monomial() {
        let smu = mu().suspend();
        let snu = nu().suspend();
        let inner = TreeMonomial::corolla_with(&snu, &[2, 1]);
        let (_, t0) = graft(&TreeMonomial::corolla_with(&smu, &[2, 1]), 2, &inner).unwrap();
        for sigma in Perm::all(t0.arity()) {
            let t = act_monomial(&sigma, &t0);
            let (sign, label, parts, tau) = last_vertex_split(&t);
            assert_eq!(sign, 1);
            let rebuilt = act_monomial(&tau, &compose_full(&label, &parts));
            assert_eq!(rebuilt, t, "round trip through split and reassembly");
        }
    }

    #[test]
    fn act_is_a_right_action() {
        let gens = [mu()];
        let basis = enumerate_monomials(&gens, 3, 2);
        let t = TreeVec::monomial(rint(1), basis[5].clone());
        assert_eq!(act(&Perm::identity(3), &t).unwrap(), t);
        for sigma in Perm::all(3) {
            for tau in Perm::all(3) {
                let lhs = act(&sigma, &act(&tau, &t).unwrap()).unwrap();
                let rhs = act(&tau.compose(&sigma), &t).unwrap();
                assert_eq!(lhs, rhs, "act({sigma:?}) after act({tau:?})");
            }
        }
    }

    #[test]
    fn acting_by_a_transposition_moves_corollas_off_themselves() {
        let g = GenSym::new("mu3", 3, 0);
        let t = TreeMonomial::corolla(&g);
        let swap = Perm::from_images(vec![2, 1, 3]).unwrap();
        assert_ne!(act_monomial(&swap, &t), t);
    }

    #[test]
    fn act_size_mismatch_is_an_error() {
        let t = TreeVec::monomial(rint(1), TreeMonomial::corolla(&mu()));
        let sigma = Perm::identity(3);
        assert_eq!(
            act(&sigma, &t).unwrap_err(),
            TreeError::SizeMismatch { got: 3, want: 2 }
        );
    }

    #[test]
    fn coords_round_trip_through_a_basis() {
        let gens = [mu()];
        let basis = enumerate_monomials(&gens, 3, 2);
        let v = TreeVec::monomial(rint(2), basis[0].clone())
            .add(&TreeVec::monomial(rint(-3), basis[7].clone()))
            .unwrap();
        let coords = v.coords(&basis);
        let back = TreeVec::from_coords(3, 2, &basis, &coords);
        assert_eq!(back, v);
    }
}
