//! Exact sparse linear algebra over an arbitrary field.
//!
//! Everything in this module is generic over a [`Field`] scalar (any type with
//! exact `+ - * /`, so `BigRational`, `f64`, or a finite field wrapper all
//! qualify; the rest of the crate uses `BigRational`). Matrices are stored as
//! sparse rows; subspaces are stored in reduced row echelon form, which makes
//! the representation canonical: two subspaces are equal if and only if their
//! basis lists are equal componentwise.
//!
//! There are no tolerances: a pivot is any exactly nonzero entry.

use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar bound for all linear algebra in this crate.
///
/// Implemented automatically for every type with exact field operations and
/// equality, e.g. `f32`, `f64`, and `num_rational::BigRational`.
pub trait Field:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
}

impl<T> Field for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Neg<Output = T>
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
{
}

/// Errors for operations whose failure is structural rather than a value.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LinalgError {
    /// Two objects that must share an ambient dimension do not.
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    /// `homology` was called on maps whose composite is not zero.
    #[error("not a complex: d_out . d_in has a nonzero entry at ({0}, {1})")]
    NotAComplex(usize, usize),
}

/// A sparse vector: strictly increasing column indices paired with nonzero
/// entries. The empty vector is the zero vector of any length.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SVec<F>(pub Vec<(usize, F)>);

impl<F: Field> SVec<F> {
    pub fn zero() -> Self {
        SVec(Vec::new())
    }

    pub fn unit(i: usize) -> Self {
        SVec(vec![(i, F::one())])
    }

    pub fn from_dense(v: &[F]) -> Self {
        SVec(
            v.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| (i, x.clone()))
                .collect(),
        )
    }

    pub fn to_dense(&self, len: usize) -> Vec<F> {
        let mut out = vec![F::zero(); len];
        for (i, x) in &self.0 {
            out[*i] = x.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> F {
        match self.0.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(pos) => self.0[pos].1.clone(),
            Err(_) => F::zero(),
        }
    }

    /// First (lowest-index) nonzero coordinate, if any.
    pub fn leading(&self) -> Option<(usize, &F)> {
        self.0.first().map(|(i, x)| (*i, x))
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return SVec::zero();
        }
        SVec(self.0.iter().map(|(i, x)| (*i, x.clone() * c.clone())).collect())
    }

    /// `self + c * other`, merging sorted entry lists and dropping exact zeros.
    pub fn add_scaled(&self, c: &F, other: &SVec<F>) -> Self {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, y.clone() * c.clone()));
                        b.next();
                    } else {
                        let s = x.clone() + y.clone() * c.clone();
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, y.clone() * c.clone()));
                    b.next();
                }
                (None, None) => break,
            }
        }
        SVec(out)
    }

    pub fn add(&self, other: &SVec<F>) -> Self {
        self.add_scaled(&F::one(), other)
    }

    pub fn sub(&self, other: &SVec<F>) -> Self {
        self.add_scaled(&(-F::one()), other)
    }

    pub fn dot(&self, other: &SVec<F>) -> F {
        let mut acc = F::zero();
        let mut b = other.0.iter().peekable();
        for (i, x) in &self.0 {
            while let Some((j, _)) = b.peek() {
                if j < i {
                    b.next();
                } else {
                    break;
                }
            }
            if let Some((j, y)) = b.peek() {
                if j == i {
                    acc = acc + x.clone() * (*y).clone();
                }
            }
        }
        acc
    }

    /// Map column indices through `f` (must be strictly increasing on the support).
    pub fn map_indices(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut v: Vec<(usize, F)> = self.0.iter().map(|(i, x)| (f(*i), x.clone())).collect();
        v.sort_by_key(|(i, _)| *i);
        SVec(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, F)> {
        self.0.iter()
    }
}

/// A sparse matrix with explicit dimensions, stored by rows.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<F> {
    nrows: usize,
    ncols: usize,
    rows: Vec<SVec<F>>,
}

impl<F: Field> Mat<F> {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Mat { nrows, ncols, rows: vec![SVec::zero(); nrows] }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(SVec::unit).collect();
        Mat { nrows: n, ncols: n, rows }
    }

    pub fn from_rows(ncols: usize, rows: Vec<SVec<F>>) -> Self {
        for r in &rows {
            if let Some((i, _)) = r.0.last() {
                assert!(*i < ncols, "row entry out of bounds");
            }
        }
        Mat { nrows: rows.len(), ncols, rows }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, F)]) -> Self {
        let mut m = Mat::zero(nrows, ncols);
        for (i, j, x) in triplets {
            assert!(*i < nrows && *j < ncols, "triplet out of bounds");
            m.add_to(*i, *j, x.clone());
        }
        m
    }

    pub fn from_dense(rows: Vec<Vec<F>>) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Mat {
            nrows: rows.len(),
            ncols,
            rows: rows.iter().map(|r| SVec::from_dense(r)).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &SVec<F> {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, x: F) {
        let row = &mut self.rows[i];
        match row.0.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(pos) => {
                if x.is_zero() {
                    row.0.remove(pos);
                } else {
                    row.0[pos].1 = x;
                }
            }
            Err(pos) => {
                if !x.is_zero() {
                    row.0.insert(pos, (j, x));
                }
            }
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, x: F) {
        let cur = self.get(i, j);
        self.set(i, j, cur + x);
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(SVec::is_zero)
    }

    pub fn transpose(&self) -> Mat<F> {
        let mut cols: Vec<SVec<F>> = vec![SVec::zero(); self.ncols];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, x) in &row.0 {
                cols[*j].0.push((i, x.clone()));
            }
        }
        Mat { nrows: self.ncols, ncols: self.nrows, rows: cols }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(self.ncols, other.nrows, "matrix product shape mismatch");
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = SVec::zero();
                for (k, x) in &r.0 {
                    acc = acc.add_scaled(x, &other.rows[*k]);
                }
                acc
            })
            .collect();
        Mat { nrows: self.nrows, ncols: other.ncols, rows }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &SVec<F>) -> SVec<F> {
        if let Some((i, _)) = v.0.last() {
            assert!(*i < self.ncols, "vector length exceeds column count");
        }
        let mut acc = SVec::zero();
        // Column-oriented accumulation: v_k * column_k summed via rows.
        let mut out: Vec<(usize, F)> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let x = row.dot(v);
            if !x.is_zero() {
                out.push((i, x));
            }
        }
        acc.0 = out;
        acc
    }

    pub fn add(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "matrix sum shape mismatch");
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a.add(b)).collect();
        Mat { nrows: self.nrows, ncols: self.ncols, rows }
    }

    pub fn sub(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "matrix difference shape mismatch");
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a.sub(b)).collect();
        Mat { nrows: self.nrows, ncols: self.ncols, rows }
    }

    pub fn scale(&self, c: &F) -> Mat<F> {
        let rows = self.rows.iter().map(|r| r.scale(c)).collect();
        Mat { nrows: self.nrows, ncols: self.ncols, rows }
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(self.ncols, other.ncols, "vstack column mismatch");
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Mat { nrows: self.nrows + other.nrows, ncols: self.ncols, rows }
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(self.nrows, other.nrows, "hstack row mismatch");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut r = a.clone();
                r.0.extend(b.0.iter().map(|(j, x)| (j + self.ncols, x.clone())));
                r
            })
            .collect();
        Mat { nrows: self.nrows, ncols: self.ncols + other.ncols, rows }
    }

    pub fn column(&self, j: usize) -> SVec<F> {
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let x = row.get(j);
            if !x.is_zero() {
                out.push((i, x));
            }
        }
        SVec(out)
    }

    pub fn columns(&self) -> Vec<SVec<F>> {
        let mut cols: Vec<SVec<F>> = vec![SVec::zero(); self.ncols];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, x) in &row.0 {
                cols[*j].0.push((i, x.clone()));
            }
        }
        cols
    }
}

impl<F: fmt::Debug> fmt::Debug for Mat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.nrows, self.ncols)?;
        for row in &self.rows {
            writeln!(f, "  {:?}", row.0)?;
        }
        write!(f, "]")
    }
}

/// Result of a reduced row echelon computation.
pub struct Rref<F> {
    /// Nonzero rows in reduced echelon form, pivots strictly increasing.
    pub rows: Vec<SVec<F>>,
    /// Pivot column of each row, strictly increasing.
    pub pivots: Vec<usize>,
}

impl<F: Field> Rref<F> {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

impl<F: Field> Rref<F> {
    pub fn new() -> Rref<F> {
        Rref { rows: Vec::new(), pivots: Vec::new() }
    }

    /// Reduces `v` against the echelon rows; a nonzero residual becomes a new
    /// normalized pivot row. Returns whether `v` was independent.
    pub fn insert(&mut self, mut v: SVec<F>) -> bool {
        for (pos, p) in self.pivots.iter().enumerate() {
            let c = v.get(*p);
            if !c.is_zero() {
                v = v.add_scaled(&(-c), &self.rows[pos]);
            }
        }
        let (lead, x) = match v.leading() {
            Some((c, x)) => (c, x.clone()),
            None => return false,
        };
        let inv = F::one() / x;
        v = v.scale(&inv);
        for r in self.rows.iter_mut() {
            let c = r.get(lead);
            if !c.is_zero() {
                *r = r.add_scaled(&(-c), &v);
            }
        }
        let pos = self.pivots.binary_search(&lead).unwrap_err();
        self.rows.insert(pos, v);
        self.pivots.insert(pos, lead);
        true
    }
}

impl<F: Field> Default for Rref<F> {
    fn default() -> Self {
        Rref::new()
    }
}

/// Reduced row echelon form of a list of sparse rows.
///
/// The output is canonical for the row space: leading entries are 1, pivot
/// columns are strictly increasing, and pivot columns are cleared in every
/// other row. Zero rows are dropped.
pub fn rref_rows<F: Field>(input: Vec<SVec<F>>) -> Rref<F> {
    let mut r = Rref::new();
    for v in input {
        r.insert(v);
    }
    r
}

/// Reduced row echelon form of a matrix (its row space).
pub fn rref<F: Field>(m: &Mat<F>) -> Rref<F> {
    rref_rows(m.rows.clone())
}

/// A linear subspace of a coordinate space, stored canonically.
///
/// The basis is in reduced row echelon form, so `Subspace` equality (derived,
/// componentwise) coincides with equality of subspaces.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace<F> {
    ambient: usize,
    basis: Vec<SVec<F>>,
    pivots: Vec<usize>,
}

impl<F: Field> Subspace<F> {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient).map(SVec::unit).collect(),
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of the given vectors inside a space of dimension `ambient`.
    pub fn span(ambient: usize, vectors: Vec<SVec<F>>) -> Self {
        for v in &vectors {
            if let Some((i, _)) = v.0.last() {
                assert!(*i < ambient, "vector exceeds ambient dimension");
            }
        }
        let r = rref_rows(vectors);
        Subspace { ambient, basis: r.rows, pivots: r.pivots }
    }

    /// Wraps an already-computed echelon form as a subspace.
    pub fn from_rref(ambient: usize, r: Rref<F>) -> Self {
        Subspace { ambient, basis: r.rows, pivots: r.pivots }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SVec<F>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residual of `v` against the subspace: `v - (expansion over the basis)`.
    /// Zero exactly when `v` lies in the subspace.
    pub fn residual(&self, v: &SVec<F>) -> SVec<F> {
        let mut r = v.clone();
        for (row, p) in self.basis.iter().zip(&self.pivots) {
            let c = r.get(*p);
            if !c.is_zero() {
                r = r.add_scaled(&(-c), row);
            }
        }
        r
    }

    pub fn contains(&self, v: &SVec<F>) -> bool {
        self.residual(v).is_zero()
    }

    /// Coordinates of `v` over the echelon basis, or `None` if `v` is outside.
    pub fn coords_of(&self, v: &SVec<F>) -> Option<Vec<F>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|p| v.get(*p)).collect())
    }

    /// Sum of subspaces.
    pub fn sum(&self, other: &Subspace<F>) -> Result<Subspace<F>, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch(self.ambient, other.ambient));
        }
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Ok(Subspace::span(self.ambient, vs))
    }

    /// Intersection of subspaces. Ambient dimensions must agree.
    pub fn intersect(&self, other: &Subspace<F>) -> Result<Subspace<F>, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch(self.ambient, other.ambient));
        }
        // Solve u = v with u in self, v in other: kernel of [B_self^T | -B_other^T].
        let a = Mat::from_rows(self.ambient, self.basis.clone()).transpose();
        let b = Mat::from_rows(self.ambient, other.basis.clone()).transpose();
        let stacked = a.hstack(&b.scale(&(-F::one())));
        let ker = kernel(&stacked);
        let mut vecs = Vec::new();
        for k in ker.basis() {
            let mut v = SVec::zero();
            for (i, c) in &k.0 {
                if *i < self.dim() {
                    v = v.add_scaled(c, &self.basis[*i]);
                }
            }
            vecs.push(v);
        }
        Ok(Subspace::span(self.ambient, vecs))
    }

    /// Matrix `R` with `R v = 0` exactly for `v` in the subspace.
    ///
    /// `R = I - B . E` where `B` has the basis as columns and `E` reads off
    /// pivot coordinates; composing maps with `R` turns membership conditions
    /// into kernel conditions.
    pub fn residual_map(&self) -> Mat<F> {
        let mut r = Mat::identity(self.ambient);
        for (row, p) in self.basis.iter().zip(&self.pivots) {
            for (j, x) in &row.0 {
                r.add_to(*j, *p, -x.clone());
            }
        }
        r
    }
}

/// The kernel (null space) of a matrix, as a canonical subspace of the domain.
pub fn kernel<F: Field>(m: &Mat<F>) -> Subspace<F> {
    let r = rref(m);
    let mut is_pivot = vec![false; m.ncols()];
    for p in &r.pivots {
        is_pivot[*p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..m.ncols()).filter(|j| !is_pivot[*j]) {
        let mut entries = vec![(free, F::one())];
        for (row, p) in r.rows.iter().zip(&r.pivots) {
            let c = row.get(free);
            if !c.is_zero() {
                entries.push((*p, -c));
            }
        }
        entries.sort_by_key(|(i, _)| *i);
        basis.push(SVec(entries));
    }
    Subspace::span(m.ncols(), basis)
}

/// The column space of a matrix, as a canonical subspace of the codomain.
pub fn image<F: Field>(m: &Mat<F>) -> Subspace<F> {
    Subspace::span(m.nrows(), m.transpose().rows.clone())
}

/// One solution of `m x = b`, if any. Absence of a solution is a value, not an
/// error. Free coordinates are set to zero, so the output is deterministic.
pub fn solve<F: Field>(m: &Mat<F>, b: &SVec<F>) -> Option<SVec<F>> {
    if let Some((i, _)) = b.0.last() {
        assert!(*i < m.nrows(), "right-hand side exceeds row count");
    }
    // Row-reduce the augmented matrix [m | b].
    let aug_col = m.ncols();
    let mut rows: Vec<SVec<F>> = m.rows.clone();
    for (i, row) in rows.iter_mut().enumerate() {
        let c = b.get(i);
        if !c.is_zero() {
            row.0.push((aug_col, c));
        }
    }
    let r = rref_rows(rows);
    let mut x = Vec::new();
    for (row, p) in r.rows.iter().zip(&r.pivots) {
        if *p == aug_col {
            return None;
        }
        let c = row.get(aug_col);
        if !c.is_zero() {
            x.push((*p, c));
        }
    }
    Some(SVec(x))
}

/// Solve `m x = b` for every column `b` of `rhs`; `None` if any column fails.
pub fn solve_mat<F: Field>(m: &Mat<F>, rhs: &Mat<F>) -> Option<Mat<F>> {
    assert_eq!(m.nrows(), rhs.nrows(), "solve_mat row mismatch");
    let mut cols = Vec::new();
    for j in 0..rhs.ncols() {
        cols.push(solve(m, &rhs.column(j))?);
    }
    Some(Mat::from_rows(m.ncols(), cols).transpose())
}

/// Quotient of the full ambient space by `u`, as section plus projection.
///
/// Classes are represented by the unit vectors at the non-pivot coordinates
/// of `u`'s echelon basis; the projection subtracts the echelon reduction,
/// so it is computed directly with no matrix inversion.
pub fn quotient<F: Field>(u: &Subspace<F>) -> HomologyData<F> {
    let n = u.ambient();
    let free: Vec<usize> = {
        let mut pivots = u.pivots().iter().copied().peekable();
        (0..n)
            .filter(|j| {
                if pivots.peek() == Some(j) {
                    pivots.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    };
    let h = free.len();
    let mut section = Mat::zero(n, h);
    let mut projection = Mat::zero(h, n);
    for (j, f) in free.iter().enumerate() {
        section.add_to(*f, j, F::one());
        projection.add_to(j, *f, F::one());
        for (row, p) in u.basis().iter().zip(u.pivots()) {
            let c = row.get(*f);
            if !c.is_zero() {
                projection.add_to(j, *p, -c);
            }
        }
    }
    HomologyData { chain_dim: n, dim: h, section, projection }
}

/// Subspace of the domain mapping into `target` under `m`.
pub fn preimage<F: Field>(m: &Mat<F>, target: &Subspace<F>) -> Result<Subspace<F>, LinalgError> {
    if m.nrows() != target.ambient() {
        return Err(LinalgError::AmbientMismatch(m.nrows(), target.ambient()));
    }
    Ok(kernel(&target.residual_map().mul(m)))
}

/// Homology data at the middle spot of `C_in --d_in--> C --d_out--> C_out`.
///
/// `section` embeds homology classes as cycle representatives; `projection`
/// sends any chain to homology coordinates, vanishes on boundaries, and is a
/// left inverse of `section`. Representatives are the canonical echelon cycle
/// basis vectors that are independent of the boundaries, so the choice is
/// deterministic.
#[derive(Clone, Debug)]
pub struct HomologyData<F> {
    /// Dimension of the middle chain space.
    pub chain_dim: usize,
    /// Homology dimension.
    pub dim: usize,
    /// `chain_dim x dim`; columns are the chosen cycle representatives.
    pub section: Mat<F>,
    /// `dim x chain_dim`; class coordinates of a chain.
    pub projection: Mat<F>,
}

impl<F: Field> HomologyData<F> {
    /// Representative cycle of the `i`-th homology basis class.
    pub fn rep(&self, i: usize) -> SVec<F> {
        self.section.column(i)
    }

    /// Homology coordinates of a chain.
    pub fn class_of(&self, chain: &SVec<F>) -> SVec<F> {
        self.projection.apply(chain)
    }
}

/// Compute homology `ker(d_out) / im(d_in)` with an explicit section and
/// projection. `d_in` maps into the middle space (`d_in.nrows() == dim C`),
/// `d_out` maps out of it (`d_out.ncols() == dim C`). Fails if the composite
/// `d_out . d_in` is nonzero.
pub fn homology<F: Field>(d_in: &Mat<F>, d_out: &Mat<F>) -> Result<HomologyData<F>, LinalgError> {
    let n = d_in.nrows();
    if d_out.ncols() != n {
        return Err(LinalgError::AmbientMismatch(d_out.ncols(), n));
    }
    let composite = d_out.mul(d_in);
    if !composite.is_zero() {
        for (i, row) in composite.rows.iter().enumerate() {
            if let Some((j, _)) = row.leading() {
                return Err(LinalgError::NotAComplex(i, j));
            }
        }
    }
    let cycles = kernel(d_out);
    let boundaries = image(d_in);

    // Pick representatives: cycle basis vectors independent modulo boundaries.
    let mut reps: Vec<SVec<F>> = Vec::new();
    let mut acc = boundaries.clone();
    for z in cycles.basis() {
        if !acc.contains(z) {
            reps.push(z.clone());
            acc = acc.sum(&Subspace::span(n, vec![z.clone()]))?;
        }
    }
    let h = reps.len();

    // Complete boundaries + reps to a basis of the middle space with standard
    // vectors, then read the projection off the inverse change of basis.
    let mut completion: Vec<SVec<F>> = Vec::new();
    let mut full = acc.clone();
    for j in 0..n {
        if full.dim() == n {
            break;
        }
        let e = SVec::unit(j);
        if !full.contains(&e) {
            completion.push(e.clone());
            full = full.sum(&Subspace::span(n, vec![e]))?;
        }
    }
    let b_dim = boundaries.dim();
    let mut cols: Vec<SVec<F>> = Vec::new();
    cols.extend(boundaries.basis().iter().cloned());
    cols.extend(reps.iter().cloned());
    cols.extend(completion.iter().cloned());
    let basis_mat = Mat::from_rows(n, cols).transpose(); // n x n, columns = new basis
    let inv = invert(&basis_mat).expect("change of basis must be invertible");
    // projection = rows b_dim .. b_dim+h of inv.
    let proj_rows: Vec<SVec<F>> = (b_dim..b_dim + h).map(|i| inv.rows[i].clone()).collect();
    let projection = Mat::from_rows(n, proj_rows);
    let section = Mat::from_rows(n, reps).transpose();

    Ok(HomologyData { chain_dim: n, dim: h, section, projection })
}

/// Inverse of a square matrix, or `None` if singular.
pub fn invert<F: Field>(m: &Mat<F>) -> Option<Mat<F>> {
    let n = m.nrows();
    if m.ncols() != n {
        return None;
    }
    let aug = m.hstack(&Mat::identity(n));
    let r = rref(&aug);
    if r.rank() != n || r.pivots.iter().take(n).ne((0..n).collect::<Vec<_>>().iter()) {
        return None;
    }
    let rows = r
        .rows
        .iter()
        .map(|row| SVec(row.0.iter().filter(|(j, _)| *j >= n).map(|(j, x)| (j - n, x.clone())).collect()))
        .collect();
    Some(Mat::from_rows(n, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rint, Rat};

    fn sv(entries: &[(usize, i64)]) -> SVec<Rat> {
        SVec(entries.iter().map(|(i, x)| (*i, rint(*x))).collect())
    }

    #[test]
    fn rref_is_canonical_under_row_shuffles() {
        let a = vec![sv(&[(0, 1), (1, 2)]), sv(&[(1, 1), (2, 3)])];
        let b = vec![sv(&[(1, 1), (2, 3)]), sv(&[(0, 2), (1, 4)]), sv(&[(0, 1), (1, 2)])];
        let ra = Subspace::span(3, a);
        let rb = Subspace::span(3, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn kernel_vectors_are_killed() {
        let m = Mat::from_dense(vec![
            vec![rint(1), rint(2), rint(3)],
            vec![rint(2), rint(4), rint(6)],
        ]);
        let k = kernel(&m);
        assert_eq!(k.dim(), 2);
        for v in k.basis() {
            assert!(m.apply(v).is_zero());
        }
    }

    #[test]
    fn solve_absent_is_none() {
        let m = Mat::from_dense(vec![vec![rint(1), rint(1)], vec![rint(1), rint(1)]]);
        assert!(solve(&m, &sv(&[(0, 1), (1, 2)])).is_none());
        let sol = solve(&m, &sv(&[(0, 3), (1, 3)])).expect("consistent system");
        assert_eq!(m.apply(&sol), sv(&[(0, 3), (1, 3)]));
    }

    #[test]
    fn intersect_dimension_mismatch_is_an_error() {
        let u = Subspace::<Rat>::full(2);
        let v = Subspace::<Rat>::full(3);
        assert_eq!(u.intersect(&v), Err(LinalgError::AmbientMismatch(2, 3)));
    }

    #[test]
    fn homology_of_a_noncomplex_is_rejected() {
        let d_in = Mat::from_dense(vec![vec![rint(1)], vec![rint(0)]]);
        let d_out = Mat::from_dense(vec![vec![rint(1), rint(0)]]);
        match homology(&d_in, &d_out) {
            Err(LinalgError::NotAComplex(_, _)) => {}
            other => panic!("expected NotAComplex, got {other:?}"),
        }
    }

    #[test]
    fn homology_section_projection_identities() {
        // k --d_in--> k^3 --d_out--> k, cycles span{e1,e2}, boundaries span{e1}.
        let d_in = Mat::from_dense(vec![vec![rint(1)], vec![rint(0)], vec![rint(0)]]);
        let d_out = Mat::from_dense(vec![vec![rint(0), rint(0), rint(1)]]);
        let h = homology(&d_in, &d_out).expect("complex");
        assert_eq!(h.dim, 1);
        let ps = h.projection.mul(&h.section);
        assert_eq!(ps, Mat::identity(1));
        assert!(d_out.mul(&h.section).is_zero());
        assert!(h.projection.mul(&d_in).is_zero());
    }

    #[test]
    fn preimage_members_map_into_target() {
        let m = Mat::from_dense(vec![vec![rint(1), rint(0), rint(1)], vec![rint(0), rint(1), rint(1)]]);
        let target = Subspace::span(2, vec![sv(&[(0, 1), (1, 1)])]);
        let pre = preimage(&m, &target).unwrap();
        for v in pre.basis() {
            assert!(target.contains(&m.apply(v)));
        }
        // e3 maps to (1,1): inside; e1 maps to (1,0): outside.
        assert!(pre.contains(&sv(&[(2, 1)])));
        assert!(!pre.contains(&sv(&[(0, 1)])));
    }
}
