//! Dense matrices over `F_q`, the involutions on `M_m(F_q)`, ε-symmetric
//! subspaces and the fixed structural matrices of the construction.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::FieldCtx;

/// A sign `ε ∈ {+1, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn residue(self, field: FieldCtx) -> u32 {
        field.reduce(self.value())
    }

    pub fn negate(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FqMatrix {
    field: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "] mod {}", self.field.q())
    }
}

impl Serialize for FqMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[u32]> = (0..self.rows).map(|i| self.row(i)).collect();
        rows.serialize(s)
    }
}

impl FqMatrix {
    pub fn zeros(field: FieldCtx, rows: usize, cols: usize) -> Self {
        FqMatrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: FieldCtx, n: usize) -> Self {
        Self::scalar(field, n, 1)
    }

    pub fn scalar(field: FieldCtx, n: usize, v: i64) -> Self {
        let mut m = Self::zeros(field, n, n);
        let v = field.reduce(v);
        for i in 0..n {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix from row-major integer entries reduced mod `q`.
    pub fn from_vec(field: FieldCtx, rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let data = entries.iter().map(|&v| field.reduce(v)).collect();
        Ok(FqMatrix { field, rows, cols, data })
    }

    pub fn from_residues(field: FieldCtx, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|&v| v < field.q()));
        FqMatrix { field, rows, cols, data }
    }

    pub fn from_rows(field: FieldCtx, rows: &[&[i64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let flat: Vec<i64> = rows.iter().flat_map(|x| x.iter().copied()).collect();
        Self::from_vec(field, r, c, &flat)
    }

    pub fn random<R: Rng>(field: FieldCtx, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..field.q())).collect();
        FqMatrix { field, rows, cols, data }
    }

    #[inline]
    pub fn field(&self) -> FieldCtx {
        self.field
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn data(&self) -> &[u32] {
        &self.data
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.field.q();
    }
    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == (i == j) as u32))
    }

    pub fn try_mul(&self, rhs: &FqMatrix) -> Result<FqMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul(rhs))
    }

    pub fn mul(&self, rhs: &FqMatrix) -> FqMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let q = self.field.q() as u64;
        let mut out = vec![0u32; self.rows * rhs.cols];
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.data[i * self.cols + k] as u64 * rhs.data[k * rhs.cols + j] as u64;
                }
                out[i * rhs.cols + j] = (acc % q) as u32;
            }
        }
        FqMatrix { field: self.field, rows: self.rows, cols: rhs.cols, data: out }
    }

    pub fn add(&self, rhs: &FqMatrix) -> FqMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let f = self.field;
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f.add(a, b)).collect();
        FqMatrix { field: f, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &FqMatrix) -> FqMatrix {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> FqMatrix {
        self.scale(-1)
    }

    pub fn scale(&self, k: i64) -> FqMatrix {
        let f = self.field;
        let k = f.reduce(k);
        let data = self.data.iter().map(|&a| f.mul(a, k)).collect();
        FqMatrix { field: f, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut out = FqMatrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    pub fn trace(&self) -> u32 {
        let f = self.field;
        (0..self.rows.min(self.cols)).fold(0, |acc, i| f.add(acc, self.get(i, i)))
    }

    /// Square block `(bi, bj)` of side `size`.
    pub fn block(&self, bi: usize, bj: usize, size: usize) -> FqMatrix {
        let mut out = FqMatrix::zeros(self.field, size, size);
        for i in 0..size {
            for j in 0..size {
                out.data[i * size + j] = self.get(bi * size + i, bj * size + j);
            }
        }
        out
    }

    /// Assembles `[[a, b], [c, d]]` from four square blocks of equal size.
    pub fn from_blocks(a: &FqMatrix, b: &FqMatrix, c: &FqMatrix, d: &FqMatrix) -> FqMatrix {
        let m = a.rows;
        for x in [a, b, c, d] {
            assert!(x.rows == m && x.cols == m, "blocks must be square of equal size");
        }
        let mut out = FqMatrix::zeros(a.field, 2 * m, 2 * m);
        for (bi, bj, x) in [(0, 0, a), (0, 1, b), (1, 0, c), (1, 1, d)] {
            for i in 0..m {
                for j in 0..m {
                    out.data[(bi * m + i) * 2 * m + bj * m + j] = x.get(i, j);
                }
            }
        }
        out
    }

    /// The four blocks of a `2m x 2m` matrix.
    pub fn blocks(&self) -> [FqMatrix; 4] {
        assert!(self.is_square() && self.rows % 2 == 0);
        let m = self.rows / 2;
        [self.block(0, 0, m), self.block(0, 1, m), self.block(1, 0, m), self.block(1, 1, m)]
    }

    /// Reduced row echelon form, returning the pivot columns.
    pub fn rref(&self) -> (FqMatrix, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else { continue };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).unwrap();
            for j in 0..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.data[r * m.cols + j] = v;
            }
            for i in 0..m.rows {
                if i != r {
                    let factor = m.get(i, c);
                    if factor != 0 {
                        for j in 0..m.cols {
                            let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                            m.data[i * m.cols + j] = v;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of `{v : self · v = 0}` (column vectors).
    pub fn nullspace(&self) -> Vec<Vec<u32>> {
        let f = self.field;
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = f.neg(r.get(i, free));
            }
            basis.push(v);
        }
        basis
    }

    pub fn det(&self) -> u32 {
        assert!(self.is_square());
        let f = self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1u32;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| m.get(i, c) != 0) else { return 0 };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let pv = m.get(c, c);
            det = f.mul(det, pv);
            let inv = f.inv(pv).unwrap();
            for i in c + 1..n {
                let factor = f.mul(m.get(i, c), inv);
                if factor != 0 {
                    for j in c..n {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(c, j)));
                        m.data[i * n + j] = v;
                    }
                }
            }
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.det() != 0
    }

    pub fn inverse(&self) -> Option<FqMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = FqMatrix::zeros(self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.data[i * 2 * n + j] = self.get(i, j);
            }
            aug.data[i * 2 * n + n + i] = 1;
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut out = FqMatrix::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = r.get(i, n + j);
            }
        }
        Some(out)
    }
}

/// Row vector times matrix.
pub fn vec_mul(field: FieldCtx, v: &[u32], m: &FqMatrix) -> Vec<u32> {
    assert_eq!(v.len(), m.rows());
    let q = field.q() as u64;
    (0..m.cols())
        .map(|j| {
            let acc: u64 = v.iter().enumerate().map(|(i, &x)| x as u64 * m.get(i, j) as u64).sum();
            (acc % q) as u32
        })
        .collect()
}

/// Standard dot product `<x, y>`.
pub fn dot(field: FieldCtx, x: &[u32], y: &[u32]) -> u32 {
    let acc: u64 = x.iter().zip(y).map(|(&a, &b)| a as u64 * b as u64).sum();
    (acc % field.q() as u64) as u32
}

/// `J_{2n} = [[0, I_n], [-I_n, 0]]` of side `m = 2n`.
pub fn j_matrix(field: FieldCtx, m: usize) -> FqMatrix {
    assert!(m % 2 == 0);
    let n = m / 2;
    let mut j = FqMatrix::zeros(field, m, m);
    for i in 0..n {
        j.set(i, n + i, 1);
        j.set(n + i, i, field.neg(1));
    }
    j
}

/// The two involutions of `M_m(F_q)`: transpose `⋄`, and
/// `a~ = J a^⋄ J^{-1}` for even `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InvolutionKind {
    Transpose,
    Tilde,
}

impl InvolutionKind {
    pub fn tag(self) -> u8 {
        match self {
            InvolutionKind::Transpose => 0,
            InvolutionKind::Tilde => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InvolutionKind::Transpose => "transpose",
            InvolutionKind::Tilde => "tilde",
        }
    }
}

pub fn involution_apply(kind: InvolutionKind, a: &FqMatrix) -> Result<FqMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", a.rows(), a.cols())));
    }
    match kind {
        InvolutionKind::Transpose => Ok(a.transpose()),
        InvolutionKind::Tilde => {
            if a.rows() % 2 != 0 {
                return Err(Error::Dimension(format!("tilde needs even size, got {}", a.rows())));
            }
            let j = j_matrix(a.field(), a.rows());
            // J^{-1} = -J
            Ok(j.mul(&a.transpose()).mul(&j).neg())
        }
    }
}

/// The involution on `M_2(A)`: blockwise involution followed by block
/// transposition.
pub fn star2(kind: InvolutionKind, t: &FqMatrix) -> Result<FqMatrix> {
    if !t.is_square() || t.rows() % 2 != 0 {
        return Err(Error::Dimension("expected a 2x2 block matrix".into()));
    }
    let [a, b, c, d] = t.blocks();
    Ok(FqMatrix::from_blocks(
        &involution_apply(kind, &a)?,
        &involution_apply(kind, &c)?,
        &involution_apply(kind, &b)?,
        &involution_apply(kind, &d)?,
    ))
}

/// Enumerations above this many elements are left to the caller.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// The space `{a : a* = -εa}` of ε-symmetric elements.
#[derive(Clone, Debug)]
pub struct EpsSymmetricSpace {
    pub field: FieldCtx,
    pub eps: Sign,
    pub kind: InvolutionKind,
    pub size: usize,
    pub basis: Vec<FqMatrix>,
    /// All elements, in lexicographic order of basis coordinates, when
    /// the space is small enough to list.
    pub elements: Option<Vec<FqMatrix>>,
    pub has_invertible: bool,
}

impl EpsSymmetricSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn cardinality(&self) -> u64 {
        (self.field.q() as u64).pow(self.basis.len() as u32)
    }

    /// Invertible elements, when the space is enumerated.
    pub fn invertible(&self) -> Option<Vec<FqMatrix>> {
        self.elements
            .as_ref()
            .map(|e| e.iter().filter(|a| a.is_invertible()).cloned().collect())
    }

    /// The element with the given basis coordinates.
    pub fn combine(&self, coords: &[u32]) -> FqMatrix {
        let mut acc = FqMatrix::zeros(self.field, self.size, self.size);
        for (b, &c) in self.basis.iter().zip(coords) {
            if c != 0 {
                acc = acc.add(&b.scale(c as i64));
            }
        }
        acc
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> FqMatrix {
        let coords: Vec<u32> = (0..self.basis.len()).map(|_| rng.gen_range(0..self.field.q())).collect();
        self.combine(&coords)
    }

    pub fn contains(&self, a: &FqMatrix) -> bool {
        matches!(involution_apply(self.kind, a), Ok(s) if s == a.scale(-self.eps.value()))
    }
}

pub fn eps_symmetric_elements(
    field: FieldCtx,
    eps: Sign,
    kind: InvolutionKind,
    m: usize,
) -> Result<EpsSymmetricSpace> {
    if kind == InvolutionKind::Tilde && m % 2 != 0 {
        return Err(Error::Dimension(format!("tilde needs even size, got {m}")));
    }
    let mm = m * m;
    // Column (i,j) holds vec(E_ij* + ε E_ij).
    let mut sys = FqMatrix::zeros(field, mm, mm);
    for idx in 0..mm {
        let mut e = FqMatrix::zeros(field, m, m);
        e.set(idx / m, idx % m, 1);
        let img = involution_apply(kind, &e)?.add(&e.scale(eps.value()));
        for (r, &v) in img.data().iter().enumerate() {
            sys.set(r, idx, v);
        }
    }
    let basis: Vec<FqMatrix> = sys
        .nullspace()
        .into_iter()
        .map(|v| FqMatrix::from_residues(field, m, m, v))
        .collect();
    let mut space = EpsSymmetricSpace {
        field,
        eps,
        kind,
        size: m,
        basis,
        elements: None,
        has_invertible: false,
    };
    if space.cardinality() <= ENUMERATION_LIMIT {
        let dim = space.dimension();
        let q = field.q() as u64;
        let total = space.cardinality();
        let mut elements = Vec::with_capacity(total as usize);
        for idx in 0..total {
            let mut rest = idx;
            let mut coords = vec![0u32; dim];
            for c in coords.iter_mut().rev() {
                *c = (rest % q) as u32;
                rest /= q;
            }
            elements.push(space.combine(&coords));
        }
        space.has_invertible = elements.iter().any(|a| a.is_invertible());
        space.elements = Some(elements);
    } else {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        space.has_invertible = (0..4096).any(|_| space.random(&mut rng).is_invertible());
    }
    Ok(space)
}

/// The fixed matrices used by the construction, for a given `n`.
#[derive(Clone, Debug)]
pub struct StandardMatrices {
    pub n: usize,
    /// `J_{2n}`.
    pub j: FqMatrix,
    /// `J_+ = [[0, 1], [1, 0]]` over `A`.
    pub j_plus: FqMatrix,
    /// `J_- = [[0, 1], [-1, 0]]` over `A`.
    pub j_minus: FqMatrix,
    /// `diag(J, J)`.
    pub u: FqMatrix,
    /// `[[0, J], [1, 0]]`.
    pub p: FqMatrix,
    /// `[[0, J], [-J, 0]]`.
    pub f: FqMatrix,
}

/// `J_ε = [[0, 1], [ε, 0]]` over `M_m(F_q)`.
pub fn j_eps(field: FieldCtx, m: usize, eps: Sign) -> FqMatrix {
    let z = FqMatrix::zeros(field, m, m);
    let i = FqMatrix::identity(field, m);
    FqMatrix::from_blocks(&z, &i, &i.scale(eps.value()), &z)
}

pub fn standard_matrices(n: usize, field: FieldCtx) -> Result<StandardMatrices> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let m = 2 * n;
    let j = j_matrix(field, m);
    let z = FqMatrix::zeros(field, m, m);
    let i = FqMatrix::identity(field, m);
    let j_plus = j_eps(field, m, Sign::Plus);
    let j_minus = j_eps(field, m, Sign::Minus);
    let u = FqMatrix::from_blocks(&j, &z, &z, &j);
    let p = FqMatrix::from_blocks(&z, &j, &i, &z);
    let f = FqMatrix::from_blocks(&z, &j, &j.neg(), &z);
    let lhs = p.mul(&j_plus).mul(&star2(InvolutionKind::Transpose, &p)?);
    if lhs != j_minus.mul(&u) {
        return Err(Error::CheckFailed("P J+ P* differs from J- U".into()));
    }
    Ok(StandardMatrices { n, j, j_plus, j_minus, u, p, f })
}
