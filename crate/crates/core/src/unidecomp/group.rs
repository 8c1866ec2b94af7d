//! The unitary group `U(γ, χ)` as scalar-block automorphisms of `M`, and
//! the finite-group plumbing (multiplication table, classes, power maps)
//! the character table is built on.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::FieldCtx;
use crate::matalg::FqMatrix;
use crate::weildata::{ModulePoint, ModuleSpace};

/// `β(x, y) = (b₁x + b₃y, b₂x + b₄y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct UnitaryElement {
    pub b: [u32; 4],
}

impl UnitaryElement {
    pub fn new(b1: u32, b2: u32, b3: u32, b4: u32) -> Self {
        UnitaryElement { b: [b1, b2, b3, b4] }
    }

    pub fn identity() -> Self {
        UnitaryElement::new(1, 0, 0, 1)
    }

    pub fn det(&self, f: FieldCtx) -> u32 {
        let [b1, b2, b3, b4] = self.b;
        f.sub(f.mul(b1, b4), f.mul(b2, b3))
    }

    /// The matrix acting on the column `(x; y)`, `[[b₁, b₃], [b₂, b₄]]`.
    /// Composition of automorphisms is the product of these matrices.
    pub fn sl2_matrix(&self, f: FieldCtx) -> FqMatrix {
        let [b1, b2, b3, b4] = self.b;
        FqMatrix::from_residues(f, 2, 2, vec![b1, b3, b2, b4])
    }

    pub fn from_sl2(g: &FqMatrix) -> Self {
        UnitaryElement::new(g.get(0, 0), g.get(1, 0), g.get(0, 1), g.get(1, 1))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &UnitaryElement, f: FieldCtx) -> Self {
        Self::from_sl2(&self.sl2_matrix(f).mul(&other.sl2_matrix(f)))
    }

    pub fn inverse(&self, f: FieldCtx) -> Option<Self> {
        self.sl2_matrix(f).inverse().map(|g| Self::from_sl2(&g))
    }

    /// The `4n x 4n` block matrix `[[b₁I, b₂I], [b₃I, b₄I]]`, so that
    /// `β(p)` is the row vector `p · block`.
    pub fn block_matrix(&self, f: FieldCtx, n: usize) -> FqMatrix {
        let m = 2 * n;
        let s = |v: u32| FqMatrix::scalar(f, m, v as i64);
        FqMatrix::from_blocks(&s(self.b[0]), &s(self.b[1]), &s(self.b[2]), &s(self.b[3]))
    }

    pub fn apply(&self, f: FieldCtx, p: &ModulePoint) -> ModulePoint {
        let [b1, b2, b3, b4] = self.b;
        let lin = |a: u32, u: &[u32], c: u32, v: &[u32]| -> Vec<u32> {
            u.iter().zip(v).map(|(&s, &t)| f.add(f.mul(a, s), f.mul(c, t))).collect()
        };
        ModulePoint { x: lin(b1, &p.x, b3, &p.y), y: lin(b2, &p.x, b4, &p.y) }
    }

    /// `perm[i] = index(β(point(i)))`.
    pub fn action_perm(&self, module: &ModuleSpace) -> Vec<u32> {
        module.linear_perm(&self.block_matrix(module.field(), module.n()))
    }
}

/// Applies a [`UnitaryElement`] to point indices without allocating.
pub(crate) struct PointMover {
    module: ModuleSpace,
    buf: Vec<u32>,
    out: Vec<u32>,
}

impl PointMover {
    pub(crate) fn new(module: ModuleSpace) -> Self {
        let k = module.coord_len();
        PointMover { module, buf: vec![0; k], out: vec![0; k] }
    }

    pub(crate) fn apply(&mut self, g: &UnitaryElement, idx: usize) -> usize {
        let f = self.module.field();
        let q = f.q();
        let m = 2 * self.module.n();
        self.module.coords_into(idx, &mut self.buf);
        let [b1, b2, b3, b4] = g.b;
        for i in 0..m {
            let (x, y) = (self.buf[i], self.buf[m + i]);
            self.out[i] = (b1 * x + b3 * y) % q;
            self.out[m + i] = (b2 * x + b4 * y) % q;
        }
        self.module.index_of_coords(&self.out)
    }
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    order: usize,
    identity: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
}

impl FiniteGroup {
    /// `table[i * order + j]` is the index of `g_i g_j`.
    pub fn from_table(order: usize, table: Vec<u32>) -> Result<Self> {
        if table.len() != order * order {
            return Err(Error::Dimension("multiplication table has the wrong size".into()));
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|i| table[e * order + i] as usize == i && table[i * order + e] as usize == i))
            .ok_or_else(|| Error::InvalidParameter("no identity element".into()))?;
        let mut inverse = vec![u32::MAX; order];
        for i in 0..order {
            for j in 0..order {
                if table[i * order + j] as usize == identity {
                    inverse[i] = j as u32;
                    break;
                }
            }
        }
        if inverse.contains(&u32::MAX) {
            return Err(Error::InvalidParameter("element without inverse".into()));
        }
        Ok(FiniteGroup { order, identity, table, inverse })
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i * self.order + j] as usize
    }

    #[inline]
    pub fn inv(&self, i: usize) -> usize {
        self.inverse[i] as usize
    }

    pub fn pow(&self, i: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, i))
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut x = i;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, i);
            k += 1;
        }
        k
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        (0..self.order).map(|i| self.element_order(i)).fold(1, num_integer::lcm)
    }

    /// Elements of the subgroup generated by `gens`, sorted.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[self.identity] = true;
        let mut queue = vec![self.identity];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push(y);
                }
            }
        }
        queue.sort_unstable();
        queue
    }

    /// A pair of elements generating the group, trying high orders first.
    pub fn generating_pair(&self) -> Vec<usize> {
        if self.order == 1 {
            return vec![];
        }
        let mut cand: Vec<usize> = (0..self.order).collect();
        cand.sort_by_key(|&i| (std::cmp::Reverse(self.element_order(i)), i));
        cand.truncate(64);
        if self.closure(&cand[..1]).len() == self.order {
            return vec![cand[0]];
        }
        for (a, &i) in cand.iter().enumerate() {
            for &j in &cand[a + 1..] {
                if self.closure(&[i, j]).len() == self.order {
                    return vec![i, j];
                }
            }
        }
        (0..self.order).collect()
    }

    pub fn conjugacy_classes(&self) -> ConjugacyClasses {
        let mut class_of = vec![usize::MAX; self.order];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut reps = Vec::new();
        // identity first, then by element order and index
        let mut order: Vec<usize> = (0..self.order).collect();
        order.sort_by_key(|&i| (i != self.identity, self.element_order(i), i));
        for &g in &order {
            if class_of[g] != usize::MAX {
                continue;
            }
            let c = classes.len();
            reps.push(g);
            let mut members = Vec::new();
            for h in 0..self.order {
                let x = self.mul(self.mul(h, g), self.inv(h));
                if class_of[x] == usize::MAX {
                    class_of[x] = c;
                    members.push(x);
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        let inverse_class = classes.iter().map(|m| class_of[self.inv(m[0])]).collect();
        ConjugacyClasses { members: classes, class_of, reps, inverse_class }
    }
}

/// A partition of a group into conjugacy classes. Class 0 is the identity.
#[derive(Clone, Debug)]
pub struct ConjugacyClasses {
    pub members: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub reps: Vec<usize>,
    /// Class of the inverses of the members.
    pub inverse_class: Vec<usize>,
}

impl ConjugacyClasses {
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.len()).collect()
    }
}

/// The unitary group with its elements in a fixed order.
#[derive(Clone, Debug)]
pub struct UnitaryGroup {
    field: FieldCtx,
    n: usize,
    elements: Vec<UnitaryElement>,
    index: FxHashMap<UnitaryElement, usize>,
    group: FiniteGroup,
}

impl UnitaryGroup {
    /// Builds the table from a list closed under composition.
    pub fn from_elements(field: FieldCtx, n: usize, mut elements: Vec<UnitaryElement>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        let index: FxHashMap<UnitaryElement, usize> = elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let k = elements.len();
        let mut table = Vec::with_capacity(k * k);
        for a in &elements {
            for b in &elements {
                let c = a.compose(b, field);
                let idx = *index
                    .get(&c)
                    .ok_or_else(|| Error::CheckFailed(format!("{a:?} ∘ {b:?} leaves the set")))?;
                table.push(idx as u32);
            }
        }
        let group = FiniteGroup::from_table(k, table)?;
        Ok(UnitaryGroup { field, n, elements, index, group })
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn order(&self) -> usize {
        self.elements.len()
    }
    pub fn elements(&self) -> &[UnitaryElement] {
        &self.elements
    }
    pub fn element(&self, i: usize) -> &UnitaryElement {
        &self.elements[i]
    }
    pub fn index_of(&self, e: &UnitaryElement) -> Option<usize> {
        self.index.get(e).copied()
    }
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }
}
