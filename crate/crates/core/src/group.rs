//! Finite abelian groups `Z_{n1} x ... x Z_{nk}`, their duals, subgroups,
//! annihilators and canonical coset transversals.
//!
//! Elements are addressed by a canonical index: mixed radix with the last
//! coordinate running fastest, which coincides with lexicographic order on
//! coordinate tuples. The dual group is identified with the group itself
//! coordinatewise, so one [`FiniteAbelianGroup`] value describes both `G`
//! and `Ĝ`, and the character pairing is
//! `<a, x> = exp(2πi Σ_j a_j x_j / n_j)`.

use crate::error::{Error, Result};
use crate::scalar::{root_of_unity, Cx, Real};

/// Largest group order accepted by [`FiniteAbelianGroup::new`].
pub const MAX_GROUP_ORDER: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
    order: usize,
    strides: Vec<usize>,
    // lcm of the orders and the per-coordinate weights lcm / n_j; the pairing
    // exponent is Σ a_j x_j w_j (mod lcm), so triviality is an integer test.
    lcm: u64,
    weights: Vec<u64>,
}

/// Coordinate tuple of a group (or dual group) element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(Vec<usize>);

/// Element of `G`.
pub type GroupElement = Element;
/// Element of `Ĝ`, identified with `G` coordinatewise.
pub type DualElement = Element;

impl Element {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.iter().any(|&n| n == 0) {
            return Err(Error::InvalidOrders(orders));
        }
        let mut order: usize = 1;
        for &n in &orders {
            order = order.checked_mul(n).unwrap_or(usize::MAX);
            if order > MAX_GROUP_ORDER {
                return Err(Error::GroupTooLarge {
                    order,
                    max: MAX_GROUP_ORDER,
                });
            }
        }
        let mut strides = vec![1; orders.len()];
        for j in (0..orders.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * orders[j + 1];
        }
        let lcm = orders
            .iter()
            .fold(1u64, |acc, &n| acc / gcd(acc, n as u64) * n as u64);
        let weights = orders.iter().map(|&n| lcm / n as u64).collect();
        Ok(Self {
            orders,
            order,
            strides,
            lcm,
            weights,
        })
    }

    /// The cyclic group `Z_n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Number of elements, `Π n_j`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Builds an element from arbitrary integers, reducing each modulo `n_j`.
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        if coords.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                found: coords.len(),
            });
        }
        Ok(Element(
            coords
                .iter()
                .zip(&self.orders)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as usize)
                .collect(),
        ))
    }

    /// Canonical index of an element; rejects unreduced coordinates.
    pub fn index_of(&self, e: &Element) -> Result<usize> {
        if e.0.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                found: e.0.len(),
            });
        }
        let mut idx = 0;
        for (j, (&c, &n)) in e.0.iter().zip(&self.orders).enumerate() {
            if c >= n {
                return Err(Error::CoordinateOutOfRange {
                    position: j,
                    value: c,
                    order: n,
                });
            }
            idx += c * self.strides[j];
        }
        Ok(idx)
    }

    pub fn element_at(&self, idx: usize) -> Element {
        Element(self.coords_at(idx))
    }

    fn coords_at(&self, idx: usize) -> Vec<usize> {
        debug_assert!(idx < self.order);
        self.orders
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| (idx / s) % n)
            .collect()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let mut idx = 0;
        for j in 0..self.rank() {
            let n = self.orders[j];
            let s = self.strides[j];
            idx += (((a / s) % n + (b / s) % n) % n) * s;
        }
        idx
    }

    pub fn neg(&self, a: usize) -> usize {
        let mut idx = 0;
        for j in 0..self.rank() {
            let n = self.orders[j];
            let s = self.strides[j];
            idx += ((n - (a / s) % n) % n) * s;
        }
        idx
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Pairing exponent `k` with `<a, x> = exp(2πi k / lcm)`, exact.
    pub(crate) fn pairing_exponent(&self, a: usize, x: usize) -> u64 {
        let mut k = 0u64;
        for j in 0..self.rank() {
            let n = self.orders[j];
            let s = self.strides[j];
            let aj = ((a / s) % n) as u64;
            let xj = ((x / s) % n) as u64;
            k = (k + (aj * xj % n as u64) * self.weights[j]) % self.lcm;
        }
        k
    }

    /// `true` iff `<a, x> = 1`, by exact integer arithmetic.
    pub fn pairs_trivially(&self, a: usize, x: usize) -> bool {
        self.pairing_exponent(a, x) == 0
    }

    /// Character value `<a, x>` for canonical indices.
    pub fn pairing_at<T: Real>(&self, a: usize, x: usize) -> Cx<T> {
        root_of_unity(self.pairing_exponent(a, x), self.lcm)
    }

    /// Character value `<χ, x> = exp(2πi Σ_j χ_j x_j / n_j)`.
    pub fn pairing<T: Real>(&self, chi: &DualElement, x: &GroupElement) -> Result<Cx<T>> {
        let a = self.index_of(chi)?;
        let b = self.index_of(x)?;
        Ok(self.pairing_at(a, b))
    }
}

/// A subgroup of a [`FiniteAbelianGroup`], stored as its sorted member list.
#[derive(Clone, Debug)]
pub struct Subgroup {
    parent: FiniteAbelianGroup,
    generators: Vec<usize>,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.members == other.members
    }
}

impl Eq for Subgroup {}

impl Subgroup {
    /// Smallest subgroup containing `gens`; the empty list gives `{0}`.
    pub fn generate(parent: &FiniteAbelianGroup, gens: &[Element]) -> Result<Self> {
        let idx = gens
            .iter()
            .map(|g| parent.index_of(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_generator_indices(parent, idx))
    }

    pub fn from_generator_indices(parent: &FiniteAbelianGroup, gens: Vec<usize>) -> Self {
        let mut mask = vec![false; parent.order()];
        mask[0] = true;
        let mut members = vec![0];
        let mut cursor = 0;
        while cursor < members.len() {
            let e = members[cursor];
            cursor += 1;
            for &g in &gens {
                let s = parent.add(e, g);
                if !mask[s] {
                    mask[s] = true;
                    members.push(s);
                }
            }
        }
        members.sort_unstable();
        Self {
            parent: parent.clone(),
            generators: gens,
            members,
            mask,
        }
    }

    pub fn trivial(parent: &FiniteAbelianGroup) -> Self {
        Self::from_generator_indices(parent, Vec::new())
    }

    /// The whole group, generated by the coordinate unit vectors.
    pub fn whole(parent: &FiniteAbelianGroup) -> Self {
        let gens = (0..parent.rank())
            .filter(|&j| parent.orders[j] > 1)
            .map(|j| parent.strides[j])
            .collect();
        Self::from_generator_indices(parent, gens)
    }

    fn from_mask(parent: &FiniteAbelianGroup, mask: Vec<bool>) -> Self {
        let members: Vec<usize> = (0..parent.order()).filter(|&i| mask[i]).collect();
        // Greedy generating set: take members not yet reached, in order.
        let mut gens = Vec::new();
        let mut span = Self::trivial(parent);
        for &m in &members {
            if !span.mask[m] {
                gens.push(m);
                span = Self::from_generator_indices(parent, gens.clone());
            }
        }
        Self {
            parent: parent.clone(),
            generators: gens,
            members,
            mask,
        }
    }

    pub fn parent(&self) -> &FiniteAbelianGroup {
        &self.parent
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// `|G| / |H|`.
    pub fn index(&self) -> usize {
        self.parent.order() / self.order()
    }

    /// Member indices in canonical order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn elements(&self) -> Vec<Element> {
        self.members
            .iter()
            .map(|&m| self.parent.element_at(m))
            .collect()
    }

    pub fn generator_indices(&self) -> &[usize] {
        &self.generators
    }

    pub fn generators(&self) -> Vec<Element> {
        self.generators
            .iter()
            .map(|&g| self.parent.element_at(g))
            .collect()
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.parent
            .index_of(e)
            .map(|i| self.mask[i])
            .unwrap_or(false)
    }

    /// `H* = {x : <h, x> = 1 for every h ∈ H}`, found by an exhaustive scan
    /// with exact integer congruences. Testing the generators of `H` is
    /// enough because the pairing is a homomorphism in each argument.
    pub fn annihilator(&self) -> Subgroup {
        let g = &self.parent;
        let mask = (0..g.order())
            .map(|x| self.generators.iter().all(|&h| g.pairs_trivially(h, x)))
            .collect();
        Self::from_mask(g, mask)
    }
}

/// Canonical coset transversal of `A / H`: each representative is the
/// lexicographically smallest member of its coset.
#[derive(Clone, Debug, PartialEq)]
pub struct Transversal {
    subgroup: Subgroup,
    reps: Vec<usize>,
    // For each element x of A: position of its coset's representative and
    // the subgroup element h with x = rep + h.
    coset: Vec<usize>,
    offset: Vec<usize>,
}

impl Transversal {
    pub fn new(subgroup: &Subgroup) -> Self {
        let g = subgroup.parent();
        let n = g.order();
        let mut coset = vec![usize::MAX; n];
        let mut offset = vec![0; n];
        let mut reps = Vec::with_capacity(subgroup.index());
        for e in 0..n {
            if coset[e] != usize::MAX {
                continue;
            }
            let pos = reps.len();
            reps.push(e);
            for &h in subgroup.members() {
                let x = g.add(e, h);
                coset[x] = pos;
                offset[x] = h;
            }
        }
        Self {
            subgroup: subgroup.clone(),
            reps,
            coset,
            offset,
        }
    }

    /// A transversal with caller-chosen representatives, one per coset.
    pub fn with_representatives(subgroup: &Subgroup, reps: &[Element]) -> Result<Self> {
        let g = subgroup.parent();
        let reps = reps
            .iter()
            .map(|r| g.index_of(r))
            .collect::<Result<Vec<_>>>()?;
        if reps.len() != subgroup.index() {
            return Err(Error::InconsistentSections(format!(
                "{} representatives for {} cosets",
                reps.len(),
                subgroup.index()
            )));
        }
        let n = g.order();
        let mut coset = vec![usize::MAX; n];
        let mut offset = vec![0; n];
        for (pos, &r) in reps.iter().enumerate() {
            for &h in subgroup.members() {
                let x = g.add(r, h);
                if coset[x] != usize::MAX {
                    return Err(Error::InconsistentSections(format!(
                        "representatives {:?} and {:?} lie in the same coset",
                        g.element_at(reps[coset[x]]).coords(),
                        g.element_at(r).coords()
                    )));
                }
                coset[x] = pos;
                offset[x] = h;
            }
        }
        Ok(Self {
            subgroup: subgroup.clone(),
            reps,
            coset,
            offset,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.subgroup.parent()
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Representative indices, in ascending canonical order for canonical
    /// transversals.
    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn representatives(&self) -> Vec<Element> {
        self.reps
            .iter()
            .map(|&r| self.group().element_at(r))
            .collect()
    }

    /// `(position of the coset representative, subgroup element)`.
    pub fn decompose_index(&self, x: usize) -> (usize, usize) {
        (self.coset[x], self.offset[x])
    }

    /// Splits `x = rep + h` with `rep` a representative and `h ∈ H`.
    pub fn decompose(&self, x: &Element) -> Result<(Element, Element)> {
        let g = self.group();
        let (pos, h) = self.decompose_index(g.index_of(x)?);
        Ok((g.element_at(self.reps[pos]), g.element_at(h)))
    }

    pub fn compose_index(&self, pos: usize, h: usize) -> usize {
        self.group().add(self.reps[pos], h)
    }
}
