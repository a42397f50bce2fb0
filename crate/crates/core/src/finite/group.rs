//! `SL(3, F_l)` elements, integer generator sets and quotient enumeration.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::field::{FieldElement, Prime};
use crate::error::{LabError, Result};

/// Default ceiling on the number of elements produced by [`enumerate_quotient`].
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// An integer 3x3 matrix, row-major, used to describe generators of `SL(3, Z)`.
pub type IntMatrix3 = [[i64; 3]; 3];

/// A 3x3 matrix over `F_l` with determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    entries: [u32; 9],
    modulus: Prime,
}

impl GroupElement {
    pub fn identity(modulus: Prime) -> Self {
        let mut entries = [0u32; 9];
        entries[0] = 1;
        entries[4] = 1;
        entries[8] = 1;
        GroupElement { entries, modulus }
    }

    /// Reduce an integer matrix modulo `l`, rejecting it unless the determinant is 1.
    pub fn from_int(m: &IntMatrix3, modulus: Prime) -> Result<Self> {
        let mut entries = [0u32; 9];
        for i in 0..3 {
            for j in 0..3 {
                entries[3 * i + j] = modulus.reduce(m[i][j]) as u32;
            }
        }
        let g = GroupElement { entries, modulus };
        let det = g.det();
        if det != 1 % modulus.get() {
            return Err(LabError::NotSpecialLinear {
                det,
                modulus: modulus.get(),
            });
        }
        Ok(g)
    }

    /// Build from nine row-major residues (as produced by [`GroupElement::to_row_major`]).
    pub fn from_row_major(values: &[i64], modulus: Prime) -> Result<Self> {
        if values.len() != 9 {
            return Err(LabError::Shape(format!(
                "group element needs 9 entries, got {}",
                values.len()
            )));
        }
        let mut m = [[0i64; 3]; 3];
        for (k, v) in values.iter().enumerate() {
            m[k / 3][k % 3] = *v;
        }
        Self::from_int(&m, modulus)
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        FieldElement::new(self.entries[3 * i + j] as i64, self.modulus)
    }

    pub(crate) fn raw(&self, i: usize, j: usize) -> u64 {
        self.entries[3 * i + j] as u64
    }

    pub fn to_row_major(&self) -> [u32; 9] {
        self.entries
    }

    pub fn det(&self) -> u64 {
        let l = self.modulus.get() as i64;
        let e = |i: usize, j: usize| self.entries[3 * i + j] as i64;
        let d = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        d.rem_euclid(l) as u64
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.modulus != other.modulus {
            return Err(LabError::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        let l = self.modulus.get();
        let mut entries = [0u32; 9];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0u64;
                for k in 0..3 {
                    acc += self.raw(i, k) * other.raw(k, j);
                }
                entries[3 * i + j] = (acc % l) as u32;
            }
        }
        Ok(GroupElement {
            entries,
            modulus: self.modulus,
        })
    }

    /// Apply to a column vector of residues.
    pub fn apply(&self, v: [u64; 3]) -> [u64; 3] {
        let l = self.modulus.get();
        let mut out = [0u64; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| self.raw(i, k) * v[k]).sum::<u64>() % l;
        }
        out
    }

    /// Inverse via the adjugate (determinant is one).
    pub fn inverse(&self) -> GroupElement {
        let l = self.modulus.get() as i64;
        let e = |i: usize, j: usize| self.entries[3 * i + j] as i64;
        let mut entries = [0u32; 9];
        for i in 0..3 {
            for j in 0..3 {
                // cofactor of (j, i)
                let (r0, r1) = rest(j);
                let (c0, c1) = rest(i);
                let minor = e(r0, c0) * e(r1, c1) - e(r0, c1) * e(r1, c0);
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                entries[3 * i + j] = (sign * minor).rem_euclid(l) as u32;
            }
        }
        GroupElement {
            entries,
            modulus: self.modulus,
        }
    }
}

fn rest(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Order of `SL(3, F_l)`: `(l^3 - 1)(l^3 - l)(l^3 - l^2) / (l - 1)`.
pub fn sl3_order(l: Prime) -> u128 {
    let l = l.get() as u128;
    let l3 = l * l * l;
    (l3 - 1) * (l3 - l) * (l3 - l * l) / (l - 1)
}

/// A finite list of integer matrices of determinant one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub elements: Vec<IntMatrix3>,
    pub symmetric: bool,
}

/// A member of the extended set `Sigma+`: either a listed generator or the sign isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorTag {
    Matrix(usize),
    Sign,
}

impl GeneratorSet {
    /// The twelve elementary matrices `I + s E_ij` with `i != j`, `s = +-1`.
    pub fn elementary() -> Self {
        let mut elements = Vec::with_capacity(12);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                for s in [1i64, -1] {
                    let mut m = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
                    m[i][j] = s;
                    elements.push(m);
                }
            }
        }
        GeneratorSet {
            elements,
            symmetric: true,
        }
    }

    pub fn identity_only() -> Self {
        GeneratorSet {
            elements: vec![[[1, 0, 0], [0, 1, 0], [0, 0, 1]]],
            symmetric: true,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Reduce every generator mod `l`, keeping the first occurrence of each residue class.
    ///
    /// Over `F_2` the elementary matrices `e_ij(1)` and `e_ij(-1)` coincide, so the
    /// twelve elementary generators reduce to six distinct elements.
    pub fn reduce(&self, l: Prime) -> Result<Vec<GroupElement>> {
        let mut out: Vec<GroupElement> = Vec::with_capacity(self.elements.len());
        for m in &self.elements {
            let g = GroupElement::from_int(m, l)?;
            if !out.contains(&g) {
                out.push(g);
            }
        }
        Ok(out)
    }

    /// Whether the reduced set is closed under inversion.
    pub fn is_symmetric_mod(&self, l: Prime) -> Result<bool> {
        let red = self.reduce(l)?;
        Ok(red.iter().all(|g| red.contains(&g.inverse())))
    }

    /// Tags for `Sigma+`, the reduced generators mod `l` followed by the sign isometry.
    pub fn plus_tags(&self, l: Prime) -> Result<Vec<GeneratorTag>> {
        let n = self.reduce(l)?.len();
        let mut tags: Vec<GeneratorTag> = (0..n).map(GeneratorTag::Matrix).collect();
        tags.push(GeneratorTag::Sign);
        Ok(tags)
    }
}

/// The image of a generator set in `SL(3, F_l)`, enumerated by breadth-first closure.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub modulus: Prime,
    pub elements: Vec<GroupElement>,
    pub index: HashMap<GroupElement, usize>,
    pub generators: Vec<GroupElement>,
    pub expected_order: u128,
}

impl Quotient {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True when the closure is all of `SL(3, F_l)`.
    pub fn is_full_group(&self) -> bool {
        self.elements.len() as u128 == self.expected_order
    }

    pub fn verify(&self) -> Result<()> {
        if self.is_full_group() {
            Ok(())
        } else {
            Err(LabError::OrderMismatch {
                found: self.elements.len(),
                expected: self.expected_order as usize,
            })
        }
    }
}

/// Breadth-first closure of the identity under right multiplication by the reduced generators.
pub fn enumerate_quotient(l: Prime, gens: &GeneratorSet, cap: usize) -> Result<Quotient> {
    let generators = gens.reduce(l)?;
    let id = GroupElement::identity(l);
    let mut elements = vec![id];
    let mut index = HashMap::new();
    index.insert(id, 0usize);
    let mut queue = VecDeque::from([0usize]);
    while let Some(cur) = queue.pop_front() {
        let g = elements[cur];
        for s in &generators {
            let h = g.mul(s)?;
            if index.contains_key(&h) {
                continue;
            }
            if elements.len() >= cap {
                return Err(LabError::ClosureCap {
                    cap,
                    reached: elements.len(),
                });
            }
            index.insert(h, elements.len());
            queue.push_back(elements.len());
            elements.push(h);
        }
    }
    Ok(Quotient {
        modulus: l,
        elements,
        index,
        generators,
        expected_order: sl3_order(l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: u64) -> Prime {
        Prime::new(l).unwrap()
    }

    #[test]
    fn order_formula() {
        assert_eq!(sl3_order(p(2)), 168);
        assert_eq!(sl3_order(p(3)), 5616);
        assert_eq!(sl3_order(p(5)), 372_000);
    }

    #[test]
    fn closure_sl3_f2() {
        let q = enumerate_quotient(p(2), &GeneratorSet::elementary(), DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(q.len(), 168);
        assert!(q.verify().is_ok());
        assert_eq!(q.generators.len(), 6);
    }

    #[test]
    fn closure_sl3_f3() {
        let q = enumerate_quotient(p(3), &GeneratorSet::elementary(), DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(q.len(), 5616);
        assert_eq!(q.generators.len(), 12);
    }

    #[test]
    fn identity_generators_fail_postcondition() {
        let q =
            enumerate_quotient(p(3), &GeneratorSet::identity_only(), DEFAULT_CLOSURE_CAP).unwrap();
        assert_eq!(q.len(), 1);
        assert!(matches!(
            q.verify(),
            Err(LabError::OrderMismatch { found: 1, .. })
        ));
    }

    #[test]
    fn cap_refuses_with_partial_count() {
        let err = enumerate_quotient(p(3), &GeneratorSet::elementary(), 100).unwrap_err();
        assert_eq!(
            err,
            LabError::ClosureCap {
                cap: 100,
                reached: 100
            }
        );
    }

    #[test]
    fn inverse_and_determinant() {
        let q = enumerate_quotient(p(2), &GeneratorSet::elementary(), DEFAULT_CLOSURE_CAP).unwrap();
        let id = GroupElement::identity(p(2));
        for g in &q.elements {
            assert_eq!(g.det(), 1);
            assert_eq!(g.mul(&g.inverse()).unwrap(), id);
        }
        assert!(GeneratorSet::elementary().is_symmetric_mod(p(5)).unwrap());
    }

    #[test]
    fn rejects_bad_determinant() {
        let m = [[2, 0, 0], [0, 1, 0], [0, 0, 1]];
        assert!(matches!(
            GroupElement::from_int(&m, p(5)),
            Err(LabError::NotSpecialLinear { det: 2, .. })
        ));
    }
}
