//! The finite projective plane `(F_l^3 - {0}) / F_l^x` and the induced actions.

use std::collections::HashMap;

use serde::Serialize;

use super::field::{inv_mod, Prime, DEFAULT_MAX_PRIME};
use super::group::{GeneratorSet, GroupElement};
use crate::error::{LabError, Result};
use crate::matrix::DenseMatrix;

/// A line through the origin of `F_l^3`, stored by its canonical representative
/// whose first nonzero coordinate equals one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    rep: [u64; 3],
    modulus: Prime,
}

impl ProjPoint {
    /// Normalize a vector of residues; fails on the zero vector.
    pub fn normalize(v: [u64; 3], modulus: Prime) -> Result<Self> {
        let l = modulus.get();
        let v = [v[0] % l, v[1] % l, v[2] % l];
        let lead = v
            .iter()
            .copied()
            .find(|&x| x != 0)
            .ok_or(LabError::ZeroVector)?;
        let s = inv_mod(lead, l);
        Ok(ProjPoint {
            rep: [v[0] * s % l, v[1] * s % l, v[2] * s % l],
            modulus,
        })
    }

    pub fn rep(&self) -> [u64; 3] {
        self.rep
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }
}

/// Image of a projective point under a group element.
pub fn act(g: &GroupElement, s: &ProjPoint) -> Result<ProjPoint> {
    if g.modulus() != s.modulus() {
        return Err(LabError::ModulusMismatch {
            left: g.modulus().get(),
            right: s.modulus().get(),
        });
    }
    ProjPoint::normalize(g.apply(s.rep), s.modulus)
}

/// Points of `Lambda_l` in lexicographic order of their canonical representatives,
/// together with the sign set `C_l` (the first `(l^2 + l) / 2` points).
#[derive(Debug, Clone)]
pub struct ProjectivePlane {
    l: Prime,
    points: Vec<ProjPoint>,
    index: HashMap<ProjPoint, usize>,
    sign_set: Vec<bool>,
}

#[derive(Serialize)]
struct PlaneDump<'a> {
    l: u64,
    points: Vec<[u64; 3]>,
    sign_set: &'a [bool],
}

impl ProjectivePlane {
    pub fn build(l: u64) -> Result<Self> {
        Self::build_with_max(l, DEFAULT_MAX_PRIME)
    }

    pub fn build_with_max(l: u64, max: u64) -> Result<Self> {
        let prime = Prime::bounded(l, max)?;
        let mut points = Vec::with_capacity((l * l + l + 1) as usize);
        for x in 0..l {
            for y in 0..l {
                for z in 0..l {
                    let v = [x, y, z];
                    if v == [0, 0, 0] {
                        continue;
                    }
                    let pt = ProjPoint::normalize(v, prime)?;
                    if pt.rep == v {
                        points.push(pt);
                    }
                }
            }
        }
        let index = points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let half = ((l * l + l) / 2) as usize;
        let sign_set = (0..points.len()).map(|i| i < half).collect();
        Ok(ProjectivePlane {
            l: prime,
            points,
            index,
            sign_set,
        })
    }

    pub fn prime(&self) -> Prime {
        self.l
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Result<ProjPoint> {
        self.points
            .get(i)
            .copied()
            .ok_or(LabError::IndexOutOfRange {
                index: i,
                len: self.points.len(),
            })
    }

    pub fn index_of(&self, s: &ProjPoint) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn sign_set(&self) -> &[bool] {
        &self.sign_set
    }

    pub fn sign_set_size(&self) -> usize {
        self.sign_set.iter().filter(|b| **b).count()
    }

    /// The permutation `s -> g.s` of point indices.
    pub fn permutation(&self, g: &GroupElement) -> Result<Vec<usize>> {
        self.points
            .iter()
            .map(|s| {
                let t = act(g, s)?;
                Ok(self.index[&t])
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let dump = PlaneDump {
            l: self.l.get(),
            points: self.points.iter().map(|p| p.rep).collect(),
            sign_set: &self.sign_set,
        };
        serde_json::to_string(&dump).expect("plane dump serializes")
    }
}

/// Orbit sizes of the diagonal action on `Lambda_l x Lambda_l`, sorted ascending.
pub fn orbit_count_product_action(
    plane: &ProjectivePlane,
    gens: &GeneratorSet,
) -> Result<Vec<usize>> {
    let n = plane.len();
    let perms: Vec<Vec<usize>> = gens
        .reduce(plane.prime())?
        .iter()
        .map(|g| plane.permutation(g))
        .collect::<Result<_>>()?;
    let mut parent: Vec<usize> = (0..n * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for perm in &perms {
        for s in 0..n {
            for t in 0..n {
                let a = find(&mut parent, s * n + t);
                let b = find(&mut parent, perm[s] * n + perm[t]);
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for x in 0..n * n {
        *sizes.entry(find(&mut parent, x)).or_default() += 1;
    }
    let mut out: Vec<usize> = sizes.into_values().collect();
    out.sort_unstable();
    Ok(out)
}

/// Permutation matrix with `P e_s = e_{g.s}`, so that `P(gh) = P(g) P(h)`.
pub fn perm_matrix(g: &GroupElement, plane: &ProjectivePlane) -> Result<DenseMatrix> {
    if g.modulus() != plane.prime() {
        return Err(LabError::ModulusMismatch {
            left: g.modulus().get(),
            right: plane.prime().get(),
        });
    }
    let perm = plane.permutation(g)?;
    Ok(DenseMatrix::from_permutation(&perm))
}

/// Diagonal `+-1` matrix: `+1` on the sign set, `-1` elsewhere.
pub fn sign_isometry(plane: &ProjectivePlane) -> DenseMatrix {
    let diag: Vec<f64> = plane
        .sign_set()
        .iter()
        .map(|&b| if b { 1.0 } else { -1.0 })
        .collect();
    DenseMatrix::from_real_diagonal(&diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::group::{enumerate_quotient, DEFAULT_CLOSURE_CAP};
    use crate::matrix::norms::{opnorm, NormIndex};
    use std::collections::HashSet;

    #[test]
    fn plane_sizes() {
        for l in [2u64, 3, 5, 7, 11, 13] {
            let plane = ProjectivePlane::build(l).unwrap();
            assert_eq!(plane.len() as u64, l * l + l + 1);
            assert_eq!(plane.sign_set_size() as u64, (l * l + l) / 2);
        }
        assert_eq!(
            ProjectivePlane::build(4).unwrap_err(),
            LabError::NotPrime(4)
        );
    }

    #[test]
    fn nonzero_vectors_partition_into_lines() {
        for l in [2u64, 3, 5, 7] {
            let plane = ProjectivePlane::build(l).unwrap();
            let mut counts = vec![0usize; plane.len()];
            for x in 0..l {
                for y in 0..l {
                    for z in 0..l {
                        if [x, y, z] == [0, 0, 0] {
                            continue;
                        }
                        let pt = ProjPoint::normalize([x, y, z], plane.prime()).unwrap();
                        counts[plane.index_of(&pt).unwrap()] += 1;
                    }
                }
            }
            assert!(counts.iter().all(|&c| c as u64 == l - 1));
        }
    }

    #[test]
    fn swap_matrix_moves_first_point_to_second() {
        let l = Prime::new(5).unwrap();
        // e1 -> e2, e2 -> -e1 keeps determinant one
        let g = GroupElement::from_int(&[[0, -1, 0], [1, 0, 0], [0, 0, 1]], l).unwrap();
        let s = ProjPoint::normalize([1, 0, 0], l).unwrap();
        assert_eq!(act(&g, &s).unwrap().rep(), [0, 1, 0]);
        let id = GroupElement::identity(l);
        assert_eq!(act(&id, &s).unwrap(), s);
    }

    #[test]
    fn full_group_orbit_is_everything() {
        let plane = ProjectivePlane::build(2).unwrap();
        let q = enumerate_quotient(
            plane.prime(),
            &GeneratorSet::elementary(),
            DEFAULT_CLOSURE_CAP,
        )
        .unwrap();
        let s = plane.point(0).unwrap();
        let orbit: HashSet<ProjPoint> = q.elements.iter().map(|g| act(g, &s).unwrap()).collect();
        assert_eq!(orbit.len(), 7);
    }

    #[test]
    fn two_orbits_on_pairs() {
        for (l, n) in [(2u64, 7usize), (3, 13), (5, 31)] {
            let plane = ProjectivePlane::build(l).unwrap();
            let sizes = orbit_count_product_action(&plane, &GeneratorSet::elementary()).unwrap();
            assert_eq!(sizes, vec![n, n * (n - 1)]);
        }
    }

    #[test]
    fn sign_isometry_properties() {
        let plane = ProjectivePlane::build(2).unwrap();
        let v = sign_isometry(&plane);
        let diag: Vec<f64> = (0..7).map(|i| v.get(i, i).re).collect();
        assert_eq!(diag.iter().filter(|d| **d > 0.0).count(), 3);
        assert_eq!(v.trace().re, -1.0);
        assert!(
            v.matmul(&v)
                .unwrap()
                .max_abs_diff(&DenseMatrix::identity(7))
                == 0.0
        );
        for p in [NormIndex::One, NormIndex::Two, NormIndex::Inf] {
            assert!((opnorm(&v, p).unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perm_matrix_is_a_homomorphism() {
        let plane = ProjectivePlane::build(2).unwrap();
        let q = enumerate_quotient(
            plane.prime(),
            &GeneratorSet::elementary(),
            DEFAULT_CLOSURE_CAP,
        )
        .unwrap();
        let id = perm_matrix(&GroupElement::identity(plane.prime()), &plane).unwrap();
        assert_eq!(id.max_abs_diff(&DenseMatrix::identity(7)), 0.0);
        for (i, g) in q.elements.iter().enumerate().step_by(7) {
            let h = &q.elements[(i * 31 + 5) % q.len()];
            let pg = perm_matrix(g, &plane).unwrap();
            let ph = perm_matrix(h, &plane).unwrap();
            let pgh = perm_matrix(&g.mul(h).unwrap(), &plane).unwrap();
            assert_eq!(pg.matmul(&ph).unwrap().max_abs_diff(&pgh), 0.0);
            for c in 0..7 {
                let col_sum: f64 = (0..7).map(|r| pg.get(r, c).re).sum();
                assert_eq!(col_sum, 1.0);
            }
        }
    }

    #[test]
    fn modulus_mismatch_is_rejected() {
        let plane = ProjectivePlane::build(3).unwrap();
        let g = GroupElement::identity(Prime::new(2).unwrap());
        assert!(matches!(
            perm_matrix(&g, &plane),
            Err(LabError::ModulusMismatch { .. })
        ));
        assert!(act(&g, &plane.point(0).unwrap()).is_err());
    }

    #[test]
    fn json_dump_lists_triples() {
        let plane = ProjectivePlane::build(2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&plane.to_json()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 7);
        assert_eq!(v["points"][0], serde_json::json!([0, 0, 1]));
    }
}
