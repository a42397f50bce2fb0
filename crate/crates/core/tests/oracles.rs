//! Library results against brute-force or closed-form oracles computed here.

use std::collections::HashSet;

use amenlab::expander::{adjacency_spectrum, cheeger_exact, Graph};
use amenlab::finite::{enumerate_quotient, GeneratorSet, Prime, ProjectivePlane};
use amenlab::matrix::{
    gaussian_matrix, haar_unitary, opnorm_value, rng_from_seed, schatten_norm, DenseMatrix,
    NormIndex, SchattenOrder, C64,
};
use amenlab::mazur::{nc_mazur, nc_mazur_inverse};
use amenlab::pipeline::{exact_diagonal, prod_check, TensorDecomposition};
use proptest::prelude::*;

fn det3(m: &[i64; 9]) -> i64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
}

fn brute_sl3(l: i64) -> HashSet<[u32; 9]> {
    let total = (l as u64).pow(9);
    let mut out = HashSet::new();
    for code in 0..total {
        let mut c = code;
        let mut m = [0i64; 9];
        for e in m.iter_mut() {
            *e = (c % l as u64) as i64;
            c /= l as u64;
        }
        if det3(&m).rem_euclid(l) == 1 {
            out.insert(m.map(|x| x as u32));
        }
    }
    out
}

#[test]
fn closure_equals_brute_force_group() {
    for l in [2u64, 3] {
        let q = enumerate_quotient(
            Prime::new(l).unwrap(),
            &GeneratorSet::elementary(),
            1_000_000,
        )
        .unwrap();
        let closed: HashSet<[u32; 9]> = q.elements.iter().map(|g| g.to_row_major()).collect();
        assert_eq!(closed, brute_sl3(l as i64), "l = {l}");
    }
}

#[test]
fn plane_matches_line_count() {
    for l in [2u64, 3, 5, 7] {
        // lines through the origin: nonzero vectors modulo scalars
        let mut lines = HashSet::new();
        for x in 0..l {
            for y in 0..l {
                for z in 0..l {
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    let line: Vec<[u64; 3]> =
                        (1..l).map(|c| [c * x % l, c * y % l, c * z % l]).collect();
                    lines.insert(*line.iter().min().unwrap());
                }
            }
        }
        let plane = ProjectivePlane::build(l).unwrap();
        assert_eq!(plane.len(), lines.len());
        let reps: HashSet<[u64; 3]> = plane
            .points()
            .iter()
            .map(|p| {
                let v = p.rep();
                (1..l)
                    .map(|c| [c * v[0] % l, c * v[1] % l, c * v[2] % l])
                    .min()
                    .unwrap()
            })
            .collect();
        assert_eq!(reps, lines);
        assert_eq!(plane.sign_set_size(), (l * l + l) as usize / 2);
    }
}

#[test]
fn cheeger_of_known_families() {
    for n in 3..=12 {
        let h = cheeger_exact(&Graph::cycle(n)).unwrap();
        assert!((h - 2.0 / (n / 2) as f64).abs() < 1e-12, "cycle {n}");
    }
    for n in 2..=10 {
        let h = cheeger_exact(&Graph::complete(n)).unwrap();
        assert!((h - n.div_ceil(2) as f64).abs() < 1e-12, "complete {n}");
    }
}

#[test]
fn cycle_spectrum_is_cosines() {
    for n in 3..=15 {
        let mut expected: Vec<f64> = (0..n)
            .map(|j| 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let got = adjacency_spectrum(&Graph::cycle(n)).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn exact_diagonal_round_trips_through_json() {
    let t = exact_diagonal(&[2, 3], NormIndex::Two).unwrap();
    assert_eq!(t.rank(), (7 + 13) * (7 + 13));
    assert!(prod_check(&t).unwrap() < 1e-12);
    let back = TensorDecomposition::from_json(&t.to_json()).unwrap();
    assert_eq!(back.rank(), t.rank());
    assert!(prod_check(&back).unwrap() < 1e-12);
}

fn max_col_sum(x: &DenseMatrix) -> f64 {
    (0..x.cols())
        .map(|j| x.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_row_sum(x: &DenseMatrix) -> f64 {
    (0..x.rows())
        .map(|i| x.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value by power iteration on `X* X`.
fn power_sigma(x: &DenseMatrix) -> f64 {
    let xtx = x.adjoint().matmul(x).unwrap();
    let mut v: Vec<C64> = (0..x.cols())
        .map(|i| C64::new(1.0 + i as f64 * 0.37, 0.1))
        .collect();
    let mut val = 0.0;
    for _ in 0..5000 {
        let w = xtx.apply(&v);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        val = norm;
        v = w.into_iter().map(|z| z / norm).collect();
    }
    val.sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_operator_norms(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let x = gaussian_matrix(&mut rng_from_seed(seed), rows, cols);
        let one = opnorm_value(&x, NormIndex::One).unwrap();
        let inf = opnorm_value(&x, NormIndex::Inf).unwrap();
        let two = opnorm_value(&x, NormIndex::Two).unwrap();
        prop_assert!((one - max_col_sum(&x)).abs() <= 1e-12 * one.max(1.0));
        prop_assert!((inf - max_row_sum(&x)).abs() <= 1e-12 * inf.max(1.0));
        prop_assert!((two - power_sigma(&x)).abs() <= 1e-6 * two.max(1.0));
    }

    #[test]
    fn mazur_on_rotated_diagonals(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_from_seed(seed);
        let d: Vec<f64> = (0..n).map(|i| ((seed >> (i % 60)) % 97) as f64 + 1.0).collect();
        let total: f64 = d.iter().sum();
        let d: Vec<f64> = d.iter().map(|x| x / total).collect();
        let u = haar_unitary(&mut rng, n);
        let v = haar_unitary(&mut rng, n);
        let t = u.matmul(&DenseMatrix::from_real_diagonal(&d)).unwrap().matmul(&v).unwrap();
        let root: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
        let expected = u.matmul(&DenseMatrix::from_real_diagonal(&root)).unwrap().matmul(&v).unwrap();
        let phi = nc_mazur(&t).unwrap();
        prop_assert!(phi.max_abs_diff(&expected) < 1e-9);
        prop_assert!((schatten_norm(&phi, SchattenOrder::Two).unwrap().powi(2) - 1.0).abs() < 1e-9);
        prop_assert!(nc_mazur_inverse(&phi).unwrap().max_abs_diff(&t) < 1e-9);
    }
}
