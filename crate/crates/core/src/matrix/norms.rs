//! Vector and operator norms on finite `l_p` spaces.
//!
//! Operator norms are exact for `p` in `{1, 2, inf}`: maximum column sum,
//! largest singular value, maximum row sum. For other `p` the value is a
//! lower estimate from a power iteration and the report is flagged inexact.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::dense::{DenseMatrix, C64};
use super::random::gaussian_vector;
use crate::error::{LabError, Result};

/// An exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormIndex {
    One,
    Two,
    Inf,
    General(f64),
}

impl NormIndex {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(LabError::InvalidP(p));
        }
        Ok(if p == 1.0 {
            NormIndex::One
        } else if p == 2.0 {
            NormIndex::Two
        } else if p.is_infinite() {
            NormIndex::Inf
        } else {
            NormIndex::General(p)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            NormIndex::One => 1.0,
            NormIndex::Two => 2.0,
            NormIndex::Inf => f64::INFINITY,
            NormIndex::General(p) => p,
        }
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn dual(self) -> Self {
        match self {
            NormIndex::One => NormIndex::Inf,
            NormIndex::Two => NormIndex::Two,
            NormIndex::Inf => NormIndex::One,
            NormIndex::General(p) => NormIndex::General(p / (p - 1.0)),
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, NormIndex::General(_))
    }

    /// Parse `"1"`, `"2"`, `"inf"`, `"1.5"`, ...
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinity" || t == "oo" {
            return Ok(NormIndex::Inf);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| LabError::Parse(format!("bad norm index '{s}'")))?;
        NormIndex::new(p)
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormIndex::Inf => write!(f, "inf"),
            other => write!(f, "{}", other.value()),
        }
    }
}

impl Serialize for NormIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormIndex::Inf => serializer.serialize_str("inf"),
            other => serializer.serialize_f64(other.value()),
        }
    }
}

impl<'de> Deserialize<'de> for NormIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Num(f64),
            Text(String),
        }
        let parsed = match Wire::deserialize(deserializer)? {
            Wire::Num(p) => NormIndex::new(p),
            Wire::Text(s) => NormIndex::parse(&s),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub p: NormIndex,
    pub value: f64,
    pub exact: bool,
    pub regular_value: f64,
}

pub fn vec_norm(v: &[C64], p: NormIndex) -> f64 {
    match p {
        NormIndex::One => v.iter().map(|z| z.norm()).sum(),
        NormIndex::Two => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        NormIndex::Inf => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
        NormIndex::General(p) => v
            .iter()
            .map(|z| z.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p),
    }
}

pub fn vec_norm_real(v: &[f64], p: NormIndex) -> f64 {
    match p {
        NormIndex::One => v.iter().map(|x| x.abs()).sum(),
        NormIndex::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormIndex::Inf => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
        NormIndex::General(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

fn max_col_sum(x: &DenseMatrix) -> f64 {
    (0..x.cols())
        .map(|j| (0..x.rows()).map(|i| x.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_row_sum(x: &DenseMatrix) -> f64 {
    (0..x.rows())
        .map(|i| (0..x.cols()).map(|j| x.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||x||_{p -> p}`; exact for `p` in `{1, 2, inf}`, otherwise a lower estimate.
pub fn opnorm_value(x: &DenseMatrix, p: NormIndex) -> Result<f64> {
    if x.is_empty() {
        return Err(LabError::EmptyMatrix);
    }
    Ok(match p {
        NormIndex::One => max_col_sum(x),
        NormIndex::Inf => max_row_sum(x),
        NormIndex::Two => x.singular_values()?[0],
        NormIndex::General(p) => power_estimate(x, p),
    })
}

pub fn opnorm(x: &DenseMatrix, p: NormIndex) -> Result<NormReport> {
    Ok(NormReport {
        p,
        value: opnorm_value(x, p)?,
        exact: p.is_exact(),
        regular_value: opnorm_value(&x.abs(), p)?,
    })
}

/// Operator norm of the entrywise modulus.
pub fn regular_norm(x: &DenseMatrix, p: NormIndex) -> Result<f64> {
    opnorm_value(&x.abs(), p)
}

/// Exact-mode operator norm: refuses exponents without a closed form.
pub fn opnorm_exact(x: &DenseMatrix, p: NormIndex) -> Result<f64> {
    if !p.is_exact() {
        return Err(LabError::InexactP(p.value()));
    }
    opnorm_value(x, p)
}

fn duality_map(v: &[C64], p: f64) -> Vec<C64> {
    // z_i = sgn(v_i) |v_i|^{p-1} / ||v||_p^{p-1}, so that <z, v> = ||v||_p and ||z||_q = 1.
    let norm = vec_norm(v, NormIndex::General(p));
    if norm == 0.0 {
        return vec![C64::new(0.0, 0.0); v.len()];
    }
    v.iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                (z / r) * (r / norm).powf(p - 1.0)
            }
        })
        .collect()
}

/// Power iteration for `||x||_{p -> p}` from several deterministic starts.
fn power_estimate(x: &DenseMatrix, p: f64) -> f64 {
    let q = p / (p - 1.0);
    let n = x.cols();
    let adj = x.adjoint();
    let mut starts: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0); n]];
    for j in 0..n.min(4) {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        starts.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..4 {
        starts.push(gaussian_vector(&mut rng, n));
    }
    let mut best = 0.0f64;
    for start in starts {
        let nv = vec_norm(&start, NormIndex::General(p));
        if nv == 0.0 {
            continue;
        }
        let mut v: Vec<C64> = start.iter().map(|z| z / nv).collect();
        let mut est = vec_norm(&x.apply(&v), NormIndex::General(p));
        for _ in 0..200 {
            let y = x.apply(&v);
            let z = duality_map(&y, p);
            let w = adj.apply(&z);
            let next = duality_map(&w, q);
            if vec_norm(&next, NormIndex::General(p)) == 0.0 {
                break;
            }
            let e = vec_norm(&x.apply(&next), NormIndex::General(p));
            v = next;
            if e <= est * (1.0 + 1e-13) {
                est = est.max(e);
                break;
            }
            est = e;
        }
        best = best.max(est);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenOrder {
    One,
    Two,
}

/// Trace-class (order 1) or Hilbert-Schmidt (order 2) norm.
pub fn schatten_norm(x: &DenseMatrix, order: SchattenOrder) -> Result<f64> {
    let s = x.singular_values()?;
    Ok(match order {
        SchattenOrder::One => s.iter().sum(),
        SchattenOrder::Two => s.iter().map(|v| v * v).sum::<f64>().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::random::{gaussian_matrix, rng_from_seed};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn vector_norms() {
        assert_eq!(vec_norm(&[c(1.0), c(0.0), c(0.0)], NormIndex::Two), 1.0);
        assert_eq!(vec_norm(&[c(1.0); 4], NormIndex::Two), 2.0);
        assert_eq!(vec_norm(&[c(3.0), c(4.0)], NormIndex::One), 7.0);
        assert_eq!(vec_norm(&[c(3.0), c(4.0)], NormIndex::Inf), 4.0);
        assert_eq!(NormIndex::new(0.5), Err(LabError::InvalidP(0.5)));
    }

    #[test]
    fn operator_norm_examples() {
        for p in [
            NormIndex::One,
            NormIndex::Two,
            NormIndex::Inf,
            NormIndex::General(3.0),
        ] {
            let r = opnorm(&DenseMatrix::identity(5), p).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "{p}: {}", r.value);
            assert_eq!(r.exact, p.is_exact());
        }
        let m = DenseMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(opnorm_value(&m, NormIndex::One).unwrap(), 2.0);
        let ones = DenseMatrix::from_real(4, 4, &[1.0; 16]).unwrap();
        assert!((opnorm_value(&ones, NormIndex::Two).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(
            opnorm(&DenseMatrix::zeros(0, 3), NormIndex::One).unwrap_err(),
            LabError::EmptyMatrix
        );
    }

    #[test]
    fn regular_norm_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = DenseMatrix::from_real(2, 2, &[h, -h, h, h]).unwrap();
        assert!((opnorm_value(&m, NormIndex::Two).unwrap() - 1.0).abs() < 1e-12);
        assert!((regular_norm(&m, NormIndex::Two).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let p = DenseMatrix::from_permutation(&[2, 0, 1]);
        for idx in [NormIndex::One, NormIndex::Two, NormIndex::Inf] {
            assert!((regular_norm(&p, idx).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn duality_of_one_and_inf() {
        let mut rng = rng_from_seed(11);
        for _ in 0..20 {
            let x = gaussian_matrix(&mut rng, 4, 7);
            let a = opnorm_value(&x, NormIndex::One).unwrap();
            let b = opnorm_value(&x.transpose(), NormIndex::Inf).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn general_p_estimate_is_a_lower_bound_consistent_with_riesz_thorin() {
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let x = gaussian_matrix(&mut rng, 5, 5);
            let est = opnorm_value(&x, NormIndex::General(1.5)).unwrap();
            let n1 = opnorm_value(&x, NormIndex::One).unwrap();
            let n2 = opnorm_value(&x, NormIndex::Two).unwrap();
            // interpolation between p = 1 and p = 2 at theta = 2/3
            let upper = n1.powf(1.0 / 3.0) * n2.powf(2.0 / 3.0);
            assert!(est <= upper * (1.0 + 1e-9));
            assert!(est > 0.0);
        }
    }

    #[test]
    fn general_p_estimate_attains_value_on_diagonal() {
        let d = DenseMatrix::from_real_diagonal(&[0.5, 3.0, -2.0]);
        let est = opnorm_value(&d, NormIndex::General(3.0)).unwrap();
        assert!((est - 3.0).abs() < 1e-9);
    }

    #[test]
    fn schatten_examples() {
        let xi = [c(0.6), c(0.8)];
        let eta = [C64::new(0.0, 1.0), c(0.0)];
        let r1 = DenseMatrix::outer(&xi, &eta);
        assert!((schatten_norm(&r1, SchattenOrder::One).unwrap() - 1.0).abs() < 1e-12);
        assert!((schatten_norm(&r1, SchattenOrder::Two).unwrap() - 1.0).abs() < 1e-12);
        let id = DenseMatrix::identity(6);
        assert!((schatten_norm(&id, SchattenOrder::One).unwrap() - 6.0).abs() < 1e-12);
        assert!((schatten_norm(&id, SchattenOrder::Two).unwrap() - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hilbert_schmidt_matches_entry_sum() {
        let mut rng = rng_from_seed(3);
        let x = gaussian_matrix(&mut rng, 5, 5);
        let entry_sum: f64 = (0..5)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .map(|(i, j)| x.get(i, j).norm_sqr())
            .sum();
        let s2 = schatten_norm(&x, SchattenOrder::Two).unwrap();
        assert!((s2 * s2 - entry_sum).abs() <= 1e-7 * entry_sum);
        assert!(s2 <= schatten_norm(&x, SchattenOrder::One).unwrap());
    }
}
