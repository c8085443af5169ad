//! Abstract tree-expansion harness: given a coefficient domain with two
//! bilinear kernels, build the tree-indexed coefficients and the
//! integer-order coefficients, and check that the tree sums aggregate to the
//! order sums.
//!
//! The reference instance works over exact rational matrices, so aggregation
//! is literal equality. A deliberately non-bilinear control instance is
//! provided to keep the check non-vacuous: with it, aggregation must break.
//! Note that the orders n <= 2 are immune by construction: up to order 2 the
//! two recursions evaluate the kernels on identical arguments term by term,
//! so the earliest order any control can fail is n = 3 (additivity is first
//! exercised when an order-2 sum feeds a kernel argument).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tree::Tree;

/// Bound on the expansion order; every tree up to this order is visited.
pub const DYSON_CAP: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DysonError {
    #[error("order {n} exceeds the expansion cap {cap}")]
    CapExceeded { n: usize, cap: usize },
}

/// The abstract coefficient domain: exact equality, addition with zero,
/// rational scaling, two combination kernels, and the two seed elements.
pub trait CoefficientAlgebra {
    type Element: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Element;
    fn add(&self, x: &Self::Element, y: &Self::Element) -> Self::Element;
    fn scale(&self, r: &BigRational, x: &Self::Element) -> Self::Element;
    /// Kernel for the `S` family, bilinear in `(d, s)`.
    fn phi_s(&self, d: &Self::Element, s: &Self::Element) -> Self::Element;
    /// Kernel for the `D` family, bilinear in `(s, d)`.
    fn phi_d(&self, s: &Self::Element, d: &Self::Element) -> Self::Element;
    fn s0(&self) -> Self::Element;
    fn d0(&self) -> Self::Element;
}

fn check_cap(n: usize) -> Result<(), DysonError> {
    if n > DYSON_CAP {
        return Err(DysonError::CapExceeded { n, cap: DYSON_CAP });
    }
    Ok(())
}

/// Tree-indexed coefficients: `S_leaf = s0`, `D_leaf = d0`, and for
/// `t = graft(l, r)`, `S_t = phi_s(D_l, S_r)` and `D_t = phi_d(S_l, D_r)`.
/// Returns the `S` and `D` maps over all trees of order at most `n`.
#[allow(clippy::type_complexity)]
pub fn tree_coefficients<A: CoefficientAlgebra>(
    alg: &A,
    n: usize,
) -> Result<(BTreeMap<Tree, A::Element>, BTreeMap<Tree, A::Element>), DysonError> {
    check_cap(n)?;
    let mut s_map: BTreeMap<Tree, A::Element> = BTreeMap::new();
    let mut d_map: BTreeMap<Tree, A::Element> = BTreeMap::new();
    let levels = Tree::enumerate_levels(n).expect("cap is within the enumeration cap");
    for level in &levels {
        for t in level {
            match t.children() {
                None => {
                    s_map.insert(t.clone(), alg.s0());
                    d_map.insert(t.clone(), alg.d0());
                }
                Some((l, r)) => {
                    let s = alg.phi_s(&d_map[l], &s_map[r]);
                    let d = alg.phi_d(&s_map[l], &d_map[r]);
                    s_map.insert(t.clone(), s);
                    d_map.insert(t.clone(), d);
                }
            }
        }
    }
    Ok((s_map, d_map))
}

/// Integer-order coefficients: `S_0 = s0`, `D_0 = d0`, and
/// `S_m = sum over k+l = m-1 of phi_s(D_k, S_l)`, mirrored for `D`.
/// Returns the lists indexed `0..=n`.
#[allow(clippy::type_complexity)]
pub fn order_coefficients<A: CoefficientAlgebra>(
    alg: &A,
    n: usize,
) -> Result<(Vec<A::Element>, Vec<A::Element>), DysonError> {
    check_cap(n)?;
    let mut s_list = vec![alg.s0()];
    let mut d_list = vec![alg.d0()];
    for m in 1..=n {
        let mut s = alg.zero();
        let mut d = alg.zero();
        for k in 0..m {
            s = alg.add(&s, &alg.phi_s(&d_list[k], &s_list[m - 1 - k]));
            d = alg.add(&d, &alg.phi_d(&s_list[k], &d_list[m - 1 - k]));
        }
        s_list.push(s);
        d_list.push(d);
    }
    Ok((s_list, d_list))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    S,
    D,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::S => write!(f, "S"),
            Family::D => write!(f, "D"),
        }
    }
}

/// The first order and family where aggregation broke, with both values
/// rendered for the report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateFailure {
    pub order: usize,
    pub family: Family,
    pub tree_sum: String,
    pub order_value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateReport {
    pub max_order: usize,
    pub failure: Option<AggregateFailure>,
}

impl AggregateReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Verifies `sum over trees of order m of S_t = S_m` (and likewise for `D`)
/// for every `m <= n`; reports the first failure instead of erroring.
pub fn aggregate_check<A: CoefficientAlgebra>(
    alg: &A,
    n: usize,
) -> Result<AggregateReport, DysonError> {
    let (s_map, d_map) = tree_coefficients(alg, n)?;
    let (s_list, d_list) = order_coefficients(alg, n)?;
    let levels = Tree::enumerate_levels(n).expect("cap is within the enumeration cap");
    for (m, level) in levels.iter().enumerate() {
        for (family, map, expected) in [
            (Family::S, &s_map, &s_list[m]),
            (Family::D, &d_map, &d_list[m]),
        ] {
            let mut total = alg.zero();
            for t in level {
                total = alg.add(&total, &map[t]);
            }
            if &total != expected {
                return Ok(AggregateReport {
                    max_order: n,
                    failure: Some(AggregateFailure {
                        order: m,
                        family,
                        tree_sum: format!("{:?}", total),
                        order_value: format!("{:?}", expected),
                    }),
                });
            }
        }
    }
    Ok(AggregateReport {
        max_order: n,
        failure: None,
    })
}

/// A square matrix with exact rational entries, row major.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zero(dim: usize) -> RatMatrix {
        RatMatrix {
            dim,
            entries: vec![BigRational::zero(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigRational) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim, "matching dimensions");
        RatMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> RatMatrix {
        RatMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * r).collect(),
        }
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim, "matching dimensions");
        let mut out = RatMatrix::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = BigRational::zero();
                for k in 0..self.dim {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.dim)
            .map(|i| {
                let cells: Vec<String> = (0..self.dim).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// The reference instance: `phi_s(d, s) = X d Y s` and
/// `phi_d(s, d) = d Z s W` over dim x dim rational matrices, with all six
/// constants drawn from one seeded generator. Noncommutative for dim >= 2.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    dim: usize,
    x: RatMatrix,
    y: RatMatrix,
    z: RatMatrix,
    w: RatMatrix,
    s0: RatMatrix,
    d0: RatMatrix,
}

fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> RatMatrix {
    let mut m = RatMatrix::zero(dim);
    for i in 0..dim {
        for j in 0..dim {
            let numer: i64 = rng.gen_range(-3..=3);
            let denom: i64 = rng.gen_range(1..=3);
            m.set(i, j, BigRational::new(numer.into(), denom.into()));
        }
    }
    m
}

pub fn matrix_algebra_instance(dim: usize, seed: u64) -> MatrixAlgebra {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MatrixAlgebra {
        dim,
        x: random_matrix(dim, &mut rng),
        y: random_matrix(dim, &mut rng),
        z: random_matrix(dim, &mut rng),
        w: random_matrix(dim, &mut rng),
        s0: random_matrix(dim, &mut rng),
        d0: random_matrix(dim, &mut rng),
    }
}

impl MatrixAlgebra {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A stable rendering of every generated matrix, for determinism pins.
    pub fn fingerprint(&self) -> String {
        format!(
            "X={:?} Y={:?} Z={:?} W={:?} s0={:?} d0={:?}",
            self.x, self.y, self.z, self.w, self.s0, self.d0
        )
    }
}

impl CoefficientAlgebra for MatrixAlgebra {
    type Element = RatMatrix;

    fn zero(&self) -> RatMatrix {
        RatMatrix::zero(self.dim)
    }

    fn add(&self, x: &RatMatrix, y: &RatMatrix) -> RatMatrix {
        x.add(y)
    }

    fn scale(&self, r: &BigRational, x: &RatMatrix) -> RatMatrix {
        x.scale(r)
    }

    fn phi_s(&self, d: &RatMatrix, s: &RatMatrix) -> RatMatrix {
        self.x.mul(d).mul(&self.y).mul(s)
    }

    fn phi_d(&self, s: &RatMatrix, d: &RatMatrix) -> RatMatrix {
        d.mul(&self.z).mul(s).mul(&self.w)
    }

    fn s0(&self) -> RatMatrix {
        self.s0.clone()
    }

    fn d0(&self) -> RatMatrix {
        self.d0.clone()
    }
}

/// The negative control: same matrices, but `phi_s` gains a term quadratic
/// in its first argument, killing bilinearity while staying deterministic.
#[derive(Debug, Clone)]
pub struct NonBilinearControl {
    inner: MatrixAlgebra,
}

pub fn non_bilinear_control(dim: usize, seed: u64) -> NonBilinearControl {
    NonBilinearControl {
        inner: matrix_algebra_instance(dim, seed),
    }
}

impl CoefficientAlgebra for NonBilinearControl {
    type Element = RatMatrix;

    fn zero(&self) -> RatMatrix {
        self.inner.zero()
    }

    fn add(&self, x: &RatMatrix, y: &RatMatrix) -> RatMatrix {
        self.inner.add(x, y)
    }

    fn scale(&self, r: &BigRational, x: &RatMatrix) -> RatMatrix {
        self.inner.scale(r, x)
    }

    fn phi_s(&self, d: &RatMatrix, s: &RatMatrix) -> RatMatrix {
        let mut out = self.inner.phi_s(d, s);
        let corner = d.get(0, 0);
        out.set(0, 0, out.get(0, 0) + corner * corner);
        out
    }

    fn phi_d(&self, s: &RatMatrix, d: &RatMatrix) -> RatMatrix {
        self.inner.phi_d(s, d)
    }

    fn s0(&self) -> RatMatrix {
        self.inner.s0()
    }

    fn d0(&self) -> RatMatrix {
        self.inner.d0()
    }
}
