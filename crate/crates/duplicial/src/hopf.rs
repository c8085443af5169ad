//! Hopf-algebra combinatorics on trees: the pruning coproducts built from
//! the two factorizations, the antipode of the abelianized algebra,
//! convolution of tree functionals, and the charge coproduct with its
//! coaction.
//!
//! Both coproducts come in two independent implementations, a factorization
//! form and a Sweedler-style recursion, kept side by side so they can be
//! checked against each other.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::ring::Coeff;
use crate::series::{Flavor, SeriesError, TreeSeries};
use crate::tree::Tree;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HopfError {
    #[error("tree of order {found} is beyond the functional's working order {order}")]
    OrderExceeded { found: usize, order: usize },
}

/// A formal sum of tensors `coeff * left (x) right` with merged legs and no
/// zero terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSum<L: Ord, R: Ord> {
    terms: BTreeMap<(L, R), Coeff>,
}

pub type TreeTensor = TensorSum<Tree, Tree>;
pub type ChargeTensor = TensorSum<HaMonomial, HaMonomial>;

impl<L: Ord + Clone, R: Ord + Clone> TensorSum<L, R> {
    pub fn zero() -> Self {
        TensorSum { terms: BTreeMap::new() }
    }

    pub fn term(coeff: Coeff, left: L, right: R) -> Self {
        let mut sum = TensorSum::zero();
        sum.accumulate(coeff, left, right);
        sum
    }

    pub fn accumulate(&mut self, coeff: Coeff, left: L, right: R) {
        if coeff.is_zero() {
            return;
        }
        let key = (left, right);
        let merged = match self.terms.remove(&key) {
            Some(existing) => existing.add(&coeff),
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut sum = self.clone();
        for ((l, r), c) in &other.terms {
            sum.accumulate(c.clone(), l.clone(), r.clone());
        }
        sum
    }

    pub fn scale(&self, coeff: &Coeff) -> Self {
        let mut sum = TensorSum::zero();
        for ((l, r), c) in &self.terms {
            sum.accumulate(c.mul(coeff), l.clone(), r.clone());
        }
        sum
    }

    pub fn terms(&self) -> impl Iterator<Item = (&L, &R, &Coeff)> {
        self.terms.iter().map(|((l, r), c)| (l, r, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn map_legs<L2: Ord + Clone, R2: Ord + Clone>(
        &self,
        f: impl Fn(&L, &R) -> (L2, R2),
    ) -> TensorSum<L2, R2> {
        let mut sum = TensorSum::zero();
        for ((l, r), c) in &self.terms {
            let (l2, r2) = f(l, r);
            sum.accumulate(c.clone(), l2, r2);
        }
        sum
    }
}

impl<L, R> TensorSum<L, R>
where
    L: Ord + Clone + fmt::Display,
    R: Ord + Clone + fmt::Display,
{
    /// One `coeff * left ⊗ right` line per term.
    pub fn render_lines(&self) -> Vec<String> {
        self.terms
            .iter()
            .map(|((l, r), c)| format!("{} * {} ⊗ {}", c, l, r))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|((l, r), c)| {
                    json!({
                        "coeff": c.to_json(),
                        "left": l.to_string(),
                        "right": r.to_string(),
                    })
                })
                .collect(),
        )
    }
}

impl<L, R> fmt::Display for TensorSum<L, R>
where
    L: Ord + Clone + fmt::Display,
    R: Ord + Clone + fmt::Display,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", self.render_lines().join(" + "))
    }
}

/// A commutative monomial over tree generators; the leaf is the unit and is
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreeMonomial {
    factors: Vec<Tree>,
}

impl TreeMonomial {
    pub fn unit() -> TreeMonomial {
        TreeMonomial { factors: Vec::new() }
    }

    pub fn generator(t: &Tree) -> TreeMonomial {
        if t.is_leaf() {
            return TreeMonomial::unit();
        }
        TreeMonomial { factors: vec![t.clone()] }
    }

    pub fn mul(&self, other: &TreeMonomial) -> TreeMonomial {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        factors.sort_unstable();
        TreeMonomial { factors }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[Tree] {
        &self.factors
    }
}

impl fmt::Display for TreeMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let rendered: Vec<String> = self.factors.iter().map(Tree::to_string).collect();
        write!(f, "{}", rendered.join("*"))
    }
}

/// An element of the abelianized tree algebra: a rational combination of
/// [`TreeMonomial`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePolynomial {
    terms: BTreeMap<TreeMonomial, Coeff>,
}

impl TreePolynomial {
    pub fn zero() -> TreePolynomial {
        TreePolynomial { terms: BTreeMap::new() }
    }

    pub fn one() -> TreePolynomial {
        TreePolynomial::from_monomial(TreeMonomial::unit())
    }

    pub fn from_monomial(m: TreeMonomial) -> TreePolynomial {
        let mut poly = TreePolynomial::zero();
        poly.accumulate(Coeff::one(), m);
        poly
    }

    pub fn from_tree(t: &Tree) -> TreePolynomial {
        TreePolynomial::from_monomial(TreeMonomial::generator(t))
    }

    fn accumulate(&mut self, coeff: Coeff, m: TreeMonomial) {
        if coeff.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&m) {
            Some(existing) => existing.add(&coeff),
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(m, merged);
        }
    }

    pub fn add(&self, other: &TreePolynomial) -> TreePolynomial {
        let mut sum = self.clone();
        for (m, c) in &other.terms {
            sum.accumulate(c.clone(), m.clone());
        }
        sum
    }

    pub fn sub(&self, other: &TreePolynomial) -> TreePolynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TreePolynomial {
        let mut out = TreePolynomial::zero();
        for (m, c) in &self.terms {
            out.accumulate(c.neg(), m.clone());
        }
        out
    }

    pub fn mul(&self, other: &TreePolynomial) -> TreePolynomial {
        let mut out = TreePolynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.accumulate(c1.mul(c2), m1.mul(m2));
            }
        }
        out
    }

    pub fn scale(&self, coeff: &Coeff) -> TreePolynomial {
        let mut out = TreePolynomial::zero();
        for (m, c) in &self.terms {
            out.accumulate(c.mul(coeff), m.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &TreeMonomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TreeMonomial, &Coeff)> {
        self.terms.iter()
    }
}

impl fmt::Display for TreePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({})*{}", c, m))
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// A monomial in the charge generators `V(t)`, one generator per tree; the
/// empty multiset is the unit. `V(.)` is a genuine generator, distinct from
/// the unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HaMonomial {
    indices: Vec<Tree>,
}

impl HaMonomial {
    pub fn unit() -> HaMonomial {
        HaMonomial { indices: Vec::new() }
    }

    pub fn generator(t: Tree) -> HaMonomial {
        HaMonomial { indices: vec![t] }
    }

    pub fn from_indices(mut indices: Vec<Tree>) -> HaMonomial {
        indices.sort_unstable();
        HaMonomial { indices }
    }

    pub fn mul(&self, other: &HaMonomial) -> HaMonomial {
        let mut indices = self.indices.clone();
        indices.extend(other.indices.iter().cloned());
        HaMonomial::from_indices(indices)
    }

    pub fn is_unit(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Tree] {
        &self.indices
    }
}

impl fmt::Display for HaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.indices.is_empty() {
            return write!(f, "1");
        }
        let rendered: Vec<String> = self.indices.iter().map(|t| format!("V({})", t)).collect();
        write!(f, "{}", rendered.join("*"))
    }
}

/// A rational combination of charge monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaElement {
    terms: BTreeMap<HaMonomial, Coeff>,
}

impl HaElement {
    pub fn zero() -> HaElement {
        HaElement { terms: BTreeMap::new() }
    }

    pub fn from_monomial(m: HaMonomial) -> HaElement {
        let mut el = HaElement::zero();
        el.accumulate(Coeff::one(), m);
        el
    }

    pub fn accumulate(&mut self, coeff: Coeff, m: HaMonomial) {
        if coeff.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&m) {
            Some(existing) => existing.add(&coeff),
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(m, merged);
        }
    }

    pub fn add(&self, other: &HaElement) -> HaElement {
        let mut sum = self.clone();
        for (m, c) in &other.terms {
            sum.accumulate(c.clone(), m.clone());
        }
        sum
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &HaMonomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&HaMonomial, &Coeff)> {
        self.terms.iter()
    }
}

impl fmt::Display for HaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({})*{}", c, m))
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// A linear functional on trees with value 1 on the leaf, extended
/// multiplicatively to monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeFunctional {
    order: usize,
    values: BTreeMap<Tree, Coeff>,
}

impl TreeFunctional {
    /// Builds a functional from explicit values; the leaf value is forced to
    /// 1 and entries beyond the working order are dropped.
    pub fn new(order: usize, values: BTreeMap<Tree, Coeff>) -> TreeFunctional {
        let mut values: BTreeMap<Tree, Coeff> = values
            .into_iter()
            .filter(|(t, c)| t.order() <= order && !c.is_zero())
            .collect();
        values.insert(Tree::Leaf, Coeff::one());
        TreeFunctional { order, values }
    }

    /// The counit: 1 on the leaf, 0 on every other tree.
    pub fn epsilon(order: usize) -> TreeFunctional {
        TreeFunctional::new(order, BTreeMap::new())
    }

    /// Reads the coefficients of a series as a functional.
    pub fn from_series(series: &TreeSeries) -> TreeFunctional {
        let values = series.terms().map(|(t, c)| (t.clone(), c.clone())).collect();
        TreeFunctional::new(series.order(), values)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eval(&self, t: &Tree) -> Result<Coeff, HopfError> {
        if t.order() > self.order {
            return Err(HopfError::OrderExceeded {
                found: t.order(),
                order: self.order,
            });
        }
        Ok(self.values.get(t).cloned().unwrap_or_else(Coeff::zero))
    }

    pub fn eval_monomial(&self, m: &TreeMonomial) -> Result<Coeff, HopfError> {
        let mut out = Coeff::one();
        for t in m.factors() {
            out = out.mul(&self.eval(t)?);
        }
        Ok(out)
    }

    pub fn eval_polynomial(&self, p: &TreePolynomial) -> Result<Coeff, HopfError> {
        let mut out = Coeff::zero();
        for (m, c) in p.terms() {
            out = out.add(&c.mul(&self.eval_monomial(m)?));
        }
        Ok(out)
    }
}

/// The pruning coproduct, factorization form: the sum of `u ⊗ v` over all
/// under-factorizations `t = u under v`.
pub fn delta_e(t: &Tree) -> TreeTensor {
    let mut sum = TreeTensor::zero();
    for (u, v) in t.under_factorizations() {
        sum.accumulate(Coeff::one(), u, v);
    }
    sum
}

/// The same coproduct from its Sweedler recursion, written without reference
/// to the factorization routine.
pub fn delta_e_recursive(t: &Tree) -> TreeTensor {
    match t.children() {
        None => TreeTensor::term(Coeff::one(), Tree::Leaf, Tree::Leaf),
        Some((l, r)) => {
            let mut sum = TreeTensor::term(Coeff::one(), Tree::Leaf, t.clone());
            for (first, second, c) in delta_e_recursive(r).terms() {
                sum.accumulate(c.clone(), l.graft(first), second.clone());
            }
            sum
        }
    }
}

/// The mirror pruning coproduct over over-factorizations `t = u over v`.
pub fn delta_p(t: &Tree) -> TreeTensor {
    let mut sum = TreeTensor::zero();
    for (u, v) in t.over_factorizations() {
        sum.accumulate(Coeff::one(), u, v);
    }
    sum
}

pub fn delta_p_recursive(t: &Tree) -> TreeTensor {
    match t.children() {
        None => TreeTensor::term(Coeff::one(), Tree::Leaf, Tree::Leaf),
        Some((l, r)) => {
            let mut sum = TreeTensor::term(Coeff::one(), t.clone(), Tree::Leaf);
            for (first, second, c) in delta_p_recursive(l).terms() {
                sum.accumulate(c.clone(), first.clone(), second.graft(r));
            }
            sum
        }
    }
}

/// The antipode of the abelianized algebra, by the triangular recursion
/// `S(t) = -t - sum of S(u)*v over proper under-factorizations`.
pub fn antipode_e(t: &Tree) -> TreePolynomial {
    if t.is_leaf() {
        return TreePolynomial::one();
    }
    let mut result = TreePolynomial::from_tree(t).neg();
    for (u, v) in t.under_factorizations() {
        if u.is_leaf() || v.is_leaf() {
            continue;
        }
        result = result.sub(&antipode_e(&u).mul(&TreePolynomial::from_tree(&v)));
    }
    result
}

fn convolve(
    f: &TreeFunctional,
    g: &TreeFunctional,
    factorize: impl Fn(&Tree) -> Vec<(Tree, Tree)>,
) -> TreeFunctional {
    let order = f.order.min(g.order);
    let mut values = BTreeMap::new();
    let levels = Tree::enumerate_levels(order).expect("order within enumeration cap");
    for t in levels.iter().flatten() {
        let mut total = Coeff::zero();
        for (u, v) in factorize(t) {
            let left = f.eval(&u).expect("factor order is bounded by the total");
            let right = g.eval(&v).expect("factor order is bounded by the total");
            total = total.add(&left.mul(&right));
        }
        if !total.is_zero() {
            values.insert(t.clone(), total);
        }
    }
    TreeFunctional::new(order, values)
}

/// Convolution dual to [`delta_e`]:
/// `(f * g)(t) = sum of f(u) g(v) over t = u under v`.
pub fn convolve_under(f: &TreeFunctional, g: &TreeFunctional) -> TreeFunctional {
    convolve(f, g, Tree::under_factorizations)
}

/// Convolution dual to [`delta_p`].
pub fn convolve_over(f: &TreeFunctional, g: &TreeFunctional) -> TreeFunctional {
    convolve(f, g, Tree::over_factorizations)
}

/// Inverts an invertible series for the under product by evaluating its
/// coefficient functional on the antipode; agrees with
/// [`TreeSeries::inverse_under`].
pub fn inverse_via_antipode(series: &TreeSeries) -> Result<TreeSeries, SeriesError> {
    if series.flavor() != Flavor::Invertible {
        return Err(SeriesError::WrongFlavor {
            expected: Flavor::Invertible,
            found: series.flavor(),
        });
    }
    let functional = TreeFunctional::from_series(series);
    let levels = Tree::enumerate_levels(series.order()).expect("order within enumeration cap");
    let mut terms = BTreeMap::new();
    for t in levels.iter().flatten() {
        let value = functional
            .eval_polynomial(&antipode_e(t))
            .expect("antipode factors stay within the working order");
        if !value.is_zero() {
            terms.insert(t.clone(), value);
        }
    }
    TreeSeries::from_terms(series.order(), terms)
}

/// The charge monomial of a tree: one generator `V(s)` per left-spine
/// factor.
pub fn ha_monomial(t: &Tree) -> HaMonomial {
    HaMonomial::from_indices(t.left_spine_factors())
}

/// Tensors with honest trees in the first leg, used while the coaction
/// recursion runs; `V` is applied only at the end.
type TreeLegged = TensorSum<Tree, HaMonomial>;

/// Componentwise over product: `(u1 ⊗ m1) over (u2 ⊗ m2) =
/// (u1 over u2) ⊗ m1*m2`.
fn tensor_over(a: &TreeLegged, b: &TreeLegged) -> TreeLegged {
    let mut out = TreeLegged::zero();
    for (u1, m1, c1) in a.terms() {
        for (u2, m2, c2) in b.terms() {
            out.accumulate(c1.mul(c2), u1.over(u2), m1.mul(m2));
        }
    }
    out
}

/// The coaction with its first legs as trees, before `V` collapses them to
/// generators: the base case sends the leaf to `V(.) ⊗ 1`, and a node to the
/// wrapped bracket `delta_a(left) over coaction(right)`.
fn coaction_tree(t: &Tree) -> TreeLegged {
    match t.children() {
        None => TreeLegged::term(Coeff::one(), Tree::vertex(), HaMonomial::unit()),
        Some((l, r)) => {
            let bracket = tensor_over(&delta_a_tree(l), &coaction_tree(r));
            bracket.map_legs(|u, m| (u.v_wrap(), m.clone()))
        }
    }
}

/// The charge coproduct of a tree, first legs as trees: the over product of
/// `1 ⊗ V(s) + coaction(s)` across the left-spine factors `s`.
fn delta_a_tree(t: &Tree) -> TreeLegged {
    let mut acc = TreeLegged::term(Coeff::one(), Tree::Leaf, HaMonomial::unit());
    for s in t.left_spine_factors() {
        let factor = TreeLegged::term(Coeff::one(), Tree::Leaf, HaMonomial::generator(s.clone()))
            .add(&coaction_tree(&s));
        acc = tensor_over(&acc, &factor);
    }
    acc
}

/// The coaction on the generator `V(t)`; every first leg is a single
/// generator.
pub fn coaction_a(t: &Tree) -> ChargeTensor {
    coaction_tree(t).map_legs(|u, m| (ha_monomial(u), m.clone()))
}

/// The charge coproduct on the generator `V(t)`:
/// `1 ⊗ V(t) + coaction_a(t)`.
pub fn delta_a(t: &Tree) -> ChargeTensor {
    ChargeTensor::term(Coeff::one(), HaMonomial::unit(), HaMonomial::generator(t.clone()))
        .add(&coaction_a(t))
}

/// Multiplicative extension of [`delta_a`] to charge monomials.
pub fn delta_a_monomial(m: &HaMonomial) -> ChargeTensor {
    let mut acc = ChargeTensor::term(Coeff::one(), HaMonomial::unit(), HaMonomial::unit());
    for t in m.indices() {
        let factor = delta_a(t);
        let mut next = ChargeTensor::zero();
        for (l1, r1, c1) in acc.terms() {
            for (l2, r2, c2) in factor.terms() {
                next.accumulate(c1.mul(c2), l1.mul(l2), r1.mul(r2));
            }
        }
        acc = next;
    }
    acc
}

/// The counit of the charge algebra: 1 on the unit monomial, 0 elsewhere.
pub fn ha_counit(m: &HaMonomial) -> Coeff {
    if m.is_unit() {
        Coeff::one()
    } else {
        Coeff::zero()
    }
}
