//! Truncated tree-indexed series over the exact coefficient ring, with the
//! three group structures: the over and under products on invertible series,
//! and substitution (operadic composition) on diffeomorphism-like series.
//!
//! A series holds a truncation order `N` and a sparse map from trees of order
//! at most `N` to coefficients. Three flavors tag the normalization:
//!
//! * `invertible` — indexed by all trees, leaf coefficient 1;
//! * `diffeo` — indexed by trees of order >= 1, vertex-tree coefficient 1;
//! * `general` — no constraint (the ambient algebra).
//!
//! Operations never re-truncate silently: mixing truncation orders is an
//! error, and [`TreeSeries::retruncate`] is the explicit escape hatch.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::operad::mu_unchecked;
use crate::ring::{Coeff, CoeffError};
use crate::tree::{Tree, TreeParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Invertible,
    Diffeo,
    General,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Invertible => "invertible",
            Flavor::Diffeo => "diffeo",
            Flavor::General => "general",
        }
    }

    pub fn from_str_tag(tag: &str) -> Option<Flavor> {
        match tag {
            "invertible" => Some(Flavor::Invertible),
            "diffeo" => Some(Flavor::Diffeo),
            "general" => Some(Flavor::General),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("truncation orders differ: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("operation requires the {expected:?} flavor, found {found:?}")]
    WrongFlavor { expected: Flavor, found: Flavor },
    #[error("not a valid {flavor:?} series: {reason}")]
    InvalidSeries { flavor: Flavor, reason: String },
    #[error("composition outer series has a term at the leaf tree")]
    OuterLeafTerm,
    #[error("truncation order must be at least {min}")]
    TruncationTooSmall { min: usize },
    #[error("inner power series must have zero constant term")]
    InnerConstantTerm,
}

#[derive(Debug, Error)]
pub enum SeriesJsonError {
    #[error("invalid series document: {0}")]
    Shape(String),
    #[error("term {index}: bad tree literal: {source}")]
    Tree { index: usize, source: TreeParseError },
    #[error("term {index}: bad coefficient: {source}")]
    Coeff { index: usize, source: CoeffError },
    #[error("unknown flavor {0:?}")]
    Flavor(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Outcome of a subgroup-membership solve; the failing case names the first
/// offending tree in graded canonical order.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Member(TreeSeries),
    NotAMember { tree: Tree },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }

    pub fn member(self) -> Option<TreeSeries> {
        match self {
            Membership::Member(s) => Some(s),
            Membership::NotAMember { .. } => None,
        }
    }
}

/// A tree-indexed series truncated at a fixed order.
#[derive(Clone, PartialEq, Eq)]
pub struct TreeSeries {
    order: usize,
    flavor: Flavor,
    terms: BTreeMap<Tree, Coeff>,
}

fn add_term(map: &mut BTreeMap<Tree, Coeff>, tree: Tree, c: Coeff) {
    if c.is_zero() {
        return;
    }
    match map.entry(tree) {
        Entry::Occupied(mut e) => {
            let sum = e.get().add(&c);
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
        Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}

fn classify(terms: &BTreeMap<Tree, Coeff>) -> Flavor {
    match terms.get(&Tree::Leaf) {
        Some(c) if c.is_one() => Flavor::Invertible,
        Some(_) => Flavor::General,
        None => match terms.get(&Tree::vertex()) {
            Some(c) if c.is_one() => Flavor::Diffeo,
            _ => Flavor::General,
        },
    }
}

impl TreeSeries {
    /// The zero series (general flavor).
    pub fn zero(order: usize) -> TreeSeries {
        TreeSeries {
            order,
            flavor: Flavor::General,
            terms: BTreeMap::new(),
        }
    }

    /// The unit of the over and under products: coefficient 1 at the leaf.
    pub fn unit(order: usize) -> TreeSeries {
        let mut terms = BTreeMap::new();
        terms.insert(Tree::Leaf, Coeff::one());
        TreeSeries {
            order,
            flavor: Flavor::Invertible,
            terms,
        }
    }

    /// The unit of composition: coefficient 1 at the vertex tree.
    pub fn identity(order: usize) -> Result<TreeSeries, SeriesError> {
        if order < 1 {
            return Err(SeriesError::TruncationTooSmall { min: 1 });
        }
        let mut terms = BTreeMap::new();
        terms.insert(Tree::vertex(), Coeff::one());
        Ok(TreeSeries {
            order,
            flavor: Flavor::Diffeo,
            terms,
        })
    }

    /// A single-term series; flavor is inferred from the term.
    pub fn monomial(order: usize, tree: Tree, coeff: Coeff) -> Result<TreeSeries, SeriesError> {
        let mut terms = BTreeMap::new();
        add_term(&mut terms, tree, coeff);
        TreeSeries::from_terms(order, terms)
    }

    /// Builds a series from a coefficient map, inferring the flavor.
    pub fn from_terms(order: usize, terms: BTreeMap<Tree, Coeff>) -> Result<TreeSeries, SeriesError> {
        let terms: BTreeMap<Tree, Coeff> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        for tree in terms.keys() {
            if tree.order() > order {
                return Err(SeriesError::InvalidSeries {
                    flavor: Flavor::General,
                    reason: format!("tree {} has order {}, beyond truncation {}", tree, tree.order(), order),
                });
            }
        }
        let flavor = classify(&terms);
        Ok(TreeSeries { order, flavor, terms })
    }

    /// Builds a series with a caller-declared flavor, validating its
    /// normalization constraints.
    pub fn from_terms_with_flavor(
        order: usize,
        flavor: Flavor,
        terms: BTreeMap<Tree, Coeff>,
    ) -> Result<TreeSeries, SeriesError> {
        let s = TreeSeries::from_terms(order, terms)?;
        let bad = |reason: String| SeriesError::InvalidSeries { flavor, reason };
        match flavor {
            Flavor::Invertible => {
                if !s.coeff(&Tree::Leaf).is_one() {
                    return Err(bad(format!("leaf coefficient is {}, expected 1", s.coeff(&Tree::Leaf))));
                }
            }
            Flavor::Diffeo => {
                if order < 1 {
                    return Err(SeriesError::TruncationTooSmall { min: 1 });
                }
                if s.terms.contains_key(&Tree::Leaf) {
                    return Err(bad("leaf term is forbidden".into()));
                }
                if !s.coeff(&Tree::vertex()).is_one() {
                    return Err(bad(format!(
                        "vertex-tree coefficient is {}, expected 1",
                        s.coeff(&Tree::vertex())
                    )));
                }
            }
            Flavor::General => {}
        }
        Ok(TreeSeries { flavor, ..s })
    }

    fn assemble(order: usize, terms: BTreeMap<Tree, Coeff>) -> TreeSeries {
        debug_assert!(terms.keys().all(|t| t.order() <= order));
        let flavor = classify(&terms);
        TreeSeries { order, flavor, terms }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Coefficient of `tree` (zero if absent).
    pub fn coeff(&self, tree: &Tree) -> Coeff {
        self.terms.get(tree).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Tree, &Coeff)> {
        self.terms.iter()
    }

    /// Terms sorted by order, then by literal: the canonical output order.
    pub fn graded_terms(&self) -> Vec<(&Tree, &Coeff)> {
        let mut out: Vec<(&Tree, &Coeff)> = self.terms.iter().collect();
        out.sort_by(|(a, _), (b, _)| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
        out
    }

    /// First tree (graded canonical order) whose coefficients differ, with
    /// the two values; `None` when the series agree termwise.
    pub fn first_difference(&self, other: &TreeSeries) -> Option<(Tree, Coeff, Coeff)> {
        let mut keys: Vec<&Tree> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
        keys.dedup();
        for tree in keys {
            let a = self.coeff(tree);
            let b = other.coeff(tree);
            if a != b {
                return Some((tree.clone(), a, b));
            }
        }
        None
    }

    /// Termwise equality, ignoring the flavor tag.
    pub fn eq_terms(&self, other: &TreeSeries) -> bool {
        self.order == other.order && self.terms == other.terms
    }

    /// Changes the truncation order, dropping terms when lowering it.
    pub fn retruncate(&self, order: usize) -> Result<TreeSeries, SeriesError> {
        if self.flavor == Flavor::Diffeo && order < 1 {
            return Err(SeriesError::TruncationTooSmall { min: 1 });
        }
        let terms = self
            .terms
            .iter()
            .filter(|(t, _)| t.order() <= order)
            .map(|(t, c)| (t.clone(), c.clone()))
            .collect();
        Ok(TreeSeries {
            order,
            flavor: self.flavor,
            terms,
        })
    }

    fn check_trunc(&self, other: &TreeSeries) -> Result<(), SeriesError> {
        if self.order != other.order {
            return Err(SeriesError::TruncationMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn add(&self, other: &TreeSeries) -> Result<TreeSeries, SeriesError> {
        self.check_trunc(other)?;
        let mut terms = self.terms.clone();
        for (t, c) in &other.terms {
            add_term(&mut terms, t.clone(), c.clone());
        }
        Ok(TreeSeries::assemble(self.order, terms))
    }

    pub fn sub(&self, other: &TreeSeries) -> Result<TreeSeries, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TreeSeries {
        self.scale(&Coeff::from_int(-1))
    }

    pub fn scale(&self, c: &Coeff) -> TreeSeries {
        let mut terms = BTreeMap::new();
        for (t, v) in &self.terms {
            add_term(&mut terms, t.clone(), v.mul(c));
        }
        TreeSeries::assemble(self.order, terms)
    }

    /// Substitutes a rational value for the marker `w` in every coefficient.
    pub fn specialize_w(&self, w: &BigRational) -> TreeSeries {
        let mut terms = BTreeMap::new();
        for (t, v) in &self.terms {
            add_term(&mut terms, t.clone(), v.eval_at(w));
        }
        TreeSeries::assemble(self.order, terms)
    }

    fn by_order(&self) -> Vec<Vec<(&Tree, &Coeff)>> {
        let mut buckets: Vec<Vec<(&Tree, &Coeff)>> = vec![Vec::new(); self.order + 1];
        for (t, c) in &self.terms {
            buckets[t.order()].push((t, c));
        }
        buckets
    }

    fn bilinear(
        &self,
        other: &TreeSeries,
        combine: impl Fn(&Tree, &Tree) -> Tree,
    ) -> Result<TreeSeries, SeriesError> {
        self.check_trunc(other)?;
        let n = self.order;
        let left = self.by_order();
        let right = other.by_order();
        let mut terms = BTreeMap::new();
        for (p, bucket) in left.iter().enumerate() {
            for other_bucket in right.iter().take(n - p + 1) {
                for (u, cu) in bucket {
                    for (v, cv) in other_bucket {
                        add_term(&mut terms, combine(u, v), cu.mul(cv));
                    }
                }
            }
        }
        Ok(TreeSeries::assemble(n, terms))
    }

    /// The over product: `(A over B)_t = sum of A_u B_v over u over v = t`.
    pub fn over(&self, other: &TreeSeries) -> Result<TreeSeries, SeriesError> {
        self.bilinear(other, Tree::over)
    }

    /// The under product, mirror of [`TreeSeries::over`].
    pub fn under(&self, other: &TreeSeries) -> Result<TreeSeries, SeriesError> {
        self.bilinear(other, Tree::under)
    }

    fn geometric_inverse(
        &self,
        product: impl Fn(&TreeSeries, &TreeSeries) -> Result<TreeSeries, SeriesError>,
    ) -> Result<TreeSeries, SeriesError> {
        if self.flavor != Flavor::Invertible {
            return Err(SeriesError::WrongFlavor {
                expected: Flavor::Invertible,
                found: self.flavor,
            });
        }
        let unit = TreeSeries::unit(self.order);
        let gap = unit.sub(self)?;
        let mut result = unit.clone();
        let mut power = unit;
        for _ in 1..=self.order {
            power = product(&power, &gap)?;
            result = result.add(&power)?;
        }
        Ok(result)
    }

    /// Inverse for the over product, as the geometric series in `unit - self`.
    pub fn inverse_over(&self) -> Result<TreeSeries, SeriesError> {
        self.geometric_inverse(TreeSeries::over)
    }

    /// Inverse for the under product.
    pub fn inverse_under(&self) -> Result<TreeSeries, SeriesError> {
        self.geometric_inverse(TreeSeries::under)
    }

    /// Substitution of `inner` into `self`:
    /// `(self o inner)_u = sum over t, (s_i) with mu(t,(s_i)) = u of
    /// self_t * prod inner_{s_i}`.
    ///
    /// `inner` must be diffeo flavor; `self` may be diffeo or any series
    /// supported on trees of order >= 1.
    pub fn compose(&self, inner: &TreeSeries) -> Result<TreeSeries, SeriesError> {
        self.check_trunc(inner)?;
        if inner.flavor != Flavor::Diffeo {
            return Err(SeriesError::WrongFlavor {
                expected: Flavor::Diffeo,
                found: inner.flavor,
            });
        }
        if self.terms.contains_key(&Tree::Leaf) {
            return Err(SeriesError::OuterLeafTerm);
        }
        let n = self.order;
        let buckets = inner.by_order();
        let mut acc = BTreeMap::new();
        let mut args: Vec<Tree> = Vec::new();
        for (t, coeff) in &self.terms {
            compose_tuples(t, t.order(), n, &buckets, coeff, &mut args, &mut acc);
        }
        Ok(TreeSeries::assemble(n, acc))
    }

    /// Compositional inverse, solved order by order through the fixed point
    /// `B = identity - (self - identity) o B`.
    pub fn compose_inverse(&self) -> Result<TreeSeries, SeriesError> {
        if self.flavor != Flavor::Diffeo {
            return Err(SeriesError::WrongFlavor {
                expected: Flavor::Diffeo,
                found: self.flavor,
            });
        }
        let identity = TreeSeries::identity(self.order)?;
        let higher = self.sub(&identity)?;
        let mut inv = identity.clone();
        for _ in 1..self.order {
            inv = identity.sub(&higher.compose(&inv)?)?;
        }
        Ok(inv)
    }

    /// Multiplies the order-n part by (-1)^(n-1).
    pub fn suspension(&self) -> TreeSeries {
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            let signed = if t.order() % 2 == 0 { c.neg() } else { c.clone() };
            terms.insert(t.clone(), signed);
        }
        TreeSeries::assemble(self.order, terms)
    }

    /// Sums coefficients per order, landing in one-variable power series.
    pub fn project(&self) -> PowerSeries {
        let mut coeffs = vec![Coeff::zero(); self.order + 1];
        for (t, c) in &self.terms {
            coeffs[t.order()] = coeffs[t.order()].add(c);
        }
        PowerSeries { coeffs }
    }

    /// Embeds an invertible series into the composition group by
    /// `t -> graft(t, leaf)`; raises the truncation order by one.
    pub fn rho_embed(&self) -> Result<TreeSeries, SeriesError> {
        self.spine_embed(|t| t.graft(&Tree::Leaf))
    }

    /// Embeds by `t -> graft(leaf, t)`; raises the truncation order by one.
    pub fn lambda_embed(&self) -> Result<TreeSeries, SeriesError> {
        self.spine_embed(|t| Tree::Leaf.graft(t))
    }

    fn spine_embed(&self, wrap: impl Fn(&Tree) -> Tree) -> Result<TreeSeries, SeriesError> {
        if self.flavor != Flavor::Invertible {
            return Err(SeriesError::WrongFlavor {
                expected: Flavor::Invertible,
                found: self.flavor,
            });
        }
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            terms.insert(wrap(t), c.clone());
        }
        Ok(TreeSeries::assemble(self.order + 1, terms))
    }

    /// Inverts [`TreeSeries::rho_embed`]: succeeds when every support tree
    /// has a leaf right child.
    pub fn rho_solve(&self) -> Result<Membership, SeriesError> {
        self.spine_solve(|t| {
            let (l, r) = t.children().expect("diffeo support has no leaf");
            r.is_leaf().then(|| l.clone())
        })
    }

    /// Inverts [`TreeSeries::lambda_embed`].
    pub fn lambda_solve(&self) -> Result<Membership, SeriesError> {
        self.spine_solve(|t| {
            let (l, r) = t.children().expect("diffeo support has no leaf");
            l.is_leaf().then(|| r.clone())
        })
    }

    fn spine_solve(&self, unwrap: impl Fn(&Tree) -> Option<Tree>) -> Result<Membership, SeriesError> {
        if self.flavor != Flavor::Diffeo {
            return Err(SeriesError::WrongFlavor {
                expected: Flavor::Diffeo,
                found: self.flavor,
            });
        }
        let mut terms = BTreeMap::new();
        for (t, c) in self.graded_terms() {
            match unwrap(t) {
                Some(u) => {
                    terms.insert(u, c.clone());
                }
                None => return Ok(Membership::NotAMember { tree: t.clone() }),
            }
        }
        Ok(Membership::Member(TreeSeries::assemble(self.order - 1, terms)))
    }

    /// Builds the series `(unit - V(self))^(-over) over vertex`, where
    /// `V(t) = graft(leaf, t)`. The result is a diffeo series of truncation
    /// `order + 2`, the largest order its coefficients determine.
    pub fn alpha_build(&self) -> TreeSeries {
        let n = self.order + 2;
        let mut v_terms = BTreeMap::new();
        for (t, c) in &self.terms {
            v_terms.insert(t.v_wrap(), c.clone());
        }
        let v = TreeSeries::assemble(n, v_terms);
        let unit = TreeSeries::unit(n);
        let g = unit
            .sub(&v)
            .and_then(|s| s.inverse_over())
            .expect("unit minus V(A) is invertible by construction");
        let vertex = TreeSeries::monomial(n, Tree::vertex(), Coeff::one()).expect("vertex fits");
        g.over(&vertex).expect("equal truncations by construction")
    }

    /// Solves `alpha_build(A) = self` for `A`, or reports the first tree
    /// obstructing membership (in `self` for shape failures, in the
    /// reconstructed inner series otherwise).
    pub fn alpha_solve(&self) -> Result<Membership, SeriesError> {
        if self.flavor != Flavor::Diffeo {
            return Err(SeriesError::WrongFlavor {
                expected: Flavor::Diffeo,
                found: self.flavor,
            });
        }
        if self.order < 2 {
            return Err(SeriesError::TruncationTooSmall { min: 2 });
        }
        let g = match self.rho_solve()? {
            Membership::Member(g) => g,
            not_member => return Ok(not_member),
        };
        let unit = TreeSeries::unit(g.order());
        let x = g
            .sub(&unit)
            .and_then(|gap| gap.over(&g.inverse_over()?))
            .expect("rho_solve yields an invertible series");
        let mut terms = BTreeMap::new();
        for (t, c) in x.graded_terms() {
            match t.children() {
                Some((l, r)) if l.is_leaf() => {
                    terms.insert(r.clone(), c.clone());
                }
                _ => return Ok(Membership::NotAMember { tree: t.clone() }),
            }
        }
        Ok(Membership::Member(TreeSeries::assemble(self.order - 2, terms)))
    }

    /// A seeded random series with small rational (occasionally degree-one
    /// polynomial) coefficients, normalized per flavor.
    pub fn random(order: usize, flavor: Flavor, rng: &mut impl Rng) -> TreeSeries {
        let levels = Tree::enumerate_levels(order).expect("order within enumeration cap");
        let mut terms = BTreeMap::new();
        for level in &levels {
            for t in level {
                let mut c = Coeff::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                if rng.gen_range(0..4) == 0 {
                    c = c.add(&Coeff::w().scale(&BigRational::new(
                        rng.gen_range(-2..=2).into(),
                        rng.gen_range(1..=2).into(),
                    )));
                }
                add_term(&mut terms, t.clone(), c);
            }
        }
        match flavor {
            Flavor::Invertible => {
                terms.insert(Tree::Leaf, Coeff::one());
            }
            Flavor::Diffeo => {
                terms.remove(&Tree::Leaf);
                terms.insert(Tree::vertex(), Coeff::one());
            }
            Flavor::General => {}
        }
        TreeSeries::from_terms_with_flavor(order, flavor, terms).expect("normalized by construction")
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .graded_terms()
            .into_iter()
            .map(|(t, c)| json!({ "tree": t.to_string(), "coeff": c.to_json() }))
            .collect();
        json!({ "order": self.order, "flavor": self.flavor.as_str(), "terms": terms })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }

    pub fn from_json(value: &Value) -> Result<TreeSeries, SeriesJsonError> {
        let obj = value
            .as_object()
            .ok_or_else(|| SeriesJsonError::Shape("expected a JSON object".into()))?;
        let order = obj
            .get("order")
            .and_then(Value::as_u64)
            .ok_or_else(|| SeriesJsonError::Shape("\"order\" must be a nonnegative integer".into()))?
            as usize;
        let flavor_tag = obj
            .get("flavor")
            .and_then(Value::as_str)
            .ok_or_else(|| SeriesJsonError::Shape("\"flavor\" must be a string".into()))?;
        let flavor = Flavor::from_str_tag(flavor_tag)
            .ok_or_else(|| SeriesJsonError::Flavor(flavor_tag.to_string()))?;
        let raw_terms = obj
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| SeriesJsonError::Shape("\"terms\" must be an array".into()))?;
        let mut terms = BTreeMap::new();
        for (index, term) in raw_terms.iter().enumerate() {
            let term = term
                .as_object()
                .ok_or_else(|| SeriesJsonError::Shape(format!("term {} must be an object", index)))?;
            let literal = term
                .get("tree")
                .and_then(Value::as_str)
                .ok_or_else(|| SeriesJsonError::Shape(format!("term {} needs a \"tree\" string", index)))?;
            let tree = Tree::parse(literal).map_err(|source| SeriesJsonError::Tree { index, source })?;
            let coeff_value = term
                .get("coeff")
                .ok_or_else(|| SeriesJsonError::Shape(format!("term {} needs a \"coeff\"", index)))?;
            let coeff = Coeff::from_json(coeff_value).map_err(|source| SeriesJsonError::Coeff { index, source })?;
            if terms.insert(tree, coeff).is_some() {
                return Err(SeriesJsonError::Shape(format!("duplicate tree {:?} at term {}", literal, index)));
            }
        }
        Ok(TreeSeries::from_terms_with_flavor(order, flavor, terms)?)
    }

    pub fn from_json_str(text: &str) -> Result<TreeSeries, SeriesJsonError> {
        let value: Value = serde_json::from_str(text)?;
        TreeSeries::from_json(&value)
    }
}

fn compose_tuples(
    t: &Tree,
    slots_left: usize,
    budget: usize,
    buckets: &[Vec<(&Tree, &Coeff)>],
    weight: &Coeff,
    args: &mut Vec<Tree>,
    acc: &mut BTreeMap<Tree, Coeff>,
) {
    if slots_left == 0 {
        add_term(acc, mu_unchecked(t, args), weight.clone());
        return;
    }
    let max_order = budget - (slots_left - 1);
    for ord in 1..=max_order.min(buckets.len() - 1) {
        for (s, c) in &buckets[ord] {
            args.push((*s).clone());
            let next = weight.mul(c);
            compose_tuples(t, slots_left - 1, budget - ord, buckets, &next, args, acc);
            args.pop();
        }
    }
}

impl fmt::Display for TreeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear_combination(
            f,
            self.graded_terms()
                .into_iter()
                .map(|(t, c)| (c.clone(), t.to_string())),
        )
    }
}

impl fmt::Debug for TreeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeSeries[N={}, {}]({})", self.order, self.flavor.as_str(), self)
    }
}

/// Writes `c1*x1 + c2*x2 + ...` with the usual cosmetic rules: unit
/// coefficients are dropped, plain negative rationals flip the joining sign,
/// genuine polynomials are parenthesized.
fn write_linear_combination(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (Coeff, String)>,
) -> fmt::Result {
    let mut first = true;
    for (coeff, symbol) in terms {
        if coeff.is_zero() {
            continue;
        }
        let (negative, body) = render_coefficient(&coeff, &symbol);
        if first {
            if negative {
                write!(f, "-")?;
            }
            first = false;
        } else if negative {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        write!(f, "{}", body)?;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

fn render_coefficient(coeff: &Coeff, symbol: &str) -> (bool, String) {
    use num_traits::Signed;
    if symbol.is_empty() {
        return match coeff.as_rational() {
            Some(r) if r.is_negative() => (true, format!("{}", -r)),
            _ => (false, format!("{}", coeff)),
        };
    }
    match coeff.as_rational() {
        Some(r) if r.is_one() => (false, symbol.to_string()),
        Some(r) if (-r.clone()).is_one() => (true, symbol.to_string()),
        Some(r) if r.is_negative() => (true, format!("{}*{}", -r, symbol)),
        Some(r) => (false, format!("{}*{}", r, symbol)),
        None => (false, format!("({})*{}", coeff, symbol)),
    }
}

/// A truncated power series in one variable, the projection target of tree
/// series.
#[derive(Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Coeff>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Coeff>) -> PowerSeries {
        assert!(!coeffs.is_empty(), "a power series needs at least the constant term");
        PowerSeries { coeffs }
    }

    pub fn zero(order: usize) -> PowerSeries {
        PowerSeries {
            coeffs: vec![Coeff::zero(); order + 1],
        }
    }

    /// The series `x` (the composition identity).
    pub fn identity(order: usize) -> PowerSeries {
        let mut s = PowerSeries::zero(order);
        s.coeffs[1] = Coeff::one();
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Coeff {
        self.coeffs.get(n).cloned().unwrap_or_else(Coeff::zero)
    }

    fn check_trunc(&self, other: &PowerSeries) -> Result<(), SeriesError> {
        if self.order() != other.order() {
            return Err(SeriesError::TruncationMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn add(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check_trunc(other)?;
        Ok(PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check_trunc(other)?;
        let n = self.order();
        let mut coeffs = vec![Coeff::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > n {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Ok(PowerSeries { coeffs })
    }

    /// Ordinary composition; `inner` must have zero constant term.
    pub fn compose(&self, inner: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check_trunc(inner)?;
        if !inner.coeff(0).is_zero() {
            return Err(SeriesError::InnerConstantTerm);
        }
        let n = self.order();
        let mut result = PowerSeries::zero(n);
        result.coeffs[0] = self.coeff(0);
        let mut power = PowerSeries::zero(n);
        power.coeffs[0] = Coeff::one();
        for k in 1..=n {
            power = power.mul(inner)?;
            let mut scaled = power.clone();
            for c in &mut scaled.coeffs {
                *c = c.mul(&self.coeffs[k]);
            }
            result = result.add(&scaled)?;
        }
        Ok(result)
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear_combination(
            f,
            self.coeffs.iter().enumerate().map(|(n, c)| {
                let symbol = match n {
                    0 => String::new(),
                    1 => "x".to_string(),
                    _ => format!("x^{}", n),
                };
                (c.clone(), symbol)
            }),
        )
    }
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PowerSeries({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(literal: &str) -> Tree {
        Tree::parse(literal).unwrap()
    }

    fn combs(order: usize, left: bool) -> TreeSeries {
        let mut terms = BTreeMap::new();
        for n in 1..=order {
            let comb = if left { Tree::left_comb(n) } else { Tree::right_comb(n) };
            terms.insert(comb, Coeff::one());
        }
        TreeSeries::from_terms(order, terms).unwrap()
    }

    fn one_plus_vertex(order: usize) -> TreeSeries {
        let mut terms = BTreeMap::new();
        terms.insert(Tree::Leaf, Coeff::one());
        terms.insert(Tree::vertex(), Coeff::one());
        TreeSeries::from_terms(order, terms).unwrap()
    }

    #[test]
    fn classification_and_units() {
        assert_eq!(TreeSeries::zero(3).flavor(), Flavor::General);
        assert_eq!(TreeSeries::unit(3).flavor(), Flavor::Invertible);
        assert_eq!(TreeSeries::identity(3).unwrap().flavor(), Flavor::Diffeo);
        assert!(TreeSeries::identity(0).is_err());
    }

    #[test]
    fn add_and_scale() {
        let a = TreeSeries::monomial(2, t("(..)"), Coeff::one()).unwrap();
        let sum = a.add(&a).unwrap();
        assert_eq!(sum.coeff(&t("(..)")), Coeff::from_int(2));
        assert_eq!(a.scale(&Coeff::zero()), TreeSeries::zero(2));
        assert!(a.add(&TreeSeries::zero(3)).is_err());
    }

    #[test]
    fn prop2_left_side_data_at_order_two() {
        let c = combs(2, true);
        let d = combs(2, false);
        let lhs = c.add(&c.under(&d).unwrap()).unwrap();
        assert_eq!(lhs.coeff(&t("(..)")), Coeff::one());
        assert_eq!(lhs.coeff(&t("((..).)")), Coeff::one());
        assert_eq!(lhs.coeff(&t("(.(..))")), Coeff::one());
        assert_eq!(lhs.support_size(), 3);
    }

    #[test]
    fn over_and_under_products() {
        let b = TreeSeries::random(3, Flavor::Invertible, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(TreeSeries::unit(3).over(&b).unwrap().eq_terms(&b));
        assert!(b.under(&TreeSeries::unit(3)).unwrap().eq_terms(&b));

        let s = one_plus_vertex(2);
        let over = s.over(&s).unwrap();
        assert_eq!(over.coeff(&Tree::Leaf), Coeff::one());
        assert_eq!(over.coeff(&t("(..)")), Coeff::from_int(2));
        assert_eq!(over.coeff(&t("((..).)")), Coeff::one());
        assert_eq!(over.support_size(), 3);
        let under = s.under(&s).unwrap();
        assert_eq!(under.coeff(&t("(.(..))")), Coeff::one());
        assert_eq!(under.support_size(), 3);
    }

    #[test]
    fn geometric_inverses_are_alternating_combs() {
        let s = one_plus_vertex(4);
        let inv_under = s.inverse_under().unwrap();
        for n in 1..=4 {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(inv_under.coeff(&Tree::right_comb(n)), Coeff::from_int(sign));
        }
        assert_eq!(inv_under.support_size(), 5);
        assert!(s.under(&inv_under).unwrap().eq_terms(&TreeSeries::unit(4)));
        assert!(inv_under.under(&s).unwrap().eq_terms(&TreeSeries::unit(4)));

        let inv_over = s.inverse_over().unwrap();
        for n in 1..=4 {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(inv_over.coeff(&Tree::left_comb(n)), Coeff::from_int(sign));
        }
        assert!(s.over(&inv_over).unwrap().eq_terms(&TreeSeries::unit(4)));
    }

    #[test]
    fn compose_units_and_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = TreeSeries::random(4, Flavor::Diffeo, &mut rng);
        let id = TreeSeries::identity(4).unwrap();
        assert!(a.compose(&id).unwrap().eq_terms(&a));
        assert!(id.compose(&a).unwrap().eq_terms(&a));

        let c = combs(2, true);
        let d = combs(2, false);
        let cd = c.compose(&d).unwrap();
        assert_eq!(cd.coeff(&t("(..)")), Coeff::one());
        assert_eq!(cd.coeff(&t("((..).)")), Coeff::one());
        assert_eq!(cd.coeff(&t("(.(..))")), Coeff::one());
    }

    #[test]
    fn compose_rejects_bad_operands() {
        let id = TreeSeries::identity(3).unwrap();
        let unit = TreeSeries::unit(3);
        assert_eq!(
            id.compose(&unit),
            Err(SeriesError::WrongFlavor {
                expected: Flavor::Diffeo,
                found: Flavor::Invertible,
            })
        );
        assert_eq!(unit.compose(&id), Err(SeriesError::OuterLeafTerm));
    }

    #[test]
    fn compose_inverse_examples() {
        let id = TreeSeries::identity(3).unwrap();
        assert_eq!(id.compose_inverse().unwrap(), id);

        let d = combs(2, false);
        let dinv = d.compose_inverse().unwrap();
        assert_eq!(dinv.coeff(&t("(..)")), Coeff::one());
        assert_eq!(dinv.coeff(&t("(.(..))")), Coeff::from_int(-1));
        assert_eq!(dinv.support_size(), 2);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let s = TreeSeries::random(4, Flavor::Diffeo, &mut rng);
            let inv = s.compose_inverse().unwrap();
            let id4 = TreeSeries::identity(4).unwrap();
            assert!(s.compose(&inv).unwrap().eq_terms(&id4));
            assert!(inv.compose(&s).unwrap().eq_terms(&id4));
        }
    }

    #[test]
    fn suspension_signs_and_involution() {
        let d = combs(3, false);
        let sd = d.suspension();
        assert_eq!(sd.coeff(&t("(..)")), Coeff::one());
        assert_eq!(sd.coeff(&t("(.(..))")), Coeff::from_int(-1));
        assert_eq!(sd.coeff(&t("(.(.(..)))")), Coeff::one());
        assert_eq!(sd.suspension(), d);
        assert_eq!(d.compose_inverse().unwrap(), sd);
    }

    #[test]
    fn projection() {
        let c = combs(4, true);
        assert_eq!(c.project().to_string(), "x + x^2 + x^3 + x^4");
        assert_eq!(TreeSeries::identity(2).unwrap().project().to_string(), "x");
        assert_eq!(TreeSeries::zero(2).project().to_string(), "0");
    }

    #[test]
    fn power_series_algebra() {
        let x = PowerSeries::identity(4);
        let mut f = PowerSeries::zero(4);
        f.coeffs[1] = Coeff::one();
        f.coeffs[2] = Coeff::from_int(3);
        let fx = f.compose(&x).unwrap();
        assert_eq!(fx, f);
        let x2 = x.mul(&x).unwrap();
        assert_eq!(x2.coeff(2), Coeff::one());
        assert!(f.compose(&f).unwrap().coeff(2) == Coeff::from_int(6));
        let mut g = PowerSeries::zero(4);
        g.coeffs[0] = Coeff::one();
        assert_eq!(f.compose(&g), Err(SeriesError::InnerConstantTerm));
    }

    #[test]
    fn embeddings() {
        let unit = TreeSeries::unit(1);
        assert!(unit.rho_embed().unwrap().eq_terms(&TreeSeries::identity(2).unwrap()));
        let s = one_plus_vertex(1);
        let rho = s.rho_embed().unwrap();
        assert_eq!(rho.order(), 2);
        assert_eq!(rho.coeff(&t("(..)")), Coeff::one());
        assert_eq!(rho.coeff(&t("((..).)")), Coeff::one());
        assert_eq!(rho.support_size(), 2);
        let lambda = s.lambda_embed().unwrap();
        assert_eq!(lambda.coeff(&t("(.(..))")), Coeff::one());
        assert_eq!(lambda.support_size(), 2);

        assert_eq!(rho.rho_solve().unwrap(), Membership::Member(s.clone()));
        assert_eq!(
            lambda.rho_solve().unwrap(),
            Membership::NotAMember { tree: t("(.(..))") }
        );
    }

    #[test]
    fn embedded_subgroups_are_closed_under_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let a = TreeSeries::random(3, Flavor::Invertible, &mut rng);
            let b = TreeSeries::random(3, Flavor::Invertible, &mut rng);
            let rho = a.rho_embed().unwrap().compose(&b.rho_embed().unwrap()).unwrap();
            assert!(rho.rho_solve().unwrap().is_member());
            assert!(rho.compose_inverse().unwrap().rho_solve().unwrap().is_member());
            let lam = a.lambda_embed().unwrap().compose(&b.lambda_embed().unwrap()).unwrap();
            assert!(lam.lambda_solve().unwrap().is_member());
            assert!(lam.compose_inverse().unwrap().lambda_solve().unwrap().is_member());
        }
    }

    #[test]
    fn alpha_build_examples() {
        let alpha = TreeSeries::zero(1).alpha_build();
        assert!(alpha.eq_terms(&TreeSeries::identity(3).unwrap()));

        let alpha = TreeSeries::unit(1).alpha_build();
        assert_eq!(alpha.order(), 3);
        assert_eq!(alpha.coeff(&t("(..)")), Coeff::one());
        assert_eq!(alpha.coeff(&Tree::left_comb(2)), Coeff::one());
        assert_eq!(alpha.coeff(&Tree::left_comb(3)), Coeff::one());
        assert_eq!(alpha.support_size(), 3);
    }

    #[test]
    fn alpha_solve_examples() {
        let id = TreeSeries::identity(4).unwrap();
        assert_eq!(id.alpha_solve().unwrap(), Membership::Member(TreeSeries::zero(2)));

        let s = one_plus_vertex(1);
        let lam = s.lambda_embed().unwrap();
        assert_eq!(
            lam.alpha_solve().unwrap(),
            Membership::NotAMember { tree: t("(.(..))") }
        );

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let x = TreeSeries::random(3, Flavor::General, &mut rng);
            let solved = x.alpha_build().alpha_solve().unwrap();
            assert_eq!(solved, Membership::Member(x));
        }
    }

    #[test]
    fn alpha_images_compose_inside_the_subgroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..3 {
            let x = TreeSeries::random(2, Flavor::General, &mut rng);
            let y = TreeSeries::random(2, Flavor::General, &mut rng);
            let composed = x.alpha_build().compose(&y.alpha_build()).unwrap();
            assert!(composed.alpha_solve().unwrap().is_member());
            assert!(x.alpha_build().compose_inverse().unwrap().alpha_solve().unwrap().is_member());
        }
    }

    #[test]
    fn group_laws_on_random_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 4;
        let a = TreeSeries::random(n, Flavor::Invertible, &mut rng);
        let b = TreeSeries::random(n, Flavor::Invertible, &mut rng);
        let c = TreeSeries::random(n, Flavor::Invertible, &mut rng);
        for product in [TreeSeries::over, TreeSeries::under] {
            let ab_c = product(&product(&a, &b).unwrap(), &c).unwrap();
            let a_bc = product(&a, &product(&b, &c).unwrap()).unwrap();
            assert!(ab_c.eq_terms(&a_bc));
        }

        let f = TreeSeries::random(n, Flavor::Diffeo, &mut rng);
        let g = TreeSeries::random(n, Flavor::Diffeo, &mut rng);
        let h = TreeSeries::random(n, Flavor::Diffeo, &mut rng);
        let fg_h = f.compose(&g).unwrap().compose(&h).unwrap();
        let f_gh = f.compose(&g.compose(&h).unwrap()).unwrap();
        assert!(fg_h.eq_terms(&f_gh));
    }

    #[test]
    fn composition_distributes_over_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 4;
        let a = TreeSeries::random(n, Flavor::Invertible, &mut rng);
        let d = TreeSeries::random(n, Flavor::Invertible, &mut rng);
        let c = TreeSeries::random(n, Flavor::Diffeo, &mut rng);
        let a1 = TreeSeries::from_terms(
            n,
            a.terms().filter(|(t, _)| !t.is_leaf()).map(|(t, c)| (t.clone(), c.clone())).collect(),
        )
        .unwrap();
        let d1 = TreeSeries::from_terms(
            n,
            d.terms().filter(|(t, _)| !t.is_leaf()).map(|(t, c)| (t.clone(), c.clone())).collect(),
        )
        .unwrap();
        let lhs = a1.over(&d1).unwrap().compose(&c).unwrap();
        let rhs = a1.compose(&c).unwrap().over(&d1.compose(&c).unwrap()).unwrap();
        assert!(lhs.eq_terms(&rhs));
        let lhs = a1.under(&d1).unwrap().compose(&c).unwrap();
        let rhs = a1.compose(&c).unwrap().under(&d1.compose(&c).unwrap()).unwrap();
        assert!(lhs.eq_terms(&rhs));
    }

    #[test]
    fn suspension_and_projection_are_morphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 4;
        let f = TreeSeries::random(n, Flavor::Diffeo, &mut rng);
        let g = TreeSeries::random(n, Flavor::Diffeo, &mut rng);
        let fg = f.compose(&g).unwrap();
        assert!(fg.suspension().eq_terms(&f.suspension().compose(&g.suspension()).unwrap()));
        assert_eq!(fg.project(), f.project().compose(&g.project()).unwrap());

        let a = TreeSeries::random(n, Flavor::Invertible, &mut rng);
        let b = TreeSeries::random(n, Flavor::Invertible, &mut rng);
        assert_eq!(a.over(&b).unwrap().project(), a.project().mul(&b.project()).unwrap());
    }

    #[test]
    fn specialization_is_a_ring_map_on_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = TreeSeries::random(3, Flavor::Invertible, &mut rng);
        let b = TreeSeries::random(3, Flavor::Invertible, &mut rng);
        let w = BigRational::new(3.into(), 5.into());
        let lhs = a.over(&b).unwrap().specialize_w(&w);
        let rhs = a.specialize_w(&w).over(&b.specialize_w(&w)).unwrap();
        assert!(lhs.eq_terms(&rhs));
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for flavor in [Flavor::Invertible, Flavor::Diffeo, Flavor::General] {
            let s = TreeSeries::random(3, flavor, &mut rng);
            let back = TreeSeries::from_json_str(&s.to_json_string()).unwrap();
            assert_eq!(back, s);
        }
        let doc = TreeSeries::identity(2).unwrap().to_json();
        assert_eq!(doc["flavor"], "diffeo");
        assert_eq!(doc["terms"][0]["tree"], "(..)");
        assert_eq!(doc["terms"][0]["coeff"]["poly"][0][0], 1);
    }

    #[test]
    fn json_rejects_bad_documents() {
        assert!(matches!(
            TreeSeries::from_json_str("[]"),
            Err(SeriesJsonError::Shape(_))
        ));
        let bad_flavor = r#"{"order": 2, "flavor": "odd", "terms": []}"#;
        assert!(matches!(
            TreeSeries::from_json_str(bad_flavor),
            Err(SeriesJsonError::Flavor(_))
        ));
        let bad_tree = r#"{"order": 2, "flavor": "general", "terms": [{"tree": "((..)", "coeff": {"poly": [[1,1]]}}]}"#;
        assert!(matches!(
            TreeSeries::from_json_str(bad_tree),
            Err(SeriesJsonError::Tree { index: 0, .. })
        ));
        let bad_norm = r#"{"order": 2, "flavor": "diffeo", "terms": [{"tree": ".", "coeff": {"poly": [[1,1]]}}]}"#;
        assert!(matches!(
            TreeSeries::from_json_str(bad_norm),
            Err(SeriesJsonError::Series(_))
        ));
    }

    #[test]
    fn display_forms() {
        let mut terms = BTreeMap::new();
        terms.insert(Tree::vertex(), Coeff::one());
        terms.insert(Tree::left_comb(2), Coeff::w());
        terms.insert(Tree::right_comb(2), Coeff::from_int(-1));
        terms.insert(Tree::right_comb(3), Coeff::one().add(&Coeff::w()));
        let s = TreeSeries::from_terms(3, terms).unwrap();
        assert_eq!(
            s.to_string(),
            "(..) + (w)*((..).) - (.(..)) + (1 + w)*(.(.(..)))"
        );
    }

    #[test]
    fn retruncate_drops_and_raises() {
        let c = combs(3, true);
        let low = c.retruncate(2).unwrap();
        assert_eq!(low.support_size(), 2);
        let high = low.retruncate(5).unwrap();
        assert_eq!(high.order(), 5);
        assert_eq!(high.support_size(), 2);
    }
}
