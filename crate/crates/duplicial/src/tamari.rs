//! The Tamari lattice on the trees of a fixed order: covering relation by
//! right rotation, reachability, Mobius function by incidence-algebra
//! inversion, interval factorization checks, and Hasse-diagram export.
//!
//! The rotation replaces a local pattern `graft(graft(a,b),c)` by
//! `graft(a,graft(b,c))`; the left comb is the unique minimal element and the
//! right comb the unique maximal one.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use serde_json::{json, Value};
use thiserror::Error;

use crate::tree::{Tree, TreeParseError};

/// Default bound on lattice order; Y_9 has 4862 elements.
pub const LATTICE_CAP: usize = 9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TamariError {
    #[error("order {n} exceeds the lattice cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("tree {tree} is not an element of Y_{n}")]
    NotAnElement { tree: Tree, n: usize },
    #[error("mobius is undefined on the incomparable pair ({s}, {t})")]
    Incomparable { s: Tree, t: Tree },
}

#[derive(Debug, Error)]
pub enum LatticeJsonError {
    #[error("invalid lattice document: {0}")]
    Shape(String),
    #[error("element {index}: bad tree literal: {source}")]
    Tree { index: usize, source: TreeParseError },
    #[error("element {index} has order {found}, expected {expected}")]
    WrongOrder { index: usize, found: usize, expected: usize },
    #[error("elements are not exactly the trees of order {n}")]
    WrongElementSet { n: usize },
    #[error("cover edge {index} is not a rotation cover")]
    BadCover { index: usize },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// All trees obtained from `t` by one right rotation, in canonical order.
pub fn covers(t: &Tree) -> Vec<Tree> {
    let mut out = Vec::new();
    if let Some((l, r)) = t.children() {
        if let Some((a, b)) = l.children() {
            out.push(a.graft(&b.graft(r)));
        }
        for rotated in covers(l) {
            out.push(rotated.graft(r));
        }
        for rotated in covers(r) {
            out.push(l.graft(&rotated));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// A row-major bit matrix for the reachability relation.
struct BitMatrix {
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(rows: usize) -> BitMatrix {
        let words_per_row = rows.div_ceil(64);
        BitMatrix {
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] & (1 << (j % 64)) != 0
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    fn or_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words_per_row;
        let src_copy: Vec<u64> = self.row(src).to_vec();
        for (k, word) in src_copy.into_iter().enumerate() {
            self.bits[dst * w + k] |= word;
        }
    }
}

/// The poset Y_n with its covering relation, reachability closure, and a
/// lazily populated Mobius cache. Immutable once built; safe to query from
/// multiple threads.
pub struct TamariLattice {
    n: usize,
    elements: Vec<Tree>,
    index: HashMap<Tree, usize>,
    covers: Vec<Vec<usize>>,
    reach: BitMatrix,
    /// A fixed linear extension (bottom to top); all Mobius sums scan it.
    topo: Vec<usize>,
    mobius_cache: Mutex<HashMap<(usize, usize), i64>>,
}

impl std::fmt::Debug for TamariLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TamariLattice")
            .field("n", &self.n)
            .field("elements", &self.elements.len())
            .field("covers", &self.cover_edge_count())
            .finish()
    }
}

impl TamariLattice {
    pub fn build(n: usize) -> Result<TamariLattice, TamariError> {
        TamariLattice::build_with_cap(n, LATTICE_CAP)
    }

    pub fn build_with_cap(n: usize, cap: usize) -> Result<TamariLattice, TamariError> {
        if n > cap {
            return Err(TamariError::CapExceeded { n, cap });
        }
        let elements = Tree::enumerate_with_cap(n, cap.max(n)).expect("cap checked above");
        let index: HashMap<Tree, usize> = elements.iter().cloned().zip(0..).collect();
        let covers: Vec<Vec<usize>> = elements
            .iter()
            .map(|t| covers(t).iter().map(|c| index[c]).collect())
            .collect();
        Ok(TamariLattice::assemble(n, elements, index, covers))
    }

    fn assemble(
        n: usize,
        elements: Vec<Tree>,
        index: HashMap<Tree, usize>,
        covers: Vec<Vec<usize>>,
    ) -> TamariLattice {
        let m = elements.len();
        let mut indegree = vec![0usize; m];
        for targets in &covers {
            for &j in targets {
                indegree[j] += 1;
            }
        }
        // deterministic Kahn order: smallest ready index first
        let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| std::cmp::Reverse(i))
            .collect();
        let mut topo = Vec::with_capacity(m);
        while let Some(std::cmp::Reverse(i)) = heap.pop() {
            topo.push(i);
            for &j in &covers[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    heap.push(std::cmp::Reverse(j));
                }
            }
        }
        assert_eq!(topo.len(), m, "cover relation is acyclic");

        let mut reach = BitMatrix::new(m);
        for &i in topo.iter().rev() {
            reach.set(i, i);
            let targets = covers[i].clone();
            for j in targets {
                reach.or_row_into(j, i);
            }
        }

        TamariLattice {
            n,
            elements,
            index,
            covers,
            reach,
            topo,
            mobius_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Elements in canonical order (for built lattices, the enumeration
    /// order; for imported ones, the document order).
    pub fn elements(&self) -> &[Tree] {
        &self.elements
    }

    /// Upward covers of the i-th element, as indices.
    pub fn cover_indices(&self, i: usize) -> &[usize] {
        &self.covers[i]
    }

    pub fn cover_edge_count(&self) -> usize {
        self.covers.iter().map(Vec::len).sum()
    }

    fn index_of(&self, t: &Tree) -> Result<usize, TamariError> {
        self.index.get(t).copied().ok_or_else(|| TamariError::NotAnElement {
            tree: t.clone(),
            n: self.n,
        })
    }

    /// The order relation: is `s <= t` in the Tamari order?
    pub fn leq(&self, s: &Tree, t: &Tree) -> Result<bool, TamariError> {
        Ok(self.reach.get(self.index_of(s)?, self.index_of(t)?))
    }

    /// The Mobius function mu(s, t); errors on incomparable pairs.
    pub fn mobius(&self, s: &Tree, t: &Tree) -> Result<i64, TamariError> {
        let i = self.index_of(s)?;
        let j = self.index_of(t)?;
        if !self.reach.get(i, j) {
            return Err(TamariError::Incomparable {
                s: s.clone(),
                t: t.clone(),
            });
        }
        Ok(self.mobius_by_index(i, j))
    }

    /// mu on comparable index pairs, via the standard interval recursion
    /// mu(s,s) = 1, mu(s,t) = -sum of mu(s,z) over s <= z < t. The pass over
    /// the interval fills the cache for every intermediate pair.
    fn mobius_by_index(&self, i: usize, j: usize) -> i64 {
        let mut cache = self.mobius_cache.lock().expect("mobius cache poisoned");
        if let Some(&v) = cache.get(&(i, j)) {
            return v;
        }
        let mut interval: Vec<usize> = Vec::new();
        let mut result = 0;
        for &z in &self.topo {
            if !(self.reach.get(i, z) && self.reach.get(z, j)) {
                continue;
            }
            let value = if z == i {
                1
            } else {
                match cache.get(&(i, z)) {
                    Some(&v) => v,
                    None => {
                        let sum: i64 = interval
                            .iter()
                            .filter(|&&y| self.reach.get(y, z) && y != z)
                            .map(|&y| cache[&(i, y)])
                            .sum();
                        -sum
                    }
                }
            };
            cache.insert((i, z), value);
            interval.push(z);
            if z == j {
                result = value;
            }
        }
        result
    }

    /// mu(c_n, t) for every element t, keyed by tree.
    pub fn mobius_from_min(&self) -> BTreeMap<Tree, i64> {
        let bottom = Tree::left_comb(self.n);
        let top = Tree::right_comb(self.n);
        let i = self.index_of(&bottom).expect("left comb is an element");
        let j = self.index_of(&top).expect("right comb is an element");
        self.mobius_by_index(i, j);
        self.elements
            .iter()
            .map(|t| {
                let v = self.mobius_by_index(i, self.index[t]);
                (t.clone(), v)
            })
            .collect()
    }

    /// Indices of elements with no lower cover (resp. no upper cover).
    pub fn minimal_elements(&self) -> Vec<&Tree> {
        let mut has_lower = vec![false; self.elements.len()];
        for targets in &self.covers {
            for &j in targets {
                has_lower[j] = true;
            }
        }
        self.elements
            .iter()
            .enumerate()
            .filter(|(i, _)| !has_lower[*i])
            .map(|(_, t)| t)
            .collect()
    }

    pub fn maximal_elements(&self) -> Vec<&Tree> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(i, _)| self.covers[*i].is_empty())
            .map(|(_, t)| t)
            .collect()
    }

    /// First pair without a unique meet or join, if any. A `None` result
    /// witnesses the lattice property.
    pub fn lattice_property_counterexample(&self) -> Option<(Tree, Tree)> {
        let m = self.elements.len();
        let w = self.reach.words_per_row;
        // columns of reach = down-sets
        let mut down = BitMatrix::new(m);
        for i in 0..m {
            for j in 0..m {
                if self.reach.get(i, j) {
                    down.set(j, i);
                }
            }
        }
        let unique_extremum = |bound_rows: &BitMatrix, a: usize, b: usize| -> bool {
            let mut common: Vec<u64> = bound_rows.row(a).to_vec();
            for (k, word) in bound_rows.row(b).iter().enumerate() {
                common[k] &= word;
            }
            // count members z of `common` whose reach/down row meets `common`
            // only in z itself: exactly one such extremum must exist
            let mut extrema = 0;
            for z in 0..m {
                if common[z / 64] & (1 << (z % 64)) == 0 {
                    continue;
                }
                let row = if std::ptr::eq(bound_rows, &down) {
                    self.reach.row(z)
                } else {
                    down.row(z)
                };
                let overlap: u32 = (0..w).map(|k| (row[k] & common[k]).count_ones()).sum();
                if overlap == 1 {
                    extrema += 1;
                }
            }
            extrema == 1
        };
        for a in 0..m {
            for b in a..m {
                if !unique_extremum(&down, a, b) || !unique_extremum(&self.reach, a, b) {
                    return Some((self.elements[a].clone(), self.elements[b].clone()));
                }
            }
        }
        None
    }

    /// Hasse diagram in DOT, nodes bottom-to-top.
    pub fn export_dot(&self) -> String {
        let mut out = format!("digraph \"Y_{}\" {{\n  rankdir=BT;\n", self.n);
        for t in &self.elements {
            out.push_str(&format!("  \"{}\";\n", t));
        }
        for (i, targets) in self.covers.iter().enumerate() {
            for &j in targets {
                out.push_str(&format!("  \"{}\" -> \"{}\";\n", self.elements[i], self.elements[j]));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn export_json(&self) -> Value {
        let edges: Vec<Value> = self
            .covers
            .iter()
            .enumerate()
            .flat_map(|(i, targets)| targets.iter().map(move |&j| json!([i, j])))
            .collect();
        json!({
            "n": self.n,
            "elements": self.elements.iter().map(Tree::to_string).collect::<Vec<_>>(),
            "covers": edges,
        })
    }

    pub fn export_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.export_json()).expect("serializable")
    }

    /// Re-imports an exported lattice document, validating that it describes
    /// exactly the rotation poset on Y_n.
    pub fn from_json(value: &Value) -> Result<TamariLattice, LatticeJsonError> {
        let obj = value
            .as_object()
            .ok_or_else(|| LatticeJsonError::Shape("expected a JSON object".into()))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| LatticeJsonError::Shape("\"n\" must be a nonnegative integer".into()))?
            as usize;
        let raw_elements = obj
            .get("elements")
            .and_then(Value::as_array)
            .ok_or_else(|| LatticeJsonError::Shape("\"elements\" must be an array".into()))?;
        let mut elements = Vec::with_capacity(raw_elements.len());
        for (index, v) in raw_elements.iter().enumerate() {
            let literal = v
                .as_str()
                .ok_or_else(|| LatticeJsonError::Shape(format!("element {} must be a string", index)))?;
            let tree = Tree::parse(literal).map_err(|source| LatticeJsonError::Tree { index, source })?;
            if tree.order() != n {
                return Err(LatticeJsonError::WrongOrder {
                    index,
                    found: tree.order(),
                    expected: n,
                });
            }
            elements.push(tree);
        }
        let mut sorted = elements.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != Tree::enumerate_with_cap(n, n).expect("n itself as cap") {
            return Err(LatticeJsonError::WrongElementSet { n });
        }
        let index: HashMap<Tree, usize> = elements.iter().cloned().zip(0..).collect();
        let raw_covers = obj
            .get("covers")
            .and_then(Value::as_array)
            .ok_or_else(|| LatticeJsonError::Shape("\"covers\" must be an array".into()))?;
        let mut cover_lists: Vec<Vec<usize>> = vec![Vec::new(); elements.len()];
        for (i, v) in raw_covers.iter().enumerate() {
            let pair = v
                .as_array()
                .filter(|p| p.len() == 2)
                .and_then(|p| Some((p[0].as_u64()?, p[1].as_u64()?)))
                .ok_or_else(|| LatticeJsonError::Shape(format!("cover {} must be an index pair", i)))?;
            let (from, to) = (pair.0 as usize, pair.1 as usize);
            if from >= elements.len() || to >= elements.len() {
                return Err(LatticeJsonError::Shape(format!("cover {} is out of range", i)));
            }
            if !covers(&elements[from]).contains(&elements[to]) {
                return Err(LatticeJsonError::BadCover { index: i });
            }
            cover_lists[from].push(to);
        }
        for (i, list) in cover_lists.iter().enumerate() {
            let expected: Vec<usize> = covers(&elements[i]).iter().map(|c| index[c]).collect();
            let mut found = list.clone();
            found.sort_unstable();
            let mut want = expected;
            want.sort_unstable();
            if found != want {
                return Err(LatticeJsonError::Shape(format!(
                    "element {} is missing cover edges",
                    i
                )));
            }
        }
        Ok(TamariLattice::assemble(n, elements, index, cover_lists))
    }

    pub fn from_json_str(text: &str) -> Result<TamariLattice, LatticeJsonError> {
        let value: Value = serde_json::from_str(text)?;
        TamariLattice::from_json(&value)
    }
}

/// Checks the interval factorization
/// `mu(c_{p+q}, over(t', t'')) = mu(c_p, t') * mu(c_q, t'')`
/// for all pairs; returns the first failing pair with both values.
pub struct IntervalCheck {
    pub p: usize,
    pub q: usize,
    pub counterexample: Option<IntervalCounterexample>,
}

pub struct IntervalCounterexample {
    pub left: Tree,
    pub right: Tree,
    pub product_value: i64,
    pub factor_value: i64,
}

impl IntervalCheck {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

pub fn interval_product_check(p: usize, q: usize) -> Result<IntervalCheck, TamariError> {
    interval_product_check_with_cap(p, q, LATTICE_CAP)
}

pub fn interval_product_check_with_cap(p: usize, q: usize, cap: usize) -> Result<IntervalCheck, TamariError> {
    let big = TamariLattice::build_with_cap(p + q, cap)?;
    let left_lat = TamariLattice::build_with_cap(p, cap)?;
    let right_lat = TamariLattice::build_with_cap(q, cap)?;
    let c_big = Tree::left_comb(p + q);
    let c_p = Tree::left_comb(p);
    let c_q = Tree::left_comb(q);
    for left in left_lat.elements() {
        for right in right_lat.elements() {
            let product_value = big.mobius(&c_big, &left.over(right))?;
            let factor_value = left_lat.mobius(&c_p, left)? * right_lat.mobius(&c_q, right)?;
            if product_value != factor_value {
                return Ok(IntervalCheck {
                    p,
                    q,
                    counterexample: Some(IntervalCounterexample {
                        left: left.clone(),
                        right: right.clone(),
                        product_value,
                        factor_value,
                    }),
                });
            }
        }
    }
    Ok(IntervalCheck {
        p,
        q,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(literal: &str) -> Tree {
        Tree::parse(literal).unwrap()
    }

    #[test]
    fn rotation_cover_examples() {
        assert_eq!(covers(&t("((..).)")), vec![t("(.(..))")]);
        assert_eq!(covers(&t("(((..).).)")), vec![t("((.(..)).)"), t("((..)(..))")]);
        assert_eq!(covers(&t("(.(.(..)))")), Vec::<Tree>::new());
    }

    #[test]
    fn small_lattices() {
        let y2 = TamariLattice::build(2).unwrap();
        assert_eq!(y2.elements().len(), 2);
        assert_eq!(y2.cover_edge_count(), 1);

        let y3 = TamariLattice::build(3).unwrap();
        assert_eq!(y3.elements().len(), 5);
        assert_eq!(y3.cover_edge_count(), 5);

        let y4 = TamariLattice::build(4).unwrap();
        assert_eq!(y4.elements().len(), 14);
        assert_eq!(y4.minimal_elements(), vec![&Tree::left_comb(4)]);
        assert_eq!(y4.maximal_elements(), vec![&Tree::right_comb(4)]);

        assert_eq!(
            TamariLattice::build(LATTICE_CAP + 1).unwrap_err(),
            TamariError::CapExceeded { n: 10, cap: 9 }
        );
    }

    #[test]
    fn unique_extrema_up_to_order_six() {
        for n in 1..=6 {
            let lat = TamariLattice::build(n).unwrap();
            assert_eq!(lat.minimal_elements(), vec![&Tree::left_comb(n)]);
            assert_eq!(lat.maximal_elements(), vec![&Tree::right_comb(n)]);
        }
    }

    #[test]
    fn order_relation() {
        let y3 = TamariLattice::build(3).unwrap();
        for el in y3.elements() {
            assert!(y3.leq(&Tree::left_comb(3), el).unwrap());
            assert!(y3.leq(el, &Tree::right_comb(3)).unwrap());
        }
        assert!(y3.leq(&t("((.(..)).)"), &t("(.((..).))")).unwrap());
        assert!(!y3.leq(&t("(.((..).))"), &t("((.(..)).)")).unwrap());
        assert!(!y3.leq(&t("((.(..)).)"), &t("((..)(..))")).unwrap());

        let y2 = TamariLattice::build(2).unwrap();
        assert!(!y2.leq(&t("(.(..))"), &t("((..).)")).unwrap());
        assert_eq!(
            y2.leq(&t("(..)"), &t("(..)")),
            Err(TamariError::NotAnElement { tree: t("(..)"), n: 2 })
        );
    }

    #[test]
    fn mobius_values() {
        let y2 = TamariLattice::build(2).unwrap();
        assert_eq!(y2.mobius(&t("((..).)"), &t("((..).)")), Ok(1));
        assert_eq!(y2.mobius(&t("((..).)"), &t("(.(..))")), Ok(-1));

        let y3 = TamariLattice::build(3).unwrap();
        let row = y3.mobius_from_min();
        let expected: Vec<(&str, i64)> = vec![
            ("(((..).).)", 1),
            ("((.(..)).)", -1),
            ("((..)(..))", -1),
            ("(.((..).))", 0),
            ("(.(.(..)))", 1),
        ];
        for (lit, v) in expected {
            assert_eq!(row[&t(lit)], v, "mobius at {}", lit);
        }
        assert_eq!(y3.mobius(&Tree::left_comb(3), &Tree::right_comb(3)), Ok(1));

        let incomparable = y3.mobius(&t("((.(..)).)"), &t("((..)(..))"));
        assert!(matches!(incomparable, Err(TamariError::Incomparable { .. })));
    }

    #[test]
    fn mobius_row_sums_vanish() {
        for n in 2..=6 {
            let lat = TamariLattice::build(n).unwrap();
            let total: i64 = lat.mobius_from_min().values().sum();
            assert_eq!(total, 0, "order {}", n);
        }
    }

    #[test]
    fn zeta_convolved_with_mobius_is_the_identity() {
        for n in 1..=5 {
            let lat = TamariLattice::build(n).unwrap();
            let els = lat.elements().to_vec();
            for s in &els {
                for u in &els {
                    if !lat.leq(s, u).unwrap() {
                        continue;
                    }
                    let mut total = 0;
                    for z in &els {
                        if lat.leq(s, z).unwrap() && lat.leq(z, u).unwrap() {
                            total += lat.mobius(s, z).unwrap();
                        }
                    }
                    assert_eq!(total, i64::from(s == u), "interval [{}, {}]", s, u);
                }
            }
        }
    }

    #[test]
    fn lattice_property_holds_up_to_order_five() {
        for n in 1..=5 {
            let lat = TamariLattice::build(n).unwrap();
            assert_eq!(lat.lattice_property_counterexample(), None, "order {}", n);
        }
    }

    #[test]
    fn interval_factorization() {
        for (p, q) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
            let check = interval_product_check(p, q).unwrap();
            assert!(check.passed(), "interval check ({}, {})", p, q);
        }
    }

    #[test]
    fn dot_export() {
        let y2 = TamariLattice::build(2).unwrap();
        let dot = y2.export_dot();
        assert_eq!(dot.matches(" -> ").count(), 1);
        assert!(dot.contains("\"((..).)\" -> \"(.(..))\""));
        assert!(dot.starts_with("digraph \"Y_2\""));

        let y3 = TamariLattice::build(3).unwrap();
        assert_eq!(y3.export_dot().matches(" -> ").count(), 5);
    }

    #[test]
    fn json_round_trip() {
        for n in [2, 3, 4] {
            let lat = TamariLattice::build(n).unwrap();
            let text = lat.export_json_string();
            let back = TamariLattice::from_json_str(&text).unwrap();
            assert_eq!(back.export_json_string(), text);
        }
    }

    #[test]
    fn json_rejects_corrupt_documents() {
        let lat = TamariLattice::build(3).unwrap();
        let mut doc = lat.export_json();
        doc["elements"][0] = json!("(.(.(..)))");
        assert!(matches!(
            TamariLattice::from_json(&doc),
            Err(LatticeJsonError::WrongElementSet { n: 3 })
        ));

        let mut doc = lat.export_json();
        doc["elements"][0] = json!("(.(..))");
        assert!(matches!(
            TamariLattice::from_json(&doc),
            Err(LatticeJsonError::WrongOrder { index: 0, found: 2, expected: 3 })
        ));

        let mut doc = lat.export_json();
        doc["covers"][0] = json!([4, 0]);
        assert!(matches!(
            TamariLattice::from_json(&doc),
            Err(LatticeJsonError::BadCover { index: 0 })
        ));
    }
}
