//! Planar binary trees: the universal index object of the crate.
//!
//! A tree is either a leaf or an ordered pair of subtrees joined under a new
//! root (grafting). Trees are graded by their number of internal vertices
//! (the *order*). The module provides the literal codec (`.` / `(LR)`), the
//! three products (graft, over, under), factorization enumerators along the
//! two spines, comb constructors, and Catalan enumeration in a canonical
//! order.
//!
//! The canonical order on trees is the lexicographic order of their literals.
//! Because the literal code is prefix-free this coincides with the structural
//! comparison implemented by [`Ord`]: a node sorts before a leaf, and nodes
//! compare by left subtree first.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Default bound on enumeration order; Y_14 has 2 674 440 elements.
pub const ENUM_CAP: usize = 14;

/// A planar binary tree. Cheap to clone: subtrees are shared.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf,
    Node(Arc<Tree>, Arc<Tree>),
}

/// Errors from the tree-literal parser, with the byte offset of the fault.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeParseError {
    #[error("unexpected character {found:?} at byte {offset}")]
    UnexpectedChar { found: char, offset: usize },
    #[error("unexpected end of input at byte {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("trailing input at byte {offset}")]
    TrailingInput { offset: usize },
}

/// Domain and resource errors for tree operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("order {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("operation is undefined on the leaf tree")]
    LeafInput,
}

impl Tree {
    pub fn leaf() -> Tree {
        Tree::Leaf
    }

    /// The unique tree with one internal vertex.
    pub fn vertex() -> Tree {
        Tree::node(Tree::Leaf, Tree::Leaf)
    }

    pub fn node(left: Tree, right: Tree) -> Tree {
        Tree::Node(Arc::new(left), Arc::new(right))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf)
    }

    pub fn children(&self) -> Option<(&Tree, &Tree)> {
        match self {
            Tree::Leaf => None,
            Tree::Node(l, r) => Some((l, r)),
        }
    }

    /// Number of internal vertices.
    pub fn order(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(l, r) => l.order() + r.order() + 1,
        }
    }

    /// Grafts two trees on a new root.
    pub fn graft(&self, other: &Tree) -> Tree {
        Tree::Node(Arc::new(self.clone()), Arc::new(other.clone()))
    }

    /// Grafts the root of `self` onto the left-most leaf of `other`.
    ///
    /// The leaf is a two-sided unit.
    pub fn over(&self, other: &Tree) -> Tree {
        if self.is_leaf() {
            return other.clone();
        }
        match other {
            Tree::Leaf => self.clone(),
            Tree::Node(l, r) => Tree::Node(Arc::new(self.over(l)), r.clone()),
        }
    }

    /// Grafts the root of `other` onto the right-most leaf of `self`.
    ///
    /// The leaf is a two-sided unit.
    pub fn under(&self, other: &Tree) -> Tree {
        if other.is_leaf() {
            return self.clone();
        }
        match self {
            Tree::Leaf => other.clone(),
            Tree::Node(l, r) => Tree::Node(l.clone(), Arc::new(r.under(other))),
        }
    }

    /// Left comb: all internal vertices on the left-most path.
    pub fn left_comb(p: usize) -> Tree {
        let mut t = Tree::Leaf;
        for _ in 0..p {
            t = t.graft(&Tree::Leaf);
        }
        t
    }

    /// Right comb: all internal vertices on the right-most path.
    pub fn right_comb(q: usize) -> Tree {
        let mut t = Tree::Leaf;
        for _ in 0..q {
            t = Tree::Leaf.graft(&t);
        }
        t
    }

    /// The generator wrapper V: grafts a leaf to the left of `self`.
    pub fn v_wrap(&self) -> Tree {
        Tree::Leaf.graft(self)
    }

    /// All pairs `(u, v)` with `u.over(&v) == self`, ordered by the order of
    /// `u`. There are exactly `1 + left spine length` of them.
    pub fn over_factorizations(&self) -> Vec<(Tree, Tree)> {
        match self {
            Tree::Leaf => vec![(Tree::Leaf, Tree::Leaf)],
            Tree::Node(l, r) => {
                let mut out: Vec<(Tree, Tree)> = l
                    .over_factorizations()
                    .into_iter()
                    .map(|(u, vl)| (u, vl.graft(r)))
                    .collect();
                out.push((self.clone(), Tree::Leaf));
                out
            }
        }
    }

    /// All pairs `(u, v)` with `u.under(&v) == self`, ordered by the order of
    /// `u`. Mirror image of [`Tree::over_factorizations`].
    pub fn under_factorizations(&self) -> Vec<(Tree, Tree)> {
        match self {
            Tree::Leaf => vec![(Tree::Leaf, Tree::Leaf)],
            Tree::Node(l, r) => {
                let mut out = vec![(Tree::Leaf, self.clone())];
                out.extend(
                    r.under_factorizations()
                        .into_iter()
                        .map(|(ur, v)| (l.graft(&ur), v)),
                );
                out
            }
        }
    }

    /// The unique list `[s1, ..., sk]` such that `self` equals
    /// `v_wrap(s1) over v_wrap(s2) over ... over v_wrap(sk)`; empty for the
    /// leaf. These are the right subtrees met along the left spine, deepest
    /// first.
    pub fn left_spine_factors(&self) -> Vec<Tree> {
        let mut factors = Vec::new();
        fn walk(t: &Tree, out: &mut Vec<Tree>) {
            if let Tree::Node(l, r) = t {
                walk(l, out);
                out.push((**r).clone());
            }
        }
        walk(self, &mut factors);
        factors
    }

    /// Number of leaves that are right children of their parent.
    pub fn right_oriented_leaves(&self) -> Result<usize, TreeError> {
        fn count(t: &Tree) -> usize {
            match t {
                Tree::Leaf => 0,
                Tree::Node(l, r) => count(l) + count(r) + usize::from(r.is_leaf()),
            }
        }
        if self.is_leaf() {
            return Err(TreeError::LeafInput);
        }
        Ok(count(self))
    }

    /// All trees of order `n` in canonical order, under the default cap.
    pub fn enumerate(n: usize) -> Result<Vec<Tree>, TreeError> {
        Tree::enumerate_with_cap(n, ENUM_CAP)
    }

    pub fn enumerate_with_cap(n: usize, cap: usize) -> Result<Vec<Tree>, TreeError> {
        let mut levels = Tree::enumerate_levels_with_cap(n, cap)?;
        Ok(levels.pop().expect("levels is nonempty"))
    }

    /// Canonical enumerations of every order `0..=n` at once.
    pub fn enumerate_levels(n: usize) -> Result<Vec<Vec<Tree>>, TreeError> {
        Tree::enumerate_levels_with_cap(n, ENUM_CAP)
    }

    pub fn enumerate_levels_with_cap(n: usize, cap: usize) -> Result<Vec<Vec<Tree>>, TreeError> {
        if n > cap {
            return Err(TreeError::CapExceeded { n, cap });
        }
        let mut levels: Vec<Vec<Tree>> = vec![vec![Tree::Leaf]];
        for m in 1..=n {
            let mut level = Vec::with_capacity(catalan(m) as usize);
            for p in 0..m {
                let q = m - 1 - p;
                for l in &levels[p] {
                    for r in &levels[q] {
                        level.push(l.graft(r));
                    }
                }
            }
            level.sort_unstable();
            levels.push(level);
        }
        Ok(levels)
    }

    pub fn parse(text: &str) -> Result<Tree, TreeParseError> {
        let bytes = text.as_bytes();
        let mut pos = 0usize;
        let tree = parse_at(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos < bytes.len() {
            return Err(TreeParseError::TrailingInput { offset: pos });
        }
        Ok(tree)
    }
}

/// The n-th Catalan number; exact for every order this crate enumerates.
pub fn catalan(n: usize) -> u128 {
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for _ in 0..n {
        let prev = row.clone();
        for (m, slot) in row.iter_mut().enumerate().skip(1) {
            *slot = (0..m).map(|p| prev[p] * prev[m - 1 - p]).sum();
        }
    }
    row[n]
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_at(bytes: &[u8], pos: &mut usize) -> Result<Tree, TreeParseError> {
    skip_ws(bytes, pos);
    match bytes.get(*pos) {
        None => Err(TreeParseError::UnexpectedEnd { offset: *pos }),
        Some(b'.') => {
            *pos += 1;
            Ok(Tree::Leaf)
        }
        Some(b'(') => {
            *pos += 1;
            let left = parse_at(bytes, pos)?;
            let right = parse_at(bytes, pos)?;
            skip_ws(bytes, pos);
            match bytes.get(*pos) {
                Some(b')') => {
                    *pos += 1;
                    Ok(left.graft(&right))
                }
                Some(&b) => Err(TreeParseError::UnexpectedChar {
                    found: char::from(b),
                    offset: *pos,
                }),
                None => Err(TreeParseError::UnexpectedEnd { offset: *pos }),
            }
        }
        Some(&b) => Err(TreeParseError::UnexpectedChar {
            found: char::from(b),
            offset: *pos,
        }),
    }
}

impl FromStr for Tree {
    type Err = TreeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tree::parse(s)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => write!(f, "."),
            Tree::Node(l, r) => write!(f, "({}{})", l, r),
        }
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Tree::Leaf, Tree::Leaf) => Ordering::Equal,
            (Tree::Node(..), Tree::Leaf) => Ordering::Less,
            (Tree::Leaf, Tree::Node(..)) => Ordering::Greater,
            (Tree::Node(a, b), Tree::Node(c, d)) => a.cmp(c).then_with(|| b.cmp(d)),
        }
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
