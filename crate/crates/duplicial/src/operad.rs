//! Operadic composition on planar binary trees.
//!
//! `mu(t, [s1, ..., sn])` inserts one tree into each internal vertex of `t`,
//! with vertices matched to arguments in infix order (left subtree, root,
//! right subtree). It is the composition underlying substitution of
//! tree-expanded series.

use thiserror::Error;

use crate::tree::Tree;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OperadError {
    #[error("composition target must have at least one vertex")]
    LeafTarget,
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("argument {index} is the leaf tree; arguments must have order >= 1")]
    LeafArgument { index: usize },
}

/// Inserts `args[i]` into the i-th vertex of `t` (infix order).
///
/// For `t = graft(l, r)` with `p = order(l)` the recursion is
/// `mu(t, s) = under(over(mu(l, s[..p]), s[p]), mu(r, s[p+1..]))`,
/// an empty side contributing the leaf unit. The result's order is the sum
/// of the argument orders.
pub fn mu(t: &Tree, args: &[Tree]) -> Result<Tree, OperadError> {
    if t.is_leaf() {
        return Err(OperadError::LeafTarget);
    }
    if args.len() != t.order() {
        return Err(OperadError::ArityMismatch {
            expected: t.order(),
            got: args.len(),
        });
    }
    if let Some(index) = args.iter().position(Tree::is_leaf) {
        return Err(OperadError::LeafArgument { index });
    }
    Ok(mu_unchecked(t, args))
}

/// The recursion behind [`mu`], without the arity and leaf checks. Exposed
/// for the series layer, which validates its own index sets.
pub fn mu_unchecked(t: &Tree, args: &[Tree]) -> Tree {
    match t.children() {
        None => Tree::leaf(),
        Some((l, r)) => {
            let p = l.order();
            let left = mu_unchecked(l, &args[..p]);
            let right = mu_unchecked(r, &args[p + 1..]);
            left.over(&args[p]).under(&right)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(literal: &str) -> Tree {
        Tree::parse(literal).unwrap()
    }

    fn nonleaf_upto(n: usize) -> Vec<Tree> {
        (1..=n).flat_map(|k| Tree::enumerate(k).unwrap()).collect()
    }

    #[test]
    fn spec_values() {
        assert_eq!(mu(&t("(..)"), &[t("(.(..))")]), Ok(t("(.(..))")));
        assert_eq!(mu(&t("((..).)"), &[t("(..)"), t("(..)")]), Ok(t("((..).)")));
        assert_eq!(mu(&t("((..).)"), &[t("(.(..))"), t("(..)")]), Ok(t("((.(..)).)")));
    }

    #[test]
    fn errors() {
        assert_eq!(mu(&Tree::leaf(), &[]), Err(OperadError::LeafTarget));
        assert_eq!(
            mu(&t("(..)"), &[]),
            Err(OperadError::ArityMismatch { expected: 1, got: 0 })
        );
        assert_eq!(
            mu(&t("((..).)"), &[t("(..)"), Tree::leaf()]),
            Err(OperadError::LeafArgument { index: 1 })
        );
    }

    #[test]
    fn unit_laws() {
        for n in 1..=7 {
            for tree in Tree::enumerate(n).unwrap() {
                let units = vec![Tree::vertex(); n];
                assert_eq!(mu(&tree, &units), Ok(tree.clone()));
            }
        }
        for s in nonleaf_upto(4) {
            assert_eq!(mu(&Tree::vertex(), std::slice::from_ref(&s)), Ok(s.clone()));
        }
    }

    #[test]
    fn grading() {
        let pool = nonleaf_upto(2);
        for n in 1..=3 {
            for tree in Tree::enumerate(n).unwrap() {
                for args in tuples(&pool, n) {
                    let total: usize = args.iter().map(Tree::order).sum();
                    assert_eq!(mu(&tree, &args).unwrap().order(), total);
                }
            }
        }
    }

    #[test]
    fn nested_composition_is_associative() {
        let pool = nonleaf_upto(2);
        for tree in Tree::enumerate(2).unwrap() {
            for a in &pool {
                for b in &pool {
                    let inner = mu(&tree, &[a.clone(), b.clone()]).unwrap();
                    let k = a.order() + b.order();
                    for s in tuples(&pool, k) {
                        let lhs = mu(&inner, &s).unwrap();
                        let a2 = mu(a, &s[..a.order()]).unwrap();
                        let b2 = mu(b, &s[a.order()..]).unwrap();
                        let rhs = mu(&tree, &[a2, b2]).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn composition_distributes_over_the_products() {
        let pool = nonleaf_upto(2);
        for t1 in nonleaf_upto(2) {
            for t2 in nonleaf_upto(2) {
                let k = t1.order() + t2.order();
                for args in tuples(&pool, k) {
                    if args.iter().map(Tree::order).sum::<usize>() > 6 {
                        continue;
                    }
                    let (first, rest) = args.split_at(t1.order());
                    let m1 = mu(&t1, first).unwrap();
                    let m2 = mu(&t2, rest).unwrap();
                    assert_eq!(mu(&t1.over(&t2), &args).unwrap(), m1.over(&m2));
                    assert_eq!(mu(&t1.under(&t2), &args).unwrap(), m1.under(&m2));
                }
            }
        }
    }

    fn tuples(pool: &[Tree], len: usize) -> Vec<Vec<Tree>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    pool.iter().map(move |s| {
                        let mut next = prefix.clone();
                        next.push(s.clone());
                        next
                    })
                })
                .collect();
        }
        out
    }
}
