//! Operand permutation, symbol renaming and alpha-equivalence.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::RewriteError;
use crate::expr::{Einsum, Expr};
use crate::symbol::{preferred_letters, IndexSymbol};

/// Reorders operands: new operand `k` is old operand `perm[k]`. Index strings
/// move with their arguments; the output string is unchanged.
pub fn permute_args(node: &Einsum, perm: &[usize]) -> Result<Einsum, RewriteError> {
    let n = node.arity();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(RewriteError::InvalidPermutation { arity: n });
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(RewriteError::InvalidPermutation { arity: n });
        }
    }
    let mut format = node.format.clone();
    format.inputs = perm
        .iter()
        .map(|&p| node.format.inputs[p].clone())
        .collect();
    let args = perm.iter().map(|&p| node.args[p].clone()).collect();
    Ok(Einsum::new(format, args))
}

/// Renames symbols of one node's scope. Nested nodes are untouched, since
/// their symbols are bound separately.
pub fn rename_symbols(
    node: &Einsum,
    map: &BTreeMap<IndexSymbol, IndexSymbol>,
) -> Result<Einsum, RewriteError> {
    let mut targets = BTreeSet::new();
    for t in map.values() {
        if !targets.insert(*t) {
            return Err(RewriteError::NotInjective(*t));
        }
    }
    for s in node.symbols() {
        if targets.contains(&s) && !map.contains_key(&s) {
            return Err(RewriteError::TargetInUse(s));
        }
    }
    Ok(rename_unchecked(node, map))
}

pub(crate) fn rename_unchecked(node: &Einsum, map: &BTreeMap<IndexSymbol, IndexSymbol>) -> Einsum {
    let format = node
        .format
        .map_symbols(|s| map.get(&s).copied().unwrap_or(s));
    Einsum::new(format, node.args.clone())
}

/// Symbols of a node in first-occurrence order: inputs left to right, then output.
pub(crate) fn first_occurrence_order(node: &Einsum) -> Vec<IndexSymbol> {
    let mut seen = BTreeSet::new();
    node.format
        .inputs
        .iter()
        .chain(std::iter::once(&node.format.output))
        .flat_map(|s| s.iter().copied())
        .filter(|s| seen.insert(*s))
        .collect()
}

/// Renames every node's symbols to `{0}, {1}, …` in first-occurrence order.
/// Two expressions are alpha-equivalent iff their canonical forms are equal.
pub fn canonicalize(expr: &Expr) -> Expr {
    match expr {
        Expr::Einsum(node) => {
            let map: BTreeMap<_, _> = first_occurrence_order(node)
                .into_iter()
                .zip((0..).map(IndexSymbol::Tag))
                .collect();
            let mut renamed = rename_unchecked(node, &map);
            renamed.args = renamed.args.iter().map(canonicalize).collect();
            Expr::Einsum(renamed)
        }
        Expr::Aggregate(terms) => Expr::Aggregate(terms.iter().map(canonicalize).collect()),
        leaf => leaf.clone(),
    }
}

/// Equality up to an injective renaming of each node's symbols.
pub fn alpha_equivalent(a: &Expr, b: &Expr) -> bool {
    canonicalize(a) == canonicalize(b)
}

/// Replaces integer tags with unused letters in every node. Purely cosmetic.
pub fn tidy_symbols(expr: &Expr) -> Expr {
    tidy_keeping(expr, &BTreeSet::new())
}

/// Like [`tidy_symbols`], but tags in `keep` survive at the root node.
pub(crate) fn tidy_keeping(expr: &Expr, keep: &BTreeSet<IndexSymbol>) -> Expr {
    match expr {
        Expr::Einsum(node) => {
            let used = node.symbols();
            let mut letters = preferred_letters().filter(|c| !used.contains(c));
            let mut map = BTreeMap::new();
            for s in first_occurrence_order(node) {
                if matches!(s, IndexSymbol::Tag(_)) && !keep.contains(&s) {
                    match letters.next() {
                        Some(c) => {
                            map.insert(s, c);
                        }
                        None => break,
                    }
                }
            }
            let mut renamed = rename_unchecked(node, &map);
            renamed.args = renamed.args.iter().map(tidy_symbols).collect();
            Expr::Einsum(renamed)
        }
        Expr::Aggregate(terms) => Expr::Aggregate(terms.iter().map(tidy_symbols).collect()),
        leaf => leaf.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;

    fn node(text: &str) -> Einsum {
        match parse_expression(text).unwrap() {
            Expr::Einsum(e) => e,
            _ => panic!("not an einsum"),
        }
    }

    fn l(c: char) -> IndexSymbol {
        IndexSymbol::Letter(c)
    }

    #[test]
    fn permute_swaps_in_lockstep() {
        let n = node("#(ij,jk->ik; A, B)");
        assert_eq!(
            permute_args(&n, &[1, 0]).unwrap(),
            node("#(jk,ij->ik; B, A)")
        );
        assert_eq!(permute_args(&n, &[0, 1]).unwrap(), n);
        assert!(permute_args(&n, &[0, 0]).is_err());
        assert!(permute_args(&n, &[0]).is_err());
        assert!(permute_args(&n, &[0, 2]).is_err());
    }

    #[test]
    fn rename() {
        let n = node("#(ij->ji; A)");
        let map = [(l('i'), l('p')), (l('j'), l('q'))].into_iter().collect();
        assert_eq!(rename_symbols(&n, &map).unwrap(), node("#(pq->qp; A)"));
        let swap = [(l('i'), l('j')), (l('j'), l('i'))].into_iter().collect();
        assert_eq!(rename_symbols(&n, &swap).unwrap(), node("#(ji->ij; A)"));
        let merge = [(l('i'), l('p')), (l('j'), l('p'))].into_iter().collect();
        assert_eq!(
            rename_symbols(&n, &merge),
            Err(RewriteError::NotInjective(l('p')))
        );
        let clash = [(l('i'), l('j'))].into_iter().collect();
        assert_eq!(
            rename_symbols(&n, &clash),
            Err(RewriteError::TargetInUse(l('j')))
        );
    }

    #[test]
    fn alpha_equivalence_is_per_node() {
        let a = parse_expression("#(ij,j->i; A, #(jk,k->j; B, v))").unwrap();
        let b = parse_expression("#(pq,q->p; A, #(ab,b->a; B, v))").unwrap();
        assert!(alpha_equivalent(&a, &b));
        let c = parse_expression("#(pq,q->q; A, #(ab,b->a; B, v))").unwrap();
        assert!(!alpha_equivalent(&a, &c));
        let d = parse_expression("#(ij,j->i; B, #(jk,k->j; A, v))").unwrap();
        assert!(!alpha_equivalent(&a, &d));
    }

    #[test]
    fn tidy_replaces_tags() {
        let e = parse_expression("#({0}{1},{1}k->{0}k; A, B)").unwrap();
        assert_eq!(
            tidy_symbols(&e),
            parse_expression("#(ij,jk->ik; A, B)").unwrap()
        );
    }
}
