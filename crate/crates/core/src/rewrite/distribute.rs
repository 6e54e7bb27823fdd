//! Distributivity of combination over aggregation.

use crate::error::RewriteError;
use crate::expr::{Einsum, Expr};

/// Pushes the einsum into the aggregate at operand `slot`:
/// `#(…; …, (B + C), …)` becomes `(#(…; …, B, …) + #(…; …, C, …))`.
/// A single-term aggregate is unwrapped instead.
pub fn distribute(node: &Einsum, slot: usize) -> Result<Expr, RewriteError> {
    let terms = match node.args.get(slot) {
        Some(Expr::Aggregate(terms)) if !terms.is_empty() => terms,
        Some(_) => return Err(RewriteError::NotAnAggregate { slot }),
        None => {
            return Err(RewriteError::SlotOutOfRange {
                slot,
                arity: node.arity(),
            })
        }
    };
    let with = |term: &Expr| {
        let mut copy = node.clone();
        copy.args[slot] = term.clone();
        Expr::Einsum(copy)
    };
    if terms.len() == 1 {
        return Ok(with(&terms[0]));
    }
    Ok(Expr::Aggregate(terms.iter().map(with).collect()))
}

/// Inverse of [`distribute`]: the terms must be einsums with the same format
/// that differ in exactly one operand.
pub fn factor(agg: &Expr) -> Result<Einsum, RewriteError> {
    let not = |m: &str| RewriteError::NotFactorable(m.to_string());
    let Expr::Aggregate(terms) = agg else {
        return Err(not("expected an aggregate"));
    };
    if terms.len() < 2 {
        return Err(not("an aggregate of at least two terms is needed"));
    }
    let nodes = terms
        .iter()
        .map(|t| {
            t.as_einsum()
                .ok_or_else(|| not("every term must be an einsum"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let first = nodes[0];
    if nodes
        .iter()
        .any(|n| n.format != first.format || n.arity() != first.arity())
    {
        return Err(not("the terms have different format strings"));
    }
    let differing: Vec<usize> = (0..first.arity())
        .filter(|&k| nodes.iter().any(|n| n.args[k] != first.args[k]))
        .collect();
    let [slot] = differing[..] else {
        return Err(not(&format!(
            "the terms differ in {} operands, not exactly one",
            differing.len()
        )));
    };
    let mut out = first.clone();
    out.args[slot] = Expr::Aggregate(nodes.iter().map(|n| n.args[slot].clone()).collect());
    Ok(out)
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

    #[test]
    fn round_trip() {
        let n = node("#(ik,kj->ij; A, (B + C))");
        let d = distribute(&n, 1).unwrap();
        assert_eq!(
            d,
            parse_expression("(#(ik,kj->ij; A, B) + #(ik,kj->ij; A, C))").unwrap()
        );
        assert_eq!(factor(&d).unwrap(), n);
    }

    #[test]
    fn single_term_unwraps() {
        let n = node("#(ik,kj->ij; A, (B))");
        assert_eq!(
            distribute(&n, 1).unwrap(),
            parse_expression("#(ik,kj->ij; A, B)").unwrap()
        );
        assert_eq!(
            distribute(&n, 0),
            Err(RewriteError::NotAnAggregate { slot: 0 })
        );
    }

    #[test]
    fn factor_preconditions() {
        let two = parse_expression("(#(ik,kj->ij; A, B) + #(ik,kj->ij; C, D))").unwrap();
        assert!(matches!(factor(&two), Err(RewriteError::NotFactorable(_))));
        let formats = parse_expression("(#(ik,kj->ij; A, B) + #(ik,kj->ji; A, C))").unwrap();
        assert!(matches!(
            factor(&formats),
            Err(RewriteError::NotFactorable(_))
        ));
    }
}
