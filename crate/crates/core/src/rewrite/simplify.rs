//! Identity elimination, neutral all-ones operands, constant vectorization,
//! and the delta-free normal form.

use std::collections::BTreeSet;

use crate::error::{list_symbols, IdentityObstacle, RewriteError};
use crate::expr::{Einsum, Expr};
use crate::semiring::Semiring;
use crate::symbol::{distinct_symbols, FormatString, IndexString, IndexSymbol};
use crate::tensor::Shape;
use crate::validate::{infer_axes, ShapeEnv};

use super::delta::substitute_delta;
use super::nesting::general_denest_at;
use super::rename::tidy_keeping;

/// `#(I -> I; T)` with pairwise distinct symbols is `T`.
pub fn eliminate_identity(node: &Einsum) -> Result<Expr, RewriteError> {
    if node.arity() != 1 {
        return Err(RewriteError::NotIdentity(IdentityObstacle::MultipleArgs));
    }
    if node.format.inputs[0] != node.format.output {
        return Err(RewriteError::NotIdentity(IdentityObstacle::StringMismatch));
    }
    if !node.format.output.is_distinct() {
        return Err(RewriteError::NotIdentity(
            IdentityObstacle::DuplicateSymbols,
        ));
    }
    Ok(node.args[0].clone())
}

/// Removes the all-ones operand at `slot`, provided every symbol it carries
/// is still bound by another operand.
pub fn drop_neutral_ones(node: &Einsum, slot: usize) -> Result<Einsum, RewriteError> {
    if slot >= node.arity() {
        return Err(RewriteError::SlotOutOfRange {
            slot,
            arity: node.arity(),
        });
    }
    if !matches!(node.args[slot], Expr::Ones(_)) {
        return Err(RewriteError::NotOnes { slot });
    }
    if node.arity() == 1 {
        return Err(RewriteError::LastOperand);
    }
    let mut format = node.format.clone();
    let removed = format.inputs.remove(slot);
    let remaining = format.input_symbols();
    let missing: Vec<IndexSymbol> = removed
        .sigma()
        .into_iter()
        .filter(|s| !remaining.contains(s))
        .collect();
    if !missing.is_empty() {
        return Err(RewriteError::WouldChangeSemantics(list_symbols(&missing)));
    }
    let mut args = node.args.clone();
    args.remove(slot);
    Ok(Einsum::new(format, args))
}

/// Appends an all-ones operand with index string `j`, whose symbols must
/// already be bound.
pub fn add_neutral_ones(
    node: &Einsum,
    j: &IndexString,
    shapes: &ShapeEnv,
) -> Result<Einsum, RewriteError> {
    let bound = node.format.input_symbols();
    let missing: Vec<IndexSymbol> = j
        .sigma()
        .into_iter()
        .filter(|s| !bound.contains(s))
        .collect();
    if !missing.is_empty() {
        return Err(RewriteError::WouldChangeSemantics(list_symbols(&missing)));
    }
    let env = infer_axes(&Expr::Einsum(node.clone()), shapes)?;
    let shape = env.shape_of(j).expect("symbols are bound");
    let mut format = node.format.clone();
    format.inputs.push(j.clone());
    let mut args = node.args.clone();
    args.push(Expr::Ones(shape));
    Ok(Einsum::new(format, args))
}

/// A constant tensor `C` with entry `c` as `#(, i_1, …, i_o -> I; c, ones(d_1), …, ones(d_o))`.
/// `index` defaults to `i, j, k, …`.
pub fn vectorize_constant(
    leaf: &Expr,
    index: Option<&IndexString>,
) -> Result<Einsum, RewriteError> {
    let (scalar, shape) = match leaf {
        Expr::Scalar(_) => (leaf.clone(), Shape::scalar()),
        Expr::Ones(shape) => (Expr::Ones(Shape::scalar()), shape.clone()),
        Expr::Fill { value, shape } => (Expr::Scalar(*value), shape.clone()),
        _ => return Err(RewriteError::NotConstant),
    };
    let index = match index {
        Some(i) => i.clone(),
        None => distinct_symbols(shape.order()),
    };
    if index.len() != shape.order() || !index.is_distinct() {
        return Err(RewriteError::BadIndexString {
            index: index.to_string(),
            expected: shape.order(),
        });
    }
    let mut inputs = vec![IndexString::empty()];
    let mut args = vec![scalar];
    for (&s, &d) in index.iter().zip(shape.dims()) {
        inputs.push(IndexString::new(vec![s]));
        args.push(Expr::ones(&[d]));
    }
    Ok(Einsum::new(FormatString::new(inputs, index), args))
}

/// Rewrites every einsum node so that it has no delta operands and no
/// constant operands other than at most one scalar and one all-ones vector
/// per symbol that no ordinary operand binds.
pub fn remove_deltas_and_constants<S: Semiring>(
    node: &Einsum,
    sr: &S,
) -> Result<Einsum, RewriteError> {
    let original = node.symbols();
    let args = node
        .args
        .iter()
        .map(|a| match a {
            // Leaf operands are handled below, in place.
            Expr::Einsum(_) | Expr::Aggregate(_) => normalize(a, sr),
            leaf => Ok(leaf.clone()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut node = Einsum::new(node.format.clone(), args);

    // Deltas and constants become nested einsums and are flattened in place,
    // last slot first so earlier positions stay put.
    for slot in (0..node.arity()).rev() {
        let nested = match &node.args[slot] {
            Expr::Delta { .. } => Some(substitute_delta(&node.args[slot])?),
            Expr::Ones(shape) if shape.order() <= 1 => None,
            Expr::Ones(_) | Expr::Fill { .. } => Some(vectorize_constant(&node.args[slot], None)?),
            _ => None,
        };
        if let Some(inner) = nested {
            node.args[slot] = Expr::Einsum(inner);
            node = general_denest_at(&node, slot)?;
        }
    }
    // Substituted deltas leave multi-axis ones behind.
    for slot in (0..node.arity()).rev() {
        if matches!(&node.args[slot], Expr::Ones(shape) if shape.order() > 1) {
            node.args[slot] = Expr::Einsum(vectorize_constant(&node.args[slot], None)?);
            node = general_denest_at(&node, slot)?;
        }
    }

    let mut ordinary = Vec::new();
    let mut scalar = sr.one();
    let mut vectors: Vec<(IndexSymbol, Expr)> = Vec::new();
    for (index, arg) in node.format.inputs.iter().zip(&node.args) {
        match arg {
            Expr::Scalar(lit) => {
                scalar = sr.mul(&scalar, &sr.from_literal(lit)?);
            }
            Expr::Ones(shape) if shape.order() == 0 => {}
            Expr::Ones(_) => vectors.push((index.symbols()[0], arg.clone())),
            _ => ordinary.push((index.clone(), arg.clone())),
        }
    }
    let bound: BTreeSet<IndexSymbol> = ordinary
        .iter()
        .flat_map(|(s, _)| s.iter().copied())
        .collect();
    vectors.sort_by_key(|(s, _)| *s);
    vectors.dedup_by_key(|(s, _)| *s);
    vectors.retain(|(s, _)| !bound.contains(s));

    let (mut inputs, mut args): (Vec<IndexString>, Vec<Expr>) = ordinary.into_iter().unzip();
    if scalar != sr.one() || (args.is_empty() && vectors.is_empty()) {
        inputs.push(IndexString::empty());
        args.push(Expr::Scalar(sr.to_literal(&scalar)));
    }
    for (s, v) in vectors {
        inputs.push(IndexString::new(vec![s]));
        args.push(v);
    }
    let normal = Einsum::new(FormatString::new(inputs, node.format.output.clone()), args);
    match tidy_keeping(&Expr::Einsum(normal), &original) {
        Expr::Einsum(e) => Ok(e),
        _ => unreachable!(),
    }
}

/// Applies [`remove_deltas_and_constants`] to every einsum node in `expr`.
/// Deltas, fills and multi-axis ones that stand alone (at the root or as
/// aggregate terms) are first written as einsums.
pub fn normalize<S: Semiring>(expr: &Expr, sr: &S) -> Result<Expr, RewriteError> {
    Ok(match expr {
        Expr::Einsum(node) => Expr::Einsum(remove_deltas_and_constants(node, sr)?),
        Expr::Delta { .. } => {
            Expr::Einsum(remove_deltas_and_constants(&substitute_delta(expr)?, sr)?)
        }
        Expr::Fill { .. } => Expr::Einsum(remove_deltas_and_constants(
            &vectorize_constant(expr, None)?,
            sr,
        )?),
        Expr::Ones(shape) if shape.order() > 1 => Expr::Einsum(remove_deltas_and_constants(
            &vectorize_constant(expr, None)?,
            sr,
        )?),
        Expr::Aggregate(terms) => Expr::Aggregate(
            terms
                .iter()
                .map(|t| normalize(t, sr))
                .collect::<Result<_, _>>()?,
        ),
        leaf => leaf.clone(),
    })
}
