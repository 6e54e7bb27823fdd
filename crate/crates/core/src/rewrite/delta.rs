//! Delta split, delta merge, delta substitution, and denesting through them.

use std::collections::BTreeMap;

use crate::error::RewriteError;
use crate::expr::{Einsum, Expr};
use crate::symbol::{distinct_symbols, FormatString, FreshSymbols, IndexString, IndexSymbol};
use crate::tensor::Shape;
use crate::validate::{infer_axes, ShapeEnv};

use super::nesting::restricted_denest_at;
use super::rename::rename_unchecked;

/// Which symbol of a merged `δ(a, b)` survives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Length of the axes annotated by `symbol` in `node`.
fn axis_length(
    node: &Einsum,
    symbol: IndexSymbol,
    shapes: &ShapeEnv,
) -> Result<usize, RewriteError> {
    let env = infer_axes(&Expr::Einsum(node.clone()), shapes)?;
    env.get(&symbol).ok_or(RewriteError::SymbolAbsent(symbol))
}

/// Mutable references to every occurrence of `symbol`: inputs left to right,
/// then the output.
fn occurrences_mut(format: &mut FormatString, symbol: IndexSymbol) -> Vec<&mut IndexSymbol> {
    format
        .inputs
        .iter_mut()
        .chain(std::iter::once(&mut format.output))
        .flat_map(|s| s.0.iter_mut())
        .filter(|s| **s == symbol)
        .collect()
}

/// Replaces the selected occurrences of `a` by the fresh symbol `b` and
/// prepends `δ₁` with index string `ab`. Occurrences are numbered from 0 over
/// the input strings left to right, then the output string.
pub fn delta_split(
    node: &Einsum,
    a: IndexSymbol,
    occurrences: &[usize],
    b: IndexSymbol,
    shapes: &ShapeEnv,
) -> Result<Einsum, RewriteError> {
    if !node.format.input_symbols().contains(&a) {
        return Err(RewriteError::SymbolAbsent(a));
    }
    if node.symbols().contains(&b) {
        return Err(RewriteError::SymbolNotFresh(b));
    }
    if occurrences.is_empty() {
        return Err(RewriteError::NoOccurrenceSelected);
    }
    let len = axis_length(node, a, shapes)?;
    let mut format = node.format.clone();
    {
        let mut slots = occurrences_mut(&mut format, a);
        let count = slots.len();
        for &k in occurrences {
            match slots.get_mut(k) {
                Some(s) => **s = b,
                None => {
                    return Err(RewriteError::NoSuchOccurrence {
                        symbol: a,
                        index: k,
                        count,
                    })
                }
            }
        }
    }
    format.inputs.insert(0, IndexString::new(vec![a, b]));
    let mut args = node.args.clone();
    args.insert(
        0,
        Expr::Delta {
            dims: Shape(vec![len]),
        },
    );
    Ok(Einsum::new(format, args))
}

/// Removes the `δ₁` operand at `slot` and replaces the other symbol of its
/// index string by the kept one everywhere in the node.
pub fn delta_merge(node: &Einsum, slot: usize, keep: Keep) -> Result<Einsum, RewriteError> {
    if slot >= node.arity() {
        return Err(RewriteError::SlotOutOfRange {
            slot,
            arity: node.arity(),
        });
    }
    let index = &node.format.inputs[slot];
    let is_unit_delta = matches!(&node.args[slot], Expr::Delta { dims } if dims.order() == 1);
    if !is_unit_delta || index.len() != 2 {
        return Err(RewriteError::NotADelta { slot });
    }
    let (a, b) = (index.symbols()[0], index.symbols()[1]);
    if a == b {
        return Err(RewriteError::DegenerateDelta { slot, symbol: a });
    }
    if node.arity() == 1 {
        return Err(RewriteError::LastOperand);
    }
    let (kept, gone) = match keep {
        Keep::First => (a, b),
        Keep::Second => (b, a),
    };
    let mut format = node.format.clone();
    format.inputs.remove(slot);
    let mut args = node.args.clone();
    args.remove(slot);
    let format = format.map_symbols(|s| if s == gone { kept } else { s });
    if !format.input_symbols().contains(&kept) {
        return Err(RewriteError::WouldUnbind(kept));
    }
    Ok(Einsum::new(format, args))
}

/// `δ_o` as `#(I -> II; ones(dims))` for `o` distinct symbols `I`.
pub fn substitute_delta(leaf: &Expr) -> Result<Einsum, RewriteError> {
    let Expr::Delta { dims } = leaf else {
        return Err(RewriteError::NotDeltaLeaf);
    };
    let index = distinct_symbols(dims.order());
    let mut doubled = index.0.clone();
    doubled.extend(index.iter().copied());
    Ok(Einsum::new(
        FormatString::new(vec![index], IndexString::new(doubled)),
        vec![Expr::Ones(dims.clone())],
    ))
}

/// Flattens the nested node in operand `slot` by the three-step construction:
/// split every position of the inner output and of the outer slot string onto
/// a common fresh symbol `x_i`, denest with the restricted rule, then merge
/// every delta away, keeping `x` symbols (the smallest when both are).
///
/// The result agrees with [`general_denest_at`](super::general_denest_at) up
/// to alpha-equivalence.
pub fn general_denest_via_deltas(
    outer: &Einsum,
    slot: usize,
    shapes: &ShapeEnv,
) -> Result<Einsum, RewriteError> {
    let inner = match outer.args.get(slot) {
        Some(Expr::Einsum(inner)) => inner,
        Some(_) => return Err(RewriteError::NotNested { slot }),
        None => {
            return Err(RewriteError::SlotOutOfRange {
                slot,
                arity: outer.arity(),
            })
        }
    };
    let d = inner.format.output.len();
    if outer.format.inputs[slot].len() != d {
        return Err(RewriteError::LengthMismatch {
            inner: d,
            outer: outer.format.inputs[slot].len(),
        });
    }

    let mut fresh = FreshSymbols::avoiding(outer.symbols().iter());
    fresh.reserve(inner.symbols().iter());
    let outer_symbols = outer.symbols();
    let rename: BTreeMap<_, _> = inner
        .symbols()
        .into_iter()
        .filter(|s| outer_symbols.contains(s))
        .map(|s| (s, fresh.next_symbol()))
        .collect();
    let mut inner = rename_unchecked(inner, &rename);
    let xs: Vec<IndexSymbol> = (0..d).map(|_| fresh.next_symbol()).collect();

    for (i, &x) in xs.iter().enumerate() {
        let a = inner.format.output.symbols()[i];
        let before = count(&inner.format.inputs, a)
            + inner.format.output.symbols()[..i]
                .iter()
                .filter(|&&s| s == a)
                .count();
        inner = delta_split(&inner, a, &[before], x, shapes)?;
    }
    let mut outer = outer.clone();
    outer.args[slot] = Expr::Einsum(inner);
    let mut slot = slot;
    for (i, &x) in xs.iter().enumerate() {
        let b = outer.format.inputs[slot].symbols()[i];
        let before = count(&outer.format.inputs[..slot], b)
            + outer.format.inputs[slot].symbols()[..i]
                .iter()
                .filter(|&&s| s == b)
                .count();
        outer = delta_split(&outer, b, &[before], x, shapes)?;
        slot += 1;
    }

    let mut flat = restricted_denest_at(&outer, slot)?;
    // The outer deltas sit in front, the inner ones where the nested node was.
    let mut created = vec![false; flat.arity()];
    created[..d].iter_mut().for_each(|c| *c = true);
    created[slot..slot + d].iter_mut().for_each(|c| *c = true);
    let is_x = |s: IndexSymbol| xs.contains(&s);
    while let Some(k) = created.iter().position(|&c| c) {
        let (p, q) = (
            flat.format.inputs[k].symbols()[0],
            flat.format.inputs[k].symbols()[1],
        );
        created.remove(k);
        if p == q {
            // δ(x, x) is one wherever x is bound by another operand.
            flat.format.inputs.remove(k);
            flat.args.remove(k);
            if !flat.format.input_symbols().contains(&p) {
                return Err(RewriteError::WouldUnbind(p));
            }
            continue;
        }
        let keep = match (is_x(p), is_x(q)) {
            (true, true) if p < q => Keep::First,
            (true, true) => Keep::Second,
            (true, false) => Keep::First,
            _ => Keep::Second,
        };
        flat = delta_merge(&flat, k, keep)?;
    }
    Ok(flat)
}

fn count(strings: &[IndexString], s: IndexSymbol) -> usize {
    strings
        .iter()
        .map(|t| t.iter().filter(|&&c| c == s).count())
        .sum()
}
