//! Reference evaluator.
//!
//! Each einsum entry is the ⊕-aggregate, over every global position that
//! projects onto it, of the ⊗-combination of the operand entries at the
//! projected positions. Global positions are enumerated exhaustively in
//! lexicographic order of the (ordered) symbols, so evaluation in an inexact
//! semiring is reproducible. Nested nodes are evaluated innermost first and
//! fully materialized. This is an oracle, not a fast contraction engine.

use std::collections::BTreeMap;

use crate::error::{EvalError, Violation};
use crate::expr::Expr;
use crate::semiring::Semiring;
use crate::symbol::{FormatString, IndexString, IndexSymbol};
use crate::tensor::{materialize_delta, materialize_ones, Shape, Tensor};
use crate::validate::{format_axes, AxisEnvironment};

/// Named tensors available to an expression.
pub type Bindings<T> = BTreeMap<String, Tensor<T>>;

/// An assignment of a coordinate to each symbol of one einsum node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GlobalPosition(pub BTreeMap<IndexSymbol, usize>);

impl GlobalPosition {
    /// Reads a tensor position out of this global position through `index`.
    pub fn project(&self, index: &IndexString) -> Result<Vec<usize>, EvalError> {
        index
            .iter()
            .map(|s| {
                self.0
                    .get(s)
                    .copied()
                    .ok_or(EvalError::UnassignedSymbol(*s))
            })
            .collect()
    }
}

/// Iterates every global position of an axis environment in lexicographic order.
pub fn global_positions(env: &AxisEnvironment) -> impl Iterator<Item = GlobalPosition> + '_ {
    let symbols: Vec<IndexSymbol> = env.0.keys().copied().collect();
    let dims = Shape(env.0.values().copied().collect());
    dims.positions()
        .map(move |coords| GlobalPosition(symbols.iter().copied().zip(coords).collect()))
}

/// Work done by one einsum evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EinsumStats {
    /// Global positions visited; always the product of all axis lengths.
    pub positions: usize,
}

/// Evaluates one einsum over already-evaluated arguments.
pub fn eval_einsum<S: Semiring>(
    format: &FormatString,
    args: &[Tensor<S::Elem>],
    sr: &S,
) -> Result<Tensor<S::Elem>, EvalError> {
    eval_einsum_with_stats(format, args, sr).map(|(t, _)| t)
}

/// [`eval_einsum`], also reporting how many global positions were visited.
pub fn eval_einsum_with_stats<S: Semiring>(
    format: &FormatString,
    args: &[Tensor<S::Elem>],
    sr: &S,
) -> Result<(Tensor<S::Elem>, EinsumStats), EvalError> {
    contract(format, args, sr, &[])
}

/// Maps an index string to `(symbol slot, stride)` pairs for offset computation.
fn addressing(
    index: &IndexString,
    slots: &BTreeMap<IndexSymbol, usize>,
    shape: &Shape,
) -> Vec<(usize, usize)> {
    index
        .iter()
        .zip(shape.strides())
        .map(|(s, stride)| (slots[s], stride))
        .collect()
}

fn contract<S: Semiring>(
    format: &FormatString,
    args: &[Tensor<S::Elem>],
    sr: &S,
    path: &[usize],
) -> Result<(Tensor<S::Elem>, EinsumStats), EvalError> {
    let shapes: Vec<Shape> = args.iter().map(|t| t.shape().clone()).collect();
    let env = format_axes(format, &shapes, path)?;

    let slots: BTreeMap<IndexSymbol, usize> =
        env.0.keys().enumerate().map(|(k, &s)| (s, k)).collect();
    let dims: Vec<usize> = env.0.values().copied().collect();
    let out_shape = env
        .shape_of(&format.output)
        .expect("output symbols are bound after validation");

    let operand_addr: Vec<Vec<(usize, usize)>> = format
        .inputs
        .iter()
        .zip(&shapes)
        .map(|(index, shape)| addressing(index, &slots, shape))
        .collect();
    let out_addr = addressing(&format.output, &slots, &out_shape);

    // Positions no global position projects onto stay at zero.
    let mut out = Tensor::filled(out_shape, sr.zero());
    let mut coords = vec![0usize; dims.len()];
    let mut positions = 0usize;
    loop {
        positions += 1;
        let mut product = sr.one();
        for (arg, addr) in args.iter().zip(&operand_addr) {
            let offset: usize = addr
                .iter()
                .map(|&(slot, stride)| coords[slot] * stride)
                .sum();
            product = sr.mul(&product, &arg.data()[offset]);
        }
        let offset: usize = out_addr
            .iter()
            .map(|&(slot, stride)| coords[slot] * stride)
            .sum();
        let entry = &mut out.data_mut()[offset];
        *entry = sr.add(entry, &product);

        // Advance the odometer; last symbol fastest.
        let mut k = dims.len();
        loop {
            if k == 0 {
                return Ok((out, EinsumStats { positions }));
            }
            k -= 1;
            coords[k] += 1;
            if coords[k] < dims[k] {
                break;
            }
            coords[k] = 0;
        }
    }
}

/// Evaluates an expression bottom-up.
pub fn eval<S: Semiring>(
    expr: &Expr,
    bindings: &Bindings<S::Elem>,
    sr: &S,
) -> Result<Tensor<S::Elem>, EvalError> {
    eval_at(expr, bindings, sr, &mut Vec::new())
}

fn eval_at<S: Semiring>(
    expr: &Expr,
    bindings: &Bindings<S::Elem>,
    sr: &S,
    path: &mut Vec<usize>,
) -> Result<Tensor<S::Elem>, EvalError> {
    Ok(match expr {
        Expr::Named(name) => bindings
            .get(name)
            .cloned()
            .ok_or_else(|| Violation::UnboundName {
                path: path.clone(),
                name: name.clone(),
            })?,
        Expr::Delta { dims } => {
            check_dims(dims, path)?;
            materialize_delta(sr, dims)
        }
        Expr::Ones(shape) => {
            check_dims(shape, path)?;
            materialize_ones(sr, shape)
        }
        Expr::Scalar(lit) => Tensor::scalar(sr.from_literal(lit)?),
        Expr::Fill { value, shape } => {
            check_dims(shape, path)?;
            Tensor::filled(shape.clone(), sr.from_literal(value)?)
        }
        Expr::Einsum(node) => {
            let args = node
                .args
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    path.push(k);
                    let t = eval_at(a, bindings, sr, path);
                    path.pop();
                    t
                })
                .collect::<Result<Vec<_>, _>>()?;
            contract(&node.format, &args, sr, path)?.0
        }
        Expr::Aggregate(terms) => {
            let mut acc: Option<Tensor<S::Elem>> = None;
            for (k, term) in terms.iter().enumerate() {
                path.push(k);
                let t = eval_at(term, bindings, sr, path);
                path.pop();
                let t = t?;
                acc = Some(match acc {
                    None => t,
                    Some(mut a) => {
                        if a.shape() != t.shape() {
                            return Err(Violation::AggregateShape {
                                path: path.clone(),
                                term: k,
                                expected: a.shape().clone(),
                                found: t.shape().clone(),
                            }
                            .into());
                        }
                        for (x, y) in a.data_mut().iter_mut().zip(t.data()) {
                            *x = sr.add(x, y);
                        }
                        a
                    }
                });
            }
            acc.ok_or_else(|| Violation::EmptyAggregate { path: path.clone() })?
        }
    })
}

fn check_dims(shape: &Shape, path: &[usize]) -> Result<(), Violation> {
    if shape.dims().contains(&0) {
        return Err(Violation::ZeroLength {
            path: path.to_vec(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expression, parse_format};
    use crate::semiring::{Arithmetic, MinPlus, Tropical};

    fn mat(rows: usize, cols: usize, data: Vec<i64>) -> Tensor<i64> {
        Tensor::new(Shape(vec![rows, cols]), data).unwrap()
    }

    fn l(c: char) -> IndexSymbol {
        IndexSymbol::Letter(c)
    }

    #[test]
    fn projection() {
        let g = GlobalPosition([(l('i'), 2), (l('j'), 1)].into_iter().collect());
        assert_eq!(
            g.project(&IndexString::from_letters("jij")).unwrap(),
            vec![1, 2, 1]
        );
        assert_eq!(
            g.project(&IndexString::empty()).unwrap(),
            Vec::<usize>::new()
        );
        let g = GlobalPosition([(l('i'), 3)].into_iter().collect());
        assert_eq!(
            g.project(&IndexString::from_letters("ii")).unwrap(),
            vec![3, 3]
        );
        assert_eq!(
            g.project(&IndexString::from_letters("k")),
            Err(EvalError::UnassignedSymbol(l('k')))
        );
    }

    #[test]
    fn global_positions_enumerate_the_product() {
        let env = AxisEnvironment([(l('i'), 2), (l('j'), 3)].into_iter().collect());
        let all: Vec<_> = global_positions(&env).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[1].0[&l('j')], 1);
        assert_eq!(global_positions(&AxisEnvironment::default()).count(), 1);
    }

    /// Two-loop matrix product, independent of the evaluator.
    fn matmul_oracle(a: &Tensor<i64>, b: &Tensor<i64>) -> Tensor<i64> {
        let (n, m, p) = (
            a.shape().dims()[0],
            a.shape().dims()[1],
            b.shape().dims()[1],
        );
        Tensor::from_fn(Shape(vec![n, p]), |pos| {
            (0..m)
                .map(|j| a.get(&[pos[0], j]).unwrap() * b.get(&[j, pos[1]]).unwrap())
                .sum()
        })
    }

    #[test]
    fn matrix_product() {
        let a = mat(2, 2, vec![1, 2, 3, 4]);
        let b = mat(2, 2, vec![5, 6, 7, 8]);
        let f = parse_format("ij,jk->ik").unwrap();
        let (c, stats) = eval_einsum_with_stats(&f, &[a.clone(), b.clone()], &Arithmetic).unwrap();
        assert_eq!(c, matmul_oracle(&a, &b));
        assert_eq!(c.data(), &[19, 22, 43, 50]);
        assert_eq!(stats.positions, 8);
    }

    #[test]
    fn diag_broadcast_fills_zeros() {
        let v = Tensor::new(Shape(vec![2]), vec![7, 9]).unwrap();
        let f = parse_format("i->ii").unwrap();
        let d = eval_einsum(&f, &[v], &Arithmetic).unwrap();
        assert_eq!(d.data(), &[7, 0, 0, 9]);
    }

    #[test]
    fn tropical_matrix_product() {
        use Tropical::{Finite as F, Infinity as Inf};
        let a = Tensor::new(Shape(vec![2, 2]), vec![F(0), F(1), Inf, F(0)]).unwrap();
        let b = Tensor::new(Shape(vec![2, 2]), vec![F(0), F(5), F(2), F(0)]).unwrap();
        // Brute force over the 8 (i, j, k) triples.
        let mut expected = vec![Inf; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let term = MinPlus.mul(a.get(&[i, j]).unwrap(), b.get(&[j, k]).unwrap());
                    expected[i * 2 + k] = MinPlus.add(&expected[i * 2 + k], &term);
                }
            }
        }
        assert_eq!(expected, vec![F(0), F(1), F(2), F(0)]);
        let f = parse_format("ij,jk->ik").unwrap();
        let c = eval_einsum(&f, &[a, b], &MinPlus).unwrap();
        assert_eq!(c.data(), &expected[..]);
    }

    #[test]
    fn aggregate_and_scalars() {
        let mut b = Bindings::new();
        b.insert("S".into(), mat(1, 1, vec![1]));
        b.insert("T".into(), mat(1, 1, vec![1]));
        let e = parse_expression("(S + T)").unwrap();
        assert_eq!(eval(&e, &b, &Arithmetic).unwrap().data(), &[2]);
        let e = parse_expression("#( ->; 5)").unwrap();
        assert_eq!(eval(&e, &b, &Arithmetic).unwrap(), Tensor::scalar(5));
    }

    #[test]
    fn aggregate_shape_mismatch() {
        let mut b = Bindings::new();
        b.insert("S".into(), mat(1, 1, vec![1]));
        b.insert("T".into(), mat(1, 2, vec![1, 1]));
        let e = parse_expression("(S + T)").unwrap();
        assert!(matches!(
            eval(&e, &b, &Arithmetic),
            Err(EvalError::Invalid(Violation::AggregateShape { .. }))
        ));
    }

    #[test]
    fn literal_outside_semiring() {
        let e = parse_expression("#(->; 2.5)").unwrap();
        assert!(matches!(
            eval(&e, &Bindings::new(), &Arithmetic),
            Err(EvalError::Literal(_))
        ));
    }

    #[test]
    fn delta_leaf_in_expression() {
        let e = parse_expression("#(ij,jk->ik; delta(1; 2), A)").unwrap();
        let mut b = Bindings::new();
        b.insert("A".into(), mat(2, 2, vec![1, 2, 3, 4]));
        assert_eq!(eval(&e, &b, &Arithmetic).unwrap(), b["A"]);
    }
}
