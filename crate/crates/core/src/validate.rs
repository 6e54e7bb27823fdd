//! Shape inference and the validity constraints on einsum expressions.
//!
//! An expression is valid when
//! - every einsum has as many input strings as arguments, and each string
//!   is as long as its argument's order;
//! - every symbol annotates axes of a single length within its node;
//! - every output symbol appears in some input string;
//! - the terms of each aggregate share one shape.
//!
//! Symbol scope is a single einsum node: the same letter in a nested node
//! is an unrelated symbol.

use std::collections::BTreeMap;

use crate::error::Violation;
use crate::expr::{Einsum, Expr};
use crate::symbol::{FormatString, IndexString, IndexSymbol};
use crate::tensor::Shape;

/// Shapes of named tensors.
pub type ShapeEnv = BTreeMap<String, Shape>;

/// The axis length of every symbol in one einsum node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxisEnvironment(pub BTreeMap<IndexSymbol, usize>);

impl AxisEnvironment {
    pub fn get(&self, s: &IndexSymbol) -> Option<usize> {
        self.0.get(s).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The shape an index string selects.
    pub fn shape_of(&self, index: &IndexString) -> Option<Shape> {
        index
            .iter()
            .map(|s| self.get(s))
            .collect::<Option<Vec<_>>>()
            .map(Shape)
    }

    /// Number of global positions: the product of all axis lengths.
    pub fn position_count(&self) -> usize {
        self.0.values().product()
    }
}

/// Outcome of [`validate`]: every violation found, and the inferred shape
/// when it could be determined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
    pub shape: Option<Shape>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every constraint, collecting all violations.
pub fn validate(expr: &Expr, bindings: &ShapeEnv) -> ValidityReport {
    run(expr, Some(bindings))
}

/// Checks the constraints that do not depend on tensor shapes. Named tensors
/// are treated as having unknown shape.
pub fn validate_structure(expr: &Expr) -> ValidityReport {
    run(expr, None)
}

fn run(expr: &Expr, bindings: Option<&ShapeEnv>) -> ValidityReport {
    let mut violations = Vec::new();
    let shape = check(expr, bindings, &mut Vec::new(), &mut violations);
    ValidityReport { violations, shape }
}

/// The shape of `expr`, or the first violation encountered.
pub fn infer_shape(expr: &Expr, bindings: &ShapeEnv) -> Result<Shape, Violation> {
    let report = validate(expr, bindings);
    match report.violations.into_iter().next() {
        Some(v) => Err(v),
        None => Ok(report.shape.expect("valid expressions have a shape")),
    }
}

/// The axis environment of the root einsum node (empty for a leaf or an
/// aggregate). The whole expression is validated along the way.
pub fn infer_axes(expr: &Expr, bindings: &ShapeEnv) -> Result<AxisEnvironment, Violation> {
    infer_shape(expr, bindings)?;
    match expr {
        Expr::Einsum(node) => {
            let shapes: Vec<Shape> = node
                .args
                .iter()
                .map(|a| infer_shape(a, bindings))
                .collect::<Result<_, _>>()?;
            node_axes(node, &shapes, &[])
        }
        _ => Ok(AxisEnvironment::default()),
    }
}

/// The axis environment of one node given its arguments' shapes.
pub fn node_axes(
    node: &Einsum,
    arg_shapes: &[Shape],
    path: &[usize],
) -> Result<AxisEnvironment, Violation> {
    format_axes(&node.format, arg_shapes, path)
}

/// The axis environment of a format applied to arguments of the given shapes.
pub fn format_axes(
    format: &FormatString,
    arg_shapes: &[Shape],
    path: &[usize],
) -> Result<AxisEnvironment, Violation> {
    let mut violations = Vec::new();
    let shapes: Vec<Option<Shape>> = arg_shapes.iter().cloned().map(Some).collect();
    let env = einsum_axes(format, &shapes, path, &mut violations);
    match violations.into_iter().next() {
        Some(v) => Err(v),
        None => Ok(env),
    }
}

/// Axis lengths of a node whose arguments have the given (possibly unknown)
/// shapes. Arity, axis-length and output-binding violations are recorded.
fn einsum_axes(
    format: &FormatString,
    shapes: &[Option<Shape>],
    path: &[usize],
    violations: &mut Vec<Violation>,
) -> AxisEnvironment {
    if shapes.is_empty() {
        violations.push(Violation::EmptyEinsum {
            path: path.to_vec(),
        });
    }
    if format.arity() != shapes.len() {
        violations.push(Violation::ArgumentCount {
            path: path.to_vec(),
            strings: format.arity(),
            args: shapes.len(),
        });
    }
    let mut env = BTreeMap::new();
    for (operand, (index, shape)) in format.inputs.iter().zip(shapes).enumerate() {
        let Some(shape) = shape else { continue };
        if index.len() != shape.order() {
            violations.push(Violation::ArityMismatch {
                path: path.to_vec(),
                operand,
                index_len: index.len(),
                order: shape.order(),
            });
            continue;
        }
        for (&symbol, &d) in index.iter().zip(shape.dims()) {
            match env.get(&symbol) {
                Some(&first) if first != d => violations.push(Violation::AxisMismatch {
                    path: path.to_vec(),
                    symbol,
                    first,
                    second: d,
                }),
                Some(_) => {}
                None => {
                    env.insert(symbol, d);
                }
            }
        }
    }
    for symbol in format.unbound_output_symbols() {
        violations.push(Violation::UnboundOutput {
            path: path.to_vec(),
            symbol,
        });
    }
    AxisEnvironment(env)
}

fn check(
    expr: &Expr,
    bindings: Option<&ShapeEnv>,
    path: &mut Vec<usize>,
    violations: &mut Vec<Violation>,
) -> Option<Shape> {
    match expr {
        Expr::Named(name) => match bindings {
            Some(b) => match b.get(name) {
                Some(shape) => Some(shape.clone()),
                None => {
                    violations.push(Violation::UnboundName {
                        path: path.clone(),
                        name: name.clone(),
                    });
                    None
                }
            },
            None => None,
        },
        Expr::Delta { dims } => {
            let shape = leaf_shape(dims, path, violations)?;
            let mut doubled = shape.0.clone();
            doubled.extend_from_slice(&shape.0);
            Some(Shape(doubled))
        }
        Expr::Ones(shape) | Expr::Fill { shape, .. } => leaf_shape(shape, path, violations),
        Expr::Scalar(_) => Some(Shape::scalar()),
        Expr::Einsum(node) => {
            let shapes: Vec<Option<Shape>> = node
                .args
                .iter()
                .enumerate()
                .map(|(k, arg)| {
                    path.push(k);
                    let s = check(arg, bindings, path, violations);
                    path.pop();
                    s
                })
                .collect();
            let env = einsum_axes(&node.format, &shapes, path, violations);
            env.shape_of(&node.format.output)
        }
        Expr::Aggregate(terms) => {
            if terms.is_empty() {
                violations.push(Violation::EmptyAggregate { path: path.clone() });
                return None;
            }
            let mut expected: Option<Shape> = None;
            for (term, t) in terms.iter().enumerate() {
                path.push(term);
                let s = check(t, bindings, path, violations);
                path.pop();
                match (&expected, s) {
                    (None, found) => expected = found,
                    (Some(e), Some(found)) if *e != found => {
                        violations.push(Violation::AggregateShape {
                            path: path.clone(),
                            term,
                            expected: e.clone(),
                            found,
                        });
                    }
                    _ => {}
                }
            }
            expected
        }
    }
}

fn leaf_shape(shape: &Shape, path: &[usize], violations: &mut Vec<Violation>) -> Option<Shape> {
    if shape.dims().contains(&0) {
        violations.push(Violation::ZeroLength {
            path: path.to_vec(),
        });
        return None;
    }
    Some(shape.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;

    fn env(pairs: &[(&str, &[usize])]) -> ShapeEnv {
        pairs
            .iter()
            .map(|(n, d)| (n.to_string(), Shape(d.to_vec())))
            .collect()
    }

    fn l(c: char) -> IndexSymbol {
        IndexSymbol::Letter(c)
    }

    #[test]
    fn matrix_product_axes() {
        let e = parse_expression("#(ij,jk->ik; A, B)").unwrap();
        let axes = infer_axes(&e, &env(&[("A", &[2, 3]), ("B", &[3, 4])])).unwrap();
        assert_eq!(
            axes.0,
            [(l('i'), 2), (l('j'), 3), (l('k'), 4)]
                .into_iter()
                .collect()
        );
        assert_eq!(axes.position_count(), 24);
    }

    #[test]
    fn axis_mismatch() {
        let e = parse_expression("#(ij,jk->ik; A, B)").unwrap();
        let err = infer_axes(&e, &env(&[("A", &[2, 3]), ("B", &[5, 4])])).unwrap_err();
        assert_eq!(
            err,
            Violation::AxisMismatch {
                path: vec![],
                symbol: l('j'),
                first: 3,
                second: 5
            }
        );
    }

    #[test]
    fn diag_broadcast_axes() {
        let e = parse_expression("#(i->ii; v)").unwrap();
        let b = env(&[("v", &[4])]);
        assert_eq!(
            infer_axes(&e, &b).unwrap().0,
            [(l('i'), 4)].into_iter().collect()
        );
        assert_eq!(infer_shape(&e, &b).unwrap(), Shape(vec![4, 4]));
    }

    #[test]
    fn arity_and_unbound_name() {
        let e = parse_expression("#(ij->i; v)").unwrap();
        assert!(matches!(
            infer_axes(&e, &env(&[("v", &[3])])),
            Err(Violation::ArityMismatch {
                index_len: 2,
                order: 1,
                ..
            })
        ));
        assert!(matches!(
            infer_axes(&e, &env(&[])),
            Err(Violation::UnboundName { .. })
        ));
    }

    #[test]
    fn unbound_output_is_constraint_three() {
        let e = parse_expression("#(ij->ik; A)").unwrap();
        let report = validate(&e, &env(&[("A", &[2, 2])]));
        assert_eq!(
            report.violations,
            vec![Violation::UnboundOutput {
                path: vec![],
                symbol: l('k')
            }]
        );
        assert!(report.violations[0].to_string().contains("constraint III"));
        assert!(!validate_structure(&e).is_valid());
    }

    #[test]
    fn inner_product_valid() {
        let e = parse_expression("#(i,i->; x, y)").unwrap();
        let r = validate(&e, &env(&[("x", &[3]), ("y", &[3])]));
        assert!(r.is_valid());
        assert_eq!(r.shape, Some(Shape::scalar()));
    }

    #[test]
    fn scalar_einsum_valid() {
        let e = parse_expression("#(->; c)").unwrap();
        assert!(validate(&e, &env(&[("c", &[])])).is_valid());
    }

    #[test]
    fn aggregate_shapes_must_agree() {
        let e = parse_expression("(A + B)").unwrap();
        assert!(validate(&e, &env(&[("A", &[2]), ("B", &[2])])).is_valid());
        let r = validate(&e, &env(&[("A", &[2]), ("B", &[3])]));
        assert!(matches!(
            r.violations[..],
            [Violation::AggregateShape { term: 1, .. }]
        ));
    }

    #[test]
    fn scopes_are_per_node() {
        // The inner `j` has length 4 while the outer `j` has length 3.
        let e = parse_expression("#(ij,i->j; A, #(j->j; v))").unwrap();
        let b = env(&[("A", &[2, 3]), ("v", &[2])]);
        assert_eq!(infer_shape(&e, &b).unwrap(), Shape(vec![3]));
    }

    #[test]
    fn all_violations_collected() {
        let e = parse_expression("#(ij,jk->iz; A, #(q->qp; v))").unwrap();
        let r = validate(&e, &env(&[("A", &[2, 3])]));
        // Unbound output z in root, unbound name v and unbound output p in the nested node.
        assert_eq!(r.violations.len(), 3, "{:?}", r.violations);
    }

    #[test]
    fn delta_and_constant_shapes() {
        let b = env(&[]);
        assert_eq!(
            infer_shape(&Expr::delta(&[2, 3]), &b).unwrap(),
            Shape(vec![2, 3, 2, 3])
        );
        assert_eq!(infer_shape(&Expr::ones(&[]), &b).unwrap(), Shape::scalar());
    }
}
