//! Consistent axis lengths for the named tensors of one or more expressions.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::EquivalenceError;
use crate::expr::Expr;
use crate::rewrite::UnionFind;
use crate::symbol::IndexSymbol;
use crate::tensor::Shape;
use crate::validate::ShapeEnv;

use super::Dims;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    /// Axis of a named tensor.
    Name(String, usize),
    /// Symbol of the einsum node at a path of expression `side`.
    Sym(usize, Vec<usize>, IndexSymbol),
    /// Output axis of the subexpression at a path of expression `side`.
    Out(usize, Vec<usize>, usize),
}

/// Axis-length equations: every symbol ties the axes it annotates, aggregate
/// terms tie their axes, constants fix theirs. Solved with union-find; each
/// unconstrained class is sampled per trial.
#[derive(Clone, Debug)]
pub struct ShapeProblem {
    axes: BTreeMap<String, Vec<usize>>,
    fixed: BTreeMap<usize, usize>,
    free: Vec<usize>,
    range: (usize, usize),
}

#[derive(Default)]
struct Equations {
    links: Vec<(Var, Var)>,
    fixes: Vec<(Var, usize)>,
}

fn conflict(message: String) -> EquivalenceError {
    EquivalenceError::Shapes(message)
}

fn known_order(expr: &Expr, orders: &BTreeMap<String, usize>) -> Option<usize> {
    match expr {
        Expr::Named(n) => orders.get(n).copied(),
        Expr::Delta { dims } => Some(2 * dims.order()),
        Expr::Ones(s) | Expr::Fill { shape: s, .. } => Some(s.order()),
        Expr::Scalar(_) => Some(0),
        Expr::Einsum(e) => Some(e.format.output.len()),
        Expr::Aggregate(terms) => terms.iter().find_map(|t| known_order(t, orders)),
    }
}

/// Propagates expected orders down to named leaves. Returns whether anything new was learnt.
fn collect_orders(
    expr: &Expr,
    expected: Option<usize>,
    orders: &mut BTreeMap<String, usize>,
) -> Result<bool, EquivalenceError> {
    match expr {
        Expr::Named(n) => match (expected, orders.get(n)) {
            (Some(k), Some(&o)) if k != o => Err(conflict(format!(
                "tensor `{n}` is used with orders {o} and {k}"
            ))),
            (Some(k), None) => {
                orders.insert(n.clone(), k);
                Ok(true)
            }
            _ => Ok(false),
        },
        Expr::Einsum(e) => {
            let mut changed = false;
            for (s, a) in e.operands() {
                changed |= collect_orders(a, Some(s.len()), orders)?;
            }
            Ok(changed)
        }
        Expr::Aggregate(terms) => {
            let expected = expected.or_else(|| known_order(expr, orders));
            let mut changed = false;
            for t in terms {
                changed |= collect_orders(t, expected, orders)?;
            }
            Ok(changed)
        }
        _ => Ok(false),
    }
}

fn equations(
    expr: &Expr,
    side: usize,
    path: &mut Vec<usize>,
    orders: &BTreeMap<String, usize>,
    eq: &mut Equations,
    dims: &Dims,
) {
    let out = |path: &[usize], k: usize| Var::Out(side, path.to_vec(), k);
    match expr {
        Expr::Named(n) => {
            for k in 0..orders.get(n).copied().unwrap_or(0) {
                eq.links.push((out(path, k), Var::Name(n.clone(), k)));
            }
        }
        Expr::Delta { dims: d } => {
            let o = d.order();
            for k in 0..2 * o {
                eq.fixes.push((out(path, k), d.dims()[k % o]));
            }
        }
        Expr::Ones(s) | Expr::Fill { shape: s, .. } => {
            for (k, &len) in s.dims().iter().enumerate() {
                eq.fixes.push((out(path, k), len));
            }
        }
        Expr::Scalar(_) => {}
        Expr::Einsum(e) => {
            let sym = |path: &[usize], s: IndexSymbol| Var::Sym(side, path.to_vec(), s);
            for s in e.symbols() {
                if let Some(&len) = dims.symbols.get(&s) {
                    eq.fixes.push((sym(path, s), len));
                }
            }
            for (k, &s) in e.format.output.iter().enumerate() {
                eq.links.push((out(path, k), sym(path, s)));
            }
            for (j, (index, arg)) in e.operands().enumerate() {
                path.push(j);
                for (k, &s) in index.iter().enumerate() {
                    eq.links
                        .push((out(path, k), sym(&path[..path.len() - 1], s)));
                }
                equations(arg, side, path, orders, eq, dims);
                path.pop();
            }
        }
        Expr::Aggregate(terms) => {
            let order = known_order(expr, orders).unwrap_or(0);
            for (j, t) in terms.iter().enumerate() {
                path.push(j);
                for k in 0..order {
                    eq.links
                        .push((out(path, k), out(&path[..path.len() - 1], k)));
                }
                equations(t, side, path, orders, eq, dims);
                path.pop();
            }
        }
    }
}

impl ShapeProblem {
    pub fn new(exprs: &[&Expr], dims: &Dims) -> Result<Self, EquivalenceError> {
        let (lo, hi) = dims.range;
        if lo == 0 || lo > hi {
            return Err(conflict(format!("invalid length range {lo}..={hi}")));
        }
        let mut orders: BTreeMap<String, usize> = dims
            .shapes
            .iter()
            .map(|(n, s)| (n.clone(), s.order()))
            .collect();
        loop {
            let root = exprs.iter().find_map(|e| known_order(e, &orders));
            let mut changed = false;
            for e in exprs {
                changed |= collect_orders(e, root, &mut orders)?;
            }
            if !changed {
                break;
            }
        }
        for e in exprs {
            for n in e.names() {
                if !orders.contains_key(&n) {
                    return Err(conflict(format!(
                        "cannot determine the order of tensor `{n}`"
                    )));
                }
            }
        }

        let mut eq = Equations::default();
        for (side, e) in exprs.iter().enumerate() {
            equations(e, side, &mut Vec::new(), &orders, &mut eq, dims);
        }
        let orders_of_roots: Vec<Option<usize>> =
            exprs.iter().map(|e| known_order(e, &orders)).collect();
        for side in 1..exprs.len() {
            if let (Some(a), Some(b)) = (orders_of_roots[0], orders_of_roots[side]) {
                if a == b {
                    for k in 0..a {
                        eq.links
                            .push((Var::Out(0, vec![], k), Var::Out(side, vec![], k)));
                    }
                }
            }
        }
        for (n, s) in &dims.shapes {
            for (k, &len) in s.dims().iter().enumerate() {
                eq.fixes.push((Var::Name(n.clone(), k), len));
            }
        }
        for (n, &o) in &orders {
            for k in 0..o {
                // Every axis of every named tensor gets a variable.
                eq.links
                    .push((Var::Name(n.clone(), k), Var::Name(n.clone(), k)));
            }
        }

        let mut ids: BTreeMap<Var, usize> = BTreeMap::new();
        let id = |v: &Var, ids: &mut BTreeMap<Var, usize>| {
            let next = ids.len();
            *ids.entry(v.clone()).or_insert(next)
        };
        let links: Vec<(usize, usize)> = eq
            .links
            .iter()
            .map(|(a, b)| (id(a, &mut ids), id(b, &mut ids)))
            .collect();
        let fixes: Vec<(usize, usize)> = eq
            .fixes
            .iter()
            .map(|(v, len)| (id(v, &mut ids), *len))
            .collect();
        let mut uf = UnionFind::new(ids.len());
        for (a, b) in links {
            uf.union(a, b);
        }
        let mut fixed = BTreeMap::new();
        for (v, len) in fixes {
            let root = uf.find(v);
            if let Some(&prev) = fixed.get(&root) {
                if prev != len {
                    return Err(conflict(format!(
                        "an axis must have both length {prev} and length {len}"
                    )));
                }
            }
            fixed.insert(root, len);
        }
        let mut axes = BTreeMap::new();
        let mut free = Vec::new();
        for (n, &o) in &orders {
            let classes: Vec<usize> = (0..o)
                .map(|k| uf.find(ids[&Var::Name(n.clone(), k)]))
                .collect();
            for &c in &classes {
                if !fixed.contains_key(&c) && !free.contains(&c) {
                    free.push(c);
                }
            }
            axes.insert(n.clone(), classes);
        }
        Ok(ShapeProblem {
            axes,
            fixed,
            free,
            range: dims.range,
        })
    }

    /// Shapes for one trial.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ShapeEnv {
        let mut lengths = self.fixed.clone();
        for &c in &self.free {
            lengths.insert(c, rng.gen_range(self.range.0..=self.range.1));
        }
        self.axes
            .iter()
            .map(|(n, classes)| {
                (
                    n.clone(),
                    Shape(classes.iter().map(|c| lengths[c]).collect()),
                )
            })
            .collect()
    }

    /// Whether every axis length is determined without sampling.
    pub fn is_determined(&self) -> bool {
        self.free.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn l(c: char) -> IndexSymbol {
        IndexSymbol::Letter(c)
    }

    #[test]
    fn symbols_tie_axes() {
        let e = parse_expression("#(ij,jk,k->i; A, B, v)").unwrap();
        let p = ShapeProblem::new(&[&e], &Dims::range(1, 4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = p.sample(&mut rng);
            assert_eq!(s["A"].dims()[1], s["B"].dims()[0]);
            assert_eq!(s["B"].dims()[1], s["v"].dims()[0]);
        }
    }

    #[test]
    fn symbol_lengths() {
        let e = parse_expression("#(ij,jk->ik; A, B)").unwrap();
        let dims = Dims::symbols(
            [(l('i'), 2), (l('j'), 3), (l('k'), 4)]
                .into_iter()
                .collect(),
        );
        let p = ShapeProblem::new(&[&e], &dims).unwrap();
        assert!(p.is_determined());
        let s = p.sample(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(s["A"], Shape(vec![2, 3]));
        assert_eq!(s["B"], Shape(vec![3, 4]));
    }

    #[test]
    fn nested_and_aggregated() {
        let e = parse_expression("#(ij,j->i; A, (#(jk,k->j; B, v) + w))").unwrap();
        let p = ShapeProblem::new(&[&e], &Dims::range(2, 4)).unwrap();
        let s = p.sample(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(s["A"].dims()[1], s["B"].dims()[0]);
        assert_eq!(s["w"].dims()[0], s["B"].dims()[0]);
    }

    #[test]
    fn constants_fix_lengths() {
        let e = parse_expression("#(ij,j->i; A, ones(5))").unwrap();
        let p = ShapeProblem::new(&[&e], &Dims::range(1, 2)).unwrap();
        let s = p.sample(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(s["A"].dims()[1], 5);
        let bad = parse_expression("#(ij,j,j->i; A, ones(5), ones(4))").unwrap();
        assert!(ShapeProblem::new(&[&bad], &Dims::range(1, 2)).is_err());
    }

    #[test]
    fn roots_are_tied() {
        let e = parse_expression("#(ij,jk->ik; A, B)").unwrap();
        let f = parse_expression("C").unwrap();
        let p = ShapeProblem::new(&[&e, &f], &Dims::range(1, 4)).unwrap();
        let s = p.sample(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(s["C"].dims(), &[s["A"].dims()[0], s["B"].dims()[1]]);
    }

    #[test]
    fn unknown_order() {
        let e = parse_expression("A").unwrap();
        assert!(ShapeProblem::new(&[&e], &Dims::default()).is_err());
    }
}
