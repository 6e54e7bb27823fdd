//! The expression tree.

use std::collections::BTreeSet;
use std::fmt;

use crate::semiring::Literal;
use crate::symbol::{FormatString, IndexString, IndexSymbol};
use crate::tensor::Shape;

/// An einsum node `#(I_1,…,I_n -> I; T_1,…,T_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Einsum {
    pub format: FormatString,
    pub args: Vec<Expr>,
}

impl Einsum {
    /// Pairs a format with its arguments. Arity is not checked here; see
    /// [`Einsum::try_new`] or the validator.
    pub fn new(format: FormatString, args: Vec<Expr>) -> Self {
        Einsum { format, args }
    }

    /// Like [`Einsum::new`], but rejects an arity mismatch or zero arguments.
    pub fn try_new(format: FormatString, args: Vec<Expr>) -> Option<Self> {
        (format.arity() == args.len() && !args.is_empty()).then_some(Einsum { format, args })
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Symbols of this node's scope (inputs and output; nested nodes excluded).
    pub fn symbols(&self) -> BTreeSet<IndexSymbol> {
        self.format.all_symbols()
    }

    /// Iterates `(index string, argument)` pairs.
    pub fn operands(&self) -> impl Iterator<Item = (&IndexString, &Expr)> {
        self.format.inputs.iter().zip(&self.args)
    }

    pub fn into_expr(self) -> Expr {
        Expr::Einsum(self)
    }
}

/// An expression in the einsum language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// A tensor bound by name at evaluation time.
    Named(String),
    /// The delta tensor of order `2·dims.len()` over `dims ++ dims`.
    Delta {
        dims: Shape,
    },
    /// The all-ones tensor.
    Ones(Shape),
    /// A scalar constant.
    Scalar(Literal),
    /// A tensor with the same constant entry at every position.
    Fill {
        value: Literal,
        shape: Shape,
    },
    Einsum(Einsum),
    /// Elementwise ⊕ of equally shaped terms.
    Aggregate(Vec<Expr>),
}

/// Address of a subexpression: the argument/term index at each level.
pub type ExprPath = [usize];

impl Expr {
    pub fn named(name: impl Into<String>) -> Self {
        Expr::Named(name.into())
    }

    pub fn einsum(format: FormatString, args: Vec<Expr>) -> Self {
        Expr::Einsum(Einsum::new(format, args))
    }

    pub fn ones(dims: &[usize]) -> Self {
        Expr::Ones(Shape(dims.to_vec()))
    }

    pub fn delta(dims: &[usize]) -> Self {
        Expr::Delta {
            dims: Shape(dims.to_vec()),
        }
    }

    pub fn as_einsum(&self) -> Option<&Einsum> {
        match self {
            Expr::Einsum(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Expr::Einsum(_) | Expr::Aggregate(_))
    }

    /// Leaves whose value is a constant independent of bindings (deltas excluded).
    pub fn is_constant_leaf(&self) -> bool {
        matches!(self, Expr::Ones(_) | Expr::Scalar(_) | Expr::Fill { .. })
    }

    /// The direct children: einsum arguments or aggregate terms.
    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::Einsum(e) => &e.args,
            Expr::Aggregate(terms) => terms,
            _ => &[],
        }
    }

    fn children_mut(&mut self) -> Option<&mut Vec<Expr>> {
        match self {
            Expr::Einsum(e) => Some(&mut e.args),
            Expr::Aggregate(terms) => Some(terms),
            _ => None,
        }
    }

    /// The subexpression at `path`, if it exists.
    pub fn at(&self, path: &ExprPath) -> Option<&Expr> {
        path.iter().try_fold(self, |e, &k| e.children().get(k))
    }

    pub fn at_mut(&mut self, path: &ExprPath) -> Option<&mut Expr> {
        let mut e = self;
        for &k in path {
            e = e.children_mut()?.get_mut(k)?;
        }
        Some(e)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Expr::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Expr::depth).max().unwrap_or(0)
    }

    /// Names of all named leaves, in first-occurrence order, deduplicated.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Named(n) = e {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// True when some node, including the root, satisfies `pred`.
    pub fn any(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().iter().any(|c| c.any(pred))
    }
}

impl From<Einsum> for Expr {
    fn from(e: Einsum) -> Self {
        Expr::Einsum(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render(self))
    }
}

impl fmt::Display for Einsum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_einsum(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Expr {
        Expr::einsum(
            FormatString::from_letters("ij,j", "i"),
            vec![
                Expr::named("A"),
                Expr::einsum(
                    FormatString::from_letters("jk,k", "j"),
                    vec![Expr::named("B"), Expr::named("v")],
                ),
            ],
        )
    }

    #[test]
    fn navigation() {
        let e = chain();
        assert_eq!(e.at(&[1, 0]), Some(&Expr::named("B")));
        assert_eq!(e.at(&[2]), None);
        assert_eq!(e.size(), 5);
        assert_eq!(e.depth(), 3);
        assert_eq!(e.names(), vec!["A", "B", "v"]);
    }

    #[test]
    fn try_new_rejects_bad_arity() {
        let f = FormatString::from_letters("ij,jk", "ik");
        assert!(Einsum::try_new(f.clone(), vec![Expr::named("A")]).is_none());
        assert!(Einsum::try_new(f, vec![Expr::named("A"), Expr::named("B")]).is_some());
    }
}
