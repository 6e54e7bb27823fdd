//! Random valid expressions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Einsum, Expr};
use crate::semiring::Literal;
use crate::symbol::{FormatString, IndexString, IndexSymbol};
use crate::tensor::Shape;
use crate::validate::ShapeEnv;

/// Knobs for [`expression_generator`]. Probabilities are per decision.
#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    /// Upper bound on the number of leaves.
    pub size: usize,
    /// Symbols each einsum node draws from.
    pub symbols: Vec<IndexSymbol>,
    /// Inclusive range of axis lengths.
    pub dims: (usize, usize),
    pub seed: u64,
    /// Deepest level at which an einsum or aggregate may still appear.
    pub max_depth: usize,
    pub max_operands: usize,
    /// An operand is itself an einsum node.
    pub p_nest: f64,
    /// A symbol is reused within an index string.
    pub p_duplicate: f64,
    pub p_delta: f64,
    pub p_ones: f64,
    pub p_fill: f64,
    pub p_scalar: f64,
    pub p_aggregate: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            size: 6,
            symbols: "ijkl".chars().map(IndexSymbol::Letter).collect(),
            dims: (1, 3),
            seed: 0,
            max_depth: 2,
            max_operands: 3,
            p_nest: 0.3,
            p_duplicate: 0.2,
            p_delta: 0.1,
            p_ones: 0.1,
            p_fill: 0.05,
            p_scalar: 0.05,
            p_aggregate: 0.1,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            ..GeneratorConfig::default()
        }
    }
}

/// A random expression satisfying constraints I–III, with the shapes of the
/// named tensors (`T0`, `T1`, …) it uses. The root is always an einsum node.
pub fn expression_generator(config: &GeneratorConfig) -> (Expr, ShapeEnv) {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        cfg: config,
        shapes: ShapeEnv::new(),
        leaves: 0,
    };
    let order = g.rng.gen_range(0..=2);
    let shape: Vec<usize> = (0..order).map(|_| g.length()).collect();
    let root = g.node(&shape, 0);
    (root, g.shapes)
}

struct Generator<'a> {
    rng: ChaCha8Rng,
    cfg: &'a GeneratorConfig,
    shapes: ShapeEnv,
    leaves: usize,
}

impl Generator<'_> {
    fn length(&mut self) -> usize {
        self.rng.gen_range(self.cfg.dims.0..=self.cfg.dims.1)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    fn small_literal(&mut self) -> Literal {
        Literal::Int(self.rng.gen_range(0..=3))
    }

    fn expr(&mut self, shape: &[usize], depth: usize) -> Expr {
        if self.leaves < self.cfg.size && depth < self.cfg.max_depth {
            if self.chance(self.cfg.p_nest) {
                return self.node(shape, depth);
            }
            if self.chance(self.cfg.p_aggregate) {
                let terms = (0..2).map(|_| self.expr(shape, depth + 1)).collect();
                return Expr::Aggregate(terms);
            }
        }
        self.leaf(shape)
    }

    fn leaf(&mut self, shape: &[usize]) -> Expr {
        self.leaves += 1;
        let half = shape.len() / 2;
        if shape.len().is_multiple_of(2) && shape[..half] == shape[half..] && self.chance(self.cfg.p_delta) {
            return Expr::delta(&shape[..half]);
        }
        if self.chance(self.cfg.p_ones) {
            return Expr::ones(shape);
        }
        if self.chance(self.cfg.p_fill) {
            let value = self.small_literal();
            return Expr::Fill {
                value,
                shape: Shape(shape.to_vec()),
            };
        }
        if shape.is_empty() && self.chance(self.cfg.p_scalar) {
            return Expr::Scalar(self.small_literal());
        }
        let name = format!("T{}", self.shapes.len());
        self.shapes.insert(name.clone(), Shape(shape.to_vec()));
        Expr::Named(name)
    }

    /// An einsum node whose output has the given shape.
    fn node(&mut self, shape: &[usize], depth: usize) -> Expr {
        let mut pool = self.cfg.symbols.clone();
        pool.shuffle(&mut self.rng);
        let mut next_tag = 0u32;
        let mut fresh = |pool: &mut Vec<IndexSymbol>| {
            pool.pop().unwrap_or_else(|| {
                next_tag += 1;
                IndexSymbol::Tag(next_tag - 1)
            })
        };

        let mut scope: Vec<(IndexSymbol, usize)> = Vec::new();
        let mut output = Vec::new();
        for &len in shape {
            let reusable: Vec<IndexSymbol> = scope
                .iter()
                .filter(|(_, l)| *l == len)
                .map(|(s, _)| *s)
                .collect();
            let s = if !reusable.is_empty() && self.chance(self.cfg.p_duplicate) {
                *reusable.choose(&mut self.rng).expect("non-empty")
            } else {
                let s = fresh(&mut pool);
                scope.push((s, len));
                s
            };
            output.push(s);
        }
        for _ in 0..self.rng.gen_range(0..=2) {
            if pool.is_empty() {
                break;
            }
            let len = self.length();
            scope.push((fresh(&mut pool), len));
        }

        let n = self.rng.gen_range(1..=self.cfg.max_operands.max(1));
        let mut inputs: Vec<Vec<IndexSymbol>> = vec![Vec::new(); n];
        for input in inputs.iter_mut() {
            let len = if scope.is_empty() {
                0
            } else {
                self.rng.gen_range(0..=2)
            };
            for _ in 0..len {
                let s = if !input.is_empty() && self.chance(self.cfg.p_duplicate) {
                    *input.choose(&mut self.rng).expect("non-empty")
                } else {
                    scope.choose(&mut self.rng).expect("non-empty").0
                };
                input.push(s);
            }
        }
        // Every symbol in scope is bound by some input.
        for &(s, _) in &scope {
            if !inputs.iter().any(|i| i.contains(&s)) {
                let k = self.rng.gen_range(0..n);
                inputs[k].push(s);
            }
        }

        let length_of = |s: &IndexSymbol| scope.iter().find(|(t, _)| t == s).expect("in scope").1;
        let mut args = Vec::with_capacity(n);
        for input in &inputs {
            let arg_shape: Vec<usize> = input.iter().map(length_of).collect();
            args.push(self.expr(&arg_shape, depth + 1));
        }
        let format = FormatString::new(
            inputs.into_iter().map(IndexString::new).collect(),
            IndexString::new(output),
        );
        Expr::Einsum(Einsum::new(format, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate;

    #[test]
    fn deterministic() {
        let cfg = GeneratorConfig::with_seed(42);
        assert_eq!(expression_generator(&cfg), expression_generator(&cfg));
    }

    #[test]
    fn always_valid() {
        for seed in 0..300 {
            let (e, shapes) = expression_generator(&GeneratorConfig::with_seed(seed));
            let report = validate(&e, &shapes);
            assert!(
                report.is_valid(),
                "seed {seed}: {e}: {:?}",
                report.violations
            );
        }
    }
}
