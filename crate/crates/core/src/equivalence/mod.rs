//! Randomized and exhaustive equivalence testing.
//!
//! This is falsification, not proof: an `Equal` verdict only means no trial
//! told the two expressions apart.

mod generate;
mod shapes;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::EquivalenceError;
use crate::eval::{eval, Bindings};
use crate::expr::Expr;
use crate::semiring::Semiring;
use crate::symbol::IndexSymbol;
use crate::tensor::{first_difference, Tensor};
use crate::validate::ShapeEnv;

pub use generate::{expression_generator, GeneratorConfig};
pub use shapes::ShapeProblem;

/// How axis lengths are chosen for the named tensors.
///
/// Named shapes in `shapes` are taken as given; axes annotated by a symbol in
/// `symbols` get that length; every other free axis length is drawn
/// uniformly from `range` for each trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dims {
    pub shapes: ShapeEnv,
    pub symbols: BTreeMap<IndexSymbol, usize>,
    pub range: (usize, usize),
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            shapes: ShapeEnv::new(),
            symbols: BTreeMap::new(),
            range: (1, 3),
        }
    }
}

impl Dims {
    pub fn fixed(shapes: ShapeEnv) -> Self {
        Dims {
            shapes,
            ..Dims::default()
        }
    }

    pub fn symbols(symbols: BTreeMap<IndexSymbol, usize>) -> Self {
        Dims {
            symbols,
            ..Dims::default()
        }
    }

    pub fn range(min: usize, max: usize) -> Self {
        Dims {
            range: (min, max),
            ..Dims::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `trials` independent random binding sets.
    Random,
    /// Every tensor assignment with entries drawn from three small values;
    /// only for at most 12 entries in total.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub dims: Dims,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            dims: Dims::default(),
            trials: 32,
            seed: 0,
            mode: Mode::Random,
        }
    }
}

/// Bindings on which the two expressions evaluate differently.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample<T> {
    pub bindings: Bindings<T>,
    /// The trial that found it, counting from 0.
    pub trial: usize,
    pub position: Vec<usize>,
    pub left: T,
    pub right: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<T> {
    Equal,
    Counterexample(Counterexample<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport<T> {
    pub verdict: Verdict<T>,
    pub trials: usize,
    pub semiring: &'static str,
}

impl<T> EquivalenceReport<T> {
    pub fn is_equal(&self) -> bool {
        matches!(self.verdict, Verdict::Equal)
    }

    pub fn counterexample(&self) -> Option<&Counterexample<T>> {
        match &self.verdict {
            Verdict::Counterexample(c) => Some(c),
            Verdict::Equal => None,
        }
    }
}

/// Random number generator of one trial. Each trial has its own ChaCha stream
/// of the master seed, so trials are independent of each other's order.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Compares `left` and `right` on random (or all small) bindings.
pub fn check_equivalence<S: Semiring>(
    left: &Expr,
    right: &Expr,
    config: &CheckConfig,
    sr: &S,
) -> Result<EquivalenceReport<S::Elem>, EquivalenceError> {
    let problem = ShapeProblem::new(&[left, right], &config.dims)?;
    match config.mode {
        Mode::Random => {
            for trial in 0..config.trials {
                let mut rng = trial_rng(config.seed, trial);
                let shapes = problem.sample(&mut rng);
                let bindings = random_bindings(&shapes, sr, &mut rng);
                if let Some(c) = compare(left, right, bindings, trial, sr)? {
                    return Ok(EquivalenceReport {
                        verdict: Verdict::Counterexample(c),
                        trials: trial + 1,
                        semiring: sr.name(),
                    });
                }
            }
            Ok(EquivalenceReport {
                verdict: Verdict::Equal,
                trials: config.trials,
                semiring: sr.name(),
            })
        }
        Mode::Exhaustive => {
            let shapes = problem.sample(&mut trial_rng(config.seed, 0));
            let total: usize = shapes.values().map(|s| s.volume()).sum();
            if total > 12 {
                return Err(EquivalenceError::TooLargeForExhaustive(total));
            }
            let count = 3usize.pow(total as u32);
            for trial in 0..count {
                let mut digits = trial;
                let bindings = shapes
                    .iter()
                    .map(|(name, shape)| {
                        let t = Tensor::from_fn(shape.clone(), |_| {
                            let k = (digits % 3) as u8;
                            digits /= 3;
                            sr.from_small(k)
                        });
                        (name.clone(), t)
                    })
                    .collect();
                if let Some(c) = compare(left, right, bindings, trial, sr)? {
                    return Ok(EquivalenceReport {
                        verdict: Verdict::Counterexample(c),
                        trials: trial + 1,
                        semiring: sr.name(),
                    });
                }
            }
            Ok(EquivalenceReport {
                verdict: Verdict::Equal,
                trials: count,
                semiring: sr.name(),
            })
        }
    }
}

/// Fills every named shape with entries from the semiring's sampling range.
pub fn random_bindings<S: Semiring, R: Rng + ?Sized>(
    shapes: &ShapeEnv,
    sr: &S,
    rng: &mut R,
) -> Bindings<S::Elem> {
    shapes
        .iter()
        .map(|(name, shape)| {
            (
                name.clone(),
                Tensor::from_fn(shape.clone(), |_| sr.sample(rng)),
            )
        })
        .collect()
}

fn compare<S: Semiring>(
    left: &Expr,
    right: &Expr,
    bindings: Bindings<S::Elem>,
    trial: usize,
    sr: &S,
) -> Result<Option<Counterexample<S::Elem>>, EquivalenceError> {
    let a = eval(left, &bindings, sr)?;
    let b = eval(right, &bindings, sr)?;
    if a.shape() != b.shape() {
        return Err(EquivalenceError::ShapeMismatch {
            left: a.shape().clone(),
            right: b.shape().clone(),
        });
    }
    Ok(first_difference(sr, &a, &b).map(|position| Counterexample {
        left: a.get(&position).expect("in range").clone(),
        right: b.get(&position).expect("in range").clone(),
        position,
        bindings,
        trial,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;
    use crate::semiring::{Arithmetic, MinPlus};

    fn config(trials: usize) -> CheckConfig {
        CheckConfig {
            trials,
            seed: 7,
            ..CheckConfig::default()
        }
    }

    #[test]
    fn self_equivalence() {
        let e = parse_expression("#(ij,jk->ik; A, B)").unwrap();
        let r = check_equivalence(&e, &e, &config(10), &Arithmetic).unwrap();
        assert!(r.is_equal());
        assert_eq!(r.trials, 10);
    }

    #[test]
    fn swapped_arguments_differ() {
        let e = parse_expression("#(ij,jk->ik; A, B)").unwrap();
        let f = parse_expression("#(ij,jk->ik; B, A)").unwrap();
        let mut cfg = config(32);
        cfg.dims = Dims::range(2, 2);
        let r = check_equivalence(&e, &f, &cfg, &Arithmetic).unwrap();
        let c = r.counterexample().expect("a counterexample");
        let a = eval(&e, &c.bindings, &Arithmetic).unwrap();
        let b = eval(&f, &c.bindings, &Arithmetic).unwrap();
        assert_ne!(a.get(&c.position), b.get(&c.position));
    }

    #[test]
    fn determinism() {
        let e = parse_expression("#(ij,jk->ik; A, B)").unwrap();
        let f = parse_expression("#(ij,jk->ik; B, A)").unwrap();
        let r1 = check_equivalence(&e, &f, &config(32), &MinPlus).unwrap();
        let r2 = check_equivalence(&e, &f, &config(32), &MinPlus).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn shape_mismatch() {
        let e = parse_expression("#(ij->ij; A)").unwrap();
        let f = parse_expression("#(ij->i; A)").unwrap();
        assert!(matches!(
            check_equivalence(&e, &f, &config(3), &Arithmetic),
            Err(EquivalenceError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn exhaustive() {
        let e = parse_expression("#(ii->i; A)").unwrap();
        let f = parse_expression("#(ij,ij->i; delta(1; 2), A)").unwrap();
        let mut cfg = config(0);
        cfg.mode = Mode::Exhaustive;
        cfg.dims = Dims::range(2, 2);
        let r = check_equivalence(&e, &f, &cfg, &Arithmetic).unwrap();
        assert!(r.is_equal());
        assert_eq!(r.trials, 81);
        let g = parse_expression("#(ij->i; A)").unwrap();
        assert!(!check_equivalence(&e, &g, &cfg, &Arithmetic)
            .unwrap()
            .is_equal());
        cfg.dims = Dims::range(4, 4);
        assert_eq!(
            check_equivalence(&e, &g, &cfg, &Arithmetic),
            Err(EquivalenceError::TooLargeForExhaustive(16))
        );
    }
}
