//! Named rewrite rules applied at a path inside an expression.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::RewriteError;
use crate::expr::{Einsum, Expr};
use crate::parser::parse_index_string;
use crate::semiring::Semiring;
use crate::symbol::{IndexString, IndexSymbol};
use crate::validate::ShapeEnv;

use super::delta::{delta_merge, delta_split, substitute_delta, Keep};
use super::distribute::{distribute, factor};
use super::nesting::{
    apply_contraction_path, general_denest_at, restricted_denest_at, restricted_nest,
    ContractionPath,
};
use super::rename::{permute_args, rename_symbols};
use super::simplify::{
    add_neutral_ones, drop_neutral_ones, eliminate_identity, normalize, vectorize_constant,
};

/// Stable rule identifiers, as accepted by [`Rewrite::parse`].
pub const RULE_NAMES: [&str; 16] = [
    "permute",
    "restricted-denest",
    "restricted-nest",
    "general-denest",
    "delta-split",
    "delta-merge",
    "distribute",
    "factor",
    "identity",
    "drop-ones",
    "add-ones",
    "vectorize-constant",
    "substitute-delta",
    "normalize",
    "apply-path",
    "rename",
];

/// One rule with its arguments. Positions are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rewrite {
    Permute(Vec<usize>),
    RestrictedDenest {
        slot: usize,
    },
    RestrictedNest {
        group: Vec<usize>,
        output: IndexString,
    },
    GeneralDenest {
        slot: usize,
    },
    DeltaSplit {
        symbol: IndexSymbol,
        occurrences: Vec<usize>,
        fresh: IndexSymbol,
    },
    DeltaMerge {
        slot: usize,
        keep: Keep,
    },
    Distribute {
        slot: usize,
    },
    Factor,
    Identity,
    DropOnes {
        slot: usize,
    },
    AddOnes(IndexString),
    VectorizeConstant(Option<IndexString>),
    SubstituteDelta,
    Normalize,
    ApplyPath(ContractionPath),
    Rename(BTreeMap<IndexSymbol, IndexSymbol>),
}

impl Rewrite {
    pub fn name(&self) -> &'static str {
        let k = match self {
            Rewrite::Permute(_) => 0,
            Rewrite::RestrictedDenest { .. } => 1,
            Rewrite::RestrictedNest { .. } => 2,
            Rewrite::GeneralDenest { .. } => 3,
            Rewrite::DeltaSplit { .. } => 4,
            Rewrite::DeltaMerge { .. } => 5,
            Rewrite::Distribute { .. } => 6,
            Rewrite::Factor => 7,
            Rewrite::Identity => 8,
            Rewrite::DropOnes { .. } => 9,
            Rewrite::AddOnes(_) => 10,
            Rewrite::VectorizeConstant(_) => 11,
            Rewrite::SubstituteDelta => 12,
            Rewrite::Normalize => 13,
            Rewrite::ApplyPath(_) => 14,
            Rewrite::Rename(_) => 15,
        };
        RULE_NAMES[k]
    }

    /// Parses a rule name and its textual arguments. Positions in the text
    /// are 1-based.
    ///
    /// | rule | arguments |
    /// |---|---|
    /// | `permute` | `2,1` |
    /// | `restricted-denest`, `general-denest` | `[slot]` (default 1) |
    /// | `restricted-nest` | `2,3 j` |
    /// | `delta-split` | `i 2 j` (symbol, occurrences, fresh symbol) |
    /// | `delta-merge` | `1 first` or `1 second` |
    /// | `distribute`, `drop-ones` | `slot` |
    /// | `add-ones` | `J` |
    /// | `vectorize-constant` | `[I]` |
    /// | `apply-path` | `[(2,3),(1,2)]` |
    /// | `rename` | `i=p,j=q` |
    pub fn parse(rule: &str, args: &[&str]) -> Result<Rewrite, RewriteError> {
        let arity = |n: std::ops::RangeInclusive<usize>| {
            if n.contains(&args.len()) {
                Ok(())
            } else {
                Err(bad(format!(
                    "`{rule}` takes {} argument(s), {} given",
                    if n.start() == n.end() {
                        n.start().to_string()
                    } else {
                        format!("{}-{}", n.start(), n.end())
                    },
                    args.len()
                )))
            }
        };
        let slot_or_first = |args: &[&str]| args.first().map_or(Ok(0), |a| position(a));
        Ok(match rule {
            "permute" => {
                arity(1..=1)?;
                Rewrite::Permute(positions(args[0])?)
            }
            "restricted-denest" => {
                arity(0..=1)?;
                Rewrite::RestrictedDenest {
                    slot: slot_or_first(args)?,
                }
            }
            "general-denest" => {
                arity(0..=1)?;
                Rewrite::GeneralDenest {
                    slot: slot_or_first(args)?,
                }
            }
            "restricted-nest" => {
                arity(1..=2)?;
                Rewrite::RestrictedNest {
                    group: positions(args[0])?,
                    output: index(args.get(1).copied().unwrap_or(""))?,
                }
            }
            "delta-split" => {
                arity(3..=3)?;
                Rewrite::DeltaSplit {
                    symbol: symbol(args[0])?,
                    occurrences: positions(args[1])?,
                    fresh: symbol(args[2])?,
                }
            }
            "delta-merge" => {
                arity(1..=2)?;
                let keep = match args.get(1).copied().unwrap_or("first") {
                    "first" => Keep::First,
                    "second" => Keep::Second,
                    other => {
                        return Err(bad(format!(
                            "expected `first` or `second`, found `{other}`"
                        )))
                    }
                };
                Rewrite::DeltaMerge {
                    slot: position(args[0])?,
                    keep,
                }
            }
            "distribute" => {
                arity(1..=1)?;
                Rewrite::Distribute {
                    slot: position(args[0])?,
                }
            }
            "factor" => {
                arity(0..=0)?;
                Rewrite::Factor
            }
            "identity" => {
                arity(0..=0)?;
                Rewrite::Identity
            }
            "drop-ones" => {
                arity(1..=1)?;
                Rewrite::DropOnes {
                    slot: position(args[0])?,
                }
            }
            "add-ones" => {
                arity(1..=1)?;
                Rewrite::AddOnes(index(args[0])?)
            }
            "vectorize-constant" => {
                arity(0..=1)?;
                Rewrite::VectorizeConstant(args.first().map(|a| index(a)).transpose()?)
            }
            "substitute-delta" => {
                arity(0..=0)?;
                Rewrite::SubstituteDelta
            }
            "normalize" => {
                arity(0..=0)?;
                Rewrite::Normalize
            }
            "apply-path" => {
                arity(1..=1)?;
                Rewrite::ApplyPath(args[0].parse()?)
            }
            "rename" => {
                arity(1..=1)?;
                let mut map = BTreeMap::new();
                for pair in args[0].split(',').filter(|p| !p.trim().is_empty()) {
                    let (from, to) = pair
                        .split_once('=')
                        .ok_or_else(|| bad(format!("expected `from=to`, found `{pair}`")))?;
                    map.insert(symbol(from)?, symbol(to)?);
                }
                Rewrite::Rename(map)
            }
            other => {
                return Err(bad(format!(
                    "unknown rule `{other}`; known rules: {}",
                    RULE_NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn bad(message: String) -> RewriteError {
    RewriteError::BadArguments(message)
}

fn position(text: &str) -> Result<usize, RewriteError> {
    match text.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k - 1),
        _ => Err(bad(format!("`{text}` is not a 1-based position"))),
    }
}

fn positions(text: &str) -> Result<Vec<usize>, RewriteError> {
    text.split(',').map(position).collect()
}

fn index(text: &str) -> Result<IndexString, RewriteError> {
    parse_index_string(text).map_err(|e| bad(format!("`{text}` is not an index string: {e}")))
}

fn symbol(text: &str) -> Result<IndexSymbol, RewriteError> {
    match index(text.trim())?.0[..] {
        [s] => Ok(s),
        _ => Err(bad(format!("`{text}` is not a single index symbol"))),
    }
}

fn einsum_target(target: &Expr) -> Result<&Einsum, RewriteError> {
    target.as_einsum().ok_or(RewriteError::NotAnEinsum)
}

/// Applies `rewrite` to the subexpression at `at` (the root when empty).
/// `shapes` gives the shapes of named tensors; only `delta-split` and
/// `add-ones` consult them. `sr` is used by `normalize` to fold scalars.
pub fn apply_rewrite<S: Semiring>(
    expr: &Expr,
    at: &[usize],
    rewrite: &Rewrite,
    shapes: &ShapeEnv,
    sr: &S,
) -> Result<Expr, RewriteError> {
    let target = expr.at(at).ok_or(RewriteError::BadPath)?;
    let replacement = match rewrite {
        Rewrite::Permute(perm) => Expr::Einsum(permute_args(einsum_target(target)?, perm)?),
        Rewrite::RestrictedDenest { slot } => {
            Expr::Einsum(restricted_denest_at(einsum_target(target)?, *slot)?)
        }
        Rewrite::RestrictedNest { group, output } => {
            Expr::Einsum(restricted_nest(einsum_target(target)?, group, output)?)
        }
        Rewrite::GeneralDenest { slot } => {
            Expr::Einsum(general_denest_at(einsum_target(target)?, *slot)?)
        }
        Rewrite::DeltaSplit {
            symbol,
            occurrences,
            fresh,
        } => Expr::Einsum(delta_split(
            einsum_target(target)?,
            *symbol,
            occurrences,
            *fresh,
            shapes,
        )?),
        Rewrite::DeltaMerge { slot, keep } => {
            Expr::Einsum(delta_merge(einsum_target(target)?, *slot, *keep)?)
        }
        Rewrite::Distribute { slot } => distribute(einsum_target(target)?, *slot)?,
        Rewrite::Factor => Expr::Einsum(factor(target)?),
        Rewrite::Identity => eliminate_identity(einsum_target(target)?)?,
        Rewrite::DropOnes { slot } => {
            Expr::Einsum(drop_neutral_ones(einsum_target(target)?, *slot)?)
        }
        Rewrite::AddOnes(j) => Expr::Einsum(add_neutral_ones(einsum_target(target)?, j, shapes)?),
        Rewrite::VectorizeConstant(index) => {
            Expr::Einsum(vectorize_constant(target, index.as_ref())?)
        }
        Rewrite::SubstituteDelta => Expr::Einsum(substitute_delta(target)?),
        Rewrite::Normalize => normalize(target, sr)?,
        Rewrite::ApplyPath(path) => apply_contraction_path(einsum_target(target)?, path)?,
        Rewrite::Rename(map) => Expr::Einsum(rename_symbols(einsum_target(target)?, map)?),
    };
    let mut out = expr.clone();
    *out.at_mut(at).expect("path was resolved above") = replacement;
    Ok(out)
}
