use std::fmt;

use thiserror::Error;

use crate::parser::SourceSpan;
use crate::semiring::Literal;
use crate::symbol::IndexSymbol;
use crate::tensor::Shape;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("axis {axis} has length zero")]
    ZeroLength { axis: usize },
    #[error("expected {expected} entries, found {found}")]
    DataLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("literal `{literal}` is not an element of the {semiring} semiring")]
pub struct LiteralError {
    pub literal: Literal,
    pub semiring: &'static str,
}

impl LiteralError {
    pub fn new(literal: Literal, semiring: &'static str) -> Self {
        LiteralError { literal, semiring }
    }
}

/// Formats a node path as `root` or `root.2.1`. Messages count operands
/// from 1; the paths and slots stored in errors count from 0.
pub struct PathDisplay<'a>(pub &'a [usize]);

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for k in self.0 {
            write!(f, ".{}", k + 1)?;
        }
        Ok(())
    }
}

/// A reason an expression is not a valid einsum expression.
///
/// Each violation records the path of the offending node.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("at {}: einsum has no arguments", PathDisplay(path))]
    EmptyEinsum { path: Vec<usize> },
    #[error(
        "at {}: format has {strings} input strings but {args} arguments are given (constraint I)",
        PathDisplay(path)
    )]
    ArgumentCount {
        path: Vec<usize>,
        strings: usize,
        args: usize,
    },
    #[error("at {}: index string {} has length {index_len} but its argument has order {order} (constraint I)", PathDisplay(path), .operand + 1)]
    ArityMismatch {
        path: Vec<usize>,
        operand: usize,
        index_len: usize,
        order: usize,
    },
    #[error(
        "at {}: symbol `{symbol}` annotates axes of lengths {first} and {second} (constraint II)",
        PathDisplay(path)
    )]
    AxisMismatch {
        path: Vec<usize>,
        symbol: IndexSymbol,
        first: usize,
        second: usize,
    },
    #[error(
        "at {}: output symbol `{symbol}` does not appear in any input string (constraint III)",
        PathDisplay(path)
    )]
    UnboundOutput {
        path: Vec<usize>,
        symbol: IndexSymbol,
    },
    #[error("at {}: no binding for tensor `{name}`", PathDisplay(path))]
    UnboundName { path: Vec<usize>, name: String },
    #[error("at {}: aggregate term {} has shape {found}, expected {expected}", PathDisplay(path), .term + 1)]
    AggregateShape {
        path: Vec<usize>,
        term: usize,
        expected: Shape,
        found: Shape,
    },
    #[error("at {}: aggregate has no terms", PathDisplay(path))]
    EmptyAggregate { path: Vec<usize> },
    #[error(
        "at {}: delta leaf of order {order} given {dims} axis lengths",
        PathDisplay(path)
    )]
    DeltaDims {
        path: Vec<usize>,
        order: usize,
        dims: usize,
    },
    #[error("at {}: axis length zero", PathDisplay(path))]
    ZeroLength { path: Vec<usize> },
}

impl Violation {
    pub fn path(&self) -> &[usize] {
        match self {
            Violation::EmptyEinsum { path }
            | Violation::ArgumentCount { path, .. }
            | Violation::ArityMismatch { path, .. }
            | Violation::AxisMismatch { path, .. }
            | Violation::UnboundOutput { path, .. }
            | Violation::UnboundName { path, .. }
            | Violation::AggregateShape { path, .. }
            | Violation::EmptyAggregate { path }
            | Violation::DeltaDims { path, .. }
            | Violation::ZeroLength { path } => path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error(
        "at {span}: output symbols {symbols} do not appear in any input string (constraint III)"
    )]
    Constraint { span: SourceSpan, symbols: String },
    #[error("at {span}: format has {strings} input strings but {args} arguments are given")]
    ArityMismatch {
        span: SourceSpan,
        strings: usize,
        args: usize,
    },
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::Constraint { span, .. }
            | ParseError::ArityMismatch { span, .. } => *span,
        }
    }

    pub(crate) fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            span,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Literal(#[from] LiteralError),
    #[error("symbol `{0}` has no coordinate in this global position")]
    UnassignedSymbol(IndexSymbol),
}

/// Why a rewrite could not be applied. Each variant is a precondition of the rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("expected an einsum node")]
    NotAnEinsum,
    #[error("operand {} is out of range for {arity} operands", .slot + 1)]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("not a permutation of {arity} operands")]
    InvalidPermutation { arity: usize },
    #[error("restricted denesting does not apply: {0}")]
    PreconditionViolated(DenestObstacle),
    #[error("invalid grouping: symbols {missing} must appear in the intermediate output")]
    InvalidGrouping { missing: String },
    #[error("invalid grouping: {0}")]
    MalformedGroup(String),
    #[error("inner output has length {inner} but the outer slot string has length {outer}")]
    LengthMismatch { inner: usize, outer: usize },
    #[error("inner and outer expressions share symbols {0}; rename first")]
    SharedSymbols(String),
    #[error("operand {} is not a nested einsum", .slot + 1)]
    NotNested { slot: usize },
    #[error("symbol `{0}` already occurs in the expression")]
    SymbolNotFresh(IndexSymbol),
    #[error("symbol `{0}` does not occur in any input string")]
    SymbolAbsent(IndexSymbol),
    #[error("occurrence {} of `{symbol}` does not exist ({count} occurrences)", .index + 1)]
    NoSuchOccurrence {
        symbol: IndexSymbol,
        index: usize,
        count: usize,
    },
    #[error("at least one occurrence must be selected")]
    NoOccurrenceSelected,
    #[error("operand {} is not an order-2 delta tensor", .slot + 1)]
    NotADelta { slot: usize },
    #[error("delta at operand {} has index string `{symbol}{symbol}`; merging needs two distinct symbols", .slot + 1)]
    DegenerateDelta { slot: usize, symbol: IndexSymbol },
    #[error("merging would leave symbol `{0}` without any input binding it")]
    WouldUnbind(IndexSymbol),
    #[error("an einsum node must keep at least one operand")]
    LastOperand,
    #[error("operand {} is not an aggregate", .slot + 1)]
    NotAnAggregate { slot: usize },
    #[error("cannot factor: {0}")]
    NotFactorable(String),
    #[error("not an identity operation: {0}")]
    NotIdentity(IdentityObstacle),
    #[error("operand {} is not an all-ones tensor", .slot + 1)]
    NotOnes { slot: usize },
    #[error("would change semantics: symbols {0} would no longer be bound")]
    WouldChangeSemantics(String),
    #[error("expression is not a constant tensor")]
    NotConstant,
    #[error("expression is not a delta tensor")]
    NotDeltaLeaf,
    #[error("index string `{index}` must have {expected} pairwise distinct symbols")]
    BadIndexString { index: String, expected: usize },
    #[error("malformed contraction path: {0}")]
    MalformedPath(String),
    #[error("rename target `{0}` is already in use")]
    TargetInUse(IndexSymbol),
    #[error("rename map is not injective: two symbols map to `{0}`")]
    NotInjective(IndexSymbol),
    #[error("no subexpression at the given path")]
    BadPath,
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Literal(#[from] LiteralError),
    #[error("{0}")]
    BadArguments(String),
}

impl RewriteError {
    /// Stable kebab-case reason code.
    pub fn code(&self) -> &'static str {
        match self {
            RewriteError::NotAnEinsum => "not-an-einsum",
            RewriteError::SlotOutOfRange { .. } => "slot-out-of-range",
            RewriteError::InvalidPermutation { .. } => "invalid-permutation",
            RewriteError::PreconditionViolated(DenestObstacle::StringMismatch) => "string-mismatch",
            RewriteError::PreconditionViolated(DenestObstacle::SymbolCollision(_)) => {
                "symbol-collision"
            }
            RewriteError::InvalidGrouping { .. } => "invalid-grouping",
            RewriteError::MalformedGroup(_) => "malformed-group",
            RewriteError::LengthMismatch { .. } => "length-mismatch",
            RewriteError::SharedSymbols(_) => "shared-symbols",
            RewriteError::NotNested { .. } => "not-nested",
            RewriteError::SymbolNotFresh(_) => "symbol-not-fresh",
            RewriteError::SymbolAbsent(_) => "symbol-absent",
            RewriteError::NoSuchOccurrence { .. } => "no-such-occurrence",
            RewriteError::NoOccurrenceSelected => "no-occurrence-selected",
            RewriteError::NotADelta { .. } => "not-a-delta",
            RewriteError::DegenerateDelta { .. } => "degenerate-delta",
            RewriteError::WouldUnbind(_) => "would-unbind",
            RewriteError::LastOperand => "last-operand",
            RewriteError::NotAnAggregate { .. } => "not-an-aggregate",
            RewriteError::NotFactorable(_) => "not-factorable",
            RewriteError::NotIdentity(IdentityObstacle::DuplicateSymbols) => "duplicate-symbols",
            RewriteError::NotIdentity(IdentityObstacle::StringMismatch) => "string-mismatch",
            RewriteError::NotIdentity(IdentityObstacle::MultipleArgs) => "multiple-args",
            RewriteError::NotOnes { .. } => "not-ones",
            RewriteError::WouldChangeSemantics(_) => "would-change-semantics",
            RewriteError::NotConstant => "not-constant",
            RewriteError::NotDeltaLeaf => "not-a-delta",
            RewriteError::BadIndexString { .. } => "bad-index-string",
            RewriteError::MalformedPath(_) => "malformed-path",
            RewriteError::TargetInUse(_) => "target-in-use",
            RewriteError::NotInjective(_) => "not-injective",
            RewriteError::BadPath => "bad-path",
            RewriteError::Invalid(_) => "invalid-expression",
            RewriteError::Literal(_) => "bad-literal",
            RewriteError::BadArguments(_) => "bad-arguments",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenestObstacle {
    /// The inner output string differs from the outer slot string.
    StringMismatch,
    /// Inner and outer share a symbol outside the inner output string.
    SymbolCollision(IndexSymbol),
}

impl fmt::Display for DenestObstacle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenestObstacle::StringMismatch => {
                f.write_str("string-mismatch (inner output differs from the outer input string)")
            }
            DenestObstacle::SymbolCollision(s) => {
                write!(
                    f,
                    "symbol-collision (`{s}` is used by both inner and outer)"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityObstacle {
    DuplicateSymbols,
    StringMismatch,
    MultipleArgs,
}

impl fmt::Display for IdentityObstacle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdentityObstacle::DuplicateSymbols => "duplicate-symbols",
            IdentityObstacle::StringMismatch => "string-mismatch",
            IdentityObstacle::MultipleArgs => "multiple-args",
        })
    }
}

#[derive(Debug, Error)]
pub enum BindingsError {
    #[error("cannot read bindings: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed bindings document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("tensor `{name}`: {source}")]
    Tensor { name: String, source: TensorError },
    #[error("tensor `{name}`: value #{index} ({value}) is not valid: {reason}")]
    Value {
        name: String,
        index: usize,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivalenceError {
    #[error("output shapes differ: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },
    #[error("cannot determine shapes: {0}")]
    Shapes(String),
    #[error("exhaustive mode needs at most 12 entries in total, found {0}")]
    TooLargeForExhaustive(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Joins symbols for error messages.
pub(crate) fn list_symbols<'a>(symbols: impl IntoIterator<Item = &'a IndexSymbol>) -> String {
    symbols
        .into_iter()
        .map(|s| format!("`{s}`"))
        .collect::<Vec<_>>()
        .join(", ")
}
