//! Einsum expressions over commutative semirings: parsing, validation,
//! evaluation, rewriting and equivalence checking.

pub mod bindings;
pub mod equivalence;
pub mod error;
pub mod eval;
pub mod expr;
pub mod parser;
pub mod rewrite;
pub mod semiring;
pub mod symbol;
pub mod tensor;
pub mod validate;

pub use equivalence::{
    check_equivalence, expression_generator, CheckConfig, Dims, EquivalenceReport, GeneratorConfig,
    Mode, Verdict,
};
pub use error::{
    BindingsError, DenestObstacle, EquivalenceError, EvalError, IdentityObstacle, LiteralError,
    ParseError, RewriteError, TensorError, Violation,
};
pub use eval::{eval, eval_einsum, Bindings};
pub use expr::{Einsum, Expr};
pub use parser::{parse_expression, parse_format, parse_index_string, render};
pub use rewrite::{alpha_equivalent, apply_rewrite, Rewrite};
pub use semiring::{Arithmetic, Boolean, Literal, MinPlus, Real, Semiring, SemiringKind, Tropical};
pub use symbol::{FormatString, IndexString, IndexSymbol};
pub use tensor::{Shape, Tensor};
pub use validate::{infer_axes, infer_shape, validate, AxisEnvironment, ShapeEnv};
