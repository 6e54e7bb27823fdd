use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use einsum_core::bindings::{bindings_to_json, load_bindings, parse_shapes, tensor_to_json};
use einsum_core::equivalence::{trial_rng, EquivalenceReport, ShapeProblem};
use einsum_core::parser::{parse_expression_with_spans, SourceSpan, SpanTable};
use einsum_core::rewrite::{denest_fully, tidy_symbols, RULE_NAMES};
use einsum_core::validate::validate_structure;
use einsum_core::{
    apply_rewrite, check_equivalence, eval as evaluate, parse_format, parse_index_string, render,
    validate as check, Arithmetic, Bindings, Boolean, CheckConfig, Dims, EquivalenceError, Expr,
    FormatString, MinPlus, Mode, ParseError, Real, Rewrite, Semiring, SemiringKind, ShapeEnv,
    Violation,
};
use serde_json::{json, Value};

use crate::report::{snippet, span_json, Failure, Reporter};
use crate::Cli;

type Outcome = Result<(), Failure>;

macro_rules! with_semiring {
    ($kind:expr, $sr:ident => $body:expr) => {
        match $kind {
            SemiringKind::Int => {
                let $sr = &Arithmetic;
                $body
            }
            SemiringKind::Float => {
                let $sr = &Real::default();
                $body
            }
            SemiringKind::Bool => {
                let $sr = &Boolean;
                $body
            }
            SemiringKind::Tropical => {
                let $sr = &MinPlus;
                $body
            }
        }
    };
}

/// Expression text from the argument, or from a file for `@FILE`.
fn source(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path)
            .with_context(|| format!("cannot read `{path}`"))?
            .trim()
            .to_string()),
        None => Ok(arg.to_string()),
    }
}

fn parse_failure(text: &str, e: &ParseError) -> Failure {
    Failure {
        status: 2,
        human: format!("error: {e}\n{}", snippet(text, e.span())),
        record: json!({ "error": "parse", "message": e.to_string(), "span": span_json(e.span()) }),
    }
}

struct Source {
    text: String,
    expr: Expr,
    spans: SpanTable,
}

fn parse(arg: &str) -> Result<Source, Failure> {
    let text = source(arg)?;
    let (expr, spans) = parse_expression_with_spans(&text).map_err(|e| parse_failure(&text, &e))?;
    Ok(Source { text, expr, spans })
}

fn shapes_file(path: &Path) -> Result<ShapeEnv, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read `{}`", path.display()))?;
    parse_shapes(&text).map_err(|e| Failure::usage("bindings", e.to_string()))
}

fn bindings_file<S: Semiring>(path: &Path, sr: &S) -> Result<Bindings<S::Elem>, Failure> {
    load_bindings(path, sr).map_err(|e| Failure::usage("bindings", e.to_string()))
}

/// `i=3,j=2`, `1..4`, `3`, or a mix of symbol lengths and one range.
fn parse_dims(text: &str) -> Result<Dims, Failure> {
    let bad = |m: String| Failure::usage("dims", m);
    let mut dims = Dims::default();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let length = |s: &str| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| bad(format!("`{s}` is not a positive length")))
        };
        if let Some((sym, len)) = item.split_once('=') {
            let index = parse_index_string(sym.trim()).map_err(|e| bad(e.to_string()))?;
            let [s] = index.0[..] else {
                return Err(bad(format!("`{sym}` is not a single index symbol")));
            };
            dims.symbols.insert(s, length(len)?);
        } else if let Some((lo, hi)) = item.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            dims.range = (length(lo)?, length(hi)?);
            if dims.range.0 > dims.range.1 {
                return Err(bad(format!("empty range `{item}`")));
            }
        } else {
            let n = length(item)?;
            dims.range = (n, n);
        }
    }
    Ok(dims)
}

/// Axis-length assumptions for equivalence checks and shape-dependent rules:
/// the shapes in --bindings if given, refined by --dims.
fn dims_for(cli: &Cli, dims: Option<&str>) -> Result<Dims, Failure> {
    let mut out = match dims {
        Some(text) => parse_dims(text)?,
        None => Dims::default(),
    };
    if let Some(path) = &cli.bindings {
        out.shapes = shapes_file(path)?;
    }
    Ok(out)
}

fn violation_records(src: &Source, violations: &[Violation]) -> (String, Value) {
    let root = SourceSpan::new(0, src.text.len());
    let mut human = String::new();
    let mut records = Vec::new();
    for v in violations {
        let span = src.spans.get(v.path()).copied().unwrap_or(root);
        // Replace the library's `at root.2.1: ` prefix with CLI wording.
        let text = v.to_string();
        let message = text.split_once(": ").map_or(text.as_str(), |(_, m)| m);
        let position: Vec<usize> = v.path().iter().map(|k| k + 1).collect();
        let place = if position.is_empty() {
            "top level".to_string()
        } else {
            let p: Vec<String> = position.iter().map(usize::to_string).collect();
            format!("operand {}", p.join("."))
        };
        human.push_str(&format!(
            "violation at {place}: {message}\n{}\n",
            snippet(&src.text, span)
        ));
        records.push(json!({ "message": message, "at": position, "span": span_json(span) }));
    }
    (human.trim_end().to_string(), Value::Array(records))
}

fn violations_failure(src: &Source, violations: &[Violation]) -> Failure {
    let (human, records) = violation_records(src, violations);
    Failure::semantic(human, json!({ "valid": false, "violations": records }))
}

/// A bare format string stands for `#(FORMAT; T1, …, Tn)`.
fn from_format(text: &str, format: FormatString) -> Source {
    let args = (1..=format.arity())
        .map(|k| Expr::Named(format!("T{k}")))
        .collect();
    let expr = Expr::einsum(format, args);
    let spans = [(Vec::new(), SourceSpan::new(0, text.len()))]
        .into_iter()
        .collect();
    Source {
        text: text.to_string(),
        expr,
        spans,
    }
}

pub fn validate(cli: &Cli, out: &Reporter, arg: &str) -> Outcome {
    let text = source(arg)?;
    let src = match parse_expression_with_spans(&text) {
        Ok((expr, spans)) => Source {
            text: text.clone(),
            expr,
            spans,
        },
        Err(e) if !text.contains(['#', ';']) => match parse_format(&text) {
            Ok(format) => from_format(&text, format),
            Err(fe) if matches!(fe, ParseError::Constraint { .. }) => {
                return Err(parse_format_violation(&text, &fe))
            }
            Err(fe) => {
                return Err(parse_failure(
                    &text,
                    if text.contains(['-', ',']) { &fe } else { &e },
                ))
            }
        },
        Err(e) => return Err(parse_failure(&text, &e)),
    };
    let report = match &cli.bindings {
        Some(path) => check(&src.expr, &shapes_file(path)?),
        None => validate_structure(&src.expr),
    };
    if !report.is_valid() {
        return Err(violations_failure(&src, &report.violations));
    }
    let shape = report.shape.as_ref();
    let human = match shape {
        Some(s) => format!("valid; output shape {s}"),
        None => "valid".to_string(),
    };
    out.emit(
        &human,
        json!({ "valid": true, "shape": shape.map(|s| s.dims().to_vec()), "violations": [] }),
    );
    Ok(())
}

/// Constraint III found while parsing a bare format string: a violation, not
/// a syntax error.
fn parse_format_violation(text: &str, e: &ParseError) -> Failure {
    let full = e.to_string();
    let message = full.split_once(": ").map_or(full.as_str(), |(_, m)| m);
    let human = format!(
        "violation at top level: {message}\n{}",
        snippet(text, e.span())
    );
    Failure::semantic(
        human,
        json!({ "valid": false, "violations": [{ "message": message, "at": [], "span": span_json(e.span()) }] }),
    )
}

pub fn eval(cli: &Cli, out: &Reporter, arg: &str) -> Outcome {
    let src = parse(arg)?;
    with_semiring!(cli.semiring, sr => eval_in(cli, out, &src, sr))
}

fn eval_in<S: Semiring>(cli: &Cli, out: &Reporter, src: &Source, sr: &S) -> Outcome {
    let bindings = match &cli.bindings {
        Some(path) => bindings_file(path, sr)?,
        None => Bindings::new(),
    };
    let shapes: ShapeEnv = bindings
        .iter()
        .map(|(n, t)| (n.clone(), t.shape().clone()))
        .collect();
    let report = check(&src.expr, &shapes);
    if !report.is_valid() {
        return Err(violations_failure(src, &report.violations));
    }
    let result = evaluate(&src.expr, &bindings, sr).map_err(|e| {
        Failure::semantic(
            format!("error: {e}"),
            json!({ "error": "eval", "message": e.to_string() }),
        )
    })?;
    let human = if result.order() == 0 {
        result.data()[0].to_string()
    } else {
        result.to_string()
    };
    let mut record = tensor_to_json(&result, sr);
    record["semiring"] = json!(sr.name());
    out.emit(&human, record);
    Ok(())
}

pub struct RewriteRequest<'a> {
    pub expr: &'a str,
    pub rule: &'a str,
    pub args: &'a [String],
    pub at: Option<&'a str>,
    pub verify: bool,
    pub dims: Option<&'a str>,
}

/// `2.1` → `[1, 0]`.
fn parse_at(text: &str) -> Result<Vec<usize>, Failure> {
    text.split('.')
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(Failure::usage(
                "at",
                format!("`{text}` is not a path of 1-based positions"),
            )),
        })
        .collect()
}

/// Shapes of the named tensors: from --bindings, else sampled under the dims.
fn shapes_for(cli: &Cli, expr: &Expr, dims: &Dims) -> ShapeEnv {
    if cli.bindings.is_some() {
        return dims.shapes.clone();
    }
    ShapeProblem::new(&[expr], dims)
        .map(|p| p.sample(&mut trial_rng(cli.seed, 0)))
        .unwrap_or_default()
}

pub fn rewrite(cli: &Cli, out: &Reporter, req: RewriteRequest<'_>) -> Outcome {
    let src = parse(req.expr)?;
    let args: Vec<&str> = req.args.iter().map(String::as_str).collect();
    let rule =
        Rewrite::parse(req.rule, &args).map_err(|e| Failure::usage("rule", e.to_string()))?;
    let at = req.at.map(parse_at).transpose()?.unwrap_or_default();
    let dims = dims_for(cli, req.dims)?;
    let shapes = shapes_for(cli, &src.expr, &dims);
    with_semiring!(cli.semiring, sr => {
        let result = apply_rewrite(&src.expr, &at, &rule, &shapes, sr).map_err(|e| {
            Failure::semantic(
                format!("error: `{}` does not apply [{}]: {e}", rule.name(), e.code()),
                json!({ "error": "rewrite", "rule": rule.name(), "code": e.code(), "message": e.to_string() }),
            )
        })?;
        finish(cli, out, &src.expr, &result, rule.name(), req.verify, dims, sr)
    })
}

pub fn denest(cli: &Cli, out: &Reporter, arg: &str, verify: bool, dims: Option<&str>) -> Outcome {
    let src = parse(arg)?;
    let dims = dims_for(cli, dims)?;
    let result = denest_fully(&src.expr);
    with_semiring!(cli.semiring, sr => finish(cli, out, &src.expr, &result, "denest", verify, dims, sr))
}

#[allow(clippy::too_many_arguments)]
fn finish<S: Semiring>(
    cli: &Cli,
    out: &Reporter,
    input: &Expr,
    result: &Expr,
    rule: &str,
    verify: bool,
    dims: Dims,
    sr: &S,
) -> Outcome {
    let rendered = render(&tidy_symbols(result));
    let mut record = json!({ "rule": rule, "input": render(input), "output": rendered });
    if verify {
        let cfg = CheckConfig {
            dims,
            trials: cli.trials,
            seed: cli.seed,
            mode: Mode::Random,
        };
        let report = check_equivalence(input, result, &cfg, sr).map_err(|e| {
            Failure::semantic(
                format!("{rendered}\nverification failed: {e}"),
                json!({ "error": "verify", "output": rendered, "message": e.to_string() }),
            )
        })?;
        if let Some(c) = report.counterexample() {
            let human = format!(
                "{rendered}\nverification FAILED: results differ at {:?}: {} vs {}\nbindings: {}",
                c.position,
                c.left,
                c.right,
                bindings_to_json(&c.bindings, sr)
            );
            record["verified"] = report_json(&report, sr);
            return Err(Failure::semantic(human, record));
        }
        record["verified"] = report_json(&report, sr);
        out.emit(
            &format!(
                "{rendered}\nverified: equal on {} trials ({})",
                report.trials,
                sr.name()
            ),
            record,
        );
    } else {
        out.emit(&rendered, record);
    }
    Ok(())
}

fn report_json<S: Semiring>(report: &EquivalenceReport<S::Elem>, sr: &S) -> Value {
    let counterexample = report.counterexample().map(|c| {
        json!({
            "trial": c.trial,
            "position": c.position,
            "left": tensor_to_json(&einsum_core::Tensor::scalar(c.left.clone()), sr)["values"][0],
            "right": tensor_to_json(&einsum_core::Tensor::scalar(c.right.clone()), sr)["values"][0],
            "bindings": bindings_to_json(&c.bindings, sr),
        })
    });
    json!({
        "equal": report.is_equal(),
        "trials": report.trials,
        "semiring": report.semiring,
        "counterexample": counterexample,
    })
}

pub fn equiv(
    cli: &Cli,
    out: &Reporter,
    left: &str,
    right: &str,
    dims: Option<&str>,
    exhaustive: bool,
) -> Outcome {
    let (l, r) = (parse(left)?, parse(right)?);
    let cfg = CheckConfig {
        dims: dims_for(cli, dims)?,
        trials: cli.trials,
        seed: cli.seed,
        mode: if exhaustive {
            Mode::Exhaustive
        } else {
            Mode::Random
        },
    };
    with_semiring!(cli.semiring, sr => {
        let report = check_equivalence(&l.expr, &r.expr, &cfg, sr).map_err(|e| {
            let status = match e {
                EquivalenceError::Eval(_) => 1,
                _ => 2,
            };
            Failure {
                status,
                human: format!("error: {e}"),
                record: json!({ "error": "equivalence", "message": e.to_string() }),
            }
        })?;
        let record = report_json(&report, sr);
        match report.counterexample() {
            None => {
                out.emit(
                    &format!("equal on all {} trials ({}, seed {})", report.trials, sr.name(), cli.seed),
                    record,
                );
                Ok(())
            }
            Some(c) => Err(Failure::semantic(
                format!(
                    "counterexample in trial {}: results differ at {:?}: {} vs {}\nbindings: {}",
                    c.trial + 1,
                    c.position,
                    c.left,
                    c.right,
                    bindings_to_json(&c.bindings, sr)
                ),
                record,
            )),
        }
    })
}

const RULE_ARGUMENTS: [(&str, &str); 16] = [
    ("PERMUTATION", "e.g. 2,1"),
    ("[SLOT]", "nested operand, default 1"),
    ("GROUP [OUTPUT]", "e.g. 2,3 j"),
    ("[SLOT]", "nested operand, default 1"),
    ("SYMBOL OCCURRENCES FRESH", "e.g. i 2 j"),
    ("SLOT [first|second]", ""),
    ("SLOT", "operand holding the aggregate"),
    ("", "(target is the aggregate)"),
    ("", ""),
    ("SLOT", ""),
    ("INDEX", "e.g. i"),
    ("[INDEX]", "(target is the constant leaf)"),
    ("", "(target is the delta leaf)"),
    ("", ""),
    ("PATH", "e.g. [(2,3),(1,2)]"),
    ("MAP", "e.g. i=p,j=q"),
];

pub fn rules(out: &Reporter) -> Outcome {
    let human: Vec<String> = RULE_NAMES
        .iter()
        .zip(RULE_ARGUMENTS)
        .map(|(name, (args, note))| format!("{name:<20}{args:<26}{note}").trim_end().to_string())
        .collect();
    let record: BTreeMap<&str, Value> = RULE_NAMES
        .iter()
        .zip(RULE_ARGUMENTS)
        .map(|(name, (args, note))| (*name, json!({ "arguments": args, "note": note })))
        .collect();
    out.emit(&human.join("\n"), json!(record));
    Ok(())
}
