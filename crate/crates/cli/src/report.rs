//! Human and structured output.

use std::fmt::Write as _;
use std::io::Write as _;

use einsum_core::parser::SourceSpan;
use serde_json::{json, Value};

use crate::OutputFormat;

/// A command that did not succeed: its exit status and what to print.
#[derive(Debug)]
pub struct Failure {
    pub status: u8,
    pub human: String,
    pub record: Value,
}

impl Failure {
    /// Usage, parse or input error (exit 2).
    pub fn usage(kind: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        Failure {
            status: 2,
            human: format!("error: {message}"),
            record: json!({ "error": kind, "message": message }),
        }
    }

    /// Semantic failure (exit 1).
    pub fn semantic(human: String, record: Value) -> Self {
        Failure {
            status: 1,
            human,
            record,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::usage("input", format!("{e:#}"))
    }
}

pub struct Reporter {
    format: OutputFormat,
}

impl Reporter {
    pub fn new(format: OutputFormat) -> Self {
        Reporter { format }
    }

    // Write errors (a closed pipe, say) are ignored rather than panicking.
    pub fn emit(&self, human: &str, record: Value) {
        let mut stdout = std::io::stdout().lock();
        let _ = match self.format {
            OutputFormat::Human => writeln!(stdout, "{human}"),
            OutputFormat::Structured => writeln!(stdout, "{record}"),
        };
    }

    pub fn failure(&self, f: &Failure) {
        let _ = match self.format {
            OutputFormat::Human => writeln!(std::io::stderr().lock(), "{}", f.human),
            OutputFormat::Structured => writeln!(std::io::stdout().lock(), "{}", f.record),
        };
    }
}

/// The source line containing `span`, with a caret run under it.
pub fn snippet(text: &str, span: SourceSpan) -> String {
    let start = span.start.min(text.len());
    let line_start = text[..start].rfind('\n').map_or(0, |k| k + 1);
    let line_end = text[start..].find('\n').map_or(text.len(), |k| start + k);
    let column = text[line_start..start].chars().count();
    let width = text
        .get(start..span.end.min(line_end))
        .map_or(0, |s| s.chars().count())
        .max(1);
    let mut out = String::new();
    let _ = writeln!(out, "  {}", &text[line_start..line_end]);
    let _ = write!(out, "  {}{}", " ".repeat(column), "^".repeat(width));
    out
}

pub fn span_json(span: SourceSpan) -> Value {
    json!([span.start, span.end])
}
