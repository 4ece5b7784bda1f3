//! Diagnostics shared by every stage.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// A source location. Lines and columns are 1-based; columns count chars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into(), span }
    }

    pub fn warning(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into(), span }
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!("{}:{}:{}: {}: {}", file, self.span.line, self.span.col, self.severity, self.message)
    }
}

/// Collects diagnostics, keeping at most `cap` of them.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    items: Vec<Diagnostic>,
    cap: usize,
    dropped: usize,
}

pub const DEFAULT_CAP: usize = 100;

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics::with_cap(DEFAULT_CAP)
    }
}

impl Diagnostics {
    pub fn with_cap(cap: usize) -> Self {
        Diagnostics { items: Vec::new(), cap, dropped: 0 }
    }

    pub fn push(&mut self, d: Diagnostic) {
        if self.items.len() < self.cap {
            self.items.push(d);
        } else {
            self.dropped += 1;
        }
    }

    pub fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.push(Diagnostic::error(span, msg));
    }

    pub fn warning(&mut self, span: Span, msg: impl Into<String>) {
        self.push(Diagnostic::warning(span, msg));
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.dropped += other.dropped;
        for d in other.items {
            self.push(d);
        }
    }

    pub fn items(&self) -> &[Diagnostic] {
        &self.items
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn has_warnings(&self) -> bool {
        self.items.iter().any(|d| d.severity == Severity::Warning)
    }

    pub fn into_vec(self) -> Vec<Diagnostic> {
        self.items
    }
}

/// Maps byte offsets to line and column.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(src: &str) -> Self {
        let mut starts = vec![0];
        for (i, b) in src.bytes().enumerate() {
            if b == b'\n' {
                starts.push(i + 1);
            }
        }
        LineIndex { starts }
    }

    pub fn span(&self, src: &str, start: usize, end: usize) -> Span {
        let line = match self.starts.binary_search(&start) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let col = src[self.starts[line]..start].chars().count() + 1;
        Span { start, end, line: line as u32 + 1, col: col as u32 }
    }
}

/// A diagnostics sink bound to one source span.
pub struct Reporter<'a> {
    pub diags: &'a mut Diagnostics,
    pub span: Span,
}

impl<'a> Reporter<'a> {
    pub fn new(diags: &'a mut Diagnostics, span: Span) -> Self {
        Reporter { diags, span }
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.diags.warning(self.span, msg);
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.diags.error(self.span, msg);
    }
}
