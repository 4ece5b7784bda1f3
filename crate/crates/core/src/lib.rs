pub mod diag;
pub mod emit;
pub mod fixnum;
pub mod geom;
pub mod golden;
pub mod scene;
pub mod state;
pub mod syntax;

use diag::{Diagnostic, Diagnostics, Severity};
use emit::{Format, RenderOptions};
use fixnum::Sp;
use scene::{DefaultMeasure, EvalOptions, Scene};
use state::State;
use syntax::Ast;

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub format: Format,
    /// Warnings become errors.
    pub strict: bool,
    /// Initial value of the unit registers.
    pub unit: Option<Sp>,
    pub max_diagnostics: usize,
    pub precision: u32,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            format: Format::Svg,
            strict: false,
            unit: None,
            max_diagnostics: diag::DEFAULT_CAP,
            precision: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub ast: Ast,
    pub scene: Scene,
    /// None when any error was reported.
    pub output: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub dropped: usize,
}

impl Compiled {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn has_warnings(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Warning)
    }
}

pub fn initial_state(unit: Option<Sp>) -> State {
    let mut st = State::new();
    if let Some(u) = unit {
        st.p.units.unit = u;
        st.p.units.xunit = u;
        st.p.units.yunit = u;
        st.p.units.runit = u;
    }
    st
}

/// Parse, evaluate and render one document.
pub fn compile(src: &str, opts: &CompileOptions) -> Compiled {
    let (ast, parse_diags) = syntax::parse(src);
    let mut diags = Diagnostics::with_cap(opts.max_diagnostics);
    diags.extend(parse_diags);
    let st = initial_state(opts.unit);
    let scene = scene::eval_with(&ast, &st, &mut diags, &DefaultMeasure, EvalOptions { strict: opts.strict });
    let dropped = diags.dropped();
    let mut diagnostics = diags.into_vec();
    if opts.strict {
        for d in &mut diagnostics {
            d.severity = Severity::Error;
        }
    }
    let failed = diagnostics.iter().any(|d| d.severity == Severity::Error);
    let output = (!failed).then(|| {
        emit::emit(&scene, &RenderOptions { format: opts.format, precision: opts.precision, background: None })
    });
    Compiled { ast, scene, output, diagnostics, dropped }
}
