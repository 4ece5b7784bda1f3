use clap::{Parser, Subcommand, ValueEnum};
use picoforge::diag::{Diagnostic, Severity};
use picoforge::emit::Format;
use picoforge::fixnum::{parse_length, Sp};
use picoforge::{compile, golden, scene, syntax, CompileOptions, Compiled};
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::{fs, thread};

const EXIT_OK: u8 = 0;
const EXIT_WARN: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Svg,
    Eps,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GoldenMode {
    Check,
    Bless,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare (or rewrite) the stored outputs of a corpus directory.
    Golden { mode: GoldenMode, dir: PathBuf },
}

/// Compile PSTricks-style picture sources to SVG or EPS.
#[derive(Debug, Parser)]
#[command(name = "picoforge", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Input files.
    inputs: Vec<PathBuf>,

    #[arg(long, value_enum, default_value = "svg")]
    format: FormatArg,

    /// Output file, directory, or `-` for stdout.
    #[arg(short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,

    /// Treat warnings and raw PostScript as errors.
    #[arg(long)]
    strict: bool,

    /// Initial value of the unit registers, e.g. `1cm`.
    #[arg(long, value_name = "LEN")]
    unit: Option<String>,

    #[arg(long, value_name = "N", default_value_t = 100)]
    max_diagnostics: usize,

    /// Print the parsed document instead of rendering.
    #[arg(long)]
    dump_ast: bool,

    /// Print the evaluated scene instead of rendering.
    #[arg(long)]
    dump_scene: bool,
}

fn use_color() -> bool {
    match std::env::var("PICOFORGE_COLOR").as_deref() {
        Ok("always") => true,
        Ok("never") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

fn render_diag(d: &Diagnostic, file: &str, color: bool) -> String {
    if !color {
        return d.render(file);
    }
    let code = match d.severity {
        Severity::Error => "31",
        Severity::Warning => "33",
    };
    format!("\x1b[1m{}:{}:{}:\x1b[0m \x1b[1;{code}m{}:\x1b[0m {}", file, d.span.line, d.span.col, d.severity, d.message)
}

struct Job {
    input: PathBuf,
    result: Result<Compiled, String>,
}

fn compile_all(inputs: &[PathBuf], opts: &CompileOptions) -> Vec<Job> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(inputs.len().max(1));
    let chunk = inputs.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .map(|files| {
                s.spawn(move || {
                    files
                        .iter()
                        .map(|f| Job {
                            input: f.clone(),
                            result: fs::read_to_string(f).map(|src| compile(&src, opts)).map_err(|e| e.to_string()),
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn target_for(input: &Path, output: &Option<PathBuf>, multi: bool, format: Format) -> Option<PathBuf> {
    let name = input.with_extension(format.extension());
    match output {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) if multi || p.is_dir() => Some(p.join(name.file_name().unwrap_or_default())),
        Some(p) => Some(p.clone()),
        None => Some(name),
    }
}

fn run_golden(mode: GoldenMode, dir: &Path) -> u8 {
    let entries = match golden::run(dir, matches!(mode, GoldenMode::Bless)) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("picoforge: {}: {e}", dir.display());
            return EXIT_USAGE;
        }
    };
    let failed = entries.iter().filter(|e| !e.ok()).count();
    for e in &entries {
        println!("{}", e.line());
    }
    println!("{} outputs, {} passed, {} failed", entries.len(), entries.len() - failed, failed);
    if failed > 0 {
        EXIT_ERROR
    } else {
        EXIT_OK
    }
}

fn run(cli: Cli) -> u8 {
    if let Some(Command::Golden { mode, dir }) = cli.command {
        return run_golden(mode, &dir);
    }
    if cli.inputs.is_empty() {
        eprintln!("picoforge: no input files");
        return EXIT_USAGE;
    }
    let unit = match &cli.unit {
        Some(u) => match parse_length(u, Sp::pt(1)) {
            Ok(v) => Some(v),
            Err(e) => {
                eprintln!("picoforge: --unit {u}: {e}");
                return EXIT_USAGE;
            }
        },
        None => None,
    };
    let format = match cli.format {
        FormatArg::Svg => Format::Svg,
        FormatArg::Eps => Format::Eps,
    };
    let opts = CompileOptions {
        format,
        strict: cli.strict,
        unit,
        max_diagnostics: cli.max_diagnostics,
        ..CompileOptions::default()
    };
    let multi = cli.inputs.len() > 1;
    if multi {
        if let Some(dir) = cli.output.as_ref().filter(|p| p.as_os_str() != "-") {
            if let Err(e) = fs::create_dir_all(dir) {
                eprintln!("picoforge: {}: {e}", dir.display());
                return EXIT_USAGE;
            }
        }
    }
    let color = use_color();
    let mut code = EXIT_OK;
    let stdout = std::io::stdout();
    for job in compile_all(&cli.inputs, &opts) {
        let file = job.input.display().to_string();
        let c = match job.result {
            Ok(c) => c,
            Err(e) => {
                eprintln!("picoforge: {file}: {e}");
                code = code.max(EXIT_USAGE);
                continue;
            }
        };
        for d in &c.diagnostics {
            eprintln!("{}", render_diag(d, &file, color));
        }
        if c.dropped > 0 {
            eprintln!("{file}: {} more diagnostics suppressed", c.dropped);
        }
        if cli.dump_ast || cli.dump_scene {
            let mut out = stdout.lock();
            if cli.dump_ast {
                let _ = out.write_all(syntax::print(&c.ast).as_bytes());
            }
            if cli.dump_scene {
                let _ = out.write_all(scene::dump(&c.scene).as_bytes());
            }
        } else if let Some(text) = &c.output {
            let written = match target_for(&job.input, &cli.output, multi, format) {
                None => stdout.lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
                Some(t) => fs::write(&t, text).map_err(|e| format!("{}: {e}", t.display())),
            };
            if let Err(e) = written {
                eprintln!("picoforge: {e}");
                code = code.max(EXIT_USAGE);
                continue;
            }
        }
        let level = if c.has_errors() {
            EXIT_ERROR
        } else if c.has_warnings() {
            EXIT_WARN
        } else {
            EXIT_OK
        };
        code = code.max(level);
    }
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE } else { EXIT_OK });
        }
    };
    ExitCode::from(run(cli))
}
