//! Golden-file regression checks over a directory of `.pst` sources.

use crate::emit::Format;
use crate::{compile, CompileOptions};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// Output differs from the stored file.
    Mismatch,
    /// No stored file.
    Missing,
    Blessed,
    /// The source did not compile.
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub source: PathBuf,
    pub format: Format,
    pub status: Status,
}

impl Entry {
    pub fn ok(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Blessed)
    }

    pub fn line(&self) -> String {
        let name = self.source.with_extension(self.format.extension());
        let what = match &self.status {
            Status::Pass => "pass".to_string(),
            Status::Mismatch => "FAIL (output differs)".to_string(),
            Status::Missing => "FAIL (no stored output)".to_string(),
            Status::Blessed => "blessed".to_string(),
            Status::Failed(m) => format!("FAIL ({m})"),
        };
        format!("{}: {}", name.display(), what)
    }
}

/// The `.pst` files of `dir`, sorted by name.
pub fn sources(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pst"))
        .collect();
    v.sort();
    Ok(v)
}

/// Render one source in one format, as the corpus stores it.
pub fn render(src: &str, format: Format) -> Result<String, String> {
    let c = compile(src, &CompileOptions { format, ..CompileOptions::default() });
    match c.output {
        Some(o) => Ok(o),
        None => {
            let first = c.diagnostics.iter().find(|d| d.severity == crate::diag::Severity::Error);
            Err(first.map_or_else(|| "compile error".to_string(), |d| d.message.clone()))
        }
    }
}

/// Check (or with `bless`, rewrite) every stored output in `dir`.
pub fn run(dir: &Path, bless: bool) -> io::Result<Vec<Entry>> {
    let mut out = Vec::new();
    for source in sources(dir)? {
        let src = fs::read_to_string(&source)?;
        for format in [Format::Svg, Format::Eps] {
            let target = source.with_extension(format.extension());
            let status = match render(&src, format) {
                Err(m) => Status::Failed(m),
                Ok(text) if bless => {
                    fs::write(&target, text)?;
                    Status::Blessed
                }
                Ok(text) => match fs::read(&target) {
                    Ok(stored) if stored == text.as_bytes() => Status::Pass,
                    Ok(_) => Status::Mismatch,
                    Err(e) if e.kind() == io::ErrorKind::NotFound => Status::Missing,
                    Err(e) => return Err(e),
                },
            };
            out.push(Entry { source: source.clone(), format, status });
        }
    }
    Ok(out)
}
