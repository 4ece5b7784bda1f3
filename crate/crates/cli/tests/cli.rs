use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_picoforge"));
    c.env("PICOFORGE_COLOR", "never");
    c
}

fn write(dir: &Path, name: &str, src: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, src).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const OK: &str = "\\begin{pspicture}(0,0)(1,1)\\psline(0,0)(1,1)\\end{pspicture}\n";

#[test]
fn writes_next_to_the_input() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "a.pst", OK);
    let o = bin().arg(&f).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(d.path().join("a.svg")).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
}

#[test]
fn eps_to_stdout() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "a.pst", OK);
    let o = bin().args(["--format", "eps", "-o", "-"]).arg(&f).output().unwrap();
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("%!PS-Adobe-3.0 EPSF-3.0"));
    assert!(out.contains("%%BoundingBox: 0 0 29 29"));
}

#[test]
fn warnings_exit_one_and_strict_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "w.pst", "\\psset{frobnicate=1}\\psline(0,0)(1,1)\n");
    let o = bin().args(["-o", "-"]).arg(&f).output().unwrap();
    assert_eq!(code(&o), 1);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("w.pst:1:"), "{err}");
    assert!(err.contains("Graphics parameter `frobnicate' not defined."), "{err}");
    let o = bin().args(["--strict", "-o", "-"]).arg(&f).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn errors_exit_two_without_output() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "e.pst", "\\psscaleboxto(0,0){x}\n");
    let o = bin().arg(&f).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(!d.path().join("e.svg").exists());
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(code(&bin().output().unwrap()), 3);
    assert_eq!(code(&bin().arg("--no-such-flag").output().unwrap()), 3);
    assert_eq!(code(&bin().args(["--unit", "abc", "x.pst"]).output().unwrap()), 3);
    assert_eq!(code(&bin().arg("/nonexistent/x.pst").output().unwrap()), 3);
}

#[test]
fn many_inputs_into_a_directory() {
    let d = tempfile::tempdir().unwrap();
    let files: Vec<_> = (0..6).map(|i| write(d.path(), &format!("f{i}.pst"), OK)).collect();
    let out = d.path().join("out");
    let o = bin().arg("-o").arg(&out).args(&files).output().unwrap();
    assert_eq!(code(&o), 0);
    for i in 0..6 {
        assert!(out.join(format!("f{i}.svg")).exists());
    }
}

#[test]
fn unit_flag_scales_the_picture() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "u.pst", "\\begin{pspicture}(0,0)(10,20)\\end{pspicture}\n");
    let o = bin().args(["--unit", "1pt", "--format", "eps", "-o", "-"]).arg(&f).output().unwrap();
    assert!(String::from_utf8(o.stdout).unwrap().contains("%%BoundingBox: 0 0 10 20"));
}

#[test]
fn dumps() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "a.pst", OK);
    let o = bin().arg("--dump-ast").arg(&f).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("\\psline"));
    let o = bin().arg("--dump-scene").arg(&f).output().unwrap();
    assert!(!o.stdout.is_empty());
    assert!(!d.path().join("a.svg").exists());
}

#[test]
fn golden_check_and_bless() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "g.pst", OK);
    let o = bin().arg("golden").arg("check").arg(d.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin().arg("golden").arg("bless").arg(d.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    let o = bin().arg("golden").arg("check").arg(d.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    fs::write(d.path().join("g.svg"), "tampered").unwrap();
    let o = bin().arg("golden").arg("check").arg(d.path()).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn corpus_is_current() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus");
    let o = bin().arg("golden").arg("check").arg(&dir).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}
