use picoforge::diag::Severity;
use picoforge::fixnum::{parse_length, Sp};
use picoforge::geom::{BBox, Seg};
use picoforge::scene::{bounds_of, Layer, LayerKind, Node, Paint, Scene};
use picoforge::{compile, CompileOptions, Compiled};

fn run(src: &str) -> Compiled {
    let c = compile(src, &CompileOptions::default());
    assert!(c.diagnostics.is_empty(), "{src}: {:?}", c.diagnostics);
    c
}

fn decorated(s: &Scene) -> Vec<(&Vec<Layer>, bool)> {
    let mut out = Vec::new();
    s.walk(&mut |n| {
        if let Node::Decorated { layers, starred } = n {
            out.push((layers, *starred));
        }
    });
    out
}

fn pt(s: &str) -> Sp {
    parse_length(s, Sp::pt(1)).unwrap()
}

fn bounds(src: &str) -> BBox {
    bounds_of(&run(src).scene.nodes).unwrap()
}

fn close(a: Sp, b: Sp) -> bool {
    (a.raw() - b.raw()).abs() <= 1
}

#[test]
fn full_decoration_in_paint_order() {
    let c = run("\\psline[shadow=true,border=1pt,doubleline=true,showpoints=true,fillstyle=solid](0,0)(1,1)(2,0)");
    let d = decorated(&c.scene);
    let kinds: Vec<_> = d[0].0.iter().map(|l| l.kind).collect();
    use LayerKind::*;
    assert_eq!(kinds, [Shadow, Border, Fill, Stroke, DoubleInner, ShowPoints]);
}

#[test]
fn starred_frame_fills_with_line_colour() {
    let c = run("\\psframe*[linecolor=red](0,0)(1,1)");
    let (layers, starred) = decorated(&c.scene)[0];
    assert!(starred);
    assert!(layers.iter().all(|l| l.kind != LayerKind::Stroke));
    let fill = layers.iter().find(|l| l.kind == LayerKind::Fill).unwrap();
    match &fill.paints[0] {
        Paint::Fill { color, .. } => assert_eq!(color.hex(), "#ff0000"),
        p => panic!("{p:?}"),
    }
}

fn moves(src: &str) -> usize {
    let c = run(src);
    let mut n = 0;
    for (layers, _) in decorated(&c.scene) {
        for l in layers.iter().filter(|l| l.kind == LayerKind::Stroke) {
            for p in &l.paints {
                if let Paint::Stroke { path, .. } = p {
                    n += path.segs.iter().filter(|s| matches!(s, Seg::Move(_))).count();
                }
            }
        }
    }
    n
}

#[test]
fn liftpen_controls_joins() {
    let body = "{\\psline(0,0)(1,0)\\psline(2,1)(3,1)}";
    assert_eq!(moves(&format!("\\pscustom[liftpen=0]{body}")), 1);
    assert_eq!(moves(&format!("\\pscustom[liftpen=2]{body}")), 2);
}

#[test]
fn liftpen_outside_custom_is_ignored() {
    let c = compile("\\psline[liftpen=2](0,0)(1,1)", &CompileOptions::default());
    assert!(c.output.is_some());
}

#[test]
fn uput_right_keeps_labelsep() {
    let b = bounds("\\uput[r](0,0){\\pstbox(10pt,4pt,2pt){}}");
    assert!(close(b.x0, pt("5pt")), "{b:?}");
    assert!(close(b.x1, pt("15pt")), "{b:?}");
}

#[test]
fn uput_up_uses_labelsep_below_the_box() {
    let b = bounds("\\uput{2pt}[u](0,0){\\pstbox(10pt,4pt,2pt){}}");
    assert!(close(b.y0, pt("2pt")), "{b:?}");
    assert!(close(b.x0, pt("-5pt")), "{b:?}");
}

#[test]
fn rput_rotation_turns_the_box() {
    let b = bounds("\\rput{90}(0,0){\\pstbox(10pt,4pt,0pt){}}");
    assert!(close(b.x0, pt("-2pt")) && close(b.x1, pt("2pt")), "{b:?}");
    assert!(close(b.y0, pt("-5pt")) && close(b.y1, pt("5pt")), "{b:?}");
}

#[test]
fn rput_reference_point() {
    let b = bounds("\\rput[bl](1pt,2pt){\\pstbox(10pt,4pt,1pt){}}");
    assert!(close(b.x0, pt("1pt")) && close(b.y0, pt("2pt")), "{b:?}");
}

#[test]
fn framebox_encloses_content_with_margin() {
    // framesep 3pt + linewidth 0.8pt on each side, depth included; the
    // box starts at the current point.
    let b = bounds("\\psframebox{\\pstbox(20pt,10pt,2pt){}}");
    assert!(close(b.x0, Sp::ZERO), "{b:?}");
    assert!(close(b.x1, pt("27.6pt")), "{b:?}");
    assert!(close(b.y0, pt("-5.8pt")), "{b:?}");
    assert!(close(b.y1, pt("13.8pt")), "{b:?}");
}

#[test]
fn picture_bbox_comes_from_the_corners() {
    let c = run("\\begin{pspicture}(0,0)(2,1)\\psline(0,0)(5,5)\\end{pspicture}");
    let unit = pt("1cm");
    assert_eq!(c.scene.bbox.x1, unit + unit);
    assert_eq!(c.scene.bbox.y1, unit);
}

#[test]
fn unit_option_sets_every_register() {
    let opts = CompileOptions { unit: Some(pt("1pt")), ..CompileOptions::default() };
    let c = compile("\\begin{pspicture}(0,0)(10,20)\\pscircle(5,5){2}\\end{pspicture}", &opts);
    assert_eq!(c.scene.bbox.x1, pt("10pt"));
    assert_eq!(c.scene.bbox.y1, pt("20pt"));
    let b = bounds_of(&c.scene.nodes).unwrap();
    // dimen=outer puts the outer edge of the stroke on the radius.
    assert!(close(b.x0, pt("3pt")) && close(b.x1, pt("7pt")), "{b:?}");
}

#[test]
fn strict_promotes_warnings() {
    let src = "\\psset{frobnicate=1}\\psline(0,0)(1,1)";
    let lax = compile(src, &CompileOptions::default());
    assert!(lax.has_warnings() && !lax.has_errors());
    assert!(lax.output.is_some());
    let strict = compile(src, &CompileOptions { strict: true, ..CompileOptions::default() });
    assert!(strict.diagnostics.iter().all(|d| d.severity == Severity::Error));
    assert!(strict.output.is_none());
}

#[test]
fn diagnostic_cap_counts_the_rest() {
    let src = "\\psset{a=1}".repeat(10);
    let c = compile(&src, &CompileOptions { max_diagnostics: 3, ..CompileOptions::default() });
    assert_eq!(c.diagnostics.len(), 3);
    assert_eq!(c.dropped, 7);
}

#[test]
fn hatch_is_cut_to_the_region() {
    let c = run("\\psframe[fillstyle=vlines,hatchangle=0](0,0)(1,1)");
    let (layers, _) = decorated(&c.scene)[0];
    let fill = layers.iter().find(|l| l.kind == LayerKind::Fill).unwrap();
    let Paint::Hatch { lines, .. } = &fill.paints[0] else { panic!() };
    assert!(!lines.is_empty());
}

#[test]
fn uput_diagonal_uses_the_707_factor() {
    let b = bounds("\\uput[ur](0,0){\\pstbox(8pt,4pt,1pt){}}");
    assert!(close(b.x0, pt("3.535pt")) && close(b.y0, pt("3.535pt")), "{b:?}");
    let b = bounds("\\uput[dl](0,0){\\pstbox(8pt,4pt,1pt){}}");
    assert!(close(b.x1, -pt("3.535pt")) && close(b.y1, -pt("3.535pt")), "{b:?}");
}

#[test]
fn single_point_line_is_an_arity_error() {
    let c = compile("\\psline(1,1)", &CompileOptions::default());
    assert!(c.has_errors());
    assert!(c.diagnostics[0].message.contains("1 coordinate(s)"));
}
