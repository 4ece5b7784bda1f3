//! Graphics state: parameter registry, colors, styles, and resolution of
//! raw coordinates, angles and lengths.

use crate::diag::Reporter;
use crate::fixnum::{parse_length, parse_number, Num, Sp, UnitRegisters};
use crate::syntax::{parse_angle, parse_coord, parse_keyvals, RawAngle, RawCoord};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Color {
    Gray(f64),
    Rgb(f64, f64, f64),
    Hsb(f64, f64, f64),
    Cmyk(f64, f64, f64, f64),
}

impl Color {
    pub fn to_rgb(self) -> (f64, f64, f64) {
        let c = |v: f64| v.clamp(0.0, 1.0);
        match self {
            Color::Gray(g) => (c(g), c(g), c(g)),
            Color::Rgb(r, g, b) => (c(r), c(g), c(b)),
            Color::Hsb(h, s, v) => hsb_to_rgb(c(h), c(s), c(v)),
            Color::Cmyk(cy, m, y, k) => {
                let k = c(k);
                ((1.0 - c(cy)) * (1.0 - k), (1.0 - c(m)) * (1.0 - k), (1.0 - c(y)) * (1.0 - k))
            }
        }
    }
}

fn hsb_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h6 = (h * 6.0) % 6.0;
    let i = h6.floor();
    let f = h6 - i;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match i as u8 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorRef {
    pub name: String,
    pub color: Color,
}

impl ColorRef {
    pub fn gray(name: &str, g: f64) -> ColorRef {
        ColorRef { name: name.to_string(), color: Color::Gray(g) }
    }

    pub fn to_rgb(&self) -> (f64, f64, f64) {
        self.color.to_rgb()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    None,
    Solid,
    Dashed,
    Dotted,
}

impl LineStyle {
    pub fn name(self) -> &'static str {
        match self {
            LineStyle::None => "none",
            LineStyle::Solid => "solid",
            LineStyle::Dashed => "dashed",
            LineStyle::Dotted => "dotted",
        }
    }
}

/// A primitive fill operation; named fill styles expand to a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillOp {
    Solid,
    EoFill,
    VLines,
    HLines,
}

pub fn fill_ops(name: &str) -> Option<Vec<FillOp>> {
    use FillOp::*;
    Some(match name {
        "solid" => vec![Solid],
        "eofill" => vec![EoFill],
        "vlines" => vec![VLines],
        "vlines*" => vec![Solid, VLines],
        "hlines" => vec![HLines],
        "hlines*" => vec![Solid, HLines],
        "crosshatch" => vec![VLines, HLines],
        "crosshatch*" => vec![Solid, VLines, HLines],
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapKind {
    /// `c`: round cap at the end.
    Round,
    /// `cc`: round cap pulled in by half a line width.
    RoundIn,
    /// `C`: square cap.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowKind {
    None,
    Head { double: bool },
    RevHead { double: bool },
    TBar { centered: bool },
    Bracket { out: bool },
    RoundBracket { out: bool },
    Dot { open: bool, tangent: bool },
    Cap(CapKind),
    HeadTBar { centered: bool },
    TBarHead,
}

/// Look up an end-side arrow name.
pub fn arrow_kind(name: &str) -> Option<ArrowKind> {
    use ArrowKind::*;
    Some(match name {
        "" => None,
        ">" => Head { double: false },
        ">>" => Head { double: true },
        "<" => RevHead { double: false },
        "<<" => RevHead { double: true },
        "|" => TBar { centered: false },
        "|*" => TBar { centered: true },
        "]" => Bracket { out: false },
        "[" => Bracket { out: true },
        ")" => RoundBracket { out: false },
        "(" => RoundBracket { out: true },
        "oo" => Dot { open: true, tangent: false },
        "o" => Dot { open: true, tangent: true },
        "**" => Dot { open: false, tangent: false },
        "*" => Dot { open: false, tangent: true },
        "c" => Cap(CapKind::Round),
        "cc" => Cap(CapKind::RoundIn),
        "C" => Cap(CapKind::Square),
        ">|" => HeadTBar { centered: false },
        ">|*" => HeadTBar { centered: true },
        "<|" => TBarHead,
        _ => return Option::None,
    })
}

/// The start-side translation table, base entries then the extension.
pub const ARROW_TABLE: &[(&str, &str)] = &[
    ("<", ">"),
    ("<<", ">>"),
    (">", "<"),
    (">>", "<<"),
    ("(", ")"),
    ("[", "]"),
    (")", "("),
    ("]", "["),
    ("|>", "<|"),
    ("|<*", ">|*"),
    ("|<", ">|"),
];

pub fn translate_start(name: &str) -> &str {
    ARROW_TABLE.iter().find(|(a, _)| *a == name).map_or(name, |(_, b)| b)
}

/// Resolve an arrows spec such as `<->` into (start, end) kinds.
pub fn resolve_arrows(spec: &str) -> Result<(ArrowKind, ArrowKind), String> {
    let spec = spec.trim();
    let (a, b) = spec.split_once('-').unwrap_or((spec, ""));
    let start = arrow_kind(translate_start(a));
    let end = arrow_kind(b);
    match (start, end) {
        (Some(s), Some(e)) => Ok((s, e)),
        _ => Err(format!("Bad arrows specification: {spec}")),
    }
}

/// A length that may track the line width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LenExpr {
    Abs(Sp),
    /// A multiple of `\pslinewidth`, read at draw time.
    Linewidth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dimen {
    Outer,
    Middle,
    Inner,
}

impl Dimen {
    pub fn k(self) -> f64 {
        match self {
            Dimen::Outer => 0.5,
            Dimen::Middle => 0.0,
            Dimen::Inner => -0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ref {
    pub x: f64,
    /// `None` selects the baseline.
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot {
    /// An empty rotation (`0` or `U`).
    pub active: bool,
    /// Counter the accumulated rotation first.
    pub reset: bool,
    pub angle: f64,
}

impl Rot {
    pub const NONE: Rot = Rot { active: false, reset: false, angle: 0.0 };

    /// Net rotation to apply given the enclosing accumulated rotation.
    pub fn resolve(self, accumulated: f64) -> f64 {
        if !self.active {
            0.0
        } else if self.reset {
            self.angle - accumulated
        } else {
            self.angle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefAngle {
    pub angle: f64,
    /// Quadrant code for the named forms: (x side, y side).
    pub code: Option<(u8, u8)>,
}

pub const REFANGLE_TABLE: &[(&str, f64, (u8, u8))] = &[
    ("r", 0.0, (2, 0)),
    ("u", 90.0, (0, 2)),
    ("l", 180.0, (1, 0)),
    ("d", -90.0, (0, 1)),
    ("ur", 45.0, (2, 2)),
    ("ul", 135.0, (1, 2)),
    ("dr", -135.0, (2, 1)),
    ("dl", -45.0, (1, 1)),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleUnit {
    Degrees,
    /// `\degrees[n]`: full circle is n.
    Divided(f64),
    Radians,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMode {
    pub special_coor: bool,
    pub polar: bool,
    pub angle_unit: AngleUnit,
}

impl Default for EvalMode {
    fn default() -> Self {
        EvalMode { special_coor: false, polar: false, angle_unit: AngleUnit::Degrees }
    }
}

impl EvalMode {
    pub fn to_degrees(&self, v: f64) -> f64 {
        match self.angle_unit {
            AngleUnit::Degrees => v,
            AngleUnit::Divided(n) => v * 360.0 / n,
            AngleUnit::Radians => v * 57.2956,
        }
    }
}

/// The resolved parameter record.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub units: UnitRegisters,
    pub linewidth: Sp,
    pub linecolor: ColorRef,
    pub fillcolor: ColorRef,
    pub bordercolor: ColorRef,
    pub doublecolor: ColorRef,
    pub shadowcolor: ColorRef,
    pub hatchcolor: ColorRef,
    pub gridcolor: ColorRef,
    pub subgridcolor: ColorRef,
    pub gridlabelcolor: ColorRef,
    pub linestyle: LineStyle,
    pub dash: [Sp; 4],
    pub dashadjust: bool,
    pub dotsep: Sp,
    pub linecap: u8,
    pub fillstyle_name: String,
    pub fillstyle: Vec<FillOp>,
    pub hatchwidth: Sp,
    pub hatchsep: Sp,
    pub hatchangle: f64,
    pub hatchwidthinc: Sp,
    pub hatchsepinc: Sp,
    pub arrows: (ArrowKind, ArrowKind),
    pub arrowsize: (Sp, f64),
    pub arrowlength: f64,
    pub arrowinset: f64,
    pub arrowscale: (f64, f64),
    pub tbarsize: (Sp, f64),
    pub bracketlength: f64,
    pub rbracketlength: f64,
    pub dotsize: (Sp, f64),
    pub dotstyle: String,
    pub dotscale: (f64, f64),
    pub dotangle: f64,
    pub linearc: Sp,
    pub framearc: f64,
    pub cornersize_absolute: bool,
    pub dimen: Dimen,
    pub border: Sp,
    pub doubleline: bool,
    pub doublesep: LenExpr,
    pub shadow: bool,
    pub shadowsize: Sp,
    pub shadowangle: f64,
    pub showpoints: bool,
    pub curvature: (f64, f64, f64),
    pub gridwidth: Sp,
    pub subgridwidth: Sp,
    pub subgriddiv: i64,
    pub griddots: i64,
    pub subgriddots: i64,
    pub gridlabels: Sp,
    pub framesep: Sp,
    pub boxsep: bool,
    pub labelsep: Sp,
    pub radius: Sp,
    pub arcsep_a: Sp,
    pub arcsep_b: Sp,
    pub origin: (Sp, Sp),
    pub swapaxes: bool,
    pub liftpen: u8,
    pub linetype: i64,
    pub ref_: Ref,
    pub rot: Rot,
    pub refangle: RefAngle,
    pub shift: Sp,
    pub gangle: f64,
    pub trimode: u8,
    pub trimode_star: bool,
    pub showgrid: bool,
    pub pst_debug: i64,
}

pub const DOTSTYLES: &[&str] = &[
    "*",
    "o",
    "Bo",
    "square",
    "square*",
    "Bsquare",
    "triangle",
    "triangle*",
    "Btriangle",
    "pentagon",
    "pentagon*",
    "Bpentagon",
    "diamond",
    "diamond*",
    "Bdiamond",
    "+",
    "B+",
    "x",
    "asterisk",
    "Basterisk",
    "oplus",
    "otimes",
    "|",
    "B|",
];

fn predefined_colors() -> HashMap<String, Color> {
    let mut m = HashMap::new();
    for (n, g) in [("black", 0.0), ("darkgray", 0.25), ("gray", 0.5), ("lightgray", 0.75), ("white", 1.0)] {
        m.insert(n.to_string(), Color::Gray(g));
    }
    for (n, r, g, b) in [
        ("red", 1.0, 0.0, 0.0),
        ("green", 0.0, 1.0, 0.0),
        ("blue", 0.0, 0.0, 1.0),
        ("yellow", 1.0, 1.0, 0.0),
        ("cyan", 0.0, 1.0, 1.0),
        ("magenta", 1.0, 0.0, 1.0),
    ] {
        m.insert(n.to_string(), Color::Rgb(r, g, b));
    }
    m
}

impl Default for Params {
    fn default() -> Self {
        let c = |n: &str, g: f64| ColorRef::gray(n, g);
        Params {
            units: UnitRegisters::default(),
            linewidth: Sp(52429),
            linecolor: c("black", 0.0),
            fillcolor: c("white", 1.0),
            bordercolor: c("white", 1.0),
            doublecolor: c("white", 1.0),
            shadowcolor: c("darkgray", 0.25),
            hatchcolor: c("black", 0.0),
            gridcolor: c("black", 0.0),
            subgridcolor: c("gray", 0.5),
            gridlabelcolor: c("black", 0.0),
            linestyle: LineStyle::Solid,
            dash: [Sp::pt(5), Sp::pt(3), Sp::ZERO, Sp::ZERO],
            dashadjust: true,
            dotsep: Sp::pt(3),
            linecap: 0,
            fillstyle_name: "none".into(),
            fillstyle: Vec::new(),
            hatchwidth: Sp(52429),
            hatchsep: Sp::pt(4),
            hatchangle: 45.0,
            hatchwidthinc: Sp::ZERO,
            hatchsepinc: Sp::ZERO,
            arrows: (ArrowKind::None, ArrowKind::None),
            arrowsize: (Sp(98304), 2.0),
            arrowlength: 1.4,
            arrowinset: 0.4,
            arrowscale: (1.0, 1.0),
            tbarsize: (Sp::pt(2), 5.0),
            bracketlength: 0.15,
            rbracketlength: 0.15,
            dotsize: (Sp::pt(2), 2.0),
            dotstyle: "*".into(),
            dotscale: (1.0, 1.0),
            dotangle: 0.0,
            linearc: Sp::ZERO,
            framearc: 0.0,
            cornersize_absolute: false,
            dimen: Dimen::Outer,
            border: Sp::ZERO,
            doubleline: false,
            doublesep: LenExpr::Linewidth(1.25),
            shadow: false,
            shadowsize: Sp::pt(3),
            shadowangle: -45.0,
            showpoints: false,
            curvature: (1.0, 0.1, 0.0),
            gridwidth: Sp(52429),
            subgridwidth: Sp(26214),
            subgriddiv: 5,
            griddots: 0,
            subgriddots: 0,
            gridlabels: Sp::pt(10),
            framesep: Sp::pt(3),
            boxsep: true,
            labelsep: Sp::pt(5),
            radius: Sp(466170),
            arcsep_a: Sp::ZERO,
            arcsep_b: Sp::ZERO,
            origin: (Sp::ZERO, Sp::ZERO),
            swapaxes: false,
            liftpen: 0,
            linetype: 2,
            ref_: Ref { x: 0.5, y: Some(0.5) },
            rot: Rot::NONE,
            refangle: RefAngle { angle: 0.0, code: None },
            shift: Sp::ZERO,
            gangle: 0.0,
            trimode: 0,
            trimode_star: false,
            showgrid: false,
            pst_debug: 0,
        }
    }
}

/// Parameters plus the tables and modes that scope with them.
#[derive(Debug, Clone)]
pub struct State {
    pub p: Params,
    pub mode: EvalMode,
    pub colors: HashMap<String, Color>,
    pub styles: HashMap<String, String>,
    /// Inside `\pscustom`, where `liftpen` has an effect.
    pub in_custom: bool,
    /// Set by border, doubleline or shadow.
    pub repeat_arrows: bool,
}

impl Default for State {
    fn default() -> Self {
        let mut styles = HashMap::new();
        styles
            .insert("gridstyle".to_string(), "subgriddiv=0,gridcolor=lightgray,griddots=10,gridlabels=8pt".to_string());
        State {
            p: Params::default(),
            mode: EvalMode::default(),
            colors: predefined_colors(),
            styles,
            in_custom: false,
            repeat_arrows: false,
        }
    }
}

fn bool_value(v: &str) -> Option<bool> {
    match v.trim() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// `\pst@checknum` semantics: bad input becomes 0 with a warning.
pub fn checknum(text: &str, rep: &mut Reporter) -> f64 {
    match parse_number(text.trim()) {
        Ok(n) => n.to_f64(),
        Err(e) => {
            rep.warn(e.to_string());
            0.0
        }
    }
}

fn checknum_num(text: &str, rep: &mut Reporter) -> Num {
    match parse_number(text.trim()) {
        Ok(n) => n,
        Err(e) => {
            rep.warn(e.to_string());
            Num::zero()
        }
    }
}

fn int_value(v: &str, rep: &mut Reporter) -> Option<i64> {
    match v.trim().parse::<i64>() {
        Ok(n) => Some(n),
        Err(_) => {
            rep.warn(format!("Missing number, treated as zero: `{}'", v.trim()));
            None
        }
    }
}

impl State {
    pub fn new() -> Self {
        State::default()
    }

    /// A length with the given bare-number unit; `\pslinewidth` and the
    /// unit registers may follow a factor.
    pub fn length_with(&self, text: &str, default_unit: Sp, rep: &mut Reporter) -> Sp {
        let t = text.trim();
        let regs: [(&str, Sp); 5] = [
            ("\\pslinewidth", self.p.linewidth),
            ("\\psxunit", self.p.units.xunit),
            ("\\psyunit", self.p.units.yunit),
            ("\\psunit", self.p.units.unit),
            ("\\psrunit", self.p.units.runit),
        ];
        for (name, reg) in regs {
            if let Some(f) = t.strip_suffix(name) {
                let f = f.trim();
                let n = if f.is_empty() {
                    parse_number("1").unwrap()
                } else if f == "-" {
                    parse_number("-1").unwrap()
                } else {
                    checknum_num(f, rep)
                };
                return n.times_dimen(reg).unwrap_or_else(|e| {
                    rep.warn(e.to_string());
                    Sp::ZERO
                });
            }
        }
        match parse_length(t, default_unit) {
            Ok(v) => v,
            Err(e) => {
                rep.warn(e.to_string());
                Sp::ZERO
            }
        }
    }

    /// `\pssetlength`: bare numbers in `unit`.
    pub fn length(&self, text: &str, rep: &mut Reporter) -> Sp {
        self.length_with(text, self.p.units.unit, rep)
    }

    pub fn xlength(&self, text: &str, rep: &mut Reporter) -> Sp {
        self.length_with(text, self.p.units.xunit, rep)
    }

    pub fn ylength(&self, text: &str, rep: &mut Reporter) -> Sp {
        self.length_with(text, self.p.units.yunit, rep)
    }

    /// Evaluate `doublesep` against the current line width.
    pub fn doublesep(&self) -> Sp {
        match self.p.doublesep {
            LenExpr::Abs(v) => v,
            LenExpr::Linewidth(f) => Sp::checked(
                parse_number(&format!("{f}"))
                    .ok()
                    .and_then(|n| n.times_dimen(self.p.linewidth).ok())
                    .map_or(0, Sp::raw),
            )
            .unwrap_or(Sp::ZERO),
        }
    }

    pub fn color(&self, name: &str, rep: &mut Reporter) -> ColorRef {
        let name = name.trim();
        match self.colors.get(name) {
            Some(c) => ColorRef { name: name.to_string(), color: *c },
            None => {
                rep.warn(format!("Color `{name}' not defined"));
                ColorRef::gray("black", 0.0)
            }
        }
    }

    pub fn define_color(&mut self, name: &str, model: &str, comps: &str, rep: &mut Reporter) {
        let parts: Vec<&str> = comps.split_whitespace().collect();
        let need = match model {
            "gray" => 1,
            "rgb" | "hsb" => 3,
            _ => 4,
        };
        let mut v = [0.0f64; 4];
        for (i, slot) in v.iter_mut().enumerate().take(need) {
            *slot = checknum(parts.get(i).copied().unwrap_or(""), rep);
        }
        let c = match model {
            "gray" => Color::Gray(v[0]),
            "rgb" => Color::Rgb(v[0], v[1], v[2]),
            "hsb" => Color::Hsb(v[0], v[1], v[2]),
            _ => Color::Cmyk(v[0], v[1], v[2], v[3]),
        };
        self.colors.insert(name.trim().to_string(), c);
    }

    pub fn define_style(&mut self, name: &str, body: &str) {
        self.styles.insert(name.trim().to_string(), body.to_string());
    }

    /// `\pst@getangle`: degrees after the active angle unit.
    pub fn angle_text(&self, text: &str, rep: &mut Reporter) -> f64 {
        match parse_angle(text) {
            Ok(a) => self.resolve_angle(&a, rep),
            Err(e) => {
                rep.error(e.message());
                0.0
            }
        }
    }

    pub fn resolve_angle(&self, a: &RawAngle, rep: &mut Reporter) -> f64 {
        match a {
            RawAngle::Numeric(t) => self.mode.to_degrees(checknum(t, rep)),
            RawAngle::Direction(c) => {
                if !self.mode.special_coor {
                    rep.warn("direction angles need \\SpecialCoor");
                }
                let (x, y) = self.resolve_coord(c, rep);
                (y.to_pt()).atan2(x.to_pt()).to_degrees()
            }
        }
    }

    /// Resolve a coordinate to sp in picture space.
    pub fn resolve_coord(&self, c: &RawCoord, rep: &mut Reporter) -> (Sp, Sp) {
        if !self.mode.special_coor && !matches!(c, RawCoord::Cartesian(..)) {
            rep.warn("special coordinates need \\SpecialCoor");
        }
        match c {
            RawCoord::Cartesian(x, y) => {
                if self.mode.polar {
                    self.polar(x, &RawAngle::Numeric(y.clone()), rep)
                } else {
                    (self.xlength(x, rep), self.ylength(y, rep))
                }
            }
            RawCoord::Polar(r, a) => self.polar(r, a, rep),
            RawCoord::Mixed(a, b) => {
                let (x, _) = self.resolve_coord(a, rep);
                let (_, y) = self.resolve_coord(b, rep);
                (x, y)
            }
            RawCoord::Raw(x, y) => {
                let x = checknum(x, rep) * self.p.units.xunit.to_pt();
                let y = checknum(y, rep) * self.p.units.yunit.to_pt();
                (Sp::from_pt_f64(x), Sp::from_pt_f64(y))
            }
        }
    }

    fn polar(&self, r: &str, a: &RawAngle, rep: &mut Reporter) -> (Sp, Sp) {
        let r = self.length(r, rep).to_pt();
        let t = self.resolve_angle(a, rep).to_radians();
        (Sp::from_pt_f64(r * t.cos()), Sp::from_pt_f64(r * t.sin()))
    }

    pub fn coord_text(&self, text: &str, rep: &mut Reporter) -> (Sp, Sp) {
        match parse_coord(text) {
            Ok(c) => self.resolve_coord(&c, rep),
            Err(e) => {
                rep.error(e.message());
                (Sp::ZERO, Sp::ZERO)
            }
        }
    }

    fn dimnum(&self, v: &str, rep: &mut Reporter) -> (Sp, f64) {
        let mut it = v.split_whitespace();
        let d = self.length(it.next().unwrap_or(""), rep);
        let n = checknum(it.next().unwrap_or("0"), rep);
        (d, n)
    }

    fn scale_pair(&self, v: &str, rep: &mut Reporter) -> Option<(f64, f64)> {
        let parts: Vec<&str> = v.split_whitespace().collect();
        if parts.first() == Some(&"none") {
            return Some((1.0, 1.0));
        }
        let sx = checknum(parts.first().copied().unwrap_or(""), rep);
        let sy = parts.get(1).map_or(sx, |p| checknum(p, rep));
        if sx == 0.0 || sy == 0.0 {
            rep.warn(format!("Bad scaling argument `{}'", v.trim()));
            return None;
        }
        Some((sx, sy))
    }

    fn update_repeat_flag(&mut self) {
        self.repeat_arrows = self.p.border > Sp::ZERO || self.p.doubleline || self.p.shadow;
    }

    /// Apply a raw keyval list in order.
    pub fn apply_raw(&mut self, raw: &str, rep: &mut Reporter) {
        let (pairs, _) = parse_keyvals(raw);
        self.apply_keyvals(&pairs, rep);
    }

    pub fn apply_keyvals(&mut self, pairs: &[(String, String)], rep: &mut Reporter) {
        for (k, v) in pairs {
            self.set(k, v, rep);
        }
    }

    /// Dispatch one key to its setter.
    pub fn set(&mut self, key: &str, v: &str, rep: &mut Reporter) {
        let v = v.trim();
        macro_rules! color {
            ($f:ident) => {{
                self.p.$f = self.color(v, rep);
            }};
        }
        macro_rules! len {
            ($f:ident) => {{
                self.p.$f = self.length(v, rep);
            }};
        }
        macro_rules! flag {
            ($f:ident) => {{
                match bool_value(v) {
                    Some(b) => self.p.$f = b,
                    None => rep.warn(format!("`{v}' is not a boolean for `{key}'")),
                }
            }};
        }
        macro_rules! num {
            ($f:ident) => {{
                self.p.$f = checknum(v, rep);
            }};
        }
        macro_rules! int {
            ($f:ident) => {{
                if let Some(n) = int_value(v, rep) {
                    self.p.$f = n;
                }
            }};
        }
        match key {
            "unit" => {
                let u = self.length(v, rep);
                self.p.units.set_unit(u);
            }
            "runit" => {
                let u = self.length(v, rep);
                self.p.units.set_runit(u);
            }
            "xunit" => self.p.units.xunit = self.xlength(v, rep),
            "yunit" => self.p.units.yunit = self.ylength(v, rep),
            "linewidth" => len!(linewidth),
            "linecolor" => color!(linecolor),
            "fillcolor" => color!(fillcolor),
            "bordercolor" => color!(bordercolor),
            "doublecolor" => color!(doublecolor),
            "shadowcolor" => color!(shadowcolor),
            "hatchcolor" => color!(hatchcolor),
            "gridcolor" => color!(gridcolor),
            "subgridcolor" => color!(subgridcolor),
            "gridlabelcolor" => color!(gridlabelcolor),
            "linestyle" => {
                self.p.linestyle = match v {
                    "none" => LineStyle::None,
                    "solid" => LineStyle::Solid,
                    "dashed" => LineStyle::Dashed,
                    "dotted" => LineStyle::Dotted,
                    _ => {
                        rep.warn(format!("Line style `{v}' not defined"));
                        return;
                    }
                }
            }
            "dash" => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                let mut d = [Sp::ZERO; 4];
                for (i, slot) in d.iter_mut().enumerate() {
                    match parts.get(i) {
                        Some(p) => *slot = self.length(p, rep),
                        None if i < 2 => rep.warn("Missing number or dimension. 0 substituted"),
                        None => {}
                    }
                }
                self.p.dash = d;
            }
            "dashadjust" => flag!(dashadjust),
            "dotsep" => len!(dotsep),
            "linecap" => {
                self.p.linecap = 0;
                if let Some(n) = int_value(v, rep) {
                    if (0..3).contains(&n) {
                        self.p.linecap = n as u8;
                    }
                }
            }
            "fillstyle" => {
                if v == "none" {
                    self.p.fillstyle.clear();
                    self.p.fillstyle_name = "none".into();
                } else if let Some(ops) = fill_ops(v) {
                    self.p.fillstyle = ops;
                    self.p.fillstyle_name = v.to_string();
                } else {
                    rep.warn(format!("Undefined fill style: `{v}'"));
                }
            }
            "addfillstyle" => match fill_ops(v) {
                Some(ops) => {
                    self.p.fillstyle.extend(ops);
                    self.p.fillstyle_name = format!("{}+{v}", self.p.fillstyle_name);
                }
                None => rep.warn(format!("Undefined fill style: `{v}'")),
            },
            "hatchwidth" => len!(hatchwidth),
            "hatchsep" => len!(hatchsep),
            "hatchangle" => self.p.hatchangle = self.angle_text(v, rep),
            "hatchwidthinc" => len!(hatchwidthinc),
            "hatchsepinc" => len!(hatchsepinc),
            "arrows" => match resolve_arrows(v) {
                Ok(a) => self.p.arrows = a,
                Err(msg) => {
                    rep.warn(msg);
                    self.p.arrows = (ArrowKind::None, ArrowKind::None);
                }
            },
            "arrowsize" => self.p.arrowsize = self.dimnum(v, rep),
            "arrowlength" => num!(arrowlength),
            "arrowinset" => num!(arrowinset),
            "arrowscale" => {
                if let Some(s) = self.scale_pair(v, rep) {
                    self.p.arrowscale = s;
                }
            }
            "tbarsize" => self.p.tbarsize = self.dimnum(v, rep),
            "bracketlength" => num!(bracketlength),
            "rbracketlength" => num!(rbracketlength),
            "dotsize" => self.p.dotsize = self.dimnum(v, rep),
            "dotstyle" => {
                if DOTSTYLES.contains(&v) {
                    self.p.dotstyle = v.to_string();
                } else {
                    rep.warn(format!("Dot style `{v}' not defined"));
                }
            }
            "dotscale" => self.p.dotscale = self.scale_pair(v, rep).unwrap_or((1.0, 1.0)),
            "dotangle" => self.p.dotangle = self.angle_text(v, rep),
            "linearc" => len!(linearc),
            "framearc" => num!(framearc),
            "cornersize" => self.p.cornersize_absolute = v.starts_with('a'),
            "dimen" => match v.chars().next() {
                Some('o') => self.p.dimen = Dimen::Outer,
                Some('m') => self.p.dimen = Dimen::Middle,
                Some('i') => self.p.dimen = Dimen::Inner,
                _ => {}
            },
            "border" => {
                len!(border);
                self.update_repeat_flag();
            }
            "doubleline" => {
                flag!(doubleline);
                self.update_repeat_flag();
            }
            "doublesep" => {
                let t = v.trim();
                self.p.doublesep = match t.strip_suffix("\\pslinewidth") {
                    Some(f) => LenExpr::Linewidth(if f.trim().is_empty() { 1.0 } else { checknum(f, rep) }),
                    None => LenExpr::Abs(self.length(t, rep)),
                };
            }
            "shadow" => {
                flag!(shadow);
                self.update_repeat_flag();
            }
            "shadowsize" => len!(shadowsize),
            "shadowangle" => self.p.shadowangle = self.angle_text(v, rep),
            "showpoints" => flag!(showpoints),
            "curvature" => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                let g = |i: usize, rep: &mut Reporter| checknum(parts.get(i).copied().unwrap_or(""), rep);
                self.p.curvature = (g(0, rep), g(1, rep), g(2, rep));
            }
            "gridwidth" => len!(gridwidth),
            "subgridwidth" => len!(subgridwidth),
            "subgriddiv" => int!(subgriddiv),
            "griddots" => int!(griddots),
            "subgriddots" => int!(subgriddots),
            "gridlabels" => len!(gridlabels),
            "framesep" => len!(framesep),
            "boxsep" => flag!(boxsep),
            "labelsep" => len!(labelsep),
            "radius" => len!(radius),
            "arcsepA" => len!(arcsep_a),
            "arcsepB" => len!(arcsep_b),
            "arcsep" => {
                len!(arcsep_a);
                self.p.arcsep_b = self.p.arcsep_a;
            }
            "origin" => self.p.origin = self.coord_text(v, rep),
            "swapaxes" => flag!(swapaxes),
            "liftpen" => {
                if self.in_custom {
                    match v {
                        "0" => self.p.liftpen = 0,
                        "1" => self.p.liftpen = 1,
                        "2" => self.p.liftpen = 2,
                        _ => rep.warn(format!("liftpen must be 0, 1 or 2, not `{v}'")),
                    }
                }
            }
            "linetype" => {
                if let Some(n) = int_value(v, rep) {
                    if n < -3 {
                        rep.warn("linetype must be greater than -3");
                        self.p.linetype = 2;
                    } else {
                        self.p.linetype = n;
                    }
                }
            }
            "ref" => self.p.ref_ = parse_ref(v, rep),
            "rot" => self.p.rot = parse_rot(v, self, rep),
            "refangle" => self.p.refangle = parse_refangle(v, self, rep),
            "shift" => len!(shift),
            "gangle" => self.p.gangle = self.angle_text(v, rep),
            "trimode" => {
                let (star, rest) = match v.strip_prefix('*') {
                    Some(r) => (true, r),
                    None => (false, v),
                };
                self.p.trimode_star = star;
                self.p.trimode = match rest.chars().next() {
                    Some('R') => 1,
                    Some('D') => 2,
                    Some('L') => 3,
                    _ => 0,
                };
            }
            "showgrid" => flag!(showgrid),
            "PstDebug" => int!(pst_debug),
            "style" => match self.styles.get(v).cloned() {
                Some(body) => self.apply_raw(&body, rep),
                None => rep.warn(format!("Custom style `{v}' undefined")),
            },
            _ => rep.warn(format!("Graphics parameter `{key}' not defined.")),
        }
    }

    /// Snapshot of every key with its canonical printed value.
    pub fn snapshot(&self) -> Vec<(&'static str, String)> {
        let p = &self.p;
        let f = |x: f64| format!("{x}");
        let sp = |x: Sp| format!("{x}pt");
        let col = |c: &ColorRef| c.name.clone();
        let b = |x: bool| format!("{x}");
        vec![
            ("unit", sp(p.units.unit)),
            ("xunit", sp(p.units.xunit)),
            ("yunit", sp(p.units.yunit)),
            ("runit", sp(p.units.runit)),
            ("linewidth", sp(p.linewidth)),
            ("linecolor", col(&p.linecolor)),
            ("fillcolor", col(&p.fillcolor)),
            ("bordercolor", col(&p.bordercolor)),
            ("doublecolor", col(&p.doublecolor)),
            ("shadowcolor", col(&p.shadowcolor)),
            ("hatchcolor", col(&p.hatchcolor)),
            ("gridcolor", col(&p.gridcolor)),
            ("subgridcolor", col(&p.subgridcolor)),
            ("gridlabelcolor", col(&p.gridlabelcolor)),
            ("linestyle", p.linestyle.name().to_string()),
            ("dash", p.dash.iter().map(|d| sp(*d)).collect::<Vec<_>>().join(" ")),
            ("dashadjust", b(p.dashadjust)),
            ("dotsep", sp(p.dotsep)),
            ("linecap", p.linecap.to_string()),
            ("fillstyle", p.fillstyle_name.clone()),
            ("hatchwidth", sp(p.hatchwidth)),
            ("hatchsep", sp(p.hatchsep)),
            ("hatchangle", f(p.hatchangle)),
            ("hatchwidthinc", sp(p.hatchwidthinc)),
            ("hatchsepinc", sp(p.hatchsepinc)),
            ("arrows", format!("{:?}", p.arrows)),
            ("arrowsize", format!("{} {}", sp(p.arrowsize.0), f(p.arrowsize.1))),
            ("arrowlength", f(p.arrowlength)),
            ("arrowinset", f(p.arrowinset)),
            ("arrowscale", format!("{} {}", f(p.arrowscale.0), f(p.arrowscale.1))),
            ("tbarsize", format!("{} {}", sp(p.tbarsize.0), f(p.tbarsize.1))),
            ("bracketlength", f(p.bracketlength)),
            ("rbracketlength", f(p.rbracketlength)),
            ("dotsize", format!("{} {}", sp(p.dotsize.0), f(p.dotsize.1))),
            ("dotstyle", p.dotstyle.clone()),
            ("dotscale", format!("{} {}", f(p.dotscale.0), f(p.dotscale.1))),
            ("dotangle", f(p.dotangle)),
            ("linearc", sp(p.linearc)),
            ("framearc", f(p.framearc)),
            ("cornersize", if p.cornersize_absolute { "absolute" } else { "relative" }.into()),
            ("dimen", f(p.dimen.k())),
            ("border", sp(p.border)),
            ("doubleline", b(p.doubleline)),
            (
                "doublesep",
                match p.doublesep {
                    LenExpr::Abs(v) => sp(v),
                    LenExpr::Linewidth(k) => format!("{}\\pslinewidth", f(k)),
                },
            ),
            ("shadow", b(p.shadow)),
            ("shadowsize", sp(p.shadowsize)),
            ("shadowangle", f(p.shadowangle)),
            ("showpoints", b(p.showpoints)),
            ("curvature", format!("{} {} {}", f(p.curvature.0), f(p.curvature.1), f(p.curvature.2))),
            ("gridwidth", sp(p.gridwidth)),
            ("subgridwidth", sp(p.subgridwidth)),
            ("subgriddiv", p.subgriddiv.to_string()),
            ("griddots", p.griddots.to_string()),
            ("subgriddots", p.subgriddots.to_string()),
            ("gridlabels", sp(p.gridlabels)),
            ("framesep", sp(p.framesep)),
            ("boxsep", b(p.boxsep)),
            ("labelsep", sp(p.labelsep)),
            ("radius", sp(p.radius)),
            ("arcsepA", sp(p.arcsep_a)),
            ("arcsepB", sp(p.arcsep_b)),
            ("origin", format!("{} {}", sp(p.origin.0), sp(p.origin.1))),
            ("swapaxes", b(p.swapaxes)),
            ("liftpen", p.liftpen.to_string()),
            ("linetype", p.linetype.to_string()),
            (
                "ref",
                match p.ref_.y {
                    Some(y) => format!("{} {}", f(p.ref_.x), f(y)),
                    None => format!("{} B", f(p.ref_.x)),
                },
            ),
            (
                "rot",
                if p.rot.active {
                    format!("{}{}", if p.rot.reset { "*" } else { "" }, f(p.rot.angle))
                } else {
                    String::new()
                },
            ),
            ("refangle", f(p.refangle.angle)),
            ("shift", sp(p.shift)),
            ("gangle", f(p.gangle)),
            (
                "trimode",
                format!("{}{}", if p.trimode_star { "*" } else { "" }, ["U", "R", "D", "L"][p.trimode as usize]),
            ),
            ("showgrid", b(p.showgrid)),
        ]
    }
}

/// `\psset@ref`: letters or a numeric `x,y` (or `x y`) pair.
pub fn parse_ref(v: &str, rep: &mut Reporter) -> Ref {
    let v = v.trim();
    let pair = v.split_once(',').or_else(|| v.split_once(char::is_whitespace));
    if let Some((x, y)) = pair {
        return Ref { x: checknum(x, rep), y: Some(checknum(y, rep)) };
    }
    let mut r = Ref { x: 0.5, y: Some(0.5) };
    let mut chars = v.chars();
    let first = chars.next();
    let rest: String = chars.collect();
    for name in [first.map(String::from).unwrap_or_default(), rest] {
        match name.as_str() {
            "t" => r.y = Some(1.0),
            "b" => r.y = Some(0.0),
            "B" => r.y = None,
            "l" => r.x = 0.0,
            "r" => r.x = 1.0,
            "c" | "" => {}
            other => rep.warn(format!("unknown reference point `{other}'")),
        }
    }
    r
}

/// `\psset@rot` with the named table.
pub fn parse_rot(v: &str, st: &State, rep: &mut Reporter) -> Rot {
    let v = v.trim();
    if let Some(rest) = v.strip_prefix('*') {
        let inner = parse_rot(rest, st, rep);
        return Rot { active: true, reset: true, angle: if inner.active { inner.angle } else { 0.0 } };
    }
    match v {
        "0" | "U" | "" => Rot::NONE,
        "L" => Rot { active: true, reset: false, angle: 90.0 },
        "D" => Rot { active: true, reset: false, angle: 180.0 },
        "R" => Rot { active: true, reset: false, angle: -90.0 },
        "N" => Rot { active: true, reset: true, angle: 0.0 },
        "W" => Rot { active: true, reset: true, angle: 90.0 },
        "S" => Rot { active: true, reset: true, angle: 180.0 },
        "E" => Rot { active: true, reset: true, angle: -90.0 },
        _ => Rot { active: true, reset: false, angle: st.angle_text(v, rep) },
    }
}

pub fn parse_refangle(v: &str, st: &State, rep: &mut Reporter) -> RefAngle {
    let v = v.trim();
    match REFANGLE_TABLE.iter().find(|(n, _, _)| *n == v) {
        Some((_, a, code)) => RefAngle { angle: *a, code: Some(*code) },
        None => {
            let is_num = parse_number(v).is_ok() || v.starts_with('(') || v.starts_with('!');
            if !is_num {
                rep.warn(format!("unknown reference angle `{v}', using r"));
                return RefAngle { angle: 0.0, code: Some((2, 0)) };
            }
            RefAngle { angle: st.angle_text(v, rep), code: None }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::{Diagnostics, Span};

    fn with<R>(f: impl FnOnce(&mut Reporter) -> R) -> (R, Diagnostics) {
        let mut d = Diagnostics::default();
        let r = {
            let mut rep = Reporter::new(&mut d, Span::default());
            f(&mut rep)
        };
        (r, d)
    }

    #[test]
    fn setter_guards() {
        let mut s = State::new();
        let (_, d) = with(|r| s.set("linecap", "5", r));
        assert_eq!(s.p.linecap, 0);
        assert!(d.is_empty());
        let (_, d) = with(|r| s.set("linetype", "-4", r));
        assert_eq!(s.p.linetype, 2);
        assert!(d.items()[0].message.contains("linetype must be greater than -3"));
        with(|r| s.set("style", "gridstyle", r));
        assert_eq!(s.p.subgriddiv, 0);
        assert_eq!(s.p.gridcolor.name, "lightgray");
        assert_eq!(s.p.griddots, 10);
        assert_eq!(s.p.gridlabels, Sp::pt(8));
        let (_, d) = with(|r| s.set("nosuch", "1", r));
        assert_eq!(d.items()[0].message, "Graphics parameter `nosuch' not defined.");
        let (_, d) = with(|r| s.set("style", "nope", r));
        assert_eq!(d.items()[0].message, "Custom style `nope' undefined");
    }

    #[test]
    fn later_keys_win() {
        let mut a = State::new();
        let mut b = State::new();
        with(|r| a.apply_raw("linewidth=1pt,linewidth=3pt", r));
        with(|r| b.apply_raw("linewidth=3pt", r));
        assert_eq!(a.p, b.p);
    }

    #[test]
    fn units_and_lengths() {
        let mut s = State::new();
        let (v, _) = with(|r| s.length("2", r));
        assert_eq!(v, Sp(3729358));
        with(|r| s.set("unit", "2pt", r));
        assert_eq!(s.p.units.xunit, Sp::pt(2));
        assert_eq!(s.p.units.runit, Sp::pt(2));
        with(|r| s.set("runit", "3pt", r));
        assert_eq!(s.p.units.unit, Sp::pt(3));
        assert_eq!(s.p.units.xunit, Sp::pt(2));
        assert_eq!(s.doublesep(), Sp(65536));
    }

    #[test]
    fn coordinates() {
        let mut s = State::new();
        s.mode.special_coor = true;
        let (p, d) = with(|r| s.coord_text("1,2|3,4", r));
        assert!(d.is_empty());
        assert_eq!(p, (Sp(1864679), Sp(4 * 1864679)));
        let (p, _) = with(|r| s.coord_text("2;60", r));
        let cm = 1864679.0f64;
        assert!((p.0.raw() as f64 - cm).abs() <= 1.0);
        assert!((p.1.raw() as f64 - 3f64.sqrt() * cm).abs() <= 1.0);
        let (a, _) = with(|r| s.angle_text("(1,1)", r));
        assert!((a - 45.0).abs() < 1e-12);
        s.mode.angle_unit = AngleUnit::Radians;
        let (a, _) = with(|r| s.angle_text("1.5708", r));
        #[allow(clippy::approx_constant)]
        let want = 1.5708 * 57.2956;
        assert!((a - want).abs() < 1e-9);
    }

    #[test]
    fn arrows() {
        assert_eq!(resolve_arrows("<-").unwrap(), (ArrowKind::Head { double: false }, ArrowKind::None));
        assert_eq!(resolve_arrows("->|").unwrap(), (ArrowKind::None, ArrowKind::HeadTBar { centered: false }));
        assert_eq!(resolve_arrows("x-y").unwrap_err(), "Bad arrows specification: x-y");
    }

    #[test]
    fn colors() {
        let s = State::new();
        let (c, d) = with(|r| s.color("puce", r));
        assert_eq!(c.to_rgb(), (0.0, 0.0, 0.0));
        assert_eq!(d.items()[0].message, "Color `puce' not defined");
        assert_eq!(Color::Hsb(0.0, 1.0, 1.0).to_rgb(), (1.0, 0.0, 0.0));
        assert_eq!(Color::Gray(0.75).to_rgb(), (0.75, 0.75, 0.75));
    }

    #[test]
    fn refs_and_rots() {
        let s = State::new();
        let (r, _) = with(|rep| parse_ref("lB", rep));
        assert_eq!(r, Ref { x: 0.0, y: None });
        let (r, _) = with(|rep| parse_ref("1,.5", rep));
        assert_eq!(r, Ref { x: 1.0, y: Some(0.5) });
        let (r, _) = with(|rep| parse_rot("N", &s, rep));
        assert_eq!(r.resolve(30.0), -30.0);
        let (r, _) = with(|rep| parse_rot("*45", &s, rep));
        assert_eq!(r.resolve(30.0), 15.0);
        let (r, _) = with(|rep| parse_rot("U", &s, rep));
        assert!(!r.active);
    }
}
