//! Lexer, parser and printer for picture source files.

use crate::diag::{Diagnostics, LineIndex, Span};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    /// `\name`, without the backslash.
    Cmd(String),
    /// A `*` directly after a command.
    Star,
    Bracket,
    Paren,
    Brace,
    Text,
    /// An unterminated group; already reported.
    Bad,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub start: usize,
    pub end: usize,
    /// Byte range of the group contents (equal to start..end for non-groups).
    pub inner: (usize, usize),
}

/// Tokenize the whole source.
pub fn tokenize(src: &str) -> (Vec<Token>, Diagnostics) {
    let idx = LineIndex::new(src);
    let mut diags = Diagnostics::default();
    let toks = tokenize_range(src, &idx, 0, src.len(), &mut diags);
    (toks, diags)
}

fn is_special(c: u8) -> bool {
    matches!(c, b'\\' | b'[' | b'(' | b'{' | b'}' | b'%')
}

fn skip_comment(b: &[u8], mut i: usize, end: usize) -> usize {
    while i < end && b[i] != b'\n' {
        i += 1;
    }
    i
}

/// Find the closing delimiter for a group opened at `open`.
/// Returns the index of the closing byte.
fn match_group(b: &[u8], open: usize, end: usize) -> Option<usize> {
    let (o, c) = match b[open] {
        b'[' => (b'[', b']'),
        b'(' => (b'(', b')'),
        _ => (b'{', b'}'),
    };
    let mut depth = 0i32;
    let mut brace = 0i32;
    let mut i = open;
    while i < end {
        let ch = b[i];
        match ch {
            b'\\' => {
                i += 2;
                continue;
            }
            b'%' => {
                i = skip_comment(b, i, end);
                continue;
            }
            b'\n' if o == b'(' => return None,
            _ => {}
        }
        if o == b'{' {
            if ch == b'{' {
                depth += 1;
            } else if ch == b'}' {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
        } else {
            if ch == b'{' {
                brace += 1;
            } else if ch == b'}' {
                brace -= 1;
                if brace < 0 {
                    return None;
                }
            } else if brace == 0 {
                if ch == o {
                    depth += 1;
                } else if ch == c {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
            }
        }
        i += 1;
    }
    None
}

pub(crate) fn tokenize_range(
    src: &str,
    idx: &LineIndex,
    start: usize,
    end: usize,
    diags: &mut Diagnostics,
) -> Vec<Token> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = start;
    while i < end {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        match c {
            b'%' => i = skip_comment(b, i, end),
            b'\\' => {
                let s = i;
                i += 1;
                if i < end && b[i].is_ascii_alphabetic() {
                    while i < end && b[i].is_ascii_alphabetic() {
                        i += 1;
                    }
                } else if i < end {
                    i += src[i..].chars().next().map_or(1, char::len_utf8);
                }
                out.push(Token { kind: TokKind::Cmd(src[s + 1..i].to_string()), start: s, end: i, inner: (s, i) });
                // `*` right after the command, spaces allowed.
                let mut j = i;
                while j < end && matches!(b[j], b' ' | b'\t') {
                    j += 1;
                }
                if j < end && b[j] == b'*' && src[s + 1..i].chars().all(|c| c.is_ascii_alphabetic()) {
                    out.push(Token { kind: TokKind::Star, start: j, end: j + 1, inner: (j, j + 1) });
                    i = j + 1;
                }
            }
            b'[' | b'(' | b'{' => {
                let kind = match c {
                    b'[' => TokKind::Bracket,
                    b'(' => TokKind::Paren,
                    _ => TokKind::Brace,
                };
                match match_group(b, i, end) {
                    Some(close) => {
                        out.push(Token { kind, start: i, end: close + 1, inner: (i + 1, close) });
                        i = close + 1;
                    }
                    None => {
                        let what = match c {
                            b'[' => "bracket",
                            b'(' => "parenthesis",
                            _ => "brace",
                        };
                        diags.error(idx.span(src, i, i + 1), format!("unbalanced {what}"));
                        let stop = if c == b'(' { src[i..end].find('\n').map_or(end, |k| i + k) } else { end };
                        out.push(Token { kind: TokKind::Bad, start: i, end: stop, inner: (i, stop) });
                        i = stop;
                    }
                }
            }
            b'}' => {
                diags.error(idx.span(src, i, i + 1), "unbalanced brace");
                i += 1;
            }
            _ => {
                let s = i;
                while i < end && !b[i].is_ascii_whitespace() && !is_special(b[i]) {
                    i += 1;
                }
                out.push(Token { kind: TokKind::Text, start: s, end: i, inner: (s, i) });
            }
        }
    }
    out
}

/// Remove `%` comments from a raw group body.
pub fn strip_comments(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                out.push(c);
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            }
            '%' => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        break;
                    }
                }
            }
            _ => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawCoord {
    Cartesian(String, String),
    Polar(String, RawAngle),
    Mixed(Box<RawCoord>, Box<RawCoord>),
    Raw(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawAngle {
    Numeric(String),
    Direction(Box<RawCoord>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoordError {
    Node,
    OneComponent(String),
    BadRaw(String),
    Malformed(String),
}

impl CoordError {
    pub fn message(&self) -> String {
        match self {
            CoordError::Node => "You must load `pst-node.tex' to use node coordinates.".into(),
            CoordError::OneComponent(t) => {
                format!("one-component coordinate `({t})' is not supported")
            }
            CoordError::BadRaw(t) => {
                format!("raw coordinate `({t})' must be exactly two numbers")
            }
            CoordError::Malformed(t) => format!("malformed coordinate `({t})'"),
        }
    }
}

fn split_top(text: &str, sep: char) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            _ if c == sep && depth == 0 => return Some((&text[..i], &text[i + 1..])),
            _ => {}
        }
    }
    None
}

fn parse_simple_coord(text: &str) -> Result<RawCoord, CoordError> {
    let t = text.trim();
    let first = t.chars().next();
    match first {
        Some(c) if c.is_ascii_alphabetic() || c == '[' => return Err(CoordError::Node),
        Some('!') => {
            let parts: Vec<&str> = t[1..].split_whitespace().collect();
            if parts.len() != 2 || parts.iter().any(|p| crate::fixnum::parse_number(p).is_err()) {
                return Err(CoordError::BadRaw(t.to_string()));
            }
            return Ok(RawCoord::Raw(parts[0].to_string(), parts[1].to_string()));
        }
        _ => {}
    }
    if let Some((r, a)) = split_top(t, ';') {
        if a.contains(';') {
            return Err(CoordError::Malformed(t.to_string()));
        }
        return Ok(RawCoord::Polar(r.trim().to_string(), parse_angle(a)?));
    }
    match split_top(t, ',') {
        Some((x, y)) => {
            if split_top(y, ',').is_some() {
                return Err(CoordError::Malformed(t.to_string()));
            }
            Ok(RawCoord::Cartesian(x.trim().to_string(), y.trim().to_string()))
        }
        None => Err(CoordError::OneComponent(t.to_string())),
    }
}

/// Parse the text inside a coordinate's parentheses.
pub fn parse_coord(text: &str) -> Result<RawCoord, CoordError> {
    let t = text.trim();
    if let Some((a, b)) = split_top(t, '|') {
        if b.contains('|') {
            return Err(CoordError::Malformed(t.to_string()));
        }
        return Ok(RawCoord::Mixed(Box::new(parse_simple_coord(a)?), Box::new(parse_simple_coord(b)?)));
    }
    parse_simple_coord(t)
}

/// Parse an angle slot: a number, or `(x,y)` for a direction.
pub fn parse_angle(text: &str) -> Result<RawAngle, CoordError> {
    let t = text.trim();
    if t.starts_with('(') && t.ends_with(')') && t.len() >= 2 {
        return Ok(RawAngle::Direction(Box::new(parse_coord(&t[1..t.len() - 1])?)));
    }
    let t = t.strip_prefix('!').map(str::trim).unwrap_or(t);
    Ok(RawAngle::Numeric(t.to_string()))
}

pub fn print_coord(c: &RawCoord) -> String {
    match c {
        RawCoord::Cartesian(x, y) => format!("{x},{y}"),
        RawCoord::Polar(r, a) => format!("{r};{}", print_angle(a)),
        RawCoord::Mixed(a, b) => format!("{}|{}", print_coord(a), print_coord(b)),
        RawCoord::Raw(x, y) => format!("!{x} {y}"),
    }
}

pub fn print_angle(a: &RawAngle) -> String {
    match a {
        RawAngle::Numeric(s) => s.clone(),
        RawAngle::Direction(c) => format!("({})", print_coord(c)),
    }
}

/// Split a keyval list. Bad entries (no `=`) are returned separately.
pub fn parse_keyvals(raw: &str) -> (Vec<(String, String)>, Vec<String>) {
    let raw = strip_comments(raw);
    let mut pairs = Vec::new();
    let mut bad = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut entries = Vec::new();
    for c in raw.chars() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                entries.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    entries.push(cur);
    for e in entries {
        let e = e.trim();
        if e.is_empty() {
            continue;
        }
        match e.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), strip_braces(v.trim()).to_string())),
            None => bad.push(e.to_string()),
        }
    }
    (pairs, bad)
}

/// Remove one level of enclosing braces if they wrap the whole value.
pub fn strip_braces(v: &str) -> &str {
    if v.starts_with('{') && v.ends_with('}') && v.len() >= 2 {
        let b = v.as_bytes();
        if match_group(b, 0, b.len()) == Some(b.len() - 1) {
            return v[1..v.len() - 1].trim();
        }
    }
    v
}

// ---------------------------------------------------------------- AST

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ast {
    pub items: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Cmd(Cmd),
    Text(Text),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Text {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cmd {
    pub name: String,
    pub starred: bool,
    pub args: Vec<Arg>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// `[keyvals]`
    Par,
    /// `[ref]` on placement commands.
    Ref,
    /// `[refangle]` on uput.
    RefAngle,
    /// `[n]` on `\degrees`.
    Opt,
    Arrows,
    Rot,
    LabelSep,
    Scalar,
    Angle,
    Coord,
    /// `(w,h,d)` on `\pstbox`.
    Extent,
    Body,
    /// Children of `\psclip` up to `\endpsclip`.
    Clipped,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Coord(RawCoord),
    Angle(RawAngle),
    Body(Ast),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub role: Role,
    pub value: Value,
}

impl Cmd {
    fn texts(&self, role: Role) -> impl Iterator<Item = &str> {
        self.args.iter().filter(move |a| a.role == role).filter_map(|a| match &a.value {
            Value::Text(t) => Some(t.as_str()),
            _ => None,
        })
    }

    pub fn text(&self, role: Role) -> Option<&str> {
        self.texts(role).next()
    }

    pub fn params(&self) -> Option<&str> {
        self.text(Role::Par)
    }

    pub fn arrow_spec(&self) -> Option<&str> {
        self.text(Role::Arrows)
    }

    pub fn coords(&self) -> Vec<&RawCoord> {
        self.args
            .iter()
            .filter_map(|a| match &a.value {
                Value::Coord(c) if a.role == Role::Coord => Some(c),
                _ => None,
            })
            .collect()
    }

    pub fn scalars(&self) -> Vec<&str> {
        self.texts(Role::Scalar).collect()
    }

    pub fn angles(&self) -> Vec<&RawAngle> {
        self.args
            .iter()
            .filter_map(|a| match &a.value {
                Value::Angle(x) => Some(x),
                _ => None,
            })
            .collect()
    }

    pub fn body(&self) -> Option<&Ast> {
        self.body_of(Role::Body)
    }

    pub fn body_of(&self, role: Role) -> Option<&Ast> {
        self.args.iter().find(|a| a.role == role).and_then(|a| match &a.value {
            Value::Body(b) => Some(b),
            _ => None,
        })
    }
}

impl Ast {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Ast {
        Ast {
            items: self
                .items
                .iter()
                .map(|n| match n {
                    Node::Text(t) => Node::Text(Text { text: t.text.clone(), span: Span::default() }),
                    Node::Cmd(c) => Node::Cmd(Cmd {
                        name: c.name.clone(),
                        starred: c.starred,
                        span: Span::default(),
                        args: c
                            .args
                            .iter()
                            .map(|a| Arg {
                                role: a.role,
                                value: match &a.value {
                                    Value::Body(b) => Value::Body(b.without_spans()),
                                    v => v.clone(),
                                },
                            })
                            .collect(),
                    }),
                })
                .collect(),
        }
    }

    pub fn same_structure(&self, other: &Ast) -> bool {
        self.without_spans() == other.without_spans()
    }

    /// Every command in document order, descending into bodies.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Cmd)) {
        for n in &self.items {
            if let Node::Cmd(c) = n {
                f(c);
                for a in &c.args {
                    if let Value::Body(b) = &a.value {
                        b.walk(f);
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------- grammar

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ctx {
    Top,
    Picture,
    Custom,
    Label,
    Clip,
    Multips,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Star,
    Par,
    /// Brace unless the next token is a parenthesis.
    OptBrace(Role),
    /// Brace unless the next token is a bracket.
    OptBraceBeforeBracket(Role),
    OptBracket(Role),
    Bracket(Role),
    Coords {
        min: usize,
        min_custom: usize,
        max: usize,
        fill: bool,
    },
    Brace(Role),
    Angle,
    Body(Ctx),
    Extent,
}

const INF: usize = usize::MAX;

fn coords(min: usize, max: usize, fill: bool) -> Slot {
    Slot::Coords { min, min_custom: min, max, fill }
}

fn open_coords(min: usize, min_custom: usize) -> Slot {
    Slot::Coords { min, min_custom, max: INF, fill: false }
}

pub const BOX_COMMANDS: &[&str] =
    &["psframebox", "psdblframebox", "psshadowbox", "pscirclebox", "psCirclebox", "psovalbox", "psdiabox", "pstribox"];

pub const CUSTOM_ONLY: &[&str] = &[
    "newpath",
    "moveto",
    "closepath",
    "gsave",
    "grestore",
    "translate",
    "rotate",
    "scale",
    "msave",
    "mrestore",
    "swapaxes",
    "stroke",
    "fill",
    "openshadow",
    "closedshadow",
    "movepath",
    "lineto",
    "rlineto",
    "curveto",
    "rcurveto",
    "code",
    "coor",
    "rcoor",
    "dim",
    "setcolor",
    "arrows",
];

fn signature(name: &str) -> Option<Vec<Slot>> {
    use Slot::*;
    let obj = |rest: &[Slot]| {
        let mut v = vec![Star, Par];
        v.extend_from_slice(rest);
        Some(v)
    };
    match name {
        "psline" => obj(&[OptBrace(Role::Arrows), open_coords(2, 1)]),
        "qline" => Some(vec![coords(2, 2, false)]),
        "pspolygon" => obj(&[open_coords(2, 2)]),
        "psframe" | "psdiamond" | "pstriangle" | "psellipse" => obj(&[coords(1, 2, true)]),
        "pscircle" => obj(&[coords(0, 1, true), Brace(Role::Scalar)]),
        "qdisk" => Some(vec![coords(1, 1, false), Brace(Role::Scalar)]),
        "psCircle" | "psdot" => obj(&[coords(0, 1, true)]),
        "pswedge" => obj(&[coords(0, 1, true), Brace(Role::Scalar), Angle, Angle]),
        "psarc" | "psarcn" => obj(&[OptBrace(Role::Arrows), coords(0, 1, true), Brace(Role::Scalar), Angle, Angle]),
        "psellipticarc" | "psellipticarcn" => obj(&[OptBrace(Role::Arrows), coords(1, 2, true), Angle, Angle]),
        "psellipticwedge" => obj(&[coords(1, 2, true), Angle, Angle]),
        "psbezier" => obj(&[OptBrace(Role::Arrows), open_coords(3, 3)]),
        "pscbezier" => obj(&[open_coords(3, 3)]),
        "parabola" => obj(&[OptBrace(Role::Arrows), coords(2, 2, false)]),
        "pscurve" => obj(&[OptBrace(Role::Arrows), open_coords(2, 1)]),
        "psecurve" => obj(&[OptBrace(Role::Arrows), open_coords(4, 3)]),
        "psccurve" => obj(&[open_coords(3, 3)]),
        "psdots" => obj(&[open_coords(1, 1)]),
        "psgrid" => obj(&[coords(0, 3, false)]),
        "pscustom" => obj(&[Body(Ctx::Custom)]),
        "newpath" | "closepath" | "gsave" | "grestore" | "msave" | "mrestore" | "swapaxes" => Some(vec![]),
        "moveto" | "lineto" | "rlineto" | "translate" | "movepath" => Some(vec![coords(1, 1, false)]),
        "curveto" | "rcurveto" => Some(vec![coords(3, 3, false)]),
        "rotate" => Some(vec![Angle]),
        "scale" | "code" | "dim" | "setcolor" | "arrows" => Some(vec![Brace(Role::Scalar)]),
        "stroke" | "fill" | "openshadow" | "closedshadow" => obj(&[]),
        "coor" | "rcoor" => Some(vec![open_coords(1, 1)]),
        "psset" => Some(vec![Brace(Role::Scalar)]),
        "newpsstyle" | "newgray" | "newrgbcolor" | "newhsbcolor" | "newcmykcolor" => {
            Some(vec![Brace(Role::Scalar), Brace(Role::Scalar)])
        }
        "newpsobject" => Some(vec![Brace(Role::Scalar), Brace(Role::Scalar), Brace(Role::Scalar)]),
        "SpecialCoor" | "NormalCoor" | "Polar" | "radians" => Some(vec![]),
        "Cartesian" => Some(vec![coords(0, 1, false)]),
        "degrees" => Some(vec![OptBracket(Role::Opt)]),
        "psclip" => Some(vec![Body(Ctx::Clip)]),
        "rput" => Some(vec![Star, OptBracket(Role::Ref), OptBrace(Role::Rot), coords(0, 1, true), Body(Ctx::Label)]),
        "uput" => Some(vec![
            Star,
            OptBraceBeforeBracket(Role::LabelSep),
            Bracket(Role::RefAngle),
            OptBrace(Role::Rot),
            coords(0, 1, true),
            Body(Ctx::Label),
        ]),
        "Rput" => Some(vec![
            Star,
            OptBraceBeforeBracket(Role::LabelSep),
            Bracket(Role::Ref),
            OptBrace(Role::Rot),
            coords(0, 1, true),
            Body(Ctx::Label),
        ]),
        "multirput" => Some(vec![
            Star,
            OptBracket(Role::Ref),
            OptBrace(Role::Rot),
            coords(1, 2, true),
            Brace(Role::Scalar),
            Body(Ctx::Label),
        ]),
        "multips" => Some(vec![OptBrace(Role::Rot), coords(1, 2, true), Brace(Role::Scalar), Body(Ctx::Multips)]),
        n if BOX_COMMANDS.contains(&n) => obj(&[Body(Ctx::Label)]),
        "psscalebox" => Some(vec![Brace(Role::Scalar), Body(Ctx::Label)]),
        "psscaleboxto" => Some(vec![coords(1, 1, false), Body(Ctx::Label)]),
        "rotateleft" | "rotateright" | "rotatedown" => Some(vec![Body(Ctx::Label)]),
        "pstbox" => Some(vec![Extent, Body(Ctx::Label)]),
        _ => None,
    }
}

/// Commands whose coordinate lists must satisfy a 3n or 3n+1 count.
fn bezier_count_ok(name: &str, n: usize) -> bool {
    match name {
        "psbezier" | "pscbezier" => n % 3 != 2,
        _ => true,
    }
}

pub struct Parser<'s> {
    src: &'s str,
    idx: LineIndex,
    pub diags: Diagnostics,
    aliases: HashMap<String, String>,
}

/// Parse a whole file.
pub fn parse(src: &str) -> (Ast, Diagnostics) {
    let mut p = Parser::new(src);
    let ast = p.parse_all();
    (ast, p.diags)
}

enum Outcome {
    Ok(Cmd),
    /// Failed with a diagnostic already issued (or a lexer error).
    Failed,
}

impl<'s> Parser<'s> {
    pub fn new(src: &'s str) -> Self {
        Parser { src, idx: LineIndex::new(src), diags: Diagnostics::default(), aliases: HashMap::new() }
    }

    pub fn parse_all(&mut self) -> Ast {
        let toks = tokenize_range(self.src, &self.idx, 0, self.src.len(), &mut self.diags);
        let mut pos = 0;
        self.parse_seq(&toks, &mut pos, Ctx::Top, None)
    }

    fn span(&self, s: usize, e: usize) -> Span {
        self.idx.span(self.src, s, e)
    }

    fn raw(&self, t: &Token) -> String {
        strip_comments(&self.src[t.inner.0..t.inner.1]).trim().to_string()
    }

    fn sub_tokens(&mut self, t: &Token) -> Vec<Token> {
        tokenize_range(self.src, &self.idx, t.inner.0, t.inner.1, &mut self.diags)
    }

    fn base_name<'a>(&'a self, name: &'a str) -> &'a str {
        self.aliases.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Parse nodes until the end of `toks` or an `until` command.
    fn parse_seq(&mut self, toks: &[Token], pos: &mut usize, ctx: Ctx, until: Option<&str>) -> Ast {
        let mut items = Vec::new();
        let mut text_run: Option<(usize, usize)> = None;
        let flush = |p: &mut Self, run: &mut Option<(usize, usize)>, items: &mut Vec<Node>| {
            if let Some((s, e)) = run.take() {
                let text = p.src[s..e].trim().to_string();
                if ctx == Ctx::Label {
                    items.push(Node::Text(Text { text, span: p.span(s, e) }));
                } else {
                    p.diags.warning(p.span(s, e), format!("text `{}' outside a label is ignored", short(&text)));
                }
            }
        };
        while *pos < toks.len() {
            let t = &toks[*pos];
            match &t.kind {
                TokKind::Cmd(name) => {
                    if Some(name.as_str()) == until {
                        flush(self, &mut text_run, &mut items);
                        return Ast { items };
                    }
                    let known = self.is_known(name, ctx);
                    if !known && ctx == Ctx::Label {
                        let s = text_run.map_or(t.start, |r| r.0);
                        text_run = Some((s, t.end));
                        *pos += 1;
                        continue;
                    }
                    flush(self, &mut text_run, &mut items);
                    if let Some(node) = self.parse_command(toks, pos, ctx) {
                        items.push(node);
                    }
                }
                TokKind::Bad => {
                    flush(self, &mut text_run, &mut items);
                    *pos += 1;
                }
                _ => {
                    let s = text_run.map_or(t.start, |r| r.0);
                    text_run = Some((s, t.end));
                    *pos += 1;
                }
            }
        }
        flush(self, &mut text_run, &mut items);
        Ast { items }
    }

    fn is_known(&self, name: &str, ctx: Ctx) -> bool {
        let base = self.base_name(name);
        if matches!(base, "begin" | "end" | "pspicture" | "endpspicture" | "endpsclip") {
            return true;
        }
        if CUSTOM_ONLY.contains(&base) && ctx != Ctx::Custom {
            return false;
        }
        signature(base).is_some()
    }

    fn skip_groups(toks: &[Token], pos: &mut usize) {
        while *pos < toks.len() && !matches!(toks[*pos].kind, TokKind::Cmd(_) | TokKind::Text) {
            *pos += 1;
        }
    }

    fn parse_command(&mut self, toks: &[Token], pos: &mut usize, ctx: Ctx) -> Option<Node> {
        let t = toks[*pos].clone();
        let TokKind::Cmd(name) = &t.kind else { unreachable!() };
        let name = name.clone();
        *pos += 1;
        match name.as_str() {
            "begin" => return self.parse_begin(toks, pos, &t, ctx),
            "pspicture" => return self.parse_picture(toks, pos, &t, false),
            "end" | "endpspicture" => {
                self.diags.error(self.span(t.start, t.end), format!("`\\{name}' without a matching begin"));
                if name == "end" && matches!(toks.get(*pos).map(|x| &x.kind), Some(TokKind::Brace)) {
                    *pos += 1;
                }
                return None;
            }
            "endpsclip" => {
                self.diags.error(self.span(t.start, t.end), "Misplaced \\endpsclip command");
                return None;
            }
            _ => {}
        }
        if CUSTOM_ONLY.contains(&self.base_name(&name)) && ctx != Ctx::Custom {
            self.diags.error(self.span(t.start, t.end), format!("Command can only be used in \\pscustom: `\\{name}'"));
            Self::skip_groups(toks, pos);
            return None;
        }
        let Some(sig) = signature(self.base_name(&name)) else {
            self.diags.error(self.span(t.start, t.end), format!("unknown command `\\{name}'"));
            Self::skip_groups(toks, pos);
            return None;
        };
        match self.apply_signature(&name, &sig, toks, pos, &t, ctx) {
            Outcome::Ok(mut cmd) => {
                if name == "psclip" {
                    let children = self.parse_seq(toks, pos, ctx, Some("endpsclip"));
                    let end = if *pos < toks.len() {
                        let e = toks[*pos].end;
                        *pos += 1;
                        e
                    } else {
                        self.diags.error(cmd.span, "missing \\endpsclip");
                        cmd.span.end
                    };
                    cmd.span = self.span(t.start, end);
                    cmd.args.push(Arg { role: Role::Clipped, value: Value::Body(children) });
                }
                if name == "newpsobject" {
                    let s = cmd.scalars();
                    let (alias, base) = (s[0].to_string(), s[1].to_string());
                    if signature(&base).is_some() {
                        self.aliases.insert(alias, base);
                    } else {
                        self.diags.error(cmd.span, format!("Graphics object `{base}' not defined"));
                        return None;
                    }
                }
                if let Some(raw) =
                    cmd.params().map(str::to_string).or_else(|| (name == "psset").then(|| cmd.scalars()[0].to_string()))
                {
                    for bad in parse_keyvals(&raw).1 {
                        self.diags.warning(cmd.span, format!("Graphics parameter `{bad}' has no value"));
                    }
                }
                Some(Node::Cmd(cmd))
            }
            Outcome::Failed => {
                Self::skip_groups(toks, pos);
                None
            }
        }
    }

    fn parse_begin(&mut self, toks: &[Token], pos: &mut usize, t: &Token, ctx: Ctx) -> Option<Node> {
        let env = match toks.get(*pos) {
            Some(b) if b.kind == TokKind::Brace => self.raw(b),
            _ => {
                self.diags.error(self.span(t.start, t.end), "missing environment name after \\begin");
                return None;
            }
        };
        *pos += 1;
        match env.as_str() {
            "pspicture" | "pspicture*" => {
                if ctx != Ctx::Top {
                    self.diags.error(self.span(t.start, t.end), "pspicture environments cannot nest");
                }
                self.parse_picture(toks, pos, t, env.ends_with('*'))
            }
            _ => {
                self.diags.error(self.span(t.start, t.end), format!("unknown environment `{env}'"));
                None
            }
        }
    }

    fn parse_picture(&mut self, toks: &[Token], pos: &mut usize, t: &Token, env_star: bool) -> Option<Node> {
        let env_form = env_star || toks[..*pos].last().is_some_and(|x| x.kind == TokKind::Brace);
        let mut starred = env_star;
        if !env_form && matches!(toks.get(*pos).map(|x| &x.kind), Some(TokKind::Star)) {
            starred = true;
            *pos += 1;
        }
        let mut args = Vec::new();
        if let Some(b) = toks.get(*pos).filter(|x| x.kind == TokKind::Bracket) {
            args.push(Arg { role: Role::Par, value: Value::Text(self.raw(b)) });
            *pos += 1;
        }
        let mut cs = Vec::new();
        while cs.len() < 2 {
            match toks.get(*pos) {
                Some(p) if p.kind == TokKind::Paren => {
                    match parse_coord(&self.raw(p)) {
                        Ok(c) => cs.push(c),
                        Err(e) => {
                            self.diags.error(self.span(p.start, p.end), e.message());
                            return None;
                        }
                    }
                    *pos += 1;
                }
                _ => break,
            }
        }
        if cs.is_empty() {
            self.diags.error(self.span(t.start, t.end), "pspicture needs at least one corner coordinate");
            return None;
        }
        if cs.len() == 1 {
            cs.insert(0, RawCoord::Cartesian("0".into(), "0".into()));
        }
        for c in cs {
            args.push(Arg { role: Role::Coord, value: Value::Coord(c) });
        }
        let until = if env_form { "end" } else { "endpspicture" };
        let body = self.parse_seq(toks, pos, Ctx::Picture, Some(until));
        let mut end = t.end;
        if *pos < toks.len() {
            end = toks[*pos].end;
            *pos += 1;
            if env_form {
                if let Some(b) = toks.get(*pos).filter(|x| x.kind == TokKind::Brace) {
                    let name = self.raw(b);
                    if name != "pspicture" && name != "pspicture*" {
                        self.diags
                            .error(self.span(b.start, b.end), format!("`\\end{{{name}}}' does not match pspicture"));
                    }
                    end = b.end;
                    *pos += 1;
                }
            }
        } else {
            self.diags.error(self.span(t.start, t.end), "pspicture is never closed");
        }
        args.push(Arg { role: Role::Body, value: Value::Body(body) });
        Some(Node::Cmd(Cmd { name: "pspicture".into(), starred, args, span: self.span(t.start, end) }))
    }

    fn apply_signature(
        &mut self,
        name: &str,
        sig: &[Slot],
        toks: &[Token],
        pos: &mut usize,
        head: &Token,
        ctx: Ctx,
    ) -> Outcome {
        let mut cmd = Cmd { name: name.to_string(), starred: false, args: Vec::new(), span: Span::default() };
        let mut end = head.end;
        let peek = |pos: usize| toks.get(pos).map(|t| &t.kind);
        let head_span = self.span(head.start, head.end);
        for slot in sig {
            if peek(*pos) == Some(&TokKind::Bad) {
                *pos += 1;
                return Outcome::Failed;
            }
            match *slot {
                Slot::Star => {
                    if peek(*pos) == Some(&TokKind::Star) {
                        cmd.starred = true;
                        end = toks[*pos].end;
                        *pos += 1;
                    }
                }
                Slot::Par | Slot::OptBracket(_) => {
                    let role = if let Slot::OptBracket(r) = *slot { r } else { Role::Par };
                    if peek(*pos) == Some(&TokKind::Bracket) {
                        let v = self.raw(&toks[*pos]);
                        cmd.args.push(Arg { role, value: Value::Text(v) });
                        end = toks[*pos].end;
                        *pos += 1;
                    }
                }
                Slot::Bracket(role) => {
                    if peek(*pos) != Some(&TokKind::Bracket) {
                        self.diags.error(head_span, format!("`\\{name}' expects a [...] argument"));
                        return Outcome::Failed;
                    }
                    let v = self.raw(&toks[*pos]);
                    cmd.args.push(Arg { role, value: Value::Text(v) });
                    end = toks[*pos].end;
                    *pos += 1;
                }
                Slot::OptBrace(role) | Slot::OptBraceBeforeBracket(role) => {
                    if peek(*pos) == Some(&TokKind::Brace) {
                        let v = self.raw(&toks[*pos]);
                        cmd.args.push(Arg { role, value: Value::Text(v) });
                        end = toks[*pos].end;
                        *pos += 1;
                    }
                }
                Slot::Coords { min, min_custom, max, fill } => {
                    let mut cs = Vec::new();
                    while cs.len() < max && peek(*pos) == Some(&TokKind::Paren) {
                        let p = &toks[*pos];
                        match parse_coord(&self.raw(p)) {
                            Ok(c) => cs.push(c),
                            Err(e) => {
                                self.diags.error(self.span(p.start, p.end), e.message());
                                *pos += 1;
                                return Outcome::Failed;
                            }
                        }
                        end = p.end;
                        *pos += 1;
                    }
                    if peek(*pos) == Some(&TokKind::Bad) {
                        *pos += 1;
                        return Outcome::Failed;
                    }
                    let need = if ctx == Ctx::Custom { min_custom } else { min };
                    if cs.len() < need || !bezier_count_ok(self.base_name(name), cs.len()) {
                        self.diags.error(
                            head_span,
                            format!("`\\{name}' got {} coordinate(s), which is not a valid count", cs.len()),
                        );
                        return Outcome::Failed;
                    }
                    if fill && max >= 1 && cs.len() < max {
                        while cs.len() < max {
                            cs.insert(0, RawCoord::Cartesian("0".into(), "0".into()));
                        }
                    }
                    for c in cs {
                        cmd.args.push(Arg { role: Role::Coord, value: Value::Coord(c) });
                    }
                }
                Slot::Brace(_) | Slot::Body(_) | Slot::Angle => {
                    if peek(*pos) != Some(&TokKind::Brace) {
                        self.diags.error(head_span, format!("`\\{name}' is missing a {{...}} argument"));
                        return Outcome::Failed;
                    }
                    let tok = toks[*pos].clone();
                    *pos += 1;
                    end = tok.end;
                    let value = match *slot {
                        Slot::Body(bctx) => {
                            let sub = self.sub_tokens(&tok);
                            let mut p = 0;
                            Value::Body(self.parse_seq(&sub, &mut p, bctx, None))
                        }
                        Slot::Angle => match parse_angle(&self.raw(&tok)) {
                            Ok(a) => Value::Angle(a),
                            Err(e) => {
                                self.diags.error(self.span(tok.start, tok.end), e.message());
                                return Outcome::Failed;
                            }
                        },
                        _ => Value::Text(self.raw(&tok)),
                    };
                    let role = match *slot {
                        Slot::Brace(r) => r,
                        Slot::Angle => Role::Angle,
                        _ => Role::Body,
                    };
                    cmd.args.push(Arg { role, value });
                }
                Slot::Extent => {
                    if peek(*pos) != Some(&TokKind::Paren) {
                        self.diags.error(head_span, format!("`\\{name}' expects (width,height,depth)"));
                        return Outcome::Failed;
                    }
                    let v = self.raw(&toks[*pos]);
                    if v.split(',').count() != 3 {
                        self.diags.error(head_span, format!("`\\{name}' expects (width,height,depth)"));
                        *pos += 1;
                        return Outcome::Failed;
                    }
                    cmd.args.push(Arg { role: Role::Extent, value: Value::Text(v) });
                    end = toks[*pos].end;
                    *pos += 1;
                }
            }
        }
        cmd.span = self.span(head.start, end);
        Outcome::Ok(cmd)
    }
}

fn short(s: &str) -> String {
    let mut out: String = s.chars().take(24).collect();
    if s.chars().count() > 24 {
        out.push_str("...");
    }
    out
}

// ---------------------------------------------------------------- printer

/// Print an AST back to canonical source.
pub fn print(ast: &Ast) -> String {
    let mut out = String::new();
    print_seq(ast, &mut out, true);
    out.push('\n');
    out
}

fn print_seq(ast: &Ast, out: &mut String, lines: bool) {
    for (i, n) in ast.items.iter().enumerate() {
        if i > 0 {
            out.push(if lines { '\n' } else { ' ' });
        }
        match n {
            Node::Text(t) => out.push_str(&t.text),
            Node::Cmd(c) => print_cmd(c, out),
        }
    }
}

fn print_cmd(c: &Cmd, out: &mut String) {
    if c.name == "pspicture" {
        out.push_str(if c.starred { "\\begin{pspicture*}" } else { "\\begin{pspicture}" });
        for a in &c.args {
            if a.role != Role::Body {
                print_arg(a, out);
            }
        }
        if let Some(b) = c.body() {
            if !b.items.is_empty() {
                out.push('\n');
                print_seq(b, out, true);
            }
        }
        out.push_str(if c.starred { "\n\\end{pspicture*}" } else { "\n\\end{pspicture}" });
        return;
    }
    out.push('\\');
    out.push_str(&c.name);
    if c.starred {
        out.push('*');
    }
    for a in &c.args {
        if a.role == Role::Clipped {
            if let Value::Body(b) = &a.value {
                if !b.items.is_empty() {
                    out.push('\n');
                    print_seq(b, out, true);
                }
            }
            out.push_str("\n\\endpsclip");
        } else {
            print_arg(a, out);
        }
    }
}

fn print_arg(a: &Arg, out: &mut String) {
    let (open, close) = match a.role {
        Role::Par | Role::Ref | Role::RefAngle | Role::Opt => ('[', ']'),
        Role::Coord | Role::Extent => ('(', ')'),
        _ => ('{', '}'),
    };
    out.push(open);
    match &a.value {
        Value::Text(t) => out.push_str(t),
        Value::Coord(c) => out.push_str(&print_coord(c)),
        Value::Angle(x) => out.push_str(&print_angle(x)),
        Value::Body(b) => print_seq(b, out, false),
    }
    out.push(close);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd0(src: &str) -> Cmd {
        let (ast, d) = parse(src);
        assert!(d.is_empty(), "{:?}", d.items());
        match &ast.items[0] {
            Node::Cmd(c) => c.clone(),
            n => panic!("{n:?}"),
        }
    }

    #[test]
    fn token_shapes() {
        let (t, d) = tokenize("\\psline[linewidth=2pt]{->}(0,0)(1,1)");
        assert!(d.is_empty());
        assert_eq!(t.len(), 5);
        let (t, _) = tokenize("% note\n\\psdot");
        assert_eq!(t.len(), 1);
        let (_, d) = tokenize("\\psframe(0,0");
        assert_eq!(d.items()[0].span.col, 9);
        assert!(d.items()[0].message.contains("unbalanced"));
    }

    #[test]
    fn arities() {
        let c = cmd0("\\psgrid");
        assert!(c.coords().is_empty());
        let c = cmd0("\\psarc{<-}(1,1){2}{10}{80}");
        assert_eq!(c.arrow_spec(), Some("<-"));
        assert_eq!(c.coords().len(), 1);
        assert_eq!(c.scalars().len() + c.angles().len(), 3);
        let c = cmd0("\\pscircle{1}");
        assert_eq!(c.coords(), vec![&RawCoord::Cartesian("0".into(), "0".into())]);
        assert_eq!(c.scalars(), vec!["1"]);
    }

    #[test]
    fn keyvals() {
        let kv = |s| parse_keyvals(s).0;
        assert_eq!(
            kv("linecolor=red,linewidth=2pt"),
            vec![("linecolor".into(), "red".into()), ("linewidth".into(), "2pt".into())]
        );
        assert_eq!(kv("ref={1 .5}"), vec![("ref".into(), "1 .5".into())]);
        assert_eq!(kv("dash=5pt 3pt"), vec![("dash".into(), "5pt 3pt".into())]);
        assert_eq!(parse_keyvals("a=1,,oops").1, vec!["oops".to_string()]);
    }

    #[test]
    fn coordinate_forms() {
        assert_eq!(parse_coord("3;45").unwrap(), RawCoord::Polar("3".into(), RawAngle::Numeric("45".into())));
        assert_eq!(
            parse_coord("1,2|3,4").unwrap(),
            RawCoord::Mixed(
                Box::new(RawCoord::Cartesian("1".into(), "2".into())),
                Box::new(RawCoord::Cartesian("3".into(), "4".into()))
            )
        );
        assert_eq!(parse_coord("!2 1").unwrap(), RawCoord::Raw("2".into(), "1".into()));
        assert_eq!(parse_coord("A"), Err(CoordError::Node));
        assert!(matches!(parse_coord("!1 2 add"), Err(CoordError::BadRaw(_))));
        assert!(matches!(parse_coord("3"), Err(CoordError::OneComponent(_))));
        assert_eq!(
            parse_angle("(1,1)").unwrap(),
            RawAngle::Direction(Box::new(RawCoord::Cartesian("1".into(), "1".into())))
        );
    }

    #[test]
    fn recovery_counts_one_diagnostic_per_bad_command() {
        let src = "\\psline(0,0)(1,1)\n\\psfoo(1,2)\n\\pscircle(0,0)\n\\psframe(0,0\n\\psdot(1,1)\n";
        let (ast, d) = parse(src);
        assert_eq!(d.len(), 3, "{:?}", d.items());
        assert_eq!(ast.items.len(), 2);
    }

    #[test]
    fn round_trip() {
        let src = "\\begin{pspicture*}[showgrid=true](-1,-1)(3,2)\n\\psset{linewidth=1pt}\n\\rput[lB]{30}(1,1){\\psframebox*[framesep=2pt]{A \\pstbox(1pt,2pt,3pt){x}}}\n\\uput{4pt}[ur](2,2){B}\n\\psclip{\\pscircle(1,1){1}}\\psline(0,0)(2,2)\\endpsclip\n\\pscustom[liftpen=2]{\\psline(0,0)(1,1)\\lineto(2,0)}\n\\end{pspicture*}";
        let (a, d) = parse(src);
        assert!(d.is_empty(), "{:?}", d.items());
        let printed = print(&a);
        let (b, d2) = parse(&printed);
        assert!(d2.is_empty(), "{printed}\n{:?}", d2.items());
        assert!(a.same_structure(&b), "{printed}");
    }

    #[test]
    fn plain_picture_form() {
        let (a, d) = parse("\\pspicture(2,2)\\psdot(1,1)\\endpspicture");
        assert!(d.is_empty(), "{:?}", d.items());
        let Node::Cmd(c) = &a.items[0] else { panic!() };
        assert_eq!(c.name, "pspicture");
        assert_eq!(c.coords().len(), 2);
        assert_eq!(c.body().unwrap().items.len(), 1);
    }

    #[test]
    fn custom_only_outside_custom() {
        let (_, d) = parse("\\lineto(1,1)");
        assert_eq!(d.len(), 1);
        assert!(d.items()[0].message.contains("pscustom"));
    }

    #[test]
    fn aliases() {
        let (a, d) = parse("\\newpsobject{myline}{psline}{linecolor=red}\\myline(0,0)(1,1)");
        assert!(d.is_empty(), "{:?}", d.items());
        assert_eq!(a.items.len(), 2);
    }
}
