//! Brute-force smell oracle over a hand-rolled Python tokenizer. It shares
//! no code with the tree-sitter pipeline: entities are found from bracket
//! groups, keywords and indentation alone.

#![allow(dead_code)]

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tk {
    Name,
    Number,
    Str,
    Op,
    Newline,
    Indent,
    Dedent,
}

#[derive(Debug, Clone)]
pub struct Tok {
    pub kind: Tk,
    pub text: String,
    pub start: usize,
    pub end: usize,
}

const OPS: [&str; 42] = [
    "**=", "//=", ">>=", "<<=", "...", "!=", "%=", "&=", "**", "*=", "+=", "-=", "->", "//", "/=", ":=", "<<", "<=",
    "==", ">=", ">>", "@=", "^=", "|=", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "@", "=", "+", "-", "*", "/",
    "<", ">",
];

const KEYWORDS: [&str; 32] = [
    "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif", "else", "except",
    "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise",
    "return", "try", "while", "with", "yield",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn string_prefix(s: &str) -> bool {
    matches!(
        s.to_ascii_lowercase().as_str(),
        "r" | "u" | "b" | "f" | "rb" | "br" | "fr" | "rf"
    )
}

/// Scans a string literal starting at its opening quote; returns the end.
fn scan_string(b: &[u8], mut i: usize) -> usize {
    let q = b[i];
    let triple = i + 2 < b.len() && b[i + 1] == q && b[i + 2] == q;
    i += if triple { 3 } else { 1 };
    while i < b.len() {
        if b[i] == b'\\' {
            i += 2;
            continue;
        }
        if triple {
            if i + 2 < b.len() && b[i] == q && b[i + 1] == q && b[i + 2] == q {
                return i + 3;
            }
        } else if b[i] == q {
            return i + 1;
        }
        i += 1;
    }
    b.len()
}

pub fn tokenize(src: &str) -> Vec<Tok> {
    let b = src.as_bytes();
    let mut out: Vec<Tok> = Vec::new();
    let mut indents = vec![0usize];
    let mut depth = 0i32;
    let mut line_start = true;
    let mut i = 0;
    let push = |out: &mut Vec<Tok>, kind, start: usize, end: usize| {
        out.push(Tok {
            kind,
            text: src[start..end].to_string(),
            start,
            end,
        })
    };
    while i < b.len() {
        if line_start && depth == 0 {
            let mut j = i;
            let mut col = 0;
            while j < b.len() && (b[j] == b' ' || b[j] == b'\t') {
                col = if b[j] == b'\t' { col + 8 - col % 8 } else { col + 1 };
                j += 1;
            }
            if j >= b.len() {
                break;
            }
            if matches!(b[j], b'\n' | b'\r' | b'#') {
                while j < b.len() && b[j] != b'\n' {
                    j += 1;
                }
                i = j + 1;
                continue;
            }
            if col > *indents.last().unwrap() {
                indents.push(col);
                push(&mut out, Tk::Indent, j, j);
            }
            while col < *indents.last().unwrap() {
                indents.pop();
                push(&mut out, Tk::Dedent, j, j);
            }
            i = j;
            line_start = false;
            continue;
        }
        let c = b[i];
        if c == b' ' || c == b'\t' || c == b'\x0c' || c == b'\r' {
            i += 1;
        } else if c == b'\n' {
            if depth == 0 {
                if !matches!(out.last().map(|t| t.kind), Some(Tk::Newline) | None) {
                    push(&mut out, Tk::Newline, i, i);
                }
                line_start = true;
            }
            i += 1;
        } else if c == b'#' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if c == b'\\' && i + 1 < b.len() && (b[i + 1] == b'\n' || b[i + 1] == b'\r') {
            i += if b[i + 1] == b'\r' { 3 } else { 2 };
        } else if c == b'"' || c == b'\'' {
            let end = scan_string(b, i);
            push(&mut out, Tk::Str, i, end);
            i = end;
        } else if c.is_ascii_digit() || (c == b'.' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'.') {
                if (b[i] == b'e' || b[i] == b'E') && i + 1 < b.len() && (b[i + 1] == b'+' || b[i + 1] == b'-') {
                    i += 1;
                }
                i += 1;
            }
            push(&mut out, Tk::Number, s, i);
        } else {
            let ch = src[i..].chars().next().unwrap();
            if ch.is_alphabetic() || ch == '_' {
                let s = i;
                for (off, ch) in src[i..].char_indices() {
                    if !(ch.is_alphanumeric() || ch == '_') {
                        break;
                    }
                    i = s + off + ch.len_utf8();
                }
                if i < b.len() && (b[i] == b'"' || b[i] == b'\'') && string_prefix(&src[s..i]) {
                    let end = scan_string(b, i);
                    push(&mut out, Tk::Str, s, end);
                    i = end;
                } else {
                    push(&mut out, Tk::Name, s, i);
                }
            } else {
                let op = OPS
                    .iter()
                    .find(|op| src[i..].starts_with(*op))
                    .map_or(ch.len_utf8(), |op| op.len());
                let text = &src[i..i + op];
                match text {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => depth -= 1,
                    _ => {}
                }
                push(&mut out, Tk::Op, i, i + op);
                i += op;
            }
        }
    }
    if !matches!(out.last().map(|t| t.kind), Some(Tk::Newline) | None) {
        push(&mut out, Tk::Newline, b.len(), b.len());
    }
    while indents.len() > 1 {
        indents.pop();
        push(&mut out, Tk::Dedent, b.len(), b.len());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Call,
    Subscript,
    Paren,
    Tuple,
    List,
    DictSet,
    Comp,
    Pattern,
}

impl Group {
    fn is_container(self) -> bool {
        matches!(self, Group::Tuple | Group::List | Group::DictSet)
    }
}

/// One reported smell: abbreviation, 1-based line, byte column, value.
pub type Finding = (String, usize, usize, u32);

struct Analysis<'s> {
    src: &'s str,
    toks: Vec<Tok>,
    line_starts: Vec<usize>,
    close: BTreeMap<usize, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    lambda_param: Vec<bool>,
    lambda_colon: BTreeMap<usize, usize>,
    groups: BTreeMap<usize, Group>,
}

impl<'s> Analysis<'s> {
    fn new(src: &'s str) -> Self {
        let toks = tokenize(src);
        let mut line_starts = vec![0];
        line_starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        let n = toks.len();
        let mut close = BTreeMap::new();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut stack: Vec<usize> = Vec::new();
        for (k, t) in toks.iter().enumerate() {
            let is_close = t.kind == Tk::Op && matches!(t.text.as_str(), ")" | "]" | "}");
            if is_close {
                let o = stack.pop().expect("balanced brackets");
                close.insert(o, k);
            }
            parent[k] = stack.last().copied();
            depth[k] = stack.len();
            if t.kind == Tk::Op && matches!(t.text.as_str(), "(" | "[" | "{") {
                stack.push(k);
            }
        }
        let mut a = Self {
            src,
            toks,
            line_starts,
            close,
            parent,
            depth,
            lambda_param: vec![false; n],
            lambda_colon: BTreeMap::new(),
            groups: BTreeMap::new(),
        };
        a.mark_lambdas();
        a.classify_groups();
        a
    }

    fn is(&self, k: usize, text: &str) -> bool {
        self.toks.get(k).is_some_and(|t| t.text == text && matches!(t.kind, Tk::Op | Tk::Name))
    }

    fn pos(&self, byte: usize) -> (usize, usize) {
        let line = self.line_starts.partition_point(|&s| s <= byte);
        (line, byte - self.line_starts[line - 1])
    }

    fn end_line(&self, end: usize) -> usize {
        self.pos(end.saturating_sub(1)).0
    }

    fn chars_between(&self, start: usize, end: usize) -> u32 {
        self.src[start..end].chars().filter(|c| *c != '\n' && *c != '\r').count() as u32
    }

    fn mark_lambdas(&mut self) {
        for l in 0..self.toks.len() {
            if !(self.toks[l].kind == Tk::Name && self.toks[l].text == "lambda") {
                continue;
            }
            let d = self.depth[l];
            let mut pending = 1;
            let mut k = l + 1;
            while k < self.toks.len() {
                if self.depth[k] == d && self.is(k, "lambda") {
                    pending += 1;
                }
                if self.depth[k] == d && self.is(k, ":") {
                    pending -= 1;
                    if pending == 0 {
                        break;
                    }
                }
                k += 1;
            }
            self.lambda_colon.insert(l, k);
            for m in l + 1..k {
                self.lambda_param[m] = true;
            }
        }
    }

    fn atom_end(&self, k: usize) -> bool {
        let t = &self.toks[k];
        match t.kind {
            Tk::Name => !is_keyword(&t.text),
            Tk::Str | Tk::Number => true,
            Tk::Op => matches!(t.text.as_str(), ")" | "]" | "}"),
            _ => false,
        }
    }

    /// Tokens directly inside the group opened at `o`.
    fn members(&self, o: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.close[&o];
        let d = self.depth[o] + 1;
        (o + 1..c).filter(move |&k| self.depth[k] == d)
    }

    fn classify_groups(&mut self) {
        let opens: Vec<usize> = self.close.keys().copied().collect();
        for o in opens {
            let c = self.close[&o];
            let text = self.toks[o].text.clone();
            let trailer = o > 0 && self.atom_end(o - 1);
            let has_for = self.members(o).any(|k| self.is(k, "for"));
            let has_comma = self.members(o).any(|k| self.is(k, ",") && !self.lambda_param[k]);
            let mut g = match (text.as_str(), trailer, has_for) {
                (_, _, true) if !(text == "[" && trailer) => Group::Comp,
                ("(", true, _) => Group::Call,
                ("[", true, _) => Group::Subscript,
                ("(", false, _) if c == o + 1 || has_comma => Group::Tuple,
                ("(", false, _) => Group::Paren,
                ("[", false, _) => Group::List,
                _ => Group::DictSet,
            };
            if matches!(g, Group::Tuple | Group::List) {
                let followed_by_assign = self.is(c + 1, "=");
                let target_kw = o > 0 && (self.is(o - 1, "for") || self.is(o - 1, "as"));
                let in_pattern = self.parent[o].is_some_and(|p| self.groups.get(&p) == Some(&Group::Pattern));
                if followed_by_assign || target_kw || in_pattern {
                    g = Group::Pattern;
                }
            }
            self.groups.insert(o, g);
        }
    }

    fn logical_lines(&self) -> Vec<(usize, usize)> {
        let mut lines = Vec::new();
        let mut s = 0;
        for (k, t) in self.toks.iter().enumerate() {
            if t.kind == Tk::Newline {
                let mut first = s;
                while first < k && matches!(self.toks[first].kind, Tk::Indent | Tk::Dedent) {
                    first += 1;
                }
                if first < k {
                    lines.push((first, k));
                }
                s = k + 1;
            }
        }
        lines
    }

    /// Parts of a bracket group split at its own commas.
    fn parts(&self, o: usize) -> Vec<Vec<usize>> {
        let c = self.close[&o];
        let d = self.depth[o] + 1;
        let mut parts = vec![Vec::new()];
        for k in o + 1..c {
            if self.depth[k] == d && self.is(k, ",") && !self.lambda_param[k] {
                parts.push(Vec::new());
            } else {
                parts.last_mut().unwrap().push(k);
            }
        }
        parts.retain(|p| !p.is_empty());
        parts
    }

    fn is_terminator(&self, k: usize, d: usize) -> bool {
        let t = &self.toks[k];
        if self.depth[k] < d || t.kind == Tk::Newline || t.kind == Tk::Indent || t.kind == Tk::Dedent {
            return true;
        }
        self.depth[k] == d
            && (matches!(t.text.as_str(), "," | ":" | ";" | "=") && t.kind == Tk::Op
                || t.kind == Tk::Name && matches!(t.text.as_str(), "for" | "async"))
    }

    fn run(&self, thresholds: &BTreeMap<&str, u32>) -> Vec<Finding> {
        let mut out: Vec<Finding> = Vec::new();
        let mut emit = |abbr: &str, byte: usize, value: u32| {
            if value > thresholds[abbr] {
                let (line, col) = self.pos(byte);
                out.push((abbr.to_string(), line, col, value));
            }
        };

        // defs and classes: (kind, start byte, end byte, header group)
        let lines = self.logical_lines();
        let mut blocks: Vec<(&str, usize, usize, Option<usize>)> = Vec::new();
        for (li, &(first, nl)) in lines.iter().enumerate() {
            let mut h = first;
            if self.is(h, "async") {
                h += 1;
            }
            let kind = match self.toks[h].text.as_str() {
                "def" if self.toks[h].kind == Tk::Name => "def",
                "class" if self.toks[h].kind == Tk::Name => "class",
                _ => continue,
            };
            let group = (h + 2 < nl && self.is(h + 2, "(")).then_some(h + 2);
            let mut colon = group.map_or(h + 2, |g| self.close[&g] + 1);
            while !(self.depth[colon] == self.depth[h] && self.is(colon, ":")) {
                colon += 1;
            }
            let last = if colon + 1 == nl {
                let mut level = 0i32;
                let mut k = nl + 1;
                loop {
                    match self.toks[k].kind {
                        Tk::Indent => level += 1,
                        Tk::Dedent => level -= 1,
                        _ => {}
                    }
                    if level == 0 {
                        break;
                    }
                    k += 1;
                }
                (nl + 1..k)
                    .rev()
                    .find(|&m| !matches!(self.toks[m].kind, Tk::Newline | Tk::Indent | Tk::Dedent))
                    .unwrap()
            } else {
                nl - 1
            };
            let mut start_line = li;
            while start_line > 0 && self.is(lines[start_line - 1].0, "@") {
                start_line -= 1;
            }
            blocks.push((kind, self.toks[lines[start_line].0].start, self.toks[last].end, group));
        }

        // lambdas: (start byte, end byte)
        let mut lambdas: Vec<(usize, usize)> = Vec::new();
        for (&l, &colon) in &self.lambda_colon {
            let d = self.depth[l];
            let mut pending = 0;
            let mut k = colon + 1;
            while k < self.toks.len() {
                if self.depth[k] == d && self.is(k, "lambda") {
                    pending += 1;
                } else if pending > 0 && self.depth[k] == d && self.is(k, ":") {
                    pending -= 1;
                } else if self.is_terminator(k, d) {
                    break;
                }
                k += 1;
            }
            lambdas.push((self.toks[l].start, self.toks[k - 1].end));
        }

        let scopes: Vec<(usize, usize)> = blocks
            .iter()
            .filter(|b| b.0 == "def")
            .map(|b| (b.1, b.2))
            .chain(lambdas.iter().copied())
            .collect();
        let enclosing_scopes =
            |s: usize, e: usize| scopes.iter().filter(|&&(a, b)| a <= s && e <= b && (a, b) != (s, e)).count() as u32;

        for &(kind, s, e, group) in &blocks {
            let lines_spanned = (self.end_line(e) - self.pos(s).0 + 1) as u32;
            if kind == "def" {
                let g = group.expect("def has parameters");
                let parts = self.parts(g);
                let mut par = parts
                    .iter()
                    .filter(|p| !(p.len() == 1 && matches!(self.toks[p[0]].text.as_str(), "*" | "/")))
                    .count() as u32;
                let owner = blocks
                    .iter()
                    .filter(|b| b.1 <= s && e <= b.2 && (b.1, b.2) != (s, e))
                    .max_by_key(|b| b.1);
                let in_class = owner.is_some_and(|b| b.0 == "class");
                if in_class && parts.first().is_some_and(|p| matches!(self.toks[p[0]].text.as_str(), "self" | "cls")) {
                    par -= 1;
                }
                emit("LPL", s, par);
                emit("LM", s, lines_spanned);
                emit("LSC", s, 1 + enclosing_scopes(s, e));
            } else {
                emit("LC", s, lines_spanned);
                let nbc = group.map_or(0, |g| {
                    self.parts(g)
                        .iter()
                        .filter(|p| !self.is(p[0], "**") && !(p.len() > 1 && self.is(p[1], "=")))
                        .count()
                });
                emit("LBCL", s, nbc as u32);
            }
        }

        for &(s, e) in &lambdas {
            emit("LSC", s, 1 + enclosing_scopes(s, e));
            emit("LLF", s, self.chars_between(s, e));
        }

        self.ternaries(&mut emit);

        for (&o, &g) in &self.groups {
            if g == Group::Comp {
                let mut seen_for = false;
                let mut clauses = 0;
                for k in self.members(o) {
                    if self.is(k, "for") {
                        seen_for = true;
                        clauses += 1;
                    } else if seen_for && self.is(k, "if") {
                        clauses += 1;
                    }
                }
                emit("CCC", self.toks[o].start, clauses);
            }
            if g.is_container() {
                let mut p = self.parent[o];
                let mut root = true;
                while let Some(q) = p {
                    if self.groups[&q].is_container() {
                        root = false;
                    }
                    p = self.parent[q];
                }
                if root {
                    emit("MNC", self.toks[o].start, self.nesting(o));
                }
            }
        }

        self.chains(&lines, &mut emit);
        out.sort();
        out
    }

    fn nesting(&self, o: usize) -> u32 {
        let own = u32::from(matches!(self.groups[&o], Group::Tuple | Group::List | Group::DictSet | Group::Comp));
        let c = self.close[&o];
        let deepest = self
            .groups
            .keys()
            .filter(|&&k| k > o && k < c && self.parent[k] == Some(o))
            .map(|&k| self.nesting(k))
            .max()
            .unwrap_or(0);
        own + deepest
    }

    fn ternaries(&self, emit: &mut impl FnMut(&str, usize, u32)) {
        let line_firsts: Vec<usize> = self.logical_lines().iter().map(|l| l.0).collect();
        for i in 0..self.toks.len() {
            if !(self.toks[i].kind == Tk::Name && self.toks[i].text == "if") || line_firsts.contains(&i) {
                continue;
            }
            let d = self.depth[i];
            let mut k = i + 1;
            let mut else_at = None;
            while k < self.toks.len() && !self.is_terminator(k, d) {
                if self.depth[k] == d && self.is(k, "else") {
                    else_at = Some(k);
                    break;
                }
                k += 1;
            }
            let Some(e) = else_at else { continue };
            let mut a = i;
            while a > 0 {
                let p = a - 1;
                let t = &self.toks[p];
                let stop = self.depth[p] < d
                    || matches!(t.kind, Tk::Newline | Tk::Indent | Tk::Dedent)
                    || (self.depth[p] == d
                        && (t.kind == Tk::Op
                            && matches!(
                                t.text.as_str(),
                                "," | "=" | ":" | ";" | "->" | ":=" | "+=" | "-=" | "*=" | "/=" | "//=" | "%=" | "**="
                            )
                            || t.kind == Tk::Name
                                && matches!(
                                    t.text.as_str(),
                                    "return"
                                        | "yield"
                                        | "else"
                                        | "in"
                                        | "assert"
                                        | "del"
                                        | "if"
                                        | "elif"
                                        | "while"
                                        | "for"
                                        | "with"
                                        | "as"
                                        | "from"
                                        | "import"
                                        | "raise"
                                        | "lambda"
                                )));
                if stop {
                    break;
                }
                a = p;
            }
            let mut z = e + 1;
            while z < self.toks.len() && !self.is_terminator(z, d) {
                z += 1;
            }
            let (s, end) = (self.toks[a].start, self.toks[z - 1].end);
            emit("LTCE", s, self.chars_between(s, end));
        }
    }

    fn chains(&self, lines: &[(usize, usize)], emit: &mut impl FnMut(&str, usize, u32)) {
        for &(first, nl) in lines {
            if self.is(first, "import") || self.is(first, "from") {
                continue;
            }
            for i in first..nl {
                let t = &self.toks[i];
                let starts = match t.kind {
                    Tk::Name => (!is_keyword(&t.text)) && !(i > 0 && self.is(i - 1, ".")),
                    Tk::Number => true,
                    Tk::Str => !(i > 0 && self.toks[i - 1].kind == Tk::Str),
                    Tk::Op => matches!(t.text.as_str(), "(" | "[" | "{") && !(i > 0 && self.atom_end(i - 1)),
                    _ => false,
                };
                if !starts {
                    continue;
                }
                let mut j = match t.kind {
                    Tk::Op => self.close[&i],
                    Tk::Str => {
                        let mut j = i;
                        while self.toks[j + 1].kind == Tk::Str {
                            j += 1;
                        }
                        j
                    }
                    _ => i,
                };
                let mut dots = 0;
                loop {
                    if self.is(j + 1, ".") && self.toks[j + 2].kind == Tk::Name {
                        dots += 1;
                        j += 2;
                    } else if self.is(j + 1, "(") || self.is(j + 1, "[") {
                        j = self.close[&(j + 1)];
                    } else {
                        break;
                    }
                }
                if dots > 0 {
                    emit("LMC", t.start, dots);
                }
            }
        }
    }
}

/// Findings for `src`, sorted, under `thresholds` (abbreviation -> limit,
/// strict exceedance).
pub fn findings(src: &str, thresholds: &BTreeMap<&str, u32>) -> Vec<Finding> {
    Analysis::new(src).run(thresholds)
}
