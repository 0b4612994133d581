//! Pulls refactored code out of a chat response.

use crate::syntax::parse_source;

struct Fence {
    ch: char,
    len: usize,
    indent: usize,
}

fn opening_fence(line: &str) -> Option<Fence> {
    let indent = line.len() - line.trim_start_matches(' ').len();
    if indent > 3 {
        return None;
    }
    let rest = &line[indent..];
    let ch = rest.chars().next().filter(|c| *c == '`' || *c == '~')?;
    let len = rest.chars().take_while(|c| *c == ch).count();
    if len < 3 {
        return None;
    }
    // a backtick fence's info string may not contain backticks
    if ch == '`' && rest[len..].contains('`') {
        return None;
    }
    Some(Fence { ch, len, indent })
}

fn closes(line: &str, fence: &Fence) -> bool {
    let t = line.trim_start_matches(' ');
    if line.len() - t.len() > 3 {
        return false;
    }
    let run = t.chars().take_while(|c| *c == fence.ch).count();
    run >= fence.len && t[run..].trim().is_empty()
}

fn strip_indent(line: &str, n: usize) -> &str {
    let spaces = line.len() - line.trim_start_matches(' ').len();
    &line[spaces.min(n)..]
}

/// Contents of every fenced block, in order. An unterminated fence runs to
/// the end of the response.
pub fn fenced_blocks(text: &str) -> Vec<Vec<&str>> {
    let mut blocks = Vec::new();
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        let Some(fence) = opening_fence(line) else {
            continue;
        };
        let mut body = Vec::new();
        for inner in lines.by_ref() {
            if closes(inner, &fence) {
                break;
            }
            body.push(strip_indent(inner, fence.indent));
        }
        blocks.push(body);
    }
    blocks
}

/// The fenced block with the most lines (the first on ties); without fences,
/// the whole response if it parses as Python.
pub fn extract_code(raw: &str) -> Option<String> {
    let blocks = fenced_blocks(raw);
    if !blocks.is_empty() {
        let mut best = &blocks[0];
        for b in &blocks[1..] {
            if b.len() > best.len() {
                best = b;
            }
        }
        let mut code = best.join("\n");
        code.push('\n');
        return Some(code);
    }
    if raw.trim().is_empty() {
        return None;
    }
    parse_source("response.py", raw.to_string()).ok().map(|_| raw.to_string())
}
