// SPDX-License-Identifier: Apache-2.0

//! Verilog/SystemVerilog tokenizer. Comments are dropped; every other lexeme
//! keeps its byte offset so callers can patch the source in place.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    /// Identifiers and keywords. Escaped identifiers keep their backslash.
    Ident,
    /// `$display`, `$clog2`, ...
    SysIdent,
    Number,
    Str,
    Sym,
    /// Compiler directive or macro use: `` `ifdef ``, `` `WIDTH ``. Directives
    /// that take the rest of the line (`` `define ``, `` `include ``,
    /// `` `timescale ``) span it entirely.
    Directive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokKind,
    pub text: &'a str,
    pub start: usize,
    pub line: u32,
}

impl Token<'_> {
    pub fn end(&self) -> usize {
        self.start + self.text.len()
    }

    pub fn is(&self, s: &str) -> bool {
        self.text == s
    }

    /// An identifier that is not a reserved word.
    pub fn is_name(&self) -> bool {
        self.kind == TokKind::Ident && !is_keyword(self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: u32,
    pub msg: String,
}

const SYMBOLS: &[&str] = &[
    "<<<=", ">>>=", "===", "!==", "<<<", ">>>", "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "~&", "~|", "~^", "^~", "<<",
    ">>", "->", "::", "+:", "-:", "**", "++", "--", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "##",
];

const KEYWORDS: &[&str] = &[
    "always", "always_comb", "always_ff", "always_latch", "and", "assert", "assign", "assume", "automatic", "begin", "bit", "buf",
    "byte", "case", "casex", "casez", "class", "config", "cover", "default", "defparam", "disable", "do", "else", "end", "endcase",
    "endclass", "endconfig", "endfunction", "endgenerate", "endinterface", "endmodule", "endpackage", "endprimitive", "endprogram",
    "endspecify", "endtask", "enum", "event", "final", "for", "force", "foreach", "forever", "fork", "function", "generate",
    "genvar", "if", "import", "initial", "inout", "input", "int", "integer", "interface", "join", "join_any", "join_none",
    "localparam", "logic", "longint", "macromodule", "module", "nand", "negedge", "nor", "not", "or", "output", "package",
    "packed", "parameter", "posedge", "primitive", "priority", "program", "real", "realtime", "ref", "reg", "release", "repeat", "return",
    "shortint", "shortreal", "signed", "specify", "static", "string", "struct", "supply0", "supply1", "task", "time", "tri",
    "tri0", "tri1", "triand", "trior", "trireg", "typedef", "union", "unique", "unique0", "unsigned", "uwire", "var",
    "void", "wait", "wand", "while", "wire", "wor", "xnor", "xor",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.binary_search(&s).is_ok()
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

pub fn lex(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line: u32 = 1;
    let err = |line, msg: &str| LexError { line, msg: msg.to_string() };

    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let start_line = line;
        let kind;
        if b == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        } else if b == b'/' && bytes.get(i + 1) == Some(&b'*') {
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(err(start_line, "unterminated block comment"));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            continue;
        } else if is_ident_start(b) {
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            kind = TokKind::Ident;
        } else if b == b'\\' {
            i += 1;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i == start + 1 {
                return Err(err(line, "empty escaped identifier"));
            }
            kind = TokKind::Ident;
        } else if b == b'$' {
            i += 1;
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            kind = if i == start + 1 { TokKind::Sym } else { TokKind::SysIdent };
        } else if b == b'`' {
            i += 1;
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            let name = &src[start + 1..i];
            if name.is_empty() {
                return Err(err(line, "stray backtick"));
            }
            if matches!(name, "define" | "include" | "timescale" | "undef" | "default_nettype" | "resetall" | "pragma") {
                while i < bytes.len() && bytes[i] != b'\n' {
                    if bytes[i] == b'\\' && bytes.get(i + 1) == Some(&b'\n') {
                        line += 1;
                        i += 1;
                    }
                    i += 1;
                }
            }
            kind = TokKind::Directive;
        } else if b == b'"' {
            i += 1;
            loop {
                match bytes.get(i) {
                    None | Some(b'\n') => return Err(err(start_line, "unterminated string")),
                    Some(b'\\') => i += 2,
                    Some(b'"') => {
                        i += 1;
                        break;
                    }
                    _ => i += 1,
                }
            }
            kind = TokKind::Str;
        } else if b.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                }
            }
            if matches!(bytes.get(i), Some(b'e' | b'E')) && bytes.get(i + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+') {
                i += 2;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if bytes.get(i) == Some(&b'\'') {
                i = lex_based(bytes, i).ok_or_else(|| err(line, "bad based literal"))?;
            }
            kind = TokKind::Number;
        } else if b == b'\'' {
            match bytes.get(i + 1) {
                Some(b'{') => {
                    i += 2;
                    kind = TokKind::Sym;
                }
                Some(b'0' | b'1' | b'x' | b'X' | b'z' | b'Z') => {
                    i += 2;
                    kind = TokKind::Number;
                }
                Some(b's' | b'S' | b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H') => {
                    i = lex_based(bytes, i).ok_or_else(|| err(line, "bad based literal"))?;
                    kind = TokKind::Number;
                }
                _ => {
                    i += 1;
                    kind = TokKind::Sym;
                }
            }
        } else if b.is_ascii_graphic() {
            let rest = &src[i..];
            let len = SYMBOLS.iter().find(|s| rest.starts_with(**s)).map_or(1, |s| s.len());
            i += len;
            kind = TokKind::Sym;
        } else {
            return Err(err(line, &format!("unexpected byte 0x{b:02x}")));
        }
        out.push(Token { kind, text: &src[start..i], start, line: start_line });
    }
    Ok(out)
}

/// `i` points at the quote of a based literal. Returns the end offset.
fn lex_based(bytes: &[u8], mut i: usize) -> Option<usize> {
    i += 1;
    if matches!(bytes.get(i), Some(b's' | b'S')) {
        i += 1;
    }
    if !matches!(bytes.get(i), Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H')) {
        return None;
    }
    i += 1;
    while bytes.get(i).is_some_and(|c| c.is_ascii_whitespace() && *c != b'\n') {
        i += 1;
    }
    let digits_start = i;
    while bytes.get(i).is_some_and(|c| c.is_ascii_hexdigit() || matches!(c, b'x' | b'X' | b'z' | b'Z' | b'?' | b'_')) {
        i += 1;
    }
    (i > digits_start).then_some(i)
}
