// SPDX-License-Identifier: Apache-2.0

use super::lex::{lex, TokKind, Token};
use super::RtlError;

const DIRECTIONS: &[&str] = &["input", "output", "inout", "ref"];

const DATA_TYPES: &[&str] = &[
    "wire", "reg", "logic", "bit", "byte", "shortint", "int", "longint", "integer", "time", "real", "realtime", "shortreal", "tri",
    "tri0", "tri1", "triand", "trior", "trireg", "wand", "wor", "uwire", "supply0", "supply1", "var", "string", "signed",
    "unsigned",
];

const PRIMITIVES: &[&str] = &["and", "nand", "or", "nor", "xor", "xnor", "buf", "not"];

/// A declared variable: leaf name `name` of declared type `decl_type`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScannedDecl {
    pub name: String,
    pub decl_type: String,
    /// Set when the type came only from a port direction (`input [3:0] a;`)
    /// and may be refined by a later declaration of the same name.
    pub implicit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScannedInstance {
    pub module: String,
    pub name: String,
}

/// Everything the scanner records for one `module ... endmodule`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScannedModule {
    pub name: String,
    /// Byte offset of the `module` keyword.
    pub start: usize,
    /// Byte offset just past `endmodule` (and its optional label).
    pub end: usize,
    pub decls: Vec<ScannedDecl>,
    pub instances: Vec<ScannedInstance>,
    pub params: Vec<String>,
}

struct Parser<'s, 't> {
    file: &'s str,
    toks: &'t [Token<'s>],
    pos: usize,
}

type PResult<T> = Result<T, RtlError>;

impl<'s> Parser<'s, '_> {
    fn peek(&self) -> Option<&Token<'s>> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token<'s>> {
        self.toks.get(self.pos + n)
    }

    fn peek_is(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is(s))
    }

    fn bump(&mut self) -> Option<Token<'s>> {
        let t = self.toks.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn line(&self) -> u32 {
        self.peek().or(self.toks.last()).map_or(1, |t| t.line)
    }

    fn error(&self, expected: impl Into<String>) -> RtlError {
        RtlError::Parse { file: self.file.to_string(), line: self.line(), expected: expected.into() }
    }

    fn expect(&mut self, s: &str) -> PResult<Token<'s>> {
        if self.peek_is(s) {
            Ok(self.bump().expect("peeked"))
        } else {
            Err(self.error(format!("`{s}`")))
        }
    }

    fn expect_name(&mut self) -> PResult<Token<'s>> {
        match self.peek() {
            Some(t) if t.is_name() => Ok(self.bump().expect("peeked")),
            _ => Err(self.error("identifier")),
        }
    }

    fn skip_directive_args(&mut self) {
        // `ifdef NAME / `elsif NAME carry one identifier argument
        if let Some(t) = self.bump() {
            if matches!(t.text, "`ifdef" | "`ifndef" | "`elsif") && self.peek().is_some_and(|t| t.kind == TokKind::Ident) {
                self.bump();
            }
        }
    }

    fn is_open(t: &Token) -> bool {
        matches!(t.text, "(" | "[" | "{" | "'{")
    }

    fn is_close(t: &Token) -> bool {
        matches!(t.text, ")" | "]" | "}")
    }

    /// Skip a balanced group starting at an opening bracket. Returns the
    /// index one past the closing bracket.
    fn skip_group(&mut self) -> PResult<()> {
        let open = self.bump().ok_or_else(|| self.error("`(`"))?;
        let mut stack = vec![open.text];
        while let Some(t) = self.bump() {
            if Self::is_open(&t) {
                stack.push(t.text);
            } else if Self::is_close(&t) {
                let want = match stack.pop() {
                    Some("(") => ")",
                    Some("[") => "]",
                    Some(_) => "}",
                    None => unreachable!(),
                };
                if t.text != want {
                    self.pos -= 1;
                    return Err(self.error(format!("`{want}`")));
                }
                if stack.is_empty() {
                    return Ok(());
                }
            } else if matches!(t.text, "endmodule" | "module") {
                self.pos -= 1;
                return Err(self.error("closing bracket"));
            }
        }
        Err(self.error("closing bracket"))
    }

    fn skip_group_if(&mut self, s: &str) -> PResult<bool> {
        if self.peek_is(s) {
            self.skip_group()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Skip tokens up to and including the `;` ending the current item.
    fn skip_to_semi(&mut self) -> PResult<()> {
        loop {
            let Some(t) = self.peek() else {
                return Err(self.error("`;`"));
            };
            if t.is(";") {
                self.bump();
                return Ok(());
            }
            if Self::is_open(t) {
                self.skip_group()?;
                continue;
            }
            if Self::is_close(t) || matches!(t.text, "end" | "endmodule" | "begin" | "module" | "endcase" | "always" | "always_ff" | "always_comb" | "assign") {
                return Err(self.error("`;`"));
            }
            self.bump();
        }
    }

    fn skip_label(&mut self) -> PResult<()> {
        if self.peek_is(":") {
            self.bump();
            self.expect_name()?;
        }
        Ok(())
    }

    fn skip_until_keyword(&mut self, end: &str) -> PResult<()> {
        while let Some(t) = self.bump() {
            if t.is(end) {
                self.skip_label()?;
                return Ok(());
            }
        }
        Err(self.error(format!("`{end}`")))
    }

    /// Skip one procedural statement.
    fn skip_statement(&mut self) -> PResult<()> {
        let Some(t) = self.peek().copied() else {
            return Err(self.error("statement"));
        };
        match t.text {
            "begin" | "fork" => {
                self.bump();
                self.skip_label()?;
                let closers: &[&str] = if t.is("begin") { &["end"] } else { &["join", "join_any", "join_none"] };
                loop {
                    match self.peek() {
                        None => return Err(self.error(format!("`{}`", closers[0]))),
                        Some(n) if closers.contains(&n.text) => {
                            self.bump();
                            self.skip_label()?;
                            return Ok(());
                        }
                        Some(n) if n.kind == TokKind::Directive => self.skip_directive_args(),
                        _ => self.skip_statement()?,
                    }
                }
            }
            "if" => {
                self.bump();
                if !self.peek_is("(") {
                    return Err(self.error("`(`"));
                }
                self.skip_group()?;
                self.skip_statement()?;
                if self.peek_is("else") {
                    self.bump();
                    self.skip_statement()?;
                }
                Ok(())
            }
            "unique" | "unique0" | "priority" => {
                self.bump();
                self.skip_statement()
            }
            "case" | "casex" | "casez" => {
                self.bump();
                if !self.peek_is("(") {
                    return Err(self.error("`(`"));
                }
                self.skip_group()?;
                let mut depth = 1;
                while let Some(n) = self.bump() {
                    match n.text {
                        "case" | "casex" | "casez" => depth += 1,
                        "endcase" => {
                            depth -= 1;
                            if depth == 0 {
                                return Ok(());
                            }
                        }
                        "endmodule" => break,
                        _ => {}
                    }
                }
                Err(self.error("`endcase`"))
            }
            "for" | "while" | "repeat" | "foreach" | "wait" => {
                self.bump();
                if !self.peek_is("(") {
                    return Err(self.error("`(`"));
                }
                self.skip_group()?;
                self.skip_statement()
            }
            "forever" => {
                self.bump();
                self.skip_statement()
            }
            "do" => {
                self.bump();
                self.skip_statement()?;
                self.expect("while")?;
                if !self.peek_is("(") {
                    return Err(self.error("`(`"));
                }
                self.skip_group()?;
                self.expect(";").map(|_| ())
            }
            "@" => {
                self.bump();
                if self.peek_is("(") {
                    self.skip_group()?;
                } else if self.peek().is_some_and(|n| n.is("*") || n.kind == TokKind::Ident) {
                    self.bump();
                } else {
                    return Err(self.error("event control"));
                }
                self.skip_statement()
            }
            "#" => {
                self.bump();
                if !self.skip_group_if("(")? {
                    self.bump();
                }
                self.skip_statement()
            }
            ";" => {
                self.bump();
                Ok(())
            }
            "assert" | "assume" | "cover" => {
                self.bump();
                if self.peek_is("property") || self.peek_is("final") {
                    self.bump();
                }
                if !self.peek_is("(") {
                    return Err(self.error("`(`"));
                }
                self.skip_group()?;
                if self.peek_is(";") {
                    self.bump();
                    return Ok(());
                }
                if !self.peek_is("else") {
                    self.skip_statement()?;
                }
                if self.peek_is("else") {
                    self.bump();
                    self.skip_statement()?;
                }
                Ok(())
            }
            "end" | "endmodule" | "else" | "endcase" | "module" | "join" => Err(self.error("statement")),
            _ => self.skip_to_semi(),
        }
    }

    /// Render a declaration type: keywords separated by spaces, packed
    /// dimensions with their inner whitespace removed.
    fn render_type(parts: &[Token]) -> String {
        let mut out = String::new();
        let mut depth = 0usize;
        let mut prev_close = false;
        for t in parts {
            if depth == 0 {
                if t.is("[") {
                    if !out.is_empty() && !prev_close {
                        out.push(' ');
                    }
                } else if !out.is_empty() {
                    out.push(' ');
                }
            }
            out.push_str(t.text);
            if t.is("[") {
                depth += 1;
            } else if t.is("]") {
                depth = depth.saturating_sub(1);
            }
            prev_close = depth == 0 && t.is("]");
        }
        out
    }

    /// Collect type tokens (data-type keywords, user types, packed dims) up
    /// to the first declarator name.
    fn parse_type_part(&mut self) -> PResult<Vec<Token<'s>>> {
        let mut parts = Vec::new();
        loop {
            let Some(t) = self.peek().copied() else {
                return Err(self.error("declaration"));
            };
            if t.is("[") {
                let from = self.pos;
                self.skip_group()?;
                parts.extend_from_slice(&self.toks[from..self.pos]);
            } else if DATA_TYPES.contains(&t.text) {
                parts.push(self.bump().expect("peeked"));
            } else if t.is_name() {
                // user-defined or package-scoped type, e.g. `state_t s` or `pkg::t s`
                let next = self.peek_at(1);
                let is_type = next.is_some_and(|n| n.is_name() || n.is("::") || n.is("[") || n.is("."));
                if !is_type {
                    return Ok(parts);
                }
                parts.push(self.bump().expect("peeked"));
                while self.peek_is("::") || self.peek_is(".") {
                    parts.push(self.bump().expect("peeked"));
                    parts.push(self.expect_name()?);
                }
            } else {
                return Ok(parts);
            }
        }
    }

    /// Parse `name [unpacked] [= expr] {, ...} ;` and return the names.
    fn parse_declarators(&mut self) -> PResult<Vec<String>> {
        let mut names = Vec::new();
        loop {
            let name = self.expect_name()?;
            names.push(name.text.to_string());
            while self.peek_is("[") {
                self.skip_group()?;
            }
            if self.peek_is("=") {
                self.bump();
                loop {
                    match self.peek() {
                        None => return Err(self.error("`;`")),
                        Some(t) if t.is(",") || t.is(";") => break,
                        Some(t) if Self::is_open(t) => self.skip_group()?,
                        Some(t) if Self::is_close(t) || matches!(t.text, "endmodule" | "end") => return Err(self.error("`;`")),
                        _ => {
                            self.bump();
                        }
                    }
                }
            }
            match self.peek() {
                Some(t) if t.is(",") => {
                    self.bump();
                }
                Some(t) if t.is(";") => {
                    self.bump();
                    return Ok(names);
                }
                _ => return Err(self.error("`,` or `;`")),
            }
        }
    }

    fn parse_ansi_ports(&mut self, module: &mut ScannedModule) -> PResult<()> {
        self.expect("(")?;
        if self.peek_is(")") {
            self.bump();
            return Ok(());
        }
        let mut carried_type: Option<String> = None;
        let mut in_ansi = false;
        loop {
            // one port segment up to `,` or `)`
            while self.peek().is_some_and(|t| t.kind == TokKind::Directive) {
                self.skip_directive_args();
            }
            let has_dir = self.peek().is_some_and(|t| DIRECTIONS.contains(&t.text));
            if has_dir {
                self.bump();
                in_ansi = true;
            }
            let type_part = self.parse_type_part()?;
            if self.peek_is(".") {
                // `.name(expr)` explicit port expressions in non-ANSI headers
                self.bump();
                self.expect_name()?;
                self.skip_group_if("(")?;
            } else {
                let name = self.expect_name()?;
                while self.peek_is("[") {
                    self.skip_group()?;
                }
                if self.peek_is("=") {
                    self.bump();
                    while let Some(t) = self.peek() {
                        if t.is(",") || t.is(")") {
                            break;
                        }
                        if Self::is_open(t) {
                            self.skip_group()?;
                        } else {
                            self.bump();
                        }
                    }
                }
                let ty = if !type_part.is_empty() {
                    let only_dims = type_part[0].is("[");
                    let rendered = Self::render_type(&type_part);
                    Some(if only_dims { format!("wire {rendered}") } else { rendered })
                } else if has_dir {
                    Some("wire".to_string())
                } else {
                    carried_type.clone()
                };
                if in_ansi {
                    let ty = ty.unwrap_or_else(|| "wire".into());
                    module.decls.push(ScannedDecl { name: name.text.to_string(), decl_type: ty.clone(), implicit: false });
                    carried_type = Some(ty);
                }
            }
            match self.bump() {
                Some(t) if t.is(",") => continue,
                Some(t) if t.is(")") => return Ok(()),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("`,` or `)`"));
                }
            }
        }
    }

    fn add_decls(module: &mut ScannedModule, names: Vec<String>, decl_type: String, implicit: bool) {
        for name in names {
            match module.decls.iter_mut().find(|d| d.name == name) {
                Some(existing) => {
                    if existing.implicit && !implicit {
                        existing.decl_type = decl_type.clone();
                        existing.implicit = false;
                    }
                }
                None => module.decls.push(ScannedDecl { name, decl_type: decl_type.clone(), implicit }),
            }
        }
    }

    fn parse_instances(&mut self, module: &mut ScannedModule) -> PResult<()> {
        let child = self.bump().expect("caller peeked").text.to_string();
        if self.peek_is("#") {
            self.bump();
            if !self.skip_group_if("(")? {
                return Err(self.error("`(`"));
            }
        }
        loop {
            let inst = self.expect_name()?;
            while self.peek_is("[") {
                self.skip_group()?;
            }
            if !self.peek_is("(") {
                return Err(self.error("`(`"));
            }
            self.skip_group()?;
            module.instances.push(ScannedInstance { module: child.clone(), name: inst.text.to_string() });
            match self.bump() {
                Some(t) if t.is(",") => continue,
                Some(t) if t.is(";") => return Ok(()),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("`;`"));
                }
            }
        }
    }

    /// Distinguish `mod_t inst (...)` from `user_t name;` at a name token.
    fn looks_like_instance(&self) -> bool {
        let Some(next) = self.peek_at(1) else { return false };
        if next.is("#") {
            return true;
        }
        if !next.is_name() {
            return false;
        }
        let mut i = self.pos + 2;
        while self.toks.get(i).is_some_and(|t| t.is("[")) {
            let mut depth = 0;
            while let Some(t) = self.toks.get(i) {
                if t.is("[") {
                    depth += 1;
                } else if t.is("]") {
                    depth -= 1;
                    if depth == 0 {
                        i += 1;
                        break;
                    }
                }
                i += 1;
            }
        }
        self.toks.get(i).is_some_and(|t| t.is("("))
    }

    /// Parse items until one of `closers`, which is consumed.
    fn parse_items(&mut self, module: &mut ScannedModule, closers: &[&str]) -> PResult<()> {
        loop {
            let Some(t) = self.peek().copied() else {
                return Err(self.error(format!("`{}`", closers[0])));
            };
            if closers.contains(&t.text) {
                self.bump();
                return Ok(());
            }
            self.parse_item(module)?;
        }
    }

    fn parse_generate_block(&mut self, module: &mut ScannedModule) -> PResult<()> {
        if self.peek_is("begin") {
            self.bump();
            self.skip_label()?;
            self.parse_items(module, &["end"])?;
            self.skip_label()
        } else {
            self.parse_item(module)
        }
    }

    fn parse_item(&mut self, module: &mut ScannedModule) -> PResult<()> {
        let t = *self.peek().expect("caller checked");
        if t.kind == TokKind::Directive {
            self.skip_directive_args();
            return Ok(());
        }
        match t.text {
            ";" => {
                self.bump();
            }
            "input" | "output" | "inout" | "ref" => {
                self.bump();
                let type_part = self.parse_type_part()?;
                let (ty, implicit) = if type_part.is_empty() {
                    ("wire".to_string(), true)
                } else if type_part[0].is("[") {
                    (format!("wire {}", Self::render_type(&type_part)), true)
                } else {
                    (Self::render_type(&type_part), false)
                };
                let names = self.parse_declarators()?;
                Self::add_decls(module, names, ty, implicit);
            }
            s if DATA_TYPES.contains(&s) => {
                let type_part = self.parse_type_part()?;
                // net delays such as `wire #1 a;`
                if self.peek_is("#") {
                    self.bump();
                    if !self.skip_group_if("(")? {
                        self.bump();
                    }
                }
                let names = self.parse_declarators()?;
                Self::add_decls(module, names, Self::render_type(&type_part), false);
            }
            "parameter" | "localparam" => {
                self.bump();
                let from = self.pos;
                self.skip_to_semi()?;
                // the parameter name is the identifier right before the first `=`
                let slice = &self.toks[from..self.pos];
                for (i, tok) in slice.iter().enumerate() {
                    if tok.is("=") && i > 0 && slice[i - 1].is_name() {
                        module.params.push(slice[i - 1].text.to_string());
                    }
                }
            }
            "assign" | "defparam" | "genvar" | "import" | "typedef" | "alias" | "bind" => {
                self.bump();
                self.skip_to_semi()?;
            }
            "always" | "always_ff" | "always_comb" | "always_latch" | "initial" | "final" => {
                self.bump();
                self.skip_statement()?;
            }
            "assert" | "assume" | "cover" => self.skip_statement()?,
            "function" => {
                self.bump();
                self.skip_until_keyword("endfunction")?;
            }
            "task" => {
                self.bump();
                self.skip_until_keyword("endtask")?;
            }
            "specify" => {
                self.bump();
                self.skip_until_keyword("endspecify")?;
            }
            "generate" => {
                self.bump();
                self.parse_items(module, &["endgenerate"])?;
            }
            "for" => {
                self.bump();
                if !self.peek_is("(") {
                    return Err(self.error("`(`"));
                }
                self.skip_group()?;
                self.parse_generate_block(module)?;
            }
            "if" => {
                self.bump();
                if !self.peek_is("(") {
                    return Err(self.error("`(`"));
                }
                self.skip_group()?;
                self.parse_generate_block(module)?;
                if self.peek_is("else") {
                    self.bump();
                    if self.peek_is("if") {
                        self.parse_item(module)?;
                    } else {
                        self.parse_generate_block(module)?;
                    }
                }
            }
            "begin" => self.parse_generate_block(module)?,
            p if PRIMITIVES.contains(&p) => {
                self.bump();
                self.skip_to_semi()?;
            }
            _ if t.is_name() => {
                if self.looks_like_instance() {
                    self.parse_instances(module)?;
                } else {
                    let type_part = self.parse_type_part()?;
                    if type_part.is_empty() {
                        return Err(self.error("module item"));
                    }
                    let names = self.parse_declarators()?;
                    Self::add_decls(module, names, Self::render_type(&type_part), false);
                }
            }
            _ => return Err(self.error("module item")),
        }
        Ok(())
    }

    fn parse_module(&mut self) -> PResult<ScannedModule> {
        let kw = self.bump().expect("caller peeked");
        if self.peek_is("automatic") || self.peek_is("static") {
            self.bump();
        }
        let name = self.expect_name()?;
        let mut module = ScannedModule {
            name: name.text.to_string(),
            start: kw.start,
            end: kw.end(),
            decls: Vec::new(),
            instances: Vec::new(),
            params: Vec::new(),
        };
        while self.peek_is("import") {
            self.bump();
            self.skip_to_semi()?;
        }
        if self.peek_is("#") {
            self.bump();
            if !self.peek_is("(") {
                return Err(self.error("`(`"));
            }
            let from = self.pos;
            self.skip_group()?;
            let slice = &self.toks[from..self.pos];
            for (i, tok) in slice.iter().enumerate() {
                if tok.is("=") && i > 0 && slice[i - 1].is_name() {
                    module.params.push(slice[i - 1].text.to_string());
                }
            }
        }
        if self.peek_is("(") {
            self.parse_ansi_ports(&mut module)?;
        }
        self.expect(";")?;
        loop {
            match self.peek() {
                None => return Err(self.error("`endmodule`")),
                Some(t) if t.is("endmodule") => {
                    let end = self.bump().expect("peeked");
                    module.end = end.end();
                    if self.peek_is(":") {
                        self.bump();
                        module.end = self.expect_name()?.end();
                    }
                    return Ok(module);
                }
                Some(t) if t.is("module") => return Err(self.error("`endmodule`")),
                Some(_) => self.parse_item(&mut module)?,
            }
        }
    }

    fn parse_file(&mut self) -> PResult<Vec<ScannedModule>> {
        let mut out = Vec::new();
        while let Some(t) = self.peek().copied() {
            match t.text {
                "module" | "macromodule" => out.push(self.parse_module()?),
                "interface" => {
                    self.bump();
                    self.skip_until_keyword("endinterface")?;
                }
                "package" => {
                    self.bump();
                    self.skip_until_keyword("endpackage")?;
                }
                "program" => {
                    self.bump();
                    self.skip_until_keyword("endprogram")?;
                }
                "primitive" => {
                    self.bump();
                    self.skip_until_keyword("endprimitive")?;
                }
                "class" => {
                    self.bump();
                    self.skip_until_keyword("endclass")?;
                }
                "import" | "typedef" | "parameter" | "localparam" | "timeunit" | "timeprecision" => {
                    self.bump();
                    self.skip_to_semi()?;
                }
                ";" => {
                    self.bump();
                }
                _ if t.kind == TokKind::Directive => self.skip_directive_args(),
                _ => return Err(self.error("`module`")),
            }
        }
        Ok(out)
    }
}

/// Scan one source text. `file` is used only for error reporting.
pub fn scan_text(file: &str, src: &str) -> Result<Vec<ScannedModule>, RtlError> {
    let toks = lex(src).map_err(|e| RtlError::Parse { file: file.to_string(), line: e.line, expected: e.msg })?;
    let mut p = Parser { file, toks: &toks, pos: 0 };
    p.parse_file()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(src: &str) -> ScannedModule {
        let mut v = scan_text("t.sv", src).unwrap();
        assert_eq!(v.len(), 1);
        v.remove(0)
    }

    fn decl_pairs(m: &ScannedModule) -> Vec<(&str, &str)> {
        m.decls.iter().map(|d| (d.name.as_str(), d.decl_type.as_str())).collect()
    }

    #[test]
    fn ansi_ports_carry_types() {
        let m = one("module m(input logic [3:0] a, b, output reg q, input c); endmodule");
        assert_eq!(decl_pairs(&m), vec![("a", "logic [3:0]"), ("b", "logic [3:0]"), ("q", "reg"), ("c", "wire")]);
    }

    #[test]
    fn non_ansi_ports_refined_by_later_decl() {
        let m = one("module m(a, q);\n input [7:0] a;\n output q;\n reg q;\nendmodule");
        assert_eq!(decl_pairs(&m), vec![("a", "wire [7:0]"), ("q", "reg")]);
    }

    #[test]
    fn packed_dims_normalized() {
        let m = one("module m; logic [ 7 : 0 ] x; logic signed [3:0][1:0] y, z = 4'd0; endmodule");
        assert_eq!(decl_pairs(&m), vec![("x", "logic [7:0]"), ("y", "logic signed [3:0][1:0]"), ("z", "logic signed [3:0][1:0]")]);
    }

    #[test]
    fn procedural_bodies_are_opaque() {
        let src = "module m(input clk);
            logic q;
            always_ff @(posedge clk) begin
              if (q) q <= 1'b0; else begin q <= 1'b1; end
              case (q) 1'b0: q <= 1; default: ; endcase
            end
            always @* begin : blk for (int i = 0; i < 4; i++) q = ~q; end
            initial $display(\"hi\");
            assign q = clk;
          endmodule";
        let m = one(src);
        assert_eq!(decl_pairs(&m), vec![("clk", "wire"), ("q", "logic")]);
    }

    #[test]
    fn instances_and_params() {
        let src = "module m #(parameter W = 8) (input wire a);
            localparam D = W * 2;
            m2 #(.W(W)) u1 (.x(a)), u2 (.x(a));
            m3 u_arr [3:0] (.x(a));
            state_t st;
          endmodule";
        let m = one(src);
        assert_eq!(m.params, vec!["W", "D"]);
        let inst: Vec<_> = m.instances.iter().map(|i| (i.module.as_str(), i.name.as_str())).collect();
        assert_eq!(inst, vec![("m2", "u1"), ("m2", "u2"), ("m3", "u_arr")]);
        assert!(decl_pairs(&m).contains(&("st", "state_t")));
    }

    #[test]
    fn generate_blocks_record_base_names() {
        let src = "module m(input clk);
            genvar i;
            generate for (i = 0; i < 2; i++) begin : g
              logic [1:0] lane;
              sub u_sub (.clk(clk));
            end endgenerate
            if (1) begin : g2 sub u_other (.clk(clk)); end
          endmodule";
        let m = one(src);
        assert!(decl_pairs(&m).contains(&("lane", "logic [1:0]")));
        assert_eq!(m.instances.len(), 2);
        assert_eq!(m.instances[0].name, "u_sub");
    }

    #[test]
    fn escaped_identifiers() {
        let m = one("module m; wire \\odd.name ; endmodule");
        assert_eq!(m.decls[0].name, "\\odd.name");
    }

    #[test]
    fn errors_carry_line() {
        let err = scan_text("bad.sv", "module m;\n wire a\n endmodule").unwrap_err();
        match err {
            RtlError::Parse { file, line, .. } => {
                assert_eq!(file, "bad.sv");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
        assert!(scan_text("bad.sv", "module m; always_ff @(posedge clk) begin q <= 1; endmodule").is_err());
        assert!(scan_text("bad.sv", "module m; assign a = (b; endmodule").is_err());
    }

    #[test]
    fn spans_cover_module() {
        let src = "// lead\nmodule m; endmodule : m\nmodule n; endmodule";
        let v = scan_text("t.sv", src).unwrap();
        assert_eq!(&src[v[0].start..v[0].end], "module m; endmodule : m");
        assert_eq!(&src[v[1].start..v[1].end], "module n; endmodule");
    }
}
