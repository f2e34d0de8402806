// SPDX-License-Identifier: Apache-2.0

use super::{extend_bits, Bit, Scope, ScopeItem, ScopeTree, SignalDecl, TimeUnit, Timescale, Value, ValueChange, VarKind, VcdError};
use std::collections::{HashMap, HashSet};
use std::io::BufRead;

/// Tokens longer than this are rejected instead of buffered.
const MAX_TOKEN: usize = 16 << 20;

struct Tokens<R> {
    reader: R,
    buf: Vec<u8>,
    line: u64,
}

impl<R: BufRead> Tokens<R> {
    fn new(reader: R) -> Self {
        Tokens { reader, buf: Vec::with_capacity(64), line: 1 }
    }

    /// Read the next whitespace-delimited token into `self.buf`.
    /// Returns `Ok(false)` at end of input.
    fn advance(&mut self) -> Result<bool, VcdError> {
        self.buf.clear();
        loop {
            let avail = self.reader.fill_buf()?;
            if avail.is_empty() {
                return Ok(false);
            }
            let mut i = 0;
            while i < avail.len() && avail[i].is_ascii_whitespace() {
                if avail[i] == b'\n' {
                    self.line += 1;
                }
                i += 1;
            }
            let found = i < avail.len();
            self.reader.consume(i);
            if found {
                break;
            }
        }
        loop {
            let avail = self.reader.fill_buf()?;
            if avail.is_empty() {
                break;
            }
            let end = avail.iter().position(|b| b.is_ascii_whitespace()).unwrap_or(avail.len());
            if self.buf.len() + end > MAX_TOKEN {
                let line = self.line;
                self.reader.consume(end);
                return Err(VcdError::MalformedChange { line, msg: "token too long".into() });
            }
            self.buf.extend_from_slice(&avail[..end]);
            let hit = end < avail.len();
            self.reader.consume(end);
            if hit {
                break;
            }
        }
        Ok(true)
    }

    fn text(&self) -> String {
        String::from_utf8_lossy(&self.buf).into_owned()
    }

    /// Collect tokens up to (not including) `$end`.
    fn until_end(&mut self, directive: &str) -> Result<Vec<String>, VcdError> {
        let mut out = Vec::new();
        loop {
            if !self.advance()? {
                return Err(VcdError::MalformedHeader {
                    line: self.line,
                    msg: format!("unterminated {directive}"),
                });
            }
            if self.buf == b"$end" {
                return Ok(out);
            }
            out.push(self.text());
        }
    }
}

fn header_err(line: u64, msg: impl Into<String>) -> VcdError {
    VcdError::MalformedHeader { line, msg: msg.into() }
}

fn parse_timescale(parts: &[String], line: u64) -> Result<Timescale, VcdError> {
    let joined: String = parts.concat();
    let split = joined.find(|c: char| !c.is_ascii_digit()).unwrap_or(joined.len());
    let (num, unit) = joined.split_at(split);
    let magnitude: u32 = num.parse().map_err(|_| header_err(line, format!("bad timescale `{joined}`")))?;
    let unit = TimeUnit::parse(unit).ok_or_else(|| header_err(line, format!("bad timescale unit `{unit}`")))?;
    Timescale::new(magnitude, unit).ok_or_else(|| header_err(line, format!("bad timescale magnitude {magnitude}")))
}

/// Parse the declaration section. The returned [`Body`] continues from the
/// first token after `$enddefinitions $end`.
pub fn parse_header<R: BufRead>(reader: R) -> Result<(ScopeTree, Body<R>), VcdError> {
    let mut tokens = Tokens::new(reader);
    let mut tree = ScopeTree::default();
    let mut stack: Vec<Scope> = Vec::new();
    let mut seen_names: HashSet<String> = HashSet::new();
    let mut widths: HashMap<String, u32> = HashMap::new();
    let mut reals: HashSet<String> = HashSet::new();

    loop {
        if !tokens.advance()? {
            return Err(header_err(tokens.line, "missing $enddefinitions"));
        }
        let line = tokens.line;
        match tokens.buf.as_slice() {
            b"$timescale" => {
                let parts = tokens.until_end("$timescale")?;
                tree.timescale = parse_timescale(&parts, line)?;
            }
            b"$scope" => {
                let parts = tokens.until_end("$scope")?;
                let [kind, name] = parts.as_slice() else {
                    return Err(header_err(line, "$scope needs a kind and a name"));
                };
                stack.push(Scope::new(kind.clone(), name.clone()));
            }
            b"$upscope" => {
                let parts = tokens.until_end("$upscope")?;
                if !parts.is_empty() {
                    return Err(header_err(line, "unexpected tokens in $upscope"));
                }
                let done = stack.pop().ok_or_else(|| header_err(line, "$upscope without open scope"))?;
                match stack.last_mut() {
                    Some(parent) => parent.items.push(ScopeItem::Scope(done)),
                    None => tree.roots.push(done),
                }
            }
            b"$var" => {
                let parts = tokens.until_end("$var")?;
                if parts.len() < 4 {
                    return Err(header_err(line, "$var needs kind, width, id and name"));
                }
                let kind = VarKind::parse(&parts[0]);
                let width: u32 = parts[1]
                    .parse()
                    .ok()
                    .filter(|w| *w >= 1)
                    .ok_or_else(|| header_err(line, format!("bad $var width `{}`", parts[1])))?;
                let id_code = parts[2].clone();
                let mut name = parts[3].clone();
                let index: String = parts[4..].concat();
                // Bit-blasted dumps declare `data [3]`; keep the bit in the name so
                // each leaf stays unique. Full ranges like `[7:0]` are dropped.
                if !index.is_empty() && !index.contains(':') {
                    name.push_str(&index);
                }
                if stack.is_empty() {
                    return Err(header_err(line, format!("$var `{name}` outside any scope")));
                }
                let scope_path = stack.iter().map(|s| s.name.clone()).collect();
                let decl = SignalDecl { id_code: id_code.clone(), name, width, kind, scope_path };
                let full = decl.full_name();
                if !seen_names.insert(full.clone()) {
                    return Err(VcdError::DuplicateFullName(full));
                }
                let w = widths.entry(id_code.clone()).or_insert(width);
                *w = (*w).max(width);
                if decl.kind.is_real() {
                    reals.insert(id_code);
                }
                stack.last_mut().expect("non-empty").items.push(ScopeItem::Var(decl));
            }
            b"$enddefinitions" => {
                tokens.until_end("$enddefinitions")?;
                while let Some(done) = stack.pop() {
                    match stack.last_mut() {
                        Some(parent) => parent.items.push(ScopeItem::Scope(done)),
                        None => tree.roots.push(done),
                    }
                }
                let body = Body { tokens, widths, reals, time: 0, seen_time: false };
                return Ok((tree, body));
            }
            [b'$', ..] => {
                let d = tokens.text();
                tokens.until_end(&d)?;
            }
            _ => return Err(header_err(line, format!("unexpected token `{}`", tokens.text()))),
        }
    }
}

/// Set of identifier codes to keep. An empty filter keeps everything.
#[derive(Debug, Clone, Default)]
pub struct IdFilter(HashSet<String>);

impl IdFilter {
    pub fn all() -> Self {
        IdFilter(HashSet::new())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.is_empty() || self.0.contains(id)
    }
}

impl<S: Into<String>> FromIterator<S> for IdFilter {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        IdFilter(iter.into_iter().map(Into::into).collect())
    }
}

/// The value-change section of a dump, positioned after the header.
pub struct Body<R> {
    tokens: Tokens<R>,
    widths: HashMap<String, u32>,
    reals: HashSet<String>,
    time: u64,
    seen_time: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyEvent {
    Timestamp(u64),
    Change(ValueChange),
}

impl<R: BufRead> Body<R> {
    pub fn events(self, filter: IdFilter) -> BodyEvents<R> {
        BodyEvents { body: self, filter }
    }

    /// Only the kept value changes, in file order.
    pub fn changes(self, filter: IdFilter) -> ChangeStream<R> {
        ChangeStream { events: self.events(filter) }
    }

    fn change_err(&self, msg: impl Into<String>) -> VcdError {
        VcdError::MalformedChange { line: self.tokens.line, msg: msg.into() }
    }

    fn id_from_bytes(&self, bytes: &[u8]) -> Result<String, VcdError> {
        if bytes.is_empty() {
            return Err(self.change_err("missing identifier"));
        }
        std::str::from_utf8(bytes).map(str::to_owned).map_err(|_| self.change_err("identifier is not utf-8"))
    }

    fn parse_time(&self) -> Result<u64, VcdError> {
        let digits = &self.tokens.buf[1..];
        if digits.is_empty() {
            return Err(self.change_err("empty timestamp"));
        }
        let mut t: u64 = 0;
        for &d in digits {
            if !d.is_ascii_digit() {
                return Err(self.change_err("bad timestamp"));
            }
            t = t
                .checked_mul(10)
                .and_then(|t| t.checked_add((d - b'0') as u64))
                .ok_or(VcdError::TimestampOverflow { line: self.tokens.line })?;
        }
        Ok(t)
    }

    fn next_event(&mut self, filter: &IdFilter) -> Option<Result<BodyEvent, VcdError>> {
        loop {
            match self.tokens.advance() {
                Ok(true) => {}
                Ok(false) => return None,
                Err(e) => return Some(Err(e)),
            }
            let first = self.tokens.buf[0];
            match first {
                b'#' => {
                    let t = match self.parse_time() {
                        Ok(t) => t,
                        Err(e) => return Some(Err(e)),
                    };
                    if self.seen_time && t < self.time {
                        return Some(Err(VcdError::TimeRegression {
                            line: self.tokens.line,
                            previous: self.time,
                            found: t,
                        }));
                    }
                    self.time = t;
                    self.seen_time = true;
                    return Some(Ok(BodyEvent::Timestamp(t)));
                }
                b'$' => match self.tokens.buf.as_slice() {
                    b"$dumpvars" | b"$dumpall" | b"$dumpon" | b"$dumpoff" | b"$end" => continue,
                    _ => {
                        // $comment and friends: skip to $end
                        loop {
                            match self.tokens.advance() {
                                Ok(true) if self.tokens.buf == b"$end" => break,
                                Ok(true) => {}
                                Ok(false) => return Some(Err(self.change_err("unterminated directive in body"))),
                                Err(e) => return Some(Err(e)),
                            }
                        }
                    }
                },
                b'0' | b'1' | b'x' | b'X' | b'z' | b'Z' => {
                    let bit = Bit::from_byte(first).expect("matched above");
                    let id = match self.id_from_bytes(&self.tokens.buf[1..]) {
                        Ok(id) => id,
                        Err(e) => return Some(Err(e)),
                    };
                    if !filter.contains(&id) {
                        continue;
                    }
                    if !self.widths.contains_key(&id) {
                        return Some(Err(VcdError::UndeclaredId(id)));
                    }
                    return Some(Ok(BodyEvent::Change(ValueChange { time: self.time, id_code: id, value: Value::Scalar(bit) })));
                }
                b'b' | b'B' => {
                    let mut bits = Vec::with_capacity(self.tokens.buf.len() - 1);
                    let mut bad = None;
                    for &c in &self.tokens.buf[1..] {
                        match Bit::from_byte(c) {
                            Some(b) => bits.push(b),
                            None => {
                                bad = Some(c);
                                break;
                            }
                        }
                    }
                    // the identifier token is consumed even when the value is bad
                    match self.tokens.advance() {
                        Ok(true) => {}
                        Ok(false) => return Some(Err(self.change_err("missing identifier"))),
                        Err(e) => return Some(Err(e)),
                    }
                    if let Some(c) = bad {
                        return Some(Err(self.change_err(format!("bad value char `{}`", c as char))));
                    }
                    if bits.is_empty() {
                        return Some(Err(self.change_err("empty vector value")));
                    }
                    let id = match self.id_from_bytes(&self.tokens.buf) {
                        Ok(id) => id,
                        Err(e) => return Some(Err(e)),
                    };
                    if !filter.contains(&id) {
                        continue;
                    }
                    let Some(&width) = self.widths.get(&id) else {
                        return Some(Err(VcdError::UndeclaredId(id)));
                    };
                    if bits.len() > width as usize {
                        return Some(Err(self.change_err(format!("vector of {} bits for {width}-bit `{id}`", bits.len()))));
                    }
                    extend_bits(&mut bits, width as usize);
                    return Some(Ok(BodyEvent::Change(ValueChange { time: self.time, id_code: id, value: Value::Vector(bits) })));
                }
                b'r' | b'R' => {
                    let parsed = std::str::from_utf8(&self.tokens.buf[1..]).ok().and_then(|s| s.parse::<f64>().ok());
                    match self.tokens.advance() {
                        Ok(true) => {}
                        Ok(false) => return Some(Err(self.change_err("missing identifier"))),
                        Err(e) => return Some(Err(e)),
                    }
                    let Some(v) = parsed else {
                        return Some(Err(self.change_err("bad real value")));
                    };
                    let id = match self.id_from_bytes(&self.tokens.buf) {
                        Ok(id) => id,
                        Err(e) => return Some(Err(e)),
                    };
                    if !filter.contains(&id) {
                        continue;
                    }
                    if !self.widths.contains_key(&id) {
                        return Some(Err(VcdError::UndeclaredId(id)));
                    }
                    return Some(Ok(BodyEvent::Change(ValueChange { time: self.time, id_code: id, value: Value::Real(v) })));
                }
                b's' | b'S' => {
                    // string values carry no numeric content; skip the id too
                    match self.tokens.advance() {
                        Ok(true) => continue,
                        Ok(false) => return Some(Err(self.change_err("missing identifier"))),
                        Err(e) => return Some(Err(e)),
                    }
                }
                c => return Some(Err(self.change_err(format!("bad value char `{}`", c as char)))),
            }
        }
    }

    pub fn is_real(&self, id: &str) -> bool {
        self.reals.contains(id)
    }
}

/// Timestamps and kept changes. Errors are yielded in place and the stream
/// continues with the next token.
pub struct BodyEvents<R> {
    body: Body<R>,
    filter: IdFilter,
}

impl<R: BufRead> Iterator for BodyEvents<R> {
    type Item = Result<BodyEvent, VcdError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.body.next_event(&self.filter)
    }
}

pub struct ChangeStream<R> {
    events: BodyEvents<R>,
}

impl<R: BufRead> Iterator for ChangeStream<R> {
    type Item = Result<ValueChange, VcdError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.events.next()? {
                Ok(BodyEvent::Timestamp(_)) => continue,
                Ok(BodyEvent::Change(c)) => return Some(Ok(c)),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}
