// SPDX-License-Identifier: Apache-2.0

//! IEEE-1364 Value Change Dump reading and writing.
//!
//! [`parse_header`] consumes the declaration section and returns the design
//! hierarchy together with a [`Body`] positioned at the first change record.
//! The body is consumed as a stream, one token at a time, so memory use does
//! not depend on the length of the dump.

mod parse;
mod write;

pub use parse::{parse_header, Body, BodyEvent, BodyEvents, ChangeStream, IdFilter};
pub use write::{write_vcd, VcdWriter};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VcdError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header at line {line}: {msg}")]
    MalformedHeader { line: u64, msg: String },
    #[error("duplicate full signal name `{0}`")]
    DuplicateFullName(String),
    #[error("malformed change at line {line}: {msg}")]
    MalformedChange { line: u64, msg: String },
    #[error("time regression at line {line}: #{found} after #{previous}")]
    TimeRegression { line: u64, previous: u64, found: u64 },
    #[error("timestamp overflow at line {line}")]
    TimestampOverflow { line: u64 },
    #[error("identifier `{0}` is not declared in the header")]
    UndeclaredId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeUnit {
    S,
    Ms,
    Us,
    Ns,
    Ps,
    Fs,
}

impl TimeUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
            TimeUnit::Us => "us",
            TimeUnit::Ns => "ns",
            TimeUnit::Ps => "ps",
            TimeUnit::Fs => "fs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "s" => TimeUnit::S,
            "ms" => TimeUnit::Ms,
            "us" => TimeUnit::Us,
            "ns" => TimeUnit::Ns,
            "ps" => TimeUnit::Ps,
            "fs" => TimeUnit::Fs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Timescale {
    pub magnitude: u32,
    pub unit: TimeUnit,
}

impl Timescale {
    pub fn new(magnitude: u32, unit: TimeUnit) -> Option<Self> {
        matches!(magnitude, 1 | 10 | 100).then_some(Timescale { magnitude, unit })
    }
}

impl Default for Timescale {
    fn default() -> Self {
        Timescale { magnitude: 1, unit: TimeUnit::Ns }
    }
}

impl fmt::Display for Timescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.magnitude, self.unit.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Wire,
    Reg,
    Logic,
    Integer,
    /// Carried through but flagged: values are floats, not bits.
    Real,
    Other(String),
}

impl VarKind {
    pub fn parse(s: &str) -> Self {
        match s {
            "wire" => VarKind::Wire,
            "reg" => VarKind::Reg,
            "logic" => VarKind::Logic,
            "integer" => VarKind::Integer,
            "real" => VarKind::Real,
            other => VarKind::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            VarKind::Wire => "wire",
            VarKind::Reg => "reg",
            VarKind::Logic => "logic",
            VarKind::Integer => "integer",
            VarKind::Real => "real",
            VarKind::Other(s) => s,
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, VarKind::Real)
    }
}

/// One `$var` declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalDecl {
    pub id_code: String,
    pub name: String,
    pub width: u32,
    pub kind: VarKind,
    pub scope_path: Vec<String>,
}

impl SignalDecl {
    /// Scope path and leaf name joined with `.`.
    pub fn full_name(&self) -> String {
        let mut s = self.scope_path.join(".");
        s.push('.');
        s.push_str(&self.name);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScopeItem {
    Var(SignalDecl),
    Scope(Scope),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    pub kind: String,
    pub name: String,
    pub items: Vec<ScopeItem>,
}

impl Scope {
    pub fn new(kind: impl Into<String>, name: impl Into<String>) -> Self {
        Scope { kind: kind.into(), name: name.into(), items: Vec::new() }
    }
}

/// The declaration section of a dump.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeTree {
    pub timescale: Timescale,
    pub roots: Vec<Scope>,
}

impl ScopeTree {
    /// Depth-first visit of every declaration in file order.
    pub fn for_each_var<'a>(&'a self, mut f: impl FnMut(&'a SignalDecl)) {
        fn walk<'a>(scope: &'a Scope, f: &mut impl FnMut(&'a SignalDecl)) {
            for item in &scope.items {
                match item {
                    ScopeItem::Var(v) => f(v),
                    ScopeItem::Scope(s) => walk(s, f),
                }
            }
        }
        for root in &self.roots {
            walk(root, &mut f);
        }
    }

    pub fn vars(&self) -> Vec<&SignalDecl> {
        let mut out = Vec::new();
        self.for_each_var(|v| out.push(v));
        out
    }
}

/// `(full_name, id_code, width)` for every declaration, depth-first in
/// declaration order. Aliased ids appear once per name.
pub fn list_full_names(tree: &ScopeTree) -> Vec<(String, String, u32)> {
    let mut out = Vec::new();
    tree.for_each_var(|v| out.push((v.full_name(), v.id_code.clone(), v.width)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
    X,
    Z,
}

impl Bit {
    pub fn from_byte(b: u8) -> Option<Bit> {
        Some(match b {
            b'0' => Bit::Zero,
            b'1' => Bit::One,
            b'x' | b'X' => Bit::X,
            b'z' | b'Z' => Bit::Z,
            _ => return None,
        })
    }

    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
            Bit::X => 'x',
            Bit::Z => 'z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Scalar(Bit),
    /// Most significant bit first.
    Vector(Vec<Bit>),
    Real(f64),
}

impl Value {
    /// Build an all-defined vector of `width` bits holding `v`.
    pub fn from_u64(v: u64, width: u32) -> Value {
        let bits = (0..width)
            .rev()
            .map(|i| if i < 64 && (v >> i) & 1 == 1 { Bit::One } else { Bit::Zero })
            .collect();
        Value::Vector(bits)
    }
}

/// Left-extend a vector shorter than its declared width: `1` extends with
/// `0`, anything else replicates the leftmost bit.
pub fn extend_bits(bits: &mut Vec<Bit>, width: usize) {
    if bits.len() >= width {
        return;
    }
    let fill = match bits.first() {
        None | Some(Bit::One) => Bit::Zero,
        Some(b) => *b,
    };
    let pad = width - bits.len();
    bits.splice(0..0, std::iter::repeat_n(fill, pad));
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueChange {
    pub time: u64,
    pub id_code: String,
    pub value: Value,
}

/// The `index`-th identifier code in the printable range `!`..`~`.
pub fn id_code_for(mut index: usize) -> String {
    const BASE: usize = 94;
    let mut out = Vec::new();
    loop {
        out.push((b'!' + (index % BASE) as u8) as char);
        index /= BASE;
        if index == 0 {
            break;
        }
        index -= 1;
    }
    out.into_iter().collect()
}
