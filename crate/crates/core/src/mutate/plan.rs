// SPDX-License-Identifier: Apache-2.0

//! Eligible-site discovery and replacement construction for each bug type.

use super::MutateError;
use crate::rtl::lex::{lex, TokKind, Token};
use crate::rtl::{scan_text, ModuleLookupTable};
use crate::seed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BugType {
    /// An assignment statement is commented out.
    MissingAssignment,
    /// The right-hand side of an assignment becomes a constant or another
    /// same-width variable.
    WrongAssignment,
    /// One bitwise operator is swapped, or a negation dropped.
    BitwiseCorruption,
    /// A branch or loop condition is negated, or a clock edge flipped.
    LogicBug,
    /// A declared vector range gains or loses one bit.
    DataSize,
}

impl BugType {
    pub const ALL: [BugType; 5] =
        [BugType::MissingAssignment, BugType::WrongAssignment, BugType::BitwiseCorruption, BugType::LogicBug, BugType::DataSize];

    pub fn as_str(self) -> &'static str {
        match self {
            BugType::MissingAssignment => "missing_assignment",
            BugType::WrongAssignment => "wrong_assignment",
            BugType::BitwiseCorruption => "bitwise_corruption",
            BugType::LogicBug => "logic_bug",
            BugType::DataSize => "data_size",
        }
    }

    fn index(self) -> u64 {
        BugType::ALL.iter().position(|b| *b == self).expect("listed") as u64
    }
}

impl fmt::Display for BugType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BugType {
    type Err = MutateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BugType::ALL.into_iter().find(|b| b.as_str() == s).ok_or_else(|| MutateError::UnknownBugType(s.to_string()))
    }
}

/// A byte span of the source and the text it held when planned.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub start: usize,
    pub end: usize,
    pub original: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutationSpec {
    pub bug_type: BugType,
    pub target_module: String,
    /// Relative to the design root.
    pub file: PathBuf,
    pub site: Site,
    pub replacement: String,
    pub seed: u64,
    /// SHA-256 of the file this mutation was planned against.
    pub source_hash: String,
}

impl MutationSpec {
    pub fn key(&self) -> SiteKey {
        SiteKey {
            file: self.file.clone(),
            module: self.target_module.clone(),
            start: self.site.start,
            end: self.site.end,
            bug_type: self.bug_type,
        }
    }
}

/// Identity of a mutation site for failure bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteKey {
    pub file: PathBuf,
    pub module: String,
    pub start: usize,
    pub end: usize,
    pub bug_type: BugType,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One assignment statement inside a module body.
#[derive(Debug, Clone)]
pub(crate) struct Assignment {
    /// From the first token (`assign` or the target) through `;`.
    pub stmt: (usize, usize),
    pub lhs_base: String,
    pub lhs_has_select: bool,
    pub rhs: (usize, usize),
    /// Token index range of the right-hand side.
    pub rhs_toks: (usize, usize),
}

const DECL_WORDS: &[&str] = &[
    "wire", "reg", "logic", "bit", "integer", "input", "output", "inout", "signed", "unsigned", "tri", "wand", "wor", "uwire", "var",
];

const STMT_BOUNDARY: &[&str] = &[";", "begin", "end", "else", ")", "assign", ":", "endcase", "default"];

fn module_tokens<'a>(source: &'a str, module: &str) -> Result<(Vec<Token<'a>>, usize, usize), MutateError> {
    let scanned = scan_text("<plan>", source).map_err(MutateError::Rtl)?;
    let m = scanned.into_iter().find(|m| m.name == module).ok_or_else(|| MutateError::UnknownModule(module.to_string()))?;
    let toks = lex(source).map_err(|e| MutateError::Rtl(crate::rtl::RtlError::Parse { file: "<plan>".into(), line: e.line, expected: e.msg }))?;
    let toks: Vec<Token> = toks.into_iter().filter(|t| t.start >= m.start && t.end() <= m.end).collect();
    Ok((toks, m.start, m.end))
}

fn closing(toks: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate().skip(open) {
        match t.text {
            "(" | "[" | "{" | "'{" => depth += 1,
            ")" | "]" | "}" => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Assignments at statement level: continuous `assign` and procedural
/// `=`/`<=` whose target is a plain or selected identifier.
pub(crate) fn find_assignments(toks: &[Token]) -> Vec<Assignment> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut in_rhs = false;
    for i in 0..toks.len() {
        let t = &toks[i];
        match t.text {
            "(" | "[" | "{" | "'{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            ";" => in_rhs = false,
            _ => {}
        }
        if depth != 0 || in_rhs || !(t.is("=") || t.is("<=")) {
            continue;
        }
        // walk back over `[..]` selects to the target identifier
        let mut j = i;
        let mut has_select = false;
        while j > 0 && toks[j - 1].is("]") {
            let mut d = 0;
            let mut k = j - 1;
            loop {
                match toks[k].text {
                    "]" => d += 1,
                    "[" => {
                        d -= 1;
                        if d == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                if k == 0 {
                    break;
                }
                k -= 1;
            }
            j = k;
            has_select = true;
        }
        if j == 0 || !toks[j - 1].is_name() {
            continue;
        }
        let lhs_i = j - 1;
        let Some(prev) = lhs_i.checked_sub(1).map(|p| &toks[p]) else { continue };
        if !STMT_BOUNDARY.contains(&prev.text) {
            continue;
        }
        if prev.is(")") && !closes_control(toks, lhs_i - 1) {
            continue;
        }
        let Some(semi) = (i + 1..toks.len()).find(|&k| toks[k].is(";")) else { continue };
        if semi == i + 1 {
            continue;
        }
        let stmt_start = if prev.is("assign") { lhs_i - 1 } else { lhs_i };
        out.push(Assignment {
            stmt: (toks[stmt_start].start, toks[semi].end()),

            lhs_base: toks[lhs_i].text.to_string(),
            lhs_has_select: has_select,
            rhs: (toks[i + 1].start, toks[semi - 1].end()),
            rhs_toks: (i + 1, semi),
        });
        in_rhs = true;
    }
    out
}

/// Whether the `)` at `close` ends an `if`/`while`/`for`/`@`/`#`/`case` head.
fn closes_control(toks: &[Token], close: usize) -> bool {
    let mut d = 0i32;
    let mut k = close;
    loop {
        match toks[k].text {
            ")" => d += 1,
            "(" => {
                d -= 1;
                if d == 0 {
                    return k > 0 && matches!(toks[k - 1].text, "if" | "while" | "for" | "@" | "#" | "repeat" | "foreach");
                }
            }
            _ => {}
        }
        if k == 0 {
            return false;
        }
        k -= 1;
    }
}

/// Bit width from a declared type such as `logic [7:0]` or `wire`.
pub(crate) fn type_width(decl_type: &str) -> Option<u32> {
    let mut width: u64 = 1;
    let mut rest = decl_type;
    while let Some(open) = rest.find('[') {
        let close = rest[open..].find(']')? + open;
        let (msb, lsb) = rest[open + 1..close].split_once(':')?;
        let (msb, lsb): (i64, i64) = (msb.trim().parse().ok()?, lsb.trim().parse().ok()?);
        width = width.checked_mul(msb.abs_diff(lsb) + 1)?;
        rest = &rest[close + 1..];
    }
    u32::try_from(width).ok()
}

fn comment_out(original: &str, rest_of_line_empty: bool) -> String {
    if rest_of_line_empty {
        format!("// {}", original.replace('\n', "\n// "))
    } else {
        format!("/* {original} */")
    }
}

struct Candidate {
    site: (usize, usize),
    build: Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> Option<String>>,
}

fn candidates(source: &str, table: &ModuleLookupTable, module: &str, bug: BugType) -> Result<Vec<Candidate>, MutateError> {
    let (toks, _, _) = module_tokens(source, module)?;
    let mut out: Vec<Candidate> = Vec::new();
    match bug {
        BugType::MissingAssignment => {
            for a in find_assignments(&toks) {
                let text = source[a.stmt.0..a.stmt.1].to_string();
                if text.contains("*/") {
                    continue;
                }
                let line_end = source[a.stmt.1..].find('\n').map_or(source.len(), |n| a.stmt.1 + n);
                let tail = &source[a.stmt.1..line_end];
                let tail_empty = tail.trim().is_empty() || tail.trim_start().starts_with("//");
                out.push(Candidate { site: a.stmt, build: Box::new(move |_| Some(comment_out(&text, tail_empty))) });
            }
        }
        BugType::WrongAssignment => {
            let types = table.modules.get(module).cloned().unwrap_or_default();
            for a in find_assignments(&toks) {
                let lhs_type = types.iter().find(|(_, names)| names.contains(&a.lhs_base)).map(|(t, _)| t.clone());
                let width = if a.lhs_has_select { None } else { lhs_type.as_deref().and_then(type_width) };
                let rhs_text = source[a.rhs.0..a.rhs.1].to_string();
                let mut same_width: Vec<String> = match (&lhs_type, width) {
                    (Some(_), Some(w)) => types
                        .iter()
                        .filter(|(t, _)| type_width(t) == Some(w))
                        .flat_map(|(_, names)| names.iter().cloned())
                        .filter(|n| *n != a.lhs_base && *n != rhs_text && !n.starts_with('\\'))
                        .collect(),
                    _ => Vec::new(),
                };
                same_width.sort();
                out.push(Candidate {
                    site: a.rhs,
                    build: Box::new(move |rng| {
                        if !same_width.is_empty() && rng.gen_bool(0.5) {
                            return same_width.choose(rng).cloned();
                        }
                        let span = width.map_or(16, |w| w.min(16));
                        for _ in 0..8 {
                            let v: u64 = rng.gen_range(0..(1u64 << span));
                            let text = match width {
                                Some(w) => format!("{w}'d{v}"),
                                None => v.to_string(),
                            };
                            if text != rhs_text {
                                return Some(text);
                            }
                        }
                        None
                    }),
                });
            }
        }
        BugType::BitwiseCorruption => {
            for a in find_assignments(&toks) {
                let (from, to) = a.rhs_toks;
                let rhs_start = a.rhs.0;
                let rhs_text = source[a.rhs.0..a.rhs.1].to_string();
                let ops: Vec<(usize, usize, &'static str)> = toks[from..to]
                    .iter()
                    .filter_map(|t| {
                        let kind: &'static str = match t.text {
                            "&" => "&",
                            "|" => "|",
                            "^" => "^",
                            "~" => "~",
                            _ => return None,
                        };
                        Some((t.start - rhs_start, t.end() - rhs_start, kind))
                    })
                    .collect();
                if ops.is_empty() {
                    continue;
                }
                out.push(Candidate {
                    site: a.rhs,
                    build: Box::new(move |rng| {
                        let (s, e, op) = *ops.choose(rng)?;
                        let new_op = match op {
                            "~" => "",
                            _ => *["&", "|", "^"].iter().filter(|o| **o != op).collect::<Vec<_>>().choose(rng)?,
                        };
                        Some(format!("{}{}{}", &rhs_text[..s], new_op, &rhs_text[e..]))
                    }),
                });
            }
        }
        BugType::LogicBug => {
            for (i, t) in toks.iter().enumerate() {
                if (t.is("if") || t.is("while")) && toks.get(i + 1).is_some_and(|n| n.is("(")) {
                    let Some(close) = closing(&toks, i + 1) else { continue };
                    let (s, e) = (toks[i + 1].start, toks[close].end());
                    let cond = source[s + 1..e - 1].to_string();
                    out.push(Candidate { site: (s, e), build: Box::new(move |_| Some(format!("(!({cond}))"))) });
                }
                if matches!(t.text, "always" | "always_ff") && toks.get(i + 1).is_some_and(|n| n.is("@")) {
                    let Some(open) = toks.get(i + 2).filter(|n| n.is("(")).map(|_| i + 2) else { continue };
                    let Some(close) = closing(&toks, open) else { continue };
                    if let Some(edge) = toks[open..close].iter().find(|e| e.is("posedge") || e.is("negedge")) {
                        let flipped = if edge.is("posedge") { "negedge" } else { "posedge" };
                        out.push(Candidate { site: (edge.start, edge.end()), build: Box::new(move |_| Some(flipped.to_string())) });
                    }
                }
            }
        }
        BugType::DataSize => {
            for i in 1..toks.len() {
                if !toks[i].is("[") || !DECL_WORDS.contains(&toks[i - 1].text) {
                    continue;
                }
                let [msb, colon, lsb, close] = [i + 1, i + 2, i + 3, i + 4].map(|k| toks.get(k));
                let (Some(msb), Some(colon), Some(lsb), Some(close)) = (msb, colon, lsb, close) else { continue };
                if msb.kind != TokKind::Number || !colon.is(":") || lsb.kind != TokKind::Number || !close.is("]") {
                    continue;
                }
                let (Ok(m), Ok(l)) = (msb.text.parse::<u32>(), lsb.text.parse::<u32>()) else { continue };
                if m < l {
                    continue;
                }
                let (s, e) = (toks[i].start, close.end());
                out.push(Candidate {
                    site: (s, e),
                    build: Box::new(move |rng| {
                        let widen = m == l || rng.gen_bool(0.5);
                        let nm = if widen { m + 1 } else { m - 1 };
                        Some(format!("[{nm}:{l}]"))
                    }),
                });
            }
        }
    }
    Ok(out)
}

/// Byte spans of every eligible site of `bug` in `module`.
pub fn eligible_sites(source: &str, table: &ModuleLookupTable, module: &str, bug: BugType) -> Result<Vec<(usize, usize)>, MutateError> {
    Ok(candidates(source, table, module, bug)?.into_iter().map(|c| c.site).collect())
}

/// Deterministically choose an eligible site of `bug` in `module` (skipping
/// `exclude`) and build its replacement.
pub fn plan(
    source: &str,
    file: &Path,
    table: &ModuleLookupTable,
    module: &str,
    bug: BugType,
    seed_value: u64,
    exclude: &HashSet<SiteKey>,
) -> Result<MutationSpec, MutateError> {
    if !table.modules.contains_key(module) {
        return Err(MutateError::UnknownModule(module.to_string()));
    }
    let mut cands = candidates(source, table, module, bug)?;
    cands.retain(|c| {
        !exclude.contains(&SiteKey { file: file.to_path_buf(), module: module.to_string(), start: c.site.0, end: c.site.1, bug_type: bug })
    });
    let mut rng = seed::rng(seed_value, "mutate.plan", bug.index());
    cands.shuffle(&mut rng);
    for c in cands {
        let original = &source[c.site.0..c.site.1];
        if let Some(replacement) = (c.build)(&mut rng) {
            if replacement != original {
                return Ok(MutationSpec {
                    bug_type: bug,
                    target_module: module.to_string(),
                    file: file.to_path_buf(),
                    site: Site { start: c.site.0, end: c.site.1, original: original.to_string() },
                    replacement,
                    seed: seed_value,
                    source_hash: sha256_hex(source.as_bytes()),
                });
            }
        }
    }
    Err(MutateError::NoEligibleSite(bug))
}

fn is_identifier(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|f| f.is_ascii_alphabetic() || f == '_') && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '$')
}

/// Whether `spec.replacement` is a legal rewrite of `spec.site.original`
/// for its bug type.
pub fn conforms(spec: &MutationSpec) -> bool {
    let (orig, rep) = (spec.site.original.as_str(), spec.replacement.as_str());
    if orig == rep {
        return false;
    }
    match spec.bug_type {
        BugType::MissingAssignment => {
            rep == format!("// {}", orig.replace('\n', "\n// ")) || (rep == format!("/* {orig} */") && !orig.contains("*/"))
        }
        BugType::WrongAssignment => {
            let sized = rep.split_once("'d").is_some_and(|(w, v)| {
                !w.is_empty() && w.bytes().all(|b| b.is_ascii_digit()) && !v.is_empty() && v.bytes().all(|b| b.is_ascii_digit())
            });
            sized || (!rep.is_empty() && rep.bytes().all(|b| b.is_ascii_digit())) || is_identifier(rep)
        }
        BugType::BitwiseCorruption => {
            let (Ok(a), Ok(b)) = (lex(orig), lex(rep)) else { return false };
            let a: Vec<&str> = a.iter().map(|t| t.text).collect();
            let b: Vec<&str> = b.iter().map(|t| t.text).collect();
            let bitwise = |t: &str| matches!(t, "&" | "|" | "^");
            if a.len() == b.len() {
                let diffs: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
                diffs.len() == 1 && bitwise(a[diffs[0]]) && bitwise(b[diffs[0]])
            } else if a.len() == b.len() + 1 {
                (0..a.len()).any(|i| a[i] == "~" && a[..i] == b[..i] && a[i + 1..] == b[i..])
            } else {
                false
            }
        }
        BugType::LogicBug => {
            matches!((orig, rep), ("posedge", "negedge") | ("negedge", "posedge"))
                || (orig.starts_with('(') && orig.ends_with(')') && rep == format!("(!({}))", &orig[1..orig.len() - 1]))
        }
        BugType::DataSize => {
            let range = |s: &str| -> Option<(i64, String)> {
                let (m, l) = s.strip_prefix('[')?.strip_suffix(']')?.split_once(':')?;
                Some((m.trim().parse().ok()?, l.trim().to_string()))
            };
            match (range(orig), range(rep)) {
                (Some((m0, l0)), Some((m1, l1))) => l0 == l1 && (m0 - m1).abs() == 1 && l0.parse::<i64>().is_ok_and(|l| m1 >= l),
                _ => false,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtl::{scan_sources, DesignSources};

    const SRC: &str = "module m(input logic clk, input logic en, input logic rdy, input logic [7:0] a, input logic [7:0] b, output logic [7:0] y);
  logic [7:0] q;
  assign y = a & b;
  always_ff @(posedge clk) begin
    if (en && rdy) q <= ~a;
  end
endmodule
";

    fn table(src: &str) -> ModuleLookupTable {
        scan_sources(&DesignSources { files: vec![("m.sv".into(), src.to_string())] }).unwrap()
    }

    fn plan_one(src: &str, bug: BugType, seed: u64) -> Result<MutationSpec, MutateError> {
        plan(src, Path::new("m.sv"), &table(src), "m", bug, seed, &HashSet::new())
    }

    #[test]
    fn finds_assignments() {
        let (toks, _, _) = module_tokens(SRC, "m").unwrap();
        let a = find_assignments(&toks);
        let stmts: Vec<&str> = a.iter().map(|a| &SRC[a.stmt.0..a.stmt.1]).collect();
        assert_eq!(stmts, vec!["assign y = a & b;", "q <= ~a;"]);
        assert_eq!(&SRC[a[0].rhs.0..a[0].rhs.1], "a & b");
    }

    #[test]
    fn missing_assignment_comments_out() {
        for seed in 0..6 {
            let s = plan_one(SRC, BugType::MissingAssignment, seed).unwrap();
            assert_eq!(s.replacement, format!("// {}", s.site.original));
        }
        let inline = "module m(input logic c); logic q; always_comb begin if (c) q = 1; else q = 0; end endmodule";
        let spec = plan(inline, Path::new("m.sv"), &table(inline), "m", BugType::MissingAssignment, 0, &HashSet::new()).unwrap();
        assert!(spec.replacement.starts_with("/* ") && spec.replacement.ends_with(" */"));
    }

    #[test]
    fn logic_bug_negates_or_flips() {
        let mut seen = HashSet::new();
        for seed in 0..20 {
            let s = plan_one(SRC, BugType::LogicBug, seed).unwrap();
            seen.insert(s.replacement.clone());
        }
        assert!(seen.contains("(!(en && rdy))"));
        assert!(seen.contains("negedge"));
        let none = "module m(input wire a, output wire y); assign y = a; endmodule";
        assert!(matches!(plan_one(none, BugType::LogicBug, 0), Err(MutateError::NoEligibleSite(BugType::LogicBug))));
    }

    #[test]
    fn bitwise_and_wrong_assignment() {
        for seed in 0..10 {
            let s = plan_one(SRC, BugType::BitwiseCorruption, seed).unwrap();
            assert!(["a | b", "a ^ b", "a"].contains(&s.replacement.as_str()), "{}", s.replacement);
            let w = plan_one(SRC, BugType::WrongAssignment, seed).unwrap();
            let r = &w.replacement;
            let is_const = r.strip_prefix("8'd").is_some_and(|v| v.parse::<u32>().is_ok_and(|v| v < 256));
            assert!(is_const || ["a", "b", "q", "y"].contains(&r.as_str()), "{r}");
        }
    }

    #[test]
    fn data_size_moves_msb() {
        let s = plan_one(SRC, BugType::DataSize, 1).unwrap();
        assert_eq!(s.site.original, "[7:0]");
        assert!(["[8:0]", "[6:0]"].contains(&s.replacement.as_str()));
    }

    #[test]
    fn deterministic_and_exclusions() {
        assert_eq!(plan_one(SRC, BugType::LogicBug, 4).unwrap(), plan_one(SRC, BugType::LogicBug, 4).unwrap());
        let t = table(SRC);
        let all: HashSet<SiteKey> = eligible_sites(SRC, &t, "m", BugType::DataSize)
            .unwrap()
            .into_iter()
            .map(|(start, end)| SiteKey { file: "m.sv".into(), module: "m".into(), start, end, bug_type: BugType::DataSize })
            .collect();
        assert!(matches!(plan(SRC, Path::new("m.sv"), &t, "m", BugType::DataSize, 0, &all), Err(MutateError::NoEligibleSite(_))));
        assert!(matches!(plan_one(SRC, BugType::DataSize, 0).map(|_| ()), Ok(())));
        assert!(matches!(plan(SRC, Path::new("m.sv"), &t, "nope", BugType::DataSize, 0, &HashSet::new()), Err(MutateError::UnknownModule(_))));
    }

    #[test]
    fn planned_specs_conform() {
        for bug in BugType::ALL {
            for seed in 0..8 {
                let s = plan_one(SRC, bug, seed).unwrap();
                assert!(conforms(&s), "{bug}: {:?} -> {:?}", s.site.original, s.replacement);
            }
        }
        let mut s = plan_one(SRC, BugType::LogicBug, 0).unwrap();
        s.replacement = "(1)".into();
        assert!(!conforms(&s));
    }

    #[test]
    fn widths_from_types() {
        assert_eq!(type_width("logic"), Some(1));
        assert_eq!(type_width("logic [7:0]"), Some(8));
        assert_eq!(type_width("logic signed [3:0][1:0]"), Some(8));
        assert_eq!(type_width("logic [W-1:0]"), None);
    }
}
