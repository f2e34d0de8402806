// SPDX-License-Identifier: Apache-2.0

//! Criterion 8: round trip, bounded-memory streaming and fuzzing of the
//! dump parser.

use crate::{serial, verdict};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::io::{BufReader, Read};
use std::process::Command;
use wavetriage_core::vcd::{
    id_code_for, parse_header, write_vcd, Bit, IdFilter, Scope, ScopeItem, ScopeTree, SignalDecl, TimeUnit, Timescale, Value, ValueChange,
    VarKind,
};

const ROUND_TRIPS: u64 = 1000;
const FUZZ_CASES: u64 = 10_000;
const BODY_BYTES: u64 = 1 << 30;
const MEMORY_CEILING_KB: u64 = 256 * 1024;
const CHILD_ENV: &str = "WAVETRIAGE_ACCEPTANCE_STREAM_CHILD";

fn random_value(rng: &mut StdRng, width: u32, real: bool) -> Value {
    let bit = |rng: &mut StdRng| [Bit::Zero, Bit::One, Bit::X, Bit::Z][rng.gen_range(0..4)];
    if real {
        Value::Real((rng.gen::<f64>() - 0.5) * 10f64.powi(rng.gen_range(-6..9)))
    } else if width == 1 {
        Value::Scalar(bit(rng))
    } else {
        Value::Vector((0..width).map(|_| bit(rng)).collect())
    }
}

fn random_instance(seed_value: u64) -> (ScopeTree, Vec<ValueChange>) {
    let mut rng = StdRng::seed_from_u64(seed_value);
    let mut decls: Vec<(String, u32, bool)> = Vec::new();
    fn scope(rng: &mut StdRng, name: String, path: Vec<String>, depth: u32, decls: &mut Vec<(String, u32, bool)>) -> Scope {
        let mut s = Scope::new(["module", "task", "function", "begin", "fork"][rng.gen_range(0..5)], name);
        let mut path = path;
        path.push(s.name.clone());
        for v in 0..rng.gen_range(0..5) {
            let real = rng.gen_bool(0.1);
            let width = if real { 64 } else { [1, 1, 2, 8, 13, 32, 64][rng.gen_range(0..7)] };
            // occasionally alias an earlier id of the same width
            let alias = decls.iter().filter(|(_, w, r)| *w == width && *r == real).map(|(id, _, _)| id.clone()).next().filter(|_| rng.gen_bool(0.15));
            let id = alias.unwrap_or_else(|| {
                let id = id_code_for(decls.len());
                decls.push((id.clone(), width, real));
                id
            });
            let kind = if real { VarKind::Real } else { [VarKind::Wire, VarKind::Reg, VarKind::Logic, VarKind::Integer][rng.gen_range(0..4)].clone() };
            s.items.push(ScopeItem::Var(SignalDecl { id_code: id, name: format!("v{v}"), width, kind, scope_path: path.clone() }));
        }
        if depth < 3 {
            for c in 0..rng.gen_range(0..3) {
                s.items.push(ScopeItem::Scope(scope(rng, format!("s{depth}_{c}"), path.clone(), depth + 1, decls)));
            }
        }
        s
    }
    let roots = (0..rng.gen_range(1..3)).map(|r| scope(&mut rng, format!("top{r}"), Vec::new(), 0, &mut decls)).collect();
    let unit = [TimeUnit::S, TimeUnit::Ms, TimeUnit::Us, TimeUnit::Ns, TimeUnit::Ps, TimeUnit::Fs][rng.gen_range(0..6)];
    let tree = ScopeTree { timescale: Timescale::new([1, 10, 100][rng.gen_range(0..3)], unit).unwrap(), roots };
    let mut changes = Vec::new();
    if !decls.is_empty() {
        let mut t = rng.gen_range(0..5u64);
        for _ in 0..rng.gen_range(0..200) {
            t += rng.gen_range(0..3);
            let (id, width, real) = decls[rng.gen_range(0..decls.len())].clone();
            changes.push(ValueChange { time: t, id_code: id, value: random_value(&mut rng, width, real) });
        }
    }
    (tree, changes)
}

fn round_trip(seed_value: u64) -> bool {
    let (tree, changes) = random_instance(seed_value);
    let bytes = write_vcd(Vec::new(), &tree, &changes).unwrap();
    let Ok((parsed, body)) = parse_header(&bytes[..]) else { return false };
    let back: Result<Vec<ValueChange>, _> = body.changes(IdFilter::all()).collect();
    parsed == tree && back.is_ok_and(|b| b == changes)
}

/// A dump with a fixed header and `limit` body bytes generated on demand.
struct Synth {
    header: Vec<u8>,
    pos: usize,
    line: Vec<u8>,
    line_pos: usize,
    emitted: u64,
    limit: u64,
    tick: u64,
    state: u64,
}

const SYNTH_SIGNALS: usize = 64;

impl Synth {
    fn new(limit: u64) -> Self {
        let mut header = String::from("$timescale 1ns $end\n$scope module tb $end\n");
        for i in 0..SYNTH_SIGNALS {
            let w = if i % 4 == 0 { 1 } else { 16 };
            header.push_str(&format!("$var wire {w} {} s{i} $end\n", id_code_for(i)));
        }
        header.push_str("$upscope $end\n$enddefinitions $end\n#0\n");
        Synth { header: header.into_bytes(), pos: 0, line: Vec::new(), line_pos: 0, emitted: 0, limit, tick: 1, state: 0x2545_f491_4f6c_dd1d }
    }

    fn next_line(&mut self) {
        self.line.clear();
        self.state ^= self.state << 13;
        self.state ^= self.state >> 7;
        self.state ^= self.state << 17;
        let i = (self.state % (SYNTH_SIGNALS as u64 + 4)) as usize;
        if i >= SYNTH_SIGNALS {
            self.line.extend_from_slice(format!("#{}\n", self.tick).as_bytes());
            self.tick += 1;
        } else if i.is_multiple_of(4) {
            self.line.extend_from_slice(format!("{}{}\n", self.state >> 63, id_code_for(i)).as_bytes());
        } else {
            self.line.extend_from_slice(format!("b{:016b} {}\n", (self.state >> 20) as u16, id_code_for(i)).as_bytes());
        }
        self.line_pos = 0;
    }
}

impl Read for Synth {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        if self.pos < self.header.len() {
            let n = buf.len().min(self.header.len() - self.pos);
            buf[..n].copy_from_slice(&self.header[self.pos..self.pos + n]);
            self.pos += n;
            return Ok(n);
        }
        let mut n = 0;
        while n < buf.len() {
            if self.line_pos == self.line.len() {
                if self.emitted >= self.limit {
                    break;
                }
                self.next_line();
            }
            let k = (buf.len() - n).min(self.line.len() - self.line_pos);
            buf[n..n + k].copy_from_slice(&self.line[self.line_pos..self.line_pos + k]);
            self.line_pos += k;
            self.emitted += k as u64;
            n += k;
        }
        Ok(n)
    }
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Runs only inside the child process spawned by criterion 8, so its peak
/// memory covers nothing but the streaming parse.
#[test]
#[ignore = "spawned by criterion_8_parser_robustness"]
fn stream_child() {
    if std::env::var_os(CHILD_ENV).is_none() {
        return;
    }
    let synth = Synth::new(BODY_BYTES);
    let (_, body) = parse_header(BufReader::with_capacity(1 << 16, synth)).unwrap();
    let mut changes = 0u64;
    for c in body.changes(IdFilter::all()) {
        c.unwrap();
        changes += 1;
    }
    println!("STREAM changes={changes} hwm_kb={}", peak_rss_kb().unwrap_or(u64::MAX));
}

fn stream_in_child() -> Result<(u64, u64), String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let out = Command::new(exe)
        .args(["--exact", "parser_robustness::stream_child", "--ignored", "--nocapture", "--test-threads=1"])
        .env(CHILD_ENV, "1")
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find_map(|l| l.split_once("STREAM ").map(|(_, r)| r)).ok_or_else(|| format!("child failed ({}): {text:?}", out.status))?;
    let field = |k: &str| -> Option<u64> { line.split_whitespace().find_map(|w| w.strip_prefix(k)).and_then(|v| v.parse().ok()) };
    Ok((field("changes=").ok_or("no count")?, field("hwm_kb=").ok_or("no hwm")?))
}

fn mutate_bytes(rng: &mut StdRng, mut b: Vec<u8>) -> Vec<u8> {
    const TOKENS: [&[u8]; 12] =
        [b"$end", b"$scope", b"$upscope", b"$var", b"#", b"b", b"r", b"$enddefinitions", b"$dumpvars", b"#18446744073709551616", b" ", b"\n"];
    for _ in 0..rng.gen_range(1..6) {
        if b.is_empty() {
            b.push(b'#');
        }
        let at = rng.gen_range(0..b.len());
        match rng.gen_range(0..6) {
            0 => b[at] = rng.gen(),
            1 => {
                b.remove(at);
            }
            2 => b.splice(at..at, TOKENS[rng.gen_range(0..TOKENS.len())].iter().copied()).for_each(drop),
            3 => b.truncate(at),
            4 => {
                let end = (at + rng.gen_range(1..40)).min(b.len());
                let chunk = b[at..end].to_vec();
                b.splice(at..at, chunk).for_each(drop);
            }
            _ => b.splice(at..at, (0..rng.gen_range(1..16)).map(|_| rng.gen::<u8>())).for_each(drop),
        }
    }
    b
}

fn fuzz(cases: u64) -> (u64, u64) {
    let seeds: Vec<Vec<u8>> = (0..32).map(|s| {
        let (tree, changes) = random_instance(50_000 + s);
        write_vcd(Vec::new(), &tree, &changes).unwrap()
    }).collect();
    let (mut panics, mut rejected) = (0, 0);
    for i in 0..cases {
        let mut rng = StdRng::seed_from_u64(900_000 + i);
        let input = if i % 10 == 0 {
            (0..rng.gen_range(0..512)).map(|_| rng.gen::<u8>()).collect()
        } else {
            mutate_bytes(&mut rng, seeds[(i % 32) as usize].clone())
        };
        let outcome = std::panic::catch_unwind(|| match parse_header(&input[..]) {
            Ok((_, body)) => {
                for e in body.events(IdFilter::all()) {
                    if e.is_err() {
                        break;
                    }
                }
                false
            }
            Err(_) => true,
        });
        match outcome {
            Ok(true) => rejected += 1,
            Ok(false) => {}
            Err(_) => panics += 1,
        }
    }
    (panics, rejected)
}

#[test]
fn criterion_8_parser_robustness() {
    let _g = serial();
    let failed_trips = (0..ROUND_TRIPS).filter(|&s| !round_trip(s)).count();
    let prev_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let (panics, rejected) = fuzz(FUZZ_CASES);
    std::panic::set_hook(prev_hook);
    let stream = stream_in_child();
    let stream_ok = matches!(stream, Ok((n, kb)) if n > 0 && kb <= MEMORY_CEILING_KB);
    let pass = failed_trips == 0 && panics == 0 && stream_ok;
    let stream_text = match &stream {
        Ok((n, kb)) => format!("1 GiB body, {n} changes, peak RSS {:.1} MiB (ceiling 256 MiB)", *kb as f64 / 1024.0),
        Err(e) => format!("stream run failed: {e}"),
    };
    let detail = format!(
        "{ROUND_TRIPS} round trips, {failed_trips} failed; {FUZZ_CASES} fuzz cases, {panics} panics ({rejected} rejected at the header); {stream_text}"
    );
    verdict(8, "parser robustness", pass, &detail);
    assert!(pass, "{detail}");
}
