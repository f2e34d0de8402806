// SPDX-License-Identifier: Apache-2.0

use super::{Scope, ScopeItem, ScopeTree, Value, ValueChange, VcdError};
use std::collections::HashMap;
use std::io::Write;

/// Incremental VCD writer. The header is written on construction; changes
/// are appended in time order.
pub struct VcdWriter<W: Write> {
    out: W,
    widths: HashMap<String, u32>,
    time: Option<u64>,
}

fn write_scope<W: Write>(out: &mut W, scope: &Scope) -> std::io::Result<()> {
    writeln!(out, "$scope {} {} $end", scope.kind, scope.name)?;
    for item in &scope.items {
        match item {
            ScopeItem::Var(v) => writeln!(out, "$var {} {} {} {} $end", v.kind.as_str(), v.width, v.id_code, v.name)?,
            ScopeItem::Scope(s) => write_scope(out, s)?,
        }
    }
    writeln!(out, "$upscope $end")
}

impl<W: Write> VcdWriter<W> {
    pub fn new(mut out: W, tree: &ScopeTree) -> Result<Self, VcdError> {
        writeln!(out, "$timescale {} $end", tree.timescale)?;
        for root in &tree.roots {
            write_scope(&mut out, root)?;
        }
        writeln!(out, "$enddefinitions $end")?;
        let mut widths = HashMap::new();
        tree.for_each_var(|v| {
            widths.insert(v.id_code.clone(), v.width);
        });
        Ok(VcdWriter { out, widths, time: None })
    }

    /// Emit `#time` if it differs from the current timestamp.
    pub fn timestamp(&mut self, time: u64) -> Result<(), VcdError> {
        match self.time {
            Some(t) if time < t => {
                return Err(VcdError::TimeRegression { line: 0, previous: t, found: time });
            }
            Some(t) if time == t => {}
            _ => {
                writeln!(self.out, "#{time}")?;
                self.time = Some(time);
            }
        }
        Ok(())
    }

    pub fn change(&mut self, change: &ValueChange) -> Result<(), VcdError> {
        self.value(change.time, &change.id_code, &change.value)
    }

    pub fn value(&mut self, time: u64, id: &str, value: &Value) -> Result<(), VcdError> {
        if !self.widths.contains_key(id) {
            return Err(VcdError::UndeclaredId(id.to_string()));
        }
        self.timestamp(time)?;
        match value {
            Value::Scalar(b) => writeln!(self.out, "{}{}", b.as_char(), id)?,
            Value::Vector(bits) => {
                let mut line = String::with_capacity(bits.len() + id.len() + 3);
                line.push('b');
                line.extend(bits.iter().map(|b| b.as_char()));
                line.push(' ');
                line.push_str(id);
                writeln!(self.out, "{line}")?;
            }
            Value::Real(r) => writeln!(self.out, "r{r} {id}")?,
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, VcdError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Serialize a complete dump.
pub fn write_vcd<W: Write>(out: W, tree: &ScopeTree, changes: &[ValueChange]) -> Result<W, VcdError> {
    let mut w = VcdWriter::new(out, tree)?;
    for c in changes {
        w.change(c)?;
    }
    w.finish()
}
