use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::model::{MilpModel, RowKind};
use crate::error::Result;
use crate::scalar::Scalar;

const WRAP: usize = 100;

struct Lines {
    out: String,
    line: usize,
}

impl Lines {
    fn push(&mut self, token: &str) {
        if self.line + token.len() + 1 > WRAP && self.line > 0 {
            self.out.push_str("\n   ");
            self.line = 3;
        }
        self.out.push(' ');
        self.out.push_str(token);
        self.line += token.len() + 1;
    }

    fn start(&mut self, head: &str) {
        self.out.push(' ');
        self.out.push_str(head);
        self.line = head.len() + 1;
    }

    fn end(&mut self) {
        self.out.push('\n');
        self.line = 0;
    }
}

fn term<T: Scalar>(first: bool, coef: T, name: &str) -> String {
    let sign = if coef < T::zero() { "-" } else if first { "" } else { "+" };
    let mag = coef.abs();
    let body = if mag == T::one() { name.to_string() } else { format!("{mag} {name}") };
    if sign.is_empty() {
        body
    } else {
        format!("{sign} {body}")
    }
}

fn row_name(kind: RowKind, k: usize, model_target: &dyn Fn(usize) -> String) -> String {
    match kind {
        RowKind::Budget => "budget".into(),
        RowKind::LinkTail => format!("link_tail_{k}"),
        RowKind::LinkHead => format!("link_head_{k}"),
        RowKind::PathFirst => format!("path_first_{k}"),
        RowKind::PathSecond => format!("path_second_{k}"),
        RowKind::Cap(t) => format!("cap_{}", model_target(t)),
        RowKind::Cycle => format!("cycle_{k}"),
    }
}

/// Renders the model in CPLEX LP text format, cycle constraints generated so far included.
pub fn export_lp<T: Scalar>(model: &MilpModel<T>) -> String {
    let mut w = Lines { out: String::new(), line: 0 };
    let _ = writeln!(
        w.out,
        "\\ follow-back formulation, order {}, budget {}",
        u8::from(model.order),
        model.budget
    );
    w.out.push_str("Maximize\n");
    w.start("obj:");
    let mut first = true;
    for v in &model.vars {
        if v.objective != T::zero() {
            w.push(&term(first, v.objective, &v.name));
            first = false;
        }
    }
    if first {
        let name = model.vars.first().map(|v| v.name.as_str()).unwrap_or("x_none");
        w.push(&format!("0 {name}"));
    }
    w.end();

    w.out.push_str("Subject To\n");
    let target_name = |t: usize| model.vars[model.x_var(t)].name[2..].to_string();
    let mut counters = std::collections::HashMap::new();
    for c in &model.constraints {
        let k = counters.entry(std::mem::discriminant(&c.kind)).or_insert(0usize);
        w.start(&format!("{}:", row_name(c.kind, *k, &target_name)));
        *k += 1;
        for (i, &(j, a)) in c.terms.iter().enumerate() {
            w.push(&term(i == 0, a, &model.vars[j].name));
        }
        w.push(&format!("<= {}", c.rhs));
        w.end();
    }

    w.out.push_str("Binary\n");
    for v in &model.vars {
        if w.line == 0 {
            w.start(&v.name);
        } else {
            w.push(&v.name);
        }
    }
    if w.line > 0 {
        w.end();
    }
    w.out.push_str("End\n");
    w.out
}

/// Writes `export_lp` to `path` through a temporary sibling, then renames.
pub fn write_lp<T: Scalar>(model: &MilpModel<T>, path: &Path) -> Result<()> {
    let text = export_lp(model);
    let tmp = path.with_extension("lp.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
