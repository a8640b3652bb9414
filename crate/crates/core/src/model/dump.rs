//! Text dumps of model structure: each split as `(target, var, depth)` in
//! creation order.
//!
//! ```text
//! hboa-models v1
//! model 4 2
//! 1 0 0
//! 3 2 0
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitRecord {
    pub target: usize,
    pub var: usize,
    /// Depth of the leaf that was split (the root is 0).
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDump {
    pub n: usize,
    pub splits: Vec<SplitRecord>,
}

const HEADER: &str = "hboa-models v1";

pub fn render_model_dumps(dumps: &[ModelDump]) -> String {
    let mut out = format!("{HEADER}\n");
    for d in dumps {
        writeln!(out, "model {} {}", d.n, d.splits.len()).unwrap();
        for s in &d.splits {
            writeln!(out, "{} {} {}", s.target, s.var, s.depth).unwrap();
        }
    }
    out
}

pub fn save_model_dumps(dumps: &[ModelDump], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_model_dumps(dumps))?;
    Ok(())
}

pub fn load_model_dumps(path: impl AsRef<Path>) -> Result<Vec<ModelDump>> {
    let path = path.as_ref();
    parse_model_dumps(path, &fs::read_to_string(path)?)
}

pub fn parse_model_dumps(path: &Path, text: &str) -> Result<Vec<ModelDump>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((_, l)) if l.starts_with("hboa-models") => {
            return Err(Error::Version {
                found: l.to_string(),
                expected: HEADER.to_string(),
            })
        }
        Some((ln, _)) => return Err(Error::parse(path, ln, "missing model dump header")),
        None => return Err(Error::parse(path, 1, "empty model dump")),
    }
    let mut dumps = Vec::new();
    let mut pending: Option<(ModelDump, usize, usize)> = None;
    let mut last = 1;
    for (ln, line) in lines {
        last = ln;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(path, ln, format!("bad number `{s}`")))
        };
        if fields.first() == Some(&"model") {
            if let Some((_, want, at)) = &pending {
                return Err(Error::parse(path, *at, format!("model truncated before {want} splits")));
            }
            let [_, n, k] = fields[..] else {
                return Err(Error::parse(path, ln, "expected `model <n> <splits>`"));
            };
            let (n, k) = (num(n)?, num(k)?);
            let dump = ModelDump { n, splits: Vec::with_capacity(k) };
            if k == 0 {
                dumps.push(dump);
            } else {
                pending = Some((dump, k, ln));
            }
            continue;
        }
        let Some((dump, want, _)) = pending.as_mut() else {
            return Err(Error::parse(path, ln, "split line outside a model block"));
        };
        let [t, v, d] = fields[..] else {
            return Err(Error::parse(path, ln, "expected `<target> <var> <depth>`"));
        };
        let rec = SplitRecord {
            target: num(t)?,
            var: num(v)?,
            depth: num(d)?,
        };
        if rec.target >= dump.n || rec.var >= dump.n || rec.target == rec.var {
            return Err(Error::parse(path, ln, "split references an invalid variable"));
        }
        dump.splits.push(rec);
        if dump.splits.len() == *want {
            dumps.push(pending.take().unwrap().0);
        }
    }
    if pending.is_some() {
        return Err(Error::parse(path, last, "truncated model block"));
    }
    Ok(dumps)
}
