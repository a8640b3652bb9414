//! Plain-text instance files.
//!
//! * spin glass: header `sg3 L`, then one `x y z axis J` line per coupling;
//! * graph: header `graph n m`, then `m` lines `u v` (0-based);
//! * MAXSAT: DIMACS CNF. Generated instances record their coloring graph in
//!   `c hboa-morph` / `c edge` comment lines so the round trip is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::maxsat::MorphOrigin;
use super::{Instance, Literal, MaxSatInstance, Problem, SpinGlass3D, VertexCoverInstance};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceFormat {
    SpinGlass,
    Graph,
    Dimacs,
}

impl InstanceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            InstanceFormat::SpinGlass => "sg3",
            InstanceFormat::Graph => "graph",
            InstanceFormat::Dimacs => "cnf",
        }
    }

    pub fn of(instance: &Instance) -> Option<Self> {
        match instance {
            Instance::SpinGlass(_) => Some(InstanceFormat::SpinGlass),
            Instance::VertexCover(_) => Some(InstanceFormat::Graph),
            Instance::MaxSat(_) => Some(InstanceFormat::Dimacs),
            Instance::Custom => None,
        }
    }
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render(instance)?)?;
    Ok(())
}

pub(crate) fn render(instance: &Instance) -> Result<String> {
    let mut out = String::new();
    match instance {
        Instance::SpinGlass(sg) => {
            writeln!(out, "sg3 {}", sg.side()).unwrap();
            for site in 0..sg.n() {
                let (x, y, z) = sg.coords(site);
                for axis in 0..3 {
                    writeln!(out, "{x} {y} {z} {axis} {}", sg.coupling(site, axis)).unwrap();
                }
            }
        }
        Instance::VertexCover(g) => {
            writeln!(out, "graph {} {}", g.n(), g.edges().len()).unwrap();
            for &(u, v) in g.edges() {
                writeln!(out, "{u} {v}").unwrap();
            }
        }
        Instance::MaxSat(inst) => {
            if let Some(o) = inst.origin() {
                writeln!(out, "c hboa-morph p={} colors={} nodes={}", o.p, o.colors, o.nodes).unwrap();
                for &(u, v) in &o.edges {
                    writeln!(out, "c edge {u} {v}").unwrap();
                }
            }
            writeln!(out, "p cnf {} {}", inst.nv(), inst.clauses().len()).unwrap();
            for clause in inst.clauses() {
                for l in clause {
                    write!(out, "{} ", l.to_dimacs()).unwrap();
                }
                out.push_str("0\n");
            }
        }
        Instance::Custom => {
            return Err(Error::invalid("custom ADF problems have no file format"));
        }
    }
    Ok(out)
}

/// Loads an instance; the format is sniffed from the header when `None`.
pub fn load_instance(path: impl AsRef<Path>, format: Option<InstanceFormat>) -> Result<Problem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse(path, &text, format)
}

pub(crate) fn parse(path: &Path, text: &str, format: Option<InstanceFormat>) -> Result<Problem> {
    let format = match format {
        Some(f) => f,
        None => sniff(path, text)?,
    };
    let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match format {
        InstanceFormat::SpinGlass => parse_spin_glass(path, lines).map(Problem::spin_glass),
        InstanceFormat::Graph => parse_graph(path, lines).map(Problem::vertex_cover),
        InstanceFormat::Dimacs => parse_dimacs(path, lines).map(Problem::maxsat),
    }
}

fn sniff(path: &Path, text: &str) -> Result<InstanceFormat> {
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("sg3") {
            return Ok(InstanceFormat::SpinGlass);
        }
        if line.starts_with("graph") {
            return Ok(InstanceFormat::Graph);
        }
        if line.starts_with('c') || line.starts_with("p cnf") {
            return Ok(InstanceFormat::Dimacs);
        }
        return Err(Error::parse(path, i + 1, "unrecognized instance header"));
    }
    Err(Error::parse(path, 1, "empty instance file"))
}

fn nums<T: std::str::FromStr>(path: &Path, line_no: usize, line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad number `{t}`")))
        })
        .collect()
}

fn content<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> impl Iterator<Item = (usize, &'a str)> {
    lines.filter(|(_, l)| !l.is_empty())
}

fn parse_spin_glass<'a>(
    path: &Path,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<SpinGlass3D> {
    let mut lines = content(lines);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing `sg3 L` header"))?;
    let side: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["sg3", l] => l
            .parse()
            .map_err(|_| Error::parse(path, hl, format!("bad lattice side `{l}`")))?,
        _ => return Err(Error::parse(path, hl, "expected `sg3 L`")),
    };
    if side < 3 {
        return Err(Error::parse(path, hl, format!("lattice side {side} < 3")));
    }
    let n = side.pow(3);
    let mut couplings = vec![0i8; 3 * n];
    let mut last = hl;
    for (ln, line) in lines {
        last = ln;
        let v: Vec<i64> = nums(path, ln, line)?;
        let [x, y, z, axis, j] = v[..] else {
            return Err(Error::parse(path, ln, "expected `x y z axis J`"));
        };
        let s = side as i64;
        if !(0..s).contains(&x) || !(0..s).contains(&y) || !(0..s).contains(&z) || !(0..3).contains(&axis) {
            return Err(Error::parse(path, ln, "coordinate out of range"));
        }
        if j != 1 && j != -1 {
            return Err(Error::parse(path, ln, format!("coupling {j} is not ±1")));
        }
        let site = (x + s * (y + s * z)) as usize;
        let slot = &mut couplings[3 * site + axis as usize];
        if *slot != 0 {
            return Err(Error::parse(path, ln, "coupling listed twice"));
        }
        *slot = j as i8;
    }
    if couplings.contains(&0) {
        let missing = couplings.iter().filter(|&&c| c == 0).count();
        return Err(Error::parse(
            path,
            last,
            format!("truncated: {missing} couplings missing"),
        ));
    }
    SpinGlass3D::from_couplings(side, couplings)
}

fn parse_graph<'a>(
    path: &Path,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<VertexCoverInstance> {
    let mut lines = content(lines);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing `graph n m` header"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "graph" {
        return Err(Error::parse(path, hl, "expected `graph n m`"));
    }
    let hdr: Vec<usize> = nums(path, hl, &parts[1..].join(" "))?;
    let (n, m) = (hdr[0], hdr[1]);
    let mut edges = Vec::with_capacity(m);
    let mut last = hl;
    for (ln, line) in lines {
        last = ln;
        let v: Vec<usize> = nums(path, ln, line)?;
        let [u, w] = v[..] else {
            return Err(Error::parse(path, ln, "expected `u v`"));
        };
        if edges.len() == m {
            return Err(Error::parse(path, ln, format!("more than {m} edges")));
        }
        edges.push((u, w));
    }
    if edges.len() != m {
        return Err(Error::parse(
            path,
            last,
            format!("truncated: {} of {m} edges", edges.len()),
        ));
    }
    VertexCoverInstance::new(n, edges).map_err(|e| Error::parse(path, hl, e.to_string()))
}

fn parse_dimacs<'a>(
    path: &Path,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<MaxSatInstance> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut morph: Option<(f64, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last = 1;
    for (ln, line) in content(lines) {
        last = ln;
        if let Some(rest) = line.strip_prefix('c') {
            let rest = rest.trim();
            if let Some(m) = rest.strip_prefix("hboa-morph") {
                morph = Some(parse_morph(path, ln, m)?);
            } else if let Some(e) = rest.strip_prefix("edge") {
                let v: Vec<usize> = nums(path, ln, e)?;
                let [u, w] = v[..] else {
                    return Err(Error::parse(path, ln, "expected `c edge u v`"));
                };
                edges.push((u, w));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            if header.is_some() {
                return Err(Error::parse(path, ln, "duplicate problem line"));
            }
            let v: Vec<usize> = nums(path, ln, rest)?;
            let [nv, m] = v[..] else {
                return Err(Error::parse(path, ln, "expected `p cnf <vars> <clauses>`"));
            };
            header = Some((nv, m, ln));
            continue;
        }
        let Some((nv, m, _)) = header else {
            return Err(Error::parse(path, ln, "clause before `p cnf` line"));
        };
        for lit in nums::<i64>(path, ln, line)? {
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::parse(path, ln, "empty clause"));
                }
                if clauses.len() == m {
                    return Err(Error::parse(path, ln, format!("more than {m} clauses")));
                }
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            let var = lit.unsigned_abs() as usize - 1;
            if var >= nv {
                return Err(Error::parse(path, ln, format!("literal {lit} exceeds {nv} variables")));
            }
            current.push(Literal {
                var,
                positive: lit > 0,
            });
        }
    }
    let Some((nv, m, hl)) = header else {
        return Err(Error::parse(path, last, "missing `p cnf` line"));
    };
    if !current.is_empty() {
        return Err(Error::parse(path, last, "unterminated clause"));
    }
    if clauses.len() != m {
        return Err(Error::parse(
            path,
            last,
            format!("truncated: {} of {m} clauses", clauses.len()),
        ));
    }
    let inst = MaxSatInstance::new(nv, clauses).map_err(|e| Error::parse(path, hl, e.to_string()))?;
    match morph {
        Some((p, colors, nodes)) => inst.with_origin(MorphOrigin {
            p,
            colors,
            nodes,
            edges,
        }),
        None => Ok(inst),
    }
}

fn parse_morph(path: &Path, ln: usize, s: &str) -> Result<(f64, usize, usize)> {
    let mut p = None;
    let mut colors = None;
    let mut nodes = None;
    for kv in s.split_whitespace() {
        let bad = || Error::parse(path, ln, format!("bad morph field `{kv}`"));
        let (k, v) = kv.split_once('=').ok_or_else(bad)?;
        match k {
            "p" => p = Some(v.parse().map_err(|_| bad())?),
            "colors" => colors = Some(v.parse().map_err(|_| bad())?),
            "nodes" => nodes = Some(v.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    match (p, colors, nodes) {
        (Some(p), Some(c), Some(n)) => Ok((p, c, n)),
        _ => Err(Error::parse(path, ln, "incomplete hboa-morph line")),
    }
}
