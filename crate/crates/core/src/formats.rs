//! Text formats: grid maps, general graphs, scenarios, plan CSV, vertex
//! labels, and DIMACS CNF.
//!
//! Grid map:
//! ```text
//! height 2
//! width 3
//! map
//! ..@
//! ...
//! ```
//! General graph: `vertices N` followed by one `u v` edge per line.
//! Scenario: `id release start_row start_col goal_row goal_col` on grids,
//! `id release start goal` on general graphs; `#` starts a comment line.
//! Agents are ordered by release (then file id) and renumbered `1..=m`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::path::Path as FsPath;
use std::sync::Arc;

use crate::adversary::{ReductionOutput, SatInstance};
use crate::error::{Error, Result};
use crate::model::{Agent, AgentId, OnlineInstance, Path, Plan, Time};
use crate::world::{build_graph, Graph, GridMap, VertexId};

fn read(path: &FsPath) -> Result<(String, String)> {
    Ok((std::fs::read_to_string(path)?, path.display().to_string()))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn number<T: std::str::FromStr>(file: &str, line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(file, line, format!("{what}: expected a number, got {token:?}")))
}

fn keyword_value(file: &str, line: Option<(usize, &str)>, key: &str) -> Result<usize> {
    let (n, text) = line.ok_or_else(|| Error::parse(file, 0, format!("missing `{key}` line")))?;
    let mut parts = text.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::parse(file, n, format!("expected `{key} <n>`")));
    }
    let value = parts
        .next()
        .ok_or_else(|| Error::parse(file, n, format!("missing value after `{key}`")))?;
    if parts.next().is_some() {
        return Err(Error::parse(file, n, "trailing tokens"));
    }
    number(file, n, value, key)
}

pub fn parse_grid_map(text: &str, file: &str) -> Result<GridMap> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let height = keyword_value(file, lines.next(), "height")?;
    let width = keyword_value(file, lines.next(), "width")?;
    match lines.next() {
        Some((_, "map")) => {}
        Some((n, _)) => return Err(Error::parse(file, n, "expected `map`")),
        None => return Err(Error::parse(file, 3, "missing `map` line")),
    }
    let mut blocked = BTreeSet::new();
    let mut rows = 0;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if rows == height {
            return Err(Error::parse(file, n, format!("more than {height} rows")));
        }
        if line.chars().count() != width {
            return Err(Error::parse(
                file,
                n,
                format!("row has {} cells, expected {width}", line.chars().count()),
            ));
        }
        for (col, ch) in line.chars().enumerate() {
            match ch {
                '.' => {}
                '@' => {
                    blocked.insert((rows, col));
                }
                other => return Err(Error::parse(file, n, format!("unknown cell {other:?}"))),
            }
        }
        rows += 1;
    }
    if rows != height {
        return Err(Error::parse(file, text.lines().count(), format!("{rows} rows, expected {height}")));
    }
    Ok(GridMap {
        height,
        width,
        blocked,
    })
}

pub fn parse_graph(text: &str, file: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let n = keyword_value(file, lines.next(), "vertices")?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let [u, v] = tokens[..] else {
            return Err(Error::parse(file, line, "expected `u v`"));
        };
        let (u, v): (usize, usize) = (number(file, line, u, "u")?, number(file, line, v, "v")?);
        if u >= n || v >= n || u == v {
            return Err(Error::parse(file, line, format!("invalid edge ({u}, {v})")));
        }
        edges.push((u, v));
    }
    build_graph(n, &edges)
}

/// Parses either world format, picking by the first keyword.
pub fn parse_world(text: &str, file: &str) -> Result<Graph> {
    match content_lines(text).next() {
        Some((_, l)) if l.starts_with("height") => parse_grid_map(text, file)?.to_graph(),
        Some((_, l)) if l.starts_with("vertices") => parse_graph(text, file),
        Some((n, _)) => Err(Error::parse(file, n, "expected `height` or `vertices`")),
        None => Err(Error::parse(file, 1, "empty world file")),
    }
}

pub fn read_world(path: &FsPath) -> Result<Graph> {
    let (text, file) = read(path)?;
    parse_world(&text, &file)
}

pub fn parse_scenario(text: &str, file: &str, graph: Arc<Graph>) -> Result<OnlineInstance> {
    let mut entries: Vec<(Time, u64, Agent)> = Vec::new();
    let mut ids = BTreeSet::new();
    for (line, l) in content_lines(text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let id: u64 = number(file, line, tokens[0], "id")?;
        if !ids.insert(id) {
            return Err(Error::parse(file, line, format!("duplicate agent id {id}")));
        }
        let (release, start, goal) = match tokens[..] {
            [_, r, sr, sc, gr, gc] => {
                let cell = |r: &str, c: &str, what: &str| -> Result<VertexId> {
                    let (r, c) = (number(file, line, r, what)?, number(file, line, c, what)?);
                    graph
                        .vertex_at(r, c)
                        .ok_or_else(|| Error::parse(file, line, format!("{what} ({r}, {c}) is not a free cell")))
                };
                (number(file, line, r, "release")?, cell(sr, sc, "start")?, cell(gr, gc, "goal")?)
            }
            [_, r, s, g] if !graph.is_grid() => {
                let vertex = |s: &str, what: &str| -> Result<VertexId> {
                    let v: usize = number(file, line, s, what)?;
                    if v >= graph.vertex_count() {
                        return Err(Error::parse(file, line, format!("{what} vertex {v} out of range")));
                    }
                    Ok(VertexId(v as u32))
                };
                (number(file, line, r, "release")?, vertex(s, "start")?, vertex(g, "goal")?)
            }
            _ => {
                let expected = if graph.is_grid() {
                    "`id release start_row start_col goal_row goal_col`"
                } else {
                    "`id release start goal`"
                };
                return Err(Error::parse(file, line, format!("expected {expected}")));
            }
        };
        if release < 0 {
            return Err(Error::parse(file, line, "negative release time"));
        }
        if start == goal {
            return Err(Error::parse(file, line, "start equals goal"));
        }
        entries.push((release, id, Agent::new(0, start, goal, release)));
    }
    if entries.is_empty() {
        return Err(Error::parse(file, 1, "scenario has no agents"));
    }
    entries.sort_by_key(|&(r, id, _)| (r, id));
    let agents = entries
        .into_iter()
        .enumerate()
        .map(|(i, (_, _, a))| Agent {
            id: AgentId(i as u32 + 1),
            ..a
        })
        .collect();
    OnlineInstance::new(graph, agents)
}

pub fn read_scenario(path: &FsPath, graph: Arc<Graph>) -> Result<OnlineInstance> {
    let (text, file) = read(path)?;
    parse_scenario(&text, &file, graph)
}

pub fn write_grid_map(map: &GridMap) -> String {
    let mut out = format!("height {}\nwidth {}\nmap\n", map.height, map.width);
    for r in 0..map.height {
        for c in 0..map.width {
            out.push(if map.is_free(r, c) { '.' } else { '@' });
        }
        out.push('\n');
    }
    out
}

/// The smallest grid map containing every cell of a grid graph.
pub fn grid_map_of(graph: &Graph) -> Option<GridMap> {
    if !graph.is_grid() {
        return None;
    }
    let cells: BTreeSet<(usize, usize)> = graph.vertices().filter_map(|v| graph.cell(v)).collect();
    let height = cells.iter().map(|c| c.0 + 1).max()?;
    let width = cells.iter().map(|c| c.1 + 1).max()?;
    let blocked = (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .filter(|c| !cells.contains(c));
    Some(GridMap::with_blocked(height, width, blocked))
}

pub fn write_graph(graph: &Graph) -> String {
    let mut out = format!("vertices {}\n", graph.vertex_count());
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Writes a grid map when the graph came from a grid, a general graph otherwise.
pub fn write_world(graph: &Graph) -> String {
    grid_map_of(graph).map_or_else(|| write_graph(graph), |map| write_grid_map(&map))
}

pub fn write_scenario(inst: &OnlineInstance) -> String {
    let graph = &inst.graph;
    let mut out = String::new();
    for a in inst.agents() {
        match (graph.cell(a.start), graph.cell(a.goal)) {
            (Some((sr, sc)), Some((gr, gc))) => {
                let _ = writeln!(out, "{} {} {sr} {sc} {gr} {gc}", a.id, a.release);
            }
            _ => {
                let _ = writeln!(out, "{} {} {} {}", a.id, a.release, a.start, a.goal);
            }
        }
    }
    out
}

pub fn write_labels(out: &ReductionOutput) -> String {
    let mut text = String::new();
    for (v, role) in out.labels() {
        let _ = writeln!(text, "{v} {role}");
    }
    text
}

/// Column order of the plan CSV.
pub const PLAN_HEADER: [&str; 5] = ["agent", "start_time", "arrival_time", "service_time", "path"];

pub fn write_plan_csv<W: io::Write>(plan: &Plan, inst: &OnlineInstance, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PLAN_HEADER)?;
    for (id, path) in plan.iter() {
        let release = inst.agent(id).release;
        let vertices: Vec<String> = path.vertices.iter().map(|v| v.to_string()).collect();
        w.write_record([
            id.to_string(),
            path.start_time.to_string(),
            path.arrival_time().to_string(),
            (path.arrival_time() - release).to_string(),
            vertices.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_plan_csv(text: &str, file: &str) -> Result<Plan> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(PLAN_HEADER) {
        return Err(Error::parse(file, 1, format!("expected header {}", PLAN_HEADER.join(","))));
    }
    let mut plan = Plan::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let id: u32 = number(file, line, &record[0], "agent")?;
        let start: Time = number(file, line, &record[1], "start_time")?;
        let arrival: Time = number(file, line, &record[2], "arrival_time")?;
        let vertices = record[4]
            .split(';')
            .map(|v| number(file, line, v, "path").map(VertexId))
            .collect::<Result<Vec<_>>>()?;
        if vertices.is_empty() {
            return Err(Error::parse(file, line, "empty path"));
        }
        let path = Path::new(start, vertices);
        if path.arrival_time() != arrival {
            return Err(Error::parse(file, line, "arrival_time disagrees with the path length"));
        }
        if plan.insert(AgentId(id), path).is_some() {
            return Err(Error::parse(file, line, format!("duplicate agent {id}")));
        }
    }
    Ok(plan)
}

/// DIMACS CNF: `c` comment lines, a `p cnf N M` header, then clauses of
/// signed integers each terminated by `0`.
pub fn parse_dimacs(text: &str, file: &str) -> Result<SatInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    let mut last_line = 0;
    for (line, l) in content_lines(text) {
        last_line = line;
        if l.starts_with('c') || l.starts_with('%') {
            continue;
        }
        if l.starts_with('p') {
            let tokens: Vec<&str> = l.split_whitespace().collect();
            let ["p", "cnf", n, m] = tokens[..] else {
                return Err(Error::parse(file, line, "expected `p cnf N M`"));
            };
            if header.is_some() {
                return Err(Error::parse(file, line, "duplicate header"));
            }
            header = Some((number(file, line, n, "N")?, number(file, line, m, "M")?));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::parse(file, line, "clause before `p cnf` header"));
        };
        for token in l.split_whitespace() {
            let lit: i32 = number(file, line, token, "literal")?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > n {
                return Err(Error::parse(file, line, format!("literal {lit} exceeds N = {n}")));
            } else {
                current.push(lit);
            }
        }
    }
    let Some((n, m)) = header else {
        return Err(Error::parse(file, last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(Error::parse(file, last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(Error::parse(file, last_line, format!("{} clauses, header says {m}", clauses.len())));
    }
    SatInstance::new(n, clauses)
}

pub fn read_dimacs(path: &FsPath) -> Result<SatInstance> {
    let (text, file) = read(path)?;
    parse_dimacs(&text, &file)
}
