//! Subset reader for MATPOWER `.m` case files and DC Laplacian extraction.
//!
//! Only `mpc.baseMVA`, `mpc.bus` and `mpc.branch` are read. Rows are kept
//! positionally, so columns this module does not interpret survive a
//! parse/serialize cycle.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Laplacian, Network, NodePair};

const BUS_I: usize = 0;
const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_X: usize = 3;
const BR_STATUS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CaseData {
    pub base_mva: f64,
    pub bus: Vec<Vec<f64>>,
    pub branch: Vec<Vec<f64>>,
}

#[derive(Debug, Default)]
struct Block {
    rows: Vec<Vec<f64>>,
    lines: Vec<usize>,
    pending: Vec<f64>,
    pending_line: usize,
}

impl Block {
    fn end_row(&mut self) {
        if !self.pending.is_empty() {
            self.rows.push(std::mem::take(&mut self.pending));
            self.lines.push(self.pending_line);
        }
    }

    fn feed(&mut self, text: &str, line: usize) -> Result<()> {
        for (k, piece) in text.split(';').enumerate() {
            if k > 0 {
                self.end_row();
            }
            for tok in piece.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("non-numeric token `{tok}`"),
                })?;
                if self.pending.is_empty() {
                    self.pending_line = line;
                }
                self.pending.push(v);
            }
        }
        Ok(())
    }

    fn finish(mut self, name: &str) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        self.end_row();
        if let Some(first) = self.rows.first() {
            let width = first.len();
            for (row, &line) in self.rows.iter().zip(&self.lines) {
                if row.len() != width {
                    return Err(Error::Parse {
                        line,
                        msg: format!("ragged mpc.{name} row: {} columns, expected {width}", row.len()),
                    });
                }
            }
        }
        Ok((self.rows, self.lines))
    }
}

enum State {
    Outside,
    /// Inside a numeric block; `None` for blocks that are skipped.
    Inside(String, Option<Block>),
}

pub fn parse_case(text: &str) -> Result<CaseData> {
    let mut base_mva = None;
    let mut blocks: HashMap<String, (Vec<Vec<f64>>, Vec<usize>)> = HashMap::new();
    let mut state = State::Outside;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let code = raw.split('%').next().unwrap_or("");
        match &mut state {
            State::Outside => {
                let trimmed = code.trim();
                let Some(rest) = trimmed.strip_prefix("mpc.") else {
                    continue;
                };
                let name: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
                let Some(rhs) = rest[name.len()..].trim_start().strip_prefix('=') else {
                    continue;
                };
                let rhs = rhs.trim();
                if name == "baseMVA" {
                    let num = rhs.trim_end_matches(';').trim();
                    base_mva = Some(num.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad baseMVA `{num}`"),
                    })?);
                } else if let Some(body) = rhs.strip_prefix('[') {
                    let mut block = matches!(name.as_str(), "bus" | "branch").then(Block::default);
                    let (inner, closed) = split_close(body);
                    if let Some(b) = block.as_mut() {
                        b.feed(inner, line)?;
                    }
                    if closed {
                        if let Some(b) = block {
                            blocks.insert(name.clone(), b.finish(&name)?);
                        }
                    } else {
                        state = State::Inside(name, block);
                    }
                }
            }
            State::Inside(name, block) => {
                let (inner, closed) = split_close(code);
                if let Some(b) = block.as_mut() {
                    b.feed(inner, line)?;
                    b.end_row();
                }
                if closed {
                    let name = std::mem::take(name);
                    if let Some(b) = block.take() {
                        let done = b.finish(&name)?;
                        blocks.insert(name, done);
                    }
                    state = State::Outside;
                }
            }
        }
    }
    if let State::Inside(name, _) = state {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("unterminated mpc.{name} block"),
        });
    }

    let (bus, _) = blocks.remove("bus").ok_or_else(|| Error::Parse {
        line: last_line,
        msg: "missing mpc.bus block".into(),
    })?;
    let (branch, branch_lines) = blocks.remove("branch").ok_or_else(|| Error::Parse {
        line: last_line,
        msg: "missing mpc.branch block".into(),
    })?;

    let mut ids = std::collections::HashSet::new();
    for b in &bus {
        if !ids.insert(b[BUS_I] as i64) {
            return Err(Error::InvalidArgument(format!("duplicate bus id {}", b[BUS_I])));
        }
    }
    for (row, &line) in branch.iter().zip(&branch_lines) {
        if row.len() <= BR_X {
            return Err(Error::Parse {
                line,
                msg: "branch row needs at least fbus, tbus, r, x".into(),
            });
        }
        for end in [row[F_BUS], row[T_BUS]] {
            if !ids.contains(&(end as i64)) {
                return Err(Error::Parse {
                    line,
                    msg: format!("branch endpoint {end} is not a bus"),
                });
            }
        }
    }

    Ok(CaseData {
        base_mva: base_mva.unwrap_or(100.0),
        bus,
        branch,
    })
}

/// Splits at the closing `]`, if any.
fn split_close(s: &str) -> (&str, bool) {
    match s.find(']') {
        Some(k) => (&s[..k], true),
        None => (s, false),
    }
}

impl CaseData {
    /// Minimal MATPOWER text that [`parse_case`] reads back.
    pub fn to_m_text(&self) -> String {
        let mut s = String::from("function mpc = case_export\nmpc.version = '2';\n");
        s.push_str(&format!("mpc.baseMVA = {};\n", self.base_mva));
        for (name, rows) in [("bus", &self.bus), ("branch", &self.branch)] {
            s.push_str(&format!("mpc.{name} = [\n"));
            for r in rows {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                s.push('\t');
                s.push_str(&cells.join("\t"));
                s.push_str(";\n");
            }
            s.push_str("];\n");
        }
        s
    }

    fn in_service(row: &[f64]) -> bool {
        row.get(BR_STATUS).is_none_or(|&s| s != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeSusceptance {
    /// A pair whose merged `Σ 1/x` is not positive is an error.
    #[default]
    Reject,
    /// Use `|Σ 1/x|`.
    Magnitude,
}

/// DC network with nodes renumbered densely in bus-list order.
#[derive(Debug, Clone)]
pub struct DcNetwork {
    pub network: Network,
    /// Original bus id of node `k` (0-based) at position `k`.
    pub bus_ids: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcMetadata {
    pub n: usize,
    pub m: usize,
    /// Entry `k` is the bus id of node `k + 1`.
    pub renumber_map: Vec<i64>,
}

impl DcNetwork {
    pub fn laplacian(&self) -> Laplacian {
        self.network.laplacian()
    }

    pub fn metadata(&self) -> DcMetadata {
        DcMetadata {
            n: self.network.node_count(),
            m: self.network.edge_count(),
            renumber_map: self.bus_ids.clone(),
        }
    }

    /// 1-based node → bus id, for reports.
    pub fn bus_of(&self, node: usize) -> i64 {
        self.bus_ids[node]
    }
}

pub fn dc_laplacian(case: &CaseData) -> Result<(DcNetwork, Laplacian)> {
    dc_laplacian_with(case, NegativeSusceptance::Reject)
}

/// Branch weights `1/x`, out-of-service branches dropped, parallel branches
/// merged by adding susceptances.
pub fn dc_laplacian_with(case: &CaseData, negative: NegativeSusceptance) -> Result<(DcNetwork, Laplacian)> {
    let bus_ids: Vec<i64> = case.bus.iter().map(|r| r[BUS_I] as i64).collect();
    let node_of: HashMap<i64, usize> = bus_ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();

    let mut order: Vec<NodePair> = Vec::new();
    let mut merged: BTreeMap<NodePair, (usize, usize, f64)> = BTreeMap::new();
    for (index, row) in case.branch.iter().enumerate() {
        if !CaseData::in_service(row) {
            continue;
        }
        let (from, to) = (row[F_BUS] as i64, row[T_BUS] as i64);
        let x = row[BR_X];
        if x == 0.0 {
            return Err(Error::ZeroReactance {
                index: index + 1,
                from,
                to,
            });
        }
        let (tail, head) = (node_of[&from], node_of[&to]);
        if tail == head {
            return Err(Error::InvalidNetwork(format!("branch {} is a self-loop at bus {from}", index + 1)));
        }
        let pair = NodePair::new(tail, head);
        merged
            .entry(pair)
            .and_modify(|e| e.2 += 1.0 / x)
            .or_insert_with(|| {
                order.push(pair);
                (tail, head, 1.0 / x)
            });
    }

    let mut edges = Vec::with_capacity(order.len());
    for pair in order {
        let (tail, head, w) = merged[&pair];
        let weight = match negative {
            NegativeSusceptance::Magnitude => w.abs(),
            NegativeSusceptance::Reject if w > 0.0 => w,
            NegativeSusceptance::Reject => {
                return Err(Error::InvalidNetwork(format!(
                    "buses {}-{} have non-positive merged susceptance {w}",
                    bus_ids[tail], bus_ids[head]
                )))
            }
        };
        edges.push(Edge::new(tail, head, weight));
    }
    let network = Network::new(bus_ids.len(), edges)?;
    let l = network.laplacian();
    Ok((DcNetwork { network, bus_ids }, l))
}
