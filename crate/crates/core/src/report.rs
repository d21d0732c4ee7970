//! Machine-readable reports.
//!
//! The payload is the deterministic part: identical inputs and seed must
//! serialize to identical bytes. Wall-clock timing and cache statistics sit
//! next to it, outside the determinism contract.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const PAYLOAD_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModuleLine {
    pub name: String,
    pub orders: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TableLine {
    pub name: String,
    pub left_orders: Vec<u64>,
    pub right_orders: Vec<u64>,
    pub target_orders: Vec<u64>,
    pub entries: Vec<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct Payload {
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub modules: Vec<ModuleLine>,
    pub tower_orders: Vec<u64>,
    pub tables: Vec<TableLine>,
    pub checks: Vec<CheckLine>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub payload: Payload,
    pub timing_ms: u128,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

impl Payload {
    pub fn new(command: &str, seed: u64) -> Self {
        Payload {
            version: PAYLOAD_VERSION.into(),
            command: command.into(),
            seed,
            ..Default::default()
        }
    }

    pub fn module(&mut self, name: &str, orders: &[u64]) {
        self.modules.push(ModuleLine {
            name: name.into(),
            orders: orders.to_vec(),
        });
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckLine {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Canonical JSON bytes (serde_json with sorted maps via BTreeMap).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("payload serializes")
    }
}

impl Report {
    pub fn render_text(&self) -> String {
        let p = &self.payload;
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", p.command));
        for (k, v) in &p.inputs {
            out.push_str(&format!("input {k}: {v}\n"));
        }
        if !p.tower_orders.is_empty() {
            let orders: Vec<String> = p.tower_orders.iter().map(|o| o.to_string()).collect();
            out.push_str(&format!("tower orders: {}\n", orders.join(" ")));
        }
        for m in &p.modules {
            out.push_str(&format!("{} = {}\n", m.name, fmt_orders(&m.orders)));
        }
        for t in &p.tables {
            out.push_str(&format!(
                "{}: {} x {} -> {}\n",
                t.name,
                fmt_orders(&t.left_orders),
                fmt_orders(&t.right_orders),
                fmt_orders(&t.target_orders)
            ));
            for (i, row) in t.entries.iter().enumerate() {
                let cells: Vec<String> = row
                    .iter()
                    .map(|v| {
                        let cs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                        format!("({})", cs.join(","))
                    })
                    .collect();
                out.push_str(&format!("  row {i}: {}\n", cells.join(" ")));
            }
        }
        for c in &p.checks {
            out.push_str(&format!(
                "check {}: {} ({})\n",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.detail
            ));
        }
        for n in &p.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str(&format!(
            "timing: {} ms, cache: {} hit(s) {} miss(es)\n",
            self.timing_ms, self.cache_hits, self.cache_misses
        ));
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn fmt_orders(orders: &[u64]) -> String {
    if orders.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = orders.iter().map(|d| format!("Z/{d}")).collect();
    parts.join(" + ")
}
