//! Li & Lim PDPTW benchmark files.
//!
//! Line 1 is `<vehicles> <capacity> <speed>`. Every other non-blank line
//! is `<id> <x> <y> <demand> <earliest> <latest> <service> <pickup>
//! <delivery>`. A pickup row has demand > 0 and names its delivery row in
//! the last field; a delivery row has demand < 0 and names its pickup row
//! in the second to last. Time windows and service times are kept but
//! never used by the solvers.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Row {
    pub id: i64,
    pub x: i64,
    pub y: i64,
    pub demand: i64,
    pub earliest: i64,
    pub latest: i64,
    pub service: i64,
    pub pickup_sibling: i64,
    pub delivery_sibling: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPdptwFile {
    pub vehicle_count: i64,
    pub capacity: i64,
    /// Unused.
    pub speed: i64,
    /// Row 0 is the depot.
    pub rows: Vec<Row>,
}

/// A (pickup row, delivery row, quantity) triple, as row indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawRequest {
    pub pickup: usize,
    pub delivery: usize,
    pub quantity: i64,
}

fn fields<const N: usize>(line: &str, lineno: usize) -> Result<[i64; N]> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != N {
        return Err(Error::parse(lineno, format!("expected {N} fields, found {}", tokens.len())));
    }
    let mut out = [0i64; N];
    for (slot, tok) in out.iter_mut().zip(&tokens) {
        *slot = tok.parse().map_err(|_| Error::parse(lineno, format!("not an integer: {tok:?}")))?;
    }
    Ok(out)
}

pub fn parse_lilim(text: &str) -> Result<RawPdptwFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let Some((first, header)) = lines.next() else {
        return Err(Error::parse(1, "empty file"));
    };
    let [vehicle_count, capacity, speed] = fields::<3>(header, first)?;
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let f = fields::<9>(line, lineno)?;
        rows.push(Row {
            id: f[0],
            x: f[1],
            y: f[2],
            demand: f[3],
            earliest: f[4],
            latest: f[5],
            service: f[6],
            pickup_sibling: f[7],
            delivery_sibling: f[8],
        });
    }
    let raw = RawPdptwFile { vehicle_count, capacity, speed, rows };
    raw.requests()?;
    Ok(raw)
}

impl RawPdptwFile {
    /// Pairs every pickup row with its delivery row, in pickup row order.
    pub fn requests(&self) -> Result<Vec<RawRequest>> {
        let bad = |m: String| Err(Error::Structure(m));
        if self.vehicle_count < 0 || self.capacity <= 0 {
            return bad(format!("vehicle count {} / capacity {}", self.vehicle_count, self.capacity));
        }
        let Some(depot) = self.rows.first() else {
            return bad("no depot row".into());
        };
        if depot.demand != 0 {
            return bad(format!("depot row {} has demand {}", depot.id, depot.demand));
        }
        let mut index: HashMap<i64, usize> = HashMap::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if index.insert(row.id, i).is_some() {
                return bad(format!("duplicate row id {}", row.id));
            }
        }
        let mut requests = Vec::new();
        for (i, row) in self.rows.iter().enumerate().skip(1) {
            match row.demand {
                0 => return bad(format!("row {} has zero demand", row.id)),
                d if d > 0 => {
                    let Some(&j) = index.get(&row.delivery_sibling).filter(|&&j| j != 0) else {
                        return bad(format!("pickup {} names no delivery row", row.id));
                    };
                    let other = &self.rows[j];
                    if other.demand != -d || other.pickup_sibling != row.id {
                        return bad(format!("pickup {} and delivery {} do not match", row.id, other.id));
                    }
                    requests.push(RawRequest { pickup: i, delivery: j, quantity: d });
                }
                d => {
                    let paired = index.get(&row.pickup_sibling).filter(|&&j| j != 0).map(|&j| &self.rows[j]);
                    if !paired.is_some_and(|p| p.demand == -d && p.delivery_sibling == row.id) {
                        return bad(format!("delivery {} has no matching pickup", row.id));
                    }
                }
            }
        }
        if requests.is_empty() {
            return bad("no requests".into());
        }
        Ok(requests)
    }
}

/// Tab-separated, like the published files. `parse_lilim` reads it back
/// unchanged.
pub fn print_lilim(raw: &RawPdptwFile) -> String {
    let mut out = format!("{}\t{}\t{}\n", raw.vehicle_count, raw.capacity, raw.speed);
    for r in &raw.rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.id, r.x, r.y, r.demand, r.earliest, r.latest, r.service, r.pickup_sibling, r.delivery_sibling
        );
    }
    out
}
