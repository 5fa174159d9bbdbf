//! Plain-text solution files.
//!
//! ```text
//! cost 412.5
//! route 0
//!   3 pickup 1        # t=12.2 load=10
//!   15 drop 1 15      # t=30.0 load=0
//! route 1
//!   15 pick 1 15
//!   4 delivery 1
//! ```
//!
//! Depot stops are implied and not written; `depart` and `arrive` lines
//! are accepted on input as the first and last stop of a route. Every
//! vehicle appears once, in id order. `#` starts a comment.

use std::fmt::Write;

use pdpt_core::{Action, Instance, Route, Schedule, Solution, Stop};

use crate::error::{Error, Result};

fn action_tokens(action: Action) -> String {
    match action {
        Action::DepartDepot => "depart".into(),
        Action::ArriveDepot => "arrive".into(),
        Action::Pickup(r) => format!("pickup {r}"),
        Action::Delivery(r) => format!("delivery {r}"),
        Action::TransferDrop { request, transfer } => format!("drop {request} {transfer}"),
        Action::TransferPick { request, transfer } => format!("pick {request} {transfer}"),
    }
}

/// Writes `solution`. When `schedule` is given, each stop line carries its
/// departure time and load as a comment.
pub fn write_solution(solution: &Solution, schedule: Option<&Schedule>, cost: f64) -> String {
    let mut out = format!("cost {cost}\n");
    for (k, route) in solution.routes.iter().enumerate() {
        let _ = writeln!(out, "route {}", route.vehicle);
        for (s, stop) in route.stops.iter().enumerate() {
            if stop.action.is_depot() {
                continue;
            }
            let line = format!("  {} {}", stop.node, action_tokens(stop.action));
            match schedule {
                Some(sch) => {
                    let _ = writeln!(out, "{line:<24}# t={:.3} load={}", sch.departure[k][s], sch.load[k][s]);
                }
                None => {
                    let _ = writeln!(out, "{line}");
                }
            }
        }
    }
    out
}

fn number<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| Error::parse(line, format!("bad {what}: {tok:?}")))
}

fn parse_stop(instance: &Instance, tokens: &[&str], line: usize) -> Result<Stop> {
    let node: usize = number(tokens.first().copied(), "node id", line)?;
    if node >= instance.num_nodes() {
        return Err(Error::parse(line, format!("node {node} out of range")));
    }
    let kind = tokens.get(1).copied().ok_or_else(|| Error::parse(line, "missing action"))?;
    let (action, arity) = match kind {
        "depart" => (Action::DepartDepot, 2),
        "arrive" => (Action::ArriveDepot, 2),
        "pickup" | "delivery" => {
            let r: usize = number(tokens.get(2).copied(), "request id", line)?;
            if r >= instance.num_requests() {
                return Err(Error::parse(line, format!("request {r} out of range")));
            }
            let req = instance.request(r);
            let (action, expected) =
                if kind == "pickup" { (Action::Pickup(r), req.pickup) } else { (Action::Delivery(r), req.delivery) };
            if node != expected {
                return Err(Error::parse(line, format!("request {r} has its {kind} at node {expected}, not {node}")));
            }
            (action, 3)
        }
        "drop" | "pick" => {
            let request: usize = number(tokens.get(2).copied(), "request id", line)?;
            let transfer: usize = number(tokens.get(3).copied(), "transfer node", line)?;
            if request >= instance.num_requests() {
                return Err(Error::parse(line, format!("request {request} out of range")));
            }
            if transfer != node || !instance.is_transfer_point(node) {
                return Err(Error::parse(line, format!("node {node} is not transfer point {transfer}")));
            }
            let action = if kind == "drop" {
                Action::TransferDrop { request, transfer }
            } else {
                Action::TransferPick { request, transfer }
            };
            (action, 4)
        }
        other => return Err(Error::parse(line, format!("unknown action {other:?}"))),
    };
    if tokens.len() != arity {
        return Err(Error::parse(line, format!("{kind} takes {} fields, found {}", arity, tokens.len())));
    }
    Ok(Stop::new(node, action))
}

/// Reads a solution for `instance`; the assignment is inferred from the
/// stops.
pub fn read_solution(text: &str, instance: &Instance) -> Result<Solution> {
    let mut cost_seen = false;
    let mut routes: Vec<Option<Vec<Stop>>> = vec![None; instance.num_vehicles()];
    let mut current: Option<usize> = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.first().copied() {
            None => {}
            Some("cost") => {
                if cost_seen || current.is_some() || tokens.len() != 2 {
                    return Err(Error::parse(line, "cost must be one value on the first line"));
                }
                let _: f64 = number(tokens.get(1).copied(), "cost", line)?;
                cost_seen = true;
            }
            Some("route") => {
                if !cost_seen {
                    return Err(Error::parse(line, "missing cost line"));
                }
                let k: usize = number(tokens.get(1).copied(), "vehicle id", line)?;
                if tokens.len() != 2 {
                    return Err(Error::parse(line, "route takes one vehicle id"));
                }
                if k >= routes.len() || current.is_some_and(|c| k <= c) {
                    return Err(Error::parse(line, format!("vehicle {k} out of range or out of order")));
                }
                routes[k] = Some(Vec::new());
                current = Some(k);
            }
            Some(_) => {
                let k = current.ok_or_else(|| Error::parse(line, "stop before any route line"))?;
                let stop = parse_stop(instance, &tokens, line)?;
                let stops = routes[k].as_mut().unwrap();
                let v = instance.vehicle(k);
                match stop.action {
                    Action::DepartDepot if !stops.is_empty() || stop.node != v.start_depot => {
                        return Err(Error::parse(line, "depart must be the first stop, at the start depot"));
                    }
                    _ if stops.last().is_some_and(|s: &Stop| s.action == Action::ArriveDepot) => {
                        return Err(Error::parse(line, "stop after arrive"));
                    }
                    Action::ArriveDepot if stop.node != v.end_depot => {
                        return Err(Error::parse(line, "arrive must be at the end depot"));
                    }
                    _ => stops.push(stop),
                }
            }
        }
    }
    if !cost_seen {
        return Err(Error::parse(last_line.max(1), "missing cost line"));
    }
    let routes = routes
        .into_iter()
        .enumerate()
        .map(|(k, stops)| {
            let mut route = Route::empty(instance, k);
            let inner = stops.unwrap_or_default().into_iter().filter(|s| !s.action.is_depot());
            route.stops.splice(1..1, inner);
            route
        })
        .collect();
    Ok(Solution::from_routes(instance, routes))
}
