//! Asymmetric TSP as a mixed-integer program in CPLEX LP format, with
//! Miller-Tucker-Zemlin subtour elimination.
//!
//! Variables: binary `x_i_j` for every arc `i != j` over nodes `0..=N_W`
//! (node 0 is the origin) and continuous order labels `u_k` in
//! `[1, N_W]` for each waypoint. The reader below accepts the subset of LP
//! syntax the writer produces, so a written model can be checked against a
//! candidate assignment without an external solver.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::CostMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub var: String,
    pub lower: f64,
    pub upper: f64,
}

/// A linear model in the shape the LP writer emits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    pub objective: Vec<(String, f64)>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
    pub binaries: Vec<String>,
}

pub fn arc_var(i: usize, j: usize) -> String {
    format!("x_{i}_{j}")
}

pub fn order_var(k: usize) -> String {
    format!("u_{k}")
}

/// MTZ formulation of the closed tour over `matrix`.
pub fn mtz_model<T: Scalar>(matrix: &CostMatrix<T>) -> LpModel {
    let size = matrix.size();
    let n = matrix.waypoints();
    let nf = n as f64;
    let arcs = || (0..size).flat_map(move |i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)));

    let objective = arcs().map(|(i, j)| (arc_var(i, j), matrix.get(i, j).as_f64())).collect();
    let mut constraints = Vec::new();
    for i in 0..size {
        constraints.push(Constraint {
            name: format!("out_{i}"),
            terms: (0..size).filter(|&j| j != i).map(|j| (arc_var(i, j), 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
        constraints.push(Constraint {
            name: format!("in_{i}"),
            terms: (0..size).filter(|&j| j != i).map(|j| (arc_var(j, i), 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            constraints.push(Constraint {
                name: format!("mtz_{i}_{j}"),
                terms: vec![(order_var(i), 1.0), (order_var(j), -1.0), (arc_var(i, j), nf)],
                sense: Sense::Le,
                rhs: nf - 1.0,
            });
        }
    }
    LpModel {
        objective,
        constraints,
        bounds: (1..=n)
            .map(|k| Bound {
                var: order_var(k),
                lower: 1.0,
                upper: nf,
            })
            .collect(),
        binaries: arcs().map(|(i, j)| arc_var(i, j)).collect(),
    }
}

fn write_terms(out: &mut String, terms: &[(String, f64)]) {
    for (k, (var, coef)) in terms.iter().enumerate() {
        if k > 0 && k % 6 == 0 {
            out.push_str("\n   ");
        }
        let sign = if coef.is_sign_negative() { '-' } else { '+' };
        if k == 0 && sign == '+' {
            let _ = write!(out, " {} {var}", coef.abs());
        } else {
            let _ = write!(out, " {sign} {} {var}", coef.abs());
        }
    }
}

impl LpModel {
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ Asymmetric TSP, Miller-Tucker-Zemlin subtour elimination\n");
        out.push_str("\\ node 0 is the origin; x_i_j = 1 when the tour flies i -> j\n");
        out.push_str("Minimize\n obj:");
        write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            write_terms(&mut out, &c.terms);
            let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
        }
        out.push_str("Bounds\n");
        for b in &self.bounds {
            let _ = writeln!(out, " {} <= {} <= {}", b.lower, b.var, b.upper);
        }
        out.push_str("Binaries\n");
        for chunk in self.binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
        out.push_str("End\n");
        out
    }

    /// Reads the LP subset produced by [`to_lp_string`](Self::to_lp_string).
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Start,
            Objective,
            Constraints,
            Bounds,
            Binaries,
            End,
        }
        let bad = |msg: String| Error::InvalidParams(format!("LP parse: {msg}"));

        // join continuation lines into one logical statement per row
        let mut section = Section::Start;
        let mut statements: Vec<(usize, String)> = Vec::new();
        let tag = |s: &Section| match s {
            Section::Objective => 1,
            Section::Constraints => 2,
            Section::Bounds => 3,
            Section::Binaries => 4,
            _ => 0,
        };
        for raw in text.lines() {
            let line = raw.split('\\').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lower = line.to_ascii_lowercase();
            let next = match lower.as_str() {
                "minimize" | "minimise" | "min" => Some(Section::Objective),
                "subject to" | "st" | "s.t." => Some(Section::Constraints),
                "bounds" => Some(Section::Bounds),
                "binaries" | "binary" | "bin" => Some(Section::Binaries),
                "end" => Some(Section::End),
                _ => None,
            };
            if let Some(s) = next {
                section = s;
                continue;
            }
            let t = tag(&section);
            if t == 0 {
                return Err(bad(format!("content outside a section: {line}")));
            }
            let starts_new = match section {
                Section::Objective | Section::Constraints => line.contains(':'),
                _ => true,
            };
            match statements.last_mut() {
                Some((st, s)) if *st == t && !starts_new => {
                    s.push(' ');
                    s.push_str(line);
                }
                _ => statements.push((t, line.to_string())),
            }
        }
        if section != Section::End {
            return Err(bad("missing End".into()));
        }

        fn parse_terms(tokens: &[&str]) -> std::result::Result<Vec<(String, f64)>, String> {
            let mut terms = Vec::new();
            let mut sign = 1.0;
            let mut coef: Option<f64> = None;
            for tok in tokens {
                match *tok {
                    "+" => sign = 1.0,
                    "-" => sign = -1.0,
                    t => match t.parse::<f64>() {
                        Ok(v) => coef = Some(v),
                        Err(_) => {
                            terms.push((t.to_string(), sign * coef.take().unwrap_or(1.0)));
                            sign = 1.0;
                        }
                    },
                }
            }
            if coef.is_some() {
                return Err("dangling coefficient".into());
            }
            Ok(terms)
        }

        let mut model = LpModel::default();
        for (t, s) in statements {
            match t {
                1 => {
                    let (_, body) = s.split_once(':').ok_or_else(|| bad("objective needs a name".into()))?;
                    let tokens: Vec<&str> = body.split_whitespace().collect();
                    model.objective.extend(parse_terms(&tokens).map_err(bad)?);
                }
                2 => {
                    let (name, body) = s.split_once(':').ok_or_else(|| bad(format!("unnamed row: {s}")))?;
                    let tokens: Vec<&str> = body.split_whitespace().collect();
                    let at = tokens
                        .iter()
                        .position(|t| matches!(*t, "<=" | ">=" | "=" | "=<" | "=>"))
                        .ok_or_else(|| bad(format!("row {name} has no relation")))?;
                    let sense = match tokens[at] {
                        "<=" | "=<" => Sense::Le,
                        ">=" | "=>" => Sense::Ge,
                        _ => Sense::Eq,
                    };
                    let rhs_tokens = &tokens[at + 1..];
                    let rhs = match rhs_tokens {
                        [v] => v.parse::<f64>().ok(),
                        ["-", v] => v.parse::<f64>().ok().map(|x| -x),
                        _ => None,
                    }
                    .ok_or_else(|| bad(format!("row {name} has a bad right-hand side")))?;
                    model.constraints.push(Constraint {
                        name: name.trim().to_string(),
                        terms: parse_terms(&tokens[..at]).map_err(bad)?,
                        sense,
                        rhs,
                    });
                }
                3 => {
                    let tokens: Vec<&str> = s.split_whitespace().collect();
                    match tokens.as_slice() {
                        [lo, "<=", var, "<=", hi] => model.bounds.push(Bound {
                            var: var.to_string(),
                            lower: lo.parse().map_err(|_| bad(format!("bound {s}")))?,
                            upper: hi.parse().map_err(|_| bad(format!("bound {s}")))?,
                        }),
                        _ => return Err(bad(format!("unsupported bound: {s}"))),
                    }
                }
                _ => model.binaries.extend(s.split_whitespace().map(str::to_string)),
            }
        }
        Ok(model)
    }

    /// Checks an assignment against every row, bound and integrality
    /// requirement. Variables missing from the assignment count as zero.
    pub fn evaluate(&self, assignment: &HashMap<String, f64>, tolerance: f64) -> Evaluation {
        let value = |v: &str| assignment.get(v).copied().unwrap_or(0.0);
        let mut violations = Vec::new();
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(v, k)| k * value(v)).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs + tolerance,
                Sense::Ge => lhs >= c.rhs - tolerance,
                Sense::Eq => (lhs - c.rhs).abs() <= tolerance,
            };
            if !ok {
                violations.push(format!("{}: lhs {lhs} {} {}", c.name, c.sense.symbol(), c.rhs));
            }
        }
        for b in &self.bounds {
            let v = value(&b.var);
            if v < b.lower - tolerance || v > b.upper + tolerance {
                violations.push(format!("bound {} = {v} outside [{}, {}]", b.var, b.lower, b.upper));
            }
        }
        for var in &self.binaries {
            let v = value(var);
            if v != 0.0 && v != 1.0 {
                violations.push(format!("{var} = {v} is not binary"));
            }
        }
        let objective = self.objective.iter().map(|(v, k)| k * value(v)).sum();
        Evaluation { violations, objective }
    }

    /// Objective of a tour, summing arc coefficients in flight order.
    pub fn objective_along(&self, nodes: &[usize]) -> Option<f64> {
        let coef: HashMap<&str, f64> = self.objective.iter().map(|(v, k)| (v.as_str(), *k)).collect();
        nodes
            .windows(2)
            .try_fold(0.0, |acc, w| coef.get(arc_var(w[0], w[1]).as_str()).map(|c| acc + c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub violations: Vec<String>,
    pub objective: f64,
}

impl Evaluation {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Arc and order-label values that encode the tour `0 -> order -> 0`.
pub fn tour_assignment(order: &[usize]) -> HashMap<String, f64> {
    let mut a = HashMap::new();
    let mut at = 0;
    for (pos, &k) in order.iter().enumerate() {
        a.insert(arc_var(at, k), 1.0);
        a.insert(order_var(k), (pos + 1) as f64);
        at = k;
    }
    a.insert(arc_var(at, 0), 1.0);
    a
}

/// Writes the MTZ model for `matrix` to `path` in LP format.
pub fn export_milp<T: Scalar>(matrix: &CostMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mtz_model(matrix).to_lp_string()).map_err(|e| Error::io(path, e))
}
