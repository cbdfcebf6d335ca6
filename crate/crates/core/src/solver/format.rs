//! Model exchange formats: CPLEX-style LP text, fixed MPS and free MPS.
//!
//! Column names are [`VarKey`] names and row names carry the family tag,
//! so an emitted model can be read back into a [`MilpModel`].

use std::collections::HashMap;
use std::fmt::Write;
use std::str::FromStr;

use super::SolverError;
use crate::milp::{tag_of_row_name, Constraint, MilpModel, Sense, Tag, VarKey, VariableIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    /// Fixed-column MPS; names are limited to 8 characters.
    Mps,
    FreeMps,
    LpText,
}

impl FromStr for ModelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mps" => Ok(ModelFormat::Mps),
            "free-mps" => Ok(ModelFormat::FreeMps),
            "lp" | "lp-text" => Ok(ModelFormat::LpText),
            other => Err(format!("unknown model format `{other}` (expected mps, free-mps or lp-text)")),
        }
    }
}

impl ModelFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ModelFormat::Mps | ModelFormat::FreeMps => "mps",
            ModelFormat::LpText => "lp",
        }
    }
}

const MPS_NAME_LEN: usize = 8;
const OBJ_ROW: &str = "OBJ";

/// Shortest decimal that parses back to the same `f64`; `-0` prints as `0`.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:?}")
    }
}

/// Fits `x` into the 12-character numeric fields of fixed MPS.
fn fixed_num(x: f64) -> String {
    let s = num(x);
    if s.len() <= 12 {
        return s;
    }
    for prec in (0..=8).rev() {
        let e = format!("{x:.prec$e}");
        if e.len() <= 12 {
            return e;
        }
    }
    s
}

fn check_name(name: &str) -> Result<(), SolverError> {
    let ok = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit() || c == '.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "_.!\"#$%&()/,;?@`'{}|~".contains(c));
    if ok {
        Ok(())
    } else {
        Err(SolverError::Format(format!("name `{name}` contains characters not allowed in model files")))
    }
}

/// Serializes `model`. Output depends only on the model, byte for byte.
pub fn emit_model(model: &MilpModel, format: ModelFormat) -> Result<String, SolverError> {
    let names: Vec<String> = model.variables.iter().map(|v| v.key.name()).collect();
    for n in names.iter().chain(model.constraints.iter().map(|r| &r.name)) {
        check_name(n)?;
    }
    match format {
        ModelFormat::LpText => Ok(emit_lp(model, &names)),
        ModelFormat::FreeMps => Ok(emit_mps(model, &names, false)),
        ModelFormat::Mps => {
            if let Some(n) =
                names.iter().chain(model.constraints.iter().map(|r| &r.name)).find(|n| n.len() > MPS_NAME_LEN)
            {
                return Err(SolverError::Format(format!(
                    "name `{n}` is longer than the {MPS_NAME_LEN} characters fixed MPS allows; use lp-text or free-mps"
                )));
            }
            Ok(emit_mps(model, &names, true))
        }
    }
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if a.is_sign_negative() { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", num(a.abs()), names[j]);
    }
}

fn emit_lp(model: &MilpModel, names: &[String]) -> String {
    let mut out = String::new();
    out.push_str("\\ gridshield model\nMinimize\n obj:");
    if model.objective.is_empty() && !names.is_empty() {
        let _ = write!(out, " + 0 {}", names[0]);
    }
    write_terms(&mut out, &model.objective, names);
    out.push_str("\nSubject To\n");
    for row in &model.constraints {
        let _ = write!(out, " {}:", row.name);
        if row.terms.is_empty() {
            match names.first() {
                Some(n) => {
                    let _ = write!(out, " + 0 {n}");
                }
                None => out.push_str(" 0"),
            }
        }
        write_terms(&mut out, &row.terms, names);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, n) in model.variables.iter().zip(names) {
        if v.lb == v.ub {
            let _ = writeln!(out, " {n} = {}", num(v.lb));
        } else {
            let _ = writeln!(out, " {} <= {n} <= {}", num(v.lb), num(v.ub));
        }
    }
    let binaries: Vec<&String> =
        model.variables.iter().zip(names).filter(|(v, _)| v.is_binary()).map(|(_, n)| n).collect();
    let generals: Vec<&String> =
        model.variables.iter().zip(names).filter(|(v, _)| v.integer && !v.is_binary()).map(|(_, n)| n).collect();
    for (header, list) in [("Binaries", binaries), ("Generals", generals)] {
        if !list.is_empty() {
            let _ = writeln!(out, "{header}");
            for n in list {
                let _ = writeln!(out, " {n}");
            }
        }
    }
    out.push_str("End\n");
    out
}

fn emit_mps(model: &MilpModel, names: &[String], fixed: bool) -> String {
    let f = |fields: &[&str]| -> String {
        if !fixed {
            return format!(" {}", fields.join(" "));
        }
        // columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
        let widths = [2usize, 8, 8, 12, 8, 12];
        let gaps = [1usize, 1, 2, 2, 3, 2];
        let mut s = String::new();
        for (i, fld) in fields.iter().enumerate() {
            s.push_str(&" ".repeat(gaps[i]));
            s.push_str(&format!("{fld:<w$}", w = widths[i]));
        }
        s.trim_end().to_string()
    };
    let n = |x: f64| if fixed { fixed_num(x) } else { num(x) };

    let mut by_col: Vec<Vec<(&str, f64)>> = vec![Vec::new(); names.len()];
    for &(j, c) in &model.objective {
        by_col[j].push((OBJ_ROW, c));
    }
    for row in &model.constraints {
        for &(j, a) in &row.terms {
            by_col[j].push((&row.name, a));
        }
    }

    let mut out = String::from("NAME          GRIDSHLD\nROWS\n");
    let _ = writeln!(out, "{}", f(&["N", OBJ_ROW]));
    for row in &model.constraints {
        let s = match row.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, "{}", f(&[s, &row.name]));
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in model.variables.iter().enumerate() {
        if v.integer != in_int {
            let kind = if v.integer { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "{}", f(&["", &format!("M{marker:07}"), "'MARKER'", "", kind]));
            marker += 1;
            in_int = v.integer;
        }
        if by_col[j].is_empty() {
            let _ = writeln!(out, "{}", f(&["", &names[j], OBJ_ROW, "0"]));
        }
        for &(r, a) in &by_col[j] {
            let _ = writeln!(out, "{}", f(&["", &names[j], r, &n(a)]));
        }
    }
    if in_int {
        let _ = writeln!(out, "{}", f(&["", &format!("M{marker:07}"), "'MARKER'", "", "'INTEND'"]));
    }
    out.push_str("RHS\n");
    for row in model.constraints.iter().filter(|r| r.rhs != 0.0) {
        let _ = writeln!(out, "{}", f(&["", "RHS", &row.name, &n(row.rhs)]));
    }
    out.push_str("BOUNDS\n");
    for (v, name) in model.variables.iter().zip(names) {
        let mut b = |kind: &str, val: Option<f64>| {
            let val = val.map(n).unwrap_or_default();
            let _ = writeln!(out, "{}", f(&[kind, "BND", name, &val]));
        };
        if v.lb == v.ub {
            b("FX", Some(v.lb));
            continue;
        }
        match (v.lb.is_finite(), v.ub.is_finite()) {
            (false, false) => b("FR", None),
            (false, true) => {
                b("MI", None);
                b("UP", Some(v.ub));
            }
            (true, ub_finite) => {
                if v.lb != 0.0 || v.ub < 0.0 {
                    b("LO", Some(v.lb));
                }
                if ub_finite {
                    b("UP", Some(v.ub));
                } else if v.integer {
                    b("PL", None);
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn parse_num(s: &str) -> Result<f64, SolverError> {
    match s {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| SolverError::Format(format!("bad number `{s}`"))),
    }
}

fn key_of(name: &str) -> Result<VarKey, SolverError> {
    VarKey::parse(name).ok_or_else(|| SolverError::Format(format!("unrecognized variable name `{name}`")))
}

/// Column and row builders shared by both readers.
#[derive(Default)]
struct Builder {
    index: VariableIndex,
    cols: HashMap<String, usize>,
    rows: Vec<Constraint>,
    row_pos: HashMap<String, usize>,
    objective: Vec<(usize, f64)>,
}

impl Builder {
    fn col(&mut self, name: &str) -> Result<usize, SolverError> {
        if let Some(&j) = self.cols.get(name) {
            return Ok(j);
        }
        let j = self.index.push(key_of(name)?, 0.0, f64::INFINITY, false);
        self.cols.insert(name.to_string(), j);
        Ok(j)
    }

    fn row(&mut self, name: &str, sense: Sense) -> Result<usize, SolverError> {
        if self.row_pos.contains_key(name) {
            return Err(SolverError::Format(format!("duplicate row `{name}`")));
        }
        let tag = tag_of_row_name(name).unwrap_or(Tag::Plumbing);
        self.rows.push(Constraint { tag, name: name.to_string(), terms: Vec::new(), sense, rhs: 0.0 });
        self.row_pos.insert(name.to_string(), self.rows.len() - 1);
        Ok(self.rows.len() - 1)
    }

    fn finish(self) -> MilpModel {
        let mut model = MilpModel::new(self.index);
        model.constraints = self.rows;
        for r in &mut model.constraints {
            r.terms.retain(|&(_, a)| a != 0.0);
        }
        model.objective = self.objective.into_iter().filter(|&(_, c)| c != 0.0).collect();
        model
    }
}

/// Reads a model written by [`emit_model`].
pub fn parse_model(text: &str, format: ModelFormat) -> Result<MilpModel, SolverError> {
    match format {
        ModelFormat::LpText => parse_lp(text),
        ModelFormat::Mps | ModelFormat::FreeMps => parse_mps(text),
    }
}

fn parse_lp(text: &str) -> Result<MilpModel, SolverError> {
    #[derive(PartialEq)]
    enum Sec {
        None,
        Obj,
        Rows,
        Bounds,
        Bin,
        Gen,
    }
    let mut b = Builder::default();
    let mut sec = Sec::None;
    let mut tokens: Vec<&str> = Vec::new();
    let mut bound_lines: Vec<&str> = Vec::new();
    let mut ints: Vec<(&str, bool)> = Vec::new();
    let mut obj_tokens: Vec<&str> = Vec::new();

    for line in text.lines() {
        let line = line.split('\\').next().unwrap_or("");
        let head = line.trim();
        match head.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => {
                sec = Sec::Obj;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                sec = Sec::Rows;
                continue;
            }
            "bounds" => {
                sec = Sec::Bounds;
                continue;
            }
            "binaries" | "binary" => {
                sec = Sec::Bin;
                continue;
            }
            "generals" | "general" => {
                sec = Sec::Gen;
                continue;
            }
            "end" => break,
            "" => continue,
            _ => {}
        }
        match sec {
            Sec::Obj => obj_tokens.extend(head.split_whitespace()),
            Sec::Rows => tokens.extend(head.split_whitespace()),
            Sec::Bounds => bound_lines.push(head),
            Sec::Bin => ints.extend(head.split_whitespace().map(|n| (n, true))),
            Sec::Gen => ints.extend(head.split_whitespace().map(|n| (n, false))),
            Sec::None => return Err(SolverError::Format(format!("unexpected line `{head}`"))),
        }
    }

    // bounds first so columns keep their emitted order
    for line in bound_lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            [n, "=", v] => {
                let j = b.col(n)?;
                let v = parse_num(v)?;
                let var = b.index.var_mut(j);
                var.lb = v;
                var.ub = v;
            }
            [lo, "<=", n, "<=", hi] => {
                let j = b.col(n)?;
                let (lo, hi) = (parse_num(lo)?, parse_num(hi)?);
                let var = b.index.var_mut(j);
                var.lb = lo;
                var.ub = hi;
            }
            [n, "free"] => {
                let j = b.col(n)?;
                let var = b.index.var_mut(j);
                var.lb = f64::NEG_INFINITY;
                var.ub = f64::INFINITY;
            }
            _ => return Err(SolverError::Format(format!("unsupported bound line `{line}`"))),
        }
    }
    // objective: `obj: + c x - c y ...`
    let mut it = obj_tokens.into_iter().peekable();
    if it.peek().is_some_and(|t| t.ends_with(':')) {
        it.next();
    }
    let rest: Vec<&str> = it.collect();
    let obj_terms = if rest == ["0"] { Vec::new() } else { read_terms(&mut b, &rest)? };
    for (j, c) in obj_terms {
        b.objective.push((j, c));
    }

    // rows: `name: terms sense rhs`
    let mut i = 0;
    while i < tokens.len() {
        let name = tokens[i]
            .strip_suffix(':')
            .ok_or_else(|| SolverError::Format(format!("expected row name, found `{}`", tokens[i])))?;
        i += 1;
        let start = i;
        while i < tokens.len() && !matches!(tokens[i], "<=" | ">=" | "=" | "=<" | "=>") {
            i += 1;
        }
        if i + 1 >= tokens.len() {
            return Err(SolverError::Format(format!("row `{name}` has no sense and right-hand side")));
        }
        let sense = match tokens[i] {
            "<=" | "=<" => Sense::Le,
            ">=" | "=>" => Sense::Ge,
            _ => Sense::Eq,
        };
        let terms = if tokens[start..i] == ["0"] { Vec::new() } else { read_terms(&mut b, &tokens[start..i])? };
        let rhs = parse_num(tokens[i + 1])?;
        let r = b.row(name, sense)?;
        b.rows[r].terms = terms;
        b.rows[r].rhs = rhs;
        i += 2;
    }

    for (n, _binary) in ints {
        let j = b.col(n)?;
        b.index.var_mut(j).integer = true;
    }
    Ok(b.finish())
}

fn read_terms(b: &mut Builder, toks: &[&str]) -> Result<Vec<(usize, f64)>, SolverError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let mut sign = 1.0;
        if matches!(toks[i], "+" | "-") {
            if toks[i] == "-" {
                sign = -1.0;
            }
            i += 1;
        }
        let (coef, name) = match (toks.get(i), toks.get(i + 1)) {
            (Some(c), Some(n)) if c.parse::<f64>().is_ok() => {
                i += 2;
                (c.parse::<f64>().unwrap(), *n)
            }
            (Some(n), _) => {
                i += 1;
                (1.0, *n)
            }
            _ => return Err(SolverError::Format("dangling sign in linear expression".into())),
        };
        out.push((b.col(name)?, sign * coef));
    }
    Ok(out)
}

fn parse_mps(text: &str) -> Result<MilpModel, SolverError> {
    let mut b = Builder::default();
    let mut sec = "";
    let mut obj_name = String::from(OBJ_ROW);
    let mut in_int = false;
    for line in text.lines() {
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        if !line.starts_with(' ') {
            sec = line.split_whitespace().next().unwrap_or("");
            if sec == "ENDATA" {
                break;
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match sec {
            "ROWS" => {
                let sense = match f[0] {
                    "N" => {
                        obj_name = f[1].to_string();
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(SolverError::Format(format!("unknown row type `{other}`"))),
                };
                b.row(f[1], sense)?;
            }
            "COLUMNS" => {
                if f.get(1) == Some(&"'MARKER'") {
                    in_int = f.get(2) == Some(&"'INTORG'");
                    continue;
                }
                let j = b.col(f[0])?;
                if in_int {
                    b.index.var_mut(j).integer = true;
                }
                for pair in f[1..].chunks(2) {
                    let [r, v] = pair else {
                        return Err(SolverError::Format(format!("odd COLUMNS entry `{line}`")));
                    };
                    let v = parse_num(v)?;
                    if *r == obj_name {
                        b.objective.push((j, v));
                    } else {
                        let ri = *b.row_pos.get(*r).ok_or_else(|| SolverError::Format(format!("unknown row `{r}`")))?;
                        b.rows[ri].terms.push((j, v));
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    let [r, v] = pair else {
                        return Err(SolverError::Format(format!("odd RHS entry `{line}`")));
                    };
                    let ri = *b.row_pos.get(*r).ok_or_else(|| SolverError::Format(format!("unknown row `{r}`")))?;
                    b.rows[ri].rhs = parse_num(v)?;
                }
            }
            "BOUNDS" => {
                let j = *b
                    .cols
                    .get(f[2])
                    .ok_or_else(|| SolverError::Format(format!("bound on unknown column `{}`", f[2])))?;
                let val = f.get(3).map(|v| parse_num(v)).transpose()?;
                let var = b.index.var_mut(j);
                match (f[0], val) {
                    ("FX", Some(v)) => {
                        var.lb = v;
                        var.ub = v;
                    }
                    ("LO", Some(v)) => var.lb = v,
                    ("UP", Some(v)) => var.ub = v,
                    ("MI", _) => var.lb = f64::NEG_INFINITY,
                    ("PL", _) => var.ub = f64::INFINITY,
                    ("FR", _) => {
                        var.lb = f64::NEG_INFINITY;
                        var.ub = f64::INFINITY;
                    }
                    ("BV", _) => {
                        var.lb = 0.0;
                        var.ub = 1.0;
                        var.integer = true;
                    }
                    (kind, _) => return Err(SolverError::Format(format!("unsupported bound type `{kind}`"))),
                }
            }
            "NAME" => {}
            other => return Err(SolverError::Format(format!("unsupported MPS section `{other}`"))),
        }
    }
    Ok(b.finish())
}
