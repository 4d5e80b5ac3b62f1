//! Reader for the LP text subset written by [`super::emit_lp`].
//!
//! Handles objective and constraint rows spread over several lines,
//! `\` comments, the `Bounds`, `Generals` and `Binaries` sections, and a
//! constant term in the objective. This is enough to re-read emitted models
//! and check assignments against the rows as written.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::Sense;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing objective section")]
    NoObjective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub maximize: bool,
    pub objective: Vec<(f64, String)>,
    pub objective_constant: f64,
    pub rows: Vec<LpRow>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub generals: Vec<String>,
    pub binaries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Name(String),
    Label(String),
    Plus,
    Minus,
    Sense(Sense),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_header(line: &str) -> Option<(Section, bool)> {
    let lower = line.trim().to_ascii_lowercase();
    let s = match lower.as_str() {
        "maximize" | "maximise" | "maximum" | "max" => (Section::Objective, true),
        "minimize" | "minimise" | "minimum" | "min" => (Section::Objective, false),
        "subject to" | "such that" | "st" | "s.t." => (Section::Constraints, false),
        "bounds" | "bound" => (Section::Bounds, false),
        "generals" | "general" | "gen" => (Section::Generals, false),
        "binaries" | "binary" | "bin" => (Section::Binaries, false),
        "end" => (Section::End, false),
        _ => return None,
    };
    Some(s)
}

fn tokenize(text: &str, line: usize) -> Result<Vec<(Token, usize)>, LpParseError> {
    let err = |message: String| LpParseError::Syntax { line, message };
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' {
            out.push((Token::Plus, line));
            i += 1;
        } else if c == '-' {
            out.push((Token::Minus, line));
            i += 1;
        } else if matches!(c, '<' | '>' | '=') {
            let start = i;
            while i < chars.len() && matches!(chars[i], '<' | '>' | '=') {
                i += 1;
            }
            let op: String = chars[start..i].iter().collect();
            let sense = match op.as_str() {
                "<=" | "=<" | "<" => Sense::Le,
                ">=" | "=>" | ">" => Sense::Ge,
                "=" => Sense::Eq,
                _ => return Err(err(format!("bad operator {op}"))),
            };
            out.push((Token::Sense(sense), line));
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j], '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let x = s.parse().map_err(|_| err(format!("bad number {s}")))?;
            out.push((Token::Num(x), line));
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '+' | '-' | '<' | '>' | '=' | ':')
            {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            if name.is_empty() {
                return Err(err(format!("unexpected character {c:?}")));
            }
            if i < chars.len() && chars[i] == ':' {
                i += 1;
                out.push((Token::Label(name), line));
            } else {
                out.push((Token::Name(name), line));
            }
        }
    }
    Ok(out)
}

/// Parses `[+|-] [coef] name ...` terms (and bare constants) until a sense
/// token, a label or the end of input.
fn parse_expr(tokens: &[(Token, usize)], pos: &mut usize) -> Result<(Vec<(f64, String)>, f64), LpParseError> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    loop {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some((t, _)) = tokens.get(*pos) {
            match t {
                Token::Plus => saw_sign = true,
                Token::Minus => {
                    sign = -sign;
                    saw_sign = true
                }
                _ => break,
            }
            *pos += 1;
        }
        match tokens.get(*pos) {
            Some((Token::Num(x), _)) => {
                *pos += 1;
                if let Some((Token::Name(n), _)) = tokens.get(*pos) {
                    terms.push((sign * x, n.clone()));
                    *pos += 1;
                } else {
                    constant += sign * x;
                }
            }
            Some((Token::Name(n), _)) => {
                terms.push((sign, n.clone()));
                *pos += 1;
            }
            Some((_, line)) if saw_sign => {
                return Err(LpParseError::Syntax {
                    line: *line,
                    message: "dangling sign".into(),
                })
            }
            _ => return Ok((terms, constant)),
        }
    }
}

fn parse_rows(tokens: &[(Token, usize)]) -> Result<Vec<LpRow>, LpParseError> {
    let mut rows = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        let line = tokens[pos].1;
        let name = match &tokens[pos].0 {
            Token::Label(l) => {
                pos += 1;
                l.clone()
            }
            _ => format!("R{}", rows.len()),
        };
        let (terms, lhs_const) = parse_expr(tokens, &mut pos)?;
        let Some((Token::Sense(sense), _)) = tokens.get(pos) else {
            return Err(LpParseError::Syntax {
                line,
                message: format!("row {name} has no comparison"),
            });
        };
        pos += 1;
        let mut sign = 1.0;
        while let Some((Token::Plus | Token::Minus, _)) = tokens.get(pos) {
            if tokens[pos].0 == Token::Minus {
                sign = -sign;
            }
            pos += 1;
        }
        let Some((Token::Num(rhs), _)) = tokens.get(pos) else {
            return Err(LpParseError::Syntax {
                line,
                message: format!("row {name} needs a constant right-hand side"),
            });
        };
        pos += 1;
        let rhs = sign * rhs;
        rows.push(LpRow {
            name,
            terms,
            sense: *sense,
            rhs: rhs - lhs_const,
        });
    }
    Ok(rows)
}

fn parse_bound(line: &str, n: usize, bounds: &mut BTreeMap<String, (f64, f64)>) -> Result<(), LpParseError> {
    let err = |m: &str| LpParseError::Syntax {
        line: n,
        message: m.to_string(),
    };
    let toks = tokenize(line, n)?;
    // fold signs into numbers
    let mut items: Vec<Token> = Vec::new();
    let mut neg = false;
    for (t, _) in toks {
        match t {
            Token::Minus => neg = !neg,
            Token::Plus => {}
            Token::Num(x) => {
                items.push(Token::Num(if neg { -x } else { x }));
                neg = false;
            }
            other => items.push(other),
        }
    }
    let num = |t: &Token| match t {
        Token::Num(x) => Some(*x),
        Token::Name(n) if n.eq_ignore_ascii_case("inf") || n.eq_ignore_ascii_case("infinity") => {
            Some(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
        }
        _ => None,
    };
    match items.as_slice() {
        [Token::Name(x), Token::Name(f)] if f.eq_ignore_ascii_case("free") => {
            bounds.insert(x.clone(), (f64::NEG_INFINITY, f64::INFINITY));
        }
        [lo, Token::Sense(Sense::Le), Token::Name(x), Token::Sense(Sense::Le), hi] => {
            let (lo, hi) = (
                num(lo).ok_or_else(|| err("bad lower bound"))?,
                num(hi).ok_or_else(|| err("bad upper bound"))?,
            );
            bounds.insert(x.clone(), (lo, hi));
        }
        [Token::Name(x), Token::Sense(s), v] => {
            let v = num(v).ok_or_else(|| err("bad bound value"))?;
            let entry = bounds.entry(x.clone()).or_insert((0.0, f64::INFINITY));
            match s {
                Sense::Le => entry.1 = v,
                Sense::Ge => entry.0 = v,
                Sense::Eq => *entry = (v, v),
            }
        }
        _ => return Err(err("unrecognized bound")),
    }
    Ok(())
}

pub fn parse_lp(text: &str) -> Result<LpProblem, LpParseError> {
    let mut problem = LpProblem::default();
    let mut section = Section::None;
    let mut seen_objective = false;
    let mut objective_tokens = Vec::new();
    let mut row_tokens = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let n = n + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some((s, maximize)) = section_header(line) {
            if s == Section::Objective {
                problem.maximize = maximize;
                seen_objective = true;
            }
            section = s;
            continue;
        }
        match section {
            Section::Objective => objective_tokens.extend(tokenize(line, n)?),
            Section::Constraints => row_tokens.extend(tokenize(line, n)?),
            Section::Bounds => parse_bound(line, n, &mut problem.bounds)?,
            Section::Generals => problem.generals.extend(line.split_whitespace().map(String::from)),
            Section::Binaries => problem.binaries.extend(line.split_whitespace().map(String::from)),
            Section::End => {}
            Section::None => {
                return Err(LpParseError::Syntax {
                    line: n,
                    message: "content before the objective section".into(),
                })
            }
        }
    }
    if !seen_objective {
        return Err(LpParseError::NoObjective);
    }
    let mut pos = 0;
    if let Some((Token::Label(_), _)) = objective_tokens.first() {
        pos = 1;
    }
    let (terms, constant) = parse_expr(&objective_tokens, &mut pos)?;
    problem.objective = terms;
    problem.objective_constant = constant;
    problem.rows = parse_rows(&row_tokens)?;
    Ok(problem)
}

impl LpProblem {
    /// Every variable name mentioned anywhere in the problem.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.objective.iter().map(|(_, n)| n.clone()).collect();
        for r in &self.rows {
            out.extend(r.terms.iter().map(|(_, n)| n.clone()));
        }
        out.extend(self.bounds.keys().cloned());
        out.extend(self.generals.iter().cloned());
        out.extend(self.binaries.iter().cloned());
        out
    }

    pub fn objective_value(&self, x: &BTreeMap<String, f64>) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .map(|(c, n)| c * x.get(n).copied().unwrap_or(0.0))
                .sum::<f64>()
    }

    /// Names of rows, bounds and integrality restrictions violated by `x`.
    /// Variables absent from `x` are taken as 0.
    pub fn violations(&self, x: &BTreeMap<String, f64>, tol: f64) -> Vec<String> {
        let val = |n: &str| x.get(n).copied().unwrap_or(0.0);
        let mut out = Vec::new();
        for r in &self.rows {
            let lhs: f64 = r.terms.iter().map(|(c, n)| c * val(n)).sum();
            if !r.sense.holds(lhs, r.rhs, tol) {
                out.push(r.name.clone());
            }
        }
        for (n, &(lo, hi)) in &self.bounds {
            let v = val(n);
            if v < lo - tol || v > hi + tol {
                out.push(format!("bound:{n}"));
            }
        }
        for n in &self.generals {
            let v = val(n);
            if (v - v.round()).abs() > tol {
                out.push(format!("integer:{n}"));
            }
        }
        for n in &self.binaries {
            let v = val(n);
            if (v - v.round()).abs() > tol || !(-tol..=1.0 + tol).contains(&v) {
                out.push(format!("binary:{n}"));
            }
        }
        out
    }
}
