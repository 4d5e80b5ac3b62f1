//! The benchmark mixed-integer model for the best defender schedule against
//! a fixed attacker mix, emitted as LP text for an external solver.
//!
//! Each defender `r` walks through `l_max` states `i`. Binary `s[r,i,v]`
//! places state `i` at node `v`; `w[r,i,v,u]` marks the move `v -> u`
//! between states `i` and `i + 1`; `tin`/`tout` bound the dwell interval
//! with `tout = tin + delta * k`; consecutive states are separated by the
//! shortest travel time. For every attacker state `j` of route `A`,
//! `alpha`/`beta` encode `tin <= t_A` and `t_A <= tout` with big-M rows,
//! `gamma` is their conjunction with the node match, and `z_A` may be 1 only
//! when some `gamma` is. The objective is `-sum_A (1 - z_A) y_A`, so the
//! defender utility is `1 + objective`.

pub mod lp;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use thiserror::Error;

use crate::evaluator::{intercepts, utility, DefenderSchedule, DefenderState};
use crate::network::{all_pairs_shortest, DistanceMatrix, Network, NodeId};
use crate::strategies::{AttackerStrategy, MixedStrategy};

/// Integrality and consistency tolerance for solver output.
pub const SOLUTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilpConfig {
    pub defenders: usize,
    pub l_max: usize,
    pub delta: u32,
    pub big_m: f64,
    /// Exclude exit nodes from defender states.
    pub strict_exit_domain: bool,
}

impl MilpConfig {
    /// One defender per police start, `l_max = M = t_max + 1`, `delta = 1`.
    pub fn for_network(net: &Network) -> Self {
        Self {
            defenders: net.police().len(),
            l_max: net.t_max() as usize + 1,
            delta: 1,
            big_m: net.t_max() as f64 + 1.0,
            strict_exit_domain: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MilpError {
    #[error("no node is available for defender states (every node is an exit)")]
    ExitOnlyNetwork,
    #[error("l_max must be at least 2, got {0}")]
    LMaxTooSmall(usize),
    #[error("big-M {big_m} must exceed the horizon {t_max}")]
    BigMTooSmall { big_m: f64, t_max: u32 },
    #[error("delta must be at least 1")]
    ZeroDelta,
    #[error("{requested} defenders requested but the network has {available} police starts")]
    NotEnoughStarts { requested: usize, available: usize },
    #[error("need at least one defender")]
    NoDefenders,
    #[error("police start {0} is outside the defender node domain")]
    StartOutsideDomain(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarGroup {
    S,
    Omega,
    TIn,
    TOut,
    K,
    Alpha,
    Beta,
    Gamma,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Var {
    pub name: String,
    pub group: VarGroup,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Le => lhs <= rhs + tol,
            Sense::Ge => lhs >= rhs - tol,
            Sense::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(f64, usize)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VariableCounts {
    pub s: usize,
    pub omega: usize,
    pub t_in: usize,
    pub t_out: usize,
    pub k: usize,
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub z: usize,
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    config: MilpConfig,
    t_max: u32,
    domain: Vec<NodeId>,
    starts: Vec<NodeId>,
    strategies: Vec<AttackerStrategy>,
    dist: DistanceMatrix,
    vars: Vec<Var>,
    by_name: HashMap<String, usize>,
    objective: Vec<(f64, usize)>,
    objective_constant: f64,
    rows: Vec<Row>,
}

pub fn s_name(r: usize, i: usize, v: NodeId) -> String {
    format!("s_r{r}_i{i}_v{v}")
}

pub fn w_name(r: usize, i: usize, v: NodeId, u: NodeId) -> String {
    format!("w_r{r}_i{i}_{v}_{u}")
}

pub fn tin_name(r: usize, i: usize) -> String {
    format!("tin_r{r}_i{i}")
}

pub fn tout_name(r: usize, i: usize) -> String {
    format!("tout_r{r}_i{i}")
}

pub fn k_name(r: usize, i: usize) -> String {
    format!("k_r{r}_i{i}")
}

pub fn alpha_name(a: usize, j: usize, r: usize, i: usize) -> String {
    format!("alpha_A{a}_j{j}_r{r}_i{i}")
}

pub fn beta_name(a: usize, j: usize, r: usize, i: usize) -> String {
    format!("beta_A{a}_j{j}_r{r}_i{i}")
}

pub fn gamma_name(a: usize, j: usize, r: usize, i: usize) -> String {
    format!("gamma_A{a}_j{j}_r{r}_i{i}")
}

pub fn z_name(a: usize) -> String {
    format!("z_A{a}")
}

impl MilpModel {
    fn add_var(&mut self, name: String, group: VarGroup, kind: VarKind, lower: f64, upper: f64) -> usize {
        let id = self.vars.len();
        self.by_name.insert(name.clone(), id);
        self.vars.push(Var {
            name,
            group,
            kind,
            lower,
            upper,
        });
        id
    }

    fn id(&self, name: &str) -> usize {
        self.by_name[name]
    }

    fn add_row(&mut self, name: String, terms: Vec<(f64, usize)>, sense: Sense, rhs: f64) {
        self.rows.push(Row {
            name,
            terms,
            sense,
            rhs,
        });
    }

    pub fn config(&self) -> &MilpConfig {
        &self.config
    }

    pub fn domain(&self) -> &[NodeId] {
        &self.domain
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var(&self, name: &str) -> Option<&Var> {
        self.by_name.get(name).map(|&i| &self.vars[i])
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn counts(&self) -> VariableCounts {
        let mut c = VariableCounts::default();
        for v in &self.vars {
            let slot = match v.group {
                VarGroup::S => &mut c.s,
                VarGroup::Omega => &mut c.omega,
                VarGroup::TIn => &mut c.t_in,
                VarGroup::TOut => &mut c.t_out,
                VarGroup::K => &mut c.k,
                VarGroup::Alpha => &mut c.alpha,
                VarGroup::Beta => &mut c.beta,
                VarGroup::Gamma => &mut c.gamma,
                VarGroup::Z => &mut c.z,
            };
            *slot += 1;
        }
        c
    }

    /// Objective value of a full assignment (missing variables count as 0).
    pub fn objective_value(&self, assignment: &BTreeMap<String, f64>) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .map(|&(c, v)| c * assignment.get(&self.vars[v].name).copied().unwrap_or(0.0))
                .sum::<f64>()
    }

    /// Rows violated by `assignment`, by name.
    pub fn violated_rows(&self, assignment: &BTreeMap<String, f64>, tol: f64) -> Vec<String> {
        self.rows
            .iter()
            .filter(|row| {
                let lhs: f64 = row
                    .terms
                    .iter()
                    .map(|&(c, v)| c * assignment.get(&self.vars[v].name).copied().unwrap_or(0.0))
                    .sum();
                !row.sense.holds(lhs, row.rhs, tol)
            })
            .map(|row| row.name.clone())
            .collect()
    }

    /// Variable assignment that realizes the given schedules (one per
    /// defender). Waits are stretched so that consecutive states are exactly a
    /// shortest travel time apart, short schedules are padded with zero-length
    /// stays at the horizon, and indicator variables are set to the values the
    /// schedule implies.
    pub fn encode_schedules(&self, schedules: &[DefenderSchedule]) -> Result<BTreeMap<String, f64>, EncodeError> {
        if schedules.len() != self.starts.len() {
            return Err(EncodeError::DefenderCount {
                expected: self.starts.len(),
                found: schedules.len(),
            });
        }
        let l_max = self.config.l_max;
        let t_max = self.t_max;
        let mut out: BTreeMap<String, f64> = self.vars.iter().map(|v| (v.name.clone(), 0.0)).collect();

        for (r, sched) in schedules.iter().enumerate() {
            let mut states = sched.states.clone();
            if states.is_empty() || states.len() > l_max {
                return Err(EncodeError::StateCount {
                    defender: r,
                    states: states.len(),
                });
            }
            if states[0].v != self.starts[r] || states[0].t_in != 0 {
                return Err(EncodeError::WrongStart(r));
            }
            for i in 0..states.len() - 1 {
                let d = self
                    .dist
                    .get(states[i].v, states[i + 1].v)
                    .ok_or(EncodeError::Unreachable {
                        defender: r,
                        state: i + 1,
                    })?;
                let leave = states[i + 1]
                    .t_in
                    .checked_sub(d)
                    .filter(|&t| t >= states[i].t_in)
                    .ok_or(EncodeError::Unreachable {
                        defender: r,
                        state: i + 1,
                    })?;
                states[i].t_out = leave;
            }
            let last = states.last_mut().unwrap();
            last.t_out = t_max;
            let pad = DefenderState::new(last.v, t_max, t_max);
            states.resize(l_max, pad);

            for (i, st) in states.iter().enumerate() {
                if !self.domain.contains(&st.v) {
                    return Err(EncodeError::OutsideDomain {
                        defender: r,
                        node: st.v,
                    });
                }
                let dwell = st.t_out - st.t_in;
                if dwell % self.config.delta != 0 {
                    return Err(EncodeError::Granularity { defender: r, state: i });
                }
                out.insert(s_name(r, i, st.v), 1.0);
                out.insert(tin_name(r, i), st.t_in as f64);
                out.insert(tout_name(r, i), st.t_out as f64);
                out.insert(k_name(r, i), (dwell / self.config.delta) as f64);
                if i + 1 < l_max {
                    out.insert(w_name(r, i, st.v, states[i + 1].v), 1.0);
                }
                for (a, strat) in self.strategies.iter().enumerate() {
                    for (j, at) in strat.states.iter().enumerate() {
                        let alpha = st.t_in <= at.t;
                        let beta = at.t <= st.t_out;
                        let gamma = alpha && beta && at.v == st.v;
                        out.insert(alpha_name(a, j, r, i), alpha as u8 as f64);
                        out.insert(beta_name(a, j, r, i), beta as u8 as f64);
                        out.insert(gamma_name(a, j, r, i), gamma as u8 as f64);
                        if gamma {
                            out.insert(z_name(a), 1.0);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("model has {expected} defenders, got {found} schedules")]
    DefenderCount { expected: usize, found: usize },
    #[error("defender {defender}: {states} states do not fit the model")]
    StateCount { defender: usize, states: usize },
    #[error("defender {0} does not start at its police start at time 0")]
    WrongStart(usize),
    #[error("defender {defender}: state {state} cannot be reached in time")]
    Unreachable { defender: usize, state: usize },
    #[error("defender {defender} visits node {node} outside the state domain")]
    OutsideDomain { defender: usize, node: NodeId },
    #[error("defender {defender}: dwell of state {state} is not a multiple of delta")]
    Granularity { defender: usize, state: usize },
}

pub fn build_milp(net: &Network, mix: &MixedStrategy, config: MilpConfig) -> Result<MilpModel, MilpError> {
    let t_max = net.t_max();
    if config.defenders == 0 {
        return Err(MilpError::NoDefenders);
    }
    if config.defenders > net.police().len() {
        return Err(MilpError::NotEnoughStarts {
            requested: config.defenders,
            available: net.police().len(),
        });
    }
    if config.l_max < 2 {
        return Err(MilpError::LMaxTooSmall(config.l_max));
    }
    if config.big_m <= t_max as f64 {
        return Err(MilpError::BigMTooSmall {
            big_m: config.big_m,
            t_max,
        });
    }
    if config.delta == 0 {
        return Err(MilpError::ZeroDelta);
    }
    let domain: Vec<NodeId> = net
        .nodes()
        .iter()
        .copied()
        .filter(|&v| !(config.strict_exit_domain && net.is_exit(v)))
        .collect();
    let non_exit = net.nodes().iter().filter(|&&v| !net.is_exit(v)).count();
    if non_exit == 0 || domain.is_empty() {
        return Err(MilpError::ExitOnlyNetwork);
    }
    let starts = net.police()[..config.defenders].to_vec();
    if let Some(&s) = starts.iter().find(|s| !domain.contains(s)) {
        return Err(MilpError::StartOutsideDomain(s));
    }

    let mut model = MilpModel {
        config,
        t_max,
        domain: domain.clone(),
        starts: starts.clone(),
        strategies: mix.strategies().to_vec(),
        dist: all_pairs_shortest(net),
        vars: Vec::new(),
        by_name: HashMap::new(),
        objective: Vec::new(),
        objective_constant: 0.0,
        rows: Vec::new(),
    };
    let l_max = config.l_max;
    let m = config.big_m;
    let tm = t_max as f64;

    // variables
    for r in 0..config.defenders {
        for i in 0..l_max {
            for &v in &domain {
                model.add_var(s_name(r, i, v), VarGroup::S, VarKind::Binary, 0.0, 1.0);
            }
        }
        for i in 0..l_max - 1 {
            for &v in &domain {
                for &u in &domain {
                    if model.dist.get(v, u).is_some() {
                        model.add_var(w_name(r, i, v, u), VarGroup::Omega, VarKind::Binary, 0.0, 1.0);
                    }
                }
            }
        }
        for i in 0..l_max {
            model.add_var(tin_name(r, i), VarGroup::TIn, VarKind::Continuous, 0.0, tm);
            model.add_var(tout_name(r, i), VarGroup::TOut, VarKind::Continuous, 0.0, tm);
            let k_hi = (t_max / config.delta) as f64;
            model.add_var(k_name(r, i), VarGroup::K, VarKind::Integer, 0.0, k_hi);
        }
    }
    for (a, strat) in mix.strategies().iter().enumerate() {
        for j in 0..strat.states.len() {
            for r in 0..config.defenders {
                for i in 0..l_max {
                    model.add_var(alpha_name(a, j, r, i), VarGroup::Alpha, VarKind::Binary, 0.0, 1.0);
                    model.add_var(beta_name(a, j, r, i), VarGroup::Beta, VarKind::Binary, 0.0, 1.0);
                    model.add_var(gamma_name(a, j, r, i), VarGroup::Gamma, VarKind::Binary, 0.0, 1.0);
                }
            }
        }
    }
    for a in 0..mix.len() {
        model.add_var(z_name(a), VarGroup::Z, VarKind::Binary, 0.0, 1.0);
    }

    // objective: -sum (1 - z_A) y_A
    model.objective = mix
        .probs()
        .iter()
        .enumerate()
        .map(|(a, &y)| (y, model.id(&z_name(a))))
        .collect();
    model.objective_constant = -mix.probs().iter().sum::<f64>();

    #[allow(clippy::needless_range_loop)]
    for r in 0..config.defenders {
        // initial location, one node per state
        let start = model.id(&s_name(r, 0, starts[r]));
        model.add_row(format!("init_r{r}"), vec![(1.0, start)], Sense::Eq, 1.0);
        for i in 0..l_max {
            let terms = domain.iter().map(|&v| (1.0, model.id(&s_name(r, i, v)))).collect();
            model.add_row(format!("one_r{r}_i{i}"), terms, Sense::Eq, 1.0);
        }
        // move indicators
        for i in 0..l_max - 1 {
            for &v in &domain {
                for &u in &domain {
                    let sv = model.id(&s_name(r, i, v));
                    let su = model.id(&s_name(r, i + 1, u));
                    if model.dist.get(v, u).is_some() {
                        let w = model.id(&w_name(r, i, v, u));
                        let tag = format!("r{r}_i{i}_{v}_{u}");
                        model.add_row(format!("wfrom_{tag}"), vec![(1.0, w), (-1.0, sv)], Sense::Le, 0.0);
                        model.add_row(format!("wto_{tag}"), vec![(1.0, w), (-1.0, su)], Sense::Le, 0.0);
                        model.add_row(
                            format!("wboth_{tag}"),
                            vec![(1.0, w), (-1.0, sv), (-1.0, su)],
                            Sense::Ge,
                            -1.0,
                        );
                    } else {
                        model.add_row(
                            format!("noreach_r{r}_i{i}_{v}_{u}"),
                            vec![(1.0, sv), (1.0, su)],
                            Sense::Le,
                            1.0,
                        );
                    }
                }
            }
        }
        // timing
        let tin0 = model.id(&tin_name(r, 0));
        model.add_row(format!("tstart_r{r}"), vec![(1.0, tin0)], Sense::Eq, 0.0);
        let tend = model.id(&tout_name(r, l_max - 1));
        model.add_row(format!("tend_r{r}"), vec![(1.0, tend)], Sense::Eq, tm);
        for i in 0..l_max {
            let (tin, tout, k) = (
                model.id(&tin_name(r, i)),
                model.id(&tout_name(r, i)),
                model.id(&k_name(r, i)),
            );
            model.add_row(
                format!("dwell_r{r}_i{i}"),
                vec![(1.0, tout), (-1.0, tin), (-(config.delta as f64), k)],
                Sense::Eq,
                0.0,
            );
        }
        for i in 0..l_max - 1 {
            let mut terms = vec![(1.0, model.id(&tin_name(r, i + 1))), (-1.0, model.id(&tout_name(r, i)))];
            for &v in &domain {
                for &u in &domain {
                    if let Some(d) = model.dist.get(v, u).filter(|&d| d > 0) {
                        terms.push((-(d as f64), model.id(&w_name(r, i, v, u))));
                    }
                }
            }
            model.add_row(format!("travel_r{r}_i{i}"), terms, Sense::Eq, 0.0);
        }
    }

    // interception
    for (a, strat) in mix.strategies().iter().enumerate() {
        let mut cover = vec![(1.0, model.id(&z_name(a)))];
        for (j, at) in strat.states.iter().enumerate() {
            let ta = at.t as f64;
            for r in 0..config.defenders {
                for i in 0..l_max {
                    let tag = format!("A{a}_j{j}_r{r}_i{i}");
                    let alpha = model.id(&alpha_name(a, j, r, i));
                    let beta = model.id(&beta_name(a, j, r, i));
                    let gamma = model.id(&gamma_name(a, j, r, i));
                    let tin = model.id(&tin_name(r, i));
                    let tout = model.id(&tout_name(r, i));
                    model.add_row(format!("arrlo_{tag}"), vec![(1.0, tin), (m, alpha)], Sense::Ge, ta);
                    model.add_row(format!("arrhi_{tag}"), vec![(1.0, tin), (m, alpha)], Sense::Le, ta + m);
                    model.add_row(format!("deplo_{tag}"), vec![(1.0, tout), (-m, beta)], Sense::Ge, ta - m);
                    model.add_row(format!("dephi_{tag}"), vec![(1.0, tout), (-m, beta)], Sense::Le, ta);
                    let s_here = model.by_name.get(&s_name(r, i, at.v)).copied();
                    let mut up = vec![(3.0, gamma), (-1.0, alpha), (-1.0, beta)];
                    let mut lo = vec![(1.0, gamma), (-1.0, alpha), (-1.0, beta)];
                    if let Some(s) = s_here {
                        up.push((-1.0, s));
                        lo.push((-1.0, s));
                    }
                    model.add_row(format!("gup_{tag}"), up, Sense::Le, 0.0);
                    model.add_row(format!("glo_{tag}"), lo, Sense::Ge, -2.0);
                    cover.push((-1.0, gamma));
                }
            }
        }
        model.add_row(format!("cover_A{a}"), cover, Sense::Le, 0.0);
    }
    Ok(model)
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Terms per output line before a row is wrapped.
const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: &[(f64, &str)]) {
    for (n, &(c, name)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        if n == 0 && sign == "+" {
            if mag == 1.0 {
                let _ = write!(out, " {name}");
            } else {
                let _ = write!(out, " {} {name}", fmt_num(mag));
            }
        } else if mag == 1.0 {
            let _ = write!(out, " {sign} {name}");
        } else {
            let _ = write!(out, " {sign} {} {name}", fmt_num(mag));
        }
    }
}

/// LP-format text of the model. Output is deterministic.
pub fn emit_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ defender interdiction model\n");
    out.push_str("Maximize\n obj:");
    let obj: Vec<(f64, &str)> = model
        .objective
        .iter()
        .map(|&(c, v)| (c, model.vars[v].name.as_str()))
        .collect();
    write_terms(&mut out, &obj);
    if model.objective_constant != 0.0 {
        let sign = if model.objective_constant < 0.0 { "-" } else { "+" };
        let _ = write!(out, " {sign} {}", fmt_num(model.objective_constant.abs()));
    }
    out.push('\n');

    if !model.rows.is_empty() {
        out.push_str("Subject To\n");
        for row in &model.rows {
            let _ = write!(out, " {}:", row.name);
            let terms: Vec<(f64, &str)> = row
                .terms
                .iter()
                .map(|&(c, v)| (c, model.vars[v].name.as_str()))
                .collect();
            write_terms(&mut out, &terms);
            let _ = writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
        }
    }

    let bounded: Vec<&Var> = model.vars.iter().filter(|v| v.kind != VarKind::Binary).collect();
    if !bounded.is_empty() {
        out.push_str("Bounds\n");
        for v in bounded {
            let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
        }
    }
    for (header, kind) in [("Generals", VarKind::Integer), ("Binaries", VarKind::Binary)] {
        let names: Vec<&str> = model
            .vars
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header}");
        for chunk in names.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

/// Solution text in the `objective <value>` / `<name> <value>` format.
pub fn solution_text(model: &MilpModel, assignment: &BTreeMap<String, f64>) -> String {
    let mut out = format!("objective {}\n", model.objective_value(assignment));
    for v in &model.vars {
        let _ = writeln!(out, "{} {}", v.name, assignment.get(&v.name).copied().unwrap_or(0.0));
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum SolutionError {
    #[error("line {line}: expected `<name> <value>`")]
    Syntax { line: usize },
    #[error("solution has no `objective` line")]
    MissingObjective,
    #[error("variable {0} is not part of the model")]
    UnknownVariable(String),
    #[error("variable {0} is missing from the solution")]
    MissingVariable(String),
    #[error("variable {name} = {value} is not integral")]
    Integrality { name: String, value: f64 },
    #[error("defender {defender}, state {state}: no node is occupied")]
    NoNode { defender: usize, state: usize },
    #[error("defender {defender}, state {state}: more than one node is occupied")]
    SeveralNodes { defender: usize, state: usize },
    #[error("defender {0} does not start at its police start")]
    WrongStart(usize),
    #[error("z_A{strategy} = {z} but intercepted = {intercepted} (model or solver defect)")]
    InterceptMismatch {
        strategy: usize,
        z: bool,
        intercepted: bool,
    },
    #[error("reported objective {reported} differs from {recomputed} implied by z")]
    ObjectiveMismatch { reported: f64, recomputed: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub objective: f64,
    /// `1 + objective`.
    pub utility: f64,
    pub schedules: Vec<DefenderSchedule>,
    pub z: Vec<bool>,
}

fn integral(name: &str, value: f64) -> Result<i64, SolutionError> {
    let r = value.round();
    if (value - r).abs() > SOLUTION_TOL {
        return Err(SolutionError::Integrality {
            name: name.to_string(),
            value,
        });
    }
    Ok(r as i64)
}

/// Read solver output back into schedules and cross-check it against the
/// interception semantics.
pub fn parse_solution(model: &MilpModel, mix: &MixedStrategy, text: &str) -> Result<MilpSolution, SolutionError> {
    let mut objective = None;
    let mut values: HashMap<&str, f64> = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(SolutionError::Syntax { line: n + 1 });
        };
        let value: f64 = value.parse().map_err(|_| SolutionError::Syntax { line: n + 1 })?;
        if name == "objective" {
            objective = Some(value);
        } else if model.by_name.contains_key(name) {
            values.insert(name, value);
        } else {
            return Err(SolutionError::UnknownVariable(name.to_string()));
        }
    }
    let objective = objective.ok_or(SolutionError::MissingObjective)?;
    for v in &model.vars {
        let Some(&x) = values.get(v.name.as_str()) else {
            return Err(SolutionError::MissingVariable(v.name.clone()));
        };
        if v.kind != VarKind::Continuous {
            integral(&v.name, x)?;
        }
    }
    let get = |name: &str| values[name];

    let mut schedules = Vec::with_capacity(model.starts.len());
    for (r, &start) in model.starts.iter().enumerate() {
        let mut states: Vec<DefenderState> = Vec::new();
        for i in 0..model.config.l_max {
            let occupied: Vec<NodeId> = model
                .domain
                .iter()
                .copied()
                .filter(|&v| get(&s_name(r, i, v)) > 0.5)
                .collect();
            let v = match occupied.as_slice() {
                [] => return Err(SolutionError::NoNode { defender: r, state: i }),
                [v] => *v,
                _ => return Err(SolutionError::SeveralNodes { defender: r, state: i }),
            };
            if i == 0 && v != start {
                return Err(SolutionError::WrongStart(r));
            }
            let t_in = integral(&tin_name(r, i), get(&tin_name(r, i)))?.max(0) as u32;
            let t_out = integral(&tout_name(r, i), get(&tout_name(r, i)))?.max(0) as u32;
            match states.last_mut() {
                Some(last) if last.v == v => last.t_out = t_out,
                _ => states.push(DefenderState::new(v, t_in, t_out)),
            }
        }
        schedules.push(DefenderSchedule { states });
    }

    let mut z = Vec::with_capacity(mix.len());
    for (a, strat) in mix.strategies().iter().enumerate() {
        let za = get(&z_name(a)) > 0.5;
        let caught = schedules.iter().any(|s| intercepts(s, strat));
        if za != caught {
            return Err(SolutionError::InterceptMismatch {
                strategy: a,
                z: za,
                intercepted: caught,
            });
        }
        z.push(za);
    }
    let recomputed = -mix
        .probs()
        .iter()
        .zip(&z)
        .filter(|(_, &za)| !za)
        .map(|(p, _)| p)
        .sum::<f64>();
    if (recomputed - objective).abs() > SOLUTION_TOL {
        return Err(SolutionError::ObjectiveMismatch {
            reported: objective,
            recomputed,
        });
    }
    debug_assert!((1.0 + objective - utility(&schedules, mix)).abs() <= SOLUTION_TOL);
    Ok(MilpSolution {
        objective,
        utility: 1.0 + objective,
        schedules,
        z,
    })
}
