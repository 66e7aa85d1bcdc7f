//! Oracles and the depth-budgeted query semantics.
//!
//! A query vertex spawns a copy of the current state with tapes 0-2 and
//! their heads kept and the output tape erased, runs it with one less
//! unit of query depth, feeds the accepted output to the oracle, writes
//! the selected answer onto work tape 2 with its head reset, and resumes
//! at the continuation successor. With no remaining depth a query vertex
//! acts as a distinguished reject.
//!
//! Fuel is a single budget shared across all nesting levels, which keeps
//! the total work of nested spawning bounded.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::machine::{run, Exec, MachineGraph, Output, RunStatus, StepEvent};
use crate::seq::{interleave_pair, lambda_pack, lambda_unpack, split_pair, EvSeq, SeqError, SeqTuple, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("query {query} lies outside the domain of oracle {oracle}")]
    OracleDomainError { oracle: String, query: EvSeq },
    #[error("oracle machine {oracle} did not accept within its fuel")]
    OracleDivergence { oracle: String },
    #[error("query computation at {site} did not accept: {status}")]
    QueryDiverged { site: String, status: RunStatus },
    #[error("oracle {oracle} produced an empty answer set")]
    EmptyAnswerSet { oracle: String },
    #[error("coproduct index {index} out of range for {len} components")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sequence is not unary-decodable: {reason}")]
    NotUnaryDecodable { reason: String },
    #[error("machine used as an oracle must be query-free: {name}")]
    MachineOracleHasQueries { name: String },
    #[error(transparent)]
    Seq(#[from] SeqError),
}

type AnswerFn = dyn Fn(&EvSeq) -> Result<Vec<EvSeq>, OracleError> + Send + Sync;
type DomainFn = dyn Fn(&EvSeq) -> bool + Send + Sync;

/// A named multi-valued map on sequences. Answer sets are finite,
/// nonempty, and kept sorted; the selection policy picks the least
/// answer in the (length-lexicographic) canonical order.
#[derive(Clone)]
pub struct Oracle {
    name: String,
    domain: Arc<DomainFn>,
    answers: Arc<AnswerFn>,
    single_valued: bool,
    range_finite: bool,
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("name", &self.name)
            .field("single_valued", &self.single_valued)
            .field("range_finite", &self.range_finite)
            .finish()
    }
}

impl Oracle {
    pub fn new(
        name: impl Into<String>,
        single_valued: bool,
        range_finite: bool,
        domain: impl Fn(&EvSeq) -> bool + Send + Sync + 'static,
        answers: impl Fn(&EvSeq) -> Result<Vec<EvSeq>, OracleError> + Send + Sync + 'static,
    ) -> Self {
        Oracle {
            name: name.into(),
            domain: Arc::new(domain),
            answers: Arc::new(answers),
            single_valued,
            range_finite,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn single_valued(&self) -> bool {
        self.single_valued
    }

    pub fn range_finite(&self) -> bool {
        self.range_finite
    }

    pub fn in_domain(&self, x: &EvSeq) -> bool {
        (self.domain)(x)
    }

    /// The full (finite, sorted, deduplicated) answer set for `x`.
    pub fn answer_set(&self, x: &EvSeq) -> Result<Vec<EvSeq>, OracleError> {
        if !self.in_domain(x) {
            return Err(OracleError::OracleDomainError {
                oracle: self.name.clone(),
                query: x.clone(),
            });
        }
        let mut set = (self.answers)(x)?;
        set.sort();
        set.dedup();
        if set.is_empty() {
            return Err(OracleError::EmptyAnswerSet {
                oracle: self.name.clone(),
            });
        }
        Ok(set)
    }

    /// The deterministic selection: least answer of the set.
    pub fn select(&self, x: &EvSeq) -> Result<EvSeq, OracleError> {
        Ok(self.answer_set(x)?.into_iter().next().unwrap())
    }
}

/// LPO: maps the all-zero binary sequence to itself and every other
/// binary sequence to `10^N`.
pub fn lpo() -> Oracle {
    Oracle::new(
        "lpo",
        true,
        true,
        |x| x.is_binary(),
        |x| {
            Ok(vec![if x.is_all_zero() {
                EvSeq::zeros()
            } else {
                EvSeq::make(vec![1], 0)
            }])
        },
    )
}

/// Identity oracle; answers the query itself.
pub fn identity_oracle() -> Oracle {
    Oracle::new("id", true, false, |_| true, |x| Ok(vec![x.clone()]))
}

/// Semantic MAX over sequences of naturals: answers the largest symbol
/// attained, encoded as the sequence `n:0`. Total on eventually periodic
/// sequences, where the maximum always exists.
pub fn max_oracle() -> Oracle {
    Oracle::new(
        "max",
        true,
        false,
        |_| true,
        |x| Ok(vec![EvSeq::make(vec![x.max_symbol()], 0)]),
    )
}

/// Encodes one natural in the unary-delimited tape form `1^n 0`.
pub fn unary_encode_nat(n: Symbol) -> EvSeq {
    EvSeq::make(vec![1; n as usize], 0)
}

/// Encodes a sequence of naturals on a binary tape: each symbol `k`
/// becomes the block `1^k 0`.
pub fn unary_encode_seq(s: &EvSeq) -> EvSeq {
    let encode = |syms: &[Symbol]| {
        let mut out = Vec::new();
        for &k in syms {
            out.extend(std::iter::repeat(1).take(k as usize));
            out.push(0);
        }
        out
    };
    EvSeq::periodic(encode(s.prefix()), encode(s.cycle()))
}

/// Decodes a unary-delimited binary stream back into naturals. Fails on
/// non-binary symbols and on streams whose tail is an unbounded run of
/// ones (no complete block ever forms there).
pub fn unary_decode_seq(s: &EvSeq) -> Result<EvSeq, OracleError> {
    if !s.is_binary() {
        return Err(OracleError::NotUnaryDecodable {
            reason: "non-binary symbol".into(),
        });
    }
    if s.cycle().iter().all(|&b| b == 1) {
        return Err(OracleError::NotUnaryDecodable {
            reason: "tail is an infinite run of ones".into(),
        });
    }
    let plen = s.prefix_len();
    let clen = s.cycle().len();
    // Blocks completed within the second full cycle window repeat forever:
    // the run carried across a cycle boundary is the same at every boundary.
    let boundary = plen + clen;
    let mut acc: Symbol = 0;
    let mut head = Vec::new();
    let mut repeating = Vec::new();
    for i in 0..plen + 2 * clen {
        match s.at(i) {
            1 => acc += 1,
            _ => {
                if i < boundary {
                    head.push(acc);
                } else {
                    repeating.push(acc);
                }
                acc = 0;
            }
        }
    }
    debug_assert!(!repeating.is_empty());
    Ok(EvSeq::periodic(head, repeating))
}

/// Machine-level MAX: decodes a unary-delimited query, answers the
/// maximum as `1^n 0^N`.
pub fn max_oracle_unary() -> Oracle {
    Oracle::new(
        "max-unary",
        true,
        false,
        |x| x.is_binary(),
        |x| {
            let decoded = unary_decode_seq(x)?;
            Ok(vec![unary_encode_nat(decoded.max_symbol())])
        },
    )
}

/// Wraps a query-free machine as an oracle: the answer to `x` is the
/// machine's accepted output on `x`. Runs that do not accept within
/// `fuel` surface as `OracleDivergence`, never as truncated answers.
pub fn computable_oracle(g: &MachineGraph, fuel: u64) -> Result<Oracle, OracleError> {
    if g.has_query() {
        return Err(OracleError::MachineOracleHasQueries {
            name: g.name().to_string(),
        });
    }
    let name = format!("machine:{}", g.name());
    let g = g.clone();
    let oracle_name = name.clone();
    Ok(Oracle::new(
        name,
        true,
        false,
        |_| true,
        move |x| {
            let r = run(&g, x, fuel);
            match r.status {
                RunStatus::Accepted => Ok(vec![r.output.zero_extended()]),
                _ => Err(OracleError::OracleDivergence {
                    oracle: oracle_name.clone(),
                }),
            }
        },
    ))
}

fn cartesian(sets: &[Vec<EvSeq>]) -> Vec<Vec<EvSeq>> {
    let mut combos: Vec<Vec<EvSeq>> = vec![Vec::new()];
    for set in sets {
        combos = combos
            .into_iter()
            .flat_map(|combo| {
                set.iter().map(move |x| {
                    let mut next = combo.clone();
                    next.push(x.clone());
                    next
                })
            })
            .collect();
    }
    combos
}

/// Pairing of oracles: the query splits into two interleaved halves, the
/// answers recombine by interleaving. Multi-valued answer sets multiply.
pub fn product_oracle(o1: &Oracle, o2: &Oracle) -> Oracle {
    let name = format!("product({},{})", o1.name(), o2.name());
    let single = o1.single_valued && o2.single_valued;
    let finite = o1.range_finite && o2.range_finite;
    let (o1, o2) = (o1.clone(), o2.clone());
    Oracle::new(name, single, finite, |_| true, move |x| {
        let (a, b) = split_pair(x);
        let sa = o1.answer_set(&a)?;
        let sb = o2.answer_set(&b)?;
        Ok(cartesian(&[sa, sb])
            .into_iter()
            .map(|combo| interleave_pair(&combo[0], &combo[1]))
            .collect())
    })
}

/// `n`-fold power by right-nested pairing: `pow(o, n) = <o, pow(o, n-1)>`.
pub fn power_oracle(o: &Oracle, n: u32) -> Oracle {
    assert!(n >= 1, "power requires n >= 1");
    let mut acc = o.clone();
    for _ in 1..n {
        acc = product_oracle(o, &acc);
    }
    acc
}

/// Indexed union: a query `1^i 0 x` is routed to component `i`, whose
/// answer is re-prefixed with the same index block.
pub fn coproduct_oracle(components: Vec<Oracle>) -> Oracle {
    assert!(!components.is_empty(), "coproduct of no oracles");
    let name = format!(
        "coproduct({})",
        components
            .iter()
            .map(|o| o.name())
            .collect::<Vec<_>>()
            .join(";")
    );
    let single = components.iter().all(|o| o.single_valued);
    let finite = components.iter().all(|o| o.range_finite);
    Oracle::new(name, single, finite, |_| true, move |x| {
        let mut index = 0usize;
        loop {
            match x.at(index) {
                1 => index += 1,
                0 => break,
                _ => {
                    return Err(OracleError::NotUnaryDecodable {
                        reason: "non-binary index block".into(),
                    })
                }
            }
            if index > x.prefix_len() + 1 {
                return Err(OracleError::NotUnaryDecodable {
                    reason: "index block never terminates".into(),
                });
            }
        }
        let rest = x.suffix(index + 1);
        let component = components.get(index).ok_or(OracleError::IndexOutOfRange {
            index,
            len: components.len(),
        })?;
        let mut block = vec![1; index];
        block.push(0);
        Ok(component
            .answer_set(&rest)?
            .into_iter()
            .map(|y| y.prepend(&block))
            .collect())
    })
}

/// Finite parallelization: unpacks `count` components along the Cantor
/// packing, applies the oracle to each, and repacks every combination of
/// answers.
pub fn parallel_finite_oracle(o: &Oracle, count: usize) -> Oracle {
    assert!(count >= 1, "parallelization requires count >= 1");
    let name = format!("parfin({}*{count})", o.name());
    let single = o.single_valued;
    let finite = o.range_finite;
    let o = o.clone();
    Oracle::new(name, single, finite, |_| true, move |x| {
        let tuple = lambda_unpack(x, count)?;
        let sets = tuple
            .components()
            .iter()
            .map(|c| o.answer_set(c))
            .collect::<Result<Vec<_>, _>>()?;
        cartesian(&sets)
            .into_iter()
            .map(|combo| Ok(lambda_pack(&SeqTuple::new(combo))?))
            .collect()
    })
}

/// How fuel-exhausted query computations are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueryMode {
    /// A query computation that does not accept within fuel is an error.
    #[default]
    Exact,
    /// Its written prefix, zero-extended, is fed to the oracle and the
    /// whole result is flagged approximate.
    FueledLimit,
}

#[derive(Debug, Clone)]
pub struct OracleRunOpts {
    pub depth: u32,
    pub fuel: u64,
    pub call_limit: Option<u64>,
    pub query_mode: QueryMode,
    /// Per-query-computation step cap, always also bounded by the fuel
    /// remaining in the shared budget. Fueled-limit runs need this so a
    /// streaming query leaves fuel for the caller to continue with.
    pub query_fuel: Option<u64>,
}

impl OracleRunOpts {
    pub fn new(depth: u32, fuel: u64) -> Self {
        OracleRunOpts {
            depth,
            fuel,
            call_limit: None,
            query_mode: QueryMode::Exact,
            query_fuel: None,
        }
    }
}

/// One resolved oracle call: the depth remaining when it fired, the
/// query, the chosen answer, the steps the query computation used, and
/// the calls nested inside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallRecord {
    pub depth_at_call: u32,
    pub query: EvSeq,
    pub answer: EvSeq,
    pub query_steps: u64,
    pub nested: Vec<CallRecord>,
}

fn nesting(calls: &[CallRecord]) -> u32 {
    calls
        .iter()
        .map(|c| 1 + nesting(&c.nested))
        .max()
        .unwrap_or(0)
}

fn total(calls: &[CallRecord]) -> u64 {
    calls.iter().map(|c| 1 + total(&c.nested)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRunResult {
    pub status: RunStatus,
    pub output: Output,
    pub steps_used: u64,
    pub calls: Vec<CallRecord>,
    pub total_calls: u64,
    pub max_nesting: u32,
    pub approximate: bool,
    pub depth_budget: u32,
}

type ZeroResolver<'a> = &'a dyn Fn(&EvSeq) -> Result<EvSeq, OracleError>;

struct Engine<'a, E: Exec> {
    exec: &'a E,
    oracle: &'a Oracle,
    opts: &'a OracleRunOpts,
    /// Resolves queries hitting depth 0 by direct simulation instead of
    /// rejecting; used by the computable-oracle boundary inlining.
    zero_resolver: Option<ZeroResolver<'a>>,
}

struct Budget {
    fuel: u64,
    steps: u64,
    calls_made: u64,
    approximate: bool,
}

impl<'a, E: Exec> Engine<'a, E> {
    fn run_state(
        &self,
        st: &mut E::St,
        depth: u32,
        budget: &mut Budget,
        calls: &mut Vec<CallRecord>,
        inline_on: bool,
    ) -> Result<RunStatus, OracleError> {
        loop {
            match self.exec.step(st) {
                StepEvent::Ran => {
                    if budget.fuel == 0 {
                        return Ok(RunStatus::FuelExhausted);
                    }
                    budget.fuel -= 1;
                    budget.steps += 1;
                }
                StepEvent::Accepted => return Ok(RunStatus::Accepted),
                StepEvent::Rejected => return Ok(RunStatus::Rejected),
                StepEvent::Stuck => return Ok(RunStatus::Stuck),
                StepEvent::Query => {
                    let inline_here = depth == 0 && inline_on && self.zero_resolver.is_some();
                    if depth == 0 && !inline_here {
                        return Ok(RunStatus::QueryEncountered(self.exec.query_site(st)));
                    }
                    if let Some(limit) = self.opts.call_limit {
                        if budget.calls_made >= limit {
                            return Ok(RunStatus::CallLimitExceeded);
                        }
                    }
                    budget.calls_made += 1;

                    let mut spawn = self.exec.query_spawn(st);
                    let mut sub_calls = Vec::new();
                    let steps_before = budget.steps;
                    let sub_depth = depth.saturating_sub(1);
                    let slice = self
                        .opts
                        .query_fuel
                        .map_or(budget.fuel, |q| q.min(budget.fuel));
                    let mut sub_budget = Budget {
                        fuel: slice,
                        steps: budget.steps,
                        calls_made: budget.calls_made,
                        approximate: budget.approximate,
                    };
                    let sub_status = self.run_state(
                        &mut spawn,
                        sub_depth,
                        &mut sub_budget,
                        &mut sub_calls,
                        inline_on && !inline_here,
                    )?;
                    budget.fuel -= slice - sub_budget.fuel;
                    budget.steps = sub_budget.steps;
                    budget.calls_made = sub_budget.calls_made;
                    budget.approximate = sub_budget.approximate;
                    let query = match sub_status {
                        RunStatus::Accepted => self.exec.output(&spawn),
                        RunStatus::CallLimitExceeded => return Ok(RunStatus::CallLimitExceeded),
                        RunStatus::FuelExhausted
                            if self.opts.query_mode == QueryMode::FueledLimit =>
                        {
                            budget.approximate = true;
                            EvSeq::make(self.exec.written(&spawn), 0)
                        }
                        other => {
                            return Err(OracleError::QueryDiverged {
                                site: self.exec.query_site(st),
                                status: other,
                            })
                        }
                    };
                    let answer = if inline_here {
                        (self.zero_resolver.unwrap())(&query)?
                    } else {
                        self.oracle.select(&query)?
                    };
                    self.exec.resume(st, &answer);
                    calls.push(CallRecord {
                        depth_at_call: depth,
                        query,
                        answer,
                        query_steps: budget.steps - steps_before,
                        nested: sub_calls,
                    });
                }
            }
        }
    }
}

fn assemble<E: Exec>(
    exec: &E,
    st: &E::St,
    status: RunStatus,
    budget: Budget,
    calls: Vec<CallRecord>,
    depth: u32,
) -> OracleRunResult {
    let output = match status {
        RunStatus::Accepted => Output::Full(exec.output(st)),
        _ => Output::Prefix(exec.written(st)),
    };
    OracleRunResult {
        status,
        output,
        steps_used: budget.steps,
        total_calls: total(&calls),
        max_nesting: nesting(&calls),
        calls,
        approximate: budget.approximate,
        depth_budget: depth,
    }
}

/// Runs an executable under the depth-budgeted oracle semantics and also
/// returns the final state.
pub fn run_with_oracle_full<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    input: &EvSeq,
    opts: &OracleRunOpts,
) -> Result<(OracleRunResult, E::St), OracleError> {
    let engine = Engine {
        exec,
        oracle,
        opts,
        zero_resolver: None,
    };
    let mut st = exec.start_state(input);
    let mut budget = Budget {
        fuel: opts.fuel,
        steps: 0,
        calls_made: 0,
        approximate: false,
    };
    let mut calls = Vec::new();
    let status = engine.run_state(&mut st, opts.depth, &mut budget, &mut calls, true)?;
    Ok((assemble(exec, &st, status, budget, calls, opts.depth), st))
}

/// Runs an executable on `input` with `oracle`, query depth `depth`, a
/// shared step budget `fuel` and an optional bound on the total number
/// of oracle calls.
pub fn run_with_oracle<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    input: &EvSeq,
    depth: u32,
    fuel: u64,
    call_limit: Option<u64>,
) -> Result<OracleRunResult, OracleError> {
    let opts = OracleRunOpts {
        call_limit,
        ..OracleRunOpts::new(depth, fuel)
    };
    run_with_oracle_opts(exec, oracle, input, &opts)
}

pub fn run_with_oracle_opts<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    input: &EvSeq,
    opts: &OracleRunOpts,
) -> Result<OracleRunResult, OracleError> {
    run_with_oracle_full(exec, oracle, input, opts).map(|(r, _)| r)
}

/// As [`run_with_oracle_opts`], but queries that hit depth 0 are resolved
/// by `resolver` (direct simulation) instead of rejecting. Queries inside
/// the spawned computations of such boundary calls still reject at depth
/// 0, exactly as they would one depth level up.
pub fn run_with_zero_resolver<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    input: &EvSeq,
    opts: &OracleRunOpts,
    resolver: ZeroResolver<'_>,
) -> Result<OracleRunResult, OracleError> {
    let engine = Engine {
        exec,
        oracle,
        opts,
        zero_resolver: Some(resolver),
    };
    let mut st = exec.start_state(input);
    let mut budget = Budget {
        fuel: opts.fuel,
        steps: 0,
        calls_made: 0,
        approximate: false,
    };
    let mut calls = Vec::new();
    let status = engine.run_state(&mut st, opts.depth, &mut budget, &mut calls, true)?;
    Ok(assemble(exec, &st, status, budget, calls, opts.depth))
}

/// Observable outcome of one run, comparable across depths.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    Accepted(Vec<Symbol>),
    Partial(String, Vec<Symbol>),
    Diverged(String),
}

impl Outcome {
    pub fn accepted_prefix(&self) -> Option<&[Symbol]> {
        match self {
            Outcome::Accepted(p) => Some(p),
            _ => None,
        }
    }
}

fn outcome_of(result: Result<OracleRunResult, OracleError>, prefix_len: usize) -> Outcome {
    match result {
        Ok(r) => match r.status {
            RunStatus::Accepted => {
                Outcome::Accepted(r.output.first(prefix_len).unwrap_or_default())
            }
            status => {
                let mut written = match &r.output {
                    Output::Prefix(p) => p.clone(),
                    Output::Full(s) => s.first(prefix_len),
                };
                written.truncate(prefix_len);
                Outcome::Partial(status.to_string(), written)
            }
        },
        Err(e) => Outcome::Diverged(e.to_string()),
    }
}

/// The outcome of one deterministic (selection-policy) run, reduced to a
/// comparable observation at the given prefix length.
pub fn observe<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    input: &EvSeq,
    depth: u32,
    fuel: u64,
    prefix_len: usize,
) -> Outcome {
    outcome_of(
        run_with_oracle(exec, oracle, input, depth, fuel, None),
        prefix_len,
    )
}

/// All outcomes of a run over every choice of oracle answer (finite
/// answer sets make the enumeration exhaustive).
fn enumerate_outcomes<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    st: E::St,
    depth: u32,
    fuel: u64,
    prefix_len: usize,
    out: &mut BTreeSet<Outcome>,
) {
    let mut st = st;
    let mut fuel = fuel;
    loop {
        match exec.step(&mut st) {
            StepEvent::Ran => {
                if fuel == 0 {
                    let mut written = exec.written(&st);
                    written.truncate(prefix_len);
                    out.insert(Outcome::Partial(RunStatus::FuelExhausted.to_string(), written));
                    return;
                }
                fuel -= 1;
            }
            StepEvent::Accepted => {
                out.insert(Outcome::Accepted(exec.output(&st).first(prefix_len)));
                return;
            }
            StepEvent::Rejected => {
                let mut written = exec.written(&st);
                written.truncate(prefix_len);
                out.insert(Outcome::Partial(RunStatus::Rejected.to_string(), written));
                return;
            }
            StepEvent::Stuck => {
                let mut written = exec.written(&st);
                written.truncate(prefix_len);
                out.insert(Outcome::Partial(RunStatus::Stuck.to_string(), written));
                return;
            }
            StepEvent::Query => {
                if depth == 0 {
                    let mut written = exec.written(&st);
                    written.truncate(prefix_len);
                    out.insert(Outcome::Partial(
                        RunStatus::QueryEncountered(exec.query_site(&st)).to_string(),
                        written,
                    ));
                    return;
                }
                // Resolve the query deterministically (the sub-run uses the
                // select policy) and fork on the answer set.
                let spawn = exec.query_spawn(&st);
                let opts = OracleRunOpts::new(depth - 1, fuel);
                let engine = Engine {
                    exec,
                    oracle,
                    opts: &opts,
                    zero_resolver: None,
                };
                let mut spawn = spawn;
                let mut budget = Budget {
                    fuel,
                    steps: 0,
                    calls_made: 0,
                    approximate: false,
                };
                let mut sub_calls = Vec::new();
                let sub_status =
                    match engine.run_state(&mut spawn, depth - 1, &mut budget, &mut sub_calls, false)
                    {
                        Ok(s) => s,
                        Err(e) => {
                            out.insert(Outcome::Diverged(e.to_string()));
                            return;
                        }
                    };
                if sub_status != RunStatus::Accepted {
                    out.insert(Outcome::Diverged(
                        OracleError::QueryDiverged {
                            site: exec.query_site(&st),
                            status: sub_status,
                        }
                        .to_string(),
                    ));
                    return;
                }
                let query = exec.output(&spawn);
                let remaining = budget.fuel;
                let answers = match oracle.answer_set(&query) {
                    Ok(a) => a,
                    Err(e) => {
                        out.insert(Outcome::Diverged(e.to_string()));
                        return;
                    }
                };
                for answer in answers {
                    let mut branch = st.clone();
                    exec.resume(&mut branch, &answer);
                    enumerate_outcomes(exec, oracle, branch, depth, remaining, prefix_len, out);
                }
                return;
            }
        }
    }
}

/// Per-input outcome observation at a fixed query depth. In exhaustive
/// mode the full set of outcomes over all answer choices is returned;
/// otherwise the single outcome of the deterministic selection policy.
pub fn f_n_eval<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    inputs: &[EvSeq],
    depth: u32,
    fuel: u64,
    prefix_len: usize,
    exhaustive: bool,
) -> Vec<(EvSeq, BTreeSet<Outcome>)> {
    inputs
        .iter()
        .map(|input| {
            let mut outcomes = BTreeSet::new();
            if exhaustive {
                enumerate_outcomes(
                    exec,
                    oracle,
                    exec.start_state(input),
                    depth,
                    fuel,
                    prefix_len,
                    &mut outcomes,
                );
            } else {
                let r = run_with_oracle(exec, oracle, input, depth, fuel, None);
                outcomes.insert(outcome_of(r, prefix_len));
            }
            (input.clone(), outcomes)
        })
        .collect()
}

/// Least depth `n <= n_max` at which the observed behavior agrees with
/// depth `n + 1` on the sample inputs; a sample-level approximation of
/// stabilization. Uses exhaustive enumeration when the oracle has finite
/// range, the deterministic selection otherwise.
pub fn stabilization_check<E: Exec>(
    exec: &E,
    oracle: &Oracle,
    inputs: &[EvSeq],
    n_max: u32,
    fuel: u64,
    prefix_len: usize,
) -> Option<u32> {
    let exhaustive = oracle.range_finite();
    let evals: Vec<_> = (0..=n_max + 1)
        .map(|n| f_n_eval(exec, oracle, inputs, n, fuel, prefix_len, exhaustive))
        .collect();
    (0..=n_max).find(|&n| evals[n as usize] == evals[n as usize + 1])
}
