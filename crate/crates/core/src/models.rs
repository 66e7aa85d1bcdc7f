//! Executable model equivalences: computing MAX through a loop of LPO
//! calls, simulating depth-1 LPO machines by finitely revising
//! computation (optimistic execution with checkpoint rollback), the
//! translation from revising streams back to a single MAX call, and the
//! halting-problem demonstration via one LPO query.

use serde::Serialize;
use thiserror::Error;

use crate::machine::{run, Configuration, Exec, MachineGraph, RunStatus, StepEvent};
use crate::oracle::lpo;
use crate::seq::{EvSeq, Symbol};

/// The revision mark in stream symbols (0 and 1 are data).
pub const MARK: Symbol = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelsError {
    #[error("revision mark in the repeating tail: only finitely many marks are allowed")]
    MarkInTail,
    #[error("revising stream symbol {0} out of range (0, 1, mark)")]
    BadStreamSymbol(Symbol),
    #[error("oracle budget {budget} exceeded; the loop needs {needed} calls")]
    BudgetExceeded { budget: u32, needed: u32 },
    #[error("call budget {0} exceeded")]
    CallBudgetExceeded(u64),
    #[error("a query neither produced a 1 nor accepted all-zero within fuel")]
    QueryUndecidedWithinFuel,
    #[error("query computation failed: {status}")]
    QueryComputationFailed { status: RunStatus },
    #[error("nested oracle call at {site}: only depth-1 calls are simulated here")]
    NestedQuery { site: String },
    #[error("main computation did not accept within fuel")]
    MainUnfinished,
    #[error("certificate claims a halt at step {step}, beyond fuel {fuel}")]
    CertificateUnverifiable { step: u64, fuel: u64 },
    #[error("certificate contradicts the run: {detail}")]
    CertificateMismatch { detail: String },
}

/// An output stream over `{0, 1, MARK}` with finitely many marks: each
/// mark discards everything emitted before it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RevisingStream {
    symbols: EvSeq,
}

impl RevisingStream {
    pub fn new(symbols: EvSeq) -> Result<Self, ModelsError> {
        if symbols.cycle().contains(&MARK) {
            return Err(ModelsError::MarkInTail);
        }
        if let Some(&bad) = symbols
            .prefix()
            .iter()
            .chain(symbols.cycle())
            .find(|&&s| s > MARK)
        {
            return Err(ModelsError::BadStreamSymbol(bad));
        }
        Ok(RevisingStream { symbols })
    }

    pub fn symbols(&self) -> &EvSeq {
        &self.symbols
    }

    pub fn mark_count(&self) -> usize {
        self.symbols.prefix().iter().filter(|&&s| s == MARK).count()
    }

    /// Position right after the last mark; 0 when there are no marks.
    pub fn last_mark_end(&self) -> usize {
        self.symbols
            .prefix()
            .iter()
            .rposition(|&s| s == MARK)
            .map(|p| p + 1)
            .unwrap_or(0)
    }
}

/// The settled output: everything strictly after the last mark.
pub fn revising_decode(s: &RevisingStream) -> EvSeq {
    s.symbols.suffix(s.last_mark_end())
}

// ---------------------------------------------------------------------------
// MAX by a loop of LPO calls
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCall {
    pub threshold: Symbol,
    pub query: EvSeq,
    pub answer: EvSeq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxLoopResult {
    pub value: Symbol,
    pub calls_used: u32,
    pub trace: Vec<ThresholdCall>,
}

/// Computes the maximum of a sequence of naturals by calling LPO on the
/// threshold streams `w^n(i) = [w(i) > n]` for `n = 0, 1, ...` until the
/// first all-zero answer. Uses exactly `max(w) + 1` calls.
pub fn max_by_lpo_loop(w: &EvSeq, oracle_budget: u32) -> Result<MaxLoopResult, ModelsError> {
    let oracle = lpo();
    let mut trace = Vec::new();
    let mut n: Symbol = 0;
    loop {
        let calls_so_far = trace.len() as u32;
        if calls_so_far + 1 > oracle_budget {
            return Err(ModelsError::BudgetExceeded {
                budget: oracle_budget,
                needed: w.max_symbol() + 1,
            });
        }
        let query = w.map(|s| if s > n { 1 } else { 0 });
        let answer = oracle.select(&query).expect("threshold streams are binary");
        let zero = answer.is_all_zero();
        trace.push(ThresholdCall {
            threshold: n,
            query,
            answer,
        });
        if zero {
            return Ok(MaxLoopResult {
                value: n,
                calls_used: trace.len() as u32,
                trace,
            });
        }
        n += 1;
    }
}

// ---------------------------------------------------------------------------
// Depth-1 LPO machines simulated by finitely revising computation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevisingRun {
    pub stream: RevisingStream,
    pub calls_made: u64,
    pub revisions: u64,
    pub confirmations: u64,
    pub steps_used: u64,
}

struct PendingQuery {
    /// Main configuration at the moment the call was made, before any
    /// answer was assumed.
    snapshot: Configuration,
    /// The running query computation.
    spawn: Configuration,
    /// Spawn output cells already inspected for a 1.
    inspected: usize,
}

/// Optimistic execution of a machine whose oracle calls are depth-1 LPO
/// calls: every call is first answered `0^N` while its query computation
/// runs concurrently (round-robin, one step each); a query that produces
/// a 1 emits a revision mark, rolls the main thread back to the moment
/// of that call and resumes it with answer `10^N`. The decoded stream
/// equals the output of the depth-1 oracle run.
pub fn simulate_lpo_by_revising(
    m: &MachineGraph,
    input: &EvSeq,
    fuel: u64,
    call_budget: u64,
) -> Result<RevisingRun, ModelsError> {
    let mut main = m.start_state(input);
    let mut main_accepted = false;
    let mut stream: Vec<Symbol> = Vec::new();
    let mut mirrored = 0usize; // main output cells already emitted
    let mut pending: Vec<PendingQuery> = Vec::new();
    let mut fuel = fuel;
    let mut steps = 0u64;
    let mut calls_made = 0u64;
    let mut revisions = 0u64;
    let mut confirmations = 0u64;

    let zeros = EvSeq::zeros();
    let one = EvSeq::make(vec![1], 0);

    loop {
        if main_accepted && pending.is_empty() {
            let symbols = EvSeq::make(stream, 0);
            return Ok(RevisingRun {
                stream: RevisingStream::new(symbols)?,
                calls_made,
                revisions,
                confirmations,
                steps_used: steps,
            });
        }
        if fuel == 0 {
            return Err(if pending.is_empty() {
                ModelsError::MainUnfinished
            } else {
                ModelsError::QueryUndecidedWithinFuel
            });
        }

        // One main step.
        if !main_accepted {
            fuel -= 1;
            steps += 1;
            match m.step(&mut main) {
                StepEvent::Ran => {
                    while mirrored < main.heads[3] {
                        stream.push(main.tapes[3].read(mirrored));
                        mirrored += 1;
                    }
                }
                StepEvent::Accepted => main_accepted = true,
                StepEvent::Rejected => {
                    return Err(ModelsError::QueryComputationFailed {
                        status: RunStatus::Rejected,
                    })
                }
                StepEvent::Stuck => {
                    return Err(ModelsError::QueryComputationFailed {
                        status: RunStatus::Stuck,
                    })
                }
                StepEvent::Query => {
                    if calls_made >= call_budget {
                        return Err(ModelsError::CallBudgetExceeded(call_budget));
                    }
                    calls_made += 1;
                    let snapshot = main.clone();
                    let spawn = m.query_spawn(&main);
                    pending.push(PendingQuery {
                        snapshot,
                        spawn,
                        inspected: 0,
                    });
                    // Optimistic answer.
                    m.resume(&mut main, &zeros);
                }
            }
        }

        // One step for each pending query computation, oldest first.
        let mut revise_at: Option<usize> = None;
        let mut confirmed: Vec<usize> = Vec::new();
        for (i, p) in pending.iter_mut().enumerate() {
            if fuel == 0 {
                return Err(ModelsError::QueryUndecidedWithinFuel);
            }
            fuel -= 1;
            steps += 1;
            let ev = m.step(&mut p.spawn);
            // A written 1 settles the answer regardless of what follows:
            // the query is not the all-zero stream.
            let mut saw_one = false;
            while p.inspected < p.spawn.heads[3] {
                if p.spawn.tapes[3].read(p.inspected) == 1 {
                    saw_one = true;
                }
                p.inspected += 1;
            }
            if saw_one {
                revise_at = Some(i);
                break;
            }
            match ev {
                StepEvent::Ran => {}
                StepEvent::Accepted => confirmed.push(i),
                StepEvent::Rejected => {
                    return Err(ModelsError::QueryComputationFailed {
                        status: RunStatus::Rejected,
                    })
                }
                StepEvent::Stuck => {
                    return Err(ModelsError::QueryComputationFailed {
                        status: RunStatus::Stuck,
                    })
                }
                StepEvent::Query => {
                    return Err(ModelsError::NestedQuery {
                        site: p.spawn.vertex.clone(),
                    })
                }
            }
        }

        if let Some(i) = revise_at {
            revisions += 1;
            stream.push(MARK);
            main = pending[i].snapshot.clone();
            pending.truncate(i);
            m.resume(&mut main, &one);
            main_accepted = false;
            // The output retained from before the revised call re-emits
            // after the mark, so the settled stream carries the whole
            // final output.
            mirrored = 0;
            while mirrored < main.heads[3] {
                stream.push(main.tapes[3].read(mirrored));
                mirrored += 1;
            }
        } else {
            confirmations += confirmed.len() as u64;
            for &i in confirmed.iter().rev() {
                pending.remove(i);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Revising streams to a single MAX call
// ---------------------------------------------------------------------------

/// What remains after the MAX answer arrives: drop that many symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixDecoder {
    stream: RevisingStream,
}

impl SuffixDecoder {
    pub fn apply(&self, n: usize) -> EvSeq {
        self.stream.symbols().suffix(n)
    }
}

/// The translation from a revising stream to one MAX call: the emitted
/// query is the running maximum of the positions directly after each
/// mark seen so far (starting at 0); dropping MAX-many symbols from the
/// stream yields the settled output.
pub fn revising_to_max(s: &RevisingStream) -> (EvSeq, SuffixDecoder) {
    let mut current: Symbol = 0;
    let mut query_prefix = Vec::with_capacity(s.symbols().prefix_len());
    for (pos, &sym) in s.symbols().prefix().iter().enumerate() {
        if sym == MARK {
            current = current.max(pos as Symbol + 1);
        }
        query_prefix.push(current);
    }
    let query = EvSeq::make(query_prefix, current);
    (
        query,
        SuffixDecoder { stream: s.clone() },
    )
}

// ---------------------------------------------------------------------------
// Halting via one LPO call
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// The subject terminates after exactly this many steps.
    Halts(u64),
    /// The subject never terminates (supplied ground truth; an all-zero
    /// query stream is not decidable at run time).
    Loops,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HaltingVerdict {
    Halts,
    Loops,
}

/// Demonstrates the halting problem as one LPO call: the query stream
/// carries a 0 for every step the subject (run on the all-zero input)
/// has not terminated and a 1 at the step it does. For a verified
/// `Halts` certificate the stream is computed exactly; for `Loops` the
/// certified stream is `0^N`. LPO answers `10^N` exactly on halting.
pub fn halting_demo(
    subject: &MachineGraph,
    certificate: Certificate,
    fuel: u64,
) -> Result<HaltingVerdict, ModelsError> {
    let stream = match certificate {
        Certificate::Halts(step) => {
            if step >= fuel {
                return Err(ModelsError::CertificateUnverifiable { step, fuel });
            }
            // One extra transition attempt: a stuck transition is only
            // observable by trying it.
            let r = run(subject, &EvSeq::zeros(), step + 1);
            let halted = matches!(
                r.status,
                RunStatus::Accepted | RunStatus::Rejected | RunStatus::Stuck
            );
            if !halted {
                return Err(ModelsError::CertificateMismatch {
                    detail: format!("still running after {} steps ({})", r.steps_used, r.status),
                });
            }
            if r.steps_used != step {
                return Err(ModelsError::CertificateMismatch {
                    detail: format!("halted at step {} instead of {step}", r.steps_used),
                });
            }
            let mut prefix = vec![0; step as usize];
            prefix.push(1);
            EvSeq::make(prefix, 0)
        }
        Certificate::Loops => {
            let r = run(subject, &EvSeq::zeros(), fuel);
            if matches!(
                r.status,
                RunStatus::Accepted | RunStatus::Rejected | RunStatus::Stuck
            ) {
                return Err(ModelsError::CertificateMismatch {
                    detail: format!("terminated at step {}", r.steps_used),
                });
            }
            EvSeq::zeros()
        }
    };
    let answer = lpo().select(&stream).expect("halting streams are binary");
    Ok(if answer.is_all_zero() {
        HaltingVerdict::Loops
    } else {
        HaltingVerdict::Halts
    })
}
