//! The machine model: labelled graphs over four tapes (input, two work
//! tapes, output), validation of the graph well-formedness conditions,
//! configurations, the single-step transition relation and fuel-bounded
//! execution with finite and partial output extraction.
//!
//! Output discipline: there are no head moves on the output tape, only
//! writes, each of which advances the output head. The written region
//! `[0, n3)` is therefore stable, and the infinite-output limit is the
//! union of written prefixes over increasing fuel.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::seq::{EvSeq, Symbol};

/// Tapes a machine may read from and move on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReadTape {
    Input,
    Work1,
    Work2,
}

/// Tapes a machine may write to. The input tape is read-only and the
/// output tape is write-only; both constraints are carried by the types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WriteTape {
    Work1,
    Work2,
    Output,
}

impl ReadTape {
    pub fn index(self) -> usize {
        match self {
            ReadTape::Input => 0,
            ReadTape::Work1 => 1,
            ReadTape::Work2 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(ReadTape::Input),
            1 => Some(ReadTape::Work1),
            2 => Some(ReadTape::Work2),
            _ => None,
        }
    }
}

impl WriteTape {
    pub fn index(self) -> usize {
        match self {
            WriteTape::Work1 => 1,
            WriteTape::Work2 => 2,
            WriteTape::Output => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            1 => Some(WriteTape::Work1),
            2 => Some(WriteTape::Work2),
            3 => Some(WriteTape::Output),
            _ => None,
        }
    }
}

/// Vertex labels. Out-degree is forced by the label: branches and
/// queries have two ordered successors, accept/reject none, the rest one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Start,
    Branch(ReadTape),
    MoveLeft(ReadTape),
    MoveRight(ReadTape),
    Write(WriteTape, bool),
    Accept,
    Reject,
    Query,
}

impl Label {
    pub fn required_out_degree(self) -> usize {
        match self {
            Label::Branch(_) | Label::Query => 2,
            Label::Accept | Label::Reject => 0,
            _ => 1,
        }
    }

    /// The textual mnemonic used by the DSL and the JSON trace.
    pub fn mnemonic(self) -> String {
        match self {
            Label::Start => "s".into(),
            Label::Branch(t) => format!("t{}", t.index()),
            Label::MoveLeft(t) => format!("l{}", t.index()),
            Label::MoveRight(t) => format!("r{}", t.index()),
            Label::Write(t, b) => format!("w{}={}", t.index(), b as u8),
            Label::Accept => "accept".into(),
            Label::Reject => "reject".into(),
            Label::Query => "?".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub label: Label,
    pub successors: Vec<String>,
}

/// A machine graph. `layer_tags`, when present, assigns each vertex a
/// query layer number (see the transform module).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineGraph {
    name: String,
    start: String,
    vertices: BTreeMap<String, Vertex>,
    layer_tags: Option<BTreeMap<String, u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ValidationErrorKind {
    NoStart,
    MultipleStart,
    StartHasIncoming,
    BadOutDegree,
    DanglingSuccessor,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("validation failed at vertex {vertex:?}: {kind:?}")]
pub struct ValidationError {
    pub kind: ValidationErrorKind,
    pub vertex: String,
}

impl MachineGraph {
    pub fn new(name: impl Into<String>, start: impl Into<String>) -> Self {
        MachineGraph {
            name: name.into(),
            start: start.into(),
            vertices: BTreeMap::new(),
            layer_tags: None,
        }
    }

    pub fn add_vertex(
        &mut self,
        name: impl Into<String>,
        label: Label,
        successors: Vec<String>,
    ) -> &mut Self {
        let name = name.into();
        let prev = self.vertices.insert(name.clone(), Vertex { label, successors });
        assert!(prev.is_none(), "duplicate vertex {name:?}");
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn vertices(&self) -> &BTreeMap<String, Vertex> {
        &self.vertices
    }

    pub fn vertex(&self, name: &str) -> Option<&Vertex> {
        self.vertices.get(name)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn label(&self, name: &str) -> Option<Label> {
        self.vertices.get(name).map(|v| v.label)
    }

    pub fn successors(&self, name: &str) -> &[String] {
        self.vertices
            .get(name)
            .map(|v| v.successors.as_slice())
            .unwrap_or(&[])
    }

    pub fn layer_tags(&self) -> Option<&BTreeMap<String, u32>> {
        self.layer_tags.as_ref()
    }

    pub fn set_layer_tags(&mut self, tags: BTreeMap<String, u32>) {
        self.layer_tags = Some(tags);
    }

    pub fn clear_layer_tags(&mut self) {
        self.layer_tags = None;
    }

    pub fn has_query(&self) -> bool {
        self.vertices.values().any(|v| v.label == Label::Query)
    }

    /// Checks the graph conditions: a unique start vertex with no
    /// incoming edges, label-consistent out-degrees, and no edges to
    /// undefined vertices.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let err = |kind, vertex: &str| {
            Err(ValidationError {
                kind,
                vertex: vertex.to_string(),
            })
        };
        match self.vertices.get(&self.start) {
            Some(v) if v.label == Label::Start => {}
            _ => return err(ValidationErrorKind::NoStart, &self.start),
        }
        for (name, v) in &self.vertices {
            if v.label == Label::Start && name != &self.start {
                return err(ValidationErrorKind::MultipleStart, name);
            }
            if v.successors.len() != v.label.required_out_degree() {
                return err(ValidationErrorKind::BadOutDegree, name);
            }
            for succ in &v.successors {
                if !self.vertices.contains_key(succ) {
                    return err(ValidationErrorKind::DanglingSuccessor, name);
                }
                if succ == &self.start {
                    return err(ValidationErrorKind::StartHasIncoming, name);
                }
            }
        }
        Ok(())
    }
}

/// Convenience wrapper for `validate`.
pub fn validate_graph(m: &MachineGraph) -> Result<(), ValidationError> {
    m.validate()
}

/// One tape: an eventually periodic base sequence with a materialized
/// mutable prefix in front of it. Reads are O(1) and writes amortized
/// O(1); converting back to a sequence happens only at output extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tape {
    cells: Vec<Symbol>,
    rest: EvSeq,
}

impl Tape {
    pub fn from_seq(s: EvSeq) -> Self {
        Tape {
            cells: Vec::new(),
            rest: s,
        }
    }

    pub fn zeros() -> Self {
        Self::from_seq(EvSeq::zeros())
    }

    pub fn read(&self, pos: usize) -> Symbol {
        if pos < self.cells.len() {
            self.cells[pos]
        } else {
            self.rest.at(pos - self.cells.len())
        }
    }

    /// Writes `sym` at `pos`, materializing intermediate cells as needed.
    pub fn set(&mut self, pos: usize, sym: Symbol) {
        let base = self.cells.len();
        if pos >= base {
            for i in base..=pos {
                self.cells.push(self.rest.at(i - base));
            }
            self.rest = self.rest.suffix(pos + 1 - base);
        }
        self.cells[pos] = sym;
    }

    /// Full tape content as a sequence.
    pub fn snapshot(&self) -> EvSeq {
        self.rest.prepend(&self.cells)
    }
}

/// A machine configuration: current vertex, the four tapes, and the four
/// head positions (input, work 1, work 2, output).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub vertex: String,
    pub tapes: [Tape; 4],
    pub heads: [usize; 4],
}

impl Configuration {
    /// The initial configuration: start vertex, input on tape 0, all
    /// other tapes zero, all heads at 0.
    pub fn initial(m: &MachineGraph, input: &EvSeq) -> Self {
        Configuration {
            vertex: m.start().to_string(),
            tapes: [
                Tape::from_seq(input.clone()),
                Tape::zeros(),
                Tape::zeros(),
                Tape::zeros(),
            ],
            heads: [0; 4],
        }
    }

    /// Output cells written so far: tape 3 positions `[0, n3)`.
    pub fn written_output(&self) -> Vec<Symbol> {
        (0..self.heads[3]).map(|i| self.tapes[3].read(i)).collect()
    }

    /// Full content of tape `i` as a sequence.
    pub fn tape_seq(&self, i: usize) -> EvSeq {
        self.tapes[i].snapshot()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HaltKind {
    Accept,
    Reject,
}

/// Result of a single public step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepResult {
    Next(Configuration),
    Halted(HaltKind),
    Stuck,
    QueryAt(String),
}

pub(crate) enum InternalStep {
    Advanced,
    Accept,
    Reject,
    Stuck,
    Query,
}

pub(crate) fn step_mut(m: &MachineGraph, c: &mut Configuration) -> InternalStep {
    let Some(v) = m.vertex(&c.vertex) else {
        return InternalStep::Stuck;
    };
    match v.label {
        Label::Start => {
            c.vertex = v.successors[0].clone();
            InternalStep::Advanced
        }
        Label::Branch(t) => {
            let i = t.index();
            let sym = c.tapes[i].read(c.heads[i]);
            if sym > 1 {
                // The transition is only defined for binary symbols.
                return InternalStep::Stuck;
            }
            c.vertex = v.successors[sym as usize].clone();
            InternalStep::Advanced
        }
        Label::MoveLeft(t) => {
            let i = t.index();
            if c.heads[i] == 0 {
                return InternalStep::Stuck;
            }
            c.heads[i] -= 1;
            c.vertex = v.successors[0].clone();
            InternalStep::Advanced
        }
        Label::MoveRight(t) => {
            let i = t.index();
            c.heads[i] += 1;
            c.vertex = v.successors[0].clone();
            InternalStep::Advanced
        }
        Label::Write(t, b) => {
            let i = t.index();
            c.tapes[i].set(c.heads[i], b as Symbol);
            c.heads[i] += 1;
            c.vertex = v.successors[0].clone();
            InternalStep::Advanced
        }
        Label::Accept => InternalStep::Accept,
        Label::Reject => InternalStep::Reject,
        Label::Query => InternalStep::Query,
    }
}

/// One transition from `c`. Accept/reject vertices halt, a move left at
/// position 0 (or a branch over a non-binary symbol) has no transition
/// and reports `Stuck`, and query vertices are surfaced for the caller
/// to resolve.
pub fn step(m: &MachineGraph, c: &Configuration) -> StepResult {
    let mut next = c.clone();
    match step_mut(m, &mut next) {
        InternalStep::Advanced => StepResult::Next(next),
        InternalStep::Accept => StepResult::Halted(HaltKind::Accept),
        InternalStep::Reject => StepResult::Halted(HaltKind::Reject),
        InternalStep::Stuck => StepResult::Stuck,
        InternalStep::Query => StepResult::QueryAt(c.vertex.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Accepted,
    Rejected,
    Stuck,
    FuelExhausted,
    /// A query vertex was reached with no query budget; it acts as a
    /// distinguished reject.
    QueryEncountered(String),
    /// Only produced by oracle runs with a call limit.
    CallLimitExceeded,
}

impl RunStatus {
    pub fn is_accepted(&self) -> bool {
        matches!(self, RunStatus::Accepted)
    }
}

/// Machine output: the full tape on acceptance, otherwise the stable
/// written prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Output {
    Full(EvSeq),
    Prefix(Vec<Symbol>),
}

impl Output {
    /// Symbols available without guessing: everything for a full output,
    /// the written region otherwise.
    pub fn available(&self) -> Option<usize> {
        match self {
            Output::Full(_) => None,
            Output::Prefix(p) => Some(p.len()),
        }
    }

    pub fn first(&self, k: usize) -> Option<Vec<Symbol>> {
        match self {
            Output::Full(s) => Some(s.first(k)),
            Output::Prefix(p) => {
                if k <= p.len() {
                    Some(p[..k].to_vec())
                } else {
                    None
                }
            }
        }
    }

    /// The written prefix extended with zeros, as used by approximate
    /// (fuel-limited) query evaluation.
    pub fn zero_extended(&self) -> EvSeq {
        match self {
            Output::Full(s) => s.clone(),
            Output::Prefix(p) => EvSeq::make(p.clone(), 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub status: RunStatus,
    pub output: Output,
    pub steps_used: u64,
    pub final_config: Configuration,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("output prefix of length {requested} unavailable, only {available} cells written")]
pub struct PrefixUnavailable {
    pub requested: usize,
    pub available: usize,
}

/// First `k` output symbols of a run result. For non-accepting results
/// only the written region is trustworthy, so larger requests fail.
pub fn output_prefix(r: &RunResult, k: usize) -> Result<Vec<Symbol>, PrefixUnavailable> {
    r.output.first(k).ok_or_else(|| PrefixUnavailable {
        requested: k,
        available: r.output.available().unwrap_or(0),
    })
}

/// One JSON trace record per executed step. Field names are stable.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub step: u64,
    pub vertex: String,
    pub label: String,
    pub heads: [usize; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub written: Option<TraceWrite>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceWrite {
    pub tape: usize,
    pub pos: usize,
    pub bit: u8,
}

fn finish(status: RunStatus, c: Configuration, steps: u64) -> RunResult {
    let output = match status {
        RunStatus::Accepted => Output::Full(c.tape_seq(3)),
        _ => Output::Prefix(c.written_output()),
    };
    RunResult {
        status,
        output,
        steps_used: steps,
        final_config: c,
    }
}

fn run_inner(
    m: &MachineGraph,
    input: &EvSeq,
    fuel: u64,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> RunResult {
    let mut c = Configuration::initial(m, input);
    let mut steps = 0u64;
    loop {
        let label = match m.label(&c.vertex) {
            Some(l) => l,
            None => return finish(RunStatus::Stuck, c, steps),
        };
        match label {
            Label::Accept => return finish(RunStatus::Accepted, c, steps),
            Label::Reject => return finish(RunStatus::Rejected, c, steps),
            Label::Query => {
                let v = c.vertex.clone();
                return finish(RunStatus::QueryEncountered(v), c, steps);
            }
            _ => {}
        }
        if steps >= fuel {
            return finish(RunStatus::FuelExhausted, c, steps);
        }
        if let Some(trace) = trace.as_deref_mut() {
            let written = match label {
                Label::Write(t, b) => Some(TraceWrite {
                    tape: t.index(),
                    pos: c.heads[t.index()],
                    bit: b as u8,
                }),
                _ => None,
            };
            trace.push(TraceRecord {
                step: steps,
                vertex: c.vertex.clone(),
                label: label.mnemonic(),
                heads: c.heads,
                written,
            });
        }
        match step_mut(m, &mut c) {
            InternalStep::Advanced => steps += 1,
            InternalStep::Stuck => return finish(RunStatus::Stuck, c, steps),
            // Unreachable: halts and queries were handled above.
            InternalStep::Accept => return finish(RunStatus::Accepted, c, steps),
            InternalStep::Reject => return finish(RunStatus::Rejected, c, steps),
            InternalStep::Query => {
                let v = c.vertex.clone();
                return finish(RunStatus::QueryEncountered(v), c, steps);
            }
        }
    }
}

/// Runs `m` on `input` from the initial configuration for at most `fuel`
/// steps. Query vertices terminate the run with `QueryEncountered`; the
/// oracle module provides query resolution.
pub fn run(m: &MachineGraph, input: &EvSeq, fuel: u64) -> RunResult {
    run_inner(m, input, fuel, None)
}

/// As [`run`], also collecting one trace record per executed step.
pub fn run_traced(m: &MachineGraph, input: &EvSeq, fuel: u64) -> (RunResult, Vec<TraceRecord>) {
    let mut trace = Vec::new();
    let result = run_inner(m, input, fuel, Some(&mut trace));
    (result, trace)
}

/// Step events surfaced by an executable machine object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Ran,
    Accepted,
    Rejected,
    Stuck,
    Query,
}

/// Anything the oracle runner can drive: plain graphs, interpreter-backed
/// composites, and compiled circuit plans. A state that reported
/// [`StepEvent::Query`] stays parked at the query until the runner either
/// extracts the spawned sub-computation (`query_spawn`) and resumes it
/// with an answer, or abandons the run.
pub trait Exec {
    type St: Clone;

    fn start_state(&self, input: &EvSeq) -> Self::St;
    fn step(&self, st: &mut Self::St) -> StepEvent;
    /// The sub-computation computing the pending query: tapes 0-2 and
    /// their heads copied, output erased, control at the query successor.
    fn query_spawn(&self, st: &Self::St) -> Self::St;
    /// Resumes past the pending query: the answer replaces work tape 2
    /// with its head reset, everything else untouched.
    fn resume(&self, st: &mut Self::St, answer: &EvSeq);
    /// Number of stable output cells produced so far.
    fn written_len(&self, st: &Self::St) -> usize;
    /// Output cell `j`; valid for `j < written_len`.
    fn output_cell(&self, st: &Self::St, j: usize) -> Symbol;
    fn written(&self, st: &Self::St) -> Vec<Symbol> {
        (0..self.written_len(st)).map(|j| self.output_cell(st, j)).collect()
    }
    /// Full output; meaningful once the state accepted.
    fn output(&self, st: &Self::St) -> EvSeq;
    /// Diagnostic name of the pending query site.
    fn query_site(&self, st: &Self::St) -> String;
    /// The input position the next step would read, when the machine
    /// supports streamed input. Composition uses this to drive the
    /// producing stage on demand.
    fn input_demand(&self, _st: &Self::St) -> Option<usize> {
        None
    }
    /// Supplies one input cell to a machine started on a streamed input.
    fn feed_input(&self, _st: &mut Self::St, _pos: usize, _sym: Symbol) {
        panic!("machine does not support streamed input");
    }
}

impl Exec for MachineGraph {
    type St = Configuration;

    fn start_state(&self, input: &EvSeq) -> Configuration {
        Configuration::initial(self, input)
    }

    fn step(&self, st: &mut Configuration) -> StepEvent {
        match step_mut(self, st) {
            InternalStep::Advanced => StepEvent::Ran,
            InternalStep::Accept => StepEvent::Accepted,
            InternalStep::Reject => StepEvent::Rejected,
            InternalStep::Stuck => StepEvent::Stuck,
            InternalStep::Query => StepEvent::Query,
        }
    }

    fn query_spawn(&self, st: &Configuration) -> Configuration {
        let succ = self.successors(&st.vertex);
        Configuration {
            vertex: succ[1].clone(),
            tapes: [
                st.tapes[0].clone(),
                st.tapes[1].clone(),
                st.tapes[2].clone(),
                Tape::zeros(),
            ],
            heads: [st.heads[0], st.heads[1], st.heads[2], 0],
        }
    }

    fn resume(&self, st: &mut Configuration, answer: &EvSeq) {
        let succ = self.successors(&st.vertex);
        st.vertex = succ[0].clone();
        st.tapes[2] = Tape::from_seq(answer.clone());
        st.heads[2] = 0;
    }

    fn written_len(&self, st: &Configuration) -> usize {
        st.heads[3]
    }

    fn output_cell(&self, st: &Configuration, j: usize) -> Symbol {
        st.tapes[3].read(j)
    }

    fn written(&self, st: &Configuration) -> Vec<Symbol> {
        st.written_output()
    }

    fn output(&self, st: &Configuration) -> EvSeq {
        st.tape_seq(3)
    }

    fn query_site(&self, st: &Configuration) -> String {
        st.vertex.clone()
    }

    fn input_demand(&self, st: &Configuration) -> Option<usize> {
        match self.label(&st.vertex) {
            Some(Label::Branch(ReadTape::Input)) => Some(st.heads[0]),
            _ => None,
        }
    }

    fn feed_input(&self, st: &mut Configuration, pos: usize, sym: Symbol) {
        st.tapes[0].set(pos, sym);
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Accepted => write!(f, "accepted"),
            RunStatus::Rejected => write!(f, "rejected"),
            RunStatus::Stuck => write!(f, "stuck"),
            RunStatus::FuelExhausted => write!(f, "fuel-exhausted"),
            RunStatus::QueryEncountered(v) => write!(f, "query-encountered({v})"),
            RunStatus::CallLimitExceeded => write!(f, "call-limit-exceeded"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str) -> EvSeq {
        text.parse().unwrap()
    }

    /// start s0; s0: s -> c; c: t0 -> z,o; z: w3=0 -> h; o: w3=1 -> h2;
    /// h: r0 -> c; h2: r0 -> c — copies the input to the output forever.
    pub(crate) fn copy_machine() -> MachineGraph {
        let mut m = MachineGraph::new("copy", "s0");
        m.add_vertex("s0", Label::Start, vec!["c".into()])
            .add_vertex("c", Label::Branch(ReadTape::Input), vec!["z".into(), "o".into()])
            .add_vertex("z", Label::Write(WriteTape::Output, false), vec!["h".into()])
            .add_vertex("o", Label::Write(WriteTape::Output, true), vec!["h2".into()])
            .add_vertex("h", Label::MoveRight(ReadTape::Input), vec!["c".into()])
            .add_vertex("h2", Label::MoveRight(ReadTape::Input), vec!["c".into()]);
        m.validate().unwrap();
        m
    }

    fn accept_now() -> MachineGraph {
        let mut m = MachineGraph::new("accept_now", "s0");
        m.add_vertex("s0", Label::Start, vec!["h".into()])
            .add_vertex("h", Label::Accept, vec![]);
        m.validate().unwrap();
        m
    }

    #[test]
    fn validate_accepts_copy_machine() {
        assert!(copy_machine().validate().is_ok());
    }

    #[test]
    fn validate_rejects_accept_with_successor() {
        let mut m = MachineGraph::new("bad", "s0");
        m.add_vertex("s0", Label::Start, vec!["h".into()])
            .add_vertex("h", Label::Accept, vec!["s0".into()]);
        let err = m.validate().unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::BadOutDegree);
        assert_eq!(err.vertex, "h");
    }

    #[test]
    fn validate_rejects_two_starts() {
        let mut m = MachineGraph::new("two", "a");
        m.add_vertex("a", Label::Start, vec!["b".into()])
            .add_vertex("b", Label::Start, vec!["c".into()])
            .add_vertex("c", Label::Accept, vec![]);
        let err = m.validate().unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::MultipleStart);
    }

    #[test]
    fn validate_rejects_edge_into_start() {
        let mut m = MachineGraph::new("loopback", "a");
        m.add_vertex("a", Label::Start, vec!["b".into()])
            .add_vertex("b", Label::MoveRight(ReadTape::Input), vec!["a".into()]);
        let err = m.validate().unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::StartHasIncoming);
    }

    #[test]
    fn validate_rejects_dangling_successor() {
        let mut m = MachineGraph::new("dangling", "a");
        m.add_vertex("a", Label::Start, vec!["ghost".into()]);
        let err = m.validate().unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::DanglingSuccessor);
    }

    #[test]
    fn move_right_only_adjusts_one_head() {
        let mut m = MachineGraph::new("mv", "s");
        m.add_vertex("s", Label::Start, vec!["r".into()])
            .add_vertex("r", Label::MoveRight(ReadTape::Work1), vec!["a".into()])
            .add_vertex("a", Label::Accept, vec![]);
        let mut c = Configuration::initial(&m, &EvSeq::zeros());
        c.vertex = "r".into();
        c.heads = [2, 4, 1, 0];
        match step(&m, &c) {
            StepResult::Next(n) => {
                assert_eq!(n.heads, [2, 5, 1, 0]);
                assert_eq!(n.vertex, "a");
                assert_eq!(n.tapes, c.tapes);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_sets_cell_and_advances() {
        let mut m = MachineGraph::new("wr", "s");
        m.add_vertex("s", Label::Start, vec!["w".into()])
            .add_vertex("w", Label::Write(WriteTape::Output, true), vec!["a".into()])
            .add_vertex("a", Label::Accept, vec![]);
        let mut c = Configuration::initial(&m, &EvSeq::zeros());
        c.vertex = "w".into();
        c.heads[3] = 2;
        match step(&m, &c) {
            StepResult::Next(n) => {
                assert_eq!(n.heads[3], 3);
                assert_eq!(n.tape_seq(3), seq("001:0"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn branch_selects_second_successor_on_one() {
        let m = copy_machine();
        let mut c = Configuration::initial(&m, &seq("1:0"));
        c.vertex = "c".into();
        match step(&m, &c) {
            StepResult::Next(n) => assert_eq!(n.vertex, "o"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn run_copy_machine_exhausts_fuel_with_growing_output() {
        let m = copy_machine();
        let r = run(&m, &seq("1101:0"), 10_000);
        assert_eq!(r.status, RunStatus::FuelExhausted);
        assert_eq!(output_prefix(&r, 4).unwrap(), vec![1, 1, 0, 1]);

        let small = run(&m, &seq("1101:0"), 100);
        let big = run(&m, &seq("1101:0"), 1000);
        let k = small.output.available().unwrap();
        assert!(big.output.available().unwrap() >= k);
        assert_eq!(output_prefix(&big, k).unwrap(), output_prefix(&small, k).unwrap());
    }

    #[test]
    fn run_accept_now_yields_zero_output() {
        let r = run(&accept_now(), &seq("111:1"), 100);
        assert_eq!(r.status, RunStatus::Accepted);
        assert_eq!(r.output, Output::Full(EvSeq::zeros()));
        assert_eq!(r.steps_used, 1);
    }

    #[test]
    fn immediate_move_left_gets_stuck() {
        let mut m = MachineGraph::new("stuck", "s");
        m.add_vertex("s", Label::Start, vec!["l".into()])
            .add_vertex("l", Label::MoveLeft(ReadTape::Work1), vec!["a".into()])
            .add_vertex("a", Label::Accept, vec![]);
        m.validate().unwrap();
        let r = run(&m, &EvSeq::zeros(), 100);
        assert_eq!(r.status, RunStatus::Stuck);
        assert_eq!(r.steps_used, 1);
    }

    #[test]
    fn query_without_budget_is_a_distinguished_reject() {
        let mut m = MachineGraph::new("q", "s");
        m.add_vertex("s", Label::Start, vec!["q".into()])
            .add_vertex("q", Label::Query, vec!["c".into(), "g".into()])
            .add_vertex("c", Label::Accept, vec![])
            .add_vertex("g", Label::Accept, vec![]);
        m.validate().unwrap();
        let r = run(&m, &EvSeq::zeros(), 100);
        assert_eq!(r.status, RunStatus::QueryEncountered("q".into()));
    }

    #[test]
    fn prefix_unavailable_past_written_region() {
        let m = copy_machine();
        let r = run(&m, &seq("10:0"), 9); // 2 full write cycles + a bit
        let avail = r.output.available().unwrap();
        let err = output_prefix(&r, avail + 3).unwrap_err();
        assert_eq!(err.requested, avail + 3);
        assert_eq!(err.available, avail);
    }

    #[test]
    fn accepted_output_prefix_always_available() {
        let r = run(&accept_now(), &EvSeq::zeros(), 10);
        assert_eq!(output_prefix(&r, 3).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn step_is_deterministic() {
        let m = copy_machine();
        let c = Configuration::initial(&m, &seq("01:0"));
        assert_eq!(step(&m, &c), step(&m, &c));
        let r1 = run(&m, &seq("01:0"), 500);
        let r2 = run(&m, &seq("01:0"), 500);
        assert_eq!(r1, r2);
    }

    #[test]
    fn input_tape_is_never_modified() {
        let m = copy_machine();
        let input = seq("1101:0");
        let r = run(&m, &input, 333);
        assert_eq!(r.final_config.tape_seq(0), input);
    }

    #[test]
    fn trace_records_carry_writes() {
        let m = copy_machine();
        let (_, trace) = run_traced(&m, &seq("1:0"), 4);
        assert_eq!(trace.len(), 4);
        assert_eq!(trace[0].vertex, "s0");
        assert_eq!(trace[0].label, "s");
        let w = trace
            .iter()
            .find(|t| t.written.is_some())
            .and_then(|t| t.written.as_ref())
            .unwrap();
        assert_eq!((w.tape, w.pos, w.bit), (3, 0, 1));
        let json = serde_json::to_string(&trace[0]).unwrap();
        assert!(json.contains("\"vertex\":\"s0\""));
        assert!(json.contains("\"heads\":[0,0,0,0]"));
    }
}
