//! Arithmetic circuits over finite sets of naturals, with the
//! zero-adjoining multiplication gate and the emptiness test gate.
//! Evaluation is direct; compilation produces an executable plan whose
//! test gates each become one LPO call when run under the oracle
//! semantics at depth 1.
//!
//! Set encoding on binary tapes: each element `e` is the block
//! `1^(e+1) 0` (elements ascending), and a bare `0` block ends the list,
//! so nonempty encodings end in a double zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::machine::{Exec, StepEvent};
use crate::seq::{EvSeq, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate {gate:?} refers to {operand:?}, which is not defined before it")]
    OperandOrder { gate: String, operand: String },
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("duplicate gate {0:?}")]
    DuplicateGate(String),
    #[error("input slot {0:?} is not a const gate")]
    NotAConstSlot(String),
    #[error("circuit declares no outputs")]
    NoOutputs,
    #[error("arithmetic overflow in gate {0:?}")]
    Overflow(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("bad set encoding: {0}")]
    BadEncoding(String),
}

/// A finite set of naturals.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct NatSet(BTreeSet<u64>);

impl NatSet {
    pub fn new(elements: impl IntoIterator<Item = u64>) -> Self {
        NatSet(elements.into_iter().collect())
    }

    pub fn empty() -> Self {
        NatSet(BTreeSet::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.0.contains(&n)
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.iter().next_back().copied()
    }

    pub fn is_subset(&self, other: &NatSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateOp {
    Const(NatSet),
    Union(usize, usize),
    Intersect(usize, usize),
    Plus(usize, usize),
    /// `{n*m} ∪ {0}`: the zero is always adjoined, even over empty
    /// operands.
    TimesC(usize, usize),
    /// `∅` on the empty set, `{0}` otherwise.
    Test(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub op: GateOp,
}

/// A topologically ordered gate list with designated outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

impl Circuit {
    pub fn new(gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self, CircuitError> {
        let mut seen = BTreeSet::new();
        for (i, gate) in gates.iter().enumerate() {
            if !seen.insert(gate.name.clone()) {
                return Err(CircuitError::DuplicateGate(gate.name.clone()));
            }
            let operands: Vec<usize> = match &gate.op {
                GateOp::Const(_) => vec![],
                GateOp::Union(a, b)
                | GateOp::Intersect(a, b)
                | GateOp::Plus(a, b)
                | GateOp::TimesC(a, b) => vec![*a, *b],
                GateOp::Test(a) => vec![*a],
            };
            for op in operands {
                if op >= i {
                    return Err(CircuitError::OperandOrder {
                        gate: gate.name.clone(),
                        operand: gates
                            .get(op)
                            .map(|g| g.name.clone())
                            .unwrap_or_else(|| format!("#{op}")),
                    });
                }
            }
        }
        if outputs.is_empty() {
            return Err(CircuitError::NoOutputs);
        }
        for &o in &outputs {
            if o >= gates.len() {
                return Err(CircuitError::UnknownGate(format!("#{o}")));
            }
        }
        Ok(Circuit { gates, outputs })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn gate_index(&self, name: &str) -> Option<usize> {
        self.gates.iter().position(|g| g.name == name)
    }
}

/// Number of test gates.
pub fn count_test_gates(c: &Circuit) -> usize {
    c.gates
        .iter()
        .filter(|g| matches!(g.op, GateOp::Test(_)))
        .count()
}

fn apply_gate(op: &GateOp, values: &[NatSet], name: &str) -> Result<NatSet, CircuitError> {
    Ok(match op {
        GateOp::Const(set) => set.clone(),
        GateOp::Union(a, b) => NatSet(values[*a].0.union(&values[*b].0).copied().collect()),
        GateOp::Intersect(a, b) => {
            NatSet(values[*a].0.intersection(&values[*b].0).copied().collect())
        }
        GateOp::Plus(a, b) => {
            let mut out = BTreeSet::new();
            for x in &values[*a].0 {
                for y in &values[*b].0 {
                    out.insert(
                        x.checked_add(*y)
                            .ok_or_else(|| CircuitError::Overflow(name.to_string()))?,
                    );
                }
            }
            NatSet(out)
        }
        GateOp::TimesC(a, b) => {
            let mut out = BTreeSet::new();
            out.insert(0);
            for x in &values[*a].0 {
                for y in &values[*b].0 {
                    out.insert(
                        x.checked_mul(*y)
                            .ok_or_else(|| CircuitError::Overflow(name.to_string()))?,
                    );
                }
            }
            NatSet(out)
        }
        GateOp::Test(a) => {
            if values[*a].is_empty() {
                NatSet::empty()
            } else {
                NatSet::new([0])
            }
        }
    })
}

/// Direct evaluation. The `inputs` map overrides const gates by name.
pub fn eval_circuit(
    c: &Circuit,
    inputs: &BTreeMap<String, NatSet>,
) -> Result<BTreeMap<String, NatSet>, CircuitError> {
    for name in inputs.keys() {
        match c.gate_index(name) {
            Some(i) => {
                if !matches!(c.gates[i].op, GateOp::Const(_)) {
                    return Err(CircuitError::NotAConstSlot(name.clone()));
                }
            }
            None => return Err(CircuitError::UnknownGate(name.clone())),
        }
    }
    let mut values: Vec<NatSet> = Vec::with_capacity(c.gates.len());
    for gate in &c.gates {
        let value = match (&gate.op, inputs.get(&gate.name)) {
            (GateOp::Const(_), Some(over)) => over.clone(),
            (op, _) => apply_gate(op, &values, &gate.name)?,
        };
        values.push(value);
    }
    Ok(c.outputs
        .iter()
        .map(|&o| (c.gates[o].name.clone(), values[o].clone()))
        .collect())
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

fn parse_set(text: &str, line: usize) -> Result<NatSet, CircuitError> {
    let body = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| CircuitError::Parse {
            line,
            message: format!("expected a set literal, found {text:?}"),
        })?;
    let body = body.trim();
    if body.is_empty() {
        return Ok(NatSet::empty());
    }
    body.split(',')
        .map(|part| {
            part.trim().parse::<u64>().map_err(|_| CircuitError::Parse {
                line,
                message: format!("bad set element {part:?}"),
            })
        })
        .collect::<Result<BTreeSet<_>, _>>()
        .map(NatSet)
}

/// Parses the line-based circuit format: `name = const {..}`,
/// `name = union|intersect|plus|times a b`, `name = test a`,
/// `output name`. `#` comments run to end of line.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut gates: Vec<Gate> = Vec::new();
    let mut outputs: Vec<usize> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("output") {
            let name = rest.trim();
            let &i = index.get(name).ok_or_else(|| CircuitError::UnknownGate(name.into()))?;
            outputs.push(i);
            continue;
        }
        let (name, rhs) = content.split_once('=').ok_or_else(|| CircuitError::Parse {
            line,
            message: "expected `name = op ...` or `output name`".into(),
        })?;
        let name = name.trim().to_string();
        if index.contains_key(&name) {
            return Err(CircuitError::DuplicateGate(name));
        }
        let rhs = rhs.trim();
        let (op_word, args) = rhs.split_once(char::is_whitespace).unwrap_or((rhs, ""));
        let resolve = |arg: &str| -> Result<usize, CircuitError> {
            index
                .get(arg.trim())
                .copied()
                .ok_or_else(|| CircuitError::UnknownGate(arg.trim().into()))
        };
        let two = |args: &str| -> Result<(usize, usize), CircuitError> {
            let mut parts = args.split_whitespace();
            let a = parts.next().ok_or_else(|| CircuitError::Parse {
                line,
                message: "expected two operands".into(),
            })?;
            let b = parts.next().ok_or_else(|| CircuitError::Parse {
                line,
                message: "expected two operands".into(),
            })?;
            if parts.next().is_some() {
                return Err(CircuitError::Parse {
                    line,
                    message: "too many operands".into(),
                });
            }
            Ok((resolve(a)?, resolve(b)?))
        };
        let op = match op_word {
            "const" => GateOp::Const(parse_set(args, line)?),
            "union" => {
                let (a, b) = two(args)?;
                GateOp::Union(a, b)
            }
            "intersect" => {
                let (a, b) = two(args)?;
                GateOp::Intersect(a, b)
            }
            "plus" => {
                let (a, b) = two(args)?;
                GateOp::Plus(a, b)
            }
            "times" => {
                let (a, b) = two(args)?;
                GateOp::TimesC(a, b)
            }
            "test" => GateOp::Test(resolve(args)?),
            other => {
                return Err(CircuitError::Parse {
                    line,
                    message: format!("unknown gate kind {other:?}"),
                })
            }
        };
        index.insert(name.clone(), gates.len());
        gates.push(Gate { name, op });
    }
    Circuit::new(gates, outputs)
}

// ---------------------------------------------------------------------------
// Tape encoding
// ---------------------------------------------------------------------------

/// Encodes a set as tape cells: ascending elements as `1^(e+1) 0`
/// blocks, closed by a bare `0`.
pub fn encode_natset(set: &NatSet) -> Vec<Symbol> {
    let mut out = Vec::new();
    for e in set.elements() {
        out.extend(std::iter::repeat(1).take(e as usize + 1));
        out.push(0);
    }
    out.push(0);
    out
}

/// Decodes one encoded set from the front of `cells`, returning the set
/// and the cells consumed.
pub fn decode_natset(cells: &[Symbol]) -> Result<(NatSet, usize), CircuitError> {
    let mut set = BTreeSet::new();
    let mut pos = 0;
    loop {
        let mut run = 0u64;
        loop {
            match cells.get(pos) {
                Some(1) => {
                    run += 1;
                    pos += 1;
                }
                Some(0) => {
                    pos += 1;
                    break;
                }
                Some(other) => {
                    return Err(CircuitError::BadEncoding(format!(
                        "symbol {other} at cell {pos}"
                    )))
                }
                None => return Err(CircuitError::BadEncoding("truncated".into())),
            }
        }
        if run == 0 {
            return Ok((NatSet(set), pos));
        }
        set.insert(run - 1);
    }
}

// ---------------------------------------------------------------------------
// Compilation to an executable plan
// ---------------------------------------------------------------------------

/// An executable circuit plan. Run under the oracle semantics at depth 1
/// with the LPO oracle, it evaluates the circuit: every test gate fires
/// exactly one query whose stream enumerates candidate naturals, writing
/// a 1 on the first element of the operand (all-zero when the operand is
/// empty). The machine input is ignored; the circuit is self-contained.
#[derive(Debug, Clone)]
pub struct CompiledPlan {
    circuit: Circuit,
}

#[derive(Debug, Clone)]
pub enum PlanState {
    Eval {
        values: Vec<NatSet>,
        next: usize,
        failed: Option<String>,
    },
    Emit {
        values: Vec<NatSet>,
        buffer: Vec<Symbol>,
        pos: usize,
    },
    /// The query computation of a pending test gate: writes one cell per
    /// step (0 per absent candidate, 1 at the first element), accepts.
    Spawn { cells: Vec<Symbol>, pos: usize },
}

impl CompiledPlan {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }
}

impl Exec for CompiledPlan {
    type St = PlanState;

    fn start_state(&self, _input: &EvSeq) -> PlanState {
        PlanState::Eval {
            values: Vec::new(),
            next: 0,
            failed: None,
        }
    }

    fn step(&self, st: &mut PlanState) -> StepEvent {
        match st {
            PlanState::Eval { values, next, failed } => {
                if failed.is_some() {
                    return StepEvent::Stuck;
                }
                if *next == self.circuit.gates.len() {
                    let mut buffer = Vec::new();
                    for &o in self.circuit.outputs() {
                        buffer.extend(encode_natset(&values[o]));
                    }
                    *st = PlanState::Emit {
                        values: std::mem::take(values),
                        buffer,
                        pos: 0,
                    };
                    return StepEvent::Ran;
                }
                let gate = &self.circuit.gates[*next];
                if matches!(gate.op, GateOp::Test(_)) {
                    return StepEvent::Query;
                }
                match apply_gate(&gate.op, values, &gate.name) {
                    Ok(v) => {
                        values.push(v);
                        *next += 1;
                        StepEvent::Ran
                    }
                    Err(e) => {
                        *failed = Some(e.to_string());
                        StepEvent::Stuck
                    }
                }
            }
            PlanState::Emit { buffer, pos, .. } => {
                if *pos < buffer.len() {
                    *pos += 1;
                    StepEvent::Ran
                } else {
                    StepEvent::Accepted
                }
            }
            PlanState::Spawn { cells, pos } => {
                if *pos < cells.len() {
                    *pos += 1;
                    StepEvent::Ran
                } else {
                    StepEvent::Accepted
                }
            }
        }
    }

    fn query_spawn(&self, st: &PlanState) -> PlanState {
        match st {
            PlanState::Eval { values, next, .. } => {
                let GateOp::Test(a) = &self.circuit.gates[*next].op else {
                    panic!("no pending test gate");
                };
                let operand = &values[*a];
                let cells = match operand.elements().next() {
                    // 0 for each candidate below the first element, then 1.
                    Some(first) => {
                        let mut cells = vec![0; first as usize];
                        cells.push(1);
                        cells
                    }
                    None => Vec::new(),
                };
                PlanState::Spawn { cells, pos: 0 }
            }
            _ => panic!("no pending query"),
        }
    }

    fn resume(&self, st: &mut PlanState, answer: &EvSeq) {
        match st {
            PlanState::Eval { values, next, .. } => {
                let value = if answer.is_all_zero() {
                    NatSet::empty()
                } else {
                    NatSet::new([0])
                };
                values.push(value);
                *next += 1;
            }
            _ => panic!("no pending query"),
        }
    }

    fn written_len(&self, st: &PlanState) -> usize {
        match st {
            PlanState::Eval { .. } => 0,
            PlanState::Emit { pos, .. } => *pos,
            PlanState::Spawn { pos, .. } => *pos,
        }
    }

    fn output_cell(&self, st: &PlanState, j: usize) -> Symbol {
        match st {
            PlanState::Eval { .. } => 0,
            PlanState::Emit { buffer, .. } => buffer[j],
            PlanState::Spawn { cells, .. } => cells[j],
        }
    }

    fn output(&self, st: &PlanState) -> EvSeq {
        EvSeq::make(self.written(st), 0)
    }

    fn query_site(&self, st: &PlanState) -> String {
        match st {
            PlanState::Eval { next, .. } => self
                .circuit
                .gates
                .get(*next)
                .map(|g| g.name.clone())
                .unwrap_or_else(|| "plan".into()),
            _ => "plan".into(),
        }
    }
}

/// Compiles a circuit into an executable plan; reports the number of
/// LPO calls it makes (one per test gate) and the level bound `2^n`
/// those calls imply (metadata only, never computed from the function).
pub fn compile_to_machine(c: &Circuit) -> (CompiledPlan, usize, u64) {
    let tests = count_test_gates(c);
    let level_bound = if tests >= 64 {
        u64::MAX
    } else {
        1u64 << tests
    };
    (
        CompiledPlan {
            circuit: c.clone(),
        },
        tests,
        level_bound,
    )
}

/// Decodes the plan's accepted output back into per-output sets.
pub fn decode_plan_output(
    c: &Circuit,
    cells: &[Symbol],
) -> Result<BTreeMap<String, NatSet>, CircuitError> {
    let mut out = BTreeMap::new();
    let mut pos = 0;
    for &o in c.outputs() {
        let (set, used) = decode_natset(&cells[pos..])?;
        pos += used;
        out.insert(c.gates()[o].name.clone(), set);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{lpo, run_with_oracle};

    fn set(elements: &[u64]) -> NatSet {
        NatSet::new(elements.iter().copied())
    }

    #[test]
    fn gate_formulas() {
        let values = vec![set(&[1, 2]), set(&[3]), NatSet::empty()];
        assert_eq!(
            apply_gate(&GateOp::TimesC(0, 1), &values, "t").unwrap(),
            set(&[0, 3, 6])
        );
        assert_eq!(
            apply_gate(&GateOp::TimesC(0, 2), &values, "t").unwrap(),
            set(&[0])
        );
        assert_eq!(
            apply_gate(&GateOp::Plus(0, 1), &values, "p").unwrap(),
            set(&[4, 5])
        );
        assert_eq!(
            apply_gate(&GateOp::Plus(0, 2), &values, "p").unwrap(),
            NatSet::empty()
        );
        assert_eq!(
            apply_gate(&GateOp::Test(2), &values, "q").unwrap(),
            NatSet::empty()
        );
        assert_eq!(apply_gate(&GateOp::Test(1), &values, "q").unwrap(), set(&[0]));
        assert_eq!(
            apply_gate(&GateOp::Union(0, 1), &values, "u").unwrap(),
            set(&[1, 2, 3])
        );
        assert_eq!(
            apply_gate(&GateOp::Intersect(0, 1), &values, "i").unwrap(),
            NatSet::empty()
        );
    }

    const SAMPLE: &str = "\
        g0 = const {1,2}\n\
        g1 = const {3}\n\
        g2 = times g0 g1\n\
        g3 = test g2\n\
        g4 = plus g2 g3\n\
        output g2\n\
        output g4\n";

    #[test]
    fn parse_and_eval() {
        let c = parse_circuit(SAMPLE).unwrap();
        assert_eq!(count_test_gates(&c), 1);
        let out = eval_circuit(&c, &BTreeMap::new()).unwrap();
        assert_eq!(out["g2"], set(&[0, 3, 6]));
        assert_eq!(out["g4"], set(&[0, 3, 6]));
    }

    #[test]
    fn const_slots_accept_inputs() {
        let c = parse_circuit(SAMPLE).unwrap();
        let mut inputs = BTreeMap::new();
        inputs.insert("g1".to_string(), NatSet::empty());
        let out = eval_circuit(&c, &inputs).unwrap();
        assert_eq!(out["g2"], set(&[0]));
        inputs.clear();
        inputs.insert("g2".to_string(), set(&[1]));
        assert!(matches!(
            eval_circuit(&c, &inputs),
            Err(CircuitError::NotAConstSlot(_))
        ));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_circuit("g0 = const {1}\ng0 = const {2}\noutput g0\n"),
            Err(CircuitError::DuplicateGate(_))
        ));
        assert!(matches!(
            parse_circuit("g0 = test g9\noutput g0\n"),
            Err(CircuitError::UnknownGate(_))
        ));
        assert!(matches!(
            parse_circuit("g0 = const {1}\n"),
            Err(CircuitError::NoOutputs)
        ));
        assert!(matches!(
            parse_circuit("g0 = frobnicate {1}\noutput g0\n"),
            Err(CircuitError::Parse { .. })
        ));
    }

    #[test]
    fn set_encoding_round_trip() {
        for s in [
            NatSet::empty(),
            set(&[0]),
            set(&[1, 2]),
            set(&[0, 3, 6]),
            set(&[5]),
        ] {
            let cells = encode_natset(&s);
            let (decoded, used) = decode_natset(&cells).unwrap();
            assert_eq!(decoded, s);
            assert_eq!(used, cells.len());
        }
        // Nonempty encodings end in the double zero.
        let cells = encode_natset(&set(&[1]));
        assert_eq!(cells, vec![1, 1, 0, 0]);
    }

    #[test]
    fn compiled_plan_matches_direct_eval() {
        let c = parse_circuit(SAMPLE).unwrap();
        let (plan, lpo_calls, level_bound) = compile_to_machine(&c);
        assert_eq!(lpo_calls, 1);
        assert_eq!(level_bound, 2);
        let r = run_with_oracle(&plan, &lpo(), &EvSeq::zeros(), 1, 100_000, None).unwrap();
        assert!(r.status.is_accepted());
        assert_eq!(r.total_calls, 1);
        assert!(r.calls.iter().all(|call| call.depth_at_call == 1));
        let cells = r.output.zero_extended();
        let decoded = decode_plan_output(&c, &cells.first(cells.prefix_len().max(64))).unwrap();
        assert_eq!(decoded, eval_circuit(&c, &BTreeMap::new()).unwrap());
    }

    #[test]
    fn test_gate_queries_enumerate_elements() {
        // test of an empty operand: the query stream is all-zero.
        let c = parse_circuit("g0 = const {}\ng1 = test g0\noutput g1\n").unwrap();
        let (plan, lpo_calls, level_bound) = compile_to_machine(&c);
        assert_eq!((lpo_calls, level_bound), (1, 2));
        let r = run_with_oracle(&plan, &lpo(), &EvSeq::zeros(), 1, 10_000, None).unwrap();
        assert_eq!(r.calls[0].query, EvSeq::zeros());
        assert_eq!(r.calls[0].answer, EvSeq::zeros());
        let cells = r.output.zero_extended();
        let decoded = decode_plan_output(&c, &cells.first(16)).unwrap();
        assert_eq!(decoded["g1"], NatSet::empty());

        // test of {2, 5}: zeros up to the first element, then a one.
        let c = parse_circuit("g0 = const {2,5}\ng1 = test g0\noutput g1\n").unwrap();
        let (plan, _, _) = compile_to_machine(&c);
        let r = run_with_oracle(&plan, &lpo(), &EvSeq::zeros(), 1, 10_000, None).unwrap();
        assert_eq!(r.calls[0].query, "001:0".parse().unwrap());
        let cells = r.output.zero_extended();
        let decoded = decode_plan_output(&c, &cells.first(16)).unwrap();
        assert_eq!(decoded["g1"], set(&[0]));
    }

    #[test]
    fn zero_test_circuits_make_zero_calls() {
        let c = parse_circuit("g0 = const {1}\ng1 = plus g0 g0\noutput g1\n").unwrap();
        let (plan, lpo_calls, level_bound) = compile_to_machine(&c);
        assert_eq!((lpo_calls, level_bound), (0, 1));
        let r = run_with_oracle(&plan, &lpo(), &EvSeq::zeros(), 1, 10_000, None).unwrap();
        assert_eq!(r.total_calls, 0);

        let c3 = parse_circuit(
            "g0 = const {}\ng1 = test g0\ng2 = test g1\ng3 = test g2\noutput g3\n",
        )
        .unwrap();
        assert_eq!(count_test_gates(&c3), 3);
        let (_, lpo_calls, level_bound) = compile_to_machine(&c3);
        assert_eq!((lpo_calls, level_bound), (3, 8));
    }

    #[test]
    fn monotone_gates_are_monotone() {
        let smaller = vec![set(&[1]), set(&[2, 4])];
        let larger = vec![set(&[1, 3]), set(&[0, 2, 4])];
        for op in [GateOp::Union(0, 1), GateOp::Plus(0, 1), GateOp::TimesC(0, 1)] {
            let lo = apply_gate(&op, &smaller, "m").unwrap();
            let hi = apply_gate(&op, &larger, "m").unwrap();
            assert!(lo.is_subset(&hi), "{op:?}");
        }
    }

    #[test]
    fn operand_order_is_enforced() {
        let gates = vec![
            Gate {
                name: "a".into(),
                op: GateOp::Test(1),
            },
            Gate {
                name: "b".into(),
                op: GateOp::Const(set(&[1])),
            },
        ];
        assert!(matches!(
            Circuit::new(gates, vec![0]),
            Err(CircuitError::OperandOrder { .. })
        ));
    }
}
