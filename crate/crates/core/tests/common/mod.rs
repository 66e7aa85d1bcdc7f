//! Shared helpers for the integration suites: deterministic sample
//! generators, a behavior observation that is comparable across machine
//! shapes, and an independent brute-force circuit evaluator kept apart
//! from the implementation it checks.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;

use t2m_core::circuits::{Circuit, Gate, GateOp, NatSet};
use t2m_core::machine::{Exec, Output, RunStatus};
use t2m_core::oracle::{run_with_oracle, Oracle};
use t2m_core::seq::{EvSeq, Symbol};

/// Twenty fixed binary inputs with a spread of prefixes and tails.
pub fn binary_inputs() -> Vec<EvSeq> {
    [
        ":0", "1:0", "0:1", ":1", "01:0", "10:0", "11:0", "001:0", "110:0", "101:0", "0101:0",
        "1010:1", "1101:0", "0011:0", "111:0", "0001:0", "100110:0", "010:1", "0110:1",
        "11011:0",
    ]
    .iter()
    .map(|t| t.parse().unwrap())
    .collect()
}

/// A random binary sequence with prefix length below `max_prefix`.
pub fn random_binary(rng: &mut StdRng, max_prefix: usize) -> EvSeq {
    let len = rng.gen_range(0..=max_prefix);
    let prefix = (0..len).map(|_| rng.gen_range(0..=1)).collect();
    EvSeq::make(prefix, rng.gen_range(0..=1))
}

/// A random sequence of naturals bounded by `max_symbol`.
pub fn random_nat_seq(rng: &mut StdRng, max_prefix: usize, max_symbol: Symbol) -> EvSeq {
    let len = rng.gen_range(0..=max_prefix);
    let prefix = (0..len).map(|_| rng.gen_range(0..=max_symbol)).collect();
    EvSeq::make(prefix, rng.gen_range(0..=max_symbol))
}

/// Output-level observation of a run, comparable across differently
/// named machines: acceptance, divergence, and the first `k` output
/// symbols that are actually trustworthy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Behavior {
    pub accepted: bool,
    pub diverged: bool,
    pub prefix: Vec<Symbol>,
}

pub fn behavior<E: Exec>(
    m: &E,
    oracle: &Oracle,
    input: &EvSeq,
    depth: u32,
    fuel: u64,
    k: usize,
) -> Behavior {
    match run_with_oracle(m, oracle, input, depth, fuel, None) {
        Ok(r) => {
            let accepted = r.status == RunStatus::Accepted;
            let mut prefix = match &r.output {
                Output::Full(s) => s.first(k),
                Output::Prefix(p) => p.clone(),
            };
            prefix.truncate(k);
            Behavior {
                accepted,
                diverged: false,
                prefix,
            }
        }
        Err(_) => Behavior {
            accepted: false,
            diverged: true,
            prefix: Vec::new(),
        },
    }
}

// ---------------------------------------------------------------------------
// Independent circuit evaluation (sorted vectors, recursive)
// ---------------------------------------------------------------------------

fn dedup_sorted(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v.dedup();
    v
}

fn naive_gate(c: &Circuit, idx: usize, memo: &mut Vec<Option<Vec<u64>>>) -> Vec<u64> {
    if let Some(v) = &memo[idx] {
        return v.clone();
    }
    let value = match &c.gates()[idx].op {
        GateOp::Const(s) => s.elements().collect(),
        GateOp::Union(a, b) => {
            let mut v = naive_gate(c, *a, memo);
            v.extend(naive_gate(c, *b, memo));
            dedup_sorted(v)
        }
        GateOp::Intersect(a, b) => {
            let right = naive_gate(c, *b, memo);
            naive_gate(c, *a, memo)
                .into_iter()
                .filter(|x| right.contains(x))
                .collect()
        }
        GateOp::Plus(a, b) => {
            let left = naive_gate(c, *a, memo);
            let right = naive_gate(c, *b, memo);
            let mut v = Vec::new();
            for x in &left {
                for y in &right {
                    v.push(x + y);
                }
            }
            dedup_sorted(v)
        }
        GateOp::TimesC(a, b) => {
            let left = naive_gate(c, *a, memo);
            let right = naive_gate(c, *b, memo);
            let mut v = vec![0];
            for x in &left {
                for y in &right {
                    v.push(x * y);
                }
            }
            dedup_sorted(v)
        }
        GateOp::Test(a) => {
            if naive_gate(c, *a, memo).is_empty() {
                vec![]
            } else {
                vec![0]
            }
        }
    };
    memo[idx] = Some(value.clone());
    value
}

/// Brute-force evaluation with sorted element vectors, independent of
/// the circuit module's evaluator.
pub fn naive_eval(c: &Circuit) -> BTreeMap<String, Vec<u64>> {
    let mut memo = vec![None; c.gates().len()];
    c.outputs()
        .iter()
        .map(|&o| (c.gates()[o].name.clone(), naive_gate(c, o, &mut memo)))
        .collect()
}

/// A random circuit with up to `max_gates` gates and set elements below
/// 64, at least one const gate at the front.
pub fn random_circuit(rng: &mut StdRng, max_gates: usize) -> Circuit {
    let n = rng.gen_range(2..=max_gates.max(2));
    let mut gates = Vec::with_capacity(n);
    for i in 0..n {
        let op = if i == 0 || rng.gen_bool(0.3) {
            GateOp::Const(random_set(rng))
        } else {
            let a = rng.gen_range(0..i);
            let b = rng.gen_range(0..i);
            match rng.gen_range(0..5) {
                0 => GateOp::Union(a, b),
                1 => GateOp::Intersect(a, b),
                2 => GateOp::Plus(a, b),
                3 => GateOp::TimesC(a, b),
                _ => GateOp::Test(a),
            }
        };
        gates.push(Gate {
            name: format!("g{i}"),
            op,
        });
    }
    let outputs = vec![rng.gen_range(0..n)];
    Circuit::new(gates, outputs).expect("generated circuits are well-formed")
}

fn random_set(rng: &mut StdRng) -> NatSet {
    let len = rng.gen_range(0..=4);
    NatSet::new((0..len).map(|_| rng.gen_range(0..64u64)))
}
