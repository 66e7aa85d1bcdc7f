//! The standard machine collection: thirty small machines covering
//! every vertex label and query nesting depths 0 through 3. The sources
//! live under `corpus/` as `.t2m` files and are embedded here; the test
//! suites and the command-line examples draw from the same set.

use crate::dsl::parse_machine;
use crate::machine::MachineGraph;

/// `(name, source, query nesting depth)`, nesting 0 meaning query-free.
pub const SOURCES: &[(&str, &str, u32)] = &[
    ("copy", include_str!("../corpus/copy.t2m"), 0),
    ("bitflip", include_str!("../corpus/bitflip.t2m"), 0),
    ("accept_now", include_str!("../corpus/accept_now.t2m"), 0),
    ("reject_now", include_str!("../corpus/reject_now.t2m"), 0),
    ("first_bit", include_str!("../corpus/first_bit.t2m"), 0),
    ("copy3", include_str!("../corpus/copy3.t2m"), 0),
    ("flip3", include_str!("../corpus/flip3.t2m"), 0),
    ("shift", include_str!("../corpus/shift.t2m"), 0),
    ("ones", include_str!("../corpus/ones.t2m"), 0),
    ("zeros_forever", include_str!("../corpus/zeros_forever.t2m"), 0),
    ("evens", include_str!("../corpus/evens.t2m"), 0),
    ("odd_proj", include_str!("../corpus/odd_proj.t2m"), 0),
    ("stuck_now", include_str!("../corpus/stuck_now.t2m"), 0),
    ("loop_silent", include_str!("../corpus/loop_silent.t2m"), 0),
    ("work_echo", include_str!("../corpus/work_echo.t2m"), 0),
    ("work2_echo", include_str!("../corpus/work2_echo.t2m"), 0),
    (
        "second_then_first",
        include_str!("../corpus/second_then_first.t2m"),
        0,
    ),
    ("lpo_first", include_str!("../corpus/lpo_first.t2m"), 1),
    ("lpo_first3", include_str!("../corpus/lpo_first3.t2m"), 1),
    ("query_const1", include_str!("../corpus/query_const1.t2m"), 1),
    ("query_const0", include_str!("../corpus/query_const0.t2m"), 1),
    ("lpo_gate", include_str!("../corpus/lpo_gate.t2m"), 1),
    ("two_calls", include_str!("../corpus/two_calls.t2m"), 1),
    ("three_calls", include_str!("../corpus/three_calls.t2m"), 1),
    ("cond_call", include_str!("../corpus/cond_call.t2m"), 1),
    ("rev_confirm", include_str!("../corpus/rev_confirm.t2m"), 1),
    ("rev_revise", include_str!("../corpus/rev_revise.t2m"), 1),
    ("nested2", include_str!("../corpus/nested2.t2m"), 2),
    ("n21", include_str!("../corpus/n21.t2m"), 2),
    ("chain3", include_str!("../corpus/chain3.t2m"), 3),
];

/// Parses one corpus machine by name.
pub fn get(name: &str) -> Option<MachineGraph> {
    SOURCES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, src, _)| parse_machine(src).expect("corpus machines parse"))
}

/// Query nesting depth of one corpus machine.
pub fn nesting(name: &str) -> Option<u32> {
    SOURCES.iter().find(|(n, _, _)| *n == name).map(|&(_, _, d)| d)
}

/// Parses the whole corpus in declaration order.
pub fn all() -> Vec<MachineGraph> {
    SOURCES
        .iter()
        .map(|(_, src, _)| parse_machine(src).expect("corpus machines parse"))
        .collect()
}

/// Machines making oracle calls, paired with their nesting depth.
pub fn callers() -> Vec<(MachineGraph, u32)> {
    SOURCES
        .iter()
        .filter(|(_, _, d)| *d > 0)
        .map(|(_, src, d)| (parse_machine(src).expect("corpus machines parse"), *d))
        .collect()
}
