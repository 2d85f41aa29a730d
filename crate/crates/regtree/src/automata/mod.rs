//! Unfold-automata: membership by parity games or branch tables, compilation from
//! yield-algebra presentations, bisimulation closure and formula emission.

mod automaton;
mod compile;
pub mod game;
mod run;

pub use automaton::{dpa_for, AcceptanceSpec, AutomatonDoc, DeltaEntry, Dpa, OmegaDoc, UnfoldAutomaton};
pub use compile::{bisim_closure, compile_algebra, emit_disjunctive_formula, surjections};
pub use game::{brute_force_winners, zielonka, ParityGame, Player, Solution};
pub use run::{accepts, check_run, Membership, Run, RunCheck, RunChoice, RunEntry, RunMemory, RunViolation};
