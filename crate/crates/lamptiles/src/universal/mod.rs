//! A universal tile machine: tape symbols, colour grammars, local rules, a two-headed
//! machine compiler and a row simulator, plus macrotile layout arithmetic.

pub mod codec;
pub mod colours;
pub mod layout;
pub mod machine;
pub mod rules;
pub mod sim;

pub use codec::{format_tape, parse_tape, CdInstr, Move, Msig, USymbol};
pub use colours::{NsColour, WeColour};
pub use layout::{floor_k, macrotile_layout, responsibility_zone, LayoutMap};
pub use machine::{compile_tm, full_tape, run_reference, CompiledTm, RefOutcome, TwoHeadTm};
pub use rules::check_tile;
pub use sim::{initial_row, run_machine, run_square, successor_row, RunReport, TraceRow};
