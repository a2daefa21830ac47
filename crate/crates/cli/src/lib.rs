//! Command implementations behind the `qgeom` binary.
//!
//! Each `cmd_*` function takes a plain argument struct and returns a serialisable report,
//! so the binary only parses flags, prints, and maps verdicts to exit codes.

pub mod commands;
pub mod output;
pub mod state;

pub use commands::{
    cmd_correlate, cmd_gamma_check, cmd_simulate, cmd_theorem_sweep, CorrelateArgs, GammaCheckArgs,
    SimulateArgs, SweepArgs,
};
pub use output::{to_csv_rows, to_json_string, OutputFormat};
pub use state::StateSpec;
