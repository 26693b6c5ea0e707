//! Library side of the `npbf` command: input parsing, report formatting and
//! simulation orchestration.

pub mod analyze;
pub mod error;
pub mod format;
pub mod input;
pub mod simulate;
