//! Bit-accurate digit-recurrence division for posit numbers.
//!
//! The crate models the full hardware datapath of a family of posit dividers:
//! decode, exponent/regime scale arithmetic, the residual recurrence (plain
//! two's complement or carry-save), quotient digit selection (non-restoring,
//! SRT radix 2, SRT radix 4 table-based and with operand scaling), on-the-fly
//! quotient conversion, fast final sign/zero detection, and standard-conformant
//! rounding. Every division can emit a per-iteration execution trace together
//! with a deterministic cycle count.
//!
//! Results are checked against [`oracle`], an exact arbitrary-precision
//! rational implementation that shares no arithmetic with the iterative
//! engine.

pub mod codec;
pub mod engine;
pub mod oracle;
pub mod otf;
pub mod prescale;
pub mod qds;
pub mod residual;
pub mod scale;
pub mod sweep;
pub mod trace;

pub use codec::{decode, encode_round, DecodedPosit, NormalPosit, PositWord};
pub use engine::{divide, divide_quick, iteration_count, Division, DivisionConfig, Radix, Variant};
pub use trace::DivisionTrace;
