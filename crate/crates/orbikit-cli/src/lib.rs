//! Library half of the `orbikit` binary: JSON readers/writers for every
//! subcommand and the self-verification suites.  Kept as a library so the
//! integration tests can reuse the exact readers the binary honors.

pub mod json;
pub mod verify;
