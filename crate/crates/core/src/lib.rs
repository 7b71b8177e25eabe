//! A loopback testbed for DNSSEC algorithm-downgrade attacks.
//!
//! A signed zone hierarchy is served by [`zone`], a rule-driven
//! man-in-the-middle proxy in [`mutator`] rewrites DNSSEC algorithm fields
//! and injects records, and [`validator`] walks the chain of trust under a
//! selectable [`validator::ValidatorPolicy`]. [`harness`] runs the
//! scenario × policy matrix and classifies each outcome.

pub mod dnssec;
pub mod harness;
pub mod mutator;
pub mod net;
pub mod validator;
pub mod wire;
pub mod zone;
