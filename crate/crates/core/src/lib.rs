//! Secure initialization of sensor nodes over a visual out-of-band channel.
//!
//! A sink pairs with a batch of `n` sensor nodes by running one SAS
//! pairing-protocol instance per node over an adversary-controlled wireless
//! channel. The nodes then blink their short authenticated strings on LEDs
//! simultaneously; the sink films them, decodes every display and accepts a
//! node only if its decoded string matches one of the sink's own unused
//! values and its sync LED behaved.
//!
//! Modules, bottom-up:
//!
//! - [`bits`] and [`crypto`]: bit strings, commitments, the keyed short hash,
//!   SAS computation and link keys.
//! - [`protocol`]: node and sink state machines, the wireless message format,
//!   adversary policies and the virtual-clock batch runner.
//! - [`encoder`]: LED layouts, frame schedules, synthetic camera frames and
//!   PPM I/O.
//! - [`decoder`]: capture timing, LED detection, clustering, bit extraction
//!   and sync validation.
//! - [`harness`]: SAS matching, end-to-end scenarios with fault injection,
//!   attack experiments, timing and energy estimates, and reports.

pub mod bits;
pub mod crypto;
pub mod decoder;
pub mod encoder;
pub mod exec;
pub mod harness;
pub mod protocol;
pub mod seed;

pub use bits::BitString;
