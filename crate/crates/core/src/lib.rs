//! Modelling and optimization toolkit for piezo-optomechanical
//! microwave-to-optical transducers.
//!
//! * [`sfg`]: signal flow graphs solved by Mason's gain rule, with a direct
//!   linear-solve cross-check.
//! * [`dynamics`]: the transducer parameter set, susceptibilities and
//!   frequency responses.
//! * [`analysis`]: cooperativities, pump optimization, spectra and sweeps.
//! * [`coupling`]: coupling constants and mode volumes from sampled fields.
//! * [`rings`]: coupled ring resonator spectra and evanescent coupling.
//! * [`materials`]: the materials table and its figures of merit.

pub mod analysis;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod materials;
pub mod rings;
pub mod sfg;
pub mod sweep;
pub mod units;

pub use num_complex::Complex64;

pub use analysis::{CooperativitySet, SpectrumResult};
pub use coupling::{Grid3D, MaterialTensorSet, ModeField};
pub use dynamics::{OperatingPoint, Preset, Susceptibility, TransducerParams};
pub use error::{Error, Result};
pub use materials::{FomResult, FomValue, MaterialRecord};
pub use rings::{CouplerGeometry, RingPair};
pub use sfg::{NodeKind, SfgBuilder, SignalFlowGraph};
pub use sweep::SweepResult;
