//! Coupled micro-ring pair: critical frequencies, supermodes, a bus
//! transmission model and evanescent-coupler beat length.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::SweepResult;
use crate::units::rad_to_hz;

/// Two identical rings, the second side-coupled to a bus waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingPair {
    /// Round-trip time in seconds.
    pub round_trip: f64,
    /// Inter-ring coupling in rad/s; the field transmission between rings is `sin(J T)`.
    pub j: f64,
    /// Round-trip field amplitude, in (0, 1].
    pub loss: f64,
    /// Bus field coupling, in [0, 1].
    pub bus: f64,
}

impl RingPair {
    pub fn new(round_trip: f64, j: f64, loss: f64, bus: f64) -> Result<Self> {
        let rp = RingPair {
            round_trip,
            j,
            loss,
            bus,
        };
        rp.validate()?;
        Ok(rp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.round_trip > 0.0 && self.round_trip.is_finite()) {
            return Err(Error::param("round_trip", "must be positive"));
        }
        if !self.j.is_finite() {
            return Err(Error::param("j", "must be finite"));
        }
        if !(self.loss > 0.0 && self.loss <= 1.0) {
            return Err(Error::param(
                "loss",
                "round-trip amplitude must lie in (0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.bus) {
            return Err(Error::param("bus", "bus coupling must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn free_spectral_range(&self) -> f64 {
        std::f64::consts::TAU / self.round_trip
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    FlatPoint,
    SplitResonanceLower,
    SplitResonanceUpper,
}

impl CriticalKind {
    pub fn label(self) -> &'static str {
        match self {
            CriticalKind::FlatPoint => "flat-point",
            CriticalKind::SplitResonanceLower => "split-resonance-lower",
            CriticalKind::SplitResonanceUpper => "split-resonance-upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalFrequency {
    pub omega: f64,
    pub n: i64,
    pub kind: CriticalKind,
}

/// `(cos(JT) + cos(ωT)) sin(ωT)`, zero at every critical frequency.
pub fn critical_residual(rp: &RingPair, omega: f64) -> f64 {
    let t = rp.round_trip;
    ((rp.j * t).cos() + (omega * t).cos()) * (omega * t).sin()
}

/// Extrema of the weakly bus-coupled transmission, sorted by frequency.
pub fn critical_frequencies(rp: &RingPair, n_range: RangeInclusive<i64>) -> Vec<CriticalFrequency> {
    use std::f64::consts::PI;
    let t = rp.round_trip;
    let mut out = Vec::new();
    for n in n_range {
        out.push(CriticalFrequency {
            omega: n as f64 * PI / t,
            n,
            kind: CriticalKind::FlatPoint,
        });
        let centre = (PI + 2.0 * PI * n as f64) / t;
        out.push(CriticalFrequency {
            omega: centre - rp.j.abs(),
            n,
            kind: CriticalKind::SplitResonanceLower,
        });
        out.push(CriticalFrequency {
            omega: centre + rp.j.abs(),
            n,
            kind: CriticalKind::SplitResonanceUpper,
        });
    }
    out.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    out
}

/// Symmetric and antisymmetric supermode amplitudes.
pub fn supermode_transform(a1: Complex64, a2: Complex64) -> (Complex64, Complex64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ((a1 + a2) * s, (a1 - a2) * s)
}

/// Inverse of [`supermode_transform`] (the map is its own inverse).
pub fn supermode_inverse(sym: Complex64, asym: Complex64) -> (Complex64, Complex64) {
    supermode_transform(sym, asym)
}

/// Bus-waveguide field transmission at `omega`.
///
/// The first ring acts as an all-pass reflector `(t − p)/(1 − t p)` on the
/// second, with `t = cos(JT)` and round-trip factor `p = a e^{i(ωT + π)}`.
pub fn field_transmission(rp: &RingPair, omega: f64) -> Complex64 {
    let t = (rp.j * rp.round_trip).cos();
    let p = Complex64::from_polar(rp.loss, omega * rp.round_trip + std::f64::consts::PI);
    let r1 = (t - p) / (1.0 - t * p);
    let tb = (1.0 - rp.bus * rp.bus).sqrt();
    let loop_gain = p * r1;
    (tb - loop_gain) / (1.0 - tb * loop_gain)
}

pub fn transmission(rp: &RingPair, omega: f64) -> f64 {
    field_transmission(rp, omega).norm_sqr()
}

pub fn transmission_spectrum(rp: &RingPair, grid: &[f64]) -> Result<SweepResult> {
    rp.validate()?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "frequencies must be strictly increasing".into(),
        ));
    }
    let mut s = SweepResult::new(["frequency_hz", "transmission"]);
    for &w in grid {
        s.rows.push(vec![rad_to_hz(w), transmission(rp, w)]);
    }
    Ok(s)
}

/// Parallel-waveguide section of the evanescent coupler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplerGeometry {
    /// Vacuum wavelength in metres.
    pub wavelength: f64,
    pub n_eff_sym: f64,
    pub n_eff_asym: f64,
    /// Interaction length in metres.
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeatLength {
    pub length: f64,
    pub infinite: bool,
}

pub fn beat_length(cg: &CouplerGeometry) -> BeatLength {
    let dn = cg.n_eff_sym - cg.n_eff_asym;
    if dn == 0.0 {
        return BeatLength {
            length: f64::INFINITY,
            infinite: true,
        };
    }
    BeatLength {
        length: cg.wavelength / (2.0 * dn.abs()),
        infinite: false,
    }
}

/// Fraction of the light still in the launch waveguide after length `z`.
pub fn coupled_fraction(cg: &CouplerGeometry) -> f64 {
    let lc = beat_length(cg);
    if lc.infinite {
        return 1.0;
    }
    (std::f64::consts::PI * cg.z / (2.0 * lc.length))
        .cos()
        .powi(2)
}
