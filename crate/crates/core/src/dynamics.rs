//! Linearized frequency-domain model of the piezo-optomechanical transducer.
//!
//! All rates and frequencies are angular (rad/s) and live in the rotating
//! frame of the pump, where the transduced signal sits near `omega_m`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sfg::{NodeKind, SignalFlowGraph};
use crate::units::{hz_to_rad, rad_to_hz, C_LIGHT, HBAR, TWO_PI};

/// Full rate and detuning parameter set, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransducerParams {
    pub omega_m: f64,
    /// Intrinsic mechanical loss.
    pub gamma_0: f64,
    /// Intrinsic microwave linewidth.
    pub big_gamma_0: f64,
    /// Total microwave linewidth.
    pub big_gamma: f64,
    pub g_em: f64,
    /// Measured external microwave-mechanical coupling. Derived when absent.
    pub gamma_ex: Option<f64>,
    /// Optional reported total mechanical linewidth, checked against the derived one.
    pub gamma_m: Option<f64>,
    pub j: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub kappa_1: f64,
    pub kappa_02: f64,
    pub kappa_ex2: f64,
    pub g_bar: f64,
    /// Pump vacuum wavelength in metres.
    pub lambda_l: Option<f64>,
}

impl TransducerParams {
    /// The nominal device parameters.
    pub fn nominal() -> Self {
        let omega_m = hz_to_rad(3.285e9);
        TransducerParams {
            omega_m,
            gamma_0: hz_to_rad(2.6e6),
            big_gamma_0: hz_to_rad(500e6),
            big_gamma: hz_to_rad(15e9),
            g_em: hz_to_rad(100.6e6),
            gamma_ex: Some(hz_to_rad(2.98e6)),
            gamma_m: Some(hz_to_rad(5.3e6)),
            j: std::f64::consts::PI * 3.285e9,
            delta_1: omega_m,
            delta_2: omega_m,
            kappa_1: hz_to_rad(25e6),
            kappa_02: hz_to_rad(25e6),
            kappa_ex2: hz_to_rad(125e6),
            g_bar: hz_to_rad(400.0),
            lambda_l: Some(1550e-9),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_m", self.omega_m),
            ("gamma_0", self.gamma_0),
            ("Gamma_0", self.big_gamma_0),
            ("Gamma", self.big_gamma),
            ("g_em", self.g_em),
            ("j", self.j),
            ("delta_1", self.delta_1),
            ("delta_2", self.delta_2),
            ("kappa_1", self.kappa_1),
            ("kappa_02", self.kappa_02),
            ("kappa_ex2", self.kappa_ex2),
            ("g_bar", self.g_bar),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
            if v < 0.0 && !name.starts_with("delta") {
                return Err(Error::param(name, "rates must be non-negative"));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(Error::param("omega_m", "must be positive"));
        }
        if self.big_gamma <= 0.0 {
            return Err(Error::param("Gamma", "must be positive"));
        }
        if self.big_gamma < self.big_gamma_0 {
            return Err(Error::param(
                "Gamma",
                "total linewidth below intrinsic linewidth Gamma_0",
            ));
        }
        if self.kappa_1 <= 0.0 {
            return Err(Error::param("kappa_1", "must be positive"));
        }
        if self.kappa_2() <= 0.0 {
            return Err(Error::param(
                "kappa_02",
                "kappa_02 + kappa_ex2 must be positive",
            ));
        }
        let gamma_m = self.derived_gamma_m();
        if gamma_m <= 0.0 {
            return Err(Error::param(
                "gamma_0",
                "total mechanical linewidth must be positive",
            ));
        }
        if let Some(sup) = self.gamma_m {
            if !sup.is_finite() || (sup - gamma_m).abs() > 0.02 * gamma_m {
                return Err(Error::param(
                    "gamma_m",
                    format!(
                        "supplied {:.6e} Hz disagrees with gamma_0 + 4 g_em^2 / Gamma = {:.6e} Hz by more than 2%",
                        rad_to_hz(sup),
                        rad_to_hz(gamma_m)
                    ),
                ));
            }
        }
        if let Some(gex) = self.gamma_ex {
            if !gex.is_finite() || gex < 0.0 {
                return Err(Error::param("gamma_ex", "must be finite and non-negative"));
            }
            if gex > gamma_m {
                return Err(Error::param(
                    "gamma_ex",
                    "exceeds the total mechanical linewidth",
                ));
            }
        }
        if let Some(l) = self.lambda_l {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::param("lambda_l", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn kappa_2(&self) -> f64 {
        self.kappa_02 + self.kappa_ex2
    }

    fn derived_gamma_m(&self) -> f64 {
        self.gamma_0 + 4.0 * self.g_em * self.g_em / self.big_gamma
    }

    fn derived_gamma_ex(&self) -> f64 {
        crate::coupling::gamma_ex_from_gem(
            self.g_em,
            self.big_gamma,
            self.big_gamma - self.big_gamma_0,
        )
        .unwrap_or(0.0)
    }

    /// Copy with a new electromechanical coupling. A measured `gamma_ex` or
    /// `gamma_m` only describes the original coupling, so both are dropped
    /// unless `g_em` is unchanged (to 1e-9 relative).
    pub fn with_g_em(&self, g_em: f64) -> Self {
        let mut p = *self;
        if (g_em - self.g_em).abs() > 1e-9 * self.g_em.abs() {
            p.g_em = g_em;
            p.gamma_ex = None;
            p.gamma_m = None;
        }
        p
    }

    pub fn with_kappa_ex2(&self, kappa_ex2: f64) -> Self {
        TransducerParams { kappa_ex2, ..*self }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ParamsFile = serde_json::from_str(s)?;
        let p = Self::from(file);
        p.validate()?;
        Ok(p)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ParamsFile::from(*self))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// On-disk parameter record: frequencies in Hz, wavelength in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub omega_m_hz: f64,
    pub gamma_0_hz: f64,
    #[serde(rename = "Gamma_0_hz")]
    pub big_gamma_0_hz: f64,
    #[serde(rename = "Gamma_hz")]
    pub big_gamma_hz: f64,
    pub g_em_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_ex_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m_hz: Option<f64>,
    pub j_hz: f64,
    pub delta_1_hz: f64,
    pub delta_2_hz: f64,
    pub kappa_1_hz: f64,
    pub kappa_02_hz: f64,
    pub kappa_ex2_hz: f64,
    pub g_bar_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_l_m: Option<f64>,
}

impl From<ParamsFile> for TransducerParams {
    fn from(f: ParamsFile) -> Self {
        TransducerParams {
            omega_m: hz_to_rad(f.omega_m_hz),
            gamma_0: hz_to_rad(f.gamma_0_hz),
            big_gamma_0: hz_to_rad(f.big_gamma_0_hz),
            big_gamma: hz_to_rad(f.big_gamma_hz),
            g_em: hz_to_rad(f.g_em_hz),
            gamma_ex: f.gamma_ex_hz.map(hz_to_rad),
            gamma_m: f.gamma_m_hz.map(hz_to_rad),
            j: hz_to_rad(f.j_hz),
            delta_1: hz_to_rad(f.delta_1_hz),
            delta_2: hz_to_rad(f.delta_2_hz),
            kappa_1: hz_to_rad(f.kappa_1_hz),
            kappa_02: hz_to_rad(f.kappa_02_hz),
            kappa_ex2: hz_to_rad(f.kappa_ex2_hz),
            g_bar: hz_to_rad(f.g_bar_hz),
            lambda_l: f.lambda_l_m,
        }
    }
}

impl From<TransducerParams> for ParamsFile {
    fn from(p: TransducerParams) -> Self {
        ParamsFile {
            omega_m_hz: rad_to_hz(p.omega_m),
            gamma_0_hz: rad_to_hz(p.gamma_0),
            big_gamma_0_hz: rad_to_hz(p.big_gamma_0),
            big_gamma_hz: rad_to_hz(p.big_gamma),
            g_em_hz: rad_to_hz(p.g_em),
            gamma_ex_hz: p.gamma_ex.map(rad_to_hz),
            gamma_m_hz: p.gamma_m.map(rad_to_hz),
            j_hz: rad_to_hz(p.j),
            delta_1_hz: rad_to_hz(p.delta_1),
            delta_2_hz: rad_to_hz(p.delta_2),
            kappa_1_hz: rad_to_hz(p.kappa_1),
            kappa_02_hz: rad_to_hz(p.kappa_02),
            kappa_ex2_hz: rad_to_hz(p.kappa_ex2),
            g_bar_hz: rad_to_hz(p.g_bar),
            lambda_l_m: p.lambda_l,
        }
    }
}

/// Named parameter transforms applied multiplicatively to a base record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Nominal,
    Kex2x5,
    Gem5,
    Combined,
    LowLoss,
    /// Like `LowLoss`, but the second ring's intrinsic loss is also scaled.
    LowLossK02,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Nominal,
        Preset::Kex2x5,
        Preset::Gem5,
        Preset::Combined,
        Preset::LowLoss,
        Preset::LowLossK02,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Nominal => "nominal",
            Preset::Kex2x5 => "5kex2",
            Preset::Gem5 => "5gem",
            Preset::Combined => "5gem-5kex2-10G",
            Preset::LowLoss => "5gem-5kex2-10G-lowloss",
            Preset::LowLossK02 => "5gem-5kex2-10G-lowloss-k02",
        }
    }

    /// `(g_em, kappa_ex2, g_bar, gamma_0, kappa_1, kappa_02)` multipliers.
    pub fn multipliers(self) -> [f64; 6] {
        match self {
            Preset::Nominal => [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            Preset::Kex2x5 => [1.0, 5.0, 1.0, 1.0, 1.0, 1.0],
            Preset::Gem5 => [5.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            Preset::Combined => [5.0, 5.0, 10.0, 1.0, 1.0, 1.0],
            Preset::LowLoss => [5.0, 5.0, 10.0, 0.1, 0.1, 1.0],
            Preset::LowLossK02 => [5.0, 5.0, 10.0, 0.1, 0.1, 0.1],
        }
    }

    pub fn apply(self, base: &TransducerParams) -> TransducerParams {
        let [gem, kex, gbar, g0, k1, k02] = self.multipliers();
        let mut p = base.with_g_em(base.g_em * gem);
        p.kappa_ex2 *= kex;
        p.g_bar *= gbar;
        if g0 != 1.0 {
            p.gamma_0 *= g0;
            p.gamma_m = None;
        }
        p.kappa_1 *= k1;
        p.kappa_02 *= k02;
        p
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Lorentzian response `1 / (−i(ω − center) + halfwidth)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    pub center: f64,
    pub halfwidth: f64,
}

impl Susceptibility {
    pub fn new(center: f64, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0 && halfwidth.is_finite() && center.is_finite()) {
            return Err(Error::param("halfwidth", "must be positive and finite"));
        }
        Ok(Susceptibility { center, halfwidth })
    }

    pub fn eval(&self, omega: f64) -> Complex64 {
        Complex64::new(self.halfwidth, -(omega - self.center)).inv()
    }
}

/// Microwave susceptibility in its constant approximation `2/Γ`.
pub fn chi_microwave(p: &TransducerParams) -> f64 {
    2.0 / p.big_gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedRates {
    pub gamma_m: f64,
    pub kappa_2: f64,
    /// Value used by the model: the supplied one when present.
    pub gamma_ex: f64,
    pub gamma_ex_derived: f64,
    /// `(supplied − derived)/derived`, when a value was supplied.
    pub gamma_ex_discrepancy: Option<f64>,
}

pub fn derived_rates(p: &TransducerParams) -> Result<DerivedRates> {
    p.validate()?;
    let derived = p.derived_gamma_ex();
    let discrepancy = p.gamma_ex.and_then(|s| {
        if derived > 0.0 {
            Some((s - derived) / derived)
        } else {
            None
        }
    });
    Ok(DerivedRates {
        gamma_m: p.derived_gamma_m(),
        kappa_2: p.kappa_2(),
        gamma_ex: p.gamma_ex.unwrap_or(derived),
        gamma_ex_derived: derived,
        gamma_ex_discrepancy: discrepancy,
    })
}

/// The three mode susceptibilities `(χ_m, χ_01, χ_02)`.
pub fn susceptibilities(
    p: &TransducerParams,
) -> Result<(Susceptibility, Susceptibility, Susceptibility)> {
    let r = derived_rates(p)?;
    Ok((
        Susceptibility::new(p.omega_m, r.gamma_m / 2.0)?,
        Susceptibility::new(p.delta_1, p.kappa_1 / 2.0)?,
        Susceptibility::new(p.delta_2, r.kappa_2 / 2.0)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub params: TransducerParams,
    /// `|ā_1|²`.
    pub intra_ring_photons: f64,
    /// Phase of `ā_1` in radians.
    pub phase: f64,
}

impl OperatingPoint {
    pub fn new(params: TransducerParams, intra_ring_photons: f64) -> Result<Self> {
        if !(intra_ring_photons >= 0.0 && intra_ring_photons.is_finite()) {
            return Err(Error::param(
                "intra_ring_photons",
                "must be finite and non-negative",
            ));
        }
        Ok(OperatingPoint {
            params,
            intra_ring_photons,
            phase: 0.0,
        })
    }

    pub fn with_phase(self, phase: f64) -> Self {
        OperatingPoint { phase, ..self }
    }

    pub fn mean_field(&self) -> Complex64 {
        Complex64::from_polar(self.intra_ring_photons.sqrt(), self.phase)
    }
}

fn check_denominator(den: Complex64, loops: &[Complex64], omega: f64) -> Result<()> {
    let scale = 1.0 + loops.iter().map(|l| l.norm()).sum::<f64>();
    if den.norm() < 1e-14 * scale {
        Err(Error::Singular { omega })
    } else {
        Ok(())
    }
}

/// Closed-form microwave-to-optical transduction amplitude.
pub fn transduction_amplitude(op: &OperatingPoint, omega: f64) -> Result<Complex64> {
    let p = &op.params;
    let r = derived_rates(p)?;
    let (sm, s1, s2) = susceptibilities(p)?;
    let (cm, c1, c2) = (sm.eval(omega), s1.eval(omega), s2.eval(omega));
    let a1 = op.mean_field();
    let l_om = p.g_bar * p.g_bar * op.intra_ring_photons * c1 * cm;
    let l_12 = p.j * p.j * c1 * c2;
    let den = 1.0 + l_om + l_12;
    check_denominator(den, &[l_om, l_12], omega)?;
    let num = (p.kappa_ex2 * r.gamma_ex).sqrt() * c1 * c2 * cm * p.g_bar * a1 * p.j;
    Ok(num / den)
}

/// Transduction efficiency `|amplitude|²`.
pub fn efficiency(op: &OperatingPoint, omega: f64) -> Result<f64> {
    let eta = transduction_amplitude(op, omega)?.norm_sqr();
    check_efficiency(eta)
}

pub(crate) fn check_efficiency(eta: f64) -> Result<f64> {
    if eta > 1.0 + 1e-9 {
        return Err(Error::ModelViolation(format!(
            "efficiency {eta:.6} exceeds 1; gamma_ex is inconsistent with the mechanical linewidth"
        )));
    }
    Ok(eta)
}

/// Node ids of the transducer graph.
pub mod nodes {
    pub const C_IN: &str = "c_in";
    pub const A_IN: &str = "a_in";
    pub const F_M: &str = "f_m";
    pub const F_01: &str = "f_01";
    pub const F_02: &str = "f_02";
    pub const B: &str = "b";
    pub const A1: &str = "a1";
    pub const A2: &str = "a2";
    pub const A_OUT: &str = "a_out";
}

/// Input-output network of the transducer as a signal flow graph.
///
/// The gain from `c_in` to `a_out` is the negative of
/// [`transduction_amplitude`]: the two coupling edges each carry a factor `i`.
pub fn transducer_graph(op: &OperatingPoint) -> Result<SignalFlowGraph> {
    use nodes::*;
    let p = op.params;
    let r = derived_rates(&p)?;
    let (sm, s1, s2) = susceptibilities(&p)?;
    let i = Complex64::i();
    let a1 = op.mean_field();
    let (g, j) = (p.g_bar, p.j);
    let sqrt_gex = r.gamma_ex.sqrt();
    let sqrt_g0 = p.gamma_0.sqrt();
    let sqrt_k1 = p.kappa_1.sqrt();
    let sqrt_k02 = p.kappa_02.sqrt();
    let sqrt_kex = p.kappa_ex2.sqrt();
    SignalFlowGraph::builder()
        .node(C_IN, NodeKind::Source)
        .node(A_IN, NodeKind::Source)
        .node(F_M, NodeKind::Source)
        .node(F_01, NodeKind::Source)
        .node(F_02, NodeKind::Source)
        .node(B, NodeKind::Internal)
        .node(A1, NodeKind::Internal)
        .node(A2, NodeKind::Internal)
        .node(A_OUT, NodeKind::Sink)
        .edge(C_IN, B, "sqrt(gamma_ex) chi_m", move |w| {
            sqrt_gex * sm.eval(w)
        })
        .edge(F_M, B, "sqrt(gamma_0) chi_m", move |w| sqrt_g0 * sm.eval(w))
        .edge(B, A1, "i G a1 chi_01", move |w| i * g * a1 * s1.eval(w))
        .edge(A1, B, "i G a1* chi_m", move |w| {
            i * g * a1.conj() * sm.eval(w)
        })
        .edge(F_01, A1, "sqrt(kappa_1) chi_01", move |w| {
            sqrt_k1 * s1.eval(w)
        })
        .edge(A2, A1, "i J chi_01", move |w| i * j * s1.eval(w))
        .edge(A1, A2, "i J chi_02", move |w| i * j * s2.eval(w))
        .edge(A_IN, A2, "sqrt(kappa_ex2) chi_02", move |w| {
            sqrt_kex * s2.eval(w)
        })
        .edge(F_02, A2, "sqrt(kappa_02) chi_02", move |w| {
            sqrt_k02 * s2.eval(w)
        })
        .constant_edge(A2, A_OUT, "sqrt(kappa_ex2)", Complex64::new(sqrt_kex, 0.0))
        .constant_edge(A_IN, A_OUT, "-1", Complex64::new(-1.0, 0.0))
        .build()
}

/// Intra-ring pump amplitude ratio `ā_1/ā_in` as a function of the pump offset.
pub fn intra_ring_gain(p: &TransducerParams, omega: f64) -> Result<Complex64> {
    let (_, s1, s2) = susceptibilities(p)?;
    let (c1, c2) = (s1.eval(omega), s2.eval(omega));
    let l = p.j * p.j * c1 * c2;
    let den = 1.0 + l;
    check_denominator(den, &[l], omega)?;
    Ok(Complex64::i() * p.j * c1 * c2 * p.kappa_ex2.sqrt() / den)
}

/// Closed-form peak `|ā_1/ā_in|²` at the split resonances.
pub fn enhancement_peak(p: &TransducerParams) -> f64 {
    let (k1, k2) = (p.kappa_1, p.kappa_2());
    64.0 * p.j * p.j * p.kappa_ex2
        / ((k1 + k2).powi(2) * ((k1 - k2).powi(2) - 16.0 * p.j * p.j).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonances {
    pub lower: f64,
    pub upper: f64,
    /// Splitting collapsed to the single value `delta_1`.
    pub degenerate: bool,
}

/// Frequencies of maximum cavity enhancement for the pump.
pub fn enhancement_resonances(p: &TransducerParams) -> Resonances {
    let (k1, k2) = (p.kappa_1, p.kappa_2());
    let j2 = p.j * p.j;
    if 8.0 * j2 <= k1 * k1 + k2 * k2 {
        return Resonances {
            lower: p.delta_1,
            upper: p.delta_1,
            degenerate: true,
        };
    }
    let split = p.j * (1.0 - (k1 * k1 + k2 * k2) / (8.0 * j2)).sqrt();
    Resonances {
        lower: p.delta_1 - split,
        upper: p.delta_1 + split,
        degenerate: false,
    }
}

/// Input photon flux (photons/s) of a pump of power `watts` at `wavelength` metres.
pub fn photon_flux(watts: f64, wavelength: f64) -> f64 {
    watts * wavelength / (TWO_PI * HBAR * C_LIGHT)
}

/// Intra-ring photon number `|ā_1|²` produced by a pump of the given power.
/// The pump sits at `pump_offset` (rad/s) or, by default, on the lower
/// enhancement resonance.
pub fn pump_power_to_photons(
    p: &TransducerParams,
    watts: f64,
    pump_offset: Option<f64>,
) -> Result<f64> {
    if !(watts >= 0.0 && watts.is_finite()) {
        return Err(Error::param("power", "must be finite and non-negative"));
    }
    let lambda = p
        .lambda_l
        .ok_or_else(|| Error::param("lambda_l", "pump wavelength required for power mapping"))?;
    let offset = pump_offset.unwrap_or_else(|| enhancement_resonances(p).lower);
    Ok(intra_ring_gain(p, offset)?.norm_sqr() * photon_flux(watts, lambda))
}

/// Inverse of [`pump_power_to_photons`].
pub fn photons_to_pump_power(
    p: &TransducerParams,
    photons: f64,
    pump_offset: Option<f64>,
) -> Result<f64> {
    let per_watt = pump_power_to_photons(p, 1.0, pump_offset)?;
    if per_watt <= 0.0 {
        return Err(Error::UndefinedOptimum(
            "pump does not reach the first ring".into(),
        ));
    }
    Ok(photons / per_watt)
}
