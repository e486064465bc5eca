//! Cooperativity form of the efficiency, pump optimization, spectra and
//! parameter sweeps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    self, check_efficiency, derived_rates, pump_power_to_photons, susceptibilities, OperatingPoint,
    TransducerParams,
};
use crate::error::{Error, Result};
use crate::sweep::SweepResult;
use crate::units::rad_to_hz;

/// On-resonance cooperativities and extraction efficiencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CooperativitySet {
    pub c_om: f64,
    pub c_12: f64,
    pub f_2: f64,
    pub f_m: f64,
}

/// Frequency-dependent cooperativity functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooperativityFunctions {
    pub c_om: Complex64,
    pub c_12: Complex64,
}

fn extraction_factors(p: &TransducerParams) -> Result<(f64, f64)> {
    let r = derived_rates(p)?;
    let f_m = r.gamma_ex / r.gamma_m;
    if f_m > 1.0 + 1e-12 {
        return Err(Error::ModelViolation(format!(
            "F_m = gamma_ex / gamma_m = {f_m:.4} exceeds 1; gamma_ex is inconsistent with g_em and Gamma"
        )));
    }
    Ok((p.kappa_ex2 / r.kappa_2, f_m))
}

pub fn cooperativities(op: &OperatingPoint) -> Result<CooperativitySet> {
    let p = &op.params;
    let r = derived_rates(p)?;
    let (f_2, f_m) = extraction_factors(p)?;
    Ok(CooperativitySet {
        c_om: 4.0 * p.g_bar * p.g_bar * op.intra_ring_photons / (p.kappa_1 * r.gamma_m),
        c_12: 4.0 * p.j * p.j / (p.kappa_1 * r.kappa_2),
        f_2,
        f_m,
    })
}

pub fn cooperativity_functions(op: &OperatingPoint, omega: f64) -> Result<CooperativityFunctions> {
    let p = &op.params;
    let (sm, s1, s2) = susceptibilities(p)?;
    let c1 = s1.eval(omega);
    Ok(CooperativityFunctions {
        c_om: p.g_bar * p.g_bar * op.intra_ring_photons * c1 * sm.eval(omega),
        c_12: p.j * p.j * c1 * s2.eval(omega),
    })
}

/// Efficiency rebuilt from the cooperativity functions.
pub fn efficiency_via_cooperativities(op: &OperatingPoint, omega: f64) -> Result<f64> {
    let p = &op.params;
    let r = derived_rates(p)?;
    let (sm, _, s2) = susceptibilities(p)?;
    let c = cooperativity_functions(op, omega)?;
    let den = 1.0 + c.c_om + c.c_12;
    if den.norm() < 1e-14 * (1.0 + c.c_om.norm() + c.c_12.norm()) {
        return Err(Error::Singular { omega });
    }
    let prefactor = p.kappa_ex2 * s2.eval(omega) * r.gamma_ex * sm.eval(omega) / 4.0;
    let eta = (prefactor * 4.0 * c.c_om * c.c_12 / (den * den)).norm();
    check_efficiency(eta)
}

/// `F_2 F_m · 4 C_OM C_12 / (1 + C_OM + C_12)²`.
pub fn on_resonance_efficiency(c: &CooperativitySet) -> f64 {
    c.f_2 * c.f_m * 4.0 * c.c_om * c.c_12 / (1.0 + c.c_om + c.c_12).powi(2)
}

/// Intra-ring photon number at which `C_OM = C_12 + 1`.
pub fn critical_photon_number(p: &TransducerParams) -> Result<f64> {
    let r = derived_rates(p)?;
    if p.g_bar <= 0.0 {
        return Err(Error::UndefinedOptimum(
            "optomechanical coupling g_bar is zero, no pump power reaches C_OM = C_12 + 1".into(),
        ));
    }
    Ok(r.gamma_m / (4.0 * p.g_bar * p.g_bar) * (4.0 * p.j * p.j / r.kappa_2 + p.kappa_1))
}

/// Highest on-resonance efficiency over all pump powers.
pub fn max_efficiency(p: &TransducerParams) -> Result<f64> {
    let r = derived_rates(p)?;
    let (f_2, f_m) = extraction_factors(p)?;
    let c_12 = 4.0 * p.j * p.j / (p.kappa_1 * r.kappa_2);
    check_efficiency(f_2 * f_m * c_12 / (c_12 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaThreshold {
    pub threshold: f64,
    pub f_2: f64,
    /// Increasing `kappa_ex2` still raises the maximum efficiency.
    pub monotone_increasing: bool,
}

pub fn kappa_ex2_threshold(p: &TransducerParams) -> Result<KappaThreshold> {
    let r = derived_rates(p)?;
    let c_12 = 4.0 * p.j * p.j / (p.kappa_1 * r.kappa_2);
    let threshold = (1.0 + c_12) / (2.0 + c_12);
    let f_2 = p.kappa_ex2 / r.kappa_2;
    Ok(KappaThreshold {
        threshold,
        f_2,
        monotone_increasing: f_2 < threshold,
    })
}

/// Location, height and half-maximum width of a sampled peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakFeatures {
    pub peak_frequency: f64,
    pub peak_value: f64,
    pub fwhm: f64,
    pub points_in_band: usize,
    pub broad: bool,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 frequencies".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "frequencies must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (d0, d1) = (x[1] - x[0], x[2] - x[1]);
    let s0 = (y[1] - y[0]) / d0;
    let s1 = (y[2] - y[1]) / d1;
    let a = (s1 - s0) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    // slope of the parabola at the midpoint of the first interval is s0
    let xv = 0.5 * (x[0] + x[1]) - s0 / (2.0 * a);
    let yv = y[1] + a * (xv - x[1]) * (xv - x[1]) + (s0 + a * (x[1] - x[0])) * (xv - x[1]);
    Some((xv, yv))
}

/// Peak location by three-point quadratic interpolation and full width at half
/// maximum by linear interpolation of each 50% crossing.
pub fn extract_peak(freqs: &[f64], values: &[f64]) -> Result<PeakFeatures> {
    check_grid(freqs)?;
    if freqs.len() != values.len() {
        return Err(Error::InvalidGrid(
            "frequency and value lengths differ".into(),
        ));
    }
    let n = values.len();
    let imax = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });
    let mut broad = imax == 0 || imax == n - 1;
    let (mut peak_frequency, mut peak_value) = (freqs[imax], values[imax]);
    if !broad {
        let x = [freqs[imax - 1], freqs[imax], freqs[imax + 1]];
        let y = [values[imax - 1], values[imax], values[imax + 1]];
        if let Some((xv, yv)) = parabola_vertex(x, y) {
            if xv >= x[0] && xv <= x[2] {
                peak_frequency = xv;
                peak_value = yv.max(values[imax]);
            }
        }
    }
    let half = peak_value / 2.0;
    let cross = |i: usize, j: usize| {
        let t = (half - values[i]) / (values[j] - values[i]);
        freqs[i] + t * (freqs[j] - freqs[i])
    };
    let left = match (0..imax).rev().find(|&i| values[i] < half) {
        Some(i) => cross(i, i + 1),
        None => {
            broad = true;
            freqs[0]
        }
    };
    let right = match (imax + 1..n).find(|&i| values[i] < half) {
        Some(i) => cross(i, i - 1),
        None => {
            broad = true;
            freqs[n - 1]
        }
    };
    let fwhm = right - left;
    let points_in_band = freqs.iter().filter(|&&x| x >= left && x <= right).count();

    let flat: Vec<f64> = freqs
        .iter()
        .zip(values)
        .filter(|&(_, &v)| v >= peak_value * (1.0 - 1e-6))
        .map(|(&x, _)| x)
        .collect();
    if let (Some(lo), Some(hi)) = (flat.first(), flat.last()) {
        if hi - lo > 0.1 * fwhm {
            broad = true;
        }
    }
    Ok(PeakFeatures {
        peak_frequency,
        peak_value,
        fwhm,
        points_in_band,
        broad,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub frequencies: Vec<f64>,
    pub efficiencies: Vec<f64>,
    pub intra_ring_photons: f64,
    pub peak_efficiency: f64,
    /// Peak location minus `omega_m`.
    pub peak_shift: f64,
    pub fwhm: f64,
    pub broad_peak: bool,
}

impl SpectrumResult {
    pub fn to_sweep(&self) -> SweepResult {
        let mut s = SweepResult::new(["frequency_hz", "efficiency"]);
        for (&w, &e) in self.frequencies.iter().zip(&self.efficiencies) {
            s.rows.push(vec![rad_to_hz(w), e]);
        }
        s
    }
}

/// Efficiency across `grid` with the pump held at the on-resonance optimum.
pub fn efficiency_spectrum(p: &TransducerParams, grid: &[f64]) -> Result<SpectrumResult> {
    check_grid(grid)?;
    let n = critical_photon_number(p)?;
    let op = OperatingPoint::new(*p, n)?;
    let efficiencies = grid
        .par_iter()
        .map(|&w| dynamics::efficiency(&op, w))
        .collect::<Result<Vec<f64>>>()?;
    let peak = extract_peak(grid, &efficiencies)?;
    if peak.points_in_band < 8 {
        return Err(Error::GridTooCoarse {
            points: peak.points_in_band,
        });
    }
    Ok(SpectrumResult {
        frequencies: grid.to_vec(),
        efficiencies,
        intra_ring_photons: n,
        peak_efficiency: peak.peak_value,
        peak_shift: peak.peak_frequency - p.omega_m,
        fwhm: peak.fwhm,
        broad_peak: peak.broad,
    })
}

/// `points` values spaced evenly in log10 between `start` and `stop`.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Error::InvalidGrid(
            "log grid bounds must be positive".into(),
        ));
    }
    if points == 0 {
        return Err(Error::InvalidGrid("grid needs at least one point".into()));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = (start.log10(), stop.log10());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| 10f64.powf(a + step * k as f64))
        .collect())
}

/// `points` values spaced evenly between `start` and `stop`.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(stop > start) {
        return Err(Error::InvalidGrid(
            "need stop > start and at least 2 points".into(),
        ));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points).map(|k| start + step * k as f64).collect())
}

/// Maximum efficiency over a grid of `(g_em, kappa_ex2)` in rad/s, row-major
/// with `g_em` as the outer index.
pub fn max_efficiency_contour(
    base: &TransducerParams,
    g_em_grid: &[f64],
    kappa_ex2_grid: &[f64],
) -> Result<SweepResult> {
    if g_em_grid.iter().chain(kappa_ex2_grid).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidGrid("contour grids must be positive".into()));
    }
    let cells: Vec<(f64, f64)> = g_em_grid
        .iter()
        .flat_map(|&g| kappa_ex2_grid.iter().map(move |&k| (g, k)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(g, k)| max_efficiency(&base.with_g_em(g).with_kappa_ex2(k)))
        .collect::<Result<Vec<f64>>>()?;
    let mut out = SweepResult::new(["log10_gEM_hz", "log10_kex2_hz", "max_efficiency"]);
    for (&(g, k), &v) in cells.iter().zip(&values) {
        out.rows
            .push(vec![rad_to_hz(g).log10(), rad_to_hz(k).log10(), v]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub sweep: SweepResult,
    pub peak_index: usize,
    pub peak_power: f64,
    pub peak_efficiency: f64,
}

/// On-resonance efficiency against pump power in watts.
pub fn power_curve(
    p: &TransducerParams,
    powers: &[f64],
    pump_offset: Option<f64>,
) -> Result<PowerCurve> {
    if powers.is_empty() {
        return Err(Error::InvalidGrid("power grid is empty".into()));
    }
    let mut sweep = SweepResult::new(["power_w", "intra_ring_photons", "efficiency"]);
    let mut peak_index = 0;
    let mut peak_efficiency = f64::NEG_INFINITY;
    for (i, &pw) in powers.iter().enumerate() {
        let n = pump_power_to_photons(p, pw, pump_offset)?;
        let eta = dynamics::efficiency(&OperatingPoint::new(*p, n)?, p.omega_m)?;
        if eta > peak_efficiency {
            peak_efficiency = eta;
            peak_index = i;
        }
        sweep.rows.push(vec![pw, n, eta]);
    }
    Ok(PowerCurve {
        sweep,
        peak_index,
        peak_power: powers[peak_index],
        peak_efficiency,
    })
}
