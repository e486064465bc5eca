//! Coupling constants from discretized mode fields.
//!
//! Volume integrals use trapezoid quadrature on the field grid, and strain is
//! taken as the displacement gradient `∂w_j/∂r_k`. Coupling routines
//! normalize their input fields first, so they are invariant under rescaling
//! of either mode function.

mod field;
mod grid;
mod tensor;

pub use field::{FieldKind, ModeField};
pub use grid::Grid3D;
pub use tensor::{voigt_index, voigt_pair, MaterialTensorSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{EPSILON_0, HBAR};

/// External microwave-mechanical coupling `4 g_em² Γ_ex / Γ²`.
pub fn gamma_ex_from_gem(g_em: f64, big_gamma: f64, big_gamma_ex: f64) -> Result<f64> {
    if !(big_gamma > 0.0) {
        return Err(Error::param("Gamma", "must be positive"));
    }
    if !(0.0..=big_gamma).contains(&big_gamma_ex) {
        return Err(Error::param("Gamma_ex", "must lie in [0, Gamma]"));
    }
    Ok(4.0 * g_em * g_em * big_gamma_ex / (big_gamma * big_gamma))
}

/// Inverse relative permittivity, uniform or sampled per grid point.
#[derive(Debug, Clone, Copy)]
pub enum EtaField<'a> {
    Uniform([[f64; 3]; 3]),
    PerPoint(&'a [[[f64; 3]; 3]]),
}

impl EtaField<'_> {
    fn at(&self, idx: usize) -> &[[f64; 3]; 3] {
        match self {
            EtaField::Uniform(m) => m,
            EtaField::PerPoint(v) => &v[idx],
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            EtaField::PerPoint(v) if v.len() != n => Err(Error::GridMismatch),
            _ => Ok(()),
        }
    }
}

/// Mass density in kg/m³, uniform or sampled per grid point.
#[derive(Debug, Clone, Copy)]
pub enum Density<'a> {
    Uniform(f64),
    PerPoint(&'a [f64]),
}

/// Displacement gradient; `d[j][k]` holds `∂w_j/∂r_k` at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainField {
    pub grid: Grid3D,
    pub d: [[Vec<Complex64>; 3]; 3],
}

fn integrate<F: Fn(usize) -> Complex64>(grid: &Grid3D, f: F) -> Complex64 {
    grid.weights()
        .iter()
        .enumerate()
        .map(|(idx, &w)| f(idx) * w)
        .sum()
}

fn integrate_real<F: Fn(usize) -> f64>(grid: &Grid3D, f: F) -> f64 {
    grid.weights()
        .iter()
        .enumerate()
        .map(|(idx, &w)| f(idx) * w)
        .sum()
}

fn derivative(grid: &Grid3D, f: &[Complex64], axis: usize) -> Vec<Complex64> {
    let n = grid.counts[axis];
    let h = grid.spacing[axis];
    let stride = match axis {
        0 => grid.counts[1] * grid.counts[2],
        1 => grid.counts[2],
        _ => 1,
    };
    let periodic = grid.periodic[axis];
    (0..f.len())
        .map(|idx| {
            let i = grid.unravel(idx)[axis];
            let at = |k: usize| f[idx - i * stride + k * stride];
            if periodic {
                (at((i + 1) % n) - at((i + n - 1) % n)) / (2.0 * h)
            } else if i == 0 {
                (4.0 * (at(1) - at(0)) - (at(2) - at(0))) / (2.0 * h)
            } else if i == n - 1 {
                (4.0 * (at(n - 1) - at(n - 2)) - (at(n - 1) - at(n - 3))) / (2.0 * h)
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            }
        })
        .collect()
}

/// Second-order finite-difference displacement gradient.
pub fn strain_field(w: &ModeField) -> Result<StrainField> {
    for (a, name) in ['x', 'y', 'z'].into_iter().enumerate() {
        if w.grid.counts[a] < 3 {
            return Err(Error::DegenerateAxis {
                axis: name,
                count: w.grid.counts[a],
            });
        }
    }
    let d =
        std::array::from_fn(|j| std::array::from_fn(|k| derivative(&w.grid, &w.components[j], k)));
    Ok(StrainField { grid: w.grid, d })
}

fn volume_from_density(grid: &Grid3D, u: &[f64]) -> Result<(f64, f64)> {
    let i1 = integrate_real(grid, |i| u[i]);
    let i2 = integrate_real(grid, |i| u[i] * u[i]);
    if !(i1 > 0.0 && i2 > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok((i1 * i1 / i2, i1))
}

fn mech_density(w: &ModeField) -> Vec<f64> {
    (0..w.grid.len())
        .map(|i| w.components.iter().map(|c| c[i].norm_sqr()).sum())
        .collect()
}

fn em_density(e: &ModeField, eta: EtaField) -> Vec<f64> {
    (0..e.grid.len())
        .map(|idx| {
            let m = eta.at(idx);
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    s += m[i][j] * e.components[j][idx] * e.components[i][idx].conj();
                }
            }
            s.re
        })
        .collect()
}

/// Effective volume of a mechanical mode.
pub fn mech_mode_volume(w: &ModeField) -> Result<f64> {
    Ok(volume_from_density(&w.grid, &mech_density(w))?.0)
}

/// Effective volume of an electromagnetic mode, weighted by `eta`.
pub fn em_mode_volume(e: &ModeField, eta: EtaField) -> Result<f64> {
    eta.check(e.grid.len())?;
    Ok(volume_from_density(&e.grid, &em_density(e, eta))?.0)
}

/// Scales `w` so that `∫ Σ|w_i|² = V_eff`. Returns the field and `V_eff`.
pub fn normalize_mechanical(w: &ModeField) -> Result<(ModeField, f64)> {
    let (v, i1) = volume_from_density(&w.grid, &mech_density(w))?;
    Ok((w.scaled(Complex64::new((v / i1).sqrt(), 0.0)), v))
}

/// Scales `e` so that `∫ η_ij E_j E_i* = eta_eff · V_eff`. Returns the field and `V_eff`.
pub fn normalize_em(e: &ModeField, eta: EtaField, eta_eff: f64) -> Result<(ModeField, f64)> {
    eta.check(e.grid.len())?;
    let (v, i1) = volume_from_density(&e.grid, &em_density(e, eta))?;
    Ok((e.scaled(Complex64::new((eta_eff * v / i1).sqrt(), 0.0)), v))
}

/// `∫ ρ Σ_i w*_(i,m) w_(i,n)`: the effective mass when `m == n`, an
/// orthogonality defect otherwise.
pub fn effective_mass(w_m: &ModeField, w_n: &ModeField, rho: Density) -> Result<Complex64> {
    if w_m.grid != w_n.grid {
        return Err(Error::GridMismatch);
    }
    if let Density::PerPoint(r) = rho {
        if r.len() != w_m.grid.len() {
            return Err(Error::GridMismatch);
        }
    }
    Ok(integrate(&w_m.grid, |idx| {
        let r = match rho {
            Density::Uniform(r) => r,
            Density::PerPoint(v) => v[idx],
        };
        let s: Complex64 = (0..3)
            .map(|i| w_m.components[i][idx].conj() * w_n.components[i][idx])
            .sum();
        r * s
    }))
}

struct Prepared {
    e: ModeField,
    strain: StrainField,
    v_em: f64,
    v_mech: f64,
}

fn prepare(e: &ModeField, w: &ModeField, mat: &MaterialTensorSet) -> Result<Prepared> {
    if e.grid != w.grid {
        return Err(Error::GridMismatch);
    }
    if e.kind != FieldKind::Electromagnetic || w.kind != FieldKind::Mechanical {
        return Err(Error::param(
            "kind",
            "expects an electromagnetic and a mechanical field",
        ));
    }
    if !(w.frequency > 0.0) {
        return Err(Error::param(
            "frequency",
            "mechanical mode frequency must be positive",
        ));
    }
    mat.validate()?;
    let (e, v_em) = normalize_em(e, EtaField::Uniform(mat.eta), mat.eta_eff())?;
    let (w, v_mech) = normalize_mechanical(w)?;
    Ok(Prepared {
        strain: strain_field(&w)?,
        e,
        v_em,
        v_mech,
    })
}

fn piezo_prefactor(
    p: &Prepared,
    e: &ModeField,
    w: &ModeField,
    mat: &MaterialTensorSet,
) -> Complex64 {
    let v_pair = (p.v_em * p.v_mech).sqrt();
    Complex64::i() * (e.frequency / w.frequency).sqrt()
        / (4.0 * v_pair)
        / (mat.eta_eff() * mat.rho).sqrt()
}

/// Piezoelectric coupling `g_ijk` for one component, indices 1-based.
pub fn piezo_coupling(
    e: &ModeField,
    w: &ModeField,
    mat: &MaterialTensorSet,
    (i, j, k): (usize, usize, usize),
) -> Result<Complex64> {
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) || !(1..=3).contains(&k) {
        return Err(Error::IndexOutOfRange(i, j.max(k)));
    }
    let h = mat.h_ijk(i - 1, j - 1, k - 1)?;
    let p = prepare(e, w, mat)?;
    let ei = &p.e.components[i - 1];
    let djk = &p.strain.d[j - 1][k - 1];
    let overlap = integrate(&p.e.grid, |idx| ei[idx] * djk[idx]);
    Ok(piezo_prefactor(&p, e, w, mat) * h * overlap)
}

/// Piezoelectric coupling summed over all tensor components.
pub fn piezo_coupling_total(
    e: &ModeField,
    w: &ModeField,
    mat: &MaterialTensorSet,
) -> Result<Complex64> {
    let p = prepare(e, w, mat)?;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let h = mat.h_ijk(i, j, k)?;
                if h == 0.0 {
                    continue;
                }
                let (ei, djk) = (&p.e.components[i], &p.strain.d[j][k]);
                total += h * integrate(&p.e.grid, |idx| ei[idx] * djk[idx]);
            }
        }
    }
    Ok(piezo_prefactor(&p, e, w, mat) * total)
}

/// Single-photon optomechanical coupling `Ḡ` of an optical and a mechanical mode.
pub fn optomech_coupling(
    e: &ModeField,
    w: &ModeField,
    mat: &MaterialTensorSet,
) -> Result<Complex64> {
    let p = prepare(e, w, mat)?;
    let eta = mat.eta_eff();
    let prefactor = (HBAR
        / (32.0
            * mat.rho
            * p.v_mech
            * EPSILON_0
            * EPSILON_0
            * eta
            * eta
            * p.v_em
            * p.v_em
            * w.frequency))
        .sqrt();
    let ec = &p.e.components;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let pv = mat.p_ijkl(i, j, k, l)?;
                    if pv == 0.0 {
                        continue;
                    }
                    let dkl = &p.strain.d[k][l];
                    total +=
                        pv * integrate(&p.e.grid, |idx| ec[i][idx] * ec[j][idx].conj() * dkl[idx]);
                }
            }
        }
    }
    Ok(prefactor * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }
    const Z: Complex64 = Complex64::new(0.0, 0.0);

    #[test]
    fn gamma_ex_limits() {
        let (g, gam) = (2.0, 10.0);
        assert_eq!(gamma_ex_from_gem(g, gam, gam).unwrap(), 4.0 * g * g / gam);
        assert_eq!(gamma_ex_from_gem(0.0, gam, 3.0).unwrap(), 0.0);
        assert!(gamma_ex_from_gem(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn translation_has_no_strain() {
        let grid = Grid3D::boxed([1.0; 3], [4, 5, 6]).unwrap();
        let w = ModeField::from_fn(grid, FieldKind::Mechanical, 1.0, |_| {
            [c(1.0), c(-2.0), c(0.5)]
        })
        .unwrap();
        let s = strain_field(&w).unwrap();
        assert!(s.d.iter().flatten().flatten().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn affine_field_is_exact() {
        let grid = Grid3D::boxed([2.0, 1.0, 1.0], [7, 3, 3]).unwrap();
        let alpha = 0.37;
        let w = ModeField::from_fn(grid, FieldKind::Mechanical, 1.0, |r| {
            [c(alpha * r[0]), Z, Z]
        })
        .unwrap();
        let s = strain_field(&w).unwrap();
        for v in &s.d[0][0] {
            assert!((v.re - alpha).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_axis_named() {
        let grid = Grid3D::boxed([1.0; 3], [4, 2, 4]).unwrap();
        let w = ModeField::from_fn(grid, FieldKind::Mechanical, 1.0, |_| [c(1.0); 3]).unwrap();
        assert!(matches!(
            strain_field(&w),
            Err(Error::DegenerateAxis {
                axis: 'y',
                count: 2
            })
        ));
    }

    #[test]
    fn uniform_volume() {
        let grid = Grid3D::boxed([1.0, 2.0, 0.5], [5, 5, 5]).unwrap();
        let w = ModeField::from_fn(grid, FieldKind::Mechanical, 1.0, |_| [c(3.0), Z, Z]).unwrap();
        assert!((mech_mode_volume(&w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_rejected() {
        let grid = Grid3D::boxed([1.0; 3], [3, 3, 3]).unwrap();
        let w = ModeField::from_fn(grid, FieldKind::Mechanical, 1.0, |_| [Z; 3]).unwrap();
        assert!(matches!(mech_mode_volume(&w), Err(Error::ZeroField)));
    }

    #[test]
    fn normalized_mass() {
        let grid = Grid3D::boxed([1.0; 3], [9, 9, 9]).unwrap();
        let w = ModeField::gaussian_sheet(
            grid,
            FieldKind::Mechanical,
            1.0,
            [c(2.0), Z, Z],
            2,
            0.5,
            0.2,
        )
        .unwrap();
        let (wn, v) = normalize_mechanical(&w).unwrap();
        let m = effective_mass(&wn, &wn, Density::Uniform(2330.0)).unwrap();
        assert!((m.re / (2330.0 * v) - 1.0).abs() < 1e-12);
        assert_eq!(m.im, 0.0);
    }

    #[test]
    fn zero_piezo_tensor_gives_zero() {
        let grid = Grid3D::boxed([1e-6; 3], [5, 5, 5]).unwrap();
        let e = ModeField::plane_wave(
            grid,
            FieldKind::Electromagnetic,
            1e10,
            [c(1.0), Z, Z],
            [1e6, 0.0, 0.0],
        )
        .unwrap();
        let w = ModeField::plane_wave(
            grid,
            FieldKind::Mechanical,
            1e10,
            [c(1.0), Z, Z],
            [1e6, 0.0, 0.0],
        )
        .unwrap();
        let m = MaterialTensorSet::isotropic(3000.0, 9.0);
        assert_eq!(piezo_coupling_total(&e, &w, &m).unwrap(), Z);
        assert_eq!(optomech_coupling(&e, &w, &m).unwrap(), Z);
    }
}
