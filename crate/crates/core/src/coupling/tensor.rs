use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voigt index of the symmetric pair `(i, j)`, all 1-based.
pub fn voigt_index(i: usize, j: usize) -> Result<usize> {
    Ok(voigt0(i.wrapping_sub(1), j.wrapping_sub(1)).ok_or(Error::IndexOutOfRange(i, j))? + 1)
}

/// Canonical pair `(i, j)` with `i <= j` for a 1-based Voigt index.
pub fn voigt_pair(index: usize) -> Result<(usize, usize)> {
    match index {
        1 => Ok((1, 1)),
        2 => Ok((2, 2)),
        3 => Ok((3, 3)),
        4 => Ok((2, 3)),
        5 => Ok((1, 3)),
        6 => Ok((1, 2)),
        _ => Err(Error::IndexOutOfRange(index, 0)),
    }
}

pub(crate) fn voigt0(i: usize, j: usize) -> Option<usize> {
    match (i, j) {
        (0, 0) => Some(0),
        (1, 1) => Some(1),
        (2, 2) => Some(2),
        (1, 2) | (2, 1) => Some(3),
        (0, 2) | (2, 0) => Some(4),
        (0, 1) | (1, 0) => Some(5),
        _ => None,
    }
}

/// Constitutive tensors of one material, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialTensorSet {
    /// Piezoelectric tensor, stress-voltage form, Voigt 3x6. `None` marks an unknown element.
    pub h: [[Option<f64>; 6]; 3],
    /// Stress-charge form, Voigt 3x6.
    pub e: Option<[[f64; 6]; 3]>,
    /// Photoelastic tensor, Voigt 6x6, not assumed symmetric.
    pub p: [[Option<f64>; 6]; 6],
    /// Elasticity, Voigt 6x6.
    pub c: [[f64; 6]; 6],
    /// Inverse relative permittivity.
    pub eta: [[f64; 3]; 3],
    /// Mass density in kg/m³.
    pub rho: f64,
    pub eps_rf: f64,
    pub eps_ir: f64,
    /// Overrides the default scalar `trace(eta) / 3`.
    pub eta_eff: Option<f64>,
}

impl MaterialTensorSet {
    /// Isotropic, non-piezoelectric, non-photoelastic material.
    pub fn isotropic(rho: f64, eps: f64) -> Self {
        let mut eta = [[0.0; 3]; 3];
        for (i, row) in eta.iter_mut().enumerate() {
            row[i] = 1.0 / eps;
        }
        MaterialTensorSet {
            h: [[Some(0.0); 6]; 3],
            e: None,
            p: [[Some(0.0); 6]; 6],
            c: [[0.0; 6]; 6],
            eta,
            rho,
            eps_rf: eps,
            eps_ir: eps,
            eta_eff: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::param("rho", "must be positive"));
        }
        let eta = Matrix3::from_fn(|i, j| self.eta[i][j]);
        if (eta - eta.transpose()).abs().max() > 1e-12 * eta.abs().max() {
            return Err(Error::param("eta", "must be symmetric"));
        }
        if eta.cholesky().is_none() {
            return Err(Error::param("eta", "must be positive definite"));
        }
        let cmax = self.c.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..6 {
            for j in 0..6 {
                if (self.c[i][j] - self.c[j][i]).abs() > 1e-9 * cmax {
                    return Err(Error::param(
                        "c",
                        format!("c_{}{} != c_{}{}", i + 1, j + 1, j + 1, i + 1),
                    ));
                }
            }
        }
        if let Some(e) = &self.e {
            let hmax = self
                .h
                .iter()
                .flatten()
                .flatten()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..3 {
                for jj in 0..6 {
                    let Some(h) = self.h[i][jj] else { continue };
                    let from_e: f64 = (0..3).map(|m| self.eta[i][m] * e[m][jj]).sum();
                    if (h - from_e).abs() > 1e-9 * hmax.max(from_e.abs()) {
                        return Err(Error::param(
                            "h",
                            format!("h_{}{} disagrees with eta * e", i + 1, jj + 1),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eta_eff(&self) -> f64 {
        self.eta_eff
            .unwrap_or((self.eta[0][0] + self.eta[1][1] + self.eta[2][2]) / 3.0)
    }

    /// Full-index element `h_ijk`, 0-based.
    pub fn h_ijk(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        let jj = voigt0(j, k).ok_or(Error::IndexOutOfRange(j + 1, k + 1))?;
        self.h.get(i).ok_or(Error::IndexOutOfRange(i + 1, jj + 1))?[jj]
            .ok_or_else(|| Error::MissingTensorElement(format!("h_{}{}", i + 1, jj + 1)))
    }

    /// Full-index element `p_ijkl`, 0-based.
    pub fn p_ijkl(&self, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
        let a = voigt0(i, j).ok_or(Error::IndexOutOfRange(i + 1, j + 1))?;
        let b = voigt0(k, l).ok_or(Error::IndexOutOfRange(k + 1, l + 1))?;
        self.p[a][b].ok_or_else(|| Error::MissingTensorElement(format!("p_{}{}", a + 1, b + 1)))
    }
}
