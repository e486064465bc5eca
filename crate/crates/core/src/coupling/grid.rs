use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform rectilinear grid. Points are stored x-major: the flat index of
/// `(ix, iy, iz)` is `(ix * ny + iy) * nz + iz`.
///
/// A periodic axis of `n` points covers a period of `n * spacing`; a closed
/// axis covers `(n - 1) * spacing` with trapezoid end weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub counts: [usize; 3],
    #[serde(default)]
    pub periodic: [bool; 3],
}

impl Grid3D {
    pub fn new(origin: [f64; 3], spacing: [f64; 3], counts: [usize; 3]) -> Result<Self> {
        let g = Grid3D {
            origin,
            spacing,
            counts,
            periodic: [false; 3],
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid spanning `[0, extent]` on each closed axis.
    pub fn boxed(extent: [f64; 3], counts: [usize; 3]) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for a in 0..3 {
            if counts[a] < 2 {
                return Err(Error::InvalidGrid(
                    "boxed grid needs at least 2 points per axis".into(),
                ));
            }
            spacing[a] = extent[a] / (counts[a] - 1) as f64;
        }
        Self::new([0.0; 3], spacing, counts)
    }

    /// Grid of one period `extent` on each axis, all axes periodic.
    pub fn periodic_box(extent: [f64; 3], counts: [usize; 3]) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for a in 0..3 {
            spacing[a] = extent[a] / counts[a].max(1) as f64;
        }
        Ok(Self::new([0.0; 3], spacing, counts)?.with_periodic([true; 3]))
    }

    pub fn with_periodic(mut self, periodic: [bool; 3]) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if !(self.spacing[a] > 0.0 && self.spacing[a].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "spacing along axis {a} must be positive"
                )));
            }
            if self.counts[a] == 0 {
                return Err(Error::InvalidGrid(format!("axis {a} has no points")));
            }
            if !self.origin[a].is_finite() {
                return Err(Error::InvalidGrid("origin must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.counts[1] + iy) * self.counts[2] + iz
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let iz = idx % self.counts[2];
        let rest = idx / self.counts[2];
        [rest / self.counts[1], rest % self.counts[1], iz]
    }

    pub fn coord(&self, ijk: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|a| self.origin[a] + self.spacing[a] * ijk[a] as f64)
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        self.coord(self.unravel(idx))
    }

    /// Integration volume covered by the grid.
    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.axis_length(a)).product()
    }

    fn axis_length(&self, a: usize) -> f64 {
        let n = self.counts[a];
        if self.periodic[a] {
            n as f64 * self.spacing[a]
        } else if n == 1 {
            self.spacing[a]
        } else {
            (n - 1) as f64 * self.spacing[a]
        }
    }

    /// One-dimensional quadrature weights along `axis`.
    pub fn axis_weights(&self, axis: usize) -> Vec<f64> {
        let n = self.counts[axis];
        let h = self.spacing[axis];
        if self.periodic[axis] || n == 1 {
            return vec![h; n];
        }
        let mut w = vec![h; n];
        w[0] = h / 2.0;
        w[n - 1] = h / 2.0;
        w
    }

    /// Trapezoid weight of every grid point, in flat order.
    pub fn weights(&self) -> Vec<f64> {
        let (wx, wy, wz) = (
            self.axis_weights(0),
            self.axis_weights(1),
            self.axis_weights(2),
        );
        let mut out = Vec::with_capacity(self.len());
        for x in &wx {
            for y in &wy {
                for z in &wz {
                    out.push(x * y * z);
                }
            }
        }
        out
    }

    pub fn same_as(&self, other: &Grid3D) -> bool {
        self == other
    }
}
