use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid3D;
use crate::error::{Error, Result};
use crate::sweep::csv_err;
use crate::units::{hz_to_rad, rad_to_hz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Electromagnetic,
    Mechanical,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Electromagnetic => "electromagnetic",
            FieldKind::Mechanical => "mechanical",
        })
    }
}

impl FromStr for FieldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "electromagnetic" | "em" => Ok(FieldKind::Electromagnetic),
            "mechanical" | "mech" => Ok(FieldKind::Mechanical),
            other => Err(Error::InvalidGrid(format!("unknown field kind `{other}`"))),
        }
    }
}

/// Complex vector field sampled on a [`Grid3D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub grid: Grid3D,
    pub components: [Vec<Complex64>; 3],
    pub kind: FieldKind,
    /// Mode frequency in rad/s.
    pub frequency: f64,
}

impl ModeField {
    pub fn new(
        grid: Grid3D,
        components: [Vec<Complex64>; 3],
        kind: FieldKind,
        frequency: f64,
    ) -> Result<Self> {
        grid.validate()?;
        let n = grid.len();
        for (a, c) in components.iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidGrid(format!(
                    "component {a} has {} samples, grid has {n}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::InvalidGrid(format!(
                    "component {a} has non-finite values"
                )));
            }
        }
        if !frequency.is_finite() || frequency < 0.0 {
            return Err(Error::InvalidGrid(
                "frequency must be finite and non-negative".into(),
            ));
        }
        Ok(ModeField {
            grid,
            components,
            kind,
            frequency,
        })
    }

    /// Samples `f(r)` at every grid point.
    pub fn from_fn<F>(grid: Grid3D, kind: FieldKind, frequency: f64, f: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> [Complex64; 3],
    {
        let mut comps: [Vec<Complex64>; 3] = Default::default();
        for idx in 0..grid.len() {
            let v = f(grid.point(idx));
            for a in 0..3 {
                comps[a].push(v[a]);
            }
        }
        Self::new(grid, comps, kind, frequency)
    }

    /// `amplitude · exp(i q·r)`.
    pub fn plane_wave(
        grid: Grid3D,
        kind: FieldKind,
        frequency: f64,
        amplitude: [Complex64; 3],
        q: [f64; 3],
    ) -> Result<Self> {
        Self::from_fn(grid, kind, frequency, |r| {
            let phase = Complex64::from_polar(1.0, q[0] * r[0] + q[1] * r[1] + q[2] * r[2]);
            amplitude.map(|a| a * phase)
        })
    }

    /// `amplitude` inside the axis-aligned box `[lo, hi]`, zero outside.
    pub fn top_hat(
        grid: Grid3D,
        kind: FieldKind,
        frequency: f64,
        amplitude: [Complex64; 3],
        lo: [f64; 3],
        hi: [f64; 3],
    ) -> Result<Self> {
        let zero = Complex64::new(0.0, 0.0);
        Self::from_fn(grid, kind, frequency, |r| {
            if (0..3).all(|a| r[a] >= lo[a] && r[a] <= hi[a]) {
                amplitude
            } else {
                [zero; 3]
            }
        })
    }

    /// Gaussian profile across `axis`, uniform along the other two.
    pub fn gaussian_sheet(
        grid: Grid3D,
        kind: FieldKind,
        frequency: f64,
        amplitude: [Complex64; 3],
        axis: usize,
        center: f64,
        width: f64,
    ) -> Result<Self> {
        if axis > 2 || !(width > 0.0) {
            return Err(Error::InvalidGrid(
                "gaussian sheet needs axis < 3 and width > 0".into(),
            ));
        }
        Self::from_fn(grid, kind, frequency, |r| {
            let s = (-((r[axis] - center) / width).powi(2)).exp();
            amplitude.map(|a| a * s)
        })
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.components.iter_mut() {
            for v in c.iter_mut() {
                *v *= alpha;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .flatten()
            .all(|v| v.norm_sqr() == 0.0)
    }

    /// Writes the columnar CSV form with a metadata comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        let triple = |v: [String; 3]| v.join(",");
        writeln!(
            w,
            "# origin={} spacing={} counts={} periodic={} kind={} frequency_hz={:e}",
            triple(g.origin.map(|x| format!("{x:e}"))),
            triple(g.spacing.map(|x| format!("{x:e}"))),
            triple(g.counts.map(|x| x.to_string())),
            triple(g.periodic.map(|p| u8::from(p).to_string())),
            self.kind,
            rad_to_hz(self.frequency),
        )?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "x", "y", "z", "Re_fx", "Im_fx", "Re_fy", "Im_fy", "Re_fz", "Im_fz",
        ])
        .map_err(csv_err)?;
        for idx in 0..g.len() {
            let r = g.point(idx);
            let mut rec: Vec<String> = r.iter().map(|x| format!("{x:e}")).collect();
            for c in &self.components {
                rec.push(format!("{:e}", c[idx].re));
                rec.push(format!("{:e}", c[idx].im));
            }
            wr.write_record(&rec).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("utf-8")
    }

    /// Reads the CSV form. `kind` and `frequency_hz` in the metadata line are
    /// optional and default to mechanical and 0.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut meta = String::new();
        reader.read_line(&mut meta)?;
        let meta = meta
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| parse_err(0, "metadata", "first line must start with `#`"))?;

        let (mut origin, mut spacing, mut counts) = (None, None, None);
        let mut periodic = [false; 3];
        let mut kind = FieldKind::Mechanical;
        let mut frequency_hz = 0.0;
        for token in meta.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| parse_err(0, "metadata", &format!("malformed entry `{token}`")))?;
            match key {
                "origin" => origin = Some(triple::<f64>(value, key)?),
                "spacing" => spacing = Some(triple::<f64>(value, key)?),
                "counts" => counts = Some(triple::<usize>(value, key)?),
                "periodic" => periodic = triple::<u8>(value, key)?.map(|b| b != 0),
                "kind" => kind = value.parse()?,
                "frequency_hz" => {
                    frequency_hz = value
                        .parse()
                        .map_err(|_| parse_err(0, key, "not a number"))?
                }
                other => return Err(parse_err(0, other, "unknown metadata key")),
            }
        }
        let grid = Grid3D::new(
            origin.ok_or_else(|| parse_err(0, "origin", "missing"))?,
            spacing.ok_or_else(|| parse_err(0, "spacing", "missing"))?,
            counts.ok_or_else(|| parse_err(0, "counts", "missing"))?,
        )?
        .with_periodic(periodic);

        let mut rd = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rd
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.len() != 9 {
            return Err(parse_err(0, "header", "expected 9 columns"));
        }
        let mut comps: [Vec<Complex64>; 3] = Default::default();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 9 {
                return Err(parse_err(i + 1, "", "expected 9 cells"));
            }
            let mut vals = [0.0; 9];
            for (k, cell) in rec.iter().enumerate() {
                vals[k] = cell
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(i + 1, &headers[k], "not a number"))?;
            }
            for a in 0..3 {
                comps[a].push(Complex64::new(vals[3 + 2 * a], vals[4 + 2 * a]));
            }
        }
        if comps[0].len() != grid.len() {
            return Err(parse_err(
                comps[0].len(),
                "rows",
                &format!("expected {} rows", grid.len()),
            ));
        }
        ModeField::new(grid, comps, kind, hz_to_rad(frequency_hz))
    }
}

fn parse_err(row: usize, column: &str, message: &str) -> Error {
    Error::Parse {
        row,
        column: column.to_string(),
        message: message.to_string(),
    }
}

fn triple<T: FromStr>(value: &str, key: &str) -> Result<[T; 3]> {
    let parts: Vec<T> = value
        .split(',')
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| parse_err(0, key, "not a number"))
        })
        .collect::<Result<_>>()?;
    <[T; 3]>::try_from(parts)
        .map_err(|_| parse_err(0, key, "expected three comma-separated values"))
}
