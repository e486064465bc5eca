//! Tabulated piezoelectric and photoelastic constants and the two figures of
//! merit used to compare candidate materials.
//!
//! Densities stay in g/cm³ here, matching the tabulated figures of merit.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::csv_err;

const BUNDLED: &str = include_str!("../data/materials.csv");

pub const COLUMNS: [&str; 11] = [
    "name",
    "h33",
    "h33_flag",
    "eps33_rf",
    "eps33_ir",
    "eps33_ir_flag",
    "rho_gcc",
    "p33",
    "p33_flag",
    "fab",
    "notes",
];

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
        #[serde(rename_all = "kebab-case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown flag `{other}`")),
                }
            }
        }
    };
}

string_enum!(H33Flag {
    Value => "value",
    ZeroCentrosymmetric => "cs",
    ZeroPiezoClass => "pz",
    Unknown => "unknown",
});

string_enum!(IrFlag {
    Value => "value",
    Unknown => "unknown",
    Opaque => "opaque",
});

string_enum!(ValueFlag {
    Value => "value",
    Unknown => "unknown",
});

string_enum!(Fab {
    Yes => "yes",
    FrontEnd => "front-end",
    No => "no",
});

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialRecord {
    pub name: String,
    pub h33: Option<f64>,
    pub h33_flag: H33Flag,
    pub eps33_rf: Option<f64>,
    pub eps33_ir: Option<f64>,
    pub eps33_ir_flag: IrFlag,
    /// Density in g/cm³.
    pub rho_gcc: Option<f64>,
    pub p33: Option<f64>,
    pub p33_flag: ValueFlag,
    pub fab: Fab,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FomValue {
    Defined(f64),
    Undefined(String),
}

impl FomValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            FomValue::Defined(v) => Some(*v),
            FomValue::Undefined(_) => None,
        }
    }
}

impl fmt::Display for FomValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FomValue::Defined(v) => write!(f, "{v:.2e}"),
            FomValue::Undefined(r) => write!(f, "undefined ({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FomResult {
    pub em_fom: FomValue,
    pub om_fom: FomValue,
}

fn undefined(reason: &str) -> FomValue {
    FomValue::Undefined(reason.to_string())
}

/// `h33 · sqrt(eps33_rf / rho)`.
pub fn em_fom(r: &MaterialRecord) -> FomValue {
    let h = match (r.h33_flag, r.h33) {
        (H33Flag::ZeroCentrosymmetric | H33Flag::ZeroPiezoClass, _) => {
            return FomValue::Defined(0.0)
        }
        (H33Flag::Unknown, _) | (_, None) => return undefined("h33 unknown"),
        (H33Flag::Value, Some(h)) => h,
    };
    let Some(eps) = r.eps33_rf else {
        return undefined("eps33_rf unknown");
    };
    let Some(rho) = r.rho_gcc else {
        return undefined("density unknown");
    };
    FomValue::Defined(h * (eps / rho).sqrt())
}

/// `eps33_ir · p33 / sqrt(rho)`.
pub fn om_fom(r: &MaterialRecord) -> FomValue {
    let eps = match (r.eps33_ir_flag, r.eps33_ir) {
        (IrFlag::Opaque, _) => return undefined("opaque at IR"),
        (IrFlag::Unknown, _) | (_, None) => return undefined("eps33_ir unknown"),
        (IrFlag::Value, Some(e)) => e,
    };
    let Some(p) = r.p33 else {
        return undefined("p33 unknown");
    };
    let Some(rho) = r.rho_gcc else {
        return undefined("density unknown");
    };
    FomValue::Defined(eps * p / rho.sqrt())
}

pub fn figures_of_merit(r: &MaterialRecord) -> FomResult {
    FomResult {
        em_fom: em_fom(r),
        om_fom: om_fom(r),
    }
}

fn parse_opt(s: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        row,
        column: column.to_string(),
        message: format!("`{s}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            message: "value must be finite".into(),
        });
    }
    Ok(Some(v))
}

fn parse_flag<T: FromStr<Err = String>>(s: &str, row: usize, column: &str) -> Result<T> {
    s.parse().map_err(|message| Error::Parse {
        row,
        column: column.to_string(),
        message,
    })
}

fn consistency(row: usize, column: &str, present: bool, flag_is_value: bool) -> Result<()> {
    if present != flag_is_value {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            message: if present {
                "value given together with a non-value flag".into()
            } else {
                "flag `value` requires a number".into()
            },
        });
    }
    Ok(())
}

pub fn read_materials<R: Read>(r: R) -> Result<Vec<MaterialRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(COLUMNS) {
        return Err(Error::Parse {
            row: 0,
            column: "header".into(),
            message: format!("expected columns {}", COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rd.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(csv_err)?;
        let cell = |k: usize| rec.get(k).unwrap_or("").trim();
        let name = cell(0).to_string();
        if name.is_empty() {
            return Err(Error::Parse {
                row,
                column: "name".into(),
                message: "empty name".into(),
            });
        }
        if !seen.insert(name.clone()) {
            return Err(Error::Parse {
                row,
                column: "name".into(),
                message: format!("duplicate material `{name}`"),
            });
        }
        let h33 = parse_opt(cell(1), row, "h33")?;
        let h33_flag: H33Flag = parse_flag(cell(2), row, "h33_flag")?;
        consistency(row, "h33", h33.is_some(), h33_flag == H33Flag::Value)?;
        let eps33_rf = parse_opt(cell(3), row, "eps33_rf")?;
        let eps33_ir = parse_opt(cell(4), row, "eps33_ir")?;
        let eps33_ir_flag: IrFlag = parse_flag(cell(5), row, "eps33_ir_flag")?;
        consistency(
            row,
            "eps33_ir",
            eps33_ir.is_some(),
            eps33_ir_flag == IrFlag::Value,
        )?;
        let rho_gcc = parse_opt(cell(6), row, "rho_gcc")?;
        if rho_gcc.is_some_and(|r| r <= 0.0) {
            return Err(Error::Parse {
                row,
                column: "rho_gcc".into(),
                message: "density must be positive".into(),
            });
        }
        let p33 = parse_opt(cell(7), row, "p33")?;
        let p33_flag: ValueFlag = parse_flag(cell(8), row, "p33_flag")?;
        consistency(row, "p33", p33.is_some(), p33_flag == ValueFlag::Value)?;
        let fab: Fab = parse_flag(cell(9), row, "fab")?;
        out.push(MaterialRecord {
            name,
            h33,
            h33_flag,
            eps33_rf,
            eps33_ir,
            eps33_ir_flag,
            rho_gcc,
            p33,
            p33_flag,
            fab,
            notes: rec.get(10).unwrap_or("").to_string(),
        });
    }
    Ok(out)
}

pub fn load_materials(path: impl AsRef<Path>) -> Result<Vec<MaterialRecord>> {
    read_materials(std::fs::File::open(path)?)
}

/// The dataset shipped with the crate.
pub fn bundled_materials() -> Vec<MaterialRecord> {
    read_materials(BUNDLED.as_bytes()).expect("bundled materials table is well-formed")
}

pub fn bundled_csv() -> &'static str {
    BUNDLED
}

pub fn write_materials<W: Write>(records: &[MaterialRecord], w: W) -> Result<()> {
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        wr.write_record([
            r.name.clone(),
            num(r.h33),
            r.h33_flag.to_string(),
            num(r.eps33_rf),
            num(r.eps33_ir),
            r.eps33_ir_flag.to_string(),
            num(r.rho_gcc),
            num(r.p33),
            r.p33_flag.to_string(),
            r.fab.to_string(),
            r.notes.clone(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn materials_to_csv(records: &[MaterialRecord]) -> String {
    let mut buf = Vec::new();
    write_materials(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("utf-8")
}

/// Case-insensitive lookup by full name or by the short name in parentheses.
pub fn find<'a>(records: &'a [MaterialRecord], query: &str) -> Option<&'a MaterialRecord> {
    let q = query.to_ascii_lowercase();
    records.iter().find(|r| {
        let name = r.name.to_ascii_lowercase();
        name == q
            || name
                .split_once('(')
                .is_some_and(|(_, alias)| alias.trim_end_matches(')') == q)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FomKind {
    Em,
    Om,
}

impl FromStr for FomKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "em" => Ok(FomKind::Em),
            "om" => Ok(FomKind::Om),
            other => Err(Error::param(
                "which",
                format!("expected `em` or `om`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FabFilter {
    #[default]
    Any,
    /// Fabricated or front-end compatible.
    Compatible,
    /// Already used in fabricated devices.
    Proven,
}

impl FabFilter {
    fn accepts(self, fab: Fab) -> bool {
        match self {
            FabFilter::Any => true,
            FabFilter::Compatible => fab != Fab::No,
            FabFilter::Proven => fab == Fab::Yes,
        }
    }
}

impl FromStr for FabFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(FabFilter::Any),
            "compatible" => Ok(FabFilter::Compatible),
            "proven" => Ok(FabFilter::Proven),
            other => Err(Error::param("fab", format!("unknown filter `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub name: String,
    pub fom: FomValue,
    pub fab: Fab,
}

/// Descending by `|FOM|`, ties broken by name, undefined entries last.
pub fn rank(records: &[MaterialRecord], which: FomKind, filter: FabFilter) -> Vec<RankedEntry> {
    let mut out: Vec<RankedEntry> = records
        .iter()
        .filter(|r| filter.accepts(r.fab))
        .map(|r| RankedEntry {
            name: r.name.clone(),
            fom: match which {
                FomKind::Em => em_fom(r),
                FomKind::Om => om_fom(r),
            },
            fab: r.fab,
        })
        .collect();
    out.sort_by(|a, b| match (a.fom.value(), b.fom.value()) {
        (Some(x), Some(y)) => y
            .abs()
            .total_cmp(&x.abs())
            .then_with(|| a.name.cmp(&b.name)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.name.cmp(&b.name),
    });
    out
}
