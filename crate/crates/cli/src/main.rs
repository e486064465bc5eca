mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use transducer_core::analysis::{
    cooperativities, critical_photon_number, efficiency_spectrum, kappa_ex2_threshold, linear_grid,
    log_grid, max_efficiency, max_efficiency_contour, power_curve,
};
use transducer_core::coupling::{
    em_mode_volume, mech_mode_volume, optomech_coupling, piezo_coupling, piezo_coupling_total,
    EtaField,
};
use transducer_core::dynamics::{derived_rates, photons_to_pump_power, ParamsFile};
use transducer_core::materials::{self, FabFilter, FomKind};
use transducer_core::rings::{self, beat_length, coupled_fraction};
use transducer_core::units::{hz_to_rad, rad_to_hz};
use transducer_core::{
    Complex64, CouplerGeometry, Error, MaterialTensorSet, ModeField, OperatingPoint, Preset,
    Result, RingPair, TransducerParams,
};

use output::{emit, json_bytes, sidecar_path, write_atomic};

/// Microwave-to-optical transducer modelling: spectra, optimization and sweeps.
#[derive(Parser, Debug)]
#[command(name = "transducer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// On-resonance efficiency against pump power.
    EfficiencyCurve(CurveArgs),
    /// Efficiency against signal frequency at the critical pump level.
    Spectrum(SpectrumArgs),
    /// Critical photon number, maximum efficiency and cooperativities.
    Optimize(ModelArgs),
    /// Maximum efficiency over a (g_em, kappa_ex2) grid.
    Contour(ContourArgs),
    /// Coupled-ring transmission and critical frequencies.
    Rings(RingsArgs),
    /// Materials figures of merit, optionally ranked.
    Materials(MaterialsArgs),
    /// Coupling constants from sampled mode fields.
    Coupling(CouplingArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Parameter file (JSON, frequencies in Hz).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Named multiplier set applied on top of the parameters.
    #[arg(long, default_value = "nominal")]
    preset: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    grid_start: Option<f64>,
    #[arg(long)]
    grid_stop: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Power grid in watts (log-spaced); defaults span 1e-3..1e3 of the critical power.
    #[command(flatten)]
    grid: GridArgs,
    /// Pump offset in the rotating frame, Hz; defaults to the lower enhancement resonance.
    #[arg(long, allow_hyphen_values = true)]
    pump_offset_hz: Option<f64>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "nominal")]
    preset: String,
    /// CSV output path; the JSON summary goes next to it with a `.json` extension.
    #[arg(long, default_value = "spectrum.csv")]
    out: PathBuf,
    /// Signal frequency grid in Hz (linear); defaults to omega_m +/- 500 MHz.
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct ContourArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// g_em axis in Hz (log-spaced); defaults to nominal/10..nominal*10.
    #[arg(long)]
    gem_grid_start: Option<f64>,
    #[arg(long)]
    gem_grid_stop: Option<f64>,
    #[arg(long, default_value_t = 41)]
    gem_grid_points: usize,
    /// kappa_ex2 axis in Hz (log-spaced); defaults to nominal/10..nominal*10.
    #[arg(long)]
    kex2_grid_start: Option<f64>,
    #[arg(long)]
    kex2_grid_stop: Option<f64>,
    #[arg(long, default_value_t = 41)]
    kex2_grid_points: usize,
}

#[derive(Args, Debug)]
struct RingsArgs {
    /// Round-trip time in seconds.
    #[arg(long)]
    round_trip_s: f64,
    /// Inter-ring coupling J/2pi in Hz.
    #[arg(long)]
    j_hz: f64,
    /// Round-trip field amplitude.
    #[arg(long, default_value_t = 1.0)]
    loss: f64,
    /// Bus field coupling.
    #[arg(long, default_value_t = 0.05)]
    bus: f64,
    /// Frequency grid in Hz; defaults to three free spectral ranges.
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    n_min: i64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    n_max: i64,
    /// Evanescent coupler: wavelength in metres.
    #[arg(long, requires_all = ["n_eff_sym", "n_eff_asym"])]
    wavelength_m: Option<f64>,
    #[arg(long)]
    n_eff_sym: Option<f64>,
    #[arg(long)]
    n_eff_asym: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    z_m: f64,
    /// CSV output path; critical frequencies go next to it with a `.json` extension.
    #[arg(long, default_value = "rings.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MaterialsArgs {
    /// Materials CSV; the bundled table when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Rank by `em` or `om`.
    #[arg(long)]
    rank: Option<String>,
    /// `any`, `compatible` or `proven`.
    #[arg(long, default_value = "any")]
    fab: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CouplingArgs {
    /// Electromagnetic mode field CSV.
    #[arg(long)]
    em: PathBuf,
    /// Mechanical mode field CSV.
    #[arg(long)]
    mech: PathBuf,
    /// Material tensor set (JSON).
    #[arg(long)]
    material: PathBuf,
    /// Single piezo component `i,j,k` (1-based) in addition to the full sum.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "I,J,K")]
    component: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve(params: Option<&Path>, preset: &str) -> Result<(TransducerParams, Preset)> {
    let base = match params {
        Some(p) => TransducerParams::load(p)?,
        None => TransducerParams::nominal(),
    };
    let preset: Preset = preset.parse()?;
    let p = preset.apply(&base);
    p.validate()?;
    Ok((p, preset))
}

fn grid_or(g: &GridArgs, start: f64, stop: f64, points: usize) -> (f64, f64, usize) {
    (
        g.grid_start.unwrap_or(start),
        g.grid_stop.unwrap_or(stop),
        g.grid_points.unwrap_or(points),
    )
}

fn csv_bytes(s: &transducer_core::SweepResult) -> Vec<u8> {
    s.to_csv_string().into_bytes()
}

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexOut {
    fn from(c: Complex64) -> Self {
        ComplexOut { re: c.re, im: c.im }
    }
}

fn efficiency_curve(a: &CurveArgs) -> Result<()> {
    let (p, _) = resolve(a.model.params.as_deref(), &a.model.preset)?;
    let offset = a.pump_offset_hz.map(hz_to_rad);
    let p_crit = photons_to_pump_power(&p, critical_photon_number(&p)?, offset)?;
    let (start, stop, n) = grid_or(&a.grid, p_crit * 1e-3, p_crit * 1e3, 241);
    let powers = log_grid(start, stop, n)?;
    let curve = power_curve(&p, &powers, offset)?;
    emit(a.model.out.as_deref(), &csv_bytes(&curve.sweep))
}

fn spectrum(a: &SpectrumArgs) -> Result<()> {
    let (p, preset) = resolve(a.params.as_deref(), &a.preset)?;
    let f_m = rad_to_hz(p.omega_m);
    let (start, stop, n) = grid_or(&a.grid, f_m - 500e6, f_m + 500e6, 20001);
    let grid: Vec<f64> = linear_grid(start, stop, n)?
        .into_iter()
        .map(hz_to_rad)
        .collect();
    let s = efficiency_spectrum(&p, &grid)?;
    let summary = json!({
        "preset": preset.name(),
        "peak_shift_mhz": rad_to_hz(s.peak_shift) / 1e6,
        "fwhm_mhz": rad_to_hz(s.fwhm) / 1e6,
        "broad_peak": s.broad_peak,
        "peak_efficiency": s.peak_efficiency,
        "intra_ring_photons": s.intra_ring_photons,
        "params": ParamsFile::from(p),
    });
    write_atomic(&a.out, &csv_bytes(&s.to_sweep()))?;
    write_atomic(&sidecar_path(&a.out), &json_bytes(&summary)?)
}

fn optimize(a: &ModelArgs) -> Result<()> {
    let (p, preset) = resolve(a.params.as_deref(), &a.preset)?;
    let n = critical_photon_number(&p)?;
    let c = cooperativities(&OperatingPoint::new(p, n)?)?;
    let t = kappa_ex2_threshold(&p)?;
    let r = derived_rates(&p)?;
    let pump = match p.lambda_l {
        Some(_) => Some(photons_to_pump_power(&p, n, None)?),
        None => None,
    };
    let out = json!({
        "preset": preset.name(),
        "critical_photon_number": n,
        "max_efficiency": max_efficiency(&p)?,
        "cooperativities": c,
        "kappa_ex2_threshold": t,
        "critical_pump_power_w": pump,
        "gamma_m_hz": rad_to_hz(r.gamma_m),
        "gamma_ex_hz": rad_to_hz(r.gamma_ex),
        "gamma_ex_derived_hz": rad_to_hz(r.gamma_ex_derived),
        "gamma_ex_discrepancy": r.gamma_ex_discrepancy,
        "params": ParamsFile::from(p),
    });
    emit(a.out.as_deref(), &json_bytes(&out)?)
}

fn contour(a: &ContourArgs) -> Result<()> {
    let (p, _) = resolve(a.model.params.as_deref(), &a.model.preset)?;
    let (g, k) = (rad_to_hz(p.g_em), rad_to_hz(p.kappa_ex2));
    let g_grid = log_grid(
        a.gem_grid_start.unwrap_or(g / 10.0),
        a.gem_grid_stop.unwrap_or(g * 10.0),
        a.gem_grid_points,
    )?;
    let k_grid = log_grid(
        a.kex2_grid_start.unwrap_or(k / 10.0),
        a.kex2_grid_stop.unwrap_or(k * 10.0),
        a.kex2_grid_points,
    )?;
    let to_rad = |v: Vec<f64>| v.into_iter().map(hz_to_rad).collect::<Vec<_>>();
    let s = max_efficiency_contour(&p, &to_rad(g_grid), &to_rad(k_grid))?;
    emit(a.model.out.as_deref(), &csv_bytes(&s))
}

fn rings_cmd(a: &RingsArgs) -> Result<()> {
    let rp = RingPair::new(a.round_trip_s, hz_to_rad(a.j_hz), a.loss, a.bus)?;
    let fsr = rad_to_hz(rp.free_spectral_range());
    let (start, stop, n) = grid_or(&a.grid, 0.0, 3.0 * fsr, 30001);
    let grid: Vec<f64> = linear_grid(start, stop, n)?
        .into_iter()
        .map(hz_to_rad)
        .collect();
    let s = rings::transmission_spectrum(&rp, &grid)?;
    let critical: Vec<_> = rings::critical_frequencies(&rp, a.n_min..=a.n_max)
        .into_iter()
        .map(|c| json!({"n": c.n, "kind": c.kind.label(), "frequency_hz": rad_to_hz(c.omega)}))
        .collect();
    let coupler = match (a.wavelength_m, a.n_eff_sym, a.n_eff_asym) {
        (Some(wavelength), Some(n_eff_sym), Some(n_eff_asym)) => {
            let cg = CouplerGeometry {
                wavelength,
                n_eff_sym,
                n_eff_asym,
                z: a.z_m,
            };
            let lc = beat_length(&cg);
            Some(json!({
                "beat_length_m": if lc.infinite { None } else { Some(lc.length) },
                "infinite": lc.infinite,
                "fraction_remaining": coupled_fraction(&cg),
            }))
        }
        _ => None,
    };
    let summary = json!({
        "ring_pair": rp,
        "free_spectral_range_hz": fsr,
        "critical_frequencies": critical,
        "coupler": coupler,
    });
    write_atomic(&a.out, &csv_bytes(&s))?;
    write_atomic(&sidecar_path(&a.out), &json_bytes(&summary)?)
}

fn fom_cell(v: &transducer_core::FomValue) -> (String, String) {
    match v {
        transducer_core::FomValue::Defined(x) => {
            (transducer_core::sweep::format_float(*x), String::new())
        }
        transducer_core::FomValue::Undefined(r) => (String::new(), r.clone()),
    }
}

fn materials_cmd(a: &MaterialsArgs) -> Result<()> {
    let records = match &a.data {
        Some(p) => materials::load_materials(p)?,
        None => materials::bundled_materials(),
    };
    let filter: FabFilter = a.fab.parse()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    match &a.rank {
        Some(which) => {
            let which: FomKind = which.parse()?;
            w.write_record(["rank", "name", "fom", "undefined_reason", "fab"])
                .map_err(csv_err)?;
            for (i, e) in materials::rank(&records, which, filter).iter().enumerate() {
                let (v, why) = fom_cell(&e.fom);
                w.write_record([
                    (i + 1).to_string(),
                    e.name.clone(),
                    v,
                    why,
                    e.fab.as_str().to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        None => {
            w.write_record([
                "name",
                "em_fom",
                "em_undefined_reason",
                "om_fom",
                "om_undefined_reason",
                "fab",
            ])
            .map_err(csv_err)?;
            for r in records.iter().filter(|r| filter_accepts(filter, r)) {
                let f = materials::figures_of_merit(r);
                let (em, em_why) = fom_cell(&f.em_fom);
                let (om, om_why) = fom_cell(&f.om_fom);
                w.write_record([
                    r.name.clone(),
                    em,
                    em_why,
                    om,
                    om_why,
                    r.fab.as_str().to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    emit(a.out.as_deref(), &bytes)
}

fn filter_accepts(filter: FabFilter, r: &materials::MaterialRecord) -> bool {
    !materials::rank(std::slice::from_ref(r), FomKind::Em, filter).is_empty()
}

fn coupling_cmd(a: &CouplingArgs) -> Result<()> {
    let read_field =
        |p: &Path| -> Result<ModeField> { ModeField::read_csv(std::fs::File::open(p)?) };
    let e = read_field(&a.em)?;
    let w = read_field(&a.mech)?;
    let mat: MaterialTensorSet = serde_json::from_str(&std::fs::read_to_string(&a.material)?)?;
    mat.validate()?;
    let component = match &a.component {
        Some(c) => {
            if c.len() != 3 {
                return Err(Error::InvalidParameter {
                    name: "component".into(),
                    reason: format!("expected three indices, got {}", c.len()),
                });
            }
            let g = piezo_coupling(&e, &w, &mat, (c[0], c[1], c[2]))?;
            Some(
                json!({"i": c[0], "j": c[1], "k": c[2], "g_hz": ComplexOut::from(g / std::f64::consts::TAU)}),
            )
        }
        None => None,
    };
    let out = json!({
        "v_em_m3": em_mode_volume(&e, EtaField::Uniform(mat.eta))?,
        "v_mech_m3": mech_mode_volume(&w)?,
        "eta_eff": mat.eta_eff(),
        "piezo_total_hz": ComplexOut::from(piezo_coupling_total(&e, &w, &mat)? / std::f64::consts::TAU),
        "piezo_component": component,
        "optomech_hz": ComplexOut::from(optomech_coupling(&e, &w, &mat)? / std::f64::consts::TAU),
    });
    emit(a.out.as_deref(), &json_bytes(&out)?)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::EfficiencyCurve(a) => efficiency_curve(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Optimize(a) => optimize(a),
        Command::Contour(a) => contour(a),
        Command::Rings(a) => rings_cmd(a),
        Command::Materials(a) => materials_cmd(a),
        Command::Coupling(a) => coupling_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.code(), e);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_singular() {
        3
    } else {
        2
    }
}
