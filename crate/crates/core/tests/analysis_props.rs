mod common;

use common::{log_uniform, random_omega, random_params};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transducer_core::analysis::{
    cooperativities, cooperativity_functions, critical_photon_number, efficiency_spectrum,
    efficiency_via_cooperativities, kappa_ex2_threshold, linear_grid, log_grid, max_efficiency,
    max_efficiency_contour, on_resonance_efficiency, power_curve,
};
use transducer_core::dynamics::{efficiency, photons_to_pump_power};
use transducer_core::units::hz_to_rad;
use transducer_core::{
    CooperativitySet, Error, OperatingPoint, Preset, SweepResult, TransducerParams,
};

fn resonant(mut p: TransducerParams) -> TransducerParams {
    p.delta_1 = p.omega_m;
    p.delta_2 = p.omega_m;
    p
}

fn eff_at(p: &TransducerParams, n: f64, w: f64) -> f64 {
    efficiency(&OperatingPoint::new(*p, n).unwrap(), w).unwrap()
}

/// Maximizes a unimodal `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn test_presets() -> Vec<TransducerParams> {
    Preset::ALL
        .iter()
        .map(|p| p.apply(&TransducerParams::nominal()))
        .collect()
}

#[test]
fn cooperativity_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let n = critical_photon_number(&p).unwrap() * log_uniform(&mut rng, 1e-3, 1e3);
        let op = OperatingPoint::new(p, n).unwrap();
        let w = random_omega(&mut rng, &p);
        let direct = efficiency(&op, w).unwrap();
        let coop = efficiency_via_cooperativities(&op, w).unwrap();
        assert!(
            (direct - coop).abs() <= 1e-12 * direct.max(1e-300),
            "{direct} vs {coop}"
        );
    }
}

#[test]
fn cooperativity_functions_at_resonance_are_real_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..100 {
        let p = resonant(random_params(&mut rng));
        let op = OperatingPoint::new(p, log_uniform(&mut rng, 1.0, 1e8)).unwrap();
        let c = cooperativities(&op).unwrap();
        let f = cooperativity_functions(&op, p.omega_m).unwrap();
        assert!((f.c_om.re - c.c_om).abs() <= 1e-12 * c.c_om && f.c_om.im.abs() <= 1e-12 * c.c_om);
        assert!((f.c_12.re - c.c_12).abs() <= 1e-12 * c.c_12 && f.c_12.im.abs() <= 1e-12 * c.c_12);
        let direct = efficiency(&op, p.omega_m).unwrap();
        assert!((on_resonance_efficiency(&c) - direct).abs() <= 1e-12 * direct);
    }
}

#[test]
fn critical_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut cases = test_presets();
    cases.extend((0..200).map(|_| resonant(random_params(&mut rng))));
    for p in cases {
        let n = critical_photon_number(&p).unwrap();
        let op = OperatingPoint::new(p, n).unwrap();
        let c = cooperativities(&op).unwrap();
        assert!((c.c_om - c.c_12 - 1.0).abs() <= 1e-12 * (c.c_12 + 1.0));
        let at_crit = efficiency(&op, p.omega_m).unwrap();
        let best = max_efficiency(&p).unwrap();
        assert!((at_crit - best).abs() <= 1e-12 * best);
    }
}

#[test]
fn critical_photon_limits() {
    let p = TransducerParams {
        j: 0.0,
        ..TransducerParams::nominal()
    };
    let gm = 2.0 * std::f64::consts::PI * 2.6e6 + 4.0 * p.g_em * p.g_em / p.big_gamma;
    let n = critical_photon_number(&p).unwrap();
    assert!((n - gm * p.kappa_1 / (4.0 * p.g_bar * p.g_bar)).abs() <= 1e-12 * n);
    let dark = TransducerParams {
        g_bar: 0.0,
        ..TransducerParams::nominal()
    };
    assert!(matches!(
        critical_photon_number(&dark),
        Err(Error::UndefinedOptimum(_))
    ));
}

#[test]
fn golden_section_finds_critical_photons() {
    for p in test_presets() {
        let n = critical_photon_number(&p).unwrap();
        let x = golden_max(
            |x| eff_at(&p, x.exp(), p.omega_m),
            (n / 100.0).ln(),
            (n * 100.0).ln(),
            1e-11,
        );
        assert!((x.exp() / n - 1.0).abs() <= 1e-6, "{} vs {n}", x.exp());
    }
}

#[test]
fn grid_refined_maximum() {
    for p in test_presets() {
        let best = max_efficiency(&p).unwrap();
        let n0 = critical_photon_number(&p).unwrap();
        let (mut ln_n, mut w) = ((n0 * 3.7).ln(), p.omega_m + 0.37 * p.kappa_1);
        let (mut span_n, mut span_w) = (6.0, 4.0 * p.kappa_1);
        let mut top = 0.0;
        for _ in 0..12 {
            let mut local = (f64::NEG_INFINITY, ln_n, w);
            for i in 0..=20 {
                for k in 0..=20 {
                    let x = ln_n - span_n + span_n * i as f64 / 10.0;
                    let y = w - span_w + span_w * k as f64 / 10.0;
                    let e = eff_at(&p, x.exp(), y);
                    if e > local.0 {
                        local = (e, x, y);
                    }
                }
            }
            (top, ln_n, w) = local;
            span_n /= 4.0;
            span_w /= 4.0;
        }
        assert!((top - best).abs() <= 1e-4 * best, "{top} vs {best}");
    }
}

#[test]
fn optimality_slope_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..200 {
        let c_12 = log_uniform(&mut rng, 1e-2, 1e5);
        let base = CooperativitySet {
            c_om: c_12 + 1.0,
            c_12,
            f_2: rng.gen_range(0.1..1.0),
            f_m: rng.gen_range(0.1..1.0),
        };
        let h = 1e-6 * base.c_om;
        let f = |c_om: f64| on_resonance_efficiency(&CooperativitySet { c_om, ..base });
        let slope = (f(base.c_om + h) - f(base.c_om - h)) / (2.0 * h);
        assert!((slope * base.c_om / f(base.c_om)).abs() <= 1e-4);
        assert!((f(base.c_om) - base.f_2 * base.f_m * c_12 / (c_12 + 1.0)).abs() <= 1e-12);
    }
}

#[test]
fn threshold_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut checked = 0;
    for _ in 0..500 {
        let mut p = resonant(random_params(&mut rng));
        p.kappa_02 = p.kappa_ex2 * log_uniform(&mut rng, 1e-6, 10.0);
        p.j = (p.kappa_1 * p.kappa_2()).sqrt() * log_uniform(&mut rng, 0.01, 100.0);
        let t = kappa_ex2_threshold(&p).unwrap();
        if (t.f_2 - t.threshold).abs() < 1e-3 * t.threshold {
            continue;
        }
        let h = 1e-6 * p.kappa_ex2;
        let up = max_efficiency(&p.with_kappa_ex2(p.kappa_ex2 + h)).unwrap();
        let down = max_efficiency(&p.with_kappa_ex2(p.kappa_ex2 - h)).unwrap();
        assert_eq!(up > down, t.monotone_increasing, "{t:?}");
        checked += 1;
    }
    assert!(checked > 300);
}

#[test]
fn threshold_boundaries() {
    let nominal = kappa_ex2_threshold(&TransducerParams::nominal()).unwrap();
    assert!(nominal.monotone_increasing);
    assert!((nominal.f_2 - 5.0 / 6.0).abs() < 1e-12);
    let lossless = TransducerParams {
        kappa_02: 0.0,
        ..TransducerParams::nominal()
    };
    let t = kappa_ex2_threshold(&lossless).unwrap();
    assert_eq!(t.f_2, 1.0);
    assert!(!t.monotone_increasing);
}

#[test]
fn contour_consistency() {
    let p = TransducerParams::nominal();
    let g = log_grid(p.g_em / 10.0, p.g_em * 10.0, 21).unwrap();
    let k = log_grid(p.kappa_ex2 / 10.0, p.kappa_ex2 * 10.0, 21).unwrap();
    let s = max_efficiency_contour(&p, &g, &k).unwrap();
    assert_eq!(
        s.columns,
        ["log10_gEM_hz", "log10_kex2_hz", "max_efficiency"]
    );
    assert_eq!(s.len(), 21 * 21);
    let centre = s.rows[10 * 21 + 10][2];
    assert!((centre - max_efficiency(&p).unwrap()).abs() <= 1e-12 * centre);
    for gi in 0..21 {
        for ki in 0..20 {
            let (a, b) = (&s.rows[gi * 21 + ki], &s.rows[gi * 21 + ki + 1]);
            let cell = p.with_g_em(g[gi]).with_kappa_ex2(k[ki + 1]);
            if kappa_ex2_threshold(&cell).unwrap().monotone_increasing {
                assert!(b[2] > a[2]);
            }
        }
    }
    let combined = Preset::Combined.apply(&p);
    let five = max_efficiency_contour(&p, &[p.g_em * 5.0], &[p.kappa_ex2 * 5.0]).unwrap();
    assert!((five.rows[0][2] - max_efficiency(&combined).unwrap()).abs() <= 1e-12);
}

#[test]
fn power_curve_shape() {
    for p in test_presets() {
        let n_crit = critical_photon_number(&p).unwrap();
        let p_crit = photons_to_pump_power(&p, n_crit, None).unwrap();
        let powers = log_grid(p_crit * 1e-4, p_crit * 1e4, 401).unwrap();
        let curve = power_curve(&p, &powers, None).unwrap();
        let eff = curve.sweep.column("efficiency").unwrap();
        let signs: Vec<bool> = eff.windows(2).map(|w| w[1] > w[0]).collect();
        let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
        assert_eq!(changes, 1);
        assert!(curve.peak_index > 0 && curve.peak_index < powers.len() - 1);
        let far = power_curve(&p, &[0.0, 1e3 * p_crit], None).unwrap();
        let far_eff = far.sweep.column("efficiency").unwrap();
        assert_eq!(far_eff[0], 0.0);
        assert!(far_eff[1] < 0.1 * curve.peak_efficiency);
    }
}

#[test]
fn spectrum_needs_resolution() {
    let p = TransducerParams::nominal();
    let coarse = linear_grid(p.omega_m - hz_to_rad(50e6), p.omega_m + hz_to_rad(50e6), 21).unwrap();
    assert!(matches!(
        efficiency_spectrum(&p, &coarse),
        Err(Error::GridTooCoarse { .. })
    ));
    let fine = linear_grid(
        p.omega_m - hz_to_rad(50e6),
        p.omega_m + hz_to_rad(50e6),
        2001,
    )
    .unwrap();
    let s = efficiency_spectrum(&p, &fine).unwrap();
    assert_eq!(s.frequencies.len(), s.efficiencies.len());
    assert!(s.fwhm > 0.0);
    assert!((s.peak_efficiency - max_efficiency(&p).unwrap()).abs() <= 1e-9);
}

#[test]
fn presets_round_trip() {
    let base = TransducerParams::nominal();
    for preset in Preset::ALL {
        let again: Preset = preset.name().parse().unwrap();
        assert_eq!(again, preset);
        assert_eq!(again.apply(&base), preset.apply(&base));
    }
    assert!("6gem".parse::<Preset>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweep_csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e30f64..1e30, 3), 0..20)) {
        let mut s = SweepResult::new(["a", "b", "c"]);
        for r in rows {
            s.push_row(r).unwrap();
        }
        let back = SweepResult::from_csv_str(&s.to_csv_string()).unwrap();
        prop_assert_eq!(&back.columns, &s.columns);
        for (x, y) in back.rows.iter().flatten().zip(s.rows.iter().flatten()) {
            prop_assert!((x - y).abs() <= 1e-11 * y.abs());
        }
        prop_assert_eq!(back.to_csv_string(), s.to_csv_string());
    }
}
