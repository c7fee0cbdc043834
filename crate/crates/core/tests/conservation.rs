use nls_core::experiments::soliton_problem;
use nls_core::{run, Complex64, Grid1D, Nonlinearity, SchemeKind, SolverConfig, StartupMode};
use proptest::prelude::*;

fn drift(scheme: SchemeKind, delta: f64) -> (f64, f64) {
    let p = soliton_problem(256).unwrap();
    let mut cfg = SolverConfig::new(0.01, 0.5);
    cfg.delta = delta;
    cfg.startup = Some(StartupMode::ExactSamples);
    let out = run(&p.u0, &p.grid, &p.nl, &scheme.coefficients().unwrap(), &cfg, p.sampler()).unwrap();
    let d = &out.diagnostics;
    (d.max_relative_mass_drift(), d.max_relative_energy_drift())
}

#[test]
fn drift_follows_the_fixed_point_tolerance() {
    for scheme in [SchemeKind::CrankNicolson, SchemeKind::Mbdf(3)] {
        let (m_loose, e_loose) = drift(scheme, 1e-6);
        let (m_tight, e_tight) = drift(scheme, 1e-12);
        assert!(m_tight < 1e-12 && e_tight < 1e-11, "{scheme}: {m_tight:e} {e_tight:e}");
        assert!(m_loose.max(e_loose) > 10.0 * m_tight.max(e_tight), "{scheme}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_data_conserves_mass_and_energy(
        amp in 0.1f64..1.5,
        width in 0.5f64..3.0,
        wave in -2.0f64..2.0,
        lambda in -2.0f64..2.0,
        s in 0usize..8,
    ) {
        let scheme = SchemeKind::ALL[s];
        prop_assume!(scheme != SchemeKind::FourStepSymmetric);
        let g = Grid1D::periodic(-10.0, 10.0, 128).unwrap();
        let u0 = g.sample(0.0, |x| Complex64::from_polar(amp * (-(x / width).powi(2)).exp(), wave * x));
        let mut cfg = SolverConfig::new(0.01, 0.2);
        cfg.startup = Some(StartupMode::CascadeCN);
        let out = run(&u0, &g, &Nonlinearity::cubic(lambda), &scheme.coefficients().unwrap(), &cfg, None).unwrap();
        let d = &out.diagnostics;
        prop_assert!(d.max_relative_mass_drift() < 1e-11, "{}", d.max_relative_mass_drift());
        // the energy can be near zero for this data, so scale by the kinetic part
        let e0 = d.initial.energy_r;
        let scale = 1.0 + e0.abs() + d.initial.mass_r;
        for r in d.all() {
            prop_assert!((r.energy_r - e0).abs() < 1e-10 * scale, "{} vs {}", r.energy_r, e0);
        }
    }
}
