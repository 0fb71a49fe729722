use geomint::harness::{run_energy_table, ExperimentConfig, SystemSpec};
use geomint::integrators::{integrate_final, integrate_with, RecordOptions, Scheme, SchemeConfig};
use geomint::rigid_body::{
    curvature_sigma, energy, ensemble_rng, random_instance, separatrix_instance, BodyKind, InertiaTensor, RigidBody,
};
use geomint::sphere::{
    geodesic_curvature_sigma_with, CurvatureStencil, GeneratorEvaluator, GeneratorVariant, SigmaPolicy, SphereField,
};
use geomint::{ExpChoice, Vec3};

fn table(kind: BodyKind, schemes: Vec<SchemeConfig>, dts: Vec<f64>, ensemble: usize) -> ExperimentConfig {
    ExperimentConfig {
        system: SystemSpec::RigidBody { kind, separatrix: false },
        schemes,
        dts,
        t_final: 100.0,
        ensemble,
        seed: 7,
        out: None,
        stride: 1,
        sigmas: vec![],
    }
}

fn cor() -> SchemeConfig {
    SchemeConfig::new(Scheme::EulerFwd).with_sigma(SigmaPolicy::Curvature(CurvatureStencil::Analytic))
}

#[test]
fn axisymmetric_corrected_euler_with_exp_is_exact() {
    let c = table(BodyKind::Axisymmetric, vec![cor().with_exp(ExpChoice::Exp)], vec![10.0, 1.0, 0.1, 0.01], 10);
    let t = run_energy_table(&c).unwrap();
    for d in 0..4 {
        assert!(t.mean(0, d).unwrap() <= 1e-12, "dt {}: {:e}", t.dts[d], t.mean(0, d).unwrap());
    }
}

#[test]
fn triaxial_default_euler_energy_error_is_first_order() {
    let c = table(BodyKind::Triaxial, vec![SchemeConfig::new(Scheme::EulerFwd)], vec![0.1, 0.01], 10);
    let t = run_energy_table(&c).unwrap();
    let ratio = t.mean(0, 0).unwrap() / t.mean(0, 1).unwrap();
    assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn single_cell_table() {
    let c = table(BodyKind::Triaxial, vec![SchemeConfig::new(Scheme::Heun)], vec![0.1], 1);
    let t = run_energy_table(&c).unwrap();
    assert_eq!(t.cells.len(), 1);
    assert_eq!(t.cells[0].run_errors.len(), 1);
    let (i, m0) = geomint::rigid_body::random_instance_from(BodyKind::Triaxial, &mut ensemble_rng(7, 0));
    let rec = RecordOptions { stride: usize::MAX, energy: true };
    let tr = integrate_with(
        &SphereField::single(m0).unwrap(),
        100.0,
        0.1,
        &SchemeConfig::new(Scheme::Heun),
        &RigidBody::new(i),
        &rec,
    )
    .unwrap();
    assert_eq!(t.mean(0, 0), tr.max_energy_error());
}

#[test]
fn geometric_cells_stay_finite_at_large_steps() {
    let schemes = vec![
        SchemeConfig::new(Scheme::EulerFwd),
        SchemeConfig::new(Scheme::EulerFwd).with_generator(GeneratorVariant::Orthogonal),
        cor(),
        SchemeConfig::new(Scheme::Heun),
        SchemeConfig::new(Scheme::Heun).with_correction(geomint::integrators::Correction::Dcor),
        SchemeConfig::new(Scheme::Rkmk4),
        SchemeConfig::new(Scheme::Sy4),
        SchemeConfig::new(Scheme::Sy4).with_generator(GeneratorVariant::Orthogonal),
    ];
    for kind in [BodyKind::Triaxial, BodyKind::Axisymmetric] {
        let t = run_energy_table(&table(kind, schemes.clone(), vec![10.0, 1.0], 4)).unwrap();
        for c in &t.cells {
            assert!(c.failure.is_none() && c.mean().unwrap().is_finite(), "{} at {}", c.scheme, c.dt);
        }
    }
}

#[test]
fn separatrix_orbits_are_held_by_orthogonal_and_corrected_euler() {
    for k in 0..5 {
        let (i, m0) = separatrix_instance(&mut ensemble_rng(21, k));
        assert!(curvature_sigma(m0, &i).abs() < 1e-12);
        let sys = RigidBody::new(i);
        let m = SphereField::single(m0).unwrap();
        let orth = SchemeConfig::new(Scheme::EulerFwd).with_generator(GeneratorVariant::Orthogonal);
        let rec = RecordOptions { stride: usize::MAX, energy: true };
        for c in [orth, cor()] {
            let tr = integrate_with(&m, 500.0, 0.1, &c, &sys, &rec).unwrap();
            assert!(tr.max_energy_error().unwrap() <= 1e-10, "{}", c.label());
        }
        // The two updates coincide step for step while σ stays zero.
        let a = integrate_final(&m, 5.0, 0.1, &orth, &sys).unwrap().points()[0];
        let b = integrate_final(&m, 5.0, 0.1, &cor(), &sys).unwrap().points()[0];
        assert!((a - b).max_abs() < 1e-12);
    }
}

#[test]
fn cayley_on_axisymmetric_bodies_keeps_the_orbit_but_not_the_clock() {
    let (i, m0) = random_instance(BodyKind::Axisymmetric, 3);
    let sys = RigidBody::new(i);
    let m = SphereField::single(m0).unwrap();
    let rec = RecordOptions { stride: 1, energy: false };
    let exact = integrate_with(&m, 20.0, 0.5, &cor().with_exp(ExpChoice::Exp), &sys, &rec).unwrap();
    let cay = integrate_with(&m, 20.0, 0.5, &cor(), &sys, &rec).unwrap();
    let e0 = energy(m0, &i);
    let mut phase: f64 = 0.0;
    for (p, q) in exact.states.iter().zip(&cay.states) {
        let (p, q) = (p.points()[0], q.points()[0]);
        // The orbit is the circle of constant m₃ on the unit sphere.
        assert!((q.z - m0.z).abs() < 1e-13);
        assert!((energy(q, &i) - e0).abs() < 1e-13);
        phase = phase.max((p - q).norm());
    }
    assert!(phase > 1e-3, "phase error {phase:e}");
}

#[test]
fn curvature_sigma_on_latitude_circles() {
    let i = InertiaTensor::new(1.0, 1.0, 2.0).unwrap();
    let sys = RigidBody::new(i);
    for theta in [0.3f64, 0.9, 1.4, 2.0, 2.8] {
        let m = Vec3::new(theta.sin(), 0.0, theta.cos());
        let a = i.inv_apply(m);
        let x = m.cross(a).norm();
        let sigma = curvature_sigma(m, &i);
        assert!((sigma.abs() / x - (1.0 / theta.tan()).abs()).abs() < 1e-12, "theta {theta}");

        // The one-sided stencil converges to it; on these symmetric orbits
        // the leading error term cancels.
        let f = SphereField::single(m).unwrap();
        let gen = GeneratorEvaluator::new(&sys, GeneratorVariant::Default, SigmaPolicy::Zero);
        let err = |dt: f64| {
            (geodesic_curvature_sigma_with(&gen, &f, dt, CurvatureStencil::Forward).unwrap()[0] - sigma).abs()
        };
        assert!(err(5e-4) < err(1e-3) / 1.9, "theta {theta}");
    }
}

#[test]
fn forward_curvature_stencil_converges_on_triaxial_bodies() {
    for seed in 0..10 {
        let (i, m0) = random_instance(BodyKind::Triaxial, seed);
        let sys = RigidBody::new(i);
        let f = SphereField::single(m0).unwrap();
        let gen = GeneratorEvaluator::new(&sys, GeneratorVariant::Default, SigmaPolicy::Zero);
        let exact = curvature_sigma(m0, &i);
        let err = |dt: f64| {
            (geodesic_curvature_sigma_with(&gen, &f, dt, CurvatureStencil::Forward).unwrap()[0] - exact).abs()
        };
        // At least first order; on the rigid body the O(Δt) term of the
        // forward difference drops out of the projection.
        let ratio = err(1e-2) / err(5e-3);
        assert!(ratio >= 1.9, "seed {seed}: ratio {ratio}");
    }
}
