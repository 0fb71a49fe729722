mod common;

use common::fd_demag_x;
use geomint::integrators::{integrate_with, step_euler_impl, ImplicitOptions, RecordOptions, Scheme, SchemeConfig};
use geomint::llg::{demag_field_1d, free_energy, llg_generator, InitialProfile, Llg, LlgParams, SpinChain};
use geomint::sphere::{apply_update, GeneratorEvaluator, GeneratorVariant, SigmaPolicy};
use geomint::{ExpChoice, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if let Some(u) = v.normalized() {
            if v.norm() > 0.1 {
                return u;
            }
        }
    }
}

fn demag_mismatch(m: &[Vec3], spacing: f64) -> f64 {
    let fd = fd_demag_x(m, spacing, 10, 1.0);
    let closed = demag_field_1d(m);
    let scale = closed.vectors.iter().map(|v| v.x.abs()).fold(0.0, f64::max).max(1e-300);
    fd.iter().zip(&closed.vectors).map(|(a, b)| (a - b.x).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn demag_uniform_slab_matches_oracle() {
    let m = vec![Vec3::X; 100];
    let fd = fd_demag_x(&m, 1.0 / 99.0, 10, 1.0);
    assert!(fd.iter().all(|h| (h + 1.0).abs() < 0.02));
    assert!(demag_field_1d(&m).vectors.iter().all(|v| *v == Vec3::new(-1.0, 0.0, 0.0)));
}

#[test]
fn demag_in_plane_chain_is_zero_for_both() {
    let m: Vec<Vec3> = (0..20).map(|j| Vec3::new(0.0, (j as f64).cos(), (j as f64).sin())).collect();
    let fd = fd_demag_x(&m, 0.1, 10, 1.0);
    assert!(fd.iter().all(|h| h.abs() < 1e-12));
}

#[test]
fn demag_profiles_and_random_chains_match_oracle() {
    for seed in 0..5 {
        let p = InitialProfile { seed, ..InitialProfile::default() };
        let m = p.points(100);
        for spacing in [1.0 / 99.0, 1.0] {
            assert!(demag_mismatch(&m, spacing) < 0.02, "profile seed {seed}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [2, 3, 17, 100] {
        let m: Vec<Vec3> = (0..n).map(|_| random_unit(&mut rng)).collect();
        assert!(demag_mismatch(&m, 0.5) < 0.02, "random chain of {n}");
    }
}

#[test]
fn implicit_euler_satisfies_its_defining_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = LlgParams::default();
    for _ in 0..20 {
        let pts: Vec<Vec3> = (0..30).map(|_| random_unit(&mut rng)).collect();
        let chain = SpinChain::with_spacing(pts, 1.0).unwrap();
        let sys = Llg::for_chain(params, &chain).unwrap();
        let gen = GeneratorEvaluator::new(&sys, GeneratorVariant::Default, SigmaPolicy::Zero);
        let dt = 0.01;
        let next = step_euler_impl(chain.field(), dt, &gen, ExpChoice::Cay, &ImplicitOptions::default()).unwrap();
        // ξ* = A(M⁺) up to the solver tolerance, so M⁺ = Exp(Δt A(M⁺)) M.
        let xi = llg_generator(next.points(), &params, 1.0);
        let again = apply_update(chain.field(), &xi.scaled(dt), ExpChoice::Cay).unwrap();
        let gap = again.points().iter().zip(next.points()).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-12, "gap {gap:e}");
    }
}

#[test]
fn free_energy_does_not_increase_along_small_steps() {
    let params = LlgParams { lambda: 0.5, ..LlgParams::default() };
    let chain = InitialProfile::default().chain(50, 1.0).unwrap();
    let sys = Llg::for_chain(params, &chain).unwrap();
    for scheme in [Scheme::Heun, Scheme::Rkmk4] {
        let tr = integrate_with(chain.field(), 1.0, 1e-3, &SchemeConfig::new(scheme), &sys, &RecordOptions::default())
            .unwrap();
        let e = tr.energy.as_ref().unwrap();
        let worst = e.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= 1e-8, "{scheme}: energy rose by {worst:e}");
        assert!(e.last().unwrap() < &e[0]);
        assert!((e[0] - free_energy(chain.points(), &params, 1.0)).abs() < 1e-12);
    }
}

#[test]
fn classical_euler_grows_the_norm_monotonically() {
    let params = LlgParams { lambda: 3.0, precession: false, ..LlgParams::default() };
    let chain = InitialProfile { tilt: 2.2, amplitude: 0.05, ..InitialProfile::default() }.chain(100, 1.0).unwrap();
    let sys = Llg::for_chain(params, &chain).unwrap();
    let rec = RecordOptions { stride: usize::MAX, energy: false };
    let tr = integrate_with(chain.field(), 0.2, 1e-4, &SchemeConfig::new(Scheme::ClassicalEuler), &sys, &rec).unwrap();
    assert!(tr.norm_deviation.windows(2).all(|w| w[1] >= w[0]));
    assert!(tr.last().points().iter().all(|p| p.norm() > 1.0));
}

#[test]
fn geometric_schemes_keep_unit_norms_on_the_chain() {
    let chain = InitialProfile::default().chain(100, 1.0).unwrap();
    let sys = Llg::for_chain(LlgParams::default(), &chain).unwrap();
    let rec = RecordOptions { stride: usize::MAX, energy: false };
    for scheme in [Scheme::EulerFwd, Scheme::EulerImpl, Scheme::Heun, Scheme::Rkmk4] {
        let tr = integrate_with(chain.field(), 10.0, 0.01, &SchemeConfig::new(scheme), &sys, &rec).unwrap();
        assert!(tr.max_norm_deviation() <= 1e-13, "{scheme}: {:e}", tr.max_norm_deviation());
    }
}
