use ndarray::Array2;
use openbath_core::damped_oscillator::{gibbs_params, sample_valid_params, Constants};
use openbath_core::lindblad_core::{
    cptp_check, fock_operators, lift_environment, lift_system, lindblad_generator, partial_trace_operator, project_p0,
    propagator_matrix, sns_generator, stationary_state, Dims, JumpTerm, Operator, Subsystem, C64,
};
use openbath_core::linear_example::{
    effective_coefficients, linear_couplings, linear_model_sectors, system_hamiltonian, BathCoupling, LinearModelSpec,
};
use openbath_core::weak_coupling::{frequency_sectors, rwa_master_equation, CouplingTerm};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> Operator {
    let m = Array2::from_shape_fn((d, d), |_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    Operator::from_array(m).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Operator {
    let a = random_matrix(rng, d);
    (&a + &a.dagger()).scale_re(0.5)
}

fn diff(a: &Operator, b: &Operator) -> f64 {
    (a - b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_returns_eigenpairs(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, d);
        let (vals, u) = h.eigh().unwrap();
        for k in 0..d {
            let col = u.column(k).to_owned();
            let r = h.as_array().dot(&col) - col.mapv(|z| z * vals[k]);
            prop_assert!(r.iter().all(|z| z.norm() < 1e-10 * h.max_abs()));
        }
    }

    #[test]
    fn partial_trace_of_products(seed in any::<u64>(), ds in 1usize..4, de in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_matrix(&mut rng, ds), random_matrix(&mut rng, de));
        let ab = a.kron(&b);
        let dims = Dims::new(ds, de);
        let sys = partial_trace_operator(&ab, dims, Subsystem::System).unwrap();
        let env = partial_trace_operator(&ab, dims, Subsystem::Environment).unwrap();
        prop_assert!(diff(&sys, &a.scale(b.trace())) < 1e-10);
        prop_assert!(diff(&env, &b.scale(a.trace())) < 1e-10);
    }

    #[test]
    fn p0_is_a_projection_annihilating_environment_dynamics(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_valid_params(&mut rng);
        let (ds, de) = (2, 4);
        let l_e = sns_generator(&p, de).unwrap();
        let rho_t = stationary_state(&l_e).unwrap();
        let dims = Dims::new(ds, de);
        let x = random_matrix(&mut rng, ds * de);
        let once = project_p0(&x, &rho_t, dims).unwrap();
        let twice = project_p0(&once, &rho_t, dims).unwrap();
        prop_assert!(diff(&once, &twice) < 1e-10 * x.max_abs());
        let moved = lift_environment(&l_e, ds).apply(&x).unwrap();
        prop_assert!(project_p0(&moved, &rho_t, dims).unwrap().max_abs() < 1e-10 * x.max_abs() * l_e.matrix().max_abs());
        // the asymptotic state is stationary, so P₀ also kills the lifted generator applied after P₀
        let after = lift_environment(&l_e, ds).apply(&once).unwrap();
        prop_assert!(after.max_abs() < 1e-9 * x.max_abs() * l_e.matrix().max_abs());
    }

    #[test]
    fn lifted_generators_commute(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ds, de) = (2, 3);
        let l_s = sns_generator(&sample_valid_params(&mut rng), ds).unwrap();
        let l_e = sns_generator(&sample_valid_params(&mut rng), de).unwrap();
        let (a, b) = (lift_system(&l_s, de), lift_environment(&l_e, ds));
        let x = random_matrix(&mut rng, ds * de);
        let ab = a.apply(&b.apply(&x).unwrap()).unwrap();
        let ba = b.apply(&a.apply(&x).unwrap()).unwrap();
        prop_assert!(diff(&ab, &ba) < 1e-10 * ab.max_abs().max(1.0));
    }

    #[test]
    fn dual_pairs_traces(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 5;
        let l = sns_generator(&sample_valid_params(&mut rng), d).unwrap();
        let (rho, o) = (random_matrix(&mut rng, d), random_matrix(&mut rng, d));
        let lhs = l.apply(&rho).unwrap().trace_product(&o);
        let rhs = rho.trace_product(&l.dual().apply(&o).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn sectors_resolve_the_coupling(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, v) = (random_hermitian(&mut rng, d), random_hermitian(&mut rng, d));
        let sectors = frequency_sectors(&h, &v, None, 1.0).unwrap();
        let total = sectors.iter().fold(Operator::zeros(d), |acc, s| &acc + &s.v_sector);
        prop_assert!(diff(&total, &v) < 1e-10 * v.max_abs());
        for s in &sectors {
            // [H, V_Δω] = ħΔω V_Δω
            let lhs = h.commutator(&s.v_sector);
            let err = diff(&lhs, &s.v_sector.scale_re(s.delta_omega));
            prop_assert!(err < 1e-9 * v.max_abs() * h.max_abs().max(1.0), "err {err} dw {} sectors {}", s.delta_omega, sectors.len());
            if s.delta_omega != 0.0 {
                let partner = sectors.iter().find(|o| (o.delta_omega + s.delta_omega).abs() < 1e-9).unwrap();
                prop_assert!(diff(&partner.v_sector, &s.v_sector.dagger()) < 1e-10 * v.max_abs());
            }
        }
    }

    #[test]
    fn rwa_propagators_are_cptp(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        let h = random_hermitian(&mut rng, d);
        let term = CouplingTerm::new(random_hermitian(&mut rng, d).scale_re(0.2), sample_valid_params(&mut rng)).unwrap();
        let (_, l) = rwa_master_equation(&h, &[term], None, 1.0).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let r = cptp_check(&propagator_matrix(&l, t).unwrap(), 1e-8).unwrap();
            prop_assert!(r.is_cp && r.is_tp, "{r:?}");
        }
    }
}

#[test]
fn sns_propagator_is_cptp_beyond_two_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let l = sns_generator(&sample_valid_params(&mut rng), 6).unwrap();
        for t in [0.5, 5.0] {
            let r = cptp_check(&propagator_matrix(&l, t).unwrap(), 1e-8).unwrap();
            assert!(r.is_cp && r.is_tp, "{r:?}");
        }
    }
}

#[test]
fn sns_stationary_state_is_a_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = stationary_state(&sns_generator(&sample_valid_params(&mut rng), 12).unwrap()).unwrap();
    let ev = rho.eigenvalues().unwrap();
    assert!(ev[0] > -1e-10);
    assert!((rho.operator().trace().re - 1.0).abs() < 1e-12);
}

fn linear_spec() -> LinearModelSpec<f64> {
    let k = Constants::default();
    let bath = [(0.8, 0.2, 0.3), (1.3, 0.1, -0.2)]
        .iter()
        .map(|&(w, l, c)| BathCoupling { c, mode: gibbs_params(1.1, w, l, 0.0, 0.9, k).unwrap() })
        .collect();
    LinearModelSpec { m_s: 0.7, omega_s: 1.0, bath }
}

#[test]
fn generic_sectors_match_the_ladder_sectors() {
    let spec = linear_spec();
    let d = 8;
    let h = system_hamiltonian(&spec, d).unwrap();
    let specialised = linear_model_sectors(&spec, d).unwrap();
    for (term, [down, up]) in linear_couplings(&spec, d).unwrap().iter().zip(&specialised) {
        let generic = frequency_sectors(&h, &term.v, None, 1.0).unwrap();
        assert_eq!(generic.len(), 2);
        assert!((generic[0].delta_omega - down.delta_omega).abs() < 1e-12);
        assert!((generic[1].delta_omega - up.delta_omega).abs() < 1e-12);
        assert!(diff(&generic[0].v_sector, &down.v_sector) < 1e-12);
        assert!(diff(&generic[1].v_sector, &up.v_sector) < 1e-12);
    }
}

#[test]
fn rwa_generator_is_the_effective_damped_oscillator() {
    let spec = linear_spec();
    let d = 10;
    let eff = effective_coefficients(&spec).unwrap();
    let (m, w) = (spec.m_s, spec.omega_s);
    let (_, rwa) = rwa_master_equation(&system_hamiltonian(&spec, d).unwrap(), &linear_couplings(&spec, d).unwrap(), None, 1.0)
        .unwrap();
    let f = fock_operators(d, m, w, Constants::default()).unwrap();
    let diffusive = 2.0 * eff.d_pp_eff / (m * w);
    let h_eff = &f.number.scale_re(w + eff.delta_omega_s) + &Operator::identity(d).scale_re(0.5 * (w + eff.delta_omega_s) + eff.delta_e);
    let jumps = [
        JumpTerm { operator: f.a.clone(), rate: eff.lambda_eff + diffusive },
        JumpTerm { operator: f.a_dagger.clone(), rate: -eff.lambda_eff + diffusive },
    ];
    let reference = lindblad_generator(&h_eff, &jumps, 1.0).unwrap();
    let shifted = lindblad_generator(&(&h_eff + &Operator::identity(d).scale_re(3.0)), &jumps, 1.0).unwrap();
    let scale = reference.matrix().max_abs();
    for i in 0..d - 2 {
        for j in 0..d - 2 {
            let mut e = vec![C64::new(0.0, 0.0); d];
            let mut g = e.clone();
            e[i] = C64::new(1.0, 0.0);
            g[j] = C64::new(1.0, 0.0);
            let x = Operator::outer(&e, &g);
            let r = reference.apply(&x).unwrap();
            assert!(diff(&rwa.apply(&x).unwrap(), &r) < 1e-10 * scale, "({i}, {j})");
            assert!(diff(&shifted.apply(&x).unwrap(), &r) < 1e-12 * scale);
        }
    }
}

#[test]
fn uncoupled_mode_contributes_nothing() {
    let mut spec = linear_spec();
    spec.bath[1].c = 0.0;
    let both = effective_coefficients(&spec).unwrap();
    spec.bath.truncate(1);
    let one = effective_coefficients(&spec).unwrap();
    assert_eq!(both, one);
}
