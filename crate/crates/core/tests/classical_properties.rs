use openbath_core::classical_bath::{
    ensemble_statistics, markov_kernel, markov_langevin, mode_kernel, simulate_composite_langevin, BathInit,
    ClassicalBathMode, ClassicalSystemSpec, LangevinRun, Potential, StatisticsOptions,
};

fn oscillator(x0: f64) -> ClassicalSystemSpec {
    ClassicalSystemSpec { m: 1.0, potential: Potential::Harmonic { stiffness: 1.0 }, x0, v0: 0.0 }
}

fn run(temperature: f64, dt: f64, t_end: f64, n_traj: usize) -> LangevinRun {
    LangevinRun { temperature, dt, t_end, n_traj, seed: 21, record_every: 5, bath_init: BathInit::Rest }
}

#[test]
fn velocity_equipartition_in_a_quartic_well() {
    let system = ClassicalSystemSpec { m: 1.5, potential: Potential::Quartic { a: -1.0, b: 0.5 }, x0: 1.4, v0: 0.0 };
    let bath = [ClassicalBathMode::linear(1.0, 5.0, 2.0, 0.6)];
    let kt = 0.8;
    let opts = StatisticsOptions { discard: 10.0, max_lag: 0.0 };
    let r = run(kt, 0.005, 40.0, 400);
    let comp = ensemble_statistics(&simulate_composite_langevin(&system, &bath, &r).unwrap(), None, &opts).unwrap();
    let eta = markov_kernel(&bath, 0.0, 0.0);
    let mark = ensemble_statistics(&markov_langevin(&system, eta, &r).unwrap(), None, &opts).unwrap();
    for m in [comp.moments, mark.moments] {
        assert!((m.v2.mean - kt / system.m).abs() <= 3.0 * m.v2.err, "{:?}", m.v2);
        // symmetric double well
        assert!(m.x.mean.abs() <= 3.0 * m.x.err + 0.05);
    }
}

#[test]
fn effective_noise_carries_the_memory_kernel() {
    let bath = [ClassicalBathMode::linear(1.0, 3.0, 1.0, 0.7)];
    let kt = 1.2;
    let r = LangevinRun { record_every: 2, ..run(kt, 0.005, 30.0, 300) };
    let ens = simulate_composite_langevin(&oscillator(0.5), &bath, &r).unwrap();
    let stats =
        ensemble_statistics(&ens, Some(&bath), &StatisticsOptions { discard: 10.0, max_lag: 3.0 }).unwrap();
    let noise = stats.noise_correlation.unwrap();
    let b = &bath[0];
    let c2 = 0.49;
    let mut worst: f64 = 0.0;
    for (tau, e) in stats.lags.iter().zip(&noise) {
        let target = kt * c2 * mode_kernel(b.m, b.omega, b.gamma, *tau);
        worst = worst.max((e.mean - target).abs() / e.err);
    }
    assert!(worst < 4.0, "worst deviation {worst}σ");
}

#[test]
fn memory_fades_as_the_bath_speeds_up() {
    // fixed η̄ = 2mγc², ω = 2γ: the kernel narrows towards η̄δ(τ)
    let system = oscillator(1.0);
    let eta_bar = 0.4;
    let mut prev = f64::INFINITY;
    for gamma in [1.0f64, 2.0, 4.0, 8.0] {
        let c = (eta_bar / (2.0 * gamma)).sqrt();
        let bath = [ClassicalBathMode::linear(1.0, 2.0 * gamma, gamma, c)];
        let r = LangevinRun { record_every: 1, ..run(0.0, 0.002, 20.0, 1) };
        let comp = simulate_composite_langevin(&system, &bath, &r).unwrap();
        let mark = markov_langevin(&system, eta_bar, &r).unwrap();
        let (a, b) = (&comp.trajectories[0].x, &mark.trajectories[0].x);
        let gap = a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(gap < prev, "γ = {gamma}: gap {gap} not below {prev}");
        prev = gap;
    }
    assert!(prev < 0.05);
}

#[test]
fn ensembles_do_not_depend_on_the_thread_count() {
    let bath = [ClassicalBathMode::linear(1.0, 4.0, 2.0, 0.5)];
    let r = run(1.0, 0.01, 5.0, 16);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| simulate_composite_langevin(&oscillator(1.0), &bath, &r).unwrap());
    let b = parallel.install(|| simulate_composite_langevin(&oscillator(1.0), &bath, &r).unwrap());
    assert_eq!(a, b);
    let c = simulate_composite_langevin(&oscillator(1.0), &bath, &LangevinRun { seed: 22, ..r }).unwrap();
    assert_ne!(a.trajectories[0].x, c.trajectories[0].x);
}

#[test]
fn markov_run_at_zero_temperature_is_deterministic_decay() {
    let r = LangevinRun { record_every: 1, ..run(0.0, 0.001, 10.0, 2) };
    let ens = markov_langevin(&oscillator(1.0), 0.4, &r).unwrap();
    assert_eq!(ens.trajectories[0], ens.trajectories[1]);
    // underdamped x(t) = e^{−γt}(cos Ωt + (γ/Ω) sin Ωt) with γ = η̄/2m
    let (g, w) = (0.2, (1.0f64 - 0.04).sqrt());
    for (t, x) in ens.times.iter().zip(&ens.trajectories[0].x) {
        let exact = (-g * t).exp() * ((w * t).cos() + g / w * (w * t).sin());
        assert!((x - exact).abs() < 1e-3, "t {t}: {x} vs {exact}");
    }
}
