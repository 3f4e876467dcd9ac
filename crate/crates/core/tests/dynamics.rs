//! Cross-module checks: the propagator against the lattice spectrum, the
//! memory kernel and semiclassical kinematics.

use std::f64::consts::PI;

use stark_qed_core::kernel_dde::{kernel_exact, KernelSpec};
use stark_qed_core::lattice::wrap_to_fbz;
use stark_qed_core::propagator::{
    fit_decay_rate, propagate, propagate_observed, to_momentum, EigenPropagator, MomentumTransform,
};
use stark_qed_core::semiclassics::Trajectory;
use stark_qed_core::{
    build_hamiltonian, DerivedScales, LatticeSpec, Method, PropagationOptions, QubitSpec, SingleExcitationState, C64,
};

fn unguarded(t_max: f64, dt: f64, method: Method) -> PropagationOptions {
    let mut o = PropagationOptions::new(t_max, dt, method);
    o.edge_guard = None;
    o
}

#[test]
fn field_spectrum_is_the_wannier_stark_ladder() {
    let lat = LatticeSpec { hopping: 1.0, force: 0.2, sites: 201, qubit_site: 0 };
    let qb = QubitSpec { omega0: 0.37, coupling: 0.0 };
    let h = build_hamiltonian(&lat, &qb).unwrap();
    let eig = EigenPropagator::new(&h);
    let values: Vec<f64> = eig.eigenvalues().iter().copied().collect();
    // modes far from the truncation edges, xi = 10
    for n in -50..=50 {
        let target = n as f64 * lat.force;
        let nearest = values.iter().map(|v| (v - target).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-10, "rung {n}: {nearest:e}");
    }
    assert!(values.iter().any(|v| (v - qb.omega0).abs() < 1e-14));
}

/// `alpha' = -g^2 int_0^t K(tau) alpha(t - tau) d tau` on a trapezoid grid.
fn volterra(spec: &KernelSpec, g: f64, t_max: f64, h: f64) -> Vec<C64> {
    let n = (t_max / h).round() as usize;
    let k: Vec<C64> = (0..=n).map(|i| kernel_exact(spec, i as f64 * h).unwrap().closed).collect();
    let mut a = vec![C64::new(1.0, 0.0)];
    let memory = |a: &[C64], i: usize| -> C64 {
        if i == 0 {
            return C64::new(0.0, 0.0);
        }
        let mut s = (k[0] * a[i] + k[i] * a[0]) * 0.5;
        for j in 1..i {
            s += k[j] * a[i - j];
        }
        s * h
    };
    // Heun step, memory frozen to the trapezoid sum of known values
    for i in 0..n {
        let f0 = -g * g * memory(&a, i);
        a.push(a[i] + f0 * h);
        let f1 = -g * g * memory(&a, i + 1);
        a[i + 1] = a[i] + (f0 + f1) * (h / 2.0);
    }
    a
}

#[test]
fn propagation_solves_the_kernel_equation() {
    // the kernel acts on alpha in the frame rotating at omega0
    for omega0 in [0.0, 0.3] {
        let lat = LatticeSpec { hopping: 1.0, force: 0.5, sites: 121, qubit_site: 0 };
        let qb = QubitSpec { omega0, coupling: 0.1 };
        let spec = KernelSpec::from_parameters(&lat, &qb).unwrap();
        let (t_max, h) = (30.0, 0.01);
        let reference = volterra(&spec, qb.coupling, t_max, h);
        let series = propagate(&lat, &qb, &unguarded(t_max, 0.5, Method::Chebyshev)).unwrap();
        for (i, s) in series.samples().iter().enumerate() {
            let t = i as f64 * 0.5;
            let rotated = s.alpha_e() * C64::from_polar(1.0, omega0 * t);
            let r = reference[i * 50];
            assert!((rotated - r).norm() < 1e-4, "omega0 = {omega0}, t = {t}: {rotated} vs {r}");
        }
    }
}

#[test]
fn wavepacket_follows_the_semiclassical_trajectory() {
    let lat = LatticeSpec { hopping: 1.0, force: 0.02, sites: 601, qubit_site: 0 };
    let qb = QubitSpec { omega0: 0.0, coupling: 0.0 };
    let (k_i, x_i, width) = (0.7, -40.0, 25.0);
    let beta: Vec<C64> = lat
        .labels()
        .map(|m| {
            let d = (m as f64 - x_i) / width;
            C64::from_polar((-d * d / 2.0).exp(), k_i * m as f64)
        })
        .collect();
    let norm = beta.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    let beta: Vec<C64> = beta.iter().map(|b| b / norm).collect();
    let initial = SingleExcitationState::from_parts(C64::new(0.0, 0.0), &beta);

    let traj = Trajectory::new(lat.hopping, lat.force, 0.0, k_i, x_i).unwrap();
    let h = build_hamiltonian(&lat, &qb).unwrap();
    let transform = MomentumTransform::new(lat.sites);
    let opts = unguarded(traj.t_bloch(), traj.t_bloch() / 100.0, Method::Chebyshev);
    let mut worst_x = 0.0f64;
    let mut worst_k = 0.0f64;
    propagate_observed(&h, initial, &opts, |t, s| {
        let x: f64 = lat.labels().zip(s.beta()).map(|(m, b)| m as f64 * b.norm_sqr()).sum();
        worst_x = worst_x.max((x - traj.x_at(t)).abs());
        let frame = transform.frame(s, t);
        worst_k = worst_k.max(wrap_to_fbz(frame.k[frame.peak_index()] - traj.k_at(t)).abs());
        Ok(())
    })
    .unwrap();
    // broad packet: the centroid tracks x(t) up to curvature corrections
    assert!(worst_x < 1.5, "centroid off by {worst_x}");
    assert!(worst_k <= 2.0 * PI / lat.sites as f64 + 1e-12, "momentum peak off by {worst_k}");
}

#[test]
fn markovian_decay_without_force() {
    let lat = LatticeSpec { hopping: 1.0, force: 0.0, sites: LatticeSpec::auto_sites(1.0, 0.0, 40.0), qubit_site: 0 };
    let qb = QubitSpec { omega0: 0.0, coupling: 0.2 };
    let series = propagate(&lat, &qb, &PropagationOptions::new(40.0, 0.5, Method::Chebyshev)).unwrap();
    let pop = series.map(|s| s.qubit_population());
    let fit = fit_decay_rate(&pop, (5.0, 40.0)).unwrap();
    let gamma = DerivedScales::new(&lat, &qb).gamma;
    assert!(((fit.gamma - gamma) / gamma).abs() < 0.03, "{} vs {gamma}", fit.gamma);
    // the momentum transform keeps the field population
    let last = series.samples().last().unwrap();
    let k = to_momentum(last, 40.0);
    assert!((k.population() + last.qubit_population() - 1.0).abs() < 1e-10);
}

#[test]
fn methods_agree_with_an_offset_qubit() {
    let lat = LatticeSpec { hopping: 1.0, force: 0.1, sites: 151, qubit_site: -9 };
    let qb = QubitSpec { omega0: -0.8, coupling: 0.3 };
    let a = propagate(&lat, &qb, &unguarded(120.0, 3.0, Method::Eigen)).unwrap();
    let b = propagate(&lat, &qb, &unguarded(120.0, 3.0, Method::Chebyshev)).unwrap();
    for (x, y) in a.samples().iter().zip(b.samples()) {
        for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
            assert!((p - q).norm() < 1e-9);
        }
    }
}
