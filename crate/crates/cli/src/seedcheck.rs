//! Fast invariant self-test run by `--seedcheck`.

use std::f64::consts::PI;

use stark_qed_core::kernel_dde::{build_comb, kernel_exact, solve_dde, KernelSpec};
use stark_qed_core::propagator::{propagate, to_momentum};
use stark_qed_core::specfun::bessel_j;
use stark_qed_core::{build_hamiltonian, LatticeSpec, Method, PropagationOptions, QubitSpec, WannierStarkMode};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> Check {
    Check { name, pass: value <= limit, detail: format!("{value:.3e} (limit {limit:.0e})") }
}

pub fn run() -> Vec<Check> {
    let mut out = Vec::new();

    let mut norm_err = 0.0f64;
    let mut parity_err = 0.0f64;
    let mut recur_err = 0.0f64;
    for x in [0.1, 1.0, 4.0, 15.0, 100.0] {
        let m = (x + 40.0) as i32;
        let s: f64 = (-m..=m).map(|n| bessel_j(n, x).map(|v| v * v).unwrap_or(f64::NAN)).sum();
        norm_err = norm_err.max((s - 1.0).abs());
        for n in 1..50 {
            let (a, b) = (bessel_j(n, x).unwrap_or(f64::NAN), bessel_j(-n, x).unwrap_or(f64::NAN));
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            parity_err = parity_err.max((b - sign * a).abs());
            let (lo, hi) = (bessel_j(n - 1, x).unwrap_or(f64::NAN), bessel_j(n + 1, x).unwrap_or(f64::NAN));
            let scale = lo.abs().max(hi.abs()).max(a.abs());
            recur_err = recur_err.max((lo + hi - 2.0 * n as f64 / x * a).abs() / scale);
        }
    }
    out.push(check("bessel normalization", norm_err, 1e-12));
    out.push(check("bessel parity", parity_err, 0.0));
    out.push(check("bessel recurrence", recur_err, 1e-10));

    let lat = LatticeSpec { hopping: 1.0, force: 0.05, sites: 101, qubit_site: 0 };
    let qb = QubitSpec { omega0: 0.3, coupling: 0.2 };
    out.push(match build_hamiltonian(&lat, &qb).and_then(|h| h.check_hermitian()) {
        Ok(()) => Check { name: "hamiltonian hermitian", pass: true, detail: "exact".into() },
        Err(e) => Check { name: "hamiltonian hermitian", pass: false, detail: e.to_string() },
    });

    let modes: Vec<f64> = [-3i64, 0, 5]
        .iter()
        .map(|&n| WannierStarkMode::new(&lat, n, 60).map(|m| (m.centroid() - n as f64).abs()).unwrap_or(f64::NAN))
        .collect();
    out.push(check("wannier-stark centroid", modes.iter().cloned().fold(0.0, f64::max), 1e-8));

    let opts = |m| {
        let mut o = PropagationOptions::new(40.0, 2.0, m);
        o.edge_guard = None;
        o
    };
    match (propagate(&lat, &qb, &opts(Method::Eigen)), propagate(&lat, &qb, &opts(Method::Chebyshev))) {
        (Ok(a), Ok(b)) => {
            let mut diff = 0.0f64;
            let mut drift = 0.0f64;
            let mut unitarity = 0.0f64;
            for (x, y) in a.samples().iter().zip(b.samples()) {
                for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
                    diff = diff.max((p - q).norm());
                }
                drift = drift.max((y.norm_sqr() - 1.0).abs());
                unitarity = unitarity.max((to_momentum(y, 0.0).population() - y.field_population()).abs());
            }
            out.push(check("eigen vs chebyshev", diff, 1e-8));
            out.push(check("norm drift", drift, 1e-10));
            out.push(check("momentum unitarity", unitarity, 1e-10));
        }
        (Err(e), _) | (_, Err(e)) => {
            out.push(Check { name: "propagation", pass: false, detail: e.to_string() });
        }
    }

    let kernel = KernelSpec::new(4.0, 4.0 * PI, 0.0).and_then(|spec| {
        (0..200).try_fold(0.0f64, |m, i| {
            let k = kernel_exact(&spec, 0.0731 * i as f64)?;
            Ok(m.max((k.series - k.closed).norm()))
        })
    });
    out.push(match kernel {
        Ok(v) => check("kernel identity", v, 1e-10),
        Err(e) => Check { name: "kernel identity", pass: false, detail: e.to_string() },
    });

    let dde_lat = LatticeSpec { hopping: 1.0, force: 1e-3, sites: 101, qubit_site: 0 };
    let dde = build_comb(&dde_lat, &QubitSpec { omega0: 0.0, coupling: 0.2 })
        .and_then(|c| solve_dde(&c, 3.0 * c.t_bloch, 50.0))
        .map(|s| (1..s.intervals.len()).filter_map(|l| s.continuity_gap(l)).map(|g| g.norm()).fold(0.0, f64::max));
    out.push(match dde {
        Ok(v) => check("delay-equation continuity", v, 1e-10),
        Err(e) => Check { name: "delay-equation continuity", pass: false, detail: e.to_string() },
    });
    out
}
