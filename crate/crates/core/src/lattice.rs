//! Physical parameters, derived scales and the single-excitation Hamiltonian.
//!
//! The single-excitation basis is ordered `{|e>, |n_min>, ..., |n_max>}` with
//! cavity labels `n` symmetric about zero: `n = -(N-1)/2, ..., (N-1)/2`.
//! Boundaries are open (hard wall).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::specfun::{bessel_j, bessel_row};
use crate::{Error, Result, C64};

/// Coupled-cavity array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Nearest-neighbour hopping rate `J > 0`.
    pub hopping: f64,
    /// Force `F >= 0`: cavity `n` has frequency `n F`.
    pub force: f64,
    /// Number of cavities `N` (odd, at least 3).
    pub sites: usize,
    /// Label of the cavity the qubit couples to.
    pub qubit_site: i64,
}

/// Two-level emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    /// Transition frequency `omega0`.
    pub omega0: f64,
    /// Qubit-cavity coupling `g`. Zero is accepted (decoupled qubit).
    pub coupling: f64,
}

impl LatticeSpec {
    pub fn new(hopping: f64, force: f64, sites: usize, qubit_site: i64) -> Result<Self> {
        let spec = LatticeSpec { hopping, force, sites, qubit_site };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return Err(Error::Config(format!("hopping J must be positive, got {}", self.hopping)));
        }
        if !(self.force >= 0.0) || !self.force.is_finite() {
            return Err(Error::Config(format!("force F must be >= 0, got {}", self.force)));
        }
        if self.sites < 3 || self.sites.is_multiple_of(2) {
            return Err(Error::Config(format!("site count N must be odd and >= 3, got {}", self.sites)));
        }
        let h = self.half_width();
        if self.qubit_site.abs() > h {
            return Err(Error::Config(format!("qubit site n0 = {} outside label range [-{h}, {h}]", self.qubit_site)));
        }
        Ok(())
    }

    /// `(N - 1) / 2`, the largest site label.
    pub fn half_width(&self) -> i64 {
        (self.sites as i64 - 1) / 2
    }

    /// Site labels in basis order.
    pub fn labels(&self) -> impl Iterator<Item = i64> {
        let h = self.half_width();
        -h..=h
    }

    /// Position of site `label` inside the field block (0-based).
    pub fn site_index(&self, label: i64) -> Option<usize> {
        let h = self.half_width();
        (label.abs() <= h).then(|| (label + h) as usize)
    }

    pub fn site_label(&self, index: usize) -> i64 {
        index as i64 - self.half_width()
    }

    /// Automatic truncation: `2 * (2 J t_max) + 200` sites for `F = 0`,
    /// `2 * (2 xi) + 200` for `F > 0`, rounded up to an odd count.
    pub fn auto_sites(hopping: f64, force: f64, t_max: f64) -> usize {
        let reach = if force > 0.0 { 2.0 * 2.0 * hopping / force } else { 2.0 * hopping * t_max };
        let n = (2.0 * reach + 200.0).ceil() as usize;
        n | 1
    }
}

/// Derived physical scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Localization length `2J/F` (infinite for `F = 0`).
    pub xi: f64,
    /// Bloch period `2 pi / F` (infinite for `F = 0`).
    pub t_bloch: f64,
    /// Markovian decay rate `g^2 / J`.
    pub gamma: f64,
    /// Characteristic mode coupling `g / sqrt(xi)`, an order-of-magnitude estimate.
    pub gbar: f64,
    /// `Gamma * T_B`.
    pub ratio: f64,
}

impl DerivedScales {
    pub fn new(lat: &LatticeSpec, qb: &QubitSpec) -> Self {
        let gamma = qb.coupling * qb.coupling / lat.hopping;
        if lat.force > 0.0 {
            let xi = 2.0 * lat.hopping / lat.force;
            let t_bloch = 2.0 * PI / lat.force;
            DerivedScales { xi, t_bloch, gamma, gbar: qb.coupling / xi.sqrt(), ratio: gamma * t_bloch }
        } else {
            DerivedScales {
                xi: f64::INFINITY,
                t_bloch: f64::INFINITY,
                gamma,
                gbar: 0.0,
                ratio: if gamma > 0.0 { f64::INFINITY } else { 0.0 },
            }
        }
    }
}

/// Photon dispersion `-2 J cos k`. Momenta outside `(-pi, pi]` are wrapped
/// first (with a logged warning).
pub fn dispersion(hopping: f64, k: f64) -> f64 {
    let wrapped = wrap_to_fbz(k);
    if wrapped != k {
        log::warn!("quasi-momentum {k} outside the first Brillouin zone, wrapped to {wrapped}");
    }
    -2.0 * hopping * wrapped.cos()
}

/// Maps `k` into `(-pi, pi]`.
pub fn wrap_to_fbz(k: f64) -> f64 {
    if k > -PI && k <= PI {
        return k;
    }
    let two_pi = 2.0 * PI;
    let mut r = k - two_pi * ((k + PI) / two_pi).floor();
    // r in [-pi, pi)
    if r <= -PI {
        r += two_pi;
    }
    r
}

/// `k0 = arccos(-omega0 / (2J))`, the positive momentum resonant with the qubit.
pub fn resonant_momentum(hopping: f64, omega0: f64) -> Result<f64> {
    if !(omega0.abs() <= 2.0 * hopping) {
        return Err(Error::OutOfBand { omega0, hopping });
    }
    Ok((-omega0 / (2.0 * hopping)).clamp(-1.0, 1.0).acos())
}

/// Coupling between the qubit and Wannier-Stark mode `n`: `g J_{n0-n}(xi)`.
pub fn coupling_mode_function(lat: &LatticeSpec, qb: &QubitSpec, n: i64) -> Result<f64> {
    if lat.force <= 0.0 {
        return Err(Error::ZeroForce("coupling-mode function"));
    }
    let xi = 2.0 * lat.hopping / lat.force;
    let order = i32::try_from(lat.qubit_site - n)
        .map_err(|_| Error::Range { what: "mode index", detail: format!("n = {n}") })?;
    Ok(qb.coupling * bessel_j(order, xi)?)
}

/// Vacuum Rabi frequency for the mode `n_c` closest to resonance:
/// `sqrt((omega0 - n_c F)^2 + 4 g^2 J_{n0-n_c}(xi)^2)`.
///
/// Meaningful in the strong-force regime only; not enforced.
pub fn rabi_frequency(lat: &LatticeSpec, qb: &QubitSpec, n_c: i64) -> Result<f64> {
    let gc = coupling_mode_function(lat, qb, n_c)?;
    let detuning = qb.omega0 - n_c as f64 * lat.force;
    Ok((detuning * detuning + 4.0 * gc * gc).sqrt())
}

/// Interaction regime from `Gamma * T_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StrongForce,
    Crossover,
    WeakForce,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::StrongForce => "strong-force",
            Regime::Crossover => "crossover",
            Regime::WeakForce => "weak-force",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub ratio: f64,
    pub regime: Regime,
}

/// `Gamma T_B < 0.1` is strong force, `> 10` weak force, crossover otherwise.
pub const STRONG_FORCE_BELOW: f64 = 0.1;
pub const WEAK_FORCE_ABOVE: f64 = 10.0;

pub fn classify_regime(lat: &LatticeSpec, qb: &QubitSpec) -> Result<RegimeReport> {
    if lat.force <= 0.0 {
        return Err(Error::ZeroForce("Bloch period"));
    }
    let ratio = DerivedScales::new(lat, qb).ratio;
    let regime = if ratio < STRONG_FORCE_BELOW {
        Regime::StrongForce
    } else if ratio > WEAK_FORCE_ABOVE {
        Regime::WeakForce
    } else {
        Regime::Crossover
    };
    Ok(RegimeReport { ratio, regime })
}

/// Eigenmode of the tilted field Hamiltonian, `<m|phi_n> = J_{m-n}(xi)`,
/// with energy `n F`, sampled on a finite window of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct WannierStarkMode {
    pub index: i64,
    pub energy: f64,
    /// Label of the first sampled site.
    pub first_site: i64,
    pub amplitudes: Vec<f64>,
}

impl WannierStarkMode {
    /// Samples mode `n` on `|m - n| <= half_window`.
    pub fn new(lat: &LatticeSpec, n: i64, half_window: i64) -> Result<Self> {
        if lat.force <= 0.0 {
            return Err(Error::ZeroForce("Wannier-Stark ladder"));
        }
        let xi = 2.0 * lat.hopping / lat.force;
        let amplitudes = bessel_row(n, xi, n - half_window, n + half_window)?;
        Ok(WannierStarkMode { index: n, energy: n as f64 * lat.force, first_site: n - half_window, amplitudes })
    }

    /// `sum_m m |<m|phi_n>|^2 / sum_m |<m|phi_n>|^2`.
    pub fn centroid(&self) -> f64 {
        let (mut w, mut s) = (0.0, 0.0);
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a * a;
            w += p * (self.first_site + i as i64) as f64;
            s += p;
        }
        w / s
    }
}

/// Single-excitation Hamiltonian in the basis `{|e>, {|n>}}`.
///
/// Storage: diagonal, the field block's super- and sub-diagonals, and the
/// single qubit row/column entry. Both triangles are stored so Hermiticity is
/// a checkable property rather than an assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    diag: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    /// Basis index (>= 1) of the cavity coupled to the qubit.
    coupled: usize,
    /// `<e|H|coupled>`
    coupling_row: f64,
    /// `<coupled|H|e>`
    coupling_col: f64,
}

/// Assembles `H = omega0 |e><e| + sum_n n F |n><n| - J sum_n (|n+1><n| + h.c.)
/// + g (|n0><e| + h.c.)` restricted to one excitation.
pub fn build_hamiltonian(lat: &LatticeSpec, qb: &QubitSpec) -> Result<HamiltonianMatrix> {
    lat.validate()?;
    if !qb.omega0.is_finite() || !qb.coupling.is_finite() || qb.coupling < 0.0 {
        return Err(Error::Config(format!("invalid qubit parameters {qb:?}")));
    }
    let n = lat.sites;
    let mut diag = Vec::with_capacity(n + 1);
    diag.push(qb.omega0);
    diag.extend(lat.labels().map(|m| m as f64 * lat.force));
    let coupled = 1 + lat
        .site_index(lat.qubit_site)
        .ok_or_else(|| Error::Config(format!("qubit site {} outside lattice", lat.qubit_site)))?;
    Ok(HamiltonianMatrix {
        diag,
        upper: vec![-lat.hopping; n - 1],
        lower: vec![-lat.hopping; n - 1],
        coupled,
        coupling_row: qb.coupling,
        coupling_col: qb.coupling,
    })
}

impl HamiltonianMatrix {
    /// `N + 1`.
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Stored entries, counting zeros that are structurally present.
    pub fn nnz(&self) -> usize {
        self.diag.len() + self.upper.len() + self.lower.len() + 2
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        if i == 0 && j == self.coupled {
            return self.coupling_row;
        }
        if j == 0 && i == self.coupled {
            return self.coupling_col;
        }
        if i >= 1 && j >= 1 {
            if j == i + 1 {
                return self.upper[i - 1];
            }
            if i == j + 1 {
                return self.lower[j - 1];
            }
        }
        0.0
    }

    /// Exact structural Hermiticity check (all entries real).
    pub fn check_hermitian(&self) -> Result<()> {
        let finite = self.diag.iter().chain(&self.upper).chain(&self.lower).all(|v| v.is_finite());
        if !finite || self.upper != self.lower || self.coupling_row != self.coupling_col {
            return Err(Error::Invariant("Hamiltonian is not Hermitian".into()));
        }
        Ok(())
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[C64], out: &mut [C64]) {
        let d = self.dim();
        debug_assert!(psi.len() == d && out.len() == d);
        out[0] = psi[0] * self.diag[0] + psi[self.coupled] * self.coupling_row;
        let f = d - 1;
        for i in 1..d {
            let mut acc = psi[i] * self.diag[i];
            if i > 1 {
                acc += psi[i - 1] * self.lower[i - 2];
            }
            if i < f {
                acc += psi[i + 1] * self.upper[i - 1];
            }
            out[i] = acc;
        }
        out[self.coupled] += psi[0] * self.coupling_col;
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let d = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..d {
            let mut r = 0.0;
            if i == 0 {
                r += self.coupling_row.abs();
            } else {
                if i > 1 {
                    r += self.lower[i - 2].abs();
                }
                if i < d - 1 {
                    r += self.upper[i - 1].abs();
                }
                if i == self.coupled {
                    r += self.coupling_col.abs();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.entry(i, j))
    }

    /// Residual `|| H_B v - e v ||` of a field-only vector `v` given on the full
    /// site range (qubit row excluded).
    pub fn field_residual(&self, v: &[f64], e: f64) -> f64 {
        let f = self.dim() - 1;
        assert_eq!(v.len(), f);
        let mut acc = 0.0;
        for i in 0..f {
            let mut hv = self.diag[i + 1] * v[i];
            if i > 0 {
                hv += self.lower[i - 1] * v[i - 1];
            }
            if i + 1 < f {
                hv += self.upper[i] * v[i + 1];
            }
            let r = hv - e * v[i];
            acc += r * r;
        }
        acc.sqrt()
    }

    #[cfg(test)]
    pub(crate) fn corrupt_for_test(&mut self) {
        self.upper[0] += 1e-3;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn lat(force: f64, sites: usize) -> LatticeSpec {
        LatticeSpec::new(1.0, force, sites, 0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(LatticeSpec::new(1.0, 0.1, 4, 0).is_err());
        assert!(LatticeSpec::new(1.0, 0.1, 1, 0).is_err());
        assert!(LatticeSpec::new(0.0, 0.1, 5, 0).is_err());
        assert!(LatticeSpec::new(1.0, -0.1, 5, 0).is_err());
        assert!(matches!(LatticeSpec::new(1.0, 0.1, 5, 3), Err(Error::Config(_))));
        let bad = LatticeSpec { hopping: 1.0, force: 0.0, sites: 5, qubit_site: 9 };
        let qb = QubitSpec { omega0: 0.0, coupling: 0.1 };
        assert!(matches!(build_hamiltonian(&bad, &qb), Err(Error::Config(_))));
    }

    #[test]
    fn three_site_matrix() {
        let h = build_hamiltonian(&lat(0.0, 3), &QubitSpec { omega0: 0.0, coupling: 0.1 }).unwrap();
        let want = [[0.0, 0.0, 0.1, 0.0], [0.0, 0.0, -1.0, 0.0], [0.1, -1.0, 0.0, -1.0], [0.0, 0.0, -1.0, 0.0]];
        let dense = h.to_dense();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(dense[(i, j)], want[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn tilted_diagonal() {
        let h = build_hamiltonian(&lat(0.5, 5), &QubitSpec { omega0: 0.3, coupling: 0.1 }).unwrap();
        assert_eq!(h.diagonal(), &[0.3, -1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(h.nnz() <= 3 * 5 + 3);
        h.check_hermitian().unwrap();
        let d = h.to_dense();
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn corrupted_matrix_detected() {
        let mut h = build_hamiltonian(&lat(0.5, 5), &QubitSpec { omega0: 0.0, coupling: 0.1 }).unwrap();
        h.corrupt_for_test();
        assert!(matches!(h.check_hermitian(), Err(Error::Invariant(_))));
    }

    #[test]
    fn apply_matches_dense() {
        let l = LatticeSpec::new(1.0, 0.3, 9, 2).unwrap();
        let h = build_hamiltonian(&l, &QubitSpec { omega0: -0.7, coupling: 0.2 }).unwrap();
        let psi: Vec<C64> = (0..10).map(|i| C64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let mut out = vec![C64::new(0.0, 0.0); 10];
        h.apply(&psi, &mut out);
        let d = h.to_dense();
        for i in 0..10 {
            let want: C64 = (0..10).map(|j| psi[j] * d[(i, j)]).sum();
            assert_abs_diff_eq!((out[i] - want).norm(), 0.0, epsilon = 1e-14);
        }
    }

    /// Number of eigenvalues of the field block below `x` (Sturm sequence).
    fn sturm_count(h: &HamiltonianMatrix, x: f64) -> usize {
        let f = h.dim() - 1;
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..f {
            let off = if i == 0 { 0.0 } else { h.entry(i, i + 1) };
            q = h.entry(i + 1, i + 1) - x - if i == 0 { 0.0 } else { off * off / q };
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn ladder_spacing_from_sturm_bisection() {
        let l = lat(0.5, 4001);
        let h = build_hamiltonian(&l, &QubitSpec { omega0: 0.0, coupling: 0.0 }).unwrap();
        let base = sturm_count(&h, -5.25);
        let top = sturm_count(&h, 5.25);
        assert_eq!(top - base, 21);
        let mut eigs = Vec::new();
        for k in base..top {
            // k-th eigenvalue (0-based): smallest x with count(x) > k
            let (mut a, mut b) = (-5.25, 5.25);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if sturm_count(&h, m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            eigs.push(0.5 * (a + b));
        }
        for pair in eigs.windows(2) {
            assert!((pair[1] - pair[0] - 0.5).abs() < 1e-6, "{pair:?}");
        }
        assert_abs_diff_eq!(eigs[10], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn small_block_dense_eigensolver_agrees() {
        let l = lat(0.5, 101);
        let h = build_hamiltonian(&l, &QubitSpec { omega0: 0.0, coupling: 0.0 }).unwrap();
        let block = DMatrix::from_fn(101, 101, |i, j| h.entry(i + 1, j + 1));
        let mut ev: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let central: Vec<f64> = ev.into_iter().filter(|e| e.abs() < 10.2).collect();
        assert_eq!(central.len(), 41);
        for (i, e) in central.iter().enumerate() {
            assert_abs_diff_eq!(*e, -10.0 + 0.5 * i as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(1.0, 0.0), -2.0);
        assert_abs_diff_eq!(dispersion(1.0, PI / 2.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dispersion(1.0, -PI / 2.0), 0.0, epsilon = 1e-15);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 0..=1000 {
            let e = dispersion(1.0, -PI + 2.0 * PI * j as f64 / 1000.0);
            lo = lo.min(e);
            hi = hi.max(e);
        }
        assert_abs_diff_eq!(hi - lo, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dispersion(1.0, 2.0 * PI + 0.3), dispersion(1.0, 0.3), epsilon = 1e-14);
    }

    #[test]
    fn fbz_wrapping() {
        assert_eq!(wrap_to_fbz(PI), PI);
        assert_abs_diff_eq!(wrap_to_fbz(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_to_fbz(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_to_fbz(-7.0), -7.0 + 2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn resonant_momenta() {
        assert_abs_diff_eq!(resonant_momentum(1.0, 0.0).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(resonant_momentum(1.0, -1.0).unwrap(), PI / 3.0, epsilon = 1e-15);
        assert_eq!(resonant_momentum(1.0, -2.0).unwrap(), 0.0);
        assert!(matches!(resonant_momentum(1.0, 2.5), Err(Error::OutOfBand { .. })));
    }

    #[test]
    fn coupling_mode_examples() {
        let qb = QubitSpec { omega0: 0.0, coupling: 0.01 };
        let l = lat(0.5, 101);
        let g0 = coupling_mode_function(&l, &qb, 0).unwrap();
        assert_abs_diff_eq!(g0, 0.01 * -0.397_149_809_863_847_4, epsilon = 1e-14);
        assert_abs_diff_eq!(g0, -0.003971, epsilon = 1e-6);
        for n in [44i64, 50, -60] {
            assert!(coupling_mode_function(&l, &qb, n).unwrap().abs() < 1e-6 * 0.01);
        }
        let shifted = LatticeSpec::new(1.0, 0.1, 101, 5).unwrap();
        assert_eq!(coupling_mode_function(&shifted, &qb, 5).unwrap(), 0.01 * bessel_j(0, 20.0).unwrap());
        assert!(matches!(coupling_mode_function(&lat(0.0, 11), &qb, 0), Err(Error::ZeroForce(_))));
    }

    #[test]
    fn regime_classifier() {
        let r = classify_regime(&lat(0.5, 11), &QubitSpec { omega0: 0.0, coupling: 0.01 }).unwrap();
        assert_abs_diff_eq!(r.ratio, 1e-4 * 4.0 * PI, epsilon = 1e-15);
        assert_eq!(r.regime, Regime::StrongForce);

        let r = classify_regime(&lat(1e-3, 11), &QubitSpec { omega0: 0.0, coupling: 0.2 }).unwrap();
        assert_abs_diff_eq!(r.ratio, 0.04 * 2.0 * PI * 1e3, epsilon = 1e-9);
        assert_eq!(r.regime, Regime::WeakForce);

        // g chosen so that Gamma T_B = 1
        let g = (0.5 / (2.0 * PI)).sqrt();
        let r = classify_regime(&lat(0.5, 11), &QubitSpec { omega0: 0.0, coupling: g }).unwrap();
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);
        assert_eq!(r.regime, Regime::Crossover);

        assert!(classify_regime(&lat(0.0, 11), &QubitSpec { omega0: 0.0, coupling: 0.1 }).is_err());
    }

    #[test]
    fn regime_depends_only_on_product() {
        // Gamma T_B = 2 pi g^2 / F: scale g^2 and F together
        for &(g, f) in &[(0.05, 0.02), (0.1, 0.08), (0.2, 0.32)] {
            let r = classify_regime(&lat(f, 11), &QubitSpec { omega0: 0.0, coupling: g }).unwrap();
            assert_abs_diff_eq!(r.ratio, 2.0 * PI * 0.125, epsilon = 1e-12);
            assert_eq!(r.regime, Regime::Crossover);
        }
    }

    #[test]
    fn rabi_frequency_examples() {
        let l = lat(0.5, 101);
        let qb = QubitSpec { omega0: 0.0, coupling: 0.01 };
        let w = rabi_frequency(&l, &qb, 0).unwrap();
        assert_abs_diff_eq!(w, 0.02 * 0.397_149_809_863_847_4, epsilon = 1e-14);
        assert_abs_diff_eq!(w, 7.94e-3, epsilon = 1e-5);

        let qb3 = QubitSpec { omega0: 1.5, coupling: 0.01 };
        let w3 = rabi_frequency(&l, &qb3, 3).unwrap();
        assert_abs_diff_eq!(w3, 0.02 * bessel_j(3, 4.0).unwrap().abs(), epsilon = 1e-15);
        assert_abs_diff_eq!(w3, 0.02 * bessel_j(-3, 4.0).unwrap().abs(), epsilon = 1e-15);

        let far = QubitSpec { omega0: 0.2, coupling: 1e-4 };
        let wf = rabi_frequency(&l, &far, 0).unwrap();
        assert_abs_diff_eq!(wf, 0.2, epsilon = 1e-6);
    }

    #[test]
    fn derived_scales() {
        let qb = QubitSpec { omega0: 0.0, coupling: 0.2 };
        let s = DerivedScales::new(&lat(0.37, 11), &qb);
        assert!(((s.xi * 0.37 - 2.0) / 2.0).abs() <= 1e-14);
        assert!(((s.t_bloch * 0.37 - 2.0 * PI) / (2.0 * PI)).abs() <= 1e-14);
        assert_abs_diff_eq!(s.gamma, 0.04, epsilon = 1e-16);
        assert!(s.gbar > 0.0 && s.ratio > 0.0);
        let z = DerivedScales::new(&lat(0.0, 11), &qb);
        assert!(z.xi.is_infinite() && z.t_bloch.is_infinite());
    }

    #[test]
    fn auto_sizing() {
        assert_eq!(LatticeSpec::auto_sites(1.0, 0.0, 60.0), 441);
        assert_eq!(LatticeSpec::auto_sites(1.0, 0.5, 1e4), 217);
        assert_eq!(LatticeSpec::auto_sites(1.0, 1e-3, 1.0), 8201);
    }

    #[test]
    fn wannier_stark_modes() {
        let l = lat(0.5, 401);
        let h = build_hamiltonian(&l, &QubitSpec { omega0: 0.0, coupling: 0.0 }).unwrap();
        let xi = 4.0;
        for n in [-3i64, 0, 2, 7] {
            let w = (xi + 60.0) as i64;
            let mode = WannierStarkMode::new(&l, n, w).unwrap();
            let s: f64 = mode.amplitudes.iter().map(|a| a * a).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(mode.centroid(), n as f64, epsilon = 1e-8);
            // embed in the full lattice and check the eigen-residual
            let mut v = vec![0.0; l.sites];
            for (i, a) in mode.amplitudes.iter().enumerate() {
                v[l.site_index(mode.first_site + i as i64).unwrap()] = *a;
            }
            assert!(h.field_residual(&v, mode.energy) <= 1e-8);
        }
    }

    #[test]
    fn mode_centroid_large_xi() {
        let l = lat(2.0 / 250.0, 1001);
        for n in [-5i64, 0, 11] {
            let mode = WannierStarkMode::new(&l, n, 310).unwrap();
            assert_abs_diff_eq!(mode.centroid(), n as f64, epsilon = 1e-8);
        }
    }

    proptest::proptest! {
        #[test]
        fn hamiltonian_always_hermitian(
            force in 0.0f64..2.0,
            half in 1usize..40,
            omega0 in -3.0f64..3.0,
            g in 0.0f64..1.0,
            offset in -1.0f64..1.0,
        ) {
            let sites = 2 * half + 1;
            let n0 = (offset * half as f64).round() as i64;
            let l = LatticeSpec::new(1.0, force, sites, n0).unwrap();
            let h = build_hamiltonian(&l, &QubitSpec { omega0, coupling: g }).unwrap();
            h.check_hermitian().unwrap();
            let d = h.to_dense();
            proptest::prop_assert_eq!(&d, &d.transpose());
            proptest::prop_assert!(h.nnz() <= 3 * sites + 3);
            proptest::prop_assert_eq!(h.entry(0, 1 + l.site_index(n0).unwrap()), g);
        }
    }
}
