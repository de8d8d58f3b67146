use std::f64::consts::PI;

use anyladder_core::dynamics::{evolve_spectral, evolve_stepping, overlap_series};
use anyladder_core::hamiltonian::build_full;
use anyladder_core::spectral::{count_complex, eig, COMPLEX_TOL};
use anyladder_core::{c64, BasisTable, ModelParams};

fn sorted_re(spec: &anyladder_core::Spectrum) -> Vec<f64> {
    let mut v: Vec<f64> = spec.eigenvalues.iter().map(|e| e.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

// One particle, decoupled legs: each leg is an open Hatano–Nelson chain whose
// spectrum is the reciprocal one, -2J cos(πm/(L+1)), shifted by ±μ.
#[test]
fn single_particle_open_chain() {
    for l in [3, 5, 8] {
        for theta in [0.0, 0.4 * PI, PI] {
            let p = ModelParams::reference(l, 1).with_theta(theta);
            let b = p.basis().unwrap();
            let spec = eig(&build_full(&p, &b).unwrap().entries).unwrap();
            let mut expected: Vec<f64> = (1..=l)
                .flat_map(|m| {
                    let e = -2.0 * p.j * (PI * m as f64 / (l + 1) as f64).cos();
                    [e + p.mu, e - p.mu]
                })
                .collect();
            expected.sort_by(f64::total_cmp);
            for (got, want) in sorted_re(&spec).iter().zip(&expected) {
                assert!((got - want).abs() < 1e-10, "L={l} θ={theta}: {got} vs {want}");
            }
            assert_eq!(count_complex(&spec, COMPLEX_TOL), 0);
        }
    }
}

#[test]
fn single_rung_two_level() {
    for theta in [0.0, 0.3, PI] {
        let p = ModelParams::reference(1, 1).with_jp(0.7).with_theta(theta);
        let b = p.basis().unwrap();
        let spec = eig(&build_full(&p, &b).unwrap().entries).unwrap();
        let w = (p.mu * p.mu + p.jp * p.jp).sqrt();
        let re = sorted_re(&spec);
        assert!((re[0] + w).abs() < 1e-12 && (re[1] - w).abs() < 1e-12);
    }
}

// Two bosons on one rung: states |2,0⟩, |1,1⟩, |0,2⟩ with diagonal U+2μ, 0,
// U−2μ and √2·Jp couplings. Characteristic polynomial checked directly.
#[test]
fn single_rung_two_bosons() {
    let p = ModelParams::reference(1, 2).with_jp(0.5).with_theta(0.4 * PI);
    let b = p.basis().unwrap();
    let h = build_full(&p, &b).unwrap().entries;
    let spec = eig(&h).unwrap();
    let (u, mu, jp) = (p.u, p.mu, p.jp);
    let charpoly = |e: f64| {
        let (a, d) = (u + 2.0 * mu - e, u - 2.0 * mu - e);
        // det [[a, s, 0], [s, -e, s], [0, s, d]] with s² = 2 Jp²
        let s2 = 2.0 * jp * jp;
        a * (-e * d - s2) - s2 * d
    };
    for e in &spec.eigenvalues {
        assert!(e.im.abs() < 1e-12);
        assert!(charpoly(e.re).abs() < 1e-9, "E={e}");
    }
    let trace: c64 = spec.eigenvalues.iter().sum();
    assert!((trace.re - 2.0 * u).abs() < 1e-12);
}

#[test]
fn basis_dimension_matches_stars_and_bars() {
    fn choose(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for l in 1..=5 {
        for n in 1..=3 {
            let b = BasisTable::build(l, n, n as u8).unwrap();
            assert_eq!(b.dim(), choose(2 * l + n - 1, n), "L={l} N={n}");
        }
    }
    assert_eq!(BasisTable::build(10, 2, 2).unwrap().dim(), 210);
}

// Hermitian limit: e^{-iHt} keeps the norm, and |⟨ψ0|ψ(t)⟩|² of an
// eigenstate stays 1.
#[test]
fn hermitian_eigenstate_is_stationary() {
    let p = ModelParams::reference(4, 2).with_alpha(0.0).with_jp(0.3).with_theta(0.4 * PI);
    let b = p.basis().unwrap();
    let h = build_full(&p, &b).unwrap().entries;
    let spec = eig(&h).unwrap();
    let psi0 = spec.right_vector(3);
    let times = [0.0, 1.0, 10.0, 100.0];
    for states in [evolve_spectral(&spec, &psi0, &times).unwrap(), evolve_stepping(&h, &psi0, &times).unwrap()] {
        for p in overlap_series(&states, &psi0) {
            assert!((p - 1.0).abs() < 1e-9);
        }
    }
}
