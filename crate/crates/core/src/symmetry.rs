//! Antiunitary pseudo-Hermiticity operator `K = R_z I T` on the Fock basis.
//!
//! `T` is complex conjugation, `I` inverts the rung order on both legs and
//! `R_z` is the diagonal phase `exp(−iθ Σ n(n−1)/2)`. `K H K†` is evaluated as
//! `U conj(H) U†` with `U = D P`, never as a dense product.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::fock::{BasisTable, OccupationState};

#[derive(Clone, Debug)]
pub struct KOperator {
    /// `permutation[a]` is the index of the rung-inverted image of state `a`.
    pub permutation: Vec<usize>,
    /// Unit-modulus phase on each basis state.
    pub phases: Vec<c64>,
    pub theta: f64,
}

impl KOperator {
    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    /// Always true: `K` contains complex conjugation.
    pub fn is_antiunitary(&self) -> bool {
        true
    }

    /// Applies `K` to a state vector: `D P conj(ψ)`.
    pub fn apply(&self, psi: &[c64]) -> Result<Vec<c64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.len() });
        }
        let mut out = vec![c64::new(0.0, 0.0); psi.len()];
        for (a, v) in psi.iter().enumerate() {
            let t = self.permutation[a];
            out[t] = self.phases[t] * v.conj();
        }
        Ok(out)
    }
}

/// Image of `s` under `j → L−1−j` on both legs.
pub fn invert_rungs(s: &OccupationState, l: usize) -> OccupationState {
    let occ = s.occupations();
    let mut out = Vec::with_capacity(occ.len());
    out.extend(occ[..l].iter().rev());
    out.extend(occ[l..].iter().rev());
    OccupationState::new(out)
}

fn onsite_phase(s: &OccupationState, theta: f64) -> c64 {
    let pairs: usize = s.occupations().iter().map(|&n| n as usize * (n as usize).saturating_sub(1) / 2).sum();
    c64::cis(-theta * pairs as f64)
}

pub fn build_k(basis: &BasisTable, theta: f64) -> KOperator {
    let l = basis.rungs();
    let permutation = basis
        .states()
        .iter()
        .map(|s| basis.find(&invert_rungs(s, l)).expect("inversion preserves the sector"))
        .collect();
    let phases = basis.states().iter().map(|s| onsite_phase(s, theta)).collect();
    KOperator { permutation, phases, theta }
}

/// `K H K† = (D P) conj(H) (D P)†`.
pub fn k_conjugate(k: &KOperator, h: &Mat<c64>) -> Result<Mat<c64>> {
    let n = k.dim();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.nrows().max(h.ncols()) });
    }
    let mut out = Mat::zeros(n, n);
    for b in 0..n {
        let tb = k.permutation[b];
        let db = k.phases[tb].conj();
        for a in 0..n {
            let ta = k.permutation[a];
            out[(ta, tb)] = k.phases[ta] * h[(a, b)].conj() * db;
        }
    }
    Ok(out)
}

/// Deviation of `K H K†` from `H†`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    /// Entrywise max-abs norm.
    pub max_abs: f64,
    pub frobenius: f64,
}

pub fn residual(k: &KOperator, h_part: &Mat<c64>) -> Result<Residual> {
    let diff = k_conjugate(k, h_part)? - h_part.adjoint();
    Ok(Residual { max_abs: diff.norm_max(), frobenius: diff.norm_l2() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_full, ModelParams, TermTag};
    use std::f64::consts::PI;

    const THETAS: [f64; 5] = [0.0, 0.2 * PI, 0.4 * PI, 0.8 * PI, PI];

    #[test]
    fn zero_angle_phases_are_trivial() {
        let b = BasisTable::build(3, 2, 2).unwrap();
        let k = build_k(&b, 0.0);
        assert!(k.phases.iter().all(|&d| d == c64::new(1.0, 0.0)));
        assert!(k.is_antiunitary());
    }

    #[test]
    fn doublon_phase_and_singly_occupied() {
        let b = BasisTable::build(3, 2, 2).unwrap();
        let k = build_k(&b, 0.5 * PI);
        for (s, d) in b.states().iter().zip(&k.phases) {
            if s.occupations().contains(&2) {
                assert!((d - c64::new(0.0, -1.0)).norm() < 1e-15);
            } else {
                assert_eq!(*d, c64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn permutation_is_involution() {
        let b = BasisTable::build(4, 3, 3).unwrap();
        let k = build_k(&b, 0.3);
        for a in 0..b.dim() {
            assert_eq!(k.permutation[k.permutation[a]], a);
        }
        assert!(k.phases.iter().all(|d| (d.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn identity_is_fixed() {
        let b = BasisTable::build(3, 2, 2).unwrap();
        let k = build_k(&b, 1.1);
        let id = Mat::<c64>::identity(b.dim(), b.dim());
        assert_eq!((k_conjugate(&k, &id).unwrap() - &id).norm_max(), 0.0);
    }

    #[test]
    fn applying_twice_is_diagonal_unitary() {
        let p = ModelParams::reference(3, 2).with_theta(0.7).with_jp(0.2);
        let b = p.basis().unwrap();
        let h = build_full(&p, &b).unwrap().entries;
        let k = build_k(&b, p.theta);
        let twice = k_conjugate(&k, &k_conjugate(&k, &h).unwrap()).unwrap();
        // K² = D' with D'_a = d_a conj(d_{π(a)}) = 1 since D is inversion invariant
        assert!((twice - &h).norm_max() < 1e-14);
    }

    #[test]
    fn single_legs_with_onsite_are_pseudo_hermitian() {
        let p = ModelParams::reference(10, 2).with_jp(0.1);
        let b = p.basis().unwrap();
        for theta in THETAS {
            let h = build_full(&p.clone().with_theta(theta), &b).unwrap();
            let k = build_k(&b, h.params.theta);
            let part = h.sum_of(&[TermTag::IntraA, TermTag::IntraB, TermTag::Onsite]);
            assert!(residual(&k, &part).unwrap().max_abs < 1e-12, "θ={theta}");
        }
    }

    #[test]
    fn rung_coupling_breaks_symmetry_for_generic_angle() {
        let p = ModelParams::reference(10, 2).with_jp(0.1);
        let b = p.basis().unwrap();
        let generic = build_full(&p.clone().with_theta(0.4 * PI), &b).unwrap();
        let r = residual(&build_k(&b, generic.params.theta), &generic.term(TermTag::Inter)).unwrap();
        assert!(r.max_abs > 1e-3);
        assert!(r.frobenius >= r.max_abs);
        let boson = build_full(&p.with_theta(0.0), &b).unwrap();
        let r = residual(&build_k(&b, 0.0), &boson.term(TermTag::Inter)).unwrap();
        assert!(r.max_abs < 1e-12);
    }

    #[test]
    fn apply_matches_conjugation() {
        let p = ModelParams::reference(3, 2).with_theta(0.4 * PI).with_jp(0.3);
        let b = p.basis().unwrap();
        let h = build_full(&p, &b).unwrap().entries;
        let k = build_k(&b, p.theta);
        let khk = k_conjugate(&k, &h).unwrap();
        let psi: Vec<c64> = (0..b.dim()).map(|i| c64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        // K (H ψ) = (K H K†)(K ψ)
        let h_psi: Vec<c64> = (0..b.dim()).map(|i| (0..b.dim()).map(|j| h[(i, j)] * psi[j]).sum()).collect();
        let lhs = k.apply(&h_psi).unwrap();
        let kpsi = k.apply(&psi).unwrap();
        for i in 0..b.dim() {
            let rhs: c64 = (0..b.dim()).map(|j| khk[(i, j)] * kpsi[j]).sum();
            assert!((lhs[i] - rhs).norm() < 1e-12);
        }
    }
}
