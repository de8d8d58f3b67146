//! Bosonic ladder operators, their Jordan–Wigner dressing into anyons, and a
//! numerical check of the resulting deformed commutation relations.
//!
//! The anyonic annihilator on linear site `j` is
//! `a_j = b_j exp(-iθ Σ_{k<j} n_k)`; the string is evaluated on the state the
//! operator acts on.

use faer::{c64, Mat, Scale};

use crate::error::{Error, Result};
use crate::fock::{BasisTable, OccupationState};

/// Dense matrix of an operator between two particle-number sectors.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub dim_out: usize,
    pub dim_in: usize,
    pub entries: Mat<c64>,
}

impl OperatorMatrix {
    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            dim_out: self.dim_in,
            dim_in: self.dim_out,
            entries: self.entries.adjoint().to_owned(),
        }
    }
}

fn check_site(s: &OccupationState, site: usize) -> Result<()> {
    if site >= s.len() {
        return Err(Error::SiteOutOfRange { site, sites: s.len() });
    }
    Ok(())
}

/// `b_site |s>`: the lowered state with amplitude `sqrt(n_site)`, or `None`
/// when the site is empty (zero amplitude).
pub fn apply_annihilation(s: &OccupationState, site: usize) -> Result<Option<(OccupationState, f64)>> {
    check_site(s, site)?;
    let n = s.get(site);
    if n == 0 {
        return Ok(None);
    }
    Ok(Some((s.with_delta(site, -1), (n as f64).sqrt())))
}

/// `b_site^† |s>` with amplitude `sqrt(n_site + 1)`. No cap is applied here;
/// callers discard targets outside their basis.
pub fn apply_creation(s: &OccupationState, site: usize) -> Result<(OccupationState, f64)> {
    check_site(s, site)?;
    let n = s.get(site);
    Ok((s.with_delta(site, 1), (n as f64 + 1.0).sqrt()))
}

/// Jordan–Wigner string `exp(-iθ Σ_{k<site} n_k)` on state `s`.
pub fn jw_string_phase(s: &OccupationState, site: usize, theta: f64) -> c64 {
    let below = s.count_below(site) as f64;
    c64::cis(-theta * below)
}

fn check_sectors(source: &BasisTable, target: &BasisTable) -> Result<()> {
    if !source.is_compatible(target) {
        return Err(Error::SectorMismatch("bases differ in rungs or occupation cap".into()));
    }
    if source.particles() != target.particles() + 1 {
        return Err(Error::SectorMismatch(format!(
            "annihilation maps {} particles to {}, target sector has {}",
            source.particles(),
            source.particles().saturating_sub(1),
            target.particles()
        )));
    }
    Ok(())
}

fn lowering_matrix(source: &BasisTable, target: &BasisTable, site: usize, theta: f64) -> Result<OperatorMatrix> {
    check_sectors(source, target)?;
    if site >= source.sites() {
        return Err(Error::SiteOutOfRange { site, sites: source.sites() });
    }
    let mut entries = Mat::<c64>::zeros(target.dim(), source.dim());
    for (col, s) in source.states().iter().enumerate() {
        if let Some((lowered, amp)) = apply_annihilation(s, site)? {
            let row = target.find(&lowered).expect("lowered state lies in the N-1 sector");
            entries[(row, col)] = jw_string_phase(s, site, theta) * amp;
        }
    }
    Ok(OperatorMatrix { dim_out: target.dim(), dim_in: source.dim(), entries })
}

/// Plain bosonic `b_site` from the `N` sector to the `N-1` sector.
pub fn boson_matrix(basis_n: &BasisTable, basis_nminus1: &BasisTable, site: usize) -> Result<OperatorMatrix> {
    lowering_matrix(basis_n, basis_nminus1, site, 0.0)
}

/// Anyonic `a_site = b_site · string` from the `N` sector to the `N-1` sector.
pub fn anyon_matrix(
    basis_n: &BasisTable,
    basis_nminus1: &BasisTable,
    site: usize,
    theta: f64,
) -> Result<OperatorMatrix> {
    lowering_matrix(basis_n, basis_nminus1, site, theta)
}

/// Largest residual of the deformed commutation relations found by
/// [`anyon_algebra_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorReport {
    /// Max over site pairs and sectors of `‖a_j a_k − e^{−iφ sgn(j−k)} a_k a_j‖`.
    pub exchange: f64,
    /// Max over site pairs and sectors of `‖a_j a_k^† − e^{iφ sgn(j−k)} a_k^† a_j − δ_jk‖`.
    pub mixed: f64,
    pub max_residual: f64,
    pub passed: bool,
}

fn sgn(j: usize, k: usize) -> f64 {
    match j.cmp(&k) {
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0,
    }
}

fn frobenius(m: &Mat<c64>) -> f64 {
    let mut acc = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Checks the relations
///
/// ```text
/// a_j a_k   − e^{−iφ sgn(j−k)} a_k a_j   = 0
/// a_j a_k^† − e^{ iφ sgn(j−k)} a_k^† a_j = δ_jk
/// ```
///
/// for the operators built with string angle `theta`, using exchange angle
/// `phi` in the relations. Residuals are Frobenius norms (an upper bound on
/// the operator norm). The mixed relation is restricted to source states with
/// every occupation at most `n_cap − 1`, where truncation cannot break
/// `[b, b^†] = 1`. Sectors `N = 0..=n_cap` are covered.
pub fn anyon_algebra_residual(l: usize, n_cap: u8, theta: f64, phi: f64, tol: f64) -> Result<CommutatorReport> {
    if n_cap < 2 {
        return Err(Error::InvalidParameter("commutator check needs n_cap >= 2 for a cap-safe subspace".into()));
    }
    let sites = 2 * l;
    let max_n = n_cap as usize;
    let bases: Vec<BasisTable> =
        (0..=max_n + 1).map(|n| BasisTable::build(l, n, n_cap)).collect::<Result<_>>()?;

    // lowering[n][site]: N=n -> N=n-1, for n >= 1
    let mut lowering: Vec<Vec<Mat<c64>>> = vec![Vec::new()];
    for n in 1..=max_n + 1 {
        let ops = (0..sites)
            .map(|site| anyon_matrix(&bases[n], &bases[n - 1], site, theta).map(|m| m.entries))
            .collect::<Result<Vec<_>>>()?;
        lowering.push(ops);
    }

    let mut exchange = 0.0f64;
    let mut mixed = 0.0f64;
    for n in 0..=max_n {
        let cap_safe: Vec<usize> = bases[n]
            .states()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.occupations().iter().all(|&o| o < n_cap))
            .map(|(i, _)| i)
            .collect();
        for j in 0..sites {
            for k in 0..sites {
                let s = sgn(j, k);
                if n >= 2 {
                    let ajak = &lowering[n - 1][j] * &lowering[n][k];
                    let akaj = &lowering[n - 1][k] * &lowering[n][j];
                    let r = ajak - akaj * Scale(c64::cis(-phi * s));
                    exchange = exchange.max(frobenius(&r));
                }
                // a_j a_k^†: N -> N+1 -> N ; a_k^† a_j: N -> N-1 -> N
                let create_k = lowering[n + 1][k].adjoint().to_owned();
                let ajakd = &lowering[n + 1][j] * &create_k;
                let akdaj = if n >= 1 {
                    lowering[n][k].adjoint() * &lowering[n][j]
                } else {
                    Mat::zeros(bases[0].dim(), bases[0].dim())
                };
                let mut r = ajakd - akdaj * Scale(c64::cis(phi * s));
                if j == k {
                    for i in 0..r.nrows() {
                        r[(i, i)] -= c64::new(1.0, 0.0);
                    }
                }
                let mut acc = 0.0f64;
                for &col in &cap_safe {
                    for row in 0..r.nrows() {
                        acc += r[(row, col)].norm_sqr();
                    }
                }
                mixed = mixed.max(acc.sqrt());
            }
        }
    }
    let max_residual = exchange.max(mixed);
    Ok(CommutatorReport { exchange, mixed, max_residual, passed: max_residual <= tol })
}

/// Checks the anyonic relations with the same angle in the string and in the
/// exchange factors (`φ = θ`).
pub fn check_anyon_commutators(l: usize, n_cap: u8, theta: f64, tol: f64) -> Result<CommutatorReport> {
    anyon_algebra_residual(l, n_cap, theta, theta, tol)
}

/// Max entrywise deviation between `a_j^† a_j` and `b_j^† b_j` over all sites.
pub fn number_operator_deviation(basis_n: &BasisTable, basis_nminus1: &BasisTable, theta: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for site in 0..basis_n.sites() {
        let a = anyon_matrix(basis_n, basis_nminus1, site, theta)?.entries;
        let b = boson_matrix(basis_n, basis_nminus1, site)?.entries;
        let na = a.adjoint() * &a;
        let nb = b.adjoint() * &b;
        worst = worst.max((na - nb).norm_max());
    }
    Ok(worst)
}
