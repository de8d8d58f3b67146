//! Dense non-Hermitian eigendecomposition with a biorthonormal left basis and
//! the per-eigenstate observables built on it.

use std::cmp::Ordering;
use std::io::{self, Write};

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::fock::{BasisTable, Leg, SiteIndex};

/// Eigenvalues closer than this fraction of the spectral radius share a cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Largest eigenvalue mismatch, relative to the spectral radius, accepted when
/// pairing right and left eigenvectors.
pub const PAIRING_TOL: f64 = 1e-6;
/// Eigenvalue condition numbers above this mark the spectrum defective.
pub const MAX_CONDITION: f64 = 1e10;
/// Default threshold on Im E for counting complex eigenvalues.
pub const COMPLEX_TOL: f64 = 1e-7;

/// Eigenvalues with right eigenvectors `R_n` (unit norm, columns) and left
/// eigenvectors `L_n` (columns) scaled so that `L_m^† R_n = δ_mn`.
///
/// Eigenvalues are sorted by real part, then imaginary part.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<c64>,
    pub right: Mat<c64>,
    pub left: Mat<c64>,
    /// Largest eigenvalue condition number `1/|⟨l_n|r_n⟩|` over unit-norm
    /// left/right pairs; infinite when the spectrum is flagged defective.
    pub condition: f64,
    /// Set when some eigenvalue found no left partner or a cluster overlap
    /// matrix was singular; the affected left vectors are left unscaled.
    pub defective: bool,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn radius(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn right_vector(&self, n: usize) -> Vec<c64> {
        self.right.col(n).iter().copied().collect()
    }

    pub fn left_vector(&self, n: usize) -> Vec<c64> {
        self.left.col(n).iter().copied().collect()
    }

    pub fn trace(&self) -> c64 {
        self.eigenvalues.iter().sum()
    }

    /// `Σ_n E_n |R_n⟩⟨L_n|`.
    pub fn reconstruct(&self) -> Mat<c64> {
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, k| self.right[(i, k)] * self.eigenvalues[k]);
        scaled * self.left.adjoint()
    }

    /// `max |⟨L_m|R_n⟩ − δ_mn|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let g = self.left.adjoint() * &self.right;
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    fn require_biorthonormal(&self, what: &'static str) -> Result<()> {
        if self.defective {
            Err(Error::DefectiveSpectrum(what))
        } else {
            Ok(())
        }
    }

    /// `c_n = ⟨L_n|ψ⟩`.
    pub fn coefficients(&self, psi: &[c64]) -> Result<Vec<c64>> {
        self.require_biorthonormal("eigenbasis decomposition")?;
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.len() });
        }
        Ok((0..self.dim())
            .map(|n| self.left.col(n).iter().zip(psi).map(|(l, p)| l.conj() * p).sum())
            .collect())
    }
}

fn cmp_eigenvalue(a: &c64, b: &c64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn normalize_columns(m: &mut Mat<c64>) {
    for j in 0..m.ncols() {
        let norm = m.col(j).norm_l2();
        if norm > 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] /= norm;
            }
        }
    }
}

fn raw_eigen(h: &Mat<c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let evd = h.eigen().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S();
    let values: Vec<c64> = (0..h.nrows()).map(|k| s[k]).collect();
    let mut vectors = evd.U().to_owned();
    normalize_columns(&mut vectors);
    Ok((values, vectors))
}

/// Eigendecomposition of a square complex matrix.
pub fn eig(h: &Mat<c64>) -> Result<Spectrum> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.ncols() });
    }
    if h.col_iter().any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            right: Mat::zeros(0, 0),
            left: Mat::zeros(0, 0),
            condition: 1.0,
            defective: false,
        });
    }

    let (vals, vecs) = raw_eigen(h)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_eigenvalue(&vals[a], &vals[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<c64> = order.iter().map(|&k| vals[k]).collect();
    let right = Mat::from_fn(n, n, |i, j| vecs[(i, order[j])]);

    let (adj_vals, adj_vecs) = raw_eigen(&h.adjoint().to_owned())?;
    let radius = eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let scale = if radius > 0.0 { radius } else { 1.0 };

    // greedy global pairing of E_i with conj(F_j)
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, e) in eigenvalues.iter().enumerate() {
        for (j, f) in adj_vals.iter().enumerate() {
            candidates.push(((e - f.conj()).norm(), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut taken = vec![false; n];
    let mut paired = 0;
    for (d, i, j) in candidates {
        if paired == n || d > PAIRING_TOL * scale {
            break;
        }
        if partner[i].is_none() && !taken[j] {
            partner[i] = Some(j);
            taken[j] = true;
            paired += 1;
        }
    }

    let mut defective = paired < n;
    let mut left = Mat::<c64>::zeros(n, n);
    let mut condition = 1.0f64;
    // unmatched eigenvalues keep an unmatched unit-norm left vector
    let mut spare = (0..n).filter(|&j| !taken[j]);
    for i in 0..n {
        let j = match partner[i] {
            Some(j) => j,
            None => spare.next().expect("as many spare vectors as unpaired values"),
        };
        for r in 0..n {
            left[(r, i)] = adj_vecs[(r, j)];
        }
    }

    for cluster in clusters(&eigenvalues, CLUSTER_TOL * scale) {
        if cluster.iter().any(|&i| partner[i].is_none()) {
            continue;
        }
        let k = cluster.len();
        // M = W_C^† R_C, scaled left block is W_C (M^{-1})^†
        let m = Mat::from_fn(k, k, |a, b| {
            let (ia, ib) = (cluster[a], cluster[b]);
            left.col(ia).iter().zip(right.col(ib).iter()).map(|(l, r)| l.conj() * r).sum::<c64>()
        });
        if k == 1 {
            let overlap = m[(0, 0)];
            if overlap.norm() * MAX_CONDITION < 1.0 {
                defective = true;
                continue;
            }
            condition = condition.max(1.0 / overlap.norm());
            let s = overlap.conj().inv();
            for r in 0..n {
                left[(r, cluster[0])] *= s;
            }
            continue;
        }
        let inv = m.partial_piv_lu().inverse();
        if inv.col_iter().any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
            defective = true;
            continue;
        }
        let residual = (&m * &inv - Mat::<c64>::identity(k, k)).norm_max();
        if residual > 1e-6 || inv.norm_l2() > MAX_CONDITION {
            defective = true;
            continue;
        }
        condition = condition.max(inv.norm_l2());
        let w = Mat::from_fn(n, k, |r, a| left[(r, cluster[a])]);
        let scaled = w * inv.adjoint();
        for (a, &i) in cluster.iter().enumerate() {
            for r in 0..n {
                left[(r, i)] = scaled[(r, a)];
            }
        }
    }
    if defective {
        condition = f64::INFINITY;
    } else {
        refine_left(&mut left, &right);
    }
    Ok(Spectrum { eigenvalues, right, left, condition, defective })
}

// Degenerate eigenvalues that the solver splits beyond the cluster tolerance
// leave O(√ε) cross overlaps. One global step L ← L (G⁻¹)† with G = L†R
// removes them; it is skipped when G is far from the identity.
fn refine_left(left: &mut Mat<c64>, right: &Mat<c64>) {
    let n = right.ncols();
    let g = left.adjoint() * right;
    if (&g - Mat::<c64>::identity(n, n)).norm_max() > 1e-3 {
        return;
    }
    let ginv = g.partial_piv_lu().inverse();
    *left = &*left * ginv.adjoint();
}

// Groups indices whose eigenvalues are connected by links shorter than `tol`.
// `values` must be sorted by real part.
fn clusters(values: &[c64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if values[j].re - values[i].re > tol {
                break;
            }
            if (values[j] - values[i]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Number of eigenvalues with `Im E > tol`.
pub fn count_complex(spec: &Spectrum, tol: f64) -> usize {
    spec.eigenvalues.iter().filter(|e| e.im > tol).count()
}

/// Number of eigenvalues with `Im E < −tol`.
pub fn count_decaying(spec: &Spectrum, tol: f64) -> usize {
    spec.eigenvalues.iter().filter(|e| e.im < -tol).count()
}

/// `max_n Im E_n`; `-inf` for an empty spectrum.
pub fn max_im(spec: &Spectrum) -> f64 {
    spec.eigenvalues.iter().map(|e| e.im).fold(f64::NEG_INFINITY, f64::max)
}

/// Index of the eigenvalue with the largest imaginary part.
///
/// Values within `1e-10·max(1, radius)` of the maximum count as tied; ties go
/// to the larger real part, then the lower index.
pub fn argmax_im(spec: &Spectrum) -> Option<usize> {
    argmax_im_of(&spec.eigenvalues)
}

pub(crate) fn argmax_im_of(values: &[c64]) -> Option<usize> {
    let top = values.iter().map(|e| e.im).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return None;
    }
    let radius = values.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let tol = 1e-10 * radius.max(1.0);
    let mut best: Option<usize> = None;
    for (i, e) in values.iter().enumerate() {
        if e.im < top - tol {
            continue;
        }
        best = match best {
            Some(b) if values[b].re >= e.re => Some(b),
            _ => Some(i),
        };
    }
    best
}

/// Imaginary parts sorted in decreasing order.
pub fn im_parts_descending(spec: &Spectrum) -> Vec<f64> {
    let mut ims: Vec<f64> = spec.eigenvalues.iter().map(|e| e.im).collect();
    ims.sort_by(|a, b| b.total_cmp(a));
    ims
}

/// Largest deviation between the sorted eigenvalue multiset and the sorted
/// multiset of its complex conjugates.
pub fn conjugation_asymmetry(spec: &Spectrum) -> f64 {
    let mut a = spec.eigenvalues.clone();
    let mut b: Vec<c64> = a.iter().map(|e| e.conj()).collect();
    a.sort_by(cmp_eigenvalue);
    b.sort_by(cmp_eigenvalue);
    // matching by sorted order is fragile when real parts tie; resolve by a
    // greedy nearest-partner search inside each run of equal real parts
    greedy_multiset_distance(&a, &b)
}

fn greedy_multiset_distance(a: &[c64], b: &[c64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, y) in b.iter().enumerate() {
            if !used[j] {
                let d = (x - y).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        if best.1 != usize::MAX {
            used[best.1] = true;
            worst = worst.max(best.0);
        }
    }
    worst
}

/// Largest deviation between the sorted Im-E multiset and its negation.
pub fn im_asymmetry(spec: &Spectrum) -> f64 {
    let ims = im_parts_descending(spec);
    let n = ims.len();
    (0..n).map(|k| (ims[k] + ims[n - 1 - k]).abs()).fold(0.0, f64::max)
}

fn check_len(basis: &BasisTable, psi: &[c64]) -> Result<()> {
    if psi.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: psi.len() });
    }
    Ok(())
}

fn norm_sqr(psi: &[c64]) -> f64 {
    psi.iter().map(|v| v.norm_sqr()).sum()
}

/// `⟨(N_A − N_B)/N⟩` in the normalized state `psi`.
pub fn polarization_of(psi: &[c64], basis: &BasisTable) -> Result<f64> {
    check_len(basis, psi)?;
    let norm = norm_sqr(psi);
    if basis.particles() == 0 || norm == 0.0 {
        return Err(Error::Undefined("polarization of an empty or zero state"));
    }
    let n = basis.particles() as f64;
    let acc: f64 = psi
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (na, nb) = basis.leg_counts(i);
            v.norm_sqr() * (na as f64 - nb as f64)
        })
        .sum();
    Ok(acc / (n * norm))
}

fn edge_sites(basis: &BasisTable) -> (usize, usize) {
    let l = basis.rungs();
    (SiteIndex::new(l - 1, Leg::A).linear(l), SiteIndex::new(0, Leg::B).linear(l))
}

/// `⟨φ|n_{A,L} n_{B,1}|φ⟩ / ⟨φ|φ⟩`.
pub fn edge_correlation_of(psi: &[c64], basis: &BasisTable) -> Result<f64> {
    check_len(basis, psi)?;
    let norm = norm_sqr(psi);
    if norm == 0.0 {
        return Err(Error::Undefined("edge correlation of the zero vector"));
    }
    let (a, b) = edge_sites(basis);
    let acc: f64 = psi
        .iter()
        .zip(basis.states())
        .map(|(v, s)| v.norm_sqr() * (s.get(a) as f64) * (s.get(b) as f64))
        .sum();
    Ok(acc / norm)
}

pub fn polarization(spec: &Spectrum, n: usize, basis: &BasisTable) -> Result<f64> {
    polarization_of(&spec.right_vector(n), basis)
}

/// Right-right normalized edge correlation of eigenstate `n`.
pub fn edge_correlation(spec: &Spectrum, n: usize, basis: &BasisTable) -> Result<f64> {
    edge_correlation_of(&spec.right_vector(n), basis)
}

/// Biorthogonal expectation `⟨L_n|n_{A,L} n_{B,1}|R_n⟩` (complex in general).
pub fn edge_correlation_biorthogonal(spec: &Spectrum, n: usize, basis: &BasisTable) -> Result<c64> {
    spec.require_biorthonormal("biorthogonal expectation")?;
    let (a, b) = edge_sites(basis);
    Ok(basis
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| spec.left[(i, n)].conj() * spec.right[(i, n)] * ((s.get(a) as f64) * (s.get(b) as f64)))
        .sum())
}

/// Which expectation value to report for the edge correlation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeConvention {
    #[default]
    RightRight,
    /// Real part of the biorthogonal expectation.
    Biorthogonal,
}

pub fn edge_correlation_with(spec: &Spectrum, n: usize, basis: &BasisTable, conv: EdgeConvention) -> Result<f64> {
    match conv {
        EdgeConvention::RightRight => edge_correlation(spec, n, basis),
        EdgeConvention::Biorthogonal => edge_correlation_biorthogonal(spec, n, basis).map(|c| c.re),
    }
}

/// Histogram of `Im E` over equal-width bins.
#[derive(Clone, Debug, PartialEq)]
pub struct ImDos {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl ImDos {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        0.5 * (self.edges[k] + self.edges[k + 1])
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }
}

/// Bins `Im E` into `bins` equal intervals of `[lo, hi)`; values outside the
/// range are clamped into the end bins so that the total equals the dimension.
pub fn im_dos(spec: &Spectrum, bins: usize, range: (f64, f64)) -> Result<ImDos> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::InvalidParameter("im_dos needs at least one bin".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidParameter(format!("invalid im_dos range [{lo}, {hi})")));
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|k| lo + width * k as f64).collect();
    let mut counts = vec![0usize; bins];
    for e in &spec.eigenvalues {
        let k = ((e.im - lo) / width).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(bins - 1) };
        counts[k] += 1;
    }
    Ok(ImDos { edges, counts })
}

/// Symmetric range `[-w, w]` covering every `Im E`, with `w ≥ 1e-7`.
pub fn im_dos_auto_range(spec: &Spectrum) -> (f64, f64) {
    let w = spec.eigenvalues.iter().map(|e| e.im.abs()).fold(COMPLEX_TOL, f64::max) * (1.0 + 1e-9);
    (-w, w)
}

/// Number of runner-up eigenstates kept per grid point for continuation checks.
pub const TRACKED_RIVALS: usize = 8;

/// Per-grid-point summary used to track the max-Im eigenstate.
#[derive(Clone, Debug)]
pub struct TrackerSample {
    pub jp: f64,
    pub max_im: f64,
    pub argmax: usize,
    pub eigenvalue: c64,
    pub vector: Vec<c64>,
    pub edge_corr: f64,
    /// Right eigenvectors with the next-largest `Im E`, in decreasing order.
    pub rivals: Vec<Vec<c64>>,
}

impl TrackerSample {
    pub fn from_spectrum(jp: f64, spec: &Spectrum, basis: &BasisTable) -> Result<Self> {
        let argmax = argmax_im(spec).ok_or(Error::Undefined("empty spectrum"))?;
        let vector = spec.right_vector(argmax);
        let edge_corr = edge_correlation_of(&vector, basis)?;
        let mut order: Vec<usize> = (0..spec.dim()).filter(|&i| i != argmax).collect();
        order.sort_by(|&a, &b| spec.eigenvalues[b].im.total_cmp(&spec.eigenvalues[a].im).then(a.cmp(&b)));
        let rivals = order.into_iter().take(TRACKED_RIVALS).map(|i| spec.right_vector(i)).collect();
        Ok(Self { jp, max_im: spec.eigenvalues[argmax].im, argmax, eigenvalue: spec.eigenvalues[argmax], vector, edge_corr, rivals })
    }
}

/// Which rule flagged an identity change.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detector {
    /// Consecutive argmax eigenvectors overlap less than [`IDENTITY_OVERLAP`].
    Overlap,
    /// The previous argmax state continues as a runner-up that is much closer
    /// to it than the new argmax.
    Continuation,
}

/// A grid interval across which the max-Im eigenstate changes identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    /// Index of the left grid point of the interval.
    pub interval: usize,
    pub jp_lo: f64,
    pub jp_hi: f64,
    /// `|⟨R_max(lo)|R_max(hi)⟩|`.
    pub overlap: f64,
    /// Best overlap of `R_max(lo)` with a runner-up at `hi`.
    pub continuation_overlap: f64,
    pub detector: Detector,
    pub edge_corr_lo: f64,
    pub edge_corr_hi: f64,
    /// Finite-difference slope of Max Im E on the neighbouring intervals.
    pub slope_before: Option<f64>,
    pub slope_after: Option<f64>,
}

impl Crossing {
    pub fn edge_jump(&self) -> f64 {
        (self.edge_corr_hi - self.edge_corr_lo).abs()
    }

    /// `max(|s₋|, |s₊|) / min(|s₋|, |s₊|)`, infinite on a sign change.
    pub fn slope_ratio(&self) -> Option<f64> {
        let (a, b) = (self.slope_before?, self.slope_after?);
        if a.signum() != b.signum() && a != 0.0 && b != 0.0 {
            return Some(f64::INFINITY);
        }
        let (lo, hi) = if a.abs() < b.abs() { (a.abs(), b.abs()) } else { (b.abs(), a.abs()) };
        Some(if lo == 0.0 { f64::INFINITY } else { hi / lo })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingReport {
    /// Finite-difference derivative of Max Im E per grid interval.
    pub slopes: Vec<f64>,
    pub crossings: Vec<Crossing>,
}

/// Overlap below which consecutive argmax eigenvectors count as different states.
pub const IDENTITY_OVERLAP: f64 = 0.5;
/// A runner-up continues the old argmax state when its distance `1 − overlap`
/// is below this fraction of the new argmax's distance.
pub const CONTINUATION_RATIO: f64 = 0.1;

/// Follows the max-Im eigenstate along an increasing `J_p` grid.
///
/// Eigenvectors of a non-normal matrix need not be orthogonal, so two distinct
/// states can overlap by more than [`IDENTITY_OVERLAP`]. Besides the overlap
/// rule, an interval is therefore also flagged when the old argmax state is
/// found again among the runner-ups with a far better overlap.
pub fn max_im_state_tracker(samples: &[TrackerSample]) -> Result<CrossingReport> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter("tracker needs at least 3 grid points".into()));
    }
    if samples.windows(2).any(|w| !(w[1].jp > w[0].jp)) {
        return Err(Error::InvalidParameter("tracker grid must be strictly increasing".into()));
    }
    let slopes: Vec<f64> = samples.windows(2).map(|w| (w[1].max_im - w[0].max_im) / (w[1].jp - w[0].jp)).collect();
    let mut crossings = Vec::new();
    for (k, w) in samples.windows(2).enumerate() {
        let overlap = overlap_abs(&w[0].vector, &w[1].vector);
        let continuation_overlap = w[1].rivals.iter().map(|r| overlap_abs(&w[0].vector, r)).fold(0.0, f64::max);
        let detector = if overlap < IDENTITY_OVERLAP {
            Some(Detector::Overlap)
        } else if 1.0 - continuation_overlap < CONTINUATION_RATIO * (1.0 - overlap) {
            Some(Detector::Continuation)
        } else {
            None
        };
        if let Some(detector) = detector {
            crossings.push(Crossing {
                interval: k,
                jp_lo: w[0].jp,
                jp_hi: w[1].jp,
                overlap,
                continuation_overlap,
                detector,
                edge_corr_lo: w[0].edge_corr,
                edge_corr_hi: w[1].edge_corr,
                slope_before: k.checked_sub(1).map(|p| slopes[p]),
                slope_after: slopes.get(k + 1).copied(),
            });
        }
    }
    Ok(CrossingReport { slopes, crossings })
}

/// `|⟨a|b⟩| / (|a| |b|)`.
pub fn overlap_abs(a: &[c64], b: &[c64]) -> f64 {
    let dot: c64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na = norm_sqr(a).sqrt();
    let nb = norm_sqr(b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot.norm() / (na * nb)
    }
}

/// Writes `index,re,im,polarization,edge_corr`, one row per eigenvalue.
pub fn write_spectrum_csv<W: Write>(spec: &Spectrum, basis: &BasisTable, mut w: W) -> io::Result<()> {
    writeln!(w, "index,re,im,polarization,edge_corr")?;
    for (n, e) in spec.eigenvalues.iter().enumerate() {
        let v = spec.right_vector(n);
        let p = polarization_of(&v, basis).unwrap_or(f64::NAN);
        let c = edge_correlation_of(&v, basis).unwrap_or(f64::NAN);
        writeln!(w, "{n},{:e},{:e},{:e},{:e}", e.re, e.im, p, c)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_full, ModelParams};
    use crate::fock::OccupationState;
    use std::f64::consts::PI;

    fn model(l: usize, n: usize) -> (ModelParams, BasisTable) {
        let p = ModelParams::reference(l, n);
        let b = p.basis().unwrap();
        (p, b)
    }

    #[test]
    fn hermitian_spectrum_is_real() {
        let (p, b) = model(3, 2);
        let h = build_full(&p.with_alpha(0.0).with_jp(0.3), &b).unwrap();
        let s = eig(&h.entries).unwrap();
        assert!(s.eigenvalues.iter().all(|e| e.im.abs() <= 1e-10));
        assert_eq!(count_complex(&s, COMPLEX_TOL), 0);
        assert!(max_im(&s) <= 1e-10);
    }

    #[test]
    fn biorthonormal_and_reconstructs() {
        let (p, b) = model(3, 2);
        for theta in [0.0, 0.4 * PI, PI] {
            let h = build_full(&p.clone().with_theta(theta).with_jp(0.2), &b).unwrap();
            let s = eig(&h.entries).unwrap();
            assert!(!s.defective);
            assert!(s.biorthogonality_defect() <= 1e-10, "{}", s.biorthogonality_defect());
            assert!((s.reconstruct() - &h.entries).norm_max() <= 1e-8);
            let dim = s.dim() as f64;
            assert!((s.trace() - h.trace()).norm() <= 1e-8 * dim);
            assert!(s.trace().im.abs() <= 1e-8 * dim);
        }
    }

    #[test]
    fn sorted_and_unit_norm() {
        let (p, b) = model(2, 2);
        let h = build_full(&p.with_theta(0.3).with_jp(0.1), &b).unwrap();
        let s = eig(&h.entries).unwrap();
        for w in s.eigenvalues.windows(2) {
            assert_ne!(cmp_eigenvalue(&w[0], &w[1]), Ordering::Greater);
        }
        for n in 0..s.dim() {
            assert!((s.right.col(n).norm_l2() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_identity_is_biorthonormal() {
        let m = Mat::<c64>::identity(5, 5);
        let s = eig(&m).unwrap();
        assert!(!s.defective);
        assert!(s.biorthogonality_defect() < 1e-12);
    }

    #[test]
    fn jordan_block_is_flagged() {
        let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        let s = eig(&m).unwrap();
        assert!(s.defective);
        assert!(s.condition.is_infinite());
        assert!(matches!(s.coefficients(&[c64::new(1.0, 0.0); 2]), Err(Error::DefectiveSpectrum(_))));
    }

    #[test]
    fn decoupled_legs_are_gauge_equivalent() {
        let (p, b) = model(3, 2);
        let reference = eig(&build_full(&p.clone().with_alpha(0.0).with_theta(0.7), &b).unwrap().entries).unwrap();
        for alpha in [-0.5, 0.2] {
            let s = eig(&build_full(&p.clone().with_alpha(alpha).with_theta(0.7), &b).unwrap().entries).unwrap();
            for (x, y) in s.eigenvalues.iter().zip(&reference.eigenvalues) {
                assert!((x - y).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn polarization_and_edge_examples() {
        let b = BasisTable::build(3, 2, 2).unwrap();
        let st = |v: &[u8]| b.index_of(&OccupationState::new(v.to_vec())).unwrap().unwrap();
        let mut psi = vec![c64::new(0.0, 0.0); b.dim()];
        psi[st(&[1, 1, 0, 0, 0, 0])] = c64::new(1.0, 0.0);
        assert_eq!(polarization_of(&psi, &b).unwrap(), 1.0);
        assert_eq!(edge_correlation_of(&psi, &b).unwrap(), 0.0);

        let mut psi = vec![c64::new(0.0, 0.0); b.dim()];
        psi[st(&[0, 0, 1, 1, 0, 0])] = c64::new(0.0, 3.0);
        assert_eq!(edge_correlation_of(&psi, &b).unwrap(), 1.0);
        assert_eq!(polarization_of(&psi, &b).unwrap(), 0.0);

        let b1 = BasisTable::build(2, 1, 1).unwrap();
        let s = |v: &[u8]| b1.index_of(&OccupationState::new(v.to_vec())).unwrap().unwrap();
        let mut psi = vec![c64::new(0.0, 0.0); b1.dim()];
        psi[s(&[1, 0, 0, 0])] = c64::new(1.0, 0.0);
        psi[s(&[0, 0, 1, 0])] = c64::new(0.0, -1.0);
        assert!(polarization_of(&psi, &b1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn large_imbalance_puts_lowest_states_on_b() {
        let p = ModelParams::reference(3, 2).with_interaction(16.0, 40.0);
        let b = p.basis().unwrap();
        let s = eig(&build_full(&p, &b).unwrap().entries).unwrap();
        assert!(polarization(&s, 0, &b).unwrap() < -0.99);
    }

    #[test]
    fn im_dos_examples() {
        let (p, b) = model(3, 2);
        let s = eig(&build_full(&p.with_alpha(0.0), &b).unwrap().entries).unwrap();
        let dos = im_dos(&s, 5, (-1.0, 1.0)).unwrap();
        assert_eq!(dos.total(), s.dim());
        assert_eq!(dos.counts, vec![0, 0, s.dim(), 0, 0]);
        assert!(im_dos(&s, 0, (-1.0, 1.0)).is_err());
        assert!(im_dos(&s, 3, (1.0, 1.0)).is_err());
    }

    #[test]
    fn argmax_tie_breaks() {
        let v = [c64::new(1.0, 0.5), c64::new(2.0, 0.5), c64::new(3.0, 0.1), c64::new(2.0, 0.5)];
        assert_eq!(argmax_im_of(&v), Some(1));
        assert_eq!(argmax_im_of(&[]), None);
    }

    #[test]
    fn tracker_ignores_constant_input() {
        let v = vec![c64::new(1.0, 0.0), c64::new(0.0, 0.0)];
        let samples: Vec<TrackerSample> = (0..4)
            .map(|k| TrackerSample {
                jp: k as f64,
                max_im: 0.3,
                argmax: 0,
                eigenvalue: c64::new(0.0, 0.3),
                vector: v.clone(),
                edge_corr: 0.0,
                rivals: vec![],
            })
            .collect();
        let r = max_im_state_tracker(&samples).unwrap();
        assert!(r.crossings.is_empty());
        assert!(r.slopes.iter().all(|&d| d == 0.0));
        assert!(max_im_state_tracker(&samples[..2]).is_err());
    }

    #[test]
    fn tracker_reports_identity_change() {
        let e = |k: usize| {
            let mut v = vec![c64::new(0.0, 0.0); 3];
            v[k] = c64::new(1.0, 0.0);
            v
        };
        let ims = [0.1, 0.2, 0.3, 0.31, 0.32];
        let samples: Vec<TrackerSample> = ims
            .iter()
            .enumerate()
            .map(|(k, &m)| TrackerSample {
                jp: k as f64,
                max_im: m,
                argmax: 0,
                eigenvalue: c64::new(0.0, m),
                vector: e(if k < 3 { 0 } else { 2 }),
                edge_corr: if k < 3 { 0.0 } else { 0.4 },
                rivals: vec![e(1)],
            })
            .collect();
        let r = max_im_state_tracker(&samples).unwrap();
        assert_eq!(r.crossings.len(), 1);
        let c = &r.crossings[0];
        assert_eq!(c.detector, Detector::Overlap);
        assert_eq!((c.jp_lo, c.jp_hi), (2.0, 3.0));
        assert!((c.edge_jump() - 0.4).abs() < 1e-15);
        assert!(c.slope_ratio().unwrap() > 3.0);
    }

    #[test]
    fn tracker_follows_non_orthogonal_swap() {
        // new argmax overlaps the old one by 0.8, but the old state survives
        // unchanged as the runner-up
        let old = vec![c64::new(1.0, 0.0), c64::new(0.0, 0.0)];
        let new = vec![c64::new(0.8, 0.0), c64::new(0.6, 0.0)];
        let samples: Vec<TrackerSample> = (0..4)
            .map(|k| TrackerSample {
                jp: k as f64,
                max_im: k as f64,
                argmax: 0,
                eigenvalue: c64::new(0.0, k as f64),
                vector: if k < 2 { old.clone() } else { new.clone() },
                edge_corr: 0.0,
                rivals: if k < 2 { vec![new.clone()] } else { vec![old.clone()] },
            })
            .collect();
        let r = max_im_state_tracker(&samples).unwrap();
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].interval, 1);
        assert_eq!(r.crossings[0].detector, Detector::Continuation);
    }

    #[test]
    fn csv_has_one_row_per_eigenvalue() {
        let (p, b) = model(2, 2);
        let s = eig(&build_full(&p, &b).unwrap().entries).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &b, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), s.dim() + 1);
        assert!(text.starts_with("index,re,im,polarization,edge_corr\n"));
    }
}
