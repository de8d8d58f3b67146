//! Brillouin–Wigner perturbation theory around the interaction-dominated limit.
//!
//! `H0` is the diagonal onsite part (Hubbard plus staggered potential) and `V`
//! collects all hopping. Second-order effective matrices are built by explicit
//! summation over the complement of a degenerate manifold; higher orders are
//! probed through single virtual paths read off the built matrices.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::fock::{BasisTable, OccupationState};
use crate::hamiltonian::{build_full, HMatrix, ModelParams, TermTag};
use crate::spectral::{eig, max_im};

/// Relative tolerance for treating two `H0` values as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Threshold on Max Im E that marks the onset of complex eigenvalues.
pub const ONSET_TOL: f64 = 1e-7;

/// Which hopping terms enter `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VPart {
    Full,
    IntraOnly,
    InterOnly,
}

/// `H = H0 + V` with `H0` diagonal.
#[derive(Clone, Debug)]
pub struct H0VSplit {
    pub h0: Vec<f64>,
    pub v_intra_a: Mat<c64>,
    pub v_intra_b: Mat<c64>,
    pub v_inter: Mat<c64>,
}

impl H0VSplit {
    pub fn from_hamiltonian(h: &HMatrix) -> Self {
        Self {
            h0: h.onsite.clone(),
            v_intra_a: h.term(TermTag::IntraA),
            v_intra_b: h.term(TermTag::IntraB),
            v_inter: h.term(TermTag::Inter),
        }
    }

    pub fn dim(&self) -> usize {
        self.h0.len()
    }

    pub fn v(&self, part: VPart) -> Mat<c64> {
        match part {
            VPart::Full => &self.v_intra_a + &self.v_intra_b + &self.v_inter,
            VPart::IntraOnly => &self.v_intra_a + &self.v_intra_b,
            VPart::InterOnly => self.v_inter.clone(),
        }
    }

    /// Hopping matrix of a single term; `None` for the onsite tag.
    pub fn term(&self, tag: TermTag) -> Option<&Mat<c64>> {
        match tag {
            TermTag::IntraA => Some(&self.v_intra_a),
            TermTag::IntraB => Some(&self.v_intra_b),
            TermTag::Inter => Some(&self.v_inter),
            TermTag::Onsite => None,
        }
    }

    /// `H0 + V` as a dense matrix.
    pub fn recombine(&self) -> Mat<c64> {
        let mut m = self.v(VPart::Full);
        for (i, &d) in self.h0.iter().enumerate() {
            m[(i, i)] += c64::new(d, 0.0);
        }
        m
    }
}

pub fn split(params: &ModelParams, basis: &BasisTable) -> Result<H0VSplit> {
    Ok(H0VSplit::from_hamiltonian(&build_full(params, basis)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectorKind {
    BbScattering,
    AbScattering,
    AaScattering,
    Custom,
}

/// A set of basis indices defining the model space `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorProjector {
    pub kind: SectorKind,
    pub indices: Vec<usize>,
}

impl SectorProjector {
    /// Singly occupied states with exactly `n_a` particles on leg A.
    fn scattering(basis: &BasisTable, n_a: usize, kind: SectorKind) -> Result<Self> {
        if n_a > basis.particles() {
            return Err(Error::SectorMismatch(format!("{n_a} A particles exceed N={}", basis.particles())));
        }
        let indices: Vec<usize> = (0..basis.dim())
            .filter(|&i| basis.leg_counts(i).0 == n_a && basis.state(i).occupations().iter().all(|&n| n <= 1))
            .collect();
        if indices.is_empty() {
            return Err(Error::SectorMismatch("scattering manifold is empty".into()));
        }
        Ok(Self { kind, indices })
    }

    /// All particles on leg B, no site doubly occupied.
    pub fn bb_scattering(basis: &BasisTable) -> Result<Self> {
        Self::scattering(basis, 0, SectorKind::BbScattering)
    }

    /// All particles on leg A, no site doubly occupied.
    pub fn aa_scattering(basis: &BasisTable) -> Result<Self> {
        Self::scattering(basis, basis.particles(), SectorKind::AaScattering)
    }

    /// One particle on each leg (two-particle sector only).
    pub fn ab_scattering(basis: &BasisTable) -> Result<Self> {
        if basis.particles() != 2 {
            return Err(Error::SectorMismatch("AB scattering manifold needs N = 2".into()));
        }
        Self::scattering(basis, 1, SectorKind::AbScattering)
    }

    pub fn custom(basis: &BasisTable, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= basis.dim()) {
            return Err(Error::SiteOutOfRange { site: bad, sites: basis.dim() });
        }
        if indices.is_empty() {
            return Err(Error::SectorMismatch("empty custom manifold".into()));
        }
        Ok(Self { kind: SectorKind::Custom, indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Position of basis index `i` inside the manifold.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.indices.binary_search(&i).ok()
    }

    /// Basis indices outside the manifold.
    pub fn complement(&self, dim: usize) -> Vec<usize> {
        (0..dim).filter(|&i| !self.contains(i)).collect()
    }

    /// `P M P` as a `len × len` matrix.
    pub fn restrict(&self, m: &Mat<c64>) -> Mat<c64> {
        let k = self.len();
        Mat::from_fn(k, k, |a, b| m[(self.indices[a], self.indices[b])])
    }
}

/// Common `H0` value of the manifold, or an error when it is not degenerate.
pub fn manifold_energy(split: &H0VSplit, p: &SectorProjector) -> Result<f64> {
    let values: Vec<f64> = p.indices.iter().map(|&i| split.h0[i]).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if spread > DEGENERACY_TOL * lo.abs().max(1.0) {
        return Err(Error::NonDegenerateManifold { spread });
    }
    Ok(lo)
}

/// Second-order effective matrix on `P`.
#[derive(Clone, Debug)]
pub struct SecondOrder {
    pub e0: f64,
    /// `−P V Q (H0 − E0)^{-1} Q V P`, indexed by manifold position.
    pub matrix: Mat<c64>,
}

impl SecondOrder {
    /// Element between basis indices `f` and `i` of the manifold.
    pub fn element(&self, p: &SectorProjector, f: usize, i: usize) -> Option<c64> {
        Some(self.matrix[(p.position(f)?, p.position(i)?)])
    }
}

pub fn bw_second_order(split: &H0VSplit, p: &SectorProjector, part: VPart) -> Result<SecondOrder> {
    let e0 = manifold_energy(split, p)?;
    let v = split.v(part);
    let k = p.len();
    let mut matrix = Mat::<c64>::zeros(k, k);
    let zero = c64::new(0.0, 0.0);
    for m in p.complement(split.dim()) {
        let denom = e0 - split.h0[m];
        let couples = p.indices.iter().any(|&i| v[(m, i)] != zero);
        if !couples {
            continue;
        }
        if denom.abs() <= DEGENERACY_TOL * e0.abs().max(1.0) {
            return Err(Error::SingularManifold { state: m });
        }
        for (b, &i) in p.indices.iter().enumerate() {
            let vmi = v[(m, i)];
            if vmi == zero {
                continue;
            }
            for (a, &f) in p.indices.iter().enumerate() {
                let vfm = v[(f, m)];
                if vfm != zero {
                    matrix[(a, b)] += vfm * vmi / denom;
                }
            }
        }
    }
    Ok(SecondOrder { e0, matrix })
}

/// Closed-form AB exchange element `(J_p²/2μ)(e^{−iθ·sgn} − e^{iθ·sgn})`.
pub fn ab_exchange_formula(jp: f64, mu: f64, theta: f64, sgn: i32) -> Result<c64> {
    if mu == 0.0 {
        return Err(Error::Undefined("exchange formula at mu = 0"));
    }
    let s = sgn.signum() as f64;
    Ok((c64::cis(-theta * s) - c64::cis(theta * s)) * (jp * jp / (2.0 * mu)))
}

/// One step `source → target` generated by the hopping term `tag`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub tag: TermTag,
    pub source: usize,
    pub target: usize,
}

/// A chain of vertices from an initial to a final manifold state.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSpec {
    pub vertices: Vec<Vertex>,
}

impl PathSpec {
    /// Builds a path through the listed occupation states, with `tags[i]`
    /// generating the step `states[i] → states[i+1]`.
    pub fn through(basis: &BasisTable, states: &[OccupationState], tags: &[TermTag]) -> Result<Self> {
        if states.len() != tags.len() + 1 {
            return Err(Error::DimensionMismatch { expected: tags.len() + 1, found: states.len() });
        }
        let idx: Vec<usize> = states
            .iter()
            .map(|s| basis.index_of(s)?.ok_or_else(|| Error::SectorMismatch(format!("{s} is not in the basis"))))
            .collect::<Result<_>>()?;
        let vertices = tags
            .iter()
            .enumerate()
            .map(|(k, &tag)| Vertex { tag, source: idx[k], target: idx[k + 1] })
            .collect();
        Ok(Self { vertices })
    }

    pub fn initial(&self) -> Option<usize> {
        self.vertices.first().map(|v| v.source)
    }

    pub fn terminal(&self) -> Option<usize> {
        self.vertices.last().map(|v| v.target)
    }
}

/// Evaluated path with its per-vertex factors.
#[derive(Clone, Debug, PartialEq)]
pub struct PathAmplitude {
    pub value: c64,
    pub elements: Vec<c64>,
    pub denominators: Vec<f64>,
}

/// `Π ⟨target|V_tag|source⟩ / Π (E0 − H0_m)` over the intermediate states,
/// with `E0` the `H0` value of the initial state.
pub fn path_amplitude(split: &H0VSplit, path: &PathSpec) -> Result<PathAmplitude> {
    let first = path.vertices.first().ok_or(Error::Undefined("empty path"))?;
    let e0 = split.h0[first.source];
    let mut elements = Vec::with_capacity(path.vertices.len());
    let mut denominators = Vec::with_capacity(path.vertices.len().saturating_sub(1));
    let mut value = c64::new(1.0, 0.0);
    for (k, v) in path.vertices.iter().enumerate() {
        if k > 0 && path.vertices[k - 1].target != v.source {
            return Err(Error::BrokenPath { vertex: k });
        }
        if v.source >= split.dim() || v.target >= split.dim() {
            return Err(Error::SiteOutOfRange { site: v.source.max(v.target), sites: split.dim() });
        }
        let term = split.term(v.tag).ok_or(Error::ZeroVertex { vertex: k })?;
        let element = term[(v.target, v.source)];
        if element == c64::new(0.0, 0.0) {
            return Err(Error::ZeroVertex { vertex: k });
        }
        elements.push(element);
        value *= element;
        if k + 1 < path.vertices.len() {
            let denom = e0 - split.h0[v.target];
            if denom.abs() <= DEGENERACY_TOL * e0.abs().max(1.0) {
                return Err(Error::ZeroDenominator { vertex: k });
            }
            denominators.push(denom);
            value /= denom;
        }
    }
    Ok(PathAmplitude { value, elements, denominators })
}

/// Closed form of the fourth-order plaquette path
/// `−(J² J_p² / 8μ³) e^{α_B − α_A} e^{iθ}`.
pub fn plaquette_formula(params: &ModelParams) -> c64 {
    let a_b = -params.alpha;
    let a_a = params.alpha;
    let mag = -(params.j * params.j * params.jp * params.jp) / (8.0 * params.mu.powi(3)) * (a_b - a_a).exp();
    c64::cis(params.theta) * mag
}

/// The plaquette path on rungs `rung, rung+1`:
/// `(j,B; j+1,B) → (j,A; j+1,B) → (j,A; j,B) → (j+1,A; j,B) → (j+1,B; j,B)`.
pub fn plaquette_path(basis: &BasisTable, rung: usize) -> Result<PathSpec> {
    let l = basis.rungs();
    if basis.particles() != 2 || rung + 1 >= l {
        return Err(Error::InvalidParameter(format!("plaquette path needs N = 2 and rung + 1 < L (rung {rung}, L {l})")));
    }
    let state = |a: &[usize], b: &[usize]| {
        let mut occ = vec![0u8; 2 * l];
        for &r in a {
            occ[r] += 1;
        }
        for &r in b {
            occ[l + r] += 1;
        }
        OccupationState::new(occ)
    };
    let (j, k) = (rung, rung + 1);
    let states = [state(&[], &[j, k]), state(&[j], &[k]), state(&[j], &[j]), state(&[k], &[j]), state(&[], &[j, k])];
    PathSpec::through(basis, &states, &[TermTag::Inter, TermTag::IntraB, TermTag::IntraA, TermTag::Inter])
}

/// Outcome of an onset search.
#[derive(Clone, Debug, PartialEq)]
pub enum Onset {
    /// Smallest `J_p` with Max Im E above threshold, refined to `bracket`.
    Found { jp_star: f64, bracket: (f64, f64) },
    NotFound,
}

impl Onset {
    pub fn jp_star(&self) -> Option<f64> {
        match self {
            Onset::Found { jp_star, .. } => Some(*jp_star),
            Onset::NotFound => None,
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::InvalidParameter(format!("log grid needs 0 < lo < hi and n >= 2 (got {lo}, {hi}, {n})")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect())
}

/// Max Im E of the model at coupling `jp`.
pub fn max_im_at(params: &ModelParams, basis: &BasisTable, jp: f64) -> Result<f64> {
    let h = build_full(&params.clone().with_jp(jp), basis)?;
    Ok(max_im(&eig(&h.entries)?))
}

/// Scans an increasing `J_p` grid for the first point with Max Im E above
/// [`ONSET_TOL`], then bisects (geometrically) the preceding interval until
/// its relative width is at most 10%.
pub fn onset_threshold(params: &ModelParams, basis: &BasisTable, grid: &[f64]) -> Result<Onset> {
    onset_with(grid, |jp| max_im_at(params, basis, jp))
}

/// [`onset_threshold`] with a caller-supplied Max Im E evaluator.
pub fn onset_with<F>(grid: &[f64], mut max_im_of: F) -> Result<Onset>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("onset grid must be positive and strictly increasing".into()));
    }
    let mut prev: Option<f64> = None;
    for &jp in grid {
        if max_im_of(jp)? > ONSET_TOL {
            let Some(mut lo) = prev else {
                return Ok(Onset::Found { jp_star: jp, bracket: (jp, jp) });
            };
            let mut hi = jp;
            while hi / lo - 1.0 > 0.1 {
                let mid = (lo * hi).sqrt();
                if max_im_of(mid)? > ONSET_TOL {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Onset::Found { jp_star: hi, bracket: (lo, hi) });
        }
        prev = Some(jp);
    }
    Ok(Onset::NotFound)
}

/// A run of equal values in a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Plateau {
    pub value: usize,
    pub start: usize,
    pub len: usize,
}

/// Runs of at least `min_len` equal consecutive values.
pub fn plateaus(values: &[usize], min_len: usize) -> Vec<Plateau> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] != values[start] {
            if k - start >= min_len.max(1) {
                out.push(Plateau { value: values[start], start, len: k - start });
            }
            start = k;
        }
    }
    out
}
