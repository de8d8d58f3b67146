//! Many-body Hamiltonian of the non-reciprocal anyon-Hubbard ladder in the
//! bosonic Fock basis.
//!
//! Two independent constructions are provided: [`build_full`] applies the
//! effective bosonic rules with occupation-dependent Peierls phases directly,
//! while [`build_full_via_anyons`] multiplies Jordan–Wigner-dressed operator
//! matrices. Both follow right-to-left operator application.

use std::f64::consts::{LN_2, PI, TAU};
use std::fmt;
use std::io::{self, BufRead, Write};

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::fock::{BasisTable, Leg, OccupationState, SiteIndex};
use crate::operators::anyon_matrix;

/// All Hamiltonian couplings plus the sector (`l` rungs, `n` particles) and
/// the per-site occupation cap.
///
/// Leg A carries non-reciprocity `+alpha`, leg B `-alpha`; the staggered
/// potential is `+mu` on A and `-mu` on B.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub l: usize,
    pub n: usize,
    pub j: f64,
    pub alpha: f64,
    pub jp: f64,
    pub u: f64,
    pub mu: f64,
    pub theta: f64,
    pub n_cap: u8,
}

impl ModelParams {
    /// Reference couplings: `J = e^α = 1/√2`, `U = 16`, `μ = 4`, `J_p = 0`,
    /// bosons, cap equal to the particle number.
    pub fn reference(l: usize, n: usize) -> Self {
        Self {
            l,
            n,
            j: std::f64::consts::FRAC_1_SQRT_2,
            alpha: -0.5 * LN_2,
            jp: 0.0,
            u: 16.0,
            mu: 4.0,
            theta: 0.0,
            n_cap: n.min(u8::MAX as usize) as u8,
        }
    }

    pub fn with_jp(mut self, jp: f64) -> Self {
        self.jp = jp;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_interaction(mut self, u: f64, mu: f64) -> Self {
        self.u = u;
        self.mu = mu;
        self
    }

    /// Checks ranges and returns a copy with `theta` reduced to `[0, 2π)`.
    pub fn validated(&self) -> Result<Self> {
        if self.l == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if self.n_cap == 0 {
            return Err(Error::InvalidParameter("n_cap must be at least 1".into()));
        }
        for (name, v) in [
            ("J", self.j),
            ("alpha", self.alpha),
            ("Jp", self.jp),
            ("U", self.u),
            ("mu", self.mu),
            ("theta", self.theta),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        let mut out = self.clone();
        out.theta = self.theta.rem_euclid(TAU);
        if out.theta >= TAU {
            out.theta = 0.0;
        }
        Ok(out)
    }

    /// Non-reciprocity exponent of a leg.
    pub fn alpha_of(&self, leg: Leg) -> f64 {
        leg.sign() * self.alpha
    }

    pub fn basis(&self) -> Result<BasisTable> {
        BasisTable::build(self.l, self.n, self.n_cap)
    }

    /// θ expressed in units of π, for labels.
    pub fn theta_over_pi(&self) -> f64 {
        self.theta / PI
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L={} N={} J={:?} alpha={:?} Jp={:?} U={:?} mu={:?} theta={:?} n_cap={}",
            self.l, self.n, self.j, self.alpha, self.jp, self.u, self.mu, self.theta, self.n_cap
        )
    }
}

/// Sparse list of `(row, col, value)` entries of one Hamiltonian term.
#[derive(Clone, Debug, Default)]
pub struct Term {
    pub entries: Vec<(usize, usize, c64)>,
}

impl Term {
    pub fn to_dense(&self, dim: usize) -> Mat<c64> {
        let mut m = Mat::zeros(dim, dim);
        self.add_to(&mut m);
        m
    }

    pub fn add_to(&self, m: &mut Mat<c64>) {
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
    }

    fn push(&mut self, row: usize, col: usize, value: c64) {
        if value != c64::new(0.0, 0.0) {
            self.entries.push((row, col, value));
        }
    }
}

/// Identifies a retained sub-Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TermTag {
    IntraA,
    IntraB,
    Inter,
    Onsite,
}

impl TermTag {
    pub const ALL: [TermTag; 4] = [TermTag::IntraA, TermTag::IntraB, TermTag::Inter, TermTag::Onsite];

    pub fn name(self) -> &'static str {
        match self {
            TermTag::IntraA => "intra_A",
            TermTag::IntraB => "intra_B",
            TermTag::Inter => "inter",
            TermTag::Onsite => "onsite",
        }
    }
}

/// Dense Hamiltonian with its additive terms kept alongside.
#[derive(Clone, Debug)]
pub struct HMatrix {
    pub params: ModelParams,
    pub entries: Mat<c64>,
    pub intra_a: Term,
    pub intra_b: Term,
    pub inter: Term,
    /// Diagonal of the onsite term (real).
    pub onsite: Vec<f64>,
}

impl HMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn term(&self, tag: TermTag) -> Mat<c64> {
        let dim = self.dim();
        match tag {
            TermTag::IntraA => self.intra_a.to_dense(dim),
            TermTag::IntraB => self.intra_b.to_dense(dim),
            TermTag::Inter => self.inter.to_dense(dim),
            TermTag::Onsite => Mat::from_fn(dim, dim, |i, j| {
                if i == j {
                    c64::new(self.onsite[i], 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// Sum of the selected terms as a dense matrix.
    pub fn sum_of(&self, tags: &[TermTag]) -> Mat<c64> {
        let dim = self.dim();
        let mut m = Mat::zeros(dim, dim);
        for tag in tags {
            match tag {
                TermTag::IntraA => self.intra_a.add_to(&mut m),
                TermTag::IntraB => self.intra_b.add_to(&mut m),
                TermTag::Inter => self.inter.add_to(&mut m),
                TermTag::Onsite => {
                    for (i, &d) in self.onsite.iter().enumerate() {
                        m[(i, i)] += c64::new(d, 0.0);
                    }
                }
            }
        }
        m
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }
}

fn check_basis(params: &ModelParams, basis: &BasisTable) -> Result<()> {
    if basis.rungs() != params.l || basis.particles() != params.n || basis.n_cap() != params.n_cap {
        return Err(Error::SectorMismatch(format!(
            "basis (L={}, N={}, cap={}) does not match parameters (L={}, N={}, cap={})",
            basis.rungs(),
            basis.particles(),
            basis.n_cap(),
            params.l,
            params.n,
            params.n_cap
        )));
    }
    Ok(())
}

fn push_target(term: &mut Term, basis: &BasisTable, target: &OccupationState, col: usize, value: c64) {
    debug_assert_eq!(target.particle_count(), basis.particles());
    if let Some(row) = basis.find(target) {
        term.push(row, col, value);
    }
}

/// Intra-leg hopping on `leg`:
/// `−J Σ_j [e^{α_σ} b†_j e^{−iθ n_j} b_{j+1} + e^{−α_σ} b†_{j+1} e^{iθ n_j} b_j]`.
pub fn build_intra(params: &ModelParams, basis: &BasisTable, leg: Leg) -> Result<Term> {
    check_basis(params, basis)?;
    let l = params.l;
    let a = params.alpha_of(leg);
    let left = -params.j * a.exp();
    let right = -params.j * (-a).exp();
    let theta = params.theta;
    let mut term = Term::default();
    for (col, s) in basis.states().iter().enumerate() {
        for rung in 0..l.saturating_sub(1) {
            let p = SiteIndex::new(rung, leg).linear(l);
            let q = SiteIndex::new(rung + 1, leg).linear(l);
            // b†_p e^{−iθ n_p} b_q
            let nq = s.get(q);
            if nq > 0 {
                let mut t = s.clone();
                t.set(q, nq - 1);
                let np = t.get(p);
                let phase = c64::cis(-theta * np as f64);
                t.set(p, np + 1);
                let amp = (nq as f64).sqrt() * (np as f64 + 1.0).sqrt();
                push_target(&mut term, basis, &t, col, phase * (left * amp));
            }
            // b†_q e^{iθ n_p} b_p, n_p read after the annihilation
            let np = s.get(p);
            if np > 0 {
                let mut t = s.clone();
                t.set(p, np - 1);
                let phase = c64::cis(theta * (np - 1) as f64);
                let nq = t.get(q);
                t.set(q, nq + 1);
                let amp = (np as f64).sqrt() * (nq as f64 + 1.0).sqrt();
                push_target(&mut term, basis, &t, col, phase * (right * amp));
            }
        }
    }
    Ok(term)
}

/// `Φ_j = Σ_{k≥j} n_{k,A} + Σ_{k<j} n_{k,B}` on state `s`.
pub fn peierls_string(s: &OccupationState, rung: usize, l: usize) -> usize {
    let occ = s.occupations();
    let a: usize = occ[rung..l].iter().map(|&n| n as usize).sum();
    let b: usize = occ[l..l + rung].iter().map(|&n| n as usize).sum();
    a + b
}

/// Rung coupling `J_p Σ_j [e^{iθΦ_j} b†_{j,B} b_{j,A} + b†_{j,A} b_{j,B} e^{−iθΦ_j}]`.
///
/// In the first term the phase is leftmost and reads the post-hop state; in
/// the second it is rightmost and reads the pre-hop state.
pub fn build_inter(params: &ModelParams, basis: &BasisTable) -> Result<Term> {
    check_basis(params, basis)?;
    let l = params.l;
    let theta = params.theta;
    let jp = params.jp;
    let mut term = Term::default();
    for (col, s) in basis.states().iter().enumerate() {
        for rung in 0..l {
            let pa = SiteIndex::new(rung, Leg::A).linear(l);
            let pb = SiteIndex::new(rung, Leg::B).linear(l);
            let na = s.get(pa);
            let nb = s.get(pb);
            if na > 0 {
                let mut t = s.clone();
                t.set(pa, na - 1);
                t.set(pb, nb + 1);
                let phi = peierls_string(&t, rung, l) as f64;
                let amp = (na as f64).sqrt() * (nb as f64 + 1.0).sqrt();
                push_target(&mut term, basis, &t, col, c64::cis(theta * phi) * (jp * amp));
            }
            if nb > 0 {
                let phi = peierls_string(s, rung, l) as f64;
                let mut t = s.clone();
                t.set(pb, nb - 1);
                t.set(pa, na + 1);
                let amp = (nb as f64).sqrt() * (na as f64 + 1.0).sqrt();
                push_target(&mut term, basis, &t, col, c64::cis(-theta * phi) * (jp * amp));
            }
        }
    }
    Ok(term)
}

/// Diagonal `(U/2) Σ n(n−1) + μ (N_A − N_B)`.
pub fn build_onsite(params: &ModelParams, basis: &BasisTable) -> Result<Vec<f64>> {
    check_basis(params, basis)?;
    Ok(basis.states().iter().map(|s| onsite_energy(params, s)).collect())
}

pub(crate) fn onsite_energy(params: &ModelParams, s: &OccupationState) -> f64 {
    let occ = s.occupations();
    let pairs: f64 = occ.iter().map(|&n| (n as f64) * (n as f64 - 1.0)).sum();
    let (na, nb) = crate::fock::leg_counts(s, params.l);
    0.5 * params.u * pairs + params.mu * (na as f64 - nb as f64)
}

/// Full Hamiltonian from the bosonic rules, terms retained.
pub fn build_full(params: &ModelParams, basis: &BasisTable) -> Result<HMatrix> {
    let params = params.validated()?;
    let intra_a = build_intra(&params, basis, Leg::A)?;
    let intra_b = build_intra(&params, basis, Leg::B)?;
    let inter = build_inter(&params, basis)?;
    let onsite = build_onsite(&params, basis)?;
    let dim = basis.dim();
    let mut entries = Mat::zeros(dim, dim);
    intra_a.add_to(&mut entries);
    intra_b.add_to(&mut entries);
    inter.add_to(&mut entries);
    for (i, &d) in onsite.iter().enumerate() {
        entries[(i, i)] += c64::new(d, 0.0);
    }
    Ok(HMatrix { params, entries, intra_a, intra_b, inter, onsite })
}

fn dense_to_term(m: &Mat<c64>) -> Term {
    let mut term = Term::default();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            term.push(r, c, m[(r, c)]);
        }
    }
    term
}

/// Full Hamiltonian assembled from products `a_s^† a_t` of anyonic operator
/// matrices between the `N` and `N−1` sectors.
pub fn build_full_via_anyons(params: &ModelParams, basis: &BasisTable, basis_nminus1: &BasisTable) -> Result<HMatrix> {
    let params = params.validated()?;
    check_basis(&params, basis)?;
    let l = params.l;
    let ops: Vec<Mat<c64>> = (0..2 * l)
        .map(|site| anyon_matrix(basis, basis_nminus1, site, params.theta).map(|m| m.entries))
        .collect::<Result<_>>()?;
    // a_s^† a_t
    let hop = |s: usize, t: usize| -> Mat<c64> { ops[s].adjoint() * &ops[t] };
    let dim = basis.dim();

    let mut intra = [Mat::<c64>::zeros(dim, dim), Mat::<c64>::zeros(dim, dim)];
    for (slot, leg) in Leg::BOTH.into_iter().enumerate() {
        let a = params.alpha_of(leg);
        for rung in 0..l.saturating_sub(1) {
            let p = SiteIndex::new(rung, leg).linear(l);
            let q = SiteIndex::new(rung + 1, leg).linear(l);
            let left = hop(p, q);
            let right = hop(q, p);
            intra[slot] = &intra[slot] - left * faer::Scale(c64::new(params.j * a.exp(), 0.0))
                - right * faer::Scale(c64::new(params.j * (-a).exp(), 0.0));
        }
    }
    let mut inter = Mat::<c64>::zeros(dim, dim);
    for rung in 0..l {
        let pa = SiteIndex::new(rung, Leg::A).linear(l);
        let pb = SiteIndex::new(rung, Leg::B).linear(l);
        inter += (hop(pa, pb) + hop(pb, pa)) * faer::Scale(c64::new(params.jp, 0.0));
    }
    let onsite = build_onsite(&params, basis)?;
    let mut entries = &intra[0] + &intra[1] + &inter;
    for (i, &d) in onsite.iter().enumerate() {
        entries[(i, i)] += c64::new(d, 0.0);
    }
    let [ia, ib] = intra;
    Ok(HMatrix {
        params,
        entries,
        intra_a: dense_to_term(&ia),
        intra_b: dense_to_term(&ib),
        inter: dense_to_term(&inter),
        onsite,
    })
}

/// Writes every nonzero entry as `row col re im`, one per line, column-major.
pub fn write_matrix_dump<W: Write>(m: &Mat<c64>, mut w: W) -> io::Result<()> {
    writeln!(w, "# {} {}", m.nrows(), m.ncols())?;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != c64::new(0.0, 0.0) {
                writeln!(w, "{r} {c} {:e} {:e}", v.re, v.im)?;
            }
        }
    }
    Ok(())
}

/// Reads the format produced by [`write_matrix_dump`].
pub fn read_matrix_dump<R: BufRead>(r: R) -> io::Result<Mat<c64>> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty dump"))??;
    let dims: Vec<usize> = header
        .trim_start_matches('#')
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("bad header")))
        .collect::<io::Result<_>>()?;
    if dims.len() != 2 {
        return Err(bad("header must hold two dimensions"));
    }
    let mut m = Mat::zeros(dims[0], dims[1]);
    for line in lines {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 4 {
            return Err(bad("expected `row col re im`"));
        }
        let r: usize = f[0].parse().map_err(|_| bad("bad row"))?;
        let c: usize = f[1].parse().map_err(|_| bad("bad col"))?;
        let re: f64 = f[2].parse().map_err(|_| bad("bad re"))?;
        let im: f64 = f[3].parse().map_err(|_| bad("bad im"))?;
        if r >= dims[0] || c >= dims[1] {
            return Err(bad("entry out of range"));
        }
        m[(r, c)] = c64::new(re, im);
    }
    Ok(m)
}
