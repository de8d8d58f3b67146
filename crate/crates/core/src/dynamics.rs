//! Normalized non-Hermitian quench dynamics.
//!
//! The system starts in the max-Im eigenstate of `H(J_ini)` and evolves under
//! `H(J_fin)`; states are renormalized at every output time. Propagation runs
//! in the post-quench eigenbasis with growth factors rescaled by the largest
//! `Im E`, or by scaling-and-squaring matrix exponentials when the spectrum is
//! defective.

use std::io::{self, Write};

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::fock::BasisTable;
use crate::hamiltonian::{build_full, ModelParams};
use crate::spectral::{argmax_im, edge_correlation_of, eig, Spectrum};

/// Top-two `Im E` gap below which the initial state is flagged near-degenerate.
pub const NEAR_DEGENERACY_GAP: f64 = 1e-9;
/// Largest `‖H δ‖` used for a Taylor step before squaring.
pub const MAX_STEP_NORM: f64 = 0.5;

/// Pre- and post-quench models plus output times.
#[derive(Clone, Debug, PartialEq)]
pub struct QuenchConfig {
    pub pre: ModelParams,
    pub post: ModelParams,
    pub times: Vec<f64>,
}

impl QuenchConfig {
    pub fn new(base: &ModelParams, j_ini: f64, j_fin: f64, times: Vec<f64>) -> Result<Self> {
        let cfg = Self { pre: base.clone().with_jp(j_ini), post: base.clone().with_jp(j_fin), times };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut same = self.post.clone();
        same.jp = self.pre.jp;
        if same != self.pre {
            return Err(Error::InvalidParameter("pre- and post-quench models may differ only in Jp".into()));
        }
        validate_times(&self.times)
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// `0` followed by `points` log-spaced times over `[lo, hi]`.
pub fn time_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0];
    out.extend(crate::perturbation::log_grid(lo, hi, points)?);
    Ok(out)
}

/// `0` plus 200 log-spaced times over `[1e-1, 1e5]`.
pub fn default_time_grid() -> Vec<f64> {
    time_grid(1e-1, 1e5, 200).expect("static grid is valid")
}

/// The max-Im eigenstate chosen as the quench's starting point.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub psi: Vec<c64>,
    pub index: usize,
    pub eigenvalue: c64,
    /// Gap between the largest and second-largest `Im E`.
    pub top_gap: f64,
    pub near_degenerate: bool,
}

pub fn initial_state(spec_pre: &Spectrum) -> Result<InitialState> {
    let index = argmax_im(spec_pre).ok_or(Error::Undefined("initial state of an empty spectrum"))?;
    let eigenvalue = spec_pre.eigenvalues[index];
    let second = spec_pre
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .map(|(_, e)| e.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let top_gap = eigenvalue.im - second;
    let psi = normalized(&spec_pre.right_vector(index))?;
    Ok(InitialState { psi, index, eigenvalue, top_gap, near_degenerate: top_gap < NEAR_DEGENERACY_GAP })
}

fn norm(psi: &[c64]) -> f64 {
    psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(psi: &[c64]) -> Result<Vec<c64>> {
    let n = norm(psi);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Undefined("normalization of a zero or non-finite state"));
    }
    Ok(psi.iter().map(|v| v / n).collect())
}

/// How the states were propagated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagator {
    Spectral,
    Stepping,
}

impl Propagator {
    pub fn name(self) -> &'static str {
        match self {
            Propagator::Spectral => "spectral",
            Propagator::Stepping => "stepping",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub times: Vec<f64>,
    /// Unit-norm states, one per time.
    pub states: Vec<Vec<c64>>,
    pub propagator: Propagator,
}

/// Eigenbasis propagation, or stepping with `h_post` when the spectrum is
/// defective.
pub fn evolve(spec_post: &Spectrum, h_post: &Mat<c64>, psi0: &[c64], times: &[f64]) -> Result<Evolution> {
    let (states, propagator) = if spec_post.defective {
        (evolve_stepping(h_post, psi0, times)?, Propagator::Stepping)
    } else {
        (evolve_spectral(spec_post, psi0, times)?, Propagator::Spectral)
    };
    Ok(Evolution { times: times.to_vec(), states, propagator })
}

/// `ψ(t) ∝ Σ_n c_n e^{−iE_n t} R_n`, each term scaled by `e^{−m t}` with `m`
/// the largest `Im E` among populated modes.
pub fn evolve_spectral(spec: &Spectrum, psi0: &[c64], times: &[f64]) -> Result<Vec<Vec<c64>>> {
    validate_times(times)?;
    let c = spec.coefficients(psi0)?;
    let zero = c64::new(0.0, 0.0);
    let m = spec
        .eigenvalues
        .iter()
        .zip(&c)
        .filter(|(_, cn)| **cn != zero)
        .map(|(e, _)| e.im)
        .fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::Undefined("evolution of a zero state"));
    }
    let dim = spec.dim();
    times
        .iter()
        .map(|&t| {
            let mut psi = vec![zero; dim];
            for (n, (e, cn)) in spec.eigenvalues.iter().zip(&c).enumerate() {
                if *cn == zero {
                    continue;
                }
                let a = cn * c64::cis(-e.re * t) * ((e.im - m) * t).exp();
                if a == zero {
                    continue;
                }
                for (p, r) in psi.iter_mut().zip(spec.right.col(n).iter()) {
                    *p += a * r;
                }
            }
            normalized(&psi)
        })
        .collect()
}

fn matvec(m: &Mat<c64>, v: &[c64]) -> Vec<c64> {
    let mut out = vec![c64::new(0.0, 0.0); m.nrows()];
    for (j, x) in v.iter().enumerate() {
        if *x == c64::new(0.0, 0.0) {
            continue;
        }
        for (o, a) in out.iter_mut().zip(m.col(j).iter()) {
            *o += a * x;
        }
    }
    out
}

// Max absolute column sum, an upper bound on the spectral norm's action here.
fn one_norm(m: &Mat<c64>) -> f64 {
    m.col_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(−i H dt)` stored as `matrix · e^{log_scale}`.
#[derive(Clone, Debug)]
pub struct ScaledPropagator {
    pub matrix: Mat<c64>,
    pub log_scale: f64,
}

/// Scaling-and-squaring exponential: the Taylor series is summed at
/// `dt / 2^s` with `‖H dt‖₁ / 2^s ≤ 0.5`, then squared `s` times. The matrix is
/// divided by its max entry after each squaring and the factor is moved into
/// `log_scale`, so that growing modes cannot overflow.
pub fn propagator_matrix(h: &Mat<c64>, dt: f64) -> ScaledPropagator {
    let n = h.nrows();
    let hn = one_norm(h) * dt.abs();
    let mut s = 0u32;
    while hn / 2f64.powi(s as i32) > MAX_STEP_NORM {
        s += 1;
    }
    let delta = dt / 2f64.powi(s as i32);
    let a = h * faer::Scale(c64::new(0.0, -delta));
    let mut matrix = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for k in 1..=40 {
        term = &term * &a * faer::Scale(c64::new(1.0 / k as f64, 0.0));
        matrix = &matrix + &term;
        if term.norm_max() <= 1e-18 * matrix.norm_max() {
            break;
        }
    }
    let mut log_scale = 0.0;
    for _ in 0..s {
        matrix = &matrix * &matrix;
        log_scale *= 2.0;
        let scale = matrix.norm_max();
        if scale > 0.0 && scale.is_finite() {
            matrix *= faer::Scale(c64::new(1.0 / scale, 0.0));
            log_scale += scale.ln();
        }
    }
    ScaledPropagator { matrix, log_scale }
}

impl ScaledPropagator {
    /// `exp(−i H dt) ψ` without renormalization.
    pub fn apply(&self, psi: &[c64]) -> Vec<c64> {
        let f = self.log_scale.exp();
        matvec(&self.matrix, psi).into_iter().map(|v| v * f).collect()
    }
}

/// Matrix-exponential propagation between consecutive output times.
pub fn evolve_stepping(h: &Mat<c64>, psi0: &[c64], times: &[f64]) -> Result<Vec<Vec<c64>>> {
    validate_times(times)?;
    if psi0.len() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: psi0.len() });
    }
    let mut psi = normalized(psi0)?;
    let mut out = Vec::with_capacity(times.len());
    out.push(psi.clone());
    for w in times.windows(2) {
        let u = propagator_matrix(h, w[1] - w[0]);
        psi = normalized(&matvec(&u.matrix, &psi))?;
        out.push(psi.clone());
    }
    Ok(out)
}

/// `P(t) = |⟨ψ(t)|ψ0⟩|` for unit-norm states, clamped to `[0, 1]`.
pub fn overlap_series(states: &[Vec<c64>], psi0: &[c64]) -> Vec<f64> {
    states
        .iter()
        .map(|psi| {
            let dot: c64 = psi.iter().zip(psi0).map(|(a, b)| a.conj() * b).sum();
            dot.norm().min(1.0)
        })
        .collect()
}

/// `c_n = ⟨L_n|ψ⟩`.
pub fn decompose(spec: &Spectrum, psi: &[c64]) -> Result<Vec<c64>> {
    spec.coefficients(psi)
}

/// Inverse participation ratio `Σ |ψ_i|⁴` of a unit-norm state.
pub fn ipr(psi: &[c64]) -> f64 {
    psi.iter().map(|v| v.norm_sqr().powi(2)).sum()
}

/// Two-state crossover time `|ln|c0/c1|| / |Im E0 − Im E1|`.
pub fn crossover_estimate(c0: c64, c1: c64, e0: c64, e1: c64) -> Result<f64> {
    if c0.norm() == 0.0 || c1.norm() == 0.0 {
        return Err(Error::Undefined("crossover with a vanishing coefficient"));
    }
    let gap = (e0.im - e1.im).abs();
    if gap == 0.0 {
        return Err(Error::Undefined("crossover between modes with equal Im E"));
    }
    Ok((c0.norm() / c1.norm()).ln().abs() / gap)
}

/// Two-state estimate for a quench: `c0` is the post-quench mode with the
/// largest initial weight, `c1` the max-Im mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossover {
    pub dominant: usize,
    pub growing: usize,
    pub c0: c64,
    pub c1: c64,
    pub t_c: Option<f64>,
}

pub fn two_state_crossover(spec_post: &Spectrum, psi0: &[c64]) -> Result<Crossover> {
    let c = spec_post.coefficients(psi0)?;
    let dominant = (0..c.len())
        .max_by(|&a, &b| c[a].norm().total_cmp(&c[b].norm()).then(b.cmp(&a)))
        .ok_or(Error::Undefined("empty spectrum"))?;
    let growing = argmax_im(spec_post).ok_or(Error::Undefined("empty spectrum"))?;
    let t_c = if dominant == growing {
        None
    } else {
        crossover_estimate(c[dominant], c[growing], spec_post.eigenvalues[dominant], spec_post.eigenvalues[growing]).ok()
    };
    Ok(Crossover { dominant, growing, c0: c[dominant], c1: c[growing], t_c })
}

/// Time series of a quench.
#[derive(Clone, Debug)]
pub struct QuenchResult {
    pub times: Vec<f64>,
    pub c_series: Vec<f64>,
    pub p_series: Vec<f64>,
    /// `c_n(t)` per time, empty when the spectrum is defective.
    pub cn_trajectories: Vec<Vec<c64>>,
    pub ipr_series: Vec<f64>,
    /// Index of the largest `|c_n(t)|` and its share `|c_n|² / Σ|c_m|²`.
    pub dominant: Vec<Option<(usize, f64)>>,
    pub initial: InitialState,
    pub crossover: Option<Crossover>,
    pub propagator: Propagator,
}

impl QuenchResult {
    /// First time with `P(t) < threshold`.
    pub fn departure_time(&self, threshold: f64) -> Option<f64> {
        self.times.iter().zip(&self.p_series).find(|(_, &p)| p < threshold).map(|(&t, _)| t)
    }

    /// `min P(t)` over `t ≤ t_max`.
    pub fn min_overlap_until(&self, t_max: f64) -> f64 {
        self.times.iter().zip(&self.p_series).filter(|(&t, _)| t <= t_max).map(|(_, &p)| p).fold(f64::INFINITY, f64::min)
    }
}

fn dominant_share(c: &[c64]) -> Option<(usize, f64)> {
    let total: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return None;
    }
    let (k, v) = c.iter().enumerate().max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()).then(b.0.cmp(&a.0)))?;
    Some((k, v.norm_sqr() / total))
}

/// Full quench from pre-built spectra.
pub fn quench_from_spectra(
    spec_pre: &Spectrum,
    spec_post: &Spectrum,
    h_post: &Mat<c64>,
    basis: &BasisTable,
    times: &[f64],
) -> Result<QuenchResult> {
    let initial = initial_state(spec_pre)?;
    let evo = evolve(spec_post, h_post, &initial.psi, times)?;
    let p_series = overlap_series(&evo.states, &initial.psi);
    let c_series = evo.states.iter().map(|s| edge_correlation_of(s, basis)).collect::<Result<Vec<_>>>()?;
    let ipr_series = evo.states.iter().map(|s| ipr(s)).collect();
    let (cn_trajectories, dominant, crossover) = if spec_post.defective {
        (Vec::new(), vec![None; times.len()], None)
    } else {
        let cn: Vec<Vec<c64>> = evo.states.iter().map(|s| decompose(spec_post, s)).collect::<Result<_>>()?;
        let dom = cn.iter().map(|c| dominant_share(c)).collect();
        (cn, dom, Some(two_state_crossover(spec_post, &initial.psi)?))
    };
    Ok(QuenchResult {
        times: evo.times,
        c_series,
        p_series,
        cn_trajectories,
        ipr_series,
        dominant,
        initial,
        crossover,
        propagator: evo.propagator,
    })
}

/// Builds both Hamiltonians, diagonalizes and runs the quench.
pub fn run_quench(cfg: &QuenchConfig, basis: &BasisTable) -> Result<QuenchResult> {
    cfg.validate()?;
    let h_pre = build_full(&cfg.pre, basis)?;
    let h_post = build_full(&cfg.post, basis)?;
    let spec_pre = eig(&h_pre.entries)?;
    let spec_post = eig(&h_post.entries)?;
    quench_from_spectra(&spec_pre, &spec_post, &h_post.entries, basis, &cfg.times)
}

/// Writes `t,C,P,ipr,dominant_n,c_dominant_sq`, one row per time.
pub fn write_quench_csv<W: Write>(r: &QuenchResult, mut w: W) -> io::Result<()> {
    writeln!(w, "t,C,P,ipr,dominant_n,c_dominant_sq")?;
    for k in 0..r.times.len() {
        let (n, share) = match r.dominant[k] {
            Some((n, s)) => (n.to_string(), format!("{s:e}")),
            None => (String::new(), String::new()),
        };
        writeln!(w, "{:e},{:e},{:e},{:e},{n},{share}", r.times[k], r.c_series[k], r.p_series[k], r.ipr_series[k])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn instance(theta: f64, alpha: Option<f64>) -> (ModelParams, BasisTable) {
        let mut p = ModelParams::reference(4, 2).with_theta(theta);
        if let Some(a) = alpha {
            p.alpha = a;
        }
        let b = p.basis().unwrap();
        (p, b)
    }

    fn dist(a: &[c64], b: &[c64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn grid_shape() {
        let g = default_time_grid();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 0.1).abs() < 1e-15 && (g[200] - 1e5).abs() < 1e-9);
        assert!(validate_times(&[0.1, 1.0]).is_err());
        assert!(validate_times(&[0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn config_rejects_other_differences() {
        let p = ModelParams::reference(3, 2);
        let mut cfg = QuenchConfig::new(&p, 0.1, 0.2, vec![0.0, 1.0]).unwrap();
        cfg.post.theta = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn time_zero_returns_initial_state() {
        let (p, b) = instance(0.4 * PI, None);
        let h = build_full(&p.with_jp(0.05), &b).unwrap();
        let s = eig(&h.entries).unwrap();
        let psi0 = normalized(&(0..b.dim()).map(|i| c64::new(1.0, i as f64)).collect::<Vec<_>>()).unwrap();
        let states = evolve_spectral(&s, &psi0, &[0.0, 1.0]).unwrap();
        eprintln!("t=0 distance {:e}", dist(&states[0], &psi0));
        assert!(dist(&states[0], &psi0) < 1e-10);
        assert!((overlap_series(&states, &psi0)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_stepping_preserves_norm() {
        let (p, b) = instance(0.0, Some(0.0));
        let h = build_full(&p.with_jp(0.2), &b).unwrap().entries;
        let psi0 = normalized(&(0..b.dim()).map(|i| c64::new((i % 3) as f64, 1.0)).collect::<Vec<_>>()).unwrap();
        for dt in [0.01, 0.7, 5.0, 300.0] {
            let psi = propagator_matrix(&h, dt).apply(&psi0);
            assert!((norm(&psi) - 1.0).abs() < 1e-9, "dt={dt}");
        }
    }

    #[test]
    fn spectral_and_stepping_agree() {
        let times = time_grid(1e-1, 1e3, 40).unwrap();
        for (theta, alpha) in [(0.4 * PI, None), (0.0, Some(0.0))] {
            let (p, b) = instance(theta, alpha);
            let pre = eig(&build_full(&p.clone().with_jp(0.03), &b).unwrap().entries).unwrap();
            let h = build_full(&p.with_jp(0.05), &b).unwrap().entries;
            let post = eig(&h).unwrap();
            let psi0 = initial_state(&pre).unwrap().psi;
            let a = evolve_spectral(&post, &psi0, &times).unwrap();
            let s = evolve_stepping(&h, &psi0, &times).unwrap();
            let worst = a.iter().zip(&s).map(|(x, y)| dist(x, y)).fold(0.0, f64::max);
            assert!(worst <= 1e-8, "θ={theta}: {worst:e}");
        }
    }

    #[test]
    fn long_times_align_with_growing_mode() {
        let (p, b) = instance(0.4 * PI, None);
        let post = eig(&build_full(&p.with_jp(0.05), &b).unwrap().entries).unwrap();
        let mut ims: Vec<f64> = post.eigenvalues.iter().map(|e| e.im).collect();
        ims.sort_by(|a, b| b.total_cmp(a));
        let gap = ims[0] - ims[1];
        assert!(gap > 0.0);
        let psi0 = normalized(&vec![c64::new(1.0, 0.0); b.dim()]).unwrap();
        let t = 50.0 / gap;
        let states = evolve_spectral(&post, &psi0, &[0.0, t]).unwrap();
        let top = post.right_vector(argmax_im(&post).unwrap());
        let ov: c64 = top.iter().zip(&states[1]).map(|(a, b)| a.conj() * b).sum();
        assert!(ov.norm() > 1.0 - 1e-6);
    }

    #[test]
    fn decompose_examples() {
        let (p, b) = instance(0.4 * PI, None);
        let post = eig(&build_full(&p.with_jp(0.05), &b).unwrap().entries).unwrap();
        let c = decompose(&post, &post.right_vector(3)).unwrap();
        for (n, cn) in c.iter().enumerate() {
            let target = if n == 3 { 1.0 } else { 0.0 };
            assert!((cn - c64::new(target, 0.0)).norm() < 1e-9);
        }
        let psi = normalized(&(0..b.dim()).map(|i| c64::new(1.0, (i as f64).sin())).collect::<Vec<_>>()).unwrap();
        let c = decompose(&post, &psi).unwrap();
        let back: Vec<c64> = (0..b.dim()).map(|i| (0..b.dim()).map(|n| c[n] * post.right[(i, n)]).sum()).collect();
        assert!(dist(&back, &psi) < 1e-8);
    }

    #[test]
    fn ipr_examples() {
        let mut e = vec![c64::new(0.0, 0.0); 10];
        e[4] = c64::new(0.0, 1.0);
        assert_eq!(ipr(&e), 1.0);
        let u = vec![c64::new(1.0 / 10f64.sqrt(), 0.0); 10];
        assert!((ipr(&u) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn overlap_orthogonal_is_zero() {
        let a = vec![c64::new(1.0, 0.0), c64::new(0.0, 0.0)];
        let b = vec![c64::new(0.0, 0.0), c64::new(1.0, 0.0)];
        assert_eq!(overlap_series(&[b], &a), vec![0.0]);
    }

    #[test]
    fn crossover_examples() {
        let t = crossover_estimate(c64::new(1e-7, 0.0), c64::new(1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 0.008)).unwrap();
        assert!((t - 2014.7).abs() < 0.1);
        let t = crossover_estimate(c64::new(0.5, 0.0), c64::new(0.0, 0.5), c64::new(0.0, 0.1), c64::new(0.0, 0.3)).unwrap();
        assert_eq!(t, 0.0);
        assert!(crossover_estimate(c64::new(0.0, 0.0), c64::new(1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 1.0)).is_err());
        assert!(crossover_estimate(c64::new(1.0, 0.0), c64::new(1.0, 0.0), c64::new(0.0, 1.0), c64::new(2.0, 1.0)).is_err());
    }

    #[test]
    fn initial_state_picks_max_im() {
        let (p, b) = instance(0.4 * PI, None);
        let s = eig(&build_full(&p.with_jp(0.05), &b).unwrap().entries).unwrap();
        let init = initial_state(&s).unwrap();
        assert!(s.eigenvalues.iter().all(|e| e.im <= init.eigenvalue.im));
        assert!((norm(&init.psi) - 1.0).abs() < 1e-14);
        // Hermitian input: ties resolved towards the largest Re E
        let (p, b) = instance(0.0, Some(0.0));
        let s = eig(&build_full(&p, &b).unwrap().entries).unwrap();
        let init = initial_state(&s).unwrap();
        assert_eq!(init.index, s.dim() - 1);
        assert!(init.near_degenerate);
    }

    #[test]
    fn quench_csv_rows() {
        let p = ModelParams::reference(3, 2).with_theta(0.4 * PI);
        let b = p.basis().unwrap();
        let cfg = QuenchConfig::new(&p, 0.03, 0.05, time_grid(0.1, 10.0, 5).unwrap()).unwrap();
        let r = run_quench(&cfg, &b).unwrap();
        assert_eq!(r.propagator, Propagator::Spectral);
        assert!((r.p_series[0] - 1.0).abs() < 1e-12);
        assert!(r.p_series.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(r.ipr_series.iter().all(|&x| x > 0.0 && x <= 1.0 + 1e-12));
        let mut buf = Vec::new();
        write_quench_csv(&r, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }
}
