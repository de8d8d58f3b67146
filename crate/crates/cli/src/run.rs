//! Executes an [`ExperimentConfig`] and writes its CSV tables.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use anyladder_core::dynamics::{run_quench, time_grid, QuenchConfig, QuenchResult};
use anyladder_core::hamiltonian::build_full;
use anyladder_core::operators::anyon_algebra_residual;
use anyladder_core::perturbation::{
    ab_exchange_formula, bw_second_order, onset_threshold, path_amplitude, plaquette_formula, plaquette_path, split,
    SectorProjector, VPart,
};
use anyladder_core::spectral::{
    count_complex, edge_correlation, eig, im_dos, im_dos_auto_range, max_im, max_im_state_tracker, polarization,
    CrossingReport, Detector, COMPLEX_TOL,
};
use anyladder_core::symmetry::{build_k, residual};
use anyladder_core::{c64, BasisTable, ModelParams, OccupationState, Spectrum, TermTag, TrackerSample};
use rayon::prelude::*;

use crate::cache::{cache_key, Cache};
use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use crate::table::{num, theta_tag, SweepTable};

#[derive(Debug)]
pub struct RunOutcome {
    pub key: String,
    pub files: Vec<PathBuf>,
    pub cached: bool,
}

type Res<T> = Result<T, CliError>;

fn with_angle(base: &ModelParams, theta_pi: f64) -> ModelParams {
    base.clone().with_theta(theta_pi * PI)
}

fn spectrum(p: &ModelParams, basis: &BasisTable) -> Res<Spectrum> {
    Ok(eig(&build_full(p, basis)?.entries)?)
}

/// Runs the experiment, reusing a verified cache entry when allowed.
///
/// `jobs = None` uses all available cores.
pub fn run(cfg: &ExperimentConfig, jobs: Option<usize>, use_cache: bool) -> Res<RunOutcome> {
    let out = PathBuf::from(&cfg.output.dir);
    let key = cache_key(cfg);
    let cache = Cache::new(&out);
    let cached = if use_cache { cache.load(&key) } else { None };
    let (files, hit) = match cached {
        Some(files) => (files, true),
        None => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .map_err(|e| CliError::Config { field: "--jobs".into(), message: e.to_string() })?;
            let tables = pool.install(|| compute(cfg))?;
            let files: Vec<(String, Vec<u8>)> = tables.iter().map(|t| (t.file.clone(), t.to_bytes(cfg))).collect();
            if use_cache {
                cache.store(&key, &files)?;
            }
            (files, false)
        }
    };
    fs::create_dir_all(&out)?;
    let mut paths = Vec::with_capacity(files.len());
    for (name, data) in files {
        let path = out.join(name);
        fs::write(&path, data)?;
        paths.push(path);
    }
    Ok(RunOutcome { key, files: paths, cached: hit })
}

/// Computes all tables of an experiment in the current rayon pool.
/// Row order depends only on the config.
pub fn compute(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    cfg.validate()?;
    match cfg.kind {
        Kind::CountsVsJp | Kind::MaximHeatmap => counts(cfg),
        Kind::ThresholdVsL => thresholds(cfg),
        Kind::SpectrumVsJp => spectra(cfg),
        Kind::Quench => quenches(cfg),
        Kind::ImDos => dos(cfg),
        Kind::SymmetryResiduals => symmetry(cfg),
        Kind::CommutatorCheck => commutators(cfg),
        Kind::PerturbationCheck => perturbation(cfg),
    }
}

fn theta_jp_points(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let jps = cfg.jp_values();
    cfg.grid.theta_pi.iter().flat_map(|&t| jps.iter().map(move |&j| (t, j))).collect()
}

fn counts(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let base = cfg.model.params();
    let basis = base.basis()?;
    let points = theta_jp_points(cfg);
    let values: Vec<(usize, f64)> = points
        .par_iter()
        .map(|&(t, jp)| {
            let s = spectrum(&with_angle(&base, t).with_jp(jp), &basis)?;
            Ok((count_complex(&s, COMPLEX_TOL), max_im(&s)))
        })
        .collect::<Res<_>>()?;
    let table = if cfg.kind == Kind::CountsVsJp {
        let mut t = SweepTable::new("counts.csv", &["theta", "Jp", "count", "max_im"]);
        for (&(th, jp), &(c, m)) in points.iter().zip(&values) {
            t.push(vec![num(th), num(jp), c.to_string(), num(m)]);
        }
        t
    } else {
        let mut t = SweepTable::new("maxim.csv", &["theta", "Jp", "max_im"]);
        for (&(th, jp), &(_, m)) in points.iter().zip(&values) {
            t.push(vec![num(th), num(jp), num(m)]);
        }
        t
    };
    Ok(vec![table.note(format!("theta in units of pi; count is Im E > {COMPLEX_TOL:e}"))])
}

fn thresholds(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let base = cfg.model.params();
    let grid = cfg.jp_values();
    let points: Vec<(f64, usize)> =
        cfg.grid.theta_pi.iter().flat_map(|&t| cfg.grid.l.iter().map(move |&l| (t, l))).collect();
    let values: Vec<Option<f64>> = points
        .par_iter()
        .map(|&(t, l)| {
            let mut p = with_angle(&base, t);
            p.l = l;
            let basis = p.basis()?;
            Ok(onset_threshold(&p, &basis, &grid)?.jp_star())
        })
        .collect::<Res<_>>()?;
    let mut t = SweepTable::new("threshold.csv", &["theta", "L", "Jp_star"])
        .note("theta in units of pi; Jp_star is nan when no onset lies on the grid");
    for (&(th, l), v) in points.iter().zip(&values) {
        t.push(vec![num(th), l.to_string(), num(v.unwrap_or(f64::NAN))]);
    }
    Ok(vec![t])
}

/// Spectrum plus tracker data along the `J_p` grid at one angle.
pub fn spectra_at(base: &ModelParams, basis: &BasisTable, jps: &[f64]) -> Res<(Vec<Spectrum>, Vec<TrackerSample>)> {
    let out: Vec<(Spectrum, TrackerSample)> = jps
        .par_iter()
        .map(|&jp| {
            let s = spectrum(&base.clone().with_jp(jp), basis)?;
            let sample = TrackerSample::from_spectrum(jp, &s, basis)?;
            Ok((s, sample))
        })
        .collect::<Res<_>>()?;
    Ok(out.into_iter().unzip())
}

fn crossings_table(tag: &str, report: &CrossingReport) -> SweepTable {
    let mut t = SweepTable::new(
        format!("crossings_{tag}.csv"),
        &[
            "Jp_lo",
            "Jp_hi",
            "detector",
            "overlap",
            "continuation_overlap",
            "edge_corr_lo",
            "edge_corr_hi",
            "slope_before",
            "slope_after",
        ],
    );
    for c in &report.crossings {
        let det = match c.detector {
            Detector::Overlap => "overlap",
            Detector::Continuation => "continuation",
        };
        t.push(vec![
            num(c.jp_lo),
            num(c.jp_hi),
            det.into(),
            num(c.overlap),
            num(c.continuation_overlap),
            num(c.edge_corr_lo),
            num(c.edge_corr_hi),
            num(c.slope_before.unwrap_or(f64::NAN)),
            num(c.slope_after.unwrap_or(f64::NAN)),
        ]);
    }
    t
}

fn spectra(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let base = cfg.model.params();
    let basis = base.basis()?;
    let jps = cfg.jp_values();
    let mut tables = Vec::new();
    for &th in &cfg.grid.theta_pi {
        let p = with_angle(&base, th);
        let (specs, samples) = spectra_at(&p, &basis, &jps)?;
        let tag = theta_tag(th);
        let mut t = SweepTable::new(format!("spectrum_{tag}.csv"), &["Jp", "index", "re", "im", "polarization", "edge_corr"])
            .note(format!("theta = {th} pi"));
        for (jp, s) in jps.iter().zip(&specs) {
            for (n, e) in s.eigenvalues.iter().enumerate() {
                t.push(vec![
                    num(*jp),
                    n.to_string(),
                    num(e.re),
                    num(e.im),
                    num(polarization(s, n, &basis)?),
                    num(edge_correlation(s, n, &basis)?),
                ]);
            }
        }
        tables.push(t);
        let report = max_im_state_tracker(&samples)?;
        tables.push(crossings_table(&tag, &report).note(format!("theta = {th} pi")));
    }
    Ok(tables)
}

/// Quench for one `(θ, J_ini, J_fin)` entry.
pub fn quench_one(base: &ModelParams, basis: &BasisTable, theta_pi: f64, j_ini: f64, j_fin: f64, times: Vec<f64>) -> Res<QuenchResult> {
    let qc = QuenchConfig::new(&with_angle(base, theta_pi), j_ini, j_fin, times)?;
    Ok(run_quench(&qc, basis)?)
}

fn quenches(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let q = cfg.quench.as_ref().expect("validated");
    let base = cfg.model.params();
    let basis = base.basis()?;
    let times = time_grid(q.t_min, q.t_max, q.points)?;
    let results: Vec<QuenchResult> = q
        .pairs
        .par_iter()
        .map(|p| quench_one(&base, &basis, p.theta_pi, p.j_ini, p.j_fin, times.clone()))
        .collect::<Res<_>>()?;
    let mut tables = Vec::new();
    for (p, r) in q.pairs.iter().zip(&results) {
        let mut t = SweepTable::new(
            format!("quench_{}_{}_{}.csv", theta_tag(p.theta_pi), p.j_ini, p.j_fin),
            &["t", "C", "P", "ipr", "dominant_n", "c_dominant_sq"],
        )
        .note(format!("theta = {} pi, Jp {} -> {}", p.theta_pi, p.j_ini, p.j_fin))
        .note(format!(
            "initial state {} E = {} near_degenerate = {} propagator = {}",
            r.initial.index,
            r.initial.eigenvalue,
            r.initial.near_degenerate,
            r.propagator.name()
        ));
        if let Some(c) = &r.crossover {
            t = t.note(format!("two-state crossover t_c = {}", num(c.t_c.unwrap_or(f64::NAN))));
        }
        for k in 0..r.times.len() {
            let (n, share) = match r.dominant[k] {
                Some((n, s)) => (n.to_string(), num(s)),
                None => (String::new(), String::new()),
            };
            t.push(vec![num(r.times[k]), num(r.c_series[k]), num(r.p_series[k]), num(r.ipr_series[k]), n, share]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn dos(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let d = cfg.dos.as_ref().expect("validated");
    let base = cfg.model.params();
    let basis = base.basis()?;
    let points: Vec<(f64, f64)> =
        cfg.grid.theta_pi.iter().flat_map(|&t| d.jp.iter().map(move |&j| (t, j))).collect();
    let hists = points
        .par_iter()
        .map(|&(t, jp)| {
            let s = spectrum(&with_angle(&base, t).with_jp(jp), &basis)?;
            let range = d.range.map(|[lo, hi]| (lo, hi)).unwrap_or_else(|| im_dos_auto_range(&s));
            Ok(im_dos(&s, d.bins, range)?)
        })
        .collect::<Res<Vec<_>>>()?;
    let mut tables = Vec::new();
    for (&(th, jp), h) in points.iter().zip(&hists) {
        let mut t = SweepTable::new(format!("dos_{}_jp{jp}.csv", theta_tag(th)), &["bin_lo", "bin_hi", "count"])
            .note(format!("theta = {th} pi, Jp = {jp}"));
        for (k, c) in h.counts.iter().enumerate() {
            t.push(vec![num(h.edges[k]), num(h.edges[k + 1]), c.to_string()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

const RESIDUAL_TERMS: [(&str, &[TermTag]); 6] = [
    ("intra_A", &[TermTag::IntraA]),
    ("intra_B", &[TermTag::IntraB]),
    ("inter", &[TermTag::Inter]),
    ("onsite", &[TermTag::Onsite]),
    ("intra+onsite", &[TermTag::IntraA, TermTag::IntraB, TermTag::Onsite]),
    ("full", &TermTag::ALL),
];

fn symmetry(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let base = cfg.model.params();
    let basis = base.basis()?;
    let rows: Vec<Vec<Vec<String>>> = cfg
        .grid
        .theta_pi
        .par_iter()
        .map(|&th| {
            let h = build_full(&with_angle(&base, th), &basis)?;
            let k = build_k(&basis, h.params.theta);
            RESIDUAL_TERMS
                .iter()
                .map(|(name, tags)| {
                    let r = residual(&k, &h.sum_of(tags))?;
                    Ok(vec![name.to_string(), num(th), num(r.max_abs)])
                })
                .collect::<Res<Vec<_>>>()
        })
        .collect::<Res<_>>()?;
    let mut t = SweepTable::new("residuals.csv", &["term", "theta", "residual"])
        .note("theta in units of pi; residual is max |K H K^-1 - H^dagger|");
    rows.into_iter().flatten().for_each(|r| t.push(r));
    Ok(vec![t])
}

fn commutators(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let p = cfg.model.params();
    let rows: Vec<Vec<Vec<String>>> = cfg
        .grid
        .theta_pi
        .par_iter()
        .map(|&th| {
            [th, -th]
                .iter()
                .map(|&phi| {
                    let r = anyon_algebra_residual(p.l, p.n_cap, th * PI, phi * PI, 1e-12)?;
                    Ok(vec![
                        num(th),
                        num(phi),
                        num(r.exchange),
                        num(r.mixed),
                        num(r.max_residual),
                        r.passed.to_string(),
                    ])
                })
                .collect::<Res<Vec<_>>>()
        })
        .collect::<Res<_>>()?;
    let mut t = SweepTable::new("commutators.csv", &["theta", "phi", "exchange", "mixed", "max_residual", "passed"])
        .note("angles in units of pi; theta builds the strings, phi enters the relations");
    rows.into_iter().flatten().for_each(|r| t.push(r));
    Ok(vec![t])
}

fn ab_state(l: usize, a: usize, b: usize) -> OccupationState {
    let mut occ = vec![0u8; 2 * l];
    occ[a] += 1;
    occ[l + b] += 1;
    OccupationState::new(occ)
}

/// One row per `(j, k)` pair: second-order element from the matrix against
/// the closed form, for `⟨k_A j_B| H_eff |j_A k_B⟩`.
pub fn ab_exchange_rows(p: &ModelParams, basis: &BasisTable) -> Res<Vec<(usize, usize, c64, c64)>> {
    let s = split(p, basis)?;
    let ab = SectorProjector::ab_scattering(basis)?;
    let so = bw_second_order(&s, &ab, VPart::InterOnly)?;
    let mut out = Vec::new();
    for j in 0..p.l {
        for k in 0..p.l {
            if j == k {
                continue;
            }
            let f = basis.index_of(&ab_state(p.l, k, j))?.expect("AB state in sector");
            let i = basis.index_of(&ab_state(p.l, j, k))?.expect("AB state in sector");
            let got = so.element(&ab, f, i).expect("both states in the manifold");
            let want = ab_exchange_formula(p.jp, p.mu, p.theta, j as i32 - k as i32)?;
            out.push((j, k, got, want));
        }
    }
    Ok(out)
}

/// `max |P V_inter P|` on the BB scattering manifold.
pub fn bb_selection_rule(p: &ModelParams, basis: &BasisTable) -> Res<f64> {
    let s = split(p, basis)?;
    let bb = SectorProjector::bb_scattering(basis)?;
    Ok(bb.restrict(&s.v(VPart::InterOnly)).norm_max())
}

fn perturbation(cfg: &ExperimentConfig) -> Res<Vec<SweepTable>> {
    let base = cfg.model.params();
    let basis = base.basis()?;
    let cols = ["check", "label", "theta", "value_re", "value_im", "reference_re", "reference_im", "abs_error"];
    let mut t = SweepTable::new("perturbation.csv", &cols).note("theta in units of pi");
    let mut row = |check: &str, label: String, th: f64, got: c64, want: c64| {
        t.push(vec![
            check.into(),
            label,
            num(th),
            num(got.re),
            num(got.im),
            num(want.re),
            num(want.im),
            num((got - want).norm()),
        ]);
    };
    for &th in &cfg.grid.theta_pi {
        let p = with_angle(&base, th);
        for (j, k, got, want) in ab_exchange_rows(&p, &basis)? {
            row("ab_exchange", format!("j={j};k={k}"), th, got, want);
        }
        let s = split(&p, &basis)?;
        for rung in 0..p.l.saturating_sub(1) {
            let amp = path_amplitude(&s, &plaquette_path(&basis, rung)?)?;
            row("plaquette", format!("rung={rung}"), th, amp.value, plaquette_formula(&p));
        }
        row("bb_selection", "max|PVP|".into(), th, c64::new(bb_selection_rule(&p, &basis)?, 0.0), c64::new(0.0, 0.0));
    }
    Ok(vec![t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, Source};

    fn cfg(preset: &str, overrides: &[&str]) -> ExperimentConfig {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        resolve(&Source::Preset(preset.into()), &o, None).unwrap()
    }

    #[test]
    fn counts_rows_follow_grid_order() {
        let c = cfg("fig2a", &["model.L=3", "grid.jp.points=4"]);
        let t = &compute(&c).unwrap()[0];
        assert_eq!(t.rows.len(), 4 * 4);
        assert_eq!(t.rows[0][0], "0e0");
        assert_eq!(t.rows[4][0], num(0.4));
        assert_eq!(t.rows[1][1], num(c.jp_values()[1]));
    }

    #[test]
    fn parallel_and_serial_agree() {
        let c = cfg("fig2a", &["model.L=4", "grid.jp.points=6"]);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| compute(&c)).unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| compute(&c)).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn symmetry_table_shape() {
        let c = cfg("symmetry", &["model.L=4"]);
        let t = &compute(&c).unwrap()[0];
        assert_eq!(t.rows.len(), 6 * RESIDUAL_TERMS.len());
        let zero = t.rows.iter().find(|r| r[0] == "intra+onsite").unwrap();
        assert!(zero[2].parse::<f64>().unwrap() < 1e-12);
    }

    #[test]
    fn quench_table_has_time_rows() {
        let c = cfg("fig4", &["model.L=4", "quench.points=20"]);
        let tables = compute(&c).unwrap();
        assert_eq!(tables.len(), 4);
        assert!(tables.iter().all(|t| t.rows.len() == 21));
        assert_eq!(tables[1].file, "quench_theta0.4_0.035_0.045.csv");
    }

    #[test]
    fn spectrum_tables_come_in_pairs() {
        let c = cfg("smS1", &["model.L=3", "grid.jp.points=5"]);
        let tables = compute(&c).unwrap();
        assert_eq!(tables.len(), 4);
        assert_eq!(tables[0].rows.len(), 5 * BasisTable::build(3, 2, 2).unwrap().dim());
        assert!(tables[1].file.starts_with("crossings_"));
    }

    #[test]
    fn perturbation_plaquette_rows_match() {
        let c = cfg("perturbation", &[]);
        let t = &compute(&c).unwrap()[0];
        for r in t.rows.iter().filter(|r| r[0] == "plaquette" || r[0] == "bb_selection") {
            assert!(r[7].parse::<f64>().unwrap() <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn cache_round_trip_and_recompute() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let c = cfg("symmetry", &["model.L=3", &format!("output.dir={}", out.display())]);
        let first = run(&c, Some(2), true).unwrap();
        assert!(!first.cached);
        let body = fs::read(&first.files[0]).unwrap();
        let second = run(&c, Some(2), true).unwrap();
        assert!(second.cached);
        assert_eq!(fs::read(&second.files[0]).unwrap(), body);
        fs::write(Cache::new(&out).entry(&first.key).join("residuals.csv"), b"garbage").unwrap();
        let third = run(&c, Some(2), true).unwrap();
        assert!(!third.cached);
        assert_eq!(fs::read(&third.files[0]).unwrap(), body);
    }
}
