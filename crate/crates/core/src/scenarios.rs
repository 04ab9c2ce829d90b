//! Figure-level pipelines composing the solvers. Every pipeline is
//! deterministic in its config and returns tables plus manifests; writing
//! them to disk is left to [`write_outcome`].

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classical::{self, ClassicalSetup};
use crate::error::{invalid, Result};
use crate::model::{Branch, Potential};
use crate::output::{write_artifacts, Artifact, Cell, Format, Table};
use crate::pide::{PidePair, SeparationConstants};
use crate::selftest::{self, SelftestOptions};
use crate::specfun::{linspace, mittag_leffler, MlEvalPolicy};
use crate::tide::{
    ho_eigenstate, hydrogen_eigenstate, overlap_modulus, trapezoid, HoRun, HydrogenRun, Parity,
    RunStatus, TideSolution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    ClassicalDemo,
    PideFig2,
    HoFig3,
    SuperpositionFig5,
    HydrogenFig6,
    SpecfunSelftest,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::ClassicalDemo,
        ScenarioId::PideFig2,
        ScenarioId::HoFig3,
        ScenarioId::SuperpositionFig5,
        ScenarioId::HydrogenFig6,
        ScenarioId::SpecfunSelftest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::ClassicalDemo => "classical-demo",
            ScenarioId::PideFig2 => "pide-fig2",
            ScenarioId::HoFig3 => "ho-fig3",
            ScenarioId::SuperpositionFig5 => "superposition-fig5",
            ScenarioId::HydrogenFig6 => "hydrogen-fig6",
            ScenarioId::SpecfunSelftest => "specfun-selftest",
        }
    }

    fn default_points(self) -> usize {
        match self {
            ScenarioId::ClassicalDemo => 1001,
            ScenarioId::PideFig2 => 2001,
            ScenarioId::HoFig3 => 4001,
            ScenarioId::SuperpositionFig5 => 60001,
            ScenarioId::HydrogenFig6 => 20001,
            ScenarioId::SpecfunSelftest => 1001,
        }
    }
}

impl std::str::FromStr for ScenarioId {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ScenarioId::ALL.iter().map(|i| i.as_str()).collect();
                invalid(
                    "scenario",
                    format!(
                        "unknown scenario `{s}`; expected one of {}",
                        names.join(", ")
                    ),
                )
            })
    }
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declarative description of a scenario run.
///
/// `window` means: the trajectory range (classical-demo), [0, t_max]
/// (pide-fig2), [−w, w] for every level (ho-fig3), the time window
/// (superposition-fig5) and [−q_max, −ε] (hydrogen-fig6).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// 𝒦₀ values (in units of ħω for ho-fig3, of ħ for pide-fig2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    /// Probe position for superposition-fig5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_q: Option<f64>,
    /// ho-fig3: run the q → iq rotated ladder with 𝒦₀ = −kħω.
    #[serde(default)]
    pub rotated: bool,
    /// hydrogen-fig6: P⁺/P⁻ for forward runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_sq: Option<f64>,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "one_job", skip_serializing)]
    pub jobs: usize,
}

fn one_job() -> usize {
    1
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioId) -> Self {
        Self {
            scenario,
            window: None,
            points: None,
            k0_list: None,
            branch: None,
            probe_q: None,
            rotated: false,
            split_sq: None,
            format: Format::Csv,
            out_dir: None,
            jobs: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.points {
            if p < 100 {
                return Err(invalid(
                    "points",
                    format!("grid size must be >= 100, got {p}"),
                ));
            }
        }
        if let Some(l) = &self.k0_list {
            if l.is_empty() {
                return Err(invalid("k0_list", "must not be empty"));
            }
            if l.iter().any(|k| !k.is_finite()) {
                return Err(invalid("k0_list", "values must be finite"));
            }
        }
        if let Some([a, b]) = self.window {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(invalid(
                    "window",
                    format!("need finite lo < hi, got [{a}, {b}]"),
                ));
            }
        }
        if self.jobs == 0 {
            return Err(invalid("jobs", "must be >= 1"));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.points.unwrap_or(self.scenario.default_points())
    }
}

/// Tables and manifests of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub scenario: ScenarioId,
    pub artifacts: Vec<Artifact>,
    /// One row per run with its key metrics, for terminal display.
    pub summary: Table,
    pub diverged: bool,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioId::ClassicalDemo => run_classical_demo(cfg),
        ScenarioId::PideFig2 => run_pide_fig2(cfg),
        ScenarioId::HoFig3 => run_ho_ladder(cfg),
        ScenarioId::SuperpositionFig5 => run_superposition(cfg),
        ScenarioId::HydrogenFig6 => run_hydrogen_sweep(cfg),
        ScenarioId::SpecfunSelftest => run_specfun_selftest(cfg),
    }
}

/// Writes the outcome under `<root>/<scenario>/`.
pub fn write_outcome(
    outcome: &ScenarioOutcome,
    root: &Path,
    format: Format,
) -> Result<Vec<PathBuf>> {
    write_artifacts(root, outcome.scenario.as_str(), &outcome.artifacts, format)
}

fn manifest(
    cfg: &ScenarioConfig,
    run_id: &str,
    status: &RunStatus,
    table: &Table,
    extra: Value,
) -> Value {
    let mut m = json!({
        "scenario": cfg.scenario.as_str(),
        "run_id": run_id,
        "config": cfg,
        "status": status.label(),
        "columns": table.columns,
        "rows": table.rows.len(),
    });
    if let RunStatus::DivergedAtQ { q } = status {
        m["diverged_at_q"] = json!(q);
    }
    if let (Value::Object(dst), Value::Object(src)) = (&mut m, extra) {
        dst.extend(src);
    }
    m
}

fn id_for(prefix: &str, x: f64) -> String {
    format!("{prefix}_{x}")
}

/// Runs `f` over `items` on up to `jobs` threads, keeping input order.
fn fan_out<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(f).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    })
}

// ---------------------------------------------------------------- classical

/// Analytic-vs-quadrature time-of-flight table, turning points and Newton
/// residuals for the free, constant-force and harmonic cases.
pub fn run_classical_demo(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let branch = cfg.branch.unwrap_or(Branch::Minus);
    let free = ClassicalSetup::new(Potential::Free, 0.5, branch)?;
    let gravity = ClassicalSetup::new(Potential::constant_force(-1.0, 0.0)?, 0.5, branch)?;
    let ho = ClassicalSetup::new(Potential::harmonic(1.0)?, 0.5, branch)?;
    let cases: [(&str, &ClassicalSetup, f64, f64); 5] = [
        ("free", &free, 0.0, 1.0),
        ("constant-force", &gravity, 0.0, 0.4),
        ("constant-force-to-turning-point", &gravity, 0.0, 0.5),
        ("harmonic", &ho, -0.5, 0.5),
        ("harmonic-quarter-period", &ho, 0.0, 1.0),
    ];
    let mut tof = Table::new(&[
        "case",
        "q_start",
        "q_end",
        "re_dt_quadrature",
        "im_dt_quadrature",
        "re_dt_analytic",
        "im_dt_analytic",
        "abs_gap",
    ]);
    for (name, s, a, b) in cases {
        let q = classical::time_of_flight(s, a, b)?;
        let e = classical::analytic_time(s, b)? - classical::analytic_time(s, a)?;
        tof.push(vec![
            name.into(),
            a.into(),
            b.into(),
            q.re.into(),
            q.im.into(),
            e.re.into(),
            e.im.into(),
            (q - e).norm().into(),
        ]);
    }

    let mut turning = Table::new(&["case", "h0", "q_turning_scan", "q_turning_exact"]);
    let tp = classical::turning_points(&gravity, 0.0, 2.0);
    // q_tur = H0/(mg) with g = −f0/m
    turning.push(vec![
        "constant-force".into(),
        0.5.into(),
        tp[0].into(),
        0.5.into(),
    ]);
    let tp = classical::turning_points(&ho, -2.0, 2.0);
    turning.push(vec![
        "harmonic-left".into(),
        0.5.into(),
        tp[0].into(),
        (-1.0).into(),
    ]);
    turning.push(vec![
        "harmonic-right".into(),
        0.5.into(),
        tp[1].into(),
        1.0.into(),
    ]);

    let n = cfg.points();
    let [lo, hi] = cfg.window.unwrap_or([-0.5, 0.5]);
    let mut newton = Table::new(&["case", "q_min", "q_max", "points", "max_residual"]);
    let traj_ho = classical::trajectory(&ho, lo, hi, n)?;
    let r = classical::newton_residual(&traj_ho, &ho)?;
    newton.push(vec![
        "harmonic".into(),
        lo.into(),
        hi.into(),
        (n as f64).into(),
        r.iter().cloned().fold(0.0, f64::max).into(),
    ]);
    let traj_g = classical::trajectory(&gravity, 0.0, 0.4, n)?;
    let r = classical::newton_residual(&traj_g, &gravity)?;
    newton.push(vec![
        "constant-force".into(),
        0.0.into(),
        0.4.into(),
        (n as f64).into(),
        r.iter().cloned().fold(0.0, f64::max).into(),
    ]);

    let traj_table = trajectory_table(&traj_ho);
    let ok = RunStatus::Converged;
    let setups = json!({"free": free, "constant_force": gravity, "harmonic": ho});
    let artifacts = vec![
        Artifact {
            run_id: "time-of-flight".into(),
            manifest: manifest(cfg, "time-of-flight", &ok, &tof, json!({"setups": setups})),
            table: tof.clone(),
        },
        Artifact {
            run_id: "turning-points".into(),
            manifest: manifest(
                cfg,
                "turning-points",
                &ok,
                &turning,
                json!({"scan_cells": classical::TURNING_SCAN_CELLS}),
            ),
            table: turning,
        },
        Artifact {
            run_id: "newton-residual".into(),
            manifest: manifest(cfg, "newton-residual", &ok, &newton, json!({})),
            table: newton.clone(),
        },
        Artifact {
            run_id: "harmonic-trajectory".into(),
            manifest: manifest(
                cfg,
                "harmonic-trajectory",
                &ok,
                &traj_table,
                json!({"setup": ho}),
            ),
            table: traj_table,
        },
    ];
    Ok(ScenarioOutcome {
        scenario: cfg.scenario,
        artifacts,
        summary: tof,
        diverged: false,
    })
}

/// `q,re_t,im_t,re_tprime,im_tprime`.
pub fn trajectory_table(t: &classical::TimeTrajectory) -> Table {
    let mut tab = Table::new(&["q", "re_t", "im_t", "re_tprime", "im_tprime"]);
    for i in 0..t.q_grid.len() {
        tab.push_nums(&[
            t.q_grid[i],
            t.t_values[i].re,
            t.t_values[i].im,
            t.t_prime[i].re,
            t.t_prime[i].im,
        ]);
    }
    tab
}

// --------------------------------------------------------------------- PIDE

/// |ψ⁺(t)|² with A₀ = 1, B₀ = 0 at 𝒦₀/ħ = `k0_over_hbar` (ħ = m = 1).
pub fn fig2_series(k0_over_hbar: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    let c = SeparationConstants::from_k0(k0_over_hbar, 1.0)?;
    if c.pt_plus.norm() == 0.0 {
        let p = PidePair::unit_initial(c)?;
        return t_grid.iter().map(|&t| Ok(p.psi(t)?.0.norm_sqr())).collect();
    }
    let p =
        PidePair::from_coefficients(c, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 1.0)?;
    t_grid.iter().map(|&t| Ok(p.psi(t)?.0.norm_sqr())).collect()
}

/// Range of |ψ⁺|² over the part of the curve with 𝒦₀t/ħ ≥ `x_from`.
pub fn band_after(
    k0_over_hbar: f64,
    t_grid: &[f64],
    values: &[f64],
    x_from: f64,
) -> Option<(f64, f64)> {
    let sel: Vec<f64> = t_grid
        .iter()
        .zip(values)
        .filter(|(t, _)| k0_over_hbar * **t >= x_from)
        .map(|(_, v)| *v)
        .collect();
    if sel.is_empty() {
        return None;
    }
    Some((
        sel.iter().cloned().fold(f64::INFINITY, f64::min),
        sel.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    ))
}

pub fn run_pide_fig2(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let ks = cfg.k0_list.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let [lo, hi] = cfg.window.unwrap_or([0.0, 100.0]);
    if lo != 0.0 {
        return Err(invalid("window", "the time window must start at 0"));
    }
    let t = linspace(0.0, hi, cfg.points());
    let mut summary = Table::new(&[
        "k0_over_hbar",
        "abs2_at_t_max",
        "min_after_x50",
        "max_after_x50",
    ]);
    let mut artifacts = Vec::new();
    for &k in &ks {
        let v = fig2_series(k, &t)?;
        let mut tab = Table::new(&["t", "abs2_psi_plus"]);
        for (ti, vi) in t.iter().zip(&v) {
            tab.push_nums(&[*ti, *vi]);
        }
        let band = band_after(k, &t, &v, 50.0);
        let (bmin, bmax) = band.unwrap_or((f64::NAN, f64::NAN));
        summary.push_nums(&[k, *v.last().unwrap(), bmin, bmax]);
        let id = id_for("k0", k);
        let extra = json!({
            "k0_over_hbar": k,
            "a0": [1.0, 0.0],
            "b0": [0.0, 0.0],
            "band_after_x50": band.map(|(a, b)| json!([a, b])),
        });
        artifacts.push(Artifact {
            manifest: manifest(cfg, &id, &RunStatus::Converged, &tab, extra),
            run_id: id,
            table: tab,
        });
    }
    Ok(ScenarioOutcome {
        scenario: cfg.scenario,
        artifacts,
        summary,
        diverged: false,
    })
}

// ----------------------------------------------------------------- TIDE / HO

/// Default half-width of the plotted window for level k: grows linearly
/// from 2 at k = 0 to 4.1 at k = 5.
pub fn ho_default_half_width(k: f64) -> f64 {
    2.0 + 0.42 * k.abs()
}

/// `q,re_chi_plus,im_chi_plus,abs2_chi_plus,re_chi_minus,im_chi_minus,abs2_chi_minus`.
pub fn tide_table(sol: &TideSolution) -> Table {
    let mut t = Table::new(&[
        "q",
        "re_chi_plus",
        "im_chi_plus",
        "abs2_chi_plus",
        "re_chi_minus",
        "im_chi_minus",
        "abs2_chi_minus",
    ]);
    for i in 0..sol.q_grid.len() {
        let (p, m) = (sol.chi_plus[i], sol.chi_minus[i]);
        t.push_nums(&[
            sol.q_grid[i],
            p.re,
            p.im,
            p.norm_sqr(),
            m.re,
            m.im,
            m.norm_sqr(),
        ]);
    }
    t
}

/// Overlap moduli of a ladder run against the predicted eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderOverlaps {
    pub n_plus: Option<usize>,
    pub n_minus: Option<usize>,
    pub overlap_plus: Option<f64>,
    pub overlap_minus: Option<f64>,
}

pub fn ladder_overlaps(run: &HoRun, sol: &TideSolution) -> Result<LadderOverlaps> {
    let (np, nm) =
        crate::tide::predicted_ho_levels(run.k0, run.scales.hbar * run.omega, run.rotated);
    let phi = |n: usize| -> Vec<Complex64> {
        sol.q_grid
            .iter()
            .map(|&q| {
                Complex64::new(
                    crate::tide::ho_eigenstate_with(n, q, &run.scales, run.omega),
                    0.0,
                )
            })
            .collect()
    };
    let ov = |n: Option<usize>, chi: &[Complex64]| -> Result<Option<f64>> {
        n.map(|n| overlap_modulus(chi, &phi(n), &sol.q_grid))
            .transpose()
    };
    Ok(LadderOverlaps {
        n_plus: np,
        n_minus: nm,
        overlap_plus: ov(np, &sol.chi_plus)?,
        overlap_minus: ov(nm, &sol.chi_minus)?,
    })
}

pub fn run_ho_ladder(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let ks = cfg
        .k0_list
        .clone()
        .unwrap_or_else(|| vec![0.0, 1.0, 2.0, 5.0]);
    let n = cfg.points();
    let runs: Vec<HoRun> = ks
        .iter()
        .map(|&k| {
            let w = cfg
                .window
                .map(|[a, b]| a.abs().max(b.abs()))
                .unwrap_or_else(|| ho_default_half_width(k));
            let r = HoRun::new(
                if cfg.rotated { -k } else { k },
                w,
                if n.is_multiple_of(2) { n + 1 } else { n },
            );
            if cfg.rotated {
                r.rotated()
            } else {
                r
            }
        })
        .collect();
    let solved = fan_out(&runs, cfg.jobs, |r| r.solve());
    let mut summary = Table::new(&[
        "k0_over_hbar_omega",
        "status",
        "overlap_plus",
        "overlap_minus",
    ]);
    let mut artifacts = Vec::new();
    let mut diverged = false;
    for (run, sol) in runs.iter().zip(solved) {
        let sol = sol?.normalized();
        let ov = ladder_overlaps(run, &sol)?;
        diverged |= sol.status.is_diverged();
        let tab = tide_table(&sol);
        let id = id_for(if run.rotated { "rotated_k0" } else { "k0" }, run.k0);
        summary.push(vec![
            run.k0.into(),
            sol.status.label().into(),
            ov.overlap_plus.map(Cell::Num).unwrap_or_else(|| "".into()),
            ov.overlap_minus.map(Cell::Num).unwrap_or_else(|| "".into()),
        ]);
        let extra = json!({
            "potential": sol.potential,
            "constants": sol.constants,
            "frame": sol.frame,
            "window": [-run.half_width, run.half_width],
            "seed": [run.seed().0, run.seed().1],
            "step_policy": run.policy,
            "overlaps": ov,
        });
        artifacts.push(Artifact {
            manifest: manifest(cfg, &id, &sol.status, &tab, extra),
            run_id: id,
            table: tab,
        });
    }
    Ok(ScenarioOutcome {
        scenario: cfg.scenario,
        artifacts,
        summary,
        diverged,
    })
}

// ------------------------------------------------------------ superposition

/// Usual and Mittag-Leffler time traces at probe `q` (ħ = m = 1), each
/// scaled to its own maximum:
///
/// usual: |χ₀e^{−iωt/2} + χ₁e^{−3iωt/2}|²,
/// ML:    |χ₀E_{1/2}(√(−iωt)) + χ₁E_{1/2}(√(−2iωt))|².
pub fn superposition_traces(omega: f64, q: f64, t_grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let c0 = ho_eigenstate(0, q);
    let c1 = ho_eigenstate(1, q);
    let p = MlEvalPolicy::default();
    let mut usual = Vec::with_capacity(t_grid.len());
    let mut ml = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let u = Complex64::new(0.0, -0.5 * omega * t).exp() * c0
            + Complex64::new(0.0, -1.5 * omega * t).exp() * c1;
        usual.push(u.norm_sqr());
        let a = Complex64::new(0.0, -omega * t).sqrt();
        let b = Complex64::new(0.0, -2.0 * omega * t).sqrt();
        let m = mittag_leffler(0.5, a, &p)? * c0 + mittag_leffler(0.5, b, &p)? * c1;
        ml.push(m.norm_sqr());
    }
    for v in [&mut usual, &mut ml] {
        let mx = v.iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            v.iter_mut().for_each(|x| *x /= mx);
        }
    }
    Ok((usual, ml))
}

/// Pearson correlation between x[0..n−lag] and x[lag..n].
pub fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len().saturating_sub(1) {
        return f64::NAN;
    }
    let a = &x[..x.len() - lag];
    let b = &x[lag..];
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (u, v) in a.iter().zip(b) {
        sab += (u - ma) * (v - mb);
        saa += (u - ma) * (u - ma);
        sbb += (v - mb) * (v - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Lag (as a time) of the autocorrelation maximum within ±`frac` of
/// `expected`.
pub fn autocorrelation_period(x: &[f64], dt: f64, expected: f64, frac: f64) -> f64 {
    let center = (expected / dt).round() as usize;
    let span = ((expected * frac) / dt).round() as usize;
    let mut best = (f64::NEG_INFINITY, center);
    for lag in center.saturating_sub(span).max(1)..=center + span {
        let r = autocorrelation(x, lag);
        if r > best.0 {
            best = (r, lag);
        }
    }
    best.1 as f64 * dt
}

/// Periodicity metrics of the two traces at lag 2π/ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionMetrics {
    pub period_usual: f64,
    pub period_error_usual: f64,
    /// 1 − ρ(2π/ω) of the ML trace (ρ(0) = 1).
    pub ml_deviation_at_period: f64,
    pub usual_deviation_at_period: f64,
}

pub fn superposition_metrics(
    t: &[f64],
    usual: &[f64],
    ml: &[f64],
    omega: f64,
) -> SuperpositionMetrics {
    let dt = t[1] - t[0];
    let period = 2.0 * PI / omega;
    let p = autocorrelation_period(usual, dt, period, 0.1);
    let lag = (period / dt).round() as usize;
    SuperpositionMetrics {
        period_usual: p,
        period_error_usual: (p - period).abs(),
        ml_deviation_at_period: 1.0 - autocorrelation(ml, lag),
        usual_deviation_at_period: 1.0 - autocorrelation(usual, lag),
    }
}

pub fn run_superposition(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let omega = 1.0;
    let q = cfg.probe_q.unwrap_or(0.5);
    let [lo, hi] = cfg.window.unwrap_or([0.0, 6.0 * PI / omega]);
    let t = linspace(lo, hi, cfg.points());
    let (usual, ml) = superposition_traces(omega, q, &t)?;
    let mut tab = Table::new(&["t", "abs2_usual", "abs2_ml"]);
    for i in 0..t.len() {
        tab.push_nums(&[t[i], usual[i], ml[i]]);
    }
    let m = superposition_metrics(&t, &usual, &ml, omega);
    let mut summary = Table::new(&[
        "probe_q",
        "period_usual",
        "period_error_usual",
        "ml_deviation_at_period",
    ]);
    summary.push_nums(&[
        q,
        m.period_usual,
        m.period_error_usual,
        m.ml_deviation_at_period,
    ]);
    let id = id_for("q", q);
    let extra = json!({"omega": omega, "probe_q": q, "metrics": m});
    Ok(ScenarioOutcome {
        scenario: cfg.scenario,
        artifacts: vec![Artifact {
            manifest: manifest(cfg, &id, &RunStatus::Converged, &tab, extra),
            run_id: id,
            table: tab,
        }],
        summary,
        diverged: false,
    })
}

// ----------------------------------------------------------------- hydrogen

/// Shape metrics of a hydrogen run (computed on its normalized copy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydrogenMetrics {
    /// Position of the max of |χ⁻|².
    pub peak_q: f64,
    /// max over both components of |χ|²(q_probe)/max|χ|².
    pub tail_ratio: f64,
    pub tail_probe_q: f64,
    /// ∫|χ⁺|²/∫|χ⁻|² of the raw solution.
    pub norm_ratio: f64,
    /// max(|Re χ⁺ − Im χ⁻|, |Im χ⁺ − Re χ⁻|).
    pub symmetry_deviation: f64,
    /// max |χ⁻|² over |q| > 0.7 q_max divided by the max over |q| < 0.3 q_max.
    pub envelope_ratio: f64,
}

pub fn hydrogen_metrics(raw: &TideSolution, tail_probe_q: f64) -> HydrogenMetrics {
    let sol = raw.normalized();
    let (p, m) = (sol.abs2_plus(), sol.abs2_minus());
    let q = &sol.q_grid;
    let imax = (0..m.len())
        .max_by(|&a, &b| m[a].total_cmp(&m[b]))
        .unwrap_or(0);
    let probe = (0..q.len())
        .min_by(|&a, &b| {
            (q[a] - tail_probe_q)
                .abs()
                .total_cmp(&(q[b] - tail_probe_q).abs())
        })
        .unwrap_or(0);
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    let mmax = m.iter().cloned().fold(0.0, f64::max);
    let tail = |v: &[f64], mx: f64| if mx > 0.0 { v[probe] / mx } else { 0.0 };
    let sym = sol
        .chi_plus
        .iter()
        .zip(&sol.chi_minus)
        .map(|(a, b)| (a.re - b.im).abs().max((a.im - b.re).abs()))
        .fold(0.0, f64::max);
    let q_max = q.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let region_max = |pred: &dyn Fn(f64) -> bool| {
        q.iter()
            .zip(&m)
            .filter(|(x, _)| pred(x.abs()))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    };
    let near = region_max(&|a| a < 0.3 * q_max);
    let far = region_max(&|a| a > 0.7 * q_max);
    HydrogenMetrics {
        peak_q: q[imax],
        tail_ratio: tail(&p, pmax).max(tail(&m, mmax)),
        tail_probe_q: q[probe],
        norm_ratio: raw.norm2_plus() / raw.norm2_minus(),
        symmetry_deviation: sym,
        envelope_ratio: if near > 0.0 { far / near } else { f64::NAN },
    }
}

pub fn run_hydrogen_sweep(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let ks = cfg
        .k0_list
        .clone()
        .unwrap_or_else(|| vec![-1.28, -0.5, -0.18, -0.02, 0.02, 0.18, 0.5, 1.28]);
    let runs: Vec<HydrogenRun> = ks
        .iter()
        .map(|&k| {
            let mut r = HydrogenRun::new(k);
            r.points = cfg.points();
            if let Some([a, b]) = cfg.window {
                r.q_max = -a;
                r.epsilon = -b;
            }
            if let Some(s) = cfg.split_sq {
                r.split_sq = s;
            }
            r
        })
        .collect();
    for r in &runs {
        if !(r.epsilon > 0.0 && r.q_max > r.epsilon) {
            return Err(invalid(
                "window",
                "hydrogen window must be [-q_max, -epsilon] with q_max > epsilon > 0",
            ));
        }
    }
    let solved = fan_out(&runs, cfg.jobs, |r| r.solve());
    let mut summary = Table::new(&[
        "k0",
        "status",
        "peak_q",
        "tail_ratio_q-126",
        "norm_ratio_plus_minus",
        "symmetry_deviation",
        "envelope_ratio",
    ]);
    let mut artifacts = Vec::new();
    let mut diverged = false;
    for (run, raw) in runs.iter().zip(solved) {
        let raw = raw?;
        diverged |= raw.status.is_diverged();
        let metrics = hydrogen_metrics(&raw, -126.0);
        let sol = raw.normalized();
        let tab = tide_table(&sol);
        let id = id_for("k0", run.k0);
        summary.push(vec![
            run.k0.into(),
            sol.status.label().into(),
            metrics.peak_q.into(),
            metrics.tail_ratio.into(),
            metrics.norm_ratio.into(),
            metrics.symmetry_deviation.into(),
            metrics.envelope_ratio.into(),
        ]);
        let extra = json!({
            "potential": sol.potential,
            "constants": sol.constants,
            "window": [-run.q_max, -run.epsilon],
            "direction": if run.k0 < 0.0 { "inward" } else { "outward" },
            "step_policy": run.policy,
            "metrics": metrics,
        });
        artifacts.push(Artifact {
            manifest: manifest(cfg, &id, &sol.status, &tab, extra),
            run_id: id,
            table: tab,
        });
        if run.k0 == -1.28 {
            let exact: Vec<f64> = sol
                .q_grid
                .iter()
                .map(|&q| hydrogen_eigenstate(1, Parity::Odd, q).powi(2))
                .collect();
            let norm = trapezoid(&sol.q_grid, &exact);
            let mut t = Table::new(&["q", "abs2_exact_n1"]);
            for (q, v) in sol.q_grid.iter().zip(&exact) {
                t.push_nums(&[*q, v / norm]);
            }
            let id = "exact_n1".to_string();
            artifacts.push(Artifact {
                manifest: manifest(
                    cfg,
                    &id,
                    &RunStatus::Converged,
                    &t,
                    json!({"n": 1, "parity": "odd"}),
                ),
                run_id: id,
                table: t,
            });
        }
    }
    Ok(ScenarioOutcome {
        scenario: cfg.scenario,
        artifacts,
        summary,
        diverged,
    })
}

// ----------------------------------------------------------------- selftest

pub fn run_specfun_selftest(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let results = selftest::run(&SelftestOptions::default());
    // timings are left out so the table is reproducible
    let mut tab = Table::new(&["property", "passed", "measured", "tolerance"]);
    for r in &results {
        tab.push(vec![
            r.name.clone().into(),
            (if r.passed { "true" } else { "false" }).into(),
            r.measured.into(),
            r.tolerance.into(),
        ]);
    }
    let id = "properties".to_string();
    Ok(ScenarioOutcome {
        scenario: cfg.scenario,
        artifacts: vec![Artifact {
            manifest: manifest(cfg, &id, &RunStatus::Converged, &tab, json!({})),
            run_id: id,
            table: tab.clone(),
        }],
        summary: tab,
        diverged: false,
    })
}
