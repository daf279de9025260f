//! The acceptance checks, shared by the `acceptance` test target and the
//! `verify` command.

use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{min_gap, subword, SgnWord, Sign};
use crate::analytic::{
    circle_radius, escape_certificate, gamma_lower, gamma_upper, grim_reaper_value, InitialFamily, Phi,
};
use crate::classify::{bisect_observed, classify, classify_many, critical_run, Bracket, Category, ClassifierTolerances, CriticalReport};
use crate::error::Result;
use crate::evolve::{evolve_with, graph_rate, integrate_profile, ChartProfile, EvolveOptions, StepControl, Trajectory};
use crate::geometry::{ProblemParams, MIN_GRID};

/// Inputs of the suite. The defaults are the reference configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub force: f64,
    pub half_span: f64,
    pub grid_n: usize,
    pub phi: Phi,
    pub ctl: StepControl<f64>,
    pub tols: ClassifierTolerances<f64>,
    /// Width of the threshold brackets compared across grids.
    pub bracket_width: f64,
    /// Width the bracket is refined to before the near-critical run.
    pub critical_width: f64,
    pub critical_horizon: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            force: 1.0,
            half_span: 0.5,
            grid_n: 201,
            phi: Phi::Cosine,
            ctl: StepControl::default(),
            tols: ClassifierTolerances::default(),
            bracket_width: 0.01,
            critical_width: 1e-4,
            critical_horizon: 100.0,
        }
    }
}

impl VerifySettings {
    pub fn params(&self) -> Result<ProblemParams<f64>> {
        ProblemParams::new(self.force, self.half_span, self.grid_n)
    }

    /// Second grid for the bracket comparison: half resolution, or double
    /// when half would fall below the minimum grid.
    fn coarse_grid(&self) -> usize {
        let m = (self.grid_n - 1) / 2 + 1;
        if m < MIN_GRID {
            2 * self.grid_n - 1
        } else if m.is_multiple_of(2) {
            m + 1
        } else {
            m
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    fn new(id: u8, name: &'static str, passed: bool, detail: String, start: Instant) -> Self {
        CriterionReport { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
    }

    fn failed(id: u8, name: &'static str, err: impl std::fmt::Display, start: Instant) -> Self {
        Self::new(id, name, false, format!("error: {err}"), start)
    }

    /// `PASS [ 4] lower convergence (1.2 s): detail`
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

const C1: &str = "equilibrium stationarity";
const C2: &str = "grim reaper residual order";
const C3: &str = "circle ODE oracle";
const C4: &str = "lower convergence";
const C5: &str = "escape";
const C6: &str = "threshold bracketing";
const C7: &str = "energy monotonicity and identity";
const C8: &str = "intersection-number principle";
const C9: &str = "comparison ordering";
const C10: &str = "word algebra";

/// Both equilibria, integrated over `[0, 1]`, move less than `1e-3`.
pub fn equilibrium_stationarity(s: &VerifySettings) -> CriterionReport {
    let start = Instant::now();
    let inner = || -> Result<(f64, f64, f64, f64)> {
        let p = s.params()?;
        let t0 = Instant::now();
        let lower = gamma_lower(&p);
        let moved = match integrate_profile(ChartProfile::Graph(lower.clone()), &s.ctl, 1.0)? {
            ChartProfile::Graph(g) => sup_diff(g.heights(), lower.heights()),
            ChartProfile::Polar(_) => unreachable!("chart is fixed"),
        };
        let t_lower = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let upper = gamma_upper(&p);
        let moved_up = match integrate_profile(ChartProfile::Polar(upper.clone()), &s.ctl, 1.0)? {
            ChartProfile::Polar(q) => sup_diff(q.radii(), upper.radii()),
            ChartProfile::Graph(_) => unreachable!("chart is fixed"),
        };
        Ok((moved, t_lower, moved_up, t0.elapsed().as_secs_f64()))
    };
    match inner() {
        Ok((dl, tl, du, tu)) => CriterionReport::new(
            1,
            C1,
            dl < 1e-3 && du < 1e-3 && tl < 5.0 && tu < 5.0,
            format!("lower moved {dl:.3e} in {tl:.2} s, upper moved {du:.3e} in {tu:.2} s"),
            start,
        ),
        Err(e) => CriterionReport::failed(1, C1, e, start),
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sup-residual of the discrete `A = 0` graph operator on the Grim reaper
/// `G(x, 0)` (`b = 0.25`, `C = 3`) over `n` nodes on `[-0.3, 0.3]`.
pub fn grim_reaper_residual(n: usize) -> Result<f64> {
    let (b, c, half) = (0.25, 3.0, 0.3);
    let dx = 2.0 * half / (n - 1) as f64;
    let u: Vec<f64> = (0..n)
        .map(|i| grim_reaper_value(b, c, -half + i as f64 * dx, 0.0))
        .collect::<Result<_>>()?;
    let mut rate = Vec::new();
    graph_rate(&u, dx, 0.0, &mut rate, None)?;
    Ok(rate[1..n - 1].iter().map(|r| (r + 1.0 / b).abs()).fold(0.0, f64::max))
}

pub fn grim_reaper_order(s: &VerifySettings) -> CriterionReport {
    let start = Instant::now();
    let m = ((s.grid_n - 1) / 2 + 1).max(101);
    let grids = [m, 2 * m - 1, 4 * m - 3];
    match grids.iter().map(|&n| grim_reaper_residual(n)).collect::<Result<Vec<f64>>>() {
        Ok(r) => {
            let f1 = r[0] / r[1];
            let f2 = r[1] / r[2];
            CriterionReport::new(
                2,
                C2,
                f1 >= 3.5 && f2 >= 3.5,
                format!("grids {grids:?}: residuals {:.3e}, {:.3e}, {:.3e}; factors {f1:.3}, {f2:.3}", r[0], r[1], r[2]),
                start,
            )
        }
        Err(e) => CriterionReport::failed(2, C2, e, start),
    }
}

/// Radius solving the implicit circle relation at time `t`, by bisection.
fn implicit_circle_radius(r0: f64, force: f64, t: f64) -> f64 {
    let f = |r: f64| (r - r0) / force + ((force * r - 1.0) / (force * r0 - 1.0)).ln() / (force * force) - t;
    let (mut lo, mut hi) = (r0, r0 + force * t + 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn circle_ode(_s: &VerifySettings) -> CriterionReport {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        match circle_radius(2.0, 1.0, t) {
            Ok(r) => {
                let err = (r - implicit_circle_radius(2.0, 1.0, t)).abs();
                worst = worst.max(err);
                parts.push(format!("R({t}) = {r:.12} (err {err:.1e})"));
            }
            Err(e) => return CriterionReport::failed(3, C3, e, start),
        }
    }
    CriterionReport::new(3, C3, worst < 1e-8, parts.join(", "), start)
}

/// Every word is a subword of its predecessor; `Z` never increases.
pub fn words_monotone<'a>(words: impl IntoIterator<Item = &'a SgnWord>) -> std::result::Result<(), String> {
    let mut prev: Option<&SgnWord> = None;
    for w in words {
        if let Some(p) = prev {
            if w.z() > p.z() || !subword(p, w) {
                return Err(format!("{p} followed by {w}"));
            }
        }
        prev = Some(w);
    }
    Ok(())
}

fn min_y(traj: &Trajectory<f64>) -> f64 {
    traj.diagnostics.iter().map(|d| d.min_y).fold(f64::INFINITY, f64::min)
}

/// Per-run audit for the energy and intersection criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAudit {
    pub sigma: f64,
    pub above_axis: bool,
    pub max_step_increase: f64,
    pub words: std::result::Result<(), String>,
}

impl RunAudit {
    pub fn of(traj: &Trajectory<f64>) -> Self {
        RunAudit {
            sigma: traj.sigma,
            above_axis: min_y(traj) >= -1e-12,
            max_step_increase: traj.max_step_energy_increase,
            words: words_monotone(traj.diagnostics.iter().filter_map(|d| d.sgn.as_ref())),
        }
    }
}

/// Shared runs behind criteria 4 to 8.
#[derive(Debug)]
pub struct SharedRuns {
    pub lower: Vec<(f64, Category, Trajectory<f64>)>,
    pub lower_seconds: f64,
    pub escape_sigma: f64,
    pub escape: (Category, Trajectory<f64>),
    pub bracket: Bracket<f64>,
    pub bracket_coarse: Bracket<f64>,
    pub refined: Bracket<f64>,
    pub critical: CriticalReport<f64>,
    pub threshold_seconds: f64,
    pub energy_run: Trajectory<f64>,
    pub audits: Vec<RunAudit>,
}

impl SharedRuns {
    pub fn compute(s: &VerifySettings) -> Result<Self> {
        let p = s.params()?;
        let fam = InitialFamily::new(p, s.phi, 0.0)?;
        let audits = Mutex::new(Vec::new());

        let t0 = Instant::now();
        let sigmas = [-1.0, 0.0, 0.1];
        let lower: Vec<_> = classify_many(&fam, &sigmas, &s.ctl, &s.tols)?
            .into_iter()
            .zip(sigmas)
            .map(|((c, t), s)| (s, c, t))
            .collect();
        let lower_seconds = t0.elapsed().as_secs_f64();

        let escape_sigma = escape_certificate(&p, s.phi)?.sigma;
        let escape = classify(&fam.with_sigma(escape_sigma)?, &s.ctl, &s.tols)?;

        let t0 = Instant::now();
        let observe = |t: &Trajectory<f64>| audits.lock().expect("audit lock").push(RunAudit::of(t));
        let bracket = bisect_observed(&fam, 0.1, escape_sigma, s.bracket_width, &s.ctl, &s.tols, &observe)?;
        let coarse = fam.with_grid(s.coarse_grid())?;
        let bracket_coarse = bisect_observed(&coarse, 0.1, escape_sigma, s.bracket_width, &s.ctl, &s.tols, &observe)?;
        let refined = bisect_observed(&fam, bracket.lo, bracket.hi, s.critical_width, &s.ctl, &s.tols, &observe)?;
        let critical = critical_run(&fam.with_sigma(refined.midpoint())?, &s.ctl, &s.tols, s.critical_horizon)?;
        let threshold_seconds = t0.elapsed().as_secs_f64();

        let mut tols = s.tols;
        tols.t_max = 5.0;
        let opts = EvolveOptions { stop_on_upper: false, stop_on_lower: false };
        let energy_run = evolve_with(&fam.with_sigma(0.1)?, &s.ctl, &tols, opts)?;

        let mut audits = audits.into_inner().expect("audit lock");
        for (_, _, t) in &lower {
            audits.push(RunAudit::of(t));
        }
        audits.push(RunAudit::of(&escape.1));
        audits.push(RunAudit::of(&critical.trajectory));
        audits.push(RunAudit::of(&energy_run));
        Ok(SharedRuns {
            lower,
            lower_seconds,
            escape_sigma,
            escape,
            bracket,
            bracket_coarse,
            refined,
            critical,
            threshold_seconds,
            energy_run,
            audits,
        })
    }
}

pub fn lower_convergence(runs: &SharedRuns) -> CriterionReport {
    let start = Instant::now();
    let mut ok = runs.lower_seconds < 30.0;
    let mut parts = Vec::new();
    for (s, c, t) in &runs.lower {
        let d = t.final_record().dist_lower;
        ok &= *c == Category::ConvergeLower && d < 1e-3 && t.event.t <= 20.0;
        parts.push(format!("sigma {s}: {c} at t = {:.2}, distance {d:.2e}", t.event.t));
    }
    parts.push(format!("{:.1} s", runs.lower_seconds));
    CriterionReport::new(4, C4, ok, parts.join("; "), start)
}

pub fn escape(runs: &SharedRuns, s: &VerifySettings) -> CriterionReport {
    let start = Instant::now();
    let (c, t) = &runs.escape;
    let word = t.final_sgn().map(|w| w.to_string()).unwrap_or_else(|| "none".into());
    let plus = t.final_sgn().is_some_and(|w| w.len() == 1 && w.is_all(Sign::Plus));
    CriterionReport::new(
        5,
        C5,
        *c == Category::Escape && plus && t.event.t < s.tols.t_max,
        format!("sigma {:.6}: {c} at t = {:.2}, final word [{word}]", runs.escape_sigma, t.event.t),
        start,
    )
}

pub fn threshold(runs: &SharedRuns, s: &VerifySettings) -> CriterionReport {
    let start = Instant::now();
    let (b, bc, cr) = (&runs.bracket, &runs.bracket_coarse, &runs.critical);
    let agree = (b.midpoint() - bc.midpoint()).abs();
    let bar = 10.0 * s.tols.converge;
    let ok = b.width <= s.bracket_width
        && bc.width <= s.bracket_width
        && agree < 0.05
        && cr.closest_distance < bar
        && cr.word_held
        && runs.threshold_seconds < 300.0;
    CriterionReport::new(
        6,
        C6,
        ok,
        format!(
            "grid {}: [{:.6}, {:.6}]; grid {}: [{:.6}, {:.6}]; midpoints differ by {agree:.2e}; \
             near-critical sigma {:.8} (bracket width {:.1e}) came within {:.2e} of the upper arc \
             at t = {:.2}, dwell {:.2}, word held: {}; {:.1} s",
            b.grid_n, b.lo, b.hi, bc.grid_n, bc.lo, bc.hi, cr.sigma, runs.refined.width, cr.closest_distance,
            cr.closest_time, cr.dwell_time, cr.word_held, runs.threshold_seconds
        ),
        start,
    )
}

/// Pointwise identity check on samples whose dissipated energy exceeds this.
pub const ENERGY_NOISE_FLOOR: f64 = 1e-12;

pub fn energy(runs: &SharedRuns) -> CriterionReport {
    let start = Instant::now();
    let confined: Vec<&RunAudit> = runs.audits.iter().filter(|a| a.above_axis).collect();
    let worst = confined.iter().map(|a| a.max_step_increase).fold(0.0, f64::max);
    let (mut checked, mut worst_rel, mut worst_abs) = (0usize, 0.0f64, 0.0f64);
    let (mut drop, mut diss) = (0.0, 0.0);
    for d in runs.energy_run.diagnostics.iter().filter(|d| d.t > 0.5 + 1e-9 && d.t <= 5.0 + 1e-9) {
        if let (Some(e), Some(q)) = (d.energy_drop, d.dissipated) {
            drop += e;
            diss += q;
            if q > ENERGY_NOISE_FLOOR {
                checked += 1;
                worst_rel = worst_rel.max((e - q).abs() / q);
            } else {
                worst_abs = worst_abs.max((e - q).abs());
            }
        }
    }
    let integrated = (drop - diss).abs() / diss;
    let ok = worst <= 1e-7 && checked > 0 && worst_rel < 0.05 && worst_abs < 1e-13 && integrated < 0.05;
    CriterionReport::new(
        7,
        C7,
        ok,
        format!(
            "{} runs above the axis, largest step increase {worst:.1e}; on [0.5, 5]: {checked} samples above \
             the {ENERGY_NOISE_FLOOR:.0e} floor agree within {:.2e} (relative), the rest within {worst_abs:.1e} \
             (absolute), integrated mismatch {:.2e}",
            confined.len(),
            worst_rel,
            integrated
        ),
        start,
    )
}

pub fn intersection_principle(runs: &SharedRuns) -> CriterionReport {
    let start = Instant::now();
    let bad: Vec<String> = runs
        .audits
        .iter()
        .filter_map(|a| a.words.as_ref().err().map(|e| format!("sigma {}: {e}", a.sigma)))
        .collect();
    let detail = if bad.is_empty() {
        format!("{} runs, words non-increasing throughout", runs.audits.len())
    } else {
        bad.join("; ")
    };
    CriterionReport::new(8, C8, bad.is_empty(), detail, start)
}

/// Smallest gap `hi - lo` over the common sample times while both runs are alive.
pub fn pair_min_gap(hi: &Trajectory<f64>, lo: &Trajectory<f64>) -> f64 {
    hi.snapshots
        .iter()
        .zip(&lo.snapshots)
        .filter(|(a, b)| a.t == b.t)
        .map(|(a, b)| min_gap(&a.curve, &b.curve).unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min)
}

pub fn comparison(s: &VerifySettings) -> CriterionReport {
    let start = Instant::now();
    let inner = || -> Result<Vec<(f64, f64, f64)>> {
        let fam = InitialFamily::new(s.params()?, s.phi, 0.0)?;
        let mut ctl = s.ctl;
        ctl.snapshot_every = 1;
        let sigmas = [0.1, 0.5, 1.0, -0.5];
        let runs = classify_many(&fam, &sigmas, &ctl, &s.tols)?;
        let pairs = [(1, 0), (2, 1), (1, 3)];
        Ok(pairs
            .iter()
            .map(|&(h, l)| (sigmas[h], sigmas[l], pair_min_gap(&runs[h].1, &runs[l].1)))
            .collect())
    };
    match inner() {
        Ok(r) => {
            let ok = r.iter().all(|x| x.2 > -1e-9);
            let detail = r
                .iter()
                .map(|(h, l, g)| format!("{h} over {l}: min gap {g:.2e}"))
                .collect::<Vec<_>>()
                .join("; ");
            CriterionReport::new(9, C9, ok, detail, start)
        }
        Err(e) => CriterionReport::failed(9, C9, e, start),
    }
}

fn all_words(max_len: usize) -> Vec<SgnWord> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for bits in 0..(1u32 << len) {
            let letters = (0..len).map(|k| if bits >> k & 1 == 1 { Sign::Plus } else { Sign::Minus }).collect();
            out.push(SgnWord::new(letters).expect("non-empty"));
        }
    }
    out
}

/// Subsequence test by enumerating every subsequence of `w1`.
fn subword_oracle(w1: &SgnWord, w2: &SgnWord) -> bool {
    let l = w1.letters();
    (1u32..(1 << l.len())).any(|mask| {
        let sub: Vec<Sign> = (0..l.len()).filter(|k| mask >> k & 1 == 1).map(|k| l[k]).collect();
        sub == w2.letters()
    })
}

pub fn word_algebra() -> CriterionReport {
    let start = Instant::now();
    let words = all_words(4);
    let mut failures = Vec::new();
    for a in &words {
        if !subword(a, a) {
            failures.push(format!("{a} not reflexive"));
        }
        for b in &words {
            if subword(a, b) != subword_oracle(a, b) {
                failures.push(format!("{a} vs {b} disagrees with enumeration"));
            }
            if subword(a, b) && subword(b, a) && a != b {
                failures.push(format!("{a}, {b} not antisymmetric"));
            }
            for c in &words {
                if subword(a, b) && subword(b, c) && !subword(a, c) {
                    failures.push(format!("{a}, {b}, {c} not transitive"));
                }
            }
        }
    }
    let w = |s: &str| s.parse::<SgnWord>().expect("literal word");
    let examples = [("+-", "+", true), ("+-", "-", true), ("+-", "+-", true), ("+-", "-+", false)];
    for (a, b, want) in examples {
        if subword(&w(a), &w(b)) != want {
            failures.push(format!("[{a}] > [{b}] should be {want}"));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} words, {} pairs, {} triples checked", words.len(), words.len().pow(2), words.len().pow(3))
    } else {
        failures.join("; ")
    };
    CriterionReport::new(10, C10, failures.is_empty(), detail, start)
}

/// Runs the whole suite in criterion order.
pub fn run_all(s: &VerifySettings) -> Vec<CriterionReport> {
    let mut out = vec![equilibrium_stationarity(s), grim_reaper_order(s), circle_ode(s)];
    match SharedRuns::compute(s) {
        Ok(runs) => {
            out.push(lower_convergence(&runs));
            out.push(escape(&runs, s));
            out.push(threshold(&runs, s));
            out.push(energy(&runs));
            out.push(intersection_principle(&runs));
        }
        Err(e) => {
            let start = Instant::now();
            for (id, name) in [(4, C4), (5, C5), (6, C6), (7, C7), (8, C8)] {
                out.push(CriterionReport::failed(id, name, &e, start));
            }
        }
    }
    out.push(comparison(s));
    out.push(word_algebra());
    out
}
