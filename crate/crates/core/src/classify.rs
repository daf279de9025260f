//! Per-sigma classification, sigma sweeps and bisection for the threshold.

use serde::{Deserialize, Serialize};

use crate::analysis::{Sign, SgnWord};
use crate::analytic::{upper_radius, InitialFamily};
use crate::error::{FlowError, Result};
use crate::evolve::{evolve, evolve_with, EventKind, EvolveOptions, StepControl, Trajectory};
use crate::scalar::{lit, Scalar};

/// Environment variable capping the number of concurrent runs.
pub const THREADS_ENV: &str = "EXTREMALFLOW_THREADS";

/// Finite-time proxies for the long-time statements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTolerances<T> {
    /// Sup-distance to an equilibrium for lock-in.
    pub converge: T,
    /// Clearance above the upper arc required to declare escape.
    pub escape_gap: T,
    /// Ceiling on the dissipation rate for lock-in.
    pub dissipation: T,
    /// Horizon.
    pub t_max: T,
}

impl<T: Scalar> Default for ClassifierTolerances<T> {
    fn default() -> Self {
        ClassifierTolerances { converge: lit(1e-3), escape_gap: lit(0.05), dissipation: lit(1e-6), t_max: lit(50.0) }
    }
}

impl<T: Scalar> ClassifierTolerances<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.converge, self.escape_gap, self.dissipation, self.t_max];
        if all.iter().all(|v| *v > T::zero() && v.is_finite()) {
            Ok(())
        } else {
            Err(FlowError::InvalidParams("classifier tolerances must be positive and finite".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Escape,
    ConvergeUpper,
    ConvergeLower,
    Undetermined,
}

impl Category {
    /// Position in the expected order along increasing sigma.
    pub fn rank(self) -> u8 {
        match self {
            Category::ConvergeLower => 0,
            Category::Undetermined | Category::ConvergeUpper => 1,
            Category::Escape => 2,
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

fn is_plus(w: Option<&SgnWord>) -> bool {
    w.is_some_and(|w| w.len() == 1 && w.is_all(Sign::Plus))
}

/// Category implied by a finished trajectory, and whether it blew up.
pub fn category_of<T: Scalar>(traj: &Trajectory<T>) -> (Category, bool) {
    match traj.event.kind {
        EventKind::Escaped => (Category::Escape, false),
        EventKind::ConvergedLower => (Category::ConvergeLower, false),
        EventKind::ConvergedUpper => (Category::ConvergeUpper, false),
        EventKind::HorizonReached => (Category::Undetermined, false),
        EventKind::ChartLoss if is_plus(traj.final_sgn()) => (Category::Escape, false),
        EventKind::ChartLoss => (Category::Undetermined, false),
        EventKind::Blowup => (Category::Undetermined, true),
    }
}

pub fn classify<T: Scalar>(
    fam: &InitialFamily<T>,
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
) -> Result<(Category, Trajectory<T>)> {
    let traj = evolve(fam, ctl, tols)?;
    let (cat, blowup) = category_of(&traj);
    if blowup {
        log::warn!("sigma = {}: run blew up at t = {} ({})", fam.sigma, traj.event.t, traj.event.detail);
    }
    Ok((cat, traj))
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub sigma: T,
    pub category: Category,
    pub event: EventKind,
    pub t_event: T,
    pub final_sgn: Option<SgnWord>,
    pub blowup: bool,
}

fn row_of<T: Scalar>(sigma: T, traj: &Trajectory<T>) -> SweepRow<T> {
    let (category, blowup) = category_of(traj);
    SweepRow {
        sigma,
        category,
        event: traj.event.kind,
        t_event: traj.event.t,
        final_sgn: traj.final_sgn().cloned(),
        blowup,
    }
}

/// Worker pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| FlowError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(FlowError::Config(format!("{THREADS_ENV} must be at least 1")));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| FlowError::Config(e.to_string()))
}

fn run_many<T: Scalar>(
    pool: &rayon::ThreadPool,
    fam: &InitialFamily<T>,
    sigmas: &[T],
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
) -> Result<Vec<Trajectory<T>>> {
    use rayon::prelude::*;
    pool.install(|| {
        sigmas
            .par_iter()
            .map(|&s| evolve(&fam.with_sigma(s)?, ctl, tols))
            .collect::<Result<Vec<_>>>()
    })
}

/// Classifies every sigma concurrently, keeping the trajectories.
pub fn classify_many<T: Scalar>(
    fam: &InitialFamily<T>,
    sigmas: &[T],
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
) -> Result<Vec<(Category, Trajectory<T>)>> {
    let pool = thread_pool()?;
    let trajs = run_many(&pool, fam, sigmas, ctl, tols)?;
    Ok(trajs.into_iter().map(|t| (category_of(&t).0, t)).collect())
}

/// Sweep results in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable<T> {
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Scalar> SweepTable<T> {
    /// Escape must not precede a lower convergence along increasing sigma.
    pub fn audit(&self) -> Result<()> {
        let mut sorted: Vec<&SweepRow<T>> = self.rows.iter().collect();
        sorted.sort_by(|a, b| a.sigma.partial_cmp(&b.sigma).expect("finite sigma"));
        for w in sorted.windows(2) {
            if w[1].category.rank() < w[0].category.rank() {
                return Err(FlowError::Monotonicity(format!(
                    "sigma = {} is {} but the smaller sigma = {} is {}",
                    w[1].sigma, w[1].category, w[0].sigma, w[0].category
                )));
            }
        }
        Ok(())
    }
}

/// Classifies every sigma without auditing the result.
pub fn sweep_unchecked<T: Scalar>(
    fam: &InitialFamily<T>,
    sigmas: &[T],
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
) -> Result<SweepTable<T>> {
    if let Some(s) = sigmas.iter().find(|s| !s.is_finite()) {
        return Err(FlowError::InvalidParams(format!("sigma = {s} is not finite")));
    }
    let pool = thread_pool()?;
    let trajs = run_many(&pool, fam, sigmas, ctl, tols)?;
    Ok(SweepTable { rows: sigmas.iter().zip(&trajs).map(|(&s, t)| row_of(s, t)).collect() })
}

/// Classifies every sigma; a non-monotone outcome is an error.
pub fn sweep<T: Scalar>(
    fam: &InitialFamily<T>,
    sigmas: &[T],
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
) -> Result<SweepTable<T>> {
    let table = sweep_unchecked(fam, sigmas, ctl, tols)?;
    table.audit()?;
    Ok(table)
}

/// Side of the threshold assigned to a midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

/// Side for an undetermined run: `[-]` is lower, `[+]` upper; otherwise the
/// sign of the mean radial gap to the upper arc, which near the arc is
/// dominated by its single unstable mode.
pub fn vote<T: Scalar>(traj: &Trajectory<T>) -> Side {
    match traj.final_sgn() {
        Some(w) if w.len() == 1 && w.is_all(Sign::Minus) => return Side::Lower,
        Some(w) if w.len() == 1 && w.is_all(Sign::Plus) => return Side::Upper,
        _ => {}
    }
    let c = traj.final_curve();
    if c.is_star_shaped() {
        let th = c.polar_angles();
        let pts = c.points();
        let mut acc = T::zero();
        for i in 1..pts.len() - 1 {
            let gap = pts[i][0].hypot(pts[i][1]) - upper_radius(&traj.params, th[i]);
            acc = acc + gap * th[i].sin() * (th[i - 1] - th[i + 1]);
        }
        if acc > T::zero() {
            return Side::Upper;
        }
        if acc < T::zero() {
            return Side::Lower;
        }
    }
    let last = traj.final_record();
    match last.dist_upper {
        Some(d) if d < last.dist_lower => Side::Upper,
        _ => Side::Lower,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectStep<T> {
    pub iteration: usize,
    pub sigma: T,
    pub category: Category,
    pub side: Side,
    pub voted: bool,
    pub t_event: T,
    pub final_sgn: Option<SgnWord>,
}

/// `lo` converges to the lower cap, `hi` escapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub width: T,
    pub grid_n: usize,
    pub tolerances: ClassifierTolerances<T>,
    pub log: Vec<BisectStep<T>>,
}

impl<T: Scalar> Bracket<T> {
    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) * lit::<T>(0.5)
    }
}

fn side_of<T: Scalar>(traj: &Trajectory<T>) -> (Category, Side, bool) {
    let (cat, _) = category_of(traj);
    match cat {
        Category::Escape => (cat, Side::Upper, false),
        Category::ConvergeLower => (cat, Side::Lower, false),
        _ => (cat, vote(traj), true),
    }
}

/// Bisection on sigma. Each round also evaluates both candidate quarter
/// points concurrently and keeps the one the midpoint selects.
pub fn bisect_sigma_star<T: Scalar>(
    fam: &InitialFamily<T>,
    lo0: T,
    hi0: T,
    width_tol: T,
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
) -> Result<Bracket<T>> {
    bisect_observed(fam, lo0, hi0, width_tol, ctl, tols, &|_| {})
}

/// As [`bisect_sigma_star`], handing every finished trajectory (including
/// discarded speculative ones) to `observe`.
pub fn bisect_observed<T: Scalar>(
    fam: &InitialFamily<T>,
    lo0: T,
    hi0: T,
    width_tol: T,
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
    observe: &(dyn Fn(&Trajectory<T>) + Sync),
) -> Result<Bracket<T>> {
    if !(lo0 < hi0) || !lo0.is_finite() || !hi0.is_finite() {
        return Err(FlowError::InvalidBracket(format!("need finite lo < hi, got [{lo0}, {hi0}]")));
    }
    if !(width_tol > T::zero()) {
        return Err(FlowError::InvalidBracket("width tolerance must be positive".into()));
    }
    let pool = thread_pool()?;
    let ends = run_many(&pool, fam, &[lo0, hi0], ctl, tols)?;
    ends.iter().for_each(observe);
    let (c_lo, _) = category_of(&ends[0]);
    let (c_hi, _) = category_of(&ends[1]);
    if c_lo != Category::ConvergeLower {
        return Err(FlowError::InvalidBracket(format!("lower end sigma = {lo0} classifies as {c_lo}, not ConvergeLower")));
    }
    if c_hi != Category::Escape {
        return Err(FlowError::InvalidBracket(format!("upper end sigma = {hi0} classifies as {c_hi}, not Escape")));
    }
    let half = lit::<T>(0.5);
    let (mut lo, mut hi) = (lo0, hi0);
    let mut log = Vec::new();
    let record = |log: &mut Vec<BisectStep<T>>, sigma: T, traj: &Trajectory<T>| -> Side {
        let (category, side, voted) = side_of(traj);
        if voted {
            log::info!("sigma = {sigma}: {category}, voted {side:?}");
        }
        log.push(BisectStep {
            iteration: log.len() + 1,
            sigma,
            category,
            side,
            voted,
            t_event: traj.event.t,
            final_sgn: traj.final_sgn().cloned(),
        });
        side
    };
    while hi - lo > width_tol {
        let mid = (lo + hi) * half;
        let two_levels = (hi - lo) * half > width_tol;
        let sigmas = if two_levels { vec![mid, (lo + mid) * half, (mid + hi) * half] } else { vec![mid] };
        let trajs = run_many(&pool, fam, &sigmas, ctl, tols)?;
        trajs.iter().for_each(observe);
        match record(&mut log, mid, &trajs[0]) {
            Side::Upper => hi = mid,
            Side::Lower => lo = mid,
        }
        if two_levels {
            let (q, traj) = if hi == mid { (sigmas[1], &trajs[1]) } else { (sigmas[2], &trajs[2]) };
            match record(&mut log, q, traj) {
                Side::Upper => hi = q,
                Side::Lower => lo = q,
            }
        }
    }
    Ok(Bracket { lo, hi, width: hi - lo, grid_n: fam.params.grid_n(), tolerances: *tols, log })
}

/// Shadowing diagnostics of a run started inside a bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalReport<T> {
    pub sigma: T,
    pub closest_distance: T,
    pub closest_time: T,
    pub dwell_radius: T,
    pub dwell_time: T,
    /// Every sample before the run first came within `dwell_radius` of the
    /// upper arc had word `[- + -]`.
    pub word_held: bool,
    pub trajectory: Trajectory<T>,
}

/// Runs without stopping at the upper arc, up to `horizon`.
pub fn critical_run<T: Scalar>(
    fam: &InitialFamily<T>,
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
    horizon: T,
) -> Result<CriticalReport<T>> {
    let mut t2 = *tols;
    t2.t_max = horizon;
    let traj = evolve_with(fam, ctl, &t2, EvolveOptions { stop_on_upper: false, ..EvolveOptions::default() })?;
    let dwell_radius = lit::<T>(10.0) * tols.converge;
    let (closest_distance, closest_time) = traj.closest_approach_upper().unwrap_or((T::infinity(), T::zero()));
    let dwell_time = traj.dwell_upper(dwell_radius);
    let expected: SgnWord = "-+-".parse().expect("literal word");
    let word_held = traj
        .diagnostics
        .iter()
        .take_while(|d| !d.dist_upper.is_some_and(|v| v < dwell_radius))
        .all(|d| d.sgn.as_ref() == Some(&expected));
    Ok(CriticalReport { sigma: fam.sigma, closest_distance, closest_time, dwell_radius, dwell_time, word_held, trajectory: traj })
}
