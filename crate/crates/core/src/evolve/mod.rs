//! Time integration in the graph and polar charts with event detection.
//!
//! A run starts in the graph chart, hands over to the polar chart once the
//! slope exceeds [`StepControl::slope_switch`] and the curve is star-shaped,
//! and returns to the graph chart when the curve is a graph again with slope
//! below [`StepControl::slope_return`]. Events and diagnostics are evaluated at
//! every sample time; steps land exactly on sample times.

pub mod kernel;
mod switch;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    default_tolerance, endpoint_curvature_deviation, lyapunov_graph, sgn_word, Sign, SgnWord,
};
use crate::analytic::{gamma_lower, gamma_lower_polar, gamma_upper, initial_curve, upper_radius, InitialFamily};
use crate::classify::ClassifierTolerances;
use crate::error::{FlowError, Result};
use crate::geometry::{endpoint_tangents, GraphProfile, PolarProfile, ProblemParams, SampledCurve};
use crate::scalar::{lit, Scalar};

pub use kernel::{graph_rate, polar_rate, PolarGrid, RateInfo, Tridiag};
pub use switch::{switch_chart, to_graph, to_polar, Chart, ChartProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum StepScheme {
    /// Forward Euler.
    #[default]
    Explicit,
    /// Linearly implicit Euler on the tridiagonal, frozen-mobility Jacobian.
    SemiImplicit,
}

/// Time-step policy and chart hand-over thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl<T> {
    /// Step is `2 cfl / max diag(-J)`, i.e. `cfl dx^2` for a flat graph.
    pub cfl: T,
    pub dt_max: T,
    pub sample_interval: T,
    pub scheme: StepScheme,
    /// Step multiplier for the semi-implicit scheme.
    pub implicit_boost: T,
    pub slope_switch: T,
    pub slope_return: T,
    /// Keep every k-th sample as a snapshot (the first and last are always kept).
    pub snapshot_every: usize,
}

impl<T: Scalar> Default for StepControl<T> {
    fn default() -> Self {
        StepControl {
            cfl: lit(0.2),
            dt_max: lit(1e-3),
            sample_interval: lit(0.02),
            scheme: StepScheme::Explicit,
            implicit_boost: lit(10.0),
            slope_switch: lit(10.0),
            slope_return: lit(5.0),
            snapshot_every: 10,
        }
    }
}

impl<T: Scalar> StepControl<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FlowError::InvalidParams(m.to_string()));
        if !(self.cfl > T::zero()) {
            return bad("cfl must be positive");
        }
        if self.scheme == StepScheme::Explicit && self.cfl > lit(0.25) {
            return bad("cfl must not exceed 0.25 for the explicit scheme");
        }
        if !(self.dt_max > T::zero()) || !(self.sample_interval > T::zero()) || !(self.implicit_boost >= T::one()) {
            return bad("dt_max, sample_interval must be positive and implicit_boost >= 1");
        }
        if !(self.slope_return > T::zero()) || !(self.slope_return < self.slope_switch) {
            return bad("need 0 < slope_return < slope_switch");
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be at least 1");
        }
        Ok(())
    }

    /// Step size for a state with the given stiffness.
    pub fn step_size(&self, stiffness: T) -> T {
        let boost = match self.scheme {
            StepScheme::Explicit => T::one(),
            StepScheme::SemiImplicit => self.implicit_boost,
        };
        let stiff = lit::<T>(2.0) * self.cfl * boost / stiffness.max(T::min_positive_value());
        stiff.min(self.dt_max)
    }
}

fn advance<T: Scalar>(y: &mut [T], rate: &[T], jac: Option<&Tridiag<T>>, dt: T) {
    match jac {
        None => {
            for (v, r) in y.iter_mut().zip(rate) {
                *v = *v + dt * *r;
            }
        }
        Some(j) => {
            let mut delta: Vec<T> = rate.iter().map(|&r| dt * r).collect();
            kernel::solve_linearized(j, dt, &mut delta);
            for (v, d) in y.iter_mut().zip(&delta) {
                *v = *v + *d;
            }
        }
    }
}

/// One step of the graph chart. Returns the new profile and the step taken.
pub fn step_graph<T: Scalar>(g: &GraphProfile<T>, ctl: &StepControl<T>) -> Result<(GraphProfile<T>, T)> {
    step_graph_to(g, ctl, T::infinity())
}

fn step_graph_to<T: Scalar>(g: &GraphProfile<T>, ctl: &StepControl<T>, cap: T) -> Result<(GraphProfile<T>, T)> {
    let p = g.params();
    let mut u = g.heights().to_vec();
    let mut rate = Vec::new();
    let mut jac = Tridiag::default();
    let semi = ctl.scheme == StepScheme::SemiImplicit;
    let info = graph_rate(&u, p.dx(), p.force(), &mut rate, semi.then_some(&mut jac))?;
    let dt = ctl.step_size(info.stiffness).min(cap);
    advance(&mut u, &rate, semi.then_some(&jac), dt);
    let n = u.len();
    u[0] = T::zero();
    u[n - 1] = T::zero();
    Ok((GraphProfile::from_raw(*p, u), dt))
}

/// One step of the polar chart. Returns the new profile and the step taken.
pub fn step_polar<T: Scalar>(pr: &PolarProfile<T>, ctl: &StepControl<T>) -> Result<(PolarProfile<T>, T)> {
    step_polar_to(pr, ctl, T::infinity())
}

fn step_polar_to<T: Scalar>(pr: &PolarProfile<T>, ctl: &StepControl<T>, cap: T) -> Result<(PolarProfile<T>, T)> {
    let p = pr.params();
    let mut rho = pr.radii().to_vec();
    let mut rate = Vec::new();
    let mut jac = Tridiag::default();
    let semi = ctl.scheme == StepScheme::SemiImplicit;
    let info = polar_rate(&rho, &PolarGrid::new(p.dtheta()), p.force(), &mut rate, semi.then_some(&mut jac))?;
    let dt = ctl.step_size(info.stiffness).min(cap);
    advance(&mut rho, &rate, semi.then_some(&jac), dt);
    let n = rho.len();
    rho[0] = p.half_span();
    rho[n - 1] = p.half_span();
    Ok((PolarProfile::from_raw(*p, rho), dt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Escaped,
    ConvergedLower,
    ConvergedUpper,
    ChartLoss,
    HorizonReached,
    Blowup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationEvent<T> {
    pub kind: EventKind,
    pub t: T,
    pub detail: String,
}

/// Diagnostics at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord<T> {
    pub t: T,
    pub chart: Chart,
    pub length: T,
    pub area: T,
    pub energy: T,
    /// `J[u] - A int u dx`, graph chart only.
    pub lyapunov: Option<T>,
    /// `int (kappa - A)^2 ds` with the scheme's own curvature: exactly `-dE_h/dt`.
    pub dissipation: T,
    /// `E` at the previous sample minus `E` now, when no chart switch intervened.
    pub energy_drop: Option<T>,
    /// `int dissipation dt` over the same interval, accumulated per step.
    pub dissipated: Option<T>,
    pub z: Option<usize>,
    pub sgn: Option<SgnWord>,
    pub kappa_dev_p: T,
    pub kappa_dev_q: T,
    pub tangent_y_p: T,
    pub min_y: T,
    pub dist_lower: T,
    pub dist_upper: Option<T>,
    /// `min (rho - rho^*) / sin(theta)` over interior vertices.
    pub escape_margin: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub chart: Chart,
    pub curve: SampledCurve<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub params: ProblemParams<T>,
    pub sigma: T,
    pub snapshots: Vec<Snapshot<T>>,
    pub diagnostics: Vec<DiagnosticRecord<T>>,
    pub event: TerminationEvent<T>,
    /// Largest energy increase over a single step, chart switches excluded.
    pub max_step_energy_increase: T,
    pub chart_switches: Vec<(T, Chart)>,
    pub steps: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_record(&self) -> &DiagnosticRecord<T> {
        self.diagnostics.last().expect("trajectory has at least one sample")
    }

    pub fn final_curve(&self) -> &SampledCurve<T> {
        &self.snapshots.last().expect("trajectory has at least one snapshot").curve
    }

    pub fn final_sgn(&self) -> Option<&SgnWord> {
        self.diagnostics.iter().rev().find_map(|d| d.sgn.as_ref())
    }

    /// Smallest sup-distance to the upper arc over the samples, with its time.
    pub fn closest_approach_upper(&self) -> Option<(T, T)> {
        self.diagnostics
            .iter()
            .filter_map(|d| d.dist_upper.map(|v| (v, d.t)))
            .fold(None, |best, cur| match best {
                Some(b) if b.0 <= cur.0 => Some(b),
                _ => Some(cur),
            })
    }

    /// Total sampled time spent within `radius` of the upper arc.
    pub fn dwell_upper(&self, radius: T) -> T {
        self.diagnostics
            .windows(2)
            .filter(|w| w[1].dist_upper.is_some_and(|v| v < radius))
            .fold(T::zero(), |acc, w| acc + (w[1].t - w[0].t))
    }
}

/// Switches for a single run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Terminate on convergence to the upper arc; disabled for critical runs.
    pub stop_on_upper: bool,
    /// Terminate on convergence to the lower cap.
    pub stop_on_lower: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { stop_on_upper: true, stop_on_lower: true }
    }
}

enum State<T> {
    Graph(Vec<T>),
    Polar(Vec<T>),
}

impl<T: Scalar> State<T> {
    fn chart(&self) -> Chart {
        match self {
            State::Graph(_) => Chart::Graph,
            State::Polar(_) => Chart::Polar,
        }
    }
}

/// Reference data on the run's grids.
struct Targets<T> {
    lower_graph: Vec<T>,
    lower_polar: Vec<T>,
    upper_polar: Vec<T>,
    upper_curve: SampledCurve<T>,
    sin: Vec<T>,
    word_tol: T,
}

struct Runner<'a, T: Scalar> {
    params: ProblemParams<T>,
    ctl: &'a StepControl<T>,
    tols: &'a ClassifierTolerances<T>,
    opts: EvolveOptions,
    sigma: T,
    grid: PolarGrid<T>,
    targets: Targets<T>,
    rate: Vec<T>,
    jac: Tridiag<T>,
}

impl<'a, T: Scalar> Runner<'a, T> {
    fn rate(&mut self, state: &State<T>, with_jac: bool) -> Result<RateInfo<T>> {
        let jac = if with_jac { Some(&mut self.jac) } else { None };
        match state {
            State::Graph(u) => graph_rate(u, self.params.dx(), self.params.force(), &mut self.rate, jac),
            State::Polar(r) => polar_rate(r, &self.grid, self.params.force(), &mut self.rate, jac),
        }
    }

    fn sampled(&self, state: &State<T>) -> SampledCurve<T> {
        match state {
            State::Graph(u) => GraphProfile::from_raw(self.params, u.clone()).to_sampled(),
            State::Polar(r) => PolarProfile::from_raw(self.params, r.clone()).to_sampled(),
        }
    }

    fn record(&mut self, t: T, state: &State<T>, curve: &SampledCurve<T>) -> Result<DiagnosticRecord<T>> {
        let info = self.rate(state, false)?;
        let force = self.params.force();
        let tg = &self.targets;
        let (dist_lower, dist_upper, margin, lyapunov) = match state {
            State::Graph(u) => {
                let dl = sup_abs_diff(u, &tg.lower_graph);
                let (du, m) = if curve.is_star_shaped() {
                    radial_upper(curve, &self.params)
                } else {
                    (None, None)
                };
                let ly = lyapunov_graph(&GraphProfile::from_raw(self.params, u.clone())).monitor;
                (dl, du, m, Some(ly))
            }
            State::Polar(r) => {
                let dl = sup_abs_diff(r, &tg.lower_polar);
                let du = sup_abs_diff(r, &tg.upper_polar);
                let n = r.len();
                let m = (1..n - 1)
                    .map(|j| (r[j] - tg.upper_polar[j]) / tg.sin[j])
                    .fold(T::infinity(), T::min);
                (dl, Some(du), Some(m), None)
            }
        };
        let sgn = sgn_word(curve, &tg.upper_curve, tg.word_tol).ok();
        let (kp, kq) = endpoint_curvature_deviation(curve, force);
        let tan = endpoint_tangents(curve);
        Ok(DiagnosticRecord {
            t,
            chart: state.chart(),
            length: info.length,
            area: info.area,
            energy: info.energy,
            lyapunov,
            dissipation: info.dissipation,
            energy_drop: None,
            dissipated: None,
            z: sgn.as_ref().map(|w| w.z()),
            sgn,
            kappa_dev_p: kp,
            kappa_dev_q: kq,
            tangent_y_p: tan.at_p[1],
            min_y: curve.min_y(),
            dist_lower,
            dist_upper,
            escape_margin: margin,
        })
    }

    fn check_events(&self, rec: &DiagnosticRecord<T>, tangent_y_q: T) -> Option<(EventKind, String)> {
        let tols = self.tols;
        let escaped_word = rec.sgn.as_ref().is_some_and(|w| w.len() == 1 && w.is_all(Sign::Plus));
        if rec.t > T::zero() && escaped_word {
            if let Some(m) = rec.escape_margin {
                if m > tols.escape_gap {
                    return Some((EventKind::Escaped, format!("clearance {m} above the upper arc")));
                }
            }
        }
        if self.sigma > T::zero() && rec.t > T::zero() && (rec.tangent_y_p <= T::zero() || tangent_y_q >= T::zero()) {
            return Some((EventKind::ChartLoss, "endpoint tangent no longer points into the upper half-plane".into()));
        }
        if self.opts.stop_on_lower && rec.dist_lower < tols.converge && rec.dissipation < tols.dissipation {
            return Some((EventKind::ConvergedLower, format!("sup-distance {}", rec.dist_lower)));
        }
        if self.opts.stop_on_upper {
            if let Some(d) = rec.dist_upper {
                if d < tols.converge && rec.dissipation < tols.dissipation {
                    return Some((EventKind::ConvergedUpper, format!("sup-distance {d}")));
                }
            }
        }
        None
    }

    /// Chart hand-over after a sample, if the policy asks for one.
    fn maybe_switch(&self, state: &State<T>, curve: &SampledCurve<T>, max_slope: T) -> Option<State<T>> {
        match state {
            State::Graph(_) if max_slope > self.ctl.slope_switch && curve.is_star_shaped() => {
                to_polar(curve, &self.params).ok().map(|p| State::Polar(p.into_radii()))
            }
            State::Polar(_) if curve.is_x_monotone() => {
                let g = to_graph(curve, &self.params).ok()?;
                (g.max_slope() < self.ctl.slope_return).then(|| State::Graph(g.into_heights()))
            }
            _ => None,
        }
    }
}

fn sup_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max)
}

fn radial_upper<T: Scalar>(c: &SampledCurve<T>, params: &ProblemParams<T>) -> (Option<T>, Option<T>) {
    let th = c.polar_angles();
    let pts = c.points();
    let n = pts.len();
    let mut dist = T::zero();
    let mut margin = T::infinity();
    for i in 1..n - 1 {
        let r = pts[i][0].hypot(pts[i][1]);
        let gap = r - upper_radius(params, th[i]);
        dist = dist.max(gap.abs());
        margin = margin.min(gap / th[i].sin());
    }
    (Some(dist), Some(margin))
}

/// Integrates a profile in its own chart up to `t_end`, without events or
/// chart changes.
pub fn integrate_profile<T: Scalar>(profile: ChartProfile<T>, ctl: &StepControl<T>, t_end: T) -> Result<ChartProfile<T>> {
    ctl.validate()?;
    let mut t = T::zero();
    let mut cur = profile;
    while t < t_end {
        let (next, dt) = match &cur {
            ChartProfile::Graph(g) => {
                let (g2, dt) = step_graph_to(g, ctl, t_end - t)?;
                (ChartProfile::Graph(g2), dt)
            }
            ChartProfile::Polar(p) => {
                let (p2, dt) = step_polar_to(p, ctl, t_end - t)?;
                (ChartProfile::Polar(p2), dt)
            }
        };
        cur = next;
        t = if dt >= t_end - t { t_end } else { t + dt };
    }
    Ok(cur)
}

/// Evolves the family member until the first termination event.
pub fn evolve<T: Scalar>(fam: &InitialFamily<T>, ctl: &StepControl<T>, tols: &ClassifierTolerances<T>) -> Result<Trajectory<T>> {
    evolve_with(fam, ctl, tols, EvolveOptions::default())
}

pub fn evolve_with<T: Scalar>(
    fam: &InitialFamily<T>,
    ctl: &StepControl<T>,
    tols: &ClassifierTolerances<T>,
    opts: EvolveOptions,
) -> Result<Trajectory<T>> {
    ctl.validate()?;
    tols.validate()?;
    let params = fam.params;
    let g0 = initial_curve(fam)?;
    let (_, sin) = params.trig_table();
    let targets = Targets {
        lower_graph: gamma_lower(&params).into_heights(),
        lower_polar: gamma_lower_polar(&params).into_radii(),
        upper_polar: gamma_upper(&params).into_radii(),
        upper_curve: gamma_upper(&params).to_sampled(),
        sin,
        word_tol: default_tolerance(&params),
    };
    let mut run = Runner {
        params,
        ctl,
        tols,
        opts,
        sigma: fam.sigma,
        grid: PolarGrid::new(params.dtheta()),
        targets,
        rate: Vec::new(),
        jac: Tridiag::default(),
    };
    let semi = ctl.scheme == StepScheme::SemiImplicit;
    let mut state = State::Graph(g0.into_heights());
    let mut snapshots = Vec::new();
    let mut diagnostics: Vec<DiagnosticRecord<T>> = Vec::new();
    let mut switches = Vec::new();
    let mut max_inc = T::zero();
    let mut pending: Option<(T, T)> = None;
    let mut steps = 0usize;
    let mut t = T::zero();
    let mut k: usize = 0;

    let event = 'run: loop {
        // sample at time t
        let curve = run.sampled(&state);
        let mut rec = match run.record(t, &state, &curve) {
            Ok(r) => r,
            Err(e) => break 'run (EventKind::Blowup, e.to_string()),
        };
        if let Some((drop, dissipated)) = pending.take() {
            rec.energy_drop = Some(drop);
            rec.dissipated = Some(dissipated);
        }
        let tan_q = endpoint_tangents(&curve).at_q[1];
        let event = run.check_events(&rec, tan_q);
        let keep_snapshot = k.is_multiple_of(ctl.snapshot_every) || event.is_some() || t >= tols.t_max;
        if keep_snapshot {
            snapshots.push(Snapshot { t, chart: state.chart(), curve: curve.clone() });
        }
        diagnostics.push(rec);
        if let Some(ev) = event {
            break 'run ev;
        }
        if t >= tols.t_max {
            break 'run (EventKind::HorizonReached, "horizon reached".into());
        }
        let max_slope = match &state {
            State::Graph(u) => GraphProfile::from_raw(params, u.clone()).max_slope(),
            State::Polar(_) => T::zero(),
        };
        let mut chart_fresh = false;
        if let Some(next) = run.maybe_switch(&state, &curve, max_slope) {
            log::debug!("t = {t}: switching to the {} chart", next.chart());
            switches.push((t, next.chart()));
            state = next;
            chart_fresh = true;
        }

        // integrate to the next sample
        k += 1;
        let next_t = (lit::<T>(k as f64) * ctl.sample_interval).min(tols.t_max);
        let mut last_energy: Option<T> = None;
        let mut dissipated = T::zero();
        let start_energy = if chart_fresh { None } else { diagnostics.last().map(|d| d.energy) };
        loop {
            let info = match run.rate(&state, semi) {
                Ok(i) => i,
                Err(e) => {
                    snapshots.push(Snapshot { t, chart: state.chart(), curve: run.sampled(&state) });
                    break 'run (EventKind::Blowup, e.to_string());
                }
            };
            if let Some(e) = last_energy {
                max_inc = max_inc.max(info.energy - e);
            }
            last_energy = Some(info.energy);
            if t >= next_t {
                break;
            }
            let mut dt = ctl.step_size(info.stiffness);
            let remaining = next_t - t;
            if remaining <= dt * lit::<T>(1.000001) {
                dt = remaining;
            }
            let y = match &mut state {
                State::Graph(u) => u,
                State::Polar(r) => r,
            };
            advance(y, &run.rate, semi.then_some(&run.jac), dt);
            let n = y.len();
            let pin = match state.chart() {
                Chart::Graph => T::zero(),
                Chart::Polar => params.half_span(),
            };
            let y = match &mut state {
                State::Graph(u) => u,
                State::Polar(r) => r,
            };
            y[0] = pin;
            y[n - 1] = pin;
            dissipated = dissipated + dt * info.dissipation;
            t = if dt == remaining { next_t } else { t + dt };
            steps += 1;
        }
        if let (Some(e0), Some(e1)) = (start_energy, last_energy) {
            pending = Some((e0 - e1, dissipated));
        }
    };

    let (kind, detail) = event;
    let t_event = if kind == EventKind::Blowup { t } else { diagnostics.last().map_or(t, |d| d.t) };
    Ok(Trajectory {
        params,
        sigma: fam.sigma,
        snapshots,
        diagnostics,
        event: TerminationEvent { kind, t: t_event, detail },
        max_step_energy_increase: max_inc,
        chart_switches: switches,
        steps,
    })
}
