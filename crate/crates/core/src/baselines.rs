//! Classical exposure controllers used as comparison points: a surrogate
//! built-in auto-exposure loop and a Nelder-Mead parameter search.
//!
//! The built-in surrogate adjusts one parameter at a time toward a mid-tone
//! setpoint, the way vendor AE firmware is commonly described: exposure time
//! first, gain only once exposure time is pinned at a limit. Nelder-Mead
//! searches (log exposure time, gain) jointly and is exposed both as a batch
//! optimizer and as a resumable state machine so an evaluation harness can
//! feed it one captured frame per probe.

use crate::camsim::ExposureParams;
use crate::error::{LabError, Result};

/// Target mean intensity for the surrogate AE loop.
pub const AE_SETPOINT: f64 = 0.5;
/// Half-width of the no-op band around the setpoint.
pub const AE_DEADBAND: f64 = 0.02;
/// Proportional strength of the log-domain correction per step.
pub const AE_KAPPA: f64 = 0.5;

/// One step of the surrogate built-in auto-exposure controller.
///
/// The controller moves the log of the controlled parameter a fraction
/// [`AE_KAPPA`] of the way toward the value that would hit [`AE_SETPOINT`],
/// assuming a linear sensor. Exposure time is adjusted by the factor
/// `(setpoint / mean)^kappa`; gain moves only when exposure time is already
/// pinned at the limit in the direction the correction pushes, by the
/// equivalent `20 * kappa * log10(setpoint / mean)` decibels. Means inside
/// the deadband leave the parameters untouched.
pub fn builtin_ae_step(mean_intensity: f64, params: ExposureParams) -> ExposureParams {
    let mean = mean_intensity.clamp(0.0, 1.0);
    if (mean - AE_SETPOINT).abs() < AE_DEADBAND {
        return params;
    }
    let factor = (AE_SETPOINT / mean).powf(AE_KAPPA);
    let pushed = ExposureParams::clamped(params.exposure_time_ms * factor, params.gain_db);
    if pushed.exposure_time_ms != params.exposure_time_ms {
        return pushed;
    }
    let delta_db = 20.0 * AE_KAPPA * (AE_SETPOINT / mean).log10();
    ExposureParams::clamped(params.exposure_time_ms, params.gain_db + delta_db)
}

/// Rectangular search region in (ln exposure-time-ms, gain-dB) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub ln_exposure_ms: (f64, f64),
    pub gain_db: (f64, f64),
}

impl SearchBox {
    pub fn new(ln_exposure_ms: (f64, f64), gain_db: (f64, f64)) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(ln_exposure_ms) || !ok(gain_db) {
            return Err(LabError::Argument(format!(
                "degenerate search box: ln exposure {ln_exposure_ms:?}, gain {gain_db:?}"
            )));
        }
        Ok(Self { ln_exposure_ms, gain_db })
    }

    /// The full range the camera accepts.
    pub fn full_camera_range() -> Self {
        Self {
            ln_exposure_ms: (
                ExposureParams::EXPOSURE_MIN_MS.ln(),
                ExposureParams::EXPOSURE_MAX_MS.ln(),
            ),
            gain_db: (ExposureParams::GAIN_MIN_DB, ExposureParams::GAIN_MAX_DB),
        }
    }

    pub fn project(&self, p: [f64; 2]) -> [f64; 2] {
        [
            p[0].clamp(self.ln_exposure_ms.0, self.ln_exposure_ms.1),
            p[1].clamp(self.gain_db.0, self.gain_db.1),
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.ln_exposure_ms.0..=self.ln_exposure_ms.1).contains(&p[0])
            && (self.gain_db.0..=self.gain_db.1).contains(&p[1])
    }

    pub fn params_at(&self, p: [f64; 2]) -> ExposureParams {
        ExposureParams::clamped(p[0].exp(), p[1])
    }

    pub fn point_of(&self, params: ExposureParams) -> [f64; 2] {
        self.project([params.exposure_time_ms.ln(), params.gain_db])
    }
}

/// Simplex reflection coefficient.
pub const NM_REFLECTION: f64 = 1.0;
/// Simplex expansion coefficient.
pub const NM_EXPANSION: f64 = 2.0;
/// Simplex contraction coefficient.
pub const NM_CONTRACTION: f64 = 0.5;
/// Simplex shrink coefficient.
pub const NM_SHRINK: f64 = 0.5;
/// Search stops once the largest vertex-to-vertex distance falls below this.
pub const NM_DIAMETER_TOLERANCE: f64 = 1e-3;
/// Initial simplex edge length as a fraction of each box extent.
const NM_INITIAL_STEP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
struct Vertex {
    point: [f64; 2],
    value: f64,
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Init { next: usize },
    Reflect,
    Expand { reflected: Vertex },
    ContractOutside { reflected: Vertex },
    ContractInside,
    Shrink { next: usize },
    Done,
}

/// Nelder-Mead search over a [`SearchBox`], driven one evaluation at a time.
///
/// Callers alternate [`next_point`](Self::next_point) and
/// [`report`](Self::report): the machine hands out the next point it wants
/// evaluated (always projected into the box) and consumes the measured
/// objective value, maximizing. `next_point` returns `None` once the simplex
/// diameter drops below [`NM_DIAMETER_TOLERANCE`] or the evaluation budget is
/// spent. This shape lets a sequential controller spend exactly one captured
/// frame per objective probe.
#[derive(Debug, Clone)]
pub struct NelderMead {
    bounds: SearchBox,
    budget: usize,
    init_points: [[f64; 2]; 3],
    simplex: Vec<Vertex>,
    phase: Phase,
    pending: Option<[f64; 2]>,
    best: Option<Vertex>,
    evaluations: usize,
    trace: Vec<([f64; 2], f64)>,
}

impl NelderMead {
    /// Starts a search from `start` (internal coordinates, projected into
    /// `bounds`). `budget` caps the number of objective evaluations.
    pub fn new(bounds: SearchBox, start: [f64; 2], budget: usize) -> Result<Self> {
        if budget < 3 {
            return Err(LabError::Argument(format!(
                "evaluation budget {budget} cannot seed a 3-vertex simplex"
            )));
        }
        if !start.iter().all(|v| v.is_finite()) {
            return Err(LabError::Argument(format!("non-finite start point {start:?}")));
        }
        let p0 = bounds.project(start);
        let mut init_points = [p0; 3];
        let extents = [
            bounds.ln_exposure_ms.1 - bounds.ln_exposure_ms.0,
            bounds.gain_db.1 - bounds.gain_db.0,
        ];
        let highs = [bounds.ln_exposure_ms.1, bounds.gain_db.1];
        for axis in 0..2 {
            let step = NM_INITIAL_STEP_FRACTION * extents[axis];
            let mut p = p0;
            p[axis] += if p[axis] + step <= highs[axis] { step } else { -step };
            init_points[axis + 1] = bounds.project(p);
        }
        Ok(Self {
            bounds,
            budget,
            init_points,
            simplex: Vec::with_capacity(3),
            phase: Phase::Init { next: 0 },
            pending: None,
            best: None,
            evaluations: 0,
            trace: Vec::new(),
        })
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Every evaluated point with its objective value, in evaluation order.
    pub fn trace(&self) -> &[([f64; 2], f64)] {
        &self.trace
    }

    /// Best evaluated point so far; `None` until the first report.
    pub fn best(&self) -> Option<([f64; 2], f64)> {
        self.best.map(|v| (v.point, v.value))
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self.phase, Phase::Done) || self.evaluations >= self.budget
    }

    /// The next point whose objective value the search needs, or `None` once
    /// terminated. Repeated calls without an intervening [`report`](Self::report)
    /// return the same point.
    pub fn next_point(&mut self) -> Option<[f64; 2]> {
        if let Some(p) = self.pending {
            return Some(p);
        }
        if self.is_terminated() {
            return None;
        }
        let candidate = match self.phase {
            Phase::Init { next } => self.init_points[next],
            Phase::Reflect => self.step_point(NM_REFLECTION),
            Phase::Expand { .. } => self.step_point(NM_EXPANSION),
            Phase::ContractOutside { reflected } => {
                let c = self.centroid();
                self.bounds.project([
                    c[0] + NM_CONTRACTION * (reflected.point[0] - c[0]),
                    c[1] + NM_CONTRACTION * (reflected.point[1] - c[1]),
                ])
            }
            Phase::ContractInside => self.step_point(-NM_CONTRACTION),
            Phase::Shrink { next } => {
                let best = self.simplex[0].point;
                let p = self.simplex[next].point;
                self.bounds.project([
                    best[0] + NM_SHRINK * (p[0] - best[0]),
                    best[1] + NM_SHRINK * (p[1] - best[1]),
                ])
            }
            Phase::Done => unreachable!("is_terminated covers Done"),
        };
        self.pending = Some(candidate);
        self.pending
    }

    /// Supplies the objective value for the point last handed out.
    pub fn report(&mut self, value: f64) -> Result<()> {
        let point = self.pending.take().ok_or_else(|| {
            LabError::State("report called with no evaluation pending".into())
        })?;
        if !value.is_finite() {
            self.phase = Phase::Done;
            return Err(LabError::Numeric(format!(
                "objective returned {value} at ln-exposure {:.6}, gain {:.3} dB",
                point[0], point[1]
            )));
        }
        self.evaluations += 1;
        self.trace.push((point, value));
        let vertex = Vertex { point, value };
        if self.best.map_or(true, |b| value > b.value) {
            self.best = Some(vertex);
        }
        match self.phase {
            Phase::Init { next } => {
                self.simplex.push(vertex);
                if next == 2 {
                    self.sort_simplex();
                    self.phase = Phase::Reflect;
                    self.check_diameter();
                } else {
                    self.phase = Phase::Init { next: next + 1 };
                }
            }
            Phase::Reflect => {
                if value > self.simplex[0].value {
                    self.phase = Phase::Expand { reflected: vertex };
                } else if value > self.simplex[1].value {
                    self.accept(vertex);
                } else if value > self.simplex[2].value {
                    self.phase = Phase::ContractOutside { reflected: vertex };
                } else {
                    self.phase = Phase::ContractInside;
                }
            }
            Phase::Expand { reflected } => {
                self.accept(if value > reflected.value { vertex } else { reflected });
            }
            Phase::ContractOutside { reflected } => {
                if value >= reflected.value {
                    self.accept(vertex);
                } else {
                    self.phase = Phase::Shrink { next: 1 };
                }
            }
            Phase::ContractInside => {
                if value > self.simplex[2].value {
                    self.accept(vertex);
                } else {
                    self.phase = Phase::Shrink { next: 1 };
                }
            }
            Phase::Shrink { next } => {
                self.simplex[next] = vertex;
                if next == 2 {
                    self.sort_simplex();
                    self.phase = Phase::Reflect;
                    self.check_diameter();
                } else {
                    self.phase = Phase::Shrink { next: next + 1 };
                }
            }
            Phase::Done => unreachable!("no evaluation can be pending when done"),
        }
        Ok(())
    }

    /// Point on the worst-to-centroid line: centroid + coeff * (centroid - worst).
    fn step_point(&self, coeff: f64) -> [f64; 2] {
        let c = self.centroid();
        let w = self.simplex[2].point;
        self.bounds
            .project([c[0] + coeff * (c[0] - w[0]), c[1] + coeff * (c[1] - w[1])])
    }

    fn centroid(&self) -> [f64; 2] {
        [
            0.5 * (self.simplex[0].point[0] + self.simplex[1].point[0]),
            0.5 * (self.simplex[0].point[1] + self.simplex[1].point[1]),
        ]
    }

    fn accept(&mut self, vertex: Vertex) {
        self.simplex[2] = vertex;
        self.sort_simplex();
        self.phase = Phase::Reflect;
        self.check_diameter();
    }

    fn sort_simplex(&mut self) {
        self.simplex
            .sort_by(|a, b| b.value.partial_cmp(&a.value).expect("finite values"));
    }

    fn check_diameter(&mut self) {
        let mut diameter: f64 = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let a = self.simplex[i].point;
                let b = self.simplex[j].point;
                diameter = diameter.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        if diameter < NM_DIAMETER_TOLERANCE {
            self.phase = Phase::Done;
        }
    }
}

/// One objective probe from a Nelder-Mead run, in camera units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub exposure_ms: f64,
    pub gain_db: f64,
    pub value: f64,
}

/// Runs a full Nelder-Mead search of `objective` over the camera's parameter
/// box, maximizing. Returns the best parameters found, the number of
/// objective evaluations spent, and the complete evaluation trace.
pub fn nelder_mead_optimize<F>(
    mut objective: F,
    start: ExposureParams,
    budget: usize,
) -> Result<(ExposureParams, usize, Vec<Evaluation>)>
where
    F: FnMut(f64, f64) -> f64,
{
    let bounds = SearchBox::full_camera_range();
    let mut nm = NelderMead::new(bounds, bounds.point_of(start), budget)?;
    while let Some(point) = nm.next_point() {
        let params = bounds.params_at(point);
        nm.report(objective(params.exposure_time_ms, params.gain_db))?;
    }
    let (best_point, _) = nm.best().expect("budget >= 3 evaluates at least the start");
    let trace = nm
        .trace()
        .iter()
        .map(|&(p, value)| Evaluation { exposure_ms: p[0].exp(), gain_db: p[1], value })
        .collect();
    Ok((bounds.params_at(best_point), nm.evaluations(), trace))
}
