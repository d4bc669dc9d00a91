//! Damped Newton iteration on the stationarity conditions.
//!
//! Maximizing `f` is carried out as minimizing `−f` with Levenberg damping:
//! `(−∇²f + λI)·δ = ∇f`. A step is accepted only if `f` does not decrease;
//! `λ` shrinks ×10 after an accepted step and grows ×10 after a rejected one
//! or whenever the damped matrix is not positive definite. Event blocks are
//! eliminated by a Schur complement, so each iteration costs one small dense
//! solve over the sensor parameters.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};

use super::{
    assemble, effective_visual_count, minimal_event_count, objective, resolve_front_back, Assembled,
    GeometryEstimate, GeometryVariables, Mode,
};
use crate::error::{Error, Result};
use crate::geom::{Angle, Position2D, Reading};
use crate::observations::ObservationSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Terminate once the accepted step norm falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Independent initializations tried by [`calibrate`](super::calibrate).
    pub restarts: usize,
    pub lambda_init: f64,
    pub lambda_max: f64,
    /// Use the resection/bootstrap initializer for the first start.
    pub structured_init: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            restarts: 5,
            lambda_init: 1e-3,
            lambda_max: 1e10,
            structured_init: true,
        }
    }
}

const LAMBDA_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum SensorParam {
    Fixed,
    /// Position on the unit circle around the origin (parameter ω) plus Θ.
    Circle,
    Free,
}

impl SensorParam {
    fn dim(self) -> usize {
        match self {
            SensorParam::Fixed => 0,
            SensorParam::Circle => 2,
            SensorParam::Free => 3,
        }
    }
}

struct Layout {
    kinds: Vec<SensorParam>,
    offsets: Vec<usize>,
    dim: usize,
    free_events: Vec<bool>,
}

/// Masks cells that cannot be used: sensors without readings (or the gauge
/// sensor with fewer than two) and events seen fewer than twice.
fn prune(obs: &ObservationSet, mode: Mode) -> Result<(ObservationSet, Layout)> {
    let (ni, nt) = (obs.num_acoustic(), obs.num_events());
    let mut work = obs.clone();
    if mode == Mode::Relative {
        for k in 0..work.num_visual() {
            for t in 0..nt {
                work.visual.set(k, t, Reading::NoDetection);
            }
        }
    }
    let mut kinds: Vec<SensorParam> = (0..ni)
        .map(|i| match (mode, i) {
            (Mode::Relative, 0) => SensorParam::Fixed,
            (Mode::Relative, 1) => SensorParam::Circle,
            _ => SensorParam::Free,
        })
        .collect();
    let mut free_events = vec![true; nt];

    loop {
        let mut changed = false;
        for i in 0..ni {
            let count = work.acoustic.row(i).iter().filter(|r| r.angle().is_some()).count();
            let required = match kinds[i] {
                SensorParam::Fixed => 0,
                SensorParam::Circle => 2,
                SensorParam::Free => 1,
            };
            if count < required {
                if kinds[i] == SensorParam::Circle {
                    return Err(Error::Underdetermined(
                        "gauge sensor 1 has fewer than 2 usable readings".into(),
                    ));
                }
                kinds[i] = SensorParam::Fixed;
                for t in 0..nt {
                    work.acoustic.set(i, t, Reading::NoDetection);
                }
                changed = true;
            }
        }
        for t in 0..nt {
            if !free_events[t] {
                continue;
            }
            let (a, v) = work.column_counts(t);
            if a + v < 2 {
                free_events[t] = false;
                for i in 0..ni {
                    work.acoustic.set(i, t, Reading::NoDetection);
                }
                for k in 0..work.num_visual() {
                    work.visual.set(k, t, Reading::NoDetection);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut offsets = Vec::with_capacity(ni);
    let mut dim = 0;
    for k in &kinds {
        offsets.push(dim);
        dim += k.dim();
    }
    Ok((
        work,
        Layout {
            kinds,
            offsets,
            dim,
            free_events,
        },
    ))
}

/// Moves `vars` into the relative gauge: `m_0 = 0`, `Θ_0 = 0`, `‖m_1‖ = 1`.
pub(crate) fn project_gauge(vars: &GeometryVariables) -> Result<GeometryVariables> {
    if vars.num_sensors() < 2 {
        return Err(Error::Underdetermined("relative mode needs at least 2 acoustic sensors".into()));
    }
    let (m0, th0) = (vars.positions[0], vars.orientations[0]);
    let baseline = vars.positions[1].distance(m0);
    if baseline <= f64::EPSILON {
        return Err(Error::Underdetermined("gauge sensors coincide".into()));
    }
    let rot = -th0;
    let scale = 1.0 / baseline;
    let mut out = vars.transformed(scale, rot, -(m0.rotated(rot) * scale));
    out.positions[0] = Position2D::ORIGIN;
    out.orientations[0] = Angle::ZERO;
    Ok(out)
}

fn jacobian(kind: SensorParam, m: Position2D) -> DMatrix<f64> {
    match kind {
        SensorParam::Free => DMatrix::identity(3, 3),
        SensorParam::Circle => {
            let w = m.y.atan2(m.x);
            DMatrix::from_row_slice(3, 2, &[-w.sin(), 0.0, w.cos(), 0.0, 0.0, 1.0])
        }
        SensorParam::Fixed => DMatrix::zeros(3, 0),
    }
}

/// Gradient and Hessian of `f` in the reduced parameters.
struct Reduced {
    grad_s: DVector<f64>,
    hess_s: DMatrix<f64>,
    grad_e: Vec<Vector2<f64>>,
    hess_e: Vec<Matrix2<f64>>,
    cross: Vec<DMatrix<f64>>,
}

impl Reduced {
    fn grad_norm(&self, layout: &Layout) -> f64 {
        let mut sq = self.grad_s.norm_squared();
        for (t, g) in self.grad_e.iter().enumerate() {
            if layout.free_events[t] {
                sq += g.norm_squared();
            }
        }
        sq.sqrt()
    }
}

fn to_dmat3(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |r, c| m[(r, c)])
}

fn to_dmat32(m: &Matrix3x2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(3, 2, |r, c| m[(r, c)])
}

fn to_dvec3(v: &Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn reduce(asm: &Assembled, layout: &Layout, vars: &GeometryVariables) -> Reduced {
    let p = layout.dim;
    let nt = asm.event_grad.len();
    let mut grad_s = DVector::zeros(p);
    let mut hess_s = DMatrix::zeros(p, p);
    let jacobians: Vec<DMatrix<f64>> = layout
        .kinds
        .iter()
        .zip(&vars.positions)
        .map(|(&k, &m)| jacobian(k, m))
        .collect();

    for (i, &kind) in layout.kinds.iter().enumerate() {
        let d = kind.dim();
        if d == 0 {
            continue;
        }
        let off = layout.offsets[i];
        let j = &jacobians[i];
        let g = to_dvec3(&asm.sensor_grad[i]);
        let mut h = j.transpose() * to_dmat3(&asm.sensor_hess[i]) * j;
        if kind == SensorParam::Circle {
            let m = vars.positions[i];
            let w = m.y.atan2(m.x);
            h[(0, 0)] -= g[0] * w.cos() + g[1] * w.sin();
        }
        grad_s.rows_mut(off, d).copy_from(&(j.transpose() * g));
        hess_s.view_mut((off, off), (d, d)).copy_from(&h);
    }

    let mut cross = vec![DMatrix::zeros(0, 0); nt];
    for t in 0..nt {
        if !layout.free_events[t] {
            continue;
        }
        let mut c = DMatrix::zeros(p, 2);
        for (i, blk) in &asm.cross[t] {
            let kind = layout.kinds[*i];
            let d = kind.dim();
            if d == 0 {
                continue;
            }
            let off = layout.offsets[*i];
            let contrib = jacobians[*i].transpose() * to_dmat32(blk);
            let mut view = c.view_mut((off, 0), (d, 2));
            view += contrib;
        }
        cross[t] = c;
    }

    Reduced {
        grad_s,
        hess_s,
        grad_e: asm.event_grad.clone(),
        hess_e: asm.event_hess.clone(),
        cross,
    }
}

struct Step {
    sensors: DVector<f64>,
    events: Vec<Vector2<f64>>,
}

impl Step {
    fn norm(&self) -> f64 {
        (self.sensors.norm_squared() + self.events.iter().map(|e| e.norm_squared()).sum::<f64>()).sqrt()
    }
}

/// Solves `(−H + λI) δ = g` by eliminating the event blocks. Returns `None`
/// if the damped matrix is not positive definite.
fn damped_step(red: &Reduced, layout: &Layout, lambda: f64) -> Option<Step> {
    let p = layout.dim;
    let nt = red.grad_e.len();
    let mut schur = -&red.hess_s + DMatrix::identity(p, p) * lambda;
    let mut rhs = red.grad_s.clone();
    let mut inverses = vec![Matrix2::zeros(); nt];

    for t in 0..nt {
        if !layout.free_events[t] {
            continue;
        }
        let d = -red.hess_e[t] + Matrix2::identity() * lambda;
        let inv = d.cholesky()?.inverse();
        inverses[t] = inv;
        if p > 0 {
            // C = −cross, so C D⁻¹ Cᵀ = cross D⁻¹ crossᵀ and C D⁻¹ g_e = −cross D⁻¹ g_e.
            let cr = &red.cross[t];
            let inv_d = DMatrix::from_fn(2, 2, |r, c| inv[(r, c)]);
            let cd = cr * &inv_d;
            schur -= &cd * cr.transpose();
            let ge = DVector::from_column_slice(red.grad_e[t].as_slice());
            rhs += &cd * ge;
        }
    }

    let sensors = if p > 0 {
        schur.cholesky()?.solve(&rhs)
    } else {
        DVector::zeros(0)
    };

    let mut events = vec![Vector2::zeros(); nt];
    for t in 0..nt {
        if !layout.free_events[t] {
            continue;
        }
        let mut r = red.grad_e[t];
        if p > 0 {
            // r = g_e − Cᵀ δs = g_e + crossᵀ δs
            let ct = red.cross[t].transpose() * &sensors;
            r += Vector2::new(ct[0], ct[1]);
        }
        events[t] = inverses[t] * r;
    }
    let step = Step { sensors, events };
    step.norm().is_finite().then_some(step)
}

fn apply_step(vars: &GeometryVariables, layout: &Layout, step: &Step) -> GeometryVariables {
    let mut out = vars.clone();
    for (i, &kind) in layout.kinds.iter().enumerate() {
        let off = layout.offsets[i];
        match kind {
            SensorParam::Fixed => {}
            SensorParam::Free => {
                out.positions[i] += Position2D::new(step.sensors[off], step.sensors[off + 1]);
                out.orientations[i] = Angle::from_radians(out.orientations[i].radians() + step.sensors[off + 2]);
            }
            SensorParam::Circle => {
                let m = vars.positions[i];
                let w = m.y.atan2(m.x) + step.sensors[off];
                out.positions[i] = Position2D::new(w.cos(), w.sin());
                out.orientations[i] = Angle::from_radians(out.orientations[i].radians() + step.sensors[off + 1]);
            }
        }
    }
    for (t, free) in layout.free_events.iter().enumerate() {
        if *free {
            out.events[t] += Position2D::new(step.events[t].x, step.events[t].y);
        }
    }
    out
}

pub(crate) fn check_solvable(obs: &ObservationSet, mode: Mode) -> Result<()> {
    let ni = obs.num_acoustic();
    if mode == Mode::Joint && obs.visual_poses.is_empty() {
        return Err(Error::Underdetermined("joint mode needs at least one camera".into()));
    }
    if mode == Mode::Relative && ni < 2 {
        return Err(Error::Underdetermined("relative mode needs at least 2 acoustic sensors".into()));
    }
    let needed = minimal_event_count(ni, effective_visual_count(mode, obs.num_visual()))?;
    let have = obs.usable_events(mode).len();
    if have < needed {
        return Err(Error::Underdetermined(format!("{have} usable events, need at least {needed}")));
    }
    Ok(())
}

/// Damped Newton ascent from `initial`.
///
/// In [`Mode::Relative`] the initial geometry is first moved into the gauge
/// `m_0 = 0, Θ_0 = 0, ‖m_1‖ = 1`, and the returned geometry stays in it.
/// Orientations are finally resolved against front-back flips.
pub fn solve(
    initial: &GeometryVariables,
    obs: &ObservationSet,
    mode: Mode,
    cfg: &SolverConfig,
) -> Result<GeometryEstimate> {
    check_solvable(obs, mode)?;
    let (work, layout) = prune(obs, mode)?;
    let mut vars = match mode {
        Mode::Relative => project_gauge(initial)?,
        Mode::Joint => initial.clone(),
    };
    let mut f = objective(&vars, &work, mode)?;
    let mut lambda = cfg.lambda_init;
    let mut converged = false;
    let mut iterations = 0;

    'outer: for iter in 0..cfg.max_iter {
        iterations = iter + 1;
        let asm = assemble(&vars, &work, mode)?;
        let red = reduce(&asm, &layout, &vars);
        let gnorm = red.grad_norm(&layout);
        if !gnorm.is_finite() {
            return Err(Error::SingularHessian);
        }
        if gnorm < 1e-14 {
            converged = true;
            break;
        }
        loop {
            if lambda > cfg.lambda_max {
                converged = gnorm < 1e-7;
                break 'outer;
            }
            let Some(step) = damped_step(&red, &layout, lambda) else {
                lambda *= 10.0;
                continue;
            };
            let norm = step.norm();
            if norm < cfg.tol {
                converged = true;
                break 'outer;
            }
            let candidate = apply_step(&vars, &layout, &step);
            match objective(&candidate, &work, mode) {
                Ok(fc) if fc >= f => {
                    vars = candidate;
                    f = fc;
                    lambda = (lambda / 10.0).max(LAMBDA_MIN);
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
    }

    let vars = resolve_front_back(&vars, &work, mode);
    let objective_value = objective(&vars, obs, mode)?;
    Ok(GeometryEstimate {
        variables: vars,
        objective_value,
        iterations,
        converged,
    })
}
