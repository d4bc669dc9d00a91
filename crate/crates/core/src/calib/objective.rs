use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};

use super::{GeometryVariables, Mode};
use crate::error::{Error, Result};
use crate::geom::{Position2D, SensorPose, UnitVec2};
use crate::observations::ObservationSet;

/// Minimum sensor–event separation in meters.
pub const EPS_DIST: f64 = 1e-6;

/// Predicted local DoA vector `R(Θ)·(e − m)/‖e − m‖`, with
/// `R(Θ) = [cos Θ, sin Θ; −sin Θ, cos Θ]`.
pub fn predict_doa_vector(pose: &SensorPose, event: Position2D) -> Result<UnitVec2> {
    let d = event - pose.position;
    let r = d.norm();
    if r <= EPS_DIST {
        return Err(Error::CoincidentPoint {
            sensor: 0,
            distance: r,
        });
    }
    let (s, c) = pose.orientation.radians().sin_cos();
    let (ux, uy) = (d.x / r, d.y / r);
    Ok(UnitVec2 {
        x: c * ux + s * uy,
        y: -s * ux + c * uy,
    })
}

/// Derivatives of one summand `cos²ψ`, `ψ = Θ + φ − arg(e − m)`.
struct Term {
    value: f64,
    /// d value / dψ
    h1: f64,
    /// d² value / dψ²
    h2: f64,
    /// ∇ arg(d) with respect to d = e − m
    a: Vector2<f64>,
    /// ∇² arg(d)
    p: Matrix2<f64>,
}

fn term(orientation: f64, measured: f64, sensor: Position2D, event: Position2D, index: usize) -> Result<Term> {
    let d = event - sensor;
    let r2 = d.norm_squared();
    if r2 <= EPS_DIST * EPS_DIST {
        return Err(Error::CoincidentPoint {
            sensor: index,
            distance: r2.sqrt(),
        });
    }
    let psi = orientation + measured - d.y.atan2(d.x);
    let (s2, c2) = (2.0 * psi).sin_cos();
    let r4 = r2 * r2;
    let (x, y) = (d.x, d.y);
    Ok(Term {
        value: 0.5 * (1.0 + c2),
        h1: -s2,
        h2: -2.0 * c2,
        a: Vector2::new(-y / r2, x / r2),
        p: Matrix2::new(2.0 * x * y, y * y - x * x, y * y - x * x, -2.0 * x * y) / r4,
    })
}

fn check_shape(vars: &GeometryVariables, obs: &ObservationSet) -> Result<()> {
    if vars.positions.len() != obs.num_acoustic() {
        return Err(Error::LengthMismatch {
            expected: obs.num_acoustic(),
            actual: vars.positions.len(),
        });
    }
    if vars.orientations.len() != obs.num_acoustic() {
        return Err(Error::LengthMismatch {
            expected: obs.num_acoustic(),
            actual: vars.orientations.len(),
        });
    }
    if vars.events.len() != obs.num_events() {
        return Err(Error::LengthMismatch {
            expected: obs.num_events(),
            actual: vars.events.len(),
        });
    }
    Ok(())
}

/// Sum of squared inner products between measured and predicted DoA vectors
/// over all observed cells; masked cells contribute nothing.
pub fn objective(vars: &GeometryVariables, obs: &ObservationSet, mode: Mode) -> Result<f64> {
    check_shape(vars, obs)?;
    let mut f = 0.0;
    for i in 0..obs.num_acoustic() {
        let (m, th) = (vars.positions[i], vars.orientations[i].radians());
        for (t, reading) in obs.acoustic.row(i).iter().enumerate() {
            if let Some(phi) = reading.angle() {
                f += term(th, phi.radians(), m, vars.events[t], i)?.value;
            }
        }
    }
    if mode == Mode::Joint {
        for (k, cam) in obs.visual_poses.iter().enumerate() {
            let th = cam.orientation.radians();
            for (t, reading) in obs.visual.row(k).iter().enumerate() {
                if let Some(delta) = reading.angle() {
                    f += term(th, delta.radians(), cam.position, vars.events[t], k)?.value;
                }
            }
        }
    }
    Ok(f)
}

/// Analytic gradient in the ordering documented on the module.
pub fn objective_gradient(vars: &GeometryVariables, obs: &ObservationSet, mode: Mode) -> Result<Vec<f64>> {
    let asm = assemble(vars, obs, mode)?;
    let mut g = Vec::with_capacity(vars.dimension());
    for gs in &asm.sensor_grad {
        g.extend(gs.iter());
    }
    for ge in &asm.event_grad {
        g.extend(ge.iter());
    }
    Ok(g)
}

/// Value, gradient and Hessian of the objective in natural variables,
/// organized by block. The sensor–sensor Hessian is block diagonal (each
/// summand touches a single sensor) and so is the event–event Hessian.
pub(crate) struct Assembled {
    pub value: f64,
    pub sensor_grad: Vec<Vector3<f64>>,
    pub sensor_hess: Vec<Matrix3<f64>>,
    pub event_grad: Vec<Vector2<f64>>,
    pub event_hess: Vec<Matrix2<f64>>,
    /// For every event, the `(sensor, ∂²f/∂s∂e)` cross blocks.
    pub cross: Vec<Vec<(usize, Matrix3x2<f64>)>>,
}

pub(crate) fn assemble(vars: &GeometryVariables, obs: &ObservationSet, mode: Mode) -> Result<Assembled> {
    check_shape(vars, obs)?;
    let (ni, nt) = (obs.num_acoustic(), obs.num_events());
    let mut out = Assembled {
        value: 0.0,
        sensor_grad: vec![Vector3::zeros(); ni],
        sensor_hess: vec![Matrix3::zeros(); ni],
        event_grad: vec![Vector2::zeros(); nt],
        event_hess: vec![Matrix2::zeros(); nt],
        cross: vec![Vec::new(); nt],
    };

    for i in 0..ni {
        let (m, th) = (vars.positions[i], vars.orientations[i].radians());
        for (t, reading) in obs.acoustic.row(i).iter().enumerate() {
            let Some(phi) = reading.angle() else { continue };
            let tm = term(th, phi.radians(), m, vars.events[t], i)?;
            out.value += tm.value;
            // ψ_m = a, ψ_Θ = 1, ψ_e = −a; ψ_mm = ψ_ee = −P, ψ_me = P.
            let a = tm.a;
            let grad_s = Vector3::new(a.x, a.y, 1.0);
            out.sensor_grad[i] += grad_s * tm.h1;
            out.event_grad[t] -= a * tm.h1;

            let mut hs = grad_s * grad_s.transpose() * tm.h2;
            let pmm = -tm.p * tm.h1;
            add_top_left(&mut hs, &pmm);
            out.sensor_hess[i] += hs;

            out.event_hess[t] += a * a.transpose() * tm.h2 - tm.p * tm.h1;

            let mut c = grad_s * (-a).transpose() * tm.h2;
            let pme = tm.p * tm.h1;
            add_top_left(&mut c, &pme);
            out.cross[t].push((i, c));
        }
    }

    if mode == Mode::Joint {
        for (k, cam) in obs.visual_poses.iter().enumerate() {
            let th = cam.orientation.radians();
            for (t, reading) in obs.visual.row(k).iter().enumerate() {
                let Some(delta) = reading.angle() else { continue };
                let tm = term(th, delta.radians(), cam.position, vars.events[t], k)?;
                out.value += tm.value;
                out.event_grad[t] -= tm.a * tm.h1;
                out.event_hess[t] += tm.a * tm.a.transpose() * tm.h2 - tm.p * tm.h1;
            }
        }
    }
    Ok(out)
}

fn add_top_left<const C: usize>(
    m: &mut nalgebra::SMatrix<f64, 3, C>,
    block: &Matrix2<f64>,
) {
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] += block[(r, c)];
        }
    }
}
