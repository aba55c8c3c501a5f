//! Small fixed- and adaptive-step Runge-Kutta integrators with event
//! localization, sized for the low-dimensional systems in this crate.

use crate::error::IntegratorError;

/// One classical 4th-order Runge-Kutta step.
pub fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f(t, y);
    let mut y2 = *y;
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(t + 0.5 * h, &y2);
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(t + 0.5 * h, &y2);
    for i in 0..N {
        y2[i] = y[i] + h * k3[i];
    }
    let k4 = f(t + h, &y2);
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Crossing direction that triggers an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Trigger when the event function crosses from positive to <= 0.
    Falling,
    /// Trigger when the event function crosses from negative to >= 0.
    Rising,
}

/// Zero-crossing event watched during adaptive integration.
pub struct Event<'a, const N: usize> {
    pub label: &'static str,
    pub f: &'a dyn Fn(f64, &[f64; N]) -> f64,
    pub direction: Direction,
    /// When true the event only arms after the function has been observed
    /// strictly on the pre-crossing side. Needed for functions that start
    /// exactly at zero (e.g. leg length at touchdown).
    pub requires_arming: bool,
}

/// Event hit located by the integrator.
#[derive(Debug, Clone)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub t: f64,
    pub y: [f64; N],
}

#[derive(Debug, Clone)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Bisection stops once |event fn| falls below this.
    pub event_tol: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            h_init: 1e-3,
            h_max: 0.1,
            max_steps: 100_000,
            event_tol: 1e-10,
        }
    }
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], f64, bool) {
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, y);
    for stage in 0..6 {
        let mut ys = *y;
        for i in 0..N {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                acc += A[stage][j] * kj[i];
            }
            ys[i] = y[i] + h * acc;
        }
        k[stage + 1] = f(t + C[stage] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = 0.0;
    let mut finite = true;
    for i in 0..N {
        let mut acc5 = 0.0;
        let mut acc4 = 0.0;
        for j in 0..7 {
            acc5 += B5[j] * k[j][i];
            acc4 += B4[j] * k[j][i];
        }
        y5[i] = y[i] + h * acc5;
        err = f64::max(err, (h * (acc5 - acc4)).abs());
        finite &= y5[i].is_finite();
    }
    (y5, err, finite)
}

/// Result of [`integrate_until_event`].
#[derive(Debug, Clone)]
pub enum Stopped<const N: usize> {
    Event(EventHit<N>),
    /// Reached `t_end` without any event firing.
    TimeLimit { t: f64, y: [f64; N] },
}

/// Integrate with adaptive Dormand-Prince steps until an event fires or
/// `t_end` is reached. The first event in time wins; ties go to the event
/// listed first.
pub fn integrate_until_event<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    t_end: f64,
    events: &[Event<'_, N>],
    opts: &AdaptiveOptions,
) -> Result<Stopped<N>, IntegratorError> {
    let mut t = t0;
    let mut y = *y0;
    let mut h = opts.h_init.min(t_end - t0);
    let mut armed: Vec<bool> = events
        .iter()
        .map(|ev| {
            let v = (ev.f)(t0, y0);
            !ev.requires_arming || on_pre_side(v, ev.direction)
        })
        .collect();
    let mut prev_vals: Vec<f64> = events.iter().map(|ev| (ev.f)(t0, y0)).collect();

    // A function already past the crossing at t0 (e.g. velocity exactly zero
    // and immediately decreasing) is detected on the first accepted step.
    for step in 0.. {
        if step >= opts.max_steps {
            return Err(IntegratorError::StepLimit { t });
        }
        if t >= t_end {
            return Ok(Stopped::TimeLimit { t, y });
        }
        h = h.min(t_end - t).min(opts.h_max);
        if h < 1e-14 * t_end.abs().max(1.0) {
            return Err(IntegratorError::StepUnderflow { t });
        }
        let (y_new, err, finite) = dopri_step(f, t, &y, h);
        if !finite {
            // retry with a smaller step before giving up
            h *= 0.25;
            if h < 1e-14 * t_end.abs().max(1.0) {
                return Err(IntegratorError::NonFinite { t });
            }
            continue;
        }
        let scale = opts.abs_tol
            + opts.rel_tol
                * y.iter()
                    .chain(y_new.iter())
                    .fold(0.0f64, |m, v| m.max(v.abs()));
        let err_ratio = err / scale;
        if err_ratio > 1.0 {
            h *= (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 1.0);
            continue;
        }
        let t_new = t + h;

        // event scan over the accepted step
        let mut best: Option<(usize, f64, [f64; N])> = None;
        for (idx, ev) in events.iter().enumerate() {
            let v_prev = prev_vals[idx];
            let v_new = (ev.f)(t_new, &y_new);
            if !armed[idx] {
                if on_pre_side(v_prev, ev.direction) || on_pre_side(v_new, ev.direction) {
                    armed[idx] = true;
                }
                if !armed[idx] {
                    prev_vals[idx] = v_new;
                    continue;
                }
            }
            let crossed = match ev.direction {
                Direction::Falling => (v_prev > 0.0 && v_new <= 0.0) || (v_prev == 0.0 && v_new < 0.0),
                Direction::Rising => (v_prev < 0.0 && v_new >= 0.0) || (v_prev == 0.0 && v_new > 0.0),
            };
            if crossed {
                let (te, ye) = locate_crossing(f, ev, t, &y, t_new, &y_new, opts)?;
                if best.as_ref().is_none_or(|(_, tb, _)| te < *tb) {
                    best = Some((idx, te, ye));
                }
            }
            prev_vals[idx] = v_new;
        }
        if let Some((index, te, ye)) = best {
            return Ok(Stopped::Event(EventHit { index, t: te, y: ye }));
        }

        t = t_new;
        y = y_new;
        h *= (0.9 * err_ratio.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    unreachable!()
}

fn on_pre_side(v: f64, dir: Direction) -> bool {
    match dir {
        Direction::Falling => v > 0.0,
        Direction::Rising => v < 0.0,
    }
}

/// Bisect the bracketing interval, re-integrating from the left bracket with
/// short RK4 probes, until the event function magnitude drops below
/// `event_tol`.
fn locate_crossing<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    ev: &Event<'_, N>,
    ta: f64,
    ya: &[f64; N],
    tb: f64,
    yb: &[f64; N],
    opts: &AdaptiveOptions,
) -> Result<(f64, [f64; N]), IntegratorError> {
    let mut ta = ta;
    let mut ya = *ya;
    let mut tb = tb;
    let mut yb = *yb;
    let mut va = (ev.f)(ta, &ya);
    if va.abs() <= opts.event_tol {
        return Ok((ta, ya));
    }
    let vb = (ev.f)(tb, &yb);
    if vb.abs() <= opts.event_tol {
        return Ok((tb, yb));
    }
    for _ in 0..200 {
        let tm = 0.5 * (ta + tb);
        let ym = rk4_step(f, ta, &ya, tm - ta);
        let vm = (ev.f)(tm, &ym);
        if vm.abs() <= opts.event_tol {
            return Ok((tm, ym));
        }
        if (va > 0.0) == (vm > 0.0) {
            ta = tm;
            ya = ym;
            va = vm;
        } else {
            tb = tm;
            yb = ym;
        }
        if tb - ta < f64::EPSILON * tb.abs().max(1.0) {
            // interval exhausted; the endpoint closest to zero wins
            let (tc, yc, vc) = if va.abs() < (ev.f)(tb, &yb).abs() {
                (ta, ya, va)
            } else {
                (tb, yb, (ev.f)(tb, &yb))
            };
            if vc.abs() <= opts.event_tol * 1e3 {
                return Ok((tc, yc));
            }
            return Err(IntegratorError::EventNotLocalized { label: ev.label });
        }
    }
    Err(IntegratorError::EventNotLocalized { label: ev.label })
}
