//! Small adaptive Dormand-Prince (RK45) integrator for the scalar ODE
//! reductions.

/// Integrates `dy/dt = f(t, y)` from `(t0, y0)` to `t_end`, calling
/// `checkpoint` exactly at every requested time in `times` (assumed sorted,
/// within `[t0, t_end]` for forward runs or `[t_end, t0]` backwards).
/// `stop` may end the integration early; the return value is the final
/// `(t, y)`.
pub fn integrate_to_times(
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    y0: f64,
    t_end: f64,
    rtol: f64,
    atol: f64,
    times: &[f64],
    mut checkpoint: impl FnMut(f64, f64),
    stop: impl Fn(f64, f64) -> bool,
) -> (f64, f64) {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * ((t_end - t0).abs() / 100.0).min(1e-3).max(1e-12);
    let mut next_time = 0usize;

    // Emit any checkpoints that coincide with the start.
    while next_time < times.len() && (times[next_time] - t) * dir <= 1e-300 {
        checkpoint(times[next_time], y);
        next_time += 1;
    }

    let max_steps = 2_000_000;
    for _ in 0..max_steps {
        if stop(t, y) {
            break;
        }
        if (t_end - t) * dir <= 0.0 {
            break;
        }
        // Land exactly on the next checkpoint or the end time.
        let mut target = t_end;
        if next_time < times.len() && (times[next_time] - t_end) * dir < 0.0 {
            target = times[next_time];
        }
        if (t + h - target) * dir > 0.0 {
            h = target - t;
        }

        let (y_new, err) = dp_step(&f, t, y, h);
        let scale = atol + rtol * y.abs().max(y_new.abs());
        let err_ratio = err.abs() / scale;
        if err_ratio <= 1.0 {
            t += h;
            y = y_new;
            while next_time < times.len() && (times[next_time] - t) * dir <= 1e-12 * t.abs().max(1.0)
            {
                checkpoint(times[next_time], y);
                next_time += 1;
            }
        }
        let factor = if err_ratio > 0.0 {
            (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h.abs() < 1e-16 {
            h = dir * 1e-16;
        }
    }
    (t, y)
}

/// One Dormand-Prince 5(4) step; returns `(y5, error_estimate)`.
fn dp_step(f: &impl Fn(f64, f64) -> f64, t: f64, y: f64, h: f64) -> (f64, f64) {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
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

    let mut k = [0.0f64; 7];
    for i in 0..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi += h * A[i][j] * kj;
        }
        k[i] = f(t + C[i] * h, yi);
    }
    let mut y5 = y;
    let mut y4 = y;
    for i in 0..7 {
        y5 += h * B5[i] * k[i];
        y4 += h * B4[i] * k[i];
    }
    (y5, y5 - y4)
}
