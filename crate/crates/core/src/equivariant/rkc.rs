//! Second-order Runge-Kutta-Chebyshev stages for the stiff profile motion.
//!
//! Standard damped RKC2 recurrence; the stability interval along the
//! negative real axis grows like `0.65 s^2`, which keeps explicit stepping
//! affordable at parabolic CFL numbers far above the classical limit.

/// Damping parameter; stability boundary is about `0.653 (s^2 - 1)`.
const EPS: f64 = 2.0 / 13.0;

/// Stability interval length for `s` stages.
pub fn beta(s: usize) -> f64 {
    0.653 * ((s * s) as f64 - 1.0)
}

/// Minimal stage count for spectral radius `rho` and step `dt` (with a
/// safety factor already applied by the caller).
pub fn stages_for(dt: f64, rho: f64) -> usize {
    let mut s = (1.0 + dt * rho / 0.653).sqrt().ceil() as usize + 1;
    if s < 2 {
        s = 2;
    }
    s
}

/// One RKC2 step of `y' = f(y)`. `f` must write the derivative of its first
/// argument into its second. Work buffers are provided by the caller and
/// resized as needed; `y` is advanced in place. Returns the derivative at
/// the starting point in `f0` (useful for error estimation).
pub struct Rkc2Work {
    pub y0: Vec<f64>,
    pub yjm1: Vec<f64>,
    pub yjm2: Vec<f64>,
    pub fj: Vec<f64>,
    pub f0: Vec<f64>,
}

impl Rkc2Work {
    pub fn new() -> Self {
        Self {
            y0: Vec::new(),
            yjm1: Vec::new(),
            yjm2: Vec::new(),
            fj: Vec::new(),
            f0: Vec::new(),
        }
    }

    fn resize(&mut self, n: usize) {
        self.y0.resize(n, 0.0);
        self.yjm1.resize(n, 0.0);
        self.yjm2.resize(n, 0.0);
        self.fj.resize(n, 0.0);
        self.f0.resize(n, 0.0);
    }
}

pub fn rkc2_step(
    f: &mut impl FnMut(&[f64], &mut [f64]) -> bool,
    y: &mut [f64],
    dt: f64,
    s: usize,
    work: &mut Rkc2Work,
) -> bool {
    assert!(s >= 2);
    let n = y.len();
    work.resize(n);

    let sf = s as f64;
    let w0 = 1.0 + EPS / (sf * sf);

    // Chebyshev values and derivatives at w0, by recurrence.
    let mut tj = vec![0.0; s + 1];
    let mut tdj = vec![0.0; s + 1];
    let mut tddj = vec![0.0; s + 1];
    tj[0] = 1.0;
    tj[1] = w0;
    tdj[0] = 0.0;
    tdj[1] = 1.0;
    tddj[0] = 0.0;
    tddj[1] = 0.0;
    for j in 2..=s {
        tj[j] = 2.0 * w0 * tj[j - 1] - tj[j - 2];
        tdj[j] = 2.0 * tj[j - 1] + 2.0 * w0 * tdj[j - 1] - tdj[j - 2];
        tddj[j] = 4.0 * tdj[j - 1] + 2.0 * w0 * tddj[j - 1] - tddj[j - 2];
    }
    let w1 = tdj[s] / tddj[s];

    let bj = |j: usize| -> f64 {
        if j <= 2 {
            tddj[2] / (tdj[2] * tdj[2])
        } else {
            tddj[j] / (tdj[j] * tdj[j])
        }
    };

    work.y0.copy_from_slice(y);
    if !f(&work.y0, &mut work.f0) {
        return false;
    }

    // Y_1 = Y_0 + mu_tilde_1 dt F_0.
    let mu_t1 = bj(1) * w1;
    for i in 0..n {
        work.yjm1[i] = work.y0[i] + mu_t1 * dt * work.f0[i];
    }
    work.yjm2.copy_from_slice(&work.y0);

    for j in 2..=s {
        let b_j = bj(j);
        let b_jm1 = bj(j - 1);
        let b_jm2 = bj(j - 2);
        let mu = 2.0 * b_j * w0 / b_jm1;
        let nu = -b_j / b_jm2;
        let mu_t = 2.0 * b_j * w1 / b_jm1;
        let a_jm1 = 1.0 - b_jm1 * tj[j - 1];
        let gamma_t = -a_jm1 * mu_t;

        if !f(&work.yjm1, &mut work.fj) {
            return false;
        }
        // Write Y_j into y, then rotate buffers.
        for i in 0..n {
            y[i] = (1.0 - mu - nu) * work.y0[i]
                + mu * work.yjm1[i]
                + nu * work.yjm2[i]
                + mu_t * dt * work.fj[i]
                + gamma_t * dt * work.f0[i];
        }
        std::mem::swap(&mut work.yjm2, &mut work.yjm1);
        work.yjm1.copy_from_slice(y);
    }
    true
}
