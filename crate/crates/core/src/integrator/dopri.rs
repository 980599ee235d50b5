//! Dormand–Prince 5(4) embedded pair with PI step control and the
//! fourth-order continuous extension.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
];

const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];

// fifth minus fourth order weights, last entry multiplies the FSAL stage
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    /// Cap on `|y|` in the relative part of the error scale. Phases only
    /// matter modulo 2π, so letting the tolerance grow with the unwrapped
    /// angle would loosen control as the run gets longer.
    pub scale_cap: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// One accepted step with its continuous extension.
pub struct Segment<'a> {
    pub t_start: f64,
    pub h: f64,
    pub y_start: &'a [f64],
    pub y_end: &'a [f64],
    cont: &'a [Vec<f64>; 5],
}

impl Segment<'_> {
    pub fn t_end(&self) -> f64 {
        self.t_start + self.h
    }

    /// Dense-output state at `t ∈ [t_start, t_end]`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        if t == self.t_end() {
            out.copy_from_slice(self.y_end);
            return;
        }
        let s = (t - self.t_start) / self.h;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = self.cont;
        for i in 0..out.len() {
            out[i] = c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i])));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y_start.len()];
        self.eval_into(t, &mut out);
        out
    }
}

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, b)| (a / b).powi(2)).sum();
    (s / v.len().max(1) as f64).sqrt()
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], opts: &StepperOptions, span: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let sk: Vec<f64> = y0.iter().map(|y| opts.atol + opts.rtol * y.abs().min(opts.scale_cap)).collect();
    let d0 = rms_norm(y0, &sk);
    let d1 = rms_norm(f0, &sk);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(opts.max_step).min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_norm(&diff, &sk) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
    (100.0 * h0).min(h1).min(opts.max_step).min(span)
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, calling `on_step` for
/// every accepted step in order.
pub fn solve<F, S>(
    mut f: F,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    opts: &StepperOptions,
    mut on_step: S,
) -> Result<StepStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(&Segment<'_>) -> Result<()>,
{
    let n = y0.len();
    let span = t_end - t0;
    let h_min = 1e-14 * span;
    let mut stats = StepStats::default();

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;

    let mut h = match opts.initial_step {
        Some(h) => h.min(opts.max_step).min(span),
        None => {
            stats.evaluations += 1;
            initial_step(&mut f, t0, &y, &k[0], opts, span)
        }
    };

    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err_vec = vec![0.0; n];
    let mut cont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let expo = 0.2 - BETA * 0.75;

    while t < t_end {
        let remaining = t_end - t;
        if remaining <= 1e-15 * span.abs().max(1.0) {
            break;
        }
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }

        for s in 1..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            f(t + C[s] * h, &y_stage, &mut k[s]);
        }
        for i in 0..n {
            let mut acc = 0.0;
            for (j, b) in B.iter().enumerate() {
                acc += b * k[j][i];
            }
            y_new[i] = y[i] + h * acc;
        }
        f(t + h, &y_new, &mut k[6]);
        stats.evaluations += 6;

        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: t + h });
        }

        let mut sk = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for (j, e) in E.iter().enumerate() {
                acc += e * k[j][i];
            }
            err_vec[i] = h * acc;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs()).min(opts.scale_cap);
            sk += (err_vec[i] / scale).powi(2);
        }
        let err = (sk / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::NonFiniteState { t });
        }

        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            fac_old = err.max(1e-4);
            stats.accepted += 1;

            for i in 0..n {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k[6][i] - bspl;
                let mut acc = 0.0;
                for (j, d) in D.iter().enumerate() {
                    acc += d * k[j][i];
                }
                cont[4][i] = h * acc;
            }
            {
                let seg = Segment { t_start: t, h, y_start: &y, y_end: &y_new, cont: &cont };
                on_step(&seg)?;
            }

            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(opts.max_step);
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
    Ok(stats)
}
