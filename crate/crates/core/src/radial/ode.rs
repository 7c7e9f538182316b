//! Dormand–Prince 5(4) integration of `u'' + (N−1)/r u' + |u|^{q−2}u = 0`.

use crate::error::{Error, Result};

/// Left end of the integration; the regular series bridges `[0, R_MIN]`.
pub const R_MIN: f64 = 1e-8;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Right-hand side on one nodal segment: the nonlinearity is
/// `σ|u|^{q−1}` with the branch sign `σ` frozen until the next zero.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub q: f64,
    pub dim: usize,
    pub sigma: f64,
}

impl Segment {
    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        let f = if self.q == 1.0 { self.sigma } else { self.sigma * y[0].abs().powf(self.q - 1.0) };
        [y[1], -((self.dim - 1) as f64) / r * y[1] - f]
    }

    /// One step; returns the fifth-order value and the scaled error.
    fn step(&self, r: f64, y: [f64; 2], h: f64, tol: f64) -> ([f64; 2], f64) {
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = self.rhs(r + C[s] * h, ys);
        }
        let mut out = y;
        let mut err = 0.0f64;
        for c in 0..2 {
            let (mut hi, mut lo) = (0.0, 0.0);
            for s in 0..7 {
                hi += B5[s] * k[s][c];
                lo += B4[s] * k[s][c];
            }
            out[c] = y[c] + h * hi;
            let scale = tol * (1.0 + y[c].abs().max(out[c].abs()));
            err = err.max((h * (hi - lo)).abs() / scale);
        }
        (out, err)
    }
}

pub(crate) struct Trajectory {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub zeros: Vec<f64>,
}

/// Integrates from `R_MIN` to 1 and records `u, u'` at `R_MIN` and `i/samples`.
pub(crate) fn integrate(q: f64, dim: usize, u0: f64, tol: f64, samples: usize) -> Result<Trajectory> {
    let f0 = if q == 1.0 { u0.signum() } else { u0.signum() * u0.abs().powf(q - 1.0) };
    let nn = dim as f64;
    let mut y = [u0 - f0 * R_MIN * R_MIN / (2.0 * nn), -f0 * R_MIN / nn];
    let mut seg = Segment { q, dim, sigma: u0.signum() };
    let mut r = R_MIN;
    let mut h: f64 = 1e-4;
    let mut out = Trajectory { r: vec![r], u: vec![y[0]], du: vec![y[1]], zeros: Vec::new() };
    for i in 1..=samples {
        let target = i as f64 / samples as f64;
        while r < target {
            let step = h.min(target - r);
            let (next, err) = seg.step(r, y, step, tol);
            if err > 1.0 {
                h = step * (0.9 * err.powf(-0.2)).max(0.2);
                if h < 1e-15 {
                    return Err(Error::ToleranceNotMet(format!("step size underflow at r = {r}")));
                }
                continue;
            }
            if y[0] != 0.0 && next[0] != 0.0 && y[0].signum() != next[0].signum() {
                // Shrink the step onto the zero, then switch branches.
                let (mut lo, mut hi) = (0.0, step);
                let mut at = next;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let (ym, _) = seg.step(r, y, mid, tol);
                    if ym[0] == 0.0 || ym[0].signum() != y[0].signum() {
                        hi = mid;
                        at = ym;
                    } else {
                        lo = mid;
                    }
                }
                r += hi;
                y = at;
                seg.sigma = -seg.sigma;
                out.zeros.push(r);
            } else {
                r += step;
                y = next;
                if y[0] == 0.0 && y[1] != 0.0 {
                    seg.sigma = y[1].signum();
                    out.zeros.push(r);
                }
            }
            h = step * (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
        }
        r = target;
        out.r.push(r);
        out.u.push(y[0]);
        out.du.push(y[1]);
    }
    Ok(out)
}
