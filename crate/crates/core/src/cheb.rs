//! Chebyshev interpolation on a finite interval.
//!
//! Used to extract high-order Taylor data from profiles that only exist as
//! sampled reconstructions, and to estimate how far such data can be trusted
//! from the decay rate of the interpolation coefficients.

/// A Chebyshev series `f(x) = sum c_k T_k(t)`, `t = (2x - a - b)/(b - a)`.
#[derive(Debug, Clone)]
pub struct ChebSeries {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    /// Interpolate `f` at `n+1` Chebyshev-Lobatto points on [a, b].
    pub fn fit(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        assert!(n >= 2 && b > a);
        let nf = n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|j| {
                let t = (std::f64::consts::PI * j as f64 / nf).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * t)
            })
            .collect();
        let mut coeffs = vec![0.0; n + 1];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, v) in vals.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                acc += w * v * (std::f64::consts::PI * (k * j) as f64 / nf).cos();
            }
            let gamma = if k == 0 || k == n { 2.0 } else { 1.0 };
            *ck = 2.0 / nf * acc / gamma;
        }
        Self { a, b, coeffs }
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        // after folding k = 0 the value is b_0 - t b_1
        b1 - t * b2
    }

    /// Derivative series on the same interval.
    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len() - 1;
        let mut d = vec![0.0; self.coeffs.len()];
        for k in (1..=n).rev() {
            let upper = if k + 1 <= n { d[k + 1] } else { 0.0 };
            d[k - 1] = upper + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        let scale = 2.0 / (self.b - self.a);
        for v in &mut d {
            *v *= scale;
        }
        Self {
            a: self.a,
            b: self.b,
            coeffs: d,
        }
    }

    /// Taylor coefficients `f^(j)(c)/j!` at the interval center, `j = 0..=order`.
    ///
    /// Each derivative of the series amplifies coefficient-level rounding
    /// noise by roughly the squared degree over the half-width, so extraction
    /// accuracy falls by about two decades per two orders. Fit with the
    /// smallest degree whose truncation error is already negligible; degrees
    /// in the twenties to thirties extract orders up to ~8 at 1e-6 relative.
    pub fn taylor_at_center(&self, order: usize) -> Vec<f64> {
        let center = 0.5 * (self.a + self.b);
        let mut out = Vec::with_capacity(order + 1);
        let mut cur = self.clone();
        let mut factorial = 1.0;
        for j in 0..=order {
            if j > 0 {
                factorial *= j as f64;
                cur = cur.derivative();
            }
            out.push(cur.eval(center) / factorial);
        }
        out
    }

    /// Estimated per-degree geometric decay factor of the tail coefficients.
    ///
    /// Values well below 1 indicate the interval sits inside the region of
    /// analyticity; values near 1 indicate a nearby singularity. Tails that
    /// have already reached the rounding floor report 0: the fit is fully
    /// resolved and the raw floor-to-floor quotient would be meaningless.
    pub fn decay_ratio(&self) -> f64 {
        let n = self.coeffs.len();
        if n < 8 {
            return 1.0;
        }
        let global = self
            .coeffs
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()))
            .max(1e-300);
        let floor = 1e-15 * global;
        let quarter = n / 4;
        let seg_max = |lo: usize, hi: usize| {
            self.coeffs[lo..hi]
                .iter()
                .fold(floor, |m, c| m.max(c.abs()))
        };
        let older = seg_max(n - 2 * quarter, n - quarter);
        let newer = seg_max(n - quarter, n);
        if newer <= floor {
            return 0.0;
        }
        (newer / older).powf(1.0 / quarter as f64)
    }
}
