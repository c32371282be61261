//! Modified Bessel functions `I_nu`, `K_nu` of real order and complex
//! argument, and the limit integral that fixes the phase jump across a
//! critical layer.
//!
//! No external special-function crate is used. The evaluator picks a regime
//! by argument:
//!
//! * small `|z|`, or any `|z| <= 14` near the imaginary axis: ascending
//!   series for `I`; `K` by the order-reflection connection formula for
//!   non-integer order, or the logarithmic (digamma) series for integer
//!   order;
//! * `|z| > 3` in the sector `Re z >= 0.3 |z|`: Steed continued fractions
//!   (CF2 for `K`, CF1 plus the Wronskian for `I`), with stable upward order
//!   recurrence;
//! * `|z| > 14` near the imaginary axis: large-argument asymptotic series,
//!   keeping both exponentials of `I`;
//! * `Re z < 0`: reflection to the right half-plane with the standard
//!   analytic-continuation phases (principal branch, cut on the negative
//!   real axis).
//!
//! Derivatives come from the order recurrences
//! `I' = I_{nu+1} + (nu/z) I` and `K' = (nu/z) K - K_{nu+1}`.

use crate::{CoreError, Result, C64};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Joint evaluation of `I_nu`, `K_nu` and their `z`-derivatives.
#[derive(Debug, Clone, Copy)]
pub struct BesselEval {
    pub nu: f64,
    pub z: C64,
    pub i_value: C64,
    pub k_value: C64,
    pub i_derivative: C64,
    pub k_derivative: C64,
}

/// Real gamma function by the Lanczos approximation (g = 7, 9 terms),
/// with the reflection formula for arguments below 1/2.
pub fn real_gamma(x: f64) -> f64 {
    const P: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        if s == 0.0 {
            return f64::INFINITY; // pole at non-positive integers
        }
        return std::f64::consts::PI / (s * real_gamma(1.0 - x));
    }
    let xm = x - 1.0;
    let mut acc = P[0];
    for (i, p) in P.iter().enumerate().skip(1) {
        acc += p / (xm + i as f64);
    }
    let t = xm + 7.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(xm + 0.5) * (-t).exp() * acc
}

/// Digamma at positive integer arguments: psi(1) = -gamma, psi(n+1) = psi(n) + 1/n.
fn digamma_int(n: usize) -> f64 {
    let mut psi = -EULER_GAMMA;
    for j in 1..n {
        psi += 1.0 / j as f64;
    }
    psi
}

/// Ascending series for `I_nu(z)`, any real order, any `z` off the cut.
///
/// Accurate wherever the alternating-term cancellation stays moderate,
/// which in practice means `|z|` up to roughly 14.
fn i_series(nu: f64, z: C64) -> C64 {
    let half = 0.5 * z;
    let q = half * half;
    // leading factor (z/2)^nu / Gamma(nu+1)
    let g = real_gamma(nu + 1.0);
    let lead = if g.is_infinite() {
        C64::new(0.0, 0.0)
    } else {
        half.powc(C64::new(nu, 0.0)) / g
    };
    // the recurrence below regenerates finite terms even when lead == 0
    // (order at a negative integer), via term ratios
    let mut term = half.powc(C64::new(nu, 0.0)) / g;
    if !term.is_finite() {
        term = C64::new(0.0, 0.0);
    }
    let mut sum = term;
    let mut prev_ratio_blowup = false;
    for k in 1..400 {
        let kf = k as f64;
        let denom = kf * (nu + kf);
        if denom == 0.0 {
            // exact zero denominator cannot occur for snapped non-integer orders
            prev_ratio_blowup = true;
            break;
        }
        term = term * q / denom;
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) && k > 3 {
            break;
        }
    }
    debug_assert!(!prev_ratio_blowup, "series hit a pole of the term recurrence");
    let _ = lead;
    sum
}

/// Integer-order `K_n(z)` by the logarithmic series.
fn k_integer_series(n: u32, z: C64) -> C64 {
    let half = 0.5 * z;
    let q = half * half;
    let nf = n as f64;
    // finite sum with factorials
    let mut finite = C64::new(0.0, 0.0);
    if n > 0 {
        let mut term = C64::new(0.5 * real_gamma(nf), 0.0) * half.powc(C64::new(-nf, 0.0));
        // term_k = (1/2)(z/2)^{-n} (n-k-1)!/k! (-z^2/4)^k
        finite += term;
        for k in 1..n as usize {
            let kf = k as f64;
            term = term * (-q) / (kf * (nf - kf));
            finite += term;
        }
    }
    // the log carries (-1)^{n+1}: minus at even orders, plus at odd ones
    let log_term = (0.5 * z).ln() * i_series(nf, z) * if n % 2 == 0 { -1.0 } else { 1.0 };
    // series with digamma weights
    let mut psi_k = digamma_int(1);
    let mut psi_nk = digamma_int(n as usize + 1);
    let mut term = half.powc(C64::new(nf, 0.0)) * 0.5 / real_gamma(nf + 1.0);
    let mut series = term * (psi_k + psi_nk);
    for k in 1..400 {
        let kf = k as f64;
        psi_k += 1.0 / kf;
        psi_nk += 1.0 / (nf + kf);
        term = term * q / (kf * (nf + kf));
        let contrib = term * (psi_k + psi_nk);
        series += contrib;
        if contrib.norm() < 1e-18 * series.norm().max(1e-300) && k > 3 {
            break;
        }
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    finite + log_term + sign * series
}

/// `K` at non-integer order from the connection formula
/// `K_nu = pi/2 (I_{-nu} - I_nu)/sin(nu pi)`.
fn k_connection(nu: f64, z: C64, i_plus: C64) -> C64 {
    let i_minus = i_series(-nu, z);
    0.5 * std::f64::consts::PI * (i_minus - i_plus) / (nu * std::f64::consts::PI).sin()
}

/// CF1 (Lentz): the ratio `I_{nu+1}/I_nu`.
fn cf1_ratio(nu: f64, z: C64) -> Result<C64> {
    // the rescue value must stay comfortably above the underflow threshold of
    // the naive complex division, whose denominator squares the modulus
    let tiny = C64::new(1e-30, 0.0);
    let mut f = tiny;
    let mut c = f;
    let mut d = C64::new(0.0, 0.0);
    for j in 1..100_000 {
        let b = 2.0 * (nu + j as f64) / z;
        d = b + d;
        if d.norm() < 1e-30 {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c.norm() < 1e-30 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        // rounding noise keeps |delta - 1| near machine epsilon; a tighter
        // threshold than 1e-15 can never be met
        if (delta - 1.0).norm() < 1e-15 {
            return Ok(f);
        }
    }
    Err(CoreError::LinearAlgebra(
        "continued fraction CF1 did not converge".into(),
    ))
}

/// CF2 (Steed): scaled `K_mu`, `K_{mu+1}` for `0 <= mu < 1`, `Re z > 0`.
///
/// Returns `(e^z K_mu, e^z K_{mu+1})`.
fn cf2_k_scaled(mu: f64, z: C64) -> Result<(C64, C64)> {
    let a1 = 0.25 - mu * mu;
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = C64::new(0.0, 0.0);
    let mut q2 = C64::new(1.0, 0.0);
    let mut q = C64::new(a1, 0.0);
    let mut c = C64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 2..100_000u64 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() <= 1e-15 * s.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CoreError::LinearAlgebra(
            "continued fraction CF2 did not converge".into(),
        ));
    }
    let h = a1 * h;
    let k_mu = (std::f64::consts::PI / (2.0 * z)).sqrt() / s;
    let k_mu1 = k_mu * (mu + z + 0.5 - h) / z;
    Ok((k_mu, k_mu1))
}

/// Large-argument asymptotic series `sum a_k(nu)/z^k`, optionally alternating.
fn asymptotic_sum(nu: f64, z: C64, alternating: bool) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut best = f64::INFINITY;
    let four_nu2 = 4.0 * nu * nu;
    for k in 1..60u32 {
        let odd = (2 * k - 1) as f64;
        let mut factor = (four_nu2 - odd * odd) / (8.0 * k as f64);
        if alternating {
            factor = -factor;
        }
        term = term * factor / z;
        if term.norm() > best {
            break; // divergent tail reached
        }
        best = term.norm();
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// Asymptotic evaluation of the pair, valid for large `|z|`, `Re z >= 0`.
fn ik_pair_asymptotic(nu: f64, z: C64) -> (C64, C64) {
    let pref = 1.0 / (2.0 * std::f64::consts::PI * z).sqrt();
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
    // I keeps both exponentials: the recessive one matters near the
    // imaginary axis where this branch is used
    let stokes = (C64::new(0.0, sign * std::f64::consts::PI * (nu + 0.5))).exp();
    let i_val = pref * (z.exp() * asymptotic_sum(nu, z, true) + stokes * (-z).exp() * asymptotic_sum(nu, z, false));
    let k_val =
        (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp() * asymptotic_sum(nu, z, false);
    (i_val, k_val)
}

/// Pair (I_nu, I_{nu+1}, K_nu, K_{nu+1}) for `nu >= 0`, `Re z >= 0`, `z != 0`.
fn ik_pair_rhp(nu: f64, z: C64) -> Result<(C64, C64, C64, C64)> {
    let r = z.norm();
    let near_real_sector = z.re >= 0.3 * r;
    let snapped = nu.round();
    let is_integer = (nu - snapped).abs() < 1e-8;

    if r <= 3.0 || (!near_real_sector && r <= 14.0) {
        // series regime
        let nu_eff = if is_integer { snapped } else { nu };
        let i0 = i_series(nu_eff, z);
        let i1 = i_series(nu_eff + 1.0, z);
        let (k0, k1) = if is_integer {
            let n = snapped as u32;
            (k_integer_series(n, z), k_integer_series(n + 1, z))
        } else {
            (k_connection(nu, z, i0), {
                // sin((nu+1) pi) = -sin(nu pi); reuse the formula at order nu+1
                let i_minus = i_series(-nu - 1.0, z);
                0.5 * std::f64::consts::PI * (i_minus - i1)
                    / ((nu + 1.0) * std::f64::consts::PI).sin()
            })
        };
        return Ok((i0, i1, k0, k1));
    }

    if near_real_sector {
        // continued-fraction regime, scaled internally by e^{z}
        let mu = nu - nu.floor();
        let (mut k_lo, mut k_hi) = cf2_k_scaled(mu, z)?;
        let mut order = mu;
        while order + 0.5 < nu {
            let next = (2.0 * (order + 1.0) / z) * k_hi + k_lo;
            k_lo = k_hi;
            k_hi = next;
            order += 1.0;
        }
        // now k_lo = e^z K_nu, k_hi = e^z K_{nu+1}
        let ratio = cf1_ratio(nu, z)?;
        let f = nu / z + ratio; // I'/I
        let kp = (nu / z) * k_lo - k_hi; // e^z K'
        let i0_scaled = 1.0 / (z * (f * k_lo - kp));
        let ez = z.exp();
        let i0 = i0_scaled * ez;
        let i1 = i0 * ratio;
        let emz = (-z).exp();
        return Ok((i0, i1, k_lo * emz, k_hi * emz));
    }

    // far from the real axis and |z| > 14: two-sided asymptotics
    let (i0, k0) = ik_pair_asymptotic(nu, z);
    let (i1, k1) = ik_pair_asymptotic(nu + 1.0, z);
    Ok((i0, i1, k0, k1))
}

/// Evaluate `I_nu`, `K_nu` and derivatives at complex `z` off the branch cut.
///
/// The order may be any real number; negative orders use
/// `I_{-nu} = I_nu + (2/pi) sin(nu pi) K_nu` and `K_{-nu} = K_nu`.
pub fn bessel_ik(nu: f64, z: C64) -> Result<BesselEval> {
    if z.norm() == 0.0 {
        return Err(CoreError::InvalidArgument(
            "bessel_ik: z = 0 is singular".into(),
        ));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(CoreError::InvalidArgument(
            "bessel_ik: z on the branch cut (negative real axis)".into(),
        ));
    }
    if z.re.abs() > 690.0 {
        return Err(CoreError::InvalidArgument(
            "bessel_ik: |Re z| too large for unscaled values; use bessel_ik_scaled".into(),
        ));
    }
    let p = nu.abs();
    let (i0, i1, k0, k1) = ik_pair_any(p, z)?;
    let (iv, ik1, kv, kk1) = if nu >= 0.0 {
        (i0, i1, k0, k1)
    } else {
        // reflect the order; derivatives reflect linearly as well
        let s = (2.0 / std::f64::consts::PI) * (p * std::f64::consts::PI).sin();
        (i0 + s * k0, i1, k0, k1)
    };
    let (i_derivative, k_derivative) = if nu >= 0.0 {
        (i1 + (nu / z) * iv, (nu / z) * kv - kk1)
    } else {
        // I'_{-p} = I'_p + (2/pi) sin(p pi) K'_p, K'_{-p} = K'_p
        let s = (2.0 / std::f64::consts::PI) * (p * std::f64::consts::PI).sin();
        let ip = i1 + (p / z) * i0;
        let kp = (p / z) * k0 - k1;
        (ip + s * kp, kp)
    };
    let _ = ik1;
    Ok(BesselEval {
        nu,
        z,
        i_value: iv,
        k_value: kv,
        i_derivative,
        k_derivative,
    })
}

/// Pair at `nu >= 0` for any `z` off the cut: handles the left half-plane by
/// reflection with the standard continuation phases.
fn ik_pair_any(nu: f64, z: C64) -> Result<(C64, C64, C64, C64)> {
    if z.re >= 0.0 {
        return ik_pair_rhp(nu, z);
    }
    let w = -z;
    let (i0w, i1w, k0w, k1w) = ik_pair_rhp(nu, w)?;
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let phase = |order: f64| C64::new(0.0, sign * std::f64::consts::PI * order).exp();
    let i0 = phase(nu) * i0w;
    let i1 = phase(nu + 1.0) * i1w;
    let ipi = C64::new(0.0, sign * std::f64::consts::PI);
    let k0 = phase(-nu) * k0w - ipi * i0w;
    let k1 = phase(-nu - 1.0) * k1w - ipi * i1w;
    Ok((i0, i1, k0, k1))
}

/// Scaled values `e^{-z} I`, `e^{z} K` (and likewise-scaled derivatives) for
/// `Re z >= 0`, where the plain values would overflow.
pub fn bessel_ik_scaled(nu: f64, z: C64) -> Result<BesselEval> {
    if z.re < 0.0 {
        return Err(CoreError::InvalidArgument(
            "bessel_ik_scaled: scaling convention requires Re z >= 0".into(),
        ));
    }
    if z.norm() == 0.0 {
        return Err(CoreError::InvalidArgument(
            "bessel_ik_scaled: z = 0 is singular".into(),
        ));
    }
    let r = z.norm();
    let near_real_sector = z.re >= 0.3 * r;
    if r > 3.0 && near_real_sector {
        // continued fractions are natively scaled
        let p = nu.abs();
        let mu = p - p.floor();
        let (mut k_lo, mut k_hi) = cf2_k_scaled(mu, z)?;
        let mut order = mu;
        while order + 0.5 < p {
            let next = (2.0 * (order + 1.0) / z) * k_hi + k_lo;
            k_lo = k_hi;
            k_hi = next;
            order += 1.0;
        }
        let ratio = cf1_ratio(p, z)?;
        let f = p / z + ratio;
        let kp = (p / z) * k_lo - k_hi;
        let i0 = 1.0 / (z * (f * k_lo - kp));
        let i1 = i0 * ratio;
        let (iv, kv, ivd, kvd) = if nu >= 0.0 {
            (i0, k_lo, i1 + (nu / z) * i0, kp)
        } else {
            let s = (2.0 / std::f64::consts::PI) * (p * std::f64::consts::PI).sin();
            // e^{-z} I_{-p} = e^{-z} I_p + s e^{-z} K_p; the K term carries e^{-2z}
            let e2 = (-2.0 * z).exp();
            let ipd = i1 + (p / z) * i0;
            (
                i0 + s * e2 * k_lo,
                k_lo,
                ipd + s * e2 * kp,
                kp,
            )
        };
        return Ok(BesselEval {
            nu,
            z,
            i_value: iv,
            k_value: kv,
            i_derivative: ivd,
            k_derivative: kvd,
        });
    }
    // moderate |z|: scale the plain values
    let plain = bessel_ik(nu, z)?;
    let emz = (-z).exp();
    let epz = z.exp();
    Ok(BesselEval {
        nu,
        z,
        i_value: plain.i_value * emz,
        k_value: plain.k_value * epz,
        i_derivative: plain.i_derivative * emz,
        k_derivative: plain.k_derivative * epz,
    })
}

/// Quadrature of the critical-layer limit integral
/// `int_{-eps}^{eps} -a x/(a^2+x^2)^{3/2} |K_nu(x + i a)|^2 dx`.
///
/// As `a -> 0` the value converges to `2 pi cos(nu pi)/(1 - 4 nu^2)` for
/// orders in (0, 1/2).
pub fn bessel_limit_integral(nu: f64, a: f64, epsilon: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 0.5) {
        return Err(CoreError::InvalidArgument(
            "bessel_limit_integral: order must lie in (0, 1/2)".into(),
        ));
    }
    if !(a > 0.0 && epsilon > 0.0 && a <= 0.1 * epsilon) {
        return Err(CoreError::InvalidArgument(
            "bessel_limit_integral: need 0 < a << epsilon".into(),
        ));
    }
    let f = |x: f64| -> f64 {
        let z = C64::new(x, a);
        let k = match bessel_ik(nu, z) {
            Ok(e) => e.k_value,
            Err(_) => return 0.0,
        };
        -a * x / (a * a + x * x).powf(1.5) * k.norm_sqr()
    };
    let mut pts = vec![-epsilon];
    for &scale in &[100.0, 10.0, 1.0] {
        let p = scale * a;
        if p < epsilon {
            pts.push(-p);
        }
    }
    pts.push(0.0);
    for &scale in &[1.0, 10.0, 100.0] {
        let p = scale * a;
        if p < epsilon {
            pts.push(p);
        }
    }
    pts.push(epsilon);
    let (value, _err) = crate::quad::adaptive_split(f, &pts, 1e-8, 6000)?;
    Ok(value)
}

/// Closed-form limit of the integral above.
pub fn limit_integral_closed_form(nu: f64) -> f64 {
    2.0 * std::f64::consts::PI * (nu * std::f64::consts::PI).cos() / (1.0 - 4.0 * nu * nu)
}
