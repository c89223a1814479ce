//! Characteristic rays `dx^μ/ds = ∂H/∂p_μ`, `dp_μ/ds = −∂H/∂x^μ`, transport
//! of discontinuity amplitudes along them, and crossing times of straight
//! characteristic families.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::charsys::Cone;
use crate::error::{Error, Result};

/// Normalized `|H|/scale` above which a starting point is off the cone.
pub const ON_SHELL_TOL: f64 = 1e-9;

/// Threshold on `|π|` reported as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Dispersion function `H(x, p)` on phase space.
pub trait Hamiltonian {
    fn value(&self, x: &[f64; 4], p: &[f64; 4]) -> f64;
    fn grad_p(&self, x: &[f64; 4], p: &[f64; 4]) -> [f64; 4];
    fn grad_x(&self, x: &[f64; 4], p: &[f64; 4]) -> [f64; 4];
    /// Homogeneity degree in `p`.
    fn degree(&self) -> u32;
    fn scale(&self, x: &[f64; 4], p: &[f64; 4]) -> f64;
}

/// A cone on a constant background: `H` does not depend on `x`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform<C>(pub C);

impl<C: Cone> Hamiltonian for Uniform<C> {
    fn value(&self, _: &[f64; 4], p: &[f64; 4]) -> f64 {
        self.0.value(p)
    }

    fn grad_p(&self, _: &[f64; 4], p: &[f64; 4]) -> [f64; 4] {
        self.0.grad_p(p)
    }

    fn grad_x(&self, _: &[f64; 4], _: &[f64; 4]) -> [f64; 4] {
        [0.0; 4]
    }

    fn degree(&self) -> u32 {
        self.0.degree()
    }

    fn scale(&self, _: &[f64; 4], p: &[f64; 4]) -> f64 {
        self.0.scale(p)
    }
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `H = p₀ + u(x¹)p₁`, the phase-space form of `∂ₜu + u∂ₓu = 0`
/// characteristics on a frozen, `x`-dependent speed profile.
#[derive(Clone)]
pub struct BurgersAnalog {
    u: Profile,
    du: Profile,
}

impl BurgersAnalog {
    pub fn new(
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BurgersAnalog {
            u: Arc::new(u),
            du: Arc::new(du),
        }
    }

    /// Profile with `u′` from central differences at step `1e−6`.
    pub fn from_profile(u: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let u: Profile = Arc::new(u);
        let f = u.clone();
        BurgersAnalog {
            u,
            du: Arc::new(move |x| (f(x + 1e-6) - f(x - 1e-6)) / 2e-6),
        }
    }
}

impl Hamiltonian for BurgersAnalog {
    fn value(&self, x: &[f64; 4], p: &[f64; 4]) -> f64 {
        p[0] + (self.u)(x[1]) * p[1]
    }

    fn grad_p(&self, x: &[f64; 4], _: &[f64; 4]) -> [f64; 4] {
        [1.0, (self.u)(x[1]), 0.0, 0.0]
    }

    fn grad_x(&self, x: &[f64; 4], p: &[f64; 4]) -> [f64; 4] {
        [0.0, (self.du)(x[1]) * p[1], 0.0, 0.0]
    }

    fn degree(&self) -> u32 {
        1
    }

    fn scale(&self, x: &[f64; 4], p: &[f64; 4]) -> f64 {
        p[0].abs() + ((self.u)(x[1]) * p[1]).abs()
    }
}

/// Point on a ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayState {
    pub s: f64,
    pub x: [f64; 4],
    pub p: [f64; 4],
    pub h: f64,
}

impl RayState {
    pub fn new(x: [f64; 4], p: [f64; 4]) -> Self {
        RayState { s: 0.0, x, p, h: 0.0 }
    }
}

/// Sampled ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayPath {
    pub samples: Vec<RayState>,
    /// Largest `|H(s) − H(0)|`.
    pub max_drift: f64,
}

fn add(a: &[f64; 8], b: &[f64; 8], k: f64) -> [f64; 8] {
    std::array::from_fn(|i| a[i] + k * b[i])
}

fn split(y: &[f64; 8]) -> ([f64; 4], [f64; 4]) {
    ([y[0], y[1], y[2], y[3]], [y[4], y[5], y[6], y[7]])
}

fn rhs<H: Hamiltonian + ?Sized>(ham: &H, y: &[f64; 8]) -> Result<[f64; 8]> {
    let (x, p) = split(y);
    let gp = ham.grad_p(&x, &p);
    let gx = ham.grad_x(&x, &p);
    let out: [f64; 8] = std::array::from_fn(|i| if i < 4 { gp[i] } else { -gx[i - 4] });
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::StepFailure(format!(
            "non-finite derivative at x = {x:?}, p = {p:?}"
        )))
    }
}

/// Integrates Hamilton's equations with fixed-step RK4 from `start` to
/// `s_max`. The step is adjusted down so that it divides `s_max`.
pub fn trace<H: Hamiltonian + ?Sized>(ham: &H, start: RayState, s_max: f64, step: f64) -> Result<RayPath> {
    if !(step > 0.0) || !(s_max >= 0.0) {
        return Err(Error::Usage("ray step and length must be positive".into()));
    }
    let h0 = ham.value(&start.x, &start.p);
    let scale = ham.scale(&start.x, &start.p).max(f64::MIN_POSITIVE);
    if !(h0.abs() / scale < ON_SHELL_TOL) {
        return Err(Error::OffShellStart(h0.abs() / scale));
    }
    let n = (s_max / step).ceil().max(1.0) as usize;
    let ds = s_max / n as f64;
    let mut y: [f64; 8] = std::array::from_fn(|i| if i < 4 { start.x[i] } else { start.p[i - 4] });
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(RayState { h: h0, ..start });
    let mut max_drift: f64 = 0.0;
    for k in 1..=n {
        let k1 = rhs(ham, &y)?;
        let k2 = rhs(ham, &add(&y, &k1, 0.5 * ds))?;
        let k3 = rhs(ham, &add(&y, &k2, 0.5 * ds))?;
        let k4 = rhs(ham, &add(&y, &k3, ds))?;
        y = std::array::from_fn(|i| y[i] + ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let (x, p) = split(&y);
        let h = ham.value(&x, &p);
        if !h.is_finite() {
            return Err(Error::StepFailure(format!(
                "H became non-finite at s = {}",
                k as f64 * ds
            )));
        }
        max_drift = max_drift.max((h - h0).abs());
        samples.push(RayState {
            s: start.s + k as f64 * ds,
            x,
            p,
            h,
        });
    }
    Ok(RayPath { samples, max_drift })
}

/// `|Σ p_μ ∂H/∂p_μ − N·H| / scale`: zero for a homogeneous `H` of degree `N`.
pub fn euler_residual<H: Hamiltonian + ?Sized>(ham: &H, x: &[f64; 4], p: &[f64; 4]) -> f64 {
    let g = ham.grad_p(x, p);
    let lhs: f64 = (0..4).map(|i| p[i] * g[i]).sum();
    let scale = ham.scale(x, p).max(f64::MIN_POSITIVE);
    (lhs - ham.degree() as f64 * ham.value(x, p)).abs() / scale
}

#[derive(Serialize)]
struct RayRow {
    s: f64,
    x0: f64,
    x1: f64,
    x2: f64,
    x3: f64,
    p0: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    #[serde(rename = "H")]
    h: f64,
}

/// CSV with columns `s, x0..x3, p0..p3, H`.
pub fn write_ray_csv<W: Write>(path: &RayPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for st in &path.samples {
        w.serialize(RayRow {
            s: st.s,
            x0: st.x[0],
            x1: st.x[1],
            x2: st.x[2],
            x3: st.x[3],
            p0: st.p[0],
            p1: st.p[1],
            p2: st.p[2],
            p3: st.p[3],
            h: st.h,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Single-mode transport `dπ/ds = −mπ − cπ²`.
///
/// `c` is `|∇φ|·(R·∇_Uλ)` and vanishes for exceptional modes; `m` is a
/// scenario constant (it depends on the background and the front geometry).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportState {
    pub pi0: f64,
    pub m: f64,
    pub c: f64,
}

impl TransportState {
    /// `w = 1/π`, which obeys the linear equation `w′ = m w + c`.
    fn reciprocal(&self, s: f64) -> f64 {
        let w0 = 1.0 / self.pi0;
        if self.m == 0.0 {
            w0 + self.c * s
        } else {
            let r = self.c / self.m;
            (w0 + r) * (self.m * s).exp() - r
        }
    }

    /// Closed-form `π(s)` (infinite at blow-up).
    pub fn exact(&self, s: f64) -> f64 {
        if self.pi0 == 0.0 {
            0.0
        } else {
            1.0 / self.reciprocal(s)
        }
    }

    fn rhs(&self, pi: f64) -> f64 {
        -self.m * pi - self.c * pi * pi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportSample {
    pub s: f64,
    pub pi: f64,
    pub blownup: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub samples: Vec<TransportSample>,
    /// Parameter value at which `|π| → ∞`, if reached before `s_max`.
    pub blowup: Option<f64>,
}

impl TransportReport {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, t| m.max(t.pi.abs()))
    }
}

/// Integrates the transport equation with RK4 and locates blow-up.
///
/// A step is flagged when `|π|` exceeds [`BLOWUP_THRESHOLD`], turns
/// non-finite, or the exact reciprocal `1/π` changes sign across it; the
/// blow-up point is then found by bisection on the reciprocal.
pub fn transport_amplitude(ts: &TransportState, s_max: f64, step: f64) -> Result<TransportReport> {
    if !(step > 0.0) || !(s_max >= 0.0) {
        return Err(Error::Usage("transport step and length must be positive".into()));
    }
    let n = (s_max / step).ceil().max(1.0) as usize;
    let ds = s_max / n as f64;
    let mut pi = ts.pi0;
    let mut samples = vec![TransportSample {
        s: 0.0,
        pi,
        blownup: false,
    }];
    for k in 0..n {
        let (s0, s1) = (k as f64 * ds, (k + 1) as f64 * ds);
        let k1 = ts.rhs(pi);
        let k2 = ts.rhs(pi + 0.5 * ds * k1);
        let k3 = ts.rhs(pi + 0.5 * ds * k2);
        let k4 = ts.rhs(pi + ds * k3);
        let next = pi + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let crossed = ts.pi0 != 0.0 && ts.reciprocal(s0).signum() != ts.reciprocal(s1).signum();
        if crossed || !next.is_finite() || next.abs() > BLOWUP_THRESHOLD {
            let s_star = bisect_blowup(ts, s0, s1);
            samples.push(TransportSample {
                s: s_star,
                pi: f64::INFINITY.copysign(pi),
                blownup: true,
            });
            return Ok(TransportReport {
                samples,
                blowup: Some(s_star),
            });
        }
        pi = next;
        samples.push(TransportSample {
            s: s1,
            pi,
            blownup: false,
        });
    }
    Ok(TransportReport { samples, blowup: None })
}

fn bisect_blowup(ts: &TransportState, mut lo: f64, mut hi: f64) -> f64 {
    let w_lo = ts.reciprocal(lo);
    if ts.reciprocal(hi).signum() == w_lo.signum() {
        // Threshold hit without a sign change: report the smallest |w|.
        return if ts.reciprocal(hi).abs() < w_lo.abs() { hi } else { lo };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ts.reciprocal(mid).signum() == w_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// CSV with columns `s, pi, blownup`.
pub fn write_transport_csv<W: Write>(report: &TransportReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &report.samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Earliest time at which two straight characteristics `x = φ + λ(φ)t`
/// meet, or `None` if none do before `t_max`.
///
/// The coarse estimate `−Δφ/Δλ` over adjacent grid pairs is refined by a
/// golden-section search for the most negative `λ′` around the best pair,
/// giving `t* = −1/min λ′`.
pub fn crossing_time(lambda: &dyn Fn(f64) -> f64, phi: &[f64], t_max: f64) -> Result<Option<f64>> {
    if phi.len() < 3 {
        return Err(Error::GridTooCoarse(phi.len()));
    }
    let lam: Vec<f64> = phi.iter().map(|&p| lambda(p)).collect();
    let mut best: Option<(usize, f64)> = None;
    for k in 0..phi.len() - 1 {
        let dl = lam[k + 1] - lam[k];
        let dp = phi[k + 1] - phi[k];
        if dl < 0.0 && dp > 0.0 {
            let t = -dp / dl;
            if best.is_none_or(|(_, b)| t < b) {
                best = Some((k, t));
            }
        }
    }
    let Some((k, coarse)) = best else {
        return Ok(None);
    };
    let lo = phi[k.saturating_sub(1)];
    let hi = phi[(k + 2).min(phi.len() - 1)];
    let slope = |x: f64| {
        let d = 1e-6 * (1.0 + x.abs());
        (lambda(x + d) - lambda(x - d)) / (2.0 * d)
    };
    let (a, b) = golden_min(&slope, lo, hi, 1e-10 * (1.0 + (hi - lo).abs()));
    let s = slope(0.5 * (a + b));
    let t = if s < 0.0 { (-1.0 / s).min(coarse) } else { coarse };
    Ok((t <= t_max).then_some(t))
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
