//! 1+1 dimensional laboratory: straight-characteristic solutions of
//! `∂ₜu + λ(u)∂ₓu = 0`, a Godunov cross-check, and simple waves of the
//! reduced field systems.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::charsys::SystemFamily;
use crate::error::{Error, Result};
use crate::rays::{crossing_time, linspace};

/// Adjacent pushed positions closer than `−1e−12` mark a multivalued map.
pub const MONOTONE_TOL: f64 = 1e-12;

#[derive(Clone)]
enum ProfileData {
    Callable(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Sampled(Vec<f64>),
}

/// Initial data `u₀(x)` on `[lo, hi]`.
#[derive(Clone)]
pub struct Profile1D {
    data: ProfileData,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl std::fmt::Debug for Profile1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Profile1D")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("periodic", &self.periodic)
            .finish_non_exhaustive()
    }
}

impl Profile1D {
    pub fn callable(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64, periodic: bool) -> Result<Self> {
        let p = Profile1D {
            data: ProfileData::Callable(Arc::new(f)),
            lo,
            hi,
            periodic,
        };
        p.validate()?;
        Ok(p)
    }

    /// Samples on a uniform grid including both endpoints; evaluated by
    /// linear interpolation.
    pub fn sampled(values: Vec<f64>, lo: f64, hi: f64, periodic: bool) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::GridTooCoarse(values.len()));
        }
        let p = Profile1D {
            data: ProfileData::Sampled(values),
            lo,
            hi,
            periodic,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.hi > self.lo) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::domain("profile interval must satisfy lo < hi"));
        }
        let ends = (self.raw(self.lo), self.raw(self.hi));
        if !ends.0.is_finite() || !ends.1.is_finite() {
            return Err(Error::domain("profile is not finite at the endpoints"));
        }
        if let ProfileData::Sampled(v) = &self.data {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain("profile samples must be finite"));
            }
        }
        if self.periodic && (ends.0 - ends.1).abs() >= 1e-12 {
            return Err(Error::domain(format!(
                "periodic profile endpoints differ: {} vs {}",
                ends.0, ends.1
            )));
        }
        Ok(())
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.data {
            ProfileData::Callable(f) => f(x),
            ProfileData::Sampled(v) => {
                let n = v.len() - 1;
                let s = ((x - self.lo) / (self.hi - self.lo) * n as f64).clamp(0.0, n as f64);
                let i = (s.floor() as usize).min(n - 1);
                let w = s - i as f64;
                v[i] * (1.0 - w) + v[i + 1] * w
            }
        }
    }

    /// `u₀(x)`; periodic profiles wrap, others are held constant outside.
    pub fn eval(&self, x: f64) -> f64 {
        let len = self.hi - self.lo;
        let y = if self.periodic && (x < self.lo || x > self.hi) {
            self.lo + (x - self.lo).rem_euclid(len)
        } else {
            x.clamp(self.lo, self.hi)
        };
        self.raw(y)
    }

    pub fn grid(&self, n: usize) -> Vec<f64> {
        linspace(self.lo, self.hi, n)
    }
}

/// Solution pushed along straight characteristics `x = φ + λ(u₀(φ))t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MocSolution {
    pub t: f64,
    pub phi: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub multivalued: bool,
}

pub fn moc_solve(speed: &dyn Fn(f64) -> f64, profile: &Profile1D, t: f64, n: usize) -> Result<MocSolution> {
    if !(t >= 0.0) {
        return Err(Error::Usage("time must be non-negative".into()));
    }
    let phi = profile.grid(n);
    let u: Vec<f64> = phi.iter().map(|&p| profile.eval(p)).collect();
    let x: Vec<f64> = phi.iter().zip(&u).map(|(&p, &v)| p + speed(v) * t).collect();
    let multivalued = x.windows(2).any(|w| w[1] - w[0] < -MONOTONE_TOL);
    Ok(MocSolution {
        t,
        phi,
        x,
        u,
        multivalued,
    })
}

/// `t* = −1/min_φ d[λ(u₀(φ))]/dφ` over an `n`-point grid, or `None` if the
/// composite speed never decreases.
pub fn shock_time(speed: &dyn Fn(f64) -> f64, profile: &Profile1D, n: usize) -> Result<Option<f64>> {
    if n < 3 {
        return Err(Error::GridTooCoarse(n));
    }
    let g = |p: f64| speed(profile.eval(p));
    let d = 1e-6 * (profile.hi - profile.lo);
    let min_slope = profile
        .grid(n)
        .iter()
        .map(|&p| (g(p + d) - g(p - d)) / (2.0 * d))
        .fold(f64::INFINITY, f64::min);
    Ok((min_slope < 0.0).then(|| -1.0 / min_slope))
}

/// Convex flux `f` with `λ = f′`.
pub trait ConvexFlux {
    fn flux(&self, u: f64) -> f64;
    fn speed(&self, u: f64) -> f64;
    /// Minimizer of `f`.
    fn sonic_point(&self) -> f64;
}

/// `f(u) = u²/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Burgers;

impl ConvexFlux for Burgers {
    fn flux(&self, u: f64) -> f64 {
        0.5 * u * u
    }

    fn speed(&self, u: f64) -> f64 {
        u
    }

    fn sonic_point(&self) -> f64 {
        0.0
    }
}

fn godunov<F: ConvexFlux + ?Sized>(f: &F, ul: f64, ur: f64) -> f64 {
    let us = f.sonic_point();
    if ul <= ur {
        if ul > us {
            f.flux(ul)
        } else if ur < us {
            f.flux(ur)
        } else {
            f.flux(us)
        }
    } else {
        f.flux(ul).max(f.flux(ur))
    }
}

/// Cell-centred finite-volume solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub dx: f64,
}

/// First-order Godunov scheme on `nx` cells, periodic or with transmissive
/// boundaries.
pub fn upwind_solve<F: ConvexFlux + ?Sized>(
    flux: &F,
    profile: &Profile1D,
    t: f64,
    nx: usize,
    cfl: f64,
) -> Result<GridSolution> {
    if !(cfl > 0.0) || cfl > 0.9 {
        return Err(Error::CflViolation(cfl));
    }
    if nx < 3 {
        return Err(Error::GridTooCoarse(nx));
    }
    let dx = (profile.hi - profile.lo) / nx as f64;
    let x: Vec<f64> = (0..nx).map(|i| profile.lo + (i as f64 + 0.5) * dx).collect();
    let mut u: Vec<f64> = x.iter().map(|&xi| profile.eval(xi)).collect();
    let mut now = 0.0;
    let mut fluxes = vec![0.0; nx + 1];
    while now < t {
        let smax = u.iter().fold(0.0f64, |m, &v| m.max(flux.speed(v).abs()));
        let mut dt = if smax > 0.0 { cfl * dx / smax } else { t - now };
        dt = dt.min(t - now);
        for (i, fi) in fluxes.iter_mut().enumerate() {
            let (l, r) = if profile.periodic {
                (u[(i + nx - 1) % nx], u[i % nx])
            } else {
                (u[i.saturating_sub(1)], u[i.min(nx - 1)])
            };
            *fi = godunov(flux, l, r);
        }
        for i in 0..nx {
            u[i] -= dt / dx * (fluxes[i + 1] - fluxes[i]);
        }
        now += dt;
    }
    Ok(GridSolution { t, x, u, dx })
}

/// Pre-shock exact value at `x` from `x = φ + λ(u₀(φ))t`, solved for `φ` by
/// Newton iteration.
pub fn exact_before_shock(speed: &dyn Fn(f64) -> f64, profile: &Profile1D, x: f64, t: f64) -> Result<f64> {
    let g = |p: f64| p + speed(profile.eval(p)) * t - x;
    let mut phi = x - speed(profile.eval(x)) * t;
    let d = 1e-7 * (profile.hi - profile.lo);
    for _ in 0..100 {
        let gp = (g(phi + d) - g(phi - d)) / (2.0 * d);
        if !(gp > 0.0) {
            return Err(Error::domain("characteristics have crossed; no single-valued solution"));
        }
        let step = g(phi) / gp;
        phi -= step;
        if step.abs() < 1e-14 * (1.0 + phi.abs()) {
            break;
        }
    }
    Ok(profile.eval(phi))
}

/// `Σ|u_h − u| dx` between a finite-volume solution and the exact
/// pre-shock solution.
pub fn l1_distance_to_exact(sol: &GridSolution, speed: &dyn Fn(f64) -> f64, profile: &Profile1D) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &u) in sol.x.iter().zip(&sol.u) {
        acc += (u - exact_before_shock(speed, profile, x, sol.t)?).abs() * sol.dx;
    }
    Ok(acc)
}

/// Solution `U(φ)` of `dU/dφ = ξ(φ)R(U)` with `ξ = 1/R_K` so that `U_K = φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpleWave {
    pub mode: usize,
    pub component: usize,
    pub phi: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub xi: Vec<f64>,
}

impl SimpleWave {
    pub fn lambda_variation(&self) -> f64 {
        let lo = self.lambda.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// `max|λ(φ) − λ(φ₀)|`.
    pub fn max_lambda_deviation(&self) -> f64 {
        self.lambda.iter().fold(0.0, |m, l| m.max((l - self.lambda[0]).abs()))
    }

    /// Linear interpolation of `λ` in `φ` (clamped to the range).
    pub fn lambda_at(&self, phi: f64) -> f64 {
        let n = self.phi.len() - 1;
        let (a, b) = (self.phi[0], self.phi[n]);
        let s = ((phi - a) / (b - a) * n as f64).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let w = s - i as f64;
        self.lambda[i] * (1.0 - w) + self.lambda[i + 1] * w
    }

    /// Largest sine of the angle between a fourth-order finite-difference
    /// tangent `dU/dφ` and a freshly computed `R(U)` at interior samples.
    pub fn parallel_error<F: SystemFamily + ?Sized>(&self, family: &F) -> Result<f64> {
        let n = self.phi.len();
        let h = self.phi[1] - self.phi[0];
        let mut worst: f64 = 0.0;
        for k in 2..n.saturating_sub(2) {
            let u = DVector::from_column_slice(&self.states[k]);
            let s = |j: usize| DVector::from_column_slice(&self.states[j]);
            let tangent = (s(k - 2) - s(k - 1) * 8.0 + s(k + 1) * 8.0 - s(k + 2)) / (12.0 * h);
            let (_, r) = mode_vector(family, &u, self.lambda[k])?;
            let t = tangent.normalize();
            worst = worst.max((&t - &r * t.dot(&r)).norm());
        }
        Ok(worst)
    }
}

/// Eigenvalue nearest `target` and its unit right eigenvector.
fn mode_vector<F: SystemFamily + ?Sized>(family: &F, u: &DVector<f64>, target: f64) -> Result<(f64, DVector<f64>)> {
    let es = family.eigen(u)?;
    let (i, lam) = es
        .values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .ok_or_else(|| Error::domain("empty system"))?;
    let spacing = es
        .values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| (v - lam).abs())
        .fold(f64::INFINITY, f64::min);
    let limit = 1e-6 * (1.0 + lam.abs());
    if spacing < limit {
        return Err(Error::ModeCollision { spacing, limit });
    }
    Ok((lam, es.right.column(i).into_owned()))
}

/// Integrates a simple wave of `family` in mode `mode` (index into the
/// ascending spectrum at `u0`) with RK4 over `n` steps of `φ ∈ [lo, hi]`,
/// parametrized by component `component`. The starting state is `u0` with
/// `u0[component]` replaced by `lo`.
pub fn simple_wave_construct<F: SystemFamily + ?Sized>(
    family: &F,
    mode: usize,
    component: usize,
    range: (f64, f64),
    u0: &DVector<f64>,
    n: usize,
) -> Result<SimpleWave> {
    if n < 2 {
        return Err(Error::GridTooCoarse(n));
    }
    if component >= family.dim() || u0.len() != family.dim() {
        return Err(Error::Usage(
            "component index or state size does not match the system".into(),
        ));
    }
    let mut u = u0.clone();
    u[component] = range.0;
    let es = family.eigen(&u)?;
    let mut lam = *es
        .values
        .get(mode)
        .ok_or_else(|| Error::Usage(format!("mode {mode} out of range")))?;
    let field = |u: &DVector<f64>, target: f64| -> Result<(DVector<f64>, f64, f64)> {
        let (l, r) = mode_vector(family, u, target)?;
        let rk = r[component];
        if rk.abs() < 1e-12 {
            return Err(Error::DegenerateSystem(format!(
                "eigenvector component {component} vanishes; cannot parametrize the wave by it"
            )));
        }
        Ok((&r / rk, 1.0 / rk, l))
    };
    let phi = linspace(range.0, range.1, n + 1);
    let dphi = (range.1 - range.0) / n as f64;
    let (_, xi0, l0) = field(&u, lam)?;
    lam = l0;
    let mut states = vec![u.iter().copied().collect::<Vec<_>>()];
    let mut lambda = vec![lam];
    let mut xi = vec![xi0];
    for k in 0..n {
        let (k1, _, _) = field(&u, lam)?;
        let (k2, _, _) = field(&(&u + &k1 * (0.5 * dphi)), lam)?;
        let (k3, _, _) = field(&(&u + &k2 * (0.5 * dphi)), lam)?;
        let (k4, _, _) = field(&(&u + &k3 * dphi), lam)?;
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dphi / 6.0);
        u[component] = phi[k + 1];
        let (_, x, l) = field(&u, lam)?;
        lam = l;
        states.push(u.iter().copied().collect());
        lambda.push(lam);
        xi.push(x.abs());
    }
    Ok(SimpleWave {
        mode,
        component,
        phi,
        states,
        lambda,
        xi,
    })
}

/// Characteristic positions at one time for both families of a demo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanSnapshot {
    pub t: f64,
    pub burgers_x: Vec<f64>,
    pub wave_x: Vec<f64>,
}

/// Burgers fan versus the fan of a simple wave carrying the same profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxDemo {
    /// Characteristic feet.
    pub x0: Vec<f64>,
    pub burgers_lambda: Vec<f64>,
    pub wave_lambda: Vec<f64>,
    pub burgers_crossing: Option<f64>,
    pub wave_crossing: Option<f64>,
    pub t_max: f64,
    pub snapshots: Vec<FanSnapshot>,
}

/// Launches characteristics from `n` feet on the profile's interval.
///
/// Burgers characteristics move at `u₀(x)`. The simple-wave fan maps `u₀`
/// affinely onto the wave's parameter range and moves at `λ(φ)`, so an
/// exceptional wave yields parallel characteristics.
pub fn exceptional_flux_demo(
    wave: &SimpleWave,
    profile: &Profile1D,
    t_list: &[f64],
    t_max: f64,
    n: usize,
) -> Result<FluxDemo> {
    let x0 = profile.grid(n);
    let u0: Vec<f64> = x0.iter().map(|&x| profile.eval(x)).collect();
    let (umin, umax) = u0
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (plo, phi_hi) = (wave.phi[0], wave.phi[wave.phi.len() - 1]);
    let to_phi = move |u: f64| {
        if umax > umin {
            plo + (phi_hi - plo) * (u - umin) / (umax - umin)
        } else {
            plo
        }
    };
    let wave_speed = |x: f64| wave.lambda_at(to_phi(profile.eval(x)));
    let burgers_speed = |x: f64| profile.eval(x);
    let burgers_lambda: Vec<f64> = x0.iter().map(|&x| burgers_speed(x)).collect();
    let wave_lambda: Vec<f64> = x0.iter().map(|&x| wave_speed(x)).collect();
    let burgers_crossing = crossing_time(&burgers_speed, &x0, t_max)?;
    let wave_crossing = crossing_time(&wave_speed, &x0, t_max)?;
    let snapshots = t_list
        .iter()
        .map(|&t| FanSnapshot {
            t,
            burgers_x: x0.iter().zip(&burgers_lambda).map(|(x, l)| x + l * t).collect(),
            wave_x: x0.iter().zip(&wave_lambda).map(|(x, l)| x + l * t).collect(),
        })
        .collect();
    Ok(FluxDemo {
        x0,
        burgers_lambda,
        wave_lambda,
        burgers_crossing,
        wave_crossing,
        t_max,
        snapshots,
    })
}

#[derive(Serialize)]
struct FanRow<'a> {
    t: f64,
    family: &'a str,
    phi: f64,
    x: f64,
    lambda: f64,
}

/// Characteristic fans as CSV: `t, family, phi, x, lambda`.
pub fn write_fan_csv<W: Write>(demo: &FluxDemo, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for snap in &demo.snapshots {
        for (family, xs, ls) in [
            ("burgers", &snap.burgers_x, &demo.burgers_lambda),
            ("wave", &snap.wave_x, &demo.wave_lambda),
        ] {
            for i in 0..xs.len() {
                w.serialize(FanRow {
                    t: snap.t,
                    family,
                    phi: demo.x0[i],
                    x: xs[i],
                    lambda: ls[i],
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SnapRow {
    t: f64,
    x: f64,
    u: f64,
}

/// Solution snapshots as CSV: `t, x, u`.
pub fn write_snapshot_csv<W: Write>(sols: &[MocSolution], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in sols {
        for (&x, &u) in s.x.iter().zip(&s.u) {
            w.serialize(SnapRow { t: s.t, x, u })?;
        }
    }
    w.flush()?;
    Ok(())
}
