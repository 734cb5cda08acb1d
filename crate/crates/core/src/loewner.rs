//! Chordal Loewner evolution in the upper half-plane.
//!
//! Curves are turned into driving functions by composing elementary vertical
//! slit maps `g(z) = w + √((z − w)² + 4Δt)` (the exact flow of the Loewner
//! equation `∂ₜg = 2/(g − W)` for constant `W = w` over time `Δt`), and SLE
//! traces are produced by composing the inverse maps.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::rng::sample_stream;

/// Lift applied to points on the real line before composing maps.
pub const REAL_LIFT: f64 = 1e-12;
/// A point whose imaginary part falls below this is considered swallowed.
pub const SWALLOW_TOL: f64 = 1e-9;
/// Default bound on the capacity added by one extraction step.
pub const DEFAULT_DT_MAX: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum LoewnerError {
    #[error("point {0} is the base of the slit")]
    SingularPoint(Complex64),
    #[error("point swallowed during composition at step {step}")]
    Swallowed { step: usize },
    #[error("curve not admissible: image of point {index} has imaginary part {im:e}")]
    CollapsedImage { index: usize, im: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time {t} lies beyond the driving function's horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("empty point set")]
    EmptySet,
}

/// One elementary step: driving value `w` held for capacity time `dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlitStep {
    pub w: f64,
    pub dt: f64,
}

/// A sampled curve in the closed upper half-plane starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct HCurve {
    points: Vec<Complex64>,
}

impl HCurve {
    pub fn new(points: Vec<Complex64>) -> Result<Self, LoewnerError> {
        let Some(first) = points.first() else {
            return Err(LoewnerError::InvalidCurve("no points".into()));
        };
        if *first != Complex64::new(0.0, 0.0) {
            return Err(LoewnerError::InvalidCurve(format!("curve starts at {first}, not 0")));
        }
        for (k, w) in points.windows(2).enumerate() {
            if w[1].im <= 0.0 || !w[1].is_finite() {
                return Err(LoewnerError::InvalidCurve(format!("point {} = {} is not in the open half-plane", k + 1, w[1])));
            }
            if w[0] == w[1] {
                return Err(LoewnerError::InvalidCurve(format!("points {k} and {} coincide", k + 1)));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The curve multiplied by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { points: self.points.iter().map(|z| z * lambda).collect() }
    }

    /// Mirror image under `z ↦ −z̄`.
    pub fn mirrored(&self) -> Self {
        Self { points: self.points.iter().map(|z| Complex64::new(-z.re, z.im)).collect() }
    }
}

/// Capacity times `t[k]` and driving values `w[k]`, with `t[0] = 0` and `W`
/// equal to `w[k]` on `(t[k−1], t[k]]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DrivingFunction {
    t: Vec<f64>,
    w: Vec<f64>,
}

impl DrivingFunction {
    pub fn new(t: Vec<f64>, w: Vec<f64>) -> Result<Self, LoewnerError> {
        if t.is_empty() || t.len() != w.len() {
            return Err(LoewnerError::InvalidParameter("t and w must be nonempty and of equal length".into()));
        }
        if t[0] != 0.0 {
            return Err(LoewnerError::InvalidParameter("t[0] must be 0".into()));
        }
        if t.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(LoewnerError::InvalidParameter("t must be strictly increasing".into()));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(LoewnerError::InvalidParameter("w must be finite".into()));
        }
        Ok(Self { t, w })
    }

    /// Driving function of a sequence of slit steps starting from `W(0) = 0`.
    pub fn from_steps(steps: &[SlitStep]) -> Self {
        let mut t = Vec::with_capacity(steps.len() + 1);
        let mut w = Vec::with_capacity(steps.len() + 1);
        t.push(0.0);
        w.push(0.0);
        let mut acc = 0.0;
        for s in steps {
            acc += s.dt;
            t.push(acc);
            w.push(s.w);
        }
        Self { t, w }
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn horizon(&self) -> f64 {
        *self.t.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// The slit steps `(w[k], t[k] − t[k−1])` for `k ≥ 1`.
    pub fn steps(&self) -> impl Iterator<Item = SlitStep> + '_ {
        (1..self.t.len()).map(|k| SlitStep { w: self.w[k], dt: self.t[k] - self.t[k - 1] })
    }

    /// `W(t)`; beyond the horizon the last value is returned.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.w[0];
        }
        let k = self.t.partition_point(|&s| s < t);
        self.w[k.min(self.w.len() - 1)]
    }

    /// The prefix up to capacity `t` (the last step is cut at `t`).
    pub fn truncated(&self, t: f64) -> Self {
        let k = self.t.partition_point(|&s| s < t);
        if k >= self.t.len() {
            return self.clone();
        }
        let mut out = Self { t: self.t[..k].to_vec(), w: self.w[..k].to_vec() };
        if t > 0.0 {
            out.t.push(t);
            out.w.push(self.w[k]);
        }
        out
    }

    /// Writes the CSV with header `t,w`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,w")?;
        for (t, w) in self.t.iter().zip(&self.w) {
            writeln!(out, "{t},{w}")?;
        }
        Ok(())
    }
}

fn upper_branch(r: Complex64, zeta: Complex64) -> Complex64 {
    if r.im < 0.0 || (r.im == 0.0 && zeta.re < 0.0 && r.re > 0.0) || (r.im == 0.0 && zeta.re > 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

fn slit_map(z: Complex64, w: f64, c: f64) -> Complex64 {
    let zeta = z - w;
    let n2 = zeta.norm_sqr();
    if n2 > 4.0 * c.abs() {
        // For large |ζ| this form keeps the branch and avoids cancellation.
        let r = zeta * (Complex64::new(1.0, 0.0) + c / (zeta * zeta)).sqrt();
        return w + r;
    }
    w + upper_branch((zeta * zeta + c).sqrt(), zeta)
}

/// `g(z) = w + √((z − w)² + 4dt)` on the closed upper half-plane.
pub fn slit_forward(z: Complex64, s: SlitStep) -> Result<Complex64, LoewnerError> {
    if z == Complex64::new(s.w, 0.0) {
        return Err(LoewnerError::SingularPoint(z));
    }
    Ok(slit_map(z, s.w, 4.0 * s.dt))
}

/// The inverse `g⁻¹(z) = w + √((z − w)² − 4dt)`; real points in
/// `[w − 2√dt, w + 2√dt]` are sent onto the slit.
pub fn slit_inverse(z: Complex64, s: SlitStep) -> Complex64 {
    slit_map(z, s.w, -4.0 * s.dt)
}

fn lift(z: Complex64) -> Complex64 {
    if z.im <= 0.0 {
        Complex64::new(z.re, REAL_LIFT)
    } else {
        z
    }
}

/// Incremental extraction of the driving function of a curve (a lazy
/// zipper: each new point is pushed through all slits found so far).
#[derive(Clone, Debug)]
pub struct DrivingExtractor {
    dt_max: f64,
    steps: Vec<SlitStep>,
    capacity: f64,
    last: Complex64,
    pushed: usize,
}

impl DrivingExtractor {
    pub fn new(dt_max: f64) -> Result<Self, LoewnerError> {
        if !(dt_max > 0.0) {
            return Err(LoewnerError::InvalidParameter("dt_max must be positive".into()));
        }
        Ok(Self { dt_max, steps: Vec::new(), capacity: 0.0, last: Complex64::new(0.0, 0.0), pushed: 0 })
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn steps(&self) -> &[SlitStep] {
        &self.steps
    }

    fn image(&self, z: Complex64) -> Complex64 {
        let mut g = z;
        for s in &self.steps {
            g = slit_map(g, s.w, 4.0 * s.dt);
        }
        g
    }

    /// Appends the next curve point. Segments whose image would add more
    /// than `dt_max` of capacity are bisected first.
    pub fn push(&mut self, z: Complex64) -> Result<(), LoewnerError> {
        let index = self.pushed;
        self.pushed += 1;
        let mut pending = vec![z];
        while let Some(&target) = pending.last() {
            let g = self.image(target);
            let seg = (target - self.last).norm();
            if g.im * g.im / 4.0 > self.dt_max && seg > 1e-9 {
                pending.push((self.last + target) * 0.5);
                continue;
            }
            // Points deep inside narrow fjords of the curve legitimately have
            // images within rounding of the real line; only a vanishing image
            // means the curve revisits itself.
            if !(g.im > 0.0) {
                return Err(LoewnerError::CollapsedImage { index, im: g.im });
            }
            let dt = g.im * g.im / 4.0;
            self.steps.push(SlitStep { w: g.re, dt });
            self.capacity += dt;
            self.last = target;
            pending.pop();
        }
        Ok(())
    }

    pub fn driving(&self) -> DrivingFunction {
        DrivingFunction::from_steps(&self.steps)
    }
}

/// Driving function of a curve with bisection so that each step adds at most
/// `dt_max` capacity.
pub fn extract_driving(c: &HCurve, dt_max: f64) -> Result<DrivingFunction, LoewnerError> {
    let mut ex = DrivingExtractor::new(dt_max)?;
    for &z in &c.points[1..] {
        ex.push(z)?;
    }
    Ok(ex.driving())
}

fn check_sle_params(kappa: f64, dt: f64, horizon: f64) -> Result<usize, LoewnerError> {
    if !(kappa >= 0.0) || !(dt > 0.0) || !(horizon >= dt) {
        return Err(LoewnerError::InvalidParameter(format!("kappa {kappa}, dt {dt}, T {horizon}")));
    }
    Ok((horizon / dt).round() as usize)
}

/// `W = √κ · B` sampled every `dt` up to `horizon`, with Gaussian increments
/// drawn from `rng`.
pub fn sle_driving_with<R: Rng + ?Sized>(
    kappa: f64,
    dt: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<DrivingFunction, LoewnerError> {
    let n = check_sle_params(kappa, dt, horizon)?;
    let sd = (kappa * dt).sqrt();
    let mut t = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    t.push(0.0);
    w.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        let z: f64 = rng.sample(StandardNormal);
        acc += sd * z;
        t.push(k as f64 * dt);
        w.push(acc);
    }
    Ok(DrivingFunction { t, w })
}

/// Trace points `γ(t[k])` of a driving function: the tip of slit `k` pulled
/// back through slits `k−1, …, 1`. Quadratic in the number of steps.
pub fn trace_points(d: &DrivingFunction) -> Vec<Complex64> {
    let steps: Vec<SlitStep> = d.steps().collect();
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(Complex64::new(0.0, 0.0));
    for k in 0..steps.len() {
        let s = steps[k];
        let mut z = Complex64::new(s.w, 2.0 * s.dt.sqrt());
        for j in (0..k).rev() {
            z = slit_inverse(z, steps[j]);
        }
        out.push(z);
    }
    out
}

/// A chordal SLE(κ) sample: its driving function and trace.
pub fn sle_path(kappa: f64, dt: f64, horizon: f64, seed: u64) -> Result<(DrivingFunction, HCurve), LoewnerError> {
    let d = sle_driving_with(kappa, dt, horizon, &mut sample_stream(seed, 0))?;
    let pts = trace_points(&d);
    Ok((d, HCurve { points: pts }))
}

/// `g_t(z)`, composing the slits up to capacity `t` (the last one partially).
pub fn evaluate_map(d: &DrivingFunction, t: f64, z: Complex64) -> Result<Complex64, LoewnerError> {
    if t > d.horizon() * (1.0 + 1e-12) {
        return Err(LoewnerError::BeyondHorizon { t, horizon: d.horizon() });
    }
    let genuine = z.im >= SWALLOW_TOL;
    let mut g = lift(z);
    for (k, s) in d.steps().enumerate() {
        let start = d.t[k];
        if start >= t {
            break;
        }
        let dt = s.dt.min(t - start);
        g = slit_map(g, s.w, 4.0 * dt);
        if genuine && g.im < SWALLOW_TOL {
            return Err(LoewnerError::Swallowed { step: k + 1 });
        }
    }
    Ok(g)
}

/// `1 − arg(g_t(z) − W(t))/π`, the probability-like observable that is 1 on
/// the positive axis and 0 on the negative axis.
pub fn angle_observable(d: &DrivingFunction, t: f64, z: Complex64) -> Result<f64, LoewnerError> {
    let g = evaluate_map(d, t, z)?;
    let x = g - d.value_at(t);
    Ok(1.0 - x.im.max(0.0).atan2(x.re) / std::f64::consts::PI)
}

/// Integrates `∂ₜg = 2/(g − W(t))` with adaptive fourth-order Runge–Kutta
/// (step doubling). Independent of the slit composition; meant as a
/// cross-check.
pub fn evaluate_map_ode(d: &DrivingFunction, t: f64, z: Complex64, tol: f64) -> Result<Complex64, LoewnerError> {
    if t > d.horizon() * (1.0 + 1e-12) {
        return Err(LoewnerError::BeyondHorizon { t, horizon: d.horizon() });
    }
    let rk4 = |g: Complex64, w: f64, h: f64| {
        let f = |g: Complex64| 2.0 / (g - w);
        let k1 = f(g);
        let k2 = f(g + k1 * (h / 2.0));
        let k3 = f(g + k2 * (h / 2.0));
        let k4 = f(g + k3 * h);
        g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    };
    let mut g = lift(z);
    for (k, s) in d.steps().enumerate() {
        let start = d.t[k];
        if start >= t {
            break;
        }
        let end = (start + s.dt).min(t);
        let mut now = start;
        let mut h = (end - now).min(0.01 * (g - s.w).norm_sqr());
        while now < end {
            h = h.min(end - now);
            let full = rk4(g, s.w, h);
            let half = rk4(rk4(g, s.w, h / 2.0), s.w, h / 2.0);
            let err = (full - half).norm();
            if err <= tol * h.max(1e-300) / (end - start).max(1e-300) || h < 1e-15 {
                g = half + (half - full) / 15.0;
                now += h;
                if g.im < SWALLOW_TOL {
                    return Err(LoewnerError::Swallowed { step: k + 1 });
                }
                h *= 1.5;
            } else {
                h *= 0.5;
            }
        }
    }
    Ok(g)
}

/// A point of the closed half-plane or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtPoint {
    Finite(Complex64),
    Infinity,
}

impl From<Complex64> for ExtPoint {
    fn from(z: Complex64) -> Self {
        Self::Finite(z)
    }
}

/// `Ψ(z) = (z − i)/(z + i)`, with `Ψ(∞) = 1`.
pub fn psi(z: ExtPoint) -> Complex64 {
    match z {
        ExtPoint::Finite(z) => (z - Complex64::i()) / (z + Complex64::i()),
        ExtPoint::Infinity => Complex64::new(1.0, 0.0),
    }
}

/// `d*(z, w) = |Ψ(z) − Ψ(w)|`.
pub fn dstar(z: ExtPoint, w: ExtPoint) -> f64 {
    (psi(z) - psi(w)).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Metric {
    Euclidean,
    DStar,
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64], metric: Metric) -> Result<f64, LoewnerError> {
    if a.is_empty() || b.is_empty() {
        return Err(LoewnerError::EmptySet);
    }
    let (pa, pb): (Vec<Complex64>, Vec<Complex64>) = match metric {
        Metric::Euclidean => (a.to_vec(), b.to_vec()),
        Metric::DStar => (
            a.iter().map(|&z| psi(z.into())).collect(),
            b.iter().map(|&z| psi(z.into())).collect(),
        ),
    };
    let one_sided = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(&pa, &pb).max(one_sided(&pb, &pa)))
}

/// The zigzag curve through `a₁, b₁+ε, a₂, b₂−ε, a₃, b₃+ε, …` with
/// `a_j = iε(1 − 1/j)` and `b_j = ijε`, for `j ≤ count`. Its driving function
/// tends to 0 with `ε` although the curve cannot be parameterised to converge
/// uniformly to the vertical ray.
pub fn zigzag_fixture(eps: f64, count: usize) -> HCurve {
    let mut pts = Vec::with_capacity(2 * count);
    for j in 1..=count {
        let jf = j as f64;
        pts.push(Complex64::new(0.0, eps * (1.0 - 1.0 / jf)));
        let side = if j % 2 == 1 { eps } else { -eps };
        pts.push(Complex64::new(side, jf * eps));
    }
    HCurve { points: pts }
}

/// Writes a trace CSV with header `t,x,y`.
pub fn write_trace_csv<W: Write>(times: &[f64], points: &[Complex64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,x,y")?;
    for (t, z) in times.iter().zip(points) {
        writeln!(out, "{t},{},{}", z.re, z.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tip_maps_to_base() {
        let g = slit_forward(c(0.0, 1.0), SlitStep { w: 0.0, dt: 0.25 }).unwrap();
        assert!(g.norm() < 1e-12);
    }

    #[test]
    fn hydrodynamic_normalisation() {
        let s = SlitStep { w: 0.3, dt: 0.7 };
        for arg in [0.1f64, 1.0, 2.0, 3.0] {
            let z = Complex64::from_polar(1e6, arg);
            let g = slit_forward(z, s).unwrap();
            assert!((g - z - 2.0 * s.dt / z).norm() <= 1e-8 * s.dt);
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let s = SlitStep { w: -0.4, dt: 0.3 };
        for z in [c(0.1, 0.2), c(-3.0, 0.01), c(2.0, 5.0), c(-0.4, 2.0)] {
            let back = slit_inverse(slit_forward(z, s).unwrap(), s);
            assert!((back - z).norm() < 1e-12, "{z} -> {back}");
        }
        assert!(slit_forward(c(-0.4, 0.0), s).is_err());
    }

    #[test]
    fn real_points_keep_their_side() {
        let s = SlitStep { w: 0.0, dt: 1.0 };
        assert!(slit_forward(c(0.5, 0.0), s).unwrap().re > 2.0);
        assert!(slit_forward(c(-0.5, 0.0), s).unwrap().re < -2.0);
    }

    #[test]
    fn vertical_segment_extraction() {
        let pts: Vec<Complex64> = (0..100).map(|k| c(0.0, k as f64 / 99.0)).collect();
        let d = extract_driving(&HCurve::new(pts).unwrap(), DEFAULT_DT_MAX).unwrap();
        assert!(d.values().iter().all(|w| w.abs() < 1e-6));
        assert_abs_diff_eq!(d.horizon(), 0.25, epsilon = 1e-4);
    }

    #[test]
    fn zero_driving_traces_vertical_segment() {
        let (d, curve) = sle_path(0.0, 0.01, 1.0, 1).unwrap();
        for (t, z) in d.times().iter().zip(curve.points()) {
            assert!(z.re.abs() < 1e-12);
            assert!((z.im - 2.0 * t.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn round_trip_recovers_driving() {
        let (d, curve) = sle_path(4.0, 1e-3, 0.2, 9).unwrap();
        let back = extract_driving(&curve, 1.0).unwrap();
        assert_eq!(back.len(), d.len());
        for (a, b) in back.values().iter().zip(d.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn map_at_time_zero_is_identity_and_capacity_expansion_holds() {
        let (d, _) = sle_path(4.0, 1e-3, 1.0, 2).unwrap();
        let z = c(0.3, 0.8);
        assert_eq!(evaluate_map(&d, 0.0, z).unwrap(), z);
        let far = Complex64::from_polar(1e4, 1.0);
        for t in [0.25, 0.5, 1.0] {
            let g = evaluate_map(&d, t, far).unwrap();
            assert!((g - far - 2.0 * t / far).norm() <= 1e-6);
        }
    }

    #[test]
    fn ode_oracle_agrees_with_composition() {
        let (d, _) = sle_path(4.0, 1e-2, 0.5, 3).unwrap();
        for z in [c(0.5, 1.0), c(-1.0, 0.3), c(0.0, 2.0)] {
            let a = evaluate_map(&d, 0.5, z).unwrap();
            let b = evaluate_map_ode(&d, 0.5, z, 1e-12).unwrap();
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn angle_observable_basics() {
        let d = DrivingFunction::from_steps(&[SlitStep { w: 0.0, dt: 0.1 }]);
        assert_abs_diff_eq!(angle_observable(&d, 0.0, c(0.0, 1.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert!(angle_observable(&d, 0.0, c(1.0, 1e-9)).unwrap() > 0.999);
        let l = angle_observable(&d, 0.0, c(-1.0, 1.0)).unwrap();
        let r = angle_observable(&d, 0.0, c(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(l + r, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn swallowed_point_is_reported() {
        let d = DrivingFunction::from_steps(&[SlitStep { w: 0.0, dt: 1.0 }]);
        assert!(matches!(evaluate_map(&d, 1.0, c(0.0, 1.0)), Err(LoewnerError::Swallowed { .. })));
    }

    #[test]
    fn dstar_and_hausdorff() {
        let zero = ExtPoint::Finite(c(0.0, 0.0));
        assert_abs_diff_eq!(dstar(zero, ExtPoint::Infinity), 2.0);
        assert_abs_diff_eq!(dstar(ExtPoint::Finite(c(0.0, 1.0)), ExtPoint::Infinity), 1.0);
        assert_eq!(dstar(zero, zero), 0.0);
        assert_eq!(hausdorff(&[c(0.0, 0.0)], &[c(3.0, 0.0)], Metric::Euclidean).unwrap(), 3.0);
        assert_eq!(hausdorff(&[c(0.0, 0.0), c(0.0, 4.0)], &[c(0.0, 0.0)], Metric::Euclidean).unwrap(), 4.0);
        assert!(hausdorff(&[], &[c(0.0, 0.0)], Metric::DStar).is_err());
    }

    #[test]
    fn driving_value_and_truncation() {
        let d = DrivingFunction::from_steps(&[SlitStep { w: 1.0, dt: 0.5 }, SlitStep { w: 2.0, dt: 0.5 }]);
        assert_eq!(d.value_at(0.0), 0.0);
        assert_eq!(d.value_at(0.3), 1.0);
        assert_eq!(d.value_at(0.5), 1.0);
        assert_eq!(d.value_at(0.7), 2.0);
        let t = d.truncated(0.7);
        assert_eq!(t.times(), &[0.0, 0.5, 0.7]);
        assert_eq!(t.values(), &[0.0, 1.0, 2.0]);
    }
}
