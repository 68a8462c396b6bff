//! Fixed-step RK4 integration of `ẋ = x ∗ A(x − q)` with Lyapunov,
//! conservation and affine-set monitors.
//!
//! Attractor checks here are empirical probes on a finite trajectory.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::foliation::Foliation;
use crate::matrix::Matrix;
use crate::model::LvSystem;
use crate::scalar::Scalar;
use crate::{Certificate, Rational};

/// `x ∗ A(x − q)`, in any scalar type.
pub fn field<T: Scalar>(a: &Matrix<T>, q: &[T], x: &[T]) -> Result<Vec<T>> {
    if x.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_positive()) {
        return Err(Error::NonPositivePoint(i + 1));
    }
    let d: Vec<T> = x.iter().zip(q).map(|(xi, qi)| xi.clone() - qi.clone()).collect();
    Ok(a.mul_vec(&d)
        .into_iter()
        .zip(x)
        .map(|(ad, xi)| ad * xi.clone())
        .collect())
}

pub fn vector_field(system: &LvSystem, x: &[f64]) -> Result<Vec<f64>> {
    FloatSystem::new(system).field_checked(x)
}

/// Exact evaluation over the rationals.
pub fn vector_field_exact(system: &LvSystem, x: &[Rational]) -> Result<Vec<Rational>> {
    field(system.matrix(), system.equilibrium(), x)
}

/// Binary64 copy of a system, converted once.
#[derive(Clone, Debug)]
pub struct FloatSystem {
    a: Vec<f64>,
    q: Vec<f64>,
    n: usize,
}

impl FloatSystem {
    pub fn new(system: &LvSystem) -> Self {
        let a = system.matrix().to_f64();
        FloatSystem {
            n: a.n(),
            a: a.iter().copied().collect(),
            q: system.equilibrium().iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    fn field_checked(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|&v| v <= 0.0 || v.is_nan()) {
            return Err(Error::NonPositivePoint(i + 1));
        }
        let mut out = vec![0.0; self.n];
        self.field_into(x, &mut out);
        Ok(out)
    }

    /// `A(x − q)`.
    fn drive(&self, x: &[f64], i: usize) -> f64 {
        let row = &self.a[i * self.n..(i + 1) * self.n];
        row.iter()
            .zip(x.iter().zip(&self.q))
            .map(|(a, (x, q))| a * (x - q))
            .sum()
    }

    fn field_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = x[i] * self.drive(x, i);
        }
    }

    /// `h(x) = Σ c_i (x_i − q_i log x_i)`.
    pub fn lyapunov_h(&self, c: &[f64], x: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| c[i] * (x[i] - self.q[i] * x[i].ln()))
            .sum()
    }

    /// `ḣ(x) = (x − q)ᵀ diag(c) A (x − q)`.
    pub fn lyapunov_hdot(&self, c: &[f64], x: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| c[i] * (x[i] - self.q[i]) * self.drive(x, i))
            .sum()
    }

    fn rk4(&self, x: &[f64], h: f64) -> Vec<f64> {
        let n = self.n;
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut y = vec![0.0; n];
        self.field_into(x, &mut k1);
        for i in 0..n {
            y[i] = x[i] + 0.5 * h * k1[i];
        }
        self.field_into(&y, &mut k2);
        for i in 0..n {
            y[i] = x[i] + 0.5 * h * k2[i];
        }
        self.field_into(&y, &mut k3);
        for i in 0..n {
            y[i] = x[i] + h * k3[i];
        }
        self.field_into(&y, &mut k4);
        (0..n)
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    /// One advance of length `h`, split into halves while a stage leaves
    /// the positive orthant.
    fn advance(&self, x: &[f64], h: f64, t: f64, depth: u32) -> Result<Vec<f64>> {
        let y = self.rk4(x, h);
        if y.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Ok(y);
        }
        if depth >= MAX_HALVINGS {
            return Err(Error::StepUnderflow {
                t,
                halvings: MAX_HALVINGS,
            });
        }
        let mid = self.advance(x, h / 2.0, t, depth + 1)?;
        self.advance(&mid, h / 2.0, t + h / 2.0, depth + 1)
    }
}

pub const MAX_HALVINGS: u32 = 40;

pub fn lyapunov_h(system: &LvSystem, c: &Certificate, x: &[f64]) -> Result<f64> {
    let fs = FloatSystem::new(system);
    check_point(&fs, c, x)?;
    Ok(fs.lyapunov_h(&c.as_f64(), x))
}

pub fn lyapunov_hdot(system: &LvSystem, c: &Certificate, x: &[f64]) -> Result<f64> {
    let fs = FloatSystem::new(system);
    check_point(&fs, c, x)?;
    Ok(fs.lyapunov_hdot(&c.as_f64(), x))
}

fn check_point(fs: &FloatSystem, c: &Certificate, x: &[f64]) -> Result<()> {
    if c.len() != fs.n {
        return Err(Error::InvalidCertificate { expected: fs.n });
    }
    fs.field_checked(x).map(|_| ())
}

/// Linear equalities `Σ_j coeffs_j x_j = rhs`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineSet {
    pub equations: Vec<(Vec<f64>, f64)>,
}

impl AffineSet {
    pub fn new(equations: Vec<(Vec<f64>, f64)>) -> Self {
        AffineSet { equations }
    }

    /// Parses comma-separated equations such as `x1=x4,x7=1,2*x2-x3=0.5`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut equations = Vec::new();
        for eq in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (lhs, rhs) = eq
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("equation {eq:?} has no '='")))?;
            let mut coeffs = vec![0.0; n];
            let mut constant = 0.0;
            parse_side(lhs, 1.0, n, &mut coeffs, &mut constant)?;
            parse_side(rhs, -1.0, n, &mut coeffs, &mut constant)?;
            equations.push((coeffs, -constant));
        }
        Ok(AffineSet { equations })
    }

    /// Max-norm residual at `x`; zero for an empty set.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.equations
            .iter()
            .map(|(c, r)| (c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - r).abs())
            .fold(0.0, f64::max)
    }
}

fn parse_side(side: &str, sign: f64, n: usize, coeffs: &mut [f64], constant: &mut f64) -> Result<()> {
    let bad = || Error::Parse(format!("cannot parse linear expression {side:?}"));
    let compact: String = side.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad());
    }
    let mut terms = Vec::new();
    let mut start = 0;
    for (k, ch) in compact.char_indices() {
        let after_exp = k > 0 && matches!(compact.as_bytes()[k - 1], b'e' | b'E');
        if (ch == '+' || ch == '-') && k > start && !after_exp {
            terms.push(&compact[start..k]);
            start = k;
        }
    }
    terms.push(&compact[start..]);
    for term in terms {
        let (s, body) = match term.strip_prefix('-') {
            Some(rest) => (-sign, rest),
            None => (sign, term.strip_prefix('+').unwrap_or(term)),
        };
        let (coef, var) = match body.split_once('*') {
            Some((c, v)) => (c.parse::<f64>().map_err(|_| bad())?, Some(v)),
            None if body.starts_with('x') => (1.0, Some(body)),
            None => (body.parse::<f64>().map_err(|_| bad())?, None),
        };
        match var {
            Some(v) => {
                let idx: usize = v
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(bad)?;
                if idx == 0 || idx > n {
                    return Err(Error::VertexOutOfRange(idx));
                }
                coeffs[idx - 1] += s * coef;
            }
            None => *constant += s * coef,
        }
    }
    Ok(())
}

/// What to record besides the state.
#[derive(Clone, Debug, Default)]
pub struct Monitors {
    /// Weights of `h`; all ones when absent.
    pub certificate: Option<Certificate>,
    pub plane: Option<AffineSet>,
    /// Keep every k-th accepted step (the final state is always kept).
    pub record_every: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub hdot: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
    pub dist: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial sample")
    }

    /// `max_t |L(t) − L(0)| / max(1, |L(0)|)` over all conserved levels.
    pub fn max_relative_level_drift(&self) -> f64 {
        let Some(first) = self.levels.first() else {
            return 0.0;
        };
        self.levels
            .iter()
            .flat_map(|l| {
                l.iter()
                    .zip(first)
                    .map(|(v, v0)| (v - v0).abs() / v0.abs().max(1.0))
            })
            .fold(0.0, f64::max)
    }

    /// Samples of the final `fraction` of the trajectory (at least one).
    pub fn tail_start(&self, fraction: f64) -> usize {
        let len = self.len();
        let keep = ((len as f64 * fraction).ceil() as usize).clamp(1, len.max(1));
        len - keep
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let k = self.levels.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.push("h".into());
        header.push("hdot".into());
        header.extend((1..=k).map(|i| format!("level{i}")));
        header.push("dist".into());
        writeln!(out, "{}", header.join(","))?;
        for s in 0..self.len() {
            let mut row = vec![fmt17(self.times[s])];
            row.extend(self.states[s].iter().map(|v| fmt17(*v)));
            row.push(fmt17(self.h[s]));
            row.push(fmt17(self.hdot[s]));
            row.extend(self.levels[s].iter().map(|v| fmt17(*v)));
            row.push(fmt17(self.dist[s]));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Integrates from `x0` to `t_final` with `round(t_final / step)` RK4 steps.
pub fn integrate(
    system: &LvSystem,
    x0: &[f64],
    t_final: f64,
    step: f64,
    monitors: &Monitors,
) -> Result<Trajectory> {
    let fs = FloatSystem::new(system);
    if x0.len() != fs.n {
        return Err(Error::DimensionMismatch {
            expected: fs.n,
            found: x0.len(),
        });
    }
    if let Some(i) = x0.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveStart(i + 1));
    }
    if !(step > 0.0 && step.is_finite()) || !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidStep);
    }
    let c = match &monitors.certificate {
        Some(c) if c.len() != fs.n => return Err(Error::InvalidCertificate { expected: fs.n }),
        Some(c) => c.as_f64(),
        None => vec![1.0; fs.n],
    };
    let foliation = Foliation::new(system.matrix());
    let every = monitors.record_every.max(1);
    let steps = (t_final / step).round() as usize;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        h: Vec::new(),
        hdot: Vec::new(),
        levels: Vec::new(),
        dist: Vec::new(),
    };
    let mut record = |t: f64, x: &[f64]| -> Result<()> {
        traj.times.push(t);
        traj.h.push(fs.lyapunov_h(&c, x));
        traj.hdot.push(fs.lyapunov_hdot(&c, x));
        traj.levels.push(foliation.levels(x)?.levels);
        traj.dist
            .push(monitors.plane.as_ref().map_or(0.0, |p| p.residual(x)));
        traj.states.push(x.to_vec());
        Ok(())
    };
    let mut x = x0.to_vec();
    record(0.0, &x)?;
    for k in 1..=steps {
        let t = (k - 1) as f64 * step;
        x = fs.advance(&x, step, t, 0)?;
        if k % every == 0 || k == steps {
            record(k as f64 * step, &x)?;
        }
    }
    Ok(traj)
}

/// Runs [`integrate`] for several starts on up to `jobs` threads; results
/// come back in input order.
pub fn integrate_many(
    system: &LvSystem,
    starts: &[Vec<f64>],
    t_final: f64,
    step: f64,
    monitors: &Monitors,
    jobs: usize,
) -> Vec<Result<Trajectory>> {
    let jobs = jobs.clamp(1, starts.len().max(1));
    let chunk = starts.len().div_ceil(jobs).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|x0| integrate(system, x0, t_final, step, monitors))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("integration thread panicked"))
            .collect()
    })
}

/// Whether `|x_i − q_i| < tolerance` over the final 10% of samples.
pub fn check_strongly_dissipative(
    system: &LvSystem,
    trajectory: &Trajectory,
    i: usize,
    tolerance: f64,
) -> bool {
    let qi = system.equilibrium()[i].to_f64();
    trajectory.states[trajectory.tail_start(0.1)..]
        .iter()
        .all(|x| (x[i] - qi).abs() < tolerance)
}

pub fn distance_to_attractor_plane(trajectory: &Trajectory, constraints: &AffineSet) -> Vec<f64> {
    trajectory
        .states
        .iter()
        .map(|x| constraints.residual(x))
        .collect()
}

/// Largest spread `max − min` of any coordinate over the final `fraction`.
pub fn tail_oscillation(trajectory: &Trajectory, fraction: f64) -> f64 {
    let tail = &trajectory.states[trajectory.tail_start(fraction)..];
    let n = tail.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x[i]), hi.max(x[i]))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Splits `series[from..]` into `windows` consecutive blocks and checks that
/// the block maxima never increase by more than `slack`.
pub fn windowed_non_increasing(series: &[f64], from: usize, windows: usize, slack: f64) -> bool {
    let tail = &series[from.min(series.len())..];
    if tail.is_empty() || windows == 0 {
        return true;
    }
    let size = tail.len().div_ceil(windows);
    let maxima: Vec<f64> = tail
        .chunks(size)
        .map(|w| w.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    maxima.windows(2).all(|p| p[1] <= p[0] + slack)
}
