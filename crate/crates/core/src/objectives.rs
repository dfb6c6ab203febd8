//! Lipschitz test objectives with certified constants, and the bump
//! construction that hides a higher maximum inside a ball.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};
use core::fmt;

use crate::error::{invalid, Result};
use crate::math;
use crate::space::{dist_unchecked, Point, ProbeLattice, SearchBox};

/// Ackley parameters `(a, b, c)`.
pub const ACKLEY_A: f64 = 20.0;
pub const ACKLEY_B: f64 = 0.2;
pub const ACKLEY_C: f64 = 2.0 * PI;

/// Safety factor applied to the largest gradient norm seen on the probe grid.
pub const LIPSCHITZ_SAFETY: f64 = 1.5;

/// Upper bound on probe points used by numeric certification.
const CERTIFY_BUDGET: f64 = 131_072.0;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
enum Form {
    ReverseAckley,
    Sphere { center: Point },
    Peak { peak: Point },
    Bump(Arc<Bump>),
    Custom(Arc<EvalFn>),
}

struct Bump {
    base: Objective,
    center: Point,
    radius: f64,
    height: f64,
}

/// How tall the bump is: `factor · (fmax − fmin + offset)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpCoefficients {
    pub factor: f64,
    pub offset: f64,
}

impl Default for BumpCoefficients {
    fn default() -> Self {
        Self {
            factor: 2.0,
            offset: 1.0,
        }
    }
}

impl BumpCoefficients {
    /// The earlier variant: factor 3 and no offset. With a constant base it
    /// produces no bump at all.
    pub fn factor_three() -> Self {
        Self {
            factor: 3.0,
            offset: 0.0,
        }
    }
}

/// A function on a box with a certified Lipschitz constant.
#[derive(Clone)]
pub struct Objective {
    name: String,
    domain: SearchBox,
    form: Form,
    lipschitz: f64,
    known_max: Option<f64>,
    known_argmax: Option<Point>,
    known_min: Option<f64>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("lipschitz", &self.lipschitz)
            .field("known_max", &self.known_max)
            .field("known_argmax", &self.known_argmax)
            .field("known_min", &self.known_min)
            .finish()
    }
}

impl Objective {
    /// Wraps an arbitrary function. `lipschitz` must be a valid upper bound.
    pub fn from_fn<F>(
        name: impl Into<String>,
        domain: SearchBox,
        lipschitz: f64,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(invalid("Lipschitz constant must be positive and finite"));
        }
        Ok(Self {
            name: name.into(),
            domain,
            form: Form::Custom(Arc::new(f)),
            lipschitz,
            known_max: None,
            known_argmax: None,
            known_min: None,
        })
    }

    /// Records a known maximizer; the maximum is its value.
    pub fn with_argmax(mut self, argmax: Point) -> Result<Self> {
        self.domain.check_point(&argmax)?;
        self.known_max = Some(self.eval(&argmax));
        self.known_argmax = Some(argmax);
        Ok(self)
    }

    pub fn with_min(mut self, min: f64) -> Self {
        self.known_min = Some(min);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &SearchBox {
        &self.domain
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn known_max(&self) -> Option<f64> {
        self.known_max
    }

    pub fn known_argmax(&self) -> Option<&Point> {
        self.known_argmax.as_ref()
    }

    pub fn known_min(&self) -> Option<f64> {
        self.known_min
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.form {
            Form::ReverseAckley => -ackley(x),
            Form::Sphere { center } => -crate::space::dist_sq(x, center),
            Form::Peak { peak } => -dist_unchecked(x, peak),
            Form::Bump(b) => {
                let base = b.base.eval(x);
                let d = dist_unchecked(&b.center, x);
                if d < b.radius {
                    base + (1.0 - d / b.radius) * b.height
                } else {
                    base
                }
            }
            Form::Custom(f) => f(x),
        }
    }

    /// Center and radius of the bump, for objectives built by [`f_tilde`].
    pub fn bump_ball(&self) -> Option<(&Point, f64)> {
        match &self.form {
            Form::Bump(b) => Some((&b.center, b.radius)),
            _ => None,
        }
    }

    /// The objective a bump was added to.
    pub fn bump_base(&self) -> Option<&Objective> {
        match &self.form {
            Form::Bump(b) => Some(&b.base),
            _ => None,
        }
    }

    /// Height of the bump at its center.
    pub fn bump_height(&self) -> Option<f64> {
        match &self.form {
            Form::Bump(b) => Some(b.height),
            _ => None,
        }
    }

    /// Lower and upper bounds on `(min f, max f)`: exact when known, otherwise
    /// probe-grid extremes widened by `L · h·√d / 2`, where `h` is the
    /// largest lattice cell side at the given spacing.
    pub fn range_bounds(&self, spacing: f64) -> Result<(f64, f64)> {
        if let (Some(lo), Some(hi)) = (self.known_min, self.known_max) {
            return Ok((lo, hi));
        }
        let lattice = ProbeLattice::new(&self.domain, spacing)?;
        let err = self.lipschitz * lattice.max_step() * math::sqrt(self.domain.dim() as f64) / 2.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        lattice.scan(|p| {
            let v = self.eval(p);
            lo = lo.min(v);
            hi = hi.max(v);
            true
        });
        Ok((
            self.known_min.unwrap_or(lo - err),
            self.known_max.unwrap_or(hi + err),
        ))
    }
}

/// Standard Ackley function, minimum 0 at the origin.
pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let cs: f64 = x.iter().map(|v| math::cos(ACKLEY_C * v)).sum();
    -ACKLEY_A * math::exp(-ACKLEY_B * math::sqrt(sq / d)) - math::exp(cs / d) + ACKLEY_A + E
}

/// Euclidean norm of the Ackley gradient. At the origin the radial part is
/// not differentiable; its one-sided slope `a·b/√d` is used.
pub fn ackley_gradient_norm(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let rho = math::sqrt(sq / d);
    let cs: f64 = x.iter().map(|v| math::cos(ACKLEY_C * v)).sum();
    let radial = ACKLEY_A * ACKLEY_B * math::exp(-ACKLEY_B * rho);
    let wave = math::exp(cs / d) * ACKLEY_C / d;
    if rho == 0.0 {
        return radial / math::sqrt(d);
    }
    let mut acc = 0.0;
    for v in x {
        let g = radial * v / (d * rho) + wave * math::sin(ACKLEY_C * v);
        acc += g * g;
    }
    math::sqrt(acc)
}

/// Largest value of `grad_norm` on a probe lattice of about 2^17 points,
/// times [`LIPSCHITZ_SAFETY`].
pub fn certify_lipschitz(b: &SearchBox, grad_norm: impl Fn(&[f64]) -> f64) -> f64 {
    let d = b.dim() as f64;
    let per_axis = libm::floor(math::powf(CERTIFY_BUDGET, 1.0 / d)).max(2.0);
    let widest = (0..b.dim()).map(|k| b.side(k)).fold(0.0, f64::max);
    let lattice = ProbeLattice::new(b, widest / per_axis).expect("positive spacing");
    let mut worst: f64 = 0.0;
    lattice.scan(|p| {
        worst = worst.max(grad_norm(p));
        true
    });
    worst * LIPSCHITZ_SAFETY
}

/// `−Ackley`, to be maximized. Its maximum 0 sits at the origin.
pub fn reverse_ackley(b: &SearchBox) -> Objective {
    let lipschitz = certify_lipschitz(b, ackley_gradient_norm);
    let origin = Point::from_vec(alloc::vec![0.0; b.dim()]);
    let (known_max, known_argmax) = if b.contains(&origin) {
        (Some(0.0), Some(origin))
    } else {
        (None, None)
    };
    Objective {
        name: String::from("reverse_ackley"),
        domain: b.clone(),
        form: Form::ReverseAckley,
        lipschitz,
        known_max,
        known_argmax,
        known_min: None,
    }
}

/// `−‖x − center‖²` with the box center; `L = 2·diam`.
pub fn sphere_max(b: &SearchBox) -> Objective {
    let center = b.center();
    let diam = b.diameter();
    Objective {
        name: String::from("sphere"),
        domain: b.clone(),
        form: Form::Sphere {
            center: center.clone(),
        },
        lipschitz: 2.0 * diam,
        known_max: Some(0.0),
        known_argmax: Some(center),
        known_min: Some(-(diam / 2.0) * (diam / 2.0)),
    }
}

/// `−dist(x, peak)`; `L = 1`.
pub fn piecewise_peak(b: &SearchBox, peak: Point) -> Result<Objective> {
    b.check_point(&peak)?;
    let (_, far) = b.farthest_corner(&peak);
    Ok(Objective {
        name: String::from("piecewise_peak"),
        domain: b.clone(),
        form: Form::Peak { peak: peak.clone() },
        lipschitz: 1.0,
        known_max: Some(0.0),
        known_argmax: Some(peak),
        known_min: Some(-far),
    })
}

/// `f̃ = f + factor·(1 − dist(c, x)/(ε₁/2))·(fmax − fmin + offset)` inside
/// the open ball `B(c, ε₁/2)`, and exactly `f` outside it.
///
/// When the base range is not known it is bracketed on a probe grid of
/// spacing `ε₁/16`, widened by the grid error so the bump never comes out
/// lower than with the exact range.
pub fn f_tilde(
    base: &Objective,
    c: Point,
    eps1: f64,
    coeffs: BumpCoefficients,
) -> Result<Objective> {
    if !(eps1 > 0.0) || !eps1.is_finite() {
        return Err(invalid("eps1 must be positive and finite"));
    }
    base.domain.check_point(&c)?;
    let radius = eps1 / 2.0;
    let (fmin, fmax) = base.range_bounds(eps1 / 16.0)?;
    let height = coeffs.factor * (fmax - fmin + coeffs.offset);
    let slope = height / radius;
    let lipschitz = base.lipschitz + slope;
    let peak_value = base.eval(&c) + height;

    let mut out = Objective {
        name: format!("f_tilde({})", base.name),
        domain: base.domain.clone(),
        form: Form::Bump(Arc::new(Bump {
            base: base.clone(),
            center: c.clone(),
            radius,
            height,
        })),
        lipschitz,
        known_max: None,
        known_argmax: None,
        known_min: None,
    };
    if slope >= base.lipschitz && peak_value >= fmax {
        // The cone falls faster than the base can rise: the center wins
        // inside the ball, and it beats fmax outside.
        out.known_max = Some(peak_value);
        out.known_argmax = Some(c);
    } else {
        let (argmax, max) = grid_argmax(&out, radius / 16.0)?;
        out.known_max = Some(max);
        out.known_argmax = Some(argmax);
    }
    if let Some(min) = base.known_min {
        out.known_min = Some(min);
    }
    Ok(out)
}

fn grid_argmax(obj: &Objective, spacing: f64) -> Result<(Point, f64)> {
    let lattice = ProbeLattice::new(&obj.domain, spacing)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    lattice.scan(|p| {
        let v = obj.eval(p);
        if best.as_ref().map_or(true, |(_, b)| v > *b) {
            best = Some((p.to_vec(), v));
        }
        true
    });
    let (p, v) = best.expect("lattice is never empty");
    Ok((Point::from_vec(p), v))
}
