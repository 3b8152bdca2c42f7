//! One-dimensional smooth convex objectives with analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base shape of an objective before scaling and shifting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    /// `x^2 / (2 sigma)`.
    Quadratic { sigma: f64 },
    /// One-sided Huber: `a x^2 / 2` for `x <= r`, `a r x - a r^2 / 2` for `x > r`.
    Huber { a: f64, r: f64 },
}

/// `f(x) = scale * shape(x - shift)`, minimized at `x* = shift` with `f* = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub shift: f64,
}

fn one() -> f64 {
    1.0
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite and positive, got {v}"
        )))
    }
}

fn finite_point(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("point {x} is not finite")))
    }
}

#[inline]
fn huber_raw(a: f64, r: f64, x: f64) -> (f64, f64) {
    if x <= r {
        (a * x * x / 2.0, a * x)
    } else {
        (a * r * x - a * r * r / 2.0, a * r)
    }
}

#[inline]
fn quadratic_raw(sigma: f64, x: f64) -> (f64, f64) {
    (x * x / (2.0 * sigma), x / sigma)
}

impl Objective {
    pub fn quadratic(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Self {
            shape: Shape::Quadratic { sigma },
            scale: 1.0,
            shift: 0.0,
        })
    }

    pub fn huber(a: f64, r: f64) -> Result<Self> {
        positive("a", a)?;
        positive("r", r)?;
        Ok(Self {
            shape: Shape::Huber { a, r },
            scale: 1.0,
            shift: 0.0,
        })
    }

    /// Multiplies the function (and its smoothness constant) by `factor`.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        positive("scale", factor)?;
        Ok(Self {
            scale: self.scale * factor,
            ..self
        })
    }

    /// Moves the minimizer to `x_star`.
    pub fn shifted(self, x_star: f64) -> Result<Self> {
        finite_point(x_star)?;
        Ok(Self {
            shift: x_star,
            ..self
        })
    }

    /// Checks parameters of a deserialized objective.
    pub fn validate(&self) -> Result<()> {
        match self.shape {
            Shape::Quadratic { sigma } => positive("sigma", sigma)?,
            Shape::Huber { a, r } => {
                positive("a", a)?;
                positive("r", r)?;
            }
        }
        positive("scale", self.scale)?;
        finite_point(self.shift)
    }

    /// Value and derivative at `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let u = x - self.shift;
        let (f, g) = match self.shape {
            Shape::Quadratic { sigma } => quadratic_raw(sigma, u),
            Shape::Huber { a, r } => huber_raw(a, r, u),
        };
        (self.scale * f, self.scale * g)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    /// Lipschitz constant of the derivative.
    pub fn smoothness(&self) -> f64 {
        let base = match self.shape {
            Shape::Quadratic { sigma } => 1.0 / sigma,
            Shape::Huber { a, .. } => a,
        };
        self.scale * base
    }

    pub fn x_star(&self) -> f64 {
        self.shift
    }

    pub fn f_star(&self) -> f64 {
        0.0
    }

    /// Optimality gap `f(x) - f*`.
    pub fn gap(&self, x: f64) -> f64 {
        self.value(x) - self.f_star()
    }
}

/// Parameters of the scaled Huber witness together with its starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuberParams {
    /// Curvature in units of `L`.
    pub a: f64,
    /// Kink location.
    pub r: f64,
    pub x0: f64,
}

impl HuberParams {
    /// Witness parameters with `x0 = r + a r Σ_T`.
    pub fn new(a: f64, r: f64, sigma_t: f64) -> Result<Self> {
        positive("sigma_T", sigma_t)?;
        let params = Self {
            a,
            r,
            x0: r + a * r * sigma_t,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "huber curvature a = {} outside (0, 1]",
                self.a
            )));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "huber kink r = {} outside (0, 1)",
                self.r
            )));
        }
        if !(self.x0.is_finite() && self.x0 > self.r) {
            return Err(Error::InvalidArgument(format!(
                "huber start x0 = {} must exceed r = {}",
                self.x0, self.r
            )));
        }
        Ok(())
    }

    pub fn objective(&self) -> Objective {
        Objective {
            shape: Shape::Huber {
                a: self.a,
                r: self.r,
            },
            scale: 1.0,
            shift: 0.0,
        }
    }
}

/// Value and derivative of the witness Huber function at `x`.
pub fn huber_eval(params: &HuberParams, x: f64) -> Result<(f64, f64)> {
    params.validate()?;
    finite_point(x)?;
    Ok(huber_raw(params.a, params.r, x))
}

/// Value and derivative of `x^2 / (2 sigma)` at `x`.
pub fn quadratic_eval(sigma: f64, x: f64) -> Result<(f64, f64)> {
    positive("sigma", sigma)?;
    finite_point(x)?;
    Ok(quadratic_raw(sigma, x))
}

/// Largest observed slope ratio `|f'(x) - f'(y)| / |x - y|` over the grid.
///
/// The maximum over all pairs is attained by neighbours in sorted order, since
/// the secant slope of a wide interval averages those of its sub-intervals.
pub fn smoothness_probe(objective: &Objective, grid: &[f64]) -> Result<f64> {
    let mut points: Vec<f64> = grid.to_vec();
    if let Some(bad) = points.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid point {bad} is not finite"
        )));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "smoothness probe needs at least two distinct points".into(),
        ));
    }
    let slopes: Vec<f64> = points.iter().map(|&x| objective.derivative(x)).collect();
    Ok(points
        .windows(2)
        .zip(slopes.windows(2))
        .map(|(x, g)| (g[1] - g[0]).abs() / (x[1] - x[0]))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn witness(a: f64, r: f64) -> HuberParams {
        HuberParams { a, r, x0: r + 1.0 }
    }

    #[test]
    fn huber_examples() {
        let p = witness(1.0, 0.125);
        assert_eq!(huber_eval(&p, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(huber_eval(&p, 0.625).unwrap(), (0.0703125, 0.125));
        assert_eq!(huber_eval(&p, -1.125).unwrap(), (0.6328125, -1.125));
        assert!(huber_eval(&p, f64::NAN).is_err());
        assert!(huber_eval(&p, f64::INFINITY).is_err());
    }

    #[test]
    fn huber_branches_agree_at_kink() {
        for (a, r) in [(1.0, 0.125), (0.5, 0.3), (0.25, 0.9)] {
            let quad = (a * r * r / 2.0, a * r);
            let lin = (a * r * r - a * r * r / 2.0, a * r);
            assert_eq!(huber_raw(a, r, r), quad);
            assert_eq!(quad, lin);
        }
    }

    #[test]
    fn witness_params_validation() {
        assert!(HuberParams::new(1.0, 0.125, 4.0).is_ok());
        assert_eq!(HuberParams::new(1.0, 0.125, 4.0).unwrap().x0, 0.625);
        assert!(HuberParams::new(1.5, 0.125, 4.0).is_err());
        assert!(HuberParams::new(0.0, 0.125, 4.0).is_err());
        assert!(HuberParams::new(1.0, 1.0, 4.0).is_err());
        assert!(HuberParams::new(1.0, 0.125, 0.0).is_err());
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(quadratic_eval(4.0, 1.0).unwrap(), (0.125, 0.25));
        for sigma in [0.1, 1.0, 7.5] {
            assert_eq!(quadratic_eval(sigma, 0.0).unwrap(), (0.0, 0.0));
        }
        assert_eq!(quadratic_eval(1.0, 2.0).unwrap(), (2.0, 2.0));
        assert!(matches!(
            quadratic_eval(0.0, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            quadratic_eval(-2.0, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert_eq!(Objective::quadratic(4.0).unwrap().smoothness(), 0.25);
    }

    #[test]
    fn probe_examples() {
        let h = Objective::huber(1.0, 0.125).unwrap();
        let ratio = smoothness_probe(&h, &grid(-2.0, 2.0, 401)).unwrap();
        assert!(ratio <= 1.0 * (1.0 + 1e-12));

        let q = Objective::quadratic(4.0).unwrap();
        let ratio = smoothness_probe(&q, &grid(-3.0, 5.0, 97)).unwrap();
        assert!((ratio - 0.25).abs() < 1e-12);

        let h = Objective::huber(0.5, 0.3).unwrap();
        let ratio = smoothness_probe(&h, &grid(-2.0, 2.0, 401)).unwrap();
        assert!(ratio <= 0.5 * (1.0 + 1e-12));
    }

    #[test]
    fn probe_rejects_degenerate_grid() {
        let q = Objective::quadratic(1.0).unwrap();
        assert!(smoothness_probe(&q, &[]).is_err());
        assert!(smoothness_probe(&q, &[1.0]).is_err());
        assert!(smoothness_probe(&q, &[2.0, 2.0, 2.0]).is_err());
        assert!(smoothness_probe(&q, &[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn probe_matches_all_pairs() {
        let h = Objective::huber(0.7, 0.2).unwrap().scaled(3.0).unwrap();
        let pts = [1.3, -0.4, 0.21, 0.19, 2.0, -1.0, 0.2];
        let mut brute = 0.0f64;
        for (i, &x) in pts.iter().enumerate() {
            for &y in &pts[i + 1..] {
                brute = brute.max((h.derivative(x) - h.derivative(y)).abs() / (x - y).abs());
            }
        }
        let probe = smoothness_probe(&h, &pts).unwrap();
        assert!((probe - brute).abs() <= 1e-12 * brute);
    }

    #[test]
    fn minimizer_properties() {
        let objs = [
            Objective::quadratic(2.0).unwrap().shifted(-1.5).unwrap(),
            Objective::huber(0.5, 0.3)
                .unwrap()
                .scaled(4.0)
                .unwrap()
                .shifted(2.0)
                .unwrap(),
        ];
        for f in objs {
            assert_eq!(f.value(f.x_star()), f.f_star());
            assert_eq!(f.derivative(f.x_star()), 0.0);
        }
    }

    #[test]
    fn json_shape() {
        let h = Objective::huber(1.0, 0.125).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"huber","a":1.0,"r":0.125,"scale":1.0,"shift":0.0}"#
        );
        let back: Objective = serde_json::from_str(r#"{"kind":"quadratic","sigma":4}"#).unwrap();
        assert_eq!(back, Objective::quadratic(4.0).unwrap());
    }
}
