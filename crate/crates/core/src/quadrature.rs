//! Adaptive integration over intervals and boxes, built on the
//! double-exponential rule of the `quadrature` crate. An interval is
//! accepted when the rule on its two halves agrees with the rule on the
//! whole; otherwise both halves are refined.

use std::cell::RefCell;

const MAX_DEPTH: u32 = 24;

/// Integration target: relative error with an absolute floor for cells
/// whose integral is essentially zero.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-6,
            abs: 1e-14,
        }
    }
}

fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64, goal: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, goal).integral
}

/// Accepts `whole` once the two half-interval estimates agree with it.
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    goal: f64,
    depth: u32,
) -> Result<f64, String> {
    let m = 0.5 * (a + b);
    let left = rule(f, a, m, 0.25 * goal);
    let right = rule(f, m, b, 0.25 * goal);
    let split = left + right;
    if !split.is_finite() {
        return Err(format!("non-finite integrand on [{a}, {b}]"));
    }
    if (split - whole).abs() <= goal {
        return Ok(split);
    }
    if depth == 0 {
        return Err(format!(
            "no convergence on [{a}, {b}]: halves {split} whole {whole} goal {goal}"
        ));
    }
    Ok(adapt(f, a, m, left, 0.5 * goal, depth - 1)? + adapt(f, m, b, right, 0.5 * goal, depth - 1)?)
}

/// `∫_a^b f`.
pub fn integrate_1d(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<f64, String> {
    if a == b {
        return Ok(0.0);
    }
    let pilot = rule(f, a, b, 0.0);
    if !pilot.is_finite() {
        return Err(format!("non-finite integral on [{a}, {b}]"));
    }
    let goal = (tol.rel * pilot.abs()).max(tol.abs);
    adapt(f, a, b, pilot, goal, MAX_DEPTH)
}

/// `∫∫ f(x, y)` over `[ax, bx] x [ay, by]`, inner integral in `y`.
pub fn integrate_2d(
    f: &dyn Fn(f64, f64) -> f64,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    tol: Tolerance,
) -> Result<f64, String> {
    let failure: RefCell<Option<String>> = RefCell::new(None);
    let inner_tol = Tolerance {
        rel: tol.rel * 0.1,
        abs: tol.abs * 0.1 / (bx - ax).abs().max(f64::MIN_POSITIVE),
    };
    let outer = |x: f64| match integrate_1d(&|y| f(x, y), ay, by, inner_tol) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let v = integrate_1d(&outer, ax, bx, tol)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `∫∫∫ f(x, y, z)` over a box, innermost integral in `z`.
pub fn integrate_3d(
    f: &dyn Fn(f64, f64, f64) -> f64,
    (ax, bx): (f64, f64),
    y: (f64, f64),
    z: (f64, f64),
    tol: Tolerance,
) -> Result<f64, String> {
    let failure: RefCell<Option<String>> = RefCell::new(None);
    let inner_tol = Tolerance {
        rel: tol.rel * 0.1,
        abs: tol.abs * 0.1 / (bx - ax).abs().max(f64::MIN_POSITIVE),
    };
    let outer = |x: f64| match integrate_2d(&|yy, zz| f(x, yy, zz), y, z, inner_tol) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let v = integrate_1d(&outer, ax, bx, tol)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}
