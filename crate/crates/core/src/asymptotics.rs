//! Asymptotic bias and variance multipliers, and the comparison of the four
//! practical estimators over the `(rho, rho*)` plane.
//!
//! For a weight `W` and second-order parameter `rho < 0`:
//!
//! * `AB(W) = int_0^1 W(s) s^{-rho} ds`
//! * `AV(W) = int_0^1 W(s)^2 ds`
//!
//! so that `sqrt(k) (gamma_hat - gamma - b AB)` is asymptotically
//! `N(0, gamma^2 AV)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_negative, check_positive};
use crate::quadrature::integrate_unit;
use crate::weights::WeightScheme;

/// Bias and variance multipliers of a scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub ab: f64,
    pub av: f64,
}

/// Closed-form `AB` and `AV`, with quadrature for generic combinations.
pub fn ab_av(scheme: &WeightScheme, rho: f64) -> Result<Coefficients> {
    check_negative("rho", rho)?;
    scheme.check()?;
    match scheme {
        WeightScheme::Combination { .. } => Ok(Coefficients {
            ab: ab_quadrature(scheme, rho)?,
            av: av_quadrature(scheme)?,
        }),
        _ => Ok(Coefficients {
            ab: closed_form_ab(scheme, rho)?,
            av: av(scheme)?,
        }),
    }
}

fn closed_form_ab(scheme: &WeightScheme, rho: f64) -> Result<f64> {
    let q = 1.0 - rho;
    Ok(match *scheme {
        WeightScheme::Hill => 1.0 / q,
        WeightScheme::Zipf => 1.0 / (q * q),
        WeightScheme::HillZipf { rho_star } => (rho_star - rho) / (rho_star * q * q),
        WeightScheme::Optimal { rho_star } => {
            let pole = 1.0 - rho_star - rho;
            if pole == 0.0 {
                return Err(Error::SingularParameter(format!(
                    "1 - rho* - rho vanishes at rho = {rho}, rho* = {rho_star}"
                )));
            }
            (1.0 - rho_star) * (rho_star - rho) / (rho_star * q * pole)
        }
        WeightScheme::Combination { .. } => unreachable!("handled by ab_av"),
    })
}

/// Asymptotic variance multiplier; it does not depend on the true `rho`.
pub fn av(scheme: &WeightScheme) -> Result<f64> {
    scheme.check()?;
    Ok(match *scheme {
        WeightScheme::Hill => 1.0,
        WeightScheme::Zipf => 2.0,
        WeightScheme::HillZipf { rho_star } => {
            let c = 1.0 - 1.0 / rho_star;
            1.0 + c * c
        }
        WeightScheme::Optimal { rho_star } => {
            let c = 1.0 - 1.0 / rho_star;
            c * c
        }
        WeightScheme::Combination { .. } => av_quadrature(scheme)?,
    })
}

/// `int_0^1 W(s) s^{-rho} ds` by adaptive quadrature.
pub fn ab_quadrature(scheme: &WeightScheme, rho: f64) -> Result<f64> {
    integrate_unit(|s| scheme.weight_unchecked(s) * s.powf(-rho))
}

/// `int_0^1 W(s)^2 ds` by adaptive quadrature.
pub fn av_quadrature(scheme: &WeightScheme) -> Result<f64> {
    integrate_unit(|s| {
        let w = scheme.weight_unchecked(s);
        w * w
    })
}

/// Frontier between `|AB(opt_rho*)|` and `AB(Z)` for `rho* < rho`.
pub fn frontier_rho1(rho: f64) -> Result<f64> {
    check_negative("rho", rho)?;
    let q = 1.0 - rho;
    Ok((rho - 1.0 - (q * q + 4.0 * q).sqrt()) / 2.0)
}

/// Frontier between `|AB(opt_rho*)|` and `AB(Z)` for `rho* > rho`.
pub fn frontier_rho2(rho: f64) -> Result<f64> {
    check_negative("rho", rho)?;
    let a = 2.0 + rho;
    let q = rho - 1.0;
    let disc = a * a * q * q - 4.0 * rho * q * (rho - 2.0);
    Ok((a * q + disc.sqrt()) / (2.0 * (rho - 2.0)))
}

/// The four practical estimators compared over the `(rho, rho*)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Estimator {
    Hill,
    Zipf,
    HillZipf,
    Optimal,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [
        Estimator::Hill,
        Estimator::Zipf,
        Estimator::HillZipf,
        Estimator::Optimal,
    ];

    pub fn scheme(self, rho_star: f64) -> WeightScheme {
        match self {
            Estimator::Hill => WeightScheme::Hill,
            Estimator::Zipf => WeightScheme::Zipf,
            Estimator::HillZipf => WeightScheme::HillZipf { rho_star },
            Estimator::Optimal => WeightScheme::Optimal { rho_star },
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Estimator::Hill => "H",
            Estimator::Zipf => "Z",
            Estimator::HillZipf => "HZ",
            Estimator::Optimal => "OPT",
        }
    }
}

/// Labeled areas of the `(rho, rho*)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Area {
    A,
    B,
    C,
    D,
    E,
    Uncovered,
}

impl Area {
    /// Ordering of `|AB|`, smallest first, that holds throughout the area.
    pub fn bias_order(self) -> Option<[Estimator; 4]> {
        use Estimator::*;
        match self {
            Area::A => Some([Zipf, Hill, HillZipf, Optimal]),
            Area::B => Some([Zipf, HillZipf, Hill, Optimal]),
            Area::C => Some([Zipf, HillZipf, Optimal, Hill]),
            // D is {rho1 <= rho* <= rho2}, where |AB(opt)| <= AB(Z).
            Area::D => Some([HillZipf, Optimal, Zipf, Hill]),
            Area::E => Some([HillZipf, Zipf, Optimal, Hill]),
            Area::Uncovered => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Area::A => "A",
            Area::B => "B",
            Area::C => "C",
            Area::D => "D",
            Area::E => "E",
            Area::Uncovered => "uncovered",
        }
    }
}

impl fmt::Display for Area {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Variance half-planes split at `rho* = -1 - sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HalfPlane {
    N,
    S,
}

impl HalfPlane {
    pub fn of(rho_star: f64) -> Self {
        if rho_star >= -1.0 - std::f64::consts::SQRT_2 {
            HalfPlane::N
        } else {
            HalfPlane::S
        }
    }

    /// Ordering of `AV`, smallest first, that holds on this half-plane.
    pub fn variance_order(self) -> [Estimator; 4] {
        use Estimator::*;
        match self {
            HalfPlane::N => [Hill, Zipf, Optimal, HillZipf],
            HalfPlane::S => [Hill, Optimal, Zipf, HillZipf],
        }
    }
}

/// Closed-form area containing `(rho, rho*)`. Boundaries go to the lower letter.
pub fn area_of(rho: f64, rho_star: f64) -> Result<Area> {
    check_negative("rho", rho)?;
    check_negative("rho_star", rho_star)?;
    let golden = (1.0 - (1.0 - 2.0 * rho).sqrt()) / 2.0;
    let r1 = frontier_rho1(rho)?;
    let r2 = frontier_rho2(rho)?;
    let area = if rho / (2.0 - rho) <= rho_star {
        Area::A
    } else if golden <= rho_star && rho_star <= rho / (2.0 - rho) {
        Area::B
    } else if rho / 2.0 <= rho_star && rho_star <= golden {
        Area::C
    } else if r1 <= rho_star && rho_star <= rho / 2.0 && rho_star <= r2 {
        Area::D
    } else if r2 <= rho_star && rho_star <= r1 {
        Area::E
    } else {
        Area::Uncovered
    };
    Ok(area)
}

/// Classification of one `(rho, rho*)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub rho: f64,
    pub rho_star: f64,
    pub area: Area,
    pub half_plane: HalfPlane,
    /// Estimators sorted by `|AB|`, computed directly; authoritative.
    pub bias_order: [Estimator; 4],
    /// Estimators sorted by `AV`, computed directly; authoritative.
    pub var_order: [Estimator; 4],
    /// `|AB|` in `Estimator::ALL` order.
    pub abs_bias: [f64; 4],
    /// `AV` in `Estimator::ALL` order.
    pub variance: [f64; 4],
}

impl Region {
    fn value(values: &[f64; 4], e: Estimator) -> f64 {
        values[Estimator::ALL.iter().position(|&x| x == e).unwrap()]
    }

    pub fn abs_bias_of(&self, e: Estimator) -> f64 {
        Self::value(&self.abs_bias, e)
    }

    pub fn variance_of(&self, e: Estimator) -> f64 {
        Self::value(&self.variance, e)
    }

    /// Whether the area's claimed `|AB|` ordering holds at this point.
    /// Points outside every area agree vacuously.
    pub fn area_agrees(&self) -> bool {
        match self.area.bias_order() {
            Some(order) => holds(&order, |e| self.abs_bias_of(e)),
            None => true,
        }
    }

    /// Whether the half-plane's claimed `AV` ordering holds at this point.
    pub fn half_plane_agrees(&self) -> bool {
        holds(&self.half_plane.variance_order(), |e| self.variance_of(e))
    }
}

const ORDER_TOL: f64 = 1e-12;

fn holds(order: &[Estimator; 4], value: impl Fn(Estimator) -> f64) -> bool {
    order.windows(2).all(|pair| {
        let (a, b) = (value(pair[0]), value(pair[1]));
        a <= b + ORDER_TOL * (1.0 + b.abs())
    })
}

fn sorted_by(values: &[f64; 4]) -> [Estimator; 4] {
    let mut order = Estimator::ALL;
    // stable: ties keep the H, Z, HZ, OPT order
    order.sort_by(|a, b| Region::value(values, *a).total_cmp(&Region::value(values, *b)));
    order
}

pub fn region_classify(rho: f64, rho_star: f64) -> Result<Region> {
    let area = area_of(rho, rho_star)?;
    let mut abs_bias = [0.0; 4];
    let mut variance = [0.0; 4];
    for (slot, e) in Estimator::ALL.iter().enumerate() {
        let c = ab_av(&e.scheme(rho_star), rho)?;
        abs_bias[slot] = c.ab.abs();
        variance[slot] = c.av;
    }
    Ok(Region {
        rho,
        rho_star,
        area,
        half_plane: HalfPlane::of(rho_star),
        bias_order: sorted_by(&abs_bias),
        var_order: sorted_by(&variance),
        abs_bias,
        variance,
    })
}

/// Normal approximation of the sampling law of an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalLaw {
    pub mean: f64,
    pub std: f64,
}

impl NormalLaw {
    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        (-0.5 * z * z).exp() / (self.std * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Mean `gamma + b AB` and standard deviation `gamma sqrt(AV / k)`.
pub fn asymptotic_law(
    gamma: f64,
    rho: f64,
    scheme: &WeightScheme,
    k: usize,
    b: f64,
) -> Result<NormalLaw> {
    check_positive("gamma", gamma)?;
    if k == 0 {
        return Err(Error::InsufficientData { k, m: 0 });
    }
    let c = ab_av(scheme, rho)?;
    Ok(NormalLaw {
        mean: gamma + b * c.ab,
        std: gamma * (c.av / k as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn named_values() {
        let c = ab_av(&WeightScheme::Hill, -1.0).unwrap();
        assert_eq!((c.ab, c.av), (0.5, 1.0));
        let c = ab_av(&WeightScheme::Zipf, -1.0).unwrap();
        assert_eq!((c.ab, c.av), (0.25, 2.0));
        for rho in [-0.3, -1.0, -4.0] {
            let c = ab_av(&WeightScheme::HillZipf { rho_star: rho }, rho).unwrap();
            assert_eq!(c.ab, 0.0);
            let q = ab_quadrature(&WeightScheme::HillZipf { rho_star: rho }, rho).unwrap();
            assert!(q.abs() < 1e-8);
            let c = ab_av(&WeightScheme::Optimal { rho_star: rho }, rho).unwrap();
            assert_eq!(c.ab, 0.0);
            assert!(close(c.av, (1.0 - 1.0 / rho).powi(2), 1e-15));
        }
    }

    #[test]
    fn rejects_bad_rho() {
        assert!(ab_av(&WeightScheme::Hill, 0.0).is_err());
        assert!(ab_av(&WeightScheme::HillZipf { rho_star: 0.5 }, -1.0).is_err());
    }

    #[test]
    fn combination_uses_quadrature() {
        let w = crate::weights::combine(WeightScheme::Hill, WeightScheme::Zipf, -1.0).unwrap();
        let c = ab_av(&w, -1.0).unwrap();
        assert!(c.ab.abs() < 1e-9);
        // equals HZ(-1): AV = 1 + 4
        assert!(close(c.av, 5.0, 1e-8));
    }

    #[test]
    fn frontiers() {
        assert!(close(frontier_rho1(-1.0).unwrap(), (-2.0 - 12f64.sqrt()) / 2.0, 1e-14));
        assert!(close(frontier_rho2(-1.0).unwrap(), (-2.0 + 28f64.sqrt()) / -6.0, 1e-14));
        assert!(close(frontier_rho1(-1e-12).unwrap(), (-1.0 - 5f64.sqrt()) / 2.0, 1e-9));
        assert!(frontier_rho1(1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let r = region_classify(-1.0, -0.2).unwrap();
        assert_eq!((r.area, r.half_plane), (Area::A, HalfPlane::N));
        assert!(r.area_agrees() && r.half_plane_agrees());

        let r = region_classify(-1.0, -1.0).unwrap();
        assert_eq!((r.area, r.half_plane), (Area::D, HalfPlane::N));
        assert!(r.area_agrees());

        let r = region_classify(-2.0, -1.0).unwrap();
        assert_eq!(r.area, Area::C);
        assert!(r.area_agrees());

        // below rho1 at rho = -1 no listed area applies
        let r = region_classify(-1.0, -3.5).unwrap();
        assert_eq!(r.area, Area::Uncovered);
        assert_eq!(r.half_plane, HalfPlane::S);
        assert_eq!(r.var_order[0], Estimator::Hill);
        assert!(r.half_plane_agrees());
    }

    #[test]
    fn density_law() {
        let law = asymptotic_law(0.3, -1.0, &WeightScheme::HillZipf { rho_star: -5.0 }, 500, -0.08)
            .unwrap();
        assert!(close(law.mean, 0.284, 1e-12));
        assert!(close(law.std, 0.3 * ((1.0 + 1.44) / 500f64).sqrt(), 1e-12));
        assert!(close(law.std, 0.02096, 1e-5));

        let unbiased = asymptotic_law(0.7, -2.0, &WeightScheme::Optimal { rho_star: -2.0 }, 10, 0.4)
            .unwrap();
        assert_eq!(unbiased.mean, 0.7);

        let mut last = f64::INFINITY;
        for k in [1, 10, 100, 1000, 10000] {
            let s = asymptotic_law(0.5, -1.0, &WeightScheme::Hill, k, 0.0).unwrap().std;
            assert!(s < last);
            last = s;
        }
        assert!(asymptotic_law(0.5, -1.0, &WeightScheme::Hill, 0, 0.0).is_err());
    }
}
