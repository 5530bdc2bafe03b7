//! Globally adaptive Gauss-Kronrod (10/21) quadrature.
//!
//! Nodes are strictly interior, so integrands with integrable endpoint
//! singularities such as `-ln s` at 0 are never evaluated at the endpoint.
//! Repeated bisection concentrates the work near the singularity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7, 9.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_SEGMENTS: usize = 4000;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Error level below which segment estimates are dominated by rounding.
fn roundoff(magnitude: f64) -> f64 {
    50.0 * f64::EPSILON * magnitude
}

/// Integrates `f` over `(a, b)` to an absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, a, b);
    let mut error = first.error;
    let mut magnitude = first.value.abs();
    heap.push(first);
    while error > tol.max(roundoff(magnitude)) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature(error));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval no longer splittable in f64
            heap.push(worst);
            break;
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        magnitude += left.value.abs() + right.value.abs() - worst.value.abs();
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of the running error updates
    let value_sum: f64 = heap.iter().map(|s| s.value).sum();
    let error_sum: f64 = heap.iter().map(|s| s.error).sum();
    let magnitude: f64 = heap.iter().map(|s| s.value.abs()).sum();
    if !value_sum.is_finite() {
        return Err(Error::Quadrature(f64::INFINITY));
    }
    let floor = tol.max(1e-12 * value_sum.abs()).max(roundoff(magnitude));
    if error_sum > floor * 10.0 {
        return Err(Error::Quadrature(error_sum));
    }
    Ok(Quadrature {
        value: value_sum,
        error: error_sum,
    })
}

/// Integral over the unit interval with the crate's default tolerance.
pub fn integrate_unit<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    integrate(f, 0.0, 1.0, 1e-12).map(|q| q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|s| 4.0 - 6.0 * s, 0.0, 1.0, 1e-14).unwrap();
        assert!((q.value - 1.0).abs() < 1e-15);
        let q = integrate(|s| (4.0 - 6.0 * s) * s, 0.0, 1.0, 1e-14).unwrap();
        assert!(q.value.abs() < 1e-15);
    }

    #[test]
    fn log_singularity() {
        // int_0^1 -ln s ds = 1, int_0^1 (ln s)^2 ds = 2, int_0^1 |ln s|^3 ds = 6
        for (power, expected) in [(1, 1.0), (2, 2.0), (3, 6.0)] {
            let v = integrate_unit(|s: f64| (-s.ln()).powi(power)).unwrap();
            assert!((v - expected).abs() < 1e-9, "power {power}: {v}");
        }
    }

    #[test]
    fn fractional_power() {
        // int_0^1 s^{-1/2} ds = 2
        let v = integrate(|s: f64| s.powf(-0.5), 0.0, 1.0, 1e-10).unwrap().value;
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn non_integrable_is_reported() {
        assert!(integrate(|s: f64| 1.0 / s, 0.0, 1.0, 1e-10).is_err());
    }
}
