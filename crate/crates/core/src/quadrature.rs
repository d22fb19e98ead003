//! Quadrature rules: Gauss–Hermite against a Gaussian weight, and a globally
//! adaptive Gauss–Kronrod (7/15) integrator for finite intervals.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;

use crate::error::{Error, Result};

/// Gauss–Hermite rule rescaled to the standard normal density: for
/// `Z ~ N(0, 1)`, `E[f(Z)] ≈ Σ weights[k] f(nodes[k])`. Weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl NormalRule {
    pub fn new(order: usize) -> Result<Self> {
        let order = NonZeroUsize::new(order)
            .ok_or_else(|| Error::InvalidParameter("quadrature order must be at least 1".into()))?;
        let rule = GaussHermite::new(order);
        let scale = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = rule
            .nodes()
            .zip(rule.weights())
            .map(|(&x, &w)| (x * std::f64::consts::SQRT_2, w / scale))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Golub–Welsch leaves rounding noise in the weights; renormalize so
        // constants integrate exactly.
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(NormalRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(X)]` for `X ~ N(mean, sd²)`.
    pub fn expect(&self, mean: f64, sd: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(mean + sd * z))
            .sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`, bisecting
/// the segment with the largest error estimate until the summed estimate
/// falls below the tolerance.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut segments = vec![kronrod(&mut f, a, b)];
    let mut evaluations = 15;
    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= abs_tol {
            // Sum in interval order so the result does not depend on the
            // refinement sequence.
            segments.sort_by(|x, y| x.a.total_cmp(&y.a));
            let value = segments.iter().map(|s| s.value).sum();
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= max_segments {
            return Err(Error::Integration {
                lower: a,
                upper: b,
                error,
                evaluations,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(kronrod(&mut f, seg.a, mid));
        segments.push(kronrod(&mut f, mid, seg.b));
        evaluations += 30;
    }
}
