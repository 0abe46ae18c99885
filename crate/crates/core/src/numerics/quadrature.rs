//! Gauss–Kronrod (7, 15) quadrature: an adaptive integrator for callable
//! integrands and a fixed composite rule for tabulated ones.

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1], non-negative half, largest first.
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Settings for [`integrate`]: absolute tolerance and maximum bisection depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub tolerance: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            tolerance: 1e-10,
            max_depth: 30,
        }
    }
}

impl Quadrature {
    pub fn new(tolerance: f64, max_depth: u32) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(Quadrature {
            tolerance,
            max_depth,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// The 15-point Kronrod and embedded 7-point Gauss estimates on [a, b].
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * half, g * half)
}

/// Subdivision budget; guards against pathological integrands.
const MAX_INTERVALS: usize = 1 << 20;

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Each interval is bisected until its |K15 − G7| estimate fits its share of
/// the tolerance (proportional to width). Hitting `max_depth` yields
/// [`Error::Quadrature`] carrying the best estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &Quadrature) -> Result<Integral> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration needs finite a < b, got [{a}, {b}]"
        )));
    }
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    let mut deepest = 0;
    let mut intervals = 0usize;
    let mut stack = vec![(a, b, q.tolerance, 0u32)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        intervals += 1;
        let (k, g) = kronrod15(&f, lo, hi);
        let err = (k - g).abs();
        deepest = deepest.max(depth);
        if err <= tol || depth >= q.max_depth || intervals > MAX_INTERVALS {
            if err > tol {
                converged = false;
            }
            value += k;
            error += err;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, 0.5 * tol, depth + 1));
        stack.push((lo, mid, 0.5 * tol, depth + 1));
    }
    if !value.is_finite() {
        return Err(Error::InvalidInput("integrand is not finite".into()));
    }
    if converged {
        Ok(Integral { value, error })
    } else {
        Err(Error::Quadrature {
            estimate: value,
            error,
            depth: deepest,
        })
    }
}

/// Composite Gauss–Kronrod rule on equal panels, for integrating products of
/// functions tabulated once at [`PanelRule::nodes`].
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    kronrod: Vec<f64>,
    gauss: Vec<f64>,
}

impl PanelRule {
    pub fn new(a: f64, b: f64, panels: usize) -> Result<Self> {
        if !(a < b) || panels == 0 {
            return Err(Error::InvalidInput(format!(
                "panel rule needs a < b and at least one panel, got [{a}, {b}] with {panels}"
            )));
        }
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(15 * panels);
        let mut kronrod = Vec::with_capacity(15 * panels);
        let mut gauss = Vec::with_capacity(15 * panels);
        for p in 0..panels {
            let center = a + (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            for j in 0..7 {
                let gw = if j % 2 == 1 { WG[j / 2] * half } else { 0.0 };
                nodes.push(center - half * XGK[j]);
                kronrod.push(WGK[j] * half);
                gauss.push(gw);
            }
            nodes.push(center);
            kronrod.push(WGK[7] * half);
            gauss.push(WG[3] * half);
            for j in (0..7).rev() {
                let gw = if j % 2 == 1 { WG[j / 2] * half } else { 0.0 };
                nodes.push(center + half * XGK[j]);
                kronrod.push(WGK[j] * half);
                gauss.push(gw);
            }
        }
        Ok(PanelRule {
            nodes,
            kronrod,
            gauss,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Integral of the function whose values at [`Self::nodes`] are given;
    /// the error is the summed per-panel |K15 − G7|.
    pub fn integrate_values(&self, values: &[f64]) -> Integral {
        assert_eq!(values.len(), self.nodes.len());
        let mut value = 0.0;
        let mut error = 0.0;
        for ((v, kw), gw) in values
            .chunks(15)
            .zip(self.kronrod.chunks(15))
            .zip(self.gauss.chunks(15))
        {
            let k: f64 = v.iter().zip(kw).map(|(a, b)| a * b).sum();
            let g: f64 = v.iter().zip(gw).map(|(a, b)| a * b).sum();
            value += k;
            error += (k - g).abs();
        }
        Integral { value, error }
    }

    /// Integral of the pointwise product `w · u · v` of three tabulations.
    pub fn integrate_product(&self, weight: Option<&[f64]>, u: &[f64], v: &[f64]) -> Integral {
        let values: Vec<f64> = match weight {
            Some(w) => w.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).collect(),
            None => u.iter().zip(v).map(|(a, b)| a * b).collect(),
        };
        self.integrate_values(&values)
    }
}
