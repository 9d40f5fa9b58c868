//! Adaptive 21-point Gauss–Kronrod quadrature with embedded 10-point Gauss error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_419,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

const MAX_BISECTIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    /// `∫|f|` on the same partition.
    pub abs_value: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = WGK[10] * fc;
    let mut g = 0.0;
    let mut abs = WGK[10] * fc.abs();
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    Panel {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).abs(),
        abs_value: abs * half.abs(),
    }
}

/// Single 21-point Kronrod estimate of `∫_a^b f`.
pub fn fixed(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    kronrod(&f, a, b).value
}

/// Globally adaptive integration over the consecutive panels given by `edges`.
///
/// Stops once the summed error estimate is below `max(rel_tol·|I|, 100·ε·∫|f|)`.
pub fn integrate(f: impl Fn(f64) -> f64, edges: &[f64], rel_tol: f64) -> Result<Quadrature> {
    if edges.len() < 2 {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            abs_value: 0.0,
        });
    }
    let mut heap: BinaryHeap<Panel> = edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&f, w[0], w[1]))
        .collect();
    let (mut value, mut error, mut abs) = totals(&heap);
    let mut bisections = 0;
    loop {
        let tol = (rel_tol * value.abs()).max(100.0 * f64::EPSILON * abs);
        if !(value.is_finite() && error.is_finite()) {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
                requested: tol,
            });
        }
        if error <= tol {
            break;
        }
        if bisections >= MAX_BISECTIONS {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
                requested: tol,
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
                requested: tol,
            });
        }
        let (left, right) = (kronrod(&f, worst.a, mid), kronrod(&f, mid, worst.b));
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        bisections += 1;
        if bisections % 1024 == 0 {
            (value, error, abs) = totals(&heap);
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Quadrature {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error).sum(),
        abs_value: panels.iter().map(|p| p.abs_value).sum(),
    })
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64, f64) {
    heap.iter().fold((0.0, 0.0, 0.0), |(v, e, a), p| {
        (v + p.value, e + p.error, a + p.abs_value)
    })
}
