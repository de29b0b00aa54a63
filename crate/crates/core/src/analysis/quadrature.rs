//! Globally adaptive Gauss–Kronrod (10/21-point) integration on finite
//! intervals with caller-supplied breakpoints.
//!
//! Every interval is kept on a max-heap keyed by its error estimate; the worst
//! interval is bisected until the summed error meets `max(abs_tol, rel_tol·|I|)`
//! or the subdivision budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

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

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

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

/// Tolerances and truncation bounds shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Semi-infinite radial integrals are cut at `r_max_factor / sqrt(λ)`.
    pub r_max_factor: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            r_max_factor: 8.0,
            max_subdivisions: 400,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        for (name, tol) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(AnalysisError::InvalidInput(format!(
                    "quadrature {name} must lie in (0, 1e-2], got {tol}"
                )));
            }
        }
        if !(self.r_max_factor >= 6.0) || !self.r_max_factor.is_finite() {
            return Err(AnalysisError::InvalidInput(format!(
                "quadrature r_max_factor must be >= 6, got {}",
                self.r_max_factor
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(AnalysisError::InvalidInput(
                "quadrature max_subdivisions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Truncation radius for a Rayleigh-type radial integral at density `lambda`.
    pub fn radial_cutoff(&self, lambda: f64) -> f64 {
        self.r_max_factor / lambda.sqrt()
    }

    /// Upper bound on the mass a Rayleigh serving-distance density puts beyond the cutoff.
    pub fn radial_tail_bound(&self) -> f64 {
        (-std::f64::consts::PI * self.r_max_factor * self.r_max_factor).exp()
    }

    /// Same spec with both tolerances scaled, used for inner integrals of nested quadratures.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: (self.abs_tol * factor).max(1e-15),
            rel_tol: (self.rel_tol * factor).max(1e-15),
            ..*self
        }
    }
}

/// Value and error estimate of a converged integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrate `f` over `[a, b]`, splitting first at every breakpoint strictly
/// inside the interval.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult, AnalysisError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (value, error) = gk21(&mut f, w[0], w[1]);
        evaluations += 21;
        total += value;
        total_err += error;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    let mut subdivisions = heap.len();
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if !total.is_finite() {
            return Err(AnalysisError::Quadrature {
                value: total,
                error_estimate: total_err,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(AnalysisError::Quadrature {
                value: sign * total,
                error_estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one interval");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point; accept it.
            heap.push(Piece {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // Re-sum from the pieces to shed the drift of the running updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadResult {
        value: sign * value,
        error,
        evaluations,
    })
}

/// Iterated integral `∫_a^b ∫_{c(x)}^{d(x)} g(x, y) dy dx`.
///
/// `inner` maps `x` to the inner bounds and breakpoints. Inner integrals run
/// at a tenth of the outer tolerance; the reported error is the outer error
/// plus the outer length times the mean inner error.
pub(crate) fn integrate_2d<I, G>(
    a: f64,
    b: f64,
    outer_breakpoints: &[f64],
    mut inner: I,
    mut g: G,
    spec: &QuadratureSpec,
) -> Result<QuadResult, AnalysisError>
where
    I: FnMut(f64) -> (f64, f64, Vec<f64>),
    G: FnMut(f64, f64) -> f64,
{
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    let inner_spec = QuadratureSpec {
        abs_tol: (0.1 * spec.abs_tol / width).max(1e-300),
        rel_tol: (0.1 * spec.rel_tol).max(1e-15),
        ..*spec
    };
    let mut failure: Option<AnalysisError> = None;
    let mut inner_err_sum = 0.0;
    let mut inner_calls = 0usize;
    let mut evaluations = 0usize;
    let outer = integrate(
        |x| {
            let (c, d, bps) = inner(x);
            let r = integrate(|y| g(x, y), c, d, &bps, &inner_spec);
            inner_calls += 1;
            match r {
                Ok(q) => {
                    inner_err_sum += q.error;
                    evaluations += q.evaluations;
                    q.value
                }
                Err(AnalysisError::Quadrature {
                    value,
                    error_estimate,
                }) => {
                    inner_err_sum += error_estimate;
                    failure.get_or_insert(AnalysisError::Quadrature {
                        value,
                        error_estimate,
                    });
                    value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        a,
        b,
        outer_breakpoints,
        spec,
    );
    let inner_err = width * inner_err_sum / inner_calls.max(1) as f64;
    match (outer, failure) {
        (Ok(q), None) => Ok(QuadResult {
            value: q.value,
            error: q.error + inner_err,
            evaluations: evaluations + q.evaluations,
        }),
        (Ok(q), Some(AnalysisError::Quadrature { .. })) => Err(AnalysisError::Quadrature {
            value: q.value,
            error_estimate: q.error + inner_err,
        }),
        (Err(AnalysisError::Quadrature {
            value,
            error_estimate,
        }), _) => Err(AnalysisError::Quadrature {
            value,
            error_estimate: error_estimate + inner_err,
        }),
        (_, Some(e)) | (Err(e), None) => Err(e),
    }
}
