//! The truncated-covariance functional
//! `G_{X,Y}(t) = Cov(g_t(X), g_t(Y))`, equal (for centered integrals) to the
//! double integral of the quadrant dependence surface `Δ` over `[-t,t]²`,
//! in analytic, empirical and tabulated form.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, KahanSum};
use crate::model::{self, Family, SequenceModel};
use crate::types::{clamp_sym, Marginal};

/// Minimum pair count for empirical estimates.
pub const MIN_EMPIRICAL_PAIRS: usize = 1000;

/// Maps a sample to one of its parts before the functional is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PartMap {
    Identity,
    /// `x⁺ = x ∨ 0`
    Positive,
    /// `x⁻ = (-x) ∨ 0`
    Negative,
}

impl PartMap {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            PartMap::Identity => x,
            PartMap::Positive => math::max(x, 0.0),
            PartMap::Negative => math::max(-x, 0.0),
        }
    }
}

/// Monotone tabulation of `t ↦ G(t)` on an increasing grid. Queries below
/// the grid interpolate from `(0, 0)`; queries above it return the final
/// (saturated) value.
#[derive(Debug, Clone)]
pub struct GTable {
    ts: Vec<f64>,
    gs: Vec<f64>,
}

impl GTable {
    /// Strict constructor: rejects grids that are not increasing or values
    /// that are negative or decreasing.
    pub fn new(ts: Vec<f64>, gs: Vec<f64>) -> Result<Self> {
        if ts.len() != gs.len() || ts.is_empty() {
            return Err(Error::Domain("tabulation needs matching non-empty grids".to_string()));
        }
        for i in 0..ts.len() {
            if !(ts[i] > 0.0) || (i > 0 && ts[i] <= ts[i - 1]) {
                return Err(Error::Domain("tabulation grid must be positive and increasing".to_string()));
            }
            if gs[i] < 0.0 || (i > 0 && gs[i] < gs[i - 1]) {
                return Err(Error::Domain(
                    "tabulated G must be nonnegative and nondecreasing".to_string(),
                ));
            }
        }
        Ok(Self { ts, gs })
    }

    /// Projects noisy values onto the monotone nonnegative cone (running
    /// maximum, clamped below at zero) and tabulates the result.
    pub fn monotone_envelope(ts: Vec<f64>, mut gs: Vec<f64>) -> Result<Self> {
        let mut run = 0.0;
        for g in gs.iter_mut() {
            run = math::max(run, math::max(*g, 0.0));
            *g = run;
        }
        Self::new(ts, gs)
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.ts.len();
        if t >= self.ts[n - 1] {
            return self.gs[n - 1];
        }
        // First grid point at or above t.
        let hi = self.ts.partition_point(|&g| g < t);
        let (t1, g1) = (self.ts[hi], self.gs[hi]);
        let (t0, g0) = if hi == 0 { (0.0, 0.0) } else { (self.ts[hi - 1], self.gs[hi - 1]) };
        g0 + (g1 - g0) * (t - t0) / (t1 - t0)
    }

    /// Saturated (largest tabulated) value; estimates `G(∞)`.
    pub fn sup(&self) -> f64 {
        *self.gs.last().unwrap()
    }

    /// Largest grid point (the table is constant past it).
    pub fn last_t(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// Clips every tabulated value at `bound` (a certified level for
    /// `G(∞)`), removing estimator noise above it.
    pub fn clipped_at(mut self, bound: f64) -> Self {
        for g in self.gs.iter_mut() {
            *g = math::min(*g, bound);
        }
        self
    }
}

/// Where a G evaluation takes its data from.
#[derive(Debug, Clone, Copy)]
pub enum GSource<'a> {
    /// Closed-form Δ of the model, integrated exactly.
    Analytic { model: &'a SequenceModel, k: usize, j: usize },
    /// Paired samples; the functional is the sample covariance of the
    /// clamped coordinates.
    Empirical { xs: &'a [f64], ys: &'a [f64] },
    Tabulated(&'a GTable),
}

/// `G(t) = Cov(g_t(X), g_t(Y))` for `t > 0`.
pub fn g_functional(src: &GSource<'_>, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("G(t) requires t > 0".to_string()));
    }
    match src {
        GSource::Analytic { model, k, j } => analytic_g_cross(model, *k, *j, t, t, PartMap::Identity),
        GSource::Empirical { xs, ys } => empirical_cov_clamped(xs, ys, t, t),
        GSource::Tabulated(table) => Ok(table.value(t)),
    }
}

/// Rectangle variant `Cov(g_s(X), g_t(Y))` (integral of Δ over
/// `[-s,s] × [-t,t]`). Not available for tabulated sources, which only hold
/// the square diagonal.
pub fn g_cross(src: &GSource<'_>, s: f64, t: f64) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Domain("cross functional requires s, t > 0".to_string()));
    }
    match src {
        GSource::Analytic { model, k, j } => analytic_g_cross(model, *k, *j, s, t, PartMap::Identity),
        GSource::Empirical { xs, ys } => empirical_cov_clamped(xs, ys, s, t),
        GSource::Tabulated(_) => Err(Error::Unavailable(
            "tabulated sources hold only the square diagonal G(t)".to_string(),
        )),
    }
}

/// Closed-form `Cov(g_s(part X_k), g_t(part X_j))`.
///
/// Part maps commute with the surface: for continuous marginals
/// `Δ_{X⁻,Y⁻}(x, y) = Δ_{X,Y}(-x, -y)`, so restricting the factor integrals
/// to the matching half-line realizes both parts exactly.
pub(crate) fn analytic_g_cross(
    model: &SequenceModel,
    k: usize,
    j: usize,
    s: f64,
    t: f64,
    part: PartMap,
) -> Result<f64> {
    if matches!(model.marginal, Marginal::PointMass { .. }) {
        return Ok(0.0);
    }
    match model.family {
        Family::Independent => Ok(0.0),
        Family::CoupledBernoulli => {
            // Δ = 2^{-(k+j)} on [0,1)², zero elsewhere; values are ≥ 0 so the
            // negative part is degenerate and the positive part is identity.
            if part == PartMap::Negative {
                return Ok(0.0);
            }
            let d = model::pow2_neg(k + j);
            Ok(d * math::min(s, 1.0) * math::min(t, 1.0))
        }
        Family::FgmCopula { .. } => {
            let theta = model.fgm_pair_theta(k, j).ok_or_else(|| {
                Error::Domain("pair indices need 1 <= k < j".to_string())
            })?;
            Ok(theta * fgm_factor(&model.marginal, s, part) * fgm_factor(&model.marginal, t, part))
        }
        Family::GaussianCopula(_) => Err(Error::Unavailable(
            "gaussian copula has no closed-form dependence surface; use the empirical path"
                .to_string(),
        )),
    }
}

/// `∫ F(x)(1 - F(x)) dx` over `[-t, t]` (identity), `[0, t]` (positive part)
/// or `[-t, 0]` (negative part).
fn fgm_factor(marginal: &Marginal, t: f64, part: PartMap) -> f64 {
    let (lo, hi) = match part {
        PartMap::Identity => (-t, t),
        PartMap::Positive => (0.0, t),
        PartMap::Negative => (-t, 0.0),
    };
    match marginal {
        Marginal::Uniform01 => {
            // F(1-F) is x(1-x) on [0,1]; primitive x²/2 - x³/3.
            let h = |x: f64| {
                let x = x.clamp(0.0, 1.0);
                x * x / 2.0 - x * x * x / 3.0
            };
            h(hi) - h(lo)
        }
        Marginal::BernoulliHalf => {
            // F(1-F) = 1/4 on [0, 1), zero elsewhere.
            0.25 * (hi.clamp(0.0, 1.0) - lo.clamp(0.0, 1.0))
        }
        m => integrate(&|x| m.cdf(x) * (1.0 - m.cdf(x)), lo, hi, 1e-10),
    }
}

/// Joint ECDF minus the product of marginal ECDFs at `(x, y)`
/// (right-continuous `≤` convention).
pub fn empirical_delta(xs: &[f64], ys: &[f64], x: f64, y: f64) -> Result<f64> {
    check_pairs(xs, ys)?;
    let n = xs.len();
    let (mut both, mut fx, mut fy) = (0usize, 0usize, 0usize);
    for i in 0..n {
        let bx = xs[i] <= x;
        let by = ys[i] <= y;
        fx += bx as usize;
        fy += by as usize;
        both += (bx && by) as usize;
    }
    let n = n as f64;
    Ok(both as f64 / n - (fx as f64 / n) * (fy as f64 / n))
}

/// Sample covariance of the clamped pair `(g_s(X), g_t(Y))`, two-pass with
/// compensated sums.
pub fn empirical_cov_clamped(xs: &[f64], ys: &[f64], s: f64, t: f64) -> Result<f64> {
    check_pairs(xs, ys)?;
    let n = xs.len() as f64;
    let mut mx = KahanSum::new();
    let mut my = KahanSum::new();
    for i in 0..xs.len() {
        mx.add(clamp_sym(xs[i], s));
        my.add(clamp_sym(ys[i], t));
    }
    let (mx, my) = (mx.value() / n, my.value() / n);
    let mut acc = KahanSum::new();
    for i in 0..xs.len() {
        acc.add((clamp_sym(xs[i], s) - mx) * (clamp_sym(ys[i], t) - my));
    }
    Ok(acc.value() / n)
}

/// Tabulates the empirical G on the given increasing grid and projects it
/// onto the monotone cone.
pub fn tabulate_empirical_g(xs: &[f64], ys: &[f64], grid: &[f64]) -> Result<GTable> {
    check_pairs(xs, ys)?;
    let mut gs = Vec::with_capacity(grid.len());
    for &t in grid {
        gs.push(empirical_cov_clamped(xs, ys, t, t)?);
    }
    GTable::monotone_envelope(grid.into(), gs)
}

/// Log-spaced grid from `t0` to the saturation level of the samples (just
/// past the largest |value|), suitable for [`tabulate_empirical_g`].
pub fn saturating_grid(xs: &[f64], ys: &[f64], t0: f64, points: usize) -> Vec<f64> {
    let mut hi: f64 = t0;
    for &v in xs.iter().chain(ys.iter()) {
        hi = math::max(hi, math::abs(v));
    }
    hi *= 1.001;
    log_spaced(t0, hi, points)
}

/// `points` log-spaced values from `a` to `b` inclusive.
pub fn log_spaced(a: f64, b: f64, points: usize) -> Vec<f64> {
    debug_assert!(a > 0.0 && b > a && points >= 2);
    let la = math::ln(a);
    let step = (math::ln(b) - la) / (points - 1) as f64;
    (0..points).map(|i| math::exp(la + step * i as f64)).collect()
}

fn check_pairs(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Domain("paired samples must have equal length".to_string()));
    }
    if xs.len() < MIN_EMPIRICAL_PAIRS {
        return Err(Error::InsufficientData { needed: MIN_EMPIRICAL_PAIRS, got: xs.len() });
    }
    Ok(())
}

/// Deterministic adaptive trapezoid integration of `f` over `[a, b]`.
///
/// Wide positive ranges are integrated in log space; refinement doubles the
/// node count until successive estimates agree to `rel_tol` (with a floor
/// for results indistinguishable from zero).
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let log_space = a > 0.0 && b / a > 8.0;
    let (lo, hi): (f64, f64) = if log_space { (math::ln(a), math::ln(b)) } else { (a, b) };
    let g = |u: f64| -> f64 {
        if log_space {
            let t = math::exp(u);
            f(t) * t
        } else {
            f(u)
        }
    };
    let width = hi - lo;
    let mut n = 16usize;
    let mut prev = {
        let mut s = KahanSum::new();
        s.add(0.5 * (g(lo) + g(hi)));
        for i in 1..n {
            s.add(g(lo + width * i as f64 / n as f64));
        }
        s.value() * width / n as f64
    };
    loop {
        // Trapezoid refinement: reuse previous nodes, add midpoints.
        let mut mids = KahanSum::new();
        for i in 0..n {
            mids.add(g(lo + width * (i as f64 + 0.5) / n as f64));
        }
        let cur = 0.5 * prev + mids.value() * width / (2 * n) as f64;
        n *= 2;
        let close = math::abs(cur - prev) <= rel_tol * math::abs(cur) + 1e-300;
        if (close && n >= 64) || n >= (1 << 18) {
            return cur;
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_pairs;
    use crate::rng::StreamId;
    use alloc::vec;

    /// Independent 2-D midpoint-quadrature oracle over [-t,t]² for models
    /// with a closed-form Δ. Used only to freeze expected values.
    fn delta_square_quadrature(model: &SequenceModel, k: usize, j: usize, t: f64, cells: usize) -> f64 {
        let h = 2.0 * t / cells as f64;
        let mut acc = KahanSum::new();
        for ix in 0..cells {
            let x = -t + (ix as f64 + 0.5) * h;
            for iy in 0..cells {
                let y = -t + (iy as f64 + 0.5) * h;
                acc.add(model::analytic_delta(model, k, j, x, y).unwrap().unwrap());
            }
        }
        acc.value() * h * h
    }

    #[test]
    fn integrate_known_values() {
        // ∫_1^e dt/t = 1
        let v = integrate(&|t| 1.0 / t, 1.0, core::f64::consts::E, 1e-10);
        assert!((v - 1.0).abs() < 1e-9);
        // ∫_2^∞-ish t^-3 = 1/(2·4)
        let v = integrate(&|t| t.powi(-3), 2.0, 1e8, 1e-10);
        assert!((v - 0.125).abs() < 1e-9);
        assert_eq!(integrate(&|_| 1.0, 3.0, 3.0, 1e-8), 0.0);
    }

    #[test]
    fn coupled_bernoulli_g_examples() {
        let cb = SequenceModel::coupled_bernoulli();
        let src = GSource::Analytic { model: &cb, k: 1, j: 2 };
        let g1 = g_functional(&src, 1.0).unwrap();
        assert_eq!(g1, 0.125);
        let ghalf = g_functional(&src, 0.5).unwrap();
        assert_eq!(ghalf, 0.03125);
        // Oracle agreement (midpoint grid fine enough for 1e-6 absolute).
        assert!((g1 - delta_square_quadrature(&cb, 1, 2, 1.0, 2000)).abs() < 1e-6);
        assert!((ghalf - delta_square_quadrature(&cb, 1, 2, 0.5, 2000)).abs() < 1e-6);
        // Saturation beyond the support.
        assert_eq!(g_functional(&src, 7.0).unwrap(), 0.125);
    }

    #[test]
    fn fgm_g_examples() {
        let fgm = SequenceModel::new(Family::FgmCopula { theta: 1.0 }, Marginal::Uniform01).unwrap();
        let src = GSource::Analytic { model: &fgm, k: 1, j: 2 };
        let g1 = g_functional(&src, 1.0).unwrap();
        assert!((g1 - 1.0 / 36.0).abs() < 1e-14);
        assert!((g1 - delta_square_quadrature(&fgm, 1, 2, 1.0, 2000)).abs() < 1e-6);
        // Independent pairs give exactly zero.
        let ind = SequenceModel::independent(Marginal::Uniform01);
        let src0 = GSource::Analytic { model: &ind, k: 1, j: 2 };
        assert_eq!(g_functional(&src0, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn g_monotone_in_t_for_pqd_models() {
        let fgm = SequenceModel::new(Family::FgmCopula { theta: 0.7 }, Marginal::Uniform01).unwrap();
        let src = GSource::Analytic { model: &fgm, k: 2, j: 5 };
        let mut prev = 0.0;
        for i in 1..=20 {
            let g = g_functional(&src, 0.1 * i as f64).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn domain_errors() {
        let cb = SequenceModel::coupled_bernoulli();
        let src = GSource::Analytic { model: &cb, k: 1, j: 2 };
        assert!(g_functional(&src, 0.0).is_err());
        assert!(g_functional(&src, -1.0).is_err());
        let short = vec![0.0; 10];
        assert!(matches!(
            g_functional(&GSource::Empirical { xs: &short, ys: &short }, 1.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn rectangle_functional() {
        let cb = SequenceModel::coupled_bernoulli();
        let src = GSource::Analytic { model: &cb, k: 1, j: 2 };
        // Δ is constant on the unit square: the rectangle integral scales
        // with each clamped side separately.
        assert_eq!(g_cross(&src, 1.0, 0.5).unwrap(), 0.0625);
        assert_eq!(g_cross(&src, 3.0, 1.0).unwrap(), 0.125);
        // Agreement with the sample covariance of asymmetric clamps.
        let (xs, ys) = sample_pairs(&cb, 1, 2, 300_000, StreamId::new(21, 0)).unwrap();
        let emp = g_cross(&GSource::Empirical { xs: &xs, ys: &ys }, 1.0, 0.5).unwrap();
        assert!((emp - 0.0625).abs() < 2e-3, "empirical rectangle {emp}");
        // Tabulations only hold the diagonal.
        let table = GTable::new(vec![1.0], vec![0.1]).unwrap();
        assert!(g_cross(&GSource::Tabulated(&table), 1.0, 0.5).is_err());
    }

    #[test]
    fn empirical_delta_examples() {
        // Degenerate all-(0,0) sample at (1,1): 1 - 1·1 = 0.
        let zeros = vec![0.0; 2000];
        assert_eq!(empirical_delta(&zeros, &zeros, 1.0, 1.0).unwrap(), 0.0);
        // Independent uniforms at (0.5, 0.5): 0 within the sampling band.
        let ind = SequenceModel::independent(Marginal::Uniform01);
        let (xs, ys) = sample_pairs(&ind, 1, 2, 200_000, StreamId::new(4, 0)).unwrap();
        let d = empirical_delta(&xs, &ys, 0.5, 0.5).unwrap();
        assert!(d.abs() < 3.0 * 0.5 / (xs.len() as f64).sqrt());
    }

    #[test]
    fn empirical_g_matches_analytic_for_fgm() {
        let fgm = SequenceModel::new(Family::FgmCopula { theta: 1.0 }, Marginal::Uniform01).unwrap();
        let (xs, ys) = sample_pairs(&fgm, 1, 2, 300_000, StreamId::new(12, 0)).unwrap();
        for t in [0.5, 1.0] {
            let emp = g_functional(&GSource::Empirical { xs: &xs, ys: &ys }, t).unwrap();
            let ana = g_functional(&GSource::Analytic { model: &fgm, k: 1, j: 2 }, t).unwrap();
            assert!((emp - ana).abs() < 1e-3, "t={t}: emp {emp} vs analytic {ana}");
        }
    }

    #[test]
    fn tabulation_interpolates_and_saturates() {
        let table = GTable::new(vec![1.0, 2.0, 4.0], vec![0.1, 0.3, 0.3]).unwrap();
        assert_eq!(table.value(2.0), 0.3);
        assert!((table.value(1.5) - 0.2).abs() < 1e-15);
        assert_eq!(table.value(100.0), 0.3);
        assert_eq!(table.sup(), 0.3);
        assert!((table.value(0.5) - 0.05).abs() < 1e-15);
        // Strict constructor rejects decreasing values; envelope repairs them.
        assert!(GTable::new(vec![1.0, 2.0], vec![0.2, 0.1]).is_err());
        let env = GTable::monotone_envelope(vec![1.0, 2.0, 3.0], vec![-0.05, 0.2, 0.1]).unwrap();
        assert_eq!(env.value(1.0), 0.0);
        assert_eq!(env.value(3.0), 0.2);
    }

    #[test]
    fn part_maps_for_nonnegative_support_collapse() {
        let cb = SequenceModel::coupled_bernoulli();
        let plus = analytic_g_cross(&cb, 1, 2, 1.0, 1.0, PartMap::Positive).unwrap();
        let minus = analytic_g_cross(&cb, 1, 2, 1.0, 1.0, PartMap::Negative).unwrap();
        assert_eq!(plus, 0.125);
        assert_eq!(minus, 0.0);
        // Nonnegative-support marginals have identically vanishing negative
        // parts, so the positive part carries the whole functional.
        let fgm = SequenceModel::new(Family::FgmCopula { theta: 1.0 }, Marginal::Uniform01).unwrap();
        for t in [0.25, 0.5, 1.0, 3.0] {
            let whole = analytic_g_cross(&fgm, 1, 2, t, t, PartMap::Identity).unwrap();
            let plus = analytic_g_cross(&fgm, 1, 2, t, t, PartMap::Positive).unwrap();
            let minus = analytic_g_cross(&fgm, 1, 2, t, t, PartMap::Negative).unwrap();
            assert_eq!(minus, 0.0);
            assert!((plus - whole).abs() < 1e-15);
        }
    }
}
