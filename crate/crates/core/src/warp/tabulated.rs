use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Tabulated warping function with Fritsch–Carlson (PCHIP) slopes.
///
/// The cumulative integral `F` is memoized at the knots on construction, so
/// each `F(ρ)` evaluation integrates over at most one knot interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedWarp {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
    quad: QuadOptions,
}

impl TabulatedWarp {
    pub fn new(knots: &[(f64, f64)], quad_tol: f64) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Input("tabulated warp needs at least two knots".into()));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::Input(format!(
                "first knot must be at rho = 0, got {}",
                knots[0].0
            )));
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Input("tabulated warp knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Input(
                "tabulated warp knots must be strictly increasing in rho".into(),
            ));
        }
        let x: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let y: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let slopes = pchip_slopes(&x, &y);
        let mut table = TabulatedWarp {
            x,
            y,
            slopes,
            cumulative: Vec::new(),
            quad: QuadOptions::with_rel_tol(quad_tol),
        };
        let mut cumulative = Vec::with_capacity(table.x.len());
        cumulative.push(0.0);
        for i in 1..table.x.len() {
            let piece = integrate(
                |s| table.value(s).exp() * s.sinh(),
                table.x[i - 1],
                table.x[i],
                &table.quad,
            )?;
            cumulative.push(cumulative[i - 1] + piece.value);
        }
        table.cumulative = cumulative;
        Ok(table)
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }

    pub fn rho_max(&self) -> f64 {
        *self.x.last().expect("at least two knots")
    }

    fn interval(&self, rho: f64) -> usize {
        match self.x.partition_point(|&k| k <= rho) {
            0 => 0,
            n => (n - 1).min(self.x.len() - 2),
        }
    }

    pub(crate) fn value(&self, rho: f64) -> f64 {
        let i = self.interval(rho);
        let h = self.x[i + 1] - self.x[i];
        let t = (rho - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub(crate) fn slope(&self, rho: f64) -> f64 {
        let i = self.interval(rho);
        let h = self.x[i + 1] - self.x[i];
        let t = (rho - self.x[i]) / h;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.y[i] + d01 * self.y[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
    }

    pub(crate) fn cumulative(&self, rho: f64) -> Result<f64> {
        let i = self.interval(rho);
        let tail = integrate(|s| self.value(s).exp() * s.sinh(), self.x[i], rho, &self.quad)?;
        Ok(self.cumulative[i] + tail.value)
    }

    /// Extremum of `f` on `[0, rho0]`: 1024 samples, then ternary search on
    /// the bracket around the best sample.
    pub(crate) fn sampled_extremum(&self, rho0: f64, maximize: bool) -> f64 {
        const N: usize = 1024;
        let sign = if maximize { 1.0 } else { -1.0 };
        let score = |r: f64| sign * self.value(r);
        let step = rho0 / (N - 1) as f64;
        let best = (0..N)
            .map(|i| (i, score(i as f64 * step)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut lo = best.saturating_sub(1) as f64 * step;
        let mut hi = ((best + 1).min(N - 1) as f64 * step).min(rho0);
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if score(m1) < score(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let refined = score(0.5 * (lo + hi));
        let sampled = score(best as f64 * step);
        sign * refined.max(sampled)
    }
}

/// Fritsch–Carlson monotone slopes, with the three-point end formula.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::warp::WarpField;

    pub(crate) fn log_cosh_table(rho_max: f64) -> WarpField {
        let n = 181;
        let knots: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let r = rho_max * i as f64 / (n - 1) as f64;
                (r, (2.0 * r.cosh()).ln())
            })
            .collect();
        WarpField::tabulated(&knots, 1e-12).unwrap()
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(TabulatedWarp::new(&[(0.0, 1.0)], 1e-10).is_err());
        assert!(TabulatedWarp::new(&[(0.1, 1.0), (0.2, 1.0)], 1e-10).is_err());
        assert!(TabulatedWarp::new(&[(0.0, 1.0), (0.5, 1.0), (0.5, 2.0)], 1e-10).is_err());
        assert!(TabulatedWarp::new(&[(0.0, 1.0), (0.5, f64::NAN)], 1e-10).is_err());
    }

    #[test]
    fn interpolates_knots_and_is_c1() {
        let w = log_cosh_table(3.0);
        let WarpField::Tabulated(t) = &w else { unreachable!() };
        for (x, y) in t.knots() {
            assert!((t.value(x) - y).abs() < 1e-14);
        }
        // slope continuity at an interior knot
        let k = t.x[40];
        let eps = 1e-9;
        assert!((t.slope(k - eps) - t.slope(k + eps)).abs() < 1e-6);
        // close to the analytic family
        for r in [0.013, 0.77, 2.31] {
            assert!((t.value(r) - (2.0 * f64::cosh(r)).ln()).abs() < 1e-5);
            // Fritsch–Carlson slopes are only first-order accurate.
            assert!((t.slope(r) - r.tanh()).abs() < 1e-2);
        }
    }

    #[test]
    fn beyond_table_is_domain_error() {
        let w = log_cosh_table(2.0);
        assert!(w.eval_f(2.0).is_ok());
        assert!(matches!(w.eval_f(2.0001), Err(Error::Domain { .. })));
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let knots = [(0.0, 0.0), (0.3, 0.0), (0.6, 1.0), (1.0, 1.0), (2.0, 3.0)];
        let t = TabulatedWarp::new(&knots, 1e-10).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=2000 {
            let v = t.value(2.0 * i as f64 / 2000.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn cumulative_matches_log_cosh() {
        let w = log_cosh_table(3.0);
        for r in [0.5f64, 1.0, 2.5] {
            let exact = ((2.0 * r).cosh() - 1.0) / 2.0;
            assert!((w.cumulative_f(r).unwrap() - exact).abs() < 1e-6 * exact);
        }
    }

    #[test]
    fn script_f_bound_sampled() {
        let w = log_cosh_table(3.0);
        let v = w.script_f_bound(1.2).unwrap();
        assert!((v - 1.2f64.cosh() / 2.0).abs() < 1e-6);
        // interior maximum of a bump
        let knots: Vec<(f64, f64)> = (0..=50)
            .map(|i| {
                let r = i as f64 * 0.04;
                (r, -(r - 0.7) * (r - 0.7))
            })
            .collect();
        let b = WarpField::tabulated(&knots, 1e-10).unwrap();
        // sup e^{-2f} at rho = 1.5 (f = -0.64); the interpolant is flat at
        // f = -0.0004 between the knots 0.68 and 0.72 around the peak.
        let expected = (2.0f64 * 0.64 - 0.0004).exp();
        assert!((b.script_f_bound(1.5).unwrap() - expected).abs() < 1e-4);
    }
}
