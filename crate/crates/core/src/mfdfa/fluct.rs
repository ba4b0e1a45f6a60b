use crate::error::{Error, Result};

/// Detrending orders accepted by [`segment_variances`].
pub const MAX_ORDER: usize = 3;

/// Profile `Y(i) = Σ_{k≤i} (g_k − ⟨g⟩)`.
///
/// The running sum is compensated so the last element stays at rounding
/// level even for long series.
pub fn profile(g: &[f64]) -> Result<Vec<f64>> {
    if g.is_empty() {
        return Err(Error::TooShort {
            what: "profile",
            needed: 1,
            got: 0,
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series".into()));
    }
    let (mean, sigma) = crate::panel::returns_moments(g);
    if crate::panel::is_degenerate_sigma(mean, sigma) {
        return Err(Error::Degenerate {
            label: "series".into(),
        });
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    Ok(g.iter()
        .map(|&v| {
            let x = v - mean;
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            sum + comp
        })
        .collect())
}

/// Orthonormal basis of polynomials of degree `0..=order` sampled at `s`
/// equally spaced points.
fn poly_basis(s: usize, order: usize) -> Vec<Vec<f64>> {
    let centre = (s as f64 - 1.0) / 2.0;
    let t: Vec<f64> = (0..s).map(|i| (i as f64 - centre) / s as f64).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut v: Vec<f64> = t.iter().map(|&x| x.powi(k as i32)).collect();
        // Two Gram–Schmidt passes keep the basis orthogonal to rounding.
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

fn residual_variance(segment: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut r = segment.to_vec();
    for b in basis {
        let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
        r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    r.iter().map(|x| x * x).sum::<f64>() / segment.len() as f64
}

/// Detrended variance of each of the `2 N_s` segments of length `s`: the
/// `N_s = ⌊N/s⌋` segments counted from the start, then the `N_s` counted
/// from the end.
///
/// Variances at rounding level relative to the profile are returned as
/// exactly 0.
pub fn segment_variances(y: &[f64], s: usize, order: usize) -> Result<Vec<f64>> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "detrending order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let n = y.len();
    if s < order + 2 || s > n / 4 {
        return Err(Error::InvalidParameter(format!(
            "scale {s} outside [{}, {}] for length {n} and order {order}",
            order + 2,
            n / 4
        )));
    }
    let basis = poly_basis(s, order);
    let ns = n / s;
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (64.0 * f64::EPSILON * peak).powi(2);
    let forward = (0..ns).map(|v| &y[v * s..(v + 1) * s]);
    let reverse = (0..ns).map(|v| &y[n - (v + 1) * s..n - v * s]);
    Ok(forward
        .chain(reverse)
        .map(|seg| {
            let var = residual_variance(seg, &basis);
            if var <= floor {
                0.0
            } else {
                var
            }
        })
        .collect())
}

/// Generalized fluctuation function `F_q(s)` over a set of scales.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationTable {
    pub scales: Vec<usize>,
    pub q_values: Vec<f64>,
    /// `f[qi][si] = F_{q}(s)`.
    pub f: Vec<Vec<f64>>,
    /// Zero-variance segments left out, per `q` and scale.
    pub excluded: Vec<Vec<usize>>,
    /// Segment count `2 N_s` per scale.
    pub segments: Vec<usize>,
    /// More than [`UNRELIABLE_FRACTION`] of the segments were left out for
    /// this `q` at some scale.
    pub unreliable: Vec<bool>,
}

pub const UNRELIABLE_FRACTION: f64 = 0.01;

impl FluctuationTable {
    /// Checks `F_q(s)` is non-decreasing in `q` at every scale, up to a
    /// relative tolerance.
    pub fn is_monotone_in_q(&self, rel_tol: f64) -> bool {
        let mut order: Vec<usize> = (0..self.q_values.len()).collect();
        order.sort_by(|&a, &b| self.q_values[a].total_cmp(&self.q_values[b]));
        (0..self.scales.len()).all(|si| {
            order.windows(2).all(|w| {
                let (lo, hi) = (self.f[w[0]][si], self.f[w[1]][si]);
                hi >= lo * (1.0 - rel_tol)
            })
        })
    }

    /// Long-format rows `(s, q, F)`.
    pub fn rows(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::with_capacity(self.scales.len() * self.q_values.len());
        for (si, &s) in self.scales.iter().enumerate() {
            for (qi, &q) in self.q_values.iter().enumerate() {
                out.push((s, q, self.f[qi][si]));
            }
        }
        out
    }
}

fn log_mean_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = logs.iter().map(|&l| (l - max).exp()).sum();
    max + (sum / logs.len() as f64).ln()
}

/// `F_q(s) = {(1/2N_s) Σ_ν [F²(s,ν)]^{q/2}}^{1/q}`, with `q = 0` taken as the
/// logarithmic average `exp{(1/4N_s) Σ_ν ln F²(s,ν)}`.
///
/// Zero variances are skipped for `q ≤ 0`, where they would diverge.
pub fn fluctuation(
    scales: &[usize],
    variances: &[Vec<f64>],
    q_values: &[f64],
) -> Result<FluctuationTable> {
    if scales.len() != variances.len() {
        return Err(Error::InvalidParameter(format!(
            "{} scales but {} variance sets",
            scales.len(),
            variances.len()
        )));
    }
    if q_values.is_empty() {
        return Err(Error::InvalidParameter("empty q grid".into()));
    }
    if q_values.iter().any(|q| !q.is_finite()) {
        return Err(Error::InvalidParameter("q values must be finite".into()));
    }
    for vars in variances {
        if vars.is_empty() {
            return Err(Error::InvalidParameter("scale without segments".into()));
        }
        if vars.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::NonFinite("segment variances".into()));
        }
    }

    let mut f = vec![vec![0.0; scales.len()]; q_values.len()];
    let mut excluded = vec![vec![0usize; scales.len()]; q_values.len()];
    let mut unreliable = vec![false; q_values.len()];
    for (si, vars) in variances.iter().enumerate() {
        let ln_var: Vec<f64> = vars.iter().map(|v| v.ln()).collect();
        let positive: Vec<f64> = ln_var.iter().copied().filter(|l| l.is_finite()).collect();
        let zeros = vars.len() - positive.len();
        for (qi, &q) in q_values.iter().enumerate() {
            let value = if q > 0.0 {
                let logs: Vec<f64> = ln_var.iter().map(|&l| 0.5 * q * l).collect();
                (log_mean_exp(&logs) / q).exp()
            } else {
                excluded[qi][si] = zeros;
                if zeros as f64 > UNRELIABLE_FRACTION * vars.len() as f64 {
                    unreliable[qi] = true;
                }
                if positive.is_empty() {
                    return Err(Error::DegenerateFit(format!(
                        "every segment at scale {} has zero variance",
                        scales[si]
                    )));
                }
                if q == 0.0 {
                    (0.5 * positive.iter().sum::<f64>() / positive.len() as f64).exp()
                } else {
                    let logs: Vec<f64> = positive.iter().map(|&l| 0.5 * q * l).collect();
                    (log_mean_exp(&logs) / q).exp()
                }
            };
            f[qi][si] = value;
        }
    }
    Ok(FluctuationTable {
        scales: scales.to_vec(),
        q_values: q_values.to_vec(),
        f,
        excluded,
        segments: variances.iter().map(Vec::len).collect(),
        unreliable,
    })
}

/// Fitted generalized Hurst exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct HqCurve {
    pub q_values: Vec<f64>,
    pub h: Vec<f64>,
    pub r2: Vec<f64>,
    /// `h(2)`.
    pub hurst: f64,
    /// `h(q_min) − h(q_max)`.
    pub delta_h: f64,
    pub unreliable: Vec<bool>,
}

impl HqCurve {
    pub fn h_at(&self, q: f64) -> Option<f64> {
        self.q_values
            .iter()
            .position(|&x| (x - q).abs() < 1e-12)
            .map(|i| self.h[i])
    }

    /// Whether `h` is non-increasing in `q` up to `tol`.
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        let mut order: Vec<usize> = (0..self.q_values.len()).collect();
        order.sort_by(|&a, &b| self.q_values[a].total_cmp(&self.q_values[b]));
        order.windows(2).all(|w| self.h[w[1]] <= self.h[w[0]] + tol)
    }
}

/// Ordinary least squares `y = a + b x`; returns `(b, r²)`.
pub(crate) fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    (slope, r2)
}

/// Slope of `ln F_q(s)` against `ln s` for each `q`, over the scales in
/// `fit_range` (inclusive; all scales when `None`).
pub fn fit_hq(table: &FluctuationTable, fit_range: Option<(usize, usize)>) -> Result<HqCurve> {
    let (lo, hi) = fit_range.unwrap_or((0, usize::MAX));
    let picked: Vec<usize> = (0..table.scales.len())
        .filter(|&i| (lo..=hi).contains(&table.scales[i]))
        .collect();
    if picked.len() < 4 {
        return Err(Error::TooShort {
            what: "h(q) fit (scales)",
            needed: 4,
            got: picked.len(),
        });
    }
    let x: Vec<f64> = picked
        .iter()
        .map(|&i| (table.scales[i] as f64).ln())
        .collect();
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::DegenerateFit("all fit scales are equal".into()));
    }
    let mut h = Vec::with_capacity(table.q_values.len());
    let mut r2 = Vec::with_capacity(table.q_values.len());
    for (qi, &q) in table.q_values.iter().enumerate() {
        let y: Vec<f64> = picked.iter().map(|&i| table.f[qi][i].ln()).collect();
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateFit(format!(
                "F_q(s) is zero or non-finite for q = {q}"
            )));
        }
        let (slope, fit) = ols(&x, &y);
        h.push(slope);
        r2.push(fit);
    }
    let at = |q: f64| table.q_values.iter().position(|&v| v == q);
    let hurst = at(2.0).map(|i| h[i]).ok_or_else(|| {
        Error::InvalidParameter("the q grid must contain 2 for the Hurst exponent".into())
    })?;
    let (mut i_min, mut i_max) = (0, 0);
    for (i, &q) in table.q_values.iter().enumerate() {
        if q < table.q_values[i_min] {
            i_min = i;
        }
        if q > table.q_values[i_max] {
            i_max = i;
        }
    }
    Ok(HqCurve {
        q_values: table.q_values.clone(),
        delta_h: h[i_min] - h[i_max],
        h,
        r2,
        hurst,
        unreliable: table.unreliable.clone(),
    })
}
