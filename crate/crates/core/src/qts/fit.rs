use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qts::RateSpectrum;
use crate::scalar::Real;

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
/// Local maxima below this fraction of the global maximum are ignored.
const PEAK_THRESHOLD: f64 = 0.05;
/// Fit window half-width around the outer peaks, in linewidths.
const WINDOW_WIDTHS: f64 = 2.5;
const MAX_ITERATIONS: usize = 500;

/// One fitted Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub centroid: T,
    /// One-sigma uncertainty of the centroid from the fit covariance.
    pub centroid_err: T,
    /// Full width at half maximum.
    pub width: T,
    pub amplitude: T,
}

/// Multi-Gaussian fit to the lowest-energy peaks of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakFit<T> {
    /// Ascending in centroid.
    pub peaks: Vec<Peak<T>>,
    /// Set when fewer distinct maxima than requested were found, or two
    /// fitted centroids are closer than the linewidth.
    pub unresolved: bool,
    pub residual_norm: T,
    pub iterations: usize,
}

impl<T: Real> PeakFit<T> {
    /// Difference of the two lowest centroids with uncertainties combined in
    /// quadrature.
    pub fn gap(&self) -> Option<(T, T)> {
        let (a, b) = (self.peaks.first()?, self.peaks.get(1)?);
        let err = (a.centroid_err * a.centroid_err + b.centroid_err * b.centroid_err).sqrt();
        Some((b.centroid - a.centroid, err))
    }
}

/// Fits `expected_count` Gaussians to the lowest-energy peaks of a rate
/// spectrum, using its linewidth as the resolution scale.
pub fn fit_peaks<T: Real>(spectrum: &RateSpectrum<T>, expected_count: usize) -> Result<PeakFit<T>> {
    fit_gaussians(&spectrum.eps_p, &spectrum.gamma_norm, expected_count, spectrum.linewidth)
}

/// Nonlinear least-squares multi-Gaussian fit on samples `(x, y)`.
///
/// `linewidth` (FWHM) sets the initial widths, the fit window and the
/// resolvability criterion; the grid spacing must be at most a fifth of it.
pub fn fit_gaussians<T: Real>(x: &[T], y: &[T], expected_count: usize, linewidth: T) -> Result<PeakFit<T>> {
    if expected_count == 0 {
        return Err(Error::validation("expected peak count must be at least 1"));
    }
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::validation("peak fit needs matching x/y arrays with at least 3 samples"));
    }
    if !(linewidth > T::zero()) {
        return Err(Error::validation("linewidth must be positive"));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::validation("peak fit grid must be strictly increasing"));
    }
    let max_step = x.windows(2).fold(T::zero(), |a, w| a.max(w[1] - w[0]));
    if max_step > linewidth / T::lit(5.0) * (T::one() + T::tol(1e-9)) {
        return Err(Error::validation(format!(
            "grid spacing {} GHz does not resolve the linewidth {} GHz (need at least 5 samples per width)",
            max_step.to_f64_lossy(),
            linewidth.to_f64_lossy()
        )));
    }

    let ymax = y.iter().fold(T::zero(), |a, &b| a.max(b));
    if !(ymax > T::zero()) {
        return Err(Error::FitFailed { residual_norm: 0.0, reason: "spectrum has no positive signal".into() });
    }
    let maxima = local_maxima(y, ymax * T::lit(PEAK_THRESHOLD));
    if maxima.is_empty() {
        return Err(Error::FitFailed { residual_norm: 0.0, reason: "no peak found".into() });
    }
    let mut unresolved = maxima.len() < expected_count;
    let chosen: Vec<usize> = maxima.iter().copied().take(expected_count).collect();

    // Initial guesses; missing peaks are split off the last resolved one.
    let sigma0 = linewidth / T::lit(FWHM_PER_SIGMA);
    let mut guess: Vec<(T, T, T)> = chosen.iter().map(|&k| (y[k], x[k], sigma0)).collect();
    while guess.len() < expected_count {
        let (a, mu, s) = *guess.last().expect("at least one peak");
        let shift = linewidth / T::lit(4.0);
        let last = guess.len() - 1;
        guess[last] = (a, mu - shift, s);
        guess.push((a, mu + shift, s));
    }

    let reach = linewidth * T::lit(WINDOW_WIDTHS);
    let first = guess.iter().fold(guess[0].1, |a, g| a.min(g.1));
    let last = guess.iter().fold(guess[0].1, |a, g| a.max(g.1));
    let lo = first - reach;
    let mut hi = last + reach;
    if let Some(&next) = maxima.get(expected_count) {
        hi = hi.min((last + x[next]) / T::lit(2.0));
    }
    let window: Vec<usize> = (0..x.len()).filter(|&k| x[k] >= lo && x[k] <= hi).collect();
    let p = 3 * expected_count;
    if window.len() <= p {
        return Err(Error::validation("too few samples inside the fit window"));
    }
    let xs: Vec<T> = window.iter().map(|&k| x[k]).collect();
    let ys: Vec<T> = window.iter().map(|&k| y[k]).collect();

    let mut params = DVector::from_iterator(p, guess.iter().flat_map(|&(a, mu, s)| [a, mu, s]));
    let (params, cov, rss, iterations) = levenberg_marquardt(&xs, &ys, &mut params)?;

    let mut peaks: Vec<Peak<T>> = (0..expected_count)
        .map(|k| Peak {
            amplitude: params[3 * k],
            centroid: params[3 * k + 1],
            centroid_err: cov[(3 * k + 1, 3 * k + 1)].max(T::zero()).sqrt(),
            width: params[3 * k + 2].abs() * T::lit(FWHM_PER_SIGMA),
        })
        .collect();
    peaks.sort_by(|a, b| a.centroid.partial_cmp(&b.centroid).expect("finite centroids"));
    if peaks.windows(2).any(|w| w[1].centroid - w[0].centroid < linewidth) {
        unresolved = true;
    }
    Ok(PeakFit { peaks, unresolved, residual_norm: rss.sqrt(), iterations })
}

/// Indices of interior local maxima at or above `floor`, ascending in x.
fn local_maxima<T: Real>(y: &[T], floor: T) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 1;
    while k + 1 < y.len() {
        if y[k] > y[k - 1] && y[k] >= floor {
            // Walk across a flat top.
            let mut j = k;
            while j + 1 < y.len() && y[j + 1] == y[k] {
                j += 1;
            }
            if j + 1 < y.len() && y[j + 1] < y[k] {
                out.push((k + j) / 2);
            }
            k = j + 1;
        } else {
            k += 1;
        }
    }
    out
}

fn model<T: Real>(x: T, p: &DVector<T>) -> T {
    (0..p.len() / 3).fold(T::zero(), |acc, k| {
        let (a, mu, s) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
        let z = (x - mu) / s;
        acc + a * (-(z * z) / T::lit(2.0)).exp()
    })
}

fn jacobian<T: Real>(xs: &[T], p: &DVector<T>) -> DMatrix<T> {
    let mut j = DMatrix::zeros(xs.len(), p.len());
    for (r, &x) in xs.iter().enumerate() {
        for k in 0..p.len() / 3 {
            let (a, mu, s) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
            let z = (x - mu) / s;
            let e = (-(z * z) / T::lit(2.0)).exp();
            j[(r, 3 * k)] = e;
            j[(r, 3 * k + 1)] = a * e * z / s;
            j[(r, 3 * k + 2)] = a * e * z * z / s;
        }
    }
    j
}

fn rss<T: Real>(xs: &[T], ys: &[T], p: &DVector<T>) -> T {
    xs.iter().zip(ys).fold(T::zero(), |acc, (&x, &y)| {
        let r = y - model(x, p);
        acc + r * r
    })
}

type LmOutput<T> = (DVector<T>, DMatrix<T>, T, usize);

fn levenberg_marquardt<T: Real>(xs: &[T], ys: &[T], params: &mut DVector<T>) -> Result<LmOutput<T>> {
    let mut lambda = T::lit(1e-3);
    let mut cost = rss(xs, ys, params);
    let scale = ys.iter().fold(T::zero(), |a, &b| a + b * b).max(T::default_epsilon());
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..MAX_ITERATIONS {
        iterations = it + 1;
        let j = jacobian(xs, params);
        let r = DVector::from_iterator(xs.len(), xs.iter().zip(ys).map(|(&x, &y)| y - model(x, params)));
        let jtj = j.transpose() * &j;
        let jtr = j.transpose() * r;
        if jtr.amax() <= T::tol(1e-15) * scale.sqrt() {
            converged = true;
            break;
        }
        let mut stepped = false;
        while lambda < T::lit(1e12) {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += lambda * jtj[(d, d)].max(T::tol(1e-12));
            }
            let Some(chol) = a.cholesky() else {
                lambda *= T::lit(10.0);
                continue;
            };
            let delta = chol.solve(&jtr);
            let trial = &*params + &delta;
            let trial_cost = rss(xs, ys, &trial);
            if trial_cost.is_finite_value() && trial_cost <= cost {
                let rel_step = delta.norm() / (params.norm() + T::tol(1e-12));
                let improvement = cost - trial_cost;
                *params = trial;
                cost = trial_cost;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                stepped = true;
                if rel_step < T::tol(1e-12) || improvement <= T::tol(1e-15) * scale {
                    converged = true;
                }
                break;
            }
            lambda *= T::lit(10.0);
        }
        if !stepped {
            // No descent direction left: at a minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged || !cost.is_finite_value() {
        return Err(Error::FitFailed {
            residual_norm: cost.sqrt().to_f64_lossy(),
            reason: format!("no convergence after {iterations} iterations"),
        });
    }
    for k in 0..params.len() / 3 {
        params[3 * k + 2] = params[3 * k + 2].abs();
    }
    let j = jacobian(xs, params);
    let dof = xs.len() - params.len();
    let s2 = cost / T::from_usize(dof).expect("dof fits");
    let jtj = j.transpose() * &j;
    let cov = jtj
        .try_inverse()
        .ok_or_else(|| Error::FitFailed {
            residual_norm: cost.sqrt().to_f64_lossy(),
            reason: "singular normal matrix; parameters not identifiable".into(),
        })?
        * s2;
    Ok((params.clone(), cov, cost, iterations))
}
