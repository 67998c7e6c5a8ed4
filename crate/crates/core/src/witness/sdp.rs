//! Largest witness expectation over density matrices whose populations of
//! two orthonormal states lie in given intervals.
//!
//! The program is `max ⟨W,X⟩` subject to `Tr X = 1`, `lo_k ≤ ⟨ψ_k|X|ψ_k⟩ ≤ hi_k`
//! and `X ⪰ 0`. Its dual is `min y0 + Σ (hi_k u_k - lo_k l_k)` subject to
//! `Z = y0 I + Σ (u_k - l_k) |ψ_k⟩⟨ψ_k| - W ⪰ 0`, `u, l ≥ 0`; any dual
//! feasible point is an upper bound. In the basis `[ψ_1, ψ_2, C]` with `C`
//! diagonalizing the compressed witness, `Z ⪰ 0` reduces to positive
//! diagonal `y0 - ω_i` plus a 2×2 Schur complement, so a log-barrier
//! path-following method on at most five dual variables costs `O(dim)` per
//! Newton step.

use nalgebra::DMatrix;

use super::WitnessOperator;
use crate::entangle::Band;
use crate::error::{Error, InfeasibilityCertificate, Result};
use crate::linalg::{c, cabs, eigh, CMatrix, CVector};
use crate::scalar::Real;
use crate::spectra::Spectrum;

const MAX_OUTER: usize = 80;
const MAX_NEWTON: usize = 100;
const MU_SHRINK: f64 = 0.2;
/// Target `(dim + slacks)·μ`, the duality gap on the central path.
const GAP_TARGET: f64 = 1e-7;
/// Slack allowed before constraints count as contradictory.
const FEASIBILITY_TOL: f64 = 1e-12;
/// Lower bounds summing within this of one pin the state to `span{ψ_1, ψ_2}`.
const FACE_TOL: f64 = 1e-15;
/// Positive margin added when a dual point is built by hand.
const LIFT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
}

/// Dual point behind a bound, with the residuals of the recovered primal.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate<T> {
    pub trace_multiplier: T,
    pub upper_multipliers: [T; 2],
    pub lower_multipliers: [T; 2],
    /// Smallest eigenvalue among the blocks proving `Z ⪰ 0`; positive for a
    /// valid certificate.
    pub slack_min_eigenvalue: T,
    /// `|Tr X - 1|` of the recovered primal.
    pub trace_residual: T,
    /// Largest population-interval violation of the recovered primal.
    pub population_residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpResult<T> {
    /// Dual objective: no state satisfying the constraints does better.
    pub upper_bound: T,
    /// Witness expectation of the recovered primal state.
    pub primal_value: T,
    pub duality_gap: T,
    pub status: SdpStatus,
    pub certificate: DualCertificate<T>,
    pub iterations: usize,
}

impl<T: Real> SdpResult<T> {
    /// A negative bound certifies entanglement across the witness's cut.
    pub fn certified(&self) -> bool {
        self.upper_bound < T::zero()
    }
}

/// Bound for `w` with the ground and first excited states of `spectrum`
/// constrained to populations `p1 ± err` and `p2 ± err`.
pub fn sdp_upper_bound<T: Real>(
    w: &WitnessOperator<T>,
    spectrum: &Spectrum<T>,
    p1: Band<T>,
    p2: Band<T>,
) -> Result<SdpResult<T>> {
    if spectrum.len() != w.matrix().nrows() {
        return Err(Error::validation("spectrum and witness dimensions differ"));
    }
    if spectrum.len() < 3 {
        return Err(Error::validation("need at least three levels"));
    }
    sdp_upper_bound_states(
        w.matrix(),
        &spectrum.state(0),
        &spectrum.state(1),
        [(p1.value - p1.err, p1.value + p1.err), (p2.value - p2.err, p2.value + p2.err)],
    )
}

/// Same program for an arbitrary Hermitian `w` and orthonormal `psi1`,
/// `psi2` with population intervals `bounds[k] = (lo_k, hi_k)`.
/// Bounds at or beyond `[0, 1]` are inactive.
pub fn sdp_upper_bound_states<T: Real>(
    w: &CMatrix<T>,
    psi1: &CVector<T>,
    psi2: &CVector<T>,
    bounds: [(T, T); 2],
) -> Result<SdpResult<T>> {
    let dim = w.nrows();
    if dim < 3 || psi1.len() != dim || psi2.len() != dim {
        return Err(Error::validation("witness and states must share a dimension of at least 3"));
    }
    for (lo, hi) in bounds {
        if !lo.is_finite_value() || !hi.is_finite_value() {
            return Err(Error::validation("population bounds must be finite"));
        }
    }
    for psi in [psi1, psi2] {
        if (psi.norm() - T::one()).abs() > T::tol(1e-8) {
            return Err(Error::validation("constraint states must be normalized"));
        }
    }
    if cabs(psi1.dotc(psi2)) > T::tol(1e-8) {
        return Err(Error::validation("constraint states must be orthogonal"));
    }
    let limits = Limits::new(bounds)?;
    let compressed = Compressed::new(w, psi1, psi2)?;
    compressed.solve(&limits)
}

/// Clipped population intervals.
struct Limits<T> {
    lo: [T; 2],
    hi: [T; 2],
}

impl<T: Real> Limits<T> {
    fn new(bounds: [(T, T); 2]) -> Result<Self> {
        let tol = T::tol(FEASIBILITY_TOL);
        let fail = |lower: [f64; 2], upper: [f64; 2], trace: f64, violation: T, reason: String| {
            Err(Error::Infeasible(InfeasibilityCertificate {
                lower_multipliers: lower,
                upper_multipliers: upper,
                trace_multiplier: trace,
                violation: violation.to_f64_lossy(),
                reason,
            }))
        };
        let unit = |k: usize| {
            let mut e = [0.0; 2];
            e[k] = 1.0;
            e
        };
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if hi < -tol {
                return fail([0.0; 2], unit(k), 0.0, -hi, format!("upper bound {} on P{} is negative", hi.to_f64_lossy(), k + 1));
            }
            if lo > T::one() + tol {
                return fail(unit(k), [0.0; 2], -1.0, lo - T::one(), format!("lower bound on P{} exceeds one", k + 1));
            }
            if lo > hi + tol {
                return fail(unit(k), unit(k), 0.0, lo - hi, format!("empty interval for P{}", k + 1));
            }
        }
        let mut lo = bounds.map(|b| b.0.max(T::zero()).min(T::one()));
        let hi = bounds.map(|b| b.1.max(T::zero()).min(T::one()));
        for k in 0..2 {
            lo[k] = lo[k].min(hi[k]);
        }
        let total = lo[0] + lo[1];
        if total > T::one() + tol {
            return fail([1.0; 2], [0.0; 2], -1.0, total - T::one(), "lower bounds on P1 and P2 sum above one".into());
        }
        if total > T::one() {
            // Within rounding of the face; relax so the sum is exactly one.
            lo[0] /= total;
            lo[1] = T::one() - lo[0];
        }
        Ok(Self { lo, hi })
    }

    fn on_face(&self) -> bool {
        (T::one() - self.lo[0]) - self.lo[1] <= T::tol(FACE_TOL)
    }
}

/// `W` in the basis `[ψ_1, ψ_2, C]`: span block, coupling `B = -W_sc U_c`
/// and the spectrum `ω` of the complement block.
struct Compressed<T: Real> {
    wss: CMatrix<T>,
    b: CMatrix<T>,
    omega: Vec<T>,
}

/// Householder vector and factor with `(I - τ v v†) x = α e_0`, `|α| = |x|`.
fn reflector<T: Real>(x: &CVector<T>) -> (CVector<T>, T) {
    let x0 = x[0];
    let phase = if cabs(x0) > T::zero() { x0 / c(cabs(x0)) } else { c(T::one()) };
    let mut v = x.clone();
    v[0] += phase * c(x.norm());
    let vv = v.norm_squared();
    (v, if vv > T::zero() { T::lit(2.0) / vv } else { T::zero() })
}

/// `W ← H W H` for `H = I - τ v v†`.
fn reflect_both<T: Real>(w: &mut CMatrix<T>, v: &CVector<T>, tau: T) {
    let p = &*w * v;
    let vwv = v.dotc(&p);
    let one = c(T::one());
    w.gerc(c(-tau), v, &p, one);
    w.gerc(c(-tau), &p, v, one);
    w.gerc(c(tau * tau) * vwv, v, v, one);
}

/// Smallest eigenvalue of a Hermitian matrix of size at most two.
fn small_min_eig<T: Real>(m: &CMatrix<T>) -> T {
    match m.nrows() {
        0 => T::max_value().expect("bounded type"),
        1 => m[(0, 0)].re,
        _ => {
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let half = (a - d) / T::lit(2.0);
            (a + d) / T::lit(2.0) - (half * half + m[(0, 1)].norm_sqr()).sqrt()
        }
    }
}

/// Inverse and log-determinant of a positive definite Hermitian matrix of
/// size one or two; `None` when it is not positive definite.
fn small_inverse<T: Real>(m: &CMatrix<T>) -> Option<(CMatrix<T>, T)> {
    let a = m[(0, 0)].re;
    if !(a > T::zero()) {
        return None;
    }
    if m.nrows() == 1 {
        return Some((CMatrix::from_element(1, 1, c(T::one() / a)), a.ln()));
    }
    let (b, d) = (m[(0, 1)], m[(1, 1)].re);
    let det = a * d - b.norm_sqr();
    if !(det > T::zero()) || !det.is_finite_value() {
        return None;
    }
    let inv = CMatrix::from_row_slice(2, 2, &[c(d / det), -b / c(det), -b.conj() / c(det), c(a / det)]);
    Some((inv, det.ln()))
}

fn small_max_eig<T: Real>(m: &CMatrix<T>) -> T {
    -small_min_eig(&(-m))
}

fn select<T: Real>(m: &CMatrix<T>, rows: &[usize], cols: &[usize]) -> CMatrix<T> {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

impl<T: Real> Compressed<T> {
    fn new(w: &CMatrix<T>, psi1: &CVector<T>, psi2: &CVector<T>) -> Result<Self> {
        let dim = w.nrows();
        let psi1 = psi1.unscale(psi1.norm());
        let psi2 = psi2.unscale(psi2.norm());
        let mut wh = w.clone();
        let (v1, t1) = reflector(&psi1);
        reflect_both(&mut wh, &v1, t1);
        let p2 = &psi2 - &v1 * (c(t1) * v1.dotc(&psi2));
        let (v2s, t2) = reflector(&p2.rows(1, dim - 1).into_owned());
        let mut v2 = CVector::zeros(dim);
        v2.rows_mut(1, dim - 1).copy_from(&v2s);
        reflect_both(&mut wh, &v2, t2);
        let wcc = wh.view((2, 2), (dim - 2, dim - 2));
        let wcc = (wcc + wcc.adjoint()).scale(T::lit(0.5));
        let (omega, uc) = eigh(&wcc)?;
        let b = -(wh.view((0, 2), (2, dim - 2)) * uc);
        let mut wss = wh.view((0, 0), (2, 2)).into_owned();
        wss[(0, 0)] = c(wss[(0, 0)].re);
        wss[(1, 1)] = c(wss[(1, 1)].re);
        wss[(1, 0)] = wss[(0, 1)].conj();
        Ok(Self { wss, b, omega })
    }

    fn omega_max(&self) -> T {
        *self.omega.last().expect("nonempty complement")
    }

    /// Smallest eigenvalue certificate for `Z = y0 I + diag(ν) - W`, or
    /// `None` when `Z` is not positive definite.
    fn slack_min(&self, y0: T, nu: [T; 2]) -> Option<T> {
        let d_min = y0 - self.omega_max();
        if !(d_min > T::zero()) {
            return None;
        }
        let mut s = -self.wss.clone();
        for k in 0..2 {
            s[(k, k)] += c(y0 + nu[k]);
        }
        for (i, &om) in self.omega.iter().enumerate() {
            let inv = T::one() / (y0 - om);
            for r in 0..2 {
                for q in 0..2 {
                    s[(r, q)] -= self.b[(r, i)] * self.b[(q, i)].conj() * c(inv);
                }
            }
        }
        let lam = small_min_eig(&s);
        (lam > T::zero()).then(|| lam.min(d_min))
    }

    fn solve(&self, limits: &Limits<T>) -> Result<SdpResult<T>> {
        if limits.on_face() {
            return Ok(self.solve_face(limits));
        }
        let span: Vec<usize> = (0..2).filter(|&k| limits.hi[k] > T::zero()).collect();
        if span.is_empty() {
            return Ok(self.solve_complement());
        }
        self.solve_barrier(limits, &span)
    }

    /// Lower bounds sum to one: the state lives in `span{ψ_1, ψ_2}` with
    /// populations fixed at `(t, 1 - t)`.
    fn solve_face(&self, limits: &Limits<T>) -> SdpResult<T> {
        let [lo1, lo2] = limits.lo;
        let t = lo1;
        let (a, d, off) = (self.wss[(0, 0)].re, self.wss[(1, 1)].re, cabs(self.wss[(0, 1)]));
        let primal = t * a + (T::one() - t) * d + T::lit(2.0) * off * (t * (T::one() - t)).sqrt();
        let scale = T::one().max(a.abs()).max(d.abs()).max(off);
        let mut margin = T::tol(LIFT_MARGIN) * scale;
        let b_sq = self.b.norm_squared();
        for _ in 0..20 {
            // Dual of the 2×2 face problem: diag(η) - W_ss ⪰ 0, cost t η1 + (1-t) η2.
            let (e1, e2) = if off == T::zero() {
                (a + margin, d + margin)
            } else if t >= T::one() {
                (a + margin, d + off * off / margin + margin)
            } else if t <= T::zero() {
                (a + off * off / margin + margin, d + margin)
            } else {
                let ratio = ((T::one() - t) / t).sqrt();
                (a + off * ratio + margin, d + off / ratio + margin)
            };
            let mut eta_block = -self.wss.clone();
            eta_block[(0, 0)] += c(e1);
            eta_block[(1, 1)] += c(e2);
            let gap = small_min_eig(&eta_block);
            if gap > T::zero() {
                let y0 = (self.omega_max() + T::lit(2.0) * b_sq / gap + margin).max(e1).max(e2);
                let eta = [e1, e2];
                let mut lower = [T::zero(); 2];
                let mut nu = [T::zero(); 2];
                for k in 0..2 {
                    if limits.lo[k] > T::zero() {
                        lower[k] = y0 - eta[k];
                        nu[k] = -lower[k];
                    }
                }
                if let Some(slack) = self.slack_min(y0, nu) {
                    // y0 - Σ lo_k l_k, arranged so the large y0 cancels exactly on the face.
                    let bound = y0 * ((T::one() - lo1) - lo2) + lo1 * (y0 - lower[0]) + lo2 * (y0 - lower[1]);
                    let bound = bound.max(primal);
                    return SdpResult {
                        upper_bound: bound,
                        primal_value: primal,
                        duality_gap: bound - primal,
                        status: SdpStatus::Optimal,
                        certificate: DualCertificate {
                            trace_multiplier: y0,
                            upper_multipliers: [T::zero(); 2],
                            lower_multipliers: lower,
                            slack_min_eigenvalue: slack,
                            trace_residual: T::zero(),
                            population_residual: T::zero(),
                        },
                        iterations: 0,
                    };
                }
            }
            margin *= T::lit(10.0);
        }
        unreachable!("face certificate exists for a large enough margin")
    }

    /// Both populations pinned to zero: the state lives in the complement.
    fn solve_complement(&self) -> SdpResult<T> {
        let primal = self.omega_max();
        let scale = T::one().max(primal.abs());
        let y0 = primal + T::tol(LIFT_MARGIN) * scale;
        let lift = self.lift(y0, &[], &[], None);
        self.finish_lift(y0, [T::zero(); 2], [T::zero(); 2], primal, lift, SdpStatus::Optimal, 0, T::zero(), T::zero())
    }

    /// Dual variables `ν_k` for directions dropped from the barrier problem
    /// such that the full slack stays positive semidefinite.
    fn lift(&self, y0: T, span: &[usize], nu_span: &[T], s_inv: Option<&CMatrix<T>>) -> [T; 2] {
        let dropped: Vec<usize> = (0..2).filter(|k| !span.contains(k)).collect();
        let mut nu = [T::zero(); 2];
        for (i, &k) in span.iter().enumerate() {
            nu[k] = nu_span[i];
        }
        if dropped.is_empty() {
            return nu;
        }
        let cdim = self.omega.len();
        let inv_d: Vec<T> = self.omega.iter().map(|&om| T::one() / (y0 - om)).collect();
        let b_r = select(&self.b, span, &(0..cdim).collect::<Vec<_>>());
        // Columns of Z coupling each dropped direction to the kept space.
        let solve = |k: usize| -> (CVector<T>, CVector<T>, CVector<T>, CVector<T>) {
            let xs = CVector::from_fn(span.len(), |j, _| -self.wss[(span[j], k)]);
            let xc = CVector::from_fn(cdim, |i, _| self.b[(k, i)].conj());
            let dx = CVector::from_fn(cdim, |i, _| xc[i] * c(inv_d[i]));
            let zs = match s_inv {
                Some(si) => si * (&xs - &b_r * &dx),
                None => CVector::zeros(0),
            };
            let zc = CVector::from_fn(cdim, |i, _| {
                let coupled = (0..span.len()).fold(c(T::zero()), |acc, j| acc + b_r[(j, i)].conj() * zs[j]);
                (xc[i] - coupled) * c(inv_d[i])
            });
            (xs, xc, zs, zc)
        };
        let cols: Vec<_> = dropped.iter().map(|&k| solve(k)).collect();
        let m = CMatrix::from_fn(dropped.len(), dropped.len(), |p, q| {
            let (xs, xc, _, _) = &cols[p];
            let (_, _, zs, zc) = &cols[q];
            xs.dotc(zs) + xc.dotc(zc) + self.wss[(dropped[p], dropped[q])]
        });
        let m = (&m + m.adjoint()).scale(T::lit(0.5));
        let scale = T::one().max(small_max_eig(&m).abs());
        let needed = small_max_eig(&m) - y0 + T::tol(LIFT_MARGIN) * scale;
        for &k in &dropped {
            nu[k] = needed.max(T::zero());
        }
        nu
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_lift(
        &self,
        y0: T,
        upper: [T; 2],
        lower: [T; 2],
        primal: T,
        nu: [T; 2],
        status: SdpStatus,
        iterations: usize,
        trace_residual: T,
        population_residual: T,
    ) -> SdpResult<T> {
        let mut upper = upper;
        let mut lower = lower;
        for k in 0..2 {
            let have = upper[k] - lower[k];
            if nu[k] > have {
                upper[k] += nu[k] - have;
            } else if nu[k] < have {
                lower[k] += have - nu[k];
            }
        }
        let mut y0 = y0;
        let mut slack = self.slack_min(y0, nu);
        let mut bump = T::tol(LIFT_MARGIN) * T::one().max(y0.abs());
        while slack.is_none() && bump.is_finite_value() {
            y0 += bump;
            bump *= T::lit(10.0);
            slack = self.slack_min(y0, nu);
        }
        SdpResult {
            upper_bound: y0,
            primal_value: primal,
            duality_gap: y0 - primal,
            status,
            certificate: DualCertificate {
                trace_multiplier: y0,
                upper_multipliers: upper,
                lower_multipliers: lower,
                slack_min_eigenvalue: slack.unwrap_or(T::zero()),
                trace_residual,
                population_residual,
            },
            iterations,
        }
    }

    fn solve_barrier(&self, limits: &Limits<T>, span: &[usize]) -> Result<SdpResult<T>> {
        let eq_tol = T::tol(FEASIBILITY_TOL);
        let mut vars = Vec::new();
        for (j, &k) in span.iter().enumerate() {
            let (lo, hi) = (limits.lo[k], limits.hi[k]);
            let has_lo = lo > T::zero();
            let has_hi = hi < T::one();
            if has_lo && has_hi && hi - lo <= eq_tol {
                let mid = (lo + hi) / T::lit(2.0);
                vars.push(Var { dir: j, sign: T::one(), cost: mid, barrier: false, side: Side::Equal(k) });
                continue;
            }
            if has_hi {
                vars.push(Var { dir: j, sign: T::one(), cost: hi, barrier: true, side: Side::Upper(k) });
            }
            if has_lo {
                vars.push(Var { dir: j, sign: -T::one(), cost: -lo, barrier: true, side: Side::Lower(k) });
            }
        }
        let b_r = select(&self.b, span, &(0..self.omega.len()).collect::<Vec<_>>());
        let problem = Barrier {
            wss: select(&self.wss, span, span),
            b: b_r,
            omega: &self.omega,
            vars,
        };
        let w_bound = self.wss.norm() + self.b.norm() + self.omega.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        let mut y = vec![T::one(); problem.vars.len() + 1];
        for (i, v) in problem.vars.iter().enumerate() {
            if !v.barrier {
                y[i + 1] = T::zero();
            }
        }
        y[0] = w_bound + T::lit(2.0) + T::from_usize(problem.vars.len()).expect("small");
        let slacks = problem.vars.iter().filter(|v| v.barrier).count();
        let dim_r = self.omega.len() + span.len();
        let m_total = T::from_usize(dim_r + slacks).expect("small");
        let target = T::tol(GAP_TARGET);
        let mut mu = T::one();
        let mut iterations = 0;
        let mut status = SdpStatus::MaxIterations;
        for _ in 0..MAX_OUTER {
            for _ in 0..MAX_NEWTON {
                iterations += 1;
                let ev = problem.eval(&y).expect("iterate stays interior");
                let (g, h) = problem.newton(&y, mu, &ev);
                let step = match h.clone().cholesky() {
                    Some(ch) => ch.solve(&g),
                    None => match h.lu().solve(&g) {
                        Some(s) => s,
                        None => break,
                    },
                };
                let lam2 = g.dot(&step);
                if lam2 / T::lit(2.0) < T::tol(1e-10) {
                    break;
                }
                // Merit change split so the large cost/μ term is differenced exactly.
                let log0 = problem.log_barrier(&y).expect("interior");
                let cost_slope = problem.cost_direction(&step);
                let mut t = T::one();
                let mut moved = false;
                for _ in 0..60 {
                    let trial: Vec<T> = y.iter().zip(step.iter()).map(|(&a, &s)| a - t * s).collect();
                    if let Some(log_t) = problem.log_barrier(&trial) {
                        let change = -t * cost_slope / mu - (log_t - log0);
                        if change <= -T::lit(0.25) * t * lam2 {
                            y = trial;
                            moved = true;
                            break;
                        }
                    }
                    t *= T::lit(0.5);
                }
                if !moved {
                    break;
                }
            }
            if m_total * mu < target {
                status = SdpStatus::Optimal;
                break;
            }
            mu *= T::lit(MU_SHRINK);
        }

        let ev = problem.eval(&y).expect("interior");
        let tr_zi = problem.trace_inverse(&ev);
        let nu_span = problem.nu(&y);
        let dim_t = T::from_usize(dim_r).expect("small");
        let mut primal = mu * (y[0] * tr_zi - dim_t);
        for (j, &nu) in nu_span.iter().enumerate() {
            primal += mu * nu * ev.s_inv[(j, j)].re;
        }
        let trace_residual = (mu * tr_zi - T::one()).abs();
        let mut population_residual = T::zero();
        for (j, &k) in span.iter().enumerate() {
            let p = mu * ev.s_inv[(j, j)].re;
            population_residual = population_residual.max(limits.lo[k] - p).max(p - limits.hi[k]);
        }
        let mut upper = [T::zero(); 2];
        let mut lower = [T::zero(); 2];
        let mut eq_cost = T::zero();
        for (i, v) in problem.vars.iter().enumerate() {
            match v.side {
                Side::Upper(k) => upper[k] = y[i + 1],
                Side::Lower(k) => lower[k] = y[i + 1],
                Side::Equal(k) => {
                    if y[i + 1] >= T::zero() {
                        upper[k] = y[i + 1];
                    } else {
                        lower[k] = -y[i + 1];
                    }
                    eq_cost += v.cost * y[i + 1];
                }
            }
        }
        let nu = self.lift(y[0], span, &nu_span, Some(&ev.s_inv));
        let mut result = self.finish_lift(y[0], upper, lower, primal, nu, status, iterations, trace_residual, population_residual);
        // The lifted trace multiplier may have been nudged; recompute the dual cost.
        let cert = &result.certificate;
        let mut dual = cert.trace_multiplier;
        for k in 0..2 {
            let eq = problem.vars.iter().any(|v| v.side == Side::Equal(k));
            if eq {
                continue;
            }
            dual += limits.hi[k] * cert.upper_multipliers[k] - limits.lo[k] * cert.lower_multipliers[k];
        }
        dual += eq_cost;
        result.upper_bound = dual;
        result.duality_gap = dual - primal;
        Ok(result)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Upper(usize),
    Lower(usize),
    Equal(usize),
}

struct Var<T> {
    /// Index into the kept span directions.
    dir: usize,
    sign: T,
    cost: T,
    barrier: bool,
    side: Side,
}

struct Barrier<'a, T: Real> {
    wss: CMatrix<T>,
    b: CMatrix<T>,
    omega: &'a [T],
    vars: Vec<Var<T>>,
}

struct Eval<T: Real> {
    d: Vec<T>,
    s_inv: CMatrix<T>,
    log_det: T,
}

impl<T: Real> Barrier<'_, T> {
    fn nu(&self, y: &[T]) -> Vec<T> {
        let mut nu = vec![T::zero(); self.wss.nrows()];
        for (i, v) in self.vars.iter().enumerate() {
            nu[v.dir] += v.sign * y[i + 1];
        }
        nu
    }

    fn eval(&self, y: &[T]) -> Option<Eval<T>> {
        if y.iter().any(|v| !v.is_finite_value()) {
            return None;
        }
        let d: Vec<T> = self.omega.iter().map(|&om| y[0] - om).collect();
        if d.iter().any(|&v| !(v > T::zero())) {
            return None;
        }
        if self.vars.iter().enumerate().any(|(i, v)| v.barrier && !(y[i + 1] > T::zero())) {
            return None;
        }
        let m = self.wss.nrows();
        let nu = self.nu(y);
        let mut s = -self.wss.clone();
        for k in 0..m {
            s[(k, k)] += c(y[0] + nu[k]);
        }
        for (i, &di) in d.iter().enumerate() {
            let inv = c(T::one() / di);
            for r in 0..m {
                for q in 0..m {
                    s[(r, q)] -= self.b[(r, i)] * self.b[(q, i)].conj() * inv;
                }
            }
        }
        let (s_inv, log_det) = small_inverse(&s)?;
        Some(Eval { d, s_inv, log_det })
    }

    /// `log det Z + Σ log v` over barrier variables.
    fn log_barrier(&self, y: &[T]) -> Option<T> {
        let ev = self.eval(y)?;
        let mut f = ev.log_det;
        for &di in &ev.d {
            f += di.ln();
        }
        for (i, v) in self.vars.iter().enumerate() {
            if v.barrier {
                f += y[i + 1].ln();
            }
        }
        Some(f)
    }

    /// Directional derivative of the dual cost along `dir`.
    fn cost_direction(&self, dir: &nalgebra::DVector<T>) -> T {
        self.vars.iter().enumerate().fold(dir[0], |acc, (i, v)| acc + v.cost * dir[i + 1])
    }

    /// `B D^-k B†` for `k = 2, 3`.
    fn weighted(&self, ev: &Eval<T>, power: i32) -> CMatrix<T> {
        let m = self.wss.nrows();
        CMatrix::from_fn(m, m, |r, q| {
            ev.d.iter().enumerate().fold(c(T::zero()), |acc, (i, &di)| {
                acc + self.b[(r, i)] * self.b[(q, i)].conj() * c(di.powi(-power))
            })
        })
    }

    fn trace_inverse(&self, ev: &Eval<T>) -> T {
        let k2 = self.weighted(ev, 2);
        ev.s_inv.trace().re + ev.d.iter().fold(T::zero(), |a, &di| a + T::one() / di) + (&ev.s_inv * k2).trace().re
    }

    fn newton(&self, y: &[T], mu: T, ev: &Eval<T>) -> (nalgebra::DVector<T>, DMatrix<T>) {
        let m = self.wss.nrows();
        let n = self.vars.len() + 1;
        let si = &ev.s_inv;
        let k2 = self.weighted(ev, 2);
        let k3 = self.weighted(ev, 3);
        let tr_zi = self.trace_inverse(ev);
        let si_k = si * &k2;
        let tr_zi2 = si.norm_squared()
            + T::lit(2.0) * (si * &si_k).trace().re
            + ev.d.iter().fold(T::zero(), |a, &di| a + T::one() / (di * di))
            + T::lit(2.0) * (si * &k3).trace().re
            + (&si_k * &si_k).trace().re;
        let zi2_ss = si * (CMatrix::identity(m, m) + &k2) * si;

        let mut g = nalgebra::DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        g[0] = T::one() / mu - tr_zi;
        h[(0, 0)] = tr_zi2;
        for (i, v) in self.vars.iter().enumerate() {
            g[i + 1] = v.cost / mu - v.sign * si[(v.dir, v.dir)].re;
            h[(0, i + 1)] = v.sign * zi2_ss[(v.dir, v.dir)].re;
            h[(i + 1, 0)] = h[(0, i + 1)];
            for (j, u) in self.vars.iter().enumerate() {
                h[(i + 1, j + 1)] = v.sign * u.sign * si[(v.dir, u.dir)].norm_sqr();
            }
            if v.barrier {
                g[i + 1] -= T::one() / y[i + 1];
                h[(i + 1, i + 1)] += T::one() / (y[i + 1] * y[i + 1]);
            }
        }
        (g, h)
    }
}
