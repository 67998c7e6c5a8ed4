use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::constants::{FM_COUPLING, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ising problem: dimensionless biases `h_i` and couplings `J_ij` (`i < j`),
/// optionally with per-qubit tunneling multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    n: usize,
    h: Vec<T>,
    j: BTreeMap<(usize, usize), T>,
    delta_scale: Option<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    h: Vec<f64>,
    #[serde(default)]
    j: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_scale: Option<Vec<f64>>,
}

impl<T: Real> ProblemInstance<T> {
    /// Validates and canonicalizes an instance. Couplings may be given with
    /// either index first; giving the same pair twice is an error.
    pub fn new(n: usize, h: Vec<T>, couplings: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("instance needs at least one qubit"));
        }
        if n > MAX_QUBITS {
            return Err(Error::Capacity { n, max: MAX_QUBITS });
        }
        if h.len() != n {
            return Err(Error::validation(format!("{} biases given for {n} qubits", h.len())));
        }
        if h.iter().any(|v| !v.is_finite_value()) {
            return Err(Error::validation("non-finite bias"));
        }
        let mut j = BTreeMap::new();
        for (a, b, v) in couplings {
            if a >= n || b >= n {
                return Err(Error::validation(format!("coupling ({a},{b}) index out of range for {n} qubits")));
            }
            if a == b {
                return Err(Error::validation(format!("self-coupling ({a},{a}) is not allowed")));
            }
            if !v.is_finite_value() {
                return Err(Error::validation(format!("coupling ({a},{b}) is not finite")));
            }
            let key = (a.min(b), a.max(b));
            if j.insert(key, v).is_some() {
                return Err(Error::validation(format!("duplicate coupling ({},{})", key.0, key.1)));
            }
        }
        Ok(Self { n, h, j, delta_scale: None })
    }

    /// Two qubits, zero bias, `J_01 = -2.5`.
    pub fn fm2() -> Self {
        Self::chain(2, T::lit(FM_COUPLING))
    }

    /// Eight-qubit ring, zero bias, every ring coupler at `-2.5`.
    pub fn fm8() -> Self {
        Self::ring(8, T::lit(FM_COUPLING))
    }

    /// Open chain `0-1-...-(n-1)`.
    pub fn chain(n: usize, j: T) -> Self {
        Self::new(n, vec![T::zero(); n], (1..n).map(|i| (i - 1, i, j))).expect("valid chain")
    }

    /// Closed ring; for `n <= 2` this is the chain.
    pub fn ring(n: usize, j: T) -> Self {
        if n <= 2 {
            return Self::chain(n, j);
        }
        Self::new(n, vec![T::zero(); n], (0..n).map(|i| (i, (i + 1) % n, j))).expect("valid ring")
    }

    /// Looks up a named preset (`fm2`, `fm8`).
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fm2" => Ok(Self::fm2()),
            "fm8" => Ok(Self::fm8()),
            other => Err(Error::validation(format!("unknown preset `{other}` (known: fm2, fm8)"))),
        }
    }

    /// Reads `{ "n": int, "h": [...], "j": [[i, j, val], ...] }`.
    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let file: InstanceFile = serde_json::from_reader(reader)?;
        let inst = Self::new(
            file.n,
            file.h.into_iter().map(T::lit).collect(),
            file.j.into_iter().map(|(a, b, v)| (a, b, T::lit(v))),
        )?;
        match file.delta_scale {
            Some(scale) => inst.with_delta_scale(scale.into_iter().map(T::lit).collect()),
            None => Ok(inst),
        }
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            n: self.n,
            h: self.h.iter().map(|v| v.to_f64_lossy()).collect(),
            j: self.j.iter().map(|(&(a, b), v)| (a, b, v.to_f64_lossy())).collect(),
            delta_scale: self.delta_scale.as_ref().map(|d| d.iter().map(|v| v.to_f64_lossy()).collect()),
        };
        serde_json::to_string(&file).expect("instance serializes")
    }

    /// Attaches per-qubit multipliers on the common tunneling amplitude.
    pub fn with_delta_scale(mut self, scale: Vec<T>) -> Result<Self> {
        if scale.len() != self.n {
            return Err(Error::validation(format!("{} tunneling multipliers for {} qubits", scale.len(), self.n)));
        }
        if scale.iter().any(|v| !v.is_finite_value() || *v < T::zero()) {
            return Err(Error::validation("tunneling multipliers must be finite and non-negative"));
        }
        self.delta_scale = Some(scale);
        Ok(self)
    }

    /// Copy with every coupler multiplied by the matching factor (in
    /// [`couplings`](Self::couplings) order).
    pub fn with_coupling_factors(&self, factors: &[T]) -> Result<Self> {
        if factors.len() != self.j.len() {
            return Err(Error::validation(format!("{} factors for {} couplers", factors.len(), self.j.len())));
        }
        let mut out = self.clone();
        for (v, &f) in out.j.values_mut().zip(factors) {
            *v *= f;
        }
        Ok(out)
    }

    /// Copy with every bias replaced by `h`.
    pub fn with_uniform_bias(&self, h: T) -> Self {
        let mut out = self.clone();
        out.h = vec![h; self.n];
        out
    }

    /// Copy with bias of qubit `i` replaced by `h`.
    pub fn with_bias(&self, i: usize, h: T) -> Self {
        let mut out = self.clone();
        out.h[i] = h;
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn h(&self) -> &[T] {
        &self.h
    }

    pub fn delta_scale(&self) -> Option<&[T]> {
        self.delta_scale.as_deref()
    }

    /// Multiplier on the tunneling amplitude of qubit `i` (1 when unset).
    pub fn delta_factor(&self, i: usize) -> T {
        self.delta_scale.as_ref().map_or(T::one(), |d| d[i])
    }

    pub fn couplings(&self) -> impl ExactSizeIterator<Item = (usize, usize, T)> + '_ {
        self.j.iter().map(|(&(a, b), &v)| (a, b, v))
    }

    pub fn num_couplings(&self) -> usize {
        self.j.len()
    }

    /// `J_ij` for either index order; zero when absent.
    pub fn coupling(&self, i: usize, j: usize) -> T {
        self.j.get(&(i.min(j), i.max(j))).copied().unwrap_or_else(T::zero)
    }

    /// True when all biases vanish.
    pub fn is_unbiased(&self) -> bool {
        self.h.iter().all(|v| *v == T::zero())
    }
}
