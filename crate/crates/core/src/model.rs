//! Physical parameters of the bath and the central qubit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|alpha|^2 + |beta|^2 = 1`.
pub const NORM_TOL: f64 = 1e-12;

/// Uniform XY chain in a transverse field, coupled to the central qubit with strength `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub n_sites: usize,
    pub gamma: f64,
    pub lambda_field: f64,
    pub delta: f64,
    /// Rotation about z applied to every spin. Observables do not depend on it.
    #[serde(default)]
    pub phi: f64,
}

impl BathParams {
    pub fn new(n_sites: usize, gamma: f64, lambda_field: f64, delta: f64) -> Result<Self> {
        Self {
            n_sites,
            gamma,
            lambda_field,
            delta,
            phi: 0.0,
        }
        .validate()
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_lambda(mut self, lambda_field: f64) -> Self {
        self.lambda_field = lambda_field;
        self
    }

    pub fn validate(self) -> Result<Self> {
        if self.n_sites.is_multiple_of(2) {
            return Err(Error::EvenChainSize(self.n_sites));
        }
        if self.n_sites < 3 {
            return Err(Error::ChainTooSmall(self.n_sites));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("lambda", self.lambda_field),
            ("delta", self.delta),
            ("phi", self.phi),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if self.gamma < 0.0 {
            return Err(Error::NegativeAnisotropy(self.gamma));
        }
        Ok(self)
    }

    /// Number of positive-momentum modes, `(N - 1) / 2`.
    pub fn mode_count(&self) -> usize {
        (self.n_sites - 1) / 2
    }

    /// Field seen by the bath when the central qubit is in `|j>`.
    pub fn field(&self, j: u8) -> f64 {
        self.lambda_field + f64::from(j) * self.delta
    }
}

/// Momentum `2 pi k / N` of mode `k`, for `1 <= k <= (N - 1) / 2`.
pub fn momentum(k: usize, n_sites: usize) -> Result<f64> {
    let max = n_sites.saturating_sub(1) / 2;
    if k == 0 || k > max {
        return Err(Error::ModeOutOfRange { k, max });
    }
    Ok(2.0 * PI * k as f64 / n_sites as f64)
}

/// State `alpha|0> + beta|1>` of the central two-level system with splitting `w_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralQubit {
    pub alpha: Complex64,
    pub beta: Complex64,
    #[serde(default)]
    pub w_e: f64,
}

impl CentralQubit {
    pub fn new(alpha: Complex64, beta: Complex64, w_e: f64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::NonFinite("alpha"));
        }
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::NonFinite("beta"));
        }
        if !w_e.is_finite() {
            return Err(Error::NonFinite("w_e"));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Unnormalized(norm));
        }
        Ok(Self { alpha, beta, w_e })
    }

    /// Rescales the pair to unit norm before validating.
    pub fn normalized(alpha: Complex64, beta: Complex64, w_e: f64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::Unnormalized(norm));
        }
        Self::new(alpha / norm, beta / norm, w_e)
    }

    pub fn equal_superposition() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            alpha: a,
            beta: a,
            w_e: 0.0,
        }
    }
}

impl Default for CentralQubit {
    fn default() -> Self {
        Self::equal_superposition()
    }
}

/// Set of excited fermionic modes; empty means the ground state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcitationPattern {
    modes: Vec<usize>,
}

impl ExcitationPattern {
    pub fn ground() -> Self {
        Self::default()
    }

    /// Every mode `1..=mode_count` excited.
    pub fn full(mode_count: usize) -> Self {
        Self {
            modes: (1..=mode_count).collect(),
        }
    }

    /// Accepts modes in any order; rejects duplicates and indices outside `1..=mode_count`.
    pub fn new(mut modes: Vec<usize>, mode_count: usize) -> Result<Self> {
        modes.sort_unstable();
        for w in modes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateMode(w[0]));
            }
        }
        if let Some(&k) = modes.iter().find(|&&k| k == 0 || k > mode_count) {
            return Err(Error::ModeOutOfRange { k, max: mode_count });
        }
        Ok(Self { modes })
    }

    /// Parses `"1,4,7-10"` style lists. Ranges are inclusive.
    pub fn parse(text: &str, mode_count: usize) -> Result<Self> {
        let bad = || Error::PatternSyntax(text.to_string());
        let mut modes = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('-') {
                Some((lo, hi)) => {
                    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                    if hi < lo {
                        return Err(bad());
                    }
                    modes.extend(lo..=hi);
                }
                None => modes.push(item.parse().map_err(|_| bad())?),
            }
        }
        Self::new(modes, mode_count)
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.modes.binary_search(&k).is_ok()
    }

    /// Compact text form accepted by [`ExcitationPattern::parse`].
    pub fn to_spec_string(&self) -> String {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.modes.len() {
            let start = self.modes[i];
            let mut end = start;
            while i + 1 < self.modes.len() && self.modes[i + 1] == end + 1 {
                i += 1;
                end += 1;
            }
            parts.push(if end > start {
                format!("{start}-{end}")
            } else {
                start.to_string()
            });
            i += 1;
        }
        parts.join(",")
    }
}
