use serde::{Deserialize, Serialize};

use crate::{Error, Params, Result};

/// One point of a profile curve: the variable `t`, the unknowns `x, y, φ`
/// and their first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub t: f64,
    pub x: f64,
    pub xd: f64,
    pub y: f64,
    pub yd: f64,
    pub phi: f64,
    pub phid: f64,
}

impl ProfileState {
    /// The six dependent fields in integrator order `(x, ẋ, y, ẏ, φ, φ̇)`.
    pub fn fields(&self) -> [f64; 6] {
        [self.x, self.xd, self.y, self.yd, self.phi, self.phid]
    }

    pub fn from_fields(t: f64, f: [f64; 6]) -> Self {
        Self {
            t,
            x: f[0],
            xd: f[1],
            y: f[2],
            yd: f[3],
            phi: f[4],
            phid: f[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.fields().iter().all(|v| v.is_finite())
    }
}

/// First and second derivatives of the unknowns at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub xd: f64,
    pub xdd: f64,
    pub yd: f64,
    pub ydd: f64,
    pub phid: f64,
    pub phidd: f64,
}

impl Derivative {
    pub fn to_array(&self) -> [f64; 6] {
        [self.xd, self.xdd, self.yd, self.ydd, self.phid, self.phidd]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Einstein,
    KoisoCao,
    Inverted,
    Shot,
    External,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Einstein => "einstein",
            Branch::KoisoCao => "koiso_cao",
            Branch::Inverted => "inverted",
            Branch::Shot => "shot",
            Branch::External => "external",
        }
    }
}

/// An ordered sampling of a profile curve.
///
/// Samples are nonempty, finite and strictly increasing in `t`; this is
/// checked on construction and the fields are private so it stays true.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    params: Params,
    samples: Vec<ProfileState>,
    branch: Branch,
    a: Option<f64>,
}

impl Trajectory {
    pub fn new(params: Params, samples: Vec<ProfileState>, branch: Branch, a: Option<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Parse("trajectory has no samples".into()));
        }
        if let Some(bad) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Parse(format!("sample {bad} has a non-finite field")));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::Parse(format!(
                "t is not strictly increasing at sample {} ({} then {})",
                i + 1,
                samples[i].t,
                samples[i + 1].t
            )));
        }
        Ok(Self {
            params,
            samples,
            branch,
            a,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn samples(&self) -> &[ProfileState] {
        &self.samples
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn a(&self) -> Option<f64> {
        self.a
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Returns a copy with every sample passed through `f`; the result is
    /// validated again.
    pub fn map_samples(&self, f: impl FnMut(&ProfileState) -> ProfileState) -> Result<Self> {
        let samples = self.samples.iter().map(f).collect();
        Self::new(self.params, samples, self.branch, self.a)
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn into_samples(self) -> Vec<ProfileState> {
        self.samples
    }

    /// Checks that the trajectory closes up: `|φ| ≤ 1e-10` at both ends,
    /// `φ̇ = ±k` there to `1e-8`, and `φ > 0` strictly inside.
    pub fn check_endpoints(&self) -> Result<()> {
        let k = self.params.kf();
        let s = &self.samples;
        let (first, last) = (s[0], s[s.len() - 1]);
        let mut problems = Vec::new();
        if first.phi.abs() > 1e-10 || last.phi.abs() > 1e-10 {
            problems.push(format!("phi(start) = {:e}, phi(end) = {:e}", first.phi, last.phi));
        }
        if (first.phid - k).abs() > 1e-8 || (last.phid + k).abs() > 1e-8 {
            problems.push(format!(
                "phid(start) = {}, phid(end) = {} (expected {k}, {})",
                first.phid, last.phid, -k
            ));
        }
        if s.len() > 2 {
            if let Some(p) = s[1..s.len() - 1].iter().find(|p| p.phi <= 0.0) {
                problems.push(format!("phi = {:e} <= 0 at interior t = {}", p.phi, p.t));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidRoot(problems.join("; ")))
        }
    }
}
