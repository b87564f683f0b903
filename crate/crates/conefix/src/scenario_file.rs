//! JSON documents for load and power scenarios and for power-control
//! solutions. Complex matrices and vectors are stored as flat arrays of
//! interleaved real and imaginary parts, matrices in row-major order.

use std::fs;
use std::path::Path;

use conefix_core::linalg::Matrix;
use conefix_core::wireless::load::{Layout, LoadParams, LoadScenario};
use conefix_core::wireless::power::{PowerControlResult, PowerScenario};
use conefix_core::wireless::HataParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::FormatError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadParamsDoc {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub d: f64,
    pub p: f64,
    pub sigma2: f64,
    pub freq_mhz: f64,
    pub h_bs: f64,
    pub h_user: f64,
}

impl From<&LoadParams> for LoadParamsDoc {
    fn from(p: &LoadParams) -> Self {
        LoadParamsDoc {
            r: p.resource_blocks,
            b: p.bandwidth_hz,
            d: p.demand_bps,
            p: p.tx_power_w,
            sigma2: p.noise_w,
            freq_mhz: p.hata.freq_mhz,
            h_bs: p.hata.h_bs,
            h_user: p.hata.h_user,
        }
    }
}

impl From<&LoadParamsDoc> for LoadParams {
    fn from(d: &LoadParamsDoc) -> Self {
        LoadParams {
            resource_blocks: d.r,
            bandwidth_hz: d.b,
            demand_bps: d.d,
            tx_power_w: d.p,
            noise_w: d.sigma2,
            hata: HataParams {
                freq_mhz: d.freq_mhz,
                h_bs: d.h_bs,
                h_user: d.h_user,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadScenarioDoc {
    pub k: usize,
    pub layout: Option<String>,
    pub bs_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    pub assignment: Vec<usize>,
    pub params: LoadParamsDoc,
    pub seed: Option<u64>,
}

impl LoadScenarioDoc {
    /// Only scenarios built from geometry can be written; gains are
    /// recomputed from the positions on load.
    pub fn from_scenario(s: &LoadScenario) -> Result<Self, FormatError> {
        if s.bs_positions().is_empty() {
            return Err(FormatError::Schema(
                "load scenario has no geometry and cannot be written as a scenario file".into(),
            ));
        }
        Ok(LoadScenarioDoc {
            k: s.k(),
            layout: s.layout().map(|l| l.to_string()),
            bs_positions: s.bs_positions().to_vec(),
            user_positions: s.user_positions().to_vec(),
            assignment: s.assignment().to_vec(),
            params: s.params().into(),
            seed: s.seed(),
        })
    }

    pub fn to_scenario(&self) -> Result<LoadScenario, FormatError> {
        if self.k != self.bs_positions.len() {
            return Err(FormatError::Schema(format!(
                "k = {} but {} base-station positions",
                self.k,
                self.bs_positions.len()
            )));
        }
        let layout = self.layout.as_deref().map(str::parse::<Layout>).transpose()?;
        Ok(LoadScenario::from_geometry(
            self.bs_positions.clone(),
            self.user_positions.clone(),
            Some(self.assignment.clone()),
            (&self.params).into(),
            layout,
            self.seed,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerScenarioDoc {
    pub k: usize,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub candidates: Vec<Vec<usize>>,
    /// `covariances[u * m + b]`, each `2 L²` numbers.
    pub covariances: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_bar: Option<f64>,
    pub seed: Option<u64>,
}

pub fn interleave(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn deinterleave(v: &[f64]) -> Result<Vec<Complex64>, FormatError> {
    if !v.len().is_multiple_of(2) {
        return Err(FormatError::Schema("interleaved array has odd length".into()));
    }
    Ok(v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

impl PowerScenarioDoc {
    pub fn from_scenario(s: &PowerScenario) -> Self {
        PowerScenarioDoc {
            k: s.k(),
            m: s.m(),
            l: s.l(),
            candidates: s.candidates().to_vec(),
            covariances: s.covariances().iter().map(|r| interleave(r.as_slice())).collect(),
            gamma: s.gamma().to_vec(),
            sigma2: s.sigma2(),
            p_bar: s.p_bar(),
            seed: s.seed(),
        }
    }

    pub fn to_scenario(&self) -> Result<PowerScenario, FormatError> {
        let covariances = self
            .covariances
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let z = deinterleave(v)?;
                if z.len() != self.l * self.l {
                    return Err(FormatError::Schema(format!(
                        "covariance {i} has {} entries, expected L² = {}",
                        z.len(),
                        self.l * self.l
                    )));
                }
                Ok(Matrix::from_vec(self.l, self.l, z)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PowerScenario::new(
            self.k,
            self.m,
            self.l,
            self.candidates.clone(),
            covariances,
            self.gamma.clone(),
            self.sigma2,
            self.p_bar,
            self.seed,
        )?)
    }
}

/// Either kind of scenario; the key sets are disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioDoc {
    Load(LoadScenarioDoc),
    Power(PowerScenarioDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSolutionDoc {
    pub b_star: usize,
    pub sinr: f64,
    pub power: f64,
    pub capped: bool,
    pub beamformer: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSolutionDoc {
    pub users: Vec<UserSolutionDoc>,
    pub rho: f64,
    pub feasible: bool,
    pub iters: usize,
    pub max_sinr_error: f64,
}

impl From<&PowerControlResult> for PowerSolutionDoc {
    fn from(r: &PowerControlResult) -> Self {
        PowerSolutionDoc {
            users: r
                .solution
                .users
                .iter()
                .map(|u| UserSolutionDoc {
                    b_star: u.station,
                    sinr: u.sinr,
                    power: u.power,
                    capped: u.capped,
                    beamformer: interleave(&u.beamformer),
                })
                .collect(),
            rho: r.rho.rho,
            feasible: r.feasibility.is_feasible(),
            iters: r.trace.iterations(),
            max_sinr_error: r.max_sinr_error,
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
