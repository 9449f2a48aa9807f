//! Unconstrained reparameterisation used by the optimiser.
//!
//! Layout of the packed vector, in order: the `beta` blocks for each year
//! ascending, then `gamma`, then `ln delta`, then a logit-rescaled `nu`, then
//! `ln tau`. Positivity of `delta` and `tau` and the bounded support of `nu`
//! are thereby built into the coordinates; the objective stays the posterior
//! in the original parameterisation (no Jacobian is added), so the optimum is
//! the MAP point of the original space.

use std::collections::BTreeMap;

use crate::likelihood::{grad::ParamGrad, ModelParams, PriorConfig};
use crate::math::{logit, sigmoid};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Reparam {
    pub years: Vec<i32>,
    pub num_features: usize,
    pub delta_level: f64,
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub log_tau_lo: f64,
    pub log_tau_hi: f64,
}

impl Reparam {
    pub fn new(years: Vec<i32>, num_features: usize, delta_level: f64, priors: &PriorConfig) -> Self {
        Reparam {
            years,
            num_features,
            delta_level,
            nu_lo: priors.nu_support.0,
            nu_hi: priors.nu_support.1,
            log_tau_lo: priors.log_tau_support.0,
            log_tau_hi: priors.log_tau_support.1,
        }
    }

    pub fn for_params(params: &ModelParams, priors: &PriorConfig) -> Self {
        Reparam::new(params.years(), params.num_features(), params.delta_level, priors)
    }

    pub fn dim(&self) -> usize {
        (self.years.len() + 2) * self.num_features + 2
    }

    fn gamma_offset(&self) -> usize {
        self.years.len() * self.num_features
    }

    fn delta_offset(&self) -> usize {
        self.gamma_offset() + self.num_features
    }

    fn nu_index(&self) -> usize {
        self.delta_offset() + self.num_features
    }

    fn tau_index(&self) -> usize {
        self.nu_index() + 1
    }

    /// Map parameters to the unconstrained vector. Values on or outside the
    /// `nu` / `ln tau` support boundaries have no preimage and are rejected.
    pub fn pack(&self, params: &ModelParams) -> Result<Vec<f64>> {
        params.validate()?;
        if params.years() != self.years || params.num_features() != self.num_features {
            return Err(Error::invalid(
                "model params",
                "year range or feature dimension does not match this parameterisation",
            ));
        }
        if !(params.nu > self.nu_lo && params.nu < self.nu_hi) {
            return Err(Error::BoundaryParameter { name: "nu" });
        }
        let lt = params.tau.ln();
        if !(lt > self.log_tau_lo && lt < self.log_tau_hi) {
            return Err(Error::BoundaryParameter { name: "tau" });
        }
        let mut z = Vec::with_capacity(self.dim());
        for beta in params.beta.values() {
            z.extend_from_slice(beta);
        }
        z.extend_from_slice(&params.gamma);
        for d in &params.delta {
            z.push(d.ln());
        }
        z.push(logit((params.nu - self.nu_lo) / (self.nu_hi - self.nu_lo)));
        z.push(lt);
        Ok(z)
    }

    /// Inverse of [`Reparam::pack`]. `nu` is kept strictly inside its
    /// support even when the sigmoid saturates in floating point, so the
    /// result always has a preimage under `pack`.
    pub fn unpack(&self, z: &[f64]) -> Result<ModelParams> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "packed parameter vector",
                expected: self.dim(),
                got: z.len(),
            });
        }
        let m = self.num_features;
        let mut beta = BTreeMap::new();
        for (yi, &year) in self.years.iter().enumerate() {
            beta.insert(year, z[yi * m..(yi + 1) * m].to_vec());
        }
        let gamma = z[self.gamma_offset()..self.gamma_offset() + m].to_vec();
        let delta: Vec<f64> = z[self.delta_offset()..self.delta_offset() + m]
            .iter()
            .map(|ld| ld.exp())
            .collect();
        let mut nu = self.nu_lo + (self.nu_hi - self.nu_lo) * sigmoid(z[self.nu_index()]);
        if nu <= self.nu_lo {
            nu = self.nu_lo.next_up();
        } else if nu >= self.nu_hi {
            nu = self.nu_hi.next_down();
        }
        let tau = z[self.tau_index()].exp();
        Ok(ModelParams {
            beta,
            gamma,
            delta,
            nu,
            tau,
            delta_level: self.delta_level,
        })
    }

    /// Chain-rule a gradient in the original parameters into the
    /// unconstrained coordinates at the given point.
    pub(crate) fn chain_to_unconstrained(&self, params: &ModelParams, g: &ParamGrad) -> Vec<f64> {
        let m = self.num_features;
        let mut out = Vec::with_capacity(self.dim());
        for year in &self.years {
            out.extend_from_slice(&g.beta[year]);
        }
        out.extend_from_slice(&g.gamma);
        for i in 0..m {
            out.push(g.delta[i] * params.delta[i]);
        }
        let width = self.nu_hi - self.nu_lo;
        out.push(g.nu * (params.nu - self.nu_lo) * (self.nu_hi - params.nu) / width);
        out.push(g.tau * params.tau);
        out
    }
}
