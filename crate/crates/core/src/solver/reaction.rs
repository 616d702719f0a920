//! Mass-action reaction networks that conserve the total number of moles.

use crate::error::{Error, Result};

/// One irreversible mass-action reaction `Σ ν_r S_r → Σ ν_p S_p`.
///
/// The rate is `k Π_r c_r^{ν_r}`; its units depend on the reaction order.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactants: Vec<(usize, u32)>,
    pub products: Vec<(usize, u32)>,
    pub rate: f64,
}

impl Reaction {
    pub fn new(reactants: Vec<(usize, u32)>, products: Vec<(usize, u32)>, rate: f64) -> Self {
        Self { reactants, products, rate }
    }

    fn propensity(&self, c: &[f64]) -> f64 {
        self.reactants
            .iter()
            .fold(self.rate, |acc, &(s, nu)| acc * c[s].max(0.0).powi(nu as i32))
    }
}

/// A set of reactions over `n` species.
///
/// Every reaction must consume and produce the same number of moles so that
/// the per-cell total concentration stays fixed. Mass-action kinetics make the
/// induced source term quasi-positive: a species at zero concentration is
/// never consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    nspecies: usize,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new(nspecies: usize, reactions: Vec<Reaction>) -> Result<Self> {
        for (r, rx) in reactions.iter().enumerate() {
            if !(rx.rate >= 0.0 && rx.rate.is_finite()) {
                return Err(Error::InvalidReaction(format!(
                    "reaction {r}: rate constant {} must be finite and non-negative",
                    rx.rate
                )));
            }
            if rx.reactants.is_empty() {
                return Err(Error::InvalidReaction(format!("reaction {r} has no reactants")));
            }
            for &(s, nu) in rx.reactants.iter().chain(&rx.products) {
                if s >= nspecies {
                    return Err(Error::InvalidReaction(format!(
                        "reaction {r}: species index {s} out of range"
                    )));
                }
                if nu == 0 {
                    return Err(Error::InvalidReaction(format!(
                        "reaction {r}: zero stoichiometric coefficient"
                    )));
                }
            }
            let consumed: u32 = rx.reactants.iter().map(|p| p.1).sum();
            let produced: u32 = rx.products.iter().map(|p| p.1).sum();
            if consumed != produced {
                return Err(Error::InvalidReaction(format!(
                    "reaction {r} does not conserve moles ({consumed} -> {produced})"
                )));
            }
        }
        Ok(Self { nspecies, reactions })
    }

    pub fn empty(nspecies: usize) -> Self {
        Self { nspecies, reactions: Vec::new() }
    }

    /// `a ⇌ b` with forward and backward first-order rate constants.
    pub fn reversible(nspecies: usize, a: usize, b: usize, k_forward: f64, k_backward: f64) -> Result<Self> {
        Self::new(
            nspecies,
            vec![
                Reaction::new(vec![(a, 1)], vec![(b, 1)], k_forward),
                Reaction::new(vec![(b, 1)], vec![(a, 1)], k_backward),
            ],
        )
    }

    pub fn nspecies(&self) -> usize {
        self.nspecies
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn is_empty(&self) -> bool {
        self.reactions.is_empty()
    }

    /// Net production rates `r_i(c)` written into `out`.
    pub fn rates_into(&self, c: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for rx in &self.reactions {
            let w = rx.propensity(c);
            if w == 0.0 {
                continue;
            }
            for &(s, nu) in &rx.reactants {
                out[s] -= nu as f64 * w;
            }
            for &(s, nu) in &rx.products {
                out[s] += nu as f64 * w;
            }
        }
    }

    pub fn rates(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nspecies];
        self.rates_into(c, &mut out);
        out
    }
}
