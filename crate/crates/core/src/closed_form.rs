//! Analytic hitting probabilities.
//!
//! - the coherent walk, `sin(ωt)^{2d}`;
//! - the subspace dephasing model, which factorises into `d` copies of a
//!   single-bit damped oscillator and is exact;
//! - the vertex dephasing model to first order in `λ/ω`, written as a sum
//!   over the `(n, p)` families of superoperator eigenvectors.
//!
//! All factorial ratios reduce to products of binomial coefficients, which
//! are evaluated exactly in `u128` for every supported dimension.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::hypercube::{WalkParams, DEFAULT_MAX_DIMENSION};

/// Perturbative results are flagged as outside their regime above this λ/ω.
pub const PERTURBATIVE_VALIDITY_RATIO: f64 = 0.5;

const PROBABILITY_SLACK: f64 = 1e-12;

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn unitary_hitting(params: &WalkParams, t: f64) -> f64 {
    (params.omega * t).sin().powi(2 * params.d as i32)
}

/// Damping regime of the single-bit oscillator in the subspace model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceRegime {
    /// λ < 4ω: damped oscillation.
    Underdamped,
    /// λ = 4ω.
    Critical,
    /// λ > 4ω: hyperbolic continuation of the oscillatory terms.
    Overdamped,
}

impl SubspaceRegime {
    pub fn of(params: &WalkParams) -> Self {
        let disc = 16.0 * params.omega * params.omega - params.lambda * params.lambda;
        if disc > 0.0 {
            Self::Underdamped
        } else if disc < 0.0 {
            Self::Overdamped
        } else {
            Self::Critical
        }
    }
}

/// Exact hitting probability of the subspace model from `|a><a|`:
/// `2^{-d} [1 - e^{-λt/2} (cos(βt/2) + (λ/β) sin(βt/2))]^d`,
/// `β = sqrt(16ω² - λ²)`, continued to `cosh`/`sinh` when λ > 4ω.
///
/// Panics if the result leaves `[0, 1]` by more than roundoff.
pub fn subspace_hitting(params: &WalkParams, t: f64) -> f64 {
    let bracket = 1.0 - damped_oscillator(params.omega, params.lambda, t);
    let p = (0.5 * bracket).powi(params.d as i32);
    assert!(
        (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p),
        "subspace hitting probability {p} outside [0, 1] at t={t}"
    );
    p
}

/// `e^{-λt/2} [cos(βt/2) + λ sin(βt/2)/β]` for any sign of `β²`.
fn damped_oscillator(omega: f64, lambda: f64, t: f64) -> f64 {
    let disc = 16.0 * omega * omega - lambda * lambda;
    let half = 0.5 * t;
    let x2 = disc * half * half;
    if x2.abs() < 1e-8 {
        // second-order series in x² = β²t²/4, uniform across the critical point
        let cos_part = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let sinc_part = half * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        return (-lambda * half).exp() * (cos_part + lambda * sinc_part);
    }
    if disc > 0.0 {
        let beta = disc.sqrt();
        (-lambda * half).exp() * ((beta * half).cos() + lambda / beta * (beta * half).sin())
    } else {
        let gamma = (-disc).sqrt();
        // e^{-λt/2} cosh(γt/2) and e^{-λt/2} sinh(γt/2) without overflow; γ < λ
        let slow = ((gamma - lambda) * half).exp();
        let fast = (-(gamma + lambda) * half).exp();
        0.5 * (slow + fast) + lambda / gamma * 0.5 * (slow - fast)
    }
}

fn check_rate_index(d: u32, n: u32, p: u32) -> Result<()> {
    let p_min = n.saturating_sub(d);
    if n > 2 * d || p < p_min || p > n / 2 {
        return Err(WalkError::RateIndexOutOfRange { d, n, p });
    }
    Ok(())
}

/// Number of ways `p` paired excitations fit in subspace `n`,
/// `(d-n+2p)! / [p! (d-n+p)!]`.
fn pair_count(d: u32, n: u32, p: u32) -> u128 {
    binomial((d + 2 * p - n) as u64, p as u64)
}

/// `d! / [(n-2p)! (d-n+2p)!]`.
fn family_multiplicity(d: u32, n: u32, p: u32) -> u128 {
    binomial(d as u64, (n - 2 * p) as u64)
}

/// `λ_pn = λ (1 - 2^{n-d-2p} (d-n+2p)! / [p! (d-n+p)!])`.
pub fn vertex_decay_rate(d: u32, lambda: f64, n: u32, p: u32) -> Result<f64> {
    check_rate_index(d, n, p)?;
    let exponent = n as i32 - d as i32 - 2 * p as i32;
    let fraction = 2f64.powi(exponent) * pair_count(d, n, p) as f64;
    Ok(lambda * (1.0 - fraction))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRate {
    pub rate: f64,
    pub multiplicity: u64,
}

/// The `(n, p)` decay rates of the vertex model and how many eigenvectors
/// carry each of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRateTable {
    pub d: u32,
    pub lambda: f64,
    entries: BTreeMap<(u32, u32), DecayRate>,
}

impl DecayRateTable {
    pub fn build(params: &WalkParams) -> Result<Self> {
        params.validate()?;
        params.check_cap(DEFAULT_MAX_DIMENSION)?;
        let d = params.d;
        let mut entries = BTreeMap::new();
        for n in 0..=2 * d {
            for p in n.saturating_sub(d)..=n / 2 {
                entries.insert(
                    (n, p),
                    DecayRate {
                        rate: vertex_decay_rate(d, params.lambda, n, p)?,
                        multiplicity: family_multiplicity(d, n, p) as u64,
                    },
                );
            }
        }
        Ok(Self {
            d,
            lambda: params.lambda,
            entries,
        })
    }

    pub fn get(&self, n: u32, p: u32) -> Option<&DecayRate> {
        self.entries.get(&(n, p))
    }

    /// Entries in `(n, p)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), &DecayRate)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    /// The `p` values present for subspace `n`.
    pub fn pairs_in(&self, n: u32) -> impl Iterator<Item = (u32, &DecayRate)> {
        self.entries
            .range((n, 0)..=(n, u32::MAX))
            .map(|(&(_, p), v)| (p, v))
    }

    pub fn pair_count(&self, n: u32, p: u32) -> u128 {
        pair_count(self.d, n, p)
    }

    /// Number of superoperator eigenvectors in subspace `n` accounted for by
    /// the table: `Σ_p multiplicity · 2^{n-2p} · d_p`.
    pub fn subspace_degeneracy(&self, n: u32) -> u128 {
        self.pairs_in(n)
            .map(|(p, rate)| {
                rate.multiplicity as u128 * (1u128 << (n - 2 * p)) * self.pair_count(n, p)
            })
            .sum()
    }

    /// `(2d)! / [n! (2d-n)!]`, the dimension of the n-th eigenspace of the
    /// commutator superoperator.
    pub fn expected_degeneracy(&self, n: u32) -> u128 {
        binomial(2 * self.d as u64, n as u64)
    }
}

pub fn build_decay_table(params: &WalkParams) -> Result<DecayRateTable> {
    DecayRateTable::build(params)
}

/// One subspace `n` of the folded perturbative sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub n: u32,
    /// `(weight, λ_pn)` for each `p`; `g_n(t) = Σ weight · e^{-λ_pn t}`.
    pub coefficients: Vec<(f64, f64)>,
    /// `2ω(d - n)`.
    pub frequency: f64,
    /// `(-1)^{d-n}`.
    pub sign: f64,
}

impl SeriesTerm {
    pub fn envelope(&self, t: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|&(weight, rate)| weight * (-rate * t).exp())
            .sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.sign * self.envelope(t) * (self.frequency * t).cos()
    }
}

/// Folded perturbative series for the vertex model (terms `n = 0..=d`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeSeries {
    pub params: WalkParams,
    pub terms: Vec<SeriesTerm>,
}

impl PerturbativeSeries {
    pub fn new(params: &WalkParams) -> Result<Self> {
        params.validate()?;
        params.check_cap(DEFAULT_MAX_DIMENSION)?;
        let d = params.d;
        let mut terms = Vec::with_capacity(d as usize + 1);
        for n in 0..=d {
            let fold = if n == d { 1 } else { 2 };
            let coefficients = (0..=n / 2)
                .map(|p| {
                    // d! / [p! (n-2p)! (d-n+p)!] = C(d, n-2p) C(d-n+2p, p)
                    let count = family_multiplicity(d, n, p) * pair_count(d, n, p) * fold;
                    let weight = count as f64 * 2f64.powi(n as i32 - 2 * p as i32 - 2 * d as i32);
                    Ok((weight, vertex_decay_rate(d, params.lambda, n, p)?))
                })
                .collect::<Result<Vec<_>>>()?;
            terms.push(SeriesTerm {
                n,
                coefficients,
                frequency: 2.0 * params.omega * (d - n) as f64,
                sign: if (d - n).is_multiple_of(2) { 1.0 } else { -1.0 },
            });
        }
        Ok(Self {
            params: *params,
            terms,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// `Σ_n g_n(t)`, the value at the hitting time when every cosine is ±1
    /// with the alternating sign.
    pub fn envelope_sum(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.envelope(t)).sum()
    }
}

/// First-order vertex-model hitting probability
/// `P_v(t) = Σ_{n=0}^{d} (-1)^{d-n} g_n(t) cos(2ωt(d-n))`.
///
/// Outside `λ/ω ≤ 0.5` the value is still returned; check
/// [`perturbative_is_valid`] before trusting it.
pub fn vertex_hitting_perturbative(params: &WalkParams, t: f64) -> Result<f64> {
    Ok(PerturbativeSeries::new(params)?.eval(t))
}

pub fn perturbative_is_valid(params: &WalkParams) -> bool {
    params.lambda / params.omega <= PERTURBATIVE_VALIDITY_RATIO
}

/// `e^{-λT}`, a d-independent lower bound on the perturbative `P_v(T)`.
pub fn vertex_hitting_lower_bound(params: &WalkParams, t: f64) -> f64 {
    (-params.lambda * t).exp()
}

/// Small-`λT` behaviour of the subspace model at the hitting time, `e^{-dλT/4}`.
pub fn subspace_asymptote(params: &WalkParams, t: f64) -> f64 {
    (-(params.d as f64) * params.lambda * t / 4.0).exp()
}

/// Per-step measurement probability of a discrete walk that extracts the same
/// information as the continuous models over one traversal: `2λT/(πd)`.
pub fn discrete_measurement_probability(lambda: f64, t: f64, d: u32) -> f64 {
    2.0 * lambda * t / (PI * d as f64)
}

/// Discrete-walk hitting estimate `e^{-dp}` at that probability.
pub fn discrete_hitting_estimate(lambda: f64, t: f64, d: u32) -> f64 {
    (-(d as f64) * discrete_measurement_probability(lambda, t, d)).exp()
}
