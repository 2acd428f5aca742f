//! Claim verification: every checkable statement about the catalog, the
//! structure identities, the phase plane and the Sobolev level sets, run
//! against seeded samples and reported with measured residuals.

mod claims;
mod golden;
pub mod sobolev;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

pub use claims::{
    at_regular_point, dual_vs_fd, equatorial_geodesic, lemma_seeds, umbilic_pattern,
    GEODESIC_LENGTH, IDENTITY_BAND, IDENTITY_NOISE_FLOOR, IDENTITY_STEP, ORACLE_BAND, ORACLE_TOL,
    PHASE_CS,
};
pub use golden::{golden, Golden, GoldenCrossing, GoldenPeriod, GoldenSigma};

/// Deliberate defects for mutation testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Compare the antisymmetric part of `h` against `−2α`.
    FlipAlphaSign,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Run only claims whose id starts with this prefix.
    pub only: Option<String>,
    pub fault: Option<Fault>,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimResult {
    pub claim_id: String,
    pub surface: String,
    pub params: String,
    /// `null` in JSON when the claim errored or diverged.
    #[serde(serialize_with = "finite_or_null")]
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub claims: Vec<ClaimResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &ClaimResult> {
        self.claims.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.claim_id == id)
    }
}

/// Every claim id, in report order.
pub fn claim_ids() -> Vec<&'static str> {
    claims::SUITES
        .iter()
        .flat_map(|s| s.ids.iter().copied())
        .collect()
}

/// FNV-1a, so that per-claim seeds do not depend on the std hasher.
fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed of the sample stream for a claim group, identified by its first id.
pub fn claim_seed(seed: u64, id: &str) -> u64 {
    seed ^ fnv1a(id)
}

pub fn matches(only: Option<&str>, id: &str) -> bool {
    only.is_none_or(|p| id.starts_with(p))
}

pub fn run_all(cfg: &VerifyConfig) -> VerifyReport {
    let only = cfg.only.as_deref();
    let mut claims: Vec<ClaimResult> = claims::SUITES
        .par_iter()
        .filter(|s| s.ids.iter().any(|id| matches(only, id)))
        .flat_map_iter(|s| {
            let cx = claims::Ctx {
                seed: claim_seed(cfg.seed, s.ids[0]),
                fault: cfg.fault,
            };
            (s.run)(&cx)
        })
        .filter(|c| matches(only, &c.claim_id))
        .collect();
    let order = claim_ids();
    claims.sort_by_key(|c| order.iter().position(|id| *id == c.claim_id));
    VerifyReport {
        seed: cfg.seed,
        passed: claims.iter().all(|c| c.passed),
        claims,
    }
}
