//! Reference values computed by `data/oracle.py` and checked in.

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct Golden {
    pub version: u32,
    pub sigma_relative_tol: f64,
    pub orbit_tol: f64,
    pub sigma: Vec<GoldenSigma>,
    pub periods: Vec<GoldenPeriod>,
    pub crossings: Vec<GoldenCrossing>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct GoldenSigma {
    pub n: usize,
    pub lambda: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct GoldenPeriod {
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub period: f64,
}

/// First forward `β`-axis crossing from an off-axis seed.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct GoldenCrossing {
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub beta_cross: f64,
}

const GOLDEN_JSON: &str = include_str!("../../../../data/golden.json");

pub fn golden() -> Golden {
    serde_json::from_str(GOLDEN_JSON).expect("embedded golden data is valid")
}

#[cfg(test)]
mod tests {
    #[test]
    fn parses() {
        let g = super::golden();
        assert_eq!(g.version, 1);
        assert_eq!(g.sigma.len(), 6);
        assert!(!g.periods.is_empty());
    }
}
