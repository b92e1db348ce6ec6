//! Seeded synthetic loan books with planted area and product shocks.
//!
//! Borrowers live in one area (areas nested in districts) and farm one to
//! three products. Each borrower takes consecutive loans; every month a loan
//! is open it defaults with probability
//! `base · (1 + area_shock)^[area shocked] · (1 + product_shock)^[any product shocked]`.
//! Shocks are episodes (12 to 36 months by default) starting at random per
//! area and per product. Loans run 6 to 18 months with gaps of up to 6
//! months between them; a borrower stops borrowing after a default.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{LoanRecord, Month};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_borrowers: usize,
    pub n_products: usize,
    pub n_districts: usize,
    pub areas_per_district: usize,
    /// Length of the origination span.
    pub months: u32,
    pub start: Month,
    /// Monthly default hazard outside shocks.
    pub base_default_rate: f64,
    pub area_shock_strength: f64,
    pub product_shock_strength: f64,
    /// Monthly probability that an unshocked area or product enters a shock.
    pub shock_probability: f64,
    /// Shock episode length range, inclusive.
    pub shock_months: (u32, u32),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_borrowers: 1000,
            n_products: 8,
            n_districts: 10,
            areas_per_district: 5,
            months: 80,
            start: Month::new(2000, 1).expect("valid month"),
            base_default_rate: 0.005,
            area_shock_strength: 0.0,
            product_shock_strength: 0.0,
            shock_probability: 0.02,
            shock_months: (12, 36),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_borrowers == 0 || self.n_products == 0 || self.n_districts == 0 || self.areas_per_district == 0 {
            return bad("borrower, product, district and area counts must be positive");
        }
        if self.months == 0 {
            return bad("months must be positive");
        }
        if !(self.base_default_rate > 0.0 && self.base_default_rate < 1.0) {
            return bad("base_default_rate must lie in (0, 1)");
        }
        if !(self.area_shock_strength >= 0.0 && self.area_shock_strength.is_finite())
            || !(self.product_shock_strength >= 0.0 && self.product_shock_strength.is_finite())
        {
            return bad("shock strengths must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.shock_probability) {
            return bad("shock_probability must lie in [0, 1]");
        }
        if self.shock_months.0 == 0 || self.shock_months.0 > self.shock_months.1 {
            return bad("shock episode lengths must satisfy 0 < min <= max");
        }
        Ok(())
    }
}

/// Generated records plus, per record, the number of months the loan was
/// at risk (up to and including its default month).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthBook {
    pub records: Vec<LoanRecord>,
    pub months_at_risk: Vec<u32>,
}

const MIN_TERM: u32 = 6;
const MAX_TERM: u32 = 18;
const MAX_GAP: u32 = 6;

/// Shock indicator per unit and month.
fn shock_grid(rng: &mut ChaCha8Rng, units: usize, months: usize, p: f64, (lo, hi): (u32, u32)) -> Vec<Vec<bool>> {
    (0..units)
        .map(|_| {
            let mut row = vec![false; months];
            let mut m = 0;
            while m < months {
                if rng.random_bool(p) {
                    let len = rng.random_range(lo..=hi) as usize;
                    for cell in row.iter_mut().skip(m).take(len) {
                        *cell = true;
                    }
                    m += len;
                } else {
                    m += 1;
                }
            }
            row
        })
        .collect()
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthBook> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_areas = cfg.n_districts * cfg.areas_per_district;
    // loans originated late still run their full term
    let horizon = (cfg.months + MAX_TERM) as usize;
    let area_shocks = shock_grid(&mut rng, n_areas, horizon, cfg.shock_probability, cfg.shock_months);
    let product_shocks = shock_grid(&mut rng, cfg.n_products, horizon, cfg.shock_probability, cfg.shock_months);

    let mut records = Vec::new();
    let mut months_at_risk = Vec::new();
    for b in 0..cfg.n_borrowers {
        let area = rng.random_range(0..n_areas);
        let district = area / cfg.areas_per_district;
        let k = rng.random_range(1..=3usize).min(cfg.n_products);
        let mut products: Vec<usize> = sample(&mut rng, cfg.n_products, k).into_vec();
        products.sort_unstable();

        let mut month = rng.random_range(0..cfg.months);
        while month < cfg.months {
            let term = rng.random_range(MIN_TERM..=MAX_TERM);
            let mut default_at = None;
            for m in month..month + term {
                let mut hazard = cfg.base_default_rate;
                if area_shocks[area][m as usize] {
                    hazard *= 1.0 + cfg.area_shock_strength;
                }
                if products.iter().any(|&p| product_shocks[p][m as usize]) {
                    hazard *= 1.0 + cfg.product_shock_strength;
                }
                if rng.random_bool(hazard.min(1.0)) {
                    default_at = Some(m);
                    break;
                }
            }
            records.push(LoanRecord {
                loan_id: format!("L{:06}", records.len() + 1),
                borrower_id: format!("B{:05}", b + 1),
                origination: cfg.start + month as i32,
                products: products.iter().map(|p| format!("P{:02}", p + 1)).collect(),
                district: format!("D{:02}", district + 1),
                area: format!("A{:03}", area + 1),
                defaulted: default_at.is_some(),
                default_month: default_at.map(|m| cfg.start + m as i32),
            });
            months_at_risk.push(default_at.map_or(term, |m| m - month + 1));
            if default_at.is_some() {
                break;
            }
            month += term + rng.random_range(0..=MAX_GAP);
        }
    }
    Ok(SynthBook { records, months_at_risk })
}
