use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::ingest::{defaulter_set, LoanRecord, WindowSpec};

/// Neighbourhood whose borrowers are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DegreeEntity {
    Prod,
    Dist,
    Area,
    /// Same product and same district.
    ProdDist,
    /// Same product and same area.
    ProdArea,
}

impl DegreeEntity {
    pub const ALL: [DegreeEntity; 5] = [
        DegreeEntity::Prod,
        DegreeEntity::Dist,
        DegreeEntity::Area,
        DegreeEntity::ProdDist,
        DegreeEntity::ProdArea,
    ];
}

/// The twenty counts, laid out as in [`super::DEGREE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DegreeCounts([u32; 20]);

impl DegreeCounts {
    pub fn from_array(counts: [u32; 20]) -> Self {
        DegreeCounts(counts)
    }

    pub fn as_array(&self) -> &[u32; 20] {
        &self.0
    }

    fn slot(entity: DegreeEntity, years: u32, defaulted: bool) -> usize {
        assert!(years == 1 || years == 5, "horizon must be 1 or 5 years");
        entity as usize * 4 + if years == 5 { 2 } else { 0 } + defaulted as usize
    }

    pub fn get(&self, entity: DegreeEntity, years: u32, defaulted: bool) -> u32 {
        self.0[Self::slot(entity, years, defaulted)]
    }

    fn set(&mut self, entity: DegreeEntity, years: u32, defaulted: bool, v: u32) {
        self.0[Self::slot(entity, years, defaulted)] = v;
    }

    /// Ordering constraints every row must satisfy; the first violation is
    /// described in the error.
    pub fn check(&self) -> std::result::Result<(), String> {
        use DegreeEntity::*;
        for e in DegreeEntity::ALL {
            for y in [1, 5] {
                if self.get(e, y, true) > self.get(e, y, false) {
                    return Err(format!("{e:?}{y}: defaulted count exceeds total"));
                }
            }
            for df in [false, true] {
                if self.get(e, 1, df) > self.get(e, 5, df) {
                    return Err(format!("{e:?} (df={df}): 1y count exceeds 5y"));
                }
            }
        }
        for y in [1, 5] {
            for df in [false, true] {
                let prod = self.get(Prod, y, df);
                if self.get(ProdDist, y, df) > prod.min(self.get(Dist, y, df)) {
                    return Err(format!("ProdDist{y} (df={df}) exceeds a marginal"));
                }
                if self.get(ProdArea, y, df) > prod.min(self.get(Area, y, df)) {
                    return Err(format!("ProdArea{y} (df={df}) exceeds a marginal"));
                }
            }
        }
        Ok(())
    }
}

const HORIZON_YEARS: [u32; 2] = [1, 5];

/// Per-window lookup tables for the degree counts: for each product, district
/// and area value and each horizon, the set of borrowers holding a loan with
/// that value originated within the horizon.
#[derive(Debug, Clone)]
pub struct WindowIndex {
    window: WindowSpec,
    borrowers: HashMap<String, usize>,
    ids: Vec<String>,
    /// Attribute values of each borrower over all its window loans, by
    /// connector (product, district, area).
    own: Vec<[Vec<usize>; 3]>,
    present: [[Vec<FixedBitSet>; 2]; 3],
    defaulters: FixedBitSet,
    tail: FixedBitSet,
    label: FixedBitSet,
}

impl WindowIndex {
    pub fn build(records: &[LoanRecord], window: &WindowSpec) -> Self {
        let in_window: Vec<&LoanRecord> = records.iter().filter(|r| window.contains(r.origination)).collect();
        let ids: Vec<String> = in_window
            .iter()
            .map(|r| r.borrower_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = ids.len();
        let borrowers: HashMap<String, usize> = ids.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();

        let mut values: [HashMap<&str, usize>; 3] = Default::default();
        let mut own: Vec<[Vec<usize>; 3]> = vec![Default::default(); n];
        let mut present: [[Vec<FixedBitSet>; 2]; 3] = Default::default();
        let mut tail = FixedBitSet::with_capacity(n);
        let mut label = FixedBitSet::with_capacity(n);
        let starts = HORIZON_YEARS.map(|y| window.horizon_start(y));

        for r in &in_window {
            let b = borrowers[&r.borrower_id];
            let attrs: [&[String]; 3] = [&r.products, std::slice::from_ref(&r.district), std::slice::from_ref(&r.area)];
            for (c, list) in attrs.into_iter().enumerate() {
                for v in list {
                    let next = values[c].len();
                    let a = *values[c].entry(v.as_str()).or_insert(next);
                    if a == next {
                        for h in &mut present[c] {
                            h.push(FixedBitSet::with_capacity(n));
                        }
                    }
                    if !own[b][c].contains(&a) {
                        own[b][c].push(a);
                    }
                    for (h, start) in starts.iter().enumerate() {
                        if r.origination >= *start {
                            present[c][h][a].insert(b);
                        }
                    }
                }
            }
            if window.in_tail(r.origination) {
                tail.insert(b);
                if r.defaulted {
                    label.insert(b);
                }
            }
        }

        let mut defaulters = FixedBitSet::with_capacity(n);
        for b in defaulter_set(records, window) {
            defaulters.insert(borrowers[&b]);
        }

        WindowIndex {
            window: *window,
            borrowers,
            ids,
            own,
            present,
            defaulters,
            tail,
            label,
        }
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn borrower_count(&self) -> usize {
        self.ids.len()
    }

    pub fn defaulter_count(&self) -> usize {
        self.defaulters.count_ones(..)
    }

    /// Borrowers with a loan originated in the scoring tail, by id.
    pub fn tail_borrowers(&self) -> impl Iterator<Item = &str> + '_ {
        self.tail.ones().map(|b| self.ids[b].as_str())
    }

    /// Whether any of the borrower's scoring-tail loans defaulted.
    pub fn label(&self, borrower: &str) -> Result<bool> {
        let b = self.tail_index(borrower)?;
        Ok(self.label.contains(b))
    }

    fn tail_index(&self, borrower: &str) -> Result<usize> {
        match self.borrowers.get(borrower) {
            Some(&b) if self.tail.contains(b) => Ok(b),
            _ => Err(Error::BorrowerNotInTail(borrower.to_string())),
        }
    }

    pub fn degrees(&self, borrower: &str) -> Result<DegreeCounts> {
        let b = self.tail_index(borrower)?;
        let n = self.ids.len();
        let mut counts = DegreeCounts::default();
        for (h, &years) in HORIZON_YEARS.iter().enumerate() {
            let reach: [FixedBitSet; 3] = std::array::from_fn(|c| {
                let mut set = FixedBitSet::with_capacity(n);
                for &a in &self.own[b][c] {
                    set.union_with(&self.present[c][h][a]);
                }
                set.set(b, false);
                set
            });
            let mut prod_dist = reach[0].clone();
            prod_dist.intersect_with(&reach[1]);
            let mut prod_area = reach[0].clone();
            prod_area.intersect_with(&reach[2]);
            let sets = [&reach[0], &reach[1], &reach[2], &prod_dist, &prod_area];
            for (e, set) in DegreeEntity::ALL.into_iter().zip(sets) {
                counts.set(e, years, false, set.count_ones(..) as u32);
                counts.set(e, years, true, set.intersection_count(&self.defaulters) as u32);
            }
        }
        Ok(counts)
    }
}

/// The twenty counts of one scoring-tail borrower. Builds a fresh
/// [`WindowIndex`]; reuse one index when scoring many borrowers.
pub fn degree_features(records: &[LoanRecord], window: &WindowSpec, borrower: &str) -> Result<DegreeCounts> {
    WindowIndex::build(records, window).degrees(borrower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Month;

    fn loan(id: &str, b: &str, orig: Month, prods: &[&str], d: &str, a: &str, dm: Option<Month>) -> LoanRecord {
        LoanRecord {
            loan_id: id.into(),
            borrower_id: b.into(),
            origination: orig,
            products: prods.iter().map(|s| s.to_string()).collect(),
            district: d.into(),
            area: a.into(),
            defaulted: dm.is_some(),
            default_month: dm,
        }
    }

    // b1–p1, b2–p1 in the product layer; b2–a1, b3–a1 in geography
    fn toy(b1_default: Option<Month>) -> (Vec<LoanRecord>, WindowSpec) {
        let start = Month::new(2000, 1).unwrap();
        let w = WindowSpec::with_defaults(start);
        let tail = w.tail_start();
        let recs = vec![
            loan("L1", "b1", start, &["p1"], "d1", "a0", b1_default),
            loan("L2", "b2", tail, &["p1"], "d2", "a1", None),
            loan("L3", "b3", start + 5, &["p2"], "d2", "a1", None),
        ];
        (recs, w)
    }

    #[test]
    fn toy_counts() {
        let (recs, w) = toy(None);
        let c = degree_features(&recs, &w, "b2").unwrap();
        assert_eq!(c.get(DegreeEntity::Prod, 5, false), 1);
        assert_eq!(c.get(DegreeEntity::Area, 5, false), 1);
        assert_eq!(c.get(DegreeEntity::ProdArea, 5, false), 0);
        assert!(DegreeEntity::ALL
            .iter()
            .all(|&e| c.get(e, 1, true) == 0 && c.get(e, 5, true) == 0));
        // b1 and b3 originated more than a year before the window end
        assert_eq!(c.get(DegreeEntity::Prod, 1, false), 0);
    }

    #[test]
    fn defaulted_neighbour() {
        let (recs, w) = toy(Some(Month::new(2000, 10).unwrap()));
        let c = degree_features(&recs, &w, "b2").unwrap();
        assert_eq!(c.get(DegreeEntity::Prod, 5, true), 1);
        assert_eq!(c.get(DegreeEntity::Area, 5, true), 0);
    }

    #[test]
    fn only_tail_borrowers() {
        let (recs, w) = toy(None);
        assert!(matches!(
            degree_features(&recs, &w, "b1"),
            Err(Error::BorrowerNotInTail(b)) if b == "b1"
        ));
        assert!(degree_features(&recs, &w, "nobody").is_err());
        let idx = WindowIndex::build(&recs, &w);
        assert_eq!(idx.tail_borrowers().collect::<Vec<_>>(), ["b2"]);
        assert!(!idx.label("b2").unwrap());
    }

    #[test]
    fn check_catches_violations() {
        let mut a = [0u32; 20];
        a[1] = 1;
        assert!(DegreeCounts::from_array(a).check().is_err());
        assert!(DegreeCounts::default().check().is_ok());
    }
}
