//! Loan records and their conversion into per-window multilayer networks.
//!
//! Each window yields a two-layer network whose common nodes are borrowers:
//! a product layer (borrower to each product of each loan) and a geography
//! layer holding both areas and districts as specific nodes.

mod month;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{Read, Write};

pub use month::{Month, ParseMonthError};

use crate::error::{Error, Result};
use crate::graph::{build_network, EdgeSpec, LayerSpec, MultilayerNetwork};

pub const PRODUCT_LAYER: &str = "product";
pub const GEOGRAPHY_LAYER: &str = "geography";

pub const LOAN_COLUMNS: [&str; 8] = [
    "loan_id",
    "borrower_id",
    "origination",
    "products",
    "district",
    "area",
    "defaulted",
    "default_month",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoanRecord {
    pub loan_id: String,
    pub borrower_id: String,
    pub origination: Month,
    /// Distinct, in file order.
    pub products: Vec<String>,
    pub district: String,
    pub area: String,
    pub defaulted: bool,
    pub default_month: Option<Month>,
}

/// Kind of a specific node, recovered from its id prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Connector {
    Product,
    District,
    Area,
}

impl Connector {
    pub const ALL: [Connector; 3] = [Connector::Product, Connector::District, Connector::Area];

    pub fn prefix(self) -> &'static str {
        match self {
            Connector::Product => "product:",
            Connector::District => "district:",
            Connector::Area => "area:",
        }
    }

    pub fn node_id(self, value: &str) -> String {
        format!("{}{value}", self.prefix())
    }

    pub fn of(node_id: &str) -> Option<Connector> {
        Connector::ALL
            .into_iter()
            .find(|c| node_id.starts_with(c.prefix()))
    }

    pub fn name(self) -> &'static str {
        match self {
            Connector::Product => "product",
            Connector::District => "district",
            Connector::Area => "area",
        }
    }
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// Parses loan records from delimiter-separated text with a header row.
/// Multi-product cells use `;` as sub-delimiter. Extra columns are ignored.
pub fn parse_loans<R: Read>(reader: R) -> Result<Vec<LoanRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut cols = [0usize; 8];
    for (slot, name) in cols.iter_mut().zip(LOAN_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut records = Vec::new();
    let mut area_district: HashMap<String, String> = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |k: usize| row.get(cols[k]).unwrap_or("");
        let invalid = |reason: String| Error::InvalidRecord { line, reason };
        let bad_date = |reason: String| Error::BadDate { line, reason };

        let loan_id = get(0);
        let borrower_id = get(1);
        if loan_id.is_empty() || borrower_id.is_empty() {
            return Err(invalid("empty loan_id or borrower_id".into()));
        }
        let origination: Month = get(2).parse().map_err(|e| bad_date(format!("{e}")))?;
        let mut products: Vec<String> = Vec::new();
        for p in get(3).split(';').map(str::trim).filter(|p| !p.is_empty()) {
            if !products.iter().any(|q| q == p) {
                products.push(p.to_string());
            }
        }
        if products.is_empty() {
            return Err(invalid("loan has no product".into()));
        }
        let (district, area) = (get(4), get(5));
        if district.is_empty() || area.is_empty() {
            return Err(invalid("empty district or area".into()));
        }
        let defaulted = parse_flag(get(6))
            .ok_or_else(|| invalid(format!("defaulted flag `{}` is not 0/1", get(6))))?;
        let default_month = match get(7) {
            "" => None,
            s => Some(s.parse::<Month>().map_err(|e| bad_date(format!("{e}")))?),
        };
        match (defaulted, default_month) {
            (true, None) => return Err(bad_date("defaulted loan without default_month".into())),
            (false, Some(_)) => {
                return Err(bad_date("default_month set on a loan that did not default".into()))
            }
            (true, Some(d)) if d < origination => {
                return Err(bad_date(format!(
                    "default_month {d} precedes origination {origination}"
                )))
            }
            _ => {}
        }
        match area_district.get(area) {
            Some(first) if first != district => {
                return Err(Error::AreaDistrictConflict {
                    line,
                    area: area.to_string(),
                    first: first.clone(),
                    second: district.to_string(),
                })
            }
            Some(_) => {}
            None => {
                area_district.insert(area.to_string(), district.to_string());
            }
        }
        records.push(LoanRecord {
            loan_id: loan_id.to_string(),
            borrower_id: borrower_id.to_string(),
            origination,
            products,
            district: district.to_string(),
            area: area.to_string(),
            defaulted,
            default_month,
        });
    }
    Ok(records)
}

pub fn write_loans<W: Write>(records: &[LoanRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LOAN_COLUMNS)?;
    for r in records {
        w.write_record([
            r.loan_id.as_str(),
            &r.borrower_id,
            &r.origination.to_string(),
            &r.products.join(";"),
            &r.district,
            &r.area,
            if r.defaulted { "1" } else { "0" },
            &r.default_month.map(|m| m.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Half-open window `[start, start + length_months)` whose last
/// `scoring_tail_months` months form the scoring tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub start: Month,
    pub length_months: u32,
    pub scoring_tail_months: u32,
}

impl WindowSpec {
    pub const DEFAULT_LENGTH: u32 = 60;
    pub const DEFAULT_TAIL: u32 = 1;

    pub fn new(start: Month, length_months: u32, scoring_tail_months: u32) -> Result<Self> {
        let w = WindowSpec {
            start,
            length_months,
            scoring_tail_months,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn with_defaults(start: Month) -> Self {
        WindowSpec {
            start,
            length_months: Self::DEFAULT_LENGTH,
            scoring_tail_months: Self::DEFAULT_TAIL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scoring_tail_months >= 1 && self.length_months > self.scoring_tail_months {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "window length {} must exceed scoring tail {} >= 1",
                self.length_months, self.scoring_tail_months
            )))
        }
    }

    /// First month after the window.
    pub fn end(&self) -> Month {
        self.start + self.length_months as i32
    }

    pub fn tail_start(&self) -> Month {
        self.end() - self.scoring_tail_months as i32
    }

    pub fn contains(&self, m: Month) -> bool {
        self.start <= m && m < self.end()
    }

    pub fn in_tail(&self, m: Month) -> bool {
        self.tail_start() <= m && m < self.end()
    }

    /// Start of the trailing `years`-year horizon, clamped to the window.
    pub fn horizon_start(&self, years: u32) -> Month {
        (self.end() - 12 * years as i32).max(self.start)
    }
}

pub fn window_records<'a>(records: &'a [LoanRecord], window: &WindowSpec) -> Vec<&'a LoanRecord> {
    records
        .iter()
        .filter(|r| window.contains(r.origination))
        .collect()
}

/// Two-layer network of the loans originated in `window`.
pub fn build_window_network(
    records: &[LoanRecord],
    window: &WindowSpec,
    stickiness: f64,
) -> Result<MultilayerNetwork> {
    window.validate()?;
    let mut product = LayerSpec::new(PRODUCT_LAYER);
    let mut geography = LayerSpec::new(GEOGRAPHY_LAYER);
    let mut declared: HashSet<String> = HashSet::new();
    let mut add = |layer: &mut LayerSpec, borrower: &str, node: String| {
        if declared.insert(node.clone()) {
            layer.specific_nodes.push(node.clone());
        }
        layer.edges.push(EdgeSpec::new(borrower, node, 1.0));
    };
    for r in records.iter().filter(|r| window.contains(r.origination)) {
        for p in &r.products {
            add(&mut product, &r.borrower_id, Connector::Product.node_id(p));
        }
        add(&mut geography, &r.borrower_id, Connector::Area.node_id(&r.area));
        add(&mut geography, &r.borrower_id, Connector::District.node_id(&r.district));
    }
    build_network(vec![product, geography], stickiness)
}

/// Source set V_I: borrowers with a loan originated in the window whose
/// default month falls before the scoring tail.
pub fn defaulter_set(records: &[LoanRecord], window: &WindowSpec) -> BTreeSet<String> {
    records
        .iter()
        .filter(|r| window.contains(r.origination))
        .filter(|r| {
            r.default_month
                .is_some_and(|d| window.start <= d && d < window.tail_start())
        })
        .map(|r| r.borrower_id.clone())
        .collect()
}

/// Borrowers with a loan originated in the scoring tail.
pub fn tail_borrowers(records: &[LoanRecord], window: &WindowSpec) -> BTreeSet<String> {
    records
        .iter()
        .filter(|r| window.in_tail(r.origination))
        .map(|r| r.borrower_id.clone())
        .collect()
}

/// First and last origination months.
pub fn origination_span(records: &[LoanRecord]) -> Option<(Month, Month)> {
    let first = records.iter().map(|r| r.origination).min()?;
    let last = records.iter().map(|r| r.origination).max()?;
    Some((first, last))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "loan_id,borrower_id,origination,products,district,area,defaulted,default_month\n";

    fn parse(rows: &str) -> Result<Vec<LoanRecord>> {
        parse_loans(format!("{HEADER}{rows}").as_bytes())
    }

    fn month(s: &str) -> Month {
        s.parse().unwrap()
    }

    pub(crate) fn loan(id: &str, b: &str, orig: &str, prods: &[&str], d: &str, a: &str, dm: Option<&str>) -> LoanRecord {
        LoanRecord {
            loan_id: id.into(),
            borrower_id: b.into(),
            origination: month(orig),
            products: prods.iter().map(|s| s.to_string()).collect(),
            district: d.into(),
            area: a.into(),
            defaulted: dm.is_some(),
            default_month: dm.map(month),
        }
    }

    #[test]
    fn parses_a_row() {
        let recs = parse("L1,B1,2001-03,wheat;corn,D1,A1,1,2002-07\n").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].products, ["wheat", "corn"]);
        assert!(recs[0].defaulted);
        assert_eq!(recs[0].default_month, Some(month("2002-07")));
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            parse("L1,B1,2001-03,wheat,D1,A1,0,2002-07\n"),
            Err(Error::BadDate { line: 2, .. })
        ));
        assert!(matches!(
            parse("L1,B1,2001-03,wheat,D1,A1,1,\n"),
            Err(Error::BadDate { .. })
        ));
        assert!(matches!(
            parse("L1,B1,2001-03,wheat,D1,A1,1,2000-01\n"),
            Err(Error::BadDate { .. })
        ));
        assert!(matches!(
            parse("L1,B1,2001-3,wheat,D1,A1,0,\n"),
            Err(Error::BadDate { .. })
        ));
        assert!(matches!(
            parse("L1,B1,2001-03,wheat,D1,A1,0,\nL2,B2,2001-04,corn,D2,A1,0,\n"),
            Err(Error::AreaDistrictConflict { line: 3, .. })
        ));
        assert!(matches!(
            parse_loans("loan_id,borrower_id\nL1,B1\n".as_bytes()),
            Err(Error::MissingColumn(c)) if c == "origination"
        ));
        assert!(matches!(
            parse("L1,B1,2001-03,,D1,A1,0,\n"),
            Err(Error::InvalidRecord { .. })
        ));
    }

    #[test]
    fn write_then_parse() {
        let recs = vec![
            loan("L1", "B1", "2001-03", &["wheat", "corn"], "D1", "A1", Some("2002-07")),
            loan("L2", "B2", "2001-04", &["rice"], "D1", "A2", None),
        ];
        let mut buf = Vec::new();
        write_loans(&recs, &mut buf).unwrap();
        assert_eq!(parse_loans(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn window_bounds() {
        let w = WindowSpec::with_defaults(month("2000-01"));
        assert_eq!(w.end(), month("2005-01"));
        assert_eq!(w.tail_start(), month("2004-12"));
        assert!(w.contains(month("2004-12")) && !w.contains(month("2005-01")));
        assert_eq!(w.horizon_start(1), month("2004-01"));
        assert_eq!(w.horizon_start(5), month("2000-01"));
        assert_eq!(w.horizon_start(10), month("2000-01"));
        assert!(WindowSpec::new(month("2000-01"), 1, 1).is_err());
        assert!(WindowSpec::new(month("2000-01"), 12, 0).is_err());
    }

    #[test]
    fn geography_sharing() {
        let recs = vec![
            loan("L1", "b1", "2000-01", &["p"], "D1", "A1", None),
            loan("L2", "b2", "2000-02", &["q"], "D1", "A1", None),
            loan("L3", "b3", "2000-03", &["r"], "D1", "A2", None),
        ];
        let w = WindowSpec::with_defaults(month("2000-01"));
        let net = build_window_network(&recs, &w, 1.0).unwrap();
        let geo = &net.layers()[1];
        let neigh = |b: &str| -> BTreeSet<usize> {
            let i = net.index_of(b).unwrap();
            geo.edges.iter().filter(|e| e.common == i).map(|e| e.specific).collect()
        };
        assert_eq!(neigh("b1").intersection(&neigh("b2")).count(), 2);
        assert_eq!(neigh("b1").intersection(&neigh("b3")).count(), 1);
    }

    #[test]
    fn product_degree_and_merging() {
        let recs = vec![
            loan("L1", "b1", "2000-01", &["wheat", "corn"], "D1", "A1", None),
            loan("L2", "b1", "2000-05", &["wheat"], "D1", "A1", None),
        ];
        let w = WindowSpec::with_defaults(month("2000-01"));
        let net = build_window_network(&recs, &w, 1.0).unwrap();
        assert_eq!(net.common_count(), 1);
        let prod = &net.layers()[0];
        assert_eq!(prod.edges.len(), 2);
        assert_eq!(prod.edges[0].weight, 2.0);
        // one (b1, area) and one (b1, district) pair after merging
        assert_eq!(net.layers()[1].edges.len(), 2);
    }

    #[test]
    fn empty_window_has_no_nodes() {
        let w = WindowSpec::with_defaults(month("2000-01"));
        let net = build_window_network(&[], &w, 1.0).unwrap();
        assert!(matches!(net.largest_component_fraction(), Err(Error::EmptyNetwork)));
    }

    #[test]
    fn defaulter_boundaries() {
        let start = month("2000-01");
        let w = WindowSpec::with_defaults(start);
        let recs = vec![
            // default in month 60 of 60: excluded
            loan("L1", "b1", "2000-01", &["p"], "D", "A", Some("2004-12")),
            // default in month 59: included
            loan("L2", "b2", "2000-01", &["p"], "D", "A", Some("2004-11")),
            // default after the window
            loan("L3", "b3", "2000-01", &["p"], "D", "A", Some("2005-03")),
            // originated only in the tail
            loan("L4", "b4", "2004-12", &["p"], "D", "A", Some("2004-12")),
        ];
        let v = defaulter_set(&recs, &w);
        assert_eq!(v.into_iter().collect::<Vec<_>>(), ["b2"]);
        assert!(defaulter_set(&recs[2..], &w).is_empty());
        assert_eq!(
            tail_borrowers(&recs, &w).into_iter().collect::<Vec<_>>(),
            ["b4"]
        );
    }
}
