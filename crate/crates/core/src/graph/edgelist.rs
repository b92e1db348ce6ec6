//! Layer edge lists as delimiter-separated text: `common_id,specific_id,weight`
//! with a header row. An empty weight cell means 1.

use std::io::{Read, Write};

use super::network::{LayerSpec, MultilayerNetwork};
use crate::error::{Error, Result};

pub fn read_layer<R: Read>(name: &str, reader: R) -> Result<LayerSpec> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |want: &str| {
        headers
            .iter()
            .position(|h| h == want)
            .ok_or_else(|| Error::MissingColumn(want.to_string()))
    };
    let (ci, si) = (col("common_id")?, col("specific_id")?);
    let wi = headers.iter().position(|h| h == "weight");

    let mut layer = LayerSpec::new(name);
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let (common, specific) = (field(ci), field(si));
        if common.is_empty() || specific.is_empty() {
            return Err(Error::InvalidRecord {
                line,
                reason: "empty node id".into(),
            });
        }
        let weight = match wi.map(field) {
            None | Some("") => 1.0,
            Some(w) => w.parse::<f64>().map_err(|_| Error::InvalidRecord {
                line,
                reason: format!("weight `{w}` is not a number"),
            })?,
        };
        layer.push_edge(common, specific, weight);
    }
    Ok(layer)
}

pub fn write_layer<W: Write>(net: &MultilayerNetwork, layer: usize, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["common_id", "specific_id", "weight"])?;
    for e in &net.layers()[layer].edges {
        w.write_record([
            net.node(e.common).id.as_str(),
            net.node(e.specific).id.as_str(),
            &e.weight.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
