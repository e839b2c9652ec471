//! Trade-index kernels over bilateral trade-flow aggregates.
//!
//! Three indices: trade intensity (TII), revealed comparative advantage
//! (RCA), and pairwise value-added shares. Inputs come from a flow table
//! that either carries headline aggregates directly or derives them by
//! summation over flow rows. Report values are rounded half-even to three
//! decimals.
//!
//! Aggregate key vocabulary (colon-separated, names free-form):
//!   x_ij:<i>:<j>   exports of country i to country j
//!   x_i:<i>        total exports of country i
//!   m_wj:<j>       world imports into country j
//!   m_w            world trade total
//!   cs:<c>:<s>     country c's exports in sector s
//!   ct:<c>         country c's total exports
//!   ws:<s>         world exports in sector s
//!   wt             world total exports
//!   tiva:<c>:<s>   country c's value added in sector s (override only)

use crate::error::IndexError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// One bilateral flow row, the most granular input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub origin: String,
    pub dest: String,
    pub sector: String,
    pub year: u32,
    pub value: f64,
}

/// Flow rows plus directly supplied aggregates. Supplied values always win
/// over summation, because published headline figures rarely reconcile with
/// a full matrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TradeFlowTable {
    pub flows: Vec<Flow>,
    pub overrides: BTreeMap<String, f64>,
}

impl TradeFlowTable {
    /// Resolves an aggregate by key: override first, then summation over
    /// the flow rows where the key form permits it.
    pub fn aggregate(&self, key: &str) -> Result<f64, IndexError> {
        if let Some(v) = self.overrides.get(key) {
            return Ok(*v);
        }
        let parts: Vec<&str> = key.split(':').collect();
        let sum = |pred: &dyn Fn(&Flow) -> bool| -> Option<f64> {
            if self.flows.is_empty() {
                return None;
            }
            Some(self.flows.iter().filter(|f| pred(f)).map(|f| f.value).sum())
        };
        let derived = match parts.as_slice() {
            ["x_ij", i, j] => sum(&|f| f.origin == *i && f.dest == *j),
            ["x_i", i] | ["ct", i] => sum(&|f| f.origin == *i),
            ["m_wj", j] => sum(&|f| f.dest == *j),
            ["m_w"] | ["wt"] => sum(&|_| true),
            ["cs", c, s] => sum(&|f| f.origin == *c && f.sector == *s),
            ["ws", s] => sum(&|f| f.sector == *s),
            _ => None,
        };
        derived.ok_or_else(|| IndexError::MissingAggregate(key.to_string()))
    }

    /// Parses the delimited fixture text: one `key<TAB>value` pair per
    /// line, or `flow<TAB>origin<TAB>dest<TAB>sector<TAB>year<TAB>value`
    /// rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table = TradeFlowTable::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(|f| f.trim()).collect();
            let bad = |msg: &str| format!("line {}: {}", lineno + 1, msg);
            match fields.as_slice() {
                ["flow", origin, dest, sector, year, value] => {
                    table.flows.push(Flow {
                        origin: origin.to_string(),
                        dest: dest.to_string(),
                        sector: sector.to_string(),
                        year: year.parse().map_err(|_| bad("bad year"))?,
                        value: value.parse().map_err(|_| bad("bad value"))?,
                    });
                }
                [key, value] => {
                    let v: f64 = value.parse().map_err(|_| bad("bad value"))?;
                    table.overrides.insert(key.to_string(), v);
                }
                _ => return Err(bad("expected `key\\tvalue` or a 6-field flow row")),
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }
}

/// Trade intensity: (x_ij / x_i) / (m_wj / m_w). Above 1 means the pair
/// trades more intensively than the world average.
pub fn tii(x_ij: f64, x_i: f64, m_wj: f64, m_w: f64) -> Result<f64, IndexError> {
    for (name, v) in [("x_ij", x_ij), ("x_i", x_i), ("m_wj", m_wj), ("m_w", m_w)] {
        if v <= 0.0 || !v.is_finite() {
            return Err(IndexError::NonPositiveInput(name));
        }
    }
    Ok((x_ij / x_i) / (m_wj / m_w))
}

/// Revealed comparative advantage: the country's sector share over the
/// world's sector share. Above 1 signals advantage.
pub fn rca(
    country_sector: f64,
    country_total: f64,
    world_sector: f64,
    world_total: f64,
) -> Result<f64, IndexError> {
    if country_sector < 0.0 || !country_sector.is_finite() {
        return Err(IndexError::NonPositiveInput("country_sector"));
    }
    for (name, v) in [
        ("country_total", country_total),
        ("world_sector", world_sector),
        ("world_total", world_total),
    ] {
        if v <= 0.0 || !v.is_finite() {
            return Err(IndexError::NonPositiveInput(name));
        }
    }
    Ok((country_sector / country_total) / (world_sector / world_total))
}

/// Each country's percentage of the combined value added. Pairwise
/// normalization, not the inter-country input-output measure.
pub fn tiva_shares(
    values: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>, IndexError> {
    let mut total = 0.0;
    for v in values.values() {
        if *v < 0.0 || !v.is_finite() {
            return Err(IndexError::NonPositiveInput("value_added"));
        }
        total += v;
    }
    if total == 0.0 {
        return Err(IndexError::AllZero);
    }
    Ok(values
        .iter()
        .map(|(k, v)| (k.clone(), v / total * 100.0))
        .collect())
}

/// Rounds half-even at the given number of decimals, the report convention.
pub fn round_half_even(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let y = x * scale;
    let floor = y.floor();
    let diff = y - floor;
    let rounded = if diff > 0.5 {
        floor + 1.0
    } else if diff < 0.5 {
        floor
    } else if (floor as i64) % 2 == 0 {
        floor
    } else {
        floor + 1.0
    };
    rounded / scale
}

/// A request for one index computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexRequest {
    Tii { exporter: String, importer: String },
    Rca { country: String, sector: String },
    TivaShares { sector: String, countries: Vec<String> },
}

/// One computed row, inputs echoed for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    pub label: String,
    pub inputs: Vec<(String, f64)>,
    /// Rounded half-even to 3 decimals.
    pub value: f64,
    pub interpretation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub rows: Vec<IndexRow>,
}

/// Computes every requested index from the table. An empty request list
/// yields an empty report.
pub fn index_report(
    table: &TradeFlowTable,
    requests: &[IndexRequest],
) -> Result<IndexReport, IndexError> {
    let mut rows = Vec::new();
    for req in requests {
        match req {
            IndexRequest::Tii { exporter, importer } => {
                let keys = [
                    format!("x_ij:{exporter}:{importer}"),
                    format!("x_i:{exporter}"),
                    format!("m_wj:{importer}"),
                    "m_w".to_string(),
                ];
                let mut vals = [0.0; 4];
                for (slot, key) in vals.iter_mut().zip(&keys) {
                    *slot = table.aggregate(key)?;
                }
                let value = tii(vals[0], vals[1], vals[2], vals[3])?;
                rows.push(IndexRow {
                    label: format!("TII {exporter} to {importer}"),
                    inputs: keys.iter().cloned().zip(vals).collect(),
                    value: round_half_even(value, 3),
                    interpretation: if value > 1.0 {
                        "more intensive than world average".to_string()
                    } else {
                        "not more intensive than world average".to_string()
                    },
                });
            }
            IndexRequest::Rca { country, sector } => {
                let keys = [
                    format!("cs:{country}:{sector}"),
                    format!("ct:{country}"),
                    format!("ws:{sector}"),
                    "wt".to_string(),
                ];
                let mut vals = [0.0; 4];
                for (slot, key) in vals.iter_mut().zip(&keys) {
                    *slot = table.aggregate(key)?;
                }
                let value = rca(vals[0], vals[1], vals[2], vals[3])?;
                rows.push(IndexRow {
                    label: format!("RCA {country} ({sector})"),
                    inputs: keys.iter().cloned().zip(vals).collect(),
                    value: round_half_even(value, 3),
                    interpretation: if value > 1.0 {
                        "comparative advantage".to_string()
                    } else {
                        "no comparative advantage".to_string()
                    },
                });
            }
            IndexRequest::TivaShares { sector, countries } => {
                let mut values = BTreeMap::new();
                let mut inputs = Vec::new();
                for c in countries {
                    let key = format!("tiva:{c}:{sector}");
                    let v = table.aggregate(&key)?;
                    inputs.push((key, v));
                    values.insert(c.clone(), v);
                }
                let shares = tiva_shares(&values)?;
                for c in countries {
                    rows.push(IndexRow {
                        label: format!("TiVA share {c} ({sector})"),
                        inputs: inputs.clone(),
                        value: round_half_even(shares[c], 3),
                        interpretation: "percent of combined value added".to_string(),
                    });
                }
            }
        }
    }
    Ok(IndexReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const B: f64 = 1.0e9;

    // 2021 corridor aggregates used across the tests.
    fn corridor() -> TradeFlowTable {
        let mut t = TradeFlowTable::default();
        for (k, v) in [
            ("x_ij:India:Brazil", 6.77 * B),
            ("x_i:India", 403.0 * B),
            ("m_wj:Brazil", 225.0 * B),
            ("m_w", 21_000.0 * B),
            ("cs:India:Pharmaceuticals", 21.7 * B),
            ("ct:India", 403.0 * B),
            ("cs:Brazil:Pharmaceuticals", 1.36 * B),
            ("ct:Brazil", 288.0 * B),
            ("ws:Pharmaceuticals", 806.0 * B),
            ("wt", 21_000.0 * B),
            ("tiva:India:Pharmaceuticals", 10.2 * B),
            ("tiva:Brazil:Pharmaceuticals", 6.4 * B),
        ] {
            t.overrides.insert(k.to_string(), v);
        }
        t
    }

    #[test]
    fn tii_reproduces_the_corridor_value() {
        let v = tii(6.77 * B, 403.0 * B, 225.0 * B, 21_000.0 * B).unwrap();
        assert!((v - 1.567).abs() <= 0.001, "tii = {v}");
        assert_eq!(round_half_even(v, 3), 1.568);
    }

    #[test]
    fn tii_trivial_points() {
        // identical shares are neutral
        assert!((tii(10.0, 100.0, 100.0, 1000.0).unwrap() - 1.0).abs() < 1e-12);
        // hand arithmetic: (10/100)/(50/1000) = 2
        assert!((tii(10.0, 100.0, 50.0, 1000.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            tii(0.0, 1.0, 1.0, 1.0),
            Err(IndexError::NonPositiveInput("x_ij"))
        );
        assert_eq!(
            tii(1.0, 1.0, -2.0, 1.0),
            Err(IndexError::NonPositiveInput("m_wj"))
        );
    }

    #[test]
    fn rca_reproduces_both_corridor_values() {
        let india = rca(21.7 * B, 403.0 * B, 806.0 * B, 21_000.0 * B).unwrap();
        assert!((india - 1.40).abs() <= 0.01, "india = {india}");
        assert_eq!(round_half_even(india, 3), 1.403);
        let brazil = rca(1.36 * B, 288.0 * B, 806.0 * B, 21_000.0 * B).unwrap();
        assert!((brazil - 0.12).abs() <= 0.01, "brazil = {brazil}");
        assert_eq!(round_half_even(brazil, 3), 0.123);
    }

    #[test]
    fn rca_neutral_and_edge_inputs() {
        assert!((rca(5.0, 50.0, 10.0, 100.0).unwrap() - 1.0).abs() < 1e-12);
        // zero sector exports give zero advantage, not an error
        assert_eq!(rca(0.0, 50.0, 10.0, 100.0).unwrap(), 0.0);
        assert_eq!(
            rca(5.0, 0.0, 10.0, 100.0),
            Err(IndexError::NonPositiveInput("country_total"))
        );
        assert_eq!(
            rca(5.0, 50.0, 0.0, 100.0),
            Err(IndexError::NonPositiveInput("world_sector"))
        );
    }

    #[test]
    fn tiva_reproduces_the_pairwise_shares() {
        let values: BTreeMap<String, f64> =
            [("India".to_string(), 10.2 * B), ("Brazil".to_string(), 6.4 * B)]
                .into_iter()
                .collect();
        let shares = tiva_shares(&values).unwrap();
        assert!((shares["India"] - 61.4).abs() <= 0.1, "india = {}", shares["India"]);
        assert!((shares["Brazil"] - 38.6).abs() <= 0.1, "brazil = {}", shares["Brazil"]);
        assert_eq!(round_half_even(shares["India"], 3), 61.446);
        assert_eq!(round_half_even(shares["Brazil"], 3), 38.554);
    }

    #[test]
    fn tiva_trivial_points() {
        let equal: BTreeMap<String, f64> =
            [("A".to_string(), 3.0), ("B".to_string(), 3.0)].into_iter().collect();
        let shares = tiva_shares(&equal).unwrap();
        assert_eq!(shares["A"], 50.0);
        assert_eq!(shares["B"], 50.0);

        let abc: BTreeMap<String, f64> = [
            ("A".to_string(), 1.0),
            ("B".to_string(), 1.0),
            ("C".to_string(), 2.0),
        ]
        .into_iter()
        .collect();
        let shares = tiva_shares(&abc).unwrap();
        assert_eq!(
            (shares["A"], shares["B"], shares["C"]),
            (25.0, 25.0, 50.0)
        );

        let zero: BTreeMap<String, f64> =
            [("A".to_string(), 0.0)].into_iter().collect();
        assert_eq!(tiva_shares(&zero), Err(IndexError::AllZero));
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(round_half_even(1.2345, 3), 1.234);
        assert_eq!(round_half_even(1.2335, 3), 1.234);
        assert_eq!(round_half_even(1.2346, 3), 1.235);
        assert_eq!(round_half_even(2.5, 0), 2.0);
        assert_eq!(round_half_even(3.5, 0), 4.0);
    }

    proptest! {
        // multiplying all inputs by one positive constant changes nothing
        #[test]
        fn tii_is_scale_invariant(
            a in 1.0f64..1e6, b in 1.0f64..1e6, c in 1.0f64..1e6, d in 1.0f64..1e6,
            k in 0.001f64..1e6,
        ) {
            let base = tii(a, b, c, d).unwrap();
            let scaled = tii(k * a, k * b, k * c, k * d).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-9 * base.abs().max(1.0));
        }

        #[test]
        fn rca_is_scale_invariant(
            a in 0.0f64..1e6, b in 1.0f64..1e6, c in 1.0f64..1e6, d in 1.0f64..1e6,
            k in 0.001f64..1e6,
        ) {
            let base = rca(a, b, c, d).unwrap();
            let scaled = rca(k * a, k * b, k * c, k * d).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-9 * base.abs().max(1.0));
        }

        // shares always total 100 within accumulated rounding
        #[test]
        fn tiva_shares_sum_to_one_hundred(
            vals in proptest::collection::vec(0.0f64..1e9, 1..8),
        ) {
            prop_assume!(vals.iter().sum::<f64>() > 0.0);
            let map: BTreeMap<String, f64> = vals
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("c{i}"), *v))
                .collect();
            let shares = tiva_shares(&map).unwrap();
            let total: f64 = shares.values().map(|s| round_half_even(*s, 3)).sum();
            prop_assert!((total - 100.0).abs() <= 0.1, "total = {total}");
        }
    }

    #[test]
    fn report_contains_all_corridor_values() {
        let table = corridor();
        let requests = [
            IndexRequest::Tii { exporter: "India".into(), importer: "Brazil".into() },
            IndexRequest::Rca { country: "India".into(), sector: "Pharmaceuticals".into() },
            IndexRequest::Rca { country: "Brazil".into(), sector: "Pharmaceuticals".into() },
            IndexRequest::TivaShares {
                sector: "Pharmaceuticals".into(),
                countries: vec!["India".into(), "Brazil".into()],
            },
        ];
        let report = index_report(&table, &requests).unwrap();
        let values: Vec<f64> = report.rows.iter().map(|r| r.value).collect();
        assert_eq!(values, vec![1.568, 1.403, 0.123, 61.446, 38.554]);
        assert_eq!(report.rows[0].interpretation, "more intensive than world average");
        assert_eq!(report.rows[1].interpretation, "comparative advantage");
        assert_eq!(report.rows[2].interpretation, "no comparative advantage");
        // inputs echoed for audit
        assert_eq!(report.rows[0].inputs[0].0, "x_ij:India:Brazil");
        assert_eq!(report.rows[0].inputs[0].1, 6.77 * B);
    }

    #[test]
    fn report_empty_request_and_missing_aggregate() {
        let table = corridor();
        assert!(index_report(&table, &[]).unwrap().rows.is_empty());
        let missing = index_report(
            &table,
            &[IndexRequest::Rca { country: "India".into(), sector: "Textiles".into() }],
        );
        assert_eq!(
            missing,
            Err(IndexError::MissingAggregate("cs:India:Textiles".to_string()))
        );
    }

    #[test]
    fn aggregates_derive_from_flow_rows_when_not_overridden() {
        let text = "\
# flows only
flow\tIndia\tBrazil\tPharmaceuticals\t2021\t100
flow\tIndia\tBrazil\tMachinery\t2021\t50
flow\tIndia\tUSA\tPharmaceuticals\t2021\t200
flow\tBrazil\tIndia\tSoybeans\t2021\t75
";
        let table = TradeFlowTable::parse(text).unwrap();
        assert_eq!(table.aggregate("x_ij:India:Brazil").unwrap(), 150.0);
        assert_eq!(table.aggregate("x_i:India").unwrap(), 350.0);
        assert_eq!(table.aggregate("m_wj:Brazil").unwrap(), 150.0);
        assert_eq!(table.aggregate("m_w").unwrap(), 425.0);
        assert_eq!(table.aggregate("cs:India:Pharmaceuticals").unwrap(), 300.0);
        assert_eq!(table.aggregate("ws:Pharmaceuticals").unwrap(), 300.0);
        assert_eq!(table.aggregate("wt").unwrap(), 425.0);
        // value-added figures never derive from flows
        assert_eq!(
            table.aggregate("tiva:India:Pharmaceuticals"),
            Err(IndexError::MissingAggregate("tiva:India:Pharmaceuticals".to_string()))
        );
    }

    #[test]
    fn overrides_win_over_summation() {
        let text = "\
flow\tIndia\tBrazil\tPharmaceuticals\t2021\t100
x_i:India\t999
";
        let table = TradeFlowTable::parse(text).unwrap();
        assert_eq!(table.aggregate("x_i:India").unwrap(), 999.0);
        assert_eq!(table.aggregate("x_ij:India:Brazil").unwrap(), 100.0);
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(TradeFlowTable::parse("just-one-field").is_err());
        assert!(TradeFlowTable::parse("key\tnot-a-number").is_err());
        assert!(TradeFlowTable::parse("flow\tIndia\tBrazil\tX\tyear\t5").is_err());
        let err = TradeFlowTable::parse("# ok\nbad line").unwrap_err();
        assert!(err.starts_with("line 2:"), "{err}");
    }
}
