//! Option-chain CSV ingestion, validation, synthetic-chain generation,
//! and run-configuration parsing.
//!
//! Canonical CSV schema (UTF-8, LF, header row required):
//! `strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta`
//! with missing optionals left empty. When both bid and ask are present the
//! mid is recomputed as (bid + ask)/2; otherwise the `call_mid` column is
//! taken as the market price.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rnd::MarketContext;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    pub strike: f64,
    pub call_bid: Option<f64>,
    pub call_ask: Option<f64>,
    pub call_mid: f64,
    pub quoted_iv: Option<f64>,
    pub quoted_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionChain {
    pub rows: Vec<Quote>,
    pub symbol: String,
    pub dte_days: u32,
}

impl OptionChain {
    pub fn new(rows: Vec<Quote>, symbol: impl Into<String>, dte_days: u32) -> Result<Self> {
        let chain = Self { rows, symbol: symbol.into(), dte_days };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Chain("chain has no rows".into()));
        }
        for (i, q) in self.rows.iter().enumerate() {
            if !(q.strike > 0.0 && q.strike.is_finite()) {
                return Err(Error::Chain(format!(
                    "row {}: strike must be positive, got {}",
                    i + 1,
                    q.strike
                )));
            }
            if !(q.call_mid > 0.0 && q.call_mid.is_finite()) {
                return Err(Error::Chain(format!(
                    "row {}: call_mid must be positive, got {}",
                    i + 1,
                    q.call_mid
                )));
            }
        }
        for w in self.rows.windows(2) {
            if w[1].strike <= w[0].strike {
                return Err(Error::Chain(format!(
                    "strikes must be strictly increasing: {} does not exceed {}",
                    w[1].strike, w[0].strike
                )));
            }
        }
        Ok(())
    }

    /// Calibration additionally needs at least 3 strikes.
    pub fn validate_for_calibration(&self) -> Result<()> {
        self.validate()?;
        if self.rows.len() < 3 {
            return Err(Error::Chain(format!(
                "calibration needs at least 3 strikes, got {}",
                self.rows.len()
            )));
        }
        Ok(())
    }

    pub fn strikes(&self) -> Vec<f64> {
        self.rows.iter().map(|q| q.strike).collect()
    }

    pub fn mids(&self) -> Vec<f64> {
        self.rows.iter().map(|q| q.call_mid).collect()
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    strike: f64,
    call_bid: Option<f64>,
    call_ask: Option<f64>,
    call_mid: Option<f64>,
    quoted_iv: Option<f64>,
    quoted_delta: Option<f64>,
}

/// Load and validate a chain from the canonical CSV schema. The symbol and
/// DTE metadata are recovered from a `NAME_DAYS.csv` file stem when present
/// (e.g. `SPY_63.csv` -> symbol SPY, 63 days), else default to the stem / 0.
pub fn load_chain(path: impl AsRef<Path>) -> Result<OptionChain> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<RawRecord>().enumerate() {
        let row_no = i + 2; // 1-based, after the header
        let rec = rec.map_err(|e| Error::Csv(format!("{}: row {row_no}: {e}", path.display())))?;
        let mid = match (rec.call_bid, rec.call_ask) {
            (Some(b), Some(a)) => 0.5 * (b + a),
            _ => rec.call_mid.ok_or_else(|| {
                Error::Csv(format!(
                    "{}: row {row_no}: need call_mid or both call_bid and call_ask",
                    path.display()
                ))
            })?,
        };
        rows.push(Quote {
            strike: rec.strike,
            call_bid: rec.call_bid,
            call_ask: rec.call_ask,
            call_mid: mid,
            quoted_iv: rec.quoted_iv,
            quoted_delta: rec.quoted_delta,
        });
    }
    if rows.is_empty() {
        return Err(Error::Chain(format!("{}: no data rows", path.display())));
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (symbol, dte) = match stem.rsplit_once('_') {
        Some((name, days)) => match days.parse::<u32>() {
            Ok(d) => (name.to_string(), d),
            Err(_) => (stem.clone(), 0),
        },
        None => (stem.clone(), 0),
    };
    OptionChain::new(rows, symbol, dte)
}

/// Write a chain back out in the canonical schema.
pub fn save_chain(chain: &OptionChain, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(|e| Error::Csv(e.to_string()))?;
    writer
        .write_record(["strike", "call_bid", "call_ask", "call_mid", "quoted_iv", "quoted_delta"])
        .map_err(|e| Error::Csv(e.to_string()))?;
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for q in &chain.rows {
        writer
            .write_record([
                format!("{}", q.strike),
                fmt_opt(q.call_bid),
                fmt_opt(q.call_ask),
                format!("{}", q.call_mid),
                fmt_opt(q.quoted_iv),
                fmt_opt(q.quoted_delta),
            ])
            .map_err(|e| Error::Csv(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Build a chain by pricing the given strikes with an arbitrary model,
/// optionally adding i.i.d. Gaussian noise of standard deviation
/// `noise_sigma` (deterministic for a given seed).
pub fn synth_chain<F>(
    mut pricer: F,
    strikes: &[f64],
    noise_sigma: f64,
    seed: u64,
    symbol: &str,
    dte_days: u32,
) -> Result<OptionChain>
where
    F: FnMut(f64) -> Result<f64>,
{
    if strikes.is_empty() {
        return Err(Error::Chain("synth_chain: empty strike list".into()));
    }
    use rand::SeedableRng;
    use rand_distr::Distribution;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, 1.0).map_err(|e| Error::Chain(e.to_string()))?;
    let mut rows = Vec::with_capacity(strikes.len());
    for &k in strikes {
        let price = pricer(k)?;
        let noise = if noise_sigma > 0.0 {
            noise_sigma * normal.sample(&mut rng)
        } else {
            0.0
        };
        rows.push(Quote {
            strike: k,
            call_bid: None,
            call_ask: None,
            call_mid: (price + noise).max(1e-8),
            quoted_iv: None,
            quoted_delta: None,
        });
    }
    OptionChain::new(rows, symbol, dte_days)
}

/// Run configuration used by the CLI: market data plus model selection,
/// initial parameters, and simulation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub spot: f64,
    pub rate: f64,
    pub div_yield: f64,
    pub dte_days: u32,
    #[serde(default)]
    pub models: Vec<String>,
    #[serde(default)]
    pub initial_params: std::collections::BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: usize,
}

fn default_paths() -> usize {
    30_000
}

impl RunConfig {
    pub fn market_context(&self) -> Result<MarketContext<f64>> {
        MarketContext::from_dte(self.spot, self.rate, self.div_yield, self.dte_days as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_well_formed_file() {
        let f = write_tmp(
            "strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta\n\
             420,,,30.5,0.17,\n\
             445,5.0,5.43,,,0.5\n\
             470,,,0.55,0.15,\n",
        );
        let chain = load_chain(f.path()).unwrap();
        assert_eq!(chain.rows.len(), 3);
        assert_eq!(chain.rows[1].call_mid, 5.215);
        assert_eq!(chain.rows[2].quoted_iv, Some(0.15));
        assert!(chain.rows.windows(2).all(|w| w[0].strike < w[1].strike));
    }

    #[test]
    fn mid_is_bid_ask_average_to_the_cent() {
        let f = write_tmp(
            "strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta\n\
             424,5.0,5.43,,,\n",
        );
        let chain = load_chain(f.path()).unwrap();
        assert!((chain.rows[0].call_mid - 5.215).abs() < 1e-12);
    }

    #[test]
    fn duplicate_strike_names_the_strike() {
        let f = write_tmp(
            "strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta\n\
             445,,,5.0,,\n\
             445,,,4.9,,\n",
        );
        let err = load_chain(f.path()).unwrap_err().to_string();
        assert!(err.contains("445"), "{err}");
    }

    #[test]
    fn empty_file_is_an_error() {
        let f = write_tmp("strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta\n");
        assert!(load_chain(f.path()).is_err());
    }

    #[test]
    fn parse_error_reports_row_number() {
        let f = write_tmp(
            "strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta\n\
             420,,,30.5,,\n\
             oops,,,1.0,,\n",
        );
        let err = load_chain(f.path()).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
    }

    #[test]
    fn round_trip_identity() {
        let chain = OptionChain::new(
            vec![
                Quote { strike: 420.0, call_bid: Some(30.0), call_ask: Some(31.0), call_mid: 30.5, quoted_iv: Some(0.17), quoted_delta: None },
                Quote { strike: 445.0, call_bid: None, call_ask: None, call_mid: 12.25, quoted_iv: None, quoted_delta: Some(0.5) },
            ],
            "TEST",
            63,
        )
        .unwrap();
        let f = tempfile::Builder::new().prefix("TEST_63").suffix(".csv").tempfile().unwrap();
        save_chain(&chain, f.path()).unwrap();
        let back = load_chain(f.path()).unwrap();
        assert_eq!(back.rows, chain.rows);
    }

    #[test]
    fn stem_metadata_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("SPY_63.csv");
        let chain = OptionChain::new(
            vec![Quote { strike: 445.0, call_bid: None, call_ask: None, call_mid: 12.0, quoted_iv: None, quoted_delta: None }],
            "x",
            0,
        )
        .unwrap();
        save_chain(&chain, &path).unwrap();
        let back = load_chain(&path).unwrap();
        assert_eq!(back.symbol, "SPY");
        assert_eq!(back.dte_days, 63);
    }

    #[test]
    fn synth_chain_zero_noise_reprices_exactly() {
        let strikes = [400.0, 445.0, 490.0];
        let chain = synth_chain(|k| Ok(500.0 - k), &strikes, 0.0, 0, "SYN", 63).unwrap();
        for (q, &k) in chain.rows.iter().zip(&strikes) {
            assert_eq!(q.call_mid, 500.0 - k);
        }
        assert!(synth_chain(|k| Ok(k), &[], 0.0, 0, "SYN", 63).is_err());
    }

    #[test]
    fn synth_chain_noise_is_deterministic() {
        let strikes: Vec<f64> = (0..20).map(|i| 400.0 + 5.0 * i as f64).collect();
        let a = synth_chain(|_| Ok(10.0), &strikes, 0.01, 42, "SYN", 63).unwrap();
        let b = synth_chain(|_| Ok(10.0), &strikes, 0.01, 42, "SYN", 63).unwrap();
        assert_eq!(a.rows, b.rows);
        assert!(a.rows.iter().any(|q| (q.call_mid - 10.0).abs() > 1e-6));
    }

    #[test]
    fn run_config_json_round_trip() {
        let json = r#"{"spot":445.92,"rate":0.0016,"div_yield":0.0123,"dte_days":63,"models":["bs","gg"],"seed":7}"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.paths, 30_000);
        let ctx = cfg.market_context().unwrap();
        assert!((ctx.ttm_years - 63.0 / 365.0).abs() < 1e-15);
        let back = serde_json::to_string(&cfg).unwrap();
        let cfg2: RunConfig = serde_json::from_str(&back).unwrap();
        assert_eq!(cfg2.spot, cfg.spot);
    }
}
