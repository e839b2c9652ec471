//! Assets, minor-unit amounts, party identifiers, and exact rational
//! arithmetic for FX rates, basket weights, and prices.
//!
//! Balances are integer minor units (two decimals for every asset) so
//! conservation checks are exact. Rates are arbitrary-precision rationals;
//! every conversion floors to minor units.

use crate::enc::{CanonicalEncode, Encoder};
use crate::error::TxError;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// Minor units per whole unit, for every asset.
pub const MINOR_PER_UNIT: u64 = 100;

/// Settlement assets. BRL and INR are the corridor fiat legs, USDC the
/// stable token, BASKET the goods-basket settlement unit.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "UPPERCASE")]
pub enum Asset {
    Brl,
    Inr,
    Usdc,
    Basket,
}

impl Asset {
    pub fn code(&self) -> &'static str {
        match self {
            Asset::Brl => "BRL",
            Asset::Inr => "INR",
            Asset::Usdc => "USDC",
            Asset::Basket => "BASKET",
        }
    }
}

impl fmt::Display for Asset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Asset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BRL" => Ok(Asset::Brl),
            "INR" => Ok(Asset::Inr),
            "USDC" => Ok(Asset::Usdc),
            "BASKET" => Ok(Asset::Basket),
            other => Err(format!("unknown asset {other:?}")),
        }
    }
}

impl CanonicalEncode for Asset {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(self.code());
    }
}

/// An amount of one asset in minor units.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Money {
    pub asset: Asset,
    /// Minor units (hundredths of one asset unit).
    pub minor: u64,
}

impl Money {
    pub fn new(asset: Asset, minor: u64) -> Self {
        Money { asset, minor }
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", format_minor(self.minor), self.asset)
    }
}

impl CanonicalEncode for Money {
    fn encode(&self, enc: &mut Encoder) {
        self.asset.encode(enc);
        enc.u64(self.minor);
    }
}

/// Formats minor units as a decimal with exactly two places: 123456 → "1234.56".
pub fn format_minor(minor: u64) -> String {
    format!("{}.{:02}", minor / MINOR_PER_UNIT, minor % MINOR_PER_UNIT)
}

/// Parses a decimal amount with at most two fractional digits into minor
/// units: "1234.5" → 123450.
pub fn parse_minor(s: &str) -> Result<u64, String> {
    let (whole, frac) = match s.split_once('.') {
        Some((w, f)) => (w, f),
        None => (s, ""),
    };
    if whole.is_empty() || whole.chars().any(|c| !c.is_ascii_digit()) {
        return Err(format!("bad amount {s:?}"));
    }
    if frac.len() > 2 || frac.chars().any(|c| !c.is_ascii_digit()) {
        return Err(format!("bad amount {s:?} (at most 2 decimal places)"));
    }
    let whole: u64 = whole.parse().map_err(|_| format!("amount {s:?} too large"))?;
    let mut frac_minor = 0u64;
    for (i, c) in frac.chars().enumerate() {
        frac_minor += (c as u64 - '0' as u64) * if i == 0 { 10 } else { 1 };
    }
    whole
        .checked_mul(MINOR_PER_UNIT)
        .and_then(|w| w.checked_add(frac_minor))
        .ok_or_else(|| format!("amount {s:?} too large"))
}

/// Participant identifier (party or validator; banks are both).
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct PartyId(pub String);

impl PartyId {
    pub fn new(id: impl Into<String>) -> Self {
        PartyId(id.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PartyId {
    fn from(s: &str) -> Self {
        PartyId(s.to_string())
    }
}

impl CanonicalEncode for PartyId {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.0);
    }
}

/// Exact non-negative rational, used for FX rates, basket weights, and
/// prices. Parses from "n/d", an integer string, or a plain decimal
/// ("0.20"); serializes in reduced "n/d" (or "n") form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ratio(BigRational);

impl Ratio {
    pub fn from_u64(n: u64) -> Self {
        Ratio(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(numer: u64, denom: u64) -> Result<Self, String> {
        if denom == 0 {
            return Err("zero denominator".to_string());
        }
        Ok(Ratio(BigRational::new(
            BigInt::from(numer),
            BigInt::from(denom),
        )))
    }

    pub fn zero() -> Self {
        Ratio(BigRational::zero())
    }

    pub fn one() -> Self {
        Ratio(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn add(&self, other: &Ratio) -> Ratio {
        Ratio(&self.0 + &other.0)
    }

    pub fn mul(&self, other: &Ratio) -> Ratio {
        Ratio(&self.0 * &other.0)
    }

    /// floor(x × self) as minor units. Errors on results outside u64.
    pub fn mul_floor_u64(&self, x: u64) -> Result<u64, TxError> {
        let prod = &self.0 * BigRational::from_integer(BigInt::from(x));
        let floored = prod.numer().div_floor(prod.denom());
        floored.to_u64().ok_or(TxError::AmountOverflow)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.numer().to_f64().unwrap_or(f64::NAN)
            / self.0.denom().to_f64().unwrap_or(f64::NAN)
    }

    fn canonical_string(&self) -> String {
        if self.0.denom().is_one() {
            self.0.numer().to_string()
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

impl FromStr for Ratio {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad ratio {s:?}: {e}"))?;
            let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad ratio {s:?}: {e}"))?;
            if d.is_zero() {
                return Err(format!("bad ratio {s:?}: zero denominator"));
            }
            let r = BigRational::new(n, d);
            if r.is_negative() {
                return Err(format!("bad ratio {s:?}: negative"));
            }
            return Ok(Ratio(r));
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return Err(format!("bad ratio {s:?}"));
        }
        let digits_ok =
            |t: &str| !t.is_empty() && t.chars().all(|c| c.is_ascii_digit());
        if !(whole.is_empty() || digits_ok(whole)) || !(frac.is_empty() || digits_ok(frac)) {
            return Err(format!("bad ratio {s:?}"));
        }
        let mut numer = if whole.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|e| format!("bad ratio {s:?}: {e}"))?
        };
        let mut denom = BigInt::one();
        for c in frac.chars() {
            numer = numer * 10 + (c as u8 - b'0');
            denom *= 10;
        }
        Ok(Ratio(BigRational::new(numer, denom)))
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Ratio;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a ratio string like \"1/5\", \"0.20\", or \"83\", or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Ratio, E> {
                Ratio::from_str(v).map_err(de::Error::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Ratio, E> {
                Ok(Ratio::from_u64(v))
            }
        }
        deserializer.deserialize_any(V)
    }
}

impl CanonicalEncode for Ratio {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.canonical_string());
    }
}

/// Splits an amount into (net, fee) by a basis-point fee, flooring the net:
/// net = floor(amount × (10000 − bps) / 10000), fee = amount − net.
pub fn apply_bps_fee(amount: u64, fee_bps: u32) -> Result<(u64, u64), TxError> {
    if fee_bps > 10_000 {
        return Err(TxError::InvalidFee(fee_bps));
    }
    let net = (amount as u128 * (10_000 - fee_bps as u128) / 10_000) as u64;
    Ok((net, amount - net))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minor_units_round_trip() {
        assert_eq!(parse_minor("1234.56").unwrap(), 123_456);
        assert_eq!(parse_minor("1234.5").unwrap(), 123_450);
        assert_eq!(parse_minor("1234").unwrap(), 123_400);
        assert_eq!(parse_minor("0.07").unwrap(), 7);
        assert_eq!(format_minor(123_456), "1234.56");
        assert_eq!(format_minor(7), "0.07");
        assert_eq!(format_minor(0), "0.00");
        assert!(parse_minor("1.234").is_err());
        assert!(parse_minor("-5").is_err());
        assert!(parse_minor("1,000").is_err());
    }

    #[test]
    fn ratio_parses_fractions_decimals_and_integers() {
        assert_eq!(Ratio::from_str("1/5").unwrap(), Ratio::new(1, 5).unwrap());
        assert_eq!(Ratio::from_str("0.20").unwrap(), Ratio::new(1, 5).unwrap());
        assert_eq!(Ratio::from_str("0.2").unwrap(), Ratio::new(1, 5).unwrap());
        assert_eq!(Ratio::from_str("83").unwrap(), Ratio::from_u64(83));
        assert_eq!(Ratio::from_str("83.00").unwrap(), Ratio::from_u64(83));
        assert_eq!(Ratio::from_str(".5").unwrap(), Ratio::new(1, 2).unwrap());
        assert!(Ratio::from_str("1/0").is_err());
        assert!(Ratio::from_str("-1/5").is_err());
        assert!(Ratio::from_str("abc").is_err());
        assert!(Ratio::from_str("1.2.3").is_err());
    }

    #[test]
    fn ratio_serializes_reduced() {
        assert_eq!(Ratio::from_str("0.20").unwrap().to_string(), "1/5");
        assert_eq!(Ratio::from_str("83.00").unwrap().to_string(), "83");
        let json = serde_json::to_string(&Ratio::new(3, 6).unwrap()).unwrap();
        assert_eq!(json, "\"1/2\"");
        let back: Ratio = serde_json::from_str("\"0.5\"").unwrap();
        assert_eq!(back, Ratio::new(1, 2).unwrap());
        let from_int: Ratio = serde_json::from_str("83").unwrap();
        assert_eq!(from_int, Ratio::from_u64(83));
    }

    #[test]
    fn mul_floor_floors_toward_zero() {
        let half = Ratio::new(1, 2).unwrap();
        assert_eq!(half.mul_floor_u64(7).unwrap(), 3);
        assert_eq!(half.mul_floor_u64(8).unwrap(), 4);
        let fifth = Ratio::new(1, 5).unwrap();
        assert_eq!(fifth.mul_floor_u64(100_000_000).unwrap(), 20_000_000);
        let eighty_three = Ratio::from_u64(83);
        assert_eq!(
            eighty_three.mul_floor_u64(19_900_000).unwrap(),
            1_651_700_000
        );
    }

    #[test]
    fn mul_floor_rejects_overflow() {
        let big = Ratio::from_u64(u64::MAX);
        assert!(matches!(
            big.mul_floor_u64(u64::MAX),
            Err(TxError::AmountOverflow)
        ));
    }

    #[test]
    fn bps_fee_floors_net_and_keeps_sum() {
        // 50 bps on 20,000,000 minor: net 19,900,000, fee 100,000
        assert_eq!(apply_bps_fee(20_000_000, 50).unwrap(), (19_900_000, 100_000));
        // 25 bps on 1,651,700,000 minor: net 1,647,570,750, fee 4,129,250
        assert_eq!(
            apply_bps_fee(1_651_700_000, 25).unwrap(),
            (1_647_570_750, 4_129_250)
        );
        // flooring case: 1 bp on 999 leaves fee 1
        let (net, fee) = apply_bps_fee(999, 1).unwrap();
        assert_eq!((net, fee), (998, 1));
        assert_eq!(net + fee, 999);
        assert_eq!(apply_bps_fee(0, 50).unwrap(), (0, 0));
        assert!(apply_bps_fee(100, 10_001).is_err());
    }

    #[test]
    fn money_displays_with_asset_code() {
        let m = Money::new(Asset::Usdc, 19_900_000);
        assert_eq!(m.to_string(), "199000.00 USDC");
        assert_eq!(serde_json::to_string(&Asset::Basket).unwrap(), "\"BASKET\"");
        assert_eq!(
            serde_json::from_str::<Asset>("\"BRL\"").unwrap(),
            Asset::Brl
        );
    }
}
