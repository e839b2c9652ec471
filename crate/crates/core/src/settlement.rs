//! Token settlement engine: fiat on-ramp to the stable token, bank-to-bank
//! transfer, fiat off-ramp, the goods-basket settlement unit, and the
//! fiat escrow alternative.
//!
//! All balances are u64 minor units; every conversion floors after the rate
//! and again after the fee, in that order. Fees land in a separate
//! non-spendable fee ledger per (party, asset) so the per-asset
//! conservation identity is exact:
//!
//!   Σ balances + Σ escrow locked + Σ fees + burned == minted

use crate::error::TxError;
use crate::hash::Hash256;
use crate::money::{apply_bps_fee, Asset, PartyId, Ratio};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A scenario-supplied FX quote; no market feed exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FxQuote {
    pub id: String,
    pub from: Asset,
    pub to: Asset,
    /// To-units per from-unit.
    pub rate: Ratio,
    pub fee_bps: u32,
}

/// One good in a settlement basket, with a step-function price series:
/// the price at tick t is the latest entry at or before t.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasketComponent {
    pub good_id: String,
    pub weight: Ratio,
    /// tick → unit price in the payout currency.
    #[serde(with = "tick_keys")]
    pub prices: BTreeMap<u64, Ratio>,
}

/// JSON map keys are strings, and tagged-record deserialization hands them
/// back as strings; parse tick keys explicitly so both paths agree.
mod tick_keys {
    use super::{BTreeMap, Ratio};
    use serde::de::{self, MapAccess, Visitor};
    use serde::ser::SerializeMap;
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<u64, Ratio>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let mut m = ser.serialize_map(Some(map.len()))?;
        for (tick, price) in map {
            m.serialize_entry(&tick.to_string(), price)?;
        }
        m.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<u64, Ratio>, D::Error> {
        struct TickMap;
        impl<'de> Visitor<'de> for TickMap {
            type Value = BTreeMap<u64, Ratio>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from tick to price")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some(key) = access.next_key::<String>()? {
                    let tick: u64 = key.parse().map_err(|_| {
                        de::Error::custom(format!("tick key must be an integer, got {key:?}"))
                    })?;
                    out.insert(tick, access.next_value()?);
                }
                Ok(out)
            }
        }
        de.deserialize_map(TickMap)
    }
}

/// A settlement unit valued as a weighted sum of goods prices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasketDefinition {
    pub id: String,
    pub components: Vec<BasketComponent>,
}

impl BasketDefinition {
    /// Weights must be positive and sum to exactly 1.
    pub fn validate(&self) -> Result<(), String> {
        if self.components.is_empty() {
            return Err(format!("basket {:?} has no components", self.id));
        }
        let mut sum = Ratio::zero();
        for c in &self.components {
            if !c.weight.is_positive() {
                return Err(format!("basket {:?}: weight of {:?} not positive", self.id, c.good_id));
            }
            sum = sum.add(&c.weight);
        }
        if sum != Ratio::one() {
            return Err(format!("basket {:?}: weights sum to {} not 1", self.id, sum));
        }
        Ok(())
    }

    /// Σ weight × price at the tick.
    pub fn value_at(&self, tick: u64) -> Result<Ratio, TxError> {
        let mut total = Ratio::zero();
        for c in &self.components {
            let price = c
                .prices
                .range(..=tick)
                .next_back()
                .map(|(_, p)| p)
                .ok_or_else(|| TxError::MissingPrice { good: c.good_id.clone(), tick })?;
            total = total.add(&c.weight.mul(price));
        }
        Ok(total)
    }
}

/// Locked fiat awaiting an LC acceptance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscrowAccount {
    pub lc: Hash256,
    pub currency: Asset,
    pub locked: u64,
    pub beneficiary_bank: PartyId,
}

/// Everything a conversion did, for the transcript and the settlement
/// report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionReceipt {
    pub from_asset: Asset,
    pub from_amount: u64,
    pub to_asset: Asset,
    /// Rate applied, before the fee.
    pub gross: u64,
    pub net: u64,
    pub fee: u64,
    pub fee_collector: PartyId,
    pub credited_to: PartyId,
}

/// All token balances plus mint/burn/fee/escrow accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Accounts {
    balances: BTreeMap<PartyId, BTreeMap<Asset, u64>>,
    /// Collected conversion fees, non-spendable, per (party, asset).
    pub fees: BTreeMap<PartyId, BTreeMap<Asset, u64>>,
    pub minted: BTreeMap<Asset, u64>,
    pub burned: BTreeMap<Asset, u64>,
    pub escrows: BTreeMap<Hash256, EscrowAccount>,
    /// Parties allowed to hold the stable token and the basket unit.
    banks: BTreeSet<PartyId>,
}

impl Accounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_bank(&mut self, id: PartyId) {
        self.banks.insert(id);
    }

    pub fn is_bank(&self, id: &PartyId) -> bool {
        self.banks.contains(id)
    }

    pub fn balance(&self, party: &PartyId, asset: Asset) -> u64 {
        self.balances
            .get(party)
            .and_then(|m| m.get(&asset))
            .copied()
            .unwrap_or(0)
    }

    pub fn fee_balance(&self, party: &PartyId, asset: Asset) -> u64 {
        self.fees
            .get(party)
            .and_then(|m| m.get(&asset))
            .copied()
            .unwrap_or(0)
    }

    pub fn balances(&self) -> &BTreeMap<PartyId, BTreeMap<Asset, u64>> {
        &self.balances
    }

    // Every public operation validates completely before it writes, so a
    // rejected call never leaves partial state behind.

    fn can_hold(&self, party: &PartyId, asset: Asset) -> Result<(), TxError> {
        if matches!(asset, Asset::Usdc | Asset::Basket) && !self.is_bank(party) {
            return Err(TxError::InvalidRole);
        }
        Ok(())
    }

    fn check_debit(&self, party: &PartyId, asset: Asset, amount: u64) -> Result<(), TxError> {
        if self.balance(party, asset) < amount {
            return Err(TxError::InsufficientFunds);
        }
        Ok(())
    }

    fn check_add(cur: u64, add: u64) -> Result<(), TxError> {
        cur.checked_add(add).map(|_| ()).ok_or(TxError::AmountOverflow)
    }

    fn write_credit(&mut self, party: &PartyId, asset: Asset, amount: u64) {
        *self.balances.entry(party.clone()).or_default().entry(asset).or_insert(0) += amount;
    }

    fn write_debit(&mut self, party: &PartyId, asset: Asset, amount: u64) {
        if amount == 0 {
            return; // a checked zero debit may have no balance entry at all
        }
        *self.balances.get_mut(party).unwrap().get_mut(&asset).unwrap() -= amount;
    }

    fn write_fee(&mut self, party: &PartyId, asset: Asset, amount: u64) {
        *self.fees.entry(party.clone()).or_default().entry(asset).or_insert(0) += amount;
    }

    fn write_mint(&mut self, asset: Asset, amount: u64) {
        *self.minted.entry(asset).or_insert(0) += amount;
    }

    fn write_burn(&mut self, asset: Asset, amount: u64) {
        *self.burned.entry(asset).or_insert(0) += amount;
    }

    /// Creates new units in a party's balance (genesis funding, test
    /// faucets).
    pub fn mint(&mut self, to: &PartyId, asset: Asset, amount: u64) -> Result<(), TxError> {
        self.can_hold(to, asset)?;
        Self::check_add(self.balance(to, asset), amount)?;
        Self::check_add(self.minted.get(&asset).copied().unwrap_or(0), amount)?;
        self.write_credit(to, asset, amount);
        self.write_mint(asset, amount);
        Ok(())
    }

    /// Destroys units from a party's balance.
    pub fn burn(&mut self, from: &PartyId, asset: Asset, amount: u64) -> Result<(), TxError> {
        self.check_debit(from, asset, amount)?;
        Self::check_add(self.burned.get(&asset).copied().unwrap_or(0), amount)?;
        self.write_debit(from, asset, amount);
        self.write_burn(asset, amount);
        Ok(())
    }

    /// Plain balance move; supply unchanged.
    pub fn transfer(
        &mut self,
        from: &PartyId,
        to: &PartyId,
        asset: Asset,
        amount: u64,
    ) -> Result<(), TxError> {
        self.check_debit(from, asset, amount)?;
        self.can_hold(to, asset)?;
        let target = if from == to {
            self.balance(to, asset) - amount
        } else {
            self.balance(to, asset)
        };
        Self::check_add(target, amount)?;
        self.write_debit(from, asset, amount);
        self.write_credit(to, asset, amount);
        Ok(())
    }

    /// Buys the stable token with fiat: the fiat leaves the chain, the
    /// gross stable amount is minted, the net lands in the buyer's wallet
    /// and the fee in the converting bank's fee ledger.
    pub fn onramp(
        &mut self,
        owner: &PartyId,
        amount: u64,
        quote: &FxQuote,
    ) -> Result<ConversionReceipt, TxError> {
        if quote.from != Asset::Brl || quote.to != Asset::Usdc {
            return Err(TxError::QuotePairMismatch);
        }
        self.convert_burn_mint(owner, quote.from, amount, quote.to, &quote.rate, quote.fee_bps, owner, owner)
    }

    /// Redeems the stable token for fiat: the stable amount is burned, the
    /// gross fiat is minted, the net credits the named account and the fee
    /// stays with the converting (wallet-holding) bank.
    pub fn offramp(
        &mut self,
        owner: &PartyId,
        amount: u64,
        quote: &FxQuote,
        credit_to: &PartyId,
    ) -> Result<ConversionReceipt, TxError> {
        if quote.from != Asset::Usdc || quote.to != Asset::Inr {
            return Err(TxError::QuotePairMismatch);
        }
        self.convert_burn_mint(owner, quote.from, amount, quote.to, &quote.rate, quote.fee_bps, owner, credit_to)
    }

    /// Redeems basket units at their tick value into the payout currency.
    pub fn basket_out(
        &mut self,
        owner: &PartyId,
        amount: u64,
        basket: &BasketDefinition,
        payout: Asset,
        fee_bps: u32,
        credit_to: &PartyId,
        tick: u64,
    ) -> Result<ConversionReceipt, TxError> {
        let value = basket.value_at(tick)?;
        self.convert_burn_mint(owner, Asset::Basket, amount, payout, &value, fee_bps, owner, credit_to)
    }

    fn convert_burn_mint(
        &mut self,
        owner: &PartyId,
        from_asset: Asset,
        amount: u64,
        to_asset: Asset,
        rate: &Ratio,
        fee_bps: u32,
        fee_collector: &PartyId,
        credit_to: &PartyId,
    ) -> Result<ConversionReceipt, TxError> {
        let gross = rate.mul_floor_u64(amount)?;
        let (net, fee) = apply_bps_fee(gross, fee_bps)?;
        self.check_debit(owner, from_asset, amount)?;
        self.can_hold(credit_to, to_asset)?;
        Self::check_add(self.balance(credit_to, to_asset), net)?;
        Self::check_add(self.fee_balance(fee_collector, to_asset), fee)?;
        Self::check_add(self.minted.get(&to_asset).copied().unwrap_or(0), gross)?;
        Self::check_add(self.burned.get(&from_asset).copied().unwrap_or(0), amount)?;
        self.write_debit(owner, from_asset, amount);
        self.write_burn(from_asset, amount);
        self.write_mint(to_asset, gross);
        self.write_credit(credit_to, to_asset, net);
        self.write_fee(fee_collector, to_asset, fee);
        Ok(ConversionReceipt {
            from_asset,
            from_amount: amount,
            to_asset,
            gross,
            net,
            fee,
            fee_collector: fee_collector.clone(),
            credited_to: credit_to.clone(),
        })
    }

    /// Locks fiat against an LC. Funding with 0 is a no-op that still
    /// records the escrow shell.
    pub fn escrow_fund(
        &mut self,
        funder: &PartyId,
        amount: u64,
        beneficiary_bank: PartyId,
        lc: Hash256,
    ) -> Result<(), TxError> {
        self.check_debit(funder, Asset::Brl, amount)?;
        let locked = self.escrows.get(&lc).map(|e| e.locked).unwrap_or(0);
        Self::check_add(locked, amount)?;
        self.write_debit(funder, Asset::Brl, amount);
        let escrow = self.escrows.entry(lc).or_insert(EscrowAccount {
            lc,
            currency: Asset::Brl,
            locked: 0,
            beneficiary_bank,
        });
        escrow.locked += amount;
        Ok(())
    }

    /// Converts the locked fiat straight to the beneficiary bank at the
    /// quote, bypassing the stable token. The caller is responsible for
    /// checking the LC acceptance condition first.
    pub fn escrow_release(
        &mut self,
        lc: &Hash256,
        quote: &FxQuote,
    ) -> Result<ConversionReceipt, TxError> {
        if quote.from != Asset::Brl || quote.to != Asset::Inr {
            return Err(TxError::QuotePairMismatch);
        }
        let escrow = self.escrows.get(lc).ok_or(TxError::ConditionNotMet)?.clone();
        let gross = quote.rate.mul_floor_u64(escrow.locked)?;
        let (net, fee) = apply_bps_fee(gross, quote.fee_bps)?;
        Self::check_add(self.balance(&escrow.beneficiary_bank, Asset::Inr), net)?;
        Self::check_add(self.fee_balance(&escrow.beneficiary_bank, Asset::Inr), fee)?;
        Self::check_add(self.minted.get(&Asset::Inr).copied().unwrap_or(0), gross)?;
        Self::check_add(self.burned.get(&Asset::Brl).copied().unwrap_or(0), escrow.locked)?;
        self.write_burn(Asset::Brl, escrow.locked);
        self.write_mint(Asset::Inr, gross);
        self.write_credit(&escrow.beneficiary_bank, Asset::Inr, net);
        self.write_fee(&escrow.beneficiary_bank, Asset::Inr, fee);
        self.escrows.remove(lc);
        Ok(ConversionReceipt {
            from_asset: Asset::Brl,
            from_amount: escrow.locked,
            to_asset: Asset::Inr,
            gross,
            net,
            fee,
            fee_collector: escrow.beneficiary_bank.clone(),
            credited_to: escrow.beneficiary_bank,
        })
    }

    /// Checks Σ balances + Σ escrow locked + Σ fees + burned == minted for
    /// every asset; returns the first violating asset with the two sides.
    pub fn conservation_check(&self) -> Result<(), (Asset, u128, u128)> {
        for asset in [Asset::Brl, Asset::Inr, Asset::Usdc, Asset::Basket] {
            let held: u128 = self
                .balances
                .values()
                .filter_map(|m| m.get(&asset))
                .map(|v| *v as u128)
                .sum();
            let fees: u128 = self
                .fees
                .values()
                .filter_map(|m| m.get(&asset))
                .map(|v| *v as u128)
                .sum();
            let locked: u128 = self
                .escrows
                .values()
                .filter(|e| e.currency == asset)
                .map(|e| e.locked as u128)
                .sum();
            let burned = self.burned.get(&asset).copied().unwrap_or(0) as u128;
            let minted = self.minted.get(&asset).copied().unwrap_or(0) as u128;
            let lhs = held + fees + locked + burned;
            if lhs != minted {
                return Err((asset, lhs, minted));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;
    use num::{BigInt, Integer, ToPrimitive};
    use proptest::prelude::*;
    use std::str::FromStr;

    fn pid(s: &str) -> PartyId {
        PartyId::new(s)
    }

    fn quote_brl_usdc() -> FxQuote {
        FxQuote {
            id: "brl_usdc".into(),
            from: Asset::Brl,
            to: Asset::Usdc,
            rate: Ratio::from_str("0.20").unwrap(),
            fee_bps: 50,
        }
    }

    fn quote_usdc_inr() -> FxQuote {
        FxQuote {
            id: "usdc_inr".into(),
            from: Asset::Usdc,
            to: Asset::Inr,
            rate: Ratio::from_str("83").unwrap(),
            fee_bps: 25,
        }
    }

    fn bank_accounts() -> Accounts {
        let mut a = Accounts::new();
        a.register_bank(pid("banco_brasil"));
        a.register_bank(pid("bank_india"));
        a
    }

    fn assert_conserved(a: &Accounts) {
        if let Err((asset, lhs, minted)) = a.conservation_check() {
            panic!("conservation broken for {asset}: {lhs} != {minted}");
        }
    }

    // Independent single-expression oracle for the full payout chain, in
    // exact rationals with explicit floors at each step.
    fn chain_oracle(brl_minor: u64, r1: &str, f1: u32, r2: &str, f2: u32) -> u64 {
        let rat = |s: &str| {
            let r = Ratio::from_str(s).unwrap();
            // reparse through the display form to keep this path separate
            let (n, d) = match r.to_string().split_once('/') {
                Some((n, d)) => (n.to_string(), d.to_string()),
                None => (r.to_string(), "1".to_string()),
            };
            BigRational::new(BigInt::from_str(&n).unwrap(), BigInt::from_str(&d).unwrap())
        };
        let floor = |x: BigRational| BigRational::from_integer(x.numer().div_floor(x.denom()));
        let bps = |f: u32| BigRational::new(BigInt::from(10_000 - f), BigInt::from(10_000));
        let usdc_gross = floor(BigRational::from_integer(BigInt::from(brl_minor)) * rat(r1));
        let usdc_net = floor(usdc_gross * bps(f1));
        let inr_gross = floor(usdc_net * rat(r2));
        let inr_net = floor(inr_gross * bps(f2));
        inr_net.numer().to_u64().unwrap()
    }

    #[test]
    fn onramp_spec_amounts() {
        let mut a = bank_accounts();
        a.mint(&pid("banco_brasil"), Asset::Brl, 100_000_000).unwrap();
        let r = a.onramp(&pid("banco_brasil"), 100_000_000, &quote_brl_usdc()).unwrap();
        // 1,000,000.00 BRL at 0.20 minus 50 bps → 199,000.00 USDC
        assert_eq!(r.gross, 20_000_000);
        assert_eq!(r.net, 19_900_000);
        assert_eq!(r.fee, 100_000);
        assert_eq!(a.balance(&pid("banco_brasil"), Asset::Usdc), 19_900_000);
        assert_eq!(a.balance(&pid("banco_brasil"), Asset::Brl), 0);
        assert_eq!(a.fee_balance(&pid("banco_brasil"), Asset::Usdc), 100_000);
        assert_conserved(&a);
    }

    #[test]
    fn onramp_zero_is_a_no_op_on_balances() {
        let mut a = bank_accounts();
        a.mint(&pid("banco_brasil"), Asset::Brl, 500).unwrap();
        let r = a.onramp(&pid("banco_brasil"), 0, &quote_brl_usdc()).unwrap();
        assert_eq!((r.gross, r.net, r.fee), (0, 0, 0));
        assert_eq!(a.balance(&pid("banco_brasil"), Asset::Brl), 500);
        assert_eq!(a.balance(&pid("banco_brasil"), Asset::Usdc), 0);
        assert_conserved(&a);
    }

    #[test]
    fn onramp_requires_funds_and_matching_pair() {
        let mut a = bank_accounts();
        a.mint(&pid("banco_brasil"), Asset::Brl, 100).unwrap();
        assert_eq!(
            a.onramp(&pid("banco_brasil"), 101, &quote_brl_usdc()).map(|_| ()),
            Err(TxError::InsufficientFunds)
        );
        assert_eq!(
            a.onramp(&pid("banco_brasil"), 50, &quote_usdc_inr()).map(|_| ()),
            Err(TxError::QuotePairMismatch)
        );
        assert_conserved(&a);
    }

    #[test]
    fn offramp_spec_amounts() {
        let mut a = bank_accounts();
        a.mint(&pid("bank_india"), Asset::Usdc, 19_900_000).unwrap();
        let r = a
            .offramp(&pid("bank_india"), 19_900_000, &quote_usdc_inr(), &pid("exporter_in"))
            .unwrap();
        // 199,000.00 USDC at 83 minus 25 bps → 16,475,707.50 INR
        assert_eq!(r.gross, 1_651_700_000);
        assert_eq!(r.net, 1_647_570_750);
        assert_eq!(r.fee, 4_129_250);
        assert_eq!(a.balance(&pid("exporter_in"), Asset::Inr), 1_647_570_750);
        assert_eq!(a.fee_balance(&pid("bank_india"), Asset::Inr), 4_129_250);
        assert_eq!(a.balance(&pid("bank_india"), Asset::Usdc), 0);
        assert_conserved(&a);
    }

    #[test]
    fn happy_chain_matches_single_expression_oracle() {
        let mut a = bank_accounts();
        a.mint(&pid("banco_brasil"), Asset::Brl, 100_000_000).unwrap();
        let on = a.onramp(&pid("banco_brasil"), 100_000_000, &quote_brl_usdc()).unwrap();
        a.transfer(&pid("banco_brasil"), &pid("bank_india"), Asset::Usdc, on.net).unwrap();
        let off = a
            .offramp(&pid("bank_india"), on.net, &quote_usdc_inr(), &pid("exporter_in"))
            .unwrap();
        assert_eq!(off.net, chain_oracle(100_000_000, "0.20", 50, "83", 25));
        assert_eq!(off.net, 1_647_570_750);
        assert_conserved(&a);
    }

    proptest! {
        #[test]
        fn chain_matches_oracle_for_arbitrary_amounts(
            brl in 0u64..10_000_000_000,
            f1 in 0u32..200,
            f2 in 0u32..200,
        ) {
            let mut a = bank_accounts();
            a.mint(&pid("banco_brasil"), Asset::Brl, brl).unwrap();
            let q1 = FxQuote { fee_bps: f1, ..quote_brl_usdc() };
            let q2 = FxQuote { fee_bps: f2, ..quote_usdc_inr() };
            let on = a.onramp(&pid("banco_brasil"), brl, &q1).unwrap();
            a.transfer(&pid("banco_brasil"), &pid("bank_india"), Asset::Usdc, on.net).unwrap();
            let off = a.offramp(&pid("bank_india"), on.net, &q2, &pid("exporter_in")).unwrap();
            prop_assert_eq!(off.net, chain_oracle(brl, "0.20", f1, "83", f2));
            prop_assert_eq!(a.conservation_check(), Ok(()));
        }
    }

    #[test]
    fn transfer_conserves_supply_and_respects_wallet_rule() {
        let mut a = bank_accounts();
        a.mint(&pid("banco_brasil"), Asset::Usdc, 1_000).unwrap();
        let before: u64 = a.balance(&pid("banco_brasil"), Asset::Usdc)
            + a.balance(&pid("bank_india"), Asset::Usdc);
        a.transfer(&pid("banco_brasil"), &pid("bank_india"), Asset::Usdc, 400).unwrap();
        let after: u64 = a.balance(&pid("banco_brasil"), Asset::Usdc)
            + a.balance(&pid("bank_india"), Asset::Usdc);
        assert_eq!(before, after);
        // non-bank may not hold the stable token
        assert_eq!(
            a.transfer(&pid("banco_brasil"), &pid("exporter_in"), Asset::Usdc, 100),
            Err(TxError::InvalidRole)
        );
        // but fiat moves to anyone
        a.mint(&pid("bank_india"), Asset::Inr, 10).unwrap();
        a.transfer(&pid("bank_india"), &pid("exporter_in"), Asset::Inr, 10).unwrap();
        assert_conserved(&a);
    }

    #[test]
    fn basket_value_examples() {
        let basket = BasketDefinition {
            id: "corridor".into(),
            components: vec![
                BasketComponent {
                    good_id: "machines".into(),
                    weight: Ratio::from_str("1/2").unwrap(),
                    prices: [(0, Ratio::from_str("200").unwrap())].into(),
                },
                BasketComponent {
                    good_id: "soybeans".into(),
                    weight: Ratio::from_str("1/2").unwrap(),
                    prices: [(0, Ratio::from_str("40").unwrap())].into(),
                },
            ],
        };
        basket.validate().unwrap();
        assert_eq!(basket.value_at(0).unwrap(), Ratio::from_str("120").unwrap());

        let single = BasketDefinition {
            id: "one".into(),
            components: vec![BasketComponent {
                good_id: "g".into(),
                weight: Ratio::one(),
                prices: [(0, Ratio::from_str("100").unwrap())].into(),
            }],
        };
        assert_eq!(single.value_at(5).unwrap(), Ratio::from_str("100").unwrap());
    }

    #[test]
    fn basket_price_series_steps_and_missing_price_errors() {
        let basket = BasketDefinition {
            id: "b".into(),
            components: vec![BasketComponent {
                good_id: "g".into(),
                weight: Ratio::one(),
                prices: [(10, Ratio::from_str("7").unwrap()), (20, Ratio::from_str("9").unwrap())]
                    .into(),
            }],
        };
        assert_eq!(
            basket.value_at(5),
            Err(TxError::MissingPrice { good: "g".into(), tick: 5 })
        );
        assert_eq!(basket.value_at(10).unwrap(), Ratio::from_str("7").unwrap());
        assert_eq!(basket.value_at(19).unwrap(), Ratio::from_str("7").unwrap());
        assert_eq!(basket.value_at(20).unwrap(), Ratio::from_str("9").unwrap());
    }

    #[test]
    fn basket_weights_must_sum_to_one() {
        let mut basket = BasketDefinition {
            id: "b".into(),
            components: vec![BasketComponent {
                good_id: "g".into(),
                weight: Ratio::from_str("1/2").unwrap(),
                prices: [(0, Ratio::one())].into(),
            }],
        };
        assert!(basket.validate().is_err());
        basket.components.push(BasketComponent {
            good_id: "h".into(),
            weight: Ratio::from_str("1/2").unwrap(),
            prices: [(0, Ratio::one())].into(),
        });
        basket.validate().unwrap();
    }

    proptest! {
        // basket value is linear in prices and in weights
        #[test]
        fn basket_value_is_linear(
            weights in proptest::collection::vec(1u64..50, 1..5),
            prices in proptest::collection::vec(0u64..10_000, 1..5),
            scale in 2u64..9,
        ) {
            let n = weights.len().min(prices.len());
            let total: u64 = weights[..n].iter().sum();
            let mk = |prices: &[u64]| BasketDefinition {
                id: "b".into(),
                components: (0..n)
                    .map(|i| BasketComponent {
                        good_id: format!("g{i}"),
                        weight: Ratio::new(weights[i], total).unwrap(),
                        prices: [(0, Ratio::from_u64(prices[i]))].into(),
                    })
                    .collect(),
            };
            let base = mk(&prices[..n]);
            base.validate().unwrap();
            let scaled_prices: Vec<u64> = prices[..n].iter().map(|p| p * scale).collect();
            let scaled = mk(&scaled_prices);
            let v = base.value_at(0).unwrap();
            let vs = scaled.value_at(0).unwrap();
            prop_assert_eq!(vs, v.mul(&Ratio::from_u64(scale)));
        }
    }

    #[test]
    fn escrow_fund_and_release() {
        let lc = crate::hash::hash_bytes(b"lc-token");
        let mut a = bank_accounts();
        a.mint(&pid("importer_br"), Asset::Brl, 100_000_000).unwrap();
        a.escrow_fund(&pid("importer_br"), 100_000_000, pid("bank_india"), lc).unwrap();
        assert_eq!(a.balance(&pid("importer_br"), Asset::Brl), 0);
        assert_eq!(a.escrows[&lc].locked, 100_000_000);
        assert_conserved(&a);

        let quote = FxQuote {
            id: "brl_inr".into(),
            from: Asset::Brl,
            to: Asset::Inr,
            rate: Ratio::from_str("16.6").unwrap(),
            fee_bps: 25,
        };
        let r = a.escrow_release(&lc, &quote).unwrap();
        // 1,000,000.00 BRL at 16.6 = 16,600,000.00 INR gross, minus 25 bps
        assert_eq!(r.gross, 1_660_000_000);
        assert_eq!(r.net, 1_655_850_000);
        assert_eq!(a.balance(&pid("bank_india"), Asset::Inr), r.net);
        assert!(a.escrows.is_empty());
        assert_conserved(&a);
        // second release has nothing to act on
        assert_eq!(a.escrow_release(&lc, &quote).map(|_| ()), Err(TxError::ConditionNotMet));
    }

    #[test]
    fn escrow_fund_zero_records_shell_only() {
        let lc = crate::hash::hash_bytes(b"lc-token");
        let mut a = bank_accounts();
        a.escrow_fund(&pid("importer_br"), 0, pid("bank_india"), lc).unwrap();
        assert_eq!(a.escrows[&lc].locked, 0);
        assert_conserved(&a);
    }

    proptest! {
        // Randomized op soup: balances can never go negative (u64 debits
        // are checked) and conservation holds after every step.
        #[test]
        fn fuzzed_ops_conserve_every_asset(
            ops in proptest::collection::vec((0u8..6, 0u64..1_000_000), 1..80),
        ) {
            let mut a = bank_accounts();
            let parties = [pid("banco_brasil"), pid("bank_india"), pid("importer_br"), pid("exporter_in")];
            let lc = crate::hash::hash_bytes(b"fuzz-lc");
            for (i, (op, amount)) in ops.into_iter().enumerate() {
                let p = &parties[i % 4];
                let q = &parties[(i + 1) % 4];
                let _ = match op {
                    0 => a.mint(p, Asset::Brl, amount),
                    1 => a.burn(p, Asset::Brl, amount),
                    2 => a.transfer(p, q, Asset::Brl, amount),
                    3 => a.onramp(p, amount, &quote_brl_usdc()).map(|_| ()),
                    4 => a.escrow_fund(p, amount, pid("bank_india"), lc),
                    5 => {
                        let quote = FxQuote {
                            id: "brl_inr".into(),
                            from: Asset::Brl,
                            to: Asset::Inr,
                            rate: Ratio::from_str("16.6").unwrap(),
                            fee_bps: 25,
                        };
                        a.escrow_release(&lc, &quote).map(|_| ())
                    }
                    _ => unreachable!(),
                };
                prop_assert_eq!(a.conservation_check(), Ok(()));
            }
        }
    }
}
