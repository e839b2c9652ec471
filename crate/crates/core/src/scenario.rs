//! Scenario files: the single input that fully determines a run.
//!
//! A scenario is JSON with canonical key order: genesis data (parties,
//! validators, balances, quotes, baskets, gas overrides), the network and
//! fault model, a time-ordered action script, and optional trade-index
//! requests. `(scenario, seed)` is the complete specification of a run;
//! everything else is derived.

use crate::analytics::IndexRequest;
use crate::consensus::{ConsensusConfig, MembershipAction};
use crate::error::ScenarioError;
use crate::ledger::{BalanceSpec, ExamStage, GasSchedule, GenesisConfig, PartySpec};
use crate::money::{Asset, Money, PartyId};
use crate::net::{FaultSchedule, NetworkConfig, Partition};
use crate::settlement::{BasketDefinition, FxQuote};
use crate::workflow::{DiscrepancyCode, DocKind, LcTerms, Role};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Default remittance-form window: 21 days of hourly ticks.
pub const DEFAULT_GR_DEADLINE_TICKS: u64 = 21 * 24;

fn default_gr_deadline() -> u64 {
    DEFAULT_GR_DEADLINE_TICKS
}

/// Network model without the seed (the scenario seed feeds every
/// generator).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    #[serde(default)]
    pub delay_min: Option<u64>,
    #[serde(default)]
    pub delay_max: Option<u64>,
    #[serde(default)]
    pub drop_probability: Option<crate::money::Ratio>,
    #[serde(default)]
    pub partitions: Vec<Partition>,
}

impl NetSpec {
    pub fn to_config(&self, seed: u64) -> NetworkConfig {
        let defaults = NetworkConfig::default();
        NetworkConfig {
            seed,
            delay_min: self.delay_min.unwrap_or(defaults.delay_min),
            delay_max: self.delay_max.unwrap_or(defaults.delay_max),
            drop_probability: self
                .drop_probability
                .clone()
                .unwrap_or(defaults.drop_probability),
            partitions: self.partitions.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSpec {
    #[serde(default)]
    pub round_timeout_ticks: Option<u64>,
    #[serde(default)]
    pub max_retries: Option<u64>,
}

impl ConsensusSpec {
    pub fn to_config(&self) -> ConsensusConfig {
        let defaults = ConsensusConfig::default();
        ConsensusConfig {
            round_timeout_ticks: self.round_timeout_ticks.unwrap_or(defaults.round_timeout_ticks),
            max_retries: self.max_retries.unwrap_or(defaults.max_retries),
        }
    }
}

/// A document the exporter presents, with the structured fields the exam
/// rules read. The runner commits the metadata and attaches the reveal;
/// `tamper` corrupts that reveal to model dishonest presenters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocScript {
    pub kind: DocKind,
    pub reference: String,
    /// Invoice amount in minor units, when the document carries one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shipment_tick: Option<u64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub details: String,
    #[serde(default, skip_serializing_if = "Tamper::is_none")]
    pub tamper: Tamper,
}

/// Ways a presenter can cheat after committing: withhold the reveal or
/// reveal altered content. Either way the commitment exposes it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tamper {
    #[default]
    None,
    OmitReveal,
    AlterAmount {
        amount: u64,
    },
    AlterDetails {
        details: String,
    },
}

impl Tamper {
    pub fn is_none(&self) -> bool {
        *self == Tamper::None
    }
}

/// One scripted protocol step. `at` is the submission tick; the block
/// holding the step finalizes at or after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAction {
    pub at: u64,
    pub sender: PartyId,
    #[serde(flatten)]
    pub op: ActionOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ActionOp {
    OnboardParty { id: PartyId, role: Role, country: String },
    AgreeTerms { terms: LcTerms },
    IssueLc { terms: LcTerms },
    AdviseLc { trade_ref: String },
    PresentDocs { trade_ref: String, docs: Vec<DocScript> },
    DiscrepancyNotice {
        trade_ref: String,
        stage: ExamStage,
        #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
        codes: BTreeSet<DiscrepancyCode>,
        #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
        tampered: BTreeSet<DocKind>,
    },
    ForwardDocs { trade_ref: String },
    AcceptDocs { trade_ref: String },
    Mint {
        to: PartyId,
        asset: Asset,
        amount: u64,
        /// Present: on-ramp through this quote. Absent: plain deposit.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quote: Option<String>,
    },
    Transfer {
        to: PartyId,
        asset: Asset,
        amount: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lc_ref: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        da_ref: Option<String>,
    },
    Retire { asset: Asset, amount: u64 },
    Offramp {
        amount: u64,
        quote: String,
        credit_to: PartyId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lc_ref: Option<String>,
    },
    BasketRedeem {
        amount: u64,
        basket: String,
        payout: Asset,
        fee_bps: u32,
        credit_to: PartyId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lc_ref: Option<String>,
    },
    EscrowFund { lc_ref: String, amount: u64 },
    EscrowRelease { lc_ref: String, quote: String },
    GovernanceVote { vote: MembershipAction, subject: PartyId, approve: bool },
    SubmitGr { trade_ref: String },
    IssueBrc { trade_ref: String },
    EndOfRun {},
    DaPresent {
        trade_ref: String,
        importer: PartyId,
        exporter_bank: PartyId,
        importer_bank: PartyId,
        docs: Vec<DocScript>,
    },
    DaAccept { trade_ref: String },
}

/// Trade-index computation attached to a run: the aggregate fixture plus
/// the requested indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicesSpec {
    /// Path to the aggregate table, relative to the scenario file.
    pub table: String,
    pub requests: Vec<IndexRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub parties: Vec<PartySpec>,
    pub validators: Vec<PartyId>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gas_overrides: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub balances: Vec<BalanceSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quotes: Vec<FxQuote>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub baskets: Vec<BasketDefinition>,
    #[serde(default)]
    pub network: NetSpec,
    #[serde(default)]
    pub consensus: ConsensusSpec,
    #[serde(default)]
    pub faults: FaultSchedule,
    #[serde(default = "default_gr_deadline")]
    pub gr_deadline_ticks: u64,
    /// Residual off-chain bank charges per settled LC, shown in reports
    /// only; balances never move.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_charges: Option<Money>,
    pub actions: Vec<ScenarioAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<IndicesSpec>,
}

fn schema_err(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema { field: field.to_string(), message: message.into() }
}

impl Scenario {
    /// Parses scenario JSON. Parse errors carry the line; schema errors
    /// carry the field.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Scenario::parse(&text)
    }

    /// Cross-reference checks over the parsed structure.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.is_empty() {
            return Err(schema_err("name", "must not be empty"));
        }
        if self.parties.is_empty() {
            return Err(schema_err("parties", "must not be empty"));
        }
        let mut party_roles: BTreeMap<&PartyId, Role> = BTreeMap::new();
        for p in &self.parties {
            if party_roles.insert(&p.id, p.role).is_some() {
                return Err(schema_err("parties", format!("duplicate id {:?}", p.id.0)));
            }
        }
        if self.validators.is_empty() {
            return Err(schema_err("validators", "must not be empty"));
        }
        let mut seen = BTreeSet::new();
        for v in &self.validators {
            if !seen.insert(v) {
                return Err(schema_err("validators", format!("duplicate {:?}", v.0)));
            }
            match party_roles.get(v) {
                None => {
                    return Err(schema_err("validators", format!("{:?} is not a declared party", v.0)))
                }
                Some(Role::IssuingBank) | Some(Role::AdvisingBank) => {}
                Some(_) => {
                    return Err(schema_err("validators", format!("{:?} is not a bank", v.0)))
                }
            }
        }
        for b in &self.balances {
            if !party_roles.contains_key(&b.party) {
                return Err(schema_err("balances", format!("unknown party {:?}", b.party.0)));
            }
        }
        let mut quote_ids = BTreeSet::new();
        for q in &self.quotes {
            if !quote_ids.insert(&q.id) {
                return Err(schema_err("quotes", format!("duplicate id {:?}", q.id)));
            }
            if q.fee_bps > 10_000 {
                return Err(schema_err("quotes", format!("{:?}: fee_bps exceeds 10000", q.id)));
            }
            if !q.rate.is_positive() {
                return Err(schema_err("quotes", format!("{:?}: rate must be positive", q.id)));
            }
        }
        let mut basket_ids = BTreeSet::new();
        for b in &self.baskets {
            if !basket_ids.insert(&b.id) {
                return Err(schema_err("baskets", format!("duplicate id {:?}", b.id)));
            }
            b.validate()
                .map_err(|e| schema_err("baskets", e))?;
        }
        self.network
            .to_config(self.seed)
            .validate()
            .map_err(|e| schema_err("network", e))?;
        let validator_set: BTreeSet<&PartyId> = self.validators.iter().collect();
        for w in &self.faults.silent {
            if !validator_set.contains(&w.id) {
                return Err(schema_err(
                    "faults.silent",
                    format!("{:?} is not a validator", w.id.0),
                ));
            }
            if w.from > w.to {
                return Err(schema_err("faults.silent", "window is inverted"));
            }
        }
        GasSchedule::with_overrides(&self.gas_overrides)
            .map_err(|e| schema_err("gas_overrides", e))?;

        // ids that exist at some point in the run: declared up front or
        // onboarded by a scripted action
        let mut known: BTreeSet<PartyId> =
            self.parties.iter().map(|p| p.id.clone()).collect();
        for a in &self.actions {
            if let ActionOp::OnboardParty { id, .. } = &a.op {
                known.insert(id.clone());
            }
        }
        let mut last_at: BTreeMap<&PartyId, u64> = BTreeMap::new();
        for (i, a) in self.actions.iter().enumerate() {
            let field = format!("actions[{i}]");
            if let Some(prev) = last_at.get(&a.sender) {
                if a.at < *prev {
                    return Err(schema_err(
                        &field,
                        format!("tick {} precedes an earlier action of {:?}", a.at, a.sender.0),
                    ));
                }
            }
            last_at.insert(&a.sender, a.at);
            if !known.contains(&a.sender) {
                return Err(schema_err(&field, format!("unknown sender {:?}", a.sender.0)));
            }
            let check_party = |p: &PartyId| -> Result<(), ScenarioError> {
                if known.contains(p) {
                    Ok(())
                } else {
                    Err(schema_err(&field, format!("unknown party {:?}", p.0)))
                }
            };
            let check_quote = |id: &String| -> Result<(), ScenarioError> {
                if self.quotes.iter().any(|q| &q.id == id) {
                    Ok(())
                } else {
                    Err(schema_err(&field, format!("unknown quote {id:?}")))
                }
            };
            match &a.op {
                ActionOp::OnboardParty { id, .. } => {
                    if *id != a.sender {
                        return Err(schema_err(&field, "sender must be the onboarded id"));
                    }
                    if party_roles.contains_key(id) {
                        return Err(schema_err(&field, format!("{:?} already declared", id.0)));
                    }
                }
                ActionOp::AgreeTerms { terms } | ActionOp::IssueLc { terms } => {
                    for p in [
                        &terms.applicant,
                        &terms.beneficiary,
                        &terms.issuing_bank,
                        &terms.advising_bank,
                    ] {
                        check_party(p)?;
                    }
                }
                ActionOp::Mint { to, quote, .. } => {
                    check_party(to)?;
                    if let Some(q) = quote {
                        check_quote(q)?;
                    }
                }
                ActionOp::Transfer { to, .. } => check_party(to)?,
                ActionOp::Offramp { quote, credit_to, .. } => {
                    check_quote(quote)?;
                    check_party(credit_to)?;
                }
                ActionOp::BasketRedeem { basket, credit_to, fee_bps, .. } => {
                    if !self.baskets.iter().any(|b| &b.id == basket) {
                        return Err(schema_err(&field, format!("unknown basket {basket:?}")));
                    }
                    if *fee_bps > 10_000 {
                        return Err(schema_err(&field, "fee_bps exceeds 10000"));
                    }
                    check_party(credit_to)?;
                }
                ActionOp::EscrowRelease { quote, .. } => check_quote(quote)?,
                ActionOp::GovernanceVote { subject, .. } => check_party(subject)?,
                ActionOp::DaPresent { importer, exporter_bank, importer_bank, docs, .. } => {
                    check_party(importer)?;
                    check_party(exporter_bank)?;
                    check_party(importer_bank)?;
                    check_docs(&field, docs)?;
                }
                ActionOp::PresentDocs { docs, .. } => check_docs(&field, docs)?,
                _ => {}
            }
        }
        if let Some(indices) = &self.indices {
            if indices.table.is_empty() {
                return Err(schema_err("indices.table", "must not be empty"));
            }
            if indices.requests.is_empty() {
                return Err(schema_err("indices.requests", "must not be empty"));
            }
        }
        Ok(())
    }

    /// The genesis portion of the scenario, ready for the ledger.
    pub fn genesis_config(&self) -> Result<GenesisConfig, ScenarioError> {
        let gas = GasSchedule::with_overrides(&self.gas_overrides)
            .map_err(|e| schema_err("gas_overrides", e))?;
        Ok(GenesisConfig {
            name: self.name.clone(),
            seed: self.seed,
            parties: self.parties.clone(),
            validators: self.validators.clone(),
            gas,
            balances: self.balances.clone(),
            quotes: self.quotes.iter().map(|q| (q.id.clone(), q.clone())).collect(),
            baskets: self.baskets.iter().map(|b| (b.id.clone(), b.clone())).collect(),
            gr_deadline_ticks: self.gr_deadline_ticks,
            manual_charges: self.manual_charges,
        })
    }
}

fn check_docs(field: &str, docs: &[DocScript]) -> Result<(), ScenarioError> {
    let mut kinds = BTreeSet::new();
    for d in docs {
        if !kinds.insert(d.kind) {
            return Err(schema_err(field, format!("duplicate document kind {}", d.kind.name())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"{
            "name": "smoke",
            "seed": 1,
            "parties": [
                {"id": "importer_br", "role": "Importer", "country": "BR"},
                {"id": "exporter_in", "role": "Exporter", "country": "IN"},
                {"id": "banco", "role": "IssuingBank", "country": "BR"},
                {"id": "sbi", "role": "AdvisingBank", "country": "IN"}
            ],
            "validators": ["banco", "sbi"],
            "actions": []
        }"#
        .to_string()
    }

    fn with(base: &str, replace: &str, by: &str) -> String {
        assert!(base.contains(replace), "fixture must contain {replace:?}");
        base.replacen(replace, by, 1)
    }

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let s = Scenario::parse(&minimal()).unwrap();
        assert_eq!(s.gr_deadline_ticks, DEFAULT_GR_DEADLINE_TICKS);
        assert_eq!(s.network.to_config(s.seed).delay_min, 1);
        assert_eq!(s.consensus.to_config().round_timeout_ticks, 10);
        let genesis = s.genesis_config().unwrap();
        assert_eq!(genesis.parties.len(), 4);
        assert_eq!(genesis.gas.cost(crate::ledger::TxKind::IssueLc), 50);
    }

    #[test]
    fn malformed_json_reports_the_line() {
        let text = "{\n  \"name\": \"x\",\n  broken\n}";
        match Scenario::parse(text) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_validator_is_a_schema_error() {
        let text = with(&minimal(), r#""validators": ["banco", "sbi"]"#, r#""validators": ["banco", "ghost"]"#);
        match Scenario::parse(&text) {
            Err(ScenarioError::Schema { field, message }) => {
                assert_eq!(field, "validators");
                assert!(message.contains("ghost"));
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn non_bank_validator_is_rejected() {
        let text = with(&minimal(), r#""validators": ["banco", "sbi"]"#, r#""validators": ["importer_br"]"#);
        assert!(matches!(
            Scenario::parse(&text),
            Err(ScenarioError::Schema { field, .. }) if field == "validators"
        ));
    }

    #[test]
    fn action_with_unknown_sender_is_rejected() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [{"at": 1, "sender": "nobody", "action": "advise_lc", "trade_ref": "T"}]"#,
        );
        assert!(matches!(
            Scenario::parse(&text),
            Err(ScenarioError::Schema { field, .. }) if field == "actions[0]"
        ));
    }

    #[test]
    fn per_sender_ticks_must_not_decrease() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [
                {"at": 5, "sender": "sbi", "action": "advise_lc", "trade_ref": "T"},
                {"at": 3, "sender": "sbi", "action": "forward_docs", "trade_ref": "T"}
            ]"#,
        );
        assert!(matches!(
            Scenario::parse(&text),
            Err(ScenarioError::Schema { field, .. }) if field == "actions[1]"
        ));
    }

    #[test]
    fn interleaved_senders_may_share_ticks() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [
                {"at": 5, "sender": "sbi", "action": "advise_lc", "trade_ref": "T"},
                {"at": 5, "sender": "banco", "action": "accept_docs", "trade_ref": "T"},
                {"at": 9, "sender": "sbi", "action": "forward_docs", "trade_ref": "T"}
            ]"#,
        );
        assert!(Scenario::parse(&text).is_ok());
    }

    #[test]
    fn silent_window_must_name_a_validator() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [], "faults": {"silent": [{"id": "exporter_in", "from": 0, "to": 9}]}"#,
        );
        assert!(matches!(
            Scenario::parse(&text),
            Err(ScenarioError::Schema { field, .. }) if field == "faults.silent"
        ));
    }

    #[test]
    fn unknown_quote_reference_is_rejected() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [{"at": 1, "sender": "banco", "action": "mint",
                "to": "banco", "asset": "USDC", "amount": 5, "quote": "missing"}]"#,
        );
        assert!(matches!(
            Scenario::parse(&text),
            Err(ScenarioError::Schema { field, .. }) if field == "actions[0]"
        ));
    }

    #[test]
    fn gas_override_with_unknown_kind_is_rejected() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [], "gas_overrides": {"NotAKind": 9}"#,
        );
        assert!(matches!(
            Scenario::parse(&text),
            Err(ScenarioError::Schema { field, .. }) if field == "gas_overrides"
        ));
    }

    #[test]
    fn doc_scripts_round_trip_with_tamper_modes() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [{"at": 2, "sender": "exporter_in", "action": "present_docs",
                "trade_ref": "T",
                "docs": [
                    {"kind": "Invoice", "reference": "INV-1", "amount": 100,
                     "tamper": {"alter_amount": {"amount": 5}}},
                    {"kind": "BillOfLading", "reference": "BL-1", "shipment_tick": 40,
                     "tamper": "omit_reveal"}
                ]}]"#,
        );
        let s = Scenario::parse(&text).unwrap();
        match &s.actions[0].op {
            ActionOp::PresentDocs { docs, .. } => {
                assert_eq!(docs[0].tamper, Tamper::AlterAmount { amount: 5 });
                assert_eq!(docs[1].tamper, Tamper::OmitReveal);
            }
            other => panic!("unexpected op {other:?}"),
        }
        // serializing and reparsing preserves the scenario
        let json = serde_json::to_string_pretty(&s).unwrap();
        let back = Scenario::parse(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn duplicate_doc_kind_in_one_presentation_is_rejected() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [{"at": 2, "sender": "exporter_in", "action": "present_docs",
                "trade_ref": "T",
                "docs": [
                    {"kind": "Invoice", "reference": "INV-1"},
                    {"kind": "Invoice", "reference": "INV-2"}
                ]}]"#,
        );
        assert!(matches!(
            Scenario::parse(&text),
            Err(ScenarioError::Schema { field, .. }) if field == "actions[0]"
        ));
    }

    #[test]
    fn onboard_action_extends_the_known_party_set() {
        let text = with(
            &minimal(),
            r#""actions": []"#,
            r#""actions": [
                {"at": 1, "sender": "axis", "action": "onboard_party",
                 "id": "axis", "role": "AdvisingBank", "country": "IN"},
                {"at": 2, "sender": "banco", "action": "governance_vote",
                 "vote": "Add", "subject": "axis", "approve": true}
            ]"#,
        );
        assert!(Scenario::parse(&text).is_ok());
    }
}
