//! Append-only block/transaction chain shared by every protocol module:
//! deterministic hashing, gas metering, and full replayability.
//!
//! A transaction's id hashes (sender, kind, payload, sim_time) where the
//! payload is the canonical encoding of the kind-specific body. Reveals
//! (salts and document contents opening commitments) ride along with the
//! record but never enter the id, so publishing them later cannot change
//! history. Blocks commit an ordered tx set under a Merkle root and link
//! by parent hash; applying a block replays every transaction against the
//! replica state, so the chain is the single source of truth.

use crate::consensus::{MembershipAction, MembershipProposal, ProposalStatus, ValidatorSet};
use crate::docstore::{salt_hex, verify_reveal, DocStore, Salt};
use crate::enc::{CanonicalEncode, Encoder};
use crate::error::TxError;
use crate::hash::{hash_bytes, Hash256};
use crate::merkle;
use crate::money::{Asset, Money, PartyId};
use crate::settlement::{Accounts, BasketDefinition, ConversionReceipt, FxQuote};
use crate::workflow::{
    DaState, DaTrade, DiscrepancyCode, DocKind, DocMetadata, LcState, LcTerms, Role,
    WorkflowState,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

// ---- transaction kinds and gas ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TxKind {
    OnboardParty,
    AgreeTerms,
    IssueLc,
    AdviseLc,
    PresentDocs,
    DiscrepancyNotice,
    ForwardDocs,
    AcceptDocs,
    TokenMint,
    TokenTransfer,
    TokenBurn,
    EscrowFund,
    EscrowRelease,
    GovernanceVote,
    ComplianceEvent,
    DaPresent,
    DaAccept,
}

impl TxKind {
    pub const ALL: [TxKind; 17] = [
        TxKind::OnboardParty,
        TxKind::AgreeTerms,
        TxKind::IssueLc,
        TxKind::AdviseLc,
        TxKind::PresentDocs,
        TxKind::DiscrepancyNotice,
        TxKind::ForwardDocs,
        TxKind::AcceptDocs,
        TxKind::TokenMint,
        TxKind::TokenTransfer,
        TxKind::TokenBurn,
        TxKind::EscrowFund,
        TxKind::EscrowRelease,
        TxKind::GovernanceVote,
        TxKind::ComplianceEvent,
        TxKind::DaPresent,
        TxKind::DaAccept,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TxKind::OnboardParty => "OnboardParty",
            TxKind::AgreeTerms => "AgreeTerms",
            TxKind::IssueLc => "IssueLc",
            TxKind::AdviseLc => "AdviseLc",
            TxKind::PresentDocs => "PresentDocs",
            TxKind::DiscrepancyNotice => "DiscrepancyNotice",
            TxKind::ForwardDocs => "ForwardDocs",
            TxKind::AcceptDocs => "AcceptDocs",
            TxKind::TokenMint => "TokenMint",
            TxKind::TokenTransfer => "TokenTransfer",
            TxKind::TokenBurn => "TokenBurn",
            TxKind::EscrowFund => "EscrowFund",
            TxKind::EscrowRelease => "EscrowRelease",
            TxKind::GovernanceVote => "GovernanceVote",
            TxKind::ComplianceEvent => "ComplianceEvent",
            TxKind::DaPresent => "DaPresent",
            TxKind::DaAccept => "DaAccept",
        }
    }
}

impl std::str::FromStr for TxKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TxKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown transaction kind {s:?}"))
    }
}

/// Per-kind gas cost, immutable within a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GasSchedule {
    costs: BTreeMap<TxKind, u64>,
}

impl Default for GasSchedule {
    fn default() -> Self {
        let mut costs = BTreeMap::new();
        for kind in TxKind::ALL {
            let cost = match kind {
                TxKind::IssueLc => 50,
                TxKind::PresentDocs => 30,
                TxKind::AdviseLc | TxKind::ForwardDocs | TxKind::AcceptDocs => 20,
                TxKind::TokenMint | TxKind::TokenTransfer | TxKind::TokenBurn => 5,
                TxKind::GovernanceVote => 1,
                TxKind::DiscrepancyNotice => 10,
                _ => 10,
            };
            costs.insert(kind, cost);
        }
        GasSchedule { costs }
    }
}

impl GasSchedule {
    /// Defaults with per-kind overrides keyed by kind name.
    pub fn with_overrides(overrides: &BTreeMap<String, u64>) -> Result<Self, String> {
        let mut schedule = GasSchedule::default();
        for (name, cost) in overrides {
            let kind: TxKind = name.parse()?;
            schedule.costs.insert(kind, *cost);
        }
        Ok(schedule)
    }

    pub fn cost(&self, kind: TxKind) -> u64 {
        self.costs[&kind]
    }
}

// ---- transaction bodies ----

/// Opens one document commitment: the salt plus the committed metadata.
/// Carried beside the transaction, outside the hashed payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocReveal {
    pub kind: DocKind,
    #[serde(with = "salt_hex")]
    pub salt: Salt,
    pub metadata: DocMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "via", rename_all = "snake_case")]
pub enum MintVia {
    /// Fiat deposited at a bank enters the chain.
    Faucet,
    /// Fiat converted into the stable token at a quote.
    Onramp { quote_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "via", rename_all = "snake_case")]
pub enum BurnVia {
    /// Withdrawal: the holder's own balance leaves the chain.
    Retire,
    /// Stable token redeemed for fiat credited to a named account.
    Offramp { quote_id: String, credit_to: PartyId, lc_ref: Option<String> },
    /// Basket units redeemed at their tick value.
    BasketRedeem {
        basket_id: String,
        payout: Asset,
        fee_bps: u32,
        credit_to: PartyId,
        lc_ref: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExamStage {
    Advising,
    Issuing,
}

impl ExamStage {
    pub fn name(&self) -> &'static str {
        match self {
            ExamStage::Advising => "Advising",
            ExamStage::Issuing => "Issuing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NoticeReason {
    /// Examination found rule violations.
    Discrepant { codes: BTreeSet<DiscrepancyCode> },
    /// One or more reveals failed their commitment check.
    Tampered { kinds: BTreeSet<DocKind> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ComplianceAction {
    SubmitGr { trade_ref: String },
    IssueBrc { trade_ref: String },
    /// Final-block sweep: expires every LC past its expiry tick.
    EndOfRun,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum TxBody {
    OnboardParty { id: PartyId, role: Role, country: String },
    AgreeTerms { terms: LcTerms },
    IssueLc { terms: LcTerms },
    AdviseLc { trade_ref: String },
    PresentDocs { trade_ref: String, docs: BTreeMap<DocKind, Hash256> },
    DiscrepancyNotice { trade_ref: String, stage: ExamStage, notice: NoticeReason },
    ForwardDocs { trade_ref: String },
    AcceptDocs { trade_ref: String },
    TokenMint { to: PartyId, asset: Asset, amount: u64, mint: MintVia },
    TokenTransfer {
        to: PartyId,
        asset: Asset,
        amount: u64,
        lc_ref: Option<String>,
        da_ref: Option<String>,
    },
    TokenBurn { asset: Asset, amount: u64, burn: BurnVia },
    EscrowFund { lc_ref: String, amount: u64 },
    EscrowRelease { lc_ref: String, quote_id: String },
    GovernanceVote { action: MembershipAction, subject: PartyId, approve: bool },
    ComplianceEvent { action: ComplianceAction },
    DaPresent {
        trade_ref: String,
        importer: PartyId,
        exporter_bank: PartyId,
        importer_bank: PartyId,
        docs: BTreeMap<DocKind, Hash256>,
    },
    DaAccept { trade_ref: String },
}

impl TxBody {
    pub fn kind(&self) -> TxKind {
        match self {
            TxBody::OnboardParty { .. } => TxKind::OnboardParty,
            TxBody::AgreeTerms { .. } => TxKind::AgreeTerms,
            TxBody::IssueLc { .. } => TxKind::IssueLc,
            TxBody::AdviseLc { .. } => TxKind::AdviseLc,
            TxBody::PresentDocs { .. } => TxKind::PresentDocs,
            TxBody::DiscrepancyNotice { .. } => TxKind::DiscrepancyNotice,
            TxBody::ForwardDocs { .. } => TxKind::ForwardDocs,
            TxBody::AcceptDocs { .. } => TxKind::AcceptDocs,
            TxBody::TokenMint { .. } => TxKind::TokenMint,
            TxBody::TokenTransfer { .. } => TxKind::TokenTransfer,
            TxBody::TokenBurn { .. } => TxKind::TokenBurn,
            TxBody::EscrowFund { .. } => TxKind::EscrowFund,
            TxBody::EscrowRelease { .. } => TxKind::EscrowRelease,
            TxBody::GovernanceVote { .. } => TxKind::GovernanceVote,
            TxBody::ComplianceEvent { .. } => TxKind::ComplianceEvent,
            TxBody::DaPresent { .. } => TxKind::DaPresent,
            TxBody::DaAccept { .. } => TxKind::DaAccept,
        }
    }
}

fn encode_doc_map(enc: &mut Encoder, docs: &BTreeMap<DocKind, Hash256>) {
    let entries: Vec<(&DocKind, &Hash256)> = docs.iter().collect();
    enc.seq(&entries, |e, (k, v)| {
        e.str(k.name()).bytes(v.as_bytes());
    });
}

impl CanonicalEncode for TxBody {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            TxBody::OnboardParty { id, role, country } => {
                enc.str("OnboardParty").str(&id.0).str(role.name()).str(country);
            }
            TxBody::AgreeTerms { terms } => {
                enc.str("AgreeTerms");
                terms.encode(enc);
            }
            TxBody::IssueLc { terms } => {
                enc.str("IssueLc");
                terms.encode(enc);
            }
            TxBody::AdviseLc { trade_ref } => {
                enc.str("AdviseLc").str(trade_ref);
            }
            TxBody::PresentDocs { trade_ref, docs } => {
                enc.str("PresentDocs").str(trade_ref);
                encode_doc_map(enc, docs);
            }
            TxBody::DiscrepancyNotice { trade_ref, stage, notice } => {
                enc.str("DiscrepancyNotice").str(trade_ref).str(stage.name());
                match notice {
                    NoticeReason::Discrepant { codes } => {
                        enc.str("Discrepant");
                        let list: Vec<&DiscrepancyCode> = codes.iter().collect();
                        enc.seq(&list, |e, c| {
                            e.str(c.name());
                        });
                    }
                    NoticeReason::Tampered { kinds } => {
                        enc.str("Tampered");
                        let list: Vec<&DocKind> = kinds.iter().collect();
                        enc.seq(&list, |e, k| {
                            e.str(k.name());
                        });
                    }
                }
            }
            TxBody::ForwardDocs { trade_ref } => {
                enc.str("ForwardDocs").str(trade_ref);
            }
            TxBody::AcceptDocs { trade_ref } => {
                enc.str("AcceptDocs").str(trade_ref);
            }
            TxBody::TokenMint { to, asset, amount, mint } => {
                enc.str("TokenMint").str(&to.0).str(asset.code()).u64(*amount);
                match mint {
                    MintVia::Faucet => {
                        enc.str("Faucet");
                    }
                    MintVia::Onramp { quote_id } => {
                        enc.str("Onramp").str(quote_id);
                    }
                }
            }
            TxBody::TokenTransfer { to, asset, amount, lc_ref, da_ref } => {
                enc.str("TokenTransfer").str(&to.0).str(asset.code()).u64(*amount);
                enc.opt(lc_ref, |e, r| {
                    e.str(r);
                });
                enc.opt(da_ref, |e, r| {
                    e.str(r);
                });
            }
            TxBody::TokenBurn { asset, amount, burn } => {
                enc.str("TokenBurn").str(asset.code()).u64(*amount);
                match burn {
                    BurnVia::Retire => {
                        enc.str("Retire");
                    }
                    BurnVia::Offramp { quote_id, credit_to, lc_ref } => {
                        enc.str("Offramp").str(quote_id).str(&credit_to.0);
                        enc.opt(lc_ref, |e, r| {
                            e.str(r);
                        });
                    }
                    BurnVia::BasketRedeem { basket_id, payout, fee_bps, credit_to, lc_ref } => {
                        enc.str("BasketRedeem")
                            .str(basket_id)
                            .str(payout.code())
                            .u32(*fee_bps)
                            .str(&credit_to.0);
                        enc.opt(lc_ref, |e, r| {
                            e.str(r);
                        });
                    }
                }
            }
            TxBody::EscrowFund { lc_ref, amount } => {
                enc.str("EscrowFund").str(lc_ref).u64(*amount);
            }
            TxBody::EscrowRelease { lc_ref, quote_id } => {
                enc.str("EscrowRelease").str(lc_ref).str(quote_id);
            }
            TxBody::GovernanceVote { action, subject, approve } => {
                let tag = match action {
                    MembershipAction::Add => "Add",
                    MembershipAction::Remove => "Remove",
                };
                enc.str("GovernanceVote").str(tag).str(&subject.0).bool(*approve);
            }
            TxBody::ComplianceEvent { action } => {
                enc.str("ComplianceEvent");
                match action {
                    ComplianceAction::SubmitGr { trade_ref } => {
                        enc.str("SubmitGr").str(trade_ref);
                    }
                    ComplianceAction::IssueBrc { trade_ref } => {
                        enc.str("IssueBrc").str(trade_ref);
                    }
                    ComplianceAction::EndOfRun => {
                        enc.str("EndOfRun");
                    }
                }
            }
            TxBody::DaPresent { trade_ref, importer, exporter_bank, importer_bank, docs } => {
                enc.str("DaPresent")
                    .str(trade_ref)
                    .str(&importer.0)
                    .str(&exporter_bank.0)
                    .str(&importer_bank.0);
                encode_doc_map(enc, docs);
            }
            TxBody::DaAccept { trade_ref } => {
                enc.str("DaAccept").str(trade_ref);
            }
        }
    }
}

// ---- transaction and block ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub tx_id: Hash256,
    pub sender: PartyId,
    pub kind: TxKind,
    pub body: TxBody,
    pub gas_charged: u64,
    pub sim_time: u64,
    /// Commitment openings; excluded from tx_id.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reveals: Vec<DocReveal>,
}

impl Transaction {
    pub fn compute_id(sender: &PartyId, kind: TxKind, payload: &[u8], sim_time: u64) -> Hash256 {
        let mut enc = Encoder::new();
        enc.str(&sender.0).str(kind.name()).bytes(payload).u64(sim_time);
        hash_bytes(&enc.finish())
    }

    pub fn new(sender: PartyId, body: TxBody, gas_charged: u64, sim_time: u64) -> Self {
        let kind = body.kind();
        let tx_id = Self::compute_id(&sender, kind, &body.canonical_bytes(), sim_time);
        Transaction { tx_id, sender, kind, body, gas_charged, sim_time, reveals: Vec::new() }
    }

    pub fn with_reveals(mut self, reveals: Vec<DocReveal>) -> Self {
        self.reveals = reveals;
        self
    }

    pub fn verify_id(&self) -> bool {
        self.kind == self.body.kind()
            && self.tx_id
                == Self::compute_id(&self.sender, self.kind, &self.body.canonical_bytes(), self.sim_time)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub parent_hash: Hash256,
    pub tx_root: Hash256,
    pub proposer: PartyId,
    pub votes: BTreeSet<PartyId>,
    pub sim_time: u64,
}

impl CanonicalEncode for Block {
    fn encode(&self, enc: &mut Encoder) {
        enc.u64(self.height)
            .bytes(self.parent_hash.as_bytes())
            .bytes(self.tx_root.as_bytes());
        enc.str(&self.proposer.0);
        let votes: Vec<&PartyId> = self.votes.iter().collect();
        enc.seq(&votes, |e, v| {
            e.str(&v.0);
        });
        enc.u64(self.sim_time);
    }
}

impl Block {
    pub fn block_hash(&self) -> Hash256 {
        hash_bytes(&self.canonical_bytes())
    }
}

/// Merkle root over ordered tx ids; the all-zero hash for an empty block.
pub fn tx_root(txs: &[AppliedTx]) -> Hash256 {
    let leaves: Vec<Hash256> = txs.iter().map(|t| t.tx.tx_id).collect();
    merkle::root(&leaves)
}

/// A transaction finalized in a block, with the conversion receipts its
/// application produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedTx {
    pub tx: Transaction,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub receipts: Vec<ConversionReceipt>,
}

/// A transaction that failed validation during block building. Kept out
/// of the block (no gas, no state change) but recorded for the audit
/// trail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedTx {
    pub sender: PartyId,
    pub kind: TxKind,
    pub body: TxBody,
    pub sim_time: u64,
    pub error: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block: Block,
    pub txs: Vec<AppliedTx>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejected: Vec<RejectedTx>,
}

// ---- genesis configuration ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartySpec {
    pub id: PartyId,
    pub role: Role,
    pub country: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceSpec {
    pub party: PartyId,
    pub asset: Asset,
    pub amount: u64,
}

/// Everything the ledger needs to build height 0. Scenario plumbing
/// (network, faults, action scripts) lives outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenesisConfig {
    pub name: String,
    pub seed: u64,
    pub parties: Vec<PartySpec>,
    pub validators: Vec<PartyId>,
    pub gas: GasSchedule,
    pub balances: Vec<BalanceSpec>,
    pub quotes: BTreeMap<String, FxQuote>,
    pub baskets: BTreeMap<String, BasketDefinition>,
    pub gr_deadline_ticks: u64,
    /// Residual off-chain bank charges, reported per settled LC but never
    /// applied to balances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_charges: Option<Money>,
}

// ---- ledger state ----

/// Replica state: a pure function of (genesis config, ordered finalized
/// transactions). Cloneable and comparable so replay equality is a
/// first-class check.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerState {
    pub chain: Vec<BlockRecord>,
    pub workflow: WorkflowState,
    pub accounts: Accounts,
    pub docstore: DocStore,
    pub gas_total: BTreeMap<PartyId, u64>,
    pub gas: GasSchedule,
    pub validators: ValidatorSet,
    pub proposals: BTreeMap<String, MembershipProposal>,
    pub quotes: BTreeMap<String, FxQuote>,
    pub baskets: BTreeMap<String, BasketDefinition>,
    /// Commitment openings seen so far, keyed by digest.
    pub reveals: BTreeMap<Hash256, DocReveal>,
    /// Membership changes voted through, applied at the next block boundary.
    pending_membership: Vec<(MembershipAction, PartyId)>,
}

/// Exam recomputation from on-chain commitments and published reveals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExamRecompute {
    pub codes: BTreeSet<DiscrepancyCode>,
    /// Presented kinds whose reveal is missing or fails its commitment.
    pub tampered: BTreeSet<DocKind>,
}

impl LedgerState {
    pub fn genesis(cfg: &GenesisConfig) -> Result<Self, TxError> {
        let bad = |msg: String| TxError::InvalidGenesis(msg);
        let validators = ValidatorSet::new(cfg.validators.clone())
            .map_err(|_| bad("validator set must be non-empty and duplicate-free".into()))?;
        let mut workflow = WorkflowState::new(cfg.gr_deadline_ticks);
        let mut accounts = Accounts::new();
        for p in &cfg.parties {
            workflow
                .onboard_party(p.id.clone(), p.role, p.country.clone(), 0)
                .map_err(|_| bad(format!("duplicate party {:?}", p.id.0)))?;
            if matches!(p.role, Role::IssuingBank | Role::AdvisingBank) {
                accounts.register_bank(p.id.clone());
            }
        }
        for v in cfg.validators.iter() {
            let party = workflow
                .party(v)
                .map_err(|_| bad(format!("validator {:?} is not a declared party", v.0)))?;
            if !matches!(party.role, Role::IssuingBank | Role::AdvisingBank) {
                return Err(bad(format!("validator {:?} is not a bank", v.0)));
            }
        }
        for b in &cfg.balances {
            workflow
                .party(&b.party)
                .map_err(|_| bad(format!("balance for unknown party {:?}", b.party.0)))?;
            accounts
                .mint(&b.party, b.asset, b.amount)
                .map_err(|e| bad(format!("initial balance for {:?}: {e}", b.party.0)))?;
        }
        for (id, q) in &cfg.quotes {
            if q.fee_bps > 10_000 {
                return Err(bad(format!("quote {id:?} fee exceeds 10000 bps")));
            }
            if !q.rate.is_positive() {
                return Err(bad(format!("quote {id:?} rate must be positive")));
            }
        }
        for (id, b) in &cfg.baskets {
            b.validate().map_err(|e| bad(format!("basket {id:?}: {e}")))?;
        }
        let genesis_block = Block {
            height: 0,
            parent_hash: Hash256::ZERO,
            tx_root: merkle::root(&[]),
            proposer: validators.members()[0].clone(),
            votes: validators.members().iter().cloned().collect(),
            sim_time: 0,
        };
        Ok(LedgerState {
            chain: vec![BlockRecord { block: genesis_block, txs: Vec::new(), rejected: Vec::new() }],
            workflow,
            accounts,
            docstore: DocStore::new(),
            gas_total: BTreeMap::new(),
            gas: cfg.gas.clone(),
            validators,
            proposals: BTreeMap::new(),
            quotes: cfg.quotes.clone(),
            baskets: cfg.baskets.clone(),
            reveals: BTreeMap::new(),
            pending_membership: Vec::new(),
        })
    }

    pub fn head(&self) -> &Block {
        &self.chain.last().expect("chain begins at genesis").block
    }

    pub fn head_hash(&self) -> Hash256 {
        self.head().block_hash()
    }

    pub fn next_height(&self) -> u64 {
        self.chain.len() as u64
    }

    /// Gas spent by an onboarded party across the whole chain.
    pub fn total_gas(&self, party: &PartyId) -> Result<u64, TxError> {
        self.workflow.party(party)?;
        Ok(self.gas_total.get(party).copied().unwrap_or(0))
    }

    fn token_of(&self, trade_ref: &str) -> Result<Hash256, TxError> {
        Ok(self.workflow.lc_by_ref(trade_ref)?.token_id)
    }

    fn quote(&self, id: &str) -> Result<FxQuote, TxError> {
        self.quotes.get(id).cloned().ok_or(TxError::UnknownQuote)
    }

    /// Re-runs the examination of the newest presentation from stored
    /// reveals. Kinds whose reveal is absent, mislabeled, or failing the
    /// commitment check are reported tampered and examined as missing.
    pub fn recompute_exam(&self, token_id: &Hash256) -> Result<ExamRecompute, TxError> {
        let lc = self.workflow.lc_by_token(token_id)?;
        let pres = self
            .workflow
            .latest_presentation(token_id)
            .ok_or(TxError::WrongState)?;
        let mut docs = BTreeMap::new();
        let mut tampered = BTreeSet::new();
        for (kind, digest) in &pres.doc_commitments {
            match self.reveals.get(digest) {
                None => {
                    tampered.insert(*kind);
                }
                Some(rev) => {
                    let content = rev.metadata.canonical_bytes();
                    if rev.kind != *kind || !verify_reveal(*digest, &rev.salt, &content) {
                        tampered.insert(*kind);
                    } else {
                        docs.insert(*kind, rev.metadata.clone());
                    }
                }
            }
        }
        let codes = crate::workflow::examine(&lc.terms, pres.presented_at, &docs);
        Ok(ExamRecompute { codes, tampered })
    }

    fn store_reveals(
        &mut self,
        trade_ref: &str,
        sender: &PartyId,
        docs: &BTreeMap<DocKind, Hash256>,
        reveals: &[DocReveal],
        tick: u64,
    ) -> Result<(), TxError> {
        for rev in reveals {
            // a reveal must open one of the commitments presented here
            let digest = docs.get(&rev.kind).ok_or(TxError::CommitmentMismatch)?;
            self.reveals.insert(*digest, rev.clone());
        }
        for (kind, digest) in docs {
            let doc_id = format!("{trade_ref}/{}", kind.name());
            self.docstore
                .add_version(&doc_id, digest.as_bytes(), sender.clone(), tick)?;
        }
        Ok(())
    }

    /// Applies one transaction. Mutates in place and may leave partial
    /// state on failure: callers own atomicity (build_block snapshots per
    /// transaction). Returns the conversion receipts the tx produced.
    pub fn apply_tx(&mut self, tx: &Transaction) -> Result<Vec<ConversionReceipt>, TxError> {
        let expected_gas = self.gas.cost(tx.kind);
        if tx.gas_charged != expected_gas {
            return Err(TxError::WrongGas(expected_gas));
        }
        if tx.kind != TxKind::OnboardParty {
            self.workflow.party(&tx.sender)?;
        }
        let sender = tx.sender.clone();
        let t = tx.sim_time;
        let mut receipts = Vec::new();
        match &tx.body {
            TxBody::OnboardParty { id, role, country } => {
                if sender != *id {
                    return Err(TxError::WrongBank);
                }
                self.workflow.onboard_party(id.clone(), *role, country.clone(), t)?;
                if matches!(role, Role::IssuingBank | Role::AdvisingBank) {
                    self.accounts.register_bank(id.clone());
                }
            }
            TxBody::AgreeTerms { terms } => {
                self.workflow.agree_terms(&sender, terms.clone(), t)?;
            }
            TxBody::IssueLc { terms } => {
                self.workflow.issue_lc(&sender, terms.clone(), t)?;
            }
            TxBody::AdviseLc { trade_ref } => {
                let token = self.token_of(trade_ref)?;
                self.workflow.advise_lc(&sender, &token, t)?;
            }
            TxBody::PresentDocs { trade_ref, docs } => {
                let token = self.token_of(trade_ref)?;
                self.workflow.present_docs(&sender, &token, docs.clone(), t)?;
                self.store_reveals(trade_ref, &sender, docs, &tx.reveals, t)?;
            }
            TxBody::DiscrepancyNotice { trade_ref, stage, notice } => {
                let token = self.token_of(trade_ref)?;
                let recomputed = self.recompute_exam(&token)?;
                match notice {
                    NoticeReason::Tampered { kinds } => {
                        if kinds.is_empty() || recomputed.tampered != *kinds {
                            return Err(TxError::ExamMismatch);
                        }
                        self.workflow.void_presentation(&sender, &token, t)?;
                    }
                    NoticeReason::Discrepant { codes } => {
                        if !recomputed.tampered.is_empty()
                            || codes.is_empty()
                            || recomputed.codes != *codes
                        {
                            return Err(TxError::ExamMismatch);
                        }
                        match stage {
                            ExamStage::Advising => self.workflow.record_advising_exam(
                                &sender,
                                &token,
                                codes.clone(),
                                t,
                            )?,
                            ExamStage::Issuing => self.workflow.record_issuing_exam(
                                &sender,
                                &token,
                                codes.clone(),
                                t,
                            )?,
                        }
                    }
                }
            }
            TxBody::ForwardDocs { trade_ref } => {
                let token = self.token_of(trade_ref)?;
                let recomputed = self.recompute_exam(&token)?;
                if !recomputed.tampered.is_empty() || !recomputed.codes.is_empty() {
                    return Err(TxError::ExamMismatch);
                }
                self.workflow
                    .record_advising_exam(&sender, &token, BTreeSet::new(), t)?;
                self.workflow.forward_docs(&sender, &token, t)?;
            }
            TxBody::AcceptDocs { trade_ref } => {
                let token = self.token_of(trade_ref)?;
                let recomputed = self.recompute_exam(&token)?;
                if !recomputed.tampered.is_empty() || !recomputed.codes.is_empty() {
                    return Err(TxError::ExamMismatch);
                }
                self.workflow
                    .record_issuing_exam(&sender, &token, BTreeSet::new(), t)?;
            }
            TxBody::TokenMint { to, asset, amount, mint } => match mint {
                MintVia::Faucet => {
                    if !self.accounts.is_bank(&sender) {
                        return Err(TxError::InvalidRole);
                    }
                    self.workflow.party(to)?;
                    self.accounts.mint(to, *asset, *amount)?;
                }
                MintVia::Onramp { quote_id } => {
                    if sender != *to {
                        return Err(TxError::WrongBank);
                    }
                    let quote = self.quote(quote_id)?;
                    if quote.to != *asset {
                        return Err(TxError::QuotePairMismatch);
                    }
                    receipts.push(self.accounts.onramp(&sender, *amount, &quote)?);
                }
            },
            TxBody::TokenTransfer { to, asset, amount, lc_ref, da_ref } => {
                self.workflow.party(to)?;
                if matches!(asset, Asset::Usdc | Asset::Basket) {
                    let trade_ref = lc_ref.as_ref().ok_or(TxError::NoSettlementTrigger)?;
                    let token = self.token_of(trade_ref)?;
                    if !self.workflow.settlement_trigger(&token) {
                        return Err(TxError::NoSettlementTrigger);
                    }
                }
                if let Some(da) = da_ref {
                    let trade = self
                        .workflow
                        .da_trades
                        .get(da)
                        .ok_or(TxError::UnknownDaTrade)?;
                    if sender != trade.importer && sender != trade.importer_bank {
                        return Err(TxError::WrongBank);
                    }
                    if *to != trade.exporter && *to != trade.exporter_bank {
                        return Err(TxError::WrongBank);
                    }
                }
                self.accounts.transfer(&sender, to, *asset, *amount)?;
                if let Some(da) = da_ref {
                    self.workflow.da_pay(da, t)?;
                }
            }
            TxBody::TokenBurn { asset, amount, burn } => match burn {
                BurnVia::Retire => {
                    self.accounts.burn(&sender, *asset, *amount)?;
                }
                BurnVia::Offramp { quote_id, credit_to, lc_ref } => {
                    if *asset != Asset::Usdc {
                        return Err(TxError::QuotePairMismatch);
                    }
                    let quote = self.quote(quote_id)?;
                    self.workflow.party(credit_to)?;
                    let token = match lc_ref {
                        Some(r) => {
                            let token = self.token_of(r)?;
                            if !self.workflow.settlement_trigger(&token) {
                                return Err(TxError::NoSettlementTrigger);
                            }
                            Some(token)
                        }
                        None => None,
                    };
                    receipts.push(self.accounts.offramp(&sender, *amount, &quote, credit_to)?);
                    if let Some(token) = token {
                        self.workflow.mark_settled(&token, t)?;
                    }
                }
                BurnVia::BasketRedeem { basket_id, payout, fee_bps, credit_to, lc_ref } => {
                    if *asset != Asset::Basket {
                        return Err(TxError::QuotePairMismatch);
                    }
                    let basket = self
                        .baskets
                        .get(basket_id)
                        .cloned()
                        .ok_or(TxError::UnknownBasket)?;
                    self.workflow.party(credit_to)?;
                    let token = match lc_ref {
                        Some(r) => {
                            let token = self.token_of(r)?;
                            if !self.workflow.settlement_trigger(&token) {
                                return Err(TxError::NoSettlementTrigger);
                            }
                            Some(token)
                        }
                        None => None,
                    };
                    receipts.push(self.accounts.basket_out(
                        &sender, *amount, &basket, *payout, *fee_bps, credit_to, t,
                    )?);
                    if let Some(token) = token {
                        self.workflow.mark_settled(&token, t)?;
                    }
                }
            },
            TxBody::EscrowFund { lc_ref, amount } => {
                let lc = self.workflow.lc_by_ref(lc_ref)?;
                if matches!(lc.state, LcState::Expired | LcState::Settled) {
                    return Err(TxError::WrongState);
                }
                let beneficiary_bank = lc.terms.advising_bank.clone();
                let token = lc.token_id;
                self.accounts
                    .escrow_fund(&sender, *amount, beneficiary_bank, token)?;
            }
            TxBody::EscrowRelease { lc_ref, quote_id } => {
                let lc = self.workflow.lc_by_ref(lc_ref)?;
                if sender != lc.terms.issuing_bank && sender != lc.terms.advising_bank {
                    return Err(TxError::WrongBank);
                }
                let token = lc.token_id;
                if !self.workflow.settlement_trigger(&token) {
                    return Err(TxError::ConditionNotMet);
                }
                let quote = self.quote(quote_id)?;
                receipts.push(self.accounts.escrow_release(&token, &quote)?);
                self.workflow.mark_settled(&token, t)?;
            }
            TxBody::GovernanceVote { action, subject, approve } => {
                let key = format!(
                    "{}:{}",
                    match action {
                        MembershipAction::Add => "add",
                        MembershipAction::Remove => "remove",
                    },
                    subject.0
                );
                if !self.proposals.contains_key(&key) {
                    let proposal = MembershipProposal::open(
                        *action,
                        subject.clone(),
                        sender.clone(),
                        &self.validators,
                    )?;
                    self.proposals.insert(key.clone(), proposal);
                }
                let proposal = self.proposals.get_mut(&key).expect("just inserted");
                let status = proposal.vote(&self.validators, &sender, *approve)?;
                if status == ProposalStatus::Passed {
                    self.pending_membership.push((*action, subject.clone()));
                }
            }
            TxBody::ComplianceEvent { action } => match action {
                ComplianceAction::SubmitGr { trade_ref } => {
                    let token = self.token_of(trade_ref)?;
                    self.workflow.submit_gr(&sender, &token, t)?;
                }
                ComplianceAction::IssueBrc { trade_ref } => {
                    let token = self.token_of(trade_ref)?;
                    self.workflow.issue_brc(&sender, &token, t)?;
                }
                ComplianceAction::EndOfRun => {
                    if !self.validators.contains(&sender) {
                        return Err(TxError::NotAMember);
                    }
                    self.workflow.expire_sweep(t);
                }
            },
            TxBody::DaPresent { trade_ref, importer, exporter_bank, importer_bank, docs } => {
                let trade = DaTrade {
                    trade_ref: trade_ref.clone(),
                    exporter: sender.clone(),
                    importer: importer.clone(),
                    exporter_bank: exporter_bank.clone(),
                    importer_bank: importer_bank.clone(),
                    doc_commitments: docs.clone(),
                    state: DaState::DocsPresented,
                    presented_at: t,
                    accepted_at: None,
                    paid_at: None,
                };
                self.workflow.da_present(&sender, trade)?;
                self.store_reveals(trade_ref, &sender, docs, &tx.reveals, t)?;
            }
            TxBody::DaAccept { trade_ref } => {
                self.workflow.da_accept(&sender, trade_ref, t)?;
            }
        }
        *self.gas_total.entry(sender).or_insert(0) += tx.gas_charged;
        Ok(receipts)
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            workflow: self.workflow.clone(),
            accounts: self.accounts.clone(),
            docstore: self.docstore.clone(),
            gas_total: self.gas_total.clone(),
            validators: self.validators.clone(),
            proposals: self.proposals.clone(),
            reveals: self.reveals.clone(),
            pending_membership: self.pending_membership.clone(),
        }
    }

    fn restore(&mut self, snap: Snapshot) {
        self.workflow = snap.workflow;
        self.accounts = snap.accounts;
        self.docstore = snap.docstore;
        self.gas_total = snap.gas_total;
        self.validators = snap.validators;
        self.proposals = snap.proposals;
        self.reveals = snap.reveals;
        self.pending_membership = snap.pending_membership;
    }

    /// Membership changes passed in this block take effect now, so the
    /// next height's quorum sees the new roster.
    fn apply_pending_membership(&mut self) {
        let pending = std::mem::take(&mut self.pending_membership);
        for (action, subject) in pending {
            // the proposal was validated on open; a conflicting change in
            // the same block simply loses
            let _ = match action {
                MembershipAction::Add => self.validators.add(subject),
                MembershipAction::Remove => self.validators.remove(&subject),
            };
        }
    }

    /// Builds and commits the next block from candidate transactions.
    /// Each candidate applies against the state left by its predecessors;
    /// failures roll back cleanly and land in the rejected list.
    pub fn build_block(
        &mut self,
        candidates: Vec<Transaction>,
        proposer: PartyId,
        votes: BTreeSet<PartyId>,
        sim_time: u64,
    ) -> Result<&BlockRecord, TxError> {
        if !self.validators.contains(&proposer) || !votes.iter().all(|v| self.validators.contains(v))
        {
            return Err(TxError::NotAMember);
        }
        if votes.len() < self.validators.quorum() {
            return Err(TxError::QuorumNotMet);
        }
        let mut applied = Vec::new();
        let mut rejected = Vec::new();
        for tx in candidates {
            let snap = self.snapshot();
            match self.apply_tx(&tx) {
                Ok(receipts) => applied.push(AppliedTx { tx, receipts }),
                Err(e) => {
                    self.restore(snap);
                    rejected.push(RejectedTx {
                        sender: tx.sender,
                        kind: tx.kind,
                        body: tx.body,
                        sim_time: tx.sim_time,
                        error: e.code().to_string(),
                        detail: e.to_string(),
                    });
                }
            }
        }
        let block = Block {
            height: self.next_height(),
            parent_hash: self.head_hash(),
            tx_root: tx_root(&applied),
            proposer,
            votes,
            sim_time,
        };
        self.chain.push(BlockRecord { block, txs: applied, rejected });
        self.apply_pending_membership();
        debug_assert!(self.accounts.conservation_check().is_ok());
        Ok(self.chain.last().expect("just pushed"))
    }

    /// Verification-grade append: checks linkage, quorum, ids, the tx
    /// root, and recorded receipts, then applies every transaction.
    pub fn append_block(&mut self, record: &BlockRecord) -> Result<(), TxError> {
        let height = record.block.height;
        if height != self.next_height() {
            return Err(TxError::BrokenHashChain(height));
        }
        if record.block.parent_hash != self.head_hash() {
            return Err(TxError::InvalidParentHash);
        }
        if !self.validators.contains(&record.block.proposer)
            || !record.block.votes.iter().all(|v| self.validators.contains(v))
        {
            return Err(TxError::NotAMember);
        }
        if record.block.votes.len() < self.validators.quorum() {
            return Err(TxError::QuorumNotMet);
        }
        if record.block.tx_root != tx_root(&record.txs) {
            return Err(TxError::BrokenHashChain(height));
        }
        for (i, applied) in record.txs.iter().enumerate() {
            if !applied.tx.verify_id() {
                return Err(TxError::InvalidTransaction(
                    i,
                    Box::new(TxError::BrokenHashChain(height)),
                ));
            }
            let receipts = self
                .apply_tx(&applied.tx)
                .map_err(|e| TxError::InvalidTransaction(i, Box::new(e)))?;
            if receipts != applied.receipts {
                return Err(TxError::InvalidTransaction(i, Box::new(TxError::ReceiptMismatch)));
            }
        }
        self.chain.push(record.clone());
        self.apply_pending_membership();
        Ok(())
    }
}

#[derive(Clone)]
struct Snapshot {
    workflow: WorkflowState,
    accounts: Accounts,
    docstore: DocStore,
    gas_total: BTreeMap<PartyId, u64>,
    validators: ValidatorSet,
    proposals: BTreeMap<String, MembershipProposal>,
    reveals: BTreeMap<Hash256, DocReveal>,
    pending_membership: Vec<(MembershipAction, PartyId)>,
}

/// Reconstructs the state from genesis config and finalized blocks.
/// Bit-identical to the live state that produced the records.
pub fn replay(cfg: &GenesisConfig, records: &[BlockRecord]) -> Result<LedgerState, TxError> {
    let mut state = LedgerState::genesis(cfg)?;
    if let Some(first) = records.first() {
        if first.block.height == 0 {
            // genesis record supplied: must equal the derived one
            if *first != state.chain[0] {
                return Err(TxError::BrokenHashChain(0));
            }
        }
    }
    for record in records.iter().filter(|r| r.block.height > 0) {
        state.append_block(record)?;
    }
    Ok(state)
}

/// Chain-level fixtures shared by in-crate tests (transcript, runner,
/// report): a four-party corridor and a fully settled LC run.
#[cfg(test)]
pub mod tests_support {
    use super::*;
    use crate::docstore::commit;
    use crate::money::{Money, Ratio};
    use crate::workflow::Tenor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn pid(s: &str) -> PartyId {
        PartyId::new(s)
    }

    pub fn base_config() -> GenesisConfig {
        GenesisConfig {
            name: "test".into(),
            seed: 7,
            parties: vec![
                PartySpec { id: pid("importer_br"), role: Role::Importer, country: "BR".into() },
                PartySpec { id: pid("exporter_in"), role: Role::Exporter, country: "IN".into() },
                PartySpec { id: pid("banco_brasil"), role: Role::IssuingBank, country: "BR".into() },
                PartySpec { id: pid("sbi_india"), role: Role::AdvisingBank, country: "IN".into() },
            ],
            validators: vec![pid("banco_brasil"), pid("sbi_india")],
            gas: GasSchedule::default(),
            balances: vec![
                BalanceSpec { party: pid("importer_br"), asset: Asset::Brl, amount: 500_000_000 },
                BalanceSpec { party: pid("banco_brasil"), asset: Asset::Brl, amount: 100_000_000 },
            ],
            quotes: [
                (
                    "brl_usdc".to_string(),
                    FxQuote {
                        id: "brl_usdc".into(),
                        from: Asset::Brl,
                        to: Asset::Usdc,
                        rate: Ratio::new(1, 5).unwrap(),
                        fee_bps: 50,
                    },
                ),
                (
                    "usdc_inr".to_string(),
                    FxQuote {
                        id: "usdc_inr".into(),
                        from: Asset::Usdc,
                        to: Asset::Inr,
                        rate: Ratio::from_u64(83),
                        fee_bps: 25,
                    },
                ),
            ]
            .into_iter()
            .collect(),
            baskets: BTreeMap::new(),
            gr_deadline_ticks: 21 * 24,
            manual_charges: None,
        }
    }

    pub fn terms() -> LcTerms {
        LcTerms {
            trade_ref: "IN-BR-2021-001".into(),
            applicant: pid("importer_br"),
            beneficiary: pid("exporter_in"),
            issuing_bank: pid("banco_brasil"),
            advising_bank: pid("sbi_india"),
            amount: Money::new(Asset::Usdc, 19_900_000),
            expiry_tick: 2000,
            latest_shipment_tick: 1500,
            required_docs: [DocKind::Invoice, DocKind::BillOfLading]
                .into_iter()
                .collect(),
            tenor: Tenor::Sight,
            amount_tolerance_bps: 0,
        }
    }

    pub fn doc(kind: DocKind, amount: Option<u64>, shipped: Option<u64>) -> DocMetadata {
        DocMetadata {
            kind,
            reference: format!("{}-ref", kind.name()),
            amount_minor: amount,
            shipment_tick: shipped,
            details: "as contracted".into(),
        }
    }

    // commits a doc set and returns (digests for the tx body, reveals)
    pub fn committed_docs(
        docs: &[DocMetadata],
        rng: &mut ChaCha8Rng,
    ) -> (BTreeMap<DocKind, Hash256>, Vec<DocReveal>) {
        let mut commitments = BTreeMap::new();
        let mut reveals = Vec::new();
        for meta in docs {
            let c = commit(&meta.canonical_bytes(), rng);
            commitments.insert(meta.kind, c.digest);
            reveals.push(DocReveal { kind: meta.kind, salt: c.salt, metadata: meta.clone() });
        }
        (commitments, reveals)
    }

    pub fn tx(state: &LedgerState, sender: &str, body: TxBody, t: u64) -> Transaction {
        let gas = state.gas.cost(body.kind());
        Transaction::new(pid(sender), body, gas, t)
    }

    pub fn all_votes(state: &LedgerState) -> BTreeSet<PartyId> {
        state.validators.members().iter().cloned().collect()
    }

    pub fn seal(state: &mut LedgerState, txs: Vec<Transaction>, t: u64) -> BlockRecord {
        let proposer = state.validators.members()[0].clone();
        let votes = all_votes(state);
        state.build_block(txs, proposer, votes, t).unwrap().clone()
    }

    // drives the full happy path on-chain and returns the final state
    pub fn settled_lc_fixture() -> (GenesisConfig, LedgerState) {
        let cfg = base_config();
        let mut state = LedgerState::genesis(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let txs = vec![
                tx(&state, "importer_br", TxBody::AgreeTerms { terms: terms() }, 1),
                tx(&state, "banco_brasil", TxBody::IssueLc { terms: terms() }, 1),
                tx(&state, "sbi_india", TxBody::AdviseLc { trade_ref: "IN-BR-2021-001".into() }, 1),
        ];
        seal(&mut state, txs, 1);

        let docs = [
            doc(DocKind::Invoice, Some(19_900_000), None),
            doc(DocKind::BillOfLading, None, Some(900)),
        ];
        let (commitments, reveals) = committed_docs(&docs, &mut rng);
        let present = tx(
            &state,
            "exporter_in",
            TxBody::PresentDocs { trade_ref: "IN-BR-2021-001".into(), docs: commitments },
            2,
        )
        .with_reveals(reveals);
        seal(&mut state, vec![present], 2);

        let txs = vec![
                tx(&state, "sbi_india", TxBody::ForwardDocs { trade_ref: "IN-BR-2021-001".into() }, 3),
                tx(&state, "banco_brasil", TxBody::AcceptDocs { trade_ref: "IN-BR-2021-001".into() }, 3),
        ];
        seal(&mut state, txs, 3);

        // settlement: importer pays the issuing bank, which onramps,
        // transfers the stable token, and the advising bank offramps to
        // the exporter
        let txs = vec![
                tx(
                    &state,
                    "importer_br",
                    TxBody::TokenTransfer {
                        to: pid("banco_brasil"),
                        asset: Asset::Brl,
                        amount: 100_000_000,
                        lc_ref: Some("IN-BR-2021-001".into()),
                        da_ref: None,
                    },
                    4,
                ),
                tx(
                    &state,
                    "banco_brasil",
                    TxBody::TokenMint {
                        to: pid("banco_brasil"),
                        asset: Asset::Usdc,
                        amount: 100_000_000,
                        mint: MintVia::Onramp { quote_id: "brl_usdc".into() },
                    },
                    4,
                ),
                tx(
                    &state,
                    "banco_brasil",
                    TxBody::TokenTransfer {
                        to: pid("sbi_india"),
                        asset: Asset::Usdc,
                        amount: 19_900_000,
                        lc_ref: Some("IN-BR-2021-001".into()),
                        da_ref: None,
                    },
                    4,
                ),
                tx(
                    &state,
                    "sbi_india",
                    TxBody::TokenBurn {
                        asset: Asset::Usdc,
                        amount: 19_900_000,
                        burn: BurnVia::Offramp {
                            quote_id: "usdc_inr".into(),
                            credit_to: pid("exporter_in"),
                            lc_ref: Some("IN-BR-2021-001".into()),
                        },
                    },
                    4,
                ),
        ];
        seal(&mut state, txs, 4);
        (cfg, state)
    }
}
