//! Letter-of-credit and documentary-acceptance workflow state machines.
//!
//! Holds the party registry, the LC registry with its duplicate-reference
//! fraud check, document presentation and examination against LC terms,
//! compliance records (realization certificate, remittance form), and the
//! DA trade flow used for baseline comparisons.
//!
//! Examination applies four rules to the revealed document metadata:
//! R1 every required document present, R2 invoice amount within the
//! tolerance over the LC amount, R3 shipment on or before the latest
//! shipment tick, R4 presentation on or before expiry (a violation also
//! flags the LC as expired). All arithmetic is exact integer comparison.

use crate::enc::{CanonicalEncode, Encoder};
use crate::error::TxError;
use crate::hash::{hash_bytes, Hash256};
use crate::money::{Money, PartyId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Version stamp recorded on every examination, so rule-table upgrades stay
/// auditable in transcripts.
pub const EXAM_RULES_VERSION: &str = "lc-exam-v1";

/// The four trade roles. Banks double as validators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Importer,
    Exporter,
    IssuingBank,
    AdvisingBank,
}

impl Role {
    pub fn name(&self) -> &'static str {
        match self {
            Role::Importer => "Importer",
            Role::Exporter => "Exporter",
            Role::IssuingBank => "IssuingBank",
            Role::AdvisingBank => "AdvisingBank",
        }
    }
}

/// An onboarded participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub id: PartyId,
    pub role: Role,
    /// ISO country code, e.g. "IN" or "BR".
    pub country: String,
    pub onboarded_at: u64,
}

/// Trade document kinds an LC may require.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum DocKind {
    Invoice,
    BillOfLading,
    PackingList,
    CertificateOfOrigin,
    InsuranceCertificate,
}

impl DocKind {
    pub const ALL: [DocKind; 5] = [
        DocKind::Invoice,
        DocKind::BillOfLading,
        DocKind::PackingList,
        DocKind::CertificateOfOrigin,
        DocKind::InsuranceCertificate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DocKind::Invoice => "Invoice",
            DocKind::BillOfLading => "BillOfLading",
            DocKind::PackingList => "PackingList",
            DocKind::CertificateOfOrigin => "CertificateOfOrigin",
            DocKind::InsuranceCertificate => "InsuranceCertificate",
        }
    }
}

impl CanonicalEncode for DocKind {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(self.name());
    }
}

/// Structured document fields the examiner reads after a commitment reveal.
/// Stands in for parsing the paper document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMetadata {
    pub kind: DocKind,
    /// Document number (invoice no, B/L no, ...).
    pub reference: String,
    /// Invoice amount in LC-asset minor units, when the document carries one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount_minor: Option<u64>,
    /// Shipment tick, carried by the bill of lading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shipment_tick: Option<u64>,
    /// Free-form body text.
    #[serde(default)]
    pub details: String,
}

impl CanonicalEncode for DocMetadata {
    fn encode(&self, enc: &mut Encoder) {
        self.kind.encode(enc);
        enc.str(&self.reference);
        enc.opt(&self.amount_minor, |e, v| {
            e.u64(*v);
        });
        enc.opt(&self.shipment_tick, |e, v| {
            e.u64(*v);
        });
        enc.str(&self.details);
    }
}

/// Payment tenor: at sight or a deferred usance period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tenor {
    Sight,
    Usance { days: u32 },
}

impl CanonicalEncode for Tenor {
    fn encode(&self, enc: &mut Encoder) {
        match self {
            Tenor::Sight => {
                enc.str("Sight");
            }
            Tenor::Usance { days } => {
                enc.str("Usance");
                enc.u32(*days);
            }
        }
    }
}

/// The standard LC fields, hashed into the token id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcTerms {
    pub trade_ref: String,
    pub applicant: PartyId,
    pub beneficiary: PartyId,
    pub issuing_bank: PartyId,
    pub advising_bank: PartyId,
    pub amount: Money,
    pub expiry_tick: u64,
    pub latest_shipment_tick: u64,
    pub required_docs: BTreeSet<DocKind>,
    pub tenor: Tenor,
    pub amount_tolerance_bps: u32,
}

impl CanonicalEncode for LcTerms {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.trade_ref);
        self.applicant.encode(enc);
        self.beneficiary.encode(enc);
        self.issuing_bank.encode(enc);
        self.advising_bank.encode(enc);
        self.amount.encode(enc);
        enc.u64(self.expiry_tick);
        enc.u64(self.latest_shipment_tick);
        enc.seq(&self.required_docs, |e, k| k.encode(e));
        self.tenor.encode(enc);
        enc.u32(self.amount_tolerance_bps);
    }
}

impl LcTerms {
    pub fn validate(&self) -> Result<(), TxError> {
        if self.latest_shipment_tick > self.expiry_tick
            || self.amount.minor == 0
            || self.required_docs.is_empty()
            || self.trade_ref.is_empty()
        {
            return Err(TxError::InvalidTerms);
        }
        Ok(())
    }

    /// Token id of the LC minted from these terms.
    pub fn token_id(&self) -> Hash256 {
        hash_bytes(&self.canonical_bytes())
    }
}

/// LC lifecycle states. `Rejected` is part of the stable vocabulary but no
/// transition in the table below produces it; rejected issuance attempts
/// never mint a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LcState {
    Drafted,
    Issued,
    Advised,
    DocsPresented,
    DiscrepancyRaised,
    Compliant,
    DocsForwarded,
    Accepted,
    Settled,
    Expired,
    Rejected,
}

impl LcState {
    pub fn name(&self) -> &'static str {
        match self {
            LcState::Drafted => "Drafted",
            LcState::Issued => "Issued",
            LcState::Advised => "Advised",
            LcState::DocsPresented => "DocsPresented",
            LcState::DiscrepancyRaised => "DiscrepancyRaised",
            LcState::Compliant => "Compliant",
            LcState::DocsForwarded => "DocsForwarded",
            LcState::Accepted => "Accepted",
            LcState::Settled => "Settled",
            LcState::Expired => "Expired",
            LcState::Rejected => "Rejected",
        }
    }
}

/// The complete transition table. Everything not listed is rejected.
pub fn transition_allowed(from: LcState, to: LcState) -> bool {
    use LcState::*;
    matches!(
        (from, to),
        (Drafted, Issued)
            | (Issued, Advised)
            | (Advised, DocsPresented)
            | (DocsPresented, Compliant)
            | (DocsPresented, DiscrepancyRaised)
            | (DiscrepancyRaised, DocsPresented)
            | (Compliant, DocsForwarded)
            | (DocsForwarded, Accepted)
            | (DocsForwarded, DiscrepancyRaised)
            | (Accepted, Settled)
            | (Advised, Expired)
            | (DocsPresented, Expired)
    )
}

/// The LC as a unique token: terms plus lifecycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NftLc {
    pub token_id: Hash256,
    pub terms: LcTerms,
    pub state: LcState,
    pub state_history: Vec<(LcState, u64)>,
}

impl NftLc {
    fn transition(&mut self, to: LcState, tick: u64) -> Result<(), TxError> {
        if !transition_allowed(self.state, to) {
            return Err(TxError::WrongState);
        }
        self.state = to;
        self.state_history.push((to, tick));
        Ok(())
    }
}

/// Discrepancy codes, ordered as listed in the rule table.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum DiscrepancyCode {
    MissingDocument,
    LateShipment,
    LatePresentation,
    AmountExceeded,
    ExpiredLc,
}

impl DiscrepancyCode {
    pub fn name(&self) -> &'static str {
        match self {
            DiscrepancyCode::MissingDocument => "MissingDocument",
            DiscrepancyCode::LateShipment => "LateShipment",
            DiscrepancyCode::LatePresentation => "LatePresentation",
            DiscrepancyCode::AmountExceeded => "AmountExceeded",
            DiscrepancyCode::ExpiredLc => "ExpiredLc",
        }
    }
}

/// Result of one examination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExamResult {
    Pending,
    Clean,
    Discrepant(BTreeSet<DiscrepancyCode>),
}

/// One document presentation under an LC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub lc: Hash256,
    /// On-chain commitments only; plaintext moves on the private channel.
    pub doc_commitments: BTreeMap<DocKind, Hash256>,
    pub presented_at: u64,
    /// Advising-bank examination; set exactly once.
    pub exam_result: ExamResult,
    /// Issuing-bank re-examination after forwarding, when it happened.
    pub reexam_result: Option<ExamResult>,
    /// True when a reveal failed its commitment check; the presentation is
    /// void and never examined.
    pub voided: bool,
    /// Rule-table version stamped at examination time.
    pub rules_version: Option<String>,
}

/// Applies rules R1..R4 to the revealed metadata. An empty set means clean.
pub fn examine(
    terms: &LcTerms,
    presented_at: u64,
    docs: &BTreeMap<DocKind, DocMetadata>,
) -> BTreeSet<DiscrepancyCode> {
    let mut codes = BTreeSet::new();
    // R1: every required kind present
    for kind in &terms.required_docs {
        if !docs.contains_key(kind) {
            codes.insert(DiscrepancyCode::MissingDocument);
        }
    }
    // R2: invoice amount within tolerance; exact cross-multiplication
    if let Some(invoice_amount) = docs.get(&DocKind::Invoice).and_then(|m| m.amount_minor) {
        let lhs = invoice_amount as u128 * 10_000;
        let rhs = terms.amount.minor as u128 * (10_000 + terms.amount_tolerance_bps as u128);
        if lhs > rhs {
            codes.insert(DiscrepancyCode::AmountExceeded);
        }
    }
    // R3: shipment on or before the latest shipment tick
    if let Some(shipped) = docs.get(&DocKind::BillOfLading).and_then(|m| m.shipment_tick) {
        if shipped > terms.latest_shipment_tick {
            codes.insert(DiscrepancyCode::LateShipment);
        }
    }
    // R4: presentation within validity; a late presentation also means the
    // credit itself has expired, so both codes fire
    if presented_at > terms.expiry_tick {
        codes.insert(DiscrepancyCode::LatePresentation);
        codes.insert(DiscrepancyCode::ExpiredLc);
    }
    codes
}

/// Corridor compliance paperwork for one LC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceRecord {
    pub lc: Hash256,
    pub gr_submitted_at: Option<u64>,
    /// Window after settlement within which the remittance form is due.
    pub gr_deadline_ticks: u64,
    pub brc_issued_at: Option<u64>,
    pub brc_issuer: Option<PartyId>,
    pub settled_at: Option<u64>,
}

impl ComplianceRecord {
    fn new(lc: Hash256, gr_deadline_ticks: u64) -> Self {
        ComplianceRecord {
            lc,
            gr_submitted_at: None,
            gr_deadline_ticks,
            brc_issued_at: None,
            brc_issuer: None,
            settled_at: None,
        }
    }

    /// None until settled; then whether the form landed inside the window.
    pub fn gr_compliant(&self) -> Option<bool> {
        let settled = self.settled_at?;
        Some(match self.gr_submitted_at {
            Some(at) => at <= settled + self.gr_deadline_ticks,
            None => false,
        })
    }
}

/// Documentary-acceptance trade states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DaState {
    DocsPresented,
    Accepted,
    Paid,
}

impl DaState {
    pub fn name(&self) -> &'static str {
        match self {
            DaState::DocsPresented => "DocsPresented",
            DaState::Accepted => "Accepted",
            DaState::Paid => "Paid",
        }
    }
}

/// A DA trade: documents against acceptance, no bank payment guarantee.
/// The exporter keeps control of title documents until acceptance, so
/// reveals happen at the acceptance step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaTrade {
    pub trade_ref: String,
    pub exporter: PartyId,
    pub importer: PartyId,
    pub exporter_bank: PartyId,
    pub importer_bank: PartyId,
    pub doc_commitments: BTreeMap<DocKind, Hash256>,
    pub state: DaState,
    pub presented_at: u64,
    pub accepted_at: Option<u64>,
    pub paid_at: Option<u64>,
}

/// The whole workflow surface, mutated only through ledger transaction
/// application.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkflowState {
    pub parties: BTreeMap<PartyId, Party>,
    /// Agreed terms awaiting issuance, with the agreement tick.
    pub drafts: BTreeMap<String, (LcTerms, u64)>,
    /// Minted LCs by trade reference: the duplicate-issuance fraud check.
    pub lc_registry: BTreeMap<String, NftLc>,
    token_index: BTreeMap<Hash256, String>,
    pub presentations: BTreeMap<Hash256, Vec<Presentation>>,
    pub compliance: BTreeMap<Hash256, ComplianceRecord>,
    pub da_trades: BTreeMap<String, DaTrade>,
    /// Remittance-form deadline applied to new compliance records.
    pub gr_deadline_ticks: u64,
}

/// Default remittance-form window: 21 days of hourly ticks.
pub const DEFAULT_GR_DEADLINE_TICKS: u64 = 21 * 24;

impl WorkflowState {
    pub fn new(gr_deadline_ticks: u64) -> Self {
        WorkflowState {
            gr_deadline_ticks,
            ..Default::default()
        }
    }

    pub fn party(&self, id: &PartyId) -> Result<&Party, TxError> {
        self.parties.get(id).ok_or(TxError::UnknownParty)
    }

    fn require_role(&self, id: &PartyId, role: Role) -> Result<(), TxError> {
        if self.party(id)?.role != role {
            return Err(TxError::InvalidRole);
        }
        Ok(())
    }

    pub fn lc_by_token(&self, token_id: &Hash256) -> Result<&NftLc, TxError> {
        let trade_ref = self.token_index.get(token_id).ok_or(TxError::UnknownLc)?;
        Ok(&self.lc_registry[trade_ref])
    }

    fn lc_by_token_mut(&mut self, token_id: &Hash256) -> Result<&mut NftLc, TxError> {
        let trade_ref = self.token_index.get(token_id).ok_or(TxError::UnknownLc)?;
        Ok(self.lc_registry.get_mut(trade_ref).unwrap())
    }

    pub fn lc_by_ref(&self, trade_ref: &str) -> Result<&NftLc, TxError> {
        self.lc_registry.get(trade_ref).ok_or(TxError::UnknownLc)
    }

    // ---- onboarding ----

    pub fn onboard_party(
        &mut self,
        id: PartyId,
        role: Role,
        country: String,
        tick: u64,
    ) -> Result<&Party, TxError> {
        if self.parties.contains_key(&id) {
            return Err(TxError::DuplicateParty);
        }
        let party = Party { id: id.clone(), role, country, onboarded_at: tick };
        Ok(self.parties.entry(id).or_insert(party))
    }

    // ---- LC lifecycle ----

    /// Records the sales-contract terms ahead of issuance. Either commercial
    /// party may file them; re-filing before issuance replaces the draft.
    pub fn agree_terms(
        &mut self,
        sender: &PartyId,
        terms: LcTerms,
        tick: u64,
    ) -> Result<(), TxError> {
        terms.validate()?;
        if sender != &terms.applicant && sender != &terms.beneficiary {
            return Err(TxError::WrongBank);
        }
        self.party(sender)?;
        if self.lc_registry.contains_key(&terms.trade_ref) {
            return Err(TxError::DuplicateLc(terms.trade_ref));
        }
        self.drafts.insert(terms.trade_ref.clone(), (terms, tick));
        Ok(())
    }

    /// Mints the LC token. The registry check is the duplicate-LC fraud
    /// gate: a second issuance under the same trade reference is rejected
    /// no matter which bank sends it.
    pub fn issue_lc(
        &mut self,
        sender: &PartyId,
        terms: LcTerms,
        tick: u64,
    ) -> Result<&NftLc, TxError> {
        terms.validate()?;
        if self.lc_registry.contains_key(&terms.trade_ref) {
            return Err(TxError::DuplicateLc(terms.trade_ref));
        }
        if sender != &terms.issuing_bank {
            return Err(TxError::WrongBank);
        }
        self.require_role(&terms.applicant, Role::Importer)?;
        self.require_role(&terms.beneficiary, Role::Exporter)?;
        self.require_role(&terms.issuing_bank, Role::IssuingBank)?;
        self.require_role(&terms.advising_bank, Role::AdvisingBank)?;
        let drafted_at = match self.drafts.get(&terms.trade_ref) {
            Some((draft, drafted_at)) => {
                if draft != &terms {
                    return Err(TxError::InvalidTerms);
                }
                let at = *drafted_at;
                self.drafts.remove(&terms.trade_ref);
                at
            }
            None => tick,
        };
        let token_id = terms.token_id();
        let trade_ref = terms.trade_ref.clone();
        let lc = NftLc {
            token_id,
            terms,
            state: LcState::Issued,
            state_history: vec![(LcState::Drafted, drafted_at), (LcState::Issued, tick)],
        };
        self.token_index.insert(token_id, trade_ref.clone());
        Ok(self.lc_registry.entry(trade_ref).or_insert(lc))
    }

    pub fn advise_lc(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        tick: u64,
    ) -> Result<(), TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.advising_bank {
            return Err(TxError::NotAdvisingBank);
        }
        self.lc_by_token_mut(token_id)?.transition(LcState::Advised, tick)
    }

    /// Records a presentation (on-chain commitments only) and moves the LC
    /// to DocsPresented. Valid from Advised or as a cure after a
    /// discrepancy.
    pub fn present_docs(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        doc_commitments: BTreeMap<DocKind, Hash256>,
        tick: u64,
    ) -> Result<&Presentation, TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.beneficiary {
            return Err(TxError::NotBeneficiary);
        }
        self.lc_by_token_mut(token_id)?.transition(LcState::DocsPresented, tick)?;
        let pres = Presentation {
            lc: *token_id,
            doc_commitments,
            presented_at: tick,
            exam_result: ExamResult::Pending,
            reexam_result: None,
            voided: false,
            rules_version: None,
        };
        let list = self.presentations.entry(*token_id).or_default();
        list.push(pres);
        Ok(list.last().unwrap())
    }

    fn latest_presentation_mut(&mut self, token_id: &Hash256) -> Result<&mut Presentation, TxError> {
        self.presentations
            .get_mut(token_id)
            .and_then(|l| l.last_mut())
            .ok_or(TxError::WrongState)
    }

    pub fn latest_presentation(&self, token_id: &Hash256) -> Option<&Presentation> {
        self.presentations.get(token_id).and_then(|l| l.last())
    }

    /// Advising-bank examination verdict. Clean moves the LC to Compliant;
    /// any discrepancy raises one. The result is written exactly once.
    pub fn record_advising_exam(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        codes: BTreeSet<DiscrepancyCode>,
        tick: u64,
    ) -> Result<(), TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.advising_bank {
            return Err(TxError::NotAdvisingBank);
        }
        if lc.state != LcState::DocsPresented {
            return Err(TxError::WrongState);
        }
        {
            let pres = self.latest_presentation_mut(token_id)?;
            if pres.voided || pres.exam_result != ExamResult::Pending {
                return Err(TxError::WrongState);
            }
            pres.rules_version = Some(EXAM_RULES_VERSION.to_string());
            pres.exam_result = if codes.is_empty() {
                ExamResult::Clean
            } else {
                ExamResult::Discrepant(codes.clone())
            };
        }
        let to = if codes.is_empty() {
            LcState::Compliant
        } else {
            LcState::DiscrepancyRaised
        };
        self.lc_by_token_mut(token_id)?.transition(to, tick)
    }

    /// A reveal failed its commitment check: the presentation is void and
    /// the LC goes back to the discrepancy state for a fresh presentation.
    pub fn void_presentation(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        tick: u64,
    ) -> Result<(), TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.advising_bank && sender != &lc.terms.issuing_bank {
            return Err(TxError::WrongBank);
        }
        if lc.state != LcState::DocsPresented && lc.state != LcState::DocsForwarded {
            return Err(TxError::WrongState);
        }
        self.latest_presentation_mut(token_id)?.voided = true;
        self.lc_by_token_mut(token_id)?
            .transition(LcState::DiscrepancyRaised, tick)
    }

    pub fn forward_docs(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        tick: u64,
    ) -> Result<(), TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.advising_bank {
            return Err(TxError::WrongBank);
        }
        self.lc_by_token_mut(token_id)?.transition(LcState::DocsForwarded, tick)
    }

    /// Issuing-bank re-examination. Clean accepts (emitting the settlement
    /// trigger consumed by the settlement engine); discrepancies send the
    /// LC back for cure.
    pub fn record_issuing_exam(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        codes: BTreeSet<DiscrepancyCode>,
        tick: u64,
    ) -> Result<(), TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.issuing_bank {
            return Err(TxError::WrongBank);
        }
        if lc.state != LcState::DocsForwarded {
            return Err(TxError::WrongState);
        }
        {
            let pres = self.latest_presentation_mut(token_id)?;
            if pres.voided || pres.reexam_result.is_some() {
                return Err(TxError::WrongState);
            }
            pres.reexam_result = Some(if codes.is_empty() {
                ExamResult::Clean
            } else {
                ExamResult::Discrepant(codes.clone())
            });
        }
        let to = if codes.is_empty() {
            LcState::Accepted
        } else {
            LcState::DiscrepancyRaised
        };
        self.lc_by_token_mut(token_id)?.transition(to, tick)
    }

    /// True when an accepted LC authorizes settlement legs.
    pub fn settlement_trigger(&self, token_id: &Hash256) -> bool {
        matches!(
            self.lc_by_token(token_id).map(|lc| lc.state),
            Ok(LcState::Accepted) | Ok(LcState::Settled)
        )
    }

    /// Marks the LC settled. Returns true the first time, false when the
    /// LC was already settled (the marking is exactly-once).
    pub fn mark_settled(&mut self, token_id: &Hash256, tick: u64) -> Result<bool, TxError> {
        let state = self.lc_by_token(token_id)?.state;
        match state {
            LcState::Settled => Ok(false),
            LcState::Accepted => {
                self.lc_by_token_mut(token_id)?.transition(LcState::Settled, tick)?;
                let deadline = self.gr_deadline_ticks;
                let rec = self
                    .compliance
                    .entry(*token_id)
                    .or_insert_with(|| ComplianceRecord::new(*token_id, deadline));
                rec.settled_at = Some(tick);
                Ok(true)
            }
            _ => Err(TxError::NoSettlementTrigger),
        }
    }

    /// Expires every LC still waiting on documents past its expiry tick.
    /// Returns the expired token ids in registry order.
    pub fn expire_sweep(&mut self, now: u64) -> Vec<Hash256> {
        let mut expired = Vec::new();
        for lc in self.lc_registry.values_mut() {
            if matches!(lc.state, LcState::Advised | LcState::DocsPresented)
                && now > lc.terms.expiry_tick
            {
                lc.state = LcState::Expired;
                lc.state_history.push((LcState::Expired, now));
                expired.push(lc.token_id);
            }
        }
        expired
    }

    // ---- compliance paperwork ----

    fn compliance_entry(&mut self, token_id: Hash256) -> &mut ComplianceRecord {
        let deadline = self.gr_deadline_ticks;
        self.compliance
            .entry(token_id)
            .or_insert_with(|| ComplianceRecord::new(token_id, deadline))
    }

    /// Bank realization certificate: only the advising (Indian) bank, only
    /// once the LC is settled.
    pub fn issue_brc(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        tick: u64,
    ) -> Result<(), TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.advising_bank {
            return Err(TxError::NotIndianBank);
        }
        if lc.state != LcState::Settled {
            return Err(TxError::NotSettled);
        }
        let rec = self.compliance_entry(*token_id);
        if rec.brc_issued_at.is_none() {
            rec.brc_issued_at = Some(tick);
            rec.brc_issuer = Some(sender.clone());
        }
        Ok(())
    }

    /// Remittance form, filed by the beneficiary. First filing counts.
    pub fn submit_gr(
        &mut self,
        sender: &PartyId,
        token_id: &Hash256,
        tick: u64,
    ) -> Result<(), TxError> {
        let lc = self.lc_by_token(token_id)?;
        if sender != &lc.terms.beneficiary {
            return Err(TxError::NotBeneficiary);
        }
        let rec = self.compliance_entry(*token_id);
        if rec.gr_submitted_at.is_none() {
            rec.gr_submitted_at = Some(tick);
        }
        Ok(())
    }

    // ---- documentary acceptance ----

    pub fn da_present(
        &mut self,
        sender: &PartyId,
        trade: DaTrade,
    ) -> Result<(), TxError> {
        if self.da_trades.contains_key(&trade.trade_ref) {
            return Err(TxError::DuplicateLc(trade.trade_ref));
        }
        if sender != &trade.exporter {
            return Err(TxError::NotBeneficiary);
        }
        for id in [&trade.exporter, &trade.importer, &trade.exporter_bank, &trade.importer_bank] {
            self.party(id)?;
        }
        self.da_trades.insert(trade.trade_ref.clone(), trade);
        Ok(())
    }

    pub fn da_accept(
        &mut self,
        sender: &PartyId,
        trade_ref: &str,
        tick: u64,
    ) -> Result<(), TxError> {
        let trade = self
            .da_trades
            .get_mut(trade_ref)
            .ok_or(TxError::UnknownDaTrade)?;
        if sender != &trade.importer {
            return Err(TxError::WrongBank);
        }
        if trade.state != DaState::DocsPresented {
            return Err(TxError::WrongState);
        }
        trade.state = DaState::Accepted;
        trade.accepted_at = Some(tick);
        Ok(())
    }

    pub fn da_pay(&mut self, trade_ref: &str, tick: u64) -> Result<(), TxError> {
        let trade = self
            .da_trades
            .get_mut(trade_ref)
            .ok_or(TxError::UnknownDaTrade)?;
        if trade.state != DaState::Accepted {
            return Err(TxError::WrongState);
        }
        trade.state = DaState::Paid;
        trade.paid_at = Some(tick);
        Ok(())
    }
}
