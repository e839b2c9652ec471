//! Run reports: what a run did, in reviewable form, derived entirely
//! from the transcript so regeneration is byte-for-byte reproducible.
//!
//! Sections: the per-step timeline, LC final states, the discrepancy
//! log, rejected transactions (fraud evidence), gas totals, the
//! settlement table with final credits, the compliance summary, the
//! manual-baseline timing comparison, and the trade indices when the
//! scenario requested them. Ticks convert to days at 24 ticks per day.

use crate::analytics::{index_report, IndexReport, TradeFlowTable};
use crate::error::{IndexError, TxError};
use crate::ledger::{
    replay, BlockRecord, BurnVia, ComplianceAction, GenesisConfig, MintVia, NoticeReason, TxBody,
};
use crate::money::{Money, PartyId};
use crate::transcript::Transcript;
use crate::workflow::{DaState, LcState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Hours per simulated day: 1 tick is 1 hour.
pub const TICKS_PER_DAY: u64 = 24;
/// Correspondent-banking baseline: SWIFT MT700 issuance leg, 1 day.
pub const SWIFT_ISSUANCE_TICKS: u64 = 24;
/// Correspondent-banking baseline: one manual document examination, 5 days.
pub const MANUAL_EXAM_TICKS: u64 = 120;
/// Physical title-document courier leg, 3 days. Off-chain either way; it
/// appears in reports but gates nothing on-chain.
pub const COURIER_TICKS: u64 = 72;
/// Documentary-acceptance baseline: one processing step, 3 days.
pub const DA_STEP_TICKS: u64 = 72;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub tick: u64,
    pub height: u64,
    pub actor: PartyId,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcSummary {
    pub trade_ref: String,
    pub state: String,
    /// (state name, tick) pairs in transition order.
    pub history: Vec<(String, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyEntry {
    pub tick: u64,
    pub trade_ref: String,
    pub stage: String,
    pub reporter: PartyId,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionEntry {
    pub height: u64,
    pub tick: u64,
    pub sender: PartyId,
    pub kind: String,
    pub error: String,
    pub detail: String,
}

/// One settlement hop: a transfer row carries the same asset on both
/// sides and no fee; a conversion row shows source, result, and fee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementRow {
    pub tick: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trade_ref: Option<String>,
    pub step: String,
    pub from: PartyId,
    pub to: PartyId,
    pub asset_in: String,
    pub amount_in: u64,
    pub asset_out: String,
    pub amount_out: u64,
    pub fee: u64,
}

/// Where the money ended up for one trade: the last hop tied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalCredit {
    pub trade_ref: String,
    pub party: PartyId,
    pub asset: String,
    pub amount: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceEntry {
    pub trade_ref: String,
    pub settled_at: Option<u64>,
    pub gr_submitted_at: Option<u64>,
    /// None until settled; then whether the form landed inside the window.
    pub gr_compliant: Option<bool>,
    pub brc_issued_at: Option<u64>,
    pub brc_issuer: Option<PartyId>,
    /// Non-empty means the trade fails a post-settlement obligation.
    pub flags: Vec<String>,
}

/// One on-chain protocol step of an LC, with the block distance it took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub step: String,
    pub tick: u64,
    pub height: u64,
    /// Finalized blocks the step occupied. On-chain messaging steps are
    /// single transactions, so this is always 1.
    pub blocks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcTiming {
    pub trade_ref: String,
    pub steps: Vec<StepTiming>,
    pub max_step_blocks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaTiming {
    pub trade_ref: String,
    pub state: String,
    pub presented_at: u64,
    pub accepted_at: Option<u64>,
    pub paid_at: Option<u64>,
    /// Presentation to payment, when the trade completed.
    pub elapsed_ticks: Option<u64>,
}

/// Manual-rail baselines next to the measured on-chain steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingComparison {
    /// Named steps of the correspondent-banking LC baseline.
    pub lc_baseline: Vec<(String, u64)>,
    pub lc_baseline_total_ticks: u64,
    pub da_baseline: Vec<(String, u64)>,
    pub da_baseline_total_ticks: u64,
    /// The physical courier leg that stays off-chain in every rail.
    pub courier_offchain_ticks: u64,
    /// Residual off-chain bank charges per settled LC; informational, never
    /// applied to balances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_charges: Option<Money>,
    pub lc_runs: Vec<LcTiming>,
    pub da_runs: Vec<DaTiming>,
}

pub fn lc_baseline() -> Vec<(String, u64)> {
    vec![
        ("swift issuance".to_string(), SWIFT_ISSUANCE_TICKS),
        ("advising bank manual exam".to_string(), MANUAL_EXAM_TICKS),
        ("document courier".to_string(), COURIER_TICKS),
        ("issuing bank manual exam".to_string(), MANUAL_EXAM_TICKS),
    ]
}

pub fn da_baseline() -> Vec<(String, u64)> {
    vec![
        ("documents through banks".to_string(), DA_STEP_TICKS),
        ("acceptance to payment".to_string(), DA_STEP_TICKS),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    /// Finalized blocks, genesis included.
    pub blocks: u64,
    pub final_tick: u64,
    pub timeline: Vec<TimelineEntry>,
    pub lcs: Vec<LcSummary>,
    pub discrepancies: Vec<DiscrepancyEntry>,
    pub rejections: Vec<RejectionEntry>,
    pub gas_totals: BTreeMap<PartyId, u64>,
    pub gas_charged_total: u64,
    pub settlement: Vec<SettlementRow>,
    pub final_credits: Vec<FinalCredit>,
    pub compliance: Vec<ComplianceEntry>,
    pub timing: TimingComparison,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<IndexReport>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("transcript does not replay: {0}")]
    Chain(#[from] TxError),
    #[error("index fixture: {0}")]
    Table(String),
    #[error("index computation: {0}")]
    Index(#[from] IndexError),
}

impl RunReport {
    pub fn from_transcript(transcript: &Transcript) -> Result<RunReport, ReportError> {
        let indices = match &transcript.header.indices {
            None => None,
            Some(embedded) => {
                let table =
                    TradeFlowTable::parse(&embedded.table_text).map_err(ReportError::Table)?;
                Some(index_report(&table, &embedded.requests)?)
            }
        };
        build(
            &transcript.header.scenario,
            transcript.header.seed,
            &transcript.header.genesis,
            &transcript.blocks,
            indices,
        )
    }

    /// Plain-text rendering, stable byte-for-byte for a given report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "run report: {} (seed {})", self.scenario, self.seed);
        let _ = writeln!(w, "blocks: {}  final tick: {}", self.blocks, self.final_tick);

        let _ = writeln!(w, "\ntimeline");
        if self.timeline.is_empty() {
            let _ = writeln!(w, "  (no actions)");
        }
        for e in &self.timeline {
            let _ = writeln!(
                w,
                "  tick {:>5}  height {:>3}  {:<16}  {}",
                e.tick, e.height, e.actor.0, e.event
            );
        }

        let _ = writeln!(w, "\nletters of credit");
        if self.lcs.is_empty() {
            let _ = writeln!(w, "  (none)");
        }
        for lc in &self.lcs {
            let path: Vec<String> =
                lc.history.iter().map(|(s, t)| format!("{s}@{t}")).collect();
            let _ = writeln!(w, "  {:<20}  {:<12}  {}", lc.trade_ref, lc.state, path.join(" -> "));
        }

        let _ = writeln!(w, "\ndiscrepancies");
        if self.discrepancies.is_empty() {
            let _ = writeln!(w, "  (none)");
        }
        for d in &self.discrepancies {
            let _ = writeln!(
                w,
                "  tick {:>5}  {:<20}  {:<8} stage  by {:<16}  {}",
                d.tick, d.trade_ref, d.stage, d.reporter.0, d.detail
            );
        }

        let _ = writeln!(w, "\nrejected transactions");
        if self.rejections.is_empty() {
            let _ = writeln!(w, "  (none)");
        }
        for r in &self.rejections {
            let _ = writeln!(
                w,
                "  height {:>3}  tick {:>5}  {:<16}  {:<18}  {}: {}",
                r.height, r.tick, r.sender.0, r.kind, r.error, r.detail
            );
        }

        let _ = writeln!(w, "\ngas totals");
        for (party, gas) in &self.gas_totals {
            let _ = writeln!(w, "  {:<20}  {:>8}", party.0, gas);
        }
        let _ = writeln!(w, "  {:<20}  {:>8}", "total", self.gas_charged_total);

        let _ = writeln!(w, "\nsettlement");
        if self.settlement.is_empty() {
            let _ = writeln!(w, "  (no token movement)");
        }
        for s in &self.settlement {
            let tied = s.trade_ref.as_deref().unwrap_or("-");
            let flow = if s.asset_in == s.asset_out {
                format!("{} {}", s.amount_in, s.asset_in)
            } else {
                format!(
                    "{} {} -> {} {} (fee {} {})",
                    s.amount_in, s.asset_in, s.amount_out, s.asset_out, s.fee, s.asset_out
                )
            };
            let _ = writeln!(
                w,
                "  tick {:>5}  {:<20}  {:<22}  {} -> {}  {}",
                s.tick, tied, s.step, s.from.0, s.to.0, flow
            );
        }
        for c in &self.final_credits {
            let _ = writeln!(
                w,
                "  final credit  {:<20}  {} receives {} {}",
                c.trade_ref, c.party.0, c.amount, c.asset
            );
        }

        let _ = writeln!(w, "\ncompliance");
        if self.compliance.is_empty() {
            let _ = writeln!(w, "  (no letters of credit)");
        }
        for c in &self.compliance {
            let settled = c
                .settled_at
                .map(|t| format!("settled@{t}"))
                .unwrap_or_else(|| "not settled".to_string());
            let gr = match (c.gr_submitted_at, c.gr_compliant) {
                (Some(t), Some(true)) => format!("GR@{t} on time"),
                (Some(t), Some(false)) => format!("GR@{t} late"),
                (Some(t), None) => format!("GR@{t}"),
                (None, _) => "GR missing".to_string(),
            };
            let brc = match (&c.brc_issuer, c.brc_issued_at) {
                (Some(by), Some(t)) => format!("BRC@{t} by {}", by.0),
                _ => "BRC missing".to_string(),
            };
            let flags = if c.flags.is_empty() {
                "ok".to_string()
            } else {
                format!("FLAGGED: {}", c.flags.join("; "))
            };
            let _ = writeln!(
                w,
                "  {:<20}  {:<14}  {:<18}  {:<26}  {}",
                c.trade_ref, settled, gr, brc, flags
            );
        }

        let t = &self.timing;
        let _ = writeln!(w, "\ntiming comparison");
        let lc_steps: Vec<String> =
            t.lc_baseline.iter().map(|(n, ticks)| format!("{n} {ticks}")).collect();
        let _ = writeln!(
            w,
            "  letter-of-credit baseline: {} = {} ticks ({} days)",
            lc_steps.join(" + "),
            t.lc_baseline_total_ticks,
            t.lc_baseline_total_ticks / TICKS_PER_DAY
        );
        let da_steps: Vec<String> =
            t.da_baseline.iter().map(|(n, ticks)| format!("{n} {ticks}")).collect();
        let _ = writeln!(
            w,
            "  documentary-acceptance baseline: {} = {} ticks ({} days)",
            da_steps.join(" + "),
            t.da_baseline_total_ticks,
            t.da_baseline_total_ticks / TICKS_PER_DAY
        );
        let _ = writeln!(
            w,
            "  title courier stays off-chain on every rail: {} ticks, gates nothing",
            t.courier_offchain_ticks
        );
        if let Some(charge) = t.manual_charges {
            let _ = writeln!(
                w,
                "  residual manual bank charges: {} {} per settled LC on every rail",
                charge.minor, charge.asset
            );
        }
        for lc in &t.lc_runs {
            let steps: Vec<String> = lc
                .steps
                .iter()
                .map(|s| format!("{} {} blk @tick {}", s.step, s.blocks, s.tick))
                .collect();
            let _ = writeln!(
                w,
                "  on-chain {:<20}  {}  (max step {} block)",
                lc.trade_ref,
                steps.join(", "),
                lc.max_step_blocks
            );
        }
        for da in &t.da_runs {
            let elapsed = da
                .elapsed_ticks
                .map(|e| format!("{e} ticks ({} days)", e / TICKS_PER_DAY))
                .unwrap_or_else(|| "incomplete".to_string());
            let _ = writeln!(
                w,
                "  documentary acceptance {:<20}  {:<14}  elapsed {}",
                da.trade_ref, da.state, elapsed
            );
        }

        if let Some(indices) = &self.indices {
            let _ = writeln!(w, "\ntrade indices");
            for row in &indices.rows {
                let _ = writeln!(
                    w,
                    "  {:<32}  {:>8.3}  {}",
                    row.label, row.value, row.interpretation
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn describe(body: &TxBody) -> String {
    match body {
        TxBody::OnboardParty { id, role, country } => {
            format!("onboarded {} as {} ({country})", id.0, role.name())
        }
        TxBody::AgreeTerms { terms } => format!("agreed terms for {}", terms.trade_ref),
        TxBody::IssueLc { terms } => format!(
            "issued LC {} for {} {}",
            terms.trade_ref, terms.amount.minor, terms.amount.asset.code()
        ),
        TxBody::AdviseLc { trade_ref } => format!("advised LC {trade_ref}"),
        TxBody::PresentDocs { trade_ref, docs } => {
            format!("presented {} document(s) under {trade_ref}", docs.len())
        }
        TxBody::DiscrepancyNotice { trade_ref, stage, notice } => {
            format!("noticed {} on {trade_ref} at {} stage", notice_detail(notice), stage.name())
        }
        TxBody::ForwardDocs { trade_ref } => format!("forwarded documents for {trade_ref}"),
        TxBody::AcceptDocs { trade_ref } => format!("accepted documents for {trade_ref}"),
        TxBody::TokenMint { to, asset, amount, mint } => match mint {
            MintVia::Faucet => format!("minted {amount} {} to {}", asset.code(), to.0),
            MintVia::Onramp { quote_id } => {
                format!("onramped {amount} {} to {} via {quote_id}", asset.code(), to.0)
            }
        },
        TxBody::TokenTransfer { to, asset, amount, lc_ref, da_ref } => {
            let tie = match (lc_ref, da_ref) {
                (Some(r), _) => format!(" (LC {r})"),
                (None, Some(r)) => format!(" (DA {r})"),
                (None, None) => String::new(),
            };
            format!("transferred {amount} {} to {}{tie}", asset.code(), to.0)
        }
        TxBody::TokenBurn { asset, amount, burn } => match burn {
            BurnVia::Retire => format!("retired {amount} {}", asset.code()),
            BurnVia::Offramp { quote_id, credit_to, .. } => format!(
                "offramped {amount} {} to {} via {quote_id}",
                asset.code(),
                credit_to.0
            ),
            BurnVia::BasketRedeem { basket_id, payout, credit_to, .. } => format!(
                "redeemed {amount} {basket_id} units to {} in {}",
                credit_to.0,
                payout.code()
            ),
        },
        TxBody::EscrowFund { lc_ref, amount } => {
            format!("escrowed {amount} under LC {lc_ref}")
        }
        TxBody::EscrowRelease { lc_ref, quote_id } => {
            format!("released escrow of LC {lc_ref} via {quote_id}")
        }
        TxBody::GovernanceVote { action, subject, approve } => {
            let verb = match action {
                crate::consensus::MembershipAction::Add => "add",
                crate::consensus::MembershipAction::Remove => "remove",
            };
            format!(
                "voted {} on {verb} {}",
                if *approve { "for" } else { "against" },
                subject.0
            )
        }
        TxBody::ComplianceEvent { action } => match action {
            ComplianceAction::SubmitGr { trade_ref } => {
                format!("submitted remittance form for {trade_ref}")
            }
            ComplianceAction::IssueBrc { trade_ref } => {
                format!("issued realization certificate for {trade_ref}")
            }
            ComplianceAction::EndOfRun => "swept expiries at end of run".to_string(),
        },
        TxBody::DaPresent { trade_ref, docs, .. } => {
            format!("presented {} document(s) for DA trade {trade_ref}", docs.len())
        }
        TxBody::DaAccept { trade_ref } => format!("accepted DA trade {trade_ref}"),
    }
}

fn notice_detail(notice: &NoticeReason) -> String {
    match notice {
        NoticeReason::Discrepant { codes } => {
            let names: Vec<&str> = codes.iter().map(|c| c.name()).collect();
            format!("discrepancies [{}]", names.join(", "))
        }
        NoticeReason::Tampered { kinds } => {
            let names: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
            format!("tampered reveals [{}]", names.join(", "))
        }
    }
}

/// Builds the report from the transcript pieces. Replays the chain, so a
/// transcript that does not replay yields an error, not a wrong report.
fn build(
    scenario: &str,
    seed: u64,
    genesis: &GenesisConfig,
    blocks: &[BlockRecord],
    indices: Option<IndexReport>,
) -> Result<RunReport, ReportError> {
    let state = replay(genesis, blocks)?;

    let mut timeline = Vec::new();
    let mut rejections = Vec::new();
    let mut discrepancies = Vec::new();
    let mut settlement = Vec::new();
    let mut last_hop: BTreeMap<String, FinalCredit> = BTreeMap::new();
    let mut lc_steps: BTreeMap<String, Vec<StepTiming>> = BTreeMap::new();

    for record in blocks {
        let height = record.block.height;
        for applied in &record.txs {
            let tx = &applied.tx;
            timeline.push(TimelineEntry {
                tick: tx.sim_time,
                height,
                actor: tx.sender.clone(),
                event: describe(&tx.body),
            });

            // protocol messaging steps, for the timing section
            let step = match &tx.body {
                TxBody::IssueLc { terms } => Some((terms.trade_ref.clone(), "issue")),
                TxBody::AdviseLc { trade_ref } => Some((trade_ref.clone(), "advise")),
                TxBody::PresentDocs { trade_ref, .. } => Some((trade_ref.clone(), "present")),
                TxBody::ForwardDocs { trade_ref } => Some((trade_ref.clone(), "forward")),
                TxBody::AcceptDocs { trade_ref } => Some((trade_ref.clone(), "accept")),
                _ => None,
            };
            if let Some((trade_ref, name)) = step {
                lc_steps.entry(trade_ref).or_default().push(StepTiming {
                    step: name.to_string(),
                    tick: record.block.sim_time,
                    height,
                    blocks: 1,
                });
            }

            if let TxBody::DiscrepancyNotice { trade_ref, stage, notice } = &tx.body {
                discrepancies.push(DiscrepancyEntry {
                    tick: tx.sim_time,
                    trade_ref: trade_ref.clone(),
                    stage: stage.name().to_string(),
                    reporter: tx.sender.clone(),
                    detail: notice_detail(notice),
                });
            }

            settlement_rows(applied, &mut settlement, &mut last_hop);
        }
        for rejected in &record.rejected {
            rejections.push(RejectionEntry {
                height,
                tick: rejected.sim_time,
                sender: rejected.sender.clone(),
                kind: rejected.kind.name().to_string(),
                error: rejected.error.clone(),
                detail: rejected.detail.clone(),
            });
        }
    }

    let lcs: Vec<LcSummary> = state
        .workflow
        .lc_registry
        .values()
        .map(|lc| LcSummary {
            trade_ref: lc.terms.trade_ref.clone(),
            state: lc.state.name().to_string(),
            history: lc
                .state_history
                .iter()
                .map(|(s, t)| (s.name().to_string(), *t))
                .collect(),
        })
        .collect();

    let compliance: Vec<ComplianceEntry> = state
        .workflow
        .lc_registry
        .values()
        .map(|lc| {
            let record = state.workflow.compliance.get(&lc.token_id);
            let settled_at = record.and_then(|r| r.settled_at);
            let gr_submitted_at = record.and_then(|r| r.gr_submitted_at);
            let gr_compliant = record.and_then(|r| r.gr_compliant());
            let brc_issued_at = record.and_then(|r| r.brc_issued_at);
            let brc_issuer = record.and_then(|r| r.brc_issuer.clone());
            let mut flags = Vec::new();
            if lc.state == LcState::Settled {
                if brc_issued_at.is_none() {
                    flags.push("settled without realization certificate".to_string());
                }
                if gr_compliant != Some(true) {
                    flags.push("remittance form missing or late".to_string());
                }
            }
            ComplianceEntry {
                trade_ref: lc.terms.trade_ref.clone(),
                settled_at,
                gr_submitted_at,
                gr_compliant,
                brc_issued_at,
                brc_issuer,
                flags,
            }
        })
        .collect();

    let lc_runs: Vec<LcTiming> = lc_steps
        .into_iter()
        .map(|(trade_ref, steps)| {
            let max_step_blocks = steps.iter().map(|s| s.blocks).max().unwrap_or(0);
            LcTiming { trade_ref, steps, max_step_blocks }
        })
        .collect();

    let da_runs: Vec<DaTiming> = state
        .workflow
        .da_trades
        .values()
        .map(|da| DaTiming {
            trade_ref: da.trade_ref.clone(),
            state: da.state.name().to_string(),
            presented_at: da.presented_at,
            accepted_at: da.accepted_at,
            paid_at: da.paid_at,
            elapsed_ticks: match da.state {
                DaState::Paid => da.paid_at.map(|p| p - da.presented_at),
                _ => None,
            },
        })
        .collect();

    let timing = TimingComparison {
        lc_baseline: lc_baseline(),
        lc_baseline_total_ticks: lc_baseline().iter().map(|(_, t)| t).sum(),
        da_baseline: da_baseline(),
        da_baseline_total_ticks: da_baseline().iter().map(|(_, t)| t).sum(),
        courier_offchain_ticks: COURIER_TICKS,
        manual_charges: genesis.manual_charges,
        lc_runs,
        da_runs,
    };

    Ok(RunReport {
        scenario: scenario.to_string(),
        seed,
        blocks: blocks.len() as u64,
        final_tick: blocks.last().map(|r| r.block.sim_time).unwrap_or(0),
        timeline,
        lcs,
        discrepancies,
        rejections,
        gas_charged_total: state.gas_total.values().sum(),
        gas_totals: state.gas_total,
        settlement,
        final_credits: last_hop.into_values().collect(),
        compliance,
        timing,
        indices,
    })
}

/// Extracts the settlement rows one applied transaction contributes and
/// keeps the latest hop per trade as its final credit.
fn settlement_rows(
    applied: &crate::ledger::AppliedTx,
    rows: &mut Vec<SettlementRow>,
    last_hop: &mut BTreeMap<String, FinalCredit>,
) {
    let tx = &applied.tx;
    let tick = tx.sim_time;
    let mut push = |row: SettlementRow| {
        if let Some(trade_ref) = &row.trade_ref {
            last_hop.insert(
                trade_ref.clone(),
                FinalCredit {
                    trade_ref: trade_ref.clone(),
                    party: row.to.clone(),
                    asset: row.asset_out.clone(),
                    amount: row.amount_out,
                },
            );
        }
        rows.push(row);
    };
    match &tx.body {
        TxBody::TokenTransfer { to, asset, amount, lc_ref, da_ref } => {
            push(SettlementRow {
                tick,
                trade_ref: lc_ref.clone().or_else(|| da_ref.clone()),
                step: "transfer".to_string(),
                from: tx.sender.clone(),
                to: to.clone(),
                asset_in: asset.code().to_string(),
                amount_in: *amount,
                asset_out: asset.code().to_string(),
                amount_out: *amount,
                fee: 0,
            });
        }
        TxBody::TokenMint { mint, .. } => {
            if let (MintVia::Onramp { quote_id }, Some(r)) =
                (mint, applied.receipts.first())
            {
                push(receipt_row(tick, None, format!("onramp {quote_id}"), &tx.sender, r));
            }
        }
        TxBody::TokenBurn { burn, .. } => match (burn, applied.receipts.first()) {
            (BurnVia::Offramp { quote_id, lc_ref, .. }, Some(r)) => {
                push(receipt_row(
                    tick,
                    lc_ref.clone(),
                    format!("offramp {quote_id}"),
                    &tx.sender,
                    r,
                ));
            }
            (BurnVia::BasketRedeem { basket_id, lc_ref, .. }, Some(r)) => {
                push(receipt_row(
                    tick,
                    lc_ref.clone(),
                    format!("basket redemption {basket_id}"),
                    &tx.sender,
                    r,
                ));
            }
            _ => {}
        },
        TxBody::EscrowRelease { lc_ref, quote_id } => {
            if let Some(r) = applied.receipts.first() {
                push(receipt_row(
                    tick,
                    Some(lc_ref.clone()),
                    format!("escrow release {quote_id}"),
                    &tx.sender,
                    r,
                ));
            }
        }
        _ => {}
    }
}

fn receipt_row(
    tick: u64,
    trade_ref: Option<String>,
    step: String,
    sender: &PartyId,
    r: &crate::settlement::ConversionReceipt,
) -> SettlementRow {
    SettlementRow {
        tick,
        trade_ref,
        step,
        from: sender.clone(),
        to: r.credited_to.clone(),
        asset_in: r.from_asset.code().to_string(),
        amount_in: r.from_amount,
        asset_out: r.to_asset.code().to_string(),
        amount_out: r.net,
        fee: r.fee,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::tests_support::settled_lc_fixture;
    use crate::money::Asset;
    use crate::transcript::{TranscriptHeader, TRANSCRIPT_FORMAT};

    fn happy_transcript() -> Transcript {
        let (cfg, state) = settled_lc_fixture();
        Transcript {
            header: TranscriptHeader {
                format: TRANSCRIPT_FORMAT,
                scenario: cfg.name.clone(),
                seed: cfg.seed,
                genesis: cfg,
                indices: None,
            },
            blocks: state.chain,
        }
    }

    #[test]
    fn report_covers_every_section_of_the_happy_path() {
        let report = RunReport::from_transcript(&happy_transcript()).unwrap();
        assert_eq!(report.blocks, 5);
        assert_eq!(report.timeline.len(), 10);
        assert_eq!(report.lcs.len(), 1);
        assert_eq!(report.lcs[0].state, "Settled");
        assert!(report.discrepancies.is_empty());
        assert!(report.rejections.is_empty());
        // 10+50+20 (issuance round) + 30 (presentation) + 20+20 (exam)
        // + 4 token ops at 5
        assert_eq!(report.gas_charged_total, 170);

        // settlement: BRL transfer, onramp, USDC transfer, offramp
        assert_eq!(report.settlement.len(), 4);
        let offramp = &report.settlement[3];
        assert_eq!(offramp.amount_in, 19_900_000);
        assert_eq!(offramp.amount_out, 1_647_570_750);
        assert_eq!(offramp.fee, 4_129_250);
        assert_eq!(report.final_credits.len(), 1);
        assert_eq!(report.final_credits[0].amount, 1_647_570_750);
        assert_eq!(report.final_credits[0].asset, "INR");

        // settled but no GR/BRC in this fixture: compliance must flag it
        assert_eq!(report.compliance.len(), 1);
        assert_eq!(report.compliance[0].flags.len(), 2);
    }

    #[test]
    fn timing_section_pins_baselines_and_measures_steps() {
        let report = RunReport::from_transcript(&happy_transcript()).unwrap();
        let t = &report.timing;
        assert_eq!(t.lc_baseline_total_ticks, 336);
        assert_eq!(t.da_baseline_total_ticks, 144);
        // baseline ordering: DA days < LC days, both in their quoted bands
        assert!(t.da_baseline_total_ticks < t.lc_baseline_total_ticks);
        assert!((120..=168).contains(&t.da_baseline_total_ticks));
        assert!((168..=336).contains(&t.lc_baseline_total_ticks));
        assert_eq!(t.lc_runs.len(), 1);
        let steps: Vec<&str> =
            t.lc_runs[0].steps.iter().map(|s| s.step.as_str()).collect();
        assert_eq!(steps, ["issue", "advise", "present", "forward", "accept"]);
        assert_eq!(t.lc_runs[0].max_step_blocks, 1);
    }

    #[test]
    fn manual_charges_appear_in_reports_without_touching_balances() {
        let mut transcript = happy_transcript();
        let plain = RunReport::from_transcript(&transcript).unwrap();
        assert!(plain.timing.manual_charges.is_none());
        assert!(!plain.render_text().contains("manual bank charges"));

        transcript.header.genesis.manual_charges =
            Some(Money::new(Asset::Inr, 150_000));
        let charged = RunReport::from_transcript(&transcript).unwrap();
        assert_eq!(
            charged.timing.manual_charges,
            Some(Money::new(Asset::Inr, 150_000))
        );
        assert!(charged
            .render_text()
            .contains("residual manual bank charges: 150000 INR per settled LC"));
        // informational only: settlement rows and credits are unchanged
        assert_eq!(charged.settlement, plain.settlement);
        assert_eq!(charged.final_credits, plain.final_credits);
        assert_eq!(charged.gas_totals, plain.gas_totals);
    }

    #[test]
    fn report_regenerates_byte_for_byte() {
        let a = RunReport::from_transcript(&happy_transcript()).unwrap();
        let b = RunReport::from_transcript(&happy_transcript()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.render_text(), b.render_text());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn text_rendering_names_the_load_bearing_facts() {
        let report = RunReport::from_transcript(&happy_transcript()).unwrap();
        let text = report.render_text();
        assert!(text.contains("IN-BR-2021-001"));
        assert!(text.contains("Settled"));
        assert!(text.contains("1647570750 INR"));
        assert!(text.contains("336 ticks (14 days)"));
        assert!(text.contains("144 ticks (6 days)"));
        assert!(text.contains("FLAGGED"));
    }

    #[test]
    fn tampered_transcript_cannot_produce_a_report() {
        let mut transcript = happy_transcript();
        transcript.blocks[2].block.sim_time += 1;
        assert!(matches!(
            RunReport::from_transcript(&transcript),
            Err(ReportError::Chain(_))
        ));
    }
}
