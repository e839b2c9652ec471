//! Scenario runner: drives the action script through seeded consensus
//! and emits the run transcript.
//!
//! Actions sharing a submission tick form one block candidate, so a
//! protocol step costs exactly one finalized block. Each candidate runs
//! one consensus height over the reused network harness; the block seals
//! at the finalization tick. Document salts come from a dedicated RNG
//! stream, so network jitter never shifts a commitment and the same
//! (scenario, seed) pair always yields byte-identical transcripts.

use crate::consensus::{run_height, ConsensusMsg};
use crate::docstore::commit;
use crate::enc::{CanonicalEncode, Encoder};
use crate::error::{ScenarioError, TxError};
use crate::hash::{hash_bytes, Hash256};
use crate::ledger::{
    BurnVia, ComplianceAction, DocReveal, LedgerState, MintVia, NoticeReason, Transaction, TxBody,
};
use crate::money::Asset;
use crate::net::Network;
use crate::scenario::{ActionOp, DocScript, Scenario, ScenarioAction, Tamper};
use crate::transcript::{EmbeddedIndices, Transcript, TranscriptHeader, TRANSCRIPT_FORMAT};
use crate::workflow::{DocKind, DocMetadata};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;

/// Terminal failure of a run. Individual transactions that bounce are not
/// errors; they land in the block's rejected list as fraud evidence.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("chain error: {0}")]
    Ledger(#[from] TxError),
    #[error("consensus stalled at height {height} (started tick {start_tick})")]
    Stalled { height: u64, start_tick: u64 },
}

/// A completed run: the transcript plus the live final state it encodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub transcript: Transcript,
    pub state: LedgerState,
}

/// Loads the index fixture a scenario requests, resolved relative to the
/// scenario's directory, ready for embedding in the transcript header.
pub fn load_indices(
    scenario: &Scenario,
    scenario_dir: &Path,
) -> Result<Option<EmbeddedIndices>, ScenarioError> {
    match &scenario.indices {
        None => Ok(None),
        Some(spec) => {
            let table_text = std::fs::read_to_string(scenario_dir.join(&spec.table))?;
            Ok(Some(EmbeddedIndices { table_text, requests: spec.requests.clone() }))
        }
    }
}

/// Loads and runs the scenario at `path`. A seed override replaces the
/// file's seed before anything derives from it.
pub fn run_path(path: &Path, seed_override: Option<u64>) -> Result<RunOutcome, RunError> {
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let indices = load_indices(&scenario, dir)?;
    run(&scenario, indices)
}

/// Runs a validated scenario to completion.
pub fn run(
    scenario: &Scenario,
    indices: Option<EmbeddedIndices>,
) -> Result<RunOutcome, RunError> {
    let genesis = scenario.genesis_config()?;
    let mut state = LedgerState::genesis(&genesis)?;
    // stream 2 feeds commitment salts; stream 1 belongs to the network
    let mut salts = ChaCha8Rng::seed_from_u64(scenario.seed);
    salts.set_stream(2);
    let mut net: Network<ConsensusMsg> =
        Network::new(scenario.network.to_config(scenario.seed));
    let consensus = scenario.consensus.to_config();

    let mut groups: BTreeMap<u64, Vec<&ScenarioAction>> = BTreeMap::new();
    for action in &scenario.actions {
        groups.entry(action.at).or_default().push(action);
    }

    let mut last_final = 0u64;
    for (at, group) in groups {
        let txs: Vec<Transaction> = group
            .iter()
            .map(|action| build_tx(&state, action, &mut salts))
            .collect();
        let height = state.chain.len() as u64;
        let start_tick = at.max(last_final);
        let members = state.validators.clone();
        let outcome = run_height(
            &members,
            height,
            candidate_digest(height, &txs),
            true,
            start_tick,
            &consensus,
            &mut net,
            &scenario.faults,
        );
        let fin = match outcome.finalized {
            Some(fin) => fin,
            None => return Err(RunError::Stalled { height, start_tick }),
        };
        last_final = fin.tick;
        state.build_block(txs, fin.proposer, fin.votes, fin.tick)?;
    }

    let transcript = Transcript {
        header: TranscriptHeader {
            format: TRANSCRIPT_FORMAT,
            scenario: scenario.name.clone(),
            seed: scenario.seed,
            genesis,
            indices,
        },
        blocks: state.chain.clone(),
    };
    Ok(RunOutcome { transcript, state })
}

/// What the proposer circulates for a height: a digest binding the height
/// to the exact candidate transaction list.
fn candidate_digest(height: u64, txs: &[Transaction]) -> Hash256 {
    let mut enc = Encoder::new();
    enc.u64(height);
    let ids: Vec<&Hash256> = txs.iter().map(|tx| &tx.tx_id).collect();
    enc.seq(&ids, |e, id| {
        e.bytes(id.as_bytes());
    });
    hash_bytes(&enc.finish())
}

fn build_tx(state: &LedgerState, action: &ScenarioAction, salts: &mut ChaCha8Rng) -> Transaction {
    let (body, reveals) = lower_op(state, &action.op, salts);
    let gas = state.gas.cost(body.kind());
    let tx = Transaction::new(action.sender.clone(), body, gas, action.at);
    if reveals.is_empty() {
        tx
    } else {
        tx.with_reveals(reveals)
    }
}

/// Lowers one scripted step to a chain transaction body plus the reveals
/// it publishes.
fn lower_op(
    state: &LedgerState,
    op: &ActionOp,
    salts: &mut ChaCha8Rng,
) -> (TxBody, Vec<DocReveal>) {
    let plain = |body: TxBody| (body, Vec::new());
    match op {
        ActionOp::OnboardParty { id, role, country } => plain(TxBody::OnboardParty {
            id: id.clone(),
            role: *role,
            country: country.clone(),
        }),
        ActionOp::AgreeTerms { terms } => plain(TxBody::AgreeTerms { terms: terms.clone() }),
        ActionOp::IssueLc { terms } => plain(TxBody::IssueLc { terms: terms.clone() }),
        ActionOp::AdviseLc { trade_ref } => {
            plain(TxBody::AdviseLc { trade_ref: trade_ref.clone() })
        }
        ActionOp::PresentDocs { trade_ref, docs } => {
            let (commitments, reveals) = script_docs(docs, salts);
            (TxBody::PresentDocs { trade_ref: trade_ref.clone(), docs: commitments }, reveals)
        }
        ActionOp::DiscrepancyNotice { trade_ref, stage, codes, tampered } => {
            let notice = if tampered.is_empty() {
                NoticeReason::Discrepant { codes: codes.clone() }
            } else {
                NoticeReason::Tampered { kinds: tampered.clone() }
            };
            plain(TxBody::DiscrepancyNotice {
                trade_ref: trade_ref.clone(),
                stage: *stage,
                notice,
            })
        }
        ActionOp::ForwardDocs { trade_ref } => {
            plain(TxBody::ForwardDocs { trade_ref: trade_ref.clone() })
        }
        ActionOp::AcceptDocs { trade_ref } => {
            plain(TxBody::AcceptDocs { trade_ref: trade_ref.clone() })
        }
        ActionOp::Mint { to, asset, amount, quote } => {
            let mint = match quote {
                Some(quote_id) => MintVia::Onramp { quote_id: quote_id.clone() },
                None => MintVia::Faucet,
            };
            plain(TxBody::TokenMint { to: to.clone(), asset: *asset, amount: *amount, mint })
        }
        ActionOp::Transfer { to, asset, amount, lc_ref, da_ref } => plain(TxBody::TokenTransfer {
            to: to.clone(),
            asset: *asset,
            amount: *amount,
            lc_ref: lc_ref.clone(),
            da_ref: da_ref.clone(),
        }),
        ActionOp::Retire { asset, amount } => plain(TxBody::TokenBurn {
            asset: *asset,
            amount: *amount,
            burn: BurnVia::Retire,
        }),
        ActionOp::Offramp { amount, quote, credit_to, lc_ref } => {
            // the burned asset is the quote's source side
            let asset = state.quotes.get(quote).map(|q| q.from).unwrap_or(Asset::Usdc);
            plain(TxBody::TokenBurn {
                asset,
                amount: *amount,
                burn: BurnVia::Offramp {
                    quote_id: quote.clone(),
                    credit_to: credit_to.clone(),
                    lc_ref: lc_ref.clone(),
                },
            })
        }
        ActionOp::BasketRedeem { amount, basket, payout, fee_bps, credit_to, lc_ref } => {
            plain(TxBody::TokenBurn {
                asset: Asset::Basket,
                amount: *amount,
                burn: BurnVia::BasketRedeem {
                    basket_id: basket.clone(),
                    payout: *payout,
                    fee_bps: *fee_bps,
                    credit_to: credit_to.clone(),
                    lc_ref: lc_ref.clone(),
                },
            })
        }
        ActionOp::EscrowFund { lc_ref, amount } => {
            plain(TxBody::EscrowFund { lc_ref: lc_ref.clone(), amount: *amount })
        }
        ActionOp::EscrowRelease { lc_ref, quote } => plain(TxBody::EscrowRelease {
            lc_ref: lc_ref.clone(),
            quote_id: quote.clone(),
        }),
        ActionOp::GovernanceVote { vote, subject, approve } => plain(TxBody::GovernanceVote {
            action: *vote,
            subject: subject.clone(),
            approve: *approve,
        }),
        ActionOp::SubmitGr { trade_ref } => plain(TxBody::ComplianceEvent {
            action: ComplianceAction::SubmitGr { trade_ref: trade_ref.clone() },
        }),
        ActionOp::IssueBrc { trade_ref } => plain(TxBody::ComplianceEvent {
            action: ComplianceAction::IssueBrc { trade_ref: trade_ref.clone() },
        }),
        ActionOp::EndOfRun {} => plain(TxBody::ComplianceEvent {
            action: ComplianceAction::EndOfRun,
        }),
        ActionOp::DaPresent { trade_ref, importer, exporter_bank, importer_bank, docs } => {
            let (commitments, reveals) = script_docs(docs, salts);
            (
                TxBody::DaPresent {
                    trade_ref: trade_ref.clone(),
                    importer: importer.clone(),
                    exporter_bank: exporter_bank.clone(),
                    importer_bank: importer_bank.clone(),
                    docs: commitments,
                },
                reveals,
            )
        }
        ActionOp::DaAccept { trade_ref } => {
            plain(TxBody::DaAccept { trade_ref: trade_ref.clone() })
        }
    }
}

/// Commits each scripted document and builds its reveal. The commitment
/// always covers the honest content; tampering corrupts only the reveal,
/// which is exactly what the on-chain exam catches.
fn script_docs(
    docs: &[DocScript],
    salts: &mut ChaCha8Rng,
) -> (BTreeMap<DocKind, Hash256>, Vec<DocReveal>) {
    let mut commitments = BTreeMap::new();
    let mut reveals = Vec::new();
    for d in docs {
        let honest = DocMetadata {
            kind: d.kind,
            reference: d.reference.clone(),
            amount_minor: d.amount,
            shipment_tick: d.shipment_tick,
            details: d.details.clone(),
        };
        let c = commit(&honest.canonical_bytes(), salts);
        commitments.insert(d.kind, c.digest);
        let revealed = match &d.tamper {
            Tamper::OmitReveal => continue,
            Tamper::None => honest,
            Tamper::AlterAmount { amount } => {
                DocMetadata { amount_minor: Some(*amount), ..honest }
            }
            Tamper::AlterDetails { details } => {
                DocMetadata { details: details.clone(), ..honest }
            }
        };
        reveals.push(DocReveal { kind: d.kind, salt: c.salt, metadata: revealed });
    }
    (commitments, reveals)
}
