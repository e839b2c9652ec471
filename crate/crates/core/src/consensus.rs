//! Quorum finalization among equal-weight bank validators, plus
//! join/remove membership voting.
//!
//! One height runs in retry windows of a fixed tick budget. The proposer
//! for retry r is members[(height + r) % n]. An honest proposer
//! broadcasts the candidate at the window start and counts its own vote;
//! honest validators vote back to the proposer on delivery. The proposer
//! finalizes on reaching quorum = floor(2n/3) + 1 votes within the
//! window and broadcasts a commit carrying the vote set. The candidate
//! is fixed for the whole height, so re-votes across retries are safe:
//! a validator never endorses two different candidates at one height.
//! Faults are silence and partitions only; nobody equivocates.

use crate::error::TxError;
use crate::hash::Hash256;
use crate::money::PartyId;
use crate::net::{FaultSchedule, Network};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Votes needed to finalize among n validators: floor(2n/3) + 1.
pub fn quorum(n: usize) -> usize {
    2 * n / 3 + 1
}

/// Insertion-ordered validator roster, one vote each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidatorSet {
    members: Vec<PartyId>,
}

impl ValidatorSet {
    pub fn new(members: Vec<PartyId>) -> Result<Self, TxError> {
        if members.is_empty() {
            return Err(TxError::InvalidProposal);
        }
        let unique: BTreeSet<&PartyId> = members.iter().collect();
        if unique.len() != members.len() {
            return Err(TxError::DuplicateParty);
        }
        Ok(ValidatorSet { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: &PartyId) -> bool {
        self.members.iter().any(|m| m == id)
    }

    pub fn members(&self) -> &[PartyId] {
        &self.members
    }

    pub fn quorum(&self) -> usize {
        quorum(self.members.len())
    }

    /// Round-robin by height, shifted once per retry.
    pub fn proposer_for(&self, height: u64, retry: u64) -> &PartyId {
        let n = self.members.len() as u64;
        &self.members[((height + retry) % n) as usize]
    }

    pub fn add(&mut self, id: PartyId) -> Result<(), TxError> {
        if self.contains(&id) {
            return Err(TxError::DuplicateParty);
        }
        self.members.push(id);
        Ok(())
    }

    pub fn remove(&mut self, id: &PartyId) -> Result<(), TxError> {
        if !self.contains(id) {
            return Err(TxError::UnknownParty);
        }
        if self.members.len() == 1 {
            return Err(TxError::InvalidProposal);
        }
        self.members.retain(|m| m != id);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MembershipAction {
    Add,
    Remove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProposalStatus {
    Open,
    Passed,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipProposal {
    pub action: MembershipAction,
    pub subject: PartyId,
    pub proposer: PartyId,
    pub votes_for: BTreeSet<PartyId>,
    pub votes_against: BTreeSet<PartyId>,
    pub status: ProposalStatus,
}

impl MembershipProposal {
    /// Opens a proposal; the subject must make sense against the current
    /// roster (add a non-member, remove a member but never the last one).
    pub fn open(
        action: MembershipAction,
        subject: PartyId,
        proposer: PartyId,
        members: &ValidatorSet,
    ) -> Result<Self, TxError> {
        if !members.contains(&proposer) {
            return Err(TxError::NotAMember);
        }
        match action {
            MembershipAction::Add if members.contains(&subject) => {
                return Err(TxError::InvalidProposal)
            }
            MembershipAction::Remove if !members.contains(&subject) => {
                return Err(TxError::InvalidProposal)
            }
            MembershipAction::Remove if members.len() == 1 => {
                return Err(TxError::InvalidProposal)
            }
            _ => {}
        }
        Ok(MembershipProposal {
            action,
            subject,
            proposer,
            votes_for: BTreeSet::new(),
            votes_against: BTreeSet::new(),
            status: ProposalStatus::Open,
        })
    }

    /// Records one vote. Passes at quorum approvals; rejects once enough
    /// validators object that quorum can no longer be reached.
    pub fn vote(
        &mut self,
        members: &ValidatorSet,
        voter: &PartyId,
        approve: bool,
    ) -> Result<ProposalStatus, TxError> {
        if !members.contains(voter) {
            return Err(TxError::NotAMember);
        }
        if self.status != ProposalStatus::Open {
            return Err(TxError::ProposalClosed);
        }
        if self.votes_for.contains(voter) || self.votes_against.contains(voter) {
            return Err(TxError::DuplicateVote);
        }
        if approve {
            self.votes_for.insert(voter.clone());
        } else {
            self.votes_against.insert(voter.clone());
        }
        let n = members.len();
        let q = quorum(n);
        if self.votes_for.len() >= q {
            self.status = ProposalStatus::Passed;
        } else if self.votes_against.len() >= n - q + 1 {
            self.status = ProposalStatus::Rejected;
        }
        Ok(self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsensusMsg {
    Proposal { height: u64, retry: u64, candidate: Hash256 },
    Vote { height: u64, retry: u64, candidate: Hash256, voter: PartyId },
    Commit { height: u64, candidate: Hash256, votes: BTreeSet<PartyId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finalization {
    pub candidate: Hash256,
    pub proposer: PartyId,
    pub votes: BTreeSet<PartyId>,
    pub tick: u64,
    /// Honest validators that saw the commit message (proposer included).
    pub observers: BTreeSet<PartyId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightOutcome {
    pub height: u64,
    pub finalized: Option<Finalization>,
    pub retries_used: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusConfig {
    pub round_timeout_ticks: u64,
    pub max_retries: u64,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig { round_timeout_ticks: 10, max_retries: 8 }
    }
}

/// Drives one height to finalization or exhaustion of the retry budget.
///
/// `candidate_valid` stands in for replica-side block validation; honest
/// validators only vote when it holds. Silence is evaluated at the tick a
/// validator would act (propose or vote); partitions are enforced by the
/// network. Votes landing at or after a window's deadline are ignored.
pub fn run_height(
    members: &ValidatorSet,
    height: u64,
    candidate: Hash256,
    candidate_valid: bool,
    start_tick: u64,
    cfg: &ConsensusConfig,
    net: &mut Network<ConsensusMsg>,
    faults: &FaultSchedule,
) -> HeightOutcome {
    let q = members.quorum();
    let deadline_of = |retry: u64| start_tick + (retry + 1) * cfg.round_timeout_ticks;
    let mut tallies: Vec<BTreeSet<PartyId>> = Vec::new();
    let mut finalized: Option<Finalization> = None;
    let mut retries_used = 0;

    'retries: for retry in 0..=cfg.max_retries {
        retries_used = retry;
        let window_start = start_tick + retry * cfg.round_timeout_ticks;
        let deadline = deadline_of(retry);
        let proposer = members.proposer_for(height, retry).clone();
        tallies.push(BTreeSet::new());

        if !faults.is_silent(&proposer, window_start) {
            for m in members.members() {
                if *m != proposer {
                    net.send(
                        &proposer,
                        m,
                        window_start,
                        ConsensusMsg::Proposal { height, retry, candidate },
                    );
                }
            }
            // the proposer endorses its own candidate on the spot
            tallies[retry as usize].insert(proposer.clone());
            if tallies[retry as usize].len() >= q {
                finalized = Some(commit(
                    members, &proposer, height, candidate, window_start,
                    &tallies[retry as usize], net,
                ));
                break 'retries;
            }
        }

        // one tick's deliveries are simultaneous: apply the whole batch,
        // then check quorum, so every vote landing that tick is recorded
        while let Some((tick, batch)) = net.pop_batch_before(deadline) {
            for env in batch {
                match env.payload {
                    ConsensusMsg::Proposal { height: h, retry: r, candidate: c } => {
                        if h != height || faults.is_silent(&env.to, tick) || !candidate_valid {
                            continue;
                        }
                        let back_to = members.proposer_for(h, r).clone();
                        let voter = env.to.clone();
                        net.send(
                            &env.to,
                            &back_to,
                            tick,
                            ConsensusMsg::Vote { height: h, retry: r, candidate: c, voter },
                        );
                    }
                    ConsensusMsg::Vote { height: h, retry: r, candidate: c, voter } => {
                        if h != height
                            || c != candidate
                            || tick >= deadline_of(r)
                            || env.to != *members.proposer_for(h, r)
                            || faults.is_silent(&env.to, tick)
                        {
                            continue;
                        }
                        tallies[r as usize].insert(voter);
                    }
                    ConsensusMsg::Commit { .. } => {}
                }
            }
            let tally = &tallies[retry as usize];
            if tally.len() >= q {
                finalized =
                    Some(commit(members, &proposer, height, candidate, tick, tally, net));
                break 'retries;
            }
        }
    }

    // drain in-flight traffic so commit observations settle
    while let Some((tick, env)) = net.pop_any() {
        if let ConsensusMsg::Commit { height: h, .. } = env.payload {
            if h == height && !faults.is_silent(&env.to, tick) {
                if let Some(fin) = finalized.as_mut() {
                    fin.observers.insert(env.to.clone());
                }
            }
        }
    }

    HeightOutcome { height, finalized, retries_used }
}

fn commit(
    members: &ValidatorSet,
    proposer: &PartyId,
    height: u64,
    candidate: Hash256,
    tick: u64,
    votes: &BTreeSet<PartyId>,
    net: &mut Network<ConsensusMsg>,
) -> Finalization {
    for m in members.members() {
        if m != proposer {
            net.send(
                proposer,
                m,
                tick,
                ConsensusMsg::Commit { height, candidate, votes: votes.clone() },
            );
        }
    }
    Finalization {
        candidate,
        proposer: proposer.clone(),
        votes: votes.clone(),
        tick,
        observers: [proposer.clone()].into_iter().collect(),
    }
}
