//! Protocol, analytics, and scenario error types.
//!
//! `TxError` covers every reason a transaction or block is rejected. Each
//! variant has a stable short code used in transcripts and reports, so error
//! surfaces are diff-stable golden-test material.

use thiserror::Error;

/// Rejection causes for transactions, blocks, and replay.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TxError {
    // block-level
    #[error("votes below quorum")]
    QuorumNotMet,
    #[error("parent hash does not match previous block")]
    InvalidParentHash,
    #[error("invalid transaction at index {0}: {1}")]
    InvalidTransaction(usize, Box<TxError>),
    #[error("hash chain broken at height {0}")]
    BrokenHashChain(u64),

    // party registry
    #[error("sender not onboarded")]
    UnknownParty,
    #[error("party id already registered")]
    DuplicateParty,
    #[error("invalid role")]
    InvalidRole,

    // membership voting
    #[error("voter is not a validator")]
    NotAMember,
    #[error("validator already voted on this proposal")]
    DuplicateVote,
    #[error("proposal is not open")]
    ProposalClosed,
    #[error("invalid membership proposal")]
    InvalidProposal,

    // LC workflow
    #[error("an LC with trade_ref {0:?} is already registered")]
    DuplicateLc(String),
    #[error("LC terms violate their invariants")]
    InvalidTerms,
    #[error("no LC registered for this reference")]
    UnknownLc,
    #[error("operation not allowed in the LC's current state")]
    WrongState,
    #[error("caller is not the advising bank")]
    NotAdvisingBank,
    #[error("caller is not the beneficiary")]
    NotBeneficiary,
    #[error("caller is not the bank this step names")]
    WrongBank,
    #[error("revealed content does not match the on-chain commitment")]
    CommitmentMismatch,
    #[error("BRC can only be issued by the advising (Indian) bank")]
    NotIndianBank,
    #[error("LC is not settled")]
    NotSettled,
    #[error("no DA trade registered for this reference")]
    UnknownDaTrade,

    // document store
    #[error("document version chain is broken")]
    BrokenChain,
    #[error("unknown document")]
    UnknownDocument,
    #[error("version out of range")]
    VersionOutOfRange,

    // settlement
    #[error("insufficient funds")]
    InsufficientFunds,
    #[error("quote pair does not match the conversion")]
    QuotePairMismatch,
    #[error("no quote with this id")]
    UnknownQuote,
    #[error("no basket with this id")]
    UnknownBasket,
    #[error("no accepted LC authorizes this settlement")]
    NoSettlementTrigger,
    #[error("no price for good {good:?} at tick {tick}")]
    MissingPrice { good: String, tick: u64 },
    #[error("escrow release condition not met")]
    ConditionNotMet,
    #[error("amount exceeds representable range")]
    AmountOverflow,
    #[error("fee of {0} bps exceeds 10000")]
    InvalidFee(u32),

    // replay and record checks
    #[error("recorded examination outcome does not match recomputation")]
    ExamMismatch,
    #[error("recorded conversion receipts do not match recomputation")]
    ReceiptMismatch,
    #[error("gas charged does not match the schedule entry of {0}")]
    WrongGas(u64),
    #[error("invalid genesis configuration: {0}")]
    InvalidGenesis(String),
}

impl TxError {
    /// Stable short code for transcripts and reports.
    pub fn code(&self) -> &'static str {
        match self {
            TxError::QuorumNotMet => "QuorumNotMet",
            TxError::InvalidParentHash => "InvalidParentHash",
            TxError::InvalidTransaction(..) => "InvalidTransaction",
            TxError::BrokenHashChain(..) => "BrokenHashChain",
            TxError::UnknownParty => "UnknownParty",
            TxError::DuplicateParty => "DuplicateParty",
            TxError::InvalidRole => "InvalidRole",
            TxError::NotAMember => "NotAMember",
            TxError::DuplicateVote => "DuplicateVote",
            TxError::ProposalClosed => "ProposalClosed",
            TxError::InvalidProposal => "InvalidProposal",
            TxError::DuplicateLc(..) => "DuplicateLc",
            TxError::InvalidTerms => "InvalidTerms",
            TxError::UnknownLc => "UnknownLc",
            TxError::WrongState => "WrongState",
            TxError::NotAdvisingBank => "NotAdvisingBank",
            TxError::NotBeneficiary => "NotBeneficiary",
            TxError::WrongBank => "WrongBank",
            TxError::CommitmentMismatch => "CommitmentMismatch",
            TxError::NotIndianBank => "NotIndianBank",
            TxError::NotSettled => "NotSettled",
            TxError::UnknownDaTrade => "UnknownDaTrade",
            TxError::BrokenChain => "BrokenChain",
            TxError::UnknownDocument => "UnknownDocument",
            TxError::VersionOutOfRange => "VersionOutOfRange",
            TxError::InsufficientFunds => "InsufficientFunds",
            TxError::QuotePairMismatch => "QuotePairMismatch",
            TxError::UnknownQuote => "UnknownQuote",
            TxError::UnknownBasket => "UnknownBasket",
            TxError::NoSettlementTrigger => "NoSettlementTrigger",
            TxError::MissingPrice { .. } => "MissingPrice",
            TxError::ConditionNotMet => "ConditionNotMet",
            TxError::AmountOverflow => "AmountOverflow",
            TxError::InvalidFee(..) => "InvalidFee",
            TxError::ExamMismatch => "ExamMismatch",
            TxError::ReceiptMismatch => "ReceiptMismatch",
            TxError::WrongGas(..) => "WrongGas",
            TxError::InvalidGenesis(..) => "InvalidGenesis",
        }
    }
}

/// Trade-index computation errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("input {0} must be positive")]
    NonPositiveInput(&'static str),
    #[error("all values are zero")]
    AllZero,
    #[error("missing aggregate {0:?}")]
    MissingAggregate(String),
}

/// Scenario loading and validation errors.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error in {field}: {message}")]
    Schema { field: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
