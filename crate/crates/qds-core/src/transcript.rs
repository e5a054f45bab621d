//! Full record of a protocol run: channel events, per-receiver verdicts,
//! the key ledger, and the run outcome. Events serialize as JSON lines.

use serde::{Deserialize, Serialize};

use crate::channels::KeyLedger;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// unprotected broadcast (no preshared bits)
    Public,
    /// key material handed out in the distribution stage
    Preshared,
    /// OTP-encrypted and WC-authenticated
    SecretOtp,
    /// WC-authenticated only
    WcAuth,
}

/// One line of the transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub run_id: String,
    pub step: String,
    pub sender: String,
    pub receiver: String,
    pub channel_kind: ChannelKind,
    pub bits_charged: u64,
    pub tampered: bool,
    pub outcome: String,
}

/// A receiver's decision about one document-signature pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum VerdictOutcome {
    Accept { level: i64 },
    Reject,
}

impl VerdictOutcome {
    pub fn is_accept(&self) -> bool {
        matches!(self, VerdictOutcome::Accept { .. })
    }
}

/// Detail of one verification attempt at one level (multi-receiver
/// protocol only): the per-source mismatch counts and test bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelAttempt {
    pub level: i64,
    pub mismatches: Vec<u64>,
    pub tests: Vec<bool>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub outcome: VerdictOutcome,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelAttempt>,
}

impl Verdict {
    pub fn accept(level: i64) -> Self {
        Self {
            outcome: VerdictOutcome::Accept { level },
            levels: Vec::new(),
        }
    }

    pub fn reject() -> Self {
        Self {
            outcome: VerdictOutcome::Reject,
            levels: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunOutcome {
    /// every surviving verification verdict was emitted
    Completed,
    /// a WC authentication failed; no verdicts are emitted after this
    Aborted { step: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReceiverReport {
    pub party: String,
    pub verdict: Verdict,
    /// preshared bits this receiver consumed under the run's attribution
    pub preshared_bits: u64,
}

/// Everything one protocol run produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript {
    pub run_id: String,
    pub protocol: String,
    pub seed: u64,
    pub doc_len: u64,
    pub sig_len: u64,
    pub events: Vec<TranscriptEvent>,
    pub ledger: KeyLedger,
    pub outcome: RunOutcome,
    pub verdicts: Vec<ReceiverReport>,
}

impl Transcript {
    pub fn new(protocol: &str, seed: u64, doc_len: u64) -> Self {
        Self {
            run_id: format!("{protocol}-{seed}"),
            protocol: protocol.to_string(),
            seed,
            doc_len,
            sig_len: 0,
            events: Vec::new(),
            ledger: KeyLedger::new(),
            outcome: RunOutcome::Completed,
            verdicts: Vec::new(),
        }
    }

    pub fn event(
        &mut self,
        step: &str,
        sender: impl ToString,
        receiver: impl ToString,
        channel_kind: ChannelKind,
        bits_charged: u64,
        tampered: bool,
        outcome: &str,
    ) {
        self.events.push(TranscriptEvent {
            run_id: self.run_id.clone(),
            step: step.to_string(),
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            channel_kind,
            bits_charged,
            tampered,
            outcome: outcome.to_string(),
        });
    }

    pub fn aborted(&self) -> bool {
        matches!(self.outcome, RunOutcome::Aborted { .. })
    }

    pub fn all_accept(&self) -> bool {
        !self.aborted()
            && !self.verdicts.is_empty()
            && self.verdicts.iter().all(|r| r.verdict.outcome.is_accept())
    }

    pub fn any_reject(&self) -> bool {
        self.verdicts
            .iter()
            .any(|r| r.verdict.outcome == VerdictOutcome::Reject)
    }

    pub fn verdict_of(&self, party: &str) -> Option<&Verdict> {
        self.verdicts
            .iter()
            .find(|r| r.party == party)
            .map(|r| &r.verdict)
    }

    pub fn preshared_bits_of(&self, party: &str) -> Option<u64> {
        self.verdicts
            .iter()
            .find(|r| r.party == party)
            .map(|r| r.preshared_bits)
    }

    /// Events as JSON lines, one event per line.
    pub fn events_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }
}
