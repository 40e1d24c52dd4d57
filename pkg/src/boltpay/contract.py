"""The banknote contract: the circuit that backs a note with coins.

A banknote is a bolt (or signing-key bundle of bolts) whose serial is
stored in a single-party contract holding the note's face value.  The
circuit arbitrates exactly three stories:

* the holder redeems, proving possession by opening the serial;
* someone says the note is lost, posts a deposit, and after a maturity
  window collects the deposit back and rebinds the contract to a fresh
  serial they control;
* the real holder answers such a claim within the window, proving
  possession, which rebinds the contract to the holder's fresh serial and
  awards them the claimant's deposit.

Three interchangeable variants share the story: the base variant proves
possession by revealing preimages, the sig-gated variant by a one-time
signature naming the acting party (so a bystander cannot replay the proof),
and the commit-reveal variant replaces the direct lost claim with a
commit-then-reveal pair to blunt claim front-running.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from .ledger import ALL_COINS, ContractParams, register_circuit
from .lightning import SERIAL_LEN, verify_certificate_segments
from .qlds import verify_sig

COMMIT_TAG = b"QLCOMMIT"
CHALLENGE_TAG = b"CHALLENGE:"
RECOVER_TAG = b"RECOVER:"
NONCE_LEN = 16

VARIANTS = ("base", "sig-gated", "commit-reveal")


@dataclass(frozen=True)
class PhiParams:
    """Network-wide circuit constants; equal for every note in a network."""

    variant: str = "base"
    d0: int = 10        # deposit a lost-note claim must post
    t_tr: int = 100     # ticks an unanswered claim needs to mature
    t0: int = 10        # commit-reveal: reveal deadline after commit
    t1: int = 10        # commit-reveal: settle delay after reveal
    cert_len: int = 16  # preimage bytes per 32-byte serial segment

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


# -- claim states ------------------------------------------------------

@dataclass(frozen=True)
class NoActiveClaim:
    pass


NO_CLAIM = NoActiveClaim()


@dataclass(frozen=True)
class ClaimBy:
    pid: str
    since: int


@dataclass(frozen=True)
class CommitEntry:
    pid: str
    commitment: bytes
    committed_at: int
    revealed_at: int | None = None


@dataclass(frozen=True)
class LostClaimCommits:
    entries: tuple[CommitEntry, ...] = ()


@dataclass(frozen=True)
class BanknoteState:
    """(serial, claim) pair the ledger stores; serial None once redeemed."""

    serial: bytes | None
    claim: object


# -- witnesses ---------------------------------------------------------

@dataclass(frozen=True)
class BanknoteLost:
    pass


@dataclass(frozen=True)
class ChallengeClaim:
    certificate: bytes
    new_serial: bytes


@dataclass(frozen=True)
class ClaimUnchallenged:
    new_serial: bytes


@dataclass(frozen=True)
class RecoverCoins:
    certificate: bytes


@dataclass(frozen=True)
class ChallengeClaimSig:
    signature: bytes
    new_serial: bytes


@dataclass(frozen=True)
class RecoverCoinsSig:
    signature: bytes


@dataclass(frozen=True)
class CommitLost:
    commitment: bytes


@dataclass(frozen=True)
class RevealLost:
    nonce: bytes


def commitment_hash(pid: str, context: bytes, nonce: bytes) -> bytes:
    """Commitment to "pid is filing a lost claim here", hiding the nonce."""
    return hashlib.sha256(COMMIT_TAG + pid.encode() + context + nonce).digest()


def challenge_message(pid: str) -> bytes:
    return CHALLENGE_TAG + pid.encode()


def recover_message(pid: str) -> bytes:
    return RECOVER_TAG + pid.encode()


def _serial_ok(s) -> bool:
    return isinstance(s, bytes) and s and len(s) % SERIAL_LEN == 0


# -- transition functions ----------------------------------------------

def phi_money(params: PhiParams, pid: str, w, t: int, st: BanknoteState, d: int):
    """Base variant.  Returns (new_state, payout) or None for no-transition."""
    if not isinstance(st, BanknoteState) or st.serial is None:
        return None
    claim = st.claim
    if isinstance(claim, NoActiveClaim):
        if isinstance(w, BanknoteLost) and d == params.d0:
            return BanknoteState(st.serial, ClaimBy(pid, t)), 0
        if (isinstance(w, RecoverCoins) and d == 0
                and verify_certificate_segments(st.serial, w.certificate)):
            return BanknoteState(None, None), ALL_COINS
    elif isinstance(claim, ClaimBy):
        if (isinstance(w, ChallengeClaim) and d == 0 and _serial_ok(w.new_serial)
                and verify_certificate_segments(st.serial, w.certificate)):
            return BanknoteState(w.new_serial, NO_CLAIM), params.d0
        if (isinstance(w, ClaimUnchallenged) and d == 0
                and _serial_ok(w.new_serial)
                and pid == claim.pid and t - claim.since > params.t_tr):
            return BanknoteState(w.new_serial, NO_CLAIM), params.d0
    return None


def phi_money_sig(params: PhiParams, pid: str, w, t: int, st: BanknoteState, d: int):
    """Signature-gated variant: possession proofs must name the sender.

    Lost claims and their maturity are as in the base variant; the
    challenge and recover paths demand a one-time signature over a message
    naming pid, so a proof lifted from someone else's pending message is
    useless to the lifter.  Raw preimage witnesses are refused outright.
    """
    if not isinstance(st, BanknoteState) or st.serial is None:
        return None
    claim = st.claim
    if isinstance(claim, NoActiveClaim):
        if isinstance(w, BanknoteLost) and d == params.d0:
            return BanknoteState(st.serial, ClaimBy(pid, t)), 0
        if (isinstance(w, RecoverCoinsSig) and d == 0
                and verify_sig(st.serial, recover_message(pid), w.signature)):
            return BanknoteState(None, None), ALL_COINS
    elif isinstance(claim, ClaimBy):
        if (isinstance(w, ChallengeClaimSig) and d == 0 and _serial_ok(w.new_serial)
                and verify_sig(st.serial, challenge_message(pid), w.signature)):
            return BanknoteState(w.new_serial, NO_CLAIM), params.d0
        if (isinstance(w, ClaimUnchallenged) and d == 0
                and _serial_ok(w.new_serial)
                and pid == claim.pid and t - claim.since > params.t_tr):
            return BanknoteState(w.new_serial, NO_CLAIM), params.d0
    return None


def phi_money_cr(params: PhiParams, pid: str, w, t: int, st: BanknoteState, d: int):
    """Commit-reveal variant.

    A lost claim is filed in two steps: commit to it (with the deposit up
    front), then open the commitment within t0 ticks.  Settling waits a
    further t1 ticks after the reveal and goes to the earliest committer
    among those who revealed; losing deposits stay in the pot.  Challenge
    and recovery are signature-gated as in phi_money_sig.
    """
    if not isinstance(st, BanknoteState) or st.serial is None:
        return None
    claim = st.claim
    if isinstance(claim, NoActiveClaim):
        if (isinstance(w, RecoverCoinsSig) and d == 0
                and verify_sig(st.serial, recover_message(pid), w.signature)):
            return BanknoteState(None, None), ALL_COINS
        if (isinstance(w, CommitLost) and d == params.d0
                and isinstance(w.commitment, bytes) and len(w.commitment) == 32):
            entry = CommitEntry(pid, w.commitment, t)
            return BanknoteState(st.serial, LostClaimCommits((entry,))), 0
    elif isinstance(claim, LostClaimCommits):
        if (isinstance(w, CommitLost) and d == params.d0
                and isinstance(w.commitment, bytes) and len(w.commitment) == 32):
            entry = CommitEntry(pid, w.commitment, t)
            return BanknoteState(st.serial,
                                 LostClaimCommits(claim.entries + (entry,))), 0
        if isinstance(w, RevealLost) and d == 0 and len(w.nonce) == NONCE_LEN:
            want = commitment_hash(pid, st.serial, w.nonce)
            for i, e in enumerate(claim.entries):
                if (e.pid == pid and e.revealed_at is None
                        and e.commitment == want and t - e.committed_at <= params.t0):
                    entries = list(claim.entries)
                    entries[i] = replace(e, revealed_at=t)
                    return BanknoteState(st.serial,
                                         LostClaimCommits(tuple(entries))), 0
            return None
        if isinstance(w, ClaimUnchallenged) and d == 0 and _serial_ok(w.new_serial):
            revealed = [e for e in claim.entries if e.revealed_at is not None]
            if not revealed:
                return None
            winner = min(revealed, key=lambda e: e.committed_at)
            if (winner.pid == pid and t - winner.revealed_at > params.t1):
                return BanknoteState(w.new_serial, NO_CLAIM), params.d0
            return None
        if (isinstance(w, ChallengeClaimSig) and d == 0 and _serial_ok(w.new_serial)
                and claim.entries
                and verify_sig(st.serial, challenge_message(pid), w.signature)):
            return BanknoteState(w.new_serial, NO_CLAIM), params.d0
    return None


register_circuit("base", phi_money)
register_circuit("sig-gated", phi_money_sig)
register_circuit("commit-reveal", phi_money_cr)

PHI_BY_VARIANT = {
    "base": phi_money,
    "sig-gated": phi_money_sig,
    "commit-reveal": phi_money_cr,
}


def evaluate(params: PhiParams, pid: str, w, t: int, st: BanknoteState, d: int):
    """Dispatch to the variant named in params."""
    return PHI_BY_VARIANT[params.variant](params, pid, w, t, st, d)


def banknote_params(pid: str, value: int, phi: PhiParams,
                    serial: bytes) -> ContractParams:
    """Contract parameters for a fresh note of the given value and serial."""
    return ContractParams(
        members=(pid,),
        deposits=((pid, value),),
        circuit=phi,
        initial_state=BanknoteState(serial, NO_CLAIM),
    )


def is_banknote_contract(params: ContractParams, network: PhiParams) -> bool:
    """Shape check a payee runs before accepting a note.

    One member, that member's deposit is the face value, the circuit equals
    the network-wide constants, and the initial state is an unclaimed
    serial of whole segments.
    """
    if not isinstance(params, ContractParams) or len(params.members) != 1:
        return False
    member = params.members[0]
    if len(params.deposits) != 1 or params.deposits[0][0] != member:
        return False
    if params.deposits[0][1] < 0 or params.circuit != network:
        return False
    st = params.initial_state
    return (isinstance(st, BanknoteState) and _serial_ok(st.serial)
            and st.claim == NO_CLAIM)
