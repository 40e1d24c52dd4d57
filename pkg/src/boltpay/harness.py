"""Adversarial test harness: scenarios, schedulers, and value accounting.

The harness drives a whole deployment (environment, ledger, wallets) from
a deterministic script, tracking how much value the adversary has taken in
versus how much it holds on the ledger or has spent back to honest
parties.  The headline soundness statement is that the running maximum of
(current_or_spent - received) never goes positive, no matter what the
scripted adversary does, as long as bolts cannot be cloned.

Two message schedulers are provided.  The fifo scheduler delivers every
ledger message the moment it is sent.  The reorder scheduler models a
front-running adversary: honest state-changing messages sit visible in a
mempool for delta ticks before landing, and a strategy object may inspect
each pending message and inject its own (instantly delivered) messages
first.

Accounting rules (applied at message delivery):
* corrupt a party: received += its coins + its banknote value, and its
  coins start counting toward current_or_spent while it stays corrupt;
* uncorrupt: received -= its coins now; held banknotes stay with the
  adversary, the wallet's banknote value resets to zero;
* honest party sends coins or a note to a corrupt one: received += value,
  for notes even when the corrupt payee refuses it;
* corrupt party pays coins or successfully spends a note to an honest
  one: current_or_spent += value;
* coins a contract pays to a corrupt party count via its ledger balance.

current_or_spent is therefore (live coins of corrupted parties) plus the
cumulative value spent to honest parties; banknotes held by the adversary
count only once spent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .contract import (
    BanknoteLost,
    ChallengeClaim,
    ChallengeClaimSig,
    ClaimUnchallenged,
    CommitLost,
    PhiParams,
    RecoverCoins,
    RecoverCoinsSig,
    RevealLost,
)
from .errors import BoltPayError, MintFailed, ParseError, ScriptError
from .ledger import ContractParams, Ledger
from .lightning import ql_setup
from .wallet import HELD, Banknote, Wallet

ADVERSARY = "@adversary"


@dataclass
class SimConfig:
    """Everything that makes a run reproducible."""

    seed: int = 0
    variant: str = "base"
    d0: int = 10
    t_tr: int = 100
    t0: int = 10
    t1: int = 10
    n: int = 8
    scheduler: str = "fifo"
    sound: bool = True
    minimal: bool = False
    scan_interval: int | None = None  # defaults to t_tr - 1; lower only

    def seed_bytes(self) -> bytes:
        return (self.seed % (1 << 256)).to_bytes(32, "big")

    def delta(self) -> int:
        if self.scheduler == "fifo":
            return 0
        kind, sep, arg = self.scheduler.partition(":")
        if kind == "reorder" and sep and arg.isdigit():
            return int(arg)
        raise ParseError(f"unknown scheduler {self.scheduler!r}")

    def header_lines(self) -> list[str]:
        return [
            "# boltpay trace v1",
            ("# seed=%d variant=%s d0=%d t_tr=%d t0=%d t1=%d n=%d"
             " scheduler=%s sound=%s minimal=%s"
             % (self.seed, self.variant, self.d0, self.t_tr, self.t0,
                self.t1, self.n, self.scheduler, self.sound, self.minimal)),
        ]


@dataclass
class ValueLedger:
    """The adversary's balance sheet, per the rules in the module docstring."""

    received: int = 0
    spent_to_honest: int = 0
    current_or_spent: int = 0
    max_net: int = 0

    def update(self, live_corrupt_coins: int) -> int:
        self.current_or_spent = live_corrupt_coins + self.spent_to_honest
        net = self.current_or_spent - self.received
        if net > self.max_net:
            self.max_net = net
        return net


@dataclass(frozen=True)
class PendingMessage:
    """What the mempool shows the adversary about a held honest message."""

    sender: str
    kind: str
    ssid: int | None
    witness: object
    deposit: int
    payee: str | None = None
    amount: int = 0


class FifoChain:
    """Deliver at once, in submission order."""

    def __init__(self, sim: "Simulation"):
        self.sim = sim

    def submit_trigger(self, sender, ssid, witness, deposit, on_result=None):
        return self.sim._deliver_trigger(sender, ssid, witness, deposit, on_result)

    def submit_transaction(self, sender, payee, amount):
        return self.sim._deliver_transaction(sender, payee, amount)

    def deliver_due(self):
        pass

    def pending(self) -> list[PendingMessage]:
        return []


class ReorderChain:
    """Mempool with an adversary window.

    Honest submissions wait delta ticks, visible to the strategy; corrupt
    submissions deliver immediately, which is exactly the reordering power
    a front-runner has.
    """

    def __init__(self, sim: "Simulation", delta: int):
        self.sim = sim
        self.delta = delta
        self._held: list = []
        self._seq = 0

    def _hold(self, sender, deliver, pending: PendingMessage):
        sim = self.sim
        if sender in sim.corrupted or self.delta == 0:
            return deliver()
        self._seq += 1
        due = sim.ledger.time + self.delta
        self._held.append((due, self._seq, deliver, pending))
        sim.log("@chain", "held", sender, pending.kind,
                pending.ssid if pending.ssid is not None else "-", due)
        if sim.adversary is not None:
            sim.adversary.on_pending(sim, pending)
        return HELD

    def submit_trigger(self, sender, ssid, witness, deposit, on_result=None):
        deliver = lambda: self.sim._deliver_trigger(
            sender, ssid, witness, deposit, on_result)
        return self._hold(sender, deliver,
                          PendingMessage(sender, "trigger", ssid, witness, deposit))

    def submit_transaction(self, sender, payee, amount):
        deliver = lambda: self.sim._deliver_transaction(sender, payee, amount)
        return self._hold(sender, deliver,
                          PendingMessage(sender, "transaction", None, None, 0,
                                         payee=payee, amount=amount))

    def deliver_due(self):
        now = self.sim.ledger.time
        due_now = sorted((e for e in self._held if e[0] <= now),
                         key=lambda e: (e[0], e[1]))
        self._held = [e for e in self._held if e[0] > now]
        for _, _, deliver, _ in due_now:
            deliver()

    def pending(self) -> list[PendingMessage]:
        return [e[3] for e in sorted(self._held, key=lambda e: (e[0], e[1]))]


def fingerprint(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


class Simulation:
    """A full deployment under one configuration, driven step by step."""

    def __init__(self, config: SimConfig):
        self.config = config
        delta = config.delta()  # validates the scheduler string early
        self.env = ql_setup(128, config.seed_bytes(), sound_mode=config.sound)
        self.ledger = Ledger()
        self.phi = PhiParams(config.variant, config.d0, config.t_tr,
                             config.t0, config.t1)
        self.wallets: dict[str, Wallet] = {}
        self.corrupted: set[str] = set()
        self.pool: list[Banknote] = []
        self.value = ValueLedger()
        self.adversary = None
        self.trace: list[str] = list(config.header_lines())
        if config.scheduler == "fifo":
            self.chain = FifoChain(self)
        else:
            self.chain = ReorderChain(self, delta)
        interval = config.scan_interval
        if interval is None:
            interval = config.t_tr - 1
        if interval > config.t_tr - 1:
            raise ParseError("scan_interval must not exceed t_tr - 1")
        self.scan_interval = max(1, interval)
        self._expected_coins = 0

    # -- logging and accounting ------------------------------------------

    def log(self, actor: str, action: str, *fields) -> None:
        parts = [str(self.ledger.time), actor, action]
        parts.extend(str(f) for f in fields)
        self.trace.append("\t".join(parts))

    def live_corrupt_coins(self) -> int:
        return sum(self.ledger.parties[p].coins for p in self.corrupted
                   if p in self.ledger.parties)

    def account(self) -> None:
        net = self.value.update(self.live_corrupt_coins())
        self.log("@value", "counters", self.value.received,
                 self.value.current_or_spent, net, self.value.max_net)

    # -- message delivery (called by the chain) ----------------------------

    def _deliver_trigger(self, sender, ssid, witness, deposit, on_result=None):
        paid = self.ledger.trigger(sender, ssid, witness, deposit)
        self.log(sender, "trigger", ssid, type(witness).__name__, deposit,
                 "rejected" if paid is None else paid)
        if on_result is not None:
            on_result(paid)
        self.account()
        return paid

    def _deliver_transaction(self, sender, payee, amount):
        tr_id = self.ledger.add_transaction(sender, payee, amount)
        if tr_id is not None:
            if sender not in self.corrupted and payee in self.corrupted:
                self.value.received += amount
            if sender in self.corrupted and payee not in self.corrupted:
                self.value.spent_to_honest += amount
        self.log(sender, "transaction", payee, amount,
                 "rejected" if tr_id is None else tr_id)
        self.account()
        return tr_id

    # -- parties ----------------------------------------------------------

    def add_party(self, pid: str) -> Wallet:
        fresh = self.ledger.add_party(pid)
        if fresh:
            self._expected_coins += self.ledger.parties[pid].coins
            self.wallets[pid] = Wallet(
                pid, self.env, self.ledger, self.phi, n=self.config.n,
                minimal=self.config.minimal, chain=self.chain)
            self.wallets[pid].last_scan = self.ledger.time
        self.log(pid, "add-party",
                 self.ledger.parties[pid].coins if fresh else "ignored")
        return self.wallets[pid]

    def wallet(self, pid: str) -> Wallet:
        if pid not in self.wallets:
            raise ParseError(f"unknown party {pid!r}")
        return self.wallets[pid]

    def corrupt(self, pid: str) -> None:
        self.wallet(pid)
        if pid in self.corrupted:
            self.log(pid, "corrupt", "already")
            return
        coins = self.ledger.parties[pid].coins
        notes_value = self.wallets[pid].banknote_value
        self.value.received += coins + notes_value
        self.corrupted.add(pid)
        self.log(pid, "corrupt", coins, notes_value)
        self.account()

    def uncorrupt(self, pid: str) -> None:
        self.wallet(pid)
        if pid not in self.corrupted:
            self.log(pid, "uncorrupt", "already")
            return
        coins = self.ledger.parties[pid].coins
        self.value.received -= coins
        w = self.wallets[pid]
        for ssid in sorted(w.notes):
            for note in w.notes[ssid]:
                for b in note.bolts:
                    if self.env.owner_of(b) == pid:
                        self.env.transfer_bolt(b, pid, ADVERSARY)
                self.pool.append(note)
        w.notes.clear()
        w.banknote_value = 0
        self.corrupted.discard(pid)
        self.log(pid, "uncorrupt", coins)
        self.account()

    # -- protocol actions ---------------------------------------------------

    def mint(self, pid: str, value: int) -> int | None:
        w = self.wallet(pid)
        try:
            note = w.mint(value)
        except MintFailed:
            self.log(pid, "mint", "rejected", value)
            self.account()
            return None
        self.log(pid, "mint", note.ssid, value, fingerprint(note.serial))
        self.account()
        return note.ssid

    def pay(self, payer: str, payee: str, ssid: int,
            payee_rejects: bool = False) -> bool:
        pw, ew = self.wallet(payer), self.wallet(payee)
        held = pw.notes.get(ssid)
        if not held:
            self.log(payer, "pay", payee, ssid, 0, "no-note")
            return False
        value = held[0].value
        if payer not in self.corrupted and payee in self.corrupted:
            # the note was put in the adversary's hands; that counts
            # whether or not the corrupt payee deigns to accept it
            self.value.received += value
        accept = pw.pay(ew, ssid, payee_rejects=payee_rejects)
        if accept and payer in self.corrupted and payee not in self.corrupted:
            self.value.spent_to_honest += value
        self.log(payer, "pay", payee, ssid, value,
                 "accept" if accept else "reject")
        self.account()
        return accept

    def transaction(self, payer: str, payee: str, amount: int):
        self.wallet(payer)
        return self.chain.submit_transaction(payer, payee, amount)

    def redeem(self, pid: str, ssid: int):
        r = self.wallet(pid).redeem(ssid)
        self.log(pid, "redeem", ssid, _fmt_result(r))
        return r

    def file_claim(self, pid: str, ssid: int):
        r = self.wallet(pid).file_lost_claim(ssid)
        self.log(pid, "file-claim", ssid, _fmt_result(r))
        return r

    def settle(self, pid: str, ssid: int):
        r = self.wallet(pid).settle_unchallenged(ssid)
        self.log(pid, "settle", ssid, _fmt_result(r))
        return r

    def commit_claim(self, pid: str, ssid: int):
        r = self.wallet(pid).commit_lost_claim(ssid)
        self.log(pid, "commit-claim", ssid, _fmt_result(r))
        return r

    def reveal_claim(self, pid: str, ssid: int):
        r = self.wallet(pid).reveal_lost_claim(ssid)
        self.log(pid, "reveal-claim", ssid, _fmt_result(r))
        return r

    def watchdog(self, pid: str) -> list:
        actions = self.wallet(pid).watchdog_scan()
        self.log(pid, "watchdog", len(actions),
                 *(f"{ssid}:{what}" for ssid, what in actions))
        return actions

    def clone(self, pid: str, ssid: int) -> bool:
        w = self.wallet(pid)
        held = w.notes.get(ssid)
        if not held:
            self.log(pid, "clone", ssid, "no-note")
            return False
        note = held[0]
        copies = [self.env.clone_attempt(b) for b in note.bolts]
        if any(c is None for c in copies):
            self.log(pid, "clone", ssid, "refused")
            return False
        w._add_note(Banknote(ssid, note.serial, tuple(copies), note.value))
        self.log(pid, "clone", ssid, "ok")
        return True

    def move_note(self, ssid: int, pid: str) -> bool:
        """Hand a pooled (adversary-held) note to a corrupted party's wallet."""
        w = self.wallet(pid)
        for i, note in enumerate(self.pool):
            if note.ssid == ssid:
                del self.pool[i]
                for b in note.bolts:
                    self.env.transfer_bolt(b, ADVERSARY, pid)
                w._add_note(note)
                self.log(pid, "move-note", ssid, note.value)
                return True
        self.log(pid, "move-note", ssid, "no-note")
        return False

    def lose(self, pid: str, ssid: int):
        note = self.wallet(pid).lose_note(ssid)
        self.log(pid, "lose", ssid, note.value if note else "no-note")
        return note

    # -- time ---------------------------------------------------------------

    def tick(self, k: int = 1) -> int:
        for _ in range(k):
            self.ledger.tick()
            self.chain.deliver_due()
            for pid in sorted(self.wallets):
                if pid in self.corrupted:
                    continue
                w = self.wallets[pid]
                if w.notes and self.ledger.time - w.last_scan >= self.scan_interval:
                    self.watchdog(pid)
        return self.ledger.time

    # -- direct ledger lines (scenario support) -------------------------------

    def raw_retrieve_party(self, sender: str, pid: str):
        coins = self.ledger.retrieve_party(pid)
        self.log(sender, "retrieve-party", pid, "none" if coins is None else coins)
        return coins

    def raw_retrieve_transaction(self, sender: str, tr_id: int):
        rec = self.ledger.retrieve_transaction(tr_id)
        self.log(sender, "retrieve-transaction", tr_id,
                 "none" if rec is None else f"{rec.payer}>{rec.payee}:{rec.amount}")
        return rec

    def raw_retrieve_contract(self, sender: str, ssid: int):
        z = self.ledger.retrieve_contract(ssid)
        if z is None:
            self.log(sender, "retrieve-contract", ssid, "none")
        else:
            _, state, coins = z
            self.log(sender, "retrieve-contract", ssid, coins,
                     type(state.claim).__name__ if state.claim is not None else "terminated")
        return z

    def raw_add_contract(self, sender: str, params: ContractParams):
        ssid = self.ledger.add_smart_contract(sender, params)
        self.log(sender, "add-contract", "ignored" if ssid is None else ssid)
        return ssid

    def raw_initialize(self, sender: str, ssid: int):
        rec = self.ledger._contract(ssid)
        params = rec.params if rec is not None else None
        r = (None if params is None
             else self.ledger.initialize_with_coins(sender, ssid, params))
        self.log(sender, "init-contract", ssid, "rejected" if r is None else r)
        self.account()
        return r

    # -- audits ---------------------------------------------------------------

    def audit(self) -> list[str]:
        """Invariants that must hold in any sound-mode run."""
        problems = list(self.env.audit_violations())
        if self.ledger.total_coins() != self._expected_coins:
            problems.append(
                f"conservation broken: {self.ledger.total_coins()} coins "
                f"on ledger, {self._expected_coins} registered")
        return problems

    def honest_bookkeeping_violations(self) -> list[str]:
        """Wallet face-value totals vs actual backing, honest wallets only."""
        out = []
        for pid in sorted(self.wallets):
            if pid in self.corrupted:
                continue
            w = self.wallets[pid]
            backing = 0
            for ssid, held in w.notes.items():
                if ssid in w.pending_challenges:
                    backing += sum(n.value for n in held)
                    continue
                rec = self.ledger._contract(ssid)
                backing += rec.coins if rec is not None else 0
            if backing != w.banknote_value:
                out.append(f"{pid}: banknote_value {w.banknote_value}, "
                           f"backing {backing}")
        return out


def _fmt_result(r) -> str:
    if r is None:
        return "rejected"
    if r is HELD:
        return "held"
    return str(r)


# -- witness codec (wire format) ---------------------------------------------

_WITNESS_FIELDS = {
    "BanknoteLost": (BanknoteLost, 0),
    "ChallengeClaim": (ChallengeClaim, 2),
    "ClaimUnchallenged": (ClaimUnchallenged, 1),
    "RecoverCoins": (RecoverCoins, 1),
    "ChallengeClaimSig": (ChallengeClaimSig, 2),
    "RecoverCoinsSig": (RecoverCoinsSig, 1),
    "CommitLost": (CommitLost, 1),
    "RevealLost": (RevealLost, 1),
}


def witness_to_fields(w) -> list[str]:
    name = type(w).__name__
    if name not in _WITNESS_FIELDS:
        raise ParseError(f"unknown witness {name}")
    cls, arity = _WITNESS_FIELDS[name]
    fields = [name]
    for f in cls.__dataclass_fields__:
        fields.append(getattr(w, f).hex())
    return fields


def witness_from_fields(name: str, fields: list[str]):
    if name not in _WITNESS_FIELDS:
        raise ParseError(f"unknown witness {name!r}")
    cls, arity = _WITNESS_FIELDS[name]
    if len(fields) != arity:
        raise ParseError(f"{name} takes {arity} fields, got {len(fields)}")
    try:
        return cls(*(bytes.fromhex(f) for f in fields))
    except ValueError as e:
        raise ParseError(f"bad hex in {name}: {e}") from None


# -- scenario scripts ----------------------------------------------------------

def parse_scenario(text: str) -> list[tuple[int, list[str]]]:
    """Split a scenario file into (line_no, tokens); grammar errors surface
    later, at execution, with the line number attached."""
    steps = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        steps.append((line_no, line.split()))
    return steps


def run_scenario(config: SimConfig, text: str) -> Simulation:
    """Execute a scenario script; raises ScriptError with the line number."""
    sim = Simulation(config)
    for line_no, tokens in parse_scenario(text):
        try:
            _step(sim, tokens)
        except ScriptError:
            raise
        except (BoltPayError, ValueError, KeyError, IndexError) as e:
            raise ScriptError(line_no, f"{tokens[0]}: {e}") from e
    return sim


def _int(tok: str) -> int:
    if not tok.lstrip("-").isdigit():
        raise ParseError(f"expected integer, got {tok!r}")
    return int(tok)


def _step(sim: Simulation, tokens: list[str]) -> None:
    op, args = tokens[0], tokens[1:]
    if op == "AddParty":
        (pid,) = args
        sim.add_party(pid)
    elif op == "RetrieveParty":
        sender, pid = args
        sim.raw_retrieve_party(sender, pid)
    elif op == "AddTransaction":
        sender, payee, d = args
        sim.transaction(sender, payee, _int(d))
    elif op == "RetrieveTransaction":
        sender, tr_id = args
        sim.raw_retrieve_transaction(sender, _int(tr_id))
    elif op == "AddSmartContract":
        sim.raw_add_contract(args[0], _parse_contract_params(sim, args[1:]))
    elif op == "InitializeWithCoins":
        sender, ssid = args
        sim.raw_initialize(sender, _int(ssid))
    elif op == "Trigger":
        sender, ssid, d, wname = args[:4]
        witness = witness_from_fields(wname, args[4:])
        sim.chain.submit_trigger(sender, _int(ssid), witness, _int(d))
    elif op == "RetrieveContract":
        sender, ssid = args
        sim.raw_retrieve_contract(sender, _int(ssid))
    elif op == "Tick":
        sim.tick(1)
    elif op == "TICK":
        (k,) = args
        sim.tick(_int(k))
    elif op == "CORRUPT":
        (pid,) = args
        sim.corrupt(pid)
    elif op == "UNCORRUPT":
        (pid,) = args
        sim.uncorrupt(pid)
    elif op == "MINT":
        pid, value = args
        sim.mint(pid, _int(value))
    elif op == "PAY":
        payer, payee, ssid = args[:3]
        rejects = len(args) > 3 and args[3] == "reject"
        sim.pay(payer, payee, _int(ssid), payee_rejects=rejects)
    elif op == "REDEEM":
        pid, ssid = args
        sim.redeem(pid, _int(ssid))
    elif op == "FILECLAIM":
        pid, ssid = args
        sim.file_claim(pid, _int(ssid))
    elif op == "SETTLE":
        pid, ssid = args
        sim.settle(pid, _int(ssid))
    elif op == "COMMITCLAIM":
        pid, ssid = args
        sim.commit_claim(pid, _int(ssid))
    elif op == "REVEALCLAIM":
        pid, ssid = args
        sim.reveal_claim(pid, _int(ssid))
    elif op == "WATCHDOG":
        if args:
            sim.watchdog(args[0])
        else:
            for pid in sorted(sim.wallets):
                if pid not in sim.corrupted:
                    sim.watchdog(pid)
    elif op == "CLONE":
        pid, ssid = args
        sim.clone(pid, _int(ssid))
    elif op == "MOVENOTE":
        ssid, pid = args
        sim.move_note(_int(ssid), pid)
    elif op == "LOSE":
        pid, ssid = args
        sim.lose(pid, _int(ssid))
    else:
        raise ParseError(f"unknown directive {op!r}")


def _parse_contract_params(sim: Simulation, args: list[str]) -> ContractParams:
    """members 'a,b' deposits 'a=3,b=4' variant st0hex -> ContractParams."""
    members_tok, deposits_tok, variant, st0hex = args
    members = tuple(members_tok.split(","))
    deposits = []
    for part in deposits_tok.split(","):
        pid, sep, d = part.partition("=")
        if not sep:
            raise ParseError(f"bad deposit {part!r}")
        deposits.append((pid, _int(d)))
    phi = PhiParams(variant, sim.phi.d0, sim.phi.t_tr, sim.phi.t0, sim.phi.t1)
    from .contract import NO_CLAIM, BanknoteState
    st0 = BanknoteState(bytes.fromhex(st0hex), NO_CLAIM)
    return ContractParams(members, tuple(deposits), phi, st0)
