"""Attention challenges: make a validator prove it computed f(x).

The asserter picks a secret r and publishes (x, g^r) together with a
commitment to f(x). A validator holding key k responds iff
H(g^rk, f(x)) < T. Only the asserter (knowing r) and the validator
(knowing k) can compute g^rk, and the hash needs f(x), so a validator that
skipped the computation can only guess. Contract logic for accusations and
settlement runs in-process.

Hash layout (SHA-256), bit-exact::

    VERSION (1 byte) || KIND (1 byte) || for each field: len (4 bytes BE) || bytes

Group elements are encoded big-endian, zero-padded to the byte length of p.
KIND is 0x01 for the commitment H(x, g^r, f(x)) and 0x02 for the response
hash H(g^rk, f(x)).
"""

from __future__ import annotations

import hashlib
import json
import random
import secrets
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

VERSION = 1
KIND_COMMIT = 1
KIND_RESPONSE = 2
HASH_BITS = 256
HASH_MAX = (1 << HASH_BITS) - 1


class MalformedAccusation(ValueError):
    pass


class CommitmentMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GroupParams:
    """Subgroup of prime order q in Z_p^*, p = 2q + 1 a safe prime."""

    p: int
    q: int
    g: int
    name: str = ""

    def __post_init__(self):
        if self.p != 2 * self.q + 1:
            raise ValueError("p must equal 2q + 1")
        if not 1 < self.g < self.p - 1 or pow(self.g, self.q, self.p) != 1:
            raise ValueError("g must generate the order-q subgroup")

    @property
    def element_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def encode(self, element: int) -> bytes:
        return element.to_bytes(self.element_bytes, "big")

    def exp(self, base: int, e: int) -> int:
        return pow(base, e, self.p)


# 61-bit safe prime; g = 4 is a quadratic residue, hence of order q
TEST_GROUP = GroupParams(
    p=1729382256910270979,
    q=864691128455135489,
    g=4,
    name="test-61",
)

_MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)
# 2048-bit MODP group (RFC 3526, group 14); 2 has order q there
DEFAULT_GROUP = GroupParams(p=_MODP_2048, q=(_MODP_2048 - 1) // 2, g=2, name="modp-2048")


def _hash(kind: int, *fields: bytes) -> bytes:
    h = hashlib.sha256()
    h.update(bytes([VERSION, kind]))
    for f in fields:
        h.update(len(f).to_bytes(4, "big"))
        h.update(f)
    return h.digest()


@dataclass(frozen=True)
class ValidatorKey:
    k: int
    pub: int


@dataclass(frozen=True)
class Challenge:
    x: bytes
    gr: int
    commitment: bytes
    T: int

    def to_dict(self, group: GroupParams) -> dict:
        return {
            "version": VERSION,
            "x": self.x.hex(),
            "gr": group.encode(self.gr).hex(),
            "commitment": self.commitment.hex(),
            "T": format(self.T, "x"),
        }

    def to_json(self, group: GroupParams) -> str:
        return json.dumps(self.to_dict(group), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Challenge":
        if d.get("version") != VERSION:
            raise ValueError(f"unsupported challenge version {d.get('version')!r}")
        return cls(
            x=bytes.fromhex(d["x"]),
            gr=int(d["gr"], 16),
            commitment=bytes.fromhex(d["commitment"]),
            T=int(d["T"], 16),
        )

    @classmethod
    def from_json(cls, text: str) -> "Challenge":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ResponseRecord:
    validator: int
    responded: bool
    window: int = 0


@dataclass(frozen=True)
class Verdict:
    accused: int
    valid_accusation: bool
    seized: float
    to_asserter: float
    burned: float
    reason: str = ""


def _scalar(group, rng):
    return rng.randrange(1, group.q)


def keygen(group: GroupParams, seed: Optional[int] = None) -> ValidatorKey:
    """Fresh key; deterministic when ``seed`` is given (test mode only)."""
    if seed is None:
        k = secrets.randbelow(group.q - 1) + 1
    else:
        k = _scalar(group, random.Random(seed))
    return ValidatorKey(k, group.exp(group.g, k))


def commitment(group: GroupParams, x: bytes, gr: int, fx: bytes) -> bytes:
    return _hash(KIND_COMMIT, x, group.encode(gr), fx)


def make_challenge(group: GroupParams, x: bytes, fx: bytes, r: int, T: int) -> Challenge:
    if not 1 <= r < group.q:
        raise ValueError("r must lie in [1, q)")
    if not 0 <= T <= HASH_MAX + 1:
        raise ValueError("T outside the hash range")
    gr = group.exp(group.g, r)
    return Challenge(x=x, gr=gr, commitment=commitment(group, x, gr, fx), T=T)


def response_hash(group: GroupParams, shared: int, fx: bytes) -> int:
    return int.from_bytes(_hash(KIND_RESPONSE, group.encode(shared), fx), "big")


def should_respond(group: GroupParams, key: ValidatorKey, challenge: Challenge, fx_local: bytes) -> bool:
    """Validator side: respond iff H((g^r)^k, f(x)) < T."""
    shared = group.exp(challenge.gr, key.k)
    return response_hash(group, shared, fx_local) < challenge.T


def expected_response(group: GroupParams, r: int, validator_pub: int, fx: bytes, T: int) -> bool:
    """Asserter side: the same bit, computed as H((g^k)^r, f(x)) < T."""
    shared = group.exp(validator_pub, r)
    return response_hash(group, shared, fx) < T


def split_seized(seized, integer_mode: bool = False):
    """Half to the asserter, rest burned; odd integer amounts round down for the asserter."""
    if integer_mode:
        seized = int(seized)
        half = seized // 2
        return half, seized - half
    half = seized / 2
    return half, seized - half


def adjudicate(
    group: GroupParams,
    challenge: Challenge,
    revealed_r: int,
    record: ResponseRecord,
    validator_pub: int,
    confirmed_fx: bytes,
    asserter_claim_confirmed: bool,
    stake,
    integer_mode: bool = False,
) -> Verdict:
    """Contract check of an accusation against one validator.

    Accusations on a rejected claim are ignored outright. Otherwise the
    revealed r must open g^r and the commitment must open to the confirmed
    f(x); the validator is slashed when its response differs from the bit
    the asserter can recompute.
    """
    vid = record.validator
    if not asserter_claim_confirmed:
        return Verdict(vid, False, 0, 0, 0, "claim rejected; accusation ignored")
    if not 1 <= revealed_r < group.q or group.exp(group.g, revealed_r) != challenge.gr:
        raise MalformedAccusation("revealed r does not match g^r in the challenge")
    if commitment(group, challenge.x, challenge.gr, confirmed_fx) != challenge.commitment:
        raise CommitmentMismatch("confirmed f(x) does not open the challenge commitment")
    expected = expected_response(group, revealed_r, validator_pub, confirmed_fx, challenge.T)
    if record.responded == expected:
        return Verdict(vid, False, 0, 0, 0, "response correct")
    to_asserter, burned = split_seized(stake, integer_mode)
    seized = int(stake) if integer_mode else stake
    return Verdict(vid, True, seized, to_asserter, burned,
                   "expected a response" if expected else "responded without cause")


HONEST = "honest"
LAZY = "lazy"  # never computes f(x), never responds
GUESS = "guess"  # responds using a wrong f(x)


@dataclass(frozen=True)
class ValidatorSpec:
    id: int
    key: ValidatorKey
    behaviour: str = HONEST
    stake: float = 1.0


def run_protocol_round(
    group: GroupParams,
    x: bytes,
    fx: bytes,
    validators: Sequence[ValidatorSpec],
    T: int,
    window: int = 0,
    seed: Optional[int] = None,
    claim_confirmed: bool = True,
    integer_mode: bool = False,
) -> dict:
    """One challenge round: challenge, responses, reveal, verdicts.

    Messages are listed in order with validators by ascending id. The
    asserter accuses every validator whose response it finds wrong; honest
    validators are never accused.
    """
    ids = [v.id for v in validators]
    if len(set(ids)) != len(ids):
        raise ValueError("validator ids must be distinct")
    rng = random.Random(seed) if seed is not None else random.SystemRandom()
    r = _scalar(group, rng)
    ch = make_challenge(group, x, fx, r, T)
    messages = [{"type": "challenge", **ch.to_dict(group)}]

    ordered = sorted(validators, key=lambda v: v.id)
    records = {}
    for v in ordered:
        if v.behaviour == HONEST:
            responded = should_respond(group, v.key, ch, fx)
        elif v.behaviour == LAZY:
            responded = False
        elif v.behaviour == GUESS:
            responded = should_respond(group, v.key, ch, fx + b"\x00wrong")
        else:
            raise ValueError(f"unknown behaviour {v.behaviour!r}")
        records[v.id] = ResponseRecord(v.id, responded, window)
        if responded:
            messages.append({"type": "response", "validator": v.id, "window": window})

    messages.append({"type": "reveal", "fx": fx.hex(), "r": format(r, "x"),
                     "claim_confirmed": claim_confirmed})
    verdicts = []
    for v in ordered:
        expected = expected_response(group, r, v.key.pub, fx, T)
        if records[v.id].responded == expected:
            continue
        verdict = adjudicate(group, ch, r, records[v.id], v.key.pub, fx,
                             claim_confirmed, v.stake, integer_mode)
        verdicts.append(verdict)
        messages.append({"type": "verdict", **asdict(verdict)})
    return {"challenge": ch, "records": records, "verdicts": verdicts, "messages": messages}
