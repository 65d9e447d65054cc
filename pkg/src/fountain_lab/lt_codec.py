"""LT encoder and iterative peeling decoder over packet symbols.

Encoding: each output symbol independently samples a degree d from the
configured distribution, picks a uniform d-subset of the k inputs, and XORs
their payloads. Decoding: repeatedly take a symbol whose residual degree is
one, recover its remaining input, and cancel that input out of every other
symbol containing it; stop when no degree-one symbols remain.

Randomness is a SplitMix64 stream per output symbol: symbol i draws from
SplitMix64 seeded with mix64(seed + (i+1) * 0x9E3779B97F4A7C15). The stream
split makes encoding reproducible for a given seed and embarrassingly
parallel across symbols. Degrees come from inverse-CDF sampling; subsets from
a partial Fisher-Yates shuffle with rejection-sampled (exactly uniform)
index draws.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .degree_dist import DegreeDistribution

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer; a cheap, well-mixed 64-bit hash."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


class SplitMix64:
    """Minimal 64-bit PRNG: state walks by the golden gamma, output is mix64."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection; exactly uniform."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = ((1 << 64) // n) * n
        while True:
            u = self.next_u64()
            if u < threshold:
                return u % n


def symbol_stream_seed(seed: int, index: int) -> int:
    """Seed of the per-symbol RNG stream; the documented split convention."""
    return mix64((seed + (index + 1) * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class CodedSymbol:
    """One output symbol: sorted input indices plus the XOR of their payloads."""

    neighbors: tuple[int, ...]
    payload: bytes

    def __post_init__(self) -> None:
        if not self.neighbors:
            raise ValueError("a coded symbol needs at least one neighbor")
        if any(b <= a for a, b in zip(self.neighbors, self.neighbors[1:])):
            raise ValueError("neighbors must be sorted and distinct")
        if self.neighbors[0] < 0:
            raise ValueError("neighbor indices must be nonnegative")

    @property
    def degree(self) -> int:
        return len(self.neighbors)


def xor_payload(inputs: Sequence[bytes], neighbors: Iterable[int]) -> bytes:
    """XOR of the selected input packets, lane-wise over the byte vectors."""
    acc = 0
    size = None
    for idx in neighbors:
        data = inputs[idx]
        if size is None:
            size = len(data)
        elif len(data) != size:
            raise ValueError("all input packets must have the same length")
        acc ^= int.from_bytes(data, "big")
    if size is None:
        raise ValueError("empty neighbor set")
    return acc.to_bytes(size, "big")


def _degree_cdf(dist: DegreeDistribution) -> tuple[list[float], list[int]]:
    cdf: list[float] = []
    acc = 0.0
    for _, m in dist.entries:
        acc += m
        cdf.append(acc)
    cdf[-1] = 1.0
    return cdf, [d for d, _ in dist.entries]


def encode(
    inputs: Sequence[bytes],
    dist: DegreeDistribution,
    n: int,
    rng_seed: int,
) -> list[CodedSymbol]:
    """Generate n coded symbols from k input packets; deterministic in rng_seed."""
    k = len(inputs)
    if k < 1:
        raise ValueError("need at least one input packet")
    if n < 0:
        raise ValueError("n must be >= 0")
    if dist.max_degree > k:
        raise ValueError(
            f"distribution support (max degree {dist.max_degree}) exceeds k={k}"
        )
    size = len(inputs[0])
    values = []
    for data in inputs:
        if len(data) != size:
            raise ValueError("all input packets must have the same length")
        values.append(int.from_bytes(data, "big"))

    from bisect import bisect_left

    cdf, degrees = _degree_cdf(dist)
    symbols: list[CodedSymbol] = []
    for i in range(n):
        rng = SplitMix64(symbol_stream_seed(rng_seed, i))
        d = degrees[bisect_left(cdf, rng.random())]
        # partial Fisher-Yates over an implicit identity array
        overlay: dict[int, int] = {}
        chosen: list[int] = []
        acc = 0
        for j in range(d):
            pick = j + rng.randbelow(k - j)
            val = overlay.get(pick, pick)
            overlay[pick] = overlay.get(j, j)
            chosen.append(val)
            acc ^= values[val]
        chosen.sort()
        symbols.append(CodedSymbol(tuple(chosen), acc.to_bytes(size, "big")))
    return symbols


class DecoderState:
    """Mutable peeling state over a batch of received symbols.

    Residual neighbor sets are kept XOR-compressed: per symbol only the
    residual degree and the XOR of residual neighbor indices are stored, which
    makes every edge removal O(1) while still exposing the lone neighbor of
    any degree-one symbol. Residual payloads always equal the XOR of the
    residual neighbors' true values with the original payload.
    """

    def __init__(self, symbols: Sequence[CodedSymbol], k: int) -> None:
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.symbols = list(symbols)
        size = None
        for sym in self.symbols:
            if sym.neighbors[-1] >= k:
                raise ValueError(f"symbol references input {sym.neighbors[-1]} >= k={k}")
            if size is None:
                size = len(sym.payload)
            elif len(sym.payload) != size:
                raise ValueError("all payloads must have the same length")
        self.payload_size = size if size is not None else 0

        self.recovered: list[int | None] = [None] * k
        self.decoded_count = 0
        self.edge_removals = 0

        self.residual_degree = [sym.degree for sym in self.symbols]
        self.neighbor_xor = [0] * len(self.symbols)
        self.residual_payload = [0] * len(self.symbols)
        self.edges: list[list[int]] = [[] for _ in range(k)]
        for s, sym in enumerate(self.symbols):
            self.residual_payload[s] = int.from_bytes(sym.payload, "big")
            acc = 0
            for v in sym.neighbors:
                acc ^= v
                self.edges[v].append(s)
            self.neighbor_xor[s] = acc
        self.ripple = [s for s, d in enumerate(self.residual_degree) if d == 1]

    def run(self, ripple_order: str = "lifo") -> None:
        """Peel to fixpoint. The decoded set does not depend on the order."""
        if ripple_order not in ("lifo", "fifo"):
            raise ValueError(f"unknown ripple order {ripple_order!r}")
        ripple = self.ripple
        take_last = ripple_order == "lifo"
        degree = self.residual_degree
        nxor = self.neighbor_xor
        payload = self.residual_payload
        recovered = self.recovered
        head = 0
        while head < len(ripple):
            if take_last:
                s = ripple.pop()
            else:
                s = ripple[head]
                head += 1
            if degree[s] != 1:
                continue
            v = nxor[s]
            value = payload[s]
            recovered[v] = value
            self.decoded_count += 1
            for other in self.edges[v]:
                degree[other] -= 1
                nxor[other] ^= v
                payload[other] ^= value
                self.edge_removals += 1
                if degree[other] == 1:
                    ripple.append(other)
        if not take_last:
            del ripple[:]

    def recovered_values(self) -> list[bytes | None]:
        size = self.payload_size
        return [
            None if v is None else v.to_bytes(size, "big") for v in self.recovered
        ]

    def residual_neighbor_set(self, symbol_index: int) -> frozenset[int]:
        """Reconstruct a residual neighbor set (diagnostics; not the hot path)."""
        sym = self.symbols[symbol_index]
        return frozenset(v for v in sym.neighbors if self.recovered[v] is None)


def decode(
    symbols: Sequence[CodedSymbol], k: int, ripple_order: str = "lifo"
) -> tuple[list[bytes | None], int]:
    """Peel the received symbols; returns (per-input values or None, count)."""
    state = DecoderState(symbols, k)
    state.run(ripple_order)
    return state.recovered_values(), state.decoded_count


def residual_degree_histogram(state: DecoderState) -> dict[int, int]:
    """Counts of residual degrees among undepleted symbols (degree 0 excluded)."""
    counts = Counter(d for d in state.residual_degree if d > 0)
    return dict(sorted(counts.items()))


# --- fixture text format: one symbol per line, "idx1,idx2,...<TAB>hex" ---


def write_symbols(symbols: Iterable[CodedSymbol], dest: IO[str]) -> None:
    for sym in symbols:
        dest.write(",".join(str(v) for v in sym.neighbors))
        dest.write("\t")
        dest.write(sym.payload.hex())
        dest.write("\n")


def read_symbols(src: IO[str]) -> list[CodedSymbol]:
    out = []
    for lineno, raw in enumerate(src.read().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            idx_part, hex_part = line.split("\t")
            neighbors = tuple(int(v) for v in idx_part.split(","))
            payload = bytes.fromhex(hex_part)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad symbol record {raw!r}") from exc
        out.append(CodedSymbol(neighbors, payload))
    return out
