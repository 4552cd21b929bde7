"""Seeded random generation of labeled 2- and 3-qubit state families.

Each family has a closed-form construction; every generated state is
labeled by the exact negativity oracle from :mod:`entdetect.qlinalg`
before it can enter a dataset.  Families whose construction guarantees a
negativity pattern (separable, Bell-orbit, Werner, bipartite-entangled)
abort on any violation; families where the pattern only holds for
generic draws (GHZ/W parametrisations, negativity-binned rejection
sampling) resample within a retry cap.

Randomness: one PCG64 stream per sample, seeded by (dataset seed,
sample index), so generation is deterministic and embarrassingly
parallel across samples.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .qlinalg import (
    DensityMatrix,
    PureState,
    kron,
    kron_all,
    negativity,
    negativity_per_qubit,
    numerical_rank,
)

ORACLE_TOL = 1e-9
RANK_TOL = 1e-10
RETRY_CAP = 100_000

FAMILIES = {
    # tag: (num_qubits, source_kind)
    "sep2pure": (2, "density"),
    "sep2mixed": (2, "density"),
    "bellrandom": (2, "density"),
    "random2pure": (2, "density"),
    "random2mixed": (2, "density"),
    "epsilonpure": (2, "density"),
    "epsilonmixed": (2, "density"),
    "werner": (2, "density"),
    "sep3": (3, "purevec"),
    "be3": (3, "purevec"),
    "ghz3": (3, "purevec"),
    "w3": (3, "purevec"),
}


class GenerationExhausted(RuntimeError):
    """Rejection sampling exceeded the retry cap for one requested state."""


class OracleViolation(RuntimeError):
    """A construction-guaranteed negativity pattern failed; aborts generation."""


def psi_plus() -> np.ndarray:
    """(|00> + |11>)/sqrt(2)."""
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def psi_minus() -> np.ndarray:
    """(|01> - |10>)/sqrt(2)."""
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def unitary_from_angles(t1: float, t2: float, t3: float, t4: float) -> np.ndarray:
    """Single-qubit unitary in the Euler-style angle parametrisation.

    Half-angle phases throughout, which keeps the matrix exactly unitary
    for any angles.
    """
    c, s = np.cos(t4 / 2), np.sin(t4 / 2)
    return np.array(
        [
            [np.exp(1j * (t1 - t2 / 2 - t3 / 2)) * c, -np.exp(1j * (t1 - t2 / 2 + t3 / 2)) * s],
            [np.exp(1j * (t1 + t2 / 2 - t3 / 2)) * s, np.exp(1j * (t1 + t2 / 2 + t3 / 2)) * c],
        ]
    )


def random_unitary_1q(rng) -> np.ndarray:
    """Random single-qubit unitary with angles uniform in [0, 2pi).

    Not Haar measure, by design: the angle distribution is the flat one.
    """
    return unitary_from_angles(*rng.uniform(0.0, 2.0 * np.pi, size=4))


def gen_sep_pure_2q(rng) -> PureState:
    """U1|0> (x) U2|0>: random pure product state."""
    u1, u2 = random_unitary_1q(rng), random_unitary_1q(rng)
    return PureState(np.kron(u1[:, 0], u2[:, 0]), 2)


def _random_pure_1q_density(rng) -> np.ndarray:
    u = random_unitary_1q(rng)
    v = u[:, 0]
    return np.outer(v, v.conj())


def _mixture_weights(rng, L) -> np.ndarray:
    w = rng.uniform(0.0, 1.0, size=L)
    return w / w.sum()


def gen_sep_mixed_2q(rng, L: int) -> DensityMatrix:
    """Convex combination of L random pure product states."""
    if not 2 <= L <= 7:
        raise ValueError(f"L={L} outside [2, 7]")
    w = _mixture_weights(rng, L)
    m = np.zeros((4, 4), dtype=complex)
    for i in range(L):
        m += w[i] * np.kron(_random_pure_1q_density(rng), _random_pure_1q_density(rng))
    return DensityMatrix(m, 2)


def gen_sep_mixed_ranked_2q(rng, target_rank: int, mix_terms_range=(2, 7)) -> DensityMatrix:
    """Separable mixture resampled until its numerical rank hits the target."""
    lset = [x for x in _RANK_TO_L[target_rank] if mix_terms_range[0] <= x <= mix_terms_range[1]]
    if not lset:
        raise ValueError(f"rank {target_rank} unreachable with L in {mix_terms_range}")
    for _ in range(RETRY_CAP):
        L = int(lset[rng.integers(0, len(lset))])
        rho = gen_sep_mixed_2q(rng, L)
        if numerical_rank(rho, RANK_TOL) == target_rank:
            return rho
    raise GenerationExhausted(f"rank-{target_rank} separable mixture kept degenerating")


def gen_bell_random_2q(rng) -> PureState:
    """(U1 (x) U2)|psi+>: maximally entangled, negativity exactly 1/2."""
    u = kron(random_unitary_1q(rng), random_unitary_1q(rng))
    return PureState(u @ psi_plus(), 2)


def gen_random_pure_2q(rng) -> PureState:
    """Random pure state with amplitudes r_j e^{i phi_j}, then normalized."""
    while True:
        r = rng.uniform(0.0, 1.0, size=4)
        nrm = np.sqrt(np.sum(r**2))
        if nrm > 1e-12:
            break
    phi = rng.uniform(0.0, 2.0 * np.pi, size=4)
    return PureState(r * np.exp(1j * phi) / nrm, 2)


def gen_binned_pure_2q(rng, lo: float, hi: float) -> tuple[PureState, float]:
    """Rejection-sample a random pure state with negativity strictly in (lo, hi).

    The lower edge is floored at the oracle tolerance so that every binned
    state is genuinely entangled (its binary label is 1 by construction).
    """
    lo = max(lo, ORACLE_TOL)
    for _ in range(RETRY_CAP):
        psi = gen_random_pure_2q(rng)
        n = negativity(psi.to_density())
        if lo < n < hi:
            return psi, n
    raise GenerationExhausted(f"no pure state in ({lo}, {hi}) after {RETRY_CAP} tries")


# L values compatible with each target rank: a generic mixture of L pure
# states has rank min(L, 4).
_RANK_TO_L = {2: (2,), 3: (3,), 4: (4, 5, 6, 7)}

_MIX_CHUNK = 64


def _batch_random_pure_2q(rng, n: int) -> np.ndarray:
    """(n, 4) amplitude rows drawn by the random-pure recipe."""
    r = rng.uniform(0.0, 1.0, (n, 4))
    phi = rng.uniform(0.0, 2.0 * np.pi, (n, 4))
    nrm = np.sqrt((r**2).sum(axis=1, keepdims=True))
    nrm[nrm < 1e-12] = 1.0  # all-zero row: leave it; it cannot land in any bin
    return (r / nrm) * np.exp(1j * phi)


def _batch_negativity_2q(rhos: np.ndarray) -> np.ndarray:
    """First-qubit negativities of a stack of 4x4 density matrices."""
    pt = rhos.reshape(-1, 2, 2, 2, 2).transpose(0, 3, 2, 1, 4).reshape(-1, 4, 4)
    ev = np.linalg.eigvalsh(pt)
    return np.maximum(0.0, 0.5 * (np.abs(ev).sum(axis=1) - 1.0))


def _binned_pure_pool(rng, lo: float, hi: float, need: int) -> np.ndarray:
    """Vectorized rejection sampling of ``need`` pure states inside (lo, hi)."""
    lo = max(lo, ORACLE_TOL)
    kept = []
    have = 0
    for _ in range(RETRY_CAP):
        vecs = _batch_random_pure_2q(rng, max(64, 4 * (need - have)))
        rhos = vecs[:, :, None] * vecs.conj()[:, None, :]
        negs = _batch_negativity_2q(rhos)
        sel = (negs > lo) & (negs < hi)
        kept.append(vecs[sel])
        have += int(sel.sum())
        if have >= need:
            return np.concatenate(kept)[:need]
    raise GenerationExhausted(f"pure bin ({lo}, {hi}) too rare")


def gen_binned_mixed_2q(
    rng, lo: float, hi: float, target_rank: int, mix_terms_range=(2, 7)
) -> tuple[DensityMatrix, float]:
    """Mixture of L binned pure states, postselected on bin and rank.

    The pure components are drawn from the same negativity interval, which
    keeps the mixture's negativity near the bin often enough for rejection
    sampling to stay workable even in the high-negativity bins.  For the
    same reason the rank-4 bucket mixes exactly L=4 components (mixture
    negativity decays fast with L; larger L almost never lands in the
    upper bins).  Proposals are evaluated in vectorized chunks.
    """
    lset = [x for x in _RANK_TO_L[target_rank] if mix_terms_range[0] <= x <= mix_terms_range[1]]
    if not lset:
        raise ValueError(f"rank {target_rank} unreachable with L in {mix_terms_range}")
    L = lset[0]
    lo = max(lo, ORACLE_TOL)
    attempts = 0
    chunk = 8  # grows when the bin/rank combination proves rare
    while attempts < RETRY_CAP:
        comps = _binned_pure_pool(rng, lo, hi, chunk * L).reshape(chunk, L, 4)
        w = rng.uniform(0.0, 1.0, (chunk, L))
        w /= w.sum(axis=1, keepdims=True)
        rhos = np.einsum("bl,bli,blj->bij", w, comps, comps.conj())
        negs = _batch_negativity_2q(rhos)
        ranks = (np.linalg.eigvalsh(rhos) > RANK_TOL).sum(axis=1)
        for i in np.flatnonzero((negs > lo) & (negs < hi) & (ranks == target_rank)):
            rho = DensityMatrix(rhos[i], 2)
            n = negativity(rho)  # authoritative scalar oracle, guards bin edges
            if lo < n < hi and numerical_rank(rho, RANK_TOL) == target_rank:
                return rho, n
        attempts += chunk
        chunk = min(4 * chunk, 1024)
    raise GenerationExhausted(
        f"no rank-{target_rank} mixed state in ({lo}, {hi}) after {RETRY_CAP} tries"
    )


def gen_random_mixed_2q(rng, target_rank: int, mix_terms_range=(2, 7)) -> DensityMatrix:
    """Mixture of L unconstrained random pure states with the requested rank."""
    lset = [x for x in _RANK_TO_L[target_rank] if mix_terms_range[0] <= x <= mix_terms_range[1]]
    if not lset:
        raise ValueError(f"rank {target_rank} unreachable with L in {mix_terms_range}")
    for _ in range(RETRY_CAP):
        L = int(lset[rng.integers(0, len(lset))])
        w = _mixture_weights(rng, L)
        comps = np.array([gen_random_pure_2q(rng).vec for _ in range(L)])
        rho = DensityMatrix(np.einsum("l,li,lj->ij", w, comps, comps.conj()), 2)
        if numerical_rank(rho, RANK_TOL) == target_rank:
            return rho
    raise GenerationExhausted(f"rank-{target_rank} mixture kept degenerating")


def gen_epsilon_2q(rng, epsilon: float, purity_kind: str):
    """Noise-interpolation states between a product state and a Bell state.

    Pure: (|sep> + eps |Bell>) / sqrt(1 + eps^2 + 2 eps Re<sep|Bell>).
    Mixed: (1 - eps)|sep><sep| + eps |Bell><Bell|.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon={epsilon} outside [0, 1]")
    sep = gen_sep_pure_2q(rng).vec
    bell = gen_bell_random_2q(rng).vec
    if purity_kind == "pure":
        denom = np.sqrt(1.0 + epsilon**2 + 2.0 * epsilon * np.vdot(sep, bell).real)
        return PureState((sep + epsilon * bell) / denom, 2)
    if purity_kind == "mixed":
        m = (1.0 - epsilon) * np.outer(sep, sep.conj()) + epsilon * np.outer(
            bell, bell.conj()
        )
        return DensityMatrix(m, 2)
    raise ValueError(f"unknown purity_kind {purity_kind!r}")


def gen_werner(rng, p: float) -> DensityMatrix:
    """(p/3) I + (1 - 4p/3) (U1 (x) U2)|psi-><psi-|(...)^dag.

    Entangled iff p < 1/2; negativity is max(0, 1/2 - p).  The identity
    term is the plain 4x4 identity, which is what keeps the trace at 1.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    u = kron(random_unitary_1q(rng), random_unitary_1q(rng))
    v = u @ psi_minus()
    return DensityMatrix((p / 3) * np.eye(4) + (1 - 4 * p / 3) * np.outer(v, v.conj()), 2)


def gen_sep_3q(rng) -> PureState:
    """U1|0> (x) U2|0> (x) U3|0>."""
    vs = [random_unitary_1q(rng)[:, 0] for _ in range(3)]
    return PureState(kron_all(*[v.reshape(2, 1) for v in vs]).ravel(), 3)


def gen_be_3q(rng) -> PureState:
    """One uniformly chosen qubit separated in |0>, the other two in |psi+>,
    all three rotated by independent local unitaries."""
    sep_qubit = int(rng.integers(0, 3))
    vec = np.zeros(8, dtype=complex)
    pair = [k for k in range(3) if k != sep_qubit]
    for bit in (0, 1):
        idx = (bit << (2 - pair[0])) | (bit << (2 - pair[1]))
        vec[idx] = 1 / np.sqrt(2)
    u = kron_all(*[random_unitary_1q(rng) for _ in range(3)])
    return PureState(u @ vec, 3)


def ghz_state(delta: float, alpha: float, beta: float, gamma: float, phi: float) -> PureState:
    """GHZ-class state cos(d)|000> + sin(d) e^{i phi}|abc>, exactly normalized."""
    qa = np.array([np.cos(alpha), np.sin(alpha)], dtype=complex)
    qb = np.array([np.cos(beta), np.sin(beta)], dtype=complex)
    qc = np.array([np.cos(gamma), np.sin(gamma)], dtype=complex)
    vec = np.zeros(8, dtype=complex)
    vec[0] = np.cos(delta)
    vec += np.sin(delta) * np.exp(1j * phi) * kron_all(
        qa.reshape(2, 1), qb.reshape(2, 1), qc.reshape(2, 1)
    ).ravel()
    return PureState(vec / np.linalg.norm(vec), 3)


def gen_ghz_3q(rng) -> PureState:
    """Random GHZ-class state: delta in (0, pi/4], local angles in (0, pi/2]."""
    delta = rng.uniform(0.0, np.pi / 4)
    alpha, beta, gamma = rng.uniform(0.0, np.pi / 2, size=3)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return ghz_state(delta, alpha, beta, gamma, phi)


def w_state(a: float, b: float, c: float, d: float) -> PureState:
    """W-class state a|001> + b|010> + c|100> + d|000>, normalized."""
    vec = np.zeros(8, dtype=complex)
    vec[1], vec[2], vec[4], vec[0] = a, b, c, d
    return PureState(vec / np.linalg.norm(vec), 3)


def gen_w_3q(rng) -> PureState:
    """Random W-class state with amplitudes uniform in (0, 1)."""
    a, b, c, d = rng.uniform(0.0, 1.0, size=4)
    return w_state(a, b, c, d)


@dataclass
class GenSpec:
    """Parameters for one family's contribution to a dataset."""

    family: str
    count: int
    seed: int
    negativity_interval: tuple | None = None
    epsilon: float | None = None
    werner_p: float | None = None
    mix_terms_range: tuple = (2, 7)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.negativity_interval is not None:
            if self.family not in ("random2pure", "random2mixed"):
                raise ValueError(f"negativity_interval not applicable to {self.family}")
            lo, hi = self.negativity_interval
            if not (0.0 <= lo < hi <= 0.5):
                raise ValueError(f"bad negativity interval ({lo}, {hi})")
        if self.family in ("epsilonpure", "epsilonmixed"):
            if self.epsilon is None or not 0.0 <= self.epsilon <= 1.0:
                raise ValueError("epsilon in [0, 1] required for epsilon families")
        elif self.epsilon is not None:
            raise ValueError(f"epsilon not applicable to {self.family}")
        if self.family == "werner":
            if self.werner_p is None or not 0.0 <= self.werner_p <= 1.0:
                raise ValueError("werner_p in [0, 1] required for werner family")
        elif self.werner_p is not None:
            raise ValueError(f"werner_p not applicable to {self.family}")

    @property
    def num_qubits(self) -> int:
        return FAMILIES[self.family][0]

    @property
    def source_kind(self) -> str:
        return FAMILIES[self.family][1]

    def extra_fields(self) -> dict:
        out = {"kind": self.source_kind, "labels": "binary"}
        if self.negativity_interval is not None:
            lo, hi = self.negativity_interval
            out["interval"] = f"{lo:.17g}:{hi:.17g}"
        if self.epsilon is not None:
            out["epsilon"] = f"{self.epsilon:.17g}"
        if self.werner_p is not None:
            out["werner_p"] = f"{self.werner_p:.17g}"
        if self.family in ("sep2mixed", "random2mixed"):
            out["L"] = f"{self.mix_terms_range[0]}:{self.mix_terms_range[1]}"
        return out


@dataclass
class Dataset:
    """In-memory mirror of one dataset file: features, labels, negativities."""

    family: str
    num_qubits: int
    seed: int
    features: np.ndarray
    binary_labels: np.ndarray
    negativities: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return self.features.shape[0]

    @property
    def source_kind(self) -> str:
        return self.extra.get("kind", FAMILIES[self.family][1])


def _gen_one(spec: GenSpec, rng, sample_index: int):
    """Generate one payload for the spec's family; returns (payload, negs)."""
    fam = spec.family
    if fam == "sep2pure":
        payload = gen_sep_pure_2q(rng)
    elif fam == "sep2mixed":
        payload = gen_sep_mixed_ranked_2q(rng, 2 + sample_index % 3, spec.mix_terms_range)
    elif fam == "bellrandom":
        payload = gen_bell_random_2q(rng)
    elif fam == "random2pure":
        if spec.negativity_interval is None:
            payload = gen_random_pure_2q(rng)
        else:
            payload, _ = gen_binned_pure_2q(rng, *spec.negativity_interval)
    elif fam == "random2mixed":
        target_rank = 2 + sample_index % 3
        if spec.negativity_interval is None:
            payload = gen_random_mixed_2q(rng, target_rank, spec.mix_terms_range)
        else:
            lo, hi = spec.negativity_interval
            payload, _ = gen_binned_mixed_2q(rng, lo, hi, target_rank, spec.mix_terms_range)
    elif fam in ("epsilonpure", "epsilonmixed"):
        payload = gen_epsilon_2q(rng, spec.epsilon, fam.removeprefix("epsilon"))
    elif fam == "werner":
        payload = gen_werner(rng, spec.werner_p)
    elif fam == "sep3":
        payload = gen_sep_3q(rng)
    elif fam == "be3":
        payload = _retry_generic(rng, gen_be_3q, _be3_ok)
    elif fam == "ghz3":
        payload = _retry_generic(rng, gen_ghz_3q, _all_entangled_ok)
    elif fam == "w3":
        payload = _retry_generic(rng, gen_w_3q, _all_entangled_ok)
    else:  # pragma: no cover - guarded by GenSpec
        raise ValueError(fam)
    negs = _oracle_negativities(payload, spec.num_qubits)
    _check_oracle(fam, spec, negs)
    return payload, negs


def _retry_generic(rng, gen, ok):
    for _ in range(RETRY_CAP):
        payload = gen(rng)
        if ok(payload):
            return payload
    raise GenerationExhausted(f"{gen.__name__} kept producing degenerate draws")


def _be3_ok(psi) -> bool:
    negs = np.sort(negativity_per_qubit(psi.to_density(), 3))
    return negs[0] <= ORACLE_TOL and np.all(np.abs(negs[1:] - 0.5) <= ORACLE_TOL)


def _all_entangled_ok(psi) -> bool:
    return bool(np.all(negativity_per_qubit(psi.to_density(), 3) > ORACLE_TOL))


def _oracle_negativities(payload, num_qubits) -> np.ndarray:
    rho = payload.to_density() if isinstance(payload, PureState) else payload
    if num_qubits == 2:
        return np.array([negativity(rho, 0)])
    return negativity_per_qubit(rho, num_qubits)


def _check_oracle(fam: str, spec: GenSpec, negs: np.ndarray):
    """Abort on any violation of a construction-guaranteed pattern."""
    if fam in ("sep2pure", "sep2mixed", "sep3"):
        bad = np.max(negs) > ORACLE_TOL
    elif fam == "bellrandom":
        bad = abs(negs[0] - 0.5) > ORACLE_TOL
    elif fam == "werner":
        bad = abs(negs[0] - max(0.0, 0.5 - spec.werner_p)) > ORACLE_TOL
    elif fam in ("epsilonpure", "epsilonmixed") and spec.epsilon == 0.0:
        bad = negs[0] > ORACLE_TOL
    elif fam == "epsilonmixed" and spec.epsilon == 1.0:
        bad = abs(negs[0] - 0.5) > ORACLE_TOL
    elif fam in ("random2pure", "random2mixed") and spec.negativity_interval:
        lo, hi = spec.negativity_interval
        bad = not max(lo, ORACLE_TOL) < negs[0] < hi
    elif fam == "be3":
        s = np.sort(negs)
        bad = s[0] > ORACLE_TOL or np.max(np.abs(s[1:] - 0.5)) > ORACLE_TOL
    else:
        bad = False
    if bad:
        raise OracleViolation(f"{fam}: negativities {negs} violate the family pattern")


def sample_rng(seed: int, index: int):
    """Per-sample PCG64 stream derived from (dataset seed, sample index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def generate_states(spec: GenSpec):
    """Yield (payload, negativities) for every sample index of the spec."""
    for i in range(spec.count):
        yield _gen_one(spec, sample_rng(spec.seed, i), i)


def build_dataset(spec: GenSpec) -> Dataset:
    """Generate, oracle-label and featurize one family's dataset."""
    from .pipeline import featurize_density, featurize_purevec

    feats = []
    negs = []
    for payload, n in generate_states(spec):
        if spec.source_kind == "density":
            rho = payload.to_density() if isinstance(payload, PureState) else payload
            feats.append(featurize_density(rho))
        else:
            feats.append(featurize_purevec(payload))
        negs.append(n)
    negativities = np.asarray(negs)
    labels = (negativities > ORACLE_TOL).any(axis=1).astype(np.int64)
    return Dataset(
        family=spec.family,
        num_qubits=spec.num_qubits,
        seed=spec.seed,
        features=np.asarray(feats),
        binary_labels=labels,
        negativities=negativities,
        extra=spec.extra_fields(),
    )


MAGIC = "#entdetect-dataset v1"


def write_dataset(ds: Dataset, path) -> str:
    """Write one dataset file; bit-exact round trip with read_dataset.

    Layout: a header line, then one CSV row per sample holding the feature
    values, the binary label and the oracle negativity column(s), all
    floats printed with 17 significant digits.
    """
    path = os.fspath(path)
    extra = ",".join(f"{k}={v}" for k, v in sorted(ds.extra.items()))
    header = (
        f"{MAGIC}; family={ds.family}; N={ds.num_qubits}; "
        f"S={ds.count}; seed={ds.seed}; extra={extra}"
    )
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(header + "\n")
        for i in range(ds.count):
            row = [f"{x:.17g}" for x in ds.features[i]]
            row.append(str(int(ds.binary_labels[i])))
            row.extend(f"{x:.17g}" for x in ds.negativities[i])
            fh.write(",".join(row) + "\n")
    os.replace(tmp, path)
    return path


class FormatError(ValueError):
    """Malformed dataset or checkpoint file."""


def read_dataset(path) -> Dataset:
    """Parse one dataset file written by write_dataset."""
    path = os.fspath(path)
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
    if not header.startswith(MAGIC + "; "):
        raise FormatError(f"{path}: missing dataset header")
    fields = {}
    for part in header[len(MAGIC) + 2 :].split("; "):
        k, _, v = part.partition("=")
        fields[k] = v
    try:
        family = fields["family"]
        nq = int(fields["N"])
        count = int(fields["S"])
        seed = int(fields["seed"])
    except KeyError as exc:
        raise FormatError(f"{path}: header missing {exc}") from exc
    extra = {}
    if fields.get("extra"):
        for item in fields["extra"].split(","):
            k, _, v = item.partition("=")
            extra[k] = v
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n_neg = 1 if nq == 2 else 3
    width = raw.shape[1] - 1 - n_neg
    if raw.shape[0] != count or width <= 0:
        raise FormatError(f"{path}: row count or width inconsistent with header")
    return Dataset(
        family=family,
        num_qubits=nq,
        seed=seed,
        features=raw[:, :width],
        binary_labels=raw[:, width].astype(np.int64),
        negativities=raw[:, width + 1 :],
        extra=extra,
    )


def build_and_write(spec: GenSpec, path) -> Dataset:
    """Convenience: build_dataset then write_dataset; returns the dataset."""
    ds = build_dataset(spec)
    write_dataset(ds, path)
    return ds
