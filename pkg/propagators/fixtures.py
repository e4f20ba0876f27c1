# propagators/fixtures.py

"""Seeded random operators and the JSON fixture format.

A fixture file holds an ordered operator list and one state vector:

    {"name": "pair4",
     "operators": [{"label": "A", "dim": 4, "rows": [[[re, im], ...], ...]}, ...],
     "h": {"dim": 4, "rows": [[re, im], ...]}}
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from propagators.errors import FixtureError
from propagators.operators import HermitianOperator, StateVector, check_dims
from utils.serialization import decode_matrix, decode_vector, encode_matrix, encode_vector, read_json, write_json

logger = logging.getLogger(__name__)


@dataclass
class Fixture:
    name: str
    ops: List[HermitianOperator]
    h: StateVector
    warnings: List[str] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.h.dim


def random_hermitian(dim: int, rng: np.random.Generator, norm: Optional[float] = None) -> HermitianOperator:
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = 0.5 * (G + G.conj().T)
    if norm is not None:
        H *= norm / np.max(np.abs(np.linalg.eigvalsh(H)))
    return HermitianOperator(H)


def random_pair(dim: int, rng: np.random.Generator, norm: float = 1.0) -> Tuple[HermitianOperator, HermitianOperator]:
    return random_hermitian(dim, rng, norm), random_hermitian(dim, rng, norm)


def random_diagonal_family(n: int, dim: int, rng: np.random.Generator, low: float = -1.0, high: float = 1.0) -> List[HermitianOperator]:
    return [HermitianOperator.diagonal(rng.uniform(low, high, size=dim), label=f"A{i + 1}") for i in range(n)]


def random_commuting_family(n: int, dim: int, rng: np.random.Generator) -> List[HermitianOperator]:
    """Diagonal spectra in [−1, 1] rotated into one random unitary basis."""
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    ops = []
    for i in range(n):
        lam = rng.uniform(-1.0, 1.0, size=dim)
        ops.append(HermitianOperator((Q * lam) @ Q.conj().T, label=f"A{i + 1}"))
    return ops


def random_unit_vector(dim: int, rng: np.random.Generator) -> StateVector:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(v / np.linalg.norm(v))


def random_fixture(kind: str, dim: int, count: int, seed: int) -> Fixture:
    rng = np.random.default_rng(seed)
    if kind == "pair":
        ops = [random_hermitian(dim, rng, 1.0) for _ in range(count)]
    elif kind == "diagonal":
        ops = random_diagonal_family(count, dim, rng)
    elif kind == "commuting":
        ops = random_commuting_family(count, dim, rng)
    else:
        raise FixtureError(f"unknown fixture kind {kind!r}")
    labels = ["A", "B"] if kind == "pair" and count == 2 else [f"A{i + 1}" for i in range(count)]
    for op, label in zip(ops, labels):
        op.label = label
    return Fixture(name=f"{kind}{dim}-seed{seed}", ops=ops, h=random_unit_vector(dim, rng))


def fixture_to_dict(fixture: Fixture) -> dict:
    return {
        "name": fixture.name,
        "operators": [{"label": op.label, **encode_matrix(op.entries)} for op in fixture.ops],
        "h": encode_vector(fixture.h.entries),
    }


def fixture_from_dict(data, source: str = "$") -> Fixture:
    if not isinstance(data, dict):
        raise FixtureError("top level must be an object", source)
    raw_ops = data.get("operators")
    if not isinstance(raw_ops, list) or not raw_ops:
        raise FixtureError("'operators' must be a non-empty list", f"{source}.operators")
    if "h" not in data:
        raise FixtureError("missing state vector 'h'", source)

    ops, warnings = [], []
    for i, raw in enumerate(raw_ops):
        where = f"{source}.operators[{i}]"
        label = raw.get("label", f"A{i + 1}") if isinstance(raw, dict) else f"A{i + 1}"
        op = HermitianOperator(decode_matrix(raw, where), label=label)
        if op.symmetrized:
            warnings.append(f"{where} ({label}) was not Hermitian (defect {op.defect:.3e}); symmetrized")
        ops.append(op)
    h = StateVector(decode_vector(data["h"], f"{source}.h"))
    try:
        check_dims(ops, h)
    except ValueError as exc:
        raise FixtureError(str(exc), source) from exc
    return Fixture(name=str(data.get("name", "fixture")), ops=ops, h=h, warnings=warnings)


def load_fixture(path) -> Fixture:
    fixture = fixture_from_dict(read_json(path), source=str(path))
    for message in fixture.warnings:
        logger.warning(message)
    return fixture


def save_fixture(path, fixture: Fixture) -> Path:
    return write_json(path, fixture_to_dict(fixture))


def bundled_fixture_path(name: str) -> Path:
    return Path(__file__).resolve().parent.parent / "configs" / "fixtures" / f"{name}.json"


def split_pair(ops: Sequence[HermitianOperator]) -> Tuple[HermitianOperator, HermitianOperator]:
    if len(ops) != 2:
        raise FixtureError(f"expected an operator pair, fixture has {len(ops)} operators")
    return ops[0], ops[1]
