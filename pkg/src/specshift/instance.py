"""Problem instances: JSON parsing, serialisation and seeded generation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .functions import Gaussian, Polynomial, SmoothTestFunction, from_dict
from .spectral import HermitianOperator, NonHermitianError, schatten_norm


class InstanceError(ValueError):
    """Bad instance input; ``info`` is the machine-readable diagnostic."""

    def __init__(self, kind: str, message: str, **info):
        super().__init__(message)
        self.kind = kind
        self.info = {"error": kind, "message": message, **info}


@dataclass(frozen=True)
class ProblemInstance:
    id: str
    H: HermitianOperator
    V: HermitianOperator
    n: int
    functions: tuple
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None

    @property
    def dim(self) -> int:
        return self.H.dim

    def with_order(self, n: int) -> "ProblemInstance":
        return ProblemInstance(self.id, self.H, self.V, n, self.functions, self.tolerances, self.seed)


def _matrix_from(obj, name: str, dim: int) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise InstanceError("validation", f"{name} must be an object with 're' (and optional 'im') planes", field=name)
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float) if obj.get("im") is not None else np.zeros_like(re)
    except (TypeError, ValueError) as exc:
        raise InstanceError("validation", f"{name}: entries must be numbers ({exc})", field=name) from None
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise InstanceError("validation", f"{name} has shape {re.shape}/{im.shape}, expected ({dim}, {dim})",
                            field=name)
    return re + 1j * im if np.any(im) else re


def _operator(obj, name: str, dim: int) -> HermitianOperator:
    try:
        return HermitianOperator(_matrix_from(obj, name, dim))
    except NonHermitianError as exc:
        raise InstanceError("validation", f"{name} is not Hermitian at ({exc.i}, {exc.j})", field=name,
                            entry=[exc.i, exc.j], defect=exc.defect) from None


def instance_from_dict(d: dict, default_id: str = "instance") -> ProblemInstance:
    if not isinstance(d, dict):
        raise InstanceError("validation", "an instance must be a JSON object")
    for key in ("dim", "H", "V", "n"):
        if key not in d:
            raise InstanceError("validation", f"missing field {key!r}", field=key)
    dim, n = d["dim"], d["n"]
    if not isinstance(dim, int) or dim < 1:
        raise InstanceError("validation", "dim must be a positive integer", field="dim")
    if not isinstance(n, int) or n < 1:
        raise InstanceError("validation", "n must be an integer >= 1", field="n")
    H = _operator(d["H"], "H", dim)
    V = _operator(d["V"], "V", dim)
    try:
        functions = tuple(from_dict(f) for f in d.get("functions", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError("validation", f"bad function descriptor: {exc}", field="functions") from None
    tolerances = dict(d.get("tolerances", {}))
    for k, v in tolerances.items():
        if not isinstance(v, (int, float)) or v < 0 or math.isnan(v):
            raise InstanceError("validation", f"tolerance {k!r} must be a non-negative number", field="tolerances")
    seed = d.get("seed")
    return ProblemInstance(str(d.get("id", default_id)), H, V, n, functions, tolerances, seed)


def parse_instances(text: str) -> list[ProblemInstance]:
    """Parse one instance, a list of instances, or ``{"instances": [...]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("parse", f"malformed JSON: {exc.msg}",
                            position={"line": exc.lineno, "column": exc.colno, "offset": exc.pos}) from None
    if isinstance(doc, dict) and "instances" in doc:
        doc = doc["instances"]
    if isinstance(doc, list):
        return [instance_from_dict(d, f"instance-{i}") for i, d in enumerate(doc)]
    return [instance_from_dict(doc)]


def parse_instance(source: str | Path) -> ProblemInstance:
    """Parse a single instance from a path or inline JSON text."""
    text = _read_source(source)
    out = parse_instances(text)
    if len(out) != 1:
        raise InstanceError("validation", f"expected one instance, found {len(out)}")
    return out[0]


def _read_source(source) -> str:
    if isinstance(source, Path):
        return source.read_text()
    s = str(source)
    if s.lstrip().startswith(("{", "[")):
        return s
    try:
        return Path(s).read_text()
    except OSError as exc:
        raise InstanceError("io", f"cannot read {s}: {exc.strerror}", path=s) from None


def _planes(A: HermitianOperator) -> dict:
    m = A.matrix
    out = {"re": np.real(m).tolist()}
    if np.iscomplexobj(m) and np.any(np.imag(m)):
        out["im"] = np.imag(m).tolist()
    return out


def instance_to_dict(inst: ProblemInstance) -> dict:
    d = {"id": inst.id, "dim": inst.dim, "H": _planes(inst.H), "V": _planes(inst.V), "n": inst.n,
         "functions": [f.to_dict() for f in inst.functions]}
    if inst.tolerances:
        d["tolerances"] = dict(inst.tolerances)
    if inst.seed is not None:
        d["seed"] = inst.seed
    return d


def serialize_instance(inst: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def _haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def default_functions(n: int, rng: np.random.Generator | None = None) -> tuple[SmoothTestFunction, ...]:
    """Three gaussians and a polynomial of degree ``n + 2``."""
    rng = np.random.default_rng(0) if rng is None else rng
    coeffs = tuple(float(c) for c in np.round(rng.uniform(-1, 1, n + 3), 6))
    return (Gaussian(0.0, 1.0), Gaussian(0.5, 0.6, 2.0), Gaussian(-0.8, 1.7, 0.5), Polynomial(coeffs))


def generate_instance(dim: int, spread: float = 1.0, budget: float = 0.5, seed: int = 0, n: int = 2,
                      functions: tuple | None = None, id: str | None = None) -> ProblemInstance:
    """Seeded random pair: ``H`` with eigenvalues uniform in ``[-spread, spread]`` in a
    Haar-random basis, ``V`` Hermitian Gaussian scaled to ``||V||_n = budget``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if spread < 0 or budget < 0:
        raise ValueError("spread and budget must be non-negative")
    rng = np.random.default_rng(seed)
    U = _haar_unitary(rng, dim)
    eigs = rng.uniform(-spread, spread, dim)
    H = HermitianOperator((U * eigs) @ U.conj().T)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    V = (z + z.conj().T) / 2
    norm = schatten_norm(V, n)
    V = HermitianOperator(V * (budget / norm) if norm > 0 else np.zeros((dim, dim)))
    funcs = default_functions(n, rng) if functions is None else tuple(functions)
    return ProblemInstance(id or f"gen-{dim}-{seed}", H, V, n, funcs, {}, seed)
