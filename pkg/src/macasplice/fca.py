"""Fuzzy cellular automaton core.

A rule is a dependency matrix T (per cell, which of its up-to-three
neighborhood cells feed it) plus a complement vector F.  One synchronous
step replaces each cell by the mean of its dependent cells, complemented
(1 - x) where the F bit is set.  The array is linear and non-periodic, so
edge cells have truncated neighborhoods.

Evolution runs to a fixed point (consecutive states within epsilon), a
period-2 cycle (state matches two steps back), or a step cap.  Attractors
are identified by quantizing the final state to K equispaced levels, which
merges numerically adjacent limits into one basin id.

Two interchangeable kernels exist: a compiled extension and a numpy
fallback, selected at import (override with MACASPLICE_BACKEND or
set_backend).  They are bit-identical by construction; the fallback is the
reference.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernel_py

FIXED_POINT = "fixed-point"
PERIOD_2_CYCLE = "period-2-cycle"
TRUNCATED = "truncated"

_STATUS_NAMES = {
    _kernel_py.STATUS_FIXED: FIXED_POINT,
    _kernel_py.STATUS_CYCLE: PERIOD_2_CYCLE,
    _kernel_py.STATUS_TRUNCATED: TRUNCATED,
}

_IMPLS = {"python": _kernel_py}
try:
    from . import _kernel as _kernel_c  # type: ignore[attr-defined]

    _IMPLS["compiled"] = _kernel_c
except ImportError:
    pass

_active_backend = os.environ.get("MACASPLICE_BACKEND", "")
if _active_backend not in _IMPLS:
    _active_backend = "compiled" if "compiled" in _IMPLS else "python"


def available_backends():
    return sorted(_IMPLS)


def get_backend():
    return _active_backend


def set_backend(name):
    """Select the evolution kernel ('compiled' or 'python')."""
    global _active_backend
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active_backend = name


class DependencyMatrix:
    """Per-cell dependency sets, each a non-empty subset of {i-1, i, i+1}.

    Stored as one 3-bit mask per cell (1 = left neighbor, 2 = self,
    4 = right neighbor); edge cells simply lack the out-of-range bit.
    """

    __slots__ = ("masks", "_arrays")

    def __init__(self, masks):
        masks = np.asarray(masks, dtype=np.uint8)
        if masks.ndim != 1 or masks.size == 0:
            raise ValueError("masks must be a non-empty 1-d array")
        length = masks.size
        for i, mask in enumerate(masks):
            if mask == 0 or mask > 7:
                raise ValueError(f"cell {i}: mask {mask} out of range")
            if i == 0 and mask & 1:
                raise ValueError("cell 0 cannot depend on a left neighbor")
            if i == length - 1 and mask & 4:
                raise ValueError(f"cell {i} cannot depend on a right neighbor")
        self.masks = masks
        self.masks.flags.writeable = False
        self._arrays = None

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]):
        """Build from explicit dependency index lists (0-based)."""
        rows = [sorted(set(r)) for r in rows]
        length = len(rows)
        masks = np.zeros(length, dtype=np.uint8)
        for i, deps in enumerate(rows):
            for j in deps:
                if j not in (i - 1, i, i + 1) or not 0 <= j < length:
                    raise ValueError(f"cell {i}: dependency {j} outside its neighborhood")
                masks[i] |= 1 << (j - i + 1)
        return cls(masks)

    @classmethod
    def identity(cls, length: int):
        return cls(np.full(length, 2, dtype=np.uint8))

    @property
    def length(self) -> int:
        return int(self.masks.size)

    def rows(self) -> list[tuple[int, ...]]:
        out = []
        for i, mask in enumerate(self.masks):
            out.append(tuple(i + b - 1 for b in range(3) if mask & (1 << b)))
        return out

    def to_arrays(self):
        """(idx, cnt) arrays for the kernels: ascending dep indices + counts."""
        if self._arrays is None:
            length = self.length
            idx = np.zeros((length, 3), dtype=np.int32)
            cnt = np.zeros(length, dtype=np.uint8)
            for i, deps in enumerate(self.rows()):
                cnt[i] = len(deps)
                for s, j in enumerate(deps):
                    idx[i, s] = j
            self._arrays = (idx, cnt)
        return self._arrays

    def __eq__(self, other):
        return isinstance(other, DependencyMatrix) and np.array_equal(self.masks, other.masks)

    def __hash__(self):
        return hash(self.masks.tobytes())

    def __repr__(self):
        return f"DependencyMatrix(rows={self.rows()!r})"


class ComplementVector:
    """Per-cell complement flags (apply x -> 1 - x after averaging)."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError("bits must be 1-d")
        if bits.size and bits.max() > 1:
            raise ValueError("complement bits must be 0 or 1")
        self.bits = bits
        self.bits.flags.writeable = False

    @classmethod
    def zeros(cls, length: int):
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def ones(cls, length: int):
        return cls(np.ones(length, dtype=np.uint8))

    @property
    def length(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other):
        return isinstance(other, ComplementVector) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"ComplementVector({self.bits.tolist()!r})"


@dataclass(frozen=True)
class EvolutionParams:
    max_steps: int = 256
    epsilon: float = 1e-9
    quant_levels: int = 8

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")
        if self.quant_levels < 2:
            raise ValueError("need at least 2 quantization levels")


@dataclass(frozen=True, eq=False)
class AttractorId:
    """Quantized attractor identity.  Equality and hashing use the key only;
    ``kind`` records how the trajectory that produced it ended."""

    key: str
    kind: str = FIXED_POINT

    def __eq__(self, other):
        return isinstance(other, AttractorId) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


@dataclass(frozen=True)
class Trajectory:
    final: np.ndarray
    id: AttractorId
    steps: int
    status: str


def quantize(state, quant_levels: int) -> tuple[int, ...]:
    """Round each cell to the nearest of K equispaced levels; ties round up."""
    if quant_levels < 2:
        raise ValueError("need at least 2 quantization levels")
    return tuple(int(math.floor(x * (quant_levels - 1) + 0.5)) for x in state)


def attractor_key(state, quant_levels: int) -> str:
    return "|".join(str(v) for v in quantize(state, quant_levels))


def attractor_id(state, quant_levels: int, kind: str = FIXED_POINT) -> AttractorId:
    """Id of the basin containing ``state`` (configurations quantizing alike
    share one id)."""
    return AttractorId(attractor_key(state, quant_levels), kind)


def as_configuration(state) -> np.ndarray:
    """Validate and convert a cell-value sequence to a configuration array."""
    arr = np.ascontiguousarray(state, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("configuration must be 1-d")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("cell values must lie in [0, 1]")
    return arr


def _check_dims(T: DependencyMatrix, F: ComplementVector, length: int):
    if T.length != length or F.length != length:
        raise ValueError(
            f"dimension mismatch: T has {T.length} cells, F has {F.length}, state has {length}"
        )


def step(T: DependencyMatrix, F: ComplementVector, state) -> np.ndarray:
    """One synchronous update of a single configuration."""
    s = as_configuration(state)
    _check_dims(T, F, s.size)
    idx, cnt = T.to_arrays()
    return _kernel_py.step_batch(idx, cnt, F.bits, s[None, :])[0]


def evolve_batch(T: DependencyMatrix, F: ComplementVector, states, params: EvolutionParams | None = None):
    """Evolve many configurations (rows) at once with the active kernel.

    Returns raw arrays (finals, steps, status_codes); see STATUS name map in
    this module.  This is the hot path behind classifier fitting and genome
    scanning.
    """
    params = params or EvolutionParams()
    states = np.ascontiguousarray(states, dtype=np.float64)
    if states.ndim != 2:
        raise ValueError("states must be 2-d (configurations x cells)")
    _check_dims(T, F, states.shape[1])
    idx, cnt = T.to_arrays()
    impl = _IMPLS[_active_backend]
    return impl.evolve_batch(
        idx, cnt, F.bits, states, params.max_steps, params.epsilon, params.quant_levels
    )


def evolve(T: DependencyMatrix, F: ComplementVector, s0, params: EvolutionParams | None = None) -> Trajectory:
    """Evolve one configuration to its attractor."""
    params = params or EvolutionParams()
    s = as_configuration(s0)
    finals, steps, codes = evolve_batch(T, F, s[None, :], params)
    kind = _STATUS_NAMES[int(codes[0])]
    final = finals[0]
    return Trajectory(
        final=final,
        id=attractor_id(final, params.quant_levels, kind),
        steps=int(steps[0]),
        status=kind,
    )


#: exhaustive enumeration guard for enumerate_basins
MAX_GRID = 65536


def enumerate_basins(
    T: DependencyMatrix,
    F: ComplementVector,
    length: int,
    n: int,
    params: EvolutionParams | None = None,
) -> dict[AttractorId, set[tuple[float, ...]]]:
    """Partition the full n^L grid of configurations into basins.

    Every grid configuration is evolved; the result maps attractor ids to
    the sets of grid configurations draining into them.  Guarded to grids of
    at most 65536 configurations.
    """
    params = params or EvolutionParams()
    _check_dims(T, F, length)
    if n < 2:
        raise ValueError("need at least 2 grid levels")
    total = n**length
    if total > MAX_GRID:
        raise ValueError(f"grid too large: {n}^{length} > {MAX_GRID}")
    levels = np.array([j / (n - 1) for j in range(n)])
    digits = np.indices((n,) * length).reshape(length, total).T
    grid = levels[digits]
    finals, _, codes = evolve_batch(T, F, grid, params)
    basins: dict[AttractorId, set[tuple[float, ...]]] = {}
    for row in range(total):
        aid = attractor_id(finals[row], params.quant_levels, _STATUS_NAMES[int(codes[row])])
        basins.setdefault(aid, set()).add(tuple(grid[row]))
    return basins
