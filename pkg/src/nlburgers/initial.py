"""Initial-data descriptions.

Profiles are stored analytically so one description can be sampled on any
grid (needed when a scenario is rerun at a different resolution).  Two kinds
exist:

  sines   sum of amplitude * sin(wavenumber * x + phase) terms
  chirp   amplitude * sin(rate * x^2), sampled pointwise at the nodes

The chirp is not 2*pi-periodic; sampling it on the torus introduces a jump
at the seam whose broadband spectral content is intentional (it exercises
every mode).  Reduced fields are projected to zero mean after sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralGrid


class InitialSpecError(ValueError):
    """Malformed initial-data description."""


@dataclass(frozen=True)
class SineTerm:
    amplitude: float
    wavenumber: int
    phase: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.amplitude) or not np.isfinite(self.phase):
            raise InitialSpecError("sine term amplitude and phase must be finite")
        if isinstance(self.wavenumber, bool) or int(self.wavenumber) != self.wavenumber:
            raise InitialSpecError(f"wavenumber must be an integer, got {self.wavenumber!r}")
        object.__setattr__(self, "wavenumber", int(self.wavenumber))
        if self.wavenumber == 0:
            raise InitialSpecError("wavenumber 0 has no sine content")


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    terms: tuple[SineTerm, ...] = ()
    amplitude: float = 0.0
    chirp_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "sines":
            if not self.terms:
                raise InitialSpecError("sines initial data needs at least one term")
        elif self.kind == "chirp":
            if not np.isfinite(self.amplitude) or not np.isfinite(self.chirp_rate):
                raise InitialSpecError("chirp amplitude and rate must be finite")
        else:
            raise InitialSpecError(f"unknown initial-data kind {self.kind!r}")

    @classmethod
    def sines(cls, *terms: "SineTerm | tuple[float, int] | tuple[float, int, float]") -> "InitialSpec":
        parsed = tuple(
            term if isinstance(term, SineTerm) else SineTerm(*term) for term in terms
        )
        return cls(kind="sines", terms=parsed)

    @classmethod
    def chirp(cls, amplitude: float, rate: float) -> "InitialSpec":
        return cls(kind="chirp", amplitude=amplitude, chirp_rate=rate)

    def sample(self, grid: SpectralGrid) -> np.ndarray:
        """Raw node samples (no zero-mean projection)."""
        x = grid.nodes
        if self.kind == "sines":
            out = np.zeros(grid.n_nodes)
            for term in self.terms:
                out += term.amplitude * np.sin(term.wavenumber * x + term.phase)
            return out
        return self.amplitude * np.sin(self.chirp_rate * x**2)

    def to_obj(self):
        """JSON-compatible description (inverse of parse_initial)."""
        if self.kind == "sines":
            return {
                "kind": "sines",
                "terms": [[t.amplitude, t.wavenumber, t.phase] for t in self.terms],
            }
        return {"kind": "chirp", "amplitude": self.amplitude, "rate": self.chirp_rate}


def _parse_terms(raw) -> tuple[SineTerm, ...]:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise InitialSpecError("sines terms must be a non-empty list")
    terms = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) not in (2, 3):
            raise InitialSpecError(
                f"each sine term needs [amplitude, wavenumber(, phase)], got {item!r}"
            )
        terms.append(SineTerm(float(item[0]), item[1], float(item[2]) if len(item) == 3 else 0.0))
    return tuple(terms)


def _parse_text(text: str) -> InitialSpec:
    """Compact flag syntax: 'sine:AMP,K[,PHASE][;AMP,K[,PHASE]...]' or 'chirp:AMP,RATE'."""
    head, sep, body = text.partition(":")
    if not sep:
        raise InitialSpecError(
            f"initial data string must look like 'sine:-2,4' or 'chirp:-6,4', got {text!r}"
        )
    head = head.strip().lower()
    if head in ("sine", "sines"):
        terms = []
        for chunk in body.split(";"):
            parts = [p.strip() for p in chunk.split(",")]
            if len(parts) not in (2, 3):
                raise InitialSpecError(f"bad sine term {chunk!r} in {text!r}")
            terms.append(
                (float(parts[0]), int(parts[1]), float(parts[2]) if len(parts) == 3 else 0.0)
            )
        return InitialSpec.sines(*terms)
    if head == "chirp":
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 2:
            raise InitialSpecError(f"chirp needs 'chirp:AMP,RATE', got {text!r}")
        return InitialSpec.chirp(float(parts[0]), float(parts[1]))
    raise InitialSpecError(f"unknown initial-data kind {head!r}")


def parse_initial(raw) -> InitialSpec:
    """Build an InitialSpec from flag text, a JSON object, or a bare term list."""
    if isinstance(raw, InitialSpec):
        return raw
    if isinstance(raw, str):
        return _parse_text(raw)
    if isinstance(raw, (list, tuple)):
        return InitialSpec(kind="sines", terms=_parse_terms(raw))
    if isinstance(raw, dict):
        kind = raw.get("kind")
        if kind == "sines":
            extra = set(raw) - {"kind", "terms"}
            if extra:
                raise InitialSpecError(f"unknown keys in initial data: {sorted(extra)}")
            return InitialSpec(kind="sines", terms=_parse_terms(raw.get("terms")))
        if kind == "chirp":
            extra = set(raw) - {"kind", "amplitude", "rate"}
            if extra:
                raise InitialSpecError(f"unknown keys in initial data: {sorted(extra)}")
            return InitialSpec.chirp(float(raw["amplitude"]), float(raw["rate"]))
        raise InitialSpecError(f"initial data kind must be 'sines' or 'chirp', got {kind!r}")
    raise InitialSpecError(f"cannot interpret initial data {raw!r}")
