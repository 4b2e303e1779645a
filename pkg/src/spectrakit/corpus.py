"""The standard corpus: descriptors paired with their analytically known spectra.

Each expected set is one of

* ``"empty"`` / ``"all"``;
* a finite list of frequencies;
* ``{"interval": [lo, hi]}`` — a closed band (Fourier support of an
  integrable or band-limited entry).

The corpus is shipped as ``data/corpus.json``; :func:`corpus_json` rebuilds
the exact text so tests can diff the two.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import func_model as fm
from . import kernels as kn
from .errors import PrecondError
from .spectra import FrequencyGrid

SQRT2 = math.sqrt(2.0)
CORPUS_VERSION = 1
ALL_KINDS = ("Laplace", "WeakLaplace", "Carleman", "Beurling", "ReducedBeurlingC0",
             "UniformLaplace", "UniformCarleman")


@dataclass(frozen=True)
class Known:
    """An expected Singular set with its justification."""

    value: object
    provenance: str

    def to_json_obj(self) -> dict:
        return {"set": self.value, "provenance": self.provenance}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Known":
        return cls(obj["set"], str(obj["provenance"]))

    def mask(self, grid: FrequencyGrid, slack: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
        """``(must, may)`` boolean masks over the grid.

        ``must`` marks nodes that have to be Singular; ``may`` marks nodes
        allowed to be Singular (within ``slack`` grid steps of the set).
        Interval end points are soft: nodes within ``slack`` steps of an
        end may go either way, and so may nodes where the transform of a
        band-limited entry is tiny near the band edge (``edge_margin``).
        """
        pts = grid.points
        tol = slack * grid.step * (1 + 1e-9)
        v = self.value
        if v == "empty":
            return np.zeros(pts.size, bool), np.zeros(pts.size, bool)
        if v == "all":
            return np.ones(pts.size, bool), np.ones(pts.size, bool)
        if isinstance(v, dict):
            lo, hi = v["interval"]
            margin = float(v.get("edge_margin", 0.0))
            may = (pts >= lo - tol) & (pts <= hi + tol)
            must = (pts >= lo + margin + tol) & (pts <= hi - margin - tol)
            return must, may
        freqs = np.asarray(v, dtype=float)
        near = np.abs(pts[:, None] - freqs[None, :]) <= 0.5 * grid.step * (1 + 1e-9)
        must = near.any(axis=1)
        may = (np.abs(pts[:, None] - freqs[None, :]) <= tol).any(axis=1) if freqs.size else must
        return must, may


@dataclass(frozen=True)
class CorpusEntry:
    """A named descriptor with its known spectra.

    Attributes
    ----------
    name : str
    descriptor : FunctionDescriptor
    known_spectra : dict
        ``kind → Known``; kinds without an entry are not asserted.
    provenance : str
    tags : tuple of str
        ``"ap"`` for trigonometric polynomials, ``"unbounded"``, ...
    """

    name: str
    descriptor: fm.FunctionDescriptor
    known_spectra: dict
    provenance: str
    tags: tuple = field(default=())

    def to_json_obj(self) -> dict:
        return {"name": self.name, "descriptor": fm.to_json_obj(self.descriptor),
                "known_spectra": {k: self.known_spectra[k].to_json_obj()
                                  for k in ALL_KINDS if k in self.known_spectra},
                "provenance": self.provenance, "tags": list(self.tags)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "CorpusEntry":
        return cls(str(obj["name"]), fm.from_json_obj(obj["descriptor"]),
                   {k: Known.from_json_obj(v) for k, v in obj["known_spectra"].items()},
                   str(obj["provenance"]), tuple(obj.get("tags", ())))


def _same(value, prov: str, kinds=ALL_KINDS) -> dict:
    return {k: Known(value, prov) for k in kinds}


_POLE = "closed form: simple pole of the transform at each frequency present"
_CHIRP_L = "entire Laplace transform (Faddeeva closed form)"
_CHIRP_C = "Fourier transform √π e^{iπ/4} e^{-iξ²/4} vanishes nowhere"
_C0 = "filtered function decays at infinity"


def _chirp_like(prov: str, laplace_empty: str) -> dict:
    out = {k: Known("empty", laplace_empty) for k in ("Laplace", "WeakLaplace", "UniformLaplace")}
    out.update({k: Known("all", prov) for k in ("Carleman", "Beurling", "UniformCarleman")})
    out["ReducedBeurlingC0"] = Known("empty", _C0)
    return out


def _band(lo: float, hi: float, prov: str, margin: float) -> Known:
    return Known({"interval": [lo, hi], "edge_margin": margin}, prov)


def _integrable(lo: float, hi: float, margin: float) -> dict:
    prov = "integrable: singular set is the Fourier support"
    out = {k: Known("empty", "integrable: transform continuous up to the axis")
           for k in ("Laplace", "WeakLaplace", "UniformLaplace")}
    out.update({k: _band(lo, hi, prov, margin) for k in ("Carleman", "Beurling", "UniformCarleman")})
    out["ReducedBeurlingC0"] = Known("empty", "integrable functions vanish at infinity")
    return out


def standard_corpus() -> list:
    """The curated corpus, in a fixed order."""
    chirp = fm.chirp()
    tp = fm.trig_poly([(1.0, 1.0), (SQRT2, 1.0)])
    psi = fm.l1_kernel(kn.make_psi())
    bp = kn.band_pass(1.0, 0.5)
    bp3 = kn.band_pass(1.0, 0.3)
    mk = fm.make
    full, half = fm.Domain.FULL_LINE, fm.Domain.HALF_LINE
    entries = [
        CorpusEntry("gamma_0", fm.character(0.0), _same([0.0], _POLE),
                    "constant function", ("ap",)),
        CorpusEntry("gamma_1", fm.character(1.0), _same([1.0], _POLE),
                    "character e^{it}", ("ap",)),
        CorpusEntry("gamma_-2.5", fm.character(-2.5), _same([-2.5], _POLE),
                    "character e^{-2.5it}", ("ap",)),
        CorpusEntry("trig_1_sqrt2", tp, _same([1.0, SQRT2], _POLE),
                    "non-commensurate trigonometric polynomial e^{it} + e^{i√2t}", ("ap",)),
        CorpusEntry("gamma_2_half", fm.character(2.0, domain=half),
                    _same([2.0], _POLE, ("Laplace", "WeakLaplace", "ReducedBeurlingC0",
                                         "UniformLaplace")),
                    "character e^{2it} on the half-line", ("ap", "half")),
        CorpusEntry("chirp", chirp, _chirp_like(_CHIRP_C, _CHIRP_L),
                    "chirp e^{it²}: transform continues across the axis, two-sided jump never vanishes",
                    ()),
        CorpusEntry("te_it", fm.linear_chirp(), {"Beurling": Known([1.0], "t e^{it}: filters vanishing at 1 annihilate it")},
                    "unbounded linear chirp t e^{it}", ("unbounded",)),
        CorpusEntry("psi", psi, _integrable(-2.0, 2.0, 0.3),
                    "integrable kernel with transform supported on [-2, 2]", ("integrable",)),
        CorpusEntry("mollified_chirp_0.5", mk(fm.mollify_body(chirp.body, 0.5), 1, full),
                    _chirp_like("transform of the chirp times g(iξh), zeros isolated", _CHIRP_L),
                    "sliding average of the chirp, h = 0.5", ()),
        CorpusEntry("mollified_chirp_1", mk(fm.mollify_body(chirp.body, 1.0), 1, full),
                    _chirp_like("transform of the chirp times g(iξh), zeros isolated", _CHIRP_L),
                    "sliding average of the chirp, h = 1", ()),
        CorpusEntry("chirp_conv_bp", mk(fm.convolve_body(chirp.body, bp.id), 1, full),
                    {**{k: Known("empty", "convolution with an integrable kernel keeps the transform entire")
                        for k in ("Laplace", "WeakLaplace", "UniformLaplace")},
                     **{k: _band(0.5, 1.5, "chirp spectrum cut to the kernel band", 0.15)
                        for k in ("Carleman", "Beurling", "UniformCarleman")},
                     "ReducedBeurlingC0": Known("empty", _C0)},
                    "chirp filtered by band_pass(1, 0.5)", ()),
        CorpusEntry("trig_conv_bp", mk(fm.convolve_body(tp.body, bp3.id), 1, full),
                    _same([1.0], "√2 lies outside the band [0.7, 1.3]; pole at 1 survives"),
                    "trigonometric polynomial filtered by band_pass(1, 0.3)", ("ap",)),
        CorpusEntry("gamma_1_conv_psi", mk(fm.convolve_body(fm.character(1.0).body, kn.make_psi().id), 1, full),
                    _same([1.0], _POLE), "character filtered by psi", ("ap",)),
        CorpusEntry("chirp_translate_1", fm.translate(chirp, 1.0), _chirp_like(_CHIRP_C, _CHIRP_L),
                    "chirp translated by 1", ()),
        CorpusEntry("gamma_1_translate_10", fm.translate(fm.character(1.0), 10.0),
                    _same([1.0], _POLE), "character translated by 10", ("ap",)),
        CorpusEntry("trig_translate_1", fm.translate(tp, 1.0), _same([1.0, SQRT2], _POLE),
                    "trigonometric polynomial translated by 1", ("ap",)),
    ]
    return entries


def corpus_json(entries=None) -> str:
    """Canonical JSON text of the corpus (what ``data/corpus.json`` holds)."""
    entries = standard_corpus() if entries is None else entries
    obj = {"version": CORPUS_VERSION, "entries": [e.to_json_obj() for e in entries]}
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def load_corpus(text: str | None = None) -> list:
    """Parse corpus JSON; defaults to the shipped ``data/corpus.json``."""
    if text is None:
        text = resources.files("spectrakit").joinpath("data/corpus.json").read_text()
    obj = json.loads(text)
    if obj.get("version") != CORPUS_VERSION:
        raise PrecondError(f"unsupported corpus version {obj.get('version')!r}")
    return [CorpusEntry.from_json_obj(e) for e in obj["entries"]]


def get_entry(name: str, entries=None) -> CorpusEntry:
    for e in standard_corpus() if entries is None else entries:
        if e.name == name:
            return e
    raise KeyError(f"no corpus entry named {name!r}")


__all__ = ["Known", "CorpusEntry", "standard_corpus", "corpus_json", "load_corpus", "get_entry",
           "ALL_KINDS", "SQRT2"]
