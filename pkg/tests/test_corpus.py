from __future__ import annotations

from importlib import resources

import numpy as np
import pytest

from spectrakit import corpus as cp
from spectrakit import func_model as fm
from spectrakit import spectra as sp
from spectrakit.errors import PrecondError

ENTRIES = cp.standard_corpus()
GRID = sp.FrequencyGrid(-3.0, 3.0, 0.05)
# estimators quick enough for a per-entry sweep in the unit tests; the rest is
# covered by the suites and the acceptance tests
FAST_KINDS = ("Laplace", "WeakLaplace", "Carleman", "Beurling")


def test_shipped_json_is_canonical():
    text = resources.files("spectrakit").joinpath("data/corpus.json").read_text()
    assert text == cp.corpus_json()


def test_round_trip():
    loaded = cp.load_corpus()
    assert [e.name for e in loaded] == [e.name for e in ENTRIES]
    for a, b in zip(loaded, ENTRIES):
        assert fm.equivalent(a.descriptor, b.descriptor)
        assert a.known_spectra.keys() == b.known_spectra.keys()


def test_version_checked():
    with pytest.raises(PrecondError):
        cp.load_corpus('{"version": 99, "entries": []}')


def test_provenance_everywhere():
    for e in ENTRIES:
        assert e.provenance
        for known in e.known_spectra.values():
            assert known.provenance


def test_required_entries_present():
    names = {e.name for e in ENTRIES}
    assert {"gamma_0", "gamma_1", "trig_1_sqrt2", "chirp", "te_it", "psi"} <= names
    with pytest.raises(KeyError):
        cp.get_entry("missing")


class TestKnownMask:
    def test_finite_set_slack(self):
        must, may = cp.Known([cp.SQRT2], "x").mask(GRID)
        assert must.sum() == 1 and may.sum() == 2

    def test_interval_margin(self):
        must, may = cp.Known({"interval": [-1.0, 1.0], "edge_margin": 0.2}, "x").mask(GRID)
        assert may.sum() > must.sum()
        assert not must[GRID.nearest_index(0.9)] and must[GRID.nearest_index(0.0)]


@pytest.mark.parametrize("entry,kind", [(e, k) for e in ENTRIES for k in FAST_KINDS
                                        if k in e.known_spectra],
                         ids=lambda v: v.name if isinstance(v, cp.CorpusEntry) else v)
def test_known_spectra(entry, kind):
    est = sp.estimate(entry.descriptor, kind, GRID)
    must, may = entry.known_spectra[kind].mask(GRID)
    cls = np.array(est.classification)
    sing = cls == sp.SINGULAR
    missing = must & (cls == sp.REGULAR)
    assert not missing.any(), GRID.points[missing]
    assert not (sing & ~may).any(), GRID.points[sing & ~may]
    assert est.fraction(sp.UNDECIDED) <= 0.1
