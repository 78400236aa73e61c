"""Published optimum vectors and the scanner HSC reference."""
from __future__ import annotations

from dataclasses import dataclass

from .model import PulseParams, SequenceConfig


class UnknownFixtureError(KeyError):
    pass


@dataclass(frozen=True)
class PublishedFixture:
    name: str
    params: PulseParams
    sequence: SequenceConfig
    note: str
    table_row: tuple[float, ...] | None = None
    edge_deweight: bool = False


# Published C-FOCI triples are listed with beta in the middle and mu/a_max in
# an order that varies between rows; a_max is the larger outer entry.
def _cfoci_from_row(row):
    first, beta, last = row
    return PulseParams.cfoci(a_max=max(first, last), mu=min(first, last), beta=beta)


_TABLE = {
    # (slice mm, length ms): (C-FOCI row, TR-FOCI row)
    (1, 13): ((1.43, 5.46, 3.64),
              (2.88, 0.52, 0.46, 0.45, 0.68, 1.00, 0.29, 2.33, 4.27, 0.10, 0.40)),
    (5, 13): ((1.67, 5.07, 17.14),
              (3.99, 0.28, 0.67, 0.11, 0.22, 0.09, 0.96, 5.83, 5.82, 0.14, 1.21)),
    (50, 13): ((19.8, 5.41, 1.45),
               (5.98, 0.32, 0.73, 0.18, 0.33, 0.81, 0.04, 4.9, 4.90, 0.00, 0.83)),
    (200, 5): ((21.87, 4.25, 2.15),
               (3.32, 0.30, 0.64, 0.27, 0.59, 0.00, 1.00, 7.71, 3.90, 0.25, 0.40)),
}


def _build():
    out = {}
    for (sl, ms), (cf_row, tr_row) in _TABLE.items():
        seq = SequenceConfig(pulse_length=ms / 1e3, slice_thickness=float(sl))
        wide = sl == 200
        out[f"trfoci_{sl}mm_{ms}ms"] = PublishedFixture(
            f"trfoci_{sl}mm_{ms}ms", PulseParams.trfoci(*tr_row), seq,
            f"optimum TR-FOCI, {sl} mm slab, {ms} ms", tr_row, wide)
        out[f"cfoci_{sl}mm_{ms}ms"] = PublishedFixture(
            f"cfoci_{sl}mm_{ms}ms", _cfoci_from_row(cf_row), seq,
            f"optimum C-FOCI, {sl} mm slab, {ms} ms", cf_row, wide)
    out["hsc_reference"] = PublishedFixture(
        "hsc_reference", PulseParams.hsc(mu=6.25, beta=4.5),
        SequenceConfig(pulse_length=13e-3, slice_thickness=5.0),
        "scanner-standard hyperbolic secant; profile independent of slab choice")
    return out


FIXTURES: dict[str, PublishedFixture] = _build()


def load_fixture(name: str, slice_thickness: float | None = None) -> PublishedFixture:
    """Look up a fixture by name, optionally overriding the slice thickness."""
    try:
        fx = FIXTURES[name]
    except KeyError:
        raise UnknownFixtureError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}") from None
    if slice_thickness is not None:
        fx = PublishedFixture(fx.name, fx.params, fx.sequence.replace(slice_thickness=slice_thickness),
                          fx.note, fx.table_row, fx.edge_deweight)
    return fx
