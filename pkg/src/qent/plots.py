"""Figure rendering for reports and sweeps (written next to the data files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def spectrum_figure(report, path: str) -> None:
    """Entanglement spectra of the state and vacuum reductions."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, values, marker in (
        ("state", report.state_entanglement_spectrum, "o"),
        ("vacuum", report.vacuum_entanglement_spectrum, "s"),
    ):
        if len(values):
            ax.plot(range(len(values)), values, marker, ms=4, ls="none", label=label)
    ax.set_xlabel("level index")
    ax.set_ylabel(r"$-\log \lambda$")
    ax.set_title(f"entanglement spectrum, region sites {list(report.region_sites)}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_figure(parameter: str, values, records, path: str) -> None:
    """Residuals (and overlap, when available) against the swept value."""
    numeric = all(isinstance(v, (int, float)) for v in values)
    xs = np.asarray(values, dtype=float) if numeric else np.arange(len(values))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    orders = sorted({n for r in records if r.error is None for n in r.deltas})
    for n in orders:
        ys = [r.deltas.get(n, np.nan) if r.error is None else np.nan for r in records]
        label = f"$\\Delta_{{{int(n) if float(n).is_integer() else n}}}$"
        ax.plot(xs, ys, "o-", ms=4, label=label)
    overlaps = [r.overlap_abs if r.error is None else None for r in records]
    if any(o is not None for o in overlaps):
        ys = [o if o is not None else np.nan for o in overlaps]
        ax.plot(xs, ys, "k--", lw=1, label="|overlap|")
    finite = [
        v
        for r in records
        if r.error is None
        for v in list(r.deltas.values()) + ([r.overlap_abs] if r.overlap_abs else [])
    ]
    if finite and min(finite) > 0:
        ax.set_yscale("log")
    if not numeric:
        ax.set_xticks(xs)
        ax.set_xticklabels([str(v) for v in values])
    ax.set_xlabel(parameter)
    ax.set_ylabel("residual (nats)")
    ax.set_title(f"{parameter} sweep")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
