"""Optional PNG figures written next to the CSV/JSON output of a run."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def order_study_figure(study, path: Path) -> Path:
    plt = _pyplot()
    eps = np.asarray(study.epsilons)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for metric in ("residual_sup", "b_minus_b2", "A_minus_1", "G_sup", "momentum_with_A3"):
        ax.loglog(eps, [row[metric] for row in study.rows], "o-", label=metric)
    for order, style in ((3, ":"), (4, "--")):
        ax.loglog(eps, (eps / eps[0]) ** order * study.rows[0]["residual_sup"], "k" + style,
                  lw=0.8, label=f"eps^{order}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("sup norm")
    ax.set_title(f"{study.envelope} envelope, k = {study.k:g}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def packet_figure(packet, path: Path) -> Path:
    plt = _pyplot()
    z = packet.zeta_tilde.zeta
    fig, (a0, a1) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    a0.plot(z.real, z.imag, lw=0.6)
    a0.set_ylabel("Im zeta")
    a1.plot(packet.alpha, packet.b_tilde.values.real, lw=0.8)
    a1.set_ylabel("b")
    a1.set_xlabel("alpha / Re zeta")
    fig.suptitle(f"packet at epsilon = {packet.params.epsilon:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def nls_figure(x, numeric, exact, path: Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    sel = np.abs(x) <= 10
    ax.plot(x[sel], np.abs(numeric[sel]), label="split-step")
    ax.plot(x[sel], np.abs(exact[sel]), "--", label="exact")
    ax.set_xlabel("x")
    ax.set_ylabel("|B|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
