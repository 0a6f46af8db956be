"""Optional figure rendering for the report path of the CLI.

Figures are rendered to files next to the delimited output when the CLI
is invoked with --plot; nothing here is needed for the numeric results.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_pmf(estimates, analytic=None, path="pmf.png"):
    """Load-distribution frequencies vs. processing gain.

    `estimates` is a list of PmfEstimate; `analytic` optionally maps
    N -> TwoUserPmf for the K = 2 closed forms (drawn as lines).
    """
    Ns = [e.N for e in estimates]
    K = len(estimates[0].counts) - 1
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for m in range(K + 1):
        ax.plot(Ns, [e.freqs[m] for e in estimates], "o", label=f"{m} users on carrier 1")
    ax.plot(Ns, [e.none_freq for e in estimates], "s", label="no equilibrium")
    if analytic:
        for m, key in enumerate(("p0", "p1", "p2")):
            ax.plot(Ns, [getattr(analytic[n], key) for n in Ns], "-", color="gray", lw=0.8)
        ax.plot(Ns, [analytic[n].p_none for n in Ns], "--", color="gray", lw=0.8)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("processing gain N")
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_compare(results, path="compare.png"):
    """Mean total utility vs. number of users, both strategies."""
    Ks = [r.K for r in results]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.plot(Ks, [r.mean_joint for r in results], "o-", label="joint (single best carrier)")
    ax.plot(Ks, [r.mean_independent for r in results], "s--", label="independent per carrier")
    ax.set_yscale("log")
    ax.set_xlabel("number of users K")
    ax.set_ylabel("mean total utility (bits/Joule)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
