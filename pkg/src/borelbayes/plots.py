"""Figure rendering for the report commands.

Figures are written straight to files next to the delimited output; the
CSVs remain the authoritative data.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

plt.rcParams.update(
    {
        "figure.figsize": (7.0, 4.5),
        "figure.dpi": 140,
        "savefig.bbox": "tight",
        "axes.grid": True,
        "grid.alpha": 0.3,
    }
)


def save_estimates_figure(path, xs, eb_values, mono_values, bayes_values, n, r):
    """Estimate curves from one simulated history: EB, monotone EB, Bayes."""
    fig, ax = plt.subplots()
    ax.plot(xs, eb_values, "o", ms=4, color="#d62728", alpha=0.8, label="EB")
    ax.step(xs, mono_values, where="mid", lw=2, color="#1f77b4", label="monotone EB")
    ax.plot(xs, bayes_values, lw=2, color="#2ca02c", label="Bayes")
    ax.set_xlabel("observed total progeny x")
    ax.set_ylabel("estimate of the reproduction number")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"Estimates from one simulated history (n={n}, r={r})")
    ax.legend(loc="lower right")
    fig.savefig(path)
    plt.close(fig)


def save_study_figure(path, rows, s_mle, bayes_risk_value):
    """Regret vs history size: EB and monotone EB with standard errors.

    ``rows`` is a list of (n, s_eb_mean, s_eb_se, s_mono_mean, s_mono_se).
    """
    fig, ax = plt.subplots()
    ns = [row[0] for row in rows]
    ax.errorbar(
        ns,
        [row[1] for row in rows],
        yerr=[row[2] for row in rows],
        fmt="o-",
        capsize=4,
        color="#d62728",
        label="EB regret",
    )
    ax.errorbar(
        ns,
        [row[3] for row in rows],
        yerr=[row[4] for row in rows],
        fmt="s-",
        capsize=4,
        color="#1f77b4",
        label="monotone EB regret",
    )
    ax.axhline(s_mle, color="#7f7f7f", ls="--", label=f"MLE regret = {s_mle:.4f}")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xlabel("history size n")
    ax.set_ylabel("regret risk")
    ax.set_title(f"Regret vs history size (Bayes risk = {bayes_risk_value:.4f})")
    ax.set_xticks(ns)
    ax.legend()
    fig.savefig(path)
    plt.close(fig)
