"""Render experiment CSVs to matplotlib figures.

Figures are a convenience by-product of the report path: the CSV remains the
normative output.  One panel per randsvd mode, log-log axes, one marker series
per method or solver variant, dashed black line for the theoretical envelope
or bound.
"""

from __future__ import annotations

import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .experiments import read_records  # noqa: E402

_MARKERS = {
    "hhqr": "^",
    "mgs": "D",
    "ns": "x",
    "tridiag": "*",
    "jacobi": "x",
    "mp2": "^",
    "mp3": "D",
}

_COLORS = {
    "hhqr": "tab:blue",
    "mgs": "tab:orange",
    "ns": "tab:olive",
    "tridiag": "tab:purple",
    "jacobi": "tab:olive",
    "mp2": "tab:blue",
    "mp3": "tab:orange",
}


def _panels(modes, title):
    ncols = min(len(modes), 3)
    nrows = math.ceil(len(modes) / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.4 * nrows),
                             squeeze=False)
    fig.suptitle(title)
    return fig, [axes[i // ncols][i % ncols] for i in range(len(modes))]


def _finite(pairs):
    return [(x, y) for x, y in pairs if math.isfinite(x) and math.isfinite(y) and y > 0]


def render_off_figure(csv_path, fig_path) -> None:
    """off(Atilde)/||A||_F against n, one panel per mode, with the envelope."""
    records = [r for r in read_records(csv_path) if r["experiment"] == "off"]
    if not records:
        raise ValueError(f"no off-experiment records in {csv_path}")
    modes = sorted({r["mode"] for r in records})
    fig, axes = _panels(modes, "off-quantity of the preconditioned matrix")
    for ax, mode in zip(axes, modes):
        sub = [r for r in records if r["mode"] == mode]
        by_method = defaultdict(list)
        for r in sub:
            by_method[r["method"]].append((r["n"], r["off_ratio"]))
        for method, pts in by_method.items():
            pts = _finite(sorted(pts))
            if pts:
                ax.loglog(*zip(*pts), linestyle="none",
                          marker=_MARKERS.get(method, "o"),
                          color=_COLORS.get(method), label=method)
        env = _finite(sorted({(r["n"], r["off_envelope"]) for r in sub}))
        if env:
            ax.loglog(*zip(*env), "k--", label=r"$5\sqrt{n}\,u_\ell$")
        ax.set_title(f"mode {mode}")
        ax.set_xlabel("n")
        ax.set_ylabel(r"off$(\tilde A)/\|A\|_F$")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)


def render_fwd_figure(csv_path, fig_path, x_field: str) -> None:
    """Max relative forward error against kappa or n, plus the 7n*kappaS*u bound."""
    records = [r for r in read_records(csv_path)
               if r["experiment"].startswith("fwd")]
    if not records:
        raise ValueError(f"no forward-error records in {csv_path}")
    modes = sorted({r["mode"] for r in records})
    xlabel = r"$\kappa_2(A)$" if x_field == "kappa_target" else "n"
    fig, axes = _panels(modes, "maximum relative forward error")
    for ax, mode in zip(axes, modes):
        sub = [r for r in records if r["mode"] == mode]
        by_variant = defaultdict(list)
        for r in sub:
            by_variant[r["method"]].append((r[x_field], r["max_fwd_err"]))
        for variant, pts in by_variant.items():
            pts = _finite(sorted(pts))
            if pts:
                ax.loglog(*zip(*pts), linestyle="none",
                          marker=_MARKERS.get(variant, "o"),
                          color=_COLORS.get(variant), label=variant)
        bound = _finite(sorted((r[x_field], r["bound_7n_kappaS_u"]) for r in sub))
        if bound:
            ax.loglog(*zip(*bound), "k--", label=r"$7n\,\kappa_2^S(\tilde A)\,u$")
        ax.set_title(f"mode {mode}")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(r"$\max_k \epsilon_k$")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)


def render_cond_figure(csv_path, fig_path) -> None:
    """Scaled condition numbers of A and Atilde relative to kappa_2(A)."""
    records = [r for r in read_records(csv_path)
               if r["experiment"] == "cond-reduction" and r["matrix"] == "randsvd"]
    if not records:
        raise ValueError(f"no randsvd cond-reduction records in {csv_path}")
    modes = sorted({r["mode"] for r in records})
    fig, axes = _panels(modes, "scaled condition number reduction")
    for ax, mode in zip(axes, modes):
        sub = sorted((r for r in records if r["mode"] == mode),
                     key=lambda r: r["kappa2_A"])
        xs = [r["kappa2_A"] for r in sub]
        ax.loglog(xs, [r["kappaS_A"] / r["kappa2_A"] for r in sub],
                  "^", color="tab:blue", label=r"$\kappa_2^S(A)/\kappa_2(A)$")
        ax.loglog(xs, [r["kappaS_At"] / r["kappa2_A"] for r in sub],
                  "D", color="tab:orange",
                  label=r"$\kappa_2^S(\tilde A)/\kappa_2(A)$")
        ax.set_title(f"mode {mode}")
        ax.set_xlabel(r"$\kappa_2(A)$")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
