"""Render diagnostic figures from the experiment CSV files."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def _column(rows, idx, cast=float):
    return np.array([cast(r[idx]) for r in rows if r[idx] != ""])


def render_bounds(data_dir, fig_dir) -> None:
    _, rows = _read_csv(os.path.join(data_dir, "bounds_summary.csv"))
    ns = _column(rows, 0)
    sups = _column(rows, 1)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(ns, sups, "o-", label="sup over k of the exact gap")
    ax.loglog(ns, sups[0] * ns[0] / ns, "--", color="gray", label="slope -1 reference")
    ax.set_xlabel("n")
    ax.set_ylabel("sup gap")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(fig_dir, "bounds.png"), dpi=120)
    plt.close(fig)


def render_rates(data_dir, fig_dir) -> None:
    _, rows = _read_csv(os.path.join(data_dir, "rates.csv"))
    bs = _column(rows, 0)
    bias = _column(rows, 1)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(bs, bias, "o-")
    ax.set_xlabel("bandwidth")
    ax.set_ylabel("sup-grid bias")
    fig.tight_layout()
    fig.savefig(os.path.join(fig_dir, "rates.png"), dpi=120)
    plt.close(fig)


def render_clt(data_dir, fig_dir) -> None:
    _, rows = _read_csv(os.path.join(data_dir, "clt.csv"))
    emp = _column(rows, 1)
    theory = _column(rows, 2)
    fig, ax = plt.subplots(figsize=(5, 4))
    lim = 1.1 * max(np.abs(emp).max(), np.abs(theory).max())
    ax.plot([-lim, lim], [-lim, lim], "--", color="gray")
    ax.plot(theory, emp, "o")
    ax.set_xlabel("theoretical covariance entry")
    ax.set_ylabel("empirical covariance entry")
    fig.tight_layout()
    fig.savefig(os.path.join(fig_dir, "clt.png"), dpi=120)
    plt.close(fig)


def render_mixing(data_dir, fig_dir) -> None:
    _, rows = _read_csv(os.path.join(data_dir, "mixing.csv"))
    lags = _column(rows, 0)
    values = _column(rows, 1)
    bounds = _column(rows, 2)
    fig, ax = plt.subplots(figsize=(5, 4))
    keep = values > 0
    ax.semilogy(lags[keep], values[keep], "o-", label="exact")
    if len(bounds):
        ax.semilogy(lags[:len(bounds)], bounds, "--", label="geometric bound")
    ax.set_xlabel("lag j")
    ax.set_ylabel("mixing coefficient")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(fig_dir, "mixing.png"), dpi=120)
    plt.close(fig)


def render_certify(data_dir, fig_dir) -> None:
    _, rows = _read_csv(os.path.join(data_dir, "certify.csv"))
    names = [r[0] for r in rows]
    values = [float(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.barh(names, values)
    ax.set_xscale("log")
    ax.set_xlabel("certificate constant value")
    fig.tight_layout()
    fig.savefig(os.path.join(fig_dir, "certify.png"), dpi=120)
    plt.close(fig)


RENDERERS = {
    "bounds": render_bounds,
    "rates": render_rates,
    "clt": render_clt,
    "mixing": render_mixing,
    "certify": render_certify,
}


def render_all(experiment: str, data_dir, fig_dir) -> None:
    os.makedirs(fig_dir, exist_ok=True)
    RENDERERS[experiment](data_dir, fig_dir)
