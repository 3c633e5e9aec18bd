"""Parameter recipes for the published figures and the plotting script emitted next to the datasets.

Caption values are taken verbatim; where captions are ambiguous the reading
used is listed in the recipe's `assumptions` and copied into the metadata.
"""
from dataclasses import dataclass
from typing import Literal

from src.services import bessel
from src.services.dynamics import SystemParams
from src.services.errors import InvalidInputError

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")
QGRID_THETA = 91
QGRID_PHI = 120

TYPO_ASSUMPTIONS = {
    "fig3": "caption lists 'Omega = 2.1 Omega' and 'Omega = 50 Omega'; read as 2.1 gamma and 50 gamma per the text",
    "fig4": "caption lists 'Omega = 0.5 Omega' in panel (e); read as 0.5 gamma",
}
OMEGA_ZERO_ASSUMPTION = "'Omega = 0' is read as modulation off, not as a static detuning d"


@dataclass(frozen=True)
class FigureSeries:
    key: str
    panel: str
    label: str
    params: SystemParams
    t_max: float
    sample_dt: float = 0.05
    snapshot: float | None = None
    # Exact d/Omega for Bessel-tuned series (d itself is ratio * Omega).
    ratio: float | None = None

    @property
    def d_over_omega(self) -> float:
        return self.ratio if self.ratio is not None else self.params.ratio


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    kind: Literal["q-grid", "sync"]
    title: str
    series: tuple[FigureSeries, ...]
    assumptions: tuple[str, ...] = ()
    phi: float = 0.0

    @property
    def panels(self) -> list[str]:
        seen: list[str] = []
        for item in self.series:
            if item.panel not in seen:
                seen.append(item.panel)
        return seen


def _params(lam: float, d: float = 0.0, omega: float | None = None) -> SystemParams:
    if omega is None:
        return SystemParams(lambda_=lam, d=d, omega=0.0, modulation_on=False)
    return SystemParams(lambda_=lam, d=d, omega=omega, modulation_on=True)


def _omega_label(omega: float | None) -> str:
    return "modulation off" if omega is None else f"Omega = {omega:g} gamma"


def _qgrid_series(panels, lam: float, ratios: dict[str, float] | None = None) -> tuple[FigureSeries, ...]:
    ratios = ratios or {}
    series = []
    for panel, d, omega, snapshot in panels:
        label = f"{_omega_label(omega)}, gamma t = {snapshot:g}"
        if omega is not None:
            label += f", d = {d:.6g} gamma"
        series.append(FigureSeries(
            key=panel, panel=panel, label=label, params=_params(lam, d, omega), t_max=snapshot, snapshot=snapshot,
            ratio=ratios.get(panel),
        ))
    return tuple(series)


def _fig2() -> FigureRecipe:
    lam, d = 3.0, 10.0
    panels = [("a", d, None, 0.0), ("b", d, None, 10.0), ("c", d, 0.001, 10.0), ("d", d, 100.0, 10.0)]
    return FigureRecipe(
        "fig2", "q-grid", "Husimi Q, weak coupling (lambda = 3 gamma, d = 10 gamma)",
        _qgrid_series(panels, lam), assumptions=(OMEGA_ZERO_ASSUMPTION,),
    )


def _fig3() -> FigureRecipe:
    lam, d = 0.01, 5.0
    panels = [
        ("a", d, None, 0.0), ("b", d, None, 100.0), ("c", d, 0.001, 100.0),
        ("d", d, 0.9, 100.0), ("e", d, 2.1, 100.0), ("f", d, 50.0, 100.0),
    ]
    return FigureRecipe(
        "fig3", "q-grid", "Husimi Q, strong coupling (lambda = 0.01 gamma, d = 5 gamma)",
        _qgrid_series(panels, lam), assumptions=(OMEGA_ZERO_ASSUMPTION, TYPO_ASSUMPTIONS["fig3"]),
    )


def _fig4() -> FigureRecipe:
    lam = 0.01
    ratio = bessel.jn_zero(0, 1)
    panels = [("a", 5.0, 0.05, 100.0), ("b", 5.0, 0.5, 100.0), ("c", 5.0, 5.0, 100.0)]
    panels += [(p, ratio * omega, omega, 100.0) for p, omega in (("d", 0.05), ("e", 0.5), ("f", 5.0))]
    return FigureRecipe(
        "fig4", "q-grid", "Husimi Q at gamma t = 100: d = 5 gamma vs d/Omega on the first zero of J_0",
        _qgrid_series(panels, lam, {p: ratio for p in "def"}), assumptions=(TYPO_ASSUMPTIONS["fig4"],),
    )


def _sync_series(entries, lam: float, t_max: float, sample_dt: float) -> tuple[FigureSeries, ...]:
    series = []
    for panel, d, omega in entries:
        key = f"{panel}_off" if omega is None else f"{panel}_omega{omega:g}"
        series.append(FigureSeries(
            key=key, panel=panel, label=_omega_label(omega), params=_params(lam, d, omega),
            t_max=t_max, sample_dt=sample_dt,
        ))
    return tuple(series)


def _fig5(t_max: float) -> FigureRecipe:
    entries = [("a", 0.0, None), ("a", 10.0, 0.001), ("b", 10.0, 1.0), ("c", 10.0, 100.0)]
    return FigureRecipe(
        "fig5", "sync", "S(0, t), weak coupling (lambda = 3 gamma, d = 10 gamma)",
        _sync_series(entries, 3.0, t_max, 0.01),
        assumptions=("caption does not list the modulated frequencies; Omega in {0.001, 1, 100} gamma is used",),
    )


def _fig6(t_max: float) -> FigureRecipe:
    entries = [("a", 0.0, None), ("a", 5.0, 0.001), ("b", 5.0, 50.0), ("c", 5.0, 0.9), ("d", 5.0, 2.1)]
    return FigureRecipe(
        "fig6", "sync", "S(0, t), strong coupling (lambda = 0.01 gamma, d = 5 gamma)",
        _sync_series(entries, 0.01, t_max, 0.05),
        assumptions=("panels (c) and (d) carry Omega = 0.9 and 2.1 gamma as named in the text",),
    )


def _fig7(t_max: float) -> FigureRecipe:
    series = []
    for panel, order in zip("abcd", range(4)):
        ratio = bessel.jn_zero(order, 1)
        for omega in (0.05, 0.5, 5.0):
            series.append(FigureSeries(
                key=f"{panel}_omega{omega:g}",
                panel=panel,
                label=f"d = {ratio:.6g} Omega [J_{order} zero], Omega = {omega:g} gamma",
                params=_params(0.01, ratio * omega, omega),
                t_max=t_max,
                ratio=ratio,
            ))
    return FigureRecipe(
        "fig7", "sync", "S(0, t) with d/Omega on the first zero of J_0..J_3 (lambda = 0.01 gamma)",
        tuple(series),
        assumptions=("caption does not list Omega values; Omega in {0.05, 0.5, 5} gamma follows the J_0 discussion",),
    )


def _fig8(t_max: float) -> FigureRecipe:
    omega = 5.0
    series = []
    for panel, k in zip("abcd", range(1, 5)):
        ratio = bessel.jn_zero(0, k)
        series.append(FigureSeries(
            key=panel,
            panel=panel,
            label=f"d = {ratio:.6g} Omega [J_0 zero {k}]",
            params=_params(0.1, ratio * omega, omega),
            t_max=t_max,
            sample_dt=0.02,
            ratio=ratio,
        ))
    return FigureRecipe(
        "fig8", "sync", "S(0, t) on the first four zeros of J_0 (Omega = 5 gamma, lambda = 0.1 gamma)",
        tuple(series),
    )


_SYNC_WINDOWS = {"fig5": 20.0, "fig6": 1000.0, "fig7": 500.0, "fig8": 500.0}


def figure_recipe(figure_id: str, t_max: float | None = None) -> FigureRecipe:
    """Recipe for a figure id; t_max overrides the window of S(phi, t) figures only."""
    if figure_id not in FIGURE_IDS:
        raise InvalidInputError(f"unknown figure id {figure_id!r}; valid ids: {', '.join(FIGURE_IDS)}")
    if t_max is not None and t_max <= 0:
        raise InvalidInputError("t_max override must be positive")
    if figure_id == "fig2":
        return _fig2()
    if figure_id == "fig3":
        return _fig3()
    if figure_id == "fig4":
        return _fig4()
    window = t_max if t_max is not None else _SYNC_WINDOWS[figure_id]
    return {"fig5": _fig5, "fig6": _fig6, "fig7": _fig7, "fig8": _fig8}[figure_id](window)


_SCRIPT_HEADER = '''"""Renders {figure_id} from the CSV datasets in this directory.

Generated by fmqsync; requires numpy and matplotlib.
"""
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent


def load(name):
    return np.loadtxt(HERE / name, delimiter=",", skiprows=1, ndmin=2)

'''

_SYNC_BODY = '''
PANELS = {panels!r}

fig, axes = plt.subplots(1, len(PANELS), figsize=(4 * len(PANELS), 3.2), squeeze=False)
for ax, (panel, curves) in zip(axes[0], PANELS):
    for name, label in curves:
        data = load(name)
        ax.plot(data[:, 0], data[:, 1], lw=1.0, label=label)
    ax.set_title("({{}})".format(panel))
    ax.set_xlabel(r"$\\gamma t$")
    ax.set_ylabel(r"$S(\\phi, t)$")
    ax.legend(fontsize=7)
fig.suptitle({title!r})
fig.tight_layout()
fig.savefig(HERE / "{figure_id}.png", dpi=150)
'''

_QGRID_BODY = '''
PANELS = {panels!r}

fig, axes = plt.subplots(1, len(PANELS), figsize=(3.6 * len(PANELS), 3.2), squeeze=False)
for ax, (panel, name, label) in zip(axes[0], PANELS):
    data = load(name)
    theta = np.unique(data[:, 0])
    phi = np.unique(data[:, 1])
    q = data[:, 2].reshape(theta.size, phi.size)
    mesh = ax.pcolormesh(phi, theta, q, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax)
    ax.set_title("({{}}) {{}}".format(panel, label), fontsize=8)
    ax.set_xlabel(r"$\\phi$")
    ax.set_ylabel(r"$\\theta$")
fig.suptitle({title!r})
fig.tight_layout()
fig.savefig(HERE / "{figure_id}.png", dpi=150)
'''


def render_plot_script(recipe: FigureRecipe, files: dict[str, str]) -> str:
    """matplotlib script drawing every panel of the recipe from `files` (series key -> CSV name)."""
    header = _SCRIPT_HEADER.format(figure_id=recipe.figure_id)
    if recipe.kind == "sync":
        panels = [
            (panel, [(files[s.key], s.label) for s in recipe.series if s.panel == panel])
            for panel in recipe.panels
        ]
        body = _SYNC_BODY.format(panels=panels, title=recipe.title, figure_id=recipe.figure_id)
    else:
        panels = [(s.panel, files[s.key], s.label) for s in recipe.series]
        body = _QGRID_BODY.format(panels=panels, title=recipe.title, figure_id=recipe.figure_id)
    return header + body
