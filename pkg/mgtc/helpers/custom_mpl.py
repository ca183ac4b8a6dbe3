"""
House :mod:`matplotlib` parameters for the figures.
"""
import numpy as np

from mgtc.helpers import palette as mpalette


def custom_rc(rc=None):
    """
    Build the ``rcParams`` overlay used by every figure.

    :param rc: An optional dict to overload some :mod:`matplotlib` rc params.
    :returns: A dict to pass to ``matplotlib.pyplot.rc_context``.
    """
    custom_rc_ = {"font.family": "sans-serif"}
    custom_rc_.update(_rc_scaling())
    custom_rc_.update(_rc_axes_style())
    if rc is not None:
        custom_rc_.update(rc)
    return custom_rc_


def _rc_scaling():
    """
    Font sizes and line widths, tuned for small multi-panel figures.

    :returns: a :mod:`matplotlib` ``rcParams``-like dict.
    """
    return {
        "figure.figsize": np.array([8, 5.5]),
        "font.size": 11,
        "axes.labelsize": 10,
        "axes.titlesize": 12,
        "xtick.labelsize": 9,
        "ytick.labelsize": 9,
        "legend.fontsize": 9,
        "grid.linewidth": 1,
        "lines.linewidth": 1.5,
        "lines.markersize": 5,
        "errorbar.capsize": 3,
        "xtick.major.width": 0,
        "ytick.major.width": 0,
        "xtick.major.pad": 6,
        "ytick.major.pad": 6,
    }


def _rc_axes_style():
    """
    Gray background, white grid and the subtask palette as color cycle.

    :returns: a :mod:`matplotlib` ``rcParams``-like dict.
    """
    dark_gray = ".15"
    return {
        "figure.facecolor": "white",
        "text.color": dark_gray,
        "axes.prop_cycle": mpalette.build_cycler_palette(
            mpalette.subtask_colors(mpalette.SUBTASKS)),
        "legend.frameon": False,
        "legend.numpoints": 1,
        "xtick.color": dark_gray,
        "ytick.color": dark_gray,
        "axes.axisbelow": True,
        "axes.linewidth": 0,
        "axes.labelcolor": dark_gray,
        "axes.grid": True,
        "axes.facecolor": "EAEAF2",
        "axes.edgecolor": "white",
        "grid.linestyle": "-",
        "grid.color": "white",
    }
