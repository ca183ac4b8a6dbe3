"""
Figures: training curves and k-fold accuracy curves.
"""
import logging
import math
import os

import matplotlib as mpl
# Use "agg" backend automatically if no display is available.
try:
    os.environ["DISPLAY"]
except KeyError:
    mpl.use("agg")
import matplotlib.pyplot as plt
import pandas as pd

from mgtc import exceptions as exc
from mgtc.evaluator.kfold import SUBTASKS, summarize
from mgtc.helpers import custom_mpl
from mgtc.helpers import palette as mpalette

logger = logging.getLogger(__name__)

_PHASE_STYLES = {"coarse": "-", "fine": "--"}


def optimal_grid(nb_items):
    """
    (Naive) attempt to find an optimal grid layout for N elements.

    :param nb_items: The number of square elements to put on the grid.
    :returns: A tuple ``(height, width)`` containing the number of rows and \
            the number of cols of the resulting grid.

    >>> optimal_grid(3)
    (1, 3)

    >>> optimal_grid(4)
    (2, 2)
    """
    if nb_items < 1:
        raise exc.InvalidParameterError("A grid needs at least one item.")
    height1 = math.floor(math.sqrt(nb_items))
    width1 = math.ceil(nb_items / height1)

    width2 = math.ceil(math.sqrt(nb_items))
    height2 = math.ceil(nb_items / width2)

    # Minimize the number of empty cells
    if height1 * width1 < height2 * width2:
        return (height1, width1)
    return (height2, width2)


class Panel():
    """
    One subplot. Plot commands are recorded and replayed at render time.
    """
    def __init__(self, title="", xlabel="", ylabel="", yrange=None):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.yrange = yrange
        self.commands = []

    def plot(self, *args, **kwargs):
        self.commands.append(("plot", args, kwargs))

    def errorbar(self, *args, **kwargs):
        self.commands.append(("errorbar", args, kwargs))

    def draw(self, axis):
        for method, args, kwargs in self.commands:
            getattr(axis, method)(*args, **kwargs)
        axis.set_title(self.title)
        axis.set_xlabel(self.xlabel)
        axis.set_ylabel(self.ylabel)
        if self.yrange is not None:
            axis.set_ylim(*self.yrange)
        if any("label" in kwargs for _, _, kwargs in self.commands):
            axis.legend(loc="best")


class Figure():
    """
    A figure made of panels laid out on an automatic grid. Can be used \
            directly or in a ``with`` statement, in which case it is saved \
            when leaving the block without error.

    :param title: Title of the figure (optional).
    :param savepath: A path to save the image to (optional).
    :param custom_mpl_rc: An optional dict to overload some \
            :mod:`matplotlib` rc params.

    >>> with Figure(savepath="curves.png") as fig:
    ...     fig.add_panel(title="Loss").plot([1, 2, 3], [3, 2, 1])
    """
    def __init__(self, title="", savepath=None, custom_mpl_rc=None):
        self.title = title
        self.savepath = savepath
        self.custom_mpl_rc = custom_mpl_rc
        self.panels = []

    def __enter__(self):
        return self

    def __exit__(self, exception_type, exception_value, traceback):
        # Do not render the figure if an exception was raised
        if exception_type is None and self.savepath is not None:
            self.save()

    def add_panel(self, **kwargs):
        """
        Add a subplot. ``kwargs`` are passed to :class:`Panel`.

        :returns: The new :class:`Panel`.
        """
        panel = Panel(**kwargs)
        self.panels.append(panel)
        return panel

    def render(self):
        """
        Actually render the figure.

        :returns: A :mod:`matplotlib` figure object.
        """
        if not self.panels:
            raise exc.InvalidParameterError("Nothing to draw.")
        with plt.rc_context(rc=custom_mpl.custom_rc(rc=self.custom_mpl_rc)):
            height, width = optimal_grid(len(self.panels))
            figure, axes = plt.subplots(height, width, squeeze=False)
            cells = axes.ravel()
            for panel, axis in zip(self.panels, cells):
                panel.draw(axis)
            for axis in cells[len(self.panels):]:
                axis.set_visible(False)
            if self.title:
                figure.suptitle(self.title)
            figure.tight_layout(pad=1)
        return figure

    def save(self, path=None, **kwargs):
        """
        Render and save the figure, then release it.

        :param path: Destination, defaults to ``savepath``.
        :param kwargs: Passed to ``matplotlib.figure.Figure.savefig``.
        :returns: The path written.
        """
        path = path if path is not None else self.savepath
        if path is None:
            raise exc.InvalidParameterError("No path to save the figure to.")
        figure = self.render()
        try:
            figure.savefig(path, **kwargs)
        finally:
            plt.close(figure)
        logger.info("Figure saved to %s", path)
        return path


def plot_train_log(log, savepath):
    """
    Plot the loss of every phase against the iteration, and the dev \
            accuracies on a second panel when any were recorded.

    :param log: A :class:`mgtc.trainer.TrainLog` or its ``DataFrame``.
    :param savepath: The image path.
    :returns: ``savepath``.
    """
    frame = log.to_frame() if hasattr(log, "to_frame") else log
    if frame is None or len(frame) == 0:
        raise exc.InvalidParameterError("Empty training log.")

    with Figure(savepath=savepath) as fig:
        losses = fig.add_panel(title="Training loss", xlabel="Iteration",
                               ylabel="Loss")
        accuracies = None
        for phase, rows in frame.groupby("phase", sort=False):
            style = _PHASE_STYLES.get(phase, ":")
            losses.plot(rows["iteration"], rows["loss"], style, label=phase)
            for subtask, color in zip(
                    SUBTASKS, mpalette.subtask_colors(SUBTASKS)):
                column = "%s_acc" % subtask
                scored = rows[rows[column].notna()]
                if scored.empty:
                    continue
                if accuracies is None:
                    accuracies = fig.add_panel(
                        title="Dev accuracy", xlabel="Iteration",
                        ylabel="Accuracy (%)", yrange=(0, 100))
                accuracies.plot(
                    scored["iteration"],
                    100.0 * scored[column].astype(float), style, marker="o",
                    color=color, label="%s (%s)" % (subtask.upper(), phase))
    return savepath


def plot_kfold(table, savepath):
    """
    Plot mean accuracy against the number of folds, one panel per subtask \
            and one curve per learning mode, with standard deviations as \
            error bars.

    :param table: Per-fold rows as returned by \
            :func:`mgtc.evaluator.kfold.kfold_evaluate` or \
            :func:`mgtc.evaluator.kfold.compare_learning`.
    :param savepath: The image path.
    :returns: ``savepath``.
    """
    if table is None or len(table) == 0:
        raise exc.InvalidParameterError("Empty k-fold table.")
    if "mode" not in table.columns:
        table = table.assign(mode="k-fold")
    summary = summarize(table).reset_index()
    subtasks = [task for task in SUBTASKS
                if summary["%s_mean" % task].notna().any()]
    if not subtasks:
        raise exc.InvalidParameterError("No accuracy to plot.")

    modes = list(pd.unique(summary["mode"]))
    with Figure(savepath=savepath) as fig:
        for task in subtasks:
            panel = fig.add_panel(title=task.upper(), xlabel="N",
                                  ylabel="Accuracy (%)")
            for mode, color in zip(modes, mpalette.mode_colors(modes)):
                rows = summary[summary["mode"] == mode].sort_values("n")
                panel.errorbar(rows["n"], rows["%s_mean" % task],
                               yerr=rows["%s_std" % task], marker="o",
                               color=color, label=mode)
    return savepath
