"""
Colors of the figures: one fixed color per subtask and per learning mode,
a CubeHelix ramp for anything else.
"""
import cycler
import palettable

SUBTASKS = ("ST1", "ST2", "ST3", "PME")

# ColorBrewer qualitative, colorblind safe
_SUBTASK_COLORS = {
    "ST1": "#1f78b4",
    "ST2": "#33a02c",
    "ST3": "#e31a1c",
    "PME": "#6a3d9a",
}
_MODE_COLORS = {
    "coarse-to-fine": "#1f78b4",
    "single-stage": "#ff7f00",
}


def cubehelix(n):
    """
    A CubeHelix perceptual rainbow palette of ``n`` colors.

    :param n: The number of colors in the palette.
    :returns: The palette as a list of RGB tuples.
    """
    return palettable.cubehelix.Cubehelix.make(
        start_hue=240., end_hue=-300., min_sat=1., max_sat=2.5,
        min_light=0.3, max_light=0.8, gamma=.9, n=n).mpl_colors


def _lookup(table, names):
    names = list(names)
    unknown = [name for name in names if name not in table]
    fallback = iter(cubehelix(len(unknown))) if unknown else iter(())
    return [table[name] if name in table else next(fallback)
            for name in names]


def subtask_colors(names):
    """
    :param names: Subtask names, case insensitive (``"st1"`` or ``"ST1"``).
    :returns: One color per name. Unknown names get CubeHelix colors.
    """
    return _lookup(_SUBTASK_COLORS, [name.upper() for name in names])


def mode_colors(modes):
    """
    :param modes: Learning mode names.
    :returns: One color per mode. Unknown modes get CubeHelix colors.
    """
    return _lookup(_MODE_COLORS, modes)


def build_cycler_palette(palette):
    """
    :param palette: A list of colors in a format understandable by \
            matplotlib.
    :returns: A cycler object for the palette.
    """
    return cycler.cycler("color", palette)
