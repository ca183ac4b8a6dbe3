"""
Evaluation reports: one row per method, ST1/ST2/ST3/PME columns per dataset.
"""
import pandas as pd

COLUMNS = ("ST1", "ST2", "ST3", "PME")


def evaluation_table(results):
    """
    :param results: A list of ``(method, dataset, accuracy)`` tuples, \
            ``accuracy`` being a :class:`mgtc.trainer.Accuracy`.
    :returns: A ``pandas.DataFrame`` indexed by method, with \
            ``(dataset, subtask)`` columns in percent.
    """
    data = {}
    methods = []
    for method, dataset, scores in results:
        if method not in methods:
            methods.append(method)
        for subtask, value in scores.subtasks().items():
            data.setdefault((dataset, subtask), {})[method] = (
                None if value is None else 100.0 * value)
    frame = pd.DataFrame(data, index=methods).astype(float)
    frame.columns = pd.MultiIndex.from_tuples(frame.columns)
    return frame


def format_table(frame):
    """
    Render a report with two decimals, missing values as ``-``.
    """
    return frame.to_string(float_format="{:.2f}".format, na_rep="-")
