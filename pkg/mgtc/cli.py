"""
Command-line entry point: ``mgtc <command> [flags]``.

Exit codes are 0 on success, 1 on invalid input (flags, corpus, labels,
checkpoints) and 2 on any other failure.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from mgtc import constants
from mgtc import exceptions as exc
from mgtc.assembler import pst as mpst
from mgtc.assembler.dot import to_dot
from mgtc.assembler.graph import check_sound, pst_to_graph
from mgtc.assembler.parser import parse_labels
from mgtc.corpus import io as corpus_io
from mgtc.corpus.split import SplitSpec, split
from mgtc.corpus.stats import corpus_stats, format_table, stats_table
from mgtc.evaluator import kfold
from mgtc.evaluator.report import evaluation_table
from mgtc.evaluator.report import format_table as format_report
from mgtc.evaluator.ttest import paired_t_test, read_scores
from mgtc.model import HyperParams, Pipeline, gradcheck_model, load_model
from mgtc.trainer import (TrainConfig, TrainLog, evaluate, majority_baseline,
                          predict_document, train_coarse, train_fine)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

VALIDATION_ERRORS = (exc.InvalidParameterError, exc.CorpusValidationError,
                     exc.ParseError, exc.ConfigMismatchError,
                     exc.CheckpointFormatError)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise exc.InvalidParameterError(message)


def _int_list(value):
    try:
        return tuple(int(item) for item in value.split(",") if item.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected comma separated integers, got '%s'" % value)


def _fold_range(value):
    """
    ``"5"`` or an inclusive range ``"2:20"``.
    """
    try:
        if ":" in value:
            low, high = value.split(":", 1)
            return range(int(low), int(high) + 1)
        return range(int(value), int(value) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected N or LOW:HIGH, got '%s'" % value)


def _dataset_name(path):
    return os.path.splitext(os.path.basename(path))[0]


###################
# Hyperparameters #
###################
_HYPERPARAM_FLAGS = [
    ("--embed-dim", "embed_dim", int),
    ("--hid", "hid", int),
    ("--windows", "window_sizes", _int_list),
    ("--filters", "filters_per_size", int),
    ("--mlp-layers", "mlp_layers", int),
    ("--mlp-hidden", "mlp_hidden", int),
    ("--lambda1", "lambda1", float),
    ("--batch", "batch", int),
    ("--lr", "lr", float),
    ("--iterations", "iterations", int),
    ("--seed", "seed", int),
    ("--summary", "summary", str),
    ("--word-repr", "word_repr", str),
]


def _add_hyperparams(parser):
    group = parser.add_argument_group("hyperparameters")
    for flag, dest, kind in _HYPERPARAM_FLAGS:
        group.add_argument(flag, dest=dest, type=kind, default=None)
    group.add_argument("--no-gate", dest="use_gate", action="store_false",
                       default=None,
                       help="concatenate features without gate-attention")


def _hyperparams(args, base=None):
    """
    Apply the hyperparameter flags given on the command line over ``base``.
    """
    overrides = {dest: getattr(args, dest) for _, dest, _ in _HYPERPARAM_FLAGS
                 if getattr(args, dest, None) is not None}
    if getattr(args, "use_gate", None) is not None:
        overrides["use_gate"] = args.use_gate
    if "lambda1" in overrides:
        overrides["lambda2"] = 1.0 - overrides["lambda1"]
    return replace(base if base is not None else HyperParams(), **overrides)


def _training_documents(args):
    documents = corpus_io.load_corpus(args.corpus)
    if args.holdout:
        documents, _ = split(documents, SplitSpec(seed=args.split_seed))
    return documents


def _load_pipeline(coarse_path, fine_path=None):
    coarse = load_model(coarse_path, phase="coarse")
    fine = None
    if fine_path is not None:
        fine = load_model(fine_path, vocab=coarse.vocab, phase="fine")
    return Pipeline(coarse, fine)


############
# Commands #
############
def cmd_stats(args):
    table = stats_table({
        _dataset_name(path): corpus_stats(corpus_io.load_corpus(path))
        for path in args.corpus})
    print(format_table(table))


def cmd_convert(args):
    documents = corpus_io.convert_dump(args.dump,
                                       corpus_io.load_mapping(args.mapping),
                                       domain=args.domain)
    corpus_io.dump_corpus(documents, args.out)


def cmd_train_coarse(args):
    config = TrainConfig(hp=_hyperparams(args), checkpoint=args.checkpoint,
                         best_checkpoint=args.best,
                         eval_every=args.eval_every,
                         dev_fraction=args.dev_fraction,
                         embeddings=args.embeddings,
                         freeze_embedding=args.freeze_embedding,
                         min_freq=args.min_freq)
    result = train_coarse(_training_documents(args), config)
    if args.log:
        result.log.to_csv(args.log)


def cmd_train_fine(args):
    coarse = None
    if args.coarse is not None:
        coarse = load_model(args.coarse, phase="coarse")
    elif not args.no_transfer:
        raise exc.InvalidParameterError(
            "--coarse is required unless --no-transfer is given.")
    config = TrainConfig(
        hp=_hyperparams(args, coarse.hp if coarse is not None else None),
        phase="fine", checkpoint=args.checkpoint, best_checkpoint=args.best,
        eval_every=args.eval_every, dev_fraction=args.dev_fraction,
        freeze_shared=args.freeze_shared, transfer=not args.no_transfer,
        min_freq=args.min_freq)
    result = train_fine(_training_documents(args), coarse, config)
    if args.log:
        result.log.to_csv(args.log)


def cmd_eval(args):
    documents = corpus_io.load_corpus(args.corpus)
    train = documents
    if args.holdout:
        train, documents = split(documents,
                                 SplitSpec(seed=args.split_seed))
    if args.coarse is None and not args.majority:
        raise exc.InvalidParameterError(
            "Nothing to evaluate: give --coarse or --majority.")
    if args.pme and args.coarse is not None and args.fine is None:
        raise exc.InvalidParameterError(
            "--pme needs the word-level model, give --fine.")
    dataset = _dataset_name(args.corpus)
    results = []
    if args.majority:
        results.append(("Majority", dataset,
                        majority_baseline(train, documents, pme=args.pme)))
    if args.coarse is not None:
        pipeline = _load_pipeline(args.coarse, args.fine)
        results.append(("MGTC", dataset,
                        evaluate(documents, pipeline, pme=args.pme)))
    table = evaluation_table(results)
    print(format_report(table))
    if args.csv:
        table.to_csv(args.csv, float_format="%.4f")


def _extract_one(document, labeled, args):
    pst, diagnostics = parse_labels(labeled, strict=args.strict)
    model = pst_to_graph(pst)
    for problem in check_sound(model):
        logger.warning("%s: %s", document.id, problem)
    dot = to_dot(model, name=document.id)
    if args.out is None:
        print(dot, end="")
        return diagnostics
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "%s.dot" % document.id), "w",
              encoding="utf-8") as fh:
        fh.write(dot)
    with open(os.path.join(args.out, "%s.pst.json" % document.id), "w",
              encoding="utf-8") as fh:
        json.dump(mpst.to_dict(pst), fh, indent=2, ensure_ascii=False)
    return diagnostics


def cmd_extract(args):
    documents = corpus_io.load_corpus(args.corpus)
    if args.document is not None:
        documents = [d for d in documents if d.id == args.document]
        if not documents:
            raise exc.InvalidParameterError(
                "No document '%s' in %s." % (args.document, args.corpus))
    pipeline = None
    if not args.gold:
        if args.coarse is None or args.fine is None:
            raise exc.InvalidParameterError(
                "--predict needs both --coarse and --fine checkpoints.")
        pipeline = _load_pipeline(args.coarse, args.fine)
    errors = 0
    for document in documents:
        labeled = (document if pipeline is None
                   else predict_document(document, pipeline))
        errors += len(_extract_one(document, labeled, args).errors)
    if errors:
        logger.warning("%d label errors recovered from", errors)


def cmd_render(args):
    with open(args.pst, encoding="utf-8") as fh:
        try:
            tree = mpst.from_dict(json.load(fh))
        except (ValueError, KeyError, TypeError) as err:
            raise exc.InvalidParameterError(
                "%s: not a process structure tree (%s)." % (args.pst, err))
    dot = to_dot(pst_to_graph(tree), name=_dataset_name(args.pst))
    if args.out is None:
        print(dot, end="")
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dot)


def cmd_gradcheck(args):
    report = gradcheck_model(seed=args.seed, eps=args.eps,
                             threshold=args.threshold)
    if args.out:
        report.to_tsv(args.out)
    else:
        print(report.to_tsv(), end="")
    logger.info("Maximum relative error %.3e", report.max_rel_err)
    if not report.passed:
        raise exc.NumericalError(
            "Gradient check failed: maximum relative error %.3e above %g." % (
                report.max_rel_err, args.threshold))


def cmd_kfold(args):
    documents = corpus_io.load_corpus(args.corpus)
    modes = ((kfold.COARSE_TO_FINE, kfold.SINGLE_STAGE) if args.compare
             else (kfold.COARSE_TO_FINE,))
    frame = kfold.compare_learning(documents, _hyperparams(args),
                                   n_range=args.folds, seed=args.split_seed,
                                   jobs=args.jobs, modes=modes)
    print(kfold.summarize(frame).to_string(float_format="{:.2f}".format))
    if args.csv:
        frame.to_csv(args.csv, index=False, float_format="%.4f")
    if args.plot:
        from mgtc.figure import plot_kfold
        plot_kfold(frame, args.plot)


def cmd_plot(args):
    from mgtc.figure import plot_train_log
    plot_train_log(TrainLog.from_csv(args.log), args.out)


def cmd_ttest(args):
    result = paired_t_test(read_scores(args.a), read_scores(args.b))
    print("t = %.4f, p = %.4g, n = %d%s" % (
        result.statistic, result.p_value, result.n,
        " (zero-variance differences)" if result.tie else ""))


##########
# Parser #
##########
def _add_training_flags(parser):
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--checkpoint", required=True,
                        help="where to save the final model")
    parser.add_argument("--best", default=None,
                        help="where to save the best model on the dev slice")
    parser.add_argument("--log", default=None, help="training log CSV")
    parser.add_argument("--eval-every", type=int, default=100)
    parser.add_argument("--dev-fraction", type=float,
                        default=constants.DEV_FRACTION)
    parser.add_argument("--min-freq", type=int, default=1)
    parser.add_argument("--holdout", action="store_true",
                        help="train on the 80%% side of the document split")
    parser.add_argument("--split-seed", type=int, default=0)
    _add_hyperparams(parser)


def build_parser():
    parser = _ArgumentParser(
        prog="mgtc",
        description="Multi-grained text classification of process texts "
                    "and process model extraction.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    commands = parser.add_subparsers(dest="command",
                                     parser_class=_ArgumentParser)
    commands.required = True

    stats = commands.add_parser("stats", help="corpus statistics")
    stats.add_argument("--corpus", required=True, action="append")
    stats.set_defaults(func=cmd_stats)

    convert = commands.add_parser(
        "convert", help="convert a released dataset dump")
    convert.add_argument("--dump", required=True)
    convert.add_argument("--mapping", required=True)
    convert.add_argument("--out", required=True)
    convert.add_argument("--domain", default="other")
    convert.set_defaults(func=cmd_convert)

    coarse = commands.add_parser("train-coarse",
                                 help="train the sentence-level tasks")
    _add_training_flags(coarse)
    coarse.add_argument("--embeddings", default=None,
                        help="pretrained word vectors, one word per line")
    coarse.add_argument("--freeze-embedding", action="store_true")
    coarse.set_defaults(func=cmd_train_coarse)

    fine = commands.add_parser("train-fine",
                               help="train the word-level task")
    _add_training_flags(fine)
    fine.add_argument("--coarse", default=None,
                      help="checkpoint of the coarse model")
    fine.add_argument("--freeze-shared", action="store_true")
    fine.add_argument("--no-transfer", action="store_true",
                      help="single-stage learning from random weights")
    fine.set_defaults(func=cmd_train_fine)

    evaluation = commands.add_parser("eval", help="score trained models")
    evaluation.add_argument("--corpus", required=True)
    evaluation.add_argument("--coarse", default=None)
    evaluation.add_argument("--fine", default=None)
    evaluation.add_argument("--holdout", action="store_true",
                            help="score the 20%% side of the document split")
    evaluation.add_argument("--split-seed", type=int, default=0)
    evaluation.add_argument("--majority", action="store_true",
                            help="add the majority-class baseline")
    evaluation.add_argument("--pme", action="store_true",
                            help="also score extracted process models")
    evaluation.add_argument("--csv", default=None)
    evaluation.set_defaults(func=cmd_eval)

    extract = commands.add_parser("extract",
                                  help="assemble process models")
    extract.add_argument("--corpus", required=True)
    source = extract.add_mutually_exclusive_group(required=True)
    source.add_argument("--gold", action="store_true",
                        help="use the gold labels")
    source.add_argument("--predict", action="store_true",
                        help="use the labels predicted by the models")
    extract.add_argument("--coarse", default=None)
    extract.add_argument("--fine", default=None)
    extract.add_argument("--document", default=None,
                         help="only this document id")
    extract.add_argument("--out", default=None,
                         help="directory for <id>.dot and <id>.pst.json")
    extract.add_argument("--strict", action="store_true",
                         help="fail on the first label error")
    extract.set_defaults(func=cmd_extract)

    render = commands.add_parser("render",
                                 help="render a saved tree as DOT")
    render.add_argument("--pst", required=True)
    render.add_argument("--out", default=None)
    render.set_defaults(func=cmd_render)

    check = commands.add_parser("gradcheck",
                                help="finite-difference gradient check")
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--eps", type=float, default=1e-5)
    check.add_argument("--threshold", type=float, default=1e-3)
    check.add_argument("--out", default=None, help="report TSV")
    check.set_defaults(func=cmd_gradcheck)

    folds = commands.add_parser("kfold", help="N-fold cross validation")
    folds.add_argument("--corpus", required=True)
    folds.add_argument("--folds", type=_fold_range, default=range(5, 6),
                       help="N or LOW:HIGH")
    folds.add_argument("--compare", action="store_true",
                       help="also run single-stage learning")
    folds.add_argument("--jobs", type=int, default=1)
    folds.add_argument("--split-seed", type=int, default=0)
    folds.add_argument("--csv", default=None)
    folds.add_argument("--plot", default=None)
    _add_hyperparams(folds)
    folds.set_defaults(func=cmd_kfold)

    plot = commands.add_parser("plot", help="plot a training log")
    plot.add_argument("--log", required=True)
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=cmd_plot)

    ttest = commands.add_parser("ttest", help="paired t-test of two scores")
    ttest.add_argument("--a", required=True)
    ttest.add_argument("--b", required=True)
    ttest.set_defaults(func=cmd_ttest)
    return parser


def _configure_logging(args):
    level = logging.INFO
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    elif getattr(args, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr,
                        force=True)


def main(argv=None):
    """
    Run one command.

    :param argv: The arguments (optional), ``sys.argv[1:]`` by default.
    :returns: The exit code.
    """
    try:
        args = build_parser().parse_args(argv)
    except exc.InvalidParameterError as err:
        sys.stderr.write("mgtc: error: %s\n" % err)
        return 1
    _configure_logging(args)
    try:
        args.func(args)
    except VALIDATION_ERRORS as err:
        logger.error("%s", err)
        return 1
    except (exc.MgtcError, OSError) as err:
        logger.error("%s", err)
        return 2
    except Exception as err:
        logger.error("Unexpected %s: %s", type(err).__name__, err)
        logger.debug("Traceback of the failure", exc_info=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
