"""Command-line front door: encode -> train -> predict -> evaluate -> synth.

Every subcommand exits 0 on success and nonzero with a one-line diagnostic
on stderr otherwise. Set MARGIN_FORGE_LOG=debug|info|warning for verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from margin_forge import dataio, encoding, evaluation, svm
from margin_forge.errors import (
    ConvergenceError,
    DimensionError,
    EncodingError,
    MarginForgeError,
    ParseError,
    SchemaError,
)
from margin_forge.kernels import LinearKernel, PolynomialKernel, RbfKernel

log = logging.getLogger("margin_forge")


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="margin-forge",
        description="Soft-margin SVM toolkit: encode cohorts, train, "
        "predict, evaluate, and generate synthetic data.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("encode", help="encode a CSV cohort into the sparse format")
    p.add_argument("csv_path")
    p.add_argument("schema_path")
    p.add_argument("-o", "--output", required=True, help="sparse output file")
    p.add_argument(
        "--label-rule",
        help="comma-separated binary fields; any true field labels +1 "
        "(default: the schema's label column)",
    )

    p = sub.add_parser("train", help="train on a sparse-format file")
    p.add_argument("sparse_path")
    p.add_argument("-c", type=_positive_float, default=1.0, help="soft-margin C bound")
    p.add_argument(
        "--kernel", choices=("linear", "rbf", "polynomial"), default="linear"
    )
    p.add_argument("--gamma", type=_positive_float, default=1.0)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--coef0", type=float, default=1.0)
    p.add_argument("--tol", type=_positive_float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=10_000_000)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("-o", "--output", required=True, help="model output file")

    p = sub.add_parser("predict", help="classify a sparse-format file")
    p.add_argument("model_path")
    p.add_argument("sparse_path")
    p.add_argument("-o", "--output", help="write labels here instead of stdout")
    p.add_argument("--scores", action="store_true", help="also print decision values")

    p = sub.add_parser("evaluate", help="report error counts on labeled data")
    p.add_argument("model_path")
    p.add_argument("sparse_path")
    p.add_argument("-c", type=_positive_float, default=None,
                   help="C bound to echo into the report row (default 0 = unknown)")
    p.add_argument("--csv", action="store_true", help="emit the comma-separated variant")
    p.add_argument("-o", "--output", help="also write the report to this file")

    p = sub.add_parser("synth", help="generate a planted-separator cohort")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--bias", type=float, default=0.0)
    p.add_argument(
        "--weights",
        help="comma-separated planted weights (default: all ones)",
    )
    p.add_argument("-o", "--output", required=True, help="sparse output file")
    return parser


def _build_kernel(args):
    if args.kernel == "rbf":
        return RbfKernel(gamma=args.gamma)
    if args.kernel == "polynomial":
        return PolynomialKernel(degree=args.degree, coef0=args.coef0, gamma=args.gamma)
    return LinearKernel()


def _cmd_encode(args) -> int:
    schema = dataio.load_schema(args.schema_path)
    records = dataio.read_csv(args.csv_path, schema)
    if not records:
        raise ParseError("no data rows to encode", line=2)
    if args.label_rule:
        rule = encoding.LabelRule.from_schema(schema, args.label_rule.split(","))
        labels = [encoding.label_record(r, rule) for r in records]
    elif schema.label_field:
        labels = [_parse_label_token(r, schema.label_field) for r in records]
    else:
        raise SchemaError(
            "no labeling source: pass --label-rule or declare a label column"
        )
    state = encoding.fit_encoder(schema, records)
    vectors = encoding.encode_records(schema, state, records)
    examples = dataio.dataset_to_examples(list(zip(vectors, labels)))
    dataio.write_sparse(args.output, examples)
    n_pos = sum(1 for y in labels if y == 1)
    print(f"{len(labels)} {n_pos} {len(labels) - n_pos}")
    return 0


def _parse_label_token(record: encoding.Record, column: str) -> int:
    token = record.get(column)
    if token in ("+1", "1"):
        return 1
    if token == "-1":
        return -1
    raise EncodingError(f"{column}: label token {token!r} is not +1/-1")


def _cmd_train(args) -> int:
    examples = dataio.read_sparse(args.sparse_path)
    data = dataio.examples_to_dataset(examples)
    config = svm.TrainConfig(
        c_bound=args.c,
        kernel=_build_kernel(args),
        kkt_tolerance=args.tol,
        max_passes=args.max_iter,
        seed=args.seed,
    )
    try:
        model, diag = svm.train(data, config)
    except ConvergenceError as exc:
        if exc.diagnostics is not None:
            _print_diagnostics(exc.diagnostics, bias=None)
        raise
    dataio.save_model(args.output, model)
    _print_diagnostics(diag, bias=model.bias)
    log.info("model written to %s", args.output)
    return 0


def _print_diagnostics(diag: svm.TrainDiagnostics, bias: float | None) -> None:
    print(f"dual objective    {diag.dual_objective:.12g}")
    print(f"support vectors   {diag.n_support_vectors} ({diag.n_bounded_svs} at bound)")
    print(f"max KKT violation {diag.max_kkt_violation:.6g}")
    print(f"total slack       {diag.total_slack:.12g}")
    print(f"iterations        {diag.iterations}")
    if bias is not None:
        print(f"bias              {bias:.12g}")


def _load_model_and_data(model_path, sparse_path):
    model = dataio.load_model(model_path)
    examples = dataio.read_sparse(sparse_path)
    max_index = max((e.entries[-1][0] for e in examples if e.entries), default=0)
    if max_index > model.dim:
        raise DimensionError(
            f"data uses feature index {max_index} beyond model dim {model.dim}"
        )
    # Trailing zero features may be omitted in files, so pad to the model.
    data = dataio.examples_to_dataset(examples, dim=model.dim)
    return model, data


def _cmd_predict(args) -> int:
    model, data = _load_model_and_data(args.model_path, args.sparse_path)
    vectors = [x for x, _ in data]
    scores = svm.decision_values(model, vectors)
    lines = []
    for f in scores:
        label = "+1" if f >= 0 else "-1"
        lines.append(f"{label} {f:.17g}" if args.scores else label)
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_evaluate(args) -> int:
    model, data = _load_model_and_data(args.model_path, args.sparse_path)
    c_bound = args.c if args.c is not None else 0.0
    report = evaluation.evaluate(model, data, c_bound=c_bound)
    render = evaluation.render_report_csv if args.csv else evaluation.render_report
    text = render([report]) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    sys.stdout.write(text)
    return 0


def _cmd_synth(args) -> int:
    if args.weights:
        weights = tuple(float(w) for w in args.weights.split(","))
    else:
        weights = (1.0,) * args.dim
    spec = evaluation.SyntheticCohortSpec(
        n=args.n,
        dim=args.dim,
        planted_weights=weights,
        planted_bias=args.bias,
        label_noise_rate=args.noise,
        seed=args.seed,
    )
    cohort = evaluation.generate_cohort(spec)
    dataio.write_sparse(args.output, dataio.dataset_to_examples(cohort))
    log.info("cohort written to %s", args.output)
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    level = os.environ.get("MARGIN_FORGE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except (MarginForgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
