"""File formats: CSV cohorts, the sparse label-index format, model files,
and the schema definition language.

Sparse example format (interchange with the classic SVM command-line tools),
one example per line::

    <label> <index>:<value> <index>:<value> ...

where label is ``+1``, ``1``, or ``-1``, indices are 1-based and strictly
increasing, and ``#`` starts a comment. Values are written with 17
significant digits so that write/read round-trips are exact.

Model file format, versioned plain text::

    margin-forge-model v1
    kernel <linear | rbf G | polynomial D C0 G>
    dim <n>
    bias <b>
    support_vectors <count>
    <coefficient> <index>:<value> ...     (one line per support vector)

Schema file format, one field per line (``#`` starts a comment)::

    <name> numeric [standardize|raw] [reject|mean]
    <name> categorical <tok,tok,...> [onehot|scalar] [reject|allzero|extra]
    <name> binary <true_token> [reject]
    <name> label

``label`` marks the column holding a ready-made +1/-1 label; the bracketed
arguments default to ``standardize``/``onehot`` and the per-kind missing
policies (mean imputation for numerics, all-zero for one-hot categoricals,
reject otherwise).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from margin_forge.encoding import (
    Binary,
    Categorical,
    CategoricalMode,
    FieldSpec,
    MissingPolicy,
    Numeric,
    Record,
    Schema,
)
from margin_forge.errors import ParseError, SchemaError, VersionError
from margin_forge.kernels import LinearKernel, kernel_from_text, kernel_to_text
from margin_forge.svm import Model, linear_weights
from margin_forge.vectors import FeatureVector

MODEL_FORMAT_HEADER = "margin-forge-model v1"


@dataclass(frozen=True)
class SparseExample:
    """One labeled line of the sparse format."""

    label: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if self.label not in (1, -1):
            raise ValueError(f"label must be +1 or -1, got {self.label!r}")
        prev = 0
        for index, value in self.entries:
            if index <= prev:
                raise ValueError(f"indices must be strictly increasing at {index}")
            if not math.isfinite(value):
                raise ValueError(f"non-finite value at index {index}")
            prev = index


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_entry(token: str, lineno: int) -> tuple[int, float]:
    head, sep, tail = token.partition(":")
    if not sep:
        raise ParseError(f"expected index:value, got {token!r}", line=lineno)
    try:
        index = int(head)
        value = float(tail)
    except ValueError:
        raise ParseError(f"bad index:value pair {token!r}", line=lineno) from None
    if index < 1:
        raise ParseError(f"feature indices are 1-based, got {index}", line=lineno)
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {tail!r}", line=lineno)
    return index, value


def read_sparse(path: str | Path) -> list[SparseExample]:
    """Read sparse-format examples, preserving file order."""
    examples = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = _strip_comment(raw)
            if not line:
                continue
            tokens = line.split()
            if tokens[0] not in ("+1", "1", "-1"):
                raise ParseError(f"label must be +1 or -1, got {tokens[0]!r}", line=lineno)
            label = 1 if tokens[0] in ("+1", "1") else -1
            entries = []
            prev = 0
            for token in tokens[1:]:
                index, value = _parse_entry(token, lineno)
                if index <= prev:
                    raise ParseError(
                        f"indices must be strictly increasing, got {index} after {prev}",
                        line=lineno,
                    )
                entries.append((index, value))
                prev = index
            examples.append(SparseExample(label=label, entries=tuple(entries)))
    return examples


def format_sparse_example(example: SparseExample) -> str:
    parts = ["+1" if example.label == 1 else "-1"]
    parts.extend(f"{i}:{v:.17g}" for i, v in example.entries)
    return " ".join(parts)


def write_sparse(path: str | Path, examples: Sequence[SparseExample]) -> None:
    """Write examples one per line; values carry 17 significant digits."""
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(format_sparse_example(example) + "\n")


def examples_to_dataset(
    examples: Sequence[SparseExample], dim: int | None = None
) -> list[tuple[FeatureVector, int]]:
    """Lift sparse examples into feature vectors of a common dimensionality.

    When ``dim`` is omitted it is inferred as the largest index present.
    """
    if dim is None:
        dim = max((e.entries[-1][0] for e in examples if e.entries), default=0)
        if dim == 0:
            raise ParseError("cannot infer dimensionality: no features present")
    return [
        (FeatureVector.from_pairs(dim, e.entries), e.label) for e in examples
    ]


def dataset_to_examples(
    data: Sequence[tuple[FeatureVector, int]]
) -> list[SparseExample]:
    """Project feature vectors back onto sparse examples, dropping zeros."""
    return [
        SparseExample(label=label, entries=vector.nonzero_entries())
        for vector, label in data
    ]


def read_csv(path: str | Path, schema: Schema) -> list[Record]:
    """Read a comma-separated cohort file into raw records.

    The header must name every schema field (and the label column when the
    schema declares one); empty cells become missing values.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file: missing header", line=1) from None
        header = [h.strip() for h in header]
        required = [f.name for f in schema.fields]
        if schema.label_field:
            required.append(schema.label_field)
        for name in required:
            if name not in header:
                raise SchemaError(f"header lacks required column {name!r}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} cells, got {len(row)}", line=lineno
                )
            records.append(Record(values=dict(zip(header, row))))
    return records


def save_model(path: str | Path, model: Model) -> None:
    """Write a model as versioned plain text; output is deterministic."""
    lines = [
        MODEL_FORMAT_HEADER,
        f"kernel {kernel_to_text(model.kernel)}",
        f"dim {model.dim}",
        f"bias {model.bias:.17g}",
        f"support_vectors {len(model.support_vectors)}",
    ]
    for coef, sv in zip(model.sv_coefficients, model.support_vectors):
        parts = [f"{coef:.17g}"]
        parts.extend(f"{i}:{v:.17g}" for i, v in sv.entries)
        lines.append(" ".join(parts))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _expect_line(lines: list[str], lineno: int, prefix: str) -> str:
    if lineno > len(lines):
        raise ParseError(f"truncated file: expected {prefix!r} line", line=lineno)
    line = lines[lineno - 1].strip()
    if not line.startswith(prefix + " "):
        raise ParseError(f"expected {prefix!r} line, got {line!r}", line=lineno)
    return line[len(prefix) + 1 :]


def load_model(path: str | Path) -> Model:
    """Read a model file; the inverse of :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise ParseError("empty model file", line=1)
    if lines[0].strip() != MODEL_FORMAT_HEADER:
        raise VersionError(
            f"unsupported model format {lines[0].strip()!r}, "
            f"expected {MODEL_FORMAT_HEADER!r}"
        )
    kernel = kernel_from_text(_expect_line(lines, 2, "kernel"))
    try:
        dim = int(_expect_line(lines, 3, "dim"))
        bias = float(_expect_line(lines, 4, "bias"))
        n_sv = int(_expect_line(lines, 5, "support_vectors"))
    except ValueError as exc:
        raise ParseError(f"bad model header field: {exc}") from None
    support_vectors = []
    coefficients = []
    for k in range(n_sv):
        lineno = 6 + k
        if lineno > len(lines) or not lines[lineno - 1].strip():
            raise ParseError("truncated file: missing support vector row", line=lineno)
        tokens = lines[lineno - 1].split()
        try:
            coef = float(tokens[0])
        except ValueError:
            raise ParseError(f"bad coefficient {tokens[0]!r}", line=lineno) from None
        entries = []
        prev = 0
        for token in tokens[1:]:
            index, value = _parse_entry(token, lineno)
            if index <= prev or index > dim:
                raise ParseError(f"bad support vector index {index}", line=lineno)
            entries.append((index, value))
            prev = index
        coefficients.append(coef)
        support_vectors.append(FeatureVector.from_pairs(dim, entries))
    trailing = [l for l in lines[5 + n_sv :] if l.strip()]
    if trailing:
        raise ParseError(
            f"unexpected trailing content {trailing[0]!r}", line=6 + n_sv
        )
    weights = None
    if isinstance(kernel, LinearKernel):
        weights = linear_weights(support_vectors, coefficients, dim)
    return Model(
        kernel=kernel,
        bias=bias,
        support_vectors=tuple(support_vectors),
        sv_coefficients=tuple(coefficients),
        dim=dim,
        explicit_weights=weights,
    )


_POLICY_TOKENS = {p.value: p for p in MissingPolicy}


def parse_schema(text: str) -> Schema:
    """Parse the schema definition language (see module docstring)."""
    fields: list[FieldSpec] = []
    label_field = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise SchemaError(f"line {lineno}: expected '<name> <kind> ...'")
        name, kind_token, args = tokens[0], tokens[1], tokens[2:]
        if kind_token == "label":
            if args:
                raise SchemaError(f"line {lineno}: 'label' takes no arguments")
            if label_field is not None:
                raise SchemaError(f"line {lineno}: duplicate label column")
            label_field = name
            continue
        try:
            fields.append(_parse_field(name, kind_token, args))
        except SchemaError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
    return Schema(fields=tuple(fields), label_field=label_field)


def _take_policy(args: list[str], allowed: tuple[MissingPolicy, ...]) -> MissingPolicy | None:
    if args and args[-1] in _POLICY_TOKENS:
        policy = _POLICY_TOKENS[args.pop()]
        if policy not in allowed:
            raise SchemaError(f"policy {policy.value!r} not valid here")
        return policy
    return None


def _parse_field(name: str, kind_token: str, args: list[str]) -> FieldSpec:
    args = list(args)
    if kind_token == "numeric":
        policy = _take_policy(args, (MissingPolicy.REJECT, MissingPolicy.MEAN_IMPUTE))
        standardize = True
        if args:
            mode = args.pop(0)
            if mode not in ("standardize", "raw"):
                raise SchemaError(f"bad numeric argument {mode!r}")
            standardize = mode == "standardize"
        if args:
            raise SchemaError(f"unexpected arguments {args}")
        return FieldSpec(name=name, kind=Numeric(standardize=standardize), missing_policy=policy)
    if kind_token == "categorical":
        if not args:
            raise SchemaError("categorical needs a comma-separated alphabet")
        policy = None
        if len(args) >= 2:  # the alphabet itself may never be read as a policy
            policy = _take_policy(
                args,
                (MissingPolicy.REJECT, MissingPolicy.ALL_ZERO, MissingPolicy.EXTRA_CATEGORY),
            )
        alphabet = tuple(t for t in args.pop(0).split(",") if t)
        mode = CategoricalMode.ONE_HOT
        if args:
            mode_token = args.pop(0)
            try:
                mode = CategoricalMode(mode_token)
            except ValueError:
                raise SchemaError(f"bad categorical mode {mode_token!r}") from None
        if args:
            raise SchemaError(f"unexpected arguments {args}")
        return FieldSpec(
            name=name, kind=Categorical(alphabet=alphabet, mode=mode), missing_policy=policy
        )
    if kind_token == "binary":
        if not args:
            raise SchemaError("binary needs a true-token argument")
        policy = _take_policy(args, (MissingPolicy.REJECT,))
        true_token = args.pop(0)
        if args:
            raise SchemaError(f"unexpected arguments {args}")
        return FieldSpec(name=name, kind=Binary(true_token=true_token), missing_policy=policy)
    raise SchemaError(f"unknown field kind {kind_token!r}")


def load_schema(path: str | Path) -> Schema:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_schema(handle.read())
