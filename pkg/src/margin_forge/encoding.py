"""Turn raw clinical/genotype records into feature vectors.

A Schema lists typed fields; each field contributes a block of coordinates:

* Categorical, one-hot mode: one indicator column per alphabet entry
  (plus one extra column under the ExtraCategory policy).
* Categorical, scalar mode: a single ordinal code i / (m + 1) for the i-th
  of m alphabet entries, so a 4-letter genotype alphabet maps onto
  0.2, 0.4, 0.6, 0.8.
* Numeric: one column, raw or standardized to (x - mean) / std with
  moments fitted on a training split.
* Binary: one 0/1 column driven by a designated true token.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from margin_forge.errors import (
    EncodingError,
    MissingValueError,
    SchemaError,
)
from margin_forge.vectors import FeatureVector


class CategoricalMode(enum.Enum):
    ONE_HOT = "onehot"
    SCALAR = "scalar"


class MissingPolicy(enum.Enum):
    REJECT = "reject"
    MEAN_IMPUTE = "mean"
    ALL_ZERO = "allzero"
    EXTRA_CATEGORY = "extra"


@dataclass(frozen=True)
class Categorical:
    alphabet: tuple[str, ...]
    mode: CategoricalMode = CategoricalMode.ONE_HOT

    def __post_init__(self):
        if not self.alphabet:
            raise SchemaError("categorical alphabet must be non-empty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise SchemaError(f"alphabet has duplicate entries: {self.alphabet}")


@dataclass(frozen=True)
class Numeric:
    standardize: bool = True


@dataclass(frozen=True)
class Binary:
    true_token: str


FieldKind = Union[Categorical, Numeric, Binary]


def _default_policy(kind: FieldKind) -> MissingPolicy:
    if isinstance(kind, Numeric):
        return MissingPolicy.MEAN_IMPUTE
    if isinstance(kind, Categorical) and kind.mode is CategoricalMode.ONE_HOT:
        return MissingPolicy.ALL_ZERO
    return MissingPolicy.REJECT


@dataclass(frozen=True)
class FieldSpec:
    """How one raw column becomes coordinates.

    ``missing_policy`` defaults per kind: mean imputation for numerics,
    all-zero blocks for one-hot categoricals, rejection otherwise.
    """

    name: str
    kind: FieldKind
    missing_policy: MissingPolicy | None = None

    def __post_init__(self):
        if not self.name:
            raise SchemaError("field name must be non-empty")
        policy = self.missing_policy or _default_policy(self.kind)
        object.__setattr__(self, "missing_policy", policy)
        if policy is MissingPolicy.MEAN_IMPUTE and not isinstance(self.kind, Numeric):
            raise SchemaError(f"{self.name}: mean imputation is for numeric fields")
        if policy is MissingPolicy.ALL_ZERO and not (
            isinstance(self.kind, Categorical)
            and self.kind.mode is CategoricalMode.ONE_HOT
        ):
            raise SchemaError(f"{self.name}: all-zero policy is for one-hot fields")
        if policy is MissingPolicy.EXTRA_CATEGORY and not isinstance(
            self.kind, Categorical
        ):
            raise SchemaError(f"{self.name}: extra-category policy is for categoricals")

    @property
    def width(self) -> int:
        """Number of coordinates this field contributes."""
        if isinstance(self.kind, Categorical):
            if self.kind.mode is CategoricalMode.SCALAR:
                return 1
            extra = 1 if self.missing_policy is MissingPolicy.EXTRA_CATEGORY else 0
            return len(self.kind.alphabet) + extra
        return 1


@dataclass(frozen=True)
class Schema:
    """Ordered field list; the encoded dimensionality is the width sum."""

    fields: tuple[FieldSpec, ...]
    label_field: str | None = None

    def __post_init__(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SchemaError("field names must be unique")
        if not self.fields:
            raise SchemaError("schema needs at least one field")

    @property
    def total_dim(self) -> int:
        return sum(f.width for f in self.fields)

    def field(self, name: str) -> FieldSpec:
        for f in self.fields:
            if f.name == name:
                return f
        raise SchemaError(f"no field named {name!r}")


@dataclass(frozen=True)
class Record:
    """One raw row: field name -> raw text token. Blank means missing."""

    values: Mapping[str, str]

    def get(self, name: str) -> str | None:
        token = self.values.get(name)
        if token is None or token.strip() == "":
            return None
        return token.strip()

    def has_field(self, name: str) -> bool:
        return name in self.values


@dataclass(frozen=True)
class EncoderState:
    """Fitted per-numeric-field moments: name -> (mean, population std).

    A std of 0.0 marks a zero-variance field, which encodes as constant 0.
    """

    stats: Mapping[str, tuple[float, float]]


def scalar_code(alphabet_size: int, index: int) -> float:
    """Ordinal code i / (m + 1) for the i-th of m alphabet entries (1-based)."""
    if not 1 <= index <= alphabet_size:
        raise SchemaError(
            f"scalar index {index} out of range [1, {alphabet_size}]"
        )
    return index / (alphabet_size + 1)


def fit_encoder(schema: Schema, data: Sequence[Record]) -> EncoderState:
    """Fit numeric means/stds (population) on a training split.

    Every numeric field must have at least one parseable value.
    """
    if not data:
        raise ValueError("fit_encoder needs a non-empty record sequence")
    stats: dict[str, tuple[float, float]] = {}
    for spec in schema.fields:
        if not isinstance(spec.kind, Numeric):
            continue
        values = []
        for record in data:
            token = record.get(spec.name)
            if token is None:
                continue
            values.append(_parse_numeric(spec.name, token))
        if not values:
            raise EncodingError(f"{spec.name}: no parseable values to fit on")
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        stats[spec.name] = (mean, math.sqrt(var))
    return EncoderState(stats=stats)


def _parse_numeric(field_name: str, token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise EncodingError(f"{field_name}: unparseable numeric {token!r}") from None
    if not math.isfinite(value):
        raise EncodingError(f"{field_name}: non-finite numeric {token!r}")
    return value


def _encode_categorical(spec: FieldSpec, token: str | None) -> list[float]:
    kind = spec.kind
    assert isinstance(kind, Categorical)
    m = len(kind.alphabet)
    one_hot = kind.mode is CategoricalMode.ONE_HOT
    width = spec.width

    if token is None:
        if spec.missing_policy is MissingPolicy.ALL_ZERO:
            return [0.0] * width
        if spec.missing_policy is MissingPolicy.EXTRA_CATEGORY:
            return _extra_category_block(one_hot, width)
        raise MissingValueError(f"{spec.name}: missing value rejected")

    if token in kind.alphabet:
        position = kind.alphabet.index(token) + 1
        if one_hot:
            block = [0.0] * width
            block[position - 1] = 1.0
            return block
        return [scalar_code(m, position)]

    if spec.missing_policy is MissingPolicy.EXTRA_CATEGORY:
        return _extra_category_block(one_hot, width)
    raise EncodingError(f"{spec.name}: unknown token {token!r}")


def _extra_category_block(one_hot: bool, width: int) -> list[float]:
    # One-hot: the trailing extra column. Scalar: code 0.0, below every
    # in-alphabet code, so distinctness is preserved.
    if one_hot:
        block = [0.0] * width
        block[-1] = 1.0
        return block
    return [0.0]


def _encode_numeric(spec: FieldSpec, state: EncoderState, token: str | None) -> float:
    kind = spec.kind
    assert isinstance(kind, Numeric)
    needs_state = kind.standardize or spec.missing_policy is MissingPolicy.MEAN_IMPUTE
    moments = state.stats.get(spec.name)
    if needs_state and moments is None:
        raise EncodingError(f"{spec.name}: encoder state not fitted for this field")

    if token is None:
        if spec.missing_policy is MissingPolicy.MEAN_IMPUTE:
            value = moments[0]
        else:
            raise MissingValueError(f"{spec.name}: missing value rejected")
    else:
        value = _parse_numeric(spec.name, token)

    if not kind.standardize:
        return value
    mean, std = moments
    if std == 0.0:
        return 0.0
    return (value - mean) / std


def encode_record(schema: Schema, state: EncoderState, record: Record) -> FeatureVector:
    """Encode one record into a dense feature vector of dim schema.total_dim."""
    coords: list[float] = []
    for spec in schema.fields:
        token = record.get(spec.name)
        if isinstance(spec.kind, Categorical):
            coords.extend(_encode_categorical(spec, token))
        elif isinstance(spec.kind, Numeric):
            coords.append(_encode_numeric(spec, state, token))
        else:
            if token is None:
                raise MissingValueError(f"{spec.name}: missing value rejected")
            coords.append(1.0 if token == spec.kind.true_token else 0.0)
    return FeatureVector.dense(coords)


def encode_records(
    schema: Schema, state: EncoderState, records: Iterable[Record]
) -> list[FeatureVector]:
    return [encode_record(schema, state, r) for r in records]


@dataclass(frozen=True)
class LabelRule:
    """Disjunction of binary history fields: any true field labels +1."""

    fields: tuple[tuple[str, str], ...]  # (field name, true token)

    def __post_init__(self):
        if not self.fields:
            raise SchemaError("label rule needs at least one field")

    @classmethod
    def from_schema(cls, schema: Schema, names: Sequence[str]) -> "LabelRule":
        """Resolve field names against the schema's binary fields."""
        resolved = []
        for name in names:
            spec = schema.field(name)
            if not isinstance(spec.kind, Binary):
                raise SchemaError(f"label rule field {name!r} is not binary")
            resolved.append((name, spec.kind.true_token))
        return cls(fields=tuple(resolved))


def label_record(record: Record, rule: LabelRule) -> int:
    """+1 when any rule field holds its true token, else -1."""
    hit = False
    for name, true_token in rule.fields:
        if not record.has_field(name):
            raise SchemaError(f"label rule field {name!r} absent from record")
        if record.get(name) == true_token:
            hit = True
    return 1 if hit else -1
