"""Datasets: LIBSVM ingestion, normalization, synthetic generation, streams.

A :class:`Dataset` is immutable. Features live in a CSR matrix; labels are
stored as +-1. ``R`` is the largest Euclidean norm of any example and is
what the bounds module consumes.
"""

import bz2
import hashlib
import json
import os
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .losses import double_ramp_loss
from .query import SeededRng

DATA_DIR_ENV = "REJECTRON_DATA_DIR"

# Remote LIBSVM files. No hash is pinned for these ahead of time: the first
# successful download records its SHA-256 in the cache manifest and every
# later load is verified against it.
REMOTE_DATASETS = {
    "phishing": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/phishing",
    "svmguide1": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/svmguide1",
    "gisette": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/gisette_scale.bz2",
}

BUNDLED_DATASETS = {
    "website-phishing": (
        "website_phishing.libsvm",
        "96c7aeabd568fa14adf8ad0fcb8505def0a3212ebb319c0af992d8618750a6b8",
    ),
}


class DatasetError(Exception):
    """Any failure to obtain or interpret a dataset."""


class LibsvmFormatError(DatasetError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class Example:
    features: dict
    label: int


@dataclass(frozen=True, eq=False)
class Dataset:
    X: sp.csr_matrix
    y: np.ndarray
    name: str = "dataset"
    sha256: str = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = sp.csr_matrix(self.X, dtype=float)
        X.sort_indices()
        y = np.asarray(self.y, dtype=np.int8)
        if X.shape[0] != y.shape[0]:
            raise DatasetError("feature and label counts differ")
        if X.shape[0] == 0:
            raise DatasetError("dataset is empty")
        if X.shape[1] < 1:
            raise DatasetError("dataset has no features")
        if not np.all(np.abs(y) == 1):
            raise DatasetError("labels must be +-1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def norms(self):
        return np.sqrt(np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel())

    @property
    def R(self):
        return float(self.norms.max())

    def dense(self):
        return np.ascontiguousarray(self.X.toarray())

    def example(self, i):
        row = self.X.getrow(i)
        return Example({int(j) + 1: float(v) for j, v in zip(row.indices, row.data)}, int(self.y[i]))

    @property
    def examples(self):
        return [self.example(i) for i in range(self.n)]

    def content_hash(self):
        h = hashlib.sha256()
        for arr in (self.X.indptr, self.X.indices, self.X.data, self.y):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(str(self.X.shape).encode())
        return h.hexdigest()


def _map_labels(raw, path):
    values = set(raw)
    if values <= {0.0, 1.0}:
        return [1 if v == 1.0 else -1 for v in raw]
    if values <= {-1.0, 1.0}:
        return [int(v) for v in raw]
    raise DatasetError(f"{path}: labels {sorted(values)} are not a subset of {{0, 1}} or {{-1, +1}}")


def parse_libsvm(lines, path="<memory>", dim=None):
    """Parse LIBSVM text lines into a :class:`Dataset`.

    Labels drawn from {0, 1} map 0 -> -1, 1 -> +1. Blank lines and lines
    starting with ``#`` are skipped; a trailing ``# ...`` comment is ignored.
    """
    rows, cols, vals, raw_labels = [], [], [], []
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmFormatError(path, lineno, f"bad label {tokens[0]!r}") from None
        row = len(raw_labels)
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            try:
                if not sep:
                    raise ValueError
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibsvmFormatError(path, lineno, f"malformed feature {tok!r}") from None
            if idx < 1:
                raise LibsvmFormatError(path, lineno, f"feature index {idx} is not positive")
            if idx <= prev:
                raise LibsvmFormatError(path, lineno, "feature indices must be strictly increasing")
            if not np.isfinite(val):
                raise LibsvmFormatError(path, lineno, f"non-finite value in {tok!r}")
            prev = idx
            rows.append(row)
            cols.append(idx - 1)
            vals.append(val)
        raw_labels.append(label)
    if not raw_labels:
        raise DatasetError(f"{path}: no examples")
    y = _map_labels(raw_labels, path)
    width = max(cols, default=-1) + 1
    if dim is not None:
        width = max(width, dim)
    X = sp.csr_matrix((vals, (rows, cols)), shape=(len(y), max(width, 1)))
    return Dataset(X, np.array(y), name=str(path))


def load_libsvm(path, dim=None):
    path = Path(path)
    opener = bz2.open if path.suffix == ".bz2" else open
    try:
        with opener(path, "rt") as fh:
            ds = parse_libsvm(fh, path=str(path), dim=dim)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    return Dataset(ds.X, ds.y, name=path.stem, sha256=file_sha256(path))


def dump_libsvm(ds, path):
    with open(path, "w") as fh:
        for i in range(ds.n):
            row = ds.X.getrow(i)
            feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in zip(row.indices, row.data))
            label = "+1" if ds.y[i] > 0 else "-1"
            fh.write(f"{label} {feats}".rstrip() + "\n")


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def add_bias(ds):
    """Append a constant feature 1 (index ``dim + 1``)."""
    ones = sp.csr_matrix(np.ones((ds.n, 1)))
    return Dataset(sp.hstack([ds.X, ones], format="csr"), ds.y, ds.name, ds.sha256, dict(ds.meta, bias=True))


def normalize(ds, mode="unit-ball"):
    """Rescale features: ``none``, ``unit-ball`` (max norm 1) or ``per-feature-scale`` (each feature in [-1, 1])."""
    if ds.X.nnz == 0 or not np.any(ds.X.data):
        raise DatasetError("cannot normalize an all-zero dataset")
    if mode == "none":
        X = ds.X
    elif mode == "unit-ball":
        X = ds.X / ds.R
    elif mode == "per-feature-scale":
        scale = np.asarray(abs(ds.X).max(axis=0).todense()).ravel()
        scale[scale == 0] = 1.0
        X = ds.X @ sp.diags(1.0 / scale)
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    return Dataset(sp.csr_matrix(X), ds.y, ds.name, ds.sha256, dict(ds.meta, normalization=mode))


def _unit_ball(rng, n, dim):
    g = rng.normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.uniforms(n) ** (1.0 / dim)
    return g * r[:, None]


def synthetic_separable(n, dim, rho_star=0.5, margin_slack=0.1, seed=0, w_norm=None, min_gap=0.1, radius=1.0):
    """Points in the ball of radius ``radius`` labelled by a witness with zero double ramp loss.

    A random unit direction ``u`` is drawn; points with ``|u.x| < gap`` are
    discarded and the witness ``w* = W u`` is scaled so that every kept point
    has ``y (w*.x) >= rho* + 1 + margin_slack``. Passing ``w_norm`` fixes
    ``W`` and derives the gap instead. A radius other than 1 scales the
    points up and the witness down by the same factor, so margins are kept.

    Returns ``(dataset, w_star, rho_star)``.
    """
    if margin_slack <= 0:
        raise ValueError("margin_slack must be positive")
    if rho_star < 0:
        raise ValueError("rho_star must be non-negative")
    if not radius > 0:
        raise ValueError("radius must be positive")
    target = rho_star + 1.0 + margin_slack
    if w_norm is None:
        if not 0 < min_gap < 1:
            raise ValueError("min_gap must lie in (0, 1)")
        gap = min_gap
        w_norm = target / gap
    else:
        if w_norm <= target:
            raise ValueError(
                f"infeasible geometry: |w*| = {w_norm} cannot reach margin {target} inside the unit ball"
            )
        gap = target / w_norm
    rng = SeededRng(seed)
    u = rng.normal(dim)
    u /= np.linalg.norm(u)
    kept = []
    have = 0
    for _ in range(200):
        batch = _unit_ball(rng, max(2 * n, 64), dim)
        batch = batch[np.abs(batch @ u) >= gap]
        kept.append(batch)
        have += len(batch)
        if have >= n:
            break
    else:
        raise ValueError(f"infeasible geometry: too few unit-ball points with |u.x| >= {gap:.3g}")
    X = np.concatenate(kept)[:n] * radius
    w_star = (w_norm / radius) * u
    y = np.where(X @ w_star > 0, 1, -1).astype(np.int8)
    ds = Dataset(
        sp.csr_matrix(X),
        y,
        name=f"synthetic-separable(n={n},dim={dim},radius={radius},seed={seed})",
        meta={"w_star": w_star, "rho_star": rho_star},
    )
    margins = y * (X @ w_star)
    assert np.all(double_ramp_loss(margins, rho_star, 0.25) == 0.0)
    return ds, w_star, rho_star


def synthetic_noisy(n, dim, flip=0.1, seed=0, radius=1.0):
    """Points in a ball of radius ``radius`` labelled by a random hyperplane with a fraction ``flip`` of labels flipped."""
    if not 0 <= flip < 0.5:
        raise ValueError("flip must lie in [0, 0.5)")
    rng = SeededRng(seed)
    u = rng.normal(dim)
    u /= np.linalg.norm(u)
    if not radius > 0:
        raise ValueError("radius must be positive")
    X = _unit_ball(rng, n, dim) * radius
    y = np.where(X @ u > 0, 1, -1)
    y = np.where(rng.uniforms(n) < flip, -y, y).astype(np.int8)
    return Dataset(sp.csr_matrix(X), y, name=f"synthetic-noisy(n={n},dim={dim},flip={flip},radius={radius},seed={seed})")


# -- streams ---------------------------------------------------------------


def stream_indices(n, T, seed, mode="with-replacement"):
    if T < 1 or n < 1:
        raise ValueError("need T >= 1 and a non-empty dataset")
    rng = SeededRng(seed)
    if mode == "with-replacement":
        return rng.integers(n, T).astype(np.int64)
    if mode == "shuffle-epochs":
        epochs = -(-T // n)
        return np.concatenate([rng.permutation(n) for _ in range(epochs)])[:T].astype(np.int64)
    raise ValueError(f"unknown stream mode {mode!r}")


class LabelRequest:
    """Handle through which a learner may ask for the label of one trial."""

    __slots__ = ("_stream", "_t")

    def __init__(self, stream, t):
        self._stream = stream
        self._t = t

    def reveal(self):
        return self._stream._reveal(self._t)


class Stream:
    """Seeded sequence of examples whose labels are hidden until queried.

    Iterating yields ``(x_t, request)`` pairs; ``request.reveal()`` returns
    ``y_t`` and records the query. :meth:`true_labels` exists for the
    harness's own measurements and must not be handed to a learner.
    """

    def __init__(self, ds, T, seed, mode="with-replacement"):
        self._ds = ds
        self.indices = stream_indices(ds.n, T, seed, mode)
        self.queried = np.zeros(T, dtype=bool)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        X = self._ds.X
        for t, i in enumerate(self.indices):
            yield X.getrow(i).toarray().ravel(), LabelRequest(self, t)

    def _reveal(self, t):
        self.queried[t] = True
        return int(self._ds.y[self.indices[t]])

    def true_labels(self):
        return self._ds.y[self.indices].astype(float)


def stream(ds, T, seed, mode="with-replacement"):
    return Stream(ds, T, seed, mode)


# -- dataset resolution --------------------------------------------------------


def data_dir():
    return Path(os.environ.get(DATA_DIR_ENV, Path.home() / ".cache" / "rejectron"))


def _read_manifest(directory):
    path = directory / "manifest.json"
    return json.loads(path.read_text()) if path.exists() else {}


def fetch_dataset(name, directory=None):
    """Return the local path of a remote LIBSVM dataset, downloading once."""
    if name not in REMOTE_DATASETS:
        raise DatasetError(f"unknown dataset {name!r}")
    directory = Path(directory) if directory else data_dir()
    url = REMOTE_DATASETS[name]
    target = directory / Path(url).name
    manifest = _read_manifest(directory)
    if not target.exists():
        directory.mkdir(parents=True, exist_ok=True)
        try:
            urllib.request.urlretrieve(url, target)
        except OSError as exc:
            raise DatasetError(f"download of {url} failed: {exc}") from exc
    digest = file_sha256(target)
    pinned = manifest.get(name, {}).get("sha256")
    if pinned is None:
        manifest[name] = {"url": url, "file": target.name, "sha256": digest}
        (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    elif pinned != digest:
        raise DatasetError(f"checksum mismatch for {target}: expected {pinned}, got {digest}")
    return target


def load_bundled(name):
    if name not in BUNDLED_DATASETS:
        raise DatasetError(f"unknown bundled dataset {name!r}")
    filename, pinned = BUNDLED_DATASETS[name]
    with resources.as_file(resources.files("rejectron.datasets") / filename) as path:
        ds = load_libsvm(path)
    if ds.sha256 != pinned:
        raise DatasetError(f"bundled dataset {name} failed its checksum")
    return Dataset(ds.X, ds.y, name=name, sha256=ds.sha256)


def _parse_kv(text):
    out = {}
    for part in filter(None, text.split(",")):
        key, sep, value = part.partition("=")
        if not sep:
            raise DatasetError(f"bad synthetic parameter {part!r}")
        out[key.strip()] = value.strip()
    return out


def resolve_dataset(spec, base_dir=None):
    """Turn a dataset string into a :class:`Dataset`.

    Accepted forms: ``synthetic:n=..,dim=..,rho_star=..,slack=..,gap=..,radius=..,seed=..``,
    ``noisy:n=..,dim=..,flip=..,radius=..,seed=..``, ``builtin:<name>``,
    ``remote:<name>`` and a filesystem path (relative to ``base_dir``).
    """
    kind, sep, rest = spec.partition(":")
    try:
        if sep and kind == "synthetic":
            kv = _parse_kv(rest)
            ds, _, _ = synthetic_separable(
                int(kv.pop("n", 500)),
                int(kv.pop("dim", 10)),
                float(kv.pop("rho_star", 0.5)),
                float(kv.pop("slack", 0.1)),
                int(kv.pop("seed", 0)),
                min_gap=float(kv.pop("gap", 0.1)),
                radius=float(kv.pop("radius", 1.0)),
            )
        elif sep and kind == "noisy":
            kv = _parse_kv(rest)
            ds = synthetic_noisy(
                int(kv.pop("n", 1000)),
                int(kv.pop("dim", 10)),
                float(kv.pop("flip", 0.1)),
                int(kv.pop("seed", 0)),
                float(kv.pop("radius", 1.0)),
            )
        elif sep and kind == "builtin":
            return load_bundled(rest)
        elif sep and kind == "remote":
            return load_libsvm(fetch_dataset(rest))
        else:
            path = Path(spec)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            if not path.exists():
                raise DatasetError(f"dataset file {path} does not exist")
            return load_libsvm(path)
    except ValueError as exc:
        raise DatasetError(f"bad dataset spec {spec!r}: {exc}") from exc
    if kv:
        raise DatasetError(f"unknown parameters {sorted(kv)} in dataset spec {spec!r}")
    return ds
