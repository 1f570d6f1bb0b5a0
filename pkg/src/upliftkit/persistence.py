"""JSON model files for fitted estimators."""

import json
import os
import tempfile

from .base import UpliftEstimator, estimator_class

FORMAT_VERSION = 1


def model_to_json(est: UpliftEstimator) -> str:
    doc = {"format_version": FORMAT_VERSION, **est.to_dict()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def model_from_json(text: str) -> UpliftEstimator:
    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('format_version')!r}")
    return estimator_class(doc["method"]).from_dict(doc)


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(est: UpliftEstimator, path) -> None:
    atomic_write(path, model_to_json(est))


def load_model(path) -> UpliftEstimator:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(fh.read())
