"""JSON interchange format for all machine kinds.

One document per machine: ``kind``, ``alphabet``, ``states``, ``initial``
plus the kind-specific tables.  Probabilities are exact "num/den" strings;
weights and rewards are plain integers.  ``emit_model`` canonicalizes, and
``parse_model(emit_model(m)) == m`` holds for every kind.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .domains import rational, rational_str
from .models import (
    Dfa,
    LabeledMc,
    MarkovRewardModel,
    Nfa,
    NonTerminatingMc,
    RewardMachine,
    WeightedMealy,
    WeightedTs,
)
from .products import AbsorbingProductMc, ProductMc, ProductRewardMc, ProductWts


class SchemaError(ValueError):
    """Malformed model document."""


KINDS = {
    "mc": LabeledMc,
    "mrm": MarkovRewardModel,
    "ntmc": NonTerminatingMc,
    "wts": WeightedTs,
    "dfa": Dfa,
    "nfa": Nfa,
    "rm": RewardMachine,
    "wmm": WeightedMealy,
    "product-mc": ProductMc,
    "product-mrm": ProductRewardMc,
    "product-absorbing": AbsorbingProductMc,
    "product-wts": ProductWts,
}

KIND_OF = {cls: kind for kind, cls in KINDS.items()}


def _prob_row(row: dict) -> dict[str, Fraction]:
    return {succ: rational(p) for succ, p in row.items()}


def _need(doc: dict, *fields: str) -> None:
    for f in fields:
        if f not in doc:
            raise SchemaError(f"missing field {f!r}")


def parse_model(text: str | dict):
    """Parse a JSON model document into the corresponding machine."""
    doc = json.loads(text) if isinstance(text, str) else text
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"unknown kind {kind!r}")
    try:
        if kind in ("mc", "mrm", "ntmc"):
            _need(doc, "alphabet", "states", "initial", "label", "trans")
            common = dict(
                states=tuple(doc["states"]),
                alphabet=tuple(doc["alphabet"]),
                label=dict(doc["label"]),
                trans={x: _prob_row(row) for x, row in doc["trans"].items()},
                initial=doc["initial"],
            )
            if kind == "mc":
                return LabeledMc(**common)
            if kind == "ntmc":
                return NonTerminatingMc(**common)
            _need(doc, "reward")
            return MarkovRewardModel(reward={x: int(r) for x, r in doc["reward"].items()}, **common)
        if kind == "wts":
            _need(doc, "alphabet", "states", "initial", "trans")
            return WeightedTs(
                states=tuple(doc["states"]),
                alphabet=tuple(doc["alphabet"]),
                trans={
                    x: tuple((succ, a, int(m)) for succ, a, m in entries)
                    for x, entries in doc["trans"].items()
                },
                initial=doc["initial"],
            )
        if kind == "dfa":
            _need(doc, "alphabet", "states", "initial", "delta")
            return Dfa(
                states=tuple(doc["states"]),
                alphabet=tuple(doc["alphabet"]),
                delta={
                    y: {a: (tgt, bool(flag)) for a, (tgt, flag) in row.items()}
                    for y, row in doc["delta"].items()
                },
                initial=doc["initial"],
            )
        if kind == "nfa":
            _need(doc, "alphabet", "states", "initial", "delta")
            return Nfa(
                states=tuple(doc["states"]),
                alphabet=tuple(doc["alphabet"]),
                delta={
                    y: {
                        a: tuple((tgt, bool(flag)) for tgt, flag in entries)
                        for a, entries in row.items()
                    }
                    for y, row in doc["delta"].items()
                },
                initial=doc["initial"],
            )
        if kind == "rm":
            _need(doc, "alphabet", "states", "initial", "bound", "delta")
            return RewardMachine(
                states=tuple(doc["states"]),
                alphabet=tuple(doc["alphabet"]),
                bound=int(doc["bound"]),
                delta={
                    y: {a: (tgt, int(w)) for a, (tgt, w) in row.items()}
                    for y, row in doc["delta"].items()
                },
                initial=doc["initial"],
            )
        if kind == "wmm":
            _need(doc, "alphabet", "states", "initial", "delta")
            return WeightedMealy(
                states=tuple(doc["states"]),
                alphabet=tuple(doc["alphabet"]),
                delta={
                    y: {
                        a: tuple((tgt, bool(flag), int(w)) for tgt, flag, w in entries)
                        for a, entries in row.items()
                    }
                    for y, row in doc["delta"].items()
                },
                initial=doc["initial"],
            )
        if kind == "product-mc":
            _need(doc, "states", "initial", "trans")
            return ProductMc(
                states=tuple(doc["states"]),
                trans={x: _prob_row(row) for x, row in doc["trans"].items()},
                initial=doc["initial"],
            )
        if kind == "product-mrm":
            _need(doc, "states", "initial", "trans", "stepreward")
            return ProductRewardMc(
                states=tuple(doc["states"]),
                trans={x: _prob_row(row) for x, row in doc["trans"].items()},
                stepreward={x: int(r) for x, r in doc["stepreward"].items()},
                initial=doc["initial"],
            )
        if kind == "product-absorbing":
            _need(doc, "states", "initial", "trans")
            return AbsorbingProductMc(
                states=tuple(doc["states"]),
                trans={x: _prob_row(row) for x, row in doc["trans"].items()},
                initial=doc["initial"],
            )
        _need(doc, "states", "initial", "trans")
        return ProductWts(
            states=tuple(doc["states"]),
            trans={
                x: tuple((succ, int(w)) for succ, w in entries)
                for x, entries in doc["trans"].items()
            },
            initial=doc["initial"],
        )
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {kind} document: {exc}") from exc


def model_to_dict(model) -> dict:
    kind = KIND_OF.get(type(model))
    if kind is None:
        raise SchemaError(f"cannot serialize {type(model).__name__}")
    doc: dict = {"kind": kind}
    if kind in ("mc", "mrm", "ntmc", "wts", "dfa", "nfa", "rm", "wmm"):
        doc["alphabet"] = list(model.alphabet)
    doc["states"] = list(model.states)
    doc["initial"] = model.initial
    if kind in ("mc", "mrm", "ntmc"):
        doc["label"] = dict(model.label)
        doc["trans"] = {
            x: {succ: rational_str(p) for succ, p in row.items()}
            for x, row in model.trans.items()
        }
        if kind == "mrm":
            doc["reward"] = dict(model.reward)
    elif kind == "wts":
        doc["trans"] = {x: [list(t) for t in entries] for x, entries in model.trans.items()}
    elif kind in ("dfa", "rm"):
        doc["delta"] = {
            y: {a: list(entry) for a, entry in row.items()}
            for y, row in model.delta.items()
        }
        if kind == "rm":
            doc["bound"] = model.bound
    elif kind in ("nfa", "wmm"):
        doc["delta"] = {
            y: {a: [list(e) for e in entries] for a, entries in row.items()}
            for y, row in model.delta.items()
        }
    elif kind in ("product-mc", "product-mrm", "product-absorbing"):
        doc["trans"] = {
            x: {succ: rational_str(p) for succ, p in row.items()}
            for x, row in model.trans.items()
        }
        if kind == "product-mrm":
            doc["stepreward"] = dict(model.stepreward)
    else:
        doc["trans"] = {x: [list(t) for t in entries] for x, entries in model.trans.items()}
    return doc


def emit_model(model) -> str:
    """Canonical JSON rendering of a machine."""
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"
