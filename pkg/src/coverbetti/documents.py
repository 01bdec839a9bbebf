"""JSON input documents: validation, parsing and re-serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .alexander import AbelianizationMap, braid_closure
from .chain import EquivariantComplex, presentation_complex
from .errors import InputError
from .fpgroup import GroupPresentation, PadicRep, abelian_rep
from .iwasawa import ModulePresentation


@lru_cache(maxsize=None)
def _schemas() -> dict:
    return json.loads(resources.files(__package__).joinpath("schemas.json").read_text("utf-8"))


def validate(doc, kind: str) -> None:
    root = _schemas()
    schema = {"$defs": root["$defs"], **root[kind]}
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise InputError(f"invalid {kind} document at {where}: {exc.message}") from None


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


@dataclass
class GroupInput:
    """A presentation plus whatever structure the document attached to it."""

    pres: GroupPresentation
    ab: AbelianizationMap | None = None
    rep_doc: dict | None = None
    complex: EquivariantComplex | None = None
    d_user: int | None = None
    braid: tuple | None = None  # (braid_word, strands) when built from a braid
    name: str | None = None

    def rep(self, prime: int | None, levels: int | None) -> PadicRep:
        """The p-adic representation, explicit or built from the meridian map."""
        if self.rep_doc is not None:
            p = self.rep_doc.get("p", prime)
            if p is None:
                raise InputError("no prime: give rep.p or --prime")
            if prime is not None and p != prime:
                raise InputError(f"--prime {prime} disagrees with rep.p = {p}")
            max_level = self.rep_doc.get("max_level", levels if levels is not None else 1)
            return PadicRep(p, self.rep_doc["n"], self.rep_doc["images"], max_level)
        if self.ab is None:
            raise InputError("document has neither rep nor meridian_images")
        if prime is None:
            raise InputError("a prime is required to build the abelian representation")
        return abelian_rep(self.ab.images, prime, levels if levels is not None else 1)

    def chain_complex(self) -> EquivariantComplex:
        return self.complex if self.complex is not None else presentation_complex(self.pres)

    def to_document(self) -> dict:
        doc: dict = {}
        if self.name is not None:
            doc["name"] = self.name
        if self.braid is not None:
            doc["braid_word"], doc["strands"] = list(self.braid[0]), self.braid[1]
        else:
            doc["generators"] = list(self.pres.generators)
            doc["relators"] = [list(r) for r in self.pres.relators]
            if self.ab is not None:
                doc["meridian_images"] = [list(v) for v in self.ab.images]
        if self.rep_doc is not None:
            doc["rep"] = self.rep_doc
        if self.complex is not None:
            doc["complex"] = self.complex.to_document()
        if self.d_user is not None:
            doc["d"] = self.d_user
        return doc


def parse_group(doc: dict) -> GroupInput:
    validate(doc, "group")
    if "braid_word" in doc:
        braid = (tuple(doc["braid_word"]), doc["strands"])
        pres, ab, _ = braid_closure(*braid)
    else:
        braid = None
        pres = GroupPresentation(doc["generators"], doc.get("relators", []))
        ab = AbelianizationMap(doc["meridian_images"]) if "meridian_images" in doc else None
        if ab is not None:
            ab.validate(pres)
    cx = None
    if "complex" in doc:
        if doc.get("presentation_complex"):
            raise InputError("give either complex or presentation_complex, not both")
        cx = EquivariantComplex.from_document(doc["complex"])
        if cx.max_generator() > pres.num_generators:
            raise InputError("complex uses generators outside the presentation")
    return GroupInput(pres, ab, doc.get("rep"), cx, doc.get("d"), braid, doc.get("name"))


def parse_module(doc: dict) -> ModulePresentation:
    validate(doc, "module")
    return ModulePresentation.from_document(doc)


def resolve(base: Path, rel: str) -> Path:
    path = Path(rel)
    return path if path.is_absolute() else base / path
