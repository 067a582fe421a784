"""
Lecture et écriture des documents de groupes et d'homomorphismes

Format ligne à ligne:

    GROUP A5
      PERM 5
      GEN (1 2 3 4 5)
      GEN (1 2 3)
    END
    HOM phi FROM C3 TO A5
      MAP g -> (1 2 3)
    END
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

from loguru import logger
from pydantic import BaseModel

from src.catalog import named_group
from src.config import setting
from src.errors import InputError, PreconditionError, SpecSyntaxError
from src.groups import (
    FiniteGroup,
    GroupHom,
    direct_product,
    group_from_permutations,
    parse_cycles,
    product_index,
)
from src.presentation import Presentation, realize, word_value

GroupKind = Literal["perm", "cayley", "presentation", "product", "named"]

_KINDS = {"PERM": "perm", "CAYLEY": "cayley", "PRESENTATION": "presentation", "PRODUCT": "product", "NAMED": "named"}
_NAME = r"[A-Za-z_][\w.]*"
_GROUP = re.compile(rf"^GROUP\s+({_NAME})$")
_HOM = re.compile(rf"^HOM\s+({_NAME})\s+FROM\s+({_NAME})\s+TO\s+({_NAME})$")
_GEN = re.compile(rf"^GEN\s+(?:({_NAME})\s*=\s*)?(.+)$")
_MAP = re.compile(rf"^MAP\s+({_NAME})\s*->\s*(.+)$")
_POWER = re.compile(rf"^({_NAME})(?:\^(-?\d+))?$")


class GroupDecl(BaseModel):
    """Déclaration GROUP telle qu'écrite dans le document"""

    name: str
    kind: GroupKind
    degree: Optional[int] = None
    order: Optional[int] = None
    generators: list[tuple[str, str]] = []
    rows: list[list[int]] = []
    presentation_generators: list[str] = []
    relators: list[str] = []
    factors: list[str] = []
    catalog_name: Optional[str] = None
    line: int = 0


class HomDecl(BaseModel):
    name: str
    source: str
    target: str
    images: list[tuple[str, str]] = []
    line: int = 0


@dataclass
class BuiltGroup:
    """Groupe construit, avec les noms de ses générateurs et la lecture de ses éléments"""

    decl: GroupDecl
    group: FiniteGroup
    generator_names: list[str]
    generator_elements: list[int]
    factors: list["BuiltGroup"] = field(default_factory=list)

    def generator(self, name: str) -> int:
        if name not in self.generator_names:
            raise PreconditionError(f"{self.decl.name}: générateur inconnu {name}")
        return self.generator_elements[self.generator_names.index(name)]

    def parse_element(self, text: str) -> int:
        text = text.strip()
        kind = self.decl.kind
        if kind in ("perm", "named"):
            first = self.group.elements[0]
            if isinstance(first, tuple):
                # produit du catalogue (Z2^3): composantes séparées par |
                parts = text.split("|")
                if len(parts) != len(first):
                    raise PreconditionError(f"{self.decl.name}: {len(first)} composantes attendues dans {text!r}")
                return self.group.index_of(tuple(parse_cycles(p, c.size) for p, c in zip(parts, first)))
            return self.group.index_of(parse_cycles(text, first.size))
        if kind == "cayley":
            try:
                x = int(text)
            except ValueError as e:
                raise PreconditionError(f"{self.decl.name}: indice attendu, reçu {text!r}") from e
            if not 0 <= x < self.group.order:
                raise PreconditionError(f"{self.decl.name}: indice {x} hors de [0, {self.group.order})")
            return x
        if kind == "presentation":
            word = parse_word(text, self.generator_names)
            return word_value(self.group, self.generator_elements, word)
        parts = text.split("|")
        if len(parts) != len(self.factors):
            raise PreconditionError(f"{self.decl.name}: {len(self.factors)} composantes attendues dans {text!r}")
        coords = [f.parse_element(p) for f, p in zip(self.factors, parts)]
        return product_index([f.group for f in self.factors], coords)


@dataclass
class GroupSpecDoc:
    group_decls: list[GroupDecl] = field(default_factory=list)
    hom_decls: list[HomDecl] = field(default_factory=list)
    groups: dict[str, BuiltGroup] = field(default_factory=dict)
    homs: dict[str, GroupHom] = field(default_factory=dict)

    def hom(self, name: Optional[str] = None) -> GroupHom:
        """Homomorphisme nommé; sans nom, l'unique homomorphisme du document"""
        if name is None:
            if len(self.homs) != 1:
                raise PreconditionError(f"--hom requis: le document déclare {len(self.homs)} homomorphismes")
            return next(iter(self.homs.values()))
        if name not in self.homs:
            raise PreconditionError(f"homomorphisme inconnu: {name}")
        return self.homs[name]


def parse_word(text: str, names: list[str], line: int = 0) -> tuple[int, ...]:
    """'a^2 b a^-1' -> lettres signées; '1' est le mot vide"""
    word: list[int] = []
    for token in text.split():
        if token == "1":
            continue
        match = _POWER.match(token)
        if not match or match[1] not in names:
            raise SpecSyntaxError(f"jeton de mot invalide: {token!r}", line)
        letter = names.index(match[1]) + 1
        power = int(match[2]) if match[2] is not None else 1
        word.extend([letter if power > 0 else -letter] * abs(power))
    return tuple(word)


def _lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            yield number, content


def _parse_declarations(text: str) -> tuple[list[GroupDecl], list[HomDecl]]:
    groups: list[GroupDecl] = []
    homs: list[HomDecl] = []
    current: Optional[dict] = None
    section = None
    for number, content in _lines(text):
        keyword = content.split()[0]
        if section is None:
            if match := _GROUP.match(content):
                section, current = "group", {"name": match[1], "line": number}
            elif match := _HOM.match(content):
                section = "hom"
                current = {"name": match[1], "source": match[2], "target": match[3], "line": number, "images": []}
            else:
                raise SpecSyntaxError(f"GROUP ou HOM attendu, reçu {content!r}", number)
            continue

        if keyword == "END":
            if section == "group":
                if "kind" not in current:
                    raise SpecSyntaxError(f"groupe {current['name']} sans description", number)
                groups.append(GroupDecl(**current))
            else:
                homs.append(HomDecl(**current))
            section, current = None, None
            continue

        if section == "hom":
            match = _MAP.match(content)
            if not match:
                raise SpecSyntaxError(f"MAP attendu, reçu {content!r}", number)
            current["images"].append((match[1], match[2].strip()))
            continue

        _group_line(current, keyword, content, number)

    if section is not None:
        raise SpecSyntaxError(f"END manquant pour {current['name']}", current["line"])
    return groups, homs


def _group_line(current: dict, keyword: str, content: str, number: int):
    args = content.split()[1:]
    if keyword in _KINDS:
        if "kind" in current:
            raise SpecSyntaxError("description de groupe en double", number)
        kind = _KINDS[keyword]
        current["kind"] = kind
        try:
            if kind == "perm":
                (current["degree"],) = [int(a) for a in args]
            elif kind == "cayley":
                (current["order"],) = [int(a) for a in args]
            elif kind == "named":
                (current["catalog_name"],) = args
        except ValueError as e:
            raise SpecSyntaxError(f"arguments invalides pour {keyword}", number) from e
        if kind == "presentation":
            current["presentation_generators"] = args
        elif kind == "product":
            if not args:
                raise SpecSyntaxError("PRODUCT sans facteurs", number)
            current["factors"] = args
        return

    kind = current.get("kind")
    if keyword == "GEN" and kind in ("perm", "cayley"):
        match = _GEN.match(content)
        if not match:
            raise SpecSyntaxError(f"GEN invalide: {content!r}", number)
        gens = current.setdefault("generators", [])
        name = match[1] or f"g{len(gens) + 1}"
        if kind == "cayley" and match[1] is None:
            raise SpecSyntaxError("GEN <nom> = <indice> attendu", number)
        gens.append((name, match[2].strip()))
    elif keyword == "ROW" and kind == "cayley":
        try:
            current.setdefault("rows", []).append([int(a) for a in args])
        except ValueError as e:
            raise SpecSyntaxError("ROW: indices entiers attendus", number) from e
    elif keyword == "REL" and kind == "presentation":
        current.setdefault("relators", []).append(" ".join(args))
    else:
        raise SpecSyntaxError(f"ligne inattendue dans GROUP: {content!r}", number)


class SpecBuilder:
    """Construit les groupes et homomorphismes déclarés, dans l'ordre du document"""

    def __init__(self, max_cosets: Optional[int] = None):
        self.max_cosets = max_cosets
        self.built: dict[str, BuiltGroup] = {}

    def build_group(self, decl: GroupDecl) -> BuiltGroup:
        if decl.name in self.built:
            raise SpecSyntaxError(f"groupe {decl.name} déclaré deux fois", decl.line)
        try:
            built = getattr(self, f"_build_{decl.kind}")(decl)
        except InputError as e:
            e.witness.setdefault("line", decl.line)
            raise
        self.built[decl.name] = built
        logger.debug(f"groupe {decl.name}: ordre {built.group.order}")
        return built

    def _build_perm(self, decl: GroupDecl) -> BuiltGroup:
        names = [n for n, _ in decl.generators]
        G = group_from_permutations(decl.degree, [c for _, c in decl.generators], label=decl.name)
        return BuiltGroup(decl, G, names, list(G.generators))

    def _build_named(self, decl: GroupDecl) -> BuiltGroup:
        G = named_group(decl.catalog_name)
        G = FiniteGroup(G.mul, decl.name, generators=G.generators, elements=G.elements, check=False)
        gens = list(G.generators)
        return BuiltGroup(decl, G, [f"g{i + 1}" for i in range(len(gens))], gens)

    def _build_cayley(self, decl: GroupDecl) -> BuiltGroup:
        if len(decl.rows) != decl.order or any(len(r) != decl.order for r in decl.rows):
            raise SpecSyntaxError(f"table de {decl.name}: {decl.order} lignes de {decl.order} attendues", decl.line)
        gens = []
        for name, text in decl.generators:
            try:
                gens.append(int(text))
            except ValueError as e:
                raise SpecSyntaxError(f"générateur {name}: indice attendu", decl.line) from e
        G = FiniteGroup(decl.rows, decl.name, generators=gens if gens else None)
        names = [n for n, _ in decl.generators] or [f"g{i + 1}" for i in range(len(G.generators))]
        return BuiltGroup(decl, G, names, list(G.generators))

    def _build_presentation(self, decl: GroupDecl) -> BuiltGroup:
        names = decl.presentation_generators
        relators = tuple(parse_word(r, names, decl.line) for r in decl.relators)
        P = Presentation(len(names), relators, decl.name, tuple(names))
        realized = realize(P, setting(self.max_cosets, "max_cosets"), label=decl.name)
        return BuiltGroup(decl, realized.group, list(names), list(realized.generator_images))

    def _build_product(self, decl: GroupDecl) -> BuiltGroup:
        factors = []
        for name in decl.factors:
            if name not in self.built:
                raise SpecSyntaxError(f"facteur inconnu: {name}", decl.line)
            factors.append(self.built[name])
        G = direct_product([f.group for f in factors], label=decl.name)
        names, elements = [], []
        for k, f in enumerate(factors):
            for gname, x in zip(f.generator_names, f.generator_elements):
                coords = [0] * len(factors)
                coords[k] = x
                names.append(f"{f.decl.name}.{gname}")
                elements.append(product_index([h.group for h in factors], coords))
        return BuiltGroup(decl, G, names, elements, factors)

    def build_hom(self, decl: HomDecl) -> GroupHom:
        for side in (decl.source, decl.target):
            if side not in self.built:
                raise SpecSyntaxError(f"groupe non déclaré: {side}", decl.line)
        source, target = self.built[decl.source], self.built[decl.target]
        images = dict(decl.images)
        for gname in images:
            if gname not in source.generator_names:
                raise SpecSyntaxError(f"{decl.source} n'a pas de générateur {gname}", decl.line)
        missing = [g for g in source.generator_names if g not in images]
        if missing:
            raise SpecSyntaxError(f"images manquantes pour {', '.join(missing)}", decl.line)
        try:
            gens = [source.generator(g) for g in source.generator_names]
            values = [target.parse_element(images[g]) for g in source.generator_names]
            return GroupHom.from_generators(source.group, target.group, gens, values)
        except InputError as e:
            e.witness.setdefault("line", decl.line)
            raise


def parse_spec(text: str, max_cosets: Optional[int] = None) -> GroupSpecDoc:
    """Analyse un document et construit tous les objets déclarés"""
    group_decls, hom_decls = _parse_declarations(text)
    builder = SpecBuilder(max_cosets)
    doc = GroupSpecDoc(group_decls, hom_decls)
    for decl in group_decls:
        doc.groups[decl.name] = builder.build_group(decl)
    for decl in hom_decls:
        if decl.name in doc.homs:
            raise SpecSyntaxError(f"homomorphisme {decl.name} déclaré deux fois", decl.line)
        doc.homs[decl.name] = builder.build_hom(decl)
    return doc


def load_spec(path: str | Path, max_cosets: Optional[int] = None) -> GroupSpecDoc:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"document illisible: {path}: {e}") from e
    return parse_spec(text, max_cosets)


def render_spec(doc: GroupSpecDoc) -> str:
    """Inverse de parse_spec, aux commentaires et à la mise en page près"""
    out: list[str] = []
    for g in doc.group_decls:
        out.append(f"GROUP {g.name}")
        if g.kind == "perm":
            out.append(f"  PERM {g.degree}")
            out.extend(f"  GEN {name} = {cycles}" for name, cycles in g.generators)
        elif g.kind == "cayley":
            out.append(f"  CAYLEY {g.order}")
            out.extend("  ROW " + " ".join(str(x) for x in row) for row in g.rows)
            out.extend(f"  GEN {name} = {index}" for name, index in g.generators)
        elif g.kind == "presentation":
            out.append("  PRESENTATION " + " ".join(g.presentation_generators))
            out.extend(f"  REL {r}" for r in g.relators)
        elif g.kind == "product":
            out.append("  PRODUCT " + " ".join(g.factors))
        else:
            out.append(f"  NAMED {g.catalog_name}")
        out.append("END")
    for h in doc.hom_decls:
        out.append(f"HOM {h.name} FROM {h.source} TO {h.target}")
        out.extend(f"  MAP {g} -> {image}" for g, image in h.images)
        out.append("END")
    return "\n".join(out) + "\n"
