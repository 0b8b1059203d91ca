"""
Artifact bundles: named presentations, morphisms, covers, stratifications,
formulas and direct image tasks stored in one JSON document.

References between objects are by name. Every schema violation is reported as
a :class:`~diffqe.errors.BundleError` carrying the JSON pointer of the
offending entry.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from diffqe.algebra.fields import GENERATOR, Field
from diffqe.config import DEFAULT_CATALOG_PATH, DEFAULT_LIMITS, Limits
from diffqe.covers.galois_cover import GaloisCoverDesc, validate_cover
from diffqe.errors import BundleError, DiffQEError
from diffqe.logic.parser import parse
from diffqe.logic.syntax import Formula, free_vars
from diffqe.presentations import DirectPresentation, PresentationMorphism, validate
from diffqe.qe.direct_image import CASES, COMPOSITE, DirectImageTask
from diffqe.stratifications import GaloisStratification

logger = logging.getLogger(__name__)

BUNDLE_VERSION = 1
SECTIONS = ("presentations", "morphisms", "covers", "stratifications", "formulas", "tasks")


def pointer(*parts: Union[str, int]) -> str:
    """
    A JSON pointer to the given path.

    Example:
        >>> pointer("covers", "a/b", 0)
        '/covers/a~1b/0'
    """
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


@dataclass(frozen=True)
class CatalogFormula:
    """
    A formula of the catalog together with the data needed to evaluate it.

    Attributes:
        name: Catalog key.
        formula: The parsed formula.
        text: Source text, kept for canonical output.
        field: Base field of the difference fields it is evaluated over.
        variables: Free variables in output order.
        witness_degree: Extension degree over which quantifiers range in the oracle.
    """

    name: str
    formula: Formula
    text: str
    field: Field
    variables: Tuple[str, ...]
    witness_degree: int = 1

    def to_json(self) -> Dict[str, Any]:
        data = {"text": self.text, "field": self.field.descriptor(), "variables": list(self.variables)}
        if self.witness_degree != 1:
            data["witness_degree"] = self.witness_degree
        return data


@dataclass
class ArtifactBundle:
    """
    A named collection of artifacts.

    Attributes:
        presentations: Presentations by name.
        morphisms: Morphisms by name; their source and target are presentations of the bundle.
        covers: Galois covers by name; their bases are presentations of the bundle.
        stratifications: Galois stratifications by name.
        formulas: Formulas by name.
        tasks: Direct image tasks by name.
        version: Format version.
    """

    presentations: Dict[str, DirectPresentation] = field(default_factory=dict)
    morphisms: Dict[str, PresentationMorphism] = field(default_factory=dict)
    covers: Dict[str, GaloisCoverDesc] = field(default_factory=dict)
    stratifications: Dict[str, GaloisStratification] = field(default_factory=dict)
    formulas: Dict[str, CatalogFormula] = field(default_factory=dict)
    tasks: Dict[str, DirectImageTask] = field(default_factory=dict)
    version: int = BUNDLE_VERSION
    _raw: Dict[str, Dict[str, Any]] = field(default_factory=lambda: {s: {} for s in SECTIONS}, repr=False)

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ArtifactBundle":
        """
        Build a bundle, resolving references section by section.

        Raises:
            BundleError: On a version mismatch, an unknown section, a missing
                reference or an object that does not parse.
        """
        if not isinstance(data, Mapping):
            raise BundleError("A bundle must be a JSON object")
        version = data.get("version", BUNDLE_VERSION)
        if version != BUNDLE_VERSION:
            raise BundleError(f"Unsupported bundle version {version}, expected {BUNDLE_VERSION}", pointer("version"))
        unknown = sorted(set(data) - set(SECTIONS) - {"version"})
        if unknown:
            raise BundleError(f"Unknown section {unknown[0]!r}", pointer(unknown[0]))
        bundle = cls()
        for name, entry in _section(data, "presentations"):
            with _located("presentations", name):
                bundle.add_presentation(name, DirectPresentation.from_json(entry, name=name))
        for name, entry in _section(data, "morphisms"):
            source = bundle._resolve("presentations", entry.get("source"), "morphisms", name, "source")
            target = bundle._resolve("presentations", entry.get("target"), "morphisms", name, "target")
            with _located("morphisms", name):
                bundle.add_morphism(name, PresentationMorphism.from_texts(source, target, entry.get("f0", [])))
        for name, entry in _section(data, "covers"):
            base = bundle._resolve("presentations", entry.get("base"), "covers", name, "base")
            with _located("covers", name):
                bundle.add_cover(name, GaloisCoverDesc.from_json(entry, base, name=name), base_name=entry["base"])
        for name, entry in _section(data, "stratifications"):
            ambient = bundle._resolve("presentations", entry.get("ambient"), "stratifications", name, "ambient")
            for i, stratum in enumerate(entry.get("strata", [])):
                ref = stratum.get("cover")
                if isinstance(ref, str):
                    bundle._resolve("covers", ref, "stratifications", name, "strata", i, "cover")
            with _located("stratifications", name):
                A = GaloisStratification.from_json(entry, ambient, bundle.covers, name=name)
            bundle.stratifications[name] = A
            bundle._raw["stratifications"][name] = dict(entry)
        for name, entry in _section(data, "formulas"):
            with _located("formulas", name):
                bundle.add_formula(
                    name,
                    entry["text"],
                    Field.parse(entry.get("field", "Q")),
                    entry.get("variables"),
                    entry.get("witness_degree", 1),
                )
        for name, entry in _section(data, "tasks"):
            morphism = bundle._resolve("morphisms", entry.get("morphism"), "tasks", name, "morphism")
            A = bundle._resolve("stratifications", entry.get("stratification"), "tasks", name, "stratification")
            case = entry.get("case", COMPOSITE)
            if case not in CASES:
                raise BundleError(f"Unknown case {case!r}", pointer("tasks", name, "case"))
            with _located("tasks", name):
                bundle.tasks[name] = DirectImageTask(morphism, A, case, name=name)
            bundle._raw["tasks"][name] = dict(entry)
        logger.debug("Loaded bundle with %s", {s: len(getattr(bundle, s)) for s in SECTIONS})
        return bundle

    def _resolve(self, section: str, ref: Optional[str], *where: Union[str, int]):
        objects = getattr(self, section)
        if not isinstance(ref, str) or ref not in objects:
            raise BundleError(f"Unresolved reference {ref!r} into {section}", pointer(*where))
        return objects[ref]

    def add_presentation(self, name: str, presentation: DirectPresentation):
        self.presentations[name] = presentation
        self._raw["presentations"][name] = presentation.to_json()

    def add_morphism(self, name: str, morphism: PresentationMorphism):
        source, target = self.name_of(morphism.source), self.name_of(morphism.target)
        self.morphisms[name] = morphism
        self._raw["morphisms"][name] = {"source": source, "target": target, **morphism.to_json()}

    def add_cover(self, name: str, cover: GaloisCoverDesc, base_name: Optional[str] = None):
        base_name = base_name or self.name_of(cover.base)
        self.covers[name] = cover
        self._raw["covers"][name] = {"base": base_name, **cover.to_json()}

    def add_stratification(self, name: str, stratification: GaloisStratification):
        ambient = self.name_of(stratification.ambient)
        names = {id(c): n for n, c in self.covers.items()}
        refs = {i: names[id(s.cover)] for i, s in enumerate(stratification.strata) if id(s.cover) in names}
        data = stratification.to_json(refs)
        data["ambient"] = ambient
        self.stratifications[name] = stratification
        self._raw["stratifications"][name] = data

    def add_formula(
        self,
        name: str,
        text: str,
        field_: Field,
        variables: Optional[Sequence[str]] = None,
        witness_degree: int = 1,
    ):
        formula = parse(text)
        if variables is None:
            constants = {GENERATOR} if field_.kind == "Fq" else set()
            variables = sorted(free_vars(formula) - constants)
        variables = tuple(variables)
        entry = CatalogFormula(name, formula, text, field_, variables, witness_degree)
        self.formulas[name] = entry
        self._raw["formulas"][name] = entry.to_json()

    def add_task(self, name: str, task: DirectImageTask):
        morphism = next((n for n, m in self.morphisms.items() if m is task.morphism), None)
        stratification = next((n for n, a in self.stratifications.items() if a is task.stratification), None)
        if morphism is None or stratification is None:
            raise BundleError("Task objects must be registered in the bundle first", pointer("tasks", name))
        self.tasks[name] = task
        self._raw["tasks"][name] = {"morphism": morphism, "stratification": stratification, "case": task.case}

    def name_of(self, presentation: DirectPresentation) -> str:
        """The bundle name of a registered presentation."""
        for name, P in self.presentations.items():
            if P is presentation:
                return name
        for name, P in self.presentations.items():
            if P == presentation:
                return name
        raise BundleError(f"Presentation {presentation.name or presentation.variables} is not in the bundle")

    def get(self, section: str, name: str):
        """
        Look up an object by section and name.

        Raises:
            BundleError: If there is no such object.
        """
        if section not in SECTIONS:
            raise BundleError(f"Unknown section {section!r}")
        objects = getattr(self, section)
        if name not in objects:
            raise BundleError(f"No {section[:-1]} named {name!r}", pointer(section, name))
        return objects[name]

    def find(self, name: str) -> Tuple[str, Any]:
        """The section and object for a name, searching sections in order."""
        for section in SECTIONS:
            objects = getattr(self, section)
            if name in objects:
                return section, objects[name]
        raise BundleError(f"No object named {name!r}")

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"version": self.version}
        for section in SECTIONS:
            if self._raw[section]:
                data[section] = {name: self._raw[section][name] for name in sorted(self._raw[section])}
        return data

    def dumps(self) -> str:
        """Canonical text: sorted keys, two-space indentation, trailing newline."""
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def errors_of(self, section: str, name: str, limits: Limits = DEFAULT_LIMITS) -> List[str]:
        """Validation errors of one object; formulas and tasks check their parts."""
        obj = self.get(section, name)
        if section == "presentations":
            return validate(obj, limits).errors
        if section == "morphisms":
            return obj.validate()
        if section == "covers":
            return validate_cover(obj, limits).errors
        if section == "stratifications":
            return obj.validate()
        if section == "tasks":
            return obj.morphism.validate() + obj.stratification.validate()
        return []

    def check(self, section: str, name: str, limits: Limits = DEFAULT_LIMITS):
        """
        Refuse an object that fails validation.

        Raises:
            BundleError: With the object's pointer and its first error.
        """
        errors = self.errors_of(section, name, limits)
        if errors:
            raise BundleError(f"Fails validation: {errors[0]}", pointer(section, name))
        return self.get(section, name)

    def validate(self, limits: Limits = DEFAULT_LIMITS, verbose: bool = False) -> Dict[str, List[str]]:
        """
        Run every object's validation.

        Returns:
            Errors per JSON pointer; objects without errors are omitted.
        """
        report: Dict[str, List[str]] = {}
        items = [(s, n) for s in SECTIONS[:4] for n in sorted(getattr(self, s))]
        for section, name in tqdm(items, desc="Validating", disable=not verbose):
            errors = self.errors_of(section, name, limits)
            if errors:
                report[pointer(section, name)] = errors
        logger.info("Validated %d objects, %d with errors", len(items), len(report))
        return report


def _section(data: Mapping[str, Any], section: str):
    entries = data.get(section, {})
    if not isinstance(entries, Mapping):
        raise BundleError(f"Section {section!r} must be an object", pointer(section))
    for name in sorted(entries):
        entry = entries[name]
        if not isinstance(entry, Mapping):
            raise BundleError("Entries must be objects", pointer(section, name))
        yield name, entry


class _located:
    """Re-raise parse failures inside a bundle entry as located bundle errors."""

    def __init__(self, section: str, name: str):
        self.path = pointer(section, name)

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        if exc is None or isinstance(exc, BundleError):
            return False
        if isinstance(exc, (DiffQEError, KeyError, ValueError, TypeError)):
            detail = exc.detail if isinstance(exc, DiffQEError) else f"{type(exc).__name__}: {exc}"
            raise BundleError(detail, self.path) from exc
        return False


def load(path: Union[str, Path]) -> ArtifactBundle:
    """
    Read a bundle from a JSON file.

    Raises:
        BundleError: If the file is not valid JSON or violates the schema.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise BundleError(f"Invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return ArtifactBundle.from_json(data)


def save(bundle: ArtifactBundle, path: Union[str, Path]) -> None:
    """Write the canonical form of a bundle."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(bundle.dumps())


def load_catalog(path: Optional[Union[str, Path]] = None) -> ArtifactBundle:
    """
    Load the reference catalog shipped with the repository.

    Example:
        >>> catalog = load_catalog()
        >>> sorted(catalog.covers)
        ['kummer']
    """
    return load(path or DEFAULT_CATALOG_PATH)
