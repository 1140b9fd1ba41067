"""Loading and validating JSON spec files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import DEFAULT_TOL, IndexedAlgebra, build_algebra
from .coaction import (
    CoactionTable,
    from_entries,
    from_group_action,
    permutation_action,
    perturbed,
    translation_coaction,
    trivial_coaction,
    unitary_action,
)
from .hopf import (
    FiniteGroup,
    HopfData,
    from_group_algebra,
    from_group_function_algebra,
    group_table,
    hopf_from_custom,
)

SUITE_ORDER = ("algebra", "hopf", "coaction", "tower", "equivariance", "fixed_points", "closure",
               "lattice", "kac")


class SpecError(ValueError):
    """A malformed spec; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunOptions:
    n_max: int | None = None
    tolerance: float = DEFAULT_TOL
    suites: tuple[str, ...] = SUITE_ORDER
    seed: int = 0


@dataclass
class SpecFile:
    name: str
    algebra: IndexedAlgebra | None
    hopf: HopfData | None
    coaction: CoactionTable | None
    run: RunOptions = field(default_factory=RunOptions)
    raw: dict = field(default_factory=dict)


def _require(section: dict, key: str, path: str) -> Any:
    if not isinstance(section, dict):
        raise SpecError(path, "expected an object")
    if key not in section:
        raise SpecError(f"{path}.{key}" if path else key, "missing field")
    return section[key]


def _complex_array(value, path: str) -> np.ndarray:
    """A real array, or {"re": [...], "im": [...]} with matching shapes."""
    try:
        if isinstance(value, dict):
            re = np.asarray(_require(value, "re", path), dtype=float)
            im = np.asarray(value.get("im", np.zeros(re.shape)), dtype=float)
            if re.shape != im.shape:
                raise SpecError(path, "re and im arrays differ in shape")
            return re + 1j * im
        return np.asarray(value, dtype=float).astype(complex)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(path, f"not a numeric array ({exc})") from exc


def _group(value, path: str) -> FiniteGroup:
    try:
        if isinstance(value, str):
            return group_table(value)
        if isinstance(value, dict):
            return FiniteGroup(_require(value, "table", path), value.get("name", "G"))
        return FiniteGroup(value)
    except SpecError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise SpecError(path, str(exc)) from exc


def parse_algebra(section: dict, path: str = "algebra") -> IndexedAlgebra:
    blocks = _require(section, "blocks", path)
    weights = _require(section, "weights", path)
    try:
        return build_algebra(blocks, weights)
    except (ValueError, TypeError) as exc:
        raise SpecError(path, str(exc)) from exc


def parse_hopf(section: dict, path: str = "hopf") -> tuple[HopfData, FiniteGroup | None]:
    kind = _require(section, "kind", path)
    if kind in ("function_algebra", "group_algebra"):
        group = _group(_require(section, "group", path), f"{path}.group")
        build = from_group_function_algebra if kind == "function_algebra" else from_group_algebra
        return build(group), group
    if kind == "custom":
        dim = _require(section, "dim", path)
        arrays = {key: _complex_array(_require(section, key, path), f"{path}.{key}")
                  for key in ("m", "delta", "eps", "s", "star")}
        expected = {"m": dim**3, "delta": dim**3, "eps": dim, "s": dim**2, "star": dim**2}
        for key, size in expected.items():
            if arrays[key].size != size:
                raise SpecError(f"{path}.{key}", f"expected {size} values, got {arrays[key].size}")
        unit = _complex_array(section["unit"], f"{path}.unit") if "unit" in section else None
        return hopf_from_custom(dim, arrays["m"], arrays["delta"], arrays["eps"], arrays["s"],
                                arrays["star"], unit=unit, labels=section.get("labels")), None
    raise SpecError(f"{path}.kind", f"unknown hopf kind {kind!r}")


def _action_matrix(alg: IndexedAlgebra, item, path: str) -> np.ndarray:
    if not isinstance(item, dict):
        raise SpecError(path, "expected {'permutation': [...]} or {'unitary': [[...]]}")
    try:
        if "permutation" in item:
            return permutation_action(alg, item["permutation"])
        if "unitary" in item:
            return unitary_action(alg, _complex_array(item["unitary"], f"{path}.unitary"))
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(path, str(exc)) from exc
    raise SpecError(path, "expected a 'permutation' or 'unitary' field")


def parse_coaction(section: dict, alg: IndexedAlgebra | None, hopf: HopfData,
                   group: FiniteGroup | None, tol: float, path: str = "coaction") -> CoactionTable:
    kind = _require(section, "kind", path)
    try:
        if kind == "translation":
            coaction = translation_coaction(hopf, tol)
        elif alg is None:
            raise SpecError("algebra", f"coaction kind {kind!r} needs an algebra section")
        elif kind == "trivial":
            coaction = trivial_coaction(alg, hopf)
        elif kind == "group_action":
            if group is None or hopf.name.startswith("C["):
                raise SpecError("hopf.kind", "group_action coactions need a function_algebra hopf section")
            maps = _require(section, "maps", path)
            if not isinstance(maps, list):
                raise SpecError(f"{path}.maps", "expected a list indexed by group element")
            matrices = [_action_matrix(alg, item, f"{path}.maps[{g}]") for g, item in enumerate(maps)]
            coaction = from_group_action(alg, group, matrices,
                                         require_invariant=bool(section.get("require_invariant", True)),
                                         tol=tol)
        elif kind == "explicit":
            entries = _require(section, "entries", path)
            for pos, entry in enumerate(entries):
                for key in ("k", "l", "i", "j", "h_coeffs"):
                    _require(entry, key, f"{path}.entries[{pos}]")
            coaction = from_entries(alg, hopf, entries)
        else:
            raise SpecError(f"{path}.kind", f"unknown coaction kind {kind!r}")
    except SpecError:
        raise
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise SpecError(path, str(exc)) from exc
    if "perturb" in section:
        p = section["perturb"]
        quad = _require(p, "quadruple", f"{path}.perturb")
        amount = complex(*p["amount"]) if isinstance(p.get("amount"), list) else complex(p.get("amount", 0.0))
        coaction = perturbed(coaction, tuple(quad), int(p.get("component", 0)), amount)
    return coaction


def parse_run(section: dict | None, path: str = "run") -> RunOptions:
    section = section or {}
    suites = section.get("suites", list(SUITE_ORDER))
    unknown = [s for s in suites if s not in SUITE_ORDER]
    if unknown:
        raise SpecError(f"{path}.suites", f"unknown suites {unknown}; choose from {list(SUITE_ORDER)}")
    n_max = section.get("n_max")
    if n_max is not None and (not isinstance(n_max, int) or n_max < 1):
        raise SpecError(f"{path}.n_max", "expected a positive integer")
    tol = section.get("tolerance", DEFAULT_TOL)
    if not isinstance(tol, (int, float)) or tol <= 0:
        raise SpecError(f"{path}.tolerance", "expected a positive number")
    ordered = tuple(s for s in SUITE_ORDER if s in suites)
    return RunOptions(n_max, float(tol), ordered, int(section.get("seed", 0)))


def parse_spec(data: dict, name: str = "spec") -> SpecFile:
    if not isinstance(data, dict):
        raise SpecError("", "spec must be a JSON object")
    run = parse_run(data.get("run"))
    alg = parse_algebra(data["algebra"]) if "algebra" in data else None
    hopf, group, coaction = None, None, None
    if "hopf" in data:
        hopf, group = parse_hopf(data["hopf"])
    if "coaction" in data:
        if hopf is None:
            raise SpecError("hopf", "missing section (required by the coaction section)")
        coaction = parse_coaction(data["coaction"], alg, hopf, group, run.tolerance)
        alg = coaction.structure
    if alg is None:
        raise SpecError("algebra", "missing section")
    needs_coaction = {"coaction", "tower", "equivariance", "fixed_points", "closure", "kac"}
    if coaction is None and needs_coaction & set(run.suites):
        wanted = sorted(needs_coaction & set(run.suites))
        raise SpecError("coaction", f"missing section (required by suites {wanted})")
    if hopf is None and "hopf" in run.suites:
        raise SpecError("hopf", "missing section (required by suite 'hopf')")
    return SpecFile(data.get("name", name), alg, hopf, coaction, run, data)


def load_spec(path: str | Path) -> SpecFile:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError("", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_spec(data, path.stem)


def bundled_spec_names() -> list[str]:
    root = resources.files("coaction_tower") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_spec(name: str) -> SpecFile:
    root = resources.files("coaction_tower") / "data"
    resource = root / f"{name}.json"
    if not resource.is_file():
        raise SpecError("", f"no bundled spec named {name!r}; available: {bundled_spec_names()}")
    return parse_spec(json.loads(resource.read_text()), name)
