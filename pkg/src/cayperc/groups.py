"""Exact arithmetic for a small menu of finitely generated groups.

Elements are plain tuples in a family-specific canonical form:

* ``FreeAbelian(d)``: integer vector of length ``d``.
* ``Heisenberg3``: integer triple ``(a, b, c)`` standing for the upper
  triangular matrix ``[[1, a, c], [0, 1, b], [0, 0, 1]]``.
* ``FreeGroup(k)``: freely reduced word, a tuple of nonzero integers where
  ``i`` is the i-th letter and ``-i`` its inverse.
* ``DirectProduct(factors)``: tuple of factor elements.

The models are immutable and hashable; two models compare equal iff they
describe the same group, which is what :class:`Element` uses to reject mixed
arithmetic.
"""

from __future__ import annotations

import math
import string
import struct
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "GroupError",
    "GroupModel",
    "FreeAbelian",
    "Heisenberg3",
    "FreeGroup",
    "DirectProduct",
    "Element",
    "GeneratorSet",
    "Minimality",
    "MinimalityVerdict",
    "Quotient",
    "make_group",
    "group_from_config",
    "symmetrize",
    "default_generators",
    "check_minimality",
    "evaluate_word",
    "quotient_hom",
    "lattice_solve",
]


class GroupError(ValueError):
    """Invalid group parameters, generator data or homomorphism data."""


class GroupModel:
    """Common interface of the group families."""

    name: str = "group"
    #: width of the integer-vector encoding, ``None`` if not vectorizable
    vector_width: int | None = None
    abelian: bool = False
    nilpotent: bool = False

    def identity(self) -> tuple:
        raise NotImplementedError

    def mul(self, g: tuple, h: tuple) -> tuple:
        raise NotImplementedError

    def inv(self, g: tuple) -> tuple:
        raise NotImplementedError

    def code(self, g: tuple) -> bytes:
        raise NotImplementedError

    def check(self, g: Any) -> tuple:
        """Return ``g`` in canonical form or raise ``TypeError``."""
        raise NotImplementedError

    def abelianize(self, g: tuple) -> tuple[int, ...]:
        raise NotImplementedError

    @property
    def abelian_rank(self) -> int:
        raise NotImplementedError

    @property
    def growth_dimension(self) -> float:
        raise NotImplementedError

    def parse(self, spec: Any) -> tuple:
        """Element from config data (integer list or letter string)."""
        return self.check(tuple(spec) if isinstance(spec, list) else spec)

    def format(self, g: tuple) -> str:
        return str(tuple(g))

    def element(self, raw: Any) -> "Element":
        return Element(self, self.check(raw))

    # vectorized arithmetic, only for integer-vector families
    def batch_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no vectorized arithmetic")

    def batch_inv(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no vectorized arithmetic")

    def is_identity(self, g: tuple) -> bool:
        return g == self.identity()


def _int_tuple(g: Any, width: int, name: str) -> tuple:
    if not isinstance(g, (tuple, list)) or len(g) != width:
        raise TypeError(f"{name} expects an integer tuple of length {width}, got {g!r}")
    out = []
    for x in g:
        if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
            raise TypeError(f"{name} coordinates must be integers, got {g!r}")
        out.append(int(x))
    return tuple(out)


@dataclass(frozen=True)
class FreeAbelian(GroupModel):
    d: int
    abelian = True
    nilpotent = True

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise GroupError(f"FreeAbelian needs d >= 1, got {self.d!r}")

    @property
    def name(self) -> str:
        return f"Z^{self.d}"

    @property
    def vector_width(self) -> int:
        return self.d

    def identity(self):
        return (0,) * self.d

    def mul(self, g, h):
        return tuple(x + y for x, y in zip(g, h))

    def inv(self, g):
        return tuple(-x for x in g)

    def code(self, g):
        return struct.pack(f"<{self.d}q", *g)

    def check(self, g):
        return _int_tuple(g, self.d, self.name)

    def abelianize(self, g):
        return tuple(g)

    @property
    def abelian_rank(self):
        return self.d

    @property
    def growth_dimension(self):
        return float(self.d)

    def batch_mul(self, a, b):
        return a + b

    def batch_inv(self, a):
        return -a


@dataclass(frozen=True)
class Heisenberg3(GroupModel):
    """Integer Heisenberg group; ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``."""

    nilpotent = True
    name = "H3(Z)"
    vector_width = 3

    def identity(self):
        return (0, 0, 0)

    def mul(self, g, h):
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    def inv(self, g):
        return (-g[0], -g[1], -g[2] + g[0] * g[1])

    def code(self, g):
        return struct.pack("<3q", *g)

    def check(self, g):
        return _int_tuple(g, 3, self.name)

    def abelianize(self, g):
        return (g[0], g[1])

    @property
    def abelian_rank(self):
        return 2

    @property
    def growth_dimension(self):
        return 4.0

    def batch_mul(self, a, b):
        out = a + b
        out[:, 2] += a[:, 0] * b[:, 1]
        return out

    def batch_inv(self, a):
        out = -a
        out[:, 2] += a[:, 0] * a[:, 1]
        return out


@dataclass(frozen=True)
class FreeGroup(GroupModel):
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise GroupError(f"FreeGroup needs k >= 1, got {self.k!r}")
        if self.k > 26:
            raise GroupError("FreeGroup supports at most 26 letters")

    @property
    def name(self):
        return f"F_{self.k}"

    @property
    def abelian(self):
        return self.k == 1

    @property
    def nilpotent(self):
        return self.k == 1

    def identity(self):
        return ()

    def mul(self, g, h):
        i = 0
        n = min(len(g), len(h))
        while i < n and g[-1 - i] == -h[i]:
            i += 1
        return g[: len(g) - i] + h[i:]

    def inv(self, g):
        return tuple(-x for x in reversed(g))

    def code(self, g):
        return struct.pack(f"<I{len(g)}b", len(g), *g)

    def check(self, g):
        if isinstance(g, str):
            return self.parse(g)
        if not isinstance(g, (tuple, list)):
            raise TypeError(f"{self.name} element must be a letter tuple, got {g!r}")
        word: list[int] = []
        for x in g:
            if isinstance(x, bool) or not isinstance(x, (int, np.integer)) or x == 0 or abs(x) > self.k:
                raise TypeError(f"invalid letter {x!r} for {self.name}")
            if word and word[-1] == -x:
                word.pop()
            else:
                word.append(int(x))
        return tuple(word)

    def parse(self, spec):
        if not isinstance(spec, str):
            return self.check(spec)
        letters = []
        for ch in spec:
            if ch in "1 ":
                continue
            pos = string.ascii_lowercase.find(ch.lower())
            if pos < 0 or pos >= self.k:
                raise GroupError(f"letter {ch!r} not in {self.name}")
            letters.append(pos + 1 if ch.islower() else -(pos + 1))
        return self.check(letters)

    def format(self, g):
        if not g:
            return "1"
        return "".join(
            string.ascii_lowercase[x - 1] if x > 0 else string.ascii_uppercase[-x - 1] for x in g
        )

    def abelianize(self, g):
        v = [0] * self.k
        for x in g:
            v[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(v)

    @property
    def abelian_rank(self):
        return self.k

    @property
    def growth_dimension(self):
        return 1.0 if self.k == 1 else math.inf


@dataclass(frozen=True)
class DirectProduct(GroupModel):
    factors: tuple

    def __post_init__(self):
        facs = tuple(self.factors)
        if not facs:
            raise GroupError("DirectProduct needs at least one factor")
        if not all(isinstance(f, GroupModel) for f in facs):
            raise GroupError("DirectProduct factors must be group models")
        object.__setattr__(self, "factors", facs)

    @property
    def name(self):
        return " x ".join(f.name for f in self.factors)

    @property
    def abelian(self):
        return all(f.abelian for f in self.factors)

    @property
    def nilpotent(self):
        return all(f.nilpotent for f in self.factors)

    @property
    def vector_width(self):
        widths = [f.vector_width for f in self.factors]
        if any(w is None for w in widths):
            return None
        return sum(widths)

    def identity(self):
        return tuple(f.identity() for f in self.factors)

    def mul(self, g, h):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, g, h))

    def inv(self, g):
        return tuple(f.inv(x) for f, x in zip(self.factors, g))

    def code(self, g):
        return b"".join(f.code(x) for f, x in zip(self.factors, g))

    def check(self, g):
        if not isinstance(g, (tuple, list)) or len(g) != len(self.factors):
            raise TypeError(f"{self.name} expects a {len(self.factors)}-tuple of factor elements")
        return tuple(f.check(x) for f, x in zip(self.factors, g))

    def parse(self, spec):
        if not isinstance(spec, (list, tuple)) or len(spec) != len(self.factors):
            raise GroupError(f"{self.name} element needs one entry per factor")
        return tuple(f.parse(x) for f, x in zip(self.factors, spec))

    def format(self, g):
        return "(" + ", ".join(f.format(x) for f, x in zip(self.factors, g)) + ")"

    def abelianize(self, g):
        return sum((f.abelianize(x) for f, x in zip(self.factors, g)), ())

    @property
    def abelian_rank(self):
        return sum(f.abelian_rank for f in self.factors)

    @property
    def growth_dimension(self):
        return float(sum(f.growth_dimension for f in self.factors))

    def _split(self, a):
        out, start = [], 0
        for f in self.factors:
            out.append(a[:, start : start + f.vector_width])
            start += f.vector_width
        return out

    def batch_mul(self, a, b):
        if self.vector_width is None:
            return super().batch_mul(a, b)
        parts = [f.batch_mul(x, y) for f, x, y in zip(self.factors, self._split(a), self._split(b))]
        return np.concatenate(parts, axis=1)

    def batch_inv(self, a):
        if self.vector_width is None:
            return super().batch_inv(a)
        return np.concatenate([f.batch_inv(x) for f, x in zip(self.factors, self._split(a))], axis=1)

    def flatten(self, g) -> tuple:
        """Concatenate factor vectors (vectorizable products only)."""
        return sum((tuple(x) for x in g), ())

    def unflatten(self, v) -> tuple:
        out, start = [], 0
        for f in self.factors:
            out.append(tuple(int(x) for x in v[start : start + f.vector_width]))
            start += f.vector_width
        return tuple(out)


def to_vector(model: GroupModel, g: tuple) -> tuple:
    """Integer-vector encoding used by the vectorized arithmetic."""
    if isinstance(model, DirectProduct):
        return model.flatten(g)
    return g


def from_vector(model: GroupModel, v) -> tuple:
    if isinstance(model, DirectProduct):
        return model.unflatten(v)
    return tuple(int(x) for x in v)


@dataclass(frozen=True)
class Element:
    """Group element bound to its model; supports ``*``, ``~`` and ``**``."""

    model: GroupModel
    value: tuple

    def __mul__(self, other: "Element") -> "Element":
        if not isinstance(other, Element):
            return NotImplemented
        if other.model != self.model:
            raise TypeError(f"cannot multiply elements of {self.model.name} and {other.model.name}")
        return Element(self.model, self.model.mul(self.value, other.value))

    def __invert__(self) -> "Element":
        return Element(self.model, self.model.inv(self.value))

    def __pow__(self, k: int) -> "Element":
        base = self if k >= 0 else ~self
        out = Element(self.model, self.model.identity())
        for _ in range(abs(k)):
            out = out * base
        return out

    @property
    def code(self) -> bytes:
        return self.model.code(self.value)

    def __repr__(self):
        return f"{self.model.name}:{self.model.format(self.value)}"


_FAMILIES = {
    "freeabelian": "FreeAbelian",
    "z": "FreeAbelian",
    "heisenberg3": "Heisenberg3",
    "heisenberg": "Heisenberg3",
    "freegroup": "FreeGroup",
    "free": "FreeGroup",
    "directproduct": "DirectProduct",
    "product": "DirectProduct",
}


def make_group(family: str, **params) -> GroupModel:
    """Construct a group model from a family name and integer parameters."""
    key = _FAMILIES.get(family.replace("_", "").replace("-", "").lower())
    if key == "FreeAbelian":
        return FreeAbelian(int(params.get("d", 0)))
    if key == "Heisenberg3":
        return Heisenberg3()
    if key == "FreeGroup":
        return FreeGroup(int(params.get("k", 0)))
    if key == "DirectProduct":
        factors = params.get("factors") or ()
        return DirectProduct(tuple(f if isinstance(f, GroupModel) else group_from_config(f)[0] for f in factors))
    raise GroupError(f"unknown group family {family!r}")


def group_from_config(cfg: Mapping[str, Any]) -> tuple[GroupModel, "GeneratorSet"]:
    """Model and symmetrized generators from a ``[group]`` config table.

    Without an explicit ``generators`` list the family default is used.
    """
    if "family" not in cfg:
        raise GroupError("group config needs a 'family' entry")
    params = {k: v for k, v in cfg.items() if k not in ("family", "generators")}
    model = make_group(str(cfg["family"]), **params)
    if cfg.get("generators") is not None:
        raw = [model.parse(g) for g in cfg["generators"]]
        gens = symmetrize(model, raw)
    else:
        gens = default_generators(model)
    return model, gens


# --------------------------------------------------------------------------
# generator sets


@dataclass(frozen=True)
class GeneratorSet:
    model: GroupModel
    elements: tuple
    inverse_index: tuple
    symmetric: bool = True

    @property
    def degree(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    @property
    def labels(self) -> list[str]:
        return [self.model.format(g) for g in self.elements]

    def pair_classes(self) -> list[tuple[int, ...]]:
        """Index classes ``{g, g^-1}`` in order of first appearance."""
        seen, out = set(), []
        for i, j in enumerate(self.inverse_index):
            if i in seen:
                continue
            cls = (i,) if i == j else (i, j)
            seen.update(cls)
            out.append(cls)
        return out

    def subset(self, indices: Iterable[int]) -> "GeneratorSet":
        keep = sorted(set(indices))
        pos = {old: new for new, old in enumerate(keep)}
        try:
            inv = tuple(pos[self.inverse_index[i]] for i in keep)
        except KeyError:
            raise GroupError("subset is not closed under inversion") from None
        return GeneratorSet(self.model, tuple(self.elements[i] for i in keep), inv, True)


def symmetrize(model: GroupModel, raw: Sequence) -> GeneratorSet:
    """Close ``raw`` under inversion, drop the identity and duplicates."""
    if len(raw) == 0:
        raise GroupError("empty generator list")
    e = model.identity()
    elems: list[tuple] = []
    index: dict[tuple, int] = {}
    for g in raw:
        g = model.check(g)
        for x in (g, model.inv(g)):
            if x != e and x not in index:
                index[x] = len(elems)
                elems.append(x)
    if not elems:
        raise GroupError("generator list contains only the identity")
    inv = tuple(index[model.inv(x)] for x in elems)
    return GeneratorSet(model, tuple(elems), inv, True)


def default_generators(model: GroupModel) -> GeneratorSet:
    """Standard generators: unit vectors, ``{a, b}`` for H3, letters for F_k."""
    if isinstance(model, FreeAbelian):
        raw = [tuple(int(i == j) for j in range(model.d)) for i in range(model.d)]
    elif isinstance(model, Heisenberg3):
        raw = [(1, 0, 0), (0, 1, 0)]
    elif isinstance(model, FreeGroup):
        raw = [(i,) for i in range(1, model.k + 1)]
    elif isinstance(model, DirectProduct):
        raw = []
        for i, f in enumerate(model.factors):
            for g in default_generators(f).elements:
                raw.append(tuple(g if j == i else h.identity() for j, h in enumerate(model.factors)))
    else:
        raise GroupError(f"no default generators for {model!r}")
    return symmetrize(model, raw)


def evaluate_word(gens: GeneratorSet, word: Sequence[int]) -> tuple:
    """Product of the generators with the given indices."""
    model = gens.model
    out = model.identity()
    for i in word:
        out = model.mul(out, gens.elements[i])
    return out


# --------------------------------------------------------------------------
# integer lattices


def _echelon(vectors: Sequence[Sequence[int]]):
    """Integer row echelon form with transformation coefficients.

    Returns ``[(col, row, coeffs)]`` where ``row == sum(coeffs[i] * vectors[i])``.
    """
    r = len(vectors)
    pool = [(list(map(int, v)), [int(i == j) for j in range(r)]) for i, v in enumerate(vectors)]
    width = len(vectors[0]) if vectors else 0
    pivots = []
    for col in range(width):
        active = [p for p in pool if p[0][col] != 0]
        rest = [p for p in pool if p[0][col] == 0]
        while len(active) > 1:
            active.sort(key=lambda p: abs(p[0][col]))
            piv = active[0]
            nxt = [piv]
            for row, co in active[1:]:
                q = row[col] // piv[0][col]
                row = [a - q * b for a, b in zip(row, piv[0])]
                co = [a - q * b for a, b in zip(co, piv[1])]
                if row[col] != 0:
                    nxt.append((row, co))
                else:
                    rest.append((row, co))
            active = nxt
        if active:
            pivots.append((col, active[0][0], active[0][1]))
        pool = rest
    return pivots


def lattice_solve(vectors: Sequence[Sequence[int]], target: Sequence[int]) -> list[int] | None:
    """Integer coefficients ``c`` with ``sum(c_i v_i) == target``, or ``None``."""
    t = list(map(int, target))
    if not vectors:
        return [] if not any(t) else None
    coeff = [0] * len(vectors)
    for col, row, co in _echelon(vectors):
        if t[col] % row[col]:
            return None
        q = t[col] // row[col]
        t = [a - q * b for a, b in zip(t, row)]
        coeff = [a + q * b for a, b in zip(coeff, co)]
    return coeff if not any(t) else None


def lattice_is_full(vectors: Sequence[Sequence[int]], dim: int) -> bool:
    """Whether the vectors generate all of ``Z^dim``."""
    if dim == 0:
        return True
    if not vectors:
        return False
    return all(lattice_solve(vectors, [int(i == j) for j in range(dim)]) is not None for i in range(dim))


# --------------------------------------------------------------------------
# minimality


class Minimality(str, Enum):
    NOT_MINIMAL = "NotMinimal"
    MINIMAL_CERTIFIED = "MinimalCertified"
    MINIMAL_UP_TO_RADIUS = "MinimalUpToRadius"


@dataclass(frozen=True)
class MinimalityVerdict:
    kind: Minimality
    radius: int | None = None
    #: ``(generator index, word over the remaining generators)`` pairs
    witnesses: tuple = ()
    generates_ambient: bool | None = None
    notes: tuple = field(default=())

    @property
    def certified(self) -> bool:
        return self.kind is Minimality.MINIMAL_CERTIFIED

    def __str__(self):
        if self.kind is Minimality.MINIMAL_UP_TO_RADIUS:
            return f"{self.kind.value}({self.radius})"
        return self.kind.value


def _generates_ambient(gens: GeneratorSet) -> bool | None:
    model = gens.model
    images = [model.abelianize(g) for g in gens.elements]
    if not lattice_is_full(images, model.abelian_rank):
        return False
    if model.nilpotent:
        # nilpotent groups are generated by any lift of an abelianization basis
        return True
    if isinstance(model, FreeGroup):
        if all(len(g) == 1 for g in gens.elements):
            return {abs(g[0]) for g in gens.elements} == set(range(1, model.k + 1))
        return None
    if isinstance(model, DirectProduct):
        ident = [f.identity() for f in model.factors]
        per_factor: list[list] = [[] for _ in model.factors]
        for g in gens.elements:
            support = [i for i, (x, e) in enumerate(zip(g, ident)) if x != e]
            if len(support) != 1:
                return None
            per_factor[support[0]].append(g[support[0]])
        verdicts = []
        for f, raw in zip(model.factors, per_factor):
            if not raw:
                return False
            verdicts.append(_generates_ambient(symmetrize(f, raw)))
        if all(v is True for v in verdicts):
            return True
        return False if any(v is False for v in verdicts) else None
    return None


def _word_search(gens: GeneratorSet, allowed: Sequence[int], target: tuple, radius: int,
                 max_nodes: int = 200_000) -> tuple | None:
    """Shortest word over ``allowed`` generator indices equal to ``target``."""
    model = gens.model
    start = model.identity()
    if target == start:
        return ()
    parent: dict[tuple, tuple] = {start: (None, None)}
    frontier = deque([(start, 0)])
    while frontier:
        x, d = frontier.popleft()
        if d == radius:
            continue
        for i in allowed:
            y = model.mul(x, gens.elements[i])
            if y in parent:
                continue
            parent[y] = (x, i)
            if y == target:
                word = []
                while parent[y][0] is not None:
                    y, i = parent[y]
                    word.append(i)
                return tuple(reversed(word))
            if len(parent) > max_nodes:
                return None
            frontier.append((y, d + 1))
    return None


def check_minimality(gens: GeneratorSet, certification_radius: int = 6) -> MinimalityVerdict:
    """Decide whether some generator is a product of the others.

    A symmetric set is minimal when, for every ``g``, ``g`` is not in the
    subgroup generated by ``S \\ {g, g^-1}``; dropping only one of ``g`` and
    ``g^-1`` never changes the generated group.

    Exact decisions: lattice membership for abelian models and the
    abelianization certificate (an image outside the lattice spanned by the
    other images proves independence) for the others. Remaining cases are
    settled by a breadth-first word search up to ``certification_radius``.
    """
    if not gens.symmetric:
        raise GroupError("minimality is defined for symmetric generator sets")
    model = gens.model
    classes = gens.pair_classes()
    witnesses = []
    uncertain = False
    for cls in classes:
        g = cls[0]
        others = [i for i in range(gens.degree) if i not in cls]
        target_img = model.abelianize(gens.elements[g])
        images = [model.abelianize(gens.elements[i]) for i in others]
        if lattice_solve(images, target_img) is None:
            continue
        word = _word_search(gens, others, gens.elements[g], certification_radius)
        if word is None and model.abelian:
            coeffs = lattice_solve(images, target_img)
            word = []
            for i, c in zip(others, coeffs):
                word += [i if c > 0 else gens.inverse_index[i]] * abs(c)
            word = tuple(word)
        if word is not None:
            witnesses.append((g, word))
        else:
            uncertain = True
    gen_amb = _generates_ambient(gens)
    if witnesses:
        return MinimalityVerdict(Minimality.NOT_MINIMAL, certification_radius, tuple(witnesses), gen_amb)
    if uncertain:
        return MinimalityVerdict(Minimality.MINIMAL_UP_TO_RADIUS, certification_radius, (), gen_amb)
    return MinimalityVerdict(Minimality.MINIMAL_CERTIFIED, None, (), gen_amb)


# --------------------------------------------------------------------------
# quotients


@dataclass(frozen=True)
class Quotient:
    source: GeneratorSet
    target: GroupModel
    generators: GeneratorSet
    #: source generator indices whose image is the identity
    dropped: tuple
    images: tuple


def quotient_hom(source: GeneratorSet, target: GroupModel, images: Mapping | Sequence) -> Quotient:
    """Induced generating set of a homomorphism given on generators.

    ``images`` maps source generators (as elements or indices) to target
    elements; a sequence is matched with ``source.pair_classes()`` and gives
    the image of the first element of each class. Images of inverses are
    derived. Identity images are dropped and duplicates merged.
    """
    model = source.model
    img: dict[int, tuple] = {}
    if isinstance(images, Mapping):
        for key, val in images.items():
            i = key if isinstance(key, int) else source.elements.index(model.check(key))
            img[i] = target.check(val)
    else:
        classes = source.pair_classes()
        if len(images) != len(classes):
            raise GroupError(f"expected {len(classes)} images, got {len(images)}")
        for cls, val in zip(classes, images):
            img[cls[0]] = target.check(val)
    full: dict[int, tuple] = {}
    for i in range(source.degree):
        j = source.inverse_index[i]
        if i in img:
            full[i] = img[i]
            if j in img and target.inv(img[i]) != img[j]:
                raise GroupError("images of a generator and its inverse are not inverse")
        elif j in img:
            full[i] = target.inv(img[j])
        else:
            raise GroupError(f"no image for generator {model.format(source.elements[i])}")
    e = target.identity()
    dropped = tuple(i for i in range(source.degree) if full[i] == e)
    kept = [full[i] for i in range(source.degree) if full[i] != e]
    if not kept:
        raise GroupError("every generator maps to the identity")
    return Quotient(source, target, symmetrize(target, kept), dropped, tuple(full[i] for i in range(source.degree)))
