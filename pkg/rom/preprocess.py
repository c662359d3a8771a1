"""Variable transforms and zero-preserving scaling of snapshot matrices.

Snapshot matrices stack one contiguous block of ``cells`` rows per variable.
``apply_transform`` maps native variables to learning variables column by
column; ``invert_transform`` maps back. Scaling divides every variable block by
a single positive factor fitted on training data, so zeros stay zeros.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import DimensionError, ScalingError, TransformDomainError

logger = logging.getLogger(__name__)


class VariableKind(str, Enum):
    NONNEGATIVE = 'nonnegative'
    SIGNED = 'signed'


@dataclass(frozen=True)
class VariableLayout:
    variables: tuple
    cells: int = 0

    def __post_init__(self):
        variables = tuple((str(name), VariableKind(kind)) for name, kind in self.variables)
        if not variables:
            raise DimensionError("a layout needs at least one variable")
        names = [name for name, _ in variables]
        if len(set(names)) != len(names):
            raise DimensionError(f"duplicate variable names in layout: {names}")
        if self.cells < 0:
            raise DimensionError(f"invalid cell count {self.cells}")
        object.__setattr__(self, 'variables', variables)

    @classmethod
    def parse(cls, text, cells=0):
        """Build a layout from ``"p:signed, c1:nonnegative"``; kind defaults to signed."""
        variables = []
        for item in filter(None, (part.strip() for part in text.split(','))):
            name, _, kind = item.partition(':')
            variables.append((name.strip(), kind.strip() or VariableKind.SIGNED))
        return cls(tuple(variables), cells)

    @property
    def names(self):
        return tuple(name for name, _ in self.variables)

    @property
    def n(self):
        return self.cells * len(self.variables)

    def for_rows(self, rows):
        """Return this layout with ``cells`` derived from a snapshot row count."""
        count = len(self.variables)
        if rows % count:
            raise DimensionError(
                f"{rows} rows cannot be split into {count} variable blocks"
            )
        if self.cells and self.cells * count != rows:
            raise DimensionError(
                f"layout expects {self.cells * count} rows, snapshots have {rows}"
            )
        return VariableLayout(self.variables, rows // count)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise DimensionError(f"unknown variable '{name}'; known: {', '.join(self.names)}") from None

    def block(self, name):
        i = self.index(name)
        return slice(i * self.cells, (i + 1) * self.cells)

    def check(self, Q):
        if Q.shape[0] != self.n:
            raise DimensionError(f"snapshot matrix has {Q.shape[0]} rows, layout expects {self.n}")


class RecipeKind(str, Enum):
    IDENTITY = 'identity'
    RECIPROCAL = 'reciprocal'
    SCALED_RATIO = 'scaled_ratio'


_RECIPE = re.compile(r'^\s*(\w+)\s*=\s*(\w+)\s*\(\s*(\w+)\s*(?:,\s*([^)\s]+)\s*)?\)\s*$')


@dataclass(frozen=True)
class ChannelRecipe:
    """One learning variable computed from one native variable."""
    target: str
    kind: RecipeKind
    source: str
    divisor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'kind', RecipeKind(self.kind))
        if self.kind is RecipeKind.SCALED_RATIO and not self.divisor > 0:
            raise DimensionError(f"scaled_ratio for '{self.target}' needs a positive divisor")

    @classmethod
    def parse(cls, text):
        """Parse ``xi=reciprocal(rho)`` or ``c1=scaled_ratio(rhoY1, 16.04)``."""
        match = _RECIPE.match(text)
        if not match:
            raise DimensionError(f"cannot parse transform recipe '{text}'")
        target, kind, source, divisor = match.groups()
        try:
            kind = RecipeKind(kind)
        except ValueError:
            raise DimensionError(f"unknown transform recipe '{kind}' in '{text}'") from None
        if (divisor is None) == (kind == RecipeKind.SCALED_RATIO):
            raise DimensionError(f"wrong number of arguments in '{text}'")
        return cls(target, kind, source, float(divisor) if divisor else 1.0)

    def forward(self, block, offset=0):
        if self.kind is RecipeKind.IDENTITY:
            return block.copy()
        if self.kind is RecipeKind.RECIPROCAL:
            _require(block > 0, self.source, offset, "reciprocal needs strictly positive values")
            return 1.0 / block
        return block / self.divisor

    def backward(self, block, offset=0):
        if self.kind is RecipeKind.IDENTITY:
            return block.copy()
        if self.kind is RecipeKind.RECIPROCAL:
            _require(block != 0, self.target, offset, "reciprocal inverse needs nonzero values")
            return 1.0 / block
        return block * self.divisor

    def __str__(self):
        if self.kind is RecipeKind.SCALED_RATIO:
            return f"{self.target}={self.kind.value}({self.source}, {self.divisor!r})"
        return f"{self.target}={self.kind.value}({self.source})"


def _require(mask, variable, offset, message):
    if not np.all(mask):
        column = int(np.argwhere(~mask)[0][1]) if mask.ndim == 2 else 0
        raise TransformDomainError(variable, offset + column, message)


@dataclass(frozen=True)
class TransformSpec:
    """Reversible map from native variables (``sources``) to learning variables.

    ``prefer`` maps a native variable to the learning variable that
    reconstructs it when several recipes read the same source. Without a
    declaration the first recipe in target order wins.
    """
    sources: tuple
    recipes: tuple
    prefer: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'sources', tuple(self.sources))
        object.__setattr__(self, 'recipes', tuple(self.recipes))
        object.__setattr__(self, 'prefer', dict(self.prefer))
        if len(set(self.targets)) != len(self.targets):
            raise DimensionError(f"duplicate learning variables: {self.targets}")
        for recipe in self.recipes:
            if recipe.source not in self.sources:
                raise DimensionError(
                    f"recipe '{recipe}' reads unknown native variable '{recipe.source}'"
                )
        # resolves every native variable or raises
        self.inverse_plan()

    @classmethod
    def identity(cls, names):
        names = tuple(names)
        return cls(names, tuple(ChannelRecipe(name, RecipeKind.IDENTITY, name) for name in names))

    @classmethod
    def parse(cls, sources, recipes, prefer=''):
        recipes = tuple(ChannelRecipe.parse(item) for item in _split_recipes(recipes))
        preferred = {}
        for item in filter(None, (part.strip() for part in prefer.split(','))):
            native, _, target = item.partition(':')
            preferred[native.strip()] = target.strip()
        return cls(tuple(sources), recipes, preferred)

    @property
    def targets(self):
        return tuple(recipe.target for recipe in self.recipes)

    def inverse_plan(self):
        """Recipe used to rebuild each native variable, in ``sources`` order."""
        plan = []
        for source in self.sources:
            candidates = [recipe for recipe in self.recipes if recipe.source == source]
            if not candidates:
                raise DimensionError(f"native variable '{source}' cannot be reconstructed")
            wanted = self.prefer.get(source)
            if wanted is not None:
                candidates = [recipe for recipe in candidates if recipe.target == wanted]
                if not candidates:
                    raise DimensionError(
                        f"preferred channel '{wanted}' does not read native variable '{source}'"
                    )
            plan.append(candidates[0])
        return tuple(plan)

    def describe(self):
        return ', '.join(str(recipe) for recipe in self.recipes)


def _split_recipes(text):
    """Split on commas that are not inside parentheses."""
    items, depth, current = [], 0, []
    for char in text:
        if char == ',' and depth == 0:
            items.append(''.join(current))
            current = []
            continue
        depth += char == '('
        depth -= char == ')'
        current.append(char)
    items.append(''.join(current))
    return [item.strip() for item in items if item.strip()]


def _cells(rows, count, what):
    if count == 0 or rows % count:
        raise DimensionError(f"{rows} rows cannot be split into {count} {what} blocks")
    return rows // count


def apply_transform(Z, spec):
    """Map native snapshots to learning snapshots."""
    Z = np.asarray(Z, dtype=float)
    cells = _cells(Z.shape[0], len(spec.sources), 'native variable')
    blocks = []
    for recipe in spec.recipes:
        i = spec.sources.index(recipe.source)
        blocks.append(recipe.forward(Z[i * cells:(i + 1) * cells]))
    return np.vstack(blocks)


def invert_transform(Q, spec):
    """Map learning snapshots back to native snapshots."""
    Q = np.asarray(Q, dtype=float)
    cells = _cells(Q.shape[0], len(spec.recipes), 'learning variable')
    blocks = []
    for recipe in spec.inverse_plan():
        i = spec.targets.index(recipe.target)
        blocks.append(recipe.backward(Q[i * cells:(i + 1) * cells]))
    return np.vstack(blocks)


@dataclass(frozen=True)
class ScalingParams:
    names: tuple
    scales: np.ndarray
    cells: int

    @property
    def row_scales(self):
        return np.repeat(self.scales, self.cells)[:, np.newaxis]


def fit_scaling(Q, layout):
    """Per-variable scale factors: max|block| (signed) or max(block) (nonnegative)."""
    Q = np.asarray(Q, dtype=float)
    layout = layout.for_rows(Q.shape[0])
    scales = np.empty(len(layout.variables))
    for i, (name, kind) in enumerate(layout.variables):
        block = Q[layout.block(name)]
        if kind is VariableKind.NONNEGATIVE:
            if np.any(block < 0):
                raise ScalingError(
                    f"variable '{name}' is declared nonnegative but has entries down to {block.min():g}"
                )
            scale = block.max(initial=0.0)
        else:
            scale = np.abs(block).max(initial=0.0)
        scales[i] = scale if scale > 0 else 1.0
        logger.debug("scale for '%s' (%s): %g", name, kind.value, scales[i])
    scales.setflags(write=False)
    return ScalingParams(layout.names, scales, layout.cells)


def _check_rows(Q, params):
    if Q.shape[0] != params.cells * len(params.scales):
        raise DimensionError(
            f"matrix has {Q.shape[0]} rows, scaling expects {params.cells * len(params.scales)}"
        )


def apply_scaling(Q, params):
    Q = np.asarray(Q, dtype=float)
    _check_rows(Q, params)
    return Q / params.row_scales


def invert_scaling(Qs, params):
    Qs = np.asarray(Qs, dtype=float)
    _check_rows(Qs, params)
    return Qs * params.row_scales
