from dataclasses import dataclass, field

from ..errors import ConfigError

INTERPOLATE, KNN, FOREST = "interpolate", "knn", "forest"
METHODS = (INTERPOLATE, KNN, FOREST)


@dataclass(frozen=True)
class ImputerConfig:
    """Settings of one reconstruction method.

    Attributes
    ----------
    method : {"interpolate", "knn", "forest"}
    k : int
        Number of neighbours (kNN).
    trees, min_leaf : int
        Ensemble size and minimum leaf size (forest).
    feature_codes : tuple of str, optional
        Upper-layer codes used as kNN similarity features; defaults to every
        aggregate of the taxonomy.
    seed : int
    weighting : {"inverse", "uniform"}
        kNN donor weights.
    log_features : bool
        Apply ``log1p`` to kNN features before computing distances.
    bootstrap : bool
        Bootstrap the rows each tree is trained on.
    """

    method: str = KNN
    k: int = 5
    trees: int = 100
    min_leaf: int = 5
    feature_codes: tuple = None
    seed: int = 0
    weighting: str = "inverse"
    log_features: bool = True
    bootstrap: bool = True
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        method = str(self.method).lower()
        if method not in METHODS:
            raise ConfigError(f"unknown imputation method {self.method!r}; "
                              f"choose from {', '.join(METHODS)}")
        object.__setattr__(self, "method", method)
        if int(self.k) < 1:
            raise ConfigError("k must be >= 1")
        if int(self.trees) < 1:
            raise ConfigError("trees must be >= 1")
        if int(self.min_leaf) < 1:
            raise ConfigError("min_leaf must be >= 1")
        if self.weighting not in ("inverse", "uniform"):
            raise ConfigError("weighting must be 'inverse' or 'uniform'")
        if self.feature_codes is not None:
            codes = tuple(self.feature_codes)
            if method == KNN and not codes:
                raise ConfigError("feature_codes must be non-empty for kNN")
            object.__setattr__(self, "feature_codes", codes)

    @property
    def label(self):
        if self.name:
            return self.name
        if self.method == KNN:
            return f"knn-k{self.k}"
        return self.method
