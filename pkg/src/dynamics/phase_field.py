"""Phase-space configurations Y = (u, v) on the torus"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from ..lattice.grid import LatticeSpec


@dataclass(frozen=True, eq=False)
class PhaseField:
    """One realization of displacements u and velocities v, arrays of shape grid + (n,)"""
    lattice: LatticeSpec
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        expected = self.lattice.shape + (self.lattice.n,)
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.shape != expected or v.shape != expected:
            raise ValueError(f"Fields must have shape {expected}, got {u.shape} and {v.shape}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("Phase field has non-finite entries")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def zeros(cls, lattice: LatticeSpec) -> "PhaseField":
        shape = lattice.shape + (lattice.n,)
        return cls(lattice=lattice, u=np.zeros(shape), v=np.zeros(shape))

    @classmethod
    def from_stacked(cls, lattice: LatticeSpec, values: np.ndarray) -> "PhaseField":
        n = lattice.n
        return cls(lattice=lattice, u=values[..., :n], v=values[..., n:])

    def stacked(self) -> np.ndarray:
        """(u, v) concatenated along the component axis, shape grid + (2n,)"""
        return np.concatenate([self.u, self.v], axis=-1)

    def scaled(self, factor: float) -> "PhaseField":
        return PhaseField(lattice=self.lattice, u=factor * self.u, v=factor * self.v)

    def __add__(self, other: "PhaseField") -> "PhaseField":
        if other.lattice != self.lattice:
            raise ValueError("Cannot add phase fields on different lattices")
        return PhaseField(lattice=self.lattice, u=self.u + other.u, v=self.v + other.v)

    def to_dataframe(self) -> pd.DataFrame:
        """Snapshot table with one row per (site, component)"""
        n = self.lattice.n
        sites = np.repeat(np.arange(self.lattice.size), n)
        components = np.tile(np.arange(n), self.lattice.size)
        return pd.DataFrame({
            "x": sites,
            "component": components,
            "u": self.u.reshape(-1),
            "v": self.v.reshape(-1),
        })

    def save(self, path: Union[str, Path]) -> Path:
        """Write a snapshot; ``.csv`` gives a table, anything else a binary npz"""
        path = Path(path)
        if path.suffix.lower() == ".csv":
            self.to_dataframe().to_csv(path, index=False, float_format="%.17g")
        else:
            np.savez(path, d=self.lattice.d, n=self.lattice.n, N=self.lattice.N, u=self.u, v=self.v)
            if path.suffix != ".npz":
                path = path.with_name(path.name + ".npz")
        return path

    @classmethod
    def load(cls, path: Union[str, Path], lattice: Optional[LatticeSpec] = None) -> "PhaseField":
        """
        Read a snapshot written by ``save``

        Args:
            path: ``.npz`` or ``.csv`` snapshot
            lattice: Torus of a ``.csv`` table, which does not record d and N

        Returns:
            PhaseField
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Snapshot not found: {path}")
        suffix = path.suffix.lower()
        if suffix == ".csv":
            if lattice is None:
                raise ValueError("Loading a .csv snapshot needs the lattice it was written on")
            frame = pd.read_csv(path).sort_values(["x", "component"])
            if len(frame) != lattice.size * lattice.n:
                raise ValueError(
                    f"Snapshot has {len(frame)} rows, expected {lattice.size * lattice.n} for {lattice}"
                )
            shape = lattice.shape + (lattice.n,)
            return cls(
                lattice=lattice,
                u=frame["u"].to_numpy().reshape(shape),
                v=frame["v"].to_numpy().reshape(shape),
            )
        if suffix != ".npz":
            raise ValueError(f"Unsupported snapshot format: {path.suffix}. Supported: .npz, .csv")
        with np.load(path) as data:
            lattice = LatticeSpec(d=int(data["d"]), n=int(data["n"]), N=int(data["N"]))
            return cls(lattice=lattice, u=data["u"], v=data["v"])
