"""Two-qubit channel tensors.

A channel is stored as the rank-4 tensor E[k, l, i, j] of a linear map
rho -> sum_ij E[:, :, i, j] rho_ij on 4x4 matrices; it need not preserve the
trace (postselected operations carry their success weight in the trace).
The rank-1 special case rho -> K rho K^dag keeps its Kraus-style matrix K.

JSON layout: nested arrays indexed [k][l][i][j] with entries {"re": .., "im": ..}
plus a metadata block recording the generating configuration.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PreconditionError

HERMITICITY_TOL = 1e-9
CHOI_TOL = -1e-8


@dataclass(frozen=True)
class TwoQubitChannel:
    entries: np.ndarray  # (4, 4, 4, 4) complex
    kind: str = "general"  # "general" | "rank1-kraus"
    kraus: np.ndarray | None = None  # 4x4, set when kind == "rank1-kraus"

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (4, 4, 4, 4):
            raise PreconditionError("channel tensor must have shape (4, 4, 4, 4)")
        object.__setattr__(self, "entries", entries)
        if self.kraus is not None:
            object.__setattr__(self, "kraus", np.asarray(self.kraus, dtype=complex))

    @classmethod
    def from_kraus(cls, k: np.ndarray) -> "TwoQubitChannel":
        """Rank-1 channel rho -> K rho K^dag."""
        k = np.asarray(k, dtype=complex)
        if k.shape != (4, 4):
            raise PreconditionError("Kraus matrix must be 4x4")
        return cls(np.einsum("ki,lj->klij", k, k.conj()), kind="rank1-kraus", kraus=k)

    @classmethod
    def identity(cls) -> "TwoQubitChannel":
        return cls.from_kraus(np.eye(4, dtype=complex))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Apply to a single 4x4 matrix (unnormalized output)."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (4, 4):
            raise PreconditionError("apply expects a 4x4 matrix")
        return np.einsum("klij,ij->kl", self.entries, rho)

    def choi_matrix(self) -> np.ndarray:
        """Choi operator C[(k,i),(l,j)] = E[k,l,i,j]; PSD iff completely positive."""
        return self.entries.transpose(0, 2, 1, 3).reshape(16, 16)

    def hermiticity_residual(self) -> float:
        """max |E[l,k,j,i]^* - E[k,l,i,j]|; zero for maps sending Hermitian to Hermitian."""
        return float(np.abs(self.entries - self.entries.transpose(1, 0, 3, 2).conj()).max())

    def choi_min_eigenvalue(self) -> float:
        c = self.choi_matrix()
        return float(np.linalg.eigvalsh((c + c.conj().T) / 2.0).min())

    def trace_weight(self) -> float:
        """Tr(Choi)/4: mean success weight over the maximally mixed input."""
        return float(np.trace(self.choi_matrix()).real / 4.0)

    def validity_report(self) -> dict:
        return {
            "hermiticity_residual": self.hermiticity_residual(),
            "choi_min_eigenvalue": self.choi_min_eigenvalue(),
            "trace_weight": self.trace_weight(),
        }

    def is_valid(self, hermiticity_tol=HERMITICITY_TOL, choi_tol=CHOI_TOL) -> bool:
        return (
            self.hermiticity_residual() <= hermiticity_tol
            and self.choi_min_eigenvalue() >= choi_tol
        )

    def to_json_dict(self, metadata: dict | None = None) -> dict:
        entries = [
            [
                [
                    [{"re": float(z.real), "im": float(z.imag)} for z in row]
                    for row in plane
                ]
                for plane in block
            ]
            for block in self.entries
        ]
        return {
            "kind": self.kind,
            "shape": [4, 4, 4, 4],
            "entries": entries,
            "validity": self.validity_report(),
            "metadata": metadata or {},
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "TwoQubitChannel":
        try:
            raw = payload["entries"]
            entries = np.array(
                [
                    [[[complex(z["re"], z["im"]) for z in row] for row in plane] for plane in block]
                    for block in raw
                ],
                dtype=complex,
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed channel JSON: {exc}") from exc
        if entries.shape != (4, 4, 4, 4):
            raise ConfigError(f"channel JSON has shape {entries.shape}, expected (4,4,4,4)")
        return cls(entries, kind=payload.get("kind", "general"))


def save_channel(chan: TwoQubitChannel, path, metadata: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(chan.to_json_dict(metadata), fh, indent=1)


def load_channel(path) -> TwoQubitChannel:
    with open(path) as fh:
        return TwoQubitChannel.from_json_dict(json.load(fh))
