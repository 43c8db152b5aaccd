"""Deterministic multi-stream random numbers.

Streams are keyed by ``(master_seed, stream_id)`` on top of the Philox
counter-based bit generator, so any worker that derives the same pair gets
bitwise-identical draws regardless of process or thread schedule.  Gaussian
variates use the polar form of the Box-Muller transform on top of the raw
uniform stream, so the sampling algorithm is pinned by this module rather
than by the numpy version.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One step of the splitmix64 finalizer; a cheap 64-bit mixer."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class RngStream:
    """One reproducible random stream.

    Parameters
    ----------
    master_seed : int
        64-bit experiment-level seed.
    stream_id : int
        64-bit stream index.  Streams with distinct ids are statistically
        independent; the same ``(master_seed, stream_id)`` pair always
        yields the same sequence of draws.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        self._spare = None  # unconsumed second normal from the last polar pair

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def child(self, tag: int) -> "RngStream":
        """Derive an independent stream; deterministic in (self, tag)."""
        mixed = splitmix64(self.stream_id ^ splitmix64(int(tag) & _MASK64))
        return RngStream(self.master_seed, mixed)

    def child_from(self, *tags: int) -> "RngStream":
        """Derive a stream from a tuple of tags (e.g. cell and trial indices)."""
        s = self
        for t in tags:
            s = s.child(t)
        return s

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def integers(self, low, high, size=None):
        """Uniform integers in [low, high)."""
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int):
        return self._gen.permutation(n)

    def subset(self, n: int, k: int):
        """Uniformly random size-k subset of range(n), sorted."""
        return np.sort(self._gen.permutation(n)[:k])

    def signs(self, size=None):
        """Fair +-1 draws."""
        u = self._gen.random(size)
        return np.where(u < 0.5, -1.0, 1.0)

    def normal(self, size=None):
        """Standard normal draws via the polar Box-Muller transform."""
        if size is None:
            return float(self.normal(1)[0])
        n = int(np.prod(size)) if not np.isscalar(size) else int(size)
        out = np.empty(n)
        have = 0
        if self._spare is not None and n > 0:
            out[0] = self._spare
            self._spare = None
            have = 1
        while have < n:
            # each accepted pair yields two normals; acceptance rate is pi/4
            npairs = int((n - have) * 0.65) + 16
            u = 2.0 * self._gen.random(npairs) - 1.0
            v = 2.0 * self._gen.random(npairs) - 1.0
            s = u * u + v * v
            ok = (s > 0.0) & (s < 1.0)
            s = s[ok]
            f = np.sqrt(-2.0 * np.log(s) / s)
            z = np.empty(2 * s.size)
            z[0::2] = u[ok] * f
            z[1::2] = v[ok] * f
            take = min(z.size, n - have)
            out[have:have + take] = z[:take]
            have += take
            if take < z.size:  # odd leftover: keep one spare for the next call
                self._spare = float(z[take])
        return out.reshape(size) if not np.isscalar(size) else out

    def normal_matrix(self, n_rows: int, n_cols: int):
        return self.normal(n_rows * n_cols).reshape(n_rows, n_cols)
