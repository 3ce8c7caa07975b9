"""Multipath spatial channels and their beamspace (lens/DFT) representation.

The spatial channel of one user is a sum of L+1 path components (one LoS,
L NLoS), each a complex gain times a ULA steering vector. A lens antenna
array acts as a spatial DFT ``U`` whose rows are conjugated steering
vectors on a fixed direction grid; multiplying by ``U`` concentrates each
path onto a few adjacent beams. The leakage pattern of an off-grid
direction is the Dirichlet kernel, and the bounds exposed here quantify
how much power a window of V adjacent beams captures.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import DimensionError, as_cvector, matvec


def steering_vector(direction, n_antennas):
    """ULA array response for a spatial direction in [-0.5, 0.5].

    Entries are (1/sqrt(N)) * exp(-j*2*pi*direction*m) over the symmetric
    index set m in {l - (N-1)/2, l = 0..N-1}; unit Euclidean norm.
    """
    n = int(n_antennas)
    if n < 1:
        raise DimensionError(f"n_antennas must be >= 1, got {n}")
    m = np.arange(n) - (n - 1) / 2.0
    return np.exp(-2j * np.pi * direction * m) / math.sqrt(n)


def dirichlet_kernel(x, n_antennas):
    """sin(N*pi*x) / (N*sin(pi*x)), with the analytic limit at integer x.

    At integer x = k both sine factors vanish; the limit is (-1)**(k*(N-1)),
    which keeps the kernel evaluable on exact grid offsets.
    """
    n = int(n_antennas)
    if n < 1:
        raise DimensionError(f"n_antennas must be >= 1, got {n}")
    x = np.asarray(x, dtype=np.float64)
    k = np.round(x)
    on_integer = x == k
    denom = np.where(on_integer, 1.0, n * np.sin(np.pi * x))
    ratio = np.sin(n * np.pi * x) / denom
    limit = np.where((k.astype(np.int64) * (n - 1)) % 2 == 0, 1.0, -1.0)
    out = np.where(on_integer, limit, ratio)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: complex gain and spatial direction."""

    gain: complex
    direction: float
    is_los: bool = False

    def __post_init__(self):
        if abs(self.direction) > 0.5:
            raise ValueError(f"direction {self.direction} outside [-0.5, 0.5]")

    def vector(self, n_antennas):
        """The path's spatial contribution gain * a(direction)."""
        return self.gain * steering_vector(self.direction, n_antennas)


@dataclass(eq=False)
class SpatialChannel:
    """Antenna-domain channel: sqrt(N/(L+1)) * sum_i gain_i * a(psi_i)."""

    n_antennas: int
    components: tuple
    vector: np.ndarray = field(repr=False)

    @classmethod
    def from_components(cls, components, n_antennas):
        comps = tuple(components)
        if not comps:
            raise DimensionError("a channel needs at least one path component")
        scale = math.sqrt(n_antennas / len(comps))
        vec = scale * sum(c.vector(n_antennas) for c in comps)
        return cls(n_antennas=int(n_antennas), components=comps, vector=vec)


def sample_channel(rng, n_antennas, n_nlos=2, los_var=1.0, nlos_var=0.01):
    """Draw a random channel: one LoS path plus ``n_nlos`` NLoS paths.

    Gains are circular complex Gaussian, CN(0, los_var) for the LoS path and
    CN(0, nlos_var) for each NLoS path; directions are i.i.d. uniform on
    [-0.5, 0.5]. Deterministic given the rng state.
    """
    if n_nlos < 0:
        raise ValueError(f"n_nlos must be >= 0, got {n_nlos}")
    if los_var <= 0 or nlos_var <= 0:
        raise ValueError("gain variances must be positive")
    n_paths = n_nlos + 1
    directions = rng.uniform(-0.5, 0.5, size=n_paths)
    re = rng.standard_normal(n_paths)
    im = rng.standard_normal(n_paths)
    comps = []
    for i in range(n_paths):
        var = los_var if i == 0 else nlos_var
        gain = math.sqrt(var / 2.0) * complex(re[i], im[i])
        comps.append(PathComponent(gain=gain, direction=float(directions[i]),
                                   is_los=(i == 0)))
    return SpatialChannel.from_components(comps, n_antennas)


@dataclass(eq=False)
class BeamspaceTransform:
    """Lens-array spatial DFT: rows are a(grid_n)^H on the fixed beam grid."""

    n_antennas: int
    matrix: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n_antennas):
        n = int(n_antennas)
        if n < 1:
            raise DimensionError(f"n_antennas must be >= 1, got {n}")
        grid = (np.arange(1, n + 1) - (n + 1) / 2.0) / n
        m = np.arange(n) - (n - 1) / 2.0
        # row n of U is steering(grid[n]) conjugated
        u = np.exp(2j * np.pi * np.outer(grid, m)) / math.sqrt(n)
        return cls(n_antennas=n, matrix=u, grid=grid)


@dataclass(eq=False)
class BeamspaceChannel:
    """Channel after the lens transform; approximately sparse."""

    vector: np.ndarray = field(repr=False)
    component_vectors: tuple | None = None


def to_beamspace(channel, transform, with_components=False):
    """Apply the lens transform: U @ h (and U @ c_i when requested)."""
    if channel.n_antennas != transform.n_antennas:
        raise DimensionError(
            f"channel has {channel.n_antennas} antennas, transform has "
            f"{transform.n_antennas}")
    vec = matvec(transform.matrix, channel.vector)
    comps = None
    if with_components:
        # scaled so the per-path images sum back to the full vector
        scale = math.sqrt(channel.n_antennas / len(channel.components))
        comps = tuple(
            scale * matvec(transform.matrix, c.vector(channel.n_antennas))
            for c in channel.components)
    return BeamspaceChannel(vector=vec, component_vectors=comps)


def cross_correlation_bound(ci, cj, n_antennas):
    """Upper bound on |<beamspace c_i, beamspace c_j>| for distinct directions.

    Equals |gain_i|*|gain_j| / (N*|sin(pi*(psi_i - psi_j))|); decays as 1/N,
    which is what makes well-separated components asymptotically orthogonal.
    """
    delta = ci.direction - cj.direction
    if delta == 0.0:
        raise ValueError("bound undefined for equal directions")
    return abs(ci.gain) * abs(cj.gain) / (n_antennas * abs(math.sin(math.pi * delta)))


def power_ratio_lower_bound(n_antennas, v):
    """Guaranteed fraction of a component's power captured by its V strongest
    beams (V even): (2/N^2) * sum_{i=1..V/2} 1/sin^2((2i-1)*pi/(2N))."""
    n = int(n_antennas)
    v = int(v)
    if v % 2 != 0:
        raise ValueError(f"V must be even, got {v}")
    if not 2 <= v <= n:
        raise ValueError(f"V must satisfy 2 <= V <= N, got V={v}, N={n}")
    i = np.arange(1, v // 2 + 1)
    return float(2.0 / n**2 * np.sum(1.0 / np.sin((2 * i - 1) * np.pi / (2 * n)) ** 2))


def worst_case_component_ratio(n_antennas, v, offset=None):
    """Captured-power fraction of the V strongest beams for a synthesized
    component at ``offset`` from the nearest grid direction.

    Default offset 1/(2N) is the worst case (half a grid step); there the
    ratio equals :func:`power_ratio_lower_bound` for even V. Offset 0 puts
    all power in one beam.
    """
    n = int(n_antennas)
    v = int(v)
    if not 1 <= v <= n:
        raise ValueError(f"V must satisfy 1 <= V <= N, got V={v}, N={n}")
    if offset is None:
        offset = 1.0 / (2 * n)
    transform = BeamspaceTransform.build(n)
    direction = transform.grid[n // 2] + offset
    powers = dirichlet_kernel(transform.grid - direction, n) ** 2
    top = np.sort(powers)[::-1][:v]
    return float(np.sum(top) / np.sum(powers))


def beamspace_component_profile(n_antennas, direction):
    """Beamspace magnitude-squared profile of a unit-gain path, index-aligned
    with the beam grid. Diagnostic helper for leakage analysis."""
    transform = BeamspaceTransform.build(n_antennas)
    return dirichlet_kernel(transform.grid - direction, n_antennas) ** 2


def measured_cross_correlation(ci, cj, n_antennas, transform=None):
    """|<U c_i, U c_j>| computed explicitly (no kernel shortcut)."""
    if transform is None:
        transform = BeamspaceTransform.build(n_antennas)
    a = matvec(transform.matrix, as_cvector(ci.vector(n_antennas)))
    b = matvec(transform.matrix, as_cvector(cj.vector(n_antennas)))
    return abs(np.vdot(a, b))
