"""Channel instance generation and file I/O.

A channel instance holds the normalized per-user, per-channel vectors
h[k, q] such that the per-user QoS constraint downstream is exactly
|h[k,q]^H w_q|^2 >= 1: the raw Rayleigh/shadowing draw is divided by
sigma * sqrt(gamma_lin) at generation time, so no noise power or SNR
target survives into the solvers.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, ParseError
from .rng import stream

GENERAL = "general"
HOMOGENEOUS = "homogeneous"
SCENARIOS = (GENERAL, HOMOGENEOUS)


@dataclass(frozen=True)
class ChannelGenConfig:
    """Parameters of one synthetic channel draw.

    qos_target_db is the per-user SNR target (same for every channel),
    noise_variance the linear per-user noise power, shadow_sigma_db the
    log-normal shadow-fading standard deviation in dB.
    """

    M: int
    K: int
    Q: int
    scenario: str = GENERAL
    qos_target_db: float = 3.0
    noise_variance: float = 1.0
    shadow_sigma_db: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("M", "K", "Q"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidInput(f"{name} must be a positive integer, got {v!r}")
        if self.scenario not in SCENARIOS:
            raise InvalidInput(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not np.isfinite(self.qos_target_db):
            raise InvalidInput("qos_target_db must be finite")
        if not (self.noise_variance > 0):
            raise InvalidInput("noise_variance must be positive")
        if self.shadow_sigma_db < 0:
            raise InvalidInput("shadow_sigma_db must be >= 0")


@dataclass(frozen=True)
class ChannelSet:
    """Normalized channel vectors for one problem instance.

    h has shape (K, Q, M), complex; in the homogeneous scenario the Q
    vectors of each user are identical.
    """

    M: int
    K: int
    Q: int
    scenario: str
    h: np.ndarray = field(repr=False)
    seed: int = 0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128)
        object.__setattr__(self, "h", h)
        if self.scenario not in SCENARIOS:
            raise InvalidInput(f"unknown scenario {self.scenario!r}")
        if h.shape != (self.K, self.Q, self.M):
            raise InvalidInput(
                f"h has shape {h.shape}, expected {(self.K, self.Q, self.M)}"
            )
        if not np.all(np.isfinite(h.real)) or not np.all(np.isfinite(h.imag)):
            raise InvalidInput("channel vectors contain non-finite entries")
        if self.scenario == HOMOGENEOUS and self.Q > 1:
            if not np.array_equal(h, np.broadcast_to(h[:, :1, :], h.shape)):
                raise InvalidInput(
                    "homogeneous scenario requires identical vectors across channels"
                )


def generate(cfg: ChannelGenConfig) -> ChannelSet:
    """Draw a channel instance.

    Small-scale fading is i.i.d. circularly-symmetric complex Gaussian
    with unit variance (Re/Im ~ N(0, 1/2)); each vector is scaled by a
    log-normal shadowing amplitude 10^(s/20), s ~ N(0, shadow_sigma_db^2),
    drawn per (user, channel) in the general scenario and per user in the
    homogeneous one. The result is divided by sigma * sqrt(gamma_lin).

    Deterministic given cfg.seed: shadowing is drawn first, then the
    small-scale block, from Philox stream (seed, 0).
    """
    rng = stream(cfg.seed, 0)
    gamma_lin = 10.0 ** (cfg.qos_target_db / 10.0)
    scale = 1.0 / (np.sqrt(cfg.noise_variance) * np.sqrt(gamma_lin))

    if cfg.scenario == HOMOGENEOUS:
        shadow_db = rng.standard_normal(cfg.K) * cfg.shadow_sigma_db
        amp = 10.0 ** (shadow_db / 20.0)
        g = rng.standard_normal((cfg.K, cfg.M)) + 1j * rng.standard_normal((cfg.K, cfg.M))
        g *= np.sqrt(0.5)
        h_one = scale * amp[:, None] * g
        h = np.repeat(h_one[:, None, :], cfg.Q, axis=1)
    else:
        shadow_db = rng.standard_normal((cfg.K, cfg.Q)) * cfg.shadow_sigma_db
        amp = 10.0 ** (shadow_db / 20.0)
        g = rng.standard_normal((cfg.K, cfg.Q, cfg.M)) + 1j * rng.standard_normal(
            (cfg.K, cfg.Q, cfg.M)
        )
        g *= np.sqrt(0.5)
        h = scale * amp[:, :, None] * g

    return ChannelSet(M=cfg.M, K=cfg.K, Q=cfg.Q, scenario=cfg.scenario, h=h,
                      seed=cfg.seed)


def save(cs: ChannelSet, path):
    """Write a channel set as UTF-8 text.

    Line 1 is the header ``M,K,Q,scenario,seed``; then K*Q lines
    ``k,q,re_1,im_1,...,re_M,im_M`` (k, q are 1-based) with every float
    printed to 17 significant digits so load(save(cs)) is bit-exact.
    """
    lines = [f"{cs.M},{cs.K},{cs.Q},{cs.scenario},{cs.seed}"]
    for k in range(cs.K):
        for q in range(cs.Q):
            v = cs.h[k, q]
            parts = [str(k + 1), str(q + 1)]
            for m in range(cs.M):
                parts.append(format(v[m].real, ".17g"))
                parts.append(format(v[m].imag, ".17g"))
            lines.append(",".join(parts))
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load(path) -> ChannelSet:
    """Read a channel set written by :func:`save`.

    Raises ParseError (with the line number) for syntactic problems and
    InvalidInput for semantic ones (bad dimensions, duplicate or missing
    (k, q) entries, non-replicated homogeneous data).
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(raw) if ln.strip()]
    if not lines:
        raise ParseError("empty channel file", line=1)

    lineno, header = lines[0]
    fields = header.split(",")
    if len(fields) != 5:
        raise ParseError("header must be 'M,K,Q,scenario,seed'", line=lineno)
    try:
        M, K, Q = int(fields[0]), int(fields[1]), int(fields[2])
        seed = int(fields[4])
    except ValueError as exc:
        raise ParseError(f"bad header field: {exc}", line=lineno) from None
    scenario = fields[3]
    if scenario not in SCENARIOS:
        raise ParseError(f"unknown scenario {scenario!r}", line=lineno)
    if M < 1 or K < 1 or Q < 1:
        raise InvalidInput(f"dimensions must be positive, got M={M} K={K} Q={Q}")

    h = np.zeros((K, Q, M), dtype=np.complex128)
    seen = np.zeros((K, Q), dtype=bool)
    for lineno, text in lines[1:]:
        fields = text.split(",")
        if len(fields) != 2 + 2 * M:
            raise ParseError(
                f"expected {2 + 2 * M} comma-separated fields, got {len(fields)}",
                line=lineno,
            )
        try:
            k = int(fields[0])
            q = int(fields[1])
            vals = [float(x) for x in fields[2:]]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if not (1 <= k <= K) or not (1 <= q <= Q):
            raise InvalidInput(f"line {lineno}: index (k={k}, q={q}) out of range")
        if seen[k - 1, q - 1]:
            raise InvalidInput(f"line {lineno}: duplicate entry for (k={k}, q={q})")
        seen[k - 1, q - 1] = True
        h[k - 1, q - 1] = np.asarray(vals[0::2]) + 1j * np.asarray(vals[1::2])
    if not seen.all():
        missing = np.argwhere(~seen)[0]
        raise InvalidInput(
            f"missing entry for (k={missing[0] + 1}, q={missing[1] + 1})"
        )
    return ChannelSet(M=M, K=K, Q=Q, scenario=scenario, h=h, seed=seed)
