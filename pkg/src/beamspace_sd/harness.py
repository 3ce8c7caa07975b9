"""Seeded Monte Carlo experiment harness with CSV/JSON emission.

Everything downstream of a config is deterministic: per-trial RNG streams
are derived from (master_seed, snr index, trial, stage tag, user), so the
channel, combiner and noise draws of a trial never depend on which
estimators run or in what order trials execute. Trials run sequentially
here; they are independent, so a concurrent runner only has to preserve the
stream derivation and the row order to stay byte-identical.
"""

import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .channel import (BeamspaceTransform, dirichlet_kernel,
                      power_ratio_lower_bound, sample_channel, to_beamspace,
                      worst_case_component_ratio)
from .downlink import (full_digital_zf_sum_rate, select_beams, sum_rate,
                       zf_precoder)
from .estimation import nmse, omp_estimate, sd_estimate, support_from_peak
from .numerics import matmul
from .sounding import make_combiner, simulate_measurement, snr_to_noise_power

STAGE_CHANNEL = 0
STAGE_COMBINER = 1
STAGE_NOISE = 2


class ConfigError(ValueError):
    """A config field is missing, unknown, malformed or inconsistent."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


_INT_FIELDS = ("N", "K", "N_RF", "L", "M", "Q", "V", "omp_sparsity",
               "trials", "master_seed")
_FLOAT_FIELDS = ("los_var", "nlos_var", "downlink_power",
                 "downlink_noise_power")


@dataclass
class ExperimentConfig:
    """Resolved experiment parameters.

    N antennas (= beams), K single-antenna users (= N_RF chains), L
    scatterers per channel (L+1 components), M pilot blocks of K instants
    (Q = M*K measurements), V-beam support windows, and an OMP budget of
    V*(L+1) beams. N_RF, Q, omp_sparsity and downlink_power may be left
    unset and are derived (N_RF = K, Q = M*K, omp_sparsity = V*(L+1),
    downlink_power = K). Uplink SNR points in dB come from snr_grid_db; the
    downlink operating point is fixed by downlink_power/downlink_noise_power
    (defaults: K and 0.1, a 10 dB downlink).
    """

    N: int = 256
    K: int = 16
    N_RF: int | None = None
    L: int = 2
    M: int = 6
    Q: int | None = None
    V: int = 8
    omp_sparsity: int | None = None
    los_var: float = 1.0
    nlos_var: float = 0.01
    snr_grid_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 200
    master_seed: int = 0
    downlink_power: float | None = None
    downlink_noise_power: float = 0.1

    def __post_init__(self):
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            try:
                coerced = int(value, 10) if isinstance(value, str) else int(value)
                if not isinstance(value, str) and coerced != value:
                    raise ValueError
            except (TypeError, ValueError):
                raise ConfigError(name, f"not an integer: {value!r}") from None
            setattr(self, name, coerced)
        for name in _FLOAT_FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            try:
                setattr(self, name, float(value))
            except (TypeError, ValueError):
                raise ConfigError(name, f"not a number: {value!r}") from None
        if isinstance(self.snr_grid_db, str):
            parts = [p for p in self.snr_grid_db.replace(",", " ").split() if p]
            self.snr_grid_db = tuple(parts)
        try:
            self.snr_grid_db = tuple(float(s) for s in self.snr_grid_db)
        except (TypeError, ValueError):
            raise ConfigError(
                "snr_grid_db", f"not a number list: {self.snr_grid_db!r}") from None
        if self.N_RF is None:
            self.N_RF = self.K
        if self.Q is None:
            self.Q = self.M * self.K
        if self.omp_sparsity is None:
            self.omp_sparsity = self.V * (self.L + 1)
        if self.downlink_power is None:
            self.downlink_power = float(self.K)
        self._validate()

    def _validate(self):
        for name in ("N", "K", "N_RF", "M", "Q", "V", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be >= 1, got {getattr(self, name)}")
        if self.L < 0:
            raise ConfigError("L", f"must be >= 0, got {self.L}")
        if self.master_seed < 0:
            raise ConfigError("master_seed", f"must be >= 0, got {self.master_seed}")
        if self.N_RF != self.K:
            raise ConfigError("N_RF", f"must equal K = {self.K}, got {self.N_RF}")
        if self.Q != self.M * self.K:
            raise ConfigError("Q", f"must equal M*K = {self.M * self.K}, got {self.Q}")
        if self.K > self.N:
            raise ConfigError("K", f"more users ({self.K}) than beams ({self.N})")
        if self.V > self.N:
            raise ConfigError("V", f"window {self.V} wider than N = {self.N}")
        if (self.L + 1) * self.V > self.Q:
            raise ConfigError(
                "V", f"(L+1)*V = {(self.L + 1) * self.V} exceeds Q = {self.Q}")
        if not 1 <= self.omp_sparsity <= min(self.Q, self.N):
            raise ConfigError(
                "omp_sparsity",
                f"must lie in 1..min(Q, N) = {min(self.Q, self.N)}, "
                f"got {self.omp_sparsity}")
        if self.los_var <= 0:
            raise ConfigError("los_var", f"must be positive, got {self.los_var}")
        if self.nlos_var < 0:
            raise ConfigError("nlos_var", f"must be >= 0, got {self.nlos_var}")
        if self.downlink_power <= 0:
            raise ConfigError(
                "downlink_power", f"must be positive, got {self.downlink_power}")
        if self.downlink_noise_power <= 0:
            raise ConfigError(
                "downlink_noise_power",
                f"must be positive, got {self.downlink_noise_power}")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db", "must not be empty")
        for s in self.snr_grid_db:
            if not math.isfinite(s):
                raise ConfigError("snr_grid_db", f"non-finite entry {s!r}")

    @classmethod
    def from_dict(cls, mapping):
        """Build a config from a key/value mapping; unknown keys are errors."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown config field")
        return cls(**mapping)

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def parse_config_text(text):
    """Parse flat `key = value` lines ('#' comments and blanks allowed)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        if key in out:
            raise ConfigError(key, f"duplicate assignment on line {lineno}")
        out[key] = value.strip()
    return out


def load_config(path):
    """Read an ExperimentConfig from a flat key/value file."""
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(parse_config_text(fh.read()))


@dataclass(frozen=True)
class SweepRow:
    """One (snr, estimator) aggregate. Fields that do not apply are None."""

    snr_db: float
    estimator: str
    mean_nmse: float | None
    nmse_ci95: float | None
    mean_sum_rate: float | None
    trials: int


@dataclass(frozen=True)
class SweepResult:
    """Aggregated sweep output plus the resolved config that produced it."""

    config: dict = field(repr=False)
    rows: tuple = ()


@dataclass(frozen=True)
class BoundRow:
    n: int
    v: int
    power_ratio_lower_bound: float
    worst_case_component_ratio: float


@dataclass(frozen=True)
class BoundTable:
    rows: tuple = ()


def trial_rng(master_seed, snr_index, trial, stage, user=None):
    """Independent generator for one (snr point, trial, stage[, user]) cell."""
    key = [master_seed, snr_index, trial, stage]
    if user is not None:
        key.append(user)
    return np.random.default_rng(key)


def _mean_ci95(values):
    """Sample mean and normal-approximation 95% half width (0 for one value)."""
    mean = float(np.mean(values))
    if len(values) < 2:
        return mean, 0.0
    half = 1.96 * float(np.std(values, ddof=1)) / math.sqrt(len(values))
    return mean, half


def run_nmse_sweep(cfg):
    """Estimation error sweep: one channel per trial, SD and OMP on the
    same measurement, mean NMSE (linear) with a 95% confidence half width.
    """
    transform = BeamspaceTransform.build(cfg.N)
    rows = []
    for si, snr_db in enumerate(cfg.snr_grid_db):
        noise_ul = snr_to_noise_power(snr_db)
        errs = {"sd": np.empty(cfg.trials), "omp": np.empty(cfg.trials)}
        for t in range(cfg.trials):
            comb = make_combiner(
                trial_rng(cfg.master_seed, si, t, STAGE_COMBINER),
                cfg.N, cfg.Q, block_size=cfg.K)
            ch = sample_channel(
                trial_rng(cfg.master_seed, si, t, STAGE_CHANNEL, 0),
                cfg.N, cfg.L, cfg.los_var, cfg.nlos_var)
            hb = to_beamspace(ch, transform)
            meas = simulate_measurement(
                hb, comb, noise_ul,
                trial_rng(cfg.master_seed, si, t, STAGE_NOISE, 0))
            errs["sd"][t] = nmse(sd_estimate(meas, comb, cfg.L + 1, cfg.V), hb)
            errs["omp"][t] = nmse(omp_estimate(meas, comb, cfg.omp_sparsity), hb)
        for name in ("sd", "omp"):
            mean, ci = _mean_ci95(errs[name])
            rows.append(SweepRow(snr_db=float(snr_db), estimator=name,
                                 mean_nmse=mean, nmse_ci95=ci,
                                 mean_sum_rate=None, trials=cfg.trials))
    return SweepResult(config=cfg.to_dict(), rows=tuple(rows))


def _sumrate_trial(cfg, transform, si, t, noise_ul):
    comb = make_combiner(
        trial_rng(cfg.master_seed, si, t, STAGE_COMBINER),
        cfg.N, cfg.Q, block_size=cfg.K)
    h_true = np.empty((cfg.N, cfg.K), dtype=np.complex128)
    h_sd = np.empty_like(h_true)
    h_omp = np.empty_like(h_true)
    for k in range(cfg.K):
        ch = sample_channel(
            trial_rng(cfg.master_seed, si, t, STAGE_CHANNEL, k),
            cfg.N, cfg.L, cfg.los_var, cfg.nlos_var)
        hb = to_beamspace(ch, transform)
        h_true[:, k] = hb.vector
        meas = simulate_measurement(
            hb, comb, noise_ul,
            trial_rng(cfg.master_seed, si, t, STAGE_NOISE, k))
        h_sd[:, k] = sd_estimate(meas, comb, cfg.L + 1, cfg.V).beamspace_estimate
        h_omp[:, k] = omp_estimate(meas, comb, cfg.omp_sparsity).beamspace_estimate
    rates = {}
    for name, h_est in (("sd", h_sd), ("omp", h_omp), ("perfect", h_true)):
        sel = select_beams(h_est)
        precoder = zf_precoder(sel.reduce(h_est), cfg.downlink_power)
        rates[name] = sum_rate(sel.reduce(h_true), precoder,
                               cfg.downlink_noise_power)
    rates["full_digital"] = full_digital_zf_sum_rate(
        h_true, cfg.downlink_power, cfg.downlink_noise_power)
    return rates


_SUMRATE_ESTIMATORS = ("sd", "omp", "perfect", "full_digital")


def run_sumrate_sweep(cfg):
    """Downlink sweep: per trial, estimate all K users (SD, OMP and perfect
    CSI), select beams from each estimate, zero-force, and score against the
    true channel; the full-digital perfect-CSI rate rides along as an upper
    reference. Rows carry mean sum rate only.
    """
    transform = BeamspaceTransform.build(cfg.N)
    rows = []
    for si, snr_db in enumerate(cfg.snr_grid_db):
        noise_ul = snr_to_noise_power(snr_db)
        rates = {name: np.empty(cfg.trials) for name in _SUMRATE_ESTIMATORS}
        for t in range(cfg.trials):
            trial = _sumrate_trial(cfg, transform, si, t, noise_ul)
            for name in _SUMRATE_ESTIMATORS:
                rates[name][t] = trial[name]
        for name in _SUMRATE_ESTIMATORS:
            rows.append(SweepRow(snr_db=float(snr_db), estimator=name,
                                 mean_nmse=None, nmse_ci95=None,
                                 mean_sum_rate=float(np.mean(rates[name])),
                                 trials=cfg.trials))
    return SweepResult(config=cfg.to_dict(), rows=tuple(rows))


def run_bound_table(n_list, v_list):
    """Tabulate the captured-power lower bound next to the synthesized
    worst-case ratio for each (N, V); the two must agree to 1e-9.
    """
    rows = []
    for n in n_list:
        for v in v_list:
            bound = power_ratio_lower_bound(n, v)
            worst = worst_case_component_ratio(n, v)
            if abs(bound - worst) > 1e-9:
                raise RuntimeError(
                    f"bound {bound!r} and worst case {worst!r} disagree at "
                    f"N={n}, V={v}")
            rows.append(BoundRow(n=int(n), v=int(v),
                                 power_ratio_lower_bound=bound,
                                 worst_case_component_ratio=worst))
    return BoundTable(rows=tuple(rows))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


_SWEEP_COLUMNS = ("snr_db", "estimator", "mean_nmse", "nmse_ci95",
                  "mean_sum_rate", "trials")
_BOUND_COLUMNS = ("n", "v", "power_ratio_lower_bound",
                  "worst_case_component_ratio")


def _sweep_csv(result):
    lines = [f"# {key} = {_fmt(value)}" for key, value in result.config.items()]
    lines.append(",".join(_SWEEP_COLUMNS))
    for row in result.rows:
        lines.append(",".join(_fmt(getattr(row, col)) for col in _SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def _bound_csv(table):
    lines = [",".join(_BOUND_COLUMNS)]
    for row in table.rows:
        lines.append(",".join(_fmt(getattr(row, col)) for col in _BOUND_COLUMNS))
    return "\n".join(lines) + "\n"


def _row_dict(row, columns):
    return {col: getattr(row, col) for col in columns}


def _sweep_json(result):
    payload = {"config": result.config,
               "rows": [_row_dict(r, _SWEEP_COLUMNS) for r in result.rows]}
    return json.dumps(payload, indent=2) + "\n"


def _bound_json(table):
    payload = {"rows": [_row_dict(r, _BOUND_COLUMNS) for r in table.rows]}
    return json.dumps(payload, indent=2) + "\n"


def render(result, format):
    """Serialize a SweepResult or BoundTable to a CSV or JSON string.

    CSV uses the fixed sweep header (config echoed in leading '#' comments),
    '.' decimals via repr floats, LF newlines, empty cells for fields that
    do not apply. JSON mirrors the same field names.
    """
    if format not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    if isinstance(result, BoundTable):
        return _bound_csv(result) if format == "csv" else _bound_json(result)
    if isinstance(result, SweepResult):
        return _sweep_csv(result) if format == "csv" else _sweep_json(result)
    raise TypeError(f"cannot emit {type(result).__name__}")


def emit(result, format, path):
    """Write a result to ``path``; bytes depend only on the result."""
    text = render(result, format)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_sweep_json(path):
    """Inverse of emit(..., 'json', ...) for sweep results."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = tuple(SweepRow(**{col: row[col] for col in _SWEEP_COLUMNS})
                 for row in payload["rows"])
    return SweepResult(config=payload["config"], rows=rows)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str


def validate_invariants(cfg=None):
    """Run the fast self-check suite; returns one outcome per invariant.

    Covers transform unitarity and Parseval, kernel values at integer
    offsets, bound-table agreement, combiner row norms, support window
    wrapping, the zero-forcing identity, and sweep reproducibility.
    """
    cfg = cfg if cfg is not None else ExperimentConfig()
    checks = []

    def record(name, passed, detail=""):
        checks.append(CheckOutcome(name=name, passed=bool(passed), detail=detail))

    u = BeamspaceTransform.build(cfg.N).matrix
    gram = matmul(u.conj().T, u)
    dev = float(np.abs(gram - np.eye(cfg.N)).max())
    record("transform_unitary", dev <= 1e-10, f"max |U^H U - I| = {dev:.3e}")

    rng = np.random.default_rng([cfg.master_seed, 90, 0])
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal(cfg.N) + 1j * rng.standard_normal(cfg.N)
        worst = max(worst, abs(np.linalg.norm(u @ x) - np.linalg.norm(x))
                    / np.linalg.norm(x))
    record("transform_parseval", worst <= 1e-10, f"max relative norm drift = {worst:.3e}")

    bad = [k for k in range(-3, 4)
           if abs(dirichlet_kernel(float(k), cfg.N)
                  - (-1.0) ** (k * (cfg.N - 1))) > 0]
    record("kernel_integer_points", not bad, f"offsets with wrong limit: {bad}")

    bound = power_ratio_lower_bound(cfg.N, cfg.V)
    worst_ratio = worst_case_component_ratio(cfg.N, cfg.V)
    record("bound_agreement", abs(bound - worst_ratio) <= 1e-9,
           f"|{bound:.12f} - {worst_ratio:.12f}| at (N={cfg.N}, V={cfg.V})")

    comb = make_combiner(np.random.default_rng([cfg.master_seed, 91, 0]),
                         cfg.N, cfg.Q, block_size=cfg.K)
    mags = np.unique(np.abs(comb.matrix))
    norms = np.sum(np.abs(comb.matrix) ** 2, axis=1)
    dev = float(np.abs(norms * cfg.Q / cfg.N - 1.0).max())
    record("combiner_row_norms", mags.size == 1 and dev <= 1e-12,
           f"entry magnitudes uniform: {mags.size == 1}, "
           f"max relative row-norm deviation from N/Q: {dev:.2e}")

    wrap_hi = support_from_peak(2, 8, 256) == (254, 255, 256, 1, 2, 3, 4, 5)
    wrap_lo = support_from_peak(1, 3, 256) == (256, 1, 2)
    record("support_window_wrap", wrap_hi and wrap_lo,
           "circular windows around beams 2 and 1 of 256")

    rng = np.random.default_rng([cfg.master_seed, 92, 0])
    worst_zf = 0.0
    for _ in range(10):
        h = (rng.standard_normal((cfg.K, cfg.K))
             + 1j * rng.standard_normal((cfg.K, cfg.K))) / math.sqrt(2)
        p = zf_precoder(h, cfg.downlink_power)
        e = h.conj().T @ p
        c = np.mean(np.diag(e)).real
        worst_zf = max(worst_zf, float(np.abs(e - c * np.eye(cfg.K)).max()))
    record("zero_forcing_identity", worst_zf <= 1e-9,
           f"max |H^H P - cI| = {worst_zf:.3e}")

    small = ExperimentConfig(N=cfg.N, K=cfg.K, L=cfg.L, M=cfg.M, V=cfg.V,
                             snr_grid_db=(10.0,), trials=2,
                             master_seed=cfg.master_seed)
    first = render(run_nmse_sweep(small), "csv")
    second = render(run_nmse_sweep(small), "csv")
    record("sweep_reproducible", first == second,
           "two identically seeded sweeps rendered byte-identical")

    return checks
