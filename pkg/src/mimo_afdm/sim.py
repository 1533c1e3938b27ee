"""Monte-Carlo BER and complexity sweeps for precoded MIMO-AFDM downlinks.

Every trial draws its channel, data and noise from a seed that is a pure
function of ``(master_seed, snr_index, trial)``, so results do not depend on
execution order or on how many worker threads are used. Within a trial all
waveforms and precoders see the same physical channel, bits and noise.
"""

from __future__ import annotations

import configparser
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .afdm import AfdmParams, ModulationAlphabet, daft_demodulate, daft_modulate, default_c1, qam_demodulate, qam_modulate
from .channel import (
    MimoChannelSpec,
    apply_channel,
    build_mimo_matrix,
    build_time_domain_mimo_matrix,
    random_mimo_channel,
)
from .metrics import METHODS, FlopsParams, bit_errors, flops_analytic, sinr_all
from .solvers import SolverConfig, kaczmarz_precode, pcg_precode, zf_flops, zf_precode
from .sparse import DEFAULT_THRESHOLD_DB, sparsify

log = logging.getLogger(__name__)

WAVEFORMS = ("AFDM", "OFDM")
CSV_HEADER = "method,waveform,snr_db,K,ber,mean_iters,mean_flops,mean_sinr_db"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelConfig:
    paths: int = 3
    l_max: int = 2
    nu_max: float = 1.0
    fractional: bool = True
    gains: str = "rayleigh"
    # fixed support; randomized per trial when empty
    delays: tuple[int, ...] = ()
    dopplers: tuple[float, ...] = ()


@dataclass(frozen=True)
class ComplexityConfig:
    users: tuple[int, ...] = (9, 10, 11, 12, 13, 14, 15, 16)
    n: int | None = None  # N in the ZF model; defaults to the subcarrier count
    n_ts: int | None = None  # defaults to N_t
    t_s: int = 200
    t_p: int | None = None  # defaults to solver.max_iters
    nnz: int | None = None  # defaults to N * N_t


@dataclass(frozen=True)
class SimConfig:
    N: int = 16
    N_t: int = 8
    K: int = 4
    N_k: int = 1
    modulation: int = 4
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0)
    trials: int = 10
    master_seed: int = 0
    waveforms: tuple[str, ...] = ("AFDM",)
    precoders: tuple[str, ...] = ("PCG",)
    threshold_db: float = DEFAULT_THRESHOLD_DB
    c1: float | None = None  # None: default_c1 from the channel's Doppler bound
    c2: float = 0.0
    xi: float | None = None  # None: inverse SNR at each grid point
    solver: SolverConfig = field(default_factory=SolverConfig)
    rka_iters: int = 2000
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    complexity: ComplexityConfig = field(default_factory=ComplexityConfig)
    jobs: int = 1
    strict: bool = False
    sinr: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.snr_grid_db:
            raise ConfigError("snr grid is empty")
        if min(self.N, self.N_t, self.K, self.N_k) < 1:
            raise ConfigError("N, N_t, K and N_k must be positive")
        for w in self.waveforms:
            if w not in WAVEFORMS:
                raise ConfigError(f"unknown waveform {w!r}")
        for p in self.precoders:
            if p not in METHODS:
                raise ConfigError(f"unknown precoder {p!r}")
        if self.modulation not in (4, 16, 64):
            raise ConfigError("modulation must be 4, 16 or 64")
        ch = self.channel
        if ch.delays or ch.dopplers:
            if len(ch.delays) != len(ch.dopplers) or not ch.delays:
                raise ConfigError("delays and dopplers must list the same number of paths")
        if ch.gains not in ("rayleigh", "unit"):
            raise ConfigError(f"unknown gain model {ch.gains!r}")

    @property
    def N_r(self) -> int:
        return self.K * self.N_k

    @property
    def nu_max(self) -> float:
        ch = self.channel
        return max(abs(v) for v in ch.dopplers) if ch.dopplers else ch.nu_max

    def afdm_params(self, waveform: str) -> AfdmParams:
        if waveform == "OFDM":
            return AfdmParams.ofdm(self.N)
        c1 = self.c1 if self.c1 is not None else default_c1(int(math.floor(self.nu_max + 0.5)), self.N)
        return AfdmParams(self.N, c1, self.c2)


@dataclass
class SweepRow:
    method: str
    waveform: str
    snr_db: float
    K: int
    ber: float
    mean_iters: float
    mean_flops: float
    mean_sinr_db: float
    trials: int = 0
    total_flops: int = 0
    bits: int = 0
    errors: int = 0
    aborted: int = 0

    def csv_line(self) -> str:
        return ",".join(
            [self.method, self.waveform, _fmt(self.snr_db), str(self.K), _fmt(self.ber),
             _fmt(self.mean_iters), _fmt(self.mean_flops), _fmt(self.mean_sinr_db)]
        )


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def rows_to_csv(rows) -> str:
    buf = io.StringIO(newline="")
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(r.csv_line() + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------

_KEYS = {
    "system": {"n", "n_t", "k", "n_k", "n_r", "modulation", "waveform", "c1", "c2"},
    "channel": {"paths", "l_max", "nu_max", "fractional", "gains", "delays", "dopplers"},
    "sim": {"snr_db", "trials", "seed", "precoder", "threshold_db", "jobs", "strict", "sinr"},
    "solver": {"max_iters", "tol", "xi", "preconditioner", "rka_iters"},
    "complexity": {"users", "n", "n_ts", "t_s", "t_p", "nnz"},
}


def _list(text: str, conv=str) -> tuple:
    return tuple(conv(t.strip()) for t in text.split(",") if t.strip())


def _users(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return _list(text, int)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _auto(text: str, conv):
    return None if text.strip().lower() == "auto" else conv(text)


def parse_config(text: str) -> SimConfig:
    """Parse ``[section]`` / ``key = value`` text. Unknown sections or keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for sec in cp.sections():
        if sec not in _KEYS:
            raise ConfigError(f"unknown section [{sec}]")
        unknown = set(cp[sec]) - _KEYS[sec]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(unknown))}")

    def get(sec, key, conv, default):
        if cp.has_option(sec, key):
            raw = cp.get(sec, key)
            try:
                return conv(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{sec}] {key} = {raw!r}: {exc}") from exc
        return default

    d = SimConfig()
    ch_d, cx_d, sv_d = d.channel, d.complexity, d.solver
    try:
        channel = ChannelConfig(
            paths=get("channel", "paths", int, ch_d.paths),
            l_max=get("channel", "l_max", int, ch_d.l_max),
            nu_max=get("channel", "nu_max", float, ch_d.nu_max),
            fractional=get("channel", "fractional", _bool, ch_d.fractional),
            gains=get("channel", "gains", str.strip, ch_d.gains),
            delays=get("channel", "delays", lambda t: _list(t, int), ()),
            dopplers=get("channel", "dopplers", lambda t: _list(t, float), ()),
        )
        solver = SolverConfig(
            max_iters=get("solver", "max_iters", int, sv_d.max_iters),
            tol=get("solver", "tol", float, sv_d.tol),
            preconditioner=get("solver", "preconditioner", str.strip, sv_d.preconditioner),
        )
        complexity = ComplexityConfig(
            users=get("complexity", "users", _users, cx_d.users),
            n=get("complexity", "n", int, None),
            n_ts=get("complexity", "n_ts", int, None),
            t_s=get("complexity", "t_s", int, cx_d.t_s),
            t_p=get("complexity", "t_p", int, None),
            nnz=get("complexity", "nnz", int, None),
        )
        K = get("system", "k", int, d.K)
        N_k = get("system", "n_k", int, d.N_k)
        n_r = get("system", "n_r", int, None)
        if n_r is not None and n_r != K * N_k:
            raise ConfigError(f"N_r = {n_r} but K * N_k = {K * N_k}")
        return SimConfig(
            N=get("system", "n", int, d.N),
            N_t=get("system", "n_t", int, d.N_t),
            K=K,
            N_k=N_k,
            modulation=get("system", "modulation", int, d.modulation),
            waveforms=get("system", "waveform", _list, d.waveforms),
            c1=get("system", "c1", lambda t: _auto(t, float), None),
            c2=get("system", "c2", float, d.c2),
            snr_grid_db=get("sim", "snr_db", lambda t: _list(t, float), d.snr_grid_db),
            trials=get("sim", "trials", int, d.trials),
            master_seed=get("sim", "seed", int, d.master_seed),
            precoders=get("sim", "precoder", _list, d.precoders),
            threshold_db=get("sim", "threshold_db", float, d.threshold_db),
            jobs=get("sim", "jobs", int, d.jobs),
            strict=get("sim", "strict", _bool, d.strict),
            sinr=get("sim", "sinr", _bool, d.sinr),
            xi=get("solver", "xi", lambda t: _auto(t, float), None),
            solver=solver,
            rka_iters=get("solver", "rka_iters", int, d.rka_iters),
            channel=channel,
            complexity=complexity,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SimConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

def trial_seed(master_seed: int, snr_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), int(snr_index), int(trial)])


def draw_channel(cfg: SimConfig, rng: np.random.Generator) -> MimoChannelSpec:
    ch = cfg.channel
    if ch.delays:
        P = len(ch.delays)
        if ch.gains == "unit":
            g = np.full((cfg.N_r, cfg.N_t, P), 1 / np.sqrt(P), dtype=complex)
        else:
            shape = (cfg.N_r, cfg.N_t, P)
            g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5 / P)
        return MimoChannelSpec(ch.delays, ch.dopplers, g)
    return random_mimo_channel(rng, cfg.N_r, cfg.N_t, ch.paths, ch.l_max, ch.nu_max, ch.fractional, ch.gains)


class SolverDidNotConverge(RuntimeError):
    pass


@dataclass
class _Outcome:
    errors: int
    bits: int
    iterations: int
    flops: int
    sinr: float  # mean linear SINR over streams, nan when disabled
    converged: bool


def _precode(method, H, S, b, xi, cfg: SimConfig, rng):
    """Return (x, iterations, flops, converged)."""
    m, n = H.shape
    if method == "ZF":
        return zf_precode(H, b, xi), 0, zf_flops(m, n), True
    if method == "PCG":
        rep = pcg_precode(S, b, replace(cfg.solver, xi=xi))
        return rep.solution, rep.iterations, rep.flops, rep.converged
    rep = kaczmarz_precode(H, b, xi, cfg.rka_iters, rng, without_replacement=method == "SwoR-rKA")
    return rep.solution, rep.iterations, rep.flops, True


def _linear_precoder(method, H, S, xi):
    # the matrix each precoder converges to; used only for the SINR diagnostic
    G = H if method != "PCG" else S.toarray()
    gram = G @ G.conj().T + xi * np.eye(G.shape[0])
    return G.conj().T @ np.linalg.inv(gram)


def run_trial(cfg: SimConfig, snr_index: int, trial: int) -> dict[tuple[str, str], _Outcome]:
    snr_db = cfg.snr_grid_db[snr_index]
    ch_ss, data_ss, noise_ss, solver_ss = trial_seed(cfg.master_seed, snr_index, trial).spawn(4)
    spec = draw_channel(cfg, np.random.default_rng(ch_ss))
    alphabet = ModulationAlphabet(cfg.modulation)
    n_streams = cfg.N * cfg.N_r
    bits = np.random.default_rng(data_ss).integers(0, 2, size=n_streams * alphabet.bits_per_symbol)
    b = qam_modulate(bits, alphabet)
    sigma2 = 10.0 ** (-snr_db / 10.0)
    xi = sigma2 if cfg.xi is None else cfg.xi

    out = {}
    for waveform in cfg.waveforms:
        params = cfg.afdm_params(waveform)
        H = build_mimo_matrix(spec, params)
        physical = build_time_domain_mimo_matrix(spec, params)
        S = sparsify(H, cfg.threshold_db, sigma2) if "PCG" in cfg.precoders else None
        for method in cfg.precoders:
            x, iters, flops, converged = _precode(method, H, S, b, xi, cfg, np.random.default_rng(solver_ss))
            if cfg.strict and not converged:
                raise SolverDidNotConverge(f"{method} did not converge (snr index {snr_index}, trial {trial})")
            beta = np.sqrt(n_streams / np.vdot(x, x).real)
            tx = daft_modulate((beta * x).reshape(cfg.N_t, cfg.N).T, params).T.ravel()
            rx = apply_channel(physical, tx, sigma2, np.random.default_rng(noise_ss))
            y = daft_demodulate(rx.reshape(cfg.N_r, cfg.N).T, params).T.ravel()
            rx_bits = qam_demodulate(y / beta, alphabet)
            sinr = np.nan
            if cfg.sinr:
                F = _linear_precoder(method, H, S, xi)
                scale2 = n_streams / np.linalg.norm(F) ** 2
                sinr = float(np.mean(sinr_all(H, F, sigma2 / scale2)))
            out[(method, waveform)] = _Outcome(
                bit_errors(bits, rx_bits), bits.size, iters, flops, sinr, converged
            )
    return out


def _run_grid(cfg: SimConfig, snr_indices) -> list[tuple[int, int, dict]]:
    tasks = [(s, t) for s in snr_indices for t in range(cfg.trials)]

    def work(task):
        s, t = task
        try:
            return s, t, run_trial(cfg, s, t)
        except SolverDidNotConverge as exc:
            log.warning("aborted trial: %s", exc)
            return s, t, None

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(work, tasks))
    return [work(task) for task in tasks]


def _aggregate(cfg: SimConfig, results, snr_index: int, K: int, method_suffix: str = "") -> list[SweepRow]:
    rows = []
    for method in cfg.precoders:
        for waveform in cfg.waveforms:
            outs = [r[(method, waveform)] for s, _, r in results if s == snr_index and r is not None]
            aborted = sum(1 for s, _, r in results if s == snr_index and r is None)
            n = len(outs)
            if n == 0:
                continue
            errors = sum(o.errors for o in outs)
            nbits = sum(o.bits for o in outs)
            total_flops = sum(o.flops for o in outs)
            sinr = np.mean([o.sinr for o in outs]) if cfg.sinr else np.nan
            rows.append(SweepRow(
                method=method + method_suffix,
                waveform=waveform,
                snr_db=cfg.snr_grid_db[snr_index],
                K=K,
                ber=errors / nbits,
                mean_iters=sum(o.iterations for o in outs) / n,
                mean_flops=total_flops / n,
                mean_sinr_db=10 * np.log10(sinr) if cfg.sinr else np.nan,
                trials=n,
                total_flops=total_flops,
                bits=nbits,
                errors=errors,
                aborted=aborted,
            ))
    return rows


def run_ber_sweep(cfg: SimConfig) -> list[SweepRow]:
    """BER / iterations / FLOPs / SINR versus SNR for every (precoder, waveform) pair."""
    results = _run_grid(cfg, range(len(cfg.snr_grid_db)))
    rows = []
    for s in range(len(cfg.snr_grid_db)):
        rows.extend(_aggregate(cfg, results, s, cfg.K))
    rows.sort(key=lambda r: (r.method, r.waveform, r.snr_db))
    return rows


def analytic_params(cfg: SimConfig, K: int) -> FlopsParams:
    cx = cfg.complexity
    return FlopsParams(
        N=cx.n if cx.n is not None else cfg.N,
        K=K,
        N_ts=cx.n_ts if cx.n_ts is not None else cfg.N_t,
        T_s=cx.t_s,
        T_p=cx.t_p if cx.t_p is not None else cfg.solver.max_iters,
        nnz=cx.nnz if cx.nnz is not None else cfg.N * cfg.N_t,
    )


def run_complexity_sweep(cfg: SimConfig, user_range=None, methods=None, measure: bool = True) -> list[SweepRow]:
    """Per user count: the four analytic FLOP models (``<method>:analytic`` rows)
    and, when ``measure`` is set, instrumented runs of the configured precoders
    at the first SNR grid point (``<method>:measured`` rows)."""
    users = tuple(user_range) if user_range is not None else cfg.complexity.users
    if not users:
        raise ConfigError("user range is empty")
    methods = tuple(methods) if methods is not None else METHODS
    nan = float("nan")
    rows = []
    for K in users:
        fp = analytic_params(cfg, K)
        for method in methods:
            rows.append(SweepRow(method + ":analytic", "any", nan, K, nan, nan,
                                 float(flops_analytic(method, fp)), nan, trials=1,
                                 total_flops=flops_analytic(method, fp)))
        if measure:
            sub = replace(cfg, K=K, snr_grid_db=cfg.snr_grid_db[:1])
            sub = replace(sub, precoders=tuple(p for p in sub.precoders if p in methods))
            if sub.precoders:
                rows.extend(_aggregate(sub, _run_grid(sub, [0]), 0, K, ":measured"))
    return rows
