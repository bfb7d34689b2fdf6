"""Round-synchronous experiment engine.

Runs one algorithm against a channel realization, evaluates the
throughput metric and the distance to the centralized precoder after
every round, and accumulates the algorithm's message counts.

Throughput is measured per receive antenna.  For stream ``m`` of UE ``k``

    gamma_{m,k} = |s_{k,m}|^2 / (|(H_k x - s_k)_m|^2 + sigma2)

and the reported figure is ``(1/M) sum_{k,m} log2(1 + gamma_{m,k})``.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .admm import admm_init, admm_messages, admm_round
from .amp import amp_init, amp_messages, amp_round
from .bp import bp_estimate, bp_init, bp_messages, bp_round
from .ccoi import ccoi_init, ccoi_messages, ccoi_precompute, ccoi_round
from .channel import assemble_global
from .errors import DimensionMismatch, InvalidParam
from .numerics import complex_gaussian_matrix, make_rng, track_factorizations
from .oracle import rzfbf_centralized
from .topology import MessageCount, per_antenna

__all__ = ["SymbolVector", "RoundTrace", "ALGORITHMS", "draw_symbols",
           "avg_throughput", "oracle_precoder", "run_experiment",
           "trace_dict", "trace_to_csv", "trace_to_json"]

ALGORITHMS = ("bp", "amp", "ccoi", "admm", "oracle")
CSV_COLUMNS = ("iter", "algorithm", "avg_throughput", "rel_error",
               "msgs_originated", "edge_deliveries", "scalars_transferred")


@dataclass(frozen=True)
class SymbolVector:
    """Stacked per-UE data symbols."""
    s: np.ndarray
    topology: object

    def __post_init__(self):
        if self.s.shape != (self.topology.n_rx,):
            raise DimensionMismatch(f"symbol vector has shape {self.s.shape}, "
                                    f"expected ({self.topology.n_rx},)")

    def blocks(self):
        return self.topology.split_rx(self.s)

    def __array__(self, dtype=None, copy=None):
        return self.s if dtype is None else self.s.astype(dtype)


@dataclass
class RoundTrace:
    """Per-round metrics; message counters are cumulative."""
    algorithm: str
    avg_throughput: list = field(default_factory=list)
    rel_error: list = field(default_factory=list)
    msgs_originated: list = field(default_factory=list)
    edge_deliveries: list = field(default_factory=list)
    scalars_transferred: list = field(default_factory=list)
    factorizations: list = field(default_factory=list)
    per_round: MessageCount = MessageCount(0, 0, 0)
    x_final: np.ndarray = None

    def __len__(self):
        return len(self.avg_throughput)

    def rows(self):
        for t in range(len(self)):
            yield (t + 1, self.algorithm, self.avg_throughput[t], self.rel_error[t],
                   self.msgs_originated[t], self.edge_deliveries[t],
                   self.scalars_transferred[t])


def draw_symbols(rng, topology, kind="gaussian"):
    """Data symbols with unit average power.

    ``gaussian`` gives CN(0, 1) entries; ``qpsk`` draws uniformly from
    ``{(+-1 +- 1j) / sqrt(2)}``.
    """
    rng = make_rng(rng)
    M = topology.n_rx
    if kind == "gaussian":
        s = complex_gaussian_matrix(rng, M, 1).ravel()
    elif kind == "qpsk":
        bits = rng.integers(0, 2, size=(M, 2))
        s = ((1 - 2 * bits[:, 0]) + 1j * (1 - 2 * bits[:, 1])) / np.sqrt(2)
    else:
        raise InvalidParam(f"unknown symbol kind {kind!r}")
    return SymbolVector(s, topology)


def _received(x, channels):
    top = channels.topology
    xb = top.split_tx(x)
    return [sum(channels.H[k, l] @ xb[l] for l in top.B[k]) for k in range(top.K)]


def avg_throughput(x, channels, s, sigma2):
    """Average per-antenna rate in bits/s/Hz; see module docstring."""
    top = channels.topology
    x = np.asarray(x)
    s = np.asarray(s)
    if x.shape != (top.n_tx,) or s.shape != (top.n_rx,):
        raise DimensionMismatch(f"x {x.shape} / s {s.shape} do not match "
                                f"({top.n_tx},) / ({top.n_rx},)")
    if not sigma2 > 0:
        raise InvalidParam(f"sigma2 must be positive, got {sigma2}")
    y = np.concatenate(_received(x, channels))
    gamma = np.abs(s) ** 2 / (np.abs(y - s) ** 2 + sigma2)
    return float(np.mean(np.log2(1.0 + gamma)))


def oracle_precoder(channels, s, beta):
    """Centralized unnormalized RZF precoder for this realization."""
    H = assemble_global(channels)
    return rzfbf_centralized(H, np.asarray(s), per_antenna(beta, channels.topology)).x


class _Runner:
    """Uniform ``step()`` / ``estimate()`` wrapper around each algorithm."""

    def __init__(self, algorithm, channels, s, beta, oracle_x, options):
        top = channels.topology
        opts = dict(options)
        self.channels, self.s, self.beta = channels, s, beta
        self.algorithm = algorithm
        if algorithm == "bp":
            self.state = bp_init(top, damping=opts.pop("damping", 0.0))
            self.messages = bp_messages(top)
        elif algorithm == "amp":
            self.state = amp_init(top, s, **_take(opts, "onsager_order",
                                                  "first_round_onsager", "damping"))
            self.messages = amp_messages(top)
        elif algorithm == "ccoi":
            self.statics = opts.pop("statics", None)
            T_max = opts.pop("T_max", None)
            self._T_max = T_max
            self.state = ccoi_init(top, s, **_take(opts, "first_round_onsager", "damping"))
            self.messages = ccoi_messages(top)
        elif algorithm == "admm":
            self.state = admm_init(top, opts.pop("rho", 1.0))
            self.messages = admm_messages(top)
        elif algorithm == "oracle":
            self.x = oracle_x if oracle_x is not None else oracle_precoder(channels, s, beta)
            self.messages = MessageCount(0, 0, 0)
        else:
            raise InvalidParam(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
        if opts:
            raise InvalidParam(f"options not understood by {algorithm}: {sorted(opts)}")

    def prepare(self, T):
        if self.algorithm == "ccoi" and self.statics is None:
            self.statics = ccoi_precompute(self.channels, self.beta, self._T_max or T)

    def step(self):
        a = self.algorithm
        if a == "bp":
            self.state = bp_round(self.state, self.channels, self.s, self.beta)
        elif a == "amp":
            self.state = amp_round(self.state, self.channels, self.s, self.beta)
        elif a == "ccoi":
            self.state = ccoi_round(self.state, self.statics, self.channels, self.s)
        elif a == "admm":
            self.state = admm_round(self.state, self.channels, self.s, self.beta)

    def estimate(self):
        a = self.algorithm
        if a == "oracle":
            return self.x
        if a == "bp":
            return bp_estimate(self.state)
        return np.concatenate(self.state.x)


def _take(opts, *names):
    return {n: opts.pop(n) for n in names if n in opts}


def run_experiment(algorithm, channels, s, beta, sigma2, T, oracle_x=None, **options):
    """Run `T` rounds of `algorithm` and record a :class:`RoundTrace`.

    Parameters
    ----------
    algorithm : {'bp', 'amp', 'ccoi', 'admm', 'oracle'}
        ``oracle`` is a reference run that holds the centralized
        precoder from round one on.
    channels : ChannelSet
    s : array_like or SymbolVector
    beta : float or sequence of float
        Regularization, scalar or one value per UE.
    sigma2 : float
        Noise power in the throughput metric.
    T : int
        Number of rounds.
    oracle_x : ndarray, optional
        Unnormalized centralized precoder; ``rel_error`` is NaN without it.
    **options
        Algorithm knobs: ``damping`` (bp, amp, ccoi), ``onsager_order``
        and ``first_round_onsager`` (amp), ``first_round_onsager``,
        ``statics`` and ``T_max`` (ccoi), ``rho`` (admm).

    Notes
    -----
    CCoI statics are not counted in the per-round traffic; when they are
    built here the factorizations they need are not charged to any round.
    """
    if int(T) < 1:
        raise InvalidParam(f"T must be >= 1, got {T}")
    s = np.asarray(s, dtype=complex)
    top = channels.topology
    if s.shape != (top.n_rx,):
        raise DimensionMismatch(f"s has shape {s.shape}, expected ({top.n_rx},)")
    runner = _Runner(algorithm, channels, s, beta, oracle_x, options)
    runner.prepare(int(T))
    trace = RoundTrace(algorithm, per_round=runner.messages)
    ref_norm = np.linalg.norm(oracle_x) if oracle_x is not None else None
    total = MessageCount(0, 0, 0)
    for _ in range(int(T)):
        with track_factorizations() as fc:
            runner.step()
        x = runner.estimate()
        total = total + runner.messages
        trace.avg_throughput.append(avg_throughput(x, channels, s, sigma2))
        if ref_norm is None:
            trace.rel_error.append(float("nan"))
        else:
            diff = np.linalg.norm(x - oracle_x)
            trace.rel_error.append(float(diff / ref_norm) if ref_norm > 0 else float(diff))
        trace.msgs_originated.append(total.originated)
        trace.edge_deliveries.append(total.deliveries)
        trace.scalars_transferred.append(total.scalars)
        trace.factorizations.append(fc.count)
    trace.x_final = x
    return trace


def trace_to_csv(trace):
    """CSV text with a header row; floats use ``repr`` so output is exact."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in trace.rows():
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def trace_dict(trace):
    """JSON-ready mapping mirroring the CSV columns (floats exact)."""
    return {
        "algorithm": trace.algorithm,
        "iter": list(range(1, len(trace) + 1)),
        "avg_throughput": [jsonio.encode_float(v) for v in trace.avg_throughput],
        "rel_error": [None if np.isnan(v) else jsonio.encode_float(v) for v in trace.rel_error],
        "msgs_originated": list(trace.msgs_originated),
        "edge_deliveries": list(trace.edge_deliveries),
        "scalars_transferred": list(trace.scalars_transferred),
        "factorizations": list(trace.factorizations),
        "per_round": trace.per_round._asdict(),
    }


def trace_to_json(trace, **extra):
    """Standalone JSON document for one trace; `extra` keys are embedded verbatim."""
    doc = {"schema_version": jsonio.SCHEMA_VERSION, "kind": "RoundTrace", **extra,
           "trace": trace_dict(trace)}
    return jsonio.dumps(doc)
