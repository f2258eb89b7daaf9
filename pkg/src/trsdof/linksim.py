"""Finite-SNR Monte Carlo evaluation of layered rate-splitting plans.

Each transmitter has K antennas.  Channel estimates are i.i.d. standard
complex Gaussian; the estimation error on an interference link with quality
``a`` has i.i.d. entries of variance ``P^-a``, so a beam orthogonal to the
estimate leaks ``P^-a`` on average.  Direct links are known exactly and
absent links carry no signal.

Private messages are zero-forced towards every active user; a group
message is zero-forced towards the users outside its group.  Users decode
top layer first, jointly decoding their layer's messages (a multiple-access
channel) while treating everything not yet decoded as noise.  Per-layer
rates are scaled so every decoding user's MAC constraints hold, and the
scale is reported per message in proportion to the plan's DoF allocation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DegenerateNullSpace, InsufficientPoints, PlanTopologyMismatch
from .topology import CsitTopology, effective_zfbf_topology
from .trs import MAXIMAL, TrsPlan, layer_allocation, private_dof

_REL_TOL = 1e-9


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _trial_normals(seed: int, stream: int, trials: int, shape) -> np.ndarray:
    """Complex normals with trial ``i`` drawn from its own key ``(stream, i)``.

    A trial's values do not depend on how many trials are requested or in
    which order they are generated.
    """
    out = np.empty((trials,) + tuple(shape), dtype=complex)
    for i in range(trials):
        out[i] = _complex_normal(_rng(seed, stream, i), shape)
    return out


@dataclass(frozen=True)
class ChannelDraw:
    """A batch of channel realizations at one SNR.

    Arrays are indexed ``[trial, user, transmitter, antenna]``.

    Attributes
    ----------
    estimate : ndarray
        Transmitter-side channel estimates.
    error : ndarray
        Estimation errors; ``channel == estimate + error``.
    quality : ndarray
        ``K x K`` qualities, NaN on direct and absent links.
    snr : float
        Linear transmit SNR ``P``.
    """

    estimate: np.ndarray
    error: np.ndarray
    quality: np.ndarray
    snr: float

    @property
    def channel(self) -> np.ndarray:
        return self.estimate + self.error

    @property
    def trials(self) -> int:
        return self.estimate.shape[0]


def _quality_array(t: CsitTopology) -> np.ndarray:
    q = np.full((t.K, t.K), np.nan)
    for k, j in t.interference_links():
        q[k, j] = float(t.quality(k, j))
    return q


def _unit_draws(t: CsitTopology, seed: int, trials: int):
    """Standard-normal estimates and unit-variance errors shared across SNRs."""
    K = t.K
    draws = _trial_normals(seed, 0, trials, (2, K, K, K))
    est, err = draws[:, 0], draws[:, 1]
    present = np.array(t.connectivity, dtype=bool)
    est[:, ~present, :] = 0
    err[:, ~present, :] = 0
    err[:, np.arange(K), np.arange(K), :] = 0
    return est, err


def draw_channels(t: CsitTopology, P: float, seed: int, trials: int = 1) -> ChannelDraw:
    """Channel batch at linear SNR ``P``; identical inputs give identical draws.

    The underlying Gaussians depend only on ``seed`` and ``trials``, so
    batches at different SNRs share them and differ only in error scaling.
    """
    if P <= 1:
        raise ValueError("SNR must exceed 1")
    q = _quality_array(t)
    est, err = _unit_draws(t, seed, trials)
    scale = np.where(np.isnan(q), 0.0, P ** (-np.nan_to_num(q) / 2))
    return ChannelDraw(est, err * scale[None, :, :, None], q, float(P))


def zf_direction(to_null: Sequence[np.ndarray], reference: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to every vector in ``to_null``.

    The reference direction (normally the estimated direct channel) is
    projected onto the orthogonal complement of ``to_null``.  With nothing
    to null this is just the normalized reference.
    """
    reference = np.asarray(reference, dtype=complex)
    if len(to_null) == 0:
        return reference / np.linalg.norm(reference)
    V = np.stack([np.asarray(v, dtype=complex) for v in to_null], axis=1)
    return _zf_batch(V[None], reference[None])[0]


def _zf_batch(V: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Batched projection: ``V`` is ``(T, K, m)``, ``ref`` is ``(T, K)``."""
    T, K, m = V.shape
    if m >= K:
        raise DegenerateNullSpace(f"cannot null {m} directions with {K} antennas")
    if m == 0:
        out = ref
    else:
        Q, R = np.linalg.qr(V)
        diag = np.abs(np.diagonal(R, axis1=1, axis2=2))
        scale = np.linalg.norm(V, axis=1)
        if np.any(diag < _REL_TOL * np.maximum(scale, 1e-300)):
            raise DegenerateNullSpace("vectors to null are numerically dependent")
        coeff = np.einsum("tkm,tk->tm", Q.conj(), ref)
        out = ref - np.einsum("tkm,tm->tk", Q, coeff)
    norms = np.linalg.norm(out, axis=1)
    if np.any(norms < _REL_TOL * np.maximum(np.linalg.norm(ref, axis=1), 1e-300)):
        raise DegenerateNullSpace("reference lies in the span of the vectors to null")
    return out / norms[:, None]


@dataclass(frozen=True)
class Message:
    """A transmitted message: private (layer 1) or a group message of a common layer."""

    tx: int
    layer: int
    lower: float
    upper: float
    weight: float  # normalized DoF allocation, 1 for private messages
    label: str


def _plan_messages(plan: TrsPlan, mode: str) -> list[Message]:
    priv = private_dof(plan.topology, plan.S, plan.r)
    msgs = []
    for k in plan.S:
        if priv[k] > 0:
            msgs.append(Message(k, 1, float("-inf"), float(plan.r[k]), 1.0, "p"))
    for layer in plan.layers:
        if layer.width == 0:
            continue
        alloc = layer_allocation(plan, layer, mode)
        for p, k in enumerate(plan.S):
            if alloc[k] > 0:
                msgs.append(
                    Message(k, layer.index, float(layer.tx_lower[p]), float(layer.upper), float(alloc[k]), f"c{layer.index}")
                )
    return msgs


def _message_power(m: Message, P: float) -> float:
    if m.layer == 1:
        return P**m.upper
    return P**m.upper - P**m.lower


def _precoders(t: CsitTopology, plan: TrsPlan, msgs, est: np.ndarray) -> list[np.ndarray]:
    """Zero-forcing beams; only users that actually hear a transmitter are nulled."""
    layer_by_index = {layer.index: layer for layer in plan.layers}
    out = []
    for m in msgs:
        k = m.tx
        if m.layer == 1:
            targets = [j for j in plan.S if j != k]
        else:
            group = layer_by_index[m.layer].groups[plan.position(k)]
            targets = [j for j in plan.S if j not in group]
        targets = [j for j in targets if t.connectivity[j][k]]
        V = np.stack([est[:, j, k, :] for j in targets], axis=2) if targets else np.zeros(est.shape[:1] + (t.K, 0), complex)
        out.append(_zf_batch(V, est[:, k, k, :]))
    return out


@dataclass(frozen=True)
class SimResult:
    """Monte Carlo rates over an SNR sweep.

    ``mean_rate[i, m]`` is the mean rate (bits/channel use) of message ``m``
    at ``snr_db[i]`` and ``stderr`` its standard error; ``aggregate`` and
    ``aggregate_stderr`` refer to the total over messages.
    ``layer_scale[i, l]`` is the rate per unit of normalized DoF granted to
    common layer ``l`` (ordered as ``layers``).
    """

    snr_db: tuple[float, ...]
    messages: tuple[Message, ...]
    mean_rate: np.ndarray
    stderr: np.ndarray
    aggregate: np.ndarray
    aggregate_stderr: np.ndarray
    layers: tuple[int, ...]
    layer_scale: np.ndarray
    trials: int
    seed: int

    def rows(self) -> list[dict[str, str]]:
        out = []
        for i, p in enumerate(self.snr_db):
            for m_idx, m in enumerate(self.messages):
                out.append(
                    {
                        "P_dB": f"{p:g}",
                        "user": str(m.tx + 1),
                        "message": m.label,
                        "mean_rate": f"{self.mean_rate[i, m_idx]:.6f}",
                        "stderr": f"{self.stderr[i, m_idx]:.6f}",
                    }
                )
            out.append(
                {
                    "P_dB": f"{p:g}",
                    "user": "all",
                    "message": "sum",
                    "mean_rate": f"{self.aggregate[i]:.6f}",
                    "stderr": f"{self.aggregate_stderr[i]:.6f}",
                }
            )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SIM_CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()


SIM_CSV_COLUMNS = ["P_dB", "user", "message", "mean_rate", "stderr"]


def _check_plan(t: CsitTopology, plan: TrsPlan) -> None:
    if plan.topology != t and plan.topology != effective_zfbf_topology(t):
        raise PlanTopologyMismatch("plan was built for a different topology")


def simulate_rates(
    t: CsitTopology,
    plan: TrsPlan,
    snr_db: Sequence[float],
    trials: int,
    seed: int,
    mode: str = MAXIMAL,
    ergodic: bool = True,
) -> SimResult:
    """Monte Carlo rates of every message of ``plan`` at each SNR.

    Parameters
    ----------
    t : CsitTopology
        Network the plan runs on; the plan may have been built on its
        quality-1 completion.
    plan : TrsPlan
    snr_db : sequence of float
        Transmit SNRs in dB.
    trials : int
        Channel draws per SNR, at least 100.
    seed : int
        Draws are shared across SNR points (common random numbers).
    mode : {"maximal", "orthogonal"}
        Packing used for the per-layer DoF allocation.
    ergodic : bool
        Scale each layer by the ratio of mean MAC capacity to allocated DoF
        (coding across draws).  ``False`` applies the scale draw by draw.
    """
    _check_plan(t, plan)
    if trials < 100:
        raise ValueError("use at least 100 trials")
    msgs = _plan_messages(plan, mode)
    layer_ids = tuple(sorted({m.layer for m in msgs if m.layer > 1}, reverse=True))
    est_unit, err_unit = _unit_draws(t, seed, trials)
    q = _quality_array(t)
    precoders = _precoders(t, plan, msgs, est_unit)
    decode = {layer.index: layer.decode_sets for layer in plan.layers}
    n_p = len(snr_db)
    mean_rate = np.zeros((n_p, len(msgs)))
    stderr = np.zeros((n_p, len(msgs)))
    aggregate = np.zeros(n_p)
    aggregate_se = np.zeros(n_p)
    layer_scale = np.zeros((n_p, len(layer_ids)))
    for i, pdb in enumerate(snr_db):
        P = 10.0 ** (pdb / 10.0)
        scale = np.where(np.isnan(q), 0.0, P ** (-np.nan_to_num(q) / 2))
        h = est_unit + err_unit * scale[None, :, :, None]
        # received power of every message at every active user: (trials, users, messages)
        gain = np.stack(
            [
                np.stack(
                    [np.abs(np.einsum("tk,tk->t", h[:, u, m.tx, :].conj(), precoders[mi])) ** 2 * _message_power(m, P) for mi, m in enumerate(msgs)],
                    axis=1,
                )
                for u in range(t.K)
            ],
            axis=1,
        )
        per_draw_total = np.zeros(trials)
        undecoded = {u: set(range(len(msgs))) for u in plan.S}
        for li, lidx in enumerate(layer_ids):
            members = [mi for mi, m in enumerate(msgs) if m.layer == lidx]
            ratios = []
            for u in plan.S:
                heard = decode[lidx][plan.position(u)]
                dec = [mi for mi in members if msgs[mi].tx in heard]
                if not dec:
                    continue
                undecoded[u] -= set(dec)
                noise = 1.0 + gain[:, u, sorted(undecoded[u])].sum(axis=1)
                for size in range(1, len(dec) + 1):
                    for M in combinations(dec, size):
                        cap = np.log2(1.0 + gain[:, u, list(M)].sum(axis=1) / noise)
                        ratios.append(cap / sum(msgs[mi].weight for mi in M))
            ratios = np.array(ratios)
            if ergodic:
                binding = int(np.argmin(ratios.mean(axis=1)))
                rho_draws = ratios[binding]
            else:
                rho_draws = ratios.min(axis=0)
            rho = rho_draws.mean()
            layer_scale[i, li] = rho
            for mi in members:
                w = msgs[mi].weight
                mean_rate[i, mi] = rho * w
                stderr[i, mi] = w * rho_draws.std(ddof=1) / np.sqrt(trials)
            per_draw_total += rho_draws * sum(msgs[mi].weight for mi in members)
        for mi, m in enumerate(msgs):
            if m.layer != 1:
                continue
            u = m.tx
            others = sorted(undecoded[u] - {mi})
            noise = 1.0 + gain[:, u, others].sum(axis=1)
            rate = np.log2(1.0 + gain[:, u, mi] / noise)
            mean_rate[i, mi] = rate.mean()
            stderr[i, mi] = rate.std(ddof=1) / np.sqrt(trials)
            per_draw_total += rate
        aggregate[i] = per_draw_total.mean()
        aggregate_se[i] = per_draw_total.std(ddof=1) / np.sqrt(trials)
    return SimResult(
        tuple(float(x) for x in snr_db),
        tuple(msgs),
        mean_rate,
        stderr,
        aggregate,
        aggregate_se,
        layer_ids,
        layer_scale,
        trials,
        seed,
    )


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    stderr: float
    intercept: float
    ci95: tuple[float, float]


def fit_slope(snr_db: Sequence[float], values: Sequence[float]) -> SlopeEstimate:
    """Least-squares slope of ``values`` against ``log2 P``."""
    if len(snr_db) < 3:
        raise InsufficientPoints(f"need at least 3 SNR points, got {len(snr_db)}")
    x = np.asarray(snr_db, dtype=float) / 10.0 * np.log2(10.0)
    fit = stats.linregress(x, np.asarray(values, dtype=float))
    half = stats.t.ppf(0.975, len(x) - 2) * fit.stderr
    return SlopeEstimate(float(fit.slope), float(fit.stderr), float(fit.intercept), (fit.slope - half, fit.slope + half))


@dataclass(frozen=True)
class SlopeReport:
    aggregate: SlopeEstimate
    per_message: tuple[SlopeEstimate, ...]
    predicted_aggregate: Fraction | None = None


def estimate_slope(result: SimResult, predicted: Fraction | None = None) -> SlopeReport:
    """Per-message and aggregate DoF estimates from a sweep."""
    agg = fit_slope(result.snr_db, result.aggregate)
    per = tuple(fit_slope(result.snr_db, result.mean_rate[:, m]) for m in range(len(result.messages)))
    return SlopeReport(agg, per, predicted)


@dataclass(frozen=True)
class LeakageSweep:
    """Mean leakage ``E|h^H p|^2`` per interference link across SNRs."""

    snr_db: tuple[float, ...]
    links: tuple[tuple[int, int], ...]
    mean_leakage: np.ndarray  # (snr, link)

    def slope(self, link_index: int) -> SlopeEstimate:
        return fit_slope(self.snr_db, np.log2(self.mean_leakage[:, link_index]))


def leakage_sweep(t: CsitTopology, snr_db: Sequence[float], trials: int, seed: int) -> LeakageSweep:
    """Measure the leakage of a beam orthogonal to each link estimate."""
    links = tuple(t.interference_links())
    est, err = _unit_draws(t, seed, trials)
    ref = _trial_normals(seed, 1, trials, (t.K,))
    q = _quality_array(t)
    beams = [_zf_batch(est[:, k, j, :][:, :, None], ref) for k, j in links]
    out = np.zeros((len(snr_db), len(links)))
    for i, pdb in enumerate(snr_db):
        P = 10.0 ** (pdb / 10.0)
        for li, (k, j) in enumerate(links):
            h = est[:, k, j, :] + err[:, k, j, :] * P ** (-q[k, j] / 2)
            out[i, li] = np.mean(np.abs(np.einsum("tk,tk->t", h.conj(), beams[li])) ** 2)
    return LeakageSweep(tuple(float(x) for x in snr_db), links, out)
