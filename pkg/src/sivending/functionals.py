"""Lagrangian functionals over products of probability simplices.

Every functional keeps its iterate as row-stochastic arrays and exposes

* ``lagrangian(state, lam_d, lam_c)`` in bits,
* ``measure(state)`` returning ``(rate, distortion, cost)``,
* ``step(state, lam_d, lam_c, eta, allowed)`` -- one multiplicative update.

For the convex functionals the update with ``eta = 1`` is the exact block
minimisation of a Blahut-Arimoto style upper bound (so it never increases the
Lagrangian); ``eta != 1`` moves along the same log-space direction, which is
a mirror-descent step on the kernel rows.

Auxiliary alphabets come in two flavours. The *label* form indexes ``U`` by
pairs ``(a, rule)`` where ``rule`` maps each reachable side-information
symbol to a reproduction symbol; merging auxiliary symbols that share an
action and a decoding rule never increases the objective, so this form loses
nothing and turns each Lagrangian problem into a convex one. The *joint*
form keeps a free ``P_{A,U|S}`` with ``|U|`` given and alternates kernel
updates with a decoder reset ``g(u, y) = argmin_xh E[rho | u, y]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from sivending.problem import SourceModel

LN2 = np.log(2.0)
FLOOR = 1e-12
LABEL_BUDGET = 4096


def _h(p) -> float:
    p = np.asarray(p).ravel()
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log2(p)))


def _cond_h(ps, q) -> float:
    """-sum_s ps(s) sum_k q(k|s) log2 q(k|s)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log2(q), 0.0)
    return float(-ps @ terms.reshape(q.shape[0], -1).sum(axis=1))


def _safe_log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _wlog(weights, logs):
    """sum over the last axis of weights * logs with 0 * (-inf) = 0."""
    with np.errstate(invalid="ignore"):
        prod = np.where(weights > 0, weights * logs, 0.0)
    return prod.sum(axis=-1)


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, 0.0)


def mirror_rows(q, log_target, eta, allowed, floor=FLOOR):
    """Normalised ``q^(1-eta) * target^eta`` on allowed entries, zero elsewhere.

    ``q`` and ``log_target`` have shape ``(rows, k)``; blocks of a row that
    must be normalised separately are handled by the caller. Allowed entries
    are floored at ``floor`` so that every allowed symbol stays reachable.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.log(q)
        mixed = logq + eta * (log_target - logq)
    mixed = np.where(np.isfinite(mixed), mixed, log_target)
    mixed[~(allowed & np.isfinite(log_target))] = -np.inf
    top = mixed.max(axis=1, keepdims=True)
    top[~np.isfinite(top)] = 0.0
    out = np.exp(mixed - top)
    sums = out.sum(axis=1, keepdims=True)
    out = np.where(allowed, np.maximum(out / np.where(sums > 0, sums, 1.0), floor), 0.0)
    sums = out.sum(axis=1, keepdims=True)
    return out / np.where(sums > 0, sums, 1.0)


def frank_wolfe_gap(fn, q, lam_d, lam_c, allowed) -> float:
    """Upper bound on ``L(q) - min L`` for convex functionals stepping by ``log_target``.

    Their Lagrangian gradient is ``p(s) (log q - log_target) / ln 2`` up to a
    per-row constant, so the linearisation minimised over the allowed
    simplices bounds the optimum from below. ``inf`` when not computable.
    """
    ps = fn.model.ps
    with np.errstate(invalid="ignore"):
        g = (_safe_log(q) - fn.log_target(q, lam_d, lam_c)) / LN2
    live = ps > 0
    g, qq, ok = g[live], q[live], allowed[live]
    if not np.all(np.isfinite(g[ok])):
        return np.inf
    mean = np.sum(qq * np.where(ok, g, 0.0), axis=1)
    low = np.min(np.where(ok, g, np.inf), axis=1)
    return float(max(ps[live] @ (mean - low), 0.0))


def _normalise(q, allowed):
    sums = q.sum(axis=1, keepdims=True)
    fallback = allowed / np.maximum(allowed.sum(axis=1, keepdims=True), 1)
    return np.where(sums > 0, q / np.where(sums > 0, sums, 1.0), fallback)


@dataclass(frozen=True)
class Labels:
    """Auxiliary symbols ``u = (action[u], rule[u])``; ``rule[u, y]`` is the reproduction."""

    action: np.ndarray
    rule: np.ndarray

    def __len__(self):
        return self.action.size


def enumerate_labels(model: SourceModel, budget: int = LABEL_BUDGET) -> Labels:
    """All (action, decoding rule) pairs, rules restricted to reachable side information."""
    live = model.ps > 0
    actions, rules = [], []
    total = 0
    for a in range(model.n_actions):
        ys = np.flatnonzero(model.w[live, a, :].max(axis=0) > 0)
        total += model.n_xhat ** len(ys)
        if total > budget:
            raise ValueError(f"label alphabet exceeds {budget}; use the joint parameterisation")
        for combo in itertools.product(range(model.n_xhat), repeat=len(ys)):
            rule = np.zeros(model.n_y, dtype=int)
            rule[ys] = combo
            actions.append(a)
            rules.append(rule)
    return Labels(np.array(actions, dtype=int), np.array(rules, dtype=int).reshape(-1, model.n_y))


class _Base:
    has_distortion = True
    convex = True
    pins_distortion = True

    def lagrangian(self, state, lam_d, lam_c) -> float:
        rate, dist, cost = self.measure(state)
        return rate + lam_d * dist + lam_c * cost

    def rate(self, state) -> float:
        return self.measure(state)[0]


class LabelDecoder(_Base):
    """``I(S;A) + I(S;U|Y,A)`` (or ``I(S;U,A)`` when ``causal``) over label kernels ``q[s, u]``."""

    def __init__(self, model: SourceModel, labels: Labels | None = None, causal: bool = False):
        self.model = model
        self.labels = labels if labels is not None else enumerate_labels(model)
        self.causal = causal
        act, rule = self.labels.action, self.labels.rule
        self.W = model.w[:, act, :]
        ys = np.arange(model.n_y)
        self.dbar = model.wd[:, act[:, None], ys[None, :], rule].sum(axis=2)
        self.cost_l = model.cost[act]
        self.onehot = np.eye(model.n_actions)[act]

    @property
    def shape(self):
        return (self.model.n_s, len(self.labels))

    def initial(self, allowed, rng=None):
        q = np.ones(self.shape) if rng is None else rng.dirichlet(np.ones(self.shape[1]), self.shape[0])
        return _normalise(np.where(allowed, q, 0.0), allowed)

    def _marginals(self, q):
        pj = self.model.ps[:, None, None] * q[:, :, None] * self.W
        p_ly = pj.sum(axis=0)
        p_ay = self.onehot.T @ p_ly
        return p_ly, p_ay

    def raw_rate(self, q) -> float:
        h_u_s = _cond_h(self.model.ps, q)
        if self.causal:
            return _h(self.model.ps @ q) - h_u_s
        p_ly, p_ay = self._marginals(q)
        return _h(p_ay.sum(axis=1)) + _h(p_ly) - _h(p_ay) - h_u_s

    def measure(self, q):
        ps = self.model.ps
        dist = float(ps @ (q * self.dbar).sum(axis=1))
        cost = float(ps @ (q @ self.cost_l))
        return max(self.raw_rate(q), 0.0), dist, cost

    def log_target(self, q, lam_d, lam_c):
        lin = LN2 * (lam_d * self.dbar + lam_c * self.cost_l)
        if self.causal:
            return _safe_log(self.model.ps @ q)[None, :] - lin
        p_ly, p_ay = self._marginals(q)
        log_t = _safe_log(_ratio(p_ly, p_ay[self.labels.action]))
        cross = _wlog(self.W, log_t[None, :, :])
        return _safe_log(p_ay.sum(axis=1))[self.labels.action][None, :] + cross - lin

    def step(self, q, lam_d, lam_c, eta, allowed):
        return mirror_rows(q, self.log_target(q, lam_d, lam_c), eta, allowed)

    def allowed(self, mask_d=False, mask_c=False):
        ok = np.ones(self.shape, dtype=bool)
        if mask_c:
            ok &= (self.cost_l <= self.model.cost.min() + 1e-12)[None, :]
        if mask_d:
            best = np.where(ok, self.dbar, np.inf).min(axis=1, keepdims=True)
            ok &= self.dbar <= best + 1e-12
        return ok

    def kernel(self, q):
        """Expand to ``P_{A,U|S}`` with ``U`` the label alphabet, plus the decoder table."""
        n_s, n_l = self.shape
        full = np.zeros((n_s, self.model.n_actions, n_l))
        full[:, self.labels.action, np.arange(n_l)] = q
        return full.reshape(n_s, -1), self.labels.rule.copy()


@dataclass
class JointState:
    q: np.ndarray  # (S, A*U)
    g: np.ndarray  # (U, Y)


class JointDecoder(_Base):
    """Free ``P_{A,U|S}`` with ``|U| = n_aux`` and an explicit decoder table."""

    convex = False
    pins_distortion = False

    def __init__(self, model: SourceModel, n_aux: int, causal: bool = False):
        if n_aux < 1:
            raise ValueError("n_aux must be positive")
        self.model = model
        self.n_aux = n_aux
        self.causal = causal

    @property
    def shape(self):
        return (self.model.n_s, self.model.n_actions * self.n_aux)

    def _q3(self, q):
        return q.reshape(self.model.n_s, self.model.n_actions, self.n_aux)

    def initial(self, allowed, rng=None):
        if rng is None:
            q = np.ones(self.shape)
        else:
            q = rng.dirichlet(np.full(self.shape[1], 0.5), self.shape[0])
        q = _normalise(np.where(allowed, q, 0.0), allowed)
        return JointState(q, self.reset_decoder(q))

    def reset_decoder(self, q):
        q3 = self._q3(q)
        score = np.einsum("s,sau,sayh->uyh", self.model.ps, q3, self.model.wd)
        return np.argmin(score, axis=2)

    def _dbar(self, g):
        m = self.model
        ys = np.arange(m.n_y)
        # wd[s, a, y, g[u, y]] summed over y -> (S, A, U)
        picked = m.wd[:, :, ys[None, :], g]  # (S, A, U, Y)
        return picked.sum(axis=3)

    def measure(self, state):
        m = self.model
        q3 = self._q3(state.q)
        dist = float(np.einsum("s,sau,sau->", m.ps, q3, self._dbar(state.g)))
        cost = float(np.einsum("s,sau,a->", m.ps, q3, m.cost))
        h_au_s = _cond_h(m.ps, state.q)
        if self.causal:
            rate = _h(np.einsum("s,sau->au", m.ps, q3)) - h_au_s
        else:
            p_auy = np.einsum("s,sau,say->auy", m.ps, q3, m.w)
            p_ay = p_auy.sum(axis=1)
            rate = _h(p_ay.sum(axis=1)) + _h(p_auy) - _h(p_ay) - h_au_s
        return max(rate, 0.0), dist, cost

    def step(self, state, lam_d, lam_c, eta, allowed):
        m = self.model
        q3 = self._q3(state.q)
        lin = LN2 * (lam_d * self._dbar(state.g) + lam_c * m.cost[None, :, None])
        if self.causal:
            target = _safe_log(np.einsum("s,sau->au", m.ps, q3))[None] - lin
        else:
            p_auy = np.einsum("s,sau,say->auy", m.ps, q3, m.w)
            p_ay = p_auy.sum(axis=1)
            log_t = _safe_log(_ratio(p_auy, p_ay[:, None, :]))  # (A, U, Y)
            cross = _wlog(m.w[:, :, None, :], log_t[None])  # (S, A, U)
            target = _safe_log(p_ay.sum(axis=1))[None, :, None] + cross - lin
        q = mirror_rows(state.q, target.reshape(self.shape), eta, allowed)
        return JointState(q, self.reset_decoder(q))

    def allowed(self, mask_d=False, mask_c=False):
        if mask_d:
            raise ValueError("the joint parameterisation cannot pin the distortion; use labels")
        ok = np.ones((self.model.n_s, self.model.n_actions, self.n_aux), dtype=bool)
        if mask_c:
            ok &= (self.model.cost <= self.model.cost.min() + 1e-12)[None, :, None]
        return ok.reshape(self.shape)

    def kernel(self, state):
        return state.q.copy(), state.g.copy()


@dataclass
class IndependentState:
    pa: np.ndarray  # (A,)
    qa: np.ndarray  # (S, L), normalised within each action block


class IndependentActions(_Base):
    """``I(S;U|Y,A)`` with ``A`` drawn independently of the source (actions before the index).

    The Lagrangian is linear in ``P_A`` and separates across action blocks,
    so descent keeps ``P_A`` uniform and improves every block with equal
    weight; :meth:`select` then moves all mass to the best action.
    """

    def __init__(self, model: SourceModel, labels: Labels | None = None):
        self.model = model
        self.inner = LabelDecoder(model, labels)
        self.labels = self.inner.labels
        self.onehot = self.inner.onehot

    @property
    def shape(self):
        return self.inner.shape

    def _block_normalise(self, q, allowed):
        sums = q @ self.onehot
        per = sums[:, self.labels.action]
        cnt = (allowed @ self.onehot)[:, self.labels.action]
        fallback = allowed / np.maximum(cnt, 1)
        return np.where(per > 0, q / np.where(per > 0, per, 1.0), fallback)

    def _action_ok(self, allowed):
        live = self.model.ps > 0
        return (allowed[live] @ self.onehot > 0).all(axis=0)

    def spread(self, allowed):
        """Uniform ``P_A`` over the actions usable under ``allowed``."""
        ok = self._action_ok(allowed).astype(float)
        return ok / ok.sum()

    def initial(self, allowed, rng=None):
        qa = np.ones(self.shape) if rng is None else rng.random(self.shape) + 0.05
        qa = self._block_normalise(np.where(allowed, qa, 0.0), allowed)
        return IndependentState(self.spread(allowed), qa)

    def joint_kernel(self, state):
        return state.pa[self.labels.action][None, :] * state.qa

    def per_action(self, qa):
        """Per-action ``(I(S;U|Y,A=a), D_a)`` for the conditional kernels."""
        m = self.model
        pj = m.ps[:, None, None] * qa[:, :, None] * self.inner.W
        p_ly = pj.sum(axis=0)
        p_ay = self.onehot.T @ p_ly
        rates, dists = [], []
        for a in range(m.n_actions):
            sel = self.labels.action == a
            q_sel = qa[:, sel]
            h_uy = _h(p_ly[sel])
            h_y = _h(p_ay[a])
            rates.append(max(h_uy - h_y - _cond_h(m.ps, q_sel), 0.0))
            dists.append(float(m.ps @ (q_sel * self.inner.dbar[:, sel]).sum(axis=1)))
        return np.array(rates), np.array(dists)

    def measure(self, state):
        rates, dists = self.per_action(state.qa)
        return float(state.pa @ rates), float(state.pa @ dists), float(state.pa @ self.model.cost)

    def select(self, state, lam_d, lam_c):
        """Pure-action state on the action with the least per-action Lagrangian, and that value."""
        rates, dists = self.per_action(state.qa)
        score = np.where(state.pa > 0, rates + lam_d * dists + lam_c * self.model.cost, np.inf)
        a = int(np.argmin(score))
        pa = np.zeros_like(state.pa)
        pa[a] = 1.0
        return IndependentState(pa, state.qa), float(score[a])

    def companions(self, state):
        """Pure-action states for the other usable actions, reusing the solved blocks."""
        ok = self._action_ok(state.qa > 0)
        out = []
        for a in np.flatnonzero(ok):
            if state.pa[a] < 1.0:
                pa = np.zeros_like(state.pa)
                pa[a] = 1.0
                out.append(IndependentState(pa, state.qa))
        return out

    def step(self, state, lam_d, lam_c, eta, allowed):
        m = self.model
        inner = self.inner
        lin = LN2 * lam_d * inner.dbar
        p_ly = (m.ps[:, None, None] * state.qa[:, :, None] * inner.W).sum(axis=0)
        p_ay = self.onehot.T @ p_ly
        log_t = _safe_log(_ratio(p_ly, p_ay[self.labels.action]))
        target = _wlog(inner.W, log_t[None]) - lin
        logq = _safe_log(state.qa)
        live = allowed & np.isfinite(target)
        with np.errstate(invalid="ignore"):
            mixed = np.where(live, logq + eta * (target - logq), -np.inf)
        mixed = np.where(live & ~np.isfinite(mixed), target, mixed)
        # normalise within action blocks
        qa = np.zeros_like(state.qa)
        for a in range(m.n_actions):
            sel = self.labels.action == a
            blk = mixed[:, sel]
            top = blk.max(axis=1, keepdims=True)
            top = np.where(np.isfinite(top), top, 0.0)
            qa[:, sel] = np.exp(blk - top)
        qa = self._block_normalise(qa, allowed)
        qa = np.where(allowed, np.maximum(qa, FLOOR), 0.0)
        qa = self._block_normalise(qa, allowed)
        return IndependentState(state.pa, qa)

    def allowed(self, mask_d=False, mask_c=False):
        return self.inner.allowed(mask_d, mask_c)

    def kernel(self, state):
        return self.inner.kernel(self.joint_kernel(state))


class LosslessDecoder(_Base):
    """``I(S;A) + H(S|Y,A)`` over ``P_{A|S}``: decoder actions, near-lossless reconstruction."""

    has_distortion = False

    def __init__(self, model: SourceModel):
        self.model = model

    @property
    def shape(self):
        return (self.model.n_s, self.model.n_actions)

    def initial(self, allowed, rng=None):
        q = np.ones(self.shape) if rng is None else rng.dirichlet(np.ones(self.shape[1]), self.shape[0])
        return _normalise(np.where(allowed, q, 0.0), allowed)

    def measure(self, q):
        m = self.model
        pj = m.ps[:, None, None] * q[:, :, None] * m.w
        p_ay = pj.sum(axis=0)
        rate = _h(p_ay.sum(axis=1)) - _cond_h(m.ps, q) + _h(pj) - _h(p_ay)
        return max(rate, 0.0), 0.0, float(m.ps @ (q @ m.cost))

    def log_target(self, q, lam_d, lam_c):
        m = self.model
        pj = m.ps[:, None, None] * q[:, :, None] * m.w
        p_ay = pj.sum(axis=0)
        log_post = _safe_log(_ratio(pj, p_ay[None]))
        return (_safe_log(p_ay.sum(axis=1))[None, :] + _wlog(m.w, log_post)
                - LN2 * lam_c * m.cost[None, :])

    def step(self, q, lam_d, lam_c, eta, allowed):
        return mirror_rows(q, self.log_target(q, lam_d, lam_c), eta, allowed)

    def allowed(self, mask_d=False, mask_c=False):
        ok = np.ones(self.shape, dtype=bool)
        if mask_c:
            ok &= (self.model.cost <= self.model.cost.min() + 1e-12)[None, :]
        return ok

    def kernel(self, q):
        return q.copy(), None


class EncoderLossless(_Base):
    """``H(X) - I(Y;A,X)`` over ``P_{A|X}``: encoder actions, near-lossless reconstruction.

    The reported rate may be negative before clipping; callers apply ``max(., 0)``.
    """

    has_distortion = False

    def __init__(self, model: SourceModel):
        self.model = model
        self.h_s = _h(model.ps)
        self.h_y_given_sa = -_wlog(model.w, _safe_log(model.w)) / LN2  # (S, A), bits

    @property
    def shape(self):
        return (self.model.n_s, self.model.n_actions)

    initial = LosslessDecoder.initial

    def objective(self, q) -> float:
        m = self.model
        p_y = np.einsum("s,sa,say->y", m.ps, q, m.w)
        return self.h_s - _h(p_y) + float(m.ps @ (q * self.h_y_given_sa).sum(axis=1))

    def measure(self, q):
        return self.objective(q), 0.0, float(self.model.ps @ (q @ self.model.cost))

    def log_target(self, q, lam_d, lam_c):
        m = self.model
        p_y = np.einsum("s,sa,say->y", m.ps, q, m.w)
        div = _wlog(m.w, _safe_log(m.w) - _safe_log(p_y)[None, None, :])
        return _safe_log(q) + div - LN2 * lam_c * m.cost[None, :]

    def step(self, q, lam_d, lam_c, eta, allowed):
        return mirror_rows(q, self.log_target(q, lam_d, lam_c), eta, allowed)

    allowed = LosslessDecoder.allowed
    kernel = LosslessDecoder.kernel


class EncoderOpen(LabelDecoder):
    """``I(X;A) + I(X;U|A,Y) - I(Y;A)`` over label kernels: encoder actions, reconstruction from ``(U, A, Y)``.

    Merging labels that share an action and a rule never hurts, so the label
    alphabet is complete. The ``-I(Y;A)`` term makes the problem non-convex;
    its gradient is added to the Blahut-Arimoto target and steps backtrack.
    The rate is reported unclipped.
    """

    convex = False

    def __init__(self, model: SourceModel, labels: Labels | None = None):
        super().__init__(model, labels)

    def raw_rate(self, q) -> float:
        p_ay = self._marginals(q)[1]
        i_ya = _h(p_ay.sum(axis=1)) + _h(p_ay.sum(axis=0)) - _h(p_ay)
        return super().raw_rate(q) - i_ya

    def measure(self, q):
        _, dist, cost = super().measure(q)
        return self.raw_rate(q), dist, cost

    def log_target(self, q, lam_d, lam_c):
        p_ay = self._marginals(q)[1]
        p_y = p_ay.sum(axis=0)
        gain = _safe_log(_ratio(p_ay, p_ay.sum(axis=1, keepdims=True))) - _safe_log(p_y)[None, :]
        gain = np.where(p_ay > 0, gain, 0.0)
        return super().log_target(q, lam_d, lam_c) + _wlog(self.W, gain[self.labels.action][None])

    def warm(self, q, allowed):
        q = np.where(allowed, 0.9 * q + 0.1 / q.shape[1], 0.0)
        return q / q.sum(axis=1, keepdims=True)


@dataclass
class ClosedState:
    pa: np.ndarray  # (S, A)
    k: np.ndarray  # (S, A, Y, Xh)


class EncoderClosed(_Base):
    """``I(X;A) + I(Xh;X|A,Y) - I(Y;A)`` over ``P_{A|X}`` and ``P_{Xh|X,A,Y}``.

    The reproduction kernel gets exact Blahut-Arimoto steps; the action kernel
    gets an exponentiated-gradient step whose unit-step form is
    ``P(a|x) ~ exp(sum_y w log P(a|y) - sum_y w KL(k || P(xh|a,y)) - lin)``.
    The rate is reported unclipped.
    """

    convex = False

    def __init__(self, model: SourceModel, rho):
        self.model = model
        self.rho = np.asarray(rho, float)
        self.h_s = _h(model.ps)

    @property
    def shape(self):
        m = self.model
        return (m.n_s, m.n_actions, m.n_y, self.rho.shape[1])

    def _joint(self, state):
        m = self.model
        return m.ps[:, None, None, None] * state.pa[:, :, None, None] * m.w[..., None] * state.k

    def measure(self, state):
        m = self.model
        j = self._joint(state)
        p_say = j.sum(axis=3)
        p_sa = m.ps[:, None] * state.pa
        rate = (_h(j.sum(axis=0)) - _h(j) + _h(p_say) + self.h_s - _h(p_sa)
                - _h(p_say.sum(axis=(0, 1))))
        dist = float(np.einsum("sayh,sh->", j, self.rho))
        cost = float(np.sum(p_sa * m.cost[None, :]))
        return rate, dist, cost

    def step(self, state, lam_d, lam_c, eta, allowed):
        m = self.model
        ok_a, ok_k = allowed
        n_s, n_a, n_y, n_h = self.shape
        # reproduction kernel: one exact Blahut-Arimoto step
        j = self._joint(state)
        p_hay = j.sum(axis=0)
        post = _ratio(p_hay, p_hay.sum(axis=2, keepdims=True))  # P(xh | a, y)
        logk = (_safe_log(post)[None] - LN2 * lam_d * self.rho[:, None, None, :]).reshape(-1, n_h)
        mask = np.broadcast_to(ok_k[:, None, None, :], self.shape).reshape(-1, n_h)
        k = mirror_rows(state.k.reshape(-1, n_h), logk, 1.0, mask).reshape(self.shape)
        # action kernel: exponentiated gradient
        j = self._joint(ClosedState(state.pa, k))
        p_hay = j.sum(axis=0)
        p_ay = p_hay.sum(axis=2)
        p_h_ay = _ratio(p_hay, p_ay[:, :, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            kl = np.where(k > 0, k * (np.log(k) - np.log(p_h_ay)[None]), 0.0).sum(axis=3)
        post_a = _safe_log(_ratio(p_ay, p_ay.sum(axis=0, keepdims=True)))  # log P(a | y)
        dbar = np.einsum("say,sayh,sh->sa", m.w, k, self.rho)
        target = (_wlog(m.w, post_a[None]) - _wlog(m.w, kl)
                  - LN2 * (lam_d * dbar + lam_c * m.cost[None, :]))
        pa = mirror_rows(state.pa, target, eta, ok_a)
        return ClosedState(pa, k)

    def allowed(self, mask_d=False, mask_c=False):
        m = self.model
        ok_a = np.ones((m.n_s, m.n_actions), dtype=bool)
        if mask_c:
            ok_a &= (m.cost <= m.cost.min() + 1e-12)[None, :]
        ok_k = np.ones(self.rho.shape, dtype=bool)
        if mask_d:
            ok_k = self.rho <= self.rho.min(axis=1, keepdims=True) + 1e-12
        return ok_a, ok_k

    def initial(self, allowed, rng=None):
        ok_a, ok_k = allowed
        if rng is None:
            pa, k = np.ones(ok_a.shape), np.ones(self.shape)
        else:
            pa = rng.dirichlet(np.ones(ok_a.shape[1]), ok_a.shape[0])
            k = rng.dirichlet(np.full(self.shape[3], 0.5), self.shape[:3])
        return self.warm(ClosedState(pa, k), allowed, keep=1.0)

    def warm(self, state, allowed, keep=0.9):
        ok_a, ok_k = allowed
        pa = np.where(ok_a, keep * state.pa + (1 - keep) / ok_a.shape[1], 0.0)
        pa = _normalise(pa, ok_a)
        mask = np.broadcast_to(ok_k[:, None, None, :], self.shape)
        k = np.where(mask, keep * state.k + (1 - keep) / self.shape[3], 0.0).reshape(-1, self.shape[3])
        k = _normalise(k, mask.reshape(-1, self.shape[3])).reshape(self.shape)
        return ClosedState(pa, k)

    def from_labels(self, labels: Labels, q) -> ClosedState:
        """Closed-switch state induced by a label kernel (reproduce ``rule(y)``)."""
        n_s, n_a, n_y, n_h = self.shape
        pa = q @ np.eye(n_a)[labels.action]
        k = np.zeros(self.shape)
        for y in range(n_y):
            sel = np.zeros((len(labels), n_a * n_h))
            sel[np.arange(len(labels)), labels.action * n_h + labels.rule[:, y]] = 1.0
            k[:, :, y, :] = (q @ sel).reshape(n_s, n_a, n_h)
        k = np.where(pa[:, :, None, None] > 0, k / np.where(pa > 0, pa, 1.0)[:, :, None, None],
                     1.0 / n_h)
        return ClosedState(pa, k)

    def kernel(self, state):
        return state.pa.copy(), state.k.copy()
