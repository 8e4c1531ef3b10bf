"""Single-plant unit commitment over a discretized power grid.

The schedule that maximizes

    sum_t  P_t * (w_t - nu - f_t/eta - e_t*epsilon/eta) * dt
         - committed_t * phi * dt  -  started_t * sigma

subject to ramp limits, the maximum export limit, start-indicator logic,
and the stable-export-limit rule is found exactly (over the discrete
level grid) by dynamic programming on a time-expanded state graph.

States per period are power levels tagged with one of four modes:
off, stable (within [sel, mel]), ramp-up transit, or ramp-down transit.
Transit levels below SEL sit on the full-rate ladders k*ramp*dt and may
only be crossed monotonically: a start climbs from zero to the stable
band without pausing or turning back, a stop descends from the stable
band to zero. Dwelling strictly between zero and SEL is infeasible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import (
    DataError,
    MarketSeries,
    ParameterError,
    PlantDynamics,
    PlantParameters,
    Schedule,
    SolverError,
)

# MW slack used when comparing power levels and ramp limits
_TOL = 1e-9

# state modes
_OFF, _RUN, _UP, _DOWN = 0, 1, 2, 3


@dataclass(frozen=True)
class SolverOptions:
    """Discretization and optimality settings for the inner solver."""

    power_levels: int = 21   # stable levels per period spanning [sel, mel]
    tolerance: float = 1e-9  # relative profit slack accepted vs the grid optimum

    def __post_init__(self):
        if self.power_levels < 2:
            raise ParameterError("power_levels must be at least 2")
        if self.tolerance < 0:
            raise ParameterError("tolerance must be non-negative")


@dataclass(frozen=True, eq=False)
class UcInstance:
    """One plant, one horizon, one candidate parameter set."""

    params: PlantParameters
    dynamics: PlantDynamics
    market: MarketSeries
    initial_committed: bool = False
    initial_power: float = 0.0  # MW immediately before the first period


def _check_instance(instance: UcInstance) -> None:
    T = instance.market.horizon
    if T == 0:
        raise SolverError("empty horizon")
    if len(instance.dynamics.mel) != T:
        raise SolverError("dynamics and market series length mismatch")
    if instance.initial_committed:
        if instance.initial_power < -_TOL:
            raise SolverError("initial power must be non-negative")
        if instance.initial_power > instance.dynamics.mel[0] + _TOL:
            raise SolverError("initial power exceeds the first-period export limit")
    elif instance.initial_power != 0.0:
        raise SolverError("initial power must be zero while not committed")
    if instance.params.eta <= 0:
        raise ParameterError("eta must be positive")


def marginal_value(params: PlantParameters, market: MarketSeries, t: int) -> float:
    """Clean-spark-spread margin of one MWh produced in period t [pounds/MWh]."""
    if params.eta <= 0:
        raise ParameterError("eta must be positive")
    if not 0 <= t < market.horizon:
        raise ParameterError(f"period index {t} outside horizon")
    return float(
        market.w[t]
        - params.nu
        - market.f[t] / params.eta
        - market.e[t] * params.epsilon / params.eta
    )


def marginal_values(params: PlantParameters, market: MarketSeries) -> np.ndarray:
    """Vectorized marginal_value over the whole horizon."""
    if params.eta <= 0:
        raise ParameterError("eta must be positive")
    return market.w - params.nu - market.f / params.eta - market.e * params.epsilon / params.eta


def _period_levels(mel: float, sel: float, up_step: float, dn_step: float,
                   power_levels: int, hold_level: float | None) -> tuple[np.ndarray, np.ndarray]:
    """Level/mode arrays for one period: off, transit rungs, stable band.

    Transit rungs below SEL are the union of the full-rate start ladder
    (multiples of ramp_up*dt) and stop ladder (multiples of ramp_dn*dt);
    each rung exists in both climb and descend modes, since either
    trajectory may pass through any grid value below SEL. When the plant
    enters the horizon committed at an off-grid level, that level (clamped
    into the stable band) is added so a hold-near-initial path exists.
    """
    levels = [0.0]
    modes = [_OFF]
    if sel > _TOL:
        transit = set()
        for step in (up_step, dn_step):
            k = 1
            while k * step < sel - _TOL:
                transit.add(k * step)
                k += 1
        for value in sorted(transit):
            levels.extend([value, value])
            modes.extend([_UP, _DOWN])
    if mel - sel > _TOL:
        stable = np.linspace(sel, mel, power_levels)
    else:
        stable = np.array([sel])
    if hold_level is not None:
        held = min(max(hold_level, sel), mel)
        if not np.any(np.abs(stable - held) <= _TOL):
            stable = np.append(stable, held)
    levels.extend(stable.tolist())
    modes.extend([_RUN] * len(stable))
    return np.array(levels), np.array(modes, dtype=np.int8)


def _transition_mask(levels_a, modes_a, levels_b, modes_b, up_step, dn_step) -> np.ndarray:
    """Feasible arcs between consecutive periods (rows: from, cols: to)."""
    delta = levels_b[None, :] - levels_a[:, None]
    ramp_ok = (delta <= up_step + _TOL) & (delta >= -(dn_step + _TOL))
    a = modes_a[:, None]
    b = modes_b[None, :]
    rising = delta > _TOL
    falling = delta < -_TOL
    at_zero = levels_b[None, :] <= _TOL
    ok = (a == _OFF) & ((b == _OFF) | (b == _UP) | (b == _RUN))
    ok |= (a == _UP) & (((b == _UP) & rising) | ((b == _RUN) & ~falling))
    ok |= (a == _DOWN) & (((b == _DOWN) & falling) | (b == _OFF) | ((b == _RUN) & at_zero & falling))
    ok |= (a == _RUN) & ((b == _RUN) | (b == _OFF) | ((b == _DOWN) & falling))
    return ok & ramp_ok


class UcGraph:
    """Time-expanded state graph for one (dynamics, grid, options) triple.

    Building the graph is independent of the candidate cost parameters, so
    one graph serves every parameter set evaluated against the same context.
    """

    def __init__(self, dynamics: PlantDynamics, dt: float, opts: SolverOptions,
                 hold_level: float | None = None):
        self.dt = dt
        self.opts = opts
        up_step = dynamics.ramp_up * dt
        dn_step = dynamics.ramp_dn * dt
        self.up_step = up_step
        self.dn_step = dn_step
        T = len(dynamics.mel)
        per = [
            _period_levels(dynamics.mel[t], dynamics.sel[t], up_step, dn_step,
                           opts.power_levels, hold_level)
            for t in range(T)
        ]
        self.levels = [p[0] for p in per]
        self.modes = [p[1] for p in per]
        self.committed = [(m != _OFF) for m in self.modes]
        self.committed_f = [c.astype(float) for c in self.committed]
        # arc_base holds 0 on feasible arcs, -inf elsewhere; start_f marks
        # arcs that switch the plant on (start-up cost applies at the to-period)
        self.arc_base = []
        self.start_f = []
        for t in range(T - 1):
            mask = _transition_mask(self.levels[t], self.modes[t],
                                    self.levels[t + 1], self.modes[t + 1],
                                    up_step, dn_step)
            self.arc_base.append(np.where(mask, 0.0, -np.inf))
            start = (self.modes[t] == _OFF)[:, None] & self.committed[t + 1][None, :]
            self.start_f.append(start.astype(float))

    def source_arcs(self, initial_committed: bool, initial_power: float):
        """Feasible first-period states and their start flags."""
        levels0, modes0 = self.levels[0], self.modes[0]
        delta = levels0 - initial_power
        ramp_ok = (delta <= self.up_step + _TOL) & (delta >= -(self.dn_step + _TOL))
        if not initial_committed:
            feas = ramp_ok & (modes0 != _DOWN)
            starts = self.committed[0].copy()
        else:
            feas = ramp_ok & (
                (modes0 == _RUN)
                | (modes0 == _OFF)
                | ((modes0 == _UP) & (delta > _TOL))
                | ((modes0 == _DOWN) & (delta < -_TOL))
            )
            starts = np.zeros(len(levels0), dtype=bool)
        return feas, starts


def _lex_best(cand, aux1, aux2):
    """Column-wise argmax of (cand, aux1, aux2) triples in lexicographic order.

    Returns (best values of each tier, parent row index per column). Ties on
    earlier tiers are broken by later tiers, then by lowest row index.
    """
    best1 = cand.max(axis=0)
    m1 = cand == best1[None, :]
    a1 = np.where(m1, aux1, -np.inf)
    best2 = a1.max(axis=0)
    m2 = m1 & (a1 == best2[None, :])
    a2 = np.where(m2, aux2, -np.inf)
    best3 = a2.max(axis=0)
    m3 = m2 & (a2 == best3[None, :])
    parent = m3.argmax(axis=0)
    return best1, best2, best3, parent


def solve_uc(instance: UcInstance, opts: SolverOptions | None = None,
             graph: UcGraph | None = None) -> Schedule:
    """Profit-maximal feasible schedule over the discretized power grid.

    Ties in profit prefer fewer committed periods, then lower total energy,
    so the result is deterministic. Pass a precompiled ``graph`` to reuse
    the state graph across many parameter sets on the same context.
    """
    opts = opts or SolverOptions()
    _check_instance(instance)
    if graph is None:
        graph = UcGraph(instance.dynamics, instance.market.dt, opts,
                        hold_level=instance.initial_power if instance.initial_committed else None)
    T = instance.market.horizon
    dt = instance.market.dt
    p = instance.params
    mv = marginal_values(p, instance.market)

    # arrival rewards per state: energy margin minus fixed cost while committed
    feas0, starts0 = graph.source_arcs(instance.initial_committed, instance.initial_power)
    if not feas0.any():
        raise SolverError("no feasible first-period state from the initial condition")

    com0 = graph.committed_f[0]
    reward0 = graph.levels[0] * (mv[0] * dt) - com0 * (p.phi * dt)
    profit = np.where(feas0, reward0 - starts0 * p.sigma, -np.inf)
    ncom = np.where(feas0, -com0, -np.inf)   # maximize -committed count
    nenergy = np.where(feas0, -graph.levels[0] * dt, -np.inf)  # then -energy
    parents = []

    for t in range(1, T):
        arc = graph.arc_base[t - 1]
        if p.sigma != 0.0:
            arc = arc - graph.start_f[t - 1] * p.sigma
        cand = profit[:, None] + arc
        best1, best2, best3, parent = _lex_best(cand, ncom[:, None], nenergy[:, None])
        com_t = graph.committed_f[t]
        reward_t = graph.levels[t] * (mv[t] * dt) - com_t * (p.phi * dt)
        profit = best1 + reward_t
        ncom = best2 - com_t
        nenergy = best3 - graph.levels[t] * dt
        parents.append(parent)

    # terminal selection with the same tie-breaking
    order = np.lexsort((np.arange(len(profit)), -nenergy, -ncom, -profit))
    last = int(order[0])
    if not np.isfinite(profit[last]):
        raise SolverError("no feasible schedule exists for this instance")

    idx = np.empty(T, dtype=int)
    idx[T - 1] = last
    for t in range(T - 1, 0, -1):
        idx[t - 1] = parents[t - 1][idx[t]]

    power = np.array([graph.levels[t][idx[t]] for t in range(T)])
    committed = np.array([graph.committed[t][idx[t]] for t in range(T)], dtype=np.int8)
    prev = np.concatenate(([1 if instance.initial_committed else 0], committed[:-1]))
    started = ((committed == 1) & (prev == 0)).astype(np.int8)
    schedule = Schedule(power=power, committed=committed, started=started, profit=0.0)
    exact = schedule_profit(schedule, instance)
    if abs(exact - profit[last]) > 1e-6 * (1.0 + abs(exact)):
        raise SolverError("internal profit accounting mismatch")
    return Schedule(power=power, committed=committed, started=started, profit=exact)


def schedule_profit(s: Schedule, instance: UcInstance) -> float:
    """Objective value of a schedule: margin minus fixed and start-up costs."""
    T = instance.market.horizon
    if s.horizon != T:
        raise DataError("schedule and instance horizon mismatch")
    p = instance.params
    dt = instance.market.dt
    mv = marginal_values(p, instance.market)
    return float(
        np.dot(s.power, mv) * dt
        - int(s.committed.sum()) * p.phi * dt
        - int(s.started.sum()) * p.sigma
    )


@dataclass(frozen=True)
class Violation:
    """One violated constraint: which rule, where, and by how much [MW]."""

    kind: str
    period: int
    magnitude: float


def validate_schedule(s: Schedule, instance: UcInstance) -> list[Violation]:
    """All constraint violations of a schedule; empty when feasible.

    Checks export-limit coupling, ramp bounds, start-indicator logic, and
    the stable-export-limit rule (output strictly between zero and SEL only
    on a monotone start or stop trajectory).
    """
    T = instance.market.horizon
    if s.horizon != T:
        raise DataError("schedule and instance horizon mismatch")
    dyn = instance.dynamics
    dt = instance.market.dt
    up_step = dyn.ramp_up * dt
    dn_step = dyn.ramp_dn * dt
    power = s.power
    committed = s.committed
    started = s.started
    out: list[Violation] = []

    for t in range(T):
        cap = dyn.mel[t] * committed[t]
        if power[t] > cap + _TOL:
            out.append(Violation("mel", t, float(power[t] - cap)))
        if power[t] < -_TOL:
            out.append(Violation("mel", t, float(-power[t])))
        if committed[t] and power[t] <= _TOL and dyn.sel[t] > _TOL:
            out.append(Violation("sel", t, float(dyn.sel[t])))

    prev_c = 1 if instance.initial_committed else 0
    for t in range(T):
        if started[t] and not committed[t]:
            out.append(Violation("start", t, 1.0))
        if committed[t] and not prev_c and not started[t]:
            out.append(Violation("start", t, 1.0))
        prev_c = committed[t]

    prev_p = instance.initial_power
    for t in range(T):
        diff = power[t] - prev_p
        if diff > up_step + _TOL:
            out.append(Violation("ramp", t, float(diff - up_step)))
        if -diff > dn_step + _TOL:
            out.append(Violation("ramp", t, float(-diff - dn_step)))
        prev_p = power[t]

    below = (committed == 1) & (power > _TOL) & (power < dyn.sel - _TOL)
    t = 0
    while t < T:
        if not below[t]:
            t += 1
            continue
        a = t
        while t + 1 < T and below[t + 1]:
            t += 1
        b = t
        run = power[a:b + 1]
        steps = np.diff(run)
        increasing = bool(np.all(steps > _TOL))
        decreasing = bool(np.all(steps < -_TOL))
        if b > a and not (increasing or decreasing):
            out.append(Violation("sel", a, float(dyn.sel[a] - power[a])))
            t += 1
            continue
        if a == 0:
            entry_up = (not instance.initial_committed) or (instance.initial_power < run[0] - _TOL)
            entry_dn = instance.initial_committed and instance.initial_power > run[0] + _TOL
        else:
            entry_up = power[a - 1] <= _TOL
            entry_dn = power[a - 1] >= dyn.sel[a - 1] - _TOL and power[a - 1] > run[0] + _TOL
        if b == T - 1:
            exit_up = exit_dn = True
        else:
            exit_up = power[b + 1] >= dyn.sel[b + 1] - _TOL and power[b + 1] >= run[-1] - _TOL
            exit_dn = power[b + 1] <= _TOL
        ok_up = entry_up and exit_up and (increasing or b == a)
        ok_dn = entry_dn and exit_dn and (decreasing or b == a)
        if not (ok_up or ok_dn):
            out.append(Violation("sel", a, float(dyn.sel[a] - power[a])))
        t += 1
    return out


def _period_options(graph: UcGraph, t: int) -> list[tuple[float, int]]:
    """Distinct (power, committed) choices for one period, in a fixed order."""
    pairs = {(0.0, 0)}
    for lvl, com in zip(graph.levels[t], graph.committed[t]):
        if com:
            pairs.add((float(lvl), 1))
    return sorted(pairs)


def enumerate_uc_oracle(instance: UcInstance, opts: SolverOptions | None = None) -> Schedule:
    """Exhaustive reference optimum for small instances.

    Enumerates every feasible sequence of (power, committed) choices over
    the same level grid the solver uses, scoring with schedule_profit and
    checking feasibility with rules written against the raw series (not the
    solver's transition tables). Intended for tests; refuses horizons above
    10 periods or more than 6 stable power levels.
    """
    opts = opts or SolverOptions()
    _check_instance(instance)
    T = instance.market.horizon
    if T > 10 or opts.power_levels > 6:
        raise SolverError("instance too large to enumerate")
    dyn = instance.dynamics
    p = instance.params
    dt = instance.market.dt
    mv = marginal_values(p, instance.market)
    graph = UcGraph(dyn, dt, opts,
                    hold_level=instance.initial_power if instance.initial_committed else None)
    options = [_period_options(graph, t) for t in range(T)]
    up_step = dyn.ramp_up * dt
    dn_step = dyn.ramp_dn * dt
    sel = dyn.sel

    best: tuple[float, float, float] | None = None
    best_choice: list[tuple[float, int]] | None = None
    choice: list[tuple[float, int]] = []

    init_c = 1 if instance.initial_committed else 0
    init_p = instance.initial_power

    def step_ok(t, prev_p, prev_c, direction, pw, com):
        delta = pw - prev_p
        if delta > up_step + _TOL or -delta > dn_step + _TOL:
            return None
        below = com == 1 and _TOL < pw < sel[t] - _TOL
        if com == 1 and pw <= _TOL and sel[t] > _TOL:
            return None
        if below:
            if prev_c == 0:
                return 1  # start climb from off
            if direction == 1:
                return 1 if delta > _TOL else None
            if direction == -1:
                return -1 if delta < -_TOL else None
            # previous period was stable (or the pre-horizon state)
            if t == 0:
                if delta > _TOL:
                    return 1
                if delta < -_TOL:
                    return -1
                return None
            return -1 if delta < -_TOL else None
        # at or above SEL, or off
        if direction == 1 and (com == 0 or delta < -_TOL):
            return None  # a climb may only end in the stable band
        if direction == -1 and pw > _TOL:
            return None  # a descent may only end at zero
        return 0

    def recurse(t, prev_p, prev_c, direction, profit, ncom, energy):
        nonlocal best, best_choice
        if t == T:
            key = (profit, -float(ncom), -energy)
            if best is None or key > best:
                best = key
                best_choice = choice.copy()
            return
        for pw, com in options[t]:
            nd = step_ok(t, prev_p, prev_c, direction, pw, com)
            if nd is None:
                continue
            start = 1 if (com == 1 and prev_c == 0) else 0
            gain = pw * mv[t] * dt - com * p.phi * dt - start * p.sigma
            choice.append((pw, com))
            recurse(t + 1, pw, com, nd, profit + gain, ncom + com, energy + pw * dt)
            choice.pop()

    init_dir = 0
    recurse(0, init_p, init_c, init_dir, 0.0, 0, 0.0)
    if best_choice is None:
        raise SolverError("no feasible schedule exists for this instance")

    power = np.array([c[0] for c in best_choice])
    committed = np.array([c[1] for c in best_choice], dtype=np.int8)
    prev = np.concatenate(([init_c], committed[:-1]))
    started = ((committed == 1) & (prev == 0)).astype(np.int8)
    schedule = Schedule(power=power, committed=committed, started=started, profit=0.0)
    violations = validate_schedule(schedule, instance)
    if violations:
        raise SolverError(f"oracle produced an infeasible schedule: {violations[0]}")
    return Schedule(power=power, committed=committed, started=started,
                    profit=schedule_profit(schedule, instance))
