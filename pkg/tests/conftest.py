"""Shared builders: toy instances, randomized generators, recovery fixtures."""
import numpy as np
import pytest

from plantfit import (
    FitContext,
    MarketSeries,
    PlantDynamics,
    PlantParameters,
    SolverOptions,
    UcInstance,
    make_grid,
    synthesize,
)

EPSILON = 0.2
DAY = 48  # half-hour settlement periods per day

# generator parameters for the closed-loop recovery fixtures
TRUE_PARAMS = PlantParameters(eta=0.5, sigma=15000.0, phi=1000.0, nu=2.0,
                              epsilon=EPSILON)


def flat_dynamics(T, mel=500.0, sel=200.0, ramp_up=300.0, ramp_dn=300.0):
    return PlantDynamics(mel=np.full(T, float(mel)), sel=np.full(T, float(sel)),
                         ramp_up=ramp_up, ramp_dn=ramp_dn)


def toy_market(w, dt=1.0, fuel=20.0, carbon=0.0, start="2018-01-01T00:00:00Z"):
    w = np.asarray(w, dtype=float)
    T = len(w)
    grid = make_grid(start, T, dt)
    return MarketSeries(grid=grid, w=w, f=np.full(T, fuel),
                        e=np.full(T, carbon), dt=dt)


def worked_example():
    """The three-period start-cost instance with known optimum 3000."""
    market = toy_market([60.0, 60.0, 30.0], dt=1.0, fuel=20.0)
    dyn = flat_dynamics(3, mel=100.0, sel=100.0, ramp_up=200.0, ramp_dn=200.0)
    params = PlantParameters(eta=0.5, sigma=1000.0, phi=0.0, nu=0.0, epsilon=0.0)
    return UcInstance(params=params, dynamics=dyn, market=market), SolverOptions(power_levels=3)


def random_small_instance(rng):
    """Instances tiny enough for the enumeration oracle."""
    T = int(rng.integers(3, 9))
    if T >= 7:
        levels = int(rng.integers(2, 4))
        tight = True
    elif T >= 5:
        levels = int(rng.integers(2, 5))
        tight = bool(rng.random() < 0.7)
    else:
        levels = int(rng.integers(2, 6))
        tight = bool(rng.random() < 0.4)
    dt = float(rng.choice([0.5, 1.0]))
    mel_val = float(rng.uniform(50, 150))
    mel = np.full(T, mel_val)
    if rng.random() < 0.3:
        mel[int(rng.integers(0, T)):] *= 0.8
    if rng.random() < 0.25:
        sel = np.zeros(T)
    else:
        sel = np.full(T, float(rng.uniform(0.2, 0.7)) * mel.min())
    if tight:
        r_up = float(rng.uniform(0.3, 0.9)) * mel_val / dt
        r_dn = float(rng.uniform(0.3, 0.9)) * mel_val / dt
    else:
        r_up = float(rng.uniform(1.2, 3.0)) * mel_val / dt
        r_dn = float(rng.uniform(1.2, 3.0)) * mel_val / dt
    if sel.max() > 0:  # keep transit ladders to a few rungs
        r_up = max(r_up, sel.max() / (3 * dt) * 1.05)
        r_dn = max(r_dn, sel.max() / (3 * dt) * 1.05)
    dyn = PlantDynamics(mel=mel, sel=sel, ramp_up=r_up, ramp_dn=r_dn)
    market = MarketSeries(
        grid=make_grid("2018-01-01T00:00:00Z", T, dt),
        w=rng.uniform(10, 90, T), f=rng.uniform(10, 30, T),
        e=rng.uniform(0, 30, T), dt=dt,
    )
    params = PlantParameters(
        eta=float(rng.uniform(0.25, 0.65)),
        sigma=float(rng.uniform(0, 40)) * mel_val,
        phi=float(rng.uniform(0, 8)) * mel_val / 100,
        nu=float(rng.uniform(0, 10)),
        epsilon=float(rng.uniform(0, 0.5)),
    )
    committed = bool(rng.random() < 0.5)
    p0 = float(rng.uniform(0, mel[0])) if committed else 0.0
    instance = UcInstance(params=params, dynamics=dyn, market=market,
                          initial_committed=committed, initial_power=p0)
    return instance, SolverOptions(power_levels=levels)


def random_dispatch_instance(rng, T=336):
    """Week-scale instances for feasibility and monotonicity sweeps."""
    dt = 0.5
    mel_val = float(rng.uniform(300, 600))
    mel = np.full(T, mel_val)
    if rng.random() < 0.3:
        a = int(rng.integers(0, T - 48))
        mel[a:a + 48] *= float(rng.uniform(0.6, 0.9))
    sel = np.zeros(T) if rng.random() < 0.2 else np.full(T, float(rng.uniform(0.25, 0.5)) * mel.min())
    r_up = float(rng.uniform(100, 600))
    r_dn = float(rng.uniform(100, 600))
    if sel.max() > 0:
        r_up = max(r_up, sel.max() / (3 * dt) * 1.05)
        r_dn = max(r_dn, sel.max() / (3 * dt) * 1.05)
    dyn = PlantDynamics(mel=mel, sel=sel, ramp_up=r_up, ramp_dn=r_dn)
    hours = np.arange(T) * dt
    w = (rng.uniform(35, 65)
         + rng.uniform(5, 25) * np.sin(2 * np.pi * hours / 24.0 + rng.uniform(0, 6))
         + rng.normal(0, 5, T))
    f = np.full(T, float(rng.uniform(12, 28)))
    e = np.full(T, float(rng.uniform(5, 30)))
    market = MarketSeries(grid=make_grid("2018-01-01T00:00:00Z", T, dt),
                          w=w, f=f, e=e, dt=dt)
    params = PlantParameters(
        eta=float(rng.uniform(0.3, 0.6)),
        sigma=float(rng.uniform(0, 60)) * mel_val,
        phi=float(rng.uniform(0, 6)) * mel_val / 100,
        nu=float(rng.uniform(0, 8)),
        epsilon=float(rng.uniform(0.1, 0.4)),
    )
    committed = bool(rng.random() < 0.5)
    p0 = float(rng.uniform(0, mel[0])) if committed else 0.0
    return UcInstance(params=params, dynamics=dyn, market=market,
                      initial_committed=committed, initial_power=p0)


def _level_neutral_price(fuel):
    # price at which one extra MWh is worth nothing for the true parameters:
    # nu* + (fuel + e*eps*) / eta*, with e = 20
    return TRUE_PARAMS.nu + (fuel + 20.0 * EPSILON) / TRUE_PARAMS.eta


def recovery_market(T=672):
    """Two-week half-hourly price series with designed decision families.

    Calibrated against TRUE_PARAMS so that the noiseless closed loop pins
    eta to about (0.4995, 0.5010), sigma to (13900, 17500), nu to
    (1.9, 2.05), and phi to (975, 1025) when the others are held at truth:

    - fine days: strong anchors alternating with small +/-delta blocks whose
      MEL-vs-SEL output choice pins 1/eta and nu + (f + e*eps)/eta
    - two isolated start-window segments on different fuel days whose worths
      bracket sigma*
    - two ride-through dips of different depth separating sigma from phi
    """
    dt = 0.5
    fuels = [20.0, 10.0, 35.0, 20.0, 15.0, 30.0, 25.0,
             10.0, 35.0, 15.0, 30.0, 20.0, 25.0, 12.0]
    n_days = (T + DAY - 1) // DAY
    f = np.concatenate([np.full(DAY, fuels[d % len(fuels)]) for d in range(n_days)])[:T]
    e = np.full(T, 20.0)
    w = np.empty(n_days * DAY)

    deltas = [0.5, 1.0, 0.5, 2.0, 1.0, 0.5, 3.0, 0.5, 1.0, 2.0, 0.5, 1.0, 4.0, 0.5]

    def fine_day(d):
        a = d * DAY
        base = _level_neutral_price(fuels[d % len(fuels)])
        dlt = deltas[d % len(deltas)]
        pattern = [12.0, +dlt, 12.0, -dlt, 12.0, +2 * dlt, 12.0, -2 * dlt]
        for i, off in enumerate(pattern):
            w[a + 6 * i:a + 6 * (i + 1)] = base + off

    def sigma_segment(d, margins):
        a = d * DAY
        base = _level_neutral_price(fuels[d % len(fuels)])
        w[a:a + DAY] = base - 25.0
        pos = a + 4
        for m in margins:
            w[pos:pos + 8] = base + m
            pos += 8 + 10

    def ride_day(d, depth):
        a = d * DAY
        base = _level_neutral_price(fuels[d % len(fuels)])
        pattern = [(6, 12.0), (12, -depth), (6, 12.0), (6, 0.5), (6, 12.0),
                   (6, -0.5), (6, 12.0)]
        pos = a
        for ln, off in pattern:
            w[pos:pos + ln] = base + off
            pos += ln

    for d in range(n_days):
        fine_day(d)
    w[:DAY] = _level_neutral_price(fuels[0]) - 20.0  # opening day off
    if n_days > 3:
        sigma_segment(3, (11.0, 12.9, 16.1, 18.5))
    if n_days > 10:
        sigma_segment(10, (12.2, 15.2))
    if n_days > 6:
        ride_day(6, 6.7)
    if n_days > 12:
        ride_day(12, 8.4)

    grid = make_grid("2018-01-01T00:00:00Z", T, dt)
    return MarketSeries(grid=grid, w=w[:T], f=f, e=e, dt=dt)


@pytest.fixture(scope="session")
def recovery_context():
    """Noiseless closed-loop context on the two-week recovery market."""
    market = recovery_market(672)
    dynamics = flat_dynamics(672)
    observed = synthesize(TRUE_PARAMS, dynamics, market, SolverOptions())
    context = FitContext.from_observed(dynamics, market, observed, epsilon=EPSILON)
    assert not context.initial_committed  # opening day keeps the plant off
    return context


@pytest.fixture(scope="session")
def noisy_recovery_context():
    """The recovery fixture with 5 MW additive noise (known initial state)."""
    market = recovery_market(672)
    dynamics = flat_dynamics(672)
    observed = synthesize(TRUE_PARAMS, dynamics, market, SolverOptions(),
                          noise=5.0, seed=99)
    return FitContext.from_observed(dynamics, market, observed, epsilon=EPSILON,
                                    initial_committed=False, initial_power=0.0)
