"""Exact driven-lattice integration: stepping, kicks, inputs, monitoring."""

import math
import warnings

import numpy as np
import pytest

from fluxlattice import (
    DriveSpec,
    IntegratorOptions,
    LatticeWindow,
    WaveField,
    Waveform,
    evolve_effective,
    evolve_full,
    gauge_map,
    gaussian_input,
    hoppings_from_drive,
    model_deviation,
    smoothed_delta_train,
)
from fluxlattice.dynamics import _neighbor_matrix

PI = math.pi
TWO_PI = 2.0 * PI


def _sinusoidal(omega=8.0, Gamma=0.717, M=1, sigma=PI, rho=PI, beta0=0.0):
    return DriveSpec.resonant(omega=omega, Gamma=Gamma, M=M, sigma=sigma,
                              rho=rho, waveform=Waveform.sinusoidal(),
                              beta0=beta0)


def _delta(omega=8.0, Gamma=0.717, M=1, sigma=PI, rho=PI, beta0=0.0):
    return DriveSpec.resonant(omega=omega, Gamma=Gamma, M=M, sigma=sigma,
                              rho=rho, waveform=Waveform.delta_kicks(),
                              beta0=beta0)


# -- hopping matrix assembly ----------------------------------------------------

def test_neighbor_matrix_matches_dense_reference():
    w = LatticeWindow(0, 2, 0, 1)  # 3 x 2, flattened i = n*2 + m
    up_x = -0.7 + 0.2j
    up_y = np.array([-0.4 * np.exp(1j * 0.3 * n) for n in range(3)])
    H = _neighbor_matrix(w, up_x, up_y).toarray()
    ref = np.zeros((6, 6), dtype=complex)
    for n in range(2):
        for m in range(2):
            i, j = n * 2 + m, (n + 1) * 2 + m
            ref[i, j] = up_x
            ref[j, i] = np.conj(up_x)
    for n in range(3):
        i = n * 2 + 0
        ref[i, i + 1] = up_y[n]
        ref[i + 1, i] = np.conj(up_y[n])
    np.testing.assert_allclose(H, ref, atol=0)
    np.testing.assert_allclose(H, H.conj().T, atol=0)


def test_neighbor_matrix_single_site_is_empty():
    H = _neighbor_matrix(LatticeWindow(0, 0, 0, 0), -1.0, -1.0)
    assert H.nnz == 0


# -- single-site and two-site analytic checks -----------------------------------

def test_single_site_accumulates_modulation_phase():
    # no hopping, one site at the origin: i dc/dt = A cos(omega t) c exactly
    w = LatticeWindow(0, 0, 0, 0)
    d = _sinusoidal(omega=6.0, Gamma=0.4, beta0=0.9)
    c0 = WaveField(w, np.ones((1, 1)))
    ts = np.array([0.3, 0.8, 1.7])
    traj = evolve_full(c0, d, 0.0, 0.0, ts)
    for t, f in zip(ts, traj.fields):
        phase = d.beta0 * t + d.Gamma * (math.sin(d.omega * t) - 0.0)
        assert f.amplitudes[0, 0] == pytest.approx(np.exp(-1j * phase), abs=1e-7)


def test_two_site_rabi_effective_and_full():
    # vertical pair: the effective model is a two-level system with coupling
    # |kappa_y|, so the upper-site population is sin^2(|kappa_y| t)
    w = LatticeWindow(0, 0, 0, 1)
    d = _sinusoidal(omega=40.0)
    h = hoppings_from_drive(d, 0.0, 0.5)
    f0 = WaveField(w, np.array([[1.0, 0.0]]))
    k = abs(h.kappa_y)
    ts = np.linspace(0.5, PI / k, 7)
    eff = evolve_effective(f0, h, ts)
    for t, f in zip(ts, eff.fields):
        assert abs(f.amplitudes[0, 1]) ** 2 == pytest.approx(
            math.sin(k * t) ** 2, abs=2e-7)
    # the driven run reproduces it stroboscopically up to O(1/omega)
    period = TWO_PI / 40.0
    t_str = np.arange(1, int(5.8 / period)) * period
    full = evolve_full(f0, d, 0.0, 0.5, t_str)
    pops = np.array([abs(f.amplitudes[0, 1]) ** 2 for f in full.fields])
    np.testing.assert_allclose(pops, np.sin(k * t_str) ** 2, atol=0.05)


# -- delta-kick engine -----------------------------------------------------------

def test_kick_phase_pattern_no_hopping():
    # sigma = rho = pi: every site kicks at t = j T/2 with site sign (-1)^(n+m),
    # so just after t = 0 the state is c0 * exp(-i F m t) * exp(-i G (-1)^(n+m))
    w = LatticeWindow.centered(1)
    d = _delta(omega=8.0, Gamma=0.6)
    c0 = WaveField(w, np.ones((3, 3)) / 3.0)
    t = 0.3 * d.period / 2.0
    traj = evolve_full(c0, d, 0.0, 0.0, [t])
    n = w.n_grid
    m = w.m_grid
    expect = (np.ones((3, 3)) / 3.0
              * np.exp(-1j * d.F * m * t)
              * np.exp(-1j * 0.6 * (-1.0) ** (n + m)))
    np.testing.assert_allclose(traj.fields[0].amplitudes, expect, atol=1e-9)


def test_kick_engine_against_dense_reference():
    # independent reference: exact eigendecomposition propagation between
    # kicks, kick times and signs recomputed from first principles per site
    w = LatticeWindow.centered(1)
    J_x, J_y = 0.7, 0.4
    d = DriveSpec.resonant(omega=7.3, Gamma=0.9, M=1, sigma=PI / 2, rho=PI / 3,
                           waveform=Waveform.delta_kicks(), beta0=0.25)
    rng = np.random.default_rng(7)
    amps = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    amps /= np.linalg.norm(amps)
    c0 = WaveField(w, amps)
    ts = np.array([0.3, 0.7, 1.1, 1.5])
    opts = IntegratorOptions(norm_drift_tol=1e-12)
    traj = evolve_full(c0, d, J_x, J_y, ts, opts)

    # dense reference
    H = np.zeros((9, 9), dtype=complex)
    sites = [(n, m) for n in (-1, 0, 1) for m in (-1, 0, 1)]
    index = {s: i for i, s in enumerate(sites)}
    for (n, m), i in index.items():
        H[i, i] = d.beta0 + d.F * m
        for dn, dm, J in ((1, 0, J_x), (0, 1, J_y)):
            j = index.get((n + dn, m + dm))
            if j is not None:
                H[i, j] -= J
                H[j, i] -= J
    evals, vecs = np.linalg.eigh(H)

    def propagate(psi, dt):
        return vecs @ (np.exp(-1j * evals * dt) * (vecs.conj().T @ psi))

    events = []  # (t, site index, kick sign)
    for (n, m), i in index.items():
        phi = n * d.sigma + m * d.rho
        l_lo = math.ceil((0.0 - 1e-9) * d.omega / PI + phi / PI)
        l_hi = math.floor(ts[-1] * d.omega / PI + phi / PI + 1e-9)
        for l in range(l_lo, l_hi + 1):
            events.append(((l * PI - phi) / d.omega, i, (-1.0) ** l))
    events.sort(key=lambda e: e[0])
    psi = amps.ravel().astype(complex)
    t_cur, k = 0.0, 0
    for si, t_target in enumerate(ts):
        while k < len(events) and events[k][0] <= t_target + 1e-9:
            te, i, sgn = events[k]
            psi = propagate(psi, max(te - t_cur, 0.0))
            t_cur = max(t_cur, te)
            psi[i] *= np.exp(-1j * d.Gamma * sgn)
            k += 1
        psi = propagate(psi, t_target - t_cur)
        t_cur = t_target
        np.testing.assert_allclose(traj.fields[si].amplitudes.ravel(), psi,
                                   atol=1e-7)


def test_delta_kicks_converge_to_smoothed_drive():
    # same run with kicks replaced by narrow smooth pulses; samples mid-gap,
    # moduli compared (the two runs differ by a global phase)
    w = LatticeWindow.centered(2)
    omega = 20.0
    T = TWO_PI / omega
    dk = _delta(omega=omega, Gamma=0.7)
    sm = DriveSpec.resonant(omega=omega, Gamma=0.7, M=1, sigma=PI, rho=PI,
                            waveform=smoothed_delta_train(0.02))
    c0 = gaussian_input(w, 1.5)
    ts = (np.arange(6) + 0.25) * T
    t_start = -0.25 * T  # cover the t = 0 pulse of the smooth drive in full
    r1 = evolve_full(c0, dk, 0.5, 0.5, ts, t_start=t_start)
    r2 = evolve_full(c0, sm, 0.5, 0.5, ts, t_start=t_start)
    mismatch = max(np.max(np.abs(np.abs(a.amplitudes) - np.abs(b.amplitudes)))
                   for a, b in zip(r1.fields, r2.fields))
    assert mismatch < 2e-3


# -- monitoring and validation ----------------------------------------------------

def test_norm_budget_holds_without_warning():
    w = LatticeWindow.centered(5)
    d = _sinusoidal()
    c0 = gaussian_input(w, 2.0, drive=d, imprint=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        traj = evolve_full(c0, d, 1.0, 1.0, np.linspace(0.0, 3.0, 7))
    drift = np.max(np.abs(traj.norms - traj.norms[0]))
    assert drift <= 1e-8 * 1.0 * 3.0
    assert traj.norms[0] == pytest.approx(1.0, abs=1e-12)


def test_truncation_flag_on_saturated_window():
    w = LatticeWindow.centered(4)
    d = _sinusoidal()
    c0 = gaussian_input(w, 3.0)  # tail already on the edge ring
    traj = evolve_full(c0, d, 1.0, 1.0, [0.5])
    assert traj.truncation_warning
    assert traj.edge_mass_max > 1e-6


def test_step_size_underflow_raises():
    w = LatticeWindow(0, 0, 0, 0)
    d = _sinusoidal(omega=1e12, Gamma=1.0)
    c0 = WaveField(w, np.ones((1, 1)))
    with pytest.raises(ValueError, match="underflow"):
        evolve_full(c0, d, 1.0, 1.0, [0.1])


def test_sample_grid_validation():
    w = LatticeWindow(0, 0, 0, 0)
    d = _sinusoidal()
    c0 = WaveField(w, np.ones((1, 1)))
    with pytest.raises(ValueError, match="nonempty"):
        evolve_full(c0, d, 1.0, 1.0, [])
    with pytest.raises(ValueError, match="increasing"):
        evolve_full(c0, d, 1.0, 1.0, [0.2, 0.1])
    with pytest.raises(ValueError, match="precede"):
        evolve_full(c0, d, 1.0, 1.0, [0.1], t_start=0.2)
    with pytest.raises(ValueError, match="dt_max"):
        IntegratorOptions(dt_max=-0.1)


# -- input states -------------------------------------------------------------------

def test_gaussian_input_norm_and_tilt():
    w = LatticeWindow.centered(15)
    width, p = 5.0, 0.5
    c = gaussian_input(w, width, tilt=p)
    assert c.norm_sq == pytest.approx(1.0, abs=1e-12)
    # e^{-i p n} reads out as <sin Pn> = -sin(p) e^{-1/(2 w^2)}
    f = c.amplitudes
    corr = np.sum(np.conj(f[:-1, :]) * f[1:, :])
    assert corr.imag == pytest.approx(-math.sin(p) * math.exp(-1 / (2 * width ** 2)),
                                      abs=1e-6)


def test_gaussian_input_imprint():
    w = LatticeWindow.centered(4)
    d = _sinusoidal()
    plain = gaussian_input(w, 2.0)
    stamped = gaussian_input(w, 2.0, drive=d, imprint=True)
    np.testing.assert_allclose(np.abs(stamped.amplitudes), np.abs(plain.amplitudes),
                               atol=1e-14)
    assert not np.allclose(stamped.amplitudes, plain.amplitudes)
    with pytest.raises(ValueError, match="drive"):
        gaussian_input(w, 2.0, imprint=True)
    with pytest.raises(ValueError, match="width"):
        gaussian_input(w, 0.0)


# -- gradient suppression and drive-restored tunneling -------------------------------

def _row_input(window, width):
    n = window.n_grid
    m = window.m_grid
    psi = np.exp(-n ** 2 / width ** 2) * (m == 0.0)
    return WaveField(window, psi / np.linalg.norm(psi))


def _m_stats(field):
    w = field.window
    weight = np.abs(field.amplitudes) ** 2
    weight /= weight.sum()
    m1 = float(np.sum(w.m_grid * weight))
    m2 = float(np.sum(w.m_grid ** 2 * weight))
    return m1, math.sqrt(max(m2 - m1 ** 2, 0.0))


def test_gradient_freezes_vertical_motion():
    # no modulation: the gradient detunes vertical tunneling, pinning <m>;
    # the leaked population saturates at O((J/F)^2), so the width stays put
    w = LatticeWindow.centered(8)
    d = _sinusoidal(Gamma=0.0)
    c0 = _row_input(w, 3.0)
    traj = evolve_full(c0, d, 1.0, 1.0, np.linspace(1.0, 5.0, 5))
    for f in traj.fields:
        m1, m_std = _m_stats(f)
        assert abs(m1) < 0.05
        assert m_std < 0.5


def test_modulation_restores_vertical_tunneling():
    # same input, resonant flux-free drive on: the effective model separates
    # into plain 1-d chains, so the row spreads at std = sqrt(2) kappa_y t
    w = LatticeWindow.centered(8, 14)
    d = _sinusoidal(sigma=0.0)
    k_y = abs(hoppings_from_drive(d, 1.0, 1.0).kappa_y)
    c0 = _row_input(w, 3.0)
    traj = evolve_full(c0, d, 1.0, 1.0, [5.0])
    m1, m_std = _m_stats(traj.fields[0])
    assert abs(m1) < 0.5
    assert m_std == pytest.approx(math.sqrt(2.0) * k_y * 5.0, rel=0.1)
    assert m_std > 2.0


def test_modulation_restores_ballistic_transport():
    # broad m-tilted packet, flux-free drive geometry: center of mass moves
    # at 2 kappa_y sin(p); with the drive off it only Bloch-oscillates
    w = LatticeWindow.centered(10, 14)
    d = _sinusoidal(sigma=0.0)
    n = w.n_grid
    m = w.m_grid
    bare = np.exp(-(n ** 2 + m ** 2) / 25.0) * np.exp(-1j * (PI / 2) * m)
    bare /= np.linalg.norm(bare)
    from fluxlattice import gauge_unmap
    c0 = gauge_unmap(WaveField(w, bare), 0.0, d, side="left")
    traj = evolve_full(c0, d, 1.0, 1.0, [3.0])
    m1, _ = _m_stats(traj.fields[0])
    k_y = abs(hoppings_from_drive(d, 1.0, 1.0).kappa_y)
    drift = 2.0 * k_y * math.sin(PI / 2) * math.exp(-1 / 50.0) * 3.0
    assert abs(m1) > 0.5
    assert m1 == pytest.approx(-drift, rel=0.15)  # tilt e^{-ipm} moves down

    off = _sinusoidal(sigma=0.0, Gamma=0.0)
    ctrl = evolve_full(WaveField(w, bare), off, 1.0, 1.0,
                       np.linspace(0.5, 3.0, 6))
    for f in ctrl.fields:
        m1c, _ = _m_stats(f)
        assert abs(m1c) < 0.3


# -- effective-model consistency ------------------------------------------------------

def test_deviation_shrinks_when_omega_doubles():
    w = LatticeWindow.centered(7)
    peaks = []
    for om in (8.0, 16.0):
        d = _sinusoidal(omega=om)
        c0 = gaussian_input(w, 3.0, drive=d, imprint=True)
        period = TWO_PI / om
        ts = np.arange(int(3.0 / period) + 1) * period
        full = evolve_full(c0, d, 1.0, 1.0, ts)
        h = hoppings_from_drive(d, 1.0, 1.0)
        eff = evolve_effective(gauge_map(c0, 0.0, d, side="left"), h, ts)
        peaks.append(model_deviation(full, eff, d).peak)
    assert 0.35 < peaks[1] / peaks[0] < 0.7


def test_undriven_model_equals_bare_effective_model():
    # A = 0, F = 0: both integrators solve the same bare lattice
    w = LatticeWindow.centered(6)
    d = DriveSpec(beta0=0.0, F=0.0, omega=TWO_PI, A=0.0, M=0, sigma=0.4,
                  rho=0.9, waveform=Waveform.sinusoidal())
    h = hoppings_from_drive(d, 0.8, 0.6, method="quadrature")
    assert h.kappa_x == pytest.approx(0.8, abs=1e-12)
    assert h.kappa_y == pytest.approx(0.6, abs=1e-12)
    c0 = gaussian_input(w, 2.0)
    ts = np.arange(4, dtype=float)  # period = 1, stroboscopic by construction
    full = evolve_full(c0, d, 0.8, 0.6, ts)
    eff = evolve_effective(c0, h, ts)
    assert model_deviation(full, eff, d).peak < 1e-6
