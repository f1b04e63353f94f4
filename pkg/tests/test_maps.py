import numpy as np
import pytest
from numpy.testing import assert_allclose

from nongauss.errors import UnsupportedMapError, ZeroProbabilityError
from nongauss.fock import (
    FockArray,
    apply_map,
    apply_unitary,
    build_state,
    build_unitary,
    delta_g,
    gaussian_to_fock,
    gaussify,
    moments,
    von_neumann_entropy,
)
from nongauss.maps import (
    MapDescriptor,
    bps,
    coherent_projector,
    gaussian_dilatable,
    identity_map,
    kerr,
    loss,
    normalization_pna,
    normalization_pns,
    parse_map_spec,
    parse_state_spec,
    pna,
    pns,
)
from nongauss.gaussian import gaussian_unitary


def _product_ket(a, b):
    return FockArray(
        a.n_modes + b.n_modes, a.cutoff, "ket", np.multiply.outer(a.data, b.data)
    )


def test_pns_on_fock_two():
    d = 12
    state = build_state("fock", 2, d)
    out, weight = apply_map(state, pns(d).body)
    ref = build_state("fock", 1, d)
    assert_allclose(out.data, ref.data, atol=1e-12)
    assert abs(weight - 2.0) < 1e-12  # <a†a> of |2>


def test_pna_on_vacuum():
    d = 12
    out, weight = apply_map(build_state("vacuum", None, d), pna(d).body)
    ref = build_state("fock", 1, d)
    assert_allclose(out.data, ref.data, atol=1e-12)
    assert abs(weight - 1.0) < 1e-12


def test_pns_success_weight_on_tmsv():
    d = 20
    zeta = build_state("tmsv", 1.0, d, trace_tol=1e-5)
    out, weight = apply_map(zeta, pns(d).body, targets=[1])
    assert abs(weight - 1.0) < 1e-4  # Tr[a_B ρ a_B†] = N_S
    m = moments(out)
    assert abs(m.adag_a[1, 1].real - 2.0) < 1e-3  # subtraction doubles <n_B>


def test_small_cutoff_rejected():
    with pytest.raises(ValueError):
        pns(2)
    with pytest.raises(ValueError):
        pna(2)


def test_normalization_closed_forms():
    assert abs(normalization_pns(0.0, 0.0, 1.0) - 1.0) < 1e-12
    assert abs(normalization_pna(0.0, 0.0, 0.0) - 1.0) < 1e-12
    with pytest.raises(ZeroProbabilityError):
        normalization_pns(0.0, 0.0, 0.0)


def test_normalization_matches_fock_weight():
    # displaced squeezed TMSV arm, weights from the closed forms
    d = 45
    alpha, r, theta, n_s = 1.0, 0.5, 0.7, 0.5
    psi = build_state("tmsv", n_s, d, trace_tol=1e-5)
    for kind, par in (("squeeze", r), ("rotation", theta), ("displacement", alpha)):
        psi = apply_unitary(psi, build_unitary(kind, par, d), targets=[1])
    _, w_sub = apply_map(psi, pns(d).body, targets=[1])
    _, w_add = apply_map(psi, pna(d).body, targets=[1])
    assert abs(w_sub**-0.5 - normalization_pns(alpha, r, n_s)) < 1e-6
    assert abs(w_add**-0.5 - normalization_pna(alpha, r, n_s)) < 1e-6


def test_bps_on_vacuum_is_identity():
    d = 10
    out, prob = apply_map(build_state("vacuum", None, d), bps(d).body)
    assert abs(prob - 1.0) < 1e-12
    ref = build_state("vacuum", None, d).to_density()
    assert_allclose(out.data, ref.data, atol=1e-12)


def test_bps_dephases_coherent_state():
    d = 25
    alpha = 1.0
    out, prob = apply_map(build_state("coherent", alpha, d), bps(d).body)
    assert abs(prob - 1.0) < 1e-12
    plus = build_state("coherent", alpha, d).to_density().data
    minus = build_state("coherent", -alpha, d).to_density().data
    assert_allclose(out.data, 0.5 * plus + 0.5 * minus, atol=1e-10)


def test_bps_output_entropy_at_most_one_bit():
    d = 30
    for spec in ("coherent:1.3", "fock:3", "cat:1.0"):
        state = parse_state_spec(spec, d)
        out, _ = apply_map(state, bps(d).body)
        assert von_neumann_entropy(out) <= 1.0 + 1e-9


def test_kerr_trivial_angles():
    d = 15
    for gamma in (0.0, 2.0 * np.pi):
        tag, u = kerr(gamma, d).body.body
        assert tag == "unitary"
        assert_allclose(u, np.eye(d), atol=1e-12)


def test_kerr_makes_coherent_state_non_gaussian():
    d = 40
    out, _ = apply_map(build_state("coherent", 1.0, d), kerr(np.pi / 2, d).body)
    assert delta_g(out) > 0.1


def test_identity_map_passthrough():
    d = 12
    state = build_state("cat", 1.0, d)
    out, prob = apply_map(state, identity_map(d).body)
    assert abs(prob - 1.0) < 1e-12
    assert_allclose(out.data, state.data, atol=1e-12)


def test_coherent_projector_on_product_input():
    d = 25
    beta, gamma_in, alpha = 0.8, -0.3, 1.0
    joint = _product_ket(
        build_state("coherent", beta, d), build_state("coherent", gamma_in, d)
    )
    out, weight = apply_map(joint, coherent_projector(alpha, d).body)
    assert out.n_modes == 1
    expected_weight = np.exp(-abs(alpha - gamma_in) ** 2)
    assert abs(weight - expected_weight) < 1e-8
    ref = build_state("coherent", beta, d).to_density()
    assert_allclose(out.to_density().data, ref.data, atol=1e-8)


def _correlated_coherent_mixture(alpha, d):
    # ½(|α,α><α,α| + |-α,-α><-α,-α|)
    plus = build_state("coherent", alpha, d)
    minus = build_state("coherent", -alpha, d)
    both_p = _product_ket(plus, plus).to_density().data
    both_m = _product_ket(minus, minus).to_density().data
    return FockArray(2, d, "density", 0.5 * both_p + 0.5 * both_m)


def test_correlated_mixture_covariance():
    d = 30
    alpha = 1.0
    g = gaussify(_correlated_coherent_mixture(alpha, d))
    block = 4.0 * alpha**2
    expected = np.array(
        [
            [block + 1.0, 0.0, block, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [block, 0.0, block + 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    assert_allclose(g.cov, expected, atol=1e-8)
    assert_allclose(g.mean, np.zeros(4), atol=1e-10)


def test_projection_does_not_commute_with_gaussification():
    # the two composition orders give different <a> on the surviving mode
    d = 30
    for alpha in (0.5, 1.0):
        sigma = _correlated_coherent_mixture(alpha, d)
        t_map = coherent_projector(alpha, d).body

        direct, _ = apply_map(sigma, t_map)
        expected_direct = (
            alpha
            * (1.0 - np.exp(-4.0 * alpha**2))
            / (1.0 + np.exp(-4.0 * alpha**2))
        )
        assert abs(moments(direct).first[0].real - expected_direct) < 1e-3

        fitted = gaussian_to_fock(gaussify(sigma), cutoff=d)
        swapped, _ = apply_map(fitted, t_map)
        expected_swapped = 2.0 * alpha**3 / (1.0 + 2.0 * alpha**2)
        assert abs(moments(swapped).first[0].real - expected_swapped) < 1e-3


def test_projection_can_increase_non_gaussianity():
    # two-mode input: nearly Gaussian, but the branch the projector keeps
    # carries a Fock state
    d = 30
    eps, alpha, n = 0.01, 2.5, 2
    w = np.array([np.sqrt(eps), np.sqrt(1.0 - eps)])
    w /= w.sum()
    fock_n = build_state("fock", n, d).to_density().data
    th = build_state("thermal", 1.0, d).data
    coh_p = build_state("coherent", alpha, d).to_density().data
    coh_m = build_state("coherent", -alpha, d).to_density().data
    rho = FockArray(
        2, d, "density", w[0] * np.kron(fock_n, coh_p) + w[1] * np.kron(th, coh_m)
    )
    out, weight = apply_map(rho, coherent_projector(alpha, d).body)
    assert abs(weight - w[0]) < 1e-4  # only the |α> branch survives
    assert out.data[n, n].real > 0.999
    assert delta_g(out) > delta_g(rho) + 0.5


def test_loss_channel_on_coherent_state():
    d = 30
    tau = 0.7
    desc = loss(tau, d)
    out, prob = apply_map(build_state("coherent", 1.0, d), desc.body)
    assert abs(prob - 1.0) < 1e-10
    ref = build_state("coherent", np.sqrt(tau), d).to_density()
    assert_allclose(out.data, ref.data, atol=1e-8)
    assert delta_g(out) < 1e-6


def test_loss_rejects_bad_transmissivity():
    with pytest.raises(ValueError):
        loss(0.0)
    with pytest.raises(ValueError):
        loss(1.2)


def test_dilated_channel_with_single_photon_environment():
    d = 15
    sym = gaussian_unitary("beamsplitter", 0.5, n_modes=2)
    env = build_state("fock", 1, d)
    desc = gaussian_dilatable(sym, env, d)
    out, prob = apply_map(build_state("vacuum", None, d), desc.body)
    assert abs(prob - 1.0) < 1e-12
    diag = np.diag(out.data).real
    assert_allclose(diag[:2], [0.5, 0.5], atol=1e-10)
    assert abs(diag[2:].sum()) < 1e-10


def test_dilated_channel_preserves_trace_on_random_input():
    d = 20
    rng = np.random.default_rng(7)
    amps = rng.normal(size=5) + 1j * rng.normal(size=5)
    vec = np.zeros(d, dtype=complex)
    vec[:5] = amps / np.linalg.norm(amps)
    state = FockArray(1, d, "ket", vec)
    sym = gaussian_unitary("beamsplitter", 0.31, n_modes=2)
    desc = gaussian_dilatable(sym, build_state("fock", 1, d), d)
    _, prob = apply_map(state, desc.body)
    assert abs(prob - 1.0) < 1e-10


def test_dilated_channel_rejects_mixed_environment():
    d = 10
    sym = gaussian_unitary("beamsplitter", 0.5, n_modes=2)
    env = build_state("thermal", 0.5, d, trace_tol=1e-4)
    with pytest.raises(UnsupportedMapError):
        gaussian_dilatable(sym, env, d)


def test_metadata_consistency_enforced():
    d = 10
    body = bps(d).body
    with pytest.raises(ValueError):
        MapDescriptor("bad", body, d, {"probabilities": (0.3, 0.7)}, "diverging")
    with pytest.raises(ValueError):
        MapDescriptor("bad", body, d, {}, "sideways")


def test_parse_state_spec_kinds():
    d = 20
    coh = parse_state_spec("coherent:1.0,0.5", d)
    ref = build_state("coherent", 1.0 + 0.5j, d)
    assert_allclose(coh.data, ref.data, atol=1e-12)
    assert parse_state_spec("fock:3", d).data[3] == 1.0
    assert parse_state_spec("thermal:0.5", d).kind == "density"
    assert parse_state_spec("tmsv:1.0", d, trace_tol=1e-5).n_modes == 2
    assert parse_state_spec("vacuum", d).data[0] == 1.0
    with pytest.raises(ValueError):
        parse_state_spec("squeezed:0.5", d)
    with pytest.raises(ValueError):
        parse_state_spec("fock:abc", d)


def test_parse_map_spec_kinds():
    d = 25
    assert parse_map_spec("pns", d).name == "pns"
    assert parse_map_spec("pna", d).classification == "finite"
    assert parse_map_spec("bps", d).classification == "diverging"
    assert parse_map_spec("kerr", d).metadata["gamma"] == 0.5
    assert parse_map_spec("kerr:0.25", d).metadata["gamma"] == 0.25
    assert parse_map_spec("talpha:1.0", d).metadata["alpha"] == 1.0 + 0.0j
    assert parse_map_spec("id", d).name == "id"
    assert parse_map_spec("loss:0.9", d).metadata["tau"] == 0.9
    gd = parse_map_spec("gd:bs0.5,env=fock:1", d)
    assert gd.name == "gd"
    assert gd.metadata["environment"].n_modes == 1
    with pytest.raises(ValueError):
        parse_map_spec("nonsense", d)
    with pytest.raises(ValueError):
        parse_map_spec("gd:bs0.5", d)
    with pytest.raises(UnsupportedMapError):
        parse_map_spec("gd:bs0.5,env=thermal:1.0", d)


def test_pure_inputs_stay_pure_under_pns_and_pna():
    d = 25
    rng = np.random.default_rng(11)
    for desc in (pns(d), pna(d)):
        for _ in range(5):
            amps = rng.normal(size=6) + 1j * rng.normal(size=6)
            vec = np.zeros(d, dtype=complex)
            vec[:6] = amps / np.linalg.norm(amps)
            out, _ = apply_map(FockArray(1, d, "ket", vec), desc.body)
            assert out.kind == "ket"  # single Kraus keeps kets kets
            assert abs(np.linalg.norm(out.data) - 1.0) < 1e-9
