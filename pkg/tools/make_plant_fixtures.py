"""Regenerate the benchmark plant fixtures in src/proxyfalsify/data/plants."""
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "proxyfalsify" / "data" / "plants"


def abs_spec(horizon, pairs, cmp="<"):
    body = " and ".join(f"abs({v}) {cmp} {c}" for v, c in pairs)
    return f"always[0,{horizon}] ({body})"


def platoon(n_cars):
    # interleaved [v1, g1, v2, g2, ..., vn]: v_i' = u_i, g_i' = v_i - v_{i+1}
    n = 2 * n_cars - 1
    A = np.zeros((n, n))
    B = np.zeros((n, n_cars))
    for i in range(n_cars):
        B[2 * i, i] = 1.0
    for i in range(n_cars - 1):
        A[2 * i + 1, 2 * i] = 1.0
        A[2 * i + 1, 2 * i + 2] = -1.0
    return A, B


def oscillator():
    n = 18
    A = np.zeros((n, n))
    B = np.zeros((n, 2))
    A[0, 0], A[0, 1] = -0.1, 1.0
    A[1, 0], A[1, 1] = -1.0, -0.1
    B[0, 0] = B[1, 1] = 1.0
    k = 2.0
    A[2, 2], A[2, 0] = -k, k
    for i in range(3, n):
        A[i, i], A[i, i - 1] = -k, k
    return A, B


def main():
    letters4 = "abcdefg"
    letters8 = "abcdefghijklmno"
    p4 = [2.0, 0.5, 0.35, 0.5, 1.0, 0.5, 1.0]
    p8 = [2.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0]
    A4, B4 = platoon(4)
    A8, B8 = platoon(8)
    Ao, Bo = oscillator()
    plants = [
        dict(name="cartpole", state_dim=4, control_dim=1, dt=0.02, horizon=200,
             init_box=[[-0.05, 0.05]] * 4, control_bounds=[[-10.0, 10.0]],
             variables=["delta", "v1", "eta", "v2"],
             spec=abs_spec(200, [("eta", "pi/2"), ("delta", 0.3), ("v1", 0.3), ("v2", 0.5)]),
             params=dict(g=9.8, cart_mass=1.0, pole_mass=0.1, half_length=0.5)),
        dict(name="pendulum", state_dim=2, control_dim=1, dt=0.02, horizon=200,
             init_box=[[-0.35, 0.35], [-0.35, 0.35]], control_bounds=[[-15.0, 15.0]],
             variables=["eta", "omega"],
             spec=abs_spec(200, [("eta", "pi/2"), ("omega", "pi/2")]),
             params=dict(g=9.8, m=1.0, l=1.0)),
        dict(name="quadcopter", state_dim=2, control_dim=1, dt=0.02, horizon=300,
             init_box=[[-0.3, 0.3], [-0.3, 0.3]], control_bounds=[[-10.0, 10.0]],
             variables=["eta1", "eta2"],
             spec=abs_spec(300, [("eta1", "pi/2"), ("eta2", "pi/2")]),
             A=[[0.0, 1.0], [1.5, 0.0]], B=[[0.0], [1.0]]),
        dict(name="self_driving", state_dim=2, control_dim=1, dt=0.1, horizon=200,
             init_box=[[-0.3, 0.3], [-1.0, 1.0]], control_bounds=[[-10.0, 10.0]],
             variables=["eta", "d"],
             spec=abs_spec(200, [("eta", "pi/2"), ("d", 2.0)]),
             params=dict(speed=2.0)),
        dict(name="lane_keeping", state_dim=4, control_dim=2, dt=0.02, horizon=300,
             init_box=[[-0.3, 0.3], [-0.2, 0.2], [-0.1, 0.1], [-0.1, 0.1]],
             control_bounds=[[-1.0, 1.0], [-1.0, 1.0]],
             variables=["d", "vd", "psi", "vpsi"],
             spec=abs_spec(300, [("d", 0.9)]),
             A=[[0.0, 1.0, 0.0, 0.0], [0.0, -2.0, 10.0, 0.0],
                [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, -3.0]],
             B=[[0.0, 0.0], [2.0, 0.0], [0.0, 0.0], [1.0, 0.5]]),
        dict(name="platoon4", state_dim=7, control_dim=4, dt=0.1, horizon=200,
             init_box=[[-0.1, 0.1]] * 7, control_bounds=[[-5.0, 5.0]] * 4,
             variables=list(letters4),
             spec=abs_spec(200, list(zip(letters4, p4)), "<="),
             A=A4.tolist(), B=B4.tolist()),
        dict(name="platoon8", state_dim=15, control_dim=8, dt=0.1, horizon=200,
             init_box=[[-0.1, 0.1]] * 15, control_bounds=[[-5.0, 5.0]] * 8,
             variables=list(letters8),
             spec=abs_spec(200, list(zip(letters8, p8)), "<="),
             A=A8.tolist(), B=B8.tolist()),
        dict(name="oscillator", state_dim=18, control_dim=2, dt=0.05, horizon=300,
             init_box=[[-0.5, 0.5], [-0.5, 0.5]] + [[0.0, 0.0]] * 16,
             control_bounds=[[-1.0, 1.0], [-1.0, 1.0]],
             variables=["x1", "x2"] + [f"z{i}" for i in range(1, 16)] + ["a"],
             spec="always[0,300] (a < 0.05)",
             A=Ao.tolist(), B=Bo.tolist()),
    ]
    OUT.mkdir(parents=True, exist_ok=True)
    for p in plants:
        (OUT / f"{p['name']}.json").write_text(json.dumps(p, indent=1) + "\n")


if __name__ == "__main__":
    main()
